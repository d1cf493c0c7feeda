//! Fixed points of the learning dynamics and their stability.
//!
//! Besides the pure defection and pure cooperation planes, the dynamics have
//! a two-dimensional manifold of interior fixed points on which both payoff
//! gaps vanish. Each point of it is labelled by the crossing point
//! `(x_e, y_e)` it produces, and the strategy realising it is unique
//! ([`manifold_point`]). Linearising there always gives two zero eigenvalues
//! (the manifold directions); stability is decided by the other two.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dual::Dual4;
use crate::eigen::{eigenvalues_4x4, Matrix4};
use crate::error::{Error, Result};
use crate::game::{equilibrium, JointStrategy, PayoffMatrix, STRATEGY_NAMES};
use crate::learning::{check_degenerate, field_generic, integrate, IntegratorConfig, LearningSpeeds, Terminal};

/// Inclusive tolerance at 0 and 1 when deciding if a manifold point is a
/// feasible strategy.
pub const FEASIBILITY_TOL: f64 = 1e-12;

/// Default central-difference step of [`jacobian`].
pub const JACOBIAN_STEP: f64 = 1e-6;

/// Outcome of a closed-form stability test of a pure fixed point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PureStability {
    pub stable: bool,
    /// At least one condition holds with equality.
    pub marginal: bool,
}

/// `(P - S) / (T - P)`: largest `xC`, `yC` for which pure defection is stable.
pub fn pure_dd_threshold(pay: &PayoffMatrix) -> f64 {
    (pay.p() - pay.s()) / (pay.t() - pay.p())
}

/// `1 - (T - R) / (R - S)`: largest `xD`, `yD` for which pure cooperation is
/// stable.
pub fn pure_cc_threshold(pay: &PayoffMatrix) -> f64 {
    1.0 - (pay.t() - pay.r()) / (pay.r() - pay.s())
}

fn below(threshold: f64, a: f64, b: f64) -> PureStability {
    PureStability {
        stable: a <= threshold && b <= threshold,
        marginal: a == threshold || b == threshold,
    }
}

/// Stability of the pure defection plane at cooperation levels `xC`, `yC`.
pub fn pure_dd_stability(pay: &PayoffMatrix, x_c: f64, y_c: f64) -> PureStability {
    below(pure_dd_threshold(pay), x_c, y_c)
}

pub fn pure_dd_stable(pay: &PayoffMatrix, x_c: f64, y_c: f64) -> bool {
    pure_dd_stability(pay, x_c, y_c).stable
}

/// Stability of the pure cooperation plane at forgiveness levels `xD`, `yD`.
pub fn pure_cc_stability(pay: &PayoffMatrix, x_d: f64, y_d: f64) -> PureStability {
    below(pure_cc_threshold(pay), x_d, y_d)
}

pub fn pure_cc_stable(pay: &PayoffMatrix, x_d: f64, y_d: f64) -> bool {
    pure_cc_stability(pay, x_d, y_d).stable
}

/// Strategy coordinates of the interior fixed point with crossing point
/// `(x_e, y_e)`, without any feasibility check.
pub fn manifold_coords(pay: &PayoffMatrix, x_e: f64, y_e: f64) -> [f64; 4] {
    let (t, r, p, s) = (pay.t(), pay.r(), pay.p(), pay.s());
    // Slopes of the two response functions that zero both payoff gaps.
    let slope_x = (x_e * (t - r) + (1.0 - x_e) * (p - s)) / (y_e * (r - s) + (1.0 - y_e) * (t - p));
    let slope_y = (y_e * (t - r) + (1.0 - y_e) * (p - s)) / (x_e * (r - s) + (1.0 - x_e) * (t - p));
    [
        x_e + (1.0 - y_e) * slope_x,
        x_e - y_e * slope_x,
        y_e + (1.0 - x_e) * slope_y,
        y_e - x_e * slope_y,
    ]
}

/// The unique interior fixed point whose crossing point is `(x_e, y_e)`.
///
/// Fails with [`Error::OutOfStrategyBox`] when that point is not a valid
/// strategy pair. Components within [`FEASIBILITY_TOL`] of the box are
/// snapped onto it.
pub fn manifold_point(pay: &PayoffMatrix, x_e: f64, y_e: f64) -> Result<JointStrategy> {
    if !(x_e > 0.0 && x_e < 1.0 && y_e > 0.0 && y_e < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "manifold points need 0 < x_e, y_e < 1, got ({x_e}, {y_e})"
        )));
    }
    let coords = manifold_coords(pay, x_e, y_e);
    for (value, component) in coords.iter().zip(STRATEGY_NAMES) {
        if *value < -FEASIBILITY_TOL || *value > 1.0 + FEASIBILITY_TOL {
            return Err(Error::OutOfStrategyBox {
                x_e,
                y_e,
                component,
                value: *value,
            });
        }
    }
    Ok(JointStrategy::clamped(coords))
}

/// Central finite differences of the learning field at `s`, step `h`.
pub fn jacobian(pay: &PayoffMatrix, s: &JointStrategy, sp: &LearningSpeeds, h: f64) -> Result<Matrix4> {
    check_degenerate(s)?;
    if !(h > 0.0) {
        return Err(Error::InvalidArgument(format!("finite-difference step must be positive, got {h}")));
    }
    let v = s.as_array();
    let mut jac = [[0.0; 4]; 4];
    for col in 0..4 {
        let mut plus = v;
        let mut minus = v;
        plus[col] += h;
        minus[col] -= h;
        let fp = field_generic(pay, plus, sp);
        let fm = field_generic(pay, minus, sp);
        for row in 0..4 {
            jac[row][col] = (fp[row] - fm[row]) / (2.0 * h);
        }
    }
    Ok(jac)
}

/// Jacobian of the learning field by forward-mode differentiation.
pub fn jacobian_exact(pay: &PayoffMatrix, s: &JointStrategy, sp: &LearningSpeeds) -> Result<Matrix4> {
    check_degenerate(s)?;
    let v = s.as_array();
    let seeded: [Dual4; 4] = std::array::from_fn(|i| Dual4::variable(v[i], i));
    let f = field_generic(pay, seeded, sp);
    Ok(std::array::from_fn(|row| f[row].grad))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FixedPointKind {
    PureDD,
    PureCC,
    Interior,
}

/// How the linearisation is obtained.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum JacobianMethod {
    Exact,
    FiniteDifference { step: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StabilityOptions {
    pub jacobian: JacobianMethod,
    /// Eigenvalues below `zero_tol_rel * max |lambda|` count as neutral.
    pub zero_tol_rel: f64,
    /// Required ratio between the smallest classified and the largest
    /// neutral eigenvalue magnitude.
    pub min_gap: f64,
}

impl Default for StabilityOptions {
    fn default() -> Self {
        Self {
            jacobian: JacobianMethod::Exact,
            zero_tol_rel: 1e-5,
            min_gap: 10.0,
        }
    }
}

/// Linear stability of one fixed point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub location: JointStrategy,
    pub eq_point: (f64, f64),
    pub kind: FixedPointKind,
    /// All four eigenvalues, real part descending.
    pub eigenvalues: [Complex64; 4],
    /// The two eigenvalues that decide stability, largest real part first.
    pub classified: [Complex64; 2],
    pub n_zero: usize,
    pub stable: bool,
    pub oscillatory: bool,
}

/// Linear stability of the manifold point with crossing point `(x_e, y_e)`.
pub fn classify_interior(
    pay: &PayoffMatrix,
    x_e: f64,
    y_e: f64,
    sp: &LearningSpeeds,
) -> Result<StabilityReport> {
    classify_interior_with(pay, x_e, y_e, sp, &StabilityOptions::default())
}

pub fn classify_interior_with(
    pay: &PayoffMatrix,
    x_e: f64,
    y_e: f64,
    sp: &LearningSpeeds,
    opts: &StabilityOptions,
) -> Result<StabilityReport> {
    let location = manifold_point(pay, x_e, y_e)?;
    let jac = match opts.jacobian {
        JacobianMethod::Exact => jacobian_exact(pay, &location, sp)?,
        JacobianMethod::FiniteDifference { step } => jacobian(pay, &location, sp, step)?,
    };
    let eigenvalues = eigenvalues_4x4(&jac);

    let mut by_size = eigenvalues;
    by_size.sort_by(|a, b| a.norm().total_cmp(&b.norm()));
    let scale = by_size[3].norm();
    let zero_tol = opts.zero_tol_rel * scale;
    let gap_ratio = by_size[2].norm() / by_size[1].norm().max(f64::MIN_POSITIVE);
    if scale == 0.0 || by_size[1].norm() >= zero_tol || gap_ratio < opts.min_gap {
        return Err(Error::AmbiguousZeroSplit { gap_ratio });
    }
    let n_zero = eigenvalues.iter().filter(|e| e.norm() < zero_tol).count();
    let mut classified = [by_size[2], by_size[3]];
    classified.sort_by(|a, b| b.re.total_cmp(&a.re).then(b.im.total_cmp(&a.im)));
    let stable = classified.iter().all(|e| e.re < 0.0);
    let oscillatory = classified.iter().any(|e| e.im.abs() > 1e-10 * scale);

    Ok(StabilityReport {
        location,
        eq_point: (x_e, y_e),
        kind: FixedPointKind::Interior,
        eigenvalues,
        classified,
        n_zero,
        stable,
        oscillatory,
    })
}

/// Result of perturbing a manifold point and letting the dynamics run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DynamicVerdict {
    /// The trajectory's fate matches the linear prediction.
    Agrees,
    Disagrees,
    /// The run did not settle within the integration horizon.
    Inconclusive,
}

/// Settings of [`dynamic_check`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DynamicCheck {
    /// Size of the larger of the two initial displacements; the second run
    /// uses a tenth of it.
    pub perturbation: f64,
    /// Largest ratio of the two excursions still read as linear decay.
    pub ratio_threshold: f64,
    pub integrator: IntegratorConfig,
}

impl Default for DynamicCheck {
    fn default() -> Self {
        Self {
            perturbation: 1e-4,
            ratio_threshold: 0.3,
            integrator: IntegratorConfig {
                t_max: 5e3,
                sample_interval: 1.0,
                ..IntegratorConfig::default()
            },
        }
    }
}

/// Largest sup-norm distance from `base` along the trajectory started at
/// `base` displaced by `size` in a fixed generic direction.
fn excursion(
    pay: &PayoffMatrix,
    base: [f64; 4],
    size: f64,
    sp: &LearningSpeeds,
    cfg: &IntegratorConfig,
) -> Result<(f64, bool)> {
    let direction = [1.0, -0.7, 0.5, -0.3];
    let norm = direction.iter().map(|d: &f64| d * d).sum::<f64>().sqrt();
    let start: [f64; 4] = std::array::from_fn(|i| {
        // Push away from a face the point sits on rather than through it.
        let mut step = size * direction[i] / norm;
        if base[i] + step < 0.0 || base[i] + step > 1.0 {
            step = -step;
        }
        base[i] + step
    });
    let rec = integrate(pay, &JointStrategy::clamped(start), sp, cfg)?;
    let dist = rec
        .states
        .iter()
        .flat_map(|s| s.as_array().into_iter().zip(base).map(|(a, b)| (a - b).abs()))
        .fold(0.0, f64::max);
    Ok((dist, rec.terminal != Terminal::Unconverged))
}

/// Perturbs the manifold point of `(x_e, y_e)` by two sizes a factor ten
/// apart and reports whether the trajectory stays near it.
///
/// Near a stable point the whole excursion, including the drift along the
/// neutral directions, scales with the perturbation. From an unstable point
/// the orbit follows the unstable direction to wherever it lands, so the
/// excursion barely depends on the perturbation. `None` means the runs did
/// not settle within the horizon and the excursions still scaled.
pub fn stays_near(
    pay: &PayoffMatrix,
    x_e: f64,
    y_e: f64,
    sp: &LearningSpeeds,
    check: &DynamicCheck,
) -> Result<Option<bool>> {
    let base = manifold_point(pay, x_e, y_e)?.as_array();
    let (large, settled_large) = excursion(pay, base, check.perturbation, sp, &check.integrator)?;
    let (small, settled_small) = excursion(pay, base, 0.1 * check.perturbation, sp, &check.integrator)?;
    Ok(if small > check.ratio_threshold * large {
        Some(false)
    } else if settled_large && settled_small {
        Some(true)
    } else {
        None
    })
}

/// Compares a linear-stability verdict with the perturb-and-integrate
/// outcome.
pub fn dynamic_check(
    pay: &PayoffMatrix,
    report: &StabilityReport,
    sp: &LearningSpeeds,
    check: &DynamicCheck,
) -> Result<DynamicVerdict> {
    let (x_e, y_e) = report.eq_point;
    Ok(match stays_near(pay, x_e, y_e, sp, check)? {
        None => DynamicVerdict::Inconclusive,
        Some(near) if near == report.stable => DynamicVerdict::Agrees,
        Some(_) => DynamicVerdict::Disagrees,
    })
}

/// Which face of the strategy box a boundary curve corresponds to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BoundaryKind {
    /// `xC* = 1`
    XcOne,
    /// `xD* = 0`
    XdZero,
    /// `yC* = 1`
    YcOne,
    /// `yD* = 0`
    YdZero,
}

impl BoundaryKind {
    pub const ALL: [BoundaryKind; 4] = [
        BoundaryKind::XcOne,
        BoundaryKind::XdZero,
        BoundaryKind::YcOne,
        BoundaryKind::YdZero,
    ];

    pub fn label(&self) -> &'static str {
        match self {
            BoundaryKind::XcOne => "x_C=1",
            BoundaryKind::XdZero => "x_D=0",
            BoundaryKind::YcOne => "y_C=1",
            BoundaryKind::YdZero => "y_D=0",
        }
    }
}

/// Sampled locus in the `(x_e, y_e)` square where one manifold coordinate
/// touches the strategy box.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryCurve {
    pub kind: BoundaryKind,
    pub points: Vec<(f64, f64)>,
}

/// Quadratic whose zero set is the boundary locus, evaluated at
/// `(x_e, y_e)`.
pub fn boundary_residual(pay: &PayoffMatrix, kind: BoundaryKind, x_e: f64, y_e: f64) -> f64 {
    // The y-loci are the x-loci with the players exchanged.
    let (a, b) = match kind {
        BoundaryKind::XcOne | BoundaryKind::XdZero => (x_e, y_e),
        BoundaryKind::YcOne | BoundaryKind::YdZero => (y_e, x_e),
    };
    let (t, r, p, s) = (pay.t(), pay.r(), pay.p(), pay.s());
    let k = pay.submodularity();
    match kind {
        BoundaryKind::XcOne | BoundaryKind::YcOne => {
            -2.0 * k * a * b + (2.0 * t - r - 2.0 * p + s) * a + (t - r - 2.0 * p + 2.0 * s) * b
                - (t - 2.0 * p + s)
        }
        BoundaryKind::XdZero | BoundaryKind::YdZero => -2.0 * k * a * b + (t - p) * a - (p - s) * b,
    }
}

/// Solves the boundary quadratic for the partner coordinate: given the own
/// crossing coordinate `a` of the player whose face is touched, returns the
/// opponent's `b`.
fn boundary_partner(pay: &PayoffMatrix, kind: BoundaryKind, a: f64) -> Option<f64> {
    let (t, r, p, s) = (pay.t(), pay.r(), pay.p(), pay.s());
    let k = pay.submodularity();
    let (num, den) = match kind {
        BoundaryKind::XcOne | BoundaryKind::YcOne => (
            (t - 2.0 * p + s) - (2.0 * t - r - 2.0 * p + s) * a,
            (t - r - 2.0 * p + 2.0 * s) - 2.0 * k * a,
        ),
        BoundaryKind::XdZero | BoundaryKind::YdZero => ((t - p) * a, 2.0 * k * a + (p - s)),
    };
    if den.abs() < 1e-15 {
        return None;
    }
    let b = num / den;
    (0.0..=1.0).contains(&b).then_some(b)
}

/// Samples the four loci `xC* = 1`, `xD* = 0`, `yC* = 1`, `yD* = 0` that
/// bound the region of exploitative fixed points, at `n` abscissae each.
pub fn exploitation_boundaries(pay: &PayoffMatrix, n: usize) -> Result<Vec<BoundaryCurve>> {
    if !pay.submodular() {
        return Err(Error::NotSubmodular {
            value: pay.submodularity(),
        });
    }
    if n < 2 {
        return Err(Error::InvalidArgument(format!("need at least 2 samples per curve, got {n}")));
    }
    Ok(BoundaryKind::ALL
        .iter()
        .map(|&kind| {
            let points = (0..n)
                .filter_map(|i| {
                    let a = i as f64 / (n - 1) as f64;
                    let b = boundary_partner(pay, kind, a)?;
                    Some(match kind {
                        BoundaryKind::XcOne | BoundaryKind::XdZero => (a, b),
                        BoundaryKind::YcOne | BoundaryKind::YdZero => (b, a),
                    })
                })
                .collect();
            BoundaryCurve { kind, points }
        })
        .collect())
}

/// The state where one player's exploitation of the other is largest.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExploitativeState {
    pub x_e: f64,
    pub y_e: f64,
    pub u_e: f64,
    pub v_e: f64,
    pub strategy: JointStrategy,
}

fn exploitative_state(pay: &PayoffMatrix, x_e: f64, y_e: f64) -> Result<ExploitativeState> {
    if !pay.submodular() {
        return Err(Error::NotSubmodular {
            value: pay.submodularity(),
        });
    }
    let strategy = manifold_point(pay, x_e, y_e)?;
    let eq = equilibrium(pay, &strategy)?;
    Ok(ExploitativeState {
        x_e,
        y_e,
        u_e: eq.u_e,
        v_e: eq.v_e,
        strategy,
    })
}

/// Player 1 exploiting player 2 as far as a fixed point allows
/// (`y_e - x_e` maximal): the corner where `xD* = 0` meets `yC* = 1`.
pub fn most_exploitative(pay: &PayoffMatrix) -> Result<ExploitativeState> {
    let (t, r, p, s) = (pay.t(), pay.r(), pay.p(), pay.s());
    let x_e = (p - s) / ((r - s) + (p - s));
    let y_e = (t - p) / ((t - r) + (t - p));
    exploitative_state(pay, x_e, y_e)
}

/// Mirror image of [`most_exploitative`]: player 2 exploits player 1.
pub fn most_exploitative_reverse(pay: &PayoffMatrix) -> Result<ExploitativeState> {
    let forward = most_exploitative(pay)?;
    exploitative_state(pay, forward.y_e, forward.x_e)
}

/// Central-difference partials `d(coordinate)/d(x_e)` and
/// `d(coordinate)/d(y_e)` of the manifold parametrisation.
pub fn manifold_partials(pay: &PayoffMatrix, x_e: f64, y_e: f64, h: f64) -> [[f64; 2]; 4] {
    let dx = (manifold_coords(pay, x_e + h, y_e), manifold_coords(pay, x_e - h, y_e));
    let dy = (manifold_coords(pay, x_e, y_e + h), manifold_coords(pay, x_e, y_e - h));
    std::array::from_fn(|i| [(dx.0[i] - dx.1[i]) / (2.0 * h), (dy.0[i] - dy.1[i]) / (2.0 * h)])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::learning::{payoff_gap_1, payoff_gap_2, vector_field};
    use approx::assert_abs_diff_eq;

    fn standard() -> PayoffMatrix {
        PayoffMatrix::new(5.0, 3.0, 1.0, 0.0).unwrap()
    }

    #[test]
    fn pure_dd_examples() {
        let pay = standard();
        assert_abs_diff_eq!(pure_dd_threshold(&pay), 0.25);
        assert!(pure_dd_stable(&pay, 0.2, 0.2));
        assert!(!pure_dd_stable(&pay, 0.3, 0.2));
        for pay in [standard(), PayoffMatrix::new(5.0, 4.5, 1.0, 0.0).unwrap()] {
            assert!(pure_dd_stable(&pay, 0.0, 0.0));
        }
        let m = pure_dd_stability(&pay, 0.25, 0.1);
        assert!(m.stable && m.marginal);
    }

    #[test]
    fn pure_cc_examples() {
        let pay = standard();
        assert_abs_diff_eq!(pure_cc_threshold(&pay), 1.0 / 3.0, epsilon = 1e-15);
        assert!(pure_cc_stable(&pay, 0.1, 0.1));
        assert!(!pure_cc_stable(&pay, 0.4, 0.1));
        for r in [2.5, 3.0, 4.0, 4.9] {
            let pay = PayoffMatrix::new(5.0, r, 1.0, 0.0).unwrap();
            assert!(pure_cc_stable(&pay, 0.0, 0.0));
        }
    }

    #[test]
    fn manifold_point_examples() {
        let pay = standard();
        let s = manifold_point(&pay, 0.25, 2.0 / 3.0).unwrap();
        assert_abs_diff_eq!(s.x_c(), 0.375, epsilon = 1e-14);
        assert_abs_diff_eq!(s.x_d(), 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(s.y_c(), 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(s.y_d(), 5.0 / 9.0, epsilon = 1e-14);

        let s = manifold_point(&pay, 0.5, 0.5).unwrap();
        assert_abs_diff_eq!(s.x_c(), 0.5 + 3.0 / 14.0, epsilon = 1e-15);
        assert_abs_diff_eq!(s.x_d(), 0.5 - 3.0 / 14.0, epsilon = 1e-15);
        assert_eq!(s.x_c(), s.y_c());
        assert_eq!(s.x_d(), s.y_d());

        let a = manifold_point(&pay, 0.3, 0.6).unwrap();
        let b = manifold_point(&pay, 0.6, 0.3).unwrap();
        assert_eq!(a.as_array(), b.swapped().as_array());
    }

    #[test]
    fn manifold_point_errors() {
        let pay = standard();
        assert!(matches!(manifold_point(&pay, 0.0, 0.5), Err(Error::InvalidArgument(_))));
        assert!(matches!(manifold_point(&pay, 0.05, 0.95), Err(Error::OutOfStrategyBox { .. })));
    }

    #[test]
    fn gaps_vanish_on_manifold() {
        let pay = standard();
        for (x_e, y_e) in [(0.5, 0.5), (0.3, 0.6), (0.25, 2.0 / 3.0), (0.7, 0.45)] {
            let s = manifold_point(&pay, x_e, y_e).unwrap();
            assert_abs_diff_eq!(payoff_gap_1(&pay, &s).unwrap(), 0.0, epsilon = 1e-12);
            assert_abs_diff_eq!(payoff_gap_2(&pay, &s).unwrap(), 0.0, epsilon = 1e-12);
            let eq = equilibrium(&pay, &s).unwrap();
            assert_abs_diff_eq!(eq.x_e, x_e, epsilon = 1e-12);
            assert_abs_diff_eq!(eq.y_e, y_e, epsilon = 1e-12);
            let f = vector_field(&pay, &s, &LearningSpeeds::default()).unwrap();
            assert!(f.iter().all(|v| v.abs() < 1e-12));
        }
    }

    #[test]
    fn exact_and_finite_difference_jacobians_agree() {
        let pay = standard();
        let sp = LearningSpeeds::new(1.0, 2.0, 0.5, 1.5).unwrap();
        let s = JointStrategy::new(0.7, 0.2, 0.6, 0.35).unwrap();
        let exact = jacobian_exact(&pay, &s, &sp).unwrap();
        let fd = jacobian(&pay, &s, &sp, JACOBIAN_STEP).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                assert_abs_diff_eq!(exact[i][j], fd[i][j], epsilon = 1e-8);
            }
        }
    }

    #[test]
    fn jacobian_step_robustness() {
        let pay = standard();
        let sp = LearningSpeeds::default();
        let s = JointStrategy::new(0.55, 0.3, 0.8, 0.15).unwrap();
        let a = jacobian(&pay, &s, &sp, 1e-5).unwrap();
        let b = jacobian(&pay, &s, &sp, 1e-7).unwrap();
        let scale = a.iter().flatten().map(|v| v.abs()).fold(0.0, f64::max);
        for i in 0..4 {
            for j in 0..4 {
                assert!((a[i][j] - b[i][j]).abs() <= 1e-4 * scale);
            }
        }
        assert!(jacobian(&pay, &s, &sp, 0.0).is_err());
    }

    #[test]
    fn symmetric_jacobian_commutes_with_swap() {
        let pay = standard();
        let sp = LearningSpeeds::default();
        let s = JointStrategy::new(0.7, 0.25, 0.7, 0.25).unwrap();
        let j = jacobian(&pay, &s, &sp, JACOBIAN_STEP).unwrap();
        let perm = [2, 3, 0, 1];
        for r in 0..4 {
            for c in 0..4 {
                assert_abs_diff_eq!(j[perm[r]][perm[c]], j[r][c], epsilon = 1e-6);
            }
        }
    }

    #[test]
    fn manifold_has_two_neutral_directions() {
        let pay = standard();
        let sp = LearningSpeeds::default();
        for (x_e, y_e) in [(0.5, 0.5), (0.3, 0.6), (0.45, 0.35)] {
            let s = manifold_point(&pay, x_e, y_e).unwrap();
            let ev = eigenvalues_4x4(&jacobian(&pay, &s, &sp, JACOBIAN_STEP).unwrap());
            assert_eq!(ev.iter().filter(|e| e.norm() < 1e-6).count(), 2, "{ev:?}");
        }
    }

    #[test]
    fn classify_examples() {
        let pay = standard();
        let sp = LearningSpeeds::default();
        let rep = classify_interior(&pay, 0.25, 2.0 / 3.0, &sp).unwrap();
        assert!(rep.stable);
        assert_eq!(rep.n_zero, 2);
        // The symmetric manifold is only stable for larger x_e = y_e.
        let rep = classify_interior(&pay, 0.5, 0.5, &sp).unwrap();
        assert!(!rep.stable);
        assert_abs_diff_eq!(rep.classified[0].re, 0.05, epsilon = 1e-12);
        assert!(classify_interior(&pay, 0.7, 0.7, &sp).unwrap().stable);

        let weak = PayoffMatrix::new(5.0, 4.5, 1.0, 0.0).unwrap();
        let mut feasible = 0;
        for i in 0..20 {
            for j in 0..20 {
                let (x, y) = ((i as f64 + 0.5) / 20.0, (j as f64 + 0.5) / 20.0);
                if let Ok(rep) = classify_interior(&weak, x, y, &sp) {
                    feasible += 1;
                    assert!(!rep.stable, "({x}, {y})");
                }
            }
        }
        assert!(feasible > 0);
    }

    #[test]
    fn finite_difference_classification_matches_exact_away_from_faces() {
        let pay = standard();
        let sp = LearningSpeeds::default();
        let fd = StabilityOptions {
            jacobian: JacobianMethod::FiniteDifference { step: JACOBIAN_STEP },
            ..Default::default()
        };
        for (x_e, y_e) in [(0.5, 0.5), (0.4, 0.55), (0.6, 0.62)] {
            let a = classify_interior(&pay, x_e, y_e, &sp).unwrap();
            let b = classify_interior_with(&pay, x_e, y_e, &sp, &fd).unwrap();
            assert_eq!(a.stable, b.stable);
            for (u, v) in a.classified.iter().zip(&b.classified) {
                assert!((u - v).norm() < 1e-5 * (1.0 + u.norm()));
            }
        }
    }

    #[test]
    fn boundary_curves_examples() {
        let pay = standard();
        let curves = exploitation_boundaries(&pay, 201).unwrap();
        assert_eq!(curves.len(), 4);
        // The xD*=0 and yC*=1 loci both pass through (1/4, 2/3).
        for kind in [BoundaryKind::XdZero, BoundaryKind::YcOne] {
            assert_abs_diff_eq!(boundary_residual(&pay, kind, 0.25, 2.0 / 3.0), 0.0, epsilon = 1e-14);
        }
        for curve in &curves {
            assert!(!curve.points.is_empty());
            for &(x, y) in &curve.points {
                assert_abs_diff_eq!(boundary_residual(&pay, curve.kind, x, y), 0.0, epsilon = 1e-12);
            }
        }
        let xd = curves.iter().find(|c| c.kind == BoundaryKind::XdZero).unwrap();
        for &(x, y) in xd.points.iter().filter(|(x, y)| *x > 0.0 && *y > 0.0 && *y < 1.0) {
            assert_abs_diff_eq!(manifold_coords(&pay, x, y)[1], 0.0, epsilon = 1e-10);
        }
        let xc = curves.iter().find(|c| c.kind == BoundaryKind::XcOne).unwrap();
        for &(x, y) in xc.points.iter().filter(|(x, y)| *x > 0.0 && *x < 1.0 && *y > 0.0 && *y < 1.0) {
            assert_abs_diff_eq!(manifold_coords(&pay, x, y)[0], 1.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn x_c_locus_meets_diagonal_only_at_corner() {
        // On the diagonal the quadratic has roots 1 and (T - 2P + S) / 2K,
        // and the second one is >= 1 whenever 2R >= T + S.
        for r in [2.5, 3.0, 3.5, 3.9] {
            let pay = PayoffMatrix::new(5.0, r, 1.0, 0.0).unwrap();
            assert_abs_diff_eq!(boundary_residual(&pay, BoundaryKind::XcOne, 1.0, 1.0), 0.0, epsilon = 1e-12);
            let other = (pay.t() - 2.0 * pay.p() + pay.s()) / (2.0 * pay.submodularity());
            assert!(other >= 1.0 - 1e-12);
            for i in 1..1000 {
                let z = i as f64 / 1000.0;
                assert!(manifold_coords(&pay, z, z)[0] < 1.0);
            }
        }
    }

    #[test]
    fn boundaries_need_submodular() {
        let weak = PayoffMatrix::new(5.0, 4.5, 1.0, 0.0).unwrap();
        assert!(matches!(exploitation_boundaries(&weak, 10), Err(Error::NotSubmodular { .. })));
        assert!(matches!(most_exploitative(&weak), Err(Error::NotSubmodular { .. })));
        assert!(exploitation_boundaries(&standard(), 1).is_err());
    }

    #[test]
    fn most_exploitative_examples() {
        let m = most_exploitative(&standard()).unwrap();
        assert_abs_diff_eq!(m.x_e, 0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(m.y_e, 2.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(m.u_e, 13.0 / 4.0, epsilon = 1e-12);
        assert_abs_diff_eq!(m.v_e, 7.0 / 6.0, epsilon = 1e-12);

        let rev = most_exploitative_reverse(&standard()).unwrap();
        assert_abs_diff_eq!(rev.x_e, 2.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(rev.y_e, 0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(rev.u_e, m.v_e, epsilon = 1e-12);
        assert_abs_diff_eq!(rev.v_e, m.u_e, epsilon = 1e-12);

        let m = most_exploitative(&PayoffMatrix::new(5.0, 3.25, 1.0, 0.0).unwrap()).unwrap();
        assert_abs_diff_eq!(m.x_e, 1.0 / 4.25, epsilon = 1e-15);
        assert_abs_diff_eq!(m.y_e, 4.0 / 5.75, epsilon = 1e-15);
    }

    #[test]
    fn perturbation_confirms_linear_verdict() {
        let pay = standard();
        let sp = LearningSpeeds::default();
        for (x_e, y_e) in [(0.5, 0.5), (0.7, 0.7), (0.3, 0.6)] {
            let rep = classify_interior(&pay, x_e, y_e, &sp).unwrap();
            let verdict = dynamic_check(&pay, &rep, &sp, &DynamicCheck::default()).unwrap();
            assert_eq!(verdict, DynamicVerdict::Agrees, "({x_e}, {y_e}) stable={}", rep.stable);
        }
    }
}
