//! Reinforcement-learning dynamics of the conditional strategies.
//!
//! Each player nudges its two conditional cooperation probabilities in the
//! direction of the payoff difference between cooperating and defecting for
//! one round, evaluated with the opponent's strategy held fixed and the
//! repeated game relaxed back to its stationary state afterwards. The field
//! for `xC` is
//!
//! ```text
//! dxC/dt = S1C * xC (1 - xC) * y_e * (u_C - u_D)
//! ```
//!
//! and analogously for `xD` (weight `1 - y_e`), `yC` (weight `x_e`) and `yD`
//! (weight `1 - x_e`) with player 2's gap `v_C - v_D`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dual::Scalar;
use crate::error::{Error, Result};
use crate::game::{
    crossing_point, equilibrium, equilibrium_oracle, markov_matrix, mat_vec, EquilibriumPoint,
    JointStrategy, PayoffMatrix, DEGENERACY_TOL, ORACLE_MAX_ITER, ORACLE_TOL,
};

/// Per-coordinate rate multipliers `(S1C, S1D, S2C, S2D)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 4]", into = "[f64; 4]")]
pub struct LearningSpeeds {
    s_1c: f64,
    s_1d: f64,
    s_2c: f64,
    s_2d: f64,
}

impl Default for LearningSpeeds {
    fn default() -> Self {
        Self {
            s_1c: 1.0,
            s_1d: 1.0,
            s_2c: 1.0,
            s_2d: 1.0,
        }
    }
}

impl LearningSpeeds {
    pub fn new(s_1c: f64, s_1d: f64, s_2c: f64, s_2d: f64) -> Result<Self> {
        Self::try_from([s_1c, s_1d, s_2c, s_2d])
    }

    /// Player 1 learns at `s1`, player 2 at `s2`, for both coordinates.
    pub fn per_player(s1: f64, s2: f64) -> Result<Self> {
        Self::new(s1, s1, s2, s2)
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.s_1c, self.s_1d, self.s_2c, self.s_2d]
    }

    /// Every rate multiplied by `k`.
    pub fn scaled(&self, k: f64) -> Result<Self> {
        Self::try_from(self.as_array().map(|s| s * k))
    }

    pub fn swapped(&self) -> Self {
        Self {
            s_1c: self.s_2c,
            s_1d: self.s_2d,
            s_2c: self.s_1c,
            s_2d: self.s_1d,
        }
    }
}

impl TryFrom<[f64; 4]> for LearningSpeeds {
    type Error = Error;

    fn try_from(v: [f64; 4]) -> Result<Self> {
        if v.iter().any(|s| !s.is_finite() || *s < 0.0) {
            return Err(Error::InvalidArgument(format!(
                "learning speeds must be finite and non-negative, got {v:?}"
            )));
        }
        Ok(Self {
            s_1c: v[0],
            s_1d: v[1],
            s_2c: v[2],
            s_2d: v[3],
        })
    }
}

impl From<LearningSpeeds> for [f64; 4] {
    fn from(s: LearningSpeeds) -> Self {
        s.as_array()
    }
}

/// Crossing point and both payoff gaps.
struct Gaps<T> {
    x_e: T,
    y_e: T,
    du: T,
    dv: T,
}

#[inline]
fn gaps<T: Scalar>(pay: &PayoffMatrix, v: [T; 4]) -> Gaps<T> {
    let [x_c, x_d, y_c, y_d] = v;
    let (x_e, y_e, den) = crossing_point(v);
    let one = T::constant(1.0);
    let c = |x: f64| T::constant(x);
    let (t, r, p, s) = (pay.t(), pay.r(), pay.p(), pay.s());
    // Gain from the opponent's reciprocation versus the one-round cost.
    let reward_x = x_e * c(r - s) + (one - x_e) * c(t - p);
    let cost_y = y_e * c(t - r) + (one - y_e) * c(p - s);
    let du = ((y_c - y_d) * reward_x - cost_y) / den;
    let reward_y = y_e * c(r - s) + (one - y_e) * c(t - p);
    let cost_x = x_e * c(t - r) + (one - x_e) * c(p - s);
    let dv = ((x_c - x_d) * reward_y - cost_x) / den;
    Gaps {
        x_e,
        y_e,
        du,
        dv,
    }
}

pub(crate) fn check_degenerate(s: &JointStrategy) -> Result<()> {
    let den = s.denominator();
    if den.abs() < DEGENERACY_TOL {
        Err(Error::DegenerateStrategyPair { denominator: den })
    } else {
        Ok(())
    }
}

/// Player 1's payoff gap `u_C - u_D` between cooperating and defecting.
pub fn payoff_gap_1(pay: &PayoffMatrix, s: &JointStrategy) -> Result<f64> {
    check_degenerate(s)?;
    Ok(gaps(pay, s.as_array()).du)
}

/// Player 2's payoff gap `v_C - v_D`.
pub fn payoff_gap_2(pay: &PayoffMatrix, s: &JointStrategy) -> Result<f64> {
    check_degenerate(s)?;
    Ok(gaps(pay, s.as_array()).dv)
}

/// `u_C - u_D` as a truncated series over the transition matrix.
///
/// Sums `M^t (p_1C - p_1D) . (R, S, T, P)` for `t = 0 .. 2*horizon - 1`,
/// where `p_1C = (y_e, 1-y_e, 0, 0)` and `p_1D = (0, 0, y_e, 1-y_e)`, with
/// `y_e` taken from the power-iteration stationary state. Two steps of the
/// chain shrink the deviation by `(xC-xD)(yC-yD)`, so the truncation error
/// after `horizon` pairs is of order `|(xC-xD)(yC-yD)|^horizon`.
pub fn payoff_gap_oracle(pay: &PayoffMatrix, s: &JointStrategy, horizon: usize) -> Result<f64> {
    if horizon == 0 {
        return Err(Error::InvalidArgument("oracle horizon must be at least 1".into()));
    }
    let p_e = equilibrium_oracle(s, ORACLE_TOL, ORACLE_MAX_ITER)?;
    let y_e = p_e[0] + p_e[2];
    let m = markov_matrix(s);
    let payoff = pay.player1();
    let mut w = [y_e, 1.0 - y_e, -y_e, -(1.0 - y_e)];
    let mut total = 0.0;
    for _ in 0..2 * horizon {
        total += w.iter().zip(&payoff).map(|(a, b)| a * b).sum::<f64>();
        w = mat_vec(&m, &w);
    }
    Ok(total)
}

#[inline]
pub(crate) fn field_generic<T: Scalar>(
    pay: &PayoffMatrix,
    v: [T; 4],
    sp: &LearningSpeeds,
) -> [T; 4] {
    let g = gaps(pay, v);
    let [x_c, x_d, y_c, y_d] = v;
    let [s1c, s1d, s2c, s2d] = sp.as_array().map(T::constant);
    let one = T::constant(1.0);
    [
        s1c * x_c * (one - x_c) * g.y_e * g.du,
        s1d * x_d * (one - x_d) * (one - g.y_e) * g.du,
        s2c * y_c * (one - y_c) * g.x_e * g.dv,
        s2d * y_d * (one - y_d) * (one - g.x_e) * g.dv,
    ]
}

/// Time derivative `(dxC, dxD, dyC, dyD)` of the learning dynamics.
pub fn vector_field(
    pay: &PayoffMatrix,
    s: &JointStrategy,
    sp: &LearningSpeeds,
) -> Result<[f64; 4]> {
    check_degenerate(s)?;
    Ok(field_generic(pay, s.as_array(), sp))
}

/// Step size, horizon and recording cadence of [`integrate`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegratorConfig {
    /// Fixed RK4 step.
    pub dt: f64,
    /// Give up (terminal `Unconverged`) once simulated time reaches this.
    pub t_max: f64,
    /// Stop once the sup-norm of the field drops below this.
    pub converge_tol: f64,
    /// Time between recorded samples; rounded to a whole number of steps.
    pub sample_interval: f64,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            dt: 0.01,
            t_max: 1e5,
            converge_tol: 1e-10,
            sample_interval: 0.1,
        }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = self.dt > 0.0
            && self.dt.is_finite()
            && self.t_max > 0.0
            && self.converge_tol > 0.0
            && self.sample_interval > 0.0
            && self.sample_interval.is_finite();
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!(
                "integrator settings must be positive: {self:?}"
            )))
        }
    }

    fn steps_per_sample(&self) -> u64 {
        ((self.sample_interval / self.dt).round() as u64).max(1)
    }
}

/// Where a trajectory ended up.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Terminal {
    PureDD,
    PureCC,
    Interior,
    Unconverged,
}

/// Qualitative shape of a trajectory.
///
/// * `Case1`: straight to mutual cooperation.
/// * `Case2`: settles in an exploitative state without the exploiter ever
///   changing.
/// * `Case3`: mutual cooperation recovered after a transient exploitation.
/// * `Case4`: exploitative state whose exploiter changed at least once.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CaseLabel {
    Case1,
    Case2,
    Case3,
    Case4,
    Other,
}

macro_rules! name_enum {
    ($ty:ident { $($variant:ident),* $(,)? }) => {
        impl $ty {
            pub fn as_str(&self) -> &'static str {
                match self { $($ty::$variant => stringify!($variant)),* }
            }
        }

        impl fmt::Display for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }

        impl FromStr for $ty {
            type Err = Error;

            fn from_str(s: &str) -> Result<Self> {
                match s {
                    $(stringify!($variant) => Ok($ty::$variant),)*
                    other => Err(Error::Parse(format!(
                        concat!("unknown ", stringify!($ty), " `{}`"), other
                    ))),
                }
            }
        }
    };
}

name_enum!(Terminal { PureDD, PureCC, Interior, Unconverged });
name_enum!(CaseLabel { Case1, Case2, Case3, Case4, Other });

/// Cut-offs used to name terminal states and trajectory cases.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassifyThresholds {
    /// Both `x_e` and `y_e` below this: pure defection.
    pub pure_dd: f64,
    /// Both above this: pure cooperation.
    pub pure_cc: f64,
    /// `|x_e - y_e|` below this counts as symmetric.
    pub symmetry_band: f64,
}

impl Default for ClassifyThresholds {
    fn default() -> Self {
        Self {
            pure_dd: 0.01,
            pure_cc: 0.99,
            symmetry_band: 0.02,
        }
    }
}

/// `(x_e, y_e, u_e, v_e)` at one recorded time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EqSample {
    pub x_e: f64,
    pub y_e: f64,
    pub u_e: f64,
    pub v_e: f64,
}

impl From<EquilibriumPoint> for EqSample {
    fn from(e: EquilibriumPoint) -> Self {
        Self {
            x_e: e.x_e,
            y_e: e.y_e,
            u_e: e.u_e,
            v_e: e.v_e,
        }
    }
}

/// Sampled learning trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    pub times: Vec<f64>,
    pub states: Vec<JointStrategy>,
    pub eq_track: Vec<EqSample>,
    pub terminal: Terminal,
    pub case_label: CaseLabel,
}

impl TrajectoryRecord {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn final_state(&self) -> Option<&JointStrategy> {
        self.states.last()
    }

    pub fn final_eq(&self) -> Option<&EqSample> {
        self.eq_track.last()
    }

    fn push(&mut self, t: f64, s: JointStrategy, e: EqSample) {
        self.times.push(t);
        self.states.push(s);
        self.eq_track.push(e);
    }
}

/// Names the terminal state from the final crossing point.
pub fn classify_terminal(x_e: f64, y_e: f64, th: &ClassifyThresholds) -> Terminal {
    if x_e < th.pure_dd && y_e < th.pure_dd {
        Terminal::PureDD
    } else if x_e > th.pure_cc && y_e > th.pure_cc {
        Terminal::PureCC
    } else {
        Terminal::Interior
    }
}

/// Assigns one of the four transient cases.
///
/// The dominance indicator is the sign of `x_e - y_e` at samples where
/// `|x_e - y_e|` leaves the symmetry band; a reversal is a change of that
/// sign between consecutive such samples.
pub fn classify_trajectory(rec: &TrajectoryRecord, th: &ClassifyThresholds) -> Result<CaseLabel> {
    if rec.terminal == Terminal::Unconverged {
        return Err(Error::UnconvergedTrajectory);
    }
    let Some(last) = rec.eq_track.last() else {
        return Err(Error::InvalidArgument("cannot classify an empty trajectory".into()));
    };
    let band = th.symmetry_band;
    let mut max_gap: f64 = 0.0;
    let mut dominant: Option<bool> = None;
    let mut reversals = 0usize;
    for e in &rec.eq_track {
        let d = e.x_e - e.y_e;
        max_gap = max_gap.max(d.abs());
        if d.abs() >= band {
            let sign = d > 0.0;
            if dominant.is_some_and(|prev| prev != sign) {
                reversals += 1;
            }
            dominant = Some(sign);
        }
    }
    let final_gap = (last.x_e - last.y_e).abs();
    Ok(match rec.terminal {
        Terminal::PureCC if max_gap < band => CaseLabel::Case1,
        Terminal::PureCC => CaseLabel::Case3,
        Terminal::Interior if final_gap < band => CaseLabel::Other,
        Terminal::Interior if reversals == 0 => CaseLabel::Case2,
        Terminal::Interior => CaseLabel::Case4,
        _ => CaseLabel::Other,
    })
}

fn rk4_step(pay: &PayoffMatrix, sp: &LearningSpeeds, v: [f64; 4], k1: [f64; 4], dt: f64) -> [f64; 4] {
    let shift = |k: &[f64; 4], h: f64| -> [f64; 4] { std::array::from_fn(|i| v[i] + h * k[i]) };
    let k2 = field_generic(pay, shift(&k1, 0.5 * dt), sp);
    let k3 = field_generic(pay, shift(&k2, 0.5 * dt), sp);
    let k4 = field_generic(pay, shift(&k3, dt), sp);
    std::array::from_fn(|i| {
        let next = v[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        next.clamp(0.0, 1.0)
    })
}

/// Integrates the learning dynamics from `init` with fixed-step RK4.
///
/// Samples are recorded at `t = 0`, every `sample_interval`, and at the
/// final time. The run stops when the field's sup-norm drops below
/// `converge_tol` or when `t_max` is reached, in which case the terminal is
/// `Unconverged` and the case label `Other`.
pub fn integrate(
    pay: &PayoffMatrix,
    init: &JointStrategy,
    sp: &LearningSpeeds,
    cfg: &IntegratorConfig,
) -> Result<TrajectoryRecord> {
    integrate_with(pay, init, sp, cfg, &ClassifyThresholds::default())
}

/// [`integrate`] with explicit classification thresholds.
pub fn integrate_with(
    pay: &PayoffMatrix,
    init: &JointStrategy,
    sp: &LearningSpeeds,
    cfg: &IntegratorConfig,
    th: &ClassifyThresholds,
) -> Result<TrajectoryRecord> {
    cfg.validate()?;
    check_degenerate(init)?;
    let per_sample = cfg.steps_per_sample();
    let mut rec = TrajectoryRecord {
        times: Vec::new(),
        states: Vec::new(),
        eq_track: Vec::new(),
        terminal: Terminal::Unconverged,
        case_label: CaseLabel::Other,
    };
    let sample = |v: [f64; 4], t: f64| -> Result<(JointStrategy, EqSample)> {
        let s = JointStrategy::from_array_unchecked(v);
        let e = equilibrium(pay, &s).map_err(|_| Error::DegenerateEncountered { time: t })?;
        Ok((s, e.into()))
    };

    let mut v = init.as_array();
    let mut step: u64 = 0;
    let mut t = 0.0;
    let (s0, e0) = sample(v, t)?;
    rec.push(t, s0, e0);
    let converged = loop {
        let k1 = field_generic(pay, v, sp);
        if k1.iter().all(|k| k.abs() < cfg.converge_tol) {
            break true;
        }
        if t >= cfg.t_max {
            break false;
        }
        v = rk4_step(pay, sp, v, k1, cfg.dt);
        step += 1;
        t = step as f64 * cfg.dt;
        let den = 1.0 - (v[0] - v[1]) * (v[2] - v[3]);
        if den.abs() < DEGENERACY_TOL {
            return Err(Error::DegenerateEncountered { time: t });
        }
        if step.is_multiple_of(per_sample) {
            let (s, e) = sample(v, t)?;
            rec.push(t, s, e);
        }
    };
    if rec.times.last() != Some(&t) {
        let (s, e) = sample(v, t)?;
        rec.push(t, s, e);
    }

    if converged {
        let last = rec.eq_track.last().expect("at least the initial sample");
        rec.terminal = classify_terminal(last.x_e, last.y_e, th);
        rec.case_label = classify_trajectory(&rec, th)?;
    }
    Ok(rec)
}
