//! Payoff matrices, memory-one strategy pairs and the repeated game they
//! induce.
//!
//! Every 4-vector over outcomes uses the order `(CC, CD, DC, DD)`, where the
//! first letter is player 1's action and the second is player 2's.

use serde::{Deserialize, Serialize};

use crate::dual::Scalar;
use crate::error::{Error, Result};

/// `|1 - (xC-xD)(yC-yD)|` below this makes the stationary state non-unique.
pub const DEGENERACY_TOL: f64 = 1e-12;

/// Default stopping tolerance of [`equilibrium_oracle`].
pub const ORACLE_TOL: f64 = 1e-13;

/// Default iteration cap of [`equilibrium_oracle`].
pub const ORACLE_MAX_ITER: usize = 1_000_000;

/// Prisoner's dilemma payoffs `(T, R, P, S)` as seen by the row player.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawPayoff")]
pub struct PayoffMatrix {
    t: f64,
    r: f64,
    p: f64,
    s: f64,
    submodular: bool,
}

#[derive(Deserialize)]
struct RawPayoff {
    t: f64,
    r: f64,
    p: f64,
    s: f64,
}

impl TryFrom<RawPayoff> for PayoffMatrix {
    type Error = Error;

    fn try_from(raw: RawPayoff) -> Result<Self> {
        PayoffMatrix::new(raw.t, raw.r, raw.p, raw.s)
    }
}

impl PayoffMatrix {
    /// Validates a prisoner's dilemma matrix.
    ///
    /// Requires `T > R > P > S` and `2R >= T + S`. The equality `2R = T + S`
    /// is the limit where alternating exploitation pays as much as mutual
    /// cooperation; it is kept because it is the left edge of the `R` range
    /// studied for the stability and basin maps.
    pub fn new(t: f64, r: f64, p: f64, s: f64) -> Result<Self> {
        check_finite(t, r, p, s)?;
        if !(t > r && r > p && p > s) {
            return Err(Error::OrderingViolation { t, r, p, s });
        }
        check_repeated_game(t, r, s)?;
        Ok(Self::build(t, r, p, s))
    }

    /// Like [`PayoffMatrix::new`] but also admits the limiting case `T = R`
    /// (temptation equal to reward), which is not a prisoner's dilemma but
    /// closes the `R` interval of the fixed-point stability maps.
    pub fn limiting(t: f64, r: f64, p: f64, s: f64) -> Result<Self> {
        check_finite(t, r, p, s)?;
        if !(t >= r && r > p && p > s) {
            return Err(Error::OrderingViolation { t, r, p, s });
        }
        check_repeated_game(t, r, s)?;
        Ok(Self::build(t, r, p, s))
    }

    fn build(t: f64, r: f64, p: f64, s: f64) -> Self {
        Self {
            t,
            r,
            p,
            s,
            submodular: t - r - p + s > 0.0,
        }
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    /// `T - R - P + S`.
    pub fn submodularity(&self) -> f64 {
        self.t - self.r - self.p + self.s
    }

    /// True iff `T - R - P + S > 0`.
    pub fn submodular(&self) -> bool {
        self.submodular
    }

    /// Player 1's payoff per outcome, `(R, S, T, P)`.
    pub fn player1(&self) -> [f64; 4] {
        [self.r, self.s, self.t, self.p]
    }

    /// Player 2's payoff per outcome, `(R, T, S, P)`.
    pub fn player2(&self) -> [f64; 4] {
        [self.r, self.t, self.s, self.p]
    }
}

fn check_finite(t: f64, r: f64, p: f64, s: f64) -> Result<()> {
    if [t, r, p, s].iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "payoffs must be finite, got T={t}, R={r}, P={p}, S={s}"
        )))
    }
}

fn check_repeated_game(t: f64, r: f64, s: f64) -> Result<()> {
    if 2.0 * r < t + s {
        Err(Error::RepeatedGameViolation {
            two_r: 2.0 * r,
            t_plus_s: t + s,
        })
    } else {
        Ok(())
    }
}

/// Validates `(T, R, P, S)`; see [`PayoffMatrix::new`].
pub fn validate_payoff(t: f64, r: f64, p: f64, s: f64) -> Result<PayoffMatrix> {
    PayoffMatrix::new(t, r, p, s)
}

/// Conditional cooperation probabilities of both players.
///
/// `x_c` (`x_d`) is player 1's probability of cooperating after player 2
/// cooperated (defected); `y_c`, `y_d` likewise for player 2.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 4]", into = "[f64; 4]")]
pub struct JointStrategy {
    x_c: f64,
    x_d: f64,
    y_c: f64,
    y_d: f64,
}

pub const STRATEGY_NAMES: [&str; 4] = ["x_C", "x_D", "y_C", "y_D"];

impl JointStrategy {
    pub fn new(x_c: f64, x_d: f64, y_c: f64, y_d: f64) -> Result<Self> {
        Self::from_array([x_c, x_d, y_c, y_d])
    }

    pub fn from_array(v: [f64; 4]) -> Result<Self> {
        for (value, name) in v.iter().zip(STRATEGY_NAMES) {
            if !(0.0..=1.0).contains(value) {
                return Err(Error::InvalidProbability {
                    name,
                    value: *value,
                });
            }
        }
        Ok(Self::from_array_unchecked(v))
    }

    /// Callers guarantee every component lies in `[0, 1]`.
    pub(crate) fn from_array_unchecked(v: [f64; 4]) -> Self {
        Self {
            x_c: v[0],
            x_d: v[1],
            y_c: v[2],
            y_d: v[3],
        }
    }

    /// Clamps each component into `[0, 1]`. NaN maps to 0.
    pub fn clamped(v: [f64; 4]) -> Self {
        Self::from_array_unchecked(v.map(|c| if c.is_nan() { 0.0 } else { c.clamp(0.0, 1.0) }))
    }

    pub fn x_c(&self) -> f64 {
        self.x_c
    }

    pub fn x_d(&self) -> f64 {
        self.x_d
    }

    pub fn y_c(&self) -> f64 {
        self.y_c
    }

    pub fn y_d(&self) -> f64 {
        self.y_d
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.x_c, self.x_d, self.y_c, self.y_d]
    }

    /// The same pair with the players' roles exchanged.
    pub fn swapped(&self) -> Self {
        Self::from_array_unchecked([self.y_c, self.y_d, self.x_c, self.x_d])
    }

    /// All components strictly inside `(0, 1)`.
    pub fn is_interior(&self) -> bool {
        self.as_array().iter().all(|&c| c > 0.0 && c < 1.0)
    }

    /// `1 - (xC - xD)(yC - yD)`.
    pub fn denominator(&self) -> f64 {
        1.0 - (self.x_c - self.x_d) * (self.y_c - self.y_d)
    }

    pub fn is_degenerate(&self) -> bool {
        self.denominator().abs() < DEGENERACY_TOL
    }
}

impl TryFrom<[f64; 4]> for JointStrategy {
    type Error = Error;

    fn try_from(v: [f64; 4]) -> Result<Self> {
        Self::from_array(v)
    }
}

impl From<JointStrategy> for [f64; 4] {
    fn from(s: JointStrategy) -> Self {
        s.as_array()
    }
}

/// Transition matrix of the repeated game over outcomes `(CC, CD, DC, DD)`.
///
/// `m[i][j]` is the probability of outcome `i` following outcome `j`; every
/// column sums to one.
pub fn markov_matrix(s: &JointStrategy) -> [[f64; 4]; 4] {
    let [x_c, x_d, y_c, y_d] = s.as_array();
    // Player 1 reacts to player 2's previous action and vice versa.
    let x_given = [x_c, x_d, x_c, x_d];
    let y_given = [y_c, y_c, y_d, y_d];
    let mut m = [[0.0; 4]; 4];
    for j in 0..4 {
        let (x, y) = (x_given[j], y_given[j]);
        m[0][j] = x * y;
        m[1][j] = x * (1.0 - y);
        m[2][j] = (1.0 - x) * y;
        m[3][j] = (1.0 - x) * (1.0 - y);
    }
    m
}

/// Stationary state of the repeated game between two fixed strategies.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumPoint {
    /// Player 1's unconditional cooperation probability.
    pub x_e: f64,
    /// Player 2's unconditional cooperation probability.
    pub y_e: f64,
    /// Outcome distribution over `(CC, CD, DC, DD)`.
    pub p_e: [f64; 4],
    pub u_e: f64,
    pub v_e: f64,
}

impl EquilibriumPoint {
    /// Builds the product-form distribution and both payoffs from the
    /// unconditional cooperation probabilities.
    pub fn from_coords(pay: &PayoffMatrix, x_e: f64, y_e: f64) -> Self {
        let p_e = [
            x_e * y_e,
            x_e * (1.0 - y_e),
            (1.0 - x_e) * y_e,
            (1.0 - x_e) * (1.0 - y_e),
        ];
        // Both sums run R, S, T, P so that exchanging the players exchanges
        // u_e and v_e bit for bit.
        let u_e = pay.r() * p_e[0] + pay.s() * p_e[1] + pay.t() * p_e[2] + pay.p() * p_e[3];
        let v_e = pay.r() * p_e[0] + pay.s() * p_e[2] + pay.t() * p_e[1] + pay.p() * p_e[3];
        Self {
            x_e,
            y_e,
            p_e,
            u_e,
            v_e,
        }
    }
}

/// Crossing point `(x_e, y_e)` of the two response functions together with
/// the denominator `1 - (xC-xD)(yC-yD)`, for any scalar type.
#[inline]
pub(crate) fn crossing_point<T: Scalar>(v: [T; 4]) -> (T, T, T) {
    let [x_c, x_d, y_c, y_d] = v;
    let gx = x_c - x_d;
    let gy = y_c - y_d;
    let den = T::constant(1.0) - gx * gy;
    let x_e = (x_d + gx * y_d) / den;
    let y_e = (y_d + gy * x_d) / den;
    (x_e, y_e, den)
}

/// Closed-form stationary state.
pub fn equilibrium(pay: &PayoffMatrix, s: &JointStrategy) -> Result<EquilibriumPoint> {
    let (x_e, y_e, den) = crossing_point(s.as_array());
    if den.abs() < DEGENERACY_TOL {
        return Err(Error::DegenerateStrategyPair { denominator: den });
    }
    Ok(EquilibriumPoint::from_coords(pay, x_e, y_e))
}

/// Stationary distribution by power iteration on the transition matrix,
/// starting from the uniform distribution.
///
/// Only defined for strictly interior strategies, where the chain is fully
/// connected. Stops once `max_i |(M p - p)_i| < tol`.
pub fn equilibrium_oracle(s: &JointStrategy, tol: f64, max_iter: usize) -> Result<[f64; 4]> {
    if !s.is_interior() {
        return Err(Error::InvalidArgument(
            "power-iteration oracle needs every strategy component in (0, 1)".into(),
        ));
    }
    let m = markov_matrix(s);
    let mut p = [0.25; 4];
    let mut residual = f64::INFINITY;
    for _ in 0..max_iter {
        let next = mat_vec(&m, &p);
        residual = next
            .iter()
            .zip(&p)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        // Renormalise against slow drift of the total mass.
        let total: f64 = next.iter().sum();
        p = next.map(|v| v / total);
        if residual < tol {
            return Ok(p);
        }
    }
    Err(Error::NoConvergence {
        iterations: max_iter,
        residual,
    })
}

pub(crate) fn mat_vec(m: &[[f64; 4]; 4], v: &[f64; 4]) -> [f64; 4] {
    let mut out = [0.0; 4];
    for (i, row) in m.iter().enumerate() {
        out[i] = row.iter().zip(v).map(|(a, b)| a * b).sum();
    }
    out
}

/// Response function: the unconditional cooperation probability of a
/// player with conditional strategy `(c, d)` facing an opponent who
/// cooperates with probability `y`.
pub fn response(c: f64, d: f64, y: f64) -> f64 {
    y * (c - d) + d
}
