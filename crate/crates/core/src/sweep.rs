//! Grid sweeps over initial conditions and the fixed-point manifold.
//!
//! Every sweep evaluates independent cells on a rayon pool and gathers them
//! in grid order, so the thread count never changes the output.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fixed_points::{
    classify_interior_with, dynamic_check, DynamicCheck, DynamicVerdict, StabilityOptions,
    StabilityReport,
};
use crate::game::{JointStrategy, PayoffMatrix};
use crate::learning::{integrate_with, CaseLabel, ClassifyThresholds, IntegratorConfig, LearningSpeeds, Terminal};

/// One of the four strategy coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum StrategyComponent {
    #[serde(rename = "x_C")]
    XC,
    #[serde(rename = "x_D")]
    XD,
    #[serde(rename = "y_C")]
    YC,
    #[serde(rename = "y_D")]
    YD,
}

impl StrategyComponent {
    pub const ALL: [StrategyComponent; 4] = [Self::XC, Self::XD, Self::YC, Self::YD];

    pub fn index(self) -> usize {
        match self {
            Self::XC => 0,
            Self::XD => 1,
            Self::YC => 2,
            Self::YD => 3,
        }
    }

    pub fn as_str(self) -> &'static str {
        crate::game::STRATEGY_NAMES[self.index()]
    }
}

impl fmt::Display for StrategyComponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for StrategyComponent {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.replace('_', "").to_ascii_lowercase();
        Self::ALL
            .into_iter()
            .find(|c| c.as_str().replace('_', "").to_ascii_lowercase() == norm)
            .ok_or_else(|| Error::Parse(format!("unknown strategy component `{s}` (use x_C, x_D, y_C or y_D)")))
    }
}

/// Evenly spaced values of one coordinate, endpoints included.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridAxis {
    pub name: StrategyComponent,
    pub min: f64,
    pub max: f64,
    pub n: usize,
}

impl GridAxis {
    pub fn new(name: StrategyComponent, min: f64, max: f64, n: usize) -> Result<Self> {
        let axis = Self { name, min, max, n };
        axis.validate()?;
        Ok(axis)
    }

    fn validate(&self) -> Result<()> {
        let in_box = |v: f64| (0.0..=1.0).contains(&v);
        if self.n == 0 || !in_box(self.min) || !in_box(self.max) || self.min > self.max {
            return Err(Error::InvalidArgument(format!(
                "axis {} needs 0 <= min <= max <= 1 and n >= 1, got [{}, {}] n={}",
                self.name, self.min, self.max, self.n
            )));
        }
        Ok(())
    }

    pub fn value(&self, i: usize) -> f64 {
        if self.n == 1 {
            self.min
        } else if i + 1 == self.n {
            self.max
        } else {
            self.min + (self.max - self.min) * i as f64 / (self.n - 1) as f64
        }
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.value(i)).collect()
    }
}

/// The `n^4` midpoint grid `((2i-1)/2n, ...)`, `i = 1..n`, in lexicographic
/// order.
pub fn uniform_grid_4d(n: usize) -> Result<Vec<JointStrategy>> {
    if n == 0 {
        return Err(Error::InvalidArgument("4-d grid needs n >= 1".into()));
    }
    let mid = |i: usize| (2 * i + 1) as f64 / (2 * n) as f64;
    let mut out = Vec::with_capacity(n.pow(4));
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                for d in 0..n {
                    out.push(JointStrategy::new(mid(a), mid(b), mid(c), mid(d))?);
                }
            }
        }
    }
    Ok(out)
}

/// Integrator, classifier and pool settings shared by trajectory sweeps.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SweepOptions {
    pub integrator: IntegratorConfig,
    pub thresholds: ClassifyThresholds,
    /// Worker count; `None` uses every core.
    #[serde(skip)]
    pub threads: Option<usize>,
}

/// Final state of one trajectory of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepCell {
    pub init: JointStrategy,
    pub terminal: Terminal,
    pub x_e_star: f64,
    pub y_e_star: f64,
    pub u_e_star: f64,
    pub v_e_star: f64,
    /// `y_e* - x_e*`: how far player 1 exploits player 2.
    pub exploitation: f64,
    /// `(x_e* + y_e*) / 2`.
    pub cooperation: f64,
    pub case_label: CaseLabel,
    /// Integration failure, in which case the numbers are NaN and the
    /// terminal is `Unconverged`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl SweepCell {
    pub fn from_final(init: JointStrategy, terminal: Terminal, eq: [f64; 4], case_label: CaseLabel) -> Self {
        let [x_e, y_e, u_e, v_e] = eq;
        Self {
            init,
            terminal,
            x_e_star: x_e,
            y_e_star: y_e,
            u_e_star: u_e,
            v_e_star: v_e,
            exploitation: y_e - x_e,
            cooperation: (x_e + y_e) / 2.0,
            case_label,
            error: None,
        }
    }

    fn failed(init: JointStrategy, err: &Error) -> Self {
        Self {
            error: Some(err.to_string()),
            ..Self::from_final(init, Terminal::Unconverged, [f64::NAN; 4], CaseLabel::Other)
        }
    }
}

/// Integrates one initial condition to its terminal state.
pub fn run_cell(pay: &PayoffMatrix, sp: &LearningSpeeds, init: &JointStrategy, opts: &SweepOptions) -> SweepCell {
    match integrate_with(pay, init, sp, &opts.integrator, &opts.thresholds) {
        Ok(rec) => {
            let e = rec.final_eq().expect("records always hold the initial sample");
            SweepCell::from_final(*init, rec.terminal, [e.x_e, e.y_e, e.u_e, e.v_e], rec.case_label)
        }
        Err(err) => SweepCell::failed(*init, &err),
    }
}

/// Maps `f` over `items` on a pool of `threads` workers, keeping order.
pub fn par_map<T, R, F>(threads: Option<usize>, items: &[T], f: F) -> Result<Vec<R>>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    if threads == Some(0) {
        return Err(Error::InvalidArgument("thread count must be at least 1".into()));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.unwrap_or(0))
        .build()
        .map_err(|e| Error::InvalidArgument(format!("cannot start worker pool: {e}")))?;
    Ok(pool.install(|| items.par_iter().map(&f).collect()))
}

/// Terminal states over a 2-d slice of initial conditions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub axes: [GridAxis; 2],
    pub fixed_coords: Vec<(StrategyComponent, f64)>,
    pub payoff: PayoffMatrix,
    pub speeds: LearningSpeeds,
    pub integrator: IntegratorConfig,
    /// Row-major: `axis1` outer, `axis2` inner.
    pub cells: Vec<SweepCell>,
}

impl SweepResult {
    /// Swept coordinate values of cell `k`.
    pub fn axis_values(&self, k: usize) -> (f64, f64) {
        let v = self.cells[k].init.as_array();
        (v[self.axes[0].name.index()], v[self.axes[1].name.index()])
    }
}

/// Integrates every cell of `axis1 x axis2` with the other two coordinates
/// held at `fixed`.
pub fn basin_map(
    pay: &PayoffMatrix,
    sp: &LearningSpeeds,
    axis1: GridAxis,
    axis2: GridAxis,
    fixed: &[(StrategyComponent, f64)],
    opts: &SweepOptions,
) -> Result<SweepResult> {
    axis1.validate()?;
    axis2.validate()?;
    opts.integrator.validate()?;
    if axis1.name == axis2.name {
        return Err(Error::InvalidArgument(format!("both axes sweep {}", axis1.name)));
    }
    let mut base = [f64::NAN; 4];
    for &(c, v) in fixed {
        if c == axis1.name || c == axis2.name || !base[c.index()].is_nan() {
            return Err(Error::InvalidArgument(format!("{c} is fixed twice or also swept")));
        }
        base[c.index()] = v;
    }
    for c in StrategyComponent::ALL {
        if c != axis1.name && c != axis2.name && base[c.index()].is_nan() {
            return Err(Error::InvalidArgument(format!("no value given for fixed coordinate {c}")));
        }
    }

    let mut inits = Vec::with_capacity(axis1.n * axis2.n);
    for a in axis1.values() {
        for b in axis2.values() {
            let mut v = base;
            v[axis1.name.index()] = a;
            v[axis2.name.index()] = b;
            inits.push(JointStrategy::from_array(v)?);
        }
    }
    let cells = par_map(opts.threads, &inits, |s| run_cell(pay, sp, s, opts))?;
    let mut fixed_coords = fixed.to_vec();
    fixed_coords.sort_by_key(|(c, _)| c.index());
    Ok(SweepResult {
        axes: [axis1, axis2],
        fixed_coords,
        payoff: *pay,
        speeds: *sp,
        integrator: opts.integrator,
        cells,
    })
}

/// Terminal states from the full 4-d midpoint grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid4dResult {
    pub n: usize,
    pub payoff: PayoffMatrix,
    pub speeds: LearningSpeeds,
    pub integrator: IntegratorConfig,
    pub cells: Vec<SweepCell>,
}

pub fn grid4d(pay: &PayoffMatrix, sp: &LearningSpeeds, n: usize, opts: &SweepOptions) -> Result<Grid4dResult> {
    opts.integrator.validate()?;
    let inits = uniform_grid_4d(n)?;
    let cells = par_map(opts.threads, &inits, |s| run_cell(pay, sp, s, opts))?;
    Ok(Grid4dResult {
        n,
        payoff: *pay,
        speeds: *sp,
        integrator: opts.integrator,
        cells,
    })
}

/// Verdict for one `(x_e, y_e)` cell of a stability map.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum StabilityTag {
    Stable,
    Unstable,
    /// The manifold point lies outside the strategy box.
    Infeasible,
    /// No clean split between neutral and classified eigenvalues.
    Ambiguous,
    /// Any other failure.
    Failed,
}

impl StabilityTag {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Stable => "Stable",
            Self::Unstable => "Unstable",
            Self::Infeasible => "Infeasible",
            Self::Ambiguous => "Ambiguous",
            Self::Failed => "Failed",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityCell {
    pub x_e: f64,
    pub y_e: f64,
    pub tag: StabilityTag,
    pub report: Option<StabilityReport>,
    /// Perturb-and-integrate verdict, for cells near the stable/unstable
    /// boundary when requested.
    pub dynamic: Option<DynamicVerdict>,
}

impl StabilityCell {
    pub fn is_feasible(&self) -> bool {
        !matches!(self.tag, StabilityTag::Infeasible)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct StabilityRegionOptions {
    pub stability: StabilityOptions,
    /// Run the dynamic cross-check on cells within two grid steps of a cell
    /// with the opposite verdict.
    pub cross_check: Option<DynamicCheck>,
    #[serde(skip)]
    pub threads: Option<usize>,
}

/// Linear stability over the `n x n` midpoint grid of the `(x_e, y_e)` square.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityMap {
    pub n: usize,
    pub payoff: PayoffMatrix,
    pub speeds: LearningSpeeds,
    pub options: StabilityRegionOptions,
    /// Row-major: `x_e` outer, `y_e` inner.
    pub cells: Vec<StabilityCell>,
}

impl StabilityMap {
    pub fn count(&self, tag: StabilityTag) -> usize {
        self.cells.iter().filter(|c| c.tag == tag).count()
    }

    pub fn feasible(&self) -> usize {
        self.cells.iter().filter(|c| c.is_feasible()).count()
    }

    pub fn cell(&self, i: usize, j: usize) -> &StabilityCell {
        &self.cells[i * self.n + j]
    }

    /// Counts of the dynamic verdicts `(agrees, disagrees, inconclusive)`.
    pub fn dynamic_summary(&self) -> (usize, usize, usize) {
        let count = |v| self.cells.iter().filter(|c| c.dynamic == Some(v)).count();
        (
            count(DynamicVerdict::Agrees),
            count(DynamicVerdict::Disagrees),
            count(DynamicVerdict::Inconclusive),
        )
    }
}

/// Midpoint `(i + 1/2) / n` of cell `i` along one side of the manifold grid.
pub fn manifold_grid_value(i: usize, n: usize) -> f64 {
    (2 * i + 1) as f64 / (2 * n) as f64
}

pub fn stability_region(pay: &PayoffMatrix, sp: &LearningSpeeds, n: usize) -> Result<StabilityMap> {
    stability_region_with(pay, sp, n, &StabilityRegionOptions::default())
}

pub fn stability_region_with(
    pay: &PayoffMatrix,
    sp: &LearningSpeeds,
    n: usize,
    opts: &StabilityRegionOptions,
) -> Result<StabilityMap> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("stability grid needs n >= 2, got {n}")));
    }
    let points: Vec<(f64, f64)> = (0..n * n)
        .map(|k| (manifold_grid_value(k / n, n), manifold_grid_value(k % n, n)))
        .collect();
    let mut cells = par_map(opts.threads, &points, |&(x_e, y_e)| {
        let (tag, report) = match classify_interior_with(pay, x_e, y_e, sp, &opts.stability) {
            Ok(r) if r.stable => (StabilityTag::Stable, Some(r)),
            Ok(r) => (StabilityTag::Unstable, Some(r)),
            Err(Error::OutOfStrategyBox { .. }) => (StabilityTag::Infeasible, None),
            Err(Error::AmbiguousZeroSplit { .. }) => (StabilityTag::Ambiguous, None),
            Err(_) => (StabilityTag::Failed, None),
        };
        StabilityCell {
            x_e,
            y_e,
            tag,
            report,
            dynamic: None,
        }
    })?;

    if let Some(check) = &opts.cross_check {
        let near = near_boundary(&cells, n);
        let verdicts = par_map(opts.threads, &near, |&k| {
            let report = cells[k].report.as_ref().expect("boundary cells are classified");
            dynamic_check(pay, report, sp, check).unwrap_or(DynamicVerdict::Inconclusive)
        })?;
        for (k, v) in near.into_iter().zip(verdicts) {
            cells[k].dynamic = Some(v);
        }
    }

    Ok(StabilityMap {
        n,
        payoff: *pay,
        speeds: *sp,
        options: *opts,
        cells,
    })
}

/// Classified cells within Chebyshev distance 2 of a cell with the opposite
/// verdict.
fn near_boundary(cells: &[StabilityCell], n: usize) -> Vec<usize> {
    let tag = |i: usize, j: usize| cells[i * n + j].tag;
    let mut out = Vec::new();
    for i in 0..n {
        for j in 0..n {
            let own = tag(i, j);
            let opposite = match own {
                StabilityTag::Stable => StabilityTag::Unstable,
                StabilityTag::Unstable => StabilityTag::Stable,
                _ => continue,
            };
            let found = (i.saturating_sub(2)..=(i + 2).min(n - 1))
                .any(|a| (j.saturating_sub(2)..=(j + 2).min(n - 1)).any(|b| tag(a, b) == opposite));
            if found {
                out.push(i * n + j);
            }
        }
    }
    out
}

/// Settings of [`tft_monotonicity_check`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonotonicityOptions {
    /// Opponent's fixed initial `(yC, yD)`.
    pub opponent: (f64, f64),
    /// Largest shift of the perturbed coordinate.
    pub perturbation: f64,
    pub seed: u64,
    /// Give up after this many candidate draws per requested sample.
    pub max_draws_per_sample: usize,
    pub sweep: SweepOptions,
}

impl Default for MonotonicityOptions {
    fn default() -> Self {
        Self {
            opponent: (0.8, 0.2),
            perturbation: 0.1,
            seed: 0,
            max_draws_per_sample: 50,
            sweep: SweepOptions::default(),
        }
    }
}

/// A cooperative initial condition and its toward-TFT perturbation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonotonicitySample {
    pub base: JointStrategy,
    pub perturbed: JointStrategy,
    pub perturbed_terminal: Terminal,
}

impl MonotonicitySample {
    pub fn is_violation(&self) -> bool {
        self.perturbed_terminal != Terminal::PureCC
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonotonicityReport {
    pub requested: usize,
    pub draws: usize,
    /// Draws discarded because the perturbation was clamped onto a face.
    pub face_skips: usize,
    pub samples: Vec<MonotonicitySample>,
    pub violations: usize,
}

/// Moves `(xC, xD)` toward TFT `(1, 0)` by `shift` in one coordinate,
/// `xC` when `prefer_c`. A coordinate already at its TFT value cannot move,
/// so the other one is used.
pub fn toward_tft(x_c: f64, x_d: f64, shift: f64, prefer_c: bool) -> (f64, f64) {
    if (prefer_c && x_c < 1.0) || x_d <= 0.0 {
        ((x_c + shift).min(1.0), x_d)
    } else {
        (x_c, (x_d - shift).max(0.0))
    }
}

struct Candidate {
    base: JointStrategy,
    perturbed: JointStrategy,
    /// The shift was clamped onto a face of the box the base was not on.
    /// Faces are invariant (the moved coordinate can never change again), so
    /// such a start belongs to a different, lower-dimensional system.
    lands_on_face: bool,
}

fn draw_candidate(rng: &mut ChaCha8Rng, opponent: (f64, f64), size: f64) -> Result<Candidate> {
    let x_c: f64 = rng.gen();
    let x_d: f64 = rng.gen();
    let shift: f64 = size * rng.gen::<f64>();
    let move_c: bool = rng.gen();
    let base = JointStrategy::new(x_c, x_d, opponent.0, opponent.1)?;
    let (x_c2, x_d2) = toward_tft(x_c, x_d, shift, move_c);
    let perturbed = JointStrategy::new(x_c2, x_d2, opponent.0, opponent.1)?;
    let on_face = |v: f64| v == 0.0 || v == 1.0;
    let lands_on_face = (on_face(x_c2) && !on_face(x_c)) || (on_face(x_d2) && !on_face(x_d));
    Ok(Candidate {
        base,
        perturbed,
        lands_on_face,
    })
}

/// Draws initial `(xC, xD)` against a fixed opponent, keeps those that reach
/// pure cooperation, moves each toward TFT and checks that cooperation is
/// still reached. Only meaningful for non-submodular games.
pub fn tft_monotonicity_check(
    pay: &PayoffMatrix,
    sp: &LearningSpeeds,
    samples: usize,
    opts: &MonotonicityOptions,
) -> Result<MonotonicityReport> {
    if pay.submodular() {
        return Err(Error::InvalidArgument(format!(
            "monotonicity toward TFT only holds for T-R-P+S <= 0, got {}",
            pay.submodularity()
        )));
    }
    if !(opts.perturbation >= 0.0) {
        return Err(Error::InvalidArgument("perturbation size must be non-negative".into()));
    }
    opts.sweep.integrator.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let max_draws = samples.saturating_mul(opts.max_draws_per_sample);
    let mut report = MonotonicityReport {
        requested: samples,
        draws: 0,
        face_skips: 0,
        samples: Vec::with_capacity(samples),
        violations: 0,
    };
    // Candidates are drawn in fixed-size batches so the RNG stream, and thus
    // the result, is independent of the worker count.
    let batch = samples.max(1);
    while report.samples.len() < samples && report.draws < max_draws {
        let take = batch.min(max_draws - report.draws);
        let candidates = (0..take)
            .map(|_| draw_candidate(&mut rng, opts.opponent, opts.perturbation))
            .collect::<Result<Vec<_>>>()?;
        let outcomes = par_map(opts.sweep.threads, &candidates, |c| {
            if c.lands_on_face {
                return None;
            }
            let base = run_cell(pay, sp, &c.base, &opts.sweep);
            (base.terminal == Terminal::PureCC).then(|| run_cell(pay, sp, &c.perturbed, &opts.sweep).terminal)
        })?;
        for (c, outcome) in candidates.iter().zip(outcomes) {
            if report.samples.len() == samples {
                break;
            }
            report.draws += 1;
            report.face_skips += usize::from(c.lands_on_face);
            if let Some(terminal) = outcome {
                let sample = MonotonicitySample {
                    base: c.base,
                    perturbed: c.perturbed,
                    perturbed_terminal: terminal,
                };
                report.violations += usize::from(sample.is_violation());
                report.samples.push(sample);
            }
        }
    }
    Ok(report)
}
