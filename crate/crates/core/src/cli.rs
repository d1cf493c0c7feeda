//! Command-line front end.
//!
//! Every command that writes a CSV also writes `<stem>.manifest.json` next
//! to it; `--manifest <file>` re-runs the recorded command.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fixed_points::{
    exploitation_boundaries, most_exploitative, most_exploitative_reverse, DynamicCheck, JacobianMethod,
    StabilityOptions,
};
use crate::game::{equilibrium, JointStrategy, PayoffMatrix};
use crate::io::{
    emit_plot_script, format_decimal, write_boundaries_csv, write_grid4d_csv, write_monotonicity_csv,
    write_stability_csv, write_sweep_csv, write_trajectory_csv, PlotKind, RunManifest, TrajectoryTable,
};
use crate::learning::{integrate, IntegratorConfig, LearningSpeeds, Terminal};
use crate::sweep::{
    basin_map, grid4d, stability_region_with, tft_monotonicity_check, GridAxis, MonotonicityOptions,
    StabilityRegionOptions, StabilityTag, StrategyComponent, SweepCell, SweepOptions,
};

#[derive(Debug, Parser)]
#[command(
    name = "ipd-learning",
    version,
    about = "Learning dynamics of memory-one strategies in the iterated prisoner's dilemma"
)]
pub struct Cli {
    /// Worker threads for sweeps [default: all cores]
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,

    /// Re-run the command recorded in a run manifest
    #[arg(long, value_name = "FILE")]
    manifest: Option<PathBuf>,

    /// With --manifest, write the outputs into DIR instead of their recorded paths
    #[arg(long, value_name = "DIR", requires = "manifest")]
    out_dir: Option<PathBuf>,

    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Stationary cooperation levels and payoffs of a strategy pair
    Equilibrium(EquilibriumArgs),
    /// Integrate the learning dynamics from one initial condition
    Trajectory(TrajectoryArgs),
    /// Linear stability over the manifold of interior fixed points
    FixedPoints(FixedPointsArgs),
    /// Terminal states over a 2-d slice of initial conditions
    Basin(BasinArgs),
    /// The fixed point where one player's exploitation is largest
    MostExploitative(MostExploitativeArgs),
    /// Check that moving toward TFT preserves convergence to cooperation
    Monotonicity(MonotonicityArgs),
    /// Terminal states from the 4-d midpoint grid of initial conditions
    Grid4d(Grid4dArgs),
}

fn parse_numbers<const N: usize>(s: &str) -> std::result::Result<[f64; N], String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != N {
        return Err(format!("expected {N} comma-separated numbers, got `{s}`"));
    }
    let mut out = [0.0; N];
    for (slot, p) in out.iter_mut().zip(parts) {
        let v: f64 = p.parse().map_err(|_| format!("`{p}` is not a number"))?;
        if !v.is_finite() {
            return Err(format!("`{p}` is not finite"));
        }
        *slot = v;
    }
    Ok(out)
}

fn parse_quad(s: &str) -> std::result::Result<[f64; 4], String> {
    parse_numbers::<4>(s)
}

fn parse_pair(s: &str) -> std::result::Result<[f64; 2], String> {
    parse_numbers::<2>(s)
}

/// `name:min:max:n`, e.g. `x_D:0:1:50`.
fn parse_axis(s: &str) -> std::result::Result<GridAxis, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let [name, min, max, n] = parts.as_slice() else {
        return Err(format!("expected name:min:max:n, got `{s}`"));
    };
    let name: StrategyComponent = name.parse().map_err(|e: Error| e.to_string())?;
    let num = |p: &str| p.parse::<f64>().map_err(|_| format!("`{p}` is not a number"));
    let n = n.parse::<usize>().map_err(|_| format!("`{n}` is not a cell count"))?;
    GridAxis::new(name, num(min)?, num(max)?, n).map_err(|e| e.to_string())
}

/// Coordinates held fixed during a basin sweep, e.g. `x_C=0.999,y_C=0.999`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct FixedCoords(Vec<(StrategyComponent, f64)>);

fn parse_fixed(s: &str) -> std::result::Result<FixedCoords, String> {
    s.split(',')
        .map(|item| {
            let (name, value) = item
                .split_once('=')
                .ok_or_else(|| format!("expected name=value, got `{item}`"))?;
            let name: StrategyComponent = name.trim().parse().map_err(|e: Error| e.to_string())?;
            let value: f64 = value.trim().parse().map_err(|_| format!("`{value}` is not a number"))?;
            Ok((name, value))
        })
        .collect::<std::result::Result<_, _>>()
        .map(FixedCoords)
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
struct PayoffArg {
    /// Payoffs T,R,P,S with T>R>P>S and 2R>=T+S
    #[arg(long, value_parser = parse_quad, value_name = "T,R,P,S")]
    payoff: [f64; 4],
}

impl PayoffArg {
    fn matrix(&self) -> Result<PayoffMatrix> {
        let [t, r, p, s] = self.payoff;
        PayoffMatrix::new(t, r, p, s)
    }
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
struct SpeedsArg {
    /// Learning rates S1C,S1D,S2C,S2D
    #[arg(long, value_parser = parse_quad, default_value = "1,1,1,1", value_name = "S1C,S1D,S2C,S2D")]
    speeds: [f64; 4],
}

impl SpeedsArg {
    fn speeds(&self) -> Result<LearningSpeeds> {
        LearningSpeeds::try_from(self.speeds)
    }
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
struct IntegratorArgs {
    /// RK4 step
    #[arg(long, default_value_t = 0.01)]
    dt: f64,
    /// Integration horizon
    #[arg(long, default_value_t = 1e5)]
    t_max: f64,
    /// Stop once every component of the field is below this
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    /// Time between recorded samples
    #[arg(long, default_value_t = 0.1)]
    sample_interval: f64,
}

impl IntegratorArgs {
    fn config(&self) -> Result<IntegratorConfig> {
        let cfg = IntegratorConfig {
            dt: self.dt,
            t_max: self.t_max,
            converge_tol: self.tol,
            sample_interval: self.sample_interval,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
struct OutputArgs {
    /// CSV file to write; a run manifest is written next to it
    #[arg(long, short)]
    output: Option<PathBuf>,
    /// Also write a matplotlib script rendering the CSV
    #[arg(long, requires = "output", value_name = "FILE")]
    plot_script: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
struct EquilibriumArgs {
    #[command(flatten)]
    payoff: PayoffArg,
    /// Strategies xC,xD,yC,yD
    #[arg(long, value_parser = parse_quad, value_name = "xC,xD,yC,yD")]
    strategy: [f64; 4],
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
struct TrajectoryArgs {
    #[command(flatten)]
    payoff: PayoffArg,
    /// Initial strategies xC,xD,yC,yD
    #[arg(long, value_parser = parse_quad, value_name = "xC,xD,yC,yD")]
    strategy: [f64; 4],
    #[command(flatten)]
    speeds: SpeedsArg,
    #[command(flatten)]
    integrator: IntegratorArgs,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
struct FixedPointsArgs {
    #[command(flatten)]
    payoff: PayoffArg,
    #[command(flatten)]
    speeds: SpeedsArg,
    /// Cells per side of the (x_e, y_e) midpoint grid
    #[arg(long, default_value_t = 50)]
    n: usize,
    /// Linearise by central differences with this step instead of exactly
    #[arg(long, value_name = "H")]
    fd_step: Option<f64>,
    /// Perturb and integrate cells near the stable/unstable boundary
    #[arg(long)]
    cross_check: bool,
    /// Also write the exploitation boundary curves to this CSV
    #[arg(long, value_name = "FILE", requires = "output")]
    boundaries: Option<PathBuf>,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
struct BasinArgs {
    #[command(flatten)]
    payoff: PayoffArg,
    #[command(flatten)]
    speeds: SpeedsArg,
    /// First swept coordinate, outer loop
    #[arg(long, value_parser = parse_axis, value_name = "NAME:MIN:MAX:N")]
    axis1: GridAxis,
    /// Second swept coordinate, inner loop
    #[arg(long, value_parser = parse_axis, value_name = "NAME:MIN:MAX:N")]
    axis2: GridAxis,
    /// Values of the two remaining coordinates
    #[arg(long, value_parser = parse_fixed, value_name = "NAME=V,NAME=V")]
    fixed: FixedCoords,
    #[command(flatten)]
    integrator: IntegratorArgs,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
struct MostExploitativeArgs {
    #[command(flatten)]
    payoff: PayoffArg,
    /// Player 2 exploits player 1 instead
    #[arg(long)]
    reverse: bool,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
struct MonotonicityArgs {
    #[command(flatten)]
    payoff: PayoffArg,
    #[command(flatten)]
    speeds: SpeedsArg,
    /// Number of cooperative initial conditions to test
    #[arg(long, default_value_t = 100)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Largest toward-TFT shift
    #[arg(long, default_value_t = 0.1)]
    perturbation: f64,
    /// Opponent's initial yC,yD
    #[arg(long, value_parser = parse_pair, default_value = "0.8,0.2", value_name = "yC,yD")]
    opponent: [f64; 2],
    #[command(flatten)]
    integrator: IntegratorArgs,
    /// CSV file to write; a run manifest is written next to it
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
struct Grid4dArgs {
    #[command(flatten)]
    payoff: PayoffArg,
    #[command(flatten)]
    speeds: SpeedsArg,
    /// Grid points per coordinate
    #[arg(long, default_value_t = 4)]
    n: usize,
    #[command(flatten)]
    integrator: IntegratorArgs,
    #[command(flatten)]
    out: OutputArgs,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Equilibrium(_) => "equilibrium",
            Command::Trajectory(_) => "trajectory",
            Command::FixedPoints(_) => "fixed-points",
            Command::Basin(_) => "basin",
            Command::MostExploitative(_) => "most-exploitative",
            Command::Monotonicity(_) => "monotonicity",
            Command::Grid4d(_) => "grid4d",
        }
    }

    fn parameters(&self) -> Result<serde_json::Value> {
        Ok(match self {
            Command::Equilibrium(a) => serde_json::to_value(a)?,
            Command::Trajectory(a) => serde_json::to_value(a)?,
            Command::FixedPoints(a) => serde_json::to_value(a)?,
            Command::Basin(a) => serde_json::to_value(a)?,
            Command::MostExploitative(a) => serde_json::to_value(a)?,
            Command::Monotonicity(a) => serde_json::to_value(a)?,
            Command::Grid4d(a) => serde_json::to_value(a)?,
        })
    }

    fn from_manifest(m: &RunManifest) -> Result<Self> {
        let p = m.parameters.clone();
        Ok(match m.command.as_str() {
            "equilibrium" => Command::Equilibrium(serde_json::from_value(p)?),
            "trajectory" => Command::Trajectory(serde_json::from_value(p)?),
            "fixed-points" => Command::FixedPoints(serde_json::from_value(p)?),
            "basin" => Command::Basin(serde_json::from_value(p)?),
            "most-exploitative" => Command::MostExploitative(serde_json::from_value(p)?),
            "monotonicity" => Command::Monotonicity(serde_json::from_value(p)?),
            "grid4d" => Command::Grid4d(serde_json::from_value(p)?),
            other => return Err(Error::Parse(format!("manifest names unknown command `{other}`"))),
        })
    }

    /// Every output path the command may write.
    fn output_paths_mut(&mut self) -> Vec<&mut Option<PathBuf>> {
        match self {
            Command::Equilibrium(_) | Command::MostExploitative(_) => vec![],
            Command::Trajectory(a) => vec![&mut a.out.output, &mut a.out.plot_script],
            Command::FixedPoints(a) => vec![&mut a.out.output, &mut a.out.plot_script, &mut a.boundaries],
            Command::Basin(a) => vec![&mut a.out.output, &mut a.out.plot_script],
            Command::Monotonicity(a) => vec![&mut a.output],
            Command::Grid4d(a) => vec![&mut a.out.output, &mut a.out.plot_script],
        }
    }
}

/// Runs the command line `args` (program name first) and returns the exit
/// code: 0 on success, 1 for invalid input, 2 for runtime failures.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            let _ = write!(stdout, "{}", e.render());
            return 0;
        }
        Err(e) => {
            let rendered = e.render().to_string();
            let line = rendered.lines().next().unwrap_or("invalid arguments");
            let _ = writeln!(stderr, "{line}");
            return 1;
        }
    };
    match execute(cli, stdout) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            if e.is_validation() {
                1
            } else {
                2
            }
        }
    }
}

fn execute(cli: Cli, out: &mut dyn Write) -> Result<()> {
    let command = match (cli.command, &cli.manifest) {
        (Some(_), Some(_)) => {
            return Err(Error::InvalidArgument("--manifest replays a recorded run and takes no command".into()));
        }
        (Some(c), None) => c,
        (None, Some(path)) => {
            let manifest = RunManifest::read(path)?;
            let mut c = Command::from_manifest(&manifest)?;
            if let Some(dir) = &cli.out_dir {
                std::fs::create_dir_all(dir)?;
                for p in c.output_paths_mut().into_iter().flatten() {
                    *p = dir.join(p.file_name().unwrap_or_default());
                }
            }
            c
        }
        (None, None) => {
            return Err(Error::InvalidArgument("no command given; see --help".into()));
        }
    };
    let threads = cli.threads;
    if threads == Some(0) {
        return Err(Error::InvalidArgument("--threads must be at least 1".into()));
    }
    let record = Recorder {
        name: command.name(),
        parameters: command.parameters()?,
    };
    match command {
        Command::Equilibrium(a) => cmd_equilibrium(&a, out),
        Command::Trajectory(a) => cmd_trajectory(&a, &record, out),
        Command::FixedPoints(a) => cmd_fixed_points(&a, threads, &record, out),
        Command::Basin(a) => cmd_basin(&a, threads, &record, out),
        Command::MostExploitative(a) => cmd_most_exploitative(&a, out),
        Command::Monotonicity(a) => cmd_monotonicity(&a, threads, &record, out),
        Command::Grid4d(a) => cmd_grid4d(&a, threads, &record, out),
    }
}

/// Writes the run manifest for a command's outputs.
struct Recorder {
    name: &'static str,
    parameters: serde_json::Value,
}

impl Recorder {
    fn finish(
        &self,
        csv: &Path,
        extra: &[&Option<PathBuf>],
        plot: Option<(&Path, PlotKind)>,
        metadata: &[(&str, String)],
    ) -> Result<()> {
        let mut outputs = vec![csv.to_path_buf()];
        outputs.extend(extra.iter().filter_map(|p| p.as_ref().cloned()));
        if let Some((script, kind)) = plot {
            emit_plot_script(csv, kind, script)?;
            outputs.push(script.to_path_buf());
        }
        let mut manifest = RunManifest::new(self.name, &self.parameters, outputs)?;
        for (k, v) in metadata {
            manifest.metadata.insert((*k).to_owned(), v.clone());
        }
        manifest.write(&RunManifest::path_for(csv))
    }
}

fn integrator_metadata(cfg: &IntegratorConfig) -> Vec<(&'static str, String)> {
    vec![
        ("integrator", format!("RK4, fixed dt={}, clamped to [0,1] after each step", cfg.dt)),
        ("terminal_thresholds", "PureDD: x_e,y_e<0.01; PureCC: x_e,y_e>0.99".to_owned()),
        ("symmetry_band", "0.02".to_owned()),
    ]
}

fn cmd_equilibrium(a: &EquilibriumArgs, out: &mut dyn Write) -> Result<()> {
    let pay = a.payoff.matrix()?;
    let s = JointStrategy::from_array(a.strategy)?;
    let e = equilibrium(&pay, &s)?;
    writeln!(
        out,
        "x_e={} y_e={} u_e={} v_e={}",
        format_decimal(e.x_e, 6),
        format_decimal(e.y_e, 6),
        format_decimal(e.u_e, 6),
        format_decimal(e.v_e, 6)
    )?;
    Ok(())
}

fn cmd_trajectory(a: &TrajectoryArgs, rec: &Recorder, out: &mut dyn Write) -> Result<()> {
    let pay = a.payoff.matrix()?;
    let sp = a.speeds.speeds()?;
    let init = JointStrategy::from_array(a.strategy)?;
    let cfg = a.integrator.config()?;
    let traj = integrate(&pay, &init, &sp, &cfg)?;
    let last = traj.final_eq().expect("records hold the initial sample");
    let t_end = traj.times.last().copied().unwrap_or(0.0);
    writeln!(
        out,
        "terminal={} case={} t={} x_e={} y_e={} u_e={} v_e={}",
        traj.terminal,
        traj.case_label,
        format_decimal(t_end, 2),
        format_decimal(last.x_e, 6),
        format_decimal(last.y_e, 6),
        format_decimal(last.u_e, 6),
        format_decimal(last.v_e, 6)
    )?;
    if let Some(path) = &a.out.output {
        write_trajectory_csv(&TrajectoryTable::from(&traj), path)?;
        let plot = a.out.plot_script.as_deref().map(|p| (p, PlotKind::Trajectory));
        rec.finish(path, &[], plot, &integrator_metadata(&cfg))?;
    }
    Ok(())
}

fn cmd_fixed_points(a: &FixedPointsArgs, threads: Option<usize>, rec: &Recorder, out: &mut dyn Write) -> Result<()> {
    let pay = a.payoff.matrix()?;
    let sp = a.speeds.speeds()?;
    let jacobian = match a.fd_step {
        Some(step) => JacobianMethod::FiniteDifference { step },
        None => JacobianMethod::Exact,
    };
    let opts = StabilityRegionOptions {
        stability: StabilityOptions {
            jacobian,
            ..Default::default()
        },
        cross_check: a.cross_check.then(DynamicCheck::default),
        threads,
    };
    let map = stability_region_with(&pay, &sp, a.n, &opts)?;
    write!(
        out,
        "feasible={} stable={} unstable={} ambiguous={}",
        map.feasible(),
        map.count(StabilityTag::Stable),
        map.count(StabilityTag::Unstable),
        map.count(StabilityTag::Ambiguous)
    )?;
    if a.cross_check {
        let (agree, disagree, inconclusive) = map.dynamic_summary();
        write!(out, " dynamic_agrees={agree} dynamic_disagrees={disagree} dynamic_inconclusive={inconclusive}")?;
    }
    writeln!(out)?;
    if let Some(path) = &a.out.output {
        write_stability_csv(&map, path)?;
        if let Some(b) = &a.boundaries {
            write_boundaries_csv(&exploitation_boundaries(&pay, 4 * a.n.max(2) + 1)?, b)?;
        }
        let plot = a.out.plot_script.as_deref().map(|p| (p, PlotKind::Stability));
        let o = opts.stability;
        let metadata = [
            ("manifold_grid", "midpoints (i+1/2)/n on both axes, x_e outer, y_e inner".to_owned()),
            ("jacobian", format!("{:?}", o.jacobian)),
            (
                "zero_split",
                format!("neutral if |lambda| < {} * max|lambda|; gap factor >= {}", o.zero_tol_rel, o.min_gap),
            ),
        ];
        rec.finish(path, &[&a.boundaries], plot, &metadata)?;
    }
    Ok(())
}

fn terminal_summary(cells: &[SweepCell]) -> String {
    let count = |t: Terminal| cells.iter().filter(|c| c.terminal == t).count();
    let failed = cells.iter().filter(|c| c.error.is_some()).count();
    format!(
        "cells={} PureCC={} PureDD={} Interior={} Unconverged={} failed={}",
        cells.len(),
        count(Terminal::PureCC),
        count(Terminal::PureDD),
        count(Terminal::Interior),
        count(Terminal::Unconverged),
        failed
    )
}

fn sweep_options(integrator: &IntegratorArgs, threads: Option<usize>) -> Result<SweepOptions> {
    Ok(SweepOptions {
        integrator: integrator.config()?,
        threads,
        ..Default::default()
    })
}

fn cmd_basin(a: &BasinArgs, threads: Option<usize>, rec: &Recorder, out: &mut dyn Write) -> Result<()> {
    let pay = a.payoff.matrix()?;
    let sp = a.speeds.speeds()?;
    let opts = sweep_options(&a.integrator, threads)?;
    let res = basin_map(&pay, &sp, a.axis1, a.axis2, &a.fixed.0, &opts)?;
    writeln!(out, "{}", terminal_summary(&res.cells))?;
    if let Some(path) = &a.out.output {
        write_sweep_csv(&res, path)?;
        let plot = a.out.plot_script.as_deref().map(|p| (p, PlotKind::Basin));
        let mut metadata = integrator_metadata(&opts.integrator);
        metadata.push(("grid", "inclusive endpoints, axis1 outer, axis2 inner".to_owned()));
        rec.finish(path, &[], plot, &metadata)?;
    }
    Ok(())
}

fn cmd_most_exploitative(a: &MostExploitativeArgs, out: &mut dyn Write) -> Result<()> {
    let pay = a.payoff.matrix()?;
    let m = if a.reverse {
        most_exploitative_reverse(&pay)?
    } else {
        most_exploitative(&pay)?
    };
    writeln!(
        out,
        "{} {} {} {}",
        format_decimal(m.x_e, 6),
        format_decimal(m.y_e, 6),
        format_decimal(m.u_e, 6),
        format_decimal(m.v_e, 6)
    )?;
    Ok(())
}

fn cmd_monotonicity(a: &MonotonicityArgs, threads: Option<usize>, rec: &Recorder, out: &mut dyn Write) -> Result<()> {
    let pay = a.payoff.matrix()?;
    let sp = a.speeds.speeds()?;
    let opts = MonotonicityOptions {
        opponent: (a.opponent[0], a.opponent[1]),
        perturbation: a.perturbation,
        seed: a.seed,
        sweep: sweep_options(&a.integrator, threads)?,
        ..Default::default()
    };
    let report = tft_monotonicity_check(&pay, &sp, a.samples, &opts)?;
    writeln!(
        out,
        "samples={} draws={} face_skips={} violations={}",
        report.samples.len(),
        report.draws,
        report.face_skips,
        report.violations
    )?;
    if let Some(path) = &a.output {
        write_monotonicity_csv(&report, path)?;
        let mut metadata = integrator_metadata(&opts.sweep.integrator);
        metadata.push(("rng", "ChaCha8 seeded from --seed; candidates drawn in batches of --samples".to_owned()));
        rec.finish(path, &[], None, &metadata)?;
    }
    Ok(())
}

fn cmd_grid4d(a: &Grid4dArgs, threads: Option<usize>, rec: &Recorder, out: &mut dyn Write) -> Result<()> {
    let pay = a.payoff.matrix()?;
    let sp = a.speeds.speeds()?;
    let opts = sweep_options(&a.integrator, threads)?;
    let res = grid4d(&pay, &sp, a.n, &opts)?;
    writeln!(out, "{}", terminal_summary(&res.cells))?;
    if let Some(path) = &a.out.output {
        write_grid4d_csv(&res, path)?;
        let plot = a.out.plot_script.as_deref().map(|p| (p, PlotKind::Scatter));
        let mut metadata = integrator_metadata(&opts.integrator);
        metadata.push(("grid", "midpoints (2i-1)/2n per coordinate, lexicographic in xC,xD,yC,yD".to_owned()));
        rec.finish(path, &[], plot, &metadata)?;
    }
    Ok(())
}
