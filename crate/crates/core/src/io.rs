//! CSV and JSON serialisation of results, run manifests and plot scripts.
//!
//! Floats are written in the shortest form that parses back to the same
//! `f64`, so reading a file recovers the in-memory values bit for bit.

use std::collections::BTreeMap;
use std::fmt;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fixed_points::{BoundaryCurve, DynamicVerdict};
use crate::game::JointStrategy;
use crate::learning::{CaseLabel, EqSample, Terminal, TrajectoryRecord};
use crate::sweep::{Grid4dResult, MonotonicityReport, StabilityMap, StabilityTag, SweepCell, SweepResult};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Everything needed to regenerate a set of output files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    /// Full argument set of the command.
    pub parameters: serde_json::Value,
    pub tool_version: String,
    pub timestamp: String,
    pub outputs: Vec<PathBuf>,
    /// Choices not visible in the parameters, such as grid conventions.
    #[serde(default)]
    pub metadata: BTreeMap<String, String>,
}

impl RunManifest {
    pub fn new(command: &str, parameters: &impl Serialize, outputs: Vec<PathBuf>) -> Result<Self> {
        Ok(Self {
            command: command.to_owned(),
            parameters: serde_json::to_value(parameters)?,
            tool_version: TOOL_VERSION.to_owned(),
            timestamp: chrono::Utc::now().to_rfc3339(),
            outputs,
            metadata: BTreeMap::new(),
        })
    }

    /// `<dir>/<stem>.manifest.json` for an output at `<dir>/<stem>.<ext>`.
    pub fn path_for(output: &Path) -> PathBuf {
        let stem = output.file_stem().unwrap_or_default().to_string_lossy();
        output.with_file_name(format!("{stem}.manifest.json"))
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        fs::write(path, text)?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
    }
}

fn write_rows<T: Serialize>(path: &Path, header: &[&str], rows: impl IntoIterator<Item = T>) -> Result<()> {
    let file = BufWriter::new(File::create(path)?);
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(file);
    w.write_record(header)?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

fn read_rows<T: DeserializeOwned>(path: &Path, header: &[&str]) -> Result<Vec<T>> {
    let mut r = csv::Reader::from_path(path)?;
    let found: Vec<String> = r.headers()?.iter().map(str::to_owned).collect();
    if found != header {
        return Err(Error::Parse(format!(
            "{}: expected columns {header:?}, found {found:?}",
            path.display()
        )));
    }
    Ok(r.deserialize().collect::<std::result::Result<_, _>>()?)
}

pub const TRAJECTORY_COLUMNS: [&str; 9] = ["t", "x_C", "x_D", "y_C", "y_D", "x_e", "y_e", "u_e", "v_e"];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
struct TrajectoryRow {
    t: f64,
    #[serde(rename = "x_C")]
    x_c: f64,
    #[serde(rename = "x_D")]
    x_d: f64,
    #[serde(rename = "y_C")]
    y_c: f64,
    #[serde(rename = "y_D")]
    y_d: f64,
    x_e: f64,
    y_e: f64,
    u_e: f64,
    v_e: f64,
}

/// The sampled columns of a trajectory, as stored on disk.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrajectoryTable {
    pub times: Vec<f64>,
    pub states: Vec<JointStrategy>,
    pub eq_track: Vec<EqSample>,
}

impl From<&TrajectoryRecord> for TrajectoryTable {
    fn from(rec: &TrajectoryRecord) -> Self {
        Self {
            times: rec.times.clone(),
            states: rec.states.clone(),
            eq_track: rec.eq_track.clone(),
        }
    }
}

pub fn write_trajectory_csv(table: &TrajectoryTable, path: &Path) -> Result<()> {
    let rows = table.times.iter().zip(&table.states).zip(&table.eq_track).map(|((&t, s), e)| {
        let [x_c, x_d, y_c, y_d] = s.as_array();
        TrajectoryRow {
            t,
            x_c,
            x_d,
            y_c,
            y_d,
            x_e: e.x_e,
            y_e: e.y_e,
            u_e: e.u_e,
            v_e: e.v_e,
        }
    });
    write_rows(path, &TRAJECTORY_COLUMNS, rows)
}

pub fn read_trajectory_csv(path: &Path) -> Result<TrajectoryTable> {
    let rows: Vec<TrajectoryRow> = read_rows(path, &TRAJECTORY_COLUMNS)?;
    let mut table = TrajectoryTable::default();
    for r in rows {
        table.times.push(r.t);
        table.states.push(JointStrategy::new(r.x_c, r.x_d, r.y_c, r.y_d)?);
        table.eq_track.push(EqSample {
            x_e: r.x_e,
            y_e: r.y_e,
            u_e: r.u_e,
            v_e: r.v_e,
        });
    }
    Ok(table)
}

pub const SWEEP_COLUMNS: [&str; 10] = [
    "axis1",
    "axis2",
    "terminal",
    "x_e_star",
    "y_e_star",
    "u_e_star",
    "v_e_star",
    "exploitation",
    "cooperation",
    "case_label",
];

/// One line of a basin-map CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub axis1: f64,
    pub axis2: f64,
    pub terminal: Terminal,
    pub x_e_star: f64,
    pub y_e_star: f64,
    pub u_e_star: f64,
    pub v_e_star: f64,
    pub exploitation: f64,
    pub cooperation: f64,
    pub case_label: CaseLabel,
}

pub fn sweep_rows(res: &SweepResult) -> Vec<SweepRow> {
    res.cells
        .iter()
        .enumerate()
        .map(|(k, c)| {
            let (axis1, axis2) = res.axis_values(k);
            SweepRow {
                axis1,
                axis2,
                terminal: c.terminal,
                x_e_star: c.x_e_star,
                y_e_star: c.y_e_star,
                u_e_star: c.u_e_star,
                v_e_star: c.v_e_star,
                exploitation: c.exploitation,
                cooperation: c.cooperation,
                case_label: c.case_label,
            }
        })
        .collect()
}

pub fn write_sweep_csv(res: &SweepResult, path: &Path) -> Result<()> {
    write_rows(path, &SWEEP_COLUMNS, sweep_rows(res))
}

pub fn read_sweep_csv(path: &Path) -> Result<Vec<SweepRow>> {
    read_rows(path, &SWEEP_COLUMNS)
}

pub const GRID4D_COLUMNS: [&str; 12] = [
    "x_C",
    "x_D",
    "y_C",
    "y_D",
    "terminal",
    "x_e_star",
    "y_e_star",
    "u_e_star",
    "v_e_star",
    "exploitation",
    "cooperation",
    "case_label",
];

/// One line of a 4-d grid CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid4dRow {
    #[serde(rename = "x_C")]
    pub x_c: f64,
    #[serde(rename = "x_D")]
    pub x_d: f64,
    #[serde(rename = "y_C")]
    pub y_c: f64,
    #[serde(rename = "y_D")]
    pub y_d: f64,
    pub terminal: Terminal,
    pub x_e_star: f64,
    pub y_e_star: f64,
    pub u_e_star: f64,
    pub v_e_star: f64,
    pub exploitation: f64,
    pub cooperation: f64,
    pub case_label: CaseLabel,
}

impl From<&SweepCell> for Grid4dRow {
    fn from(c: &SweepCell) -> Self {
        let [x_c, x_d, y_c, y_d] = c.init.as_array();
        Self {
            x_c,
            x_d,
            y_c,
            y_d,
            terminal: c.terminal,
            x_e_star: c.x_e_star,
            y_e_star: c.y_e_star,
            u_e_star: c.u_e_star,
            v_e_star: c.v_e_star,
            exploitation: c.exploitation,
            cooperation: c.cooperation,
            case_label: c.case_label,
        }
    }
}

pub fn write_grid4d_csv(res: &Grid4dResult, path: &Path) -> Result<()> {
    write_rows(path, &GRID4D_COLUMNS, res.cells.iter().map(Grid4dRow::from))
}

pub fn read_grid4d_csv(path: &Path) -> Result<Vec<Grid4dRow>> {
    read_rows(path, &GRID4D_COLUMNS)
}

pub const STABILITY_COLUMNS: [&str; 14] = [
    "x_e",
    "y_e",
    "tag",
    "x_C",
    "x_D",
    "y_C",
    "y_D",
    "lambda1_re",
    "lambda1_im",
    "lambda2_re",
    "lambda2_im",
    "n_zero",
    "oscillatory",
    "dynamic",
];

/// One line of a stability-map CSV. Report columns are empty for cells
/// that could not be classified.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityRow {
    pub x_e: f64,
    pub y_e: f64,
    pub tag: StabilityTag,
    #[serde(rename = "x_C")]
    pub x_c: Option<f64>,
    #[serde(rename = "x_D")]
    pub x_d: Option<f64>,
    #[serde(rename = "y_C")]
    pub y_c: Option<f64>,
    #[serde(rename = "y_D")]
    pub y_d: Option<f64>,
    pub lambda1_re: Option<f64>,
    pub lambda1_im: Option<f64>,
    pub lambda2_re: Option<f64>,
    pub lambda2_im: Option<f64>,
    pub n_zero: Option<usize>,
    pub oscillatory: Option<bool>,
    pub dynamic: Option<DynamicVerdict>,
}

pub fn stability_rows(map: &StabilityMap) -> Vec<StabilityRow> {
    map.cells
        .iter()
        .map(|c| {
            let r = c.report.as_ref();
            let loc = r.map(|r| r.location.as_array());
            let coord = |i: usize| loc.map(|v| v[i]);
            StabilityRow {
                x_e: c.x_e,
                y_e: c.y_e,
                tag: c.tag,
                x_c: coord(0),
                x_d: coord(1),
                y_c: coord(2),
                y_d: coord(3),
                lambda1_re: r.map(|r| r.classified[0].re),
                lambda1_im: r.map(|r| r.classified[0].im),
                lambda2_re: r.map(|r| r.classified[1].re),
                lambda2_im: r.map(|r| r.classified[1].im),
                n_zero: r.map(|r| r.n_zero),
                oscillatory: r.map(|r| r.oscillatory),
                dynamic: c.dynamic,
            }
        })
        .collect()
}

pub fn write_stability_csv(map: &StabilityMap, path: &Path) -> Result<()> {
    write_rows(path, &STABILITY_COLUMNS, stability_rows(map))
}

pub fn read_stability_csv(path: &Path) -> Result<Vec<StabilityRow>> {
    read_rows(path, &STABILITY_COLUMNS)
}

pub const BOUNDARY_COLUMNS: [&str; 3] = ["curve", "x_e", "y_e"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryRow {
    pub curve: String,
    pub x_e: f64,
    pub y_e: f64,
}

pub fn write_boundaries_csv(curves: &[BoundaryCurve], path: &Path) -> Result<()> {
    let rows = curves.iter().flat_map(|c| {
        c.points.iter().map(|&(x_e, y_e)| BoundaryRow {
            curve: c.kind.label().to_owned(),
            x_e,
            y_e,
        })
    });
    write_rows(path, &BOUNDARY_COLUMNS, rows)
}

pub fn read_boundaries_csv(path: &Path) -> Result<Vec<BoundaryRow>> {
    read_rows(path, &BOUNDARY_COLUMNS)
}

pub const MONOTONICITY_COLUMNS: [&str; 7] = [
    "x_C",
    "x_D",
    "x_C_perturbed",
    "x_D_perturbed",
    "y_C",
    "y_D",
    "perturbed_terminal",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonotonicityRow {
    #[serde(rename = "x_C")]
    pub x_c: f64,
    #[serde(rename = "x_D")]
    pub x_d: f64,
    #[serde(rename = "x_C_perturbed")]
    pub x_c_perturbed: f64,
    #[serde(rename = "x_D_perturbed")]
    pub x_d_perturbed: f64,
    #[serde(rename = "y_C")]
    pub y_c: f64,
    #[serde(rename = "y_D")]
    pub y_d: f64,
    pub perturbed_terminal: Terminal,
}

pub fn write_monotonicity_csv(report: &MonotonicityReport, path: &Path) -> Result<()> {
    let rows = report.samples.iter().map(|s| MonotonicityRow {
        x_c: s.base.x_c(),
        x_d: s.base.x_d(),
        x_c_perturbed: s.perturbed.x_c(),
        x_d_perturbed: s.perturbed.x_d(),
        y_c: s.base.y_c(),
        y_d: s.base.y_d(),
        perturbed_terminal: s.perturbed_terminal,
    });
    write_rows(path, &MONOTONICITY_COLUMNS, rows)
}

pub fn read_monotonicity_csv(path: &Path) -> Result<Vec<MonotonicityRow>> {
    read_rows(path, &MONOTONICITY_COLUMNS)
}

/// `x` with `digits` decimals and trailing zeros removed.
pub fn format_decimal(x: f64, digits: usize) -> String {
    let s = format!("{x:.digits$}");
    let s = if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        &s
    };
    if s == "-0" {
        "0".to_owned()
    } else {
        s.to_owned()
    }
}

/// Figure types a plot script can render.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PlotKind {
    /// Strategy and equilibrium columns against time.
    Trajectory,
    /// Exploitation and cooperation heatmaps of a basin map.
    Basin,
    /// Final `(x_e*, y_e*)` of a 4-d grid run.
    Scatter,
    /// Stable and unstable cells of the fixed-point manifold.
    Stability,
}

impl PlotKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            PlotKind::Trajectory => "trajectory",
            PlotKind::Basin => "basin",
            PlotKind::Scatter => "scatter",
            PlotKind::Stability => "stability",
        }
    }
}

impl fmt::Display for PlotKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PlotKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "trajectory" => Ok(PlotKind::Trajectory),
            "basin" => Ok(PlotKind::Basin),
            "scatter" => Ok(PlotKind::Scatter),
            "stability" => Ok(PlotKind::Stability),
            other => Err(Error::Parse(format!(
                "unknown plot kind `{other}` (use trajectory, basin, scatter or stability)"
            ))),
        }
    }
}

const PLOT_PRELUDE: &str = r#"import csv
import sys

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

CSV_PATH = {csv}
PNG_PATH = {png}

with open(CSV_PATH, newline="") as f:
    rows = list(csv.DictReader(f))


def column(name):
    return [float(r[name]) if r[name] != "" else float("nan") for r in rows]

"#;

const PLOT_TRAJECTORY: &str = r#"t = column("t")
fig, (top, bottom) = plt.subplots(2, 1, sharex=True, figsize=(7, 6))
for name in ["x_C", "x_D", "y_C", "y_D", "x_e", "y_e"]:
    style = "--" if name.startswith("y") else "-"
    top.plot(t, column(name), style, label=name)
top.set_ylabel("probability")
top.set_ylim(-0.02, 1.02)
top.legend(ncol=3, fontsize="small")
bottom.plot(t, column("u_e"), label="u_e")
bottom.plot(t, column("v_e"), "--", label="v_e")
bottom.set_xlabel("t")
bottom.set_ylabel("payoff")
bottom.legend()
"#;

const PLOT_BASIN: &str = r#"xs = sorted(set(column("axis1")))
ys = sorted(set(column("axis2")))
index = {(a, b): k for k, (a, b) in enumerate(zip(column("axis1"), column("axis2")))}


def grid(name):
    values = column(name)
    return [[values[index[(a, b)]] for a in xs] for b in ys]


extent = (xs[0], xs[-1], ys[0], ys[-1])
fig, axes = plt.subplots(1, 2, figsize=(11, 4.5))
for ax, name, cmap, lim in [
    (axes[0], "exploitation", "coolwarm", (-1, 1)),
    (axes[1], "cooperation", "viridis", (0, 1)),
]:
    im = ax.imshow(grid(name), origin="lower", extent=extent, aspect="auto", cmap=cmap, vmin=lim[0], vmax=lim[1])
    ax.set_title(name)
    ax.set_xlabel("axis1")
    ax.set_ylabel("axis2")
    fig.colorbar(im, ax=ax)
"#;

const PLOT_SCATTER: &str = r#"fig, ax = plt.subplots(figsize=(5, 5))
ax.scatter(column("x_e_star"), column("y_e_star"), s=8, alpha=0.5)
ax.plot([0, 1], [0, 1], color="grey", lw=0.5)
ax.set_xlim(-0.02, 1.02)
ax.set_ylim(-0.02, 1.02)
ax.set_xlabel("x_e*")
ax.set_ylabel("y_e*")
"#;

const PLOT_STABILITY: &str = r#"colors = {"Stable": "tab:blue", "Unstable": "tab:red", "Ambiguous": "tab:orange", "Failed": "black"}
fig, ax = plt.subplots(figsize=(5, 5))
for tag, color in colors.items():
    pts = [(float(r["x_e"]), float(r["y_e"])) for r in rows if r["tag"] == tag]
    if pts:
        ax.scatter(*zip(*pts), s=6, color=color, label=tag)
ax.set_xlim(0, 1)
ax.set_ylim(0, 1)
ax.set_xlabel("x_e")
ax.set_ylabel("y_e")
ax.legend(fontsize="small")
"#;

const PLOT_EPILOGUE: &str = r#"
fig.tight_layout()
fig.savefig(PNG_PATH, dpi=150)
print(PNG_PATH, file=sys.stderr)
"#;

fn python_string(path: &Path) -> String {
    // JSON string literals are valid Python string literals.
    serde_json::to_string(&path.to_string_lossy()).expect("strings always serialise")
}

/// Writes a matplotlib script that renders `csv` as a figure of the given
/// kind, saved next to the CSV with a `.png` extension.
pub fn emit_plot_script(csv: &Path, kind: PlotKind, path: &Path) -> Result<()> {
    let png = csv.with_extension("png");
    let body = match kind {
        PlotKind::Trajectory => PLOT_TRAJECTORY,
        PlotKind::Basin => PLOT_BASIN,
        PlotKind::Scatter => PLOT_SCATTER,
        PlotKind::Stability => PLOT_STABILITY,
    };
    let prelude = PLOT_PRELUDE
        .replace("{csv}", &python_string(csv))
        .replace("{png}", &python_string(&png));
    let mut f = BufWriter::new(File::create(path)?);
    write!(f, "#!/usr/bin/env python3\n{prelude}{body}{PLOT_EPILOGUE}")?;
    f.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::PayoffMatrix;
    use crate::learning::{integrate, IntegratorConfig, LearningSpeeds};
    use crate::sweep::{basin_map, GridAxis, StrategyComponent, SweepOptions};
    use tempfile::tempdir;

    #[test]
    fn decimal_formatting() {
        assert_eq!(format_decimal(0.25, 6), "0.25");
        assert_eq!(format_decimal(2.0 / 3.0, 6), "0.666667");
        assert_eq!(format_decimal(7.0 / 6.0, 6), "1.166667");
        assert_eq!(format_decimal(3.25, 6), "3.25");
        assert_eq!(format_decimal(2.0, 6), "2");
        assert_eq!(format_decimal(0.49999999999999994, 6), "0.5");
        assert_eq!(format_decimal(-1e-9, 6), "0");
    }

    #[test]
    fn empty_trajectory_is_header_only() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("empty.csv");
        write_trajectory_csv(&TrajectoryTable::default(), &path).unwrap();
        assert_eq!(fs::read_to_string(&path).unwrap(), "t,x_C,x_D,y_C,y_D,x_e,y_e,u_e,v_e\n");
        assert_eq!(read_trajectory_csv(&path).unwrap(), TrajectoryTable::default());
    }

    #[test]
    fn trajectory_round_trip_is_exact() {
        let pay = PayoffMatrix::new(5.0, 3.25, 1.0, 0.0).unwrap();
        let init = JointStrategy::new(0.9, 0.1, 0.9, 0.7).unwrap();
        let cfg = IntegratorConfig {
            t_max: 20.0,
            ..Default::default()
        };
        let rec = integrate(&pay, &init, &LearningSpeeds::default(), &cfg).unwrap();
        let table = TrajectoryTable::from(&rec);
        let dir = tempdir().unwrap();
        let path = dir.path().join("traj.csv");
        write_trajectory_csv(&table, &path).unwrap();
        assert_eq!(read_trajectory_csv(&path).unwrap(), table);
        let text = fs::read_to_string(&path).unwrap();
        assert!(text.ends_with('\n'));
        assert_eq!(text.lines().count(), rec.len() + 1);
    }

    #[test]
    fn sweep_rows_are_row_major() {
        let pay = PayoffMatrix::new(5.0, 3.0, 1.0, 0.0).unwrap();
        let opts = SweepOptions {
            integrator: IntegratorConfig {
                t_max: 500.0,
                ..Default::default()
            },
            ..Default::default()
        };
        let res = basin_map(
            &pay,
            &LearningSpeeds::default(),
            GridAxis::new(StrategyComponent::XD, 0.1, 0.3, 2).unwrap(),
            GridAxis::new(StrategyComponent::YD, 0.1, 0.3, 2).unwrap(),
            &[(StrategyComponent::XC, 0.9), (StrategyComponent::YC, 0.9)],
            &opts,
        )
        .unwrap();
        let dir = tempdir().unwrap();
        let path = dir.path().join("sweep.csv");
        write_sweep_csv(&res, &path).unwrap();
        let rows = read_sweep_csv(&path).unwrap();
        assert_eq!(rows, sweep_rows(&res));
        let axes: Vec<_> = rows.iter().map(|r| (r.axis1, r.axis2)).collect();
        assert_eq!(axes, vec![(0.1, 0.1), (0.1, 0.3), (0.3, 0.1), (0.3, 0.3)]);
        assert_eq!(fs::read_to_string(&path).unwrap().lines().next().unwrap(), SWEEP_COLUMNS.join(","));
    }

    #[test]
    fn wrong_header_is_rejected() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("bad.csv");
        fs::write(&path, "a,b\n1,2\n").unwrap();
        assert!(matches!(read_sweep_csv(&path), Err(Error::Parse(_))));
    }

    #[test]
    fn manifest_round_trip() {
        let dir = tempdir().unwrap();
        let out = dir.path().join("run.csv");
        let mut m = RunManifest::new("basin", &serde_json::json!({"n": 3, "x": 0.1}), vec![out.clone()]).unwrap();
        m.metadata.insert("grid".into(), "inclusive".into());
        let path = RunManifest::path_for(&out);
        assert_eq!(path.file_name().unwrap(), "run.manifest.json");
        m.write(&path).unwrap();
        assert_eq!(RunManifest::read(&path).unwrap(), m);
    }

    #[test]
    fn plot_scripts() {
        let dir = tempdir().unwrap();
        let csv = dir.path().join("data.csv");
        for kind in ["trajectory", "basin", "scatter", "stability"] {
            let kind: PlotKind = kind.parse().unwrap();
            let script = dir.path().join(format!("{kind}.py"));
            emit_plot_script(&csv, kind, &script).unwrap();
            let text = fs::read_to_string(&script).unwrap();
            assert!(text.contains("data.csv") && text.contains("data.png"));
        }
        let text = fs::read_to_string(dir.path().join("trajectory.py")).unwrap();
        for c in TRAJECTORY_COLUMNS {
            assert!(text.contains(&format!("\"{c}\"")), "{c}");
        }
        assert!(fs::read_to_string(dir.path().join("basin.py")).unwrap().contains("\"exploitation\""));
        assert!("heatmap".parse::<PlotKind>().is_err());
    }
}
