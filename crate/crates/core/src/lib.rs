//! Learning dynamics of memory-one strategies in the iterated prisoner's
//! dilemma.
//!
//! Two players each hold a reactive strategy: `x_C` (resp. `y_C`) is the
//! probability of cooperating after the opponent cooperated, `x_D` (`y_D`)
//! after the opponent defected. Both climb the gradient of their own
//! long-run payoff, scaled by the replicator factor `x(1-x)`. The crate
//! computes stationary states and payoffs, integrates the dynamics,
//! classifies where trajectories end, analyses the two-dimensional manifold
//! of interior fixed points and sweeps all of this over grids.
//!
//! ```
//! use ipd_learning::{equilibrium, JointStrategy, PayoffMatrix};
//!
//! let pay = PayoffMatrix::new(5.0, 3.0, 1.0, 0.0)?;
//! let s = JointStrategy::new(0.9, 0.1, 0.9, 0.1)?;
//! let e = equilibrium(&pay, &s)?;
//! assert!((e.x_e - 0.5).abs() < 1e-12);
//! assert!((e.u_e - 2.25).abs() < 1e-12);
//! # Ok::<(), ipd_learning::Error>(())
//! ```

pub mod cli;
pub mod dual;
pub mod eigen;
pub mod error;
pub mod fixed_points;
pub mod game;
pub mod io;
pub mod learning;
pub mod sweep;

pub use error::{Error, Result};
pub use fixed_points::{classify_interior, manifold_point, most_exploitative, StabilityReport};
pub use game::{equilibrium, EquilibriumPoint, JointStrategy, PayoffMatrix};
pub use learning::{
    classify_trajectory, integrate, vector_field, CaseLabel, ClassifyThresholds, IntegratorConfig,
    LearningSpeeds, Terminal, TrajectoryRecord,
};
pub use sweep::{basin_map, grid4d, stability_region, GridAxis, StrategyComponent, SweepOptions};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/repeated-game.md")]
    mod repeated_game {}
    #[doc = include_str!("../../../book/src/learning.md")]
    mod learning {}
    #[doc = include_str!("../../../book/src/fixed-points.md")]
    mod fixed_points {}
    #[doc = include_str!("../../../book/src/sweeps.md")]
    mod sweeps {}
    #[doc = include_str!("../../../book/src/command-line.md")]
    mod command_line {}
}
