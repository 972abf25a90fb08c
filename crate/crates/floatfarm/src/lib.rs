//! Floating offshore wind farm control testbed.
//!
//! Floating turbines are moored, not fixed: steady thrust displaces a platform by
//! tens of meters, and the thrust vector tilts with nacelle yaw. This crate couples
//! that platform drift with a Lagrangian wake model, identifies per-turbine neural
//! surrogate models of the 60 s closed-loop drift dynamics, and runs a distributed
//! economic MPC in which agents coordinate through a randomized social hierarchy to
//! spread a row of turbines crosswind and recover wake losses.
//!
//! The quickest way in is the `examples/` directory, one runnable program per
//! capability:
//!
//! ```text
//! cargo run --release --example farm_layout          # row farms + rotor overlap
//! cargo run --release --example wind_series          # spline-interpolated gusts
//! cargo run --release --example catenary_mooring     # line tension and restoring force
//! cargo run --release --example platform_settling    # thrust vs mooring equilibrium
//! cargo run --release --example wake_field           # wake elements and velocity deficits
//! cargo run --release --example surrogate_training   # dataset + network training
//! cargo run --release --example dempc_coordination   # hierarchy rounds on toy agents
//! cargo run --release --example greedy_vs_dempc      # closed-loop energy comparison
//! ```
//!
//! The same machinery is scriptable through a thin CLI (`floatfarm train|run|sweep`)
//! for batch experiments; see the crate README.

pub mod dempc;
pub mod experiment;
pub mod farm;
pub mod platform;
pub mod spline;
pub mod surrogate;
pub mod vec2;
pub mod wake;
pub mod wind;

pub use vec2::Vec2;

/// Control, identification, and logging sampling period, s.
pub const SAMPLING_PERIOD: f64 = 60.0;
/// Inner simulation step used between sampling instants, s.
pub const SIM_DT: f64 = 1.0;

/// Errors shared across the simulation, identification, and control layers.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("input outside valid domain: {0}")]
    Domain(String),
    #[error("mooring line taut: span {span:.3} m at or beyond reachable maximum {max:.3} m")]
    LineTaut { span: f64, max: f64 },
    #[error("simulation diverged: non-finite state {0}")]
    Diverged(String),
    #[error("surrogate training failed: {0}")]
    Training(String),
    #[error("missing surrogate model: {0}")]
    MissingModel(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("serialization: {0}")]
    Serde(#[from] serde_json::Error),
}

impl Error {
    /// Tags an I/O error with the path it happened on.
    pub fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
