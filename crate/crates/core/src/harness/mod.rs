//! Scenario execution, logging, suites and the live service.

pub mod config;
pub mod discrimination;
pub mod runlog;
pub mod scenario;
pub mod service;
pub mod sim;
pub mod suite;

pub use config::{Gating, RunConfig, SEED_ENV};
pub use discrimination::{discriminate, DiscriminationOutcome, DiscriminationSetup};
pub use runlog::{RunLog, Verdict};
pub use scenario::{run_scenario, run_with_config, Expectation, ExpectedAction, ScenarioScript};
pub use service::{serve, Command, ServerMessage, ServiceHandle, ServiceOptions, Session, Snapshot};
pub use sim::{Simulation, TickRecord};
pub use suite::{run_suite, CellStatus, SuiteCell, SuiteReport};
