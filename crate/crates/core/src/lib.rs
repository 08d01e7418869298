//! System-level simulator of beam-based handover procedures: baseline and
//! conditional handover, and L1/L2-triggered mobility with optional L2
//! filtering and dynamic switching, over a wrap-around 7-site deployment.
//!
//! The pipeline of one drop is [`engine::run_drop`]; campaigns of seeded
//! drops are run with [`engine::run_campaign`] or [`engine::run_all`], and
//! [`output::run_compare`] writes the CSV/JSONL artifacts.

pub mod channel;
pub mod config;
pub mod engine;
pub mod error;
pub mod kpi;
pub mod measure;
pub mod mobility;
pub mod output;
pub mod rlm;
pub mod rng;
pub mod scenario;

pub use engine::{run_all, run_campaign, run_drop, CampaignResult, DropResult, SimConfig};
pub use error::{ConfigError, SimError};
pub use mobility::ProcedureKind;
