//! Multi-run campaigns over instances and ES variants, with success rates,
//! evaluation statistics, diversity traces and equivalence summaries.

mod campaign;
mod output;
pub mod stats;

pub use campaign::{
    derive_seed, run_campaign, Campaign, CampaignInstance, CellKey, CellResult, RunRecord,
    BatchResult, Metadata,
};
pub use output::{matrix_file_name, summary_json, trace_csv, write_outputs, Summary};
pub use stats::{mann_whitney_u, MannWhitney, PMethod};

pub use crate::es::diversity_snapshot;
