//! Session orchestration: configuration, the seven-stage pipeline,
//! transcripts and reports.

mod config;
mod report;
mod session;
mod transcript;

pub use config::*;
pub use report::*;
pub use session::*;
pub use transcript::*;
