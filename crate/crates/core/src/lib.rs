//! Graph-stream summarization and change detection with MDL code-lengths.
//!
//! Each snapshot is compressed into a block-structured summary graph whose
//! size is chosen by minimum description length. Consecutive summaries are
//! compared through the MDL change statistic, and an alarm is raised when it
//! exceeds a threshold that bounds the false-alarm probability. A balancing
//! parameter `lambda` trades summary compactness against the threshold.

pub mod codelen;
pub mod detect;
pub mod error;
pub mod graph;
pub mod infer;
pub mod metrics;
pub mod stream;
pub mod summary;
pub mod synth;

pub use codelen::{BetaLuckiness, Bits};
pub use detect::{
    change_statistic, concat_codelen, mdl_change_test, reports_to_csv, threshold, ChangeReport,
    ChangeStatistic, REPORT_CSV_HEADER,
};
pub use error::{BscError, Result};
pub use graph::{load_stream, write_stream, BlockAssignment, GraphSnapshot, SuperedgeMatrix};
pub use infer::{infer_blocks, InferenceOptions};
pub use stream::{run, BscConfig, BscDetector};
pub use summary::{build_summary, summary_codelen, CodeLenBreakdown, SummaryGraph};
pub use synth::{generate_stream, GroundTruth, SynthConfig};
