//! Library half of the `entangle-verdict` command: input parsing, the
//! analysis pipeline and report types.

pub mod error;
pub mod input;
pub mod report;

pub use error::{CliError, EXIT_INPUT, EXIT_INTERNAL, EXIT_OK};
pub use input::{InputDocument, Payload};
pub use report::{analyze, AnalyzeOptions, VerdictReport};
