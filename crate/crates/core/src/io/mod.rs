//! Problem files in, frames / images / history tables out.

pub mod frames;
pub mod heatmap;
pub mod history;
pub mod problem;

pub use frames::{read_frames, write_frames, FrameArchive};
pub use heatmap::write_heatmaps;
pub use history::{read_history, write_history, write_relative_history};
pub use problem::{load_problem, parse_problem, OutputKind, ProblemFile};
