//! Per-video derived models: summary, channel flow model, word statistics and
//! audio-feature histograms.

pub mod histogram;
pub mod sankey;
pub mod summary;
pub mod words;

pub use histogram::{feature_histogram, feature_histogram_opt, Histogram};
pub use sankey::{build_sankey, representative_face, FrameRef, SankeyLink, SankeyModel, SankeyNode, SankeyParams, Stage};
pub use summary::{build_summary, Barcode, BarcodeRun, ScoreWeighting, SummaryMetrics, VideoSummary};
pub use words::{word_importance, word_table, Lexicons, WeightedTerm, WordSortKey, WordStat};
