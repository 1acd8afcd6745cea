//! Datasets, accuracy metrics and the timing harness.

mod bench;
mod dataset;
mod metrics;
mod plots;

pub use bench::{
    bench, median, write_table, BenchOptions, Method, MethodResult, Query, TimingReport, LOAD_REPEATS,
    TABLE_HEADER,
};
pub use dataset::{build_dataset, Dataset, DatasetSpec, Split, DESK_SHRINK};
pub use metrics::{metrics, pearson, MetricReport};
pub use plots::{emit_plots, error_histogram, ERROR_BIN_TOP, ERROR_BIN_WIDTH};
