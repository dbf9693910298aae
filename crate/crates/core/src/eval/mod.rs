//! Metrics, efficiency accounting, correlation diagnostics and the
//! lookback sweep.

mod correlation;
mod metrics;
mod profile;
mod sweep;

pub use correlation::{
    pearson, rolling_correlation, rolling_records, segment_correlation, segment_records,
    write_correlation_csv, CorrelationMatrix, CorrelationRecord, Pearson,
};
pub use metrics::{evaluate, evaluate_inputs, evaluate_with, MetricReport};
pub use profile::{count_macs, count_params, instrumented_macs, time_inference, ProfileReport, TimingStats};
pub use sweep::{lookback_sweep, SweepRow};
