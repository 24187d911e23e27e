//! Evaluation protocol: discontinuity classification, discontinuity and
//! detection rates, benchmarking, aggregation and report files.

pub mod classify;
pub mod plot;
pub mod rate;
pub mod report;
pub mod trace;

pub use classify::{
    angular_speed, classify_discontinuities, discontinuity_rate, linear_discontinuity, pair_tests, test_pair,
    PairTest, Thresholds,
};
pub use rate::{detection_rate, run_benchmark, BenchmarkMode, BenchmarkReport, LatencyStats};
pub use report::{emit_report, evaluate, mean_std, read_csv, summarize, Aggregate, CaseRow, EvaluationReport, FlagRow, RateRow};
pub use trace::{PoseTrace, TraceRecord};
