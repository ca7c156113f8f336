//! Diversity metrics, oracle judges for synthetic corpora and evaluation
//! reports.

mod distinct;
mod oracle;
mod report;

pub use distinct::{distinct_n, distinct_n_with, DistinctDenominator};
pub use oracle::{response_quality, Oracle, SentimentJudgement};
pub use report::{audit_tsv, evaluate, EvalOptions, EvalReport, Evaluation, OracleScores, ScoredResponse};
