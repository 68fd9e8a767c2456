//! Datasets, metrics and report rendering.

pub mod dataset;
pub mod metrics;
pub mod report;

pub use dataset::{discover_privaci_exports, import_privaci, load_dataset, Dataset, DatasetError};
pub use metrics::{
    article_breakdown, cohen_kappa, default_gdpr_groups, fleiss_kappa, score, ArticleBreakdown, ArticleGroup,
    Confusion, KappaError, MetricsReport, Prediction, ScoreError,
};
