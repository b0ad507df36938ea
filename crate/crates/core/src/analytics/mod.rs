//! Metrics, confusion matrices, PCA and the logistic baseline classifier.

mod baseline;
mod features;
mod metrics;
mod pca;
mod report;

pub use baseline::{evaluate, evaluate_manifest, train, train_baseline, BaselineConfig, CurvePoint, LinearModel, Trained};
pub use features::{features, manifest_features, FEATURE_DIM, FEATURE_SIDE, FEATURE_SPEC};
pub use metrics::{confusion, f1_score, metrics, ConfusionMatrix, MetricsReport};
pub use pca::{covariance, pca_fit, pca_scatter, rows_to_matrix, total_variance, Pca, Scatter};
pub use report::{
    confusion_csv, curve_csv, metrics_csv, read_confusion, read_metrics, write_curve, write_evaluation, ReportTable, CONFUSION_FILE,
    CURVE_FILE, METRICS_FILE,
};
