use serde::{Deserialize, Serialize};

use crate::{Error, Label, Result};

/// Binary confusion counts with `deformed` as the positive class.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub tn: u64,
}

impl ConfusionMatrix {
    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.fn_ + self.tn
    }

    pub fn record(&mut self, actual: Label, predicted: Label) {
        match (actual.is_positive(), predicted.is_positive()) {
            (true, true) => self.tp += 1,
            (false, true) => self.fp += 1,
            (true, false) => self.fn_ += 1,
            (false, false) => self.tn += 1,
        }
    }

    pub fn merge(self, o: ConfusionMatrix) -> ConfusionMatrix {
        ConfusionMatrix {
            tp: self.tp + o.tp,
            fp: self.fp + o.fp,
            fn_: self.fn_ + o.fn_,
            tn: self.tn + o.tn,
        }
    }
}

pub fn confusion(labels: &[Label], predictions: &[Label]) -> Result<ConfusionMatrix> {
    if labels.len() != predictions.len() {
        return Err(Error::Shape(format!("{} labels vs {} predictions", labels.len(), predictions.len())));
    }
    let mut cm = ConfusionMatrix::default();
    for (&a, &p) in labels.iter().zip(predictions) {
        cm.record(a, p);
    }
    Ok(cm)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub accuracy: f64,
    pub f1: f64,
    pub recall: f64,
    pub precision: f64,
    /// Metrics whose denominator was zero and were reported as 0.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub undefined: Vec<String>,
}

impl MetricsReport {
    /// In report row order.
    pub fn rows(&self) -> [(&'static str, f64); 4] {
        [
            ("accuracy", self.accuracy),
            ("f1", self.f1),
            ("recall", self.recall),
            ("precision", self.precision),
        ]
    }
}

/// Harmonic mean; 0 when both inputs are 0.
pub fn f1_score(precision: f64, recall: f64) -> f64 {
    if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    }
}

pub fn metrics(cm: &ConfusionMatrix) -> Result<MetricsReport> {
    let total = cm.total();
    if total == 0 {
        return Err(Error::Data("confusion matrix is empty".into()));
    }
    let mut undefined = Vec::new();
    let mut ratio = |name: &str, num: u64, den: u64| {
        if den == 0 {
            undefined.push(name.to_string());
            0.0
        } else {
            num as f64 / den as f64
        }
    };
    let accuracy = ratio("accuracy", cm.tp + cm.tn, total);
    let precision = ratio("precision", cm.tp, cm.tp + cm.fp);
    let recall = ratio("recall", cm.tp, cm.tp + cm.fn_);
    if precision + recall == 0.0 {
        undefined.push("f1".into());
    }
    Ok(MetricsReport {
        accuracy,
        f1: f1_score(precision, recall),
        recall,
        precision,
        undefined,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use Label::{Deformed as D, NonDeformed as N};

    #[test]
    fn worked_examples() {
        let cm = confusion(&[D, D, N, N], &[D, D, N, N]).unwrap();
        assert_eq!(cm, ConfusionMatrix { tp: 2, fp: 0, fn_: 0, tn: 2 });
        let cm = confusion(&[D, D, N, N], &[D; 4]).unwrap();
        assert_eq!((cm.tp, cm.fp), (2, 2));
        assert!(confusion(&[D], &[]).is_err());
    }

    #[test]
    fn thirty_one_case() {
        let m = metrics(&ConfusionMatrix { tp: 30, fp: 1, fn_: 0, tn: 29 }).unwrap();
        assert!((m.precision - 30.0 / 31.0).abs() < 1e-15);
        assert_eq!(m.recall, 1.0);
        let f1 = 2.0 * (30.0 / 31.0) / (30.0 / 31.0 + 1.0);
        assert!((m.f1 - f1).abs() < 1e-15);
        assert!((m.f1 - 0.9836).abs() < 1e-4);
        assert_eq!(m.accuracy, 59.0 / 60.0);
    }

    #[test]
    fn degenerate_denominators_are_flagged() {
        let m = metrics(&ConfusionMatrix { tp: 0, fp: 0, fn_: 0, tn: 5 }).unwrap();
        assert_eq!((m.accuracy, m.precision, m.recall, m.f1), (1.0, 0.0, 0.0, 0.0));
        assert_eq!(m.undefined, ["precision", "recall", "f1"]);
        assert!(metrics(&ConfusionMatrix::default()).is_err());
    }

    #[test]
    fn serde_uses_fn_key() {
        let s = serde_json::to_string(&ConfusionMatrix { tp: 1, fp: 2, fn_: 3, tn: 4 }).unwrap();
        assert_eq!(s, r#"{"tp":1,"fp":2,"fn":3,"tn":4}"#);
    }
}
