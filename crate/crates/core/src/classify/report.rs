use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::classify::ClassificationResult;
use crate::error::{Error, Result};
use crate::models::{UavClass, NUM_CLASSES};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: usize,
    /// True when the class was never predicted (precision set to 0).
    pub precision_undefined: bool,
    /// True when the class has no support (recall set to 0).
    pub recall_undefined: bool,
}

/// One-vs-rest metrics. `confusion[true][predicted]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub confusion: [[usize; NUM_CLASSES]; NUM_CLASSES],
    pub per_class: [ClassMetrics; NUM_CLASSES],
    pub accuracy: f64,
    pub total: usize,
}

fn ratio(num: usize, den: usize) -> (f64, bool) {
    if den == 0 {
        (0.0, true)
    } else {
        (num as f64 / den as f64, false)
    }
}

impl Report {
    pub fn from_confusion(confusion: [[usize; NUM_CLASSES]; NUM_CLASSES]) -> Result<Self> {
        let total: usize = confusion.iter().flatten().sum();
        if total == 0 {
            return Err(Error::Empty("classification results"));
        }
        let per_class = std::array::from_fn(|c| {
            let tp = confusion[c][c];
            let support: usize = confusion[c].iter().sum();
            let predicted: usize = (0..NUM_CLASSES).map(|r| confusion[r][c]).sum();
            let (precision, precision_undefined) = ratio(tp, predicted);
            let (recall, recall_undefined) = ratio(tp, support);
            let f1 = if precision + recall > 0.0 {
                2.0 * precision * recall / (precision + recall)
            } else {
                0.0
            };
            ClassMetrics {
                precision,
                recall,
                f1,
                support,
                precision_undefined,
                recall_undefined,
            }
        });
        let correct: usize = (0..NUM_CLASSES).map(|c| confusion[c][c]).sum();
        Ok(Self {
            confusion,
            per_class,
            accuracy: correct as f64 / total as f64,
            total,
        })
    }

    /// Every result must carry a true label.
    pub fn from_results(results: &[ClassificationResult]) -> Result<Self> {
        let mut confusion = [[0; NUM_CLASSES]; NUM_CLASSES];
        for r in results {
            let label = r
                .true_label
                .ok_or_else(|| Error::invalid("cannot score a result without a true label"))?;
            confusion[label.id()][r.predicted.id()] += 1;
        }
        Self::from_confusion(confusion)
    }

    pub fn metrics(&self, class: UavClass) -> &ClassMetrics {
        &self.per_class[class.id()]
    }

    /// Off-diagonal confusion entries as `(true, predicted, count)`.
    pub fn misclassifications(&self) -> Vec<(UavClass, UavClass, usize)> {
        let mut out = Vec::new();
        for t in UavClass::ALL {
            for p in UavClass::ALL {
                let n = self.confusion[t.id()][p.id()];
                if t != p && n > 0 {
                    out.push((t, p, n));
                }
            }
        }
        out
    }

    pub fn macro_f1(&self) -> f64 {
        self.per_class.iter().map(|m| m.f1).sum::<f64>() / NUM_CLASSES as f64
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("{:<12}{:>10}{:>10}{:>10}{:>10}\n", "", "precision", "recall", "f1-score", "support");
        for c in UavClass::ALL {
            let m = self.metrics(c);
            let flag = if m.precision_undefined || m.recall_undefined { " *" } else { "" };
            let _ = writeln!(
                s,
                "{:<12}{:>10.4}{:>10.4}{:>10.4}{:>10}{flag}",
                c.name(),
                m.precision,
                m.recall,
                m.f1,
                m.support
            );
        }
        let _ = writeln!(s, "\n{:<12}{:>30.4}{:>10}", "accuracy", self.accuracy, self.total);
        if self.per_class.iter().any(|m| m.precision_undefined || m.recall_undefined) {
            s.push_str("* zero division, metric reported as 0\n");
        }
        s.push_str("\nconfusion (rows true, columns predicted)\n");
        s.push_str(&self.confusion_csv());
        s
    }

    /// Per-class metrics plus an accuracy row.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("class,precision,recall,f1,support,zero_division\n");
        for c in UavClass::ALL {
            let m = self.metrics(c);
            let _ = writeln!(
                s,
                "{},{:.6},{:.6},{:.6},{},{}",
                c.name(),
                m.precision,
                m.recall,
                m.f1,
                m.support,
                m.precision_undefined || m.recall_undefined
            );
        }
        let _ = writeln!(s, "accuracy,,,{:.6},{},false", self.accuracy, self.total);
        s
    }

    pub fn confusion_csv(&self) -> String {
        let mut s = String::from("true\\predicted");
        for c in UavClass::ALL {
            let _ = write!(s, ",{}", c.name());
        }
        s.push('\n');
        for t in UavClass::ALL {
            s.push_str(t.name());
            for n in self.confusion[t.id()] {
                let _ = write!(s, ",{n}");
            }
            s.push('\n');
        }
        s
    }
}
