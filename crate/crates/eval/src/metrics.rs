//! Ranking of scored warnings and effort-aware precision/recall at K%.

use serde::{Deserialize, Serialize};

use crate::EvalError;

/// Inspection budgets, in percent of the ranked list.
pub const K_VALUES: [u32; 5] = [5, 10, 20, 50, 60];

/// Number of warnings inspected at budget `k` percent of `n`: `⌈k·n/100⌉`.
pub fn prefix_len(k: u32, n: usize) -> usize {
    (k as usize * n).div_ceil(100)
}

/// Indices sorted by descending score, ties kept in input order.
pub fn rank(scores: &[f64], ids: &[usize]) -> Result<Vec<usize>, EvalError> {
    if scores.len() != ids.len() {
        return Err(EvalError::LengthMismatch { scores: scores.len(), ids: ids.len() });
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    Ok(order.into_iter().map(|i| ids[i]).collect())
}

fn hits(ranked: &[usize], tps: &[usize], k: u32) -> usize {
    let n = prefix_len(k, ranked.len());
    ranked[..n].iter().filter(|id| tps.contains(id)).count()
}

/// Fraction of the inspected prefix that is TP; 0 when the prefix is empty.
pub fn precision_at_k(ranked: &[usize], tps: &[usize], k: u32) -> f64 {
    let n = prefix_len(k, ranked.len());
    if n == 0 {
        return 0.0;
    }
    hits(ranked, tps, k) as f64 / n as f64
}

/// Fraction of all TPs found in the prefix; undefined without TPs.
pub fn recall_at_k(ranked: &[usize], tps: &[usize], k: u32) -> Option<f64> {
    let total = ranked.iter().filter(|id| tps.contains(id)).count();
    (total > 0).then(|| hits(ranked, tps, k) as f64 / total as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AtK {
    pub k: u32,
    pub inspected: usize,
    pub hits: usize,
    pub precision: f64,
    pub recall: Option<f64>,
}

/// Metrics of one ranked list, or the fold average of several.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub warnings: usize,
    pub true_positives: usize,
    pub at: Vec<AtK>,
}

impl MetricReport {
    pub fn compute(ranked: &[usize], tps: &[usize]) -> Self {
        let true_positives = ranked.iter().filter(|id| tps.contains(id)).count();
        let at = K_VALUES
            .iter()
            .map(|&k| AtK {
                k,
                inspected: prefix_len(k, ranked.len()),
                hits: hits(ranked, tps, k),
                precision: precision_at_k(ranked, tps, k),
                recall: recall_at_k(ranked, tps, k),
            })
            .collect();
        MetricReport { warnings: ranked.len(), true_positives, at }
    }

    /// Same as [`compute`](Self::compute) from raw scores and labels.
    pub fn from_scores(scores: &[f64], is_tp: &[bool]) -> Result<Self, EvalError> {
        let ids: Vec<usize> = (0..scores.len()).collect();
        let ranked = rank(scores, &ids)?;
        if is_tp.len() != scores.len() {
            return Err(EvalError::LengthMismatch { scores: scores.len(), ids: is_tp.len() });
        }
        let tps: Vec<usize> = ids.iter().copied().filter(|&i| is_tp[i]).collect();
        Ok(Self::compute(&ranked, &tps))
    }

    pub fn at(&self, k: u32) -> Option<&AtK> {
        self.at.iter().find(|a| a.k == k)
    }

    pub fn recall(&self, k: u32) -> Option<f64> {
        self.at(k).and_then(|a| a.recall)
    }

    pub fn precision(&self, k: u32) -> Option<f64> {
        self.at(k).map(|a| a.precision)
    }

    /// Unweighted mean over reports. Recall averages only the reports where
    /// it is defined; counts are summed.
    pub fn mean(reports: &[MetricReport]) -> Option<Self> {
        let first = reports.first()?;
        let at = first
            .at
            .iter()
            .map(|a| {
                let rows: Vec<&AtK> = reports.iter().filter_map(|r| r.at(a.k)).collect();
                let recalls: Vec<f64> = rows.iter().filter_map(|r| r.recall).collect();
                AtK {
                    k: a.k,
                    inspected: rows.iter().map(|r| r.inspected).sum(),
                    hits: rows.iter().map(|r| r.hits).sum(),
                    precision: rows.iter().map(|r| r.precision).sum::<f64>() / rows.len() as f64,
                    recall: (!recalls.is_empty()).then(|| recalls.iter().sum::<f64>() / recalls.len() as f64),
                }
            })
            .collect();
        Some(MetricReport {
            warnings: reports.iter().map(|r| r.warnings).sum(),
            true_positives: reports.iter().map(|r| r.true_positives).sum(),
            at,
        })
    }

    pub fn csv_header() -> String {
        let mut cols = vec!["warnings".to_string(), "tps".to_string()];
        for k in K_VALUES {
            cols.push(format!("p@{k}"));
            cols.push(format!("r@{k}"));
        }
        cols.join(",")
    }

    pub fn csv_fields(&self) -> String {
        let mut cols = vec![self.warnings.to_string(), self.true_positives.to_string()];
        for a in &self.at {
            cols.push(format!("{:.4}", a.precision));
            cols.push(a.recall.map_or(String::new(), |r| format!("{r:.4}")));
        }
        cols.join(",")
    }

    /// Two-row P/R table in the style of a results table.
    pub fn table(&self) -> String {
        let mut out = String::from("metric");
        for a in &self.at {
            out.push_str(&format!("  {:>6}", format!("{}%", a.k)));
        }
        out.push_str("\nP     ");
        for a in &self.at {
            out.push_str(&format!("  {:>6.3}", a.precision));
        }
        out.push_str("\nR     ");
        for a in &self.at {
            match a.recall {
                Some(r) => out.push_str(&format!("  {r:>6.3}")),
                None => out.push_str(&format!("  {:>6}", "n/a")),
            }
        }
        out.push('\n');
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prefix_rounds_up() {
        assert_eq!(prefix_len(5, 10), 1);
        assert_eq!(prefix_len(50, 10), 5);
        assert_eq!(prefix_len(5, 100), 5);
        assert_eq!(prefix_len(60, 7), 5);
        assert_eq!(prefix_len(5, 0), 0);
    }

    #[test]
    fn spec_fixture() {
        // Ten warnings, TPs ranked first, fifth and eighth.
        let ranked: Vec<usize> = (0..10).collect();
        let tps = [0, 4, 7];
        assert_eq!(precision_at_k(&ranked, &tps, 5), 1.0);
        assert_eq!(recall_at_k(&ranked, &tps, 5), Some(1.0 / 3.0));
        assert_eq!(precision_at_k(&ranked, &tps, 50), 0.4);
        assert_eq!(recall_at_k(&ranked, &tps, 50), Some(2.0 / 3.0));
        assert_eq!(recall_at_k(&ranked, &tps, 60), Some(2.0 / 3.0));
    }

    #[test]
    fn recall_without_tps_is_undefined() {
        let ranked = [1, 2, 3];
        assert_eq!(recall_at_k(&ranked, &[], 50), None);
        assert_eq!(precision_at_k(&ranked, &[], 50), 0.0);
        let r = MetricReport::compute(&ranked, &[]);
        assert!(r.table().contains("n/a"));
    }

    #[test]
    fn rank_is_stable_descending() {
        assert_eq!(rank(&[0.1, 0.9, 0.5, 0.9], &[10, 11, 12, 13]).unwrap(), [11, 13, 12, 10]);
        assert_eq!(rank(&[0.3; 4], &[3, 1, 2, 0]).unwrap(), [3, 1, 2, 0]);
        assert_eq!(rank(&[1.0], &[1, 2]), Err(EvalError::LengthMismatch { scores: 1, ids: 2 }));
    }

    #[test]
    fn mean_skips_undefined_recall() {
        let a = MetricReport::compute(&[0, 1], &[0]);
        let b = MetricReport::compute(&[2, 3], &[]);
        let m = MetricReport::mean(&[a, b]).unwrap();
        assert_eq!(m.recall(50), Some(1.0));
        assert_eq!(m.precision(50), Some(0.5));
        assert_eq!(m.warnings, 4);
        assert!(MetricReport::mean(&[]).is_none());
    }

    #[test]
    fn csv_shape() {
        let r = MetricReport::compute(&[0, 1, 2], &[1]);
        assert_eq!(MetricReport::csv_header().split(',').count(), r.csv_fields().split(',').count());
    }
}
