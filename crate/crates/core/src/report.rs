//! Summaries of rank vectors: the complementary CDF and top-k lists.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One point of a complementary CDF: the fraction of entries `>= value`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CdfPoint {
    pub value: f64,
    pub fraction: f64,
}

/// Complementary CDF at `points` log-spaced thresholds between the smallest
/// positive entry and the largest entry.
pub fn rank_cdf(values: &[f64], points: usize) -> Result<Vec<CdfPoint>> {
    if values.is_empty() {
        return Err(Error::EmptyInput);
    }
    if points < 2 {
        return Err(Error::InvalidConfig(
            "a CDF needs at least two points".into(),
        ));
    }
    if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
        return Err(Error::NonFinite("rank entry"));
    }
    let mut sorted: Vec<f64> = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let hi = *sorted.last().unwrap();
    let lo = sorted.iter().copied().find(|&v| v > 0.0).unwrap_or(hi);
    let n = sorted.len() as f64;
    let (llo, lhi) = (lo.ln(), hi.ln());
    Ok((0..points)
        .map(|i| {
            let value = if i == 0 {
                lo
            } else if i + 1 == points {
                hi
            } else {
                (llo + (lhi - llo) * i as f64 / (points - 1) as f64)
                    .exp()
                    .clamp(lo, hi)
            };
            let below = sorted.partition_point(|&v| v < value);
            CdfPoint {
                value,
                fraction: (sorted.len() - below) as f64 / n,
            }
        })
        .collect())
}

/// Indices of the `k` largest entries, largest first; ties go to the lower index.
pub fn top_k(values: &[f64], k: usize) -> Result<Vec<usize>> {
    if k > values.len() {
        return Err(Error::TopKTooLarge { k, n: values.len() });
    }
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(a.cmp(&b)));
    idx.truncate(k);
    Ok(idx)
}

pub fn write_cdf_csv<W: Write>(mut out: W, header: &[String], cdf: &[CdfPoint]) -> Result<()> {
    for line in header {
        writeln!(out, "# {line}")?;
    }
    writeln!(out, "value,fraction_at_least")?;
    for p in cdf {
        writeln!(out, "{:e},{}", p.value, p.fraction)?;
    }
    Ok(())
}
