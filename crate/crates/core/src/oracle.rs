//! Exhaustive ground truth and recall.
//!
//! Distances here are computed straight from each metric's definition
//! (angles via dot products, Hamming as a mismatch count) and never go
//! through weights, transforms or the BVH.

use std::collections::HashSet;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{l2_distance, Point3};
use crate::metrics::MetricSpec;
use crate::reduction::{Neighbor, QueryResult};

/// Exact distance between two lifted points under `metric`.
pub fn exact_distance(metric: MetricSpec, a: &Point3, b: &Point3) -> Result<f64> {
    let d = match metric {
        MetricSpec::Lp(2.0) => l2_distance(a, b),
        MetricSpec::Lp(p) => {
            let s: f64 = a
                .coords()
                .iter()
                .zip(b.coords())
                .map(|(x, y)| (x - y).abs().powf(p))
                .sum();
            s.powf(1.0 / p)
        }
        MetricSpec::LInf => a
            .coords()
            .iter()
            .zip(b.coords())
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max),
        MetricSpec::Cosine => 1.0 - unit_dot(a, b)?,
        MetricSpec::Angular => unit_dot(a, b)?.acos(),
        MetricSpec::Euclid2D => (a.x - b.x).hypot(a.y - b.y),
        MetricSpec::Hamming3 => a
            .coords()
            .iter()
            .zip(b.coords())
            .filter(|(x, y)| *x != y)
            .count() as f64,
    };
    Ok(d)
}

fn unit_dot(a: &Point3, b: &Point3) -> Result<f64> {
    let (na, nb) = (a.norm(), b.norm());
    if na == 0.0 {
        return Err(Error::ZeroVector {
            set: "point",
            index: 0,
        });
    }
    if nb == 0.0 {
        return Err(Error::ZeroVector {
            set: "point",
            index: 1,
        });
    }
    let ua = Point3::new(a.x / na, a.y / na, a.z / na);
    let ub = Point3::new(b.x / nb, b.y / nb, b.z / nb);
    Ok(ua.dot(&ub).clamp(-1.0, 1.0))
}

/// Exact k nearest neighbors of `q` by linear scan, ascending by
/// `(distance, id)`, optionally restricted to `distance <= bound`.
pub fn brute_force_knn(
    points: &[Point3],
    q: &Point3,
    metric: MetricSpec,
    k: usize,
    bound: Option<f64>,
) -> Result<Vec<Neighbor>> {
    if k == 0 {
        return Err(Error::InvalidK);
    }
    metric.validate()?;
    let mut all = Vec::with_capacity(points.len());
    for (id, p) in points.iter().enumerate() {
        let distance = exact_distance(metric, p, q).map_err(|e| match e {
            Error::ZeroVector { index: 0, .. } => Error::ZeroVector {
                set: "data",
                index: id,
            },
            Error::ZeroVector { .. } => Error::ZeroVector {
                set: "query",
                index: 0,
            },
            other => other,
        })?;
        if bound.is_none_or(|b| distance <= b) {
            all.push(Neighbor { id, distance });
        }
    }
    let by_key =
        |a: &Neighbor, b: &Neighbor| a.distance.total_cmp(&b.distance).then(a.id.cmp(&b.id));
    if all.len() > k {
        all.select_nth_unstable_by(k - 1, by_key);
        all.truncate(k);
    }
    all.sort_by(by_key);
    Ok(all)
}

/// Per-query exact neighbor lists.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub metric: MetricSpec,
    pub k: usize,
    pub radius: Option<f64>,
    pub rows: Vec<Vec<Neighbor>>,
}

impl GroundTruth {
    pub fn compute(
        points: &[Point3],
        queries: &[Point3],
        metric: MetricSpec,
        k: usize,
        radius: Option<f64>,
    ) -> Result<Self> {
        let rows = queries
            .par_iter()
            .enumerate()
            .map(|(i, q)| {
                brute_force_knn(points, q, metric, k, radius).map_err(|e| match e {
                    Error::ZeroVector { set: "query", .. } => Error::ZeroVector {
                        set: "query",
                        index: i,
                    },
                    other => other,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(GroundTruth {
            metric,
            k,
            radius,
            rows,
        })
    }

    /// The same truth cut down to the first `k` neighbors per query.
    pub fn truncated(&self, k: usize) -> GroundTruth {
        GroundTruth {
            metric: self.metric,
            k: k.min(self.k),
            radius: self.radius,
            rows: self
                .rows
                .iter()
                .map(|r| r.iter().take(k).copied().collect())
                .collect(),
        }
    }

    pub fn ids(&self, query: usize) -> Vec<usize> {
        self.rows[query].iter().map(|n| n.id).collect()
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        serde_json::to_writer(&mut w, self)?;
        w.flush()?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Ok(serde_json::from_reader(BufReader::new(File::open(path)?))?)
    }
}

/// Fraction of `truth` ids present in `result_ids`.
pub fn recall(result_ids: &[usize], truth: &[Neighbor]) -> Result<f64> {
    if truth.is_empty() {
        return Err(Error::EmptyTruth);
    }
    let found: HashSet<usize> = result_ids.iter().copied().collect();
    let hits = truth.iter().filter(|n| found.contains(&n.id)).count();
    Ok(hits as f64 / truth.len() as f64)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecallSummary {
    /// Mean of per-query recall over queries with non-empty truth.
    pub mean: f64,
    /// `None` where the truth row was empty.
    pub per_query: Vec<Option<f64>>,
    pub evaluated: usize,
    pub excluded_empty: usize,
}

pub fn aggregate_recall(results: &[QueryResult], truth: &GroundTruth) -> Result<RecallSummary> {
    if results.is_empty() {
        return Err(Error::Empty("no query results to aggregate"));
    }
    if results.len() != truth.rows.len() {
        return Err(Error::Invariant(format!(
            "{} results but {} ground-truth rows",
            results.len(),
            truth.rows.len()
        )));
    }
    let per_query: Vec<Option<f64>> = results
        .iter()
        .zip(&truth.rows)
        .map(|(r, t)| {
            if t.is_empty() {
                None
            } else {
                recall(&r.ids(), t).ok()
            }
        })
        .collect();
    mean_recall(per_query)
}

/// Mean over the `Some` entries of `per_query`.
pub fn mean_recall(per_query: Vec<Option<f64>>) -> Result<RecallSummary> {
    if per_query.is_empty() {
        return Err(Error::Empty("no recall values to aggregate"));
    }
    let values: Vec<f64> = per_query.iter().flatten().copied().collect();
    let evaluated = values.len();
    let mean = if evaluated == 0 {
        0.0
    } else {
        values.iter().sum::<f64>() / evaluated as f64
    };
    Ok(RecallSummary {
        mean,
        excluded_empty: per_query.len() - evaluated,
        per_query,
        evaluated,
    })
}
