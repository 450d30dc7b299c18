//! Experiment drivers: timed build/search runs scored against the exact
//! oracle, and parameter sweeps over radius, k or query count.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::geometry::Point3;
use crate::metrics::MetricSpec;
use crate::oracle::{mean_recall, recall, GroundTruth};
use crate::reduction::{Neighbor, QueryResult, ReductionConfig, SearchIndex};

pub const REPORT_SCHEMA: &str = "rtknn.run-report/v1";
pub const RECALL_MODE: &str = "per-query-mean";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub metric: MetricSpec,
    pub radius: f64,
    pub k: usize,
    pub enhanced: bool,
    pub leaf_size: usize,
    pub n: usize,
    pub queries: usize,
    pub repeats: usize,
    pub seed: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QueryRecord {
    pub query: usize,
    /// `None` when the exact top-k is empty.
    pub recall: Option<f64>,
    pub candidate_count: usize,
    pub hit_count: usize,
    pub node_visits: usize,
    pub neighbors: Vec<Neighbor>,
}

/// Wall-clock samples, one per repeat. The only nondeterministic part of a report.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub build_ms: Vec<f64>,
    pub search_ms: Vec<f64>,
    pub mean_build_ms: f64,
    pub mean_search_ms: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub schema: String,
    pub config: ConfigEcho,
    pub recall_mode: String,
    pub mean_recall: f64,
    pub evaluated_queries: usize,
    pub excluded_queries: usize,
    pub mean_candidate_count: f64,
    pub mean_hit_count: f64,
    pub node_visits_total: u64,
    pub results: Vec<QueryRecord>,
    pub timings: Timings,
}

impl RunReport {
    pub fn per_query_recall(&self) -> Vec<Option<f64>> {
        self.results.iter().map(|r| r.recall).collect()
    }
}

fn lift_all(points: &[crate::reduction::InputPoint]) -> Vec<Point3> {
    points.iter().map(|p| p.lift()).collect()
}

/// Unbounded exact top-`k` for every query of `dataset`.
pub fn exact_truth(dataset: &Dataset, metric: MetricSpec, k: usize) -> Result<GroundTruth> {
    GroundTruth::compute(
        &lift_all(&dataset.data),
        &lift_all(&dataset.queries),
        metric,
        k,
        None,
    )
}

fn mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        0.0
    } else {
        values.iter().sum::<f64>() / values.len() as f64
    }
}

/// Builds the index `repeats` times, runs every query each time and scores
/// the results against `truth` (computed here when not supplied).
pub fn run_experiment(
    dataset: &Dataset,
    config: &ReductionConfig,
    repeats: usize,
    truth: Option<&GroundTruth>,
) -> Result<RunReport> {
    config.validate()?;
    if repeats == 0 {
        return Err(Error::Empty("repeats must be at least 1"));
    }
    if dataset.data.is_empty() {
        return Err(Error::Empty("dataset has no data points"));
    }
    if dataset.queries.is_empty() {
        return Err(Error::Empty("dataset has no queries"));
    }

    let owned;
    let truth = match truth {
        Some(t) => t,
        None => {
            owned = exact_truth(dataset, config.metric, config.k)?;
            &owned
        }
    };
    if truth.metric != config.metric
        || truth.k < config.k
        || truth.rows.len() < dataset.queries.len()
    {
        return Err(Error::Invariant(format!(
            "ground truth ({} k={} rows={}) does not cover run ({} k={} queries={})",
            truth.metric,
            truth.k,
            truth.rows.len(),
            config.metric,
            config.k,
            dataset.queries.len()
        )));
    }

    let mut timings = Timings::default();
    let mut first: Option<Vec<QueryResult>> = None;
    for _ in 0..repeats {
        let start = Instant::now();
        let index = SearchIndex::build(&dataset.data, config)?;
        timings.build_ms.push(start.elapsed().as_secs_f64() * 1e3);

        let start = Instant::now();
        let results = index.query_batch(&dataset.queries)?;
        timings.search_ms.push(start.elapsed().as_secs_f64() * 1e3);

        match &first {
            None => first = Some(results),
            Some(prev) if *prev != results => {
                return Err(Error::Invariant(
                    "query results differ between repeats".into(),
                ));
            }
            Some(_) => {}
        }
    }
    timings.mean_build_ms = mean(&timings.build_ms);
    timings.mean_search_ms = mean(&timings.search_ms);
    let results = first.expect("at least one repeat");

    let mut records = Vec::with_capacity(results.len());
    for (i, r) in results.into_iter().enumerate() {
        let row: Vec<Neighbor> = truth.rows[i].iter().take(config.k).copied().collect();
        check_result(&r, config, i)?;
        records.push(QueryRecord {
            query: i,
            recall: if row.is_empty() {
                None
            } else {
                Some(recall(&r.ids(), &row)?)
            },
            candidate_count: r.candidate_count,
            hit_count: r.hit_count,
            node_visits: r.node_visits,
            neighbors: r.neighbors,
        });
    }
    let summary = mean_recall(records.iter().map(|r| r.recall).collect())?;
    let q = records.len() as f64;

    Ok(RunReport {
        schema: REPORT_SCHEMA.to_string(),
        config: ConfigEcho {
            metric: config.metric,
            radius: config.radius,
            k: config.k,
            enhanced: config.enhanced,
            leaf_size: config.leaf_size,
            n: dataset.data.len(),
            queries: dataset.queries.len(),
            repeats,
            seed: None,
        },
        recall_mode: RECALL_MODE.to_string(),
        mean_recall: summary.mean,
        evaluated_queries: summary.evaluated,
        excluded_queries: summary.excluded_empty,
        mean_candidate_count: records
            .iter()
            .map(|r| r.candidate_count as f64)
            .sum::<f64>()
            / q,
        mean_hit_count: records.iter().map(|r| r.hit_count as f64).sum::<f64>() / q,
        node_visits_total: records.iter().map(|r| r.node_visits as u64).sum(),
        results: records,
        timings,
    })
}

/// Result-contract checks; a failure here is a bug, not bad input.
fn check_result(r: &QueryResult, config: &ReductionConfig, query: usize) -> Result<()> {
    let fail = |what: &str| Err(Error::Invariant(format!("query {query}: {what}")));
    if r.neighbors.len() > config.k {
        return fail("more than k neighbors");
    }
    if !(r.hit_count >= r.candidate_count && r.candidate_count >= r.neighbors.len()) {
        return fail("filter stages widened the candidate set");
    }
    let sorted = r
        .neighbors
        .windows(2)
        .all(|w| (w[0].distance, w[0].id) <= (w[1].distance, w[1].id));
    if !sorted {
        return fail("neighbors not sorted by (distance, id)");
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepAxis {
    Radius,
    K,
    Queries,
}

impl std::str::FromStr for SweepAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "radius" => Ok(SweepAxis::Radius),
            "k" => Ok(SweepAxis::K),
            "queries" => Ok(SweepAxis::Queries),
            other => Err(Error::Parse {
                record: 0,
                message: format!("unknown sweep axis {other:?} (expected radius, k or queries)"),
            }),
        }
    }
}

fn as_count(v: f64) -> Result<usize> {
    if v.is_finite() && v >= 1.0 && v.fract() == 0.0 {
        Ok(v as usize)
    } else {
        Err(Error::Parse {
            record: 0,
            message: format!("sweep value {v} is not a positive integer"),
        })
    }
}

/// One report per value of `axis`, same dataset slice throughout. The exact
/// oracle is computed once and shared by every run.
pub fn sweep(
    dataset: &Dataset,
    template: &ReductionConfig,
    axis: SweepAxis,
    values: &[f64],
    repeats: usize,
) -> Result<Vec<RunReport>> {
    if values.is_empty() {
        return Err(Error::Empty("sweep needs at least one value"));
    }
    if values.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::NonIncreasingSweep);
    }
    template.validate()?;

    let max_k = match axis {
        SweepAxis::K => as_count(*values.last().expect("non-empty"))?,
        _ => template.k,
    };
    if axis == SweepAxis::Queries {
        let most = as_count(*values.last().expect("non-empty"))?;
        if most > dataset.queries.len() {
            return Err(Error::InsufficientRecords {
                needed: most,
                available: dataset.queries.len(),
            });
        }
    }
    let truth = exact_truth(dataset, template.metric, max_k)?;

    values
        .iter()
        .map(|&v| match axis {
            SweepAxis::Radius => {
                let config = ReductionConfig {
                    radius: v,
                    ..*template
                };
                run_experiment(dataset, &config, repeats, Some(&truth))
            }
            SweepAxis::K => {
                let config = ReductionConfig {
                    k: as_count(v)?,
                    ..*template
                };
                run_experiment(dataset, &config, repeats, Some(&truth))
            }
            SweepAxis::Queries => {
                let q = as_count(v)?;
                let slice = Dataset {
                    data: dataset.data.clone(),
                    queries: dataset.queries[..q].to_vec(),
                };
                let sliced_truth = GroundTruth {
                    rows: truth.rows[..q].to_vec(),
                    ..truth.clone()
                };
                run_experiment(&slice, template, repeats, Some(&sliced_truth))
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::DatasetFormat;

    fn three_point() -> Dataset {
        Dataset::from_xyz(
            vec![
                Point3::new(0.0, 0.0, 0.0),
                Point3::new(1.0, 0.0, 0.0),
                Point3::new(3.0, 0.0, 0.0),
            ],
            vec![Point3::new(0.4, 0.0, 0.0)],
        )
    }

    #[test]
    fn three_point_scene_has_full_recall() {
        let config = ReductionConfig::new(MetricSpec::Lp(1.0), 1.0, 2);
        let report = run_experiment(&three_point(), &config, 1, None).unwrap();
        assert_eq!(report.mean_recall, 1.0);
        assert_eq!(report.results[0].neighbors.len(), 2);
        assert_eq!(report.schema, REPORT_SCHEMA);
    }

    #[test]
    fn repeats_produce_one_sample_each() {
        let config = ReductionConfig::new(MetricSpec::Lp(1.0), 1.0, 2);
        let report = run_experiment(&three_point(), &config, 5, None).unwrap();
        assert_eq!(report.timings.build_ms.len(), 5);
        assert_eq!(report.timings.search_ms.len(), 5);
        assert!(report.timings.build_ms.iter().all(|t| *t >= 0.0));
        let m = report.timings.build_ms.iter().sum::<f64>() / 5.0;
        assert!((report.timings.mean_build_ms - m).abs() < 1e-12);
        assert_eq!(report.config.repeats, 5);
    }

    #[test]
    fn too_small_radius_lowers_recall() {
        let config = ReductionConfig::new(MetricSpec::Lp(1.0), 0.5, 2);
        let report = run_experiment(&three_point(), &config, 1, None).unwrap();
        assert_eq!(report.mean_recall, 0.5);
    }

    #[test]
    fn rejects_empty_inputs() {
        let config = ReductionConfig::new(MetricSpec::LInf, 1.0, 1);
        assert!(run_experiment(&three_point(), &config, 0, None).is_err());
        let empty = Dataset::default();
        assert!(run_experiment(&empty, &config, 1, None).is_err());
    }

    #[test]
    fn report_mean_matches_recomputed_recall() {
        let ds = Dataset::uniform(DatasetFormat::CsvXyz, 2000, 40, 3);
        let config = ReductionConfig::new(MetricSpec::Lp(2.0), 0.08, 10);
        let report = run_experiment(&ds, &config, 1, None).unwrap();
        let truth = exact_truth(&ds, config.metric, config.k).unwrap();
        let results: Vec<QueryResult> = report
            .results
            .iter()
            .map(|r| QueryResult {
                neighbors: r.neighbors.clone(),
                ..Default::default()
            })
            .collect();
        let agg = crate::oracle::aggregate_recall(&results, &truth).unwrap();
        assert_eq!(agg.mean, report.mean_recall);
        assert!(report.mean_recall > 0.0 && report.mean_recall <= 1.0);
    }

    #[test]
    fn sweep_rejects_non_increasing_values() {
        let ds = three_point();
        let config = ReductionConfig::new(MetricSpec::Lp(1.0), 1.0, 1);
        assert!(matches!(
            sweep(&ds, &config, SweepAxis::Radius, &[0.2, 0.2], 1),
            Err(Error::NonIncreasingSweep)
        ));
        assert!(sweep(&ds, &config, SweepAxis::K, &[1.5], 1).is_err());
        assert!(sweep(&ds, &config, SweepAxis::Queries, &[2.0], 1).is_err());
    }

    #[test]
    fn radius_sweep_recall_non_decreasing() {
        let ds = Dataset::uniform(DatasetFormat::CsvXyz, 3000, 30, 17);
        let config = ReductionConfig::new(MetricSpec::Lp(2.0), 0.1, 10);
        let reports = sweep(&ds, &config, SweepAxis::Radius, &[0.02, 0.05, 0.1, 0.2], 1).unwrap();
        for w in reports.windows(2) {
            assert!(w[0].mean_recall <= w[1].mean_recall);
            assert!(w[0].mean_candidate_count <= w[1].mean_candidate_count);
        }
        assert_eq!(reports.last().unwrap().mean_recall, 1.0);
    }

    #[test]
    fn k_sweep_keeps_candidates_fixed() {
        let ds = Dataset::uniform(DatasetFormat::CsvXyz, 3000, 30, 19);
        let config = ReductionConfig::new(MetricSpec::LInf, 0.1, 1);
        let reports = sweep(&ds, &config, SweepAxis::K, &[1.0, 10.0, 100.0], 1).unwrap();
        let counts: Vec<Vec<usize>> = reports
            .iter()
            .map(|r| r.results.iter().map(|q| q.candidate_count).collect())
            .collect();
        assert_eq!(counts[0], counts[1]);
        assert_eq!(counts[1], counts[2]);
    }

    #[test]
    fn queries_sweep_slices_queries() {
        let ds = Dataset::uniform(DatasetFormat::CsvXyz, 500, 20, 23);
        let config = ReductionConfig::new(MetricSpec::Lp(1.0), 0.3, 5);
        let reports = sweep(&ds, &config, SweepAxis::Queries, &[5.0, 20.0], 1).unwrap();
        assert_eq!(reports[0].config.queries, 5);
        assert_eq!(reports[1].config.queries, 20);
        assert_eq!(reports[0].results[..], reports[1].results[..5]);
    }

    #[test]
    fn transform_metrics_run_end_to_end() {
        for (format, metric, r) in [
            (DatasetFormat::CsvXyz, MetricSpec::Angular, 0.6),
            (DatasetFormat::CsvXyz, MetricSpec::Cosine, 0.2),
            (DatasetFormat::Csv2d, MetricSpec::Euclid2D, 0.2),
            (DatasetFormat::Csv2d, MetricSpec::Cosine, 0.05),
        ] {
            let ds = Dataset::uniform(format, 2000, 20, 29);
            let config = ReductionConfig::new(metric, r, 5);
            let report = run_experiment(&ds, &config, 1, None).unwrap();
            assert_eq!(report.mean_recall, 1.0, "{metric} on {format}");
        }
    }
}
