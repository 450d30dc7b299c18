//! Filter-refine k-NN over the emulated ray-tracing pipeline.
//!
//! Every data point becomes a primitive box centered on it. A query is a
//! zero-length ray at the query point; the BVH reports each box containing
//! it (the hardware filter), and the any-hit callback narrows and ranks:
//!
//! * plain reduction: box half-width is the L2 inclusion radius `r'`, hits
//!   pass a sphere test `‖X − Q‖² ≤ r'²`, then the metric test `w ≤ r^p`;
//! * enhanced reduction: box half-width is `r` itself and the metric test is
//!   the only user filter.
//!
//! Survivors of the user filter are candidates and go through the bounded
//! top-k refine step.

mod heap;
pub mod transform;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bvh::{Bvh, HitControl, Primitive, DEFAULT_LEAF_SIZE};
use crate::error::{Error, Result};
use crate::geometry::{squared_l2, Point3, PointQuery};
use crate::metrics::{inclusion_radius, MetricSpec, Norm};

pub use heap::NeighborHeap;
pub use transform::{
    angle_from_chord, apply_transform, chord_from_angle, cosine_similarity_from_chord, BitString3,
    InputPoint, Transform, TransformChain,
};

/// Dimension of the space the pipeline runs in.
pub const PIPELINE_DIM: usize = 3;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReductionConfig {
    pub metric: MetricSpec,
    /// Search radius in units of `metric`.
    pub radius: f64,
    pub k: usize,
    pub enhanced: bool,
    pub leaf_size: usize,
}

impl ReductionConfig {
    pub fn new(metric: MetricSpec, radius: f64, k: usize) -> Self {
        ReductionConfig {
            metric,
            radius,
            k,
            enhanced: false,
            leaf_size: DEFAULT_LEAF_SIZE,
        }
    }

    pub fn enhanced(mut self, enhanced: bool) -> Self {
        self.enhanced = enhanced;
        self
    }

    pub fn leaf_size(mut self, leaf_size: usize) -> Self {
        self.leaf_size = leaf_size;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.metric.validate()?;
        if !(self.radius.is_finite() && self.radius > 0.0) {
            return Err(Error::InvalidRadius(self.radius));
        }
        if self.k == 0 {
            return Err(Error::InvalidK);
        }
        if self.leaf_size == 0 {
            return Err(Error::InvalidLeafSize);
        }
        Ok(())
    }

    /// The config the range-space pipeline runs with: metric replaced by its
    /// pipeline norm and the radius converted to that norm's units.
    pub fn resolved(&self) -> ReductionConfig {
        ReductionConfig {
            metric: self.metric.pipeline_norm().metric(),
            radius: pipeline_radius(self.metric, self.radius),
            ..*self
        }
    }
}

/// Converts a radius in source-metric units to range-space units.
///
/// Angular radii are angles in radians; cosine radii are cosine distances
/// `1 − cos α`. Both become chord lengths between unit vectors.
pub fn pipeline_radius(metric: MetricSpec, r: f64) -> f64 {
    match metric {
        MetricSpec::Angular => chord_from_angle(r),
        MetricSpec::Cosine => (2.0 * r.min(2.0)).sqrt(),
        _ => r,
    }
}

/// Converts a range-space distance back into source-metric units.
pub fn source_distance(metric: MetricSpec, range_distance: f64) -> f64 {
    match metric {
        MetricSpec::Angular => angle_from_chord(range_distance),
        MetricSpec::Cosine => 1.0 - cosine_similarity_from_chord(range_distance),
        _ => range_distance,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Neighbor {
    pub id: usize,
    pub distance: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct QueryResult {
    /// Ascending by distance, then id.
    pub neighbors: Vec<Neighbor>,
    /// Hits that passed every filter stage and reached refine.
    pub candidate_count: usize,
    /// Any-hit invocations.
    pub hit_count: usize,
    pub node_visits: usize,
}

impl QueryResult {
    pub fn ids(&self) -> Vec<usize> {
        self.neighbors.iter().map(|n| n.id).collect()
    }
}

/// Half-width of the box placed around every data point.
pub fn scene_half_width(config: &ReductionConfig, d: usize) -> Result<f64> {
    if config.enhanced {
        if config.metric.is_transform_backed() {
            return Err(Error::UnsupportedMetric {
                op: "scene_half_width",
                metric: config.metric.to_string(),
            });
        }
        if !(config.radius.is_finite() && config.radius > 0.0) {
            return Err(Error::InvalidRadius(config.radius));
        }
        if d != 2 && d != 3 {
            return Err(Error::InvalidDimension(d));
        }
        Ok(config.radius)
    } else {
        inclusion_radius(config.metric, config.radius, d)
    }
}

fn native_norm(config: &ReductionConfig) -> Result<Norm> {
    config
        .metric
        .native()
        .ok_or_else(|| Error::UnsupportedMetric {
            op: "filter-refine query",
            metric: config.metric.to_string(),
        })
}

/// Builds the scene for `config`: one box of half-width
/// [`scene_half_width`] per point.
pub fn build_scene(points: &[Point3], config: &ReductionConfig) -> Result<Bvh> {
    config.validate()?;
    let half_width = scene_half_width(config, PIPELINE_DIM)?;
    let prims = points
        .iter()
        .enumerate()
        .map(|(id, p)| Primitive::around(id, *p, half_width))
        .collect::<Result<Vec<_>>>()?;
    Bvh::build(&prims, config.leaf_size)
}

struct Stage {
    norm: Norm,
    weight_bound: f64,
    /// Squared radius of the sphere pre-filter, plain reduction only.
    sphere_bound: Option<f64>,
    k: usize,
}

fn run_pipeline(bvh: &Bvh, q: Point3, stage: &Stage) -> Result<QueryResult> {
    let query = PointQuery::new(q)?;
    let mut top = NeighborHeap::new(stage.k);
    let mut candidates = 0usize;
    let stats = bvh.traverse_point(&query, |hit| {
        let x = hit.center;
        if let Some(bound) = stage.sphere_bound {
            if squared_l2(&x, &q) > bound {
                return HitControl::Continue;
            }
        }
        let w = stage.norm.weight(&x, &q);
        if w <= stage.weight_bound {
            candidates += 1;
            top.insert(hit.id, w);
        }
        HitControl::Continue
    });
    let neighbors = top
        .into_sorted_vec()
        .into_iter()
        .map(|(id, w)| Neighbor {
            id,
            distance: stage.norm.distance(w),
        })
        .collect();
    Ok(QueryResult {
        neighbors,
        candidate_count: candidates,
        hit_count: stats.hits,
        node_visits: stats.node_visits,
    })
}

/// Plain reduction: sphere pre-filter at the inclusion radius, then the
/// metric user filter, then top-k. `bvh` must come from [`build_scene`]
/// with `config.enhanced == false`.
pub fn filter_refine_query(bvh: &Bvh, q: Point3, config: &ReductionConfig) -> Result<QueryResult> {
    let norm = native_norm(config)?;
    let plain = ReductionConfig {
        enhanced: false,
        ..*config
    };
    plain.validate()?;
    let r_prime = scene_half_width(&plain, PIPELINE_DIM)?;
    let stage = Stage {
        norm,
        weight_bound: norm.weight_bound(config.radius),
        sphere_bound: Some(r_prime * r_prime),
        k: config.k,
    };
    run_pipeline(bvh, q, &stage)
}

/// Enhanced reduction: the metric ball is the user geometry, so only the
/// metric test runs on hits. `bvh` must come from [`build_scene`] with
/// `config.enhanced == true`.
pub fn enhanced_query(bvh: &Bvh, q: Point3, config: &ReductionConfig) -> Result<QueryResult> {
    let norm = native_norm(config)?;
    config.validate()?;
    let stage = Stage {
        norm,
        weight_bound: norm.weight_bound(config.radius),
        sphere_bound: None,
        k: config.k,
    };
    run_pipeline(bvh, q, &stage)
}

/// A built Lp/L∞ scene together with the config it was built for.
#[derive(Clone, Debug)]
pub struct LpIndex {
    bvh: Bvh,
    config: ReductionConfig,
    half_width: f64,
    len: usize,
}

impl LpIndex {
    pub fn build(points: &[Point3], config: ReductionConfig) -> Result<Self> {
        native_norm(&config)?;
        let bvh = build_scene(points, &config)?;
        Ok(LpIndex {
            bvh,
            half_width: scene_half_width(&config, PIPELINE_DIM)?,
            config,
            len: points.len(),
        })
    }

    pub fn bvh(&self) -> &Bvh {
        &self.bvh
    }

    pub fn config(&self) -> &ReductionConfig {
        &self.config
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Runs the reduction selected by `config.enhanced` with a different `k`.
    pub fn query_k(&self, q: Point3, k: usize) -> Result<QueryResult> {
        let config = ReductionConfig { k, ..self.config };
        if config.enhanced {
            enhanced_query(&self.bvh, q, &config)
        } else {
            filter_refine_query(&self.bvh, q, &config)
        }
    }

    pub fn query(&self, q: Point3) -> Result<QueryResult> {
        self.query_k(q, self.config.k)
    }

    pub fn query_batch(&self, queries: &[Point3]) -> Result<Vec<QueryResult>> {
        queries.par_iter().map(|q| self.query(*q)).collect()
    }
}

/// Index for any supported metric: applies the metric's monotone transform
/// chain (empty for Lp/L∞), searches in range space, and reports distances
/// in source-metric units.
#[derive(Clone, Debug)]
pub struct SearchIndex {
    source: MetricSpec,
    chain: TransformChain,
    inner: LpIndex,
}

impl SearchIndex {
    pub fn build(data: &[InputPoint], config: &ReductionConfig) -> Result<Self> {
        let chain = TransformChain::for_metric(config.metric, data.first())?;
        Self::with_chain(data, config, chain)
    }

    pub fn with_chain(
        data: &[InputPoint],
        config: &ReductionConfig,
        chain: TransformChain,
    ) -> Result<Self> {
        config.validate()?;
        let points = chain.apply_all(data, "data")?;
        let inner = LpIndex::build(&points, config.resolved())?;
        Ok(SearchIndex {
            source: config.metric,
            chain,
            inner,
        })
    }

    pub fn metric(&self) -> MetricSpec {
        self.source
    }

    pub fn chain(&self) -> &TransformChain {
        &self.chain
    }

    pub fn inner(&self) -> &LpIndex {
        &self.inner
    }

    pub fn query_k(&self, q: &InputPoint, k: usize) -> Result<QueryResult> {
        let mapped = self.chain.apply(q)?;
        let mut result = self.inner.query_k(mapped, k)?;
        if self.source.is_transform_backed() {
            for n in &mut result.neighbors {
                n.distance = source_distance(self.source, n.distance);
            }
            result
                .neighbors
                .sort_by(|a, b| a.distance.total_cmp(&b.distance).then(a.id.cmp(&b.id)));
        }
        Ok(result)
    }

    pub fn query(&self, q: &InputPoint) -> Result<QueryResult> {
        self.query_k(q, self.inner.config().k)
    }

    pub fn query_batch(&self, queries: &[InputPoint]) -> Result<Vec<QueryResult>> {
        self.query_batch_k(queries, self.inner.config().k)
    }

    pub fn query_batch_k(&self, queries: &[InputPoint], k: usize) -> Result<Vec<QueryResult>> {
        queries
            .par_iter()
            .enumerate()
            .map(|(index, q)| {
                self.query_k(q, k).map_err(|e| match e {
                    Error::ZeroVector { .. } => Error::ZeroVector {
                        set: "query",
                        index,
                    },
                    other => other,
                })
            })
            .collect()
    }
}

/// Transforms data and queries for `config.metric`, runs the reduction in
/// range space, and reports distances in source-metric units.
pub fn transformed_query(
    data: &[InputPoint],
    queries: &[InputPoint],
    config: &ReductionConfig,
) -> Result<Vec<QueryResult>> {
    SearchIndex::build(data, config)?.query_batch(queries)
}
