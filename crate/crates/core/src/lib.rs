//! Generalized k-nearest-neighbor search on a software model of ray-tracing
//! hardware.
//!
//! Data points are wrapped in axis-aligned boxes indexed by a BVH; a query
//! is a zero-length ray whose containing boxes are reported to an any-hit
//! callback. On top of that primitive the crate runs filter-refine k-NN for
//! every Lp norm (p ≥ 1) and L∞, and reaches cosine/angular, 2D Euclidean
//! and 3-bit Hamming distance through order-preserving point transforms.
//!
//! ```
//! use rtknn::{LpIndex, MetricSpec, Point3, ReductionConfig};
//!
//! let points = vec![
//!     Point3::new(0.0, 0.0, 0.0),
//!     Point3::new(1.0, 0.0, 0.0),
//!     Point3::new(3.0, 0.0, 0.0),
//! ];
//! let config = ReductionConfig::new(MetricSpec::Lp(1.0), 1.0, 2);
//! let index = LpIndex::build(&points, config).unwrap();
//! let result = index.query(Point3::new(0.4, 0.0, 0.0)).unwrap();
//! assert_eq!(result.ids(), vec![0, 1]);
//! ```

pub mod bvh;
pub mod dataset;
pub mod error;
pub mod experiment;
pub mod geometry;
pub mod metrics;
pub mod oracle;
pub mod reduction;

pub use bvh::{Bvh, HitControl, HitRecord, Primitive, TraversalStats, DEFAULT_LEAF_SIZE};
pub use dataset::{load_dataset, Dataset, DatasetFile, DatasetFormat};
pub use error::{Error, Result};
pub use experiment::{run_experiment, sweep, RunReport, SweepAxis};
pub use geometry::{aabb_around, aabb_contains, l2_distance, Aabb, Point3, PointQuery};
pub use metrics::{in_lp_ball, inclusion_radius, linf_weight, lp_weight, MetricSpec, Norm};
pub use oracle::{aggregate_recall, brute_force_knn, recall, GroundTruth};
pub use reduction::{
    apply_transform, build_scene, enhanced_query, filter_refine_query, scene_half_width,
    transformed_query, BitString3, InputPoint, LpIndex, Neighbor, NeighborHeap, QueryResult,
    ReductionConfig, SearchIndex, Transform, TransformChain,
};
