//! Fixtures shared by the benchmarks.

use rtknn::{Dataset, DatasetFormat, Point3};

/// Uniform points in the unit cube, plus queries, from a fixed seed.
pub fn unit_cube(n: usize, queries: usize, seed: u64) -> (Vec<Point3>, Vec<Point3>) {
    let ds = Dataset::uniform(DatasetFormat::CsvXyz, n, queries, seed);
    let lift = |v: Vec<rtknn::InputPoint>| v.iter().map(|p| p.lift()).collect();
    (lift(ds.data), lift(ds.queries))
}
