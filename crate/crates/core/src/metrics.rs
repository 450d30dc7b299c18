//! Distance measures, comparison weights and the L2 inclusion radius.
//!
//! Every metric ranks points by a *weight* that is order-isomorphic to its
//! true distance: the un-rooted sum `Σ|Δᵢ|^p` for Lp, `max|Δᵢ|` for L∞.
//! Hot loops compare weights against `r^p` and only take the root when a
//! distance is reported.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Point3;

/// The distance measure a search is ranked by.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum MetricSpec {
    Lp(f64),
    LInf,
    Cosine,
    Angular,
    Euclid2D,
    Hamming3,
}

impl MetricSpec {
    pub fn lp(p: f64) -> Result<Self> {
        check_exponent(p)?;
        Ok(MetricSpec::Lp(p))
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            MetricSpec::Lp(p) => check_exponent(*p),
            _ => Ok(()),
        }
    }

    /// True for metrics that are served by a monotone transform into an Lp pipeline.
    pub fn is_transform_backed(&self) -> bool {
        !matches!(self, MetricSpec::Lp(_) | MetricSpec::LInf)
    }

    /// The filter-refine norm for Lp/L∞ metrics, `None` for transform-backed ones.
    pub fn native(&self) -> Option<Norm> {
        match *self {
            MetricSpec::Lp(p) => Some(Norm::Lp(p)),
            MetricSpec::LInf => Some(Norm::LInf),
            _ => None,
        }
    }

    /// The norm the search runs under once the metric's transform has been applied.
    pub fn pipeline_norm(&self) -> Norm {
        match *self {
            MetricSpec::Lp(p) => Norm::Lp(p),
            MetricSpec::LInf => Norm::LInf,
            MetricSpec::Cosine | MetricSpec::Angular | MetricSpec::Euclid2D => Norm::Lp(2.0),
            MetricSpec::Hamming3 => Norm::Lp(1.0),
        }
    }
}

impl fmt::Display for MetricSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MetricSpec::Lp(p) => write!(f, "lp:{p}"),
            MetricSpec::LInf => f.write_str("linf"),
            MetricSpec::Cosine => f.write_str("cosine"),
            MetricSpec::Angular => f.write_str("angular"),
            MetricSpec::Euclid2D => f.write_str("euclid2d"),
            MetricSpec::Hamming3 => f.write_str("hamming3"),
        }
    }
}

impl FromStr for MetricSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.trim().to_ascii_lowercase();
        match lower.as_str() {
            "linf" => Ok(MetricSpec::LInf),
            "cosine" => Ok(MetricSpec::Cosine),
            "angular" => Ok(MetricSpec::Angular),
            "euclid2d" => Ok(MetricSpec::Euclid2D),
            "hamming3" => Ok(MetricSpec::Hamming3),
            other => {
                let p = other
                    .strip_prefix("lp:")
                    .and_then(|p| p.parse::<f64>().ok())
                    .ok_or_else(|| Error::UnknownMetric(s.to_string()))?;
                MetricSpec::lp(p)
            }
        }
    }
}

impl Serialize for MetricSpec {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for MetricSpec {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

fn check_exponent(p: f64) -> Result<()> {
    if p.is_finite() && p >= 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidExponent(p))
    }
}

fn check_radius(r: f64) -> Result<()> {
    if r.is_finite() && r > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidRadius(r))
    }
}

/// A norm the filter-refine pipeline can evaluate directly.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Norm {
    Lp(f64),
    LInf,
}

impl Norm {
    #[inline]
    pub fn weight(&self, a: &Point3, b: &Point3) -> f64 {
        match *self {
            Norm::Lp(p) => lp_weight_unchecked(a, b, p),
            Norm::LInf => linf_weight(a, b),
        }
    }

    /// The weight of a point at distance exactly `r`.
    #[inline]
    pub fn weight_bound(&self, r: f64) -> f64 {
        match *self {
            Norm::Lp(p) => pow_abs(r, p),
            Norm::LInf => r,
        }
    }

    #[inline]
    pub fn distance(&self, weight: f64) -> f64 {
        match *self {
            Norm::Lp(1.0) => weight,
            Norm::Lp(2.0) => weight.sqrt(),
            Norm::Lp(p) => weight.powf(p.recip()),
            Norm::LInf => weight,
        }
    }

    pub fn metric(&self) -> MetricSpec {
        match *self {
            Norm::Lp(p) => MetricSpec::Lp(p),
            Norm::LInf => MetricSpec::LInf,
        }
    }
}

#[inline]
fn pow_abs(v: f64, p: f64) -> f64 {
    let v = v.abs();
    if p == 1.0 {
        v
    } else if p == 2.0 {
        v * v
    } else {
        v.powf(p)
    }
}

#[inline]
fn lp_weight_unchecked(a: &Point3, b: &Point3, p: f64) -> f64 {
    pow_abs(a.x - b.x, p) + pow_abs(a.y - b.y, p) + pow_abs(a.z - b.z, p)
}

/// `Σ|aᵢ − bᵢ|^p`, without the p-th root.
pub fn lp_weight(a: &Point3, b: &Point3, p: f64) -> Result<f64> {
    check_exponent(p)?;
    Ok(lp_weight_unchecked(a, b, p))
}

#[inline]
pub fn linf_weight(a: &Point3, b: &Point3) -> f64 {
    (a.x - b.x)
        .abs()
        .max((a.y - b.y).abs())
        .max((a.z - b.z).abs())
}

/// Smallest L2 radius whose sphere encloses the radius-`r` ball of `metric`
/// in `d` dimensions.
pub fn inclusion_radius(metric: MetricSpec, r: f64, d: usize) -> Result<f64> {
    check_radius(r)?;
    if d != 2 && d != 3 {
        return Err(Error::InvalidDimension(d));
    }
    match metric {
        MetricSpec::Lp(p) => {
            check_exponent(p)?;
            if p <= 2.0 {
                Ok(r)
            } else {
                // ‖x‖₂ ≤ d^(1/2 − 1/p)·‖x‖ₚ, attained on the diagonal
                Ok(r * (d as f64).powf(0.5 - p.recip()))
            }
        }
        MetricSpec::LInf => Ok(r * (d as f64).sqrt()),
        other => Err(Error::UnsupportedMetric {
            op: "inclusion_radius",
            metric: other.to_string(),
        }),
    }
}

/// Closed metric-ball membership: is `q` within distance `r` of `center`?
pub fn in_lp_ball(q: &Point3, center: &Point3, metric: MetricSpec, r: f64) -> Result<bool> {
    let norm = metric.native().ok_or_else(|| Error::UnsupportedMetric {
        op: "in_lp_ball",
        metric: metric.to_string(),
    })?;
    metric.validate()?;
    check_radius(r)?;
    Ok(norm.weight(q, center) <= norm.weight_bound(r))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::l2_distance;
    use proptest::prelude::*;

    const O: Point3 = Point3::ORIGIN;

    #[test]
    fn lp_weight_examples() {
        let b = Point3::new(1.0, 2.0, 2.0);
        assert_eq!(lp_weight(&O, &b, 1.0).unwrap(), 5.0);
        assert_eq!(lp_weight(&O, &b, 2.0).unwrap(), 9.0);
        let h = Point3::new(0.5, 0.5, 0.5);
        assert!((lp_weight(&O, &h, 3.0).unwrap() - 0.375).abs() < 1e-15);
    }

    #[test]
    fn lp_weight_rejects_sub_unit_exponent() {
        assert!(matches!(
            lp_weight(&O, &O, 0.5),
            Err(Error::InvalidExponent(_))
        ));
        assert!(lp_weight(&O, &O, f64::NAN).is_err());
        assert!(MetricSpec::lp(f64::INFINITY).is_err());
    }

    #[test]
    fn linf_weight_examples() {
        assert_eq!(linf_weight(&O, &Point3::new(1.0, 2.0, 2.0)), 2.0);
        assert_eq!(linf_weight(&Point3::new(0.9, 0.9, 0.9), &O), 0.9);
        let p = Point3::new(4.0, -1.0, 2.5);
        assert_eq!(linf_weight(&p, &p), 0.0);
    }

    #[test]
    fn inclusion_radius_examples() {
        assert_eq!(
            inclusion_radius(MetricSpec::LInf, 1.0, 2).unwrap(),
            2f64.sqrt()
        );
        assert_eq!(inclusion_radius(MetricSpec::Lp(1.0), 5.0, 3).unwrap(), 5.0);
        let r4 = inclusion_radius(MetricSpec::Lp(4.0), 1.0, 3).unwrap();
        assert!((r4 - 1.3160740).abs() < 1e-7);
    }

    #[test]
    fn inclusion_radius_rejects_transform_metrics() {
        for m in [
            MetricSpec::Cosine,
            MetricSpec::Angular,
            MetricSpec::Euclid2D,
            MetricSpec::Hamming3,
        ] {
            assert!(matches!(
                inclusion_radius(m, 1.0, 3),
                Err(Error::UnsupportedMetric { .. })
            ));
        }
        assert!(inclusion_radius(MetricSpec::LInf, 0.0, 3).is_err());
        assert!(inclusion_radius(MetricSpec::LInf, 1.0, 4).is_err());
    }

    /// Maximizes the L2 norm over a dense sample of the unit L4 sphere in 3D.
    #[test]
    fn inclusion_radius_p4_matches_sampled_maximum() {
        let steps = 400;
        let mut best: f64 = 0.0;
        for i in 0..=steps {
            let theta = std::f64::consts::PI * i as f64 / steps as f64;
            for j in 0..=2 * steps {
                let phi = std::f64::consts::PI * j as f64 / steps as f64;
                let dir = Point3::new(
                    theta.sin() * phi.cos(),
                    theta.sin() * phi.sin(),
                    theta.cos(),
                );
                let l4 = (dir.x.powi(4) + dir.y.powi(4) + dir.z.powi(4)).powf(0.25);
                let on_sphere = Point3::new(dir.x / l4, dir.y / l4, dir.z / l4);
                best = best.max(l2_distance(&on_sphere, &O));
            }
        }
        let f = inclusion_radius(MetricSpec::Lp(4.0), 1.0, 3).unwrap();
        assert!(f >= best - 1e-12, "sampled {best} exceeds {f}");
        assert!(f - best < 1e-4, "sampled max {best} far below {f}");
    }

    #[test]
    fn in_lp_ball_examples() {
        let q = Point3::new(0.9, 0.9, 0.9);
        assert!(in_lp_ball(&q, &O, MetricSpec::LInf, 1.0).unwrap());
        assert!(l2_distance(&q, &O) > 1.0);
        assert!(!in_lp_ball(&Point3::new(0.5, 0.5, 0.5), &O, MetricSpec::Lp(1.0), 1.0).unwrap());
        assert!(in_lp_ball(&Point3::new(1.0, 0.0, 0.0), &O, MetricSpec::Lp(1.0), 1.0).unwrap());
    }

    #[test]
    fn tight_at_extremal_directions() {
        let r = 0.75;
        for (metric, extreme) in [
            (MetricSpec::Lp(1.0), Point3::new(r, 0.0, 0.0)),
            (MetricSpec::Lp(1.5), Point3::new(0.0, r, 0.0)),
            (MetricSpec::Lp(2.0), Point3::new(0.0, 0.0, r)),
            (MetricSpec::LInf, Point3::new(r, r, r)),
        ] {
            let f = inclusion_radius(metric, r, 3).unwrap();
            assert!((l2_distance(&extreme, &O) - f).abs() < 1e-9, "{metric}");
        }
        for p in [3.0, 4.0, 7.5] {
            let c = r / 3f64.powf(1.0 / p);
            let diag = Point3::new(c, c, c);
            let f = inclusion_radius(MetricSpec::Lp(p), r, 3).unwrap();
            assert!((lp_weight(&diag, &O, p).unwrap().powf(1.0 / p) - r).abs() < 1e-12);
            assert!((l2_distance(&diag, &O) - f).abs() < 1e-9, "p={p}");
        }
    }

    #[test]
    fn metric_strings_round_trip() {
        for s in [
            "lp:1", "lp:2", "lp:3.5", "linf", "cosine", "angular", "euclid2d", "hamming3",
        ] {
            let m: MetricSpec = s.parse().unwrap();
            assert_eq!(m.to_string(), s);
        }
        assert!("lp:0.5".parse::<MetricSpec>().is_err());
        assert!("jaccard".parse::<MetricSpec>().is_err());
        assert!("lp:".parse::<MetricSpec>().is_err());
    }

    fn unit_point() -> impl Strategy<Value = Point3> {
        (-1.0..1.0f64, -1.0..1.0f64, -1.0..1.0f64).prop_map(|(x, y, z)| Point3::new(x, y, z))
    }

    fn native_metric() -> impl Strategy<Value = MetricSpec> {
        prop_oneof![
            (1.0..8.0f64).prop_map(MetricSpec::Lp),
            Just(MetricSpec::Lp(1.0)),
            Just(MetricSpec::Lp(2.0)),
            Just(MetricSpec::LInf),
        ]
    }

    proptest! {
        #[test]
        fn ball_lies_inside_inclusion_sphere(
            c in unit_point(), p in unit_point(), m in native_metric(), r in 0.01..2.0f64
        ) {
            if in_lp_ball(&p, &c, m, r).unwrap() {
                let f = inclusion_radius(m, r, 3).unwrap();
                prop_assert!(l2_distance(&p, &c) <= f * (1.0 + 1e-12));
            }
        }

        #[test]
        fn weight_orders_like_distance(
            q in unit_point(), a in unit_point(), b in unit_point(), m in native_metric()
        ) {
            let norm = m.native().unwrap();
            let (wa, wb) = (norm.weight(&q, &a), norm.weight(&q, &b));
            let (da, db) = (norm.distance(wa), norm.distance(wb));
            if wa < wb {
                prop_assert!(da <= db);
            }
            if da < db {
                prop_assert!(wa < wb);
            }
        }

        #[test]
        fn smaller_exponent_ball_nests_inside(
            c in unit_point(), p in unit_point(), p1 in 1.0..6.0f64, dp in 0.0..6.0f64, r in 0.05..2.0f64
        ) {
            let p2 = p1 + dp;
            if in_lp_ball(&p, &c, MetricSpec::Lp(p1), r).unwrap() {
                // tolerate the rounding shell at the boundary
                let w2 = lp_weight(&p, &c, p2).unwrap().powf(1.0 / p2);
                prop_assert!(w2 <= r * (1.0 + 1e-12));
                prop_assert!(in_lp_ball(&p, &c, MetricSpec::LInf, r).unwrap());
            }
        }
    }
}
