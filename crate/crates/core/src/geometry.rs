//! Points, axis-aligned boxes and closed containment.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Point3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Point3 {
    pub const ORIGIN: Point3 = Point3 {
        x: 0.0,
        y: 0.0,
        z: 0.0,
    };

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Point3 { x, y, z }
    }

    /// Builds a point, rejecting NaN and infinite coordinates.
    pub fn try_new(x: f64, y: f64, z: f64) -> Result<Self> {
        let p = Point3 { x, y, z };
        if p.is_finite() {
            Ok(p)
        } else {
            Err(Error::NonFinite("point"))
        }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    #[inline]
    pub fn coords(&self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    #[inline]
    pub fn axis(&self, axis: usize) -> f64 {
        match axis {
            0 => self.x,
            1 => self.y,
            _ => self.z,
        }
    }

    #[inline]
    pub fn sub(&self, other: &Point3) -> Point3 {
        Point3::new(self.x - other.x, self.y - other.y, self.z - other.z)
    }

    #[inline]
    pub fn dot(&self, other: &Point3) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    #[inline]
    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    #[inline]
    pub fn min(&self, other: &Point3) -> Point3 {
        Point3::new(
            self.x.min(other.x),
            self.y.min(other.y),
            self.z.min(other.z),
        )
    }

    #[inline]
    pub fn max(&self, other: &Point3) -> Point3 {
        Point3::new(
            self.x.max(other.x),
            self.y.max(other.y),
            self.z.max(other.z),
        )
    }
}

impl From<[f64; 3]> for Point3 {
    fn from(c: [f64; 3]) -> Self {
        Point3::new(c[0], c[1], c[2])
    }
}

/// Closed axis-aligned box. Zero-width boxes are valid.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Aabb {
    pub min: Point3,
    pub max: Point3,
}

impl Aabb {
    pub fn new(min: Point3, max: Point3) -> Result<Self> {
        if !min.is_finite() || !max.is_finite() {
            return Err(Error::NonFinite("box corner"));
        }
        if min.x > max.x || min.y > max.y || min.z > max.z {
            return Err(Error::Invariant(format!(
                "box min {min:?} exceeds max {max:?}"
            )));
        }
        Ok(Aabb { min, max })
    }

    pub fn point(p: Point3) -> Self {
        Aabb { min: p, max: p }
    }

    #[inline]
    pub fn contains(&self, p: &Point3) -> bool {
        self.min.x <= p.x
            && p.x <= self.max.x
            && self.min.y <= p.y
            && p.y <= self.max.y
            && self.min.z <= p.z
            && p.z <= self.max.z
    }

    /// True if `other` lies entirely inside `self`.
    pub fn encloses(&self, other: &Aabb) -> bool {
        self.contains(&other.min) && self.contains(&other.max)
    }

    pub fn union(&self, other: &Aabb) -> Aabb {
        Aabb {
            min: self.min.min(&other.min),
            max: self.max.max(&other.max),
        }
    }

    pub fn grow(&mut self, p: &Point3) {
        self.min = self.min.min(p);
        self.max = self.max.max(p);
    }

    pub fn center(&self) -> Point3 {
        Point3::new(
            0.5 * (self.min.x + self.max.x),
            0.5 * (self.min.y + self.max.y),
            0.5 * (self.min.z + self.max.z),
        )
    }

    pub fn extent(&self) -> Point3 {
        self.max.sub(&self.min)
    }
}

/// A zero-length ray. Direction never affects containment, so only the origin is kept.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PointQuery {
    pub origin: Point3,
}

impl PointQuery {
    pub fn new(origin: Point3) -> Result<Self> {
        if origin.is_finite() {
            Ok(PointQuery { origin })
        } else {
            Err(Error::NonFinite("query origin"))
        }
    }
}

/// Cube of half-width `half_width` centered on `center`.
pub fn aabb_around(center: Point3, half_width: f64) -> Result<Aabb> {
    if !half_width.is_finite() || half_width < 0.0 {
        return Err(Error::InvalidHalfWidth(half_width));
    }
    if !center.is_finite() {
        return Err(Error::NonFinite("box center"));
    }
    let h = Point3::new(half_width, half_width, half_width);
    Ok(Aabb {
        min: center.sub(&h),
        max: Point3::new(center.x + h.x, center.y + h.y, center.z + h.z),
    })
}

#[inline]
pub fn aabb_contains(bbox: &Aabb, p: &Point3) -> bool {
    bbox.contains(p)
}

#[inline]
pub fn squared_l2(a: &Point3, b: &Point3) -> f64 {
    let d = a.sub(b);
    d.dot(&d)
}

#[inline]
pub fn l2_distance(a: &Point3, b: &Point3) -> f64 {
    squared_l2(a, b).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn unit_box() -> Aabb {
        aabb_around(Point3::ORIGIN, 1.0).unwrap()
    }

    #[test]
    fn aabb_around_examples() {
        let b = aabb_around(Point3::ORIGIN, 1.0).unwrap();
        assert_eq!(b.min, Point3::new(-1.0, -1.0, -1.0));
        assert_eq!(b.max, Point3::new(1.0, 1.0, 1.0));

        let c = Point3::new(2.0, 3.0, 4.0);
        let b = aabb_around(c, 0.0).unwrap();
        assert_eq!(b.min, c);
        assert_eq!(b.max, c);

        let b = aabb_around(Point3::ORIGIN, 3f64.sqrt()).unwrap();
        for v in b.max.coords() {
            assert!((v - 1.7320508).abs() < 1e-7);
        }
        for v in b.min.coords() {
            assert!((v + 1.7320508).abs() < 1e-7);
        }
    }

    #[test]
    fn aabb_around_rejects_bad_half_width() {
        assert!(matches!(
            aabb_around(Point3::ORIGIN, -0.5),
            Err(Error::InvalidHalfWidth(_))
        ));
        assert!(aabb_around(Point3::ORIGIN, f64::NAN).is_err());
        assert!(aabb_around(Point3::ORIGIN, f64::INFINITY).is_err());
        assert!(aabb_around(Point3::new(f64::NAN, 0.0, 0.0), 1.0).is_err());
    }

    #[test]
    fn containment_is_closed() {
        let b = unit_box();
        assert!(aabb_contains(&b, &Point3::new(0.5, 0.0, 0.0)));
        assert!(aabb_contains(&b, &Point3::new(1.0, 1.0, 1.0)));
        assert!(!aabb_contains(&b, &Point3::new(1.0000001, 0.0, 0.0)));
    }

    #[test]
    fn l2_examples() {
        assert_eq!(
            l2_distance(&Point3::ORIGIN, &Point3::new(1.0, 2.0, 2.0)),
            3.0
        );
        let d = l2_distance(&Point3::new(1.0, 1.0, 0.0), &Point3::ORIGIN);
        assert!((d - std::f64::consts::SQRT_2).abs() < 1e-12);
        let p = Point3::new(-3.25, 7.5, 1e-3);
        assert_eq!(l2_distance(&p, &p), 0.0);
    }

    #[test]
    fn try_new_rejects_non_finite() {
        assert!(Point3::try_new(0.0, f64::INFINITY, 0.0).is_err());
        assert!(PointQuery::new(Point3::new(0.0, 0.0, f64::NAN)).is_err());
        assert!(Aabb::new(Point3::new(1.0, 0.0, 0.0), Point3::ORIGIN).is_err());
    }

    fn coord() -> impl Strategy<Value = f64> {
        -100.0..100.0f64
    }

    fn point() -> impl Strategy<Value = Point3> {
        (coord(), coord(), coord()).prop_map(|(x, y, z)| Point3::new(x, y, z))
    }

    proptest! {
        #[test]
        fn containment_matches_chebyshev(c in point(), h in 0.0..50.0f64, p in point()) {
            let b = aabb_around(c, h).unwrap();
            let cheb = (p.x - c.x).abs().max((p.y - c.y).abs()).max((p.z - c.z).abs());
            // skip the measure-zero shell where c ± h rounds differently from |p - c|
            prop_assume!((cheb - h).abs() > 1e-9 * (1.0 + h));
            prop_assert_eq!(aabb_contains(&b, &p), cheb <= h);
        }

        #[test]
        fn l2_is_a_metric(a in point(), b in point(), c in point()) {
            let ab = l2_distance(&a, &b);
            let ba = l2_distance(&b, &a);
            prop_assert!(ab >= 0.0);
            prop_assert_eq!(ab, ba);
            prop_assert_eq!(l2_distance(&a, &a), 0.0);
            if a != b {
                prop_assert!(ab > 0.0);
            }
            let ac = l2_distance(&a, &c);
            let cb = l2_distance(&c, &b);
            prop_assert!(ab <= (ac + cb) * (1.0 + 1e-12));
        }
    }
}
