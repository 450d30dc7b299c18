//! Monotone transforms: point maps under which a source metric's distance
//! order becomes the L2 (or L1) order of the images.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Point3;
use crate::metrics::MetricSpec;

/// Bit string of length at most 3, stored right-aligned in the low bits.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct BitString3 {
    bits: u8,
    len: u8,
}

impl BitString3 {
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.len() > 3 {
            return Err(Error::InvalidBits(s.to_string()));
        }
        let mut bits = 0u8;
        for c in s.chars() {
            bits = (bits << 1)
                | match c {
                    '0' => 0,
                    '1' => 1,
                    _ => return Err(Error::InvalidBits(s.to_string())),
                };
        }
        Ok(BitString3 {
            bits,
            len: s.len() as u8,
        })
    }

    /// Value after left-padding with zeros to three bits.
    pub fn value(&self) -> u8 {
        self.bits
    }

    pub fn len(&self) -> usize {
        self.len as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }
}

impl fmt::Display for BitString3 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in (0..self.len).rev() {
            f.write_str(if self.bits >> i & 1 == 1 { "1" } else { "0" })?;
        }
        Ok(())
    }
}

/// A record as read from a dataset, before any transform.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum InputPoint {
    Xyz(Point3),
    Xy([f64; 2]),
    Bits(BitString3),
}

impl InputPoint {
    fn kind(&self) -> &'static str {
        match self {
            InputPoint::Xyz(_) => "3D",
            InputPoint::Xy(_) => "2D",
            InputPoint::Bits(_) => "bit-string",
        }
    }

    /// Plain embedding into 3D without any normalization: 2D points get
    /// z = 0 and bit strings become unit-cube vertices.
    pub fn lift(&self) -> Point3 {
        match *self {
            InputPoint::Xyz(p) => p,
            InputPoint::Xy([x, y]) => Point3::new(x, y, 0.0),
            InputPoint::Bits(b) => hamming_vertex(b),
        }
    }
}

impl From<Point3> for InputPoint {
    fn from(p: Point3) -> Self {
        InputPoint::Xyz(p)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Transform {
    /// p / ‖p‖; angular order becomes chord (L2) order.
    Normalize,
    /// (x, y) → (x, y, 0); on 3D input the z coordinate is zeroed.
    Embed2D,
    /// Bit string → unit-cube vertex; Hamming distance becomes L1.
    HammingVertex,
}

impl Transform {
    pub fn name(&self) -> &'static str {
        match self {
            Transform::Normalize => "normalize",
            Transform::Embed2D => "embed2d",
            Transform::HammingVertex => "hamming-vertex",
        }
    }

    pub fn apply(&self, p: &InputPoint) -> Result<Point3> {
        let mismatch = || Error::TransformMismatch {
            transform: self.name(),
            input: p.kind(),
        };
        match (self, p) {
            (Transform::Normalize, InputPoint::Xyz(v)) => {
                let n = v.norm();
                if n > 0.0 && n.is_finite() {
                    Ok(Point3::new(v.x / n, v.y / n, v.z / n))
                } else {
                    Err(Error::ZeroVector {
                        set: "point",
                        index: 0,
                    })
                }
            }
            (Transform::Embed2D, InputPoint::Xy([x, y])) => Ok(Point3::new(*x, *y, 0.0)),
            (Transform::Embed2D, InputPoint::Xyz(v)) => Ok(Point3::new(v.x, v.y, 0.0)),
            (Transform::HammingVertex, InputPoint::Bits(b)) => Ok(hamming_vertex(*b)),
            _ => Err(mismatch()),
        }
    }
}

pub fn apply_transform(t: Transform, p: &InputPoint) -> Result<Point3> {
    t.apply(p)
}

fn hamming_vertex(b: BitString3) -> Point3 {
    let v = b.value();
    let bit = |shift: u8| f64::from(v >> shift & 1);
    Point3::new(bit(2), bit(1), bit(0))
}

/// Transforms applied left to right. The first consumes the raw record, the
/// rest see the 3D output of their predecessor.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransformChain(pub Vec<Transform>);

impl TransformChain {
    /// Default chain for a transform-backed metric given the input shape.
    pub fn for_metric(metric: MetricSpec, sample: Option<&InputPoint>) -> Result<Self> {
        let two_d = matches!(sample, Some(InputPoint::Xy(_)));
        let chain = match metric {
            MetricSpec::Cosine | MetricSpec::Angular if two_d => {
                vec![Transform::Embed2D, Transform::Normalize]
            }
            MetricSpec::Cosine | MetricSpec::Angular => vec![Transform::Normalize],
            MetricSpec::Euclid2D => vec![Transform::Embed2D],
            MetricSpec::Hamming3 => vec![Transform::HammingVertex],
            MetricSpec::Lp(_) | MetricSpec::LInf => Vec::new(),
        };
        Ok(TransformChain(chain))
    }

    pub fn apply(&self, p: &InputPoint) -> Result<Point3> {
        let mut current = *p;
        for t in &self.0 {
            current = InputPoint::Xyz(t.apply(&current)?);
        }
        match current {
            InputPoint::Xyz(v) => Ok(v),
            other => Err(Error::TransformMismatch {
                transform: "identity",
                input: other.kind(),
            }),
        }
    }

    /// Applies the chain to every point of `set`, reporting the index of a
    /// failing one.
    pub fn apply_all(&self, points: &[InputPoint], set: &'static str) -> Result<Vec<Point3>> {
        points
            .iter()
            .enumerate()
            .map(|(index, p)| {
                self.apply(p).map_err(|e| match e {
                    Error::ZeroVector { .. } => Error::ZeroVector { set, index },
                    other => other,
                })
            })
            .collect()
    }
}

/// Angle between unit vectors separated by `chord`.
#[inline]
pub fn angle_from_chord(chord: f64) -> f64 {
    2.0 * (0.5 * chord).min(1.0).asin()
}

/// Cosine similarity between unit vectors separated by `chord`.
#[inline]
pub fn cosine_similarity_from_chord(chord: f64) -> f64 {
    1.0 - 0.5 * chord * chord
}

#[inline]
pub fn chord_from_angle(angle: f64) -> f64 {
    2.0 * (0.5 * angle.min(std::f64::consts::PI)).sin()
}
