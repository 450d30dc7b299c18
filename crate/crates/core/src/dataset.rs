//! Dataset ingestion. The first `n` records become data, the next `q`
//! become queries.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Point3;
use crate::reduction::{BitString3, InputPoint};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum DatasetFormat {
    /// `x,y,z` per line.
    CsvXyz,
    /// Packed little-endian f32 records of four values; the first three are used.
    BinF32x4,
    /// `x,y` per line.
    Csv2d,
    /// One bit string of length ≤ 3 per line.
    Bits,
}

impl DatasetFormat {
    pub fn as_str(&self) -> &'static str {
        match self {
            DatasetFormat::CsvXyz => "csv-xyz",
            DatasetFormat::BinF32x4 => "bin-f32x4",
            DatasetFormat::Csv2d => "csv-2d",
            DatasetFormat::Bits => "bits",
        }
    }
}

impl fmt::Display for DatasetFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DatasetFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv-xyz" => Ok(DatasetFormat::CsvXyz),
            "bin-f32x4" => Ok(DatasetFormat::BinF32x4),
            "csv-2d" => Ok(DatasetFormat::Csv2d),
            "bits" => Ok(DatasetFormat::Bits),
            other => Err(Error::UnknownFormat(other.to_string())),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DatasetFile {
    pub format: DatasetFormat,
    pub path: PathBuf,
    pub n: usize,
    pub queries: usize,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Dataset {
    pub data: Vec<InputPoint>,
    pub queries: Vec<InputPoint>,
}

impl Dataset {
    pub fn from_xyz(data: Vec<Point3>, queries: Vec<Point3>) -> Self {
        Dataset {
            data: data.into_iter().map(InputPoint::Xyz).collect(),
            queries: queries.into_iter().map(InputPoint::Xyz).collect(),
        }
    }

    /// Uniform points in the unit cube (or square, or random bit strings for
    /// [`DatasetFormat::Bits`]), reproducible from `seed`.
    pub fn uniform(format: DatasetFormat, n: usize, queries: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let sample = |rng: &mut ChaCha8Rng| match format {
            DatasetFormat::CsvXyz | DatasetFormat::BinF32x4 => {
                InputPoint::Xyz(Point3::new(rng.gen(), rng.gen(), rng.gen()))
            }
            DatasetFormat::Csv2d => InputPoint::Xy([rng.gen(), rng.gen()]),
            DatasetFormat::Bits => {
                let v: u8 = rng.gen_range(0..8);
                let s = format!("{:03b}", v);
                InputPoint::Bits(BitString3::parse(&s).expect("three binary digits"))
            }
        };
        let data = (0..n).map(|_| sample(&mut rng)).collect();
        let queries = (0..queries).map(|_| sample(&mut rng)).collect();
        Dataset { data, queries }
    }
}

/// Parses every record in `bytes`.
pub fn parse_records(format: DatasetFormat, bytes: &[u8]) -> Result<Vec<InputPoint>> {
    match format {
        DatasetFormat::BinF32x4 => parse_bin(bytes),
        _ => {
            let text = std::str::from_utf8(bytes).map_err(|e| Error::Parse {
                record: 0,
                message: format!("not UTF-8 text: {e}"),
            })?;
            text.lines()
                .map(str::trim)
                .filter(|l| !l.is_empty() && !l.starts_with('#'))
                .enumerate()
                .map(|(i, line)| {
                    parse_line(format, line).map_err(|message| Error::Parse {
                        record: i + 1,
                        message,
                    })
                })
                .collect()
        }
    }
}

fn parse_line(format: DatasetFormat, line: &str) -> std::result::Result<InputPoint, String> {
    if format == DatasetFormat::Bits {
        return BitString3::parse(line)
            .map(InputPoint::Bits)
            .map_err(|e| e.to_string());
    }
    let want = if format == DatasetFormat::Csv2d { 2 } else { 3 };
    let fields: Vec<&str> = line.split(',').map(str::trim).collect();
    if fields.len() != want {
        return Err(format!(
            "expected {want} comma-separated values, found {}",
            fields.len()
        ));
    }
    let mut v = [0.0f64; 3];
    for (slot, field) in v.iter_mut().zip(&fields) {
        let x: f64 = field
            .parse()
            .map_err(|_| format!("cannot parse {field:?} as a number"))?;
        if !x.is_finite() {
            return Err(format!("non-finite value {field:?}"));
        }
        *slot = x;
    }
    Ok(match format {
        DatasetFormat::Csv2d => InputPoint::Xy([v[0], v[1]]),
        _ => InputPoint::Xyz(Point3::new(v[0], v[1], v[2])),
    })
}

fn parse_bin(bytes: &[u8]) -> Result<Vec<InputPoint>> {
    const RECORD: usize = 16;
    if !bytes.len().is_multiple_of(RECORD) {
        return Err(Error::Parse {
            record: bytes.len() / RECORD + 1,
            message: format!("truncated record: {} trailing bytes", bytes.len() % RECORD),
        });
    }
    bytes
        .chunks_exact(RECORD)
        .enumerate()
        .map(|(i, rec)| {
            let f = |j: usize| {
                f32::from_le_bytes(rec[4 * j..4 * j + 4].try_into().expect("4-byte slice"))
            };
            let p = Point3::new(f64::from(f(0)), f64::from(f(1)), f64::from(f(2)));
            if p.is_finite() {
                Ok(InputPoint::Xyz(p))
            } else {
                Err(Error::Parse {
                    record: i + 1,
                    message: "non-finite coordinate".into(),
                })
            }
        })
        .collect()
}

/// Splits parsed records into `n` data points followed by `queries` queries.
pub fn split_records(mut records: Vec<InputPoint>, n: usize, queries: usize) -> Result<Dataset> {
    let needed = n + queries;
    if records.len() < needed {
        return Err(Error::InsufficientRecords {
            needed,
            available: records.len(),
        });
    }
    records.truncate(needed);
    let queries = records.split_off(n);
    Ok(Dataset {
        data: records,
        queries,
    })
}

pub fn load_dataset(file: &DatasetFile) -> Result<Dataset> {
    let records = read_records(file.format, &file.path)?;
    split_records(records, file.n, file.queries)
}

pub fn read_records(format: DatasetFormat, path: &Path) -> Result<Vec<InputPoint>> {
    let bytes = fs::read(path)?;
    parse_records(format, &bytes)
}

/// Writes 3D points as little-endian f32x4 records (fourth value zero).
pub fn encode_bin_f32x4(points: &[Point3]) -> Vec<u8> {
    let mut out = Vec::with_capacity(points.len() * 16);
    for p in points {
        for v in [p.x as f32, p.y as f32, p.z as f32, 0.0f32] {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    out
}
