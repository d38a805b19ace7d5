//! Point-set container and its on-disk format.
//!
//! A [`PointSet`] is an immutable list of rotations plus a [`SampleInfo`]
//! provenance record. On disk it is a CSV with header
//! `index,r11,r12,r13,r21,r22,r23,r31,r32,r33`, row-major entries printed
//! with 17 significant digits (so every f64 round-trips bit-exactly), and a
//! sidecar JSON file next to it (same path, `.json` extension) holding the
//! metadata `{sampler, seed, N, L}`. Reading validates every matrix against
//! the rotation-group invariants at the construction tolerance.

use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write as _};
use std::ops::Index;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rotation::{Rotation, RotationError};

const CSV_HEADER: &str = "index,r11,r12,r13,r21,r22,r23,r31,r32,r33";

/// Provenance of a point set: which sampler produced it, from which seed (if
/// randomized), how many points, and the spectral level for determinantal
/// samples.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleInfo {
    pub sampler: String,
    /// `None` for deterministic constructions.
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(rename = "N")]
    pub n: usize,
    /// Spectral cutoff, present only for kernel-driven samplers.
    #[serde(rename = "L", default, skip_serializing_if = "Option::is_none")]
    pub l: Option<u32>,
}

impl SampleInfo {
    pub fn seeded(sampler: &str, seed: u64, n: usize) -> Self {
        SampleInfo {
            sampler: sampler.to_owned(),
            seed: Some(seed),
            n,
            l: None,
        }
    }

    pub fn deterministic(sampler: &str, n: usize) -> Self {
        SampleInfo {
            sampler: sampler.to_owned(),
            seed: None,
            n,
            l: None,
        }
    }

    pub fn with_level(mut self, l: u32) -> Self {
        self.l = Some(l);
        self
    }
}

#[derive(Debug, Error)]
pub enum PointSetError {
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("row {row} is not a rotation: {source}")]
    InvalidRotation {
        row: usize,
        #[source]
        source: RotationError,
    },
    #[error("metadata sidecar is unreadable: {0}")]
    BadSidecar(#[from] serde_json::Error),
}

/// An immutable collection of rotations with provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSet {
    points: Vec<Rotation>,
    pub info: SampleInfo,
}

impl PointSet {
    /// Bundles points with their provenance; the recorded size must match.
    pub fn new(points: Vec<Rotation>, info: SampleInfo) -> Self {
        assert_eq!(
            points.len(),
            info.n,
            "metadata records {} points but {} were supplied",
            info.n,
            points.len()
        );
        PointSet { points, info }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Rotation> {
        self.points.iter()
    }

    pub fn points(&self) -> &[Rotation] {
        &self.points
    }

    /// Writes the CSV and its JSON metadata sidecar (same path with the
    /// extension replaced by `.json`).
    pub fn write_csv(&self, path: &Path) -> Result<(), PointSetError> {
        let mut body = String::with_capacity(32 + 200 * self.points.len());
        body.push_str(CSV_HEADER);
        body.push('\n');
        for (index, point) in self.points.iter().enumerate() {
            write!(body, "{index}").expect("string formatting");
            for row in point.entries() {
                for value in row {
                    // 17 significant digits: round-trip exact for f64
                    write!(body, ",{value:.16e}").expect("string formatting");
                }
            }
            body.push('\n');
        }
        let mut file = fs::File::create(path)?;
        file.write_all(body.as_bytes())?;
        file.flush()?;

        let sidecar = path.with_extension("json");
        let mut metadata = serde_json::to_string_pretty(&self.info)?;
        metadata.push('\n');
        fs::write(sidecar, metadata)?;
        Ok(())
    }

    /// Reads a CSV written by [`PointSet::write_csv`], revalidating every
    /// matrix. The sidecar is optional on read: without it the provenance
    /// is recorded as unknown.
    pub fn read_csv(path: &Path) -> Result<Self, PointSetError> {
        let text = fs::read_to_string(path)?;
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, header)) if header.trim_end() == CSV_HEADER => {}
            Some((_, header)) => {
                return Err(PointSetError::Malformed {
                    line: 1,
                    message: format!("unexpected header {header:?}"),
                })
            }
            None => {
                return Err(PointSetError::Malformed {
                    line: 1,
                    message: "empty file".to_owned(),
                })
            }
        }

        let mut points = Vec::new();
        for (line_index, line) in lines {
            if line.trim().is_empty() {
                continue;
            }
            let line_no = line_index + 1;
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 10 {
                return Err(PointSetError::Malformed {
                    line: line_no,
                    message: format!("expected 10 fields, found {}", fields.len()),
                });
            }
            let row_index: usize = fields[0].parse().map_err(|e| PointSetError::Malformed {
                line: line_no,
                message: format!("bad index field {:?}: {e}", fields[0]),
            })?;
            if row_index != points.len() {
                return Err(PointSetError::Malformed {
                    line: line_no,
                    message: format!("index {row_index} out of order (expected {})", points.len()),
                });
            }
            let mut values = [0.0f64; 9];
            for (slot, field) in values.iter_mut().zip(&fields[1..]) {
                *slot = field.parse().map_err(|e| PointSetError::Malformed {
                    line: line_no,
                    message: format!("bad entry {field:?}: {e}"),
                })?;
            }
            let m = [
                [values[0], values[1], values[2]],
                [values[3], values[4], values[5]],
                [values[6], values[7], values[8]],
            ];
            let rotation = Rotation::from_matrix(m).map_err(|source| {
                PointSetError::InvalidRotation {
                    row: row_index,
                    source,
                }
            })?;
            points.push(rotation);
        }

        let sidecar = path.with_extension("json");
        let info = if sidecar.is_file() {
            let raw = fs::read_to_string(&sidecar)?;
            let mut info: SampleInfo = serde_json::from_str(&raw)?;
            info.n = points.len();
            info
        } else {
            SampleInfo::deterministic("unknown", points.len())
        };
        Ok(PointSet::new(points, info))
    }
}

impl Index<usize> for PointSet {
    type Output = Rotation;

    fn index(&self, i: usize) -> &Rotation {
        &self.points[i]
    }
}

impl<'a> IntoIterator for &'a PointSet {
    type Item = &'a Rotation;
    type IntoIter = std::slice::Iter<'a, Rotation>;

    fn into_iter(self) -> Self::IntoIter {
        self.points.iter()
    }
}
