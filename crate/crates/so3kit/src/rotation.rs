//! The rotation group SO(3): validated matrices, Euler factorisation, the
//! bi-invariant angle metric, and Haar-uniform sampling.
//!
//! A [`Rotation`] is a 3x3 real matrix with `R^T R = I` and `det R = 1`, both
//! enforced to [`VALIDITY_TOL`] on construction. Distances come in two
//! flavours that the test suite cross-checks against each other:
//!
//! * [`rotation_angle`]: `omega(a, b) = arccos((tr(a^T b) - 1) / 2)`, the
//!   rotation angle of `a^-1 b`, a bi-invariant metric with values in
//!   `[0, pi]`;
//! * [`frobenius_distance`]: the ambient `R^9` Euclidean distance, computed
//!   directly from the entries (never through the angle).
//!
//! Under Haar measure the rotation angle has density `(2/pi) sin^2(t/2)` on
//! `[0, pi]`, so the measure of a metric ball is [`ball_volume`] and radial
//! integrals reduce to [`crate::quadrature::radial_integral`].

use std::f64::consts::PI;
use std::ops::Mul;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::pointset::{PointSet, SampleInfo};

/// Construction tolerance on orthogonality and determinant defects.
pub const VALIDITY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RotationError {
    #[error("matrix is not orthogonal: max |R^T R - I| entry = {defect:.3e}")]
    NotOrthogonal { defect: f64 },
    #[error("matrix is not special: det = {det:.17} (want 1)")]
    NotSpecial { det: f64 },
    #[error("matrix entries must be finite")]
    NotFinite,
    #[error("{name} = {value} outside [{lo}, {hi})")]
    AngleOutOfRange {
        name: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },
    #[error("matrix is too degenerate to project onto SO(3) (det = {det:.3e})")]
    NotProjectable { det: f64 },
}

/// Euler angles of the ZXZ factorisation `R = s_z(phi1) s_x(theta) s_z(phi2)`,
/// with `phi1, phi2` in `[0, 2pi)` and `theta` in `[0, pi]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EulerAngles {
    phi1: f64,
    theta: f64,
    phi2: f64,
}

impl EulerAngles {
    pub fn new(phi1: f64, theta: f64, phi2: f64) -> Result<Self, RotationError> {
        let range = |name: &'static str, value: f64, lo: f64, hi: f64, closed: bool| {
            let ok = value >= lo && if closed { value <= hi } else { value < hi };
            if ok {
                Ok(())
            } else {
                Err(RotationError::AngleOutOfRange {
                    name,
                    value,
                    lo,
                    hi,
                })
            }
        };
        range("phi1", phi1, 0.0, 2.0 * PI, false)?;
        range("theta", theta, 0.0, PI, true)?;
        range("phi2", phi2, 0.0, 2.0 * PI, false)?;
        Ok(EulerAngles { phi1, theta, phi2 })
    }

    pub fn phi1(&self) -> f64 {
        self.phi1
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn phi2(&self) -> f64 {
        self.phi2
    }
}

/// An element of SO(3), stored row-major.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rotation {
    m: [[f64; 3]; 3],
}

impl Rotation {
    pub fn identity() -> Self {
        Rotation {
            m: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
        }
    }

    /// Rotation by `phi` about the z-axis:
    /// rows `[cos -sin 0; sin cos 0; 0 0 1]`.
    pub fn about_z(phi: f64) -> Self {
        let (s, c) = phi.sin_cos();
        Rotation {
            m: [[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]],
        }
    }

    /// Rotation by `theta` about the x-axis:
    /// rows `[1 0 0; 0 cos -sin; 0 sin cos]`.
    pub fn about_x(theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        Rotation {
            m: [[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]],
        }
    }

    /// Validated construction from row-major entries.
    pub fn from_matrix(m: [[f64; 3]; 3]) -> Result<Self, RotationError> {
        if m.iter().flatten().any(|v| !v.is_finite()) {
            return Err(RotationError::NotFinite);
        }
        let r = Rotation { m };
        let defect = r.orthogonality_defect();
        if defect > VALIDITY_TOL {
            return Err(RotationError::NotOrthogonal { defect });
        }
        let det = r.det();
        if (det - 1.0).abs() > VALIDITY_TOL {
            return Err(RotationError::NotSpecial { det });
        }
        Ok(r)
    }

    /// Nearest-rotation projection (polar factor) of an almost-orthogonal
    /// matrix, by the Newton iteration `X <- (X + X^-T) / 2`.
    ///
    /// This is the only repair route; [`Rotation::from_matrix`] never fixes
    /// its input silently.
    pub fn orthonormalize(m: [[f64; 3]; 3]) -> Result<Self, RotationError> {
        if m.iter().flatten().any(|v| !v.is_finite()) {
            return Err(RotationError::NotFinite);
        }
        let det = det3(&m);
        if det <= 0.0 {
            // The polar factor would be a reflection (or undefined).
            return Err(RotationError::NotProjectable { det });
        }
        let mut x = m;
        for _ in 0..40 {
            let inv_t = match invert3(&x) {
                Some(inv) => transpose3(&inv),
                None => return Err(RotationError::NotProjectable { det: det3(&x) }),
            };
            let mut next = [[0.0; 3]; 3];
            let mut delta: f64 = 0.0;
            for i in 0..3 {
                for j in 0..3 {
                    next[i][j] = 0.5 * (x[i][j] + inv_t[i][j]);
                    delta = delta.max((next[i][j] - x[i][j]).abs());
                }
            }
            x = next;
            if delta < 1e-16 {
                break;
            }
        }
        Rotation::from_matrix(x)
    }

    /// `R = s_z(phi1) s_x(theta) s_z(phi2)`.
    pub fn from_euler(angles: EulerAngles) -> Self {
        &(&Rotation::about_z(angles.phi1) * &Rotation::about_x(angles.theta))
            * &Rotation::about_z(angles.phi2)
    }

    /// Composition without re-validation. Products of valid rotations stay
    /// within a few ulp of the group, which downstream tolerances absorb.
    pub(crate) fn compose(&self, rhs: &Rotation) -> Rotation {
        let a = &self.m;
        let b = &rhs.m;
        let mut m = [[0.0; 3]; 3];
        for (i, row) in m.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell = a[i][0].mul_add(b[0][j], a[i][1].mul_add(b[1][j], a[i][2] * b[2][j]));
            }
        }
        Rotation { m }
    }

    /// Transpose, which for a rotation is also the inverse.
    pub fn transpose(&self) -> Rotation {
        Rotation {
            m: transpose3(&self.m),
        }
    }

    /// Group inverse (`= transpose`).
    pub fn inverse(&self) -> Rotation {
        self.transpose()
    }

    pub fn trace(&self) -> f64 {
        self.m[0][0] + self.m[1][1] + self.m[2][2]
    }

    pub fn det(&self) -> f64 {
        det3(&self.m)
    }

    /// Row-major entries.
    pub fn entries(&self) -> &[[f64; 3]; 3] {
        &self.m
    }

    pub fn entry(&self, row: usize, col: usize) -> f64 {
        self.m[row][col]
    }

    /// Largest entry of `|R^T R - I|`.
    pub fn orthogonality_defect(&self) -> f64 {
        let mut defect: f64 = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                let mut dot = 0.0;
                for k in 0..3 {
                    // column i . column j
                    dot += self.m[k][i] * self.m[k][j];
                }
                let target = if i == j { 1.0 } else { 0.0 };
                defect = defect.max((dot - target).abs());
            }
        }
        defect
    }

    /// Rotation angle of `self` (distance to the identity).
    pub fn angle(&self) -> f64 {
        acos_clamped(0.5 * (self.trace() - 1.0))
    }
}

impl Mul for &Rotation {
    type Output = Rotation;

    fn mul(self, rhs: &Rotation) -> Rotation {
        self.compose(rhs)
    }
}

fn transpose3(m: &[[f64; 3]; 3]) -> [[f64; 3]; 3] {
    let mut t = [[0.0; 3]; 3];
    for i in 0..3 {
        for (j, row) in m.iter().enumerate() {
            t[i][j] = row[i];
        }
    }
    t
}

fn det3(m: &[[f64; 3]; 3]) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

#[allow(clippy::needless_range_loop)] // cofactor indices do modular arithmetic
fn invert3(m: &[[f64; 3]; 3]) -> Option<[[f64; 3]; 3]> {
    let det = det3(m);
    if det.abs() < 1e-300 {
        return None;
    }
    let inv_det = 1.0 / det;
    let mut adj = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            // cofactor expansion; note the transpose in adj[j][i]
            let r0 = (i + 1) % 3;
            let r1 = (i + 2) % 3;
            let c0 = (j + 1) % 3;
            let c1 = (j + 2) % 3;
            adj[j][i] = (m[r0][c0] * m[r1][c1] - m[r0][c1] * m[r1][c0]) * inv_det;
        }
    }
    Some(adj)
}

/// arccos with the argument clamped to `[-1, 1]`, so that round-off on traces
/// of nearly-coincident or nearly-antipodal rotations cannot produce NaN.
pub(crate) fn acos_clamped(x: f64) -> f64 {
    x.clamp(-1.0, 1.0).acos()
}

/// Rotation angle `omega(a, b) = arccos((tr(a^T b) - 1) / 2)` in `[0, pi]`.
///
/// This is the angle of the relative rotation `a^-1 b` and a bi-invariant
/// metric on SO(3).
pub fn rotation_angle(a: &Rotation, b: &Rotation) -> f64 {
    // tr(a^T b) = <a, b> entrywise
    let mut dot = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            dot += a.m[i][j] * b.m[i][j];
        }
    }
    acos_clamped(0.5 * (dot - 1.0))
}

/// Euclidean distance of the two matrices as vectors in `R^9`, computed
/// entrywise. Related to the angle by `||a - b||_F = sqrt(8) sin(omega/2)`,
/// which the tests verify against this direct evaluation.
pub fn frobenius_distance(a: &Rotation, b: &Rotation) -> f64 {
    let mut sq = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            let d = a.m[i][j] - b.m[i][j];
            sq = d.mul_add(d, sq);
        }
    }
    sq.sqrt()
}

/// Haar measure of a metric ball of radius `eps` in the rotation angle:
/// `mu(B(., eps)) = (eps - sin eps) / pi` for `0 < eps <= pi`.
pub fn ball_volume(eps: f64) -> f64 {
    debug_assert!(eps > 0.0 && eps <= PI, "ball radius must lie in (0, pi]");
    (eps - eps.sin()) / PI
}

/// One Haar-uniform rotation from three unit-cube coordinates.
///
/// `M = -(I - 2 v v^T) R_z` with `v = (cos(2 pi x2) sqrt(u), sin(2 pi x2)
/// sqrt(u), sqrt(1 - u))` and `R_z` the rotation by `2 pi x1` about z (with
/// the sign convention that makes `det M = +1`). Uniform `x1, x2, u` give
/// exactly Haar measure; low-discrepancy inputs give the quasi-random
/// sampler in [`crate::sampling`]. Single pipeline, tested once.
pub(crate) fn rotation_from_cube(x1: f64, x2: f64, u: f64) -> Rotation {
    let (s2, c2) = (2.0 * PI * x2).sin_cos();
    let root_u = u.sqrt();
    let v = [c2 * root_u, s2 * root_u, (1.0 - u).max(0.0).sqrt()];
    let (s1, c1) = (2.0 * PI * x1).sin_cos();
    let r = [[c1, s1, 0.0], [-s1, c1, 0.0], [0.0, 0.0, 1.0]];
    let mut m = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            // row i of H = I - 2 v v^T times column j of R, negated
            let mut dot = 0.0;
            for (k, rk) in r.iter().enumerate() {
                let h = f64::from(u8::from(i == k)) - 2.0 * v[i] * v[k];
                dot += h * rk[j];
            }
            m[i][j] = -dot;
        }
    }
    Rotation { m }
}

/// Deterministic per-index random stream: every sample index gets its own
/// counter-mode stream of a fixed-key ChaCha generator, so parallel
/// generation is reproducible and independent of thread count.
pub(crate) fn stream_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// One Haar-uniform rotation from an RNG (three uniform draws).
pub fn haar_rotation<R: Rng + ?Sized>(rng: &mut R) -> Rotation {
    let x1: f64 = rng.random();
    let x2: f64 = rng.random();
    let u: f64 = rng.random();
    rotation_from_cube(x1, x2, u)
}

/// `n` independent Haar-uniform rotations.
///
/// Point `k` is generated from stream `k` of the seeded generator, so the
/// result depends only on `(n, seed)` and generation parallelises without
/// affecting output.
pub fn uniform_sample(n: usize, seed: u64) -> PointSet {
    use rayon::prelude::*;
    let points: Vec<Rotation> = (0..n)
        .into_par_iter()
        .map(|k| {
            let mut rng = stream_rng(seed, k as u64);
            haar_rotation(&mut rng)
        })
        .collect();
    PointSet::new(points, SampleInfo::seeded("uniform", seed, n))
}
