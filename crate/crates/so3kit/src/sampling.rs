//! Point-set constructions on the rotation group.
//!
//! Four samplers share the cube-to-group map from [`crate::rotation`]:
//!
//! * [`uniform_sample`] (re-exported from [`crate::rotation`]) pushes
//!   independent uniform cube triples through the map;
//! * [`arvo_sample`] does the same but draws the radial coordinate in the
//!   half-open interval `(0, 1]`, so the identity fibre is never hit;
//! * [`hardish_sample`] is fully deterministic: column `k` of the input is
//!   `(vdc_3(k), vdc_2(k), k/N)`, radical inverses in coprime bases paired
//!   with an equispaced radial grid;
//! * [`dpp_sample`] draws an exact determinantal projection ensemble by
//!   sequential rejection, conditioning the reproducing kernel on the points
//!   already selected.

use rand::Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::kernel::{kernel, KernelSpec};
use crate::pointset::{PointSet, SampleInfo};
use crate::rotation::{haar_rotation, rotation_from_cube, stream_rng, Rotation};

/// Proposal budget per selected point before the sampler reports a stall.
pub const PROPOSAL_BUDGET: u64 = 1_000_000;
/// A conditioned diagonal this far below zero is round-off gone structural.
pub const BREAKDOWN_TOL: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum SamplingError {
    #[error(
        "conditioned kernel diagonal {value:.3e} at point {step} is negative beyond round-off; \
         the conditioning has broken down"
    )]
    NumericalBreakdown { step: usize, value: f64 },
    #[error("no proposal accepted for point {step} within {budget} attempts")]
    AcceptanceStalled { step: usize, budget: u64 },
}

/// Radical inverse of `index` in the given base: the base-`base` digits of
/// `index` mirrored about the radix point. Lies in `(0, 1)` for `index >= 1`.
pub fn van_der_corput(base: u32, index: u64) -> f64 {
    assert!(base >= 2, "radical inverse needs base >= 2");
    assert!(index >= 1, "radical inverse is indexed from 1");
    let b = u64::from(base);
    let bf = f64::from(base);
    let mut remaining = index;
    let mut scale = 1.0;
    let mut value = 0.0;
    while remaining > 0 {
        scale *= bf;
        value += (remaining % b) as f64 / scale;
        remaining /= b;
    }
    value
}

/// One column of the deterministic construction: cube coordinates
/// `(x1, x2)` in `[0,1)^2` and radial index `k` in `1..=n_total`, mapped
/// through the area-preserving cube parametrization with `u = k / n_total`.
pub fn hardish_rotation(x1: f64, x2: f64, k: u64, n_total: u64) -> Rotation {
    assert!((0.0..1.0).contains(&x1), "x1 = {x1} outside [0,1)");
    assert!((0.0..1.0).contains(&x2), "x2 = {x2} outside [0,1)");
    assert!(
        k >= 1 && k <= n_total,
        "radial index {k} outside 1..={n_total}"
    );
    let u = k as f64 / n_total as f64;
    rotation_from_cube(x1, x2, u)
}

/// Deterministic low-discrepancy sample of size `n`: no seed, no RNG, the
/// same points on every call.
pub fn hardish_sample(n: u64) -> PointSet {
    assert!(n >= 1, "sample size must be positive");
    let points: Vec<Rotation> = (1..=n)
        .into_par_iter()
        .map(|k| hardish_rotation(van_der_corput(3, k), van_der_corput(2, k), k, n))
        .collect();
    PointSet::new(points, SampleInfo::deterministic("hardish", n as usize))
}

/// Independent uniform sample with the radial coordinate drawn in `(0, 1]`
/// (one minus a uniform variate), so `u = 0` — where the cube map's
/// Householder direction degenerates — cannot occur.
pub fn arvo_sample(n: u64, seed: u64) -> PointSet {
    assert!(n >= 1, "sample size must be positive");
    let points: Vec<Rotation> = (0..n)
        .into_par_iter()
        .map(|index| {
            let mut rng = stream_rng(seed, index);
            let x1: f64 = rng.random();
            let x2: f64 = rng.random();
            let u = 1.0 - rng.random::<f64>();
            rotation_from_cube(x1, x2, u)
        })
        .collect();
    PointSet::new(points, SampleInfo::seeded("arvo", seed, n as usize))
}

/// The reproducing kernel conditioned on a growing list of selected points.
///
/// Selected points are held as rows of an incremental Cholesky factor of
/// their Gram matrix, so conditioning a probe costs one forward substitution:
/// with feature vector `f` solving `L f = (K(x, x_i))_i`, the conditioned
/// diagonal is `K(x,x) - |f|^2` and each accepted point appends its own
/// feature vector as the next Cholesky row.
pub struct ConditionedKernel {
    spec: KernelSpec,
    selected: Vec<Rotation>,
    chol: Vec<Vec<f64>>,
}

impl ConditionedKernel {
    pub fn new(spec: KernelSpec) -> Self {
        ConditionedKernel {
            spec,
            selected: Vec::new(),
            chol: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.selected.len()
    }

    pub fn is_empty(&self) -> bool {
        self.selected.is_empty()
    }

    pub fn selected(&self) -> &[Rotation] {
        &self.selected
    }

    pub fn spec(&self) -> &KernelSpec {
        &self.spec
    }

    fn features(&self, x: &Rotation) -> Vec<f64> {
        let mut f = Vec::with_capacity(self.selected.len());
        for (j, point) in self.selected.iter().enumerate() {
            let omega = crate::rotation::rotation_angle(x, point);
            let mut e = kernel(&self.spec, omega);
            let row = &self.chol[j];
            for (i, fi) in f.iter().enumerate() {
                e -= row[i] * fi;
            }
            f.push(e / row[j]);
        }
        f
    }

    /// Diagonal of the conditioned kernel at `x`. Starts at the full rank
    /// `N`, shrinks toward zero near already-selected points, and can dip
    /// slightly negative through round-off.
    pub fn diag(&self, x: &Rotation) -> f64 {
        let f = self.features(x);
        let norm_sq: f64 = f.iter().map(|v| v * v).sum();
        self.spec.n() as f64 - norm_sq
    }

    /// Conditions on `x`, consuming one Cholesky rank. The caller supplies
    /// the diagonal it already computed for the acceptance decision; the
    /// pivot is `sqrt(diag)`, so `diag` must be positive.
    fn push(&mut self, x: Rotation, diag: f64) {
        debug_assert!(diag > 0.0, "cannot pivot on diag = {diag}");
        let mut row = self.features(&x);
        row.push(diag.sqrt());
        self.chol.push(row);
        self.selected.push(x);
    }
}

/// Draws an exact sample of the projection determinantal ensemble attached
/// to `spec`: always exactly `N = spec.n()` points.
///
/// Point `k+1` is proposed from the uniform distribution and accepted with
/// probability `diag_k(x) / N`, where `diag_k` is the kernel diagonal
/// conditioned on the `k` points already chosen. The conditioned diagonal
/// never exceeds the full rank `N`, so this is a valid rejection scheme for
/// the normalized conditional density `diag_k / (N - k)`; dividing by
/// `N - k` directly would push the ratio above one near the start of the
/// run, which is why the constant envelope `N` is used instead.
pub fn dpp_sample(spec: &KernelSpec, seed: u64) -> Result<PointSet, SamplingError> {
    let n = spec.n() as usize;
    let n_f = spec.n() as f64;
    let mut rng = stream_rng(seed, 0);
    let mut state = ConditionedKernel::new(*spec);

    for step in 0..n {
        let mut proposals: u64 = 0;
        loop {
            proposals += 1;
            if proposals > PROPOSAL_BUDGET {
                return Err(SamplingError::AcceptanceStalled {
                    step,
                    budget: PROPOSAL_BUDGET,
                });
            }
            let candidate = haar_rotation(&mut rng);
            let diag = state.diag(&candidate);
            if diag < -BREAKDOWN_TOL {
                return Err(SamplingError::NumericalBreakdown { step, value: diag });
            }
            // acceptance draw happens whether or not diag was clipped, so
            // the consumed randomness is a fixed function of the proposals
            let accept = rng.random::<f64>() * n_f < diag;
            if accept {
                state.push(candidate, diag);
                break;
            }
        }
    }

    let info = SampleInfo::seeded("dpp", seed, n).with_level(spec.l());
    Ok(PointSet::new(state.selected, info))
}

/// Mixes an experiment-level seed with a run index into an independent
/// stream seed (the splitmix64 finalizer, which is a bijection for each
/// fixed `index`).
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed ^ index.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
