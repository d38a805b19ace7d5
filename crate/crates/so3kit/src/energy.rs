//! Pair energies, their theoretical growth laws, and ball-count statistics.
//!
//! Energies are sums over ordered pairs of a radial kernel: inverse powers
//! of the chordal (Frobenius) distance for Riesz energies, the zero-mean
//! Laplacian kernel for the Green energy. Summation is canonicalized — the
//! points are traversed in a sorted order independent of input order — so a
//! permuted point set produces the bit-identical energy, and row sums are
//! compensated and reduced in a fixed order so the result is independent of
//! the thread count.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::f64::consts::PI;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::kernel::{green_closed, kernel_cos_half, KernelSpec};
use crate::pointset::PointSet;
use crate::quadrature::{radial_integral, KahanSum, QuadratureError, RadialFunction};
use crate::rotation::{ball_volume, frobenius_distance, rotation_angle, stream_rng, Rotation};
use crate::sampling::{dpp_sample, derive_seed};

/// Scaling coefficient of the Green energy lower bound: `-3 pi^{1/3}`.
pub const GREEN_LOWER_COEFF: f64 = -4.393775662684569;
/// Scaling coefficient of the Green energy upper bound: `-4 (3/4)^{4/3}`.
pub const GREEN_UPPER_COEFF: f64 = -2.7256808892482094;
/// Constant shift in the expected Riesz-3 law: `3 gamma + log 384 - 21/4`.
pub const RIESZ3_LOG_SHIFT: f64 = 2.432289547292326;
/// Order-`N^{4/3}` coefficient of the optimal Riesz-1 energy:
/// `-(sqrt 2 / pi) (3/4)^{4/3}`.
pub const RIESZ1_SUBLEADING_COEFF: f64 = -0.30674687215347163;
/// Order-`N^{5/3}` coefficient of the optimal Riesz-2 energy:
/// `-(4/15) (3/4)^{5/3}`.
pub const RIESZ2_SUBLEADING_COEFF: f64 = -0.16509636244473133;
/// Monte Carlo budget for the exact ball-count variance double integral.
pub const EXACT_VARIANCE_PAIRS: u64 = 10_000_000;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EnergyError {
    #[error("points {i} and {j} coincide: pair energy diverges")]
    CoincidentPoints { i: usize, j: usize },
}

/// Sorted traversal order: lexicographic over the nine matrix entries.
fn canonical_order(points: &PointSet) -> Vec<usize> {
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&a, &b| {
        let (ea, eb) = (points[a].entries(), points[b].entries());
        for i in 0..3 {
            for j in 0..3 {
                match ea[i][j].total_cmp(&eb[i][j]) {
                    Ordering::Equal => continue,
                    other => return other,
                }
            }
        }
        Ordering::Equal
    });
    order
}

/// Sum of `f` over ordered pairs, in canonical order: rows are summed with
/// compensation, reduced sequentially, then doubled. `f` returning `None`
/// marks a coincident pair.
fn pair_sum<F>(points: &PointSet, f: F) -> Result<f64, EnergyError>
where
    F: Fn(&Rotation, &Rotation) -> Option<f64> + Sync,
{
    let n = points.len();
    let order = canonical_order(points);
    let rows: Vec<Result<f64, (usize, usize)>> = (0..n)
        .into_par_iter()
        .map(|a| {
            let pa = &points[order[a]];
            let mut sum = KahanSum::new();
            for b in (a + 1)..n {
                match f(pa, &points[order[b]]) {
                    Some(v) => sum.add(v),
                    None => return Err((order[a], order[b])),
                }
            }
            Ok(sum.value())
        })
        .collect();
    let mut total = KahanSum::new();
    for row in rows {
        match row {
            Ok(v) => total.add(v),
            Err((a, b)) => {
                let (i, j) = if a < b { (a, b) } else { (b, a) };
                return Err(EnergyError::CoincidentPoints { i, j });
            }
        }
    }
    Ok(2.0 * total.value())
}

/// Riesz `s`-energy: the sum of `d^{-s}` over ordered pairs, `d` the
/// Frobenius distance. Defined here for `0 < s <= 3`.
pub fn riesz_energy(points: &PointSet, s: f64) -> Result<f64, EnergyError> {
    assert!(
        s.is_finite() && s > 0.0 && s <= 3.0,
        "riesz exponent {s} outside (0, 3]"
    );
    pair_sum(points, move |p, q| {
        let d = frobenius_distance(p, q);
        if d == 0.0 {
            return None;
        }
        Some(if s == 1.0 {
            d.recip()
        } else if s == 2.0 {
            (d * d).recip()
        } else if s == 3.0 {
            (d * d * d).recip()
        } else {
            d.powf(-s)
        })
    })
}

/// Green energy: the sum of the zero-mean Laplacian kernel over ordered
/// pairs. Negative values mean the set is better-than-random.
pub fn green_energy(points: &PointSet) -> Result<f64, EnergyError> {
    pair_sum(points, |p, q| {
        let omega = rotation_angle(p, q);
        if omega <= 0.0 {
            return None;
        }
        Some(green_closed(omega).expect("angle is in (0, pi]"))
    })
}

/// The proved sandwich for the minimal Green energy at size `n`:
/// both bounds scale as `n^{4/3}`.
pub fn green_energy_bounds(n: u64) -> (f64, f64) {
    let n43 = (n as f64).powf(4.0 / 3.0);
    (GREEN_LOWER_COEFF * n43, GREEN_UPPER_COEFF * n43)
}

/// Expected Riesz-3 energy of the determinantal ensemble with `n` points:
/// `[n^2 log n + (3 gamma + log 384 - 21/4) n^2] / (12 sqrt 2 pi)`.
pub fn riesz3_dpp_expectation(n: u64) -> f64 {
    assert!(n >= 1);
    let nf = n as f64;
    (nf * nf * nf.ln() + RIESZ3_LOG_SHIFT * nf * nf) / (12.0 * 2.0f64.sqrt() * PI)
}

/// Energy of the uniform measure against the Riesz `s` kernel, `0 < s < 3`:
/// the almost-sure limit of `E_s / (N(N-1))` for iid uniform points.
pub fn continuous_riesz(s: f64) -> f64 {
    assert!(
        s.is_finite() && s > 0.0 && s < 3.0,
        "continuous riesz energy diverges outside (0, 3)"
    );
    2.0 / (8.0f64.powf(0.5 * s) * PI) * crate::special::beta_fn(0.5 * (3.0 - s), 0.5)
}

/// Second-order coefficient of the minimal Riesz energy, defined for
/// `s = 1` (order `n^{4/3}`) and `s = 2` (order `n^{5/3}`).
pub fn riesz_subleading(s: u32, n: u64) -> f64 {
    let nf = n as f64;
    match s {
        1 => RIESZ1_SUBLEADING_COEFF * nf.powf(4.0 / 3.0),
        2 => RIESZ2_SUBLEADING_COEFF * nf.powf(5.0 / 3.0),
        _ => panic!("subleading coefficient is defined for s in {{1, 2}}, got {s}"),
    }
}

/// Number of points within geodesic angle `eps` of `center` (open ball).
pub fn ball_count(points: &PointSet, center: &Rotation, eps: f64) -> usize {
    assert!(eps > 0.0 && eps <= PI, "ball radius {eps} outside (0, pi]");
    points
        .iter()
        .filter(|p| rotation_angle(p, center) < eps)
        .count()
}

/// Expected value of `sum_{i != j} f(omega(x_i, x_j))` under the
/// determinantal ensemble: the radial integral of
/// `f(t) (N^2 - K(t)^2)` against the group's radial density. Set
/// `singular_at_zero` when `f` blows up at the origin (the determinantal
/// pair correlation vanishes there quadratically, which keeps the product
/// integrable for kernels up to the critical Riesz exponent).
pub fn dpp_pair_expectation<F>(
    spec: &KernelSpec,
    f: F,
    singular_at_zero: bool,
) -> Result<f64, QuadratureError>
where
    F: Fn(f64) -> f64,
{
    let n2 = (spec.n() as f64) * (spec.n() as f64);
    let g = move |t: f64| {
        let k = kernel_cos_half(spec, (0.5 * t).cos());
        f(t) * (n2 - k * k)
    };
    if singular_at_zero {
        radial_integral(&RadialFunction::singular_at_zero(g))
    } else {
        radial_integral(&RadialFunction::new(g))
    }
}

/// Two-sided Kolmogorov–Smirnov statistic of `samples` against the
/// continuous CDF `cdf`. Sorts the slice in place.
pub fn ks_statistic<F>(samples: &mut [f64], cdf: F) -> f64
where
    F: Fn(f64) -> f64,
{
    assert!(!samples.is_empty());
    samples.sort_by(f64::total_cmp);
    let n = samples.len() as f64;
    let mut d: f64 = 0.0;
    for (i, x) in samples.iter().enumerate() {
        let f = cdf(*x);
        d = d.max(f - i as f64 / n);
        d = d.max((i as f64 + 1.0) / n - f);
    }
    d
}

/// Two-sided Kolmogorov–Smirnov critical value at level `alpha`:
/// `sqrt(-ln(alpha/2) / (2n))`.
pub fn ks_critical(alpha: f64, n: usize) -> f64 {
    assert!(alpha > 0.0 && alpha < 1.0);
    assert!(n > 0);
    (-(0.5 * alpha).ln() / (2.0 * n as f64)).sqrt()
}

/// Draws a rotation conditioned on the ball of geodesic radius `eps` around
/// the identity: angle with density proportional to `sin^2(t/2)` on
/// `[0, eps]` by rejection, axis uniform on the sphere. Returns the cosine
/// of the half-angle and the axis.
fn ball_point<R: Rng>(rng: &mut R, eps: f64, envelope: f64) -> (f64, [f64; 3]) {
    let angle = loop {
        let t: f64 = rng.random::<f64>() * eps;
        let h = (0.5 * t).sin();
        if rng.random::<f64>() * envelope < h * h {
            break t;
        }
    };
    let axis: [f64; 3] = rng.sample(rand_distr::UnitSphere);
    ((0.5 * angle).cos(), axis)
}

/// Exact ball-count variance of the determinantal ensemble on the ball of
/// radius `eps`: `N mu - iint_{B x B} K^2`, with the double integral
/// estimated by Monte Carlo over `pairs` independent pairs. Returns the
/// variance and the Monte Carlo standard error. The result is identical
/// for every thread count (fixed chunking, one RNG stream per chunk).
pub fn exact_ball_variance(spec: &KernelSpec, eps: f64, pairs: u64, seed: u64) -> (f64, f64) {
    assert!(eps > 0.0 && eps < PI, "ball radius {eps} outside (0, pi)");
    assert!(pairs >= 1_000, "need at least 1000 pairs");
    let mu = ball_volume(eps);
    let half = (0.5 * eps).sin();
    let envelope = half * half;
    const CHUNKS: u64 = 4096;
    let chunks = CHUNKS.min(pairs);

    let partial: Vec<(f64, f64)> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let count = pairs / chunks + u64::from(c < pairs % chunks);
            let mut rng = stream_rng(seed, c);
            let mut sum = KahanSum::new();
            let mut sum_sq = KahanSum::new();
            for _ in 0..count {
                let (ca, ua) = ball_point(&mut rng, eps, envelope);
                let (cb, ub) = ball_point(&mut rng, eps, envelope);
                let dot = ua[0] * ub[0] + ua[1] * ub[1] + ua[2] * ub[2];
                let sa = (1.0 - ca * ca).max(0.0).sqrt();
                let sb = (1.0 - cb * cb).max(0.0).sqrt();
                // cosine of the relative half-angle, sign-folded
                let q = (ca * cb + sa * sb * dot).abs().min(1.0);
                let k = kernel_cos_half(spec, q);
                let v = k * k;
                sum.add(v);
                sum_sq.add(v * v);
            }
            (sum.value(), sum_sq.value())
        })
        .collect();

    let mut total = KahanSum::new();
    let mut total_sq = KahanSum::new();
    for (s, s2) in partial {
        total.add(s);
        total_sq.add(s2);
    }
    let m = pairs as f64;
    let mean = total.value() / m;
    let var_v = (total_sq.value() / m - mean * mean).max(0.0) * m / (m - 1.0);
    let value = spec.n() as f64 * mu - mu * mu * mean;
    let se = mu * mu * (var_v / m).sqrt();
    (value, se)
}

/// One ball-count experiment: per-run counts, their empirical moments, and
/// the three theoretical reference values (mean, iid variance, exact
/// determinantal variance).
#[derive(Debug, Clone, Serialize)]
pub struct BallCountExperiment {
    #[serde(rename = "L")]
    pub l: u32,
    pub eps: f64,
    pub runs: u32,
    pub n: u64,
    pub seed: u64,
    pub counts: Vec<u32>,
    pub empirical_mean: f64,
    pub empirical_variance: f64,
    /// `N mu(B)`: the mean ball count of any marginally-uniform sampler.
    pub expected_mean: f64,
    /// `N mu (1 - mu)`: binomial variance of iid uniform points.
    pub iid_variance: f64,
    pub exact_variance: f64,
    pub exact_variance_se: f64,
    /// Empirical variance over `N^{2/3} log N`; absent at rank one.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scaled_variance: Option<f64>,
}

/// Repeatedly draws the determinantal ensemble at level `l`, counts points
/// in the ball of radius `eps` around the identity, and compares the count
/// fluctuations against the iid baseline and the exact variance.
pub fn variance_experiment(l: u32, eps: f64, runs: u32, seed: u64) -> BallCountExperiment {
    assert!(l <= 3, "experiment grid covers levels 0 through 3");
    assert!(
        eps > 0.0 && eps < PI / 2.0,
        "ball radius {eps} outside (0, pi/2)"
    );
    assert!(runs >= 100, "need at least 100 runs, got {runs}");

    let spec = KernelSpec::new(l);
    let center = Rotation::identity();
    let counts: Vec<u32> = (0..u64::from(runs))
        .into_par_iter()
        .map(|run| {
            let set = dpp_sample(&spec, derive_seed(seed, run)).expect("determinantal sampler");
            ball_count(&set, &center, eps) as u32
        })
        .collect();

    let m = f64::from(runs);
    let mean = counts.iter().map(|&c| f64::from(c)).sum::<f64>() / m;
    let empirical_variance = counts
        .iter()
        .map(|&c| (f64::from(c) - mean).powi(2))
        .sum::<f64>()
        / (m - 1.0);

    let mu = ball_volume(eps);
    let nf = spec.n() as f64;
    let (exact_variance, exact_variance_se) =
        exact_ball_variance(&spec, eps, EXACT_VARIANCE_PAIRS, derive_seed(seed, u64::MAX));
    let scaled_variance = if spec.n() > 1 {
        Some(empirical_variance / (nf.powf(2.0 / 3.0) * nf.ln()))
    } else {
        None
    };

    BallCountExperiment {
        l,
        eps,
        runs,
        n: spec.n(),
        seed,
        counts,
        empirical_mean: mean,
        empirical_variance,
        expected_mean: nf * mu,
        iid_variance: nf * mu * (1.0 - mu),
        exact_variance,
        exact_variance_se,
        scaled_variance,
    }
}

/// Map key for a Riesz exponent: integers print bare (`"2"`), others as-is.
pub fn s_key(s: f64) -> String {
    if s == s.trunc() && s.abs() < 1e6 {
        format!("{}", s as i64)
    } else {
        format!("{s}")
    }
}

/// Theoretical reference values at a given size (and optionally level).
#[derive(Debug, Clone, Serialize)]
pub struct BoundsReport {
    pub n: u64,
    #[serde(rename = "L", skip_serializing_if = "Option::is_none")]
    pub l: Option<u32>,
    pub green_lower: f64,
    pub green_upper: f64,
    pub riesz3_dpp_expectation: f64,
    pub continuous_riesz: BTreeMap<String, f64>,
    pub riesz_subleading: BTreeMap<String, f64>,
}

impl BoundsReport {
    pub fn for_size(n: u64) -> Self {
        let (green_lower, green_upper) = green_energy_bounds(n);
        let mut continuous = BTreeMap::new();
        let mut subleading = BTreeMap::new();
        for s in [1u32, 2] {
            continuous.insert(s_key(f64::from(s)), continuous_riesz(f64::from(s)));
            subleading.insert(s_key(f64::from(s)), riesz_subleading(s, n));
        }
        BoundsReport {
            n,
            l: None,
            green_lower,
            green_upper,
            riesz3_dpp_expectation: riesz3_dpp_expectation(n),
            continuous_riesz: continuous,
            riesz_subleading: subleading,
        }
    }

    pub fn for_level(l: u32) -> Self {
        let spec = KernelSpec::new(l);
        let mut report = Self::for_size(spec.n());
        report.l = Some(l);
        report
    }
}

/// Energies of one point set next to the theory at its size.
#[derive(Debug, Clone, Serialize)]
pub struct EnergyReport {
    pub n: usize,
    pub sampler: String,
    pub seed: Option<u64>,
    pub riesz: BTreeMap<String, f64>,
    pub green: Option<f64>,
    pub bounds: BoundsReport,
    pub runtime_ms: u64,
}
