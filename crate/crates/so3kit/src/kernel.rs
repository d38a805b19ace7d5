//! The spectral projection kernel and the Green function of the
//! Laplace–Beltrami operator on the rotation group.
//!
//! The kernel of the projection onto the eigenspaces with eigenvalue up to
//! `L(L+1)` depends only on the rotation angle `omega` between its two
//! arguments and has two equivalent radial forms:
//!
//! * closed: `K_L(omega) = C_{2L}^{(2)}(cos(omega/2))`;
//! * spectral: `K_L(omega) = sum_{l=0}^{L} (2l+1) U_{2l}(cos(omega/2))`.
//!
//! [`kernel`] implements the first and [`kernel_spectral`] the second, each
//! by its own recurrence carried in double-double arithmetic so that the two
//! routes can be compared at the 1e-10 level even where the values reach
//! `N = binomial(2L+3, 3) ~ 1.2e4`. The Green function comes as the closed
//! form `(pi - omega) cot(omega/2) - 1` ([`green_closed`]), its slowly
//! convergent spectral series ([`green_series`]), and the heat-regularized
//! diagonal ([`green_heat_diag`]) whose `t -> 0` blow-up is `2 sqrt(pi/t)`.

use std::f64::consts::PI;

use thiserror::Error;

use crate::quadrature::{adaptive_quadrature, GaussLegendre, KahanSum, QuadratureError};
use crate::special::binomial;

/// A spectral cutoff `L` together with the dimension `N = binomial(2L+3, 3)`
/// of the function space the kernel projects onto — which is also the
/// almost-sure number of points of the associated determinantal process.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KernelSpec {
    l: u32,
    n: u64,
}

impl KernelSpec {
    pub fn new(l: u32) -> Self {
        let n = binomial(2 * u64::from(l) + 3, 3);
        assert!(n <= u128::from(u64::MAX), "dimension overflows u64");
        KernelSpec { l, n: n as u64 }
    }

    pub fn l(&self) -> u32 {
        self.l
    }

    /// `N = binomial(2L+3, 3)`, the projection rank.
    pub fn n(&self) -> u64 {
        self.n
    }
}

/// Error for Green-function evaluations outside the metric's range.
#[derive(Debug, Clone, Copy, PartialEq, Error)]
#[error("green function domain is (0, pi]: got omega = {omega} (omega = 0 means coincident points)")]
pub struct GreenDomainError {
    pub omega: f64,
}

// ---------------------------------------------------------------------------
// Double-double scalars.
//
// The closed and spectral kernel routes must agree to 1e-10 while their
// values grow like L^3; plain f64 recurrences leave only a ~1.4x margin at
// L = 20, so both recurrences run in double-double (~31 significant digits)
// and round once at the end. Error-free transforms are the textbook ones.
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy)]
struct Dd {
    hi: f64,
    lo: f64,
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> Dd {
    // requires |a| >= |b|
    let s = a + b;
    Dd {
        hi: s,
        lo: b - (s - a),
    }
}

#[inline]
fn two_sum(a: f64, b: f64) -> Dd {
    let s = a + b;
    let bb = s - a;
    Dd {
        hi: s,
        lo: (a - (s - bb)) + (b - bb),
    }
}

#[inline]
fn two_prod(a: f64, b: f64) -> Dd {
    let p = a * b;
    Dd {
        hi: p,
        lo: a.mul_add(b, -p),
    }
}

impl Dd {
    #[inline]
    fn new(x: f64) -> Self {
        Dd { hi: x, lo: 0.0 }
    }

    #[inline]
    fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    #[inline]
    fn add(self, o: Dd) -> Dd {
        let s = two_sum(self.hi, o.hi);
        quick_two_sum(s.hi, s.lo + self.lo + o.lo)
    }

    #[inline]
    fn sub(self, o: Dd) -> Dd {
        self.add(Dd {
            hi: -o.hi,
            lo: -o.lo,
        })
    }

    #[inline]
    fn mul_f64(self, c: f64) -> Dd {
        let p = two_prod(self.hi, c);
        quick_two_sum(p.hi, p.lo + self.lo * c)
    }

    #[inline]
    fn div_f64(self, d: f64) -> Dd {
        let q0 = self.hi / d;
        let p = two_prod(q0, d);
        let r = two_sum(self.hi, -p.hi);
        let q1 = (r.hi + (r.lo + self.lo - p.lo)) / d;
        quick_two_sum(q0, q1)
    }

    #[inline]
    fn mul(self, o: Dd) -> Dd {
        let p = two_prod(self.hi, o.hi);
        quick_two_sum(p.hi, p.lo + self.hi * o.lo + self.lo * o.hi)
    }

    #[inline]
    fn div(self, o: Dd) -> Dd {
        let q0 = self.hi / o.hi;
        let r = self.sub(o.mul_f64(q0));
        let q1 = (r.hi + r.lo) / (o.hi + o.lo);
        quick_two_sum(q0, q1)
    }
}

/// `(P_m(x), P_m'(x))` by the Legendre recurrence at a double-double
/// abscissa; the derivative comes from `m (x P_m - P_{m-1}) / (x^2 - 1)`.
fn legendre_dd(m: usize, x: Dd) -> (Dd, Dd) {
    let mut p_prev = Dd::new(1.0);
    let mut p = x;
    for k in 2..=m {
        let kf = k as f64;
        let next = x
            .mul(p)
            .mul_f64(2.0 * kf - 1.0)
            .sub(p_prev.mul_f64(kf - 1.0))
            .div_f64(kf);
        p_prev = p;
        p = next;
    }
    let numerator = x.mul(p).sub(p_prev).mul_f64(m as f64);
    let denominator = x.mul(x).sub(Dd::new(1.0));
    (p, numerator.div(denominator))
}

/// `C_n^{(2)}` at a double-double abscissa, staying in double-double.
fn gegenbauer2_dd_arg(n: u32, x: Dd) -> Dd {
    if n == 0 {
        return Dd::new(1.0);
    }
    let mut prev = Dd::new(1.0);
    let mut cur = x.mul_f64(4.0);
    for k in 2..=n {
        let kf = f64::from(k);
        let a = x.mul(cur).mul_f64(2.0 * (kf + 1.0));
        let next = a.sub(prev.mul_f64(kf + 2.0)).div_f64(kf);
        prev = cur;
        cur = next;
    }
    cur
}

/// `int_0^1 C_n^{(2)}(x)^2 dx` with every stage — Gauss-Legendre nodes,
/// weights, and integrand evaluations — carried in double-double.
///
/// A Gauss rule of order `n + 4` is exact for the degree-`2n` integrand, but
/// with f64 nodes the result still carries `~eps * TV(C_n^2)` of round-off
/// from node representation alone (~2.5e-8 at `n = 38`), which no amount of
/// evaluation precision removes. Polishing each node with two double-double
/// Newton steps and recomputing the weights from the polished nodes pushes
/// the floor below 1e-10, so closed forms can be checked at tight absolute
/// tolerances.
pub(crate) fn gegenbauer2_sq_integral_precise(n: u32) -> f64 {
    let m = n as usize + 4;
    let seed_rule = GaussLegendre::new(m);
    let mut acc = Dd::new(0.0);
    for &node in seed_rule.nodes() {
        let mut x = Dd::new(node);
        for _ in 0..2 {
            let (p, dp) = legendre_dd(m, x);
            x = x.sub(p.div(dp));
        }
        let (_, dp) = legendre_dd(m, x);
        let one_minus_sq = Dd::new(1.0).sub(x.mul(x));
        let weight = Dd::new(2.0).div(one_minus_sq.mul(dp.mul(dp)));
        // map the node from [-1, 1] onto [0, 1]; the Jacobian is 1/2
        let t = x.add(Dd::new(1.0)).mul_f64(0.5);
        let c = gegenbauer2_dd_arg(n, t);
        acc = acc.add(weight.mul(c.mul(c)).mul_f64(0.5));
    }
    acc.to_f64()
}

/// `C_n^{(2)}(x)` by the index-2 Gegenbauer recurrence in double-double.
fn gegenbauer2_dd(n: u32, x: f64) -> f64 {
    if n == 0 {
        return 1.0;
    }
    let mut prev = Dd::new(1.0);
    let mut cur = Dd::new(4.0 * x);
    for k in 2..=n {
        let kf = f64::from(k);
        // k C_k = 2(k+1) x C_{k-1} - (k+2) C_{k-2}
        let a = cur.mul_f64(2.0 * (kf + 1.0)).mul_f64(x);
        let b = prev.mul_f64(kf + 2.0);
        let next = a.sub(b).div_f64(kf);
        prev = cur;
        cur = next;
    }
    cur.to_f64()
}

/// `sum_{l=0}^{l_max} (2l+1) U_{2l}(x)` by the Chebyshev recurrence in
/// double-double, accumulating as it goes.
fn spectral_sum_dd(l_max: u32, x: f64) -> f64 {
    let mut acc = Dd::new(1.0); // l = 0 term
    if l_max == 0 {
        return 1.0;
    }
    let two_x = 2.0 * x;
    let mut u_prev = Dd::new(1.0); // U_0
    let mut u_cur = Dd::new(two_x); // U_1
    let mut degree = 1u32;
    for l in 1..=l_max {
        while degree < 2 * l {
            let next = u_cur.mul_f64(two_x).sub(u_prev);
            u_prev = u_cur;
            u_cur = next;
            degree += 1;
        }
        acc = acc.add(u_cur.mul_f64(f64::from(2 * l + 1)));
    }
    acc.to_f64()
}

/// Radial projection kernel: `K_L(omega) = C_{2L}^{(2)}(cos(omega/2))` for
/// the rotation angle `omega` in `[0, pi]`. At `omega = 0` the value is the
/// rank `N`, exactly.
pub fn kernel(spec: &KernelSpec, omega: f64) -> f64 {
    debug_assert!((0.0..=PI).contains(&omega), "omega = {omega}");
    gegenbauer2_dd(2 * spec.l, (0.5 * omega).cos())
}

/// The same kernel through the character sum
/// `sum_{l=0}^{L} (2l+1) U_{2l}(cos(omega/2))` — an independent evaluation
/// route kept for cross-validation; see the module docs.
pub fn kernel_spectral(spec: &KernelSpec, omega: f64) -> f64 {
    debug_assert!((0.0..=PI).contains(&omega), "omega = {omega}");
    spectral_sum_dd(spec.l, (0.5 * omega).cos())
}

/// Kernel as a function of the cosine of the half-angle, for callers that
/// already hold `cos(omega/2)` (quaternion dot products) and would lose
/// accuracy round-tripping through `acos`.
pub(crate) fn kernel_cos_half(spec: &KernelSpec, x: f64) -> f64 {
    debug_assert!((-1.0..=1.0).contains(&x), "x = {x}");
    gegenbauer2_dd(2 * spec.l, x)
}

/// Green function of the Laplace–Beltrami operator in closed form:
/// `G(omega) = (pi - omega) cot(omega/2) - 1` on `(0, pi]`.
///
/// `omega <= 0` (in particular coincident points) is a domain error so that
/// energy accumulators make the plus-infinity decision explicitly rather
/// than receiving a quiet `inf`.
pub fn green_closed(omega: f64) -> Result<f64, GreenDomainError> {
    if !(omega > 0.0 && omega <= PI) {
        return Err(GreenDomainError { omega });
    }
    let (s, c) = (0.5 * omega).sin_cos();
    Ok((PI - omega) * (c / s) - 1.0)
}

/// Partial sum of the spectral series
/// `G(omega) = sum_{l>=1} (2l+1)/(l(l+1)) U_{2l}(cos(omega/2))`.
///
/// The series converges conditionally and slowly (terms decay like `1/l`);
/// it exists as a validation oracle for [`green_closed`], which is the
/// authoritative evaluation. Each character is evaluated through the exact
/// ratio `U_{2l}(cos h) = sin((2l+1)h)/sin(h)`, so the partial sum carries
/// no recurrence drift even at 1e5 terms.
pub fn green_series(omega: f64, terms: u32) -> f64 {
    assert!(
        omega > 0.0 && omega <= PI,
        "series domain is (0, pi]: got {omega}"
    );
    let h = 0.5 * omega;
    let sin_h = h.sin();
    let mut sum = KahanSum::new();
    for l in 1..=u64::from(terms) {
        let lf = l as f64;
        let u = ((2.0 * lf + 1.0) * h).sin() / sin_h;
        sum.add((2.0 * lf + 1.0) / (lf * (lf + 1.0)) * u);
    }
    sum.value()
}

/// Heat-regularized Green diagonal
/// `G_t(x, x) = sum_{l>=1} e^{-l(l+1)t} (2l+1)^2 / (l(l+1))`, summed until
/// the terms drop below 1e-16 of the running sum. Blows up like
/// `2 sqrt(pi/t)` as `t -> 0`.
pub fn green_heat_diag(t: f64) -> f64 {
    assert!(t > 0.0, "heat time must be positive: got {t}");
    let mut sum = KahanSum::new();
    let mut l: u64 = 1;
    loop {
        let lf = l as f64;
        let term = (-lf * (lf + 1.0) * t).exp() * (2.0 * lf + 1.0).powi(2) / (lf * (lf + 1.0));
        sum.add(term);
        if term < 1e-16 * sum.value() {
            return sum.value();
        }
        l += 1;
    }
}

/// Expected Green energy of the rank-`N` determinantal process:
///
/// The pair intensity of the ensemble is `N^2 - K(omega)^2`, and the Green
/// function has zero mean, so the `N^2` term integrates away and
///
/// `I(L) = -(2/pi) int_0^pi G(t) [C_{2L}^{(2)}(cos(t/2))]^2 sin^2(t/2) dt`.
///
/// Computed after the substitution `theta = t/2`, under which the `cot`
/// singularity cancels analytically:
///
/// `I(L) = -(4/pi) int_0^{pi/2} [(pi-2theta) sin(theta) cos(theta) -
/// sin^2(theta)] C_{2L}^{(2)}(cos theta)^2 d(theta)`,
///
/// leaving a smooth integrand. The quadrature tolerance scales with `L^4`,
/// the order of the value itself; the tests pin the results against the
/// exact closed form `I(L) = -L(L+1)(2L+1)(2L+3)`.
pub fn expected_green_energy_integral(spec: &KernelSpec) -> Result<f64, QuadratureError> {
    let n = 2 * spec.l;
    let raw = adaptive_quadrature(
        &|theta: f64| {
            let (s, c) = theta.sin_cos();
            let weight = (PI - 2.0 * theta) * s * c - s * s;
            let k = gegenbauer2_dd(n, c);
            weight * k * k
        },
        0.0,
        PI / 2.0,
        1e-9 * (1.0 + f64::from(spec.l).powi(4)),
        40,
    )?;
    Ok(-4.0 / PI * raw)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::{radial_integral, RadialFunction};
    use crate::special::chebyshev_u;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn spec_dimensions() {
        let dims: [(u32, u64); 5] = [(0, 1), (1, 10), (2, 35), (3, 84), (10, 1771)];
        for (l, n) in dims {
            assert_eq!(KernelSpec::new(l).n(), n, "L = {l}");
        }
    }

    #[test]
    fn kernel_diagonal_counts_dimensions_exactly() {
        for l in 0..=20u32 {
            let spec = KernelSpec::new(l);
            assert_eq!(kernel(&spec, 0.0), spec.n() as f64, "L = {l}");
            assert_eq!(kernel_spectral(&spec, 0.0), spec.n() as f64, "L = {l}");
        }
    }

    #[test]
    fn kernel_examples() {
        assert_eq!(kernel(&KernelSpec::new(1), 0.0), 10.0);
        let l0 = KernelSpec::new(0);
        for &omega in &[0.0, 0.4, 1.7, PI] {
            assert_eq!(kernel(&l0, omega), 1.0);
        }
        // independent third route: plain-f64 characters from the special
        // module, summed directly
        let spec = KernelSpec::new(3);
        let direct: f64 = (0..=3u32)
            .map(|l| f64::from(2 * l + 1) * chebyshev_u(2 * l, 0.6f64.cos()))
            .sum();
        assert_abs_diff_eq!(kernel(&spec, 1.2), direct, epsilon = 1e-10);
    }

    #[test]
    fn closed_and_spectral_routes_agree() {
        for l in 0..=20u32 {
            let spec = KernelSpec::new(l);
            let mut worst = 0.0f64;
            for i in 0..1000 {
                let omega = PI * (i as f64 + 0.5) / 1000.0;
                let diff = (kernel(&spec, omega) - kernel_spectral(&spec, omega)).abs();
                worst = worst.max(diff);
            }
            assert!(worst < 1e-10, "L = {l}: max |closed - spectral| = {worst:.3e}");
        }
    }

    #[test]
    fn kernel_radial_integral_is_one() {
        // off-diagonal mass: integrating K(x, y) over y gives the trivial
        // character's coefficient, 1, for every L
        for l in [0u32, 1, 2, 5, 10] {
            let spec = KernelSpec::new(l);
            let integral = radial_integral(&RadialFunction::new(move |t| kernel(&spec, t))).unwrap();
            assert!(
                (integral - 1.0).abs() < 1e-8,
                "L = {l}: integral = {integral}"
            );
        }
    }

    #[test]
    fn kernel_square_radial_integral_is_the_rank() {
        // reproducing property on the diagonal: int K(x,y)^2 dmu(y) = K(x,x)
        for l in [0u32, 1, 2, 5, 10] {
            let spec = KernelSpec::new(l);
            let integral =
                radial_integral(&RadialFunction::new(move |t| kernel(&spec, t).powi(2))).unwrap();
            let n = spec.n() as f64;
            assert!(
                (integral - n).abs() < 1e-8 * n,
                "L = {l}: integral = {integral}, N = {n}"
            );
        }
    }

    #[test]
    fn green_closed_examples() {
        assert_eq!(green_closed(PI).unwrap(), -1.0);
        assert_abs_diff_eq!(
            green_closed(PI / 2.0).unwrap(),
            PI / 2.0 - 1.0,
            epsilon = 1e-15
        );
        // rejected inputs
        for bad in [0.0, -1.0, PI + 0.1, f64::NAN] {
            assert!(green_closed(bad).is_err(), "omega = {bad}");
        }
    }

    #[test]
    fn green_series_examples() {
        // one term at omega = pi: (3/2) U_2(cos(pi/2)) = -3/2
        assert_abs_diff_eq!(green_series(PI, 1), -1.5, epsilon = 1e-14);
        // long partial sums approach the closed form
        assert!((green_series(PI, 10_000) - (-1.0)).abs() < 1e-3);
        assert!(
            (green_series(2.0, 10_000) - green_closed(2.0).unwrap()).abs() < 2e-3,
            "10^4-term series at omega = 2"
        );
        // truncation error at 10^5 terms is 1.489e-4 (tail ~ 1/(terms sin^2(omega/2)))
        assert!(
            (green_series(0.3, 100_000) - green_closed(0.3).unwrap()).abs() < 3e-4,
            "10^5-term series at omega = 0.3"
        );
    }

    #[test]
    fn green_series_sweeps_toward_closed_form() {
        for i in 0..20 {
            let omega = 0.5 + (PI - 0.5) * (i as f64) / 19.0;
            let diff = (green_series(omega, 10_000) - green_closed(omega).unwrap()).abs();
            assert!(diff < 2e-3, "omega = {omega}: diff = {diff:.3e}");
        }
    }

    #[test]
    fn green_profile_has_zero_mean() {
        let profile = RadialFunction::singular_at_zero(|t| green_closed(t).unwrap());
        let integral = radial_integral(&profile).unwrap();
        assert!(integral.abs() < 1e-8, "mean = {integral:.3e}");
    }

    #[test]
    fn green_blows_up_like_two_pi_over_omega() {
        // omega * G(omega) = 2pi - 3 omega + O(omega^2): the products
        // approach 2pi and the approach is monotone from below
        let mut prev_gap = f64::INFINITY;
        for k in 2..=6 {
            let omega = 10f64.powi(-k);
            let gap = (omega * green_closed(omega).unwrap() - 2.0 * PI).abs();
            assert!(gap < prev_gap, "gap not shrinking at omega = {omega}");
            prev_gap = gap;
        }
        for k in 4..=6 {
            let omega = 10f64.powi(-k);
            let gap = (omega * green_closed(omega).unwrap() - 2.0 * PI).abs();
            assert!(gap < 1e-3, "omega = {omega}: |omega G - 2pi| = {gap:.3e}");
        }
    }

    #[test]
    fn heat_diag_examples() {
        // at t = 10 the first term dominates utterly
        let first = (-20.0f64).exp() * 4.5;
        assert_abs_diff_eq!(green_heat_diag(10.0), first, epsilon = 1e-23);
        // t = 0.01 lands within 15% of the 2 sqrt(pi/t) blow-up law
        let t = 0.01;
        let ratio = green_heat_diag(t) / (2.0 * (PI / t).sqrt());
        assert!((ratio - 1.0).abs() < 0.15, "ratio = {ratio}");
    }

    #[test]
    fn heat_diag_ratio_tends_to_one() {
        // frozen independently-computed ratios at t = 10^-k
        let frozen = [
            (1, 0.7161973133),
            (2, 0.9131526151),
            (3, 0.9729970485),
            (4, 0.9915124382),
        ];
        let mut prev = 0.0;
        for (k, expected) in frozen {
            let t = 10f64.powi(-k);
            let ratio = green_heat_diag(t) / (2.0 * (PI / t).sqrt());
            assert_abs_diff_eq!(ratio, expected, epsilon = 1e-6);
            assert!(ratio > prev);
            prev = ratio;
        }
        assert!(prev > 0.985 && prev < 1.0);
    }

    #[test]
    fn expected_energy_vanishes_at_rank_one() {
        let value = expected_green_energy_integral(&KernelSpec::new(0)).unwrap();
        assert!(value.abs() < 1e-9, "I(0) = {value:.3e}");
    }

    #[test]
    fn expected_energy_matches_product_formula() {
        // I(L) = -L(L+1)(2L+1)(2L+3), derivable by expanding the kernel
        // square in characters and integrating term by term
        for l in 1..=4u32 {
            let lf = f64::from(l);
            let exact = -lf * (lf + 1.0) * (2.0 * lf + 1.0) * (2.0 * lf + 3.0);
            let quad = expected_green_energy_integral(&KernelSpec::new(l)).unwrap();
            assert!(
                (quad - exact).abs() < 1e-8 * (1.0 + lf.powi(4)),
                "L = {l}: quad = {quad}, exact = {exact}"
            );
        }
        let quad10 = expected_green_energy_integral(&KernelSpec::new(10)).unwrap();
        assert!(
            (quad10 - (-53130.0)).abs() < 1e-4,
            "I(10) = {quad10}"
        );
    }

    #[test]
    fn kernel_reproduces_itself_under_convolution() {
        // Monte Carlo check of int K(x,z) K(z,y) dmu(z) = K(x,y) for fixed
        // x, y at L = 1, using Haar-uniform z.
        use crate::rotation::{haar_rotation, rotation_angle, uniform_sample};
        let spec = KernelSpec::new(1);
        let mut rng = crate::rotation::stream_rng(77, 0);
        let x = haar_rotation(&mut rng);
        let y = haar_rotation(&mut rng);
        let zs = uniform_sample(200_000, 78);
        let mut sum = KahanSum::new();
        let mut sq = KahanSum::new();
        for z in zs.iter() {
            let v = kernel(&spec, rotation_angle(&x, z)) * kernel(&spec, rotation_angle(z, &y));
            sum.add(v);
            sq.add(v * v);
        }
        let m = zs.len() as f64;
        let mean = sum.value() / m;
        let var = (sq.value() / m - mean * mean).max(0.0);
        let se = (var / m).sqrt();
        let target = kernel(&spec, rotation_angle(&x, &y));
        assert!(
            (mean - target).abs() < 4.0 * se + 1e-9,
            "mean = {mean}, target = {target}, se = {se}"
        );
    }

    proptest! {
        #[test]
        fn kernel_peaks_on_the_diagonal(l in 0u32..12, omega in 0.0..PI) {
            let spec = KernelSpec::new(l);
            prop_assert!(kernel(&spec, omega).abs() <= spec.n() as f64 * (1.0 + 1e-12));
        }

        #[test]
        fn routes_agree_at_random_points(l in 0u32..21, omega in 0.0..PI) {
            let spec = KernelSpec::new(l);
            let diff = (kernel(&spec, omega) - kernel_spectral(&spec, omega)).abs();
            prop_assert!(diff < 1e-10, "L = {}, omega = {}: diff = {:.3e}", l, omega, diff);
        }

        #[test]
        fn green_closed_is_finite_and_bounded_below(omega in 1e-9..PI) {
            let g = green_closed(omega).unwrap();
            prop_assert!(g.is_finite());
            // G decreases from +inf to -1 on (0, pi]
            prop_assert!(g >= -1.0 - 1e-12);
        }
    }
}
