//! Chebyshev and Gegenbauer polynomials, digamma at half-integers, Beta, and
//! the L2-norm identities they satisfy.
//!
//! Everything here is scalar and exactly checkable: polynomial values come
//! from three-term recurrences (expanded monomial coefficients of
//! `C_n^{(2)}` cancel catastrophically past degree ~30), the digamma values
//! at half-integers are finite sums `psi(n+1/2) = sum_{k=1}^n 2/(2k-1) -
//! gamma - log 4`, and the integral identities are verified against
//! quadrature in the tests and in the `verify` suite.

use crate::quadrature::{adaptive_quadrature, GaussLegendre, KahanSum, QuadratureError};

/// Euler-Mascheroni constant, to more digits than an f64 can hold.
pub const EULER_GAMMA: f64 = 0.57721566490153286060651209008240243;

/// Chebyshev polynomial of the second kind, `U_n(x)`, by the forward
/// recurrence `U_{n+1} = 2x U_n - U_{n-1}`. For `x = cos t` this equals
/// `sin((n+1)t)/sin t`.
pub fn chebyshev_u(n: u32, x: f64) -> f64 {
    if n == 0 {
        return 1.0;
    }
    let mut prev = 1.0;
    let mut cur = 2.0 * x;
    for _ in 1..n {
        let next = (2.0 * x).mul_add(cur, -prev);
        prev = cur;
        cur = next;
    }
    cur
}

/// Chebyshev polynomial of the first kind, `T_n(x)`, by the same recurrence
/// with `T_1 = x`.
pub fn chebyshev_t(n: u32, x: f64) -> f64 {
    if n == 0 {
        return 1.0;
    }
    let mut prev = 1.0;
    let mut cur = x;
    for _ in 1..n {
        let next = (2.0 * x).mul_add(cur, -prev);
        prev = cur;
        cur = next;
    }
    cur
}

/// Gegenbauer (ultraspherical) polynomial with integer index `lambda >= 1`,
/// by the recurrence `n C_n = 2(n+lambda-1) x C_{n-1} - (n+2lambda-2)
/// C_{n-2}` with `C_0 = 1`, `C_1 = 2 lambda x`.
pub(crate) fn gegenbauer_general(lambda: u32, n: u32, x: f64) -> f64 {
    debug_assert!(lambda >= 1);
    if n == 0 {
        return 1.0;
    }
    let lam = f64::from(lambda);
    let mut prev = 1.0;
    let mut cur = 2.0 * lam * x;
    for k in 2..=n {
        let kf = f64::from(k);
        let a = 2.0 * (kf + lam - 1.0) * x;
        let b = kf + 2.0 * lam - 2.0;
        let next = (a.mul_add(cur, -(b * prev))) / kf;
        prev = cur;
        cur = next;
    }
    cur
}

/// Gegenbauer polynomial of index 2, `C_n^{(2)}(x)`. At `x = 1` the value is
/// `binomial(n+3, 3)`, the dimension count behind the projection kernel.
pub fn gegenbauer2(n: u32, x: f64) -> f64 {
    gegenbauer_general(2, n, x)
}

/// Exact binomial coefficient in integer arithmetic.
///
/// Panics on overflow (u128 holds every value this crate asks for; the
/// largest in practice is `binomial(2L+3, 3)` at small `L`).
pub fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc
            .checked_mul(u128::from(n - i))
            .expect("binomial overflow");
        acc /= u128::from(i + 1); // exact: product of j consecutive integers is divisible by j!
    }
    acc
}

/// Harmonic number `H_n = sum_{k=1}^n 1/k`, accumulated smallest-first.
pub fn harmonic(n: u64) -> f64 {
    let mut sum = KahanSum::new();
    for k in (1..=n).rev() {
        sum.add(1.0 / k as f64);
    }
    sum.value()
}

/// Digamma at a positive integer: `psi(n) = H_{n-1} - gamma`.
pub fn digamma_int(n: u64) -> f64 {
    assert!(n >= 1, "digamma_int needs n >= 1");
    harmonic(n - 1) - EULER_GAMMA
}

/// Digamma at a half-integer:
/// `psi(n + 1/2) = sum_{k=1}^n 2/(2k-1) - gamma - log 4`.
pub fn digamma_half(n: u64) -> f64 {
    odd_reciprocal_sum(n) - EULER_GAMMA - 4.0f64.ln()
}

/// `sum_{k=1}^n 2/(2k-1)`, the finite part of `psi(n+1/2) + gamma + log 4`.
/// The identity evaluations use this form directly to avoid cancelling the
/// constants back out.
fn odd_reciprocal_sum(n: u64) -> f64 {
    let mut sum = KahanSum::new();
    for k in (1..=n).rev() {
        sum.add(2.0 / (2 * k - 1) as f64);
    }
    sum.value()
}

/// `int_0^1 U_n(x)^2 dx = sum_{k=0}^n 1/(2k+1)`, the odd-harmonic partial
/// sum; equals `(psi(n+3/2) + gamma + log 4)/2`.
pub fn u_sq_integral(n: u32) -> f64 {
    0.5 * odd_reciprocal_sum(u64::from(n) + 1)
}

/// Natural log of the Gamma function for positive arguments (Lanczos, g = 7,
/// 9 terms; relative accuracy well below 1e-13 on the range used here).
fn ln_gamma(x: f64) -> f64 {
    debug_assert!(x > 0.0);
    const G: f64 = 7.0;
    #[allow(clippy::excessive_precision)] // published coefficient digits kept verbatim
    const COEFFS: [f64; 9] = [
        0.999_999_999_999_809_93,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_13,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_571_6e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        // reflection keeps the series argument >= 0.5
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut series = COEFFS[0];
    for (i, &c) in COEFFS.iter().enumerate().skip(1) {
        series += c / (x + i as f64);
    }
    let t = x + G + 0.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + series.ln()
}

/// Beta function `B(a, b) = Gamma(a)Gamma(b)/Gamma(a+b)` via log-gamma.
pub fn beta_fn(a: f64, b: f64) -> f64 {
    assert!(a > 0.0 && b > 0.0, "beta_fn needs positive arguments");
    (ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b)).exp()
}

/// Coefficient table of the cosine expansion of a squared Gegenbauer
/// polynomial:
///
/// `C_n^{(lambda)}(cos t)^2 = 2 sum'_{r=0}^n cos(2rt) sum_{u=0}^{n-r}
/// c_{r+u,u}`, where the primed sum halves its `r = 0` term and
///
/// `c_{j,k} = Gamma(lambda+j)Gamma(lambda+n-j)Gamma(lambda+k)Gamma(lambda+n-k)
/// / (Gamma(lambda)^4 j!(n-j)!k!(n-k)!)`.
///
/// For integer `lambda` each factor is a binomial coefficient, and for
/// `lambda = 2` the whole thing collapses to
/// `(j+1)(n-j+1)(k+1)(n-k+1)`, which is used directly.
#[derive(Debug, Clone)]
pub struct CosineSquareExpansion {
    n: u32,
    lambda: u32,
    coeffs: Vec<Vec<f64>>,
    /// `tail[r] = sum_{u=0}^{n-r} c_{r+u,u}`, the weight of `cos(2rt)`.
    tail: Vec<f64>,
}

/// Builds the `c_{j,k}` table for degree `n` and integer index `lambda >= 1`.
/// Entries are computed exactly for moderate `n` and in log-space above
/// `n = 60`, where the binomial products would lose integer exactness.
pub fn cosine_square_coeffs(n: u32, lambda: u32) -> CosineSquareExpansion {
    assert!(lambda >= 1, "index must be a positive integer");
    let nn = n as usize;
    let factor: Vec<f64> = (0..=nn)
        .map(|j| {
            let j = j as u64;
            let n = u64::from(n);
            let lam = u64::from(lambda);
            if n > 60 {
                (ln_binomial(lam - 1 + j, j) + ln_binomial(lam - 1 + n - j, n - j)).exp()
            } else if lam == 2 {
                // closed form: the two binomials are just (j+1)(n-j+1)
                ((j + 1) * (n - j + 1)) as f64
            } else {
                (binomial(lam - 1 + j, j) * binomial(lam - 1 + n - j, n - j)) as f64
            }
        })
        .collect();
    let coeffs: Vec<Vec<f64>> = (0..=nn)
        .map(|j| (0..=nn).map(|k| factor[j] * factor[k]).collect())
        .collect();
    let tail: Vec<f64> = (0..=nn)
        .map(|r| {
            let mut sum = KahanSum::new();
            for u in 0..=(nn - r) {
                sum.add(coeffs[r + u][u]);
            }
            sum.value()
        })
        .collect();
    CosineSquareExpansion {
        n,
        lambda,
        coeffs,
        tail,
    }
}

fn ln_binomial(n: u64, k: u64) -> f64 {
    if k > n {
        return f64::NEG_INFINITY;
    }
    ln_gamma(n as f64 + 1.0) - ln_gamma(k as f64 + 1.0) - ln_gamma((n - k) as f64 + 1.0)
}

impl CosineSquareExpansion {
    pub fn degree(&self) -> u32 {
        self.n
    }

    pub fn lambda(&self) -> u32 {
        self.lambda
    }

    /// Table entry `c_{j,k}`.
    pub fn coeff(&self, j: usize, k: usize) -> f64 {
        self.coeffs[j][k]
    }

    /// Weight of `cos(2rt)` in the expansion, `sum_{u=0}^{n-r} c_{r+u,u}`.
    pub fn cosine_weight(&self, r: usize) -> f64 {
        self.tail[r]
    }

    /// Evaluates `C_n^{(lambda)}(cos t)^2` through the cosine expansion;
    /// cross-checked in tests against squaring the recurrence value.
    pub fn eval_square(&self, t: f64) -> f64 {
        let mut sum = KahanSum::new();
        sum.add(self.tail[0]); // r = 0 enters at half weight, times the overall 2
        for (r, &w) in self.tail.iter().enumerate().skip(1) {
            sum.add(2.0 * w * (2.0 * r as f64 * t).cos());
        }
        sum.value()
    }

    /// Largest violation of the three index symmetries the table must
    /// satisfy: `c_{j,k} = c_{k,j}`, `c_{j,k} = c_{n-j,k}` for `j >= k`, and
    /// `c_{j,k} = c_{j+r,k+r}` when `j + k = n - r`.
    pub fn symmetry_defect(&self) -> f64 {
        let n = self.n as usize;
        let mut worst: f64 = 0.0;
        let rel = |a: f64, b: f64| (a - b).abs() / a.abs().max(b.abs()).max(1.0);
        for j in 0..=n {
            for k in 0..=n {
                worst = worst.max(rel(self.coeffs[j][k], self.coeffs[k][j]));
                if j >= k {
                    worst = worst.max(rel(self.coeffs[j][k], self.coeffs[n - j][k]));
                }
                if j + k <= n {
                    let r = n - j - k;
                    if j + r <= n && k + r <= n {
                        worst = worst.max(rel(self.coeffs[j][k], self.coeffs[j + r][k + r]));
                    }
                }
            }
        }
        worst
    }
}

/// Both sides of the weighted L2 identity
/// `int_0^1 (x^2 - 1) C_{n-2}^{(2)}(x)^2 dx
///    = -(2n^2 - 1)/16 * (psi(n+1/2) + gamma + log 4) + n^2/8`
/// for `n >= 2`: the left side by adaptive quadrature, the right side by the
/// digamma finite sum. Returned as `(lhs, rhs)` so callers can report the
/// discrepancy instead of a bare boolean.
pub fn gegenbauer_identity_check(n: u32) -> Result<(f64, f64), QuadratureError> {
    assert!(n >= 2, "identity is stated for degree n >= 2");
    // The integrand is a polynomial of degree 2(n-2)+2, so a fixed rule of
    // order n+4 integrates it exactly; accuracy is then limited only by the
    // recurrence round-off in the evaluations.
    let rule = GaussLegendre::new(n as usize + 4);
    let lhs = rule.integrate(0.0, 1.0, |x| (x * x - 1.0) * gegenbauer2(n - 2, x).powi(2));
    if !lhs.is_finite() {
        return Err(QuadratureError::NotFinite { at: 0.5 });
    }
    let nf = f64::from(n);
    let psi_term = odd_reciprocal_sum(u64::from(n));
    let rhs = -(2.0 * nf * nf - 1.0) / 16.0 * psi_term + nf * nf / 8.0;
    Ok((lhs, rhs))
}

/// Closed form of the plain L2 norm
/// `int_0^1 C_{n-2}^{(2)}(x)^2 dx
///    = n^4/16 + (4n^2 - 1)/64 * (psi(n+1/2) + gamma + log 4) - 5n^2/32`
/// for `n >= 2`; the tests compare it against direct quadrature.
pub fn gegenbauer_l2(n: u32) -> f64 {
    assert!(n >= 2, "closed form is stated for degree n >= 2");
    let nf = f64::from(n);
    let psi_term = odd_reciprocal_sum(u64::from(n));
    nf.powi(4) / 16.0 + (4.0 * nf * nf - 1.0) / 64.0 * psi_term - 5.0 * nf * nf / 32.0
}

/// Independent quadrature of `int_0^1 C_{n-2}^{(2)}(x)^2 dx`, the left side
/// of the closed form in [`gegenbauer_l2`], carried in double-double from
/// the node solve through the final sum. An f64 rule bottoms out at
/// `~eps * TV(C^2)` of node-representation noise (2.5e-8 at `n = 40`, above
/// an absolute 1e-8 comparison floor); the extended-precision rule sits
/// below 1e-10.
pub fn gegenbauer_l2_quadrature(n: u32) -> f64 {
    assert!(n >= 2, "the integrand is stated for degree n >= 2");
    crate::kernel::gegenbauer2_sq_integral_precise(n - 2)
}

/// Quadrature of `int_{-1}^{1} C_{2L}^{(2)}(t)^2 sqrt(1-t) (1+t)^{3/2} dt`
/// after the substitution `t = cos(theta)`, which turns the endpoint
/// square-root weights into smooth half-angle factors:
/// `8 int_0^pi C(cos theta)^2 sin^2(theta/2) cos^4(theta/2) d(theta)`.
/// The closed-form value is `(pi/2) binomial(2L+3, 3)`.
pub fn gegenbauer_weighted_sq_integral(l: u32) -> Result<f64, QuadratureError> {
    let n = 2 * l;
    adaptive_quadrature(
        &|theta: f64| {
            let c = gegenbauer2(n, theta.cos());
            let (s_half, c_half) = (0.5 * theta).sin_cos();
            8.0 * c * c * s_half.powi(2) * c_half.powi(4)
        },
        0.0,
        std::f64::consts::PI,
        1e-9 * (1.0 + f64::from(l).powi(4)),
        40,
    )
}
