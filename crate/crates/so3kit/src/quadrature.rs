//! One-dimensional Gauss-Legendre quadrature and the radial integral on SO(3).
//!
//! A conjugation-invariant function on SO(3) depends only on the rotation
//! angle `t` of its argument, and its Haar integral reduces to a weighted
//! integral over `[0, pi]`:
//!
//! ```text
//! \int_SO(3) f dmu = (2/pi) \int_0^pi f(t) sin^2(t/2) dt
//! ```
//!
//! [`radial_integral`] evaluates the right-hand side with adaptive interval
//! bisection on top of a fixed-order Gauss-Legendre rule. The rule is open
//! (all nodes interior), so integrands that blow up at `t = 0` are never
//! evaluated there; the `sin^2(t/2)` factor is what has to tame them.

use std::f64::consts::PI;
use thiserror::Error;

/// Absolute tolerance used by [`radial_integral`].
pub const RADIAL_TOL: f64 = 1e-10;
/// Maximum bisection depth of the adaptive rule.
pub const MAX_BISECTION_DEPTH: u32 = 40;

const GL_ORDER: usize = 15;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QuadratureError {
    /// The adaptive rule still saw an error estimate above its budget after
    /// `MAX_BISECTION_DEPTH` bisections. Typically means the integrand is not
    /// integrable (or barely so) on the reported subinterval.
    #[error("adaptive quadrature did not converge on [{a:.6e}, {b:.6e}] (error estimate {estimate:.3e} > budget {budget:.3e} at depth {depth})")]
    NoConvergence {
        a: f64,
        b: f64,
        estimate: f64,
        budget: f64,
        depth: u32,
    },
    /// The integrand produced a NaN, which poisons any error estimate.
    #[error("integrand returned NaN at t = {at:.6e}")]
    NotFinite { at: f64 },
}

/// Nodes and weights of an `n`-point Gauss-Legendre rule on `[-1, 1]`.
///
/// Exact for polynomials of degree `2n - 1`. Nodes are computed by Newton
/// iteration on the Legendre three-term recurrence and stored in ascending
/// order.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(order: usize) -> Self {
        assert!(order >= 2, "Gauss-Legendre rule needs at least 2 nodes");
        let mut nodes = vec![0.0; order];
        let mut weights = vec![0.0; order];
        let n = order as f64;
        for i in 0..order.div_ceil(2) {
            // Tricomi initial guess for the (i+1)-th root below 1.
            let mut x = (PI * (i as f64 + 0.75) / (n + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(order, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() <= 1e-15 * x.abs().max(1.0) {
                    break;
                }
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[order - 1 - i] = x;
            weights[i] = w;
            weights[order - 1 - i] = w;
        }
        GaussLegendre { nodes, weights }
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Integral of `f` over `[a, b]` by the fixed rule (no adaptivity).
    pub fn integrate<F: Fn(f64) -> f64>(&self, a: f64, b: f64, f: F) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut acc = KahanSum::new();
        for (&x, &w) in self.nodes.iter().zip(&self.weights) {
            acc.add(w * f(half.mul_add(x, mid)));
        }
        half * acc.value()
    }
}

/// `(P_n(x), P_n'(x))` by the Legendre three-term recurrence.
fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p_prev = 1.0;
    let mut p = x;
    for k in 2..=n {
        let kf = k as f64;
        let next = ((2.0 * kf - 1.0) * x * p - (kf - 1.0) * p_prev) / kf;
        p_prev = p;
        p = next;
    }
    let dp = n as f64 * (x * p - p_prev) / (x * x - 1.0);
    (p, dp)
}

/// Compensated (Kahan) accumulator. Summation order fully determines the
/// result, which the deterministic parallel reductions elsewhere rely on.
#[derive(Debug, Clone, Copy, Default)]
pub struct KahanSum {
    sum: f64,
    carry: f64,
}

impl KahanSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let y = x - self.carry;
        let t = self.sum + y;
        self.carry = (t - self.sum) - y;
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum
    }
}

/// A real function of the rotation angle on `[0, pi]`, with a declared
/// (optional) singularity at `t = 0`.
///
/// The flag does not change the value of the integral; it tells the adaptive
/// rule to pre-split near the origin so the error estimate starts out on the
/// right scale, and it documents intent at the call site.
pub struct RadialFunction<F> {
    f: F,
    singular_at_zero: bool,
}

impl<F: Fn(f64) -> f64> RadialFunction<F> {
    /// A radial function finite on all of `[0, pi]`.
    pub fn new(f: F) -> Self {
        RadialFunction {
            f,
            singular_at_zero: false,
        }
    }

    /// A radial function that blows up as `t -> 0` (for example the Green
    /// function or a Riesz kernel). The integrand handed to the quadrature is
    /// still `f(t) sin^2(t/2)`, which must remain integrable.
    pub fn singular_at_zero(f: F) -> Self {
        RadialFunction {
            f,
            singular_at_zero: true,
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        (self.f)(t)
    }

    pub fn is_singular_at_zero(&self) -> bool {
        self.singular_at_zero
    }
}

/// Adaptive Gauss-Legendre integration of `f` over `[a, b]` to absolute
/// tolerance `abs_tol`.
///
/// Each interval is accepted when the fixed rule applied to the whole and to
/// the two halves agree within the interval's share of the budget, otherwise
/// it is bisected, down to `max_depth` levels.
pub fn adaptive_quadrature<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    abs_tol: f64,
    max_depth: u32,
) -> Result<f64, QuadratureError> {
    let rule = GaussLegendre::new(GL_ORDER);
    let whole = rule.integrate(a, b, f);
    bisect(f, &rule, a, b, whole, abs_tol, max_depth, 0)
}

#[allow(clippy::too_many_arguments)]
fn bisect<F: Fn(f64) -> f64>(
    f: &F,
    rule: &GaussLegendre,
    a: f64,
    b: f64,
    whole: f64,
    budget: f64,
    max_depth: u32,
    depth: u32,
) -> Result<f64, QuadratureError> {
    let mid = 0.5 * (a + b);
    let left = rule.integrate(a, mid, f);
    let right = rule.integrate(mid, b, f);
    let refined = left + right;
    if refined.is_nan() {
        return Err(QuadratureError::NotFinite { at: mid });
    }
    let estimate = (whole - refined).abs();
    if estimate <= budget {
        return Ok(refined);
    }
    if depth >= max_depth {
        return Err(QuadratureError::NoConvergence {
            a,
            b,
            estimate,
            budget,
            depth,
        });
    }
    let l = bisect(f, rule, a, mid, left, 0.5 * budget, max_depth, depth + 1)?;
    let r = bisect(f, rule, mid, b, right, 0.5 * budget, max_depth, depth + 1)?;
    Ok(l + r)
}

/// Haar integral of a radial function: `(2/pi) \int_0^pi f(t) sin^2(t/2) dt`.
///
/// Absolute target [`RADIAL_TOL`], bisection depth capped at
/// [`MAX_BISECTION_DEPTH`]; failure to converge is reported, never silently
/// truncated.
pub fn radial_integral<F: Fn(f64) -> f64>(
    f: &RadialFunction<F>,
) -> Result<f64, QuadratureError> {
    let integrand = |t: f64| {
        let s = (0.5 * t).sin();
        f.eval(t) * s * s
    };
    // Budget for the inner integral so the final scaled value meets RADIAL_TOL.
    let budget = RADIAL_TOL * PI / 2.0;
    let value = if f.is_singular_at_zero() {
        // Uniform bisection cannot resolve an algebraic endpoint
        // singularity (the quadrature error on [0, b] shrinks slower than
        // the per-depth budget). Instead, sum dyadic shells [hi/2, hi]
        // toward the origin: on each shell the integrand is analytic with
        // scale-invariant geometry, so a fixed rule is near-exact, and for
        // any integrable power singularity the shell contributions decay
        // geometrically.
        let cut = 1e-2;
        let main = adaptive_quadrature(&integrand, cut, PI, 0.5 * budget, MAX_BISECTION_DEPTH)?;
        let tail_budget = 0.5 * budget;
        let rule = GaussLegendre::new(2 * GL_ORDER);
        let mut shells = KahanSum::new();
        let mut hi = cut;
        let mut converged = false;
        let mut prev_abs = f64::INFINITY;
        let mut growing = 0u32;
        // 2^-1100 underflows f64, so the loop is bounded even without convergence
        for _ in 0..1100 {
            let lo = 0.5 * hi;
            let shell = rule.integrate(lo, hi, integrand);
            if !shell.is_finite() {
                return Err(QuadratureError::NotFinite { at: lo });
            }
            // shells of an integrable power singularity decay geometrically;
            // sustained growth toward the origin proves divergence
            if shell.abs() > prev_abs {
                growing += 1;
                if growing >= 3 {
                    return Err(QuadratureError::NoConvergence {
                        a: 0.0,
                        b: hi,
                        estimate: shell.abs(),
                        budget: tail_budget,
                        depth: MAX_BISECTION_DEPTH,
                    });
                }
            } else {
                growing = 0;
            }
            prev_abs = shell.abs();
            shells.add(shell);
            // the remaining tail is at most shell * r/(1-r) for the decay
            // ratio r; the 100x headroom covers ratios up to 0.99
            if shell.abs() < 0.01 * tail_budget {
                converged = true;
                break;
            }
            hi = lo;
        }
        if !converged {
            return Err(QuadratureError::NoConvergence {
                a: 0.0,
                b: hi,
                estimate: prev_abs,
                budget: tail_budget,
                depth: MAX_BISECTION_DEPTH,
            });
        }
        main + shells.value()
    } else {
        adaptive_quadrature(&integrand, 0.0, PI, budget, MAX_BISECTION_DEPTH)?
    };
    Ok(value * 2.0 / PI)
}
