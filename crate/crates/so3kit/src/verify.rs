//! Named numerical self-checks.
//!
//! Every check recomputes one identity through two independent routes and
//! reports the observed discrepancy next to a pinned tolerance; the `verify`
//! command renders them as a table and fails if any observed error exceeds
//! its tolerance. Checks are pure and deterministic — no RNG, no files — so
//! a failure always means a real numerical regression.

use std::f64::consts::PI;

use crate::kernel::{
    expected_green_energy_integral, green_closed, green_heat_diag, green_series, kernel,
    kernel_spectral, KernelSpec,
};
use crate::quadrature::{radial_integral, GaussLegendre, RadialFunction};
use crate::rotation::{frobenius_distance, rotation_angle, uniform_sample};
use crate::special::{
    beta_fn, binomial, chebyshev_t, chebyshev_u, cosine_square_coeffs, digamma_half,
    gegenbauer2, gegenbauer_identity_check, gegenbauer_l2, gegenbauer_weighted_sq_integral,
    u_sq_integral, EULER_GAMMA,
};

/// One check: its name, the pinned tolerance, and the observed error.
#[derive(Debug, Clone)]
pub struct CheckResult {
    pub name: &'static str,
    pub tolerance: f64,
    pub observed: f64,
}

impl CheckResult {
    pub fn passed(&self) -> bool {
        self.observed.is_finite() && self.observed <= self.tolerance
    }
}

type CheckFn = fn() -> f64;

/// The full check table: `(name, tolerance, error function)`.
const CHECKS: &[(&str, f64, CheckFn)] = &[
    (
        "gegenbauer identity: weighted L2 vs digamma sum (n = 2..40)",
        1e-8,
        check_gegenbauer_identity,
    ),
    (
        "gegenbauer plain L2 vs closed form (n = 2..40)",
        1e-8,
        check_gegenbauer_l2,
    ),
    (
        "gegenbauer half-angle weighted square integral (L = 0..10)",
        1e-7,
        check_gegenbauer_weighted,
    ),
    (
        "gegenbauer cosine-square expansion vs direct square",
        1e-9,
        check_cosine_expansion,
    ),
    (
        "gegenbauer cosine table symmetries (n <= 20, lambda = 1..3)",
        1e-13,
        check_cosine_symmetries,
    ),
    (
        "gegenbauer derivative identity: U'_{n+1} = 2 C_n^{(2)}",
        1e-4,
        check_gegenbauer_derivative,
    ),
    (
        "chebyshev halves: 2 T_{2l+1} = U_{2l+1} - U_{2l-1}",
        1e-11,
        check_chebyshev_halves,
    ),
    (
        "chebyshev u sine ratio (l <= 20)",
        1e-10,
        check_chebyshev_sine_ratio,
    ),
    (
        "digamma half-integer values",
        1e-12,
        check_digamma_half,
    ),
    (
        "u-square integrals vs quadrature (n <= 12)",
        1e-12,
        check_u_sq_integrals,
    ),
    (
        "beta function classical values",
        1e-13,
        check_beta_values,
    ),
    (
        "kernel dimension at zero angle (L <= 20)",
        0.0,
        check_kernel_dimension,
    ),
    (
        "kernel closed vs spectral routes (L <= 20, 1000 angles)",
        1e-10,
        check_kernel_routes,
    ),
    (
        "kernel radial integral is unit mass (L <= 10)",
        1e-8,
        check_kernel_unit_mass,
    ),
    (
        "kernel squared radial integral is the rank (L <= 10)",
        1e-8,
        check_kernel_reproducing,
    ),
    (
        "green closed vs series, omega=2.0, 10^4 terms",
        2e-3,
        check_green_series_at_two,
    ),
    (
        "green closed vs series sweep (omega in [0.5, pi])",
        2e-3,
        check_green_series_sweep,
    ),
    (
        "green radial integral is zero mean",
        1e-8,
        check_green_zero_mean,
    ),
    (
        "green closed-form values at pi and pi/2",
        1e-14,
        check_green_closed_values,
    ),
    (
        "green short-range blow-up: omega * G -> 2 pi",
        1e-3,
        check_green_blow_up,
    ),
    (
        "green heat-trace diagonal: deep-time value and blow-up ratios",
        1e-6,
        check_heat_diag,
    ),
    (
        "expected green energy vs product formula (L <= 4)",
        1e-8,
        check_expected_energy,
    ),
    (
        "radial law total mass",
        1e-12,
        check_radial_mass,
    ),
    (
        "metric: bi-invariance and chord identity",
        1e-9,
        check_metric,
    ),
];

/// Runs every check whose name contains `filter` (all of them when absent).
pub fn run_checks(filter: Option<&str>) -> Vec<CheckResult> {
    CHECKS
        .iter()
        .filter(|(name, _, _)| filter.is_none_or(|f| name.contains(f)))
        .map(|&(name, tolerance, f)| CheckResult {
            name,
            tolerance,
            observed: f(),
        })
        .collect()
}

/// Names of all registered checks, in table order.
pub fn check_names() -> Vec<&'static str> {
    CHECKS.iter().map(|(name, _, _)| *name).collect()
}

fn check_gegenbauer_identity() -> f64 {
    let mut worst = 0.0f64;
    for n in 2..=40 {
        match gegenbauer_identity_check(n) {
            Ok((lhs, rhs)) => worst = worst.max((lhs - rhs).abs()),
            Err(_) => return f64::INFINITY,
        }
    }
    worst
}

fn check_gegenbauer_l2() -> f64 {
    let mut worst = 0.0f64;
    for n in 2..=40u32 {
        let rule = GaussLegendre::new(n as usize + 4);
        let quad = rule.integrate(0.0, 1.0, |x| gegenbauer2(n - 2, x).powi(2));
        worst = worst.max((quad - gegenbauer_l2(n)).abs() / gegenbauer_l2(n).abs());
    }
    worst
}

fn check_gegenbauer_weighted() -> f64 {
    let mut worst = 0.0f64;
    for l in 0..=10 {
        let expected = PI / 2.0 * binomial(u64::from(2 * l) + 3, 3) as f64;
        match gegenbauer_weighted_sq_integral(l) {
            Ok(v) => worst = worst.max((v - expected).abs() / expected),
            Err(_) => return f64::INFINITY,
        }
    }
    worst
}

fn check_cosine_expansion() -> f64 {
    let mut worst = 0.0f64;
    for lambda in 1..=3 {
        for n in [4u32, 6, 9] {
            let expansion = cosine_square_coeffs(n, lambda);
            for step in 0..13 {
                let t = 0.2 + 0.22 * f64::from(step);
                let direct = crate::special::gegenbauer_general(lambda, n, t.cos()).powi(2);
                let via_table = expansion.eval_square(t);
                worst = worst.max((via_table - direct).abs() / (1.0 + direct.abs()));
            }
        }
    }
    worst
}

fn check_cosine_symmetries() -> f64 {
    let mut worst = 0.0f64;
    for lambda in 1..=3 {
        for n in 0..=20 {
            worst = worst.max(cosine_square_coeffs(n, lambda).symmetry_defect());
        }
    }
    worst
}

fn check_gegenbauer_derivative() -> f64 {
    let h = 1e-5;
    let mut worst = 0.0f64;
    for n in 0..=10u32 {
        for &x in &[-0.6, -0.2, 0.1, 0.45, 0.8] {
            let diff = (chebyshev_u(n + 1, x + h) - chebyshev_u(n + 1, x - h)) / (2.0 * h);
            let exact = 2.0 * gegenbauer2(n, x);
            worst = worst.max((diff - exact).abs() / (1.0 + exact.abs()));
        }
    }
    worst
}

fn check_chebyshev_halves() -> f64 {
    let mut worst = 0.0f64;
    for l in 1..=25u32 {
        for step in 0..=50 {
            let x = -1.0 + f64::from(step) * 0.04;
            let lhs = 2.0 * chebyshev_t(2 * l + 1, x);
            let rhs = chebyshev_u(2 * l + 1, x) - chebyshev_u(2 * l - 1, x);
            worst = worst.max((lhs - rhs).abs());
        }
    }
    worst
}

fn check_chebyshev_sine_ratio() -> f64 {
    let mut worst = 0.0f64;
    for l in 0..=20u32 {
        for step in 1..40 {
            let h = f64::from(step) * (PI / 40.0) * 0.98;
            let exact = ((2.0 * f64::from(l) + 1.0) * h).sin() / h.sin();
            let recurred = chebyshev_u(2 * l, h.cos());
            worst = worst.max((recurred - exact).abs() / (1.0 + exact.abs()));
        }
    }
    worst
}

fn check_digamma_half() -> f64 {
    let psi_half = -EULER_GAMMA - 2.0 * 2.0f64.ln();
    let mut worst = (digamma_half(0) - psi_half).abs();
    worst = worst.max((digamma_half(1) - (psi_half + 2.0)).abs());
    worst = worst.max((digamma_half(2) - (psi_half + 2.0 + 2.0 / 3.0)).abs());
    worst
}

fn check_u_sq_integrals() -> f64 {
    let mut worst = 0.0f64;
    for n in 0..=12u32 {
        let rule = GaussLegendre::new(n as usize + 2);
        let quad = rule.integrate(0.0, 1.0, |x| chebyshev_u(n, x).powi(2));
        worst = worst.max((quad - u_sq_integral(n)).abs());
    }
    worst
}

fn check_beta_values() -> f64 {
    let mut worst = (beta_fn(0.5, 0.5) - PI).abs();
    worst = worst.max((beta_fn(1.0, 1.0) - 1.0).abs());
    worst = worst.max((beta_fn(2.0, 3.0) - 1.0 / 12.0).abs());
    worst = worst.max((beta_fn(1.3, 2.4) - beta_fn(2.4, 1.3)).abs());
    worst
}

fn check_kernel_dimension() -> f64 {
    let mut worst = 0.0f64;
    for l in 0..=20 {
        let spec = KernelSpec::new(l);
        let n = spec.n() as f64;
        worst = worst.max((kernel(&spec, 0.0) - n).abs());
        worst = worst.max((kernel_spectral(&spec, 0.0) - n).abs());
    }
    worst
}

fn check_kernel_routes() -> f64 {
    let mut worst = 0.0f64;
    for l in 0..=20 {
        let spec = KernelSpec::new(l);
        for step in 0..1000 {
            let omega = PI * f64::from(step) / 999.0;
            worst = worst.max((kernel(&spec, omega) - kernel_spectral(&spec, omega)).abs());
        }
    }
    worst
}

fn check_kernel_unit_mass() -> f64 {
    let mut worst = 0.0f64;
    for l in [0u32, 1, 2, 5, 10] {
        let spec = KernelSpec::new(l);
        let f = RadialFunction::new(move |t: f64| kernel(&spec, t));
        match radial_integral(&f) {
            Ok(v) => worst = worst.max((v - 1.0).abs()),
            Err(_) => return f64::INFINITY,
        }
    }
    worst
}

fn check_kernel_reproducing() -> f64 {
    let mut worst = 0.0f64;
    for l in [0u32, 1, 2, 5, 10] {
        let spec = KernelSpec::new(l);
        let n = spec.n() as f64;
        let f = RadialFunction::new(move |t: f64| kernel(&spec, t).powi(2));
        match radial_integral(&f) {
            Ok(v) => worst = worst.max((v - n).abs() / n),
            Err(_) => return f64::INFINITY,
        }
    }
    worst
}

fn check_green_series_at_two() -> f64 {
    (green_closed(2.0).expect("2.0 is in the domain") - green_series(2.0, 10_000)).abs()
}

fn check_green_series_sweep() -> f64 {
    let mut worst = 0.0f64;
    for step in 0..=40 {
        let omega = 0.5 + (PI - 0.5) * f64::from(step) / 40.0;
        let closed = green_closed(omega).expect("omega in (0, pi]");
        worst = worst.max((closed - green_series(omega, 10_000)).abs());
    }
    worst
}

fn check_green_zero_mean() -> f64 {
    let f = RadialFunction::singular_at_zero(|t: f64| {
        green_closed(t).expect("interior node")
    });
    match radial_integral(&f) {
        Ok(v) => v.abs(),
        Err(_) => f64::INFINITY,
    }
}

fn check_green_closed_values() -> f64 {
    let at_pi = (green_closed(PI).expect("pi") + 1.0).abs();
    let at_half = (green_closed(PI / 2.0).expect("pi/2") - (PI / 2.0 - 1.0)).abs();
    at_pi.max(at_half)
}

fn check_green_blow_up() -> f64 {
    let omega = 1e-4;
    (omega * green_closed(omega).expect("small positive") - 2.0 * PI).abs()
}

fn check_heat_diag() -> f64 {
    // deep time: the l = 1 term dominates to ~1e-17 relative accuracy
    let first = 4.5 * (-20.0f64).exp();
    let mut worst = (green_heat_diag(10.0) - first).abs() / first;
    // short time: ratios against the 2 sqrt(pi/t) law, frozen values
    let frozen = [
        (1, 0.7161973133),
        (2, 0.9131526151),
        (3, 0.9729970485),
        (4, 0.9915124382),
    ];
    for (k, expected) in frozen {
        let t = 10f64.powi(-k);
        let ratio = green_heat_diag(t) / (2.0 * (PI / t).sqrt());
        worst = worst.max((ratio - expected).abs());
    }
    worst
}

fn check_expected_energy() -> f64 {
    let mut worst = 0.0f64;
    for l in 0..=4u32 {
        let lf = f64::from(l);
        let exact = -lf * (lf + 1.0) * (2.0 * lf + 1.0) * (2.0 * lf + 3.0);
        match expected_green_energy_integral(&KernelSpec::new(l)) {
            Ok(v) => worst = worst.max((v - exact).abs() / (1.0 + lf.powi(4))),
            Err(_) => return f64::INFINITY,
        }
    }
    worst
}

fn check_radial_mass() -> f64 {
    let f = RadialFunction::new(|_t: f64| 1.0);
    match radial_integral(&f) {
        Ok(v) => (v - 1.0).abs(),
        Err(_) => f64::INFINITY,
    }
}

fn check_metric() -> f64 {
    let set = uniform_sample(40, 1);
    let g = &set[39];
    let mut worst = 0.0f64;
    for i in 0..12 {
        for j in (i + 1)..12 {
            let (p, q) = (&set[i], &set[j]);
            let omega = rotation_angle(p, q);
            let left_translated = rotation_angle(&(g * p), &(g * q));
            worst = worst.max((omega - left_translated).abs());
            let chord = frobenius_distance(p, q);
            let via_angle = 8.0f64.sqrt() * (0.5 * omega).sin();
            worst = worst.max((chord - via_angle).abs());
        }
    }
    worst
}
