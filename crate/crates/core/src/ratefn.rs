//! Rate function for the interference-minimization selection rule.
//!
//! For `x` in the open support interval and an admissible tilt `alpha`,
//!
//! ```text
//! psi(x, alpha) = integral of log(1 + alpha (lambda - x)) d mu(lambda)
//! psi_bar(x)    = max over alpha in [0, 1/(x - l_t-)] of psi(x, alpha)
//! ```
//!
//! `psi_bar` is strictly decreasing from `+inf` (at the effective lower
//! edge) to `0` (at the mean of the measure), so for every feedback ratio
//! `c > 0` there is a unique `x_c` with `psi_bar(x_c) = c log 2`. The
//! asymptotic average interference of the minimizing selection rule is
//! `r_bar * x_c`.
//!
//! `psi(x, .)` is concave, so the inner maximization is a golden-section
//! search over the closed tilt interval (with a tiny endpoint inset),
//! followed by an endpoint comparison that classifies whether the maximizer
//! sits on the boundary. The outer root find is plain bisection: `psi_bar`
//! is monotone, every evaluation is a quadrature, and robustness beats
//! iteration count here.

use crate::spectrum::{self, SpectrumError, SpectrumParams};
use std::f64::consts::LN_2;
use thiserror::Error;

/// Endpoint inset for the tilt interval; keeps the quadrature away from the
/// logarithmic blow-up at `alpha = 1/(x - l_t-)` exactly.
const ALPHA_INSET: f64 = 1e-12;

/// Relative width at which the golden-section search stops.
const GOLDEN_REL_TOL: f64 = 1e-11;

const MAX_BISECTIONS: u32 = 200;

#[derive(Debug, Error)]
pub enum RateFnError {
    #[error("x = {x} outside the open interval ({lo}, {hi})")]
    DomainX { x: f64, lo: f64, hi: f64 },
    #[error("alpha = {alpha} outside [0, {upper}]")]
    DomainAlpha { alpha: f64, upper: f64 },
    #[error("feedback ratio c must be positive and finite, got {0}")]
    InvalidC(f64),
    #[error(transparent)]
    Spectrum(#[from] SpectrumError),
}

/// Spectrum parameters plus the quadrature tolerance used by every
/// `psi` evaluation.
#[derive(Debug, Clone, Copy)]
pub struct RateFnContext {
    pub params: SpectrumParams,
    pub quad_tolerance: f64,
}

impl RateFnContext {
    pub fn new(params: SpectrumParams) -> Self {
        Self {
            params,
            quad_tolerance: spectrum::DEFAULT_TOLERANCE,
        }
    }

    pub fn with_tolerance(params: SpectrumParams, quad_tolerance: f64) -> Self {
        assert!(quad_tolerance > 0.0);
        Self {
            params,
            quad_tolerance,
        }
    }

    fn alpha_upper(&self, x: f64) -> f64 {
        1.0 / (x - self.params.lambda_t_minus)
    }

    fn check_x(&self, x: f64) -> Result<(), RateFnError> {
        let lo = self.params.lambda_t_minus;
        let hi = self.params.lambda_plus;
        if !(x > lo && x < hi) {
            return Err(RateFnError::DomainX { x, lo, hi });
        }
        Ok(())
    }
}

/// Result of the inner maximization over the tilt.
#[derive(Debug, Clone, Copy)]
pub struct PsiBar {
    pub value: f64,
    pub alpha_star: f64,
    /// True when the maximizer is the right endpoint of the tilt interval.
    pub boundary: bool,
}

/// Solution of `psi_bar(x_c) = c log 2`.
#[derive(Debug, Clone, Copy)]
pub struct FixedPointResult {
    pub x_c: f64,
    pub alpha_star: f64,
    pub psi_bar_at_xc: f64,
    /// `r_bar * x_c`, the asymptotic average interference.
    pub asymptotic_interference: f64,
    pub iterations: u32,
    /// True when the tilt maximizer hit the interval endpoint at `x_c`.
    pub boundary_case: bool,
    /// Set when `x_c` is within floating-point resolution of the lower edge
    /// and the residual tolerance could not be met; the returned value is
    /// the best representable bracket midpoint.
    pub clamped: bool,
}

/// Evaluates `psi(x, alpha)`.
///
/// In the tall regime the atom contributes `log(1 - alpha x)`; at
/// `alpha = 1/x` exactly this is `-inf`, which is returned as a negative
/// infinity indicator rather than an error (the maximizer then lies
/// strictly inside the interval).
pub fn psi(ctx: &RateFnContext, x: f64, alpha: f64) -> Result<f64, RateFnError> {
    ctx.check_x(x)?;
    let upper = ctx.alpha_upper(x);
    if !(0.0..=upper * (1.0 + 1e-9)).contains(&alpha) {
        return Err(RateFnError::DomainAlpha { alpha, upper });
    }
    if alpha == 0.0 {
        return Ok(0.0);
    }
    let atom_arg = -alpha * x; // 1 + alpha(0 - x) - 1
    if ctx.params.atom_weight() > 0.0 && atom_arg <= -1.0 {
        return Ok(f64::NEG_INFINITY);
    }
    let value = spectrum::integrate(
        &ctx.params,
        |lambda| (alpha * (lambda - x)).ln_1p(),
        ctx.quad_tolerance,
    )?;
    Ok(value)
}

/// Maximizes the concave `psi(x, .)` over the closed tilt interval.
pub fn psi_bar(ctx: &RateFnContext, x: f64) -> Result<PsiBar, RateFnError> {
    ctx.check_x(x)?;
    let hi = ctx.alpha_upper(x) * (1.0 - ALPHA_INSET);
    let mut a = 0.0f64;
    let mut b = hi;
    let inv_phi = 0.5 * (5.0f64.sqrt() - 1.0);
    let mut x1 = b - inv_phi * (b - a);
    let mut x2 = a + inv_phi * (b - a);
    let mut f1 = psi(ctx, x, x1)?;
    let mut f2 = psi(ctx, x, x2)?;
    let tol = hi * GOLDEN_REL_TOL;
    while b - a > tol {
        if f1 >= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = psi(ctx, x, x1)?;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = psi(ctx, x, x2)?;
        }
    }
    let mut alpha_star = 0.5 * (a + b);
    let mut value = psi(ctx, x, alpha_star)?;

    // Explicit endpoint comparisons: the interior value never beats an
    // endpoint by less than quadrature noise without us noticing.
    let at_hi = psi(ctx, x, hi)?;
    if at_hi > value {
        value = at_hi;
        alpha_star = hi;
    }
    if value < 0.0 {
        // psi(x, 0) = 0 dominates; happens for x at or above the mean.
        return Ok(PsiBar {
            value: 0.0,
            alpha_star: 0.0,
            boundary: false,
        });
    }
    let boundary = hi - alpha_star <= 10.0 * tol;
    Ok(PsiBar {
        value,
        alpha_star,
        boundary,
    })
}

/// Solves `psi_bar(x_c) = c log 2` by bisection on `(l_t-, lambda_bar)`.
///
/// The lower bracket endpoint is shrunk geometrically toward the edge until
/// it encloses the root; for extremely large `c` the root can sit within
/// floating-point resolution of the edge, in which case the result carries
/// the `clamped` flag instead of looping forever.
pub fn solve_xc(ctx: &RateFnContext, c: f64, tolerance: f64) -> Result<FixedPointResult, RateFnError> {
    if !(c > 0.0 && c.is_finite()) {
        return Err(RateFnError::InvalidC(c));
    }
    let target = c * LN_2;
    let lo_edge = ctx.params.lambda_t_minus;
    let scale = ctx.params.lambda_bar - lo_edge;
    let mut iterations = 0u32;

    let mut eps = 0.25 * scale;
    let mut a = lo_edge + eps;
    let mut pb_a = psi_bar(ctx, a)?;
    while pb_a.value <= target {
        eps *= 0.25;
        a = lo_edge + eps;
        iterations += 1;
        if eps < f64::EPSILON * scale {
            // Root indistinguishable from the edge at this precision.
            return Ok(FixedPointResult {
                x_c: a,
                alpha_star: pb_a.alpha_star,
                psi_bar_at_xc: pb_a.value,
                asymptotic_interference: ctx.params.r_bar * a,
                iterations,
                boundary_case: pb_a.boundary,
                clamped: true,
            });
        }
        pb_a = psi_bar(ctx, a)?;
    }
    let mut b = ctx.params.lambda_bar;

    let mut best_x = a;
    let mut best = pb_a;
    let mut clamped = true;
    for _ in 0..MAX_BISECTIONS {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            // Bracket collapsed to adjacent floats.
            break;
        }
        let pb = psi_bar(ctx, mid)?;
        iterations += 1;
        if (pb.value - target).abs() < (best.value - target).abs() {
            best = pb;
            best_x = mid;
        }
        if (pb.value - target).abs() <= tolerance {
            clamped = false;
            break;
        }
        if pb.value > target {
            a = mid;
        } else {
            b = mid;
        }
    }
    Ok(FixedPointResult {
        x_c: best_x,
        alpha_star: best.alpha_star,
        psi_bar_at_xc: best.value,
        asymptotic_interference: ctx.params.r_bar * best_x,
        iterations,
        boundary_case: best.boundary,
        clamped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectrum::make_params;

    fn ctx(tau: f64, tall: bool) -> RateFnContext {
        RateFnContext::new(make_params(tau, tall).unwrap())
    }

    /// Brute-force maximizer: dense grid scan plus local refinement.
    fn psi_bar_grid_oracle(c: &RateFnContext, x: f64) -> f64 {
        let hi = (1.0 / (x - c.params.lambda_t_minus)) * (1.0 - 1e-12);
        let n = 4096;
        let mut best = 0.0f64;
        let mut best_i = 0usize;
        for i in 0..=n {
            let alpha = hi * i as f64 / n as f64;
            let v = psi(c, x, alpha).unwrap();
            if v > best {
                best = v;
                best_i = i;
            }
        }
        // refine around the best grid cell
        let lo = hi * best_i.saturating_sub(1) as f64 / n as f64;
        let up = hi * ((best_i + 1).min(n)) as f64 / n as f64;
        let m = 2000;
        for j in 0..=m {
            let alpha = lo + (up - lo) * j as f64 / m as f64;
            best = best.max(psi(c, x, alpha).unwrap());
        }
        best
    }

    #[test]
    fn psi_zero_tilt_is_zero() {
        let c = ctx(2.0, false);
        for &x in &[0.2, 1.0, 2.0, 5.0] {
            assert_eq!(psi(&c, x, 0.0).unwrap(), 0.0);
        }
    }

    #[test]
    fn psi_slope_vanishes_at_the_mean() {
        let c = ctx(2.0, false);
        // d psi/d alpha at 0 equals mean - x = 0, so psi is O(alpha^2)
        let v = psi(&c, 2.0, 1e-6).unwrap();
        assert!(v.abs() < 1e-11, "psi = {v}");
    }

    #[test]
    fn psi_positive_below_the_mean() {
        let c = ctx(2.0, false);
        let v = psi(&c, 1.0, 0.5).unwrap();
        assert!(v > 0.0);
        // independent check against an unsubstituted midpoint quadrature
        let p = c.params;
        let n = 400_000;
        let h = (p.lambda_plus - p.lambda_minus) / n as f64;
        let mut oracle = 0.0;
        for i in 0..n {
            let l = p.lambda_minus + (i as f64 + 0.5) * h;
            oracle += p.density(l) * (0.5 * (l - 1.0)).ln_1p() * h;
        }
        assert!((v - oracle).abs() < 1e-6, "psi {v} vs oracle {oracle}");
    }

    #[test]
    fn psi_domain_errors() {
        let c = ctx(2.0, false);
        assert!(matches!(psi(&c, 0.05, 0.1), Err(RateFnError::DomainX { .. })));
        assert!(matches!(psi(&c, 6.0, 0.1), Err(RateFnError::DomainX { .. })));
        let upper = 1.0 / (1.0 - c.params.lambda_t_minus);
        assert!(matches!(
            psi(&c, 1.0, upper * 1.5),
            Err(RateFnError::DomainAlpha { .. })
        ));
        assert!(matches!(
            psi(&c, 1.0, -0.1),
            Err(RateFnError::DomainAlpha { .. })
        ));
    }

    #[test]
    fn tall_atom_blows_up_at_full_tilt() {
        let c = ctx(2.0, true);
        let x = 0.5;
        let v = psi(&c, x, 1.0 / x).unwrap();
        assert_eq!(v, f64::NEG_INFINITY);
        // strictly inside the interval everything is finite
        assert!(psi(&c, x, (1.0 / x) * (1.0 - 1e-9)).unwrap().is_finite());
    }

    #[test]
    fn psi_bar_at_the_mean_is_zero() {
        let c = ctx(2.0, false);
        let pb = psi_bar(&c, c.params.lambda_bar).unwrap();
        assert!(pb.value.abs() < 1e-8);
        assert_eq!(pb.alpha_star, 0.0);
        assert!(!pb.boundary);
    }

    #[test]
    fn psi_bar_large_near_the_edge() {
        let c = ctx(2.0, false);
        let x = c.params.lambda_minus + 0.01;
        let pb = psi_bar(&c, x).unwrap();
        assert!(pb.value > 1.0, "psi_bar = {}", pb.value);
        let oracle = psi_bar_grid_oracle(&c, x);
        assert!(
            (pb.value - oracle).abs() < 1e-6,
            "golden {} vs grid {}",
            pb.value,
            oracle
        );
    }

    #[test]
    fn psi_bar_decreases_to_zero_at_the_mean() {
        let c = ctx(2.0, false);
        let mut prev = f64::INFINITY;
        for k in 1..=4 {
            let x = c.params.lambda_bar - 10f64.powi(-k);
            let pb = psi_bar(&c, x).unwrap();
            assert!(pb.value > 0.0);
            assert!(pb.value < prev);
            prev = pb.value;
        }
        assert!(prev < 1e-2);
    }

    #[test]
    fn psi_is_concave_in_alpha() {
        // midpoint value >= chord value on random admissible triples
        let c = ctx(2.0, false);
        let mut state = 0x1234_5678_9abc_def0u64;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        for _ in 0..100 {
            let x = c.params.lambda_minus + 1e-3 + next() * (c.params.lambda_bar - c.params.lambda_minus - 2e-3);
            let hi = (1.0 / (x - c.params.lambda_t_minus)) * (1.0 - 1e-9);
            let mut a1 = next() * hi;
            let mut a3 = next() * hi;
            if a1 > a3 {
                std::mem::swap(&mut a1, &mut a3);
            }
            if a3 - a1 < 1e-12 {
                continue;
            }
            let a2 = 0.5 * (a1 + a3);
            let f1 = psi(&c, x, a1).unwrap();
            let f2 = psi(&c, x, a2).unwrap();
            let f3 = psi(&c, x, a3).unwrap();
            assert!(
                f2 >= 0.5 * (f1 + f3) - 1e-9,
                "concavity violated at x={x}, alphas=({a1},{a2},{a3})"
            );
        }
    }

    #[test]
    fn psi_bar_strictly_decreasing_on_a_grid() {
        let c = ctx(2.0, false);
        let lo = c.params.lambda_minus + 1e-3;
        let hi = c.params.lambda_bar - 1e-3;
        let mut prev = f64::INFINITY;
        for i in 0..50 {
            let x = lo + (hi - lo) * i as f64 / 49.0;
            let v = psi_bar(&c, x).unwrap().value;
            assert!(v >= 0.0);
            assert!(v < prev, "not decreasing at grid point {i}: {v} vs {prev}");
            prev = v;
        }
    }

    #[test]
    fn solve_roundtrip_hits_target() {
        for &(tau, tall) in &[(2.0, false), (2.0, true), (1.5, false)] {
            let c = ctx(tau, tall);
            for &cc in &[0.1, 0.5, 1.0, 2.0, 4.0] {
                let fp = solve_xc(&c, cc, 1e-8).unwrap();
                assert!(!fp.clamped, "clamped at c={cc}");
                let pb = psi_bar(&c, fp.x_c).unwrap();
                assert!(
                    (pb.value - cc * LN_2).abs() <= 1e-8,
                    "tau={tau} tall={tall} c={cc}: residual {}",
                    pb.value - cc * LN_2
                );
                assert!((fp.asymptotic_interference - c.params.r_bar * fp.x_c).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn small_c_approaches_the_mean() {
        // near the mean, psi_bar(x) ~ (mean - x)^2 / (2 var) with var = tau,
        // so the gap shrinks like sqrt(2 var c ln 2); check the law and the
        // convergence itself
        let c = ctx(2.0, false);
        let mut prev_gap = f64::INFINITY;
        for &cc in &[1e-2, 1e-3, 1e-4] {
            let fp = solve_xc(&c, cc, 1e-10).unwrap();
            let gap = 2.0 - fp.x_c;
            assert!(gap > 0.0 && gap < prev_gap);
            let predicted = (2.0 * 2.0 * cc * LN_2).sqrt();
            assert!(
                (gap - predicted).abs() < 0.08 * predicted,
                "c={cc}: gap {gap} vs quadratic law {predicted}"
            );
            prev_gap = gap;
        }
        // frozen regression value, confirmed by a 30-digit external
        // quadrature oracle: psi_bar(1.9478059817) - 0.001 ln 2 = -7.4e-9
        let fp = solve_xc(&c, 0.001, 1e-10).unwrap();
        assert!(
            (fp.x_c - 1.947_805_981_7).abs() < 1e-6,
            "x_c = {}",
            fp.x_c
        );
    }

    #[test]
    fn large_c_approaches_the_lower_edge() {
        let c = ctx(2.0, false);
        let fp = solve_xc(&c, 30.0, 1e-8).unwrap();
        let gap = fp.x_c - c.params.lambda_minus;
        assert!(gap > 0.0, "x_c must stay strictly above the edge");
        assert!(gap < 0.15, "gap = {gap}");
    }

    #[test]
    fn frozen_fixed_points_at_unit_feedback_ratio() {
        // regression constants, cross-checked against a 25-digit external
        // quadrature + golden-section oracle (residuals ~1e-11)
        let c = ctx(2.0, false);
        let fp = solve_xc(&c, 1.0, 1e-10).unwrap();
        assert!((fp.x_c - 0.761_240_229_323).abs() < 1e-8, "x_c = {}", fp.x_c);
        assert!((fp.x_c - c.params.lambda_minus) > 0.0 && fp.x_c < c.params.lambda_bar);

        let t = ctx(2.0, true);
        let fp = solve_xc(&t, 1.0, 1e-10).unwrap();
        assert!((fp.x_c - 0.101_828_431_094).abs() < 1e-8, "tall x_c = {}", fp.x_c);
        assert!((fp.asymptotic_interference - 0.5 * fp.x_c).abs() < 1e-15);
    }

    #[test]
    fn fixed_point_decreases_in_c() {
        let c = ctx(2.0, false);
        let mut prev = f64::INFINITY;
        for &cc in &[0.1, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 30.0] {
            let fp = solve_xc(&c, cc, 1e-8).unwrap();
            assert!(fp.x_c < prev, "x_c not decreasing at c={cc}");
            prev = fp.x_c;
        }
    }

    #[test]
    fn rejects_bad_c() {
        let c = ctx(2.0, false);
        assert!(solve_xc(&c, 0.0, 1e-8).is_err());
        assert!(solve_xc(&c, -1.0, 1e-8).is_err());
        assert!(solve_xc(&c, f64::INFINITY, 1e-8).is_err());
    }
}
