//! Asymptotic average interference of the direction-matching selection rule.
//!
//! Picking the codeword best aligned with the weakest interference
//! directions is simpler than minimizing the interference itself, and its
//! limit splits by rank:
//!
//! * full rank (`n <= m`): the closed form
//!   `l_t- (1 - 2^-c) + lambda_bar 2^-c` with `lambda_bar = m/n = tau`;
//! * deficient rank (`n > m`): the unique `x_c < r_bar` solving the binary
//!   relative-entropy equation `D(r_bar || x_c) = c log 2`, and the limit
//!   is `x_c` itself.
//!
//! Note that the `lambda_bar` of the closed form is the ratio `m/n`, not
//! the mean of the limiting measure; the two differ in the tall regime and
//! are kept on separate accessors of [`SpectrumParams`].

use crate::spectrum::SpectrumParams;
use std::f64::consts::LN_2;
use thiserror::Error;

/// Bracket inset for the relative-entropy bisection.
const BRACKET_INSET: f64 = 1e-14;
const MAX_BISECTIONS: u32 = 200;

#[derive(Debug, Error)]
pub enum DirMatchError {
    #[error("relative entropy arguments must lie strictly inside (0, 1), got p={p}, q={q}")]
    EntropyDomain { p: f64, q: f64 },
    #[error("feedback ratio c must be positive and finite, got {0}")]
    InvalidC(f64),
    #[error("bisection failed to bracket the fixed point (c = {c})")]
    NoBracket { c: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DirMatchBranch {
    FullRank,
    DeficientRank,
}

#[derive(Debug, Clone, Copy)]
pub struct DirMatchResult {
    pub limit_interference: f64,
    /// Present only in the deficient-rank branch.
    pub x_c: Option<f64>,
    pub branch: DirMatchBranch,
}

/// Binary relative entropy `D(p || q)` in nats.
pub fn binary_relative_entropy(p: f64, q: f64) -> Result<f64, DirMatchError> {
    if !(p > 0.0 && p < 1.0 && q > 0.0 && q < 1.0) {
        return Err(DirMatchError::EntropyDomain { p, q });
    }
    Ok(p * (p / q).ln() + (1.0 - p) * ((1.0 - p) / (1.0 - q)).ln())
}

/// Evaluates the direction-matching limit for feedback ratio `c`.
pub fn solve_dirmatch(
    params: &SpectrumParams,
    c: f64,
    tolerance: f64,
) -> Result<DirMatchResult, DirMatchError> {
    if !(c > 0.0 && c.is_finite()) {
        return Err(DirMatchError::InvalidC(c));
    }
    if !params.tall {
        let fade = (-c * LN_2).exp(); // 2^-c
        let limit = params.lambda_t_minus * (1.0 - fade) + params.ratio_m_over_n() * fade;
        return Ok(DirMatchResult {
            limit_interference: limit,
            x_c: None,
            branch: DirMatchBranch::FullRank,
        });
    }

    // Deficient rank: D(r_bar || x) decreases from +inf to 0 as x runs from
    // 0 to r_bar; bisect for the root of D = c log 2 below r_bar.
    let r_bar = params.r_bar;
    let target = c * LN_2;
    let mut lo = BRACKET_INSET;
    let mut hi = r_bar - BRACKET_INSET;
    let d_lo = binary_relative_entropy(r_bar, lo)?;
    let d_hi = binary_relative_entropy(r_bar, hi)?;
    if !(d_lo >= target && d_hi <= target) {
        return Err(DirMatchError::NoBracket { c });
    }
    let mut x = 0.5 * (lo + hi);
    for _ in 0..MAX_BISECTIONS {
        x = 0.5 * (lo + hi);
        let d = binary_relative_entropy(r_bar, x)?;
        if (d - target).abs() <= tolerance || hi - lo <= f64::EPSILON * r_bar {
            break;
        }
        if d > target {
            lo = x;
        } else {
            hi = x;
        }
    }
    Ok(DirMatchResult {
        limit_interference: x,
        x_c: Some(x),
        branch: DirMatchBranch::DeficientRank,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ratefn::{solve_xc, RateFnContext};
    use crate::spectrum::make_params;

    #[test]
    fn entropy_of_identical_distributions_is_zero() {
        assert_eq!(binary_relative_entropy(0.5, 0.5).unwrap(), 0.0);
        assert_eq!(binary_relative_entropy(0.2, 0.2).unwrap(), 0.0);
    }

    #[test]
    fn entropy_closed_form_inversion() {
        // D(1/2 || q) = log 2 forces q(1-q) = 1/16, q = (1 - sqrt(3)/2)/2
        let q = (1.0 - 3.0f64.sqrt() / 2.0) / 2.0;
        let d = binary_relative_entropy(0.5, q).unwrap();
        assert!((d - LN_2).abs() < 1e-12, "D = {d}");
    }

    #[test]
    fn entropy_nonnegative_on_a_grid() {
        for i in 1..20 {
            for j in 1..20 {
                let p = i as f64 / 20.0;
                let q = j as f64 / 20.0;
                let d = binary_relative_entropy(p, q).unwrap();
                if i == j {
                    assert!(d.abs() < 1e-14);
                } else {
                    assert!(d > 0.0, "D({p}||{q}) = {d}");
                }
            }
        }
    }

    #[test]
    fn entropy_domain_errors() {
        assert!(binary_relative_entropy(0.0, 0.5).is_err());
        assert!(binary_relative_entropy(0.5, 1.0).is_err());
        assert!(binary_relative_entropy(-0.1, 0.5).is_err());
    }

    #[test]
    fn full_rank_closed_form_at_c_one() {
        let p = make_params(2.0, false).unwrap();
        let r = solve_dirmatch(&p, 1.0, 1e-12).unwrap();
        assert_eq!(r.branch, DirMatchBranch::FullRank);
        assert!(r.x_c.is_none());
        let expect = 0.5 * (3.0 - 2.0 * 2.0f64.sqrt()) + 0.5 * 2.0;
        assert!((r.limit_interference - expect).abs() < 1e-15);
        assert!((r.limit_interference - 1.085_786_437_626_904_9).abs() < 1e-9);
    }

    #[test]
    fn full_rank_small_c_approaches_the_mean() {
        let p = make_params(2.0, false).unwrap();
        let r = solve_dirmatch(&p, 1e-9, 1e-12).unwrap();
        assert!((r.limit_interference - 2.0).abs() < 1e-6);
    }

    #[test]
    fn full_rank_limit_decreasing_with_range() {
        let p = make_params(2.0, false).unwrap();
        let mut prev = f64::INFINITY;
        for &c in &[0.01, 0.1, 0.5, 1.0, 2.0, 4.0, 10.0, 30.0] {
            let r = solve_dirmatch(&p, c, 1e-12).unwrap().limit_interference;
            assert!(r < prev, "not decreasing at c={c}");
            assert!(r > p.lambda_t_minus && r < p.lambda_bar);
            prev = r;
        }
        // c -> inf drives the limit to the minimum eigenvalue
        let tail = solve_dirmatch(&p, 50.0, 1e-12).unwrap().limit_interference;
        assert!((tail - p.lambda_minus).abs() < 1e-12);
    }

    #[test]
    fn deficient_rank_fixed_point() {
        let p = make_params(2.0, true).unwrap();
        let r = solve_dirmatch(&p, 1.0, 1e-12).unwrap();
        assert_eq!(r.branch, DirMatchBranch::DeficientRank);
        let x = r.x_c.unwrap();
        assert!((x - 0.066_987_298_107_780_65).abs() < 1e-8, "x_c = {x}");
        assert_eq!(r.limit_interference, x);
        assert!(x < p.r_bar);
    }

    #[test]
    fn deficient_rank_decreasing_and_below_r_bar() {
        let p = make_params(2.0, true).unwrap();
        let mut prev = f64::INFINITY;
        for &c in &[0.05, 0.25, 1.0, 3.0, 8.0] {
            let x = solve_dirmatch(&p, c, 1e-12).unwrap().x_c.unwrap();
            assert!(x < prev && x > 0.0 && x < p.r_bar);
            prev = x;
        }
    }

    #[test]
    fn deficient_rank_small_c_approaches_m_over_n() {
        // the c -> 0+ limit lands at r_bar = m/n, the average interference
        // with no feedback, matching the interference-minimization limit
        let p = make_params(2.0, true).unwrap();
        let x = solve_dirmatch(&p, 1e-8, 1e-14).unwrap().x_c.unwrap();
        assert!((x - p.r_bar).abs() < 1e-3, "x_c = {x}");
    }

    #[test]
    fn rejects_bad_c() {
        let p = make_params(2.0, false).unwrap();
        assert!(solve_dirmatch(&p, 0.0, 1e-9).is_err());
        assert!(solve_dirmatch(&p, f64::NAN, 1e-9).is_err());
    }

    #[test]
    fn dominates_interference_minimization() {
        // direction matching is the sub-optimal criterion: its limit sits at
        // or above the minimization limit for every c, in both regimes
        for &tall in &[false, true] {
            let p = make_params(2.0, tall).unwrap();
            let ctx = RateFnContext::new(p);
            for &c in &[0.25, 0.5, 1.0, 2.0, 4.0] {
                let dm = solve_dirmatch(&p, c, 1e-10).unwrap().limit_interference;
                let fp = solve_xc(&ctx, c, 1e-8).unwrap();
                assert!(
                    dm >= fp.asymptotic_interference - 1e-7,
                    "tall={tall} c={c}: dirmatch {dm} < minimization {}",
                    fp.asymptotic_interference
                );
            }
        }
    }
}
