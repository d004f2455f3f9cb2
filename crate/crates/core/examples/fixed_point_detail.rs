//! Anatomy of the rate-function fixed point.
//!
//! For a few feedback ratios, shows the tilt maximizer behind `psi_bar`,
//! whether it sits on the boundary of the admissible interval, and the
//! residual of the solved equation `psi_bar(x_c) = c log 2`.
//!
//! ```text
//! cargo run --example fixed_point_detail
//! ```

use cdma_sigopt::ratefn::{psi_bar, solve_xc, RateFnContext};
use cdma_sigopt::spectrum::make_params;
use std::f64::consts::LN_2;

fn main() {
    let params = make_params(2.0, false).unwrap();
    let ctx = RateFnContext::new(params);

    println!("tau = 2, full rank: x_c solves psi_bar(x) = c log 2 on ({:.4}, {:.1})", params.lambda_t_minus, params.lambda_bar);
    println!();
    println!(
        "{:>5}  {:>12}  {:>12}  {:>10}  {:>9}  {:>10}  {:>5}",
        "c", "x_c", "r_bar*x_c", "alpha*", "boundary", "residual", "iters"
    );
    for c in [0.1, 0.5, 1.0, 2.0, 4.0, 8.0] {
        let fp = solve_xc(&ctx, c, 1e-9).unwrap();
        println!(
            "{:>5}  {:>12.8}  {:>12.8}  {:>10.4}  {:>9}  {:>10.1e}  {:>5}",
            c,
            fp.x_c,
            fp.asymptotic_interference,
            fp.alpha_star,
            fp.boundary_case,
            fp.psi_bar_at_xc - c * LN_2,
            fp.iterations
        );
    }

    println!();
    println!("psi_bar along the bracket (strictly decreasing, zero at the mean):");
    for i in 0..8 {
        let x = params.lambda_minus + 0.02 + (params.lambda_bar - params.lambda_minus - 0.02) * i as f64 / 7.0;
        let pb = psi_bar(&ctx, x).unwrap();
        println!(
            "  x = {x:8.5}   psi_bar = {:10.6}   alpha* = {:10.4}{}",
            pb.value,
            pb.alpha_star,
            if pb.boundary { "   (boundary tilt)" } else { "" }
        );
    }
}
