//! The rank-deficient regime (n > m): atom at zero, both limits, and the
//! relative-entropy fixed point of the direction-matching criterion.
//!
//! ```text
//! cargo run --example deficient_rank
//! ```

use cdma_sigopt::dirmatch::{binary_relative_entropy, solve_dirmatch};
use cdma_sigopt::ratefn::{solve_xc, RateFnContext};
use cdma_sigopt::spectrum::make_params;
use std::f64::consts::LN_2;

fn main() {
    let tau = 2.0;
    let params = make_params(tau, true).unwrap();
    println!(
        "tau = {tau}, n > m: r_bar = m/n = {}, eigenvalue atom at 0 with weight {}",
        params.r_bar,
        params.atom_weight()
    );
    println!("measure mean = {} (not m/n; the two play different roles)", params.lambda_bar);
    println!();

    let ctx = RateFnContext::new(params);
    println!(
        "{:>5}  {:>18}  {:>18}",
        "c", "min-interference", "direction-match"
    );
    for c in [0.1, 0.25, 0.5, 1.0, 2.0, 4.0] {
        let fp = solve_xc(&ctx, c, 1e-8).unwrap();
        let dm = solve_dirmatch(&params, c, 1e-12).unwrap();
        println!(
            "{:>5}  {:>18.8}  {:>18.8}",
            c, fp.asymptotic_interference, dm.limit_interference
        );
    }
    println!();

    let dm = solve_dirmatch(&params, 1.0, 1e-12).unwrap();
    let x_c = dm.x_c.unwrap();
    println!("direction matching at c = 1 solves D(r_bar || x) = log 2 below r_bar:");
    println!("  x_c = {x_c:.10}");
    println!(
        "  D({}, {x_c:.6}) - log 2 = {:+.2e}",
        params.r_bar,
        binary_relative_entropy(params.r_bar, x_c).unwrap() - LN_2
    );
    println!("  closed-form check: (1 - sqrt(3)/2)/2 = {:.10}", (1.0 - 3.0f64.sqrt() / 2.0) / 2.0);
}
