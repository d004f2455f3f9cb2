//! Asymptotic average-interference limits for both selection criteria.
//!
//! Sweeps the feedback ratio `c = R_fb/n` at a fixed aspect ratio and
//! prints the interference-minimization limit `r_bar * x_c` next to the
//! direction-matching limit. Run with:
//!
//! ```text
//! cargo run --example asymptotic_limits
//! ```

use cdma_sigopt::dirmatch::solve_dirmatch;
use cdma_sigopt::ratefn::{solve_xc, RateFnContext};
use cdma_sigopt::spectrum::make_params;

fn main() {
    let tau = 2.0;
    let params = make_params(tau, false).expect("valid tau");
    let ctx = RateFnContext::new(params);

    println!("aspect ratio tau = {tau}, full-rank regime (n <= m)");
    println!("support edges: [{:.6}, {:.6}], mean {:.1}", params.lambda_minus, params.lambda_plus, params.lambda_bar);
    println!();
    println!("{:>6}  {:>16}  {:>16}  {:>9}", "c", "min-interference", "direction-match", "penalty");
    for c in [0.1, 0.25, 0.5, 1.0, 1.5, 2.0, 3.0, 4.0, 5.0] {
        let fp = solve_xc(&ctx, c, 1e-8).expect("fixed point");
        let dm = solve_dirmatch(&params, c, 1e-10).expect("closed form");
        println!(
            "{:>6}  {:>16.6}  {:>16.6}  {:>8.1}%",
            c,
            fp.asymptotic_interference,
            dm.limit_interference,
            100.0 * (dm.limit_interference / fp.asymptotic_interference - 1.0)
        );
    }
    println!();
    println!(
        "c -> 0 recovers the mean eigenvalue {:.1}; c -> inf approaches the lower edge {:.6}",
        params.lambda_bar, params.lambda_minus
    );
}
