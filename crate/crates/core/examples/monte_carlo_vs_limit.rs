//! Monte Carlo of the finite system against the asymptotic limits.
//!
//! Small sweep over feedback ratios and processing gains; each cell draws a
//! fresh interference matrix and codebook per trial. Growing n at fixed
//! ratios walks the estimates toward the limit line.
//!
//! ```text
//! cargo run --release --example monte_carlo_vs_limit
//! ```

use cdma_sigopt::dirmatch::solve_dirmatch;
use cdma_sigopt::randmat::{MatrixModel, SystemDims};
use cdma_sigopt::ratefn::{solve_xc, RateFnContext};
use cdma_sigopt::sim::{run_sweep, CellSpec, Criterion, SweepPlan};
use cdma_sigopt::spectrum::make_params;

fn main() {
    let tau = 2.0;
    let params = make_params(tau, false).unwrap();
    let ctx = RateFnContext::new(params);
    let trials = 800;

    let mut cells = Vec::new();
    for &c in &[0.5, 1.0] {
        for &n in &[8usize, 16, 32] {
            let m = (n as f64 * tau).round() as usize;
            let r_fb = (c * n as f64).round() as u32;
            for criterion in [Criterion::MinInterference, Criterion::DirectionMatch] {
                cells.push(CellSpec {
                    tau,
                    tall: false,
                    c,
                    dims: SystemDims::new(n, m, r_fb).unwrap(),
                    model: MatrixModel::GaussianEntries,
                    criterion,
                });
            }
        }
    }
    let plan = SweepPlan {
        master_seed: 42,
        trials,
        cells: cells.clone(),
    };
    println!("running {} cells x {trials} trials ...", cells.len());
    let estimates = run_sweep(&plan).expect("sweep");

    println!();
    println!(
        "{:>18}  {:>4}  {:>3}  {:>5}  {:>9}  {:>8}  {:>9}  {:>7}",
        "criterion", "c", "n", "r_fb", "mc mean", "std err", "limit", "rel err"
    );
    for (spec, est) in cells.iter().zip(&estimates) {
        let limit = match spec.criterion {
            Criterion::MinInterference => {
                solve_xc(&ctx, spec.c, 1e-8).unwrap().asymptotic_interference
            }
            Criterion::DirectionMatch => {
                solve_dirmatch(&params, spec.c, 1e-10).unwrap().limit_interference
            }
        };
        println!(
            "{:>18}  {:>4}  {:>3}  {:>5}  {:>9.5}  {:>8.5}  {:>9.5}  {:>+6.1}%",
            spec.criterion.as_str(),
            spec.c,
            spec.dims.n,
            spec.dims.r_fb,
            est.mean,
            est.std_error,
            limit,
            100.0 * (est.mean - limit) / limit
        );
    }
}
