//! Interference statistics under the two interference-matrix models.
//!
//! Entries i.i.d. Gaussian with variance 1/n versus exactly unit-norm
//! isotropic columns: different at small dimensions, indistinguishable as
//! the system grows.
//!
//! ```text
//! cargo run --release --example two_matrix_models
//! ```

use cdma_sigopt::randmat::{MatrixModel, SystemDims};
use cdma_sigopt::sim::{run_sweep, CellSpec, Criterion, SweepPlan};

fn main() {
    let tau = 2.0;
    let c = 1.0;
    let trials = 3000;
    println!("min-interference criterion, tau = {tau}, c = {c}, {trials} trials per cell");
    println!();
    println!(
        "{:>4}  {:>4}  {:>12}  {:>12}  {:>9}",
        "n", "m", "gaussian", "isotropic", "rel diff"
    );
    for &n in &[4usize, 8, 16] {
        let m = (n as f64 * tau).round() as usize;
        let r_fb = (c * n as f64).round() as u32;
        let cells: Vec<CellSpec> = [MatrixModel::GaussianEntries, MatrixModel::IsotropicColumns]
            .into_iter()
            .map(|model| CellSpec {
                tau,
                tall: false,
                c,
                dims: SystemDims::new(n, m, r_fb).unwrap(),
                model,
                criterion: Criterion::MinInterference,
            })
            .collect();
        let plan = SweepPlan {
            master_seed: 7,
            trials,
            cells,
        };
        let est = run_sweep(&plan).expect("sweep");
        println!(
            "{:>4}  {:>4}  {:>12.6}  {:>12.6}  {:>8.2}%",
            n,
            m,
            est[0].mean,
            est[1].mean,
            100.0 * (est[0].mean - est[1].mean).abs() / est[1].mean
        );
    }
    println!();
    println!("both models share the same asymptotic limits");
}
