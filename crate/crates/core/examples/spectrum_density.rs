//! The limiting eigenvalue measure: density samples and moment checks.
//!
//! ```text
//! cargo run --example spectrum_density
//! ```

use cdma_sigopt::spectrum::{integrate, make_params};

fn main() {
    for (tau, tall) in [(2.0, false), (2.0, true)] {
        let p = make_params(tau, tall).unwrap();
        println!(
            "tau = {tau}, {}: support [{:.6}, {:.6}], atom at 0 with weight {:.3}",
            if tall { "rank-deficient (n > m)" } else { "full rank (n <= m)" },
            p.lambda_minus,
            p.lambda_plus,
            p.atom_weight()
        );
        let mass = integrate(&p, |_| 1.0, 1e-10).unwrap();
        let mean = integrate(&p, |l| l, 1e-10).unwrap();
        let second = integrate(&p, |l| l * l, 1e-10).unwrap();
        println!("  total mass {mass:.12}");
        println!("  mean       {mean:.12}   (trace identity: {} )", p.lambda_bar);
        println!("  variance   {:.12}", second - mean * mean);

        println!("  density profile:");
        let n = 9;
        for i in 0..n {
            let lambda = p.lambda_minus
                + (p.lambda_plus - p.lambda_minus) * (i as f64 + 0.5) / n as f64;
            let bar = "#".repeat((p.density(lambda) * 120.0) as usize);
            println!("   lambda {lambda:7.4}  {:8.5}  {bar}", p.density(lambda));
        }
        println!();
    }
}
