//! Crowds-like forwarding: the analytic posterior and a seeded Monte Carlo check.
//!
//! `cargo run --release --example crowds -- [n] [p] [trials]`

use privest::crowds::{crowds_privacy, crowds_report, CrowdsConfig};

fn main() -> privest::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let arg = |i: usize, default: &str| args.get(i).cloned().unwrap_or_else(|| default.into());
    let n: usize = arg(0, "4").parse().expect("n is an integer");
    let p: f64 = arg(1, "0.5").parse().expect("p is a number");
    let trials: u64 = arg(2, "200000").parse().expect("trials is an integer");

    let a = crowds_privacy(n, p)?;
    println!("n={n} p={p}");
    println!(
        "  conditional privacy {:.6} (closed form {:.6})",
        a.conditional_privacy, a.formula
    );
    println!(
        "  posterior entropies H_inf={:.4} H_1={:.4} H_0={:.4}",
        a.h_inf, a.h_1, a.h_0
    );

    let r = crowds_report(&CrowdsConfig {
        n,
        p,
        trials,
        seed: 42,
    })?;
    println!(
        "  P(X=y|y): analytic {:.5}, simulated {:.5} (z = {:+.2}, worst per-user |z| = {:.2})",
        r.analytic_posterior_same,
        r.empirical_posterior_same,
        r.z_posterior_same,
        r.max_abs_z_per_user
    );

    println!(
        "\n  p \\ n    {}",
        [2, 5, 10].map(|n| format!("{n:>8}")).join("")
    );
    for p in [0.25, 0.5, 0.75] {
        let row: Vec<String> = [2, 5, 10]
            .iter()
            .map(|&n| crowds_privacy(n, p).map(|c| format!("{:>8.4}", c.conditional_privacy)))
            .collect::<privest::Result<_>>()?;
        println!("  {p:<8} {}", row.join(""));
    }
    Ok(())
}
