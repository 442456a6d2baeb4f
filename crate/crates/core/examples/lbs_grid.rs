//! Location privacy on a grid under Gaussian perturbation, measured as the
//! attacker's mean squared error. Naming a cell costs more than reporting
//! the posterior mean.

use privest::lbs::{lbs_privacy, LbsGrid, NoiseModel};

fn main() -> privest::Result<()> {
    println!("{:>6} {:>14} {:>14}", "sigma", "MSE (cell)", "MSE (mean)");
    for sigma in [0.25, 0.5, 1.0, 2.0, 4.0] {
        let grid = LbsGrid::new(8, 8, 1.0, None, &NoiseModel::Gaussian { sigma })?;
        let r = lbs_privacy(&grid)?;
        println!(
            "{sigma:>6} {:>14.4} {:>14.4}",
            r.avg_mse_grid, r.avg_mse_mean
        );
    }

    let exact = LbsGrid::new(8, 8, 1.0, None, &NoiseModel::None)?;
    println!("\nnoiseless: {:?}", lbs_privacy(&exact)?.avg_mse_grid);
    Ok(())
}
