//! Location privacy on a grid: users report a perturbed cell and the attacker
//! estimates the true cell, privacy being the mean squared error.

use serde::{Deserialize, Serialize};

use crate::bayes::{bayes_estimate, LossMatrix, Scenario};
use crate::error::{invalid, Result};
use crate::prob::{Alphabet, Channel, Pmf};

/// How reported cells are drawn from true cells.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum NoiseModel {
    /// Report the true cell.
    None,
    /// Isotropic Gaussian noise with standard deviation `sigma` (length
    /// units), integrated over each cell and truncated at the grid edge.
    Gaussian { sigma: f64 },
    /// Explicit row-major channel over cells.
    Matrix { rows: Vec<Vec<f64>> },
}

/// Grid scenario file: cells are indexed row-major, `index = iy * width + ix`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LbsGridJson {
    pub width: usize,
    pub height: usize,
    #[serde(default = "one")]
    pub cell_size: f64,
    /// Row-major prior over cells; uniform when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prior: Option<Vec<f64>>,
    pub noise: NoiseModel,
}

fn one() -> f64 {
    1.0
}

#[derive(Clone, Debug)]
pub struct LbsGrid {
    pub width: usize,
    pub height: usize,
    pub cell_size: f64,
    pub prior: Pmf,
    pub noise: Channel,
}

/// Cell alphabet labelled `"ix,iy"` and embedded at the cell centers.
pub fn cell_alphabet(width: usize, height: usize, cell_size: f64) -> Result<Alphabet> {
    if width == 0 || height == 0 {
        return invalid("grid must have at least one cell");
    }
    if !(cell_size > 0.0) || !cell_size.is_finite() {
        return invalid(format!("cell size must be positive, got {cell_size}"));
    }
    let mut labels = Vec::with_capacity(width * height);
    let mut centers = Vec::with_capacity(width * height);
    for iy in 0..height {
        for ix in 0..width {
            labels.push(format!("{ix},{iy}"));
            centers.push(vec![
                (ix as f64 + 0.5) * cell_size,
                (iy as f64 + 0.5) * cell_size,
            ]);
        }
    }
    Alphabet::new(labels)?.with_embedding(centers)
}

fn normal_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z / std::f64::consts::SQRT_2)
}

/// Probability that N(center, sigma²) lands in each of `cells` intervals of
/// width `cell_size` starting at 0.
fn interval_masses(center: f64, sigma: f64, cells: usize, cell_size: f64) -> Vec<f64> {
    (0..cells)
        .map(|j| {
            let a = j as f64 * cell_size;
            let b = a + cell_size;
            normal_cdf((b - center) / sigma) - normal_cdf((a - center) / sigma)
        })
        .collect()
}

/// Gaussian perturbation discretized to the grid, each row renormalized.
pub fn gaussian_channel(
    alphabet: &Alphabet,
    width: usize,
    height: usize,
    cell_size: f64,
    sigma: f64,
) -> Result<Channel> {
    if !(sigma > 0.0) || !sigma.is_finite() {
        return invalid(format!("sigma must be positive, got {sigma}"));
    }
    let centers = alphabet.embedding().expect("cell alphabet is embedded");
    let rows = centers
        .iter()
        .map(|c| {
            let mx = interval_masses(c[0], sigma, width, cell_size);
            let my = interval_masses(c[1], sigma, height, cell_size);
            let z: f64 = mx.iter().sum::<f64>() * my.iter().sum::<f64>();
            my.iter()
                .flat_map(|py| mx.iter().map(move |px| px * py / z))
                .collect()
        })
        .collect();
    Channel::new(alphabet.clone(), alphabet.clone(), rows)
}

impl LbsGrid {
    pub fn new(
        width: usize,
        height: usize,
        cell_size: f64,
        prior: Option<Vec<f64>>,
        noise: &NoiseModel,
    ) -> Result<Self> {
        let cells = cell_alphabet(width, height, cell_size)?;
        let prior = match prior {
            Some(p) => Pmf::new(cells.clone(), p)?,
            None => Pmf::uniform(cells.clone())?,
        };
        let noise = match noise {
            NoiseModel::None => Channel::identity(cells),
            NoiseModel::Gaussian { sigma } => {
                gaussian_channel(&cells, width, height, cell_size, *sigma)?
            }
            NoiseModel::Matrix { rows } => Channel::new(cells.clone(), cells, rows.clone())?,
        };
        Ok(Self {
            width,
            height,
            cell_size,
            prior,
            noise,
        })
    }

    pub fn from_json(cfg: &LbsGridJson) -> Result<Self> {
        Self::new(
            cfg.width,
            cfg.height,
            cfg.cell_size,
            cfg.prior.clone(),
            &cfg.noise,
        )
    }

    /// Grid with an arbitrary embedded cell alphabet (used for non-rectangular layouts).
    pub fn from_parts(prior: Pmf, noise: Channel) -> Result<Self> {
        if prior.alphabet().embedding().is_none() {
            return invalid("cells need coordinates for squared-error privacy");
        }
        prior
            .alphabet()
            .ensure_same(noise.input_alphabet(), "prior and noise input")?;
        prior
            .alphabet()
            .ensure_same(noise.output_alphabet(), "prior and noise output")?;
        Ok(Self {
            width: prior.len(),
            height: 1,
            cell_size: 1.0,
            prior,
            noise,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LbsObservation {
    pub y: String,
    pub probability: f64,
    /// Best cell under squared error.
    pub grid_estimate: String,
    pub grid_mse: f64,
    /// Posterior mean location.
    pub mean_estimate: Vec<f64>,
    /// Trace of the posterior covariance.
    pub mean_mse: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LbsPrivacy {
    /// Average privacy when the attacker must name a cell.
    pub avg_mse_grid: f64,
    /// Average privacy against the unconstrained conditional-mean estimate.
    pub avg_mse_mean: f64,
    pub per_observation: Vec<LbsObservation>,
}

/// Squared-error privacy of a grid scenario under both attacker models.
pub fn lbs_privacy(grid: &LbsGrid) -> Result<LbsPrivacy> {
    let cells = grid.prior.alphabet();
    let Some(centers) = cells.embedding() else {
        return invalid("cells need coordinates for squared-error privacy");
    };
    let loss = LossMatrix::squared(cells.clone(), cells.clone())?;
    let scenario = Scenario::new(grid.prior.clone(), grid.noise.clone(), loss, None)?;
    let dim = centers[0].len();

    let mut per_observation = Vec::new();
    let (mut avg_grid, mut avg_mean) = (0.0, 0.0);
    for y in 0..grid.noise.output_alphabet().len() {
        let py = scenario.observation_probability(y);
        if py <= 0.0 {
            continue;
        }
        let post = scenario.posterior(y)?;
        let est = bayes_estimate(&post, scenario.attacker_loss())?;
        let mut mean = vec![0.0; dim];
        for (w, c) in post.probs().iter().zip(centers) {
            for (m, v) in mean.iter_mut().zip(c) {
                *m += w * v;
            }
        }
        let mean_mse: f64 = post
            .probs()
            .iter()
            .zip(centers)
            .map(|(w, c)| {
                w * c
                    .iter()
                    .zip(&mean)
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
            })
            .sum();
        avg_grid += py * est.risk;
        avg_mean += py * mean_mse;
        per_observation.push(LbsObservation {
            y: grid.noise.output_alphabet().symbol(y).to_owned(),
            probability: py,
            grid_estimate: cells.symbol(est.index).to_owned(),
            grid_mse: est.risk,
            mean_estimate: mean,
            mean_mse,
        });
    }
    Ok(LbsPrivacy {
        avg_mse_grid: avg_grid,
        avg_mse_mean: avg_mean,
        per_observation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn noiseless_grid_has_zero_mse() {
        let g = LbsGrid::new(3, 2, 1.0, None, &NoiseModel::None).unwrap();
        let r = lbs_privacy(&g).unwrap();
        assert_eq!(r.avg_mse_grid, 0.0);
        assert_eq!(r.avg_mse_mean, 0.0);
    }

    #[test]
    fn two_cells_with_uninformative_reports() {
        let g = LbsGrid::new(
            2,
            1,
            1.0,
            None,
            &NoiseModel::Matrix {
                rows: vec![vec![0.5, 0.5]; 2],
            },
        )
        .unwrap();
        let r = lbs_privacy(&g).unwrap();
        assert_abs_diff_eq!(r.avg_mse_mean, 0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(r.avg_mse_grid, 0.5, epsilon = 1e-15);
        assert_eq!(r.per_observation[0].mean_estimate, vec![1.0, 0.5]);
    }

    #[test]
    fn gaussian_rows_are_normalized_and_peaked() {
        let g = LbsGrid::new(5, 4, 2.0, None, &NoiseModel::Gaussian { sigma: 2.0 }).unwrap();
        for (x, row) in g.noise.rows().iter().enumerate() {
            assert_abs_diff_eq!(row.iter().sum::<f64>(), 1.0, epsilon = 1e-12);
            let argmax = (0..row.len()).fold(0, |b, i| if row[i] > row[b] { i } else { b });
            assert_eq!(argmax, x);
        }
        // middle column (ix = 2) is mirror-symmetric in x
        let r = &g.noise.rows()[2];
        for iy in 0..4 {
            assert_abs_diff_eq!(r[iy * 5 + 1], r[iy * 5 + 3], epsilon = 1e-15);
            assert_abs_diff_eq!(r[iy * 5], r[iy * 5 + 4], epsilon = 1e-15);
        }
    }

    #[test]
    fn one_dimensional_gaussian_masses_match_erf() {
        let m = interval_masses(0.5, 1.0, 1, 1.0);
        let expected = libm::erf(0.5 / std::f64::consts::SQRT_2);
        assert_abs_diff_eq!(m[0], expected, epsilon = 1e-15);
    }

    #[test]
    fn config_errors() {
        assert!(LbsGrid::new(0, 2, 1.0, None, &NoiseModel::None).is_err());
        assert!(LbsGrid::new(2, 2, -1.0, None, &NoiseModel::None).is_err());
        assert!(LbsGrid::new(2, 2, 1.0, None, &NoiseModel::Gaussian { sigma: 0.0 }).is_err());
        assert!(LbsGrid::new(2, 2, 1.0, Some(vec![1.0]), &NoiseModel::None).is_err());
        let plain = Pmf::uniform(Alphabet::indexed(2)).unwrap();
        assert!(LbsGrid::from_parts(plain, Channel::identity(Alphabet::indexed(2))).is_err());
    }
}
