//! Privacy–utility frontier: the perturbation channel that leaks the least
//! mutual information about X while keeping the expected distortion within a
//! budget.
//!
//! The Lagrangian `I(X;Y) + s·E d(X,Y)` is minimized by Blahut–Arimoto
//! alternating minimization for a fixed slope `s` (bits per unit of
//! distortion); budgets are met by bisecting on `s`.

use serde::{Deserialize, Serialize};

use crate::bayes::{privacy_report, LossMatrix, Scenario};
use crate::error::{invalid, Error, Result};
use crate::prob::{Alphabet, Channel, Pmf};

/// Stop once successive Lagrangian values differ by less than this.
pub const OBJECTIVE_TOLERANCE: f64 = 1e-10;
pub const MAX_ITERATIONS: usize = 100_000;
/// Upper end of the slope bracket searched by [`frontier`].
pub const MAX_SLOPE: f64 = 65_536.0;
pub const MAX_BISECTION_STEPS: usize = 200;
/// Achieved distortion must land in `[D - tol, D]`.
pub const BUDGET_TOLERANCE: f64 = 1e-6;
/// Largest candidate count explored by [`grid_search_oracle`].
pub const ORACLE_CAP: u64 = 10_000_000;

#[derive(Clone, Debug, PartialEq)]
pub struct FrontierPoint {
    pub distortion_budget: f64,
    pub achieved_distortion: f64,
    /// Bits.
    pub mutual_info: f64,
    pub slope: f64,
    pub channel: Channel,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FailureKind {
    Infeasible,
    NoConvergence,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BudgetFailure {
    pub budget: f64,
    pub kind: FailureKind,
    pub message: String,
}

/// One entry per requested budget, in request order.
#[derive(Clone, Debug, PartialEq)]
pub enum CurveEntry {
    Point(FrontierPoint),
    Failed(BudgetFailure),
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct TradeoffCurve {
    pub entries: Vec<CurveEntry>,
}

impl TradeoffCurve {
    pub fn points(&self) -> impl Iterator<Item = &FrontierPoint> {
        self.entries.iter().filter_map(|e| match e {
            CurveEntry::Point(p) => Some(p),
            CurveEntry::Failed(_) => None,
        })
    }

    pub fn failures(&self) -> impl Iterator<Item = &BudgetFailure> {
        self.entries.iter().filter_map(|e| match e {
            CurveEntry::Failed(f) => Some(f),
            CurveEntry::Point(_) => None,
        })
    }

    /// Mutual information never increases with the budget (`slack` allowed).
    pub fn is_monotone(&self, slack: f64) -> bool {
        let pts: Vec<_> = self.points().collect();
        pts.windows(2)
            .all(|w| w[1].mutual_info <= w[0].mutual_info + slack)
    }
}

/// Prior restricted to its support, with the costs of the kept rows.
struct Reduced {
    keep: Vec<usize>,
    p: Vec<f64>,
    costs: Vec<Vec<f64>>,
}

fn reduce(prior: &Pmf, loss: &LossMatrix) -> Result<Reduced> {
    prior
        .alphabet()
        .ensure_same(loss.unknown_alphabet(), "prior and loss")?;
    let keep: Vec<usize> = (0..prior.len()).filter(|&x| prior.get(x) > 0.0).collect();
    let n_out = loss.estimate_alphabet().len();
    Ok(Reduced {
        p: keep.iter().map(|&x| prior.get(x)).collect(),
        costs: keep
            .iter()
            .map(|&x| (0..n_out).map(|y| loss.get(x, y)).collect())
            .collect(),
        keep,
    })
}

impl Reduced {
    fn n_out(&self) -> usize {
        self.costs[0].len()
    }

    fn distortion(&self, w: &[Vec<f64>]) -> f64 {
        self.p
            .iter()
            .zip(w)
            .zip(&self.costs)
            .map(|((&px, row), c)| px * row.iter().zip(c).map(|(a, b)| a * b).sum::<f64>())
            .sum()
    }

    fn output_marginal(&self, w: &[Vec<f64>]) -> Vec<f64> {
        let mut q = vec![0.0; self.n_out()];
        for (&px, row) in self.p.iter().zip(w) {
            for (qy, &wy) in q.iter_mut().zip(row) {
                *qy += px * wy;
            }
        }
        q
    }

    fn information(&self, w: &[Vec<f64>], q: &[f64]) -> f64 {
        let mut i = 0.0;
        for (&px, row) in self.p.iter().zip(w) {
            for (&wy, &qy) in row.iter().zip(q) {
                // skip on the joint mass: p(x) w(y|x) can underflow while w/q is infinite
                let joint = px * wy;
                if joint > 0.0 {
                    i += joint * (wy / qy).log2();
                }
            }
        }
        i.max(0.0)
    }

    /// Expected distortion of each constant output.
    fn constant_output_distortions(&self) -> Vec<f64> {
        (0..self.n_out())
            .map(|y| {
                self.p
                    .iter()
                    .zip(&self.costs)
                    .map(|(px, c)| px * c[y])
                    .sum()
            })
            .collect()
    }

    fn min_distortion(&self) -> f64 {
        self.p
            .iter()
            .zip(&self.costs)
            .map(|(px, c)| px * c.iter().copied().fold(f64::INFINITY, f64::min))
            .sum()
    }

    /// Re-expands the support channel to the full prior alphabet; dropped
    /// symbols get the output marginal as their row.
    fn expand(&self, prior: &Pmf, loss: &LossMatrix, w: &[Vec<f64>], q: &[f64]) -> Channel {
        let mut rows = vec![q.to_vec(); prior.len()];
        for (k, &x) in self.keep.iter().enumerate() {
            rows[x] = w[k].clone();
        }
        Channel::new(
            prior.alphabet().clone(),
            loss.estimate_alphabet().clone(),
            rows,
        )
        .expect("rows are normalized")
    }
}

fn point(
    red: &Reduced,
    prior: &Pmf,
    loss: &LossMatrix,
    slope: f64,
    w: &[Vec<f64>],
) -> FrontierPoint {
    let q = red.output_marginal(w);
    let d = red.distortion(w);
    FrontierPoint {
        distortion_budget: d,
        achieved_distortion: d,
        mutual_info: red.information(w, &q),
        slope,
        channel: red.expand(prior, loss, w, &q),
    }
}

/// Blahut–Arimoto at a fixed slope.
pub fn blahut_arimoto(prior: &Pmf, loss: &LossMatrix, slope: f64) -> Result<FrontierPoint> {
    blahut_arimoto_traced(prior, loss, slope).map(|(p, _)| p)
}

/// Like [`blahut_arimoto`], also returning the Lagrangian after every iteration.
pub fn blahut_arimoto_traced(
    prior: &Pmf,
    loss: &LossMatrix,
    slope: f64,
) -> Result<(FrontierPoint, Vec<f64>)> {
    if !(slope >= 0.0) || !slope.is_finite() {
        return invalid(format!("slope must be finite and >= 0, got {slope}"));
    }
    let red = reduce(prior, loss)?;
    let n_out = red.n_out();

    if slope == 0.0 {
        // no price on distortion: any constant output is optimal, pick the cheapest
        let dists = red.constant_output_distortions();
        let best = (1..n_out).fold(0, |b, y| if dists[y] < dists[b] { y } else { b });
        let w: Vec<Vec<f64>> = red
            .p
            .iter()
            .map(|_| {
                (0..n_out)
                    .map(|y| if y == best { 1.0 } else { 0.0 })
                    .collect()
            })
            .collect();
        return Ok((point(&red, prior, loss, 0.0, &w), vec![0.0]));
    }

    // 2^{-s (d - min_y d)} avoids underflow of whole rows at large slopes
    let kernel: Vec<Vec<f64>> = red
        .costs
        .iter()
        .map(|c| {
            let m = c.iter().copied().fold(f64::INFINITY, f64::min);
            c.iter().map(|&d| (-slope * (d - m)).exp2()).collect()
        })
        .collect();

    let mut q = vec![1.0 / n_out as f64; n_out];
    let mut w = vec![vec![0.0; n_out]; red.p.len()];
    let mut trace = Vec::new();
    let mut previous = f64::INFINITY;
    for _ in 0..MAX_ITERATIONS {
        for (row, k) in w.iter_mut().zip(&kernel) {
            let mut z = 0.0;
            for ((wy, &qy), &ky) in row.iter_mut().zip(&q).zip(k) {
                *wy = qy * ky;
                z += *wy;
            }
            row.iter_mut().for_each(|wy| *wy /= z);
        }
        q = red.output_marginal(&w);
        let objective = red.information(&w, &q) + slope * red.distortion(&w);
        debug_assert!(
            objective <= previous + 1e-9,
            "Lagrangian increased: {previous} -> {objective}"
        );
        trace.push(objective);
        if (previous - objective).abs() < OBJECTIVE_TOLERANCE {
            return Ok((point(&red, prior, loss, slope, &w), trace));
        }
        previous = objective;
    }
    let residual = if trace.len() >= 2 {
        (trace[trace.len() - 2] - trace[trace.len() - 1]).abs()
    } else {
        f64::NAN
    };
    Err(Error::ConvergenceFailure {
        iterations: MAX_ITERATIONS,
        residual,
        last: Box::new(point(&red, prior, loss, slope, &w)),
    })
}

/// Minimum-information channel for one distortion budget.
pub fn frontier_point(prior: &Pmf, loss: &LossMatrix, budget: f64) -> Result<FrontierPoint> {
    if !(budget >= 0.0) || !budget.is_finite() {
        return invalid(format!(
            "distortion budget must be finite and >= 0, got {budget}"
        ));
    }
    let red = reduce(prior, loss)?;
    let floor = red.min_distortion();
    if budget < floor - 1e-12 {
        return invalid(format!(
            "budget {budget} is below the smallest achievable distortion {floor}"
        ));
    }
    let with_budget = |mut p: FrontierPoint| {
        p.distortion_budget = budget;
        p
    };

    let free = blahut_arimoto(prior, loss, 0.0)?;
    if free.achieved_distortion <= budget {
        return Ok(with_budget(free));
    }
    let mut best = blahut_arimoto(prior, loss, MAX_SLOPE)?;
    if best.achieved_distortion > budget + 1e-9 {
        return invalid(format!(
            "budget {budget} not reachable within slope {MAX_SLOPE} (distortion {})",
            best.achieved_distortion
        ));
    }
    let (mut lo, mut hi) = (0.0, MAX_SLOPE);
    for _ in 0..MAX_BISECTION_STEPS {
        if best.achieved_distortion >= budget - BUDGET_TOLERANCE {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let p = blahut_arimoto(prior, loss, mid)?;
        if p.achieved_distortion > budget {
            lo = mid;
        } else {
            hi = mid;
            best = p;
        }
    }
    Ok(with_budget(best))
}

/// One frontier point per budget. Budgets must be ascending and >= 0.
pub fn frontier(prior: &Pmf, loss: &LossMatrix, budgets: &[f64]) -> Result<TradeoffCurve> {
    if budgets.is_empty() {
        return invalid("no distortion budgets given");
    }
    if budgets.windows(2).any(|w| w[1] < w[0]) {
        return invalid("distortion budgets must be ascending");
    }
    reduce(prior, loss)?;
    let entries = budgets
        .iter()
        .map(|&d| match frontier_point(prior, loss, d) {
            Ok(p) => CurveEntry::Point(p),
            Err(Error::ConvergenceFailure { .. }) => CurveEntry::Failed(BudgetFailure {
                budget: d,
                kind: FailureKind::NoConvergence,
                message: "Blahut–Arimoto did not converge".into(),
            }),
            Err(e) => CurveEntry::Failed(BudgetFailure {
                budget: d,
                kind: FailureKind::Infeasible,
                message: e.to_string(),
            }),
        })
        .collect();
    Ok(TradeoffCurve { entries })
}

/// All ways of splitting `total` units over `parts` cells.
fn compositions(total: usize, parts: usize) -> Vec<Vec<usize>> {
    if parts == 1 {
        return vec![vec![total]];
    }
    (0..=total)
        .flat_map(|first| {
            compositions(total - first, parts - 1)
                .into_iter()
                .map(move |mut rest| {
                    rest.insert(0, first);
                    rest
                })
        })
        .collect()
}

fn binomial(n: u64, k: u64) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// I(X;Y) in bits for prior `p` and channel rows `w`, written out directly so
/// the oracle shares no code with the iterative solver.
fn grid_information(p: &[f64], w: &[&[f64]]) -> f64 {
    let n_out = w[0].len();
    let q: Vec<f64> = (0..n_out)
        .map(|y| p.iter().zip(w).map(|(px, row)| px * row[y]).sum())
        .collect();
    let mut i = 0.0;
    for (px, row) in p.iter().zip(w) {
        for (wy, qy) in row.iter().zip(&q) {
            let joint = px * wy;
            if joint > 0.0 {
                i += joint * (wy / qy).log2();
            }
        }
    }
    i.max(0.0)
}

/// Exhaustive search over channels whose rows are multiples of `1/resolution`.
/// Returns the feasible channel with the least mutual information.
pub fn grid_search_oracle(
    prior: &Pmf,
    loss: &LossMatrix,
    budget: f64,
    resolution: usize,
) -> Result<FrontierPoint> {
    if resolution == 0 {
        return invalid("resolution must be >= 1");
    }
    let n_in = prior.len();
    let n_out = loss.estimate_alphabet().len();
    prior
        .alphabet()
        .ensure_same(loss.unknown_alphabet(), "prior and loss")?;
    let per_row = binomial((resolution + n_out - 1) as u64, (n_out - 1) as u64);
    let required = per_row.powi(n_in as i32);
    if required > ORACLE_CAP as f64 {
        return Err(Error::ResourceLimit {
            required,
            cap: ORACLE_CAP,
        });
    }
    let candidates: Vec<Vec<f64>> = compositions(resolution, n_out)
        .into_iter()
        .map(|c| {
            c.into_iter()
                .map(|u| u as f64 / resolution as f64)
                .collect()
        })
        .collect();
    // each row's contribution to the expected distortion
    let row_cost: Vec<Vec<f64>> = (0..n_in)
        .map(|x| {
            candidates
                .iter()
                .map(|w| {
                    prior.get(x)
                        * w.iter()
                            .enumerate()
                            .map(|(y, wy)| wy * loss.get(x, y))
                            .sum::<f64>()
                })
                .collect()
        })
        .collect();

    let mut choice = vec![0usize; n_in];
    let mut best: Option<(f64, f64, Vec<usize>)> = None;
    loop {
        let d: f64 = (0..n_in).map(|x| row_cost[x][choice[x]]).sum();
        if d <= budget + 1e-12 {
            let rows: Vec<&[f64]> = choice.iter().map(|&c| candidates[c].as_slice()).collect();
            let i = grid_information(prior.probs(), &rows);
            if best.as_ref().is_none_or(|(bi, _, _)| i < *bi) {
                best = Some((i, d, choice.clone()));
            }
        }
        // odometer
        let mut x = 0;
        while x < n_in {
            choice[x] += 1;
            if choice[x] < candidates.len() {
                break;
            }
            choice[x] = 0;
            x += 1;
        }
        if x == n_in {
            break;
        }
    }
    let Some((i, d, choice)) = best else {
        return invalid(format!("no grid channel meets distortion budget {budget}"));
    };
    Ok(FrontierPoint {
        distortion_budget: budget,
        achieved_distortion: d,
        mutual_info: i,
        slope: f64::NAN,
        channel: Channel::new(
            prior.alphabet().clone(),
            loss.estimate_alphabet().clone(),
            choice.iter().map(|&c| candidates[c].clone()).collect(),
        )?,
    })
}

/// Results of the binary perturbation example.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BinaryExample {
    pub avg_privacy: f64,
    pub distortion: f64,
    /// Best average privacy subject to utility `1 - D >= u0`.
    pub max_privacy_at_u0: f64,
}

fn binary_flip_report(flip: f64) -> Result<(f64, f64)> {
    let bits = Alphabet::indexed(2);
    let prior = Pmf::uniform(bits)?;
    let scenario = Scenario::hamming(prior, Channel::binary_symmetric(flip)?)?;
    let r = privacy_report(&scenario)?;
    Ok((
        r.average,
        r.average_distortion.expect("hamming system loss"),
    ))
}

/// A uniform bit is released flipped with probability `p_flip`; privacy and
/// distortion both come from the generic report, and the utility-constrained
/// optimum is found by searching the largest admissible flip probability.
pub fn binary_example(p_flip: f64, u0: f64) -> Result<BinaryExample> {
    if !(0.0..0.5).contains(&p_flip) {
        return invalid(format!(
            "flip probability must lie in [0, 1/2), got {p_flip}"
        ));
    }
    if !(u0 > 0.5 && u0 <= 1.0) {
        return invalid(format!("utility threshold must lie in (1/2, 1], got {u0}"));
    }
    let (avg_privacy, distortion) = binary_flip_report(p_flip)?;

    let (mut lo, mut hi) = (0.0f64, 0.5f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let (_, d) = binary_flip_report(mid)?;
        if 1.0 - d >= u0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let (max_privacy_at_u0, _) = binary_flip_report(lo)?;
    Ok(BinaryExample {
        avg_privacy,
        distortion,
        max_privacy_at_u0,
    })
}
