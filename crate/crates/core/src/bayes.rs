//! Privacy as the estimation error of a Bayes-optimal attacker.
//!
//! Given a prior on the private value X, a channel producing the observation
//! Y, and the attacker's loss `d(x, x̂)`, the conditional privacy of an
//! observation is the posterior-expected loss of the Bayes estimate. Worst-case
//! and average privacy take the minimum and the expectation over Y.
//!
//! A "risk" orientation (loss `-d`) would simply flip signs; only the privacy
//! orientation is exposed.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::info::{kl_divergence_nats, min_entropy, total_variation};
use crate::prob::{joint_from, marginals, posterior, Alphabet, Channel, JointPmf, Pmf};

/// Distortion table `d(x, x̂)` over unknown × estimate alphabets.
#[derive(Clone, Debug, PartialEq)]
pub struct LossMatrix {
    unknown: Alphabet,
    estimates: Alphabet,
    costs: Vec<f64>,
    d_max: f64,
    hamming: bool,
}

impl LossMatrix {
    pub fn new(unknown: Alphabet, estimates: Alphabet, costs: Vec<Vec<f64>>) -> Result<Self> {
        if unknown.is_empty() || estimates.is_empty() {
            return invalid("loss matrix over an empty alphabet");
        }
        if costs.len() != unknown.len() || costs.iter().any(|r| r.len() != estimates.len()) {
            return invalid(format!(
                "loss matrix must be {}x{}",
                unknown.len(),
                estimates.len()
            ));
        }
        let costs: Vec<f64> = costs.into_iter().flatten().collect();
        if let Some(c) = costs.iter().find(|c| !c.is_finite() || **c < 0.0) {
            return invalid(format!("loss entries must be finite and >= 0, got {c}"));
        }
        let d_max = costs.iter().copied().fold(0.0, f64::max);
        let n = estimates.len();
        let hamming = unknown.same_symbols(&estimates)
            && costs
                .iter()
                .enumerate()
                .all(|(i, &c)| c == if i / n == i % n { 0.0 } else { 1.0 });
        Ok(Self {
            unknown,
            estimates,
            costs,
            d_max,
            hamming,
        })
    }

    /// 0/1 loss on matching labels.
    pub fn hamming(unknown: Alphabet, estimates: Alphabet) -> Self {
        let costs = unknown
            .symbols()
            .iter()
            .map(|x| {
                estimates
                    .symbols()
                    .iter()
                    .map(|e| if x == e { 0.0 } else { 1.0 })
                    .collect()
            })
            .collect();
        Self::new(unknown, estimates, costs).expect("0/1 costs are valid")
    }

    /// Hamming loss with the estimate alphabet equal to the unknown alphabet.
    pub fn hamming_on(alphabet: &Alphabet) -> Self {
        Self::hamming(alphabet.clone(), alphabet.clone())
    }

    /// Squared Euclidean distance between embeddings.
    pub fn squared(unknown: Alphabet, estimates: Alphabet) -> Result<Self> {
        Self::from_embedding(unknown, estimates, |a, b| {
            a.iter().zip(b).map(|(u, v)| (u - v) * (u - v)).sum()
        })
    }

    /// Euclidean distance between embeddings.
    pub fn absolute(unknown: Alphabet, estimates: Alphabet) -> Result<Self> {
        Self::from_embedding(unknown, estimates, |a, b| {
            a.iter()
                .zip(b)
                .map(|(u, v)| (u - v) * (u - v))
                .sum::<f64>()
                .sqrt()
        })
    }

    fn from_embedding(
        unknown: Alphabet,
        estimates: Alphabet,
        dist: impl Fn(&[f64], &[f64]) -> f64,
    ) -> Result<Self> {
        let (Some(eu), Some(ee)) = (unknown.embedding(), estimates.embedding()) else {
            return invalid("geometric loss requires embeddings on both alphabets");
        };
        if eu[0].len() != ee[0].len() {
            return invalid("embedding dimensions differ between alphabets");
        }
        let costs = eu
            .iter()
            .map(|a| ee.iter().map(|b| dist(a, b)).collect())
            .collect();
        Self::new(unknown, estimates, costs)
    }

    pub fn unknown_alphabet(&self) -> &Alphabet {
        &self.unknown
    }

    pub fn estimate_alphabet(&self) -> &Alphabet {
        &self.estimates
    }

    pub fn get(&self, x: usize, xhat: usize) -> f64 {
        self.costs[x * self.estimates.len() + xhat]
    }

    pub fn d_max(&self) -> f64 {
        self.d_max
    }

    pub fn is_hamming(&self) -> bool {
        self.hamming
    }

    pub fn to_matrix(&self) -> Vec<Vec<f64>> {
        self.costs
            .chunks(self.estimates.len())
            .map(<[f64]>::to_vec)
            .collect()
    }
}

/// Σ_x p(x) d(x, x̂).
pub fn expected_loss(dist: &Pmf, loss: &LossMatrix, xhat: usize) -> f64 {
    if loss.hamming {
        // same quantity, written as a complement so uniform cases stay exact
        return 1.0 - dist.get(xhat);
    }
    dist.probs()
        .iter()
        .enumerate()
        .map(|(x, &p)| p * loss.get(x, xhat))
        .sum()
}

/// Bayes decision for one posterior.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Estimate {
    pub index: usize,
    /// Attained conditional risk.
    pub risk: f64,
}

/// Minimizer of the posterior-expected loss; lowest index wins ties.
pub fn bayes_estimate(posterior: &Pmf, loss: &LossMatrix) -> Result<Estimate> {
    posterior
        .alphabet()
        .ensure_same(&loss.unknown, "posterior and loss unknown alphabet")?;
    let mut best = Estimate {
        index: 0,
        risk: f64::INFINITY,
    };
    for xhat in 0..loss.estimates.len() {
        let r: f64 = posterior
            .probs()
            .iter()
            .enumerate()
            .map(|(x, &p)| p * loss.get(x, xhat))
            .sum();
        if r < best.risk {
            best = Estimate {
                index: xhat,
                risk: r,
            };
        }
    }
    best.risk = expected_loss(posterior, loss, best.index);
    Ok(best)
}

/// Maximum a posteriori estimate and its error probability `1 - max p`.
pub fn map_estimate(posterior: &Pmf) -> Estimate {
    let (index, pmax) = posterior.max();
    Estimate {
        index,
        risk: 1.0 - pmax,
    }
}

/// Prior, attacker-facing channel and losses. `system_loss`, when present,
/// measures the distortion between the channel input and output.
#[derive(Clone, Debug)]
pub struct Scenario {
    prior: Pmf,
    channel: Channel,
    attacker_loss: LossMatrix,
    system_loss: Option<LossMatrix>,
    joint: JointPmf,
}

impl Scenario {
    pub fn new(
        prior: Pmf,
        channel: Channel,
        attacker_loss: LossMatrix,
        system_loss: Option<LossMatrix>,
    ) -> Result<Self> {
        prior
            .alphabet()
            .ensure_same(attacker_loss.unknown_alphabet(), "prior and attacker loss")?;
        if let Some(s) = &system_loss {
            prior
                .alphabet()
                .ensure_same(s.unknown_alphabet(), "prior and system loss input")?;
            channel.output_alphabet().ensure_same(
                s.estimate_alphabet(),
                "channel output and system loss output",
            )?;
        }
        let joint = joint_from(&prior, &channel)?;
        Ok(Self {
            prior,
            channel,
            attacker_loss,
            system_loss,
            joint,
        })
    }

    /// Scenario with Hamming loss for the attacker (and for the system, when
    /// the channel maps an alphabet onto itself).
    pub fn hamming(prior: Pmf, channel: Channel) -> Result<Self> {
        let attacker = LossMatrix::hamming_on(prior.alphabet());
        let system = channel
            .input_alphabet()
            .same_symbols(channel.output_alphabet())
            .then(|| LossMatrix::hamming_on(channel.output_alphabet()));
        Self::new(prior, channel, attacker, system)
    }

    pub fn prior(&self) -> &Pmf {
        &self.prior
    }

    pub fn channel(&self) -> &Channel {
        &self.channel
    }

    pub fn attacker_loss(&self) -> &LossMatrix {
        &self.attacker_loss
    }

    pub fn system_loss(&self) -> Option<&LossMatrix> {
        self.system_loss.as_ref()
    }

    pub fn joint(&self) -> &JointPmf {
        &self.joint
    }

    pub fn observation_probability(&self, y: usize) -> f64 {
        self.joint.col_mass(y)
    }

    pub fn posterior(&self, y: usize) -> Result<Pmf> {
        posterior(&self.joint, y)
    }
}

/// Attacker's error given observation `y`.
pub fn conditional_privacy(scenario: &Scenario, y_index: usize) -> Result<f64> {
    let post = scenario.posterior(y_index)?;
    Ok(bayes_estimate(&post, &scenario.attacker_loss)?.risk)
}

/// Conditional privacy next to `1 - 2^{-H_inf(X|y)}`; Hamming loss only.
pub fn min_entropy_identity(scenario: &Scenario, y_index: usize) -> Result<(f64, f64)> {
    if !scenario.attacker_loss.is_hamming() {
        return invalid("the min-entropy identity holds only for Hamming loss");
    }
    let privacy = conditional_privacy(scenario, y_index)?;
    let post = scenario.posterior(y_index)?;
    Ok((privacy, 1.0 - (-min_entropy(&post)).exp2()))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObservationPrivacy {
    pub y: String,
    pub y_index: usize,
    pub probability: f64,
    pub conditional_privacy: f64,
    pub bayes_estimate: String,
    pub estimate_index: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PrivacyReport {
    pub per_observation: Vec<ObservationPrivacy>,
    /// Observations with zero probability, omitted from the table.
    pub unobservable: Vec<String>,
    pub worst_case: f64,
    pub average: f64,
    pub average_distortion: Option<f64>,
}

/// Conditional privacy of every realizable observation, worst-case and
/// average privacy, and the system's average distortion.
pub fn privacy_report(scenario: &Scenario) -> Result<PrivacyReport> {
    let outputs = scenario.channel.output_alphabet();
    let mut per_observation = Vec::new();
    let mut unobservable = Vec::new();
    for y in 0..outputs.len() {
        let post = match scenario.posterior(y) {
            Ok(p) => p,
            Err(Error::UnobservableEvidence { .. }) => {
                unobservable.push(outputs.symbol(y).to_owned());
                continue;
            }
            Err(e) => return Err(e),
        };
        let est = bayes_estimate(&post, &scenario.attacker_loss)?;
        per_observation.push(ObservationPrivacy {
            y: outputs.symbol(y).to_owned(),
            y_index: y,
            probability: scenario.observation_probability(y),
            conditional_privacy: est.risk,
            bayes_estimate: scenario
                .attacker_loss
                .estimate_alphabet()
                .symbol(est.index)
                .to_owned(),
            estimate_index: est.index,
        });
    }
    let worst_case = per_observation
        .iter()
        .map(|o| o.conditional_privacy)
        .fold(f64::INFINITY, f64::min);
    let average = per_observation
        .iter()
        .map(|o| o.probability * o.conditional_privacy)
        .sum();
    let average_distortion = scenario.system_loss.as_ref().map(|d| {
        let j = &scenario.joint;
        (0..j.n_rows())
            .flat_map(|x| (0..j.n_cols()).map(move |y| (x, y)))
            .map(|(x, y)| j.get(x, y) * d.get(x, y))
            .sum()
    });
    Ok(PrivacyReport {
        per_observation,
        unobservable,
        worst_case,
        average,
        average_distortion,
    })
}

/// Privacy reduction from prior to posterior and its two upper bounds.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PrivacyReduction {
    pub delta_p: f64,
    /// 4·d_max·TV(posterior, prior)
    pub tv_bound: f64,
    /// 2√2·d_max·√D(posterior‖prior), divergence in nats
    pub pinsker_bound: f64,
}

/// ΔP = E_post d(X, x̂_prior) − E_post d(X, x̂_post).
pub fn delta_conditional_privacy(
    prior: &Pmf,
    posterior: &Pmf,
    loss: &LossMatrix,
) -> Result<PrivacyReduction> {
    prior.ensure_same_alphabet(posterior)?;
    let from_prior = bayes_estimate(prior, loss)?;
    let from_post = bayes_estimate(posterior, loss)?;
    let delta_p = expected_loss(posterior, loss, from_prior.index) - from_post.risk;
    let tv = total_variation(posterior, prior)?;
    let kl = kl_divergence_nats(posterior, prior)?;
    Ok(PrivacyReduction {
        delta_p,
        tv_bound: 4.0 * loss.d_max() * tv,
        pinsker_bound: 2.0 * std::f64::consts::SQRT_2 * loss.d_max() * kl.sqrt(),
    })
}

/// Posterior of every realizable observation, paired with P(Y=y).
pub fn posteriors(joint: &JointPmf) -> Vec<(usize, f64, Pmf)> {
    let (_, py) = marginals(joint);
    (0..joint.n_cols())
        .filter_map(|y| posterior(joint, y).ok().map(|p| (y, py.get(y), p)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prob::make_uniform;
    use approx::assert_abs_diff_eq;

    fn pmf(v: &[f64]) -> Pmf {
        Pmf::from_probs(v.to_vec()).unwrap()
    }

    fn hamming(n: usize) -> LossMatrix {
        LossMatrix::hamming_on(&Alphabet::indexed(n))
    }

    #[test]
    fn loss_matrix_flags() {
        let h = hamming(3);
        assert!(h.is_hamming());
        assert_eq!(h.d_max(), 1.0);
        let m = LossMatrix::new(
            Alphabet::indexed(2),
            Alphabet::indexed(2),
            vec![vec![0.0, 1.0], vec![1.0, 0.0]],
        )
        .unwrap();
        assert!(m.is_hamming());
        let m = LossMatrix::new(
            Alphabet::indexed(2),
            Alphabet::indexed(2),
            vec![vec![0.0, 2.0], vec![1.0, 0.0]],
        )
        .unwrap();
        assert!(!m.is_hamming());
        assert_eq!(m.d_max(), 2.0);
        assert!(
            LossMatrix::new(Alphabet::indexed(1), Alphabet::indexed(1), vec![vec![-1.0]]).is_err()
        );
        assert!(LossMatrix::new(
            Alphabet::indexed(1),
            Alphabet::indexed(1),
            vec![vec![f64::INFINITY]]
        )
        .is_err());
        assert!(LossMatrix::squared(Alphabet::indexed(2), Alphabet::indexed(2)).is_err());
    }

    #[test]
    fn bayes_estimate_examples() {
        let e = bayes_estimate(&pmf(&[0.7, 0.3]), &hamming(2)).unwrap();
        assert_eq!(e.index, 0);
        assert_abs_diff_eq!(e.risk, 0.3, epsilon = 1e-15);

        let e = bayes_estimate(&pmf(&[0.5, 0.5]), &hamming(2)).unwrap();
        assert_eq!((e.index, e.risk), (0, 0.5));

        let line = Alphabet::indexed(2)
            .with_embedding(vec![vec![0.0], vec![1.0]])
            .unwrap();
        let sq = LossMatrix::squared(line.clone(), line.clone()).unwrap();
        let post = Pmf::new(line, vec![0.25, 0.75]).unwrap();
        let e = bayes_estimate(&post, &sq).unwrap();
        assert_eq!(e.index, 1);
        assert_abs_diff_eq!(e.risk, 0.25, epsilon = 1e-15);

        assert!(bayes_estimate(&pmf(&[0.2, 0.3, 0.5]), &hamming(2)).is_err());
    }

    #[test]
    fn map_estimate_examples() {
        let e = map_estimate(&pmf(&[0.625, 0.125, 0.125, 0.125]));
        assert_eq!(e.index, 0);
        assert_eq!(e.risk, 0.375);
        for k in 2..10 {
            let e = map_estimate(&make_uniform(Alphabet::indexed(k)).unwrap());
            assert_eq!(e.risk, 1.0 - 1.0 / k as f64);
            assert_eq!(e.index, 0);
        }
        assert_eq!(map_estimate(&pmf(&[1.0, 0.0, 0.0])).risk, 0.0);
    }

    #[test]
    fn conditional_privacy_examples() {
        let prior = pmf(&[0.5, 0.5]);
        let s = Scenario::hamming(prior.clone(), Channel::binary_symmetric(0.3).unwrap()).unwrap();
        assert_abs_diff_eq!(conditional_privacy(&s, 0).unwrap(), 0.3, epsilon = 1e-15);

        let s = Scenario::hamming(prior, Channel::identity(Alphabet::indexed(2))).unwrap();
        assert_eq!(conditional_privacy(&s, 0).unwrap(), 0.0);
        assert_eq!(conditional_privacy(&s, 1).unwrap(), 0.0);

        for l in 2..8 {
            let u = make_uniform(Alphabet::indexed(l)).unwrap();
            let ch = Channel::constant(u.alphabet().clone(), &pmf(&[1.0]));
            let s = Scenario::hamming(u, ch).unwrap();
            assert_eq!(conditional_privacy(&s, 0).unwrap(), 1.0 - 1.0 / l as f64);
        }
    }

    #[test]
    fn unobservable_observation_is_reported() {
        let prior = pmf(&[0.5, 0.5]);
        let ch = Channel::from_rows(vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]]).unwrap();
        let s = Scenario::new(prior.clone(), ch, hamming(2), None).unwrap();
        assert!(matches!(
            conditional_privacy(&s, 2),
            Err(Error::UnobservableEvidence { index: 2 })
        ));
        let r = privacy_report(&s).unwrap();
        assert_eq!(r.unobservable, vec!["2".to_string()]);
        assert_eq!(r.per_observation.len(), 2);
    }

    #[test]
    fn min_entropy_identity_examples() {
        let joint_scenario = |rows: Vec<Vec<f64>>, prior: &[f64]| {
            Scenario::hamming(pmf(prior), Channel::from_rows(rows).unwrap()).unwrap()
        };
        let s = joint_scenario(vec![vec![0.7, 0.3], vec![0.3, 0.7]], &[0.5, 0.5]);
        let (a, b) = min_entropy_identity(&s, 0).unwrap();
        assert_abs_diff_eq!(a, 0.3, epsilon = 1e-12);
        assert_abs_diff_eq!(b, 0.3, epsilon = 1e-12);

        let s = joint_scenario(vec![vec![1.0], vec![1.0], vec![1.0]], &[1.0 / 3.0; 3]);
        let (a, b) = min_entropy_identity(&s, 0).unwrap();
        assert_abs_diff_eq!(a, 2.0 / 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(b, 2.0 / 3.0, epsilon = 1e-12);

        let s = joint_scenario(vec![vec![1.0, 0.0], vec![0.0, 1.0]], &[0.5, 0.5]);
        assert_eq!(min_entropy_identity(&s, 1).unwrap(), (0.0, 0.0));

        // on two unit-spaced points squared error is the 0-1 loss, so use three
        let line = Alphabet::indexed(3)
            .with_embedding(vec![vec![0.0], vec![1.0], vec![2.0]])
            .unwrap();
        let sq = LossMatrix::squared(line.clone(), line.clone()).unwrap();
        assert!(!sq.is_hamming());
        let s = Scenario::new(
            Pmf::new(line.clone(), vec![0.2, 0.3, 0.5]).unwrap(),
            Channel::identity(line),
            sq,
            None,
        )
        .unwrap();
        assert!(min_entropy_identity(&s, 0).is_err());
    }

    #[test]
    fn privacy_report_examples() {
        let s =
            Scenario::hamming(pmf(&[0.5, 0.5]), Channel::binary_symmetric(0.3).unwrap()).unwrap();
        let r = privacy_report(&s).unwrap();
        assert_abs_diff_eq!(r.average, 0.3, epsilon = 1e-12);
        assert_abs_diff_eq!(r.worst_case, 0.3, epsilon = 1e-12);
        assert_abs_diff_eq!(r.average_distortion.unwrap(), 0.3, epsilon = 1e-12);

        let s =
            Scenario::hamming(pmf(&[0.2, 0.8]), Channel::identity(Alphabet::indexed(2))).unwrap();
        let r = privacy_report(&s).unwrap();
        assert_eq!((r.average, r.worst_case), (0.0, 0.0));

        let n = 5;
        let u = make_uniform(Alphabet::indexed(n)).unwrap();
        let out = pmf(&[0.1, 0.6, 0.3]);
        let s = Scenario::new(
            u.clone(),
            Channel::constant(u.alphabet().clone(), &out),
            hamming(n),
            None,
        )
        .unwrap();
        let r = privacy_report(&s).unwrap();
        assert_abs_diff_eq!(r.average, 0.8, epsilon = 1e-12);
        assert_abs_diff_eq!(r.worst_case, 0.8, epsilon = 1e-12);
        assert_eq!(r.average_distortion, None);
    }

    #[test]
    fn delta_privacy_examples() {
        let h = hamming(2);
        let p = pmf(&[0.3, 0.7]);
        let r = delta_conditional_privacy(&p, &p, &h).unwrap();
        assert_eq!((r.delta_p, r.tv_bound, r.pinsker_bound), (0.0, 0.0, 0.0));

        let r = delta_conditional_privacy(&pmf(&[0.5, 0.5]), &pmf(&[0.75, 0.25]), &h).unwrap();
        assert_eq!(r.delta_p, 0.0);
        assert_eq!(r.tv_bound, 1.0);
        let kl_nats = 0.75 * 1.5f64.ln() + 0.25 * 0.5f64.ln();
        assert_abs_diff_eq!(
            r.pinsker_bound,
            2.0 * 2f64.sqrt() * kl_nats.sqrt(),
            epsilon = 1e-14
        );
        assert_abs_diff_eq!(r.pinsker_bound, 1.0230, epsilon = 1e-4);

        let r = delta_conditional_privacy(&pmf(&[0.3, 0.7]), &pmf(&[0.75, 0.25]), &h).unwrap();
        assert_abs_diff_eq!(r.delta_p, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(r.tv_bound, 1.8, epsilon = 1e-14);
        assert!(r.tv_bound <= r.pinsker_bound);
    }
}
