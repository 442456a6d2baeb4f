//! Exhaustive enumeration of weakly typical sets for short i.i.d. sequences.
//!
//! A length-`k` sequence is typical when its empirical per-symbol
//! log-probability `-(1/k) log p(x^k)` lies within `epsilon` of the Shannon
//! entropy. Sequences are enumerated one by one, so the alphabet size raised
//! to `k` must stay under a cap.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::info::{shannon_bits, shannon_entropy};
use crate::prob::{marginals, JointPmf, Pmf};

/// Default limit on the number of enumerated sequences (2^26).
pub const DEFAULT_ENUMERATION_CAP: u64 = 1 << 26;

/// Rates within this distance of the `epsilon` boundary count as on it, so
/// exact ties do not depend on summation order.
pub const BOUNDARY_SLACK: f64 = 1e-12;

/// Suffix tables hold at most this many precomputed partial sums.
const SUFFIX_TABLE_LIMIT: usize = 1 << 12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TypicalSet {
    pub k: usize,
    pub epsilon: f64,
    /// Shannon entropy of the source, bits per symbol.
    pub entropy: f64,
    pub member_count: u64,
    pub total_probability: f64,
    /// 2^{k(H+ε)}.
    pub cardinality_bound: f64,
    /// Smallest and largest `-(1/k) log p(x^k)` among members.
    pub min_rate: Option<f64>,
    pub max_rate: Option<f64>,
}

#[derive(Clone, Copy, Debug)]
struct Tally {
    count: u64,
    prob: f64,
    min_rate: f64,
    max_rate: f64,
}

impl Tally {
    const EMPTY: Tally = Tally {
        count: 0,
        prob: 0.0,
        min_rate: f64::INFINITY,
        max_rate: f64::NEG_INFINITY,
    };

    fn merge(mut self, other: &Tally) -> Tally {
        self.count += other.count;
        self.prob += other.prob;
        self.min_rate = self.min_rate.min(other.min_rate);
        self.max_rate = self.max_rate.max(other.max_rate);
        self
    }
}

fn check_cap(alphabet: usize, k: usize, cap: u64) -> Result<()> {
    let required = (alphabet as f64).powi(k as i32);
    if required > cap as f64 {
        return Err(Error::ResourceLimit { required, cap });
    }
    Ok(())
}

/// Enumerates all `alphabet^k` sequences. Each symbol carries `M` log2
/// probabilities (one per typicality condition); component `M-1` is the
/// sequence's own probability. A sequence is a member when every component's
/// rate is within `epsilon` of its target.
fn enumerate<const M: usize>(
    logs: &[[f64; M]],
    targets: [f64; M],
    k: usize,
    epsilon: f64,
) -> Tally {
    let a = logs.len();
    let mut suffix_len = 0;
    while suffix_len < k && a.pow(suffix_len as u32 + 1) <= SUFFIX_TABLE_LIMIT {
        suffix_len += 1;
    }
    let prefix_len = k - suffix_len;

    let sums_of = |len: usize, mut index: usize| -> [f64; M] {
        let mut s = [0.0; M];
        for _ in 0..len {
            let sym = &logs[index % a];
            index /= a;
            for c in 0..M {
                s[c] += sym[c];
            }
        }
        s
    };
    let suffixes: Vec<[f64; M]> = (0..a.pow(suffix_len as u32))
        .map(|i| sums_of(suffix_len, i))
        .collect();
    let kf = k as f64;

    let per_prefix: Vec<Tally> = (0..a.pow(prefix_len as u32))
        .into_par_iter()
        .map(|pi| {
            let pre = sums_of(prefix_len, pi);
            let mut t = Tally::EMPTY;
            for suf in &suffixes {
                let mut member = true;
                for c in 0..M {
                    let rate = -(pre[c] + suf[c]) / kf;
                    if !((rate - targets[c]).abs() <= epsilon + BOUNDARY_SLACK) {
                        member = false;
                        break;
                    }
                }
                if member {
                    let log_p = pre[M - 1] + suf[M - 1];
                    let rate = -log_p / kf;
                    t.count += 1;
                    t.prob += log_p.exp2();
                    t.min_rate = t.min_rate.min(rate);
                    t.max_rate = t.max_rate.max(rate);
                }
            }
            t
        })
        .collect();
    // fixed-order reduction keeps the result independent of thread count
    per_prefix.iter().fold(Tally::EMPTY, |acc, t| acc.merge(t))
}

fn check_params(k: usize, epsilon: f64) -> Result<()> {
    if k == 0 {
        return invalid("sequence length must be >= 1");
    }
    if !(epsilon > 0.0) || !epsilon.is_finite() {
        return invalid(format!("epsilon must be positive, got {epsilon}"));
    }
    Ok(())
}

/// Typical set of `p` at length `k` with the default enumeration cap.
pub fn typical_set(p: &Pmf, k: usize, epsilon: f64) -> Result<TypicalSet> {
    typical_set_with_cap(p, k, epsilon, DEFAULT_ENUMERATION_CAP)
}

pub fn typical_set_with_cap(p: &Pmf, k: usize, epsilon: f64, cap: u64) -> Result<TypicalSet> {
    check_params(k, epsilon)?;
    check_cap(p.len(), k, cap)?;
    let h = shannon_entropy(p);
    let logs: Vec<[f64; 1]> = p.probs().iter().map(|&x| [x.log2()]).collect();
    let t = enumerate(&logs, [h], k, epsilon);
    let member = t.count > 0;
    Ok(TypicalSet {
        k,
        epsilon,
        entropy: h,
        member_count: t.count,
        total_probability: t.prob.min(1.0),
        cardinality_bound: (k as f64 * (h + epsilon)).exp2(),
        min_rate: member.then_some(t.min_rate),
        max_rate: member.then_some(t.max_rate),
    })
}

/// Probability that a length-`k` pair sequence drawn from `joint` is jointly
/// typical: X-sequence, Y-sequence and the pair are each typical.
pub fn jointly_typical_fraction(joint: &JointPmf, k: usize, epsilon: f64) -> Result<f64> {
    jointly_typical_fraction_with_cap(joint, k, epsilon, DEFAULT_ENUMERATION_CAP)
}

pub fn jointly_typical_fraction_with_cap(
    joint: &JointPmf,
    k: usize,
    epsilon: f64,
    cap: u64,
) -> Result<f64> {
    check_params(k, epsilon)?;
    check_cap(joint.n_rows() * joint.n_cols(), k, cap)?;
    let (px, py) = marginals(joint);
    let targets = [
        shannon_entropy(&px),
        shannon_entropy(&py),
        shannon_bits(joint.entries()),
    ];
    let mut logs = Vec::with_capacity(joint.entries().len());
    for x in 0..joint.n_rows() {
        for y in 0..joint.n_cols() {
            logs.push([px.get(x).log2(), py.get(y).log2(), joint.get(x, y).log2()]);
        }
    }
    Ok(enumerate(&logs, targets, k, epsilon).prob.min(1.0))
}
