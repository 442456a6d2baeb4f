//! Entropies, divergences and mutual information. All results are in bits
//! unless the name says otherwise.

use std::fmt;

use crate::error::{invalid, Result};
use crate::prob::{marginals, posterior, JointPmf, Pmf};

/// Order of a Rényi entropy. `Infinity` is kept distinct from any finite value
/// so that min-entropy is evaluated exactly as `-log max p`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Order {
    Finite(f64),
    Infinity,
}

impl Order {
    pub const HARTLEY: Order = Order::Finite(0.0);
    pub const SHANNON: Order = Order::Finite(1.0);
    pub const MIN: Order = Order::Infinity;

    /// Accepts a number or `inf`/`infinity`.
    pub fn parse(s: &str) -> Result<Order> {
        match s.trim().to_ascii_lowercase().as_str() {
            "inf" | "infinity" | "+inf" => Ok(Order::Infinity),
            other => match other.parse::<f64>() {
                Ok(a) if a.is_infinite() && a > 0.0 => Ok(Order::Infinity),
                Ok(a) if a >= 0.0 => Ok(Order::Finite(a)),
                _ => invalid(format!("bad Rényi order {s:?}")),
            },
        }
    }
}

impl fmt::Display for Order {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Order::Finite(a) => write!(f, "{a}"),
            Order::Infinity => f.write_str("inf"),
        }
    }
}

/// Shannon entropy of a probability vector, `0 log 0 = 0`.
pub(crate) fn shannon_bits(probs: &[f64]) -> f64 {
    // `0.0 - x` rather than `-x` keeps a zero entropy at +0.0
    0.0 - probs
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| p * p.log2())
        .sum::<f64>()
}

/// Binary entropy function h(p) in bits.
pub fn binary_entropy(p: f64) -> f64 {
    shannon_bits(&[p, 1.0 - p])
}

/// Rényi entropy of order `alpha`, in bits.
pub fn renyi_entropy(p: &Pmf, alpha: Order) -> Result<f64> {
    match alpha {
        Order::Infinity => Ok(min_entropy(p)),
        Order::Finite(a) if a.is_nan() || a < 0.0 => {
            invalid(format!("Rényi order must be >= 0, got {a}"))
        }
        Order::Finite(a) if a.is_infinite() => Ok(min_entropy(p)),
        Order::Finite(0.0) => Ok(hartley_entropy(p)),
        Order::Finite(1.0) => Ok(shannon_bits(p.probs())),
        Order::Finite(a) => {
            let s: f64 = p
                .probs()
                .iter()
                .filter(|&&x| x > 0.0)
                .map(|&x| x.powf(a))
                .sum();
            Ok(s.log2() / (1.0 - a) + 0.0)
        }
    }
}

pub fn shannon_entropy(p: &Pmf) -> f64 {
    shannon_bits(p.probs())
}

pub fn min_entropy(p: &Pmf) -> f64 {
    0.0 - p.max().1.log2()
}

pub fn hartley_entropy(p: &Pmf) -> f64 {
    (p.support_size() as f64).log2()
}

/// The three landmark entropies of a distribution.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EntropyTriple {
    pub h_inf: f64,
    pub h_1: f64,
    pub h_0: f64,
}

impl EntropyTriple {
    /// All three orders agree (within `tol`), i.e. the pmf is uniform on its support.
    pub fn all_equal(&self, tol: f64) -> bool {
        (self.h_0 - self.h_inf).abs() <= tol
    }
}

/// Returns `(H_inf, H_1, H_0)`; these always satisfy `H_inf <= H_1 <= H_0`.
pub fn entropy_ordering_check(p: &Pmf) -> EntropyTriple {
    let t = EntropyTriple {
        h_inf: min_entropy(p),
        h_1: shannon_entropy(p),
        h_0: hartley_entropy(p),
    };
    debug_assert!(t.h_inf <= t.h_1 + 1e-12 && t.h_1 <= t.h_0 + 1e-12, "{t:?}");
    t
}

fn kl_with<F: Fn(f64) -> f64>(p: &[f64], q: &[f64], log: F) -> f64 {
    let mut d = 0.0;
    for (&a, &b) in p.iter().zip(q) {
        if a > 0.0 {
            if b <= 0.0 {
                return f64::INFINITY;
            }
            d += a * log(a / b);
        }
    }
    // rounding can push a zero divergence just below zero
    d.max(0.0)
}

pub(crate) fn kl_bits_raw(p: &[f64], q: &[f64]) -> f64 {
    kl_with(p, q, f64::log2)
}

/// D(p‖q) in bits; `+inf` when p puts mass where q has none.
pub fn kl_divergence(p: &Pmf, q: &Pmf) -> Result<f64> {
    p.ensure_same_alphabet(q)?;
    Ok(kl_with(p.probs(), q.probs(), f64::log2))
}

/// D(p‖q) in nats.
pub fn kl_divergence_nats(p: &Pmf, q: &Pmf) -> Result<f64> {
    p.ensure_same_alphabet(q)?;
    Ok(kl_with(p.probs(), q.probs(), f64::ln))
}

pub fn total_variation(p: &Pmf, q: &Pmf) -> Result<f64> {
    p.ensure_same_alphabet(q)?;
    Ok(0.5
        * p.probs()
            .iter()
            .zip(q.probs())
            .map(|(a, b)| (a - b).abs())
            .sum::<f64>())
}

/// Total variation and its Pinsker upper bound.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PinskerPair {
    pub tv: f64,
    pub bound: f64,
}

/// `TV(p,q)` next to `(√2/2)·√D(p‖q)`, with D measured in nats so the
/// classical constant applies.
pub fn pinsker_bound(p: &Pmf, q: &Pmf) -> Result<PinskerPair> {
    let tv = total_variation(p, q)?;
    let d = kl_divergence_nats(p, q)?;
    Ok(PinskerPair {
        tv,
        bound: std::f64::consts::FRAC_1_SQRT_2 * d.sqrt(),
    })
}

/// I(X;Y) in bits.
pub fn mutual_information(joint: &JointPmf) -> f64 {
    let (px, py) = marginals(joint);
    let mut total = 0.0;
    for x in 0..joint.n_rows() {
        for y in 0..joint.n_cols() {
            let pxy = joint.get(x, y);
            if pxy > 0.0 {
                total += pxy * (pxy / px.get(x) / py.get(y)).log2();
            }
        }
    }
    total.max(0.0)
}

/// H(X|Y) = Σ_y p(y) H(X|Y=y), skipping unrealizable y.
pub fn conditional_entropy(joint: &JointPmf) -> f64 {
    (0..joint.n_cols())
        .filter_map(|y| {
            let py = joint.col_mass(y);
            posterior(joint, y)
                .ok()
                .map(|post| py * shannon_entropy(&post))
        })
        .sum()
}
