//! Random instance generators shared by the integration tests.
#![allow(dead_code)]

use privest::bayes::LossMatrix;
use privest::prob::{Alphabet, Channel, Pmf};
use privest::sdc::{MicrodataTable, Role};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random probability vector; each entry is zero with probability `zero`,
/// but at least one entry is positive.
pub fn random_probs(rng: &mut ChaCha8Rng, n: usize, zero: f64) -> Vec<f64> {
    loop {
        let w: Vec<f64> = (0..n)
            .map(|_| {
                if rng.random_bool(zero) {
                    0.0
                } else {
                    rng.random_range(0.0..1.0)
                }
            })
            .collect();
        let s: f64 = w.iter().sum();
        if s > 0.0 {
            return w.into_iter().map(|x| x / s).collect();
        }
    }
}

pub fn random_pmf(rng: &mut ChaCha8Rng, n: usize, zero: f64) -> Pmf {
    Pmf::new(Alphabet::indexed(n), random_probs(rng, n, zero)).unwrap()
}

pub fn random_channel(rng: &mut ChaCha8Rng, n_in: usize, n_out: usize) -> Channel {
    let rows = (0..n_in).map(|_| random_probs(rng, n_out, 0.2)).collect();
    Channel::new(Alphabet::indexed(n_in), Alphabet::indexed(n_out), rows).unwrap()
}

/// Non-negative costs, zero on the diagonal when square.
pub fn random_loss(rng: &mut ChaCha8Rng, n: usize, m: usize) -> LossMatrix {
    let costs = (0..n)
        .map(|x| {
            (0..m)
                .map(|y| {
                    if x == y {
                        0.0
                    } else {
                        rng.random_range(0.05..2.0)
                    }
                })
                .collect()
        })
        .collect();
    LossMatrix::new(Alphabet::indexed(n), Alphabet::indexed(m), costs).unwrap()
}

/// Table with two key columns and one confidential column "c".
pub fn random_table(rng: &mut ChaCha8Rng) -> MicrodataTable {
    let rows = rng.random_range(2..40);
    let (k1, k2, values) = (
        rng.random_range(1..5),
        rng.random_range(1..3),
        rng.random_range(1..5),
    );
    let data = (0..rows)
        .map(|_| {
            vec![
                format!("a{}", rng.random_range(0..k1)),
                format!("b{}", rng.random_range(0..k2)),
                format!("v{}", rng.random_range(0..values)),
            ]
        })
        .collect();
    MicrodataTable::new(
        vec!["k1".into(), "k2".into(), "c".into()],
        vec![Role::Key, Role::Key, Role::Confidential],
        data,
    )
    .unwrap()
}
