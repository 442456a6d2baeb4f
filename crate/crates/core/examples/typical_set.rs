//! Weakly typical sets of a biased coin, found by enumerating every sequence.
//! The set is exponentially smaller than the sequence space while its
//! probability grows (non-monotonically at short lengths) towards one.

use privest::prob::{Alphabet, JointPmf, Pmf};
use privest::typical::{jointly_typical_fraction, typical_set};

fn main() -> privest::Result<()> {
    let coin = Pmf::new(Alphabet::indexed(2), vec![0.8, 0.2])?;
    println!(
        "{:>3} {:>10} {:>12} {:>10} {:>14}",
        "k", "members", "2^k", "P(set)", "2^{k(H+e)}"
    );
    for k in [5, 10, 15, 20, 25] {
        let t = typical_set(&coin, k, 0.2)?;
        println!(
            "{k:>3} {:>10} {:>12} {:>10.4} {:>14.0}",
            t.member_count,
            1u64 << k,
            t.total_probability,
            t.cardinality_bound
        );
    }

    let joint = JointPmf::from_matrix(vec![vec![0.35, 0.15], vec![0.15, 0.35]])?;
    for k in [4, 8, 12] {
        println!(
            "jointly typical mass, k={k}: {:.4}",
            jointly_typical_fraction(&joint, k, 0.3)?
        );
    }
    Ok(())
}
