//! Rényi entropies as privacy measures: H_inf is the attacker's one-guess
//! success, H_1 the Shannon average, H_0 the support size.

use privest::info::{entropy_ordering_check, renyi_entropy, Order};
use privest::prob::{Alphabet, Pmf};

fn main() -> privest::Result<()> {
    let cases = [
        ("uniform on 4", vec![0.25, 0.25, 0.25, 0.25]),
        ("uniform on 2 of 4", vec![0.5, 0.5, 0.0, 0.0]),
        ("skewed", vec![0.7, 0.1, 0.1, 0.1]),
        ("point mass", vec![1.0, 0.0, 0.0, 0.0]),
    ];
    println!(
        "{:<18} {:>8} {:>8} {:>8} {:>8}",
        "pmf", "H_inf", "H_2", "H_1", "H_0"
    );
    for (name, probs) in cases {
        let p = Pmf::new(Alphabet::indexed(4), probs)?;
        let t = entropy_ordering_check(&p);
        let h2 = renyi_entropy(&p, Order::Finite(2.0))?;
        println!(
            "{name:<18} {:>8.4} {:>8.4} {:>8.4} {:>8.4}",
            t.h_inf, h2, t.h_1, t.h_0
        );
    }
    Ok(())
}
