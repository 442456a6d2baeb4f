//! How much an observation can reduce privacy is bounded by how far it moves
//! the posterior: ΔP <= 4 d_max TV <= 2√2 d_max √KL.

use privest::bayes::{delta_conditional_privacy, LossMatrix};
use privest::info::{kl_divergence_nats, pinsker_bound};
use privest::prob::{Alphabet, Pmf};

fn main() -> privest::Result<()> {
    let a = Alphabet::indexed(3);
    let loss = LossMatrix::hamming_on(&a);
    let prior = Pmf::new(a.clone(), vec![0.5, 0.3, 0.2])?;
    for post in [
        vec![0.5, 0.3, 0.2],
        vec![0.4, 0.4, 0.2],
        vec![0.1, 0.8, 0.1],
        vec![0.0, 0.0, 1.0],
    ] {
        let post = Pmf::new(a.clone(), post)?;
        let r = delta_conditional_privacy(&prior, &post, &loss)?;
        let pin = pinsker_bound(&post, &prior)?;
        println!(
            "posterior {:?}: ΔP {:.4} <= {:.4} <= {:.4}   (TV {:.4}, KL {:.4} nats, Pinsker {:.4})",
            post.probs(),
            r.delta_p,
            r.tv_bound,
            r.pinsker_bound,
            pin.tv,
            kl_divergence_nats(&post, &prior)?,
            pin.bound
        );
    }
    Ok(())
}
