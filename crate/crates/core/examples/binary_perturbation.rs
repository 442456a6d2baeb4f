//! A bit is flipped with probability p before release. The attacker's best
//! guess is the released bit, so average privacy and system distortion both
//! equal p; a utility floor u0 caps privacy at 1 - u0.

use privest::bayes::{privacy_report, Scenario};
use privest::optimize::binary_example;
use privest::prob::{Alphabet, Channel, Pmf};

fn main() -> privest::Result<()> {
    println!("{:>6} {:>12} {:>12}", "p", "P_avg", "D");
    for p in [0.0, 0.1, 0.3, 0.49] {
        let ex = binary_example(p, 1.0)?;
        println!("{p:>6} {:>12.6} {:>12.6}", ex.avg_privacy, ex.distortion);
    }

    println!("\n{:>6} {:>16}", "u0", "max privacy");
    for u0 in [0.6, 0.75, 0.9, 1.0] {
        println!(
            "{u0:>6} {:>16.6}",
            binary_example(0.0, u0)?.max_privacy_at_u0
        );
    }

    // the same numbers through the generic pipeline, with a skewed prior
    let prior = Pmf::new(Alphabet::indexed(2), vec![0.8, 0.2])?;
    let report = privacy_report(&Scenario::hamming(prior, Channel::binary_symmetric(0.3)?)?)?;
    println!("\nprior (0.8, 0.2), flip 0.3:");
    for o in &report.per_observation {
        println!(
            "  y={} p(y)={:.3} guess={} privacy={:.4}",
            o.y, o.probability, o.bayes_estimate, o.conditional_privacy
        );
    }
    println!(
        "  worst {:.4}, average {:.4}",
        report.worst_case, report.average
    );
    Ok(())
}
