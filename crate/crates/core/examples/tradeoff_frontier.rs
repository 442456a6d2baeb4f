//! Least information a perturbation must leak for a given distortion budget,
//! computed with Blahut–Arimoto. For a fair bit under Hamming loss the curve
//! is 1 - H_b(D).

use privest::bayes::LossMatrix;
use privest::info::binary_entropy;
use privest::optimize::{
    blahut_arimoto_traced, frontier, frontier_point, grid_search_oracle, CurveEntry,
};
use privest::prob::{Alphabet, Pmf};

fn main() -> privest::Result<()> {
    let bits = Alphabet::indexed(2);
    let prior = Pmf::uniform(bits.clone())?;
    let loss = LossMatrix::hamming_on(&bits);
    let budgets: Vec<f64> = (1..=9).map(|i| i as f64 * 0.05).collect();

    println!(
        "{:>6} {:>10} {:>10} {:>10}",
        "D", "I (bits)", "1-H_b(D)", "slope"
    );
    for e in &frontier(&prior, &loss, &budgets)?.entries {
        match e {
            CurveEntry::Point(p) => println!(
                "{:>6.2} {:>10.6} {:>10.6} {:>10.4}",
                p.distortion_budget,
                p.mutual_info,
                1.0 - binary_entropy(p.distortion_budget),
                p.slope
            ),
            CurveEntry::Failed(f) => println!("{:>6.2} failed: {}", f.budget, f.message),
        }
    }

    // a skewed ternary source, checked against exhaustive search
    let three = Alphabet::indexed(3);
    let prior = Pmf::new(three.clone(), vec![0.5, 0.3, 0.2])?;
    let loss = LossMatrix::hamming_on(&three);
    let (_, trace) = blahut_arimoto_traced(&prior, &loss, 3.0)?;
    println!(
        "\nternary, slope 3: {} iterations, Lagrangian {:.8} -> {:.8}",
        trace.len(),
        trace[0],
        trace[trace.len() - 1]
    );
    let ba = frontier_point(&prior, &loss, 0.2)?;
    let grid = grid_search_oracle(&prior, &loss, 0.2, 12)?;
    println!(
        "ternary, D=0.2: Blahut–Arimoto {:.5} bits, grid search (step 1/12) {:.5} bits",
        ba.mutual_info, grid.mutual_info
    );
    Ok(())
}
