//! Finite-alphabet probability objects.
//!
//! Every distribution in the crate lives on an [`Alphabet`]: an ordered list
//! of distinct labels whose position is the index used by all vectors and
//! matrices. Inputs are accepted when they sum to one within
//! [`NORMALIZATION_TOLERANCE`] and are then renormalized exactly.

use std::fmt;
use std::sync::Arc;

use crate::error::{invalid, Error, Result};

/// Largest accepted deviation of a distribution's total mass from one.
pub const NORMALIZATION_TOLERANCE: f64 = 1e-9;

/// Ordered set of distinct symbol labels, optionally embedded in R^d.
#[derive(Clone, PartialEq)]
pub struct Alphabet {
    symbols: Arc<[String]>,
    embedding: Option<Arc<[Vec<f64>]>>,
}

impl Alphabet {
    pub fn new<I, S>(symbols: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let symbols: Vec<String> = symbols.into_iter().map(Into::into).collect();
        let mut seen = std::collections::HashSet::with_capacity(symbols.len());
        for s in &symbols {
            if !seen.insert(s.as_str()) {
                return invalid(format!("duplicate symbol {s:?} in alphabet"));
            }
        }
        Ok(Self {
            symbols: symbols.into(),
            embedding: None,
        })
    }

    /// Alphabet `{"0", "1", ..., "n-1"}`.
    pub fn indexed(n: usize) -> Self {
        Self {
            symbols: (0..n).map(|i| i.to_string()).collect::<Vec<_>>().into(),
            embedding: None,
        }
    }

    /// Attaches one coordinate vector per symbol.
    pub fn with_embedding(mut self, embedding: Vec<Vec<f64>>) -> Result<Self> {
        if embedding.len() != self.len() {
            return invalid(format!(
                "embedding has {} points for {} symbols",
                embedding.len(),
                self.len()
            ));
        }
        if let Some(first) = embedding.first() {
            let dim = first.len();
            if dim == 0 {
                return invalid("embedding points must have at least one coordinate");
            }
            if embedding.iter().any(|e| e.len() != dim) {
                return invalid("embedding points must share one dimension");
            }
            if embedding.iter().flatten().any(|c| !c.is_finite()) {
                return invalid("embedding coordinates must be finite");
            }
        }
        self.embedding = Some(embedding.into());
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn symbols(&self) -> &[String] {
        &self.symbols
    }

    pub fn symbol(&self, index: usize) -> &str {
        &self.symbols[index]
    }

    pub fn index_of(&self, symbol: &str) -> Option<usize> {
        self.symbols.iter().position(|s| s == symbol)
    }

    pub fn embedding(&self) -> Option<&[Vec<f64>]> {
        self.embedding.as_deref()
    }

    /// Two alphabets are compatible when their labels agree position by position.
    pub fn same_symbols(&self, other: &Alphabet) -> bool {
        Arc::ptr_eq(&self.symbols, &other.symbols) || self.symbols == other.symbols
    }

    pub(crate) fn ensure_same(&self, other: &Alphabet, what: &str) -> Result<()> {
        if self.same_symbols(other) {
            Ok(())
        } else {
            invalid(format!("alphabet mismatch: {what}"))
        }
    }
}

impl fmt::Debug for Alphabet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.symbols.iter()).finish()
    }
}

fn check_mass(probs: &[f64]) -> Result<f64> {
    for (i, &p) in probs.iter().enumerate() {
        if !p.is_finite() || p < 0.0 {
            return invalid(format!(
                "entry {i} is {p}, probabilities must be finite and >= 0"
            ));
        }
    }
    let total: f64 = probs.iter().sum();
    if (total - 1.0).abs() > NORMALIZATION_TOLERANCE {
        return invalid(format!("probabilities sum to {total}, expected 1"));
    }
    Ok(total)
}

/// Divides by `total` unless it is within summation round-off of 1, which
/// keeps exact inputs such as `k` copies of `1/k` untouched.
fn renormalize(probs: &mut [f64], total: f64) {
    if (total - 1.0).abs() > probs.len() as f64 * f64::EPSILON {
        probs.iter_mut().for_each(|p| *p /= total);
    }
}

/// Probability mass function over an alphabet.
#[derive(Clone, Debug, PartialEq)]
pub struct Pmf {
    alphabet: Alphabet,
    probs: Vec<f64>,
}

impl Pmf {
    pub fn new(alphabet: Alphabet, mut probs: Vec<f64>) -> Result<Self> {
        if alphabet.is_empty() {
            return invalid("empty alphabet");
        }
        if probs.len() != alphabet.len() {
            return invalid(format!(
                "{} probabilities for {} symbols",
                probs.len(),
                alphabet.len()
            ));
        }
        let total = check_mass(&probs)?;
        renormalize(&mut probs, total);
        Ok(Self { alphabet, probs })
    }

    /// Pmf over the indexed alphabet `0..probs.len()`.
    pub fn from_probs(probs: Vec<f64>) -> Result<Self> {
        Self::new(Alphabet::indexed(probs.len()), probs)
    }

    /// Uniform distribution; every entry is exactly `1/n`.
    pub fn uniform(alphabet: Alphabet) -> Result<Self> {
        make_uniform(alphabet)
    }

    /// Pmf with all mass on one symbol.
    pub fn point(alphabet: Alphabet, index: usize) -> Result<Self> {
        if index >= alphabet.len() {
            return invalid(format!(
                "index {index} outside alphabet of size {}",
                alphabet.len()
            ));
        }
        let mut probs = vec![0.0; alphabet.len()];
        probs[index] = 1.0;
        Ok(Self { alphabet, probs })
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn get(&self, index: usize) -> f64 {
        self.probs[index]
    }

    pub fn support_size(&self) -> usize {
        self.probs.iter().filter(|&&p| p > 0.0).count()
    }

    /// Largest probability and its index (lowest index on ties).
    pub fn max(&self) -> (usize, f64) {
        let mut best = (0, self.probs[0]);
        for (i, &p) in self.probs.iter().enumerate().skip(1) {
            if p > best.1 {
                best = (i, p);
            }
        }
        best
    }

    pub(crate) fn ensure_same_alphabet(&self, other: &Pmf) -> Result<()> {
        self.alphabet
            .ensure_same(&other.alphabet, "distributions live on different alphabets")
    }
}

/// Joint distribution of (X, Y), stored row-major with X indexing rows.
#[derive(Clone, Debug, PartialEq)]
pub struct JointPmf {
    rows: Alphabet,
    cols: Alphabet,
    probs: Vec<f64>,
}

impl JointPmf {
    pub fn new(rows: Alphabet, cols: Alphabet, matrix: Vec<Vec<f64>>) -> Result<Self> {
        if rows.is_empty() || cols.is_empty() {
            return invalid("empty alphabet");
        }
        if matrix.len() != rows.len() || matrix.iter().any(|r| r.len() != cols.len()) {
            return invalid(format!(
                "joint matrix must be {}x{}",
                rows.len(),
                cols.len()
            ));
        }
        let mut probs: Vec<f64> = matrix.into_iter().flatten().collect();
        let total = check_mass(&probs)?;
        renormalize(&mut probs, total);
        Ok(Self { rows, cols, probs })
    }

    pub fn from_matrix(matrix: Vec<Vec<f64>>) -> Result<Self> {
        let r = matrix.len();
        let c = matrix.first().map_or(0, Vec::len);
        Self::new(Alphabet::indexed(r), Alphabet::indexed(c), matrix)
    }

    /// Product distribution p ⊗ q.
    pub fn independent(x: &Pmf, y: &Pmf) -> Self {
        let probs = x
            .probs
            .iter()
            .flat_map(|&a| y.probs.iter().map(move |&b| a * b))
            .collect();
        Self {
            rows: x.alphabet.clone(),
            cols: y.alphabet.clone(),
            probs,
        }
    }

    pub fn row_alphabet(&self) -> &Alphabet {
        &self.rows
    }

    pub fn col_alphabet(&self) -> &Alphabet {
        &self.cols
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_cols(&self) -> usize {
        self.cols.len()
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.probs[x * self.cols.len() + y]
    }

    pub fn row(&self, x: usize) -> &[f64] {
        let c = self.cols.len();
        &self.probs[x * c..(x + 1) * c]
    }

    pub fn entries(&self) -> &[f64] {
        &self.probs
    }

    pub fn to_matrix(&self) -> Vec<Vec<f64>> {
        (0..self.n_rows()).map(|x| self.row(x).to_vec()).collect()
    }

    /// P(Y = y).
    pub fn col_mass(&self, y: usize) -> f64 {
        (0..self.n_rows()).map(|x| self.get(x, y)).sum()
    }
}

/// Conditional distribution p(y|x): one row per input symbol.
#[derive(Clone, Debug, PartialEq)]
pub struct Channel {
    input: Alphabet,
    output: Alphabet,
    rows: Vec<Vec<f64>>,
}

impl Channel {
    pub fn new(input: Alphabet, output: Alphabet, mut rows: Vec<Vec<f64>>) -> Result<Self> {
        if input.is_empty() || output.is_empty() {
            return invalid("empty alphabet");
        }
        if rows.len() != input.len() {
            return invalid(format!(
                "{} rows for {} input symbols",
                rows.len(),
                input.len()
            ));
        }
        for (i, row) in rows.iter_mut().enumerate() {
            if row.len() != output.len() {
                return invalid(format!(
                    "channel row {i} has {} entries, expected {}",
                    row.len(),
                    output.len()
                ));
            }
            let total = check_mass(row).map_err(|e| match e {
                Error::InvalidArgument(m) => {
                    Error::InvalidArgument(format!("channel row {i}: {m}"))
                }
                other => other,
            })?;
            renormalize(row, total);
        }
        Ok(Self {
            input,
            output,
            rows,
        })
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n_in = rows.len();
        let n_out = rows.first().map_or(0, Vec::len);
        Self::new(Alphabet::indexed(n_in), Alphabet::indexed(n_out), rows)
    }

    /// Noiseless channel Y = X.
    pub fn identity(alphabet: Alphabet) -> Self {
        let n = alphabet.len();
        let rows = (0..n)
            .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
            .collect();
        Self {
            input: alphabet.clone(),
            output: alphabet,
            rows,
        }
    }

    /// Channel whose output ignores the input: every row equals `output`.
    pub fn constant(input: Alphabet, output: &Pmf) -> Self {
        Self {
            rows: vec![output.probs().to_vec(); input.len()],
            input,
            output: output.alphabet().clone(),
        }
    }

    /// Binary channel flipping its input with probability `flip`.
    pub fn binary_symmetric(flip: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&flip) {
            return invalid(format!("flip probability {flip} outside [0,1]"));
        }
        Self::from_rows(vec![vec![1.0 - flip, flip], vec![flip, 1.0 - flip]])
    }

    pub fn input_alphabet(&self) -> &Alphabet {
        &self.input
    }

    pub fn output_alphabet(&self) -> &Alphabet {
        &self.output
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.rows[x][y]
    }

    pub fn row(&self, x: usize) -> Pmf {
        Pmf {
            alphabet: self.output.clone(),
            probs: self.rows[x].clone(),
        }
    }

    /// Cascade `self` followed by `next`: p(z|x) = Σ_y p(y|x) p(z|y).
    pub fn then(&self, next: &Channel) -> Result<Channel> {
        self.output
            .ensure_same(&next.input, "cascaded channels do not connect")?;
        let rows = self
            .rows
            .iter()
            .map(|row| {
                (0..next.output.len())
                    .map(|z| row.iter().zip(&next.rows).map(|(&a, r)| a * r[z]).sum())
                    .collect()
            })
            .collect();
        Ok(Channel {
            input: self.input.clone(),
            output: next.output.clone(),
            rows,
        })
    }
}

/// Uniform distribution over a non-empty alphabet.
pub fn make_uniform(alphabet: Alphabet) -> Result<Pmf> {
    if alphabet.is_empty() {
        return invalid("uniform distribution over an empty alphabet");
    }
    let n = alphabet.len();
    Ok(Pmf {
        alphabet,
        probs: vec![1.0 / n as f64; n],
    })
}

/// Joint of X ~ `prior` pushed through `channel`: p(x,y) = p(x) p(y|x).
pub fn joint_from(prior: &Pmf, channel: &Channel) -> Result<JointPmf> {
    prior
        .alphabet
        .ensure_same(&channel.input, "prior and channel input")?;
    let probs = prior
        .probs
        .iter()
        .zip(&channel.rows)
        .flat_map(|(&px, row)| row.iter().map(move |&w| px * w))
        .collect();
    Ok(JointPmf {
        rows: prior.alphabet.clone(),
        cols: channel.output.clone(),
        probs,
    })
}

/// p(x | Y = y), the column `y_index` renormalized.
pub fn posterior(joint: &JointPmf, y_index: usize) -> Result<Pmf> {
    if y_index >= joint.n_cols() {
        return invalid(format!("observation index {y_index} out of range"));
    }
    let column: Vec<f64> = (0..joint.n_rows()).map(|x| joint.get(x, y_index)).collect();
    let mass: f64 = column.iter().sum();
    if mass <= 0.0 {
        return Err(Error::UnobservableEvidence { index: y_index });
    }
    // equal masses give an exactly uniform posterior on their support
    let first = column.iter().copied().find(|&p| p > 0.0).unwrap_or(0.0);
    let probs = if column.iter().all(|&p| p == 0.0 || p == first) {
        let support = column.iter().filter(|&&p| p > 0.0).count() as f64;
        column
            .iter()
            .map(|&p| if p > 0.0 { 1.0 / support } else { 0.0 })
            .collect()
    } else {
        column.into_iter().map(|p| p / mass).collect()
    };
    Ok(Pmf {
        alphabet: joint.rows.clone(),
        probs,
    })
}

/// Row (X) and column (Y) marginals.
pub fn marginals(joint: &JointPmf) -> (Pmf, Pmf) {
    let px = (0..joint.n_rows())
        .map(|x| joint.row(x).iter().sum())
        .collect();
    let py = (0..joint.n_cols()).map(|y| joint.col_mass(y)).collect();
    (
        Pmf {
            alphabet: joint.rows.clone(),
            probs: px,
        },
        Pmf {
            alphabet: joint.cols.clone(),
            probs: py,
        },
    )
}
