//! Statistical disclosure control criteria on released microdata tables.
//!
//! Rows sharing the same tuple of key-attribute values form an equivalence
//! class; the empirical distribution of the confidential attribute inside a
//! class is the attacker's posterior, and its distribution over the whole
//! table is the prior.

use std::collections::BTreeMap;
use std::io::Read;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::info::{kl_bits_raw, shannon_bits};
use crate::json::inf_f64;
use crate::prob::{Alphabet, JointPmf, Pmf};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Identifier,
    Key,
    Confidential,
    Ignored,
}

#[derive(Clone, Debug)]
pub struct MicrodataTable {
    columns: Vec<String>,
    roles: Vec<Role>,
    rows: Vec<Vec<String>>,
}

impl MicrodataTable {
    pub fn new(columns: Vec<String>, roles: Vec<Role>, rows: Vec<Vec<String>>) -> Result<Self> {
        if roles.len() != columns.len() {
            return invalid(format!(
                "{} roles for {} columns",
                roles.len(),
                columns.len()
            ));
        }
        if let Some(i) = rows.iter().position(|r| r.len() != columns.len()) {
            return invalid(format!(
                "row {i} has {} cells, expected {}",
                rows[i].len(),
                columns.len()
            ));
        }
        Ok(Self {
            columns,
            roles,
            rows,
        })
    }

    /// Reads a headed CSV. Columns missing from `roles` are ignored; roles
    /// naming unknown columns are rejected.
    pub fn from_csv<R: Read>(reader: R, roles: &BTreeMap<String, Role>) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .from_reader(reader);
        let columns: Vec<String> = rdr
            .headers()
            .map_err(|e| Error::Parse(e.to_string()))?
            .iter()
            .map(|s| s.trim().to_owned())
            .collect();
        for name in roles.keys() {
            if !columns.contains(name) {
                return invalid(format!("role assigned to unknown column {name:?}"));
            }
        }
        let mut rows = Vec::new();
        for rec in rdr.records() {
            let rec = rec.map_err(|e| Error::Parse(e.to_string()))?;
            rows.push(rec.iter().map(|s| s.trim().to_owned()).collect());
        }
        let role_of = columns
            .iter()
            .map(|c| roles.get(c).copied().unwrap_or(Role::Ignored))
            .collect();
        Self::new(columns, role_of, rows)
    }

    pub fn columns(&self) -> &[String] {
        &self.columns
    }

    pub fn rows(&self) -> &[Vec<String>] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    fn columns_with(&self, role: Role) -> Vec<usize> {
        (0..self.columns.len())
            .filter(|&i| self.roles[i] == role)
            .collect()
    }

    pub fn key_columns(&self) -> Vec<usize> {
        self.columns_with(Role::Key)
    }

    pub fn confidential_columns(&self) -> Vec<&str> {
        self.columns_with(Role::Confidential)
            .into_iter()
            .map(|i| self.columns[i].as_str())
            .collect()
    }

    fn confidential_index(&self, name: &str) -> Result<usize> {
        match self.columns.iter().position(|c| c == name) {
            Some(i) if self.roles[i] == Role::Confidential => Ok(i),
            Some(_) => invalid(format!("column {name:?} is not confidential")),
            None => invalid(format!("no column named {name:?}")),
        }
    }

    /// Confidential values in first-appearance order.
    fn confidential_alphabet(&self, col: usize) -> Result<Alphabet> {
        let mut seen = Vec::<&str>::new();
        for r in &self.rows {
            if !seen.contains(&r[col].as_str()) {
                seen.push(&r[col]);
            }
        }
        Alphabet::new(seen)
    }
}

/// Rows sharing one key tuple.
#[derive(Clone, Debug)]
pub struct EquivalenceClass {
    pub key_tuple: Vec<String>,
    pub row_indices: Vec<usize>,
    /// Empirical confidential distribution, over the table-wide alphabet.
    pub confidential_pmf: Pmf,
}

impl EquivalenceClass {
    pub fn size(&self) -> usize {
        self.row_indices.len()
    }
}

/// Groups rows by exact key tuple, classes ordered lexicographically by key.
pub fn partition(
    table: &MicrodataTable,
    confidential_column: &str,
) -> Result<Vec<EquivalenceClass>> {
    let keys = table.key_columns();
    if keys.is_empty() {
        return invalid("table has no key columns");
    }
    if table.is_empty() {
        return invalid("table has no rows");
    }
    let conf = table.confidential_index(confidential_column)?;
    let alphabet = table.confidential_alphabet(conf)?;

    let mut groups: BTreeMap<Vec<&str>, Vec<usize>> = BTreeMap::new();
    for (i, row) in table.rows.iter().enumerate() {
        let key = keys.iter().map(|&k| row[k].as_str()).collect();
        groups.entry(key).or_default().push(i);
    }
    groups
        .into_iter()
        .map(|(key, rows)| {
            let mut counts = vec![0.0; alphabet.len()];
            for &r in &rows {
                let v = alphabet
                    .index_of(&table.rows[r][conf])
                    .expect("value in alphabet");
                counts[v] += 1.0;
            }
            let n = rows.len() as f64;
            let pmf = Pmf::new(
                alphabet.clone(),
                counts.into_iter().map(|c| c / n).collect(),
            )?;
            Ok(EquivalenceClass {
                key_tuple: key.into_iter().map(str::to_owned).collect(),
                row_indices: rows,
                confidential_pmf: pmf,
            })
        })
        .collect()
}

/// Confidential distribution over the whole table (class-size weighted).
pub fn empirical_prior(classes: &[EquivalenceClass]) -> Result<Pmf> {
    let Some(first) = classes.first() else {
        return invalid("no equivalence classes");
    };
    let total: usize = classes.iter().map(EquivalenceClass::size).sum();
    let mut probs = vec![0.0; first.confidential_pmf.len()];
    for c in classes {
        let w = c.size() as f64 / total as f64;
        for (p, q) in probs.iter_mut().zip(c.confidential_pmf.probs()) {
            *p += w * q;
        }
    }
    Pmf::new(first.confidential_pmf.alphabet().clone(), probs)
}

/// Joint of (confidential value, class) induced by the table.
pub fn induced_joint(classes: &[EquivalenceClass]) -> Result<JointPmf> {
    let Some(first) = classes.first() else {
        return invalid("no equivalence classes");
    };
    let total: usize = classes.iter().map(EquivalenceClass::size).sum();
    let rows = first.confidential_pmf.alphabet().clone();
    let cols = Alphabet::new(classes.iter().map(|c| c.key_tuple.join("|")))?;
    let matrix = (0..rows.len())
        .map(|x| {
            classes
                .iter()
                .map(|c| c.confidential_pmf.get(x) * c.size() as f64 / total as f64)
                .collect()
        })
        .collect();
    JointPmf::new(rows, cols, matrix)
}

pub fn k_anonymity(classes: &[EquivalenceClass]) -> usize {
    classes
        .iter()
        .map(EquivalenceClass::size)
        .min()
        .unwrap_or(0)
}

/// Distinct and entropy l-diversity.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LDiversity {
    /// Fewest distinct confidential values in any class.
    pub distinct: usize,
    /// Smallest 2^{H(class)}: the largest l for which entropy l-diversity holds.
    pub entropy: f64,
}

impl LDiversity {
    pub fn satisfies_entropy(&self, l: f64) -> bool {
        self.entropy >= l
    }
}

pub fn l_diversity(classes: &[EquivalenceClass]) -> LDiversity {
    LDiversity {
        distinct: classes
            .iter()
            .map(|c| c.confidential_pmf.support_size())
            .min()
            .unwrap_or(0),
        entropy: classes
            .iter()
            .map(|c| shannon_bits(c.confidential_pmf.probs()).exp2())
            .fold(f64::INFINITY, f64::min),
    }
}

fn check_prior(classes: &[EquivalenceClass], prior: &Pmf) -> Result<()> {
    for c in classes {
        c.confidential_pmf.ensure_same_alphabet(prior)?;
    }
    Ok(())
}

/// max_class D(class ‖ prior), bits.
pub fn t_closeness(classes: &[EquivalenceClass], prior: &Pmf) -> Result<f64> {
    check_prior(classes, prior)?;
    Ok(classes
        .iter()
        .map(|c| kl_bits_raw(c.confidential_pmf.probs(), prior.probs()))
        .fold(0.0, f64::max))
}

fn max_abs_log_ratio(class: &Pmf, prior: &Pmf) -> f64 {
    class
        .probs()
        .iter()
        .zip(prior.probs())
        .filter(|(_, &q)| q > 0.0)
        .map(|(&p, &q)| (p / q).log2().abs())
        .fold(0.0, f64::max)
}

/// max over classes and prior-supported values of |log(class/prior)|, bits.
pub fn delta_disclosure(classes: &[EquivalenceClass], prior: &Pmf) -> Result<f64> {
    check_prior(classes, prior)?;
    Ok(classes
        .iter()
        .map(|c| max_abs_log_ratio(&c.confidential_pmf, prior))
        .fold(0.0, f64::max))
}

/// Σ_class w·D(class ‖ prior) with w the class's share of rows, bits.
pub fn privacy_risk(classes: &[EquivalenceClass], prior: &Pmf) -> Result<f64> {
    check_prior(classes, prior)?;
    let total: usize = classes.iter().map(EquivalenceClass::size).sum();
    Ok(classes
        .iter()
        .map(|c| {
            c.size() as f64 / total as f64 * kl_bits_raw(c.confidential_pmf.probs(), prior.probs())
        })
        .sum())
}

/// Two-sided max log-ratio between two output distributions, bits.
pub fn epsilon_max_log_ratio(p: &Pmf, q: &Pmf) -> Result<f64> {
    p.ensure_same_alphabet(q)?;
    let mut eps: f64 = 0.0;
    for (&a, &b) in p.probs().iter().zip(q.probs()) {
        match (a > 0.0, b > 0.0) {
            (true, true) => eps = eps.max((a / b).log2().abs()),
            (false, false) => {}
            _ => return Ok(f64::INFINITY),
        }
    }
    Ok(eps)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassDiagnostics {
    pub key_tuple: Vec<String>,
    pub size: usize,
    pub distinct_values: usize,
    pub entropy_bits: f64,
    #[serde(with = "inf_f64")]
    pub kl_bits: f64,
    #[serde(with = "inf_f64")]
    pub max_abs_log_ratio: f64,
    /// Confidential distribution is uniform on its support.
    pub uniform: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SdcReport {
    pub confidential_column: String,
    pub rows: usize,
    pub classes: usize,
    pub k: usize,
    pub l_distinct: usize,
    pub l_entropy: f64,
    #[serde(with = "inf_f64")]
    pub t: f64,
    #[serde(with = "inf_f64")]
    pub delta: f64,
    #[serde(with = "inf_f64")]
    pub risk: f64,
    pub prior: Vec<(String, f64)>,
    pub per_class: Vec<ClassDiagnostics>,
}

impl SdcReport {
    pub fn has_infinite_criterion(&self) -> bool {
        [self.t, self.delta, self.risk]
            .iter()
            .any(|v| v.is_infinite())
    }
}

/// Every criterion against the table's own empirical prior.
pub fn sdc_report(table: &MicrodataTable, confidential_column: &str) -> Result<SdcReport> {
    let classes = partition(table, confidential_column)?;
    let prior = empirical_prior(&classes)?;
    sdc_report_with_prior(table, confidential_column, &classes, &prior)
}

/// Criteria against an externally supplied prior (attacker background knowledge).
pub fn sdc_report_with_prior(
    table: &MicrodataTable,
    confidential_column: &str,
    classes: &[EquivalenceClass],
    prior: &Pmf,
) -> Result<SdcReport> {
    let l = l_diversity(classes);
    let t = t_closeness(classes, prior)?;
    let delta = delta_disclosure(classes, prior)?;
    let risk = privacy_risk(classes, prior)?;
    let slack = 1e-12;
    if !(risk <= t + slack && t <= delta + slack) {
        return Err(Error::InvalidArgument(format!(
            "criteria violate R <= t <= delta: R={risk}, t={t}, delta={delta}"
        )));
    }
    let per_class = classes
        .iter()
        .map(|c| {
            let pmf = &c.confidential_pmf;
            let support: Vec<f64> = pmf.probs().iter().copied().filter(|&p| p > 0.0).collect();
            ClassDiagnostics {
                key_tuple: c.key_tuple.clone(),
                size: c.size(),
                distinct_values: support.len(),
                entropy_bits: shannon_bits(pmf.probs()),
                kl_bits: kl_bits_raw(pmf.probs(), prior.probs()),
                max_abs_log_ratio: max_abs_log_ratio(pmf, prior),
                uniform: support.iter().all(|&p| (p - support[0]).abs() <= 1e-12),
            }
        })
        .collect();
    Ok(SdcReport {
        confidential_column: confidential_column.to_owned(),
        rows: table.len(),
        classes: classes.len(),
        k: k_anonymity(classes),
        l_distinct: l.distinct,
        l_entropy: l.entropy,
        t,
        delta,
        risk,
        prior: prior
            .alphabet()
            .symbols()
            .iter()
            .cloned()
            .zip(prior.probs().iter().copied())
            .collect(),
        per_class,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::info::mutual_information;
    use approx::assert_abs_diff_eq;

    fn table(rows: &[(&str, &str)]) -> MicrodataTable {
        MicrodataTable::new(
            vec!["zip".into(), "disease".into()],
            vec![Role::Key, Role::Confidential],
            rows.iter()
                .map(|(a, b)| vec![a.to_string(), b.to_string()])
                .collect(),
        )
        .unwrap()
    }

    /// Two classes of four; AIDS is half the table but 3/4 of the first class.
    fn aids_table() -> MicrodataTable {
        table(&[
            ("130**", "AIDS"),
            ("130**", "AIDS"),
            ("130**", "AIDS"),
            ("130**", "flu"),
            ("148**", "AIDS"),
            ("148**", "flu"),
            ("148**", "flu"),
            ("148**", "flu"),
        ])
    }

    #[test]
    fn partition_examples() {
        let t = table(&[
            ("a", "x"),
            ("b", "x"),
            ("c", "y"),
            ("a", "y"),
            ("b", "z"),
            ("c", "y"),
            ("a", "z"),
            ("b", "x"),
            ("c", "x"),
        ]);
        let classes = partition(&t, "disease").unwrap();
        assert_eq!(classes.len(), 3);
        assert!(classes.iter().all(|c| c.size() == 3));
        assert_eq!(classes[0].key_tuple, vec!["a"]);
        assert_eq!(k_anonymity(&classes), 3);

        let same = table(&[("a", "x"), ("a", "y"), ("a", "x")]);
        let classes = partition(&same, "disease").unwrap();
        assert_eq!(classes.len(), 1);
        assert_eq!(k_anonymity(&classes), 3);

        let distinct = table(&[("a", "x"), ("b", "y"), ("c", "x")]);
        let classes = partition(&distinct, "disease").unwrap();
        assert_eq!(classes.len(), 3);
        assert_eq!(k_anonymity(&classes), 1);
    }

    #[test]
    fn partition_requires_keys_and_confidential() {
        let t = MicrodataTable::new(
            vec!["a".into(), "b".into()],
            vec![Role::Ignored, Role::Confidential],
            vec![vec!["1".into(), "2".into()]],
        )
        .unwrap();
        assert!(partition(&t, "b").is_err());
        assert!(partition(&table(&[("a", "x")]), "zip").is_err());
        assert!(partition(&table(&[("a", "x")]), "nope").is_err());
    }

    #[test]
    fn l_diversity_examples() {
        let t = table(&[("a", "x"), ("a", "y"), ("b", "x"), ("b", "y")]);
        let l = l_diversity(&partition(&t, "disease").unwrap());
        assert_eq!(l.distinct, 2);
        assert_abs_diff_eq!(l.entropy, 2.0, epsilon = 1e-12);
        assert!(l.satisfies_entropy(2.0 - 1e-9));

        let t = table(&[("a", "x"), ("a", "x"), ("b", "x"), ("b", "y")]);
        let l = l_diversity(&partition(&t, "disease").unwrap());
        assert_eq!((l.distinct, l.entropy), (1, 1.0));

        let t = table(&[("a", "x"), ("a", "x"), ("a", "x"), ("a", "y")]);
        let l = l_diversity(&partition(&t, "disease").unwrap());
        assert_eq!(l.distinct, 2);
        assert_abs_diff_eq!(l.entropy, 1.755, epsilon = 1e-3);
    }

    #[test]
    fn closeness_and_disclosure_examples() {
        let classes = partition(&aids_table(), "disease").unwrap();
        let prior = empirical_prior(&classes).unwrap();
        assert_eq!(prior.probs(), &[0.5, 0.5]);
        let kl = 0.75 * 1.5f64.log2() + 0.25 * 0.5f64.log2();
        assert_abs_diff_eq!(t_closeness(&classes, &prior).unwrap(), kl, epsilon = 1e-15);
        assert_abs_diff_eq!(privacy_risk(&classes, &prior).unwrap(), kl, epsilon = 1e-15);
        assert_abs_diff_eq!(
            delta_disclosure(&classes, &prior).unwrap(),
            1.0,
            epsilon = 1e-15
        );

        let flat = table(&[("a", "x"), ("a", "y"), ("b", "x"), ("b", "y")]);
        let classes = partition(&flat, "disease").unwrap();
        let prior = empirical_prior(&classes).unwrap();
        assert_eq!(t_closeness(&classes, &prior).unwrap(), 0.0);
        assert_eq!(delta_disclosure(&classes, &prior).unwrap(), 0.0);
        assert_eq!(privacy_risk(&classes, &prior).unwrap(), 0.0);
    }

    #[test]
    fn missing_value_gives_infinite_delta() {
        let t = table(&[("a", "x"), ("a", "y"), ("b", "x"), ("b", "x")]);
        let classes = partition(&t, "disease").unwrap();
        let prior = empirical_prior(&classes).unwrap();
        assert_eq!(delta_disclosure(&classes, &prior).unwrap(), f64::INFINITY);
        assert!(t_closeness(&classes, &prior).unwrap().is_finite());
    }

    #[test]
    fn deterministic_classes_leak_the_prior_entropy() {
        let t = table(&[("a", "x"), ("b", "y"), ("c", "z"), ("d", "z")]);
        let classes = partition(&t, "disease").unwrap();
        let prior = empirical_prior(&classes).unwrap();
        let h = shannon_bits(prior.probs());
        assert_abs_diff_eq!(privacy_risk(&classes, &prior).unwrap(), h, epsilon = 1e-12);
        assert_abs_diff_eq!(
            mutual_information(&induced_joint(&classes).unwrap()),
            h,
            epsilon = 1e-12
        );
    }

    #[test]
    fn epsilon_examples() {
        let p = Pmf::from_probs(vec![0.75, 0.25]).unwrap();
        let q = Pmf::from_probs(vec![0.5, 0.5]).unwrap();
        assert_eq!(epsilon_max_log_ratio(&p, &p).unwrap(), 0.0);
        assert_abs_diff_eq!(epsilon_max_log_ratio(&p, &q).unwrap(), 1.0, epsilon = 1e-15);
        let a = Pmf::from_probs(vec![1.0, 0.0]).unwrap();
        let b = Pmf::from_probs(vec![0.0, 1.0]).unwrap();
        assert_eq!(epsilon_max_log_ratio(&a, &b).unwrap(), f64::INFINITY);
        let c = Pmf::from_probs(vec![0.5, 0.5, 0.0]).unwrap();
        assert!(epsilon_max_log_ratio(&a, &c).is_err());
    }

    #[test]
    fn report_examples() {
        let r = sdc_report(&aids_table(), "disease").unwrap();
        assert_eq!(r.k, 4);
        assert_abs_diff_eq!(r.t, 0.1887, epsilon = 1e-4);
        assert_abs_diff_eq!(r.risk, 0.1887, epsilon = 1e-4);
        assert_abs_diff_eq!(r.delta, 1.0, epsilon = 1e-15);
        assert!(!r.has_infinite_criterion());
        assert!(r.per_class.iter().all(|c| !c.uniform));

        let flat = table(&[
            ("a", "x"),
            ("a", "y"),
            ("b", "x"),
            ("b", "y"),
            ("b", "x"),
            ("b", "y"),
        ]);
        let r = sdc_report(&flat, "disease").unwrap();
        assert_eq!((r.k, r.t, r.delta, r.risk), (2, 0.0, 0.0, 0.0));

        let singles = table(&[("a", "x"), ("b", "y")]);
        let r = sdc_report(&singles, "disease").unwrap();
        assert_eq!(r.k, 1);
        assert_eq!(r.delta, f64::INFINITY);
        assert!(r.has_infinite_criterion());
    }

    #[test]
    fn csv_loading_drops_identifiers() {
        let csv = "name,zip,age,disease\nann,130,3*,flu\nbob,130,3*,flu\ncid,148,4*,AIDS\n";
        let roles = BTreeMap::from([
            ("name".to_string(), Role::Identifier),
            ("zip".to_string(), Role::Key),
            ("age".to_string(), Role::Key),
            ("disease".to_string(), Role::Confidential),
        ]);
        let t = MicrodataTable::from_csv(csv.as_bytes(), &roles).unwrap();
        let classes = partition(&t, "disease").unwrap();
        assert_eq!(classes.len(), 2);
        assert_eq!(classes[0].key_tuple, vec!["130", "3*"]);

        let bad = BTreeMap::from([("missing".to_string(), Role::Key)]);
        assert!(MicrodataTable::from_csv(csv.as_bytes(), &bad).is_err());
    }
}
