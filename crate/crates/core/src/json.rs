//! JSON file formats and their conversion into validated domain objects.
//!
//! Non-finite reals are written as the strings `"inf"`, `"-inf"` and `"nan"`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::bayes::{LossMatrix, Scenario};
use crate::error::{invalid, Error, Result};
use crate::prob::{Alphabet, Channel, JointPmf, Pmf};
use crate::sdc::Role;

/// Serde adapter for reals that may be infinite.
pub mod inf_f64 {
    use serde::{de, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else if v.is_nan() {
            s.serialize_str("nan")
        } else if *v > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_str("-inf")
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Str(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(v),
            Repr::Str(s) => match s.as_str() {
                "inf" | "+inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                "nan" => Ok(f64::NAN),
                other => Err(de::Error::custom(format!(
                    "expected a number or \"inf\", got {other:?}"
                ))),
            },
        }
    }
}

/// Same as [`inf_f64`] for optional values.
pub mod inf_f64_opt {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    struct Wrap(#[serde(with = "super::inf_f64")] f64);

    pub fn serialize<S: Serializer>(v: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
        v.map(Wrap).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<f64>, D::Error> {
        Ok(Option::<Wrap>::deserialize(d)?.map(|w| w.0))
    }
}

/// Parses JSON, reporting line and column on failure.
pub fn parse<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T> {
    // serde_json's message already ends with "at line L column C"
    serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
}

fn alphabet(symbols: &[String], embedding: Option<&Vec<Vec<f64>>>) -> Result<Alphabet> {
    let a = Alphabet::new(symbols.iter().cloned())?;
    match embedding {
        Some(e) => a.with_embedding(e.clone()),
        None => Ok(a),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PmfJson {
    pub alphabet: Vec<String>,
    pub probs: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub embedding: Option<Vec<Vec<f64>>>,
}

impl PmfJson {
    pub fn to_pmf(&self) -> Result<Pmf> {
        Pmf::new(
            alphabet(&self.alphabet, self.embedding.as_ref())?,
            self.probs.clone(),
        )
    }
}

impl From<&Pmf> for PmfJson {
    fn from(p: &Pmf) -> Self {
        Self {
            alphabet: p.alphabet().symbols().to_vec(),
            probs: p.probs().to_vec(),
            embedding: p.alphabet().embedding().map(<[Vec<f64>]>::to_vec),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelJson {
    pub input: Vec<String>,
    pub output: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub input_embedding: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_embedding: Option<Vec<Vec<f64>>>,
}

impl ChannelJson {
    pub fn to_channel(&self) -> Result<Channel> {
        Channel::new(
            alphabet(&self.input, self.input_embedding.as_ref())?,
            alphabet(&self.output, self.output_embedding.as_ref())?,
            self.rows.clone(),
        )
    }
}

impl From<&Channel> for ChannelJson {
    fn from(c: &Channel) -> Self {
        Self {
            input: c.input_alphabet().symbols().to_vec(),
            output: c.output_alphabet().symbols().to_vec(),
            rows: c.rows().to_vec(),
            input_embedding: c.input_alphabet().embedding().map(<[Vec<f64>]>::to_vec),
            output_embedding: c.output_alphabet().embedding().map(<[Vec<f64>]>::to_vec),
        }
    }
}

/// Joint distribution: `x` labels rows, `y` labels columns.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JointJson {
    pub x: Vec<String>,
    pub y: Vec<String>,
    pub matrix: Vec<Vec<f64>>,
}

impl JointJson {
    pub fn to_joint(&self) -> Result<JointPmf> {
        JointPmf::new(
            Alphabet::new(self.x.iter().cloned())?,
            Alphabet::new(self.y.iter().cloned())?,
            self.matrix.clone(),
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LossKind {
    Hamming,
    Squared,
    Absolute,
    Matrix,
}

/// Explicit estimate alphabet for a loss (defaults to the unknown alphabet).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimatesJson {
    pub alphabet: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub embedding: Option<Vec<Vec<f64>>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LossJson {
    pub kind: LossKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub costs: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub estimates: Option<EstimatesJson>,
}

impl LossJson {
    pub fn hamming() -> Self {
        Self {
            kind: LossKind::Hamming,
            costs: None,
            estimates: None,
        }
    }

    /// Builds the loss over `unknown` × (explicit estimates or `default_estimates`).
    pub fn to_loss(&self, unknown: &Alphabet, default_estimates: &Alphabet) -> Result<LossMatrix> {
        let estimates = match &self.estimates {
            Some(e) => alphabet(&e.alphabet, e.embedding.as_ref())?,
            None => default_estimates.clone(),
        };
        match (self.kind, &self.costs) {
            (LossKind::Matrix, Some(c)) => LossMatrix::new(unknown.clone(), estimates, c.clone()),
            (LossKind::Matrix, None) => invalid("matrix loss requires \"costs\""),
            (_, Some(_)) => invalid("\"costs\" is only valid for the matrix loss"),
            (LossKind::Hamming, None) => Ok(LossMatrix::hamming(unknown.clone(), estimates)),
            (LossKind::Squared, None) => LossMatrix::squared(unknown.clone(), estimates),
            (LossKind::Absolute, None) => LossMatrix::absolute(unknown.clone(), estimates),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioJson {
    pub prior: PmfJson,
    pub channel: ChannelJson,
    pub attacker_loss: LossJson,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub system_loss: Option<LossJson>,
}

impl ScenarioJson {
    pub fn to_scenario(&self) -> Result<Scenario> {
        let prior = self.prior.to_pmf()?;
        let mut channel = self.channel.to_channel()?;
        // the prior's embedding describes the channel input when none is given
        if channel.input_alphabet().embedding().is_none() && prior.alphabet().embedding().is_some()
        {
            prior
                .alphabet()
                .ensure_same(channel.input_alphabet(), "prior and channel input")?;
            channel = Channel::new(
                prior.alphabet().clone(),
                channel.output_alphabet().clone(),
                channel.rows().to_vec(),
            )?;
        }
        let attacker = self
            .attacker_loss
            .to_loss(prior.alphabet(), prior.alphabet())?;
        let system = self
            .system_loss
            .as_ref()
            .map(|l| l.to_loss(prior.alphabet(), channel.output_alphabet()))
            .transpose()?;
        Scenario::new(prior, channel, attacker, system)
    }
}

/// Column roles for a microdata CSV.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RolesJson {
    pub roles: BTreeMap<String, Role>,
}

/// Loss file for the trade-off optimizer: the unknown alphabet comes from the
/// prior and the reproduction alphabet from `estimates` (default: same).
pub type TradeoffLossJson = LossJson;
