use std::path::Path;

use serde::{Deserialize, Serialize};

use super::pauli::{PauliDistribution, ProtocolKind, ProtocolModel};
use crate::{Error, Result};

/// Channel settings as read from a JSON or TOML file.
///
/// `kind` is `bb84`, `six-state` or `custom`; a custom channel gives `p00..p11`
/// and its `Q` defaults to the implied bit-error rate `p10 + p11`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelConfig {
    pub kind: Option<String>,
    #[serde(rename = "Q")]
    pub qber: Option<f64>,
    pub p00: Option<f64>,
    pub p01: Option<f64>,
    pub p10: Option<f64>,
    pub p11: Option<f64>,
    pub q: Option<f64>,
    pub n: Option<usize>,
    pub seed: Option<u64>,
}

impl ChannelConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::invalid(format!("config: {e}")))
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::invalid(format!("config: {e}")))
    }

    /// Parse by extension (`.json` or `.toml`); other extensions try JSON then TOML.
    pub fn parse(text: &str, path: Option<&Path>) -> Result<Self> {
        match path.and_then(|p| p.extension()).and_then(|e| e.to_str()) {
            Some("json") => Self::from_json(text),
            Some("toml") => Self::from_toml(text),
            _ => Self::from_json(text).or_else(|_| Self::from_toml(text)),
        }
    }

    pub fn distribution_fields(&self) -> Option<Result<PauliDistribution>> {
        match (self.p00, self.p01, self.p10, self.p11) {
            (None, None, None, None) => None,
            (Some(a), Some(b), Some(c), Some(d)) => Some(PauliDistribution::new(a, b, c, d)),
            _ => Some(Err(Error::invalid(
                "a custom channel needs all of p00, p01, p10, p11",
            ))),
        }
    }

    pub fn model(&self) -> Result<ProtocolModel> {
        let kind =
            self.kind
                .as_deref()
                .unwrap_or(if self.p00.is_some() { "custom" } else { "bb84" });
        match kind {
            "bb84" | "six-state" => {
                let qber = self.qber.ok_or_else(|| Error::invalid("missing Q"))?;
                let kind = if kind == "bb84" {
                    ProtocolKind::Bb84
                } else {
                    ProtocolKind::SixState
                };
                ProtocolModel::new(kind, qber)
            }
            "custom" => {
                let d = self
                    .distribution_fields()
                    .unwrap_or_else(|| Err(Error::invalid("custom channel without p00..p11")))?;
                ProtocolModel::new(ProtocolKind::Custom(d), self.qber.unwrap_or(d.p10 + d.p11))
            }
            other => Err(Error::invalid(format!("unknown protocol kind `{other}`"))),
        }
    }
}
