use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum VulnKind {
    /// Buffer overflow.
    #[serde(rename = "BO")]
    Bo,
    /// Null pointer dereference.
    #[serde(rename = "NPD")]
    Npd,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Label {
    #[serde(rename = "TP")]
    Tp,
    #[serde(rename = "FP")]
    Fp,
}

impl Label {
    pub fn is_tp(self) -> bool {
        self == Label::Tp
    }
}

/// One static-analysis report.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Warning {
    pub project: String,
    pub file: String,
    pub line: u32,
    pub kind: VulnKind,
    /// Ground truth; absent at inference time.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<Label>,
}

impl fmt::Display for VulnKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            VulnKind::Bo => "BO",
            VulnKind::Npd => "NPD",
        })
    }
}

impl FromStr for VulnKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "BO" | "bo" => Ok(VulnKind::Bo),
            "NPD" | "npd" => Ok(VulnKind::Npd),
            other => Err(format!("unknown warning kind `{other}` (expected BO or NPD)")),
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Label::Tp => "TP",
            Label::Fp => "FP",
        })
    }
}
