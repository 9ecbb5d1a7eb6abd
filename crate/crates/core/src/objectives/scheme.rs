use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

/// Which generator objective the extractor is trained against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    /// Gradient reversal: the extractor ascends the discriminator loss.
    Grl,
    /// Other-camera equiprobability.
    Oce,
    /// All-camera equiprobability.
    Ace,
    /// Triplet loss only; no discriminator is trained.
    None,
}

impl Scheme {
    pub const ALL: [Scheme; 4] = [Scheme::Grl, Scheme::Oce, Scheme::Ace, Scheme::None];

    pub fn as_str(self) -> &'static str {
        match self {
            Scheme::Grl => "grl",
            Scheme::Oce => "oce",
            Scheme::Ace => "ace",
            Scheme::None => "none",
        }
    }

    pub fn is_adversarial(self) -> bool {
        self != Scheme::None
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "grl" => Ok(Scheme::Grl),
            "oce" => Ok(Scheme::Oce),
            "ace" => Ok(Scheme::Ace),
            "none" => Ok(Scheme::None),
            other => Err(Error::InvalidArgument(format!(
                "unknown scheme {other:?} (expected grl, oce, ace or none)"
            ))),
        }
    }
}
