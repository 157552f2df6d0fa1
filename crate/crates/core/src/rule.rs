use core::fmt;
use core::str::FromStr;

use crate::baselines::{fuse_borda, fuse_majority, fuse_product, fuse_sum};
use crate::distribution::{decide, Decision, Distribution, EnsembleSnapshot};
use crate::error::Result;
use crate::yayambo::{yayambo_fuse, YayamboParams};

/// The five fusion rules.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FusionRule {
    Sum,
    Product,
    Majority,
    Borda,
    Yayambo,
}

impl FusionRule {
    pub const ALL: [FusionRule; 5] = [
        Self::Borda,
        Self::Majority,
        Self::Product,
        Self::Sum,
        Self::Yayambo,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::Sum => "sum",
            Self::Product => "product",
            Self::Majority => "majority",
            Self::Borda => "borda",
            Self::Yayambo => "yayambo",
        }
    }

    /// Fuses one observation. `params` only matters for [`FusionRule::Yayambo`].
    pub fn apply(self, ensemble: &EnsembleSnapshot, params: &YayamboParams) -> Result<RuleOutcome> {
        let (fused, iterations, converged) = match self {
            Self::Sum => (fuse_sum(ensemble), None, None),
            Self::Product => (fuse_product(ensemble)?, None, None),
            Self::Majority => (fuse_majority(ensemble).1, None, None),
            Self::Borda => (fuse_borda(ensemble), None, None),
            Self::Yayambo => {
                let out = yayambo_fuse(ensemble, params, false)?;
                (out.fused, Some(out.iterations), Some(out.converged))
            }
        };
        Ok(RuleOutcome {
            decision: decide(&fused),
            fused,
            iterations,
            converged,
        })
    }
}

impl fmt::Display for FusionRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FusionRule {
    type Err = &'static str;

    fn from_str(s: &str) -> core::result::Result<Self, Self::Err> {
        match s {
            "sum" => Ok(Self::Sum),
            "product" => Ok(Self::Product),
            "majority" => Ok(Self::Majority),
            "borda" => Ok(Self::Borda),
            "yayambo" => Ok(Self::Yayambo),
            _ => Err("unknown fusion rule"),
        }
    }
}

/// A fused distribution and its decision; iteration data only for consensus fusion.
#[derive(Debug, Clone, PartialEq)]
pub struct RuleOutcome {
    pub fused: Distribution,
    pub decision: Decision,
    pub iterations: Option<usize>,
    pub converged: Option<bool>,
}
