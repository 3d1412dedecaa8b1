//! Instance files: a JSON document holding the bid profile and the supply
//! environment. Parse errors surface with line and column so a malformed
//! file is quick to fix.

use anyhow::{bail, Context, Result};
use auction_lab::core::FeasibleSet;
use auction_lab::{BidProfile, EnvironmentSpec};
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use std::path::Path;

/// On-disk instance document.
#[derive(Debug, Serialize, Deserialize)]
pub struct Instance {
    pub bids: Vec<f64>,
    pub environment: EnvironmentJson,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum EnvironmentJson {
    Unlimited,
    MultiUnit { units: u32 },
    DownwardClosed { feasible_sets: Vec<FeasibleSetJson> },
}

#[derive(Debug, Serialize, Deserialize)]
pub struct FeasibleSetJson {
    pub members: Vec<usize>,
    pub prob: f64,
}

impl Instance {
    pub fn into_parts(self) -> Result<(BidProfile, EnvironmentSpec)> {
        let profile = BidProfile::new(self.bids)?;
        let env = match self.environment {
            EnvironmentJson::Unlimited => EnvironmentSpec::unlimited(),
            EnvironmentJson::MultiUnit { units } => EnvironmentSpec::multi_unit(units),
            EnvironmentJson::DownwardClosed { feasible_sets } => {
                let sets = feasible_sets
                    .into_iter()
                    .map(|s| FeasibleSet {
                        members: s.members.into_iter().collect::<BTreeSet<_>>(),
                        prob: s.prob,
                    })
                    .collect();
                EnvironmentSpec::downward_closed(sets)
            }
        };
        if let Err(violation) = env.validate() {
            bail!("invalid environment: {violation}");
        }
        Ok((profile, env))
    }
}

pub fn load(path: &Path) -> Result<(BidProfile, EnvironmentSpec)> {
    let raw = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read instance file {}", path.display()))?;
    let instance: Instance = serde_json::from_str(&raw).map_err(|e| {
        anyhow::anyhow!(
            "{}: parse error at line {} column {}: {e}",
            path.display(),
            e.line(),
            e.column()
        )
    })?;
    instance
        .into_parts()
        .with_context(|| format!("invalid instance {}", path.display()))
}

/// Serializes an unlimited-supply instance for the given bids.
pub fn unlimited_json(bids: &[f64]) -> Result<String> {
    let instance = Instance {
        bids: bids.to_vec(),
        environment: EnvironmentJson::Unlimited,
    };
    Ok(serde_json::to_string_pretty(&instance)?)
}
