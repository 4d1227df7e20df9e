//! TOML description of input laws.
//!
//! ```toml
//! kind = "mixture"
//! standardize = true
//!
//! [[atoms]]
//! value = 0.0
//! mass = 0.9
//!
//! [[components]]
//! family = "gaussian"
//! weight = 0.1
//! mean = 0.0
//! variance = 1.0
//! ```
//!
//! `kind = "self_similar"` takes `base`, `digit_probs` and `depth_hint`;
//! `kind = "cantor"` is shorthand for the middle-thirds law. Component
//! families are `gaussian`, `uniform`, `laplace`, `point_masses` and `cantor`
//! (the last only as the sole component, with weight 1).

use serde::{Deserialize, Serialize};

use crate::dist::{
    Atom, ContinuousComponent, Distribution, MixtureDistribution, SelfSimilarDistribution, WeightedComponent,
};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DistKind {
    Mixture,
    SelfSimilar,
    Cantor,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AtomConfig {
    pub value: f64,
    pub mass: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum ComponentConfig {
    Gaussian { weight: f64, mean: f64, variance: f64 },
    Uniform { weight: f64, lo: f64, hi: f64 },
    Laplace { weight: f64, location: f64, scale: f64 },
    /// Atoms with relative `masses` (summing to 1) scaled by `weight`.
    PointMasses { weight: f64, values: Vec<f64>, masses: Vec<f64> },
    Cantor { weight: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DistConfig {
    pub kind: DistKind,
    #[serde(default)]
    pub standardize: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub digit_probs: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub depth_hint: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shift: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scale: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub atoms: Vec<AtomConfig>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub components: Vec<ComponentConfig>,
}

/// Deserializes a TOML document, reporting failures at the offending key
/// (`components[1].family`), optionally under `prefix`.
pub(crate) fn parse_toml<T: serde::de::DeserializeOwned>(text: &str, prefix: &str) -> Result<T> {
    let at = |inner: String| match (prefix.is_empty(), inner.is_empty()) {
        (true, true) => "<root>".to_string(),
        (true, false) => inner,
        (false, true) => prefix.to_string(),
        (false, false) => format!("{prefix}.{inner}"),
    };
    let de = toml::Deserializer::parse(text).map_err(|e| Error::config(at(String::new()), e.message().to_string()))?;
    serde_path_to_error::deserialize(de).map_err(|e| {
        let inner = e.path().to_string();
        let inner = if inner == "." { String::new() } else { inner };
        Error::config(at(inner), e.inner().message().to_string())
    })
}

impl DistConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        parse_toml(text, "")
    }

    pub fn from_path(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::config("<root>", e.to_string()))
    }

    /// Config reproducing `dist` exactly.
    pub fn from_distribution(dist: &Distribution) -> Self {
        match dist {
            Distribution::Mixture(m) => DistConfig {
                kind: DistKind::Mixture,
                standardize: false,
                base: None,
                digit_probs: None,
                depth_hint: None,
                shift: None,
                scale: None,
                atoms: m
                    .atoms()
                    .iter()
                    .map(|a| AtomConfig {
                        value: a.value,
                        mass: a.mass,
                    })
                    .collect(),
                components: m
                    .components()
                    .iter()
                    .map(|c| match c.component {
                        ContinuousComponent::Gaussian { mean, variance } => ComponentConfig::Gaussian {
                            weight: c.weight,
                            mean,
                            variance,
                        },
                        ContinuousComponent::Uniform { lo, hi } => ComponentConfig::Uniform { weight: c.weight, lo, hi },
                        ContinuousComponent::Laplace { location, scale } => ComponentConfig::Laplace {
                            weight: c.weight,
                            location,
                            scale,
                        },
                    })
                    .collect(),
            },
            Distribution::SelfSimilar(s) => DistConfig {
                kind: DistKind::SelfSimilar,
                standardize: false,
                base: Some(s.base()),
                digit_probs: Some(s.digit_probs().to_vec()),
                depth_hint: Some(s.depth_hint()),
                shift: Some(s.shift()),
                scale: Some(s.scale()),
                atoms: vec![],
                components: vec![],
            },
        }
    }

    pub fn build(&self) -> Result<Distribution> {
        let dist = match self.kind {
            DistKind::Cantor => self.self_similar(SelfSimilarDistribution::cantor())?,
            DistKind::SelfSimilar => {
                let base = self.base.ok_or_else(|| Error::config("base", "required for self_similar"))?;
                let probs = self
                    .digit_probs
                    .clone()
                    .ok_or_else(|| Error::config("digit_probs", "required for self_similar"))?;
                let law = SelfSimilarDistribution::new(base, probs, self.depth_hint.unwrap_or(12))
                    .map_err(|e| Error::config("digit_probs", e.to_string()))?;
                self.self_similar(law)?
            }
            DistKind::Mixture => self.mixture()?,
        };
        if self.standardize {
            Ok(dist.standardize()?.0)
        } else {
            Ok(dist)
        }
    }

    fn self_similar(&self, law: SelfSimilarDistribution) -> Result<Distribution> {
        if !self.atoms.is_empty() || !self.components.is_empty() {
            return Err(Error::config("atoms", "self-similar laws take no atoms or components"));
        }
        let law = law.with_affine(self.shift.unwrap_or(0.0), self.scale.unwrap_or(1.0));
        Ok(Distribution::SelfSimilar(law))
    }

    fn mixture(&self) -> Result<Distribution> {
        if let [ComponentConfig::Cantor { weight }] = self.components.as_slice() {
            if !self.atoms.is_empty() || *weight != 1.0 {
                return Err(Error::config(
                    "components[0].weight",
                    "cantor must be the only component, with weight 1",
                ));
            }
            return Ok(Distribution::SelfSimilar(SelfSimilarDistribution::cantor()));
        }
        let mut atoms: Vec<Atom> = self.atoms.iter().map(|a| Atom::new(a.value, a.mass)).collect();
        let mut continuous = Vec::new();
        for (i, c) in self.components.iter().enumerate() {
            let path = |field: &str| format!("components[{i}].{field}");
            let (weight, component) = match *c {
                ComponentConfig::Gaussian { weight, mean, variance } => {
                    (weight, ContinuousComponent::gaussian(mean, variance))
                }
                ComponentConfig::Uniform { weight, lo, hi } => (weight, ContinuousComponent::uniform(lo, hi)),
                ComponentConfig::Laplace {
                    weight,
                    location,
                    scale,
                } => (weight, ContinuousComponent::laplace(location, scale)),
                ComponentConfig::PointMasses {
                    weight,
                    ref values,
                    ref masses,
                } => {
                    if values.len() != masses.len() || values.is_empty() {
                        return Err(Error::config(path("masses"), "values and masses must be non-empty and equally long"));
                    }
                    atoms.extend(values.iter().zip(masses).map(|(&v, &m)| Atom::new(v, weight * m)));
                    continue;
                }
                ComponentConfig::Cantor { .. } => {
                    return Err(Error::config(path("family"), "cantor must be the only component"));
                }
            };
            component.validate().map_err(|e| Error::config(path("family"), e.to_string()))?;
            continuous.push(WeightedComponent { weight, component });
        }
        MixtureDistribution::new(atoms, continuous)
            .map(Distribution::Mixture)
            .map_err(|e| Error::config("components", e.to_string()))
    }
}
