//! Model definition files: a small TOML schema that names a catalog
//! family and its orders, plus truncation/tolerance settings, and builds
//! the corresponding model.

use std::path::Path;

use serde::Deserialize;

use crate::catalog::{
    build_cross, build_torus, cross_suggested_decay, CrossFamily, CrossSpace, Functional, RdModel,
    TorusSpec,
};
use crate::error::{Error, Result};
use crate::spectral::{IndexSet, SpectralModel, TailPolicy, Weight};
use std::sync::Arc;

/// Scalar-or-vector field: cross families take scalar orders, lattice
/// families take one order per axis.
#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum Order {
    Scalar(f64),
    Vector(Vec<f64>),
}

impl Order {
    fn to_vec(&self, dim: usize) -> Vec<f64> {
        match self {
            Order::Scalar(v) => vec![*v; dim],
            Order::Vector(v) => v.clone(),
        }
    }

    fn scalar(&self) -> Result<f64> {
        match self {
            Order::Scalar(v) => Ok(*v),
            Order::Vector(v) if v.len() == 1 => Ok(v[0]),
            _ => Err(Error::ModelSpec(
                "this family takes scalar orders".into(),
            )),
        }
    }
}

#[derive(Clone, Debug, Deserialize, Default)]
pub struct TruncationSection {
    pub max_level: Option<u64>,
}

#[derive(Clone, Debug, Deserialize, Default)]
pub struct ToleranceSection {
    pub rel: Option<f64>,
    /// Declared decay exponent of the summand ratio, for certified tails.
    pub decay: Option<f64>,
}

#[derive(Clone, Debug, Deserialize)]
pub struct StechkinSection {
    /// Number of leading constraint operators forming the C-group.
    pub split: usize,
}

#[derive(Clone, Debug, Deserialize)]
pub struct ExplicitEntry {
    pub index: Vec<i64>,
    pub c: f64,
    pub b: Vec<f64>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    /// One of: torus, S, RP, CP, HP, CaP2, rd, explicit.
    pub family: String,
    /// Torus/R^d dimension, or the rank parameter b of a cross family.
    pub dimension: Option<u32>,
    pub k: Option<Order>,
    pub r_list: Option<Vec<Order>>,
    /// "point" (mean-squared functional) or "norm" (HLP).
    pub functional: Option<String>,
    pub damping: Option<Vec<f64>>,
    #[serde(default)]
    pub truncation: TruncationSection,
    #[serde(default)]
    pub tolerance: ToleranceSection,
    pub stechkin: Option<StechkinSection>,
    pub entries: Option<Vec<ExplicitEntry>>,
}

/// A model built from a spec file: either a discrete spectral model or the
/// continuous R^d model, plus the tail policy the file requests.
pub struct LoadedModel {
    pub spectral: Option<SpectralModel>,
    pub rd: Option<RdModel>,
    pub policy: TailPolicy,
    pub stechkin_split: Option<usize>,
}

impl ModelSpec {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::ModelSpec(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    fn functional(&self) -> Result<Functional> {
        match self.functional.as_deref() {
            None | Some("point") => Ok(Functional::PointEvaluation),
            Some("norm") => Ok(Functional::Norm),
            Some(other) => Err(Error::ModelSpec(format!(
                "functional must be \"point\" or \"norm\", got {other:?}"
            ))),
        }
    }

    fn orders(&self, dim: usize) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
        let k = self
            .k
            .as_ref()
            .ok_or_else(|| Error::ModelSpec("field `k` is required".into()))?
            .to_vec(dim);
        let r_list: Vec<Vec<f64>> = self
            .r_list
            .as_ref()
            .ok_or_else(|| Error::ModelSpec("field `r_list` is required".into()))?
            .iter()
            .map(|o| o.to_vec(dim))
            .collect();
        Ok((k, r_list))
    }

    pub fn build(&self) -> Result<LoadedModel> {
        let mut policy = TailPolicy::default();
        if let Some(rel) = self.tolerance.rel {
            policy.rel_tol = rel;
        }
        if let Some(max_level) = self.truncation.max_level {
            policy.max_level = max_level;
        }
        policy.decay = self.tolerance.decay;
        let split = self.stechkin.as_ref().map(|s| s.split);

        let loaded = |spectral, rd, policy| LoadedModel {
            spectral,
            rd,
            policy,
            stechkin_split: split,
        };

        match self.family.as_str() {
            "torus" => {
                let a = self.dimension.unwrap_or(1) as usize;
                let (k, r_list) = self.orders(a)?;
                let spec = TorusSpec {
                    a,
                    k,
                    r_list,
                    functional: self.functional()?,
                    damping: self.damping.clone(),
                };
                if policy.decay.is_none() {
                    policy.decay = spec.suggested_decay();
                }
                Ok(loaded(Some(build_torus(&spec)?), None, policy))
            }
            "rd" => {
                let d = self.dimension.unwrap_or(1) as usize;
                let (k, r_list) = self.orders(d)?;
                let mut rd = RdModel::new(d, k, r_list)?;
                if let Some(rel) = self.tolerance.rel {
                    rd.rel_tol = rel;
                }
                Ok(loaded(None, Some(rd), policy))
            }
            "explicit" => {
                let entries = self
                    .entries
                    .as_ref()
                    .filter(|e| !e.is_empty())
                    .ok_or_else(|| {
                        Error::ModelSpec("family \"explicit\" needs [[entries]]".into())
                    })?
                    .clone();
                let m1 = entries[0].b.len();
                if m1 == 0 || entries.iter().any(|e| e.b.len() != m1) {
                    return Err(Error::ModelSpec(
                        "every entry needs the same positive number of b-weights".into(),
                    ));
                }
                let set = IndexSet::explicit(entries.iter().map(|e| e.index.clone()).collect());
                let lookup = Arc::new(entries);
                let cl = lookup.clone();
                let c: Weight = Arc::new(move |n: &[i64]| {
                    cl.iter()
                        .find(|e| e.index == n)
                        .map_or(0.0, |e| e.c)
                });
                let b: Vec<Weight> = (0..m1)
                    .map(|j| {
                        let bl = lookup.clone();
                        Arc::new(move |n: &[i64]| {
                            bl.iter().find(|e| e.index == n).map_or(0.0, |e| e.b[j])
                        }) as Weight
                    })
                    .collect();
                let functional = self.functional()?;
                Ok(loaded(
                    Some(
                        SpectralModel::new(set, c, b)?
                            .with_orthogonal_images(functional == Functional::Norm),
                    ),
                    None,
                    policy,
                ))
            }
            fam @ ("S" | "RP" | "CP" | "HP" | "CaP2") => {
                let family = match fam {
                    "S" => CrossFamily::Sphere,
                    "RP" => CrossFamily::RealProjective,
                    "CP" => CrossFamily::ComplexProjective,
                    "HP" => CrossFamily::Quaternionic,
                    _ => CrossFamily::Cayley,
                };
                let b = self.dimension.unwrap_or(2);
                let space = CrossSpace::new(family, b)?;
                let k = self
                    .k
                    .as_ref()
                    .ok_or_else(|| Error::ModelSpec("field `k` is required".into()))?
                    .scalar()?;
                let r_list: Vec<f64> = self
                    .r_list
                    .as_ref()
                    .ok_or_else(|| Error::ModelSpec("field `r_list` is required".into()))?
                    .iter()
                    .map(|o| o.scalar())
                    .collect::<Result<_>>()?;
                if policy.decay.is_none() {
                    policy.decay = cross_suggested_decay(&space, k, &r_list);
                }
                Ok(loaded(Some(build_cross(&space, k, &r_list)?), None, policy))
            }
            other => Err(Error::ModelSpec(format!(
                "unknown family {other:?} (expected torus, S, RP, CP, HP, CaP2, rd or explicit)"
            ))),
        }
    }
}
