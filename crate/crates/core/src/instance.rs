//! Problem instances: index set, target moments, support, weight and
//! numeric tolerances, plus the JSON file format.

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::index::{IndexSet, IndexSetError, MultiIndex};
use crate::moments::{MomentError, MomentSpec};
use crate::scalar::Real;
use crate::support::{SupportError, SupportRegion};
use crate::weight::{ReferenceWeight, WeightError};

#[derive(Debug, Error)]
pub enum InstanceError {
    #[error("field `indices`: {0}")]
    IndexSet(#[from] IndexSetError),
    #[error("field `g`: {0}")]
    Moments(#[from] MomentError),
    #[error("field `support`: {0}")]
    Support(#[from] SupportError),
    #[error("field `rho`: {0}")]
    Weight(#[from] WeightError),
    #[error("support dimension {0} does not match index dimension {1}")]
    SupportDimensionMismatch(usize, usize),
    #[error("field `n` = {0} does not match index dimension {1}")]
    DeclaredDimensionMismatch(usize, usize),
    #[error("field `tol`: {0} must be strictly positive")]
    NonPositiveTolerance(&'static str),
    #[error("JSON parse error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("index entry {0:?} is negative")]
    NegativeExponent(i64),
}

/// Numeric tolerances for a solve.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerances<S> {
    /// Relative tolerance for adaptive quadrature.
    pub quad_rel: S,
    /// Infinity-norm gradient tolerance for stationarity.
    pub grad: S,
    /// Newton iteration cap.
    pub max_iter: usize,
}

impl<S: Real> Default for Tolerances<S> {
    fn default() -> Self {
        Tolerances { quad_rel: S::of(1e-10), grad: S::of(1e-8), max_iter: 400 }
    }
}

/// A validated instance of the feasibility problem.
#[derive(Clone, Debug)]
pub struct ProblemInstance<S> {
    index_set: Arc<IndexSet>,
    moments: MomentSpec<S>,
    support: SupportRegion<S>,
    weight: ReferenceWeight<S>,
    tolerances: Tolerances<S>,
}

impl<S: Real> ProblemInstance<S> {
    pub fn new(
        moments: MomentSpec<S>,
        support: SupportRegion<S>,
        weight: ReferenceWeight<S>,
        tolerances: Tolerances<S>,
    ) -> Result<Self, InstanceError> {
        let index_set = moments.index_set().clone();
        if support.dim() != index_set.dim() {
            return Err(InstanceError::SupportDimensionMismatch(
                support.dim(),
                index_set.dim(),
            ));
        }
        weight.validate(index_set.dim(), index_set.half_degree(), support.is_bounded())?;
        if !(tolerances.quad_rel > S::zero()) {
            return Err(InstanceError::NonPositiveTolerance("quad_rel"));
        }
        if !(tolerances.grad > S::zero()) {
            return Err(InstanceError::NonPositiveTolerance("grad"));
        }
        Ok(ProblemInstance { index_set, moments, support, weight, tolerances })
    }

    pub fn index_set(&self) -> &Arc<IndexSet> {
        &self.index_set
    }

    pub fn moments(&self) -> &MomentSpec<S> {
        &self.moments
    }

    pub fn support(&self) -> &SupportRegion<S> {
        &self.support
    }

    pub fn weight(&self) -> &ReferenceWeight<S> {
        &self.weight
    }

    pub fn tolerances(&self) -> &Tolerances<S> {
        &self.tolerances
    }

    pub fn dim(&self) -> usize {
        self.index_set.dim()
    }

    /// Same instance with the target moments replaced (index set shared).
    pub fn with_moments(&self, values: Vec<S>) -> Result<Self, InstanceError> {
        let moments = MomentSpec::from_ordered(self.index_set.clone(), values)?;
        Ok(ProblemInstance { moments, ..self.clone() })
    }

    pub fn with_tolerances(&self, tolerances: Tolerances<S>) -> Self {
        ProblemInstance { tolerances, ..self.clone() }
    }

    pub fn from_json(text: &str) -> Result<Self, InstanceError> {
        let file: InstanceFile = serde_json::from_str(text)?;
        file.build()
    }

    pub fn to_json(&self) -> String {
        InstanceFile::from_instance(self).to_string()
    }
}

/// On-disk instance schema. Reals are IEEE doubles; bit-exactness of the
/// text form is not required.
#[derive(Serialize, Deserialize, Debug, Clone)]
pub struct InstanceFile {
    pub n: usize,
    pub indices: Vec<Vec<i64>>,
    pub g: Vec<f64>,
    pub support: SupportFile,
    pub rho: RhoFile,
    #[serde(default)]
    pub tol: TolFile,
}

#[derive(Serialize, Deserialize, Debug, Clone)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SupportFile {
    FullSpace,
    Orthant,
    Box { lo: Vec<f64>, hi: Vec<f64> },
    Ball { radius: f64 },
    HalfSpaces { normals: Vec<Vec<f64>>, offsets: Vec<f64>, interior_point: Vec<f64> },
}

#[derive(Serialize, Deserialize, Debug, Clone)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RhoFile {
    /// `exp(-||t||^{2k})` with `k` taken from the index set.
    ExpNorm,
    /// `exp(-sum_l scale_l |t_l|^p)`; scales default to 1.
    ExpPower { p: u32, #[serde(default)] scales: Option<Vec<f64>> },
    Constant,
}

#[derive(Serialize, Deserialize, Debug, Clone, Copy)]
pub struct TolFile {
    pub quad_rel: f64,
    pub grad: f64,
    pub max_iter: usize,
}

impl Default for TolFile {
    fn default() -> Self {
        let t: Tolerances<f64> = Tolerances::default();
        TolFile { quad_rel: t.quad_rel, grad: t.grad, max_iter: t.max_iter }
    }
}

impl InstanceFile {
    pub fn build<S: Real>(&self) -> Result<ProblemInstance<S>, InstanceError> {
        let mut indices = Vec::with_capacity(self.indices.len());
        for raw in &self.indices {
            let mut entries = Vec::with_capacity(raw.len());
            for &e in raw {
                if e < 0 {
                    return Err(InstanceError::NegativeExponent(e));
                }
                entries.push(e as u32);
            }
            indices.push(MultiIndex::new(entries));
        }
        let index_set = Arc::new(IndexSet::validate(indices)?);
        if index_set.dim() != self.n {
            return Err(InstanceError::DeclaredDimensionMismatch(self.n, index_set.dim()));
        }

        // `g` is aligned with the file's `indices` order, which may differ
        // from the canonical ordering; re-associate by index.
        let mut map = std::collections::BTreeMap::new();
        if self.g.len() != self.indices.len() {
            return Err(MomentError::LengthMismatch(self.g.len(), self.indices.len()).into());
        }
        for (raw, &v) in self.indices.iter().zip(&self.g) {
            let entries: Vec<u32> = raw.iter().map(|&e| e as u32).collect();
            map.insert(MultiIndex::new(entries), S::of(v));
        }
        let moments = MomentSpec::from_map(index_set.clone(), &map)?;

        let support: SupportRegion<S> = match &self.support {
            SupportFile::FullSpace => SupportRegion::full_space(self.n)?,
            SupportFile::Orthant => SupportRegion::orthant(self.n)?,
            SupportFile::Box { lo, hi } => SupportRegion::hyper_box(
                lo.iter().map(|&x| S::of(x)).collect(),
                hi.iter().map(|&x| S::of(x)).collect(),
            )?,
            SupportFile::Ball { radius } => SupportRegion::ball(self.n, S::of(*radius))?,
            SupportFile::HalfSpaces { normals, offsets, interior_point } => {
                SupportRegion::half_spaces(
                    normals
                        .iter()
                        .map(|row| row.iter().map(|&x| S::of(x)).collect())
                        .collect(),
                    offsets.iter().map(|&x| S::of(x)).collect(),
                    interior_point.iter().map(|&x| S::of(x)).collect(),
                )?
            }
        };

        let weight: ReferenceWeight<S> = match &self.rho {
            RhoFile::ExpNorm => {
                ReferenceWeight::NormPower { half_degree: index_set.half_degree() }
            }
            RhoFile::ExpPower { p, scales } => ReferenceWeight::CoordPower {
                p: *p,
                scales: match scales {
                    Some(s) => s.iter().map(|&x| S::of(x)).collect(),
                    None => vec![S::one(); self.n],
                },
            },
            RhoFile::Constant => ReferenceWeight::Constant,
        };

        let tolerances = Tolerances {
            quad_rel: S::of(self.tol.quad_rel),
            grad: S::of(self.tol.grad),
            max_iter: self.tol.max_iter,
        };

        ProblemInstance::new(moments, support, weight, tolerances)
    }

    pub fn from_instance<S: Real>(inst: &ProblemInstance<S>) -> Self {
        let index_set = inst.index_set();
        let indices: Vec<Vec<i64>> = index_set
            .indices()
            .iter()
            .map(|i| i.entries().iter().map(|&e| e as i64).collect())
            .collect();
        let g: Vec<f64> = inst.moments().values().iter().map(|v| v.f64()).collect();
        let support = match inst.support() {
            SupportRegion::FullSpace { .. } => SupportFile::FullSpace,
            SupportRegion::Orthant { .. } => SupportFile::Orthant,
            SupportRegion::Box { lo, hi } => SupportFile::Box {
                lo: lo.iter().map(|v| v.f64()).collect(),
                hi: hi.iter().map(|v| v.f64()).collect(),
            },
            SupportRegion::Ball { radius, .. } => SupportFile::Ball { radius: radius.f64() },
            SupportRegion::HalfSpaces { normals, offsets, interior } => {
                SupportFile::HalfSpaces {
                    normals: normals
                        .iter()
                        .map(|row| row.iter().map(|v| v.f64()).collect())
                        .collect(),
                    offsets: offsets.iter().map(|v| v.f64()).collect(),
                    interior_point: interior.iter().map(|v| v.f64()).collect(),
                }
            }
        };
        let rho = match inst.weight() {
            ReferenceWeight::NormPower { .. } => RhoFile::ExpNorm,
            ReferenceWeight::CoordPower { p, scales } => RhoFile::ExpPower {
                p: *p,
                scales: Some(scales.iter().map(|v| v.f64()).collect()),
            },
            ReferenceWeight::Constant => RhoFile::Constant,
        };
        let t = inst.tolerances();
        InstanceFile {
            n: inst.dim(),
            indices,
            g,
            support,
            rho,
            tol: TolFile { quad_rel: t.quad_rel.f64(), grad: t.grad.f64(), max_iter: t.max_iter },
        }
    }

    pub fn to_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("instance schema serializes")
    }
}
