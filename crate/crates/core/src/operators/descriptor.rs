use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensor::{Shape, C64};

use super::{bernoulli_ensemble, gaussian_ensemble, Domain, Kind, LinearMeasurementOp, Matrix, Origin};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OperatorKind {
    Gaussian,
    Bernoulli,
    Identity,
    Explicit,
    RowSum,
    ColumnSum,
    PadHead,
    PadTail,
    HaarSynthesis,
}

/// JSON description from which an operator is rebuilt bit-identically.
/// Random ensembles are stored by seed; explicit matrices by their entries
/// as `[re, im]` pairs in row-major order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OperatorDescriptor {
    pub kind: OperatorKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub r: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shape: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub axis: Option<usize>,
    #[serde(default)]
    pub children: Vec<OperatorDescriptor>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub entries: Option<Vec<[f64; 2]>>,
}

impl OperatorDescriptor {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("descriptor serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    fn leaf(kind: OperatorKind, r: usize, shape: Option<Vec<usize>>) -> Self {
        OperatorDescriptor { kind, seed: None, r, shape, axis: None, children: vec![], entries: None }
    }
}

impl LinearMeasurementOp {
    pub fn descriptor(&self) -> OperatorDescriptor {
        let grid = self.input.grid().map(|s| s.dims().to_vec());
        let children = || self.children().iter().map(|c| c.descriptor()).collect();
        match &self.kind {
            Kind::Dense { matrix, origin } => {
                let (kind, seed) = match origin {
                    Origin::Gaussian(s) => (OperatorKind::Gaussian, Some(*s)),
                    Origin::Bernoulli(s) => (OperatorKind::Bernoulli, Some(*s)),
                    Origin::Explicit => (OperatorKind::Explicit, None),
                };
                let mut d = OperatorDescriptor::leaf(kind, self.rows, grid);
                d.seed = seed;
                if kind == OperatorKind::Explicit {
                    d.entries = Some(match matrix {
                        Matrix::Real(m) => m.iter().map(|&v| [v, 0.0]).collect(),
                        Matrix::Complex(m) => m.iter().map(|v| [v.re, v.im]).collect(),
                    });
                }
                d
            }
            Kind::Identity => OperatorDescriptor::leaf(OperatorKind::Identity, self.rows, grid),
            Kind::RowSum(_) => OperatorDescriptor { children: children(), ..OperatorDescriptor::leaf(OperatorKind::RowSum, self.rows, grid) },
            Kind::ColumnSum(_) => OperatorDescriptor { children: children(), ..OperatorDescriptor::leaf(OperatorKind::ColumnSum, self.rows, None) },
            Kind::PadHead { axis, .. } | Kind::PadTail { axis, .. } => {
                let kind = if matches!(self.kind, Kind::PadHead { .. }) { OperatorKind::PadHead } else { OperatorKind::PadTail };
                OperatorDescriptor { axis: Some(*axis), children: children(), ..OperatorDescriptor::leaf(kind, self.rows, grid) }
            }
            Kind::HaarSynthesis { .. } => {
                let Domain::Haar { d, n } = self.input else { unreachable!() };
                OperatorDescriptor {
                    children: children(),
                    ..OperatorDescriptor::leaf(OperatorKind::HaarSynthesis, self.rows, Some(vec![n; d]))
                }
            }
        }
    }

    pub fn from_descriptor(desc: &OperatorDescriptor) -> Result<Self> {
        let shape = || -> Result<Shape> {
            Shape::new(desc.shape.clone().ok_or_else(|| Error::Config(format!("{:?} descriptor needs a shape", desc.kind)))?)
        };
        let seed = || desc.seed.ok_or_else(|| Error::Config(format!("{:?} descriptor needs a seed", desc.kind)));
        let children = || -> Result<Vec<Arc<LinearMeasurementOp>>> {
            if desc.children.is_empty() {
                return Err(Error::Config(format!("{:?} descriptor needs children", desc.kind)));
            }
            desc.children.iter().map(|c| Self::from_descriptor(c).map(Arc::new)).collect()
        };
        let single = || -> Result<Arc<LinearMeasurementOp>> {
            let mut c = children()?;
            if c.len() != 1 {
                return Err(Error::Config(format!("{:?} descriptor needs exactly one child", desc.kind)));
            }
            Ok(c.remove(0))
        };
        let axis = || desc.axis.ok_or_else(|| Error::Config("pad descriptor needs an axis".into()));
        let op = match desc.kind {
            OperatorKind::Gaussian => gaussian_ensemble(desc.r, shape()?, seed()?)?,
            OperatorKind::Bernoulli => bernoulli_ensemble(desc.r, shape()?, seed()?)?,
            OperatorKind::Identity => Self::identity(shape()?),
            OperatorKind::Explicit => {
                let entries = desc.entries.as_ref().ok_or_else(|| Error::Config("explicit descriptor needs entries".into()))?;
                let data = entries.iter().map(|&[re, im]| C64::new(re, im)).collect();
                Self::from_matrix(Domain::Grid(shape()?), desc.r, data)?
            }
            OperatorKind::RowSum => Self::row_sum(children()?)?,
            OperatorKind::ColumnSum => Self::column_sum(children()?)?,
            OperatorKind::PadHead => Self::pad_head(single()?, axis()?)?,
            OperatorKind::PadTail => Self::pad_tail(single()?, axis()?)?,
            OperatorKind::HaarSynthesis => Self::compose_with_inverse_haar(single()?)?,
        };
        if op.rows != desc.r {
            return Err(Error::Config(format!("descriptor says r = {}, operator has {}", desc.r, op.rows)));
        }
        Ok(op)
    }
}
