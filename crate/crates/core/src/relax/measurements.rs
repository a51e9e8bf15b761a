/*
Copyright 2026 The gmedim Authors

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
*/

//! Global product measurements whose statistics constrain the relaxation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::states::{mub_basis, BasisFamily};
use crate::tensor::{CMatrix, RegisterShape};
use crate::witness::product_vectors;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MeasurementLabel {
    /// Computational basis on every particle.
    EC,
    /// Fourier basis on every particle.
    EF,
    /// Every MUB-index tuple (j₁, …, jₙ) with j₁ + … + jₙ ≡ 0 mod d.
    EM,
    Custom,
}

impl MeasurementLabel {
    pub fn parse(text: &str) -> Result<Self> {
        match text.trim().to_ascii_uppercase().replace('_', "").as_str() {
            "EC" => Ok(MeasurementLabel::EC),
            "EF" => Ok(MeasurementLabel::EF),
            "EM" => Ok(MeasurementLabel::EM),
            other => Err(Error::Config(format!("unknown measurement set '{other}' (expected EC, EF or EM)"))),
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            MeasurementLabel::EC => "E_C",
            MeasurementLabel::EF => "E_F",
            MeasurementLabel::EM => "E_M",
            MeasurementLabel::Custom => "custom",
        }
    }
}

/// Rank-one product projectors, stored as the columns of `vectors`.
#[derive(Debug, Clone)]
pub struct MeasurementSet {
    label: MeasurementLabel,
    shape: RegisterShape,
    vectors: CMatrix,
}

impl MeasurementSet {
    pub fn label(&self) -> MeasurementLabel {
        self.label
    }

    pub fn shape(&self) -> RegisterShape {
        self.shape
    }

    /// Column i is the product vector of projector i.
    pub fn vectors(&self) -> &CMatrix {
        &self.vectors
    }

    pub fn len(&self) -> usize {
        self.vectors.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.ncols() == 0
    }

    /// All outcomes of one product measurement per MUB-index tuple.
    pub fn from_mub_tuples(shape: RegisterShape, tuples: &[Vec<usize>]) -> Result<Self> {
        let d = shape.d();
        let mut cols = Vec::new();
        for js in tuples {
            if js.len() != shape.n() {
                return Err(Error::DimensionMismatch { expected: shape.n(), got: js.len() });
            }
            let bases = js.iter().map(|&j| mub_basis(d, j)).collect::<Result<Vec<_>>>()?;
            let refs: Vec<&BasisFamily> = bases.iter().collect();
            cols.push(product_vectors(&refs));
        }
        Ok(MeasurementSet { label: MeasurementLabel::Custom, shape, vectors: hstack(shape.dim(), &cols) })
    }
}

fn hstack(rows: usize, parts: &[CMatrix]) -> CMatrix {
    let cols: usize = parts.iter().map(|p| p.ncols()).sum();
    let mut out = CMatrix::zeros(rows, cols);
    let mut at = 0;
    for p in parts {
        out.columns_mut(at, p.ncols()).copy_from(p);
        at += p.ncols();
    }
    out
}

fn is_prime(d: usize) -> bool {
    d >= 2 && (2..).take_while(|k| k * k <= d).all(|k| !d.is_multiple_of(k))
}

pub fn build_measurement_set(label: MeasurementLabel, shape: RegisterShape) -> Result<MeasurementSet> {
    let (n, d) = (shape.n(), shape.d());
    let vectors = match label {
        MeasurementLabel::EC => product_vectors(&vec![&BasisFamily::computational(d); n]),
        MeasurementLabel::EF => product_vectors(&vec![&BasisFamily::fourier(d); n]),
        MeasurementLabel::EM => {
            if d % 2 == 0 || !is_prime(d) {
                return Err(Error::Unsupported(format!("E_M needs an odd prime local dimension, got d = {d}")));
            }
            let tuples: Vec<Vec<usize>> =
                (0..shape.dim()).map(|t| shape.digits(t)).filter(|js| js.iter().sum::<usize>() % d == 0).collect();
            MeasurementSet::from_mub_tuples(shape, &tuples)?.vectors
        }
        MeasurementLabel::Custom => {
            return Err(Error::Config("custom sets are built with MeasurementSet::from_mub_tuples".into()))
        }
    };
    Ok(MeasurementSet { label, shape, vectors })
}
