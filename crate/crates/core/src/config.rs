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

//! Numerical contract shared by constructors, solvers and tests.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerances and budgets. A key-value (TOML) file may override any subset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Max-abs elementwise deviation from Hermiticity.
    pub hermitian: f64,
    /// Deviation of a density matrix trace from one.
    pub trace: f64,
    /// Most negative eigenvalue accepted as positive semidefinite.
    pub psd: f64,
    /// Deviation of a pure-state norm from one.
    pub norm: f64,
    /// Gram / unitarity deviation for constructed bases.
    pub unitary: f64,
    /// Feasibility tolerance of the interior-point LP.
    pub lp_feasibility: f64,
    pub lp_max_iter: usize,
    /// Max-abs residual at which the ADMM subsolver declares feasibility.
    pub sdp_feasibility: f64,
    pub bisection_width: f64,
    pub admm_max_iter: usize,
    /// Largest d^n accepted by any constructor.
    pub max_dim: usize,
    /// Largest d^n accepted by the full-matrix SDP path.
    pub sdp_max_dim: usize,
    /// Largest d for which the ten-basis spectrum is checked by default.
    pub tenbasis_spectrum_max_d: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            hermitian: 1e-12,
            trace: 1e-10,
            psd: 1e-10,
            norm: 1e-12,
            unitary: 1e-10,
            lp_feasibility: 1e-9,
            lp_max_iter: 100,
            sdp_feasibility: 1e-6,
            bisection_width: 5e-4,
            admm_max_iter: 20_000,
            max_dim: 1 << 20,
            sdp_max_dim: 256,
            tenbasis_spectrum_max_d: 7,
        }
    }
}

impl Tolerances {
    pub fn from_toml(text: &str) -> Result<Self> {
        let tol: Tolerances = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        tol.validate()?;
        Ok(tol)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("hermitian", self.hermitian),
            ("trace", self.trace),
            ("psd", self.psd),
            ("norm", self.norm),
            ("unitary", self.unitary),
            ("lp_feasibility", self.lp_feasibility),
            ("sdp_feasibility", self.sdp_feasibility),
            ("bisection_width", self.bisection_width),
        ];
        for (name, value) in positive {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::Config(format!("{name} must be a positive number")));
            }
        }
        if self.bisection_width >= 1.0 {
            return Err(Error::Config("bisection_width must be below 1".into()));
        }
        if self.lp_max_iter == 0 || self.admm_max_iter == 0 {
            return Err(Error::Config("iteration limits must be positive".into()));
        }
        if self.max_dim < 4 || self.sdp_max_dim < 4 {
            return Err(Error::Config("dimension limits must be at least 4".into()));
        }
        Ok(())
    }
}
