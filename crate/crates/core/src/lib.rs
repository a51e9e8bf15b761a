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

//! Certification of the dimensionality of genuine multipartite entanglement
//! (GME-dimension) for n-qudit states.
//!
//! Three families of criteria are provided: fidelity bounds, two-basis
//! witnesses for GHZ and linear cluster states, and convex relaxations
//! (an SDP with the generalised reduction map, its reduction to an LP in a
//! state-diagonal frame, and a statistics-only variant).

pub mod cli;
pub mod config;
pub mod error;
pub mod oracles;
pub mod relax;
pub mod states;
pub mod tensor;
pub mod witness;

pub use config::Tolerances;
pub use error::{Error, Result};
