//! Sequences of maps converging to a fixed map.

use std::sync::Arc;

use fluxlab_core::isotopy_engine::{integrate_flow, Hamiltonian};
use fluxlab_core::torus_maps::{compose, TorusMap};
use fluxlab_core::{GridMesh, Result};

/// Flow steps for the perturbing time-one maps. Their speeds are tiny, so
/// this is far below the RK4 error budget.
pub const PERTURBATION_STEPS: usize = 16;

/// The fixed perturbing Hamiltonian `(s/2π) sin 2πx sin 2πy`, whose flow has
/// peak speed `s`.
pub fn perturbation_hamiltonian(mesh: &GridMesh, speed: f64) -> Hamiltonian {
    Hamiltonian::cellular(mesh, speed)
}

/// `φ_i = ψ ∘ (time-one map of a_i H)`. Zero amplitudes give `ψ` itself.
///
/// Each time-one map is a Hamiltonian flow, so `φ_i` is volume-preserving
/// whenever `ψ` is, and `d₀(φ_i, ψ) ≤ Lip(ψ) a_i sup |X_H|`.
pub fn build_perturbation_sequence(psi: &TorusMap, amplitudes: &[f64], h: &Hamiltonian) -> Result<Vec<TorusMap>> {
    let mesh = *psi.mesh();
    amplitudes
        .iter()
        .map(|&a| {
            if a == 0.0 {
                return Ok(psi.clone());
            }
            let flow = integrate_flow(Arc::new(h.scaled(a)), &mesh, PERTURBATION_STEPS)?;
            compose(psi, flow.endpoint())
        })
        .collect()
}
