//! Named maps addressable from configuration.

use std::f64::consts::PI;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::TorusMap;
use crate::error::{FluxError, Result};
use crate::isotopy_engine::{integrate_flow, Hamiltonian};
use crate::mesh::GridMesh;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MapSpec {
    Identity,
    Translation { c: [f64; 2] },
    /// `(x + ε sin 2πy, y)`.
    Shear { epsilon: f64 },
    /// `(x, y + ε sin 2πx)`.
    Twist { epsilon: f64 },
    /// `(x, y + ε sin 2πy)`, not volume-preserving.
    Stretch { epsilon: f64 },
    /// Random trigonometric displacement with `sup ‖Du‖_F ≤ amplitude < 1`.
    Random { seed: u64, amplitude: f64, modes: i32 },
    /// Time-one map of a Hamiltonian flow sampled with `steps` intervals.
    Flow { hamiltonian: Hamiltonian, steps: usize },
}

impl MapSpec {
    pub fn name(&self) -> String {
        match self {
            MapSpec::Identity => "identity".into(),
            MapSpec::Translation { c } => format!("translation({}, {})", c[0], c[1]),
            MapSpec::Shear { epsilon } => format!("shear({epsilon})"),
            MapSpec::Twist { epsilon } => format!("twist({epsilon})"),
            MapSpec::Stretch { epsilon } => format!("stretch({epsilon})"),
            MapSpec::Random { seed, amplitude, modes } => format!("random({seed}, {amplitude}, {modes})"),
            MapSpec::Flow { hamiltonian, steps } => {
                format!("flow({} terms, K = {steps})", hamiltonian.terms.len())
            }
        }
    }

    /// Whether the map is volume-preserving in the continuum.
    pub fn is_volume_preserving(&self) -> bool {
        !matches!(self, MapSpec::Stretch { .. } | MapSpec::Random { .. })
    }

    pub fn build(&self, mesh: &GridMesh) -> Result<TorusMap> {
        let l = mesh.periods();
        match self {
            MapSpec::Identity => Ok(TorusMap::identity(*mesh)),
            MapSpec::Translation { c } => Ok(TorusMap::translation(*mesh, *c)),
            MapSpec::Shear { epsilon } => Ok(TorusMap::shear(*mesh, *epsilon)),
            MapSpec::Twist { epsilon } => TorusMap::from_fn(*mesh, |p| [0.0, epsilon * (2.0 * PI * p[0] / l[0]).sin()]),
            MapSpec::Stretch { epsilon } => TorusMap::from_fn(*mesh, |p| [0.0, epsilon * (2.0 * PI * p[1] / l[1]).sin()]),
            MapSpec::Random { seed, amplitude, modes } => random_map(mesh, *seed, *amplitude, *modes),
            MapSpec::Flow { hamiltonian, steps } => {
                Ok(integrate_flow(Arc::new(hamiltonian.clone()), mesh, *steps)?.endpoint().clone())
            }
        }
    }
}

fn random_map(mesh: &GridMesh, seed: u64, amplitude: f64, modes: i32) -> Result<TorusMap> {
    if !(0.0..1.0).contains(&amplitude) || modes < 1 {
        return Err(FluxError::Precondition(format!(
            "random map needs amplitude in [0, 1) and at least one mode, got {amplitude}, {modes}"
        )));
    }
    let l = mesh.periods();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // (k₀, k₁, a, phase) per displacement component
    let mut terms: [Vec<(f64, f64, f64, f64)>; 2] = [Vec::new(), Vec::new()];
    let mut grad_bound = [0.0f64; 2];
    for (r, comp) in terms.iter_mut().enumerate() {
        for k0 in -modes..=modes {
            for k1 in 0..=modes {
                if k1 == 0 && k0 <= 0 {
                    continue;
                }
                let a: f64 = rng.gen_range(-1.0..1.0);
                let phase: f64 = rng.gen_range(0.0..2.0 * PI);
                let w = [2.0 * PI * k0 as f64 / l[0], 2.0 * PI * k1 as f64 / l[1]];
                grad_bound[r] += a.abs() * w[0].hypot(w[1]);
                comp.push((w[0], w[1], a, phase));
            }
        }
    }
    let scale = amplitude / grad_bound[0].hypot(grad_bound[1]);
    TorusMap::from_fn(*mesh, |p| {
        let mut u = [0.0; 2];
        for (r, comp) in terms.iter().enumerate() {
            for &(w0, w1, a, phase) in comp {
                u[r] += scale * a * (w0 * p[0] + w1 * p[1] + phase).sin();
            }
        }
        u
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalog_maps_build_and_round_trip() {
        let mesh = GridMesh::unit(32).unwrap();
        let specs = vec![
            MapSpec::Identity,
            MapSpec::Translation { c: [0.25, -0.1] },
            MapSpec::Shear { epsilon: 0.1 },
            MapSpec::Twist { epsilon: 0.1 },
            MapSpec::Stretch { epsilon: 0.1 },
            MapSpec::Random { seed: 3, amplitude: 0.5, modes: 2 },
            MapSpec::Flow { hamiltonian: Hamiltonian::cellular(&mesh, 0.05), steps: 16 },
        ];
        for s in &specs {
            let m = s.build(&mesh).unwrap();
            assert_eq!(m.is_volume_preserving(), s.is_volume_preserving(), "{}", s.name());
            let json = serde_json::to_string(s).unwrap();
            assert_eq!(&serde_json::from_str::<MapSpec>(&json).unwrap(), s);
        }
        let twist = MapSpec::Twist { epsilon: 0.1 }.build(&mesh).unwrap();
        let q = twist.evaluate([0.25, 0.0]);
        assert!((q[1] - 0.1).abs() < 1e-14);
        assert!(MapSpec::Random { seed: 1, amplitude: 1.5, modes: 2 }.build(&mesh).is_err());
    }
}
