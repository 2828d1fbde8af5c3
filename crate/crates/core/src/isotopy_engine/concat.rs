use serde::{Deserialize, Serialize};

use super::Isotopy;
use crate::error::{FluxError, Result};
use crate::exterior_calculus::{ScalarField, VectorField};
use crate::torus_maps::{self, Interpolation, Resampler};

/// A smooth step `u : [0,1] → [0,1]`, identically 0 on `[0, δ]` and 1 on
/// `[1-δ, 1]`: the regularized incomplete beta function `I_s(p+1, p+1)` of
/// the rescaled time `s = (τ - δ)/(1 - 2δ)`.
///
/// It is `C^p` rather than `C^∞`, which keeps it resolvable at modest `K`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BumpProfile {
    pub delta: f64,
    pub order: u32,
}

impl Default for BumpProfile {
    fn default() -> Self {
        Self { delta: 0.125, order: 8 }
    }
}

fn binomial(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

impl BumpProfile {
    pub fn new(delta: f64, order: u32) -> Result<Self> {
        if !(delta > 0.0 && delta <= 0.125) || order == 0 {
            return Err(FluxError::Precondition(format!(
                "bump margin {delta} must lie in (0, 1/8] and the order must be positive"
            )));
        }
        Ok(Self { delta, order })
    }

    fn rescaled(&self, tau: f64) -> f64 {
        ((tau - self.delta) / (1.0 - 2.0 * self.delta)).clamp(0.0, 1.0)
    }

    pub fn value(&self, tau: f64) -> f64 {
        let s = self.rescaled(tau);
        if s == 0.0 || s == 1.0 {
            return s;
        }
        let a = self.order + 1;
        let n = 2 * a - 1;
        // I_s(a, a) = 1 - I_{1-s}(a, a); sum the small tail for accuracy
        let tail = |x: f64| -> f64 {
            (a..=n)
                .map(|j| binomial(n, j) * x.powi(j as i32) * (1.0 - x).powi((n - j) as i32))
                .sum()
        };
        if s <= 0.5 {
            tail(s).clamp(0.0, 1.0)
        } else {
            (1.0 - tail(1.0 - s)).clamp(0.0, 1.0)
        }
    }

    pub fn derivative(&self, tau: f64) -> f64 {
        let s = self.rescaled(tau);
        if s == 0.0 || s == 1.0 {
            return 0.0;
        }
        let p = self.order;
        let inv_beta = (2 * p + 1) as f64 * binomial(2 * p, p);
        inv_beta * (s * (1.0 - s)).powi(p as i32) / (1.0 - 2.0 * self.delta)
    }
}

/// `A` run on `[0, 1/2]` at speed `λ(s) = u(2s)`, then `A(1)∘B` on `[1/2, 1]`
/// at speed `τ(s) = u(2s - 1)`; sampled with `K = 2 max(K_A, K_B)`.
pub fn concat_reparam(a: &Isotopy, b: &Isotopy, u: BumpProfile) -> Result<Isotopy> {
    if a.mesh() != b.mesh() {
        return Err(FluxError::MeshMismatch("concatenated paths live on different meshes".into()));
    }
    let mesh = *a.mesh();
    let k = 2 * a.k().max(b.k());
    let a1 = a.endpoint();
    let jac = Resampler::new(
        Interpolation::Trigonometric,
        &[a1.jacobian(0, 0), a1.jacobian(0, 1), a1.jacobian(1, 0), a1.jacobian(1, 1)],
    );
    let mut maps = Vec::with_capacity(k + 1);
    let mut vel = Vec::with_capacity(k + 1);
    for j in 0..=k {
        let s = j as f64 / k as f64;
        if 2 * j <= k {
            let lam = u.value(2.0 * s);
            let speed = 2.0 * u.derivative(2.0 * s);
            let (m, v) = a.sample_at(lam)?;
            maps.push(m);
            vel.push(if speed == 0.0 {
                VectorField::zeros(mesh)
            } else {
                VectorField::new(v.component(0) * speed, v.component(1) * speed)?
            });
        } else {
            let tau = u.value(2.0 * s - 1.0);
            let speed = 2.0 * u.derivative(2.0 * s - 1.0);
            if tau == 0.0 {
                maps.push(a1.clone());
                vel.push(VectorField::zeros(mesh));
                continue;
            }
            let (mb, vb) = b.sample_at(tau)?;
            if speed == 0.0 {
                vel.push(VectorField::zeros(mesh));
            } else {
                let d = jac.resample(&mesh, &mb.grid_images());
                let (mut w0, mut w1) = (Vec::with_capacity(mesh.len()), Vec::with_capacity(mesh.len()));
                for idx in 0..mesh.len() {
                    let x = vb.at_index(idx);
                    let dv = |r: usize| d[r].values()[idx];
                    w0.push(speed * (dv(0) * x[0] + dv(1) * x[1]));
                    w1.push(speed * (dv(2) * x[0] + dv(3) * x[1]));
                }
                vel.push(VectorField::new(ScalarField::new(mesh, w0)?, ScalarField::new(mesh, w1)?)?);
            }
            maps.push(torus_maps::compose(a1, &mb)?);
        }
    }
    Isotopy::from_maps(maps)?.with_velocity(vel)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exterior_calculus::TwoForm;
    use crate::isotopy_engine::{integrate_flow, symplectic_flux, velocity_field, ConstantFlow, Hamiltonian, SumFlow};
    use crate::mesh::GridMesh;
    use crate::torus_maps::TorusMap;
    use std::sync::Arc;

    #[test]
    fn bump_is_flat_and_monotone() {
        let u = BumpProfile::default();
        assert_eq!(u.value(0.0), 0.0);
        assert_eq!(u.value(0.1), 0.0);
        assert_eq!(u.value(0.9), 1.0);
        assert_eq!(u.derivative(0.95), 0.0);
        assert!((u.value(0.5) - 0.5).abs() < 1e-14);
        let mut prev = 0.0;
        let n = 4000;
        let mut integral = 0.0;
        for i in 1..=n {
            let t = i as f64 / n as f64;
            let v = u.value(t);
            assert!(v >= prev);
            prev = v;
            integral += u.derivative(t - 0.5 / n as f64) / n as f64;
        }
        assert!((integral - 1.0).abs() < 1e-6);
        assert!(BumpProfile::new(0.2, 8).is_err());
    }

    #[test]
    fn concatenation_adds_fluxes_and_is_flat_at_the_seams() {
        let mesh = GridMesh::unit(64).unwrap();
        let omega = TwoForm::area(mesh);
        let a = integrate_flow(
            Arc::new(SumFlow(vec![Arc::new(Hamiltonian::wobble(&mesh, 0.05)), Arc::new(ConstantFlow([0.1, 0.2]))])),
            &mesh,
            64,
        )
        .unwrap();
        let b = integrate_flow(
            Arc::new(SumFlow(vec![Arc::new(Hamiltonian::twist(&mesh, 0.3)), Arc::new(ConstantFlow([-0.05, 0.3]))])),
            &mesh,
            64,
        )
        .unwrap();
        let u = BumpProfile::default();
        let c = concat_reparam(&a, &b, u).unwrap();
        assert_eq!(c.k(), 128);
        let fa = symplectic_flux(&a, &omega).unwrap();
        let fb = symplectic_flux(&b, &omega).unwrap();
        let fc = symplectic_flux(&c, &omega).unwrap();
        assert!(fc.sub(&fa.add(&fb)).max_abs() < 1e-8, "{fc:?} vs {fa:?} + {fb:?}");
        let end = torus_maps::compose(a.endpoint(), b.endpoint()).unwrap();
        assert!(torus_maps::forward_distance(c.endpoint(), &end) < 1e-10);
        let x = velocity_field(&c).unwrap();
        for j in 56..=72 {
            assert!(x.sample(j).sup_norm() <= 1e-8, "sample {j}");
        }
        assert!(x.sample(0).sup_norm() == 0.0 && x.sample(128).sup_norm() == 0.0);
    }

    #[test]
    fn inverse_then_path_returns_home() {
        let mesh = GridMesh::unit(32).unwrap();
        let phi = integrate_flow(Arc::new(Hamiltonian::cellular(&mesh, 0.05)), &mesh, 16).unwrap();
        let c = concat_reparam(&phi.inverse_path().unwrap(), &phi, BumpProfile::default()).unwrap();
        assert!(torus_maps::forward_distance(c.endpoint(), &TorusMap::identity(mesh)) < 1e-9);
    }
}
