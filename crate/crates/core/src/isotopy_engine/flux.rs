use super::Isotopy;
use crate::error::{FluxError, Result};
use crate::exterior_calculus::{
    periods, CohomologyClass1, HomologyClass1, OneForm, ScalarField, TwoForm, VectorField,
};
use crate::quad;
use crate::torus_maps::pullback_scalar;

/// `φ_j*(i_{X_j} ρ dx∧dy) = J_jᵀ ρ(φ_j) (-V¹, V⁰)` with `V` the Lagrangian velocity.
fn pulled_contraction(phi: &Isotopy, j: usize, rho: &ScalarField, uniform: bool) -> OneForm {
    let mesh = *phi.mesh();
    let m = phi.map(j);
    let v: VectorField = phi.lagrangian_velocity(j);
    let r = if uniform { rho.clone() } else { pullback_scalar(m, rho) };
    let mut s0 = Vec::with_capacity(mesh.len());
    let mut s1 = Vec::with_capacity(mesh.len());
    for k in 0..mesh.len() {
        let jm = m.jacobian_at_index(k);
        let x = v.at_index(k);
        let rk = r.values()[k];
        let a = [-rk * x[1], rk * x[0]];
        s0.push(jm[0][0] * a[0] + jm[1][0] * a[1]);
        s1.push(jm[0][1] * a[0] + jm[1][1] * a[1]);
    }
    OneForm::new(ScalarField::new(mesh, s0).unwrap(), ScalarField::new(mesh, s1).unwrap()).unwrap()
}

fn integrate(phi: &Isotopy, form: &TwoForm) -> Result<OneForm> {
    let mesh = *phi.mesh();
    if form.mesh() != &mesh {
        return Err(FluxError::MeshMismatch("form and isotopy live on different meshes".into()));
    }
    let uniform = form.is_uniform();
    let k = phi.k();
    let w = quad::simpson_weights(k, phi.dt());
    let mut acc = [vec![0.0; mesh.len()], vec![0.0; mesh.len()]];
    let mut worst = (0usize, 0.0f64);
    let mut failed = false;
    for j in 0..=k {
        let s = pulled_contraction(phi, j, form.density(), uniform);
        let res = s.closedness_residual();
        if res > worst.1 {
            worst = (j, res);
        }
        // σ_j is a pull-back, which is allowed ten times the closedness slack
        if res > 10.0 * s.closed_tolerance() {
            failed = true;
        }
        for c in 0..2 {
            for (a, v) in acc[c].iter_mut().zip(s.component(c).values()) {
                *a += w[j] * v;
            }
        }
    }
    if failed {
        return Err(FluxError::NotSymplectic { sample: worst.0, residual: worst.1 });
    }
    let [a0, a1] = acc;
    OneForm::new(ScalarField::new(mesh, a0)?, ScalarField::new(mesh, a1)?)
}

/// `Σ(Φ) = ∫₀¹ φ_t*(i_{φ̇_t} ω) dt` as a form (composite Simpson in time).
pub fn flux_form(phi: &Isotopy, omega: &TwoForm) -> Result<OneForm> {
    integrate(phi, omega)
}

/// Periods of [`flux_form`].
pub fn symplectic_flux(phi: &Isotopy, omega: &TwoForm) -> Result<CohomologyClass1> {
    periods(&integrate(phi, omega)?)
}

/// The same integral with the volume form; on a surface it coincides with
/// the symplectic flux.
pub fn volume_flux(phi: &Isotopy, big_omega: &TwoForm) -> Result<CohomologyClass1> {
    phi.require_volume_preserving()?;
    periods(&integrate(phi, big_omega)?)
}

/// `∫_M (lift of x_k∘φ_1 - x_k) dμ` per axis, lifting continuously in time.
pub fn fathi_mass_flow(phi: &Isotopy) -> Result<HomologyClass1> {
    phi.require_volume_preserving()?;
    let track = phi.lift_track()?;
    Ok(HomologyClass1 {
        components: [track.endpoint[0].integral(), track.endpoint[1].integral()],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::isotopy_engine::{integrate_flow, Hamiltonian};
    use crate::mesh::GridMesh;
    use std::sync::Arc;

    #[test]
    fn translation_flux_and_mass_flow() {
        let mesh = GridMesh::unit(16).unwrap();
        let omega = TwoForm::area(mesh);
        let iso = Isotopy::translation(mesh, [0.3, -0.7], 16);
        let p = symplectic_flux(&iso, &omega).unwrap().periods;
        assert!((p[0] - 0.7).abs() < 1e-12 && (p[1] - 0.3).abs() < 1e-12);
        let m = fathi_mass_flow(&iso).unwrap().components;
        assert!((m[0] - 0.3).abs() < 1e-12 && (m[1] + 0.7).abs() < 1e-12);
        // (m₁, m₂) = (p₂, -p₁)
        assert!((m[0] - p[1]).abs() < 1e-12 && (m[1] + p[0]).abs() < 1e-12);
    }

    #[test]
    fn hamiltonian_flux_vanishes() {
        let mesh = GridMesh::unit(64).unwrap();
        let omega = TwoForm::area(mesh);
        let iso = integrate_flow(Arc::new(Hamiltonian::wobble(&mesh, 0.05)), &mesh, 16).unwrap();
        assert!(symplectic_flux(&iso, &omega).unwrap().max_abs() < 1e-12);
        let v = volume_flux(&iso, &omega).unwrap();
        assert!(v.max_abs() < 1e-12);
    }

    #[test]
    fn stretching_path_is_rejected() {
        let mesh = GridMesh::unit(32).unwrap();
        let maps = (0..=16)
            .map(|j| {
                let t = j as f64 / 16.0;
                crate::torus_maps::TorusMap::from_fn(mesh, |p| [0.05 * t * (2.0 * std::f64::consts::PI * p[0]).sin(), 0.0])
                    .unwrap()
            })
            .collect();
        let iso = Isotopy::from_maps(maps).unwrap();
        let omega = TwoForm::area(mesh);
        assert!(matches!(symplectic_flux(&iso, &omega), Err(FluxError::NotSymplectic { .. })));
        assert!(matches!(volume_flux(&iso, &omega), Err(FluxError::NotVolumePreserving { .. })));
        assert!(matches!(fathi_mass_flow(&iso), Err(FluxError::NotVolumePreserving { .. })));
    }
}
