//! Displacement potentials `ν`, the functional `Δ`, the sampled norm
//! `‖·‖^∞` and the displacement-energy constructions built on it.
//!
//! `ν^{ψ,α}_p(z)` is read off the Hodge potential of `ψ*α - α`, so it does not
//! depend on the path from `p` to `z`.

mod energy;
mod norm;

pub use energy::{
    commutator, commutator_collapse_check, displacement_energy_upper, displaces, energy_chain_check,
    rigidity_limit_check, supported_commutator_pair, CommutatorPair, EnergyChain, EnergyUpper,
    RigidityReport, RigidityRow,
};
pub use norm::{
    conjugation_check, norm_axiom_report, psi_norm, Axiom, AxiomCheck, AxiomReport, AxiomSlack,
    ConjugationReport, Direction, DisplacementReport, DisplacementSummary, Sandwich, SampleKind, SampleRow, SamplerMeta,
    UnitSphereSampler,
};

use crate::error::{FluxError, Result};
use crate::exterior_calculus::{hodge_decompose, l2_norm, periods_unchecked, OneForm, ScalarField, TwoForm};
use crate::isotopy_engine::{flux_form, orbit_integral, Isotopy};
use crate::mesh::Point;
use crate::spectral::TrigSeries;
use crate::torus_maps::{forward_distance, pullback_oneform, TorusMap};

/// Largest period of `ψ*α - α` accepted as "isotopic to the identity".
pub const TOL_PERIODS: f64 = 1e-6;

fn require_closed(alpha: &OneForm) -> Result<()> {
    let residual = alpha.closedness_residual();
    let tolerance = alpha.closed_tolerance();
    if residual > tolerance {
        return Err(FluxError::NotClosed { residual, tolerance });
    }
    Ok(())
}

/// Zero-mean potential `P` with `dP = ψ*α - α`.
pub fn displacement_potential(psi: &TorusMap, alpha: &OneForm) -> Result<ScalarField> {
    if psi.mesh() != alpha.mesh() {
        return Err(FluxError::MeshMismatch("map and form live on different meshes".into()));
    }
    require_closed(alpha)?;
    let beta = &pullback_oneform(psi, alpha) - alpha;
    let p = periods_unchecked(&beta).periods;
    if p[0].abs().max(p[1].abs()) > TOL_PERIODS {
        return Err(FluxError::NonzeroPeriods { p0: p[0], p1: p[1] });
    }
    Ok(hodge_decompose(&beta).potential)
}

fn value_at(f: &ScalarField, p: Point) -> f64 {
    TrigSeries::new(f.values(), f.mesh()).eval(p)
}

/// `ν^{ψ,α}_p = P - P(p)`.
pub fn nu_function(psi: &TorusMap, alpha: &OneForm, p: Point) -> Result<ScalarField> {
    let pot = displacement_potential(psi, alpha)?;
    let base = value_at(&pot, p);
    Ok(pot.map(|v| v - base))
}

/// `Δ(ψ, α)_p = ∫ ν Ω / ‖α‖`, and `0` for `α = 0`.
pub fn delta(psi: &TorusMap, alpha: &OneForm, p: Point) -> Result<f64> {
    Ok(delta_at(psi, alpha, &[p])?[0])
}

/// [`delta`] at several base points, sharing one potential.
pub fn delta_at(psi: &TorusMap, alpha: &OneForm, points: &[Point]) -> Result<Vec<f64>> {
    let norm = l2_norm(alpha);
    if norm == 0.0 {
        return Ok(vec![0.0; points.len()]);
    }
    let pot = displacement_potential(psi, alpha)?;
    let vol = psi.mesh().volume();
    let mean = pot.mean();
    let series = TrigSeries::new(pot.values(), pot.mesh());
    Ok(points.iter().map(|&p| vol * (mean - series.eval(p)) / norm).collect())
}

/// `Δ̃(ψ, α)_z = ‖α‖ Δ(ψ, α)_z` for every grid point `z`.
pub fn delta_tilde_field(psi: &TorusMap, alpha: &OneForm) -> Result<ScalarField> {
    let pot = displacement_potential(psi, alpha)?;
    let vol = psi.mesh().volume();
    let mean = pot.mean();
    Ok(pot.map(|v| vol * (mean - v)))
}

/// `Δ` from an isotopy ending at `ψ`: `(∫ α ∧ Σ(Φ) - Vol ∫_{𝒪_x} α) / ‖α‖`.
pub fn delta_via_flux(psi: &TorusMap, alpha: &OneForm, x: Point, phi: &Isotopy) -> Result<f64> {
    Ok(delta_via_flux_at(psi, alpha, &[x], phi)?[0])
}

/// [`delta_via_flux`] at several base points, sharing one flux form.
pub fn delta_via_flux_at(psi: &TorusMap, alpha: &OneForm, points: &[Point], phi: &Isotopy) -> Result<Vec<f64>> {
    let distance = forward_distance(phi.endpoint(), psi);
    if distance > 1e-6 {
        return Err(FluxError::EndpointMismatch { distance });
    }
    require_closed(alpha)?;
    let norm = l2_norm(alpha);
    if norm == 0.0 {
        return Err(FluxError::Precondition("the form must be nonzero".into()));
    }
    let mesh = *phi.mesh();
    let sigma = flux_form(phi, &TwoForm::area(mesh))?;
    let pairing = alpha.wedge_integral(&sigma);
    points
        .iter()
        .map(|&x| Ok((pairing - mesh.volume() * orbit_integral(phi, x, alpha)?) / norm))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::isotopy_engine::{integrate_flow, Hamiltonian, TimeProfile};
    use crate::mesh::GridMesh;
    use std::f64::consts::PI;
    use std::sync::Arc;

    #[test]
    fn shear_potential_and_delta() {
        let mesh = GridMesh::unit(64).unwrap();
        let s = TorusMap::shear(mesh, 0.1);
        let dx = OneForm::constant(mesh, [1.0, 0.0]);
        let p = [0.3, 0.1];
        let nu = nu_function(&s, &dx, p).unwrap();
        let expect = ScalarField::from_fn(mesh, |z| 0.1 * (2.0 * PI * z[1]).sin() - 0.1 * (2.0 * PI * p[1]).sin());
        assert!((&nu - &expect).sup_abs() < 1e-12);
        assert!((delta(&s, &dx, [0.0, 0.25]).unwrap() + 0.1).abs() < 1e-12);
        assert_eq!(delta(&s, &OneForm::zeros(mesh), p).unwrap(), 0.0);
    }

    #[test]
    fn translations_do_not_move_harmonic_forms() {
        let mesh = GridMesh::unit(32).unwrap();
        let t = TorusMap::translation(mesh, [0.3, 0.7]);
        let alpha = OneForm::constant(mesh, [2.0, -1.0]);
        assert!(nu_function(&t, &alpha, [0.1, 0.2]).unwrap().sup_abs() < 1e-14);
        assert!(delta(&TorusMap::identity(mesh), &alpha, [0.5, 0.5]).unwrap().abs() < 1e-14);
        let iso = Isotopy::translation(mesh, [0.3, 0.7], 64);
        assert!(delta_via_flux(&t, &alpha, [0.4, 0.9], &iso).unwrap().abs() < 1e-12);
        let wavy = iso.reparametrized(TimeProfile::Sinusoidal { a: 0.5 }).unwrap();
        let d1 = delta_via_flux(&t, &alpha, [0.4, 0.9], &wavy).unwrap();
        assert!(d1.abs() < 1e-6, "{d1}");
    }

    #[test]
    fn flux_route_agrees_on_a_hamiltonian_flow() {
        let mesh = GridMesh::unit(64).unwrap();
        let iso = integrate_flow(Arc::new(Hamiltonian::wobble(&mesh, 0.05)), &mesh, 64).unwrap();
        let psi = iso.endpoint();
        let alpha = OneForm::from_fn(mesh, |p| [1.0 + 0.4 * (2.0 * PI * p[0]).cos(), 0.5]);
        for &x in &[[0.1, 0.2], [0.55, 0.35], mesh.point(7, 40)] {
            let a = delta(psi, &alpha, x).unwrap();
            let b = delta_via_flux(psi, &alpha, x, &iso).unwrap();
            assert!((a - b).abs() < 1e-6 * (1.0 + a.abs()), "{a} vs {b}");
        }
    }

    #[test]
    fn non_closed_forms_are_rejected() {
        let mesh = GridMesh::unit(16).unwrap();
        let stretch_dy = OneForm::from_fn(mesh, |p| [0.0, 1.0 + 0.3 * (2.0 * PI * p[0]).cos()]);
        assert!(matches!(
            displacement_potential(&TorusMap::identity(mesh), &stretch_dy.map_components(|c| c.map(|v| v * v))),
            Err(FluxError::NotClosed { .. })
        ));
    }
}
