use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::norm::{psi_norm, UnitSphereSampler};
use crate::error::{FluxError, Result};
use crate::exterior_calculus::TwoForm;
use crate::isotopy_engine::{integrate_flow, symplectic_flux, FlowField, HamTerm, Hamiltonian, Isotopy, BUMP_POWER};
use crate::mesh::{GridMesh, Point};
use crate::torus_maps::{self, compose_all, pullback_bound_constant, DisplacementCheck, Region, TorusMap};

/// `ψ(U) ∩ U = ∅`, judged with the safety margin of [`Region::displaced_by`].
pub fn displaces(psi: &TorusMap, u: &Region) -> DisplacementCheck {
    u.displaced_by(psi)
}

/// `[φ, ψ] = ψ⁻¹ ∘ φ⁻¹ ∘ ψ ∘ φ`.
pub fn commutator(phi: &TorusMap, psi: &TorusMap) -> Result<TorusMap> {
    let phi_inv = torus_maps::inverse(phi)?;
    let psi_inv = torus_maps::inverse(psi)?;
    compose_all(&[&psi_inv, &phi_inv, psi, phi])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyUpper {
    /// `+∞` when no candidate displaces the region.
    pub value: f64,
    pub best: Option<usize>,
    pub checks: Vec<DisplacementCheck>,
    /// Sampled norms of the displacing candidates.
    pub norms: Vec<Option<f64>>,
}

/// `min ‖ψ‖^∞` over the candidates that displace `U`.
pub fn displacement_energy_upper(
    u: &Region,
    candidates: &[TorusMap],
    sampler: &UnitSphereSampler,
) -> Result<EnergyUpper> {
    let mut out = EnergyUpper { value: f64::INFINITY, best: None, checks: Vec::new(), norms: Vec::new() };
    for (i, c) in candidates.iter().enumerate() {
        let chk = displaces(c, u);
        let norm = if chk.displaces { Some(psi_norm(c, sampler)?.norm_lower_bound) } else { None };
        if let Some(n) = norm {
            if n < out.value {
                out.value = n;
                out.best = Some(i);
            }
        }
        out.checks.push(chk);
        out.norms.push(norm);
    }
    Ok(out)
}

/// Time-one maps of two bump Hamiltonians inside `B` whose supports overlap.
#[derive(Debug, Clone)]
pub struct CommutatorPair {
    pub phi_path: Isotopy,
    pub psi_path: Isotopy,
    pub phi: TorusMap,
    pub psi: TorusMap,
    pub commutator: TorusMap,
    /// `d₀([φ, ψ], id)`.
    pub distance_to_identity: f64,
    /// Largest displacement of `φ` or `ψ` at grid points outside `B`.
    pub outside_displacement: f64,
    /// `sup |det J - 1|` of `φ` and `ψ`.
    pub volume_errors: [f64; 2],
    /// Symplectic fluxes of both paths; `None` when the grid cannot certify
    /// the paths as symplectic.
    pub fluxes: Option<[[f64; 2]; 2]>,
}

impl CommutatorPair {
    pub fn is_volume_preserving(&self) -> bool {
        self.volume_errors.iter().all(|&e| e <= torus_maps::TOL_VP)
    }

    pub fn has_vanishing_flux(&self) -> bool {
        self.fluxes.is_some_and(|f| f.iter().flatten().all(|v| v.abs() <= 1e-8))
    }
}

fn inscribed_ball(mesh: &GridMesh, b: &Region) -> (Point, f64) {
    match *b {
        Region::Ball { center, radius } => (center, radius),
        Region::Rect { lo, hi } => {
            let half = |k: usize| (0.5 * (hi[k] - lo[k])).min(0.5 * mesh.period(k));
            ([0.5 * (lo[0] + hi[0]), 0.5 * (lo[1] + hi[1])], half(0).min(half(1)))
        }
    }
}

fn outside_displacement(m: &TorusMap, b: &Region) -> f64 {
    let mesh = m.mesh();
    (0..mesh.len())
        .filter(|&k| !b.contains(mesh, mesh.point_at(k)))
        .map(|k| {
            let u = m.displacement_at_index(k);
            u[0].hypot(u[1])
        })
        .fold(0.0, f64::max)
}

/// Rescale `h` so that the largest grid speed is `speed`.
fn with_speed(mesh: &GridMesh, h: Hamiltonian, speed: f64) -> Hamiltonian {
    let top = mesh
        .points()
        .map(|p| {
            let v = h.velocity(0.0, p);
            v[0].hypot(v[1])
        })
        .fold(0.0, f64::max);
    h.scaled(speed / top)
}

/// The two Hamiltonians: ridges across a strip that covers one axis,
/// otherwise radial bumps at `c ± 0.3 r e₁` of radius `0.65 r` in the
/// inscribed ball `B(c, r)`. Peak speeds are `0.12 w` and `0.2 R`.
fn pair_hamiltonians(mesh: &GridMesh, b: &Region) -> Result<[Hamiltonian; 2]> {
    let cell = mesh.spacing(0).max(mesh.spacing(1));
    let strip_axis = match *b {
        Region::Rect { lo, hi } => (0..2).find(|&k| hi[1 - k] - lo[1 - k] >= mesh.period(1 - k)),
        Region::Ball { .. } => None,
    };
    if let (Some(axis), Region::Rect { lo, hi }) = (strip_axis, *b) {
        let width = (hi[axis] - lo[axis]).min(mesh.period(axis));
        let w = 0.44 * width;
        if w < 4.0 * cell {
            return Err(FluxError::RegionTooSmall(format!("strip width {width:.3e} spans too few grid cells")));
        }
        let ridge = |center: f64, phase: f64| {
            let h = Hamiltonian::new(
                mesh,
                vec![HamTerm::Ridge { axis, center, half_width: w, amplitude: 1.0, power: BUMP_POWER, mode: 1, phase }],
            );
            with_speed(mesh, h, 0.12 * w)
        };
        return Ok([ridge(lo[axis] + w, 0.0), ridge(lo[axis] + width - w, 0.5 * std::f64::consts::PI)]);
    }
    let (c, r) = inscribed_ball(mesh, b);
    let radius = 0.65 * r;
    if radius < 4.0 * cell {
        return Err(FluxError::RegionTooSmall(format!("bump radius {radius:.3e} spans too few grid cells")));
    }
    let bump = |x: f64| with_speed(mesh, Hamiltonian::bump(mesh, mesh.wrap([x, c[1]]), radius, 1.0), 0.2 * radius);
    Ok([bump(c[0] - 0.3 * r), bump(c[0] + 0.3 * r)])
}

/// Two Hamiltonian flows supported in `B`, integrated with `k` steps, whose
/// commutator is certified to move some point by more than `1e-3`.
pub fn supported_commutator_pair(mesh: &GridMesh, b: &Region, k: usize) -> Result<CommutatorPair> {
    if b.measure(mesh) < 4.0 * mesh.cell_area() {
        return Err(FluxError::RegionTooSmall(format!("measure {:.3e} is below four grid cells", b.measure(mesh))));
    }
    let hs = pair_hamiltonians(mesh, b)?;
    let omega = TwoForm::area(*mesh);
    let mut paths = Vec::with_capacity(2);
    let mut fluxes = Some([[0.0; 2]; 2]);
    for (i, h) in hs.into_iter().enumerate() {
        let path = integrate_flow(Arc::new(h), mesh, k)?;
        match symplectic_flux(&path, &omega) {
            Ok(f) => {
                if let Some(fl) = fluxes.as_mut() {
                    fl[i] = f.periods;
                }
            }
            Err(FluxError::NotSymplectic { .. }) => fluxes = None,
            Err(e) => return Err(e),
        }
        paths.push(path);
    }
    let psi_path = paths.pop().unwrap();
    let phi_path = paths.pop().unwrap();
    let phi = phi_path.endpoint().clone();
    let psi = psi_path.endpoint().clone();
    let outside = outside_displacement(&phi, b).max(outside_displacement(&psi, b));
    if outside > 1e-12 {
        return Err(FluxError::Precondition(format!("bump maps move points outside the region by {outside:.3e}")));
    }
    let comm = commutator(&phi, &psi)?;
    let id = TorusMap::identity(*mesh);
    let d = torus_maps::c0_distance(&comm, &id)?;
    if d <= 1e-3 {
        return Err(FluxError::RegionTooSmall(format!("commutator is only {d:.3e} away from the identity")));
    }
    Ok(CommutatorPair {
        volume_errors: [phi.volume_error(), psi.volume_error()],
        phi_path,
        psi_path,
        phi,
        psi,
        commutator: comm,
        distance_to_identity: d,
        outside_displacement: outside,
        fluxes,
    })
}

/// `sup_x d([[f, φ⁻¹], ψ](x), [φ, ψ](x))` for `φ, ψ` supported in `B` and `f`
/// displacing `B`.
pub fn commutator_collapse_check(f: &TorusMap, phi: &TorusMap, psi: &TorusMap, b: &Region) -> Result<f64> {
    let chk = displaces(f, b);
    if !chk.displaces {
        return Err(FluxError::Precondition(format!(
            "f does not displace the region (gap {:.3e}, margin {:.3e})",
            chk.min_gap, chk.margin
        )));
    }
    let outside = outside_displacement(phi, b).max(outside_displacement(psi, b));
    if outside > 1e-12 {
        return Err(FluxError::Precondition(format!("maps are not supported in the region ({outside:.3e})")));
    }
    let phi_inv = torus_maps::inverse(phi)?;
    let lhs = commutator(&commutator(f, &phi_inv)?, psi)?;
    let rhs = commutator(phi, psi)?;
    Ok(torus_maps::forward_distance(&lhs, &rhs))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyChain {
    pub norm_commutator: f64,
    pub c_psi_inv: f64,
    pub c_phi: f64,
    pub norm_f: f64,
    /// `(C_{ψ⁻¹} + 1)(C_φ + 1) ‖f‖`.
    pub bound: f64,
    pub slack: f64,
    pub holds: bool,
    /// `‖[φ, ψ]‖ / ((C_{ψ⁻¹} + 1)(C_φ + 1))`, a lower bound for the
    /// displacement energy of `U`.
    pub lower_bound: f64,
    pub collapse_residual: f64,
    pub commutator_distance: f64,
}

/// Evaluates `‖[φ, ψ]‖ ≤ (C_{ψ⁻¹} + 1)(C_φ + 1)‖f‖` for a bump pair in `U`,
/// with slack `0.05` relative to the right side.
pub fn energy_chain_check(u: &Region, f: &TorusMap, sampler: &UnitSphereSampler, k: usize) -> Result<EnergyChain> {
    let chk = displaces(f, u);
    if !chk.displaces {
        return Err(FluxError::Precondition(format!(
            "f does not displace the region (gap {:.3e}, margin {:.3e})",
            chk.min_gap, chk.margin
        )));
    }
    let pair = supported_commutator_pair(f.mesh(), u, k)?;
    let collapse_residual = commutator_collapse_check(f, &pair.phi, &pair.psi, u)?;
    let norm_commutator = psi_norm(&pair.commutator, sampler)?.norm_lower_bound;
    let c_psi_inv = pullback_bound_constant(&torus_maps::inverse(&pair.psi)?);
    let c_phi = pullback_bound_constant(&pair.phi);
    let norm_f = psi_norm(f, sampler)?.norm_lower_bound;
    let factor = (c_psi_inv + 1.0) * (c_phi + 1.0);
    let bound = factor * norm_f;
    let slack = 0.05;
    Ok(EnergyChain {
        norm_commutator,
        c_psi_inv,
        c_phi,
        norm_f,
        bound,
        slack,
        holds: norm_commutator <= bound * (1.0 + slack),
        lower_bound: norm_commutator / factor,
        collapse_residual,
        commutator_distance: pair.distance_to_identity,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RigidityRow {
    pub index: usize,
    /// `d₀(φ_i, φ_last)`, the convergence premise.
    pub c0_to_last: f64,
    /// `‖φ_i ∘ φ⁻¹‖^∞`, the norm premise.
    pub norm: f64,
    /// `d₀(φ_i, φ)`.
    pub distance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RigidityReport {
    pub rows: Vec<RigidityRow>,
    pub final_distance: f64,
}

impl RigidityReport {
    /// Whether some iterate has a small norm premise yet stays far from `φ`.
    pub fn pattern_violated(&self, premise_tol: f64, distance_tol: f64) -> bool {
        self.rows.iter().any(|r| r.norm <= premise_tol && r.distance > distance_tol)
    }

    pub fn min_norm(&self) -> f64 {
        self.rows.iter().map(|r| r.norm).fold(f64::INFINITY, f64::min)
    }
}

/// Measures both premises of the rigidity statement along `sequence` and the
/// distance of each iterate to `φ`.
pub fn rigidity_limit_check(sequence: &[TorusMap], phi: &TorusMap, sampler: &UnitSphereSampler) -> Result<RigidityReport> {
    let Some(last) = sequence.last() else {
        return Err(FluxError::Precondition("empty sequence".into()));
    };
    let phi_inv = torus_maps::inverse(phi)?;
    let last_inv = torus_maps::inverse(last)?;
    let mut rows = Vec::with_capacity(sequence.len());
    for (index, m) in sequence.iter().enumerate() {
        let inv = torus_maps::inverse(m)?;
        let c0_to_last = torus_maps::c0_distance_with(m, &inv, last, &last_inv);
        let distance = torus_maps::c0_distance_with(m, &inv, phi, &phi_inv);
        let norm = psi_norm(&torus_maps::compose(m, &phi_inv)?, sampler)?.norm_lower_bound;
        rows.push(RigidityRow { index, c0_to_last, norm, distance });
    }
    let final_distance = rows.last().unwrap().distance;
    Ok(RigidityReport { rows, final_distance })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn strip(mesh: &GridMesh) -> Region {
        Region::vertical_strip(mesh, 0.0, 0.25).unwrap()
    }

    #[test]
    fn energy_upper_bound_branches() {
        let mesh = GridMesh::unit(32).unwrap();
        let s = UnitSphereSampler::new(4, 8, 0);
        let u = strip(&mesh);
        let none = displacement_energy_upper(&u, &[TorusMap::identity(mesh), TorusMap::shear(mesh, 0.1)], &s).unwrap();
        assert_eq!(none.value, f64::INFINITY);
        assert!(none.best.is_none());
        let cands = [
            TorusMap::translation(mesh, [0.5, 0.0]),
            TorusMap::translation(mesh, [1.0 / 3.0, 0.0]),
            TorusMap::shear(mesh, 0.1),
        ];
        let e = displacement_energy_upper(&u, &cands, &s).unwrap();
        assert!(e.norms[2].is_none());
        let expect = e.norms[0].unwrap().min(e.norms[1].unwrap());
        assert_eq!(e.value, expect);
        let thin = Region::vertical_strip(&mesh, 0.05, 0.2).unwrap();
        assert!(displacement_energy_upper(&thin, &cands, &s).unwrap().value <= e.value);
    }

    #[test]
    fn collapse_preconditions() {
        let mesh = GridMesh::unit(32).unwrap();
        let id = TorusMap::identity(mesh);
        let u = strip(&mesh);
        let f = TorusMap::translation(mesh, [0.5, 0.0]);
        assert!(commutator_collapse_check(&f, &id, &id, &u).unwrap() <= 1e-12);
        assert!(matches!(commutator_collapse_check(&id, &id, &id, &u), Err(FluxError::Precondition(_))));
        assert!(matches!(
            supported_commutator_pair(&mesh, &Region::ball([0.5, 0.5], 0.02).unwrap(), 16),
            Err(FluxError::RegionTooSmall(_))
        ));
    }

    #[test]
    fn rigidity_of_a_constant_sequence() {
        let mesh = GridMesh::unit(32).unwrap();
        let phi = TorusMap::shear(mesh, 0.05);
        let rep = rigidity_limit_check(&[phi.clone(), phi.clone()], &phi, &UnitSphereSampler::new(2, 4, 0)).unwrap();
        for r in &rep.rows {
            assert!(r.c0_to_last == 0.0 && r.distance < 1e-12 && r.norm < 1e-12, "{r:?}");
        }
        assert!(!rep.pattern_violated(1e-3, 1e-3));
    }
}
