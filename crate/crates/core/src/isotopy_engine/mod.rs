//! Time-sampled isotopies `t ↦ φ_t`, their generators, fluxes and the
//! functionals built from them.
//!
//! An [`Isotopy`] holds `K + 1` maps at `t_j = j/K`, optionally the exact
//! Lagrangian velocities `∂_t φ_t(x)` and the analytic field that generated
//! it. Without stored velocities, fourth-order finite differences on the
//! wrapped displacements are used.

mod concat;
mod flows;
mod flux;
mod functional;
mod generator;

pub use concat::{concat_reparam, BumpProfile};
pub use flows::{
    ConstantFlow, BUMP_POWER, FlowField, HamTerm, Hamiltonian, PathFlow, Reparametrized, SumFlow, TimeProfile,
    VectorFieldPath,
};
pub use flux::{fathi_mass_flow, flux_form, symplectic_flux, volume_flux};
pub use functional::{f_functional, geodesic_functional, kappa, orbit_integral, orbit_integral_to};
pub use generator::{
    commutator_generator, generator_hodge_split, hofer_like_length, CommutatorGenerator, G1Variant,
    GeneratorSplit, TOL_GENERATOR,
};

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{FluxError, Result};
use crate::exterior_calculus::io::{FieldKind, GridRecord};
use crate::exterior_calculus::{ScalarField, VectorField};
use crate::mesh::{min_image, GridMesh, Point};
use crate::quad;
use crate::torus_maps::{self, Interpolation, Resampler, TorusMap};

/// RK4 steps per sampling interval.
pub const DEFAULT_SUBSTEPS: usize = 2;

/// A path of maps from the identity, sampled uniformly in time.
#[derive(Clone)]
pub struct Isotopy {
    mesh: GridMesh,
    maps: Vec<TorusMap>,
    velocity: Option<Vec<VectorField>>,
    generator: Option<Arc<dyn FlowField>>,
    substeps: usize,
}

impl fmt::Debug for Isotopy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Isotopy")
            .field("mesh", &self.mesh)
            .field("k", &self.k())
            .field("stored_velocity", &self.velocity.is_some())
            .field("generator", &self.generator.as_ref().map(|g| g.label()))
            .finish()
    }
}

/// Lift-tracked orbits of every grid point.
#[derive(Debug, Clone)]
pub struct LiftTrack {
    /// `φ̃_1(x) - x` following the path continuously.
    pub endpoint: [ScalarField; 2],
    /// Length of the polygonal orbit through the samples.
    pub length: ScalarField,
}

#[derive(Serialize, Deserialize)]
struct IsotopyRecord {
    maps: Vec<GridRecord>,
    #[serde(default)]
    velocity: Option<Vec<GridRecord>>,
}

fn wrapped(d: f64, l: f64) -> f64 {
    min_image(d, l)
}

/// Positions on the cover after one RK4 step of size `h` from time `t`.
fn rk4_step(field: &dyn FlowField, t: f64, h: f64, p: &mut [Point]) {
    for q in p.iter_mut() {
        let x = *q;
        let k1 = field.velocity(t, x);
        let k2 = field.velocity(t + 0.5 * h, [x[0] + 0.5 * h * k1[0], x[1] + 0.5 * h * k1[1]]);
        let k3 = field.velocity(t + 0.5 * h, [x[0] + 0.5 * h * k2[0], x[1] + 0.5 * h * k2[1]]);
        let k4 = field.velocity(t + h, [x[0] + h * k3[0], x[1] + h * k3[1]]);
        *q = [
            x[0] + h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
            x[1] + h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
        ];
    }
}

fn map_from_positions(mesh: &GridMesh, p: &[Point]) -> Result<TorusMap> {
    let mut u0 = Vec::with_capacity(p.len());
    let mut u1 = Vec::with_capacity(p.len());
    for (k, q) in p.iter().enumerate() {
        let x = mesh.point_at(k);
        u0.push(q[0] - x[0]);
        u1.push(q[1] - x[1]);
    }
    TorusMap::from_displacement(ScalarField::new(*mesh, u0)?, ScalarField::new(*mesh, u1)?, Interpolation::default())
}

fn velocities_at(field: &dyn FlowField, mesh: &GridMesh, t: f64, p: &[Point]) -> VectorField {
    let (mut v0, mut v1) = (Vec::with_capacity(p.len()), Vec::with_capacity(p.len()));
    for q in p {
        let v = field.velocity(t, *q);
        v0.push(v[0]);
        v1.push(v[1]);
    }
    VectorField::from_parts(ScalarField::from_vec(*mesh, v0), ScalarField::from_vec(*mesh, v1))
}

/// Integrate `field` from the identity with RK4, sampling `K + 1` maps.
pub fn integrate_flow(field: Arc<dyn FlowField>, mesh: &GridMesh, k: usize) -> Result<Isotopy> {
    integrate_flow_with(field, mesh, k, DEFAULT_SUBSTEPS)
}

pub fn integrate_flow_with(field: Arc<dyn FlowField>, mesh: &GridMesh, k: usize, substeps: usize) -> Result<Isotopy> {
    if k == 0 || substeps == 0 {
        return Err(FluxError::Precondition("K and the number of substeps must be positive".into()));
    }
    let dt = 1.0 / k as f64;
    let h = dt / substeps as f64;
    let mut p: Vec<Point> = mesh.points().collect();
    let mut maps = Vec::with_capacity(k + 1);
    let mut vel = Vec::with_capacity(k + 1);
    maps.push(TorusMap::identity(*mesh));
    vel.push(velocities_at(field.as_ref(), mesh, 0.0, &p));
    for j in 0..k {
        for s in 0..substeps {
            rk4_step(field.as_ref(), j as f64 * dt + s as f64 * h, h, &mut p);
        }
        let t = (j + 1) as f64 * dt;
        let m = map_from_positions(mesh, &p).map_err(|e| FluxError::FlowStep {
            sample: j + 1,
            source: Box::new(e),
        })?;
        maps.push(m);
        vel.push(velocities_at(field.as_ref(), mesh, t, &p));
    }
    Ok(Isotopy {
        mesh: *mesh,
        maps,
        velocity: Some(vel),
        generator: Some(field),
        substeps,
    })
}

/// Integrate a sampled time-dependent vector field.
pub fn integrate_path(path: &VectorFieldPath, k: usize) -> Result<Isotopy> {
    integrate_flow(Arc::new(PathFlow::new(path)), path.mesh(), k)
}

/// The Eulerian velocity `X_t = φ̇_t ∘ φ_t⁻¹` at every sample time.
pub fn velocity_field(phi: &Isotopy) -> Result<VectorFieldPath> {
    Ok(VectorFieldPath::new((0..=phi.k()).map(|j| phi.eulerian_velocity(j)).collect::<Result<_>>()?))
}

impl Isotopy {
    /// Wrap a list of maps; the first must be the identity.
    pub fn from_maps(maps: Vec<TorusMap>) -> Result<Self> {
        if maps.len() < 2 {
            return Err(FluxError::InvalidIsotopy("at least two samples are required".into()));
        }
        let mesh = *maps[0].mesh();
        if maps.iter().any(|m| m.mesh() != &mesh) {
            return Err(FluxError::MeshMismatch("isotopy samples live on different meshes".into()));
        }
        let start = torus_maps::forward_distance(&maps[0], &TorusMap::identity(mesh));
        if start > 1e-9 * mesh.period(0).min(mesh.period(1)) {
            return Err(FluxError::InvalidIsotopy(format!("first sample is {start:.3e} away from the identity")));
        }
        Ok(Self {
            mesh,
            maps,
            velocity: None,
            generator: None,
            substeps: DEFAULT_SUBSTEPS,
        })
    }

    /// Attach exact Lagrangian velocities `∂_t φ_t(x)` at the samples.
    pub fn with_velocity(mut self, v: Vec<VectorField>) -> Result<Self> {
        if v.len() != self.maps.len() || v.iter().any(|x| x.mesh() != &self.mesh) {
            return Err(FluxError::InvalidIsotopy("velocity samples do not match the maps".into()));
        }
        self.velocity = Some(v);
        Ok(self)
    }

    /// The constant path at the identity.
    pub fn identity(mesh: GridMesh, k: usize) -> Self {
        let maps = vec![TorusMap::identity(mesh); k.max(1) + 1];
        let v = vec![VectorField::zeros(mesh); k.max(1) + 1];
        Self::from_maps(maps).and_then(|s| s.with_velocity(v)).expect("identity path is valid")
    }

    /// `t ↦ x + t c`.
    pub fn translation(mesh: GridMesh, c: [f64; 2], k: usize) -> Self {
        integrate_flow(Arc::new(ConstantFlow(c)), &mesh, k).expect("translations never fold")
    }

    pub fn mesh(&self) -> &GridMesh {
        &self.mesh
    }

    /// Number of intervals.
    pub fn k(&self) -> usize {
        self.maps.len() - 1
    }

    pub fn dt(&self) -> f64 {
        1.0 / self.k() as f64
    }

    pub fn time(&self, j: usize) -> f64 {
        j as f64 / self.k() as f64
    }

    pub fn map(&self, j: usize) -> &TorusMap {
        &self.maps[j]
    }

    pub fn maps(&self) -> &[TorusMap] {
        &self.maps
    }

    pub fn endpoint(&self) -> &TorusMap {
        self.maps.last().unwrap()
    }

    pub fn generator(&self) -> Option<&Arc<dyn FlowField>> {
        self.generator.as_ref()
    }

    pub fn has_stored_velocity(&self) -> bool {
        self.velocity.is_some()
    }

    /// Forget the analytic generator (keeps stored velocities).
    pub fn without_generator(mut self) -> Self {
        self.generator = None;
        self
    }

    /// Keep only the maps.
    pub fn maps_only(mut self) -> Self {
        self.generator = None;
        self.velocity = None;
        self
    }

    /// `sup |det J - 1|` over all samples, with the worst sample.
    pub fn volume_error(&self) -> (usize, f64) {
        self.maps
            .iter()
            .enumerate()
            .map(|(j, m)| (j, m.volume_error()))
            .fold((0, 0.0), |a, b| if b.1 > a.1 { b } else { a })
    }

    pub(crate) fn require_volume_preserving(&self) -> Result<()> {
        let (sample, defect) = self.volume_error();
        if defect > torus_maps::TOL_VP {
            return Err(FluxError::NotVolumePreserving { sample, defect });
        }
        Ok(())
    }

    /// `∂_t φ_t(x)` at sample `j`.
    pub fn lagrangian_velocity(&self, j: usize) -> VectorField {
        if let Some(v) = &self.velocity {
            return v[j].clone();
        }
        let k = self.k();
        let mesh = self.mesh;
        let uj = self.maps[j].displacement();
        let diff = |m: usize, c: usize| -> Vec<f64> {
            let um = self.maps[m].displacement()[c].values();
            let l = mesh.period(c);
            um.iter().zip(uj[c].values()).map(|(a, b)| wrapped(a - b, l)).collect()
        };
        let (idx, w, scale): (Vec<usize>, Vec<f64>, f64) = if k >= 4 {
            let (s, w) = quad::derivative_stencil(j, k);
            ((s..s + 5).collect(), w.to_vec(), 12.0 * self.dt())
        } else if j < k {
            (vec![j, j + 1], vec![-1.0, 1.0], self.dt())
        } else {
            (vec![j - 1, j], vec![-1.0, 1.0], self.dt())
        };
        let comp = |c: usize| {
            let mut acc = vec![0.0; mesh.len()];
            for (m, wm) in idx.iter().zip(&w) {
                if *wm == 0.0 || *m == j {
                    continue;
                }
                for (a, d) in acc.iter_mut().zip(diff(*m, c)) {
                    *a += wm * d;
                }
            }
            ScalarField::from_vec(mesh, acc.into_iter().map(|a| a / scale).collect())
        };
        VectorField::from_parts(comp(0), comp(1))
    }

    /// `X_{t_j} = φ̇_{t_j} ∘ φ_{t_j}⁻¹`.
    pub fn eulerian_velocity(&self, j: usize) -> Result<VectorField> {
        if let Some(g) = &self.generator {
            return Ok(g.sample(&self.mesh, self.time(j)));
        }
        let inv = torus_maps::inverse(&self.maps[j])?;
        Ok(self.eulerian_velocity_with(j, &inv))
    }

    /// Same as [`Self::eulerian_velocity`], reusing a known `φ_{t_j}⁻¹`.
    pub fn eulerian_velocity_with(&self, j: usize, inv: &TorusMap) -> VectorField {
        if let Some(g) = &self.generator {
            return g.sample(&self.mesh, self.time(j));
        }
        let v = self.lagrangian_velocity(j);
        let r = Resampler::new(Interpolation::Trigonometric, &[v.component(0), v.component(1)]);
        let mut f = r.resample(&self.mesh, &inv.grid_images());
        let x1 = f.pop().unwrap();
        VectorField::from_parts(f.pop().unwrap(), x1)
    }

    /// `t ↦ φ_t⁻¹`, with velocities `-dφ_t⁻¹ · X_t`.
    pub fn inverse_path(&self) -> Result<Isotopy> {
        let mut maps = Vec::with_capacity(self.maps.len());
        let mut vel = Vec::with_capacity(self.maps.len());
        for j in 0..=self.k() {
            let inv = torus_maps::inverse(&self.maps[j])?;
            let x = self.eulerian_velocity_with(j, &inv);
            let mut w0 = Vec::with_capacity(self.mesh.len());
            let mut w1 = Vec::with_capacity(self.mesh.len());
            for idx in 0..self.mesh.len() {
                let jm = inv.jacobian_at_index(idx);
                let v = x.at_index(idx);
                w0.push(-(jm[0][0] * v[0] + jm[0][1] * v[1]));
                w1.push(-(jm[1][0] * v[0] + jm[1][1] * v[1]));
            }
            vel.push(VectorField::from_parts(
                ScalarField::from_vec(self.mesh, w0),
                ScalarField::from_vec(self.mesh, w1),
            ));
            maps.push(inv);
        }
        maps[0] = TorusMap::identity(self.mesh);
        Isotopy::from_maps(maps)?.with_velocity(vel)
    }

    /// The map and Lagrangian velocity at an arbitrary time.
    ///
    /// With a generator the flow is re-integrated from the preceding sample;
    /// otherwise cubic Hermite interpolation in time is used.
    pub fn sample_at(&self, t: f64) -> Result<(TorusMap, VectorField)> {
        let k = self.k();
        let s = (t.clamp(0.0, 1.0)) * k as f64;
        let j = (s.floor() as usize).min(k);
        let tau = s - j as f64;
        if tau.abs() < 1e-13 || j == k {
            return Ok((self.maps[j].clone(), self.lagrangian_velocity(j)));
        }
        let mesh = self.mesh;
        let pos0 = self.maps[j].grid_images();
        if let Some(g) = &self.generator {
            let h_max = self.dt() / self.substeps as f64;
            let span = t - self.time(j);
            let steps = (span / h_max).ceil().max(1.0) as usize;
            let h = span / steps as f64;
            let mut p = pos0;
            for s in 0..steps {
                rk4_step(g.as_ref(), self.time(j) + s as f64 * h, h, &mut p);
            }
            let m = map_from_positions(&mesh, &p)?;
            return Ok((m, velocities_at(g.as_ref(), &mesh, t, &p)));
        }
        let v0 = self.lagrangian_velocity(j);
        let v1 = self.lagrangian_velocity(j + 1);
        let dt = self.dt();
        let (h00, h10, h01, h11) = (
            2.0 * tau.powi(3) - 3.0 * tau * tau + 1.0,
            tau.powi(3) - 2.0 * tau * tau + tau,
            -2.0 * tau.powi(3) + 3.0 * tau * tau,
            tau.powi(3) - tau * tau,
        );
        let (d00, d10, d01, d11) = (
            6.0 * tau * tau - 6.0 * tau,
            3.0 * tau * tau - 4.0 * tau + 1.0,
            -6.0 * tau * tau + 6.0 * tau,
            3.0 * tau * tau - 2.0 * tau,
        );
        let mut u = [Vec::with_capacity(mesh.len()), Vec::with_capacity(mesh.len())];
        let mut w = [Vec::with_capacity(mesh.len()), Vec::with_capacity(mesh.len())];
        for c in 0..2 {
            let a = self.maps[j].displacement()[c].values();
            let b = self.maps[j + 1].displacement()[c].values();
            let (va, vb) = (v0.component(c).values(), v1.component(c).values());
            let l = mesh.period(c);
            for idx in 0..mesh.len() {
                let p0 = a[idx];
                let p1 = p0 + wrapped(b[idx] - p0, l);
                u[c].push(h00 * p0 + h10 * dt * va[idx] + h01 * p1 + h11 * dt * vb[idx]);
                w[c].push((d00 * p0 + d01 * p1) / dt + d10 * va[idx] + d11 * vb[idx]);
            }
        }
        let [u0, u1] = u;
        let [w0, w1] = w;
        let m = TorusMap::from_displacement(
            ScalarField::from_vec(mesh, u0),
            ScalarField::from_vec(mesh, u1),
            Interpolation::default(),
        )?;
        Ok((m, VectorField::from_parts(ScalarField::from_vec(mesh, w0), ScalarField::from_vec(mesh, w1))))
    }

    /// The same path sampled with `k` intervals.
    pub fn resampled(&self, k: usize) -> Result<Isotopy> {
        if k == self.k() {
            return Ok(self.clone());
        }
        if let Some(g) = &self.generator {
            return integrate_flow_with(g.clone(), &self.mesh, k, self.substeps);
        }
        let (maps, vel): (Vec<_>, Vec<_>) = (0..=k)
            .map(|j| self.sample_at(j as f64 / k as f64))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .unzip();
        Isotopy::from_maps(maps)?.with_velocity(vel)
    }

    /// `t ↦ φ_{r(t)}`.
    pub fn reparametrized(&self, profile: TimeProfile) -> Result<Isotopy> {
        if let Some(g) = &self.generator {
            let field = Reparametrized { inner: g.clone(), profile };
            return integrate_flow_with(Arc::new(field), &self.mesh, self.k(), self.substeps);
        }
        let k = self.k();
        let mut maps = Vec::with_capacity(k + 1);
        let mut vel = Vec::with_capacity(k + 1);
        for j in 0..=k {
            let t = self.time(j);
            let (m, v) = self.sample_at(profile.value(t))?;
            let s = profile.derivative(t);
            maps.push(m);
            vel.push(VectorField::from_parts(v.component(0) * s, v.component(1) * s));
        }
        Isotopy::from_maps(maps)?.with_velocity(vel)
    }

    /// Follow every grid point continuously through the samples.
    pub fn lift_track(&self) -> Result<LiftTrack> {
        let mesh = self.mesh;
        let mut end = [vec![0.0; mesh.len()], vec![0.0; mesh.len()]];
        let mut length = vec![0.0; mesh.len()];
        for j in 0..self.k() {
            let a = self.maps[j].displacement();
            let b = self.maps[j + 1].displacement();
            for idx in 0..mesh.len() {
                let mut inc = [0.0; 2];
                for c in 0..2 {
                    let l = mesh.period(c);
                    inc[c] = wrapped(b[c].values()[idx] - a[c].values()[idx], l);
                    if inc[c].abs() >= 0.25 * l {
                        return Err(FluxError::LiftAmbiguous { sample: j + 1, increment: inc[c] });
                    }
                    end[c][idx] += inc[c];
                }
                length[idx] += inc[0].hypot(inc[1]);
            }
        }
        let [e0, e1] = end;
        Ok(LiftTrack {
            endpoint: [ScalarField::from_vec(mesh, e0), ScalarField::from_vec(mesh, e1)],
            length: ScalarField::from_vec(mesh, length),
        })
    }

    /// Lift-tracked positions of one point at every sample.
    pub fn orbit(&self, x: Point) -> Result<Vec<Point>> {
        let mut out = Vec::with_capacity(self.maps.len());
        let mut prev = self.maps[0].displacement_at(x);
        let mut acc = prev;
        out.push([x[0] + acc[0], x[1] + acc[1]]);
        for (j, m) in self.maps.iter().enumerate().skip(1) {
            let u = m.displacement_at(x);
            for c in 0..2 {
                let l = self.mesh.period(c);
                let inc = wrapped(u[c] - prev[c], l);
                if inc.abs() >= 0.25 * l {
                    return Err(FluxError::LiftAmbiguous { sample: j, increment: inc });
                }
                acc[c] += inc;
            }
            prev = u;
            out.push([x[0] + acc[0], x[1] + acc[1]]);
        }
        Ok(out)
    }

    pub fn to_json(&self) -> String {
        let rec = IsotopyRecord {
            maps: self.maps.iter().map(TorusMap::to_record).collect(),
            velocity: self.velocity.as_ref().map(|v| {
                v.iter()
                    .map(|x| {
                        GridRecord::new(
                            &self.mesh,
                            FieldKind::Oneform,
                            x.components().iter().map(|c| c.values().to_vec()).collect(),
                        )
                    })
                    .collect()
            }),
        };
        serde_json::to_string(&rec).expect("isotopy records always serialize")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let rec: IsotopyRecord = serde_json::from_str(s).map_err(|e| FluxError::Format(e.to_string()))?;
        let maps = rec.maps.iter().map(TorusMap::from_record).collect::<Result<Vec<_>>>()?;
        let iso = Isotopy::from_maps(maps)?;
        match rec.velocity {
            None => Ok(iso),
            Some(v) => {
                let v = v
                    .iter()
                    .map(|r| {
                        let mut f = r.fields(FieldKind::Oneform)?;
                        let x1 = f.pop().unwrap();
                        VectorField::new(f.pop().unwrap(), x1)
                    })
                    .collect::<Result<Vec<_>>>()?;
                iso.with_velocity(v)
            }
        }
    }
}

/// `d̄(Φ, Ψ) = max_t d₀(φ_t, ψ_t)`; paths with different `K` are compared on
/// the finer sampling.
pub fn c0bar_distance(phi: &Isotopy, psi: &Isotopy) -> Result<f64> {
    if phi.mesh() != psi.mesh() {
        return Err(FluxError::MeshMismatch("isotopies live on different meshes".into()));
    }
    let k = phi.k().max(psi.k());
    let (a, b) = (phi.resampled(k)?, psi.resampled(k)?);
    let mut d: f64 = 0.0;
    for j in 0..=k {
        d = d.max(torus_maps::c0_distance(a.map(j), b.map(j))?);
    }
    Ok(d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn hamiltonian_shear_flow_matches_closed_form() {
        let mesh = GridMesh::unit(32).unwrap();
        // H = cos(2πy)/2π gives x ↦ (x - t sin 2πy, y)
        let h = Hamiltonian::new(&mesh, vec![HamTerm::Fourier { k: [0, 1], amplitude: 0.5 / PI, phase: 0.0, rate: 0.0 }]);
        let iso = integrate_flow(Arc::new(h), &mesh, 16).unwrap();
        let exact = TorusMap::from_fn(mesh, |p| [-(2.0 * PI * p[1]).sin(), 0.0]).unwrap();
        assert!(torus_maps::forward_distance(iso.endpoint(), &exact) < 1e-12);
        assert!(iso.volume_error().1 < 1e-12);
    }

    #[test]
    fn finite_difference_velocity_is_fourth_order() {
        let mesh = GridMesh::unit(32).unwrap();
        let h = Hamiltonian::wobble(&mesh, 0.05);
        let iso = integrate_flow(Arc::new(h), &mesh, 32).unwrap();
        let fd = iso.clone().maps_only();
        for j in [0, 1, 16, 31, 32] {
            let err = (&iso.lagrangian_velocity(j) - &fd.lagrangian_velocity(j)).sup_norm();
            assert!(err < 1e-5, "sample {j}: {err:.2e}");
        }
        let e = (&iso.eulerian_velocity(10).unwrap() - &fd.eulerian_velocity(10).unwrap()).sup_norm();
        assert!(e < 1e-5);
    }

    #[test]
    fn inverse_path_undoes_the_path() {
        let mesh = GridMesh::unit(32).unwrap();
        let iso = integrate_flow(Arc::new(Hamiltonian::cellular(&mesh, 0.05)), &mesh, 8).unwrap();
        let inv = iso.inverse_path().unwrap();
        for j in 0..=8 {
            let id = torus_maps::compose(inv.map(j), iso.map(j)).unwrap();
            assert!(torus_maps::forward_distance(&id, &TorusMap::identity(mesh)) < 1e-9);
        }
        let fd = inv.clone().maps_only();
        assert!((&inv.lagrangian_velocity(4) - &fd.lagrangian_velocity(4)).sup_norm() < 1e-4);
    }

    #[test]
    fn lift_tracking_sees_full_turn() {
        let mesh = GridMesh::unit(16).unwrap();
        let iso = Isotopy::translation(mesh, [1.0, -2.0], 16);
        let t = iso.lift_track().unwrap();
        assert!((t.endpoint[0].mean() - 1.0).abs() < 1e-12);
        assert!((t.endpoint[1].mean() + 2.0).abs() < 1e-12);
        assert!((t.length.max() - 5f64.sqrt()).abs() < 1e-12);
        let coarse = Isotopy::translation(mesh, [1.0, 0.0], 2);
        assert!(matches!(coarse.lift_track(), Err(FluxError::LiftAmbiguous { .. })));
    }

    #[test]
    fn hermite_sampling_tracks_the_flow() {
        let mesh = GridMesh::unit(32).unwrap();
        let iso = integrate_flow(Arc::new(Hamiltonian::twist(&mesh, 0.4)), &mesh, 16).unwrap();
        let (exact, v_exact) = iso.sample_at(0.53).unwrap();
        let (approx, v_approx) = iso.clone().without_generator().sample_at(0.53).unwrap();
        assert!(torus_maps::forward_distance(&exact, &approx) < 1e-7);
        assert!((&v_exact - &v_approx).sup_norm() < 1e-5);
    }

    #[test]
    fn reparametrization_keeps_endpoint() {
        let mesh = GridMesh::unit(32).unwrap();
        let iso = integrate_flow(Arc::new(Hamiltonian::wobble(&mesh, 0.05)), &mesh, 32).unwrap();
        let r = iso.reparametrized(TimeProfile::Sinusoidal { a: 0.5 }).unwrap();
        assert!(torus_maps::forward_distance(r.endpoint(), iso.endpoint()) < 1e-9);
        let r2 = iso.clone().without_generator().reparametrized(TimeProfile::Sinusoidal { a: 0.5 }).unwrap();
        assert!(torus_maps::forward_distance(r2.endpoint(), iso.endpoint()) < 1e-12);
    }

    #[test]
    fn json_round_trip() {
        let mesh = GridMesh::unit(16).unwrap();
        let iso = integrate_flow(Arc::new(Hamiltonian::cellular(&mesh, 0.1)), &mesh, 4).unwrap();
        let back = Isotopy::from_json(&iso.to_json()).unwrap();
        assert_eq!(back.maps(), iso.maps());
        assert_eq!(back.lagrangian_velocity(2), iso.lagrangian_velocity(2));
        let bad = Isotopy::from_maps(vec![TorusMap::shear(mesh, 0.1), TorusMap::identity(mesh)]);
        assert!(matches!(bad, Err(FluxError::InvalidIsotopy(_))));
    }

    #[test]
    fn c0bar_of_translations() {
        let mesh = GridMesh::unit(16).unwrap();
        let a = Isotopy::translation(mesh, [0.2, 0.0], 4);
        let b = Isotopy::translation(mesh, [0.0, 0.0], 8);
        assert!((c0bar_distance(&a, &b).unwrap() - 0.2).abs() < 1e-12);
    }
}
