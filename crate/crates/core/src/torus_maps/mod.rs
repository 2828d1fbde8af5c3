//! Diffeomorphisms of the torus isotopic to the identity, stored as periodic
//! displacement fields `φ(x) = x + u(x)`.
//!
//! The displacement is a continuous lift; its branch is fixed by requiring the
//! mean of each component to lie in `(-L/2, L/2]`. Distances between maps
//! always use minimal images.

pub mod catalog;
pub mod interp;
mod region;

pub use interp::{Interpolation, Resampler};
pub use region::{DisplacementCheck, Region};

use crate::error::{FluxError, Result};
use crate::exterior_calculus::io::{FieldKind, GridRecord};
use crate::exterior_calculus::{OneForm, ScalarField, TwoForm, VectorField};
use crate::mesh::{min_image, GridMesh, Point};
use crate::spectral::{self, TrigSeries};

/// Threshold on `sup |det J - 1|` for the volume-preserving flag.
pub const TOL_VP: f64 = 1e-8;
/// Newton residual target, relative to the period.
pub const TOL_INV: f64 = 1e-10;
pub const MAX_NEWTON_ITER: usize = 50;

/// A grid-sampled diffeomorphism `x ↦ x + u(x) mod L`.
#[derive(Debug, Clone)]
pub struct TorusMap {
    mesh: GridMesh,
    disp: [ScalarField; 2],
    scheme: Interpolation,
    /// `J[r][c] = ∂_c φ^r`, row-major.
    jac: [ScalarField; 4],
    det: ScalarField,
    /// Accumulated resampling error estimate.
    quality: f64,
}

impl PartialEq for TorusMap {
    fn eq(&self, other: &Self) -> bool {
        self.mesh == other.mesh && self.disp == other.disp && self.scheme == other.scheme
    }
}

impl TorusMap {
    /// Build from a continuous displacement lift. Fails if `det J ≤ 0` somewhere.
    pub fn from_displacement(u0: ScalarField, u1: ScalarField, scheme: Interpolation) -> Result<Self> {
        if u0.mesh() != u1.mesh() {
            return Err(FluxError::MeshMismatch("displacement components differ".into()));
        }
        let mesh = *u0.mesh();
        let u0 = normalize_branch(u0, mesh.period(0));
        let u1 = normalize_branch(u1, mesh.period(1));
        let jac = [
            u0.partial(0).map(|v| 1.0 + v),
            u0.partial(1),
            u1.partial(0),
            u1.partial(1).map(|v| 1.0 + v),
        ];
        let det = ScalarField::from_vec(
            mesh,
            (0..mesh.len())
                .map(|k| {
                    jac[0].values()[k] * jac[3].values()[k] - jac[1].values()[k] * jac[2].values()[k]
                })
                .collect(),
        );
        if let Some(k) = det.values().iter().position(|&d| !(d > 0.0)) {
            let (i, j) = mesh.coords(k);
            return Err(FluxError::NotDiffeomorphism { i, j, det: det.values()[k] });
        }
        Ok(Self {
            mesh,
            disp: [u0, u1],
            scheme,
            jac,
            det,
            quality: 0.0,
        })
    }

    /// Sample an analytic displacement `x ↦ u(x)`.
    pub fn from_fn(mesh: GridMesh, u: impl Fn(Point) -> [f64; 2]) -> Result<Self> {
        let [a, b] = OneForm::from_fn(mesh, u).into_components();
        Self::from_displacement(a, b, Interpolation::default())
    }

    pub fn identity(mesh: GridMesh) -> Self {
        Self::from_fn(mesh, |_| [0.0, 0.0]).expect("identity is a diffeomorphism")
    }

    pub fn translation(mesh: GridMesh, c: [f64; 2]) -> Self {
        Self::from_fn(mesh, |_| c).expect("translations are diffeomorphisms")
    }

    /// `S_ε(x, y) = (x + ε sin 2πy, y)` (with `y` scaled by its period).
    pub fn shear(mesh: GridMesh, eps: f64) -> Self {
        let l1 = mesh.period(1);
        Self::from_fn(mesh, |p| [eps * (2.0 * std::f64::consts::PI * p[1] / l1).sin(), 0.0])
            .expect("shears are diffeomorphisms")
    }

    pub fn with_scheme(mut self, scheme: Interpolation) -> Self {
        self.scheme = scheme;
        self
    }

    pub(crate) fn with_quality(mut self, q: f64) -> Self {
        self.quality = q;
        self
    }

    pub fn mesh(&self) -> &GridMesh {
        &self.mesh
    }

    pub fn scheme(&self) -> Interpolation {
        self.scheme
    }

    pub fn displacement(&self) -> &[ScalarField; 2] {
        &self.disp
    }

    pub fn displacement_at_index(&self, idx: usize) -> [f64; 2] {
        [self.disp[0].values()[idx], self.disp[1].values()[idx]]
    }

    /// Jacobian entry `∂_c φ^r`.
    pub fn jacobian(&self, r: usize, c: usize) -> &ScalarField {
        &self.jac[2 * r + c]
    }

    pub fn jacobian_at_index(&self, idx: usize) -> [[f64; 2]; 2] {
        let v = |k: usize| self.jac[k].values()[idx];
        [[v(0), v(1)], [v(2), v(3)]]
    }

    pub fn det(&self) -> &ScalarField {
        &self.det
    }

    /// `sup |det J - 1|`.
    pub fn volume_error(&self) -> f64 {
        self.det.values().iter().fold(0.0, |m, d| m.max((d - 1.0).abs()))
    }

    pub fn is_volume_preserving(&self) -> bool {
        self.volume_error() <= TOL_VP
    }

    /// Error estimate accumulated through resampling.
    pub fn quality(&self) -> f64 {
        self.quality
    }

    /// Lifted images `x + u(x)` of the grid points.
    pub fn grid_images(&self) -> Vec<Point> {
        (0..self.mesh.len())
            .map(|k| {
                let x = self.mesh.point_at(k);
                let u = self.displacement_at_index(k);
                [x[0] + u[0], x[1] + u[1]]
            })
            .collect()
    }

    pub fn resampler(&self) -> Resampler {
        Resampler::new(self.scheme, &[&self.disp[0], &self.disp[1]])
    }

    /// Displacement at an arbitrary point.
    pub fn displacement_at(&self, p: Point) -> [f64; 2] {
        match self.scheme {
            Interpolation::Trigonometric => [
                TrigSeries::new(self.disp[0].values(), &self.mesh).eval(p),
                TrigSeries::new(self.disp[1].values(), &self.mesh).eval(p),
            ],
            Interpolation::Cubic => {
                let mut v = [0.0; 2];
                self.resampler().eval(p, &mut v);
                v
            }
        }
    }

    /// `φ(p)` on the universal cover (no reduction).
    pub fn evaluate_lift(&self, p: Point) -> Point {
        let u = self.displacement_at(p);
        [p[0] + u[0], p[1] + u[1]]
    }

    /// `φ(p)` reduced to the fundamental domain.
    pub fn evaluate(&self, p: Point) -> Point {
        self.mesh.wrap(self.evaluate_lift(p))
    }

    /// Sup of the largest singular value of `dφ` over the grid.
    pub fn lipschitz(&self) -> f64 {
        (0..self.mesh.len())
            .map(|k| sigma_max_sq(self.jacobian_at_index(k)).sqrt())
            .fold(0.0, f64::max)
    }

    pub fn to_record(&self) -> GridRecord {
        GridRecord::new(
            &self.mesh,
            FieldKind::Map,
            self.disp.iter().map(|c| c.values().to_vec()).collect(),
        )
    }

    pub fn from_record(r: &GridRecord) -> Result<Self> {
        let mut f = r.fields(FieldKind::Map)?;
        let u1 = f.pop().unwrap();
        let u0 = f.pop().unwrap();
        Self::from_displacement(u0, u1, Interpolation::default())
    }

    fn check_mesh(&self, other: &GridMesh) -> Result<()> {
        if &self.mesh != other {
            return Err(FluxError::MeshMismatch("maps live on different meshes".into()));
        }
        Ok(())
    }
}

fn normalize_branch(u: ScalarField, l: f64) -> ScalarField {
    let m = u.mean();
    let shift = l * ((m - min_image(m, l)) / l).round();
    if shift == 0.0 {
        u
    } else {
        u.map(|v| v - shift)
    }
}

fn sigma_max_sq(j: [[f64; 2]; 2]) -> f64 {
    let fro = j[0][0].powi(2) + j[0][1].powi(2) + j[1][0].powi(2) + j[1][1].powi(2);
    let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
    0.5 * (fro + (fro * fro - 4.0 * det * det).max(0.0).sqrt())
}

/// Spectral mass above a quarter of the resolution: a cheap bound on what
/// local interpolation can lose.
fn spectral_tail(f: &ScalarField) -> f64 {
    let n = f.mesh().n();
    let spec = spectral::forward(f.values(), n);
    let s = 1.0 / (n * n) as f64;
    let mut tail = 0.0;
    for p in 0..n {
        for q in 0..n {
            let (a, b) = (spectral::frequency(p, n).unsigned_abs(), spectral::frequency(q, n).unsigned_abs());
            if a.max(b) as usize > n / 4 {
                tail += (spec[p * n + q] * s).norm();
            }
        }
    }
    tail
}

/// `φ ∘ ψ`, resampled on the grid.
pub fn compose(phi: &TorusMap, psi: &TorusMap) -> Result<TorusMap> {
    phi.check_mesh(psi.mesh())?;
    let mesh = phi.mesh;
    let images = psi.grid_images();
    let r = phi.resampler();
    let mut u0 = Vec::with_capacity(mesh.len());
    let mut u1 = Vec::with_capacity(mesh.len());
    let mut buf = [0.0; 2];
    for (k, y) in images.iter().enumerate() {
        r.eval(*y, &mut buf);
        let v = psi.displacement_at_index(k);
        u0.push(v[0] + buf[0]);
        u1.push(v[1] + buf[1]);
    }
    let q = phi.quality + psi.quality + spectral_tail(&phi.disp[0]) + spectral_tail(&phi.disp[1]);
    TorusMap::from_displacement(
        ScalarField::from_vec(mesh, u0),
        ScalarField::from_vec(mesh, u1),
        phi.scheme,
    )
    .map(|m| m.with_quality(q))
}

/// Compose a list right-to-left: `maps[0] ∘ maps[1] ∘ …`.
pub fn compose_all(maps: &[&TorusMap]) -> Result<TorusMap> {
    let mut it = maps.iter().rev();
    let mut acc = (*it.next().expect("at least one map")).clone();
    for m in it {
        acc = compose(m, &acc)?;
    }
    Ok(acc)
}

/// `φ⁻¹` by damped Newton iteration on the lift, one grid point at a time.
pub fn inverse(phi: &TorusMap) -> Result<TorusMap> {
    let mesh = phi.mesh;
    let tol = TOL_INV * mesh.period(0).min(mesh.period(1));
    let r = phi.resampler();
    let mut v0 = Vec::with_capacity(mesh.len());
    let mut v1 = Vec::with_capacity(mesh.len());
    let mut worst = (0usize, 0.0f64);
    let mut val = [0.0; 2];
    let mut grad = [[0.0; 2]; 2];
    for k in 0..mesh.len() {
        let x = mesh.point_at(k);
        let u = phi.displacement_at_index(k);
        let mut y = [x[0] - u[0], x[1] - u[1]];
        r.eval_grad(y, &mut val, &mut grad);
        let mut res = [y[0] + val[0] - x[0], y[1] + val[1] - x[1]];
        let mut norm = res[0].hypot(res[1]);
        let mut iter = 0;
        while norm > tol && iter < MAX_NEWTON_ITER {
            iter += 1;
            let a = 1.0 + grad[0][0];
            let b = grad[0][1];
            let c = grad[1][0];
            let d = 1.0 + grad[1][1];
            let det = a * d - b * c;
            let step = [(d * res[0] - b * res[1]) / det, (a * res[1] - c * res[0]) / det];
            let mut lambda = 1.0;
            loop {
                let yn = [y[0] - lambda * step[0], y[1] - lambda * step[1]];
                r.eval_grad(yn, &mut val, &mut grad);
                let rn = [yn[0] + val[0] - x[0], yn[1] + val[1] - x[1]];
                let nn = rn[0].hypot(rn[1]);
                if nn < norm || lambda < 1.0 / 64.0 {
                    y = yn;
                    res = rn;
                    norm = nn;
                    break;
                }
                lambda *= 0.5;
            }
        }
        if norm > worst.1 {
            worst = (k, norm);
        }
        v0.push(y[0] - x[0]);
        v1.push(y[1] - x[1]);
    }
    if worst.1 > tol {
        let (i, j) = mesh.coords(worst.0);
        return Err(FluxError::InverseDiverged { i, j, residual: worst.1 });
    }
    TorusMap::from_displacement(
        ScalarField::from_vec(mesh, v0),
        ScalarField::from_vec(mesh, v1),
        phi.scheme,
    )
    .map(|m| m.with_quality(phi.quality + worst.1))
}

/// Resample the components of `alpha` at the images of `phi`.
fn resample_at_images(phi: &TorusMap, fields: &[&ScalarField]) -> Vec<ScalarField> {
    let r = Resampler::new(phi.scheme, fields);
    r.resample(&phi.mesh, &phi.grid_images())
}

/// `(φ*α)_x = α_{φ(x)} ∘ dφ_x`.
pub fn pullback_oneform(phi: &TorusMap, alpha: &OneForm) -> OneForm {
    assert_eq!(phi.mesh(), alpha.mesh(), "map and form live on different meshes");
    let mesh = phi.mesh;
    let a = if alpha.component(0).max() == alpha.component(0).min()
        && alpha.component(1).max() == alpha.component(1).min()
    {
        vec![alpha.component(0).clone(), alpha.component(1).clone()]
    } else {
        resample_at_images(phi, &[alpha.component(0), alpha.component(1)])
    };
    let mut p0 = Vec::with_capacity(mesh.len());
    let mut p1 = Vec::with_capacity(mesh.len());
    for k in 0..mesh.len() {
        let j = phi.jacobian_at_index(k);
        let (a0, a1) = (a[0].values()[k], a[1].values()[k]);
        p0.push(j[0][0] * a0 + j[1][0] * a1);
        p1.push(j[0][1] * a0 + j[1][1] * a1);
    }
    OneForm::from_parts(ScalarField::from_vec(mesh, p0), ScalarField::from_vec(mesh, p1))
}

/// `f ∘ φ` on the grid.
pub fn pullback_scalar(phi: &TorusMap, f: &ScalarField) -> ScalarField {
    if f.max() == f.min() {
        return f.clone();
    }
    resample_at_images(phi, &[f]).remove(0)
}

/// `C_φ = (sup σ_max(dφ)²)^{1/2} (sup det d(φ⁻¹))^{1/2}` over the grid.
pub fn pullback_bound_constant(phi: &TorusMap) -> f64 {
    let mut sig: f64 = 0.0;
    let mut inv_det: f64 = 0.0;
    for k in 0..phi.mesh.len() {
        sig = sig.max(sigma_max_sq(phi.jacobian_at_index(k)));
        inv_det = inv_det.max(1.0 / phi.det.values()[k]);
    }
    (sig * inv_det).sqrt().max(1.0)
}

/// `(φ_*X)_y = dφ_{φ⁻¹y} X_{φ⁻¹y}`, given `φ⁻¹`.
pub fn pushforward_vector_with(phi: &TorusMap, phi_inv: &TorusMap, x: &VectorField) -> VectorField {
    let mesh = phi.mesh;
    let f = resample_at_images(
        phi_inv,
        &[&phi.jac[0], &phi.jac[1], &phi.jac[2], &phi.jac[3], x.component(0), x.component(1)],
    );
    let v = |m: usize, k: usize| f[m].values()[k];
    let (mut y0, mut y1) = (Vec::with_capacity(mesh.len()), Vec::with_capacity(mesh.len()));
    for k in 0..mesh.len() {
        y0.push(v(0, k) * v(4, k) + v(1, k) * v(5, k));
        y1.push(v(2, k) * v(4, k) + v(3, k) * v(5, k));
    }
    VectorField::from_parts(ScalarField::from_vec(mesh, y0), ScalarField::from_vec(mesh, y1))
}

pub fn pushforward_vector(phi: &TorusMap, x: &VectorField) -> Result<VectorField> {
    Ok(pushforward_vector_with(phi, &inverse(phi)?, x))
}

/// `sup_x d_g(φ(x), ψ(x))`.
pub fn forward_distance(phi: &TorusMap, psi: &TorusMap) -> f64 {
    let mesh = phi.mesh;
    (0..mesh.len())
        .map(|k| {
            let a = phi.displacement_at_index(k);
            let b = psi.displacement_at_index(k);
            let d = mesh.min_image_vec([a[0] - b[0], a[1] - b[1]]);
            d[0].hypot(d[1])
        })
        .fold(0.0, f64::max)
}

/// `d₀` from precomputed inverses.
pub fn c0_distance_with(phi: &TorusMap, phi_inv: &TorusMap, psi: &TorusMap, psi_inv: &TorusMap) -> f64 {
    forward_distance(phi, psi).max(forward_distance(phi_inv, psi_inv))
}

/// `d₀(φ, ψ) = max(sup d(φx, ψx), sup d(φ⁻¹x, ψ⁻¹x))`.
pub fn c0_distance(phi: &TorusMap, psi: &TorusMap) -> Result<f64> {
    phi.check_mesh(psi.mesh())?;
    Ok(c0_distance_with(phi, &inverse(phi)?, psi, &inverse(psi)?))
}

/// `sup |i_{φ_*Y}Ω - (φ⁻¹)*(i_Y Ω)|` for divergence-free `Y`.
pub fn volume_defect(phi: &TorusMap, y: &VectorField) -> Result<f64> {
    let residual = y.divergence().sup_abs();
    if residual > 1e-8 * (1.0 + y.sup_norm()) {
        return Err(FluxError::NotDivergenceFree { residual });
    }
    let omega = TwoForm::area(phi.mesh);
    let inv = inverse(phi)?;
    let lhs = pushforward_vector_with(phi, &inv, y).contract(&omega);
    let rhs = pullback_oneform(&inv, &y.contract(&omega));
    Ok(crate::exterior_calculus::sup_norm(&(&lhs - &rhs)))
}

/// `sup |(φ⁻¹)*[i_X(φ*Ω)] - i_{φ_*X}Ω|`, for any vector field `X`.
pub fn interior_pushforward_residual(phi: &TorusMap, x: &VectorField) -> Result<f64> {
    let omega = TwoForm::area(phi.mesh);
    let inv = inverse(phi)?;
    let pulled = TwoForm::new(phi.det.clone());
    let lhs = pullback_oneform(&inv, &x.contract(&pulled));
    let rhs = pushforward_vector_with(phi, &inv, x).contract(&omega);
    Ok(crate::exterior_calculus::sup_norm(&(&lhs - &rhs)))
}
