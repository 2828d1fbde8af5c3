use std::ops::{Add, Mul, Neg, Sub};
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{FluxError, Result};
use crate::mesh::{GridMesh, Point};
use crate::quad::{mean, pairwise_sum};
use crate::spectral;

/// Real grid function on a [`GridMesh`].
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    mesh: GridMesh,
    values: Vec<f64>,
}

impl ScalarField {
    /// Wrap grid values; rejects wrong lengths and non-finite entries.
    pub fn new(mesh: GridMesh, values: Vec<f64>) -> Result<Self> {
        if values.len() != mesh.len() {
            return Err(FluxError::MeshMismatch(format!(
                "expected {} values, got {}",
                mesh.len(),
                values.len()
            )));
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(FluxError::NonFinite { index });
        }
        Ok(Self { mesh, values })
    }

    pub(crate) fn from_vec(mesh: GridMesh, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), mesh.len());
        Self { mesh, values }
    }

    pub fn zeros(mesh: GridMesh) -> Self {
        Self::constant(mesh, 0.0)
    }

    pub fn constant(mesh: GridMesh, c: f64) -> Self {
        Self::from_vec(mesh, vec![c; mesh.len()])
    }

    /// Sample `f` at the grid points.
    pub fn from_fn(mesh: GridMesh, f: impl Fn(Point) -> f64) -> Self {
        Self::from_vec(mesh, mesh.points().map(f).collect())
    }

    pub fn mesh(&self) -> &GridMesh {
        &self.mesh
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[self.mesh.index(i, j)]
    }

    pub fn mean(&self) -> f64 {
        mean(&self.values)
    }

    /// `∫_M f dVol` by the periodic trapezoid rule.
    pub fn integral(&self) -> f64 {
        pairwise_sum(&self.values) * self.mesh.cell_area()
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn sup_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Index of the largest absolute value (lowest index on ties).
    pub fn argmax_abs(&self) -> usize {
        let mut best = 0;
        for (k, v) in self.values.iter().enumerate() {
            if v.abs() > self.values[best].abs() {
                best = k;
            }
        }
        best
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self::from_vec(self.mesh, self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn zip_with(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Self {
        assert_eq!(self.mesh, other.mesh, "fields live on different meshes");
        Self::from_vec(
            self.mesh,
            self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect(),
        )
    }

    /// Subtract the mean.
    pub fn centered(&self) -> Self {
        let m = self.mean();
        self.map(|v| v - m)
    }

    pub fn partial(&self, axis: usize) -> Self {
        Self::from_vec(self.mesh, spectral::derivative(&self.values, &self.mesh, axis))
    }
}

impl Add for &ScalarField {
    type Output = ScalarField;
    fn add(self, rhs: Self) -> ScalarField {
        self.zip_with(rhs, |a, b| a + b)
    }
}

impl Sub for &ScalarField {
    type Output = ScalarField;
    fn sub(self, rhs: Self) -> ScalarField {
        self.zip_with(rhs, |a, b| a - b)
    }
}

impl Mul<f64> for &ScalarField {
    type Output = ScalarField;
    fn mul(self, s: f64) -> ScalarField {
        self.map(|v| v * s)
    }
}

impl Neg for &ScalarField {
    type Output = ScalarField;
    fn neg(self) -> ScalarField {
        self.map(|v| -v)
    }
}

/// `a_0 dx + a_1 dy`.
#[derive(Debug, Clone)]
pub struct OneForm {
    comps: [ScalarField; 2],
    closedness: OnceLock<f64>,
}

impl PartialEq for OneForm {
    fn eq(&self, other: &Self) -> bool {
        self.comps == other.comps
    }
}

impl OneForm {
    pub fn new(a0: ScalarField, a1: ScalarField) -> Result<Self> {
        if a0.mesh() != a1.mesh() {
            return Err(FluxError::MeshMismatch("one-form components differ".into()));
        }
        Ok(Self::from_parts(a0, a1))
    }

    pub(crate) fn from_parts(a0: ScalarField, a1: ScalarField) -> Self {
        Self {
            comps: [a0, a1],
            closedness: OnceLock::new(),
        }
    }

    pub fn zeros(mesh: GridMesh) -> Self {
        Self::constant(mesh, [0.0, 0.0])
    }

    /// The harmonic form `c_0 dx + c_1 dy`.
    pub fn constant(mesh: GridMesh, c: [f64; 2]) -> Self {
        Self::from_parts(ScalarField::constant(mesh, c[0]), ScalarField::constant(mesh, c[1]))
    }

    pub fn from_fn(mesh: GridMesh, f: impl Fn(Point) -> [f64; 2]) -> Self {
        let vals: Vec<[f64; 2]> = mesh.points().map(f).collect();
        Self::from_parts(
            ScalarField::from_vec(mesh, vals.iter().map(|v| v[0]).collect()),
            ScalarField::from_vec(mesh, vals.iter().map(|v| v[1]).collect()),
        )
    }

    pub fn mesh(&self) -> &GridMesh {
        self.comps[0].mesh()
    }

    pub fn component(&self, k: usize) -> &ScalarField {
        &self.comps[k]
    }

    pub fn components(&self) -> &[ScalarField; 2] {
        &self.comps
    }

    pub fn into_components(self) -> [ScalarField; 2] {
        self.comps
    }

    /// Pointwise value at grid index `idx`.
    pub fn at_index(&self, idx: usize) -> [f64; 2] {
        [self.comps[0].values()[idx], self.comps[1].values()[idx]]
    }

    /// `sup |dα|`, computed once.
    pub fn closedness_residual(&self) -> f64 {
        *self
            .closedness
            .get_or_init(|| super::exterior_derivative(self).density().sup_abs())
    }

    /// `1e-8 (1 + |α|_0)`.
    pub fn closed_tolerance(&self) -> f64 {
        1e-8 * (1.0 + super::sup_norm(self))
    }

    pub fn is_closed(&self) -> bool {
        self.closedness_residual() <= self.closed_tolerance()
    }

    pub fn map_components(&self, f: impl Fn(&ScalarField) -> ScalarField) -> Self {
        Self::from_parts(f(&self.comps[0]), f(&self.comps[1]))
    }

    pub fn zip_with(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Self {
        Self::from_parts(
            self.comps[0].zip_with(&other.comps[0], &f),
            self.comps[1].zip_with(&other.comps[1], &f),
        )
    }

    /// Constant components, if the form is harmonic to round-off.
    pub fn harmonic_coefficients(&self) -> [f64; 2] {
        [self.comps[0].mean(), self.comps[1].mean()]
    }

    /// `∫ α ∧ β` for the density `a_0 b_1 - a_1 b_0`.
    pub fn wedge_integral(&self, other: &Self) -> f64 {
        let rho = self.comps[0]
            .zip_with(&other.comps[1], |a, b| a * b)
            .zip_with(&self.comps[1].zip_with(&other.comps[0], |a, b| a * b), |p, q| p - q);
        rho.integral()
    }

    /// L² inner product `∫ <α, β> dVol`.
    pub fn inner(&self, other: &Self) -> f64 {
        let s = self.comps[0]
            .zip_with(&other.comps[0], |a, b| a * b)
            .zip_with(&self.comps[1].zip_with(&other.comps[1], |a, b| a * b), |p, q| p + q);
        s.integral()
    }
}

impl Add for &OneForm {
    type Output = OneForm;
    fn add(self, rhs: Self) -> OneForm {
        self.zip_with(rhs, |a, b| a + b)
    }
}

impl Sub for &OneForm {
    type Output = OneForm;
    fn sub(self, rhs: Self) -> OneForm {
        self.zip_with(rhs, |a, b| a - b)
    }
}

impl Mul<f64> for &OneForm {
    type Output = OneForm;
    fn mul(self, s: f64) -> OneForm {
        self.map_components(|c| c * s)
    }
}

/// `ρ dx ∧ dy`.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoForm {
    density: ScalarField,
}

impl TwoForm {
    pub fn new(density: ScalarField) -> Self {
        Self { density }
    }

    /// The flat area form `dx ∧ dy`, which is both ω and Ω on the 2-torus.
    pub fn area(mesh: GridMesh) -> Self {
        Self::new(ScalarField::constant(mesh, 1.0))
    }

    pub fn mesh(&self) -> &GridMesh {
        self.density.mesh()
    }

    pub fn density(&self) -> &ScalarField {
        &self.density
    }

    pub fn integral(&self) -> f64 {
        self.density.integral()
    }

    /// Whether the density is spatially constant.
    pub fn is_uniform(&self) -> bool {
        self.density.max() - self.density.min() <= 1e-14 * (1.0 + self.density.sup_abs())
    }
}

/// Vector field `X = X^0 ∂_x + X^1 ∂_y`.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    comps: [ScalarField; 2],
}

impl VectorField {
    pub fn new(x0: ScalarField, x1: ScalarField) -> Result<Self> {
        if x0.mesh() != x1.mesh() {
            return Err(FluxError::MeshMismatch("vector field components differ".into()));
        }
        Ok(Self { comps: [x0, x1] })
    }

    pub(crate) fn from_parts(x0: ScalarField, x1: ScalarField) -> Self {
        Self { comps: [x0, x1] }
    }

    pub fn zeros(mesh: GridMesh) -> Self {
        Self::constant(mesh, [0.0, 0.0])
    }

    pub fn constant(mesh: GridMesh, c: [f64; 2]) -> Self {
        Self::from_parts(ScalarField::constant(mesh, c[0]), ScalarField::constant(mesh, c[1]))
    }

    pub fn from_fn(mesh: GridMesh, f: impl Fn(Point) -> [f64; 2]) -> Self {
        let f = OneForm::from_fn(mesh, f);
        let [a, b] = f.into_components();
        Self::from_parts(a, b)
    }

    /// The field `(∂_y H, -∂_x H)`, so that `i_X (dx∧dy) = dH`.
    pub fn hamiltonian(h: &ScalarField) -> Self {
        Self::from_parts(h.partial(1), -&h.partial(0))
    }

    pub fn mesh(&self) -> &GridMesh {
        self.comps[0].mesh()
    }

    pub fn component(&self, k: usize) -> &ScalarField {
        &self.comps[k]
    }

    pub fn components(&self) -> &[ScalarField; 2] {
        &self.comps
    }

    pub fn at_index(&self, idx: usize) -> [f64; 2] {
        [self.comps[0].values()[idx], self.comps[1].values()[idx]]
    }

    /// `i_X (ρ dx∧dy) = ρ (X^0 dy - X^1 dx)`.
    pub fn contract(&self, omega: &TwoForm) -> OneForm {
        let rho = omega.density();
        OneForm::from_parts(
            self.comps[1].zip_with(rho, |x, r| -x * r),
            self.comps[0].zip_with(rho, |x, r| x * r),
        )
    }

    /// Pointwise-norm supremum.
    pub fn sup_norm(&self) -> f64 {
        self.comps[0]
            .values()
            .iter()
            .zip(self.comps[1].values())
            .fold(0.0, |m, (a, b)| m.max(a.hypot(*b)))
    }

    pub fn divergence(&self) -> ScalarField {
        &self.comps[0].partial(0) + &self.comps[1].partial(1)
    }

    pub fn zip_with(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Self {
        Self::from_parts(
            self.comps[0].zip_with(&other.comps[0], &f),
            self.comps[1].zip_with(&other.comps[1], &f),
        )
    }
}

impl Sub for &VectorField {
    type Output = VectorField;
    fn sub(self, rhs: Self) -> VectorField {
        self.zip_with(rhs, |a, b| a - b)
    }
}

/// Periods of a closed 1-form over the two generator loops.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CohomologyClass1 {
    pub periods: [f64; 2],
}

impl CohomologyClass1 {
    pub fn zero() -> Self {
        Self { periods: [0.0, 0.0] }
    }

    pub fn max_abs(&self) -> f64 {
        self.periods[0].abs().max(self.periods[1].abs())
    }

    pub fn sub(&self, o: &Self) -> Self {
        Self {
            periods: [self.periods[0] - o.periods[0], self.periods[1] - o.periods[1]],
        }
    }

    pub fn add(&self, o: &Self) -> Self {
        Self {
            periods: [self.periods[0] + o.periods[0], self.periods[1] + o.periods[1]],
        }
    }
}

/// Winding vector of a mass flow.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HomologyClass1 {
    pub components: [f64; 2],
}

/// `α = dF + δβ + h`.
#[derive(Debug, Clone)]
pub struct HodgeSplit {
    /// Zero-mean potential `F`.
    pub potential: ScalarField,
    pub exact: OneForm,
    pub coexact: OneForm,
    /// Stream function `b` with `coexact = ∂_y b dx - ∂_x b dy`.
    pub coexact_potential: ScalarField,
    pub harmonic: OneForm,
}

impl HodgeSplit {
    pub fn harmonic_coefficients(&self) -> [f64; 2] {
        self.harmonic.harmonic_coefficients()
    }
}
