//! Spectral exterior calculus on the flat 2-torus.
//!
//! Derivatives are exact on trigonometric polynomials below the Nyquist
//! frequency, and so is the quadrature; `δ = -div` so that `δd` is the
//! non-negative Laplacian.

mod fields;
pub mod io;

use rustfft::num_complex::Complex64;

pub use fields::{
    CohomologyClass1, HodgeSplit, HomologyClass1, OneForm, ScalarField, TwoForm, VectorField,
};

use crate::error::{FluxError, Result};
use crate::spectral;

/// Types with an exterior derivative.
pub trait ExteriorDerivative {
    type Output;
    fn exterior_derivative(&self) -> Self::Output;
}

impl ExteriorDerivative for ScalarField {
    type Output = OneForm;
    fn exterior_derivative(&self) -> OneForm {
        OneForm::from_parts(self.partial(0), self.partial(1))
    }
}

impl ExteriorDerivative for OneForm {
    type Output = TwoForm;
    fn exterior_derivative(&self) -> TwoForm {
        // one forward transform per component, both partials in spectrum
        let mesh = *self.mesh();
        let n = mesh.n();
        let mut s0 = spectral::forward(self.component(0).values(), n);
        let mut s1 = spectral::forward(self.component(1).values(), n);
        spectral::apply_derivative(&mut s0, &mesh, 1);
        spectral::apply_derivative(&mut s1, &mesh, 0);
        for (a, b) in s1.iter_mut().zip(&s0) {
            *a -= *b;
        }
        TwoForm::new(ScalarField::from_vec(mesh, spectral::inverse_real(s1, n)))
    }
}

/// `d f` or `d α`.
pub fn exterior_derivative<T: ExteriorDerivative>(x: &T) -> T::Output {
    x.exterior_derivative()
}

/// `δα = -(∂_x a_0 + ∂_y a_1)`.
pub fn codifferential(alpha: &OneForm) -> ScalarField {
    let div = &alpha.component(0).partial(0) + &alpha.component(1).partial(1);
    -&div
}

/// `|α|_0 = max_x |α_x|`.
pub fn sup_norm(alpha: &OneForm) -> f64 {
    let a = alpha.component(0).values();
    let b = alpha.component(1).values();
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max(x.hypot(*y)))
}

/// `‖α‖_{L²} = (∫ |α|² dVol)^{1/2}`.
pub fn l2_norm(alpha: &OneForm) -> f64 {
    alpha.inner(alpha).max(0.0).sqrt()
}

/// `1e-8 (1 + ‖α‖_{L²})`.
pub fn hodge_tolerance(alpha: &OneForm) -> f64 {
    1e-8 * (1.0 + l2_norm(alpha))
}

/// Split `α = dF + δβ + h` in Fourier space.
pub fn hodge_decompose(alpha: &OneForm) -> HodgeSplit {
    let mesh = *alpha.mesh();
    let n = mesh.n();
    let s0 = spectral::forward(alpha.component(0).values(), n);
    let s1 = spectral::forward(alpha.component(1).values(), n);
    let kx = spectral::wavenumbers(n, mesh.period(0));
    let ky = spectral::wavenumbers(n, mesh.period(1));
    let zero = Complex64::new(0.0, 0.0);
    let i = Complex64::new(0.0, 1.0);
    let mut f = vec![zero; n * n];
    let mut b = vec![zero; n * n];
    let mut e0 = vec![zero; n * n];
    let mut e1 = vec![zero; n * n];
    let mut c0 = s0.clone();
    let mut c1 = s1.clone();
    for p in 0..n {
        for q in 0..n {
            let idx = p * n + q;
            if idx == 0 {
                c0[0] = zero;
                c1[0] = zero;
                continue;
            }
            let (k0, k1) = (kx[p], ky[q]);
            let k2 = k0 * k0 + k1 * k1;
            if k2 == 0.0 {
                // pure Nyquist modes stay in the coexact remainder
                continue;
            }
            let div = s0[idx] * k0 + s1[idx] * k1;
            let fh = -i * div / k2;
            f[idx] = fh;
            e0[idx] = i * k0 * fh;
            e1[idx] = i * k1 * fh;
            c0[idx] = s0[idx] - e0[idx];
            c1[idx] = s1[idx] - e1[idx];
            b[idx] = -i * (c0[idx] * k1 - c1[idx] * k0) / k2;
        }
    }
    let harmonic = [s0[0].re / (n * n) as f64, s1[0].re / (n * n) as f64];
    let field = |v: Vec<Complex64>| ScalarField::from_vec(mesh, spectral::inverse_real(v, n));
    HodgeSplit {
        potential: field(f),
        exact: OneForm::from_parts(field(e0), field(e1)),
        coexact: OneForm::from_parts(field(c0), field(c1)),
        coexact_potential: field(b),
        harmonic: OneForm::constant(mesh, harmonic),
    }
}

/// Integrals over the two generator loops (averaged over parallel loops).
pub fn periods(alpha: &OneForm) -> Result<CohomologyClass1> {
    let residual = alpha.closedness_residual();
    let tolerance = alpha.closed_tolerance();
    if residual > tolerance {
        return Err(FluxError::NotClosed { residual, tolerance });
    }
    Ok(periods_unchecked(alpha))
}

pub(crate) fn periods_unchecked(alpha: &OneForm) -> CohomologyClass1 {
    let p = alpha.mesh().periods();
    let h = alpha.harmonic_coefficients();
    CohomologyClass1 {
        periods: [h[0] * p[0], h[1] * p[1]],
    }
}

/// `max f - min f`.
pub fn oscillation(f: &ScalarField) -> f64 {
    f.max() - f.min()
}
