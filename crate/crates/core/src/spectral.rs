//! Fourier plumbing: 2-D transforms, spectral derivatives, trigonometric
//! interpolation.

use std::cell::RefCell;
use std::f64::consts::PI;

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

use crate::mesh::{GridMesh, Point};

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

/// In-place unnormalized 2-D FFT of an `n x n` row-major array.
pub(crate) fn fft2(data: &mut [Complex64], n: usize, inverse: bool) {
    debug_assert_eq!(data.len(), n * n);
    let fft = PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        if inverse {
            p.plan_fft_inverse(n)
        } else {
            p.plan_fft_forward(n)
        }
    });
    fft.process(data);
    let mut t = vec![Complex64::new(0.0, 0.0); n * n];
    transpose(data, &mut t, n);
    fft.process(&mut t);
    transpose(&t, data, n);
}

fn transpose(src: &[Complex64], dst: &mut [Complex64], n: usize) {
    const B: usize = 16;
    for ib in (0..n).step_by(B) {
        for jb in (0..n).step_by(B) {
            for i in ib..(ib + B).min(n) {
                for j in jb..(jb + B).min(n) {
                    dst[j * n + i] = src[i * n + j];
                }
            }
        }
    }
}

pub(crate) fn forward(values: &[f64], n: usize) -> Vec<Complex64> {
    let mut c: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fft2(&mut c, n, false);
    c
}

/// Inverse transform keeping the real part, normalized.
pub(crate) fn inverse_real(mut spec: Vec<Complex64>, n: usize) -> Vec<f64> {
    fft2(&mut spec, n, true);
    let s = 1.0 / (n * n) as f64;
    spec.iter().map(|c| c.re * s).collect()
}

/// Signed integer frequency of DFT index `idx`; the Nyquist index maps to `n/2`.
pub(crate) fn frequency(idx: usize, n: usize) -> i64 {
    if idx <= n / 2 {
        idx as i64
    } else {
        idx as i64 - n as i64
    }
}

/// Angular wavenumbers `2πk/L` for first derivatives (Nyquist zeroed).
pub(crate) fn wavenumbers(n: usize, l: f64) -> Vec<f64> {
    (0..n)
        .map(|idx| {
            if idx == n / 2 {
                0.0
            } else {
                2.0 * PI * frequency(idx, n) as f64 / l
            }
        })
        .collect()
}

/// Spectral partial derivative along `axis`.
pub(crate) fn derivative(values: &[f64], mesh: &GridMesh, axis: usize) -> Vec<f64> {
    let n = mesh.n();
    let mut spec = forward(values, n);
    apply_derivative(&mut spec, mesh, axis);
    inverse_real(spec, n)
}

pub(crate) fn apply_derivative(spec: &mut [Complex64], mesh: &GridMesh, axis: usize) {
    let n = mesh.n();
    let k = wavenumbers(n, mesh.period(axis));
    for i in 0..n {
        for j in 0..n {
            let kk = if axis == 0 { k[i] } else { k[j] };
            let c = spec[i * n + j];
            spec[i * n + j] = Complex64::new(-kk * c.im, kk * c.re);
        }
    }
}

/// Trigonometric interpolant sampled on a grid `factor` times finer.
pub(crate) fn upsample(values: &[f64], n: usize, factor: usize) -> Vec<f64> {
    if factor == 1 {
        return values.to_vec();
    }
    let m = n * factor;
    let spec = forward(values, n);
    // coarse index -> list of (fine index, weight); Nyquist is split evenly
    let map: Vec<Vec<(usize, f64)>> = (0..n)
        .map(|idx| {
            if idx < n / 2 {
                vec![(idx, 1.0)]
            } else if idx == n / 2 {
                vec![(n / 2, 0.5), (m - n / 2, 0.5)]
            } else {
                vec![(m - (n - idx), 1.0)]
            }
        })
        .collect();
    let mut fine = vec![Complex64::new(0.0, 0.0); m * m];
    for i in 0..n {
        for j in 0..n {
            let c = spec[i * n + j];
            for &(fi, wi) in &map[i] {
                for &(fj, wj) in &map[j] {
                    fine[fi * m + fj] += c * (wi * wj);
                }
            }
        }
    }
    fft2(&mut fine, m, true);
    let s = 1.0 / (n * n) as f64;
    fine.iter().map(|c| c.re * s).collect()
}

/// Exact evaluation of the trigonometric interpolant of a grid function at
/// arbitrary points (direct sum, `O(N^2)` per point).
#[derive(Debug, Clone)]
pub struct TrigSeries {
    n: usize,
    periods: [f64; 2],
    coef: Vec<Complex64>,
}

impl TrigSeries {
    pub fn new(values: &[f64], mesh: &GridMesh) -> Self {
        let n = mesh.n();
        let s = 1.0 / (n * n) as f64;
        let coef = forward(values, n).into_iter().map(|c| c * s).collect();
        Self {
            n,
            periods: mesh.periods(),
            coef,
        }
    }

    fn basis(&self, x: f64, axis: usize) -> (Vec<Complex64>, Vec<Complex64>) {
        let n = self.n;
        let l = self.periods[axis];
        let mut b = Vec::with_capacity(n);
        let mut db = Vec::with_capacity(n);
        for idx in 0..n {
            if idx == n / 2 {
                let w = PI * n as f64 / l;
                b.push(Complex64::new((w * x).cos(), 0.0));
                db.push(Complex64::new(-w * (w * x).sin(), 0.0));
            } else {
                let k = 2.0 * PI * frequency(idx, n) as f64 / l;
                let e = Complex64::from_polar(1.0, k * x);
                b.push(e);
                db.push(e * Complex64::new(0.0, k));
            }
        }
        (b, db)
    }

    pub fn eval(&self, p: Point) -> f64 {
        self.eval_grad(p).0
    }

    /// Value and gradient.
    pub fn eval_grad(&self, p: Point) -> (f64, [f64; 2]) {
        let n = self.n;
        let (bx, dbx) = self.basis(p[0], 0);
        let (by, dby) = self.basis(p[1], 1);
        let mut v = Complex64::new(0.0, 0.0);
        let mut gx = Complex64::new(0.0, 0.0);
        let mut gy = Complex64::new(0.0, 0.0);
        for i in 0..n {
            let row = &self.coef[i * n..(i + 1) * n];
            let mut r = Complex64::new(0.0, 0.0);
            let mut ry = Complex64::new(0.0, 0.0);
            for j in 0..n {
                r += row[j] * by[j];
                ry += row[j] * dby[j];
            }
            v += bx[i] * r;
            gx += dbx[i] * r;
            gy += bx[i] * ry;
        }
        (v.re, [gx.re, gy.re])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(mesh: &GridMesh, f: impl Fn(f64, f64) -> f64) -> Vec<f64> {
        mesh.points().map(|p| f(p[0], p[1])).collect()
    }

    #[test]
    fn derivative_of_mixed_mode() {
        let mesh = GridMesh::new(32, [1.0, 2.0]).unwrap();
        let f = sample(&mesh, |x, y| (2.0 * PI * x).sin() * (PI * y).cos());
        let dy = derivative(&f, &mesh, 1);
        let want = sample(&mesh, |x, y| -PI * (2.0 * PI * x).sin() * (PI * y).sin());
        let err = dy.iter().zip(&want).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(err < 1e-12, "{err}");
    }

    #[test]
    fn upsample_reproduces_band_limited_function() {
        let mesh = GridMesh::unit(16).unwrap();
        let f = |x: f64, y: f64| (2.0 * PI * (3.0 * x - 2.0 * y)).cos() + (2.0 * PI * 5.0 * y).sin();
        let fine = upsample(&sample(&mesh, f), 16, 4);
        let m = 64;
        let mut err: f64 = 0.0;
        for i in 0..m {
            for j in 0..m {
                let v = f(i as f64 / m as f64, j as f64 / m as f64);
                err = err.max((fine[i * m + j] - v).abs());
            }
        }
        assert!(err < 1e-13, "{err}");
    }

    #[test]
    fn trig_series_exact_off_grid() {
        let mesh = GridMesh::unit(16).unwrap();
        let f = |x: f64, y: f64| (2.0 * PI * (x + 2.0 * y)).sin();
        let t = TrigSeries::new(&sample(&mesh, f), &mesh);
        let p = [0.123, 0.777];
        let (v, g) = t.eval_grad(p);
        assert!((v - f(p[0], p[1])).abs() < 1e-13);
        let c = (2.0 * PI * (p[0] + 2.0 * p[1])).cos() * 2.0 * PI;
        assert!((g[0] - c).abs() < 1e-12 && (g[1] - 2.0 * c).abs() < 1e-12);
    }
}
