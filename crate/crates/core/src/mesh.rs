//! Periodic rectangular grids modelling the flat torus.

use serde::{Deserialize, Serialize};

use crate::error::{FluxError, Result};

/// A point of the torus (or of its universal cover) in physical coordinates.
pub type Point = [f64; 2];

/// Uniform periodic grid on `R^2 / (L0 Z x L1 Z)` with the flat metric.
///
/// Grid point `(i, j)` sits at `(i L0 / N, j L1 / N)` and is stored at the
/// flat index `i * N + j`, so the second axis is contiguous.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridMesh {
    /// Points per axis.
    n: usize,
    /// Periods `L_k`.
    periods: [f64; 2],
}

impl GridMesh {
    pub const DIMENSION: usize = 2;

    pub fn new(n: usize, periods: [f64; 2]) -> Result<Self> {
        if n < 16 || !n.is_power_of_two() {
            return Err(FluxError::InvalidMesh(format!(
                "resolution {n} must be a power of two and at least 16"
            )));
        }
        if periods.iter().any(|l| !(l.is_finite() && *l > 0.0)) {
            return Err(FluxError::InvalidMesh(format!(
                "periods {periods:?} must be positive"
            )));
        }
        Ok(Self { n, periods })
    }

    /// The unit torus with `n` points per axis.
    pub fn unit(n: usize) -> Result<Self> {
        Self::new(n, [1.0, 1.0])
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dimension(&self) -> usize {
        Self::DIMENSION
    }

    pub fn periods(&self) -> [f64; 2] {
        self.periods
    }

    pub fn period(&self, axis: usize) -> f64 {
        self.periods[axis]
    }

    /// Number of grid points.
    pub fn len(&self) -> usize {
        self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        self.periods[axis] / self.n as f64
    }

    pub fn cell_area(&self) -> f64 {
        self.spacing(0) * self.spacing(1)
    }

    pub fn volume(&self) -> f64 {
        self.periods[0] * self.periods[1]
    }

    /// Orientation of `dx ∧ dy`.
    pub fn orientation(&self) -> f64 {
        1.0
    }

    pub fn injectivity_radius(&self) -> f64 {
        self.periods[0].min(self.periods[1]) / 2.0
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        i * self.n + j
    }

    pub fn coords(&self, idx: usize) -> (usize, usize) {
        (idx / self.n, idx % self.n)
    }

    pub fn point(&self, i: usize, j: usize) -> Point {
        [i as f64 * self.spacing(0), j as f64 * self.spacing(1)]
    }

    pub fn point_at(&self, idx: usize) -> Point {
        let (i, j) = self.coords(idx);
        self.point(i, j)
    }

    /// Iterate over all grid points in storage order.
    pub fn points(&self) -> impl Iterator<Item = Point> + '_ {
        (0..self.len()).map(move |idx| self.point_at(idx))
    }

    /// Reduce a point into the fundamental domain `[0, L0) x [0, L1)`.
    pub fn wrap(&self, p: Point) -> Point {
        [wrap_into(p[0], self.periods[0]), wrap_into(p[1], self.periods[1])]
    }

    /// Minimal-image representative of a displacement component, in `(-L/2, L/2]`.
    pub fn min_image(&self, d: f64, axis: usize) -> f64 {
        min_image(d, self.periods[axis])
    }

    pub fn min_image_vec(&self, d: [f64; 2]) -> [f64; 2] {
        [self.min_image(d[0], 0), self.min_image(d[1], 1)]
    }

    /// Flat torus distance.
    pub fn distance(&self, p: Point, q: Point) -> f64 {
        let d = self.min_image_vec([q[0] - p[0], q[1] - p[1]]);
        d[0].hypot(d[1])
    }
}

pub(crate) fn wrap_into(x: f64, l: f64) -> f64 {
    let r = x.rem_euclid(l);
    if r >= l {
        0.0
    } else {
        r
    }
}

/// Representative of `d mod l` in `(-l/2, l/2]`.
pub fn min_image(d: f64, l: f64) -> f64 {
    let mut r = d - l * (d / l).round();
    if r <= -l / 2.0 {
        r += l;
    } else if r > l / 2.0 {
        r -= l;
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_small_or_odd_resolution() {
        assert!(GridMesh::unit(8).is_err());
        assert!(GridMesh::unit(24).is_err());
        assert!(GridMesh::new(16, [1.0, 0.0]).is_err());
    }

    #[test]
    fn volume_and_radius() {
        let m = GridMesh::new(32, [2.0, 0.5]).unwrap();
        assert_eq!(m.volume(), 1.0);
        assert_eq!(m.injectivity_radius(), 0.25);
        assert_eq!(m.point(16, 16), [1.0, 0.25]);
    }

    #[test]
    fn min_image_ties_go_up() {
        assert_eq!(min_image(-0.5, 1.0), 0.5);
        assert_eq!(min_image(0.5, 1.0), 0.5);
        assert!((min_image(0.7, 1.0) + 0.3).abs() < 1e-15);
        assert!((min_image(-3.2, 1.0) + 0.2).abs() < 1e-12);
    }

    #[test]
    fn torus_distance_wraps() {
        let m = GridMesh::unit(16).unwrap();
        assert!((m.distance([0.05, 0.0], [0.95, 0.0]) - 0.1).abs() < 1e-15);
    }
}
