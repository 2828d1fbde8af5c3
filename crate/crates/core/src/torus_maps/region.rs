use serde::{Deserialize, Serialize};

use super::TorusMap;
use crate::error::{FluxError, Result};
use crate::mesh::{GridMesh, Point};

/// Open subsets used as displacement targets.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "lowercase")]
pub enum Region {
    /// `{x : x_k ∈ [lo_k, hi_k) mod L_k}`; a side of length ≥ `L_k` covers the axis.
    Rect { lo: [f64; 2], hi: [f64; 2] },
    Ball { center: Point, radius: f64 },
}

/// Outcome of [`Region::displaced_by`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DisplacementCheck {
    pub displaces: bool,
    /// Every sampled image left the region, but some by less than `margin`.
    pub marginal: bool,
    /// Smallest distance from a sampled image to the region.
    pub min_gap: f64,
    pub margin: f64,
}

impl Region {
    pub fn rect(lo: [f64; 2], hi: [f64; 2]) -> Result<Self> {
        if !(hi[0] > lo[0] && hi[1] > lo[1]) {
            return Err(FluxError::Precondition(format!("empty rectangle {lo:?}..{hi:?}")));
        }
        Ok(Region::Rect { lo, hi })
    }

    /// `{x : lo < x_0 < hi}`, all of the second axis.
    pub fn vertical_strip(mesh: &GridMesh, lo: f64, hi: f64) -> Result<Self> {
        Self::rect([lo, 0.0], [hi, mesh.period(1)])
    }

    pub fn ball(center: Point, radius: f64) -> Result<Self> {
        if !(radius > 0.0) {
            return Err(FluxError::Precondition(format!("radius {radius} must be positive")));
        }
        Ok(Region::Ball { center, radius })
    }

    fn covers_axis(&self, mesh: &GridMesh, k: usize) -> bool {
        match self {
            Region::Rect { lo, hi } => hi[k] - lo[k] >= mesh.period(k),
            Region::Ball { .. } => false,
        }
    }

    /// Lebesgue measure on the torus.
    pub fn measure(&self, mesh: &GridMesh) -> f64 {
        match self {
            Region::Rect { lo, hi } => {
                (hi[0] - lo[0]).min(mesh.period(0)) * (hi[1] - lo[1]).min(mesh.period(1))
            }
            Region::Ball { radius, .. } => {
                let r = radius.min(mesh.injectivity_radius());
                std::f64::consts::PI * r * r
            }
        }
    }

    /// Distance from `p` to the region (0 inside).
    pub fn distance(&self, mesh: &GridMesh, p: Point) -> f64 {
        match self {
            Region::Rect { lo, hi } => {
                let mut d2 = 0.0;
                for k in 0..2 {
                    if self.covers_axis(mesh, k) {
                        continue;
                    }
                    let l = mesh.period(k);
                    // offset of p from the interval start, reduced to [0, L)
                    let s = (p[k] - lo[k]).rem_euclid(l);
                    let w = hi[k] - lo[k];
                    if s >= w {
                        let e = (s - w).min(l - s);
                        d2 += e * e;
                    }
                }
                f64::sqrt(d2)
            }
            Region::Ball { center, radius } => (mesh.distance(*center, p) - radius).max(0.0),
        }
    }

    pub fn contains(&self, mesh: &GridMesh, p: Point) -> bool {
        match self {
            Region::Rect { lo, hi } => (0..2).all(|k| {
                self.covers_axis(mesh, k) || (p[k] - lo[k]).rem_euclid(mesh.period(k)) < hi[k] - lo[k]
            }),
            Region::Ball { center, radius } => mesh.distance(*center, p) < *radius,
        }
    }

    /// Cell-centred lattice of points inside the region with the given spacing.
    pub fn sample(&self, mesh: &GridMesh, spacing: f64) -> Vec<Point> {
        let (lo, hi) = match self {
            Region::Rect { lo, hi } => (
                *lo,
                [lo[0] + (hi[0] - lo[0]).min(mesh.period(0)), lo[1] + (hi[1] - lo[1]).min(mesh.period(1))],
            ),
            Region::Ball { center, radius } => {
                ([center[0] - radius, center[1] - radius], [center[0] + radius, center[1] + radius])
            }
        };
        let nx = ((hi[0] - lo[0]) / spacing).ceil().max(1.0) as usize;
        let ny = ((hi[1] - lo[1]) / spacing).ceil().max(1.0) as usize;
        let (sx, sy) = ((hi[0] - lo[0]) / nx as f64, (hi[1] - lo[1]) / ny as f64);
        let mut out = Vec::new();
        for a in 0..nx {
            for b in 0..ny {
                let p = mesh.wrap([lo[0] + (a as f64 + 0.5) * sx, lo[1] + (b as f64 + 0.5) * sy]);
                if self.contains(mesh, p) {
                    out.push(p);
                }
            }
        }
        out
    }

    /// Whether `ψ(U) ∩ U = ∅`, judged on a lattice of half the grid spacing
    /// with a safety margin of one grid cell plus the Lipschitz spread of the
    /// lattice.
    pub fn displaced_by(&self, psi: &TorusMap) -> DisplacementCheck {
        let mesh = psi.mesh();
        let spacing = 0.5 * mesh.spacing(0).min(mesh.spacing(1));
        let margin = mesh.spacing(0).max(mesh.spacing(1)) + psi.lipschitz() * spacing / 2f64.sqrt();
        let r = psi.resampler();
        let mut min_gap = f64::INFINITY;
        let mut u = [0.0; 2];
        for p in self.sample(mesh, spacing) {
            r.eval(p, &mut u);
            let q = [p[0] + u[0], p[1] + u[1]];
            min_gap = min_gap.min(self.distance(mesh, q));
        }
        let displaces = min_gap > margin;
        DisplacementCheck {
            displaces,
            marginal: !displaces && min_gap > 0.0,
            min_gap,
            margin,
        }
    }

    pub fn bounding_box(&self) -> ([f64; 2], [f64; 2]) {
        match self {
            Region::Rect { lo, hi } => (*lo, *hi),
            Region::Ball { center, radius } => {
                ([center[0] - radius, center[1] - radius], [center[0] + radius, center[1] + radius])
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mesh() -> GridMesh {
        GridMesh::unit(64).unwrap()
    }

    #[test]
    fn strip_distance_wraps_both_ways() {
        let m = mesh();
        let s = Region::vertical_strip(&m, 0.0, 0.25).unwrap();
        assert_eq!(s.distance(&m, [0.1, 0.7]), 0.0);
        assert!((s.distance(&m, [0.5, 0.3]) - 0.25).abs() < 1e-15);
        assert!((s.distance(&m, [0.9, 0.3]) - 0.1).abs() < 1e-15);
    }

    #[test]
    fn half_translation_displaces_quarter_strip() {
        let m = mesh();
        let s = Region::vertical_strip(&m, 0.0, 0.25).unwrap();
        assert!(s.displaced_by(&TorusMap::translation(m, [0.5, 0.0])).displaces);
        assert!(!s.displaced_by(&TorusMap::identity(m)).displaces);
        let h = Region::rect([0.0, 0.0], [1.0, 0.25]).unwrap();
        assert!(!h.displaced_by(&TorusMap::shear(m, 0.1)).displaces);
    }

    #[test]
    fn ball_samples_inside() {
        let m = mesh();
        let b = Region::ball([0.95, 0.5], 0.1).unwrap();
        let pts = b.sample(&m, 0.01);
        assert!(pts.len() > 250 && pts.iter().all(|p| b.contains(&m, *p)));
        assert!((b.measure(&m) - std::f64::consts::PI * 0.01).abs() < 1e-15);
    }
}
