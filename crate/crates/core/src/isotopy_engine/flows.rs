//! Time-dependent vector fields that can be integrated pointwise.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::exterior_calculus::{ScalarField, VectorField};
use crate::mesh::{min_image, GridMesh, Point};
use crate::torus_maps::{Interpolation, Resampler};

/// A velocity field `X(t, p)` evaluated on the universal cover.
pub trait FlowField: Send + Sync {
    fn velocity(&self, t: f64, p: Point) -> [f64; 2];

    /// Sample the field on the grid at time `t`.
    fn sample(&self, mesh: &GridMesh, t: f64) -> VectorField {
        VectorField::from_fn(*mesh, |p| self.velocity(t, p))
    }

    /// Short description, for reports.
    fn label(&self) -> String {
        "field".into()
    }
}

impl fmt::Debug for dyn FlowField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FlowField({})", self.label())
    }
}

/// The constant field `(c, d)`; its flow is the translation path.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstantFlow(pub [f64; 2]);

impl FlowField for ConstantFlow {
    fn velocity(&self, _t: f64, _p: Point) -> [f64; 2] {
        self.0
    }

    fn label(&self) -> String {
        format!("constant({}, {})", self.0[0], self.0[1])
    }
}

/// One analytic term of a Hamiltonian.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "term", rename_all = "snake_case")]
pub enum HamTerm {
    /// `a cos(2π(k₀x/L₀ + k₁y/L₁) + phase) (1 + rate t)`.
    Fourier {
        k: [i32; 2],
        amplitude: f64,
        #[serde(default)]
        phase: f64,
        #[serde(default)]
        rate: f64,
    },
    /// `a (1 - r²/R²)^p` inside the ball of radius `R`, zero outside.
    Bump {
        center: Point,
        radius: f64,
        amplitude: f64,
        #[serde(default = "default_bump_power")]
        power: i32,
    },
    /// `a (1 - d²/w²)^p cos(2π n x_o/L_o + phase)` with `d` the distance to
    /// the line `x_axis = center` and `x_o` the other coordinate.
    Ridge {
        axis: usize,
        center: f64,
        half_width: f64,
        amplitude: f64,
        #[serde(default = "default_bump_power")]
        power: i32,
        mode: i32,
        #[serde(default)]
        phase: f64,
    },
}

/// Default exponent of the polynomial bump.
pub const BUMP_POWER: i32 = 12;

fn default_bump_power() -> i32 {
    BUMP_POWER
}

/// `H(t, p) = Σ terms`, with `X_H = (∂_y H, -∂_x H)` so that `i_{X_H} ω = dH`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hamiltonian {
    pub periods: [f64; 2],
    pub terms: Vec<HamTerm>,
}

impl Hamiltonian {
    pub fn new(mesh: &GridMesh, terms: Vec<HamTerm>) -> Self {
        Self {
            periods: mesh.periods(),
            terms,
        }
    }

    fn fourier(k: [i32; 2], amplitude: f64, phase: f64) -> HamTerm {
        HamTerm::Fourier { k, amplitude, phase, rate: 0.0 }
    }

    /// `-(ε/2π) cos 2πy`, whose time-1 map is the shear `S_ε`.
    pub fn shear(mesh: &GridMesh, eps: f64) -> Self {
        Self::new(mesh, vec![Self::fourier([0, 1], -eps / (2.0 * PI), 0.0)])
    }

    /// `(ε/2π) cos 2πx`, whose time-1 map is `(x, y + ε sin 2πx)`.
    pub fn twist(mesh: &GridMesh, eps: f64) -> Self {
        Self::new(mesh, vec![Self::fourier([1, 0], eps / (2.0 * PI), 0.0)])
    }

    /// `(ε/2π) sin 2πx sin 2πy`.
    pub fn cellular(mesh: &GridMesh, eps: f64) -> Self {
        let a = eps / (4.0 * PI);
        Self::new(mesh, vec![Self::fourier([1, -1], a, 0.0), Self::fourier([1, 1], -a, 0.0)])
    }

    /// A fixed smooth non-autonomous mixture, scaled by `eps`.
    pub fn wobble(mesh: &GridMesh, eps: f64) -> Self {
        let a = eps / (2.0 * PI);
        Self::new(
            mesh,
            vec![
                HamTerm::Fourier { k: [1, 1], amplitude: 0.6 * a, phase: 0.3, rate: 0.5 },
                HamTerm::Fourier { k: [2, -1], amplitude: 0.25 * a, phase: 1.1, rate: -0.4 },
                HamTerm::Fourier { k: [0, 1], amplitude: 0.4 * a, phase: -0.7, rate: 0.0 },
            ],
        )
    }

    /// Bump of height `amplitude` supported in the ball `B(center, radius)`.
    pub fn bump(mesh: &GridMesh, center: Point, radius: f64, amplitude: f64) -> Self {
        Self::new(mesh, vec![HamTerm::Bump { center, radius, amplitude, power: BUMP_POWER }])
    }

    /// Random Fourier Hamiltonian with modes `|k|_∞ ≤ modes`, normalised so
    /// that `sup |X_H| ≤ amplitude`.
    pub fn random(mesh: &GridMesh, seed: u64, modes: i32, amplitude: f64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut terms = Vec::new();
        let mut bound = 0.0;
        for k0 in -modes..=modes {
            for k1 in 0..=modes {
                if k1 == 0 && k0 <= 0 {
                    continue;
                }
                let a: f64 = rng.gen_range(-1.0..1.0) / ((k0 * k0 + k1 * k1) as f64);
                let phase: f64 = rng.gen_range(0.0..2.0 * PI);
                let rate: f64 = rng.gen_range(-0.5..0.5);
                bound += a.abs()
                    * 2.0
                    * PI
                    * (((k0 as f64) / mesh.period(0)).powi(2) + ((k1 as f64) / mesh.period(1)).powi(2)).sqrt()
                    * (1.0 + rate.abs());
                terms.push(HamTerm::Fourier { k: [k0, k1], amplitude: a, phase, rate });
            }
        }
        let s = if bound > 0.0 { amplitude / bound } else { 0.0 };
        for t in &mut terms {
            if let HamTerm::Fourier { amplitude: a, .. } = t {
                *a *= s;
            }
        }
        Self::new(mesh, terms)
    }

    pub fn scaled(&self, s: f64) -> Self {
        let mut h = self.clone();
        for t in &mut h.terms {
            match t {
                HamTerm::Fourier { amplitude, .. }
                | HamTerm::Bump { amplitude, .. }
                | HamTerm::Ridge { amplitude, .. } => *amplitude *= s,
            }
        }
        h
    }

    pub fn is_autonomous(&self) -> bool {
        self.terms
            .iter()
            .all(|t| !matches!(t, HamTerm::Fourier { rate, .. } if *rate != 0.0))
    }

    /// Value and gradient.
    pub fn eval(&self, t: f64, p: Point) -> (f64, [f64; 2]) {
        let mut v = 0.0;
        let mut g = [0.0; 2];
        for term in &self.terms {
            match *term {
                HamTerm::Fourier { k, amplitude, phase, rate } => {
                    let w0 = 2.0 * PI * k[0] as f64 / self.periods[0];
                    let w1 = 2.0 * PI * k[1] as f64 / self.periods[1];
                    let (s, c) = (w0 * p[0] + w1 * p[1] + phase).sin_cos();
                    let a = amplitude * (1.0 + rate * t);
                    v += a * c;
                    g[0] -= a * w0 * s;
                    g[1] -= a * w1 * s;
                }
                HamTerm::Bump { center, radius, amplitude, power } => {
                    let d = [
                        min_image(p[0] - center[0], self.periods[0]),
                        min_image(p[1] - center[1], self.periods[1]),
                    ];
                    let s = (d[0] * d[0] + d[1] * d[1]) / (radius * radius);
                    if s < 1.0 {
                        let q = (1.0 - s).powi(power - 1);
                        let db_ds = -amplitude * power as f64 * q;
                        v += amplitude * q * (1.0 - s);
                        g[0] += db_ds * 2.0 * d[0] / (radius * radius);
                        g[1] += db_ds * 2.0 * d[1] / (radius * radius);
                    }
                }
                HamTerm::Ridge { axis, center, half_width, amplitude, power, mode, phase } => {
                    let o = 1 - axis;
                    let d = min_image(p[axis] - center, self.periods[axis]) / half_width;
                    if d.abs() < 1.0 {
                        let s = d * d;
                        let q = (1.0 - s).powi(power - 1);
                        let w = 2.0 * PI * mode as f64 / self.periods[o];
                        let (sn, cs) = (w * p[o] + phase).sin_cos();
                        let b = amplitude * q * (1.0 - s);
                        v += b * cs;
                        g[axis] += -amplitude * power as f64 * q * 2.0 * d / half_width * cs;
                        g[o] -= b * w * sn;
                    }
                }
            }
        }
        (v, g)
    }

    /// `H(t, ·)` on the grid.
    pub fn potential(&self, mesh: &GridMesh, t: f64) -> ScalarField {
        ScalarField::from_fn(*mesh, |p| self.eval(t, p).0)
    }
}

impl FlowField for Hamiltonian {
    fn velocity(&self, t: f64, p: Point) -> [f64; 2] {
        let (_, g) = self.eval(t, p);
        [g[1], -g[0]]
    }

    fn label(&self) -> String {
        format!("hamiltonian({} terms)", self.terms.len())
    }
}

/// Pointwise sum of fields.
pub struct SumFlow(pub Vec<Arc<dyn FlowField>>);

impl FlowField for SumFlow {
    fn velocity(&self, t: f64, p: Point) -> [f64; 2] {
        self.0.iter().fold([0.0, 0.0], |acc, f| {
            let v = f.velocity(t, p);
            [acc[0] + v[0], acc[1] + v[1]]
        })
    }

    fn label(&self) -> String {
        let parts: Vec<String> = self.0.iter().map(|f| f.label()).collect();
        parts.join(" + ")
    }
}

/// Monotone reparametrizations `r : [0,1] → [0,1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "profile", rename_all = "snake_case")]
pub enum TimeProfile {
    Linear,
    /// `r(t) = t + a sin(2πt)/(2π)`, monotone for `|a| < 1`.
    Sinusoidal { a: f64 },
}

impl TimeProfile {
    pub fn value(&self, t: f64) -> f64 {
        match *self {
            TimeProfile::Linear => t,
            TimeProfile::Sinusoidal { a } => t + a * (2.0 * PI * t).sin() / (2.0 * PI),
        }
    }

    pub fn derivative(&self, t: f64) -> f64 {
        match *self {
            TimeProfile::Linear => 1.0,
            TimeProfile::Sinusoidal { a } => 1.0 + a * (2.0 * PI * t).cos(),
        }
    }
}

/// The field generating `t ↦ φ_{r(t)}`: `r'(t) X(r(t), p)`.
pub struct Reparametrized {
    pub inner: Arc<dyn FlowField>,
    pub profile: TimeProfile,
}

impl FlowField for Reparametrized {
    fn velocity(&self, t: f64, p: Point) -> [f64; 2] {
        let v = self.inner.velocity(self.profile.value(t), p);
        let s = self.profile.derivative(t);
        [s * v[0], s * v[1]]
    }

    fn label(&self) -> String {
        format!("{} reparametrized", self.inner.label())
    }
}

/// Time samples `X_j` of a vector field at `t_j = j/K`.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorFieldPath {
    mesh: GridMesh,
    samples: Vec<VectorField>,
}

impl VectorFieldPath {
    pub fn new(samples: Vec<VectorField>) -> Self {
        assert!(samples.len() >= 2, "a path needs at least two samples");
        let mesh = *samples[0].mesh();
        Self { mesh, samples }
    }

    pub fn from_flow(field: &dyn FlowField, mesh: &GridMesh, k: usize) -> Self {
        Self::new((0..=k).map(|j| field.sample(mesh, j as f64 / k as f64)).collect())
    }

    pub fn mesh(&self) -> &GridMesh {
        &self.mesh
    }

    pub fn k(&self) -> usize {
        self.samples.len() - 1
    }

    pub fn sample(&self, j: usize) -> &VectorField {
        &self.samples[j]
    }

    pub fn samples(&self) -> &[VectorField] {
        &self.samples
    }

    /// `max_j sup |d(i_{X_j} ω)|` together with the worst sample.
    pub fn symplectic_residual(&self, omega: &crate::exterior_calculus::TwoForm) -> (usize, f64) {
        let mut worst = (0, 0.0);
        for (j, x) in self.samples.iter().enumerate() {
            let r = x.contract(omega).closedness_residual();
            if r > worst.1 {
                worst = (j, r);
            }
        }
        worst
    }

    pub fn is_symplectic(&self, omega: &crate::exterior_calculus::TwoForm) -> bool {
        self.samples.iter().all(|x| {
            let a = x.contract(omega);
            a.closedness_residual() <= a.closed_tolerance()
        })
    }

    /// Maximum pointwise difference to another path with the same sampling.
    pub fn sup_distance(&self, other: &Self) -> f64 {
        self.samples
            .iter()
            .zip(&other.samples)
            .map(|(a, b)| (a - b).sup_norm())
            .fold(0.0, f64::max)
    }
}

/// Integrable view of a [`VectorFieldPath`]: trigonometric interpolation in
/// space, cubic Lagrange interpolation in time.
pub struct PathFlow {
    resamplers: Vec<Resampler>,
    k: usize,
}

impl PathFlow {
    pub fn new(path: &VectorFieldPath) -> Self {
        let resamplers = path
            .samples
            .iter()
            .map(|x| Resampler::new(Interpolation::Trigonometric, &[x.component(0), x.component(1)]))
            .collect();
        Self { resamplers, k: path.k() }
    }
}

impl FlowField for PathFlow {
    fn velocity(&self, t: f64, p: Point) -> [f64; 2] {
        let k = self.k;
        let s = (t * k as f64).clamp(0.0, k as f64);
        let j = (s.floor() as usize).min(k - 1);
        let start = j.saturating_sub(1).min(k.saturating_sub(3));
        let nodes = (start..=(start + 3).min(k)).collect::<Vec<_>>();
        let mut v = [0.0; 2];
        let mut buf = [0.0; 2];
        for &a in &nodes {
            let mut w = 1.0;
            for &b in &nodes {
                if a != b {
                    w *= (s - b as f64) / (a as f64 - b as f64);
                }
            }
            self.resamplers[a].eval(p, &mut buf);
            v[0] += w * buf[0];
            v[1] += w * buf[1];
        }
        v
    }

    fn label(&self) -> String {
        format!("sampled path (K = {})", self.k)
    }
}
