//! Maps, forms and flows shared by several suites.

use std::f64::consts::PI;
use std::rc::Rc;
use std::sync::Arc;

use fluxlab_core::exterior_calculus::OneForm;
use fluxlab_core::isotopy_engine::{ConstantFlow, FlowField, Hamiltonian, Isotopy, SumFlow};
use fluxlab_core::{GridMesh, Point, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::Ctx;

pub fn rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

/// `a dx + b dy + dG` with `G` a random trigonometric polynomial of modes
/// `|k|_∞ ≤ 3`, built analytically so it is closed to round-off.
pub fn random_closed_form(mesh: &GridMesh, rng: &mut impl Rng) -> OneForm {
    let l = mesh.periods();
    let harmonic = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
    let modes: Vec<([f64; 2], f64, f64)> = (0..4)
        .map(|_| {
            let k = [rng.gen_range(-3..=3) as f64, rng.gen_range(0..=3) as f64];
            let w = [2.0 * PI * k[0] / l[0], 2.0 * PI * k[1] / l[1]];
            (w, rng.gen_range(-0.1..0.1), rng.gen_range(0.0..2.0 * PI))
        })
        .collect();
    OneForm::from_fn(*mesh, |p| {
        let mut a = harmonic;
        for &(w, c, ph) in &modes {
            let s = -c * (w[0] * p[0] + w[1] * p[1] + ph).sin();
            a[0] += s * w[0];
            a[1] += s * w[1];
        }
        a
    })
}

/// `c dx + d(ε sin(2π(kx + ly)))` type forms used as fixed test forms.
pub fn fixed_forms(mesh: &GridMesh) -> Vec<(&'static str, OneForm)> {
    let m = *mesh;
    let tau = 2.0 * PI;
    vec![
        ("dx", OneForm::constant(m, [1.0, 0.0])),
        ("dy", OneForm::constant(m, [0.0, 1.0])),
        ("2dx-dy", OneForm::constant(m, [2.0, -1.0])),
        (
            "dx+dG1",
            OneForm::from_fn(m, |p| {
                let (x, y) = (tau * p[0], tau * p[1]);
                [1.0 + 0.1 * tau * x.cos() * y.cos(), -0.1 * tau * x.sin() * y.sin()]
            }),
        ),
        (
            "dy/2+dG2",
            OneForm::from_fn(m, |p| {
                let s = (tau * (p[0] + 2.0 * p[1]) + 0.4).cos();
                [0.05 * tau * s, 0.5 + 0.1 * tau * s]
            }),
        ),
    ]
}

/// Grid points, plus one point off the grid.
pub fn base_points(mesh: &GridMesh) -> Vec<Point> {
    let n = mesh.n();
    vec![
        mesh.point(0, n / 4),
        mesh.point(n / 8, 3 * n / 8),
        mesh.point(n / 2, n / 2 + 3),
        mesh.point(7 * n / 8 + 1, n / 16),
        [0.3141 * mesh.period(0), 0.7071 * mesh.period(1)],
    ]
}

/// Smooth flows with a name used for memoization.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Flow {
    Shear,
    Twist,
    Cellular,
    Wobble,
    Random,
    WobbleDrift,
    TwistDrift,
}

impl Flow {
    pub const HAMILTONIAN: [Flow; 5] = [Flow::Shear, Flow::Twist, Flow::Cellular, Flow::Wobble, Flow::Random];
    pub const ALL: [Flow; 7] = [
        Flow::Shear,
        Flow::Twist,
        Flow::Cellular,
        Flow::Wobble,
        Flow::Random,
        Flow::WobbleDrift,
        Flow::TwistDrift,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Flow::Shear => "shear-flow",
            Flow::Twist => "twist-flow",
            Flow::Cellular => "cellular-flow",
            Flow::Wobble => "wobble-flow",
            Flow::Random => "random-flow",
            Flow::WobbleDrift => "wobble-drift-flow",
            Flow::TwistDrift => "twist-drift-flow",
        }
    }

    pub fn is_hamiltonian(self) -> bool {
        !matches!(self, Flow::WobbleDrift | Flow::TwistDrift)
    }

    /// Drift velocity of the non-Hamiltonian part.
    pub fn drift(self) -> [f64; 2] {
        match self {
            Flow::WobbleDrift => [0.1, -0.2],
            Flow::TwistDrift => [-0.05, 0.3],
            _ => [0.0, 0.0],
        }
    }

    pub fn hamiltonian(self, mesh: &GridMesh, seed: u64) -> Hamiltonian {
        match self {
            Flow::Shear => Hamiltonian::shear(mesh, 0.1),
            Flow::Twist | Flow::TwistDrift => Hamiltonian::twist(mesh, 0.15),
            Flow::Cellular => Hamiltonian::cellular(mesh, 0.1),
            Flow::Wobble | Flow::WobbleDrift => Hamiltonian::wobble(mesh, 0.1),
            Flow::Random => Hamiltonian::random(mesh, seed, 2, 0.1),
        }
    }

    pub fn field(self, mesh: &GridMesh, seed: u64) -> Arc<dyn FlowField> {
        let h = Arc::new(self.hamiltonian(mesh, seed));
        if self.is_hamiltonian() {
            h
        } else {
            Arc::new(SumFlow(vec![h, Arc::new(ConstantFlow(self.drift()))]))
        }
    }

    pub fn isotopy(self, ctx: &Ctx) -> Result<Rc<Isotopy>> {
        ctx.flow(self.label(), || self.field(&ctx.mesh, ctx.cfg.seed))
    }
}

/// Translation paths used as closed-form references.
pub const TRANSLATIONS: [[f64; 2]; 3] = [[0.3, 0.7], [-0.2, 0.45], [0.125, -0.375]];
