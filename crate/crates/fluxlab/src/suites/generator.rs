//! Generating functions of symplectic paths: Hodge splitting, the commutator
//! generator, the functionals `𝓕` and `℧`, and the Hofer-like length.

use std::rc::Rc;
use std::sync::Arc;

use fluxlab_core::exterior_calculus::{exterior_derivative, l2_norm, oscillation, OneForm, TwoForm};
use fluxlab_core::isotopy_engine::{
    commutator_generator, f_functional, generator_hodge_split, geodesic_functional, hofer_like_length, kappa,
    ConstantFlow, FlowField, Hamiltonian, Isotopy, SumFlow,
};
use fluxlab_core::torus_maps::{c0_distance_with, inverse, TorusMap};
use fluxlab_core::{quad, Result};

use super::fixtures::{fixed_forms, Flow};
use super::{decreasing, subsample, Checks, Ctx, Suite};
use crate::sequence::perturbation_hamiltonian;

const SPLIT: &str = "Hodge splitting i(φ̇_t)ω = dU_t + 𝓗_t reconstructs the generating form";
const MEAN: &str = "the potentials U_t have zero mean";
const G1: &str = "the commutator generating function Π_t satisfies dΠ_t = i(θ̇_t)ω";
const THETA_FLUX: &str = "commutator paths are Hamiltonian: the periods of i(θ̇_t)ω vanish";

pub const GENERATOR_G1: Suite = Suite {
    name: "generator-g1",
    summary: "Hodge splitting of generating forms and certification of the commutator generating function",
    anchors: &[SPLIT, MEAN, G1, THETA_FLUX],
    run: generator_g1,
};

fn drifting(h: Hamiltonian, drift: [f64; 2]) -> Arc<dyn FlowField> {
    Arc::new(SumFlow(vec![Arc::new(h), Arc::new(ConstantFlow(drift))]))
}

fn generator_g1(ctx: &Ctx, c: &mut Checks) {
    let mesh = ctx.mesh;
    let omega = TwoForm::area(mesh);
    for f in Flow::ALL {
        c.section(f.label(), SPLIT, |c| {
            let s = generator_hodge_split(&*f.isotopy(ctx)?, &omega)?;
            // tol_hodge of the smallest generating form
            let smallest = s
                .u
                .iter()
                .zip(&s.h)
                .map(|(u, h)| l2_norm(&(&exterior_derivative(u) + &OneForm::constant(mesh, *h))))
                .fold(f64::INFINITY, f64::min);
            c.le(&format!("split/{}", f.label()), SPLIT, s.residual, 1e-8 * (1.0 + smallest));
            let mean = s.u.iter().map(|u| u.mean().abs()).fold(0.0, f64::max);
            c.le(&format!("mean/{}", f.label()), MEAN, mean, ctx.tol.potential_mean);
            Ok(())
        });
    }
    c.section("commutator", G1, |c| {
        let a = ctx.flow("wobble-drift-small", || drifting(Hamiltonian::wobble(&mesh, 0.05), [0.1, 0.05]))?;
        let b = ctx.flow("twist-drift-small", || drifting(Hamiltonian::twist(&mesh, 0.15), [-0.03, 0.08]))?;
        let g = commutator_generator(&a, &b)?;
        c.le("commutator/residual", G1, g.residual_corrected.1, ctx.tol.generator);
        c.note(format!(
            "worst sample {}; harmonic terms with the signs as first written leave {:.3e}",
            g.residual_corrected.0, g.residual_as_written.1
        ));
        // the flux of Θ integrates these periods over time
        c.le("commutator/periods", THETA_FLUX, g.period_residual, ctx.tol.generator_periods);
        Ok(())
    });
}

const SMOOTH: &str = "𝓕_α^1(Φ) = ℧_α^Φ for smooth isotopies";
const LIMIT: &str = "𝓕_α^1(Φ_i) → ℧_α^H along a C⁰-convergent sequence of isotopies";
const KAPPA: &str = "|𝓕_β^1(H)| ≤ κ(H) |β|₀ for harmonic β";

pub const F_VS_GEODESIC: Suite = Suite {
    name: "f-vs-geodesic",
    summary: "the orbit functional 𝓕 against the geodesic functional ℧, in the smooth case and in the limit",
    anchors: &[SMOOTH, LIMIT, KAPPA],
    run: f_vs_geodesic,
};

/// Flows compared in the smooth case; one of them has a drift.
const SMOOTH_FLOWS: [Flow; 3] = [Flow::Twist, Flow::Cellular, Flow::WobbleDrift];

/// `H` plus the perturbation Hamiltonian scaled by `a`.
fn perturbed(ctx: &Ctx, a: f64) -> Result<Rc<Isotopy>> {
    let mesh = ctx.mesh;
    let speed = ctx.cfg.schedule.perturbation;
    ctx.flow(&format!("twist-flow+{a:e}"), || {
        let h = Flow::Twist.field(&mesh, ctx.cfg.seed);
        Arc::new(SumFlow(vec![h, Arc::new(perturbation_hamiltonian(&mesh, speed).scaled(a))]))
    })
}

/// Subsampled schedule `(indices, amplitudes)`.
fn schedule(ctx: &Ctx) -> (Vec<usize>, Vec<f64>) {
    let amps = ctx.cfg.schedule.amplitudes();
    subsample(amps.len()).into_iter().map(|i| (ctx.cfg.schedule.indices[i], amps[i])).unzip()
}

fn f_vs_geodesic(ctx: &Ctx, c: &mut Checks) {
    let mesh = ctx.mesh;
    let forms = fixed_forms(&mesh);
    for f in SMOOTH_FLOWS {
        c.section(f.label(), SMOOTH, |c| {
            let iso = f.isotopy(ctx)?;
            let mut fdx = None;
            let mut fdy = None;
            for (name, alpha) in forms.iter().filter(|(n, _)| *n != "2dx-dy") {
                let fa = f_functional(&iso, alpha, 1.0)?;
                let g = geodesic_functional(&iso, alpha)?;
                c.le(&format!("{}/{name}", f.label()), SMOOTH, (&fa - &g).sup_abs(), ctx.tol.f_vs_geodesic);
                match *name {
                    "dx" => fdx = Some(fa),
                    "dy" => fdy = Some(fa),
                    _ => {}
                }
            }
            let (fdx, fdy) = (fdx.unwrap(), fdy.unwrap());
            let k = kappa(&iso)?;
            // unit constant forms; κ is a polygonal length, so the excess is quadrature error
            let mut excess = f64::NEG_INFINITY;
            for j in 0..8 {
                let th = std::f64::consts::PI * j as f64 / 8.0;
                let (b0, b1) = (th.cos(), th.sin());
                let fb = fdx.zip_with(&fdy, |x, y| b0 * x + b1 * y);
                excess = excess.max(fb.sup_abs() - k);
            }
            c.le(&format!("kappa/{}", f.label()), KAPPA, excess, ctx.tol.f_vs_geodesic);
            c.note(format!("κ = {k:.6}"));
            Ok(())
        });
    }
    c.section("limit", LIMIT, |c| {
        let alpha = &forms[3].1;
        let limit = geodesic_functional(&*Flow::Twist.isotopy(ctx)?, alpha)?;
        let (indices, amps) = schedule(ctx);
        let mut errors = Vec::with_capacity(amps.len());
        for &a in &amps {
            let fa = f_functional(&*perturbed(ctx, a)?, alpha, 1.0)?;
            errors.push((&fa - &limit).sup_abs());
        }
        decreasing(c, "limit", LIMIT, &indices, &errors, 0);
        c.le("limit/final", LIMIT, *errors.last().unwrap(), ctx.tol.c0_limit);
        Ok(())
    });
}

const IDENTITY: &str = "the Hofer-like length of the constant path is 0";
const TRANSLATION: &str = "the Hofer-like length of the translation path by (c, d) is √(c² + d²)";
const AUTONOMOUS: &str = "the Hofer-like length of an autonomous Hamiltonian flow is osc H";
const CAUCHY: &str = "a C⁰-convergent sequence of isotopies is Cauchy in the generator distance";

pub const HOFER_CAUCHY: Suite = Suite {
    name: "hofer-cauchy",
    summary: "closed forms of the Hofer-like length and the decay of generator and C⁰ distances along a sequence",
    anchors: &[IDENTITY, TRANSLATION, AUTONOMOUS, CAUCHY],
    run: hofer_cauchy,
};

/// Every fourth time sample, which keeps the path inversions affordable.
const C0_STRIDE: usize = 4;

fn hofer_cauchy(ctx: &Ctx, c: &mut Checks) {
    let mesh = ctx.mesh;
    let omega = TwoForm::area(mesh);
    c.section("closed-forms", IDENTITY, |c| {
        c.le("identity", IDENTITY, hofer_like_length(&Isotopy::identity(mesh, ctx.k))?.abs(), ctx.tol.hofer);
        let t = [0.3, 0.7];
        let len = hofer_like_length(&Isotopy::translation(mesh, t, ctx.k))?;
        c.le("translation", TRANSLATION, (len - t[0].hypot(t[1])).abs(), ctx.tol.hofer);
        for f in [Flow::Cellular, Flow::Twist] {
            let osc = oscillation(&f.hamiltonian(&mesh, ctx.cfg.seed).potential(&mesh, 0.0));
            let len = hofer_like_length(&*f.isotopy(ctx)?)?;
            c.le(&format!("autonomous/{}", f.label()), AUTONOMOUS, (len - osc).abs(), ctx.tol.hofer);
        }
        Ok(())
    });
    c.section("sequence", CAUCHY, |c| {
        let limit = Flow::Twist.isotopy(ctx)?;
        let ls = generator_hodge_split(&limit, &omega)?;
        let stride: Vec<usize> = (0..=limit.k()).step_by(C0_STRIDE).collect();
        let limit_inv: Vec<TorusMap> = stride.iter().map(|&j| inverse(limit.map(j))).collect::<Result<_>>()?;
        let (indices, amps) = schedule(ctx);
        let (mut gen, mut c0) = (Vec::new(), Vec::new());
        for &a in &amps {
            let iso = perturbed(ctx, a)?;
            let s = generator_hodge_split(&iso, &omega)?;
            let vals: Vec<f64> = (0..=iso.k())
                .map(|j| oscillation(&(&s.u[j] - &ls.u[j])) + (s.h[j][0] - ls.h[j][0]).hypot(s.h[j][1] - ls.h[j][1]))
                .collect();
            gen.push(quad::simpson(&vals, iso.dt()));
            let mut d: f64 = 0.0;
            for (&j, li) in stride.iter().zip(&limit_inv) {
                let m = iso.map(j);
                d = d.max(c0_distance_with(m, &inverse(m)?, limit.map(j), li));
            }
            c0.push(d);
        }
        decreasing(c, "generator-distance", CAUCHY, &indices, &gen, 0);
        decreasing(c, "c0bar", CAUCHY, &indices, &c0, 0);
        c.le("c0bar/final", CAUCHY, *c0.last().unwrap(), ctx.tol.c0_limit);
        c.note(format!("time samples 0, {C0_STRIDE}, .., {}", limit.k()));
        Ok(())
    });
}
