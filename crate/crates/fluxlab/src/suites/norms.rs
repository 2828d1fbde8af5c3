//! Suites about `Δ` and the sampled norm `‖·‖^∞`.

use std::rc::Rc;

use fluxlab_core::displacement_geometry::{
    conjugation_check, delta, delta_at, delta_tilde_field, delta_via_flux, delta_via_flux_at, norm_axiom_report,
    psi_norm, Axiom, AxiomSlack,
};
use fluxlab_core::exterior_calculus::OneForm;
use fluxlab_core::isotopy_engine::{Isotopy, TimeProfile};
use fluxlab_core::torus_maps::catalog::MapSpec;
use fluxlab_core::torus_maps::TorusMap;
use fluxlab_core::{FluxError, Result};

use super::fixtures::{base_points, fixed_forms, Flow, TRANSLATIONS};
use super::{Checks, Ctx, Suite};

const AGREE: &str = "Δ from the displacement potential equals (⟨[α], S̃(Φ)⟩ - Vol ∫_{O_x} α) / ‖α‖";
const ANALYTIC: &str = "Δ(S_0.1, dx) at (0, 1/4) equals -0.1";
const INDEPENDENT: &str = "the flux and orbit expression of Δ does not depend on the isotopy";

pub const DELTA_CONSISTENCY: Suite = Suite {
    name: "cor22-consistency",
    summary: "Δ computed from potentials against Δ computed from flux and orbit integrals",
    anchors: &[AGREE, ANALYTIC, INDEPENDENT],
    run: delta_consistency,
};

fn isotopies(ctx: &Ctx) -> Vec<(String, Result<Rc<Isotopy>>)> {
    let mut out: Vec<(String, Result<Rc<Isotopy>>)> = TRANSLATIONS
        .iter()
        .enumerate()
        .map(|(i, &c)| (format!("translation-{i}"), Ok(Rc::new(Isotopy::translation(ctx.mesh, c, ctx.k)))))
        .collect();
    for f in Flow::ALL {
        out.push((f.label().to_string(), f.isotopy(ctx)));
    }
    out
}

fn delta_consistency(ctx: &Ctx, c: &mut Checks) {
    let mesh = ctx.mesh;
    let forms = fixed_forms(&mesh);
    let points = base_points(&mesh);
    for (name, iso) in isotopies(ctx) {
        c.section(&name, AGREE, |c| {
            let iso = iso?;
            let psi = iso.endpoint();
            for (fname, alpha) in &forms {
                let id = format!("{name}/{fname}");
                let d = delta_at(psi, alpha, &points);
                let f = delta_via_flux_at(psi, alpha, &points, &iso);
                match (d, f) {
                    (Ok(d), Ok(f)) => {
                        let worst = d.iter().zip(&f).map(|(a, b)| (a - b).abs() / (1.0 + a.abs())).fold(0.0, f64::max);
                        c.le(&id, AGREE, worst, ctx.tol.delta_agreement);
                    }
                    (Err(e), _) | (_, Err(e)) => c.fail(&id, AGREE, e),
                }
            }
            Ok(())
        });
    }
    c.section("shear-analytic", ANALYTIC, |c| {
        let s = TorusMap::shear(mesh, 0.1);
        let dx = OneForm::constant(mesh, [1.0, 0.0]);
        let p = [0.0, 0.25 * mesh.period(1)];
        c.le("shear-analytic/potential", ANALYTIC, (delta(&s, &dx, p)? + 0.1).abs(), ctx.tol.delta_analytic);
        let flow = Flow::Shear.isotopy(ctx)?;
        c.le("shear-analytic/flux", ANALYTIC, (delta_via_flux(&s, &dx, p, &flow)? + 0.1).abs(), ctx.tol.delta_analytic);
        Ok(())
    });
    c.section("independence", INDEPENDENT, |c| {
        let alpha = &forms[3].1;
        let straight = Rc::new(Isotopy::translation(mesh, TRANSLATIONS[0], ctx.k));
        let cellular = Flow::Cellular.isotopy(ctx)?;
        for (name, iso) in [("translation", straight), ("cellular-flow", cellular)] {
            let wavy = ctx.cached(&format!("{}-sinusoidal", name), || iso.reparametrized(TimeProfile::Sinusoidal { a: 0.5 }))?;
            let psi = iso.endpoint();
            let a = delta_via_flux_at(psi, alpha, &points[..2], &iso)?;
            let b = delta_via_flux_at(psi, alpha, &points[..2], &wavy)?;
            let worst = a.iter().zip(&b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
            c.le(&format!("independence/{name}"), INDEPENDENT, worst, ctx.tol.isotopy_independence);
        }
        Ok(())
    });
}

const CONJ: &str = "conjugation identity Δ̃(φhφ⁻¹, α) at φ(x) equals Δ̃(h, φ*α) at x for vanishing-flux φ";
const SANDWICH: &str = "norm sandwich ‖h‖/C_{φ⁻¹} ≤ ‖φhφ⁻¹‖ ≤ C_φ ‖h‖";
const GATE: &str = "conjugation requires a vanishing-flux isotopy";

pub const CONJUGATION: Suite = Suite {
    name: "conjugation",
    summary: "conjugation identity for Δ̃ and the conjugation sandwich of sampled norms",
    anchors: &[CONJ, SANDWICH, GATE],
    run: conjugation,
};

/// Tuples whose sandwich is also evaluated (two sampled norms each).
const SANDWICHES: usize = 2;

fn conjugation(ctx: &Ctx, c: &mut Checks) {
    let mesh = ctx.mesh;
    let forms = fixed_forms(&mesh);
    let points = base_points(&mesh);
    let hs: Vec<(&str, Result<TorusMap>)> = vec![
        ("shear", Ok(TorusMap::shear(mesh, 0.1))),
        ("twist", MapSpec::Twist { epsilon: 0.1 }.build(&mesh)),
        ("translation", Ok(TorusMap::translation(mesh, [0.3, 0.7]))),
        ("cellular", Flow::Cellular.isotopy(ctx).map(|f| f.endpoint().clone())),
    ];
    for i in 0..10 {
        let (hname, h) = &hs[i % hs.len()];
        let flow = Flow::HAMILTONIAN[i % Flow::HAMILTONIAN.len()];
        let (fname, alpha) = &forms[(i + 2) % forms.len()];
        let x = points[(3 * i) % points.len()];
        let id = format!("tuple-{i:02}");
        c.section(&id, CONJ, |c| {
            let h = h.as_ref().map_err(Clone::clone)?;
            let phi = flow.isotopy(ctx)?;
            let sampler = (i < SANDWICHES).then_some(&ctx.sampler);
            let r = conjugation_check(h, &phi, x, alpha, sampler)?;
            c.le(&format!("{id}/identity"), CONJ, r.residual, ctx.tol.conjugation);
            c.note(format!(
                "h = {hname}, φ = {}, α = {fname}; Δ normalized by each form differs by {:.3e}",
                flow.label(),
                r.literal_residual
            ));
            if let Some(s) = r.sandwich {
                c.ge(&format!("{id}/sandwich-lower"), SANDWICH, s.norm_conjugate, s.lower - s.slack);
                c.le(&format!("{id}/sandwich-upper"), SANDWICH, s.norm_conjugate, s.upper + s.slack);
            }
            Ok(())
        });
    }
    c.section("drift-refused", GATE, |c| {
        let drift = Flow::TwistDrift.isotopy(ctx)?;
        let refused = matches!(
            conjugation_check(&TorusMap::shear(mesh, 0.1), &drift, points[0], &forms[0].1, None),
            Err(FluxError::NonzeroFlux { .. })
        );
        c.ge("drift-refused", GATE, if refused { 1.0 } else { 0.0 }, 1.0);
        Ok(())
    });
}

const POSITIVE: &str = "positivity ‖ψ‖^∞ ≥ 0 and ‖id‖^∞ = 0";
const TRIANGLE: &str = "triangle inequality ‖ψ∘φ‖^∞ ≤ ‖ψ‖^∞ + ‖φ‖^∞";
const DUALITY: &str = "duality ‖ψ⁻¹‖^∞ = ‖ψ‖^∞";
const SEPARATION: &str = "separation: ‖S_0.1‖^∞ ≥ 0.1 through the witness dx";

pub const NORM_AXIOMS: Suite = Suite {
    name: "norm-axioms",
    summary: "norm axioms of the sampled ‖·‖^∞ on {id, T_(1/3,0), S_0.1}",
    anchors: &[POSITIVE, TRIANGLE, DUALITY, SEPARATION],
    run: norm_axioms,
};

fn norm_axioms(ctx: &Ctx, c: &mut Checks) {
    let mesh = ctx.mesh;
    let l = mesh.periods();
    let names = ["identity", "translation", "shear"];
    let maps = vec![
        TorusMap::identity(mesh),
        TorusMap::translation(mesh, [l[0] / 3.0, 0.0]),
        TorusMap::shear(mesh, 0.1),
    ];
    c.section("axioms", POSITIVE, |c| {
        let slack = AxiomSlack { triangle: ctx.tol.axiom_slack, duality: ctx.tol.axiom_slack, ..AxiomSlack::default() };
        let r = norm_axiom_report(&maps, &ctx.sampler, slack)?;
        c.le("identity/norm", POSITIVE, r.norms[0], 0.0);
        for ch in &r.checks {
            let who = ch.maps.iter().map(|&m| names[m]).collect::<Vec<_>>().join("-");
            match ch.axiom {
                Axiom::Positivity => c.ge(&format!("positivity/{who}"), POSITIVE, ch.value, 0.0),
                Axiom::Triangle => c.le(&format!("triangle/{who}"), TRIANGLE, ch.value, ch.bound),
                Axiom::Duality => c.le(&format!("duality/{who}"), DUALITY, ch.value, ch.bound),
                Axiom::Separation => c.ge(&format!("separation/{who}"), SEPARATION, ch.value, 0.1 - ctx.tol.separation),
            }
        }
        Ok(())
    });
    c.section("separation-witness", SEPARATION, |c| {
        let field = delta_tilde_field(&maps[2], &OneForm::constant(mesh, [1.0, 0.0]))?;
        c.ge("separation/witness-dx", SEPARATION, field.sup_abs(), 0.1 - ctx.tol.separation);
        let est = psi_norm(&maps[2], &ctx.sampler)?;
        c.ge("separation/estimate", SEPARATION, est.norm_lower_bound, field.sup_abs() - ctx.tol.separation);
        c.note(format!("witness periods {:?}", est.witness_form_periods));
        Ok(())
    });
}
