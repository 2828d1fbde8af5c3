//! Suites about single maps: pull-back bounds, convergent sequences and the
//! volume-defect criterion.

use std::f64::consts::PI;

use fluxlab_core::exterior_calculus::{l2_norm, sup_norm, OneForm, ScalarField, VectorField};
use fluxlab_core::isotopy_engine::Hamiltonian;
use fluxlab_core::torus_maps::catalog::MapSpec;
use fluxlab_core::torus_maps::{
    c0_distance, compose, pullback_bound_constant, pullback_oneform, volume_defect, TorusMap,
};
use fluxlab_core::{GridMesh, Result};
use rand::Rng;

use super::fixtures::{fixed_forms, random_closed_form, rng, Flow};
use super::{decreasing, Checks, Ctx, Suite};
use crate::sequence::{build_perturbation_sequence, perturbation_hamiltonian};

const BOUND: &str = "pull-back bound ‖φ*α‖_L² ≤ C_φ ‖α‖_L² with C_φ from sup e^K_φ and sup e^H_φ";
const CLOSED: &str = "pull-back preserves closed forms";
const SHEAR: &str = "closed form ‖S_ε* dx‖²_L² = 1 + 2π²ε²";
const FUNCTOR: &str = "functoriality (φ∘ψ)*α = ψ*(φ*α)";
const ISOMETRY: &str = "isometries have C_φ = 1";

pub const PULLBACK_BOUND: Suite = Suite {
    name: "pullback-bound",
    summary: "pull-back bound constant on random catalog maps and forms, with closed-form spot checks",
    anchors: &[BOUND, CLOSED, SHEAR, FUNCTOR, ISOMETRY],
    run: pullback_bound,
};

/// Random catalog maps: configured generators first, then a fixed rotation
/// of kinds with seeded parameters.
fn catalog(ctx: &Ctx, count: usize) -> Vec<MapSpec> {
    let mut r = rng(ctx.cfg.seed, 1);
    let mut out = ctx.cfg.generators.clone();
    let mut kind = 0;
    while out.len() < count {
        out.push(match kind % 6 {
            0 => MapSpec::Translation { c: [r.gen_range(0.0..1.0), r.gen_range(0.0..1.0)] },
            1 => MapSpec::Shear { epsilon: r.gen_range(-0.15..0.15) },
            2 => MapSpec::Twist { epsilon: r.gen_range(-0.15..0.15) },
            3 => MapSpec::Stretch { epsilon: r.gen_range(-0.1..0.1) },
            4 => MapSpec::Random { seed: r.gen(), amplitude: r.gen_range(0.2..0.6), modes: 3 },
            _ => MapSpec::Flow { hamiltonian: Hamiltonian::random(&ctx.mesh, r.gen(), 2, 0.1), steps: 8 },
        });
        kind += 1;
    }
    out
}

fn pullback_bound(ctx: &Ctx, c: &mut Checks) {
    let mesh = ctx.mesh;
    let specs = catalog(ctx, 20);
    let mut forms = rng(ctx.cfg.seed, 2);
    let mut built = Vec::new();
    for (i, spec) in specs.iter().enumerate() {
        let alpha = random_closed_form(&mesh, &mut forms);
        let id = format!("pair-{i:02}");
        c.section(&id, BOUND, |c| {
            let phi = spec.build(&mesh)?;
            let pulled = pullback_oneform(&phi, &alpha);
            let ratio = l2_norm(&pulled) / (pullback_bound_constant(&phi) * l2_norm(&alpha));
            c.le(&format!("{id}/bound"), BOUND, ratio, 1.0 + ctx.tol.pullback_slack);
            c.note(spec.name());
            c.le(&format!("{id}/closed"), CLOSED, pulled.closedness_residual(), 10.0 * pulled.closed_tolerance());
            built.push((phi, alpha.clone()));
            Ok(())
        });
    }
    c.section("shear-0.1", SHEAR, |c| {
        let s = TorusMap::shear(mesh, 0.1);
        let n2 = l2_norm(&pullback_oneform(&s, &OneForm::constant(mesh, [1.0, 0.0]))).powi(2);
        let exact = 1.0 + 2.0 * PI * PI * 0.01;
        c.le("shear-0.1/l2-squared", SHEAR, (n2 - exact).abs() / exact, ctx.tol.analytic);
        c.note(format!("{n2:.9}"));
        Ok(())
    });
    c.section("isometry", ISOMETRY, |c| {
        for (name, m) in [("identity", TorusMap::identity(mesh)), ("translation", TorusMap::translation(mesh, [0.3, 0.7]))] {
            c.le(&format!("{name}/constant"), ISOMETRY, (pullback_bound_constant(&m) - 1.0).abs(), ctx.tol.analytic);
        }
        Ok(())
    });
    c.section("functoriality", FUNCTOR, |c| {
        for i in 0..built.len().min(6) {
            let (phi, alpha) = &built[i];
            let (psi, _) = &built[(i + 1) % built.len()];
            let lhs = pullback_oneform(&compose(phi, psi)?, alpha);
            let rhs = pullback_oneform(psi, &pullback_oneform(phi, alpha));
            let err = sup_norm(&(&lhs - &rhs)) / sup_norm(alpha);
            c.le(&format!("functoriality-{i:02}"), FUNCTOR, err, ctx.tol.functoriality);
        }
        Ok(())
    });
}

const L2: &str = "C⁰ continuity of pull-back in L²: ‖φ_i*α - ψ*α‖_L² → 0";
const SUP: &str = "C⁰ continuity of pull-back in sup norm: |φ_i*α - ψ*α|₀ → 0";
const SEQ: &str = "perturbation sequence φ_i = ψ∘ρ_i: volume-preserving, d₀(φ_i, ψ) ≤ Lip(ψ) sup|X| a_i";

pub const PULLBACK_CONVERGENCE: Suite = Suite {
    name: "lemma14-convergence",
    summary: "pull-backs along a C⁰-convergent perturbation sequence converge in L² and sup norm",
    anchors: &[L2, SUP, SEQ],
    run: pullback_convergence,
};

/// Pull-back errors at and beyond this index must decrease.
const MONOTONE_FROM: usize = 4;

fn pullback_convergence(ctx: &Ctx, c: &mut Checks) {
    c.section("sequence", SEQ, |c| {
        let mesh = ctx.mesh;
        let psi = MapSpec::Twist { epsilon: 0.1 }.build(&mesh)?;
        let alpha = fixed_forms(&mesh).swap_remove(3).1;
        let speed = ctx.cfg.schedule.perturbation;
        let amps = ctx.cfg.schedule.amplitudes();
        let idx = &ctx.cfg.schedule.indices;
        let seq = build_perturbation_sequence(&psi, &amps, &perturbation_hamiltonian(&mesh, speed))?;
        let base = pullback_oneform(&psi, &alpha);
        let (mut l2, mut sup, mut ratio, mut vol) = (vec![], vec![], 0.0f64, 0.0f64);
        for (m, &a) in seq.iter().zip(&amps) {
            let diff = &pullback_oneform(m, &alpha) - &base;
            l2.push(l2_norm(&diff));
            sup.push(sup_norm(&diff));
            if a != 0.0 {
                ratio = ratio.max(c0_distance(m, &psi)? / a.abs());
            }
            vol = vol.max(m.volume_error());
        }
        decreasing(c, "l2", L2, idx, &l2, MONOTONE_FROM);
        c.le("l2/final", L2, *l2.last().unwrap(), ctx.tol.sequence_final);
        decreasing(c, "sup", SUP, idx, &sup, MONOTONE_FROM);
        c.le("sup/final", SUP, *sup.last().unwrap(), ctx.tol.sequence_final);
        c.le("d0-over-amplitude", SEQ, ratio, psi.lipschitz() * speed * (1.0 + 1e-6));
        c.le("volume-error", SEQ, vol, ctx.tol.volume);
        Ok(())
    });
}

const VP: &str = "volume-preserving maps satisfy i_{φ_*Y}Ω = (φ⁻¹)*(i_Y Ω) for conservative Y";
const WITNESS: &str = "a map that is not volume-preserving violates it for a searched conservative Y";

pub const VOLUME_DEFECT: Suite = Suite {
    name: "volume-defect",
    summary: "volume-defect criterion: tiny on volume-preserving maps, large on a stretch with a searched witness",
    anchors: &[VP, WITNESS],
    run: volume_defect_suite,
};

/// Hamiltonian field of a bump, normalised to `sup |Y| = 1`.
fn bump_field(mesh: &GridMesh, center: [f64; 2], radius: f64) -> VectorField {
    let g = Hamiltonian::bump(mesh, center, radius, 1.0).potential(mesh, 0.0);
    unit(VectorField::hamiltonian(&g))
}

fn unit(y: VectorField) -> VectorField {
    let s = 1.0 / y.sup_norm();
    y.zip_with(&y, |a, _| a * s)
}

fn probe_fields(mesh: &GridMesh) -> Vec<VectorField> {
    let l = mesh.periods();
    let wave = ScalarField::from_fn(*mesh, |p| {
        (2.0 * PI * p[0] / l[0]).sin() * (4.0 * PI * p[1] / l[1]).cos() + 0.3 * (2.0 * PI * (p[0] / l[0] + p[1] / l[1])).cos()
    });
    vec![
        unit(VectorField::hamiltonian(&wave)),
        bump_field(mesh, [0.5 * l[0], 0.25 * l[1]], 0.2 * l[0].min(l[1])),
        VectorField::constant(*mesh, [0.6, 0.8]),
    ]
}

fn volume_defect_suite(ctx: &Ctx, c: &mut Checks) {
    let mesh = ctx.mesh;
    let mut maps: Vec<(String, Result<TorusMap>)> = vec![
        ("identity".into(), Ok(TorusMap::identity(mesh))),
        ("translation".into(), Ok(TorusMap::translation(mesh, [0.3, 0.7]))),
        ("shear".into(), Ok(TorusMap::shear(mesh, 0.1))),
        ("twist".into(), MapSpec::Twist { epsilon: 0.15 }.build(&mesh)),
        ("cellular-flow".into(), Flow::Cellular.isotopy(ctx).map(|f| f.endpoint().clone())),
    ];
    let mut stretches = vec![("stretch".to_string(), MapSpec::Stretch { epsilon: 0.1 }.build(&mesh))];
    for (i, g) in ctx.cfg.generators.iter().enumerate() {
        let entry = (format!("generator-{i:02}"), g.build(&mesh));
        if g.is_volume_preserving() {
            maps.push(entry);
        } else {
            stretches.push(entry);
        }
    }
    let probes = probe_fields(&mesh);
    for (name, m) in maps {
        c.section(&name, VP, |c| {
            let m = m?;
            for (j, y) in probes.iter().enumerate() {
                c.le(&format!("{name}/probe-{j}"), VP, volume_defect(&m, y)?, ctx.tol.volume_defect);
            }
            Ok(())
        });
    }
    for (name, m) in stretches {
        c.section(&name, WITNESS, |c| {
            let m = m?;
            let l = mesh.periods();
            let mut best = (0.0f64, [0.0; 2]);
            for a in 0..4 {
                for b in 0..4 {
                    let center = [(a as f64 + 0.5) * l[0] / 4.0, (b as f64 + 0.5) * l[1] / 4.0];
                    let d = volume_defect(&m, &bump_field(&mesh, center, 0.15 * l[0].min(l[1])))?;
                    if d > best.0 {
                        best = (d, center);
                    }
                }
            }
            c.gt(&format!("{name}/witness"), WITNESS, best.0, ctx.tol.defect_witness);
            c.note(format!("bump field centred at ({:.4}, {:.4})", best.1[0], best.1[1]));
            Ok(())
        });
    }
}
