//! Displacement energy and the rigidity criterion.

use fluxlab_core::displacement_geometry::{
    displacement_energy_upper, displaces, psi_norm, rigidity_limit_check, supported_commutator_pair,
    UnitSphereSampler,
};
use fluxlab_core::isotopy_engine::Hamiltonian;
use fluxlab_core::torus_maps::catalog::MapSpec;
use fluxlab_core::torus_maps::{c0_distance, Region, TorusMap};

use super::{subsample, Checks, Ctx, Suite};
use crate::sequence::{build_perturbation_sequence, perturbation_hamiltonian};

const COLLAPSE: &str = "collapse identity [[f, φ⁻¹], ψ] = [φ, ψ] for φ, ψ supported in U and f displacing U";
const CHAIN: &str = "energy chain ‖[φ, ψ]‖^∞ ≤ (C_{ψ⁻¹} + 1)(C_φ + 1) ‖f‖^∞";
const POSITIVE: &str = "E^Ω(U) ≥ ‖[φ, ψ]‖^∞ / ((C_{ψ⁻¹} + 1)(C_φ + 1)) > 0";
const UPPER: &str = "E^Ω(U) is the infimum of ‖ψ‖^∞ over ψ displacing U, +∞ when none does";
const PAIR: &str = "volume-preserving, vanishing-flux maps supported in U with [φ, ψ] ≠ id";
const MONOTONE: &str = "E^Ω is monotone: U ⊂ V gives E^Ω(U) ≤ E^Ω(V)";

pub const ENERGY_POSITIVITY: Suite = Suite {
    name: "energy-positivity",
    summary: "positivity of the displacement energy of a strip through the commutator chain",
    anchors: &[COLLAPSE, CHAIN, POSITIVE, UPPER, PAIR, MONOTONE],
    run: energy_positivity,
};

fn candidates(ctx: &Ctx) -> Vec<(&'static str, TorusMap)> {
    let l = ctx.mesh.periods();
    vec![
        ("half-shift", ctx.half_shift()),
        ("third-shift", TorusMap::translation(ctx.mesh, [l[0] / 3.0, 0.1 * l[1]])),
        ("shear", TorusMap::shear(ctx.mesh, 0.1)),
        ("identity", TorusMap::identity(ctx.mesh)),
    ]
}

fn energy_positivity(ctx: &Ctx, c: &mut Checks) {
    let mesh = ctx.mesh;
    let mut lower = None;
    c.section("chain", CHAIN, |c| {
        let ch = ctx.strip_chain()?;
        c.le("collapse/strip", COLLAPSE, ch.collapse_residual, ctx.tol.collapse);
        c.le("chain/strip", CHAIN, ch.norm_commutator, ch.bound * (1.0 + ch.slack));
        c.note(format!("C_ψ⁻¹ = {:.6}, C_φ = {:.6}, ‖f‖ = {:.6}", ch.c_psi_inv, ch.c_phi, ch.norm_f));
        c.gt("chain/commutator-distance", PAIR, ch.commutator_distance, ctx.tol.commutator_distance);
        c.gt("lower-bound/strip", POSITIVE, ch.lower_bound, 0.0);
        lower = Some(ch.lower_bound);
        Ok(())
    });
    c.section("upper", UPPER, |c| {
        let u = ctx.strip()?;
        let cands = candidates(ctx);
        let maps: Vec<TorusMap> = cands.iter().map(|(_, m)| m.clone()).collect();
        let up = displacement_energy_upper(&u, &maps, &ctx.sampler)?;
        for ((name, _), norm) in cands.iter().zip(&up.norms) {
            if let (Some(n), Some(lb)) = (norm, lower) {
                c.le(&format!("lower-bound/below-{name}"), POSITIVE, lb, *n);
            }
        }
        c.lt("upper/strip", UPPER, up.value, f64::INFINITY);
        c.note(format!("best candidate {:?}", up.best.map(|i| cands[i].0)));
        let none = displacement_energy_upper(&u, &maps[2..], &ctx.sampler)?;
        c.ge("upper/no-displacer", UPPER, none.value, f64::INFINITY);
        let thin = Region::vertical_strip(&mesh, 0.05 * mesh.period(0), 0.2 * mesh.period(0))?;
        let inner = displacement_energy_upper(&thin, &maps[..2], &ctx.sampler)?;
        c.le("monotone/thin-strip", MONOTONE, inner.value, up.value);
        Ok(())
    });
    c.section("ball-pair", PAIR, |c| {
        let l = mesh.periods();
        let ball = Region::ball([0.5 * l[0], 0.5 * l[1]], 0.25 * l[0].min(l[1]))?;
        let p = supported_commutator_pair(&mesh, &ball, ctx.k)?;
        c.gt("ball-pair/commutator-distance", PAIR, p.distance_to_identity, ctx.tol.commutator_distance);
        c.le("ball-pair/volume-error", PAIR, p.volume_errors[0].max(p.volume_errors[1]), ctx.tol.volume);
        match p.fluxes {
            Some(f) => {
                let worst = f.iter().flatten().fold(0.0f64, |a, v| a.max(v.abs()));
                c.le("ball-pair/flux", PAIR, worst, ctx.tol.flux_hamiltonian);
            }
            None => c.fail("ball-pair/flux", PAIR, "bump flows are not symplectic"),
        }
        c.le("ball-pair/outside", PAIR, p.outside_displacement, 1e-12);
        Ok(())
    });
    c.section("degenerate-sampler", UPPER, |c| {
        let coarse = UnitSphereSampler::new(0, 1, ctx.sampler.seed);
        let n = psi_norm(&ctx.half_shift(), &coarse)?.norm_lower_bound;
        c.ge("degenerate-sampler/half-shift", UPPER, n, 0.0);
        Ok(())
    });
}

const CONVERGENT: &str = "rigidity: d₀(φ_i, φ_j) → 0 and ‖φ_i ∘ φ⁻¹‖^∞ → 0 together with d₀(φ_i, φ) → 0";
const FLOOR: &str = "rigidity: a sequence converging to ψ ≠ φ keeps ‖φ_i ∘ φ⁻¹‖^∞ above E^Ω of a displaced set";

pub const RIGIDITY_LIMIT: Suite = Suite {
    name: "rigidity-limit",
    summary: "norm and C⁰ premises vanish together on convergent sequences, and stay apart otherwise",
    anchors: &[CONVERGENT, FLOOR],
    run: rigidity,
};

fn rigidity(ctx: &Ctx, c: &mut Checks) {
    let mesh = ctx.mesh;
    let amps = ctx.cfg.schedule.amplitudes();
    let picks = subsample(amps.len());
    let sub: Vec<f64> = picks.iter().map(|&i| amps[i]).collect();
    let indices: Vec<usize> = picks.iter().map(|&i| ctx.cfg.schedule.indices[i]).collect();
    let h: Hamiltonian = perturbation_hamiltonian(&mesh, ctx.cfg.schedule.perturbation);
    let premise = ctx.tol.premise;
    c.section("convergent", CONVERGENT, |c| {
        let phi = MapSpec::Twist { epsilon: 0.1 }.build(&mesh)?;
        let seq = build_perturbation_sequence(&phi, &sub, &h)?;
        let rep = rigidity_limit_check(&seq, &phi, &ctx.sampler)?;
        let last = rep.rows.last().unwrap();
        c.le("convergent/norm-final", CONVERGENT, last.norm, premise);
        c.le("convergent/distance-final", CONVERGENT, rep.final_distance, premise);
        c.le("convergent/premise-c0", CONVERGENT, rep.rows[rep.rows.len() - 2].c0_to_last, premise);
        let violated = rep.pattern_violated(premise, premise);
        c.le("convergent/pattern", CONVERGENT, if violated { 1.0 } else { 0.0 }, 0.0);
        c.note(format!("indices {indices:?}, norms {:?}", rep.rows.iter().map(|r| r.norm).collect::<Vec<_>>()));
        Ok(())
    });
    c.section("separated", FLOOR, |c| {
        let chain = ctx.strip_chain()?;
        let strip = ctx.strip()?;
        let target = ctx.half_shift();
        let seq = build_perturbation_sequence(&target, &sub, &h)?;
        let displacing = seq.iter().filter(|m| displaces(m, &strip).displaces).count();
        c.ge("separated/displacing", FLOOR, displacing as f64, seq.len() as f64);
        let id = TorusMap::identity(mesh);
        let rep = rigidity_limit_check(&seq, &id, &ctx.sampler)?;
        c.ge("separated/norm-floor", FLOOR, rep.min_norm(), chain.lower_bound);
        let to_target = c0_distance(seq.last().unwrap(), &target)?;
        c.note(format!("floor from the strip energy chain; final d₀ to the limit {to_target:.3e}"));
        c.gt("separated/distance", FLOOR, rep.final_distance, premise);
        Ok(())
    });
}
