//! Flux, mass flow and their duality.

use std::rc::Rc;

use fluxlab_core::exterior_calculus::TwoForm;
use fluxlab_core::isotopy_engine::{
    concat_reparam, fathi_mass_flow, symplectic_flux, volume_flux, BumpProfile, Isotopy, TimeProfile,
};
use fluxlab_core::Result;

use super::fixtures::{Flow, TRANSLATIONS};
use super::{Checks, Ctx, Suite};

const TRANSLATION: &str = "flux of the translation flow by (c, d) has periods (-d, c)";
const MASS: &str = "Fathi mass flow of the translation flow by (c, d) is (c, d)";
const DUALITY: &str = "Poincaré duality between flux and mass flow: (m₁, m₂) = (p₂, -p₁)";
const HAMILTONIAN: &str = "Hamiltonian isotopies have zero flux";
const VOLUME: &str = "on a surface Flux_Ω coincides with the symplectic flux S̃";
const ADDITIVE: &str = "flux is additive under boundary-flat concatenation";
const REPARAM: &str = "flux is invariant under reparametrization of time";

pub const FLUX_DUALITY: Suite = Suite {
    name: "flux-duality",
    summary: "closed-form fluxes and mass flows, duality, additivity and reparametrization invariance",
    anchors: &[TRANSLATION, MASS, DUALITY, HAMILTONIAN, VOLUME, ADDITIVE, REPARAM],
    run: flux_duality,
};

fn max_abs(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - b[0]).abs().max((a[1] - b[1]).abs())
}

fn flux_duality(ctx: &Ctx, c: &mut Checks) {
    let mesh = ctx.mesh;
    let omega = TwoForm::area(mesh);
    let mut paths: Vec<(String, Result<Rc<Isotopy>>)> = Vec::new();
    for (i, &t) in TRANSLATIONS.iter().enumerate() {
        let name = format!("translation-{i}");
        let iso = Rc::new(Isotopy::translation(mesh, t, ctx.k));
        c.section(&name, TRANSLATION, |c| {
            let p = symplectic_flux(&iso, &omega)?.periods;
            c.le(&format!("{name}/flux"), TRANSLATION, max_abs(p, [-t[1], t[0]]), ctx.tol.flux_translation);
            let m = fathi_mass_flow(&iso)?.components;
            c.le(&format!("{name}/mass-flow"), MASS, max_abs(m, t), ctx.tol.mass_flow);
            Ok(())
        });
        paths.push((name, Ok(iso)));
    }
    for f in Flow::ALL {
        paths.push((f.label().to_string(), f.isotopy(ctx)));
    }
    for (name, iso) in &paths {
        c.section(&format!("duality/{name}"), DUALITY, |c| {
            let iso = iso.as_ref().map_err(Clone::clone)?;
            let p = symplectic_flux(iso, &omega)?.periods;
            let m = fathi_mass_flow(iso)?.components;
            c.le(&format!("duality/{name}"), DUALITY, max_abs(m, [p[1], -p[0]]), ctx.tol.duality);
            let v = volume_flux(iso, &omega)?.periods;
            c.le(&format!("volume-flux/{name}"), VOLUME, max_abs(v, p), ctx.tol.flux_volume);
            Ok(())
        });
    }
    for f in Flow::HAMILTONIAN {
        c.section(&format!("hamiltonian/{}", f.label()), HAMILTONIAN, |c| {
            let p = symplectic_flux(&*f.isotopy(ctx)?, &omega)?.periods;
            c.le(&format!("hamiltonian/{}", f.label()), HAMILTONIAN, max_abs(p, [0.0, 0.0]), ctx.tol.flux_hamiltonian);
            Ok(())
        });
    }
    c.section("additivity", ADDITIVE, |c| {
        let u = BumpProfile::default();
        let t0 = Rc::new(Isotopy::translation(mesh, TRANSLATIONS[0], ctx.k));
        let t1 = Rc::new(Isotopy::translation(mesh, TRANSLATIONS[1], ctx.k));
        let pairs = [
            ("translations", t0.clone(), t1),
            ("drift-flows", Flow::WobbleDrift.isotopy(ctx)?, Flow::TwistDrift.isotopy(ctx)?),
        ];
        for (name, a, b) in pairs {
            let joined = concat_reparam(&a, &b, u)?;
            let pa = symplectic_flux(&a, &omega)?.periods;
            let pb = symplectic_flux(&b, &omega)?.periods;
            let pj = symplectic_flux(&joined, &omega)?.periods;
            c.le(&format!("additivity/{name}"), ADDITIVE, max_abs(pj, [pa[0] + pb[0], pa[1] + pb[1]]), ctx.tol.flux_additivity);
        }
        Ok(())
    });
    c.section("reparametrization", REPARAM, |c| {
        let straight = Rc::new(Isotopy::translation(mesh, TRANSLATIONS[0], ctx.k));
        let drift = Flow::TwistDrift.isotopy(ctx)?;
        for (name, iso) in [("translation", straight), ("twist-drift-flow", drift)] {
            let wavy = ctx.cached(&format!("{name}-sinusoidal"), || iso.reparametrized(TimeProfile::Sinusoidal { a: 0.5 }))?;
            let p = symplectic_flux(&iso, &omega)?.periods;
            let q = symplectic_flux(&wavy, &omega)?.periods;
            c.le(&format!("reparametrization/{name}"), REPARAM, max_abs(p, q), ctx.tol.flux_additivity);
        }
        Ok(())
    });
}
