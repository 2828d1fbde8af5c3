use std::f64::consts::TAU;
use std::sync::Arc;

use fluxlab_core::displacement_geometry::{delta, delta_at, delta_tilde_field, psi_norm, UnitSphereSampler};
use fluxlab_core::exterior_calculus::{
    exterior_derivative, hodge_decompose, l2_norm, periods, sup_norm, OneForm, ScalarField, TwoForm,
};
use fluxlab_core::isotopy_engine::{
    concat_reparam, integrate_flow, orbit_integral, symplectic_flux, BumpProfile, ConstantFlow, FlowField,
    Hamiltonian, Isotopy, SumFlow, TimeProfile,
};
use fluxlab_core::torus_maps::{
    c0_distance, compose, forward_distance, inverse, pullback_bound_constant, pullback_oneform, TorusMap,
};
use fluxlab_core::GridMesh;
use proptest::prelude::*;

fn mesh() -> GridMesh {
    GridMesh::unit(32).unwrap()
}

/// Trigonometric field with modes `|k|_∞ ≤ 2`.
fn trig(m: GridMesh, c: &[f64]) -> ScalarField {
    ScalarField::from_fn(m, |p| {
        let mut v = 0.0;
        let mut i = 0;
        for k0 in -2i32..=2 {
            for k1 in 0i32..=2 {
                let t = TAU * (k0 as f64 * p[0] + k1 as f64 * p[1]);
                v += c[i] * t.cos() + c[i + 1] * t.sin();
                i += 2;
            }
        }
        v
    })
}

const COEFFS: usize = 30;

fn coeffs() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0..1.0f64, COEFFS)
}

fn form(m: GridMesh, a: &[f64], b: &[f64]) -> OneForm {
    OneForm::new(trig(m, a), trig(m, b)).unwrap()
}

/// A closed form: harmonic part plus `dG`.
fn closed(m: GridMesh, h: [f64; 2], g: &[f64]) -> OneForm {
    &OneForm::constant(m, h) + &exterior_derivative(&trig(m, g))
}

/// Volume preserving maps: a translation after a shear in x and one in y.
fn map(m: GridMesh, p: [f64; 4]) -> TorusMap {
    TorusMap::from_fn(m, |q| {
        let s = p[0] * (TAU * q[1]).sin();
        let y = q[1] + p[1] * (TAU * (q[0] + s)).sin();
        [s + p[2], y - q[1] + p[3]]
    })
    .unwrap()
}

fn map_params() -> impl Strategy<Value = [f64; 4]> {
    [-0.05..0.05f64, -0.05..0.05f64, -0.5..0.5f64, -0.5..0.5f64]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn d_squared_vanishes(c in coeffs()) {
        let f = trig(mesh(), &c);
        let df = exterior_derivative(&f);
        prop_assert!(df.closedness_residual() <= 1e-12 * (1.0 + sup_norm(&df)));
    }

    #[test]
    fn hodge_split_reconstructs_and_is_orthogonal(a in coeffs(), b in coeffs()) {
        let m = mesh();
        let alpha = form(m, &a, &b);
        let s = hodge_decompose(&alpha);
        let h = OneForm::constant(m, s.harmonic_coefficients());
        let back = &(&exterior_derivative(&s.potential) + &h) + &s.coexact;
        prop_assert!(l2_norm(&(&back - &alpha)) <= 1e-8 * (1.0 + l2_norm(&alpha)));
        let df = exterior_derivative(&s.potential);
        prop_assert!(df.inner(&h).abs() <= 1e-10 * (1.0 + l2_norm(&alpha)));
        prop_assert!(df.inner(&s.coexact).abs() <= 1e-10 * (1.0 + l2_norm(&alpha)));
    }

    #[test]
    fn harmonic_norms_agree(h0 in -3.0..3.0f64, h1 in -3.0..3.0f64) {
        let h = OneForm::constant(mesh(), [h0, h1]);
        prop_assert!((sup_norm(&h) - l2_norm(&h)).abs() <= 1e-12 * (1.0 + sup_norm(&h)));
    }

    #[test]
    fn periods_ignore_exact_terms(h0 in -2.0..2.0f64, h1 in -2.0..2.0f64, g in coeffs()) {
        let p = periods(&closed(mesh(), [h0, h1], &g)).unwrap().periods;
        prop_assert!((p[0] - h0).abs() < 1e-12 && (p[1] - h1).abs() < 1e-12);
    }

    #[test]
    fn psi_norm_grows_with_the_budget(p in map_params(), seed in 0u64..1000) {
        let f = map(mesh(), p);
        let small = psi_norm(&f, &UnitSphereSampler::new(2, 8, seed)).unwrap().norm_lower_bound;
        let more = psi_norm(&f, &UnitSphereSampler::new(2, 32, seed)).unwrap().norm_lower_bound;
        let wider = psi_norm(&f, &UnitSphereSampler::new(4, 32, seed)).unwrap().norm_lower_bound;
        prop_assert!(more >= small && wider >= more, "{small} {more} {wider}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn pullback_is_functorial(p in map_params(), q in map_params(), a in coeffs(), b in coeffs()) {
        let m = mesh();
        let (f, g) = (map(m, p), map(m, q));
        let alpha = form(m, &a, &b);
        let lhs = pullback_oneform(&compose(&f, &g).unwrap(), &alpha);
        let rhs = pullback_oneform(&g, &pullback_oneform(&f, &alpha));
        prop_assert!(sup_norm(&(&lhs - &rhs)) <= 1e-6 * sup_norm(&alpha));
    }

    #[test]
    fn inverse_is_an_involution(p in map_params()) {
        let f = map(mesh(), p);
        let back = inverse(&inverse(&f).unwrap()).unwrap();
        prop_assert!(forward_distance(&back, &f) < 1e-9);
        let id = compose(&inverse(&f).unwrap(), &f).unwrap();
        prop_assert!(forward_distance(&id, &TorusMap::identity(mesh())) < 1e-9);
    }

    #[test]
    fn pullback_keeps_closed_forms_closed_and_bounded(p in map_params(), h0 in -1.0..1.0f64, h1 in -1.0..1.0f64, g in coeffs()) {
        let m = mesh();
        let f = map(m, p);
        let alpha = closed(m, [h0, h1], &g);
        let pulled = pullback_oneform(&f, &alpha);
        prop_assert!(pulled.closedness_residual() <= 1e-8 * (1.0 + sup_norm(&pulled)) * 10.0);
        prop_assert!(sup_norm(&pulled) <= pullback_bound_constant(&f) * sup_norm(&alpha) * (1.0 + 1e-12));
    }

    // uniform in the base point: pointwise the first order term can vanish
    #[test]
    fn delta_is_c0_continuous(eps in -0.1..0.1f64, a in coeffs()) {
        let m = mesh();
        let alpha = closed(m, [1.0, -0.5], &a.iter().map(|v| 0.1 * v).collect::<Vec<_>>());
        let norm = l2_norm(&alpha);
        let psi = TorusMap::shear(m, eps);
        let base = delta_tilde_field(&psi, &alpha).unwrap();
        let mut gaps = Vec::new();
        for h in [0.1, 0.05, 0.025, 0.0125] {
            let near = TorusMap::shear(m, eps + h);
            prop_assert!(c0_distance(&psi, &near).unwrap() <= h + 1e-12);
            gaps.push((&delta_tilde_field(&near, &alpha).unwrap() - &base).sup_abs() / norm);
        }
        prop_assert!(gaps.windows(2).all(|w| w[1] <= w[0]), "{gaps:?}");
        let p = [0.3, 0.6];
        let pointwise = (delta(&TorusMap::shear(m, eps + 0.0125), &alpha, p).unwrap() - delta(&psi, &alpha, p).unwrap()).abs();
        prop_assert!(pointwise <= gaps[3] + 1e-12);
    }
}

fn drifting(m: &GridMesh, eps: f64, drift: [f64; 2]) -> Arc<dyn FlowField> {
    Arc::new(SumFlow(vec![Arc::new(Hamiltonian::twist(m, eps)), Arc::new(ConstantFlow(drift))]))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(4))]

    // ‖α‖ (Δ_z - Δ_z') = -Vol (∫_z α - ∫_z' α) along the orbits
    #[test]
    fn delta_base_points_differ_by_orbit_integrals(
        eps in -0.2..0.2f64, c in -0.3..0.3f64, d in -0.3..0.3f64, g in coeffs(),
        z in [0.0..1.0f64, 0.0..1.0f64], w in [0.0..1.0f64, 0.0..1.0f64],
    ) {
        let m = GridMesh::unit(64).unwrap();
        let iso = integrate_flow(drifting(&m, eps, [c, d]), &m, 64).unwrap();
        let alpha = closed(m, [0.7, 0.2], &g.iter().map(|v| 0.1 * v).collect::<Vec<_>>());
        let (z, w) = ([z[0], z[1]], [w[0], w[1]]);
        let ds = delta_at(iso.endpoint(), &alpha, &[z, w]).unwrap();
        let lhs = l2_norm(&alpha) * (ds[0] - ds[1]);
        let rhs = -m.volume() * (orbit_integral(&iso, z, &alpha).unwrap() - orbit_integral(&iso, w, &alpha).unwrap());
        prop_assert!((lhs - rhs).abs() <= 1e-6 * (1.0 + rhs.abs()), "{lhs} {rhs}");
    }

    #[test]
    fn flux_adds_and_ignores_time_changes(c in -0.3..0.3f64, d in -0.3..0.3f64, eps in -0.2..0.2f64) {
        let m = mesh();
        let omega = TwoForm::area(m);
        let a = integrate_flow(drifting(&m, eps, [c, d]), &m, 32).unwrap();
        let b = Isotopy::translation(m, [d, -c], 32);
        let joined = concat_reparam(&a, &b, BumpProfile::default()).unwrap();
        let (pa, pb, pj) = (
            symplectic_flux(&a, &omega).unwrap().periods,
            symplectic_flux(&b, &omega).unwrap().periods,
            symplectic_flux(&joined, &omega).unwrap().periods,
        );
        prop_assert!((pj[0] - pa[0] - pb[0]).abs() < 1e-6 && (pj[1] - pa[1] - pb[1]).abs() < 1e-6, "{pj:?}");
        let wavy = a.reparametrized(TimeProfile::Sinusoidal { a: 0.5 }).unwrap();
        let pw = symplectic_flux(&wavy, &omega).unwrap().periods;
        prop_assert!((pw[0] - pa[0]).abs() < 1e-6 && (pw[1] - pa[1]).abs() < 1e-6, "{pw:?}");
    }
}
