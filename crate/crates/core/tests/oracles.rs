//! Closed-form values the library must reproduce.

use std::f64::consts::{PI, TAU};
use std::sync::Arc;

use approx::assert_abs_diff_eq;
use fluxlab_core::displacement_geometry::{
    delta, delta_tilde_field, delta_via_flux, displaces, nu_function, psi_norm, UnitSphereSampler,
};
use fluxlab_core::exterior_calculus::{
    codifferential, exterior_derivative, hodge_decompose, l2_norm, oscillation, periods, sup_norm, OneForm,
    ScalarField, TwoForm, VectorField,
};
use fluxlab_core::isotopy_engine::{
    c0bar_distance, commutator_generator, f_functional, fathi_mass_flow, generator_hodge_split, hofer_like_length,
    integrate_flow, orbit_integral, symplectic_flux, velocity_field, volume_flux, HamTerm, Hamiltonian, Isotopy,
};
use fluxlab_core::torus_maps::{
    c0_distance, compose, forward_distance, inverse, pullback_bound_constant, pullback_oneform, pushforward_vector,
    Region, TorusMap,
};
use fluxlab_core::GridMesh;

fn mesh() -> GridMesh {
    GridMesh::unit(32).unwrap()
}

fn max_diff(a: &ScalarField, b: &ScalarField) -> f64 {
    (a - b).sup_abs()
}

#[test]
fn derivative_of_a_sine() {
    let m = mesh();
    let f = ScalarField::from_fn(m, |p| (TAU * p[0]).sin());
    let df = exterior_derivative(&f);
    let expect = ScalarField::from_fn(m, |p| TAU * (TAU * p[0]).cos());
    assert!(max_diff(df.component(0), &expect) < 1e-11);
    assert!(df.component(1).sup_abs() < 1e-12);
}

#[test]
fn codifferential_is_the_nonnegative_laplacian() {
    let m = mesh();
    let f = ScalarField::from_fn(m, |p| (TAU * p[0]).sin());
    let lap = codifferential(&exterior_derivative(&f));
    assert!(max_diff(&lap, &f.map(|v| TAU * TAU * v)) < 1e-9);
}

#[test]
fn sup_and_l2_norms() {
    let m = mesh();
    assert_abs_diff_eq!(sup_norm(&OneForm::constant(m, [1.0, 1.0])), 2f64.sqrt(), epsilon = 1e-15);
    let c = OneForm::from_fn(m, |p| [(TAU * p[1]).cos(), 0.0]);
    assert_abs_diff_eq!(sup_norm(&c), 1.0, epsilon = 1e-15);
    assert_abs_diff_eq!(l2_norm(&OneForm::constant(m, [1.0, 0.0])), 1.0, epsilon = 1e-14);
    assert_abs_diff_eq!(l2_norm(&c), 0.5f64.sqrt(), epsilon = 1e-14);
}

#[test]
fn hodge_split_of_dx_plus_cos_dy() {
    let m = mesh();
    let a = OneForm::from_fn(m, |p| [1.0, (TAU * p[1]).cos()]);
    let s = hodge_decompose(&a);
    assert_abs_diff_eq!(s.harmonic_coefficients()[0], 1.0, epsilon = 1e-14);
    assert_abs_diff_eq!(s.harmonic_coefficients()[1], 0.0, epsilon = 1e-14);
    let f = ScalarField::from_fn(m, |p| (TAU * p[1]).sin() / TAU);
    assert!(max_diff(&s.potential, &f) < 1e-13);
    assert!(sup_norm(&s.coexact) < 1e-13);
}

#[test]
fn periods_read_the_harmonic_part() {
    let m = mesh();
    let a = OneForm::from_fn(m, |p| {
        let g = 0.3 * (TAU * (p[0] + 2.0 * p[1])).cos();
        [0.7 + g, -1.2 + 2.0 * g]
    });
    let p = periods(&a).unwrap().periods;
    assert_abs_diff_eq!(p[0], 0.7, epsilon = 1e-13);
    assert_abs_diff_eq!(p[1], -1.2, epsilon = 1e-13);
}

#[test]
fn oscillation_of_a_sine() {
    let f = ScalarField::from_fn(mesh(), |p| (TAU * p[0]).sin());
    assert_abs_diff_eq!(oscillation(&f), 2.0, epsilon = 1e-14);
}

#[test]
fn shear_evaluation_and_group_laws() {
    let m = mesh();
    let s = TorusMap::shear(m, 0.1);
    let q = s.evaluate([0.0, 0.25]);
    assert_abs_diff_eq!(q[0], 0.1, epsilon = 1e-14);
    assert_abs_diff_eq!(q[1], 0.25, epsilon = 1e-14);
    let t = compose(&TorusMap::translation(m, [0.2, 0.3]), &TorusMap::translation(m, [0.1, -0.4])).unwrap();
    assert!(forward_distance(&t, &TorusMap::translation(m, [0.3, -0.1])) < 1e-13);
    let back = compose(&TorusMap::shear(m, -0.1), &s).unwrap();
    assert!(forward_distance(&back, &TorusMap::identity(m)) < 1e-12);
    assert!(forward_distance(&inverse(&s).unwrap(), &TorusMap::shear(m, -0.1)) < 1e-10);
}

#[test]
fn pullbacks_with_closed_forms() {
    let m = mesh();
    let a = OneForm::constant(m, [0.4, -1.1]);
    let t = TorusMap::translation(m, [0.3, 0.7]);
    assert!(sup_norm(&(&pullback_oneform(&t, &a) - &a)) < 1e-13);
    let s = TorusMap::shear(m, 0.1);
    let p = pullback_oneform(&s, &OneForm::constant(m, [1.0, 0.0]));
    let expect = OneForm::from_fn(m, |q| [1.0, TAU * 0.1 * (TAU * q[1]).cos()]);
    assert!(sup_norm(&(&p - &expect)) < 1e-12);
    let big = GridMesh::unit(128).unwrap();
    let n2 = l2_norm(&pullback_oneform(&TorusMap::shear(big, 0.1), &OneForm::constant(big, [1.0, 0.0]))).powi(2);
    assert!(((n2 - 1.197392088021787) / 1.197392088021787).abs() <= 1e-6, "{n2}");
    assert_abs_diff_eq!(1.0 + 2.0 * PI * PI * 0.01, 1.197392088021787, epsilon = 1e-15);
}

#[test]
fn translations_are_isometries() {
    let m = mesh();
    assert_abs_diff_eq!(pullback_bound_constant(&TorusMap::translation(m, [0.3, 0.7])), 1.0, epsilon = 1e-12);
    let x = VectorField::constant(m, [0.2, -0.5]);
    let y = pushforward_vector(&TorusMap::translation(m, [0.3, 0.7]), &x).unwrap();
    assert!((&y - &x).sup_norm() < 1e-13);
}

#[test]
fn c0_distance_of_translations() {
    let m = mesh();
    let id = TorusMap::identity(m);
    for c in [0.1, 0.3, 0.75] {
        let d = c0_distance(&id, &TorusMap::translation(m, [c, 0.0])).unwrap();
        assert_abs_diff_eq!(d, f64::min(c, 1.0 - c), epsilon = 1e-12);
    }
}

#[test]
fn translation_paths() {
    let m = mesh();
    let (c, d) = (0.3, -0.2);
    let iso = Isotopy::translation(m, [c, d], 16);
    let v = velocity_field(&iso).unwrap();
    for x in v.samples() {
        assert!((x - &VectorField::constant(m, [c, d])).sup_norm() < 1e-12);
    }
    let omega = TwoForm::area(m);
    let p = symplectic_flux(&iso, &omega).unwrap().periods;
    assert!((p[0] + d).abs() < 1e-10 && (p[1] - c).abs() < 1e-10, "{p:?}");
    let q = volume_flux(&iso, &omega).unwrap().periods;
    assert!((q[0] - p[0]).abs() < 1e-12 && (q[1] - p[1]).abs() < 1e-12);
    let mf = fathi_mass_flow(&iso).unwrap().components;
    assert!((mf[0] - c).abs() < 1e-8 && (mf[1] - d).abs() < 1e-8);
    let s = generator_hodge_split(&iso, &omega).unwrap();
    for (u, h) in s.u.iter().zip(&s.h) {
        assert!(u.sup_abs() < 1e-12);
        assert!((h[0] + d).abs() < 1e-12 && (h[1] - c).abs() < 1e-12);
    }
    assert_abs_diff_eq!(hofer_like_length(&iso).unwrap(), c.hypot(d), epsilon = 1e-12);
    let a = OneForm::constant(m, [2.0, 5.0]);
    assert_abs_diff_eq!(orbit_integral(&iso, [0.17, 0.4], &a).unwrap(), 2.0 * c + 5.0 * d, epsilon = 1e-12);
    let f = f_functional(&iso, &a, 0.5).unwrap();
    assert!((f.max() - 0.5 * (2.0 * c + 5.0 * d)).abs() < 1e-12);
    let c0 = c0bar_distance(&Isotopy::identity(m, 16), &Isotopy::translation(m, [0.3, 0.0], 16)).unwrap();
    assert_abs_diff_eq!(c0, 0.3, epsilon = 1e-12);
}

#[test]
fn horizontal_shear_flow() {
    let m = mesh();
    // H = cos(2πy)/2π, so X_H = (-sin 2πy, 0)
    let h = Hamiltonian::new(&m, vec![HamTerm::Fourier { k: [0, 1], amplitude: 0.5 / PI, phase: 0.0, rate: 0.0 }]);
    let iso = integrate_flow(Arc::new(h), &m, 16).unwrap();
    for j in [4, 16] {
        let t = iso.time(j);
        let exact = TorusMap::from_fn(m, |p| [-t * (TAU * p[1]).sin(), 0.0]).unwrap();
        assert!(forward_distance(iso.map(j), &exact) < 1e-12);
    }
    let p = symplectic_flux(&iso, &TwoForm::area(m)).unwrap().periods;
    assert!(p[0].abs() < 1e-8 && p[1].abs() < 1e-8);
}

#[test]
fn orbit_integral_of_an_exact_form() {
    let m = mesh();
    let g = |p: [f64; 2]| 0.2 * (TAU * p[0]).sin() * (TAU * p[1]).cos();
    let dg = OneForm::from_fn(m, |p| {
        [0.2 * TAU * (TAU * p[0]).cos() * (TAU * p[1]).cos(), -0.2 * TAU * (TAU * p[0]).sin() * (TAU * p[1]).sin()]
    });
    let iso = integrate_flow(Arc::new(Hamiltonian::cellular(&m, 0.1)), &m, 32).unwrap();
    let x = [0.31, 0.77];
    let end = iso.endpoint().evaluate(x);
    assert!((orbit_integral(&iso, x, &dg).unwrap() - (g(end) - g(x))).abs() < 1e-8);
}

#[test]
fn commuting_translations_have_a_trivial_generator() {
    let m = GridMesh::unit(16).unwrap();
    let g = commutator_generator(&Isotopy::translation(m, [0.2, 0.1], 16), &Isotopy::translation(m, [-0.1, 0.3], 16))
        .unwrap();
    assert!(g.pi().unwrap().iter().all(|p| p.sup_abs() < 1e-10));
    assert!(forward_distance(g.theta.endpoint(), &TorusMap::identity(m)) < 1e-12);
}

#[test]
fn displacement_potential_of_the_shear() {
    let m = mesh();
    let eps = 0.1;
    let s = TorusMap::shear(m, eps);
    let dx = OneForm::constant(m, [1.0, 0.0]);
    let p = [0.2, 0.15];
    let nu = nu_function(&s, &dx, p).unwrap();
    let expect = ScalarField::from_fn(m, |z| eps * (TAU * z[1]).sin() - eps * (TAU * p[1]).sin());
    assert!(max_diff(&nu, &expect) < 1e-12);
    assert_abs_diff_eq!(delta(&s, &dx, [0.0, 0.25]).unwrap(), -0.1, epsilon = 1e-12);
    let t = TorusMap::translation(m, [0.3, 0.7]);
    assert!(delta_tilde_field(&t, &OneForm::constant(m, [0.5, -2.0])).unwrap().sup_abs() < 1e-12);
    assert_eq!(delta(&s, &OneForm::zeros(m), p).unwrap(), 0.0);
}

#[test]
fn delta_of_a_translation_from_its_flux() {
    let m = mesh();
    let iso = Isotopy::translation(m, [0.3, 0.7], 16);
    let a = OneForm::constant(m, [1.5, -0.5]);
    assert!(delta_via_flux(iso.endpoint(), &a, [0.4, 0.1], &iso).unwrap().abs() < 1e-10);
}

#[test]
fn shear_norm_has_the_dx_witness() {
    let m = mesh();
    let s = TorusMap::shear(m, 0.1);
    let field = delta_tilde_field(&s, &OneForm::constant(m, [1.0, 0.0])).unwrap();
    assert_abs_diff_eq!(field.sup_abs(), 0.1, epsilon = 1e-12);
    let est = psi_norm(&s, &UnitSphereSampler::new(4, 16, 1)).unwrap();
    assert!(est.norm_lower_bound >= 0.1 - 1e-6, "{}", est.norm_lower_bound);
}

#[test]
fn half_shift_displaces_the_strip() {
    let m = mesh();
    let strip = Region::vertical_strip(&m, 0.0, 0.25).unwrap();
    assert!(displaces(&TorusMap::translation(m, [0.5, 0.0]), &strip).displaces);
    let band = Region::rect([0.0, 0.0], [1.0, 0.25]).unwrap();
    assert!(!displaces(&TorusMap::shear(m, 0.1), &band).displaces);
}
