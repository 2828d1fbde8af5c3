use super::Isotopy;
use crate::error::{FluxError, Result};
use crate::exterior_calculus::{OneForm, ScalarField};
use crate::mesh::Point;
use crate::quad;
use crate::spectral::TrigSeries;
use crate::torus_maps::{Interpolation, Resampler};

fn require_closed(alpha: &OneForm) -> Result<()> {
    let residual = alpha.closedness_residual();
    let tolerance = alpha.closed_tolerance();
    if residual > tolerance {
        return Err(FluxError::NotClosed { residual, tolerance });
    }
    Ok(())
}

fn sample_index(phi: &Isotopy, t: f64) -> Result<usize> {
    let s = t * phi.k() as f64;
    let j = s.round();
    if !(0.0..=phi.k() as f64).contains(&j) || (s - j).abs() > 1e-9 {
        return Err(FluxError::Precondition(format!("t = {t} is not a sample time of a K = {} path", phi.k())));
    }
    Ok(j as usize)
}

/// Grid points are read off the stored samples; other points go through the
/// exact trigonometric interpolant.
fn grid_index(phi: &Isotopy, x: Point) -> Option<usize> {
    let mesh = phi.mesh();
    let mut ij = [0usize; 2];
    for c in 0..2 {
        let s = x[c] / mesh.spacing(c);
        if (s - s.round()).abs() > 1e-12 {
            return None;
        }
        ij[c] = (s.round() as i64).rem_euclid(mesh.n() as i64) as usize;
    }
    Some(mesh.index(ij[0], ij[1]))
}

fn orbit_positions(phi: &Isotopy, x: Point) -> Result<Vec<Point>> {
    match grid_index(phi, x) {
        None => phi.orbit(x),
        Some(idx) => {
            let mesh = phi.mesh();
            let mut out = Vec::with_capacity(phi.k() + 1);
            let mut prev = phi.map(0).displacement_at_index(idx);
            let mut acc = prev;
            out.push([x[0] + acc[0], x[1] + acc[1]]);
            for j in 1..=phi.k() {
                let u = phi.map(j).displacement_at_index(idx);
                for c in 0..2 {
                    let inc = mesh.min_image(u[c] - prev[c], c);
                    if inc.abs() >= 0.25 * mesh.period(c) {
                        return Err(FluxError::LiftAmbiguous { sample: j, increment: inc });
                    }
                    acc[c] += inc;
                }
                prev = u;
                out.push([x[0] + acc[0], x[1] + acc[1]]);
            }
            Ok(out)
        }
    }
}

/// `∫ α` along `s ↦ φ_s(x)` for `s ∈ [0, t]`; `t` must be a sample time.
///
/// The orbit velocity comes from fourth-order differences of the tracked
/// positions, independently of any stored velocity.
pub fn orbit_integral_to(phi: &Isotopy, x: Point, alpha: &OneForm, t: f64) -> Result<f64> {
    require_closed(alpha)?;
    let jt = sample_index(phi, t)?;
    if jt == 0 {
        return Ok(0.0);
    }
    let k = phi.k();
    let pos = orbit_positions(phi, x)?;
    let a0 = TrigSeries::new(alpha.component(0).values(), alpha.mesh());
    let a1 = TrigSeries::new(alpha.component(1).values(), alpha.mesh());
    let h = phi.dt();
    let integrand: Vec<f64> = (0..=jt)
        .map(|j| {
            let vel = if k >= 4 {
                let (s, w) = quad::derivative_stencil(j, k);
                let mut v = [0.0; 2];
                for m in 0..5 {
                    v[0] += w[m] * pos[s + m][0];
                    v[1] += w[m] * pos[s + m][1];
                }
                [v[0] / (12.0 * h), v[1] / (12.0 * h)]
            } else {
                let (a, b) = if j < k { (j, j + 1) } else { (j - 1, j) };
                [(pos[b][0] - pos[a][0]) / h, (pos[b][1] - pos[a][1]) / h]
            };
            a0.eval(pos[j]) * vel[0] + a1.eval(pos[j]) * vel[1]
        })
        .collect();
    Ok(quad::simpson(&integrand, h))
}

/// `∫_{𝒪_x} α` over the whole orbit.
pub fn orbit_integral(phi: &Isotopy, x: Point, alpha: &OneForm) -> Result<f64> {
    orbit_integral_to(phi, x, alpha, 1.0)
}

/// `𝓕_α^t(Φ) = ∫₀^t φ_s*(α(φ̇_s)) ds`, composite Simpson over the samples.
pub fn f_functional(phi: &Isotopy, alpha: &OneForm, t: f64) -> Result<ScalarField> {
    require_closed(alpha)?;
    if alpha.mesh() != phi.mesh() {
        return Err(FluxError::MeshMismatch("form and isotopy live on different meshes".into()));
    }
    let jt = sample_index(phi, t)?;
    let mesh = *phi.mesh();
    if jt == 0 {
        return Ok(ScalarField::zeros(mesh));
    }
    let w = quad::simpson_weights(jt, phi.dt());
    let r = Resampler::new(Interpolation::Trigonometric, &[alpha.component(0), alpha.component(1)]);
    let mut acc = vec![0.0; mesh.len()];
    let mut buf = [0.0; 2];
    for (j, wj) in w.iter().enumerate() {
        let v = phi.lagrangian_velocity(j);
        let images = phi.map(j).grid_images();
        for (k, a) in acc.iter_mut().enumerate() {
            r.eval(images[k], &mut buf);
            let x = v.at_index(k);
            *a += wj * (buf[0] * x[0] + buf[1] * x[1]);
        }
    }
    ScalarField::new(mesh, acc)
}

/// `℧_α^H(x) = ∫ α` along the straight segment from `x` to the tracked lift
/// of `h₁(x)`, the geodesic homotopic to the orbit.
pub fn geodesic_functional(h: &Isotopy, alpha: &OneForm) -> Result<ScalarField> {
    require_closed(alpha)?;
    let mesh = *h.mesh();
    let track = h.lift_track()?;
    let r = Resampler::new(Interpolation::Trigonometric, &[alpha.component(0), alpha.component(1)]);
    let gl = quad::gauss_legendre_8();
    let piece = 0.125 * mesh.period(0).min(mesh.period(1));
    let mut out = Vec::with_capacity(mesh.len());
    let mut buf = [0.0; 2];
    for k in 0..mesh.len() {
        let x = mesh.point_at(k);
        let w = [track.endpoint[0].values()[k], track.endpoint[1].values()[k]];
        let len = w[0].hypot(w[1]);
        if len == 0.0 {
            out.push(0.0);
            continue;
        }
        let pieces = (len / piece).ceil().max(1.0) as usize;
        let mut acc = 0.0;
        for p in 0..pieces {
            for &(s, ws) in &gl {
                let tau = (p as f64 + s) / pieces as f64;
                r.eval([x[0] + tau * w[0], x[1] + tau * w[1]], &mut buf);
                acc += ws * (buf[0] * w[0] + buf[1] * w[1]);
            }
        }
        out.push(acc / pieces as f64);
    }
    ScalarField::new(mesh, out)
}

/// `κ(H) = sup_x` length of the tracked polygonal orbit of `x`.
pub fn kappa(h: &Isotopy) -> Result<f64> {
    Ok(h.lift_track()?.length.max())
}
