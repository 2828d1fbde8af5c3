use std::f64::consts::PI;
use std::fs;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::{displacement_potential, nu_function};
use crate::error::{FluxError, Result};
use crate::exterior_calculus::{l2_norm, OneForm, ScalarField, TwoForm};
use crate::isotopy_engine::{symplectic_flux, Isotopy};
use crate::mesh::{GridMesh, Point};
use crate::quad;
use crate::torus_maps::{self, pullback_bound_constant, pullback_oneform, TorusMap};

/// An `L²`-unit closed form: a harmonic `dx_k / √Vol`, or `dG / ‖dG‖` with
/// `G = cos θ` or `sin θ`, `θ = 2π(k₀x/L₀ + k₁y/L₁)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "dir", rename_all = "snake_case")]
pub enum Direction {
    Harmonic { axis: usize },
    Cos { k: [i32; 2] },
    Sin { k: [i32; 2] },
}

fn wave(mesh: &GridMesh, k: [i32; 2]) -> [f64; 2] {
    [2.0 * PI * k[0] as f64 / mesh.period(0), 2.0 * PI * k[1] as f64 / mesh.period(1)]
}

impl Direction {
    fn scale(&self, mesh: &GridMesh) -> f64 {
        match *self {
            Direction::Harmonic { .. } => 1.0 / mesh.volume().sqrt(),
            Direction::Cos { k } | Direction::Sin { k } => {
                let w = wave(mesh, k);
                1.0 / (w[0].hypot(w[1]) * (0.5 * mesh.volume()).sqrt())
            }
        }
    }

    pub fn form(&self, mesh: &GridMesh) -> OneForm {
        let s = self.scale(mesh);
        match *self {
            Direction::Harmonic { axis } => {
                let mut c = [0.0; 2];
                c[axis] = s;
                OneForm::constant(*mesh, c)
            }
            Direction::Cos { k } => {
                let w = wave(mesh, k);
                OneForm::from_fn(*mesh, |p| {
                    let v = -s * (w[0] * p[0] + w[1] * p[1]).sin();
                    [v * w[0], v * w[1]]
                })
            }
            Direction::Sin { k } => {
                let w = wave(mesh, k);
                OneForm::from_fn(*mesh, |p| {
                    let v = s * (w[0] * p[0] + w[1] * p[1]).cos();
                    [v * w[0], v * w[1]]
                })
            }
        }
    }
}

/// Random points of the truncated unit sphere spanned by the harmonic forms
/// and the exact forms `dG` with Fourier modes `|k|_∞ ≤ m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UnitSphereSampler {
    pub m: usize,
    pub count: usize,
    pub seed: u64,
    /// How many of the best samples are refined by alternating ascent.
    #[serde(default = "default_refine")]
    pub refine: usize,
}

fn default_refine() -> usize {
    4
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SamplerMeta {
    pub m: usize,
    pub count: usize,
    pub seed: u64,
}

impl UnitSphereSampler {
    pub fn new(m: usize, count: usize, seed: u64) -> Self {
        Self { m, count, seed, refine: default_refine() }
    }

    pub fn meta(&self) -> SamplerMeta {
        SamplerMeta { m: self.m, count: self.count, seed: self.seed }
    }

    pub fn directions(&self) -> Vec<Direction> {
        let m = self.m as i32;
        let mut out = vec![Direction::Harmonic { axis: 0 }, Direction::Harmonic { axis: 1 }];
        for k0 in -m..=m {
            for k1 in 0..=m {
                if k1 == 0 && k0 <= 0 {
                    continue;
                }
                out.push(Direction::Cos { k: [k0, k1] });
                out.push(Direction::Sin { k: [k0, k1] });
            }
        }
        out
    }

    pub fn dimension(&self) -> usize {
        2 + ((2 * self.m + 1) * (2 * self.m + 1) - 1)
    }

    fn check(&self, mesh: &GridMesh) -> Result<()> {
        if self.count == 0 {
            return Err(FluxError::EmptySampler);
        }
        if 2 * self.m >= mesh.n() {
            return Err(FluxError::Precondition(format!(
                "sampler mode {} is not resolved by an N = {} grid",
                self.m,
                mesh.n()
            )));
        }
        Ok(())
    }

    /// `count` unit coefficient vectors, reproducible from the seed.
    pub fn coefficients(&self) -> Vec<Vec<f64>> {
        let dim = self.dimension();
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        (0..self.count)
            .map(|_| {
                let mut c: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(&mut rng)).collect();
                let n = c.iter().map(|v| v * v).sum::<f64>().sqrt();
                c.iter_mut().for_each(|v| *v /= n);
                c
            })
            .collect()
    }

    pub fn form(&self, mesh: &GridMesh, coefficients: &[f64]) -> Result<OneForm> {
        let dirs = self.directions();
        if coefficients.len() != dirs.len() {
            return Err(FluxError::Precondition(format!(
                "expected {} coefficients, got {}",
                dirs.len(),
                coefficients.len()
            )));
        }
        let mut acc = [vec![0.0; mesh.len()], vec![0.0; mesh.len()]];
        for (d, &c) in dirs.iter().zip(coefficients) {
            if c == 0.0 {
                continue;
            }
            let f = d.form(mesh);
            for (r, a) in acc.iter_mut().enumerate() {
                for (x, v) in a.iter_mut().zip(f.component(r).values()) {
                    *x += c * v;
                }
            }
        }
        let [a0, a1] = acc;
        OneForm::new(ScalarField::new(*mesh, a0)?, ScalarField::new(*mesh, a1)?)
    }

    /// The sampled forms themselves.
    pub fn samples(&self, mesh: &GridMesh) -> Result<Vec<OneForm>> {
        self.check(mesh)?;
        self.coefficients().iter().map(|c| self.form(mesh, c)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SampleKind {
    Random,
    /// Alternating ascent in `(z, α)` started from a random sample.
    Ascent,
    /// `max_z` of the row norm of the potential matrix, which is the
    /// supremum over the truncated sphere at grid points.
    RowScan,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleRow {
    pub id: usize,
    pub kind: SampleKind,
    /// `sup_z |Δ̃(ψ, α)_z|` for this sample.
    pub value: f64,
    pub point: Point,
}

/// A certified lower bound for `‖ψ‖^∞` together with its (heuristic)
/// maximizer.
#[derive(Debug, Clone, PartialEq)]
pub struct DisplacementReport {
    pub map: String,
    pub sampler: UnitSphereSampler,
    pub norm_lower_bound: f64,
    pub witness_coefficients: Vec<f64>,
    pub witness_point: Point,
    pub witness_form_periods: [f64; 2],
    pub table: Vec<SampleRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DisplacementSummary {
    pub map: String,
    pub sampler: SamplerMeta,
    pub norm_lower_bound: f64,
    pub estimate: String,
    pub maximizer: String,
    pub witness_form_periods: [f64; 2],
    pub witness_point: Point,
    pub table_path: String,
}

impl DisplacementReport {
    pub fn named(mut self, name: impl Into<String>) -> Self {
        self.map = name.into();
        self
    }

    pub fn witness_form(&self, mesh: &GridMesh) -> Result<OneForm> {
        self.sampler.form(mesh, &self.witness_coefficients)
    }

    pub fn summary(&self, table_path: impl Into<String>) -> DisplacementSummary {
        DisplacementSummary {
            map: self.map.clone(),
            sampler: self.sampler.meta(),
            norm_lower_bound: self.norm_lower_bound,
            estimate: "certified lower bound".into(),
            maximizer: "heuristic".into(),
            witness_form_periods: self.witness_form_periods,
            witness_point: self.witness_point,
            table_path: table_path.into(),
        }
    }

    pub fn table_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["id", "kind", "value", "z0", "z1"]).map_err(csv_err)?;
        for r in &self.table {
            let kind = match r.kind {
                SampleKind::Random => "random",
                SampleKind::Ascent => "ascent",
                SampleKind::RowScan => "row_scan",
            };
            w.write_record([
                r.id.to_string(),
                kind.to_string(),
                format!("{:e}", r.value),
                format!("{:e}", r.point[0]),
                format!("{:e}", r.point[1]),
            ])
            .map_err(csv_err)?;
        }
        String::from_utf8(w.into_inner().map_err(|e| FluxError::Format(e.to_string()))?)
            .map_err(|e| FluxError::Format(e.to_string()))
    }

    /// Writes `<stem>.csv` (the per-sample table) and `<stem>.json`.
    pub fn write(&self, dir: &Path, stem: &str) -> Result<DisplacementSummary> {
        let io = |p: &Path, e: std::io::Error| FluxError::Io { path: p.display().to_string(), message: e.to_string() };
        fs::create_dir_all(dir).map_err(|e| io(dir, e))?;
        let csv_path = dir.join(format!("{stem}.csv"));
        fs::write(&csv_path, self.table_csv()?).map_err(|e| io(&csv_path, e))?;
        let summary = self.summary(csv_path.display().to_string());
        let json_path = dir.join(format!("{stem}.json"));
        let text = serde_json::to_string_pretty(&summary).map_err(|e| FluxError::Format(e.to_string()))?;
        fs::write(&json_path, text).map_err(|e| io(&json_path, e))?;
        Ok(summary)
    }
}

fn csv_err(e: csv::Error) -> FluxError {
    FluxError::Format(e.to_string())
}

/// Row-major `N² × dim` matrix of zero-mean potentials of `ψ*e_i - e_i`.
fn potential_matrix(psi: &TorusMap, dirs: &[Direction]) -> Vec<f64> {
    let mesh = *psi.mesh();
    let npts = mesh.len();
    let dim = dirs.len();
    let u = psi.displacement();
    let mut p = vec![0.0; npts * dim];
    let mut col = vec![0.0; npts];
    let mut col2 = vec![0.0; npts];
    let mut i = 0;
    while i < dim {
        let s = dirs[i].scale(&mesh);
        match dirs[i] {
            Direction::Harmonic { axis } => {
                for (c, v) in col.iter_mut().zip(u[axis].values()) {
                    *c = s * v;
                }
                scatter(&mut p, dim, i, &mut col);
                i += 1;
            }
            Direction::Cos { k } | Direction::Sin { k } => {
                // Cos and Sin of the same mode are adjacent
                let w = wave(&mesh, k);
                for z in 0..npts {
                    let x = mesh.point_at(z);
                    let t0 = w[0] * x[0] + w[1] * x[1];
                    let t1 = t0 + w[0] * u[0].values()[z] + w[1] * u[1].values()[z];
                    let (s0, c0) = t0.sin_cos();
                    let (s1, c1) = t1.sin_cos();
                    col[z] = s * (c1 - c0);
                    col2[z] = s * (s1 - s0);
                }
                scatter(&mut p, dim, i, &mut col);
                scatter(&mut p, dim, i + 1, &mut col2);
                i += 2;
            }
        }
    }
    p
}

fn scatter(p: &mut [f64], dim: usize, i: usize, col: &mut [f64]) {
    let m = quad::mean(col);
    for (z, v) in col.iter().enumerate() {
        p[z * dim + i] = v - m;
    }
}

fn matvec(p: &[f64], dim: usize, c: &[f64]) -> Vec<f64> {
    p.chunks_exact(dim).map(|row| row.iter().zip(c).map(|(a, b)| a * b).sum()).collect()
}

/// First index of the largest absolute value.
fn argmax_abs(v: &[f64]) -> (usize, f64) {
    let mut best = (0, -1.0);
    for (i, x) in v.iter().enumerate() {
        if x.abs() > best.1 {
            best = (i, x.abs());
        }
    }
    best
}

fn check_isotopic(psi: &TorusMap) -> Result<()> {
    for axis in 0..2 {
        let mut c = [0.0; 2];
        c[axis] = 1.0;
        displacement_potential(psi, &OneForm::constant(*psi.mesh(), c))?;
    }
    Ok(())
}

/// Lower bound for `‖ψ‖^∞ = sup_{α ∈ 𝓑(1)} sup_z |Δ̃(ψ, α)_z|` over the
/// sampler's truncated sphere and the grid points.
///
/// On the truncated sphere `Δ̃(ψ, Σ cᵢeᵢ)_z = -Vol Σ cᵢ Pᵢ(z)` with `Pᵢ` the
/// zero-mean potential of `ψ*eᵢ - eᵢ`, so each sample is a column of one
/// matrix product.
pub fn psi_norm(psi: &TorusMap, sampler: &UnitSphereSampler) -> Result<DisplacementReport> {
    let mesh = *psi.mesh();
    sampler.check(&mesh)?;
    check_isotopic(psi)?;
    let vol = mesh.volume();
    let dirs = sampler.directions();
    let dim = dirs.len();
    let npts = mesh.len();
    let count = sampler.count;
    let p = potential_matrix(psi, &dirs);
    let coeffs = sampler.coefficients();
    let mut cmat = vec![0.0; dim * count];
    for (s, c) in coeffs.iter().enumerate() {
        for (i, v) in c.iter().enumerate() {
            cmat[i * count + s] = *v;
        }
    }
    let mut y = vec![0.0; npts * count];
    // SAFETY: the slices hold exactly npts×dim, dim×count and npts×count
    // row-major elements.
    unsafe {
        matrixmultiply::dgemm(
            npts,
            dim,
            count,
            1.0,
            p.as_ptr(),
            dim as isize,
            1,
            cmat.as_ptr(),
            count as isize,
            1,
            0.0,
            y.as_mut_ptr(),
            count as isize,
            1,
        );
    }
    let mut table = Vec::with_capacity(count + sampler.refine + 1);
    let mut witness: Vec<Vec<f64>> = Vec::with_capacity(count + sampler.refine + 1);
    for s in 0..count {
        let mut best = (0usize, -1.0f64);
        for z in 0..npts {
            let v = y[z * count + s].abs();
            if v > best.1 {
                best = (z, v);
            }
        }
        table.push(SampleRow { id: s, kind: SampleKind::Random, value: vol * best.1, point: mesh.point_at(best.0) });
        witness.push(coeffs[s].clone());
    }
    let mut order: Vec<usize> = (0..count).collect();
    order.sort_by(|a, b| table[*b].value.total_cmp(&table[*a].value).then(a.cmp(b)));
    for &s in order.iter().take(sampler.refine) {
        let mut c = coeffs[s].clone();
        let (mut z, mut val) = argmax_abs(&matvec(&p, dim, &c));
        for _ in 0..50 {
            let row = &p[z * dim..(z + 1) * dim];
            let nr = row.iter().map(|v| v * v).sum::<f64>().sqrt();
            if nr == 0.0 || nr <= val {
                break;
            }
            c = row.iter().map(|v| v / nr).collect();
            let (z2, v2) = argmax_abs(&matvec(&p, dim, &c));
            val = v2;
            if z2 == z {
                break;
            }
            z = z2;
        }
        table.push(SampleRow { id: table.len(), kind: SampleKind::Ascent, value: vol * val, point: mesh.point_at(z) });
        witness.push(c);
    }
    let (zs, rn) = p
        .chunks_exact(dim)
        .map(|row| row.iter().map(|v| v * v).sum::<f64>().sqrt())
        .enumerate()
        .fold((0usize, -1.0f64), |b, (z, v)| if v > b.1 { (z, v) } else { b });
    let row = &p[zs * dim..(zs + 1) * dim];
    let c: Vec<f64> = if rn > 0.0 {
        row.iter().map(|v| v / rn).collect()
    } else {
        coeffs[0].clone()
    };
    table.push(SampleRow { id: table.len(), kind: SampleKind::RowScan, value: vol * rn.max(0.0), point: mesh.point_at(zs) });
    witness.push(c);

    let best = table
        .iter()
        .enumerate()
        .fold(0usize, |b, (i, r)| if r.value > table[b].value { i } else { b });
    let wc = witness.swap_remove(best);
    let mut periods = [0.0; 2];
    for (d, c) in dirs.iter().zip(&wc) {
        if let Direction::Harmonic { axis } = d {
            periods[*axis] = c * d.scale(&mesh) * mesh.period(*axis);
        }
    }
    Ok(DisplacementReport {
        map: "map".into(),
        sampler: *sampler,
        norm_lower_bound: table[best].value,
        witness_point: table[best].point,
        witness_coefficients: wc,
        witness_form_periods: periods,
        table,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AxiomSlack {
    /// Allowed excess in `‖ψ∘φ‖ ≤ ‖ψ‖ + ‖φ‖`, relative to the right side.
    pub triangle: f64,
    /// Allowed `|‖ψ⁻¹‖ - ‖ψ‖|`, relative to `‖ψ‖`.
    pub duality: f64,
    /// Maps with `d₀(ψ, id) ≥ separation_distance` must have
    /// `‖ψ‖ ≥ separation_norm` (up to `1e-6`).
    pub separation_distance: f64,
    pub separation_norm: f64,
}

impl Default for AxiomSlack {
    fn default() -> Self {
        Self { triangle: 0.05, duality: 0.05, separation_distance: 0.1 - 1e-9, separation_norm: 0.1 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axiom {
    Positivity,
    Triangle,
    Duality,
    Separation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxiomCheck {
    pub axiom: Axiom,
    /// Indices into the input list.
    pub maps: Vec<usize>,
    pub value: f64,
    pub bound: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxiomReport {
    pub norms: Vec<f64>,
    pub inverse_norms: Vec<f64>,
    pub checks: Vec<AxiomCheck>,
}

impl AxiomReport {
    pub fn violations(&self) -> Vec<&AxiomCheck> {
        self.checks.iter().filter(|c| !c.pass).collect()
    }

    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

/// Positivity, triangle inequality over ordered pairs, duality and
/// separation on sampled estimates.
pub fn norm_axiom_report(maps: &[TorusMap], sampler: &UnitSphereSampler, slack: AxiomSlack) -> Result<AxiomReport> {
    let mut norms = Vec::with_capacity(maps.len());
    let mut inverse_norms = Vec::with_capacity(maps.len());
    let mut inverses = Vec::with_capacity(maps.len());
    let mut checks = Vec::new();
    for (i, m) in maps.iter().enumerate() {
        let n = psi_norm(m, sampler)?.norm_lower_bound;
        let inv = torus_maps::inverse(m)?;
        let ni = psi_norm(&inv, sampler)?.norm_lower_bound;
        norms.push(n);
        inverse_norms.push(ni);
        checks.push(AxiomCheck { axiom: Axiom::Positivity, maps: vec![i], value: n, bound: 0.0, pass: n >= 0.0 });
        let gap = (ni - n).abs();
        let bound = slack.duality * n;
        checks.push(AxiomCheck { axiom: Axiom::Duality, maps: vec![i], value: gap, bound, pass: gap <= bound });
        inverses.push(inv);
    }
    for i in 0..maps.len() {
        for j in 0..maps.len() {
            if i == j {
                continue;
            }
            let c = torus_maps::compose(&maps[i], &maps[j])?;
            let v = psi_norm(&c, sampler)?.norm_lower_bound;
            let bound = (1.0 + slack.triangle) * (norms[i] + norms[j]);
            checks.push(AxiomCheck { axiom: Axiom::Triangle, maps: vec![i, j], value: v, bound, pass: v <= bound });
        }
    }
    for (i, m) in maps.iter().enumerate() {
        let id = TorusMap::identity(*m.mesh());
        let d = torus_maps::c0_distance_with(m, &inverses[i], &id, &id);
        if d >= slack.separation_distance {
            let bound = slack.separation_norm - 1e-6;
            checks.push(AxiomCheck { axiom: Axiom::Separation, maps: vec![i], value: norms[i], bound, pass: norms[i] >= bound });
        }
    }
    Ok(AxiomReport { norms, inverse_norms, checks })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sandwich {
    pub norm_h: f64,
    pub norm_conjugate: f64,
    pub c_phi: f64,
    pub c_phi_inv: f64,
    /// `‖h‖ / C_{φ⁻¹}`.
    pub lower: f64,
    /// `C_φ ‖h‖`.
    pub upper: f64,
    pub slack: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConjugationReport {
    pub point: Point,
    pub flux: [f64; 2],
    /// `‖α‖ Δ(φhφ⁻¹, α)_{φ(x)}`.
    pub lhs: f64,
    /// `‖φ*α‖ Δ(h, φ*α)_x`.
    pub rhs: f64,
    pub residual: f64,
    /// The same two sides with each `Δ` normalized by its own form.
    pub literal_lhs: f64,
    pub literal_rhs: f64,
    pub literal_residual: f64,
    pub sandwich: Option<Sandwich>,
}

/// Compares `Δ(φ∘h∘φ⁻¹, α)_{φ(x)}` with `Δ(h, φ*α)_x` for the endpoint of a
/// vanishing-flux path, and optionally the norm sandwich
/// `‖h‖/C_{φ⁻¹} ≤ ‖φhφ⁻¹‖ ≤ C_φ ‖h‖` with slack `0.05 ‖h‖`.
pub fn conjugation_check(
    h: &TorusMap,
    phi: &Isotopy,
    x: Point,
    alpha: &OneForm,
    sampler: Option<&UnitSphereSampler>,
) -> Result<ConjugationReport> {
    let flux = symplectic_flux(phi, &TwoForm::area(*phi.mesh()))?.periods;
    if flux[0].abs().max(flux[1].abs()) > 1e-8 {
        return Err(FluxError::NonzeroFlux { p0: flux[0], p1: flux[1] });
    }
    let f = phi.endpoint();
    let finv = torus_maps::inverse(f)?;
    let conj = torus_maps::compose(f, &torus_maps::compose(h, &finv)?)?;
    let pulled = pullback_oneform(f, alpha);
    let lhs = nu_function(&conj, alpha, f.evaluate(x))?.integral();
    let rhs = nu_function(h, &pulled, x)?.integral();
    let (na, np) = (l2_norm(alpha), l2_norm(&pulled));
    let (literal_lhs, literal_rhs) = if na == 0.0 { (0.0, 0.0) } else { (lhs / na, rhs / np) };
    let sandwich = match sampler {
        None => None,
        Some(s) => {
            let norm_h = psi_norm(h, s)?.norm_lower_bound;
            let norm_conjugate = psi_norm(&conj, s)?.norm_lower_bound;
            let c_phi = pullback_bound_constant(f);
            let c_phi_inv = pullback_bound_constant(&finv);
            let lower = norm_h / c_phi_inv;
            let upper = c_phi * norm_h;
            let slack = 0.05 * norm_h;
            Some(Sandwich {
                norm_h,
                norm_conjugate,
                c_phi,
                c_phi_inv,
                lower,
                upper,
                slack,
                holds: norm_conjugate >= lower - slack && norm_conjugate <= upper + slack,
            })
        }
    };
    Ok(ConjugationReport {
        point: x,
        flux,
        lhs,
        rhs,
        residual: (lhs - rhs).abs(),
        literal_lhs,
        literal_rhs,
        literal_residual: (literal_lhs - literal_rhs).abs(),
        sandwich,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::displacement_geometry::delta_tilde_field;
    use crate::isotopy_engine::{integrate_flow, Hamiltonian};
    use std::sync::Arc;

    #[test]
    fn sampled_forms_are_unit_and_closed() {
        let mesh = GridMesh::unit(32).unwrap();
        let s = UnitSphereSampler::new(4, 8, 11);
        assert_eq!(s.directions().len(), s.dimension());
        for a in s.samples(&mesh).unwrap() {
            assert!((l2_norm(&a) - 1.0).abs() < 1e-10);
            assert!(a.is_closed());
        }
        for d in s.directions() {
            assert!((l2_norm(&d.form(&mesh)) - 1.0).abs() < 1e-12);
        }
        assert!(matches!(UnitSphereSampler::new(16, 4, 0).samples(&mesh), Err(FluxError::Precondition(_))));
        assert!(matches!(
            psi_norm(&TorusMap::identity(mesh), &UnitSphereSampler::new(2, 0, 0)),
            Err(FluxError::EmptySampler)
        ));
    }

    #[test]
    fn identity_and_shear_norms() {
        let mesh = GridMesh::unit(32).unwrap();
        let s = UnitSphereSampler::new(4, 16, 5);
        let id = psi_norm(&TorusMap::identity(mesh), &s).unwrap();
        assert_eq!(id.norm_lower_bound, 0.0);
        assert!(id.table.iter().all(|r| r.value == 0.0));
        let sh = psi_norm(&TorusMap::shear(mesh, 0.1), &s).unwrap();
        assert!(sh.norm_lower_bound >= 0.1 - 1e-12, "{}", sh.norm_lower_bound);
        let max = sh.table.iter().map(|r| r.value).fold(0.0, f64::max);
        assert_eq!(max, sh.norm_lower_bound);
    }

    #[test]
    fn sampled_values_match_the_hodge_route() {
        let mesh = GridMesh::unit(32).unwrap();
        let psi = integrate_flow(Arc::new(Hamiltonian::cellular(&mesh, 0.05)), &mesh, 16).unwrap();
        let psi = psi.endpoint();
        let s = UnitSphereSampler::new(3, 4, 2);
        let rep = psi_norm(psi, &s).unwrap();
        for (row, a) in rep.table.iter().zip(s.samples(&mesh).unwrap()) {
            let field = delta_tilde_field(psi, &a).unwrap();
            assert!((field.sup_abs() - row.value).abs() < 1e-9, "{} vs {}", field.sup_abs(), row.value);
        }
        let w = rep.witness_form(&mesh).unwrap();
        assert!((delta_tilde_field(psi, &w).unwrap().sup_abs() - rep.norm_lower_bound).abs() < 1e-9);
    }

    #[test]
    fn more_samples_never_lower_the_estimate() {
        let mesh = GridMesh::unit(32).unwrap();
        let t = TorusMap::translation(mesh, [1.0 / 3.0, 0.0]);
        let mut s = UnitSphereSampler::new(2, 4, 9);
        s.refine = 0;
        let a = psi_norm(&t, &s).unwrap().norm_lower_bound;
        s.count = 32;
        let b = psi_norm(&t, &s).unwrap().norm_lower_bound;
        assert!(b >= a);
    }

    #[test]
    fn axioms_on_the_small_family() {
        let mesh = GridMesh::unit(32).unwrap();
        let maps = [
            TorusMap::identity(mesh),
            TorusMap::translation(mesh, [1.0 / 3.0, 0.0]),
            TorusMap::shear(mesh, 0.1),
        ];
        let rep = norm_axiom_report(&maps, &UnitSphereSampler::new(4, 16, 1), AxiomSlack::default()).unwrap();
        assert!(rep.all_pass(), "{:?}", rep.violations());
        assert!(rep.checks.iter().any(|c| c.axiom == Axiom::Separation));
    }

    #[test]
    fn conjugating_by_a_twist() {
        let mesh = GridMesh::unit(64).unwrap();
        let phi = integrate_flow(Arc::new(Hamiltonian::twist(&mesh, 0.1)), &mesh, 32).unwrap();
        let h = TorusMap::shear(mesh, 0.1);
        let alpha = OneForm::constant(mesh, [1.0, 0.5]);
        let rep = conjugation_check(&h, &phi, [0.3, 0.6], &alpha, Some(&UnitSphereSampler::new(4, 8, 3))).unwrap();
        assert!(rep.residual < 1e-4, "{rep:?}");
        assert!(rep.sandwich.unwrap().holds, "{rep:?}");
        let id = Isotopy::identity(mesh, 4);
        let rep = conjugation_check(&h, &id, [0.3, 0.6], &alpha, None).unwrap();
        assert!((rep.lhs - rep.rhs).abs() < 1e-12);
        let t = Isotopy::translation(mesh, [0.2, 0.0], 4);
        assert!(matches!(conjugation_check(&h, &t, [0.3, 0.6], &alpha, None), Err(FluxError::NonzeroFlux { .. })));
    }
}
