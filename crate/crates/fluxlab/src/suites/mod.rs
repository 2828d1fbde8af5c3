//! The registered verification suites.
//!
//! A suite is a list of sections. Each section builds its fixtures and
//! records rows; an error or panic inside a section becomes a failed row and
//! the next section still runs.

use std::cell::{OnceCell, RefCell};
use std::collections::BTreeMap;
use std::fmt::Display;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::rc::Rc;
use std::sync::Arc;

use fluxlab_core::displacement_geometry::{energy_chain_check, EnergyChain, UnitSphereSampler};
use fluxlab_core::isotopy_engine::{integrate_flow, FlowField, Isotopy};
use fluxlab_core::torus_maps::{Region, TorusMap};
use fluxlab_core::{GridMesh, Result};

use crate::config::{ExperimentConfig, Tolerances};
use crate::report::{Relation, Row, SuiteReport};
use crate::Error;

mod energy;
mod fixtures;
mod flux;
mod generator;
mod maps;
mod norms;

pub use fixtures::random_closed_form;

pub struct Suite {
    pub name: &'static str,
    pub summary: &'static str,
    /// Every row of the suite carries one of these.
    pub anchors: &'static [&'static str],
    run: fn(&Ctx, &mut Checks),
}

impl Suite {
    /// Run on a fresh context.
    pub fn run(&self, cfg: &ExperimentConfig) -> std::result::Result<Vec<Row>, Error> {
        let ctx = Ctx::new(cfg)?;
        Ok(self.run_in(&ctx))
    }

    fn run_in(&self, ctx: &Ctx) -> Vec<Row> {
        let mut c = Checks { suite: self.name, rows: Vec::new() };
        (self.run)(ctx, &mut c);
        c.rows
    }
}

static REGISTRY: [Suite; 12] = [
    maps::PULLBACK_BOUND,
    maps::PULLBACK_CONVERGENCE,
    norms::DELTA_CONSISTENCY,
    norms::CONJUGATION,
    norms::NORM_AXIOMS,
    energy::ENERGY_POSITIVITY,
    maps::VOLUME_DEFECT,
    energy::RIGIDITY_LIMIT,
    flux::FLUX_DUALITY,
    generator::GENERATOR_G1,
    generator::F_VS_GEODESIC,
    generator::HOFER_CAUCHY,
];

pub fn registry() -> &'static [Suite] {
    &REGISTRY
}

/// `"all"`, an exact name, or a unique prefix of one.
pub fn resolve(name: &str) -> std::result::Result<Vec<&'static Suite>, Error> {
    if name == "all" {
        return Ok(REGISTRY.iter().collect());
    }
    if let Some(s) = REGISTRY.iter().find(|s| s.name == name) {
        return Ok(vec![s]);
    }
    let hits: Vec<_> = REGISTRY.iter().filter(|s| !name.is_empty() && s.name.starts_with(name)).collect();
    if hits.len() == 1 {
        return Ok(hits);
    }
    Err(Error::UnknownSuite {
        name: name.into(),
        known: REGISTRY.iter().map(|s| s.name).collect::<Vec<_>>().join(", "),
    })
}

/// Run the configured suite (or all of them) and collect one report.
pub fn run_suite(cfg: &ExperimentConfig) -> std::result::Result<SuiteReport, Error> {
    cfg.validate()?;
    let suites = resolve(&cfg.suite)?;
    let ctx = Ctx::new(cfg)?;
    let mut rows = Vec::new();
    for s in &suites {
        rows.extend(s.run_in(&ctx));
    }
    let name = if suites.len() == 1 { suites[0].name } else { "all" };
    Ok(SuiteReport::new(name, rows, cfg.clone()))
}

/// Shared inputs of one run. Expensive isotopies are memoized by label so
/// that suites run together integrate each flow once.
pub(crate) struct Ctx<'a> {
    pub cfg: &'a ExperimentConfig,
    pub mesh: GridMesh,
    pub k: usize,
    pub tol: Tolerances,
    pub sampler: UnitSphereSampler,
    flows: RefCell<BTreeMap<String, Rc<Isotopy>>>,
    chain: OnceCell<Result<EnergyChain>>,
}

impl<'a> Ctx<'a> {
    fn new(cfg: &'a ExperimentConfig) -> std::result::Result<Self, Error> {
        Ok(Self {
            cfg,
            mesh: cfg.mesh()?,
            k: cfg.steps,
            tol: cfg.tolerances,
            sampler: cfg.sampler(),
            flows: RefCell::new(BTreeMap::new()),
            chain: OnceCell::new(),
        })
    }

    /// Flow of `field` with `K` samples, integrated once per label.
    pub fn flow(&self, label: &str, field: impl FnOnce() -> Arc<dyn FlowField>) -> Result<Rc<Isotopy>> {
        self.cached(label, || integrate_flow(field(), &self.mesh, self.k))
    }

    pub fn cached(&self, label: &str, build: impl FnOnce() -> Result<Isotopy>) -> Result<Rc<Isotopy>> {
        if let Some(f) = self.flows.borrow().get(label) {
            return Ok(f.clone());
        }
        let f = Rc::new(build()?);
        self.flows.borrow_mut().insert(label.to_string(), f.clone());
        Ok(f)
    }

    /// The strip `0 < x < L₀/4`.
    pub fn strip(&self) -> Result<Region> {
        Region::vertical_strip(&self.mesh, 0.0, 0.25 * self.mesh.period(0))
    }

    /// The half-period translation, which displaces [`Ctx::strip`].
    pub fn half_shift(&self) -> TorusMap {
        TorusMap::translation(self.mesh, [0.5 * self.mesh.period(0), 0.0])
    }

    /// Energy chain of the strip with `f` the half-period translation, shared
    /// by the energy and rigidity suites.
    pub fn strip_chain(&self) -> Result<EnergyChain> {
        self.chain
            .get_or_init(|| energy_chain_check(&self.strip()?, &self.half_shift(), &self.sampler, self.k))
            .clone()
    }
}

/// Five positions spread over `0..len`, always including both ends.
pub(crate) fn subsample(len: usize) -> Vec<usize> {
    let mut out: Vec<usize> = (0..5).map(|j| j * len.saturating_sub(1) / 4).collect();
    out.dedup();
    out
}

/// Row collector for one suite.
pub(crate) struct Checks {
    suite: &'static str,
    rows: Vec<Row>,
}

impl Checks {
    fn id(&self, id: &str) -> String {
        format!("{}/{id}", self.suite)
    }

    pub fn check(&mut self, id: &str, anchor: &'static str, value: f64, rel: Relation, tol: f64) {
        let row = Row::measured(self.id(id), anchor, value, rel, tol);
        self.rows.push(row);
    }

    pub fn le(&mut self, id: &str, anchor: &'static str, value: f64, tol: f64) {
        self.check(id, anchor, value, Relation::Le, tol);
    }

    pub fn ge(&mut self, id: &str, anchor: &'static str, value: f64, tol: f64) {
        self.check(id, anchor, value, Relation::Ge, tol);
    }

    pub fn lt(&mut self, id: &str, anchor: &'static str, value: f64, tol: f64) {
        self.check(id, anchor, value, Relation::Lt, tol);
    }

    pub fn gt(&mut self, id: &str, anchor: &'static str, value: f64, tol: f64) {
        self.check(id, anchor, value, Relation::Gt, tol);
    }

    /// Attach a note to the most recent row.
    pub fn note(&mut self, note: impl Display) {
        if let Some(r) = self.rows.last_mut() {
            r.note = note.to_string();
        }
    }

    pub fn fail(&mut self, id: &str, anchor: &'static str, err: impl Display) {
        let row = Row::failed(self.id(id), anchor, Relation::Le, 0.0, err);
        self.rows.push(row);
    }

    /// Run `body`; an error or panic is recorded as a failed row `id/error`.
    pub fn section(&mut self, id: &str, anchor: &'static str, body: impl FnOnce(&mut Self) -> Result<()>) {
        let id = &format!("{id}/error");
        match catch_unwind(AssertUnwindSafe(|| body(self))) {
            Ok(Ok(())) => {}
            Ok(Err(e)) => self.fail(id, anchor, e),
            Err(p) => {
                let msg = p
                    .downcast_ref::<String>()
                    .cloned()
                    .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                    .unwrap_or_else(|| "panic".into());
                self.fail(id, anchor, format!("panicked: {msg}"));
            }
        }
    }
}

/// Strictly decreasing from `from` on: one `<` row per consecutive pair.
pub(crate) fn decreasing(c: &mut Checks, id: &str, anchor: &'static str, indices: &[usize], values: &[f64], from: usize) {
    for w in 1..values.len() {
        if indices[w - 1] >= from {
            c.lt(&format!("{id}/i{:02}", indices[w]), anchor, values[w], values[w - 1]);
        }
    }
}
