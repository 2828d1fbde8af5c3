//! Experiment configuration, loaded from JSON.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use fluxlab_core::displacement_geometry::UnitSphereSampler;
use fluxlab_core::torus_maps::catalog::MapSpec;
use fluxlab_core::GridMesh;
use serde::{Deserialize, Serialize};

use crate::suites;
use crate::Error;

/// Everything a suite run depends on. Unknown keys are rejected at every
/// level and `seed` has no default.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// A registered suite name, a unique prefix of one, or `"all"`.
    pub suite: String,
    pub seed: u64,
    #[serde(default)]
    pub mesh: MeshSpec,
    /// Time samples per isotopy.
    #[serde(default = "default_steps")]
    pub steps: usize,
    /// Extra catalog maps for the suites that sweep over maps.
    #[serde(default)]
    pub generators: Vec<MapSpec>,
    #[serde(default)]
    pub sampler: SamplerSpec,
    #[serde(default)]
    pub schedule: ScheduleSpec,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub output: OutputSpec,
}

fn default_steps() -> usize {
    64
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeshSpec {
    #[serde(rename = "N", default = "default_n")]
    pub n: usize,
    #[serde(rename = "L", default = "default_l")]
    pub l: [f64; 2],
}

fn default_n() -> usize {
    128
}

fn default_l() -> [f64; 2] {
    [1.0, 1.0]
}

impl Default for MeshSpec {
    fn default() -> Self {
        Self { n: default_n(), l: default_l() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplerSpec {
    #[serde(default = "default_m")]
    pub m: usize,
    #[serde(default = "default_count")]
    pub count: usize,
    #[serde(default = "default_refine")]
    pub refine: usize,
    /// Falls back to the experiment seed.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

fn default_m() -> usize {
    8
}

fn default_count() -> usize {
    64
}

fn default_refine() -> usize {
    4
}

impl Default for SamplerSpec {
    fn default() -> Self {
        Self { m: default_m(), count: default_count(), refine: default_refine(), seed: None }
    }
}

/// Amplitudes of the perturbation sequences. The default is `1/i` over
/// `indices = 1..=16`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleSpec {
    #[serde(default = "default_indices")]
    pub indices: Vec<usize>,
    /// Overrides `1/i` when present; must match `indices` in length.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub amplitudes: Option<Vec<f64>>,
    /// Peak speed of the fixed perturbing flow at amplitude 1.
    #[serde(default = "default_perturbation")]
    pub perturbation: f64,
}

fn default_indices() -> Vec<usize> {
    (1..=16).collect()
}

fn default_perturbation() -> f64 {
    1e-3
}

impl Default for ScheduleSpec {
    fn default() -> Self {
        Self { indices: default_indices(), amplitudes: None, perturbation: default_perturbation() }
    }
}

impl ScheduleSpec {
    pub fn amplitudes(&self) -> Vec<f64> {
        match &self.amplitudes {
            Some(a) => a.clone(),
            None => self.indices.iter().map(|&i| 1.0 / i as f64).collect(),
        }
    }
}

macro_rules! tolerances {
    ($($(#[$doc:meta])* $name:ident = $value:expr;)*) => {
        /// Thresholds used by the suites; every field can be overridden.
        #[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
        #[serde(deny_unknown_fields, default)]
        pub struct Tolerances {
            $($(#[$doc])* pub $name: f64,)*
        }

        impl Default for Tolerances {
            fn default() -> Self {
                Self { $($name: $value,)* }
            }
        }
    };
}

tolerances! {
    /// Relative slack in `‖φ*α‖ ≤ C_φ ‖α‖`.
    pullback_slack = 1e-6;
    /// Relative error of closed-form norms.
    analytic = 1e-6;
    functoriality = 1e-6;
    /// Final pull-back error of a perturbation sequence.
    sequence_final = 1e-3;
    volume = 1e-8;
    /// `|Δ - Δ_flux| ≤ tol (1 + |Δ|)`.
    delta_agreement = 1e-4;
    delta_analytic = 1e-4;
    isotopy_independence = 1e-6;
    conjugation = 1e-4;
    axiom_slack = 0.05;
    separation = 1e-6;
    collapse = 1e-3;
    commutator_distance = 1e-3;
    flux_translation = 1e-10;
    flux_hamiltonian = 1e-8;
    flux_additivity = 1e-8;
    flux_volume = 1e-10;
    mass_flow = 1e-8;
    duality = 1e-8;
    generator = 1e-3;
    generator_periods = 1e-6;
    potential_mean = 1e-12;
    f_vs_geodesic = 1e-6;
    c0_limit = 1e-2;
    volume_defect = 1e-6;
    defect_witness = 1e-2;
    premise = 2e-2;
    hofer = 1e-10;
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default = "default_dir")]
    pub dir: PathBuf,
    /// File stem of the written reports; defaults to the suite name.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stem: Option<String>,
}

fn default_dir() -> PathBuf {
    PathBuf::from("fluxlab-out")
}

impl Default for OutputSpec {
    fn default() -> Self {
        Self { dir: default_dir(), stem: None }
    }
}

impl ExperimentConfig {
    /// The defaults for `suite` with an explicit seed.
    pub fn new(suite: impl Into<String>, seed: u64) -> Self {
        Self {
            suite: suite.into(),
            seed,
            mesh: MeshSpec::default(),
            steps: default_steps(),
            generators: Vec::new(),
            sampler: SamplerSpec::default(),
            schedule: ScheduleSpec::default(),
            tolerances: Tolerances::default(),
            output: OutputSpec::default(),
        }
    }

    pub fn from_json(s: &str) -> Result<Self, Error> {
        let de = &mut serde_json::Deserializer::from_str(s);
        let cfg: Self = serde_path_to_error::deserialize(de).map_err(|e| Error::Schema {
            path: e.path().to_string(),
            message: e.inner().to_string(),
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Check everything serde cannot and resolve the suite name.
    pub fn validate(&self) -> Result<(), Error> {
        suites::resolve(&self.suite)?;
        self.mesh()?;
        if self.steps < 16 || self.steps % 2 != 0 {
            return Err(Error::invalid("steps", format!("K must be even and at least 16, got {}", self.steps)));
        }
        if self.sampler.count == 0 {
            return Err(Error::invalid("sampler.count", "the sampler budget must be positive"));
        }
        if 2 * self.sampler.m >= self.mesh.n {
            return Err(Error::invalid("sampler.m", format!("mode {} does not fit a {}-point grid", self.sampler.m, self.mesh.n)));
        }
        if self.schedule.indices.is_empty() {
            return Err(Error::invalid("schedule.indices", "the schedule is empty"));
        }
        if let Some(a) = &self.schedule.amplitudes {
            if a.len() != self.schedule.indices.len() {
                return Err(Error::invalid("schedule.amplitudes", "length differs from schedule.indices"));
            }
            if let Some(v) = a.iter().find(|v| !v.is_finite()) {
                return Err(Error::invalid("schedule.amplitudes", format!("non-finite amplitude {v}")));
            }
        }
        let tol = serde_json::to_value(self.tolerances).expect("tolerances serialize");
        if let Some((k, v)) = tol.as_object().unwrap().iter().find(|(_, v)| !v.as_f64().is_some_and(|x| x >= 0.0)) {
            return Err(Error::invalid(&format!("tolerances.{k}"), format!("must be a nonnegative number, got {v}")));
        }
        Ok(())
    }

    pub fn mesh(&self) -> Result<GridMesh, Error> {
        GridMesh::new(self.mesh.n, self.mesh.l).map_err(|e| Error::invalid("mesh", e.to_string()))
    }

    pub fn sampler(&self) -> UnitSphereSampler {
        UnitSphereSampler {
            m: self.sampler.m,
            count: self.sampler.count,
            seed: self.sampler.seed.unwrap_or(self.seed),
            refine: self.sampler.refine,
        }
    }

    pub fn stem(&self) -> String {
        self.output.stem.clone().unwrap_or_else(|| self.suite.clone())
    }

    /// Tolerances keyed by field name, in a stable order.
    pub fn tolerance_table(&self) -> BTreeMap<String, f64> {
        serde_json::from_value(serde_json::to_value(self.tolerances).unwrap()).unwrap()
    }
}

/// Read and validate a config file.
pub fn load_config(path: &Path) -> Result<ExperimentConfig, Error> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io { path: path.display().to_string(), source: e })?;
    ExperimentConfig::from_json(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_fills_defaults() {
        let c = ExperimentConfig::from_json(r#"{"suite": "lemma14", "seed": 3, "mesh": {"N": 128}}"#).unwrap();
        assert_eq!(c, ExperimentConfig::new("lemma14", 3));
        assert_eq!(c.sampler().seed, 3);
        assert_eq!(c.schedule.amplitudes()[3], 0.25);
    }

    #[test]
    fn unknown_keys_are_named() {
        let e = ExperimentConfig::from_json(r#"{"suite": "lemma14", "seed": 3, "mash": {"N": 128}}"#).unwrap_err();
        assert!(e.to_string().contains("mash"), "{e}");
        let e = ExperimentConfig::from_json(r#"{"suite": "all", "seed": 3, "mesh": {"N": 64, "M": 2}}"#).unwrap_err();
        assert!(e.to_string().contains("mesh") && e.to_string().contains("`M`"), "{e}");
    }

    #[test]
    fn seed_is_required() {
        let e = ExperimentConfig::from_json(r#"{"suite": "lemma14"}"#).unwrap_err();
        assert!(e.to_string().contains("seed"), "{e}");
    }

    #[test]
    fn bad_values_are_rejected() {
        for bad in [
            r#"{"suite": "nope", "seed": 1}"#,
            r#"{"suite": "all", "seed": 1, "mesh": {"N": 8}}"#,
            r#"{"suite": "all", "seed": 1, "steps": 15}"#,
            r#"{"suite": "all", "seed": 1, "sampler": {"count": 0}}"#,
            r#"{"suite": "all", "seed": 1, "tolerances": {"collapse": -1}}"#,
            r#"{"suite": "all", "seed": 1, "schedule": {"indices": [1, 2], "amplitudes": [1]}}"#,
        ] {
            assert!(ExperimentConfig::from_json(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn round_trip() {
        let mut c = ExperimentConfig::new("flux-duality", 9);
        c.generators.push(MapSpec::Shear { epsilon: 0.2 });
        c.tolerances.collapse = 2e-3;
        assert_eq!(ExperimentConfig::from_json(&c.to_json()).unwrap(), c);
    }
}
