use thiserror::Error;

/// Everything that can go wrong in the numerical core.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum FluxError {
    #[error("invalid mesh: {0}")]
    InvalidMesh(String),
    #[error("mesh mismatch: {0}")]
    MeshMismatch(String),
    #[error("non-finite value at grid index {index}")]
    NonFinite { index: usize },
    #[error("form is not closed: residual {residual:.3e} exceeds {tolerance:.3e}")]
    NotClosed { residual: f64, tolerance: f64 },
    #[error("not a diffeomorphism: det J = {det:.3e} at grid point ({i}, {j})")]
    NotDiffeomorphism { i: usize, j: usize, det: f64 },
    #[error("Newton inversion did not converge: residual {residual:.3e} at grid point ({i}, {j})")]
    InverseDiverged { i: usize, j: usize, residual: f64 },
    #[error("flow integration produced a non-diffeomorphism at sample {sample}: {source}; try a larger K")]
    FlowStep {
        sample: usize,
        #[source]
        source: Box<FluxError>,
    },
    #[error("path is not symplectic: worst closedness residual {residual:.3e} at sample {sample}")]
    NotSymplectic { sample: usize, residual: f64 },
    #[error("path is not volume-preserving: sup |det J - 1| = {defect:.3e} at sample {sample}")]
    NotVolumePreserving { sample: usize, defect: f64 },
    #[error("lift tracking is ambiguous at sample {sample}: increment {increment:.3e}; use a finer K")]
    LiftAmbiguous { sample: usize, increment: f64 },
    #[error("isotopy is invalid: {0}")]
    InvalidIsotopy(String),
    #[error("coexact residual {residual:.3e} at sample {sample} exceeds {tolerance:.3e}")]
    CoexactResidual { sample: usize, residual: f64, tolerance: f64 },
    #[error("map is not isotopic to the identity for this form: periods ({p0:.3e}, {p1:.3e})")]
    NonzeroPeriods { p0: f64, p1: f64 },
    #[error("isotopy endpoint differs from the map by {distance:.3e}")]
    EndpointMismatch { distance: f64 },
    #[error("vector field is not divergence-free: residual {residual:.3e}")]
    NotDivergenceFree { residual: f64 },
    #[error("map does not have vanishing flux: periods ({p0:.3e}, {p1:.3e})")]
    NonzeroFlux { p0: f64, p1: f64 },
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("region too small: {0}")]
    RegionTooSmall(String),
    #[error("sampler budget is empty")]
    EmptySampler,
    #[error("commutator generator certification failed: residual {residual:.3e} at sample {sample}")]
    GeneratorCertification { sample: usize, residual: f64 },
    #[error("serialization: {0}")]
    Format(String),
    #[error("io error on {path}: {message}")]
    Io { path: String, message: String },
}

pub type Result<T> = std::result::Result<T, FluxError>;
