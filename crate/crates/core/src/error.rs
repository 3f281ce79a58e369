use thiserror::Error;

/// Errors shared by every module of the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("surface area must be positive, got {0}")]
    NonpositiveArea(f64),

    #[error("grid too coarse: need at least 8x8, got {nx}x{ny}")]
    GridTooCoarse { nx: usize, ny: usize },

    #[error("polar exclusion band invalid: {0}")]
    BadPoleBand(String),

    #[error("fields live on different surfaces or grids")]
    GridMismatch,

    #[error("field support intersects the polar exclusion band")]
    PolarSupport,

    #[error("cap area {cap_area} must lie strictly inside (0, {area})")]
    BadCapArea { cap_area: f64, area: f64 },

    #[error("disk capacity {capacity} does not fit the chart: {reason}")]
    CapacityTooLarge { capacity: f64, reason: String },

    #[error("embedding boundary enters the polar exclusion band: {0}")]
    PolarBand(String),

    #[error("cover misses {uncovered} grid points (first at index {first:?})")]
    NotCovering {
        uncovered: usize,
        first: Option<(usize, usize)>,
    },

    #[error("zero bump mass at {count} grid points (first at index {first:?}); cover too thin for the chosen profile")]
    ZeroBumpMass {
        count: usize,
        first: Option<(usize, usize)>,
    },

    #[error("t-grid misaligned: {0}")]
    Misaligned(String),

    #[error("coarse-graining window {window} admits no valid target embedding (N={n} too small)")]
    NTooSmall { window: usize, n: usize },

    #[error("path does not interpolate the discrete embeddings: {0}")]
    BadPath(String),

    #[error("curve parameter {0} outside [0,1]")]
    TOutOfRange(f64),

    #[error("dyadic level {level} exceeds curve order {order}")]
    LevelExceedsOrder { level: u32, order: u32 },

    #[error("cube paving invalid: {0}")]
    BadPaving(String),

    #[error("curve endpoints mismatch between consecutive cubes {0} and {1}")]
    EndpointMismatch(usize, usize),

    #[error("weight invalid: {0}")]
    BadWeight(String),

    #[error("matrix size {n} exceeds the exact-enumeration cap {cap}; use the heuristic")]
    ExactSizeExceeded { n: usize, cap: usize },

    #[error("profile parameters out of bounds: {0}")]
    ThetaOutOfBounds(String),

    #[error("degenerate coverage: {0}")]
    DegenerateCoverage(String),

    #[error("bicover invalid: {0}")]
    BadBicover(String),

    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
