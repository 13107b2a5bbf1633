use thiserror::Error;

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("non-manifold connectivity: face shared by more than two cells (nodes {0}, {1})")]
    NonManifoldFace(usize, usize),
    #[error("duplicate cell {0} in connectivity")]
    DuplicateCell(usize),
    #[error("cell {0} has non-positive area {1:.3e}")]
    InvertedCell(usize, f64),
    #[error("tangled mesh: cell {cell} reached non-positive volume {volume:.3e} at t = {time:.6e}")]
    TangledMesh { cell: usize, volume: f64, time: f64 },
    #[error("degenerate mesh request: {0}")]
    BadMeshRequest(String),
    #[error("equation of state out of range: {0}")]
    EosDomain(String),
    #[error("state corruption in cell {cell}: negative hydrodynamic energy {eps:.3e}")]
    NegativeInternalEnergy { cell: usize, eps: f64 },
    #[error("singular nodal matrix at node {0}")]
    SingularNodeMatrix(usize),
    #[error("over-constrained boundary node {0}: three independent wall normals")]
    OverConstrainedNode(usize),
    #[error("iteration failed to converge: {0}")]
    NonConvergence(String),
    #[error("time step underflow at t = {0:.6e} after repeated halving")]
    TimeStepUnderflow(f64),
    #[error("all cells report zero wavespeed; cannot pick a time step")]
    ZeroWavespeed,
    #[error("unknown case name `{0}`")]
    UnknownCase(String),
    #[error("bad configuration: {0}")]
    BadConfig(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, SolverError>;
