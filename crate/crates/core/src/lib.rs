//! Davies thermalization generators for non-degenerate Hamiltonians, their decomposition into
//! Bohr-frequency blocks, and rigorous spectral-gap lower bounds from support theory, each
//! checked against exact eigensolver oracles.

pub mod analysis;
pub mod blocks;
pub mod bounds;
pub mod error;
pub mod examples;
pub mod factorization;
pub mod graphs;
pub mod linalg;
pub mod liouvillian;
pub mod model;
pub mod sweep;

pub use analysis::{analyze, Analysis, AnalysisOptions, BlockReport, BoundReport};
pub use blocks::{
    block_exact_gap, bohr_index, dirichlet_block, nonnegative_blocks, pauli_generator, variance_block,
    BohrGroup, BohrIndex, DirichletBlock, Link, PauliGenerator, VarianceBlock,
};
pub use bounds::{
    combined_bound, lambda_qm_gershgorin, lambda_qm_tree, mixing_time_bound, support_number,
    tau0_canonical, tau0_congestion_dilation, Combined, EdgeLoad,
};
pub use error::{Error, Result};
pub use examples::{make_counterexample, make_d_level, make_oscillator, make_particle_line, ModelKind, ModelParams};
pub use graphs::{
    build_graph, canonical_paths, fill_weights, spanning_tree, CanonicalPaths, Edge, FillWeight, SpanningTree,
    TransitionGraph,
};
pub use linalg::CMatrix;
pub use liouvillian::{
    build_davies, build_davies_with_limit, detailed_balance_residual, evolve_and_track, exact_gap,
    fourier_components, FourierComponents, Superoperator, TrackPoint, DEFAULT_DENSE_LIMIT,
};
pub use model::{bath_g, gibbs, load_system, BathKind, BathModel, GibbsWeights, SystemSpec};
pub use num_complex::Complex64;
pub use sweep::{run_sweep, to_csv, SweepConfig, SweepRow};
