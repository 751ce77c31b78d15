//! Two-component paraxial structured-light toolkit.
//!
//! Synthesizes Laguerre-Gaussian and Bessel-Gaussian beams in the circular
//! polarization basis, propagates them with the exact spectral solution of the
//! paraxial equation, and evaluates photon and helicity densities, currents,
//! flow velocities, loop circulations, winding numbers and two-photon
//! coherence of twisted photon pairs.

pub mod beam;
pub mod error;
pub mod field;
pub mod grid;
pub mod heatmap;
pub mod observables;
pub mod pair;
pub mod propagate;
pub mod selftest;
pub mod spectral;
pub mod special;
pub mod vortex;
pub mod vxf;

pub use beam::{
    bg_profile, bloch_spinor, lg_profile, superposition_log_norm, synthesize, BeamComponent,
    BeamEvaluator, BeamSpec, BlochState, PolarizationKind, PolarizationSpec, Profile,
};
pub use error::{Error, Result, Warning};
pub use field::{
    inner_product, slice_normalize, ComplexField, Polarization, ScalarField, SpinorField,
    VectorField2D,
};
pub use grid::TransverseGrid;
pub use heatmap::{export_heatmap, Colormap};
pub use observables::{
    currents, densities, oam_expectation, velocities, Gradient, ObservableSet, OamExpectation,
};
pub use propagate::{continuity_defect, propagate, PropagationPlan, Propagated};
pub use vortex::{
    berry_tc, loop_circulation, loop_winding, singularity_census, vortex_report, Census, Component,
    FieldSource, Flow, LoopSpec, TcVariant, VortexReport, WindingOptions,
};
pub use pair::{
    coherent_correlations, contraction_oracle, hankel_profile, pair_correlations, pair_correlations_between, pair_densities,
    PairCorrelations, PairSpec, RadialProfile, SpinSymmetry,
};
