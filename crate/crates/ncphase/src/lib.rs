//! Classical mechanics on a four-dimensional noncommutative phase space of
//! canonical type.
//!
//! Each particle carries two positions and two momenta with deformed Poisson
//! brackets: positions fail to commute by a parameter `theta`, momenta by a
//! parameter `eta`, while the mixed position-momentum brackets stay canonical.
//! Both parameters may differ from particle to particle; variables of
//! different particles always commute.
//!
//! The crate provides:
//!
//! - the deformed bracket structure and its evaluation on arbitrary phase
//!   space observables ([`StructureMatrix`], [`Observable`],
//!   [`poisson_bracket`]);
//! - exact closed-form free-particle motion, stable through the commutative
//!   limit ([`free_particle_state`], [`cm_trajectory`]);
//! - numerical integration of the deformed Hamilton equations with
//!   conservation monitors ([`Hamiltonian`], [`integrate`]);
//! - center-of-mass machinery: effective deformation parameters, the full
//!   table of brackets between center-of-mass and relative variables,
//!   parameter conditions that decouple the two sectors, conserved primed
//!   momenta, and the mapping of one-particle motion onto a charged particle
//!   in a uniform magnetic field ([`effective_params`], [`bracket_table`],
//!   [`check_conditions`], [`primed_momenta`], [`magnetic_hamiltonian`]).

mod algebra;
mod analytic;
mod composite;
mod dynamics;
mod error;
mod observable;

pub use algebra::{
    p1_index, p2_index, x1_index, x2_index, Particle, StructureMatrix, SystemState,
    COMPONENTS_PER_PARTICLE,
};
pub use analytic::{
    cm_trajectory, common_motion_trajectory, free_particle_state, relative_trajectory, sinc_kernel,
    system_velocities, versine_kernel, FreeParticleIc, FreeParticlePoint,
};
pub use composite::{
    bracket_table, check_conditions, cm_decompose, cm_recompose, conjugate_cm_coords,
    conjugate_position_observable, effective_params, fly_apart_metric, magnetic_hamiltonian,
    primed_momenta, primed_momentum_observable, primed_state_single, traditional_momentum_drift,
    BracketEntry, BracketReport, CmDecomposition, ConditionReport, EffectiveParams,
    MomentumDriftReport, DEFAULT_CONDITION_TOL,
};
pub use dynamics::{
    eom_rhs, integrate, monitor_observable, Hamiltonian, IntegrationMethod, MonitorSeries,
    Monitors, Potential, Trajectory,
};
pub use error::{Error, Result};
pub use observable::{
    bracket_observable, check_algebra, poisson_bracket, AlgebraCheck, Observable,
};
