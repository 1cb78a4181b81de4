//! Numerical laboratory for the two-species Vlasov–Poisson–Boltzmann system
//! with disparate masses and charges.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod collision;
pub mod error;
pub mod field;
pub mod fluid;
pub mod grid;
pub mod harness;
pub mod kinetic;
pub mod linearized;
pub mod macromicro;
pub mod maxwellian;
pub mod moments;
pub mod params;
pub mod waves;

pub use error::{Result, VpbError};
pub use field::{DistributionField, FluidState, SpatialGrid};
pub use grid::VelocityGrid;
pub use maxwellian::{maxwellian_eval, BiMaxwellian, SingleMaxwellian};
pub use moments::{moments_single_species, moments_two_component, recommended_extent, CellMoments, SpeciesMoments};
pub use params::{Pair, PlasmaParams, Species, SpeciesParams, BOLTZMANN};
