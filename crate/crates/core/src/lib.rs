//! Cellular-Potts vasculogenesis engine on a periodic lattice with a coupled
//! chemoattractant field, plus snapshot I/O, training-pair datasets,
//! periodic morphometrics and timing tools.

pub mod bench;
pub mod diffusion;
pub mod energy;
pub mod engine;
pub mod error;
pub mod lattice;
pub mod morphometrics;
pub mod params;
pub mod pipeline;
pub mod snapshot;

pub use diffusion::{diffusion_step, field_total, ChemField};
pub use energy::{acceptance_probability, delta_h, EnergyTerms};
pub use engine::{CopyAttempt, SimState};
pub use error::{Error, Result};
pub use lattice::{Cell, CellId, CellTable, CellType, Lattice, NeighborOrder, MEDIUM};
pub use params::{ChemotaxisMode, ParamSet};
pub use snapshot::{export_snapshot, import_snapshot, Snapshot};
