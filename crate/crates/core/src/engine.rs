//! Metropolis copy attempts and the Monte-Carlo step.
//!
//! Random numbers: every MCS draws from its own ChaCha8 stream,
//! `ChaCha8Rng::seed_from_u64(seed)` with `set_stream(mcs + 1)`; stream 0 is
//! reserved for initial placement. A snapshot `(seed, mcs, grid, field)`
//! therefore determines the rest of the trajectory.
//!
//! Per attempt the draw order is: destination site (`gen_range(0..sites)`),
//! source neighbor index (`gen_range(0..neighbors)`), and, only when the two
//! ids differ, one `gen::<f64>()` compared against the acceptance probability.

use rand::distributions::{Distribution, Uniform};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::diffusion::ChemField;
use crate::energy;
use crate::error::{Error, Result};
use crate::lattice::{CellId, CellTable, Lattice, MEDIUM};
use crate::params::ParamSet;

pub type SimRng = ChaCha8Rng;

/// Full recount interval (in MCS) for debug builds.
const AUDIT_INTERVAL: u64 = 100;

/// Generator for the copy attempts of step `mcs`.
pub fn mcs_rng(seed: u64, mcs: u64) -> SimRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(mcs.wrapping_add(1));
    rng
}

/// Generator for initial placement.
pub fn init_rng(seed: u64) -> SimRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(0);
    rng
}

/// Exact uniform samplers for the destination site and the neighbor slot.
/// `Uniform` rejects only the true overflow zone, so power-of-two ranges
/// take one word each.
struct Draws {
    site: Uniform<usize>,
    neighbor: Uniform<usize>,
}

impl Draws {
    fn new(sites: usize, params: &ParamSet) -> Self {
        Draws {
            site: Uniform::new(0, sites),
            neighbor: Uniform::new(0, params.copy_order.len()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CopyAttempt {
    pub source: usize,
    pub destination: usize,
    /// Zero for skipped attempts.
    pub delta_h: f64,
    pub accepted: bool,
    /// Source and destination held the same id.
    pub skipped: bool,
}

/// Cell configuration, chemical field and step counter of one simulation.
#[derive(Debug, Clone)]
pub struct SimState {
    lattice: Lattice,
    cells: CellTable,
    field: ChemField,
    scratch: Vec<f64>,
    mcs: u64,
    seed: u64,
}

impl PartialEq for SimState {
    fn eq(&self, other: &Self) -> bool {
        self.lattice == other.lattice
            && self.field == other.field
            && self.mcs == other.mcs
            && self.seed == other.seed
    }
}

impl SimState {
    pub fn new(lattice: Lattice, field: ChemField, mcs: u64, seed: u64) -> Result<Self> {
        if field.dims() != (lattice.width(), lattice.height()) {
            return Err(Error::DimensionMismatch {
                left: (lattice.width(), lattice.height()),
                right: field.dims(),
            });
        }
        let cells = CellTable::recount(&lattice);
        Ok(SimState {
            lattice,
            cells,
            field,
            scratch: Vec::new(),
            mcs,
            seed,
        })
    }

    /// An all-medium state with a zero field.
    pub fn empty(width: usize, height: usize, seed: u64) -> Result<Self> {
        let lattice = Lattice::new(width, height)?;
        SimState::new(lattice, ChemField::zeros(width, height), 0, seed)
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn cells(&self) -> &CellTable {
        &self.cells
    }

    pub fn field(&self) -> &ChemField {
        &self.field
    }

    pub fn mcs(&self) -> u64 {
        self.mcs
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn width(&self) -> usize {
        self.lattice.width()
    }

    pub fn height(&self) -> usize {
        self.lattice.height()
    }

    /// Places `id` at `site` and recounts the table. For setting up states.
    pub fn paint(&mut self, site: usize, id: CellId) {
        self.lattice.set(site, id);
        self.cells = CellTable::recount(&self.lattice);
    }

    pub fn set_field(&mut self, field: ChemField) -> Result<()> {
        if field.dims() != self.field.dims() {
            return Err(Error::DimensionMismatch {
                left: self.field.dims(),
                right: field.dims(),
            });
        }
        self.field = field;
        Ok(())
    }

    pub fn audit(&self) -> std::result::Result<(), String> {
        self.cells.audit(&self.lattice)
    }

    /// Energy change if `source` were copied onto `destination`.
    pub fn delta_h(&self, source: usize, destination: usize, params: &ParamSet) -> Result<f64> {
        energy::delta_h(&self.lattice, &self.cells, &self.field, source, destination, params)
    }

    /// One proposal: random destination, random `copy_order` neighbor as source.
    pub fn attempt_copy(&mut self, rng: &mut impl Rng, params: &ParamSet) -> CopyAttempt {
        let draws = Draws::new(self.lattice.len(), params);
        self.attempt_with(rng, &draws, params)
    }

    fn attempt_with(&mut self, rng: &mut impl Rng, draws: &Draws, params: &ParamSet) -> CopyAttempt {
        let destination = draws.site.sample(rng);
        let neighbors = self.lattice.neighborhood(destination, params.copy_order);
        let source = neighbors[draws.neighbor.sample(rng)];
        self.try_copy(rng, source, destination, params)
    }

    /// Evaluates and possibly applies a copy of `source` onto `destination`.
    pub fn try_copy(
        &mut self,
        rng: &mut impl Rng,
        source: usize,
        destination: usize,
        params: &ParamSet,
    ) -> CopyAttempt {
        let new = self.lattice.get(source);
        let old = self.lattice.get(destination);
        if new == old {
            return CopyAttempt {
                source,
                destination,
                delta_h: 0.0,
                accepted: false,
                skipped: true,
            };
        }
        let (delta_h, changes) = energy::delta_h_fast(
            &self.lattice,
            &self.cells,
            &self.field,
            new,
            old,
            source,
            destination,
            params,
        );
        let accepted = rng.gen::<f64>() < energy::acceptance(delta_h, params.h_prime);
        if accepted {
            self.apply(destination, new, old, changes);
        }
        CopyAttempt {
            source,
            destination,
            delta_h,
            accepted,
            skipped: false,
        }
    }

    fn apply(&mut self, destination: usize, new: CellId, old: CellId, (d_old, d_new): (i32, i32)) {
        self.lattice.set(destination, new);
        if new != MEDIUM {
            let cell = self.cells.get_mut(new).expect("source id is a live cell");
            cell.volume += 1;
            cell.surface = (cell.surface as i32 + d_new) as u32;
        }
        if old != MEDIUM {
            let cell = self.cells.get_mut(old).expect("destination id is a live cell");
            cell.volume -= 1;
            cell.surface = (cell.surface as i32 + d_old) as u32;
            if cell.volume == 0 {
                self.cells.remove(old);
            }
        }
    }

    /// Field update for one MCS: `diffusion_substeps` explicit steps.
    pub fn update_field(&mut self, params: &ParamSet) {
        let ids = self.lattice.ids();
        for _ in 0..params.diffusion_substeps {
            self.field
                .step_in_place(&mut self.scratch, |s| ids[s] != MEDIUM, params);
        }
    }

    /// One Monte-Carlo step using this state's own random stream.
    pub fn run_mcs(&mut self, params: &ParamSet) {
        let mut rng = mcs_rng(self.seed, self.mcs);
        self.run_mcs_with(&mut rng, params);
    }

    /// One Monte-Carlo step: `width * height` copy attempts, then the field
    /// update, then the counter increment.
    pub fn run_mcs_with(&mut self, rng: &mut impl Rng, params: &ParamSet) {
        let draws = Draws::new(self.lattice.len(), params);
        for _ in 0..self.lattice.len() {
            self.attempt_with(rng, &draws, params);
        }
        self.update_field(params);
        self.mcs += 1;
        if cfg!(debug_assertions) && self.mcs.is_multiple_of(AUDIT_INTERVAL) {
            if let Err(msg) = self.audit() {
                panic!("cell table drifted at mcs {}: {msg}", self.mcs);
            }
        }
    }

    pub fn advance(&mut self, params: &ParamSet, steps: u64) {
        for _ in 0..steps {
            self.run_mcs(params);
        }
    }
}
