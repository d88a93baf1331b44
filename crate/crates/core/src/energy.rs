//! Local energy changes of a single copy attempt.
//!
//! A copy overwrites the id at `destination` with the id at `source`. Every
//! function here evaluates only sites touching `destination`, so the cost is
//! independent of lattice size.

use crate::diffusion::ChemField;
use crate::error::{Error, Result};
use crate::lattice::{CellId, CellTable, CellType, Lattice, NeighborOrder, MEDIUM};
use crate::params::{ChemotaxisMode, ParamSet};

/// Contact energy per link between two types.
#[inline]
pub fn contact_energy(a: CellType, b: CellType, params: &ParamSet) -> f64 {
    match (a, b) {
        (CellType::Medium, CellType::Medium) => 0.0,
        (CellType::Vascular, CellType::Vascular) => params.j_cell_cell,
        _ => params.j_cell_medium,
    }
}

/// Energy change split by term.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EnergyTerms {
    pub contact: f64,
    pub volume: f64,
    pub surface: f64,
    pub chemotaxis: f64,
}

impl EnergyTerms {
    #[inline]
    pub fn total(&self) -> f64 {
        self.contact + self.volume + self.surface + self.chemotaxis
    }
}

pub fn contact_delta(
    lattice: &Lattice,
    cells: &CellTable,
    source: usize,
    destination: usize,
    params: &ParamSet,
) -> f64 {
    let new = lattice.get(source);
    let old = lattice.get(destination);
    contact_term(lattice, cells, new, old, destination, params)
}

#[inline]
fn contact_term(
    lattice: &Lattice,
    cells: &CellTable,
    new: CellId,
    old: CellId,
    destination: usize,
    params: &ParamSet,
) -> f64 {
    let new_kind = cells.kind(new);
    let old_kind = cells.kind(old);
    let mut delta = 0.0;
    for &n in lattice.neighborhood(destination, params.contact_order).iter() {
        let id = lattice.get(n);
        let kind = cells.kind(id);
        if id != new {
            delta += contact_energy(new_kind, kind, params);
        }
        if id != old {
            delta -= contact_energy(old_kind, kind, params);
        }
    }
    delta
}

#[inline]
fn quadratic_change(current: f64, change: f64, target: f64) -> f64 {
    let before = current - target;
    let after = current + change - target;
    after * after - before * before
}

pub fn volume_delta(
    lattice: &Lattice,
    cells: &CellTable,
    source: usize,
    destination: usize,
    params: &ParamSet,
) -> f64 {
    volume_term(cells, lattice.get(source), lattice.get(destination), params)
}

#[inline]
fn volume_term(cells: &CellTable, gainer: CellId, loser: CellId, params: &ParamSet) -> f64 {
    let mut delta = 0.0;
    if gainer != MEDIUM {
        delta += quadratic_change(cells.volume(gainer) as f64, 1.0, params.v_target);
    }
    if loser != MEDIUM {
        delta += quadratic_change(cells.volume(loser) as f64, -1.0, params.v_target);
    }
    params.lambda_volume * delta
}

/// Surface changes `(loser, gainer)` when `destination` switches from `old`
/// to `new`. Links to third cells keep their boundary status, so only the two
/// cells involved change.
#[inline]
pub(crate) fn surface_changes(
    lattice: &Lattice,
    new: CellId,
    old: CellId,
    destination: usize,
) -> (i32, i32) {
    let mut same_old = 0i32;
    let mut same_new = 0i32;
    for &n in lattice.neighborhood(destination, NeighborOrder::First).iter() {
        let id = lattice.get(n);
        same_old += (id == old) as i32;
        same_new += (id == new) as i32;
    }
    (2 * same_old - 4, 4 - 2 * same_new)
}

pub fn surface_delta(
    lattice: &Lattice,
    cells: &CellTable,
    source: usize,
    destination: usize,
    params: &ParamSet,
) -> f64 {
    let new = lattice.get(source);
    let old = lattice.get(destination);
    let changes = surface_changes(lattice, new, old, destination);
    surface_term(cells, new, old, changes, params)
}

#[inline]
fn surface_term(
    cells: &CellTable,
    new: CellId,
    old: CellId,
    (d_old, d_new): (i32, i32),
    params: &ParamSet,
) -> f64 {
    let mut delta = 0.0;
    if old != MEDIUM {
        delta += quadratic_change(cells.surface(old) as f64, d_old as f64, params.s_target);
    }
    if new != MEDIUM {
        delta += quadratic_change(cells.surface(new) as f64, d_new as f64, params.s_target);
    }
    params.lambda_surface * delta
}

#[inline]
fn saturated(c: f64, s: f64) -> f64 {
    c / (s * c + 1.0)
}

/// Chemotactic energy change for a copy whose moving id is `moving`.
pub fn chemotaxis_delta(
    field: &ChemField,
    moving: CellId,
    source: usize,
    destination: usize,
    params: &ParamSet,
) -> Result<f64> {
    for site in [source, destination] {
        let value = field.get(site);
        if value < 0.0 {
            return Err(Error::NegativeConcentration { site, value });
        }
    }
    Ok(chemotaxis_term(field, moving, source, destination, params))
}

#[inline]
fn chemotaxis_term(
    field: &ChemField,
    moving: CellId,
    source: usize,
    destination: usize,
    params: &ParamSet,
) -> f64 {
    if params.lambda_chemotaxis == 0.0
        || (moving == MEDIUM && params.chemotaxis_mode == ChemotaxisMode::Extension)
    {
        return 0.0;
    }
    let gain = saturated(field.get(destination), params.s) - saturated(field.get(source), params.s);
    -params.lambda_chemotaxis * gain
}

/// All four terms for copying `source` onto `destination`.
pub fn delta_terms(
    lattice: &Lattice,
    cells: &CellTable,
    field: &ChemField,
    source: usize,
    destination: usize,
    params: &ParamSet,
) -> Result<EnergyTerms> {
    let new = lattice.get(source);
    let old = lattice.get(destination);
    if new == old {
        return Err(Error::SameId(new));
    }
    let chemotaxis = chemotaxis_delta(field, new, source, destination, params)?;
    let changes = surface_changes(lattice, new, old, destination);
    Ok(EnergyTerms {
        contact: contact_term(lattice, cells, new, old, destination, params),
        volume: volume_term(cells, new, old, params),
        surface: surface_term(cells, new, old, changes, params),
        chemotaxis,
    })
}

pub fn delta_h(
    lattice: &Lattice,
    cells: &CellTable,
    field: &ChemField,
    source: usize,
    destination: usize,
    params: &ParamSet,
) -> Result<f64> {
    delta_terms(lattice, cells, field, source, destination, params).map(|t| t.total())
}

/// Hot-path variant: ids must differ. Also returns the surface changes so the
/// caller can apply an accepted copy without recounting.
#[inline]
pub(crate) fn delta_h_fast(
    lattice: &Lattice,
    cells: &CellTable,
    field: &ChemField,
    new: CellId,
    old: CellId,
    source: usize,
    destination: usize,
    params: &ParamSet,
) -> (f64, (i32, i32)) {
    let changes = surface_changes(lattice, new, old, destination);
    let total = contact_term(lattice, cells, new, old, destination, params)
        + volume_term(cells, new, old, params)
        + surface_term(cells, new, old, changes, params)
        + chemotaxis_term(field, new, source, destination, params);
    (total, changes)
}

/// Boltzmann acceptance `exp(-max(0, dH / H'))`.
pub fn acceptance_probability(delta_h: f64, h_prime: f64) -> Result<f64> {
    if !(h_prime > 0.0) {
        return Err(Error::InvalidParams(format!("H_prime must be > 0, got {h_prime}")));
    }
    Ok(acceptance(delta_h, h_prime))
}

#[inline]
pub(crate) fn acceptance(delta_h: f64, h_prime: f64) -> f64 {
    if delta_h <= 0.0 {
        1.0
    } else {
        (-delta_h / h_prime).exp()
    }
}
