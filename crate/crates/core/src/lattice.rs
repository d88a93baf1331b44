//! Periodic square lattice, cell-id storage and the per-cell bookkeeping table.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Cell identifier. `0` is the medium.
pub type CellId = u32;

pub const MEDIUM: CellId = 0;

/// Neighborhood range: 1 = von Neumann (4 sites), 2 = Moore (8 sites).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum NeighborOrder {
    First = 1,
    Second = 2,
}

impl NeighborOrder {
    pub fn len(self) -> usize {
        match self {
            NeighborOrder::First => 4,
            NeighborOrder::Second => 8,
        }
    }
}

impl TryFrom<u8> for NeighborOrder {
    type Error = Error;

    fn try_from(order: u8) -> Result<Self> {
        match order {
            1 => Ok(NeighborOrder::First),
            2 => Ok(NeighborOrder::Second),
            other => Err(Error::InvalidOrder(other)),
        }
    }
}

impl From<NeighborOrder> for u8 {
    fn from(order: NeighborOrder) -> u8 {
        order as u8
    }
}

/// Up to eight neighbor site indices.
///
/// The first four entries are always the von Neumann neighbors in the order
/// left, right, up, down; second-order neighborhoods append the diagonals.
#[derive(Debug, Clone, Copy)]
pub struct Neighbors {
    sites: [usize; 8],
    len: usize,
}

impl Neighbors {
    pub fn as_slice(&self) -> &[usize] {
        &self.sites[..self.len]
    }
}

impl std::ops::Deref for Neighbors {
    type Target = [usize];

    fn deref(&self) -> &[usize] {
        self.as_slice()
    }
}

/// The cell-id grid on a torus, row-major with the origin at the top-left.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lattice {
    width: usize,
    height: usize,
    ids: Vec<CellId>,
}

impl Lattice {
    /// An all-medium lattice.
    pub fn new(width: usize, height: usize) -> Result<Self> {
        if width < 8 || height < 8 {
            return Err(Error::LatticeTooSmall { width, height });
        }
        Ok(Lattice {
            width,
            height,
            ids: vec![MEDIUM; width * height],
        })
    }

    pub fn from_ids(width: usize, height: usize, ids: Vec<CellId>) -> Result<Self> {
        let mut lattice = Lattice::new(width, height)?;
        if ids.len() != width * height {
            return Err(Error::DimensionMismatch {
                left: (width, height),
                right: (ids.len(), 1),
            });
        }
        lattice.ids = ids;
        Ok(lattice)
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    #[inline]
    pub fn ids(&self) -> &[CellId] {
        &self.ids
    }

    #[inline]
    pub fn get(&self, site: usize) -> CellId {
        self.ids[site]
    }

    #[inline]
    pub(crate) fn set(&mut self, site: usize, id: CellId) {
        self.ids[site] = id;
    }

    /// Site index of `(x mod width, y mod height)` using non-negative modulo.
    #[inline]
    pub fn wrap(&self, x: i64, y: i64) -> usize {
        let x = x.rem_euclid(self.width as i64) as usize;
        let y = y.rem_euclid(self.height as i64) as usize;
        y * self.width + x
    }

    #[inline]
    pub fn coords(&self, site: usize) -> (usize, usize) {
        (site % self.width, site / self.width)
    }

    #[inline]
    pub fn neighborhood(&self, site: usize, order: NeighborOrder) -> Neighbors {
        let w = self.width;
        let h = self.height;
        let (x, y) = (site % w, site / w);
        let xl = if x == 0 { w - 1 } else { x - 1 };
        let xr = if x + 1 == w { 0 } else { x + 1 };
        let row = y * w;
        let up = if y == 0 { (h - 1) * w } else { row - w };
        let down = if y + 1 == h { 0 } else { row + w };
        let mut sites = [0usize; 8];
        sites[0] = row + xl;
        sites[1] = row + xr;
        sites[2] = up + x;
        sites[3] = down + x;
        let len = match order {
            NeighborOrder::First => 4,
            NeighborOrder::Second => {
                sites[4] = up + xl;
                sites[5] = up + xr;
                sites[6] = down + xl;
                sites[7] = down + xr;
                8
            }
        };
        Neighbors { sites, len }
    }

    /// Binary occupancy: `true` where a cell sits.
    pub fn occupancy(&self) -> Vec<bool> {
        self.ids.iter().map(|&id| id != MEDIUM).collect()
    }
}

/// Cell type. Only one non-medium type exists in this model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CellType {
    Medium,
    Vascular,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Cell {
    pub kind: CellType,
    /// Number of sites.
    pub volume: u32,
    /// Number of 4-neighbor links to sites with a different id.
    pub surface: u32,
}

/// Per-cell volume and surface, indexed by id. Slot 0 (medium) is always empty,
/// and a cell whose volume drops to zero is removed.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CellTable {
    cells: Vec<Option<Cell>>,
}

impl CellTable {
    /// Counts volumes and surfaces from scratch. Every nonzero id becomes a
    /// vascular cell.
    pub fn recount(lattice: &Lattice) -> Self {
        let max_id = lattice.ids().iter().copied().max().unwrap_or(0) as usize;
        let mut cells: Vec<Option<Cell>> = vec![None; max_id + 1];
        let ids = lattice.ids();
        for (site, &id) in ids.iter().enumerate() {
            if id != MEDIUM {
                cells[id as usize]
                    .get_or_insert(Cell {
                        kind: CellType::Vascular,
                        volume: 0,
                        surface: 0,
                    })
                    .volume += 1;
            }
            // each link once: right and down
            let n = lattice.neighborhood(site, NeighborOrder::First);
            for &other in &[n[1], n[3]] {
                let oid = ids[other];
                if oid != id {
                    for side in [id, oid] {
                        if side != MEDIUM {
                            if let Some(c) = cells[side as usize].as_mut() {
                                c.surface += 1;
                            } else {
                                cells[side as usize] = Some(Cell {
                                    kind: CellType::Vascular,
                                    volume: 0,
                                    surface: 1,
                                });
                            }
                        }
                    }
                }
            }
        }
        CellTable { cells }
    }

    #[inline]
    pub fn get(&self, id: CellId) -> Option<&Cell> {
        self.cells.get(id as usize).and_then(Option::as_ref)
    }

    #[inline]
    pub(crate) fn get_mut(&mut self, id: CellId) -> Option<&mut Cell> {
        self.cells.get_mut(id as usize).and_then(Option::as_mut)
    }

    pub(crate) fn remove(&mut self, id: CellId) {
        if let Some(slot) = self.cells.get_mut(id as usize) {
            *slot = None;
        }
    }

    #[inline]
    pub fn kind(&self, id: CellId) -> CellType {
        if id == MEDIUM {
            CellType::Medium
        } else {
            self.get(id).map_or(CellType::Medium, |c| c.kind)
        }
    }

    #[inline]
    pub fn volume(&self, id: CellId) -> u32 {
        self.get(id).map_or(0, |c| c.volume)
    }

    #[inline]
    pub fn surface(&self, id: CellId) -> u32 {
        self.get(id).map_or(0, |c| c.surface)
    }

    /// Live cells as `(id, cell)`.
    pub fn iter(&self) -> impl Iterator<Item = (CellId, &Cell)> {
        self.cells
            .iter()
            .enumerate()
            .filter_map(|(id, c)| c.as_ref().map(|c| (id as CellId, c)))
    }

    pub fn live_count(&self) -> usize {
        self.iter().count()
    }

    /// Compares against a full recount of `lattice`; returns the first
    /// discrepancy.
    pub fn audit(&self, lattice: &Lattice) -> std::result::Result<(), String> {
        let fresh = CellTable::recount(lattice);
        let n = self.cells.len().max(fresh.cells.len());
        for id in 1..n as CellId {
            let (a, b) = (self.get(id), fresh.get(id));
            if a.map(|c| (c.volume, c.surface)) != b.map(|c| (c.volume, c.surface)) {
                return Err(format!("cell {id}: table {a:?} vs recount {b:?}"));
            }
        }
        Ok(())
    }
}
