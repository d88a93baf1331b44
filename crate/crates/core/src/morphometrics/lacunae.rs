//! Lacunae (connected medium regions) on a periodic mask.
//!
//! The mask is tiled 3×3 so that every lacuna has at least one lift that
//! crosses no outer edge, then the medium phase of the tiled image is labeled
//! without wraparound. Regions that intersect the central tile are reduced to
//! one record per torus lacuna: two tiled regions are the same lacuna exactly
//! when their projections onto the torus share a site. Area is the number of
//! distinct torus sites, so lacunae that wind around the torus are measured
//! correctly too.

use std::collections::VecDeque;

use super::Mask;

/// Adjacency used for the medium phase.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Connectivity {
    #[default]
    Four,
    Eight,
}

impl Connectivity {
    fn offsets(self) -> &'static [(i64, i64)] {
        const FOUR: [(i64, i64); 4] = [(-1, 0), (1, 0), (0, -1), (0, 1)];
        const EIGHT: [(i64, i64); 8] = [
            (-1, 0),
            (1, 0),
            (0, -1),
            (0, 1),
            (-1, -1),
            (1, -1),
            (-1, 1),
            (1, 1),
        ];
        match self {
            Connectivity::Four => &FOUR,
            Connectivity::Eight => &EIGHT,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LacunaeOptions {
    pub connectivity: Connectivity,
    /// Lacunae smaller than this are dropped.
    pub min_area: usize,
}

impl Default for LacunaeOptions {
    fn default() -> Self {
        LacunaeOptions {
            connectivity: Connectivity::Four,
            min_area: 3,
        }
    }
}

/// One lacuna on the torus.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegionRecord {
    pub area: usize,
    /// Centroid reduced into `[0, width) x [0, height)`.
    pub centroid: (f64, f64),
    /// Eigenvalues of the second-moment (inertia) tensor, largest first.
    pub inertia_eigenvalues: (f64, f64),
    /// The lacuna closes on itself around the torus; centroid and moments are
    /// then those of an arbitrary cut.
    pub wraps: bool,
}

#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    n: f64,
    origin: (f64, f64),
    sx: f64,
    sy: f64,
    sxx: f64,
    syy: f64,
    sxy: f64,
}

impl Moments {
    fn add(&mut self, x: f64, y: f64) {
        if self.n == 0.0 {
            self.origin = (x, y);
        }
        let (dx, dy) = (x - self.origin.0, y - self.origin.1);
        self.n += 1.0;
        self.sx += dx;
        self.sy += dy;
        self.sxx += dx * dx;
        self.syy += dy * dy;
        self.sxy += dx * dy;
    }

    fn centroid(&self) -> (f64, f64) {
        (self.origin.0 + self.sx / self.n, self.origin.1 + self.sy / self.n)
    }

    fn eigenvalues(&self) -> (f64, f64) {
        let mx = self.sx / self.n;
        let my = self.sy / self.n;
        let a = (self.sxx / self.n - mx * mx).max(0.0);
        let c = (self.syy / self.n - my * my).max(0.0);
        let b = self.sxy / self.n - mx * my;
        let mean = 0.5 * (a + c);
        let radius = (0.25 * (a - c) * (a - c) + b * b).sqrt();
        (mean + radius, (mean - radius).max(0.0))
    }
}

#[derive(Debug, Clone, Default)]
struct TiledRegion {
    moments: Moments,
    touches_edge: bool,
    in_centre: bool,
}

struct UnionFind {
    parent: Vec<u32>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n as u32).collect(),
        }
    }

    fn find(&mut self, mut a: u32) -> u32 {
        while self.parent[a as usize] != a {
            let up = self.parent[self.parent[a as usize] as usize];
            self.parent[a as usize] = up;
            a = up;
        }
        a
    }

    fn union(&mut self, a: u32, b: u32) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi as usize] = lo;
        }
    }
}

/// Labels the medium phase of the 3×3 tiling. Returns the label image
/// (0 = vessel) and per-label statistics (index 0 unused).
fn label_tiled(mask: &Mask, connectivity: Connectivity) -> (Vec<u32>, Vec<TiledRegion>) {
    let (w, h) = mask.dims();
    let (tw, th) = (3 * w, 3 * h);
    let medium = |x: usize, y: usize| !mask.get(x % w, y % h);
    let mut labels = vec![0u32; tw * th];
    let mut regions = vec![TiledRegion::default()];
    let mut queue = VecDeque::new();
    for start in 0..tw * th {
        let (sx, sy) = (start % tw, start / tw);
        if labels[start] != 0 || !medium(sx, sy) {
            continue;
        }
        let label = regions.len() as u32;
        let mut region = TiledRegion::default();
        labels[start] = label;
        queue.push_back(start);
        while let Some(site) = queue.pop_front() {
            let (x, y) = (site % tw, site / tw);
            region.moments.add(x as f64, y as f64);
            region.touches_edge |= x == 0 || y == 0 || x + 1 == tw || y + 1 == th;
            region.in_centre |= (w..2 * w).contains(&x) && (h..2 * h).contains(&y);
            for &(dx, dy) in connectivity.offsets() {
                let (nx, ny) = (x as i64 + dx, y as i64 + dy);
                if nx < 0 || ny < 0 || nx >= tw as i64 || ny >= th as i64 {
                    continue;
                }
                let (nx, ny) = (nx as usize, ny as usize);
                let n = ny * tw + nx;
                if labels[n] == 0 && medium(nx, ny) {
                    labels[n] = label;
                    queue.push_back(n);
                }
            }
        }
        regions.push(region);
    }
    (labels, regions)
}

/// Moments of a torus component by breadth-first unwrapping from one of its
/// sites. Reports whether the unwrapping was inconsistent (the component
/// winds around the torus).
fn unwrapped_moments(mask: &Mask, sites: &[usize], connectivity: Connectivity) -> (Moments, bool) {
    let (w, h) = mask.dims();
    let mut pos: Vec<Option<(i64, i64)>> = vec![None; w * h];
    let mut moments = Moments::default();
    let mut winds = false;
    let mut queue = VecDeque::new();
    let start = sites[0];
    pos[start] = Some(((start % w) as i64, (start / w) as i64));
    queue.push_back(start);
    while let Some(site) = queue.pop_front() {
        let (ux, uy) = pos[site].unwrap();
        moments.add(ux as f64, uy as f64);
        for &(dx, dy) in connectivity.offsets() {
            let (vx, vy) = (ux + dx, uy + dy);
            let n = (vy.rem_euclid(h as i64) as usize) * w + vx.rem_euclid(w as i64) as usize;
            if mask.bits()[n] {
                continue;
            }
            match pos[n] {
                None => {
                    pos[n] = Some((vx, vy));
                    queue.push_back(n);
                }
                Some(p) => winds |= p != (vx, vy),
            }
        }
    }
    (moments, winds)
}

fn reduce(c: (f64, f64), w: usize, h: usize) -> (f64, f64) {
    (c.0.rem_euclid(w as f64), c.1.rem_euclid(h as f64))
}

/// Every lacuna of `mask` (no area filter), one record each, ordered by the
/// first central-tile site they contain.
pub fn lacunae_regions(mask: &Mask, connectivity: Connectivity) -> Vec<RegionRecord> {
    let (w, h) = mask.dims();
    let tw = 3 * w;
    let (labels, regions) = label_tiled(mask, connectivity);

    // identify tiled regions that project onto a common torus site
    let mut uf = UnionFind::new(regions.len());
    let mut owner = vec![0u32; w * h];
    for (site, &label) in labels.iter().enumerate() {
        if label == 0 || !regions[label as usize].in_centre {
            continue;
        }
        let t = ((site / tw) % h) * w + (site % tw) % w;
        if owner[t] == 0 {
            owner[t] = label;
        } else {
            uf.union(owner[t], label);
        }
    }

    // group torus sites by lacuna via their central lift
    let mut order: Vec<u32> = Vec::new();
    let mut members: Vec<Vec<usize>> = Vec::new();
    let mut slot = vec![u32::MAX; regions.len()];
    for y in 0..h {
        for x in 0..w {
            let label = labels[(y + h) * tw + x + w];
            if label == 0 {
                continue;
            }
            let root = uf.find(label) as usize;
            if slot[root] == u32::MAX {
                slot[root] = members.len() as u32;
                order.push(root as u32);
                members.push(Vec::new());
            }
            members[slot[root] as usize].push(y * w + x);
        }
    }

    // a lift that touches no outer edge is a complete copy of its lacuna
    let mut complete: Vec<Option<u32>> = vec![None; members.len()];
    for label in 1..regions.len() {
        let r = &regions[label];
        if r.in_centre && !r.touches_edge {
            let s = slot[uf.find(label as u32) as usize] as usize;
            complete[s].get_or_insert(label as u32);
        }
    }

    members
        .iter()
        .zip(&complete)
        .map(|(sites, full)| {
            let (moments, wraps) = match full {
                Some(label) => (regions[*label as usize].moments, false),
                None => unwrapped_moments(mask, sites, connectivity),
            };
            RegionRecord {
                area: sites.len(),
                centroid: reduce(moments.centroid(), w, h),
                inertia_eigenvalues: moments.eigenvalues(),
                wraps,
            }
        })
        .collect()
}

/// Sorted lacuna areas with the default options (4-connectivity, areas < 3
/// dropped).
pub fn lacunae_areas(mask: &Mask) -> Vec<usize> {
    lacunae_areas_with(mask, &LacunaeOptions::default())
}

pub fn lacunae_areas_with(mask: &Mask, opts: &LacunaeOptions) -> Vec<usize> {
    let mut areas: Vec<usize> = lacunae_regions(mask, opts.connectivity)
        .into_iter()
        .map(|r| r.area)
        .filter(|&a| a >= opts.min_area)
        .collect();
    areas.sort_unstable();
    areas
}

/// Reference labeling: union-find directly on the torus with wraparound
/// adjacency. Sorted areas, filtered at `min_area`.
pub fn torus_label_oracle(mask: &Mask, connectivity: Connectivity, min_area: usize) -> Vec<usize> {
    let (w, h) = mask.dims();
    let bits = mask.bits();
    let mut uf = UnionFind::new(w * h);
    let forward: &[(usize, usize)] = match connectivity {
        Connectivity::Four => &[(1, 0), (0, 1)],
        Connectivity::Eight => &[(1, 0), (0, 1), (1, 1), (w - 1, 1)],
    };
    for y in 0..h {
        for x in 0..w {
            let a = y * w + x;
            if bits[a] {
                continue;
            }
            for &(dx, dy) in forward {
                let b = ((y + dy) % h) * w + (x + dx) % w;
                if !bits[b] {
                    uf.union(a as u32, b as u32);
                }
            }
        }
    }
    let mut counts = vec![0usize; w * h];
    for site in 0..w * h {
        if !bits[site] {
            counts[uf.find(site as u32) as usize] += 1;
        }
    }
    let mut areas: Vec<usize> = counts.into_iter().filter(|&c| c > 0 && c >= min_area).collect();
    areas.sort_unstable();
    areas
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn oracle(mask: &Mask) -> Vec<usize> {
        torus_label_oracle(mask, Connectivity::Four, 3)
    }

    #[test]
    fn all_medium_is_one_lacuna() {
        let m = Mask::filled(16, 12, false);
        assert_eq!(lacunae_areas(&m), vec![192]);
        let r = lacunae_regions(&m, Connectivity::Four);
        assert_eq!(r.len(), 1);
        assert!(r[0].wraps);
    }

    #[test]
    fn all_vessel_has_none() {
        let m = Mask::filled(16, 16, true);
        assert!(lacunae_areas(&m).is_empty());
        assert!(oracle(&m).is_empty());
    }

    #[test]
    fn single_site_is_filtered() {
        let mut m = Mask::filled(16, 16, true);
        m.set(3, 3, false);
        assert!(lacunae_areas(&m).is_empty());
        assert!(oracle(&m).is_empty());
        assert_eq!(torus_label_oracle(&m, Connectivity::Four, 1), vec![1]);
    }

    #[test]
    fn ring_around_hole() {
        let mut m = Mask::filled(32, 32, false);
        for y in 10..15 {
            for x in 10..15 {
                m.set(x, y, true);
            }
        }
        for y in 11..14 {
            for x in 11..14 {
                m.set(x, y, false);
            }
        }
        assert_eq!(lacunae_areas(&m), vec![9, 1024 - 25]);
        assert_eq!(lacunae_areas(&m), oracle(&m));
        let hole = lacunae_regions(&m, Connectivity::Four)
            .into_iter()
            .find(|r| r.area == 9)
            .unwrap();
        assert!(!hole.wraps);
        assert!((hole.centroid.0 - 12.0).abs() < 1e-12 && (hole.centroid.1 - 12.0).abs() < 1e-12);
        // 3x3 block: variance of {-1,0,1} is 2/3 on both axes
        assert!((hole.inertia_eigenvalues.0 - 2.0 / 3.0).abs() < 1e-12);
        assert!((hole.inertia_eigenvalues.1 - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn identical_separate_holes_both_count() {
        let mut m = Mask::filled(20, 20, true);
        for (ox, oy) in [(2, 2), (12, 12)] {
            for y in 0..2 {
                for x in 0..2 {
                    m.set(ox + x, oy + y, false);
                }
            }
        }
        assert_eq!(lacunae_areas(&m), vec![4, 4]);
    }

    #[test]
    fn seam_straddling_hole_counted_once() {
        let mut m = Mask::filled(16, 16, true);
        for &(x, y) in &[(15, 15), (0, 15), (15, 0), (0, 0), (1, 0)] {
            m.set(x, y, false);
        }
        assert_eq!(lacunae_areas(&m), vec![5]);
        let r = lacunae_regions(&m, Connectivity::Four);
        assert_eq!(r.len(), 1);
        assert!(!r[0].wraps);
    }

    #[test]
    fn band_winding_once() {
        let mut m = Mask::filled(16, 16, true);
        for x in 0..16 {
            m.set(x, 5, false);
            m.set(x, 6, false);
        }
        assert_eq!(lacunae_areas(&m), vec![32]);
        assert!(lacunae_regions(&m, Connectivity::Four)[0].wraps);
    }

    #[test]
    fn diagonal_contact_depends_on_connectivity() {
        let mut m = Mask::filled(16, 16, true);
        for &(x, y) in &[(2, 2), (3, 2), (4, 3), (5, 3)] {
            m.set(x, y, false);
        }
        let four = LacunaeOptions { connectivity: Connectivity::Four, min_area: 1 };
        let eight = LacunaeOptions { connectivity: Connectivity::Eight, min_area: 1 };
        assert_eq!(lacunae_areas_with(&m, &four), vec![2, 2]);
        assert_eq!(lacunae_areas_with(&m, &eight), vec![4]);
        assert_eq!(torus_label_oracle(&m, Connectivity::Eight, 1), vec![4]);
    }

    fn random_mask(w: usize, h: usize) -> impl Strategy<Value = Mask> {
        (proptest::collection::vec(0u8..100, w * h), 20u8..80).prop_map(move |(raw, p)| {
            Mask::new(w, h, raw.into_iter().map(|r| r < p).collect()).unwrap()
        })
    }

    proptest! {
        #[test]
        fn matches_oracle(m in random_mask(12, 10), eight in any::<bool>()) {
            let conn = if eight { Connectivity::Eight } else { Connectivity::Four };
            let opts = LacunaeOptions { connectivity: conn, min_area: 1 };
            prop_assert_eq!(lacunae_areas_with(&m, &opts), torus_label_oracle(&m, conn, 1));
        }

        #[test]
        fn partition_identity(m in random_mask(10, 9)) {
            let total: usize = lacunae_regions(&m, Connectivity::Four).iter().map(|r| r.area).sum();
            prop_assert_eq!(total + m.count(), 90);
        }

        #[test]
        fn shift_invariant(m in random_mask(11, 9), dx in 0usize..11, dy in 0usize..9) {
            prop_assert_eq!(lacunae_areas(&m), lacunae_areas(&m.shifted(dx, dy)));
        }
    }
}
