//! Independent oracles shared by the integration and acceptance tests.
#![allow(dead_code)]

use std::collections::HashMap;

use cpm_core::morphometrics::Mask;
use cpm_core::{ChemField, ChemotaxisMode, Lattice, NeighborOrder, ParamSet, SimState};
use rand::Rng;

/// Contact + volume + surface energy of a whole lattice, recomputed from
/// scratch. Each unordered neighbor pair is visited once.
pub fn state_energy(l: &Lattice, p: &ParamSet) -> f64 {
    state_energy_over(l, p, &[])
}

/// As [`state_energy`], but every id in `population` counts as a cell even
/// when it has no sites left.
pub fn state_energy_over(l: &Lattice, p: &ParamSet, population: &[u32]) -> f64 {
    let (w, h) = (l.width() as i64, l.height() as i64);
    let forward: &[(i64, i64)] = match p.contact_order {
        NeighborOrder::First => &[(1, 0), (0, 1)],
        NeighborOrder::Second => &[(1, 0), (0, 1), (1, 1), (-1, 1)],
    };
    let id = |x: i64, y: i64| l.ids()[(y.rem_euclid(h) * w + x.rem_euclid(w)) as usize];

    let mut contact = 0.0;
    let mut volume: HashMap<u32, f64> = HashMap::new();
    let mut surface: HashMap<u32, f64> = HashMap::new();
    for &c in population {
        volume.insert(c, 0.0);
        surface.insert(c, 0.0);
    }
    for y in 0..h {
        for x in 0..w {
            let a = id(x, y);
            if a != 0 {
                *volume.entry(a).or_default() += 1.0;
                surface.entry(a).or_default();
            }
            for &(dx, dy) in forward {
                let b = id(x + dx, y + dy);
                if a != b {
                    contact += if a == 0 || b == 0 { p.j_cell_medium } else { p.j_cell_cell };
                }
            }
            for (dx, dy) in [(1, 0), (0, 1)] {
                let b = id(x + dx, y + dy);
                if a != b {
                    for c in [a, b] {
                        if c != 0 {
                            *surface.entry(c).or_default() += 1.0;
                        }
                    }
                }
            }
        }
    }
    let vol: f64 = volume
        .values()
        .map(|v| p.lambda_volume * (v - p.v_target).powi(2))
        .sum();
    let surf: f64 = surface
        .values()
        .map(|s| p.lambda_surface * (s - p.s_target).powi(2))
        .sum();
    contact + vol + surf
}

/// Chemotactic term of a copy, straight from its definition.
pub fn chemotaxis_term(l: &Lattice, f: &ChemField, src: usize, dst: usize, p: &ParamSet) -> f64 {
    let moving = l.ids()[src];
    let applies = match p.chemotaxis_mode {
        ChemotaxisMode::Extension => moving != 0,
        ChemotaxisMode::Both => true,
    };
    if !applies {
        return 0.0;
    }
    let g = |c: f64| c / (p.s * c + 1.0);
    -p.lambda_chemotaxis * (g(f.values()[dst]) - g(f.values()[src]))
}

/// Energy change of copying `src` onto `dst`, by recomputation over the
/// pre-copy cell population.
pub fn oracle_delta(state: &SimState, src: usize, dst: usize, p: &ParamSet) -> f64 {
    let l = state.lattice();
    let population: Vec<u32> = state.cells().iter().map(|(id, _)| id).collect();
    let before = state_energy_over(l, p, &population);
    let mut ids = l.ids().to_vec();
    ids[dst] = ids[src];
    let after = state_energy_over(&Lattice::from_ids(l.width(), l.height(), ids).unwrap(), p, &population);
    after - before + chemotaxis_term(l, state.field(), src, dst, p)
}

/// Random parameters around the defaults, covering both neighbor orders and
/// both chemotaxis modes.
pub fn random_params(rng: &mut impl Rng) -> ParamSet {
    let order = |b: bool| if b { NeighborOrder::Second } else { NeighborOrder::First };
    ParamSet {
        lambda_volume: rng.gen_range(0.0..10.0),
        v_target: rng.gen_range(1.0..60.0),
        lambda_surface: rng.gen_range(0.0..3.0),
        s_target: rng.gen_range(1.0..30.0),
        j_cell_medium: rng.gen_range(0.0..20.0),
        j_cell_cell: rng.gen_range(0.0..20.0),
        lambda_chemotaxis: rng.gen_range(0.0..3000.0),
        s: rng.gen_range(0.0..2.0),
        contact_order: order(rng.gen()),
        copy_order: order(rng.gen()),
        chemotaxis_mode: if rng.gen_bool(0.3) {
            ChemotaxisMode::Both
        } else {
            ChemotaxisMode::Extension
        },
        ..ParamSet::default()
    }
}

/// Random configuration: blobs around random centers with ragged edges,
/// sometimes plain per-site noise, with a random non-negative field.
pub fn random_state(rng: &mut impl Rng, w: usize, h: usize) -> SimState {
    let n = rng.gen_range(1..12u32);
    let mut ids = vec![0u32; w * h];
    if rng.gen_bool(0.2) {
        for id in ids.iter_mut() {
            *id = rng.gen_range(0..=n);
        }
    } else {
        let centers: Vec<(i64, i64, f64)> = (0..n)
            .map(|_| (rng.gen_range(0..w as i64), rng.gen_range(0..h as i64), rng.gen_range(1.0..5.0)))
            .collect();
        for y in 0..h as i64 {
            for x in 0..w as i64 {
                let mut best = (f64::INFINITY, 0u32);
                for (i, &(cx, cy, r)) in centers.iter().enumerate() {
                    let dx = (x - cx).rem_euclid(w as i64).min((cx - x).rem_euclid(w as i64));
                    let dy = (y - cy).rem_euclid(h as i64).min((cy - y).rem_euclid(h as i64));
                    let d = ((dx * dx + dy * dy) as f64).sqrt() / r;
                    if d < best.0 {
                        best = (d, i as u32 + 1);
                    }
                }
                let jitter: f64 = rng.gen_range(0.7..1.3);
                if best.0 * jitter < 1.0 {
                    ids[y as usize * w + x as usize] = best.1;
                }
            }
        }
    }
    let field: Vec<f64> = (0..w * h).map(|_| rng.gen_range(0.0..3.0)).collect();
    SimState::new(
        Lattice::from_ids(w, h, ids).unwrap(),
        ChemField::from_values(w, h, field).unwrap(),
        0,
        rng.gen(),
    )
    .unwrap()
}

/// Minimum-cost perfect matching on a square cost matrix.
pub fn hungarian(cost: &[Vec<f64>]) -> f64 {
    let n = cost.len();
    let inf = f64::INFINITY;
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0;
        let mut minv = vec![inf; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = inf;
            let mut j1 = 0;
            for j in 1..=n {
                if !used[j] {
                    let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    (1..=n).map(|j| cost[p[j] - 1][j - 1]).sum()
}

/// Optimal transport between two uniform empirical measures, by expanding
/// both to `n * m` unit atoms and solving the assignment problem.
pub fn transport_oracle(a: &[f64], b: &[f64]) -> f64 {
    let (n, m) = (a.len(), b.len());
    let xs: Vec<f64> = a.iter().flat_map(|&x| std::iter::repeat_n(x, m)).collect();
    let ys: Vec<f64> = b.iter().flat_map(|&y| std::iter::repeat_n(y, n)).collect();
    let cost: Vec<Vec<f64>> = xs
        .iter()
        .map(|x| ys.iter().map(|y| (x - y).abs()).collect())
        .collect();
    hungarian(&cost) / (n * m) as f64
}

/// Areas of the 4- or 8-connected medium components of a torus mask, by a
/// plain flood fill with wraparound.
pub fn torus_bfs_areas(mask: &Mask, eight: bool, min_area: usize) -> Vec<usize> {
    let (w, h) = mask.dims();
    let mut seen = vec![false; w * h];
    let mut areas = Vec::new();
    let steps: &[(i64, i64)] = if eight {
        &[(1, 0), (-1, 0), (0, 1), (0, -1), (1, 1), (1, -1), (-1, 1), (-1, -1)]
    } else {
        &[(1, 0), (-1, 0), (0, 1), (0, -1)]
    };
    for start in 0..w * h {
        if seen[start] || mask.bits()[start] {
            continue;
        }
        seen[start] = true;
        let mut stack = vec![start];
        let mut area = 0;
        while let Some(s) = stack.pop() {
            area += 1;
            let (x, y) = ((s % w) as i64, (s / w) as i64);
            for &(dx, dy) in steps {
                let n = ((y + dy).rem_euclid(h as i64) * w as i64 + (x + dx).rem_euclid(w as i64)) as usize;
                if !seen[n] && !mask.bits()[n] {
                    seen[n] = true;
                    stack.push(n);
                }
            }
        }
        if area >= min_area {
            areas.push(area);
        }
    }
    areas.sort_unstable();
    areas
}

/// Random vessel mask: either per-site noise or a few random rectangles and
/// lines, some of which cross the seams.
pub fn random_mask(rng: &mut impl Rng, w: usize, h: usize) -> Mask {
    let mut m = Mask::filled(w, h, false);
    if rng.gen_bool(0.4) {
        let p = rng.gen_range(0.2..0.8);
        for y in 0..h {
            for x in 0..w {
                m.set(x, y, rng.gen_bool(p));
            }
        }
    } else {
        for _ in 0..rng.gen_range(1..12) {
            let (x0, y0) = (rng.gen_range(0..w), rng.gen_range(0..h));
            let (rw, rh) = if rng.gen_bool(0.5) {
                (rng.gen_range(1..=w), rng.gen_range(1..3))
            } else {
                (rng.gen_range(1..3), rng.gen_range(1..=h))
            };
            for dy in 0..rh {
                for dx in 0..rw {
                    m.set((x0 + dx) % w, (y0 + dy) % h, true);
                }
            }
        }
    }
    m
}

/// Mask from ASCII rows, `#` is vessel.
pub fn ascii_mask(rows: &[&str]) -> Mask {
    let h = rows.len();
    let w = rows[0].len();
    let bits = rows
        .iter()
        .flat_map(|r| r.bytes().map(|b| b == b'#'))
        .collect();
    Mask::new(w, h, bits).unwrap()
}

fn grid_lines(w: usize, h: usize, step: usize, offset: usize) -> Mask {
    let mut m = Mask::filled(w, h, false);
    for y in 0..h {
        for x in 0..w {
            if (x + offset).is_multiple_of(step) || (y + offset).is_multiple_of(step) {
                m.set(x, y, true);
            }
        }
    }
    m
}

fn ring(m: &mut Mask, x0: usize, y0: usize, outer: usize) {
    let (w, h) = m.dims();
    for dy in 0..outer {
        for dx in 0..outer {
            let edge = dx == 0 || dy == 0 || dx == outer - 1 || dy == outer - 1;
            m.set((x0 + dx) % w, (y0 + dy) % h, edge);
        }
    }
}

/// Seam- and corner-wrapping configurations on small tori.
pub fn handcrafted_masks() -> Vec<(&'static str, Mask)> {
    let mut cases = Vec::new();
    let all_vessel = Mask::filled(16, 16, true);

    let mut m = all_vessel.clone();
    for y in 6..9 {
        for x in [14, 15, 0, 1] {
            m.set(x, y, false);
        }
    }
    cases.push(("hole across the vertical seam", m));

    let mut m = all_vessel.clone();
    for y in [15, 0, 1] {
        for x in 4..8 {
            m.set(x, y, false);
        }
    }
    cases.push(("hole across the horizontal seam", m));

    let mut m = all_vessel.clone();
    for (x, y) in [(15, 15), (0, 15), (15, 0), (0, 0), (1, 0), (0, 1)] {
        m.set(x, y, false);
    }
    cases.push(("hole on the corner", m));

    let mut m = all_vessel.clone();
    for (x, y) in [(14, 15), (15, 15), (0, 15), (15, 0), (15, 1), (15, 2)] {
        m.set(x, y, false);
    }
    cases.push(("L-shaped corner hole", m));

    let mut m = Mask::filled(16, 16, false);
    for x in 0..16 {
        m.set(x, 5, true);
    }
    cases.push(("single band, medium wraps vertically", m));

    let mut m = Mask::filled(16, 16, false);
    for x in 0..16 {
        m.set(x, 3, true);
        m.set(x, 11, true);
    }
    cases.push(("two bands, two strips", m));

    let mut m = Mask::filled(16, 16, false);
    for i in 0..16 {
        m.set(i, 0, true);
        m.set(0, i, true);
    }
    cases.push(("cross through the origin", m));

    cases.push(("grid of identical cells", grid_lines(32, 32, 8, 0)));
    cases.push(("grid of identical cells straddling seams", grid_lines(32, 32, 8, 3)));

    let mut m = Mask::filled(16, 16, false);
    for i in 0..16 {
        m.set(i, i, true);
        m.set((i + 1) % 16, i, true);
    }
    cases.push(("diagonal band winding the torus", m));

    let mut m = all_vessel.clone();
    for (x, y) in [(3, 3), (4, 3), (9, 9), (9, 10), (10, 9)] {
        m.set(x, y, false);
    }
    cases.push(("area 2 filtered, area 3 kept", m));

    let mut m = Mask::filled(16, 16, false);
    for y in 0..16 {
        for x in 0..16 {
            m.set(x, y, (x + y) % 2 == 0);
        }
    }
    cases.push(("checkerboard", m));

    cases.push(("all medium", Mask::filled(16, 16, false)));
    cases.push(("all vessel", all_vessel.clone()));

    let mut m = Mask::filled(16, 16, false);
    m.set(0, 0, true);
    cases.push(("single vessel site on the corner", m));

    let mut m = Mask::filled(24, 24, false);
    ring(&mut m, 21, 21, 6);
    cases.push(("ring around the corner", m));

    let mut m = Mask::filled(24, 24, false);
    ring(&mut m, 20, 2, 10);
    ring(&mut m, 22, 4, 6);
    cases.push(("nested rings across the seam", m));

    let mut m = all_vessel.clone();
    for y in 0..16 {
        m.set(7, y, false);
    }
    cases.push(("one-wide medium column closing on itself", m));

    let mut m = Mask::filled(20, 20, true);
    for &(x, y) in &[(19, 5), (0, 5), (1, 5), (1, 6), (1, 7), (0, 7), (19, 7), (18, 7), (18, 6)] {
        m.set(x, y, false);
    }
    cases.push(("C-shaped hole across the seam", m));

    let mut m = Mask::filled(16, 16, true);
    for (x, y) in [(2, 2), (3, 2), (4, 2), (10, 12), (11, 12), (12, 12), (15, 8), (0, 8), (1, 8)] {
        m.set(x, y, false);
    }
    cases.push(("identical holes, one across the seam", m));

    cases
}
