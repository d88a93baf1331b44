use crate::error::{Error, Result};

/// Wasserstein-1 distance between two equally weighted empirical samples:
/// the integral of `|F_a - F_b|` over the real line.
///
/// Two empty samples are at distance 0; one empty sample is an error.
pub fn emd_1d(a: &[f64], b: &[f64]) -> Result<f64> {
    match (a.is_empty(), b.is_empty()) {
        (true, true) => return Ok(0.0),
        (true, false) | (false, true) => return Err(Error::EmptyDistribution),
        _ => {}
    }
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);

    // sweep the merged support; between consecutive points both CDFs are flat
    let (mut i, mut j) = (0usize, 0usize);
    let mut prev = a[0].min(b[0]);
    let mut total = 0.0;
    while i < a.len() || j < b.len() {
        let next = match (a.get(i), b.get(j)) {
            (Some(&x), Some(&y)) => x.min(y),
            (Some(&x), None) => x,
            (None, Some(&y)) => y,
            (None, None) => unreachable!(),
        };
        let gap = (i as f64 / na - j as f64 / nb).abs();
        total += gap * (next - prev);
        while i < a.len() && a[i] == next {
            i += 1;
        }
        while j < b.len() && b[j] == next {
            j += 1;
        }
        prev = next;
    }
    Ok(total)
}
