//! Explicit diffusion, decay and secretion of the chemical field on a torus.

use crate::error::{Error, Result};
use crate::params::ParamSet;

/// Concentration grid, row-major, same dimensions as the lattice.
#[derive(Debug, Clone, PartialEq)]
pub struct ChemField {
    width: usize,
    height: usize,
    values: Vec<f64>,
}

impl ChemField {
    pub fn zeros(width: usize, height: usize) -> Self {
        ChemField::uniform(width, height, 0.0)
    }

    pub fn uniform(width: usize, height: usize, value: f64) -> Self {
        ChemField {
            width,
            height,
            values: vec![value; width * height],
        }
    }

    pub fn from_values(width: usize, height: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != width * height {
            return Err(Error::DimensionMismatch {
                left: (width, height),
                right: (values.len(), 1),
            });
        }
        if let Some((site, &value)) = values
            .iter()
            .enumerate()
            .find(|(_, v)| !v.is_finite() || **v < 0.0)
        {
            return Err(Error::InvalidField { site, value });
        }
        Ok(ChemField {
            width,
            height,
            values,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    #[inline]
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn get(&self, site: usize) -> f64 {
        self.values[site]
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Sum over all sites.
    pub fn total(&self) -> f64 {
        self.values.iter().sum()
    }

    /// One explicit step in place. `occupied(site)` tells where secretion
    /// happens; `scratch` is resized as needed and holds the previous values
    /// afterwards.
    pub(crate) fn step_in_place(
        &mut self,
        scratch: &mut Vec<f64>,
        occupied: impl Fn(usize) -> bool,
        params: &ParamSet,
    ) {
        scratch.resize(self.values.len(), 0.0);
        advance(
            &self.values,
            scratch,
            self.width,
            self.height,
            occupied,
            Coefficients::new(params),
        );
        std::mem::swap(&mut self.values, scratch);
    }
}

/// Sum of the field over all sites.
pub fn field_total(field: &ChemField) -> f64 {
    field.total()
}

#[derive(Debug, Clone, Copy)]
struct Coefficients {
    diffusion: f64,
    retention: f64,
    source: f64,
}

impl Coefficients {
    fn new(params: &ParamSet) -> Self {
        Coefficients {
            diffusion: params.d * params.dt,
            retention: 1.0 - params.k * params.dt,
            source: params.secretion_rate * params.dt,
        }
    }
}

/// `next = (1 - k dt) * (c + D dt * lap(c)) + dt * secretion * mask`.
///
/// Diffusion then decay: every output is a non-negative combination of
/// inputs whenever `D dt <= 1/4` and `k dt <= 1`.
fn advance(
    src: &[f64],
    dst: &mut [f64],
    width: usize,
    height: usize,
    occupied: impl Fn(usize) -> bool,
    coef: Coefficients,
) {
    if width == 0 || height == 0 {
        return;
    }
    let source = |site: usize| if occupied(site) { coef.source } else { 0.0 };
    let update = |c: f64, lap: f64| coef.retention * (c + coef.diffusion * lap);
    for y in 0..height {
        let row = y * width;
        let up = if y == 0 { (height - 1) * width } else { row - width };
        let down = if y + 1 == height { 0 } else { row + width };
        let (above, here, below) = (&src[up..up + width], &src[row..row + width], &src[down..down + width]);
        let out = &mut dst[row..row + width];
        for x in [0, width - 1] {
            let xl = if x == 0 { width - 1 } else { x - 1 };
            let xr = if x + 1 == width { 0 } else { x + 1 };
            let c = here[x];
            let lap = here[xl] + here[xr] + above[x] + below[x] - 4.0 * c;
            out[x] = update(c, lap) + source(row + x);
        }
        for x in 1..width - 1 {
            let c = here[x];
            let lap = here[x - 1] + here[x + 1] + above[x] + below[x] - 4.0 * c;
            out[x] = update(c, lap) + source(row + x);
        }
    }
}

/// Advances `field` by one step, returning the new field.
pub fn diffusion_step(field: &ChemField, mask: &[bool], params: &ParamSet) -> Result<ChemField> {
    if mask.len() != field.values.len() {
        return Err(Error::DimensionMismatch {
            left: field.dims(),
            right: (mask.len(), 1),
        });
    }
    check_stability(params)?;
    let mut out = vec![0.0; field.values.len()];
    advance(
        &field.values,
        &mut out,
        field.width,
        field.height,
        |s| mask[s],
        Coefficients::new(params),
    );
    Ok(ChemField {
        width: field.width,
        height: field.height,
        values: out,
    })
}

fn check_stability(params: &ParamSet) -> Result<()> {
    if params.d * params.dt > 0.25 || params.k * params.dt > 1.0 || params.dt <= 0.0 {
        return Err(Error::InvalidParams(format!(
            "unstable step: D*dt = {}, k*dt = {}",
            params.d * params.dt,
            params.k * params.dt
        )));
    }
    Ok(())
}
