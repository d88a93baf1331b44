//! Evaluation quantities for comparing two configurations.

mod emd;
mod lacunae;

pub use emd::emd_1d;
pub use lacunae::{
    lacunae_areas, lacunae_areas_with, lacunae_regions, torus_label_oracle, Connectivity,
    LacunaeOptions, RegionRecord,
};

use serde::{Deserialize, Serialize};

use crate::diffusion::ChemField;
use crate::error::{Error, Result};
use crate::snapshot::Snapshot;

/// Binary grid, row-major. `true` marks vessel (cell-occupied) sites.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mask {
    width: usize,
    height: usize,
    bits: Vec<bool>,
}

impl Mask {
    pub fn new(width: usize, height: usize, bits: Vec<bool>) -> Result<Self> {
        if bits.len() != width * height || width == 0 || height == 0 {
            return Err(Error::DimensionMismatch {
                left: (width, height),
                right: (bits.len(), 1),
            });
        }
        Ok(Mask {
            width,
            height,
            bits,
        })
    }

    pub fn filled(width: usize, height: usize, value: bool) -> Self {
        Mask {
            width,
            height,
            bits: vec![value; width * height],
        }
    }

    pub fn from_snapshot(s: &Snapshot) -> Self {
        Mask {
            width: s.width,
            height: s.height,
            bits: s.channel0(),
        }
    }

    /// Binarizes a soft channel: `value > threshold`.
    pub fn threshold(width: usize, height: usize, values: &[f64], threshold: f64) -> Result<Self> {
        Mask::new(width, height, values.iter().map(|&v| v > threshold).collect())
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

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> bool {
        self.bits[y * self.width + x]
    }

    pub fn set(&mut self, x: usize, y: usize, value: bool) {
        self.bits[y * self.width + x] = value;
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    /// Wrapped shift by `(dx, dy)`.
    pub fn shifted(&self, dx: usize, dy: usize) -> Mask {
        let (w, h) = self.dims();
        let mut bits = vec![false; w * h];
        for y in 0..h {
            for x in 0..w {
                bits[((y + dy) % h) * w + (x + dx) % w] = self.bits[y * w + x];
            }
        }
        Mask {
            width: w,
            height: h,
            bits,
        }
    }
}

fn same_dims(a: (usize, usize), b: (usize, usize)) -> Result<()> {
    if a != b {
        return Err(Error::DimensionMismatch { left: a, right: b });
    }
    Ok(())
}

/// Sørensen-Dice overlap `2|A∩B| / (|A|+|B|)`; 1 when both are empty.
pub fn dice(a: &Mask, b: &Mask) -> Result<f64> {
    same_dims(a.dims(), b.dims())?;
    let mut inter = 0usize;
    let mut total = 0usize;
    for (&x, &y) in a.bits.iter().zip(&b.bits) {
        inter += (x && y) as usize;
        total += x as usize + y as usize;
    }
    if total == 0 {
        return Ok(1.0);
    }
    Ok(2.0 * inter as f64 / total as f64)
}

/// Mean squared difference over all sites.
pub fn field_mse(a: &ChemField, b: &ChemField) -> Result<f64> {
    same_dims(a.dims(), b.dims())?;
    let n = a.values().len();
    let sum: f64 = a
        .values()
        .iter()
        .zip(b.values())
        .map(|(x, y)| (x - y) * (x - y))
        .sum();
    Ok(sum / n as f64)
}

/// Number of vessel sites.
pub fn vessel_area(mask: &Mask) -> usize {
    mask.count()
}

/// A two-channel state for scoring. Channel 0 may be soft (for example a
/// network output); it is thresholded before mask-based metrics.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoChannel {
    pub width: usize,
    pub height: usize,
    pub mcs: u64,
    pub channel0: Vec<f64>,
    pub channel1: Vec<f64>,
}

impl From<&Snapshot> for TwoChannel {
    fn from(s: &Snapshot) -> Self {
        TwoChannel {
            width: s.width,
            height: s.height,
            mcs: s.mcs,
            channel0: s.cell_ids.iter().map(|&id| (id != 0) as u8 as f64).collect(),
            channel1: s.field.clone(),
        }
    }
}

impl TwoChannel {
    fn mask(&self, threshold: f64) -> Result<Mask> {
        Mask::threshold(self.width, self.height, &self.channel0, threshold)
    }

    fn field(&self) -> Result<ChemField> {
        ChemField::from_values(self.width, self.height, self.channel1.clone())
    }
}

/// Metrics of one configuration against the ground truth at the same step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRow {
    pub step: u64,
    pub dice: f64,
    pub field_mse: f64,
    /// `None` when exactly one of the two lacunae distributions is empty.
    pub emd: Option<f64>,
    pub vessel_area: usize,
    pub field_total: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct EvalOptions {
    /// Channel-0 binarization threshold.
    pub threshold: f64,
    pub lacunae: LacunaeOptions,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions {
            threshold: 0.5,
            lacunae: LacunaeOptions::default(),
        }
    }
}

fn as_f64(areas: &[usize]) -> Vec<f64> {
    areas.iter().map(|&a| a as f64).collect()
}

fn score(
    candidate: &TwoChannel,
    truth_mask: &Mask,
    truth_field: &ChemField,
    truth_areas: &[f64],
    step: u64,
    opts: &EvalOptions,
) -> Result<MetricsRow> {
    let mask = candidate.mask(opts.threshold)?;
    let field = candidate.field()?;
    let areas = as_f64(&lacunae_areas_with(&mask, &opts.lacunae));
    let emd = match emd_1d(&areas, truth_areas) {
        Ok(d) => Some(d),
        Err(Error::EmptyDistribution) => {
            log::warn!("step {step}: one lacunae distribution is empty; EMD undefined");
            None
        }
        Err(e) => return Err(e),
    };
    Ok(MetricsRow {
        step,
        dice: dice(&mask, truth_mask)?,
        field_mse: field_mse(&field, truth_field)?,
        emd,
        vessel_area: vessel_area(&mask),
        field_total: field.total(),
    })
}

/// Scores `predicted` and `reference` against `truth`. Returns
/// `(prediction row, reference row)`; both carry `truth.mcs` as the step.
pub fn evaluate_pair(
    predicted: &TwoChannel,
    truth: &TwoChannel,
    reference: &TwoChannel,
    opts: &EvalOptions,
) -> Result<(MetricsRow, MetricsRow)> {
    let dims = (truth.width, truth.height);
    same_dims((predicted.width, predicted.height), dims)?;
    same_dims((reference.width, reference.height), dims)?;
    let truth_mask = truth.mask(opts.threshold)?;
    let truth_field = truth.field()?;
    let truth_areas = as_f64(&lacunae_areas_with(&truth_mask, &opts.lacunae));
    let step = truth.mcs;
    Ok((
        score(predicted, &truth_mask, &truth_field, &truth_areas, step, opts)?,
        score(reference, &truth_mask, &truth_field, &truth_areas, step, opts)?,
    ))
}

/// One line of `metrics.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsCsvRow {
    pub step: u64,
    pub dice_pred: f64,
    pub dice_ref: f64,
    pub mse_pred: f64,
    pub mse_ref: f64,
    pub emd_pred: f64,
    pub emd_ref: f64,
    pub vessel_area_pred: usize,
    pub vessel_area_truth: usize,
    pub field_total_pred: f64,
    pub field_total_truth: f64,
}

impl MetricsCsvRow {
    /// Undefined EMD values are written as NaN.
    pub fn new(pred: &MetricsRow, reference: &MetricsRow, truth: &TwoChannel, threshold: f64) -> Result<Self> {
        let truth_mask = truth.mask(threshold)?;
        Ok(MetricsCsvRow {
            step: pred.step,
            dice_pred: pred.dice,
            dice_ref: reference.dice,
            mse_pred: pred.field_mse,
            mse_ref: reference.field_mse,
            emd_pred: pred.emd.unwrap_or(f64::NAN),
            emd_ref: reference.emd.unwrap_or(f64::NAN),
            vessel_area_pred: pred.vessel_area,
            vessel_area_truth: vessel_area(&truth_mask),
            field_total_pred: pred.field_total,
            field_total_truth: truth.channel1.iter().sum(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn mask_from(w: usize, h: usize, on: &[usize]) -> Mask {
        let mut bits = vec![false; w * h];
        for &i in on {
            bits[i] = true;
        }
        Mask::new(w, h, bits).unwrap()
    }

    #[test]
    fn dice_examples() {
        let a = mask_from(8, 8, &[0, 1, 2, 3]);
        let b = mask_from(8, 8, &[2, 3, 4, 5]);
        let c = mask_from(8, 8, &[10, 11]);
        assert_eq!(dice(&a, &a).unwrap(), 1.0);
        assert_eq!(dice(&a, &c).unwrap(), 0.0);
        assert_eq!(dice(&a, &b).unwrap(), 0.5);
        let empty = Mask::filled(8, 8, false);
        assert_eq!(dice(&empty, &empty).unwrap(), 1.0);
        assert!(dice(&a, &Mask::filled(8, 9, false)).is_err());
    }

    #[test]
    fn mse_examples() {
        let a = ChemField::uniform(8, 8, 1.25);
        assert_eq!(field_mse(&a, &a).unwrap(), 0.0);
        let b = ChemField::uniform(8, 8, 1.75);
        assert_eq!(field_mse(&a, &b).unwrap(), 0.25);
        assert!(field_mse(&a, &ChemField::zeros(9, 8)).is_err());
    }

    #[test]
    fn vessel_area_examples() {
        assert_eq!(vessel_area(&Mask::filled(256, 256, false)), 0);
        assert_eq!(vessel_area(&Mask::filled(256, 256, true)), 65_536);
    }

    fn two_channel(mask: &Mask, field: f64, mcs: u64) -> TwoChannel {
        TwoChannel {
            width: mask.width(),
            height: mask.height(),
            mcs,
            channel0: mask.bits().iter().map(|&b| b as u8 as f64).collect(),
            channel1: vec![field; mask.bits().len()],
        }
    }

    #[test]
    fn evaluate_identity_rows() {
        let mut m = Mask::filled(16, 16, true);
        for y in 4..9 {
            for x in 4..9 {
                m.set(x, y, false);
            }
        }
        let truth = two_channel(&m, 0.3, 300);
        let reference = two_channel(&m.shifted(1, 0), 0.2, 200);
        let (pred_row, ref_row) = evaluate_pair(&truth, &truth, &reference, &EvalOptions::default()).unwrap();
        assert_eq!(pred_row.step, 300);
        assert_eq!(pred_row.dice, 1.0);
        assert_eq!(pred_row.field_mse, 0.0);
        assert_eq!(pred_row.emd, Some(0.0));
        assert!(ref_row.dice < 1.0);
        assert!((ref_row.field_mse - 0.01).abs() < 1e-12);

        let (_, ref_row) = evaluate_pair(&reference, &truth, &truth, &EvalOptions::default()).unwrap();
        assert_eq!((ref_row.dice, ref_row.field_mse, ref_row.emd), (1.0, 0.0, Some(0.0)));
    }

    #[test]
    fn soft_prediction_is_thresholded() {
        let m = Mask::filled(8, 8, false);
        let truth = two_channel(&m, 0.0, 1);
        let mut soft = truth.clone();
        soft.channel0 = vec![0.49; 64];
        let (row, _) = evaluate_pair(&soft, &truth, &truth, &EvalOptions::default()).unwrap();
        assert_eq!(row.dice, 1.0);
        soft.channel0 = vec![0.51; 64];
        let (row, _) = evaluate_pair(&soft, &truth, &truth, &EvalOptions::default()).unwrap();
        assert_eq!(row.dice, 0.0);
        // all vessel: no lacunae vs one lacuna
        assert_eq!(row.emd, None);
    }

    proptest! {
        #[test]
        fn dice_is_symmetric(a in proptest::collection::vec(any::<bool>(), 64), b in proptest::collection::vec(any::<bool>(), 64)) {
            let a = Mask::new(8, 8, a).unwrap();
            let b = Mask::new(8, 8, b).unwrap();
            let ab = dice(&a, &b).unwrap();
            prop_assert_eq!(ab, dice(&b, &a).unwrap());
            prop_assert!((0.0..=1.0).contains(&ab));
            prop_assert_eq!(dice(&a, &a).unwrap(), 1.0);
        }
    }
}
