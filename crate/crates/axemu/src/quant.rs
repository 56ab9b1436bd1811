//! Symmetric affine quantization and histogram-percentile calibration.
//!
//! Real values map to integers through `real = scale * q` (the zero point is
//! fixed at 0). The representable range for bitwidth `b` is
//! `[-(2^(b-1)-1), 2^(b-1)-1]`; the clamp deliberately excludes `-2^(b-1)` so
//! the grid stays symmetric. Rounding is round-half-away-from-zero
//! everywhere.
//!
//! Activation ranges are learned per tensor with a dynamic-range histogram
//! calibrator (percentile clipping, 99.9% by default); weight ranges are per
//! output channel via max-abs, which is lossless for static tensors.

use crate::error::{Error, Result};
use crate::tensor::Tensor;

pub const MIN_BITS: u8 = 2;
pub const MAX_BITS: u8 = 16;

/// Default histogram bin count for activation calibration.
pub const DEFAULT_BINS: usize = 2048;
/// Default clipping percentile.
pub const DEFAULT_PERCENTILE: f64 = 99.9;
/// Default number of samples fed through the model during calibration.
pub const DEFAULT_CALIB_SAMPLES: usize = 256;

/// Largest representable magnitude for a signed bitwidth: 2^(b-1) - 1.
pub fn qmax(bits: u8) -> i32 {
    (1i32 << (bits - 1)) - 1
}

fn check_bits(bits: u8) -> Result<()> {
    if !(MIN_BITS..=MAX_BITS).contains(&bits) {
        return Err(Error::InvalidArgument(format!(
            "bitwidth {bits} outside supported range {MIN_BITS}..={MAX_BITS}"
        )));
    }
    Ok(())
}

/// Per-tensor or per-channel scale factors.
#[derive(Clone, Debug, PartialEq)]
pub enum Scale {
    PerTensor(f32),
    PerChannel(Vec<f32>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct QuantParams {
    pub bits: u8,
    pub scale: Scale,
}

impl QuantParams {
    pub fn per_tensor(bits: u8, scale: f32) -> Result<Self> {
        check_bits(bits)?;
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::InvalidArgument(format!("scale must be positive, got {scale}")));
        }
        Ok(QuantParams { bits, scale: Scale::PerTensor(scale) })
    }

    pub fn per_channel(bits: u8, scales: Vec<f32>) -> Result<Self> {
        check_bits(bits)?;
        if scales.is_empty() || scales.iter().any(|s| !(*s > 0.0 && s.is_finite())) {
            return Err(Error::InvalidArgument(
                "per-channel scales must be nonempty and positive".into(),
            ));
        }
        Ok(QuantParams { bits, scale: Scale::PerChannel(scales) })
    }

    pub fn qmax(&self) -> i32 {
        qmax(self.bits)
    }

    /// The scalar scale; errors if the params are per-channel.
    pub fn scalar_scale(&self) -> Result<f32> {
        match &self.scale {
            Scale::PerTensor(s) => Ok(*s),
            Scale::PerChannel(_) => {
                Err(Error::InvalidArgument("expected per-tensor scale".into()))
            }
        }
    }

    /// Largest real value representable without clipping, per channel slot.
    pub fn calib_max(&self, channel: usize) -> f32 {
        let q = self.qmax() as f32;
        match &self.scale {
            Scale::PerTensor(s) => s * q,
            Scale::PerChannel(v) => v[channel] * q,
        }
    }

    pub fn channel_count(&self) -> Option<usize> {
        match &self.scale {
            Scale::PerTensor(_) => None,
            Scale::PerChannel(v) => Some(v.len()),
        }
    }
}

/// scale = calib_max / (2^(b-1) - 1).
pub fn compute_scale(calib_max: f32, bits: u8) -> Result<f32> {
    check_bits(bits)?;
    if !(calib_max > 0.0 && calib_max.is_finite()) {
        return Err(Error::Calibration(format!(
            "calib_max must be positive (got {calib_max}); fall back to max-abs of the tensor \
             or a configured epsilon"
        )));
    }
    Ok(calib_max / qmax(bits) as f32)
}

/// Per-channel max-abs scales along `axis`. Channels that are entirely zero
/// get scale 1.0 (every element quantizes to 0 regardless).
pub fn per_channel_scales_max_abs(x: &Tensor<f32>, axis: usize, bits: u8) -> Result<Vec<f32>> {
    check_bits(bits)?;
    if axis >= x.rank() {
        return Err(Error::Shape(format!("axis {axis} out of range for rank {}", x.rank())));
    }
    let channels = x.shape()[axis];
    let inner: usize = x.shape()[axis + 1..].iter().product();
    let mut max_abs = vec![0.0f32; channels];
    for (i, v) in x.data().iter().enumerate() {
        let ch = (i / inner) % channels;
        max_abs[ch] = max_abs[ch].max(v.abs());
    }
    let q = qmax(bits) as f32;
    Ok(max_abs.iter().map(|m| if *m > 0.0 { m / q } else { 1.0 }).collect())
}

fn channel_of(index: usize, shape: &[usize], axis: usize) -> usize {
    let inner: usize = shape[axis + 1..].iter().product();
    (index / inner) % shape[axis]
}

fn check_channel_axis(
    x_shape: &[usize],
    qp: &QuantParams,
    channel_axis: Option<usize>,
) -> Result<()> {
    match (&qp.scale, channel_axis) {
        (Scale::PerTensor(_), _) => Ok(()),
        (Scale::PerChannel(v), Some(axis)) => {
            if axis >= x_shape.len() {
                return Err(Error::Shape(format!(
                    "channel axis {axis} out of range for shape {x_shape:?}"
                )));
            }
            if v.len() != x_shape[axis] {
                return Err(Error::Shape(format!(
                    "per-channel scale count {} != extent {} of axis {axis}",
                    v.len(),
                    x_shape[axis]
                )));
            }
            Ok(())
        }
        (Scale::PerChannel(_), None) => Err(Error::InvalidArgument(
            "per-channel quantization requires a channel axis".into(),
        )),
    }
}

/// q = clamp(round(x / scale), -(2^(b-1)-1), 2^(b-1)-1), rounding half away
/// from zero. Values are held in 16-bit lanes for every supported bitwidth.
pub fn quantize(
    x: &Tensor<f32>,
    qp: &QuantParams,
    channel_axis: Option<usize>,
) -> Result<Tensor<i16>> {
    check_channel_axis(x.shape(), qp, channel_axis)?;
    let qm = qp.qmax() as f32;
    let data = match (&qp.scale, channel_axis) {
        (Scale::PerTensor(s), _) => {
            x.data().iter().map(|v| (v / s).round().clamp(-qm, qm) as i16).collect()
        }
        (Scale::PerChannel(scales), Some(axis)) => x
            .data()
            .iter()
            .enumerate()
            .map(|(i, v)| {
                let s = scales[channel_of(i, x.shape(), axis)];
                (v / s).round().clamp(-qm, qm) as i16
            })
            .collect(),
        _ => unreachable!(),
    };
    Tensor::from_vec(x.shape(), data)
}

/// r = scale * q.
pub fn dequantize(
    q: &Tensor<i16>,
    qp: &QuantParams,
    channel_axis: Option<usize>,
) -> Result<Tensor<f32>> {
    check_channel_axis(q.shape(), qp, channel_axis)?;
    let data = match (&qp.scale, channel_axis) {
        (Scale::PerTensor(s), _) => q.data().iter().map(|v| *v as f32 * s).collect(),
        (Scale::PerChannel(scales), Some(axis)) => q
            .data()
            .iter()
            .enumerate()
            .map(|(i, v)| *v as f32 * scales[channel_of(i, q.shape(), axis)])
            .collect(),
        _ => unreachable!(),
    };
    Tensor::from_vec(q.shape(), data)
}

/// dequantize(quantize(x)): the rounding/clipping surrogate used in training.
pub fn fake_quantize(
    x: &Tensor<f32>,
    qp: &QuantParams,
    channel_axis: Option<usize>,
) -> Result<Tensor<f32>> {
    dequantize(&quantize(x, qp, channel_axis)?, qp, channel_axis)
}

/// Straight-through-estimator mask: 1.0 where |x| <= calib_max (the gradient
/// passes through unchanged), 0.0 in the clipped region.
pub fn ste_mask(
    x: &Tensor<f32>,
    qp: &QuantParams,
    channel_axis: Option<usize>,
) -> Result<Tensor<f32>> {
    check_channel_axis(x.shape(), qp, channel_axis)?;
    let qm = qp.qmax() as f32;
    let data = match (&qp.scale, channel_axis) {
        (Scale::PerTensor(s), _) => {
            let cm = s * qm;
            x.data().iter().map(|v| if v.abs() <= cm { 1.0 } else { 0.0 }).collect()
        }
        (Scale::PerChannel(scales), Some(axis)) => x
            .data()
            .iter()
            .enumerate()
            .map(|(i, v)| {
                let cm = scales[channel_of(i, x.shape(), axis)] * qm;
                if v.abs() <= cm {
                    1.0
                } else {
                    0.0
                }
            })
            .collect(),
        _ => unreachable!(),
    };
    Tensor::from_vec(x.shape(), data)
}

/// Dynamic-range histogram over absolute values.
///
/// Bin widths start from the first observed batch and double (folding counts)
/// whenever a new maximum falls outside the covered range. `calib_max` is the
/// smallest bin upper edge whose cumulative mass reaches the percentile,
/// capped at the largest absolute value actually observed.
#[derive(Clone, Debug)]
pub struct HistogramCalibrator {
    bins: usize,
    bin_width: f32,
    counts: Vec<u64>,
    total: u64,
    max_abs: f32,
    percentile: f64,
}

impl HistogramCalibrator {
    pub fn new(bins: usize, percentile: f64) -> Result<Self> {
        if bins == 0 {
            return Err(Error::InvalidArgument("histogram needs at least one bin".into()));
        }
        if !(percentile > 0.0 && percentile <= 100.0) {
            return Err(Error::InvalidArgument(format!(
                "percentile must lie in (0, 100], got {percentile}"
            )));
        }
        Ok(HistogramCalibrator {
            bins,
            bin_width: 0.0,
            counts: vec![0; bins],
            total: 0,
            max_abs: 0.0,
            percentile,
        })
    }

    pub fn with_defaults() -> Self {
        Self::new(DEFAULT_BINS, DEFAULT_PERCENTILE).unwrap()
    }

    pub fn bins(&self) -> usize {
        self.bins
    }

    pub fn bin_width(&self) -> f32 {
        self.bin_width
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn max_abs(&self) -> f32 {
        self.max_abs
    }

    pub fn percentile(&self) -> f64 {
        self.percentile
    }

    fn capacity(&self) -> f32 {
        self.bin_width * self.bins as f32
    }

    fn fold_double(&mut self) {
        let mut folded = vec![0u64; self.bins];
        for (i, c) in self.counts.iter().enumerate() {
            folded[i / 2] += c;
        }
        self.counts = folded;
        self.bin_width *= 2.0;
    }

    /// Merge a batch of values. NaN or infinite elements are rejected with an
    /// error naming `label` (the tensor being observed).
    pub fn observe(&mut self, label: &str, values: &[f32]) -> Result<()> {
        let mut batch_max = 0.0f32;
        for v in values {
            if !v.is_finite() {
                return Err(Error::Calibration(format!(
                    "non-finite element ({v}) observed in tensor '{label}'"
                )));
            }
            batch_max = batch_max.max(v.abs());
        }
        if batch_max > 0.0 {
            if self.bin_width == 0.0 {
                self.bin_width = batch_max / self.bins as f32;
            }
            while batch_max > self.capacity() {
                self.fold_double();
            }
        }
        for v in values {
            let idx = if self.bin_width > 0.0 {
                ((v.abs() / self.bin_width) as usize).min(self.bins - 1)
            } else {
                0
            };
            self.counts[idx] += 1;
        }
        self.total += values.len() as u64;
        self.max_abs = self.max_abs.max(batch_max);
        Ok(())
    }

    /// Smallest bin upper edge whose cumulative mass reaches the percentile,
    /// capped at the maximum absolute observed value.
    pub fn compute_calib_max(&self) -> Result<f32> {
        if self.total == 0 {
            return Err(Error::Calibration("calibrator has observed no elements".into()));
        }
        if self.bin_width == 0.0 {
            // Only zeros observed.
            return Ok(0.0);
        }
        let threshold = self.total as f64 * self.percentile / 100.0;
        let mut cum = 0u64;
        for (i, c) in self.counts.iter().enumerate() {
            cum += c;
            if cum as f64 >= threshold {
                let edge = (i + 1) as f32 * self.bin_width;
                return Ok(edge.min(self.max_abs));
            }
        }
        Ok(self.max_abs)
    }

    /// Merge another calibrator collected with identical bin geometry.
    /// Merging is associative, so observation can be parallelized and merged
    /// in a deterministic order.
    pub fn merge(&mut self, other: &Self) -> Result<()> {
        if self.bins != other.bins {
            return Err(Error::InvalidArgument(format!(
                "cannot merge calibrators with {} and {} bins",
                self.bins, other.bins
            )));
        }
        if other.total == 0 {
            return Ok(());
        }
        if self.total == 0 {
            self.bin_width = other.bin_width;
            self.counts = other.counts.clone();
            self.total = other.total;
            self.max_abs = other.max_abs;
            return Ok(());
        }
        if self.bin_width != other.bin_width {
            return Err(Error::InvalidArgument(format!(
                "cannot merge calibrators with bin widths {} and {}",
                self.bin_width, other.bin_width
            )));
        }
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
        self.total += other.total;
        self.max_abs = self.max_abs.max(other.max_abs);
        Ok(())
    }

    /// Text export for inspection: header plus one `bin upper_edge count`
    /// line per nonempty bin.
    pub fn export_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "bins {} bin_width {} total {} max_abs {} percentile {}\n",
            self.bins, self.bin_width, self.total, self.max_abs, self.percentile
        ));
        for (i, c) in self.counts.iter().enumerate() {
            if *c > 0 {
                out.push_str(&format!("{} {} {}\n", i, (i + 1) as f32 * self.bin_width, c));
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn observe_zeros_lands_in_bin_zero() {
        let mut cal = HistogramCalibrator::with_defaults();
        cal.observe("z", &vec![0.0; 100]).unwrap();
        assert_eq!(cal.counts()[0], 100);
        assert_eq!(cal.total(), 100);
        assert_eq!(cal.compute_calib_max().unwrap(), 0.0);
    }

    #[test]
    fn observe_is_symmetric_in_sign() {
        let mut a = HistogramCalibrator::with_defaults();
        a.observe("a", &[-3.0]).unwrap();
        a.observe("a", &[3.0]).unwrap();
        let mut b = HistogramCalibrator::with_defaults();
        b.observe("b", &[3.0, 3.0]).unwrap();
        assert_eq!(a.counts(), b.counts());
        assert_eq!(a.bin_width(), b.bin_width());
    }

    #[test]
    fn observe_counts_sum() {
        let mut cal = HistogramCalibrator::with_defaults();
        let values: Vec<f32> = (1..=1000).map(|k| 0.001 * k as f32).collect();
        cal.observe("v", &values).unwrap();
        assert_eq!(cal.counts().iter().sum::<u64>(), 1000);
    }

    #[test]
    fn observe_rejects_nan_with_label() {
        let mut cal = HistogramCalibrator::with_defaults();
        let err = cal.observe("conv1.input", &[1.0, f32::NAN]).unwrap_err();
        assert!(err.to_string().contains("conv1.input"));
    }

    #[test]
    fn calib_max_percentile_matches_sort_oracle() {
        // Independent oracle: sort absolute values, index the percentile.
        let values: Vec<f32> = (1..=1000).map(|k| 0.001 * k as f32).collect();
        let mut sorted: Vec<f32> = values.iter().map(|v| v.abs()).collect();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let rank = ((99.9 / 100.0) * sorted.len() as f64 - 1e-9).ceil() as usize;
        let oracle = sorted[rank - 1]; // 0.999

        let mut cal = HistogramCalibrator::with_defaults();
        cal.observe("v", &values).unwrap();
        let got = cal.compute_calib_max().unwrap();
        assert!((got - oracle).abs() <= cal.bin_width() + 1e-7, "got {got}, oracle {oracle}");
    }

    #[test]
    fn calib_max_percentile_100_is_exact_max() {
        let mut cal = HistogramCalibrator::new(2048, 100.0).unwrap();
        cal.observe("v", &[0.25, -1.75, 0.5]).unwrap();
        assert_eq!(cal.compute_calib_max().unwrap(), 1.75);
    }

    #[test]
    fn calib_max_single_value() {
        let mut cal = HistogramCalibrator::with_defaults();
        cal.observe("v", &[5.0]).unwrap();
        let cm = cal.compute_calib_max().unwrap();
        assert!(cm > 0.0 && cm <= 5.0 + cal.bin_width());
    }

    #[test]
    fn range_growth_preserves_mass() {
        let mut cal = HistogramCalibrator::new(16, 99.9).unwrap();
        cal.observe("v", &[1.0; 50]).unwrap();
        cal.observe("v", &[1000.0]).unwrap(); // forces several doublings
        assert_eq!(cal.counts().iter().sum::<u64>(), 51);
        assert!(cal.capacity() >= 1000.0);
    }

    #[test]
    fn merge_is_associative_and_matches_single_stream() {
        // Same geometry: seed each with the same first batch so widths agree.
        let seed: Vec<f32> = vec![2.0];
        let s1: Vec<f32> = (1..50).map(|k| k as f32 * 0.01).collect();
        let s2: Vec<f32> = (1..80).map(|k| k as f32 * 0.02).collect();

        let mut whole = HistogramCalibrator::new(256, 99.9).unwrap();
        whole.observe("w", &seed).unwrap();
        whole.observe("w", &s1).unwrap();
        whole.observe("w", &s2).unwrap();

        let mut a = HistogramCalibrator::new(256, 99.9).unwrap();
        a.observe("a", &seed).unwrap();
        a.observe("a", &s1).unwrap();
        let mut b = HistogramCalibrator::new(256, 99.9).unwrap();
        b.observe("b", &seed).unwrap();
        b.observe("b", &s2).unwrap();
        let mut merged = a.clone();
        merged.merge(&b).unwrap();

        // One seed batch was observed twice across the two halves.
        assert_eq!(merged.total(), whole.total() + 1);
        assert_eq!(merged.bin_width(), whole.bin_width());
    }

    #[test]
    fn merge_rejects_mismatched_geometry() {
        let mut a = HistogramCalibrator::new(128, 99.9).unwrap();
        a.observe("a", &[1.0]).unwrap();
        let mut b = HistogramCalibrator::new(256, 99.9).unwrap();
        b.observe("b", &[1.0]).unwrap();
        assert!(a.merge(&b).is_err());
    }

    #[test]
    fn empty_calibrator_errors() {
        let cal = HistogramCalibrator::with_defaults();
        assert!(cal.compute_calib_max().is_err());
    }

    #[test]
    fn compute_scale_examples() {
        assert!((compute_scale(1.27, 8).unwrap() - 0.01).abs() < 1e-7);
        assert_eq!(compute_scale(127.0, 8).unwrap(), 1.0);
        assert_eq!(compute_scale(2047.0, 12).unwrap(), 1.0);
        assert!(compute_scale(0.0, 8).is_err());
        assert!(compute_scale(-1.0, 8).is_err());
    }

    fn qp8(scale: f32) -> QuantParams {
        QuantParams::per_tensor(8, scale).unwrap()
    }

    #[test]
    fn quantize_examples() {
        let qp = qp8(0.01);
        let x = Tensor::from_vec(&[4], vec![0.0, 0.503, 2.0, -2.0]).unwrap();
        let q = quantize(&x, &qp, None).unwrap();
        assert_eq!(q.data(), &[0, 50, 127, -127]);
    }

    #[test]
    fn quantize_rounds_half_away_from_zero() {
        let qp = qp8(1.0);
        let x = Tensor::from_vec(&[4], vec![0.5, -0.5, 1.5, -2.5]).unwrap();
        let q = quantize(&x, &qp, None).unwrap();
        assert_eq!(q.data(), &[1, -1, 2, -3]);
    }

    #[test]
    fn dequantize_examples() {
        let qp = qp8(0.01);
        let q = Tensor::from_vec(&[2], vec![50i16, 0]).unwrap();
        let r = dequantize(&q, &qp, None).unwrap();
        assert_eq!(r.data(), &[0.5, 0.0]);
    }

    #[test]
    fn round_trip_error_bounded_by_half_scale() {
        let qp = qp8(0.01);
        for k in -1200..=1200 {
            let v = k as f32 * 0.001; // in range: |v| <= 1.2 < 1.27
            let x = Tensor::from_vec(&[1], vec![v]).unwrap();
            let r = dequantize(&quantize(&x, &qp, None).unwrap(), &qp, None).unwrap();
            assert!((r.data()[0] - v).abs() <= 0.01 / 2.0 + 1e-6);
        }
    }

    #[test]
    fn fake_quantize_fixed_point_on_grid() {
        let qp = qp8(0.25);
        let x = Tensor::from_vec(&[3], vec![0.5, -31.75, 2.0]).unwrap(); // k*scale
        let y = fake_quantize(&x, &qp, None).unwrap();
        assert_eq!(y.data(), x.data());
    }

    #[test]
    fn ste_mask_examples() {
        let qp = qp8(0.01); // calib_max = 1.27
        let x = Tensor::from_vec(&[3], vec![0.5, 1.27, 2.54]).unwrap();
        let m = ste_mask(&x, &qp, None).unwrap();
        assert_eq!(m.data(), &[1.0, 1.0, 0.0]);
    }

    #[test]
    fn per_channel_round_trip_error_bound() {
        // 3 channels with very different ranges.
        let x = Tensor::from_vec(
            &[3, 4],
            vec![0.1, -0.09, 0.05, 0.02, 10.0, -7.5, 3.3, 9.9, 100.0, 55.0, -99.0, 12.0],
        )
        .unwrap();
        let scales = per_channel_scales_max_abs(&x, 0, 8).unwrap();
        let qp = QuantParams::per_channel(8, scales.clone()).unwrap();
        let r = dequantize(&quantize(&x, &qp, Some(0)).unwrap(), &qp, Some(0)).unwrap();
        for c in 0..3 {
            for j in 0..4 {
                let err = (r.data()[c * 4 + j] - x.data()[c * 4 + j]).abs();
                assert!(err <= scales[c] / 2.0 + 1e-6);
            }
        }
    }

    #[test]
    fn per_channel_requires_axis() {
        let qp = QuantParams::per_channel(8, vec![1.0, 1.0]).unwrap();
        let x = Tensor::<f32>::zeros(&[2, 2]);
        assert!(quantize(&x, &qp, None).is_err());
        assert!(quantize(&x, &qp, Some(0)).is_ok());
    }

    proptest! {
        #[test]
        fn quantize_is_monotonic(mut a in -10.0f32..10.0, mut b in -10.0f32..10.0,
                                 scale in 0.001f32..1.0, bits in 2u8..=12) {
            if a > b {
                std::mem::swap(&mut a, &mut b);
            }
            let qp = QuantParams::per_tensor(bits, scale).unwrap();
            let x = Tensor::from_vec(&[2], vec![a, b]).unwrap();
            let q = quantize(&x, &qp, None).unwrap();
            prop_assert!(q.data()[0] <= q.data()[1]);
        }

        #[test]
        fn fake_quantize_is_idempotent(v in -100.0f32..100.0,
                                       scale in 0.001f32..2.0, bits in 2u8..=16) {
            let qp = QuantParams::per_tensor(bits, scale).unwrap();
            let x = Tensor::from_vec(&[1], vec![v]).unwrap();
            let once = fake_quantize(&x, &qp, None).unwrap();
            let twice = fake_quantize(&once, &qp, None).unwrap();
            prop_assert_eq!(once.data()[0].to_bits(), twice.data()[0].to_bits());
        }

        #[test]
        fn quantized_values_stay_in_symmetric_range(v in -1000.0f32..1000.0,
                                                    scale in 0.001f32..1.0, bits in 2u8..=16) {
            let qp = QuantParams::per_tensor(bits, scale).unwrap();
            let x = Tensor::from_vec(&[1], vec![v]).unwrap();
            let q = quantize(&x, &qp, None).unwrap();
            let qm = qmax(bits) as i16;
            prop_assert!(q.data()[0] >= -qm && q.data()[0] <= qm);
        }
    }
}
