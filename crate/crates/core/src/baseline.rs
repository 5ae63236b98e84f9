//! Baseline estimation and intensity normalization `(I − I₀) / I₀`.

use crate::error::{Error, Result};
use crate::sensor::{IntensityFrame, CHANNELS};

pub const DEFAULT_WINDOW: usize = 50;

/// Un-normalized photodiode readings (volts or ADC counts).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RawFrame {
    pub readings: [f64; CHANNELS],
    /// Monotonic milliseconds.
    pub timestamp_ms: u64,
}

impl RawFrame {
    pub fn new(readings: [f64; CHANNELS], timestamp_ms: u64) -> Result<Self> {
        if let Some(i) = readings.iter().position(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::InvalidReading { channel: i + 1 });
        }
        Ok(Self {
            readings,
            timestamp_ms,
        })
    }
}

/// Per-channel rest intensity `I₀`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Baseline {
    i0: [f64; CHANNELS],
    window: usize,
}

impl Baseline {
    pub fn new(i0: [f64; CHANNELS], window: usize) -> Result<Self> {
        if let Some(i) = i0.iter().position(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::DeadChannel {
                channel: i + 1,
                mean: i0[i],
            });
        }
        Ok(Self { i0, window })
    }

    pub fn i0(&self) -> &[f64; CHANNELS] {
        &self.i0
    }

    pub fn window(&self) -> usize {
        self.window
    }
}

/// Mean of the first `window` rest frames on every channel.
pub fn estimate_baseline(rest_frames: &[RawFrame], window: usize) -> Result<Baseline> {
    if window == 0 {
        return Err(Error::InvalidWindow);
    }
    if rest_frames.len() < window {
        return Err(Error::NotEnoughFrames {
            needed: window,
            found: rest_frames.len(),
        });
    }
    let mut sums = [0.0; CHANNELS];
    for f in &rest_frames[..window] {
        for (s, v) in sums.iter_mut().zip(f.readings) {
            *s += v;
        }
    }
    Baseline::new(sums.map(|s| s / window as f64), window)
}

pub fn normalize(raw: &RawFrame, baseline: &Baseline) -> IntensityFrame {
    let mut pd = [0.0; CHANNELS];
    for ((out, r), i0) in pd.iter_mut().zip(raw.readings).zip(baseline.i0) {
        *out = (r - i0) / i0;
    }
    IntensityFrame { pd }
}

/// Inverse of [`normalize`]: `I = I₀ · (1 + ΔI/I₀)`.
pub fn denormalize(frame: &IntensityFrame, baseline: &Baseline, timestamp_ms: u64) -> RawFrame {
    let mut readings = [0.0; CHANNELS];
    for ((out, v), i0) in readings.iter_mut().zip(frame.pd).zip(baseline.i0) {
        *out = i0 * (1.0 + v);
    }
    RawFrame {
        readings,
        timestamp_ms,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec::Vec;

    fn frames(values: impl Fn(usize) -> [f64; CHANNELS], n: usize) -> Vec<RawFrame> {
        (0..n)
            .map(|i| RawFrame::new(values(i), i as u64).unwrap())
            .collect()
    }

    #[test]
    fn constant_frames() {
        let b = estimate_baseline(&frames(|_| [2.5; CHANNELS], 50), DEFAULT_WINDOW).unwrap();
        assert_eq!(b.i0(), &[2.5; CHANNELS]);
    }

    #[test]
    fn dead_channel_is_named() {
        let mut v = [1.0; CHANNELS];
        v[3] = 0.0;
        let err = estimate_baseline(&frames(|_| v, 50), 50).unwrap_err();
        assert_eq!(
            err,
            Error::DeadChannel {
                channel: 4,
                mean: 0.0
            }
        );
    }

    #[test]
    fn symmetric_pairs_average_out() {
        let eps = 0.125;
        let b = estimate_baseline(
            &frames(
                |i| [if i % 2 == 0 { 3.0 - eps } else { 3.0 + eps }; CHANNELS],
                50,
            ),
            50,
        )
        .unwrap();
        assert_eq!(b.i0(), &[3.0; CHANNELS]);
    }

    #[test]
    fn only_the_window_is_used() {
        let fs = frames(|i| [if i < 10 { 1.0 } else { 100.0 }; CHANNELS], 20);
        assert_eq!(estimate_baseline(&fs, 10).unwrap().i0(), &[1.0; CHANNELS]);
        assert_eq!(
            estimate_baseline(&fs, 21),
            Err(Error::NotEnoughFrames {
                needed: 21,
                found: 20
            })
        );
        assert_eq!(estimate_baseline(&fs, 0), Err(Error::InvalidWindow));
    }

    #[test]
    fn normalize_cases() {
        let b = Baseline::new([2.0, 1.0, 4.0, 1.0, 1.0, 1.0, 1.0], 1).unwrap();
        let rest = RawFrame::new(*b.i0(), 0).unwrap();
        assert_eq!(normalize(&rest, &b), IntensityFrame::ZERO);
        let mut r = *b.i0();
        r[2] = 0.9 * 4.0;
        let f = normalize(&RawFrame::new(r, 0).unwrap(), &b);
        assert!((f.pd[2] + 0.1).abs() < 1e-15);
    }

    #[test]
    fn rejects_negative_readings() {
        let mut r = [1.0; CHANNELS];
        r[6] = -1.0;
        assert_eq!(
            RawFrame::new(r, 0),
            Err(Error::InvalidReading { channel: 7 })
        );
    }
}
