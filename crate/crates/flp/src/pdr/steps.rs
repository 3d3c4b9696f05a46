//! Step detection from the accelerometer norm, and the step-length model.
//!
//! The norm is orientation-invariant, so the detector works wherever the
//! device is carried. After band-passing to the walking band the signal is
//! nearly a sinewave at the step frequency; steps are its local maxima.

use super::filters::WalkBandPass;
use super::{DpcFlag, DpcPhase, ImuSample, PdrError};

/// Minimum spacing between accepted peaks, seconds (a 3 Hz cadence cap).
const MIN_PEAK_SPACING: f64 = 0.33;
/// Minimum band-passed amplitude for a peak to count as a step, m/s^2.
const MIN_PEAK_AMPLITUDE: f64 = 0.5;
/// A walk is "regular" when the last four inter-peak intervals have a
/// coefficient of variation below this; regular walks keep their steps even
/// while the device is being manipulated.
const REGULARITY_CV: f64 = 0.15;
const REGULARITY_INTERVALS: usize = 4;

/// Step frequencies are physically bounded to this band, Hz.
pub const FREQUENCY_RANGE: (f64, f64) = (0.5, 3.0);

/// A detected step: when it happened and at what cadence.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepTick {
    pub t: f64,
    pub frequency: f64,
}

/// Linear step-length model: length = freq_coeff * F + height_coeff * H +
/// offset, clamped to a plausible human stride.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepModelParams {
    /// Meters of stride per Hz of cadence.
    pub freq_coeff: f64,
    /// Dimensionless gain on the user's height.
    pub height_coeff: f64,
    /// Meters.
    pub offset: f64,
    /// Meters, in [1.0, 2.3].
    pub user_height: f64,
}

impl StepModelParams {
    pub fn with_height(user_height: f64) -> StepModelParams {
        StepModelParams {
            freq_coeff: 0.339,
            height_coeff: 0.585,
            offset: -0.923,
            user_height,
        }
    }
}

/// Clamp band for [`step_length`], meters.
pub const STEP_LENGTH_RANGE: (f64, f64) = (0.3, 1.2);

/// Stride length for a step frequency, meters.
pub fn step_length(frequency: f64, params: &StepModelParams) -> f64 {
    let raw = params.freq_coeff * frequency
        + params.height_coeff * params.user_height
        + params.offset;
    raw.clamp(STEP_LENGTH_RANGE.0, STEP_LENGTH_RANGE.1)
}

/// Streaming step detector over the accelerometer norm.
#[derive(Debug, Clone)]
pub struct StepDetector {
    band: WalkBandPass,
    // Last two filtered samples for one-sample-lookahead peak confirmation.
    prev: Option<(f64, f64)>,
    prev2: Option<(f64, f64)>,
    last_peak_t: Option<f64>,
    intervals: Vec<f64>,
    // The first peak has no preceding interval; it is held back and emitted
    // with the frequency of the interval that follows it.
    pending_first: Option<f64>,
}

impl StepDetector {
    pub fn new(fs: f64) -> StepDetector {
        StepDetector {
            band: WalkBandPass::new(fs),
            prev: None,
            prev2: None,
            last_peak_t: None,
            intervals: Vec::new(),
            pending_first: None,
        }
    }

    fn regular_cadence(&self) -> bool {
        if self.intervals.len() < REGULARITY_INTERVALS {
            return false;
        }
        let recent = &self.intervals[self.intervals.len() - REGULARITY_INTERVALS..];
        let mean = recent.iter().sum::<f64>() / recent.len() as f64;
        let var = recent.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / recent.len() as f64;
        var.sqrt() / mean < REGULARITY_CV
    }

    /// Feeds one accelerometer-norm sample; returns any steps confirmed by
    /// this sample. `dpc_in_progress` suppresses steps unless the cadence
    /// has been regular (the user is walking while manipulating the device).
    pub fn push(&mut self, t: f64, accel_norm: f64, dpc_in_progress: bool) -> Vec<StepTick> {
        let y = self.band.step(accel_norm);
        let mut out = Vec::new();

        if let (Some((t1, y1)), Some((_, y2))) = (self.prev, self.prev2) {
            let is_peak = y1 > y2 && y1 >= y && y1 >= MIN_PEAK_AMPLITUDE;
            let spaced = self
                .last_peak_t
                .map_or(true, |lp| t1 - lp >= MIN_PEAK_SPACING);
            if is_peak && spaced {
                let interval = self.last_peak_t.map(|lp| t1 - lp);
                if let Some(dt) = interval {
                    self.intervals.push(dt);
                }
                self.last_peak_t = Some(t1);

                let suppressed = dpc_in_progress && !self.regular_cadence();
                match interval {
                    None => {
                        // Hold the first peak until its frequency is known.
                        self.pending_first = (!suppressed).then_some(t1);
                    }
                    Some(dt) => {
                        let f = (1.0 / dt).clamp(FREQUENCY_RANGE.0, FREQUENCY_RANGE.1);
                        if let Some(first_t) = self.pending_first.take() {
                            out.push(StepTick {
                                t: first_t,
                                frequency: f,
                            });
                        }
                        if !suppressed {
                            out.push(StepTick { t: t1, frequency: f });
                        }
                    }
                }
            }
        }

        self.prev2 = self.prev;
        self.prev = Some((t, y));
        out
    }
}

/// Batch step detection over a whole stream.
///
/// `dpc_flags` are phase transitions as produced by the DPC detector; steps
/// inside an in-progress window are suppressed unless the cadence is
/// regular. The stream must cover at least 3 seconds at `fs >= 20` Hz.
pub fn detect_steps(
    stream: &[ImuSample],
    fs: f64,
    dpc_flags: &[DpcFlag],
) -> Result<Vec<StepTick>, PdrError> {
    let span = stream
        .last()
        .zip(stream.first())
        .map(|(l, f)| l.t - f.t)
        .unwrap_or(0.0);
    if span < 3.0 || fs < 20.0 {
        return Err(PdrError::StreamTooShort {
            seconds: span,
            required: 3.0,
        });
    }
    let mut detector = StepDetector::new(fs);
    let mut out = Vec::new();
    let mut flag_idx = 0;
    let mut in_progress = false;
    for sample in stream {
        while flag_idx < dpc_flags.len() && dpc_flags[flag_idx].t <= sample.t {
            in_progress = dpc_flags[flag_idx].phase == DpcPhase::InProgress;
            flag_idx += 1;
        }
        out.extend(detector.push(sample.t, sample.accel.norm(), in_progress));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use nalgebra::Vector3;
    use std::f64::consts::TAU;

    fn norm_stream(fs: f64, seconds: f64, f: impl Fn(f64) -> f64) -> Vec<ImuSample> {
        (0..(fs * seconds) as usize)
            .map(|i| {
                let t = i as f64 / fs;
                ImuSample {
                    t,
                    accel: Vector3::new(0.0, 0.0, f(t)),
                    gyro: Vector3::zeros(),
                    pressure: None,
                }
            })
            .collect()
    }

    #[test]
    fn step_length_examples() {
        let p = StepModelParams::with_height(1.8);
        assert_relative_eq!(step_length(2.0, &p), 0.808, max_relative = 1e-9);
        let p = StepModelParams::with_height(1.7);
        assert_relative_eq!(step_length(1.5, &p), 0.580, max_relative = 1e-9);
        // Raw value 0.339*0.5 + 0.585*1.0 - 0.923 = -0.1685 clamps to the floor.
        let p = StepModelParams::with_height(1.0);
        assert_relative_eq!(step_length(0.5, &p), 0.3, max_relative = 1e-12);
    }

    #[test]
    fn step_length_is_affine_before_clamping_and_always_clamped() {
        let p = StepModelParams::with_height(1.75);
        // Affine in F: equal cadence increments give equal length increments
        // away from the clamp band edges.
        let d1 = step_length(1.6, &p) - step_length(1.4, &p);
        let d2 = step_length(2.0, &p) - step_length(1.8, &p);
        assert_relative_eq!(d1, d2, max_relative = 1e-9);
        for i in 0..=25 {
            let f = 0.5 + i as f64 * 0.1;
            let l = step_length(f, &p);
            assert!((0.3..=1.2).contains(&l));
        }
    }

    #[test]
    fn constant_accel_yields_no_steps() {
        let stream = norm_stream(50.0, 10.0, |_| 9.81);
        let steps = detect_steps(&stream, 50.0, &[]).unwrap();
        assert!(steps.is_empty(), "got {steps:?}");
    }

    #[test]
    fn walking_sinusoid_yields_cadence_steps() {
        // 1.8 Hz walk for 10 s: the band-passed signal keeps one local
        // maximum per cycle, 18 cycles total.
        let stream = norm_stream(50.0, 10.0, |t| 9.81 + 2.0 * (TAU * 1.8 * t).sin());
        let steps = detect_steps(&stream, 50.0, &[]).unwrap();
        assert!(
            (17..=19).contains(&steps.len()),
            "expected 18 +- 1 steps, got {}",
            steps.len()
        );
        for s in steps.iter().skip(1) {
            assert!(
                (s.frequency - 1.8).abs() < 0.05,
                "frequency {} off cadence",
                s.frequency
            );
        }
    }

    #[test]
    fn step_times_are_invariant_to_device_orientation() {
        // The same walking signal expressed in a rotated body frame: norm
        // identical, so the detected step times must match.
        let fs = 50.0;
        let rot = nalgebra::Rotation3::from_euler_angles(0.4, -0.8, 1.2);
        let make = |rotate: bool| -> Vec<ImuSample> {
            (0..(fs * 10.0) as usize)
                .map(|i| {
                    let t = i as f64 / fs;
                    let v = Vector3::new(0.0, 0.0, 9.81 + 2.0 * (TAU * 1.6 * t).sin());
                    ImuSample {
                        t,
                        accel: if rotate { rot * v } else { v },
                        gyro: Vector3::zeros(),
                        pressure: None,
                    }
                })
                .collect()
        };
        let plain = detect_steps(&make(false), fs, &[]).unwrap();
        let rotated = detect_steps(&make(true), fs, &[]).unwrap();
        let times = |v: &[StepTick]| v.iter().map(|s| s.t).collect::<Vec<_>>();
        assert_eq!(times(&plain), times(&rotated));
    }

    #[test]
    fn irregular_steps_inside_dpc_window_are_suppressed() {
        // Irregular cadence: alternating 1.2 Hz and 2.4 Hz bursts, CV of the
        // inter-peak intervals stays above the regularity threshold.
        let stream = norm_stream(50.0, 10.0, |t| {
            let f = if (t * 0.7).fract() < 0.35 { 1.2 } else { 2.4 };
            9.81 + 2.0 * (TAU * f * t).sin()
        });
        let flags = vec![
            DpcFlag {
                t: 3.0,
                phase: DpcPhase::InProgress,
            },
            DpcFlag {
                t: 5.0,
                phase: DpcPhase::Stable,
            },
        ];
        let with_dpc = detect_steps(&stream, 50.0, &flags).unwrap();
        assert!(
            !with_dpc.iter().any(|s| s.t >= 3.0 && s.t < 5.0),
            "steps inside the manipulation window must be suppressed: {with_dpc:?}"
        );
        // The same stream without the flag does report steps in that window.
        let without = detect_steps(&stream, 50.0, &[]).unwrap();
        assert!(without.iter().any(|s| s.t >= 3.0 && s.t < 5.0));
    }

    #[test]
    fn regular_walkers_keep_their_steps_during_dpc() {
        let stream = norm_stream(50.0, 10.0, |t| 9.81 + 2.0 * (TAU * 1.8 * t).sin());
        let flags = vec![
            DpcFlag {
                t: 4.0,
                phase: DpcPhase::InProgress,
            },
            DpcFlag {
                t: 6.0,
                phase: DpcPhase::Stable,
            },
        ];
        let steps = detect_steps(&stream, 50.0, &flags).unwrap();
        assert!(
            steps.iter().any(|s| s.t >= 4.0 && s.t < 6.0),
            "regular cadence must survive the DPC window"
        );
    }

    #[test]
    fn short_streams_are_rejected() {
        let stream = norm_stream(50.0, 2.0, |_| 9.81);
        assert!(matches!(
            detect_steps(&stream, 50.0, &[]),
            Err(PdrError::StreamTooShort { .. })
        ));
    }
}
