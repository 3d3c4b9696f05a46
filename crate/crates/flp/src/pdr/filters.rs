//! Streaming IIR filter sections used by the sensor pipelines.

use std::f64::consts::{PI, SQRT_2, TAU};

/// Second-order IIR section (direct form I), Butterworth designs via the
/// bilinear transform.
#[derive(Debug, Clone)]
pub struct Biquad {
    b0: f64,
    b1: f64,
    b2: f64,
    a1: f64,
    a2: f64,
    x1: f64,
    x2: f64,
    y1: f64,
    y2: f64,
    primed: bool,
}

impl Biquad {
    fn from_coeffs(b0: f64, b1: f64, b2: f64, a0: f64, a1: f64, a2: f64) -> Biquad {
        Biquad {
            b0: b0 / a0,
            b1: b1 / a0,
            b2: b2 / a0,
            a1: a1 / a0,
            a2: a2 / a0,
            x1: 0.0,
            x2: 0.0,
            y1: 0.0,
            y2: 0.0,
            primed: false,
        }
    }

    /// Butterworth low-pass (Q = 1/sqrt(2)).
    pub fn lowpass(cutoff_hz: f64, fs: f64) -> Biquad {
        let w0 = TAU * cutoff_hz / fs;
        debug_assert!(w0 < PI, "cutoff above Nyquist");
        let (sin, cos) = w0.sin_cos();
        let alpha = sin / SQRT_2;
        let b1 = 1.0 - cos;
        Biquad::from_coeffs(b1 / 2.0, b1, b1 / 2.0, 1.0 + alpha, -2.0 * cos, 1.0 - alpha)
    }

    /// Butterworth high-pass (Q = 1/sqrt(2)).
    pub fn highpass(cutoff_hz: f64, fs: f64) -> Biquad {
        let w0 = TAU * cutoff_hz / fs;
        debug_assert!(w0 < PI, "cutoff above Nyquist");
        let (sin, cos) = w0.sin_cos();
        let alpha = sin / SQRT_2;
        let b1 = 1.0 + cos;
        Biquad::from_coeffs(b1 / 2.0, -b1, b1 / 2.0, 1.0 + alpha, -2.0 * cos, 1.0 - alpha)
    }

    pub fn step(&mut self, x: f64) -> f64 {
        let y = self.b0 * x + self.b1 * self.x1 + self.b2 * self.x2
            - self.a1 * self.y1
            - self.a2 * self.y2;
        self.x2 = self.x1;
        self.x1 = x;
        self.y2 = self.y1;
        self.y1 = y;
        y
    }

    /// Seeds the state as if the input had been `x0` forever, so a stream
    /// that starts on a large DC level (gravity, absolute altitude) does not
    /// ring at startup.
    pub fn prime(&mut self, x0: f64) {
        let dc_gain = (self.b0 + self.b1 + self.b2) / (1.0 + self.a1 + self.a2);
        self.x1 = x0;
        self.x2 = x0;
        self.y1 = dc_gain * x0;
        self.y2 = dc_gain * x0;
        self.primed = true;
    }

    pub fn is_primed(&self) -> bool {
        self.primed
    }
}

/// First-order high-pass written on input differences, characterized by its
/// time constant. Output starts at zero for any input level.
#[derive(Debug, Clone)]
pub struct SinglePoleHighPass {
    alpha: f64,
    prev_x: Option<f64>,
    y: f64,
}

impl SinglePoleHighPass {
    pub fn new(time_constant_s: f64, fs: f64) -> SinglePoleHighPass {
        let dt = 1.0 / fs;
        SinglePoleHighPass {
            alpha: time_constant_s / (time_constant_s + dt),
            prev_x: None,
            y: 0.0,
        }
    }

    pub fn step(&mut self, x: f64) -> f64 {
        let prev = self.prev_x.unwrap_or(x);
        self.y = self.alpha * (self.y + x - prev);
        self.prev_x = Some(x);
        self.y
    }
}

/// The walking band: high-pass at 1 Hz cascaded with low-pass at 2 Hz.
/// The high-pass section is primed on the first sample (gravity DC would
/// otherwise ring through the peak picker).
#[derive(Debug, Clone)]
pub struct WalkBandPass {
    hp: Biquad,
    lp: Biquad,
}

impl WalkBandPass {
    pub const LOW_HZ: f64 = 1.0;
    pub const HIGH_HZ: f64 = 2.0;

    pub fn new(fs: f64) -> WalkBandPass {
        WalkBandPass {
            hp: Biquad::highpass(Self::LOW_HZ, fs),
            lp: Biquad::lowpass(Self::HIGH_HZ, fs),
        }
    }

    pub fn step(&mut self, x: f64) -> f64 {
        if !self.hp.is_primed() {
            self.hp.prime(x);
        }
        self.lp.step(self.hp.step(x))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn magnitude_at(filter_factory: impl Fn() -> Biquad, f_hz: f64, fs: f64) -> f64 {
        let mut filt = filter_factory();
        let n = (fs * 40.0) as usize;
        let mut peak: f64 = 0.0;
        for i in 0..n {
            let t = i as f64 / fs;
            let y = filt.step((TAU * f_hz * t).sin());
            if t > 20.0 {
                peak = peak.max(y.abs());
            }
        }
        peak
    }

    #[test]
    fn lowpass_magnitude_response() {
        let fs = 50.0;
        let make = || Biquad::lowpass(2.0, fs);
        let at_cut = magnitude_at(make, 2.0, fs);
        assert!((at_cut - 1.0 / SQRT_2).abs() < 0.02, "gain at cutoff {at_cut}");
        assert!(magnitude_at(make, 0.2, fs) > 0.99);
        assert!(magnitude_at(make, 8.0, fs) < 0.07);
    }

    #[test]
    fn highpass_magnitude_response() {
        let fs = 50.0;
        let make = || Biquad::highpass(1.0, fs);
        let at_cut = magnitude_at(make, 1.0, fs);
        assert!((at_cut - 1.0 / SQRT_2).abs() < 0.02, "gain at cutoff {at_cut}");
        assert!(magnitude_at(make, 4.0, fs) > 0.98);
        assert!(magnitude_at(make, 0.1, fs) < 0.02);
    }

    #[test]
    fn primed_highpass_ignores_dc() {
        let mut band = WalkBandPass::new(50.0);
        for _ in 0..500 {
            let y = band.step(9.81);
            assert!(y.abs() < 1e-9, "constant input must stay at zero, got {y}");
        }
    }

    #[test]
    fn band_passes_the_walking_fundamental() {
        let fs = 50.0;
        let mut band = WalkBandPass::new(fs);
        let mut peak: f64 = 0.0;
        for i in 0..(fs as usize * 30) {
            let t = i as f64 / fs;
            let y = band.step(9.81 + 2.0 * (TAU * 1.5 * t).sin());
            if t > 10.0 {
                peak = peak.max(y.abs());
            }
        }
        // 1.5 Hz sits in the passband; most of the 2 m/s^2 swing survives.
        assert!(peak > 1.4, "peak {peak}");
    }

    #[test]
    fn single_pole_highpass_starts_at_zero_and_rejects_ramps() {
        let fs = 10.0;
        let mut hp = SinglePoleHighPass::new(60.0, fs);
        assert_eq!(hp.step(110.0), 0.0);
        // Slow ramp: steady-state output is slope * tau.
        let slope = 0.001; // m/s
        let mut y = 0.0;
        for i in 1..(fs as usize * 600) {
            y = hp.step(110.0 + slope * i as f64 / fs);
        }
        assert!((y - slope * 60.0).abs() < 0.005, "steady ramp response {y}");
    }
}
