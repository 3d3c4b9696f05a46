//! Likelihood models for GNSS position fixes and scalar beacon RSS
//! observations.
//!
//! Both are plain Gaussians around a deterministic prediction. The RSS
//! prediction is a piecewise linear function of beacon distance: a steep
//! near-field branch and an almost flat far branch where the receiver's
//! front end saturates.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geom::Point2;
use crate::map::Beacon;

#[derive(Debug, Error)]
pub enum MeasurementError {
    #[error("no beacon with id {0:?} in the map")]
    UnknownBeacon(String),
}

/// A projected GNSS position fix in floor-local meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GnssFix {
    pub t: f64,
    pub position: Point2,
    /// Isotropic standard deviation, meters.
    pub sigma: f64,
}

/// A single received-signal-strength reading.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RssObservation {
    pub t: f64,
    pub beacon_id: String,
    /// dBm, in `[-120, 0]`.
    pub rss: f64,
}

/// Either kind of absolute measurement.
#[derive(Debug, Clone, PartialEq)]
pub enum Measurement {
    Gnss(GnssFix),
    Rss(RssObservation),
}

impl Measurement {
    pub fn time(&self) -> f64 {
        match self {
            Measurement::Gnss(g) => g.t,
            Measurement::Rss(r) => r.t,
        }
    }
}

/// Piecewise linear RSS-vs-distance model plus measurement noise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RssModelParams {
    /// dB per meter inside the breakpoint.
    pub slope_near: f64,
    /// dBm at zero distance on the near branch.
    pub intercept_near: f64,
    /// dB per meter beyond the breakpoint (receiver saturation region).
    pub slope_far: f64,
    pub intercept_far: f64,
    /// Branch switch distance, meters; the boundary belongs to the near
    /// branch.
    pub breakpoint: f64,
    /// Measurement noise standard deviation, dBm.
    pub sigma: f64,
}

impl Default for RssModelParams {
    fn default() -> Self {
        RssModelParams {
            slope_near: -0.94,
            intercept_near: -54.0,
            slope_far: -0.058,
            intercept_far: -84.0,
            breakpoint: 35.0,
            sigma: 10.0,
        }
    }
}

/// Predicted RSS at position `x` for a beacon, dBm.
pub fn rss_predict(x: Point2, beacon: &Beacon, params: &RssModelParams) -> f64 {
    rss_predict_distance(x.distance(beacon.position), params)
}

/// Predicted RSS as a function of distance alone.
pub fn rss_predict_distance(d: f64, params: &RssModelParams) -> f64 {
    if d <= params.breakpoint {
        params.slope_near * d + params.intercept_near
    } else {
        params.slope_far * d + params.intercept_far
    }
}

/// Likelihood of an RSS observation given a candidate position.
pub fn rss_likelihood(
    z: &RssObservation,
    x: Point2,
    beacon: &Beacon,
    params: &RssModelParams,
) -> f64 {
    let residual = z.rss - rss_predict(x, beacon, params);
    normal_density(residual, params.sigma)
}

/// Likelihood of a GNSS fix given a candidate position: isotropic bivariate
/// normal with the fix's own sigma.
pub fn gnss_likelihood(z: &GnssFix, x: Point2) -> f64 {
    debug_assert!(z.sigma > 0.0);
    let dx = z.position.x - x.x;
    let dy = z.position.y - x.y;
    let var = z.sigma * z.sigma;
    (-(dx * dx + dy * dy) / (2.0 * var)).exp() / (std::f64::consts::TAU * var)
}

fn normal_density(residual: f64, sigma: f64) -> f64 {
    debug_assert!(sigma > 0.0);
    (-0.5 * (residual / sigma).powi(2)).exp() / (sigma * std::f64::consts::TAU.sqrt())
}
