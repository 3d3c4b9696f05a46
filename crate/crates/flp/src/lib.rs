//! Fused indoor-localization engine and its benchmark harness.
//!
//! The engine estimates a pedestrian's position from step events (length +
//! relative heading), a negative map (wall segments grouped into cached
//! partitions), scalar beacon RSS readings, GNSS fixes and barometric floor
//! changes, fusing them in a partially-resampled particle filter whose state
//! also tracks the per-user step-length mismatch and the device-to-user
//! misalignment angle.
//!
//! Crate layout:
//! - [`geom`]: planar primitives and segment intersection
//! - [`map`]: negative-map model, partitioning, collision queries, cache
//! - [`pdr`]: step detection, orientation, device-position-change and
//!   floor-change detection from raw sensor streams
//! - [`measurements`]: GNSS and RSS likelihood models
//! - [`filter`]: the particle filter and the engine facade
//! - [`harness`]: scenario synthesis, metrics and the benchmark runner
//! - [`rng`]: the deterministic generator everything draws from

pub mod geom;
pub mod map;
pub mod measurements;
pub mod rng;
