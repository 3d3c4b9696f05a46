//! Wall-collision queries over a partition's wall list.
//!
//! A displacement is first screened against cached wall bounding boxes; only
//! survivors pay for an exact segment intersection. Grazing and near-complete
//! hits are repaired deterministically instead of killing the particle.

use super::{Partition, Wall};
use crate::geom::{segment_intersect_param, Segment, Vec2};

/// Tuning for deterministic collision corrections.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrectionPolicy {
    /// With corrections disabled every hit is a kill.
    pub enabled: bool,
    /// Incidence angle below which a hit slides along the wall, radians.
    pub grazing_angle: f64,
    /// Clearance kept between a corrected endpoint and the wall, meters.
    pub wall_margin: f64,
    /// Hit fraction beyond which a hit is truncated short of the wall.
    pub head_on_fraction: f64,
}

impl Default for CorrectionPolicy {
    fn default() -> Self {
        CorrectionPolicy {
            enabled: true,
            grazing_angle: 20.0_f64.to_radians(),
            wall_margin: 0.02,
            head_on_fraction: 0.8,
        }
    }
}

impl CorrectionPolicy {
    /// Every hit kills; used by oracle-equivalence checks.
    pub fn disabled() -> Self {
        CorrectionPolicy {
            enabled: false,
            ..CorrectionPolicy::default()
        }
    }
}

/// Outcome of a collision query.
#[derive(Debug, Clone, PartialEq)]
pub enum CollisionVerdict {
    NoHit,
    /// The displacement was repaired; the new segment clears the wall that
    /// triggered the correction.
    Corrected(Segment),
    /// Unavoidable hit on this wall; the particle's weight goes to zero.
    Kill(Wall),
}

/// Walls whose bounding box overlaps the displacement's bounding box.
///
/// A superset of the walls actually hit and a subset of the partition's
/// walls; the exact test only runs on this set.
pub fn prune_candidates<'a>(disp: &Segment, partition: &'a Partition) -> Vec<&'a Wall> {
    let disp_box = disp.bbox();
    partition
        .walls
        .iter()
        .filter(|w| w.bbox().overlaps(&disp_box))
        .collect()
}

/// Collision query against one partition.
pub fn collision_query(
    disp: &Segment,
    partition: &Partition,
    policy: &CorrectionPolicy,
) -> CollisionVerdict {
    collision_query_walls(disp, &prune_candidates(disp, partition), policy).0
}

/// Collision query with the exact-test count, for pruning-effectiveness
/// measurements.
pub fn collision_query_counted(
    disp: &Segment,
    partition: &Partition,
    policy: &CorrectionPolicy,
) -> (CollisionVerdict, usize) {
    collision_query_walls(disp, &prune_candidates(disp, partition), policy)
}

/// Core query over an explicit candidate list. Returns the verdict and the
/// number of exact intersection tests performed.
pub fn collision_query_walls(
    disp: &Segment,
    candidates: &[&Wall],
    policy: &CorrectionPolicy,
) -> (CollisionVerdict, usize) {
    debug_assert!(disp.length() > 0.0);
    let mut first_hit: Option<(f64, &Wall)> = None;
    for wall in candidates {
        if let Some(t) = segment_intersect_param(disp, &wall.segment()) {
            let earlier = first_hit.map_or(true, |(best, _)| t < best);
            if earlier {
                first_hit = Some((t, wall));
            }
        }
    }
    let tests = candidates.len();
    let Some((t, wall)) = first_hit else {
        return (CollisionVerdict::NoHit, tests);
    };
    if !policy.enabled {
        return (CollisionVerdict::Kill((*wall).clone()), tests);
    }

    let dir = disp.direction();
    let wall_dir = wall.segment().direction();
    // Incidence angle between the displacement and the wall line, [0, pi/2].
    let cos_inc = (dir.normalized().dot(wall_dir.normalized())).abs().min(1.0);
    let incidence = cos_inc.acos();

    if incidence < policy.grazing_angle {
        let hit = disp.point_at(t);
        let remainder = dir.scale(1.0 - t);
        let wall_unit = wall_dir.normalized();
        let slide = wall_unit.scale(remainder.dot(wall_unit));
        let normal = incoming_normal(wall_dir, disp.a - wall.a, dir);
        let endpoint = hit + slide + normal.scale(policy.wall_margin);
        return (
            CollisionVerdict::Corrected(Segment::new(disp.a, endpoint)),
            tests,
        );
    }

    if t > policy.head_on_fraction {
        let len = disp.length();
        let stop = (t * len - policy.wall_margin).max(0.0) / len;
        let endpoint = disp.point_at(stop);
        return (
            CollisionVerdict::Corrected(Segment::new(disp.a, endpoint)),
            tests,
        );
    }

    (CollisionVerdict::Kill((*wall).clone()), tests)
}

/// Unit normal of the wall pointing toward the side the displacement came
/// from. Falls back to "opposite the travel direction" when the origin sits
/// on the wall line, and to the left normal when even that is degenerate.
fn incoming_normal(wall_dir: Vec2, origin_offset: Vec2, travel: Vec2) -> Vec2 {
    let left = wall_dir.perp().normalized();
    let side = wall_dir.cross(origin_offset);
    if side > 0.0 {
        return left;
    }
    if side < 0.0 {
        return left.scale(-1.0);
    }
    let heading_side = wall_dir.cross(travel);
    if heading_side > 0.0 {
        left.scale(-1.0)
    } else if heading_side < 0.0 {
        left
    } else {
        left
    }
}
