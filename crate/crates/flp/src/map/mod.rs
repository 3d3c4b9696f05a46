//! Negative-map data model: walls grouped into floor partitions, special
//! zones, beacons and the queries the filter runs against them.
//!
//! The map stores what is forbidden (wall segments) rather than what is
//! walkable. Each floor is cut into rectangular partitions capped at
//! `max_walls` segments so collision checks only ever scan a small, local
//! wall list.

mod cache;
mod collision;
pub mod json;

pub use cache::{CacheFetch, PartitionCache, PartitionKey, PartitionSource};
pub use collision::{
    collision_query, collision_query_counted, collision_query_walls, prune_candidates,
    CollisionVerdict, CorrectionPolicy,
};

use crate::geom::{polygon_area, polygon_is_simple, AxisBox, Point2, Segment};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Default cap on walls per partition.
pub const DEFAULT_MAX_WALLS: usize = 100;
/// Default upper bound on partition area, square meters.
pub const DEFAULT_TARGET_AREA: f64 = 1000.0;
/// Lower partition-area bound; only wall-count pressure may go below it.
pub const MIN_PARTITION_AREA: f64 = 10.0;
/// Number of partitions the cache keeps resident.
pub const DEFAULT_CACHE_SLOTS: usize = 5;

#[derive(Debug, Error)]
pub enum MapError {
    #[error("wall endpoints coincide at ({0}, {1})")]
    DegenerateWall(f64, f64),
    #[error("zone polygon must be simple with positive area")]
    BadZonePolygon,
    #[error("stairway zone needs a positive step length and at least one exit point")]
    BadStairway,
    #[error("more than {max_walls} walls share a single point; partition cannot be split")]
    SinglePointOverflow { max_walls: usize },
    #[error("point ({0}, {1}) lies outside every partition")]
    OutOfMap(f64, f64),
    #[error("no partition {partition} on floor {floor}")]
    LoadFailed { floor: usize, partition: usize },
    #[error("map validation failed at {path}: {message}")]
    Invalid { path: String, message: String },
}

/// An impassable segment with its cached tight bounding box.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Wall {
    pub a: Point2,
    pub b: Point2,
    bbox: AxisBox,
}

impl Wall {
    pub fn new(a: Point2, b: Point2) -> Result<Wall, MapError> {
        if !a.is_finite() || !b.is_finite() || a == b {
            return Err(MapError::DegenerateWall(a.x, a.y));
        }
        let bbox = AxisBox::of_points([a, b]).unwrap();
        Ok(Wall { a, b, bbox })
    }

    pub fn bbox(&self) -> &AxisBox {
        &self.bbox
    }

    pub fn segment(&self) -> Segment {
        Segment::new(self.a, self.b)
    }
}

/// Zone semantics attached to a polygon.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ZoneKind {
    /// Fixed per-step displacement and the points where the stairway
    /// deposits a user on this floor.
    Stairway {
        step_length: f64,
        exit_points: Vec<Point2>,
    },
    /// Scales particle weights inside the polygon.
    HighAccessibility { weight_factor: f64 },
    /// Suppresses GNSS weighting inside the polygon.
    GnssDenied,
}

/// A polygonal region with special semantics.
#[derive(Debug, Clone, PartialEq)]
pub struct Zone {
    pub polygon: Vec<Point2>,
    pub kind: ZoneKind,
    bbox: AxisBox,
}

impl Zone {
    pub fn new(polygon: Vec<Point2>, kind: ZoneKind) -> Result<Zone, MapError> {
        if polygon.len() < 3
            || !polygon_is_simple(&polygon)
            || polygon_area(&polygon).abs() <= 0.0
        {
            return Err(MapError::BadZonePolygon);
        }
        if let ZoneKind::Stairway {
            step_length,
            exit_points,
        } = &kind
        {
            if *step_length <= 0.0 || exit_points.is_empty() {
                return Err(MapError::BadStairway);
            }
        }
        let bbox = AxisBox::of_points(polygon.iter().copied()).unwrap();
        Ok(Zone {
            polygon,
            kind,
            bbox,
        })
    }

    pub fn bbox(&self) -> &AxisBox {
        &self.bbox
    }

    pub fn contains(&self, p: Point2) -> bool {
        self.bbox.contains(p) && crate::geom::point_in_polygon(p, &self.polygon)
    }

    pub fn is_stairway(&self) -> bool {
        matches!(self.kind, ZoneKind::Stairway { .. })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BeaconKind {
    WiFi,
    Ble,
}

/// A radio transmitter with a known position.
#[derive(Debug, Clone, PartialEq)]
pub struct Beacon {
    pub id: String,
    pub position: Point2,
    pub floor: usize,
    pub kind: BeaconKind,
}

/// A rectangular subdivision of a floor holding the walls that touch it.
#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    pub id: usize,
    pub bounds: AxisBox,
    pub walls: Vec<Wall>,
    /// Indices into the owning floor's zone list.
    pub zones: Vec<usize>,
}

/// One floor: its absolute elevation, partitions, beacons and zones.
#[derive(Debug, Clone, PartialEq)]
pub struct Floor {
    pub index: usize,
    pub height: f64,
    pub partitions: Vec<Partition>,
    pub beacons: Vec<Beacon>,
    pub zones: Vec<Zone>,
}

impl Floor {
    pub fn stairway_zones(&self) -> impl Iterator<Item = &Zone> {
        self.zones.iter().filter(|z| z.is_stairway())
    }

    /// Zones whose polygon contains the point.
    pub fn zones_at(&self, p: Point2) -> impl Iterator<Item = &Zone> {
        self.zones.iter().filter(move |z| z.contains(p))
    }

    pub fn in_stairway(&self, p: Point2) -> Option<&Zone> {
        self.zones_at(p).find(|z| z.is_stairway())
    }

    pub fn in_gnss_denied(&self, p: Point2) -> bool {
        self.zones_at(p)
            .any(|z| matches!(z.kind, ZoneKind::GnssDenied))
    }

    /// Product of the weight factors of all high-accessibility zones
    /// containing the point (1.0 outside them).
    pub fn accessibility_factor(&self, p: Point2) -> f64 {
        self.zones_at(p)
            .filter_map(|z| match z.kind {
                ZoneKind::HighAccessibility { weight_factor } => Some(weight_factor),
                _ => None,
            })
            .product()
    }

    /// Union of all partition bounds, if the floor has any partitions.
    pub fn bounding_box(&self) -> Option<AxisBox> {
        let mut it = self.partitions.iter();
        let first = it.next()?.bounds;
        Some(it.fold(first, |acc, p| acc.union(&p.bounds)))
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MapMeta {
    pub name: String,
    /// Free-form note describing the coordinate frame, e.g. which geodetic
    /// projection the floor-local meters came from.
    #[serde(default)]
    pub crs: String,
}

/// The whole venue: floors ordered by index, heights strictly increasing.
#[derive(Debug, Clone, PartialEq)]
pub struct MapModel {
    pub floors: Vec<Floor>,
    pub meta: MapMeta,
}

impl MapModel {
    pub fn floor(&self, index: usize) -> Option<&Floor> {
        self.floors.get(index)
    }

    pub fn find_beacon(&self, id: &str) -> Option<&Beacon> {
        self.floors
            .iter()
            .flat_map(|f| f.beacons.iter())
            .find(|b| b.id == id)
    }

    pub fn floor_heights(&self) -> Vec<f64> {
        self.floors.iter().map(|f| f.height).collect()
    }

    /// Checks every structural invariant; `path` prefixes error locations.
    pub fn validate(&self) -> Result<(), MapError> {
        let invalid = |path: String, message: &str| MapError::Invalid {
            path,
            message: message.to_string(),
        };
        let mut beacon_ids = std::collections::HashSet::new();
        for (fi, floor) in self.floors.iter().enumerate() {
            let fpath = format!("floors[{fi}]");
            if floor.index != fi {
                return Err(invalid(fpath, "floor indices must be contiguous from 0"));
            }
            if fi > 0 && self.floors[fi - 1].height >= floor.height {
                return Err(invalid(
                    fpath,
                    "floor heights must strictly increase with index",
                ));
            }
            for (pi, part) in floor.partitions.iter().enumerate() {
                let ppath = format!("{fpath}.partitions[{pi}]");
                if part.id != pi {
                    return Err(invalid(ppath, "partition ids must be contiguous from 0"));
                }
                for (wi, wall) in part.walls.iter().enumerate() {
                    if !wall.bbox().overlaps(&part.bounds) {
                        return Err(invalid(
                            format!("{ppath}.walls[{wi}]"),
                            "wall does not touch its partition bounds",
                        ));
                    }
                }
                for &zi in &part.zones {
                    if zi >= floor.zones.len() {
                        return Err(invalid(ppath, "zone reference out of range"));
                    }
                }
            }
            for (bi, beacon) in floor.beacons.iter().enumerate() {
                if beacon.floor != fi {
                    return Err(invalid(
                        format!("{fpath}.beacons[{bi}]"),
                        "beacon floor does not match the enclosing floor",
                    ));
                }
                if !beacon_ids.insert(beacon.id.clone()) {
                    return Err(invalid(
                        format!("{fpath}.beacons[{bi}]"),
                        "duplicate beacon id",
                    ));
                }
            }
        }
        Ok(())
    }
}

/// Resolves the partition containing a point; ties on shared edges go to the
/// lowest partition id.
pub fn locate(point: Point2, floor: &Floor) -> Result<usize, MapError> {
    floor
        .partitions
        .iter()
        .find(|p| p.bounds.contains(point))
        .map(|p| p.id)
        .ok_or(MapError::OutOfMap(point.x, point.y))
}

/// Cuts a floor's wall set into partitions by recursive bisection.
///
/// Splits along the longer axis until each cell holds at most `max_walls`
/// walls and at most `target_area` square meters. Walls crossing a cut are
/// kept in both halves, so every cell can answer collision queries without
/// consulting its neighbours. The root box is the tight bound of all walls
/// and zones, inflated by one meter of walkable margin.
pub fn compile_partitions(
    walls: &[Wall],
    zones: &[Zone],
    max_walls: usize,
    target_area: f64,
) -> Result<Vec<Partition>, MapError> {
    assert!(max_walls >= 1, "max_walls must be at least 1");
    let wall_boxes: Vec<AxisBox> = walls.iter().map(|w| *w.bbox()).collect();
    let root = AxisBox::of_points(
        walls
            .iter()
            .flat_map(|w| [w.a, w.b])
            .chain(zones.iter().flat_map(|z| z.polygon.iter().copied())),
    )
    .unwrap_or_else(|| AxisBox::new(Point2::new(0.0, 0.0), Point2::new(0.0, 0.0)))
    .inflate(1.0);

    let mut leaves: Vec<AxisBox> = Vec::new();
    let mut leaf_walls: Vec<Vec<usize>> = Vec::new();
    // Depth-first, low half first, so partition ids are deterministic.
    let mut stack: Vec<(AxisBox, Vec<usize>)> = vec![(root, (0..walls.len()).collect())];

    while let Some((cell, members)) = stack.pop() {
        let needs_split = members.len() > max_walls || cell.area() > target_area;
        if !needs_split {
            leaves.push(cell);
            leaf_walls.push(members);
            continue;
        }

        let split = |vertical: bool| -> (AxisBox, AxisBox, Vec<usize>, Vec<usize>) {
            let (lo, hi) = if vertical {
                let mid = 0.5 * (cell.min.x + cell.max.x);
                (
                    AxisBox::new(cell.min, Point2::new(mid, cell.max.y)),
                    AxisBox::new(Point2::new(mid, cell.min.y), cell.max),
                )
            } else {
                let mid = 0.5 * (cell.min.y + cell.max.y);
                (
                    AxisBox::new(cell.min, Point2::new(cell.max.x, mid)),
                    AxisBox::new(Point2::new(cell.min.x, mid), cell.max),
                )
            };
            let pick = |bb: &AxisBox| {
                members
                    .iter()
                    .copied()
                    .filter(|&i| wall_boxes[i].overlaps(bb))
                    .collect::<Vec<_>>()
            };
            let (ml, mh) = (pick(&lo), pick(&hi));
            (lo, hi, ml, mh)
        };

        let longer_axis_vertical = cell.width() >= cell.height();
        let first = split(longer_axis_vertical);
        let progress =
            |l: &Vec<usize>, h: &Vec<usize>| l.len().max(h.len()) < members.len();

        let chosen = if members.len() <= max_walls || progress(&first.2, &first.3) {
            // Area-driven splits need no wall-count progress.
            first
        } else {
            let second = split(!longer_axis_vertical);
            if progress(&second.2, &second.3) {
                second
            } else {
                return Err(MapError::SinglePointOverflow { max_walls });
            }
        };

        let (lo, hi, ml, mh) = chosen;
        stack.push((hi, mh));
        stack.push((lo, ml));
    }

    // Stack order emitted the low halves last; restore spatial order.
    let mut order: Vec<usize> = (0..leaves.len()).collect();
    order.sort_by(|&a, &b| {
        leaves[a]
            .min
            .x
            .total_cmp(&leaves[b].min.x)
            .then(leaves[a].min.y.total_cmp(&leaves[b].min.y))
    });

    let partitions = order
        .into_iter()
        .enumerate()
        .map(|(id, li)| {
            let bounds = leaves[li];
            let zone_refs = zones
                .iter()
                .enumerate()
                .filter(|(_, z)| z.bbox().overlaps(&bounds))
                .map(|(zi, _)| zi)
                .collect();
            Partition {
                id,
                bounds,
                walls: leaf_walls[li].iter().map(|&i| walls[i].clone()).collect(),
                zones: zone_refs,
            }
        })
        .collect();
    Ok(partitions)
}

/// Builds a floor from a flat wall list by compiling partitions.
pub fn build_floor(
    index: usize,
    height: f64,
    walls: Vec<Wall>,
    zones: Vec<Zone>,
    beacons: Vec<Beacon>,
    max_walls: usize,
    target_area: f64,
) -> Result<Floor, MapError> {
    let partitions = compile_partitions(&walls, &zones, max_walls, target_area)?;
    Ok(Floor {
        index,
        height,
        partitions,
        beacons,
        zones,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Lcg;

    fn wall(ax: f64, ay: f64, bx: f64, by: f64) -> Wall {
        Wall::new(Point2::new(ax, ay), Point2::new(bx, by)).unwrap()
    }

    fn random_walls(rng: &mut Lcg, n: usize, extent: f64) -> Vec<Wall> {
        (0..n)
            .map(|_| {
                let ax = rng.uniform(0.0, extent);
                let ay = rng.uniform(0.0, extent);
                let len = rng.uniform(0.5, 4.0);
                let ang = rng.uniform(0.0, std::f64::consts::TAU);
                wall(ax, ay, ax + len * ang.cos(), ay + len * ang.sin())
            })
            .collect()
    }

    #[test]
    fn degenerate_wall_rejected() {
        assert!(Wall::new(Point2::new(1.0, 1.0), Point2::new(1.0, 1.0)).is_err());
    }

    #[test]
    fn few_walls_make_one_partition() {
        let mut rng = Lcg::new(3);
        let walls = random_walls(&mut rng, 40, 25.0);
        let parts = compile_partitions(&walls, &[], 100, 1000.0).unwrap();
        assert_eq!(parts.len(), 1);
        assert_eq!(parts[0].walls.len(), 40);
    }

    #[test]
    fn spread_walls_respect_the_cap() {
        let mut rng = Lcg::new(4);
        let walls = random_walls(&mut rng, 250, 60.0);
        let parts = compile_partitions(&walls, &[], 100, 1000.0).unwrap();
        assert!(parts.len() > 1);
        for p in &parts {
            assert!(p.walls.len() <= 100, "partition {} holds {}", p.id, p.walls.len());
        }
    }

    #[test]
    fn partitioning_preserves_the_wall_set() {
        let mut rng = Lcg::new(5);
        let walls = random_walls(&mut rng, 180, 40.0);
        let parts = compile_partitions(&walls, &[], 50, 1000.0).unwrap();
        // Set equality up to cross-cut duplication: every input wall appears
        // somewhere, every partition wall is an input wall.
        for w in &walls {
            assert!(
                parts.iter().any(|p| p.walls.contains(w)),
                "wall lost by partitioning"
            );
        }
        for p in &parts {
            for w in &p.walls {
                assert!(walls.contains(w), "partition invented a wall");
            }
        }
    }

    #[test]
    fn partition_areas_stay_in_range_when_achievable() {
        let mut rng = Lcg::new(6);
        let walls = random_walls(&mut rng, 300, 80.0);
        let parts = compile_partitions(&walls, &[], 100, 1000.0).unwrap();
        for p in &parts {
            assert!(p.bounds.area() <= 1000.0 + 1e-9);
            assert!(p.bounds.area() >= MIN_PARTITION_AREA);
        }
    }

    #[test]
    fn shared_point_overflow_detected() {
        // 6 spokes through one point cannot satisfy a cap of 5.
        let c = Point2::new(5.0, 5.0);
        let walls: Vec<Wall> = (0..6)
            .map(|i| {
                let ang = i as f64 * std::f64::consts::TAU / 6.0;
                Wall::new(
                    Point2::new(c.x - ang.cos(), c.y - ang.sin()),
                    Point2::new(c.x + ang.cos(), c.y + ang.sin()),
                )
                .unwrap()
            })
            .collect();
        match compile_partitions(&walls, &[], 5, 1000.0) {
            Err(MapError::SinglePointOverflow { .. }) => {}
            other => panic!("expected SinglePointOverflow, got {other:?}"),
        }
    }

    #[test]
    fn locate_prefers_lowest_id_on_shared_edges() {
        let mut rng = Lcg::new(8);
        let walls = random_walls(&mut rng, 150, 40.0);
        let floor = build_floor(0, 0.0, walls, vec![], vec![], 50, 1000.0).unwrap();
        assert!(floor.partitions.len() >= 2);
        // A point on the shared edge of two partitions resolves to the
        // lower id.
        let p0 = &floor.partitions[0];
        let edge_point = Point2::new(p0.bounds.max.x, p0.bounds.center().y);
        let id = locate(edge_point, &floor).unwrap();
        let containing: Vec<usize> = floor
            .partitions
            .iter()
            .filter(|p| p.bounds.contains(edge_point))
            .map(|p| p.id)
            .collect();
        assert_eq!(id, *containing.iter().min().unwrap());

        // Random interior points resolve to a partition that contains them.
        for _ in 0..200 {
            let bb = floor.bounding_box().unwrap();
            let pt = Point2::new(
                rng.uniform(bb.min.x, bb.max.x),
                rng.uniform(bb.min.y, bb.max.y),
            );
            let id = locate(pt, &floor).unwrap();
            assert!(floor.partitions[id].bounds.contains(pt));
        }
    }

    #[test]
    fn out_of_map_reported() {
        let walls = vec![wall(0.0, 0.0, 10.0, 0.0)];
        let floor = build_floor(0, 0.0, walls, vec![], vec![], 100, 1000.0).unwrap();
        assert!(matches!(
            locate(Point2::new(500.0, 500.0), &floor),
            Err(MapError::OutOfMap(..))
        ));
    }

    #[test]
    fn zone_validation() {
        let square = vec![
            Point2::new(0.0, 0.0),
            Point2::new(2.0, 0.0),
            Point2::new(2.0, 2.0),
            Point2::new(0.0, 2.0),
        ];
        assert!(Zone::new(square.clone(), ZoneKind::GnssDenied).is_ok());
        assert!(Zone::new(
            square.clone(),
            ZoneKind::Stairway {
                step_length: 0.0,
                exit_points: vec![Point2::new(1.0, 1.0)]
            }
        )
        .is_err());
        assert!(Zone::new(square[..2].to_vec(), ZoneKind::GnssDenied).is_err());
    }

    #[test]
    fn accessibility_factor_multiplies() {
        let square = |s: f64| {
            vec![
                Point2::new(0.0, 0.0),
                Point2::new(s, 0.0),
                Point2::new(s, s),
                Point2::new(0.0, s),
            ]
        };
        let zones = vec![
            Zone::new(square(4.0), ZoneKind::HighAccessibility { weight_factor: 2.0 }).unwrap(),
            Zone::new(square(2.0), ZoneKind::HighAccessibility { weight_factor: 3.0 }).unwrap(),
        ];
        let floor = Floor {
            index: 0,
            height: 0.0,
            partitions: vec![],
            beacons: vec![],
            zones,
        };
        assert_eq!(floor.accessibility_factor(Point2::new(1.0, 1.0)), 6.0);
        assert_eq!(floor.accessibility_factor(Point2::new(3.0, 3.0)), 2.0);
        assert_eq!(floor.accessibility_factor(Point2::new(9.0, 9.0)), 1.0);
    }
}
