//! Map interchange format.
//!
//! A map document is JSON: floors carry heights in meters, walls as
//! `[[x1,y1],[x2,y2]]` pairs, zones as polygons with kind-specific
//! attributes, and beacons as id/position/kind records. A floor either lists
//! its walls flat (partitions are compiled on load) or ships explicit
//! partitions. Parse errors report line and column; structural errors report
//! the JSON path of the offending element.

use serde::{Deserialize, Serialize};

use super::{
    build_floor, Beacon, BeaconKind, Floor, MapError, MapMeta, MapModel, Partition, Wall, Zone,
    ZoneKind, DEFAULT_MAX_WALLS, DEFAULT_TARGET_AREA,
};
use crate::geom::{AxisBox, Point2};

type PointPair = [[f64; 2]; 2];

#[derive(Debug, Serialize, Deserialize)]
struct MapDoc {
    name: String,
    #[serde(default)]
    crs: String,
    #[serde(default = "default_max_walls")]
    max_walls_per_partition: usize,
    #[serde(default = "default_target_area")]
    target_partition_area: f64,
    floors: Vec<FloorDoc>,
}

fn default_max_walls() -> usize {
    DEFAULT_MAX_WALLS
}

fn default_target_area() -> f64 {
    DEFAULT_TARGET_AREA
}

#[derive(Debug, Serialize, Deserialize)]
struct FloorDoc {
    index: usize,
    height: f64,
    /// Flat wall list; partitions are compiled on load.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    walls: Vec<PointPair>,
    /// Explicit pre-partitioned layout; mutually exclusive with `walls`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    partitions: Vec<PartitionDoc>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    zones: Vec<ZoneDoc>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    beacons: Vec<BeaconDoc>,
}

#[derive(Debug, Serialize, Deserialize)]
struct PartitionDoc {
    id: usize,
    bounds: PointPair,
    walls: Vec<PointPair>,
    #[serde(default)]
    zones: Vec<usize>,
}

#[derive(Debug, Serialize, Deserialize)]
struct ZoneDoc {
    kind: String,
    polygon: Vec<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    step_length: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    exit_points: Option<Vec<[f64; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    weight_factor: Option<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
struct BeaconDoc {
    id: String,
    position: [f64; 2],
    kind: BeaconKind,
}

fn point(p: [f64; 2]) -> Point2 {
    Point2::new(p[0], p[1])
}

fn wall_from(pair: &PointPair, path: &str) -> Result<Wall, MapError> {
    Wall::new(point(pair[0]), point(pair[1])).map_err(|e| MapError::Invalid {
        path: path.to_string(),
        message: e.to_string(),
    })
}

fn zone_from(doc: &ZoneDoc, path: &str) -> Result<Zone, MapError> {
    let polygon: Vec<Point2> = doc.polygon.iter().map(|&p| point(p)).collect();
    let kind = match doc.kind.as_str() {
        "stairway" => ZoneKind::Stairway {
            step_length: doc.step_length.ok_or_else(|| MapError::Invalid {
                path: path.to_string(),
                message: "stairway zone requires step_length".into(),
            })?,
            exit_points: doc
                .exit_points
                .as_ref()
                .ok_or_else(|| MapError::Invalid {
                    path: path.to_string(),
                    message: "stairway zone requires exit_points".into(),
                })?
                .iter()
                .map(|&p| point(p))
                .collect(),
        },
        "high_accessibility" => {
            let weight_factor = doc.weight_factor.ok_or_else(|| MapError::Invalid {
                path: path.to_string(),
                message: "high_accessibility zone requires weight_factor".into(),
            })?;
            if weight_factor < 0.0 {
                return Err(MapError::Invalid {
                    path: path.to_string(),
                    message: "weight_factor must be non-negative".into(),
                });
            }
            ZoneKind::HighAccessibility { weight_factor }
        }
        "gnss_denied" => ZoneKind::GnssDenied,
        other => {
            return Err(MapError::Invalid {
                path: path.to_string(),
                message: format!("unknown zone kind {other:?}"),
            })
        }
    };
    Zone::new(polygon, kind).map_err(|e| MapError::Invalid {
        path: path.to_string(),
        message: e.to_string(),
    })
}

/// Parses and validates a map document.
pub fn from_json(text: &str) -> Result<MapModel, MapError> {
    let doc: MapDoc = serde_json::from_str(text).map_err(|e| MapError::Invalid {
        path: format!("line {}, column {}", e.line(), e.column()),
        message: e.to_string(),
    })?;

    let mut floors = Vec::with_capacity(doc.floors.len());
    for (fi, fdoc) in doc.floors.iter().enumerate() {
        let fpath = format!("floors[{fi}]");
        if !fdoc.walls.is_empty() && !fdoc.partitions.is_empty() {
            return Err(MapError::Invalid {
                path: fpath,
                message: "a floor lists either flat walls or explicit partitions, not both".into(),
            });
        }
        let zones = fdoc
            .zones
            .iter()
            .enumerate()
            .map(|(zi, z)| zone_from(z, &format!("{fpath}.zones[{zi}]")))
            .collect::<Result<Vec<_>, _>>()?;
        let beacons = fdoc
            .beacons
            .iter()
            .map(|b| Beacon {
                id: b.id.clone(),
                position: point(b.position),
                floor: fdoc.index,
                kind: b.kind,
            })
            .collect::<Vec<_>>();

        let floor = if fdoc.partitions.is_empty() {
            let walls = fdoc
                .walls
                .iter()
                .enumerate()
                .map(|(wi, w)| wall_from(w, &format!("{fpath}.walls[{wi}]")))
                .collect::<Result<Vec<_>, _>>()?;
            build_floor(
                fdoc.index,
                fdoc.height,
                walls,
                zones,
                beacons,
                doc.max_walls_per_partition,
                doc.target_partition_area,
            )?
        } else {
            let mut partitions = Vec::with_capacity(fdoc.partitions.len());
            for (pi, pdoc) in fdoc.partitions.iter().enumerate() {
                let ppath = format!("{fpath}.partitions[{pi}]");
                if pdoc.walls.len() > doc.max_walls_per_partition {
                    return Err(MapError::Invalid {
                        path: ppath,
                        message: format!(
                            "partition holds {} walls, cap is {}",
                            pdoc.walls.len(),
                            doc.max_walls_per_partition
                        ),
                    });
                }
                let walls = pdoc
                    .walls
                    .iter()
                    .enumerate()
                    .map(|(wi, w)| wall_from(w, &format!("{ppath}.walls[{wi}]")))
                    .collect::<Result<Vec<_>, _>>()?;
                partitions.push(Partition {
                    id: pdoc.id,
                    bounds: AxisBox::new(point(pdoc.bounds[0]), point(pdoc.bounds[1])),
                    walls,
                    zones: pdoc.zones.clone(),
                });
            }
            Floor {
                index: fdoc.index,
                height: fdoc.height,
                partitions,
                beacons,
                zones,
            }
        };
        floors.push(floor);
    }

    let model = MapModel {
        floors,
        meta: MapMeta {
            name: doc.name,
            crs: doc.crs,
        },
    };
    model.validate()?;
    Ok(model)
}

/// Serializes a map with explicit partitions, so a round trip reproduces the
/// exact partition layout.
pub fn to_json(map: &MapModel) -> String {
    let doc = MapDoc {
        name: map.meta.name.clone(),
        crs: map.meta.crs.clone(),
        max_walls_per_partition: DEFAULT_MAX_WALLS,
        target_partition_area: DEFAULT_TARGET_AREA,
        floors: map
            .floors
            .iter()
            .map(|f| FloorDoc {
                index: f.index,
                height: f.height,
                walls: vec![],
                partitions: f
                    .partitions
                    .iter()
                    .map(|p| PartitionDoc {
                        id: p.id,
                        bounds: [
                            [p.bounds.min.x, p.bounds.min.y],
                            [p.bounds.max.x, p.bounds.max.y],
                        ],
                        walls: p.walls.iter().map(|w| [[w.a.x, w.a.y], [w.b.x, w.b.y]]).collect(),
                        zones: p.zones.clone(),
                    })
                    .collect(),
                zones: f
                    .zones
                    .iter()
                    .map(|z| {
                        let polygon = z.polygon.iter().map(|p| [p.x, p.y]).collect();
                        match &z.kind {
                            ZoneKind::Stairway {
                                step_length,
                                exit_points,
                            } => ZoneDoc {
                                kind: "stairway".into(),
                                polygon,
                                step_length: Some(*step_length),
                                exit_points: Some(
                                    exit_points.iter().map(|p| [p.x, p.y]).collect(),
                                ),
                                weight_factor: None,
                            },
                            ZoneKind::HighAccessibility { weight_factor } => ZoneDoc {
                                kind: "high_accessibility".into(),
                                polygon,
                                step_length: None,
                                exit_points: None,
                                weight_factor: Some(*weight_factor),
                            },
                            ZoneKind::GnssDenied => ZoneDoc {
                                kind: "gnss_denied".into(),
                                polygon,
                                step_length: None,
                                exit_points: None,
                                weight_factor: None,
                            },
                        }
                    })
                    .collect(),
                beacons: f
                    .beacons
                    .iter()
                    .map(|b| BeaconDoc {
                        id: b.id.clone(),
                        position: [b.position.x, b.position.y],
                        kind: b.kind,
                    })
                    .collect(),
            })
            .collect(),
    };
    serde_json::to_string_pretty(&doc).expect("map serialization cannot fail")
}
