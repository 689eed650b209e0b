//! Accessibility from precomputed isochrone polygons and POI tables.
//!
//! Coordinates are planar (already projected). Isochrones are read from a
//! GeoJSON subset: a `FeatureCollection` whose features carry `Polygon` or
//! `MultiPolygon` geometries and `node`, `mode` and `threshold` properties.
//! POIs are read from a delimited table with `x`, `y` and `service_type`
//! columns.

use serde::Serialize;
use serde_json::Value;

use crate::assignment::ModeSpec;
use crate::equity::{mobility_index, ServiceCatalog};
use crate::error::{Error, Result};
use crate::network::{NodeAttr, NodeId};

pub type Point = (f64, f64);

/// Simple closed ring, stored without the repeated closing vertex.
#[derive(Debug, Clone, PartialEq)]
pub struct Ring(Vec<Point>);

impl Ring {
    pub fn new(mut vertices: Vec<Point>) -> Result<Self> {
        if vertices.len() > 1 && vertices.first() == vertices.last() {
            vertices.pop();
        }
        if vertices.len() < 3 {
            return Err(Error::Structure(format!(
                "ring has {} distinct vertices, at least 3 required",
                vertices.len()
            )));
        }
        if vertices.iter().any(|(x, y)| !(x.is_finite() && y.is_finite())) {
            return Err(Error::Structure("ring vertex is not finite".into()));
        }
        let ring = Ring(vertices);
        if let Some((a, b)) = ring.first_self_intersection() {
            return Err(Error::Structure(format!(
                "ring is self-intersecting (segments {a} and {b})"
            )));
        }
        Ok(ring)
    }

    pub fn vertices(&self) -> &[Point] {
        &self.0
    }

    fn segments(&self) -> impl Iterator<Item = (Point, Point)> + '_ {
        let n = self.0.len();
        (0..n).map(move |i| (self.0[i], self.0[(i + 1) % n]))
    }

    fn first_self_intersection(&self) -> Option<(usize, usize)> {
        let n = self.0.len();
        let seg = |i: usize| (self.0[i], self.0[(i + 1) % n]);
        for i in 0..n {
            for j in i + 1..n {
                let adjacent = j == i + 1 || (i == 0 && j == n - 1);
                let (a, b) = seg(i);
                let (c, d) = seg(j);
                if adjacent {
                    // neighbours share one vertex; they may not fold back onto each other
                    let (shared, p, q) = if j == i + 1 { (b, a, d) } else { (a, b, c) };
                    if cross(shared, p, q) == 0.0 && dot(shared, p, q) > 0.0 {
                        return Some((i, j));
                    }
                } else if segments_intersect(a, b, c, d) {
                    return Some((i, j));
                }
            }
        }
        None
    }

    fn on_boundary(&self, p: Point) -> bool {
        self.segments().any(|(a, b)| on_segment(a, b, p))
    }

    /// Even-odd crossing test along a ray towards +x.
    fn crossings_odd(&self, (px, py): Point) -> bool {
        let mut inside = false;
        for ((ax, ay), (bx, by)) in self.segments() {
            if (ay > py) != (by > py) {
                let x_at = ax + (py - ay) * (bx - ax) / (by - ay);
                if px < x_at {
                    inside = !inside;
                }
            }
        }
        inside
    }
}

fn cross(o: Point, a: Point, b: Point) -> f64 {
    (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
}

fn dot(o: Point, a: Point, b: Point) -> f64 {
    (a.0 - o.0) * (b.0 - o.0) + (a.1 - o.1) * (b.1 - o.1)
}

fn on_segment(a: Point, b: Point, p: Point) -> bool {
    cross(a, b, p) == 0.0
        && p.0 >= a.0.min(b.0)
        && p.0 <= a.0.max(b.0)
        && p.1 >= a.1.min(b.1)
        && p.1 <= a.1.max(b.1)
}

fn segments_intersect(a: Point, b: Point, c: Point, d: Point) -> bool {
    let d1 = cross(c, d, a);
    let d2 = cross(c, d, b);
    let d3 = cross(a, b, c);
    let d4 = cross(a, b, d);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        return true;
    }
    on_segment(c, d, a) || on_segment(c, d, b) || on_segment(a, b, c) || on_segment(a, b, d)
}

/// Region reachable from `node` by `mode` within `threshold` seconds.
#[derive(Debug, Clone, PartialEq)]
pub struct Isochrone {
    pub node: NodeId,
    pub mode: String,
    pub threshold: f64,
    pub rings: Vec<Ring>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PoiRecord {
    pub location: Point,
    /// Index into the service catalog.
    pub service_type: usize,
}

/// Even-odd containment over all rings; points on any ring count as inside.
pub fn point_in_polygon(point: Point, rings: &[Ring]) -> bool {
    if rings.iter().any(|r| r.on_boundary(point)) {
        return true;
    }
    rings.iter().filter(|r| r.crossings_odd(point)).count() % 2 == 1
}

pub fn count_pois(isochrone: &Isochrone, pois: &[PoiRecord], service_type: usize) -> u64 {
    pois.iter()
        .filter(|p| p.service_type == service_type && point_in_polygon(p.location, &isochrone.rings))
        .count() as u64
}

/// Accessible service counts `[mode][service type]` for one node.
pub fn accessibility_from_geodata(
    node: NodeId,
    modes: &[ModeSpec],
    isochrones: &[Isochrone],
    pois: &[PoiRecord],
    catalog: &ServiceCatalog,
) -> Result<Vec<Vec<f64>>> {
    modes
        .iter()
        .map(|mode| {
            let iso = isochrones
                .iter()
                .find(|i| i.node == node && i.mode == mode.name)
                .ok_or_else(|| Error::MissingIsochrone {
                    node,
                    mode: mode.name.clone(),
                })?;
            Ok((0..catalog.types().len())
                .map(|s| count_pois(iso, pois, s) as f64)
                .collect())
        })
        .collect()
}

pub fn mi_from_geodata(
    node: &NodeAttr,
    modes: &[ModeSpec],
    isochrones: &[Isochrone],
    pois: &[PoiRecord],
    catalog: &ServiceCatalog,
) -> Result<f64> {
    let sigma = accessibility_from_geodata(node.id, modes, isochrones, pois, catalog)?;
    mobility_index(node, modes, &sigma, catalog)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GeoNodeEquity {
    pub node: NodeId,
    pub mi: f64,
    /// `[mode][service type]`
    pub accessibility: Vec<Vec<f64>>,
}

fn parse_ring(value: &Value, at: &str) -> Result<Ring> {
    let coords = value
        .as_array()
        .ok_or_else(|| Error::Parse(format!("{at}: ring must be an array of positions")))?;
    let vertices = coords
        .iter()
        .enumerate()
        .map(|(k, pos)| {
            let xy = pos.as_array().filter(|a| a.len() >= 2);
            match xy.and_then(|a| Some((a[0].as_f64()?, a[1].as_f64()?))) {
                Some(p) => Ok(p),
                None => Err(Error::Parse(format!("{at}[{k}]: position must be [x, y]"))),
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ring::new(vertices).map_err(|e| match e {
        Error::Structure(msg) => Error::Structure(format!("{at}: {msg}")),
        other => other,
    })
}

fn parse_polygon(value: &Value, at: &str) -> Result<Vec<Ring>> {
    value
        .as_array()
        .ok_or_else(|| Error::Parse(format!("{at}: polygon must be an array of rings")))?
        .iter()
        .enumerate()
        .map(|(k, ring)| parse_ring(ring, &format!("{at}[{k}]")))
        .collect()
}

pub fn parse_isochrones(text: &str) -> Result<Vec<Isochrone>> {
    let doc: Value =
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("isochrones: {e}")))?;
    let features = match doc.get("type").and_then(Value::as_str) {
        Some("FeatureCollection") => doc
            .get("features")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::Parse("isochrones: missing 'features' array".into()))?
            .clone(),
        Some("Feature") => vec![doc],
        _ => {
            return Err(Error::Parse(
                "isochrones: expected a FeatureCollection or Feature".into(),
            ))
        }
    };
    features
        .iter()
        .enumerate()
        .map(|(k, f)| {
            let at = format!("features[{k}]");
            let props = f
                .get("properties")
                .ok_or_else(|| Error::Parse(format!("{at}: missing properties")))?;
            let node = props
                .get("node")
                .and_then(Value::as_u64)
                .ok_or_else(|| Error::Parse(format!("{at}.properties.node: expected integer")))?
                as NodeId;
            let mode = props
                .get("mode")
                .and_then(Value::as_str)
                .ok_or_else(|| Error::Parse(format!("{at}.properties.mode: expected string")))?
                .to_string();
            let threshold = props
                .get("threshold")
                .and_then(Value::as_f64)
                .ok_or_else(|| {
                    Error::Parse(format!("{at}.properties.threshold: expected number"))
                })?;
            let geometry = f
                .get("geometry")
                .ok_or_else(|| Error::Parse(format!("{at}: missing geometry")))?;
            let coords = geometry
                .get("coordinates")
                .ok_or_else(|| Error::Parse(format!("{at}.geometry: missing coordinates")))?;
            let rings = match geometry.get("type").and_then(Value::as_str) {
                Some("Polygon") => parse_polygon(coords, &format!("{at}.geometry.coordinates"))?,
                Some("MultiPolygon") => {
                    let polys = coords.as_array().ok_or_else(|| {
                        Error::Parse(format!("{at}.geometry.coordinates: expected array"))
                    })?;
                    let mut rings = Vec::new();
                    for (p, poly) in polys.iter().enumerate() {
                        rings.extend(parse_polygon(
                            poly,
                            &format!("{at}.geometry.coordinates[{p}]"),
                        )?);
                    }
                    rings
                }
                other => {
                    return Err(Error::Parse(format!(
                        "{at}.geometry.type: unsupported geometry {other:?}"
                    )))
                }
            };
            Ok(Isochrone {
                node,
                mode,
                threshold,
                rings,
            })
        })
        .collect()
}

/// Reads a POI table with a header naming `x`, `y` and `service_type`.
/// The delimiter (comma, semicolon or tab) is taken from the header line.
pub fn parse_pois(text: &str, catalog: &ServiceCatalog) -> Result<Vec<PoiRecord>> {
    let header = text.lines().next().unwrap_or("");
    let delimiter = if header.contains('\t') {
        b'\t'
    } else if header.contains(';') {
        b';'
    } else {
        b','
    };
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(delimiter)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| Error::Parse(format!("pois: {e}")))?
        .clone();
    let column = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Parse(format!("pois: missing column '{name}'")))
    };
    let (cx, cy, cs) = (column("x")?, column("y")?, column("service_type")?);
    let mut pois = Vec::new();
    for (k, record) in reader.records().enumerate() {
        let line = k + 2;
        let record = record.map_err(|e| Error::Parse(format!("pois line {line}: {e}")))?;
        let number = |c: usize, name: &str| {
            record
                .get(c)
                .and_then(|v| v.parse::<f64>().ok())
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::Parse(format!("pois line {line}: bad {name}")))
        };
        let location = (number(cx, "x")?, number(cy, "y")?);
        let kind = record.get(cs).unwrap_or("");
        let service_type = catalog
            .type_index(kind)
            .map_err(|_| Error::Parse(format!("pois line {line}: unknown service type '{kind}'")))?;
        pois.push(PoiRecord {
            location,
            service_type,
        });
    }
    Ok(pois)
}
