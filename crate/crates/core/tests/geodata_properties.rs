use mobeq_core::equity::{ServiceCatalog, ServiceType};
use mobeq_core::geodata::{count_pois, parse_isochrones, parse_pois, point_in_polygon, Isochrone, PoiRecord, Ring};
use proptest::prelude::*;

/// Star-shaped polygon about the origin with integer vertices.
fn star(radii: &[i32]) -> Option<Ring> {
    let n = radii.len();
    let vertices: Vec<(f64, f64)> = radii
        .iter()
        .enumerate()
        .map(|(k, &r)| {
            let a = std::f64::consts::TAU * k as f64 / n as f64;
            ((r as f64 * a.cos()).round(), (r as f64 * a.sin()).round())
        })
        .collect();
    Ring::new(vertices).ok()
}

fn iso(rings: Vec<Ring>) -> Isochrone {
    Isochrone {
        node: 0,
        mode: "walk".into(),
        threshold: 1.0,
        rings,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn translation_by_integers_keeps_counts(
        radii in prop::collection::vec(5i32..40, 3..12),
        points in prop::collection::vec((-45i32..45, -45i32..45, 0usize..3), 0..40),
        dx in -1000i32..1000,
        dy in -1000i32..1000,
    ) {
        let Some(ring) = star(&radii) else { return Ok(()) };
        let moved = Ring::new(
            ring.vertices().iter().map(|(x, y)| (x + dx as f64, y + dy as f64)).collect(),
        ).unwrap();
        let pois: Vec<PoiRecord> = points
            .iter()
            .map(|&(x, y, s)| PoiRecord { location: (x as f64, y as f64), service_type: s })
            .collect();
        let shifted: Vec<PoiRecord> = pois
            .iter()
            .map(|p| PoiRecord {
                location: (p.location.0 + dx as f64, p.location.1 + dy as f64),
                service_type: p.service_type,
            })
            .collect();
        for s in 0..3 {
            prop_assert_eq!(count_pois(&iso(vec![ring.clone()]), &pois, s), count_pois(&iso(vec![moved.clone()]), &shifted, s));
        }
    }

    #[test]
    fn counts_add_up_over_types(
        radii in prop::collection::vec(5i32..40, 3..12),
        points in prop::collection::vec((-45.0..45.0f64, -45.0..45.0f64, 0usize..4), 0..60),
    ) {
        let Some(ring) = star(&radii) else { return Ok(()) };
        let iso = iso(vec![ring.clone()]);
        let pois: Vec<PoiRecord> = points
            .iter()
            .map(|&(x, y, s)| PoiRecord { location: (x, y), service_type: s })
            .collect();
        let by_type: u64 = (0..4).map(|s| count_pois(&iso, &pois, s)).sum();
        let inside = pois.iter().filter(|p| point_in_polygon(p.location, &iso.rings)).count() as u64;
        prop_assert_eq!(by_type, inside);
    }
}

#[test]
fn vertices_and_edges_count_as_inside() {
    let square = Ring::new(vec![(0.0, 0.0), (4.0, 0.0), (4.0, 4.0), (0.0, 4.0)]).unwrap();
    for p in [(0.0, 0.0), (2.0, 0.0), (4.0, 2.0), (4.0, 4.0), (0.0, 3.0)] {
        assert!(point_in_polygon(p, std::slice::from_ref(&square)), "{p:?}");
    }
    assert!(!point_in_polygon((4.5, 2.0), &[square]));
}

#[test]
fn geojson_and_poi_table_parse_together() {
    let geojson = r#"{
      "type": "FeatureCollection",
      "features": [
        {"type": "Feature",
         "properties": {"node": 3, "mode": "bus", "threshold": 900},
         "geometry": {"type": "MultiPolygon", "coordinates": [
            [[[0,0],[10,0],[10,10],[0,10],[0,0]], [[4,4],[6,4],[6,6],[4,6],[4,4]]],
            [[[20,20],[22,20],[22,22],[20,22],[20,20]]]
         ]}}
      ]
    }"#;
    let isos = parse_isochrones(geojson).unwrap();
    assert_eq!(isos.len(), 1);
    assert_eq!((isos[0].node, isos[0].mode.as_str()), (3, "bus"));

    let catalog = ServiceCatalog::new(
        vec![
            ServiceType::with_default_priority("clinic", true),
            ServiceType::with_default_priority("park", false),
        ],
        4,
    )
    .unwrap();
    let table = "x;y;service_type\n1;1;clinic\n5;5;clinic\n21;21;clinic\n9;9;park\n30;30;park\n";
    let pois = parse_pois(table, &catalog).unwrap();
    // (5,5) falls in the hole, (21,21) in the second polygon
    assert_eq!(count_pois(&isos[0], &pois, 0), 2);
    assert_eq!(count_pois(&isos[0], &pois, 1), 1);
}
