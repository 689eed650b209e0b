use std::collections::BTreeMap;

use mobeq_core::assignment::ModeKind;
use mobeq_core::scenario::{
    gen_grid, EdgeRecord, Experiment, GridSpec, ModeRecord, NodeRecord, ScenarioFile,
    ServiceRecord, TripRecord, Units,
};
use mobeq_core::Error;
use proptest::prelude::*;

prop_compose! {
    fn scenario_file()(n in 2usize..6)
        (n in Just(n),
         pops in prop::collection::vec(0.0..1e4f64, n),
         kappas in prop::collection::vec(0.0..3.0f64, n),
         edges in prop::collection::vec((0usize..6, 0usize..6, 0.1..500.0f64, 1.0..3000.0f64), 1..12),
         demand in prop::collection::vec(0.0..900.0f64, 1..4),
         share in 0.0..=1.0f64,
         rate in 0.0..=1.0f64,
         counts in prop::collection::vec(0u64..4, n),
         time in prop_oneof![Just("s"), Just("min"), Just("h")])
        -> ScenarioFile {
        let nodes = (0..n)
            .map(|i| NodeRecord {
                id: i,
                population: pops[i],
                price_sensitivity: kappas[i],
                x: Some(i as f64 * 400.0),
                y: Some(0.0),
                services: if counts[i] > 0 {
                    BTreeMap::from([("clinic".to_string(), counts[i])])
                } else {
                    BTreeMap::new()
                },
            })
            .collect();
        let edges = edges
            .into_iter()
            .map(|(a, b, t, c)| (a % n, b % n, t, c))
            .filter(|(a, b, _, _)| a != b)
            .map(|(from, to, free_flow_time, capacity)| EdgeRecord { from, to, free_flow_time, capacity })
            .collect();
        let trips = demand
            .iter()
            .enumerate()
            .map(|(k, &d)| TripRecord {
                origin: k % n,
                destination: (k + 1) % n,
                demand: Some(d),
                compliant: None,
                noncompliant: None,
            })
            .collect();
        ScenarioFile {
            units: Units { time: time.to_string(), ..Units::default() },
            experiment: Experiment {
                public_share: share,
                noncompliance_rate: rate,
                gamma: Some(120.0),
                ..Experiment::default()
            },
            nodes,
            edges,
            modes: vec![
                ModeRecord {
                    name: "bus".into(),
                    kind: ModeKind::Public,
                    cost_per_mile: 0.4,
                    occupancy: 0.8,
                    time_threshold: 20.0,
                    weight: 0.6,
                },
                ModeRecord {
                    name: "car".into(),
                    kind: ModeKind::Private,
                    cost_per_mile: 1.7,
                    occupancy: 1.0,
                    time_threshold: 15.0,
                    weight: 0.4,
                },
            ],
            services: vec![ServiceRecord { id: "clinic".into(), essential: true, priority: None }],
            trips,
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn text_round_trip_preserves_the_scenario(file in scenario_file()) {
        let text = file.to_toml().unwrap();
        let back = ScenarioFile::from_toml(&text).unwrap();
        prop_assert_eq!(&back, &file);
        prop_assert_eq!(back.build().unwrap(), file.build().unwrap());
    }

    #[test]
    fn split_demand_sums_to_the_trip_total(file in scenario_file()) {
        let sc = file.build().unwrap();
        for (n, rec) in file.trips.iter().enumerate() {
            let total = sc.trips.compliant(0, n) + sc.trips.compliant(1, n) + sc.trips.noncompliant_total(n);
            prop_assert!((total - rec.demand.unwrap()).abs() <= 1e-9 * rec.demand.unwrap().max(1.0));
        }
    }
}

#[test]
fn shipped_grid_generator_matches_defaults() {
    let file = gen_grid(&GridSpec::default()).unwrap();
    let sc = file.build().unwrap();
    assert_eq!(sc.network.node_count(), 16);
    assert_eq!(sc.network.edge_count(), 84);
    assert_eq!(sc.trips.len(), 15);
}

#[test]
fn unknown_mode_in_trip_is_named() {
    let mut file = gen_grid(&GridSpec::default()).unwrap();
    file.trips[2].demand = None;
    file.trips[2].compliant = Some(BTreeMap::from([("tram".to_string(), 5.0)]));
    match file.build() {
        Err(Error::Structure(msg)) => assert!(msg.contains("trips[2].compliant") && msg.contains("tram")),
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn toml_errors_report_line_and_column() {
    let text = "[[nodes]]\nid = 0\n\n[[nodes]]\nid = -\n";
    let err = ScenarioFile::from_toml(text).unwrap_err().to_string();
    assert!(err.contains("line 5"), "{err}");
}
