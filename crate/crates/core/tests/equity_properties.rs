use mobeq_core::assignment::{ModeKind, ModeSpec, Trip, TripTable, TripTimes};
use mobeq_core::equity::{accessibility_count, mem, mobility_index, ServiceCatalog, ServiceType};
use mobeq_core::network::{EdgeAttr, Network, NodeAttr};
use proptest::prelude::*;

fn star_network(destinations: usize) -> Network {
    let nodes = (0..=destinations).map(NodeAttr::new).collect();
    let edges = (1..=destinations).map(|d| EdgeAttr::new(0, d, 1.0, 1.0)).collect();
    Network::new(nodes, edges).unwrap()
}

fn mode(cost: f64, tau: f64) -> ModeSpec {
    ModeSpec {
        name: "bus".into(),
        kind: ModeKind::Public,
        cost_per_mile: cost,
        occupancy: 0.8,
        time_threshold: tau,
        weight: 1.0,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn accessibility_grows_with_threshold(
        times in prop::collection::vec(0.0..100.0f64, 1..8),
        counts in prop::collection::vec(0u64..5, 8),
        tau in 0.0..100.0f64,
        extra in 0.0..50.0f64,
    ) {
        let k = times.len();
        let network = star_network(k);
        let trips = TripTable::new(
            &network,
            1,
            (1..=k).map(|d| Trip { origin: 0, destination: d }).collect(),
            vec![vec![1.0]; k],
            vec![[0.0; 3]; k],
        ).unwrap();
        let mut tt = TripTimes::new(1, k);
        for (n, t) in times.iter().enumerate() {
            tt.set(0, n, *t);
        }
        let mut catalog = ServiceCatalog::new(
            vec![ServiceType::with_default_priority("clinic", true)],
            k + 1,
        ).unwrap();
        for d in 1..=k {
            catalog.set_count(d, 0, counts[d - 1]).unwrap();
        }
        let low = accessibility_count(&tt, &trips, &catalog, 0, 0, &mode(1.0, tau), "clinic").unwrap();
        let high = accessibility_count(&tt, &trips, &catalog, 0, 0, &mode(1.0, tau + extra), "clinic").unwrap();
        prop_assert!(low <= high);
        let all: u64 = counts[..k].iter().sum();
        prop_assert!(high <= all as f64);
    }

    #[test]
    fn mi_falls_with_price_sensitivity(
        sigma in prop::collection::vec(0.0..20.0f64, 2),
        kappa in 0.0..3.0f64,
        bump in 0.0..3.0f64,
        cost in 0.0..5.0f64,
    ) {
        let catalog = ServiceCatalog::new(
            vec![
                ServiceType::with_default_priority("clinic", true),
                ServiceType::with_default_priority("cafe", false),
            ],
            1,
        ).unwrap();
        let modes = vec![mode(cost, 10.0)];
        let node = |k: f64| NodeAttr { id: 0, population: 1.0, price_sensitivity: k, position: None };
        let a = mobility_index(&node(kappa), &modes, std::slice::from_ref(&sigma), &catalog).unwrap();
        let b = mobility_index(&node(kappa + bump), &modes, std::slice::from_ref(&sigma), &catalog).unwrap();
        prop_assert!(b <= a);
    }

    #[test]
    fn mem_lies_in_unit_interval(
        pairs in prop::collection::vec((0.0..100.0f64, 0.01..100.0f64), 1..12),
    ) {
        let (mi, pop): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
        prop_assume!(mi.iter().any(|&e| e > 0.0));
        let m = mem(&mi, &pop).unwrap();
        prop_assert!((0.0..=1.0 + 1e-12).contains(&m));
    }
}

#[test]
fn single_holder_of_all_mobility() {
    // one of n equal-population nodes holds everything: MEM = 1/n
    for n in 1..=6 {
        let mut mi = vec![0.0; n];
        mi[0] = 3.0;
        let m = mem(&mi, &vec![1.0; n]).unwrap();
        assert!((m - 1.0 / n as f64).abs() < 1e-12);
    }
}
