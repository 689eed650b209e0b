//! Per-trip travel times on a loaded network.

use serde::{Deserialize, Serialize};

use super::{CompliantFlows, ModeSpec, NoncompliantFlows, TripTable, COGNITION_LEVELS};
use crate::error::{Error, Result};
use crate::network::Network;
use crate::shortest_path::search;

/// Travel time in seconds per (mode, trip); `f64::INFINITY` marks an
/// unreachable destination.
#[derive(Debug, Clone, PartialEq)]
pub struct TripTimes {
    mode_count: usize,
    values: Vec<f64>,
}

impl TripTimes {
    pub fn new(mode_count: usize, trip_count: usize) -> Self {
        TripTimes {
            mode_count,
            values: vec![f64::INFINITY; mode_count * trip_count],
        }
    }

    pub fn get(&self, mode: usize, trip: usize) -> f64 {
        self.values[trip * self.mode_count + mode]
    }

    pub fn set(&mut self, mode: usize, trip: usize, seconds: f64) {
        self.values[trip * self.mode_count + mode] = seconds;
    }

    pub fn mode_count(&self) -> usize {
        self.mode_count
    }

    pub fn trip_count(&self) -> usize {
        self.values.len().checked_div(self.mode_count).unwrap_or(0)
    }
}

/// How a compliant traveler's trip time is read off a loaded network.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TravelTimeRule {
    /// Shortest path time under the total load, identical across modes.
    ShortestLoaded,
    /// Flow-weighted mean time over the paths the planner assigned to the
    /// (mode, trip) commodity; shortest loaded time where it has no demand.
    #[default]
    FlowWeighted,
}

/// Total road load `x^{ij} + q^{ij}` per edge.
pub fn edge_loads(flows: &CompliantFlows, nonflows: &NoncompliantFlows) -> Vec<f64> {
    flows
        .aggregate()
        .iter()
        .zip(nonflows.total())
        .map(|(x, q)| x + q)
        .collect()
}

fn loaded_costs(
    network: &Network,
    flows: &CompliantFlows,
    nonflows: &NoncompliantFlows,
) -> Result<Vec<f64>> {
    if flows.edge_count() != network.edge_count() {
        return Err(Error::Structure(format!(
            "flows cover {} edges, network has {}",
            flows.edge_count(),
            network.edge_count()
        )));
    }
    Ok(network
        .loaded_costs(&edge_loads(flows, nonflows))?
        .as_slice()
        .to_vec())
}

fn check_shapes(flows: &CompliantFlows, trips: &TripTable, modes: &[ModeSpec]) -> Result<()> {
    if flows.trip_count() != trips.len() || flows.mode_count() != modes.len() {
        return Err(Error::Structure(format!(
            "flows cover {} modes x {} trips, expected {} x {}",
            flows.mode_count(),
            flows.trip_count(),
            modes.len(),
            trips.len()
        )));
    }
    Ok(())
}

/// Shortest-path time per (mode, trip) under the full compliant plus
/// non-compliant load.
pub fn trip_travel_times(
    network: &Network,
    flows: &CompliantFlows,
    nonflows: &NoncompliantFlows,
    trips: &TripTable,
    modes: &[ModeSpec],
) -> Result<TripTimes> {
    check_shapes(flows, trips, modes)?;
    let costs = loaded_costs(network, flows, nonflows)?;
    Ok(shortest_times(network, &costs, trips, modes.len()))
}

fn shortest_times(network: &Network, costs: &[f64], trips: &TripTable, modes: usize) -> TripTimes {
    let mut times = TripTimes::new(modes, trips.len());
    for origin in trips.origins() {
        let tree = search(network, costs, origin);
        for (n, trip) in trips.trips().iter().enumerate() {
            if trip.origin == origin {
                let t = tree.distance(trip.destination);
                for m in 0..modes {
                    times.set(m, n, t);
                }
            }
        }
    }
    times
}

/// Mean time experienced by each (mode, trip) commodity over the paths it
/// was assigned: `sum_e t_e x_{m,n,e} / alpha_{m,n}`.
pub fn compliant_trip_times(
    network: &Network,
    flows: &CompliantFlows,
    nonflows: &NoncompliantFlows,
    trips: &TripTable,
    modes: &[ModeSpec],
) -> Result<TripTimes> {
    check_shapes(flows, trips, modes)?;
    let costs = loaded_costs(network, flows, nonflows)?;
    let mut times = shortest_times(network, &costs, trips, modes.len());
    for m in 0..modes.len() {
        for n in 0..trips.len() {
            let demand = trips.compliant(m, n);
            if demand > 0.0 {
                let total: f64 = flows.flow(m, n).iter().zip(&costs).map(|(x, t)| x * t).sum();
                times.set(m, n, total / demand);
            }
        }
    }
    Ok(times)
}

pub fn travel_times(
    rule: TravelTimeRule,
    network: &Network,
    flows: &CompliantFlows,
    nonflows: &NoncompliantFlows,
    trips: &TripTable,
    modes: &[ModeSpec],
) -> Result<TripTimes> {
    match rule {
        TravelTimeRule::ShortestLoaded => trip_travel_times(network, flows, nonflows, trips, modes),
        TravelTimeRule::FlowWeighted => compliant_trip_times(network, flows, nonflows, trips, modes),
    }
}

/// Demand-weighted mean over levels of each level's path time under the
/// full load, per trip; `None` for trips without non-compliant demand.
pub fn noncompliant_trip_times(
    network: &Network,
    flows: &CompliantFlows,
    nonflows: &NoncompliantFlows,
    trips: &TripTable,
) -> Result<Vec<Option<f64>>> {
    let costs = loaded_costs(network, flows, nonflows)?;
    Ok((0..trips.len())
        .map(|n| {
            let total = trips.noncompliant_total(n);
            if total == 0.0 {
                return None;
            }
            let weighted: f64 = (0..COGNITION_LEVELS)
                .filter_map(|l| {
                    nonflows.path(l, n).map(|path| {
                        trips.noncompliant(l, n) * path.iter().map(|&e| costs[e]).sum::<f64>()
                    })
                })
                .sum();
            Some(weighted / total)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assignment::{ModeKind, Trip};
    use crate::network::{bpr_latency, EdgeAttr, NodeAttr};

    fn modes() -> Vec<ModeSpec> {
        vec![ModeSpec {
            name: "car".into(),
            kind: ModeKind::Private,
            cost_per_mile: 1.0,
            occupancy: 1.0,
            time_threshold: 600.0,
            weight: 1.0,
        }]
    }

    #[test]
    fn single_edge_time_is_bpr_time() {
        let net = Network::new(
            vec![NodeAttr::new(0), NodeAttr::new(1)],
            vec![EdgeAttr::new(0, 1, 2.0, 50.0)],
        )
        .unwrap();
        let modes = modes();
        let trips = TripTable::new(
            &net,
            1,
            vec![Trip {
                origin: 0,
                destination: 1,
            }],
            vec![vec![100.0]],
            vec![[0.0; 3]],
        )
        .unwrap();
        let flows = CompliantFlows::from_parts(&modes, vec![vec![vec![100.0]]]).unwrap();
        let nc = NoncompliantFlows::empty(1, 1);
        let t = trip_travel_times(&net, &flows, &nc, &trips, &modes).unwrap();
        assert!((t.get(0, 0) - 6.8).abs() < 1e-12);
        let t = compliant_trip_times(&net, &flows, &nc, &trips, &modes).unwrap();
        assert!((t.get(0, 0) - bpr_latency(net.edge(0), 100.0).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn unreachable_is_infinite_sentinel() {
        let net = Network::new(
            (0..3).map(NodeAttr::new).collect(),
            vec![EdgeAttr::new(0, 1, 2.0, 50.0)],
        )
        .unwrap();
        let modes = modes();
        let trips = TripTable::new(
            &net,
            1,
            vec![Trip {
                origin: 0,
                destination: 2,
            }],
            vec![vec![0.0]],
            vec![[0.0; 3]],
        )
        .unwrap();
        let flows = CompliantFlows::zeros(1, 1, 1);
        let nc = NoncompliantFlows::empty(1, 1);
        let t = trip_travel_times(&net, &flows, &nc, &trips, &modes).unwrap();
        assert_eq!(t.get(0, 0), f64::INFINITY);
    }
}
