//! Compliant system-centric routing, boundedly rational non-compliant
//! routing, and the loop that lets the two react to each other.

mod interaction;
mod noncompliant;
mod system;
mod times;

pub use interaction::{iterate_interaction, RoundOutcome};
pub use noncompliant::{solve_noncompliant, NoncompliantFlows};
pub use system::{solve_system_routing, system_objective, SolveReport, SolverOptions};
pub use times::{
    compliant_trip_times, edge_loads, noncompliant_trip_times, trip_travel_times, travel_times,
    TravelTimeRule, TripTimes,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::{Network, NodeId};

/// Number of cognition levels (0, 1 and 2) in the non-compliant model.
pub const COGNITION_LEVELS: usize = 3;

/// Default road occupancy of a public transit passenger.
pub const PUBLIC_OCCUPANCY: f64 = 0.8;
/// Default road occupancy of a private vehicle passenger.
pub const PRIVATE_OCCUPANCY: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeKind {
    Public,
    /// Privately owned vehicles; the only mode that can be non-compliant.
    Private,
    Other,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModeSpec {
    pub name: String,
    pub kind: ModeKind,
    /// Cost per passenger mile.
    pub cost_per_mile: f64,
    /// Road units consumed per passenger.
    pub occupancy: f64,
    /// Accessibility threshold in seconds.
    pub time_threshold: f64,
    /// Planner weight in the system-centric objective.
    pub weight: f64,
}

impl ModeSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |field: &str, rule: &str| {
            Err(Error::Structure(format!(
                "mode '{}'.{field}: must be {rule}",
                self.name
            )))
        };
        if !(self.occupancy > 0.0 && self.occupancy.is_finite()) {
            return bad("occupancy", "finite and > 0");
        }
        if !(self.weight >= 0.0 && self.weight.is_finite()) {
            return bad("weight", "finite and >= 0");
        }
        if !(self.time_threshold > 0.0) {
            return bad("time_threshold", "> 0");
        }
        if !(self.cost_per_mile >= 0.0 && self.cost_per_mile.is_finite()) {
            return bad("cost_per_mile", "finite and >= 0");
        }
        Ok(())
    }
}

pub(crate) fn validate_modes(modes: &[ModeSpec]) -> Result<()> {
    if modes.is_empty() {
        return Err(Error::Structure("at least one mode is required".into()));
    }
    modes.iter().try_for_each(ModeSpec::validate)
}

/// Index of the private-vehicle mode, the one non-compliant drivers use.
pub fn private_mode(modes: &[ModeSpec]) -> Option<usize> {
    modes.iter().position(|m| m.kind == ModeKind::Private)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Trip {
    pub origin: NodeId,
    pub destination: NodeId,
}

/// Origin-destination pairs with compliant per-mode demand and
/// non-compliant per-level demand, in passengers per hour.
#[derive(Debug, Clone, PartialEq)]
pub struct TripTable {
    trips: Vec<Trip>,
    mode_count: usize,
    /// `[trip][mode]`
    compliant: Vec<Vec<f64>>,
    /// `[trip][level]`
    noncompliant: Vec<[f64; COGNITION_LEVELS]>,
}

impl TripTable {
    pub fn new(
        network: &Network,
        mode_count: usize,
        trips: Vec<Trip>,
        compliant: Vec<Vec<f64>>,
        noncompliant: Vec<[f64; COGNITION_LEVELS]>,
    ) -> Result<Self> {
        if compliant.len() != trips.len() || noncompliant.len() != trips.len() {
            return Err(Error::Structure(format!(
                "demand tables cover {} and {} trips, expected {}",
                compliant.len(),
                noncompliant.len(),
                trips.len()
            )));
        }
        for (n, trip) in trips.iter().enumerate() {
            if !network.contains_node(trip.origin) || !network.contains_node(trip.destination) {
                return Err(Error::Structure(format!(
                    "trips[{n}]: ({}, {}) references a missing node",
                    trip.origin, trip.destination
                )));
            }
            if trip.origin == trip.destination {
                return Err(Error::Structure(format!(
                    "trips[{n}]: origin equals destination ({})",
                    trip.origin
                )));
            }
            if compliant[n].len() != mode_count {
                return Err(Error::Structure(format!(
                    "trips[{n}]: {} compliant demands for {mode_count} modes",
                    compliant[n].len()
                )));
            }
            let all = compliant[n].iter().chain(noncompliant[n].iter());
            if all.into_iter().any(|d| !(d.is_finite() && *d >= 0.0)) {
                return Err(Error::Structure(format!(
                    "trips[{n}]: demands must be finite and >= 0"
                )));
            }
        }
        Ok(TripTable {
            trips,
            mode_count,
            compliant,
            noncompliant,
        })
    }

    pub fn empty(mode_count: usize) -> Self {
        TripTable {
            trips: Vec::new(),
            mode_count,
            compliant: Vec::new(),
            noncompliant: Vec::new(),
        }
    }

    pub fn trips(&self) -> &[Trip] {
        &self.trips
    }

    pub fn len(&self) -> usize {
        self.trips.len()
    }

    pub fn is_empty(&self) -> bool {
        self.trips.is_empty()
    }

    pub fn mode_count(&self) -> usize {
        self.mode_count
    }

    pub fn compliant(&self, mode: usize, trip: usize) -> f64 {
        self.compliant[trip][mode]
    }

    pub fn noncompliant(&self, level: usize, trip: usize) -> f64 {
        self.noncompliant[trip][level]
    }

    pub fn noncompliant_total(&self, trip: usize) -> f64 {
        self.noncompliant[trip].iter().sum()
    }

    /// Distinct origins in ascending order.
    pub fn origins(&self) -> Vec<NodeId> {
        let mut o: Vec<_> = self.trips.iter().map(|t| t.origin).collect();
        o.sort_unstable();
        o.dedup();
        o
    }
}

/// Compliant passenger flow per (mode, trip, edge) together with the
/// occupancy-weighted road load per edge.
#[derive(Debug, Clone, PartialEq)]
pub struct CompliantFlows {
    mode_count: usize,
    trip_count: usize,
    edge_count: usize,
    flows: Vec<f64>,
    aggregate: Vec<f64>,
}

impl CompliantFlows {
    pub fn zeros(mode_count: usize, trip_count: usize, edge_count: usize) -> Self {
        CompliantFlows {
            mode_count,
            trip_count,
            edge_count,
            flows: vec![0.0; mode_count * trip_count * edge_count],
            aggregate: vec![0.0; edge_count],
        }
    }

    /// Builds from `per_commodity[mode][trip][edge]`.
    pub fn from_parts(modes: &[ModeSpec], per_commodity: Vec<Vec<Vec<f64>>>) -> Result<Self> {
        let mode_count = per_commodity.len();
        if mode_count != modes.len() {
            return Err(Error::Structure(format!(
                "flows for {mode_count} modes, {} configured",
                modes.len()
            )));
        }
        let trip_count = per_commodity.first().map_or(0, Vec::len);
        let edge_count = per_commodity
            .first()
            .and_then(|t| t.first())
            .map_or(0, Vec::len);
        let mut out = CompliantFlows::zeros(mode_count, trip_count, edge_count);
        for (m, trips) in per_commodity.into_iter().enumerate() {
            if trips.len() != trip_count {
                return Err(Error::Structure("ragged per-trip flow table".into()));
            }
            for (n, edges) in trips.into_iter().enumerate() {
                if edges.len() != edge_count {
                    return Err(Error::Structure("ragged per-edge flow table".into()));
                }
                if edges.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
                    return Err(Error::Domain("flows must be finite and >= 0".into()));
                }
                out.flow_mut(m, n).copy_from_slice(&edges);
            }
        }
        out.refresh_aggregate(modes);
        Ok(out)
    }

    pub fn mode_count(&self) -> usize {
        self.mode_count
    }

    pub fn trip_count(&self) -> usize {
        self.trip_count
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    /// Per-edge flow of one (mode, trip) commodity.
    pub fn flow(&self, mode: usize, trip: usize) -> &[f64] {
        let start = (mode * self.trip_count + trip) * self.edge_count;
        &self.flows[start..start + self.edge_count]
    }

    pub(crate) fn flow_mut(&mut self, mode: usize, trip: usize) -> &mut [f64] {
        let start = (mode * self.trip_count + trip) * self.edge_count;
        &mut self.flows[start..start + self.edge_count]
    }

    /// `x^{ij} = sum_m sum_n h_m x^{ij}_{m,n}`
    pub fn aggregate(&self) -> &[f64] {
        &self.aggregate
    }

    /// Per-edge sum of flows of a single mode over all trips.
    pub fn mode_total(&self, mode: usize) -> Vec<f64> {
        let mut total = vec![0.0; self.edge_count];
        for n in 0..self.trip_count {
            for (t, x) in total.iter_mut().zip(self.flow(mode, n)) {
                *t += x;
            }
        }
        total
    }

    /// Per-edge `sum_m w_m sum_n x^{ij}_{m,n}`.
    pub fn weighted_usage(&self, modes: &[ModeSpec]) -> Vec<f64> {
        let mut usage = vec![0.0; self.edge_count];
        for (m, mode) in modes.iter().enumerate() {
            if mode.weight == 0.0 {
                continue;
            }
            for (u, x) in usage.iter_mut().zip(self.mode_total(m)) {
                *u += mode.weight * x;
            }
        }
        usage
    }

    pub(crate) fn refresh_aggregate(&mut self, modes: &[ModeSpec]) {
        let mut agg = vec![0.0; self.edge_count];
        for (m, mode) in modes.iter().enumerate().take(self.mode_count) {
            for (a, x) in agg.iter_mut().zip(self.mode_total(m)) {
                *a += mode.occupancy * x;
            }
        }
        self.aggregate = agg;
    }

    /// Largest violation of flow conservation for one commodity, as
    /// absolute passengers per hour.
    pub fn conservation_residual(
        &self,
        network: &Network,
        mode: usize,
        trip: usize,
        origin: NodeId,
        destination: NodeId,
        demand: f64,
    ) -> f64 {
        let mut balance = vec![0.0; network.node_count()];
        for (e, x) in self.flow(mode, trip).iter().enumerate() {
            let edge = network.edge(e);
            balance[edge.from] -= x;
            balance[edge.to] += x;
        }
        balance[origin] += demand;
        balance[destination] -= demand;
        balance.iter().fold(0.0, |acc, b| acc.max(b.abs()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{EdgeAttr, NodeAttr};

    fn mode(name: &str, kind: ModeKind, h: f64, w: f64) -> ModeSpec {
        ModeSpec {
            name: name.into(),
            kind,
            cost_per_mile: 1.0,
            occupancy: h,
            time_threshold: 600.0,
            weight: w,
        }
    }

    fn line() -> Network {
        Network::new(
            (0..3).map(NodeAttr::new).collect(),
            vec![EdgeAttr::new(0, 1, 1.0, 1.0), EdgeAttr::new(1, 2, 1.0, 1.0)],
        )
        .unwrap()
    }

    #[test]
    fn aggregate_is_occupancy_weighted() {
        let modes = vec![
            mode("bus", ModeKind::Public, 0.8, 0.5),
            mode("car", ModeKind::Private, 1.0, 0.5),
        ];
        let flows = CompliantFlows::from_parts(
            &modes,
            vec![vec![vec![10.0, 0.0]], vec![vec![5.0, 5.0]]],
        )
        .unwrap();
        assert_eq!(flows.aggregate(), &[13.0, 5.0]);
        assert_eq!(flows.weighted_usage(&modes), vec![7.5, 2.5]);
        assert_eq!(private_mode(&modes), Some(1));
    }

    #[test]
    fn trip_table_validation() {
        let net = line();
        let t = |o, d| Trip {
            origin: o,
            destination: d,
        };
        assert!(TripTable::new(&net, 1, vec![t(0, 2)], vec![vec![1.0]], vec![[0.0; 3]]).is_ok());
        assert!(TripTable::new(&net, 1, vec![t(0, 0)], vec![vec![1.0]], vec![[0.0; 3]]).is_err());
        assert!(TripTable::new(&net, 1, vec![t(0, 9)], vec![vec![1.0]], vec![[0.0; 3]]).is_err());
        assert!(TripTable::new(&net, 1, vec![t(0, 2)], vec![vec![-1.0]], vec![[0.0; 3]]).is_err());
        assert!(TripTable::new(&net, 2, vec![t(0, 2)], vec![vec![1.0]], vec![[0.0; 3]]).is_err());
        assert!(
            TripTable::new(&net, 1, vec![t(0, 2)], vec![vec![1.0]], vec![[0.0, f64::NAN, 0.0]])
                .is_err()
        );
    }

    #[test]
    fn mode_validation() {
        assert!(mode("x", ModeKind::Other, 0.0, 1.0).validate().is_err());
        assert!(mode("x", ModeKind::Other, 1.0, -0.1).validate().is_err());
        let mut m = mode("x", ModeKind::Other, 1.0, 1.0);
        m.time_threshold = 0.0;
        assert!(m.validate().is_err());
    }

    #[test]
    fn conservation_residual_detects_leaks() {
        let net = line();
        let modes = vec![mode("car", ModeKind::Private, 1.0, 1.0)];
        let good = CompliantFlows::from_parts(&modes, vec![vec![vec![4.0, 4.0]]]).unwrap();
        assert_eq!(good.conservation_residual(&net, 0, 0, 0, 2, 4.0), 0.0);
        let leaky = CompliantFlows::from_parts(&modes, vec![vec![vec![4.0, 3.0]]]).unwrap();
        assert_eq!(leaky.conservation_residual(&net, 0, 0, 0, 2, 4.0), 1.0);
    }
}
