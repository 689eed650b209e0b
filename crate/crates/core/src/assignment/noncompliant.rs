//! Level-k routing of non-compliant private vehicles.
//!
//! A level-`l` driver takes the shortest path under the compliant load plus
//! the load of every strictly lower level. Drivers of one level and trip do
//! not anticipate each other, so their whole demand shares a single path.

use super::{TripTable, COGNITION_LEVELS};
use crate::error::{Error, Result};
use crate::network::{EdgeId, Network};
use crate::shortest_path::search;

#[derive(Debug, Clone, PartialEq)]
pub struct NoncompliantFlows {
    edge_count: usize,
    /// `[trip][level]`; `None` when that group has no demand.
    paths: Vec<[Option<Vec<EdgeId>>; COGNITION_LEVELS]>,
    /// Per-level per-edge flow `q_l^{ij}`.
    level_flows: [Vec<f64>; COGNITION_LEVELS],
}

impl NoncompliantFlows {
    pub fn empty(trip_count: usize, edge_count: usize) -> Self {
        NoncompliantFlows {
            edge_count,
            paths: vec![Default::default(); trip_count],
            level_flows: std::array::from_fn(|_| vec![0.0; edge_count]),
        }
    }

    pub fn path(&self, level: usize, trip: usize) -> Option<&[EdgeId]> {
        self.paths[trip][level].as_deref()
    }

    /// 0/1 edge indicator of the path taken by a (level, trip) group.
    pub fn indicator(&self, level: usize, trip: usize) -> Vec<u8> {
        let mut a = vec![0; self.edge_count];
        for &e in self.path(level, trip).unwrap_or(&[]) {
            a[e] = 1;
        }
        a
    }

    pub fn level_flow(&self, level: usize) -> &[f64] {
        &self.level_flows[level]
    }

    /// `q^{ij} = sum_l sum_n q_{l,n} a^{ij}_{l,n}`
    pub fn total(&self) -> Vec<f64> {
        let mut q = vec![0.0; self.edge_count];
        for level in &self.level_flows {
            for (t, x) in q.iter_mut().zip(level) {
                *t += x;
            }
        }
        q
    }
}

pub fn solve_noncompliant(
    network: &Network,
    trips: &TripTable,
    compliant_aggregate: &[f64],
) -> Result<NoncompliantFlows> {
    let edge_count = network.edge_count();
    if compliant_aggregate.len() != edge_count {
        return Err(Error::Structure(format!(
            "compliant load has {} entries for {} edges",
            compliant_aggregate.len(),
            edge_count
        )));
    }
    if compliant_aggregate.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
        return Err(Error::Domain("compliant load must be finite and >= 0".into()));
    }

    let bpr = network.bpr();
    let origins = trips.origins();
    let mut out = NoncompliantFlows::empty(trips.len(), edge_count);
    // compliant load plus every level solved so far
    let mut anticipated = compliant_aggregate.to_vec();

    for level in 0..COGNITION_LEVELS {
        let costs: Vec<f64> = network
            .edges()
            .iter()
            .zip(&anticipated)
            .map(|(edge, &flow)| bpr.latency_unchecked(edge, flow))
            .collect();
        let mut level_flow = vec![0.0; edge_count];
        for &origin in &origins {
            let tree = search(network, &costs, origin);
            for (n, trip) in trips.trips().iter().enumerate() {
                let demand = trips.noncompliant(level, n);
                if trip.origin != origin || demand == 0.0 {
                    continue;
                }
                let path = tree.path_to(trip.destination).ok_or(Error::Unreachable {
                    trip: n,
                    origin: trip.origin,
                    destination: trip.destination,
                    level: Some(level),
                })?;
                for &e in &path.edges {
                    level_flow[e] += demand;
                }
                out.paths[n][level] = Some(path.edges);
            }
        }
        for (a, q) in anticipated.iter_mut().zip(&level_flow) {
            *a += q;
        }
        out.level_flows[level] = level_flow;
    }
    Ok(out)
}
