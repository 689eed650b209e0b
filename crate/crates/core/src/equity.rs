//! Accessibility counts, the mobility index (MI) per node and the
//! population-weighted Gini-based mobility equity metric (MEM).

use serde::Serialize;

use crate::assignment::{ModeSpec, TripTable, TripTimes};
use crate::error::{Error, Result};
use crate::network::{Network, NodeAttr, NodeId};

/// Default priority of an essential service type.
pub const ESSENTIAL_PRIORITY: f64 = 2.0;
/// Default priority of a non-essential service type.
pub const NON_ESSENTIAL_PRIORITY: f64 = 1.0;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ServiceType {
    pub id: String,
    pub priority: f64,
    pub essential: bool,
}

impl ServiceType {
    pub fn with_default_priority(id: impl Into<String>, essential: bool) -> Self {
        ServiceType {
            id: id.into(),
            priority: if essential {
                ESSENTIAL_PRIORITY
            } else {
                NON_ESSENTIAL_PRIORITY
            },
            essential,
        }
    }
}

/// Service types and the number of services of each type located at
/// every node.
#[derive(Debug, Clone, PartialEq)]
pub struct ServiceCatalog {
    types: Vec<ServiceType>,
    /// `[node][type]`
    counts: Vec<Vec<u64>>,
}

impl ServiceCatalog {
    pub fn new(types: Vec<ServiceType>, node_count: usize) -> Result<Self> {
        for (k, t) in types.iter().enumerate() {
            if !(t.priority.is_finite() && t.priority >= 0.0) {
                return Err(Error::Structure(format!(
                    "services[{k}].priority: must be finite and >= 0"
                )));
            }
            if types[..k].iter().any(|o| o.id == t.id) {
                return Err(Error::Structure(format!(
                    "services[{k}].id: duplicate service type '{}'",
                    t.id
                )));
            }
        }
        let width = types.len();
        Ok(ServiceCatalog {
            types,
            counts: vec![vec![0; width]; node_count],
        })
    }

    pub fn types(&self) -> &[ServiceType] {
        &self.types
    }

    pub fn type_index(&self, id: &str) -> Result<usize> {
        self.types
            .iter()
            .position(|t| t.id == id)
            .ok_or_else(|| Error::Structure(format!("unknown service type '{id}'")))
    }

    pub fn node_count(&self) -> usize {
        self.counts.len()
    }

    pub fn set_count(&mut self, node: NodeId, service_type: usize, count: u64) -> Result<()> {
        let row = self
            .counts
            .get_mut(node)
            .ok_or_else(|| Error::Structure(format!("service count for missing node {node}")))?;
        let slot = row.get_mut(service_type).ok_or_else(|| {
            Error::Structure(format!("service type index {service_type} out of range"))
        })?;
        *slot = count;
        Ok(())
    }

    pub fn count(&self, node: NodeId, service_type: usize) -> u64 {
        self.counts[node][service_type]
    }
}

/// `sigma_{origin,m}^s(tau_m)`: services of one type at trip destinations
/// reachable from `origin` within the mode's threshold.
///
/// `t = tau` counts as reachable. A destination served by several trips is
/// counted once.
pub fn accessibility_count(
    trip_times: &TripTimes,
    trips: &TripTable,
    catalog: &ServiceCatalog,
    origin: NodeId,
    mode_index: usize,
    mode: &ModeSpec,
    service_type: &str,
) -> Result<f64> {
    let s = catalog.type_index(service_type)?;
    Ok(accessibility_by_index(
        trip_times, trips, catalog, origin, mode_index, mode, s,
    ))
}

fn accessibility_by_index(
    trip_times: &TripTimes,
    trips: &TripTable,
    catalog: &ServiceCatalog,
    origin: NodeId,
    mode_index: usize,
    mode: &ModeSpec,
    service_type: usize,
) -> f64 {
    let mut reached: Vec<NodeId> = trips
        .trips()
        .iter()
        .enumerate()
        .filter(|(n, trip)| {
            trip.origin == origin && trip_times.get(mode_index, *n) <= mode.time_threshold
        })
        .map(|(_, trip)| trip.destination)
        .collect();
    reached.sort_unstable();
    reached.dedup();
    reached
        .iter()
        .map(|&d| catalog.count(d, service_type) as f64)
        .sum()
}

/// `eps_i = sum_m exp(-kappa_i c_m) sum_s beta^s sigma_{i,m}^s`, with
/// `sigma` indexed `[mode][service type]`.
pub fn mobility_index(
    node: &NodeAttr,
    modes: &[ModeSpec],
    sigma: &[Vec<f64>],
    catalog: &ServiceCatalog,
) -> Result<f64> {
    if sigma.len() != modes.len() {
        return Err(Error::Structure(format!(
            "accessibility given for {} modes, {} configured",
            sigma.len(),
            modes.len()
        )));
    }
    let mut mi = 0.0;
    for (mode, counts) in modes.iter().zip(sigma) {
        if counts.len() != catalog.types().len() {
            return Err(Error::Structure(format!(
                "mode '{}': accessibility given for {} service types, catalog has {}",
                mode.name,
                counts.len(),
                catalog.types().len()
            )));
        }
        if counts.iter().any(|c| !(c.is_finite() && *c >= 0.0)) {
            return Err(Error::Domain("accessibility counts must be >= 0".into()));
        }
        let inner: f64 = catalog
            .types()
            .iter()
            .zip(counts)
            .map(|(t, c)| t.priority * c)
            .sum();
        mi += (-node.price_sensitivity * mode.cost_per_mile).exp() * inner;
    }
    Ok(mi)
}

/// One minus the population-weighted Gini coefficient of `mi`.
pub fn mem(mi: &[f64], populations: &[f64]) -> Result<f64> {
    if mi.len() != populations.len() {
        return Err(Error::Structure(format!(
            "{} MI values for {} populations",
            mi.len(),
            populations.len()
        )));
    }
    if mi.iter().any(|e| !(e.is_finite() && *e >= 0.0)) {
        return Err(Error::Domain("MI values must be finite and >= 0".into()));
    }
    if populations.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
        return Err(Error::Domain("populations must be finite and >= 0".into()));
    }
    let total_pop: f64 = populations.iter().sum();
    let weighted: f64 = mi.iter().zip(populations).map(|(e, p)| e * p).sum();
    if total_pop == 0.0 {
        return Err(Error::UndefinedMetric("total population is zero".into()));
    }
    if weighted == 0.0 {
        return Err(Error::UndefinedMetric(
            "population-weighted MI sum is zero".into(),
        ));
    }
    let mut pairwise = 0.0;
    for (ei, pi) in mi.iter().zip(populations) {
        for (ej, pj) in mi.iter().zip(populations) {
            pairwise += pi * pj * (ei - ej).abs();
        }
    }
    Ok(1.0 - pairwise / (2.0 * total_pop * weighted))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NodeEquity {
    pub node: NodeId,
    pub population: f64,
    pub price_sensitivity: f64,
    pub mi: f64,
    /// Accessible service counts, `[mode][service type]`.
    pub accessibility: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquityReport {
    pub nodes: Vec<NodeEquity>,
    pub mem: f64,
}

impl EquityReport {
    pub fn mi(&self) -> Vec<f64> {
        self.nodes.iter().map(|n| n.mi).collect()
    }
}

/// MI at every trip origin from routed trip times, and the MEM across
/// origins weighted by their populations.
pub fn equity_report(
    network: &Network,
    modes: &[ModeSpec],
    trips: &TripTable,
    catalog: &ServiceCatalog,
    trip_times: &TripTimes,
) -> Result<EquityReport> {
    let nodes = node_equity(network, modes, trips, catalog, trip_times)?;
    let mi: Vec<f64> = nodes.iter().map(|n| n.mi).collect();
    let pops: Vec<f64> = nodes.iter().map(|n| n.population).collect();
    let mem = mem(&mi, &pops)?;
    Ok(EquityReport { nodes, mem })
}

/// Accessibility and MI of every trip origin, in node order.
pub fn node_equity(
    network: &Network,
    modes: &[ModeSpec],
    trips: &TripTable,
    catalog: &ServiceCatalog,
    trip_times: &TripTimes,
) -> Result<Vec<NodeEquity>> {
    if catalog.node_count() != network.node_count() {
        return Err(Error::Structure(format!(
            "service catalog covers {} nodes, network has {}",
            catalog.node_count(),
            network.node_count()
        )));
    }
    if trip_times.mode_count() != modes.len() || trip_times.trip_count() != trips.len() {
        return Err(Error::Structure("trip times do not match trips and modes".into()));
    }
    trips
        .origins()
        .into_iter()
        .map(|origin| {
            let accessibility: Vec<Vec<f64>> = modes
                .iter()
                .enumerate()
                .map(|(m, mode)| {
                    (0..catalog.types().len())
                        .map(|s| {
                            accessibility_by_index(trip_times, trips, catalog, origin, m, mode, s)
                        })
                        .collect()
                })
                .collect();
            let attr = &network.nodes()[origin];
            Ok(NodeEquity {
                node: origin,
                population: attr.population,
                price_sensitivity: attr.price_sensitivity,
                mi: mobility_index(attr, modes, &accessibility, catalog)?,
                accessibility,
            })
        })
        .collect::<Result<Vec<_>>>()
}
