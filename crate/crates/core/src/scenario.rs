//! Human-editable TOML scenario files and the grid scenario generator.
//!
//! A scenario declares its units, the road network, the modes, the service
//! types and where they are, the trips, and the experiment settings. Trip
//! demand is either given per mode and per cognition level, or as a single
//! passenger total that the experiment's public-transit share and
//! non-compliance rate split up.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::assignment::{
    ModeKind, ModeSpec, SolverOptions, TravelTimeRule, Trip, TripTable, COGNITION_LEVELS,
    PRIVATE_OCCUPANCY, PUBLIC_OCCUPANCY,
};
use crate::equity::{ServiceCatalog, ServiceType, ESSENTIAL_PRIORITY, NON_ESSENTIAL_PRIORITY};
use crate::error::{Error, Result};
use crate::network::{EdgeAttr, Network, NodeAttr};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Units {
    /// `s`, `min` or `h`; applies to free-flow times and thresholds.
    pub time: String,
    /// Label only: `pax/h` or `veh/h`.
    pub flow: String,
    /// `m` or `km`; applies to node coordinates.
    pub length: String,
}

impl Default for Units {
    fn default() -> Self {
        Units {
            time: "s".into(),
            flow: "pax/h".into(),
            length: "m".into(),
        }
    }
}

impl Units {
    fn seconds_per_unit(&self) -> Result<f64> {
        match self.time.as_str() {
            "s" => Ok(1.0),
            "min" => Ok(60.0),
            "h" => Ok(3600.0),
            other => Err(Error::Parse(format!(
                "units.time: unsupported unit '{other}' (expected s, min or h)"
            ))),
        }
    }

    fn meters_per_unit(&self) -> Result<f64> {
        match self.length.as_str() {
            "m" => Ok(1.0),
            "km" => Ok(1000.0),
            other => Err(Error::Parse(format!(
                "units.length: unsupported unit '{other}' (expected m or km)"
            ))),
        }
    }

    fn check_flow(&self) -> Result<()> {
        match self.flow.as_str() {
            "pax/h" | "veh/h" => Ok(()),
            other => Err(Error::Parse(format!(
                "units.flow: unsupported unit '{other}' (expected pax/h or veh/h)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeRecord {
    pub id: usize,
    #[serde(default)]
    pub population: f64,
    #[serde(default)]
    pub price_sensitivity: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub y: Option<f64>,
    /// Number of services of each type located at this node.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub services: BTreeMap<String, u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeRecord {
    pub from: usize,
    pub to: usize,
    pub free_flow_time: f64,
    pub capacity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeRecord {
    pub name: String,
    pub kind: ModeKind,
    pub cost_per_mile: f64,
    pub occupancy: f64,
    pub time_threshold: f64,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ServiceRecord {
    pub id: String,
    #[serde(default)]
    pub essential: bool,
    /// Defaults to 2 for essential and 1 for non-essential types.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub priority: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TripRecord {
    pub origin: usize,
    pub destination: usize,
    /// Total passengers per hour, split by the experiment settings.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub demand: Option<f64>,
    /// Explicit compliant demand by mode name.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub compliant: Option<BTreeMap<String, f64>>,
    /// Explicit non-compliant demand for levels 0, 1 and 2.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noncompliant: Option<[f64; COGNITION_LEVELS]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Experiment {
    /// Fraction of each trip's total demand that rides public transit.
    pub public_share: f64,
    /// Fraction of private-vehicle demand that ignores the planner.
    pub noncompliance_rate: f64,
    /// How non-compliant demand divides across levels 0, 1, 2.
    pub level_split: [f64; COGNITION_LEVELS],
    pub rounds: usize,
    pub tol: f64,
    pub max_iters: usize,
    /// Gap cap for weight optimization, seconds (in `units.time`).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    pub resolution: usize,
    pub travel_time: TravelTimeRule,
}

impl Default for Experiment {
    fn default() -> Self {
        Experiment {
            public_share: 0.5,
            noncompliance_rate: 0.0,
            level_split: [1.0 / 3.0; COGNITION_LEVELS],
            rounds: 2,
            tol: 1e-4,
            max_iters: 500,
            gamma: None,
            resolution: 21,
            travel_time: TravelTimeRule::default(),
        }
    }
}

impl Experiment {
    pub fn solver(&self) -> SolverOptions {
        SolverOptions {
            tol: self.tol,
            max_iters: self.max_iters,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    #[serde(default)]
    pub units: Units,
    #[serde(default)]
    pub experiment: Experiment,
    pub nodes: Vec<NodeRecord>,
    #[serde(default)]
    pub edges: Vec<EdgeRecord>,
    pub modes: Vec<ModeRecord>,
    #[serde(default)]
    pub services: Vec<ServiceRecord>,
    #[serde(default)]
    pub trips: Vec<TripRecord>,
}

/// Validated in-memory model built from a [`ScenarioFile`]. Times are in
/// seconds.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub network: Network,
    pub modes: Vec<ModeSpec>,
    pub trips: TripTable,
    pub catalog: ServiceCatalog,
    pub experiment: Experiment,
}

impl ScenarioFile {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Parse(e.to_string().trim_end().to_string()))
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Parse(format!("serializing scenario: {e}")))
    }

    pub fn build(&self) -> Result<Scenario> {
        self.units.check_flow()?;
        let sec = self.units.seconds_per_unit()?;
        let meters = self.units.meters_per_unit()?;

        let mut order: Vec<usize> = (0..self.nodes.len()).collect();
        order.sort_by_key(|&k| self.nodes[k].id);
        let mut nodes = Vec::with_capacity(order.len());
        for (expected, &k) in order.iter().enumerate() {
            let rec = &self.nodes[k];
            if rec.id != expected {
                return Err(Error::Structure(format!(
                    "nodes[{k}].id: ids must be unique and cover 0..{} (found {})",
                    self.nodes.len(),
                    rec.id
                )));
            }
            let position = match (rec.x, rec.y) {
                (Some(x), Some(y)) => Some((x * meters, y * meters)),
                (None, None) => None,
                _ => {
                    return Err(Error::Structure(format!(
                        "nodes[{k}]: x and y must be given together"
                    )))
                }
            };
            nodes.push(NodeAttr {
                id: rec.id,
                population: rec.population,
                price_sensitivity: rec.price_sensitivity,
                position,
            });
        }
        let edges = self
            .edges
            .iter()
            .map(|e| EdgeAttr::new(e.from, e.to, e.free_flow_time * sec, e.capacity))
            .collect();
        let network = Network::new(nodes, edges)?;

        let modes: Vec<ModeSpec> = self
            .modes
            .iter()
            .map(|m| ModeSpec {
                name: m.name.clone(),
                kind: m.kind,
                cost_per_mile: m.cost_per_mile,
                occupancy: m.occupancy,
                time_threshold: m.time_threshold * sec,
                weight: m.weight,
            })
            .collect();
        if modes.is_empty() {
            return Err(Error::Structure("modes: at least one mode is required".into()));
        }
        for (k, m) in modes.iter().enumerate() {
            m.validate()
                .map_err(|e| Error::Structure(format!("modes[{k}]: {e}")))?;
            if modes[..k].iter().any(|o| o.name == m.name) {
                return Err(Error::Structure(format!(
                    "modes[{k}].name: duplicate mode '{}'",
                    m.name
                )));
            }
        }
        if modes.iter().filter(|m| m.kind == ModeKind::Private).count() > 1 {
            return Err(Error::Structure(
                "modes: at most one mode may be private".into(),
            ));
        }

        let types = self
            .services
            .iter()
            .map(|s| ServiceType {
                id: s.id.clone(),
                priority: s.priority.unwrap_or(if s.essential {
                    ESSENTIAL_PRIORITY
                } else {
                    NON_ESSENTIAL_PRIORITY
                }),
                essential: s.essential,
            })
            .collect();
        let mut catalog = ServiceCatalog::new(types, network.node_count())?;
        for (k, rec) in self.nodes.iter().enumerate() {
            for (id, &count) in &rec.services {
                let s = catalog.type_index(id).map_err(|_| {
                    Error::Structure(format!("nodes[{k}].services: unknown service type '{id}'"))
                })?;
                catalog.set_count(rec.id, s, count)?;
            }
        }

        let trips = self.build_trips(&network, &modes)?;
        self.check_experiment()?;
        let mut experiment = self.experiment.clone();
        experiment.gamma = experiment.gamma.map(|g| g * sec);

        Ok(Scenario {
            network,
            modes,
            trips,
            catalog,
            experiment,
        })
    }

    fn check_experiment(&self) -> Result<()> {
        let x = &self.experiment;
        let unit = |v: f64| (0.0..=1.0).contains(&v);
        if !unit(x.public_share) {
            return Err(Error::Structure("experiment.public_share: must lie in [0, 1]".into()));
        }
        if !unit(x.noncompliance_rate) {
            return Err(Error::Structure(
                "experiment.noncompliance_rate: must lie in [0, 1]".into(),
            ));
        }
        let split_sum: f64 = x.level_split.iter().sum();
        if x.level_split.iter().any(|s| !(*s >= 0.0)) || (split_sum - 1.0).abs() > 1e-9 {
            return Err(Error::Structure(
                "experiment.level_split: must be nonnegative and sum to 1".into(),
            ));
        }
        if x.rounds == 0 {
            return Err(Error::Structure("experiment.rounds: must be >= 1".into()));
        }
        if !(x.tol > 0.0) {
            return Err(Error::Structure("experiment.tol: must be > 0".into()));
        }
        if x.resolution < 2 {
            return Err(Error::Structure("experiment.resolution: must be >= 2".into()));
        }
        if let Some(g) = x.gamma {
            if !(g > 0.0) {
                return Err(Error::Structure("experiment.gamma: must be > 0".into()));
            }
        }
        Ok(())
    }

    fn build_trips(&self, network: &Network, modes: &[ModeSpec]) -> Result<TripTable> {
        let x = &self.experiment;
        let public = modes.iter().position(|m| m.kind == ModeKind::Public);
        let private = modes.iter().position(|m| m.kind == ModeKind::Private);
        let mut trips = Vec::with_capacity(self.trips.len());
        let mut compliant = Vec::with_capacity(self.trips.len());
        let mut noncompliant = Vec::with_capacity(self.trips.len());
        for (k, rec) in self.trips.iter().enumerate() {
            let mut per_mode = vec![0.0; modes.len()];
            let mut levels = [0.0; COGNITION_LEVELS];
            match (&rec.demand, &rec.compliant) {
                (Some(_), Some(_)) => {
                    return Err(Error::Structure(format!(
                        "trips[{k}]: give either demand or compliant, not both"
                    )))
                }
                (Some(total), None) => {
                    let (Some(pu), Some(pv)) = (public, private) else {
                        return Err(Error::Structure(format!(
                            "trips[{k}].demand: splitting a total needs one public and one private mode"
                        )));
                    };
                    if rec.noncompliant.is_some() {
                        return Err(Error::Structure(format!(
                            "trips[{k}]: noncompliant cannot be combined with a split total"
                        )));
                    }
                    let private_total = total * (1.0 - x.public_share);
                    per_mode[pu] = total * x.public_share;
                    per_mode[pv] = private_total * (1.0 - x.noncompliance_rate);
                    for (l, share) in x.level_split.iter().enumerate() {
                        levels[l] = private_total * x.noncompliance_rate * share;
                    }
                }
                (None, explicit) => {
                    for (name, &d) in explicit.iter().flatten() {
                        let m = modes.iter().position(|m| &m.name == name).ok_or_else(|| {
                            Error::Structure(format!(
                                "trips[{k}].compliant: unknown mode '{name}'"
                            ))
                        })?;
                        per_mode[m] = d;
                    }
                    if let Some(nc) = rec.noncompliant {
                        levels = nc;
                    }
                }
            }
            trips.push(Trip {
                origin: rec.origin,
                destination: rec.destination,
            });
            compliant.push(per_mode);
            noncompliant.push(levels);
        }
        TripTable::new(network, modes.len(), trips, compliant, noncompliant)
    }
}

/// Parameters of a rows x cols grid scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridSpec {
    pub rows: usize,
    pub cols: usize,
    pub diagonals: bool,
    /// Length of a straight link, meters. Diagonals are longer by sqrt(2).
    pub edge_length: f64,
    /// Mode-independent free-flow speed, meters per second.
    pub speed: f64,
    /// Capacity of every link, vehicles per hour.
    pub capacity: f64,
    pub origins: Vec<usize>,
    pub destinations: Vec<usize>,
    /// Total demand of each trip, passengers per hour; indexed like
    /// `origins`, one value applied to every destination.
    pub origin_demand: Vec<f64>,
    pub origin_population: Vec<f64>,
    pub origin_price_sensitivity: Vec<f64>,
    /// Services at each destination `(type, count)`, indexed like
    /// `destinations`.
    pub destination_services: Vec<Vec<(String, u64)>>,
    pub services: Vec<ServiceRecord>,
    pub modes: Vec<ModeRecord>,
    pub experiment: Experiment,
}

impl Default for GridSpec {
    /// Shipped 4 x 4 fixture with three origins and five destinations.
    fn default() -> Self {
        GridSpec {
            rows: 4,
            cols: 4,
            diagonals: true,
            edge_length: 400.0,
            speed: 5.0,
            capacity: 1200.0,
            origins: vec![0, 2, 8],
            destinations: vec![5, 6, 9, 10, 15],
            origin_demand: vec![350.0, 350.0, 350.0],
            origin_population: vec![1000.0, 1000.0, 1000.0],
            origin_price_sensitivity: vec![0.55, 1.0, 0.8],
            destination_services: vec![
                vec![("medical".into(), 1), ("grocery".into(), 2)],
                vec![("school".into(), 1), ("shopping".into(), 2)],
                vec![("medical".into(), 1), ("entertainment".into(), 1)],
                vec![("grocery".into(), 1), ("school".into(), 1)],
                vec![("shopping".into(), 1), ("entertainment".into(), 2)],
            ],
            services: vec![
                essential("medical"),
                essential("grocery"),
                essential("school"),
                leisure("shopping"),
                leisure("entertainment"),
            ],
            modes: vec![
                ModeRecord {
                    name: "public".into(),
                    kind: ModeKind::Public,
                    cost_per_mile: 0.5,
                    occupancy: PUBLIC_OCCUPANCY,
                    time_threshold: 290.0,
                    weight: 0.7,
                },
                ModeRecord {
                    name: "private".into(),
                    kind: ModeKind::Private,
                    cost_per_mile: 2.0,
                    occupancy: PRIVATE_OCCUPANCY,
                    time_threshold: 390.0,
                    weight: 0.3,
                },
            ],
            experiment: Experiment {
                noncompliance_rate: 0.3,
                ..Experiment::default()
            },
        }
    }
}

fn essential(id: &str) -> ServiceRecord {
    ServiceRecord {
        id: id.into(),
        essential: true,
        priority: None,
    }
}

fn leisure(id: &str) -> ServiceRecord {
    ServiceRecord {
        id: id.into(),
        essential: false,
        priority: None,
    }
}

/// Bidirectional grid, optionally with both diagonals in every cell, and
/// one trip from every origin to every destination.
pub fn gen_grid(spec: &GridSpec) -> Result<ScenarioFile> {
    let (rows, cols) = (spec.rows, spec.cols);
    if rows * cols < 2 {
        return Err(Error::Structure("grid: rows * cols must be >= 2".into()));
    }
    if !(spec.edge_length > 0.0 && spec.speed > 0.0 && spec.capacity > 0.0) {
        return Err(Error::Structure(
            "grid: edge_length, speed and capacity must be > 0".into(),
        ));
    }
    let count = rows * cols;
    for (name, list) in [("origins", &spec.origins), ("destinations", &spec.destinations)] {
        if let Some(bad) = list.iter().find(|&&v| v >= count) {
            return Err(Error::Structure(format!(
                "grid.{name}: node {bad} outside the {rows}x{cols} grid"
            )));
        }
    }
    let per_origin = |field: &str, len: usize| {
        if len != spec.origins.len() {
            Err(Error::Structure(format!(
                "grid.{field}: {len} values for {} origins",
                spec.origins.len()
            )))
        } else {
            Ok(())
        }
    };
    per_origin("origin_demand", spec.origin_demand.len())?;
    per_origin("origin_population", spec.origin_population.len())?;
    per_origin("origin_price_sensitivity", spec.origin_price_sensitivity.len())?;
    if !spec.destination_services.is_empty()
        && spec.destination_services.len() != spec.destinations.len()
    {
        return Err(Error::Structure(format!(
            "grid.destination_services: {} entries for {} destinations",
            spec.destination_services.len(),
            spec.destinations.len()
        )));
    }

    let id = |r: usize, c: usize| r * cols + c;
    let mut nodes: Vec<NodeRecord> = (0..count)
        .map(|v| NodeRecord {
            id: v,
            population: 0.0,
            price_sensitivity: 0.0,
            x: Some((v % cols) as f64 * spec.edge_length),
            y: Some((v / cols) as f64 * spec.edge_length),
            services: BTreeMap::new(),
        })
        .collect();
    for (k, &o) in spec.origins.iter().enumerate() {
        nodes[o].population = spec.origin_population[k];
        nodes[o].price_sensitivity = spec.origin_price_sensitivity[k];
    }
    for (k, services) in spec.destination_services.iter().enumerate() {
        let node = &mut nodes[spec.destinations[k]];
        for (ty, n) in services {
            *node.services.entry(ty.clone()).or_insert(0) += n;
        }
    }

    let straight = spec.edge_length / spec.speed;
    let diagonal = straight * std::f64::consts::SQRT_2;
    let mut edges = Vec::new();
    for r in 0..rows {
        for c in 0..cols {
            let from = id(r, c);
            let mut link = |rr: isize, cc: isize, time: f64| {
                if rr >= 0 && cc >= 0 && (rr as usize) < rows && (cc as usize) < cols {
                    edges.push(EdgeRecord {
                        from,
                        to: id(rr as usize, cc as usize),
                        free_flow_time: time,
                        capacity: spec.capacity,
                    });
                }
            };
            let (r, c) = (r as isize, c as isize);
            link(r, c + 1, straight);
            link(r, c - 1, straight);
            link(r + 1, c, straight);
            link(r - 1, c, straight);
            if spec.diagonals {
                link(r + 1, c + 1, diagonal);
                link(r + 1, c - 1, diagonal);
                link(r - 1, c + 1, diagonal);
                link(r - 1, c - 1, diagonal);
            }
        }
    }

    let mut trips = Vec::new();
    for (k, &o) in spec.origins.iter().enumerate() {
        for &d in &spec.destinations {
            if o == d {
                continue;
            }
            trips.push(TripRecord {
                origin: o,
                destination: d,
                demand: Some(spec.origin_demand[k]),
                compliant: None,
                noncompliant: None,
            });
        }
    }

    Ok(ScenarioFile {
        units: Units::default(),
        experiment: spec.experiment.clone(),
        nodes,
        edges,
        modes: spec.modes.clone(),
        services: spec.services.clone(),
        trips,
    })
}
