//! Command implementations behind the `mobeq` binary.
//!
//! Each command reads its inputs, runs the core pipeline and writes
//! delimiter-separated tables plus one JSON summary into an output
//! directory. The returned values mirror what was written so callers can
//! inspect results without re-parsing files.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use mobeq_core::assignment::{
    edge_loads, iterate_interaction, noncompliant_trip_times, private_mode, travel_times,
    RoundOutcome, TripTimes,
};
use mobeq_core::bilevel::{mean_mode_times, optimize_weights, tt_gap, SweepConfig, SweepResult};
use mobeq_core::equity::{mem, node_equity, NodeEquity};
use mobeq_core::geodata::{mi_from_geodata, parse_isochrones, parse_pois, GeoNodeEquity};
use mobeq_core::network::Network;
use mobeq_core::scenario::{gen_grid, GridSpec, Scenario, ScenarioFile};
use mobeq_core::Error;

/// Process exit status for each failure class.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Failure {
    Usage,
    Parse,
    Infeasible,
    Undefined,
}

impl Failure {
    pub fn exit_code(self) -> i32 {
        match self {
            Failure::Usage => 1,
            Failure::Parse => 2,
            Failure::Infeasible => 3,
            Failure::Undefined => 4,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Failure::Usage => "usage",
            Failure::Parse => "parse",
            Failure::Infeasible => "infeasible",
            Failure::Undefined => "undefined-metric",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CliError {
    pub kind: Failure,
    pub message: String,
}

impl CliError {
    pub fn new(kind: Failure, message: impl Into<String>) -> Self {
        CliError {
            kind,
            message: message.into(),
        }
    }

    /// Single-line JSON object for the diagnostic stream.
    pub fn to_json(&self) -> String {
        serde_json::json!({ "error": self.kind.label(), "message": self.message }).to_string()
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.kind.label(), self.message)
    }
}

impl std::error::Error for CliError {}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let kind = match e {
            Error::Unreachable { .. } | Error::DegenerateObjective => Failure::Infeasible,
            Error::UndefinedMetric(_) => Failure::Undefined,
            Error::Domain(_)
            | Error::Structure(_)
            | Error::Parse(_)
            | Error::MissingIsochrone { .. } => Failure::Parse,
        };
        CliError::new(kind, e.to_string())
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

fn read(path: &Path) -> CliResult<String> {
    fs::read_to_string(path)
        .map_err(|e| CliError::new(Failure::Parse, format!("{}: {e}", path.display())))
}

fn write(path: &Path, contents: &[u8]) -> CliResult<()> {
    fs::write(path, contents)
        .map_err(|e| CliError::new(Failure::Usage, format!("{}: {e}", path.display())))
}

fn prepare_dir(dir: &Path) -> CliResult<()> {
    fs::create_dir_all(dir)
        .map_err(|e| CliError::new(Failure::Usage, format!("{}: {e}", dir.display())))
}

/// Shortest exact decimal; infinities print as `inf`.
pub fn num(v: f64) -> String {
    format!("{v}")
}

fn opt_num(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

struct Table {
    writer: csv::Writer<Vec<u8>>,
}

impl Table {
    fn new<S: AsRef<str>>(header: &[S]) -> CliResult<Self> {
        let mut t = Table {
            writer: csv::Writer::from_writer(Vec::new()),
        };
        t.row(header)?;
        Ok(t)
    }

    fn row<S: AsRef<str>>(&mut self, fields: &[S]) -> CliResult<()> {
        self.writer
            .write_record(fields.iter().map(|f| f.as_ref()))
            .map_err(|e| CliError::new(Failure::Usage, e.to_string()))
    }

    fn save(self, path: &Path) -> CliResult<()> {
        let bytes = self
            .writer
            .into_inner()
            .map_err(|e| CliError::new(Failure::Usage, e.to_string()))?;
        write(path, &bytes)
    }
}

fn save_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::new(Failure::Usage, e.to_string()))?;
    text.push('\n');
    write(path, text.as_bytes())
}

/// Command-line overrides applied to a scenario before it is built.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub rounds: Option<usize>,
    pub tol: Option<f64>,
    pub public_share: Option<f64>,
    pub noncompliance: Option<f64>,
    pub weights: Vec<(String, f64)>,
}

/// Parses `name=value`.
pub fn parse_weight(arg: &str) -> std::result::Result<(String, f64), String> {
    let (name, value) = arg
        .split_once('=')
        .ok_or_else(|| format!("expected NAME=VALUE, got '{arg}'"))?;
    let value: f64 = value
        .trim()
        .parse()
        .map_err(|_| format!("'{value}' is not a number"))?;
    Ok((name.trim().to_string(), value))
}

pub fn load_scenario(path: &Path, overrides: &Overrides) -> CliResult<Scenario> {
    let text = read(path)?;
    let mut file = ScenarioFile::from_toml(&text)
        .map_err(|e| CliError::new(Failure::Parse, format!("{}: {e}", path.display())))?;
    apply_overrides(&mut file, overrides)?;
    file.build()
        .map_err(|e| CliError::new(Failure::Parse, format!("{}: {e}", path.display())))
}

pub fn apply_overrides(file: &mut ScenarioFile, o: &Overrides) -> CliResult<()> {
    let x = &mut file.experiment;
    if let Some(r) = o.rounds {
        x.rounds = r;
    }
    if let Some(t) = o.tol {
        x.tol = t;
    }
    if let Some(s) = o.public_share {
        x.public_share = s;
    }
    if let Some(r) = o.noncompliance {
        x.noncompliance_rate = r;
    }
    for (name, w) in &o.weights {
        let mode = file
            .modes
            .iter_mut()
            .find(|m| &m.name == name)
            .ok_or_else(|| CliError::new(Failure::Usage, format!("--weight: no mode named '{name}'")))?;
        mode.weight = *w;
    }
    Ok(())
}

/// Writes a grid scenario to `<out>/scenario.toml`.
pub fn cmd_gen_grid(spec: &GridSpec, out: &Path) -> CliResult<PathBuf> {
    let file = gen_grid(spec)?;
    prepare_dir(out)?;
    let path = out.join("scenario.toml");
    write(&path, file.to_toml()?.as_bytes())?;
    Ok(path)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RoundSummary {
    pub round: usize,
    pub iterations: usize,
    pub converged: bool,
    pub relative_gap: f64,
    pub objective: f64,
    /// Unweighted mean over edges of the loaded travel time.
    pub mean_edge_time: f64,
    /// Flow-weighted mean over edges of the loaded travel time.
    pub flow_weighted_edge_time: Option<f64>,
    pub mean_trip_time: BTreeMap<String, Option<f64>>,
    pub noncompliant_trip_time: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AssignSummary {
    pub rounds: Vec<RoundSummary>,
    pub mem: Option<f64>,
    pub tt_gap: Option<f64>,
    pub travel_time_rule: String,
}

#[derive(Debug, Clone)]
pub struct AssignOutput {
    pub scenario: Scenario,
    pub rounds: Vec<RoundOutcome>,
    /// Trip times of the last round.
    pub trip_times: TripTimes,
    pub nodes: Vec<NodeEquity>,
    pub summary: AssignSummary,
}

fn edge_times(network: &Network, load: &[f64]) -> CliResult<Vec<f64>> {
    Ok(network.loaded_costs(load)?.as_slice().to_vec())
}

fn weighted_mean(values: impl Iterator<Item = (f64, f64)>) -> Option<f64> {
    let (mut num, mut den) = (0.0, 0.0);
    for (v, w) in values {
        if w > 0.0 {
            num += v * w;
            den += w;
        }
    }
    (den > 0.0).then(|| num / den)
}

fn undefined_as_none(r: mobeq_core::Result<f64>) -> CliResult<Option<f64>> {
    match r {
        Ok(v) => Ok(Some(v)),
        Err(Error::UndefinedMetric(_)) => Ok(None),
        Err(e) => Err(e.into()),
    }
}

/// Runs the interaction rounds and scores the final loading.
pub fn run_assign(scenario: Scenario) -> CliResult<AssignOutput> {
    let Scenario {
        network,
        modes,
        trips,
        catalog,
        experiment,
    } = &scenario;
    let rule = experiment.travel_time;
    let rounds = iterate_interaction(network, modes, trips, experiment.solver(), experiment.rounds)?;

    let mut summaries = Vec::with_capacity(rounds.len());
    let mut last_times = None;
    for (k, r) in rounds.iter().enumerate() {
        let load = edge_loads(&r.compliant, &r.noncompliant);
        let times = edge_times(network, &load)?;
        let trip_times = travel_times(rule, network, &r.compliant, &r.noncompliant, trips, modes)?;
        let means = mean_mode_times(trips, &trip_times);
        let nc = noncompliant_trip_times(network, &r.compliant, &r.noncompliant, trips)?;
        summaries.push(RoundSummary {
            round: k + 1,
            iterations: r.report.iterations,
            converged: r.report.converged,
            relative_gap: r.report.final_gap(),
            objective: r.report.final_objective(),
            mean_edge_time: times.iter().sum::<f64>() / times.len().max(1) as f64,
            flow_weighted_edge_time: weighted_mean(times.iter().copied().zip(load.iter().copied())),
            mean_trip_time: modes.iter().map(|m| m.name.clone()).zip(means).collect(),
            noncompliant_trip_time: weighted_mean(
                nc.iter()
                    .enumerate()
                    .filter_map(|(n, t)| t.map(|t| (t, trips.noncompliant_total(n)))),
            ),
        });
        last_times = Some(trip_times);
    }
    let trip_times = last_times.expect("at least one round");
    let last = rounds.last().expect("at least one round");

    let nodes = node_equity(network, modes, trips, catalog, &trip_times)?;
    let mi: Vec<f64> = nodes.iter().map(|n| n.mi).collect();
    let pops: Vec<f64> = nodes.iter().map(|n| n.population).collect();
    let mem = undefined_as_none(mem(&mi, &pops))?;
    let experienced = mobeq_core::assignment::compliant_trip_times(
        network,
        &last.compliant,
        &last.noncompliant,
        trips,
        modes,
    )?;
    let gap = undefined_as_none(tt_gap(
        network,
        modes,
        &last.compliant,
        &last.noncompliant,
        trips,
        &experienced,
    ))?;

    let summary = AssignSummary {
        rounds: summaries,
        mem,
        tt_gap: gap,
        travel_time_rule: rule_name(rule).to_string(),
    };
    Ok(AssignOutput {
        scenario,
        rounds,
        trip_times,
        nodes,
        summary,
    })
}

fn rule_name(rule: mobeq_core::assignment::TravelTimeRule) -> &'static str {
    match rule {
        mobeq_core::assignment::TravelTimeRule::ShortestLoaded => "shortest-loaded",
        mobeq_core::assignment::TravelTimeRule::FlowWeighted => "flow-weighted",
    }
}

/// `assign`: writes `edge_times.csv`, `trip_times.csv`, `nodes.csv` and
/// `summary.json`.
pub fn cmd_assign(scenario: &Path, overrides: &Overrides, out: &Path) -> CliResult<AssignOutput> {
    let output = run_assign(load_scenario(scenario, overrides)?)?;
    prepare_dir(out)?;
    write_assign(&output, out)?;
    Ok(output)
}

pub fn write_assign(output: &AssignOutput, out: &Path) -> CliResult<()> {
    let Scenario {
        network,
        modes,
        trips,
        ..
    } = &output.scenario;

    let mut edges = Table::new(&[
        "round",
        "edge",
        "from",
        "to",
        "free_flow_time",
        "capacity",
        "compliant_flow",
        "noncompliant_flow",
        "travel_time",
    ])?;
    for (k, r) in output.rounds.iter().enumerate() {
        let q = r.noncompliant.total();
        let x = r.compliant.aggregate();
        let load: Vec<f64> = x.iter().zip(&q).map(|(a, b)| a + b).collect();
        let times = edge_times(network, &load)?;
        for (e, edge) in network.edges().iter().enumerate() {
            edges.row(&[
                (k + 1).to_string(),
                e.to_string(),
                edge.from.to_string(),
                edge.to.to_string(),
                num(edge.free_flow_time),
                num(edge.capacity),
                num(x[e]),
                num(q[e]),
                num(times[e]),
            ])?;
        }
    }
    edges.save(&out.join("edge_times.csv"))?;

    let last = output.rounds.last().expect("at least one round");
    let nc = noncompliant_trip_times(network, &last.compliant, &last.noncompliant, trips)?;
    let mut table = Table::new(&["trip", "origin", "destination", "mode", "demand", "travel_time"])?;
    for (n, trip) in trips.trips().iter().enumerate() {
        for (m, mode) in modes.iter().enumerate() {
            table.row(&[
                n.to_string(),
                trip.origin.to_string(),
                trip.destination.to_string(),
                mode.name.clone(),
                num(trips.compliant(m, n)),
                num(output.trip_times.get(m, n)),
            ])?;
        }
        if let Some(t) = nc[n] {
            table.row(&[
                n.to_string(),
                trip.origin.to_string(),
                trip.destination.to_string(),
                "noncompliant".to_string(),
                num(trips.noncompliant_total(n)),
                num(t),
            ])?;
        }
    }
    table.save(&out.join("trip_times.csv"))?;

    write_nodes(
        &out.join("nodes.csv"),
        modes.iter().map(|m| m.name.as_str()),
        &output.scenario.catalog,
        output
            .nodes
            .iter()
            .map(|n| (n.node, n.population, n.price_sensitivity, n.mi, &n.accessibility)),
    )?;
    save_json(&out.join("summary.json"), &output.summary)
}

fn write_nodes<'a>(
    path: &Path,
    mode_names: impl Iterator<Item = &'a str> + Clone,
    catalog: &mobeq_core::equity::ServiceCatalog,
    rows: impl Iterator<Item = (usize, f64, f64, f64, &'a Vec<Vec<f64>>)>,
) -> CliResult<()> {
    let mut header = vec![
        "node".to_string(),
        "population".to_string(),
        "price_sensitivity".to_string(),
        "mi".to_string(),
    ];
    for m in mode_names.clone() {
        for t in catalog.types() {
            header.push(format!("{m}:{}", t.id));
        }
    }
    let mut table = Table::new(&header)?;
    for (node, pop, kappa, mi, access) in rows {
        let mut row = vec![node.to_string(), num(pop), num(kappa), num(mi)];
        row.extend(access.iter().flatten().map(|&c| num(c)));
        table.row(&row)?;
    }
    table.save(path)
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizeOptions {
    pub overrides: Overrides,
    /// Seconds; defaults to the scenario value, else unbounded.
    pub gamma: Option<f64>,
    pub resolution: Option<usize>,
    /// 0 uses every available core.
    pub jobs: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
struct OptimumDoc {
    gamma: Option<f64>,
    candidate: Option<usize>,
    weights: Option<BTreeMap<String, f64>>,
    mem: Option<f64>,
    tt_gap: Option<f64>,
    feasible_candidates: usize,
    candidates: usize,
}

/// `optimize`: writes `sweep.csv` and `optimum.json`. Fails with an
/// infeasibility error, after writing both files, when no candidate meets
/// the gap bound.
pub fn cmd_optimize(
    scenario: &Path,
    options: &OptimizeOptions,
    out: &Path,
) -> CliResult<SweepResult> {
    let sc = load_scenario(scenario, &options.overrides)?;
    let gamma = options
        .gamma
        .or(sc.experiment.gamma)
        .unwrap_or(f64::INFINITY);
    if !(gamma > 0.0) {
        return Err(CliError::new(Failure::Usage, format!("--gamma must be > 0, got {gamma}")));
    }
    let resolution = options.resolution.unwrap_or(sc.experiment.resolution);
    let config = SweepConfig {
        gamma,
        resolution,
        rounds: sc.experiment.rounds,
        solver: sc.experiment.solver(),
        rule: sc.experiment.travel_time,
        jobs: options.jobs,
    };
    let result = optimize_weights(&sc.network, &sc.modes, &sc.trips, &sc.catalog, config)?;
    prepare_dir(out)?;
    write_sweep(&sc, &result, out)?;
    if result.optimum.is_none() {
        return Err(CliError::new(
            Failure::Infeasible,
            format!("no weight candidate keeps the travel-time gap within {gamma} s"),
        ));
    }
    Ok(result)
}

pub fn write_sweep(sc: &Scenario, result: &SweepResult, out: &Path) -> CliResult<()> {
    let mut header = vec!["candidate".to_string()];
    header.extend(sc.modes.iter().map(|m| format!("w_{}", m.name)));
    header.push("mem".into());
    header.push("tt_gap".into());
    header.extend(sc.modes.iter().map(|m| format!("mean_time_{}", m.name)));
    header.push("feasible".into());
    let mut table = Table::new(&header)?;
    for (k, rec) in result.records.iter().enumerate() {
        let mut row = vec![k.to_string()];
        row.extend(rec.weights.iter().map(|&w| num(w)));
        row.push(num(rec.mem));
        row.push(num(rec.tt_gap));
        row.extend(rec.mean_times.iter().map(|&t| opt_num(t)));
        row.push(rec.feasible.to_string());
        table.row(&row)?;
    }
    table.save(&out.join("sweep.csv"))?;

    let best = result.best();
    let doc = OptimumDoc {
        gamma: result.gamma.is_finite().then_some(result.gamma),
        candidate: result.optimum,
        weights: best.map(|b| {
            sc.modes
                .iter()
                .map(|m| m.name.clone())
                .zip(b.weights.iter().copied())
                .collect()
        }),
        mem: best.map(|b| b.mem),
        tt_gap: best.map(|b| b.tt_gap),
        feasible_candidates: result.records.iter().filter(|r| r.feasible).count(),
        candidates: result.records.len(),
    };
    save_json(&out.join("optimum.json"), &doc)
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeoOutput {
    pub nodes: Vec<GeoNodeEquity>,
    pub mem: f64,
}

#[derive(Serialize)]
struct GeoSummary<'a> {
    mem: f64,
    nodes: Vec<GeoSummaryNode<'a>>,
}

#[derive(Serialize)]
struct GeoSummaryNode<'a> {
    node: usize,
    mi: f64,
    accessibility: BTreeMap<&'a str, BTreeMap<&'a str, f64>>,
}

/// `mi-geo`: per-node MI from isochrone polygons and a POI table.
///
/// The config scenario supplies modes, service types and node attributes;
/// edges and trips are ignored. Nodes are those named by the isochrones.
pub fn cmd_mi_geo(
    config: &Path,
    isochrones: &Path,
    pois: &Path,
    out: &Path,
) -> CliResult<GeoOutput> {
    let sc = load_scenario(config, &Overrides::default())?;
    let isos = parse_isochrones(&read(isochrones)?)
        .map_err(|e| CliError::new(Failure::Parse, format!("{}: {e}", isochrones.display())))?;
    let pois = parse_pois(&read(pois)?, &sc.catalog)
        .map_err(|e| CliError::new(Failure::Parse, format!("{}: {e}", pois.display())))?;
    let output = run_mi_geo(&sc, &isos, &pois)?;

    prepare_dir(out)?;
    write_nodes(
        &out.join("mi_geo.csv"),
        sc.modes.iter().map(|m| m.name.as_str()),
        &sc.catalog,
        output.nodes.iter().map(|n| {
            let attr = &sc.network.nodes()[n.node];
            (n.node, attr.population, attr.price_sensitivity, n.mi, &n.accessibility)
        }),
    )?;
    let summary = GeoSummary {
        mem: output.mem,
        nodes: output
            .nodes
            .iter()
            .map(|n| GeoSummaryNode {
                node: n.node,
                mi: n.mi,
                accessibility: sc
                    .modes
                    .iter()
                    .zip(&n.accessibility)
                    .map(|(m, row)| {
                        (
                            m.name.as_str(),
                            sc.catalog
                                .types()
                                .iter()
                                .map(|t| t.id.as_str())
                                .zip(row.iter().copied())
                                .collect(),
                        )
                    })
                    .collect(),
            })
            .collect(),
    };
    save_json(&out.join("mi_geo.json"), &summary)?;
    Ok(output)
}

pub fn run_mi_geo(
    sc: &Scenario,
    isochrones: &[mobeq_core::geodata::Isochrone],
    pois: &[mobeq_core::geodata::PoiRecord],
) -> CliResult<GeoOutput> {
    let mut ids: Vec<usize> = isochrones.iter().map(|i| i.node).collect();
    ids.sort_unstable();
    ids.dedup();
    let mut nodes = Vec::with_capacity(ids.len());
    for id in ids {
        let attr = sc.network.nodes().get(id).ok_or_else(|| {
            CliError::new(Failure::Parse, format!("isochrone node {id} is not in the config"))
        })?;
        let accessibility = mobeq_core::geodata::accessibility_from_geodata(
            id,
            &sc.modes,
            isochrones,
            pois,
            &sc.catalog,
        )?;
        let mi = mi_from_geodata(attr, &sc.modes, isochrones, pois, &sc.catalog)?;
        nodes.push(GeoNodeEquity {
            node: id,
            mi,
            accessibility,
        });
    }
    let mi: Vec<f64> = nodes.iter().map(|n| n.mi).collect();
    let pops: Vec<f64> = nodes
        .iter()
        .map(|n| sc.network.nodes()[n.node].population)
        .collect();
    let mem = mem(&mi, &pops)?;
    Ok(GeoOutput { nodes, mem })
}

/// Mean compliant private-vehicle trip time per round, if a private mode
/// carries demand.
pub fn private_round_times(output: &AssignOutput) -> Option<Vec<f64>> {
    let pv = private_mode(&output.scenario.modes)?;
    let name = &output.scenario.modes[pv].name;
    output
        .summary
        .rounds
        .iter()
        .map(|r| r.mean_trip_time.get(name).copied().flatten())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weight_arguments() {
        assert_eq!(parse_weight("public=0.7"), Ok(("public".to_string(), 0.7)));
        assert_eq!(parse_weight(" car = 1 "), Ok(("car".to_string(), 1.0)));
        assert!(parse_weight("public").is_err());
        assert!(parse_weight("public=high").is_err());
    }

    #[test]
    fn core_errors_map_to_exit_codes() {
        let code = |e: Error| CliError::from(e).kind.exit_code();
        assert_eq!(code(Error::DegenerateObjective), 3);
        assert_eq!(code(Error::UndefinedMetric("no mobility".into())), 4);
        assert_eq!(code(Error::Structure("bad".into())), 2);
        assert_eq!(code(Error::Domain("bad".into())), 2);
    }

    #[test]
    fn diagnostics_are_one_json_line() {
        let e = CliError::new(Failure::Usage, "line one\nline two");
        let text = e.to_json();
        assert!(!text.contains('\n'));
        let doc: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(doc["error"], "usage");
        assert_eq!(doc["message"], "line one\nline two");
    }

    #[test]
    fn overrides_replace_experiment_and_weights() {
        let mut file = gen_grid(&GridSpec::default()).unwrap();
        let o = Overrides {
            rounds: Some(3),
            public_share: Some(0.2),
            weights: vec![("private".into(), 0.9)],
            ..Overrides::default()
        };
        apply_overrides(&mut file, &o).unwrap();
        assert_eq!((file.experiment.rounds, file.experiment.public_share), (3, 0.2));
        assert_eq!(file.modes[1].weight, 0.9);

        let bad = Overrides {
            weights: vec![("tram".into(), 1.0)],
            ..Overrides::default()
        };
        let err = apply_overrides(&mut file, &bad).unwrap_err();
        assert_eq!(err.kind, Failure::Usage);
    }
}
