//! Mode-weight selection: maximize the MEM subject to a cap on how much
//! longer compliant private trips take than non-compliant ones.
//!
//! The objective is a black box of the weights through two nested solvers,
//! so the weight simplex is swept exhaustively on a regular lattice.
//! Candidates are independent and are evaluated in parallel; results are
//! always assembled in candidate order.

use serde::Serialize;

use crate::assignment::{
    compliant_trip_times, iterate_interaction, noncompliant_trip_times, private_mode, travel_times,
    CompliantFlows, ModeSpec, NoncompliantFlows, RoundOutcome, SolverOptions, TravelTimeRule,
    TripTable, TripTimes,
};
use crate::equity::{equity_report, EquityReport, ServiceCatalog};
use crate::error::{Error, Result};
use crate::network::Network;
use crate::shortest_path::search;

/// Mode weights on the unit simplex.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeightCandidate(Vec<f64>);

impl WeightCandidate {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::Domain("weights must be finite and >= 0".into()));
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(Error::Domain(format!("weights sum to {sum}, expected 1")));
        }
        Ok(WeightCandidate(weights))
    }

    pub fn weights(&self) -> &[f64] {
        &self.0
    }

    pub fn apply(&self, modes: &[ModeSpec]) -> Vec<ModeSpec> {
        modes
            .iter()
            .zip(&self.0)
            .map(|(m, &w)| ModeSpec {
                weight: w,
                ..m.clone()
            })
            .collect()
    }
}

/// Every lattice point of the simplex with spacing `1 / (resolution - 1)`,
/// ordered lexicographically with the first mode's weight ascending. For two
/// modes this is `w_0 = 0, 1/(R-1), ..., 1`.
pub fn simplex_grid(mode_count: usize, resolution: usize) -> Result<Vec<WeightCandidate>> {
    if resolution < 2 {
        return Err(Error::Domain(format!(
            "grid resolution must be >= 2, got {resolution}"
        )));
    }
    if mode_count == 0 {
        return Err(Error::Structure("at least one mode is required".into()));
    }
    let steps = resolution - 1;
    let mut out = Vec::new();
    let mut parts = vec![0usize; mode_count];
    compositions(steps, 0, &mut parts, &mut |p| {
        let w: Vec<f64> = p.iter().map(|&k| k as f64 / steps as f64).collect();
        out.push(WeightCandidate(w));
    });
    Ok(out)
}

fn compositions(remaining: usize, at: usize, parts: &mut [usize], emit: &mut impl FnMut(&[usize])) {
    if at + 1 == parts.len() {
        parts[at] = remaining;
        emit(parts);
        return;
    }
    for k in 0..=remaining {
        parts[at] = k;
        compositions(remaining - k, at + 1, parts, emit);
    }
}

/// Demand-weighted mean over trips of (compliant private trip time minus
/// non-compliant trip time), in seconds.
///
/// Trips without non-compliant demand are compared against the path a
/// hypothetical level-0 driver would take: shortest under the compliant
/// load alone, timed under the full load.
pub fn tt_gap(
    network: &Network,
    modes: &[ModeSpec],
    flows: &CompliantFlows,
    nonflows: &NoncompliantFlows,
    trips: &TripTable,
    trip_times: &TripTimes,
) -> Result<f64> {
    let pv = private_mode(modes)
        .ok_or_else(|| Error::UndefinedMetric("no private-vehicle mode configured".into()))?;
    let nc_times = noncompliant_trip_times(network, flows, nonflows, trips)?;

    let bpr = network.bpr();
    let level0_costs: Vec<f64> = network
        .edges()
        .iter()
        .zip(flows.aggregate())
        .map(|(edge, &x)| bpr.latency_unchecked(edge, x))
        .collect();
    let full_costs = network.loaded_costs(&crate::assignment::edge_loads(flows, nonflows))?;

    let mut weighted = 0.0;
    let mut total = 0.0;
    for origin in trips.origins() {
        let mut tree = None;
        for (n, trip) in trips.trips().iter().enumerate() {
            let demand = trips.compliant(pv, n);
            if trip.origin != origin || demand <= 0.0 {
                continue;
            }
            let nc_time = match nc_times[n] {
                Some(t) => t,
                None => {
                    let tree = tree.get_or_insert_with(|| search(network, &level0_costs, origin));
                    match tree.path_to(trip.destination) {
                        Some(path) => path.edges.iter().map(|&e| full_costs[e]).sum(),
                        None => f64::INFINITY,
                    }
                }
            };
            weighted += demand * (trip_times.get(pv, n) - nc_time);
            total += demand;
        }
    }
    if total == 0.0 {
        return Err(Error::UndefinedMetric(
            "no compliant private-vehicle demand".into(),
        ));
    }
    Ok(weighted / total)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepConfig {
    /// Upper bound on the private-vehicle travel-time gap, seconds.
    pub gamma: f64,
    pub resolution: usize,
    pub rounds: usize,
    pub solver: SolverOptions,
    pub rule: TravelTimeRule,
    /// Worker threads; 0 means one per available core.
    pub jobs: usize,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            gamma: f64::INFINITY,
            resolution: 21,
            rounds: 2,
            solver: SolverOptions::default(),
            rule: TravelTimeRule::default(),
            jobs: 0,
        }
    }
}

/// Everything computed for one weight vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub modes: Vec<ModeSpec>,
    pub rounds: Vec<RoundOutcome>,
    pub trip_times: TripTimes,
    pub equity: EquityReport,
    pub tt_gap: f64,
}

impl Evaluation {
    pub fn last_round(&self) -> &RoundOutcome {
        self.rounds.last().expect("at least one round")
    }
}

/// Runs the whole per-candidate pipeline with the given mode weights.
pub fn evaluate(
    network: &Network,
    modes: &[ModeSpec],
    trips: &TripTable,
    catalog: &ServiceCatalog,
    rounds: usize,
    solver: SolverOptions,
    rule: TravelTimeRule,
) -> Result<Evaluation> {
    let outcome = iterate_interaction(network, modes, trips, solver, rounds)?;
    let last = outcome.last().expect("rounds >= 1");
    let trip_times = travel_times(rule, network, &last.compliant, &last.noncompliant, trips, modes)?;
    let equity = equity_report(network, modes, trips, catalog, &trip_times)?;
    // the gap always compares experienced compliant times
    let experienced = compliant_trip_times(network, &last.compliant, &last.noncompliant, trips, modes)?;
    let gap = tt_gap(
        network,
        modes,
        &last.compliant,
        &last.noncompliant,
        trips,
        &experienced,
    )?;
    Ok(Evaluation {
        modes: modes.to_vec(),
        rounds: outcome,
        trip_times,
        equity,
        tt_gap: gap,
    })
}

/// Demand-weighted mean trip time per mode; `None` for a mode without demand.
pub fn mean_mode_times(trips: &TripTable, times: &TripTimes) -> Vec<Option<f64>> {
    (0..trips.mode_count())
        .map(|m| {
            let (mut weighted, mut total) = (0.0, 0.0);
            for n in 0..trips.len() {
                let d = trips.compliant(m, n);
                if d > 0.0 {
                    weighted += d * times.get(m, n);
                    total += d;
                }
            }
            (total > 0.0).then(|| weighted / total)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CandidateRecord {
    pub weights: Vec<f64>,
    pub mem: f64,
    pub tt_gap: f64,
    pub mean_times: Vec<Option<f64>>,
    pub feasible: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub gamma: f64,
    pub records: Vec<CandidateRecord>,
    /// Index of the feasible MEM maximizer; `None` when no candidate
    /// satisfies the gap constraint.
    pub optimum: Option<usize>,
}

impl SweepResult {
    pub fn best(&self) -> Option<&CandidateRecord> {
        self.optimum.map(|k| &self.records[k])
    }
}

/// Feasible record with the largest MEM. Ties go to the larger weight on
/// the cheapest mode, then to the earlier candidate.
pub fn select_optimum(records: &[CandidateRecord], modes: &[ModeSpec]) -> Option<usize> {
    let cheapest = modes
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.cost_per_mile.total_cmp(&b.1.cost_per_mile))
        .map_or(0, |(k, _)| k);
    let mut best: Option<usize> = None;
    for (k, r) in records.iter().enumerate() {
        if !r.feasible {
            continue;
        }
        best = match best {
            None => Some(k),
            Some(b) => {
                let incumbent = &records[b];
                let better = r.mem > incumbent.mem
                    || (r.mem == incumbent.mem
                        && r.weights[cheapest] > incumbent.weights[cheapest]);
                Some(if better { k } else { b })
            }
        };
    }
    best
}

pub fn optimize_weights(
    network: &Network,
    modes: &[ModeSpec],
    trips: &TripTable,
    catalog: &ServiceCatalog,
    config: SweepConfig,
) -> Result<SweepResult> {
    if !(config.gamma > 0.0) {
        return Err(Error::Domain(format!("gamma must be > 0, got {}", config.gamma)));
    }
    let candidates = simplex_grid(modes.len(), config.resolution)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.jobs)
        .build()
        .map_err(|e| Error::Structure(format!("thread pool: {e}")))?;
    let evaluated: Vec<Result<CandidateRecord>> = pool.install(|| {
        use rayon::prelude::*;
        candidates
            .par_iter()
            .map(|cand| {
                let weighted = cand.apply(modes);
                let eval = evaluate(
                    network,
                    &weighted,
                    trips,
                    catalog,
                    config.rounds,
                    config.solver,
                    config.rule,
                )?;
                Ok(CandidateRecord {
                    weights: cand.weights().to_vec(),
                    mem: eval.equity.mem,
                    tt_gap: eval.tt_gap,
                    mean_times: mean_mode_times(trips, &eval.trip_times),
                    feasible: eval.tt_gap <= config.gamma,
                })
            })
            .collect()
    });
    let records = evaluated.into_iter().collect::<Result<Vec<_>>>()?;
    let optimum = select_optimum(&records, modes);
    Ok(SweepResult {
        gamma: config.gamma,
        records,
        optimum,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assignment::{ModeKind, Trip};
    use crate::network::{EdgeAttr, NodeAttr};

    #[test]
    fn grid_endpoints_and_order() {
        let g = simplex_grid(2, 2).unwrap();
        assert_eq!(g.len(), 2);
        assert_eq!(g[0].weights(), &[0.0, 1.0]);
        assert_eq!(g[1].weights(), &[1.0, 0.0]);
        let g = simplex_grid(2, 21).unwrap();
        assert_eq!(g.len(), 21);
        assert!((g[14].weights()[0] - 0.7).abs() < 1e-15);
        assert!(simplex_grid(2, 1).is_err());
    }

    #[test]
    fn grid_covers_simplex() {
        let g = simplex_grid(3, 5).unwrap();
        assert_eq!(g.len(), 15);
        for c in &g {
            assert!(WeightCandidate::new(c.weights().to_vec()).is_ok());
        }
    }

    #[test]
    fn candidate_validation() {
        assert!(WeightCandidate::new(vec![0.5, 0.5]).is_ok());
        assert!(WeightCandidate::new(vec![0.5, 0.6]).is_err());
        assert!(WeightCandidate::new(vec![1.5, -0.5]).is_err());
    }

    fn record(w: f64, mem: f64, feasible: bool) -> CandidateRecord {
        CandidateRecord {
            weights: vec![w, 1.0 - w],
            mem,
            tt_gap: 0.0,
            mean_times: vec![],
            feasible,
        }
    }

    fn two_modes() -> Vec<ModeSpec> {
        let m = |name: &str, kind, cost| ModeSpec {
            name: name.into(),
            kind,
            cost_per_mile: cost,
            occupancy: 1.0,
            time_threshold: 600.0,
            weight: 0.5,
        };
        vec![
            m("public", ModeKind::Public, 0.5),
            m("private", ModeKind::Private, 2.0),
        ]
    }

    #[test]
    fn selection_prefers_feasible_max_then_cheap_mode() {
        let modes = two_modes();
        let recs = vec![
            record(0.0, 0.8, true),
            record(0.5, 0.9, true),
            record(1.0, 0.95, false),
        ];
        assert_eq!(select_optimum(&recs, &modes), Some(1));
        let recs = vec![record(0.0, 0.9, true), record(0.5, 0.9, true)];
        assert_eq!(select_optimum(&recs, &modes), Some(1));
        let recs = vec![record(0.0, 0.9, false)];
        assert_eq!(select_optimum(&recs, &modes), None);
    }

    #[test]
    fn gap_of_single_trip() {
        // private compliant time 600 s (given), non-compliant path 540 s
        let net = Network::new(
            vec![NodeAttr::new(0), NodeAttr::new(1)],
            vec![EdgeAttr::new(0, 1, 540.0, 1e9)],
        )
        .unwrap();
        let modes = two_modes();
        let trips = TripTable::new(
            &net,
            2,
            vec![Trip {
                origin: 0,
                destination: 1,
            }],
            vec![vec![0.0, 1.0]],
            vec![[1.0, 0.0, 0.0]],
        )
        .unwrap();
        let flows = CompliantFlows::from_parts(&modes, vec![vec![vec![0.0]], vec![vec![1.0]]]).unwrap();
        let nc = crate::assignment::solve_noncompliant(&net, &trips, flows.aggregate()).unwrap();
        let mut times = TripTimes::new(2, 1);
        times.set(1, 0, 600.0);
        let gap = tt_gap(&net, &modes, &flows, &nc, &trips, &times).unwrap();
        assert!((gap - 60.0).abs() < 1e-6, "{gap}");
    }

    #[test]
    fn gap_undefined_without_private_demand() {
        let net = Network::new(
            vec![NodeAttr::new(0), NodeAttr::new(1)],
            vec![EdgeAttr::new(0, 1, 1.0, 1.0)],
        )
        .unwrap();
        let modes = two_modes();
        let trips = TripTable::new(
            &net,
            2,
            vec![Trip {
                origin: 0,
                destination: 1,
            }],
            vec![vec![1.0, 0.0]],
            vec![[0.0; 3]],
        )
        .unwrap();
        let flows = CompliantFlows::zeros(2, 1, 1);
        let nc = NoncompliantFlows::empty(1, 1);
        let times = TripTimes::new(2, 1);
        assert!(matches!(
            tt_gap(&net, &modes, &flows, &nc, &trips, &times),
            Err(Error::UndefinedMetric(_))
        ));
    }
}
