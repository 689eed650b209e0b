//! Frank-Wolfe solver for the weighted system-centric objective
//!
//! ```text
//! F(x) = sum_e t_e(X_e + q_e) * W_e,   X_e = sum_{m,n} h_m x_{m,n,e},
//!                                       W_e = sum_{m,n} w_m x_{m,n,e}
//! dF/dx_{m,n,e} = w_m t_e(X_e + q_e) + h_m t'_e(X_e + q_e) W_e
//! ```
//!
//! The gradient does not depend on the trip, so each iteration runs one
//! shortest-path tree per (mode, origin) and loads every trip all-or-nothing.

use serde::Serialize;

use super::{validate_modes, CompliantFlows, ModeSpec, TripTable};
use crate::error::{Error, Result};
use crate::network::Network;
use crate::shortest_path::search;

/// Width at which the line-search bisection stops.
const LINE_SEARCH_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    /// Target relative gap.
    pub tol: f64,
    pub max_iters: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            tol: 1e-4,
            max_iters: 500,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveReport {
    /// Objective at every iterate, starting with the initial point.
    pub objective: Vec<f64>,
    /// Relative gap at every iterate whose gap was evaluated.
    pub relative_gap: Vec<f64>,
    /// Number of Frank-Wolfe steps taken.
    pub iterations: usize,
    pub converged: bool,
}

impl SolveReport {
    pub fn final_gap(&self) -> f64 {
        self.relative_gap.last().copied().unwrap_or(0.0)
    }

    pub fn final_objective(&self) -> f64 {
        self.objective.last().copied().unwrap_or(0.0)
    }
}

fn check_background(network: &Network, background: &[f64]) -> Result<()> {
    if background.len() != network.edge_count() {
        return Err(Error::Structure(format!(
            "background flow has {} entries for {} edges",
            background.len(),
            network.edge_count()
        )));
    }
    if background.iter().any(|q| !(q.is_finite() && *q >= 0.0)) {
        return Err(Error::Domain("background flow must be finite and >= 0".into()));
    }
    Ok(())
}

/// `sum_e t_e(x_e + q_e) * sum_m w_m sum_n x_{m,n,e}`.
pub fn system_objective(
    network: &Network,
    modes: &[ModeSpec],
    flows: &CompliantFlows,
    background: &[f64],
) -> Result<f64> {
    if flows.edge_count() != network.edge_count() || flows.mode_count() != modes.len() {
        return Err(Error::Structure(format!(
            "flows cover {} modes x {} edges, network has {} modes x {} edges",
            flows.mode_count(),
            flows.edge_count(),
            modes.len(),
            network.edge_count()
        )));
    }
    check_background(network, background)?;
    Ok(objective(
        network,
        flows.aggregate(),
        &flows.weighted_usage(modes),
        background,
    ))
}

fn objective(network: &Network, load: &[f64], usage: &[f64], background: &[f64]) -> f64 {
    let bpr = network.bpr();
    network
        .edges()
        .iter()
        .enumerate()
        .filter(|&(e, _)| usage[e] != 0.0)
        .map(|(e, edge)| bpr.latency_unchecked(edge, load[e] + background[e]) * usage[e])
        .sum()
}

/// Frank-Wolfe with all-or-nothing subproblems and exact line search.
pub fn solve_system_routing(
    network: &Network,
    modes: &[ModeSpec],
    trips: &TripTable,
    background: &[f64],
    options: SolverOptions,
) -> Result<(CompliantFlows, SolveReport)> {
    validate_modes(modes)?;
    if trips.mode_count() != modes.len() {
        return Err(Error::Structure(format!(
            "trip table has demand for {} modes, {} configured",
            trips.mode_count(),
            modes.len()
        )));
    }
    if !(options.tol > 0.0) {
        return Err(Error::Domain(format!("tol must be > 0, got {}", options.tol)));
    }
    if modes.iter().all(|m| m.weight == 0.0) {
        return Err(Error::DegenerateObjective);
    }
    check_background(network, background)?;

    let edge_count = network.edge_count();
    let bpr = network.bpr();
    let origins = trips.origins();

    // Initial point: all-or-nothing on times under the background load.
    let base: Vec<f64> = network
        .edges()
        .iter()
        .zip(background)
        .map(|(edge, &q)| bpr.latency_unchecked(edge, q))
        .collect();
    let mut flows = CompliantFlows::zeros(modes.len(), trips.len(), edge_count);
    for m in 0..modes.len() {
        all_or_nothing(network, trips, &origins, m, &base, &mut flows, true)?;
    }
    flows.refresh_aggregate(modes);

    let mut report = SolveReport {
        objective: Vec::new(),
        relative_gap: Vec::new(),
        iterations: 0,
        converged: false,
    };
    let mut target = CompliantFlows::zeros(modes.len(), trips.len(), edge_count);
    let mut grad = vec![vec![0.0; edge_count]; modes.len()];

    loop {
        let load = flows.aggregate().to_vec();
        let usage = flows.weighted_usage(modes);
        let current = objective(network, &load, &usage, background);
        report.objective.push(current);
        if current == 0.0 {
            // no weighted demand on the network
            report.relative_gap.push(0.0);
            report.converged = true;
            break;
        }

        for (e, edge) in network.edges().iter().enumerate() {
            let total = load[e] + background[e];
            let t = bpr.latency_unchecked(edge, total);
            let dt = bpr.derivative_unchecked(edge, total);
            for (m, mode) in modes.iter().enumerate() {
                grad[m][e] = mode.weight * t + mode.occupancy * dt * usage[e];
            }
        }

        // Linearized gap: grad . (x - y).
        let mut gap = 0.0;
        for (m, g) in grad.iter().enumerate() {
            all_or_nothing(network, trips, &origins, m, g, &mut target, false)?;
            for n in 0..trips.len() {
                let x = flows.flow(m, n);
                let y = target.flow(m, n);
                gap += g
                    .iter()
                    .zip(x.iter().zip(y))
                    .map(|(ge, (xe, ye))| ge * (xe - ye))
                    .sum::<f64>();
            }
        }
        let rel_gap = gap.max(0.0) / current.abs();
        report.relative_gap.push(rel_gap);
        if rel_gap <= options.tol {
            report.converged = true;
            break;
        }
        if report.iterations >= options.max_iters {
            break;
        }

        target.refresh_aggregate(modes);
        let d_load: Vec<f64> = target
            .aggregate()
            .iter()
            .zip(&load)
            .map(|(y, x)| y - x)
            .collect();
        let d_usage: Vec<f64> = target
            .weighted_usage(modes)
            .iter()
            .zip(&usage)
            .map(|(y, x)| y - x)
            .collect();
        let segment = Segment {
            network,
            background,
            load: &load,
            usage: &usage,
            d_load: &d_load,
            d_usage: &d_usage,
        };
        let step = segment.step(current);
        if step == 0.0 {
            // no descent along the Frank-Wolfe direction
            break;
        }

        for m in 0..modes.len() {
            for n in 0..trips.len() {
                let y = target.flow(m, n).to_vec();
                for (x, ye) in flows.flow_mut(m, n).iter_mut().zip(y) {
                    *x = (*x + step * (ye - *x)).max(0.0);
                }
            }
        }
        flows.refresh_aggregate(modes);
        report.iterations += 1;
    }

    Ok((flows, report))
}

/// Loads each trip's demand for `mode` onto its shortest path under `costs`.
fn all_or_nothing(
    network: &Network,
    trips: &TripTable,
    origins: &[usize],
    mode: usize,
    costs: &[f64],
    out: &mut CompliantFlows,
    check_reachable: bool,
) -> Result<()> {
    for n in 0..trips.len() {
        out.flow_mut(mode, n).fill(0.0);
    }
    for &origin in origins {
        let tree = search(network, costs, origin);
        for (n, trip) in trips.trips().iter().enumerate() {
            let demand = trips.compliant(mode, n);
            if trip.origin != origin || demand == 0.0 {
                continue;
            }
            match tree.path_to(trip.destination) {
                Some(path) => {
                    let x = out.flow_mut(mode, n);
                    for e in path.edges {
                        x[e] += demand;
                    }
                }
                None if check_reachable => {
                    return Err(Error::Unreachable {
                        trip: n,
                        origin: trip.origin,
                        destination: trip.destination,
                        level: None,
                    })
                }
                None => unreachable!("reachability checked on the initial pass"),
            }
        }
    }
    Ok(())
}

/// The objective restricted to `x + s * d`, `s` in `[0, 1]`.
struct Segment<'a> {
    network: &'a Network,
    background: &'a [f64],
    load: &'a [f64],
    usage: &'a [f64],
    d_load: &'a [f64],
    d_usage: &'a [f64],
}

impl Segment<'_> {
    fn value(&self, s: f64) -> f64 {
        let bpr = self.network.bpr();
        self.network
            .edges()
            .iter()
            .enumerate()
            .map(|(e, edge)| {
                let flow = (self.load[e] + s * self.d_load[e]).max(0.0) + self.background[e];
                let usage = self.usage[e] + s * self.d_usage[e];
                bpr.latency_unchecked(edge, flow) * usage
            })
            .sum()
    }

    fn slope(&self, s: f64) -> f64 {
        let bpr = self.network.bpr();
        self.network
            .edges()
            .iter()
            .enumerate()
            .map(|(e, edge)| {
                let flow = (self.load[e] + s * self.d_load[e]).max(0.0) + self.background[e];
                let usage = self.usage[e] + s * self.d_usage[e];
                bpr.derivative_unchecked(edge, flow) * self.d_load[e] * usage
                    + bpr.latency_unchecked(edge, flow) * self.d_usage[e]
            })
            .sum()
    }

    /// Exact line search by bisection on the slope, followed by a
    /// backtracking guard so the objective never increases.
    fn step(&self, current: f64) -> f64 {
        if self.slope(0.0) >= 0.0 {
            return 0.0;
        }
        let mut s = if self.slope(1.0) <= 0.0 {
            1.0
        } else {
            let (mut lo, mut hi) = (0.0, 1.0);
            while hi - lo > LINE_SEARCH_TOL {
                let mid = 0.5 * (lo + hi);
                if self.slope(mid) < 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            0.5 * (lo + hi)
        };
        for _ in 0..64 {
            if self.value(s) <= current {
                return s;
            }
            s *= 0.5;
        }
        0.0
    }
}
