use super::{
    solve_noncompliant, solve_system_routing, CompliantFlows, ModeSpec, NoncompliantFlows,
    SolveReport, SolverOptions, TripTable,
};
use crate::error::{Error, Result};
use crate::network::Network;

/// State of the network after one compliant / non-compliant exchange.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundOutcome {
    pub compliant: CompliantFlows,
    pub noncompliant: NoncompliantFlows,
    pub report: SolveReport,
}

/// Alternates system-centric and non-compliant routing.
///
/// Round 1 routes compliant demand on an empty network, then non-compliant
/// demand against that. Every later round re-routes compliant demand against
/// the previous round's non-compliant load, then re-routes non-compliant
/// demand against the new compliant load.
pub fn iterate_interaction(
    network: &Network,
    modes: &[ModeSpec],
    trips: &TripTable,
    options: SolverOptions,
    rounds: usize,
) -> Result<Vec<RoundOutcome>> {
    if rounds == 0 {
        return Err(Error::Domain("rounds must be >= 1".into()));
    }
    let mut background = vec![0.0; network.edge_count()];
    let mut out: Vec<RoundOutcome> = Vec::with_capacity(rounds);
    for _ in 0..rounds {
        let (compliant, report) =
            solve_system_routing(network, modes, trips, &background, options)?;
        let noncompliant = solve_noncompliant(network, trips, compliant.aggregate())?;
        background = noncompliant.total();
        out.push(RoundOutcome {
            compliant,
            noncompliant,
            report,
        });
    }
    Ok(out)
}
