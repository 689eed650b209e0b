//! Directed road network and the BPR volume-delay function.

use crate::error::{Error, Result};

/// Multiplier on the normalized flow term of the BPR curve.
pub const BPR_ALPHA: f64 = 0.15;
/// Exponent on the volume/capacity ratio of the BPR curve.
pub const BPR_BETA: i32 = 4;

pub type NodeId = usize;
pub type EdgeId = usize;

#[derive(Debug, Clone, PartialEq)]
pub struct NodeAttr {
    pub id: NodeId,
    /// Number of travelers living at this node.
    pub population: f64,
    /// Price sensitivity per cost unit.
    pub price_sensitivity: f64,
    /// Planar coordinates in meters, when known.
    pub position: Option<(f64, f64)>,
}

impl NodeAttr {
    pub fn new(id: NodeId) -> Self {
        NodeAttr {
            id,
            population: 0.0,
            price_sensitivity: 0.0,
            position: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EdgeAttr {
    pub from: NodeId,
    pub to: NodeId,
    /// Free-flow traversal time in seconds.
    pub free_flow_time: f64,
    /// Capacity in vehicles per hour.
    pub capacity: f64,
}

impl EdgeAttr {
    pub fn new(from: NodeId, to: NodeId, free_flow_time: f64, capacity: f64) -> Self {
        EdgeAttr {
            from,
            to,
            free_flow_time,
            capacity,
        }
    }
}

/// BPR latency and its derivative, parameterized so experiments can deviate
/// from the standard coefficients.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bpr {
    pub alpha: f64,
    pub beta: i32,
}

impl Default for Bpr {
    fn default() -> Self {
        Bpr {
            alpha: BPR_ALPHA,
            beta: BPR_BETA,
        }
    }
}

impl Bpr {
    pub fn latency(&self, edge: &EdgeAttr, total_flow: f64) -> Result<f64> {
        check_flow(total_flow)?;
        Ok(self.latency_unchecked(edge, total_flow))
    }

    pub fn derivative(&self, edge: &EdgeAttr, total_flow: f64) -> Result<f64> {
        check_flow(total_flow)?;
        Ok(self.derivative_unchecked(edge, total_flow))
    }

    /// Caller guarantees `total_flow >= 0`.
    #[inline]
    pub(crate) fn latency_unchecked(&self, edge: &EdgeAttr, total_flow: f64) -> f64 {
        let ratio = total_flow / edge.capacity;
        edge.free_flow_time * (1.0 + self.alpha * ratio.powi(self.beta))
    }

    #[inline]
    pub(crate) fn derivative_unchecked(&self, edge: &EdgeAttr, total_flow: f64) -> f64 {
        if self.beta == 0 {
            return 0.0;
        }
        let ratio = total_flow / edge.capacity;
        edge.free_flow_time * self.alpha * f64::from(self.beta) * ratio.powi(self.beta - 1)
            / edge.capacity
    }
}

fn check_flow(total_flow: f64) -> Result<()> {
    if total_flow.is_nan() || total_flow < 0.0 {
        return Err(Error::Domain(format!(
            "edge flow must be nonnegative, got {total_flow}"
        )));
    }
    Ok(())
}

/// `t0 * (1 + 0.15 * (flow / capacity)^4)`.
pub fn bpr_latency(edge: &EdgeAttr, total_flow: f64) -> Result<f64> {
    Bpr::default().latency(edge, total_flow)
}

/// Analytic derivative of [`bpr_latency`] with respect to flow.
pub fn bpr_latency_derivative(edge: &EdgeAttr, total_flow: f64) -> Result<f64> {
    Bpr::default().derivative(edge, total_flow)
}

/// Immutable directed graph. Construct a new value to change the topology.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    nodes: Vec<NodeAttr>,
    edges: Vec<EdgeAttr>,
    outgoing: Vec<Vec<EdgeId>>,
    bpr: Bpr,
}

impl Network {
    /// Validates and indexes the graph. Node `k` of `nodes` must carry id `k`.
    pub fn new(nodes: Vec<NodeAttr>, edges: Vec<EdgeAttr>) -> Result<Self> {
        for (k, node) in nodes.iter().enumerate() {
            if node.id != k {
                return Err(Error::Structure(format!(
                    "nodes[{k}]: id {} does not match position",
                    node.id
                )));
            }
            if !(node.population >= 0.0 && node.population.is_finite()) {
                return Err(Error::Structure(format!(
                    "nodes[{k}].population: must be finite and >= 0"
                )));
            }
            if !(node.price_sensitivity >= 0.0 && node.price_sensitivity.is_finite()) {
                return Err(Error::Structure(format!(
                    "nodes[{k}].price_sensitivity: must be finite and >= 0"
                )));
            }
        }
        let mut outgoing = vec![Vec::new(); nodes.len()];
        for (e, edge) in edges.iter().enumerate() {
            if edge.from >= nodes.len() || edge.to >= nodes.len() {
                return Err(Error::Structure(format!(
                    "edges[{e}]: endpoint ({}, {}) references a missing node",
                    edge.from, edge.to
                )));
            }
            if edge.from == edge.to {
                return Err(Error::Structure(format!(
                    "edges[{e}]: self-loop at node {}",
                    edge.from
                )));
            }
            if !(edge.free_flow_time > 0.0 && edge.free_flow_time.is_finite()) {
                return Err(Error::Structure(format!(
                    "edges[{e}].free_flow_time: must be finite and > 0"
                )));
            }
            if !(edge.capacity > 0.0 && edge.capacity.is_finite()) {
                return Err(Error::Structure(format!(
                    "edges[{e}].capacity: must be finite and > 0"
                )));
            }
            outgoing[edge.from].push(e);
        }
        Ok(Network {
            nodes,
            edges,
            outgoing,
            bpr: Bpr::default(),
        })
    }

    pub fn with_bpr(mut self, bpr: Bpr) -> Self {
        self.bpr = bpr;
        self
    }

    pub fn nodes(&self) -> &[NodeAttr] {
        &self.nodes
    }

    pub fn edges(&self) -> &[EdgeAttr] {
        &self.edges
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edge(&self, id: EdgeId) -> &EdgeAttr {
        &self.edges[id]
    }

    /// Outgoing edge ids of `node`, in ascending order.
    pub fn outgoing(&self, node: NodeId) -> &[EdgeId] {
        &self.outgoing[node]
    }

    pub fn bpr(&self) -> Bpr {
        self.bpr
    }

    pub fn contains_node(&self, node: NodeId) -> bool {
        node < self.nodes.len()
    }

    /// Per-edge BPR travel times under the given total edge loads.
    pub fn loaded_costs(&self, load: &[f64]) -> Result<EdgeCosts> {
        if load.len() != self.edges.len() {
            return Err(Error::Structure(format!(
                "load vector has {} entries for {} edges",
                load.len(),
                self.edges.len()
            )));
        }
        let costs = self
            .edges
            .iter()
            .zip(load)
            .map(|(edge, &flow)| self.bpr.latency(edge, flow))
            .collect::<Result<Vec<_>>>()?;
        Ok(EdgeCosts(costs))
    }

    pub fn free_flow_costs(&self) -> EdgeCosts {
        EdgeCosts(self.edges.iter().map(|e| e.free_flow_time).collect())
    }
}

/// One nonnegative cost per edge.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeCosts(Vec<f64>);

impl EdgeCosts {
    pub fn new(costs: Vec<f64>) -> Result<Self> {
        if let Some((e, c)) = costs
            .iter()
            .enumerate()
            .find(|(_, c)| !(c.is_finite() && **c >= 0.0))
        {
            return Err(Error::Domain(format!(
                "edge {e} cost must be finite and >= 0, got {c}"
            )));
        }
        Ok(EdgeCosts(costs))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl std::ops::Index<EdgeId> for EdgeCosts {
    type Output = f64;

    fn index(&self, e: EdgeId) -> &f64 {
        &self.0[e]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn edge(t0: f64, cap: f64) -> EdgeAttr {
        EdgeAttr::new(0, 1, t0, cap)
    }

    #[test]
    fn bpr_examples() {
        assert_eq!(bpr_latency(&edge(1.0, 100.0), 0.0).unwrap(), 1.0);
        assert_relative_eq!(bpr_latency(&edge(1.0, 100.0), 100.0).unwrap(), 1.15);
        assert_relative_eq!(bpr_latency(&edge(2.0, 50.0), 100.0).unwrap(), 6.8);
    }

    #[test]
    fn derivative_examples() {
        assert_eq!(bpr_latency_derivative(&edge(1.0, 100.0), 0.0).unwrap(), 0.0);
        assert_relative_eq!(bpr_latency_derivative(&edge(1.0, 1.0), 1.0).unwrap(), 0.6);
        let e = edge(2.0, 50.0);
        let h = 1e-3;
        let fd = (bpr_latency(&e, 100.0 + h).unwrap() - bpr_latency(&e, 100.0 - h).unwrap())
            / (2.0 * h);
        assert_relative_eq!(
            bpr_latency_derivative(&e, 100.0).unwrap(),
            fd,
            max_relative = 1e-6
        );
    }

    #[test]
    fn negative_flow_is_domain_error() {
        assert!(matches!(bpr_latency(&edge(1.0, 1.0), -1.0), Err(Error::Domain(_))));
        assert!(matches!(
            bpr_latency_derivative(&edge(1.0, 1.0), -0.5),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn rejects_bad_graphs() {
        let nodes = vec![NodeAttr::new(0), NodeAttr::new(1)];
        assert!(Network::new(nodes.clone(), vec![EdgeAttr::new(0, 0, 1.0, 1.0)]).is_err());
        assert!(Network::new(nodes.clone(), vec![EdgeAttr::new(0, 2, 1.0, 1.0)]).is_err());
        assert!(Network::new(nodes.clone(), vec![EdgeAttr::new(0, 1, 0.0, 1.0)]).is_err());
        assert!(Network::new(nodes.clone(), vec![EdgeAttr::new(0, 1, 1.0, -1.0)]).is_err());
        let mut bad = nodes.clone();
        bad[1].population = -1.0;
        assert!(Network::new(bad, vec![]).is_err());
    }

    #[test]
    fn adjacency_matches_edge_list() {
        let nodes = (0..3).map(NodeAttr::new).collect();
        let edges = vec![
            EdgeAttr::new(0, 1, 1.0, 1.0),
            EdgeAttr::new(1, 2, 1.0, 1.0),
            EdgeAttr::new(0, 2, 1.0, 1.0),
        ];
        let net = Network::new(nodes, edges).unwrap();
        assert_eq!(net.outgoing(0), &[0, 2]);
        assert_eq!(net.outgoing(1), &[1]);
        assert!(net.outgoing(2).is_empty());
        let total: usize = (0..3).map(|v| net.outgoing(v).len()).sum();
        assert_eq!(total, net.edge_count());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn latency_is_monotone(t0 in 0.1f64..100.0, cap in 1.0f64..1000.0,
                               a in 0.0f64..5000.0, b in 0.0f64..5000.0) {
            let e = edge(t0, cap);
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            prop_assert!(bpr_latency(&e, lo).unwrap() <= bpr_latency(&e, hi).unwrap());
        }

        #[test]
        fn derivative_matches_central_difference(t0 in 0.1f64..100.0, cap in 20.0f64..1000.0,
                                                 ratio in 0.05f64..5.0) {
            // Five-point central stencil; exact for the quartic up to rounding.
            let e = edge(t0, cap);
            let flow = ratio * cap;
            let h = 0.1 * flow;
            let f = |x: f64| bpr_latency(&e, x).unwrap();
            let fd = (f(flow - 2.0 * h) - 8.0 * f(flow - h) + 8.0 * f(flow + h) - f(flow + 2.0 * h))
                / (12.0 * h);
            let d = bpr_latency_derivative(&e, flow).unwrap();
            prop_assert!((d - fd).abs() <= 1e-6 * d.abs(), "analytic {} vs fd {}", d, fd);
        }
    }
}
