//! Deterministic max-flow / min-cut on real capacities.
//!
//! The solver is Dinic's blocking-flow method. Arcs are scanned in insertion
//! order, so identical networks produce bit-identical flows. Capacities are
//! divided by the largest finite capacity before solving and multiplied back
//! afterwards; residual capacities at or below [`RESIDUAL_EPS`] (in scaled
//! units) count as saturated.

use std::collections::VecDeque;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::numeric::TOLERANCE;
use crate::set_system::Subcollection;

/// Residual positivity threshold after scaling.
pub const RESIDUAL_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Capacity {
    Finite(f64),
    Unbounded,
}

impl Capacity {
    fn scaled(self, scale: f64) -> f64 {
        match self {
            Capacity::Finite(c) => c / scale,
            Capacity::Unbounded => f64::INFINITY,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Arc {
    pub from: usize,
    pub to: usize,
    pub capacity: Capacity,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlowNetwork {
    nodes: usize,
    source: usize,
    sink: usize,
    arcs: Vec<Arc>,
}

impl FlowNetwork {
    pub fn new(nodes: usize, source: usize, sink: usize) -> Result<Self> {
        for node in [source, sink] {
            if node >= nodes {
                return Err(Error::InvalidNode { node, count: nodes });
            }
        }
        if source == sink {
            return Err(Error::SourceIsSink);
        }
        Ok(FlowNetwork {
            nodes,
            source,
            sink,
            arcs: Vec::new(),
        })
    }

    /// Appends an arc and returns its index.
    pub fn add_arc(&mut self, from: usize, to: usize, capacity: Capacity) -> Result<usize> {
        for node in [from, to] {
            if node >= self.nodes {
                return Err(Error::InvalidNode {
                    node,
                    count: self.nodes,
                });
            }
        }
        if let Capacity::Finite(c) = capacity {
            if !(c.is_finite() && c >= 0.0) {
                return Err(Error::InvalidValue {
                    id: format!("arc {from}->{to}"),
                    value: c,
                });
            }
        }
        self.arcs.push(Arc { from, to, capacity });
        Ok(self.arcs.len() - 1)
    }

    pub fn nodes(&self) -> usize {
        self.nodes
    }

    pub fn source(&self) -> usize {
        self.source
    }

    pub fn sink(&self) -> usize {
        self.sink
    }

    pub fn arcs(&self) -> &[Arc] {
        &self.arcs
    }

    /// Total capacity leaving the source (`inf` if any source arc is unbounded).
    pub fn source_capacity(&self) -> f64 {
        self.arcs
            .iter()
            .filter(|a| a.from == self.source)
            .map(|a| match a.capacity {
                Capacity::Finite(c) => c,
                Capacity::Unbounded => f64::INFINITY,
            })
            .sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlowResult {
    pub value: f64,
    /// Flow on each arc, indexed like [`FlowNetwork::arcs`].
    pub flows: Vec<f64>,
    /// `true` for nodes reachable from the source in the final residual graph.
    pub source_side: Vec<bool>,
}

impl FlowResult {
    /// Capacity of the returned cut (arcs from the source side to the sink side).
    pub fn cut_capacity(&self, network: &FlowNetwork) -> f64 {
        network
            .arcs
            .iter()
            .filter(|a| self.source_side[a.from] && !self.source_side[a.to])
            .map(|a| match a.capacity {
                Capacity::Finite(c) => c,
                Capacity::Unbounded => f64::INFINITY,
            })
            .sum()
    }

    pub fn source_side_nodes(&self) -> Vec<usize> {
        self.source_side
            .iter()
            .enumerate()
            .filter_map(|(v, &s)| s.then_some(v))
            .collect()
    }

    /// `true` when the flow fills the source arcs up to tolerance.
    pub fn saturates_source(&self, network: &FlowNetwork) -> bool {
        let demand = network.source_capacity();
        self.value >= demand - TOLERANCE * (1.0 + demand)
    }
}

struct Residual {
    head: Vec<usize>,
    cap: Vec<f64>,
    adj: Vec<Vec<usize>>,
}

impl Residual {
    fn build(network: &FlowNetwork, scale: f64) -> Self {
        let m = network.arcs.len();
        let mut r = Residual {
            head: Vec::with_capacity(2 * m),
            cap: Vec::with_capacity(2 * m),
            adj: vec![Vec::new(); network.nodes],
        };
        for arc in &network.arcs {
            let e = r.head.len();
            r.head.push(arc.to);
            r.cap.push(arc.capacity.scaled(scale));
            r.head.push(arc.from);
            r.cap.push(0.0);
            r.adj[arc.from].push(e);
            r.adj[arc.to].push(e + 1);
        }
        r
    }

    fn levels(&self, source: usize) -> Vec<usize> {
        let mut level = vec![usize::MAX; self.adj.len()];
        level[source] = 0;
        let mut queue = VecDeque::from([source]);
        while let Some(u) = queue.pop_front() {
            for &e in &self.adj[u] {
                let v = self.head[e];
                if self.cap[e] > RESIDUAL_EPS && level[v] == usize::MAX {
                    level[v] = level[u] + 1;
                    queue.push_back(v);
                }
            }
        }
        level
    }

    fn augment(
        &mut self,
        u: usize,
        sink: usize,
        limit: f64,
        level: &[usize],
        next: &mut [usize],
    ) -> f64 {
        if u == sink {
            return limit;
        }
        while next[u] < self.adj[u].len() {
            let e = self.adj[u][next[u]];
            let v = self.head[e];
            if self.cap[e] > RESIDUAL_EPS && level[v] == level[u].wrapping_add(1) {
                let pushed = self.augment(v, sink, limit.min(self.cap[e]), level, next);
                if pushed > 0.0 {
                    self.cap[e] -= pushed;
                    self.cap[e ^ 1] += pushed;
                    return pushed;
                }
            }
            next[u] += 1;
        }
        0.0
    }
}

fn has_unbounded_path(network: &FlowNetwork) -> bool {
    let mut out = vec![Vec::new(); network.nodes];
    for a in network
        .arcs
        .iter()
        .filter(|a| a.capacity == Capacity::Unbounded)
    {
        out[a.from].push(a.to);
    }
    let mut seen = vec![false; network.nodes];
    seen[network.source] = true;
    let mut stack = vec![network.source];
    while let Some(u) = stack.pop() {
        for &v in &out[u] {
            if v == network.sink {
                return true;
            }
            if !seen[v] {
                seen[v] = true;
                stack.push(v);
            }
        }
    }
    false
}

/// Maximum s-t flow together with the minimal min cut (residual reachability).
pub fn max_flow(network: &FlowNetwork) -> Result<FlowResult> {
    if has_unbounded_path(network) {
        return Err(Error::UnboundedFlow);
    }
    let scale = network
        .arcs
        .iter()
        .filter_map(|a| match a.capacity {
            Capacity::Finite(c) => Some(c),
            Capacity::Unbounded => None,
        })
        .fold(0.0f64, f64::max);
    let scale = if scale > 0.0 { scale } else { 1.0 };

    let (s, t) = (network.source, network.sink);
    let mut res = Residual::build(network, scale);
    loop {
        let level = res.levels(s);
        if level[t] == usize::MAX {
            break;
        }
        let mut next = vec![0usize; network.nodes];
        loop {
            let pushed = res.augment(s, t, f64::INFINITY, &level, &mut next);
            if pushed <= 0.0 {
                break;
            }
        }
    }

    let flows: Vec<f64> = network
        .arcs
        .iter()
        .enumerate()
        .map(|(i, a)| {
            let f = res.cap[2 * i + 1] * scale;
            match a.capacity {
                Capacity::Finite(c) => f.clamp(0.0, c),
                Capacity::Unbounded => f.max(0.0),
            }
        })
        .collect();
    let value = network
        .arcs
        .iter()
        .zip(&flows)
        .map(|(a, &f)| {
            if a.from == s {
                f
            } else if a.to == s {
                -f
            } else {
                0.0
            }
        })
        .sum();
    let source_side = res.levels(s).iter().map(|&l| l != usize::MAX).collect();
    Ok(FlowResult {
        value,
        flows,
        source_side,
    })
}

/// Translates a non-saturating flow into the violating subcollection: the
/// sets whose nodes lie on the source side of the min cut.
///
/// `set_nodes` pairs each set-node with its set position.
pub fn cut_subcollection(
    network: &FlowNetwork,
    result: &FlowResult,
    set_nodes: &[(usize, usize)],
) -> Result<Subcollection> {
    if result.saturates_source(network) {
        return Err(Error::NoViolation);
    }
    Ok(Subcollection::from_indices(
        set_nodes
            .iter()
            .filter(|(node, _)| result.source_side[*node])
            .map(|&(_, set)| set)
            .collect(),
    ))
}

/// One arc per line: `from to capacity flow`.
pub fn dump(network: &FlowNetwork, result: &FlowResult) -> String {
    let mut out = String::new();
    for (a, f) in network.arcs.iter().zip(&result.flows) {
        let cap = match a.capacity {
            Capacity::Finite(c) => c.to_string(),
            Capacity::Unbounded => "inf".to_string(),
        };
        let _ = writeln!(out, "{} {} {} {}", a.from, a.to, cap, f);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fin(c: f64) -> Capacity {
        Capacity::Finite(c)
    }

    #[test]
    fn single_arc() {
        let mut n = FlowNetwork::new(2, 0, 1).unwrap();
        n.add_arc(0, 1, fin(3.0)).unwrap();
        let r = max_flow(&n).unwrap();
        assert_eq!(r.value, 3.0);
        assert_eq!(r.source_side_nodes(), vec![0]);
    }

    #[test]
    fn diamond_bottleneck() {
        // s=0, u=1, v=2, t=3
        let mut n = FlowNetwork::new(4, 0, 3).unwrap();
        n.add_arc(0, 1, fin(2.0)).unwrap();
        n.add_arc(0, 2, fin(2.0)).unwrap();
        n.add_arc(1, 3, fin(1.0)).unwrap();
        n.add_arc(2, 3, fin(1.0)).unwrap();
        let r = max_flow(&n).unwrap();
        assert_eq!(r.value, 2.0);
        assert_eq!(r.source_side_nodes(), vec![0, 1, 2]);
        assert_eq!(r.cut_capacity(&n), 2.0);
    }

    #[test]
    fn classic_integer_instance() {
        let mut n = FlowNetwork::new(6, 0, 5).unwrap();
        for (u, v, c) in [
            (0, 1, 10.0),
            (0, 2, 10.0),
            (1, 3, 4.0),
            (1, 4, 8.0),
            (2, 4, 9.0),
            (3, 5, 10.0),
            (4, 3, 6.0),
            (4, 5, 10.0),
        ] {
            n.add_arc(u, v, fin(c)).unwrap();
        }
        let r = max_flow(&n).unwrap();
        assert_eq!(r.value, 19.0);
    }

    #[test]
    fn dirac_network_at_two() {
        // s, S1, S2, atom, t
        let mut n = FlowNetwork::new(5, 0, 4).unwrap();
        n.add_arc(0, 1, fin(0.5)).unwrap();
        n.add_arc(0, 2, fin(0.5)).unwrap();
        n.add_arc(1, 3, Capacity::Unbounded).unwrap();
        n.add_arc(2, 3, Capacity::Unbounded).unwrap();
        n.add_arc(3, 4, fin(1.0)).unwrap();
        let r = max_flow(&n).unwrap();
        assert_eq!(r.value, 1.0);
        assert!(r.saturates_source(&n));
        assert!(matches!(
            cut_subcollection(&n, &r, &[(1, 0), (2, 1)]),
            Err(Error::NoViolation)
        ));
    }

    #[test]
    fn dirac_network_below_two_cuts_both_sets() {
        let c = 1.5;
        let mut n = FlowNetwork::new(5, 0, 4).unwrap();
        n.add_arc(0, 1, fin(1.0 / c)).unwrap();
        n.add_arc(0, 2, fin(1.0 / c)).unwrap();
        n.add_arc(1, 3, Capacity::Unbounded).unwrap();
        n.add_arc(2, 3, Capacity::Unbounded).unwrap();
        n.add_arc(3, 4, fin(1.0)).unwrap();
        let r = max_flow(&n).unwrap();
        assert!((r.value - 1.0).abs() < 1e-12);
        let sub = cut_subcollection(&n, &r, &[(1, 0), (2, 1)]).unwrap();
        assert_eq!(sub.indices(), &[0, 1]);
    }

    #[test]
    fn single_set_overloaded() {
        // lambda = 2, mu(S) = 1, C = 1
        let mut n = FlowNetwork::new(4, 0, 3).unwrap();
        n.add_arc(0, 1, fin(2.0)).unwrap();
        n.add_arc(1, 2, Capacity::Unbounded).unwrap();
        n.add_arc(2, 3, fin(1.0)).unwrap();
        let r = max_flow(&n).unwrap();
        assert_eq!(r.value, 1.0);
        let sub = cut_subcollection(&n, &r, &[(1, 0)]).unwrap();
        assert_eq!(sub.indices(), &[0]);
    }

    #[test]
    fn rejects_unbounded_paths_and_bad_nodes() {
        let mut n = FlowNetwork::new(3, 0, 2).unwrap();
        n.add_arc(0, 1, Capacity::Unbounded).unwrap();
        n.add_arc(1, 2, Capacity::Unbounded).unwrap();
        assert!(matches!(max_flow(&n), Err(Error::UnboundedFlow)));
        assert!(n.add_arc(0, 9, fin(1.0)).is_err());
        assert!(n.add_arc(0, 1, fin(-1.0)).is_err());
        assert!(FlowNetwork::new(2, 1, 1).is_err());
        assert!(FlowNetwork::new(2, 0, 5).is_err());
    }

    #[test]
    fn dump_format() {
        let mut n = FlowNetwork::new(3, 0, 2).unwrap();
        n.add_arc(0, 1, fin(1.5)).unwrap();
        n.add_arc(1, 2, Capacity::Unbounded).unwrap();
        let r = max_flow(&n).unwrap();
        assert_eq!(dump(&n, &r), "0 1 1.5 1.5\n1 2 inf 1.5\n");
    }
}
