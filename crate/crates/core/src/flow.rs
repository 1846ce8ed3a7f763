//! Integral maximum flow and feasible circulation with arc lower bounds.
//!
//! The solver is a blocking-flow (level graph) algorithm over an explicit
//! residual representation. Lower bounds are handled by the standard
//! transformation: subtract them from capacities, route the forced units
//! through a super-source/super-sink pair, and saturate the excess arcs.

use thiserror::Error;

pub const UNBOUNDED: Option<i64> = None;

#[derive(Debug, Clone)]
pub struct Arc {
    pub tail: usize,
    pub head: usize,
    pub lower: i64,
    /// `None` means uncapacitated; it is resolved to a finite sentinel
    /// (sum of finite bounds + demand + 1) when solving.
    pub upper: Option<i64>,
}

#[derive(Debug, Clone, Default)]
pub struct FlowNetwork {
    nodes: usize,
    arcs: Vec<Arc>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Flow {
    /// Flow per arc, indexed as the arcs were added.
    pub per_arc: Vec<i64>,
    /// Units delivered from source to sink (equals the requested demand for
    /// circulations with a demand arc).
    pub value: i64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Feasibility {
    Feasible(FlowValues),
    Infeasible,
}

pub type FlowValues = Vec<i64>;

#[derive(Debug, Error, PartialEq)]
pub enum FlowError {
    #[error("source and sink must differ")]
    SourceIsSink,
    #[error("arc {0} has lower bound {1} above its upper bound {2}")]
    BoundsCrossed(usize, i64, i64),
    #[error("max_flow requires all lower bounds to be zero (arc {0})")]
    NonzeroLower(usize),
    #[error("node index {0} out of range")]
    NodeRange(usize),
}

impl FlowNetwork {
    pub fn new(nodes: usize) -> Self {
        FlowNetwork {
            nodes,
            arcs: Vec::new(),
        }
    }

    pub fn nodes(&self) -> usize {
        self.nodes
    }

    pub fn add_node(&mut self) -> usize {
        self.nodes += 1;
        self.nodes - 1
    }

    pub fn arcs(&self) -> &[Arc] {
        &self.arcs
    }

    /// Adds an arc and returns its index.
    pub fn add_arc(&mut self, tail: usize, head: usize, lower: i64, upper: Option<i64>) -> usize {
        self.arcs.push(Arc {
            tail,
            head,
            lower,
            upper,
        });
        self.arcs.len() - 1
    }

    fn validate(&self) -> Result<(), FlowError> {
        for (i, a) in self.arcs.iter().enumerate() {
            if a.tail >= self.nodes {
                return Err(FlowError::NodeRange(a.tail));
            }
            if a.head >= self.nodes {
                return Err(FlowError::NodeRange(a.head));
            }
            if let Some(u) = a.upper {
                if a.lower > u {
                    return Err(FlowError::BoundsCrossed(i, a.lower, u));
                }
            }
        }
        Ok(())
    }

    fn sentinel(&self, demand: i64) -> i64 {
        let finite: i64 = self
            .arcs
            .iter()
            .map(|a| a.upper.unwrap_or(0) + a.lower)
            .sum();
        finite + demand + 1
    }
}

/// Maximum integral s-t flow on a network without lower bounds.
pub fn max_flow(net: &FlowNetwork, s: usize, t: usize) -> Result<Flow, FlowError> {
    net.validate()?;
    if s == t {
        return Err(FlowError::SourceIsSink);
    }
    if let Some(i) = net.arcs.iter().position(|a| a.lower != 0) {
        return Err(FlowError::NonzeroLower(i));
    }
    let inf = net.sentinel(0);
    let mut dinic = Dinic::new(net.nodes);
    for a in &net.arcs {
        dinic.add_edge(a.tail, a.head, a.upper.unwrap_or(inf));
    }
    let value = dinic.run(s, t);
    Ok(Flow {
        per_arc: (0..net.arcs.len()).map(|i| dinic.flow_on(i)).collect(),
        value,
    })
}

/// Finds a flow meeting every `[lower, upper]` bound.
///
/// With `st = Some((s, t, demand))`, an auxiliary arc t->s with bounds
/// `[demand, demand]` turns the question into a circulation; the result is a
/// flow carrying exactly `demand` units from s to t. With `st = None` the
/// network itself must support a circulation.
pub fn feasible_flow_with_lower_bounds(
    net: &FlowNetwork,
    st: Option<(usize, usize, i64)>,
) -> Result<Feasibility, FlowError> {
    net.validate()?;
    if let Some((s, t, _)) = st {
        if s == t {
            return Err(FlowError::SourceIsSink);
        }
        if s >= net.nodes {
            return Err(FlowError::NodeRange(s));
        }
        if t >= net.nodes {
            return Err(FlowError::NodeRange(t));
        }
    }
    let demand = st.map_or(0, |(_, _, d)| d);
    let inf = net.sentinel(demand);

    // transformed network: original nodes, plus super source/sink
    let super_s = net.nodes;
    let super_t = net.nodes + 1;
    let mut dinic = Dinic::new(net.nodes + 2);
    let mut excess = vec![0i64; net.nodes];
    for a in &net.arcs {
        let cap = a.upper.unwrap_or(inf) - a.lower;
        dinic.add_edge(a.tail, a.head, cap);
        excess[a.head] += a.lower;
        excess[a.tail] -= a.lower;
    }
    // the demand arc t->s is fully forced, so only its excess remains
    if let Some((s, t, d)) = st {
        excess[s] += d;
        excess[t] -= d;
    }
    let mut required = 0;
    for (v, &e) in excess.iter().enumerate() {
        if e > 0 {
            dinic.add_edge(super_s, v, e);
            required += e;
        } else if e < 0 {
            dinic.add_edge(v, super_t, -e);
        }
    }
    let pushed = dinic.run(super_s, super_t);
    if pushed < required {
        return Ok(Feasibility::Infeasible);
    }
    let per_arc = (0..net.arcs.len())
        .map(|i| net.arcs[i].lower + dinic.flow_on(i))
        .collect();
    Ok(Feasibility::Feasible(per_arc))
}

struct Dinic {
    // edges stored as pairs: 2i forward, 2i+1 reverse; `to` and residual cap
    to: Vec<usize>,
    cap: Vec<i64>,
    adj: Vec<Vec<usize>>,
    level: Vec<i32>,
    iter: Vec<usize>,
}

impl Dinic {
    fn new(n: usize) -> Self {
        Dinic {
            to: Vec::new(),
            cap: Vec::new(),
            adj: vec![Vec::new(); n],
            level: vec![0; n],
            iter: vec![0; n],
        }
    }

    fn add_edge(&mut self, u: usize, v: usize, c: i64) -> usize {
        let id = self.to.len();
        self.adj[u].push(id);
        self.to.push(v);
        self.cap.push(c);
        self.adj[v].push(id + 1);
        self.to.push(u);
        self.cap.push(0);
        id / 2
    }

    /// Flow pushed through edge pair `i` = residual on the reverse edge.
    fn flow_on(&self, i: usize) -> i64 {
        self.cap[2 * i + 1]
    }

    fn run(&mut self, s: usize, t: usize) -> i64 {
        let mut total = 0;
        while self.build_levels(s, t) {
            self.iter.iter_mut().for_each(|i| *i = 0);
            loop {
                let pushed = self.augment(s, t, i64::MAX);
                if pushed == 0 {
                    break;
                }
                total += pushed;
            }
        }
        total
    }

    fn build_levels(&mut self, s: usize, t: usize) -> bool {
        self.level.iter_mut().for_each(|l| *l = -1);
        self.level[s] = 0;
        let mut queue = std::collections::VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            for &e in &self.adj[u] {
                let v = self.to[e];
                if self.cap[e] > 0 && self.level[v] < 0 {
                    self.level[v] = self.level[u] + 1;
                    queue.push_back(v);
                }
            }
        }
        self.level[t] >= 0
    }

    fn augment(&mut self, u: usize, t: usize, limit: i64) -> i64 {
        if u == t {
            return limit;
        }
        while self.iter[u] < self.adj[u].len() {
            let e = self.adj[u][self.iter[u]];
            let v = self.to[e];
            if self.cap[e] > 0 && self.level[v] == self.level[u] + 1 {
                let pushed = self.augment(v, t, limit.min(self.cap[e]));
                if pushed > 0 {
                    self.cap[e] -= pushed;
                    self.cap[e ^ 1] += pushed;
                    return pushed;
                }
            }
            self.iter[u] += 1;
        }
        0
    }
}
