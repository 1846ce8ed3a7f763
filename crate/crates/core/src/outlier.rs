//! Minimum-outlier planning and the constant-factor solver for instances
//! with no feasible clustering.
//!
//! `outlier_plan` computes, from the color counts alone, the number of
//! clusters `p`, the minimum number of outliers `q`, and the set of popular
//! colors (classes larger than `p`, whose surplus must be dropped). The
//! solver then scans thresholds; at each weight it grows metric balls over
//! the unpopular points, shrinks them to a ball graph, routes a cycle
//! through the big balls of every component (via a spanning tree in the
//! 3rd power and an odd/even tree traversal), spreads exactly `p` virtual
//! centers along the cycles by prefix-floor counts, and finally asks a
//! capacitated flow on the 28th power of the augmented graph to assign
//! `n - q` points to the virtual centers. Any step may reject the
//! threshold; the first weight where all six steps succeed yields the
//! answer, with every member within 28 hops (hence 28 threshold-lengths)
//! of its cluster's host point.

use crate::flow::{feasible_flow_with_lower_bounds, Feasibility, FlowNetwork};
use crate::instance::{Cluster, Clustering, ColorId, Instance, PointId, ThresholdGraph};
use crate::solver::SolveError;
use thiserror::Error;

/// How many hops of the augmented threshold graph a cluster may span.
pub const HOP_BOUND: usize = 28;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OutlierPlan {
    /// Number of clusters.
    pub p: usize,
    /// Minimum number of outliers.
    pub q: usize,
    /// Number of popular colors (= popular points per cluster).
    pub z: usize,
    /// Colors with more than `p` points, ascending.
    pub popular: Vec<ColorId>,
    /// Per color, how many of its points must become outliers.
    pub per_color_outliers: Vec<usize>,
}

#[derive(Debug, Error, PartialEq)]
pub enum StepFail {
    #[error("unpopular subgraph has a component of {size} points, need {need}")]
    SmallComponent { size: usize, need: usize },
    #[error("small ball {ball} has no big neighbor")]
    UnattachedSmall { ball: usize },
    #[error("big balls are not mutually reachable within 3 hops")]
    BigsDisconnected,
    #[error("placed {placed} virtual centers, need exactly {need}")]
    WrongCenterCount { placed: usize, need: usize },
    #[error("no assignment of the required size")]
    NoFlow,
}

/// A feasible clustering of the whole instance exists iff no color class
/// exceeds floor(n / l).
pub fn check_feasible(inst: &Instance, l: usize) -> Result<bool, SolveError> {
    if l == 0 {
        return Err(SolveError::InvalidL(l));
    }
    let bound = inst.n() / l;
    Ok(inst.color_counts().iter().all(|&c| c <= bound))
}

/// `p` is the largest integer with `sum_c min(p, |C_c|) >= p * l`; dropping
/// the surplus of every class above `p` is both necessary and sufficient,
/// which pins `q` and the popular set.
pub fn outlier_plan(inst: &Instance, l: usize) -> OutlierPlan {
    assert!(l >= 1, "l must be at least 1");
    let counts = inst.color_counts();
    let n = inst.n();
    let p = (0..=n / l)
        .rev()
        .find(|&p| counts.iter().map(|&c| c.min(p)).sum::<usize>() >= p * l)
        .unwrap_or(0);
    let per_color_outliers: Vec<usize> = counts.iter().map(|&c| c.saturating_sub(p)).collect();
    let q: usize = per_color_outliers.iter().sum();
    let popular: Vec<ColorId> = counts
        .iter()
        .enumerate()
        .filter(|&(_, &c)| c > p)
        .map(|(i, _)| i)
        .collect();
    let z = popular.len();
    let kept = n - q;
    debug_assert!(p * l <= kept && kept < (p + 1) * l);
    debug_assert!(p == 0 || z < l, "maximality of p keeps z below l");
    OutlierPlan {
        p,
        q,
        z,
        popular,
        per_color_outliers,
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ball {
    /// The point the ball was grown around.
    pub center: PointId,
    /// Unpopular points within the threshold of the center, ascending.
    pub members: Vec<PointId>,
    /// Whether the ball reached `l - z` members when it was grown.
    pub big: bool,
}

/// Grows disjoint metric balls of radius `w` over the unpopular points.
/// Fails if some component of the unpopular threshold subgraph is smaller
/// than `l - z`. Greedy and deterministic: always the lowest-id point whose
/// remaining ball is big enough, then a sweep of the rest into small balls.
pub fn grow_balls(
    g: &ThresholdGraph,
    unpopular: &[PointId],
    l_minus_z: usize,
) -> Result<Vec<Ball>, StepFail> {
    assert!(l_minus_z >= 1);
    let inst = g.instance();
    let w = g.threshold();
    let is_unpopular = to_mask(inst.n(), unpopular);

    // step 1: every component of the unpopular subgraph must be big enough
    let mut seen = vec![false; inst.n()];
    for &v in unpopular {
        if seen[v] {
            continue;
        }
        let mut size = 0;
        let mut stack = vec![v];
        seen[v] = true;
        while let Some(u) = stack.pop() {
            size += 1;
            for &x in g.neighbors(u) {
                if is_unpopular[x] && !seen[x] {
                    seen[x] = true;
                    stack.push(x);
                }
            }
        }
        if size < l_minus_z {
            return Err(StepFail::SmallComponent {
                size,
                need: l_minus_z,
            });
        }
    }

    let mut remaining: Vec<PointId> = unpopular.to_vec();
    remaining.sort_unstable();
    let ball_around = |center: PointId, remaining: &[PointId]| -> Vec<PointId> {
        remaining
            .iter()
            .copied()
            .filter(|&u| inst.distance(center, u) <= w)
            .collect()
    };
    let mut balls = Vec::new();
    // big balls first, then sweep the leftovers into small balls
    loop {
        let pick = remaining
            .iter()
            .copied()
            .find(|&v| ball_around(v, &remaining).len() >= l_minus_z);
        match pick {
            Some(v) => {
                let members = ball_around(v, &remaining);
                remaining.retain(|u| !members.contains(u));
                balls.push(Ball {
                    center: v,
                    members,
                    big: true,
                });
            }
            None => break,
        }
    }
    while let Some(&v) = remaining.first() {
        let members = ball_around(v, &remaining);
        debug_assert!(members.len() < l_minus_z);
        remaining.retain(|u| !members.contains(u));
        balls.push(Ball {
            center: v,
            members,
            big: false,
        });
    }
    balls.sort_by_key(|b| b.center);
    Ok(balls)
}

/// Ball graph: two balls are adjacent when a threshold edge between
/// unpopular points crosses them.
#[derive(Debug, Clone)]
pub struct ShrunkenGraph {
    pub balls: Vec<Ball>,
    pub adj: Vec<Vec<usize>>,
}

pub fn shrink(balls: Vec<Ball>, g: &ThresholdGraph) -> ShrunkenGraph {
    let inst = g.instance();
    let mut ball_of = vec![usize::MAX; inst.n()];
    for (i, b) in balls.iter().enumerate() {
        for &v in &b.members {
            ball_of[v] = i;
        }
    }
    let mut adj = vec![Vec::new(); balls.len()];
    for b in &balls {
        for &v in &b.members {
            for &u in g.neighbors(v) {
                let (bi, bj) = (ball_of[v], ball_of[u]);
                if bj != usize::MAX && bi != bj && !adj[bi].contains(&bj) {
                    adj[bi].push(bj);
                    adj[bj].push(bi);
                }
            }
        }
    }
    for a in &mut adj {
        a.sort_unstable();
    }
    ShrunkenGraph { balls, adj }
}

impl ShrunkenGraph {
    /// Connected components, each sorted, ordered by smallest member.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.balls.len()];
        let mut comps = Vec::new();
        for start in 0..self.balls.len() {
            if seen[start] {
                continue;
            }
            let mut comp = Vec::new();
            let mut stack = vec![start];
            seen[start] = true;
            while let Some(b) = stack.pop() {
                comp.push(b);
                for &u in &self.adj[b] {
                    if !seen[u] {
                        seen[u] = true;
                        stack.push(u);
                    }
                }
            }
            comp.sort_unstable();
            comps.push(comp);
        }
        comps
    }
}

/// Rooted tree with deterministic (ascending) child order.
#[derive(Debug, Clone)]
pub struct Tree {
    pub root: usize,
    pub children: Vec<Vec<usize>>,
}

/// Spanning structure of one ball-graph component: a BFS tree over the big
/// balls in the 3-hop power, with every small ball attached as a leaf of its
/// lowest-id big neighbor.
#[derive(Debug, Clone)]
pub struct BigLeafTree {
    /// Tree over local big indices.
    pub tree: Tree,
    /// Local big index -> ball index.
    pub bigs: Vec<usize>,
    /// Local big index -> small ball indices attached to it.
    pub attached_smalls: Vec<Vec<usize>>,
}

pub fn spanning_tree_small_leaves(
    d: &ShrunkenGraph,
    component: &[usize],
) -> Result<BigLeafTree, StepFail> {
    let bigs: Vec<usize> = component
        .iter()
        .copied()
        .filter(|&b| d.balls[b].big)
        .collect();
    let mut attached_smalls = vec![Vec::new(); bigs.len()];
    for &b in component {
        if d.balls[b].big {
            continue;
        }
        let host = d.adj[b]
            .iter()
            .copied()
            .find(|&u| d.balls[u].big)
            .ok_or(StepFail::UnattachedSmall { ball: b })?;
        let local = bigs.binary_search(&host).expect("host is big");
        attached_smalls[local].push(b);
    }
    // big-big adjacency: within 3 hops in the ball graph
    let mut big_adj = vec![Vec::new(); bigs.len()];
    for (li, &b) in bigs.iter().enumerate() {
        let mut dist = vec![usize::MAX; d.balls.len()];
        dist[b] = 0;
        let mut queue = std::collections::VecDeque::from([b]);
        while let Some(u) = queue.pop_front() {
            if dist[u] == 3 {
                continue;
            }
            for &v in &d.adj[u] {
                if dist[v] == usize::MAX {
                    dist[v] = dist[u] + 1;
                    queue.push_back(v);
                }
            }
        }
        for (lj, &b2) in bigs.iter().enumerate() {
            if lj != li && dist[b2] != usize::MAX {
                big_adj[li].push(lj);
            }
        }
    }
    // BFS spanning tree from the lowest big
    let mut children = vec![Vec::new(); bigs.len()];
    let mut seen = vec![false; bigs.len()];
    seen[0] = true;
    let mut queue = std::collections::VecDeque::from([0usize]);
    let mut reached = 1;
    while let Some(u) = queue.pop_front() {
        for &v in &big_adj[u] {
            if !seen[v] {
                seen[v] = true;
                reached += 1;
                children[u].push(v);
                queue.push_back(v);
            }
        }
    }
    if reached != bigs.len() {
        return Err(StepFail::BigsDisconnected);
    }
    Ok(BigLeafTree {
        tree: Tree { root: 0, children },
        bigs,
        attached_smalls,
    })
}

/// Odd/even depth traversal: at odd depth visit the node before its
/// children, at even depth after. The resulting cyclic order has consecutive
/// tree distance at most 3 and closes with distance at most 1.
pub fn traverse(tree: &Tree) -> Vec<usize> {
    fn go(tree: &Tree, v: usize, depth: usize, out: &mut Vec<usize>) {
        if depth % 2 == 1 {
            out.push(v);
            for &u in &tree.children[v] {
                go(tree, u, depth + 1, out);
            }
        } else {
            for &u in &tree.children[v] {
                go(tree, u, depth + 1, out);
            }
            out.push(v);
        }
    }
    let mut out = Vec::with_capacity(tree.children.len());
    go(tree, tree.root, 1, &mut out);
    out
}

/// One component's cycle, in traversal order: each entry is a big ball index
/// together with the small balls attached to it.
pub type ComponentCycle = Vec<(usize, Vec<usize>)>;

/// Spreads virtual centers along the component cycles: walking the cycle,
/// each big node receives floor(delta_j) - floor(delta_{j-1}) centers at its
/// ball center, where delta is the running sum of unit weights
/// (ball size plus attached-leaf sizes, in units of l - z). Arithmetic is
/// exact: integer numerators over the fixed denominator l - z.
pub fn place_virtual_centers(
    plan: &OutlierPlan,
    components: &[ComponentCycle],
    balls: &[Ball],
    l_minus_z: usize,
) -> Result<Vec<PointId>, StepFail> {
    let mut hosts = Vec::new();
    for cycle in components {
        let mut numerator = 0usize; // sum of ball sizes seen so far
        for (big, smalls) in cycle {
            let before = numerator / l_minus_z;
            numerator += balls[*big].members.len();
            for &s in smalls {
                numerator += balls[s].members.len();
            }
            let after = numerator / l_minus_z;
            for _ in before..after {
                hosts.push(balls[*big].center);
            }
        }
    }
    if hosts.len() != plan.p {
        return Err(StepFail::WrongCenterCount {
            placed: hosts.len(),
            need: plan.p,
        });
    }
    Ok(hosts)
}

/// Capacitated assignment on the 28th power of the threshold graph augmented
/// with one virtual center per host: every virtual center must absorb at
/// least `l` points of pairwise-distinct colors, each within 28 hops, and
/// exactly `demand` points must be absorbed in total. Unassigned points
/// become the outliers.
pub fn outlier_f_test(
    g: &ThresholdGraph,
    hosts: &[PointId],
    l: usize,
    demand: usize,
) -> Result<Clustering, StepFail> {
    let inst = g.instance();
    let n = inst.n();
    let p = hosts.len();

    // eligibility: points within HOP_BOUND hops of each virtual center in the
    // augmented graph (virtual centers sit on their hosts by zero-length
    // edges, so hop 1 from a virtual center is its host)
    let mut eligible: Vec<Vec<PointId>> = Vec::with_capacity(p);
    for &host in hosts {
        let mut dist = vec![usize::MAX; n];
        dist[host] = 1;
        let mut queue = std::collections::VecDeque::from([host]);
        let mut reach = vec![host];
        while let Some(u) = queue.pop_front() {
            if dist[u] == HOP_BOUND {
                continue;
            }
            for &v in g.neighbors(u) {
                if dist[v] == usize::MAX {
                    dist[v] = dist[u] + 1;
                    reach.push(v);
                    queue.push_back(v);
                }
            }
        }
        reach.sort_unstable();
        eligible.push(reach);
    }

    let mut net = FlowNetwork::new(2 + n);
    let source = 0usize;
    let sink = 1usize;
    let point_node = |v: PointId| 2 + v;
    for v in 0..n {
        net.add_arc(source, point_node(v), 0, Some(1));
    }
    let k = inst.color_count();
    let mut assignment_arcs: Vec<(usize, PointId, usize)> = Vec::new();
    for (j, reach) in eligible.iter().enumerate() {
        let center_node = net.add_node();
        net.add_arc(center_node, sink, l as i64, None);
        let mut slot = vec![usize::MAX; k];
        for &v in reach {
            let c = inst.color(v);
            if slot[c] == usize::MAX {
                slot[c] = net.add_node();
                net.add_arc(slot[c], center_node, 0, Some(1));
            }
            let a = net.add_arc(point_node(v), slot[c], 0, None);
            assignment_arcs.push((a, v, j));
        }
    }
    let flows = match feasible_flow_with_lower_bounds(&net, Some((source, sink, demand as i64)))
        .expect("outlier flow network is well formed")
    {
        Feasibility::Feasible(f) => f,
        Feasibility::Infeasible => return Err(StepFail::NoFlow),
    };

    let mut members: Vec<Vec<PointId>> = vec![Vec::new(); p];
    let mut assigned = vec![false; n];
    for &(arc, v, j) in &assignment_arcs {
        if flows[arc] == 1 {
            assert!(!assigned[v]);
            assigned[v] = true;
            members[j].push(v);
        }
    }
    let clusters: Vec<Cluster> = hosts
        .iter()
        .zip(members)
        .map(|(&host, members)| {
            assert!(members.len() >= l);
            let radius = members
                .iter()
                .map(|&m| inst.distance(host, m))
                .fold(0.0, f64::max);
            Cluster {
                center: host,
                members,
                radius,
            }
        })
        .collect();
    let outliers: Vec<PointId> = (0..n).filter(|&v| !assigned[v]).collect();
    debug_assert_eq!(outliers.len(), n - demand);
    Ok(Clustering::new(g.threshold(), clusters, outliers))
}

/// Full outlier solver: plan, then scan thresholds through the six-step
/// pipeline. Returns exactly `p` clusters and exactly `q` outliers; every
/// member lies within 28 threshold-lengths of its cluster's host.
///
/// The cluster count is always exactly `p`, the maximum possible. When
/// `q > 0` every clustering of `n - q` points has exactly `p` clusters
/// anyway; when `q = 0` (a feasible instance) a clustering with fewer
/// clusters can have a strictly smaller radius, so the radius guarantee is
/// relative to the best `p`-cluster solution. Use [`crate::solver::solve`]
/// for feasible instances.
///
/// ```
/// use divclust::instance::Instance;
/// use divclust::outlier::solve_with_outliers;
///
/// // five coincident points of one color and one of another: only one
/// // cluster fits, so three records must be suppressed
/// let inst = Instance::from_coords(
///     vec![vec![0.0]; 6],
///     vec![0, 0, 0, 0, 0, 1],
///     2,
/// )?;
/// let c = solve_with_outliers(&inst, 2)?;
/// assert_eq!((c.p, c.q), (Some(1), Some(4)));
/// assert_eq!(c.outliers.len(), 4);
/// # Ok::<(), Box<dyn std::error::Error>>(())
/// ```
pub fn solve_with_outliers(inst: &Instance, l: usize) -> Result<Clustering, SolveError> {
    if l == 0 {
        return Err(SolveError::InvalidL(l));
    }
    if l == 1 {
        let clusters = (0..inst.n())
            .map(|v| Cluster {
                center: v,
                members: vec![v],
                radius: 0.0,
            })
            .collect();
        let mut c = Clustering::new(0.0, clusters, Vec::new());
        (c.p, c.q, c.z) = (Some(inst.n()), Some(0), Some(0));
        return Ok(c);
    }
    let plan = outlier_plan(inst, l);
    if plan.p == 0 {
        let mut c = Clustering::new(0.0, Vec::new(), (0..inst.n()).collect());
        (c.p, c.q, c.z) = (Some(0), Some(plan.q), Some(plan.z));
        return Ok(c);
    }
    let unpopular: Vec<PointId> = (0..inst.n())
        .filter(|&v| !plan.popular.contains(&inst.color(v)))
        .collect();
    debug_assert!(!unpopular.is_empty());
    for w in inst.sorted_edge_weights() {
        let g = inst.threshold_graph(w);
        if let Ok(mut clustering) = attempt_threshold(&g, &plan, &unpopular, l) {
            (clustering.p, clustering.q, clustering.z) = (Some(plan.p), Some(plan.q), Some(plan.z));
            return Ok(clustering);
        }
    }
    Err(SolveError::ExhaustedThresholds)
}

fn attempt_threshold(
    g: &ThresholdGraph,
    plan: &OutlierPlan,
    unpopular: &[PointId],
    l: usize,
) -> Result<Clustering, StepFail> {
    let l_minus_z = l - plan.z;
    let balls = grow_balls(g, unpopular, l_minus_z)?;
    let d = shrink(balls, g);
    let mut cycles: Vec<ComponentCycle> = Vec::new();
    for comp in d.components() {
        let structure = spanning_tree_small_leaves(&d, &comp)?;
        let order = traverse(&structure.tree);
        cycles.push(
            order
                .into_iter()
                .map(|local| {
                    (
                        structure.bigs[local],
                        structure.attached_smalls[local].clone(),
                    )
                })
                .collect(),
        );
    }
    let hosts = place_virtual_centers(plan, &cycles, &d.balls, l_minus_z)?;
    outlier_f_test(g, &hosts, l, g.instance().n() - plan.q)
}

fn to_mask(n: usize, set: &[PointId]) -> Vec<bool> {
    let mut mask = vec![false; n];
    for &v in set {
        mask[v] = true;
    }
    mask
}
