//! Factor-2 solver for diversity-constrained clustering.
//!
//! The driver scans the distinct bichromatic edge weights in ascending order.
//! At each threshold it tries to find a maximal independent set `I` of the
//! threshold graph that supports a *valid* spanning star forest (stars
//! centered on `I`, every star with at least `l` members of pairwise-distinct
//! colors):
//!
//! 1. `f_test` checks by a circulation whether a *semi-valid* spanning star
//!    forest exists (stars reach `l` distinct colors but may carry extra
//!    members of repeated colors). Failure rejects the threshold outright.
//! 2. `m_test` checks per color class whether all non-center points can be
//!    matched to distinct centers. A Hall violator `(S, NS)` found here
//!    enlarges the independent set: `I <- (I - NS) + S`, re-extended to
//!    maximal, and the loop repeats; `|I|` grows every round, so there are
//!    at most `n` iterations.
//! 3. When both tests pass, `extract_valid_forest` prunes duplicate-colored
//!    overflow members and repairs each color class with a warm-started
//!    matching, yielding a valid clustering of radius at most the threshold.
//!
//! The first threshold that succeeds is returned. Success is guaranteed no
//! later than the optimal cluster diameter, which gives max radius <= d* <=
//! 2 r*.

use crate::flow::{feasible_flow_with_lower_bounds, Feasibility, FlowNetwork};
use crate::instance::{Cluster, Clustering, ColorId, Instance, PointId, ThresholdGraph};
use crate::matching::{max_matching, Bipartite, Matching, SaturationResult};
use crate::outlier::check_feasible;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum SolveError {
    #[error("l must be at least 1, got {0}")]
    InvalidL(usize),
    #[error("infeasible: color {color} has {count} points, more than floor({n}/{l}) = {bound}")]
    Infeasible {
        color: ColorId,
        count: usize,
        n: usize,
        l: usize,
        bound: usize,
    },
    #[error("threshold scan exhausted without finding a clustering (internal bug)")]
    ExhaustedThresholds,
}

/// Star assignment produced by a passing `f_test`: per center, the members
/// routed through color slots (pairwise-distinct colors) and the overflow
/// members (colors may repeat). Every point appears exactly once.
#[derive(Debug, Clone)]
pub struct SemiValidAssignment {
    pub centers: Vec<PointId>,
    pub slot_members: Vec<Vec<PointId>>,
    pub overflow_members: Vec<Vec<PointId>>,
}

#[derive(Debug)]
pub enum MTestResult {
    /// Saturating matchings, one per color class with non-center points:
    /// `(color, pairs of (center, point))`.
    Pass(Vec<(ColorId, Vec<(PointId, PointId)>)>),
    /// Hall violator: points `s` of one color with too-small center
    /// neighborhood `ns`.
    Fail { s: Vec<PointId>, ns: Vec<PointId> },
}

/// Greedy maximal independent set, ascending point ids.
pub fn greedy_maximal_is(g: &ThresholdGraph) -> Vec<PointId> {
    let mut is_ = Vec::new();
    extend_to_maximal(g, &mut is_);
    is_
}

/// Adds points in ascending id order until the set is maximal.
pub fn extend_to_maximal(g: &ThresholdGraph, is_: &mut Vec<PointId>) {
    let n = g.instance().n();
    let mut blocked = vec![false; n];
    for &v in is_.iter() {
        blocked[v] = true;
        for &u in g.neighbors(v) {
            blocked[u] = true;
        }
    }
    for v in 0..n {
        if !blocked[v] {
            is_.push(v);
            for &u in g.neighbors(v) {
                blocked[u] = true;
            }
        }
    }
    is_.sort_unstable();
}

pub fn is_independent(g: &ThresholdGraph, set: &[PointId]) -> bool {
    set.iter()
        .all(|&v| g.neighbors(v).iter().all(|u| !set.contains(u)))
}

pub fn is_maximal_independent(g: &ThresholdGraph, set: &[PointId]) -> bool {
    is_independent(g, set)
        && (0..g.instance().n())
            .filter(|v| !set.contains(v))
            .all(|v| g.neighbors(v).iter().any(|u| set.contains(u)))
}

/// Flow test: does a semi-valid spanning star forest with centers `is_`
/// exist? The network routes every point through a per-center color slot
/// (capacity 1, feeding the center's lower-bounded arc to the sink) or a
/// per-center overflow node. Passing means an n-unit flow exists.
pub fn f_test(g: &ThresholdGraph, is_: &[PointId], l: usize) -> Option<SemiValidAssignment> {
    let inst = g.instance();
    let n = inst.n();
    let k = inst.color_count();
    let mut net = FlowNetwork::new(2 + n);
    let source = 0usize;
    let sink = 1usize;
    let point_node = |v: PointId| 2 + v;

    for v in 0..n {
        net.add_arc(source, point_node(v), 0, Some(1));
    }

    // (arc index, point, center position, via_slot)
    let mut assignment_arcs: Vec<(usize, PointId, usize, bool)> = Vec::new();
    for (j, &center) in is_.iter().enumerate() {
        let center_node = net.add_node();
        net.add_arc(center_node, sink, l as i64, None);
        let mut slot_node = vec![usize::MAX; k];
        let mut eligible: Vec<PointId> = vec![center];
        eligible.extend_from_slice(g.neighbors(center));
        let overflow_node = net.add_node();
        net.add_arc(overflow_node, sink, 0, None);
        for &v in &eligible {
            let c = inst.color(v);
            if slot_node[c] == usize::MAX {
                slot_node[c] = net.add_node();
                net.add_arc(slot_node[c], center_node, 0, Some(1));
            }
            let a = net.add_arc(point_node(v), slot_node[c], 0, None);
            assignment_arcs.push((a, v, j, true));
            let a = net.add_arc(point_node(v), overflow_node, 0, None);
            assignment_arcs.push((a, v, j, false));
        }
    }

    let flows = match feasible_flow_with_lower_bounds(&net, Some((source, sink, n as i64)))
        .expect("f-test network is well formed")
    {
        Feasibility::Feasible(flows) => flows,
        Feasibility::Infeasible => return None,
    };

    let mut slot_members = vec![Vec::new(); is_.len()];
    let mut overflow_members = vec![Vec::new(); is_.len()];
    let mut assigned = vec![false; n];
    for &(arc, v, j, via_slot) in &assignment_arcs {
        if flows[arc] == 1 {
            assert!(!assigned[v], "point {v} routed twice");
            assigned[v] = true;
            if via_slot {
                slot_members[j].push(v);
            } else {
                overflow_members[j].push(v);
            }
        }
    }
    assert!(
        assigned.iter().all(|&a| a),
        "n-unit flow must cover all points"
    );
    for members in slot_members.iter_mut().chain(overflow_members.iter_mut()) {
        members.sort_unstable();
    }
    Some(SemiValidAssignment {
        centers: is_.to_vec(),
        slot_members,
        overflow_members,
    })
}

/// Matching test: for each color class `C` (ascending color id), can all
/// points of `C` outside `is_` be matched to pairwise-distinct centers not of
/// color `C`? Returns the first Hall violator found.
pub fn m_test(g: &ThresholdGraph, is_: &[PointId]) -> MTestResult {
    let inst = g.instance();
    let mut matchings = Vec::new();
    for color in 0..inst.color_count() {
        let (left, right, b) = color_class_graph(g, is_, color);
        if right.is_empty() {
            continue;
        }
        match crate::matching::saturating_or_violator(&b) {
            SaturationResult::Saturating(m) => {
                let pairs = m
                    .pairs
                    .iter()
                    .map(|&(li, ri)| (left[li], right[ri]))
                    .collect();
                matchings.push((color, pairs));
            }
            SaturationResult::Violator { s, ns } => {
                return MTestResult::Fail {
                    s: s.into_iter().map(|ri| right[ri]).collect(),
                    ns: ns.into_iter().map(|li| left[li]).collect(),
                };
            }
        }
    }
    MTestResult::Pass(matchings)
}

/// Bipartite graph B(I-C, C-I) for one color class, with id maps.
fn color_class_graph<'a>(
    g: &ThresholdGraph<'a>,
    is_: &[PointId],
    color: ColorId,
) -> (Vec<PointId>, Vec<PointId>, Bipartite) {
    let inst = g.instance();
    let left: Vec<PointId> = is_
        .iter()
        .copied()
        .filter(|&c| inst.color(c) != color)
        .collect();
    let right: Vec<PointId> = (0..inst.n())
        .filter(|&v| inst.color(v) == color && !is_.contains(&v))
        .collect();
    let mut edges = Vec::new();
    for (li, &c) in left.iter().enumerate() {
        for (ri, &v) in right.iter().enumerate() {
            if g.adjacent(c, v) {
                edges.push((li, ri));
            }
        }
    }
    let b = Bipartite::new(left.len(), right.len(), &edges).expect("indices in range");
    (left, right, b)
}

/// `I <- (I - NS) + S`, then re-extended to maximal by ascending ids.
/// The result is again independent (S is monochromatic and NS is its whole
/// center neighborhood) and strictly larger.
pub fn augment_is(
    g: &ThresholdGraph,
    is_: &[PointId],
    s: &[PointId],
    ns: &[PointId],
) -> Vec<PointId> {
    let mut next: Vec<PointId> = is_.iter().copied().filter(|v| !ns.contains(v)).collect();
    next.extend_from_slice(s);
    next.sort_unstable();
    next.dedup();
    debug_assert!(
        is_independent(g, &next),
        "augmented set must stay independent"
    );
    extend_to_maximal(g, &mut next);
    debug_assert!(next.len() > is_.len(), "independent set must grow");
    next
}

/// Turns a passing pair of tests into a valid clustering: prune duplicate
/// colors down to one member each (keeping lowest ids), then for every color
/// class re-match all non-center points, warm-starting from the pruned stars
/// so no star loses a color it already had.
pub fn extract_valid_forest(
    g: &ThresholdGraph,
    is_: &[PointId],
    semi: &SemiValidAssignment,
) -> Clustering {
    let inst = g.instance();
    let k = inst.color_count();
    // pruned stars: first member of each color per star, ascending ids
    let mut pruned: Vec<Vec<PointId>> = Vec::with_capacity(is_.len());
    for j in 0..is_.len() {
        let mut members: Vec<PointId> = semi.slot_members[j]
            .iter()
            .chain(&semi.overflow_members[j])
            .copied()
            .collect();
        members.sort_unstable();
        let mut seen = vec![false; k];
        members.retain(|&v| {
            let c = inst.color(v);
            !seen[c] && {
                seen[c] = true;
                true
            }
        });
        debug_assert!(
            members.contains(&semi.centers[j]),
            "center stays in its star"
        );
        pruned.push(members);
    }

    // per color class, repair assignments by warm-started maximum matching
    let mut star_of = vec![usize::MAX; inst.n()];
    for (j, &c) in is_.iter().enumerate() {
        star_of[c] = j;
    }
    for color in 0..k {
        let (left, right, b) = color_class_graph(g, is_, color);
        if right.is_empty() {
            continue;
        }
        let mut initial = Matching::default();
        for (j, members) in pruned.iter().enumerate() {
            if inst.color(is_[j]) == color {
                continue;
            }
            for &v in members {
                if v != is_[j] && inst.color(v) == color {
                    let li = left.iter().position(|&c| c == is_[j]).unwrap();
                    let ri = right.iter().position(|&p| p == v).unwrap();
                    initial.pairs.push((li, ri));
                }
            }
        }
        let m = max_matching(&b, &initial).expect("pruned stars form a matching");
        assert_eq!(
            m.pairs.len(),
            right.len(),
            "m_test passed, so every color class saturates"
        );
        for &(li, ri) in &m.pairs {
            star_of[right[ri]] = star_of[left[li]];
        }
    }

    let mut members = vec![Vec::new(); is_.len()];
    for v in 0..inst.n() {
        assert!(star_of[v] != usize::MAX, "every point is assigned");
        members[star_of[v]].push(v);
    }
    let clusters: Vec<Cluster> = is_
        .iter()
        .zip(members)
        .map(|(&center, members)| {
            let radius = members
                .iter()
                .map(|&m| inst.distance(center, m))
                .fold(0.0, f64::max);
            Cluster {
                center,
                members,
                radius,
            }
        })
        .collect();
    Clustering::new(g.threshold(), clusters, Vec::new())
}

/// One round of the per-threshold algorithm, recording the independent set
/// after every iteration so invariants can be audited.
#[derive(Debug, Default)]
pub struct SolveTrace {
    pub iterations: Vec<IterationRecord>,
}

#[derive(Debug)]
pub struct IterationRecord {
    pub independent_set: Vec<PointId>,
    pub independent: bool,
    pub maximal: bool,
}

pub fn solve_threshold(g: &ThresholdGraph, l: usize) -> Option<Clustering> {
    solve_threshold_traced(g, l, &mut SolveTrace::default())
}

/// Runs the per-threshold loop: start from a greedy maximal independent set;
/// fail the threshold when `f_test` fails; extract when `m_test` passes;
/// otherwise augment and repeat. Terminates within n iterations.
pub fn solve_threshold_traced(
    g: &ThresholdGraph,
    l: usize,
    trace: &mut SolveTrace,
) -> Option<Clustering> {
    let n = g.instance().n();
    let mut is_ = greedy_maximal_is(g);
    for _ in 0..=n {
        trace.iterations.push(IterationRecord {
            independent_set: is_.clone(),
            independent: is_independent(g, &is_),
            maximal: is_maximal_independent(g, &is_),
        });
        let semi = f_test(g, &is_, l)?;
        match m_test(g, &is_) {
            MTestResult::Pass(_) => return Some(extract_valid_forest(g, &is_, &semi)),
            MTestResult::Fail { s, ns } => {
                is_ = augment_is(g, &is_, &s, &ns);
            }
        }
    }
    unreachable!("|I| grows every iteration and is bounded by n");
}

/// Full solver: feasibility check, then the ascending threshold scan.
/// The returned clustering has max radius at most the optimal diameter,
/// hence at most twice the optimal radius.
///
/// ```
/// use divclust::instance::Instance;
/// use divclust::solver::solve;
///
/// // four points on a line, alternating colors
/// let inst = Instance::from_coords(
///     vec![vec![0.0], vec![1.0], vec![2.0], vec![3.0]],
///     vec![0, 1, 0, 1],
///     2,
/// )?;
/// let clustering = solve(&inst, 2)?;
/// assert_eq!(clustering.threshold, 1.0);
/// assert_eq!(clustering.clusters.len(), 2);
/// # Ok::<(), Box<dyn std::error::Error>>(())
/// ```
pub fn solve(inst: &Instance, l: usize) -> Result<Clustering, SolveError> {
    if l == 0 {
        return Err(SolveError::InvalidL(l));
    }
    if l == 1 {
        // every singleton is a valid cluster
        let clusters = (0..inst.n())
            .map(|v| Cluster {
                center: v,
                members: vec![v],
                radius: 0.0,
            })
            .collect();
        return Ok(Clustering::new(0.0, clusters, Vec::new()));
    }
    if !check_feasible(inst, l).expect("l >= 1") {
        let counts = inst.color_counts();
        let (color, &count) = counts
            .iter()
            .enumerate()
            .max_by_key(|(_, &c)| c)
            .expect("nonempty");
        return Err(SolveError::Infeasible {
            color,
            count,
            n: inst.n(),
            l,
            bound: inst.n() / l,
        });
    }
    for w in inst.sorted_edge_weights() {
        let g = inst.threshold_graph(w);
        if let Some(clustering) = solve_threshold(&g, l) {
            return Ok(clustering);
        }
    }
    Err(SolveError::ExhaustedThresholds)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::evaluate;
    use crate::oracle::exact_solve;
    use crate::test_util::{line_abab, rng_instance, two_groups_line};

    #[test]
    fn greedy_is_on_line_fixture() {
        let inst = line_abab();
        let g = inst.threshold_graph(1.0);
        assert_eq!(greedy_maximal_is(&g), vec![0, 2]);
    }

    #[test]
    fn f_test_line_fixture_passes_with_expected_stars() {
        let inst = line_abab();
        let g = inst.threshold_graph(1.0);
        let semi = f_test(&g, &[0, 2], 2).expect("passes");
        let star0: Vec<_> = semi.slot_members[0]
            .iter()
            .chain(&semi.overflow_members[0])
            .copied()
            .collect();
        let star1: Vec<_> = semi.slot_members[1]
            .iter()
            .chain(&semi.overflow_members[1])
            .copied()
            .collect();
        assert_eq!(star0, vec![0, 1]);
        assert_eq!(star1, vec![2, 3]);
    }

    #[test]
    fn f_test_four_point_flow_value_is_four() {
        // two centers, l = 2: a passing test routes all n = |I| * l = 4 points
        let inst = line_abab();
        let g = inst.threshold_graph(1.0);
        let semi = f_test(&g, &[1, 3], 2).expect("centers 1,3 are maximal");
        let total: usize = (0..2)
            .map(|j| semi.slot_members[j].len() + semi.overflow_members[j].len())
            .sum();
        assert_eq!(total, 4);
        for j in 0..2 {
            let colors: std::collections::BTreeSet<_> = semi.slot_members[j]
                .iter()
                .map(|&v| inst.color(v))
                .collect();
            assert!(colors.len() >= 2, "star {j} reaches l distinct colors");
        }
    }

    #[test]
    fn f_test_fails_when_b_points_are_scarce() {
        // a@0 b@1 a@2 | b@10 a@11 b@12 at w=1: centers {0,2,4} need two
        // b-neighbors for the two a-centers near the origin, but only b@1
        // is in reach
        let inst = two_groups_line();
        let g = inst.threshold_graph(1.0);
        assert!(is_maximal_independent(&g, &[0, 2, 4]));
        assert!(f_test(&g, &[0, 2, 4], 2).is_none());
    }

    #[test]
    fn m_test_line_fixture_passes() {
        let inst = line_abab();
        let g = inst.threshold_graph(1.0);
        match m_test(&g, &[0, 2]) {
            MTestResult::Pass(matchings) => {
                assert_eq!(matchings, vec![(1, vec![(0, 1), (2, 3)])]);
            }
            MTestResult::Fail { .. } => panic!("b-class saturates"),
        }
    }

    #[test]
    fn m_test_two_groups_violator() {
        // I = {b@1, a@11}: color a leaves right {0, 2} with single center 1
        let inst = two_groups_line();
        let g = inst.threshold_graph(1.0);
        match m_test(&g, &[1, 4]) {
            MTestResult::Fail { s, ns } => {
                assert_eq!(s, vec![0, 2]);
                assert_eq!(ns, vec![1]);
            }
            MTestResult::Pass(_) => panic!("color a cannot saturate"),
        }
    }

    #[test]
    fn m_test_all_distinct_colors_vacuous() {
        let inst =
            Instance::from_coords(vec![vec![0.0], vec![1.0], vec![2.0]], vec![0, 1, 2], 2).unwrap();
        let g = inst.threshold_graph(2.0);
        let is_ = greedy_maximal_is(&g);
        match m_test(&g, &is_) {
            MTestResult::Pass(_) => {}
            MTestResult::Fail { .. } => panic!("singleton classes saturate vacuously"),
        }
    }

    #[test]
    fn augment_grows_and_stays_independent() {
        let inst = two_groups_line();
        let g = inst.threshold_graph(1.0);
        let next = augment_is(&g, &[1, 4], &[0, 2], &[1]);
        assert!(next.contains(&0) && next.contains(&2) && next.contains(&4));
        assert!(next.len() >= 3);
        assert!(is_maximal_independent(&g, &next));

        // S = {x}, NS = {} grows by at least one
        let inst2 = line_abab();
        let g2 = inst2.threshold_graph(1.0);
        let grown = augment_is(&g2, &[1], &[3], &[]);
        assert!(grown.len() >= 2);
    }

    #[test]
    fn extract_line_fixture() {
        let inst = line_abab();
        let g = inst.threshold_graph(1.0);
        let semi = f_test(&g, &[0, 2], 2).unwrap();
        let clustering = extract_valid_forest(&g, &[0, 2], &semi);
        assert_eq!(clustering.clusters.len(), 2);
        assert_eq!(clustering.clusters[0].members, vec![0, 1]);
        assert_eq!(clustering.clusters[1].members, vec![2, 3]);
        assert_eq!(clustering.max_radius(), 1.0);
    }

    #[test]
    fn extract_preserves_already_valid_assignment() {
        let inst = line_abab();
        let g = inst.threshold_graph(1.0);
        let semi = SemiValidAssignment {
            centers: vec![0, 2],
            slot_members: vec![vec![0, 1], vec![2, 3]],
            overflow_members: vec![vec![], vec![]],
        };
        let clustering = extract_valid_forest(&g, &[0, 2], &semi);
        assert_eq!(clustering.clusters[0].members, vec![0, 1]);
        assert_eq!(clustering.clusters[1].members, vec![2, 3]);
    }

    #[test]
    fn solve_threshold_line_and_groups() {
        let inst = line_abab();
        let g = inst.threshold_graph(1.0);
        let c = solve_threshold(&g, 2).expect("succeeds at w = 1");
        assert_eq!(c.max_radius(), 1.0);

        let groups = two_groups_line();
        assert!(solve_threshold(&groups.threshold_graph(1.0), 2).is_none());
        let c8 = solve_threshold(&groups.threshold_graph(8.0), 2).expect("succeeds at w = 8");
        assert!(c8.max_radius() <= 8.0);
        let eval = evaluate(&groups, &c8).unwrap();
        assert!(eval.violations.is_empty());
        assert_eq!(eval.per_cluster.iter().map(|s| s.size).sum::<usize>(), 6);
    }

    #[test]
    fn solve_line_fixture_matches_oracle() {
        let inst = line_abab();
        let c = solve(&inst, 2).unwrap();
        assert_eq!(c.threshold, 1.0);
        let opt = exact_solve(&inst, 2).unwrap();
        assert_eq!(c.max_radius(), opt.optimal_radius);
    }

    #[test]
    fn solve_two_groups_first_success_at_eight() {
        let inst = two_groups_line();
        let c = solve(&inst, 2).unwrap();
        assert_eq!(c.threshold, 8.0);
    }

    #[test]
    fn l_one_short_circuits_to_singletons() {
        let inst = line_abab();
        let c = solve(&inst, 1).unwrap();
        assert_eq!(c.clusters.len(), 4);
        assert_eq!(c.max_radius(), 0.0);
    }

    #[test]
    fn infeasible_instance_reports_bound() {
        let inst = Instance::from_coords(
            (0..6).map(|i| vec![i as f64]).collect(),
            vec![0, 0, 0, 0, 1, 1],
            2,
        )
        .unwrap();
        match solve(&inst, 2) {
            Err(SolveError::Infeasible {
                color,
                count,
                bound,
                ..
            }) => {
                assert_eq!((color, count, bound), (0, 4, 3));
            }
            other => panic!("expected infeasible, got {other:?}"),
        }
    }

    #[test]
    fn random_instances_within_factor_two_of_oracle() {
        let mut rng = rng_instance(1234, 10, 3, 2);
        let mut solved = 0;
        for _ in 0..40 {
            let inst = rng();
            let Ok(opt) = exact_solve(&inst, 2) else {
                continue;
            };
            let c = solve(&inst, 2).unwrap();
            solved += 1;
            let eval = evaluate(&inst, &c).unwrap();
            assert!(eval.violations.is_empty());
            assert!(eval.max_radius <= c.threshold + 1e-9);
            assert!(c.max_radius() <= opt.optimal_diameter + 1e-9);
            assert!(c.max_radius() <= 2.0 * opt.optimal_radius + 1e-9);
        }
        assert!(solved > 10);
    }

    #[test]
    fn trace_shows_growing_maximal_sets() {
        let inst = two_groups_line();
        let g = inst.threshold_graph(8.0);
        let mut trace = SolveTrace::default();
        solve_threshold_traced(&g, 2, &mut trace);
        assert!(!trace.iterations.is_empty());
        for pair in trace.iterations.windows(2) {
            assert!(pair[1].independent_set.len() > pair[0].independent_set.len());
        }
        for rec in &trace.iterations {
            assert!(rec.independent && rec.maximal);
        }
    }
}
