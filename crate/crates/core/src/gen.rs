//! Seeded instance generators, including an adversarial family built by
//! expanding 3-dimensional-matching instances into colored graphs whose
//! optimal clusterings are known by construction.

use crate::instance::{metric_completion, ColorId, Instance, InstanceError};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Uniform points in the unit cube with colors drawn by weight (uniform when
/// `color_weights` is `None`). Deterministic in the seed. The generated
/// instance carries l = 2; callers adjust it as needed.
pub fn random_euclidean(
    n: usize,
    k_colors: usize,
    dim: usize,
    seed: u64,
    color_weights: Option<&[f64]>,
) -> Instance {
    assert!(n >= 1 && k_colors >= 1 && dim >= 1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let coords: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..dim).map(|_| rng.random::<f64>()).collect())
        .collect();
    let cumulative: Vec<f64> = match color_weights {
        Some(w) => {
            assert_eq!(w.len(), k_colors);
            let total: f64 = w.iter().sum();
            w.iter()
                .scan(0.0, |acc, x| {
                    *acc += x / total;
                    Some(*acc)
                })
                .collect()
        }
        None => (1..=k_colors).map(|i| i as f64 / k_colors as f64).collect(),
    };
    let colors: Vec<ColorId> = (0..n)
        .map(|_| {
            let r = rng.random::<f64>();
            cumulative
                .iter()
                .position(|&c| r < c)
                .unwrap_or(k_colors - 1)
        })
        .collect();
    Instance::from_coords(coords, colors, 2).unwrap()
}

/// A 3-dimensional-matching instance: tripartite vertex sets of size `m`
/// and hyper-edges (x, y, z).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ThreeDmInstance {
    pub m: usize,
    pub triples: Vec<(usize, usize, usize)>,
}

/// Random 3DM instance; with `planted` the identity matching (i,i,i) is
/// included, so a perfect matching exists by construction.
pub fn random_3dm(m: usize, extra_edges: usize, seed: u64, planted: bool) -> ThreeDmInstance {
    assert!(m >= 1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut triples: Vec<(usize, usize, usize)> = if planted {
        (0..m).map(|i| (i, i, i)).collect()
    } else {
        Vec::new()
    };
    let mut added = 0;
    let mut attempts = 0;
    while added < extra_edges && attempts < 100 * (extra_edges + 1) {
        attempts += 1;
        let t = (
            rng.random_range(0..m),
            rng.random_range(0..m),
            rng.random_range(0..m),
        );
        if !triples.contains(&t) {
            triples.push(t);
            added += 1;
        }
    }
    ThreeDmInstance { m, triples }
}

/// Colored graph obtained by attaching one gadget per hyper-edge, corner
/// slots identified with the triple's vertices.
#[derive(Debug, Clone)]
pub struct GadgetExpansion {
    pub colors: Vec<ColorId>,
    pub adj: Vec<Vec<usize>>,
}

/// Nodes added per hyper-edge besides the three shared corners.
pub const GADGET_INTERNAL_NODES: usize = 9;
pub const GADGET_EDGES: usize = 15;

fn gadget_template() -> (Vec<ColorId>, Vec<(usize, usize)>) {
    let text = include_str!("gen/gadget.txt");
    let mut colors = Vec::new();
    let mut edges = Vec::new();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut parts = line.split_whitespace();
        match parts.next() {
            Some("colors") => {
                colors = parts.map(|p| p.parse().expect("color id")).collect();
            }
            Some("edge") => {
                let u = parts.next().and_then(|p| p.parse().ok()).expect("edge u");
                let v = parts.next().and_then(|p| p.parse().ok()).expect("edge v");
                edges.push((u, v));
            }
            _ => panic!("unrecognized gadget line: {line}"),
        }
    }
    (colors, edges)
}

/// Expands a 3DM instance into the unit-weight gadget graph: vertices of
/// X, Y, Z get colors 0, 1, 2 and each triple contributes one fresh gadget
/// sharing the three corner vertices. The graph admits a partition into
/// connected rainbow triples exactly when the 3DM instance has a perfect
/// matching, and a perfect matching yields a clustering of diameter 1 on the
/// metric completion (l = 3).
pub fn gadget_from_3dm(tdm: &ThreeDmInstance) -> GadgetExpansion {
    let m = tdm.m;
    let (tpl_colors, tpl_edges) = gadget_template();
    let mut colors: Vec<ColorId> = Vec::with_capacity(3 * m + 9 * tdm.triples.len());
    for group in 0..3 {
        colors.extend(std::iter::repeat_n(group, m));
    }
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); 3 * m];
    for &(x, y, z) in &tdm.triples {
        assert!(x < m && y < m && z < m, "triple out of range");
        let base = colors.len();
        colors.extend_from_slice(&tpl_colors[3..]);
        adj.resize(adj.len() + GADGET_INTERNAL_NODES, Vec::new());
        let map = |node: usize| match node {
            0 => x,
            1 => m + y,
            2 => 2 * m + z,
            internal => base + internal - 3,
        };
        for &(u, v) in &tpl_edges {
            let (u, v) = (map(u), map(v));
            adj[u].push(v);
            adj[v].push(u);
        }
    }
    for a in &mut adj {
        a.sort_unstable();
    }
    debug_assert!(adj
        .iter()
        .enumerate()
        .all(|(u, nbrs)| nbrs.iter().all(|&v| colors[u] != colors[v])));
    GadgetExpansion { colors, adj }
}

impl GadgetExpansion {
    pub fn n(&self) -> usize {
        self.colors.len()
    }

    /// Metric completion of the whole graph (l = 3). Fails when the
    /// expansion is disconnected, e.g. for a planted matching with no
    /// overlapping triples; use [`GadgetExpansion::component_instances`]
    /// then.
    pub fn instance(&self) -> Result<Instance, InstanceError> {
        metric_completion(&self.adj, self.colors.clone(), 3)
    }

    /// Metric completion per connected component, skipping isolated corner
    /// vertices (vertices in no triple).
    pub fn component_instances(&self) -> Vec<Instance> {
        let n = self.n();
        let mut seen = vec![false; n];
        let mut out = Vec::new();
        for start in 0..n {
            if seen[start] {
                continue;
            }
            let mut comp = Vec::new();
            let mut stack = vec![start];
            seen[start] = true;
            while let Some(u) = stack.pop() {
                comp.push(u);
                for &v in &self.adj[u] {
                    if !seen[v] {
                        seen[v] = true;
                        stack.push(v);
                    }
                }
            }
            if comp.len() == 1 {
                continue;
            }
            comp.sort_unstable();
            let local = |v: usize| comp.binary_search(&v).unwrap();
            let sub_adj: Vec<Vec<usize>> = comp
                .iter()
                .map(|&u| self.adj[u].iter().map(|&v| local(v)).collect())
                .collect();
            let sub_colors: Vec<ColorId> = comp.iter().map(|&u| self.colors[u]).collect();
            out.push(metric_completion(&sub_adj, sub_colors, 3).expect("components are connected"));
        }
        out
    }
}

/// Counts partitions of the `present` vertices into connected rainbow
/// triples, stopping at `cap`. Exhaustive; intended for gadget-sized graphs.
pub fn count_p3_partitions(
    colors: &[ColorId],
    adj: &[Vec<usize>],
    present: &[bool],
    cap: usize,
) -> usize {
    let live: usize = present.iter().filter(|&&p| p).count();
    if !live.is_multiple_of(3) {
        return 0;
    }
    let mut present = present.to_vec();
    let mut count = 0;
    fn rec(
        colors: &[ColorId],
        adj: &[Vec<usize>],
        present: &mut [bool],
        cap: usize,
        count: &mut usize,
    ) {
        if *count >= cap {
            return;
        }
        let Some(v) = present.iter().position(|&p| p) else {
            *count += 1;
            return;
        };
        // candidate triples containing v: two live vertices within two hops
        let mut candidates: Vec<(usize, usize)> = Vec::new();
        let nbrs: Vec<usize> = adj[v].iter().copied().filter(|&u| present[u]).collect();
        for i in 0..nbrs.len() {
            for j in (i + 1)..nbrs.len() {
                candidates.push((nbrs[i], nbrs[j]));
            }
            for &w in &adj[nbrs[i]] {
                if w != v && present[w] {
                    candidates.push((nbrs[i].min(w), nbrs[i].max(w)));
                }
            }
        }
        candidates.sort_unstable();
        candidates.dedup();
        for (a, b) in candidates {
            if colors[v] == colors[a] || colors[v] == colors[b] || colors[a] == colors[b] {
                continue;
            }
            let edges = adj[v].contains(&a) as usize
                + adj[v].contains(&b) as usize
                + adj[a].contains(&b) as usize;
            if edges < 2 {
                continue;
            }
            present[v] = false;
            present[a] = false;
            present[b] = false;
            rec(colors, adj, present, cap, count);
            present[v] = true;
            present[a] = true;
            present[b] = true;
            if *count >= cap {
                return;
            }
        }
    }
    rec(colors, adj, &mut present, cap, &mut count);
    count
}
