//! Exact solver for two-color instances.
//!
//! With two colors and l = 2 every cluster is one point of each color, so a
//! clustering is a perfect matching between the classes and the optimum is
//! the smallest threshold whose graph admits one. The scan reuses the
//! matching found at the previous threshold as a warm start.

use crate::instance::{Cluster, Clustering, Instance};
use crate::matching::{max_matching, Bipartite, Matching};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum TwoColorError {
    #[error("instance has {0} colors, need exactly 2")]
    WrongColorCount(usize),
    #[error("color classes have sizes {a} and {b}; a perfect pairing needs them equal")]
    UnequalClassSizes { a: usize, b: usize },
    #[error("two colors admit clusters of at most 2 distinct colors, so l = {0} is infeasible")]
    UnsupportedL(usize),
}

/// Optimal two-color clustering: pairs matched at the smallest weight whose
/// threshold graph has a perfect matching. The max radius equals that weight
/// and is exactly optimal.
pub fn solve_two_color(inst: &Instance) -> Result<Clustering, TwoColorError> {
    solve_two_color_l(inst, inst.l())
}

pub fn solve_two_color_l(inst: &Instance, l: usize) -> Result<Clustering, TwoColorError> {
    if inst.color_count() != 2 {
        return Err(TwoColorError::WrongColorCount(inst.color_count()));
    }
    if l != 2 {
        return Err(TwoColorError::UnsupportedL(l));
    }
    let class_a: Vec<usize> = (0..inst.n()).filter(|&v| inst.color(v) == 0).collect();
    let class_b: Vec<usize> = (0..inst.n()).filter(|&v| inst.color(v) == 1).collect();
    if class_a.len() != class_b.len() {
        return Err(TwoColorError::UnequalClassSizes {
            a: class_a.len(),
            b: class_b.len(),
        });
    }
    let m = class_a.len();
    let mut warm = Matching::default();
    for w in inst.sorted_edge_weights() {
        let mut edges = Vec::new();
        for (ai, &a) in class_a.iter().enumerate() {
            for (bi, &b) in class_b.iter().enumerate() {
                if inst.distance(a, b) <= w {
                    edges.push((ai, bi));
                }
            }
        }
        let b = Bipartite::new(m, m, &edges).expect("indices in range");
        let matching = max_matching(&b, &warm).expect("warm start stays valid");
        if matching.pairs.len() == m {
            let mut clusters: Vec<Cluster> = matching
                .pairs
                .iter()
                .map(|&(ai, bi)| {
                    let (a, b) = (class_a[ai], class_b[bi]);
                    let (center, other) = (a.min(b), a.max(b));
                    Cluster {
                        center,
                        members: vec![center, other],
                        radius: inst.distance(a, b),
                    }
                })
                .collect();
            clusters.sort_by_key(|c| c.center);
            return Ok(Clustering::new(w, clusters, Vec::new()));
        }
        warm = matching;
    }
    unreachable!("the complete bipartite graph at the largest weight has a perfect matching")
}
