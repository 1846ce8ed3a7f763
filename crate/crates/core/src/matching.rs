//! Bipartite maximum matching with warm starts and Hall-violator extraction.
//!
//! Left vertices are the candidate star centers, right vertices the points of
//! one color class that need a center. Augmenting-path extension preserves
//! every matched vertex, which is what lets a pruned star forest be repaired
//! color by color without losing the colors a star already has.

use thiserror::Error;

/// Edges go from left indices `0..left` to right indices `0..right`.
#[derive(Debug, Clone)]
pub struct Bipartite {
    left: usize,
    right: usize,
    adj: Vec<Vec<usize>>, // per left vertex, ascending right neighbors
}

/// A matching, stored as `right -> left` (and the inverse).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Matching {
    pub pairs: Vec<(usize, usize)>, // (left, right), sorted by left
}

#[derive(Debug, Error, PartialEq)]
pub enum MatchingError {
    #[error("edge ({0},{1}) out of range")]
    EdgeRange(usize, usize),
    #[error("initial matching uses vertex {0} twice or a missing edge")]
    InvalidInitial(usize),
}

#[derive(Debug, PartialEq)]
pub enum SaturationResult {
    /// Every right vertex is matched.
    Saturating(Matching),
    /// A set S of right vertices with |N(S)| < |S|, and NS = N(S).
    Violator { s: Vec<usize>, ns: Vec<usize> },
}

impl Bipartite {
    pub fn new(left: usize, right: usize, edges: &[(usize, usize)]) -> Result<Self, MatchingError> {
        let mut adj = vec![Vec::new(); left];
        for &(l, r) in edges {
            if l >= left || r >= right {
                return Err(MatchingError::EdgeRange(l, r));
            }
            adj[l].push(r);
        }
        for a in &mut adj {
            a.sort_unstable();
            a.dedup();
        }
        Ok(Bipartite { left, right, adj })
    }

    pub fn left(&self) -> usize {
        self.left
    }

    pub fn right(&self) -> usize {
        self.right
    }

    pub fn neighbors(&self, l: usize) -> &[usize] {
        &self.adj[l]
    }
}

/// Extends `initial` to a maximum matching by augmenting paths. Every vertex
/// matched in `initial` is still matched in the result.
pub fn max_matching(b: &Bipartite, initial: &Matching) -> Result<Matching, MatchingError> {
    let mut right_of = vec![usize::MAX; b.left];
    let mut left_of = vec![usize::MAX; b.right];
    for &(l, r) in &initial.pairs {
        if l >= b.left || r >= b.right || !b.adj[l].contains(&r) {
            return Err(MatchingError::InvalidInitial(l));
        }
        if right_of[l] != usize::MAX {
            return Err(MatchingError::InvalidInitial(l));
        }
        if left_of[r] != usize::MAX {
            return Err(MatchingError::InvalidInitial(r));
        }
        right_of[l] = r;
        left_of[r] = l;
    }
    for l in 0..b.left {
        if right_of[l] == usize::MAX {
            let mut visited = vec![false; b.right];
            try_augment(b, l, &mut visited, &mut right_of, &mut left_of);
        }
    }
    let mut pairs: Vec<(usize, usize)> = right_of
        .iter()
        .enumerate()
        .filter(|(_, &r)| r != usize::MAX)
        .map(|(l, &r)| (l, r))
        .collect();
    pairs.sort_unstable();
    Ok(Matching { pairs })
}

fn try_augment(
    b: &Bipartite,
    l: usize,
    visited: &mut [bool],
    right_of: &mut [usize],
    left_of: &mut [usize],
) -> bool {
    for &r in &b.adj[l] {
        if visited[r] {
            continue;
        }
        visited[r] = true;
        if left_of[r] == usize::MAX || try_augment(b, left_of[r], visited, right_of, left_of) {
            right_of[l] = r;
            left_of[r] = l;
            return true;
        }
    }
    false
}

/// Either a matching saturating the right side, or a Hall violator: the right
/// vertices reachable by alternating paths from some unmatched right vertex
/// (including those), whose whole neighborhood is too small.
pub fn saturating_or_violator(b: &Bipartite) -> SaturationResult {
    let matching = max_matching(b, &Matching::default()).expect("empty initial is valid");
    if matching.pairs.len() == b.right {
        return SaturationResult::Saturating(matching);
    }
    let mut left_of = vec![usize::MAX; b.right];
    let mut right_of = vec![usize::MAX; b.left];
    for &(l, r) in &matching.pairs {
        left_of[r] = l;
        right_of[l] = r;
    }
    // alternating BFS from all unmatched right vertices at once:
    // right -> left over any edge, left -> right over its matching edge
    let mut in_s = vec![false; b.right];
    let mut in_ns = vec![false; b.left];
    let mut queue: std::collections::VecDeque<usize> = (0..b.right)
        .filter(|&r| left_of[r] == usize::MAX)
        .inspect(|&r| in_s[r] = true)
        .collect();
    while let Some(r) = queue.pop_front() {
        for l in 0..b.left {
            if !in_ns[l] && b.adj[l].binary_search(&r).is_ok() {
                in_ns[l] = true;
                let r2 = right_of[l];
                debug_assert!(r2 != usize::MAX, "reachable left vertex must be matched");
                if r2 != usize::MAX && !in_s[r2] {
                    in_s[r2] = true;
                    queue.push_back(r2);
                }
            }
        }
    }
    let s: Vec<usize> = (0..b.right).filter(|&r| in_s[r]).collect();
    let ns: Vec<usize> = (0..b.left).filter(|&l| in_ns[l]).collect();
    debug_assert!(s.len() > ns.len());
    SaturationResult::Violator { s, ns }
}
