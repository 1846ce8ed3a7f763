//! Exponential-time exact solvers for tiny instances. These are the ground
//! truth the approximation guarantees are checked against.
//!
//! `exact_solve` minimizes the maximum cluster radius over all partitions
//! into valid clusters (size >= l, pairwise-distinct colors, center chosen
//! among the members). `exact_solve_outliers` does the same over all ways to
//! leave exactly `q` points unclustered. Both also report the optimal
//! maximum *diameter*, which is what the threshold scan is compared to.

use crate::instance::{Cluster, Clustering, Instance};
use thiserror::Error;

pub const MAX_EXACT: usize = 14;
pub const MAX_EXACT_OUTLIERS: usize = 12;

#[derive(Debug, Error, PartialEq)]
pub enum OracleError {
    #[error("instance has {n} points; exact solving is capped at {max}")]
    TooLarge { n: usize, max: usize },
    #[error("no feasible clustering (a color class exceeds floor(n/l))")]
    Infeasible,
    #[error("cannot drop {q} of {n} points")]
    BadOutlierCount { q: usize, n: usize },
}

#[derive(Debug, Clone)]
pub struct OracleResult {
    pub clustering: Clustering,
    pub optimal_radius: f64,
    pub optimal_diameter: f64,
}

pub fn exact_solve(inst: &Instance, l: usize) -> Result<OracleResult, OracleError> {
    let n = inst.n();
    if n > MAX_EXACT {
        return Err(OracleError::TooLarge { n, max: MAX_EXACT });
    }
    solve_masks(inst, l, 0)
}

/// Optimal clustering over all ways to drop exactly `q` points.
pub fn exact_solve_outliers(
    inst: &Instance,
    l: usize,
    q: usize,
) -> Result<OracleResult, OracleError> {
    let n = inst.n();
    if n > MAX_EXACT_OUTLIERS {
        return Err(OracleError::TooLarge {
            n,
            max: MAX_EXACT_OUTLIERS,
        });
    }
    if q > n {
        return Err(OracleError::BadOutlierCount { q, n });
    }
    solve_masks(inst, l, q)
}

fn solve_masks(inst: &Instance, l: usize, q: usize) -> Result<OracleResult, OracleError> {
    let n = inst.n();
    let full: usize = (1 << n) - 1;

    // cluster cost tables over all subsets
    let mut cost_r = vec![f64::INFINITY; full + 1];
    let mut best_center = vec![usize::MAX; full + 1];
    let mut cost_d = vec![f64::INFINITY; full + 1];
    let mut valid = vec![false; full + 1];
    for mask in 1..=full {
        let members: Vec<usize> = (0..n).filter(|&v| mask >> v & 1 == 1).collect();
        let mut colors = 0u32;
        let mut distinct = true;
        for &v in &members {
            let bit = 1u32 << inst.color(v);
            if colors & bit != 0 {
                distinct = false;
                break;
            }
            colors |= bit;
        }
        if !distinct || members.len() < l {
            continue;
        }
        valid[mask] = true;
        let mut diameter = 0.0f64;
        for (i, &a) in members.iter().enumerate() {
            for &b in &members[i + 1..] {
                diameter = diameter.max(inst.distance(a, b));
            }
        }
        cost_d[mask] = diameter;
        for &c in &members {
            let r = members
                .iter()
                .map(|&m| inst.distance(c, m))
                .fold(0.0, f64::max);
            if r < cost_r[mask] {
                cost_r[mask] = r;
                best_center[mask] = c;
            }
        }
    }

    // dp over exact partitions of each mask
    let mut dp_r = vec![f64::INFINITY; full + 1];
    let mut dp_d = vec![f64::INFINITY; full + 1];
    let mut choice = vec![0usize; full + 1];
    dp_r[0] = 0.0;
    dp_d[0] = 0.0;
    for mask in 1..=full {
        let low = mask & mask.wrapping_neg();
        // iterate submasks of mask containing the lowest set bit
        let mut sub = mask;
        loop {
            if sub & low != 0 && valid[sub] {
                let rest = mask ^ sub;
                let r = cost_r[sub].max(dp_r[rest]);
                if r < dp_r[mask] {
                    dp_r[mask] = r;
                    choice[mask] = sub;
                }
                let d = cost_d[sub].max(dp_d[rest]);
                if d < dp_d[mask] {
                    dp_d[mask] = d;
                }
            }
            if sub == 0 {
                break;
            }
            sub = (sub - 1) & mask;
        }
    }

    // best mask with exactly n - q points
    let want = n - q;
    let mut best_mask = usize::MAX;
    let mut best_r = f64::INFINITY;
    let mut best_d = f64::INFINITY;
    for mask in 0..=full {
        if (mask as u32).count_ones() as usize != want {
            continue;
        }
        if dp_r[mask] < best_r {
            best_r = dp_r[mask];
            best_mask = mask;
        }
        best_d = best_d.min(dp_d[mask]);
    }
    if best_mask == usize::MAX || best_r.is_infinite() {
        return Err(OracleError::Infeasible);
    }

    let mut clusters = Vec::new();
    let mut mask = best_mask;
    while mask != 0 {
        let sub = choice[mask];
        let members: Vec<usize> = (0..n).filter(|&v| sub >> v & 1 == 1).collect();
        clusters.push(Cluster {
            center: best_center[sub],
            members,
            radius: cost_r[sub],
        });
        mask ^= sub;
    }
    clusters.sort_by_key(|c| c.center);
    let outliers: Vec<usize> = (0..n).filter(|&v| best_mask >> v & 1 == 0).collect();
    let clustering = Clustering::new(best_r, clusters, outliers);
    Ok(OracleResult {
        clustering,
        optimal_radius: best_r,
        optimal_diameter: best_d,
    })
}
