//! Colored metric instances, threshold graphs, and clustering evaluation.
//!
//! An [`Instance`] is a set of points, each carrying one color, together with
//! a metric given either by coordinates (Euclidean) or an explicit symmetric
//! distance matrix, plus the group-size parameter `l`. Instances are immutable
//! after construction and safe to share across threads.

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type PointId = usize;
pub type ColorId = usize;

#[derive(Debug, Clone)]
pub enum Geometry {
    /// Point coordinates; distances are Euclidean, computed on demand.
    Coords(Vec<Vec<f64>>),
    /// Row-major n*n distance matrix.
    Matrix(Vec<f64>),
}

#[derive(Debug, Clone)]
pub struct Instance {
    colors: Vec<ColorId>,
    color_names: Vec<String>,
    geometry: Geometry,
    l: usize,
}

#[derive(Debug, Error)]
pub enum InstanceError {
    #[error("empty instance")]
    Empty,
    #[error("l must be at least 1, got {0}")]
    InvalidL(usize),
    #[error("exactly one of points/matrix must be present")]
    GeometryChoice,
    #[error("point {index} has dimension {got}, expected {expected}")]
    DimensionMismatch {
        index: usize,
        got: usize,
        expected: usize,
    },
    #[error("colors has length {got}, expected {expected}")]
    ColorsLength { got: usize, expected: usize },
    #[error("matrix row {row} has length {got}, expected {expected}")]
    NotSquare {
        row: usize,
        got: usize,
        expected: usize,
    },
    #[error("negative distance d({u},{v}) = {value}")]
    NegativeDistance { u: PointId, v: PointId, value: f64 },
    #[error("asymmetric matrix: d({u},{v}) = {uv} but d({v},{u}) = {vu}")]
    Asymmetric {
        u: PointId,
        v: PointId,
        uv: f64,
        vu: f64,
    },
    #[error("nonzero self-distance d({u},{u}) = {value}")]
    NonzeroDiagonal { u: PointId, value: f64 },
    #[error("non-finite value in geometry")]
    NonFinite,
    #[error("triangle inequality violated: d({u},{w}) > d({u},{v}) + d({v},{w})")]
    TriangleViolation { u: PointId, v: PointId, w: PointId },
    #[error("graph is disconnected; shortest-path distances undefined")]
    Disconnected,
    #[error("invalid instance document: {0}")]
    Json(#[from] serde_json::Error),
}

impl Instance {
    pub fn from_coords(
        coords: Vec<Vec<f64>>,
        colors: Vec<ColorId>,
        l: usize,
    ) -> Result<Self, InstanceError> {
        let names = colors.iter().map(|c| c.to_string()).collect();
        Self::new(Geometry::Coords(coords), colors, names, l)
    }

    pub fn from_matrix(
        matrix: Vec<Vec<f64>>,
        colors: Vec<ColorId>,
        l: usize,
    ) -> Result<Self, InstanceError> {
        let names = colors.iter().map(|c| c.to_string()).collect();
        let flat = validate_matrix(matrix)?;
        Self::new(Geometry::Matrix(flat), colors, names, l)
    }

    fn new(
        geometry: Geometry,
        colors: Vec<ColorId>,
        raw_names: Vec<String>,
        l: usize,
    ) -> Result<Self, InstanceError> {
        let n = match &geometry {
            Geometry::Coords(pts) => pts.len(),
            Geometry::Matrix(m) => (m.len() as f64).sqrt() as usize,
        };
        if n == 0 {
            return Err(InstanceError::Empty);
        }
        if l == 0 {
            return Err(InstanceError::InvalidL(l));
        }
        if colors.len() != n {
            return Err(InstanceError::ColorsLength {
                got: colors.len(),
                expected: n,
            });
        }
        if let Geometry::Coords(pts) = &geometry {
            let dim = pts[0].len();
            for (index, p) in pts.iter().enumerate() {
                if p.len() != dim {
                    return Err(InstanceError::DimensionMismatch {
                        index,
                        got: p.len(),
                        expected: dim,
                    });
                }
                if p.iter().any(|x| !x.is_finite()) {
                    return Err(InstanceError::NonFinite);
                }
            }
        }
        // dense color ids are assigned by first appearance; keep one name per id
        let k = colors.iter().copied().max().unwrap_or(0) + 1;
        let mut color_names = vec![String::new(); k];
        for (i, &c) in colors.iter().enumerate() {
            if color_names[c].is_empty() {
                color_names[c] = raw_names[i].clone();
            }
        }
        Ok(Instance {
            colors,
            color_names,
            geometry,
            l,
        })
    }

    pub fn n(&self) -> usize {
        self.colors.len()
    }

    /// Number of distinct color ids (ids are dense, 0..k).
    pub fn color_count(&self) -> usize {
        self.colors.iter().copied().max().map_or(0, |m| m + 1)
    }

    pub fn color(&self, v: PointId) -> ColorId {
        self.colors[v]
    }

    pub fn colors(&self) -> &[ColorId] {
        &self.colors
    }

    pub fn color_name(&self, c: ColorId) -> &str {
        &self.color_names[c]
    }

    /// Replaces the per-color labels (one per dense color id).
    pub fn with_color_names(mut self, names: Vec<String>) -> Self {
        assert_eq!(names.len(), self.color_count());
        self.color_names = names;
        self
    }

    pub fn l(&self) -> usize {
        self.l
    }

    pub fn set_l(&mut self, l: usize) {
        assert!(l >= 1, "l must be at least 1");
        self.l = l;
    }

    /// Per-color class sizes, indexed by color id.
    pub fn color_counts(&self) -> Vec<usize> {
        let mut counts = vec![0usize; self.color_count()];
        for &c in &self.colors {
            counts[c] += 1;
        }
        counts
    }

    pub fn coords(&self) -> Option<&[Vec<f64>]> {
        match &self.geometry {
            Geometry::Coords(p) => Some(p),
            Geometry::Matrix(_) => None,
        }
    }

    pub fn distance(&self, u: PointId, v: PointId) -> f64 {
        match &self.geometry {
            Geometry::Coords(pts) => {
                let (a, b) = (&pts[u], &pts[v]);
                a.iter()
                    .zip(b)
                    .map(|(x, y)| (x - y) * (x - y))
                    .sum::<f64>()
                    .sqrt()
            }
            Geometry::Matrix(m) => m[u * self.n() + v],
        }
    }

    /// Verifies the triangle inequality over all triples. Intended for desk
    /// scale; explicit matrices are not otherwise checked for metric-ness.
    pub fn check_triangle_inequality(&self) -> Result<(), InstanceError> {
        let n = self.n();
        for u in 0..n {
            for v in 0..n {
                for w in 0..n {
                    let direct = self.distance(u, w);
                    let via = self.distance(u, v) + self.distance(v, w);
                    if direct > via + 1e-9 {
                        return Err(InstanceError::TriangleViolation { u, v, w });
                    }
                }
            }
        }
        Ok(())
    }

    /// Distinct weights of all bichromatic pairs, ascending. This is the
    /// threshold-scan schedule: ties enter the graph together.
    pub fn sorted_edge_weights(&self) -> Vec<f64> {
        let n = self.n();
        let mut ws = Vec::new();
        for u in 0..n {
            for v in (u + 1)..n {
                if self.colors[u] != self.colors[v] {
                    ws.push(self.distance(u, v));
                }
            }
        }
        ws.sort_by(|a, b| a.partial_cmp(b).unwrap());
        ws.dedup();
        ws
    }

    /// The graph of bichromatic pairs at distance <= w.
    pub fn threshold_graph(&self, w: f64) -> ThresholdGraph<'_> {
        let n = self.n();
        let mut adj = vec![Vec::new(); n];
        for u in 0..n {
            for v in (u + 1)..n {
                if self.colors[u] != self.colors[v] && self.distance(u, v) <= w {
                    adj[u].push(v);
                    adj[v].push(u);
                }
            }
        }
        ThresholdGraph {
            inst: self,
            threshold: w,
            adj,
        }
    }

    pub fn from_json(doc: &str) -> Result<Self, InstanceError> {
        let doc: InstanceDoc = serde_json::from_str(doc)?;
        let (points, matrix) = (doc.points, doc.matrix);
        let raw_names: Vec<String> = doc
            .colors
            .iter()
            .map(|c| match c {
                ColorLabel::Int(i) => i.to_string(),
                ColorLabel::Str(s) => s.clone(),
            })
            .collect();
        // dense ids by first appearance
        let mut seen: Vec<String> = Vec::new();
        let mut colors = Vec::with_capacity(raw_names.len());
        for name in &raw_names {
            let id = match seen.iter().position(|s| s == name) {
                Some(i) => i,
                None => {
                    seen.push(name.clone());
                    seen.len() - 1
                }
            };
            colors.push(id);
        }
        let geometry = match (points, matrix) {
            (Some(p), None) => Geometry::Coords(p),
            (None, Some(m)) => Geometry::Matrix(validate_matrix(m)?),
            _ => return Err(InstanceError::GeometryChoice),
        };
        Self::new(geometry, colors, raw_names, doc.l)
    }

    pub fn to_json(&self) -> String {
        let colors = self
            .colors
            .iter()
            .map(|&c| {
                let name = &self.color_names[c];
                match name.parse::<i64>() {
                    Ok(i) => ColorLabel::Int(i),
                    Err(_) => ColorLabel::Str(name.clone()),
                }
            })
            .collect();
        let n = self.n();
        let doc = InstanceDoc {
            points: self.coords().map(|p| p.to_vec()),
            matrix: match &self.geometry {
                Geometry::Matrix(m) => {
                    Some((0..n).map(|u| m[u * n..(u + 1) * n].to_vec()).collect())
                }
                Geometry::Coords(_) => None,
            },
            colors,
            l: self.l,
        };
        serde_json::to_string_pretty(&doc).expect("instance serializes")
    }
}

fn validate_matrix(matrix: Vec<Vec<f64>>) -> Result<Vec<f64>, InstanceError> {
    let n = matrix.len();
    if n == 0 {
        return Err(InstanceError::Empty);
    }
    for (row, r) in matrix.iter().enumerate() {
        if r.len() != n {
            return Err(InstanceError::NotSquare {
                row,
                got: r.len(),
                expected: n,
            });
        }
    }
    for (u, row) in matrix.iter().enumerate() {
        if row.iter().any(|x| !x.is_finite()) {
            return Err(InstanceError::NonFinite);
        }
        if row[u] != 0.0 {
            return Err(InstanceError::NonzeroDiagonal { u, value: row[u] });
        }
        for (v, &duv) in row.iter().enumerate() {
            if duv < 0.0 {
                return Err(InstanceError::NegativeDistance { u, v, value: duv });
            }
            if duv != matrix[v][u] {
                return Err(InstanceError::Asymmetric {
                    u,
                    v,
                    uv: duv,
                    vu: matrix[v][u],
                });
            }
        }
    }
    Ok(matrix.into_iter().flatten().collect())
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    points: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    matrix: Option<Vec<Vec<f64>>>,
    colors: Vec<ColorLabel>,
    l: usize,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum ColorLabel {
    Int(i64),
    Str(String),
}

/// Bichromatic pairs at distance <= threshold; edge sets are monotone in the
/// threshold. Immutable once built.
pub struct ThresholdGraph<'a> {
    inst: &'a Instance,
    threshold: f64,
    adj: Vec<Vec<PointId>>,
}

impl<'a> ThresholdGraph<'a> {
    pub fn instance(&self) -> &'a Instance {
        self.inst
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn neighbors(&self, v: PointId) -> &[PointId] {
        &self.adj[v]
    }

    pub fn adjacent(&self, u: PointId, v: PointId) -> bool {
        self.adj[u].binary_search(&v).is_ok()
    }

    pub fn adjacency(&self) -> &[Vec<PointId>] {
        &self.adj
    }
}

/// `u` and `v` become adjacent when some path of at most `d` edges joins them.
pub fn power_adjacency(adj: &[Vec<usize>], d: usize) -> Vec<Vec<usize>> {
    assert!(d >= 1, "power requires d >= 1");
    let n = adj.len();
    let mut out = vec![Vec::new(); n];
    for start in 0..n {
        let mut dist = vec![usize::MAX; n];
        dist[start] = 0;
        let mut queue = std::collections::VecDeque::from([start]);
        while let Some(u) = queue.pop_front() {
            if dist[u] == d {
                continue;
            }
            for &v in &adj[u] {
                if dist[v] == usize::MAX {
                    dist[v] = dist[u] + 1;
                    queue.push_back(v);
                }
            }
        }
        out[start] = (0..n)
            .filter(|&v| v != start && dist[v] != usize::MAX)
            .collect();
    }
    out
}

/// All-pairs shortest-path hop distances of a connected unit-weight graph,
/// packaged as an explicit-matrix instance with the same colors.
pub fn metric_completion(
    adj: &[Vec<usize>],
    colors: Vec<ColorId>,
    l: usize,
) -> Result<Instance, InstanceError> {
    let n = adj.len();
    let mut matrix = vec![vec![0.0; n]; n];
    for start in 0..n {
        let mut dist = vec![usize::MAX; n];
        dist[start] = 0;
        let mut queue = std::collections::VecDeque::from([start]);
        while let Some(u) = queue.pop_front() {
            for &v in &adj[u] {
                if dist[v] == usize::MAX {
                    dist[v] = dist[u] + 1;
                    queue.push_back(v);
                }
            }
        }
        for v in 0..n {
            if dist[v] == usize::MAX {
                return Err(InstanceError::Disconnected);
            }
            matrix[start][v] = dist[v] as f64;
        }
    }
    Instance::from_matrix(matrix, colors, l)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cluster {
    pub center: PointId,
    pub members: Vec<PointId>,
    pub radius: f64,
}

/// A star forest over the instance: clusters with designated centers, plus an
/// optional outlier set. `threshold` records the scan weight that produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Clustering {
    pub threshold: f64,
    pub clusters: Vec<Cluster>,
    pub outliers: Vec<PointId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub z: Option<usize>,
}

impl Clustering {
    pub fn new(threshold: f64, clusters: Vec<Cluster>, outliers: Vec<PointId>) -> Self {
        Clustering {
            threshold,
            clusters,
            outliers,
            p: None,
            q: None,
            z: None,
        }
    }

    pub fn max_radius(&self) -> f64 {
        self.clusters.iter().map(|c| c.radius).fold(0.0, f64::max)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("clustering serializes")
    }

    pub fn from_json(doc: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(doc)
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum EvalError {
    #[error("member {0} out of range")]
    MemberOutOfRange(PointId),
    #[error("center {0} out of range")]
    CenterOutOfRange(PointId),
    #[error("point {0} appears in more than one cluster or outlier set")]
    Overlap(PointId),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    /// Cluster has fewer than `l` members.
    TooSmall { cluster: usize, size: usize },
    /// Two members of one cluster share a color.
    DuplicateColor { cluster: usize, color: ColorId },
    /// Point is neither clustered nor an outlier.
    Uncovered { point: PointId },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClusterStats {
    pub center: PointId,
    pub size: usize,
    pub radius: f64,
    pub diameter: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub max_radius: f64,
    pub max_diameter: f64,
    pub per_cluster: Vec<ClusterStats>,
    pub violations: Vec<Violation>,
}

/// Recomputes radii and diameters exactly and reports every constraint
/// violation (size >= l, pairwise-distinct colors, full coverage).
pub fn evaluate(inst: &Instance, clustering: &Clustering) -> Result<Evaluation, EvalError> {
    let n = inst.n();
    let mut seen = vec![false; n];
    let mut mark = |v: PointId| -> Result<(), EvalError> {
        if v >= n {
            return Err(EvalError::MemberOutOfRange(v));
        }
        if seen[v] {
            return Err(EvalError::Overlap(v));
        }
        seen[v] = true;
        Ok(())
    };
    for o in &clustering.outliers {
        mark(*o)?;
    }
    let mut per_cluster = Vec::with_capacity(clustering.clusters.len());
    let mut violations = Vec::new();
    for (ci, cluster) in clustering.clusters.iter().enumerate() {
        if cluster.center >= n {
            return Err(EvalError::CenterOutOfRange(cluster.center));
        }
        for &m in &cluster.members {
            mark(m)?;
        }
        let mut radius = 0.0f64;
        let mut diameter = 0.0f64;
        let mut colors_seen = std::collections::BTreeSet::new();
        for &m in &cluster.members {
            radius = radius.max(inst.distance(cluster.center, m));
            if !colors_seen.insert(inst.color(m)) {
                violations.push(Violation::DuplicateColor {
                    cluster: ci,
                    color: inst.color(m),
                });
            }
            for &m2 in &cluster.members {
                diameter = diameter.max(inst.distance(m, m2));
            }
        }
        if cluster.members.len() < inst.l() {
            violations.push(Violation::TooSmall {
                cluster: ci,
                size: cluster.members.len(),
            });
        }
        per_cluster.push(ClusterStats {
            center: cluster.center,
            size: cluster.members.len(),
            radius,
            diameter,
        });
    }
    for (point, &covered) in seen.iter().enumerate() {
        if !covered {
            violations.push(Violation::Uncovered { point });
        }
    }
    Ok(Evaluation {
        max_radius: per_cluster.iter().map(|c| c.radius).fold(0.0, f64::max),
        max_diameter: per_cluster.iter().map(|c| c.diameter).fold(0.0, f64::max),
        per_cluster,
        violations,
    })
}
