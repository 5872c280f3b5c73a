use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// How many placement attempts random generators make before giving up on
/// connectivity.
pub const CONNECTIVITY_RETRY_LIMIT: usize = 50;

/// Which Laplacian a spectrum or operator is built from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LaplacianVariant {
    /// L = D - W
    Combinatorial,
    /// L~ = D^{-1/2} (D - W) D^{-1/2}
    Normalized,
}

impl LaplacianVariant {
    pub fn name(self) -> &'static str {
        match self {
            LaplacianVariant::Combinatorial => "combinatorial",
            LaplacianVariant::Normalized => "normalized",
        }
    }
}

/// An undirected, connected, weighted graph held as a dense adjacency matrix.
///
/// Vertex indices are 0-based throughout the API; edge-list files use
/// 1-based indices.
#[derive(Debug, Clone)]
pub struct Graph {
    adjacency: DMatrix<f64>,
    degrees: DVector<f64>,
    /// Coordinates for geometrically generated graphs (sensor, swiss roll);
    /// empty otherwise. Row n holds the coordinates of vertex n.
    coordinates: Vec<Vec<f64>>,
}

/// Generator specifications for the graph families used in the experiments.
#[derive(Debug, Clone, PartialEq)]
pub enum GraphSpec {
    Path { n: usize },
    Ring { n: usize },
    /// A hub of degree exactly `center_degree`: `center_degree - 1` leaves
    /// plus a tail path on the remaining vertices, all weights 1.
    Comet { n: usize, center_degree: usize },
    RandomRegular { n: usize, degree: usize, seed: u64 },
    Sensor { n: usize, sigma1: f64, sigma2: f64, seed: u64 },
    SwissRoll { n: usize, sigma1: f64, sigma2: f64, seed: u64 },
}

impl GraphSpec {
    /// Short identifier used for output file names.
    pub fn describe(&self) -> String {
        match self {
            GraphSpec::Path { n } => format!("path_{n}"),
            GraphSpec::Ring { n } => format!("ring_{n}"),
            GraphSpec::Comet { n, center_degree } => format!("comet_{n}_{center_degree}"),
            GraphSpec::RandomRegular { n, degree, seed } => {
                format!("random_regular_{n}_{degree}_s{seed}")
            }
            GraphSpec::Sensor { n, seed, .. } => format!("sensor_{n}_s{seed}"),
            GraphSpec::SwissRoll { n, seed, .. } => format!("swiss_roll_{n}_s{seed}"),
        }
    }
}

/// Unweighted geodesic (hop-count) distances between all vertex pairs.
#[derive(Debug, Clone)]
pub struct DistanceMatrix {
    n: usize,
    dist: Vec<u32>,
    diam: u32,
}

impl DistanceMatrix {
    pub fn n_vertices(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> u32 {
        self.dist[i * self.n + j]
    }

    pub fn diameter(&self) -> u32 {
        self.diam
    }

    /// Distances from vertex `i` to every vertex.
    pub fn row(&self, i: usize) -> &[u32] {
        &self.dist[i * self.n..(i + 1) * self.n]
    }
}

impl Graph {
    /// Assemble a graph from an undirected edge list with 1-based vertex
    /// indices, validating weights, duplicates, and connectivity.
    pub fn from_edges(edges: &[(usize, usize, f64)], n: usize) -> Result<Graph> {
        let mut w = DMatrix::<f64>::zeros(n, n);
        for &(i, j, weight) in edges {
            if i < 1 || i > n {
                return Err(Error::IndexOutOfRange { index: i, size: n });
            }
            if j < 1 || j > n {
                return Err(Error::IndexOutOfRange { index: j, size: n });
            }
            if i == j {
                return Err(Error::SelfLoop(i));
            }
            if !(weight > 0.0) || !weight.is_finite() {
                return Err(Error::NonPositiveWeight { i, j, weight });
            }
            let (a, b) = (i - 1, j - 1);
            if w[(a, b)] != 0.0 {
                return Err(Error::DuplicateEdge { i, j });
            }
            w[(a, b)] = weight;
            w[(b, a)] = weight;
        }
        Graph::from_adjacency(w)
    }

    /// Build from an already symmetric nonnegative adjacency matrix.
    pub fn from_adjacency(adjacency: DMatrix<f64>) -> Result<Graph> {
        let n = adjacency.nrows();
        if !is_connected(&adjacency) {
            return Err(Error::DisconnectedGraph);
        }
        let degrees = DVector::from_iterator(n, (0..n).map(|i| adjacency.row(i).sum()));
        Ok(Graph {
            adjacency,
            degrees,
            coordinates: Vec::new(),
        })
    }

    pub fn generate(spec: &GraphSpec) -> Result<Graph> {
        match *spec {
            GraphSpec::Path { n } => path(n),
            GraphSpec::Ring { n } => ring(n),
            GraphSpec::Comet { n, center_degree } => comet(n, center_degree),
            GraphSpec::RandomRegular { n, degree, seed } => random_regular(n, degree, seed),
            GraphSpec::Sensor {
                n,
                sigma1,
                sigma2,
                seed,
            } => geometric(n, sigma1, sigma2, seed, PointCloud::UnitSquare),
            GraphSpec::SwissRoll {
                n,
                sigma1,
                sigma2,
                seed,
            } => geometric(n, sigma1, sigma2, seed, PointCloud::SwissRoll),
        }
    }

    pub fn n_vertices(&self) -> usize {
        self.adjacency.nrows()
    }

    pub fn adjacency(&self) -> &DMatrix<f64> {
        &self.adjacency
    }

    /// Weighted degree vector d, d_n = sum_m W_mn.
    pub fn degrees(&self) -> &DVector<f64> {
        &self.degrees
    }

    pub fn degree_min(&self) -> f64 {
        self.degrees.min()
    }

    pub fn degree_max(&self) -> f64 {
        self.degrees.max()
    }

    /// Neighbor counts (degrees of the unweighted support). Localization
    /// bounds count vertices, not weights, so they use these.
    pub fn structural_degrees(&self) -> Vec<usize> {
        let n = self.n_vertices();
        (0..n)
            .map(|i| (0..n).filter(|&j| self.adjacency[(i, j)] != 0.0).count())
            .collect()
    }

    /// Coordinates of geometrically generated vertices; empty for
    /// combinatorial families.
    pub fn coordinates(&self) -> &[Vec<f64>] {
        &self.coordinates
    }

    pub fn laplacian(&self, variant: LaplacianVariant) -> DMatrix<f64> {
        let n = self.n_vertices();
        let mut l = -self.adjacency.clone();
        for i in 0..n {
            l[(i, i)] = self.degrees[i];
        }
        match variant {
            LaplacianVariant::Combinatorial => l,
            LaplacianVariant::Normalized => {
                let inv_sqrt: Vec<f64> = self.degrees.iter().map(|&d| 1.0 / d.sqrt()).collect();
                for i in 0..n {
                    for j in 0..n {
                        l[(i, j)] *= inv_sqrt[i] * inv_sqrt[j];
                    }
                }
                l
            }
        }
    }

    /// BFS hop distances on the unweighted support of W; edge weights are
    /// deliberately ignored.
    pub fn geodesic_distances(&self) -> DistanceMatrix {
        let n = self.n_vertices();
        let neighbors = self.neighbor_lists();
        let mut dist = vec![u32::MAX; n * n];
        let mut diam = 0u32;
        let mut queue = Vec::with_capacity(n);
        for s in 0..n {
            let row = &mut dist[s * n..(s + 1) * n];
            row[s] = 0;
            queue.clear();
            queue.push(s);
            let mut head = 0;
            while head < queue.len() {
                let u = queue[head];
                head += 1;
                let du = row[u];
                for &v in &neighbors[u] {
                    if row[v] == u32::MAX {
                        row[v] = du + 1;
                        diam = diam.max(du + 1);
                        queue.push(v);
                    }
                }
            }
        }
        DistanceMatrix { n, dist, diam }
    }

    fn neighbor_lists(&self) -> Vec<Vec<usize>> {
        let n = self.n_vertices();
        (0..n)
            .map(|i| (0..n).filter(|&j| self.adjacency[(i, j)] != 0.0).collect())
            .collect()
    }

    /// Upper-triangle edge list with 1-based indices, row-major order.
    pub fn edges(&self) -> Vec<(usize, usize, f64)> {
        let n = self.n_vertices();
        let mut edges = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                let w = self.adjacency[(i, j)];
                if w != 0.0 {
                    edges.push((i + 1, j + 1, w));
                }
            }
        }
        edges
    }

    /// SHA-256 of the canonical edge list; used to key spectrum caches and
    /// to stamp transform outputs.
    pub fn content_hash(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update(b"graph-v1");
        hasher.update((self.n_vertices() as u64).to_le_bytes());
        for (i, j, w) in self.edges() {
            hasher.update((i as u64).to_le_bytes());
            hasher.update((j as u64).to_le_bytes());
            hasher.update(w.to_le_bytes());
        }
        hex_digest(hasher)
    }
}

pub(crate) fn hex_digest(hasher: Sha256) -> String {
    hasher
        .finalize()
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

fn is_connected(w: &DMatrix<f64>) -> bool {
    let n = w.nrows();
    if n == 0 {
        return false;
    }
    let mut seen = vec![false; n];
    let mut stack = vec![0usize];
    seen[0] = true;
    let mut count = 1;
    while let Some(u) = stack.pop() {
        for v in 0..n {
            if !seen[v] && w[(u, v)] != 0.0 {
                seen[v] = true;
                count += 1;
                stack.push(v);
            }
        }
    }
    count == n
}

fn unit_edges_graph(n: usize, edges: impl Iterator<Item = (usize, usize)>) -> Result<Graph> {
    let mut w = DMatrix::<f64>::zeros(n, n);
    for (a, b) in edges {
        w[(a, b)] = 1.0;
        w[(b, a)] = 1.0;
    }
    Graph::from_adjacency(w)
}

fn path(n: usize) -> Result<Graph> {
    if n < 2 {
        return Err(Error::InfeasibleSpec(format!("path needs n >= 2, got {n}")));
    }
    unit_edges_graph(n, (0..n - 1).map(|i| (i, i + 1)))
}

fn ring(n: usize) -> Result<Graph> {
    if n < 3 {
        return Err(Error::InfeasibleSpec(format!("ring needs n >= 3, got {n}")));
    }
    unit_edges_graph(n, (0..n).map(|i| (i, (i + 1) % n)))
}

/// Hub at vertex 0 with degree exactly `center_degree`: leaves
/// `1..center_degree`, and a tail path starting at vertex `center_degree`.
fn comet(n: usize, center_degree: usize) -> Result<Graph> {
    if center_degree < 2 || center_degree + 1 > n {
        return Err(Error::InfeasibleSpec(format!(
            "comet needs 2 <= center_degree <= n-1, got n={n}, center_degree={center_degree}"
        )));
    }
    let leaves = (1..center_degree).map(|l| (0, l));
    let tail_hook = std::iter::once((0, center_degree));
    let tail = (center_degree..n - 1).map(|t| (t, t + 1));
    unit_edges_graph(n, leaves.chain(tail_hook).chain(tail))
}

/// Pairing-model d-regular graph: draw random stub pairs, rejecting
/// self-loops and duplicate edges; restart when stuck, then require
/// connectivity.
fn random_regular(n: usize, degree: usize, seed: u64) -> Result<Graph> {
    if degree == 0 || degree >= n {
        return Err(Error::InfeasibleSpec(format!(
            "regular degree must satisfy 0 < degree < n, got n={n}, degree={degree}"
        )));
    }
    if n * degree % 2 != 0 {
        return Err(Error::InfeasibleSpec(format!(
            "n * degree must be even, got n={n}, degree={degree}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..CONNECTIVITY_RETRY_LIMIT {
        if let Some(w) = try_pairing(n, degree, &mut rng) {
            if is_connected(&w) {
                return Graph::from_adjacency(w);
            }
        }
    }
    Err(Error::ConnectivityRetriesExceeded(CONNECTIVITY_RETRY_LIMIT))
}

fn try_pairing(n: usize, degree: usize, rng: &mut ChaCha8Rng) -> Option<DMatrix<f64>> {
    let mut w = DMatrix::<f64>::zeros(n, n);
    let mut stubs: Vec<usize> = (0..n).flat_map(|v| std::iter::repeat(v).take(degree)).collect();
    let mut rejections = 0usize;
    while stubs.len() >= 2 {
        let a = rng.random_range(0..stubs.len());
        let mut b = rng.random_range(0..stubs.len() - 1);
        if b >= a {
            b += 1;
        }
        let (u, v) = (stubs[a], stubs[b]);
        if u == v || w[(u, v)] != 0.0 {
            rejections += 1;
            if rejections > 50 * n * degree {
                return None; // stuck with only illegal pairs left
            }
            continue;
        }
        rejections = 0;
        w[(u, v)] = 1.0;
        w[(v, u)] = 1.0;
        let (hi, lo) = (a.max(b), a.min(b));
        stubs.swap_remove(hi);
        stubs.swap_remove(lo);
    }
    Some(w)
}

enum PointCloud {
    UnitSquare,
    SwissRoll,
}

/// Thresholded Gaussian kernel weights on sampled points:
/// W_ij = exp(-d(i,j)^2 / (2 sigma1^2)) when d(i,j) <= sigma2, else 0.
fn geometric(n: usize, sigma1: f64, sigma2: f64, seed: u64, cloud: PointCloud) -> Result<Graph> {
    if n < 2 || sigma1 <= 0.0 || sigma2 <= 0.0 {
        return Err(Error::InfeasibleSpec(format!(
            "geometric graph needs n >= 2 and positive sigmas, got n={n}, sigma1={sigma1}, sigma2={sigma2}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..CONNECTIVITY_RETRY_LIMIT {
        let points: Vec<Vec<f64>> = match cloud {
            PointCloud::UnitSquare => (0..n)
                .map(|_| vec![rng.random::<f64>(), rng.random::<f64>()])
                .collect(),
            PointCloud::SwissRoll => {
                let pts: Vec<Vec<f64>> = (0..n)
                    .map(|_| {
                        let t = 1.5 * std::f64::consts::PI
                            + 3.0 * std::f64::consts::PI * rng.random::<f64>();
                        let h = 21.0 * rng.random::<f64>();
                        vec![t * t.cos(), h, t * t.sin()]
                    })
                    .collect();
                rescale_to_unit_diameter(pts)
            }
        };
        let mut w = DMatrix::<f64>::zeros(n, n);
        for i in 0..n {
            for j in (i + 1)..n {
                let d2: f64 = points[i]
                    .iter()
                    .zip(points[j].iter())
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum();
                if d2.sqrt() <= sigma2 {
                    let weight = (-d2 / (2.0 * sigma1 * sigma1)).exp();
                    w[(i, j)] = weight;
                    w[(j, i)] = weight;
                }
            }
        }
        if is_connected(&w) {
            let mut g = Graph::from_adjacency(w)?;
            g.coordinates = points;
            return Ok(g);
        }
    }
    Err(Error::ConnectivityRetriesExceeded(CONNECTIVITY_RETRY_LIMIT))
}

fn rescale_to_unit_diameter(mut points: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
    let mut max_d2 = 0.0f64;
    for i in 0..points.len() {
        for j in (i + 1)..points.len() {
            let d2: f64 = points[i]
                .iter()
                .zip(points[j].iter())
                .map(|(a, b)| (a - b) * (a - b))
                .sum();
            max_d2 = max_d2.max(d2);
        }
    }
    let scale = 1.0 / max_d2.sqrt();
    for p in points.iter_mut() {
        for c in p.iter_mut() {
            *c *= scale;
        }
    }
    points
}
