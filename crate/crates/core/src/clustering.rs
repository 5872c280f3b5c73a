use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::kernel::Kernel;
use crate::signal::Signal;
use crate::spectral::Spectrum;
use crate::wgft::transform;

const KMEANS_RESTARTS: usize = 100;
const KMEANS_MAX_ITERS: usize = 300;
const KMEANS_REL_TOL: f64 = 1e-9;

/// A hard partition of the vertices with its within-cluster sum of squared
/// feature distances.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterAssignment {
    pub labels: Vec<usize>,
    pub k: usize,
    pub inertia: f64,
}

/// k-means on the rows of the first k eigenvectors.
pub fn spectral_cluster(s: &Spectrum, k: usize, seed: u64) -> Result<ClusterAssignment> {
    let n = s.n();
    check_k(k, n)?;
    let mut features = DMatrix::<f64>::zeros(n, k);
    for l in 0..k {
        for v in 0..n {
            features[(v, l)] = s.chi(v, l);
        }
    }
    Ok(kmeans(&features, k, seed))
}

/// Cluster on nonlinearly compressed windowed-transform features
/// y_i(k) = tanh(alpha |S f(i,k)|).
pub fn signal_adapted_cluster(
    s: &Spectrum,
    f: &Signal,
    window: &Kernel,
    alpha: f64,
    k: usize,
    seed: u64,
) -> Result<ClusterAssignment> {
    if !(alpha > 0.0) {
        return Err(Error::Parse("alpha must be positive".into()));
    }
    let n = s.n();
    check_k(k, n)?;
    let coeffs = transform(s, window, f)?;
    let mut features = DMatrix::<f64>::zeros(n, n);
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        for j in 0..n {
            let y = (alpha * coeffs.entry(i, j).norm()).tanh();
            features[(i, j)] = y;
            lo = lo.min(y);
            hi = hi.max(y);
        }
    }
    if hi - lo < 1e-12 {
        return Err(Error::DegenerateFeatures);
    }
    Ok(kmeans(&features, k, seed))
}

/// Raised-cosine bump kernels over the requested spectral bands, sampled on
/// the spectrum. A band touching 0 (resp. lambda_max) saturates at that edge
/// so the bank can cover the whole spectrum, matching a lowpass first filter
/// and a highpass last filter.
pub fn band_filter_bank(s: &Spectrum, bands: &[(f64, f64)]) -> Result<Vec<Kernel>> {
    let lambda_max = s.lambda_max();
    let mut kernels = Vec::with_capacity(bands.len());
    for &(lo, hi) in bands {
        if !(0.0 <= lo && lo < hi && hi <= lambda_max) {
            return Err(Error::BadBand { lo, hi, lambda_max });
        }
        let width = hi - lo;
        let values: Vec<f64> = s
            .eigenvalues()
            .iter()
            .map(|&lam| {
                if lam < lo || lam > hi {
                    0.0
                } else if lo == 0.0 && hi == lambda_max {
                    1.0
                } else if lo == 0.0 {
                    // half-cosine lowpass: 1 at lambda = 0
                    0.5 * (1.0 + (std::f64::consts::PI * lam / width).cos())
                } else if hi == lambda_max {
                    // half-cosine highpass: 1 at lambda_max
                    0.5 * (1.0 - (std::f64::consts::PI * (lam - lo) / width).cos())
                } else {
                    // interior Hann bump, zero at both edges
                    0.5 * (1.0 - (2.0 * std::f64::consts::PI * (lam - lo) / width).cos())
                }
            })
            .collect();
        kernels.push(Kernel::sampled(values));
    }
    Ok(kernels)
}

/// Chance-corrected agreement between two partitions.
pub fn adjusted_rand_index(a: &[usize], b: &[usize]) -> f64 {
    assert_eq!(a.len(), b.len(), "partitions must cover the same points");
    let n = a.len();
    let ka = a.iter().copied().max().map_or(0, |m| m + 1);
    let kb = b.iter().copied().max().map_or(0, |m| m + 1);
    let mut table = vec![0u64; ka * kb];
    let mut rows = vec![0u64; ka];
    let mut cols = vec![0u64; kb];
    for i in 0..n {
        table[a[i] * kb + b[i]] += 1;
        rows[a[i]] += 1;
        cols[b[i]] += 1;
    }
    let comb2 = |x: u64| -> f64 { (x * x.saturating_sub(1)) as f64 / 2.0 };
    let sum_ij: f64 = table.iter().map(|&v| comb2(v)).sum();
    let sum_a: f64 = rows.iter().map(|&v| comb2(v)).sum();
    let sum_b: f64 = cols.iter().map(|&v| comb2(v)).sum();
    let total = comb2(n as u64);
    let expected = sum_a * sum_b / total;
    let max_index = 0.5 * (sum_a + sum_b);
    if max_index == expected {
        return if sum_ij == expected { 1.0 } else { 0.0 };
    }
    (sum_ij - expected) / (max_index - expected)
}

fn check_k(k: usize, n: usize) -> Result<()> {
    if k < 2 || k > n {
        return Err(Error::BadK { k, n });
    }
    Ok(())
}

/// Lloyd's algorithm with k-means++ seeding: independent seeded restarts in
/// parallel, lowest inertia wins, ties broken by restart index.
pub fn kmeans(points: &DMatrix<f64>, k: usize, seed: u64) -> ClusterAssignment {
    let results: Vec<(f64, Vec<usize>)> = (0..KMEANS_RESTARTS)
        .into_par_iter()
        .map(|restart| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(restart as u64 + 1);
            let centers = plus_plus_init(points, k, &mut rng);
            lloyd(points, centers, k)
        })
        .collect();
    let (best_inertia, best_labels) = results
        .into_iter()
        .enumerate()
        .min_by(|(ia, (inertia_a, _)), (ib, (inertia_b, _))| {
            inertia_a
                .partial_cmp(inertia_b)
                .expect("inertia is finite")
                .then(ia.cmp(ib))
        })
        .map(|(_, r)| r)
        .expect("at least one restart");
    ClusterAssignment {
        labels: best_labels,
        k,
        inertia: best_inertia,
    }
}

fn row_dist_sq(points: &DMatrix<f64>, row: usize, center: &[f64]) -> f64 {
    let dim = points.ncols();
    let mut acc = 0.0;
    for c in 0..dim {
        let d = points[(row, c)] - center[c];
        acc += d * d;
    }
    acc
}

fn plus_plus_init(points: &DMatrix<f64>, k: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let n = points.nrows();
    let dim = points.ncols();
    let row_vec = |r: usize| -> Vec<f64> { (0..dim).map(|c| points[(r, c)]).collect() };
    let mut centers = vec![row_vec(rng.random_range(0..n))];
    let mut d2: Vec<f64> = (0..n).map(|r| row_dist_sq(points, r, &centers[0])).collect();
    while centers.len() < k {
        let total: f64 = d2.iter().sum();
        let next = if total > 0.0 {
            let mut u = rng.random::<f64>() * total;
            let mut chosen = n - 1;
            for (r, &w) in d2.iter().enumerate() {
                if u < w {
                    chosen = r;
                    break;
                }
                u -= w;
            }
            chosen
        } else {
            rng.random_range(0..n)
        };
        centers.push(row_vec(next));
        for r in 0..n {
            let d = row_dist_sq(points, r, centers.last().unwrap());
            if d < d2[r] {
                d2[r] = d;
            }
        }
    }
    centers
}

fn lloyd(points: &DMatrix<f64>, mut centers: Vec<Vec<f64>>, k: usize) -> (f64, Vec<usize>) {
    let n = points.nrows();
    let dim = points.ncols();
    let mut labels = vec![0usize; n];
    let mut prev_inertia = f64::INFINITY;
    let mut inertia = f64::INFINITY;
    for _ in 0..KMEANS_MAX_ITERS {
        // assignment step; ties go to the lowest center index
        inertia = 0.0;
        for r in 0..n {
            let mut best = 0usize;
            let mut best_d = f64::INFINITY;
            for (c, center) in centers.iter().enumerate() {
                let d = row_dist_sq(points, r, center);
                if d < best_d {
                    best_d = d;
                    best = c;
                }
            }
            labels[r] = best;
            inertia += best_d;
        }
        // update step
        let mut counts = vec![0usize; k];
        let mut sums = vec![vec![0.0f64; dim]; k];
        for r in 0..n {
            counts[labels[r]] += 1;
            for c in 0..dim {
                sums[labels[r]][c] += points[(r, c)];
            }
        }
        for c in 0..k {
            if counts[c] == 0 {
                repair_empty_cluster(points, &mut labels, &mut counts, &mut sums, c, k);
            }
        }
        for c in 0..k {
            for j in 0..dim {
                centers[c][j] = sums[c][j] / counts[c] as f64;
            }
        }
        if prev_inertia.is_finite()
            && (prev_inertia - inertia).abs() <= KMEANS_REL_TOL * prev_inertia.max(1e-300)
        {
            break;
        }
        prev_inertia = inertia;
    }
    (inertia, labels)
}

/// Move the point farthest from its centroid in the largest cluster into the
/// empty one.
fn repair_empty_cluster(
    points: &DMatrix<f64>,
    labels: &mut [usize],
    counts: &mut [usize],
    sums: &mut [Vec<f64>],
    empty: usize,
    _k: usize,
) {
    let largest = (0..counts.len())
        .max_by(|&a, &b| counts[a].cmp(&counts[b]).then(b.cmp(&a)))
        .expect("some cluster is nonempty");
    let dim = points.ncols();
    let centroid: Vec<f64> = (0..dim)
        .map(|c| sums[largest][c] / counts[largest] as f64)
        .collect();
    let mut far_row = usize::MAX;
    let mut far_d = -1.0;
    for (r, &lab) in labels.iter().enumerate() {
        if lab == largest {
            let d = row_dist_sq(points, r, &centroid);
            if d > far_d {
                far_d = d;
                far_row = r;
            }
        }
    }
    labels[far_row] = empty;
    counts[largest] -= 1;
    counts[empty] += 1;
    for c in 0..dim {
        sums[largest][c] -= points[(far_row, c)];
        sums[empty][c] += points[(far_row, c)];
    }
}
