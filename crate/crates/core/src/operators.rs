use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::graph::{Graph, LaplacianVariant};
use crate::kernel::Kernel;
use crate::signal::Signal;
use crate::spectral::Spectrum;

/// Regularizer added to eigenvalue gaps when building inverse-gap dual
/// weights.
pub const DUAL_GAP_REGULARIZER: f64 = 1e-6;

/// The convolution identity g_0(n) = sum_l chi_l(n).
pub fn convolution_identity(s: &Spectrum) -> Signal {
    Signal::from_real(&s.igft_real(&vec![1.0; s.n()]))
}

/// Generalized convolution: (f * g)(n) = sum_l fhat(l) ghat(l) chi_l(n).
pub fn convolve(s: &Spectrum, f: &Signal, g: &Signal) -> Result<Signal> {
    s.check_len(f)?;
    s.check_len(g)?;
    let fhat = s.gft(f)?;
    let ghat = s.gft(g)?;
    let prod = Signal::from_complex(
        fhat.values()
            .iter()
            .zip(ghat.values())
            .map(|(a, b)| a * b)
            .collect(),
    );
    s.igft(&prod)
}

/// Convolution with a kernel given in the spectral domain: ghat(L) f.
pub fn convolve_kernel(s: &Spectrum, f: &Signal, kernel: &Kernel) -> Result<Signal> {
    s.check_len(f)?;
    let ghat = kernel.evaluate(s)?;
    let fhat = s.gft(f)?;
    let prod = Signal::from_complex(
        fhat.values()
            .iter()
            .zip(ghat.iter())
            .map(|(a, &b)| a * b)
            .collect(),
    );
    s.igft(&prod)
}

/// Generalized translation of a vertex-domain signal:
/// (T_i f)(n) = sqrt(N) sum_l fhat(lambda_l) chi_l(i) chi_l(n).
pub fn translate(s: &Spectrum, f: &Signal, i: usize) -> Result<Signal> {
    s.require_variant(LaplacianVariant::Combinatorial)?;
    s.check_len(f)?;
    s.check_vertex(i)?;
    let fhat = s.gft(f)?;
    let scaled = weight_by_row(s, &fhat, i, (s.n() as f64).sqrt());
    s.igft(&scaled)
}

/// Translation of a window defined directly in the spectral domain.
/// Returns the real vertex-domain window T_i g.
pub fn translate_spectral(s: &Spectrum, ghat: &[f64], i: usize) -> Result<Vec<f64>> {
    s.require_variant(LaplacianVariant::Combinatorial)?;
    if ghat.len() != s.n() {
        return Err(Error::DimensionMismatch {
            expected: s.n(),
            got: ghat.len(),
        });
    }
    s.check_vertex(i)?;
    let scale = (s.n() as f64).sqrt();
    let weighted: Vec<f64> = ghat
        .iter()
        .enumerate()
        .map(|(l, &v)| scale * v * s.chi(i, l))
        .collect();
    Ok(s.igft_real(&weighted))
}

/// Translate a kernel window to vertex `i`.
pub fn translate_kernel(s: &Spectrum, kernel: &Kernel, i: usize) -> Result<Vec<f64>> {
    let ghat = kernel.evaluate(s)?;
    translate_spectral(s, &ghat, i)
}

/// ||T_n g||_2^2 for every vertex n, via the closed form
/// N sum_l |ghat(lambda_l)|^2 |chi_l(n)|^2.
pub fn translated_norms_sq(s: &Spectrum, ghat: &[f64]) -> Vec<f64> {
    let n = s.n();
    let scale = n as f64;
    (0..n)
        .map(|v| {
            let mut acc = 0.0;
            for l in 0..n {
                let t = ghat[l] * s.chi(v, l);
                acc += t * t;
            }
            scale * acc
        })
        .collect()
}

/// Generalized modulation: (M_k f)(n) = sqrt(N) f(n) chi_k(n).
pub fn modulate(s: &Spectrum, f: &Signal, k: usize) -> Result<Signal> {
    s.require_variant(LaplacianVariant::Combinatorial)?;
    s.check_len(f)?;
    s.check_vertex(k)?;
    let scale = (s.n() as f64).sqrt();
    let weights: Vec<f64> = (0..s.n()).map(|n| scale * s.chi(n, k)).collect();
    Ok(f.mul_real(&weights))
}

/// Normalized-Laplacian translation: sqrt(N) is replaced by ||sqrt(d)||_2.
pub fn translate_normalized(s: &Spectrum, f: &Signal, i: usize) -> Result<Signal> {
    s.require_variant(LaplacianVariant::Normalized)?;
    s.check_len(f)?;
    s.check_vertex(i)?;
    let fhat = s.gft(f)?;
    let scaled = weight_by_row(s, &fhat, i, s.sqrt_degree_norm()?);
    s.igft(&scaled)
}

/// Normalized-Laplacian translation of a spectral window.
pub fn translate_normalized_spectral(s: &Spectrum, ghat: &[f64], i: usize) -> Result<Vec<f64>> {
    s.require_variant(LaplacianVariant::Normalized)?;
    if ghat.len() != s.n() {
        return Err(Error::DimensionMismatch {
            expected: s.n(),
            got: ghat.len(),
        });
    }
    s.check_vertex(i)?;
    let scale = s.sqrt_degree_norm()?;
    let weighted: Vec<f64> = ghat
        .iter()
        .enumerate()
        .map(|(l, &v)| scale * v * s.chi(i, l))
        .collect();
    Ok(s.igft_real(&weighted))
}

/// Normalized-Laplacian modulation:
/// (M~_k f)(n) = f(n) chi~_k(n) ||sqrt(d)||_2 / sqrt(d_n).
pub fn modulate_normalized(s: &Spectrum, f: &Signal, k: usize) -> Result<Signal> {
    s.require_variant(LaplacianVariant::Normalized)?;
    s.check_len(f)?;
    s.check_vertex(k)?;
    let norm = s.sqrt_degree_norm()?;
    let degrees = s.degrees().expect("sqrt_degree_norm verified degrees");
    let weights: Vec<f64> = (0..s.n())
        .map(|n| s.chi(n, k) * norm / degrees[n].sqrt())
        .collect();
    Ok(f.mul_real(&weights))
}

fn weight_by_row(s: &Spectrum, fhat: &Signal, i: usize, scale: f64) -> Signal {
    Signal::from_complex(
        fhat.values()
            .iter()
            .enumerate()
            .map(|(l, v)| v * (scale * s.chi(i, l)))
            .collect(),
    )
}

/// Weighting families for the dual graph built on the Laplacian spectrum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DualWeighting {
    /// Path graph with W_{k,k+1} = 1 / (|lambda_k - lambda_{k+1}| + 1e-6).
    InverseGap,
    /// Path graph with Gaussian weights on the gaps, scaled by the mean gap.
    Exponential,
    /// Every pair of eigenvalues within `sigma2` connected with a
    /// thresholded Gaussian weight of width `sigma1`.
    Thresholded { sigma1: f64, sigma2: f64 },
}

/// A weighted graph on the Laplacian spectrum of a base graph, so that
/// modulation on the base graph becomes translation on this one.
#[derive(Debug, Clone)]
pub struct DualGraph {
    graph: Graph,
    spectrum: Spectrum,
    weighting: DualWeighting,
}

impl DualGraph {
    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    /// Spectrum of the dual Laplacian (eigenpairs lambda-check, chi-check).
    pub fn spectrum(&self) -> &Spectrum {
        &self.spectrum
    }

    pub fn weighting(&self) -> DualWeighting {
        self.weighting
    }
}

/// Build the dual graph on sigma(L) with the requested weighting.
pub fn build_dual_graph(s: &Spectrum, weighting: DualWeighting) -> Result<DualGraph> {
    let n = s.n();
    let lam = s.eigenvalues();
    let mut w = DMatrix::<f64>::zeros(n, n);
    match weighting {
        DualWeighting::InverseGap => {
            for k in 0..n - 1 {
                let weight = 1.0 / ((lam[k] - lam[k + 1]).abs() + DUAL_GAP_REGULARIZER);
                w[(k, k + 1)] = weight;
                w[(k + 1, k)] = weight;
            }
        }
        DualWeighting::Exponential => {
            let mean_gap = (lam[n - 1] - lam[0]) / (n as f64 - 1.0);
            let denom = 2.0 * mean_gap * mean_gap;
            for k in 0..n - 1 {
                let gap = lam[k + 1] - lam[k];
                let weight = (-gap * gap / denom).exp();
                w[(k, k + 1)] = weight;
                w[(k + 1, k)] = weight;
            }
        }
        DualWeighting::Thresholded { sigma1, sigma2 } => {
            for j in 0..n {
                for k in (j + 1)..n {
                    let gap = (lam[j] - lam[k]).abs();
                    if gap <= sigma2 {
                        let weight = (-gap * gap / (2.0 * sigma1 * sigma1)).exp();
                        w[(j, k)] = weight;
                        w[(k, j)] = weight;
                    }
                }
            }
        }
    }
    let graph = Graph::from_adjacency(w).map_err(|e| match e {
        Error::DisconnectedGraph => Error::DisconnectedDual,
        other => other,
    })?;
    let spectrum = Spectrum::of(&graph, LaplacianVariant::Combinatorial)?;
    Ok(DualGraph {
        graph,
        spectrum,
        weighting,
    })
}

/// Where the kernel driving the alternative modulation lives.
#[derive(Debug, Clone, Copy)]
pub enum DualKernelPlacement<'a> {
    /// fhat given on sigma(L): the dual-vertex-domain signal.
    OnBase(&'a [f64]),
    /// fhathat given on sigma(L-check): the dual-spectral-domain samples.
    OnDual(&'a [f64]),
}

/// Result of the dual-graph modulation M-check_k.
#[derive(Debug, Clone)]
pub struct AltModulation {
    /// hat(M-check_k f)(lambda_l): spectral coefficients on sigma(L).
    pub spectral: Vec<f64>,
    /// The vertex-domain modulated signal on the base graph.
    pub vertex: Signal,
}

/// Alternative modulation: generalized translation on the dual graph,
/// hat(M-check_k f)(lambda_l) = sqrt(N) sum_j fhathat(lambda-check_j)
/// chi-check_j(k) chi-check_j(l).
pub fn alt_modulate(
    s: &Spectrum,
    dual: &DualGraph,
    kernel: DualKernelPlacement<'_>,
    k: usize,
) -> Result<AltModulation> {
    let n = s.n();
    if dual.spectrum.n() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: dual.spectrum.n(),
        });
    }
    s.check_vertex(k)?;
    let fhathat: Vec<f64> = match kernel {
        DualKernelPlacement::OnBase(fhat) => {
            if fhat.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: fhat.len(),
                });
            }
            dual.spectrum.gft_real(fhat)
        }
        DualKernelPlacement::OnDual(v) => {
            if v.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: v.len(),
                });
            }
            v.to_vec()
        }
    };
    // translation on the dual graph, with the base graph's sqrt(N) constant
    let scale = (n as f64).sqrt();
    let ds = &dual.spectrum;
    let weighted: Vec<f64> = fhathat
        .iter()
        .enumerate()
        .map(|(j, &v)| scale * v * ds.chi(k, j))
        .collect();
    let spectral = ds.igft_real(&weighted);
    let vertex = Signal::from_real(&s.igft_real(&spectral));
    Ok(AltModulation { spectral, vertex })
}

/// Approximate ghat(L) f by a truncated Chebyshev expansion on
/// [0, lambda_max_bound], using only matrix-vector products with L.
///
/// `lambda_max` should be the exact largest eigenvalue when a spectrum is
/// available; otherwise the Gershgorin bound 2 * d_max is used.
pub fn chebyshev_filter(
    graph: &Graph,
    kernel: &Kernel,
    f: &Signal,
    order: usize,
    lambda_max: Option<f64>,
) -> Result<Signal> {
    assert!(order >= 1, "chebyshev order must be at least 1");
    if kernel.normalized {
        return Err(Error::UnsupportedKernelForm(
            "normalized kernel (normalization requires a spectrum)",
        ));
    }
    let n = graph.n_vertices();
    if f.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: f.len(),
        });
    }
    let bound = lambda_max.unwrap_or(2.0 * graph.degree_max());
    let coeffs = chebyshev_coefficients(kernel, bound, order)?;
    let l = graph.laplacian(LaplacianVariant::Combinatorial);
    let re = chebyshev_apply(&l, bound, &coeffs, &DVector::from_vec(f.real_parts()));
    let im = chebyshev_apply(&l, bound, &coeffs, &DVector::from_vec(f.imag_parts()));
    Ok(Signal::from_complex(
        re.iter()
            .zip(im.iter())
            .map(|(&a, &b)| Complex64::new(a, b))
            .collect(),
    ))
}

/// Chebyshev coefficients of the kernel on [0, bound] by 1000-point
/// Gauss-Chebyshev quadrature.
fn chebyshev_coefficients(kernel: &Kernel, bound: f64, order: usize) -> Result<Vec<f64>> {
    const QUAD_POINTS: usize = 1000;
    let a = bound / 2.0;
    let mut samples = Vec::with_capacity(QUAD_POINTS);
    let mut thetas = Vec::with_capacity(QUAD_POINTS);
    for j in 0..QUAD_POINTS {
        let theta = std::f64::consts::PI * (j as f64 + 0.5) / QUAD_POINTS as f64;
        thetas.push(theta);
        samples.push(kernel.evaluate_analytic(a * (theta.cos() + 1.0))?);
    }
    let mut coeffs = Vec::with_capacity(order + 1);
    for k in 0..=order {
        let mut acc = 0.0;
        for (theta, value) in thetas.iter().zip(samples.iter()) {
            acc += value * (k as f64 * theta).cos();
        }
        coeffs.push(2.0 * acc / QUAD_POINTS as f64);
    }
    Ok(coeffs)
}

/// Three-term recurrence for the shifted Chebyshev polynomials of L.
fn chebyshev_apply(
    l: &DMatrix<f64>,
    bound: f64,
    coeffs: &[f64],
    f: &DVector<f64>,
) -> DVector<f64> {
    let a = bound / 2.0;
    let mut result = f * (coeffs[0] / 2.0);
    if coeffs.len() == 1 {
        return result;
    }
    // t1 = (L/a - I) f
    let mut t_prev = f.clone();
    let mut t_curr = (l * f) / a - f;
    result += &t_curr * coeffs[1];
    for &c in &coeffs[2..] {
        let t_next = ((l * &t_curr) / a - &t_curr) * 2.0 - &t_prev;
        result += &t_next * c;
        t_prev = t_curr;
        t_curr = t_next;
    }
    result
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::GraphSpec;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_signal(n: usize, rng: &mut ChaCha8Rng) -> Signal {
        Signal::from_real(&(0..n).map(|_| rng.random::<f64>() - 0.5).collect::<Vec<_>>())
    }

    fn setup(n: usize) -> (Graph, Spectrum) {
        let g = Graph::generate(&GraphSpec::Sensor {
            n,
            sigma1: 0.25,
            sigma2: 0.3,
            seed: 8,
        })
        .unwrap();
        let s = Spectrum::of(&g, LaplacianVariant::Combinatorial).unwrap();
        (g, s)
    }

    #[test]
    fn g0_is_the_convolution_identity() {
        let (_, s) = setup(30);
        let g0 = convolution_identity(&s);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let f = random_signal(30, &mut rng);
        let conv = convolve(&s, &f, &g0).unwrap();
        assert!(conv.sub(&f).max_abs() <= 1e-12);
    }

    #[test]
    fn convolution_commutes() {
        let (_, s) = setup(25);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let f = random_signal(25, &mut rng);
        let g = random_signal(25, &mut rng);
        let fg = convolve(&s, &f, &g).unwrap();
        let gf = convolve(&s, &g, &f).unwrap();
        assert!(fg.sub(&gf).max_abs() <= 1e-12);
    }

    #[test]
    fn convolution_sum_rule() {
        let (_, s) = setup(25);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let f = random_signal(25, &mut rng);
        let g = random_signal(25, &mut rng);
        let conv = convolve(&s, &f, &g).unwrap();
        let lhs = conv.sum().re;
        let rhs = f.sum().re * g.sum().re / (25f64).sqrt();
        assert!((lhs - rhs).abs() <= 1e-10);
    }

    #[test]
    fn translation_preserves_signal_sum() {
        let (_, s) = setup(30);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let f = random_signal(30, &mut rng);
        for i in [0, 13, 29] {
            let t = translate(&s, &f, i).unwrap();
            assert!((t.sum().re - f.sum().re).abs() <= 1e-10);
            let fhat0 = s.gft(&f).unwrap().values()[0];
            assert!((t.sum().re - (30f64).sqrt() * fhat0.re).abs() <= 1e-10);
        }
    }

    #[test]
    fn translations_commute() {
        let (_, s) = setup(20);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let f = random_signal(20, &mut rng);
        let tij = translate(&s, &translate(&s, &f, 3).unwrap(), 11).unwrap();
        let tji = translate(&s, &translate(&s, &f, 11).unwrap(), 3).unwrap();
        assert!(tij.sub(&tji).max_abs() <= 1e-10);
    }

    #[test]
    fn delta_spectrum_translation_norm() {
        // ghat = e_0: only the DC term survives, so ||T_i g||_2 = |ghat(0)|
        let (_, s) = setup(20);
        let mut ghat = vec![0.0; 20];
        ghat[0] = 0.7;
        for i in 0..20 {
            let t = translate_spectral(&s, &ghat, i).unwrap();
            let norm: f64 = t.iter().map(|v| v * v).sum::<f64>().sqrt();
            assert!((norm - 0.7).abs() < 1e-12);
        }
    }

    #[test]
    fn modulation_by_zero_is_identity() {
        let (_, s) = setup(20);
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let f = random_signal(20, &mut rng);
        let m = modulate(&s, &f, 0).unwrap();
        assert!(m.sub(&f).max_abs() <= 1e-12);
    }

    #[test]
    fn modulation_moves_dc_to_k() {
        let (_, s) = setup(20);
        let g = s.igft(&Signal::delta(20, 0)).unwrap();
        for k in [0, 5, 19] {
            let mhat = s.gft(&modulate(&s, &g, k).unwrap()).unwrap();
            for l in 0..20 {
                let want = if l == k { 1.0 } else { 0.0 };
                assert!((mhat.values()[l].re - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn modulation_matches_pointwise_oracle() {
        let (_, s) = setup(22);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let f = random_signal(22, &mut rng);
        let k = 9;
        let m = modulate(&s, &f, k).unwrap();
        let scale = (22f64).sqrt();
        for n in 0..22 {
            let want = scale * f.values()[n].re * s.chi(n, k);
            assert!((m.values()[n].re - want).abs() <= 1e-12);
        }
        let masked: f64 = (0..22)
            .map(|n| (f.values()[n].re * s.chi(n, k)).powi(2))
            .sum::<f64>()
            .sqrt();
        assert!((m.norm() - scale * masked).abs() <= 1e-12);
    }

    #[test]
    fn variant_mismatch_is_rejected() {
        let (g, _) = setup(15);
        let sn = Spectrum::of(&g, LaplacianVariant::Normalized).unwrap();
        let f = Signal::zeros(15);
        assert!(matches!(
            modulate(&sn, &f, 1).unwrap_err(),
            Error::VariantMismatch { .. }
        ));
        let sc = Spectrum::of(&g, LaplacianVariant::Combinatorial).unwrap();
        assert!(matches!(
            modulate_normalized(&sc, &f, 1).unwrap_err(),
            Error::VariantMismatch { .. }
        ));
    }

    #[test]
    fn normalized_modulation_identity_and_dc_shift() {
        let (g, _) = setup(20);
        let s = Spectrum::of(&g, LaplacianVariant::Normalized).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let f = random_signal(20, &mut rng);
        let m0 = modulate_normalized(&s, &f, 0).unwrap();
        assert!(m0.sub(&f).max_abs() <= 1e-12);

        let gdc = s.igft(&Signal::delta(20, 0)).unwrap();
        for k in [2, 11] {
            let mhat = s.gft(&modulate_normalized(&s, &gdc, k).unwrap()).unwrap();
            for l in 0..20 {
                let want = if l == k { 1.0 } else { 0.0 };
                assert!((mhat.values()[l].re - want).abs() < 1e-11);
            }
        }
    }

    #[test]
    fn normalized_translation_weighted_sum() {
        let (g, _) = setup(24);
        let s = Spectrum::of(&g, LaplacianVariant::Normalized).unwrap();
        let d = g.degrees().clone();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let f = random_signal(24, &mut rng);
        let weighted_sum =
            |sig: &Signal| -> f64 { sig.values().iter().zip(d.iter()).map(|(v, &dn)| v.re * dn.sqrt()).sum() };
        for i in [0, 7, 23] {
            let t = translate_normalized(&s, &f, i).unwrap();
            let lhs = weighted_sum(&t);
            let rhs = d[i].sqrt() * weighted_sum(&f);
            assert!((lhs - rhs).abs() <= 1e-10 * rhs.abs().max(1.0));
        }
    }

    #[test]
    fn inverse_gap_dual_weights_match_formula() {
        let g = Graph::generate(&GraphSpec::Path { n: 10 }).unwrap();
        let s = Spectrum::of(&g, LaplacianVariant::Combinatorial).unwrap();
        let dual = build_dual_graph(&s, DualWeighting::InverseGap).unwrap();
        for k in 0..9 {
            let want = 1.0 / ((s.lambda(k) - s.lambda(k + 1)).abs() + DUAL_GAP_REGULARIZER);
            assert_eq!(dual.graph().adjacency()[(k, k + 1)], want);
        }
        assert_eq!(dual.graph().adjacency()[(0, 2)], 0.0);
    }

    #[test]
    fn dual_heat_modulation_concentrates_near_k() {
        // kernel defined on sigma(L-check); unimodal dual-domain window
        let g = Graph::generate(&GraphSpec::Path { n: 64 }).unwrap();
        let s = Spectrum::of(&g, LaplacianVariant::Combinatorial).unwrap();
        let dual = build_dual_graph(&s, DualWeighting::InverseGap).unwrap();
        let fhathat = Kernel::heat(1e-3).evaluate(dual.spectrum()).unwrap();
        for k in 0..64 {
            let m = alt_modulate(&s, &dual, DualKernelPlacement::OnDual(&fhathat), k).unwrap();
            let argmax = m
                .spectral
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.abs().partial_cmp(&b.1.abs()).unwrap())
                .unwrap()
                .0;
            assert!(
                argmax.abs_diff(k) <= 5,
                "k={k}: spectral argmax {argmax} too far"
            );
        }
    }

    #[test]
    fn dual_modulation_of_dc_delta_follows_chi0_pattern() {
        // fhathat = e_0 reproduces sqrt(N) chi-check_0(k) chi-check_0(l),
        // which is constant in l for any connected dual graph.
        let g = Graph::generate(&GraphSpec::Path { n: 16 }).unwrap();
        let s = Spectrum::of(&g, LaplacianVariant::Combinatorial).unwrap();
        let dual = build_dual_graph(&s, DualWeighting::InverseGap).unwrap();
        let mut e0 = vec![0.0; 16];
        e0[0] = 1.0;
        let ds = dual.spectrum();
        for k in [0, 7, 15] {
            let m = alt_modulate(&s, &dual, DualKernelPlacement::OnDual(&e0), k).unwrap();
            for l in 0..16 {
                let want = 4.0 * ds.chi(k, 0) * ds.chi(l, 0);
                assert!((m.spectral[l] - want).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn both_dual_kernel_placements_are_consistent() {
        // a kernel placed on sigma(L) equals its dual-GFT placed on sigma(L-check)
        let g = Graph::generate(&GraphSpec::Path { n: 24 }).unwrap();
        let s = Spectrum::of(&g, LaplacianVariant::Combinatorial).unwrap();
        let dual = build_dual_graph(&s, DualWeighting::Exponential).unwrap();
        let fhat: Vec<f64> = s.eigenvalues().iter().map(|&l| (-2.0 * l).exp()).collect();
        let fhathat = dual.spectrum().gft_real(&fhat);
        let a = alt_modulate(&s, &dual, DualKernelPlacement::OnBase(&fhat), 5).unwrap();
        let b = alt_modulate(&s, &dual, DualKernelPlacement::OnDual(&fhathat), 5).unwrap();
        for l in 0..24 {
            assert!((a.spectral[l] - b.spectral[l]).abs() <= 1e-12);
        }
    }

    #[test]
    fn thresholded_dual_can_disconnect() {
        let g = Graph::generate(&GraphSpec::Path { n: 32 }).unwrap();
        let s = Spectrum::of(&g, LaplacianVariant::Combinatorial).unwrap();
        let err = build_dual_graph(
            &s,
            DualWeighting::Thresholded {
                sigma1: 1e-4,
                sigma2: 1e-4,
            },
        )
        .unwrap_err();
        assert!(matches!(err, Error::DisconnectedDual));
    }

    #[test]
    fn chebyshev_is_exact_on_polynomials() {
        let (g, s) = setup(40);
        let kernel = Kernel::polynomial(vec![0.3, -1.2, 0.4]);
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let f = random_signal(40, &mut rng);
        let exact = convolve_kernel(&s, &f, &kernel).unwrap();
        for order in [2, 5] {
            let approx = chebyshev_filter(&g, &kernel, &f, order, Some(s.lambda_max())).unwrap();
            let err = approx.sub(&exact).norm() / exact.norm();
            assert!(err <= 1e-8, "order {order}: rel err {err}");
        }
    }

    #[test]
    fn chebyshev_heat_converges_monotonically() {
        let (g, s) = setup(60);
        let kernel = Kernel::heat(2.0);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let f = random_signal(60, &mut rng);
        let exact = convolve_kernel(&s, &f, &kernel).unwrap();
        let err_at = |order: usize| {
            let approx = chebyshev_filter(&g, &kernel, &f, order, Some(s.lambda_max())).unwrap();
            approx.sub(&exact).norm() / exact.norm()
        };
        let e1 = err_at(1);
        let e30 = err_at(30);
        assert!(e30 < 1e-8, "order 30 err {e30}");
        assert!(e1 > e30, "order 1 err {e1} should exceed order 30 err {e30}");
    }

    #[test]
    fn chebyshev_rejects_sampled_kernels() {
        let (g, s) = setup(10);
        let kernel = Kernel::sampled(vec![1.0; 10]);
        let f = Signal::zeros(10);
        let err = chebyshev_filter(&g, &kernel, &f, 5, Some(s.lambda_max())).unwrap_err();
        assert!(matches!(err, Error::UnsupportedKernelForm(_)));
    }
}
