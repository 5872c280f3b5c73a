use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::graph::{hex_digest, Graph, LaplacianVariant};
use crate::signal::Signal;

/// Eigenvalues above this magnitude of negativity indicate a non-PSD input;
/// anything in (-EIGENVALUE_CLAMP, 0) is floating-point noise and clamped.
const EIGENVALUE_CLAMP: f64 = 1e-10;

/// Ordered eigendecomposition of a graph Laplacian with a fixed sign
/// convention, so that identical inputs always produce identical spectra.
#[derive(Debug, Clone)]
pub struct Spectrum {
    eigenvalues: DVector<f64>,
    /// Column l is the eigenvector chi_l.
    eigenvectors: DMatrix<f64>,
    variant: LaplacianVariant,
    /// Content hash of the source graph (or of the raw matrix bytes).
    source_hash: String,
    /// Weighted degrees of the source graph; present when built via
    /// [`Spectrum::of`]. The normalized-Laplacian operators need them.
    degrees: Option<DVector<f64>>,
}

/// Mutual coherence between the vertex deltas and the eigenbasis, plus the
/// per-eigenvector and per-vertex maxima it is built from.
#[derive(Debug, Clone)]
pub struct CoherenceReport {
    pub mu: f64,
    pub mu_per_eigvec: Vec<f64>,
    pub nu_per_vertex: Vec<f64>,
}

impl Spectrum {
    /// Eigendecompose the requested Laplacian of a graph.
    pub fn of(graph: &Graph, variant: LaplacianVariant) -> Result<Spectrum> {
        let l = graph.laplacian(variant);
        let mut s = decompose(&l, variant, graph.content_hash())?;
        s.degrees = Some(graph.degrees().clone());
        Ok(s)
    }

    /// Eigendecompose a raw symmetric matrix. The matrix must be the
    /// Laplacian of a connected graph for the spectrum invariants to hold.
    /// Normalized-variant operators additionally need the graph degrees and
    /// therefore require a spectrum built with [`Spectrum::of`].
    pub fn from_matrix(l: &DMatrix<f64>, variant: LaplacianVariant) -> Result<Spectrum> {
        let mut hasher = Sha256::new();
        hasher.update(b"matrix-v1");
        hasher.update((l.nrows() as u64).to_le_bytes());
        for v in l.iter() {
            hasher.update(v.to_le_bytes());
        }
        decompose(l, variant, hex_digest(hasher))
    }

    /// Reassemble a spectrum from trusted parts (used by the cache loader).
    pub(crate) fn from_raw_parts(
        eigenvalues: DVector<f64>,
        eigenvectors: DMatrix<f64>,
        variant: LaplacianVariant,
        source_hash: String,
        degrees: Option<DVector<f64>>,
    ) -> Spectrum {
        Spectrum {
            eigenvalues,
            eigenvectors,
            variant,
            source_hash,
            degrees,
        }
    }

    pub fn n(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvalues(&self) -> &DVector<f64> {
        &self.eigenvalues
    }

    pub fn lambda(&self, l: usize) -> f64 {
        self.eigenvalues[l]
    }

    pub fn lambda_max(&self) -> f64 {
        self.eigenvalues[self.n() - 1]
    }

    /// The full eigenvector matrix; column l is chi_l.
    pub fn eigenvectors(&self) -> &DMatrix<f64> {
        &self.eigenvectors
    }

    /// Entry chi_l(n) with n a 0-based vertex index.
    pub fn chi(&self, n: usize, l: usize) -> f64 {
        self.eigenvectors[(n, l)]
    }

    pub fn variant(&self) -> LaplacianVariant {
        self.variant
    }

    pub fn source_hash(&self) -> &str {
        &self.source_hash
    }

    pub fn degrees(&self) -> Option<&DVector<f64>> {
        self.degrees.as_ref()
    }

    /// Forward graph Fourier transform: fhat(l) = <f, chi_l>.
    pub fn gft(&self, f: &Signal) -> Result<Signal> {
        self.check_len(f)?;
        Ok(self.apply_real(f, true))
    }

    /// Inverse graph Fourier transform: f(n) = sum_l fhat(l) chi_l(n).
    pub fn igft(&self, fhat: &Signal) -> Result<Signal> {
        self.check_len(fhat)?;
        Ok(self.apply_real(fhat, false))
    }

    /// Forward transform of a real vector.
    pub fn gft_real(&self, f: &[f64]) -> Vec<f64> {
        let v = DVector::from_column_slice(f);
        self.eigenvectors.tr_mul(&v).as_slice().to_vec()
    }

    /// Inverse transform of a real spectral vector.
    pub fn igft_real(&self, fhat: &[f64]) -> Vec<f64> {
        let v = DVector::from_column_slice(fhat);
        (&self.eigenvectors * v).as_slice().to_vec()
    }

    /// Apply chi (or its transpose) to a complex signal via two real
    /// matrix-vector products.
    fn apply_real(&self, f: &Signal, transpose: bool) -> Signal {
        let re = DVector::from_vec(f.real_parts());
        let im = DVector::from_vec(f.imag_parts());
        let (wre, wim) = if transpose {
            (self.eigenvectors.tr_mul(&re), self.eigenvectors.tr_mul(&im))
        } else {
            (&self.eigenvectors * re, &self.eigenvectors * im)
        };
        Signal::from_complex(
            wre.iter()
                .zip(wim.iter())
                .map(|(&a, &b)| Complex64::new(a, b))
                .collect(),
        )
    }

    pub(crate) fn check_len(&self, f: &Signal) -> Result<()> {
        if f.len() != self.n() {
            return Err(Error::DimensionMismatch {
                expected: self.n(),
                got: f.len(),
            });
        }
        Ok(())
    }

    pub(crate) fn check_vertex(&self, i: usize) -> Result<()> {
        if i >= self.n() {
            return Err(Error::IndexOutOfRange {
                index: i,
                size: self.n(),
            });
        }
        Ok(())
    }

    /// Coherence statistics of the eigenbasis.
    pub fn coherence(&self) -> CoherenceReport {
        let n = self.n();
        let mut mu_per_eigvec = vec![0.0f64; n];
        let mut nu_per_vertex = vec![0.0f64; n];
        for l in 0..n {
            for i in 0..n {
                let a = self.eigenvectors[(i, l)].abs();
                if a > mu_per_eigvec[l] {
                    mu_per_eigvec[l] = a;
                }
                if a > nu_per_vertex[i] {
                    nu_per_vertex[i] = a;
                }
            }
        }
        let mu = mu_per_eigvec.iter().copied().fold(0.0, f64::max);
        CoherenceReport {
            mu,
            mu_per_eigvec,
            nu_per_vertex,
        }
    }

    /// ||sqrt(d)||_2, the constant replacing sqrt(N) in normalized-Laplacian
    /// translation.
    pub(crate) fn sqrt_degree_norm(&self) -> Result<f64> {
        let d = self.degrees.as_ref().ok_or(Error::VariantMismatch {
            expected: "spectrum built from a graph (degrees available)",
            got: "spectrum built from a raw matrix",
        })?;
        Ok(d.sum().sqrt())
    }

    pub(crate) fn require_variant(&self, variant: LaplacianVariant) -> Result<()> {
        if self.variant != variant {
            return Err(Error::VariantMismatch {
                expected: variant.name(),
                got: self.variant.name(),
            });
        }
        Ok(())
    }
}

/// Eigendecompose a symmetric matrix: deterministic solver path, stable
/// ascending eigenvalue order, zero-clamping of PSD noise, and the sign
/// convention that the first component of each eigenvector exceeding 1e-8
/// in magnitude is positive.
pub fn eigendecompose(l: &DMatrix<f64>, variant: LaplacianVariant) -> Result<Spectrum> {
    Spectrum::from_matrix(l, variant)
}

fn decompose(l: &DMatrix<f64>, variant: LaplacianVariant, source_hash: String) -> Result<Spectrum> {
    let n = l.nrows();
    let scale = l.amax().max(1.0);
    let mut asym = 0.0f64;
    for i in 0..n {
        for j in (i + 1)..n {
            asym = asym.max((l[(i, j)] - l[(j, i)]).abs());
        }
    }
    if asym > 1e-9 * scale {
        return Err(Error::NotSymmetric(asym));
    }
    let sym = (l + l.transpose()) * 0.5;
    let eig = SymmetricEigen::try_new(sym, f64::EPSILON, 200 * n.max(8))
        .ok_or(Error::EigensolverFailure)?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[a]
            .partial_cmp(&eig.eigenvalues[b])
            .expect("eigenvalues are finite")
            .then(a.cmp(&b))
    });

    let mut eigenvalues = DVector::zeros(n);
    let mut eigenvectors = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        let mut lam = eig.eigenvalues[src];
        if lam < 0.0 && lam > -EIGENVALUE_CLAMP {
            lam = 0.0;
        }
        eigenvalues[dst] = lam;
        let col = eig.eigenvectors.column(src);
        let flip = col
            .iter()
            .find(|v| v.abs() > 1e-8)
            .map(|&v| v < 0.0)
            .unwrap_or(false);
        let sign = if flip { -1.0 } else { 1.0 };
        for i in 0..n {
            eigenvectors[(i, dst)] = sign * col[i];
        }
    }

    if eigenvalues[0] > EIGENVALUE_CLAMP || (n > 1 && eigenvalues[1] <= eigenvalues[0]) {
        // a Laplacian of a connected graph has a simple zero eigenvalue
        return Err(Error::EigensolverFailure);
    }

    Ok(Spectrum {
        eigenvalues,
        eigenvectors,
        variant,
        source_hash,
        degrees: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::GraphSpec;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn path_spectrum(n: usize) -> Spectrum {
        let g = Graph::generate(&GraphSpec::Path { n }).unwrap();
        Spectrum::of(&g, LaplacianVariant::Combinatorial).unwrap()
    }

    #[test]
    fn path4_eigenvalues_match_closed_form() {
        let s = path_spectrum(4);
        let expected = [0.0, 2.0 - 2.0f64.sqrt(), 2.0, 2.0 + 2.0f64.sqrt()];
        for (got, want) in s.eigenvalues().iter().zip(expected) {
            assert!((got - want).abs() < 1e-12, "{got} vs {want}");
        }
    }

    #[test]
    fn path_eigenvalues_closed_form_general() {
        let n = 31;
        let s = path_spectrum(n);
        for l in 0..n {
            let want = 2.0 - 2.0 * (std::f64::consts::PI * l as f64 / n as f64).cos();
            assert!((s.lambda(l) - want).abs() < 1e-10);
        }
    }

    #[test]
    fn ring_eigenvalue_multiset() {
        let n = 12;
        let g = Graph::generate(&GraphSpec::Ring { n }).unwrap();
        let s = Spectrum::of(&g, LaplacianVariant::Combinatorial).unwrap();
        let mut want: Vec<f64> = (0..n)
            .map(|l| 2.0 - 2.0 * (2.0 * std::f64::consts::PI * l as f64 / n as f64).cos())
            .collect();
        want.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (got, want) in s.eigenvalues().iter().zip(want) {
            assert!((got - want).abs() < 1e-10);
        }
    }

    #[test]
    fn path_eigenvectors_are_dct2() {
        // all path eigenvalues are simple, so eigenvectors match the DCT-II
        // basis up to sign; the sign convention picks the positive-first one.
        let n = 16;
        let s = path_spectrum(n);
        for l in 0..n {
            for v in 0..n {
                let want = if l == 0 {
                    1.0 / (n as f64).sqrt()
                } else {
                    (2.0 / n as f64).sqrt()
                        * (std::f64::consts::PI * l as f64 * (v as f64 + 0.5) / n as f64).cos()
                };
                assert!(
                    (s.chi(v, l) - want).abs() < 1e-8,
                    "l={l} v={v}: {} vs {want}",
                    s.chi(v, l)
                );
            }
        }
    }

    #[test]
    fn sign_convention_and_determinism() {
        let g = Graph::generate(&GraphSpec::Sensor {
            n: 50,
            sigma1: 0.25,
            sigma2: 0.3,
            seed: 2,
        })
        .unwrap();
        let s1 = Spectrum::of(&g, LaplacianVariant::Combinatorial).unwrap();
        let s2 = Spectrum::of(&g, LaplacianVariant::Combinatorial).unwrap();
        assert_eq!(s1.eigenvectors(), s2.eigenvectors());
        for l in 0..s1.n() {
            let first = s1
                .eigenvectors()
                .column(l)
                .iter()
                .copied()
                .find(|v| v.abs() > 1e-8)
                .unwrap();
            assert!(first > 0.0, "column {l} starts with {first}");
        }
    }

    #[test]
    fn orthonormality_and_residual_invariants() {
        for variant in [LaplacianVariant::Combinatorial, LaplacianVariant::Normalized] {
            let g = Graph::generate(&GraphSpec::Sensor {
                n: 60,
                sigma1: 0.25,
                sigma2: 0.3,
                seed: 5,
            })
            .unwrap();
            let s = Spectrum::of(&g, variant).unwrap();
            let n = s.n();
            let gram = s.eigenvectors().tr_mul(s.eigenvectors());
            let ortho = (&gram - DMatrix::<f64>::identity(n, n)).amax();
            assert!(ortho < 1e-9, "orthonormality {ortho}");
            let l = g.laplacian(variant);
            let resid = (&l * s.eigenvectors()
                - s.eigenvectors() * DMatrix::from_diagonal(s.eigenvalues()))
            .amax();
            assert!(resid < 1e-8 * s.lambda_max().max(1.0), "residual {resid}");
            assert!(s.lambda(0) <= 1e-10);
            assert!(s.lambda(1) > s.lambda(0));
        }
    }

    #[test]
    fn gft_of_eigenvector_is_a_delta() {
        let s = path_spectrum(9);
        let chi3 = Signal::from_real(s.eigenvectors().column(3).as_slice());
        let fhat = s.gft(&chi3).unwrap();
        for l in 0..9 {
            let want = if l == 3 { 1.0 } else { 0.0 };
            assert!((fhat.values()[l].re - want).abs() < 1e-12);
            assert!(fhat.values()[l].im.abs() < 1e-15);
        }
    }

    #[test]
    fn gft_of_constant_hits_dc() {
        let n = 7;
        let s = path_spectrum(n);
        let c = Signal::from_real(&vec![1.0 / (n as f64).sqrt(); n]);
        let fhat = s.gft(&c).unwrap();
        assert!((fhat.values()[0].re - 1.0).abs() < 1e-12);
        for l in 1..n {
            assert!(fhat.values()[l].re.abs() < 1e-12);
        }
    }

    #[test]
    fn parseval_and_roundtrip_on_random_signals() {
        let g = Graph::generate(&GraphSpec::Ring { n: 24 }).unwrap();
        let s = Spectrum::of(&g, LaplacianVariant::Combinatorial).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            let f = Signal::from_complex(
                (0..24)
                    .map(|_| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
                    .collect(),
            );
            let fhat = s.gft(&f).unwrap();
            assert!((f.norm() - fhat.norm()).abs() <= 1e-10 * f.norm());
            let back = s.igft(&fhat).unwrap();
            assert!(back.sub(&f).norm() <= 1e-10 * f.norm());
        }
    }

    #[test]
    fn igft_of_dc_delta_is_constant() {
        let n = 11;
        let s = path_spectrum(n);
        let f = s.igft(&Signal::delta(n, 0)).unwrap();
        for v in f.values() {
            assert!((v.re - 1.0 / (n as f64).sqrt()).abs() < 1e-12);
        }
    }

    #[test]
    fn heat_signal_is_not_delta_like() {
        // vertex-domain heat kernel: energy spread over many vertices
        let g = Graph::generate(&GraphSpec::Sensor {
            n: 80,
            sigma1: 0.2,
            sigma2: 0.25,
            seed: 9,
        })
        .unwrap();
        let s = Spectrum::of(&g, LaplacianVariant::Combinatorial).unwrap();
        let ghat: Vec<f64> = s.eigenvalues().iter().map(|&l| (-5.0 * l).exp()).collect();
        let f = s.igft_real(&ghat);
        let linf = f.iter().fold(0.0f64, |m, &v| m.max(v.abs()));
        let l2: f64 = f.iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!(linf / l2 < 0.9, "ratio {}", linf / l2);
    }

    #[test]
    fn coherence_identities_and_bounds() {
        let n = 20;
        let s = path_spectrum(n);
        let c = s.coherence();
        // path: DCT basis has mu = sqrt(2/N)
        assert!((c.mu - (2.0 / n as f64).sqrt()).abs() < 1e-9);
        let max_mu = c.mu_per_eigvec.iter().copied().fold(0.0, f64::max);
        let max_nu = c.nu_per_vertex.iter().copied().fold(0.0, f64::max);
        assert_eq!(c.mu, max_mu);
        assert_eq!(c.mu, max_nu);
        assert!(c.mu >= 1.0 / (n as f64).sqrt());

        // ring: any real orthonormal eigenbasis stays within sqrt(2/N)
        let g = Graph::generate(&GraphSpec::Ring { n }).unwrap();
        let sr = Spectrum::of(&g, LaplacianVariant::Combinatorial).unwrap();
        let cr = sr.coherence();
        assert!(cr.mu <= (2.0 / n as f64).sqrt() + 1e-9);
        assert!(cr.mu >= 1.0 / (n as f64).sqrt());
    }

    #[test]
    fn asymmetric_matrix_is_rejected() {
        let mut l = DMatrix::<f64>::zeros(3, 3);
        l[(0, 1)] = 1.0;
        let err = Spectrum::from_matrix(&l, LaplacianVariant::Combinatorial).unwrap_err();
        assert!(matches!(err, Error::NotSymmetric(_)));
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let s = path_spectrum(5);
        let err = s.gft(&Signal::zeros(4)).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch { .. }));
    }
}
