use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::graph::hex_digest;
use crate::spectral::Spectrum;

/// Functional form of a spectral-domain window ghat: [0, lambda_max] -> R.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", content = "params", rename_all = "snake_case")]
pub enum KernelForm {
    /// ghat(lambda) = exp(-tau * lambda)
    Heat { tau: f64 },
    /// ghat(lambda) = sum_k coeffs[k] * lambda^k
    Polynomial { coeffs: Vec<f64> },
    /// Values given directly on the N eigenvalues of a spectrum.
    Sampled { values: Vec<f64> },
}

/// A spectral window, optionally normalized so the vertex-domain signal it
/// defines has unit 2-norm (equivalently, sum of squared samples = 1).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Kernel {
    #[serde(flatten)]
    pub form: KernelForm,
    #[serde(default)]
    pub normalized: bool,
}

impl Kernel {
    /// Heat kernel with diffusion parameter `tau >= 0`.
    pub fn heat(tau: f64) -> Kernel {
        assert!(tau >= 0.0 && tau.is_finite(), "tau must be nonnegative");
        Kernel {
            form: KernelForm::Heat { tau },
            normalized: false,
        }
    }

    /// Polynomial kernel with coefficients a_0..a_K.
    pub fn polynomial(coeffs: Vec<f64>) -> Kernel {
        assert!(!coeffs.is_empty(), "polynomial kernel needs a_0");
        Kernel {
            form: KernelForm::Polynomial { coeffs },
            normalized: false,
        }
    }

    /// Kernel given by samples on the N eigenvalues.
    pub fn sampled(values: Vec<f64>) -> Kernel {
        Kernel {
            form: KernelForm::Sampled { values },
            normalized: false,
        }
    }

    /// Request unit-norm normalization at evaluation time.
    pub fn normalized(mut self) -> Kernel {
        self.normalized = true;
        self
    }

    /// Evaluate the continuous kernel at each Laplacian eigenvalue,
    /// applying normalization when requested.
    pub fn evaluate(&self, spectrum: &Spectrum) -> Result<Vec<f64>> {
        let mut values = match &self.form {
            KernelForm::Heat { tau } => spectrum
                .eigenvalues()
                .iter()
                .map(|&l| (-tau * l).exp())
                .collect(),
            KernelForm::Polynomial { coeffs } => spectrum
                .eigenvalues()
                .iter()
                .map(|&l| horner(coeffs, l))
                .collect(),
            KernelForm::Sampled { values } => {
                if values.len() != spectrum.n() {
                    return Err(Error::DimensionMismatch {
                        expected: spectrum.n(),
                        got: values.len(),
                    });
                }
                values.clone()
            }
        };
        if self.normalized {
            let energy: f64 = values.iter().map(|v| v * v).sum();
            if energy == 0.0 {
                return Err(Error::ZeroKernel);
            }
            let c = 1.0 / energy.sqrt();
            for v in values.iter_mut() {
                *v *= c;
            }
        }
        Ok(values)
    }

    /// Evaluate the analytic (unnormalized) form at an arbitrary point;
    /// sampled kernels have no continuous extension.
    pub fn evaluate_analytic(&self, lambda: f64) -> Result<f64> {
        match &self.form {
            KernelForm::Heat { tau } => Ok((-tau * lambda).exp()),
            KernelForm::Polynomial { coeffs } => Ok(horner(coeffs, lambda)),
            KernelForm::Sampled { .. } => Err(Error::UnsupportedKernelForm("sampled")),
        }
    }

    /// Polynomial degree, when the kernel is a polynomial.
    pub fn polynomial_degree(&self) -> Option<usize> {
        match &self.form {
            KernelForm::Polynomial { coeffs } => Some(coeffs.len() - 1),
            _ => None,
        }
    }

    pub fn heat_tau(&self) -> Option<f64> {
        match self.form {
            KernelForm::Heat { tau } => Some(tau),
            _ => None,
        }
    }

    /// Serialize to the `{form, params, normalized}` JSON interchange format.
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("kernel serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<Kernel> {
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("kernel json: {e}")))
    }

    /// SHA-256 of the canonical JSON form.
    pub fn content_hash(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update(self.to_json().as_bytes());
        hex_digest(hasher)
    }
}

fn horner(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
}
