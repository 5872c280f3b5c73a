use num_complex::Complex64;

/// A signal on the vertices of a graph (or, equally, a vector of spectral
/// coefficients indexed by eigenvalue index). Values are complex-capable;
/// with real windows and real eigenvectors everything stays real in practice.
#[derive(Debug, Clone, PartialEq)]
pub struct Signal {
    values: Vec<Complex64>,
}

impl Signal {
    pub fn from_complex(values: Vec<Complex64>) -> Self {
        Signal { values }
    }

    pub fn from_real(values: &[f64]) -> Self {
        Signal {
            values: values.iter().map(|&v| Complex64::new(v, 0.0)).collect(),
        }
    }

    pub fn zeros(n: usize) -> Self {
        Signal {
            values: vec![Complex64::new(0.0, 0.0); n],
        }
    }

    /// Kronecker delta at `index`.
    pub fn delta(n: usize, index: usize) -> Self {
        let mut s = Signal::zeros(n);
        s.values[index] = Complex64::new(1.0, 0.0);
        s
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    /// Real parts; the imaginary parts are simply dropped.
    pub fn real_parts(&self) -> Vec<f64> {
        self.values.iter().map(|z| z.re).collect()
    }

    pub fn imag_parts(&self) -> Vec<f64> {
        self.values.iter().map(|z| z.im).collect()
    }

    pub fn norm(&self) -> f64 {
        self.values.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.values.iter().map(|z| z.norm_sqr()).sum::<f64>()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn sum(&self) -> Complex64 {
        self.values.iter().sum()
    }

    /// Conjugate-linear in the second argument: sum f(n) g*(n).
    pub fn inner(&self, other: &Signal) -> Complex64 {
        self.values
            .iter()
            .zip(other.values.iter())
            .map(|(a, b)| a * b.conj())
            .sum()
    }

    pub fn scale(&self, alpha: Complex64) -> Signal {
        Signal {
            values: self.values.iter().map(|z| z * alpha).collect(),
        }
    }

    pub fn add(&self, other: &Signal) -> Signal {
        Signal {
            values: self
                .values
                .iter()
                .zip(other.values.iter())
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn sub(&self, other: &Signal) -> Signal {
        Signal {
            values: self
                .values
                .iter()
                .zip(other.values.iter())
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    /// Pointwise product with a real vector, e.g. multiplication by a
    /// translated window or an eigenvector.
    pub fn mul_real(&self, other: &[f64]) -> Signal {
        Signal {
            values: self
                .values
                .iter()
                .zip(other.iter())
                .map(|(a, &b)| a * b)
                .collect(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|z| z.re == 0.0 && z.im == 0.0)
    }
}
