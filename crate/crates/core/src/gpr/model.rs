use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use serde::{Deserialize, Serialize};

use super::kernel::KernelSpec;
use crate::error::{Error, Result};

const JITTER_START: f64 = 1e-10;
const JITTER_MAX: f64 = 1e-6;

/// `K_ij = k(x_i, x_j) + noise_var [i = j]`.
pub fn gram(spec: &KernelSpec, xs: &[f64], noise_var: f64) -> Result<DMatrix<f64>> {
    spec.validate()?;
    if xs.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidParameter("inputs must be finite".into()));
    }
    let n = xs.len();
    let mut k = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let v = spec.eval(xs[i], xs[j]);
            k[(i, j)] = v;
            k[(j, i)] = v;
        }
        k[(i, i)] += noise_var;
    }
    Ok(k)
}

/// Cholesky of `k`, adding diagonal jitter from 1e-10 up to 1e-6 (x10 per
/// retry) when the plain factorization fails. Returns the jitter used.
pub(crate) fn factor_with_jitter(k: &DMatrix<f64>) -> Result<(Cholesky<f64, Dyn>, f64)> {
    if let Some(c) = Cholesky::new(k.clone()) {
        return Ok((c, 0.0));
    }
    let mut jitter = JITTER_START;
    while jitter <= JITTER_MAX * (1.0 + 1e-12) {
        let mut kj = k.clone();
        for i in 0..kj.nrows() {
            kj[(i, i)] += jitter;
        }
        if let Some(c) = Cholesky::new(kj) {
            return Ok((c, jitter));
        }
        jitter *= 10.0;
    }
    Err(Error::Conditioning { jitter: JITTER_MAX })
}

/// Maps raw inputs to zero mean and unit (population) standard deviation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub mean: f64,
    pub scale: f64,
}

impl Standardizer {
    pub fn fit(xs: &[f64]) -> Self {
        let n = xs.len().max(1) as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
        let scale = if var > 0.0 { var.sqrt() } else { 1.0 };
        Self { mean, scale }
    }

    pub fn apply(&self, x: f64) -> f64 {
        (x - self.mean) / self.scale
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub mean: f64,
    pub variance: f64,
    pub interval95: (f64, f64),
    /// The raw variance came out negative and was clamped to zero.
    pub clamped: bool,
}

impl Prediction {
    pub fn std_dev(&self) -> f64 {
        self.variance.sqrt()
    }
}

/// A fitted GP with zero prior mean over standardized scalar inputs.
#[derive(Debug, Clone)]
pub struct GprModel {
    pub train_x: Vec<f64>,
    pub train_y: Vec<f64>,
    pub spec: KernelSpec,
    pub noise_var: f64,
    pub standardizer: Standardizer,
    /// Prior mean, zero by convention.
    pub mean_const: f64,
    /// Extra diagonal jitter the factorization needed.
    pub jitter: f64,
    chol: Cholesky<f64, Dyn>,
    weights: DVector<f64>,
}

impl GprModel {
    /// Standardizes the inputs, builds the Gram matrix, factors it and solves
    /// for the weights.
    pub fn fit(train_x: &[f64], train_y: &[f64], spec: &KernelSpec, noise_var: f64) -> Result<Self> {
        Self::fit_with(train_x, train_y, spec, noise_var, Standardizer::fit(train_x))
    }

    /// [`fit`](Self::fit) with a fixed standardization.
    pub fn fit_with(
        train_x: &[f64],
        train_y: &[f64],
        spec: &KernelSpec,
        noise_var: f64,
        standardizer: Standardizer,
    ) -> Result<Self> {
        if train_x.is_empty() {
            return Err(Error::InvalidParameter("at least one training pair is required".into()));
        }
        if train_x.len() != train_y.len() {
            return Err(Error::DimensionMismatch {
                op: "fit",
                expected: train_x.len(),
                found: train_y.len(),
            });
        }
        if !(noise_var >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "noise variance must be >= 0, got {noise_var}"
            )));
        }
        let xs: Vec<f64> = train_x.iter().map(|&x| standardizer.apply(x)).collect();
        let k = gram(spec, &xs, noise_var)?;
        let (chol, jitter) = factor_with_jitter(&k)?;
        let mean_const = 0.0;
        let resid = DVector::from_iterator(train_y.len(), train_y.iter().map(|y| y - mean_const));
        let weights = chol.solve(&resid);
        Ok(Self {
            train_x: train_x.to_vec(),
            train_y: train_y.to_vec(),
            spec: spec.clone(),
            noise_var,
            standardizer,
            mean_const,
            jitter,
            chol,
            weights,
        })
    }

    pub fn len(&self) -> usize {
        self.train_x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.train_x.is_empty()
    }

    /// Standardized training inputs.
    pub fn standardized_x(&self) -> Vec<f64> {
        self.train_x.iter().map(|&x| self.standardizer.apply(x)).collect()
    }

    /// `(K + sigma^2 I)^{-1} (y - m)`.
    pub fn weights(&self) -> &[f64] {
        self.weights.as_slice()
    }

    /// Lower-triangular factor of `K + (sigma^2 + jitter) I`.
    pub fn cholesky_factor(&self) -> DMatrix<f64> {
        self.chol.l()
    }

    /// The matrix that was factorized, jitter included.
    pub fn factored_gram(&self) -> DMatrix<f64> {
        let mut k = gram(&self.spec, &self.standardized_x(), self.noise_var)
            .expect("spec validated at fit time");
        for i in 0..k.nrows() {
            k[(i, i)] += self.jitter;
        }
        k
    }

    pub fn inverse_gram(&self) -> DMatrix<f64> {
        self.chol.inverse()
    }

    fn cross(&self, x: f64) -> DVector<f64> {
        let xs = self.standardizer.apply(x);
        DVector::from_iterator(
            self.len(),
            self.train_x
                .iter()
                .map(|&t| self.spec.eval(xs, self.standardizer.apply(t))),
        )
    }

    /// Posterior mean and variance at `x`, with the 95% interval.
    pub fn predict(&self, x: f64) -> Prediction {
        let ks = self.cross(x);
        let mean = ks.dot(&self.weights) + self.mean_const;
        let v = self.chol.l().solve_lower_triangular(&ks).expect("factor has a positive diagonal");
        let raw = self.spec.prior_variance() - v.dot(&v);
        let clamped = raw < 0.0;
        let variance = raw.max(0.0);
        let half = 1.96 * variance.sqrt();
        Prediction {
            mean,
            variance,
            interval95: (mean - half, mean + half),
            clamped,
        }
    }

    /// Predictions at several inputs and the number of clamped variances.
    pub fn predict_many(&self, xs: &[f64]) -> (Vec<Prediction>, usize) {
        let preds: Vec<Prediction> = xs.iter().map(|&x| self.predict(x)).collect();
        let clamps = preds.iter().filter(|p| p.clamped).count();
        (preds, clamps)
    }

    /// Joint posterior mean and covariance at `xs`.
    pub fn predict_joint(&self, xs: &[f64]) -> (DVector<f64>, DMatrix<f64>) {
        let m = xs.len();
        let l = self.chol.l();
        let mut ks = DMatrix::zeros(self.len(), m);
        for (j, &x) in xs.iter().enumerate() {
            ks.set_column(j, &self.cross(x));
        }
        let mean = ks.transpose() * &self.weights
            + DVector::from_element(m, self.mean_const);
        let v = l.solve_lower_triangular(&ks).expect("factor has a positive diagonal");
        let mut cov = DMatrix::zeros(m, m);
        for i in 0..m {
            for j in 0..m {
                let a = self.standardizer.apply(xs[i]);
                let b = self.standardizer.apply(xs[j]);
                cov[(i, j)] = self.spec.eval(a, b);
            }
        }
        cov -= v.transpose() * v;
        (mean, cov)
    }

    /// `-1/2 r^T C^{-1} r - 1/2 log|C| - n/2 log 2 pi` with `r = y - m`.
    pub fn log_marginal_likelihood(&self) -> f64 {
        let n = self.len() as f64;
        let quad: f64 = self
            .train_y
            .iter()
            .zip(self.weights.iter())
            .map(|(y, w)| (y - self.mean_const) * w)
            .sum();
        let logdet: f64 = 2.0 * self.chol.l_dirty().diagonal().iter().map(|d| d.ln()).sum::<f64>();
        -0.5 * quad - 0.5 * logdet - 0.5 * n * (2.0 * std::f64::consts::PI).ln()
    }

    /// Number of trained log-parameters (hyperparameters plus coefficients).
    pub fn num_trained_params(&self) -> usize {
        self.spec.num_params()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&ModelFile::from(self))?)
    }

    /// Rebuilds a model from [`to_json`](Self::to_json) output by refitting
    /// with the stored hyperparameters and standardization.
    pub fn from_json(s: &str) -> Result<Self> {
        let f: ModelFile = serde_json::from_str(s)?;
        Self::fit_with(&f.train_x, &f.train_y, &f.spec, f.noise_var, f.standardizer)
    }
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    spec: KernelSpec,
    noise_var: f64,
    standardizer: Standardizer,
    mean_const: f64,
    train_x: Vec<f64>,
    train_y: Vec<f64>,
}

impl From<&GprModel> for ModelFile {
    fn from(m: &GprModel) -> Self {
        Self {
            spec: m.spec.clone(),
            noise_var: m.noise_var,
            standardizer: m.standardizer,
            mean_const: m.mean_const,
            train_x: m.train_x.clone(),
            train_y: m.train_y.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gpr::BaseKernel;

    #[test]
    fn one_pair_weight_is_scalar_solve() {
        let spec = KernelSpec::single(BaseKernel::Gaussian, 1.0);
        let m = GprModel::fit(&[3.0], &[0.4], &spec, 1e-4).unwrap();
        assert!((m.weights()[0] - 0.4 / (1.0 + 1e-4)).abs() < 1e-15);
    }

    #[test]
    fn duplicate_inputs_factor_with_noise() {
        let spec = KernelSpec::single(BaseKernel::Gaussian, 1.0);
        let m = GprModel::fit(&[1.0, 1.0, 2.0], &[0.1, 0.1, 0.2], &spec, 1e-8).unwrap();
        assert!(m.log_marginal_likelihood().is_finite());
    }

    #[test]
    fn json_round_trip_preserves_predictions() {
        let spec: KernelSpec = "gaussian+laplacian".parse().unwrap();
        let x = [64.0, 80.0, 96.0, 112.0];
        let y = [0.25, 0.3, 0.28, 0.33];
        let m = GprModel::fit(&x, &y, &spec, 1e-8).unwrap();
        let back = GprModel::from_json(&m.to_json().unwrap()).unwrap();
        assert_eq!(m.predict(100.0), back.predict(100.0));
    }

    #[test]
    fn singular_without_noise_uses_jitter() {
        let spec = KernelSpec::single(BaseKernel::Gaussian, 1.0);
        let m = GprModel::fit(&[0.0, 0.0], &[1.0, 1.0], &spec, 0.0).unwrap();
        assert!(m.jitter > 0.0 && m.jitter <= 1e-6);
    }
}
