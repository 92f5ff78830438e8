use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BaseKernel {
    Gaussian,
    Laplacian,
    Exponential,
    #[serde(rename = "rq")]
    RationalQuadratic,
    Matern52,
    Periodic,
}

impl BaseKernel {
    pub const ALL: [BaseKernel; 6] = [
        BaseKernel::Gaussian,
        BaseKernel::Laplacian,
        BaseKernel::Exponential,
        BaseKernel::RationalQuadratic,
        BaseKernel::Matern52,
        BaseKernel::Periodic,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BaseKernel::Gaussian => "gaussian",
            BaseKernel::Laplacian => "laplacian",
            BaseKernel::Exponential => "exponential",
            BaseKernel::RationalQuadratic => "rq",
            BaseKernel::Matern52 => "matern52",
            BaseKernel::Periodic => "periodic",
        }
    }

    /// Number of hyperparameters besides the combination coefficient.
    pub fn num_hyper(self) -> usize {
        match self {
            BaseKernel::RationalQuadratic | BaseKernel::Periodic => 2,
            _ => 1,
        }
    }
}

impl fmt::Display for BaseKernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BaseKernel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.trim().to_ascii_lowercase().as_str() {
            "gaussian" | "rbf" | "se" => BaseKernel::Gaussian,
            "laplacian" => BaseKernel::Laplacian,
            "exponential" | "exp" => BaseKernel::Exponential,
            "rq" | "rationalquadratic" | "rational-quadratic" => BaseKernel::RationalQuadratic,
            "matern52" | "matern" | "matern-5/2" => BaseKernel::Matern52,
            "periodic" => BaseKernel::Periodic,
            other => return Err(Error::Parse(format!("unknown kernel `{other}`"))),
        })
    }
}

/// One base kernel with its hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelTerm {
    pub base: BaseKernel,
    pub length: f64,
    /// Shape `alpha`, rational quadratic only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    /// Period `p`, periodic only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub period: Option<f64>,
}

impl KernelTerm {
    /// A term with unit hyperparameters.
    pub fn new(base: BaseKernel) -> Self {
        Self {
            base,
            length: 1.0,
            alpha: (base == BaseKernel::RationalQuadratic).then_some(1.0),
            period: (base == BaseKernel::Periodic).then_some(1.0),
        }
    }

    fn hyper(&self) -> [f64; 2] {
        match self.base {
            BaseKernel::RationalQuadratic => [self.length, self.alpha.unwrap_or(1.0)],
            BaseKernel::Periodic => [self.length, self.period.unwrap_or(1.0)],
            _ => [self.length, f64::NAN],
        }
    }

    /// Value at distance `r` and, into `grad`, its derivatives with respect
    /// to the log of each hyperparameter.
    fn eval_grad(&self, r: f64, grad: &mut [f64]) -> f64 {
        let [l, q] = self.hyper();
        match self.base {
            BaseKernel::Gaussian => {
                let k = (-r * r / (2.0 * l * l)).exp();
                grad[0] = k * r * r / (l * l);
                k
            }
            BaseKernel::Laplacian | BaseKernel::Exponential => {
                let k = (-r / l).exp();
                grad[0] = k * r / l;
                k
            }
            BaseKernel::RationalQuadratic => {
                let u = r * r / (2.0 * q * l * l);
                let k = (1.0 + u).powf(-q);
                grad[0] = k * (r * r / (l * l)) / (1.0 + u);
                grad[1] = q * k * (u / (1.0 + u) - u.ln_1p());
                k
            }
            BaseKernel::Matern52 => {
                let s = 5f64.sqrt() * r / l;
                let e = (-s).exp();
                grad[0] = s * s / 3.0 * (1.0 + s) * e;
                (1.0 + s + s * s / 3.0) * e
            }
            BaseKernel::Periodic => {
                let phi = PI * r / q;
                let sn = phi.sin();
                let k = (-2.0 * sn * sn / (l * l)).exp();
                grad[0] = k * 4.0 * sn * sn / (l * l);
                grad[1] = k * 2.0 * phi * (2.0 * phi).sin() / (l * l);
                k
            }
        }
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        let mut g = [0.0; 2];
        self.eval_grad((x - y).abs(), &mut g)
    }
}

/// Nonnegative linear combination `sum_xi c_xi k_xi` of base kernels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec {
    pub terms: Vec<KernelTerm>,
    pub coeffs: Vec<f64>,
}

impl KernelSpec {
    /// Unit coefficients and hyperparameters on the given bases.
    pub fn from_bases(bases: &[BaseKernel]) -> Self {
        Self {
            terms: bases.iter().map(|&b| KernelTerm::new(b)).collect(),
            coeffs: vec![1.0; bases.len()],
        }
    }

    pub fn single(base: BaseKernel, length: f64) -> Self {
        let mut s = Self::from_bases(&[base]);
        s.terms[0].length = length;
        s
    }

    /// `gaussian+laplacian` style name.
    pub fn name(&self) -> String {
        self.terms
            .iter()
            .map(|t| t.base.name())
            .collect::<Vec<_>>()
            .join("+")
    }

    pub fn validate(&self) -> Result<()> {
        if self.terms.is_empty() || self.terms.len() != self.coeffs.len() {
            return Err(Error::InvalidParameter(format!(
                "kernel spec needs one coefficient per term ({} terms, {} coefficients)",
                self.terms.len(),
                self.coeffs.len()
            )));
        }
        if self.coeffs.iter().any(|&c| !(c >= 0.0 && c.is_finite())) {
            return Err(Error::InvalidParameter("kernel coefficients must be >= 0".into()));
        }
        if !(self.coeffs.iter().sum::<f64>() > 0.0) {
            return Err(Error::InvalidParameter("kernel coefficients sum to zero".into()));
        }
        for t in &self.terms {
            let [l, q] = t.hyper();
            if !(l > 0.0 && l.is_finite()) || (t.base.num_hyper() == 2 && !(q > 0.0 && q.is_finite())) {
                return Err(Error::InvalidParameter(format!(
                    "{} hyperparameters must be positive",
                    t.base
                )));
            }
        }
        Ok(())
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        self.terms
            .iter()
            .zip(&self.coeffs)
            .map(|(t, &c)| c * t.eval(x, y))
            .sum()
    }

    /// `k(x, x)`, the prior variance.
    pub fn prior_variance(&self) -> f64 {
        self.coeffs.iter().sum()
    }

    /// Length of the log-parameter vector: hyperparameters, then coefficients.
    pub fn num_params(&self) -> usize {
        self.terms.iter().map(|t| t.base.num_hyper()).sum::<usize>() + self.terms.len()
    }

    pub fn log_params(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.num_params());
        for t in &self.terms {
            let h = t.hyper();
            v.extend(h[..t.base.num_hyper()].iter().map(|x| x.ln()));
        }
        v.extend(self.coeffs.iter().map(|c| c.ln()));
        v
    }

    pub fn with_log_params(&self, p: &[f64]) -> Self {
        let mut out = self.clone();
        let mut it = p.iter().map(|x| x.exp());
        for t in &mut out.terms {
            t.length = it.next().unwrap();
            match t.base {
                BaseKernel::RationalQuadratic => t.alpha = it.next(),
                BaseKernel::Periodic => t.period = it.next(),
                _ => {}
            }
        }
        for c in &mut out.coeffs {
            *c = it.next().unwrap();
        }
        out
    }

    /// Box bounds on the log parameters used during training.
    pub fn log_bounds(&self) -> Vec<(f64, f64)> {
        let mut v = Vec::with_capacity(self.num_params());
        for t in &self.terms {
            v.push((1e-2f64.ln(), 1e2f64.ln()));
            match t.base {
                BaseKernel::RationalQuadratic => v.push((1e-2f64.ln(), 1e2f64.ln())),
                BaseKernel::Periodic => v.push((5e-2f64.ln(), 2e1f64.ln())),
                _ => {}
            }
        }
        v.extend(self.terms.iter().map(|_| (1e-10f64.ln(), 1e4f64.ln())));
        v
    }

    /// Multiplies every length and period by `factor`; used when inputs are
    /// re-standardized.
    pub fn rescaled(&self, factor: f64) -> Self {
        let mut out = self.clone();
        for t in &mut out.terms {
            t.length *= factor;
            if let Some(p) = t.period.as_mut() {
                *p *= factor;
            }
        }
        out
    }

    /// Value at `(x, y)` and its gradient with respect to [`log_params`](Self::log_params).
    pub fn eval_with_grad(&self, x: f64, y: f64, grad: &mut [f64]) -> f64 {
        let r = (x - y).abs();
        let nh: usize = self.terms.iter().map(|t| t.base.num_hyper()).sum();
        let mut off = 0;
        let mut total = 0.0;
        let mut g = [0.0; 2];
        for (xi, (t, &c)) in self.terms.iter().zip(&self.coeffs).enumerate() {
            let k = t.eval_grad(r, &mut g);
            let m = t.base.num_hyper();
            for j in 0..m {
                grad[off + j] = c * g[j];
            }
            off += m;
            grad[nh + xi] = c * k;
            total += c * k;
        }
        total
    }
}

impl fmt::Display for KernelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl FromStr for KernelSpec {
    type Err = Error;

    /// Parses `gaussian+laplacian`; every term starts at unit hyperparameters.
    fn from_str(s: &str) -> Result<Self> {
        let bases = s
            .split('+')
            .map(str::parse)
            .collect::<Result<Vec<BaseKernel>>>()?;
        Ok(Self::from_bases(&bases))
    }
}

/// `sum_xi c_xi k_xi(x, y)` for a validated spec.
pub fn kernel_eval(spec: &KernelSpec, x: f64, y: f64) -> Result<f64> {
    spec.validate()?;
    Ok(spec.eval(x, y))
}
