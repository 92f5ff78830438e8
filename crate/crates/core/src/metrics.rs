//! Error, fit, calibration and model-selection metrics for predicted
//! strong thresholds.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gpr::GprModel;

/// One held-out comparison: sweep-optimal value against the posterior.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalPair {
    pub actual: f64,
    pub predicted: f64,
    pub pred_std: f64,
}

impl EvalPair {
    pub fn new(actual: f64, predicted: f64, pred_std: f64) -> Self {
        Self {
            actual,
            predicted,
            pred_std,
        }
    }
}

/// Neumaier-compensated sum.
fn compensated_sum(values: impl Iterator<Item = f64>) -> f64 {
    let (mut sum, mut c) = (0.0f64, 0.0f64);
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            c += (sum - t) + v;
        } else {
            c += (v - t) + sum;
        }
        sum = t;
    }
    sum + c
}

fn require_nonempty(pairs: &[EvalPair], min: usize) -> Result<()> {
    if pairs.len() < min {
        return Err(Error::InvalidParameter(format!(
            "metric needs at least {min} pair(s), got {}",
            pairs.len()
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorMetrics {
    pub mse: f64,
    pub rmse: f64,
    pub mae: f64,
    /// Absent when some actual value is zero.
    pub mdape: Option<f64>,
}

pub fn mse(pairs: &[EvalPair]) -> Result<f64> {
    require_nonempty(pairs, 1)?;
    let s = compensated_sum(pairs.iter().map(|p| (p.actual - p.predicted).powi(2)));
    Ok(s / pairs.len() as f64)
}

pub fn mae(pairs: &[EvalPair]) -> Result<f64> {
    require_nonempty(pairs, 1)?;
    let s = compensated_sum(pairs.iter().map(|p| (p.actual - p.predicted).abs()));
    Ok(s / pairs.len() as f64)
}

/// Median of `|(y - y_hat) / y|`, lower median for even counts.
pub fn mdape(pairs: &[EvalPair]) -> Result<f64> {
    require_nonempty(pairs, 1)?;
    if pairs.iter().any(|p| p.actual == 0.0) {
        return Err(Error::InvalidParameter(
            "MdAPE is undefined when an actual value is zero".into(),
        ));
    }
    let mut ape: Vec<f64> = pairs
        .iter()
        .map(|p| ((p.actual - p.predicted) / p.actual).abs())
        .collect();
    ape.sort_by(f64::total_cmp);
    Ok(ape[(ape.len() - 1) / 2])
}

pub fn error_metrics(pairs: &[EvalPair]) -> Result<ErrorMetrics> {
    let mse = mse(pairs)?;
    Ok(ErrorMetrics {
        mse,
        rmse: mse.sqrt(),
        mae: mae(pairs)?,
        mdape: mdape(pairs).ok(),
    })
}

fn mean(v: impl Iterator<Item = f64> + Clone) -> f64 {
    let n = v.clone().count() as f64;
    compensated_sum(v) / n
}

/// `1 - SS_res / SS_tot`; may be negative.
pub fn r2(pairs: &[EvalPair]) -> Result<f64> {
    require_nonempty(pairs, 2)?;
    let ybar = mean(pairs.iter().map(|p| p.actual));
    let ss_tot = compensated_sum(pairs.iter().map(|p| (p.actual - ybar).powi(2)));
    if ss_tot == 0.0 {
        return Err(Error::InvalidParameter("R2 is undefined for constant actual values".into()));
    }
    let ss_res = compensated_sum(pairs.iter().map(|p| (p.actual - p.predicted).powi(2)));
    Ok(1.0 - ss_res / ss_tot)
}

/// Pearson correlation between actual and predicted values.
pub fn corr(pairs: &[EvalPair]) -> Result<f64> {
    require_nonempty(pairs, 2)?;
    let ybar = mean(pairs.iter().map(|p| p.actual));
    let pbar = mean(pairs.iter().map(|p| p.predicted));
    let sxy = compensated_sum(pairs.iter().map(|p| (p.actual - ybar) * (p.predicted - pbar)));
    let sxx = compensated_sum(pairs.iter().map(|p| (p.actual - ybar).powi(2)));
    let syy = compensated_sum(pairs.iter().map(|p| (p.predicted - pbar).powi(2)));
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::InvalidParameter(
            "correlation is undefined when either side is constant".into(),
        ));
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

pub fn fit_metrics(pairs: &[EvalPair]) -> (Result<f64>, Result<f64>) {
    (r2(pairs), corr(pairs))
}

/// Fraction of actual values inside the closed interval
/// `[mu - 1.96 sigma, mu + 1.96 sigma]`.
pub fn picp(pairs: &[EvalPair]) -> Result<f64> {
    require_nonempty(pairs, 1)?;
    let hits = pairs
        .iter()
        .filter(|p| {
            let half = 1.96 * p.pred_std;
            p.actual >= p.predicted - half && p.actual <= p.predicted + half
        })
        .count();
    Ok(hits as f64 / pairs.len() as f64)
}

/// `-2 logL + k ln n`.
pub fn bic(log_likelihood: f64, k_params: usize, n_obs: usize) -> Result<f64> {
    if n_obs == 0 {
        return Err(Error::InvalidParameter("BIC needs at least one observation".into()));
    }
    Ok(-2.0 * log_likelihood + k_params as f64 * (n_obs as f64).ln())
}

/// Closed-form leave-one-out squared prediction error,
/// `mean_i ((C^{-1} r)_i / (C^{-1})_ii)^2`.
pub fn loo_spe(model: &GprModel) -> f64 {
    let cinv = model.inverse_gram();
    let w = model.weights();
    let terms = (0..w.len()).map(|i| (w[i] / cinv[(i, i)]).powi(2));
    compensated_sum(terms) / w.len() as f64
}

/// The nine metrics for one kernel combination. Fields are absent when the
/// metric is undefined on the given pairs; `notes` says why.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub kernel: String,
    pub mse: Option<f64>,
    pub rmse: Option<f64>,
    pub mae: Option<f64>,
    pub r2: Option<f64>,
    pub corr: Option<f64>,
    pub mdape: Option<f64>,
    pub picp: Option<f64>,
    pub bic: Option<f64>,
    pub loo_spe: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl MetricsReport {
    pub const CSV_HEADER: [&'static str; 9] =
        ["kernel", "MSE", "RMSE", "MAE", "R2", "BIC", "Corr", "MdAPE", "LOO-SPE"];

    /// Row in `kernel,MSE,RMSE,MAE,R2,BIC,Corr,MdAPE,LOO-SPE` order; absent
    /// metrics are empty cells.
    pub fn csv_row(&self) -> Vec<String> {
        let cell = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        vec![
            self.kernel.clone(),
            cell(self.mse),
            cell(self.rmse),
            cell(self.mae),
            cell(self.r2),
            cell(self.bic),
            cell(self.corr),
            cell(self.mdape),
            cell(self.loo_spe),
        ]
    }

    pub fn picp_row(&self) -> Vec<String> {
        vec![
            self.kernel.clone(),
            self.picp.map(|x| x.to_string()).unwrap_or_default(),
        ]
    }

    pub fn is_complete(&self) -> bool {
        [
            self.mse,
            self.rmse,
            self.mae,
            self.r2,
            self.corr,
            self.mdape,
            self.picp,
            self.bic,
            self.loo_spe,
        ]
        .iter()
        .all(Option::is_some)
    }
}

/// Scores `model` on held-out pairs. BIC uses the model's training
/// likelihood and its number of trained log-parameters.
pub fn evaluate(model: &GprModel, test_pairs: &[EvalPair]) -> MetricsReport {
    let mut notes = Vec::new();
    let mut keep = |name: &str, r: Result<f64>| match r {
        Ok(v) => Some(v),
        Err(e) => {
            notes.push(format!("{name}: {e}"));
            None
        }
    };
    let mse_v = keep("mse", mse(test_pairs));
    let mae_v = keep("mae", mae(test_pairs));
    let mdape_v = keep("mdape", mdape(test_pairs));
    let r2_v = keep("r2", r2(test_pairs));
    let corr_v = keep("corr", corr(test_pairs));
    let picp_v = keep("picp", picp(test_pairs));
    let bic_v = keep(
        "bic",
        bic(model.log_marginal_likelihood(), model.num_trained_params(), model.len()),
    );
    MetricsReport {
        kernel: model.spec.name(),
        mse: mse_v,
        rmse: mse_v.map(f64::sqrt),
        mae: mae_v,
        r2: r2_v,
        corr: corr_v,
        mdape: mdape_v,
        picp: picp_v,
        bic: bic_v,
        loo_spe: Some(loo_spe(model)),
        notes,
    }
}

/// Held-out pairs from posterior predictions at `xs`.
pub fn pairs_from_model(model: &GprModel, xs: &[f64], actual: &[f64]) -> Vec<EvalPair> {
    xs.iter()
        .zip(actual)
        .map(|(&x, &y)| {
            let p = model.predict(x);
            EvalPair::new(y, p.mean, p.std_dev())
        })
        .collect()
}
