//! One-sided limits `λ → 0⁺` of difference quotients via Richardson
//! extrapolation.

use serde::Serialize;

use crate::{Error, Result};

/// Maximum number of extrapolation columns.
const MAX_COLUMNS: usize = 6;

/// `λ_k = 2^{-k}`, `k = 3..=20`.
pub fn default_lambdas() -> Vec<f64> {
    (3..=20).map(|k| 0.5f64.powi(k)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LimitEstimate {
    pub value: f64,
    /// Difference between the chosen tableau entry and its neighbours.
    pub error: f64,
    /// Observed convergence order of the raw quotients, when measurable.
    pub order: Option<f64>,
    /// The last raw quotient (smallest λ).
    pub last_quotient: f64,
}

/// Extrapolates `values[k] ≈ L + c₁λ_k + c₂λ_k² + …` to `λ = 0`.
pub fn extrapolate(lambdas: &[f64], values: &[f64]) -> Result<LimitEstimate> {
    if lambdas.len() != values.len() || lambdas.len() < 2 {
        return Err(Error::InvalidArgument(
            "limit needs at least two (λ, value) pairs".into(),
        ));
    }
    if lambdas.iter().any(|&l| !(l > 0.0)) || lambdas.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidArgument(
            "λ sequence must be positive and strictly decreasing".into(),
        ));
    }
    if let Some(v) = values.iter().find(|v| !v.is_finite()) {
        return Err(Error::Divergent(format!("non-finite difference quotient {v}")));
    }
    let n = values.len();
    let last = values[n - 1];
    let first_step = (values[1] - values[0]).abs();
    let last_step = (values[n - 1] - values[n - 2]).abs();
    if last_step > first_step.max(1e-8 * (1.0 + last.abs())) {
        return Err(Error::Divergent(format!(
            "quotient increments grow from {first_step:e} to {last_step:e}"
        )));
    }

    // Neville tableau, one row per λ; pick the entry with the smallest
    // neighbour discrepancy.
    let mut best = LimitEstimate {
        value: last,
        error: last_step,
        order: None,
        last_quotient: last,
    };
    let mut prev: Vec<f64> = Vec::new();
    for i in 0..n {
        let mut row = vec![values[i]];
        for j in 1..=i.min(MAX_COLUMNS - 1) {
            let ratio = lambdas[i - j] / lambdas[i];
            let v = row[j - 1] + (row[j - 1] - prev[j - 1]) / (ratio - 1.0);
            let err = (v - row[j - 1]).abs().max((v - prev[j - 1]).abs());
            row.push(v);
            if err < best.error {
                best.value = v;
                best.error = err;
            }
        }
        prev = row;
    }
    best.order = observed_order(lambdas, values);
    Ok(best)
}

fn observed_order(lambdas: &[f64], values: &[f64]) -> Option<f64> {
    // Use the first triple whose increments are well above rounding noise.
    let scale = 1.0 + values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    values.windows(3).zip(lambdas.windows(3)).find_map(|(v, l)| {
        let d1 = (v[1] - v[0]).abs();
        let d2 = (v[2] - v[1]).abs();
        if d1 > 1e-9 * scale && d2 > 1e-9 * scale {
            Some((d1 / d2).ln() / (l[0] / l[1]).ln())
        } else {
            None
        }
    })
}

/// Evaluates `quotient(λ)` on `lambdas` and extrapolates.
pub fn limit<F>(lambdas: &[f64], mut quotient: F) -> Result<(LimitEstimate, Vec<f64>)>
where
    F: FnMut(f64) -> Result<f64>,
{
    let values = lambdas.iter().map(|&l| quotient(l)).collect::<Result<Vec<_>>>()?;
    Ok((extrapolate(lambdas, &values)?, values))
}
