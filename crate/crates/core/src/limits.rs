//! Cesàro windows standing in for Banach limits, and the diagnostics showing
//! why `c₀`- and `ℓ¹`-valued extensions of a Banach limit cannot exist.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `x ↦ (1/N) Σ_{k<N} x_k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CesaroFunctional {
    window: usize,
}

impl CesaroFunctional {
    pub fn new(window: usize) -> Result<Self> {
        if window == 0 {
            return Err(Error::Validation("Cesàro window must be at least 1".into()));
        }
        Ok(Self { window })
    }

    pub fn window(&self) -> usize {
        self.window
    }

    pub fn apply(&self, x: &[f64]) -> Result<f64> {
        if x.len() < self.window {
            return Err(Error::Validation(format!(
                "sequence prefix of length {} is shorter than the window {}",
                x.len(),
                self.window
            )));
        }
        Ok(x[..self.window].iter().sum::<f64>() / self.window as f64)
    }

    /// `|Λ(Sx) − Λ(x)|` for the left shift `S`; needs `N + 1` terms.
    pub fn shift_defect(&self, x: &[f64]) -> Result<f64> {
        if x.len() < self.window + 1 {
            return Err(Error::Validation("shift defect needs N + 1 terms".into()));
        }
        Ok((self.apply(&x[1..])? - self.apply(x)?).abs())
    }

    /// `2 sup|x| / N`.
    pub fn shift_defect_bound(&self, x: &[f64]) -> f64 {
        2.0 * x.iter().fold(0.0f64, |m, v| m.max(v.abs())) / self.window as f64
    }

    /// Applies the functional to the indicator of `{k, k+1, …}` without
    /// materializing it.
    fn tail_indicator(&self, k: usize) -> f64 {
        self.window.saturating_sub(k) as f64 / self.window as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct C0Diagnostic {
    pub window: usize,
    pub head: usize,
    /// `Λ_N(1_{{k, k+1, …}})` for `k ≤ K`.
    pub values: Vec<f64>,
    pub min_head: f64,
}

/// The candidate `c₀`-valued extension applied to `f = Σ_k e_k ⊗ e_k`, whose
/// value at `k` is the tail indicator `1_{{k, k+1, …}}`. Its first `K + 1`
/// coordinates all stay near 1, so the output approaches the constant
/// sequence, at distance 1 from `c₀`.
pub fn c0_counterexample(window: usize, head: usize) -> Result<C0Diagnostic> {
    let l = CesaroFunctional::new(window)?;
    if head > window {
        return Err(Error::Validation(format!("K = {head} exceeds N = {window}")));
    }
    let values: Vec<f64> = (0..=head).map(|k| l.tail_indicator(k)).collect();
    let min_head = values.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(C0Diagnostic {
        window,
        head,
        values,
        min_head,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct L1Diagnostic {
    pub window: usize,
    pub head: usize,
    /// `Σ_{k<K} Λ_N(1_{{k}})`
    pub head_mass: f64,
    /// `Λ_N(1)`
    pub total_pairing: f64,
    pub gap: f64,
}

/// For `f(j) = e_j`: pairing the would-be `ℓ¹`-valued output with the
/// constant-one functional should give `Λ(⟨1, f⟩) = Λ(1) = 1`, while the
/// coordinates `Λ(1_{{k}})` sum to only `K/N` over the first `K`.
pub fn l1_counterexample(window: usize, head: usize) -> Result<L1Diagnostic> {
    let l = CesaroFunctional::new(window)?;
    if head > window {
        return Err(Error::Validation(format!("K = {head} exceeds N = {window}")));
    }
    let mut indicator = vec![0.0; window];
    let mut head_mass = 0.0;
    for k in 0..head {
        indicator[k] = 1.0;
        head_mass += l.apply(&indicator)?;
        indicator[k] = 0.0;
    }
    let total_pairing = l.apply(&vec![1.0; window])?;
    Ok(L1Diagnostic {
        window,
        head,
        head_mass,
        total_pairing,
        gap: total_pairing - head_mass,
    })
}
