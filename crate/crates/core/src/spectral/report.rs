//! Localization diagnostics and the embedded-eigenvalue verdict.

use serde::{Deserialize, Serialize};

use crate::io::sig17;

use super::eigen::SymmetricEigen;

/// Thresholds for calling an eigenpair an embedded candidate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmbeddingCriteria {
    /// Largest accepted `|nearest − target|`.
    pub tolerance: f64,
    /// A vector is localized when `ipr ≥ localization_factor / n`.
    pub localization_factor: f64,
    /// Non-localized eigenvalues required on each side of the candidate.
    pub min_continuum_neighbors: usize,
}

impl Default for EmbeddingCriteria {
    fn default() -> Self {
        Self {
            tolerance: 1e-2,
            localization_factor: 10.0,
            min_continuum_neighbors: 10,
        }
    }
}

impl EmbeddingCriteria {
    pub fn with_tolerance(tolerance: f64) -> Self {
        Self {
            tolerance,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    EmbeddedCandidate,
    NotFound,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralReport {
    #[serde(with = "sig17::vec")]
    pub eigenvalues: Vec<f64>,
    #[serde(with = "sig17")]
    pub target: f64,
    #[serde(with = "sig17")]
    pub nearest: f64,
    /// `|nearest − target|`.
    #[serde(with = "sig17")]
    pub gap: f64,
    #[serde(with = "sig17")]
    pub ipr: f64,
    #[serde(with = "sig17")]
    pub median_ipr: f64,
    #[serde(with = "sig17")]
    pub ipr_threshold: f64,
    /// Tail decay rate fitted to the nearest eigenvector.
    #[serde(with = "sig17")]
    pub decay_fit: f64,
    #[serde(with = "sig17")]
    pub expected_decay: f64,
    pub continuum_below: usize,
    pub continuum_above: usize,
    /// Set when a non-localized eigenvalue sits within 10× the gap of `nearest`.
    pub near_crossing: bool,
    pub verdict: Verdict,
}

/// `Σ v_i⁴ / (Σ v_i²)²`.
pub fn inverse_participation_ratio(v: &[f64]) -> f64 {
    let s2: f64 = v.iter().map(|x| x * x).sum();
    let s4: f64 = v.iter().map(|x| x.powi(4)).sum();
    s4 / (s2 * s2)
}

/// Decay rate of `|v|` fitted on `0.4X ≤ |x| ≤ 0.8X`, averaged over both sides.
pub fn tail_decay_rate(grid: &[f64], v: &[f64]) -> f64 {
    let half = grid.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let fit = |sign: f64| {
        let pts: Vec<(f64, f64)> = grid
            .iter()
            .zip(v)
            .filter(|(x, val)| {
                let t = sign * **x;
                t >= 0.4 * half && t <= 0.8 * half && **val != 0.0
            })
            .map(|(x, val)| (sign * x, val.abs().ln()))
            .collect();
        if pts.len() < 2 {
            return f64::NAN;
        }
        let n = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
        let sxy: f64 = pts.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
        let sxx: f64 = pts.iter().map(|(x, _)| (x - mx).powi(2)).sum();
        -sxy / sxx
    };
    0.5 * (fit(1.0) + fit(-1.0))
}

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        0.5 * (xs[n / 2 - 1] + xs[n / 2])
    }
}

/// Finds the eigenvalue nearest `target` and decides whether it is a
/// localized state surrounded by non-localized ones.
pub fn detect_embedded(
    eig: &SymmetricEigen,
    grid: &[f64],
    target: f64,
    decay_rate: f64,
    criteria: &EmbeddingCriteria,
) -> SpectralReport {
    let n = eig.len();
    let iprs: Vec<f64> = (0..n)
        .map(|i| inverse_participation_ratio(eig.vector(i)))
        .collect();
    let threshold = criteria.localization_factor / n as f64;
    let idx = (0..n)
        .min_by(|&a, &b| {
            (eig.values[a] - target)
                .abs()
                .total_cmp(&(eig.values[b] - target).abs())
        })
        .unwrap_or(0);
    let nearest = eig.values.get(idx).copied().unwrap_or(f64::NAN);
    let gap = (nearest - target).abs();
    let extended = |i: usize| iprs[i] < threshold;
    let continuum_below = (0..idx).filter(|&i| extended(i)).count();
    let continuum_above = (idx + 1..n).filter(|&i| extended(i)).count();
    let closest_continuum = (0..n)
        .filter(|&i| i != idx && extended(i))
        .map(|i| (eig.values[i] - nearest).abs())
        .fold(f64::INFINITY, f64::min);
    let ipr = iprs.get(idx).copied().unwrap_or(0.0);
    let decay_fit = if n > 0 {
        tail_decay_rate(grid, eig.vector(idx))
    } else {
        f64::NAN
    };
    let verdict = if gap < criteria.tolerance
        && ipr >= threshold
        && continuum_below >= criteria.min_continuum_neighbors
        && continuum_above >= criteria.min_continuum_neighbors
    {
        Verdict::EmbeddedCandidate
    } else {
        Verdict::NotFound
    };
    SpectralReport {
        eigenvalues: eig.values.clone(),
        target,
        nearest,
        gap,
        ipr,
        median_ipr: median(iprs),
        ipr_threshold: threshold,
        decay_fit,
        expected_decay: decay_rate,
        continuum_below,
        continuum_above,
        near_crossing: closest_continuum < 10.0 * gap,
        verdict,
    }
}
