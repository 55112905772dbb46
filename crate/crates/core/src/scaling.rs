//! Scaling relations for the QGT near criticality and the finite-size fits
//! used to test them.
//!
//! With perturbations of scaling dimensions `Δ_μ, Δ_ν`, dynamical exponent
//! `ζ` and spatial dimension `d`, the tensor carries dimension
//! `Δ_Q = Δ_μ + Δ_ν − 2ζ − d`. Away from the critical point the singular
//! part of `q = Q/L^d` goes as `|λ − λ_c|^{Δ_Q/Δ_λ}`; at the critical point
//! the only scale is `L` and `q ~ L^{−Δ_Q}`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use ndarray::Array2;

use crate::dense::least_squares;
use crate::error::{Error, Result};

/// XXZ correlation length at `λ = 2`, in lattice units. Only three digits
/// are known; the value is truncated, not rounded.
pub const XXZ_CORRELATION_LENGTH_AT_2: f64 = 8.35;

/// Default minimum chain length for massive-regime fits.
pub const MASSIVE_MIN_SITES: usize = 14;

/// Fits with a design-matrix condition number above this are rejected.
pub const MAX_CONDITION: f64 = 1e12;

const MARGINAL_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingInput {
    /// Spatial dimension `d ≥ 1`.
    pub dimension: f64,
    /// Dynamical exponent `ζ > 0`.
    pub dynamical: f64,
    pub dim_mu: f64,
    pub dim_nu: f64,
    /// Scaling dimension of the driving parameter, `1/ν` with `ν` the
    /// correlation-length exponent.
    pub driving: Option<f64>,
}

impl ScalingInput {
    pub fn new(dimension: f64, dynamical: f64, dim_mu: f64, dim_nu: f64, driving: Option<f64>) -> Result<Self> {
        let all = [Some(dimension), Some(dynamical), Some(dim_mu), Some(dim_nu), driving];
        if all.iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::BadData("scaling inputs must be finite".into()));
        }
        if dimension < 1.0 {
            return Err(Error::OutOfDomain { value: dimension, domain: "d >= 1" });
        }
        if dynamical <= 0.0 {
            return Err(Error::OutOfDomain { value: dynamical, domain: "zeta > 0" });
        }
        Ok(ScalingInput { dimension, dynamical, dim_mu, dim_nu, driving })
    }

    /// Both derivatives of `H` couple to one operator of dimension `dim`.
    pub fn diagonal(dimension: f64, dynamical: f64, dim: f64, driving: Option<f64>) -> Result<Self> {
        ScalingInput::new(dimension, dynamical, dim, dim, driving)
    }

    /// Gapless XXZ chain driven by the anisotropy: a marginal `Δ_V = 2`
    /// operator, `ζ = 1`, `d = 1`. The driving dimension is left unset.
    pub fn xxz() -> Self {
        ScalingInput { dimension: 1.0, dynamical: 1.0, dim_mu: 2.0, dim_nu: 2.0, driving: None }
    }

    /// Quasi-free fermion criticality (e.g. the transverse-field Ising
    /// chain): `Δ_V = 1`, `ζ = 1`, `d = 1`, `Δ_λ = 1`.
    pub fn quasi_free() -> Self {
        ScalingInput { dimension: 1.0, dynamical: 1.0, dim_mu: 1.0, dim_nu: 1.0, driving: Some(1.0) }
    }
}

/// `Δ_Q = Δ_μ + Δ_ν − 2ζ − d`.
pub fn tensor_dimension(input: &ScalingInput) -> f64 {
    input.dim_mu + input.dim_nu - 2.0 * input.dynamical - input.dimension
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OffCriticalPrediction {
    /// `Δ_Q / Δ_λ`.
    pub exponent: f64,
    pub divergent: bool,
}

impl OffCriticalPrediction {
    /// `|λ − λ_c|^{exponent}`, up to an amplitude.
    pub fn singular_part(&self, lambda: f64, critical: f64) -> f64 {
        (lambda - critical).abs().powf(self.exponent)
    }
}

pub fn predicted_offcritical(input: &ScalingInput) -> Result<OffCriticalPrediction> {
    let driving = input.driving.filter(|d| *d != 0.0).ok_or(Error::UndefinedExponent)?;
    let exponent = tensor_dimension(input) / driving;
    Ok(OffCriticalPrediction { exponent, divergent: exponent < 0.0 })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Extensivity {
    SuperExtensive,
    Extensive,
    SubExtensive,
}

impl Extensivity {
    pub fn name(self) -> &'static str {
        match self {
            Extensivity::SuperExtensive => "super-extensive",
            Extensivity::Extensive => "extensive",
            Extensivity::SubExtensive => "sub-extensive",
        }
    }
}

impl fmt::Display for Extensivity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriticalPrediction {
    pub tensor_dimension: f64,
    /// `q_sing ~ L^{size_exponent}` with `size_exponent = −Δ_Q`.
    pub size_exponent: f64,
    pub class: Extensivity,
    /// `d + 2ζ − Δ_μ − Δ_ν > 0`; for `Δ_μ = Δ_ν = Δ_V` this is
    /// `d + 2ζ − 2Δ_V > 0`.
    pub super_extensive_condition: bool,
}

pub fn predicted_critical_fss(input: &ScalingInput) -> CriticalPrediction {
    let dq = tensor_dimension(input);
    let class = if dq.abs() <= MARGINAL_TOL {
        Extensivity::Extensive
    } else if dq < 0.0 {
        Extensivity::SuperExtensive
    } else {
        Extensivity::SubExtensive
    };
    let margin = input.dimension + 2.0 * input.dynamical - input.dim_mu - input.dim_nu;
    CriticalPrediction {
        tensor_dimension: dq,
        size_exponent: if dq == 0.0 { 0.0 } else { -dq },
        class,
        super_extensive_condition: margin > MARGINAL_TOL,
    }
}

/// Luttinger parameter of the XXZ chain, `K = (π/2) / (π − arccos λ)` on
/// `λ ∈ (−1, 1]`. The umklapp cosine has dimension `4K`.
pub fn luttinger_parameter(lambda: f64) -> Result<f64> {
    if !(lambda > -1.0 && lambda <= 1.0) {
        return Err(Error::OutOfDomain { value: lambda, domain: "(-1, 1]" });
    }
    Ok(0.5 * PI / (PI - lambda.acos()))
}

/// `4K(λ)`.
pub fn cosine_dimension(lambda: f64) -> Result<f64> {
    Ok(4.0 * luttinger_parameter(lambda)?)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FitModel {
    /// `A_1 + A_2/L`.
    Gapless,
    /// `A_1 + A_2/L + A_3 L^{3 − 2Δ}` with `Δ` the irrelevant-operator
    /// dimension.
    GaplessWithIrrelevant { irrelevant_dimension: f64 },
    /// `A_1 + A_2/L + A_3/(L ln L)`.
    Logarithmic,
    /// `A_1 + A_2 e^{−L/ξ} L^{−1/2}`.
    Massive { correlation_length: f64 },
}

impl FitModel {
    pub fn name(&self) -> &'static str {
        match self {
            FitModel::Gapless => "gapless",
            FitModel::GaplessWithIrrelevant { .. } => "gapless-irrelevant",
            FitModel::Logarithmic => "logarithmic",
            FitModel::Massive { .. } => "massive",
        }
    }

    pub fn num_coefficients(&self) -> usize {
        match self {
            FitModel::Gapless | FitModel::Massive { .. } => 2,
            FitModel::GaplessWithIrrelevant { .. } | FitModel::Logarithmic => 3,
        }
    }

    /// Minimum `L` applied when the caller gives none.
    pub fn default_min_sites(&self) -> usize {
        match self {
            FitModel::Massive { .. } => MASSIVE_MIN_SITES,
            _ => 0,
        }
    }

    /// The fixed nonlinear input, if any: `Δ` or `ξ`.
    pub fn fixed_parameter(&self) -> Option<f64> {
        match *self {
            FitModel::GaplessWithIrrelevant { irrelevant_dimension } => Some(irrelevant_dimension),
            FitModel::Massive { correlation_length } => Some(correlation_length),
            _ => None,
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            FitModel::GaplessWithIrrelevant { irrelevant_dimension } if !irrelevant_dimension.is_finite() => {
                Err(Error::BadData("irrelevant dimension must be finite".into()))
            }
            FitModel::Massive { correlation_length } if !(correlation_length > 0.0 && correlation_length.is_finite()) => {
                Err(Error::OutOfDomain { value: correlation_length, domain: "correlation length > 0" })
            }
            _ => Ok(()),
        }
    }

    /// Basis functions evaluated at `L`.
    pub fn basis(&self, sites: f64) -> Vec<f64> {
        match *self {
            FitModel::Gapless => vec![1.0, 1.0 / sites],
            FitModel::GaplessWithIrrelevant { irrelevant_dimension } => {
                vec![1.0, 1.0 / sites, sites.powf(3.0 - 2.0 * irrelevant_dimension)]
            }
            FitModel::Logarithmic => vec![1.0, 1.0 / sites, 1.0 / (sites * sites.ln())],
            FitModel::Massive { correlation_length } => {
                vec![1.0, (-sites / correlation_length).exp() / sites.sqrt()]
            }
        }
    }
}

impl FromStr for FitModel {
    type Err = Error;

    /// Parses the parameter-free names; `gapless-irrelevant` and `massive`
    /// get their fixed input from the caller via [`FitModel::with_fixed`].
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gapless" => Ok(FitModel::Gapless),
            "gapless-irrelevant" | "irrelevant" => Ok(FitModel::GaplessWithIrrelevant { irrelevant_dimension: f64::NAN }),
            "logarithmic" | "log" => Ok(FitModel::Logarithmic),
            "massive" => Ok(FitModel::Massive { correlation_length: XXZ_CORRELATION_LENGTH_AT_2 }),
            other => Err(Error::BadData(format!("unknown fit model {other:?}"))),
        }
    }
}

impl FitModel {
    pub fn with_fixed(self, value: f64) -> Self {
        match self {
            FitModel::GaplessWithIrrelevant { .. } => FitModel::GaplessWithIrrelevant { irrelevant_dimension: value },
            FitModel::Massive { .. } => FitModel::Massive { correlation_length: value },
            other => other,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingFit {
    pub model: FitModel,
    /// `A_1, A_2[, A_3]`.
    pub coefficients: Vec<f64>,
    /// Empty when the fit has no residual degrees of freedom.
    pub standard_errors: Vec<f64>,
    pub rss: f64,
    pub r_squared: f64,
    pub condition: f64,
    /// Chain lengths used after the minimum-`L` filter.
    pub sites: Vec<usize>,
    /// `data − model` at each used point.
    pub residuals: Vec<f64>,
    pub min_sites: usize,
}

impl ScalingFit {
    pub fn evaluate(&self, sites: f64) -> f64 {
        self.model.basis(sites).iter().zip(&self.coefficients).map(|(b, a)| a * b).sum()
    }
}

/// Linear least-squares fit of `(L, q)` data with the model's fixed
/// exponents. Points with `L < min_sites` (model default when `None`) are
/// dropped first.
pub fn fit_fss(data: &[(usize, f64)], model: FitModel, min_sites: Option<usize>) -> Result<ScalingFit> {
    model.validate()?;
    let min_sites = min_sites.unwrap_or_else(|| model.default_min_sites());
    let used: Vec<(usize, f64)> = data.iter().copied().filter(|(l, _)| *l >= min_sites).collect();
    let p = model.num_coefficients();
    if used.len() <= p {
        return Err(Error::BadData(format!(
            "{} fit needs more than {p} points with L >= {min_sites}, got {}",
            model.name(),
            used.len()
        )));
    }
    if let Some((l, q)) = used.iter().find(|(l, q)| *l < 2 || !q.is_finite()) {
        return Err(Error::BadData(format!("invalid data point (L = {l}, q = {q})")));
    }

    let design = Array2::from_shape_fn((used.len(), p), |(i, j)| model.basis(used[i].0 as f64)[j]);
    let values: Vec<f64> = used.iter().map(|(_, q)| *q).collect();
    let ls = least_squares(&design, &values)?;
    if !(ls.condition <= MAX_CONDITION) {
        return Err(Error::IllConditionedFit { condition: ls.condition });
    }

    let residuals: Vec<f64> = used
        .iter()
        .enumerate()
        .map(|(i, (_, q))| q - (0..p).map(|j| design[[i, j]] * ls.solution[j]).sum::<f64>())
        .collect();
    let rss: f64 = residuals.iter().map(|r| r * r).sum();
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    let tss: f64 = values.iter().map(|q| (q - mean).powi(2)).sum();
    let r_squared = if tss > 0.0 { 1.0 - rss / tss } else { 1.0 };
    let dof = used.len() - p;
    let sigma2 = rss / dof as f64;
    let standard_errors = ls.inverse_gram_diagonal.iter().map(|d| (sigma2 * d).sqrt()).collect();

    Ok(ScalingFit {
        model,
        coefficients: ls.solution,
        standard_errors,
        rss,
        r_squared,
        condition: ls.condition,
        sites: used.iter().map(|(l, _)| *l).collect(),
        residuals,
        min_sites,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlopeFit {
    pub slope: f64,
    pub slope_error: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Ordinary least squares of `ln Q` against `ln L`.
pub fn extract_slope(data: &[(f64, f64)]) -> Result<SlopeFit> {
    if data.len() < 3 {
        return Err(Error::BadData(format!("slope needs at least 3 points, got {}", data.len())));
    }
    if let Some((l, q)) = data.iter().find(|(l, q)| !(*l > 0.0 && *q > 0.0) || !q.is_finite()) {
        return Err(Error::BadData(format!("log-log slope needs positive data, got (L = {l}, Q = {q})")));
    }
    let design = Array2::from_shape_fn((data.len(), 2), |(i, j)| if j == 0 { 1.0 } else { data[i].0.ln() });
    let y: Vec<f64> = data.iter().map(|(_, q)| q.ln()).collect();
    let ls = least_squares(&design, &y)?;
    if !(ls.condition <= MAX_CONDITION) {
        return Err(Error::IllConditionedFit { condition: ls.condition });
    }
    let rss: f64 = (0..data.len())
        .map(|i| (y[i] - ls.solution[0] - ls.solution[1] * design[[i, 1]]).powi(2))
        .sum();
    let mean = y.iter().sum::<f64>() / y.len() as f64;
    let tss: f64 = y.iter().map(|v| (v - mean).powi(2)).sum();
    let sigma2 = rss / (data.len() - 2) as f64;
    Ok(SlopeFit {
        slope: ls.solution[1],
        slope_error: (sigma2 * ls.inverse_gram_diagonal[1]).sqrt(),
        intercept: ls.solution[0],
        r_squared: if tss > 0.0 { 1.0 - rss / tss } else { 1.0 },
    })
}
