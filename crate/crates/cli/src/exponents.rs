//! The scaling-dimension calculator behind `qgt exponents`.

use qgt_core::scaling::{
    cosine_dimension, luttinger_parameter, predicted_critical_fss, predicted_offcritical, Extensivity, ScalingInput,
};

use crate::settings::{KeySpec, Settings};
use crate::{CliError, Result};

/// Separates the marginal `4K = 2` case from numerical noise.
const MARGINAL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExponentQuery {
    pub input: ScalingInput,
    /// XXZ anisotropy, adding the Luttinger-liquid lines.
    pub xxz_lambda: Option<f64>,
}

impl ExponentQuery {
    pub const KEYS: &'static [KeySpec] = &[
        ("preset", None),
        ("lambda", None),
        ("d", None),
        ("zeta", None),
        ("dim-mu", None),
        ("dim-nu", None),
        ("dim-lambda", None),
    ];

    /// A preset (`xxz`, `quasi-free`) or explicit dimensions; any explicit
    /// value overrides the preset's.
    pub fn from_settings(settings: &Settings) -> Result<Self> {
        let lambda: Option<f64> = settings.parse_opt("lambda")?;
        let preset = match (settings.get("preset"), lambda) {
            (Some("xxz"), _) | (None, Some(_)) => Some(ScalingInput::xxz()),
            (Some("quasi-free"), None) => Some(ScalingInput::quasi_free()),
            (Some("quasi-free"), Some(_)) => return Err(CliError::usage("`lambda` applies to the xxz preset only")),
            (Some(other), _) => return Err(CliError::usage(format!("unknown preset `{other}` (xxz, quasi-free)"))),
            (None, None) => None,
        };
        let pick = |key: &str, from_preset: Option<f64>| -> Result<f64> {
            match (settings.parse_opt::<f64>(key)?, from_preset) {
                (Some(v), _) | (None, Some(v)) => Ok(v),
                (None, None) => Err(CliError::usage(format!("missing `{key}` (or pass a preset)"))),
            }
        };
        let input = ScalingInput::new(
            pick("d", preset.map(|p| p.dimension))?,
            pick("zeta", preset.map(|p| p.dynamical))?,
            pick("dim-mu", preset.map(|p| p.dim_mu))?,
            pick("dim-nu", preset.map(|p| p.dim_nu))?,
            settings.parse_opt("dim-lambda")?.or(preset.and_then(|p| p.driving)),
        )?;
        Ok(ExponentQuery { input, xxz_lambda: lambda })
    }
}

/// Rounds to 12 significant digits so exact rationals print exactly.
pub fn fmt_number(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    let rounded: f64 = format!("{x:.11e}").parse().unwrap_or(x);
    if rounded == 0.0 {
        "0".to_string()
    } else {
        rounded.to_string()
    }
}

fn power_of_l(exponent: f64) -> String {
    match fmt_number(exponent).as_str() {
        "0" => "L^0".to_string(),
        e => format!("L^{e}"),
    }
}

pub fn report(query: &ExponentQuery) -> Result<String> {
    let input = &query.input;
    let critical = predicted_critical_fss(input);
    let mut lines = vec![
        format!("d = {}", fmt_number(input.dimension)),
        format!("zeta = {}", fmt_number(input.dynamical)),
        format!("Delta_mu = {}", fmt_number(input.dim_mu)),
        format!("Delta_nu = {}", fmt_number(input.dim_nu)),
        format!("Delta_Q = {}", fmt_number(critical.tensor_dimension)),
        format!("critical scaling: q_sing ~ {} ({})", power_of_l(critical.size_exponent), critical.class),
        format!("super-extensive condition d + 2 zeta - Delta_mu - Delta_nu > 0: {}", critical.super_extensive_condition),
    ];
    match input.driving {
        Some(_) => {
            let off = predicted_offcritical(input)?;
            let kind = if off.divergent {
                "divergent"
            } else if fmt_number(off.exponent) == "0" {
                "marginal"
            } else {
                "finite"
            };
            lines.push(format!("off-critical: q_sing ~ |lambda - lambda_c|^{} ({kind})", fmt_number(off.exponent)));
        }
        None => lines.push("off-critical: exponent undefined without Delta_lambda".to_string()),
    }
    if critical.class == Extensivity::SuperExtensive {
        lines.push(format!("total Q ~ {}", power_of_l(1.0 + critical.size_exponent)));
    }
    if let Some(lambda) = query.xxz_lambda {
        let k = luttinger_parameter(lambda)?;
        let cos_dim = cosine_dimension(lambda)?;
        let relevance = if (cos_dim - 2.0).abs() <= MARGINAL_TOL {
            "marginal"
        } else if cos_dim > 2.0 {
            "irrelevant"
        } else {
            "relevant"
        };
        lines.push(format!("lambda = {}", fmt_number(lambda)));
        lines.push(format!("K = {}", fmt_number(k)));
        lines.push("Delta_V = 2 (marginal term)".to_string());
        lines.push(format!("Delta_V2 = 4K = {} ({relevance})", fmt_number(cos_dim)));
        let form = if relevance == "marginal" {
            "q = A1 + A2 L^-1 + A3 /(L ln L) (logarithmic corrections)".to_string()
        } else {
            format!("q = A1 + A2 L^-1 + A3 {}", power_of_l(3.0 - 2.0 * cos_dim))
        };
        lines.push(format!("fit form: {form}"));
    } else if critical.class == Extensivity::SubExtensive {
        lines.push(format!("fit form: q = A1 + A2 {}", power_of_l(critical.size_exponent)));
    }
    let mut text = lines.join("\n");
    text.push('\n');
    Ok(text)
}
