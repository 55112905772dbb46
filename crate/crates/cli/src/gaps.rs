//! `ε_1` tables: the lowest excitation above the ground state, over all
//! magnetization sectors for XXZ.

use std::path::PathBuf;

use qgt_core::{gap, SolverOptions};

use crate::grid::{grid_points, parse_grid};
use crate::settings::{KeySpec, Settings};
use crate::sweep::{canonical_order, solver_options, ModelConfig, MODEL_KEYS, SOLVER_KEYS};
use crate::table::{fmt_real, Table, GAP_SCHEMA};
use crate::{CliError, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct GapPlan {
    pub model: ModelConfig,
    pub sizes: Vec<usize>,
    pub axes: Vec<Vec<f64>>,
    pub out: Option<PathBuf>,
    pub solver: SolverOptions,
}

impl GapPlan {
    pub fn keys() -> Vec<KeySpec> {
        let own: &[KeySpec] = &[("L", None), ("lambda", None), ("out", None)];
        [MODEL_KEYS, SOLVER_KEYS, own].concat()
    }

    pub fn from_settings(settings: &Settings) -> Result<Self> {
        let model = ModelConfig::from_settings(settings)?;
        let axes = parse_grid(settings.require("lambda")?)?;
        if axes.len() != model.param_count {
            return Err(CliError::usage(format!("model `{}` takes {} parameter(s)", model.name(), model.param_count)));
        }
        Ok(GapPlan {
            sizes: model.sizes(settings)?,
            axes,
            out: settings.get("out").map(PathBuf::from),
            solver: solver_options(settings)?,
            model,
        })
    }
}

/// The table of successful points, and `(L, params, error)` for the rest.
pub fn run_gaps(plan: &GapPlan) -> (Table, Vec<(usize, Vec<f64>, String)>) {
    let mut header = vec!["model".to_string(), "L".to_string()];
    header.extend(plan.model.param_names());
    header.extend(["gap".to_string(), "gap_times_L".to_string()]);
    let mut table = Table::new(GAP_SCHEMA, header);
    let mut failures = Vec::new();
    let mut points: Vec<(usize, Vec<f64>)> =
        plan.sizes.iter().flat_map(|&l| grid_points(&plan.axes).into_iter().map(move |p| (l, p))).collect();
    points.sort_by(|a, b| canonical_order((a.0, &a.1), (b.0, &b.1)));
    for (l, p) in points {
        match plan.model.spec(l, &p).and_then(|spec| gap(&spec, &plan.solver)) {
            Ok(g) => {
                let mut row = vec![plan.model.name().to_string(), l.to_string()];
                row.extend(p.iter().map(|v| fmt_real(*v)));
                row.extend([fmt_real(g), fmt_real(g * l as f64)]);
                table.push(row);
            }
            Err(e) => failures.push((l, p, e.to_string())),
        }
    }
    (table, failures)
}

#[cfg(test)]
mod tests {
    use super::*;
    use qgt_core::Boundary;

    #[test]
    fn critical_gap_shrinks() {
        let plan = GapPlan {
            model: ModelConfig::parse("xxz", Boundary::Periodic, 1.0).unwrap(),
            sizes: vec![6, 8],
            axes: vec![vec![0.5]],
            out: None,
            solver: SolverOptions::default(),
        };
        let (table, failures) = run_gaps(&plan);
        assert!(failures.is_empty());
        let g: Vec<f64> = table.rows.iter().map(|r| r[3].parse().unwrap()).collect();
        assert!(g[1] < g[0] && g[1] > 0.0);
    }
}
