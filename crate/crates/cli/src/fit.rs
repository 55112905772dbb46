//! Finite-size fits of sweep datasets, one per parameter group, with a
//! gnuplot script and data file for the points and curves.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use qgt_core::scaling::{cosine_dimension, extract_slope, fit_fss, FitModel};

use crate::settings::{KeySpec, Settings};
use crate::sweep::{canonical_order, sweep_header};
use crate::table::{fmt_real, parse_real, write_file, Table, FIT_SCHEMA, SWEEP_SCHEMA};
use crate::{CliError, ExitStatus, Result};

/// Rows of one parameter point, sorted by `L`.
#[derive(Debug, Clone, PartialEq)]
pub struct Group {
    pub params: Vec<f64>,
    pub points: Vec<(usize, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub param_names: Vec<String>,
    pub column: String,
    pub groups: Vec<Group>,
}

/// Reads `(L, column)` grouped by the parameter columns. Sweep files must
/// carry the exact header of their schema; files without a schema line need
/// `L` and `column`, and are grouped by `lambda` when present.
pub fn read_dataset(path: &Path, column: &str) -> Result<Dataset> {
    let table = Table::read(path)?;
    let param_names: Vec<String> = match table.schema.as_deref() {
        Some(SWEEP_SCHEMA) => {
            let method = table.require_column("method", path)?;
            if method < 2 || table.header.first().map(String::as_str) != Some("model") || table.header[1] != "L" {
                return Err(CliError::schema(path, "header does not match qgt-sweep-v1"));
            }
            let names = table.header[2..method].to_vec();
            if table.header != sweep_header(&names) {
                return Err(CliError::schema(path, "header does not match qgt-sweep-v1"));
            }
            names
        }
        Some(other) => return Err(CliError::schema(path, format!("unsupported schema `{other}`, expected {SWEEP_SCHEMA}"))),
        None => table.column("lambda").map(|_| vec!["lambda".to_string()]).unwrap_or_default(),
    };
    let l_col = table.require_column("L", path)?;
    let v_col = table.require_column(column, path)?;
    let p_cols: Vec<usize> = param_names.iter().map(|n| table.require_column(n, path)).collect::<Result<_>>()?;

    let mut groups: Vec<Group> = Vec::new();
    for row in &table.rows {
        let sites: usize =
            row[l_col].parse().map_err(|_| CliError::schema(path, format!("column `L`: `{}` is not a size", row[l_col])))?;
        let value = parse_real(&row[v_col], column, path)?;
        let params: Vec<f64> =
            p_cols.iter().zip(&param_names).map(|(c, n)| parse_real(&row[*c], n, path)).collect::<Result<_>>()?;
        match groups.iter_mut().find(|g| g.params == params) {
            Some(g) => g.points.push((sites, value)),
            None => groups.push(Group { params, points: vec![(sites, value)] }),
        }
    }
    if groups.is_empty() {
        return Err(CliError::schema(path, "no data rows"));
    }
    for g in &mut groups {
        g.points.sort_by_key(|p| p.0);
        if g.points.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(CliError::schema(path, format!("repeated L in the group at {:?}", g.params)));
        }
    }
    groups.sort_by(|a, b| canonical_order((0, &a.params), (0, &b.params)));
    Ok(Dataset { param_names, column: column.to_string(), groups })
}

/// A finite-size model with fixed exponents, or a log-log power law.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FitKind {
    Scaling(FitModel),
    PowerLaw,
}

impl FitKind {
    pub fn name(&self) -> &'static str {
        match self {
            FitKind::Scaling(m) => m.name(),
            FitKind::PowerLaw => "power-law",
        }
    }
}

impl FromStr for FitKind {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "power-law" | "power" | "slope" => Ok(FitKind::PowerLaw),
            other => Ok(FitKind::Scaling(other.parse()?)),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitPlan {
    pub input: PathBuf,
    pub kind: FitKind,
    pub column: String,
    /// Model default (14 for the massive form) when absent.
    pub min_sites: Option<usize>,
    pub correlation_length: Option<f64>,
    /// `4K(λ)` from the group's `lambda` when absent.
    pub irrelevant_dimension: Option<f64>,
    pub out: PathBuf,
}

impl FitPlan {
    pub const KEYS: &'static [KeySpec] = &[
        ("input", None),
        ("model", Some("gapless")),
        ("column", Some("q")),
        ("min-L", None),
        ("xi", None),
        ("irrelevant-dim", None),
        ("out", Some("fit.csv")),
    ];

    pub fn from_settings(settings: &Settings) -> Result<Self> {
        Ok(FitPlan {
            input: PathBuf::from(settings.require("input")?),
            kind: settings.parse("model")?,
            column: settings.require("column")?.to_string(),
            min_sites: settings.parse_opt("min-L")?,
            correlation_length: settings.parse_opt("xi")?,
            irrelevant_dimension: settings.parse_opt("irrelevant-dim")?,
            out: PathBuf::from(settings.require("out")?),
        })
    }

    pub fn data_path(&self) -> PathBuf {
        self.out.with_extension("dat")
    }

    pub fn script_path(&self) -> PathBuf {
        self.out.with_extension("gp")
    }

    fn model_for(&self, dataset: &Dataset, group: &Group) -> std::result::Result<FitKind, String> {
        Ok(match self.kind {
            FitKind::Scaling(FitModel::GaplessWithIrrelevant { .. }) => {
                let dim = match self.irrelevant_dimension {
                    Some(d) => d,
                    None => match dataset.param_names.first().map(String::as_str) {
                        Some("lambda") => cosine_dimension(group.params[0]).map_err(|e| e.to_string())?,
                        _ => return Err("no `lambda` column; pass the irrelevant dimension explicitly".into()),
                    },
                };
                FitKind::Scaling(FitModel::GaplessWithIrrelevant { irrelevant_dimension: dim })
            }
            FitKind::Scaling(m @ FitModel::Massive { .. }) => match self.correlation_length {
                Some(xi) => FitKind::Scaling(m.with_fixed(xi)),
                None => FitKind::Scaling(m),
            },
            other => other,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitSummary {
    pub kind: FitKind,
    /// `A_1, A_2[, A_3]`; for the power law, prefactor and exponent.
    pub coefficients: Vec<f64>,
    pub rss: f64,
    pub r_squared: f64,
    pub condition: f64,
    pub points: usize,
    pub min_sites: usize,
}

impl FitSummary {
    pub fn fixed(&self) -> String {
        match self.kind {
            FitKind::Scaling(FitModel::GaplessWithIrrelevant { irrelevant_dimension }) => {
                format!("irrelevant_dim={irrelevant_dimension}")
            }
            FitKind::Scaling(FitModel::Massive { correlation_length }) => format!("xi={correlation_length}"),
            _ => String::new(),
        }
    }

    /// The fitted curve as a gnuplot expression in `x`.
    pub fn gnuplot_expression(&self) -> String {
        let a: Vec<String> = self.coefficients.iter().map(|c| format!("({c:e})")).collect();
        match self.kind {
            FitKind::Scaling(FitModel::Gapless) => format!("{} + {}/x", a[0], a[1]),
            FitKind::Scaling(FitModel::GaplessWithIrrelevant { irrelevant_dimension }) => {
                format!("{} + {}/x + {}*x**({})", a[0], a[1], a[2], 3.0 - 2.0 * irrelevant_dimension)
            }
            FitKind::Scaling(FitModel::Logarithmic) => format!("{} + {}/x + {}/(x*log(x))", a[0], a[1], a[2]),
            FitKind::Scaling(FitModel::Massive { correlation_length }) => {
                format!("{} + {}*exp(-x/{correlation_length})/sqrt(x)", a[0], a[1])
            }
            FitKind::PowerLaw => format!("{}*x**{}", a[0], a[1]),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitRow {
    pub params: Vec<f64>,
    pub result: std::result::Result<FitSummary, String>,
}

pub fn fit_group(plan: &FitPlan, dataset: &Dataset, group: &Group) -> std::result::Result<FitSummary, String> {
    let kind = plan.model_for(dataset, group)?;
    match kind {
        FitKind::Scaling(model) => {
            let fit = fit_fss(&group.points, model, plan.min_sites).map_err(|e| e.to_string())?;
            Ok(FitSummary {
                kind,
                points: fit.sites.len(),
                coefficients: fit.coefficients,
                rss: fit.rss,
                r_squared: fit.r_squared,
                condition: fit.condition,
                min_sites: fit.min_sites,
            })
        }
        FitKind::PowerLaw => {
            let min_sites = plan.min_sites.unwrap_or(0);
            let used: Vec<(f64, f64)> =
                group.points.iter().filter(|(l, _)| *l >= min_sites).map(|(l, v)| (*l as f64, *v)).collect();
            let fit = extract_slope(&used).map_err(|e| e.to_string())?;
            let rss = used.iter().map(|(l, v)| (v.ln() - fit.intercept - fit.slope * l.ln()).powi(2)).sum();
            Ok(FitSummary {
                kind,
                coefficients: vec![fit.intercept.exp(), fit.slope],
                rss,
                r_squared: fit.r_squared,
                condition: f64::NAN,
                points: used.len(),
                min_sites,
            })
        }
    }
}

pub fn fit_dataset(plan: &FitPlan, dataset: &Dataset) -> Vec<FitRow> {
    dataset.groups.iter().map(|g| FitRow { params: g.params.clone(), result: fit_group(plan, dataset, g) }).collect()
}

fn group_label(params: &[f64]) -> String {
    params.iter().map(|p| fmt_real(*p)).collect::<Vec<_>>().join(";")
}

pub fn fit_table(plan: &FitPlan, rows: &[FitRow]) -> Table {
    let header = ["model", "lambda", "A1", "A2", "A3", "fixed", "RSS", "R2", "condition", "points", "status"];
    let mut table = Table::new(FIT_SCHEMA, header.iter().map(|s| s.to_string()).collect());
    for row in rows {
        let label = group_label(&row.params);
        let fields = match &row.result {
            Ok(s) => {
                let coeff = |i: usize| s.coefficients.get(i).map(|c| fmt_real(*c)).unwrap_or_default();
                vec![
                    s.kind.name().to_string(),
                    label,
                    coeff(0),
                    coeff(1),
                    coeff(2),
                    s.fixed(),
                    fmt_real(s.rss),
                    fmt_real(s.r_squared),
                    fmt_real(s.condition),
                    s.points.to_string(),
                    "ok".to_string(),
                ]
            }
            Err(message) => {
                let mut f = vec![plan.kind.name().to_string(), label];
                f.extend(std::iter::repeat_n(String::new(), 8));
                f.push(format!("error: {}", message.replace([',', '\n'], ";")));
                f
            }
        };
        table.push(fields);
    }
    table
}

/// Data blocks separated by two blank lines, one per group, for gnuplot's
/// `index`.
pub fn plot_data(dataset: &Dataset) -> String {
    let mut out = String::new();
    for (i, g) in dataset.groups.iter().enumerate() {
        if i > 0 {
            out.push_str("\n\n");
        }
        out.push_str(&format!("# {} = {}\n", dataset.param_names.join(";"), group_label(&g.params)));
        for (l, v) in &g.points {
            out.push_str(&format!("{l} {}\n", fmt_real(*v)));
        }
    }
    out
}

pub fn plot_script(plan: &FitPlan, dataset: &Dataset, rows: &[FitRow]) -> String {
    let data_name = plan.data_path().file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let ylabel = if dataset.column == "q" { "g/L".to_string() } else { dataset.column.clone() };
    let mut s = String::new();
    s.push_str(&format!("# Points and fitted curves from {}.\n", plan.input.display()));
    s.push_str("set xlabel \"L\"\n");
    s.push_str(&format!("set ylabel \"{ylabel}\"\n"));
    s.push_str("set key outside right\n");
    if plan.kind == FitKind::PowerLaw {
        s.push_str("set logscale xy\n");
    }
    let mut plots = Vec::new();
    for (i, row) in rows.iter().enumerate() {
        let label = format!("{} = {}", dataset.param_names.join(";"), row.params.iter().map(|p| p.to_string()).collect::<Vec<_>>().join(";"));
        plots.push(format!("\"{data_name}\" index {i} using 1:2 with points pointtype 7 title \"{label}\""));
        if let Ok(summary) = &row.result {
            s.push_str(&format!("f{i}(x) = {}\n", summary.gnuplot_expression()));
            plots.push(format!("f{i}(x) with lines title \"{} fit\"", summary.kind.name()));
        }
    }
    s.push_str("plot ");
    s.push_str(&plots.join(", \\\n     "));
    s.push('\n');
    s
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitReport {
    pub rows: Vec<FitRow>,
    pub status: ExitStatus,
}

/// Runs every group and writes the fit CSV, data file and script.
pub fn execute_fit(plan: &FitPlan) -> Result<FitReport> {
    let dataset = read_dataset(&plan.input, &plan.column)?;
    let rows = fit_dataset(plan, &dataset);
    write_file(&plan.out, &fit_table(plan, &rows).to_csv())?;
    write_file(&plan.data_path(), &plot_data(&dataset))?;
    write_file(&plan.script_path(), &plot_script(plan, &dataset, &rows))?;
    let status = if rows.iter().any(|r| r.result.is_err()) { ExitStatus::PartialFailure } else { ExitStatus::Success };
    Ok(FitReport { rows, status })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn plan(dir: &Path, kind: &str) -> FitPlan {
        FitPlan {
            input: dir.join("in.csv"),
            kind: kind.parse().unwrap(),
            column: "q".into(),
            min_sites: None,
            correlation_length: None,
            irrelevant_dimension: None,
            out: dir.join("fit.csv"),
        }
    }

    #[test]
    fn generic_csv_groups_by_lambda() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("in.csv"), "lambda,L,q\n0.5,10,1\n0.5,8,2\n0.3,8,3\n").unwrap();
        let d = read_dataset(&dir.path().join("in.csv"), "q").unwrap();
        assert_eq!(d.groups.len(), 2);
        assert_eq!(d.groups[0].params, vec![0.3]);
        assert_eq!(d.groups[1].points, vec![(8, 2.0), (10, 1.0)]);
    }

    #[test]
    fn schema_violations() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("in.csv");
        std::fs::write(&path, "L,value\n8,1\n").unwrap();
        assert!(matches!(read_dataset(&path, "q"), Err(CliError::Schema { .. })));
        std::fs::write(&path, "# qgt-sweep-v9\nL,q\n8,1\n").unwrap();
        assert!(matches!(read_dataset(&path, "q"), Err(CliError::Schema { .. })));
        std::fs::write(&path, "# qgt-sweep-v1\nmodel,L,lambda,method,q\nxxz,8,0.5,fd,1\n").unwrap();
        assert!(matches!(read_dataset(&path, "q"), Err(CliError::Schema { .. })));
        std::fs::write(&path, "L,q\n8,1\n8,2\n").unwrap();
        assert!(matches!(read_dataset(&path, "q"), Err(CliError::Schema { .. })));
    }

    #[test]
    fn exact_data_is_recovered_and_plotted() {
        let dir = tempfile::tempdir().unwrap();
        let mut text = String::from("lambda,L,q\n");
        for l in (8..=20).step_by(2) {
            text.push_str(&format!("0.5,{l},{}\n", fmt_real(2.0 + 3.0 / l as f64)));
        }
        std::fs::write(dir.path().join("in.csv"), text).unwrap();
        let p = plan(dir.path(), "gapless");
        let report = execute_fit(&p).unwrap();
        assert_eq!(report.status, ExitStatus::Success);
        let s = report.rows[0].result.as_ref().unwrap();
        assert!((s.coefficients[0] - 2.0).abs() < 1e-10 && (s.coefficients[1] - 3.0).abs() < 1e-10);
        let script = std::fs::read_to_string(p.script_path()).unwrap();
        assert!(script.contains("\"fit.dat\" index 0") && script.contains("f0(x) ="));
        let out = Table::read(&p.out).unwrap();
        assert_eq!(out.schema.as_deref(), Some(FIT_SCHEMA));
        assert_eq!(out.rows[0][10], "ok");
    }

    #[test]
    fn irrelevant_dimension_defaults_to_cosine() {
        let dir = tempfile::tempdir().unwrap();
        let d = Dataset {
            param_names: vec!["lambda".into()],
            column: "q".into(),
            groups: vec![Group { params: vec![0.5], points: vec![] }, Group { params: vec![2.0], points: vec![] }],
        };
        let p = plan(dir.path(), "gapless-irrelevant");
        match p.model_for(&d, &d.groups[0]).unwrap() {
            FitKind::Scaling(FitModel::GaplessWithIrrelevant { irrelevant_dimension }) => {
                assert!((irrelevant_dimension - 3.0).abs() < 1e-12)
            }
            other => panic!("{other:?}"),
        }
        assert!(p.model_for(&d, &d.groups[1]).is_err());
    }

    #[test]
    fn failed_groups_are_reported() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("in.csv"), "L,q\n8,1\n10,2\n").unwrap();
        let report = execute_fit(&plan(dir.path(), "logarithmic")).unwrap();
        assert_eq!(report.status, ExitStatus::PartialFailure);
        let out = Table::read(&dir.path().join("fit.csv")).unwrap();
        assert!(out.rows[0][10].starts_with("error:"));
    }

    #[test]
    fn power_law_slope() {
        let dir = tempfile::tempdir().unwrap();
        let d = Dataset {
            param_names: vec![],
            column: "re_Q_00".into(),
            groups: vec![Group { params: vec![], points: (8..=18).step_by(2).map(|l| (l, 0.3 * (l * l) as f64)).collect() }],
        };
        let s = fit_group(&plan(dir.path(), "power-law"), &d, &d.groups[0]).unwrap();
        assert!((s.coefficients[1] - 2.0).abs() < 1e-12);
        assert!((s.coefficients[0] - 0.3).abs() < 1e-12);
    }
}
