//! Parameter/size sweeps of the QGT.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::path::PathBuf;
use std::time::Instant;

use qgt_core::geometry::{qgt_corr_integral, qgt_fd_overlap, qgt_spectral_sum, QgtContext, QgtMethod, Quadrature};
use qgt_core::{Boundary, ModelKind, ModelSpec, SolverOptions, C64};
use rayon::prelude::*;

use crate::grid::{grid_points, parse_grid, parse_sizes};
use crate::manifest::{OutputRecord, PointDiagnostics, PointRecord, PointStatus, RunManifest};
use crate::settings::{KeySpec, Settings};
use crate::table::{fmt_opt, fmt_real, write_file, Table, SWEEP_SCHEMA};
use crate::{CliError, ExitStatus, Result, TOOL_VERSION};

/// Hamiltonian family plus the settings shared by every point.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelConfig {
    pub kind: ModelKind,
    pub param_count: usize,
    pub boundary: Boundary,
    pub coupling: f64,
}

impl ModelConfig {
    /// `xxz-field` selects the two-parameter XXZ family.
    pub fn parse(name: &str, boundary: Boundary, coupling: f64) -> Result<Self> {
        let kind: ModelKind = name.parse()?;
        let param_count = match kind {
            ModelKind::Xxz if name.trim().eq_ignore_ascii_case("xxz-field") => 2,
            ModelKind::Xxz | ModelKind::Tfim => 1,
            ModelKind::RotatedXy | ModelKind::QubitInField => 2,
        };
        Ok(ModelConfig { kind, param_count, boundary, coupling })
    }

    pub fn from_settings(settings: &Settings) -> Result<Self> {
        ModelConfig::parse(settings.require("model")?, settings.parse("boundary")?, settings.parse("coupling")?)
    }

    pub fn name(&self) -> &'static str {
        match (self.kind, self.param_count) {
            (ModelKind::Xxz, 2) => "xxz-field",
            (kind, _) => kind.name(),
        }
    }

    pub fn param_names(&self) -> Vec<String> {
        self.kind.param_names(self.param_count)
    }

    pub fn spec(&self, sites: usize, params: &[f64]) -> qgt_core::Result<ModelSpec> {
        ModelSpec::new(self.kind, sites, self.boundary, params.to_vec())?.with_coupling(self.coupling)
    }

    /// The qubit has one site; everything else needs `--L`.
    pub fn sizes(&self, settings: &Settings) -> Result<Vec<usize>> {
        match (settings.get("L"), self.kind) {
            (Some(text), _) => parse_sizes(text),
            (None, ModelKind::QubitInField) => Ok(vec![1]),
            (None, _) => Err(CliError::usage("missing required setting `L`")),
        }
    }
}

pub const MODEL_KEYS: &[KeySpec] = &[("model", Some("xxz")), ("boundary", Some("periodic")), ("coupling", Some("1"))];

pub const SOLVER_KEYS: &[KeySpec] =
    &[("seed", Some("42")), ("tol", Some("1e-10")), ("max-iter", Some("1000")), ("dense-threshold", Some("512"))];

pub fn solver_options(settings: &Settings) -> Result<SolverOptions> {
    let opts = SolverOptions {
        tol: settings.parse("tol")?,
        max_iter: settings.parse("max-iter")?,
        seed: settings.parse("seed")?,
        dense_threshold: settings.parse("dense-threshold")?,
        ..SolverOptions::default()
    };
    if !(opts.tol > 0.0) || opts.max_iter == 0 {
        return Err(CliError::usage("tol must be positive and max-iter at least 1"));
    }
    Ok(opts)
}

pub fn solver_config(opts: &SolverOptions) -> [(&'static str, String); 4] {
    [
        ("seed", opts.seed.to_string()),
        ("tol", fmt_real(opts.tol)),
        ("max-iter", opts.max_iter.to_string()),
        ("dense-threshold", opts.dense_threshold.to_string()),
    ]
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPlan {
    pub model: ModelConfig,
    pub sizes: Vec<usize>,
    /// One axis per model parameter; points are their product.
    pub axes: Vec<Vec<f64>>,
    pub method: QgtMethod,
    /// Finite-difference step for `fd-overlap`, on every parameter.
    pub dlambda: f64,
    pub out: PathBuf,
    pub workers: usize,
    pub solver: SolverOptions,
}

impl SweepPlan {
    pub fn keys() -> Vec<KeySpec> {
        let own: &[KeySpec] = &[
            ("L", None),
            ("lambda", None),
            ("method", Some("fd")),
            ("dlambda", Some("1e-3")),
            ("out", Some("sweep.csv")),
            ("workers", Some("1")),
        ];
        [MODEL_KEYS, SOLVER_KEYS, own].concat()
    }

    pub fn from_settings(settings: &Settings) -> Result<Self> {
        let model = ModelConfig::from_settings(settings)?;
        let plan = SweepPlan {
            sizes: model.sizes(settings)?,
            axes: parse_grid(settings.require("lambda")?)?,
            method: settings.parse("method")?,
            dlambda: settings.parse("dlambda")?,
            out: PathBuf::from(settings.require("out")?),
            workers: settings.parse("workers")?,
            solver: solver_options(settings)?,
            model,
        };
        plan.validate()?;
        Ok(plan)
    }

    /// Checks the grid shape and that every chain length fits the solver.
    pub fn validate(&self) -> Result<()> {
        if self.axes.len() != self.model.param_count {
            return Err(CliError::usage(format!(
                "model `{}` takes {} parameter(s) ({}), the grid has {} axis/axes",
                self.model.name(),
                self.model.param_count,
                self.model.param_names().join(", "),
                self.axes.len()
            )));
        }
        if self.sizes.is_empty() || self.axes.iter().any(Vec::is_empty) {
            return Err(CliError::usage("the size list and every parameter axis must be nonempty"));
        }
        if !(self.dlambda > 0.0 && self.dlambda.is_finite()) {
            return Err(CliError::usage(format!("dlambda must be positive, got {}", self.dlambda)));
        }
        if self.workers == 0 {
            return Err(CliError::usage("workers must be at least 1"));
        }
        let first: Vec<f64> = self.axes.iter().map(|a| a[0]).collect();
        let ctx = self.context();
        for &l in &self.sizes {
            let spec = self.model.spec(l, &first).map_err(|e| CliError::usage(format!("L = {l}: {e}")))?;
            let dim = ctx.sector_for(&spec).map_err(|e| CliError::usage(format!("L = {l}: {e}")))?.dimension();
            if self.method != QgtMethod::FdOverlap && dim > self.solver.dense_cap {
                return Err(CliError::usage(format!(
                    "L = {l}: the {} route diagonalizes the full sector of dimension {dim}, above the dense cap {}; use --method fd",
                    self.method, self.solver.dense_cap
                )));
            }
        }
        Ok(())
    }

    pub fn context(&self) -> QgtContext {
        QgtContext::new(self.solver.clone())
    }

    /// Planned points in canonical order.
    pub fn points(&self) -> Vec<(usize, Vec<f64>)> {
        let mut points: Vec<(usize, Vec<f64>)> = self
            .sizes
            .iter()
            .flat_map(|&l| grid_points(&self.axes).into_iter().map(move |p| (l, p)))
            .collect();
        points.sort_by(|a, b| canonical_order((a.0, &a.1), (b.0, &b.1)));
        points
    }

    /// Every setting the run used, as echoed into the manifest.
    pub fn resolved_config(&self) -> BTreeMap<String, String> {
        let axes: Vec<String> =
            self.axes.iter().map(|a| a.iter().map(|v| fmt_real(*v)).collect::<Vec<_>>().join(",")).collect();
        let mut config: BTreeMap<String, String> = [
            ("model", self.model.name().to_string()),
            ("boundary", self.model.boundary.to_string()),
            ("coupling", fmt_real(self.model.coupling)),
            ("L", self.sizes.iter().map(usize::to_string).collect::<Vec<_>>().join(",")),
            ("lambda", axes.join(";")),
            ("method", self.method.to_string()),
            ("dlambda", fmt_real(self.dlambda)),
            ("out", self.out.display().to_string()),
            ("workers", self.workers.to_string()),
            ("dense-cap", self.solver.dense_cap.to_string()),
            ("degeneracy-tol", fmt_real(self.solver.degeneracy_tol)),
        ]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect();
        config.extend(solver_config(&self.solver).into_iter().map(|(k, v)| (k.to_string(), v)));
        config
    }
}

pub fn canonical_order(a: (usize, &[f64]), b: (usize, &[f64])) -> Ordering {
    a.0.cmp(&b.0).then_with(|| {
        a.1.iter().zip(b.1).map(|(x, y)| x.total_cmp(y)).find(|o| o.is_ne()).unwrap_or(Ordering::Equal)
    })
}

/// One computed point.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub sites: usize,
    pub params: Vec<f64>,
    pub method: QgtMethod,
    /// `Q` row-major, `m × m`.
    pub tensor: Vec<C64>,
    pub gap: Option<f64>,
    /// Smallest stencil overlap, finite-difference route only.
    pub fidelity: Option<f64>,
}

impl SweepRow {
    pub fn dim(&self) -> usize {
        self.params.len()
    }

    pub fn entry(&self, i: usize, j: usize) -> C64 {
        self.tensor[i * self.dim() + j]
    }

    /// `g_{00} / L`.
    pub fn q(&self) -> f64 {
        self.entry(0, 0).re / self.sites as f64
    }
}

pub fn sweep_header(param_names: &[String]) -> Vec<String> {
    let m = param_names.len();
    let mut header = vec!["model".to_string(), "L".to_string()];
    header.extend(param_names.iter().cloned());
    header.extend(["method".to_string(), "q".to_string()]);
    for part in ["re", "im"] {
        for i in 0..m {
            for j in 0..m {
                header.push(format!("{part}_Q_{i}{j}"));
            }
        }
    }
    header.extend(["gap".to_string(), "fidelity_used".to_string()]);
    header
}

pub fn compute_point(plan: &SweepPlan, sites: usize, params: &[f64]) -> qgt_core::Result<(SweepRow, PointDiagnostics)> {
    let spec = plan.model.spec(sites, params)?;
    let ctx = plan.context();
    let result = match plan.method {
        QgtMethod::FdOverlap => qgt_fd_overlap(&spec, &vec![plan.dlambda; params.len()], &ctx)?,
        QgtMethod::SpectralSum => qgt_spectral_sum(&spec, &ctx)?,
        QgtMethod::CorrIntegral => qgt_corr_integral(&spec, Quadrature::adaptive(), &ctx)?,
    };
    let d = &result.diagnostics;
    let gap = Some(d.gap).filter(|g| g.is_finite());
    let fidelity = d.min_fidelity();
    let row = SweepRow {
        sites,
        params: params.to_vec(),
        method: plan.method,
        tensor: result.tensor.iter().copied().collect(),
        gap,
        fidelity,
    };
    let diagnostics = PointDiagnostics {
        sector_dimension: ctx.sector_for(&spec)?.dimension(),
        gap,
        min_fidelity: fidelity,
        quadrature_evaluations: d.quadrature_evaluations,
    };
    Ok((row, diagnostics))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepOutcome {
    /// Successful points in canonical order.
    pub rows: Vec<SweepRow>,
    /// Every planned point in canonical order.
    pub records: Vec<PointRecord>,
}

impl SweepOutcome {
    pub fn failed(&self) -> usize {
        self.records.iter().filter(|r| r.status == PointStatus::Failed).count()
    }

    pub fn table(&self, plan: &SweepPlan) -> Table {
        let mut table = Table::new(SWEEP_SCHEMA, sweep_header(&plan.model.param_names()));
        for row in &self.rows {
            let mut fields = vec![plan.model.name().to_string(), row.sites.to_string()];
            fields.extend(row.params.iter().map(|p| fmt_real(*p)));
            fields.extend([row.method.to_string(), fmt_real(row.q())]);
            fields.extend(row.tensor.iter().map(|z| fmt_real(z.re)));
            fields.extend(row.tensor.iter().map(|z| fmt_real(z.im)));
            fields.extend([fmt_opt(row.gap), fmt_opt(row.fidelity)]);
            table.push(fields);
        }
        table
    }
}

/// Solves every point on `plan.workers` threads. Failures are recorded,
/// never zero-filled.
pub fn run_sweep(plan: &SweepPlan) -> Result<SweepOutcome> {
    let points = plan.points();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(plan.workers)
        .build()
        .map_err(|e| CliError::usage(format!("cannot start {} workers: {e}", plan.workers)))?;
    let results: Vec<_> = pool.install(|| {
        points
            .par_iter()
            .map(|(l, p)| {
                let start = Instant::now();
                let outcome = compute_point(plan, *l, p);
                (outcome, start.elapsed().as_secs_f64())
            })
            .collect()
    });

    let mut rows = Vec::new();
    let mut records = Vec::with_capacity(points.len());
    for ((sites, params), (outcome, seconds)) in points.into_iter().zip(results) {
        let record = match outcome {
            Ok((row, diagnostics)) => {
                rows.push(row);
                PointRecord { sites, params, status: PointStatus::Done, seconds, error: None, diagnostics: Some(diagnostics) }
            }
            Err(e) => PointRecord {
                sites,
                params,
                status: PointStatus::Failed,
                seconds,
                error: Some(e.to_string()),
                diagnostics: None,
            },
        };
        records.push(record);
    }
    Ok(SweepOutcome { rows, records })
}

/// Writes the CSV and its manifest next to it.
pub fn write_sweep(plan: &SweepPlan, outcome: &SweepOutcome) -> Result<RunManifest> {
    let csv = outcome.table(plan).to_csv();
    let sha256 = write_file(&plan.out, &csv)?;
    let failed = outcome.failed();
    let manifest = RunManifest {
        tool_version: TOOL_VERSION.to_string(),
        command: "sweep".to_string(),
        csv_schema: SWEEP_SCHEMA.to_string(),
        config: plan.resolved_config(),
        planned: outcome.records.len(),
        completed: outcome.records.len() - failed,
        failed,
        points: outcome.records.clone(),
        outputs: vec![OutputRecord { path: plan.out.clone(), sha256, bytes: csv.len() }],
    };
    write_file(&RunManifest::path_for(&plan.out), &manifest.to_json())?;
    Ok(manifest)
}

pub fn execute_sweep(plan: &SweepPlan) -> Result<(RunManifest, ExitStatus)> {
    let outcome = run_sweep(plan)?;
    let manifest = write_sweep(plan, &outcome)?;
    let status = if manifest.failed > 0 { ExitStatus::PartialFailure } else { ExitStatus::Success };
    Ok((manifest, status))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn plan(model: &str, sizes: Vec<usize>, axes: Vec<Vec<f64>>, method: QgtMethod) -> SweepPlan {
        SweepPlan {
            model: ModelConfig::parse(model, Boundary::Periodic, 1.0).unwrap(),
            sizes,
            axes,
            method,
            dlambda: 1e-3,
            out: PathBuf::from("unused.csv"),
            workers: 1,
            solver: SolverOptions::default(),
        }
    }

    #[test]
    fn model_names_select_parameter_count() {
        let field = ModelConfig::parse("xxz-field", Boundary::Periodic, 1.0).unwrap();
        assert_eq!((field.param_count, field.name()), (2, "xxz-field"));
        assert_eq!(ModelConfig::parse("xxz", Boundary::Open, 1.0).unwrap().param_count, 1);
        assert!(ModelConfig::parse("potts", Boundary::Periodic, 1.0).is_err());
    }

    #[test]
    fn header_layout() {
        let h = sweep_header(&["h".to_string(), "phi".to_string()]);
        assert_eq!(h[..6], ["model", "L", "h", "phi", "method", "q"]);
        assert_eq!(h[6], "re_Q_00");
        assert_eq!(h[10], "im_Q_00");
        assert_eq!(h[h.len() - 2..], ["gap", "fidelity_used"]);
    }

    #[test]
    fn validation_rejects_bad_plans() {
        assert!(plan("xxz", vec![8], vec![vec![0.5]], QgtMethod::FdOverlap).validate().is_ok());
        assert!(plan("xxz", vec![8], vec![vec![0.5], vec![0.0]], QgtMethod::FdOverlap).validate().is_err());
        assert!(plan("xxz", vec![7], vec![vec![0.5]], QgtMethod::FdOverlap).validate().is_err());
        assert!(plan("xxz", vec![16], vec![vec![0.5]], QgtMethod::SpectralSum).validate().is_err());
        let mut p = plan("xxz", vec![8], vec![vec![0.5]], QgtMethod::FdOverlap);
        p.dlambda = 0.0;
        assert!(p.validate().is_err());
    }

    #[test]
    fn points_are_canonical() {
        let p = plan("xxz", vec![10, 8], vec![vec![0.5, -0.5]], QgtMethod::FdOverlap);
        let pts = p.points();
        assert_eq!(pts, vec![(8, vec![-0.5]), (8, vec![0.5]), (10, vec![-0.5]), (10, vec![0.5])]);
    }

    #[test]
    fn failures_are_recorded_not_filled() {
        let p = plan("xxz", vec![4], vec![vec![f64::NAN, 0.5]], QgtMethod::SpectralSum);
        let outcome = run_sweep(&p).unwrap();
        assert_eq!(outcome.records.len(), 2);
        assert_eq!(outcome.failed(), 1);
        assert_eq!(outcome.rows.len(), 1);
        assert_eq!(outcome.rows[0].params, vec![0.5]);
        assert!(outcome.records[1].error.is_some());
        assert_eq!(outcome.table(&p).rows.len(), 1);
    }

    #[test]
    fn two_site_singlet_has_no_metric() {
        let mut p = plan("xxz", vec![2], vec![vec![0.0, 0.5]], QgtMethod::FdOverlap);
        p.model.boundary = Boundary::Open;
        p.validate().unwrap();
        let outcome = run_sweep(&p).unwrap();
        assert_eq!(outcome.rows.len(), 2);
        assert!(outcome.rows.iter().all(|r| r.entry(0, 0).re.abs() <= 1e-10 && r.fidelity.is_some()));
    }
}
