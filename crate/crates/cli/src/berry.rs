//! Plaquette curvature fields and loop phases over a two-parameter family.

use std::path::PathBuf;

use qgt_core::geometry::{
    berry_curvature_plaquette, berry_phase_loop, wrap_phase, CurvatureField, LoopPhase, ParameterLoop, ParameterMesh,
    QgtContext,
};
use qgt_core::SolverOptions;

use crate::grid::{parse_axis, parse_point};
use crate::settings::{KeySpec, Settings};
use crate::sweep::{solver_options, ModelConfig, MODEL_KEYS, SOLVER_KEYS};
use crate::table::{fmt_real, Table, BERRY_FIELD_SCHEMA};
use crate::{CliError, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum BerryTask {
    Field(ParameterMesh),
    Loop {
        path: ParameterLoop,
        steps: usize,
        refine: bool,
        /// Also sum plaquettes over the rectangle, on the loop's own nodes.
        stokes: bool,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct BerryPlan {
    pub model: ModelConfig,
    pub sites: usize,
    /// Parameters not swept by the mesh or loop.
    pub base: Vec<f64>,
    pub task: BerryTask,
    pub out: Option<PathBuf>,
    pub solver: SolverOptions,
}

/// `start:end:cells` per axis, two axes separated by `;`.
pub fn parse_mesh(text: &str) -> Result<ParameterMesh> {
    let axes: Vec<&str> = text.split(';').collect();
    let mut start = [0.0; 2];
    let mut end = [0.0; 2];
    let mut cells = [0usize; 2];
    if axes.len() != 2 {
        return Err(CliError::usage(format!("mesh needs two axes `a:b:n;c:d:m`, got `{text}`")));
    }
    for (k, axis) in axes.iter().enumerate() {
        let parts: Vec<&str> = axis.split(':').map(str::trim).collect();
        let [a, b, n] = parts.as_slice() else {
            return Err(CliError::usage(format!("mesh axis `{axis}` is not `start:end:cells`")));
        };
        start[k] = parse_axis(a)?[0];
        end[k] = parse_axis(b)?[0];
        cells[k] = n.parse().map_err(|_| CliError::usage(format!("bad cell count `{n}`")))?;
    }
    let mesh = ParameterMesh::new([0, 1], start, end, cells);
    Ok(mesh)
}

/// Rectangle corners `([a0, a1], [b0, b1])`.
pub type Rectangle = ([f64; 2], [f64; 2]);

/// `circle:<axis>` (a full turn of an angle from the base point) or
/// `rect:<a0>,<a1>:<b0>,<b1>` (counter-clockwise rectangle).
pub fn parse_loop(text: &str, base: Option<&[f64]>) -> Result<(ParameterLoop, Option<Rectangle>)> {
    let (kind, rest) = text.split_once(':').unwrap_or((text, ""));
    match kind.trim() {
        "circle" => {
            let axis: usize = rest.trim().parse().map_err(|_| CliError::usage(format!("bad loop axis `{rest}`")))?;
            let base = base.ok_or_else(|| CliError::usage("a circle loop needs the base point `lambda`"))?;
            if axis >= base.len() {
                return Err(CliError::usage(format!("loop axis {axis} out of range")));
            }
            Ok((ParameterLoop::angle_circle(base, axis, base[axis]), None))
        }
        "rect" => {
            let corners: Vec<Vec<f64>> = rest.split(':').map(parse_axis).collect::<Result<_>>()?;
            let [lower, upper] = corners.as_slice() else {
                return Err(CliError::usage(format!("rectangle loop needs `rect:a0,a1:b0,b1`, got `{text}`")));
            };
            if lower.len() != 2 || upper.len() != 2 {
                return Err(CliError::usage("rectangle corners have two coordinates"));
            }
            let (lower, upper) = ([lower[0], lower[1]], [upper[0], upper[1]]);
            let base = base.map(<[f64]>::to_vec).unwrap_or_else(|| lower.to_vec());
            Ok((ParameterLoop::rectangle(&base, [0, 1], lower, upper), Some((lower, upper))))
        }
        other => Err(CliError::usage(format!("unknown loop kind `{other}` (circle, rect)"))),
    }
}

impl BerryPlan {
    pub fn keys() -> Vec<KeySpec> {
        let own: &[KeySpec] = &[
            ("L", None),
            ("lambda", None),
            ("mesh", None),
            ("loop", None),
            ("steps", Some("256")),
            ("refine", Some("true")),
            ("stokes", Some("false")),
            ("out", None),
        ];
        [MODEL_KEYS, SOLVER_KEYS, own].concat()
    }

    pub fn from_settings(settings: &Settings) -> Result<Self> {
        let model = ModelConfig::from_settings(settings)?;
        if model.param_count < 2 {
            return Err(CliError::usage(format!("model `{}` has one parameter; Berry phases need two", model.name())));
        }
        let sizes = model.sizes(settings)?;
        let [sites] = sizes.as_slice() else {
            return Err(CliError::usage("berry takes a single chain length"));
        };
        let base = settings.get("lambda").map(parse_point).transpose()?;
        let (task, default_base) = match (settings.get("mesh"), settings.get("loop")) {
            (Some(mesh), None) => {
                let mesh = parse_mesh(mesh)?;
                let start = mesh.start.to_vec();
                (BerryTask::Field(mesh), start)
            }
            (None, Some(spec)) => {
                let (path, rect) = parse_loop(spec, base.as_deref())?;
                let stokes = settings.flag("stokes")?;
                if stokes && rect.is_none() {
                    return Err(CliError::usage("the plaquette comparison needs a rectangle loop"));
                }
                let start = path.vertices[0].clone();
                let steps = settings.parse("steps")?;
                (BerryTask::Loop { path, steps, refine: settings.flag("refine")?, stokes }, start)
            }
            _ => return Err(CliError::usage("give exactly one of `mesh` and `loop`")),
        };
        let plan = BerryPlan {
            base: base.unwrap_or(default_base),
            sites: *sites,
            task,
            out: settings.get("out").map(PathBuf::from),
            solver: solver_options(settings)?,
            model,
        };
        if plan.base.len() != plan.model.param_count {
            return Err(CliError::usage(format!("model `{}` takes {} parameters", plan.model.name(), plan.model.param_count)));
        }
        plan.model.spec(plan.sites, &plan.base).map_err(|e| CliError::usage(e.to_string()))?;
        Ok(plan)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum BerryOutcome {
    Field { field: Box<CurvatureField>, table: Table },
    Loop { phase: LoopPhase, plaquette_phase: Option<f64> },
}

impl BerryOutcome {
    /// `key = value` lines for the terminal.
    pub fn summary(&self) -> String {
        let mut lines = Vec::new();
        match self {
            BerryOutcome::Field { field, .. } => {
                lines.push(format!("cells = {}", field.values.len()));
                lines.push(format!("enclosed_phase = {}", fmt_real(field.enclosed_phase())));
            }
            BerryOutcome::Loop { phase, plaquette_phase } => {
                lines.push(format!("phase = {}", fmt_real(phase.phase)));
                lines.push(format!("points = {}", phase.points));
                if let (Some(fine), Some(change)) = (phase.refined_phase, phase.refinement_change()) {
                    lines.push(format!("refined_phase = {}", fmt_real(fine)));
                    lines.push(format!("refinement_change = {}", fmt_real(change)));
                }
                if let Some(p) = plaquette_phase {
                    lines.push(format!("plaquette_phase = {}", fmt_real(*p)));
                    lines.push(format!("stokes_difference = {}", fmt_real(wrap_phase(phase.phase - p))));
                }
            }
        }
        lines.join("\n") + "\n"
    }
}

pub fn run_berry(plan: &BerryPlan) -> Result<BerryOutcome> {
    let spec = plan.model.spec(plan.sites, &plan.base)?;
    let ctx = QgtContext::new(plan.solver.clone());
    match &plan.task {
        BerryTask::Field(mesh) => {
            let field = berry_curvature_plaquette(&spec, mesh, &ctx)?;
            let names = plan.model.param_names();
            let mut table = Table::new(BERRY_FIELD_SCHEMA, vec![names[0].clone(), names[1].clone(), "F".to_string()]);
            for (i, x) in field.centers[0].iter().enumerate() {
                for (j, y) in field.centers[1].iter().enumerate() {
                    table.push(vec![fmt_real(*x), fmt_real(*y), fmt_real(field.values[[i, j]])]);
                }
            }
            Ok(BerryOutcome::Field { field: Box::new(field), table })
        }
        BerryTask::Loop { path, steps, refine, stokes } => {
            let phase = berry_phase_loop(&spec, path, *steps, *refine, &ctx)?;
            let plaquette_phase = if *stokes {
                let (lo, hi) = (&path.vertices[0], &path.vertices[2]);
                let mesh = ParameterMesh::new([0, 1], [lo[0], lo[1]], [hi[0], hi[1]], [*steps, *steps]);
                Some(berry_curvature_plaquette(&spec, &mesh, &ctx)?.enclosed_phase())
            } else {
                None
            };
            Ok(BerryOutcome::Loop { phase, plaquette_phase })
        }
    }
}
