//! Gauge-invariant Berry curvature and Berry phases from products of
//! ground-state overlaps.
//!
//! Sign conventions: the loop phase is `γ = −Arg Π_j ⟨ψ_j|ψ_{j+1}⟩`, which
//! equals `∮ i⟨ψ|dψ⟩`. By Stokes, a small counter-clockwise loop in the
//! `(λ_a, λ_b)` plane encloses `γ = −2 F_{ab} · area` with `F = Im Q`, so
//! the plaquette estimate is `F = Arg Π / (2 · area)`.

use std::f64::consts::PI;

use ndarray::Array2;
use num_complex::Complex64;
use rayon::prelude::*;

use super::{ground_state, QgtContext};
use crate::error::{Error, Result};
use crate::linalg::dot;
use crate::model::ModelSpec;

type C64 = Complex64;

/// Wraps an angle to `(−π, π]`.
pub fn wrap_phase(x: f64) -> f64 {
    let y = x.rem_euclid(2.0 * PI);
    if y > PI {
        y - 2.0 * PI
    } else {
        y
    }
}

/// Rectangular mesh over two parameters; the others stay at the model's values.
#[derive(Debug, Clone, PartialEq)]
pub struct ParameterMesh {
    pub axes: [usize; 2],
    pub start: [f64; 2],
    pub end: [f64; 2],
    pub cells: [usize; 2],
}

impl ParameterMesh {
    pub fn new(axes: [usize; 2], start: [f64; 2], end: [f64; 2], cells: [usize; 2]) -> Self {
        ParameterMesh { axes, start, end, cells }
    }

    pub fn spacing(&self) -> [f64; 2] {
        [
            (self.end[0] - self.start[0]) / self.cells[0] as f64,
            (self.end[1] - self.start[1]) / self.cells[1] as f64,
        ]
    }

    fn node(&self, base: &[f64], i: usize, j: usize) -> Vec<f64> {
        let h = self.spacing();
        let mut p = base.to_vec();
        p[self.axes[0]] = self.start[0] + i as f64 * h[0];
        p[self.axes[1]] = self.start[1] + j as f64 * h[1];
        p
    }

    fn validate(&self, m: usize) -> Result<()> {
        if m < 2 {
            return Err(Error::BadData("Berry curvature needs at least two parameters".into()));
        }
        if self.axes[0] == self.axes[1] || self.axes.iter().any(|&a| a >= m) {
            return Err(Error::BadParameterIndex { index: self.axes[0].max(self.axes[1]), count: m });
        }
        if self.cells.contains(&0) || self.spacing().iter().any(|h| *h == 0.0 || !h.is_finite()) {
            return Err(Error::BadData("mesh needs at least one cell of nonzero size per axis".into()));
        }
        Ok(())
    }
}

/// Plaquette estimates of `F_{ab}` at cell centers.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvatureField {
    pub mesh: ParameterMesh,
    /// Cell-center coordinates along each axis.
    pub centers: [Vec<f64>; 2],
    /// `values[[i, j]]` is the curvature of cell `(i, j)`.
    pub values: Array2<f64>,
    pub cell_area: f64,
}

impl CurvatureField {
    /// `−2 Σ F · area`: the Berry phase enclosed by the mesh boundary
    /// (not wrapped).
    pub fn enclosed_phase(&self) -> f64 {
        -2.0 * self.values.sum() * self.cell_area
    }
}

pub fn berry_curvature_plaquette(spec: &ModelSpec, mesh: &ParameterMesh, ctx: &QgtContext) -> Result<CurvatureField> {
    mesh.validate(spec.num_params())?;
    let sector = ctx.sector_for(spec)?;
    let [n0, n1] = mesh.cells;
    let nodes: Vec<(usize, usize)> = (0..=n0).flat_map(|i| (0..=n1).map(move |j| (i, j))).collect();
    let states: Vec<Vec<C64>> = nodes
        .par_iter()
        .map(|&(i, j)| {
            let point = spec.with_params(&mesh.node(&spec.params, i, j))?;
            Ok(ground_state(&point, &sector, &ctx.solver, true)?.vector)
        })
        .collect::<Result<_>>()?;
    let at = |i: usize, j: usize| states[i * (n1 + 1) + j].as_slice();

    let h = mesh.spacing();
    let area = h[0] * h[1];
    let mut values = Array2::<f64>::zeros((n0, n1));
    for i in 0..n0 {
        for j in 0..n1 {
            let product = dot(at(i, j), at(i + 1, j))
                * dot(at(i + 1, j), at(i + 1, j + 1))
                * dot(at(i + 1, j + 1), at(i, j + 1))
                * dot(at(i, j + 1), at(i, j));
            let phase = product.arg();
            if phase.abs() > PI / 2.0 {
                return Err(Error::MeshTooCoarse { phase });
            }
            values[[i, j]] = phase / (2.0 * area);
        }
    }
    let centers = [
        (0..n0).map(|i| mesh.start[0] + (i as f64 + 0.5) * h[0]).collect(),
        (0..n1).map(|j| mesh.start[1] + (j as f64 + 0.5) * h[1]).collect(),
    ];
    Ok(CurvatureField { mesh: mesh.clone(), centers, values, cell_area: area })
}

/// Closed polyline in parameter space. The first and last vertex must give
/// the same ground-state ray; they need not be equal as parameter vectors
/// (e.g. a full turn of a periodic angle).
#[derive(Debug, Clone, PartialEq)]
pub struct ParameterLoop {
    pub vertices: Vec<Vec<f64>>,
}

impl ParameterLoop {
    pub fn new(vertices: Vec<Vec<f64>>) -> Self {
        ParameterLoop { vertices }
    }

    /// Full turn of parameter `axis` from `start` to `start + 2π`, other
    /// parameters fixed at `base`.
    pub fn angle_circle(base: &[f64], axis: usize, start: f64) -> Self {
        let mut a = base.to_vec();
        a[axis] = start;
        let mut b = base.to_vec();
        b[axis] = start + 2.0 * PI;
        ParameterLoop { vertices: vec![a, b] }
    }

    /// Counter-clockwise rectangle `[a0, b0] × [a1, b1]` in parameters `axes`.
    pub fn rectangle(base: &[f64], axes: [usize; 2], lower: [f64; 2], upper: [f64; 2]) -> Self {
        let corner = |x: f64, y: f64| {
            let mut p = base.to_vec();
            p[axes[0]] = x;
            p[axes[1]] = y;
            p
        };
        ParameterLoop {
            vertices: vec![
                corner(lower[0], lower[1]),
                corner(upper[0], lower[1]),
                corner(upper[0], upper[1]),
                corner(lower[0], upper[1]),
                corner(lower[0], lower[1]),
            ],
        }
    }

    /// Points of the discretized loop, excluding the closing vertex.
    pub fn discretize(&self, steps_per_edge: usize) -> Vec<Vec<f64>> {
        let mut points = Vec::new();
        for edge in self.vertices.windows(2) {
            for s in 0..steps_per_edge {
                let t = s as f64 / steps_per_edge as f64;
                points.push(edge[0].iter().zip(&edge[1]).map(|(a, b)| a + t * (b - a)).collect());
            }
        }
        points
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LoopPhase {
    /// `γ` wrapped to `(−π, π]`.
    pub phase: f64,
    pub points: usize,
    /// Phase with twice the points, when refinement was requested.
    pub refined_phase: Option<f64>,
}

impl LoopPhase {
    /// Wrapped change of `γ` under refinement.
    pub fn refinement_change(&self) -> Option<f64> {
        self.refined_phase.map(|r| wrap_phase(r - self.phase).abs())
    }
}

fn loop_phase_once(spec: &ModelSpec, path: &ParameterLoop, steps: usize, ctx: &QgtContext) -> Result<f64> {
    let sector = ctx.sector_for(spec)?;
    let points = path.discretize(steps);
    let states: Vec<Vec<C64>> = points
        .par_iter()
        .map(|p| Ok(ground_state(&spec.with_params(p)?, &sector, &ctx.solver, true)?.vector))
        .collect::<Result<_>>()?;
    let mut product = C64::new(1.0, 0.0);
    for j in 0..states.len() {
        let o = dot(&states[j], &states[(j + 1) % states.len()]);
        let n = o.norm();
        if n < 1e-12 {
            return Err(Error::BadData("consecutive loop states are orthogonal; refine the loop".into()));
        }
        product *= o / n;
    }
    Ok(wrap_phase(-product.arg()))
}

/// Berry phase `γ = −Arg Π_j ⟨ψ(p_j)|ψ(p_{j+1})⟩` around `path`, with each
/// edge cut into `steps_per_edge` segments. With `refine`, the phase is
/// recomputed at twice the resolution.
pub fn berry_phase_loop(
    spec: &ModelSpec,
    path: &ParameterLoop,
    steps_per_edge: usize,
    refine: bool,
    ctx: &QgtContext,
) -> Result<LoopPhase> {
    let m = spec.num_params();
    if m < 2 {
        return Err(Error::BadData("Berry phases need at least two parameters".into()));
    }
    if path.vertices.len() < 2 || path.vertices.iter().any(|v| v.len() != m) {
        return Err(Error::BadData(format!("a loop needs at least two vertices of length {m}")));
    }
    if steps_per_edge == 0 {
        return Err(Error::BadData("steps_per_edge must be positive".into()));
    }
    let first = &path.vertices[0];
    let last = path.vertices.last().expect("nonempty");
    if first != last {
        let sector = ctx.sector_for(spec)?;
        let a = ground_state(&spec.with_params(first)?, &sector, &ctx.solver, true)?;
        let b = ground_state(&spec.with_params(last)?, &sector, &ctx.solver, true)?;
        let fidelity = dot(&a.vector, &b.vector).norm();
        if fidelity < 1.0 - 1e-8 {
            return Err(Error::LoopNotClosed { fidelity });
        }
    }
    let phase = loop_phase_once(spec, path, steps_per_edge, ctx)?;
    let refined_phase = if refine { Some(loop_phase_once(spec, path, 2 * steps_per_edge, ctx)?) } else { None };
    Ok(LoopPhase { phase, points: path.vertices.len().saturating_sub(1) * steps_per_edge, refined_phase })
}
