//! Quantum geometric tensor `Q_{μν} = ⟨∂_μψ|∂_νψ⟩ − ⟨∂_μψ|ψ⟩⟨ψ|∂_νψ⟩` of the
//! ground-state map `λ ↦ |ψ_0(λ)⟩`, its real part `g` (metric, fidelity
//! susceptibility) and imaginary part `F` (Berry curvature).
//!
//! Three independent routes compute `Q`:
//!
//! * [`qgt_fd_overlap`]: central differences of gauge-fixed ground states.
//! * [`qgt_spectral_sum`]: `Σ_{n≠0} ⟨0|∂_μH|n⟩⟨n|∂_νH|0⟩ / ε_n²` over the full
//!   sector spectrum.
//! * [`qgt_corr_integral`]: `∫_0^∞ τ G_{μν}(τ) dτ` over the connected
//!   imaginary-time correlator of the perturbations.
//!
//! The Berry curvature is also available as a gauge-invariant plaquette
//! field, and closed-loop Berry phases as products of overlaps.

mod berry;
mod bound;
mod overlap;
mod quadrature;
mod spectral;

pub use berry::{
    berry_curvature_plaquette, berry_phase_loop, wrap_phase, CurvatureField, LoopPhase, ParameterLoop, ParameterMesh,
};
pub use bound::{bound_from_parts, qgt_bound_check, BoundCheck};
pub use overlap::{fidelity, qgt_fd_overlap, qgt_fd_overlap_with, FidelityRecord};
pub use quadrature::{integrate_adaptive, QuadratureResult};
pub use spectral::{
    correlation_function, qgt_corr_integral, qgt_corr_integral_from, qgt_from_spectrum, qgt_spectral_sum,
    qgt_spectral_sum_truncated, Quadrature, Transitions,
};

use std::fmt;
use std::str::FromStr;

use ndarray::Array2;
use num_complex::Complex64;

use crate::basis::{self, SymmetrySector};
use crate::eigen::{solve_sector, SolverOptions};
use crate::error::{Error, Result};
use crate::model::ModelSpec;

type C64 = Complex64;

/// Which sector the ground state is searched in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SectorChoice {
    /// Sz = 0 for XXZ, the full space otherwise.
    #[default]
    Default,
    TotalSz(i32),
    Full,
}

/// Solver settings shared by every route.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct QgtContext {
    pub solver: SolverOptions,
    pub sector: SectorChoice,
}

impl QgtContext {
    pub fn new(solver: SolverOptions) -> Self {
        QgtContext { solver, sector: SectorChoice::Default }
    }

    pub fn with_sector(mut self, sector: SectorChoice) -> Self {
        self.sector = sector;
        self
    }

    pub fn sector_for(&self, spec: &ModelSpec) -> Result<SymmetrySector> {
        let cap = self.solver.dimension_cap;
        match self.sector {
            SectorChoice::Default => basis::default_sector_capped(spec, cap),
            SectorChoice::TotalSz(two_sz) => basis::sector_basis_capped(spec, two_sz, cap),
            SectorChoice::Full => basis::full_space_capped(spec, cap),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum QgtMethod {
    FdOverlap,
    SpectralSum,
    CorrIntegral,
}

impl QgtMethod {
    pub fn name(self) -> &'static str {
        match self {
            QgtMethod::FdOverlap => "fd-overlap",
            QgtMethod::SpectralSum => "spectral-sum",
            QgtMethod::CorrIntegral => "corr-integral",
        }
    }
}

impl fmt::Display for QgtMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for QgtMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "fd" | "fd-overlap" => Ok(QgtMethod::FdOverlap),
            "spectral" | "spectral-sum" => Ok(QgtMethod::SpectralSum),
            "corr" | "corr-integral" => Ok(QgtMethod::CorrIntegral),
            other => Err(Error::BadData(format!("unknown QGT method `{other}`"))),
        }
    }
}

/// Truncated spectral sums carry an upper bound on the missing tail.
#[derive(Debug, Clone, PartialEq)]
pub struct Truncation {
    /// Levels included (ground state plus `levels − 1` excitations).
    pub levels: usize,
    /// Bound on the omitted part of each diagonal component `Q_{μμ}`.
    pub tail_bound: Vec<f64>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct QgtDiagnostics {
    /// In-sector gap `ε_1` at the evaluation point.
    pub gap: f64,
    /// Fidelities `|⟨ψ_0(λ)|ψ_0(λ ± δ e_μ)⟩|` of the finite-difference stencil.
    pub fidelities: Vec<f64>,
    pub truncation: Option<Truncation>,
    /// Integrand evaluations used by adaptive quadrature.
    pub quadrature_evaluations: Option<usize>,
}

impl QgtDiagnostics {
    pub fn min_fidelity(&self) -> Option<f64> {
        self.fidelities.iter().copied().reduce(f64::min)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QgtResult {
    pub params: Vec<f64>,
    pub sites: usize,
    pub method: QgtMethod,
    /// Hermitian `Q`.
    pub tensor: Array2<C64>,
    /// `g = Re Q`, symmetric.
    pub metric: Array2<f64>,
    /// `F = Im Q`, antisymmetric.
    pub curvature: Array2<f64>,
    /// `q = Q / L`.
    pub intensive: Array2<C64>,
    pub diagnostics: QgtDiagnostics,
}

impl QgtResult {
    /// Hermitizes `raw` and derives `g`, `F` and `q`.
    pub fn new(spec: &ModelSpec, method: QgtMethod, raw: Array2<C64>, diagnostics: QgtDiagnostics) -> Self {
        let m = raw.nrows();
        let mut tensor = Array2::<C64>::zeros((m, m));
        for i in 0..m {
            for j in 0..m {
                tensor[[i, j]] = (raw[[i, j]] + raw[[j, i]].conj()) * 0.5;
            }
        }
        let metric = tensor.mapv(|z| z.re);
        let curvature = tensor.mapv(|z| z.im);
        let intensive = tensor.mapv(|z| z / spec.sites as f64);
        QgtResult {
            params: spec.params.clone(),
            sites: spec.sites,
            method,
            tensor,
            metric,
            curvature,
            intensive,
            diagnostics,
        }
    }

    pub fn dim(&self) -> usize {
        self.tensor.nrows()
    }

    /// Largest entry modulus of `Q`.
    pub fn max_abs(&self) -> f64 {
        self.tensor.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// `max |Q_a − Q_b| / max(max |Q_b|, floor)`.
    pub fn relative_difference(&self, other: &QgtResult, floor: f64) -> f64 {
        let diff = self
            .tensor
            .iter()
            .zip(other.tensor.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        diff / other.max_abs().max(floor)
    }

    /// Eigenvalues of the hermitian `Q`, ascending.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        crate::dense::hermitian_eigenvalues(&self.tensor)
    }
}

/// A ground state with its in-sector gap, when known.
#[derive(Debug, Clone)]
pub(crate) struct GroundState {
    pub vector: Vec<C64>,
    pub gap: Option<f64>,
}

/// Ground state on `sector`; with `need_gap` the second level is solved as
/// well and a degenerate ground state is rejected. Dense solves always know
/// the gap and always check it.
pub(crate) fn ground_state(
    spec: &ModelSpec,
    sector: &SymmetrySector,
    solver: &SolverOptions,
    need_gap: bool,
) -> Result<GroundState> {
    let k = if need_gap { 2 } else { 1 };
    let spectrum = solve_sector(spec, sector, k, solver)?;
    let gap = spectrum.gap();
    if let Some(g) = gap {
        if g < solver.degeneracy_tol {
            return Err(Error::DegenerateGroundState { gap: g, tol: solver.degeneracy_tol });
        }
    } else if need_gap {
        return Err(Error::DegenerateGroundState { gap: 0.0, tol: solver.degeneracy_tol });
    }
    let mut eigenvectors = spectrum.eigenvectors;
    Ok(GroundState { vector: eigenvectors.swap_remove(0), gap })
}
