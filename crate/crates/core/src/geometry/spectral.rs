//! Spectral routes: the perturbative sum over excited states and the
//! imaginary-time correlation integral.

use ndarray::Array2;
use num_complex::Complex64;

use super::quadrature::integrate_adaptive;
use super::{QgtContext, QgtDiagnostics, QgtMethod, QgtResult, Truncation};
use crate::eigen::{dense_spectrum, lowest_states, SpectralData};
use crate::error::{Error, Result};
use crate::hamiltonian::{build_hamiltonian, build_perturbations};
use crate::linalg::dot;
use crate::model::ModelSpec;
use crate::sparse::SparseOperator;

type C64 = Complex64;

/// Ground-state transition data: gaps `ε_n` and matrix elements
/// `X_{nμ} = ⟨ψ_0|∂_μH|ψ_n⟩` for every excited level `n ≥ 1` in the spectrum.
#[derive(Debug, Clone)]
pub struct Transitions {
    pub gaps: Vec<f64>,
    pub amplitudes: Vec<Vec<C64>>,
    /// `⟨ψ_0|∂_μH ∂_νH|ψ_0⟩ − ⟨∂_μH⟩⟨∂_νH⟩`, the connected correlator at τ = 0⁺
    /// summed over the whole sector.
    pub covariance: Array2<C64>,
}

impl Transitions {
    pub fn from_spectrum(spectrum: &SpectralData, perturbations: &[SparseOperator], degeneracy_tol: f64) -> Result<Self> {
        spectrum.require_unique_ground_state(degeneracy_tol)?;
        let psi0 = spectrum.ground_state();
        let m = perturbations.len();
        let images: Vec<Vec<C64>> = perturbations.iter().map(|v| v.apply(psi0)).collect::<Result<_>>()?;
        let means: Vec<C64> = images.iter().map(|w| dot(psi0, w)).collect();
        let mut covariance = Array2::<C64>::zeros((m, m));
        for mu in 0..m {
            for nu in 0..m {
                covariance[[mu, nu]] = dot(&images[mu], &images[nu]) - means[mu].conj() * means[nu];
            }
        }
        let e0 = spectrum.ground_energy();
        let mut gaps = Vec::with_capacity(spectrum.len() - 1);
        let mut amplitudes = Vec::with_capacity(spectrum.len() - 1);
        for (e, v) in spectrum.eigenvalues.iter().zip(&spectrum.eigenvectors).skip(1) {
            gaps.push(e - e0);
            // ⟨ψ_0|∂H|ψ_n⟩ = conj ⟨ψ_n|∂H ψ_0⟩
            amplitudes.push(images.iter().map(|w| dot(v, w).conj()).collect());
        }
        Ok(Transitions { gaps, amplitudes, covariance })
    }

    pub fn num_params(&self) -> usize {
        self.covariance.nrows()
    }

    /// `Σ_n X_{nμ} X*_{nν} / ε_n²`.
    pub fn spectral_sum(&self) -> Array2<C64> {
        let m = self.num_params();
        let mut q = Array2::<C64>::zeros((m, m));
        for (eps, x) in self.gaps.iter().zip(&self.amplitudes) {
            let w = 1.0 / (eps * eps);
            for mu in 0..m {
                for nu in 0..m {
                    q[[mu, nu]] += x[mu] * x[nu].conj() * w;
                }
            }
        }
        q
    }
}

/// `G_{μν}(τ) = Σ_{n>0} e^{−ε_n τ} X_{nμ} X*_{nν}` for `τ ≥ 0`.
pub fn correlation_function(transitions: &Transitions, tau: f64) -> Array2<C64> {
    let m = transitions.num_params();
    let mut g = Array2::<C64>::zeros((m, m));
    if tau < 0.0 {
        return g;
    }
    for (eps, x) in transitions.gaps.iter().zip(&transitions.amplitudes) {
        let w = (-eps * tau).exp();
        if w == 0.0 {
            continue;
        }
        for mu in 0..m {
            for nu in 0..m {
                g[[mu, nu]] += x[mu] * x[nu].conj() * w;
            }
        }
    }
    g
}

/// QGT from a complete spectrum and the perturbation operators.
pub fn qgt_from_spectrum(
    spec: &ModelSpec,
    spectrum: &SpectralData,
    perturbations: &[SparseOperator],
    degeneracy_tol: f64,
) -> Result<QgtResult> {
    if !spectrum.complete {
        return Err(Error::BadData("spectral sum needs the complete sector spectrum".into()));
    }
    let t = Transitions::from_spectrum(spectrum, perturbations, degeneracy_tol)?;
    let gap = t.gaps[0];
    let diagnostics = QgtDiagnostics { gap, ..Default::default() };
    Ok(QgtResult::new(spec, QgtMethod::SpectralSum, t.spectral_sum(), diagnostics))
}

fn complete_problem(spec: &ModelSpec, ctx: &QgtContext) -> Result<(SpectralData, Vec<SparseOperator>)> {
    let sector = ctx.sector_for(spec)?;
    if sector.dimension() > ctx.solver.dense_cap {
        return Err(Error::CapacityExceeded { dimension: sector.dimension() as u128, cap: ctx.solver.dense_cap });
    }
    let h = build_hamiltonian(spec, &sector)?;
    let spectrum = dense_spectrum(&h, &ctx.solver)?;
    let perturbations = build_perturbations(spec, &sector)?;
    Ok((spectrum, perturbations))
}

/// Sum over the complete sector spectrum.
pub fn qgt_spectral_sum(spec: &ModelSpec, ctx: &QgtContext) -> Result<QgtResult> {
    let (spectrum, perturbations) = complete_problem(spec, ctx)?;
    qgt_from_spectrum(spec, &spectrum, &perturbations, ctx.solver.degeneracy_tol)
}

/// Sum over the `levels` lowest states only. The result is a lower bound on
/// the positive semidefinite `Q`; the diagnostics carry, per diagonal
/// component, the bound `(Var(∂_μH) − Σ_included |X_{nμ}|²) / ε_top²` on the
/// omitted tail, where `ε_top` is the largest included gap.
pub fn qgt_spectral_sum_truncated(spec: &ModelSpec, levels: usize, ctx: &QgtContext) -> Result<QgtResult> {
    if levels < 2 {
        return Err(Error::BadData("a truncated spectral sum needs at least two levels".into()));
    }
    let sector = ctx.sector_for(spec)?;
    let h = build_hamiltonian(spec, &sector)?;
    let spectrum = lowest_states(&h, levels.min(h.dimension()), &ctx.solver)?.truncated(levels);
    let perturbations = build_perturbations(spec, &sector)?;
    let t = Transitions::from_spectrum(&spectrum, &perturbations, ctx.solver.degeneracy_tol)?;
    let q = t.spectral_sum();
    let top = t.gaps.last().copied().unwrap_or(f64::INFINITY);
    let tail_bound = (0..t.num_params())
        .map(|mu| {
            let captured: f64 = t.amplitudes.iter().map(|x| x[mu].norm_sqr()).sum();
            let rest = (t.covariance[[mu, mu]].re - captured).max(0.0);
            if spectrum.complete {
                0.0
            } else {
                rest / (top * top)
            }
        })
        .collect();
    let diagnostics = QgtDiagnostics {
        gap: t.gaps[0],
        truncation: Some(Truncation { levels: spectrum.len(), tail_bound }),
        ..Default::default()
    };
    Ok(QgtResult::new(spec, QgtMethod::SpectralSum, q, diagnostics))
}

/// How `∫_0^∞ τ G(τ) dτ` is evaluated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Quadrature {
    /// Per-mode `∫ τ e^{−ε τ} dτ = ε^{−2}`.
    ClosedForm,
    /// Adaptive Gauss-Kronrod on the summed integrand, truncated at
    /// `τ_max` with `e^{−ε_1 τ_max} = 1e-14`.
    Adaptive { rel_tol: f64, max_evaluations: usize },
}

impl Quadrature {
    pub fn adaptive() -> Self {
        Quadrature::Adaptive { rel_tol: 1e-12, max_evaluations: 200_000 }
    }
}

/// QGT from the correlation integral on transition data.
pub fn qgt_corr_integral_from(
    spec: &ModelSpec,
    transitions: &Transitions,
    quadrature: Quadrature,
) -> Result<QgtResult> {
    let m = transitions.num_params();
    let gap = transitions.gaps.first().copied().unwrap_or(f64::NAN);
    let mut diagnostics = QgtDiagnostics { gap, ..Default::default() };
    let q = match quadrature {
        Quadrature::ClosedForm => {
            let mut q = Array2::<C64>::zeros((m, m));
            for (eps, x) in transitions.gaps.iter().zip(&transitions.amplitudes) {
                let moment = 1.0 / (eps * eps);
                for mu in 0..m {
                    for nu in 0..m {
                        q[[mu, nu]] += x[mu] * x[nu].conj() * moment;
                    }
                }
            }
            q
        }
        Quadrature::Adaptive { rel_tol, max_evaluations } => {
            let tau_max = 14.0 * std::f64::consts::LN_10 / gap;
            let r = integrate_adaptive(
                |tau| correlation_function(transitions, tau).iter().map(|g| g * tau).collect(),
                0.0,
                tau_max,
                m * m,
                0.0,
                rel_tol,
                max_evaluations,
            )?;
            diagnostics.quadrature_evaluations = Some(r.evaluations);
            Array2::from_shape_vec((m, m), r.value).expect("m x m integrand")
        }
    };
    Ok(QgtResult::new(spec, QgtMethod::CorrIntegral, q, diagnostics))
}

/// Correlation-integral route on the complete sector spectrum.
pub fn qgt_corr_integral(spec: &ModelSpec, quadrature: Quadrature, ctx: &QgtContext) -> Result<QgtResult> {
    let (spectrum, perturbations) = complete_problem(spec, ctx)?;
    let t = Transitions::from_spectrum(&spectrum, &perturbations, ctx.solver.degeneracy_tol)?;
    qgt_corr_integral_from(spec, &t, quadrature)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Boundary, ModelKind};
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    #[test]
    fn two_site_sum_vanishes() {
        let spec = ModelSpec::new(ModelKind::Xxz, 2, Boundary::Open, vec![0.7]).unwrap();
        let q = qgt_spectral_sum(&spec, &QgtContext::default()).unwrap();
        assert_abs_diff_eq!(q.max_abs(), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn bloch_equator() {
        let spec = ModelSpec::qubit(PI / 2.0, 0.0).unwrap();
        let q = qgt_spectral_sum(&spec, &QgtContext::default()).unwrap();
        assert_abs_diff_eq!(q.metric[[0, 0]], 0.25, epsilon = 1e-14);
        assert_abs_diff_eq!(q.curvature[[0, 1]], 0.25, epsilon = 1e-14);
        let c = qgt_corr_integral(&spec, Quadrature::adaptive(), &QgtContext::default()).unwrap();
        assert_abs_diff_eq!(c.metric[[0, 0]], 0.25, epsilon = 1e-8);
    }

    #[test]
    fn closed_form_equals_sum() {
        let spec = ModelSpec::rotated_xy(6, 0.8, 0.4).unwrap();
        let ctx = QgtContext::default();
        let s = qgt_spectral_sum(&spec, &ctx).unwrap();
        let c = qgt_corr_integral(&spec, Quadrature::ClosedForm, &ctx).unwrap();
        assert!(c.relative_difference(&s, 1e-300) <= 1e-14);
    }

    #[test]
    fn correlator_at_zero_is_covariance() {
        // Σ_{n>0} X_{nμ} X*_{nν} = ⟨∂_μH ∂_νH⟩ − ⟨∂_μH⟩⟨∂_νH⟩ on a complete spectrum.
        let spec = ModelSpec::rotated_xy(6, 1.1, 0.3).unwrap();
        let ctx = QgtContext::default();
        let (spectrum, perturbations) = complete_problem(&spec, &ctx).unwrap();
        let t = Transitions::from_spectrum(&spectrum, &perturbations, 1e-8).unwrap();
        let g0 = correlation_function(&t, 0.0);
        for mu in 0..2 {
            for nu in 0..2 {
                assert_abs_diff_eq!((g0[[mu, nu]] - t.covariance[[mu, nu]]).norm(), 0.0, epsilon = 1e-11);
            }
        }
    }

    #[test]
    fn truncation_bounds_the_tail() {
        let spec = ModelSpec::xxz(10, 0.5).unwrap();
        let ctx = QgtContext::default();
        let full = qgt_spectral_sum(&spec, &ctx).unwrap();
        let part = qgt_spectral_sum_truncated(&spec, 6, &ctx).unwrap();
        let tr = part.diagnostics.truncation.as_ref().unwrap();
        assert_eq!(tr.levels, 6);
        let missing = full.metric[[0, 0]] - part.metric[[0, 0]];
        assert!(missing >= -1e-12);
        assert!(missing <= tr.tail_bound[0] + 1e-12, "{missing} {:?}", tr.tail_bound);
    }

    #[test]
    fn capacity_for_complete_routes() {
        let spec = ModelSpec::xxz(12, 0.5).unwrap();
        let ctx = QgtContext::new(crate::eigen::SolverOptions { dense_cap: 500, ..Default::default() });
        assert!(matches!(qgt_spectral_sum(&spec, &ctx), Err(Error::CapacityExceeded { .. })));
    }
}
