//! Overlap-based quantities: fidelity and the finite-difference QGT.

use ndarray::Array2;
use num_complex::Complex64;

use super::{ground_state, QgtContext, QgtDiagnostics, QgtMethod, QgtResult};
use crate::error::{Error, Result};
use crate::linalg::{axpy, dot, scale};
use crate::model::ModelSpec;

type C64 = Complex64;

/// `|⟨ψ_0(λ)|ψ_0(λ′)⟩|` on a fixed number of sites.
#[derive(Debug, Clone, PartialEq)]
pub struct FidelityRecord {
    pub params: Vec<f64>,
    pub other: Vec<f64>,
    pub value: f64,
    pub sites: usize,
}

pub fn fidelity(spec: &ModelSpec, other: &[f64], ctx: &QgtContext) -> Result<FidelityRecord> {
    let sector = ctx.sector_for(spec)?;
    let a = ground_state(spec, &sector, &ctx.solver, true)?;
    let value = if other == spec.params.as_slice() {
        dot(&a.vector, &a.vector).norm()
    } else {
        let b = ground_state(&spec.with_params(other)?, &sector, &ctx.solver, true)?;
        dot(&a.vector, &b.vector).norm()
    };
    Ok(FidelityRecord {
        params: spec.params.clone(),
        other: other.to_vec(),
        value: value.min(1.0),
        sites: spec.sites,
    })
}

/// Finite-difference QGT with steps `δ_μ`, solving every stencil point with
/// the context's solver.
pub fn qgt_fd_overlap(spec: &ModelSpec, steps: &[f64], ctx: &QgtContext) -> Result<QgtResult> {
    let sector = ctx.sector_for(spec)?;
    let center = ground_state(spec, &sector, &ctx.solver, true)?;
    let gap = center.gap.unwrap_or(f64::NAN);
    qgt_fd_overlap_with(spec, steps, &center.vector, gap, |p| {
        let shifted = spec.with_params(p)?;
        Ok(ground_state(&shifted, &sector, &ctx.solver, false)?.vector)
    })
}

/// Finite-difference QGT around the ground state `center`, with stencil
/// states supplied by `solve`.
///
/// Each stencil state is rotated so its overlap with `center` is real and
/// positive, then `|∂_μψ⟩ ≈ (ψ(λ + δ_μ e_μ) − ψ(λ − δ_μ e_μ)) / 2δ_μ` and
/// `Q_{μν} = ⟨∂_μψ|∂_νψ⟩ − ⟨∂_μψ|ψ⟩⟨ψ|∂_νψ⟩`. Error is `O(δ²)`. A stencil
/// that straddles a level crossing is not detected.
pub fn qgt_fd_overlap_with<F>(
    spec: &ModelSpec,
    steps: &[f64],
    center: &[C64],
    gap: f64,
    mut solve: F,
) -> Result<QgtResult>
where
    F: FnMut(&[f64]) -> Result<Vec<C64>>,
{
    let m = spec.num_params();
    if steps.len() != m {
        return Err(Error::DimensionMismatch { expected: m, found: steps.len() });
    }
    if let Some(bad) = steps.iter().find(|d| !(**d > 0.0)) {
        return Err(Error::BadData(format!("finite-difference steps must be positive, got {bad}")));
    }

    let mut fidelities = Vec::with_capacity(2 * m);
    let mut derivatives: Vec<Vec<C64>> = Vec::with_capacity(m);
    for mu in 0..m {
        let mut stencil = [Vec::new(), Vec::new()];
        for (slot, sign) in [1.0, -1.0].into_iter().enumerate() {
            let mut p = spec.params.clone();
            p[mu] += sign * steps[mu];
            let mut state = solve(&p)?;
            let overlap = dot(center, &state);
            let f = overlap.norm();
            if f < 1e-8 {
                return Err(Error::BadData(format!(
                    "stencil state at {p:?} is orthogonal to the center ground state"
                )));
            }
            scale(&mut state, overlap.conj() / f);
            fidelities.push(f.min(1.0));
            stencil[slot] = state;
        }
        let [mut plus, minus] = stencil;
        axpy(C64::new(-1.0, 0.0), &minus, &mut plus);
        scale(&mut plus, C64::new(0.5 / steps[mu], 0.0));
        derivatives.push(plus);
    }

    let projections: Vec<C64> = derivatives.iter().map(|d| dot(center, d)).collect();
    let mut q = Array2::<C64>::zeros((m, m));
    for mu in 0..m {
        for nu in 0..m {
            q[[mu, nu]] = dot(&derivatives[mu], &derivatives[nu]) - projections[mu].conj() * projections[nu];
        }
    }
    let diagnostics = QgtDiagnostics { gap, fidelities, ..Default::default() };
    Ok(QgtResult::new(spec, QgtMethod::FdOverlap, q, diagnostics))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Boundary, ModelKind};
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    #[test]
    fn fidelity_with_itself_is_one() {
        let spec = ModelSpec::xxz(8, 0.4).unwrap();
        let f = fidelity(&spec, &[0.4], &QgtContext::default()).unwrap();
        assert_abs_diff_eq!(f.value, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn two_site_singlet_is_parameter_independent() {
        let spec = ModelSpec::new(ModelKind::Xxz, 2, Boundary::Open, vec![0.3]).unwrap();
        let ctx = QgtContext::default();
        for other in [-0.9, 0.0, 1.0, 5.0] {
            assert_abs_diff_eq!(fidelity(&spec, &[other], &ctx).unwrap().value, 1.0, epsilon = 1e-12);
        }
        let q = qgt_fd_overlap(&spec, &[1e-3], &ctx).unwrap();
        assert_abs_diff_eq!(q.max_abs(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn bloch_sphere_tensor() {
        let theta = PI / 3.0;
        let spec = ModelSpec::qubit(theta, 0.0).unwrap();
        let q = qgt_fd_overlap(&spec, &[1e-4, 1e-4], &QgtContext::default()).unwrap();
        assert_abs_diff_eq!(q.metric[[0, 0]], 0.25, epsilon = 1e-6);
        assert_abs_diff_eq!(q.metric[[1, 1]], theta.sin().powi(2) / 4.0, epsilon = 1e-6);
        assert_abs_diff_eq!(q.metric[[0, 1]], 0.0, epsilon = 1e-6);
        assert_abs_diff_eq!(q.curvature[[0, 1]], theta.sin() / 4.0, epsilon = 1e-6);
    }

    #[test]
    fn rejects_bad_steps() {
        let spec = ModelSpec::qubit(1.0, 0.0).unwrap();
        let ctx = QgtContext::default();
        assert!(qgt_fd_overlap(&spec, &[1e-3], &ctx).is_err());
        assert!(qgt_fd_overlap(&spec, &[1e-3, 0.0], &ctx).is_err());
    }
}
