//! The gap bound `|⟨φ|Q|φ⟩| ≤ ε_1^{−2} (⟨δH δH†⟩ − |⟨δH⟩|²)` with
//! `δH = Σ_μ φ_μ ∂_μH`, which holds for any unit direction `φ` because every
//! excitation in the spectral sum has `ε_n ≥ ε_1`.

use ndarray::Array2;
use num_complex::Complex64;

use super::{qgt_fd_overlap, qgt_from_spectrum, QgtContext};
use crate::eigen::{dense_spectrum, lowest_states};
use crate::error::{Error, Result};
use crate::hamiltonian::{build_hamiltonian, build_perturbations};
use crate::linalg::{axpy, dot, norm};
use crate::model::ModelSpec;
use crate::sparse::SparseOperator;

type C64 = Complex64;

/// Relative slack allowed on the right-hand side.
pub const BOUND_SLACK: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub gap: f64,
    /// `⟨δH δH†⟩ − |⟨δH⟩|²`.
    pub variance: f64,
    pub holds: bool,
}

/// Evaluates both sides from a computed `Q`, the ground state, the
/// perturbations and the in-sector gap.
pub fn bound_from_parts(
    q: &Array2<C64>,
    direction: &[f64],
    ground: &[C64],
    perturbations: &[SparseOperator],
    gap: f64,
) -> Result<BoundCheck> {
    let m = q.nrows();
    if direction.len() != m || perturbations.len() != m {
        return Err(Error::DimensionMismatch { expected: m, found: direction.len() });
    }
    let length = direction.iter().map(|x| x * x).sum::<f64>().sqrt();
    if (length - 1.0).abs() > 1e-12 {
        return Err(Error::BadData(format!("direction must be a unit vector (norm {length})")));
    }
    if !(gap > 0.0) {
        return Err(Error::GaplessAtFiniteSize { gap });
    }
    let mut lhs = C64::new(0.0, 0.0);
    for mu in 0..m {
        for nu in 0..m {
            lhs += q[[mu, nu]] * direction[mu] * direction[nu];
        }
    }
    let mut image = vec![C64::new(0.0, 0.0); ground.len()];
    for (phi, op) in direction.iter().zip(perturbations) {
        axpy(C64::new(*phi, 0.0), &op.apply(ground)?, &mut image);
    }
    let mean = dot(ground, &image);
    let variance = (norm(&image).powi(2) - mean.norm_sqr()).max(0.0);
    let lhs = lhs.norm();
    let rhs = variance / (gap * gap);
    Ok(BoundCheck { lhs, rhs, gap, variance, holds: lhs <= rhs * (1.0 + BOUND_SLACK) })
}

/// Checks the bound at the model's parameter point along `direction`.
/// `Q` comes from the complete spectral sum when the sector fits the dense
/// cap, from finite differences (step `1e-4`) otherwise.
pub fn qgt_bound_check(spec: &ModelSpec, direction: &[f64], ctx: &QgtContext) -> Result<BoundCheck> {
    let sector = ctx.sector_for(spec)?;
    let h = build_hamiltonian(spec, &sector)?;
    let perturbations = build_perturbations(spec, &sector)?;
    let gapless = |e: Error| match e {
        Error::DegenerateGroundState { gap, .. } => Error::GaplessAtFiniteSize { gap },
        other => other,
    };
    if sector.dimension() <= ctx.solver.dense_cap {
        let spectrum = dense_spectrum(&h, &ctx.solver)?;
        let q = qgt_from_spectrum(spec, &spectrum, &perturbations, ctx.solver.degeneracy_tol).map_err(gapless)?;
        bound_from_parts(&q.tensor, direction, spectrum.ground_state(), &perturbations, q.diagnostics.gap)
    } else {
        let spectrum = lowest_states(&h, 2, &ctx.solver)?;
        let gap = spectrum.require_unique_ground_state(ctx.solver.degeneracy_tol).map_err(gapless)?;
        let q = qgt_fd_overlap(spec, &vec![1e-4; spec.num_params()], ctx)?;
        bound_from_parts(&q.tensor, direction, spectrum.ground_state(), &perturbations, gap)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Boundary, ModelKind};
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    #[test]
    fn two_level_system_saturates() {
        let spec = ModelSpec::qubit(PI / 2.0, 0.0).unwrap();
        let b = qgt_bound_check(&spec, &[1.0, 0.0], &QgtContext::default()).unwrap();
        assert_abs_diff_eq!(b.lhs, 0.25, epsilon = 1e-14);
        assert_abs_diff_eq!(b.rhs, 0.25, epsilon = 1e-14);
        assert!((b.lhs - b.rhs).abs() <= 1e-12);
        assert!(b.holds);
    }

    #[test]
    fn two_site_singlet_trivially_holds() {
        let spec = ModelSpec::new(ModelKind::Xxz, 2, Boundary::Open, vec![0.4]).unwrap();
        let b = qgt_bound_check(&spec, &[1.0], &QgtContext::default()).unwrap();
        assert_abs_diff_eq!(b.lhs, 0.0, epsilon = 1e-14);
        assert!(b.holds);
    }

    #[test]
    fn direction_must_be_unit() {
        let spec = ModelSpec::qubit(1.0, 0.5).unwrap();
        assert!(qgt_bound_check(&spec, &[1.0, 1.0], &QgtContext::default()).is_err());
    }

    #[test]
    fn degenerate_point_is_gapless() {
        let spec = ModelSpec::new(ModelKind::Xxz, 2, Boundary::Open, vec![1.0])
            .unwrap()
            .with_coupling(-1.0)
            .unwrap();
        let ctx = QgtContext::default().with_sector(super::super::SectorChoice::Full);
        let err = qgt_bound_check(&spec, &[1.0], &ctx).unwrap_err();
        assert!(matches!(err, Error::GaplessAtFiniteSize { .. }));
    }
}
