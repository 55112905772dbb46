use std::f64::consts::PI;

use approx::assert_abs_diff_eq;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qgt_core::eigen::{dense_spectrum, solve_sector, SolverOptions};
use qgt_core::geometry::{
    berry_curvature_plaquette, berry_phase_loop, fidelity, qgt_bound_check, qgt_corr_integral, qgt_fd_overlap,
    qgt_fd_overlap_with, qgt_from_spectrum, qgt_spectral_sum, wrap_phase, ParameterLoop, ParameterMesh, QgtContext,
    QgtResult, Quadrature,
};
use qgt_core::hamiltonian::{build_hamiltonian, build_perturbations};
use qgt_core::linalg::{dot, scale};
use qgt_core::{ModelSpec, C64};

fn ctx() -> QgtContext {
    QgtContext::default()
}

/// Lanczos for every sector above 64 states; faster for the many small
/// solves of meshes and loops.
fn sparse_ctx() -> QgtContext {
    QgtContext::new(SolverOptions { dense_threshold: 64, ..Default::default() })
}

fn ground(spec: &ModelSpec, ctx: &QgtContext) -> Vec<C64> {
    let sector = ctx.sector_for(spec).unwrap();
    solve_sector(spec, &sector, 1, &ctx.solver).unwrap().eigenvectors.swap_remove(0)
}

#[test]
fn routes_agree_for_xxz_twelve_sites() {
    let spec = ModelSpec::xxz(12, 0.5).unwrap();
    let spectral = qgt_spectral_sum(&spec, &ctx()).unwrap();
    let fd = qgt_fd_overlap(&spec, &[1e-3], &ctx()).unwrap();
    let corr = qgt_corr_integral(&spec, Quadrature::adaptive(), &ctx()).unwrap();
    assert!(fd.relative_difference(&spectral, 1e-300) <= 1e-5);
    assert!(corr.relative_difference(&spectral, 1e-300) <= 1e-8);
    assert!(spectral.metric[[0, 0]] > 0.0);
}

#[test]
fn adaptive_quadrature_matches_closed_form() {
    let spec = ModelSpec::xxz(10, 0.3).unwrap();
    let closed = qgt_corr_integral(&spec, Quadrature::ClosedForm, &ctx()).unwrap();
    let adaptive = qgt_corr_integral(&spec, Quadrature::adaptive(), &ctx()).unwrap();
    assert!(adaptive.relative_difference(&closed, 1e-300) <= 1e-8);
    assert!(adaptive.diagnostics.quadrature_evaluations.unwrap() > 0);
}

#[test]
fn fidelity_drop_matches_metric() {
    let spec = ModelSpec::xxz(14, 0.5).unwrap();
    let g = qgt_spectral_sum(&spec, &ctx()).unwrap().metric[[0, 0]];
    let delta = 1e-3;
    let f = fidelity(&spec, &[0.5 + delta], &ctx()).unwrap();
    assert!(((1.0 - f.value) - g * delta * delta / 2.0).abs() <= 1e-10);
    let back = fidelity(&spec.with_params(&[0.5 + delta]).unwrap(), &[0.5], &ctx()).unwrap();
    assert!((back.value - f.value).abs() <= 1e-12);
}

#[test]
fn fidelity_hessian_with_richardson() {
    let spec = ModelSpec::xxz(10, 0.5).unwrap();
    let g = qgt_spectral_sum(&spec, &ctx()).unwrap().metric[[0, 0]];
    let ratio = |delta: f64| 2.0 * (1.0 - fidelity(&spec, &[0.5 + delta], &ctx()).unwrap().value) / (delta * delta);
    let errors: Vec<f64> = [1e-2, 1e-3, 1e-4].iter().map(|d| (ratio(*d) - g).abs() / g).collect();
    // Leading error is linear in δ until eigenvector precision takes over.
    assert!((errors[0] / errors[1] - 10.0).abs() < 1.0, "{errors:?}");
    assert!(errors[2] < 1e-4, "{errors:?}");
    // Removing the O(δ) term leaves O(δ²).
    let extrapolated = (10.0 * ratio(1e-3) - ratio(1e-2)) / 9.0;
    assert!((extrapolated - g).abs() / g < 1e-5, "{} vs {g}", extrapolated);
}

#[test]
fn pipeline_is_phase_insensitive() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let spec = ModelSpec::rotated_xy(6, 0.8, 0.4).unwrap();
    let c = ctx();
    let sector = c.sector_for(&spec).unwrap();
    let center = ground(&spec, &c);
    let solve = |p: &[f64]| Ok(ground(&spec.with_params(p).unwrap(), &c));
    let plain = qgt_fd_overlap_with(&spec, &[1e-3, 1e-3], &center, f64::NAN, solve).unwrap();

    let mut rotated_center = center.clone();
    scale(&mut rotated_center, C64::from_polar(1.0, rng.random_range(0.0..2.0 * PI)));
    let mut phases: Vec<f64> = (0..4).map(|_| rng.random_range(0.0..2.0 * PI)).collect();
    let shuffled = qgt_fd_overlap_with(&spec, &[1e-3, 1e-3], &rotated_center, f64::NAN, |p| {
        let mut v = ground(&spec.with_params(p).unwrap(), &c);
        scale(&mut v, C64::from_polar(1.0, phases.pop().unwrap()));
        Ok(v)
    })
    .unwrap();
    assert!(plain.tensor.iter().zip(shuffled.tensor.iter()).all(|(a, b)| (a - b).norm() <= 1e-10));

    let h = build_hamiltonian(&spec, &sector).unwrap();
    let perturbations = build_perturbations(&spec, &sector).unwrap();
    let mut spectrum = dense_spectrum(&h, &c.solver).unwrap();
    let reference = qgt_from_spectrum(&spec, &spectrum, &perturbations, 1e-8).unwrap();
    for v in spectrum.eigenvectors.iter_mut() {
        scale(v, C64::from_polar(1.0, rng.random_range(0.0..2.0 * PI)));
    }
    let after = qgt_from_spectrum(&spec, &spectrum, &perturbations, 1e-8).unwrap();
    assert!(reference.tensor.iter().zip(after.tensor.iter()).all(|(a, b)| (a - b).norm() <= 1e-10));
}

fn assert_psd_and_parts(q: &QgtResult) {
    let m = q.dim();
    for i in 0..m {
        for j in 0..m {
            assert!((q.metric[[i, j]] - q.metric[[j, i]]).abs() <= 1e-12);
            assert!((q.curvature[[i, j]] + q.curvature[[j, i]]).abs() <= 1e-12);
            assert_eq!(q.metric[[i, j]], q.tensor[[i, j]].re);
            assert_eq!(q.curvature[[i, j]], q.tensor[[i, j]].im);
        }
    }
    assert!(q.eigenvalues().unwrap().iter().all(|e| *e >= -1e-10));
}

#[test]
fn real_ground_states_have_no_curvature() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for _ in 0..12 {
        let l = [6, 8, 10][rng.random_range(0..3)];
        let spec = ModelSpec::xxz_field(l, rng.random_range(-0.9..3.0), rng.random_range(-0.5..0.5)).unwrap();
        for q in [qgt_spectral_sum(&spec, &ctx()).unwrap(), qgt_fd_overlap(&spec, &[1e-3, 1e-3], &ctx()).unwrap()] {
            assert!(q.curvature.iter().all(|f| f.abs() <= 1e-10));
            assert_psd_and_parts(&q);
        }
        let tfim = ModelSpec::tfim(l, rng.random_range(0.2..2.0)).unwrap();
        let q = qgt_spectral_sum(&tfim, &ctx()).unwrap();
        assert!(q.curvature.iter().all(|f| f.abs() <= 1e-10));
        assert_psd_and_parts(&q);
    }
}

#[test]
fn complex_models_are_positive_semidefinite() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..10 {
        let rot = ModelSpec::rotated_xy(6, rng.random_range(0.3..2.0), rng.random_range(-PI..PI)).unwrap();
        assert_psd_and_parts(&qgt_spectral_sum(&rot, &ctx()).unwrap());
        let qubit = ModelSpec::qubit(rng.random_range(0.1..3.0), rng.random_range(-PI..PI)).unwrap();
        assert_psd_and_parts(&qgt_spectral_sum(&qubit, &ctx()).unwrap());
    }
}

#[test]
fn randomized_bound_draws_hold() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for draw in 0..100 {
        let l = if draw % 25 == 0 { 14 } else { [8, 10, 12][rng.random_range(0..3)] };
        let lambda = if rng.random_bool(0.5) { rng.random_range(-0.9..0.9) } else { rng.random_range(1.2..3.0) };
        let spec = ModelSpec::xxz_field(l, lambda, rng.random_range(-0.5..0.5)).unwrap();
        let angle: f64 = rng.random_range(0.0..2.0 * PI);
        let b = qgt_bound_check(&spec, &[angle.cos(), angle.sin()], &ctx()).unwrap();
        assert!(b.holds, "draw {draw}: {} > {}", b.lhs, b.rhs);
    }
}

#[test]
fn bloch_sphere_plaquettes() {
    let spec = ModelSpec::qubit(1.0, 0.0).unwrap();
    let mesh = ParameterMesh::new([0, 1], [0.1, 0.0], [PI - 0.1, 2.0 * PI], [200, 200]);
    let field = berry_curvature_plaquette(&spec, &mesh, &ctx()).unwrap();
    for (i, theta) in field.centers[0].iter().enumerate() {
        for j in 0..200 {
            assert!((field.values[[i, j]] - theta.sin() / 4.0).abs() <= 1e-4);
        }
    }
}

#[test]
fn real_models_have_flat_plaquettes_and_trivial_loops() {
    let spec = ModelSpec::xxz_field(8, 0.4, 0.1).unwrap();
    let mesh = ParameterMesh::new([0, 1], [0.2, -0.3], [0.8, 0.3], [10, 10]);
    let field = berry_curvature_plaquette(&spec, &mesh, &ctx()).unwrap();
    assert!(field.values.iter().all(|f| f.abs() <= 1e-10));
    let path = ParameterLoop::rectangle(&spec.params, [0, 1], [0.2, -0.3], [0.8, 0.3]);
    let r = berry_phase_loop(&spec, &path, 20, false, &ctx()).unwrap();
    assert!(wrap_phase(r.phase).abs() <= 1e-8);
}

#[test]
fn rotated_xy_plaquettes_match_spectral_curvature() {
    let spec = ModelSpec::rotated_xy(8, 1.0, 0.0).unwrap();
    let mesh = ParameterMesh::new([0, 1], [0.8, 0.0], [1.2, 0.1], [20, 4]);
    let field = berry_curvature_plaquette(&spec, &mesh, &sparse_ctx()).unwrap();
    for (i, h) in field.centers[0].iter().enumerate() {
        for (j, phi) in field.centers[1].iter().enumerate() {
            let q = qgt_spectral_sum(&spec.with_params(&[*h, *phi]).unwrap(), &ctx()).unwrap();
            let exact = q.curvature[[0, 1]];
            assert!((field.values[[i, j]] - exact).abs() <= 1e-3 * exact.abs(), "{} vs {exact}", field.values[[i, j]]);
        }
    }
}

/// The rotation makes `γ(h)` for a full turn of the angle equal to
/// `π ⟨Σσz⟩`, and `⟨Σσz⟩ = −⟨∂_h H⟩`.
#[test]
fn angle_circle_phase_is_magnetization() {
    let c = sparse_ctx();
    for h in [0.7, 1.0, 1.6] {
        let spec = ModelSpec::rotated_xy(8, h, 0.0).unwrap();
        let path = ParameterLoop::angle_circle(&spec.params, 1, 0.0);
        let r = berry_phase_loop(&spec, &path, 256, true, &c).unwrap();
        let (coarse, fine) = (r.phase, r.refined_phase.unwrap());
        let extrapolated = fine + wrap_phase(fine - coarse) / 3.0;

        let sector = c.sector_for(&spec).unwrap();
        let psi = ground(&spec, &c);
        let dh = &build_perturbations(&spec, &sector).unwrap()[0];
        let magnetization = -dot(&psi, &dh.apply(&psi).unwrap()).re;
        assert!(wrap_phase(extrapolated - PI * magnetization).abs() <= 1e-6, "h = {h}");
        assert!(r.refinement_change().unwrap() < 1e-3);
    }
}

/// The loop around a rectangle and the plaquette sum over a mesh sharing its
/// boundary nodes agree: interior links cancel in the product.
#[test]
fn stokes_on_shared_nodes() {
    let spec = ModelSpec::rotated_xy(8, 1.0, 0.0).unwrap();
    let c = sparse_ctx();
    let (lower, upper) = ([0.8, 0.0], [1.2, 2.0 * PI]);
    let mesh = ParameterMesh::new([0, 1], lower, upper, [16, 16]);
    let field = berry_curvature_plaquette(&spec, &mesh, &c).unwrap();
    let path = ParameterLoop::rectangle(&spec.params, [0, 1], lower, upper);
    let r = berry_phase_loop(&spec, &path, 16, false, &c).unwrap();
    assert!(wrap_phase(r.phase - field.enclosed_phase()).abs() <= 1e-9);
    // Against the continuum: γ(upper) − γ(lower) = π Δ⟨Σσz⟩.
    assert!(field.enclosed_phase().abs() > 0.1);
}

#[test]
fn bloch_loop_phases() {
    for theta in [0.3, 1.0, PI / 2.0, 2.5] {
        let spec = ModelSpec::qubit(theta, 0.0).unwrap();
        let path = ParameterLoop::angle_circle(&spec.params, 1, 0.0);
        let r = berry_phase_loop(&spec, &path, 4096, true, &ctx()).unwrap();
        assert_abs_diff_eq!(wrap_phase(r.phase + PI * (1.0 - theta.cos())), 0.0, epsilon = 1e-6);
        assert!(r.refinement_change().unwrap() < 1e-6);
    }
}
