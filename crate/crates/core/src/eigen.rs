//! Ground states and low-lying spectra of sector Hamiltonians.
//!
//! Two solvers: a dense hermitian eigensolve (LAPACK) for small sectors and
//! the oracle paths that need a complete spectrum, and a Lanczos iteration
//! with full reorthogonalization for the large sectors. Lanczos finds one
//! eigenpair per run and locks it; the next run works in the orthogonal
//! complement of every locked vector, so degenerate levels are resolved
//! with their multiplicity.

use ndarray::{Array1, Array2};
use num_complex::Complex64;

use crate::basis::{self, SymmetrySector};
use crate::dense;
use crate::error::{Error, Result};
use crate::hamiltonian::build_hamiltonian;
use crate::linalg;
use crate::model::{ModelKind, ModelSpec};
use crate::sparse::SparseOperator;

type C64 = Complex64;

#[derive(Debug, Clone, PartialEq)]
pub struct SolverOptions {
    /// Absolute residual target `‖Hv − Ev‖` for Lanczos eigenpairs.
    pub tol: f64,
    /// Krylov steps allowed per locked eigenpair.
    pub max_iter: usize,
    pub seed: u64,
    /// Largest dimension accepted by [`dense_spectrum`].
    pub dense_cap: usize,
    /// Sectors up to this dimension are solved densely by [`lowest_states`].
    pub dense_threshold: usize,
    /// A ground state with `ε_1` below this is treated as degenerate.
    pub degeneracy_tol: f64,
    /// Cap on basis dimension when building sectors.
    pub dimension_cap: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            tol: 1e-10,
            max_iter: 1000,
            seed: 42,
            dense_cap: 4096,
            dense_threshold: 512,
            degeneracy_tol: 1e-8,
            dimension_cap: basis::DEFAULT_DIMENSION_CAP,
        }
    }
}

/// One Ritz-residual estimate recorded during a Lanczos run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidualSample {
    pub run: usize,
    pub iteration: usize,
    pub ritz_value: f64,
    pub residual_estimate: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct LanczosDiagnostics {
    /// Krylov steps taken by each locking run.
    pub iterations: Vec<usize>,
    pub history: Vec<ResidualSample>,
}

impl LanczosDiagnostics {
    pub const CSV_HEADER: &'static str = "run,iteration,ritz_value,residual_estimate";

    pub fn total_iterations(&self) -> usize {
        self.iterations.iter().sum()
    }

    pub fn csv_rows(&self) -> Vec<String> {
        self.history
            .iter()
            .map(|s| format!("{},{},{:.16e},{:.16e}", s.run, s.iteration, s.ritz_value, s.residual_estimate))
            .collect()
    }
}

/// Lowest eigenpairs of a sector Hamiltonian, in ascending order.
#[derive(Debug, Clone)]
pub struct SpectralData {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Vec<Vec<C64>>,
    pub residuals: Vec<f64>,
    /// True when the whole sector spectrum is present.
    pub complete: bool,
    /// Set when `ε_1 < degeneracy_tol`.
    pub degenerate_ground_state: bool,
    pub lanczos: Option<LanczosDiagnostics>,
}

impl SpectralData {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn ground_energy(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn ground_state(&self) -> &[C64] {
        &self.eigenvectors[0]
    }

    /// `ε_n = E_n − E_0`.
    pub fn gaps(&self) -> Vec<f64> {
        let e0 = self.eigenvalues[0];
        self.eigenvalues.iter().map(|e| e - e0).collect()
    }

    /// `ε_1`, if at least two levels are known.
    pub fn gap(&self) -> Option<f64> {
        (self.len() >= 2).then(|| self.eigenvalues[1] - self.eigenvalues[0])
    }

    /// Errors unless the ground state is known to be unique.
    pub fn require_unique_ground_state(&self, tol: f64) -> Result<f64> {
        match self.gap() {
            Some(g) if g >= tol => Ok(g),
            Some(g) => Err(Error::DegenerateGroundState { gap: g, tol }),
            None => Err(Error::DegenerateGroundState { gap: 0.0, tol }),
        }
    }

    fn flag_degeneracy(mut self, tol: f64) -> Self {
        self.degenerate_ground_state = self.gap().is_some_and(|g| g < tol);
        self
    }

    /// Keeps the lowest `k` levels; the result is no longer complete.
    pub fn truncated(mut self, k: usize) -> Self {
        if k < self.len() {
            self.eigenvalues.truncate(k);
            self.eigenvectors.truncate(k);
            self.residuals.truncate(k);
            self.complete = false;
        }
        self
    }
}

fn residual(op: &SparseOperator, value: f64, vector: &[C64]) -> Result<f64> {
    let mut hv = op.apply(vector)?;
    linalg::axpy(C64::new(-value, 0.0), vector, &mut hv);
    Ok(linalg::norm(&hv))
}

/// All eigenpairs by a dense hermitian eigensolve.
pub fn dense_spectrum(op: &SparseOperator, opts: &SolverOptions) -> Result<SpectralData> {
    let n = op.dimension();
    if n > opts.dense_cap {
        return Err(Error::CapacityExceeded { dimension: n as u128, cap: opts.dense_cap });
    }
    let dense = op.to_dense();
    let (values, vectors): (Array1<f64>, Array2<C64>) = if op.is_real() {
        let (e, v) = dense::symmetric_eigen(&dense.mapv(|z| z.re))?;
        (e, v.mapv(|x| C64::new(x, 0.0)))
    } else {
        dense::hermitian_eigen(&dense)?
    };
    let eigenvectors: Vec<Vec<C64>> = vectors.columns().into_iter().map(|c| c.to_vec()).collect();
    let eigenvalues = values.to_vec();
    let residuals = eigenvalues
        .iter()
        .zip(&eigenvectors)
        .map(|(&e, v)| residual(op, e, v))
        .collect::<Result<Vec<_>>>()?;
    Ok(SpectralData {
        eigenvalues,
        eigenvectors,
        residuals,
        complete: true,
        degenerate_ground_state: false,
        lanczos: None,
    }
    .flag_degeneracy(opts.degeneracy_tol))
}

/// Lowest eigenpair of the symmetric tridiagonal matrix `(alphas, betas)`.
fn tridiagonal_lowest(alphas: &[f64], betas: &[f64]) -> Result<(f64, Array1<f64>)> {
    let m = alphas.len();
    let mut t = Array2::<f64>::zeros((m, m));
    for i in 0..m {
        t[[i, i]] = alphas[i];
        if i + 1 < m {
            t[[i, i + 1]] = betas[i];
            t[[i + 1, i]] = betas[i];
        }
    }
    let (e, v) = dense::symmetric_eigen(&t)?;
    Ok((e[0], v.column(0).to_owned()))
}

struct LockedPair {
    value: f64,
    vector: Vec<C64>,
    residual: f64,
}

/// Lowest eigenpair of `op` restricted to the complement of `locked`.
fn lanczos_lowest(
    op: &SparseOperator,
    locked: &[LockedPair],
    tol: f64,
    max_iter: usize,
    seed: u64,
    run: usize,
    diagnostics: &mut LanczosDiagnostics,
) -> Result<LockedPair> {
    const CHECK_EVERY: usize = 5;
    let n = op.dimension();
    let available = n - locked.len();

    let mut start = linalg::random_unit_vector(n, seed);
    linalg::orthogonalize(&mut start, locked.iter().map(|p| p.vector.as_slice()));
    if linalg::normalize(&mut start) < 1e-8 {
        return Err(Error::NotConverged { iterations: 0, best_residual: f64::INFINITY });
    }

    let mut basis: Vec<Vec<C64>> = vec![start];
    let mut alphas: Vec<f64> = Vec::new();
    let mut betas: Vec<f64> = Vec::new();
    let mut w = vec![C64::new(0.0, 0.0); n];
    let mut norm_estimate = 0.0f64;
    let mut best = f64::INFINITY;

    for j in 0..max_iter {
        op.apply_into(&basis[j], &mut w)?;
        let alpha = linalg::dot(&basis[j], &w).re;
        linalg::axpy(C64::new(-alpha, 0.0), &basis[j], &mut w);
        if j > 0 {
            linalg::axpy(C64::new(-betas[j - 1], 0.0), &basis[j - 1], &mut w);
        }
        linalg::orthogonalize(
            &mut w,
            locked.iter().map(|p| p.vector.as_slice()).chain(basis.iter().map(|b| b.as_slice())),
        );
        let beta = linalg::norm(&w);
        alphas.push(alpha);
        norm_estimate = norm_estimate.max(alpha.abs() + beta);

        let steps = j + 1;
        let exhausted = steps == available || beta <= 1e-12 * norm_estimate.max(1e-300);
        if steps % CHECK_EVERY == 0 || exhausted || steps == max_iter {
            let (theta, s) = tridiagonal_lowest(&alphas, &betas)?;
            let estimate = beta * s[steps - 1].abs();
            diagnostics.history.push(ResidualSample {
                run,
                iteration: steps,
                ritz_value: theta,
                residual_estimate: estimate,
            });
            if estimate <= 0.5 * tol || exhausted {
                let mut y = vec![C64::new(0.0, 0.0); n];
                for (coef, b) in s.iter().zip(&basis) {
                    linalg::axpy(C64::new(*coef, 0.0), b, &mut y);
                }
                linalg::orthogonalize(&mut y, locked.iter().map(|p| p.vector.as_slice()));
                linalg::normalize(&mut y);
                let value = op.matrix_element(&y, &y)?.re;
                let r = residual(op, value, &y)?;
                best = best.min(r);
                if r <= tol {
                    diagnostics.iterations.push(steps);
                    return Ok(LockedPair { value, vector: y, residual: r });
                }
                if exhausted {
                    diagnostics.iterations.push(steps);
                    return Err(Error::NotConverged { iterations: steps, best_residual: best });
                }
            }
        }

        betas.push(beta);
        let mut next = w.clone();
        linalg::scale(&mut next, C64::new(1.0 / beta, 0.0));
        basis.push(next);
    }
    diagnostics.iterations.push(max_iter);
    Err(Error::NotConverged { iterations: max_iter, best_residual: best })
}

/// The `k` lowest eigenpairs by Lanczos with full reorthogonalization.
///
/// Deterministic for fixed `(op, k, tol, max_iter, seed)`. A ground state
/// with `ε_1 < 1e-8` is flagged on the result, not rejected here.
pub fn lanczos_lowest_k(op: &SparseOperator, k: usize, tol: f64, max_iter: usize, seed: u64) -> Result<SpectralData> {
    lanczos_with_degeneracy_tol(op, k, tol, max_iter, seed, SolverOptions::default().degeneracy_tol)
}

fn lanczos_with_degeneracy_tol(
    op: &SparseOperator,
    k: usize,
    tol: f64,
    max_iter: usize,
    seed: u64,
    degeneracy_tol: f64,
) -> Result<SpectralData> {
    let n = op.dimension();
    if k == 0 || k > n {
        return Err(Error::DimensionMismatch { expected: n.min(k.max(1)), found: k });
    }
    if !op.is_hermitian() {
        return Err(Error::Linalg("Lanczos requires a hermitian operator".into()));
    }
    let mut diagnostics = LanczosDiagnostics::default();
    let mut locked: Vec<LockedPair> = Vec::with_capacity(k);
    for run in 0..k {
        let pair = lanczos_lowest(op, &locked, tol, max_iter, seed.wrapping_add(run as u64), run, &mut diagnostics)?;
        locked.push(pair);
    }
    locked.sort_by(|a, b| a.value.total_cmp(&b.value));
    Ok(SpectralData {
        eigenvalues: locked.iter().map(|p| p.value).collect(),
        residuals: locked.iter().map(|p| p.residual).collect(),
        eigenvectors: locked.into_iter().map(|p| p.vector).collect(),
        complete: k == n,
        degenerate_ground_state: false,
        lanczos: Some(diagnostics),
    }
    .flag_degeneracy(degeneracy_tol))
}

/// At least the `k` lowest levels: dense (complete) for small sectors,
/// Lanczos otherwise.
pub fn lowest_states(op: &SparseOperator, k: usize, opts: &SolverOptions) -> Result<SpectralData> {
    if op.dimension() <= opts.dense_threshold.min(opts.dense_cap) {
        dense_spectrum(op, opts)
    } else {
        lanczos_with_degeneracy_tol(op, k, opts.tol, opts.max_iter, opts.seed, opts.degeneracy_tol)
    }
}

/// Builds `H` on `sector` and returns its `k` lowest levels.
pub fn solve_sector(spec: &ModelSpec, sector: &SymmetrySector, k: usize, opts: &SolverOptions) -> Result<SpectralData> {
    let h = build_hamiltonian(spec, sector)?;
    lowest_states(&h, k.min(h.dimension()), opts)
}

/// Lowest excitation gap `ε_1 = E_1 − E_0` over all searched sectors.
///
/// XXZ conserves total Sz, so the Sz = 0 (±1/2 for odd L) sectors and their
/// neighbours Sz = ±1 (±3/2) are searched; other models use the full space.
pub fn gap(spec: &ModelSpec, opts: &SolverOptions) -> Result<f64> {
    let mut levels: Vec<f64> = Vec::new();
    match spec.kind {
        ModelKind::Xxz => {
            let l = spec.sites as i32;
            let (inner, outer): (&[i32], &[i32]) = if l % 2 == 0 { (&[0], &[-2, 2]) } else { (&[-1, 1], &[-3, 3]) };
            for &two_sz in inner {
                let sector = basis::sector_basis_capped(spec, two_sz, opts.dimension_cap)?;
                levels.extend(solve_sector(spec, &sector, 2, opts)?.eigenvalues.iter().take(2));
            }
            for &two_sz in outer {
                if two_sz.abs() > l {
                    continue;
                }
                let sector = basis::sector_basis_capped(spec, two_sz, opts.dimension_cap)?;
                levels.extend(solve_sector(spec, &sector, 1, opts)?.eigenvalues.iter().take(1));
            }
        }
        _ => {
            let sector = basis::full_space_capped(spec, opts.dimension_cap)?;
            levels.extend(solve_sector(spec, &sector, 2, opts)?.eigenvalues.iter().take(2));
        }
    }
    levels.sort_by(f64::total_cmp);
    if levels.len() < 2 {
        return Err(Error::BadData("fewer than two levels available for the gap".into()));
    }
    Ok(levels[1] - levels[0])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::{full_space, sector_basis};
    use crate::hamiltonian::build_hamiltonian;
    use crate::model::Boundary;
    use approx::assert_abs_diff_eq;

    #[test]
    fn complex_dense_eigenvectors_have_small_residuals() {
        let spec = ModelSpec::rotated_xy(6, 0.7, 0.9).unwrap();
        let h = build_hamiltonian(&spec, &full_space(&spec).unwrap()).unwrap();
        assert!(!h.is_real());
        let s = dense_spectrum(&h, &SolverOptions::default()).unwrap();
        assert!(s.residuals.iter().all(|r| *r < 1e-10), "{:?}", &s.residuals[..4]);
    }

    fn singlet_problem() -> SparseOperator {
        let spec = ModelSpec::new(ModelKind::Xxz, 2, Boundary::Open, vec![1.0]).unwrap();
        build_hamiltonian(&spec, &sector_basis(&spec, 0).unwrap()).unwrap()
    }

    #[test]
    fn dense_two_site() {
        let s = dense_spectrum(&singlet_problem(), &SolverOptions::default()).unwrap();
        assert!(s.complete);
        assert_abs_diff_eq!(s.eigenvalues[0], -0.75, epsilon = 1e-14);
        assert_abs_diff_eq!(s.eigenvalues[1], 0.25, epsilon = 1e-14);
        assert_abs_diff_eq!(s.gap().unwrap(), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn lanczos_two_site_singlet() {
        let s = lanczos_lowest_k(&singlet_problem(), 1, 1e-12, 100, 42).unwrap();
        assert_abs_diff_eq!(s.eigenvalues[0], -0.75, epsilon = 1e-14);
        let v = &s.eigenvectors[0];
        // ∝ (1, −1)/√2 up to a global phase
        assert_abs_diff_eq!((v[0] + v[1]).norm(), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(v[0].norm(), std::f64::consts::FRAC_1_SQRT_2, epsilon = 1e-12);
    }

    #[test]
    fn qubit_levels() {
        for &(t, f) in &[(0.0, 0.0), (0.4, 2.0), (2.5, -1.0)] {
            let spec = ModelSpec::qubit(t, f).unwrap();
            let h = build_hamiltonian(&spec, &full_space(&spec).unwrap()).unwrap();
            let s = dense_spectrum(&h, &SolverOptions::default()).unwrap();
            assert_abs_diff_eq!(s.eigenvalues[0], -0.5, epsilon = 1e-14);
            assert_abs_diff_eq!(s.eigenvalues[1], 0.5, epsilon = 1e-14);
        }
    }

    #[test]
    fn dense_cap_is_enforced() {
        let opts = SolverOptions { dense_cap: 1, ..Default::default() };
        assert!(matches!(dense_spectrum(&singlet_problem(), &opts), Err(Error::CapacityExceeded { .. })));
    }

    #[test]
    fn degenerate_levels_are_resolved() {
        // Open XXZ at λ = 1 in the full space: the triplet is threefold.
        let spec = ModelSpec::new(ModelKind::Xxz, 2, Boundary::Open, vec![1.0]).unwrap();
        let h = build_hamiltonian(&spec, &full_space(&spec).unwrap()).unwrap();
        let s = lanczos_lowest_k(&h, 4, 1e-12, 50, 7).unwrap();
        let expect = [-0.75, 0.25, 0.25, 0.25];
        for (a, b) in s.eigenvalues.iter().zip(expect) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-12);
        }
        let ferro = ModelSpec::new(ModelKind::Xxz, 2, Boundary::Open, vec![1.0])
            .unwrap()
            .with_coupling(-1.0)
            .unwrap();
        let h = build_hamiltonian(&ferro, &full_space(&ferro).unwrap()).unwrap();
        let s = lanczos_lowest_k(&h, 2, 1e-12, 50, 7).unwrap();
        assert!(s.degenerate_ground_state);
        assert!(s.require_unique_ground_state(1e-8).is_err());
    }

    #[test]
    fn two_site_gap() {
        let spec = ModelSpec::new(ModelKind::Xxz, 2, Boundary::Open, vec![1.0]).unwrap();
        assert_abs_diff_eq!(gap(&spec, &SolverOptions::default()).unwrap(), 1.0, epsilon = 1e-13);
    }

    #[test]
    fn not_converged_is_reported() {
        let spec = ModelSpec::xxz(12, 0.5).unwrap();
        let h = build_hamiltonian(&spec, &sector_basis(&spec, 0).unwrap()).unwrap();
        let err = lanczos_lowest_k(&h, 1, 1e-10, 6, 42).unwrap_err();
        assert!(matches!(err, Error::NotConverged { iterations: 6, .. }));
    }
}
