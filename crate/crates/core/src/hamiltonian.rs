//! Sector-restricted Hamiltonians `H(λ)` and their parameter derivatives `∂_μH`.

use num_complex::Complex64;

use crate::basis::{Conservation, SymmetrySector};
use crate::error::{Error, Result};
use crate::model::{ModelKind, ModelSpec};
use crate::sparse::SparseOperator;

type C64 = Complex64;

/// Largest dimension on which the debug hermiticity check runs.
const HERMITICITY_CHECK_DIM: usize = 4096;

/// Which operator to assemble: `H` itself or `∂H/∂λ_μ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Term {
    Full,
    Derivative(usize),
}

pub fn build_hamiltonian(spec: &ModelSpec, sector: &SymmetrySector) -> Result<SparseOperator> {
    assemble(spec, sector, Term::Full)
}

/// `∂H/∂λ_μ` in the same sector and basis ordering as [`build_hamiltonian`].
pub fn build_perturbation(spec: &ModelSpec, sector: &SymmetrySector, mu: usize) -> Result<SparseOperator> {
    if mu >= spec.num_params() {
        return Err(Error::BadParameterIndex { index: mu, count: spec.num_params() });
    }
    assemble(spec, sector, Term::Derivative(mu))
}

/// All perturbations `∂_0H, …, ∂_{m−1}H`.
pub fn build_perturbations(spec: &ModelSpec, sector: &SymmetrySector) -> Result<Vec<SparseOperator>> {
    (0..spec.num_params()).map(|mu| build_perturbation(spec, sector, mu)).collect()
}

pub fn check_compatible(spec: &ModelSpec, sector: &SymmetrySector) -> Result<()> {
    spec.validate()?;
    if sector.sites() != spec.sites {
        return Err(Error::SectorMismatch(format!(
            "sector built for L = {}, model has L = {}",
            sector.sites(),
            spec.sites
        )));
    }
    if let Conservation::TotalSz { .. } = sector.conserved() {
        if spec.kind != ModelKind::Xxz {
            return Err(Error::SectorMismatch(format!("{} does not conserve total Sz", spec.kind)));
        }
    }
    Ok(())
}

/// `±1` for bit `i` of `s`.
#[inline]
fn pauli_z(s: u64, i: usize) -> f64 {
    if (s >> i) & 1 == 1 {
        1.0
    } else {
        -1.0
    }
}

/// Phase picked up by `cos φ σx + sin φ σy` on every site in `mask`:
/// raising a down spin gives `e^{−iφ}`, lowering an up spin gives `e^{iφ}`.
/// Returns the integer `c` with total phase `e^{icφ}`.
#[inline]
fn rotation_charge(s: u64, mask: u64) -> i32 {
    let up = (s & mask).count_ones() as i32;
    let down = (mask.count_ones() as i32) - up;
    up - down
}

fn assemble(spec: &ModelSpec, sector: &SymmetrySector, term: Term) -> Result<SparseOperator> {
    check_compatible(spec, sector)?;
    let dim = sector.dimension();
    let l = spec.sites;
    let j = spec.coupling;
    let bonds = spec.bonds();
    let p = &spec.params;
    let mut rows: Vec<Vec<(usize, C64)>> = vec![Vec::new(); dim];

    let real = |x: f64| C64::new(x, 0.0);
    let magnetization = |s: u64| (0..l).map(|i| pauli_z(s, i)).sum::<f64>();

    for (col, &s) in sector.states().iter().enumerate() {
        // (bra pattern, amplitude) pairs of `term |s⟩`.
        let mut out: Vec<(u64, C64)> = Vec::with_capacity(bonds.len() + 1);
        match spec.kind {
            ModelKind::Xxz => {
                let zz = bonds.iter().map(|&(a, b)| pauli_z(s, a) * pauli_z(s, b) / 4.0).sum::<f64>();
                let sz = magnetization(s) / 2.0;
                let field = p.get(1).copied().unwrap_or(0.0);
                match term {
                    Term::Full => {
                        out.push((s, real(j * p[0] * zz - field * sz)));
                        for &(a, b) in &bonds {
                            if pauli_z(s, a) != pauli_z(s, b) {
                                out.push((s ^ ((1 << a) | (1 << b)), real(j / 2.0)));
                            }
                        }
                    }
                    Term::Derivative(0) => out.push((s, real(j * zz))),
                    Term::Derivative(_) => out.push((s, real(-sz))),
                }
            }
            ModelKind::Tfim | ModelKind::RotatedXy => {
                let h = p[0];
                let mz = magnetization(s);
                let angle = if spec.kind == ModelKind::RotatedXy { p[1] } else { 0.0 };
                match term {
                    Term::Full => {
                        out.push((s, real(-h * mz)));
                        for &(a, b) in &bonds {
                            let mask = (1u64 << a) | (1u64 << b);
                            let c = rotation_charge(s, mask) as f64;
                            out.push((s ^ mask, -j * C64::from_polar(1.0, c * angle)));
                        }
                    }
                    Term::Derivative(0) => out.push((s, real(-mz))),
                    Term::Derivative(_) => {
                        for &(a, b) in &bonds {
                            let mask = (1u64 << a) | (1u64 << b);
                            let c = rotation_charge(s, mask) as f64;
                            out.push((s ^ mask, -j * C64::new(0.0, c) * C64::from_polar(1.0, c * angle)));
                        }
                    }
                }
            }
            ModelKind::QubitInField => {
                let (theta, phi) = (p[0], p[1]);
                let sz = pauli_z(s, 0);
                let c = rotation_charge(s, 1) as f64;
                let flip = C64::from_polar(1.0, c * phi);
                match term {
                    Term::Full => {
                        out.push((s, real(-sz * theta.cos() / 2.0)));
                        out.push((s ^ 1, -flip * theta.sin() / 2.0));
                    }
                    Term::Derivative(0) => {
                        out.push((s, real(sz * theta.sin() / 2.0)));
                        out.push((s ^ 1, -flip * theta.cos() / 2.0));
                    }
                    Term::Derivative(_) => {
                        out.push((s ^ 1, -C64::new(0.0, c) * flip * theta.sin() / 2.0));
                    }
                }
            }
        }
        for (bra, amp) in out {
            let row = sector.rank(bra).ok_or_else(|| {
                Error::SectorMismatch(format!("pattern {bra:#b} generated outside the sector"))
            })?;
            rows[row].push((col, amp));
        }
    }
    let op = SparseOperator::from_rows(dim, rows, true)?;
    if cfg!(debug_assertions) && dim <= HERMITICITY_CHECK_DIM {
        let defect = op.hermiticity_defect();
        debug_assert!(defect <= 1e-13, "assembled operator is not hermitian (defect {defect:e})");
    }
    Ok(op)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::{full_space, sector_basis};
    use crate::model::Boundary;
    use approx::assert_abs_diff_eq;

    fn two_site_open(lambda: f64) -> ModelSpec {
        ModelSpec::new(ModelKind::Xxz, 2, Boundary::Open, vec![lambda]).unwrap()
    }

    #[test]
    fn two_site_singlet_block() {
        let spec = two_site_open(1.0);
        let sector = sector_basis(&spec, 0).unwrap();
        let h = build_hamiltonian(&spec, &sector).unwrap().to_dense();
        assert_abs_diff_eq!(h[[0, 0]].re, -0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(h[[1, 1]].re, -0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(h[[0, 1]].re, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(h[[1, 0]].re, 0.5, epsilon = 1e-15);
    }

    #[test]
    fn singlet_is_an_eigenvector() {
        let spec = two_site_open(1.0);
        let sector = sector_basis(&spec, 0).unwrap();
        let h = build_hamiltonian(&spec, &sector).unwrap();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let v = vec![C64::new(r, 0.0), C64::new(-r, 0.0)];
        let hv = h.apply(&v).unwrap();
        for (a, b) in hv.iter().zip(&v) {
            assert_abs_diff_eq!(a.re, -0.75 * b.re, epsilon = 1e-15);
            assert_abs_diff_eq!(a.im, 0.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn anisotropy_perturbation_two_sites() {
        let spec = two_site_open(0.3);
        let sector = sector_basis(&spec, 0).unwrap();
        let v = build_perturbation(&spec, &sector, 0).unwrap().to_dense();
        assert_eq!(v[[0, 0]], C64::new(-0.25, 0.0));
        assert_eq!(v[[1, 1]], C64::new(-0.25, 0.0));
        assert_eq!(v[[0, 1]], C64::new(0.0, 0.0));
    }

    #[test]
    fn tfim_field_perturbation_is_diagonal() {
        let spec = ModelSpec::tfim(4, 0.7).unwrap();
        let sector = full_space(&spec).unwrap();
        let v = build_perturbation(&spec, &sector, 0).unwrap();
        for i in 0..sector.dimension() {
            let entries: Vec<_> = v.row(i).collect();
            let s = sector.unrank(i);
            let expected = -(0..4).map(|k| pauli_z(s, k)).sum::<f64>();
            if expected == 0.0 {
                assert!(entries.is_empty());
            } else {
                assert_eq!(entries, vec![(i, C64::new(expected, 0.0))]);
            }
        }
    }

    #[test]
    fn bad_parameter_index() {
        let spec = ModelSpec::tfim(4, 1.0).unwrap();
        let sector = full_space(&spec).unwrap();
        assert!(matches!(
            build_perturbation(&spec, &sector, 1),
            Err(Error::BadParameterIndex { index: 1, count: 1 })
        ));
    }

    #[test]
    fn sector_must_match_model() {
        let tfim = ModelSpec::tfim(4, 1.0).unwrap();
        let xxz = ModelSpec::xxz(4, 1.0).unwrap();
        let sz = sector_basis(&xxz, 0).unwrap();
        assert!(matches!(build_hamiltonian(&tfim, &sz), Err(Error::SectorMismatch(_))));
        let other = sector_basis(&ModelSpec::xxz(6, 1.0).unwrap(), 0).unwrap();
        assert!(matches!(build_hamiltonian(&xxz, &other), Err(Error::SectorMismatch(_))));
    }

    #[test]
    fn qubit_matrix() {
        let (t, f) = (0.7, 1.3);
        let spec = ModelSpec::qubit(t, f).unwrap();
        let h = build_hamiltonian(&spec, &full_space(&spec).unwrap()).unwrap().to_dense();
        // index 0 = down, index 1 = up
        assert_abs_diff_eq!(h[[0, 0]].re, t.cos() / 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(h[[1, 1]].re, -t.cos() / 2.0, epsilon = 1e-15);
        let up_down = -C64::from_polar(t.sin() / 2.0, -f);
        assert_abs_diff_eq!((h[[1, 0]] - up_down).norm(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!((h[[0, 1]] - up_down.conj()).norm(), 0.0, epsilon = 1e-15);
    }
}
