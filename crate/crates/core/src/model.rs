//! Model catalog: parametrized Hamiltonian families on a chain of spins-1/2.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Hamiltonian family.
///
/// * `Xxz`: `J Σ (SxSx + SySy + λ SzSz) − h Σ Sz`, spin operators are half
///   Pauli matrices. One parameter `λ`, or two `(λ, h)`.
/// * `Tfim`: `−J Σ σxσx − h Σ σz`, critical at `h = J`.
/// * `RotatedXy`: the transverse-field chain rotated by `φ` about z,
///   `U(φ) H(h) U(φ)†` with `U(φ) = exp(−i φ/2 Σ σz)`. Parameters `(h, φ)`.
/// * `QubitInField`: a single spin in a unit field along `(θ, φ)`,
///   `−(σz cos θ + sin θ (σx cos φ + σy sin φ))/2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModelKind {
    Xxz,
    Tfim,
    RotatedXy,
    QubitInField,
}

impl ModelKind {
    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Xxz => "xxz",
            ModelKind::Tfim => "tfim",
            ModelKind::RotatedXy => "rotated-xy",
            ModelKind::QubitInField => "qubit",
        }
    }

    /// Default parameter labels for the given parameter count.
    pub fn param_names(self, count: usize) -> Vec<String> {
        let names: &[&str] = match (self, count) {
            (ModelKind::Xxz, 1) => &["lambda"],
            (ModelKind::Xxz, _) => &["lambda", "h"],
            (ModelKind::Tfim, _) => &["h"],
            (ModelKind::RotatedXy, _) => &["h", "phi"],
            (ModelKind::QubitInField, _) => &["theta", "phi"],
        };
        names.iter().map(|s| s.to_string()).collect()
    }

    fn allowed_param_counts(self) -> &'static [usize] {
        match self {
            ModelKind::Xxz => &[1, 2],
            ModelKind::Tfim => &[1],
            ModelKind::RotatedXy | ModelKind::QubitInField => &[2],
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "xxz" | "xxz-field" => Ok(ModelKind::Xxz),
            "tfim" | "ising" => Ok(ModelKind::Tfim),
            "rotated-xy" | "rotatedxy" | "xy" => Ok(ModelKind::RotatedXy),
            "qubit" | "qubit-in-field" | "qubitinfield" => Ok(ModelKind::QubitInField),
            other => Err(Error::InvalidModel(format!("unknown model kind `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Boundary {
    #[default]
    Periodic,
    Open,
}

impl Boundary {
    pub fn name(self) -> &'static str {
        match self {
            Boundary::Periodic => "periodic",
            Boundary::Open => "open",
        }
    }
}

impl fmt::Display for Boundary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Boundary {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "periodic" | "pbc" => Ok(Boundary::Periodic),
            "open" | "obc" => Ok(Boundary::Open),
            other => Err(Error::InvalidModel(format!("unknown boundary `{other}`"))),
        }
    }
}

/// A point `λ` of a Hamiltonian family on a fixed number of sites.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelSpec {
    pub kind: ModelKind,
    pub sites: usize,
    pub boundary: Boundary,
    pub coupling: f64,
    pub params: Vec<f64>,
    pub param_names: Vec<String>,
}

impl ModelSpec {
    /// Validating constructor with `J = 1` and default labels.
    pub fn new(kind: ModelKind, sites: usize, boundary: Boundary, params: Vec<f64>) -> Result<Self> {
        let spec = ModelSpec {
            kind,
            sites,
            boundary,
            coupling: 1.0,
            param_names: kind.param_names(params.len()),
            params,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn xxz(sites: usize, anisotropy: f64) -> Result<Self> {
        Self::new(ModelKind::Xxz, sites, Boundary::Periodic, vec![anisotropy])
    }

    pub fn xxz_field(sites: usize, anisotropy: f64, field: f64) -> Result<Self> {
        Self::new(ModelKind::Xxz, sites, Boundary::Periodic, vec![anisotropy, field])
    }

    pub fn tfim(sites: usize, field: f64) -> Result<Self> {
        Self::new(ModelKind::Tfim, sites, Boundary::Periodic, vec![field])
    }

    pub fn rotated_xy(sites: usize, field: f64, angle: f64) -> Result<Self> {
        Self::new(ModelKind::RotatedXy, sites, Boundary::Periodic, vec![field, angle])
    }

    pub fn qubit(theta: f64, phi: f64) -> Result<Self> {
        Self::new(ModelKind::QubitInField, 1, Boundary::Open, vec![theta, phi])
    }

    pub fn with_boundary(mut self, boundary: Boundary) -> Result<Self> {
        self.boundary = boundary;
        self.validate()?;
        Ok(self)
    }

    pub fn with_coupling(mut self, coupling: f64) -> Result<Self> {
        self.coupling = coupling;
        self.validate()?;
        Ok(self)
    }

    /// Same family and size at another parameter point.
    pub fn with_params(&self, params: &[f64]) -> Result<Self> {
        if params.len() != self.params.len() {
            return Err(Error::DimensionMismatch {
                expected: self.params.len(),
                found: params.len(),
            });
        }
        let mut spec = self.clone();
        spec.params.copy_from_slice(params);
        spec.validate()?;
        Ok(spec)
    }

    /// Same family and parameters on another number of sites.
    pub fn with_sites(&self, sites: usize) -> Result<Self> {
        let mut spec = self.clone();
        spec.sites = sites;
        spec.validate()?;
        Ok(spec)
    }

    pub fn num_params(&self) -> usize {
        self.params.len()
    }

    /// Families whose Hamiltonian is a real matrix in the computational basis.
    pub fn real_representable(&self) -> bool {
        matches!(self.kind, ModelKind::Xxz | ModelKind::Tfim)
    }

    pub fn validate(&self) -> Result<()> {
        let invalid = |msg: String| Err(Error::InvalidModel(msg));
        if self.sites == 0 {
            return invalid("at least one site is required".into());
        }
        match self.kind {
            ModelKind::QubitInField if self.sites != 1 => {
                return invalid(format!("qubit model requires L = 1, got {}", self.sites));
            }
            ModelKind::Xxz | ModelKind::Tfim | ModelKind::RotatedXy if self.sites < 2 => {
                return invalid(format!("chain models require L >= 2, got {}", self.sites));
            }
            _ => {}
        }
        if self.sites > 62 {
            return invalid(format!("L = {} does not fit a 64-bit basis pattern", self.sites));
        }
        if self.boundary == Boundary::Periodic && self.sites == 2 {
            return invalid("periodic boundary with L = 2 double-counts the bond".into());
        }
        if !self.kind.allowed_param_counts().contains(&self.params.len()) {
            return invalid(format!(
                "{} takes {:?} parameters, got {}",
                self.kind,
                self.kind.allowed_param_counts(),
                self.params.len()
            ));
        }
        if self.param_names.len() != self.params.len() {
            return invalid("one label per parameter is required".into());
        }
        if !self.coupling.is_finite() || self.params.iter().any(|p| !p.is_finite()) {
            return invalid("couplings and parameters must be finite".into());
        }
        Ok(())
    }

    /// Nearest-neighbour bonds `(i, j)` of the chain.
    pub fn bonds(&self) -> Vec<(usize, usize)> {
        let l = self.sites;
        let mut bonds: Vec<(usize, usize)> = (0..l.saturating_sub(1)).map(|i| (i, i + 1)).collect();
        if self.boundary == Boundary::Periodic && l > 2 {
            bonds.push((l - 1, 0));
        }
        bonds
    }

    /// Short label such as `xxz(L=8,lambda=0.5)`.
    pub fn label(&self) -> String {
        let params: Vec<String> = self
            .param_names
            .iter()
            .zip(&self.params)
            .map(|(n, v)| format!("{n}={v}"))
            .collect();
        format!("{}(L={},{})", self.kind, self.sites, params.join(","))
    }
}
