//! Model descriptions: family tag, named parameters, size and boundary conditions.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Family {
    HatanoNelson,
    NhSsh,
    NhAah,
    NhQwz,
    QuantumWalk,
    SshChiralInv,
    SshPt,
}

impl Family {
    pub const ALL: [Family; 7] = [
        Family::HatanoNelson,
        Family::NhSsh,
        Family::NhAah,
        Family::NhQwz,
        Family::QuantumWalk,
        Family::SshChiralInv,
        Family::SshPt,
    ];

    /// Parameter names required by this family, in canonical order.
    pub fn param_names(self) -> &'static [&'static str] {
        match self {
            Family::HatanoNelson => &["J_L", "J_R"],
            Family::NhSsh => &["J1L", "J1R", "J2"],
            Family::NhAah => &["J", "V", "theta", "h"],
            Family::NhQwz => &["t1", "t2", "m_z", "gamma_x", "gamma_y", "gamma_z"],
            Family::QuantumWalk => &["theta1", "theta2", "gamma"],
            Family::SshChiralInv => &["lambda"],
            Family::SshPt => &["J1", "J2", "delta"],
        }
    }

    /// Orbitals per site (or per unit cell).
    pub fn internal_levels(self) -> usize {
        match self {
            Family::HatanoNelson | Family::NhAah => 1,
            _ => 2,
        }
    }

    pub fn is_two_dimensional(self) -> bool {
        self == Family::NhQwz
    }

    pub fn is_ssh_like(self) -> bool {
        matches!(self, Family::NhSsh | Family::SshChiralInv | Family::SshPt)
    }

    /// Short lowercase identifier used in exports.
    pub fn tag(self) -> &'static str {
        match self {
            Family::HatanoNelson => "hatano_nelson",
            Family::NhSsh => "nh_ssh",
            Family::NhAah => "nh_aah",
            Family::NhQwz => "nh_qwz",
            Family::QuantumWalk => "quantum_walk",
            Family::SshChiralInv => "ssh_chiral_inv",
            Family::SshPt => "ssh_pt",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Bc {
    Pbc,
    Obc,
}

/// Placement of the inter-cell bond in the two-sublattice chains.
///
/// `Printed` couples A of cell j with B of cell j+1. `Standard` couples B of cell j
/// with A of cell j+1 (the usual SSH drawing). The two are mirror images of each other.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InterCell {
    #[default]
    Printed,
    Standard,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub family: Family,
    pub params: BTreeMap<String, f64>,
    /// Sites (1-band chains), cells (two-sublattice chains) or linear size of the square lattice.
    pub size: usize,
    /// Boundary condition; along x for the 2D lattice.
    pub bc: Bc,
    /// Boundary condition along y for the 2D lattice; defaults to `bc`.
    #[serde(default)]
    pub bc_y: Option<Bc>,
    #[serde(default)]
    pub inter_cell: InterCell,
}

impl ModelSpec {
    pub fn new(family: Family, params: &[(&str, f64)], size: usize, bc: Bc) -> Result<Self> {
        let spec = ModelSpec {
            family,
            params: params.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
            size,
            bc,
            bc_y: None,
            inter_cell: InterCell::Printed,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn hatano_nelson(size: usize, j_l: f64, j_r: f64, bc: Bc) -> Result<Self> {
        Self::new(Family::HatanoNelson, &[("J_L", j_l), ("J_R", j_r)], size, bc)
    }

    pub fn nh_ssh(cells: usize, j1l: f64, j1r: f64, j2: f64, bc: Bc) -> Result<Self> {
        Self::new(Family::NhSsh, &[("J1L", j1l), ("J1R", j1r), ("J2", j2)], cells, bc)
    }

    pub fn nh_aah(size: usize, j: f64, v: f64, theta: f64, h: f64, bc: Bc) -> Result<Self> {
        Self::new(Family::NhAah, &[("J", j), ("V", v), ("theta", theta), ("h", h)], size, bc)
    }

    #[allow(clippy::too_many_arguments)]
    pub fn nh_qwz(
        size: usize,
        t1: f64,
        t2: f64,
        m_z: f64,
        gamma_x: f64,
        gamma_y: f64,
        gamma_z: f64,
        bc: Bc,
    ) -> Result<Self> {
        Self::new(
            Family::NhQwz,
            &[
                ("t1", t1),
                ("t2", t2),
                ("m_z", m_z),
                ("gamma_x", gamma_x),
                ("gamma_y", gamma_y),
                ("gamma_z", gamma_z),
            ],
            size,
            bc,
        )
    }

    pub fn quantum_walk(size: usize, theta1: f64, theta2: f64, gamma: f64, bc: Bc) -> Result<Self> {
        Self::new(
            Family::QuantumWalk,
            &[("theta1", theta1), ("theta2", theta2), ("gamma", gamma)],
            size,
            bc,
        )
    }

    pub fn ssh_chiral_inv(cells: usize, lambda: f64, bc: Bc) -> Result<Self> {
        Self::new(Family::SshChiralInv, &[("lambda", lambda)], cells, bc)
    }

    pub fn ssh_pt(cells: usize, j1: f64, j2: f64, delta: f64, bc: Bc) -> Result<Self> {
        Self::new(Family::SshPt, &[("J1", j1), ("J2", j2), ("delta", delta)], cells, bc)
    }

    pub fn with_bc_y(mut self, bc_y: Bc) -> Self {
        self.bc_y = Some(bc_y);
        self
    }

    pub fn with_inter_cell(mut self, inter_cell: InterCell) -> Self {
        self.inter_cell = inter_cell;
        self
    }

    pub fn with_size(&self, size: usize) -> Self {
        let mut s = self.clone();
        s.size = size;
        s
    }

    pub fn with_bc(&self, bc: Bc) -> Self {
        let mut s = self.clone();
        s.bc = bc;
        s
    }

    pub fn bc_y(&self) -> Bc {
        self.bc_y.unwrap_or(self.bc)
    }

    /// Checks size, parameter names and finiteness.
    pub fn validate(&self) -> Result<()> {
        if self.size < 2 {
            return Err(Error::Size(format!("size {} < 2", self.size)));
        }
        let names = self.family.param_names();
        for n in names {
            match self.params.get(*n) {
                None => {
                    return Err(Error::Parameter(format!(
                        "{} requires parameter `{n}`",
                        self.family
                    )))
                }
                Some(v) if !v.is_finite() => {
                    return Err(Error::Parameter(format!("parameter `{n}` is not finite")))
                }
                _ => {}
            }
        }
        if let Some(extra) = self.params.keys().find(|k| !names.contains(&k.as_str())) {
            return Err(Error::Parameter(format!(
                "unknown parameter `{extra}` for {}",
                self.family
            )));
        }
        if self.family == Family::NhAah {
            if self.p("V") <= 0.0 {
                return Err(Error::Parameter("V must be positive".into()));
            }
            if fibonacci_index(self.size).is_none() {
                log::warn!(
                    "AAH size {} is not a Fibonacci number; using the golden ratio",
                    self.size
                );
            }
        }
        Ok(())
    }

    /// Parameter value; panics on a name the family does not define.
    pub fn p(&self, name: &str) -> f64 {
        match self.params.get(name) {
            Some(v) => *v,
            None => panic!("{} has no parameter `{name}`", self.family),
        }
    }

    pub fn set(&mut self, name: &str, value: f64) {
        self.params.insert(name.to_string(), value);
    }

    /// Lattice sites (or cells); L² for the square lattice.
    pub fn sites(&self) -> usize {
        if self.family.is_two_dimensional() {
            self.size * self.size
        } else {
            self.size
        }
    }

    pub fn dim(&self) -> usize {
        self.sites() * self.family.internal_levels()
    }

    /// Control parameter probed by the sensor.
    pub fn lambda(&self) -> f64 {
        match self.family {
            Family::HatanoNelson => self.p("J_R") / self.p("J_L"),
            Family::NhSsh => self.p("J1R") / self.p("J1L"),
            Family::NhAah => self.p("h"),
            Family::NhQwz => self.p("t1") / self.p("m_z"),
            Family::QuantumWalk => self.p("theta2"),
            Family::SshChiralInv => self.p("lambda"),
            Family::SshPt => self.p("J1") / self.p("J2"),
        }
    }

    /// Copy with the control parameter set to `lambda`, other parameters held fixed.
    pub fn with_lambda(&self, lambda: f64) -> Self {
        let mut s = self.clone();
        match self.family {
            Family::HatanoNelson => s.set("J_R", lambda * self.p("J_L")),
            Family::NhSsh => s.set("J1R", lambda * self.p("J1L")),
            Family::NhAah => s.set("h", lambda),
            Family::NhQwz => s.set("t1", lambda * self.p("m_z")),
            Family::QuantumWalk => s.set("theta2", lambda),
            Family::SshChiralInv => s.set("lambda", lambda),
            Family::SshPt => s.set("J1", lambda * self.p("J2")),
        }
        s
    }

    /// AAH quasi-frequency: F_{n+1}/F_n when the size is the Fibonacci number F_n,
    /// the golden ratio otherwise.
    pub fn aah_alpha(&self) -> f64 {
        aah_alpha(self.size)
    }

    pub fn label(&self) -> String {
        let ps: Vec<String> = self.params.iter().map(|(k, v)| format!("{k}={v}")).collect();
        format!("{}[L={},{:?}]({})", self.family, self.size, self.bc, ps.join(","))
    }
}

/// Fibonacci numbers with F_1 = F_2 = 1.
pub fn fibonacci(n: usize) -> u64 {
    let (mut a, mut b) = (0u64, 1u64);
    for _ in 0..n {
        let c = a + b;
        a = b;
        b = c;
    }
    a
}

/// Index n ≥ 2 with F_n = size, if any.
pub fn fibonacci_index(size: usize) -> Option<usize> {
    (2..90).find(|&n| fibonacci(n) == size as u64)
}

pub fn aah_alpha(size: usize) -> f64 {
    match fibonacci_index(size) {
        Some(n) => fibonacci(n + 1) as f64 / fibonacci(n) as f64,
        None => (5f64.sqrt() + 1.0) / 2.0,
    }
}

/// Hopping pair of the chiral-inversion SSH chain: (intra, inter) = (e^{iπ/5} sin λ, cos λ).
pub fn chiral_inv_hoppings(lambda: f64) -> (num_complex::Complex64, num_complex::Complex64) {
    (
        num_complex::Complex64::from_polar(lambda.sin(), PI / 5.0),
        num_complex::Complex64::new(lambda.cos(), 0.0),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_missing_and_extra_params() {
        let e = ModelSpec::new(Family::HatanoNelson, &[("J_L", 1.0)], 10, Bc::Obc);
        assert!(matches!(e, Err(Error::Parameter(_))));
        let e = ModelSpec::new(
            Family::HatanoNelson,
            &[("J_L", 1.0), ("J_R", 1.0), ("alpha", 2.0)],
            10,
            Bc::Obc,
        );
        assert!(matches!(e, Err(Error::Parameter(_))));
        assert!(matches!(
            ModelSpec::hatano_nelson(1, 1.0, 1.0, Bc::Obc),
            Err(Error::Size(_))
        ));
    }

    #[test]
    fn fibonacci_alpha() {
        assert_eq!(fibonacci(9), 34);
        assert_eq!(fibonacci_index(610), Some(15));
        assert_eq!(aah_alpha(34), 55.0 / 34.0);
        assert_eq!(aah_alpha(2), 3.0 / 2.0);
        assert!((aah_alpha(100) - 1.618033988749895).abs() < 1e-15);
    }

    #[test]
    fn lambda_round_trip() {
        let s = ModelSpec::nh_ssh(10, 2.0, 1.0, 1.0, Bc::Obc).unwrap();
        assert_eq!(s.lambda(), 0.5);
        assert_eq!(s.with_lambda(-1.0).p("J1R"), -2.0);
        let q = ModelSpec::nh_qwz(4, 0.2, 0.2, 2.0, 0.1, 0.1, 0.01, Bc::Obc).unwrap();
        assert_eq!(q.with_lambda(0.5).p("t1"), 1.0);
    }

    #[test]
    fn aah_rejects_nonpositive_v() {
        assert!(ModelSpec::nh_aah(34, 1.0, 0.0, 0.0, 0.1, Bc::Pbc).is_err());
    }
}
