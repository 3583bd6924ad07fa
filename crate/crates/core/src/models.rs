//! Real-space and Bloch operator matrices for every model family.
//!
//! Indexing is cell-major, orbital-minor: orbital `s` of cell `j` sits at `2j + s`
//! (A = 0, B = 1; for the walk ↑ = 0, ↓ = 1). The square lattice uses `(x·Ly + y)·2 + s`.

use std::f64::consts::PI;

use ndarray::Array2;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{aah_alpha, chiral_inv_hoppings, Bc, Family, InterCell, ModelSpec};

const I: C64 = C64::new(0.0, 1.0);
const ZERO: C64 = C64::new(0.0, 0.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum OperatorKind {
    Hamiltonian,
    EvolutionOperator,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Geometry {
    Chain(usize),
    Lattice(usize, usize),
}

impl Geometry {
    pub fn sites(&self) -> usize {
        match *self {
            Geometry::Chain(l) => l,
            Geometry::Lattice(lx, ly) => lx * ly,
        }
    }
}

/// Dense complex operator with its lattice metadata.
#[derive(Debug, Clone)]
pub struct OperatorMatrix {
    pub entries: Array2<C64>,
    pub internal_levels: usize,
    pub geometry: Geometry,
    pub kind: OperatorKind,
}

impl OperatorMatrix {
    fn zeros(geometry: Geometry, internal_levels: usize, kind: OperatorKind) -> Self {
        let n = geometry.sites() * internal_levels;
        OperatorMatrix {
            entries: Array2::zeros((n, n)),
            internal_levels,
            geometry,
            kind,
        }
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    /// Largest entry of |H − H†|.
    pub fn hermiticity_defect(&self) -> f64 {
        let h = &self.entries;
        let mut m = 0.0f64;
        for i in 0..h.nrows() {
            for j in 0..h.ncols() {
                m = m.max((h[[i, j]] - h[[j, i]].conj()).norm());
            }
        }
        m
    }

    /// Largest entry of |U†U − 1|.
    pub fn unitarity_defect(&self) -> f64 {
        let u = &self.entries;
        let g = u.t().mapv(|z| z.conj()).dot(u);
        let mut m = 0.0f64;
        for ((i, j), z) in g.indexed_iter() {
            let target = if i == j { 1.0 } else { 0.0 };
            m = m.max((z - target).norm());
        }
        m
    }

    fn add(&mut self, i: usize, j: usize, v: C64) {
        self.entries[[i, j]] += v;
    }
}

fn check_size(l: usize) -> Result<()> {
    if l < 2 {
        Err(Error::Size(format!("size {l} < 2")))
    } else {
        Ok(())
    }
}

fn expect_family(spec: &ModelSpec, f: Family) -> Result<()> {
    if spec.family != f {
        Err(Error::FamilyMismatch {
            expected: f.to_string(),
            got: spec.family.to_string(),
        })
    } else {
        Ok(())
    }
}

/// Asymmetric nearest-neighbour chain: `H[j, j+1] = J_L`, `H[j+1, j] = J_R`.
pub fn build_hatano_nelson(l: usize, j_l: f64, j_r: f64, bc: Bc) -> Result<OperatorMatrix> {
    check_size(l)?;
    let mut h = OperatorMatrix::zeros(Geometry::Chain(l), 1, OperatorKind::Hamiltonian);
    let bonds = if bc == Bc::Pbc { l } else { l - 1 };
    for j in 0..bonds {
        let k = (j + 1) % l;
        h.add(j, k, j_l.into());
        h.add(k, j, j_r.into());
    }
    Ok(h)
}

/// Generic two-sublattice chain. `intra_ab` is the A←B amplitude `H[A_j, B_j]`,
/// `intra_ba` the B←A amplitude. The inter-cell bond is symmetric.
fn two_sublattice_chain(
    cells: usize,
    intra_ab: C64,
    intra_ba: C64,
    inter: C64,
    onsite: [C64; 2],
    bc: Bc,
    inter_cell: InterCell,
) -> Result<OperatorMatrix> {
    check_size(cells)?;
    let mut h = OperatorMatrix::zeros(Geometry::Chain(cells), 2, OperatorKind::Hamiltonian);
    for j in 0..cells {
        let (a, b) = (2 * j, 2 * j + 1);
        h.add(a, a, onsite[0]);
        h.add(b, b, onsite[1]);
        h.add(a, b, intra_ab);
        h.add(b, a, intra_ba);
        if j + 1 < cells || bc == Bc::Pbc {
            let n = (j + 1) % cells;
            let (p, q) = match inter_cell {
                InterCell::Printed => (a, 2 * n + 1),
                InterCell::Standard => (b, 2 * n),
            };
            h.add(p, q, inter);
            h.add(q, p, inter);
        }
    }
    Ok(h)
}

/// Non-Hermitian SSH chain with asymmetric intra-cell hopping (`H[A,B] = J1L`, `H[B,A] = J1R`).
pub fn build_nh_ssh(cells: usize, j1l: f64, j1r: f64, j2: f64, bc: Bc) -> Result<OperatorMatrix> {
    build_nh_ssh_with(cells, j1l, j1r, j2, bc, InterCell::Printed)
}

pub fn build_nh_ssh_with(
    cells: usize,
    j1l: f64,
    j1r: f64,
    j2: f64,
    bc: Bc,
    inter_cell: InterCell,
) -> Result<OperatorMatrix> {
    two_sublattice_chain(
        cells,
        j1l.into(),
        j1r.into(),
        j2.into(),
        [ZERO; 2],
        bc,
        inter_cell,
    )
}

/// Quasiperiodic chain with on-site `V cos(2παj + θ + ih)`, j = 1..L.
pub fn build_aah(l: usize, j: f64, v: f64, theta: f64, h: f64, bc: Bc) -> Result<OperatorMatrix> {
    check_size(l)?;
    if v <= 0.0 {
        return Err(Error::Parameter(format!("V = {v} must be positive")));
    }
    let alpha = aah_alpha(l);
    let mut m = build_hatano_nelson(l, j, j, bc)?;
    for site in 0..l {
        let x = 2.0 * PI * alpha * (site + 1) as f64 + theta;
        m.add(site, site, v * C64::new(x, h).cos());
    }
    Ok(m)
}

fn pauli() -> [[[C64; 2]; 2]; 3] {
    let o = C64::new(1.0, 0.0);
    [
        [[ZERO, o], [o, ZERO]],
        [[ZERO, -I], [I, ZERO]],
        [[o, ZERO], [ZERO, -o]],
    ]
}

/// 2×2 matrix `d·σ`.
pub fn pauli_combination(d: [C64; 3]) -> Array2<C64> {
    let s = pauli();
    let mut m = Array2::zeros((2, 2));
    for (c, sig) in d.iter().zip(s.iter()) {
        for r in 0..2 {
            for k in 0..2 {
                m[[r, k]] += c * sig[r][k];
            }
        }
    }
    m
}

/// Coefficients (d_x, d_y, d_z) of the QWZ Bloch matrix.
pub fn qwz_d_vector(kx: f64, ky: f64, spec: &ModelSpec) -> [C64; 3] {
    let (t1, t2, mz) = (spec.p("t1"), spec.p("t2"), spec.p("m_z"));
    [
        C64::new(2.0 * t1 * kx.sin(), spec.p("gamma_x")),
        C64::new(2.0 * t1 * ky.sin(), spec.p("gamma_y")),
        C64::new(mz - 2.0 * t2 * (kx.cos() + ky.cos()), spec.p("gamma_z")),
    ]
}

pub fn build_qwz_bloch(kx: f64, ky: f64, spec: &ModelSpec) -> Result<OperatorMatrix> {
    expect_family(spec, Family::NhQwz)?;
    Ok(OperatorMatrix {
        entries: pauli_combination(qwz_d_vector(kx, ky, spec)),
        internal_levels: 2,
        geometry: Geometry::Lattice(1, 1),
        kind: OperatorKind::Hamiltonian,
    })
}

/// QWZ lattice. Each `sin k` becomes the hopping pair `∓i/2` and each `cos k` the pair `1/2`,
/// so `H[r, r+x̂] = −i t1 σx − t2 σz` and `H[r, r+ŷ] = −i t1 σy − t2 σz`.
pub fn build_qwz_real_space(
    lx: usize,
    ly: usize,
    spec: &ModelSpec,
    bc_x: Bc,
    bc_y: Bc,
) -> Result<OperatorMatrix> {
    expect_family(spec, Family::NhQwz)?;
    check_size(lx)?;
    check_size(ly)?;
    let (t1, t2) = (spec.p("t1"), spec.p("t2"));
    let s = pauli();
    let onsite = pauli_combination([
        C64::new(0.0, spec.p("gamma_x")),
        C64::new(0.0, spec.p("gamma_y")),
        C64::new(spec.p("m_z"), spec.p("gamma_z")),
    ]);
    let mut hop = [[[ZERO; 2]; 2]; 2];
    for (dir, h) in hop.iter_mut().enumerate() {
        for r in 0..2 {
            for c in 0..2 {
                h[r][c] = -I * t1 * s[dir][r][c] - t2 * s[2][r][c];
            }
        }
    }
    let mut m = OperatorMatrix::zeros(Geometry::Lattice(lx, ly), 2, OperatorKind::Hamiltonian);
    let idx = |x: usize, y: usize, o: usize| (x * ly + y) * 2 + o;
    for x in 0..lx {
        for y in 0..ly {
            for r in 0..2 {
                for c in 0..2 {
                    m.add(idx(x, y, r), idx(x, y, c), onsite[[r, c]]);
                }
            }
            let neighbours = [
                (0, (x + 1 < lx || bc_x == Bc::Pbc).then(|| ((x + 1) % lx, y))),
                (1, (y + 1 < ly || bc_y == Bc::Pbc).then(|| (x, (y + 1) % ly))),
            ];
            for (dir, n) in neighbours {
                let Some((nx, ny)) = n else { continue };
                let t = &hop[dir];
                for r in 0..2 {
                    for c in 0..2 {
                        m.add(idx(x, y, r), idx(nx, ny, c), t[r][c]);
                        // backward hop: the sin k term flips sign, the cos k term does not
                        m.add(idx(nx, ny, r), idx(x, y, c), I * t1 * s[dir][r][c] - t2 * s[2][r][c]);
                    }
                }
            }
        }
    }
    Ok(m)
}

/// Spin rotation `e^{−iθσy}` = [[cos θ, −sin θ], [sin θ, cos θ]].
fn rotate(v: &mut [C64], theta: f64) {
    let (s, c) = theta.sin_cos();
    for cell in v.chunks_exact_mut(2) {
        let (u, d) = (cell[0], cell[1]);
        cell[0] = c * u - s * d;
        cell[1] = s * u + c * d;
    }
}

/// Shift the ↑ component one site to the left.
fn shift_up(v: &mut [C64], bc: Bc) {
    let l = v.len() / 2;
    let first = v[0];
    for j in 0..l - 1 {
        v[2 * j] = v[2 * (j + 1)];
    }
    v[2 * (l - 1)] = if bc == Bc::Pbc { first } else { ZERO };
}

/// Shift the ↓ component one site to the right.
fn shift_down(v: &mut [C64], bc: Bc) {
    let l = v.len() / 2;
    let last = v[2 * (l - 1) + 1];
    for j in (1..l).rev() {
        v[2 * j + 1] = v[2 * (j - 1) + 1];
    }
    v[1] = if bc == Bc::Pbc { last } else { ZERO };
}

fn gain_loss(v: &mut [C64], gamma: f64) {
    let (g, l) = (gamma.exp(), (-gamma).exp());
    for cell in v.chunks_exact_mut(2) {
        cell[0] *= g;
        cell[1] *= l;
    }
}

/// Applies the one-step walk operator to a state in place.
pub fn apply_walk(v: &mut [C64], theta1: f64, theta2: f64, gamma: f64, bc: Bc) {
    rotate(v, theta1 / 2.0);
    shift_down(v, bc);
    rotate(v, theta2 / 2.0);
    gain_loss(v, gamma);
    rotate(v, theta2 / 2.0);
    shift_up(v, bc);
    rotate(v, theta1 / 2.0);
}

/// One-step evolution `R(θ1/2) S↑ R(θ2/2) M R(θ2/2) S↓ R(θ1/2)`. Under OBC amplitude
/// shifted past an end is discarded.
pub fn build_quantum_walk(
    l: usize,
    theta1: f64,
    theta2: f64,
    gamma: f64,
    bc: Bc,
) -> Result<OperatorMatrix> {
    check_size(l)?;
    let mut u = OperatorMatrix::zeros(Geometry::Chain(l), 2, OperatorKind::EvolutionOperator);
    let n = 2 * l;
    let mut col = vec![ZERO; n];
    for c in 0..n {
        col.iter_mut().for_each(|z| *z = ZERO);
        col[c] = C64::new(1.0, 0.0);
        apply_walk(&mut col, theta1, theta2, gamma, bc);
        for (r, z) in col.iter().enumerate() {
            u.entries[[r, c]] = *z;
        }
    }
    Ok(u)
}

/// Chiral-inversion SSH chain with symmetric complex hoppings `(e^{iπ/5} sin λ, cos λ)`.
pub fn build_ssh_chiral_inv(cells: usize, lambda: f64, bc: Bc) -> Result<OperatorMatrix> {
    build_ssh_chiral_inv_with(cells, lambda, bc, InterCell::Printed)
}

pub fn build_ssh_chiral_inv_with(
    cells: usize,
    lambda: f64,
    bc: Bc,
    inter_cell: InterCell,
) -> Result<OperatorMatrix> {
    let (j1, j2) = chiral_inv_hoppings(lambda);
    two_sublattice_chain(cells, j1, j1, j2, [ZERO; 2], bc, inter_cell)
}

/// PT-symmetric SSH chain: real hoppings and on-site `±iδ` on A/B.
pub fn build_ssh_pt(cells: usize, j1: f64, j2: f64, delta: f64, bc: Bc) -> Result<OperatorMatrix> {
    build_ssh_pt_with(cells, j1, j2, delta, bc, InterCell::Printed)
}

pub fn build_ssh_pt_with(
    cells: usize,
    j1: f64,
    j2: f64,
    delta: f64,
    bc: Bc,
    inter_cell: InterCell,
) -> Result<OperatorMatrix> {
    two_sublattice_chain(
        cells,
        j1.into(),
        j1.into(),
        j2.into(),
        [C64::new(0.0, delta), C64::new(0.0, -delta)],
        bc,
        inter_cell,
    )
}

/// Real-space operator described by `spec`.
pub fn build(spec: &ModelSpec) -> Result<OperatorMatrix> {
    spec.validate()?;
    let l = spec.size;
    let p = |n: &str| spec.p(n);
    match spec.family {
        Family::HatanoNelson => build_hatano_nelson(l, p("J_L"), p("J_R"), spec.bc),
        Family::NhSsh => build_nh_ssh_with(l, p("J1L"), p("J1R"), p("J2"), spec.bc, spec.inter_cell),
        Family::NhAah => build_aah(l, p("J"), p("V"), p("theta"), p("h"), spec.bc),
        Family::NhQwz => build_qwz_real_space(l, l, spec, spec.bc, spec.bc_y()),
        Family::QuantumWalk => build_quantum_walk(l, p("theta1"), p("theta2"), p("gamma"), spec.bc),
        Family::SshChiralInv => build_ssh_chiral_inv_with(l, p("lambda"), spec.bc, spec.inter_cell),
        Family::SshPt => build_ssh_pt_with(l, p("J1"), p("J2"), p("delta"), spec.bc, spec.inter_cell),
    }
}

/// Bloch matrix at quasi-momentum `k` of a translation-invariant 1D family, read off a
/// five-cell ring: `H(k) = Σ_d H[0, d] e^{ikd}`.
pub fn bloch_matrix_1d(spec: &ModelSpec, k: f64) -> Result<Array2<C64>> {
    if spec.family == Family::NhAah || spec.family.is_two_dimensional() {
        return Err(Error::NotApplicable(format!(
            "{} has no 1D Bloch form",
            spec.family
        )));
    }
    let ring = build(&spec.with_size(5).with_bc(Bc::Pbc))?;
    let n = ring.internal_levels;
    let mut out = Array2::zeros((n, n));
    for cell in 0..5usize {
        let d = if cell <= 2 { cell as f64 } else { cell as f64 - 5.0 };
        let phase = C64::from_polar(1.0, k * d);
        for r in 0..n {
            for c in 0..n {
                out[[r, c]] += ring.entries[[r, cell * n + c]] * phase;
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn hn_small_obc() {
        let h = build_hatano_nelson(3, 1.0, 0.25, Bc::Obc).unwrap();
        let want = [[0.0, 1.0, 0.0], [0.25, 0.0, 1.0], [0.0, 0.25, 0.0]];
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(h.entries[[i, j]], c(want[i][j], 0.0));
            }
        }
        let p = build_hatano_nelson(3, 1.0, 0.25, Bc::Pbc).unwrap();
        assert_eq!(p.entries[[2, 0]], c(1.0, 0.0));
        assert_eq!(p.entries[[0, 2]], c(0.25, 0.0));
        assert_eq!(build_hatano_nelson(4, 1.0, 1.0, Bc::Obc).unwrap().hermiticity_defect(), 0.0);
        assert!(matches!(build_hatano_nelson(1, 1.0, 1.0, Bc::Obc), Err(Error::Size(_))));
    }

    #[test]
    fn ssh_two_cells_printed() {
        let h = build_nh_ssh(2, 1.0, -1.0, 1.0, Bc::Obc).unwrap();
        // rows/cols: A1 B1 A2 B2
        let want = [
            [0.0, 1.0, 0.0, 1.0],
            [-1.0, 0.0, 0.0, 0.0],
            [0.0, 0.0, 0.0, 1.0],
            [1.0, 0.0, -1.0, 0.0],
        ];
        for i in 0..4 {
            for j in 0..4 {
                assert_eq!(h.entries[[i, j]], c(want[i][j], 0.0), "({i},{j})");
            }
        }
        let s = build_nh_ssh_with(2, 1.0, -1.0, 1.0, Bc::Obc, InterCell::Standard).unwrap();
        assert_eq!(s.entries[[1, 2]], c(1.0, 0.0));
        assert_eq!(s.entries[[2, 1]], c(1.0, 0.0));
        assert_eq!(s.entries[[0, 3]], c(0.0, 0.0));
    }

    #[test]
    fn aah_two_sites() {
        let h = build_aah(2, 1.0, 1.0, 0.0, 0.0, Bc::Obc).unwrap();
        let a = 1.5;
        assert!((h.entries[[0, 0]].re - (2.0 * PI * a).cos()).abs() < 1e-15);
        assert!((h.entries[[1, 1]].re - (4.0 * PI * a).cos()).abs() < 1e-15);
        assert_eq!(h.entries[[0, 1]], c(1.0, 0.0));
        assert!(build_aah(4, 1.0, -1.0, 0.0, 0.0, Bc::Obc).is_err());
    }

    #[test]
    fn aah_imaginary_diagonal_identity() {
        let h = build_aah(34, 1.0, 1.0, 0.0, 1.0, Bc::Pbc).unwrap();
        let alpha = 55.0 / 34.0;
        let mut want = 0.0f64;
        let mut got = 0.0f64;
        for j in 1..=34 {
            want = want.max(1f64.sinh() * (2.0 * PI * alpha * j as f64).sin().abs());
            got = got.max(h.entries[[j - 1, j - 1]].im.abs());
        }
        assert!((want - got).abs() < 1e-12);
        assert!(h.hermiticity_defect() > 0.1);
    }

    #[test]
    fn qwz_bloch_examples() {
        let s = ModelSpec::nh_qwz(4, 1.0, 0.2, 1.0, 0.0, 0.0, 0.0, Bc::Pbc).unwrap();
        let h = build_qwz_bloch(0.0, 0.0, &s).unwrap().entries;
        assert!((h[[0, 0]] - c(0.2, 0.0)).norm() < 1e-15);
        assert!((h[[1, 1]] - c(-0.2, 0.0)).norm() < 1e-15);
        assert_eq!(h[[0, 1]], c(0.0, 0.0));
        let s = ModelSpec::nh_qwz(4, 0.0, 0.2, 1.0, 0.1, 0.1, 0.01, Bc::Pbc).unwrap();
        let d = qwz_d_vector(PI / 2.0, PI / 2.0, &s);
        assert!(d[0].re.abs() < 1e-15 && (d[0].im - 0.1).abs() < 1e-15);
        assert!(d[1].re.abs() < 1e-15 && (d[1].im - 0.1).abs() < 1e-15);
        let d = qwz_d_vector(0.0, 0.0, &s);
        assert!((d[2] - c(0.2, 0.01)).norm() < 1e-15);
        let hn = ModelSpec::hatano_nelson(4, 1.0, 1.0, Bc::Pbc).unwrap();
        assert!(matches!(build_qwz_bloch(0.0, 0.0, &hn), Err(Error::FamilyMismatch { .. })));
    }

    #[test]
    fn walk_unitary_without_loss() {
        let u = build_quantum_walk(12, 0.7, 2.1, 0.0, Bc::Pbc).unwrap();
        assert!(u.unitarity_defect() < 1e-12);
        let u = build_quantum_walk(12, 0.7, 2.1, 0.5, Bc::Pbc).unwrap();
        assert!(u.unitarity_defect() > 0.01);
    }

    #[test]
    fn chiral_inv_limits() {
        let h = build_ssh_chiral_inv(3, 0.0, Bc::Obc).unwrap();
        assert_eq!(h.entries[[0, 1]], c(0.0, 0.0));
        let (j1, j2) = chiral_inv_hoppings(PI / 4.0);
        assert!((j1.norm() - j2.norm()).abs() < 1e-15);
        assert!((j2.re - 0.5f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn ssh_pt_onsite() {
        let h = build_ssh_pt(3, 0.5, 1.0, 0.5, Bc::Obc).unwrap();
        assert_eq!(h.entries[[0, 0]], c(0.0, 0.5));
        assert_eq!(h.entries[[1, 1]], c(0.0, -0.5));
        assert_eq!(build_ssh_pt(3, 0.5, 1.0, 0.0, Bc::Obc).unwrap().hermiticity_defect(), 0.0);
    }

    #[test]
    fn bloch_of_hn_matches_dispersion() {
        let s = ModelSpec::hatano_nelson(8, 1.0, 0.25, Bc::Pbc).unwrap();
        for k in [0.0, 0.3, 1.7, 4.0] {
            let h = bloch_matrix_1d(&s, k).unwrap();
            let want = C64::new(1.25 * f64::cos(k), 0.75 * f64::sin(k));
            assert!((h[[0, 0]] - want).norm() < 1e-14);
        }
    }
}
