//! Analytic generalized-Brillouin-zone results used as oracles for the numerics:
//! closed-form Hatano–Nelson eigenpairs, β polynomials and point-gap-closing locations.

use std::f64::consts::PI;

use ndarray::{Array1, Array2};
use ndarray_linalg::EigVals;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Family, InterCell, ModelSpec};

const I: C64 = C64::new(0.0, 1.0);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GbzSolution {
    pub betas: Vec<C64>,
    /// Geometric-mean modulus √|Π β| over the root pair (quadratic cases).
    pub modulus: Option<f64>,
    pub energy: Option<C64>,
    pub family: Family,
}

/// `E_m = 2 √(J_R J_L) cos(mπ/(L+1))`, m = 1..L, principal square root of the product.
pub fn hn_obc_energies(l: usize, j_l: f64, j_r: f64) -> Result<Vec<C64>> {
    if l < 2 {
        return Err(Error::Size(format!("L = {l} < 2")));
    }
    if j_l == 0.0 {
        return Err(Error::Degenerate("J_L = 0".into()));
    }
    let root = C64::new(j_r * j_l, 0.0).sqrt();
    Ok((1..=l)
        .map(|m| 2.0 * root * (m as f64 * PI / (l as f64 + 1.0)).cos())
        .collect())
}

/// Mode index of the OBC steady state for a real ratio λ: m = 1 for λ < 0 (largest
/// imaginary energy), m = L for λ > 0 (real spectrum, most negative energy wins the tie).
pub fn hn_steady_mode(l: usize, lambda: f64) -> usize {
    if lambda < 0.0 {
        1
    } else {
        l
    }
}

/// `Σ_{j=1}^L j^k x^j` for k ∈ {0, 1, 2}: closed forms away from x = 1, Taylor series in
/// u = ln x near it.
pub fn power_geometric_sum(k: usize, x: C64, l: usize) -> C64 {
    assert!(k <= 2, "only k ≤ 2 supported");
    let lf = l as f64;
    let u = x.ln();
    if (u * lf).norm() < 2.0 {
        return power_geometric_series(k, u, l);
    }
    let one = C64::new(1.0, 0.0);
    let xl = x.powf(lf);
    let d = one - x;
    match k {
        0 => x * (one - xl) / d,
        1 => x * (one - (lf + 1.0) * xl + lf * xl * x) / (d * d),
        _ => {
            let a = (lf + 1.0).powi(2);
            let b = 2.0 * lf * lf + 2.0 * lf - 1.0;
            x * (one + x - a * xl + b * xl * x - lf * lf * xl * x * x) / (d * d * d)
        }
    }
}

/// Σ_n uⁿ/n! · Σ_j j^{k+n}.
fn power_geometric_series(k: usize, u: C64, l: usize) -> C64 {
    let mut sum = C64::new(0.0, 0.0);
    let mut coef = C64::new(1.0, 0.0);
    for n in 0..200usize {
        let p = power_sum(k + n, l);
        let term = coef * p;
        sum += term;
        if n > 4 && term.norm() < 1e-18 * sum.norm() {
            break;
        }
        coef = coef * u / (n as f64 + 1.0);
    }
    sum
}

/// Σ_{j=1}^L j^p.
fn power_sum(p: usize, l: usize) -> f64 {
    (1..=l).map(|j| (j as f64).powi(p as i32)).sum()
}

/// Moments Σ_j j^k ρ^{2j} sin²(jmπ/(L+1)) for k = 0, 1, 2, from three geometric sums each.
fn envelope_moments(rho: f64, l: usize, m: usize) -> [f64; 3] {
    let x = C64::new(rho * rho, 0.0);
    let w2 = C64::from_polar(1.0, 2.0 * m as f64 * PI / (l as f64 + 1.0));
    let mut out = [0.0; 3];
    for (k, o) in out.iter_mut().enumerate() {
        let g = 2.0 * power_geometric_sum(k, x, l)
            - power_geometric_sum(k, x * w2, l)
            - power_geometric_sum(k, x / w2, l);
        *o = g.re / 4.0;
    }
    out
}

/// Distance from the edge the mode leans on: `j` for |λ| < 1, `L+1−j` otherwise,
/// together with ρ = min(|λ|^{1/2}, |λ|^{−1/2}).
fn lean(lambda_abs: f64) -> (bool, f64) {
    let r = lambda_abs.sqrt();
    if r <= 1.0 {
        (false, r)
    } else {
        (true, 1.0 / r)
    }
}

/// Closed-form OBC eigenvector `w_j ∝ λ^{j/2} sin(jmπ/(L+1))`, principal branch, unit norm.
pub fn hn_obc_state(l: usize, lambda: C64, m: usize) -> Result<Array1<C64>> {
    if lambda == C64::new(0.0, 0.0) {
        return Err(Error::Degenerate("lambda = 0".into()));
    }
    if m < 1 || m > l {
        return Err(Error::Parameter(format!("mode {m} outside 1..={l}")));
    }
    let theta = lambda.arg() / 2.0;
    let (reflect, rho) = lean(lambda.norm());
    let [s0, _, _] = envelope_moments(rho, l, m);
    let norm = s0.sqrt().recip();
    let lf = l as f64 + 1.0;
    Ok(Array1::from_iter((1..=l).map(|j| {
        let d = if reflect { lf - j as f64 } else { j as f64 };
        let amp = norm * rho.powf(d) * (j as f64 * m as f64 * PI / lf).sin();
        C64::from_polar(amp, j as f64 * theta)
    })))
}

/// λ-derivative of [`hn_obc_state`] for real λ: `∂w_j = w_j (j − ⟨j⟩)/(2λ)`.
pub fn hn_obc_state_derivative(l: usize, lambda: f64, m: usize) -> Result<(Array1<C64>, Array1<C64>)> {
    let w = hn_obc_state(l, C64::new(lambda, 0.0), m)?;
    let mean: f64 = w.iter().enumerate().map(|(j, z)| (j + 1) as f64 * z.norm_sqr()).sum();
    let dw = Array1::from_iter(
        w.iter()
            .enumerate()
            .map(|(j, z)| z * ((j + 1) as f64 - mean) / (2.0 * lambda)),
    );
    Ok((w, dw))
}

/// Position variance of mode m under the envelope ρ^{2d} sin², from the closed-form moments.
pub(crate) fn hn_position_variance(lambda: f64, l: usize, m: usize) -> f64 {
    let (_, rho) = lean(lambda.abs());
    let [s0, s1, s2] = envelope_moments(rho, l, m);
    (s2 * s0 - s1 * s1) / (s0 * s0)
}

/// Roots of `J2 J1L β² + (J2² + J1L J1R − E²) β + J2 J1R = 0`.
///
/// This bulk equation describes the chain whose inter-cell bond joins B_j to A_{j+1}.
/// The printed geometry is its mirror image, whose localization factors are the
/// reciprocals 1/β.
pub fn ssh_beta_roots(e: C64, spec: &ModelSpec) -> Result<GbzSolution> {
    if spec.family != Family::NhSsh {
        return Err(Error::FamilyMismatch { expected: Family::NhSsh.to_string(), got: spec.family.to_string() });
    }
    let (j1l, j1r, j2) = (spec.p("J1L"), spec.p("J1R"), spec.p("J2"));
    let a = C64::new(j2 * j1l, 0.0);
    if a.norm() == 0.0 {
        return Err(Error::Degenerate("J2·J1L = 0: leading coefficient vanishes".into()));
    }
    let b = C64::new(j2 * j2 + j1l * j1r, 0.0) - e * e;
    let c = C64::new(j2 * j1r, 0.0);
    let betas = quadratic_roots(a, b, c);
    let modulus = Some((betas[0] * betas[1]).norm().sqrt());
    Ok(GbzSolution { betas: betas.to_vec(), modulus, energy: Some(e), family: Family::NhSsh })
}

/// Roots of `a z² + b z + c` without cancellation.
pub fn quadratic_roots(a: C64, b: C64, c: C64) -> [C64; 2] {
    let disc = (b * b - 4.0 * a * c).sqrt();
    let q = if (b.conj() * disc).re >= 0.0 { -(b + disc) / 2.0 } else { -(b - disc) / 2.0 };
    if q.norm() == 0.0 {
        return [C64::new(0.0, 0.0); 2];
    }
    [q / a, c / q]
}

/// Roots of a polynomial with coefficients from highest degree down, as companion
/// eigenvalues polished by Newton steps.
pub fn polynomial_roots(coeffs: &[C64]) -> Result<Vec<C64>> {
    let lead = coeffs[0];
    if lead.norm() == 0.0 {
        return Err(Error::Degenerate("leading coefficient vanishes".into()));
    }
    let n = coeffs.len() - 1;
    let mut comp = Array2::<C64>::zeros((n, n));
    for j in 0..n {
        comp[[0, j]] = -coeffs[j + 1] / lead;
    }
    for i in 1..n {
        comp[[i, i - 1]] = C64::new(1.0, 0.0);
    }
    let (bal, _) = crate::spectral::balance(&comp);
    let w = bal.eigvals().map_err(|e| Error::EigenSolver {
        reason: e.to_string(),
        fingerprint: crate::spectral::fingerprint(&comp),
    })?;
    Ok(w.iter().map(|&z| newton_polish(coeffs, z)).collect())
}

fn horner(coeffs: &[C64], z: C64) -> (C64, C64) {
    let mut p = C64::new(0.0, 0.0);
    let mut dp = C64::new(0.0, 0.0);
    for &c in coeffs {
        dp = dp * z + p;
        p = p * z + c;
    }
    (p, dp)
}

fn newton_polish(coeffs: &[C64], mut z: C64) -> C64 {
    for _ in 0..4 {
        let (p, dp) = horner(coeffs, z);
        if dp.norm() == 0.0 {
            break;
        }
        let step = p / dp;
        let next = z - step;
        if horner(coeffs, next).0.norm() >= p.norm() {
            break;
        }
        z = next;
    }
    z
}

/// Relative residual |p(z)| / Σ|c_k||z|^k.
pub fn polynomial_residual(coeffs: &[C64], z: C64) -> f64 {
    let (p, _) = horner(coeffs, z);
    let scale: f64 = coeffs
        .iter()
        .rev()
        .enumerate()
        .map(|(k, c)| c.norm() * z.norm().powi(k as i32))
        .sum();
    p.norm() / scale
}

/// Roots of the `J1R = −J1L` phase equation and the matching eigenpairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SshPhaseRoots {
    pub cells: usize,
    pub j1l: f64,
    pub j2: f64,
    /// Phases θ with β₁ = e^{iθ}, β₂ = −e^{−iθ}; complex at finite size.
    pub theta: Vec<C64>,
    /// Energy with non-negative real part for each root; −E is also an eigenvalue.
    pub energies: Vec<C64>,
}

impl SshPhaseRoots {
    /// Both signs of every root energy: the full OBC spectrum.
    pub fn spectrum(&self) -> Vec<C64> {
        self.energies.iter().flat_map(|&e| [e, -e]).collect()
    }

    /// The even/odd-size phase equation evaluated at root `n`, relative to its term scale.
    pub fn phase_equation_residual(&self, n: usize) -> f64 {
        let c = self.j2 / self.j1l;
        let t = self.theta[n];
        let l = self.cells as f64;
        let (a, b) = if self.cells % 2 == 0 {
            (((l + 1.0) * t).cos(), I * c * (l * t).sin())
        } else {
            (((l + 1.0) * t).sin(), -I * c * (l * t).cos())
        };
        (a + b).norm() / (a.norm() + b.norm())
    }

    /// Eigenvector for root `n` and energy sign `sign` (±1), built from the two-β
    /// superposition with the boundary condition c₁φ₁B = −c₂φ₂B.
    pub fn state(&self, n: usize, sign: f64, inter_cell: InterCell) -> Array1<C64> {
        let l = self.cells;
        let t = self.theta[n];
        let e = sign * self.energies[n];
        let betas = [(I * t).exp(), -(-I * t).exp()];
        let phi_a: Vec<C64> = betas.iter().map(|&b| (self.j1l + self.j2 / b) / e).collect();
        let mut v = Array1::<C64>::zeros(2 * l);
        for j in 1..=l {
            let p: Vec<C64> = betas.iter().map(|&b| b.powi(j as i32)).collect();
            let a = p[0] * phi_a[0] - p[1] * phi_a[1];
            let b = p[0] - p[1];
            let cell = match inter_cell {
                InterCell::Standard => j - 1,
                InterCell::Printed => l - j,
            };
            v[2 * cell] = a;
            v[2 * cell + 1] = b;
        }
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        v.mapv(|z| z / norm)
    }
}

/// Solves `cos((L+1)θ) + i c sin(Lθ) = 0` (even L) / `sin((L+1)θ) − i c cos(Lθ) = 0` (odd L),
/// c = J2/J1L, for the J1R = −J1L chain.
///
/// The roots are complex at finite L, so they cannot be bracketed on the real axis.
/// With θ = k + π/2 and u = e^{ik} both parities become the single polynomial
/// `u^{2L+2} − i c u^{2L+1} + i c u − 1 = 0`; its roots are found as companion
/// eigenvalues, the trivial pair u = ±1 is dropped and one root of each (u, 1/u) pair is kept.
/// Flipping the sign of J1L maps θ → −θ.
pub fn ssh_transcendental_solve(cells: usize, j1l: f64, j1r: f64, j2: f64) -> Result<SshPhaseRoots> {
    if cells < 2 {
        return Err(Error::Size(format!("L = {cells} < 2")));
    }
    if j1l == 0.0 || (j1r + j1l).abs() > 1e-12 * j1l.abs() {
        return Err(Error::Parameter(format!(
            "phase equation needs J1R = −J1L ≠ 0 (got J1L = {j1l}, J1R = {j1r})"
        )));
    }
    let c = j2 / j1l.abs();
    let deg = 2 * cells + 2;
    let mut coeffs = vec![C64::new(0.0, 0.0); deg + 1];
    coeffs[0] = C64::new(1.0, 0.0);
    coeffs[1] = -I * c;
    coeffs[deg - 1] = I * c;
    coeffs[deg] = C64::new(-1.0, 0.0);
    let roots = polynomial_roots(&coeffs)?;
    let mut kept: Vec<C64> = roots
        .into_iter()
        .filter(|u| (u - 1.0).norm() > 1e-6 && (u + 1.0).norm() > 1e-6)
        .filter(|u| u.im > 1e-12 * u.norm() || (u.im.abs() <= 1e-12 * u.norm() && u.norm() < 1.0))
        .collect();
    if kept.len() != cells {
        return Err(Error::RootCount { expected: cells, found: kept.len() });
    }
    kept.sort_by(|a, b| a.arg().total_cmp(&b.arg()));
    let sign = j1l.signum();
    let theta: Vec<C64> = kept.iter().map(|u| sign * (-I * u.ln() + PI / 2.0)).collect();
    let energies = theta
        .iter()
        .map(|t| {
            let e = (C64::new(j2 * j2 + j1l * j1r, 0.0) + 2.0 * I * j2 * j1l * t.sin()).sqrt();
            if e.re < 0.0 {
                -e
            } else {
                e
            }
        })
        .collect();
    Ok(SshPhaseRoots { cells, j1l, j2, theta, energies })
}

/// Characteristic quartic of the QWZ stripe (PBC in x, OBC in y) at fixed k_x.
///
/// Coefficients, highest degree first, in the localization factor β = −e^{−ik_y}:
/// `(t1²−t2²)β⁴ − 2(γy t1 + M t2)β³ + (E² + γy² − 2(t1²+t2²) − M² − X²)β²
///  + 2(γy t1 − M t2)β + (t1²−t2²)`, with M = m_z − 2t2 cos k_x + iγz and X = 2t1 sin k_x + iγx.
pub fn qwz_quartic_coefficients(e: C64, kx: f64, spec: &ModelSpec) -> [C64; 5] {
    let (t1, t2, gy) = (spec.p("t1"), spec.p("t2"), spec.p("gamma_y"));
    let m = C64::new(spec.p("m_z") - 2.0 * t2 * kx.cos(), spec.p("gamma_z"));
    let x = C64::new(2.0 * t1 * kx.sin(), spec.p("gamma_x"));
    let lead = C64::new(t1 * t1 - t2 * t2, 0.0);
    [
        lead,
        -2.0 * (gy * t1 + m * t2),
        e * e + gy * gy - 2.0 * (t1 * t1 + t2 * t2) - m * m - x * x,
        2.0 * (gy * t1 - m * t2),
        lead,
    ]
}

/// Roots of [`qwz_quartic_coefficients`]. When t1 = ±t2 the quartic and constant
/// terms vanish and the quadratic remainder is solved instead.
pub fn qwz_beta_quartic(e: C64, kx: f64, spec: &ModelSpec) -> Result<GbzSolution> {
    if spec.family != Family::NhQwz {
        return Err(Error::FamilyMismatch { expected: Family::NhQwz.to_string(), got: spec.family.to_string() });
    }
    let c = qwz_quartic_coefficients(e, kx, spec);
    let scale = c.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if c[0].norm() <= 1e-12 * scale {
        log::info!("t1 = ±t2: quartic reduces to a quadratic");
        let betas = quadratic_roots(c[1], c[2], c[3]);
        let modulus = Some((betas[0] * betas[1]).norm().sqrt());
        return Ok(GbzSolution { betas: betas.to_vec(), modulus, energy: Some(e), family: Family::NhQwz });
    }
    let betas = polynomial_roots(&c)?;
    Ok(GbzSolution { betas, modulus: None, energy: Some(e), family: Family::NhQwz })
}

/// `|β| = √|(cosh γ cos θ2 − sinh γ)/(cosh γ cos θ2 + sinh γ)|` for the lossy walk.
pub fn qw_beta_modulus(theta2: f64, gamma: f64) -> Result<f64> {
    let (ch, sh) = (gamma.cosh(), gamma.sinh());
    // cos(3π/2) evaluates to ~1.8e-16; snap to the exact zero
    let c = theta2.cos();
    let c = if c.abs() < 1e-15 { 0.0 } else { c };
    let den = ch * c + sh;
    if den.abs() < 1e-14 {
        return Err(Error::Pole(format!(
            "cosh γ cos θ2 + sinh γ = 0 at θ2 = {theta2}, γ = {gamma}"
        )));
    }
    if gamma == 0.0 || c == 0.0 {
        return Ok(1.0);
    }
    Ok(((ch * c - sh) / den).abs().sqrt())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalPoint {
    /// Name of the control parameter (ratio or angle).
    pub parameter: String,
    pub value: f64,
    /// The whole spectrum, not only individual loops, collapses to arcs here.
    pub full_collapse: bool,
}

/// Locations where the point gap closes.
pub fn point_gap_closing(spec: &ModelSpec) -> Result<Vec<CriticalPoint>> {
    let pt = |parameter: &str, value: f64, full_collapse: bool| CriticalPoint {
        parameter: parameter.to_string(),
        value,
        full_collapse,
    };
    match spec.family {
        Family::HatanoNelson | Family::NhSsh => Ok(vec![pt("lambda", 1.0, true), pt("lambda", -1.0, true)]),
        Family::NhAah => {
            let (j, v) = (spec.p("J"), spec.p("V"));
            Ok(vec![pt("h", (2.0 * j / v).ln(), true)])
        }
        Family::NhQwz => Ok(vec![
            pt("t1/m_z", 0.0, true),
            pt("t2/m_z", 0.0, false),
            pt("gamma_y/m_z", 0.0, false),
        ]),
        Family::QuantumWalk => Ok(vec![pt("theta2", PI / 2.0, true), pt("theta2", 3.0 * PI / 2.0, true)]),
        Family::SshChiralInv | Family::SshPt => Err(Error::NotApplicable(format!(
            "{} has a line gap only",
            spec.family
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Bc;

    #[test]
    fn hn_energies_small() {
        let e = hn_obc_energies(3, 1.0, 1.0).unwrap();
        let want = [2f64.sqrt(), 0.0, -(2f64.sqrt())];
        for (a, b) in e.iter().zip(want) {
            assert!((a - b).norm() < 1e-15);
        }
        // principal root of −1 is i; cos(mπ/4) = (√2/2, 0, −√2/2)
        let e = hn_obc_energies(3, 1.0, -1.0).unwrap();
        let want = [I * 2f64.sqrt(), C64::new(0.0, 0.0), -I * 2f64.sqrt()];
        for (a, b) in e.iter().zip(want) {
            assert!((a - b).norm() < 1e-15);
        }
        assert!(matches!(hn_obc_energies(3, 0.0, 1.0), Err(Error::Degenerate(_))));
    }

    #[test]
    fn geometric_sums_match_direct() {
        let l = 37;
        for x in [
            C64::new(0.3, 0.0),
            C64::new(0.999, 0.0),
            C64::new(1.0, 0.0),
            C64::from_polar(0.97, 0.4),
            C64::from_polar(1.0, 2.0 * PI / 38.0),
            C64::new(1.02, 0.01),
        ] {
            for k in 0..3 {
                let direct: C64 = (1..=l).map(|j| (j as f64).powi(k as i32) * x.powi(j as i32)).sum();
                let got = power_geometric_sum(k, x, l);
                assert!((got - direct).norm() < 1e-10 * direct.norm().max(1.0), "k={k} x={x}");
            }
        }
        let lf = 50.0;
        let g2 = power_geometric_sum(2, C64::new(1.0, 0.0), 50);
        assert!((g2.re - (2.0 * lf * lf * lf + 3.0 * lf * lf + lf) / 6.0).abs() < 1e-9);
    }

    #[test]
    fn hn_state_normalized_and_hermitian_limit() {
        let w = hn_obc_state(34, C64::new(-1.0, 0.0), 17).unwrap();
        let n: f64 = w.iter().map(|z| z.norm_sqr()).sum();
        assert!((n - 1.0).abs() < 1e-12);
        let w = hn_obc_state(10, C64::new(1.0, 0.0), 3).unwrap();
        let s: Vec<f64> = (1..=10).map(|j| (j as f64 * 3.0 * PI / 11.0).sin()).collect();
        let ratio = w[0].re / s[0];
        for j in 0..10 {
            assert!((w[j].re - ratio * s[j]).abs() < 1e-14 && w[j].im.abs() < 1e-15);
        }
        assert!(hn_obc_state(10, C64::new(0.0, 0.0), 1).is_err());
        // large |λ| must not overflow
        let w = hn_obc_state(800, C64::new(4.0, 0.0), 1).unwrap();
        assert!(w.iter().all(|z| z.re.is_finite()));
    }

    #[test]
    fn beta_quadratic_vieta() {
        let s = ModelSpec::nh_ssh(10, 1.0, 0.25, 1.0, Bc::Obc).unwrap();
        let g = ssh_beta_roots(C64::new(0.3, 0.7), &s).unwrap();
        let p = g.betas[0] * g.betas[1];
        assert!((p - 0.25).norm() < 1e-14);
        assert!((g.modulus.unwrap() - 0.5).abs() < 1e-14);
        let s = ModelSpec::nh_ssh(10, 0.0, 0.25, 1.0, Bc::Obc);
        let s = s.unwrap();
        assert!(matches!(ssh_beta_roots(C64::new(0.3, 0.0), &s), Err(Error::Degenerate(_))));
    }

    #[test]
    fn phase_roots_dimer_limit() {
        // J2 → 0: roots approach the zeros of cos((L+1)θ)
        let r = ssh_transcendental_solve(6, 1.0, -1.0, 1e-9).unwrap();
        for t in &r.theta {
            assert!(((7.0 * t).cos()).norm() < 1e-6, "{t}");
        }
        let r = ssh_transcendental_solve(5, 1.0, -1.0, 1e-9).unwrap();
        for t in &r.theta {
            assert!(((6.0 * t).sin()).norm() < 1e-6, "{t}");
        }
        assert!(ssh_transcendental_solve(6, 1.0, -0.5, 1.0).is_err());
    }

    #[test]
    fn quadratic_reduction_product() {
        let s = ModelSpec::nh_qwz(4, 0.2, 0.2, 1.0, 0.1, 0.1, 0.01, Bc::Pbc).unwrap();
        let kx = 0.8;
        let g = qwz_beta_quartic(C64::new(0.4, 0.1), kx, &s).unwrap();
        assert_eq!(g.betas.len(), 2);
        let m = C64::new(1.0 - 0.4 * f64::cos(kx), 0.01);
        let want = (m - 0.1) / (m + 0.1);
        assert!((g.betas[0] * g.betas[1] - want).norm() < 1e-12);
        let s0 = ModelSpec::nh_qwz(4, 0.2, 0.2, 1.0, 0.1, 0.0, 0.01, Bc::Pbc).unwrap();
        let g = qwz_beta_quartic(C64::new(0.4, 0.1), kx, &s0).unwrap();
        assert!(((g.betas[0] * g.betas[1]).norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn walk_modulus() {
        assert_eq!(qw_beta_modulus(1.5 * PI, 0.5).unwrap(), 1.0);
        assert_eq!(qw_beta_modulus(0.3, 0.0).unwrap(), 1.0);
        assert!((qw_beta_modulus(PI, 0.5).unwrap() - 0.5f64.exp()).abs() < 1e-14);
        // cos θ2 = −tanh γ puts the denominator at zero
        let t = (-(0.5f64).tanh()).acos();
        assert!(matches!(qw_beta_modulus(t, 0.5), Err(Error::Pole(_))));
    }

    #[test]
    fn closing_points() {
        let aah = ModelSpec::nh_aah(34, 1.0, 1.0, 0.0, 0.5, Bc::Pbc).unwrap();
        let p = point_gap_closing(&aah).unwrap();
        assert!((p[0].value - 2f64.ln()).abs() < 1e-15);
        let hn = ModelSpec::hatano_nelson(10, 1.0, 1.0, Bc::Obc).unwrap();
        let v: Vec<f64> = point_gap_closing(&hn).unwrap().iter().map(|c| c.value).collect();
        assert_eq!(v, vec![1.0, -1.0]);
        let q = ModelSpec::nh_qwz(4, 0.2, 0.2, 1.0, 0.1, 0.1, 0.01, Bc::Pbc).unwrap();
        let p = point_gap_closing(&q).unwrap();
        assert_eq!(p.iter().filter(|c| c.full_collapse).count(), 1);
        assert!(p[0].full_collapse && p[0].parameter == "t1/m_z");
        let pt = ModelSpec::ssh_pt(10, 1.0, 1.0, 0.5, Bc::Obc).unwrap();
        assert!(matches!(point_gap_closing(&pt), Err(Error::NotApplicable(_))));
    }
}
