//! Quantum and classical Fisher information of parameterized eigenstates, the analytic
//! Hatano–Nelson oracle, and power-law scaling fits.

use std::fmt;

use ndarray::{Array1, ArrayView1};
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gbz::{hn_obc_state_derivative, hn_position_variance, hn_steady_mode};
use crate::model::{chiral_inv_hoppings, Bc, Family, ModelSpec};
use crate::models::build;
use crate::spectral::{eig, steady_state, Spectrum};

/// Minimum overlap accepted when following an eigenstate across a parameter step.
pub const MIN_OVERLAP: f64 = 0.9;
/// Maximum relative change of F_Q when the finite-difference step is halved.
pub const STEP_STABILITY_TOL: f64 = 1e-3;
/// Probabilities below this are left out of the classical Fisher sum.
pub const CFI_PROB_FLOOR: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Selector {
    /// Largest growth rate, ties to the most negative real part.
    SteadyState,
    /// Hatano–Nelson: closed-form mode index m (1-based). Other families: rank in the
    /// growth-sorted spectrum (1-based).
    Mode(usize),
    /// Zero-energy edge mode (chiral-inversion SSH) or the +iδ mode (PT-symmetric SSH).
    EdgeState,
}

impl fmt::Display for Selector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Selector::SteadyState => f.write_str("steady"),
            Selector::Mode(m) => write!(f, "m={m}"),
            Selector::EdgeState => f.write_str("edge"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DerivativePath {
    /// Closed-form states for the open Hatano–Nelson chain, numerics otherwise.
    #[default]
    Auto,
    Analytic,
    Numeric,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivativeOptions {
    /// Finite-difference step relative to max(1, |λ|).
    pub rel_step: f64,
    pub path: DerivativePath,
    /// Produce records from eigenpairs that fail the trust gate (flagged).
    pub allow_untrusted: bool,
}

impl Default for DerivativeOptions {
    fn default() -> Self {
        DerivativeOptions { rel_step: 1e-5, path: DerivativePath::Auto, allow_untrusted: false }
    }
}

impl DerivativeOptions {
    pub fn step(&self, lambda: f64) -> f64 {
        self.rel_step * lambda.abs().max(1.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateDerivative {
    pub psi: Array1<C64>,
    pub dpsi: Array1<C64>,
    pub energy: C64,
    /// Smallest |⟨ψ(λ)|ψ(λ±δ)⟩| used in tracking (1 on the analytic path).
    pub gauge_overlap: f64,
    pub step: f64,
    /// Some eigenpair failed the trust gate and was used anyway.
    pub untrusted: bool,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FisherRecord {
    pub model: String,
    pub lambda: f64,
    #[serde(rename = "L")]
    pub size: usize,
    pub selector: String,
    #[serde(rename = "F_Q")]
    pub f_q: f64,
    #[serde(rename = "F_C")]
    pub f_c: f64,
    pub fd_step: f64,
    pub gauge_overlap: f64,
    pub residual_flag: bool,
    pub notes: Vec<String>,
}

impl FisherRecord {
    /// Semicolon-joined flags; "ok" when there is nothing to report.
    pub fn flags(&self) -> String {
        let mut f = Vec::new();
        if self.residual_flag {
            f.push("untrusted".to_string());
        }
        f.extend(self.notes.iter().cloned());
        if f.is_empty() {
            "ok".into()
        } else {
            f.join(";")
        }
    }
}

fn norm_sqr(v: ArrayView1<'_, C64>) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum()
}

fn inner(a: ArrayView1<'_, C64>, b: ArrayView1<'_, C64>) -> C64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}

fn check_normalized(psi: ArrayView1<'_, C64>) -> Result<()> {
    let n = norm_sqr(psi);
    if (n - 1.0).abs() > 1e-8 {
        Err(Error::Contract(format!("state norm² = {n}, expected 1")))
    } else {
        Ok(())
    }
}

/// `F_Q = 4(⟨∂ψ|∂ψ⟩ − |⟨∂ψ|ψ⟩|²)` for a unit-norm pure state.
pub fn qfi_pure(psi: ArrayView1<'_, C64>, dpsi: ArrayView1<'_, C64>) -> Result<f64> {
    check_normalized(psi)?;
    let dd = norm_sqr(dpsi);
    let f = 4.0 * (dd - inner(dpsi, psi).norm_sqr());
    // rounding can leave a tiny negative value for pure-gauge derivatives
    Ok(if f < 0.0 && f > -1e-12 * dd.max(1.0) { 0.0 } else { f })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassicalFisher {
    pub value: f64,
    /// Upper bound on the contribution of the dropped low-probability outcomes.
    pub dropped_bound: f64,
}

/// Position-basis classical Fisher information `Σ (∂p_n)²/p_n`, `∂p_n = 2 Re(ψ_n* ∂ψ_n)`.
pub fn cfi_position(psi: ArrayView1<'_, C64>, dpsi: ArrayView1<'_, C64>) -> Result<ClassicalFisher> {
    check_normalized(psi)?;
    let mut value = 0.0;
    let mut dropped_bound = 0.0;
    for (a, da) in psi.iter().zip(dpsi.iter()) {
        let p = a.norm_sqr();
        if p < CFI_PROB_FLOOR {
            // (2 Re ψ*∂ψ)²/|ψ|² ≤ 4|∂ψ|²
            dropped_bound += 4.0 * da.norm_sqr();
            continue;
        }
        let dp = 2.0 * (a.conj() * da).re;
        value += dp * dp / p;
    }
    Ok(ClassicalFisher { value, dropped_bound })
}

/// Closed-form QFI of the open Hatano–Nelson mode m at real λ.
///
/// The state is `N r^j e^{ijθ} sin(jmπ/(L+1))` with λ = (r e^{iθ})², so the QFI is
/// `((∂λ r)² + r²(∂λ θ)²) · 4 Var_p(j) / r²`, where the position variance comes from
/// finite geometric and arithmetic-geometric sums. θ is constant for real λ.
pub fn qfi_hn_analytic(lambda: f64, l: usize, m: usize) -> Result<f64> {
    if lambda == 0.0 {
        return Err(Error::Degenerate("lambda = 0".into()));
    }
    if m < 1 || m > l {
        return Err(Error::Parameter(format!("mode {m} outside 1..={l}")));
    }
    let r2 = lambda.abs();
    let dr2 = 1.0 / (4.0 * r2);
    let dtheta2 = 0.0;
    Ok((dr2 + r2 * dtheta2) * 4.0 * hn_position_variance(lambda, l, m) / r2)
}

/// Picks the eigenpair a selector refers to in a numeric spectrum.
fn select_index(spec: &ModelSpec, s: &Spectrum, selector: Selector) -> Result<(usize, Vec<String>)> {
    let mut notes = Vec::new();
    match selector {
        Selector::SteadyState => {
            let st = steady_state(s);
            if st.is_degenerate() {
                notes.push(format!("steady-tie:{}", st.degenerate.len()));
            }
            Ok((st.index, notes))
        }
        Selector::Mode(m) => {
            if spec.family == Family::HatanoNelson && spec.bc == Bc::Obc {
                // match the closed-form energy of mode m
                let e = crate::gbz::hn_obc_energies(spec.size, spec.p("J_L"), spec.p("J_R"))?[m - 1];
                let i = (0..s.len())
                    .min_by(|&a, &b| {
                        (s.eigenvalues[a] - e).norm().total_cmp(&(s.eigenvalues[b] - e).norm())
                    })
                    .unwrap();
                Ok((i, notes))
            } else if m >= 1 && m <= s.len() {
                Ok((m - 1, notes))
            } else {
                Err(Error::Parameter(format!("mode {m} outside 1..={}", s.len())))
            }
        }
        Selector::EdgeState => edge_index(spec, s).map(|i| (i, notes)),
    }
}

/// Edge-mode selection: chiral-inversion SSH takes min |E| (must lie below a quarter of
/// the hopping scale), PT-symmetric SSH the state nearest +iδ (within 0.1δ).
fn edge_index(spec: &ModelSpec, s: &Spectrum) -> Result<usize> {
    let by = |f: &dyn Fn(C64) -> f64| {
        (0..s.len())
            .min_by(|&a, &b| f(s.eigenvalues[a]).total_cmp(&f(s.eigenvalues[b])))
            .unwrap()
    };
    match spec.family {
        Family::SshChiralInv => {
            let i = by(&|e: C64| e.norm());
            let (j1, j2) = chiral_inv_hoppings(spec.p("lambda"));
            let tol = 0.25 * (j1.norm() + j2.norm());
            let e = s.eigenvalues[i];
            if e.norm() > tol {
                return Err(Error::EdgeStateAbsent {
                    target: "0".into(),
                    detail: format!("smallest |E| = {:.4e} exceeds {:.4e}", e.norm(), tol),
                });
            }
            Ok(i)
        }
        Family::SshPt => {
            let delta = spec.p("delta");
            let target = C64::new(0.0, delta);
            let i = by(&|e: C64| (e - target).norm());
            let dist = (s.eigenvalues[i] - target).norm();
            if dist >= 0.1 * delta.abs() {
                return Err(Error::EdgeStateAbsent {
                    target: format!("{delta}i"),
                    detail: format!("nearest eigenvalue at distance {dist:.4e}"),
                });
            }
            Ok(i)
        }
        f => Err(Error::NotApplicable(format!("{f} has no selected edge state"))),
    }
}

fn trust_check(s: &Spectrum, i: usize, allow: bool, untrusted: &mut bool) -> Result<()> {
    if s.reliable(i) {
        return Ok(());
    }
    if allow {
        *untrusted = true;
        return Ok(());
    }
    Err(Error::Untrusted {
        index: i,
        detail: format!("residual {:.3e}, error bound {:.3e}", s.residuals[i], s.error_bounds[i]),
    })
}

/// Eigenstate of `s` continuing `psi`, gauge-fixed so that ⟨psi|result⟩ > 0.
fn track(psi: ArrayView1<'_, C64>, s: &Spectrum, lambda: f64) -> Result<(usize, Array1<C64>, f64)> {
    let ov: Vec<f64> = (0..s.len()).map(|k| inner(psi, s.vector(k)).norm()).collect();
    let mut order: Vec<usize> = (0..ov.len()).collect();
    order.sort_by(|&a, &b| ov[b].total_cmp(&ov[a]));
    let best = order[0];
    if ov[best] < MIN_OVERLAP {
        return Err(Error::TrackingFailure { overlap: ov[best], lambda });
    }
    let ties: Vec<usize> = order.iter().copied().filter(|&k| ov[best] - ov[k] < 1e-6).collect();
    if ties.len() > 1 {
        return Err(Error::DegenerateOverlap { indices: ties });
    }
    let v = s.vector(best);
    let ph = inner(psi, v);
    let g = ph.conj() / ph.norm();
    Ok((best, v.mapv(|z| z * g), ov[best]))
}

fn uses_analytic(spec: &ModelSpec, opts: &DerivativeOptions) -> Result<bool> {
    let hn_open = spec.family == Family::HatanoNelson && spec.bc == Bc::Obc;
    match opts.path {
        DerivativePath::Auto => Ok(hn_open),
        DerivativePath::Numeric => Ok(false),
        DerivativePath::Analytic if hn_open => Ok(true),
        DerivativePath::Analytic => Err(Error::NotApplicable(format!(
            "closed-form states exist only for the open Hatano–Nelson chain, not {}",
            spec.label()
        ))),
    }
}

/// `(ψ, ∂λψ)` for the selected eigenstate at control parameter `lambda`.
///
/// Numeric path: central difference of eigenvectors at λ ± δ, each matched to ψ(λ) by
/// maximal overlap and gauge-fixed to a real positive overlap with it.
pub fn state_derivative(
    spec: &ModelSpec,
    lambda: f64,
    selector: Selector,
    opts: &DerivativeOptions,
) -> Result<StateDerivative> {
    let step = opts.step(lambda);
    if uses_analytic(spec, opts)? {
        let m = match selector {
            Selector::SteadyState => hn_steady_mode(spec.size, lambda),
            Selector::Mode(m) => m,
            Selector::EdgeState => {
                return Err(Error::NotApplicable("Hatano–Nelson has no edge-state selector".into()))
            }
        };
        let (psi, dpsi) = hn_obc_state_derivative(spec.size, lambda, m)?;
        let j_l = spec.p("J_L");
        let energy = crate::gbz::hn_obc_energies(spec.size, j_l, lambda * j_l)?[m - 1];
        return Ok(StateDerivative {
            psi,
            dpsi,
            energy,
            gauge_overlap: 1.0,
            step: 0.0,
            untrusted: false,
            notes: vec![format!("analytic:m={m}")],
        });
    }
    let center = eig(&build(&spec.with_lambda(lambda))?)?;
    numeric_derivative(spec, lambda, selector, step, opts, &center)
}

fn numeric_derivative(
    spec: &ModelSpec,
    lambda: f64,
    selector: Selector,
    step: f64,
    opts: &DerivativeOptions,
    center: &Spectrum,
) -> Result<StateDerivative> {
    let mid = spec.with_lambda(lambda);
    let (i, notes) = select_index(&mid, center, selector)?;
    let mut untrusted = false;
    trust_check(center, i, opts.allow_untrusted, &mut untrusted)?;
    let psi = center.vector(i).to_owned();
    let mut sides = Vec::with_capacity(2);
    let mut min_overlap = f64::INFINITY;
    for sgn in [-1.0, 1.0] {
        let lam = lambda + sgn * step;
        let s = eig(&build(&spec.with_lambda(lam))?)?;
        let (k, v, ov) = track(psi.view(), &s, lam)?;
        trust_check(&s, k, opts.allow_untrusted, &mut untrusted)?;
        min_overlap = min_overlap.min(ov);
        sides.push(v);
    }
    let dpsi = (&sides[1] - &sides[0]).mapv(|z| z / (2.0 * step));
    Ok(StateDerivative {
        psi,
        dpsi,
        energy: center.eigenvalues[i],
        gauge_overlap: min_overlap,
        step,
        untrusted,
        notes,
    })
}

/// Fisher record for one (λ, L) cell, with the half-step stability check on the numeric path.
pub fn fisher_record(
    spec: &ModelSpec,
    lambda: f64,
    selector: Selector,
    opts: &DerivativeOptions,
) -> Result<FisherRecord> {
    let step = opts.step(lambda);
    let (d, mut notes) = if uses_analytic(spec, opts)? {
        let d = state_derivative(spec, lambda, selector, opts)?;
        let notes = d.notes.clone();
        (d, notes)
    } else {
        let center = eig(&build(&spec.with_lambda(lambda))?)?;
        let d = numeric_derivative(spec, lambda, selector, step, opts, &center)?;
        let half = numeric_derivative(spec, lambda, selector, step / 2.0, opts, &center)?;
        let (f1, f2) = (qfi_pure(d.psi.view(), d.dpsi.view())?, qfi_pure(half.psi.view(), half.dpsi.view())?);
        let mut notes = d.notes.clone();
        let rel = (f1 - f2).abs() / f1.abs().max(f64::MIN_POSITIVE);
        if rel >= STEP_STABILITY_TOL {
            notes.push(format!("step-unstable:{rel:.2e}"));
        }
        let mut d = d;
        d.gauge_overlap = d.gauge_overlap.min(half.gauge_overlap);
        d.untrusted |= half.untrusted;
        (d, notes)
    };
    let f_q = qfi_pure(d.psi.view(), d.dpsi.view())?;
    let cf = cfi_position(d.psi.view(), d.dpsi.view())?;
    if cf.dropped_bound > 1e-6 * f_q.max(1e-300) {
        notes.push(format!("cfi-dropped<={:.2e}", cf.dropped_bound));
    }
    if cf.value > f_q + 1e-6 * f_q {
        notes.push("cfi>qfi".into());
    }
    Ok(FisherRecord {
        model: spec.family.tag().to_string(),
        lambda,
        size: spec.size,
        selector: selector.to_string(),
        f_q,
        f_c: cf.value,
        fd_step: d.step,
        gauge_overlap: d.gauge_overlap,
        residual_flag: d.untrusted,
        notes,
    })
}

/// Edge-state Fisher record for the line-gap chains (open boundaries only).
pub fn edge_state_qfi(spec: &ModelSpec, lambda: f64, opts: &DerivativeOptions) -> Result<FisherRecord> {
    if !matches!(spec.family, Family::SshChiralInv | Family::SshPt) {
        return Err(Error::NotApplicable(format!("{} has no line-gap edge state", spec.family)));
    }
    if spec.bc != Bc::Obc {
        return Err(Error::Contract("edge states need open boundaries".into()));
    }
    fisher_record(spec, lambda, Selector::EdgeState, opts)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    /// Prefactor of F = a L^b.
    pub a: f64,
    pub b: f64,
    pub r_squared: f64,
    pub points: Vec<(f64, f64)>,
}

impl ScalingFit {
    /// The exponent is only meaningful for a good power-law fit.
    pub fn meaningful(&self) -> bool {
        self.r_squared > 0.99
    }
}

/// Least-squares fit of ln F = ln a + b ln L over at least five sizes.
pub fn scaling_fit(points: &[(f64, f64)]) -> Result<ScalingFit> {
    if points.len() < 2 {
        return Err(Error::Fit(format!("{} point(s); a power law needs at least 5", points.len())));
    }
    for w in points.windows(2) {
        if w[1].0 <= w[0].0 {
            return Err(Error::Contract("sizes must be strictly increasing".into()));
        }
    }
    if let Some(p) = points.iter().find(|p| !(p.1 > 0.0) || !(p.0 > 0.0)) {
        return Err(Error::Contract(format!("non-positive value in point {p:?}")));
    }
    if points.len() < 5 {
        return Err(Error::Fit(format!("{} points; a power law needs at least 5", points.len())));
    }
    Ok(log_log_fit(points))
}

/// Log–log least squares without the size-count requirement.
pub fn log_log_fit(points: &[(f64, f64)]) -> ScalingFit {
    let n = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let b = sxy / sxx;
    let ln_a = my - b * mx;
    let ss_res: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - ln_a - b * x).powi(2)).sum();
    let r_squared = if syy == 0.0 { 1.0 } else { 1.0 - ss_res / syy };
    ScalingFit { a: ln_a.exp(), b, r_squared, points: points.to_vec() }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub lambda: f64,
    pub fit: Option<ScalingFit>,
    pub records: Vec<FisherRecord>,
    /// (L, reason) for every cell that produced no record, plus a fit failure if any.
    pub failures: Vec<(usize, String)>,
}

/// Scaling exponent b(λ) from Fisher records over a (λ, L) grid. Cells run in parallel;
/// failed cells are reported, never dropped silently.
pub fn exponent_sweep(
    template: &ModelSpec,
    lambdas: &[f64],
    sizes: &[usize],
    selector: Selector,
    opts: &DerivativeOptions,
) -> Result<Vec<SweepRow>> {
    if sizes.len() < 5 {
        return Err(Error::Fit(format!("{} sizes; a power law needs at least 5", sizes.len())));
    }
    if lambdas.is_empty() {
        return Err(Error::Contract("empty lambda grid".into()));
    }
    let cells: Vec<(usize, usize)> = (0..lambdas.len())
        .flat_map(|a| (0..sizes.len()).map(move |b| (a, b)))
        .collect();
    let results: Vec<Result<FisherRecord>> = cells
        .par_iter()
        .map(|&(a, b)| {
            let spec = template.with_size(sizes[b]);
            if template.family.is_ssh_like() && selector == Selector::EdgeState {
                edge_state_qfi(&spec, lambdas[a], opts)
            } else {
                fisher_record(&spec, lambdas[a], selector, opts)
            }
        })
        .collect();
    let mut rows: Vec<SweepRow> = lambdas
        .iter()
        .map(|&lambda| SweepRow { lambda, fit: None, records: Vec::new(), failures: Vec::new() })
        .collect();
    for (&(a, b), r) in cells.iter().zip(results) {
        match r {
            Ok(rec) => rows[a].records.push(rec),
            Err(e) => rows[a].failures.push((sizes[b], e.to_string())),
        }
    }
    for row in &mut rows {
        let pts: Vec<(f64, f64)> = row.records.iter().map(|r| (r.size as f64, r.f_q)).collect();
        match scaling_fit(&pts) {
            Ok(f) => row.fit = Some(f),
            Err(e) => row.failures.push((0, format!("fit: {e}"))),
        }
    }
    Ok(rows)
}
