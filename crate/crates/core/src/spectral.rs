//! Eigendecomposition with trust diagnostics, spectral curves, winding numbers,
//! loop areas and skin-effect measures.

use std::f64::consts::PI;

use ndarray::{Array1, Array2, ArrayView1};
use ndarray_linalg::{Determinant, Eig, EigVals, Inverse};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Bc, Family, ModelSpec};
use crate::models::{bloch_matrix_1d, build, build_qwz_bloch, qwz_d_vector, OperatorKind, OperatorMatrix};

/// Residual and forward-error ceiling for a trusted eigenpair.
pub const TRUST_TOL: f64 = 1e-6;
/// Steady-state ties are resolved when growth rates agree to this tolerance.
pub const TIE_TOL: f64 = 1e-9;
/// A loop counts as collapsed to an arc when its area is below this fraction of diameter².
pub const ARC_THRESHOLD: f64 = 1e-6;

/// Eigenpairs sorted by growth rate (descending), ties by real part (ascending).
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub eigenvalues: Vec<C64>,
    /// Unit-norm right eigenvectors as columns.
    pub vectors: Array2<C64>,
    /// ‖Hv − Ev‖₂ per pair.
    pub residuals: Vec<f64>,
    /// First-order eigenvalue error bound κ·ε·‖H‖_F per pair, κ the eigenvalue condition number.
    pub error_bounds: Vec<f64>,
    pub kind: OperatorKind,
    pub internal_levels: usize,
}

impl Spectrum {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn vector(&self, i: usize) -> ArrayView1<'_, C64> {
        self.vectors.column(i)
    }

    /// Effective energy: E itself for a Hamiltonian, `i ln μ` for an evolution operator.
    pub fn effective_energy(&self, i: usize) -> C64 {
        effective_energy(self.eigenvalues[i], self.kind)
    }

    pub fn reliable(&self, i: usize) -> bool {
        self.residuals[i] <= TRUST_TOL && self.error_bounds[i] <= TRUST_TOL
    }

    pub fn unreliable_count(&self) -> usize {
        (0..self.len()).filter(|&i| !self.reliable(i)).count()
    }
}

pub fn effective_energy(z: C64, kind: OperatorKind) -> C64 {
    match kind {
        OperatorKind::Hamiltonian => z,
        OperatorKind::EvolutionOperator => C64::new(-z.arg(), z.norm().ln()),
    }
}

/// Short identity string for error reports.
pub fn fingerprint(m: &Array2<C64>) -> String {
    let fro = m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let tr: C64 = m.diag().iter().sum();
    let checksum: f64 = m
        .iter()
        .enumerate()
        .map(|(k, z)| (k % 97 + 1) as f64 * (z.re + 0.5 * z.im))
        .sum();
    format!(
        "{}x{} fro={:.6e} tr={:.6e}{:+.6e}i sum={:.6e}",
        m.nrows(),
        m.ncols(),
        fro,
        tr.re,
        tr.im,
        checksum
    )
}

/// Diagonal similarity scaling (powers of two) equalizing row and column norms.
/// Returns the scaled matrix `D⁻¹AD` and the diagonal of `D`.
pub fn balance(a: &Array2<C64>) -> (Array2<C64>, Vec<f64>) {
    let n = a.nrows();
    let mut b = a.clone();
    let mut d = vec![1.0f64; n];
    let norm1 = |z: &C64| z.re.abs() + z.im.abs();
    for _sweep in 0..100 {
        let mut converged = true;
        for i in 0..n {
            let mut c = 0.0;
            let mut r = 0.0;
            for j in 0..n {
                if j != i {
                    c += norm1(&b[[j, i]]);
                    r += norm1(&b[[i, j]]);
                }
            }
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let s = c + r;
            let mut f = 1.0;
            let mut g = r / 2.0;
            while c < g {
                f *= 2.0;
                c *= 4.0;
            }
            g = r * 2.0;
            while c >= g {
                f /= 2.0;
                c /= 4.0;
            }
            if (c + r) / f < 0.95 * s {
                converged = false;
                d[i] *= f;
                for j in 0..n {
                    b[[i, j]] /= f;
                    b[[j, i]] *= f;
                }
            }
        }
        if converged {
            break;
        }
    }
    (b, d)
}

fn check_finite(m: &Array2<C64>) -> Result<()> {
    if m.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::Contract("operator has non-finite entries".into()))
    }
}

fn sort_order(values: &[C64], kind: OperatorKind) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| {
        let (ea, eb) = (effective_energy(values[a], kind), effective_energy(values[b], kind));
        eb.im.total_cmp(&ea.im).then(ea.re.total_cmp(&eb.re))
    });
    idx
}

/// Full eigendecomposition with balancing, residuals and condition-based error bounds.
pub fn eig(h: &OperatorMatrix) -> Result<Spectrum> {
    let a = &h.entries;
    check_finite(a)?;
    let n = a.nrows();
    let (b, d) = balance(a);
    let (w, wv) = b.eig().map_err(|e| Error::EigenSolver {
        reason: e.to_string(),
        fingerprint: fingerprint(a),
    })?;
    let mut v = Array2::<C64>::zeros((n, n));
    for c in 0..n {
        let mut norm = 0.0;
        for r in 0..n {
            let z = wv[[r, c]] * d[r];
            v[[r, c]] = z;
            norm += z.norm_sqr();
        }
        let norm = norm.sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::EigenSolver {
                reason: format!("eigenvector {c} has norm {norm}"),
                fingerprint: fingerprint(a),
            });
        }
        v.column_mut(c).mapv_inplace(|z| z / norm);
    }
    let order = sort_order(w.as_slice().unwrap(), h.kind);
    let values: Vec<C64> = order.iter().map(|&i| w[i]).collect();
    let mut vectors = Array2::<C64>::zeros((n, n));
    for (k, &i) in order.iter().enumerate() {
        vectors.column_mut(k).assign(&v.column(i));
    }
    let av = a.dot(&vectors);
    let residuals = (0..n)
        .map(|k| {
            let e = values[k];
            av.column(k)
                .iter()
                .zip(vectors.column(k).iter())
                .map(|(x, y)| (x - e * y).norm_sqr())
                .sum::<f64>()
                .sqrt()
        })
        .collect();
    let fro = a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let error_bounds = match vectors.inv() {
        Ok(vi) => (0..n)
            .map(|k| {
                let kappa = vi.row(k).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
                kappa * f64::EPSILON * fro
            })
            .collect(),
        Err(_) => vec![f64::INFINITY; n],
    };
    Ok(Spectrum {
        eigenvalues: values,
        vectors,
        residuals,
        error_bounds,
        kind: h.kind,
        internal_levels: h.internal_levels,
    })
}

/// Eigenvalues only, in the same order convention as [`eig`].
pub fn eigvals(h: &OperatorMatrix) -> Result<Vec<C64>> {
    check_finite(&h.entries)?;
    let (b, _) = balance(&h.entries);
    let w = b.eigvals().map_err(|e| Error::EigenSolver {
        reason: e.to_string(),
        fingerprint: fingerprint(&h.entries),
    })?;
    let order = sort_order(w.as_slice().unwrap(), h.kind);
    Ok(order.iter().map(|&i| w[i]).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SteadyState {
    pub index: usize,
    /// All indices whose growth rate ties with the maximum (including `index`).
    pub degenerate: Vec<usize>,
}

impl SteadyState {
    pub fn is_degenerate(&self) -> bool {
        self.degenerate.len() > 1
    }
}

/// Index of the fastest-growing state; ties within 1e−9 go to the most negative real part.
pub fn steady_state(spec: &Spectrum) -> SteadyState {
    steady_state_of(&spec.eigenvalues, spec.kind)
}

pub fn steady_state_of(values: &[C64], kind: OperatorKind) -> SteadyState {
    let e: Vec<C64> = values.iter().map(|&z| effective_energy(z, kind)).collect();
    let top = e.iter().map(|z| z.im).fold(f64::NEG_INFINITY, f64::max);
    let degenerate: Vec<usize> = (0..e.len()).filter(|&i| e[i].im >= top - TIE_TOL).collect();
    let index = *degenerate
        .iter()
        .min_by(|&&a, &&b| e[a].re.total_cmp(&e[b].re).then(a.cmp(&b)))
        .expect("nonempty spectrum");
    SteadyState { index, degenerate }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralCurve {
    pub points: Vec<C64>,
    pub closed: bool,
    pub label: String,
    /// Band pairing was ambiguous somewhere along the trace.
    pub ambiguous: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WindingResult {
    pub value: i64,
    pub raw_phase: f64,
    pub max_step: f64,
}

impl WindingResult {
    pub fn resolved(&self) -> bool {
        self.max_step < PI / 2.0
    }

    pub fn integrality_error(&self) -> f64 {
        (self.raw_phase - self.value as f64).abs()
    }
}

/// Eigenpairs of a 2×2 matrix; eigenvectors unit-normalized.
pub fn eig2(m: &Array2<C64>) -> ([C64; 2], [[C64; 2]; 2]) {
    let (a, b, c, d) = (m[[0, 0]], m[[0, 1]], m[[1, 0]], m[[1, 1]]);
    let half_tr = (a + d) / 2.0;
    let disc = (((a - d) / 2.0).powi(2) + b * c).sqrt();
    let vals = [half_tr + disc, half_tr - disc];
    let mut vecs = [[C64::new(0.0, 0.0); 2]; 2];
    for (k, &e) in vals.iter().enumerate() {
        let u = [b, e - a];
        let w = [e - d, c];
        let nu = (u[0].norm_sqr() + u[1].norm_sqr()).sqrt();
        let nw = (w[0].norm_sqr() + w[1].norm_sqr()).sqrt();
        vecs[k] = if nu.max(nw) < 1e-300 {
            if k == 0 {
                [C64::new(1.0, 0.0), C64::new(0.0, 0.0)]
            } else {
                [C64::new(0.0, 0.0), C64::new(1.0, 0.0)]
            }
        } else if nu >= nw {
            [u[0] / nu, u[1] / nu]
        } else {
            [w[0] / nw, w[1] / nw]
        };
    }
    (vals, vecs)
}

fn overlap2(a: &[C64; 2], b: &[C64; 2]) -> f64 {
    (a[0].conj() * b[0] + a[1].conj() * b[1]).norm()
}

/// Connects the two bands of a sampled 2×2 family into continuous traces. Bands that
/// exchange across the period are merged into a single closed trace.
fn trace_two_bands(samples: &[([C64; 2], [[C64; 2]; 2])], label: &str) -> Vec<SpectralCurve> {
    let nk = samples.len();
    let mut bands: [Vec<C64>; 2] = [Vec::with_capacity(nk), Vec::with_capacity(nk)];
    let (v0, u0) = samples[0];
    bands[0].push(v0[0]);
    bands[1].push(v0[1]);
    let mut prev = u0;
    let mut ambiguous = false;
    let assign = |prev: &[[C64; 2]; 2], vecs: &[[C64; 2]; 2]| -> (bool, bool) {
        let keep = overlap2(&prev[0], &vecs[0]) + overlap2(&prev[1], &vecs[1]);
        let swap = overlap2(&prev[0], &vecs[1]) + overlap2(&prev[1], &vecs[0]);
        (swap > keep, (keep - swap).abs() < 1e-6)
    };
    for (vals, vecs) in samples.iter().skip(1) {
        let (swap, amb) = assign(&prev, vecs);
        ambiguous |= amb;
        let (i0, i1) = if swap { (1, 0) } else { (0, 1) };
        bands[0].push(vals[i0]);
        bands[1].push(vals[i1]);
        prev = [vecs[i0], vecs[i1]];
    }
    // closing step: does band 0 return to where band 0 started?
    let (swap, amb) = assign(&prev, &u0);
    ambiguous |= amb;
    if swap {
        let mut merged = bands[0].clone();
        merged.extend_from_slice(&bands[1]);
        vec![SpectralCurve {
            points: merged,
            closed: true,
            label: format!("{label}band0+1"),
            ambiguous,
        }]
    } else {
        let [b0, b1] = bands;
        vec![
            SpectralCurve { points: b0, closed: true, label: format!("{label}band0"), ambiguous },
            SpectralCurve { points: b1, closed: true, label: format!("{label}band1"), ambiguous },
        ]
    }
}

fn k_grid(nk: usize) -> impl Iterator<Item = f64> {
    (0..nk).map(move |m| 2.0 * PI * m as f64 / nk as f64)
}

/// PBC spectral traces of a translation-invariant 1D family over k ∈ [0, 2π).
/// For the walk the trace is of the evolution eigenvalues μ.
pub fn pbc_curve_1d(spec: &ModelSpec, nk: usize) -> Result<Vec<SpectralCurve>> {
    if nk < 64 {
        return Err(Error::Contract(format!("Nk = {nk} < 64")));
    }
    if spec.family == Family::NhAah || spec.family.is_two_dimensional() {
        return Err(Error::NotApplicable(format!("{} is not a 1D Bloch family", spec.family)));
    }
    let levels = spec.family.internal_levels();
    if levels == 1 {
        let pts = k_grid(nk)
            .map(|k| bloch_matrix_1d(spec, k).map(|m| m[[0, 0]]))
            .collect::<Result<Vec<_>>>()?;
        return Ok(vec![SpectralCurve {
            points: pts,
            closed: true,
            label: "band0".into(),
            ambiguous: false,
        }]);
    }
    let samples = k_grid(nk)
        .map(|k| bloch_matrix_1d(spec, k).map(|m| eig2(&m)))
        .collect::<Result<Vec<_>>>()?;
    Ok(trace_two_bands(&samples, ""))
}

/// k_y traces of the QWZ Bloch bands at fixed k_x.
pub fn qwz_ky_curves(spec: &ModelSpec, kx: f64, nk: usize) -> Result<Vec<SpectralCurve>> {
    let samples = k_grid(nk)
        .map(|ky| build_qwz_bloch(kx, ky, spec).map(|m| eig2(&m.entries)))
        .collect::<Result<Vec<_>>>()?;
    Ok(trace_two_bands(&samples, &format!("kx={kx:.6}:")))
}

fn wrap_phase(x: f64) -> f64 {
    let mut y = x % (2.0 * PI);
    if y > PI {
        y -= 2.0 * PI;
    } else if y <= -PI {
        y += 2.0 * PI;
    }
    y
}

/// Accumulates principal-branch phase increments of a closed sequence of phases.
fn accumulate(phases: impl Iterator<Item = f64>) -> WindingResult {
    let ph: Vec<f64> = phases.collect();
    let mut total = 0.0;
    let mut max_step = 0.0f64;
    for i in 0..ph.len() {
        let step = wrap_phase(ph[(i + 1) % ph.len()] - ph[i]);
        max_step = max_step.max(step.abs());
        total += step;
    }
    let raw = total / (2.0 * PI);
    WindingResult { value: raw.round() as i64, raw_phase: raw, max_step }
}

fn reference_check(points: impl Iterator<Item = C64>, e0: C64) -> Result<()> {
    let dist = points.map(|z| (z - e0).norm()).fold(f64::INFINITY, f64::min);
    if dist <= 1e-9 {
        Err(Error::ReferenceEnergy { re: e0.re, im: e0.im, distance: dist })
    } else {
        Ok(())
    }
}

/// Winding of a closed trace around `e0`.
pub fn winding_1d(curve: &SpectralCurve, e0: C64) -> Result<WindingResult> {
    if !curve.closed {
        return Err(Error::Contract("winding needs a closed curve".into()));
    }
    reference_check(curve.points.iter().copied(), e0)?;
    let w = accumulate(curve.points.iter().map(|z| (z - e0).arg()));
    if w.max_step >= PI {
        log::warn!("winding under-resolved: max step {:.3}", w.max_step);
    }
    Ok(w)
}

const MAX_NK: usize = 1 << 20;

/// Winding of `arg det(H(k) − E0)` summed over all bands, with Nk doubled until
/// every step is below π/2.
pub fn winding_bands_1d(spec: &ModelSpec, e0: C64, nk: usize) -> Result<WindingResult> {
    let mut nk = nk.max(64);
    loop {
        let curves = pbc_curve_1d(spec, nk)?;
        reference_check(curves.iter().flat_map(|c| c.points.iter().copied()), e0)?;
        let mats = k_grid(nk).map(|k| bloch_matrix_1d(spec, k)).collect::<Result<Vec<_>>>()?;
        let w = accumulate(mats.iter().map(|m| det_shifted(m, e0).arg()));
        if w.resolved() || nk >= MAX_NK {
            return Ok(w);
        }
        nk *= 2;
    }
}

fn det_shifted(m: &Array2<C64>, e0: C64) -> C64 {
    if m.nrows() == 1 {
        m[[0, 0]] - e0
    } else {
        (m[[0, 0]] - e0) * (m[[1, 1]] - e0) - m[[0, 1]] * m[[1, 0]]
    }
}

/// k_y winding at fixed k_x, accumulated on `det(H(k_x, k_y) − E0)`. The determinant
/// phase is the sum of the band phases, so it equals the winding of whichever band
/// loop encloses `e0` without any band bookkeeping. Nk doubles until resolved.
pub fn winding_2d(spec: &ModelSpec, kx: f64, e0: C64, nk: usize) -> Result<WindingResult> {
    if spec.family != Family::NhQwz {
        return Err(Error::FamilyMismatch { expected: Family::NhQwz.to_string(), got: spec.family.to_string() });
    }
    let mut nk = nk.max(64);
    loop {
        let mut dets = Vec::with_capacity(nk);
        let mut nearest = f64::INFINITY;
        for ky in k_grid(nk) {
            let m = build_qwz_bloch(kx, ky, spec)?.entries;
            let (vals, _) = eig2(&m);
            nearest = nearest.min((vals[0] - e0).norm()).min((vals[1] - e0).norm());
            dets.push(det_shifted(&m, e0));
        }
        if nearest <= 1e-9 {
            return Err(Error::ReferenceEnergy { re: e0.re, im: e0.im, distance: nearest });
        }
        let w = accumulate(dets.iter().map(|z| z.arg()));
        if w.resolved() || nk >= MAX_NK {
            return Ok(w);
        }
        nk *= 2;
    }
}

/// Centroid of the k_y traces at fixed k_x: a natural interior reference point.
pub fn qwz_loop_centroid(spec: &ModelSpec, kx: f64, nk: usize) -> Result<Vec<C64>> {
    Ok(qwz_ky_curves(spec, kx, nk)?
        .iter()
        .map(|c| c.points.iter().sum::<C64>() / c.points.len() as f64)
        .collect())
}

/// Quasiperiodic winding: the phase of `det(H(Φ/L) − E0)` as Φ runs over [0, 2π).
/// With the Fibonacci approximant the determinant is 2π/L-periodic in the phase offset,
/// so this single period carries the thermodynamic-limit winding.
pub fn winding_aah(spec: &ModelSpec, e0: C64, n_theta: usize) -> Result<WindingResult> {
    if spec.family != Family::NhAah {
        return Err(Error::FamilyMismatch { expected: Family::NhAah.to_string(), got: spec.family.to_string() });
    }
    let l = spec.size as f64;
    let mut n = n_theta.max(16);
    loop {
        let mut phases = Vec::with_capacity(n);
        for m in 0..n {
            let phi = 2.0 * PI * m as f64 / n as f64;
            let mut s = spec.with_bc(Bc::Pbc);
            s.set("theta", spec.p("theta") + phi / l);
            let op = build(&s)?;
            let nearest = eigvals(&op)?
                .iter()
                .map(|z| (z - e0).norm())
                .fold(f64::INFINITY, f64::min);
            if nearest <= 1e-9 {
                return Err(Error::ReferenceEnergy { re: e0.re, im: e0.im, distance: nearest });
            }
            let mut h = op.entries;
            for i in 0..h.nrows() {
                h[[i, i]] -= e0;
            }
            let (sign, _) = h.sln_det().map_err(|e| Error::EigenSolver {
                reason: e.to_string(),
                fingerprint: fingerprint(&h),
            })?;
            phases.push(sign.arg());
        }
        let w = accumulate(phases.into_iter());
        if w.resolved() || n >= 1 << 16 {
            return Ok(w);
        }
        n *= 2;
    }
}

/// Σ_m |w_{j,m}|² per site, internal levels summed into the site.
pub fn cumulative_population(spec: &Spectrum) -> Vec<f64> {
    let n = spec.vectors.nrows();
    let lv = spec.internal_levels;
    let mut p = vec![0.0; n / lv];
    for ((r, _c), z) in spec.vectors.indexed_iter() {
        p[r / lv] += z.norm_sqr();
    }
    p
}

/// Absolute shoelace area of a closed trace.
pub fn loop_area(curve: &SpectralCurve) -> Result<f64> {
    if !curve.closed {
        return Err(Error::Contract("loop area needs a closed curve".into()));
    }
    Ok(shoelace(&curve.points).abs())
}

fn shoelace(p: &[C64]) -> f64 {
    let n = p.len();
    let mut s = 0.0;
    for i in 0..n {
        let (a, b) = (p[i], p[(i + 1) % n]);
        s += a.re * b.im - b.re * a.im;
    }
    s / 2.0
}

/// Largest extent of a point set, from projections on 360 directions (relative error < 4e-5).
pub fn spectral_diameter<'a>(points: impl IntoIterator<Item = &'a C64>) -> f64 {
    let pts: Vec<C64> = points.into_iter().copied().collect();
    if pts.is_empty() {
        return 0.0;
    }
    (0..360)
        .map(|d| {
            let u = C64::from_polar(1.0, PI * d as f64 / 360.0);
            let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
            for z in &pts {
                let x = z.re * u.re + z.im * u.im;
                lo = lo.min(x);
                hi = hi.max(x);
            }
            hi - lo
        })
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AreaReport {
    pub area: f64,
    pub diameter: f64,
}

impl AreaReport {
    pub fn collapsed(&self) -> bool {
        self.area < ARC_THRESHOLD * self.diameter * self.diameter
    }
}

/// Area and diameter of a set of closed traces; the area is the sum of loop areas.
pub fn curves_area(curves: &[SpectralCurve]) -> Result<AreaReport> {
    let mut area = 0.0;
    for c in curves {
        area += loop_area(c)?;
    }
    Ok(AreaReport { area, diameter: spectral_diameter(curves.iter().flat_map(|c| c.points.iter())) })
}

/// Area swept by the full 2D QWZ Bloch spectrum, counted with multiplicity:
/// Σ_bands ∫∫ |Im(conj(∂E/∂kx)·∂E/∂ky)| dkx dky on an Nk×Nk midpoint grid.
/// It vanishes exactly when every band depends on momentum through a single real
/// combination, i.e. when the spectrum is a union of arcs.
pub fn qwz_spectral_area(spec: &ModelSpec, nk: usize) -> Result<AreaReport> {
    if spec.family != Family::NhQwz {
        return Err(Error::FamilyMismatch { expected: Family::NhQwz.to_string(), got: spec.family.to_string() });
    }
    let (t1, t2) = (spec.p("t1"), spec.p("t2"));
    let dk = 2.0 * PI / nk as f64;
    let mut area = 0.0;
    let mut pts = Vec::with_capacity(2 * nk * nk);
    for a in 0..nk {
        let kx = (a as f64 + 0.5) * dk;
        for b in 0..nk {
            let ky = (b as f64 + 0.5) * dk;
            let d = qwz_d_vector(kx, ky, spec);
            let e2 = d[0] * d[0] + d[1] * d[1] + d[2] * d[2];
            let e = e2.sqrt();
            pts.push(e);
            pts.push(-e);
            if e.norm() < 1e-12 {
                continue;
            }
            // ∂d/∂kx and ∂d/∂ky
            let dx = [2.0 * t1 * kx.cos(), 0.0, 2.0 * t2 * kx.sin()];
            let dy = [0.0, 2.0 * t1 * ky.cos(), 2.0 * t2 * ky.sin()];
            let ex = (d[0] * dx[0] + d[1] * dx[1] + d[2] * dx[2]) / e;
            let ey = (d[0] * dy[0] + d[1] * dy[1] + d[2] * dy[2]) / e;
            // both bands ±E share the same Jacobian magnitude
            area += 2.0 * (ex.conj() * ey).im.abs() * dk * dk;
        }
    }
    Ok(AreaReport { area, diameter: spectral_diameter(pts.iter()) })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Localization {
    /// Signed slope of ln|ψ_j| per site; |β| = exp(decay_rate).
    pub decay_rate: f64,
    /// Larger of the weights in the ⌈L/10⌉ outermost sites at either end.
    pub edge_weight: f64,
}

/// Skin-effect measures of a 1D single-orbital state.
pub fn localization_fit(state: ArrayView1<'_, C64>) -> Result<Localization> {
    localization_fit_levels(state, 1)
}

/// As [`localization_fit`], with `levels` orbitals per site summed into site amplitudes.
pub fn localization_fit_levels(state: ArrayView1<'_, C64>, levels: usize) -> Result<Localization> {
    let n = state.len() / levels;
    let site: Vec<f64> = (0..n)
        .map(|j| (0..levels).map(|s| state[j * levels + s].norm_sqr()).sum::<f64>())
        .collect();
    let total: f64 = site.iter().sum();
    if total == 0.0 || !total.is_finite() {
        return Err(Error::Contract("localization fit of a zero state".into()));
    }
    let amp: Vec<f64> = site.iter().map(|p| (p / total).sqrt()).collect();
    let pts: Vec<(f64, f64)> = amp
        .iter()
        .enumerate()
        .filter(|(_, &a)| a > 1e-12)
        .map(|(j, &a)| (j as f64, a.ln()))
        .collect();
    let decay_rate = if pts.len() < 2 {
        0.0
    } else {
        let m = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        sxy / sxx
    };
    let w = n.div_ceil(10);
    let left: f64 = site[..w].iter().sum::<f64>() / total;
    let right: f64 = site[n - w..].iter().sum::<f64>() / total;
    Ok(Localization { decay_rate, edge_weight: left.max(right) })
}

/// Largest fraction of a state's weight found in any quadrant of an Lx×Ly two-orbital lattice.
pub fn max_quadrant_weight(state: ArrayView1<'_, C64>, lx: usize, ly: usize) -> f64 {
    let mut q = [0.0f64; 4];
    let mut total = 0.0;
    for x in 0..lx {
        for y in 0..ly {
            let w = state[(x * ly + y) * 2].norm_sqr() + state[(x * ly + y) * 2 + 1].norm_sqr();
            q[(2 * x / lx) * 2 + 2 * y / ly] += w;
            total += w;
        }
    }
    q.iter().cloned().fold(0.0, f64::max) / total
}

/// Fraction of weight in the ⌈L/10⌉ rows at either y-edge of the lattice.
pub fn y_edge_weight(state: ArrayView1<'_, C64>, lx: usize, ly: usize) -> f64 {
    let w = ly.div_ceil(10);
    let (mut lo, mut hi, mut total) = (0.0, 0.0, 0.0);
    for x in 0..lx {
        for y in 0..ly {
            let p = state[(x * ly + y) * 2].norm_sqr() + state[(x * ly + y) * 2 + 1].norm_sqr();
            total += p;
            if y < w {
                lo += p;
            }
            if y >= ly - w {
                hi += p;
            }
        }
    }
    f64::max(lo, hi) / total
}

pub fn unit(v: ArrayView1<'_, C64>) -> Array1<C64> {
    let n = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v.mapv(|z| z / n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::build_hatano_nelson;

    fn circle(n: usize, r: f64, c: C64) -> SpectralCurve {
        SpectralCurve {
            points: (0..n).map(|m| c + C64::from_polar(r, 2.0 * PI * m as f64 / n as f64)).collect(),
            closed: true,
            label: "circle".into(),
            ambiguous: false,
        }
    }

    #[test]
    fn identity_spectrum() {
        let mut h = build_hatano_nelson(6, 0.0, 0.0, Bc::Obc).unwrap();
        for i in 0..6 {
            h.entries[[i, i]] = C64::new(1.0, 0.0);
        }
        let s = eig(&h).unwrap();
        for i in 0..6 {
            assert!((s.eigenvalues[i] - 1.0).norm() < 1e-14);
            assert!(s.residuals[i] < 1e-14);
            assert!(s.reliable(i));
        }
    }

    #[test]
    fn hn_analytic_energies() {
        let h = build_hatano_nelson(20, 1.0, 0.25, Bc::Obc).unwrap();
        let s = eig(&h).unwrap();
        let mut got: Vec<f64> = s.eigenvalues.iter().map(|z| z.re).collect();
        got.sort_by(f64::total_cmp);
        let mut want: Vec<f64> = (1..=20).map(|m| 2.0 * 0.5 * (m as f64 * PI / 21.0).cos()).collect();
        want.sort_by(f64::total_cmp);
        for (a, b) in got.iter().zip(&want) {
            assert!((a - b).abs() < 1e-8);
        }
        for i in 0..20 {
            assert!(s.eigenvalues[i].im.abs() < 1e-8);
            let n: f64 = s.vector(i).iter().map(|z| z.norm_sqr()).sum();
            assert!((n - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn strongly_nonnormal_pairs_flagged() {
        let h = build_hatano_nelson(400, 1.0, 0.25, Bc::Obc).unwrap();
        let s = eig(&h).unwrap();
        assert!(s.unreliable_count() > 100);
    }

    #[test]
    fn balance_is_similarity() {
        let h = build_hatano_nelson(5, 1.0, 1e-4, Bc::Obc).unwrap();
        let (b, d) = balance(&h.entries);
        for i in 0..5 {
            for j in 0..5 {
                let back = b[[i, j]] * d[i] / d[j];
                assert!((back - h.entries[[i, j]]).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn steady_state_tie_break() {
        let v = [C64::new(0.5, 1.0), C64::new(-0.5, 1.0), C64::new(0.0, 0.2)];
        let s = steady_state_of(&v, OperatorKind::Hamiltonian);
        assert_eq!(s.index, 1);
        assert_eq!(s.degenerate, vec![0, 1]);
        let real = [C64::new(2.0, 0.0), C64::new(-1.0, 0.0), C64::new(0.3, 0.0)];
        let s = steady_state_of(&real, OperatorKind::Hamiltonian);
        assert_eq!(s.index, 1);
        assert_eq!(s.degenerate.len(), 3);
        let mu = [C64::from_polar(0.9, 0.3), C64::from_polar(1.1, 2.0), C64::from_polar(1.0, -1.0)];
        assert_eq!(steady_state_of(&mu, OperatorKind::EvolutionOperator).index, 1);
    }

    #[test]
    fn circle_winding_and_area() {
        let c = circle(1024, 1.0, C64::new(0.0, 0.0));
        assert_eq!(winding_1d(&c, C64::new(0.0, 0.0)).unwrap().value, 1);
        assert_eq!(winding_1d(&c, C64::new(5.0, 0.0)).unwrap().value, 0);
        assert!((loop_area(&c).unwrap() - PI).abs() < 1e-4);
        assert!(matches!(winding_1d(&c, C64::new(1.0, 0.0)), Err(Error::ReferenceEnergy { .. })));
        let mut open = c.clone();
        open.closed = false;
        assert!(loop_area(&open).is_err());
    }

    #[test]
    fn hn_curves() {
        let s = ModelSpec::hatano_nelson(10, 1.0, 0.25, Bc::Pbc).unwrap();
        let c = &pbc_curve_1d(&s, 1024).unwrap()[0];
        for (m, z) in c.points.iter().enumerate() {
            let k = 2.0 * PI * m as f64 / 1024.0;
            assert!((z - C64::new(1.25 * k.cos(), 0.75 * k.sin())).norm() < 1e-14);
        }
        assert!((loop_area(c).unwrap() - PI * 1.25 * 0.75).abs() < 1e-3);
        let s = ModelSpec::hatano_nelson(10, 1.0, 0.5, Bc::Pbc).unwrap();
        let c = &pbc_curve_1d(&s, 256).unwrap()[0];
        assert_eq!(winding_1d(c, C64::new(0.0, 0.0)).unwrap().value, 1);
        let s = ModelSpec::hatano_nelson(10, 1.0, 2.0, Bc::Pbc).unwrap();
        assert_eq!(winding_bands_1d(&s, C64::new(0.0, 0.0), 64).unwrap().value, -1);
        let s = ModelSpec::hatano_nelson(10, 1.0, 1.0, Bc::Pbc).unwrap();
        let c = &pbc_curve_1d(&s, 256).unwrap()[0];
        assert!(c.points.iter().all(|z| z.im.abs() < 1e-15 && z.re.abs() <= 2.0 + 1e-15));
        assert!(pbc_curve_1d(&s, 32).is_err());
    }

    #[test]
    fn ssh_curves_collapse_at_critical() {
        let s = ModelSpec::nh_ssh(10, 1.0, -1.0, 1.0, Bc::Pbc).unwrap();
        let r = curves_area(&pbc_curve_1d(&s, 1024).unwrap()).unwrap();
        assert!(r.collapsed(), "{r:?}");
        let s = ModelSpec::nh_ssh(10, 1.0, -0.5, 1.0, Bc::Pbc).unwrap();
        let r = curves_area(&pbc_curve_1d(&s, 1024).unwrap()).unwrap();
        assert!(!r.collapsed(), "{r:?}");
    }

    #[test]
    fn localization_of_flat_and_geometric_states() {
        let flat = Array1::from_elem(50, C64::new(50f64.sqrt().recip(), 0.0));
        let f = localization_fit(flat.view()).unwrap();
        assert!(f.decay_rate.abs() < 1e-12);
        assert!((f.edge_weight - 0.1).abs() < 1e-12);
        let geo = Array1::from_iter((0..40).map(|j| C64::new(0.5f64.powi(j), 0.0)));
        let g = localization_fit(geo.view()).unwrap();
        assert!((g.decay_rate - 0.5f64.ln()).abs() < 1e-12);
        assert!(g.edge_weight > 0.99);
        assert!(localization_fit(Array1::zeros(5).view()).is_err());
    }

    #[test]
    fn eig2_pairs() {
        let m = ndarray::array![[C64::new(1.0, 0.5), C64::new(2.0, 0.0)], [C64::new(0.3, -1.0), C64::new(-0.7, 0.0)]];
        let (vals, vecs) = eig2(&m);
        for k in 0..2 {
            let v = vecs[k];
            for r in 0..2 {
                let hv = m[[r, 0]] * v[0] + m[[r, 1]] * v[1];
                assert!((hv - vals[k] * v[r]).norm() < 1e-13);
            }
        }
    }
}
