// Closed forms checked against dense diagonalization and independent direct sums.

use std::f64::consts::PI;

use nhsense::gbz::{
    hn_obc_energies, hn_obc_state, polynomial_residual, qw_beta_modulus, qwz_beta_quartic,
    qwz_quartic_coefficients, ssh_beta_roots, ssh_transcendental_solve,
};
use nhsense::metrology::{qfi_hn_analytic, qfi_pure};
use nhsense::models::{build, build_nh_ssh_with, build_qwz_bloch, OperatorMatrix};
use nhsense::spectral::{eig, eigvals, steady_state};
use nhsense::{Bc, InterCell, ModelSpec, C64};
use ndarray::Array1;

fn nearest(vals: &[C64], z: C64) -> f64 {
    vals.iter().map(|w| (w - z).norm()).fold(f64::INFINITY, f64::min)
}

fn residual(h: &OperatorMatrix, v: &Array1<C64>, e: C64) -> f64 {
    (h.entries.dot(v) - v.mapv(|x| x * e)).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

#[test]
fn ssh_phase_roots_reproduce_the_open_spectrum() {
    for (cells, j1l, j2) in [(40, 1.0, 1.0), (41, 1.0, 1.0), (40, -1.3, 0.6), (25, 0.8, 1.7)] {
        let roots = ssh_transcendental_solve(cells, j1l, -j1l, j2).unwrap();
        assert_eq!(roots.theta.len(), cells);
        let spec = ModelSpec::nh_ssh(cells, j1l, -j1l, j2, Bc::Obc).unwrap();
        let numeric = eigvals(&build(&spec).unwrap()).unwrap();
        // compared as E²: the root fixes E² and the square root is ill-conditioned at edge modes
        let sq = |v: &[C64]| v.iter().map(|z| z * z).collect::<Vec<_>>();
        let (oracle, numeric) = (sq(&roots.spectrum()), sq(&numeric));
        for &z in &oracle {
            assert!(nearest(&numeric, z) < 1e-8, "L={cells}: E² = {z} missing from eig");
        }
        for &z in &numeric {
            assert!(nearest(&oracle, z) < 1e-8, "L={cells}: eig value E² = {z} not a root");
        }
        for n in 0..cells {
            assert!(roots.phase_equation_residual(n) < 1e-10);
        }
        for geometry in [InterCell::Printed, InterCell::Standard] {
            let h = build_nh_ssh_with(cells, j1l, -j1l, j2, Bc::Obc, geometry).unwrap();
            for n in [0, cells / 2, cells - 1] {
                for sign in [1.0, -1.0] {
                    let v = roots.state(n, sign, geometry);
                    let r = residual(&h, &v, sign * roots.energies[n]);
                    // edge-mode energies inherit a √ε error from the square root
                    let tol = if roots.energies[n].norm() < 1e-4 { 4.0 * f64::EPSILON.sqrt() } else { 1e-8 };
                    assert!(r < tol, "L={cells} J1L={j1l} {geometry:?} n={n}: {r}");
                }
            }
        }
    }
}

#[test]
fn ssh_phase_roots_without_inter_cell_hopping() {
    // J2 → 0 decouples the dimers; u^{2L+2} = 1 leaves θ = kπ/(L+1) + π/2
    let roots = ssh_transcendental_solve(6, 1.0, -1.0, 1e-12).unwrap();
    for t in &roots.theta {
        let k = (t.re - PI / 2.0) * 7.0 / PI;
        assert!((k - k.round()).abs() < 1e-9 && t.im.abs() < 1e-9, "{t}");
    }
}

#[test]
fn ssh_localization_factors_approach_unit_circle() {
    // at finite size the two moduli differ from 1 by O(1/L); the deviation shrinks with L
    let mut prev = f64::INFINITY;
    for cells in [40, 80, 160] {
        let spec = ModelSpec::nh_ssh(cells, 1.0, -1.0, 1.0, Bc::Obc).unwrap();
        let s = eig(&build(&spec).unwrap()).unwrap();
        let e = s.eigenvalues[steady_state(&s).index];
        let sol = ssh_beta_roots(e, &spec).unwrap();
        let dev = sol.betas.iter().map(|b| (b.norm() - 1.0).abs()).fold(0.0, f64::max);
        assert!(dev < 0.2 / cells as f64, "L={cells}: deviation {dev}");
        assert!(dev < prev);
        prev = dev;
    }
}

#[test]
fn qwz_quartic_vanishes_on_bloch_bands() {
    let spec = ModelSpec::nh_qwz(8, 0.3, 0.2, 1.0, 0.1, 0.1, 0.01, Bc::Pbc).unwrap();
    for (kx, ky) in [(0.3, 1.1), (PI / 2.0, -0.7), (2.9, 0.05), (-1.4, 2.2)] {
        let h = build_qwz_bloch(kx, ky, &spec).unwrap();
        let beta = -C64::new(0.0, -ky).exp();
        for e in eigvals(&h).unwrap() {
            let c = qwz_quartic_coefficients(e, kx, &spec);
            assert!(polynomial_residual(&c, beta) < 1e-13);
            let roots = qwz_beta_quartic(e, kx, &spec).unwrap().betas;
            assert!(nearest(&roots, beta) < 1e-8);
        }
    }
}

#[test]
fn qwz_stripe_without_y_loss_has_unit_product() {
    let spec = ModelSpec::nh_qwz(8, 0.2, 0.2, 1.0, 0.1, 0.0, 0.01, Bc::Pbc).unwrap();
    for kx in [0.0, 0.7, PI / 2.0] {
        let b = qwz_beta_quartic(C64::new(0.4, 0.1), kx, &spec).unwrap().betas;
        assert_eq!(b.len(), 2);
        assert!(((b[0] * b[1]).norm() - 1.0).abs() < 1e-12);
    }
}

#[test]
fn walk_modulus_values() {
    assert_eq!(qw_beta_modulus(1.5 * PI, 0.5).unwrap(), 1.0);
    assert!((qw_beta_modulus(PI, 0.5).unwrap() - 0.5f64.exp()).abs() < 1e-14);
    for t in [0.1, 1.0, 2.0, 4.0] {
        assert_eq!(qw_beta_modulus(t, 0.0).unwrap(), 1.0);
    }
}

#[test]
fn hn_closed_form_eigenpairs() {
    for (l, lam) in [(12, C64::new(-0.7, 0.0)), (12, C64::new(0.4, 0.3)), (9, C64::new(1.8, -0.5))] {
        let spec = ModelSpec::hatano_nelson(l, 1.0, 0.5, Bc::Obc).unwrap();
        let mut h = build(&spec).unwrap();
        // complex ratio: overwrite the lower hoppings
        for j in 0..l - 1 {
            h.entries[[j + 1, j]] = lam;
        }
        let root = lam.sqrt();
        for m in 1..=l {
            let e = 2.0 * root * (m as f64 * PI / (l as f64 + 1.0)).cos();
            let v = hn_obc_state(l, lam, m).unwrap();
            assert!(residual(&h, &v, e) < 1e-10, "λ={lam} m={m}");
        }
    }
    let e = hn_obc_energies(3, 1.0, -1.0).unwrap();
    assert!((e[0] - C64::new(0.0, 2f64.sqrt())).norm() < 1e-15);
}

fn direct_variance_qfi(lam: f64, l: usize, m: usize) -> f64 {
    let r2 = lam.abs();
    let w: Vec<f64> = (1..=l)
        .map(|j| r2.powi(j as i32) * (j as f64 * m as f64 * PI / (l as f64 + 1.0)).sin().powi(2))
        .collect();
    let z: f64 = w.iter().sum();
    let mu: f64 = w.iter().enumerate().map(|(i, p)| (i + 1) as f64 * p).sum::<f64>() / z;
    let var: f64 = w.iter().enumerate().map(|(i, p)| ((i + 1) as f64 - mu).powi(2) * p).sum::<f64>() / z;
    var / (lam * lam)
}

#[test]
fn hn_qfi_closed_form_matches_direct_sums() {
    for (lam, l, m) in [(-1.0, 50, 1), (-1.0005, 300, 1), (-0.999, 300, 2), (-0.5, 100, 1), (1.3, 40, 40), (0.8, 60, 7)] {
        let a = qfi_hn_analytic(lam, l, m).unwrap();
        let d = direct_variance_qfi(lam, l, m);
        assert!((a - d).abs() <= 1e-9 * d, "λ={lam} L={l} m={m}: {a} vs {d}");
    }
}

#[test]
fn hn_qfi_frozen_values() {
    // independent direct-sum evaluations
    let cases = [
        (-1.0, 50, 1, 84.98167411217463),
        (-0.5, 100, 1, 24.49174483264889),
        (-0.99, 50, 1, 86.48669025980887),
        (1.3, 40, 40, 14.869751371115782),
    ];
    for (lam, l, m, want) in cases {
        let got = qfi_hn_analytic(lam, l, m).unwrap();
        assert!((got - want).abs() <= 1e-11 * want, "{got} vs {want}");
    }
}

#[test]
fn hn_qfi_matches_finite_differences_of_states() {
    for (lam, l, m) in [(-1.0, 80, 1), (0.7, 40, 40), (-1.2, 30, 3)] {
        let d = 1e-6;
        let psi = hn_obc_state(l, C64::new(lam, 0.0), m).unwrap();
        let up = hn_obc_state(l, C64::new(lam + d, 0.0), m).unwrap();
        let dn = hn_obc_state(l, C64::new(lam - d, 0.0), m).unwrap();
        let dpsi = (&up - &dn).mapv(|z| z / (2.0 * d));
        let fd = qfi_pure(psi.view(), dpsi.view()).unwrap();
        let an = qfi_hn_analytic(lam, l, m).unwrap();
        assert!((fd - an).abs() < 1e-6 * an, "{fd} vs {an}");
    }
}
