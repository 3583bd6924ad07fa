//! Named presets over the run-config schema, one per figure panel group.

use std::f64::consts::PI;

use nhsense::{Bc, Family};

use crate::config::{Grid, ModelConfig, Output, RunConfig, Task};

pub const RECIPES: [&str; 17] = [
    "fig2", "fig2a", "fig2b", "fig2c", "fig2d", "fig3", "fig4", "fig5", "fig6", "fig7", "fig7a", "fig7b",
    "fig7c", "fig7d", "qwz", "cfi", "all",
];

fn cfg(task: Task, family: Family, size: usize, bc: Bc, params: &[(&str, f64)]) -> RunConfig {
    RunConfig {
        task,
        figure: None,
        model: Some(ModelConfig {
            family,
            size,
            bc,
            bc_y: None,
            inter_cell: Default::default(),
            params: params.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
        }),
        grid: Grid::default(),
        output: Output::default(),
    }
}

fn with(mut c: RunConfig, lambdas: &[f64], sizes: &[usize]) -> RunConfig {
    c.grid.lambdas = Some(lambdas.to_vec());
    c.grid.sizes = Some(sizes.to_vec());
    c
}

fn curves(mut c: RunConfig, nk: usize) -> RunConfig {
    c.grid.curves = true;
    c.grid.nk = nk;
    c
}

fn selector(mut c: RunConfig, s: &str) -> RunConfig {
    c.grid.selector = s.into();
    c
}

const HN: [(&str, f64); 2] = [("J_L", 1.0), ("J_R", -1.0)];
const SSH: [(&str, f64); 3] = [("J1L", 1.0), ("J1R", -1.0), ("J2", 1.0)];
const QW: [(&str, f64); 3] = [("theta1", PI / 4.0), ("theta2", 1.5 * PI), ("gamma", 0.5)];
const HN_SIZES: [usize; 5] = [50, 100, 200, 400, 800];
const FIB: [usize; 6] = [34, 55, 89, 144, 233, 377];

fn aah(task: Task, size: usize) -> RunConfig {
    let p = [("J", 1.0), ("V", 1.0), ("theta", 0.0), ("h", 2f64.ln())];
    cfg(task, Family::NhAah, size, Bc::Pbc, &p)
}

fn qwz(task: Task, size: usize, bc: Bc, t1: f64, gamma_y: f64) -> RunConfig {
    let p = [
        ("t1", t1),
        ("t2", 0.2),
        ("m_z", 1.0),
        ("gamma_x", 0.1),
        ("gamma_y", gamma_y),
        ("gamma_z", 0.01),
    ];
    cfg(task, Family::NhQwz, size, bc, &p)
}

fn hn_parts(id: &str) -> Vec<(&'static str, RunConfig)> {
    let lams = [-1.5, -1.0, -0.5];
    let sweep: Vec<f64> = (0..=10).map(|i| -1.5 + 0.1 * i as f64).collect();
    let base = |t| cfg(t, Family::HatanoNelson, 50, Bc::Obc, &HN);
    let all = vec![
        ("fig2a", curves(with(base(Task::Spectrum), &lams, &[50]), 512)),
        ("fig2b", with(base(Task::Population), &lams, &[50])),
        ("fig2c_m1", selector(with(base(Task::Scaling), &[-1.0], &HN_SIZES), "m=1")),
        ("fig2c_m2", selector(with(base(Task::Scaling), &[-1.0], &HN_SIZES), "m=2")),
        ("fig2c_mL", selector(with(base(Task::Scaling), &[-1.0], &HN_SIZES), "m=L")),
        ("fig2d", with(base(Task::Sweep), &sweep, &HN_SIZES)),
    ];
    all.into_iter().filter(|(n, _)| id == "fig2" || n.starts_with(id)).collect()
}

fn line_gap_parts(id: &str) -> Vec<(&'static str, RunConfig)> {
    let pt = |t| cfg(t, Family::SshPt, 40, Bc::Obc, &[("J1", 1.0), ("J2", 1.0), ("delta", 0.5)]);
    let ci = |t| cfg(t, Family::SshChiralInv, 40, Bc::Obc, &[("lambda", PI / 4.0)]);
    let edge_sizes = [25, 50, 100, 200, 400];
    let all = vec![
        ("fig7a", curves(with(pt(Task::Spectrum), &[0.5, 1.0, 1.5], &[40]), 512)),
        ("fig7b", with(ci(Task::Spectrum), &[PI / 8.0, PI / 4.0, 3.0 * PI / 8.0], &[40])),
        ("fig7c", selector(with(ci(Task::Scaling), &[PI / 4.0], &edge_sizes), "edge")),
        ("fig7d", selector(with(pt(Task::Scaling), &[1.0], &edge_sizes), "edge")),
    ];
    all.into_iter().filter(|(n, _)| id == "fig7" || *n == id).collect()
}

/// Sub-runs of a recipe as (subdirectory, config) pairs.
pub fn recipe(id: &str) -> Option<Vec<(&'static str, RunConfig)>> {
    let parts = match id {
        "fig2" | "fig2a" | "fig2b" | "fig2c" | "fig2d" => hn_parts(id),
        "fig3" => {
            let base = |t| cfg(t, Family::NhSsh, 40, Bc::Obc, &SSH);
            vec![
                ("fig3a", curves(with(base(Task::Spectrum), &[-1.5, -1.0, -0.5], &[40]), 512)),
                ("fig3b", with(base(Task::Scaling), &[-1.0], &[25, 50, 75, 100, 150, 200])),
                ("fig3c", with(base(Task::Sweep), &[-1.1, -1.05, -1.0, -0.95, -0.9], &[20, 30, 40, 50, 60])),
            ]
        }
        "fig4" => {
            let mut wind = with(aah(Task::Winding, 144), &[0.3, 1.0], &[144]);
            wind.grid.e0 = vec![[0.1, 0.0]];
            wind.grid.nk = 512;
            vec![
                ("fig4a", with(aah(Task::Spectrum, 144), &[0.3, 2f64.ln(), 1.0], &[144])),
                ("fig4b", with(aah(Task::Scaling, 34), &[2f64.ln()], &FIB)),
                ("fig4c", wind),
            ]
        }
        "fig5" => {
            let base = |t| cfg(t, Family::QuantumWalk, 100, Bc::Obc, &QW);
            let c = 1.5 * PI;
            vec![
                ("fig5a", curves(with(base(Task::Spectrum), &[c - 0.3, c, c + 0.3], &[100]), 512)),
                ("fig5b", with(base(Task::Scaling), &[c], &[50, 100, 200, 300, 400])),
                ("fig5c", with(base(Task::Sweep), &[c - 0.1, c - 0.05, c, c + 0.05, c + 0.1], &[50, 75, 100, 150, 200])),
            ]
        }
        "fig6" => {
            let kx: Vec<f64> = (0..=4).map(|i| PI * i as f64 / 4.0).collect();
            let row = |t1, gy| {
                let mut c = curves(with(qwz(Task::Spectrum, 6, Bc::Pbc, t1, gy), &[t1], &[6]), 512);
                c.grid.kx = kx.clone();
                c
            };
            vec![("top", row(0.2, 0.1)), ("middle", row(0.0, 0.1)), ("bottom", row(0.2, 0.0))]
        }
        "fig7" | "fig7a" | "fig7b" | "fig7c" | "fig7d" => line_gap_parts(id),
        "qwz" => vec![("scaling", with(qwz(Task::Scaling, 10, Bc::Obc, 0.0, 0.1), &[0.0], &[10, 14, 18, 24, 30]))],
        "cfi" => vec![
            ("hatano_nelson", with(cfg(Task::Qfi, Family::HatanoNelson, 50, Bc::Obc, &HN), &[-1.0], &HN_SIZES)),
            ("nh_ssh", with(cfg(Task::Qfi, Family::NhSsh, 50, Bc::Obc, &SSH), &[-1.0], &[25, 50, 100])),
            ("nh_aah", with(aah(Task::Qfi, 34), &[2f64.ln()], &FIB)),
            ("quantum_walk", with(cfg(Task::Qfi, Family::QuantumWalk, 100, Bc::Obc, &QW), &[1.5 * PI], &[50, 100, 200])),
        ],
        "all" => {
            let mut v = Vec::new();
            for id in ["fig2", "fig3", "fig4", "fig5", "fig6", "fig7", "qwz", "cfi"] {
                v.extend(recipe(id).unwrap());
            }
            v
        }
        _ => return None,
    };
    Some(parts)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_recipe_validates() {
        for id in RECIPES {
            let parts = recipe(id).unwrap();
            assert!(!parts.is_empty(), "{id}");
            for (name, c) in parts {
                c.validate().unwrap_or_else(|e| panic!("{id}/{name}: {e}"));
            }
        }
        assert!(recipe("fig99").is_none());
    }

    #[test]
    fn fig2_grid() {
        let parts = recipe("fig2").unwrap();
        let d = &parts.iter().find(|p| p.0 == "fig2d").unwrap().1;
        let l = d.lambdas();
        assert!(l.contains(&-1.0) && l.iter().all(|x| (-1.5..=-0.5).contains(x)));
        assert_eq!(d.sizes(), HN_SIZES.to_vec());
        assert_eq!(recipe("fig2c").unwrap().len(), 3);
    }
}
