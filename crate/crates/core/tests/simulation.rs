use sqc::circuit::{Architecture, Circuit, ParamVector};
use sqc::lattice::{D8Element, Q, VELOCITIES, WEIGHTS};
use sqc::qstate::{physical, POP_TO_BASIS};
use sqc::sim::*;

/// Straight-loop D2Q9 step on plain 9-population arrays, periodic.
fn reference_step(f: &[[f64; Q]], nx: usize, ny: usize, tau: f64) -> Vec<[f64; Q]> {
    let mut post = vec![[0.0; Q]; nx * ny];
    for n in 0..nx * ny {
        let rho: f64 = f[n].iter().sum();
        let mut jx = 0.0;
        let mut jy = 0.0;
        for i in 0..Q {
            jx += f[n][i] * VELOCITIES[i][0] as f64;
            jy += f[n][i] * VELOCITIES[i][1] as f64;
        }
        let (ux, uy) = (jx / rho, jy / rho);
        for i in 0..Q {
            let eu = VELOCITIES[i][0] as f64 * ux + VELOCITIES[i][1] as f64 * uy;
            let feq = WEIGHTS[i] * rho * (1.0 + 3.0 * eu + 4.5 * eu * eu - 1.5 * (ux * ux + uy * uy));
            post[n][i] = f[n][i] - (f[n][i] - feq) / tau;
        }
    }
    let mut out = vec![[0.0; Q]; nx * ny];
    for y in 0..ny {
        for x in 0..nx {
            for i in 0..Q {
                let xd = (x as i32 + VELOCITIES[i][0]).rem_euclid(nx as i32) as usize;
                let yd = (y as i32 + VELOCITIES[i][1]).rem_euclid(ny as i32) as usize;
                out[yd * nx + xd][i] = post[y * nx + x][i];
            }
        }
    }
    out
}

#[test]
fn bgk_step_matches_reference_kernel() {
    let (nx, ny) = (64, 64);
    let mut g = init_taylor_green(nx, ny, 0.01).unwrap();
    // perturb off equilibrium so the collision does something
    for y in 0..ny {
        for x in 0..nx {
            let node = g.node_mut(x, y);
            node[POP_TO_BASIS[1]] += 1e-4 * ((x * 7 + y * 3) % 11) as f64 / 11.0;
        }
    }
    let f0: Vec<[f64; Q]> = g.nodes().iter().map(|s| physical(s).0).collect();
    let expected = reference_step(&f0, nx, ny, 0.8);
    g.step(&Backend::bgk(0.8).unwrap()).unwrap();
    for (n, s) in g.nodes().iter().enumerate() {
        let got = physical(s);
        for i in 0..Q {
            assert!((got[i] - expected[n][i]).abs() < 1e-14, "node {n} pop {i}");
        }
    }
}

#[test]
fn identity_circuit_gives_pure_streaming() {
    let cfg = SimConfig {
        nx: 16,
        ny: 16,
        steps: 16,
        ..SimConfig::taylor_green()
    };
    let arch = Architecture::standard(2);
    let circuit = Circuit::new(&arch, &ParamVector::zeros(8)).unwrap();
    let out = run(&cfg, &Backend::Sqc(circuit)).unwrap();
    // 16 steps of free streaming on a 16-periodic grid return every population home
    let start = cfg.init().unwrap();
    for (a, b) in out.grid.nodes().iter().zip(start.nodes()) {
        for k in 0..16 {
            assert!((a[k] - b[k]).abs() < 1e-15);
        }
    }
    assert!(out.mass.max_node_collision_error < 1e-13);
}

#[test]
fn equilibrium_bgk_collision_is_idle() {
    let mut g = init_taylor_green(16, 16, 0.01).unwrap();
    let before = g.nodes().to_vec();
    g.collide(&Backend::bgk(1.0).unwrap()).unwrap();
    for (a, b) in g.nodes().iter().zip(&before) {
        for k in 0..16 {
            assert!((a[k] - b[k]).abs() < 1e-15);
        }
    }
}

#[test]
fn rotation_commutes_with_time_stepping() {
    let cfg = SimConfig {
        nx: 32,
        ny: 32,
        steps: 50,
        ..SimConfig::taylor_green()
    };
    let backend = Backend::bgk(0.8).unwrap();
    let g0 = cfg.init().unwrap();
    for sigma in D8Element::all() {
        let a = run_from(&cfg, g0.transformed(sigma).unwrap(), &backend).unwrap().grid;
        let b = run_from(&cfg, g0.clone(), &backend).unwrap().grid.transformed(sigma).unwrap();
        for (p, q) in a.nodes().iter().zip(b.nodes()) {
            for k in 0..16 {
                assert!((p[k] - q[k]).abs() < 1e-10, "{}", sigma.label);
            }
        }
    }
}

#[test]
fn taylor_green_decay_and_mass() {
    let cfg = SimConfig::taylor_green();
    let out = run(&cfg, &bgk_backend(&cfg).unwrap()).unwrap();
    let fit = fit_decay_rate(&out.peak_series).unwrap();
    let exact = taylor_green_decay_rate(1.0, 64, 64).unwrap();
    assert!((fit - exact).abs() / exact < 0.02, "fit {fit} exact {exact}");
    assert!(out.mass.max_relative_drift < 1e-10);
}

#[test]
fn cavity_conserves_mass_and_circulates() {
    let cfg = SimConfig::lid_cavity();
    let out = run(&cfg, &bgk_backend(&cfg).unwrap()).unwrap();
    assert!(out.mass.max_relative_drift < 1e-8, "{}", out.mass.max_relative_drift);
    let s = out.final_snapshot();
    let c = centerline_profiles(s, cfg.velocity).unwrap();
    // flow under the lid follows it, flow near the bottom returns
    let top = c.vertical[cfg.ny - 2].ux;
    let low = c.vertical[cfg.ny / 4].ux;
    assert!(top > 0.1 && low < 0.0, "top {top} low {low}");
}
