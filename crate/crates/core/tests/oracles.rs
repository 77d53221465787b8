//! Cross-checks of library results against independently derived values.

use std::f64::consts::PI;

use faer::linalg::solvers::Solve;
use faer::Mat;
use topowg_core::band_structure::{band_edges, full_bands_at, m_matrix, omega0_k};
use topowg_core::bound_states::{bound_state, QubitSpec, Sublattice, TightBindingSpec};
use topowg_core::circuit_model::{ssh_mapping, CircuitParams, Phase, SshParams};
use topowg_core::cooperative::{exchange_and_decay, superradiance_points, Bath, Branch, QubitPairConfig};
use topowg_core::dynamics::{
    chevron_map, edge_hybridization_suppression, generalized_rabi, lindblad_evolve, transfer_protocol, Coupling, Mode,
    ModeNetwork, Schedule, TransferParams,
};
use topowg_core::finite_lattice::{eigenmodes, fit_splittings, Boundary, LatticeSpec};
use topowg_core::numerics::{eig_general, eig_general_real, CounterRng};
use topowg_core::scattering::{compose_s21, single_qubit_s21, EmitterScatterer};
use topowg_core::{hz, C64};

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

#[test]
fn dynamical_matrix_reproduces_full_dispersion() {
    for p in [CircuitParams::device1(), CircuitParams::test_structure(), CircuitParams::test_structure().swapped()] {
        for i in 0..=40 {
            let k = -PI + 2.0 * PI * i as f64 / 40.0;
            let m = m_matrix(&p, k);
            let mat = Mat::<C64>::from_fn(4, 4, |r, s| m[r][s]);
            let eig = eig_general(mat.as_ref()).unwrap();
            let mut pos: Vec<f64> = eig.values.iter().filter(|z| z.re > 0.0).map(|z| z.re * omega0_k(&p, k)).collect();
            pos.sort_by(f64::total_cmp);
            let (up, lo) = full_bands_at(&p, k).unwrap();
            assert!((pos[1] - up).abs() < 1e-10 * up, "k = {k}");
            assert!((pos[0] - lo).abs() < 1e-10 * lo, "k = {k}");
        }
    }
}

/// Normal modes of the node-flux Lagrangian: C_n Φ̈ = −L_n⁻¹ Φ, so
/// 1/ω² are the eigenvalues of L_n C_n.
fn node_flux_frequencies(spec: &LatticeSpec) -> Vec<f64> {
    let n = 2 * spec.n_cells;
    let mut cm = Mat::<f64>::zeros(n, n);
    let mut lm = Mat::<f64>::zeros(n, n);
    for cell in 0..spec.n_cells {
        let (a, b) = (2 * cell, 2 * cell + 1);
        cm[(a, a)] = spec.c_sigma_a(cell);
        cm[(b, b)] = spec.c_sigma_b(cell);
        cm[(a, b)] = -spec.cv[cell];
        cm[(b, a)] = -spec.cv[cell];
        lm[(a, a)] = spec.l0;
        lm[(b, b)] = spec.l0;
        lm[(a, b)] = spec.mv[cell];
        lm[(b, a)] = spec.mv[cell];
        if cell + 1 < spec.n_cells {
            cm[(b, b + 1)] = -spec.cw[cell];
            cm[(b + 1, b)] = -spec.cw[cell];
            lm[(b, b + 1)] = spec.mw[cell];
            lm[(b + 1, b)] = spec.mw[cell];
        }
    }
    // Scale to order one before the eigensolve.
    let s = 1.0 / (spec.l0 * spec.reference.c_sigma());
    let prod = Mat::<f64>::from_fn(n, n, |i, j| (0..n).map(|k| lm[(i, k)] * cm[(k, j)]).sum::<f64>() * s);
    let eig = eig_general_real(prod.as_ref()).unwrap();
    let mut w: Vec<f64> = eig.values.iter().map(|mu| (s / mu.re).sqrt()).collect();
    w.sort_by(f64::total_cmp);
    w
}

#[test]
fn finite_lattice_matches_node_flux_formulation() {
    for p in [CircuitParams::test_structure(), CircuitParams::test_structure().swapped(), CircuitParams::device1()] {
        for boundary in [Boundary::MatchedSelfCapacitance, Boundary::Bare] {
            let spec = LatticeSpec::uniform(&p, 12, boundary).unwrap();
            let ours = eigenmodes(&spec).unwrap().frequencies;
            let oracle = node_flux_frequencies(&spec);
            for (a, b) in ours.iter().zip(&oracle) {
                assert!((a - b).abs() < 1e-9 * b, "{a} vs {b}");
            }
        }
    }
}

#[test]
fn long_array_bulk_modes_inside_bands() {
    let p = CircuitParams::test_structure().swapped();
    let e = band_edges(&p);
    let modes = eigenmodes(&LatticeSpec::uniform(&p, 60, Boundary::default()).unwrap()).unwrap();
    let tol = 1e-9 * e.upb_max;
    for (i, w) in modes.frequencies.iter().enumerate() {
        if modes.edge_mode_indices.contains(&i) {
            continue;
        }
        let in_lower = *w >= e.lpb_min - tol && *w <= e.lpb_max + tol;
        let in_upper = *w >= e.upb_min - tol && *w <= e.upb_max + tol;
        assert!(in_lower || in_upper, "bulk mode at {w} outside both bands");
    }
}

#[test]
fn bound_state_equals_constructed_zero_mode() {
    // Trivial chain, qubit on A(c) at ω0: the zero mode has qubit amplitude q,
    // B(c) = −g q / Jv, B(n+1) = −(Jw/Jv) B(n), nothing on A sites or to the left.
    let s = ssh_mapping(&CircuitParams::device1()).unwrap();
    let (n, cell, g) = (30, 10, hz(121.3e6));
    let spec = TightBindingSpec::new(n, s).with_qubit(QubitSpec::new("q", cell, Sublattice::A, s.omega0, g));
    let b = bound_state(&spec, "q").unwrap();
    let mut v = vec![c(0.0); 2 * n + 1];
    v[2 * n] = c(1.0);
    v[2 * cell + 1] = c(-g / s.j_v());
    for m in cell + 1..n {
        v[2 * m + 1] = v[2 * m - 1] * (-s.j_w() / s.j_v());
    }
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let phase = b.amplitudes[2 * n] / b.amplitudes[2 * n].norm();
    for (x, y) in b.amplitudes.iter().zip(&v) {
        assert!((x / phase - y / norm).norm() < 1e-10);
    }
    assert!((b.energy - s.omega0).abs() < 1e-9 * s.omega0);
    assert!((b.directionality - 1.0).abs() < 1e-12);
}

#[test]
fn group_velocity_decay_rate_matches_closed_form() {
    // Ideal SSH: ω+(k) = ω0 + J√(2(1+δ²) + 2(1−δ²)cos k).
    let s = SshParams::new(hz(6.6e9), hz(356e6), 0.256).unwrap();
    let bath = Bath::Ideal(s);
    let g = hz(50e6);
    for kk in [0.4, 1.0, 1.7, 2.5] {
        let r = 2.0 * (1.0 + s.delta * s.delta) + 2.0 * (1.0 - s.delta * s.delta) * f64::cos(kk);
        let w = s.omega0 + s.j * r.sqrt();
        let vg = s.j * (1.0 - s.delta * s.delta) * f64::sin(kk) / r.sqrt();
        let co = exchange_and_decay(&QubitPairConfig::ab(1, Phase::Trivial), &bath, g, w, Branch::Upper).unwrap();
        assert!((co.k - kk).abs() < 1e-8);
        assert!((co.gamma_e - g * g / vg).abs() < 1e-6 * co.gamma_e);
    }
}

/// Crossings of φ_ij(k) = kΔn − arg f(k) through multiples of π, counted on a
/// dense grid with explicit unwrapping.
fn dense_root_count(delta: f64, dn: usize) -> usize {
    let f = |k: f64| -(c(1.0 + delta) + C64::from_polar(1.0 - delta, -k));
    let n = 400_000;
    let mut prev_arg = f(1e-9).arg();
    let mut phi = prev_arg;
    let mut count = 0;
    let mut prev_q = ((1e-9 * dn as f64 - phi) / PI).floor();
    for i in 1..n {
        let k = PI * i as f64 / n as f64;
        let a = f(k).arg();
        let mut d = a - prev_arg;
        if d > PI {
            d -= 2.0 * PI;
        } else if d < -PI {
            d += 2.0 * PI;
        }
        phi += d;
        prev_arg = a;
        let q = ((k * dn as f64 - phi) / PI).floor();
        if q != prev_q {
            count += 1;
        }
        prev_q = q;
    }
    count
}

#[test]
fn superradiance_counts_match_dense_scan() {
    for delta in [0.1, 0.256, 0.4, 0.7] {
        for phase in [Phase::Trivial, Phase::Topological] {
            let s = SshParams::new(hz(6.6e9), hz(356e6), if phase == Phase::Trivial { delta } else { -delta }).unwrap();
            for dn in 0..=4 {
                let got = superradiance_points(&QubitPairConfig::ab(dn, phase), &Bath::Ideal(s), Branch::Upper).unwrap().count;
                assert_eq!(got, dense_root_count(s.delta, dn), "δ = {}, Δn = {dn}", s.delta);
            }
        }
    }
}

/// Steady state of a Lindblad generator acting on a d×d density matrix,
/// given as a closure ρ ↦ L(ρ); the trace condition replaces one equation.
fn steady_state(d: usize, gen: impl Fn(&Mat<C64>) -> Mat<C64>) -> Mat<C64> {
    let n = d * d;
    let mut sup = Mat::<C64>::zeros(n, n);
    for col in 0..n {
        let mut e = Mat::<C64>::zeros(d, d);
        e[(col / d, col % d)] = c(1.0);
        let out = gen(&e);
        for row in 0..n {
            sup[(row, col)] = out[(row / d, row % d)];
        }
    }
    for col in 0..n {
        sup[(0, col)] = if col / d == col % d { c(1.0) } else { c(0.0) };
    }
    let mut rhs = Mat::<C64>::zeros(n, 1);
    rhs[(0, 0)] = c(1.0);
    sup.partial_piv_lu().solve_in_place(&mut rhs);
    Mat::from_fn(d, d, |i, j| rhs[(i * d + j, 0)])
}

fn sc(m: &Mat<C64>, z: C64) -> Mat<C64> {
    Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)] * z)
}

fn dissipator(l: &Mat<C64>, rho: &Mat<C64>) -> Mat<C64> {
    let ld = l.adjoint().to_owned();
    let ldl = &ld * l;
    l * rho * &ld - sc(&(&ldl * rho + rho * &ldl), c(0.5))
}

fn lowering(n_modes: usize, k: usize) -> Mat<C64> {
    let d = 1 << n_modes;
    Mat::from_fn(d, d, |i, j| if j >> k & 1 == 1 && i == j ^ (1 << k) { c(1.0) } else { c(0.0) })
}

/// Weak coherent drive from the left; returns the coherent transmission.
fn master_equation_transmission(es: &[EmitterScatterer], theta: f64, omega: f64) -> C64 {
    let n = es.len();
    let d = 1 << n;
    let alpha = 1e-4 * es[0].gamma_e;
    let sm: Vec<Mat<C64>> = (0..n).map(|k| lowering(n, k)).collect();
    let phase = |j: usize| if j == 0 { 0.0 } else { theta };
    let mut h = Mat::<C64>::zeros(d, d);
    for (j, e) in es.iter().enumerate() {
        let nj = sm[j].adjoint() * &sm[j];
        h += sc(&nj, c(e.omega_q - omega));
        let om = C64::from_polar((e.gamma_e / 2.0).sqrt() * alpha, phase(j));
        h += sc(&sm[j].adjoint().to_owned(), om) + sc(&sm[j], om.conj());
    }
    if n == 2 {
        let jx = 0.5 * (es[0].gamma_e * es[1].gamma_e).sqrt() * theta.sin();
        h += sc(&(sm[0].adjoint() * &sm[1] + sm[1].adjoint() * &sm[0]), c(jx));
    }
    let channel = |sign: f64| {
        let mut l = Mat::<C64>::zeros(d, d);
        for (j, e) in es.iter().enumerate() {
            l += sc(&sm[j], C64::from_polar((e.gamma_e / 2.0).sqrt(), -sign * phase(j)));
        }
        l
    };
    let (cr, cl) = (channel(1.0), channel(-1.0));
    let mut jumps = vec![cr.clone(), cl];
    for (j, e) in es.iter().enumerate() {
        jumps.push(sc(&sm[j], c(e.gamma_prime.sqrt())));
        let z = sc(&(sm[j].adjoint() * &sm[j]), c(2.0)) - Mat::<C64>::identity(d, d);
        jumps.push(sc(&z, c((e.gamma_phi / 2.0).sqrt())));
    }
    let i = C64::new(0.0, 1.0);
    let rho = steady_state(d, |r| {
        let mut out = sc(&(&h * r - r * &h), -i);
        for l in &jumps {
            out += dissipator(l, r);
        }
        out
    });
    let exp_cr: C64 = (0..d).map(|a| (0..d).map(|b| cr[(a, b)] * rho[(b, a)]).sum::<C64>()).sum();
    let t = c(1.0) - i * exp_cr / alpha;
    if n == 2 {
        t * C64::from_polar(1.0, theta)
    } else {
        t
    }
}

#[test]
fn single_emitter_matches_master_equation() {
    let e = EmitterScatterer::new(1.0, 0.02, 0.02, 0.0).unwrap();
    let sp = single_qubit_s21(&e, &[1.0]);
    assert!((sp.s21[0].norm() - 0.5).abs() < 1e-12);
    for (gp, gphi) in [(0.0, 0.0), (0.02, 0.0), (0.005, 0.004)] {
        let e = EmitterScatterer::new(1.0, 0.02, gp, gphi).unwrap();
        for w in [0.97, 0.995, 1.0, 1.01] {
            let me = master_equation_transmission(&[e], 0.0, w);
            assert!((me - e.transmission(w)).norm() < 1e-6, "ω = {w}: {me} vs {}", e.transmission(w));
        }
    }
}

#[test]
fn two_emitters_match_master_equation() {
    let e1 = EmitterScatterer::new(1.0, 0.02, 0.002, 0.001).unwrap();
    let e2 = EmitterScatterer::new(1.004, 0.015, 0.001, 0.003).unwrap();
    for theta in [0.3, 1.2, PI, 4.0] {
        for w in [0.98, 0.999, 1.002, 1.01] {
            let me = master_equation_transmission(&[e1, e2], theta, w);
            let tm = compose_s21(&e1, &e2, theta, w);
            assert!((me - tm).norm() < 1e-6, "θ = {theta}, ω = {w}: {me} vs {tm}");
        }
    }
}

#[test]
fn dephasing_keeps_transparency_below_one() {
    // Slightly detuned from a super-radiant point the resonant pair shows a
    // transparency peak between two dips.
    let theta = PI + 0.3;
    for gphi in [0.0, 0.002] {
        let e = EmitterScatterer::new(1.0, 0.02, 0.0, gphi).unwrap();
        let peak = (0..2001)
            .map(|i| 0.99 + 0.02 * i as f64 / 2000.0)
            .map(|w| compose_s21(&e, &e, theta, w).norm())
            .fold(0.0, f64::max);
        if gphi > 0.0 {
            assert!(peak < 1.0 - 1e-3);
        } else {
            assert!(peak <= 1.0 + 1e-12);
        }
    }
}

/// Single-excitation amplitudes under H − (i/2)ΣΓ_k n_k, propagated exactly
/// piece by piece. Valid without pure dephasing.
fn no_jump_population(p: &TransferParams, target: usize) -> f64 {
    let [t1, t2, t3] = p.step_durations();
    let ext = p.control_extension;
    let pieces: Vec<(f64, Vec<(usize, usize, f64)>)> = vec![
        (t1, vec![(1, 2, p.g_edge), (0, 1, p.g_left), (2, 3, p.control_step1)]),
        (ext, vec![(1, 2, p.g_edge), (2, 3, p.control_step1)]),
        (t2 - ext, vec![(1, 2, p.g_edge)]),
        (t3, vec![(1, 2, p.g_edge), (2, 3, p.g_right), (0, 1, p.control_step3)]),
    ];
    let mut psi = vec![c(1.0), c(0.0), c(0.0), c(0.0)];
    for (dur, cps) in pieces {
        let mut h = Mat::<C64>::zeros(4, 4);
        for k in 0..4 {
            h[(k, k)] = C64::new(0.0, -0.5 / p.coherence[k].0);
        }
        for (a, b, g) in cps {
            h[(a, b)] += c(g);
            h[(b, a)] += c(g);
        }
        let eig = eig_general(h.as_ref()).unwrap();
        let v = &eig.vectors;
        let mut rhs = Mat::<C64>::from_fn(4, 1, |i, _| psi[i]);
        v.partial_piv_lu().solve_in_place(&mut rhs);
        psi = (0..4)
            .map(|i| (0..4).map(|j| v[(i, j)] * (C64::new(0.0, -dur) * eig.values[j]).exp() * rhs[(j, 0)]).sum())
            .collect();
    }
    p.prep_population * psi[target].norm_sqr()
}

#[test]
fn transfer_without_dephasing_matches_no_jump_evolution() {
    let mut p = TransferParams::device2();
    for c in &mut p.coherence {
        c.1 = 2.0 * c.0;
    }
    let r = transfer_protocol(&p, 0.05e-9, 1).unwrap();
    let oracle = no_jump_population(&p, 3);
    assert!((r.final_population - oracle).abs() < 1e-8, "{} vs {oracle}", r.final_population);
}

#[test]
fn transfer_matches_liouvillian_exponential() {
    // Final QR population from matrix-exponential propagation of the full
    // 256-dimensional Liouvillian (independent implementation, same model).
    let r = transfer_protocol(&TransferParams::device2(), 0.05e-9, 1).unwrap();
    assert!((r.final_population - 0.830066688158386).abs() < 1e-6);
    assert!((r.budget.leakage - 0.11837035708217547).abs() < 1e-6);
    assert!((r.budget.decoherence - 0.035493623909827354).abs() < 1e-6);
}

#[test]
fn chevron_matches_generalized_rabi() {
    let g = hz(23.8e6);
    let net = ModeNetwork { modes: vec![Mode::ideal("QL", 0.0), Mode::ideal("EL", 0.0)], couplings: vec![Coupling::always(0, 1, g)], frame: 0.0 };
    let dets: Vec<f64> = (-4..=4).map(|i| i as f64 * 0.5 * g).collect();
    let durs: Vec<f64> = (1..=40).map(|i| i as f64 * 1e-9).collect();
    let map = chevron_map(&net, &dets, &durs, 0.02e-9).unwrap();
    for (i, &d) in dets.iter().enumerate() {
        let om = generalized_rabi(g, d);
        for (j, &t) in durs.iter().enumerate() {
            let want = 1.0 - 4.0 * g * g / (om * om) * (0.5 * om * t).sin().powi(2);
            assert!((map.population[i][j] - want).abs() < 1e-8);
        }
    }
    let half_swap = PI / (2.0 * g);
    assert!((half_swap * 1e9 - 10.5).abs() < 0.05);
}

#[test]
fn parked_qubit_suppresses_edge_leakage() {
    let (gl, gg, gr) = (hz(23.8e6), hz(5.05e6), hz(57.3e6));
    let cycle = PI / gl;
    let on = edge_hybridization_suppression(gl, gg, gr, cycle, 0.05e-9).unwrap();
    let off = edge_hybridization_suppression(gl, gg, 0.0, cycle, 0.05e-9).unwrap();
    // Two channels detuned by ±g_R, each coupled at G/√2: at most 4(G/g_R)².
    assert!(on.leakage < 4.0 * (gg / gr).powi(2));
    assert!(off.leakage > 5.0 * on.leakage);
}

#[test]
fn exponential_fit_recovers_xi_from_noisy_splittings() {
    let xi = 1.76;
    let mut rng = CounterRng::new(7).stream(0);
    let sizes: Vec<usize> = (4..=16).collect();
    let split: Vec<f64> = sizes.iter().map(|&n| 1e9 * (-(n as f64) / xi).exp() * (1.0 + 0.01 * rng.uniform_symmetric())).collect();
    let carrier = vec![4e10; sizes.len()];
    let fit = fit_splittings(&sizes, &split, &carrier).unwrap();
    assert!((fit.xi_fit - xi).abs() < 0.02 * xi);
}

#[test]
fn free_decay_follows_t1() {
    let net = ModeNetwork { modes: vec![Mode::new("q", 0.0, 5e-6, 1e-6)], couplings: vec![], frame: 0.0 };
    let tr = lindblad_evolve(&net, &Schedule::single(4e-6, vec![1.0]), 1e-9).unwrap();
    for (i, t) in tr.times.iter().enumerate().step_by(500) {
        assert!((tr.populations[0][i] - (-t / 5e-6).exp()).abs() < 1e-10);
    }
}
