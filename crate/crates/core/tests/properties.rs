use std::f64::consts::PI;

use proptest::prelude::*;
use topowg_core::band_structure::{band_edges, dispersion_full, dispersion_rwa, k_grid, winding_of, zak_winding};
use topowg_core::circuit_model::{ssh_mapping, CircuitParams, Phase, SshParams};
use topowg_core::cooperative::{exchange_and_decay, Bath, Branch, QubitPairConfig};
use topowg_core::dynamics::{chevron_map, lindblad_evolve, Coupling, Mode, ModeNetwork, Schedule, Segment};
use topowg_core::finite_lattice::{disordered_lattice, eigenmodes, Boundary, DisorderScenario, DisorderSpec};
use topowg_core::numerics::{bisect_roots, fit_line, CounterRng};
use topowg_core::scattering::{compose_s21, EmitterScatterer};
use topowg_core::{hz, C64};

fn circuit() -> impl Strategy<Value = CircuitParams> {
    (240.0..260.0f64, 10.0..40.0f64, 10.0..40.0f64, -45.0..-5.0f64, -45.0..-5.0f64).prop_filter_map(
        "coupling terms must not cancel",
        |(c0, cv, cw, mv, mw)| {
            let p = CircuitParams::new(1.9e-9, c0 * 1e-15, cv * 1e-15, cw * 1e-15, mv * 1e-12, mw * 1e-12).ok()?;
            let s = ssh_mapping(&p).ok()?;
            (s.delta.abs() > 0.02).then_some(p)
        },
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn swapping_elements_flips_dimerization(p in circuit()) {
        let a = ssh_mapping(&p).unwrap();
        let b = ssh_mapping(&p.swapped()).unwrap();
        prop_assert!((a.j - b.j).abs() <= 1e-12 * a.j);
        prop_assert!((a.delta + b.delta).abs() <= 1e-12);
        prop_assert!((a.xi - b.xi).abs() <= 1e-9 * a.xi);
    }

    #[test]
    fn winding_follows_phase(p in circuit()) {
        let s = ssh_mapping(&p).unwrap();
        let (zak, w) = zak_winding(&p, 256).unwrap();
        let want = if s.phase() == Some(Phase::Topological) { 1 } else { 0 };
        prop_assert_eq!(w, want);
        prop_assert_eq!(zak, PI * want as f64);
    }

    #[test]
    fn bands_ordered_and_within_edges(p in circuit()) {
        let e = band_edges(&p);
        prop_assert!(e.lpb_min <= e.lpb_max && e.lpb_max < e.upb_min && e.upb_min <= e.upb_max);
        let k = k_grid(401);
        let full = dispersion_full(&p, &k).unwrap();
        let tol = 1e-12 * e.upb_max;
        for i in 0..k.len() {
            prop_assert!(full.omega_plus[i] >= e.upb_min - tol && full.omega_plus[i] <= e.upb_max + tol);
            prop_assert!(full.omega_minus[i] >= e.lpb_min - tol && full.omega_minus[i] <= e.lpb_max + tol);
        }
        let rwa = dispersion_rwa(&p, &k);
        for i in 0..k.len() {
            prop_assert!(rwa.omega_plus[i] > rwa.omega_minus[i]);
        }
    }

    #[test]
    fn ideal_chain_winding(delta in -0.95..0.95f64) {
        prop_assume!(delta.abs() > 1e-3);
        let f = |k: f64| -(C64::new(1.0 + delta, 0.0) + C64::from_polar(1.0 - delta, -k));
        let (_, w) = winding_of(f, 64).unwrap();
        prop_assert_eq!(w, if delta < 0.0 { 1 } else { 0 });
    }

    #[test]
    fn mapped_j_and_delta_bounded(p in circuit()) {
        let s = ssh_mapping(&p).unwrap();
        prop_assert!(s.j > 0.0 && s.delta.abs() < 1.0);
        prop_assert!(s.j_v() > 0.0 && s.j_w() > 0.0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn transmission_passive_and_reciprocal(
        wq1 in 0.9..1.1f64, wq2 in 0.9..1.1f64,
        ge1 in 1e-4..0.05f64, ge2 in 1e-4..0.05f64,
        gp1 in 0.0..0.02f64, gp2 in 0.0..0.02f64,
        ph1 in 0.0..0.01f64, ph2 in 0.0..0.01f64,
        theta in 0.0..(2.0 * PI), w in 0.8..1.2f64,
    ) {
        let e1 = EmitterScatterer::new(wq1, ge1, gp1, ph1).unwrap();
        let e2 = EmitterScatterer::new(wq2, ge2, gp2, ph2).unwrap();
        let a = compose_s21(&e1, &e2, theta, w);
        let b = compose_s21(&e2, &e1, theta, w);
        prop_assert!(a.norm() <= 1.0 + 1e-12);
        prop_assert!(e1.transmission(w).norm() <= 1.0 + 1e-12);
        prop_assert!((a - b).norm() <= 1e-12);
    }

    #[test]
    fn cooperative_rates_bounded(delta in 0.05..0.9f64, dn in 0usize..6, topo in any::<bool>(), x in 0.05..0.95f64) {
        let s = SshParams::new(hz(6.6e9), hz(356e6), delta).unwrap();
        let bath = Bath::Ideal(s);
        let phase = if topo { Phase::Topological } else { Phase::Trivial };
        let (lo, hi) = bath.with_phase(phase).band_range(Branch::Upper);
        let c = exchange_and_decay(&QubitPairConfig::ab(dn, phase), &bath, hz(20e6), lo + x * (hi - lo), Branch::Upper).unwrap();
        // (2J)² + Γ_ij² = Γe²
        let lhs = (2.0 * c.j_ij).powi(2) + c.gamma_ij.powi(2);
        prop_assert!((lhs - c.gamma_e.powi(2)).abs() <= 1e-9 * c.gamma_e.powi(2));
    }

    #[test]
    fn bisection_finds_every_sine_root(freq in 0.5..20.0f64) {
        let roots = bisect_roots(|x| (freq * x).sin(), 0.01, 10.0, 1000);
        let want: Vec<f64> = (1..).map(|m| m as f64 * PI / freq).take_while(|r| *r < 10.0).filter(|r| *r > 0.01).collect();
        prop_assert_eq!(roots.len(), want.len());
        for (r, t) in roots.iter().zip(&want) {
            prop_assert!((r - t).abs() < 1e-12);
        }
    }

    #[test]
    fn line_fit_recovers_exact_line(a in -10.0..10.0f64, b in -10.0..10.0f64) {
        let x: Vec<f64> = (0..20).map(|i| i as f64 * 0.3).collect();
        let y: Vec<f64> = x.iter().map(|v| a + b * v).collect();
        let fit = fit_line(&x, &y).unwrap();
        prop_assert!((fit.params[0] - a).abs() < 1e-9 && (fit.params[1] - b).abs() < 1e-9);
    }

    #[test]
    fn rng_streams_deterministic(seed in any::<u64>(), stream in any::<u64>()) {
        let mut a = CounterRng::new(seed).stream(stream);
        let mut b = CounterRng::new(seed).stream(stream);
        for _ in 0..8 {
            let u = a.uniform_symmetric();
            prop_assert_eq!(u.to_bits(), b.uniform_symmetric().to_bits());
            prop_assert!((-1.0..1.0).contains(&u));
        }
    }
}

fn network() -> impl Strategy<Value = (ModeNetwork, Vec<f64>)> {
    (
        proptest::collection::vec(0.2..2.0f64, 3),
        proptest::collection::vec(-1.0..1.0f64, 3),
        proptest::collection::vec((5.0..50.0f64, 0.2..1.0f64), 3),
        proptest::collection::vec(0.0..1.0f64, 3),
    )
        .prop_map(|(g, det, coh, init)| {
            let modes = (0..3)
                .map(|k| Mode::new(&format!("m{k}"), det[k], coh[k].0, 2.0 * coh[k].0 * coh[k].1))
                .collect();
            let couplings = vec![Coupling::always(0, 1, g[0]), Coupling::always(1, 2, g[1]), Coupling::during(0, 2, g[2], vec![(0.5, 1.5)])];
            (ModeNetwork { modes, couplings, frame: 0.0 }, init)
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn master_equation_invariants((net, init) in network()) {
        let sched = Schedule { segments: vec![Segment { duration: 1.0, detunings: None }, Segment { duration: 1.0, detunings: None }], initial_excitation: init.clone(), sample_every: 10 };
        let tr = lindblad_evolve(&net, &sched, 5e-3).unwrap();
        prop_assert!(tr.max_trace_drift < 1e-8);
        prop_assert!(tr.min_eigenvalue > -1e-8);
        let total: Vec<f64> = (0..tr.times.len()).map(|i| (0..3).map(|k| tr.populations[k][i]).sum()).collect();
        for w in total.windows(2) {
            prop_assert!(w[1] <= w[0] + 1e-12);
        }
        for p in &tr.populations {
            prop_assert!(p.iter().all(|v| *v >= -1e-10 && *v <= 1.0 + 1e-10));
        }
        let closed = lindblad_evolve(&net.without_decoherence(), &sched, 5e-3).unwrap();
        let n0: f64 = init.iter().sum();
        for i in 0..closed.times.len() {
            let n: f64 = (0..3).map(|k| closed.populations[k][i]).sum();
            prop_assert!((n - n0).abs() < 1e-8);
        }
    }

    #[test]
    fn chevron_symmetric_in_detuning(g in 0.5..2.0f64, d in 0.0..3.0f64) {
        let net = ModeNetwork { modes: vec![Mode::new("q", 0.0, 40.0, 30.0), Mode::new("e", 0.0, 30.0, 50.0)], couplings: vec![Coupling::always(0, 1, g)], frame: 0.0 };
        let durs: Vec<f64> = (1..=10).map(|i| i as f64 * 0.3).collect();
        let dt = 1.0 / (50.0 * (g.max(d) + 1.0));
        let m = chevron_map(&net, &[d, -d], &durs, dt).unwrap();
        for j in 0..durs.len() {
            prop_assert!((m.population[0][j] - m.population[1][j]).abs() < 1e-10);
        }
    }

    #[test]
    fn dt_halving_converges(g in 0.5..2.0f64) {
        let net = ModeNetwork { modes: vec![Mode::new("a", 0.0, 20.0, 10.0), Mode::new("b", 0.3, 30.0, 40.0)], couplings: vec![Coupling::always(0, 1, g)], frame: 0.0 };
        // Twelve equal segments, sampled only at their ends.
        let segments = (0..12).map(|_| Segment { duration: 0.25, detunings: None }).collect();
        let sched = Schedule { segments, initial_excitation: vec![1.0, 0.0], sample_every: usize::MAX };
        let dt = 0.25 / (12.5 * g).ceil();
        let run = |h: f64| lindblad_evolve(&net, &sched, h).unwrap().populations[1].clone();
        let reference = run(dt / 32.0);
        let err = |h: f64| run(h).iter().zip(&reference).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        let (e1, e2) = (err(dt), err(dt / 2.0));
        prop_assert!(e2 < 1e-6);
        // Fourth order: halving the step divides the error by ~16.
        let ratio = e1 / e2;
        prop_assert!(ratio > 12.0 && ratio < 20.0, "ratio {}", ratio);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn disorder_reproducible_and_spectrum_positive(seed in any::<u64>(), idx in 0u64..1000, r in 0.0..0.3f64) {
        let p = CircuitParams::test_structure().swapped();
        let d = DisorderSpec { scenario: DisorderScenario::CouplingCapacitance, r, n_realizations: 1, seed };
        let a = disordered_lattice(&p, &d, 12, Boundary::default(), idx).unwrap();
        let b = disordered_lattice(&p, &d, 12, Boundary::default(), idx).unwrap();
        prop_assert_eq!(&a, &b);
        let m = eigenmodes(&a).unwrap();
        prop_assert_eq!(m.frequencies.len(), 24);
        prop_assert!(m.frequencies.iter().all(|w| *w > 0.0));
    }
}
