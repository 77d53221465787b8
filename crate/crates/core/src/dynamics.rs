//! Open-system evolution of a handful of two-level modes (qubits and edge
//! modes) under piecewise-constant exchange couplings, integrated as a
//! Lindblad master equation with fixed-step RK4.
//!
//! The Hamiltonian in the frame rotating at `frame` is
//! H = Σ Δ_k n_k + Σ g (σ⁺_a σ⁻_b + h.c.), so a resonant pair swaps its
//! excitation completely at t = π/(2g). Each mode decays through
//! D[√(1/T1) σ⁻] and dephases through D[√(γφ/2) σz], γφ = 1/T2* − 1/(2T1).

use faer::Mat;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::numerics::{eig_hermitian, spectral_peaks, Peak};
use crate::{Error, Result, C64};

pub const MAX_MODES: usize = 5;
pub const TRACE_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mode {
    pub label: String,
    /// Absolute frequency, rad/s.
    pub frequency: f64,
    /// Energy relaxation time, s. Infinite disables decay.
    pub t1: f64,
    /// Ramsey coherence time, s. Infinite together with T1 disables dephasing.
    pub t2_star: f64,
}

impl Mode {
    pub fn new(label: &str, frequency: f64, t1: f64, t2_star: f64) -> Self {
        Mode { label: label.to_string(), frequency, t1, t2_star }
    }

    pub fn ideal(label: &str, frequency: f64) -> Self {
        Mode::new(label, frequency, f64::INFINITY, f64::INFINITY)
    }

    pub fn decay_rate(&self) -> f64 {
        1.0 / self.t1
    }

    pub fn dephasing_rate(&self) -> f64 {
        1.0 / self.t2_star - 0.5 / self.t1
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Coupling {
    pub mode_a: usize,
    pub mode_b: usize,
    /// Exchange strength g, rad/s.
    pub g: f64,
    /// Absolute time intervals [start, end) during which the coupling is on.
    /// Empty means always on.
    pub windows: Vec<(f64, f64)>,
}

impl Coupling {
    pub fn always(a: usize, b: usize, g: f64) -> Self {
        Coupling { mode_a: a, mode_b: b, g, windows: Vec::new() }
    }

    pub fn during(a: usize, b: usize, g: f64, windows: Vec<(f64, f64)>) -> Self {
        Coupling { mode_a: a, mode_b: b, g, windows }
    }

    fn active_at(&self, t: f64) -> bool {
        self.windows.is_empty() || self.windows.iter().any(|&(s, e)| t >= s && t < e)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeNetwork {
    pub modes: Vec<Mode>,
    pub couplings: Vec<Coupling>,
    /// Rotating-frame frequency, rad/s.
    pub frame: f64,
}

impl ModeNetwork {
    pub fn validate(&self) -> Result<()> {
        if self.modes.is_empty() || self.modes.len() > MAX_MODES {
            return Err(Error::InvalidParams(format!("network must have 1 to {MAX_MODES} modes")));
        }
        for m in &self.modes {
            if !(m.t1 > 0.0) || !(m.t2_star > 0.0) {
                return Err(Error::InvalidParams(format!("mode {}: T1 and T2* must be positive", m.label)));
            }
            if m.dephasing_rate() < -1e-12 * m.decay_rate().max(1.0) {
                return Err(Error::InvalidParams(format!("mode {}: T2* exceeds 2 T1", m.label)));
            }
        }
        for c in &self.couplings {
            if c.mode_a == c.mode_b {
                return Err(Error::InvalidParams("coupling forms a self-loop".into()));
            }
            if c.mode_a >= self.modes.len() || c.mode_b >= self.modes.len() {
                return Err(Error::InvalidParams("coupling references a missing mode".into()));
            }
            if c.windows.iter().any(|&(s, e)| !(e > s)) {
                return Err(Error::InvalidParams("coupling window with non-positive length".into()));
            }
        }
        Ok(())
    }

    /// Copy with every T1 and T2* set to infinity.
    pub fn without_decoherence(&self) -> Self {
        let mut n = self.clone();
        for m in &mut n.modes {
            m.t1 = f64::INFINITY;
            m.t2_star = f64::INFINITY;
        }
        n
    }

    pub fn index_of(&self, label: &str) -> Result<usize> {
        self.modes
            .iter()
            .position(|m| m.label == label)
            .ok_or_else(|| Error::InvalidParams(format!("no mode labelled {label}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub duration: f64,
    /// Per-mode detunings from the frame, rad/s. `None` uses each mode's
    /// frequency minus the frame.
    pub detunings: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    pub segments: Vec<Segment>,
    /// Excited-state population of each mode in the initial product state.
    pub initial_excitation: Vec<f64>,
    /// Record populations every this many integration steps (≥ 1).
    pub sample_every: usize,
}

impl Schedule {
    pub fn single(duration: f64, initial_excitation: Vec<f64>) -> Self {
        Schedule { segments: vec![Segment { duration, detunings: None }], initial_excitation, sample_every: 1 }
    }

    pub fn total_time(&self) -> f64 {
        self.segments.iter().map(|s| s.duration).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    /// populations[k][i]: ⟨n_k⟩ at times[i].
    pub populations: Vec<Vec<f64>>,
    pub max_trace_drift: f64,
    /// Smallest eigenvalue of ρ over the piece boundaries.
    pub min_eigenvalue: f64,
}

impl Trajectory {
    pub fn final_population(&self, mode: usize) -> f64 {
        *self.populations[mode].last().unwrap()
    }
}

/// Dense d×d density matrix, row-major.
#[derive(Debug, Clone)]
struct Rho {
    d: usize,
    data: Vec<C64>,
}

impl Rho {
    fn zeros(d: usize) -> Self {
        Rho { d, data: vec![C64::new(0.0, 0.0); d * d] }
    }

    fn trace(&self) -> C64 {
        (0..self.d).map(|i| self.data[i * self.d + i]).sum()
    }

    fn population(&self, mode: usize) -> f64 {
        (0..self.d).filter(|i| i >> mode & 1 == 1).map(|i| self.data[i * self.d + i].re).sum()
    }

    fn min_eigenvalue(&self) -> Result<f64> {
        let m = Mat::<C64>::from_fn(self.d, self.d, |i, j| 0.5 * (self.data[i * self.d + j] + self.data[j * self.d + i].conj()));
        let (w, _) = eig_hermitian(m.as_ref())?;
        Ok(w[0])
    }

    fn axpy(&mut self, a: f64, x: &Rho) {
        for (y, v) in self.data.iter_mut().zip(&x.data) {
            *y += *v * a;
        }
    }
}

/// Generator for one piecewise-constant interval.
struct Generator {
    n: usize,
    d: usize,
    /// Hamiltonian, row-major d×d (real: couplings and detunings are real).
    h: Vec<f64>,
    decay: Vec<f64>,
    dephase: Vec<f64>,
}

impl Generator {
    fn new(n: usize, detunings: &[f64], couplings: &[(usize, usize, f64)], decay: Vec<f64>, dephase: Vec<f64>) -> Self {
        let d = 1 << n;
        let mut h = vec![0.0; d * d];
        for i in 0..d {
            h[i * d + i] = (0..n).filter(|k| i >> k & 1 == 1).map(|k| detunings[k]).sum();
        }
        for &(a, b, g) in couplings {
            for i in 0..d {
                // |..1_a..0_b..⟩ ← |..0_a..1_b..⟩ and its conjugate.
                if i >> a & 1 == 0 && i >> b & 1 == 1 {
                    let j = i ^ (1 << a) ^ (1 << b);
                    h[j * d + i] += g;
                    h[i * d + j] += g;
                }
            }
        }
        Generator { n, d, h, decay, dephase }
    }

    fn apply(&self, rho: &Rho, out: &mut Rho) {
        let d = self.d;
        let r = &rho.data;
        let o = &mut out.data;
        let mi = C64::new(0.0, -1.0);
        for i in 0..d {
            for j in 0..d {
                // −i(Hρ − ρH)
                let mut acc = C64::new(0.0, 0.0);
                for k in 0..d {
                    let hik = self.h[i * d + k];
                    let hkj = self.h[k * d + j];
                    if hik != 0.0 {
                        acc += r[k * d + j] * hik;
                    }
                    if hkj != 0.0 {
                        acc -= r[i * d + k] * hkj;
                    }
                }
                let mut v = mi * acc;
                for m in 0..self.n {
                    let (bi, bj) = (i >> m & 1, j >> m & 1);
                    let g = self.decay[m];
                    if g > 0.0 {
                        if bi == 0 && bj == 0 {
                            v += r[(i | 1 << m) * d + (j | 1 << m)] * g;
                        }
                        v -= r[i * d + j] * (0.5 * g * (bi + bj) as f64);
                    }
                    if bi != bj {
                        v -= r[i * d + j] * self.dephase[m];
                    }
                }
                o[i * d + j] = v;
            }
        }
    }
}

/// Largest rate that the step must resolve: couplings and detunings.
fn fastest_rate(net: &ModeNetwork, sched: &Schedule) -> f64 {
    let mut g_max = net.couplings.iter().map(|c| c.g.abs()).fold(0.0, f64::max);
    for s in &sched.segments {
        let det: Vec<f64> = match &s.detunings {
            Some(d) => d.clone(),
            None => net.modes.iter().map(|m| m.frequency - net.frame).collect(),
        };
        g_max = det.iter().map(|x| x.abs()).fold(g_max, f64::max);
    }
    g_max
}

/// Largest step accepted for a network and schedule, 1/(50 g_max).
pub fn max_step(net: &ModeNetwork, sched: &Schedule) -> f64 {
    let g = fastest_rate(net, sched);
    if g > 0.0 {
        1.0 / (50.0 * g)
    } else {
        f64::INFINITY
    }
}

/// Fixed-step RK4 integration of the master equation over the schedule.
/// Coupling windows and segment boundaries split time into pieces; each piece
/// is integrated with the largest step ≤ `dt` that divides it evenly.
pub fn lindblad_evolve(net: &ModeNetwork, sched: &Schedule, dt: f64) -> Result<Trajectory> {
    net.validate()?;
    let n = net.modes.len();
    if sched.initial_excitation.len() != n {
        return Err(Error::InvalidParams("initial state does not match the mode count".into()));
    }
    if sched.segments.iter().any(|s| !(s.duration > 0.0) || !s.duration.is_finite()) {
        return Err(Error::InvalidParams("segment durations must be positive and finite".into()));
    }
    if sched.initial_excitation.iter().any(|p| !(0.0..=1.0).contains(p)) {
        return Err(Error::InvalidParams("initial populations must lie in [0, 1]".into()));
    }
    let g_max = fastest_rate(net, sched);
    if !(dt > 0.0) || dt > max_step(net, sched) {
        return Err(Error::StepTooLarge { dt, g_max });
    }
    let d = 1usize << n;
    let mut rho = Rho::zeros(d);
    for i in 0..d {
        let p: f64 = (0..n)
            .map(|k| {
                let e = sched.initial_excitation[k];
                if i >> k & 1 == 1 { e } else { 1.0 - e }
            })
            .product();
        rho.data[i * d + i] = C64::new(p, 0.0);
    }
    let decay: Vec<f64> = net.modes.iter().map(|m| if m.t1.is_finite() { m.decay_rate() } else { 0.0 }).collect();
    let dephase: Vec<f64> = net.modes.iter().map(|m| m.dephasing_rate().max(0.0)).collect();

    let every = sched.sample_every.max(1);
    let mut times = vec![0.0];
    let mut pops: Vec<Vec<f64>> = (0..n).map(|k| vec![rho.population(k)]).collect();
    let mut max_drift = 0.0f64;
    let mut min_eig = rho.min_eigenvalue()?;
    let (mut k1, mut k2, mut k3, mut k4) = (Rho::zeros(d), Rho::zeros(d), Rho::zeros(d), Rho::zeros(d));
    let mut tmp = Rho::zeros(d);
    let mut step_count = 0usize;

    let mut seg_start = 0.0;
    for seg in &sched.segments {
        let seg_end = seg_start + seg.duration;
        let det: Vec<f64> = match &seg.detunings {
            Some(v) if v.len() == n => v.clone(),
            Some(_) => return Err(Error::InvalidParams("detuning list does not match the mode count".into())),
            None => net.modes.iter().map(|m| m.frequency - net.frame).collect(),
        };
        let mut cuts = vec![seg_start, seg_end];
        for c in &net.couplings {
            for &(s, e) in &c.windows {
                for t in [s, e] {
                    if t > seg_start && t < seg_end {
                        cuts.push(t);
                    }
                }
            }
        }
        cuts.sort_by(f64::total_cmp);
        cuts.dedup_by(|a, b| (*a - *b).abs() <= 1e-15 * seg_end.abs().max(1e-30));
        for w in cuts.windows(2) {
            let (t0, t1) = (w[0], w[1]);
            let mid = 0.5 * (t0 + t1);
            let active: Vec<(usize, usize, f64)> =
                net.couplings.iter().filter(|c| c.active_at(mid)).map(|c| (c.mode_a, c.mode_b, c.g)).collect();
            let gen = Generator::new(n, &det, &active, decay.clone(), dephase.clone());
            let steps = ((t1 - t0) / dt).ceil().max(1.0) as usize;
            let h = (t1 - t0) / steps as f64;
            for s in 0..steps {
                gen.apply(&rho, &mut k1);
                tmp.data.copy_from_slice(&rho.data);
                tmp.axpy(0.5 * h, &k1);
                gen.apply(&tmp, &mut k2);
                tmp.data.copy_from_slice(&rho.data);
                tmp.axpy(0.5 * h, &k2);
                gen.apply(&tmp, &mut k3);
                tmp.data.copy_from_slice(&rho.data);
                tmp.axpy(h, &k3);
                gen.apply(&tmp, &mut k4);
                for i in 0..d * d {
                    rho.data[i] += (k1.data[i] + (k2.data[i] + k3.data[i]) * 2.0 + k4.data[i]) * (h / 6.0);
                }
                let drift = (rho.trace() - 1.0).norm();
                max_drift = max_drift.max(drift);
                if drift > TRACE_TOL {
                    return Err(Error::TraceDrift(drift));
                }
                step_count += 1;
                let last = s + 1 == steps;
                if step_count % every == 0 || last {
                    let t = t0 + h * (s + 1) as f64;
                    if times.last() != Some(&t) {
                        times.push(t);
                        for (k, p) in pops.iter_mut().enumerate() {
                            p.push(rho.population(k));
                        }
                    }
                }
            }
            min_eig = min_eig.min(rho.min_eigenvalue()?);
        }
        seg_start = seg_end;
    }
    Ok(Trajectory { times, populations: pops, max_trace_drift: max_drift, min_eigenvalue: min_eig })
}

/// Populations of a two-mode network after each duration in `durations`
/// (ascending), with mode 0 detuned by each entry of `detunings` and starting
/// excited.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChevronMap {
    pub detunings: Vec<f64>,
    pub durations: Vec<f64>,
    /// population[i][j]: mode-0 population at detunings[i], durations[j].
    pub population: Vec<Vec<f64>>,
}

pub fn chevron_map(net: &ModeNetwork, detunings: &[f64], durations: &[f64], dt: f64) -> Result<ChevronMap> {
    if net.modes.len() != 2 {
        return Err(Error::InvalidParams("chevron needs a two-mode network".into()));
    }
    if durations.windows(2).any(|w| !(w[1] > w[0])) || durations.first().is_some_and(|d| !(*d > 0.0)) {
        return Err(Error::InvalidParams("durations must be positive and ascending".into()));
    }
    let rows: Result<Vec<Vec<f64>>> = detunings
        .par_iter()
        .map(|&delta| {
            let base = net.modes[1].frequency - net.frame;
            let det = vec![base + delta, base];
            let mut prev = 0.0;
            let segments = durations
                .iter()
                .map(|&t| {
                    let s = Segment { duration: t - prev, detunings: Some(det.clone()) };
                    prev = t;
                    s
                })
                .collect();
            let sched = Schedule { segments, initial_excitation: vec![1.0, 0.0], sample_every: usize::MAX };
            let traj = lindblad_evolve(net, &sched, dt)?;
            // One sample per segment end, after the initial one.
            Ok(traj.populations[0][1..].to_vec())
        })
        .collect();
    Ok(ChevronMap { detunings: detunings.to_vec(), durations: durations.to_vec(), population: rows? })
}

/// Generalized Rabi frequency √(4g² + Δ²) of a detuned pair.
pub fn generalized_rabi(g: f64, delta: f64) -> f64 {
    (4.0 * g * g + delta * delta).sqrt()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThreeModeBeat {
    pub trajectory: Trajectory,
    /// Single-excitation eigenvalues relative to the bare frequency, ascending.
    pub eigenvalues: Vec<f64>,
    /// Peaks in the first mode's population spectrum, in cycles per second.
    pub peaks: Vec<Peak>,
}

/// Lossless chain 0–1–2 with couplings g1, g2 and the excitation starting in
/// mode 0.
pub fn three_mode_beat(g1: f64, g2: f64, duration: f64, dt: f64, floor_db: f64) -> Result<ThreeModeBeat> {
    let net = ModeNetwork {
        modes: vec![Mode::ideal("Q", 0.0), Mode::ideal("E1", 0.0), Mode::ideal("E2", 0.0)],
        couplings: vec![Coupling::always(0, 1, g1), Coupling::always(1, 2, g2)],
        frame: 0.0,
    };
    let sched = Schedule::single(duration, vec![1.0, 0.0, 0.0]);
    let trajectory = lindblad_evolve(&net, &sched, dt)?;
    let h = Mat::<C64>::from_fn(3, 3, |i, j| match (i, j) {
        (0, 1) | (1, 0) => C64::new(g1, 0.0),
        (1, 2) | (2, 1) => C64::new(g2, 0.0),
        _ => C64::new(0.0, 0.0),
    });
    let (eigenvalues, _) = eig_hermitian(h.as_ref())?;
    let step = trajectory.times[1] - trajectory.times[0];
    let peaks = spectral_peaks(&trajectory.populations[0], step, floor_db);
    Ok(ThreeModeBeat { trajectory, eigenvalues, peaks })
}

/// Parameters of the left/right edge-mode transfer experiment. Couplings are
/// rad/s, times s.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransferParams {
    pub g_edge: f64,
    pub g_left: f64,
    pub g_right: f64,
    pub control_step1: f64,
    pub control_step3: f64,
    /// Extra length of the step-i control pulse beyond the transfer pulse.
    pub control_extension: f64,
    pub prep_population: f64,
    /// (T1, T2*) for QL, EL, ER, QR.
    pub coherence: [(f64, f64); 4],
    /// Overrides of the three step durations; `None` uses half-swap times.
    pub durations: Option<[f64; 3]>,
}

impl TransferParams {
    pub fn device2() -> Self {
        let mhz = |f: f64| crate::hz(f * 1e6);
        TransferParams {
            g_edge: mhz(5.05),
            g_left: mhz(23.8),
            g_right: mhz(22.5),
            control_step1: mhz(21.1),
            control_step3: mhz(22.4),
            control_extension: 2e-9,
            prep_population: 0.984,
            coherence: [(6.435e-6, 344e-9), (3.68e-6, 4.08e-6), (2.96e-6, 2.91e-6), (5.803e-6, 539e-9)],
            durations: None,
        }
    }

    /// Step durations π/(2g̃L), π/(2G), π/(2g̃R) unless overridden.
    pub fn step_durations(&self) -> [f64; 3] {
        use std::f64::consts::FRAC_PI_2;
        self.durations.unwrap_or([FRAC_PI_2 / self.g_left, FRAC_PI_2 / self.g_edge, FRAC_PI_2 / self.g_right])
    }

    /// Four-mode network QL, EL, ER, QR in the edge-mode frame. When
    /// `edge_during_swaps` is false, G is switched off in steps i and iii.
    pub fn network(&self, edge_during_swaps: bool) -> ModeNetwork {
        let [t1, t2, t3] = self.step_durations();
        let (a, b, c) = (t1, t1 + t2, t1 + t2 + t3);
        let labels = ["QL", "EL", "ER", "QR"];
        let modes = labels.iter().zip(self.coherence).map(|(l, (t1, t2))| Mode::new(l, 0.0, t1, t2)).collect();
        let edge = if edge_during_swaps { Coupling::always(1, 2, self.g_edge) } else { Coupling::during(1, 2, self.g_edge, vec![(a, b)]) };
        ModeNetwork {
            modes,
            couplings: vec![
                edge,
                Coupling::during(0, 1, self.g_left, vec![(0.0, a)]),
                Coupling::during(2, 3, self.control_step1, vec![(0.0, a + self.control_extension)]),
                Coupling::during(2, 3, self.g_right, vec![(b, c)]),
                Coupling::during(0, 1, self.control_step3, vec![(b, c)]),
            ],
            frame: 0.0,
        }
    }

    pub fn schedule(&self, prep: f64, sample_every: usize) -> Schedule {
        let segments = self.step_durations().iter().map(|&t| Segment { duration: t, detunings: None }).collect();
        Schedule { segments, initial_excitation: vec![prep, 0.0, 0.0, 0.0], sample_every }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InfidelityBudget {
    pub final_population: f64,
    pub prep: f64,
    pub leakage: f64,
    pub decoherence: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransferResult {
    pub trajectory: Trajectory,
    pub final_population: f64,
    pub budget: InfidelityBudget,
}

/// Runs the three-step transfer and its two ablations: G off during the
/// swaps (leakage) and, in addition, all decoherence off (decoherence).
pub fn transfer_protocol(p: &TransferParams, dt: f64, sample_every: usize) -> Result<TransferResult> {
    let sched = p.schedule(p.prep_population, sample_every);
    let full = lindblad_evolve(&p.network(true), &sched, dt)?;
    let no_leak = lindblad_evolve(&p.network(false), &sched, dt)?;
    let ideal = lindblad_evolve(&p.network(false).without_decoherence(), &sched, dt)?;
    let f = full.final_population(3);
    let fb = no_leak.final_population(3);
    let fc = ideal.final_population(3);
    let budget = InfidelityBudget { final_population: f, prep: 1.0 - p.prep_population, leakage: fb - f, decoherence: fc - fb };
    Ok(TransferResult { trajectory: full, final_population: f, budget })
}

#[derive(Debug, Clone, PartialEq)]
pub struct HybridizationResult {
    pub trajectory: Trajectory,
    /// Largest population found on ER + QR, i.e. outside the QL–EL pair.
    pub leakage: f64,
}

/// QL–EL vacuum Rabi oscillation with QR parked on resonance with ER at
/// coupling `g_r`, all four modes lossless and G always on.
pub fn edge_hybridization_suppression(g_left: f64, g_edge: f64, g_r: f64, duration: f64, dt: f64) -> Result<HybridizationResult> {
    let net = ModeNetwork {
        modes: ["QL", "EL", "ER", "QR"].iter().map(|l| Mode::ideal(l, 0.0)).collect(),
        couplings: vec![Coupling::always(0, 1, g_left), Coupling::always(1, 2, g_edge), Coupling::always(2, 3, g_r)],
        frame: 0.0,
    };
    let trajectory = lindblad_evolve(&net, &Schedule::single(duration, vec![1.0, 0.0, 0.0, 0.0]), dt)?;
    let leakage = (0..trajectory.times.len())
        .map(|i| trajectory.populations[2][i] + trajectory.populations[3][i])
        .fold(0.0, f64::max);
    Ok(HybridizationResult { trajectory, leakage })
}
