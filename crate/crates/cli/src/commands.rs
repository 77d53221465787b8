//! One function per subcommand: read the parameter blocks it needs, call the
//! library, and shape the result into artifacts.

use rayon::prelude::*;
use serde_json::json;

use topowg_core::band_structure::{band_edges, dispersion_full, dispersion_rwa, k_grid, zak_winding};
use topowg_core::bound_states::{
    bound_state, default_port_damping, external_coupling_profile, qubit_qubit_coupling, QubitSpec, Sublattice,
    TightBindingSpec,
};
use topowg_core::circuit_model::{ssh_mapping, CircuitParams, Phase, SshParams};
use topowg_core::cooperative::{jg_curve, superradiance_points, Bath, Branch, QubitPairConfig, BAND_MARGIN};
use topowg_core::dynamics::{chevron_map, transfer_protocol, Coupling, Mode, ModeNetwork, TransferParams};
use topowg_core::finite_lattice::{
    disorder_ensemble, edge_splitting_scan, eigenmodes, Boundary, DisorderScenario, DisorderSpec, LatticeSpec, TaperSpec,
    EDGE_CELLS,
};
use topowg_core::scattering::{expected_swirl_frequencies, linspace, swirl_centers, swirl_map, SwirlSettings};
use topowg_core::{hz, to_hz};

use crate::artifacts::{to_json, Cell, DisorderSummary, Matrix, Primary, S21Sidecar, Table, TransferBudget};
use crate::config::{ConfigError, ConfigErrorKind, Document, Section};
use crate::CliError;

/// Options that come from the command line rather than the config.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub delta_n: Option<usize>,
    pub phase: Option<Phase>,
    pub qubit: Option<String>,
}

pub struct Outcome {
    pub primary: Primary,
    /// Extra JSON artifacts as (file suffix, content).
    pub sidecars: Vec<(&'static str, String)>,
    pub summary: serde_json::Value,
    /// Seed actually used, for commands that draw random numbers.
    pub seed: Option<u64>,
}

impl Outcome {
    fn table(t: Table, summary: serde_json::Value) -> Self {
        Outcome { primary: Primary::Table(t), sidecars: Vec::new(), summary, seed: None }
    }
}

type Res<T> = Result<T, CliError>;

fn range_error(s: &Section, key: &str, message: String) -> CliError {
    CliError::Config(ConfigError { kind: ConfigErrorKind::Range, message, location: Some(s.location_of(key)) })
}

fn grid_usize(doc: &Document, key: &str, default: usize) -> usize {
    doc.section("grid").and_then(|g| g.opt_int(key)).map(|v| v as usize).unwrap_or(default)
}

fn grid_real(doc: &Document, key: &str) -> Option<f64> {
    doc.section("grid").and_then(|g| g.opt_real(key))
}

fn circuit(doc: &Document) -> Res<CircuitParams> {
    let s = doc.require("circuit")?;
    let p = CircuitParams::new(s.real("L0")?, s.real("C0")?, s.real("Cv")?, s.real("Cw")?, s.real("Mv")?, s.real("Mw")?)
        .map_err(|e| CliError::Config(ConfigError { kind: ConfigErrorKind::Range, message: e.to_string(), location: Some(s.location) }))?;
    Ok(if s.opt_bool("swap") == Some(true) { p.swapped() } else { p })
}

/// Tight-binding parameters from `[ssh]`, else mapped from `[circuit]`.
fn ssh(doc: &Document) -> Res<(SshParams, &'static str)> {
    if let Some(s) = doc.section("ssh") {
        let p = SshParams::new(hz(s.real("f0")?), hz(s.real("J")?), s.real("delta")?)?;
        return Ok((p, "ssh"));
    }
    if doc.section("circuit").is_some() {
        return Ok((ssh_mapping(&circuit(doc)?)?, "circuit"));
    }
    Err(ConfigError::schema("missing section [ssh] (or [circuit] to map from)", None).into())
}

fn boundary(s: &Section) -> Res<Boundary> {
    Ok(match s.word("boundary")? {
        "bare" => Boundary::Bare,
        _ => Boundary::MatchedSelfCapacitance,
    })
}

fn sublattice(s: &str) -> Sublattice {
    if s == "A" {
        Sublattice::A
    } else {
        Sublattice::B
    }
}

fn sub_label(s: Sublattice) -> &'static str {
    match s {
        Sublattice::A => "A",
        Sublattice::B => "B",
    }
}

fn phase_label(p: Phase) -> &'static str {
    match p {
        Phase::Trivial => "trivial",
        Phase::Topological => "topological",
    }
}

fn chain_cells(doc: &Document) -> Res<usize> {
    Ok(doc.require("chain")?.int("n_cells")? as usize)
}

/// Qubits in document order; cells are 1-based in the config and converted here.
fn qubits(doc: &Document, n_cells: usize) -> Res<Vec<QubitSpec>> {
    doc.labelled("qubit")
        .map(|(label, s)| {
            let cell = s.int("cell")? as usize;
            if cell > n_cells {
                return Err(range_error(s, "cell", format!("cell {cell} beyond the {n_cells}-cell chain")));
            }
            Ok(QubitSpec::new(label, cell - 1, sublattice(s.word("sublattice")?), hz(s.real("frequency")?), hz(s.real("g")?)))
        })
        .collect()
}

struct PairSetup {
    cfg: QubitPairConfig,
    bath: Bath,
    branch: Branch,
    sublattices: String,
    bath_name: String,
}

fn pair(doc: &Document, ov: &Overrides) -> Res<PairSetup> {
    let s = doc.require("pair")?;
    let delta_n = match ov.delta_n {
        Some(d) => d,
        None => s.int("delta_n")? as usize,
    };
    let phase = match ov.phase {
        Some(p) => p,
        None => match s.word("phase")? {
            "topological" => Phase::Topological,
            _ => Phase::Trivial,
        },
    };
    let subs = s.word("sublattices")?;
    let mut c = subs.chars().map(|c| sublattice(&c.to_string()));
    let sublattices = (c.next().unwrap(), c.next().unwrap());
    let bath_name = s.word("bath")?;
    let bath = match bath_name {
        "circuit" => Bath::Circuit(circuit(doc)?),
        _ => Bath::Ideal(ssh(doc)?.0),
    };
    let branch = match s.opt_word("branch") {
        Some("lower") => Branch::Lower,
        _ => Branch::Upper,
    };
    Ok(PairSetup {
        cfg: QubitPairConfig { delta_n, sublattices, phase },
        bath,
        branch,
        sublattices: subs.to_string(),
        bath_name: bath_name.to_string(),
    })
}

fn branch_label(b: Branch) -> &'static str {
    match b {
        Branch::Upper => "upper",
        Branch::Lower => "lower",
    }
}

fn mode_coherence(doc: &Document, label: &str) -> Res<(f64, f64)> {
    let s = doc.require(&format!("mode.{label}"))?;
    Ok((s.real("T1")?, s.real("T2star")?))
}

pub fn dispersion(doc: &Document) -> Res<Outcome> {
    let p = circuit(doc)?;
    let k = k_grid(grid_usize(doc, "n_k", 513));
    let rwa = dispersion_rwa(&p, &k);
    let full = dispersion_full(&p, &k)?;
    let mut t = Table::new(&["k_d", "f_plus_hz", "f_minus_hz", "f_plus_rwa_hz", "f_minus_rwa_hz"]);
    for i in 0..k.len() {
        t.push(vec![
            k[i].into(),
            to_hz(full.omega_plus[i]).into(),
            to_hz(full.omega_minus[i]).into(),
            to_hz(rwa.omega_plus[i]).into(),
            to_hz(rwa.omega_minus[i]).into(),
        ]);
    }
    Ok(Outcome::table(t, json!({ "n_k": k.len() })))
}

pub fn band_edges_cmd(doc: &Document) -> Res<Outcome> {
    let e = band_edges(&circuit(doc)?);
    let mut t = Table::new(&["edge", "frequency_hz"]);
    for (name, w) in [("lpb_min", e.lpb_min), ("lpb_max", e.lpb_max), ("upb_min", e.upb_min), ("upb_max", e.upb_max)] {
        t.push(vec![name.into(), to_hz(w).into()]);
    }
    let (lo, hi) = e.middle_gap();
    Ok(Outcome::table(t, json!({ "p1": e.p1, "p2": e.p2, "middle_gap_hz": [to_hz(lo), to_hz(hi)] })))
}

pub fn zak(doc: &Document) -> Res<Outcome> {
    let p = circuit(doc)?;
    let (phase, winding) = zak_winding(&p, grid_usize(doc, "n_k", 513))?;
    let s = ssh_mapping(&p)?;
    let label = Phase::from_delta(s.delta).map(phase_label).unwrap_or("gapless");
    let mut t = Table::new(&["zak_phase_rad", "winding", "delta", "xi_cells", "phase"]);
    t.push(vec![phase.into(), winding.into(), s.delta.into(), s.xi.into(), label.into()]);
    Ok(Outcome::table(t, json!({ "winding": winding, "phase": label })))
}

pub fn finite_modes(doc: &Document) -> Res<Outcome> {
    let p = circuit(doc)?;
    let l = doc.require("lattice")?;
    let mut spec = LatticeSpec::uniform(&p, l.int("n_cells")? as usize, boundary(l)?)?;
    if let Some(t) = doc.section("taper") {
        spec = spec.with_taper(TaperSpec {
            c1g: t.real("C1g")?,
            c2g: t.real("C2g")?,
            c1: t.real("C1")?,
            c2: t.real("C2")?,
            port_impedance: t.real("Z0")?,
        });
    }
    let modes = eigenmodes(&spec)?;
    let mut t = Table::new(&["mode", "frequency_hz", "in_gap", "left_weight", "right_weight"]);
    for (i, w) in modes.frequencies.iter().enumerate() {
        let (lw, rw) = modes.end_weights(i, EDGE_CELLS);
        t.push(vec![i.into(), to_hz(*w).into(), modes.edge_mode_indices.contains(&i).into(), lw.into(), rw.into()]);
    }
    let gap: Vec<f64> = modes.edge_mode_indices.iter().map(|&i| to_hz(modes.frequencies[i])).collect();
    Ok(Outcome::table(t, json!({ "n_modes": modes.frequencies.len(), "in_gap_hz": gap, "taper": spec.taper.is_some() })))
}

pub fn edge_splitting(doc: &Document) -> Res<Outcome> {
    let p = circuit(doc)?;
    let l = doc.require("lattice")?;
    let sizes: Vec<usize> = l.int_list("sizes")?.iter().map(|&n| n as usize).collect();
    let r = edge_splitting_scan(&p, &sizes, boundary(l)?)?;
    let mut t = Table::new(&["n_cells", "splitting_hz", "fitted"]);
    for (n, d) in r.sizes.iter().zip(&r.splittings) {
        t.push(vec![(*n).into(), to_hz(*d).into(), r.fitted_sizes.contains(n).into()]);
    }
    let xi_map = ssh_mapping(&p).map(|s| s.xi).ok();
    Ok(Outcome::table(t, json!({ "xi_fit": r.xi_fit, "r_squared": r.fit.r_squared, "xi_mapping": xi_map })))
}

pub fn disorder(doc: &Document, ov: &Overrides) -> Res<Outcome> {
    let p = circuit(doc)?;
    let d = doc.require("disorder")?;
    let scenario_name = d.word("scenario")?;
    let scenario = match scenario_name {
        "mutual-inductance" => DisorderScenario::MutualInductance,
        "coupling-capacitance" => DisorderScenario::CouplingCapacitance,
        _ => DisorderScenario::CorrelatedCapacitance,
    };
    let run_seed = doc.section("run").and_then(|r| r.opt_int("seed"));
    let seed = ov.seed.or(run_seed.map(|s| s as u64)).or(d.opt_int("seed").map(|s| s as u64)).unwrap_or(0);
    let spec = DisorderSpec { scenario, r: d.real("r")?, n_realizations: d.int("realizations")? as usize, seed };
    let n_cells = d.int("n_cells")? as usize;
    let stats = disorder_ensemble(&p, &spec, n_cells, boundary(d)?);

    let mut t = Table::new(&["realization", "mode_index", "frequency_hz", "is_edge_mode"]);
    for r in &stats.realizations {
        for (m, w) in r.frequencies.iter().enumerate() {
            let edge = r.edge.is_some_and(|(a, b)| m == a || m == b);
            t.push(vec![r.index.into(), m.into(), to_hz(*w).into(), edge.into()]);
        }
    }
    let fin = |x: f64| x.is_finite().then(|| to_hz(x));
    let summary = DisorderSummary {
        scenario: scenario_name.to_string(),
        r: spec.r,
        seed,
        n_realizations: spec.n_realizations,
        n_cells,
        edge_mean_hz: [fin(stats.edge_mean[0]), fin(stats.edge_mean[1])],
        edge_std_hz: [fin(stats.edge_std[0]), fin(stats.edge_std[1])],
        failed_count: stats.failed_count,
        edge_missing_count: stats.edge_missing_count,
    };
    Ok(Outcome {
        primary: Primary::Table(t),
        summary: serde_json::to_value(&summary).expect("serializable"),
        sidecars: vec![("summary.json", to_json(&summary))],
        seed: Some(seed),
    })
}

pub fn bound_state_cmd(doc: &Document, ov: &Overrides) -> Res<Outcome> {
    let (s, source) = ssh(doc)?;
    let n = chain_cells(doc)?;
    let qs = qubits(doc, n)?;
    let label = match (&ov.qubit, qs.len()) {
        (Some(l), _) => l.clone(),
        (None, 1) => qs[0].label.clone(),
        (None, 0) => return Err(ConfigError::schema("no [qubit.<label>] section", None).into()),
        (None, _) => return Err(ConfigError::schema("several qubits configured; choose one with --qubit", None).into()),
    };
    if !qs.iter().any(|q| q.label == label) {
        return Err(ConfigError::schema(format!("no section [qubit.{label}]"), None).into());
    }
    let mut spec = TightBindingSpec::new(n, s);
    for q in qs {
        spec = spec.with_qubit(q);
    }
    let b = bound_state(&spec, &label)?;
    let mut t = Table::new(&["site", "cell", "sublattice", "re", "im", "probability"]);
    for site in 0..spec.n_sites() {
        let z = b.site(site);
        let sub = if site % 2 == 0 { "A" } else { "B" };
        t.push(vec![site.into(), (site / 2 + 1).into(), sub.into(), z.re.into(), z.im.into(), z.norm_sqr().into()]);
    }
    Ok(Outcome::table(
        t,
        json!({
            "qubit": label,
            "energy_hz": to_hz(b.energy),
            "directionality": b.directionality,
            "left_weight": b.left_weight,
            "right_weight": b.right_weight,
            "photon_weight": b.photon_weight,
            "ssh_source": source,
        }),
    ))
}

pub fn coupling_matrix(doc: &Document) -> Res<Outcome> {
    let (s, source) = ssh(doc)?;
    let n = chain_cells(doc)?;
    let qs = qubits(doc, n)?;
    if qs.len() < 2 {
        return Err(ConfigError::schema("coupling-matrix needs at least two [qubit.<label>] sections", None).into());
    }
    let pairs: Vec<(usize, usize)> = (0..qs.len()).flat_map(|i| (i + 1..qs.len()).map(move |j| (i, j))).collect();
    let g: Vec<f64> = pairs
        .par_iter()
        .map(|&(i, j)| {
            let spec = TightBindingSpec::new(n, s).with_qubit(qs[i].clone()).with_qubit(qs[j].clone());
            qubit_qubit_coupling(&spec, &qs[i].label, &qs[j].label)
        })
        .collect::<topowg_core::Result<_>>()?;
    let mut t = Table::new(&["cell_i", "sub_i", "cell_j", "sub_j", "g_ij_hz"]);
    for (&(i, j), g) in pairs.iter().zip(&g) {
        let (a, b) = (&qs[i], &qs[j]);
        t.push(vec![
            (a.cell + 1).into(),
            sub_label(a.sublattice).into(),
            (b.cell + 1).into(),
            sub_label(b.sublattice).into(),
            to_hz(*g).into(),
        ]);
    }
    Ok(Outcome::table(t, json!({ "pairs": pairs.len(), "ssh_source": source })))
}

pub fn kappa_profile(doc: &Document) -> Res<Outcome> {
    let (s, source) = ssh(doc)?;
    let n = chain_cells(doc)?;
    let k = doc.require("kappa")?;
    let cells = k.int_list("cells")?;
    if let Some(&c) = cells.iter().find(|&&c| c as usize > n) {
        return Err(range_error(k, "cells", format!("cell {c} beyond the {n}-cell chain")));
    }
    let placements: Vec<(usize, Sublattice)> =
        cells.iter().flat_map(|&c| [(c as usize - 1, Sublattice::A), (c as usize - 1, Sublattice::B)]).collect();
    let kappa_b = k.opt_real("kappa_b").map(hz).unwrap_or_else(|| default_port_damping(&s));
    let prof = external_coupling_profile(n, &s, kappa_b, hz(k.real("g")?), hz(k.real("frequency")?), &placements)?;
    let mut t = Table::new(&["qubit_cell", "sublattice", "frequency_hz", "kappa_e1_hz", "kappa_e2_hz"]);
    for p in &prof {
        t.push(vec![
            (p.cell + 1).into(),
            sub_label(p.sublattice).into(),
            to_hz(p.frequency).into(),
            to_hz(p.kappa_e1).into(),
            to_hz(p.kappa_e2).into(),
        ]);
    }
    Ok(Outcome::table(t, json!({ "kappa_b_hz": to_hz(kappa_b), "ssh_source": source })))
}

fn pair_summary(p: &PairSetup) -> serde_json::Value {
    json!({
        "delta_n": p.cfg.delta_n,
        "sublattices": p.sublattices,
        "phase": phase_label(p.cfg.phase),
        "bath": p.bath_name,
        "branch": branch_label(p.branch),
    })
}

pub fn superradiance(doc: &Document, ov: &Overrides) -> Res<Outcome> {
    let p = pair(doc, ov)?;
    let pts = superradiance_points(&p.cfg, &p.bath, p.branch)?;
    let mut t = Table::new(&["root", "k_d", "frequency_hz"]);
    for (i, (k, w)) in pts.roots.iter().enumerate() {
        t.push(vec![i.into(), (*k).into(), to_hz(*w).into()]);
    }
    let mut summary = pair_summary(&p);
    summary["count"] = json!(pts.count);
    Ok(Outcome::table(t, summary))
}

pub fn jg_curves(doc: &Document, ov: &Overrides) -> Res<Outcome> {
    let p = pair(doc, ov)?;
    let curve = jg_curve(&p.cfg, &p.bath, grid_usize(doc, "n_points", 401), p.branch)?;
    let mut t = Table::new(&["frequency_hz", "k_d", "J_ij_over_Gamma_e", "Gamma_ij_over_Gamma_e"]);
    for (w, c) in &curve {
        t.push(vec![to_hz(*w).into(), c.k.into(), (c.j_ij / c.gamma_e).into(), (c.gamma_ij / c.gamma_e).into()]);
    }
    Ok(Outcome::table(t, pair_summary(&p)))
}

pub fn s21(doc: &Document, ov: &Overrides) -> Res<Outcome> {
    let p = pair(doc, ov)?;
    let sc = doc.require("scattering")?;
    let settings = SwirlSettings {
        g: hz(sc.real("g")?),
        gamma_prime: hz(sc.real("gamma_prime")?),
        gamma_phi: hz(sc.real("gamma_phi")?),
        branch: p.branch,
    };
    let (lo, hi) = p.bath.with_phase(p.cfg.phase).band_range(p.branch);
    let m = 1.001 * BAND_MARGIN * (hi - lo);
    let lo = sc.opt_real("f_min").map(hz).unwrap_or(lo + m);
    let hi = sc.opt_real("f_max").map(hz).unwrap_or(hi - m);
    if !(hi > lo) {
        return Err(range_error(sc, "f_max", "f_max must exceed f_min".into()));
    }
    let tunings = linspace(lo, hi, grid_usize(doc, "n_tunings", 121));
    let probe = linspace(lo, hi, grid_usize(doc, "n_probe", 241));
    let map = swirl_map(&p.cfg, &p.bath, &settings, &tunings, &probe)?;
    let centers = swirl_centers(&p.cfg, &p.bath, &settings, &tunings)?;
    let roots = expected_swirl_frequencies(&p.cfg, &p.bath, p.branch, lo, hi)?;
    let side = S21Sidecar {
        delta_n: p.cfg.delta_n,
        sublattices: p.sublattices.clone(),
        phase: phase_label(p.cfg.phase).into(),
        bath: p.bath_name.clone(),
        branch: branch_label(p.branch).into(),
        g_hz: to_hz(settings.g),
        gamma_prime_hz: to_hz(settings.gamma_prime),
        gamma_phi_hz: to_hz(settings.gamma_phi),
        tuning_range_hz: [to_hz(lo), to_hz(hi)],
        swirl_centers_hz: centers.iter().map(|w| to_hz(*w)).collect(),
        superradiant_frequencies_hz: roots.iter().map(|w| to_hz(*w)).collect(),
    };
    let matrix = Matrix {
        row_axis: "tuning_hz",
        column_axis: "probe_hz",
        row_values: map.tunings.iter().map(|w| to_hz(*w)).collect(),
        column_values: map.omega_grid.iter().map(|w| to_hz(*w)).collect(),
        values: map.magnitude_db,
    };
    let mut summary = pair_summary(&p);
    summary["swirl_centers_hz"] = json!(side.swirl_centers_hz);
    Ok(Outcome { primary: Primary::Matrix(matrix), sidecars: vec![("params.json", to_json(&side))], summary, seed: None })
}

pub fn chevron(doc: &Document) -> Res<Outcome> {
    let c = doc.require("chevron")?;
    let g = hz(c.real("g")?);
    let (dmin, dmax) = (hz(c.real("detuning_min")?), hz(c.real("detuning_max")?));
    if dmax < dmin {
        return Err(range_error(c, "detuning_max", "detuning_max is below detuning_min".into()));
    }
    let tmax = c.real("duration_max")?;
    let (ql, el) = (mode_coherence(doc, "QL")?, mode_coherence(doc, "EL")?);
    let net = ModeNetwork {
        modes: vec![Mode::new("QL", 0.0, ql.0, ql.1), Mode::new("EL", 0.0, el.0, el.1)],
        couplings: vec![Coupling::always(0, 1, g)],
        frame: 0.0,
    };
    let detunings = linspace(dmin, dmax, grid_usize(doc, "n_detunings", 41));
    let nd = grid_usize(doc, "n_durations", 100);
    let durations: Vec<f64> = (1..=nd).map(|i| tmax * i as f64 / nd as f64).collect();
    let fastest = g.max(dmin.abs()).max(dmax.abs());
    let dt = grid_real(doc, "dt").unwrap_or_else(|| (1.0 / (50.0 * fastest)).min(0.1e-9));
    let map = chevron_map(&net, &detunings, &durations, dt)?;
    let matrix = Matrix {
        row_axis: "detuning_hz",
        column_axis: "duration_ns",
        row_values: detunings.iter().map(|d| to_hz(*d)).collect(),
        column_values: durations.iter().map(|t| t * 1e9).collect(),
        values: map.population,
    };
    Ok(Outcome { primary: Primary::Matrix(matrix), sidecars: Vec::new(), summary: json!({ "dt_s": dt, "g_hz": to_hz(g) }), seed: None })
}

pub fn transfer(doc: &Document) -> Res<Outcome> {
    let s = doc.require("transfer")?;
    let coherence = [
        mode_coherence(doc, "QL")?,
        mode_coherence(doc, "EL")?,
        mode_coherence(doc, "ER")?,
        mode_coherence(doc, "QR")?,
    ];
    let p = TransferParams {
        g_edge: hz(s.real("g_edge")?),
        g_left: hz(s.real("g_left")?),
        g_right: hz(s.real("g_right")?),
        control_step1: hz(s.real("control_step1")?),
        control_step3: hz(s.real("control_step3")?),
        control_extension: s.real("control_extension")?,
        prep_population: s.real("prep_population")?,
        coherence,
        durations: None,
    };
    let dt = grid_real(doc, "dt").unwrap_or(0.05e-9);
    let r = transfer_protocol(&p, dt, grid_usize(doc, "sample_every", 20))?;
    let mut t = Table::new(&["time_ns", "pop_QL", "pop_EL", "pop_ER", "pop_QR"]);
    let tr = &r.trajectory;
    for (i, time) in tr.times.iter().enumerate() {
        let mut row: Vec<Cell> = vec![(time * 1e9).into()];
        row.extend((0..4).map(|k| Cell::from(tr.populations[k][i])));
        t.push(row);
    }
    let b = TransferBudget {
        final_population: r.budget.final_population,
        prep: r.budget.prep,
        leakage: r.budget.leakage,
        decoherence: r.budget.decoherence,
    };
    let steps = p.step_durations();
    Ok(Outcome {
        primary: Primary::Table(t),
        summary: json!({
            "final": b.final_population,
            "step_durations_ns": steps.iter().map(|x| x * 1e9).collect::<Vec<_>>(),
            "dt_s": dt,
            "max_trace_drift": tr.max_trace_drift,
        }),
        sidecars: vec![("budget.json", to_json(&b))],
        seed: None,
    })
}
