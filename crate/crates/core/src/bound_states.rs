//! Single-excitation tight-binding model of an SSH chain with attached qubits:
//! bound states and their directionality, qubit-qubit couplings, and the
//! coupling of bound states to the two ports.

use faer::Mat;
use serde::{Deserialize, Serialize};

use crate::circuit_model::SshParams;
use crate::finite_lattice::{fit_splittings, EdgeSplitting};
use crate::numerics::{eig_general, eig_hermitian};
use crate::{Error, Result, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sublattice {
    A,
    B,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QubitSpec {
    pub label: String,
    /// Zero-based cell index.
    pub cell: usize,
    pub sublattice: Sublattice,
    pub frequency: f64,
    pub g: f64,
}

impl QubitSpec {
    pub fn new(label: &str, cell: usize, sublattice: Sublattice, frequency: f64, g: f64) -> Self {
        QubitSpec { label: label.to_string(), cell, sublattice, frequency, g }
    }

    /// Index of the chain site the qubit couples to (A(c) = 2c, B(c) = 2c + 1).
    pub fn site(&self) -> usize {
        2 * self.cell + if self.sublattice == Sublattice::B { 1 } else { 0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TightBindingSpec {
    pub n_cells: usize,
    pub ssh: SshParams,
    pub qubits: Vec<QubitSpec>,
    /// κ_b applied as −iκ_b/2 on the first and last chain sites.
    pub port_damping: Option<f64>,
}

impl TightBindingSpec {
    pub fn new(n_cells: usize, ssh: SshParams) -> Self {
        TightBindingSpec { n_cells, ssh, qubits: Vec::new(), port_damping: None }
    }

    pub fn with_qubit(mut self, q: QubitSpec) -> Self {
        self.qubits.push(q);
        self
    }

    pub fn n_sites(&self) -> usize {
        2 * self.n_cells
    }

    pub fn dim(&self) -> usize {
        self.n_sites() + self.qubits.len()
    }

    fn validate(&self) -> Result<()> {
        if self.n_cells < 2 {
            return Err(Error::InvalidParams("chain needs at least 2 cells".into()));
        }
        let mut sites = Vec::new();
        for q in &self.qubits {
            if q.cell >= self.n_cells {
                return Err(Error::InvalidParams(format!("qubit {} outside the chain", q.label)));
            }
            if !(q.g >= 0.0) {
                return Err(Error::InvalidParams(format!("qubit {} has negative g", q.label)));
            }
            if sites.contains(&q.site()) {
                return Err(Error::InvalidParams(format!("two qubits on site of {}", q.label)));
            }
            sites.push(q.site());
        }
        if let Some(k) = self.port_damping {
            if !(k >= 0.0) {
                return Err(Error::InvalidParams("port damping must be non-negative".into()));
            }
        }
        Ok(())
    }

    fn qubit_index(&self, label: &str) -> Result<usize> {
        self.qubits
            .iter()
            .position(|q| q.label == label)
            .ok_or_else(|| Error::InvalidParams(format!("no qubit labelled {label}")))
    }
}

/// The (2N + n_q)-dimensional single-excitation matrix, with frequencies
/// measured from `origin` (pass 0 for absolute frequencies).
fn matrix_from(spec: &TightBindingSpec, origin: f64) -> Mat<C64> {
    let n = spec.dim();
    let ns = spec.n_sites();
    let mut h = Mat::<C64>::zeros(n, n);
    let (jv, jw) = (spec.ssh.j_v(), spec.ssh.j_w());
    for s in 0..ns {
        h[(s, s)] = C64::new(spec.ssh.omega0 - origin, 0.0);
        if s + 1 < ns {
            let t = if s % 2 == 0 { jv } else { jw };
            h[(s, s + 1)] = C64::new(t, 0.0);
            h[(s + 1, s)] = C64::new(t, 0.0);
        }
    }
    for (i, q) in spec.qubits.iter().enumerate() {
        let r = ns + i;
        h[(r, r)] = C64::new(q.frequency - origin, 0.0);
        h[(r, q.site())] = C64::new(q.g, 0.0);
        h[(q.site(), r)] = C64::new(q.g, 0.0);
    }
    if let Some(k) = spec.port_damping {
        h[(0, 0)] -= C64::new(0.0, k / 2.0);
        h[(ns - 1, ns - 1)] -= C64::new(0.0, k / 2.0);
    }
    h
}

/// Hermitian part: site frequencies ω0, hoppings J(1+δ) (intra) and J(1−δ)
/// (inter), qubit frequencies and couplings; anti-Hermitian part −iκ_b/2 on the
/// two terminal sites when port damping is set.
pub fn build_single_excitation_matrix(spec: &TightBindingSpec) -> Result<Mat<C64>> {
    spec.validate()?;
    Ok(matrix_from(spec, 0.0))
}

/// Eigenvalues (absolute, ascending) and eigenvectors of the undamped model.
pub fn spectrum(spec: &TightBindingSpec) -> Result<(Vec<f64>, Mat<C64>)> {
    spec.validate()?;
    let mut s = spec.clone();
    s.port_damping = None;
    let origin = spec.ssh.omega0;
    let (w, v) = eig_hermitian(matrix_from(&s, origin).as_ref())?;
    Ok((w.into_iter().map(|x| x + origin).collect(), v))
}

/// True if ω lies outside both passbands of the infinite chain.
pub fn in_gap(ssh: &SshParams, omega: f64) -> bool {
    let d = (omega - ssh.omega0).abs();
    let inner = 2.0 * ssh.j * ssh.delta.abs();
    let outer = 2.0 * ssh.j;
    d < inner || d > outer
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundState {
    pub energy: f64,
    /// Chain sites first (A(0), B(0), A(1), …), then qubits in spec order.
    pub amplitudes: Vec<C64>,
    /// (right − left)/(right + left) photon weight relative to the qubit's site.
    pub directionality: f64,
    pub left_weight: f64,
    pub right_weight: f64,
    pub photon_weight: f64,
}

impl BoundState {
    /// Photon amplitude on chain site `s`.
    pub fn site(&self, s: usize) -> C64 {
        self.amplitudes[s]
    }
}

fn column(v: &Mat<C64>, j: usize) -> Vec<C64> {
    (0..v.nrows()).map(|i| v[(i, j)]).collect()
}

fn directional_weights(spec: &TightBindingSpec, amps: &[C64], site: usize) -> (f64, f64, f64) {
    let ns = spec.n_sites();
    let left: f64 = amps[..site].iter().map(|z| z.norm_sqr()).sum();
    let right: f64 = amps[site + 1..ns].iter().map(|z| z.norm_sqr()).sum();
    let total: f64 = amps[..ns].iter().map(|z| z.norm_sqr()).sum();
    (left, right, total)
}

/// Bound state of the qubit labelled `label`: the eigenvector with the largest
/// weight on that qubit. Its energy must lie in a gap of the infinite chain.
pub fn bound_state(spec: &TightBindingSpec, label: &str) -> Result<BoundState> {
    let qi = spec.qubit_index(label)?;
    let (w, v) = spectrum(spec)?;
    let row = spec.n_sites() + qi;
    let j = (0..w.len())
        .max_by(|&a, &b| v[(row, a)].norm_sqr().total_cmp(&v[(row, b)].norm_sqr()))
        .ok_or(Error::NoGapState)?;
    if !in_gap(&spec.ssh, w[j]) {
        return Err(Error::NoGapState);
    }
    let amps = column(&v, j);
    let (left, right, total) = directional_weights(spec, &amps, spec.qubits[qi].site());
    let d = if left + right > 0.0 { (right - left) / (right + left) } else { 0.0 };
    Ok(BoundState {
        energy: w[j],
        amplitudes: amps,
        directionality: d,
        left_weight: left,
        right_weight: right,
        photon_weight: total,
    })
}

/// Chain length treated as infinite for a qubit `offset` cells from the far end.
pub fn effective_cells(ssh: &SshParams, offset: usize) -> usize {
    let xi = if ssh.xi.is_finite() { ssh.xi } else { 50.0 };
    (10.0 * xi).ceil() as usize + offset
}

/// Bound state of a single qubit in a chain long enough to act as infinite:
/// the chain starts at the default length and doubles until the bound-state
/// energy moves by less than 1e−10 relative.
pub fn bound_state_converged(ssh: &SshParams, sublattice: Sublattice, omega_q: f64, g: f64) -> Result<(BoundState, usize)> {
    let mut n = 2 * effective_cells(ssh, 2);
    let mut prev: Option<f64> = None;
    loop {
        let cell = n / 2;
        let spec = TightBindingSpec::new(n, *ssh).with_qubit(QubitSpec::new("q", cell, sublattice, omega_q, g));
        let b = bound_state(&spec, "q")?;
        if let Some(p) = prev {
            if (b.energy - p).abs() <= 1e-10 * p.abs() {
                return Ok((b, n));
            }
        }
        if n > 4096 {
            return Ok((b, n));
        }
        prev = Some(b.energy);
        n *= 2;
    }
}

/// Half the splitting of the two hybridized in-gap states of qubits `a` and
/// `b`, both set to ω0. The pair of eigenvectors with the largest weight on the
/// two qubits is used, irrespective of eigenvalue ordering.
pub fn qubit_qubit_coupling(spec: &TightBindingSpec, a: &str, b: &str) -> Result<f64> {
    let ia = spec.qubit_index(a)?;
    let ib = spec.qubit_index(b)?;
    let mut s = spec.clone();
    for q in &mut s.qubits {
        q.frequency = s.ssh.omega0;
    }
    let (w, v) = spectrum(&s)?;
    let ra = s.n_sites() + ia;
    let rb = s.n_sites() + ib;
    let mut idx: Vec<usize> = (0..w.len()).collect();
    let weight = |j: usize| v[(ra, j)].norm_sqr() + v[(rb, j)].norm_sqr();
    idx.sort_by(|&x, &y| weight(y).total_cmp(&weight(x)));
    let (j1, j2) = (idx[0], idx[1]);
    if !in_gap(&s.ssh, w[j1]) || !in_gap(&s.ssh, w[j2]) {
        return Err(Error::NoGapState);
    }
    Ok(0.5 * (w[j1] - w[j2]).abs())
}

/// Site coupling recovered from a measured nearest-pair coupling:
/// g = √(g_nn · J(1+δ)).
pub fn site_coupling_from_pair(g_nn: f64, j: f64, delta: f64) -> f64 {
    (g_nn * j * (1.0 + delta)).sqrt()
}

/// External couplings of one qubit's bound state to the two ports.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PortCoupling {
    pub cell: usize,
    pub sublattice: Sublattice,
    pub frequency: f64,
    pub kappa_e1: f64,
    pub kappa_e2: f64,
}

/// Places a single qubit (coupling `g`, frequency `omega_q`) on each of
/// `placements` in turn and reads κ_e,1 = κ_b|ψ_first|², κ_e,2 = κ_b|ψ_last|²
/// from the damped bound state, with ψ the unit-norm right eigenvector.
pub fn external_coupling_profile(
    n_cells: usize,
    ssh: &SshParams,
    kappa_b: f64,
    g: f64,
    omega_q: f64,
    placements: &[(usize, Sublattice)],
) -> Result<Vec<PortCoupling>> {
    let gap_width = 4.0 * ssh.j * ssh.delta.abs();
    let mut out = Vec::with_capacity(placements.len());
    for &(cell, sub) in placements {
        let q = QubitSpec::new("q", cell, sub, omega_q, g);
        let mut spec = TightBindingSpec::new(n_cells, *ssh).with_qubit(q);
        let undamped = bound_state(&spec, "q")?;
        spec.port_damping = Some(kappa_b);
        spec.validate()?;
        let origin = ssh.omega0;
        let eig = eig_general(matrix_from(&spec, origin).as_ref())?;
        let row = spec.n_sites();
        let j = (0..eig.values.len())
            .max_by(|&a, &b| eig.vectors[(row, a)].norm_sqr().total_cmp(&eig.vectors[(row, b)].norm_sqr()))
            .ok_or(Error::NoGapState)?;
        let e = eig.values[j].re + origin;
        let shift = (e - undamped.energy).abs() / gap_width * 100.0;
        if shift > 1.0 {
            return Err(Error::DampingTooLarge(shift));
        }
        let last = spec.n_sites() - 1;
        out.push(PortCoupling {
            cell,
            sublattice: sub,
            frequency: omega_q,
            kappa_e1: kappa_b * eig.vectors[(0, j)].norm_sqr(),
            kappa_e2: kappa_b * eig.vectors[(last, j)].norm_sqr(),
        });
    }
    Ok(out)
}

/// Default port damping κ_b = J/50.
pub fn default_port_damping(ssh: &SshParams) -> f64 {
    ssh.j / 50.0
}

/// Edge splitting of a bare topological tight-binding chain versus size.
pub fn edge_splitting_scan_tight_binding(ssh: &SshParams, sizes: &[usize]) -> Result<EdgeSplitting> {
    let mut split = Vec::new();
    let mut carrier = Vec::new();
    for &n in sizes {
        let (w, _) = spectrum(&TightBindingSpec::new(n, *ssh))?;
        let mut by_dist: Vec<f64> = w.clone();
        by_dist.sort_by(|a, b| (a - ssh.omega0).abs().total_cmp(&(b - ssh.omega0).abs()));
        split.push((by_dist[0] - by_dist[1]).abs());
        carrier.push(ssh.omega0);
    }
    fit_splittings(sizes, &split, &carrier)
}
