//! Classical normal modes of a finite resonator array, edge-mode splitting and
//! disorder ensembles.
//!
//! State ordering per cell n is (V_A, i_A, V_B, i_B); the equations of motion
//! read C·du/dt = u and a mode u ∝ e^{iωt} satisfies C u = (−i/ω) u.

use faer::Mat;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::band_structure::band_edges;
use crate::circuit_model::CircuitParams;
use crate::numerics::{eig_general_real, fit_exponential_decay, lu_rcond, CounterRng, FitResult};
use crate::{Error, Result, C64};

/// How the outermost resonators are terminated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum Boundary {
    /// First A and last B resonators carry an extra ground capacitance equal to
    /// the nominal Cw, so every resonator has the bulk C_Σ.
    #[default]
    MatchedSelfCapacitance,
    /// Nothing beyond the last coupling element: end resonators have C0 + Cv.
    Bare,
}

/// Two tapering resonators between the array and each port.
///
/// Topology at the left end: port – C1g – T1 – C2g – T2 – Cw – A(1), mirrored at
/// the right end. T1 and T2 are L0 resonators with capacitance to ground C1 and
/// C2. The port is a short to ground in the lossless eigenproblem, so C1g loads
/// T1; `port_impedance` is carried for consumers that model the port.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TaperSpec {
    pub c1g: f64,
    pub c2g: f64,
    pub c1: f64,
    pub c2: f64,
    pub port_impedance: f64,
}

impl TaperSpec {
    /// Device I values: (C1g, C2g) = (141, 35) fF, (C1, C2) = (128.2, 230) fF, 50 Ω.
    pub fn device1() -> Self {
        TaperSpec { c1g: 141e-15, c2g: 35e-15, c1: 128.2e-15, c2: 230e-15, port_impedance: 50.0 }
    }

    fn validate(&self) -> Result<()> {
        let v = [self.c1g, self.c2g, self.c1, self.c2, self.port_impedance];
        if v.iter().all(|x| x.is_finite() && *x > 0.0) {
            Ok(())
        } else {
            Err(Error::InvalidParams("taper values must be positive".into()))
        }
    }
}

/// Finite array with per-cell element values.
///
/// `cw[n]` and `mw[n]` couple B(n) to A(n+1), so they have `n_cells − 1`
/// entries; `c0_a`/`c0_b` are the ground capacitances of each resonator.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeSpec {
    pub n_cells: usize,
    pub l0: f64,
    pub c0_a: Vec<f64>,
    pub c0_b: Vec<f64>,
    pub cv: Vec<f64>,
    pub cw: Vec<f64>,
    pub mv: Vec<f64>,
    pub mw: Vec<f64>,
    /// Extra ground capacitance on the first A and the last B resonator.
    pub c_term: (f64, f64),
    pub taper: Option<TaperSpec>,
    /// Disorder-free parameter set; defines the reference bulk gap.
    pub reference: CircuitParams,
}

impl LatticeSpec {
    pub fn uniform(p: &CircuitParams, n_cells: usize, boundary: Boundary) -> Result<Self> {
        if n_cells < 2 {
            return Err(Error::InvalidParams(format!("n_cells = {n_cells}, need at least 2")));
        }
        let term = match boundary {
            Boundary::MatchedSelfCapacitance => p.cw(),
            Boundary::Bare => 0.0,
        };
        Ok(LatticeSpec {
            n_cells,
            l0: p.l0(),
            c0_a: vec![p.c0(); n_cells],
            c0_b: vec![p.c0(); n_cells],
            cv: vec![p.cv(); n_cells],
            cw: vec![p.cw(); n_cells - 1],
            mv: vec![p.mv(); n_cells],
            mw: vec![p.mw(); n_cells - 1],
            c_term: (term, term),
            taper: None,
            reference: *p,
        })
    }

    pub fn with_taper(mut self, taper: TaperSpec) -> Self {
        self.taper = Some(taper);
        self
    }

    pub fn c_sigma_a(&self, n: usize) -> f64 {
        let left = if n == 0 { self.left_coupling() } else { self.cw[n - 1] };
        self.c0_a[n] + self.cv[n] + left
    }

    pub fn c_sigma_b(&self, n: usize) -> f64 {
        let right = if n + 1 == self.n_cells { self.right_coupling() } else { self.cw[n] };
        self.c0_b[n] + self.cv[n] + right
    }

    /// Capacitance between A(0) and whatever lies to its left: the taper's
    /// Cw coupler if present, otherwise the termination capacitance.
    fn left_coupling(&self) -> f64 {
        match self.taper {
            Some(_) => self.reference.cw(),
            None => self.c_term.0,
        }
    }

    fn right_coupling(&self) -> f64 {
        match self.taper {
            Some(_) => self.reference.cw(),
            None => self.c_term.1,
        }
    }

    /// Number of resonators including taper resonators.
    pub fn n_resonators(&self) -> usize {
        2 * self.n_cells + if self.taper.is_some() { 4 } else { 0 }
    }

    /// Offset of the array's first state entry in the state vector.
    pub fn chain_offset(&self) -> usize {
        if self.taper.is_some() {
            4
        } else {
            0
        }
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n_cells;
        if n < 2 {
            return Err(Error::InvalidParams(format!("n_cells = {n}, need at least 2")));
        }
        let lens = [self.c0_a.len(), self.c0_b.len(), self.cv.len(), self.mv.len()];
        if lens.iter().any(|&l| l != n) || self.cw.len() != n - 1 || self.mw.len() != n - 1 {
            return Err(Error::InvalidParams("per-cell vectors have inconsistent lengths".into()));
        }
        if !(self.l0 > 0.0) {
            return Err(Error::InvalidParams("L0 must be positive".into()));
        }
        for i in 0..n {
            if !(self.cv[i] >= 0.0) || (i + 1 < n && !(self.cw[i] >= 0.0)) {
                return Err(Error::InvalidParams(format!("negative coupling capacitance in cell {i}")));
            }
            let ml = if i > 0 { self.mw[i - 1].abs() } else { 0.0 };
            let mr = if i + 1 < n { self.mw[i].abs() } else { 0.0 };
            if self.mv[i].abs() + ml.max(mr) >= self.l0 {
                return Err(Error::InvalidParams(format!("mutual inductance too large in cell {i}")));
            }
            if !(self.c0_a[i] > 0.0 && self.c0_b[i] > 0.0) {
                return Err(Error::InvalidParams(format!("non-positive C0 in cell {i}")));
            }
            if !(self.c_sigma_a(i) > 0.0 && self.c_sigma_b(i) > 0.0) {
                return Err(Error::InvalidParams(format!("non-positive C_Σ in cell {i}")));
            }
        }
        if let Some(t) = self.taper {
            t.validate()?;
        }
        Ok(())
    }
}

/// Fills the coefficient matrix; `set(row, col, value)` receives SI entries.
fn fill_matrix(spec: &LatticeSpec, mut set: impl FnMut(usize, usize, f64)) {
    let n = spec.n_cells;
    let o = spec.chain_offset();
    for c in 0..n {
        let a = o + 4 * c;
        set(a, a + 1, spec.l0);
        set(a, a + 3, spec.mv[c]);
        set(a + 1, a, -spec.c_sigma_a(c));
        set(a + 1, a + 2, spec.cv[c]);
        set(a + 2, a + 1, spec.mv[c]);
        set(a + 2, a + 3, spec.l0);
        set(a + 3, a, spec.cv[c]);
        set(a + 3, a + 2, -spec.c_sigma_b(c));
        if c > 0 {
            set(a, a - 1, spec.mw[c - 1]);
            set(a + 1, a - 2, spec.cw[c - 1]);
        }
        if c + 1 < n {
            set(a + 2, a + 5, spec.mw[c]);
            set(a + 3, a + 4, spec.cw[c]);
        }
    }
    if let Some(t) = spec.taper {
        let cw = spec.reference.cw();
        let cs1 = t.c1 + t.c1g + t.c2g;
        let cs2 = t.c2 + t.c2g + cw;
        // Left: T1 at 0..2, T2 at 2..4, A(0) at 4.
        // Right: B(N−1) at o + 4n − 2, T2' at o + 4n, T1' at o + 4n + 2.
        let e = o + 4 * n;
        for (t1, t2, chain_v) in [(0usize, 2usize, o), (e + 2, e, e - 2)] {
            set(t1, t1 + 1, spec.l0);
            set(t1 + 1, t1, -cs1);
            set(t1 + 1, t2, t.c2g);
            set(t2, t2 + 1, spec.l0);
            set(t2 + 1, t2, -cs2);
            set(t2 + 1, t1, t.c2g);
            set(t2 + 1, chain_v, cw);
            set(chain_v + 1, t2, cw);
        }
    }
}

/// The coefficient matrix C exactly as in the equations of motion (SI units).
pub fn build_coefficient_matrix(spec: &LatticeSpec) -> Result<Mat<f64>> {
    spec.validate()?;
    let dim = 2 * spec.n_resonators();
    let mut m = Mat::<f64>::zeros(dim, dim);
    fill_matrix(spec, |r, c, v| m[(r, c)] = v);
    let rc = lu_rcond(scaled(spec, &m).as_ref());
    if !(rc > 1e-13) {
        return Err(Error::SingularMatrix(rc));
    }
    Ok(m)
}

/// Reference frequency and current scale used to non-dimensionalize C.
fn scales(spec: &LatticeSpec) -> (f64, f64) {
    let cs = spec.reference.c_sigma();
    let w = 1.0 / (spec.l0 * cs).sqrt();
    (w, (cs / spec.l0).sqrt())
}

/// ω_ref·D⁻¹ C D with D = diag(1, s, 1, s, …): entries of order one, same
/// eigenvalues up to the factor ω_ref.
fn scaled(spec: &LatticeSpec, m: &Mat<f64>) -> Mat<f64> {
    let (w, s) = scales(spec);
    let d = |i: usize| if i % 2 == 1 { s } else { 1.0 };
    Mat::from_fn(m.nrows(), m.ncols(), |i, j| w * m[(i, j)] * d(j) / d(i))
}

/// Positive-frequency normal modes.
#[derive(Debug, Clone)]
pub struct ModeSet {
    /// Ascending angular frequencies.
    pub frequencies: Vec<f64>,
    /// Mode vectors over the full state (taper entries first if present), unit norm.
    pub mode_vectors: Vec<Vec<C64>>,
    /// Modes inside the reference middle gap shrunk by 5% on each side.
    pub edge_mode_indices: Vec<usize>,
    /// Offset of cell 0 in each mode vector.
    pub chain_offset: usize,
    pub n_cells: usize,
}

impl ModeSet {
    /// Fractions of a mode's array voltage weight on the first and last
    /// `n_end` cells.
    pub fn end_weights(&self, mode: usize, n_end: usize) -> (f64, f64) {
        let v = &self.mode_vectors[mode];
        let o = self.chain_offset;
        let cell = |c: usize| v[o + 4 * c].norm_sqr() + v[o + 4 * c + 2].norm_sqr();
        let total: f64 = (0..self.n_cells).map(cell).sum();
        let n_end = n_end.min(self.n_cells);
        let left: f64 = (0..n_end).map(cell).sum();
        let right: f64 = (self.n_cells - n_end..self.n_cells).map(cell).sum();
        (left / total, right / total)
    }

    /// Voltage amplitudes (V_A, V_B) per cell.
    pub fn cell_voltages(&self, mode: usize) -> Vec<(C64, C64)> {
        let v = &self.mode_vectors[mode];
        let o = self.chain_offset;
        (0..self.n_cells).map(|c| (v[o + 4 * c], v[o + 4 * c + 2])).collect()
    }
}

/// Edge-mode detection window: reference gap shrunk by `margin` of its width per side.
pub fn gap_window(p: &CircuitParams, margin: f64) -> (f64, f64) {
    let (lo, hi) = band_edges(p).middle_gap();
    let w = hi - lo;
    (lo + margin * w, hi - margin * w)
}

pub const EDGE_WINDOW_MARGIN: f64 = 0.05;

pub fn eigenmodes(spec: &LatticeSpec) -> Result<ModeSet> {
    let m = build_coefficient_matrix(spec)?;
    let (w_ref, s) = scales(spec);
    let ms = scaled(spec, &m);
    let eig = eig_general_real(ms.as_ref())?;
    let dim = ms.nrows();
    let mut modes: Vec<(f64, Vec<C64>)> = Vec::with_capacity(dim / 2);
    for (j, lam) in eig.values.iter().enumerate() {
        // λ̂ = ω_ref·μ and 1/μ = iω.
        let inv = w_ref / lam;
        let (re, im) = (inv.re, inv.im);
        if re.abs() > 1e-6 * im.abs().max(w_ref * 1e-6) {
            return Err(Error::ComplexResidual { re, im });
        }
        if im > 0.0 {
            let mut v: Vec<C64> = (0..dim)
                .map(|i| eig.vectors[(i, j)] * if i % 2 == 1 { s } else { 1.0 })
                .collect();
            let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            v.iter_mut().for_each(|z| *z /= norm);
            modes.push((im, v));
        }
    }
    if modes.len() * 2 != dim {
        return Err(Error::EigenFailure(format!(
            "{} positive frequencies for a {dim}-dimensional system",
            modes.len()
        )));
    }
    modes.sort_by(|a, b| a.0.total_cmp(&b.0));
    let (lo, hi) = gap_window(&spec.reference, EDGE_WINDOW_MARGIN);
    let frequencies: Vec<f64> = modes.iter().map(|m| m.0).collect();
    let edge_mode_indices =
        frequencies.iter().enumerate().filter(|(_, w)| **w > lo && **w < hi).map(|(i, _)| i).collect();
    Ok(ModeSet {
        frequencies,
        mode_vectors: modes.into_iter().map(|m| m.1).collect(),
        edge_mode_indices,
        chain_offset: spec.chain_offset(),
        n_cells: spec.n_cells,
    })
}

/// Edge splitting versus array size.
#[derive(Debug, Clone)]
pub struct EdgeSplitting {
    pub sizes: Vec<usize>,
    /// |f_edge,1 − f_edge,2| in rad/s for every size (including excluded ones).
    pub splittings: Vec<f64>,
    /// Sizes kept in the fit (splitting above the precision floor).
    pub fitted_sizes: Vec<usize>,
    pub fit: FitResult,
    pub xi_fit: f64,
}

/// Splittings below this fraction of the carrier are excluded from fits.
pub const SPLITTING_FLOOR: f64 = 1e-12;

/// Fits ln Δω(N) = a − N/ξ over sizes whose splitting is resolvable.
pub fn fit_splittings(sizes: &[usize], splittings: &[f64], carrier: &[f64]) -> Result<EdgeSplitting> {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut kept = Vec::new();
    for ((&n, &d), &c) in sizes.iter().zip(splittings).zip(carrier) {
        if d > SPLITTING_FLOOR * c {
            xs.push(n as f64);
            ys.push(d);
            kept.push(n);
        }
    }
    if xs.len() < 2 {
        return Err(Error::FitFailure("fewer than two resolvable splittings".into()));
    }
    let fit = fit_exponential_decay(&xs, &ys)?;
    Ok(EdgeSplitting {
        sizes: sizes.to_vec(),
        splittings: splittings.to_vec(),
        fitted_sizes: kept,
        xi_fit: fit.decay_constant(),
        fit,
    })
}

/// Edge-mode splitting of uniform topological arrays for each size in `sizes`.
pub fn edge_splitting_scan(p: &CircuitParams, sizes: &[usize], boundary: Boundary) -> Result<EdgeSplitting> {
    let mut split = Vec::with_capacity(sizes.len());
    let mut carrier = Vec::with_capacity(sizes.len());
    for &n in sizes {
        let modes = eigenmodes(&LatticeSpec::uniform(p, n, boundary)?)?;
        let (a, b) = edge_pair_by_gap(&modes)?;
        split.push((modes.frequencies[a] - modes.frequencies[b]).abs());
        carrier.push(0.5 * (modes.frequencies[a] + modes.frequencies[b]));
    }
    fit_splittings(sizes, &split, &carrier)
}

/// The two modes closest to the centre of the reference gap, which must both
/// lie inside the detection window.
fn edge_pair_by_gap(modes: &ModeSet) -> Result<(usize, usize)> {
    if modes.edge_mode_indices.len() != 2 {
        return Err(Error::FitFailure(format!(
            "expected 2 in-gap modes, found {}",
            modes.edge_mode_indices.len()
        )));
    }
    Ok((modes.edge_mode_indices[0], modes.edge_mode_indices[1]))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DisorderScenario {
    /// (a) Mv, Mw scaled by 1 + r·u.
    MutualInductance,
    /// (b) Cv, Cw scaled by 1 + r·u.
    CouplingCapacitance,
    /// (c) as (b), with every C0 adjusted to keep each C_Σ at its nominal value.
    CorrelatedCapacitance,
}

impl DisorderScenario {
    pub fn label(&self) -> &'static str {
        match self {
            DisorderScenario::MutualInductance => "a",
            DisorderScenario::CouplingCapacitance => "b",
            DisorderScenario::CorrelatedCapacitance => "c",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DisorderSpec {
    pub scenario: DisorderScenario,
    pub r: f64,
    pub n_realizations: usize,
    pub seed: u64,
}

/// One disordered array. Realization `index` draws from RNG stream `index`;
/// for each cell in order two uniforms u_v, u_w ∈ [−1, 1) are consumed
/// (u_w is drawn for the last cell too, but unused there).
pub fn disordered_lattice(
    p: &CircuitParams,
    d: &DisorderSpec,
    n_cells: usize,
    boundary: Boundary,
    index: u64,
) -> Result<LatticeSpec> {
    if !(0.0..1.0).contains(&d.r) {
        return Err(Error::InvalidParams(format!("disorder strength r = {} not in [0, 1)", d.r)));
    }
    let mut spec = LatticeSpec::uniform(p, n_cells, boundary)?;
    let mut s = CounterRng::new(d.seed).stream(index);
    for c in 0..n_cells {
        let fv = 1.0 + d.r * s.uniform_symmetric();
        let fw = 1.0 + d.r * s.uniform_symmetric();
        match d.scenario {
            DisorderScenario::MutualInductance => {
                spec.mv[c] *= fv;
                if c + 1 < n_cells {
                    spec.mw[c] *= fw;
                }
            }
            DisorderScenario::CouplingCapacitance | DisorderScenario::CorrelatedCapacitance => {
                spec.cv[c] *= fv;
                if c + 1 < n_cells {
                    spec.cw[c] *= fw;
                }
            }
        }
    }
    if d.scenario == DisorderScenario::CorrelatedCapacitance {
        let cs = p.c_sigma();
        for c in 0..n_cells {
            let left = if c == 0 { spec.c_term.0 } else { spec.cw[c - 1] };
            let right = if c + 1 == n_cells { spec.c_term.1 } else { spec.cw[c] };
            spec.c0_a[c] = cs - spec.cv[c] - left;
            spec.c0_b[c] = cs - spec.cv[c] - right;
        }
    }
    spec.validate()?;
    Ok(spec)
}

/// Number of cells at each end used to attribute an in-gap mode to an edge.
pub const EDGE_CELLS: usize = 5;

/// Identifies (E_L, E_R) among modes inside the detection window: E_L has the
/// largest voltage weight on the first [`EDGE_CELLS`] cells, E_R the largest on
/// the last ones among the rest. Bulk modes may enter the window under strong
/// disorder, so position in the gap alone does not identify edge modes.
pub fn identify_edge_modes(modes: &ModeSet) -> Option<(usize, usize)> {
    let cand = &modes.edge_mode_indices;
    if cand.len() < 2 {
        return None;
    }
    let w: Vec<(usize, f64, f64)> = cand
        .iter()
        .map(|&i| {
            let (l, r) = modes.end_weights(i, EDGE_CELLS);
            (i, l, r)
        })
        .collect();
    let left = w.iter().max_by(|a, b| a.1.total_cmp(&b.1))?.0;
    let right = w.iter().filter(|x| x.0 != left).max_by(|a, b| a.2.total_cmp(&b.2))?.0;
    Some((left, right))
}

#[derive(Debug, Clone)]
pub struct Realization {
    pub index: usize,
    /// Ascending angular frequencies; empty if the realization failed.
    pub frequencies: Vec<f64>,
    /// (E_L, E_R) mode indices.
    pub edge: Option<(usize, usize)>,
    pub error: Option<Error>,
}

#[derive(Debug, Clone)]
pub struct EnsembleStats {
    pub spec: DisorderSpec,
    pub n_cells: usize,
    pub realizations: Vec<Realization>,
    /// Mean and sample standard deviation of (E_L, E_R) in rad/s.
    pub edge_mean: [f64; 2],
    pub edge_std: [f64; 2],
    pub failed_count: usize,
    /// Realizations without an identifiable edge pair.
    pub edge_missing_count: usize,
    /// Per mode index over successful realizations: (5th, 50th, 95th) percentile.
    pub mode_percentiles: Vec<[f64; 3]>,
    /// Per mode index: sample standard deviation.
    pub mode_std: Vec<f64>,
}

pub fn disorder_ensemble(
    p: &CircuitParams,
    d: &DisorderSpec,
    n_cells: usize,
    boundary: Boundary,
) -> EnsembleStats {
    let realizations: Vec<Realization> = (0..d.n_realizations)
        .into_par_iter()
        .map(|i| {
            match disordered_lattice(p, d, n_cells, boundary, i as u64).and_then(|s| eigenmodes(&s)) {
                Ok(m) => Realization { index: i, edge: identify_edge_modes(&m), frequencies: m.frequencies, error: None },
                Err(e) => Realization { index: i, frequencies: Vec::new(), edge: None, error: Some(e) },
            }
        })
        .collect();
    summarize(*d, n_cells, realizations)
}

fn mean_std(v: &[f64]) -> (f64, f64) {
    if v.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    if v.len() < 2 {
        return (m, 0.0);
    }
    let var = v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, var.sqrt())
}

fn percentile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

fn summarize(spec: DisorderSpec, n_cells: usize, mut realizations: Vec<Realization>) -> EnsembleStats {
    realizations.sort_by_key(|r| r.index);
    let ok: Vec<&Realization> = realizations.iter().filter(|r| r.error.is_none()).collect();
    let failed_count = realizations.len() - ok.len();
    let mut el = Vec::new();
    let mut er = Vec::new();
    for r in &ok {
        if let Some((a, b)) = r.edge {
            el.push(r.frequencies[a]);
            er.push(r.frequencies[b]);
        }
    }
    let edge_missing_count = ok.len() - el.len();
    let (ml, sl) = mean_std(&el);
    let (mr, sr) = mean_std(&er);
    let n_modes = ok.first().map(|r| r.frequencies.len()).unwrap_or(0);
    let mut mode_percentiles = Vec::with_capacity(n_modes);
    let mut mode_std = Vec::with_capacity(n_modes);
    for m in 0..n_modes {
        let mut col: Vec<f64> = ok.iter().map(|r| r.frequencies[m]).collect();
        mode_std.push(mean_std(&col).1);
        col.sort_by(f64::total_cmp);
        mode_percentiles.push([percentile(&col, 0.05), percentile(&col, 0.5), percentile(&col, 0.95)]);
    }
    EnsembleStats {
        spec,
        n_cells,
        realizations,
        edge_mean: [ml, mr],
        edge_std: [sl, sr],
        failed_count,
        edge_missing_count,
        mode_percentiles,
        mode_std,
    }
}
