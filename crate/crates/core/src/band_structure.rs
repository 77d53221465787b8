//! Bloch-space quantities of the infinite resonator array: the k-dependent
//! uncoupled frequency, coupling functions, RWA and full dispersion, closed-form
//! band edges, the capacitive Bogoliubov transform and the winding of f(k).

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::circuit_model::CircuitParams;
use crate::{Error, Result, C64};

/// Couplings at one wavevector. `phi = arg f` in (−π, π].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochCouplings {
    pub gc: C64,
    pub gl: C64,
    pub f: C64,
    pub g: C64,
    pub phi: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DispersionMode {
    Rwa,
    Full,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BandCurve {
    pub k_grid: Vec<f64>,
    pub omega_plus: Vec<f64>,
    pub omega_minus: Vec<f64>,
    pub mode: DispersionMode,
}

/// Closed-form band edges; the middle bandgap is `[lpb_max, upb_min]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BandEdges {
    pub upb_min: f64,
    pub upb_max: f64,
    pub lpb_min: f64,
    pub lpb_max: f64,
    pub p1: i8,
    pub p2: i8,
}

impl BandEdges {
    pub fn middle_gap(&self) -> (f64, f64) {
        (self.lpb_max, self.upb_min)
    }
}

fn cg(p: &CircuitParams, k: f64) -> C64 {
    C64::new(p.cv(), 0.0) + C64::from_polar(p.cw(), -k)
}

fn mg(p: &CircuitParams, k: f64) -> C64 {
    C64::new(p.mv(), 0.0) + C64::from_polar(p.mw(), -k)
}

/// Uncoupled frequency ω0(k) = [L0_eff(k) C0_eff(k)]^(−1/2) with
/// C0_eff = (C_Σ² − |C_g|²)/C_Σ and L0_eff = (L0² − |M_g|²)/L0.
pub fn omega0_k(p: &CircuitParams, k: f64) -> f64 {
    let cs = p.c_sigma();
    let cd2 = cs * cs - cg(p, k).norm_sqr();
    let ld2 = p.l0() * p.l0() - mg(p, k).norm_sqr();
    1.0 / ((ld2 / p.l0()) * (cd2 / cs)).sqrt()
}

pub fn coupling_terms(p: &CircuitParams, k: f64) -> BlochCouplings {
    let w0 = omega0_k(p, k);
    let gc = cg(p, k) * (w0 / (2.0 * p.c_sigma()));
    let gl = mg(p, k) * (w0 / (2.0 * p.l0()));
    let f = gc - gl;
    BlochCouplings { gc, gl, f, g: -gc - gl, phi: f.arg() }
}

/// f(k) = g_C(k) − g_L(k).
pub fn f_k(p: &CircuitParams, k: f64) -> C64 {
    coupling_terms(p, k).f
}

/// ω±(k) = ω0(k) ± |f(k)|.
pub fn dispersion_rwa(p: &CircuitParams, k_grid: &[f64]) -> BandCurve {
    let (mut up, mut lo) = (Vec::with_capacity(k_grid.len()), Vec::with_capacity(k_grid.len()));
    for &k in k_grid {
        let w0 = omega0_k(p, k);
        let af = f_k(p, k).norm();
        up.push(w0 + af);
        lo.push(w0 - af);
    }
    BandCurve { k_grid: k_grid.to_vec(), omega_plus: up, omega_minus: lo, mode: DispersionMode::Rwa }
}

/// Relative tolerance below which a negative radicand is treated as rounding.
const RADICAND_EPS: f64 = 1e-9;

/// Full (beyond-RWA) band frequencies at one k, `(ω̃+, ω̃−)`.
pub fn full_bands_at(p: &CircuitParams, k: f64) -> Result<(f64, f64)> {
    let cs = p.c_sigma();
    let l0 = p.l0();
    let c = cg(p, k);
    let m = mg(p, k);
    let cd2 = cs * cs - c.norm_sqr();
    let ld2 = l0 * l0 - m.norm_sqr();
    // ½[M_g(−k)C_g(k) + C_g(−k)M_g(k)] = Re[conj(M_g) C_g]
    let x = (m.conj() * c).re;
    let w0t2 = (l0 * cs - x) / (ld2 * cd2);
    let mut inner = 1.0 - ld2 * cd2 / ((l0 * cs - x) * (l0 * cs - x));
    if inner < 0.0 {
        if inner < -RADICAND_EPS {
            return Err(Error::NumericalDomain { k, radicand: inner });
        }
        inner = 0.0;
    }
    let s = inner.sqrt();
    let lower = 1.0 - s;
    if lower < -RADICAND_EPS || w0t2 <= 0.0 {
        return Err(Error::NumericalDomain { k, radicand: lower });
    }
    Ok(((w0t2 * (1.0 + s)).sqrt(), (w0t2 * lower.max(0.0)).sqrt()))
}

pub fn dispersion_full(p: &CircuitParams, k_grid: &[f64]) -> Result<BandCurve> {
    let (mut up, mut lo) = (Vec::with_capacity(k_grid.len()), Vec::with_capacity(k_grid.len()));
    for &k in k_grid {
        let (a, b) = full_bands_at(p, k)?;
        up.push(a);
        lo.push(b);
    }
    Ok(BandCurve { k_grid: k_grid.to_vec(), omega_plus: up, omega_minus: lo, mode: DispersionMode::Full })
}

fn sgn(x: f64) -> i8 {
    if x < 0.0 {
        -1
    } else {
        1
    }
}

pub fn band_edges(p: &CircuitParams) -> BandEdges {
    let (l0, cs) = (p.l0(), p.c_sigma());
    let (cv, cw, mv, mw) = (p.cv(), p.cw(), p.mv(), p.mw());
    let p1 = sgn(l0 * (cv + cw) - cs * (mv + mw));
    let p2 = sgn(l0 * (cv - cw) - cs * (mv - mw));
    let (s1, s2) = (p1 as f64, p2 as f64);
    let w = |l: f64, c: f64| 1.0 / (l * c).sqrt();
    BandEdges {
        upb_min: w(l0 + s2 * (mv - mw), cs - s2 * (cv - cw)),
        upb_max: w(l0 + s1 * (mv + mw), cs - s1 * (cv + cw)),
        lpb_min: w(l0 - s1 * (mv + mw), cs + s1 * (cv + cw)),
        lpb_max: w(l0 - s2 * (mv - mw), cs + s2 * (cv - cw)),
        p1,
        p2,
    }
}

/// Zak phase and winding number of f(k) around the origin.
///
/// The winding counts turns in the sense of e^{−ik} (clockwise as k increases),
/// so it is 1 in the topological phase. The Zak phase refers to a unit cell
/// with its inversion centre mid-cell. The grid starts at `n_k` points and
/// doubles until every phase step is below π/2.
pub fn zak_winding(p: &CircuitParams, n_k: usize) -> Result<(f64, i32)> {
    winding_of(|k| f_k(p, k), n_k)
}

/// Winding of an arbitrary Bloch function; see [`zak_winding`].
pub fn winding_of(f: impl Fn(f64) -> C64, n_k: usize) -> Result<(f64, i32)> {
    assert!(n_k >= 64, "n_k must be at least 64");
    let mut n = n_k;
    loop {
        let vals: Vec<C64> = (0..n).map(|i| f(-PI + 2.0 * PI * i as f64 / n as f64)).collect();
        let fmax = vals.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let fmin = vals.iter().map(|z| z.norm()).fold(f64::INFINITY, f64::min);
        if fmax == 0.0 || fmin < 1e-9 * fmax {
            return Err(Error::GaplessSystem(fmin));
        }
        let mut total = 0.0;
        let mut ok = true;
        for i in 0..n {
            let d = (vals[(i + 1) % n] / vals[i]).arg();
            if d.abs() >= PI / 2.0 {
                ok = false;
                break;
            }
            total += d;
        }
        if ok {
            let w = -(total / (2.0 * PI)).round() as i32;
            return Ok((PI * w as f64, w));
        }
        if n > 1 << 22 {
            return Err(Error::GaplessSystem(fmin));
        }
        n *= 2;
    }
}

/// Bogoliubov coefficients of the capacitive-only circuit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bogoliubov {
    pub x_plus: f64,
    pub x_minus: f64,
    pub y_plus: f64,
    pub y_minus: f64,
    /// |c_k| = |C_g(k)|/C_Σ.
    pub c_abs: f64,
    /// Band frequencies ω0(k)√(1 ± |c_k|).
    pub omega_plus: f64,
    pub omega_minus: f64,
}

pub fn bogoliubov_capacitive(p: &CircuitParams, k: f64) -> Result<Bogoliubov> {
    if p.mv() != 0.0 || p.mw() != 0.0 {
        return Err(Error::InvalidRegime("Bogoliubov closed form needs Mv = Mw = 0".into()));
    }
    let c = cg(p, k).norm() / p.c_sigma();
    if c >= 1.0 {
        return Err(Error::InvalidRegime(format!("|c_k| = {c} ≥ 1")));
    }
    let qp = (1.0 + c).powf(0.25);
    let qm = (1.0 - c).powf(0.25);
    let w0 = omega0_k(p, k);
    Ok(Bogoliubov {
        x_plus: qp + 1.0 / qp,
        x_minus: qm + 1.0 / qm,
        y_plus: qp - 1.0 / qp,
        y_minus: qm - 1.0 / qm,
        c_abs: c,
        omega_plus: w0 * (1.0 + c).sqrt(),
        omega_minus: w0 * (1.0 - c).sqrt(),
    })
}

/// Dynamical matrix of the quadratic Hamiltonian at k in the basis
/// (a_k, b_k, a†_−k, b†_−k), in units of ω0(k). Its eigenvalues are ±ω̃±/ω0(k).
pub fn m_matrix(p: &CircuitParams, k: f64) -> [[C64; 4]; 4] {
    let c = cg(p, k) / p.c_sigma();
    let l = mg(p, k) / p.l0();
    let one = C64::new(1.0, 0.0);
    let z = C64::new(0.0, 0.0);
    let h = 0.5;
    [
        [one, (c - l) * h, z, (-c - l) * h],
        [(c - l).conj() * h, one, (-c - l).conj() * h, z],
        [z, (c + l) * h, -one, (-c + l) * h],
        [(c + l).conj() * h, z, (-c + l).conj() * h, -one],
    ]
}

/// k grid of `n` points covering [−π, π] inclusive.
pub fn k_grid(n: usize) -> Vec<f64> {
    assert!(n >= 2);
    (0..n).map(|i| -PI + 2.0 * PI * i as f64 / (n - 1) as f64).collect()
}
