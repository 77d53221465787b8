//! Passband cooperative quantities for a pair of qubits: the phase of f(k),
//! perfect super-radiance points and the exchange / correlated decay rates.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::band_structure::{coupling_terms, omega0_k};
use crate::bound_states::Sublattice;
use crate::circuit_model::{CircuitParams, Phase, SshParams};
use crate::numerics::bisect_roots;
use crate::{Error, Result, C64};

/// The photonic bath seen by the qubits: either the circuit model (RWA bands
/// ω0(k) ± |f(k)|) or an idealized SSH chain (constant ω0,
/// f = −J[(1+δ) + (1−δ)e^{−ik}]).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Bath {
    Circuit(CircuitParams),
    Ideal(SshParams),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum Branch {
    #[default]
    Upper,
    Lower,
}

impl Bath {
    pub fn f(&self, k: f64) -> C64 {
        match self {
            Bath::Circuit(p) => coupling_terms(p, k).f,
            Bath::Ideal(s) => -(C64::new(1.0 + s.delta, 0.0) + C64::from_polar(1.0 - s.delta, -k)) * s.j,
        }
    }

    fn diag(&self, k: f64) -> f64 {
        match self {
            Bath::Circuit(p) => omega0_k(p, k),
            Bath::Ideal(s) => s.omega0,
        }
    }

    /// RWA band frequency on the given branch.
    pub fn omega(&self, k: f64, branch: Branch) -> f64 {
        let af = self.f(k).norm();
        match branch {
            Branch::Upper => self.diag(k) + af,
            Branch::Lower => self.diag(k) - af,
        }
    }

    /// Dimerization sign convention of the bath: positive in the trivial phase.
    pub fn delta(&self) -> f64 {
        match self {
            Bath::Circuit(p) => {
                let cs = p.c_sigma();
                let num = p.l0() * (p.cv() - p.cw()) - cs * (p.mv() - p.mw());
                let den = p.l0() * (p.cv() + p.cw()) - cs * (p.mv() + p.mw());
                num / den
            }
            Bath::Ideal(s) => s.delta,
        }
    }

    /// The same bath with the dimerization oriented for `phase`.
    pub fn with_phase(&self, phase: Phase) -> Bath {
        let want_positive = phase == Phase::Trivial;
        if (self.delta() > 0.0) == want_positive {
            return *self;
        }
        match self {
            Bath::Circuit(p) => Bath::Circuit(p.swapped()),
            Bath::Ideal(s) => Bath::Ideal(s.flipped()),
        }
    }

    /// Band extent along k ∈ [0, π] on a branch, (min, max).
    pub fn band_range(&self, branch: Branch) -> (f64, f64) {
        let n = 4096;
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..=n {
            let w = self.omega(PI * i as f64 / n as f64, branch);
            lo = lo.min(w);
            hi = hi.max(w);
        }
        (lo, hi)
    }
}

/// Unwrapped arg f(k), continuous on [0, π] and starting from the principal
/// value at k = 0.
pub fn phase_of_f(bath: &Bath, k: f64) -> Result<f64> {
    if bath.delta() == 0.0 {
        return Err(Error::GaplessSystem(0.0));
    }
    let steps = ((k.abs() / PI) * 2048.0).ceil().max(1.0) as usize;
    let mut prev = bath.f(0.0);
    let mut phi = prev.arg();
    for i in 1..=steps {
        let cur = bath.f(k * i as f64 / steps as f64);
        if cur.norm() == 0.0 {
            return Err(Error::GaplessSystem(0.0));
        }
        phi += (cur / prev).arg();
        prev = cur;
    }
    Ok(phi)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QubitPairConfig {
    /// |i − j| in cells.
    pub delta_n: usize,
    /// Sublattices of the qubit at the lower cell index and at the higher one.
    pub sublattices: (Sublattice, Sublattice),
    /// Phase of the waveguide section between the qubits.
    pub phase: Phase,
}

impl QubitPairConfig {
    pub fn ab(delta_n: usize, phase: Phase) -> Self {
        QubitPairConfig { delta_n, sublattices: (Sublattice::A, Sublattice::B), phase }
    }
}

/// Sign with which φ(k) enters the propagation phase: A-then-B pairs
/// −φ, B-then-A pairs +φ, same-sublattice pairs 0.
fn phi_sign(cfg: &QubitPairConfig) -> f64 {
    match cfg.sublattices {
        (Sublattice::A, Sublattice::B) => -1.0,
        (Sublattice::B, Sublattice::A) => 1.0,
        _ => 0.0,
    }
}

/// φ_ij(k) = kΔn ∓ φ(k) (see [`phi_sign`]), with the bath oriented for the
/// configuration's phase.
pub fn pair_phase(cfg: &QubitPairConfig, bath: &Bath, k: f64) -> Result<f64> {
    let b = bath.with_phase(cfg.phase);
    let s = phi_sign(cfg);
    let phi = if s == 0.0 { 0.0 } else { phase_of_f(&b, k)? };
    Ok(k * cfg.delta_n as f64 + s * phi)
}

/// φ_ij(k) modulo 2π, from the principal value of arg f. Cheap; enough wherever
/// only e^{iφ_ij} matters.
pub fn pair_phase_wrapped(cfg: &QubitPairConfig, bath: &Bath, k: f64) -> f64 {
    let b = bath.with_phase(cfg.phase);
    k * cfg.delta_n as f64 + phi_sign(cfg) * b.f(k).arg()
}

/// |f|·sin φ_ij(k), smooth in k and free of branch cuts.
fn sin_pair_phase(cfg: &QubitPairConfig, bath: &Bath, k: f64) -> f64 {
    let e = C64::from_polar(1.0, k * cfg.delta_n as f64);
    match phi_sign(cfg) {
        s if s < 0.0 => (e * bath.f(k).conj()).im,
        s if s > 0.0 => (e * bath.f(k)).im,
        _ => e.im,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuperradiancePoints {
    /// (k, ω) of each root, ascending in k.
    pub roots: Vec<(f64, f64)>,
    pub count: usize,
}

/// Roots of φ_ij(k) ≡ 0 mod π on the open interval k ∈ (0, π), mapped to
/// frequency on `branch`. Roots within 1e−6 of either band edge are excluded.
pub fn superradiance_points(cfg: &QubitPairConfig, bath: &Bath, branch: Branch) -> Result<SuperradiancePoints> {
    let b = bath.with_phase(cfg.phase);
    if b.delta() == 0.0 {
        return Err(Error::GaplessSystem(0.0));
    }
    let edge = 1e-6;
    let n_brackets = 1000 * (1 + cfg.delta_n);
    let ks = bisect_roots(|k| sin_pair_phase(cfg, &b, k), 0.0, PI, n_brackets);
    let roots: Vec<(f64, f64)> =
        ks.into_iter().filter(|&k| k > edge && k < PI - edge).map(|k| (k, b.omega(k, branch))).collect();
    Ok(SuperradiancePoints { count: roots.len(), roots })
}

/// Fraction of the band span excluded at each edge by default.
pub const BAND_MARGIN: f64 = 0.01;

/// ω → k on the branch for k ∈ (0, π), by bisection on the monotone band.
pub fn k_of_omega(bath: &Bath, omega: f64, branch: Branch) -> Result<f64> {
    let w0 = bath.omega(0.0, branch);
    let wpi = bath.omega(PI, branch);
    let (lo, hi) = (w0.min(wpi), w0.max(wpi));
    if !(omega >= lo && omega <= hi) {
        return Err(Error::OutsideBand(omega));
    }
    let g = |k: f64| bath.omega(k, branch) - omega;
    let (mut a, mut b) = (0.0, PI);
    let mut fa = g(a);
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        let fm = g(m);
        if fm == 0.0 {
            return Ok(m);
        }
        if fm.signum() == fa.signum() {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    Ok(0.5 * (a + b))
}

/// Group velocity |dω/dk| (rad/s per rad) by central difference.
pub fn group_velocity(bath: &Bath, k: f64, branch: Branch) -> f64 {
    let h = 1e-6;
    ((bath.omega(k + h, branch) - bath.omega(k - h, branch)) / (2.0 * h)).abs()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cooperative {
    pub k: f64,
    pub j_ij: f64,
    pub gamma_ij: f64,
    pub gamma_e: f64,
}

/// Exchange J_ij = (Γe/2) sin φ_ij and correlated decay Γ_ij = Γe cos φ_ij at a
/// passband frequency, with Γe = g²d/v_g.
pub fn exchange_and_decay(cfg: &QubitPairConfig, bath: &Bath, g: f64, omega: f64, branch: Branch) -> Result<Cooperative> {
    let b = bath.with_phase(cfg.phase);
    let (lo, hi) = b.band_range(branch);
    if omega < lo || omega > hi {
        return Err(Error::OutsideBand(omega));
    }
    let margin = BAND_MARGIN * (hi - lo);
    if omega < lo + margin || omega > hi - margin {
        return Err(Error::BandEdgeProximity(omega));
    }
    let k = k_of_omega(&b, omega, branch)?;
    let gamma_e = g * g / group_velocity(&b, k, branch);
    let phi = pair_phase_wrapped(cfg, &b, k);
    Ok(Cooperative { k, j_ij: 0.5 * gamma_e * phi.sin(), gamma_ij: gamma_e * phi.cos(), gamma_e })
}

/// J_ij/Γe and Γ_ij/Γe on `n` frequencies spanning the band minus its margins.
pub fn jg_curve(cfg: &QubitPairConfig, bath: &Bath, n: usize, branch: Branch) -> Result<Vec<(f64, Cooperative)>> {
    let b = bath.with_phase(cfg.phase);
    let (lo, hi) = b.band_range(branch);
    let m = 1.001 * BAND_MARGIN * (hi - lo);
    let (a, z) = (lo + m, hi - m);
    (0..n)
        .map(|i| {
            let w = a + (z - a) * i as f64 / (n - 1).max(1) as f64;
            exchange_and_decay(cfg, &b, 1.0, w, branch).map(|c| (w, c))
        })
        .collect()
}
