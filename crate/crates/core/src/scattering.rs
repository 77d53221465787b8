//! Waveguide transmission through one or two emitters attached to the chain,
//! by composition of 2×2 transfer matrices.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cooperative::{exchange_and_decay, k_of_omega, pair_phase_wrapped, superradiance_points, Bath, Branch, QubitPairConfig};
use crate::numerics::{fit_lorentzian, FitResult};
use crate::{Error, Result, C64};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmitterScatterer {
    pub omega_q: f64,
    /// Decay into the waveguide, both directions.
    pub gamma_e: f64,
    /// Parasitic decoherence Γ' = 2Γ2 − κe,1 − κe,2.
    pub gamma_prime: f64,
    pub gamma_phi: f64,
}

impl EmitterScatterer {
    pub fn new(omega_q: f64, gamma_e: f64, gamma_prime: f64, gamma_phi: f64) -> Result<Self> {
        for (name, v) in [("Γe", gamma_e), ("Γ'", gamma_prime), ("γφ", gamma_phi)] {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::InvalidParams(format!("{name} must be a non-negative rate")));
            }
        }
        Ok(EmitterScatterer { omega_q, gamma_e, gamma_prime, gamma_phi })
    }

    /// Γ' from the total linewidth 2Γ2 and the two port couplings.
    pub fn parasitic_rate(gamma_2: f64, kappa_e1: f64, kappa_e2: f64) -> f64 {
        2.0 * gamma_2 - kappa_e1 - kappa_e2
    }

    /// Half width of the coherent response, (Γe + Γ')/2 + γφ.
    pub fn half_width(&self) -> f64 {
        0.5 * (self.gamma_e + self.gamma_prime) + self.gamma_phi
    }

    /// s(ω) = (Γe/2) / (i(ωq − ω) + half width); t = 1 − s, r = −s.
    fn s(&self, omega: f64) -> C64 {
        C64::new(0.5 * self.gamma_e, 0.0) / C64::new(self.half_width(), self.omega_q - omega)
    }

    pub fn transmission(&self, omega: f64) -> C64 {
        C64::new(1.0, 0.0) - self.s(omega)
    }

    pub fn reflection(&self, omega: f64) -> C64 {
        -self.s(omega)
    }

    /// Transfer matrix taking (right-moving, left-moving) amplitudes across the
    /// emitter: (1/t)[[t² − r², r], [−r, 1]].
    pub fn transfer_matrix(&self, omega: f64) -> [[C64; 2]; 2] {
        let t = self.transmission(omega);
        let r = self.reflection(omega);
        [[(t * t - r * r) / t, r / t], [-r / t, C64::new(1.0, 0.0) / t]]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumResult {
    pub omega_grid: Vec<f64>,
    pub s21: Vec<C64>,
    pub magnitude_db: Vec<f64>,
}

impl SpectrumResult {
    fn from_s21(omega_grid: Vec<f64>, s21: Vec<C64>) -> Self {
        let magnitude_db = s21.iter().map(|z| 20.0 * z.norm().log10()).collect();
        SpectrumResult { omega_grid, s21, magnitude_db }
    }

    pub fn max_magnitude(&self) -> f64 {
        self.s21.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

pub fn single_qubit_s21(e: &EmitterScatterer, omega_grid: &[f64]) -> SpectrumResult {
    let s21 = omega_grid.iter().map(|&w| e.transmission(w)).collect();
    SpectrumResult::from_s21(omega_grid.to_vec(), s21)
}

fn mat_mul(a: &[[C64; 2]; 2], b: &[[C64; 2]; 2]) -> [[C64; 2]; 2] {
    let mut m = [[C64::new(0.0, 0.0); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            m[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    m
}

fn propagation(theta: f64) -> [[C64; 2]; 2] {
    let z = C64::new(0.0, 0.0);
    [[C64::from_polar(1.0, theta), z], [z, C64::from_polar(1.0, -theta)]]
}

/// S21 of the composition T2·P(θ)·T1. All factors have unit determinant, so
/// the transmitted amplitude for a wave incident from the left is 1/M22,
/// which reduces to t1 t2 e^{iθ} / (1 − s1 s2 e^{2iθ}). The reduced form is
/// evaluated because it stays finite when an emitter reflects perfectly.
pub fn compose_s21(e1: &EmitterScatterer, e2: &EmitterScatterer, theta: f64, omega: f64) -> C64 {
    let (s1, s2) = (e1.s(omega), e2.s(omega));
    let one = C64::new(1.0, 0.0);
    (one - s1) * (one - s2) * C64::from_polar(1.0, theta) / (one - s1 * s2 * C64::from_polar(1.0, 2.0 * theta))
}

/// 1/M22 from the explicit matrix product; agrees with [`compose_s21`] away
/// from perfect reflection.
pub fn compose_s21_matrices(e1: &EmitterScatterer, e2: &EmitterScatterer, theta: f64, omega: f64) -> C64 {
    let m = mat_mul(&e2.transfer_matrix(omega), &mat_mul(&propagation(theta), &e1.transfer_matrix(omega)));
    C64::new(1.0, 0.0) / m[1][1]
}

fn check_in_band(bath: &Bath, omega: f64, branch: Branch) -> Result<()> {
    let (lo, hi) = bath.band_range(branch);
    if omega < lo || omega > hi {
        return Err(Error::OutsideBand(omega));
    }
    Ok(())
}

/// Two-emitter transmission with the inter-emitter phase θ(ω) = k(ω)Δn ∓ φ(k(ω))
/// evaluated at each probe frequency.
pub fn two_qubit_s21(
    e1: &EmitterScatterer,
    e2: &EmitterScatterer,
    cfg: &QubitPairConfig,
    bath: &Bath,
    omega_grid: &[f64],
    branch: Branch,
) -> Result<SpectrumResult> {
    let b = bath.with_phase(cfg.phase);
    check_in_band(&b, e1.omega_q, branch)?;
    check_in_band(&b, e2.omega_q, branch)?;
    let mut s21 = Vec::with_capacity(omega_grid.len());
    for &w in omega_grid {
        let k = k_of_omega(&b, w, branch)?;
        let theta = pair_phase_wrapped(cfg, &b, k);
        s21.push(compose_s21(e1, e2, theta, w));
    }
    Ok(SpectrumResult::from_s21(omega_grid.to_vec(), s21))
}

/// Complex frequencies of the two S21 poles with θ frozen: the roots u of
/// (p1 − iu)(p2 − iu) = (Γe1Γe2/4)e^{2iθ}, p_j = iω_j + half width_j.
pub fn pair_poles(e1: &EmitterScatterer, e2: &EmitterScatterer, theta: f64) -> [C64; 2] {
    let i = C64::new(0.0, 1.0);
    let p1 = C64::new(e1.half_width(), e1.omega_q);
    let p2 = C64::new(e2.half_width(), e2.omega_q);
    let c = C64::from_polar(0.25 * e1.gamma_e * e2.gamma_e, 2.0 * theta);
    let bq = i * (p1 + p2);
    let cq = -(p1 * p2 - c);
    let disc = (bq * bq - 4.0 * cq).sqrt();
    [(-bq + disc) / 2.0, (-bq - disc) / 2.0]
}

/// Identical emitters of coupling `g` tuned together to `omega_q`.
pub fn resonant_pair(
    cfg: &QubitPairConfig,
    bath: &Bath,
    g: f64,
    omega_q: f64,
    gamma_prime: f64,
    gamma_phi: f64,
    branch: Branch,
) -> Result<EmitterScatterer> {
    let c = exchange_and_decay(cfg, bath, g, omega_q, branch)?;
    EmitterScatterer::new(omega_q, c.gamma_e, gamma_prime, gamma_phi)
}

/// Splitting of the real parts of the pole pair for a resonant pair at `omega_q`.
pub fn pole_splitting(
    cfg: &QubitPairConfig,
    bath: &Bath,
    g: f64,
    omega_q: f64,
    gamma_prime: f64,
    gamma_phi: f64,
    branch: Branch,
) -> Result<f64> {
    let b = bath.with_phase(cfg.phase);
    let e = resonant_pair(cfg, &b, g, omega_q, gamma_prime, gamma_phi, branch)?;
    let theta = pair_phase_wrapped(cfg, &b, k_of_omega(&b, omega_q, branch)?);
    let [u1, u2] = pair_poles(&e, &e, theta);
    Ok((u1.re - u2.re).abs())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SwirlMap {
    pub tunings: Vec<f64>,
    pub omega_grid: Vec<f64>,
    /// One row per tuning, |S21| in dB.
    pub magnitude_db: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SwirlSettings {
    pub g: f64,
    pub gamma_prime: f64,
    pub gamma_phi: f64,
    pub branch: Branch,
}

/// |S21|(ω) for a resonant pair swept through `tunings`, rows in parallel.
pub fn swirl_map(cfg: &QubitPairConfig, bath: &Bath, s: &SwirlSettings, tunings: &[f64], omega_grid: &[f64]) -> Result<SwirlMap> {
    let rows: Result<Vec<Vec<f64>>> = tunings
        .par_iter()
        .map(|&wq| {
            let e = resonant_pair(cfg, bath, s.g, wq, s.gamma_prime, s.gamma_phi, s.branch)?;
            Ok(two_qubit_s21(&e, &e, cfg, bath, omega_grid, s.branch)?.magnitude_db)
        })
        .collect();
    Ok(SwirlMap { tunings: tunings.to_vec(), omega_grid: omega_grid.to_vec(), magnitude_db: rows? })
}

/// Tunings at which the pole pair merges in real part (the swirl centres).
/// Local minima of the splitting on `tunings` are refined by golden-section
/// search and kept when the refined splitting is below 1e−6 Γe.
pub fn swirl_centers(cfg: &QubitPairConfig, bath: &Bath, s: &SwirlSettings, tunings: &[f64]) -> Result<Vec<f64>> {
    let split = |w: f64| pole_splitting(cfg, bath, s.g, w, s.gamma_prime, s.gamma_phi, s.branch);
    let vals: Vec<f64> = tunings.iter().map(|&w| split(w)).collect::<Result<_>>()?;
    let mut centers = Vec::new();
    for i in 1..tunings.len().saturating_sub(1) {
        if !(vals[i] <= vals[i - 1] && vals[i] < vals[i + 1]) {
            continue;
        }
        let (mut a, mut b) = (tunings[i - 1], tunings[i + 1]);
        let r = 0.5 * (5f64.sqrt() - 1.0);
        let mut x1 = b - r * (b - a);
        let mut x2 = a + r * (b - a);
        let mut f1 = split(x1)?;
        let mut f2 = split(x2)?;
        for _ in 0..200 {
            if f1 < f2 {
                b = x2;
                x2 = x1;
                f2 = f1;
                x1 = b - r * (b - a);
                f1 = split(x1)?;
            } else {
                a = x1;
                x1 = x2;
                f1 = f2;
                x2 = a + r * (b - a);
                f2 = split(x2)?;
            }
            if b - a < 1e-13 * b.abs() {
                break;
            }
        }
        let w = 0.5 * (a + b);
        let gamma_e = resonant_pair(cfg, bath, s.g, w, 0.0, 0.0, s.branch)?.gamma_e;
        if split(w)? < 1e-6 * gamma_e {
            centers.push(w);
        }
    }
    Ok(centers)
}

/// Super-radiance root frequencies inside the tuning window, ascending.
pub fn expected_swirl_frequencies(cfg: &QubitPairConfig, bath: &Bath, branch: Branch, lo: f64, hi: f64) -> Result<Vec<f64>> {
    let mut w: Vec<f64> =
        superradiance_points(cfg, bath, branch)?.roots.into_iter().map(|(_, w)| w).filter(|w| *w >= lo && *w <= hi).collect();
    w.sort_by(f64::total_cmp);
    Ok(w)
}

/// Lorentzian fitted to the extinction 1 − |S21|² of a resonant pair at
/// `omega_q`, probed over ±`span_widths` total linewidths.
pub fn extinction_lorentzian(
    cfg: &QubitPairConfig,
    bath: &Bath,
    s: &SwirlSettings,
    omega_q: f64,
    span_widths: f64,
    n: usize,
) -> Result<(EmitterScatterer, FitResult)> {
    let e = resonant_pair(cfg, bath, s.g, omega_q, s.gamma_prime, s.gamma_phi, s.branch)?;
    let half = span_widths * 2.0 * e.gamma_e;
    let grid: Vec<f64> = (0..n).map(|i| omega_q - half + 2.0 * half * i as f64 / (n - 1) as f64).collect();
    let sp = two_qubit_s21(&e, &e, cfg, bath, &grid, s.branch)?;
    let y: Vec<f64> = sp.s21.iter().map(|z| 1.0 - z.norm_sqr()).collect();
    Ok((e, fit_lorentzian(&grid, &y)?))
}

/// Evenly spaced grid over [lo, hi].
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1).max(1) as f64).collect()
}
