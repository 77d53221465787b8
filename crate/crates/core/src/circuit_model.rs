//! Lumped-element description of the resonator array and its exact mapping to
//! the tight-binding SSH parameters.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Element values of one unit cell (SI units). Validated on construction.
///
/// The intra-cell (A–B) coupling elements are `cv`, `mv`; the inter-cell
/// (B(n)–A(n+1)) elements are `cw`, `mw`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CircuitParams {
    l0: f64,
    c0: f64,
    cv: f64,
    cw: f64,
    mv: f64,
    mw: f64,
}

impl CircuitParams {
    pub fn new(l0: f64, c0: f64, cv: f64, cw: f64, mv: f64, mw: f64) -> Result<Self> {
        let all = [l0, c0, cv, cw, mv, mw];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParams("non-finite element value".into()));
        }
        if !(l0 > 0.0) || !(c0 > 0.0) {
            return Err(Error::InvalidParams("L0 and C0 must be positive".into()));
        }
        if cv < 0.0 || cw < 0.0 {
            return Err(Error::InvalidParams("Cv and Cw must be non-negative".into()));
        }
        if mv.abs() + mw.abs() >= l0 {
            return Err(Error::InvalidParams("|Mv| + |Mw| must be below L0".into()));
        }
        Ok(CircuitParams { l0, c0, cv, cw, mv, mw })
    }

    /// Device I (App. C): L0 = 1.9 nH, C0 = 250 fF, (Cv, Cw) = (35, 19.2) fF,
    /// (Mv, Mw) = (−38, −32) pH. Trivial phase.
    pub fn device1() -> Self {
        Self::new(1.9e-9, 250e-15, 35e-15, 19.2e-15, -38e-12, -32e-12).unwrap()
    }

    /// Test structure of Fig. 1d: L0 = 1.9 nH, C0 = 253 fF, (Cv, Cw) = (33, 17) fF,
    /// (Mv, Mw) = (−38, −32) pH. Trivial phase; [`Self::swapped`] gives the
    /// topological ordering.
    pub fn test_structure() -> Self {
        Self::new(1.9e-9, 253e-15, 33e-15, 17e-15, -38e-12, -32e-12).unwrap()
    }

    pub fn l0(&self) -> f64 {
        self.l0
    }
    pub fn c0(&self) -> f64 {
        self.c0
    }
    pub fn cv(&self) -> f64 {
        self.cv
    }
    pub fn cw(&self) -> f64 {
        self.cw
    }
    pub fn mv(&self) -> f64 {
        self.mv
    }
    pub fn mw(&self) -> f64 {
        self.mw
    }

    /// Bare self-capacitance C_Σ = C0 + Cv + Cw.
    pub fn c_sigma(&self) -> f64 {
        self.c0 + self.cv + self.cw
    }

    /// Interchanges the intra- and inter-cell elements (Cv↔Cw, Mv↔Mw), which
    /// flips the phase while keeping C_Σ.
    pub fn swapped(&self) -> Self {
        CircuitParams { cv: self.cw, cw: self.cv, mv: self.mw, mw: self.mv, ..*self }
    }

    /// Same circuit with both mutual inductances removed.
    pub fn without_mutuals(&self) -> Self {
        CircuitParams { mv: 0.0, mw: 0.0, ..*self }
    }

    /// Reference frequency ω0 = 1/√(L0 C_Σ).
    pub fn omega0(&self) -> f64 {
        1.0 / (self.l0 * self.c_sigma()).sqrt()
    }
}

/// Free function form of [`CircuitParams::c_sigma`].
pub fn c_sigma(p: &CircuitParams) -> f64 {
    p.c_sigma()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Phase {
    Trivial,
    Topological,
}

impl Phase {
    /// Phase for a given dimerization; `None` at the gap closing δ = 0.
    pub fn from_delta(delta: f64) -> Option<Phase> {
        if delta > 0.0 {
            Some(Phase::Trivial)
        } else if delta < 0.0 {
            Some(Phase::Topological)
        } else {
            None
        }
    }
}

/// Tight-binding SSH parameters: site frequency ω0, hopping J, dimerization δ
/// with hoppings J(1±δ), and localization length ξ in unit cells.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SshParams {
    pub omega0: f64,
    pub j: f64,
    pub delta: f64,
    pub xi: f64,
    pub d: f64,
}

impl SshParams {
    /// Idealized parameters. ξ is infinite at δ = 0.
    pub fn new(omega0: f64, j: f64, delta: f64) -> Result<Self> {
        if !(j > 0.0) || !(omega0 > 0.0) {
            return Err(Error::InvalidParams("ω0 and J must be positive".into()));
        }
        if !(delta.abs() < 1.0) {
            return Err(Error::InvalidDelta(delta));
        }
        let xi = if delta == 0.0 { f64::INFINITY } else { localization_length(delta)? };
        Ok(SshParams { omega0, j, delta, xi, d: 1.0 })
    }

    /// Intra-cell hopping J(1+δ).
    pub fn j_v(&self) -> f64 {
        self.j * (1.0 + self.delta)
    }

    /// Inter-cell hopping J(1−δ).
    pub fn j_w(&self) -> f64 {
        self.j * (1.0 - self.delta)
    }

    pub fn phase(&self) -> Option<Phase> {
        Phase::from_delta(self.delta)
    }

    /// Same chain with the dimerization reversed.
    pub fn flipped(&self) -> Self {
        SshParams { delta: -self.delta, ..*self }
    }

    /// Second derivation route: read J and |δ| off the four band-edge
    /// frequencies as if the bands were those of an ideal SSH chain
    /// (ω± spanning ω0 ± 2J|δ| … ω0 ± 2J). The sign of δ is p1·p2.
    ///
    /// For real circuits this disagrees with [`ssh_mapping`] because ω0(k)
    /// varies across the zone; the two results are kept separate.
    pub fn from_band_edges(e: &crate::band_structure::BandEdges) -> Result<Self> {
        let span = e.upb_max - e.lpb_min;
        let gap = e.upb_min - e.lpb_max;
        let j = span / 4.0;
        let delta = (e.p1 * e.p2) as f64 * gap / span;
        let omega0 = 0.5 * (e.upb_min + e.lpb_max);
        SshParams::new(omega0, j, delta)
    }
}

/// Maps the circuit onto SSH parameters:
/// J = (ω0/4)[(Cv+Cw)/C_Σ − (Mv+Mw)/L0],
/// δ = [L0(Cv−Cw) − C_Σ(Mv−Mw)] / [L0(Cv+Cw) − C_Σ(Mv+Mw)].
pub fn ssh_mapping(p: &CircuitParams) -> Result<SshParams> {
    let cs = p.c_sigma();
    let den = p.l0 * (p.cv + p.cw) - cs * (p.mv + p.mw);
    let num = p.l0 * (p.cv - p.cw) - cs * (p.mv - p.mw);
    if den.abs() <= 1e-15 * p.l0 * cs {
        return Err(Error::DegenerateCoupling);
    }
    let omega0 = p.omega0();
    let j = 0.25 * omega0 * ((p.cv + p.cw) / cs - (p.mv + p.mw) / p.l0);
    let delta = num / den;
    let xi = if delta == 0.0 { f64::INFINITY } else { localization_length(delta)? };
    if !(j > 0.0) {
        return Err(Error::InvalidParams(format!("mapped hopping J = {j:e} is not positive")));
    }
    Ok(SshParams { omega0, j, delta, xi, d: 1.0 })
}

/// ξ = 1 / ln[(1+|δ|)/(1−|δ|)].
pub fn localization_length(delta: f64) -> Result<f64> {
    let a = delta.abs();
    if !(a > 0.0 && a < 1.0) {
        return Err(Error::InvalidDelta(delta));
    }
    Ok(1.0 / ((1.0 + a) / (1.0 - a)).ln())
}
