use crate::{Error, Result};

/// Result of a least-squares fit. The meaning of `params` is documented on
/// each fitting routine.
#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub params: Vec<f64>,
    /// Euclidean norm of the residual vector.
    pub residual_norm: f64,
    pub r_squared: f64,
}

impl FitResult {
    /// Decay constant `−1/slope` of an exponential fit.
    pub fn decay_constant(&self) -> f64 {
        -1.0 / self.params[1]
    }
}

/// Ordinary least-squares line `y = a + b x`; `params = [a, b]`.
pub fn fit_line(x: &[f64], y: &[f64]) -> Result<FitResult> {
    if x.len() != y.len() {
        return Err(Error::FitFailure("length mismatch".into()));
    }
    let n = x.len();
    if n < 2 {
        return Err(Error::FitFailure(format!("need at least 2 points, got {n}")));
    }
    let mx = x.iter().sum::<f64>() / n as f64;
    let my = y.iter().sum::<f64>() / n as f64;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(u, v)| (u - mx) * (v - my)).sum();
    let syy: f64 = y.iter().map(|v| (v - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::FitFailure("all x values coincide".into()));
    }
    let b = sxy / sxx;
    let a = my - b * mx;
    let ss_res: f64 = x.iter().zip(y).map(|(u, v)| (v - a - b * u).powi(2)).sum();
    let r_squared = if syy == 0.0 { 1.0 } else { (1.0 - ss_res / syy).clamp(0.0, 1.0) };
    Ok(FitResult { params: vec![a, b], residual_norm: ss_res.sqrt(), r_squared })
}

/// Log-linear fit `ln y = a + b x`; `params = [a, b]`, decay constant `−1/b`.
pub fn fit_exponential_decay(x: &[f64], y: &[f64]) -> Result<FitResult> {
    if let Some(i) = y.iter().position(|&v| !(v > 0.0)) {
        return Err(Error::NonPositiveData(i));
    }
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    fit_line(x, &ly)
}

/// Lorentzian `y = A (Γ/2)² / ((x − x0)² + (Γ/2)²)` fitted to peak-shaped data;
/// `params = [x0, Γ, A]` with Γ the full width at half maximum.
///
/// Starts from the algebraic fit of `1/y` to a quadratic (exact for a noiseless
/// Lorentzian, weighted by y² to tame the tails) and polishes with
/// Gauss-Newton on the direct residuals.
pub fn fit_lorentzian(x: &[f64], y: &[f64]) -> Result<FitResult> {
    if x.len() != y.len() || x.len() < 4 {
        return Err(Error::FitFailure("need at least 4 points".into()));
    }
    let ymax = y.iter().cloned().fold(f64::MIN, f64::max);
    if !(ymax > 0.0) {
        return Err(Error::FitFailure("no positive peak".into()));
    }
    // Centre and scale x so that the normal equations stay well conditioned.
    let imax = y.iter().position(|&v| v == ymax).unwrap();
    let xc = x[imax];
    let xs = x.iter().map(|v| (v - xc).abs()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let u: Vec<f64> = x.iter().map(|v| (v - xc) / xs).collect();

    let mut ata = [[0.0; 3]; 3];
    let mut atb = [0.0; 3];
    for (ui, yi) in u.iter().zip(y) {
        if *yi <= 0.05 * ymax {
            continue;
        }
        let w = yi * yi;
        let row = [1.0, *ui, ui * ui];
        for r in 0..3 {
            for c in 0..3 {
                ata[r][c] += w * row[r] * row[c];
            }
            atb[r] += w * row[r] / yi;
        }
    }
    let c = solve3(ata, atb).ok_or_else(|| Error::FitFailure("singular normal equations".into()))?;
    if !(c[2] > 0.0) {
        return Err(Error::FitFailure("data is not peak-shaped".into()));
    }
    let mut p = {
        let u0 = -c[1] / (2.0 * c[2]);
        let hw2 = c[0] / c[2] - u0 * u0;
        if !(hw2 > 0.0) {
            return Err(Error::FitFailure("negative squared width".into()));
        }
        let hw = hw2.sqrt();
        [u0, hw, 1.0 / (c[2] * hw2)]
    };

    let model = |p: &[f64; 3], ui: f64| {
        let d = ui - p[0];
        p[2] * p[1] * p[1] / (d * d + p[1] * p[1])
    };
    for _ in 0..50 {
        let mut jtj = [[0.0; 3]; 3];
        let mut jtr = [0.0; 3];
        for (ui, yi) in u.iter().zip(y) {
            let d = ui - p[0];
            let den = d * d + p[1] * p[1];
            let m = p[2] * p[1] * p[1] / den;
            let grad = [
                2.0 * m * d / den,
                2.0 * p[2] * p[1] * d * d / (den * den),
                p[1] * p[1] / den,
            ];
            let r = yi - m;
            for a in 0..3 {
                for b in 0..3 {
                    jtj[a][b] += grad[a] * grad[b];
                }
                jtr[a] += grad[a] * r;
            }
        }
        let Some(step) = solve3(jtj, jtr) else { break };
        for k in 0..3 {
            p[k] += step[k];
        }
        p[1] = p[1].abs();
        if step.iter().zip(&p).all(|(s, v)| s.abs() <= 1e-15 * v.abs().max(1e-300)) {
            break;
        }
    }

    let my = y.iter().sum::<f64>() / y.len() as f64;
    let ss_tot: f64 = y.iter().map(|v| (v - my).powi(2)).sum();
    let ss_res: f64 = u.iter().zip(y).map(|(ui, yi)| (yi - model(&p, *ui)).powi(2)).sum();
    let r_squared = if ss_tot == 0.0 { 1.0 } else { (1.0 - ss_res / ss_tot).clamp(0.0, 1.0) };
    Ok(FitResult {
        params: vec![xc + p[0] * xs, 2.0 * p[1] * xs, p[2]],
        residual_norm: ss_res.sqrt(),
        r_squared,
    })
}

fn solve3(mut a: [[f64; 3]; 3], mut b: [f64; 3]) -> Option<[f64; 3]> {
    for col in 0..3 {
        let piv = (col..3).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col] == 0.0 || !a[piv][col].is_finite() {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for r in col + 1..3 {
            let f = a[r][col] / a[col][col];
            for c in col..3 {
                a[r][c] -= f * a[col][c];
            }
            b[r] -= f * b[col];
        }
    }
    let mut x = [0.0; 3];
    for r in (0..3).rev() {
        let s: f64 = (r + 1..3).map(|c| a[r][c] * x[c]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    Some(x)
}
