use num_complex::Complex64;
use rustfft::FftPlanner;

/// A spectral line found by [`spectral_peaks`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Peak {
    /// Frequency in cycles per unit of the sample spacing's reciprocal (Hz for dt in s).
    pub frequency: f64,
    /// Magnitude relative to the strongest peak, in dB (≤ 0).
    pub level_db: f64,
}

/// Spectral lines of a real, uniformly sampled signal.
///
/// The mean is removed, a 4-term Blackman-Harris window (side lobes below
/// −92 dB) is applied, the record is zero-padded to at least 8× its length,
/// and every local maximum of the magnitude within `floor_db` of the strongest
/// one is reported. Peak positions are refined by a parabola through the
/// log-magnitudes of the three bins around the maximum. Peaks are returned in
/// ascending frequency.
pub fn spectral_peaks(samples: &[f64], dt: f64, floor_db: f64) -> Vec<Peak> {
    let n = samples.len();
    if n < 8 {
        return Vec::new();
    }
    let mean = samples.iter().sum::<f64>() / n as f64;
    let nfft = (8 * n).next_power_of_two();
    let (a0, a1, a2, a3) = (0.35875, 0.48829, 0.14128, 0.01168);
    let mut buf: Vec<Complex64> = (0..nfft)
        .map(|i| {
            if i < n {
                let x = std::f64::consts::TAU * i as f64 / (n - 1) as f64;
                let w = a0 - a1 * x.cos() + a2 * (2.0 * x).cos() - a3 * (3.0 * x).cos();
                Complex64::new((samples[i] - mean) * w, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
        .collect();
    FftPlanner::new().plan_fft_forward(nfft).process(&mut buf);
    let half = nfft / 2;
    let mag: Vec<f64> = buf[..=half].iter().map(|z| z.norm()).collect();
    let top = mag.iter().cloned().fold(0.0, f64::max);
    if top == 0.0 {
        return Vec::new();
    }
    let floor = top * 10f64.powf(floor_db / 20.0);
    let df = 1.0 / (nfft as f64 * dt);
    let mut peaks = Vec::new();
    for i in 1..half {
        if mag[i] > floor && mag[i] > mag[i - 1] && mag[i] >= mag[i + 1] {
            let (l, c, r) = (mag[i - 1].ln(), mag[i].ln(), mag[i + 1].ln());
            let den = l - 2.0 * c + r;
            let shift = if den != 0.0 { 0.5 * (l - r) / den } else { 0.0 };
            let level = c - 0.25 * (l - r) * shift;
            peaks.push(Peak {
                frequency: (i as f64 + shift) * df,
                level_db: 20.0 * (level.exp() / top).log10(),
            });
        }
    }
    peaks
}
