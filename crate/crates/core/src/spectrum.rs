//! Discrete Fourier analysis of sampled real series: dominant angular
//! frequencies with sub-bin refinement, used to identify the oscillation
//! content of channel elements and rates.

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::{Error, Result};

/// One spectral peak.
#[derive(Debug, Clone, Copy)]
pub struct Peak {
    /// Angular frequency.
    pub omega: f64,
    /// Windowed spectrum magnitude (arbitrary units, comparable within one
    /// analysis).
    pub magnitude: f64,
}

/// Result of [`frequency_analysis`].
#[derive(Debug, Clone)]
pub struct FrequencyAnalysis {
    /// Local maxima of the magnitude spectrum, strongest first.
    pub peaks: Vec<Peak>,
    /// The window covers fewer than two periods of the dominant peak.
    pub low_resolution: bool,
}

/// Zero-padding factor applied before the transform.
const PAD_FACTOR: usize = 8;

/// Peaks below this fraction of the strongest peak are discarded.
const PEAK_FLOOR: f64 = 0.02;

/// Finds the dominant angular frequencies of a uniformly sampled real series.
///
/// The mean is removed and a Hann window applied (sidelobe suppression so
/// weak secondary lines survive next to strong ones); the padded spectrum's
/// local maxima are refined parabolically on the log magnitude.
pub fn frequency_analysis(series: &[f64], dt: f64) -> Result<FrequencyAnalysis> {
    let n = series.len();
    if n < 4 || dt <= 0.0 {
        return Err(Error::InvalidSpec(
            "frequency analysis needs dt > 0 and at least four samples".into(),
        ));
    }
    let mean = series.iter().sum::<f64>() / n as f64;
    let mut buf: Vec<Complex64> = series
        .iter()
        .enumerate()
        .map(|(k, &x)| {
            let w = 0.5
                - 0.5 * (2.0 * std::f64::consts::PI * k as f64 / (n as f64 - 1.0)).cos();
            Complex64::new((x - mean) * w, 0.0)
        })
        .collect();
    let padded = (n * PAD_FACTOR).next_power_of_two();
    buf.resize(padded, Complex64::new(0.0, 0.0));

    FftPlanner::new().plan_fft_forward(padded).process(&mut buf);

    let half = padded / 2;
    let mags: Vec<f64> = buf[..half].iter().map(|z| z.norm()).collect();
    let dw = 2.0 * std::f64::consts::PI / (padded as f64 * dt);

    let top = mags.iter().cloned().fold(0.0, f64::max);
    let mut peaks = Vec::new();
    for k in 1..half - 1 {
        if mags[k] > mags[k - 1] && mags[k] >= mags[k + 1] && mags[k] > PEAK_FLOOR * top {
            // Parabolic refinement on the log magnitude.
            let (l, c, r) = (mags[k - 1].ln(), mags[k].ln(), mags[k + 1].ln());
            let denom = l - 2.0 * c + r;
            let shift = if denom.abs() > 1e-300 { 0.5 * (l - r) / denom } else { 0.0 };
            peaks.push(Peak { omega: (k as f64 + shift) * dw, magnitude: mags[k] });
        }
    }
    peaks.sort_by(|a, b| b.magnitude.total_cmp(&a.magnitude));

    let window = n as f64 * dt;
    let low_resolution = peaks
        .first()
        .map(|p| window * p.omega < 2.0 * 2.0 * std::f64::consts::PI)
        .unwrap_or(true);
    Ok(FrequencyAnalysis { peaks, low_resolution })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_cosine_peak() {
        // cos(2 J t) with J = 1, dt = 0.05 over t in [0, 20].
        let dt = 0.05;
        let series: Vec<f64> = (0..400).map(|k| (2.0 * k as f64 * dt).cos()).collect();
        let res = frequency_analysis(&series, dt).unwrap();
        assert!(!res.low_resolution);
        let peak = res.peaks[0].omega;
        assert!((peak - 2.0).abs() / 2.0 < 0.02, "peak = {peak}");
    }

    #[test]
    fn two_component_spectrum() {
        let dt = 0.05;
        let series: Vec<f64> = (0..400)
            .map(|k| {
                let t = k as f64 * dt;
                (2.0 * t).cos() + 0.1 * (4.0 * t).cos()
            })
            .collect();
        let res = frequency_analysis(&series, dt).unwrap();
        assert!(res.peaks.len() >= 2, "peaks: {:?}", res.peaks);
        let main = res.peaks[0].omega;
        assert!((main - 2.0).abs() / 2.0 < 0.02);
        // The weak line at 4 must appear among the reported peaks.
        assert!(
            res.peaks.iter().any(|p| (p.omega - 4.0).abs() / 4.0 < 0.02),
            "peaks: {:?}",
            res.peaks
        );
    }

    #[test]
    fn short_window_is_flagged() {
        // Less than two periods of omega = 1 in the window.
        let dt = 0.05;
        let series: Vec<f64> = (0..100).map(|k| (k as f64 * dt).cos()).collect();
        let res = frequency_analysis(&series, dt).unwrap();
        assert!(res.low_resolution);
    }
}
