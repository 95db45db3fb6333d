//! Least-squares fits of the exponential tails `Φ - lo ≈ C⁻ e^{η⁻ξ}` and
//! `hi - Φ ≈ C⁺ e^{-η⁺ξ}`.

use serde::{Deserialize, Serialize};

use crate::grid::Grid;

/// Deviations below this are rounding noise and are left out of the fit.
const DEV_FLOOR: f64 = 1e-12;
const MIN_POINTS: usize = 8;
/// RMS log misfit above which the asymptotic regime is considered not reached.
pub const FIT_WARN: f64 = 0.1;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailFit {
    pub c_minus: f64,
    pub c_plus: f64,
    /// RMS misfit in `log` with the exponent held at `η`.
    pub residual_minus: f64,
    pub residual_plus: f64,
    /// Free least-squares slope, for comparison with `η`.
    pub slope_minus: f64,
    pub slope_plus: f64,
    pub points_minus: usize,
    pub points_plus: usize,
}

impl TailFit {
    pub fn warning(&self) -> Option<String> {
        let worst = self.residual_minus.max(self.residual_plus);
        if worst > FIT_WARN || self.points_minus < MIN_POINTS || self.points_plus < MIN_POINTS {
            Some(format!("asymptotic regime not reached, increase L (fit residual {worst:.3})"))
        } else {
            None
        }
    }
}

/// `(log C, rms, free slope)` for `y ≈ log C + s x` with `s` fixed.
fn fit_line(x: &[f64], y: &[f64], s: f64) -> (f64, f64, f64) {
    let n = x.len() as f64;
    if x.is_empty() {
        return (f64::NAN, f64::INFINITY, f64::NAN);
    }
    let b = y.iter().zip(x).map(|(y, x)| y - s * x).sum::<f64>() / n;
    let rms = (y.iter().zip(x).map(|(y, x)| (y - b - s * x).powi(2)).sum::<f64>() / n).sqrt();
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(x, y)| (x - mx) * (y - my)).sum();
    let free = if sxx > 0.0 { sxy / sxx } else { f64::NAN };
    (b, rms, free)
}

/// Picks `(ξ, log deviation)` on the primary window, falling back to all
/// points on that side of 0 with deviation in `[DEV_FLOOR, 1e-4]` when
/// rounding leaves too few.
fn window(xs: &[f64], dev: &[f64], primary: impl Fn(f64) -> bool, side: impl Fn(f64) -> bool) -> (Vec<f64>, Vec<f64>) {
    let pick = |keep: &dyn Fn(f64, f64) -> bool| -> (Vec<f64>, Vec<f64>) {
        xs.iter().zip(dev).filter(|(&x, &d)| keep(x, d)).map(|(&x, &d)| (x, d.ln())).unzip()
    };
    let first = pick(&|x, d| primary(x) && d > DEV_FLOOR);
    if first.0.len() >= MIN_POINTS {
        return first;
    }
    pick(&|x, d| side(x) && d > DEV_FLOOR && d < 1e-4)
}

pub fn fit_tails(grid: &Grid, phi: &[f64], limits: (f64, f64), eta: (f64, f64)) -> TailFit {
    let (lo, hi) = limits;
    let xs = grid.points();
    let l = grid.half_width;
    let left_dev: Vec<f64> = phi.iter().map(|v| v - lo).collect();
    let right_dev: Vec<f64> = phi.iter().map(|v| hi - v).collect();
    let (xl, yl) = window(&xs, &left_dev, |x| x <= -0.5 * l, |x| x < 0.0);
    let (xr, yr) = window(&xs, &right_dev, |x| x >= 0.5 * l, |x| x > 0.0);
    let (bl, rl, sl) = fit_line(&xl, &yl, eta.0);
    let (br, rr, sr) = fit_line(&xr, &yr, -eta.1);
    TailFit {
        c_minus: bl.exp(),
        c_plus: br.exp(),
        residual_minus: rl,
        residual_plus: rr,
        slope_minus: sl,
        slope_plus: -sr,
        points_minus: xl.len(),
        points_plus: xr.len(),
    }
}
