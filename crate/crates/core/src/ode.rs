//! Dormand–Prince 5(4) with embedded error control for small fixed-size systems.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OdeOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Smallest step, relative to max(1, |t|), before the integration gives up.
    pub min_step: f64,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        OdeOptions {
            rel_tol: 1e-9,
            abs_tol: 1e-12,
            min_step: 1e-14,
            max_steps: 10_000_000,
        }
    }
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// fifth-order minus embedded fourth-order weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

fn axpy<const N: usize>(y: &[f64; N], terms: &[(f64, &[f64; N])]) -> [f64; N] {
    let mut out = *y;
    for (c, k) in terms {
        for i in 0..N {
            out[i] += c * k[i];
        }
    }
    out
}

/// Integrate `dy/dt = f(t, y)` and return the state at every time in
/// `t_grid`. The first grid point is the initial time.
pub fn integrate<const N: usize, F>(f: F, y0: [f64; N], t_grid: &[f64], opts: &OdeOptions) -> Result<Vec<[f64; N]>>
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    if t_grid.is_empty() {
        return Ok(Vec::new());
    }
    for w in t_grid.windows(2) {
        if !(w[1] > w[0]) {
            return Err(Error::invalid("t_grid", "times must be strictly increasing"));
        }
    }
    let mut out = Vec::with_capacity(t_grid.len());
    out.push(y0);
    let mut t = t_grid[0];
    let mut y = y0;
    let mut k1 = f(t, &y);
    let span = t_grid[t_grid.len() - 1] - t;
    let mut h = (span * 1e-3).max(1e-6).min(span.max(f64::MIN_POSITIVE));
    let mut steps = 0usize;

    for &t_out in &t_grid[1..] {
        while t < t_out {
            if steps >= opts.max_steps {
                return Err(Error::IntegrationFailure { time: t });
            }
            let last = t + h >= t_out;
            let hs = if last { t_out - t } else { h };
            let h_min = opts.min_step * t.abs().max(1.0);
            if hs < h_min && !last {
                return Err(Error::IntegrationFailure { time: t });
            }

            let k2 = f(t + C2 * hs, &axpy(&y, &[(hs * A21, &k1)]));
            let k3 = f(t + C3 * hs, &axpy(&y, &[(hs * A31, &k1), (hs * A32, &k2)]));
            let k4 = f(t + C4 * hs, &axpy(&y, &[(hs * A41, &k1), (hs * A42, &k2), (hs * A43, &k3)]));
            let k5 = f(
                t + C5 * hs,
                &axpy(&y, &[(hs * A51, &k1), (hs * A52, &k2), (hs * A53, &k3), (hs * A54, &k4)]),
            );
            let k6 = f(
                t + hs,
                &axpy(
                    &y,
                    &[(hs * A61, &k1), (hs * A62, &k2), (hs * A63, &k3), (hs * A64, &k4), (hs * A65, &k5)],
                ),
            );
            let y_new = axpy(&y, &[(hs * B1, &k1), (hs * B3, &k3), (hs * B4, &k4), (hs * B5, &k5), (hs * B6, &k6)]);
            let k7 = f(t + hs, &y_new);

            let mut err = 0.0;
            for i in 0..N {
                let e = hs * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
                let sc = opts.abs_tol + opts.rel_tol * y[i].abs().max(y_new[i].abs());
                err += (e / sc) * (e / sc);
            }
            let err = (err / N as f64).sqrt();
            steps += 1;

            if err <= 1.0 {
                t = if last { t_out } else { t + hs };
                y = y_new;
                k1 = k7;
                let fac = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
                if !last || fac < 1.0 {
                    h = hs * fac;
                }
            } else {
                h = hs * (0.9 * err.powf(-0.2)).clamp(0.1, 1.0);
                if h < h_min {
                    return Err(Error::IntegrationFailure { time: t });
                }
            }
        }
        out.push(y);
    }
    Ok(out)
}
