//! Dormand–Prince 5(4) with PI-free step control, for small fixed-size systems.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OdeError {
    #[error("step size underflow at t = {t}")]
    StepUnderflow { t: f64 },
    #[error("too many steps (stopped at t = {t})")]
    TooManySteps { t: f64 },
    #[error("non-finite state at t = {t}")]
    NonFinite { t: f64 },
}

#[derive(Debug, Clone, Copy)]
pub struct Tolerance {
    pub rel: f64,
    pub abs: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self { rel: 1e-12, abs: 1e-14 }
    }
}

const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
// fifth-order solution minus embedded fourth-order solution
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

const MAX_STEPS: usize = 2_000_000;

/// Integrates `dy/dt = rhs(t, y)` from `t0` through each entry of `times`
/// (which must be non-decreasing and `>= t0`), returning the state at each.
pub fn integrate_to<const N: usize, F>(
    mut rhs: F,
    t0: f64,
    y0: [f64; N],
    times: &[f64],
    tol: Tolerance,
) -> Result<Vec<[f64; N]>, OdeError>
where
    F: FnMut(f64, &[f64; N]) -> [f64; N],
{
    let mut out = Vec::with_capacity(times.len());
    let mut t = t0;
    let mut y = y0;
    let mut h = times
        .iter()
        .map(|&s| (s - t0).abs())
        .fold(0.0, f64::max)
        .max(1e-3)
        * 1e-3;
    let mut steps = 0usize;
    let mut k1 = rhs(t, &y);
    for &target in times {
        while t < target {
            steps += 1;
            if steps > MAX_STEPS {
                return Err(OdeError::TooManySteps { t });
            }
            let last = h >= target - t;
            let step = if last { target - t } else { h };
            let mut k = [[0.0; N]; 7];
            k[0] = k1;
            for s in 1..7 {
                let mut ys = y;
                for (i, v) in ys.iter_mut().enumerate() {
                    *v += step * (0..s).map(|j| A[s][j] * k[j][i]).sum::<f64>();
                }
                k[s] = rhs(t + C[s] * step, &ys);
            }
            let mut y_new = y;
            let mut err = 0.0f64;
            for i in 0..N {
                y_new[i] += step * (0..6).map(|j| A[6][j] * k[j][i]).sum::<f64>();
                let e = step * (0..7).map(|j| E[j] * k[j][i]).sum::<f64>();
                let scale = tol.abs + tol.rel * y[i].abs().max(y_new[i].abs());
                err = err.max((e / scale).abs());
            }
            if !err.is_finite() || y_new.iter().any(|v| !v.is_finite()) {
                if step < 1e-300 {
                    return Err(OdeError::NonFinite { t });
                }
                h = 0.25 * step;
                continue;
            }
            if err <= 1.0 {
                t = if last { target } else { t + step };
                y = y_new;
                // FSAL: last stage is the derivative at the new point
                k1 = k[6];
            }
            let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            if err <= 1.0 && last {
                // keep the unconstrained step length for the next interval
                h = h.max(step * factor);
            } else {
                h = step * factor;
            }
            if h < 1e-14 * t.abs().max(1.0) {
                return Err(OdeError::StepUnderflow { t });
            }
        }
        out.push(y);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_decay() {
        let ys = integrate_to(|_, y: &[f64; 1]| [-2.0 * y[0]], 0.0, [1.0], &[0.5, 1.0, 3.0], Tolerance::default())
            .unwrap();
        for (y, t) in ys.iter().zip([0.5, 1.0, 3.0]) {
            assert!((y[0] - (-2.0f64 * t).exp()).abs() < 1e-12);
        }
    }

    #[test]
    fn harmonic_oscillator_phase() {
        let ys = integrate_to(
            |_, y: &[f64; 2]| [y[1], -y[0]],
            0.0,
            [1.0, 0.0],
            &[10.0],
            Tolerance::default(),
        )
        .unwrap();
        assert!((ys[0][0] - 10f64.cos()).abs() < 1e-10);
        assert!((ys[0][1] + 10f64.sin()).abs() < 1e-10);
    }

    #[test]
    fn repeated_output_time() {
        let ys = integrate_to(|_, _: &[f64; 1]| [1.0], 0.0, [0.0], &[0.0, 1.0, 1.0], Tolerance::default()).unwrap();
        assert_eq!(ys.len(), 3);
        assert_eq!(ys[0][0], 0.0);
        assert!((ys[2][0] - 1.0).abs() < 1e-14);
    }
}
