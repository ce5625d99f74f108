//! Embedded Dormand-Prince 5(4) integrator with adaptive step control.
//!
//! Small dense systems only; the right-hand side is an arbitrary closure over
//! a dynamic vector. Output is sampled on a fixed grid by clipping steps to
//! the next sample time, so no dense interpolation is involved.

use nalgebra::DVector;

use crate::error::Error;
use crate::Result;

/// Integration tolerances and guards.
#[derive(Debug, Clone, Copy)]
pub struct OdeOptions {
    /// Absolute error tolerance per step.
    pub atol: f64,
    /// Relative error tolerance per step.
    pub rtol: f64,
    /// Hard cap on accepted + rejected steps.
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self {
            atol: 1e-12,
            rtol: 0.0,
            max_steps: 20_000_000,
        }
    }
}

// Butcher tableau of the Dormand-Prince 5(4) pair.
const C: [f64; 6] = [1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 6] = [
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
// Difference between the 5th- and 4th-order weights, for the error estimate.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// Integrate `dy/dt = f(t, y)` from `t0` to `t_end`, returning samples at
/// `t0, t0 + dt_out, ...` and always including `t_end`.
///
/// Fails with [`Error::Integration`] on step-size underflow or when the step
/// budget is exhausted; the error carries the last accepted state.
pub fn integrate<F>(
    f: F,
    y0: DVector<f64>,
    t0: f64,
    t_end: f64,
    dt_out: f64,
    opts: OdeOptions,
) -> Result<Vec<(f64, DVector<f64>)>>
where
    F: Fn(f64, &DVector<f64>) -> DVector<f64>,
{
    if !(t_end > t0) {
        return Err(Error::InvalidRange(format!(
            "t_end = {t_end} must exceed t0 = {t0}"
        )));
    }
    let time_floor = 8.0 * f64::EPSILON * t_end.abs().max(1.0);
    if !(dt_out > time_floor) {
        return Err(Error::InvalidRange(format!(
            "dt_out = {dt_out} below the time resolution of this horizon"
        )));
    }

    let n = y0.len();
    let mut t = t0;
    let mut y = y0;
    let mut k1 = f(t, &y);
    let mut out = Vec::with_capacity(((t_end - t0) / dt_out).ceil() as usize + 2);
    out.push((t, y.clone()));
    // Sample grid held as an integer multiple of dt_out to avoid drift.
    let mut sample_idx: u64 = 1;
    let next_time = |idx: u64| t0 + idx as f64 * dt_out;

    let mut h = initial_step(&y, &k1, opts);
    let mut stages: Vec<DVector<f64>> = vec![DVector::zeros(n); 7];

    let fail = |t: f64, y: &DVector<f64>, reason: &'static str| Error::Integration {
        time: t,
        reason,
        last_state: y.iter().copied().collect(),
    };

    let mut steps = 0usize;
    // Anything closer than a few ulps of the horizon counts as arrived.
    while t_end - t > 0.5 * time_floor {
        steps += 1;
        if steps > opts.max_steps {
            return Err(fail(t, &y, "step budget exhausted"));
        }
        // Step to at most the next event (output sample or final time); the
        // working step `h` is left untouched by this clipping.
        let target = next_time(sample_idx).min(t_end);
        let hits_target = target - t <= h;
        let h_step = if hits_target { target - t } else { h };
        if h_step <= f64::EPSILON * t.abs().max(1.0) {
            return Err(fail(t, &y, "step size underflow"));
        }

        stages[0] = k1.clone();
        for s in 0..6 {
            let mut ys = y.clone();
            for (j, stage) in stages.iter().take(s + 1).enumerate() {
                if A[s][j] != 0.0 {
                    ys.axpy(h_step * A[s][j], stage, 1.0);
                }
            }
            stages[s + 1] = f(t + C[s] * h_step, &ys);
        }
        // The 5th-order solution reuses the last stage row of A.
        let mut y_new = y.clone();
        for (j, stage) in stages.iter().take(6).enumerate() {
            if A[5][j] != 0.0 {
                y_new.axpy(h_step * A[5][j], stage, 1.0);
            }
        }

        // Weighted RMS error estimate against atol + rtol * |y|.
        let mut err_sq = 0.0;
        for i in 0..n {
            let mut e = 0.0;
            for (j, stage) in stages.iter().enumerate() {
                e += E[j] * stage[i];
            }
            e *= h_step;
            let scale = opts.atol + opts.rtol * y[i].abs().max(y_new[i].abs());
            let r = e / scale;
            err_sq += r * r;
        }
        let err = (err_sq / n as f64).sqrt();
        let accepted = err.is_finite() && err <= 1.0;

        if accepted {
            t = if hits_target { target } else { t + h_step };
            y = y_new;
            // First-same-as-last: stage 7 is the derivative at the new point.
            k1 = stages[6].clone();
            while next_time(sample_idx) <= t && next_time(sample_idx) <= t_end {
                out.push((t, y.clone()));
                sample_idx += 1;
            }
        }

        // Standard controller clamp; rejected steps must shrink, and an
        // accepted clipped step says nothing new about accuracy headroom.
        let scale = if !err.is_finite() {
            0.2
        } else if err == 0.0 {
            5.0
        } else {
            (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
        };
        h = if accepted && hits_target {
            h.max(h_step * scale)
        } else {
            h_step * scale
        };
        if !h.is_finite() || h <= f64::EPSILON * t.abs().max(1.0) {
            return Err(fail(t, &y, "step size underflow"));
        }
    }

    // The horizon itself is always the last sample, even when the sample grid
    // rounds an ulp short of it.
    if out.last().map(|(ts, _)| *ts < t_end).unwrap_or(true) {
        out.push((t_end, y));
    }

    Ok(out)
}

/// Cheap starting-step heuristic: a small fraction of the scale set by the
/// initial derivative, bounded away from zero.
fn initial_step(y: &DVector<f64>, dydt: &DVector<f64>, opts: OdeOptions) -> f64 {
    let y_scale = y.amax().max(opts.atol);
    let f_scale = dydt.amax();
    if f_scale > 0.0 {
        (0.01 * y_scale / f_scale).clamp(1e-12, 1.0)
    } else {
        1e-3
    }
}
