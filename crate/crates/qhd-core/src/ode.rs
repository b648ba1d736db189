//! Adaptive ODE integration.
//!
//! The workhorse is an explicit Dormand-Prince 5(4) pair with PI step
//! control and FSAL reuse, generic over small fixed-size state vectors.
//! The profile solver records accepted steps (value and slope) through a
//! callback so it can build a cubic Hermite dense output afterwards; the
//! wedge-system solver uses the same core on complex 6-vectors.
//!
//! For linear 6x6 systems there is also an implicit trapezoidal rule with
//! step-doubling error control. It is the fallback when the explicit
//! stepper's stability limit drives the step size to collapse, which only
//! happens far out on large-radius contours; the A-stable rule keeps
//! going at accuracy-limited step sizes.

use num_complex::Complex64;
// Float supplies f64 math when building without std
#[allow(unused_imports)]
use num_traits::{Float, Zero};

use crate::linalg;

/// Step-size policy and tolerances.
#[derive(Debug, Clone, Copy)]
pub struct StepControl {
    pub atol: f64,
    pub rtol: f64,
    /// Initial step; if zero, span/100 is used.
    pub h0: f64,
    /// Hard cap on the step size.
    pub hmax: f64,
    /// Collapse threshold: shrinking below this (away from the interval
    /// end) aborts with [`OdeError::StepCollapse`]. Zero disables.
    pub hmin: f64,
    pub max_steps: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OdeError {
    /// Step size fell below the collapse threshold (stiffness).
    StepCollapse { t: f64, h: f64 },
    MaxSteps { t: f64 },
    NonFinite { t: f64 },
}

impl core::fmt::Display for OdeError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            OdeError::StepCollapse { t, h } => {
                write!(f, "step size collapsed to {h:.3e} at t = {t:.6e}")
            }
            OdeError::MaxSteps { t } => write!(f, "step budget exhausted at t = {t:.6e}"),
            OdeError::NonFinite { t } => write!(f, "state left the finite range at t = {t:.6e}"),
        }
    }
}

/// Fixed-size state vector usable by the steppers.
pub trait OdeVec: Copy {
    fn zeroed() -> Self;
    /// self += c * v
    fn scale_add(&mut self, c: f64, v: &Self);
    /// RMS of err components scaled by atol + rtol * max(|y|, |ynew|).
    fn err_norm(&self, ynew: &Self, err: &Self, atol: f64, rtol: f64) -> f64;
    fn finite(&self) -> bool;
}

impl<const N: usize> OdeVec for [f64; N] {
    fn zeroed() -> Self {
        [0.0; N]
    }
    fn scale_add(&mut self, c: f64, v: &Self) {
        for i in 0..N {
            self[i] += c * v[i];
        }
    }
    fn err_norm(&self, ynew: &Self, err: &Self, atol: f64, rtol: f64) -> f64 {
        let mut acc = 0.0;
        for i in 0..N {
            let sc = atol + rtol * self[i].abs().max(ynew[i].abs());
            let r = err[i] / sc;
            acc += r * r;
        }
        (acc / N as f64).sqrt()
    }
    fn finite(&self) -> bool {
        self.iter().all(|x| x.is_finite())
    }
}

impl<const N: usize> OdeVec for [Complex64; N] {
    fn zeroed() -> Self {
        [Complex64::zero(); N]
    }
    fn scale_add(&mut self, c: f64, v: &Self) {
        for i in 0..N {
            self[i] += c * v[i];
        }
    }
    fn err_norm(&self, ynew: &Self, err: &Self, atol: f64, rtol: f64) -> f64 {
        let mut acc = 0.0;
        for i in 0..N {
            let sc = atol + rtol * self[i].norm().max(ynew[i].norm());
            let r = err[i].norm() / sc;
            acc += r * r;
        }
        (acc / N as f64).sqrt()
    }
    fn finite(&self) -> bool {
        self.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }
}

// Dormand-Prince RK5(4)7M tableau.
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
// b - bhat, the embedded error weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const SAFETY: f64 = 0.9;
const PI_BETA: f64 = 0.04;

/// Integrate y' = f(t, y) from t0 to t_end (either direction).
///
/// `on_step` sees every accepted step as (t, y, f(t, y)); returning false
/// stops the integration early and returns the state at that point. The
/// FSAL slope handed to the callback is exact, so accepted steps carry
/// everything a cubic Hermite interpolant needs.
pub fn rk45<S, F, C>(
    f: &mut F,
    t0: f64,
    y0: &S,
    t_end: f64,
    ctl: &StepControl,
    on_step: &mut C,
) -> Result<(f64, S), OdeError>
where
    S: OdeVec,
    F: FnMut(f64, &S) -> S,
    C: FnMut(f64, &S, &S) -> bool,
{
    let span = (t_end - t0).abs();
    if span == 0.0 {
        return Ok((t0, *y0));
    }
    let dir = if t_end > t0 { 1.0 } else { -1.0 };
    let mut t = t0;
    let mut y = *y0;
    let mut k1 = f(t, &y);
    if !k1.finite() {
        return Err(OdeError::NonFinite { t });
    }
    let mut h = if ctl.h0 > 0.0 { ctl.h0 } else { span / 100.0 };
    h = h.min(ctl.hmax).min(span);
    let mut facold: f64 = 1e-4;
    let mut last_rejected = false;
    let mut steps = 0usize;
    loop {
        if steps >= ctl.max_steps {
            return Err(OdeError::MaxSteps { t });
        }
        steps += 1;
        let remaining = (t_end - t) * dir;
        let last = h >= remaining;
        if last {
            h = remaining;
        }
        let hs = h * dir;

        let mut s2 = y;
        s2.scale_add(hs * A21, &k1);
        let k2 = f(t + C2 * hs, &s2);
        let mut s3 = y;
        s3.scale_add(hs * A31, &k1);
        s3.scale_add(hs * A32, &k2);
        let k3 = f(t + C3 * hs, &s3);
        let mut s4 = y;
        s4.scale_add(hs * A41, &k1);
        s4.scale_add(hs * A42, &k2);
        s4.scale_add(hs * A43, &k3);
        let k4 = f(t + C4 * hs, &s4);
        let mut s5 = y;
        s5.scale_add(hs * A51, &k1);
        s5.scale_add(hs * A52, &k2);
        s5.scale_add(hs * A53, &k3);
        s5.scale_add(hs * A54, &k4);
        let k5 = f(t + C5 * hs, &s5);
        let mut s6 = y;
        s6.scale_add(hs * A61, &k1);
        s6.scale_add(hs * A62, &k2);
        s6.scale_add(hs * A63, &k3);
        s6.scale_add(hs * A64, &k4);
        s6.scale_add(hs * A65, &k5);
        let k6 = f(t + hs, &s6);
        let mut ynew = y;
        ynew.scale_add(hs * B1, &k1);
        ynew.scale_add(hs * B3, &k3);
        ynew.scale_add(hs * B4, &k4);
        ynew.scale_add(hs * B5, &k5);
        ynew.scale_add(hs * B6, &k6);
        let tnew = if last { t_end } else { t + hs };
        let k7 = f(tnew, &ynew);

        let finite = ynew.finite() && k7.finite();
        let err = if finite {
            let mut ev = S::zeroed();
            ev.scale_add(hs * E1, &k1);
            ev.scale_add(hs * E3, &k3);
            ev.scale_add(hs * E4, &k4);
            ev.scale_add(hs * E5, &k5);
            ev.scale_add(hs * E6, &k6);
            ev.scale_add(hs * E7, &k7);
            y.err_norm(&ynew, &ev, ctl.atol, ctl.rtol)
        } else {
            f64::INFINITY
        };

        if err <= 1.0 {
            t = tnew;
            y = ynew;
            k1 = k7;
            if !on_step(t, &y, &k1) {
                return Ok((t, y));
            }
            if last {
                return Ok((t, y));
            }
            // PI controller: previous accepted error damps the growth factor
            let mut fac = SAFETY
                * err.max(1e-16).powf(-(0.2 - 0.75 * PI_BETA))
                * facold.powf(PI_BETA);
            facold = err.max(1e-4);
            fac = fac.clamp(0.2, 5.0);
            if last_rejected {
                fac = fac.min(1.0);
            }
            h = (h * fac).min(ctl.hmax);
            last_rejected = false;
        } else {
            last_rejected = true;
            let fac = if err.is_finite() {
                (SAFETY * err.powf(-0.2)).max(0.1)
            } else {
                0.25
            };
            h *= fac;
            if ctl.hmin > 0.0 && h < ctl.hmin && remaining > 10.0 * ctl.hmin {
                return Err(OdeError::StepCollapse { t, h });
            }
            if h < 1e-14 * span.max(t.abs()) {
                return Err(OdeError::StepCollapse { t, h });
            }
        }
    }
}

/// Cubic Hermite interpolation of a scalar sample with slopes.
pub fn hermite(t0: f64, y0: f64, d0: f64, t1: f64, y1: f64, d1: f64, t: f64) -> f64 {
    let dt = t1 - t0;
    if dt == 0.0 {
        return y0;
    }
    let s = (t - t0) / dt;
    let s2 = s * s;
    let s3 = s2 * s;
    let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
    let h10 = s3 - 2.0 * s2 + s;
    let h01 = -2.0 * s3 + 3.0 * s2;
    let h11 = s3 - s2;
    h00 * y0 + h10 * dt * d0 + h01 * y1 + h11 * dt * d1
}

// ---------------------------------------------------------------------------
// implicit trapezoidal rule for linear complex 6x6 systems
// ---------------------------------------------------------------------------

pub(crate) fn matvec6(a: &[[Complex64; 6]; 6], x: &[Complex64; 6]) -> [Complex64; 6] {
    let mut out = [Complex64::zero(); 6];
    for i in 0..6 {
        let mut acc = Complex64::zero();
        for j in 0..6 {
            acc += a[i][j] * x[j];
        }
        out[i] = acc;
    }
    out
}

/// One trapezoidal step for y' = A(t) y: solve (I - h/2 A1) y1 = (I + h/2 A0) y0.
fn trapezoid_step(
    a0: &[[Complex64; 6]; 6],
    a1: &[[Complex64; 6]; 6],
    y: &[Complex64; 6],
    hs: f64,
) -> [Complex64; 6] {
    let half = 0.5 * hs;
    let mut rhs = *y;
    let ay = matvec6(a0, y);
    rhs.scale_add(half, &ay);
    let mut m = [Complex64::zero(); 36];
    for i in 0..6 {
        for j in 0..6 {
            m[i * 6 + j] = -half * a1[i][j];
        }
        m[i * 6 + i] += 1.0;
    }
    let mut piv = [0usize; 6];
    linalg::lu_factor(&mut m, 6, &mut piv);
    let mut sol = rhs;
    linalg::lu_solve(&m, 6, &piv, &mut sol, 0.0);
    sol
}

/// A-stable integrator for linear systems y' = A(t) y, with step-doubling
/// error control. Much slower per step than [`rk45`] but immune to the
/// explicit stability limit.
pub fn trapezoid_linear6<F>(
    a: &mut F,
    t0: f64,
    y0: &[Complex64; 6],
    t_end: f64,
    ctl: &StepControl,
) -> Result<(f64, [Complex64; 6]), OdeError>
where
    F: FnMut(f64) -> [[Complex64; 6]; 6],
{
    let span = (t_end - t0).abs();
    if span == 0.0 {
        return Ok((t0, *y0));
    }
    let dir = if t_end > t0 { 1.0 } else { -1.0 };
    let mut t = t0;
    let mut y = *y0;
    let mut h = if ctl.h0 > 0.0 { ctl.h0 } else { span / 100.0 };
    h = h.min(ctl.hmax).min(span);
    let mut steps = 0usize;
    loop {
        if steps >= ctl.max_steps {
            return Err(OdeError::MaxSteps { t });
        }
        steps += 1;
        let remaining = (t_end - t) * dir;
        let last = h >= remaining;
        if last {
            h = remaining;
        }
        let hs = h * dir;
        let a0 = a(t);
        let amid = a(t + 0.5 * hs);
        let a1 = a(t + hs);
        let yfull = trapezoid_step(&a0, &a1, &y, hs);
        let yh = trapezoid_step(&a0, &amid, &y, 0.5 * hs);
        let yhalf = trapezoid_step(&amid, &a1, &yh, 0.5 * hs);
        let finite = yfull.finite() && yhalf.finite();
        let err = if finite {
            let mut ev = [Complex64::zero(); 6];
            for i in 0..6 {
                ev[i] = (yhalf[i] - yfull[i]) / 3.0;
            }
            y.err_norm(&yhalf, &ev, ctl.atol, ctl.rtol)
        } else {
            f64::INFINITY
        };
        if err <= 1.0 {
            t = if last { t_end } else { t + hs };
            y = yhalf;
            if last {
                return Ok((t, y));
            }
            let fac = (SAFETY * err.max(1e-16).powf(-1.0 / 3.0)).clamp(0.2, 5.0);
            h = (h * fac).min(ctl.hmax);
        } else {
            let fac = if err.is_finite() {
                (SAFETY * err.powf(-1.0 / 3.0)).max(0.1)
            } else {
                0.25
            };
            h *= fac;
            if h < 1e-14 * span {
                return Err(OdeError::StepCollapse { t, h });
            }
        }
    }
}
