//! Shooting the heteroclinic shock profile.
//!
//! The profile solves the planar system
//!
//! ```text
//! P' = Q
//! Q' = (2/k^2) f(P) - (2 mu s / k^2) Q + Q^2 / P
//! ```
//!
//! connecting the saddle (the larger end state, where `f' > 0`) to the
//! node or spiral at the inner state. The orbit is computed by shooting
//! from the saddle along the eigendirection that travels into the
//! connection, re-centering the independent variable so that the first
//! crossing of the midpoint density sits at y = 0, and resampling onto a
//! uniform grid over [-L1, L1] by cubic Hermite interpolation (slopes are
//! free: P' = Q and Q' is the right-hand side). On the saddle side of the
//! window the tail is clamped to the exact end state, which is below the
//! shooting offset in size there; on the inner side the terminal distance
//! to the end state is reported and must clear a convergence tolerance.

use alloc::vec::Vec;
use num_complex::Complex64;
// Float supplies f64 math when building without std
#[allow(unused_imports)]
use num_traits::Float;

use crate::model::ShockParams;
use crate::ode::{self, OdeError, StepControl};

#[derive(Debug, Clone, Copy)]
pub struct ShootOptions {
    /// Initial displacement from the saddle along the departure direction.
    pub offset: f64,
    /// Half-width L1 of the resampled window.
    pub half_width: f64,
    /// Uniform grid size over [-L1, L1].
    pub n_grid: usize,
    pub atol: f64,
    pub rtol: f64,
    /// Largest admissible distance to the inner state at the far end.
    pub residual_tol: f64,
}

impl Default for ShootOptions {
    fn default() -> Self {
        ShootOptions {
            offset: 1e-5,
            half_width: 40.0,
            n_grid: 4001,
            atol: 1e-10,
            rtol: 1e-8,
            residual_tol: 1e-3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ProfileError {
    /// The departure state is not a saddle (`f'(P_outer) <= 0`).
    NoSaddle,
    Integration(OdeError),
    /// The orbit never crossed the midpoint density.
    NoCrossing,
    /// The orbit did not settle at the inner state within the window.
    NoConvergence { residual: f64 },
}

impl core::fmt::Display for ProfileError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            ProfileError::NoSaddle => write!(f, "departure end state is not a saddle"),
            ProfileError::Integration(e) => write!(f, "profile integration failed: {e}"),
            ProfileError::NoCrossing => write!(f, "orbit never crossed the midpoint density"),
            ProfileError::NoConvergence { residual } => write!(
                f,
                "profile did not reach the inner state: residual {residual:.3e} at the window end"
            ),
        }
    }
}

/// Local linearization at a rest point of the planar system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RestPointKind {
    Saddle,
    Node,
    Spiral,
}

#[derive(Debug, Clone, Copy)]
pub struct RestPoint {
    pub p: f64,
    pub flux_deriv: f64,
    /// Eigenvalues of the Jacobian [[0, 1], [a f'(P), -b]], a = 2/k^2,
    /// b = 2 s mu / k^2, sorted by descending real part.
    pub rates: [Complex64; 2],
    pub kind: RestPointKind,
}

pub fn rest_point(params: &ShockParams, p: f64) -> RestPoint {
    let a = 2.0 / (params.k * params.k);
    let b = 2.0 * params.s * params.mu / (params.k * params.k);
    let fp = params.flux_deriv(p);
    let disc = b * b + 4.0 * a * fp;
    let (rates, kind) = if disc >= 0.0 {
        let sq = disc.sqrt();
        let hi = 0.5 * (-b + sq);
        let lo = 0.5 * (-b - sq);
        let kind = if fp > 0.0 {
            RestPointKind::Saddle
        } else {
            RestPointKind::Node
        };
        (
            [Complex64::new(hi, 0.0), Complex64::new(lo, 0.0)],
            kind,
        )
    } else {
        let im = 0.5 * (-disc).sqrt();
        (
            [
                Complex64::new(-0.5 * b, im),
                Complex64::new(-0.5 * b, -im),
            ],
            RestPointKind::Spiral,
        )
    };
    RestPoint {
        p,
        flux_deriv: fp,
        rates,
        kind,
    }
}

/// Rest points at both end states: (saddle side, inner side).
pub fn analyze_rest_points(params: &ShockParams) -> (RestPoint, RestPoint) {
    let inner = params.inner_state();
    let saddle = if inner == params.p_plus {
        params.p_minus
    } else {
        params.p_plus
    };
    (rest_point(params, saddle), rest_point(params, inner))
}

pub fn rhs(params: &ShockParams, y: &[f64; 2]) -> [f64; 2] {
    let [p, q] = *y;
    let k2 = params.k * params.k;
    [
        q,
        2.0 * params.flux(p) / k2 - 2.0 * params.mu * params.s / k2 * q + q * q / p,
    ]
}

/// The computed profile on a uniform grid over [-L1, L1], with the first
/// midpoint crossing at y = 0.
#[derive(Debug, Clone)]
pub struct ProfileSolution {
    pub params: ShockParams,
    pub half_width: f64,
    pub y: Vec<f64>,
    pub p: Vec<f64>,
    pub q: Vec<f64>,
    /// Momentum J = s P - A on the grid.
    pub j: Vec<f64>,
    /// Distance |(P, Q) - (P_inner, 0)| at the inner end of the window.
    pub convergence_residual: f64,
    pub monotone: bool,
    pub q_sign_changes: usize,
    /// Raw integration coordinate of the midpoint crossing (diagnostic).
    pub crossing_shift: f64,
}

impl ProfileSolution {
    /// Sample (P, Q, J) at arbitrary y by cubic Hermite interpolation on
    /// the stored grid; outside the window the profile is the end state.
    pub fn sample(&self, yq: f64) -> (f64, f64, f64) {
        let n = self.y.len();
        let (y0, y1) = (self.y[0], self.y[n - 1]);
        if yq <= y0 {
            let p = self.p[0];
            return (p, self.q[0], self.params.j(p));
        }
        if yq >= y1 {
            let p = self.p[n - 1];
            return (p, self.q[n - 1], self.params.j(p));
        }
        let dy = (y1 - y0) / (n - 1) as f64;
        let idx = (((yq - y0) / dy) as usize).min(n - 2);
        let (ta, tb) = (self.y[idx], self.y[idx + 1]);
        let da = rhs(&self.params, &[self.p[idx], self.q[idx]]);
        let db = rhs(&self.params, &[self.p[idx + 1], self.q[idx + 1]]);
        let p = ode::hermite(ta, self.p[idx], da[0], tb, self.p[idx + 1], db[0], yq);
        let q = ode::hermite(ta, self.q[idx], da[1], tb, self.q[idx + 1], db[1], yq);
        (p, q, self.params.j(p))
    }
}

/// Shoot the connection and resample it onto the uniform window.
pub fn shoot(params: &ShockParams, opt: &ShootOptions) -> Result<ProfileSolution, ProfileError> {
    let inner = params.inner_state();
    let saddle = if inner == params.p_plus {
        params.p_minus
    } else {
        params.p_plus
    };
    let sp = rest_point(params, saddle);
    if sp.kind != RestPointKind::Saddle {
        return Err(ProfileError::NoSaddle);
    }
    // travel direction: forward in y from the saddle when it sits at
    // y = -inf (s > 0), backward when it sits at y = +inf (s < 0)
    let dir = params.s.signum();
    let rate = if dir > 0.0 {
        sp.rates[0].re
    } else {
        sp.rates[1].re
    };
    // departure tangent [1, rate], displaced toward the inner state
    let vn = (1.0 + rate * rate).sqrt();
    let y0 = [saddle - opt.offset / vn, -opt.offset * rate / vn];

    let l1 = opt.half_width;
    let ctl = StepControl {
        atol: opt.atol,
        rtol: opt.rtol,
        h0: 0.0,
        hmax: 1.0,
        hmin: 0.0,
        max_steps: 5_000_000,
    };
    let mid = 0.5 * (params.p_minus + params.p_plus);
    let mut rec_t: Vec<f64> = Vec::with_capacity(4096);
    let mut rec_y: Vec<[f64; 2]> = Vec::with_capacity(4096);
    let mut rec_f: Vec<[f64; 2]> = Vec::with_capacity(4096);
    let mut f = |_t: f64, y: &[f64; 2]| rhs(params, y);
    let f0 = f(0.0, &y0);
    rec_t.push(0.0);
    rec_y.push(y0);
    rec_f.push(f0);
    let mut crossing: Option<f64> = None;
    let t_end = dir * 10.0 * l1.max(40.0);
    let run = ode::rk45(&mut f, 0.0, &y0, t_end, &ctl, &mut |t, y, fy| {
        if crossing.is_none() {
            let prev = rec_y.last().unwrap();
            let (ga, gb) = (prev[0] - mid, y[0] - mid);
            if ga == 0.0 {
                crossing = Some(*rec_t.last().unwrap());
            } else if ga * gb <= 0.0 {
                let (ta, tb) = (*rec_t.last().unwrap(), t);
                let fa = rec_f.last().unwrap();
                let pa = prev[0];
                let g = |tt: f64| ode::hermite(ta, pa, fa[0], tb, y[0], fy[0], tt) - mid;
                let (mut lo, mut hi) = (ta, tb);
                let glo = g(lo);
                for _ in 0..80 {
                    let m = 0.5 * (lo + hi);
                    if m == lo || m == hi {
                        break;
                    }
                    if (g(m) > 0.0) == (glo > 0.0) {
                        lo = m;
                    } else {
                        hi = m;
                    }
                }
                crossing = Some(0.5 * (lo + hi));
            }
        }
        rec_t.push(t);
        rec_y.push(*y);
        rec_f.push(*fy);
        match crossing {
            Some(c) => (t - c) * dir < l1,
            None => true,
        }
    });
    match run {
        Ok(_) => {}
        Err(e) => return Err(ProfileError::Integration(e)),
    }
    let cross = crossing.ok_or(ProfileError::NoCrossing)?;

    if dir < 0.0 {
        rec_t.reverse();
        rec_y.reverse();
        rec_f.reverse();
    }
    for t in rec_t.iter_mut() {
        *t -= cross;
    }
    // the stop condition guarantees coverage of the inner side unless the
    // span cap cut the run short
    let inner_edge = if dir > 0.0 {
        *rec_t.last().unwrap()
    } else {
        rec_t[0]
    };
    if inner_edge.abs() < l1 {
        let edge = if dir > 0.0 {
            rec_y.last().unwrap()
        } else {
            &rec_y[0]
        };
        let residual = ((edge[0] - inner).powi(2) + edge[1].powi(2)).sqrt();
        return Err(ProfileError::NoConvergence { residual });
    }

    let n = opt.n_grid.max(9);
    let mut yg = Vec::with_capacity(n);
    let mut pg = Vec::with_capacity(n);
    let mut qg = Vec::with_capacity(n);
    let dyg = 2.0 * l1 / (n - 1) as f64;
    for jdx in 0..n {
        let yq = -l1 + dyg * jdx as f64;
        yg.push(yq);
        let saddle_side = if dir > 0.0 {
            yq < rec_t[0]
        } else {
            yq > *rec_t.last().unwrap()
        };
        if saddle_side {
            pg.push(saddle);
            qg.push(0.0);
            continue;
        }
        let idx = rec_t.partition_point(|t| *t <= yq).clamp(1, rec_t.len() - 1);
        let (ta, tb) = (rec_t[idx - 1], rec_t[idx]);
        let (ya, yb) = (rec_y[idx - 1], rec_y[idx]);
        let (fa, fb) = (rec_f[idx - 1], rec_f[idx]);
        pg.push(ode::hermite(ta, ya[0], fa[0], tb, yb[0], fb[0], yq));
        qg.push(ode::hermite(ta, ya[1], fa[1], tb, yb[1], fb[1], yq));
    }
    let jg: Vec<f64> = pg.iter().map(|p| params.j(*p)).collect();

    let inner_idx = if dir > 0.0 { n - 1 } else { 0 };
    let residual = ((pg[inner_idx] - inner).powi(2) + qg[inner_idx].powi(2)).sqrt();
    if !(residual <= opt.residual_tol) {
        return Err(ProfileError::NoConvergence { residual });
    }

    let qmax = qg.iter().fold(0.0f64, |m, q| m.max(q.abs()));
    let thresh = 1e-12 * qmax;
    let mut sign_changes = 0usize;
    let mut last_sign = 0i8;
    for q in &qg {
        let s = if *q > thresh {
            1i8
        } else if *q < -thresh {
            -1i8
        } else {
            0i8
        };
        if s != 0 {
            if last_sign != 0 && s != last_sign {
                sign_changes += 1;
            }
            last_sign = s;
        }
    }

    Ok(ProfileSolution {
        params: *params,
        half_width: l1,
        y: yg,
        p: pg,
        q: qg,
        j: jg,
        convergence_residual: residual,
        monotone: sign_changes == 0,
        q_sign_changes: sign_changes,
        crossing_shift: cross,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn monotone_shock() -> ShockParams {
        ShockParams::from_end_states(1.0, 8.0, 1.0, 1.0, 8.61, 5.69).unwrap()
    }

    fn oscillatory_shock() -> ShockParams {
        ShockParams::from_end_states(1.5, 0.25, 2f64.sqrt(), 1.0, 4.63, 3.5).unwrap()
    }

    fn small_shock() -> ShockParams {
        ShockParams::from_integration_constants(1.5, 1.0, 2f64.sqrt(), 1.0, 1.0, 1.1).unwrap()
    }

    #[test]
    fn rest_point_rates_monotone_shock() {
        let (sad, inn) = analyze_rest_points(&monotone_shock());
        assert_eq!(sad.kind, RestPointKind::Saddle);
        // slow departure rate ~0.04228, fast ~-16.04
        assert!((sad.rates[0].re - 0.0422808375).abs() < 1e-9, "{:?}", sad.rates);
        assert!((sad.rates[1].re + 16.0422808375).abs() < 1e-9);
        assert_eq!(inn.kind, RestPointKind::Node);
        // the slow arrival rate forces the wide window for this shock
        assert!((inn.rates[0].re + 0.0644068929).abs() < 1e-9, "{:?}", inn.rates);
    }

    #[test]
    fn rest_point_rates_oscillatory_shock() {
        let (sad, inn) = analyze_rest_points(&oscillatory_shock());
        assert_eq!(sad.kind, RestPointKind::Saddle);
        assert!((sad.rates[0].re - 0.8542429835).abs() < 1e-9);
        assert_eq!(inn.kind, RestPointKind::Spiral);
        assert!((inn.rates[0].re + 0.125).abs() < 1e-12);
        assert!((inn.rates[0].im - 1.0842444471).abs() < 1e-9, "{:?}", inn.rates);
    }

    #[test]
    fn rest_point_rates_small_shock() {
        let (sad, inn) = analyze_rest_points(&small_shock());
        assert_eq!(sad.kind, RestPointKind::Saddle);
        assert!((sad.rates[0].re - 0.5467842308).abs() < 1e-9, "{:?}", sad.rates);
        assert!((sad.rates[1].re + 1.5467842308).abs() < 1e-9);
        assert_eq!(inn.kind, RestPointKind::Spiral);
        assert!((inn.rates[0].re + 0.5).abs() < 1e-12);
        assert!((inn.rates[0].im - 1.0785024118).abs() < 1e-9, "{:?}", inn.rates);
    }

    #[test]
    fn monotone_profile_needs_wide_window() {
        // at the default half-width the slow tail has not settled
        let r = shoot(&monotone_shock(), &ShootOptions::default());
        match r {
            Err(ProfileError::NoConvergence { residual }) => {
                assert!(residual > 1e-2, "residual {residual}");
            }
            other => panic!("expected NoConvergence, got {other:?}"),
        }
    }

    #[test]
    fn monotone_profile_on_wide_window() {
        let opt = ShootOptions {
            half_width: 300.0,
            n_grid: 8001,
            ..ShootOptions::default()
        };
        let sol = shoot(&monotone_shock(), &opt).unwrap();
        assert!(sol.monotone, "{} sign changes", sol.q_sign_changes);
        assert!(sol.convergence_residual < 1e-3);
        assert!((sol.p[0] - 8.61).abs() < 1e-6);
        assert!((sol.p[8000] - 5.69).abs() < 1e-3);
        // midpoint pinned at y = 0
        assert!((sol.p[4000] - 0.5 * (8.61 + 5.69)).abs() < 1e-6);
        // P decreasing throughout
        for w in sol.p.windows(2) {
            assert!(w[1] <= w[0] + 1e-12);
        }
        // J = s P - A everywhere
        for (p, j) in sol.p.iter().zip(sol.j.iter()) {
            assert!((j - (p - sol.params.a)).abs() < 1e-14);
        }
    }

    #[test]
    fn oscillatory_profile_spirals() {
        let opt = ShootOptions {
            half_width: 60.0,
            ..ShootOptions::default()
        };
        let sol = shoot(&oscillatory_shock(), &opt).unwrap();
        assert!(!sol.monotone);
        assert!(sol.q_sign_changes >= 2, "{}", sol.q_sign_changes);
        assert!(sol.convergence_residual < 1e-3);
        // the spiral overshoots below the inner state
        let pmin = sol.p.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!(pmin < 3.5);
    }

    #[test]
    fn small_shock_profile() {
        let sol = shoot(&small_shock(), &ShootOptions::default()).unwrap();
        assert!(!sol.monotone);
        assert!(sol.convergence_residual < 1e-6);
        assert!((sol.p[0] - 1.1466990450367001).abs() < 1e-7);
    }

    #[test]
    fn mirrored_shock_gives_mirrored_profile() {
        // s -> -s with swapped end states is the reflection y -> -y
        let fwd = shoot(
            &oscillatory_shock(),
            &ShootOptions {
                half_width: 60.0,
                n_grid: 1201,
                ..ShootOptions::default()
            },
        )
        .unwrap();
        let mirror_params =
            ShockParams::from_end_states(1.5, 0.25, 2f64.sqrt(), -1.0, 3.5, 4.63).unwrap();
        let bwd = shoot(
            &mirror_params,
            &ShootOptions {
                half_width: 60.0,
                n_grid: 1201,
                ..ShootOptions::default()
            },
        )
        .unwrap();
        for &yq in &[-30.0, -5.0, 0.0, 5.0, 30.0] {
            let (pf, qf, _) = fwd.sample(yq);
            let (pb, qb, _) = bwd.sample(-yq);
            assert!((pf - pb).abs() < 1e-5, "P mismatch at {yq}: {pf} vs {pb}");
            assert!((qf + qb).abs() < 1e-5, "Q mismatch at {yq}");
        }
        assert_eq!(fwd.q_sign_changes, bwd.q_sign_changes);
    }

    #[test]
    fn sample_matches_grid_and_interpolates() {
        let sol = shoot(&small_shock(), &ShootOptions::default()).unwrap();
        let (p, q, j) = sol.sample(sol.y[100]);
        assert!((p - sol.p[100]).abs() < 1e-14);
        assert!((q - sol.q[100]).abs() < 1e-14);
        assert!((j - sol.j[100]).abs() < 1e-14);
        // off-grid: between the nodes, close to both
        let ymid = 0.5 * (sol.y[100] + sol.y[101]);
        let (pm, _, _) = sol.sample(ymid);
        assert!(pm.min(sol.p[100]).min(sol.p[101]) <= pm);
        assert!((pm - sol.p[100]).abs() < (sol.p[100] - sol.p[101]).abs() + 1e-9);
        // far outside: exact end states
        assert_eq!(sol.sample(-1e6).0, sol.p[0]);
        assert_eq!(sol.sample(1e6).0, *sol.p.last().unwrap());
    }
}
