//! Contours in the spectral plane and winding-number bookkeeping.
//!
//! Zero counting happens on closed curves that stay strictly right of the
//! essential spectrum: a D-shaped contour (circular arc closed by a
//! vertical segment just right of the imaginary axis), a half-annulus for
//! scale-split runs, and a small open arc hugging the origin to confirm
//! the absence of a root there. Vertical segments are graded
//! geometrically toward the real axis because the Evans function twists
//! fastest where the contour approaches the essential spectrum; arcs are
//! uniform in angle and share whatever node budget the verticals leave.
//!
//! Curves are conjugation symmetric, so frames are continued only over
//! the upper half (chains seeded at a real node where the Evans function
//! is real) and mirrored. The winding number works on unit-frame values;
//! the accumulated real scales cancel in phase increments.

// Float supplies f64 math when building without std
#[allow(unused_imports)]
use num_traits::Float;
use alloc::vec::Vec;
use num_complex::Complex64;

use crate::evans::{self, EvansError, EvansOptions};
use crate::linearize::Linearization;

/// Default offset of vertical segments from the imaginary axis.
pub const DEFAULT_DELTA: f64 = 1e-6;
/// Default grading ratio for vertical segments.
pub const DEFAULT_RATIO: f64 = 1.01;
/// Small arcs are clipped to Re >= this fraction of their radius.
pub const SMALL_ARC_CLIP: f64 = 0.02;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ContourKind {
    /// Arc of |lambda| = radius closed by a vertical at Re = delta.
    Semicircle { radius: f64, delta: f64 },
    /// Right-half annulus between two radii, verticals at Re = delta.
    SemiAnnulus { inner: f64, outer: f64, delta: f64 },
    /// Open arc of |lambda| = radius, clipped near the imaginary axis.
    /// No interior, no winding; used to bound |E| near the origin.
    SmallArc { radius: f64 },
}

/// Geometric ladder between two positive values, endpoints exact,
/// adjacent quotient at most `ratio`.
fn geometric_ladder(from: f64, to: f64, ratio: f64) -> Vec<f64> {
    debug_assert!(from > 0.0 && to > 0.0 && ratio > 1.0);
    let span = if from > to { from / to } else { to / from };
    let m = (span.ln() / ratio.ln()).ceil().max(1.0) as usize;
    let step = span.powf(1.0 / m as f64);
    let mut out = Vec::with_capacity(m + 1);
    let descending = from > to;
    let mut v = from;
    for _ in 0..m {
        out.push(v);
        if descending {
            v /= step;
        } else {
            v *= step;
        }
    }
    out.push(to);
    out
}

fn arc_nodes(radius: f64, th_from: f64, th_to: f64, n: usize, out: &mut Vec<Complex64>) {
    // open at the start: the caller owns the junction node
    let n = n.max(2);
    for i in 1..=n {
        let th = th_from + (th_to - th_from) * i as f64 / n as f64;
        out.push(Complex64::new(radius * th.cos(), radius * th.sin()));
    }
}

/// Upper-half chain of the D-contour, in continuation order: seeded at
/// lambda = radius on the real axis, over the arc to the vertical, down
/// the vertical to lambda = delta. The chain ends *on* the real axis;
/// the contour is evaluated down to delta, not to the origin.
pub fn semicircle_chain(radius: f64, delta: f64, budget: usize, ratio: f64) -> Vec<Complex64> {
    let th_max = (delta / radius).acos();
    let im_top = radius * th_max.sin();
    let vertical = geometric_ladder(im_top, delta, ratio);
    let n_arc = budget.saturating_sub(vertical.len() + 1).max(2);
    let mut chain = Vec::with_capacity(n_arc + vertical.len() + 2);
    chain.push(Complex64::new(radius, 0.0));
    arc_nodes(radius, 0.0, th_max, n_arc, &mut chain);
    for &im in &vertical[1..] {
        chain.push(Complex64::new(delta, im));
    }
    chain.push(Complex64::new(delta, 0.0));
    chain
}

/// Upper-half chain of the half-annulus, seeded at the inner radius on
/// the real axis: inner arc up, vertical out, outer arc back down to the
/// real axis.
pub fn semi_annulus_chain(
    inner: f64,
    outer: f64,
    delta: f64,
    budget: usize,
    ratio: f64,
) -> Vec<Complex64> {
    let th_in = (delta / inner).acos();
    let th_out = (delta / outer).acos();
    let im_in = inner * th_in.sin();
    let im_out = outer * th_out.sin();
    let vertical = geometric_ladder(im_in, im_out, ratio);
    let arcs_budget = budget.saturating_sub(vertical.len() + 1).max(4);
    // arc budgets proportional to arc length
    let len_in = inner * th_in;
    let len_out = outer * th_out;
    let n_in = ((arcs_budget as f64) * len_in / (len_in + len_out)).round() as usize;
    let n_in = n_in.clamp(2, arcs_budget - 2);
    let n_out = arcs_budget - n_in;
    let mut chain = Vec::with_capacity(budget + 4);
    chain.push(Complex64::new(inner, 0.0));
    arc_nodes(inner, 0.0, th_in, n_in, &mut chain);
    for &im in &vertical[1..] {
        chain.push(Complex64::new(delta, im));
    }
    arc_nodes(outer, th_out, 0.0, n_out, &mut chain);
    // snap the final node exactly onto the real axis
    let last = chain.last_mut().unwrap();
    *last = Complex64::new(outer, 0.0);
    chain
}

/// Upper half of the small open arc, seeded on the real axis, clipped so
/// every node keeps Re >= SMALL_ARC_CLIP * radius.
pub fn small_arc_chain(radius: f64, budget: usize) -> Vec<Complex64> {
    let th_max = SMALL_ARC_CLIP.acos();
    let mut chain = Vec::with_capacity(budget + 1);
    chain.push(Complex64::new(radius, 0.0));
    arc_nodes(radius, 0.0, th_max, budget.max(2), &mut chain);
    chain
}

/// Evans trace along one continuation chain: unit-frame values plus the
/// logarithm of the accumulated real scale, so long chains cannot
/// overflow. Recorded values are `e_unit * exp(log_scale)`.
pub struct ChainTrace {
    pub nodes: Vec<Complex64>,
    pub e_unit: Vec<Complex64>,
    pub log_scale: Vec<f64>,
    pub stiff_fallbacks: usize,
}

impl ChainTrace {
    pub fn recorded(&self, i: usize) -> Complex64 {
        self.e_unit[i] * self.log_scale[i].exp()
    }
}

/// Continue frames along the chain and evaluate the Evans function at
/// every node. Sequential reference implementation; the frame
/// continuation and per-node evaluation are exposed separately for
/// callers that parallelize the evaluations.
pub fn trace_chain(
    lin: &Linearization,
    nodes: &[Complex64],
    opts: &EvansOptions,
) -> Result<ChainTrace, EvansError> {
    let frames = evans::continue_frames(lin, nodes)?;
    let mut e_unit = Vec::with_capacity(nodes.len());
    let mut log_scale = Vec::with_capacity(nodes.len());
    let mut fallbacks = 0usize;
    for i in 0..nodes.len() {
        let s = evans::evans_from_frames(lin, nodes[i], &frames.minus[i], &frames.plus[i], opts)?;
        e_unit.push(s.e);
        log_scale.push(frames.scale_minus[i].ln() + frames.scale_plus[i].ln());
        fallbacks += s.stiff_fallbacks as usize;
    }
    Ok(ChainTrace {
        nodes: nodes.to_vec(),
        e_unit,
        log_scale,
        stiff_fallbacks: fallbacks,
    })
}

/// Closed counterclockwise loop assembled from an upper chain and its
/// conjugate mirror. Stored open (first node not repeated).
pub struct ClosedTrace {
    pub nodes: Vec<Complex64>,
    /// unit-frame values, scale-free phases for winding
    pub e_unit: Vec<Complex64>,
    pub log_scale: Vec<f64>,
}

impl ClosedTrace {
    pub fn recorded(&self, i: usize) -> Complex64 {
        self.e_unit[i] * self.log_scale[i].exp()
    }
}

/// Stitch a traced upper chain into the closed ccw loop. The chain must
/// start and end on the real axis (both closed contour kinds do). Which
/// half-loop the chain covers depends on where it was seeded; ccw
/// orientation is restored from the node geometry by the shoelace sign.
pub fn close_loop(trace: &ChainTrace) -> ClosedTrace {
    let n = trace.nodes.len();
    let mut nodes = Vec::with_capacity(2 * n - 2);
    let mut e_unit = Vec::with_capacity(2 * n - 2);
    let mut log_scale = Vec::with_capacity(2 * n - 2);
    // forward chain, then the mirror of the interior in reverse
    for i in 0..n {
        nodes.push(trace.nodes[i]);
        e_unit.push(trace.e_unit[i]);
        log_scale.push(trace.log_scale[i]);
    }
    for i in (1..n - 1).rev() {
        nodes.push(trace.nodes[i].conj());
        e_unit.push(trace.e_unit[i].conj());
        log_scale.push(trace.log_scale[i]);
    }
    // shoelace area: negative means the stitched order runs clockwise
    let mut area = 0.0;
    for i in 0..nodes.len() {
        let a = nodes[i];
        let b = nodes[(i + 1) % nodes.len()];
        area += a.re * b.im - b.re * a.im;
    }
    if area < 0.0 {
        nodes.reverse();
        e_unit.reverse();
        log_scale.reverse();
    }
    ClosedTrace {
        nodes,
        e_unit,
        log_scale,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WindingError {
    /// Phase moved more than a quarter turn between adjacent nodes; the
    /// sampling cannot certify the unwrap.
    PhaseJump { index: usize, jump: f64 },
    /// A value too close to zero relative to the loop maximum.
    NearZero { index: usize },
    /// Accumulated phase does not close onto an integer multiple of 2 pi.
    NotInteger { turns: f64 },
}

impl core::fmt::Display for WindingError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            WindingError::PhaseJump { index, jump } => {
                write!(f, "phase jump {jump:.3} rad at node {index}")
            }
            WindingError::NearZero { index } => {
                write!(f, "value at node {index} vanishes relative to the loop")
            }
            WindingError::NotInteger { turns } => {
                write!(f, "winding {turns:.4} is not close to an integer")
            }
        }
    }
}

/// Winding number of a closed loop of nonzero values (open storage, the
/// increment from last back to first is included).
pub fn winding_number(values: &[Complex64]) -> Result<i64, WindingError> {
    let n = values.len();
    let mut vmax = 0.0f64;
    for v in values {
        vmax = vmax.max(v.norm());
    }
    for (i, v) in values.iter().enumerate() {
        if v.norm() < 1e-12 * vmax {
            return Err(WindingError::NearZero { index: i });
        }
    }
    let mut total = 0.0f64;
    for i in 0..n {
        let a = values[i];
        let b = values[(i + 1) % n];
        let inc = (b / a).arg();
        if inc.abs() > core::f64::consts::FRAC_PI_2 {
            return Err(WindingError::PhaseJump {
                index: i,
                jump: inc,
            });
        }
        total += inc;
    }
    let turns = total / (2.0 * core::f64::consts::PI);
    if (turns - turns.round()).abs() > 0.1 {
        return Err(WindingError::NotInteger { turns });
    }
    Ok(turns.round() as i64)
}

/// Trapezoid Cauchy-integral reconstruction of E(a) from loop samples,
/// compared against a directly computed value.
#[derive(Debug, Clone, Copy)]
pub struct CauchyReport {
    pub integral: Complex64,
    pub direct: Complex64,
    pub rel_err: f64,
    /// Set when `a` comes within one local node spacing of the contour:
    /// the quadrature cannot be trusted there.
    pub ill_conditioned: bool,
}

pub fn cauchy_check(
    nodes: &[Complex64],
    values: &[Complex64],
    a: Complex64,
    direct: Complex64,
) -> CauchyReport {
    let n = nodes.len();
    let mut sum = Complex64::new(0.0, 0.0);
    let mut ill = false;
    for i in 0..n {
        let (z0, z1) = (nodes[i], nodes[(i + 1) % n]);
        let (f0, f1) = (values[i] / (z0 - a), values[(i + 1) % n] / (z1 - a));
        sum += 0.5 * (f0 + f1) * (z1 - z0);
        let spacing = (z1 - z0).norm();
        if (z0 - a).norm() < spacing {
            ill = true;
        }
    }
    let integral = sum / Complex64::new(0.0, 2.0 * core::f64::consts::PI);
    let rel_err = (integral - direct).norm() / direct.norm().max(f64::MIN_POSITIVE);
    CauchyReport {
        integral,
        direct,
        rel_err,
        ill_conditioned: ill,
    }
}

/// Geometric node path along the real axis, for continuing frames from a
/// contour seed to an interior evaluation point.
pub fn real_axis_path(from: f64, to: f64, ratio: f64) -> Vec<Complex64> {
    geometric_ladder(from, to, ratio)
        .into_iter()
        .map(|x| Complex64::new(x, 0.0))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evans::EvansOptions;
    use crate::linearize::Linearization;
    use crate::model::ShockParams;
    use crate::profile::{shoot, ShootOptions};

    fn small_shock() -> Linearization {
        let sh = ShockParams::from_integration_constants(1.5, 1.0, 2f64.sqrt(), 1.0, 1.0, 1.1)
            .unwrap();
        let sol = shoot(&sh, &ShootOptions::default()).unwrap();
        Linearization::new(&sol)
    }

    #[test]
    fn ladder_hits_endpoints_with_bounded_ratio() {
        let l = geometric_ladder(30.0, 1e-6, 1.01);
        assert_eq!(l[0], 30.0);
        assert_eq!(*l.last().unwrap(), 1e-6);
        for w in l.windows(2) {
            let q = w[0] / w[1];
            assert!(q > 1.0 && q < 1.0101, "quotient {q}");
        }
        let up = geometric_ladder(0.5, 8.0, 1.05);
        assert_eq!(up[0], 0.5);
        assert_eq!(*up.last().unwrap(), 8.0);
        for w in up.windows(2) {
            assert!(w[1] > w[0]);
        }
    }

    #[test]
    fn semicircle_chain_geometry() {
        let (r, d) = (10.0, 1e-6);
        let chain = semicircle_chain(r, d, 400, 1.05);
        assert_eq!(chain[0], Complex64::new(r, 0.0));
        assert_eq!(*chain.last().unwrap(), Complex64::new(d, 0.0));
        for z in &chain {
            assert!(z.re >= d * 0.999 && z.norm() <= r * 1.0001);
            assert!(z.im >= 0.0);
        }
        // graded toward the axis: spacing near delta far smaller than near top
        let n = chain.len();
        let near_axis = (chain[n - 1] - chain[n - 2]).norm();
        let near_top = (chain[1] - chain[0]).norm();
        assert!(near_axis < near_top * 1e-3);
    }

    #[test]
    fn annulus_chain_geometry() {
        let chain = semi_annulus_chain(5.0, 1000.0, 1e-6, 800, 1.05);
        assert_eq!(chain[0], Complex64::new(5.0, 0.0));
        assert_eq!(*chain.last().unwrap(), Complex64::new(1000.0, 0.0));
        for z in &chain {
            assert!(z.im >= -1e-12);
            assert!(z.norm() >= 5.0 * 0.999 && z.norm() <= 1000.0 * 1.0001);
        }
    }

    #[test]
    fn closed_loop_is_ccw_and_conjugate_symmetric() {
        // loop over a fake trace with distinct values to check stitching
        let chain = semicircle_chain(10.0, 1e-6, 60, 1.25);
        let n = chain.len();
        let trace = ChainTrace {
            nodes: chain.clone(),
            e_unit: (0..n).map(|i| Complex64::new(1.0 + i as f64, 0.5)).collect(),
            log_scale: vec![0.0; n],
            stiff_fallbacks: 0,
        };
        let closed = close_loop(&trace);
        let m = closed.nodes.len();
        assert_eq!(m, 2 * n - 2);
        let mut area = 0.0;
        let mut phase = 0.0;
        for i in 0..m {
            let a = closed.nodes[i];
            let b = closed.nodes[(i + 1) % m];
            area += a.re * b.im - b.re * a.im;
            phase += (b / a).arg();
        }
        assert!(area > 0.0, "loop not ccw");
        // origin lies outside the D-region, so the nodes do not wind
        assert!(phase.abs() < 1e-9);
        // mirror nodes carry conjugate values
        for i in 0..m {
            let z = closed.nodes[i];
            if z.im > 0.0 {
                let j = closed
                    .nodes
                    .iter()
                    .position(|w| (*w - z.conj()).norm() < 1e-14)
                    .expect("mirror node missing");
                assert_eq!(closed.e_unit[j], closed.e_unit[i].conj());
            }
        }
    }

    #[test]
    fn winding_counts_synthetic_loops() {
        let n = 200;
        let turn = |k: i64| -> Vec<Complex64> {
            (0..n)
                .map(|j| {
                    Complex64::from_polar(
                        2.0,
                        2.0 * core::f64::consts::PI * k as f64 * j as f64 / n as f64,
                    )
                })
                .collect()
        };
        assert_eq!(winding_number(&turn(0)).unwrap(), 0);
        assert_eq!(winding_number(&turn(1)).unwrap(), 1);
        assert_eq!(winding_number(&turn(-3)).unwrap(), -3);
    }

    #[test]
    fn winding_guards_fire() {
        // quarter-turn-plus increments
        let coarse: Vec<Complex64> = (0..3)
            .map(|j| Complex64::from_polar(1.0, 2.1 * j as f64))
            .collect();
        assert!(matches!(
            winding_number(&coarse),
            Err(WindingError::PhaseJump { .. })
        ));
        let with_zero = vec![
            Complex64::new(1.0, 0.0),
            Complex64::new(1e-15, 0.0),
            Complex64::new(0.0, 1.0),
        ];
        assert!(matches!(
            winding_number(&with_zero),
            Err(WindingError::NearZero { .. })
        ));
        // NotInteger cannot fire on consistent cyclic data (unclipped
        // increments telescope to an exact multiple of 2 pi); it guards
        // against roundoff drift over very long loops, so no case here.
    }

    #[test]
    fn cauchy_reconstructs_analytic_values() {
        let n = 4000;
        let center = Complex64::new(2.0, 0.0);
        let nodes: Vec<Complex64> = (0..n)
            .map(|j| {
                let th = 2.0 * core::f64::consts::PI * j as f64 / n as f64;
                center + Complex64::from_polar(1.0, th)
            })
            .collect();
        let f = |z: Complex64| (z - Complex64::new(2.3, 0.0)) * (z + Complex64::new(1.0, 0.0));
        let values: Vec<Complex64> = nodes.iter().map(|&z| f(z)).collect();
        let a = Complex64::new(1.7, 0.2);
        let rep = cauchy_check(&nodes, &values, a, f(a));
        assert!(!rep.ill_conditioned);
        // chord trapezoid is second order in the node spacing
        assert!(rep.rel_err < 1e-5, "rel err {}", rep.rel_err);
        let finer: Vec<Complex64> = (0..4 * n)
            .map(|j| {
                let th = 2.0 * core::f64::consts::PI * j as f64 / (4 * n) as f64;
                center + Complex64::from_polar(1.0, th)
            })
            .collect();
        let fv: Vec<Complex64> = finer.iter().map(|&z| f(z)).collect();
        let rep4 = cauchy_check(&finer, &fv, a, f(a));
        assert!(rep4.rel_err < rep.rel_err / 8.0, "no h^2 decay: {}", rep4.rel_err);
        // a point on the contour trips the conditioning flag
        let bad = cauchy_check(&nodes, &values, nodes[7], f(nodes[7]));
        assert!(bad.ill_conditioned);
    }

    #[test]
    fn small_shock_semicircle_has_no_roots() {
        let lin = small_shock();
        let opts = EvansOptions::default();
        let chain = semicircle_chain(10.0, 1e-6, 420, 1.05);
        let trace = trace_chain(&lin, &chain, &opts).unwrap();
        let closed = close_loop(&trace);
        let w = winding_number(&closed.e_unit).unwrap();
        assert_eq!(w, 0);
        // the seed and the axis touchdown are real nodes: E real there
        let e0 = trace.e_unit[0];
        let elast = trace.e_unit[trace.e_unit.len() - 1];
        assert!(e0.im.abs() < 1e-6 * e0.norm());
        assert!(elast.im.abs() < 1e-6 * elast.norm());
    }

    #[test]
    fn small_arc_value_is_pinned_away_from_zero() {
        let lin = small_shock();
        let opts = EvansOptions::default();
        let chain = small_arc_chain(1e-6, 24);
        let trace = trace_chain(&lin, &chain, &opts).unwrap();
        let mags: Vec<f64> = (0..trace.nodes.len()).map(|i| trace.recorded(i).norm()).collect();
        let (lo, hi) = mags
            .iter()
            .fold((f64::INFINITY, 0.0f64), |(l, h), &m| (l.min(m), h.max(m)));
        assert!(lo > 0.0);
        assert!((hi - lo) / hi < 1e-2, "variation {} over [{lo}, {hi}]", (hi - lo) / hi);
    }
}
