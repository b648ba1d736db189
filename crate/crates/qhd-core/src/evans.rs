//! Evans function on the second exterior power.
//!
//! The eigenvalue system is 4-dimensional with a 2/2 hyperbolic splitting
//! at both ends, so instead of chasing individual solutions (which shear
//! onto the dominant direction) we transport the full 2-plane: the wedge
//! `V1 ^ V2` evolves under the 6x6 compound matrix, and the Evans function
//! is the determinant pairing of the plane decaying to the left with the
//! plane decaying to the right, evaluated at y = 0. Each side is shifted
//! by its asymptotic growth rate so the transported wedge stays O(1)
//! across the window.
//!
//! Frames are analytically continued in lambda by transporting along the
//! spectral projector of the compound matrix (one rank-1 projector per
//! side). The projector derivative is formed by centered differences along
//! the chord direction, stepped with classical RK4, and the frame is
//! re-projected and renormalized at every node; the peeled-off norms are
//! returned as real positive scale factors so winding numbers can be read
//! off the unit-frame values alone.

// Float supplies f64 math when building without std
#[allow(unused_imports)]
use num_traits::Float;
use alloc::vec::Vec;
use num_complex::Complex64;
use num_traits::Zero;

use crate::linalg::{self, LinalgError};
use crate::linearize::{Linearization, Mat4, Side};
use crate::ode::{self, OdeError, StepControl};

pub type Mat6 = [[Complex64; 6]; 6];

/// Eigenvalues of an end-state matrix closer than this to the imaginary
/// axis mean lambda is effectively on the essential spectrum: no
/// exponential dichotomy, no Evans function.
pub const HYPERBOLIC_MARGIN: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub enum EvansError {
    /// An end matrix lost its 2/2 hyperbolic splitting at this lambda.
    NearEssential { lambda: Complex64, re_closest: f64 },
    Linalg(LinalgError),
    Integration(OdeError),
    /// Left/right eigenvector pairing of the spectral projector degenerated.
    ProjectorIllConditioned { lambda: Complex64 },
}

impl From<LinalgError> for EvansError {
    fn from(e: LinalgError) -> Self {
        EvansError::Linalg(e)
    }
}

impl core::fmt::Display for EvansError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            EvansError::NearEssential { lambda, re_closest } => write!(
                f,
                "no exponential dichotomy at lambda = {lambda} (|Re nu| = {re_closest:.3e})"
            ),
            EvansError::Linalg(e) => write!(f, "eigen decomposition failed: {e}"),
            EvansError::Integration(e) => write!(f, "wedge transport failed: {e}"),
            EvansError::ProjectorIllConditioned { lambda } => {
                write!(f, "spectral projector ill conditioned at lambda = {lambda}")
            }
        }
    }
}

/// Second compound of a 4x4 matrix in the wedge basis
/// (e12, e13, e14, e23, e24, e34).
pub fn compound(m: &Mat4) -> Mat6 {
    let d = |i: usize, j: usize| m[i][i] + m[j][j];
    [
        [d(0, 1), m[1][2], m[1][3], -m[0][2], -m[0][3], Complex64::zero()],
        [m[2][1], d(0, 2), m[2][3], m[0][1], Complex64::zero(), -m[0][3]],
        [m[3][1], m[3][2], d(0, 3), Complex64::zero(), m[0][1], m[0][2]],
        [-m[2][0], m[1][0], Complex64::zero(), d(1, 2), m[2][3], -m[1][3]],
        [-m[3][0], Complex64::zero(), m[1][0], m[3][2], d(1, 3), m[1][2]],
        [Complex64::zero(), -m[3][0], m[2][0], -m[3][1], m[2][1], d(2, 3)],
    ]
}

/// Wedge of two 4-vectors in the same basis order as [`compound`].
pub fn wedge4(v: &[Complex64; 4], w: &[Complex64; 4]) -> [Complex64; 6] {
    [
        v[0] * w[1] - v[1] * w[0],
        v[0] * w[2] - v[2] * w[0],
        v[0] * w[3] - v[3] * w[0],
        v[1] * w[2] - v[2] * w[1],
        v[1] * w[3] - v[3] * w[1],
        v[2] * w[3] - v[3] * w[2],
    ]
}

/// Determinant of (V1, V2, V3, V4) from the wedges a = V1^V2, b = V3^V4.
pub fn det_pairing(a: &[Complex64; 6], b: &[Complex64; 6]) -> Complex64 {
    a[0] * b[5] - a[1] * b[4] + a[2] * b[3] + a[3] * b[2] - a[4] * b[1] + a[5] * b[0]
}

fn norm6(v: &[Complex64; 6]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn dot6(a: &[Complex64; 6], b: &[Complex64; 6]) -> Complex64 {
    let mut s = Complex64::zero();
    for i in 0..6 {
        s += a[i] * b[i];
    }
    s
}

/// Rotate the largest entry onto the positive real axis and normalize.
/// This pins the free phase of a standalone frame; continued frames keep
/// the phase the transport gives them.
fn canonicalize(v: &mut [Complex64; 6]) {
    let mut best = 0;
    for i in 1..6 {
        if v[i].norm_sqr() > v[best].norm_sqr() {
            best = i;
        }
    }
    let b = v[best];
    let rot = if b.is_zero() {
        Complex64::new(1.0, 0.0)
    } else {
        b.conj() / b.norm()
    };
    let scale = 1.0 / norm6(v);
    for z in v.iter_mut() {
        *z *= rot * scale;
    }
}

fn transpose6(m: &Mat6) -> Mat6 {
    let mut t = [[Complex64::zero(); 6]; 6];
    for i in 0..6 {
        for j in 0..6 {
            t[i][j] = m[j][i];
        }
    }
    t
}

fn flatten6(m: &Mat6) -> Vec<Complex64> {
    let mut f = Vec::with_capacity(36);
    for row in m {
        f.extend_from_slice(row);
    }
    f
}

/// Rate sum of the consistent pair at one end. Minus side pairs the two
/// unstable rates (the plane decaying to the left), plus side the two
/// stable ones.
fn rate_sum(lin: &Linearization, lambda: Complex64, side: Side) -> Result<Complex64, EvansError> {
    let m = lin.end_matrix(lambda, side);
    let mut flat = Vec::with_capacity(16);
    for row in &m {
        flat.extend_from_slice(row);
    }
    let mut nu = linalg::eigenvalues(&flat, 4)?;
    linalg::sort_eigenvalues(&mut nu);
    let mut re_closest = f64::INFINITY;
    for v in &nu {
        re_closest = re_closest.min(v.re.abs());
    }
    // the slow rates shrink linearly with lambda near the origin, so the
    // margin must shrink with them or tiny contours read as degenerate
    let margin = HYPERBOLIC_MARGIN * lambda.norm().min(1.0);
    let unstable = nu.iter().filter(|v| v.re > margin).count();
    let stable = nu.iter().filter(|v| v.re < -margin).count();
    if unstable != 2 || stable != 2 {
        return Err(EvansError::NearEssential { lambda, re_closest });
    }
    Ok(match side {
        Side::Minus => nu[0] + nu[1],
        Side::Plus => nu[2] + nu[3],
    })
}

/// Wedge frame spanning the consistent plane at one end, with its rate sum.
#[derive(Debug, Clone)]
pub struct SideFrame {
    pub wedge: [Complex64; 6],
    pub rate_sum: Complex64,
}

/// Standalone (canonically phased) frame at lambda. The wedge of the
/// eigenvector pair is computed directly as the compound-matrix
/// eigenvector at the pair-sum eigenvalue.
pub fn end_frame(
    lin: &Linearization,
    lambda: Complex64,
    side: Side,
) -> Result<SideFrame, EvansError> {
    let mu = rate_sum(lin, lambda, side)?;
    let b = compound(&lin.end_matrix(lambda, side));
    let v = linalg::eigenvector(&flatten6(&b), 6, mu)?;
    let mut wedge = [Complex64::zero(); 6];
    wedge.copy_from_slice(&v);
    canonicalize(&mut wedge);
    Ok(SideFrame { wedge, rate_sum: mu })
}

// ---------------------------------------------------------------------------
// Kato transport of frames in lambda
// ---------------------------------------------------------------------------

/// Rank-1 spectral projector of the compound end matrix onto its
/// pair-sum eigenvalue: P = r l^T / (l^T r), plain transpose pairing.
struct Projector {
    r: [Complex64; 6],
    l: [Complex64; 6],
    denom: Complex64,
}

impl Projector {
    fn apply(&self, v: &[Complex64; 6]) -> [Complex64; 6] {
        let c = dot6(&self.l, v) / self.denom;
        let mut out = [Complex64::zero(); 6];
        for i in 0..6 {
            out[i] = self.r[i] * c;
        }
        out
    }
}

fn projector(
    lin: &Linearization,
    lambda: Complex64,
    side: Side,
) -> Result<Projector, EvansError> {
    let mu = rate_sum(lin, lambda, side)?;
    let b = compound(&lin.end_matrix(lambda, side));
    let bf = flatten6(&b);
    let btf = flatten6(&transpose6(&b));
    let rv = linalg::eigenvector(&bf, 6, mu)?;
    let lv = linalg::eigenvector(&btf, 6, mu)?;
    let mut r = [Complex64::zero(); 6];
    let mut l = [Complex64::zero(); 6];
    r.copy_from_slice(&rv);
    l.copy_from_slice(&lv);
    let denom = dot6(&l, &r);
    if denom.norm() < 1e-8 * norm6(&l) * norm6(&r) {
        return Err(EvansError::ProjectorIllConditioned { lambda });
    }
    Ok(Projector { r, l, denom })
}

/// Transport a unit frame from one lambda to a nearby one along the
/// straight chord, following the projector: dr/dt = P'(lambda(t)) r.
/// One classical RK4 step spans the chord; the projector derivative is a
/// centered difference along the chord direction. Returns the new unit
/// frame and the real positive norm factor peeled off by the final
/// projection.
pub fn kato_step(
    lin: &Linearization,
    side: Side,
    from: Complex64,
    to: Complex64,
    frame: &[Complex64; 6],
) -> Result<([Complex64; 6], f64), EvansError> {
    let delta = to - from;
    let len = delta.norm();
    if len == 0.0 {
        return Ok((*frame, 1.0));
    }
    let u = delta / len;

    let dp_apply = |z: Complex64, v: &[Complex64; 6]| -> Result<[Complex64; 6], EvansError> {
        // keep the difference stencil strictly right of the essential
        // spectrum: shrink eps until Re(z +- eps u) >= 0.6 Re(z)
        let mut eps = 1e-5 * (z.norm() + 1e-3);
        let cap = 0.4 * z.re / u.re.abs().max(1e-30);
        if cap > 0.0 {
            eps = eps.min(cap);
        }
        let pp = projector(lin, z + eps * u, side)?;
        let pm = projector(lin, z - eps * u, side)?;
        let vp = pp.apply(v);
        let vm = pm.apply(v);
        let mut out = [Complex64::zero(); 6];
        for i in 0..6 {
            out[i] = (vp[i] - vm[i]) / (2.0 * eps);
        }
        Ok(out)
    };

    let h = len;
    let zm = from + 0.5 * delta;
    let k1 = dp_apply(from, frame)?;
    let mut s = *frame;
    for i in 0..6 {
        s[i] += 0.5 * h * k1[i];
    }
    let k2 = dp_apply(zm, &s)?;
    s = *frame;
    for i in 0..6 {
        s[i] += 0.5 * h * k2[i];
    }
    let k3 = dp_apply(zm, &s)?;
    s = *frame;
    for i in 0..6 {
        s[i] += h * k3[i];
    }
    let k4 = dp_apply(to, &s)?;
    let mut moved = *frame;
    for i in 0..6 {
        moved[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    // final projection kills the O(h^5) leakage out of the eigenline
    let p = projector(lin, to, side)?;
    let mut projected = p.apply(&moved);
    let c = norm6(&projected);
    if c == 0.0 {
        return Err(EvansError::ProjectorIllConditioned { lambda: to });
    }
    for z in projected.iter_mut() {
        *z /= c;
    }
    Ok((projected, c))
}

/// Frames for a whole lambda chain, continued from the standalone frame at
/// the first node. `scale[i]` is the accumulated real factor relating the
/// unit frame at node i to the analytic continuation, per side.
pub struct FrameChain {
    pub minus: Vec<[Complex64; 6]>,
    pub plus: Vec<[Complex64; 6]>,
    pub scale_minus: Vec<f64>,
    pub scale_plus: Vec<f64>,
}

pub fn continue_frames(
    lin: &Linearization,
    nodes: &[Complex64],
) -> Result<FrameChain, EvansError> {
    let n = nodes.len();
    let mut minus = Vec::with_capacity(n);
    let mut plus = Vec::with_capacity(n);
    let mut scale_minus = Vec::with_capacity(n);
    let mut scale_plus = Vec::with_capacity(n);
    let fm = end_frame(lin, nodes[0], Side::Minus)?;
    let fp = end_frame(lin, nodes[0], Side::Plus)?;
    minus.push(fm.wedge);
    plus.push(fp.wedge);
    scale_minus.push(1.0);
    scale_plus.push(1.0);
    for i in 1..n {
        let (rm, cm) = kato_step(lin, Side::Minus, nodes[i - 1], nodes[i], &minus[i - 1])?;
        let (rp, cp) = kato_step(lin, Side::Plus, nodes[i - 1], nodes[i], &plus[i - 1])?;
        minus.push(rm);
        plus.push(rp);
        scale_minus.push(scale_minus[i - 1] * cm);
        scale_plus.push(scale_plus[i - 1] * cp);
    }
    Ok(FrameChain {
        minus,
        plus,
        scale_minus,
        scale_plus,
    })
}

// ---------------------------------------------------------------------------
// evaluation
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy)]
pub struct EvansOptions {
    pub rtol: f64,
    pub atol: f64,
}

impl Default for EvansOptions {
    fn default() -> Self {
        EvansOptions {
            rtol: 1e-4,
            atol: 1e-8,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct EvansSample {
    pub lambda: Complex64,
    pub e: Complex64,
    /// How many of the two half-line integrations fell back to the
    /// A-stable integrator after the explicit one collapsed its step.
    pub stiff_fallbacks: u8,
}

fn transport_side(
    lin: &Linearization,
    lambda: Complex64,
    mu: Complex64,
    start: &[Complex64; 6],
    y_from: f64,
    opts: &EvansOptions,
) -> Result<([Complex64; 6], bool), EvansError> {
    let l1 = lin.half_width;
    let ctl = StepControl {
        atol: opts.atol,
        rtol: opts.rtol,
        h0: 0.0,
        hmax: l1 / 100.0,
        hmin: l1 * 1e-7,
        max_steps: 1_000_000,
    };
    let shifted = |y: f64| -> Mat6 {
        let mut b = compound(&lin.matrix(y, lambda));
        for i in 0..6 {
            b[i][i] -= mu;
        }
        b
    };
    let mut rhs = |y: f64, v: &[Complex64; 6]| -> [Complex64; 6] {
        let b = shifted(y);
        ode::matvec6(&b, v)
    };
    match ode::rk45(&mut rhs, y_from, start, 0.0, &ctl, &mut |_, _, _| true) {
        Ok((_, v)) => Ok((v, false)),
        Err(OdeError::StepCollapse { .. }) => {
            let mut a = |y: f64| shifted(y);
            let (_, v) = ode::trapezoid_linear6(&mut a, y_from, start, 0.0, &ctl)
                .map_err(EvansError::Integration)?;
            Ok((v, true))
        }
        Err(e) => Err(EvansError::Integration(e)),
    }
}

/// Evans function from explicitly given unit end frames (analytic
/// continuation supplies these along contours; [`evans`] builds standalone
/// ones). The value is the determinant pairing at y = 0 of the two
/// rate-shifted wedge transports.
pub fn evans_from_frames(
    lin: &Linearization,
    lambda: Complex64,
    frame_minus: &[Complex64; 6],
    frame_plus: &[Complex64; 6],
    opts: &EvansOptions,
) -> Result<EvansSample, EvansError> {
    let mu_m = rate_sum(lin, lambda, Side::Minus)?;
    let mu_p = rate_sum(lin, lambda, Side::Plus)?;
    let l1 = lin.half_width;
    let (vm, fb_m) = transport_side(lin, lambda, mu_m, frame_minus, -l1, opts)?;
    let (vp, fb_p) = transport_side(lin, lambda, mu_p, frame_plus, l1, opts)?;
    Ok(EvansSample {
        lambda,
        e: det_pairing(&vm, &vp),
        stiff_fallbacks: fb_m as u8 + fb_p as u8,
    })
}

/// Standalone Evans value with canonically phased end frames.
pub fn evans(
    lin: &Linearization,
    lambda: Complex64,
    opts: &EvansOptions,
) -> Result<EvansSample, EvansError> {
    let fm = end_frame(lin, lambda, Side::Minus)?;
    let fp = end_frame(lin, lambda, Side::Plus)?;
    evans_from_frames(lin, lambda, &fm.wedge, &fp.wedge, opts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ShockParams;
    use crate::profile::{shoot, ShootOptions};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn rand_mat4(rng: &mut ChaCha8Rng) -> Mat4 {
        let mut m = [[Complex64::zero(); 4]; 4];
        for row in m.iter_mut() {
            for z in row.iter_mut() {
                *z = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            }
        }
        m
    }

    fn rand_vec4(rng: &mut ChaCha8Rng) -> [Complex64; 4] {
        let mut v = [Complex64::zero(); 4];
        for z in v.iter_mut() {
            *z = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        }
        v
    }

    fn mat4vec(m: &Mat4, v: &[Complex64; 4]) -> [Complex64; 4] {
        let mut out = [Complex64::zero(); 4];
        for i in 0..4 {
            for j in 0..4 {
                out[i] += m[i][j] * v[j];
            }
        }
        out
    }

    fn small_shock() -> Linearization {
        let sh = ShockParams::from_integration_constants(1.5, 1.0, 2f64.sqrt(), 1.0, 1.0, 1.1)
            .unwrap();
        let sol = shoot(&sh, &ShootOptions::default()).unwrap();
        Linearization::new(&sol)
    }

    #[test]
    fn compound_satisfies_wedge_product_rule() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let m = rand_mat4(&mut rng);
            let v = rand_vec4(&mut rng);
            let w = rand_vec4(&mut rng);
            let lhs_a = wedge4(&mat4vec(&m, &v), &w);
            let lhs_b = wedge4(&v, &mat4vec(&m, &w));
            let rhs = ode::matvec6(&compound(&m), &wedge4(&v, &w));
            for i in 0..6 {
                let lhs = lhs_a[i] + lhs_b[i];
                assert!((lhs - rhs[i]).norm() < 1e-12 * (1.0 + rhs[i].norm()));
            }
        }
    }

    #[test]
    fn compound_spectrum_is_pairwise_sums() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let m = rand_mat4(&mut rng);
            let mut flat4 = Vec::new();
            for row in &m {
                flat4.extend_from_slice(row);
            }
            let nu = linalg::eigenvalues(&flat4, 4).unwrap();
            let mut sums = Vec::new();
            for i in 0..4 {
                for j in (i + 1)..4 {
                    sums.push(nu[i] + nu[j]);
                }
            }
            let mut got = linalg::eigenvalues(&flatten6(&compound(&m)), 6).unwrap();
            // greedy nearest matching; random matrices keep eigenvalues apart
            for s in &sums {
                let (idx, dist) = got
                    .iter()
                    .enumerate()
                    .map(|(i, g)| (i, (g - s).norm()))
                    .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
                    .unwrap();
                assert!(dist < 1e-8 * (1.0 + s.norm()), "sum {s} missed by {dist}");
                got.swap_remove(idx);
            }
        }
    }

    #[test]
    fn compound_commutes_with_transpose() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let m = rand_mat4(&mut rng);
        let mut mt = [[Complex64::zero(); 4]; 4];
        for i in 0..4 {
            for j in 0..4 {
                mt[i][j] = m[j][i];
            }
        }
        let a = compound(&mt);
        let b = transpose6(&compound(&m));
        for i in 0..6 {
            for j in 0..6 {
                assert_eq!(a[i][j], b[i][j], "entry ({i},{j})");
            }
        }
    }

    #[test]
    fn det_pairing_matches_determinant() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..20 {
            let cols: Vec<[Complex64; 4]> = (0..4).map(|_| rand_vec4(&mut rng)).collect();
            let mut flat = vec![Complex64::zero(); 16];
            for (j, c) in cols.iter().enumerate() {
                for i in 0..4 {
                    flat[i * 4 + j] = c[i];
                }
            }
            let direct = linalg::det(&flat, 4);
            let paired = det_pairing(&wedge4(&cols[0], &cols[1]), &wedge4(&cols[2], &cols[3]));
            assert!((direct - paired).norm() < 1e-12 * (1.0 + direct.norm()));
        }
    }

    #[test]
    fn end_frames_are_decomposable_eigenplanes() {
        let lin = small_shock();
        let lam = Complex64::new(0.6, 1.3);
        for side in [Side::Minus, Side::Plus] {
            let f = end_frame(&lin, lam, side).unwrap();
            // Pluecker quadric: decomposable wedges satisfy this exactly
            let q = f.wedge[0] * f.wedge[5] - f.wedge[1] * f.wedge[4] + f.wedge[2] * f.wedge[3];
            assert!(q.norm() < 1e-9, "quadric residual {q}");
            // and the wedge of the two individually computed eigenvectors
            // spans the same line
            let m = lin.end_matrix(lam, side);
            let mut flat = Vec::new();
            for row in &m {
                flat.extend_from_slice(row);
            }
            let mut nu = linalg::eigenvalues(&flat, 4).unwrap();
            linalg::sort_eigenvalues(&mut nu);
            let pair = match side {
                Side::Minus => [nu[0], nu[1]],
                Side::Plus => [nu[2], nu[3]],
            };
            let v1 = linalg::eigenvector(&flat, 4, pair[0]).unwrap();
            let v2 = linalg::eigenvector(&flat, 4, pair[1]).unwrap();
            let mut w = wedge4(
                &[v1[0], v1[1], v1[2], v1[3]],
                &[v2[0], v2[1], v2[2], v2[3]],
            );
            canonicalize(&mut w);
            let mut diff = 0.0f64;
            for i in 0..6 {
                diff = diff.max((w[i] - f.wedge[i]).norm());
            }
            assert!(diff < 1e-8, "frames disagree by {diff}");
        }
    }

    #[test]
    fn essential_spectrum_is_detected() {
        let lin = small_shock();
        match end_frame(&lin, Complex64::zero(), Side::Minus) {
            Err(EvansError::NearEssential { .. }) => {}
            other => panic!("expected NearEssential, got {other:?}"),
        }
    }

    #[test]
    fn evans_conjugation_symmetry() {
        let lin = small_shock();
        let opts = EvansOptions::default();
        let lam = Complex64::new(0.4, 1.1);
        let e1 = evans(&lin, lam, &opts).unwrap().e;
        let e2 = evans(&lin, lam.conj(), &opts).unwrap().e;
        assert!(
            (e1.conj() - e2).norm() < 1e-10 * e1.norm(),
            "E(conj) = {e2}, conj(E) = {}",
            e1.conj()
        );
    }

    #[test]
    fn evans_real_on_real_lambda() {
        let lin = small_shock();
        let opts = EvansOptions::default();
        for lam in [0.05, 0.5, 3.0] {
            let e = evans(&lin, Complex64::new(lam, 0.0), &opts).unwrap().e;
            assert!(e.norm() > 0.0);
            assert!(e.im.abs() < 1e-10 * e.norm(), "E({lam}) = {e}");
        }
    }

    #[test]
    fn transported_frame_tracks_the_eigenplane() {
        let lin = small_shock();
        let a = Complex64::new(2.0, 0.0);
        let b = Complex64::new(1.4, 1.2);
        let mut r = end_frame(&lin, a, Side::Minus).unwrap().wedge;
        let steps = 8;
        for i in 0..steps {
            let from = a + (b - a) * (i as f64 / steps as f64);
            let to = a + (b - a) * ((i + 1) as f64 / steps as f64);
            let (rn, _) = kato_step(&lin, Side::Minus, from, to, &r).unwrap();
            r = rn;
        }
        let standalone = end_frame(&lin, b, Side::Minus).unwrap().wedge;
        // same line: inner product of unit vectors has modulus 1
        let overlap = dot6(
            &r.map(|z| z.conj()),
            &standalone,
        )
        .norm();
        assert!((overlap - 1.0).abs() < 1e-6, "overlap {overlap}");
    }

    #[test]
    fn kato_monodromy_returns_the_frame() {
        let lin = small_shock();
        let center = Complex64::new(1.5, 1.0);
        let rad = 0.3;
        let n = 60;
        let node = |i: usize| -> Complex64 {
            let th = 2.0 * core::f64::consts::PI * i as f64 / n as f64;
            center + rad * Complex64::new(th.cos(), th.sin())
        };
        for side in [Side::Minus, Side::Plus] {
            let start = end_frame(&lin, node(0), side).unwrap().wedge;
            let mut r = start;
            let mut scale = 1.0f64;
            for i in 0..n {
                let (rn, c) = kato_step(&lin, side, node(i), node(i + 1), &r).unwrap();
                r = rn;
                scale *= c;
            }
            let mut diff = 0.0f64;
            for i in 0..6 {
                diff = diff.max((r[i] - start[i]).norm());
            }
            assert!(diff < 1e-4, "monodromy defect {diff}");
            assert!((scale - 1.0).abs() < 1e-4, "scale drift {scale}");
        }
    }

    #[test]
    fn frames_agree_between_standalone_and_continuation_eval() {
        // E from continued frames must equal E from standalone frames up
        // to the phase the continuation accumulated: |E| agrees
        let lin = small_shock();
        let opts = EvansOptions::default();
        let nodes: Vec<Complex64> = (0..6)
            .map(|i| Complex64::new(2.0 - 0.2 * i as f64, 0.5 * i as f64))
            .collect();
        let chain = continue_frames(&lin, &nodes).unwrap();
        let last = nodes.len() - 1;
        let e_cont = evans_from_frames(&lin, nodes[last], &chain.minus[last], &chain.plus[last], &opts)
            .unwrap()
            .e;
        let e_alone = evans(&lin, nodes[last], &opts).unwrap().e;
        assert!(
            (e_cont.norm() - e_alone.norm()).abs() < 1e-4 * e_alone.norm(),
            "|E| continued {} vs standalone {}",
            e_cont.norm(),
            e_alone.norm()
        );
    }
}
