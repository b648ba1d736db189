//! The linearized operator around the profile, in integrated variables.
//!
//! Eigenvalue problems for the linearization close as a first-order 4x4
//! system `V' = M(y, lambda) V` in `V = [rho, J, rho', rho'']` (the
//! perturbations are integrated once in y, which removes the translation
//! zero of the shock and keeps the Evans function well scaled near the
//! origin). The variable-coefficient entries depend on the profile only
//! through four scalar fields sampled on the profile grid:
//!
//! ```text
//! c1 = J^2/P^2 - gamma P^(gamma-1)      c2 = s - 2 J / P
//! r1 = 2 P'/P                           r2 = (P'/P)^2
//! ```
//!
//! Between grid nodes the entries are interpolated linearly; at and
//! beyond the window edge the matrix is exactly the constant end-state
//! matrix, so integrations started on the edge see the asymptotic system
//! bit-for-bit.
//!
//! The module also carries the constant-state side of the story: the
//! dispersion relation for the essential spectrum and a closed-form
//! resolvent bound for the Fourier symbol, both used as independent
//! checks on the Evans machinery.

use alloc::vec::Vec;
use num_complex::Complex64;
// Float supplies f64 math when building without std
#[allow(unused_imports)]
use num_traits::{Float, Zero};

use crate::profile::ProfileSolution;

pub type Mat4 = [[Complex64; 4]; 4];

/// `(alpha, beta)` of a state in the frame moving with speed `s`:
/// `alpha = J^2/P^2 - gamma P^(gamma-1)`, `beta = s - 2 J / P`.
/// The state is subsonic exactly when `alpha < 0`.
pub fn state_coefficients(p: f64, j: f64, gamma: f64, s: f64) -> (f64, f64) {
    let u = j / p;
    (u * u - gamma * p.powf(gamma - 1.0), s - 2.0 * u)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Minus,
    Plus,
}

/// Variable-coefficient linearization sampled along a computed profile.
#[derive(Debug, Clone)]
pub struct Linearization {
    pub gamma: f64,
    pub mu: f64,
    pub k: f64,
    pub s: f64,
    pub half_width: f64,
    pub alpha_minus: f64,
    pub beta_minus: f64,
    pub alpha_plus: f64,
    pub beta_plus: f64,
    y0: f64,
    dy: f64,
    c1: Vec<f64>,
    c2: Vec<f64>,
    r1: Vec<f64>,
    r2: Vec<f64>,
}

fn assemble(
    lambda: Complex64,
    mu: f64,
    k: f64,
    s: f64,
    c1: f64,
    c2: f64,
    r1: f64,
    r2: f64,
) -> Mat4 {
    let k2 = k * k;
    let z = Complex64::zero();
    let one = Complex64::new(1.0, 0.0);
    let sc = Complex64::new(s, 0.0);
    [
        [z, z, one, z],
        [-lambda, z, sc, z],
        [z, z, z, one],
        [
            lambda * (2.0 * c2 / k2),
            lambda * (2.0 / k2),
            lambda * (2.0 * mu / k2)
                + Complex64::new(-2.0 * c1 / k2 - 2.0 * s * c2 / k2 - r2, 0.0),
            Complex64::new(r1 - 2.0 * s * mu / k2, 0.0),
        ],
    ]
}

impl Linearization {
    pub fn new(sol: &ProfileSolution) -> Self {
        let pr = &sol.params;
        let n = sol.y.len();
        let mut c1 = Vec::with_capacity(n);
        let mut c2 = Vec::with_capacity(n);
        let mut r1 = Vec::with_capacity(n);
        let mut r2 = Vec::with_capacity(n);
        for i in 0..n {
            let (p, q, j) = (sol.p[i], sol.q[i], sol.j[i]);
            let (a, b) = state_coefficients(p, j, pr.gamma, pr.s);
            c1.push(a);
            c2.push(b);
            r1.push(2.0 * q / p);
            r2.push((q / p) * (q / p));
        }
        let (alpha_minus, beta_minus) =
            state_coefficients(pr.p_minus, pr.j_minus(), pr.gamma, pr.s);
        let (alpha_plus, beta_plus) = state_coefficients(pr.p_plus, pr.j_plus(), pr.gamma, pr.s);
        Linearization {
            gamma: pr.gamma,
            mu: pr.mu,
            k: pr.k,
            s: pr.s,
            half_width: sol.half_width,
            alpha_minus,
            beta_minus,
            alpha_plus,
            beta_plus,
            y0: sol.y[0],
            dy: (sol.y[n - 1] - sol.y[0]) / (n - 1) as f64,
            c1,
            c2,
            r1,
            r2,
        }
    }

    /// Constant end-state matrix: `c1, c2` freeze to `alpha, beta` and the
    /// profile-slope terms vanish.
    pub fn end_matrix(&self, lambda: Complex64, side: Side) -> Mat4 {
        let (a, b) = match side {
            Side::Minus => (self.alpha_minus, self.beta_minus),
            Side::Plus => (self.alpha_plus, self.beta_plus),
        };
        assemble(lambda, self.mu, self.k, self.s, a, b, 0.0, 0.0)
    }

    /// The 4x4 system matrix at position y. At `|y| >= L1` this *is*
    /// [`Self::end_matrix`], including in floating point.
    pub fn matrix(&self, y: f64, lambda: Complex64) -> Mat4 {
        if y <= self.y0 {
            return self.end_matrix(lambda, Side::Minus);
        }
        let n = self.c1.len();
        let y_last = self.y0 + self.dy * (n - 1) as f64;
        if y >= y_last {
            return self.end_matrix(lambda, Side::Plus);
        }
        let t = (y - self.y0) / self.dy;
        let idx = (t as usize).min(n - 2);
        let w = t - idx as f64;
        let lerp = |v: &[f64]| v[idx] + (v[idx + 1] - v[idx]) * w;
        assemble(
            lambda,
            self.mu,
            self.k,
            self.s,
            lerp(&self.c1),
            lerp(&self.c2),
            lerp(&self.r1),
            lerp(&self.r2),
        )
    }
}

// ---------------------------------------------------------------------------
// essential spectrum and the resolvent symbol bound
// ---------------------------------------------------------------------------

/// Roots of the constant-state dispersion relation
/// `lambda^2 + xi (mu xi - i beta) lambda + xi^2 (-alpha + k^2 xi^2 / 2) = 0`,
/// ordered by descending real part.
pub fn dispersion_roots(
    xi: f64,
    alpha: f64,
    beta: f64,
    mu: f64,
    k: f64,
) -> (Complex64, Complex64) {
    let b = Complex64::new(mu * xi * xi, -beta * xi);
    let c = Complex64::new(xi * xi * (-alpha + 0.5 * k * k * xi * xi), 0.0);
    if b.is_zero() && c.is_zero() {
        return (Complex64::zero(), Complex64::zero());
    }
    let sq = (b * b - 4.0 * c).sqrt();
    // pick the additive branch that avoids cancellation
    let q = if (b.conj() * sq).re >= 0.0 {
        -0.5 * (b + sq)
    } else {
        -0.5 * (b - sq)
    };
    let (r1, r2) = if q.is_zero() {
        (Complex64::zero(), -b)
    } else {
        (q, c / q)
    };
    if crate::linalg::cmp_re_desc(&r1, &r2) == core::cmp::Ordering::Greater {
        (r2, r1)
    } else {
        (r1, r2)
    }
}

/// One end-state essential-spectrum branch pair at frequency `xi`.
///
/// In the traveling frame the asymptotic operator is the constant-state
/// operator plus the Galilean drift `s d/dy`, so its Fourier curves are
/// `i s xi` plus the constant-state roots taken with `beta = -2 J / P`;
/// the drift shifts imaginary parts only.
pub fn essential_curve(
    p: f64,
    j: f64,
    gamma: f64,
    s: f64,
    mu: f64,
    k: f64,
    xi: f64,
) -> (Complex64, Complex64) {
    let (alpha, beta0) = state_coefficients(p, j, gamma, 0.0);
    let (r1, r2) = dispersion_roots(xi, alpha, beta0, mu, k);
    let drift = Complex64::new(0.0, s * xi);
    (r1 + drift, r2 + drift)
}

/// Largest real part over a frequency sweep of both branches.
pub fn essential_spectrum_max_re(
    p: f64,
    j: f64,
    gamma: f64,
    s: f64,
    mu: f64,
    k: f64,
    xi_max: f64,
    n: usize,
) -> f64 {
    let mut worst = f64::NEG_INFINITY;
    for i in 0..n {
        let xi = -xi_max + 2.0 * xi_max * i as f64 / (n - 1) as f64;
        let (r1, r2) = essential_curve(p, j, gamma, s, mu, k, xi);
        worst = worst.max(r1.re).max(r2.re);
    }
    worst
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SymbolError {
    /// `alpha >= 0`: the state is not subsonic, no bound available.
    NotSubsonic,
    /// The bound only covers the open right half-plane.
    LambdaNotUnstable,
}

impl core::fmt::Display for SymbolError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            SymbolError::NotSubsonic => write!(f, "state is not subsonic (alpha >= 0)"),
            SymbolError::LambdaNotUnstable => {
                write!(f, "resolvent bound requires Re(lambda) > 0")
            }
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SymbolAudit {
    /// sup over the frequency grid of the symbol resolvent 2-norm.
    pub sup_norm: f64,
    /// The closed-form bound `C / h(Re lambda)`.
    pub bound: f64,
    pub worst_xi: f64,
    pub pass: bool,
}

/// Fourier symbol of the constant-state operator at frequency `xi`.
fn symbol(alpha: f64, beta: f64, mu: f64, k: f64, xi: f64) -> [[Complex64; 2]; 2] {
    [
        [Complex64::zero(), Complex64::new(0.0, -xi)],
        [
            Complex64::new(0.0, alpha * xi - 0.5 * k * k * xi * xi * xi),
            Complex64::new(-mu * xi * xi, beta * xi),
        ],
    ]
}

/// Verify the energy-estimate resolvent bound on the symbol:
/// `||(lambda - S(xi))^-1||_2 <= C / h(Re lambda)` with
/// `h = min(-alpha Re, Re, k^2 Re / 2, mu)` and `C = max(k^2/2, -alpha, 1)`,
/// uniformly over the given frequency grid. A subsonic constant state
/// (s = 0 frame, `beta = -2 J / P`) is assumed.
pub fn resolvent_symbol_audit(
    p: f64,
    j: f64,
    gamma: f64,
    mu: f64,
    k: f64,
    lambda: Complex64,
    xi_grid: &[f64],
) -> Result<SymbolAudit, SymbolError> {
    let (alpha, beta) = state_coefficients(p, j, gamma, 0.0);
    if alpha >= 0.0 {
        return Err(SymbolError::NotSubsonic);
    }
    if lambda.re <= 0.0 {
        return Err(SymbolError::LambdaNotUnstable);
    }
    let re = lambda.re;
    let h = (-alpha * re).min(re).min(0.5 * k * k * re).min(mu);
    let c = (0.5 * k * k).max(-alpha).max(1.0);
    let bound = c / h;
    let mut sup_norm = 0.0f64;
    let mut worst_xi = 0.0f64;
    for &xi in xi_grid {
        let s = symbol(alpha, beta, mu, k, xi);
        // smallest singular value of (lambda I - S) via its Gram matrix
        let m = [
            [lambda - s[0][0], -s[0][1]],
            [-s[1][0], lambda - s[1][1]],
        ];
        // Gram trace and determinant give sigma_min without cancellation:
        // the Gram eigenvalues are (t +- disc)/2 with product |det|^2
        let t = m[0][0].norm_sqr() + m[1][0].norm_sqr() + m[0][1].norm_sqr() + m[1][1].norm_sqr();
        let detm = m[0][0] * m[1][1] - m[0][1] * m[1][0];
        let d = detm.norm_sqr();
        let disc = (t * t - 4.0 * d).max(0.0).sqrt();
        let smin_sq = if t + disc > 0.0 { 2.0 * d / (t + disc) } else { 0.0 };
        let inv_norm = if smin_sq > 0.0 {
            1.0 / smin_sq.sqrt()
        } else {
            f64::INFINITY
        };
        if inv_norm > sup_norm {
            sup_norm = inv_norm;
            worst_xi = xi;
        }
    }
    Ok(SymbolAudit {
        sup_norm,
        bound,
        worst_xi,
        pass: sup_norm <= bound,
    })
}
