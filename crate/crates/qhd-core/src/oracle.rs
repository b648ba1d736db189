//! Direct eigenvalue solver used to audit the Evans-function verdicts.
//!
//! The integrated eigenvalue problem is discretized with centered finite
//! differences on a uniform grid and handed to the dense real QR solver.
//! This route shares no code with the wedge transport, so agreement
//! between the two is meaningful. Two discretizations:
//!
//! * Dirichlet truncation of the profile-dependent operator on the
//!   profile window (zero extension outside). Used to count unstable
//!   eigenvalues directly.
//! * Periodic constant-coefficient version on the same stencils. Its
//!   exact eigenvalues are known in closed form through the discrete
//!   Fourier symbols, which pins down the assembly, and its low modes
//!   converge to the analytic dispersion curves, which pins down the
//!   operator itself.
//!
//! Truncation pollutes the spectrum (the essential spectrum discretizes
//! into curves that shift with resolution, and the artificial boundary
//! reflects), so the unstable count is only trusted after a two-
//! resolution persistence filter.
//!
//! Eliminating J from the linearized system gives the scalar form that
//! the second row discretizes:
//!
//! ```text
//! lambda J = (c1 + k^2 q^2 / (2 p^2)) rho' + c2 J' + mu J''
//!            - k^2 (q/p) rho'' + (k^2/2) rho'''
//! ```
//!
//! with rho' coupled back through lambda rho = s rho' - J'.

// Float supplies f64 math when building without std
#[allow(unused_imports)]
use num_traits::Float;
use alloc::vec;
use alloc::vec::Vec;
use num_complex::Complex64;

use crate::linalg::{self, LinalgError};
use crate::linearize::state_coefficients;
use crate::profile::ProfileSolution;

/// Dense real matrix of the Dirichlet-truncated operator on `n` interior
/// nodes, (2n)^2 row-major; rho unknowns first, then J.
pub fn dirichlet_matrix(sol: &ProfileSolution, n: usize) -> Vec<f64> {
    let pr = &sol.params;
    let l = sol.half_width;
    let dx = 2.0 * l / (n + 1) as f64;
    let k2 = pr.k * pr.k;
    let dim = 2 * n;
    let mut a = vec![0.0f64; dim * dim];
    let d1 = 1.0 / (2.0 * dx);
    let d2 = 1.0 / (dx * dx);
    let d3 = 1.0 / (2.0 * dx * dx * dx);
    for jrow in 0..n {
        let x = -l + (jrow + 1) as f64 * dx;
        let (p, q, jm) = sol.sample(x);
        let (c1, c2) = state_coefficients(p, jm, pr.gamma, pr.s);
        let rho_eq = jrow * dim;
        let j_eq = (n + jrow) * dim;
        let jc = jrow as isize;
        // zero extension: couplings falling off the grid are dropped
        let mut add = |row: usize, col: isize, in_j_block: bool, w: f64| {
            if col >= 0 && (col as usize) < n {
                a[row + col as usize + if in_j_block { n } else { 0 }] += w;
            }
        };
        // first equation: lambda rho = s rho' - J'
        add(rho_eq, jc - 1, false, -pr.s * d1);
        add(rho_eq, jc + 1, false, pr.s * d1);
        add(rho_eq, jc - 1, true, d1);
        add(rho_eq, jc + 1, true, -d1);
        // second equation, rho couplings; the third derivative uses the
        // five-point stencil (-f_-2 + 2 f_-1 - 2 f_+1 + f_+2) / (2 dx^3)
        let cr1 = c1 + k2 * q * q / (2.0 * p * p);
        let cr2 = -k2 * q / p;
        let w3 = (k2 / 2.0) * d3;
        add(j_eq, jc - 2, false, -w3);
        add(j_eq, jc - 1, false, -cr1 * d1 + cr2 * d2 + 2.0 * w3);
        add(j_eq, jc, false, -2.0 * cr2 * d2);
        add(j_eq, jc + 1, false, cr1 * d1 + cr2 * d2 - 2.0 * w3);
        add(j_eq, jc + 2, false, w3);
        // second equation, J couplings
        add(j_eq, jc - 1, true, -c2 * d1 + pr.mu * d2);
        add(j_eq, jc, true, -2.0 * pr.mu * d2);
        add(j_eq, jc + 1, true, c2 * d1 + pr.mu * d2);
    }
    a
}

/// Dense real matrix of the periodic constant-coefficient operator for a
/// state (p, j) in the frame moving with speed s, on `n` nodes spanning
/// a period of length 2 l.
pub fn periodic_constant_matrix(
    p: f64,
    j: f64,
    gamma: f64,
    s: f64,
    mu: f64,
    k: f64,
    l: f64,
    n: usize,
) -> Vec<f64> {
    let (alpha, beta) = state_coefficients(p, j, gamma, s);
    let dx = 2.0 * l / n as f64;
    let k2 = k * k;
    let dim = 2 * n;
    let mut a = vec![0.0f64; dim * dim];
    let d1 = 1.0 / (2.0 * dx);
    let d2 = 1.0 / (dx * dx);
    let d3 = 1.0 / (2.0 * dx * dx * dx);
    let wrap = |c: isize| -> usize { c.rem_euclid(n as isize) as usize };
    for jrow in 0..n {
        let rho_eq = jrow * dim;
        let j_eq = (n + jrow) * dim;
        let jc = jrow as isize;
        let mut add = |row: usize, col: isize, in_j_block: bool, w: f64| {
            let c = wrap(col) + if in_j_block { n } else { 0 };
            a[row + c] += w;
        };
        let w3 = (k2 / 2.0) * d3;
        add(rho_eq, jc - 1, false, -s * d1);
        add(rho_eq, jc + 1, false, s * d1);
        add(rho_eq, jc - 1, true, d1);
        add(rho_eq, jc + 1, true, -d1);
        add(j_eq, jc - 2, false, -w3);
        add(j_eq, jc - 1, false, -alpha * d1 + 2.0 * w3);
        add(j_eq, jc + 1, false, alpha * d1 - 2.0 * w3);
        add(j_eq, jc + 2, false, w3);
        add(j_eq, jc - 1, true, -beta * d1 + mu * d2);
        add(j_eq, jc, true, -2.0 * mu * d2);
        add(j_eq, jc + 1, true, beta * d1 + mu * d2);
    }
    a
}

/// Eigenvalues of the discrete Fourier symbol at one periodic mode:
/// the closed form the periodic matrix must reproduce exactly.
pub fn discrete_symbol_roots(
    p: f64,
    j: f64,
    gamma: f64,
    s: f64,
    mu: f64,
    k: f64,
    dx: f64,
    theta: f64,
) -> (Complex64, Complex64) {
    let (alpha, beta) = state_coefficients(p, j, gamma, s);
    let k2 = k * k;
    let sym1 = Complex64::new(0.0, theta.sin() / dx);
    let sym2 = Complex64::new((2.0 * theta.cos() - 2.0) / (dx * dx), 0.0);
    let sym3 = Complex64::new(0.0, ((2.0 * theta).sin() - 2.0 * theta.sin()) / (dx * dx * dx));
    // 2x2 symbol [[s D1, -D1], [alpha D1 + (k^2/2) D3, beta D1 + mu D2]]
    let s11 = s * sym1;
    let s12 = -sym1;
    let s21 = alpha * sym1 + (k2 / 2.0) * sym3;
    let s22 = beta * sym1 + mu * sym2;
    let tr = s11 + s22;
    let det = s11 * s22 - s12 * s21;
    let disc = (tr * tr - 4.0 * det).sqrt();
    let r1 = 0.5 * (tr + disc);
    let r2 = 0.5 * (tr - disc);
    if linalg::cmp_re_desc(&r1, &r2) == core::cmp::Ordering::Greater {
        (r2, r1)
    } else {
        (r1, r2)
    }
}

/// Eigenvalues of the Dirichlet oracle sorted by descending real part.
pub fn rightmost(sol: &ProfileSolution, n: usize) -> Result<Vec<Complex64>, LinalgError> {
    let a = dirichlet_matrix(sol, n);
    let mut eig = linalg::real_eigenvalues(&a, 2 * n)?;
    linalg::sort_eigenvalues(&mut eig);
    Ok(eig)
}

/// Eigenvalues from the coarse run that persist in the fine run:
/// a coarse eigenvalue right of `cutoff` is kept when some fine
/// eigenvalue sits within half its modulus. Discretization artifacts
/// march with resolution and fail this.
pub fn persistent_unstable(
    coarse: &[Complex64],
    fine: &[Complex64],
    cutoff: f64,
) -> Vec<Complex64> {
    let mut kept = Vec::new();
    for c in coarse.iter().filter(|c| c.re > cutoff) {
        let scale = c.norm().max(1e-12);
        let moved = fine
            .iter()
            .map(|f| (f - c).norm())
            .fold(f64::INFINITY, f64::min);
        if moved <= 0.5 * scale {
            kept.push(*c);
        }
    }
    kept
}

#[derive(Debug, Clone)]
pub struct CrossCheck {
    /// persistent unstable eigenvalues (coarse values)
    pub persistent: Vec<Complex64>,
    /// coarse candidates discarded by the persistence filter
    pub discarded: usize,
    pub winding: i64,
    /// winding of the Evans function matches the persistent count
    pub consistent: bool,
}

/// Compare a winding number against the direct count of unstable
/// eigenvalues, filtered for persistence between resolutions n and 2n.
pub fn cross_check(
    sol: &ProfileSolution,
    n: usize,
    cutoff: f64,
    winding: i64,
) -> Result<CrossCheck, LinalgError> {
    let coarse = rightmost(sol, n)?;
    let fine = rightmost(sol, 2 * n)?;
    let candidates = coarse.iter().filter(|c| c.re > cutoff).count();
    let persistent = persistent_unstable(&coarse, &fine, cutoff);
    let discarded = candidates - persistent.len();
    let consistent = winding == persistent.len() as i64;
    Ok(CrossCheck {
        persistent,
        discarded,
        winding,
        consistent,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ShockParams;
    use crate::profile::{shoot, ShootOptions};

    fn small_shock() -> ProfileSolution {
        let sh = ShockParams::from_integration_constants(1.5, 1.0, 2f64.sqrt(), 1.0, 1.0, 1.1)
            .unwrap();
        shoot(&sh, &ShootOptions::default()).unwrap()
    }

    #[test]
    fn periodic_matrix_matches_discrete_symbols() {
        let (p, j, gamma, s, mu, k) = (1.0, 0.1, 1.5, 1.0, 0.7, 2f64.sqrt());
        let (l, n) = (15.0, 40);
        let dx = 2.0 * l / n as f64;
        let a = periodic_constant_matrix(p, j, gamma, s, mu, k, l, n);
        let mut got = linalg::real_eigenvalues(&a, 2 * n).unwrap();
        let mut scale = 0.0f64;
        for e in &got {
            scale = scale.max(e.norm());
        }
        for m in 0..n {
            let theta = 2.0 * core::f64::consts::PI * m as f64 / n as f64;
            let (r1, r2) = discrete_symbol_roots(p, j, gamma, s, mu, k, dx, theta);
            for r in [r1, r2] {
                let (idx, dist) = got
                    .iter()
                    .enumerate()
                    .map(|(i, g)| (i, (g - r).norm()))
                    .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
                    .unwrap();
                assert!(dist < 1e-8 * scale, "mode {m}: root {r} missed by {dist:.2e}");
                got.swap_remove(idx);
            }
        }
        assert!(got.is_empty());
    }

    #[test]
    fn periodic_low_modes_approach_the_dispersion_curves() {
        // coarse resolution here; the tight version runs in the
        // acceptance suite at n = 800
        let sh = small_shock();
        let (p, j) = (sh.params.p_minus, sh.params.j_minus());
        let (gamma, s, mu, k) = (sh.params.gamma, sh.params.s, sh.params.mu, sh.params.k);
        let (l, n) = (20.0, 400);
        let a = periodic_constant_matrix(p, j, gamma, s, mu, k, l, n);
        let eig = linalg::real_eigenvalues(&a, 2 * n).unwrap();
        for m in 1..=5usize {
            let xi = core::f64::consts::PI * m as f64 / l;
            let (r1, r2) = crate::linearize::essential_curve(p, j, gamma, s, mu, k, xi);
            for r in [r1, r2] {
                let dist = eig
                    .iter()
                    .map(|g| (g - r).norm())
                    .fold(f64::INFINITY, f64::min);
                assert!(dist < 1e-2, "mode {m}: {r} missed by {dist:.2e}");
            }
        }
    }

    #[test]
    fn dirichlet_spectrum_is_conjugate_symmetric_and_left() {
        let sol = small_shock();
        let eig = rightmost(&sol, 120).unwrap();
        assert_eq!(eig.len(), 240);
        // real matrix: nonreal eigenvalues pair up exactly
        for e in &eig {
            if e.im != 0.0 {
                assert!(
                    eig.iter().any(|f| *f == e.conj()),
                    "unpaired eigenvalue {e}"
                );
            }
        }
        // stable shock: nothing right of the essential-spectrum fuzz
        assert!(eig[0].re < 1e-2, "rightmost {}", eig[0]);
    }

    #[test]
    fn dirichlet_rightmost_is_frozen() {
        // determinism check against a recorded run (same grid, same QR)
        let sol = small_shock();
        let eig = rightmost(&sol, 160).unwrap();
        let top = eig[0];
        let expected = Complex64::new(-0.010917447673422816, 0.03160376847343503);
        assert!(
            (top - expected).norm() < 1e-9,
            "rightmost moved: {top} vs {expected}"
        );
    }

    #[test]
    fn persistence_filter_drops_marching_artifacts() {
        let coarse = [
            Complex64::new(0.5, 1.0),
            Complex64::new(0.3, -2.0),
            Complex64::new(-0.1, 0.0),
        ];
        // first survives (nearby partner), second marched away, third is
        // left of the cutoff and never considered
        let fine = [
            Complex64::new(0.52, 1.01),
            Complex64::new(0.9, -3.5),
            Complex64::new(-0.1, 0.0),
        ];
        let kept = persistent_unstable(&coarse, &fine, 1e-2);
        assert_eq!(kept.len(), 1);
        assert_eq!(kept[0], coarse[0]);
    }

    #[test]
    fn cross_check_agrees_for_the_stable_small_shock() {
        let sol = small_shock();
        let report = cross_check(&sol, 100, 1e-2, 0).unwrap();
        assert!(report.consistent, "persistent: {:?}", report.persistent);
        assert!(report.persistent.is_empty());
    }
}
