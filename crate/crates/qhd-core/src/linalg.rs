//! Dense linear algebra kernels sized for this crate's needs.
//!
//! Two consumers with very different shapes: the spectral pipeline wants
//! eigenpairs of 4x4 and 6x6 complex matrices (millions of times, so no
//! allocation churn beyond small vecs), and the finite-difference oracle
//! wants eigenvalues of a real dense matrix with a couple thousand rows.
//! Everything is row-major on flat slices, partial pivoting throughout,
//! no blocking. Eigenvectors come from inverse iteration against the
//! already-computed eigenvalues, which is accurate here because the
//! matrices are tiny and their eigenvalues well separated away from the
//! essential spectrum (the separated case is guarded upstream).

use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;
use num_complex::Complex64;
// Float supplies f64 math when building without std
#[allow(unused_imports)]
use num_traits::{Float, Zero};

pub const EPS: f64 = f64::EPSILON;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LinalgError {
    /// QR sweep budget exhausted before full deflation.
    NoConvergence,
    /// Inverse iteration did not lock onto an eigenvector.
    BadEigenvector,
}

impl core::fmt::Display for LinalgError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            LinalgError::NoConvergence => write!(f, "eigenvalue iteration did not converge"),
            LinalgError::BadEigenvector => write!(f, "inverse iteration produced no eigenvector"),
        }
    }
}

fn unit_phase(z: Complex64) -> Complex64 {
    let n = z.norm();
    if n == 0.0 {
        Complex64::new(1.0, 0.0)
    } else {
        z / n
    }
}

/// Descending by real part, ties broken descending by imaginary part.
pub fn cmp_re_desc(a: &Complex64, b: &Complex64) -> Ordering {
    match b.re.partial_cmp(&a.re) {
        Some(Ordering::Equal) | None => b.im.partial_cmp(&a.im).unwrap_or(Ordering::Equal),
        Some(o) => o,
    }
}

/// Sort eigenvalues into the crate-wide canonical order.
pub fn sort_eigenvalues(eig: &mut [Complex64]) {
    eig.sort_by(cmp_re_desc);
}

// ---------------------------------------------------------------------------
// complex LU
// ---------------------------------------------------------------------------

/// In-place LU factorization with partial pivoting of an n*n row-major
/// matrix. `piv[k]` records the row swapped into position k at step k.
/// Returns the determinant; a zero pivot makes it exactly zero and leaves
/// the trailing block untouched.
pub fn lu_factor(a: &mut [Complex64], n: usize, piv: &mut [usize]) -> Complex64 {
    debug_assert_eq!(a.len(), n * n);
    debug_assert_eq!(piv.len(), n);
    let mut det = Complex64::new(1.0, 0.0);
    for k in 0..n {
        let mut p = k;
        let mut best = a[k * n + k].norm_sqr();
        for i in k + 1..n {
            let m = a[i * n + k].norm_sqr();
            if m > best {
                best = m;
                p = i;
            }
        }
        piv[k] = p;
        if p != k {
            for j in 0..n {
                a.swap(k * n + j, p * n + j);
            }
            det = -det;
        }
        let pivot = a[k * n + k];
        det *= pivot;
        if pivot.is_zero() {
            continue;
        }
        let inv = pivot.inv();
        for i in k + 1..n {
            let l = a[i * n + k] * inv;
            a[i * n + k] = l;
            if !l.is_zero() {
                for j in k + 1..n {
                    let t = a[k * n + j];
                    a[i * n + j] -= l * t;
                }
            }
        }
    }
    det
}

/// Solve with a factorization from [`lu_factor`]. Pivots smaller than
/// `pivot_floor` are replaced by it (keeping their phase), so the solve
/// stays usable on `A - lambda I` with `lambda` an exact eigenvalue;
/// pass 0.0 for a strict solve.
pub fn lu_solve(a: &[Complex64], n: usize, piv: &[usize], b: &mut [Complex64], pivot_floor: f64) {
    for k in 0..n {
        if piv[k] != k {
            b.swap(k, piv[k]);
        }
    }
    for i in 1..n {
        let mut acc = b[i];
        for j in 0..i {
            acc -= a[i * n + j] * b[j];
        }
        b[i] = acc;
    }
    for i in (0..n).rev() {
        let mut acc = b[i];
        for j in i + 1..n {
            acc -= a[i * n + j] * b[j];
        }
        let mut d = a[i * n + i];
        if d.norm() < pivot_floor {
            d = unit_phase(d) * pivot_floor;
        }
        b[i] = acc / d;
    }
}

/// Determinant via a throwaway LU.
pub fn det(a: &[Complex64], n: usize) -> Complex64 {
    let mut work = a.to_vec();
    let mut piv = vec![0usize; n];
    lu_factor(&mut work, n, &mut piv)
}

// ---------------------------------------------------------------------------
// complex eigenvalues: Hessenberg reduction + shifted QR
// ---------------------------------------------------------------------------

fn hessenberg(h: &mut [Complex64], n: usize) {
    for k in 0..n.saturating_sub(2) {
        let mut nrm = 0.0;
        for i in k + 1..n {
            nrm += h[i * n + k].norm_sqr();
        }
        let nrm = nrm.sqrt();
        if nrm < 1e-300 {
            continue;
        }
        let alpha = -unit_phase(h[(k + 1) * n + k]) * nrm;
        let mut v: Vec<Complex64> = (k + 1..n).map(|i| h[i * n + k]).collect();
        v[0] -= alpha;
        let vv: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        if vv < 1e-300 {
            continue;
        }
        let tau = 2.0 / vv;
        // left: rows k+1.., columns k..
        for j in k..n {
            let mut w = Complex64::zero();
            for (idx, i) in (k + 1..n).enumerate() {
                w += v[idx].conj() * h[i * n + j];
            }
            w *= tau;
            for (idx, i) in (k + 1..n).enumerate() {
                h[i * n + j] -= w * v[idx];
            }
        }
        // right: all rows, columns k+1..
        for i in 0..n {
            let mut w = Complex64::zero();
            for (idx, j) in (k + 1..n).enumerate() {
                w += h[i * n + j] * v[idx];
            }
            w *= tau;
            for (idx, j) in (k + 1..n).enumerate() {
                h[i * n + j] -= w * v[idx].conj();
            }
        }
        h[(k + 1) * n + k] = alpha;
        for i in k + 2..n {
            h[i * n + k] = Complex64::zero();
        }
    }
}

/// Givens rotation [c s; -conj(s) c] with c real mapping (f, g) to (r, 0).
fn givens(f: Complex64, g: Complex64) -> (f64, Complex64, Complex64) {
    if g.is_zero() {
        return (1.0, Complex64::zero(), f);
    }
    if f.is_zero() {
        return (0.0, unit_phase(g).conj(), Complex64::new(g.norm(), 0.0));
    }
    let d = (f.norm_sqr() + g.norm_sqr()).sqrt();
    let ph = unit_phase(f);
    let c = f.norm() / d;
    let s = ph * g.conj() / d;
    (c, s, ph * d)
}

/// One explicit shifted QR step on the active block `lo..=hi` of a
/// Hessenberg matrix, similarity-transforming the full matrix.
fn qr_step(h: &mut [Complex64], n: usize, lo: usize, hi: usize, sigma: Complex64) {
    for i in lo..=hi {
        h[i * n + i] -= sigma;
    }
    let mut rot = vec![(0.0f64, Complex64::zero()); hi - lo];
    for i in lo..hi {
        let (c, s, r) = givens(h[i * n + i], h[(i + 1) * n + i]);
        rot[i - lo] = (c, s);
        h[i * n + i] = r;
        h[(i + 1) * n + i] = Complex64::zero();
        for j in i + 1..n {
            let t1 = h[i * n + j];
            let t2 = h[(i + 1) * n + j];
            h[i * n + j] = c * t1 + s * t2;
            h[(i + 1) * n + j] = -s.conj() * t1 + c * t2;
        }
    }
    for i in lo..hi {
        let (c, s) = rot[i - lo];
        for r in 0..=i + 1 {
            let t1 = h[r * n + i];
            let t2 = h[r * n + i + 1];
            h[r * n + i] = c * t1 + t2 * s.conj();
            h[r * n + i + 1] = -t1 * s + c * t2;
        }
    }
    for i in lo..=hi {
        h[i * n + i] += sigma;
    }
}

fn wilkinson_shift(h: &[Complex64], n: usize, hi: usize) -> Complex64 {
    let p = hi - 1;
    let a = h[p * n + p];
    let b = h[p * n + hi];
    let c = h[hi * n + p];
    let d = h[hi * n + hi];
    let mid = (a + d) * 0.5;
    let disc = ((a - d) * 0.5 * ((a - d) * 0.5) + b * c).sqrt();
    let r1 = mid + disc;
    let r2 = mid - disc;
    if (r1 - d).norm() <= (r2 - d).norm() {
        r1
    } else {
        r2
    }
}

/// Eigenvalues of a dense complex matrix, unordered.
pub fn eigenvalues(a: &[Complex64], n: usize) -> Result<Vec<Complex64>, LinalgError> {
    debug_assert_eq!(a.len(), n * n);
    if n == 0 {
        return Ok(Vec::new());
    }
    if n == 1 {
        return Ok(vec![a[0]]);
    }
    let mut h = a.to_vec();
    hessenberg(&mut h, n);
    let mut eig = vec![Complex64::zero(); n];
    let mut hi = n - 1;
    let mut sweeps = 0usize;
    let max_sweeps = 30 * n;
    let mut since_deflate = 0usize;
    loop {
        while hi > 0 {
            let sub = h[hi * n + hi - 1].norm();
            let scale = h[(hi - 1) * n + hi - 1].norm() + h[hi * n + hi].norm();
            if sub <= EPS * scale + 1e-300 {
                h[hi * n + hi - 1] = Complex64::zero();
                eig[hi] = h[hi * n + hi];
                hi -= 1;
                since_deflate = 0;
            } else {
                break;
            }
        }
        if hi == 0 {
            eig[0] = h[0];
            return Ok(eig);
        }
        let mut lo = hi;
        while lo > 0 {
            let sub = h[lo * n + lo - 1].norm();
            let scale = h[(lo - 1) * n + lo - 1].norm() + h[lo * n + lo].norm();
            if sub <= EPS * scale + 1e-300 {
                h[lo * n + lo - 1] = Complex64::zero();
                break;
            }
            lo -= 1;
        }
        if sweeps >= max_sweeps {
            return Err(LinalgError::NoConvergence);
        }
        sweeps += 1;
        since_deflate += 1;
        let sigma = if since_deflate % 12 == 0 {
            // exceptional shift to break symmetric stalls
            h[hi * n + hi] + Complex64::new(1.5 * h[hi * n + hi - 1].norm(), 0.0)
        } else {
            wilkinson_shift(&h, n, hi)
        };
        qr_step(&mut h, n, lo, hi, sigma);
    }
}

/// Unit eigenvector for a known eigenvalue, by inverse iteration with a
/// floored LU solve. Deterministic: fixed seeds, fixed iteration count.
pub fn eigenvector(
    a: &[Complex64],
    n: usize,
    lambda: Complex64,
) -> Result<Vec<Complex64>, LinalgError> {
    debug_assert_eq!(a.len(), n * n);
    let mut scale = lambda.norm();
    for z in a {
        scale = scale.max(z.norm());
    }
    if scale == 0.0 {
        scale = 1.0;
    }
    let mut m = a.to_vec();
    for i in 0..n {
        m[i * n + i] -= lambda;
    }
    let mut piv = vec![0usize; n];
    lu_factor(&mut m, n, &mut piv);
    let floor = EPS * scale * n as f64;

    let normalize = |v: &mut [Complex64]| -> f64 {
        let nrm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if nrm > 0.0 {
            for z in v.iter_mut() {
                *z /= nrm;
            }
        }
        nrm
    };
    let residual = |v: &[Complex64]| -> f64 {
        let mut worst = 0.0f64;
        for i in 0..n {
            let mut acc = -lambda * v[i];
            for j in 0..n {
                acc += a[i * n + j] * v[j];
            }
            worst = worst.max(acc.norm());
        }
        worst
    };

    for seed in 0..=n {
        let mut v = vec![Complex64::zero(); n];
        if seed == 0 {
            let c = Complex64::new(1.0 / (n as f64).sqrt(), 0.0);
            v.iter_mut().for_each(|z| *z = c);
        } else {
            v[seed - 1] = Complex64::new(1.0, 0.0);
        }
        for _ in 0..3 {
            lu_solve(&m, n, &piv, &mut v, floor);
            if normalize(&mut v) == 0.0 || v.iter().any(|z| !z.re.is_finite() || !z.im.is_finite())
            {
                break;
            }
        }
        if v.iter().all(|z| z.re.is_finite() && z.im.is_finite()) && residual(&v) <= 1e-8 * scale {
            return Ok(v);
        }
    }
    Err(LinalgError::BadEigenvector)
}

// ---------------------------------------------------------------------------
// real eigenvalues: balance + Householder Hessenberg + Francis QR
// ---------------------------------------------------------------------------

/// Parlett-Reinsch balancing (scaling only, radix 2).
fn balance(a: &mut [f64], n: usize) {
    const RADIX: f64 = 2.0;
    let sqrdx = RADIX * RADIX;
    let mut done = false;
    while !done {
        done = true;
        for i in 0..n {
            let mut r = 0.0;
            let mut c = 0.0;
            for j in 0..n {
                if j != i {
                    c += a[j * n + i].abs();
                    r += a[i * n + j].abs();
                }
            }
            if c != 0.0 && r != 0.0 {
                let mut g = r / RADIX;
                let mut f = 1.0;
                let s = c + r;
                let mut cc = c;
                while cc < g {
                    f *= RADIX;
                    cc *= sqrdx;
                }
                g = r * RADIX;
                while cc > g {
                    f /= RADIX;
                    cc /= sqrdx;
                }
                if (cc + r) / f < 0.95 * s {
                    done = false;
                    let ginv = 1.0 / f;
                    for j in 0..n {
                        a[i * n + j] *= ginv;
                    }
                    for j in 0..n {
                        a[j * n + i] *= f;
                    }
                }
            }
        }
    }
}

/// Householder reduction to upper Hessenberg form, transforms discarded.
fn hessenberg_real(a: &mut [f64], n: usize) {
    if n < 3 {
        return;
    }
    let high = n - 1;
    let mut ort = vec![0.0f64; n];
    for m in 1..high {
        let mut scale = 0.0;
        for i in m..=high {
            scale += a[i * n + m - 1].abs();
        }
        if scale == 0.0 {
            continue;
        }
        let mut h = 0.0;
        for i in (m..=high).rev() {
            ort[i] = a[i * n + m - 1] / scale;
            h += ort[i] * ort[i];
        }
        let mut g = h.sqrt();
        if ort[m] > 0.0 {
            g = -g;
        }
        h -= ort[m] * g;
        ort[m] -= g;
        // (I - u u^T / h) A (I - u u^T / h), u supported on rows m..=high
        for j in m..n {
            let mut f = 0.0;
            for i in (m..=high).rev() {
                f += ort[i] * a[i * n + j];
            }
            f /= h;
            for i in m..=high {
                a[i * n + j] -= f * ort[i];
            }
        }
        for i in 0..=high {
            let mut f = 0.0;
            for j in (m..=high).rev() {
                f += ort[j] * a[i * n + j];
            }
            f /= h;
            for j in m..=high {
                a[i * n + j] -= f * ort[j];
            }
        }
        a[m * n + m - 1] = scale * g;
        for i in m + 1..=high {
            a[i * n + m - 1] = 0.0;
        }
    }
}

fn sign_of(a: f64, b: f64) -> f64 {
    if b >= 0.0 {
        a.abs()
    } else {
        -a.abs()
    }
}

/// Francis double-shift QR on a real upper Hessenberg matrix; eigenvalues
/// only. The sweep budget is 30 per matrix dimension in total.
fn hqr(a: &mut [f64], n: usize) -> Result<Vec<Complex64>, LinalgError> {
    let mut eig = vec![Complex64::zero(); n];
    let mut anorm = 0.0;
    for i in 0..n {
        for j in i.saturating_sub(1)..n {
            anorm += a[i * n + j].abs();
        }
    }
    if anorm == 0.0 {
        return Ok(eig);
    }
    let mut sweeps = 0usize;
    let budget = 30 * n;
    let mut t = 0.0;
    let mut nn = n as isize - 1;
    while nn >= 0 {
        let mut its = 0;
        loop {
            // look for a single small subdiagonal element
            let mut l = nn;
            while l >= 1 {
                let s = a[(l as usize - 1) * n + l as usize - 1].abs()
                    + a[l as usize * n + l as usize].abs();
                let s = if s == 0.0 { anorm } else { s };
                if a[l as usize * n + l as usize - 1].abs() <= EPS * s {
                    a[l as usize * n + l as usize - 1] = 0.0;
                    break;
                }
                l -= 1;
            }
            let x = a[nn as usize * n + nn as usize];
            if l == nn {
                eig[nn as usize] = Complex64::new(x + t, 0.0);
                nn -= 1;
                break;
            }
            let y = a[(nn as usize - 1) * n + nn as usize - 1];
            let w = a[nn as usize * n + nn as usize - 1] * a[(nn as usize - 1) * n + nn as usize];
            if l == nn - 1 {
                let p = 0.5 * (y - x);
                let q = p * p + w;
                let z = q.abs().sqrt();
                let x = x + t;
                if q >= 0.0 {
                    let z = p + sign_of(z, p);
                    eig[nn as usize - 1] = Complex64::new(x + z, 0.0);
                    eig[nn as usize] = if z != 0.0 {
                        Complex64::new(x - w / z, 0.0)
                    } else {
                        Complex64::new(x + z, 0.0)
                    };
                } else {
                    eig[nn as usize - 1] = Complex64::new(x + p, z);
                    eig[nn as usize] = Complex64::new(x + p, -z);
                }
                nn -= 2;
                break;
            }
            if sweeps >= budget {
                return Err(LinalgError::NoConvergence);
            }
            sweeps += 1;
            let (mut x, mut y, mut w) = (x, y, w);
            if its == 10 || its == 20 {
                // exceptional shift
                t += x;
                for i in 0..=nn as usize {
                    a[i * n + i] -= x;
                }
                let s = a[nn as usize * n + nn as usize - 1].abs()
                    + a[(nn as usize - 1) * n + nn as usize - 2].abs();
                y = 0.75 * s;
                x = y;
                w = -0.4375 * s * s;
            }
            its += 1;
            // find two consecutive small subdiagonals
            let mut m = nn - 2;
            let (mut p, mut q, mut r) = (0.0, 0.0, 0.0);
            while m >= l {
                let mu = m as usize;
                let z = a[mu * n + mu];
                let rr = x - z;
                let ss = y - z;
                p = (rr * ss - w) / a[(mu + 1) * n + mu] + a[mu * n + mu + 1];
                q = a[(mu + 1) * n + mu + 1] - z - rr - ss;
                r = a[(mu + 2) * n + mu + 1];
                let s = p.abs() + q.abs() + r.abs();
                p /= s;
                q /= s;
                r /= s;
                if m == l {
                    break;
                }
                let u = a[mu * n + mu - 1].abs() * (q.abs() + r.abs());
                let v = p.abs()
                    * (a[(mu - 1) * n + mu - 1].abs() + z.abs() + a[(mu + 1) * n + mu + 1].abs());
                if u <= EPS * v {
                    break;
                }
                m -= 1;
            }
            let m = m.max(l) as usize;
            for i in m + 2..=nn as usize {
                a[i * n + i - 2] = 0.0;
            }
            for i in m + 3..=nn as usize {
                a[i * n + i - 3] = 0.0;
            }
            // double QR sweep over rows m..=nn
            for k in m..nn as usize {
                if k != m {
                    p = a[k * n + k - 1];
                    q = a[(k + 1) * n + k - 1];
                    r = if k != nn as usize - 1 {
                        a[(k + 2) * n + k - 1]
                    } else {
                        0.0
                    };
                    x = p.abs() + q.abs() + r.abs();
                    if x != 0.0 {
                        p /= x;
                        q /= x;
                        r /= x;
                    }
                }
                let s = sign_of((p * p + q * q + r * r).sqrt(), p);
                if s == 0.0 {
                    continue;
                }
                if k == m {
                    if l != m as isize {
                        a[k * n + k - 1] = -a[k * n + k - 1];
                    }
                } else {
                    a[k * n + k - 1] = -s * x;
                }
                p += s;
                x = p / s;
                y = q / s;
                let z = r / s;
                q /= p;
                r /= p;
                for j in k..=nn as usize {
                    let mut pp = a[k * n + j] + q * a[(k + 1) * n + j];
                    if k != nn as usize - 1 {
                        pp += r * a[(k + 2) * n + j];
                        a[(k + 2) * n + j] -= pp * z;
                    }
                    a[(k + 1) * n + j] -= pp * y;
                    a[k * n + j] -= pp * x;
                }
                let mmin = if (nn as usize) < k + 3 {
                    nn as usize
                } else {
                    k + 3
                };
                for i in l as usize..=mmin {
                    let mut pp = x * a[i * n + k] + y * a[i * n + k + 1];
                    if k != nn as usize - 1 {
                        pp += z * a[i * n + k + 2];
                        a[i * n + k + 2] -= pp * r;
                    }
                    a[i * n + k + 1] -= pp * q;
                    a[i * n + k] -= pp;
                }
            }
        }
    }
    Ok(eig)
}

/// Eigenvalues of a dense real matrix, unordered. Complex eigenvalues come
/// out in conjugate pairs exactly.
pub fn real_eigenvalues(a: &[f64], n: usize) -> Result<Vec<Complex64>, LinalgError> {
    debug_assert_eq!(a.len(), n * n);
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut work = a.to_vec();
    balance(&mut work, n);
    hessenberg_real(&mut work, n);
    hqr(&mut work, n)
}
