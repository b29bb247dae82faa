//! Dense complex linear-algebra support shared across the engine: operator
//! norms, Hermitian eigenfactorizations, PSD square roots, numerical rank,
//! canonical orthonormal bases and seeded sampling in the unit ball.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type C64 = Complex<f64>;
pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;

pub fn cplx(re: f64, im: f64) -> C64 {
    Complex::new(re, im)
}

pub fn identity(n: usize) -> CMat {
    CMat::identity(n, n)
}

/// Largest singular value (spectral norm). Zero-sized matrices have norm 0.
pub fn opnorm(m: &CMat) -> f64 {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0.0;
    }
    m.singular_values().max()
}

/// Hermitian part (M + M*)/2.
pub fn hermitize(m: &CMat) -> CMat {
    (m + m.adjoint()) * cplx(0.5, 0.0)
}

/// Eigendecomposition of a Hermitian matrix by cyclic Jacobi rotations:
/// (eigenvalues, eigenvectors), eigenvalues ascending. The input is
/// symmetrized first so that tiny non-Hermitian noise cannot poison the
/// factorization. Jacobi is used instead of the tridiagonal QR route
/// because it keeps full accuracy on clustered spectra.
pub fn eigh(m: &CMat) -> (DVector<f64>, CMat) {
    let mut a = hermitize(m);
    let n = a.nrows();
    let mut q = CMat::identity(n, n);
    if n > 0 {
        let scale = a.iter().map(|z| z.norm()).fold(0.0_f64, f64::max).max(1.0);
        let target = 1e-16 * scale;
        for _sweep in 0..60 {
            let mut off: f64 = 0.0;
            for p in 0..n {
                for r in (p + 1)..n {
                    off = off.max(a[(p, r)].norm());
                }
            }
            if off <= target {
                break;
            }
            for p in 0..n {
                for r in (p + 1)..n {
                    let z = a[(p, r)];
                    let zn = z.norm();
                    if zn <= target * 1e-2 {
                        continue;
                    }
                    // Phase taking the (p,r) entry real, then a real
                    // Jacobi rotation zeroing it.
                    let psi = z / cplx(zn, 0.0);
                    let x = a[(p, p)].re;
                    let y = a[(r, r)].re;
                    let tau = (y - x) / (2.0 * zn);
                    let t = if tau >= 0.0 {
                        1.0 / (tau + (1.0 + tau * tau).sqrt())
                    } else {
                        -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                    };
                    let c = 1.0 / (1.0 + t * t).sqrt();
                    let s = t * c;
                    // Rotation R: R[p,p] = c psi, R[p,r] = s psi,
                    // R[r,p] = -s, R[r,r] = c; apply A <- R^* A R.
                    let rp = cplx(c, 0.0) * psi;
                    let rq = cplx(s, 0.0) * psi;
                    for k in 0..n {
                        let akp = a[(k, p)];
                        let akr = a[(k, r)];
                        a[(k, p)] = akp * rp - akr * cplx(s, 0.0);
                        a[(k, r)] = akp * rq + akr * cplx(c, 0.0);
                    }
                    for k in 0..n {
                        let apk = a[(p, k)];
                        let ark = a[(r, k)];
                        a[(p, k)] = rp.conj() * apk - cplx(s, 0.0) * ark;
                        a[(r, k)] = rq.conj() * apk + cplx(c, 0.0) * ark;
                    }
                    a[(p, r)] = cplx(0.0, 0.0);
                    a[(r, p)] = cplx(0.0, 0.0);
                    a[(p, p)] = cplx(a[(p, p)].re, 0.0);
                    a[(r, r)] = cplx(a[(r, r)].re, 0.0);
                    for k in 0..n {
                        let qkp = q[(k, p)];
                        let qkr = q[(k, r)];
                        q[(k, p)] = qkp * rp - qkr * cplx(s, 0.0);
                        q[(k, r)] = qkp * rq + qkr * cplx(c, 0.0);
                    }
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.partial_cmp(&a[(j, j)].re).unwrap());
    let vals = DVector::from_iterator(n, order.iter().map(|&i| a[(i, i)].re));
    let mut vecs = CMat::zeros(n, n);
    for (k, &i) in order.iter().enumerate() {
        vecs.set_column(k, &q.column(i));
    }
    (vals, vecs)
}

/// Minimum eigenvalue of the Hermitian part.
pub fn min_eig_hermitian(m: &CMat) -> f64 {
    if m.nrows() == 0 {
        return 0.0;
    }
    let (vals, _) = eigh(m);
    vals[0]
}

/// PSD square root via Hermitian eigendecomposition; negative eigenvalues
/// within roundoff are clipped to zero.
pub fn psd_sqrt(m: &CMat) -> CMat {
    let (vals, vecs) = eigh(m);
    let d = CMat::from_diagonal(&CVec::from_iterator(
        vals.len(),
        vals.iter().map(|&v| cplx(v.max(0.0).sqrt(), 0.0)),
    ));
    &vecs * d * vecs.adjoint()
}

/// Inverse PSD square root; fails when the smallest eigenvalue is at or
/// below `tol`.
pub fn psd_inv_sqrt(m: &CMat, tol: f64) -> Option<(CMat, f64)> {
    let (vals, vecs) = eigh(m);
    let min = vals[0];
    if min <= tol {
        return None;
    }
    let d = CMat::from_diagonal(&CVec::from_iterator(
        vals.len(),
        vals.iter().map(|&v| cplx(1.0 / v.sqrt(), 0.0)),
    ));
    Some((&vecs * d * vecs.adjoint(), min))
}

/// Low-rank factor of a Hermitian PSD matrix: columns L with L L* = M,
/// keeping eigenvalues above `threshold` (absolute). Returns (L, min_eig).
/// Column order follows descending eigenvalue so the factor is deterministic.
pub fn psd_factor(m: &CMat, threshold: f64) -> (CMat, f64) {
    let (vals, vecs) = eigh(m);
    let n = vals.len();
    let kept: Vec<usize> = (0..n).rev().filter(|&i| vals[i] > threshold).collect();
    let mut l = CMat::zeros(n, kept.len());
    for (k, &i) in kept.iter().enumerate() {
        let col = vecs.column(i) * cplx(vals[i].sqrt(), 0.0);
        l.set_column(k, &col);
    }
    (l, vals[0])
}

/// Accurate thin SVD: rectangular inputs are QR-reduced to a square
/// factor, which is decomposed through the bordered Hermitian matrix
/// [[0, R], [R^*, 0]] (eigenpairs (+/- sigma, (u; +/- v)/sqrt2)) using
/// the Jacobi eigensolver. Returns (U, sigma, V) with min(m, n)
/// descending singular triples at full accuracy.
pub fn accurate_svd(m: &CMat) -> (CMat, Vec<f64>, CMat) {
    let rows = m.nrows();
    let cols = m.ncols();
    if rows.min(cols) == 0 {
        return (CMat::zeros(rows, 0), Vec::new(), CMat::zeros(cols, 0));
    }
    if rows > cols {
        let qr = m.clone().qr();
        let (u_r, sigma, v) = accurate_svd_square(&qr.r());
        return (qr.q() * u_r, sigma, v);
    }
    if cols > rows {
        // m = R^* Q^* with Q from the QR of m^*.
        let qr = m.adjoint().qr();
        let (u, sigma, w) = accurate_svd_square(&qr.r().adjoint());
        return (u, sigma, qr.q() * w);
    }
    accurate_svd_square(m)
}

fn accurate_svd_square(m: &CMat) -> (CMat, Vec<f64>, CMat) {
    let n = m.nrows();
    let mut b = CMat::zeros(2 * n, 2 * n);
    b.view_mut((0, n), (n, n)).copy_from(m);
    b.view_mut((n, 0), (n, n)).copy_from(&m.adjoint());
    let (vals, vecs) = eigh(&b);
    let mut u = CMat::zeros(n, n);
    let mut v = CMat::zeros(n, n);
    let mut sigma = Vec::with_capacity(n);
    let s2 = cplx(std::f64::consts::SQRT_2, 0.0);
    for t in 0..n {
        let idx = 2 * n - 1 - t;
        sigma.push(vals[idx].max(0.0));
        let col = vecs.column(idx);
        for i in 0..n {
            u[(i, t)] = col[i] * s2;
            v[(i, t)] = col[n + i] * s2;
        }
    }
    (u, sigma, v)
}

/// Numerical rank by singular values with a threshold relative to the
/// largest singular value.
pub fn rank(m: &CMat, rel_tol: f64) -> usize {
    let (_, sigma, _) = accurate_svd(m);
    let top = sigma.first().copied().unwrap_or(0.0);
    if top == 0.0 {
        return 0;
    }
    sigma.iter().filter(|&&s| s > rel_tol * top).count()
}

/// Moore-Penrose pseudoinverse with relative singular-value threshold.
pub fn pinv(m: &CMat, rel_tol: f64) -> CMat {
    let (u, sigma, v) = accurate_svd(m);
    let top = sigma.first().copied().unwrap_or(0.0);
    let mut out = CMat::zeros(m.ncols(), m.nrows());
    for (t, &s) in sigma.iter().enumerate() {
        if top > 0.0 && s > rel_tol * top {
            out += v.column(t) * u.column(t).adjoint() / cplx(s, 0.0);
        }
    }
    out
}

/// Orthonormal basis of the column span, singular values above `rel_tol`
/// relative to the largest.
pub fn range_basis(m: &CMat, rel_tol: f64) -> CMat {
    let (u, sigma, _) = accurate_svd(m);
    let top = sigma.first().copied().unwrap_or(0.0);
    let k = sigma
        .iter()
        .filter(|&&s| top > 0.0 && s > rel_tol * top)
        .count();
    u.columns(0, k).into_owned()
}

/// Orthonormal basis of the null space (right kernel) of `m`: the
/// orthogonal complement of the numerical row space. (The bordered SVD
/// does not deliver usable right singular vectors for zero singular
/// values, so the kernel is completed rather than read off.)
pub fn null_basis(m: &CMat, rel_tol: f64) -> CMat {
    let nc = m.ncols();
    if m.nrows() == 0 || nc == 0 {
        return CMat::identity(nc, nc);
    }
    let (_, sigma, v) = accurate_svd(m);
    let top = sigma.first().copied().unwrap_or(0.0);
    let r = sigma
        .iter()
        .filter(|&&s| top > 0.0 && s > rel_tol * top)
        .count();
    if r == nc {
        return CMat::zeros(nc, 0);
    }
    let row_space = v.columns(0, r).into_owned();
    orthonormal_complement_of(&row_space)
}

/// Complement through a Householder-style completion: columns of Q extend
/// to a unitary; take the tail columns.
fn orthonormal_complement_of(q: &CMat) -> CMat {
    let n = q.nrows();
    let k = q.ncols();
    // Gram-Schmidt the coordinate vectors against q.
    let mut extra: Vec<CVec> = Vec::with_capacity(n - k);
    for i in 0..n {
        if extra.len() == n - k {
            break;
        }
        let mut v = CVec::zeros(n);
        v[i] = cplx(1.0, 0.0);
        // Project out q and previously accepted columns, twice for
        // numerical orthogonality.
        for _ in 0..2 {
            let coeff = q.adjoint() * &v;
            v -= q * coeff;
            for e in &extra {
                let c = e.dotc(&v);
                v -= e * c;
            }
        }
        let nrm = v.norm();
        if nrm > 1e-8 {
            v /= cplx(nrm, 0.0);
            extra.push(v);
        }
    }
    let mut out = CMat::zeros(n, extra.len());
    for (i, e) in extra.iter().enumerate() {
        out.set_column(i, e);
    }
    out
}

/// Orthonormal basis of the orthogonal complement of the span of the
/// (orthonormal) columns of `q` inside the ambient space.
pub fn complement_basis(q: &CMat) -> CMat {
    if q.ncols() == 0 {
        return CMat::identity(q.nrows(), q.nrows());
    }
    orthonormal_complement_of(q)
}

/// Canonicalize an orthonormal basis of a subspace: sweep ambient
/// coordinates in order, extract the component of each coordinate direction
/// inside the subspace not already spanned, and fix phases so the leading
/// entry of each basis vector is positive real. The result depends only on
/// the subspace, making printed bases and downstream matrices reproducible.
pub fn canonical_subspace_basis(q: &CMat, tol: f64) -> CMat {
    let n = q.nrows();
    let k = q.ncols();
    let mut basis: Vec<CVec> = Vec::with_capacity(k);
    for coord in 0..n {
        if basis.len() == k {
            break;
        }
        // Projection of e_coord onto the subspace.
        let coeffs = q.row(coord).adjoint(); // q^* e_coord
        let mut v = q * coeffs;
        for b in &basis {
            let c = b.dotc(&v);
            v -= b * c;
        }
        let nrm = v.norm();
        if nrm > tol {
            v /= cplx(nrm, 0.0);
            // Flush roundoff noise so printed bases are clean, then fix
            // the phase: leading nonzero entry positive real.
            for z in v.iter_mut() {
                if z.norm() < 1e-14 {
                    *z = cplx(0.0, 0.0);
                }
            }
            v /= cplx(v.norm(), 0.0);
            let lead = (0..n).find(|&i| v[i].norm() > tol).unwrap_or(0);
            let ph = v[lead] / cplx(v[lead].norm(), 0.0);
            v /= ph;
            basis.push(v);
        }
    }
    let mut out = CMat::zeros(n, basis.len());
    for (i, b) in basis.iter().enumerate() {
        out.set_column(i, b);
    }
    out
}

/// Principal angles (radians, ascending) between the spans of two
/// orthonormal-column matrices of equal ambient dimension. Computed from
/// the sines sigma((I - Q1 Q1^*) Q2), which stay accurate for small
/// angles where the cosine route loses half the digits.
pub fn principal_angles(q1: &CMat, q2: &CMat) -> Vec<f64> {
    if q1.ncols() == 0 || q2.ncols() == 0 {
        return Vec::new();
    }
    let proj = q2 - q1 * (q1.adjoint() * q2);
    let mut sv: Vec<f64> = proj.singular_values().iter().copied().collect();
    sv.sort_by(|a, b| a.partial_cmp(b).unwrap());
    sv.iter().map(|&s| s.clamp(0.0, 1.0).asin()).collect()
}

/// Deterministic RNG for all sampled cross-checks, keyed by a 64-bit seed.
pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn gaussian_pair(rng: &mut ChaCha8Rng) -> (f64, f64) {
    // Box-Muller from two uniforms.
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen_range(0.0..1.0);
    let r = (-2.0 * u1.ln()).sqrt();
    let th = 2.0 * std::f64::consts::PI * u2;
    (r * th.cos(), r * th.sin())
}

/// Uniformly distributed point of the complex ball of the given radius.
pub fn ball_point(d: usize, radius: f64, rng: &mut ChaCha8Rng) -> Vec<C64> {
    let mut v: Vec<C64> = (0..d)
        .map(|_| {
            let (re, im) = gaussian_pair(rng);
            cplx(re, im)
        })
        .collect();
    let nrm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let u: f64 = rng.gen_range(0.0..1.0_f64);
    let scale = radius * u.powf(1.0 / (2.0 * d as f64)) / nrm.max(f64::MIN_POSITIVE);
    for z in &mut v {
        *z *= scale;
    }
    v
}

/// `count` seeded ball points.
pub fn ball_points(d: usize, count: usize, radius: f64, seed: u64) -> Vec<Vec<C64>> {
    let mut rng = seeded_rng(seed);
    (0..count).map(|_| ball_point(d, radius, &mut rng)).collect()
}

/// Random unitary (Haar-ish via QR of a Gaussian matrix), seeded.
pub fn random_unitary(n: usize, rng: &mut ChaCha8Rng) -> CMat {
    let g = CMat::from_fn(n, n, |_, _| {
        let (re, im) = gaussian_pair(rng);
        cplx(re, im)
    });
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    // Fix column phases so the decomposition is unique.
    for j in 0..n {
        let rj = r[(j, j)];
        if rj.norm() > 0.0 {
            let ph = rj / cplx(rj.norm(), 0.0);
            let col = q.column(j) * ph;
            q.set_column(j, &col);
        }
    }
    q
}
