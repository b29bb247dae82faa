//! Kernel evaluation and comparison: K_S, K_{C,A}, the defect
//! decomposition relating them through I - U U^*, the subspace D spanned
//! by Z(zeta)^* (I - A^* Z(zeta)^*)^{-1} C^* y, and the weak-coisometry
//! certificate (U^* isometric on D (+) Y).

use crate::colligation::{transfer_eval, Colligation, OutputPair};
use crate::error::{EngineError, Result};
use crate::linalg::{
    ball_points, canonical_subspace_basis, cplx, identity, opnorm, principal_angles, range_basis,
    C64, CMat,
};
use crate::mindex::MultiIndex;

/// <lambda, zeta> = sum_j lambda_j conj(zeta_j).
pub fn ball_inner(lambda: &[C64], zeta: &[C64]) -> C64 {
    lambda
        .iter()
        .zip(zeta.iter())
        .map(|(l, z)| l * z.conj())
        .sum()
}

pub fn ball_norm(point: &[C64]) -> f64 {
    point.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// K_S(lambda, zeta) = (I - S(lambda) S(zeta)^*) / (1 - <lambda, zeta>)
/// for any Schur-function evaluator.
pub fn kernel_ks<F>(s: F, lambda: &[C64], zeta: &[C64]) -> Result<CMat>
where
    F: Fn(&[C64]) -> Result<CMat>,
{
    let sl = s(lambda)?;
    let sz = s(zeta)?;
    let den = cplx(1.0, 0.0) - ball_inner(lambda, zeta);
    if den.norm() == 0.0 {
        return Err(EngineError::Invalid(
            "kernel undefined where <lambda, zeta> = 1".into(),
        ));
    }
    let r = sl.nrows();
    Ok((identity(r) - sl * sz.adjoint()) / den)
}

/// K_{C,A}(lambda, zeta) =
/// C (I - Z(lambda)A)^{-1} (I - A^* Z(zeta)^*)^{-1} C^* via two direct
/// solves.
pub fn kernel_kca(pair: &OutputPair, lambda: &[C64], zeta: &[C64]) -> Result<CMat> {
    let right = pair.resolvent_adjoint_solve(zeta, &pair.c.adjoint())?;
    let both = pair.resolvent_solve(lambda, &right)?;
    Ok(&pair.c * both)
}

/// The three terms of the kernel identity
/// K_S = K_{C,A} + [C(I-ZA)^{-1}Z, I] (I-UU^*)/(1-<l,z>) [Z^*(I-A^*Z^*)^{-1}C^*; I].
#[derive(Clone, Debug)]
pub struct DefectDecomposition {
    pub ks: CMat,
    pub kca: CMat,
    pub residual: CMat,
    /// || K_S - K_{C,A} - residual ||: how well the identity closed.
    pub identity_residual: f64,
}

/// Left factor [C (I - Z(lambda)A)^{-1} Z(lambda), I_Y] : X^d (+) Y -> Y.
fn left_factor(col: &Colligation, lambda: &[C64]) -> Result<CMat> {
    let pair = col.output_pair();
    let p = col.dim_state();
    let r = col.dim_output();
    let w = pair.resolvent_solve(lambda, &identity(p))?; // (I - ZA)^{-1}
    let cw = &col.c * w; // r x p
    let mut out = CMat::zeros(r, col.d * p + r);
    for j in 0..col.d {
        out.view_mut((0, j * p), (r, p)).copy_from(&(&cw * lambda[j]));
    }
    out.view_mut((0, col.d * p), (r, r)).copy_from(&identity(r));
    Ok(out)
}

/// Right factor [Z(zeta)^* (I - A^* Z(zeta)^*)^{-1} C^*; I_Y] : Y -> X^d (+) Y.
fn right_factor(col: &Colligation, zeta: &[C64]) -> Result<CMat> {
    let pair = col.output_pair();
    let p = col.dim_state();
    let r = col.dim_output();
    let v = pair.resolvent_adjoint_solve(zeta, &pair.c.adjoint())?; // p x r
    let mut out = CMat::zeros(col.d * p + r, r);
    for j in 0..col.d {
        out.view_mut((j * p, 0), (p, r))
            .copy_from(&(&v * zeta[j].conj()));
    }
    out.view_mut((col.d * p, 0), (r, r)).copy_from(&identity(r));
    Ok(out)
}

/// Evaluate both kernels and the I - U U^* coupling term at one point
/// pair. The identity holds for every colligation; positive semidefinite
/// residual on diagonal pairs needs contractivity.
pub fn defect_decomposition(
    col: &Colligation,
    lambda: &[C64],
    zeta: &[C64],
) -> Result<DefectDecomposition> {
    let pair = col.output_pair();
    let ks = kernel_ks(|pt| transfer_eval(col, pt), lambda, zeta)?;
    let kca = kernel_kca(&pair, lambda, zeta)?;
    let u = col.u_matrix();
    let defect = identity(u.nrows()) - &u * u.adjoint();
    let den = cplx(1.0, 0.0) - ball_inner(lambda, zeta);
    let residual = left_factor(col, lambda)? * defect * right_factor(col, zeta)? / den;
    let identity_residual = opnorm(&(&ks - &kca - &residual));
    Ok(DefectDecomposition {
        ks,
        kca,
        residual,
        identity_residual,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DMethod {
    Series,
    Sampled,
}

/// Orthonormal basis of the subspace D in X^d together with the
/// diagnostics of its construction.
#[derive(Clone, Debug)]
pub struct DSubspace {
    pub basis: CMat,
    pub method: DMethod,
    /// Series truncation reached coefficient decay below threshold.
    pub series_terminated: bool,
    /// Largest principal angle between the series and sampled bases.
    pub cross_check_angle: f64,
    pub warning: Option<String>,
}

impl DSubspace {
    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    /// Orthonormal basis of the complement of D inside X^d, canonicalized.
    pub fn complement(&self, tol: f64) -> CMat {
        let full = crate::linalg::complement_basis(&self.basis);
        canonical_subspace_basis(&full, tol.max(1e-12))
    }
}

const SERIES_DECAY: f64 = 1e-12;

/// Build D by the series method: with F_n the word sum of A^* over the
/// abelianization class applied to C^*, the generators are the slot
/// assemblies h_m = sum_j E_j F_{m - e_j}; the span over zeta of the
/// defining vectors equals the span of all h_m. Generator columns are
/// normalized before the rank decision so late layers with large word
/// sums cannot swamp early directions, and the recursion stops as soon as
/// the span saturates X^d (it can only grow). A sampled random-grid
/// construction is always run as a cross-check.
pub fn d_subspace(pair: &OutputPair, cap: usize, tol: f64, seed: u64) -> Result<DSubspace> {
    let p = pair.dim_state();
    let r = pair.dim_output();
    let dp = pair.d * p;
    let scale0 = opnorm(&pair.c.adjoint()).max(f64::MIN_POSITIVE);
    // F-recursion layer by layer; the h-generators of level k+1 are the
    // slot assemblies of F-layer k.
    let mut layer: std::collections::BTreeMap<MultiIndex, CMat> =
        std::collections::BTreeMap::new();
    layer.insert(MultiIndex::zero(pair.d), pair.c.adjoint());
    let mut columns: Vec<crate::linalg::CVec> = Vec::new();
    let mut q_track = CMat::zeros(dp, 0);
    let mut tracked = 0usize;
    let mut terminated = false;
    let mut full = false;
    for _deg in 0..cap {
        // h_m = sum_j E_j F_{m - e_j} over all m reachable from this
        // layer, one normalized column per output direction.
        let mut level: std::collections::BTreeMap<MultiIndex, CMat> =
            std::collections::BTreeMap::new();
        for (n, f) in &layer {
            for j in 0..pair.d {
                let m = n.inc(j);
                let h = level
                    .entry(m)
                    .or_insert_with(|| CMat::zeros(dp, r));
                let mut view = h.view_mut((j * p, 0), (p, r));
                view += f;
            }
        }
        for h in level.values() {
            for col in 0..r {
                let v = h.column(col).into_owned();
                let nrm = v.norm();
                if nrm > 0.0 {
                    columns.push(v / cplx(nrm, 0.0));
                }
            }
        }
        // Track the span incrementally: D can only grow, so a saturated
        // span ends the recursion.
        for c in columns.iter().skip(tracked) {
            if q_track.ncols() == dp {
                break;
            }
            let mut v = c.clone();
            for _ in 0..2 {
                let coeff = q_track.adjoint() * &v;
                v -= &q_track * coeff;
            }
            let nrm = v.norm();
            if nrm > 1e-8 {
                let mut grown = CMat::zeros(dp, q_track.ncols() + 1);
                grown
                    .view_mut((0, 0), (dp, q_track.ncols()))
                    .copy_from(&q_track);
                grown.set_column(q_track.ncols(), &(v / cplx(nrm, 0.0)));
                q_track = grown;
            }
        }
        tracked = columns.len();
        if q_track.ncols() == dp {
            full = true;
            terminated = true;
            break;
        }
        // Next F-layer, with the decay stop.
        let mut next: std::collections::BTreeMap<MultiIndex, CMat> =
            std::collections::BTreeMap::new();
        for (n, f) in &layer {
            for (j, aj) in pair.a.iter().enumerate() {
                let m = n.inc(j);
                let term = aj.adjoint() * f;
                match next.get_mut(&m) {
                    Some(acc) => *acc += term,
                    None => {
                        next.insert(m, term);
                    }
                }
            }
        }
        let level_max = next.values().map(|m| opnorm(m)).fold(0.0, f64::max);
        layer = next;
        if level_max < SERIES_DECAY * scale0 {
            terminated = true;
            break;
        }
    }
    let series_basis = if full {
        CMat::identity(dp, dp)
    } else {
        let mut stack = CMat::zeros(dp, columns.len());
        for (i, c) in columns.iter().enumerate() {
            stack.set_column(i, c);
        }
        canonical_subspace_basis(&range_basis(&stack, 1e-10), 1e-10)
    };

    // Sampled cross-check at 2 dim(D) random points.
    let count = (2 * series_basis.ncols()).max(2);
    let pts = ball_points(pair.d, count, 0.7, seed);
    let mut sampled = CMat::zeros(dp, count * r);
    for (i, zeta) in pts.iter().enumerate() {
        let v = pair.resolvent_adjoint_solve(zeta, &pair.c.adjoint())?;
        for j in 0..pair.d {
            sampled
                .view_mut((j * p, i * r), (p, r))
                .copy_from(&(&v * zeta[j].conj()));
        }
    }
    let sampled_basis = range_basis(&sampled, 1e-10);
    let angles = principal_angles(&series_basis, &sampled_basis);
    let cross_check_angle = angles.iter().cloned().fold(0.0, f64::max);
    let dims_agree = sampled_basis.ncols() == series_basis.ncols();

    let warning = if !terminated {
        Some(format!(
            "series coefficients not decayed at degree cap {}; span may be incomplete (is A strongly stable?)",
            cap
        ))
    } else if !dims_agree || cross_check_angle > tol {
        Some(format!(
            "sampled cross-check disagrees: dims {} vs {}, max principal angle {:.3e}",
            series_basis.ncols(),
            sampled_basis.ncols(),
            cross_check_angle
        ))
    } else {
        None
    };
    Ok(DSubspace {
        basis: series_basis,
        method: DMethod::Series,
        series_terminated: terminated,
        cross_check_angle,
        warning,
    })
}

/// Outcome of the weak-coisometry certificate.
#[derive(Clone, Debug)]
pub struct WeakCoisometryCheck {
    pub pass: bool,
    /// || P^* (I - U U^*) P || with P the isometric embedding of D (+) Y.
    pub defect: f64,
}

/// U^* is isometric on D (+) Y exactly when the compression of I - U U^*
/// to that subspace vanishes.
pub fn weakly_coisometric_check(
    col: &Colligation,
    dsub: &DSubspace,
    tol: f64,
) -> Result<WeakCoisometryCheck> {
    let p = col.dim_state();
    let r = col.dim_output();
    let dp = col.d * p;
    if dsub.basis.nrows() != dp {
        return Err(EngineError::ShapeMismatch(format!(
            "D lives in C^{}, colligation state stack is C^{}",
            dsub.basis.nrows(),
            dp
        )));
    }
    let k = dsub.dim();
    let mut emb = CMat::zeros(dp + r, k + r);
    emb.view_mut((0, 0), (dp, k)).copy_from(&dsub.basis);
    emb.view_mut((dp, k), (r, r)).copy_from(&identity(r));
    let u = col.u_matrix();
    let defect_full = identity(dp + r) - &u * u.adjoint();
    let defect = opnorm(&(emb.adjoint() * defect_full * &emb));
    Ok(WeakCoisometryCheck {
        pass: defect <= tol,
        defect,
    })
}

/// Largest pointwise mismatch || K_S - K_{C,A} || over a list of point
/// pairs (the kernel form of the weak-coisometry property).
pub fn max_kernel_mismatch(col: &Colligation, pairs: &[(Vec<C64>, Vec<C64>)]) -> Result<f64> {
    let pair = col.output_pair();
    let mut worst: f64 = 0.0;
    for (l, z) in pairs {
        let ks = kernel_ks(|pt| transfer_eval(col, pt), l, z)?;
        let kca = kernel_kca(&pair, l, z)?;
        worst = worst.max(opnorm(&(ks - kca)));
    }
    Ok(worst)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KernelKind {
    KS,
    KCA,
    Residual,
}

/// Sampled kernel values over all ordered pairs of a base-point list.
#[derive(Clone, Debug)]
pub struct KernelGrid {
    pub which: KernelKind,
    pub base_points: Vec<Vec<C64>>,
    /// Row-major over (i, j): value at (lambda_i, zeta_j).
    pub values: Vec<CMat>,
    pub value_dim: usize,
}

impl KernelGrid {
    /// Evaluate a kernel on all ordered pairs of the base points. Points
    /// must lie strictly inside the ball; values must be Hermitian on the
    /// diagonal pairs.
    pub fn from_fn<F>(which: KernelKind, base_points: Vec<Vec<C64>>, f: F) -> Result<Self>
    where
        F: Fn(&[C64], &[C64]) -> Result<CMat>,
    {
        for p in &base_points {
            let nrm = ball_norm(p);
            if nrm >= 1.0 {
                return Err(EngineError::PointNotInBall { norm: nrm });
            }
        }
        let n = base_points.len();
        let mut values = Vec::with_capacity(n * n);
        let mut value_dim = 0;
        for i in 0..n {
            for j in 0..n {
                let v = f(&base_points[i], &base_points[j])?;
                if i == 0 && j == 0 {
                    value_dim = v.nrows();
                }
                if i == j {
                    let herm = opnorm(&(&v - v.adjoint()));
                    let scale = opnorm(&v).max(1.0);
                    if herm > 1e-10 * scale {
                        return Err(EngineError::Invalid(format!(
                            "kernel not Hermitian on the diagonal pair {} (residual {:.3e})",
                            i, herm
                        )));
                    }
                }
                values.push(v);
            }
        }
        Ok(KernelGrid {
            which,
            base_points,
            values,
            value_dim,
        })
    }

    pub fn value(&self, i: usize, j: usize) -> &CMat {
        &self.values[i * self.base_points.len() + j]
    }

    /// Hermitian-symmetry defect max || K(l_i, l_j) - K(l_j, l_i)^* ||.
    pub fn hermitian_defect(&self) -> f64 {
        let n = self.base_points.len();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                worst = worst.max(opnorm(&(self.value(i, j) - self.value(j, i).adjoint())));
            }
        }
        worst
    }
}

#[derive(Clone, Debug)]
pub struct PsdCheck {
    pub min_eig: f64,
    pub psd: bool,
}

/// Assemble the block Gram matrix [K(lambda_i, lambda_j)] over the grid's
/// base points and test its least eigenvalue against -tol.
pub fn kernel_psd_check(grid: &KernelGrid, tol: f64) -> PsdCheck {
    let n = grid.base_points.len();
    let r = grid.value_dim;
    let mut gram = CMat::zeros(n * r, n * r);
    for i in 0..n {
        for j in 0..n {
            gram.view_mut((i * r, j * r), (r, r)).copy_from(grid.value(i, j));
        }
    }
    let min_eig = crate::linalg::min_eig_hermitian(&gram);
    PsdCheck {
        min_eig,
        psd: min_eig >= -tol,
    }
}
