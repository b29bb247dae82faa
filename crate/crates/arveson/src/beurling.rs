//! Homogeneous interpolation data -> output pairs -> (renormalize) ->
//! Cholesky completion -> certified inner representer of the solution
//! subspace; plus ball Blaschke factors, the realization-side inner
//! certificate, and the exact-rational Hankel rank probe.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::colligation::{structure_report, taylor, Colligation, OutputPair, StructureReport};
use crate::error::{EngineError, Result};
use crate::kernels::{ball_norm, d_subspace, weakly_coisometric_check};
use crate::linalg::{cplx, identity, opnorm, psd_factor, psd_sqrt, C64, CMat};
use crate::mindex::{ArvesonElement, MultiIndex};
use crate::observability::{
    annihilator_residual, renormalize_exactly_observable, strong_stability, StabilityReport,
    DEFAULT_STABILITY_HORIZON, DEFAULT_STABILITY_TOL,
};

/// One point condition: the functions with x f(omega) = 0.
#[derive(Clone, Debug)]
pub struct PointCondition {
    pub omega: Vec<C64>,
    /// Row functional Y -> C (length = dim Y).
    pub x: Vec<C64>,
}

/// Homogeneous interpolation data cutting out a shift-invariant subspace.
#[derive(Clone, Debug)]
pub enum InterpolationSpec {
    /// Point evaluations x_i f(omega_i) = 0.
    Points { d: usize, conditions: Vec<PointCondition> },
    /// A chain of derivative conditions at one point (Jordan-type state
    /// operators with a single shift block).
    JetChain {
        d: usize,
        omega: Vec<C64>,
        functionals: Vec<Vec<C64>>,
    },
    /// Lower-inclusive index set E at one point: conditions
    /// d^n (x f) / d lambda^n (omega) = 0 for n in E.
    LowerInclusive {
        d: usize,
        omega: Vec<C64>,
        conditions: Vec<(MultiIndex, Vec<C64>)>,
    },
}

impl InterpolationSpec {
    pub fn dim_vars(&self) -> usize {
        match self {
            InterpolationSpec::Points { d, .. }
            | InterpolationSpec::JetChain { d, .. }
            | InterpolationSpec::LowerInclusive { d, .. } => *d,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            InterpolationSpec::Points { d, conditions } => {
                if conditions.is_empty() {
                    return Err(EngineError::Invalid("no interpolation conditions".into()));
                }
                let r = conditions[0].x.len();
                for c in conditions {
                    check_point(*d, &c.omega)?;
                    if c.x.len() != r || r == 0 {
                        return Err(EngineError::Invalid(
                            "functionals must share a nonzero output dimension".into(),
                        ));
                    }
                }
                Ok(())
            }
            InterpolationSpec::JetChain { d, omega, functionals } => {
                check_point(*d, omega)?;
                if functionals.is_empty() || functionals[0].is_empty() {
                    return Err(EngineError::Invalid("no functionals in the jet chain".into()));
                }
                let r = functionals[0].len();
                if functionals.iter().any(|x| x.len() != r) {
                    return Err(EngineError::Invalid(
                        "functionals must share the output dimension".into(),
                    ));
                }
                Ok(())
            }
            InterpolationSpec::LowerInclusive { d, omega, conditions } => {
                check_point(*d, omega)?;
                if conditions.is_empty() {
                    return Err(EngineError::Invalid("empty index set".into()));
                }
                let r = conditions[0].1.len();
                for (n, x) in conditions {
                    if n.dim() != *d {
                        return Err(EngineError::Invalid(format!(
                            "index {:?} has wrong dimension",
                            n.0
                        )));
                    }
                    if x.len() != r || r == 0 {
                        return Err(EngineError::Invalid(
                            "functionals must share a nonzero output dimension".into(),
                        ));
                    }
                }
                // Lower inclusivity: closed under decrementing any slot.
                for (n, _) in conditions {
                    for j in 0..*d {
                        if let Some(m) = n.dec(j) {
                            if !conditions.iter().any(|(k, _)| *k == m) {
                                return Err(EngineError::Invalid(format!(
                                    "index set not lower inclusive: {:?} present, {:?} missing",
                                    n.0, m.0
                                )));
                            }
                        }
                    }
                }
                Ok(())
            }
        }
    }
}

fn check_point(d: usize, omega: &[C64]) -> Result<()> {
    if omega.len() != d {
        return Err(EngineError::Invalid(format!(
            "point has {} coordinates, expected {}",
            omega.len(),
            d
        )));
    }
    let nrm = ball_norm(omega);
    if nrm >= 1.0 {
        return Err(EngineError::PointNotInBall { norm: nrm });
    }
    Ok(())
}

/// The output pair whose annihilator subspace is the solution set of the
/// interpolation conditions. A is commutative by construction and
/// strongly stable because all nodes lie inside the ball; both are
/// verified before returning.
pub fn build_pair(spec: &InterpolationSpec) -> Result<OutputPair> {
    spec.validate()?;
    let d = spec.dim_vars();
    let (a_star, c_star): (Vec<CMat>, CMat) = match spec {
        InterpolationSpec::Points { conditions, .. } => {
            let n = conditions.len();
            let r = conditions[0].x.len();
            let mut a_star = vec![CMat::zeros(n, n); d];
            let mut c_star = CMat::zeros(n, r);
            for (i, cond) in conditions.iter().enumerate() {
                for j in 0..d {
                    a_star[j][(i, i)] = cond.omega[j];
                }
                for (k, &x) in cond.x.iter().enumerate() {
                    c_star[(i, k)] = x;
                }
            }
            (a_star, c_star)
        }
        InterpolationSpec::JetChain { omega, functionals, .. } => {
            let n = functionals.len();
            let r = functionals[0].len();
            let mut a_star = vec![CMat::zeros(n, n); d];
            for (j, block) in a_star.iter_mut().enumerate() {
                for i in 0..n {
                    block[(i, i)] = omega[j];
                    if i + 1 < n {
                        block[(i + 1, i)] = cplx(1.0, 0.0);
                    }
                }
            }
            let mut c_star = CMat::zeros(n, r);
            for (i, x) in functionals.iter().enumerate() {
                for (k, &v) in x.iter().enumerate() {
                    c_star[(i, k)] = v;
                }
            }
            (a_star, c_star)
        }
        InterpolationSpec::LowerInclusive { omega, conditions, .. } => {
            let mut index_set: Vec<MultiIndex> = conditions.iter().map(|(n, _)| n.clone()).collect();
            index_set.sort();
            index_set.dedup();
            let n = index_set.len();
            let r = conditions[0].1.len();
            let pos = |m: &MultiIndex| index_set.iter().position(|k| k == m);
            let mut a_star = vec![CMat::zeros(n, n); d];
            for (j, block) in a_star.iter_mut().enumerate() {
                for (col, m) in index_set.iter().enumerate() {
                    block[(col, col)] = omega[j];
                    if let Some(row) = pos(&m.inc(j)) {
                        block[(row, col)] = cplx(1.0, 0.0);
                    }
                }
            }
            let mut c_star = CMat::zeros(n, r);
            for (i, m) in index_set.iter().enumerate() {
                let x = &conditions.iter().find(|(k, _)| k == m).unwrap().1;
                for (k, &v) in x.iter().enumerate() {
                    c_star[(i, k)] = v;
                }
            }
            (a_star, c_star)
        }
    };
    let a: Vec<CMat> = a_star.iter().map(|m| m.adjoint()).collect();
    let pair = OutputPair::new(d, c_star.adjoint(), a)?;
    let comm = pair.max_commutator();
    if comm > 1e-12 {
        return Err(EngineError::Invalid(format!(
            "constructed tuple fails to commute (residual {:.3e})",
            comm
        )));
    }
    let stab = strong_stability(&pair.a, DEFAULT_STABILITY_TOL, DEFAULT_STABILITY_HORIZON);
    if !stab.stable {
        return Err(EngineError::Invalid(
            "constructed tuple not strongly stable within the horizon".into(),
        ));
    }
    Ok(pair)
}

/// Complete a contractive (preferably isometric) pair to a coisometric
/// colligation by solving [B; D][B; D]^* = I - [A; C][A; C]^*: the factor
/// is the PSD square root restricted to its numerical range, so the input
/// space has minimal dimension rank(M).
pub fn cholesky_complete(pair: &OutputPair, tol: f64) -> Result<Colligation> {
    let p = pair.dim_state();
    let r = pair.dim_output();
    let stacked = pair.stacked();
    let m = identity(pair.d * p + r) - &stacked * stacked.adjoint();
    let min_eig = crate::linalg::min_eig_hermitian(&m);
    let scale = opnorm(&m).max(1.0);
    if min_eig < -tol * scale {
        return Err(EngineError::NotPsd { min_eig });
    }
    let threshold = (tol * opnorm(&m)).max(1e-14);
    let (l, _) = psd_factor(&m, threshold);
    let q = l.ncols();
    let b = (0..pair.d)
        .map(|j| l.view((j * p, 0), (p, q)).into_owned())
        .collect();
    let d_op = l.view((pair.d * p, 0), (r, q)).into_owned();
    Colligation::new(pair.d, pair.a.clone(), b, pair.c.clone(), d_op)
}

/// Per-condition report of the realization-side inner certificate: the
/// transfer function is inner exactly when the state tuple is commutative
/// and strongly stable, the output pair is isometric, and the realization
/// is weakly coisometric.
#[derive(Clone, Debug)]
pub struct InnerCertificate {
    pub commutator_max: f64,
    pub commutative: bool,
    pub stability: StabilityReport,
    pub isometric_pair_residual: f64,
    pub isometric_pair: bool,
    pub weak_coisometry_defect: f64,
    pub weakly_coisometric: bool,
    pub inner: bool,
}

pub fn inner_certify(col: &Colligation, tol: f64, seed: u64) -> Result<InnerCertificate> {
    let pair = col.output_pair();
    let commutator_max = pair.max_commutator();
    let commutative = commutator_max <= tol;
    let stability = strong_stability(&pair.a, DEFAULT_STABILITY_TOL, DEFAULT_STABILITY_HORIZON);
    let isometric_pair_residual = pair.isometric_residual();
    let isometric_pair = isometric_pair_residual <= tol.max(1e-9);
    let dsub = d_subspace(&pair, 150, 1e-8, seed)?;
    let wc = weakly_coisometric_check(col, &dsub, tol)?;
    let inner = commutative && stability.stable && isometric_pair && wc.pass;
    Ok(InnerCertificate {
        commutator_max,
        commutative,
        stability,
        isometric_pair_residual,
        isometric_pair,
        weak_coisometry_defect: wc.defect,
        weakly_coisometric: wc.pass,
        inner,
    })
}

#[derive(Clone, Debug)]
pub struct PipelineOptions {
    pub tol: f64,
    pub seed: u64,
    /// Membership certificate checks S lambda^m u for all |m| <= check_cap.
    pub check_cap: usize,
    /// Taylor degree used for the membership products.
    pub taylor_cap: usize,
    /// Renormalize automatically when the built pair is not isometric.
    pub renormalize: bool,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        PipelineOptions {
            tol: 1e-10,
            seed: 0x0a57_e50f, // fixed default seed
            check_cap: 4,
            taylor_cap: 40,
            renormalize: true,
        }
    }
}

/// Everything the pipeline produced, with its certificates.
#[derive(Clone, Debug)]
pub struct PipelineResult {
    pub colligation: Colligation,
    pub original_pair: OutputPair,
    pub working_pair: OutputPair,
    pub renormalized: bool,
    pub inner: InnerCertificate,
    /// max over |m| <= check_cap and basis u of the annihilation residual
    /// of S lambda^m u against the original pair: the computational
    /// content of Ran M_S being the solution subspace.
    pub membership_residual: f64,
    pub structure: StructureReport,
}

/// spec -> pair -> (renormalize when not isometric) -> Cholesky
/// completion -> inner S with certificates.
pub fn representer_pipeline(
    spec: &InterpolationSpec,
    opts: &PipelineOptions,
) -> Result<PipelineResult> {
    let original_pair = build_pair(spec)?;
    let iso = original_pair.isometric_residual();
    let (working_pair, renormalized) = if iso <= opts.tol.max(1e-12) {
        (original_pair.clone(), false)
    } else if opts.renormalize {
        (renormalize_exactly_observable(&original_pair, opts.tol)?, true)
    } else {
        return Err(EngineError::HypothesesFailed(format!(
            "pair not isometric (residual {:.3e}) and renormalization disabled",
            iso
        )));
    };
    let colligation = cholesky_complete(&working_pair, opts.tol)?;
    let inner = inner_certify(&colligation, opts.tol, opts.seed)?;
    let structure = structure_report(&colligation, opts.tol);
    // Membership: the annihilator of the original pair must kill every
    // product S lambda^m u up to the checked degrees.
    let series = taylor(&colligation, opts.taylor_cap);
    let q = colligation.dim_input();
    let mut membership_residual: f64 = 0.0;
    for m in MultiIndex::up_to(colligation.d, opts.check_cap) {
        let shifted = series.shifted(&m, opts.taylor_cap + opts.check_cap);
        for j in 0..q {
            let f = ArvesonElement::new(shifted.column(j))?;
            let res = annihilator_residual(&original_pair, &f)?;
            membership_residual = membership_residual.max(res.norm());
        }
    }
    Ok(PipelineResult {
        colligation,
        original_pair,
        working_pair,
        renormalized,
        inner,
        membership_residual,
        structure,
    })
}

/// The 1 x d Blaschke factor vanishing at `a`, realized by the unitary
/// colligation [a^*, (1 - a^*a)^{1/2}; (1 - a a^*)^{1/2}, -a].
pub fn blaschke(a: &[C64]) -> Result<Colligation> {
    let d = a.len();
    let nrm = ball_norm(a);
    if nrm >= 1.0 {
        return Err(EngineError::PointNotInBall { norm: nrm });
    }
    let a_row = CMat::from_fn(1, d, |_, j| a[j]);
    let defect_in = psd_sqrt(&(identity(d) - a_row.adjoint() * &a_row)); // d x d
    let c = CMat::from_element(1, 1, cplx((1.0 - nrm * nrm).sqrt(), 0.0));
    let a_blocks: Vec<CMat> = (0..d)
        .map(|j| CMat::from_element(1, 1, a[j].conj()))
        .collect();
    let b_blocks: Vec<CMat> = (0..d)
        .map(|j| CMat::from_fn(1, d, |_, k| defect_in[(j, k)]))
        .collect();
    Colligation::new(d, a_blocks, b_blocks, c, -a_row)
}

/// Exact rank table of the Hankel matrices H_n = [s_{i+j}] for
/// s_k = (k+1)/(2k+1), decided by fraction-free (Bareiss) elimination
/// over arbitrary-size integers after clearing denominators.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HankelRank {
    pub n: usize,
    pub rank: usize,
    pub full: bool,
}

pub const HANKEL_BOUND: usize = 64;

pub fn hankel_probe(n_max: usize) -> Result<Vec<HankelRank>> {
    if n_max > HANKEL_BOUND {
        return Err(EngineError::HankelBound {
            n: n_max,
            bound: HANKEL_BOUND,
        });
    }
    let mut out = Vec::with_capacity(n_max + 1);
    for n in 0..=n_max {
        let size = n + 1;
        // s_k = (k+1)/(2k+1); clear denominators by the lcm of the odd
        // numbers 2k+1, k <= 2n.
        let mut lcm = BigInt::one();
        for k in 0..=2 * n {
            let den = BigInt::from(2 * k + 1);
            let g = gcd(lcm.clone(), den.clone());
            lcm = lcm * den / g;
        }
        let mut mat = vec![vec![BigInt::zero(); size]; size];
        for (i, row) in mat.iter_mut().enumerate() {
            for (j, entry) in row.iter_mut().enumerate() {
                let k = i + j;
                *entry = BigInt::from(k + 1) * (&lcm / BigInt::from(2 * k + 1));
            }
        }
        let rank = bareiss_rank(mat);
        out.push(HankelRank {
            n,
            rank,
            full: rank == size,
        });
    }
    Ok(out)
}

fn gcd(mut a: BigInt, mut b: BigInt) -> BigInt {
    a = a.abs();
    b = b.abs();
    while !b.is_zero() {
        let r = &a % &b;
        a = b;
        b = r;
    }
    a
}

/// Rank by one-step fraction-free Gaussian elimination; all divisions are
/// exact in the integers.
pub fn bareiss_rank(mut m: Vec<Vec<BigInt>>) -> usize {
    let rows = m.len();
    if rows == 0 {
        return 0;
    }
    let cols = m[0].len();
    let mut prev = BigInt::one();
    let mut rank = 0;
    let mut row = 0;
    for col in 0..cols {
        if row == rows {
            break;
        }
        let Some(pivot_row) = (row..rows).find(|&i| !m[i][col].is_zero()) else {
            continue;
        };
        m.swap(row, pivot_row);
        for i in (row + 1)..rows {
            for j in (col + 1)..cols {
                let t = &m[row][col] * &m[i][j] - &m[i][col] * &m[row][j];
                m[i][j] = t / &prev;
            }
            m[i][col] = BigInt::zero();
        }
        prev = m[row][col].clone();
        rank += 1;
        row += 1;
    }
    rank
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::colligation::transfer_eval;
    use crate::demo;
    use crate::kernels::{ball_inner, kernel_ks};
    use crate::linalg::ball_points;
    use crate::mindex::TruncatedSeries;

    fn re(x: f64) -> C64 {
        cplx(x, 0.0)
    }

    fn origin_spec() -> InterpolationSpec {
        InterpolationSpec::Points {
            d: 2,
            conditions: vec![PointCondition {
                omega: vec![re(0.0), re(0.0)],
                x: vec![re(1.0)],
            }],
        }
    }

    fn degree_two_jet_spec() -> InterpolationSpec {
        // E = {(0,0), (1,0), (0,1)} at the origin with x = 1 on E: the
        // solution set is f(0) = df/dl1(0) = df/dl2(0) = 0.
        InterpolationSpec::LowerInclusive {
            d: 2,
            omega: vec![re(0.0), re(0.0)],
            conditions: vec![
                (MultiIndex(vec![0, 0]), vec![re(1.0)]),
                (MultiIndex(vec![1, 0]), vec![re(1.0)]),
                (MultiIndex(vec![0, 1]), vec![re(1.0)]),
            ],
        }
    }

    #[test]
    fn build_pair_single_origin() {
        let pair = build_pair(&origin_spec()).unwrap();
        assert_eq!(pair.dim_state(), 1);
        assert!(opnorm(&pair.a[0]) < 1e-15 && opnorm(&pair.a[1]) < 1e-15);
        assert!((pair.c[(0, 0)] - re(1.0)).norm() < 1e-15);
    }

    #[test]
    fn build_pair_two_points_diagonal() {
        let spec = InterpolationSpec::Points {
            d: 2,
            conditions: vec![
                PointCondition {
                    omega: vec![re(0.5), re(0.0)],
                    x: vec![re(1.0)],
                },
                PointCondition {
                    omega: vec![re(0.0), re(0.5)],
                    x: vec![re(1.0)],
                },
            ],
        };
        let pair = build_pair(&spec).unwrap();
        // A_1^* = diag(0.5, 0), A_2^* = diag(0, 0.5), C^* = [1; 1].
        assert!((pair.a[0].adjoint()[(0, 0)] - re(0.5)).norm() < 1e-15);
        assert!(pair.a[0].adjoint()[(1, 1)].norm() < 1e-15);
        assert!((pair.a[1].adjoint()[(1, 1)] - re(0.5)).norm() < 1e-15);
        assert!((pair.c.adjoint()[(0, 0)] - re(1.0)).norm() < 1e-15);
        assert!((pair.c.adjoint()[(1, 0)] - re(1.0)).norm() < 1e-15);
    }

    #[test]
    fn build_pair_lower_inclusive_membership() {
        // The annihilator of the constructed pair is the solution set of
        // the jet conditions: monomials of degree >= 2 pass, low degrees
        // fail.
        let pair = build_pair(&degree_two_jet_spec()).unwrap();
        assert_eq!(pair.dim_state(), 3);
        // Each A_j has a single off-diagonal 1 (shift block).
        for j in 0..2 {
            let nnz = pair.a[j].iter().filter(|z| z.norm() > 0.0).count();
            assert_eq!(nnz, 1);
        }
        for (mono, in_subspace) in [
            (vec![0, 0], false),
            (vec![1, 0], false),
            (vec![0, 1], false),
            (vec![2, 0], true),
            (vec![1, 1], true),
            (vec![0, 2], true),
            (vec![3, 0], true),
        ] {
            let f = ArvesonElement::new(TruncatedSeries::monomial(
                2,
                4,
                MultiIndex(mono.clone()),
            ))
            .unwrap();
            let res = annihilator_residual(&pair, &f).unwrap().norm();
            assert_eq!(res < 1e-13, in_subspace, "monomial {:?} res {}", mono, res);
        }
    }

    #[test]
    fn build_pair_jet_chain_matches_display() {
        let spec = InterpolationSpec::JetChain {
            d: 1,
            omega: vec![re(0.3)],
            functionals: vec![vec![re(1.0)], vec![re(0.0)]],
        };
        let pair = build_pair(&spec).unwrap();
        let a_star = pair.a[0].adjoint();
        assert!((a_star[(0, 0)] - re(0.3)).norm() < 1e-15);
        assert!((a_star[(1, 0)] - re(1.0)).norm() < 1e-15);
        assert!(a_star[(0, 1)].norm() < 1e-15);
        // Membership: f with f(0.3) = 0 and f'(0.3) = 0, e.g.
        // (lambda - 0.3)^2.
        let mut s = TruncatedSeries::zero(1, 3, 1, 1);
        s.set(MultiIndex(vec![0]), CMat::from_element(1, 1, re(0.09)));
        s.set(MultiIndex(vec![1]), CMat::from_element(1, 1, re(-0.6)));
        s.set(MultiIndex(vec![2]), CMat::from_element(1, 1, re(1.0)));
        let f = ArvesonElement::new(s).unwrap();
        assert!(annihilator_residual(&pair, &f).unwrap().norm() < 1e-14);
    }

    #[test]
    fn build_pair_rejects_boundary_point() {
        let spec = InterpolationSpec::Points {
            d: 2,
            conditions: vec![PointCondition {
                omega: vec![re(1.0), re(0.0)],
                x: vec![re(1.0)],
            }],
        };
        assert!(matches!(
            build_pair(&spec),
            Err(EngineError::PointNotInBall { .. })
        ));
    }

    #[test]
    fn validate_rejects_non_lower_inclusive() {
        let spec = InterpolationSpec::LowerInclusive {
            d: 2,
            omega: vec![re(0.0), re(0.0)],
            conditions: vec![(MultiIndex(vec![1, 1]), vec![re(1.0)])],
        };
        assert!(spec.validate().is_err());
    }

    #[test]
    fn cholesky_origin_gives_coordinate_row() {
        let pair = build_pair(&origin_spec()).unwrap();
        let col = cholesky_complete(&pair, 1e-10).unwrap();
        assert_eq!(col.dim_input(), 2);
        let rep = structure_report(&col, 1e-10);
        assert!(rep.coisometric);
        // S S^* = <l, l> and D = 0: S is Z up to a right unitary.
        assert!(opnorm(&col.d_op) < 1e-12);
        for l in ball_points(2, 6, 0.8, 91) {
            let s = transfer_eval(&col, &l).unwrap();
            let ss = (s.clone() * s.adjoint())[(0, 0)];
            assert!((ss - ball_inner(&l, &l)).norm() < 1e-12);
        }
    }

    #[test]
    fn cholesky_inner_row_pair_rank_four() {
        let pair = demo::degree_two_inner_pair();
        // Eigen-count oracle on the 7x7 defect.
        let stacked = pair.stacked();
        let m = identity(7) - &stacked * stacked.adjoint();
        let eigs = crate::linalg::eigh(&m).0;
        let rank = eigs.iter().filter(|&&v| v > 1e-10).count();
        assert_eq!(rank, 4);
        let col = cholesky_complete(&pair, 1e-10).unwrap();
        assert_eq!(col.dim_input(), 4);
        let rep = structure_report(&col, 1e-10);
        assert!(rep.coisometric, "residual {}", rep.coisometric_residual);
        // The completed transfer function is an extended inner function
        // with the same de Branges-Rovnyak kernel.
        for l in ball_points(2, 5, 0.7, 93) {
            for z in ball_points(2, 5, 0.7, 94) {
                let k = kernel_ks(|p| transfer_eval(&col, p), &l, &z).unwrap();
                let expect = re(1.0) + ball_inner(&l, &z);
                assert!((k[(0, 0)] - expect).norm() < 1e-11);
            }
        }
        let cert = inner_certify(&col, 1e-9, 95).unwrap();
        assert!(cert.inner);
    }

    #[test]
    fn cholesky_zero_pair_shapes() {
        let pair = OutputPair::new(
            2,
            CMat::zeros(1, 2),
            vec![CMat::zeros(2, 2), CMat::zeros(2, 2)],
        )
        .unwrap();
        let col = cholesky_complete(&pair, 1e-10).unwrap();
        // M = I_5: five input columns.
        assert_eq!(col.dim_input(), 5);
        assert!(structure_report(&col, 1e-10).coisometric);
    }

    #[test]
    fn cholesky_rejects_expansive_pair() {
        let pair = OutputPair::new(
            1,
            CMat::from_element(1, 1, re(1.2)),
            vec![CMat::from_element(1, 1, re(0.5))],
        )
        .unwrap();
        assert!(matches!(
            cholesky_complete(&pair, 1e-10),
            Err(EngineError::NotPsd { .. })
        ));
    }

    #[test]
    fn pipeline_origin_matches_z_kernel() {
        let res = representer_pipeline(&origin_spec(), &PipelineOptions::default()).unwrap();
        assert!(!res.renormalized);
        assert!(res.inner.inner);
        assert!(res.membership_residual <= 1e-10);
        for l in ball_points(2, 5, 0.7, 97) {
            for z in ball_points(2, 5, 0.7, 98) {
                let k = kernel_ks(|p| transfer_eval(&res.colligation, p), &l, &z).unwrap();
                assert!((k[(0, 0)] - re(1.0)).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn pipeline_jet_spec_reproduces_inner_row_kernel() {
        let res = representer_pipeline(&degree_two_jet_spec(), &PipelineOptions::default())
            .unwrap();
        assert!(res.renormalized);
        assert!(res.inner.inner);
        assert!(res.membership_residual <= 1e-9);
        for l in ball_points(2, 5, 0.7, 99) {
            for z in ball_points(2, 5, 0.7, 100) {
                let k = kernel_ks(|p| transfer_eval(&res.colligation, p), &l, &z).unwrap();
                let expect = re(1.0) + ball_inner(&l, &z);
                assert!((k[(0, 0)] - expect).norm() < 1e-9);
            }
        }
    }

    #[test]
    fn pipeline_offcenter_point_certified() {
        let spec = InterpolationSpec::Points {
            d: 2,
            conditions: vec![PointCondition {
                omega: vec![re(0.5), re(0.0)],
                x: vec![re(1.0)],
            }],
        };
        let res = representer_pipeline(&spec, &PipelineOptions::default()).unwrap();
        assert!(res.renormalized);
        assert!(res.inner.inner);
        assert!(res.membership_residual <= 1e-10);
        // The produced S vanishes where the condition demands.
        let s_at_node = transfer_eval(&res.colligation, &[re(0.5), re(0.0)]).unwrap();
        assert!(opnorm(&s_at_node) < 1e-10);
    }

    #[test]
    fn inner_certify_flags_inner_and_noninner() {
        let cert = inner_certify(&demo::degree_two_inner_row(), 1e-9, 111).unwrap();
        assert!(cert.inner);
        // The coisometric nilpotent colligation realizes a non-inner row:
        // its output pair is not isometric.
        let cert = inner_certify(&demo::nilpotent_coisometric_colligation(), 1e-9, 113).unwrap();
        assert!(!cert.inner);
        assert!(cert.commutative && cert.stability.stable);
        assert!(!cert.isometric_pair);
    }

    #[test]
    fn blaschke_at_zero_is_coordinate_row() {
        let col = blaschke(&[re(0.0), re(0.0)]).unwrap();
        for l in ball_points(2, 5, 0.8, 115) {
            let s = transfer_eval(&col, &l).unwrap();
            assert!((s[(0, 0)] - l[0]).norm() < 1e-14);
            assert!((s[(0, 1)] - l[1]).norm() < 1e-14);
        }
    }

    #[test]
    fn blaschke_vanishes_at_node_and_is_unitary() {
        let a = [re(0.3), re(0.4)];
        let col = blaschke(&a).unwrap();
        let rep = structure_report(&col, 1e-12);
        assert!(rep.unitary);
        let at_a = transfer_eval(&col, &a).unwrap();
        assert!(opnorm(&at_a) < 1e-12);
        let cert = inner_certify(&col, 1e-9, 117).unwrap();
        assert!(cert.inner);
    }

    #[test]
    fn blaschke_univariate_closed_form() {
        let col = blaschke(&[re(0.5)]).unwrap();
        for l in [re(0.2), re(-0.7), cplx(0.1, 0.3)] {
            let s = transfer_eval(&col, &[l]).unwrap()[(0, 0)];
            let expect = (l - re(0.5)) / (re(1.0) - re(0.5) * l);
            assert!((s - expect).norm() < 1e-13);
        }
    }

    #[test]
    fn blaschke_rejects_outside_point() {
        assert!(matches!(
            blaschke(&[re(0.8), re(0.7)]),
            Err(EngineError::PointNotInBall { .. })
        ));
    }

    #[test]
    fn hankel_probe_full_ranks() {
        let table = hankel_probe(8).unwrap();
        assert_eq!(table.len(), 9);
        for entry in &table {
            assert!(entry.full, "H_{} rank {}", entry.n, entry.rank);
            assert_eq!(entry.rank, entry.n + 1);
        }
    }

    #[test]
    fn hankel_two_by_two_determinant_oracle() {
        // det H_1 = 1 * 3/5 - (2/3)^2 = 7/45 != 0: rank 2.
        let det_num = 1 * 3 * 9 - 2 * 2 * 5; // over the denominator 45
        assert_eq!(det_num, 7);
        let table = hankel_probe(1).unwrap();
        assert_eq!(table[1].rank, 2);
    }

    #[test]
    fn hankel_probe_respects_bound() {
        assert!(matches!(
            hankel_probe(65),
            Err(EngineError::HankelBound { .. })
        ));
    }

    #[test]
    fn bareiss_rank_on_known_matrices() {
        // Geometric Hankel [2^{-(i+j)}] has rank 1: scaled to integers
        // [2^{2n - i - j}].
        let n = 3usize;
        let m: Vec<Vec<BigInt>> = (0..=n)
            .map(|i| {
                (0..=n)
                    .map(|j| BigInt::from(1u64 << (2 * n - i - j)))
                    .collect()
            })
            .collect();
        assert_eq!(bareiss_rank(m), 1);
        let ident: Vec<Vec<BigInt>> = (0..4)
            .map(|i| {
                (0..4)
                    .map(|j| if i == j { BigInt::one() } else { BigInt::zero() })
                    .collect()
            })
            .collect();
        assert_eq!(bareiss_rank(ident), 4);
        let zero = vec![vec![BigInt::zero(); 3]; 3];
        assert_eq!(bareiss_rank(zero), 0);
    }
}
