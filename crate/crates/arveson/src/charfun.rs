//! Commutative row contractions: Halmos unitary dilation, characteristic
//! function, purity, and the coincidence conditions telling when a
//! Schur-class function is (up to constant unitaries) such a
//! characteristic function.

use crate::colligation::{structure_report, Colligation};
use crate::error::{EngineError, Result};
use crate::linalg::{identity, opnorm, psd_sqrt, C64, CMat};

/// A d-tuple T = (T_1, ..., T_d) with contractive block row
/// [T_1 ... T_d] : X^d -> X.
#[derive(Clone, Debug)]
pub struct RowContraction {
    pub d: usize,
    pub t: Vec<CMat>,
    pub row_norm: f64,
    pub commutator_max: f64,
    pub commutative: bool,
}

impl RowContraction {
    pub fn new(d: usize, t: Vec<CMat>, tol: f64) -> Result<Self> {
        if t.len() != d || d == 0 {
            return Err(EngineError::ShapeMismatch(format!(
                "expected {} blocks, got {}",
                d,
                t.len()
            )));
        }
        let p = t[0].nrows();
        for tj in &t {
            if tj.nrows() != p || tj.ncols() != p {
                return Err(EngineError::ShapeMismatch(
                    "row contraction blocks must be square of equal size".into(),
                ));
            }
        }
        let row = block_row(&t);
        let row_norm = opnorm(&row);
        if row_norm > 1.0 + tol {
            return Err(EngineError::NotRowContraction { sigma: row_norm });
        }
        let mut commutator_max: f64 = 0.0;
        for i in 0..d {
            for j in (i + 1)..d {
                commutator_max =
                    commutator_max.max(opnorm(&(&t[i] * &t[j] - &t[j] * &t[i])));
            }
        }
        Ok(RowContraction {
            d,
            t,
            row_norm,
            commutator_max,
            commutative: commutator_max <= tol,
        })
    }

    pub fn dim_state(&self) -> usize {
        self.t[0].nrows()
    }
}

fn block_row(t: &[CMat]) -> CMat {
    let p = t[0].nrows();
    let d = t.len();
    let mut row = CMat::zeros(p, d * p);
    for (j, tj) in t.iter().enumerate() {
        row.view_mut((0, j * p), (p, p)).copy_from(tj);
    }
    row
}

/// Orthonormal columns spanning the numerical range of a PSD matrix;
/// the identity when the range is full, so strict contractions keep
/// their literal coordinates.
fn range_embedding(m: &CMat, tol: f64) -> CMat {
    let n = m.nrows();
    let (vals, vecs) = crate::linalg::eigh(m);
    let threshold = (tol * vals[vals.len() - 1].max(0.0)).max(tol);
    let kept: Vec<usize> = (0..n).rev().filter(|&i| vals[i] > threshold).collect();
    if kept.len() == n {
        return identity(n);
    }
    let mut out = CMat::zeros(n, kept.len());
    for (k, &i) in kept.iter().enumerate() {
        out.set_column(k, &vecs.column(i));
    }
    out
}

/// The Halmos unitary dilation of a row contraction as a colligation:
/// A_j = T_j^*, B = D_T|_{defect}, C = D_{T^*}, D = -T|_{defect}.
pub fn halmos_dilation(t: &RowContraction, tol: f64) -> Result<Colligation> {
    let p = t.dim_state();
    let d = t.d;
    let row = block_row(&t.t);
    let dt = psd_sqrt(&(identity(d * p) - row.adjoint() * &row)); // dp x dp
    let dtstar = psd_sqrt(&(identity(p) - &row * row.adjoint())); // p x p
    let v = range_embedding(&(&dt * &dt), tol); // embeds defect of T
    let w = range_embedding(&(&dtstar * &dtstar), tol); // embeds defect of T^*
    let b_full = &dt * &v; // dp x q
    let q = b_full.ncols();
    let a = t.t.iter().map(|tj| tj.adjoint()).collect();
    let b = (0..d)
        .map(|j| b_full.view((j * p, 0), (p, q)).into_owned())
        .collect();
    let c = w.adjoint() * &dtstar;
    let d_op = -(w.adjoint() * &row * &v);
    Colligation::new(d, a, b, c, d_op)
}

/// Direct evaluation of the characteristic function
/// theta_T(lambda) = [-T + D_{T^*} (I - Z(lambda) T^*)^{-1} Z(lambda) D_T]
/// compressed to the defect spaces. Kept independent of the colligation
/// route so the two can be checked against each other.
pub fn characteristic_function(t: &RowContraction, tol: f64, lambda: &[C64]) -> Result<CMat> {
    if lambda.len() != t.d {
        return Err(EngineError::ShapeMismatch(format!(
            "point has {} coordinates, tuple has {}",
            lambda.len(),
            t.d
        )));
    }
    let p = t.dim_state();
    let d = t.d;
    let row = block_row(&t.t);
    let dt = psd_sqrt(&(identity(d * p) - row.adjoint() * &row));
    let dtstar = psd_sqrt(&(identity(p) - &row * row.adjoint()));
    let v = range_embedding(&(&dt * &dt), tol);
    let w = range_embedding(&(&dtstar * &dtstar), tol);
    // I - sum_j lambda_j T_j^*.
    let mut sys = identity(p);
    for (j, tj) in t.t.iter().enumerate() {
        sys -= tj.adjoint() * lambda[j];
    }
    // Z(lambda) D_T V : defect -> X.
    let dtv = &dt * &v;
    let q = dtv.ncols();
    let mut zdt = CMat::zeros(p, q);
    for j in 0..d {
        zdt += dtv.view((j * p, 0), (p, q)).into_owned() * lambda[j];
    }
    let solved = sys
        .lu()
        .solve(&zdt)
        .ok_or_else(|| EngineError::SingularResolvent {
            point: crate::colligation::fmt_point(lambda),
        })?;
    Ok(w.adjoint() * (&dtstar * solved - &row * &v))
}

#[derive(Clone, Debug)]
pub struct PurityReport {
    pub sigma_max: f64,
    pub pure: bool,
}

/// A multiplier is pure when no nonzero input attains norm under S(0):
/// in finite dimensions, sigma_max(S(0)) < 1, checked with margin `tol`.
pub fn pure_check(s0: &CMat, tol: f64) -> PurityReport {
    let sigma_max = opnorm(s0);
    PurityReport {
        sigma_max,
        pure: sigma_max <= 1.0 - tol,
    }
}

/// Coincidence with a characteristic function: unitary colligation,
/// commutative state tuple, pure transfer value at zero; plus the
/// equivalent injectivity trio that holds for unitary colligations.
#[derive(Clone, Debug)]
pub struct CoincidenceReport {
    pub unitary: bool,
    pub commutative: bool,
    pub pure: bool,
    pub coincides: bool,
    /// sigma_min(B) > tol.
    pub b_injective: bool,
    /// sigma_min(C^*) > tol.
    pub c_star_injective: bool,
    /// sigma_max(D) < 1 - tol.
    pub d_strict: bool,
    /// The trio above agrees pairwise (meaningful for unitary U).
    pub trio_agree: bool,
}

pub fn coincidence_conditions(col: &Colligation, tol: f64) -> CoincidenceReport {
    let rep = structure_report(col, tol);
    let purity = pure_check(&col.d_op, tol.max(1e-8));
    let p = col.dim_state();
    let q = col.dim_input();
    let dp = col.d * p;
    let mut b_full = CMat::zeros(dp, q);
    for (j, bj) in col.b.iter().enumerate() {
        b_full.view_mut((j * p, 0), (p, q)).copy_from(bj);
    }
    let sigma_min_b = if q == 0 {
        f64::INFINITY
    } else if q > dp {
        0.0
    } else {
        b_full.singular_values().min()
    };
    let cs = col.c.adjoint();
    let r = col.dim_output();
    let sigma_min_cstar = if r == 0 {
        f64::INFINITY
    } else if r > p {
        0.0
    } else {
        cs.singular_values().min()
    };
    let b_injective = sigma_min_b > tol;
    let c_star_injective = sigma_min_cstar > tol;
    let d_strict = purity.pure;
    CoincidenceReport {
        unitary: rep.unitary,
        commutative: rep.commutative_a,
        pure: purity.pure,
        coincides: rep.unitary && rep.commutative_a && purity.pure,
        b_injective,
        c_star_injective,
        d_strict,
        trio_agree: (b_injective == c_star_injective) && (c_star_injective == d_strict),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::colligation::transfer_eval;
    use crate::demo;
    use crate::kernels::{kernel_ks, kernel_psd_check, KernelGrid, KernelKind};
    use crate::linalg::{ball_points, seeded_rng};

    fn re(x: f64) -> C64 {
        cplx(x, 0.0)
    }

    #[test]
    fn zero_tuple_dilates_to_coordinate_row() {
        let t = RowContraction::new(
            2,
            vec![CMat::zeros(1, 1), CMat::zeros(1, 1)],
            1e-10,
        )
        .unwrap();
        let col = halmos_dilation(&t, 1e-10).unwrap();
        assert!(structure_report(&col, 1e-12).unitary);
        for l in ball_points(2, 5, 0.8, 121) {
            let s = transfer_eval(&col, &l).unwrap();
            assert!((s[(0, 0)] - l[0]).norm() < 1e-13);
            assert!((s[(0, 1)] - l[1]).norm() < 1e-13);
            let direct = characteristic_function(&t, 1e-10, &l).unwrap();
            assert!(opnorm(&(s - direct)) < 1e-13);
        }
    }

    #[test]
    fn scalar_half_gives_classical_factor() {
        let t = RowContraction::new(1, vec![CMat::from_element(1, 1, re(0.5))], 1e-10).unwrap();
        let col = halmos_dilation(&t, 1e-10).unwrap();
        assert!(structure_report(&col, 1e-12).unitary);
        for l in [re(0.2), re(-0.6), cplx(0.3, 0.2)] {
            let s = transfer_eval(&col, &[l]).unwrap()[(0, 0)];
            let expect = (l - re(0.5)) / (re(1.0) - re(0.5) * l);
            assert!((s - expect).norm() < 1e-13);
        }
    }

    #[test]
    fn diagonal_commuting_tuple() {
        let t1 = CMat::from_partial_diagonal(2, 2, &[re(0.3), re(0.1)]);
        let t2 = CMat::from_partial_diagonal(2, 2, &[re(0.2), re(0.4)]);
        let t = RowContraction::new(2, vec![t1.clone(), t2.clone()], 1e-10).unwrap();
        assert!(t.commutative);
        let col = halmos_dilation(&t, 1e-10).unwrap();
        let rep = structure_report(&col, 1e-10);
        assert!(rep.unitary && rep.commutative_a);
        // theta(0) = -T on the full defect (strict contraction).
        let at_zero = transfer_eval(&col, &[re(0.0), re(0.0)]).unwrap();
        let mut row = CMat::zeros(2, 4);
        row.view_mut((0, 0), (2, 2)).copy_from(&t1);
        row.view_mut((0, 2), (2, 2)).copy_from(&t2);
        assert!(opnorm(&(at_zero + row)) < 1e-12);
        // Both evaluation routes agree on a grid.
        for l in ball_points(2, 6, 0.7, 123) {
            let s = transfer_eval(&col, &l).unwrap();
            let direct = characteristic_function(&t, 1e-10, &l).unwrap();
            assert!(opnorm(&(s - direct)) < 1e-12);
        }
    }

    #[test]
    fn characteristic_kernel_is_psd() {
        let mut rng = seeded_rng(67);
        let blocks = demo::random_commuting_row_contraction(2, 3, 0.8, &mut rng);
        let t = RowContraction::new(2, blocks, 1e-10).unwrap();
        let pts = ball_points(2, 6, 0.6, 125);
        let grid = KernelGrid::from_fn(KernelKind::KS, pts, |l, z| {
            kernel_ks(|p| characteristic_function(&t, 1e-10, p), l, z)
        })
        .unwrap();
        let check = kernel_psd_check(&grid, 1e-10);
        assert!(check.psd, "min eig {}", check.min_eig);
    }

    #[test]
    fn rejects_expansive_row() {
        let err = RowContraction::new(
            2,
            vec![
                CMat::from_element(1, 1, re(0.9)),
                CMat::from_element(1, 1, re(0.9)),
            ],
            1e-10,
        );
        assert!(matches!(err, Err(EngineError::NotRowContraction { .. })));
    }

    #[test]
    fn purity_examples() {
        assert!(pure_check(&CMat::zeros(2, 3), 1e-8).pure);
        assert!(!pure_check(&CMat::from_element(1, 1, re(1.0)), 1e-8).pure);
        let diag = CMat::from_partial_diagonal(2, 2, &[re(0.99), re(-0.5)]);
        assert!(pure_check(&diag, 1e-8).pure);
        let diag = CMat::from_partial_diagonal(2, 2, &[re(1.0), re(-0.5)]);
        assert!(!pure_check(&diag, 1e-8).pure);
    }

    #[test]
    fn dilation_coincides_by_construction() {
        let mut rng = seeded_rng(69);
        for _ in 0..10 {
            let blocks = demo::random_commuting_row_contraction(2, 3, 0.85, &mut rng);
            let t = RowContraction::new(2, blocks, 1e-10).unwrap();
            let col = halmos_dilation(&t, 1e-10).unwrap();
            let rep = structure_report(&col, 1e-10);
            assert!(rep.unitary, "dilation defect {}", rep.coisometric_residual);
            let co = coincidence_conditions(&col, 1e-10);
            assert!(co.coincides);
            assert!(co.trio_agree);
        }
    }

    #[test]
    fn redundant_row_unitary_member_coincides() {
        // The alpha = 1 member of the redundant-row family: unitary,
        // commutative, D = 0 pure.
        let s = demo::degree_two_redundant_multiplier();
        let space = crate::model::hks_subspace(&s, 6, 1e-9).unwrap();
        let (pair, _) = crate::model::gleason_model_pair(&space, 1e-10).unwrap();
        let fam = crate::model::model_family(&s, &space, &pair, 1e-9, 127).unwrap();
        let (col, _) =
            crate::model::assemble(&fam, &CMat::from_element(1, 1, re(1.0)), 1e-10).unwrap();
        let co = coincidence_conditions(&col, 1e-9);
        assert!(co.unitary && co.commutative && co.pure);
        assert!(co.coincides);
        assert!(co.trio_agree);
    }

    #[test]
    fn noncommutative_tuple_does_not_coincide() {
        let deformed = Colligation::new(
            2,
            demo::shifted_state_tuple(re(0.1)),
            vec![CMat::zeros(3, 1), CMat::zeros(3, 1)],
            CMat::from_row_slice(1, 3, &[re(0.5), re(0.0), re(0.0)]),
            CMat::zeros(1, 1),
        )
        .unwrap();
        let co = coincidence_conditions(&deformed, 1e-10);
        assert!(!co.commutative);
        assert!(!co.coincides);
    }

    #[test]
    fn trio_agreement_on_unitary_colligations() {
        // Blaschke colligations and Halmos dilations: the three
        // injectivity conditions stand or fall together.
        let mut rng = seeded_rng(71);
        for seed in 0..5u64 {
            let a = crate::linalg::ball_point(2, 0.8, &mut rng);
            let col = crate::beurling::blaschke(&a).unwrap();
            let co = coincidence_conditions(&col, 1e-10);
            assert!(co.trio_agree, "blaschke seed {}", seed);
        }
    }
}
