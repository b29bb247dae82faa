//! Colligations (connecting operators) and output pairs: structural
//! predicates, transfer-function evaluation, Taylor expansion,
//! contraction-to-coisometry extension and unitary equivalence of pairs.
//!
//! A colligation is the block operator
//!
//! ```text
//!      [ A_1  B_1 ]
//!  U = [  ...     ]  :  X (+) U  ->  X^d (+) Y
//!      [ A_d  B_d ]
//!      [  C    D  ]
//! ```
//!
//! with transfer function S(lambda) = D + C (I - Z(lambda)A)^{-1} Z(lambda)B.

use crate::error::{EngineError, Result};
use crate::linalg::{self, cplx, identity, opnorm, pinv, rank, C64, CMat};
use crate::mindex::{weight_f64, MultiIndex, TruncatedSeries};

#[derive(Clone, Debug)]
pub struct Colligation {
    pub d: usize,
    pub a: Vec<CMat>,
    pub b: Vec<CMat>,
    pub c: CMat,
    pub d_op: CMat,
}

impl Colligation {
    pub fn new(d: usize, a: Vec<CMat>, b: Vec<CMat>, c: CMat, d_op: CMat) -> Result<Self> {
        if a.len() != d || b.len() != d {
            return Err(EngineError::ShapeMismatch(format!(
                "expected {} state/input blocks, got {}/{}",
                d,
                a.len(),
                b.len()
            )));
        }
        let p = c.ncols();
        let r = c.nrows();
        let q = d_op.ncols();
        if d_op.nrows() != r {
            return Err(EngineError::ShapeMismatch(format!(
                "C has {} rows but D has {}",
                r,
                d_op.nrows()
            )));
        }
        for (j, (aj, bj)) in a.iter().zip(b.iter()).enumerate() {
            if aj.nrows() != p || aj.ncols() != p {
                return Err(EngineError::ShapeMismatch(format!(
                    "A_{} is {}x{}, expected {}x{}",
                    j + 1,
                    aj.nrows(),
                    aj.ncols(),
                    p,
                    p
                )));
            }
            if bj.nrows() != p || bj.ncols() != q {
                return Err(EngineError::ShapeMismatch(format!(
                    "B_{} is {}x{}, expected {}x{}",
                    j + 1,
                    bj.nrows(),
                    bj.ncols(),
                    p,
                    q
                )));
            }
        }
        Ok(Colligation { d, a, b, c, d_op })
    }

    pub fn dim_state(&self) -> usize {
        self.c.ncols()
    }

    pub fn dim_input(&self) -> usize {
        self.d_op.ncols()
    }

    pub fn dim_output(&self) -> usize {
        self.c.nrows()
    }

    /// The stacked (d p + r) x (p + q) block matrix.
    pub fn u_matrix(&self) -> CMat {
        let p = self.dim_state();
        let q = self.dim_input();
        let r = self.dim_output();
        let mut u = CMat::zeros(self.d * p + r, p + q);
        for j in 0..self.d {
            u.view_mut((j * p, 0), (p, p)).copy_from(&self.a[j]);
            u.view_mut((j * p, p), (p, q)).copy_from(&self.b[j]);
        }
        u.view_mut((self.d * p, 0), (r, p)).copy_from(&self.c);
        u.view_mut((self.d * p, p), (r, q)).copy_from(&self.d_op);
        u
    }

    pub fn output_pair(&self) -> OutputPair {
        OutputPair {
            d: self.d,
            c: self.c.clone(),
            a: self.a.clone(),
        }
    }

    /// Z(lambda) B = sum_j lambda_j B_j.
    pub fn zb(&self, point: &[C64]) -> CMat {
        let mut acc = CMat::zeros(self.dim_state(), self.dim_input());
        for (j, bj) in self.b.iter().enumerate() {
            acc += bj * point[j];
        }
        acc
    }
}

/// Output pair (C, A): observation operator plus state d-tuple.
#[derive(Clone, Debug)]
pub struct OutputPair {
    pub d: usize,
    pub c: CMat,
    pub a: Vec<CMat>,
}

impl OutputPair {
    pub fn new(d: usize, c: CMat, a: Vec<CMat>) -> Result<Self> {
        if a.len() != d {
            return Err(EngineError::ShapeMismatch(format!(
                "expected {} state blocks, got {}",
                d,
                a.len()
            )));
        }
        let p = c.ncols();
        for (j, aj) in a.iter().enumerate() {
            if aj.nrows() != p || aj.ncols() != p {
                return Err(EngineError::ShapeMismatch(format!(
                    "A_{} is {}x{}, expected {}x{}",
                    j + 1,
                    aj.nrows(),
                    aj.ncols(),
                    p,
                    p
                )));
            }
        }
        Ok(OutputPair { d, c, a })
    }

    pub fn dim_state(&self) -> usize {
        self.c.ncols()
    }

    pub fn dim_output(&self) -> usize {
        self.c.nrows()
    }

    /// sum_j A_j^* A_j + C^* C.
    pub fn energy_operator(&self) -> CMat {
        let mut acc = self.c.adjoint() * &self.c;
        for aj in &self.a {
            acc += aj.adjoint() * aj;
        }
        acc
    }

    /// Largest eigenvalue excess of the energy operator over I (0 when
    /// contractive).
    pub fn contractive_excess(&self) -> f64 {
        let m = self.energy_operator() - identity(self.dim_state());
        linalg::eigh(&m).0.iter().cloned().fold(0.0, f64::max)
    }

    /// || I - sum A_j^* A_j - C^* C ||.
    pub fn isometric_residual(&self) -> f64 {
        opnorm(&(identity(self.dim_state()) - self.energy_operator()))
    }

    /// Z(lambda) A = sum_j lambda_j A_j.
    pub fn za(&self, point: &[C64]) -> CMat {
        let mut acc = CMat::zeros(self.dim_state(), self.dim_state());
        for (j, aj) in self.a.iter().enumerate() {
            acc += aj * point[j];
        }
        acc
    }

    /// (I - Z(lambda)A)^{-1} M by LU solve.
    pub fn resolvent_solve(&self, point: &[C64], m: &CMat) -> Result<CMat> {
        let sys = identity(self.dim_state()) - self.za(point);
        sys.lu()
            .solve(m)
            .ok_or_else(|| EngineError::SingularResolvent {
                point: fmt_point(point),
            })
    }

    /// (I - A^* Z(zeta)^*)^{-1} M by LU solve.
    pub fn resolvent_adjoint_solve(&self, point: &[C64], m: &CMat) -> Result<CMat> {
        let sys = identity(self.dim_state()) - self.za(point).adjoint();
        sys.lu()
            .solve(m)
            .ok_or_else(|| EngineError::SingularResolvent {
                point: fmt_point(point),
            })
    }

    /// The stacked column [A; C] : X -> X^d (+) Y.
    pub fn stacked(&self) -> CMat {
        let p = self.dim_state();
        let r = self.dim_output();
        let mut m = CMat::zeros(self.d * p + r, p);
        for (j, aj) in self.a.iter().enumerate() {
            m.view_mut((j * p, 0), (p, p)).copy_from(aj);
        }
        m.view_mut((self.d * p, 0), (r, p)).copy_from(&self.c);
        m
    }

    pub fn max_commutator(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.d {
            for j in (i + 1)..self.d {
                worst = worst.max(opnorm(&(&self.a[i] * &self.a[j] - &self.a[j] * &self.a[i])));
            }
        }
        worst
    }
}

pub fn fmt_point(point: &[C64]) -> String {
    let parts: Vec<String> = point
        .iter()
        .map(|z| format!("{}{:+}i", z.re, z.im))
        .collect();
    format!("({})", parts.join(", "))
}

/// S(lambda) = D + C (I - Z(lambda)A)^{-1} Z(lambda) B by direct linear
/// solve (never by series).
pub fn transfer_eval(col: &Colligation, point: &[C64]) -> Result<CMat> {
    if point.len() != col.d {
        return Err(EngineError::ShapeMismatch(format!(
            "point has {} coordinates, colligation has {} variables",
            point.len(),
            col.d
        )));
    }
    let pair = col.output_pair();
    let x = pair.resolvent_solve(point, &col.zb(point))?;
    Ok(&col.d_op + &col.c * x)
}

/// Taylor coefficients of the transfer function up to total degree `cap`:
/// S_0 = D and S_n = C G_n with G_{e_j} = B_j, G_n = sum_j A_j G_{n - e_j}.
pub fn taylor(col: &Colligation, cap: usize) -> TruncatedSeries {
    let r = col.dim_output();
    let q = col.dim_input();
    let mut out = TruncatedSeries::zero(col.d, cap, r, q);
    out.set(MultiIndex::zero(col.d), col.d_op.clone());
    if cap == 0 {
        return out;
    }
    let mut layer: std::collections::BTreeMap<MultiIndex, CMat> =
        std::collections::BTreeMap::new();
    for j in 0..col.d {
        match layer.get_mut(&MultiIndex::unit(col.d, j)) {
            Some(acc) => *acc += &col.b[j],
            None => {
                layer.insert(MultiIndex::unit(col.d, j), col.b[j].clone());
            }
        }
    }
    for deg in 1..=cap {
        for (n, g) in &layer {
            out.set(n.clone(), &col.c * g);
        }
        if deg == cap {
            break;
        }
        let mut next: std::collections::BTreeMap<MultiIndex, CMat> =
            std::collections::BTreeMap::new();
        for (n, g) in &layer {
            for (j, aj) in col.a.iter().enumerate() {
                let m = n.inc(j);
                let term = aj * g;
                match next.get_mut(&m) {
                    Some(acc) => *acc += term,
                    None => {
                        next.insert(m, term);
                    }
                }
            }
        }
        layer = next;
    }
    out
}

/// Structural flags of the connecting operator, derived (never stored)
/// with their achieved residuals.
#[derive(Clone, Debug)]
pub struct StructureReport {
    pub sigma_max: f64,
    pub contractive: bool,
    pub isometric_residual: f64,
    pub isometric: bool,
    pub coisometric_residual: f64,
    pub coisometric: bool,
    pub unitary: bool,
    pub commutator_max: f64,
    pub commutative_a: bool,
}

pub fn structure_report(col: &Colligation, tol: f64) -> StructureReport {
    let u = col.u_matrix();
    let sigma_max = opnorm(&u);
    let iso = opnorm(&(u.adjoint() * &u - identity(u.ncols())));
    let coiso = opnorm(&(&u * u.adjoint() - identity(u.nrows())));
    let comm = col.output_pair().max_commutator();
    StructureReport {
        sigma_max,
        contractive: sigma_max <= 1.0 + tol,
        isometric_residual: iso,
        isometric: iso <= tol,
        coisometric_residual: coiso,
        coisometric: coiso <= tol,
        unitary: iso <= tol && coiso <= tol,
        commutator_max: comm,
        commutative_a: comm <= tol,
    }
}

/// Extend a contractive colligation to a coisometric one by appending
/// (I - U U^*)^{1/2} restricted to its numerical range as extra input
/// columns. The restriction to the original inputs is unchanged.
pub fn coisometric_extension(col: &Colligation, tol: f64) -> Result<Colligation> {
    let u = col.u_matrix();
    let sigma = opnorm(&u);
    if sigma > 1.0 + tol {
        return Err(EngineError::NotContractive { sigma });
    }
    let m = identity(u.nrows()) - &u * u.adjoint();
    let threshold = tol.max(tol * opnorm(&m));
    let (l, _) = linalg::psd_factor(&m, threshold);
    let p = col.dim_state();
    let q = col.dim_input();
    let r = col.dim_output();
    let extra = l.ncols();
    let mut b = Vec::with_capacity(col.d);
    for j in 0..col.d {
        let mut bj = CMat::zeros(p, q + extra);
        bj.view_mut((0, 0), (p, q)).copy_from(&col.b[j]);
        bj.view_mut((0, q), (p, extra))
            .copy_from(&l.view((j * p, 0), (p, extra)).into_owned());
        b.push(bj);
    }
    let mut d_op = CMat::zeros(r, q + extra);
    d_op.view_mut((0, 0), (r, q)).copy_from(&col.d_op);
    d_op.view_mut((0, q), (r, extra))
        .copy_from(&l.view((col.d * p, 0), (r, extra)).into_owned());
    Colligation::new(col.d, col.a.clone(), b, col.c.clone(), d_op)
}

/// Outcome of the unitary-equivalence test between two output pairs.
#[derive(Clone, Debug)]
pub struct EquivalenceReport {
    pub equivalent: bool,
    /// Least-squares witness W solving O_1 W = O_2.
    pub witness: Option<CMat>,
    /// Relative residual of the solved stacking equation.
    pub residual: f64,
    /// || W^* W - I ||.
    pub witness_unitarity: f64,
    /// max(residual, witness_unitarity): how far the best witness is from
    /// implementing a unitary equivalence.
    pub defect: f64,
}

/// Stack word-indexed observability rows sqrt(weight(abel(w))) C A_w over
/// all words of length <= cap (valid for commutative and noncommutative
/// tuples alike, since words refine the abelianized expansion).
fn word_stack(pair: &OutputPair, cap: usize) -> Result<CMat> {
    let p = pair.dim_state();
    let r = pair.dim_output();
    let mut rows: Vec<CMat> = Vec::new();
    fn visit(
        pair: &OutputPair,
        product: &CMat,
        abel: &mut MultiIndex,
        depth: usize,
        cap: usize,
        rows: &mut Vec<CMat>,
    ) -> Result<()> {
        let w = weight_f64(abel)?;
        rows.push(&pair.c * product * cplx(w.sqrt(), 0.0));
        if depth == cap {
            return Ok(());
        }
        for j in 0..pair.d {
            let next = product * &pair.a[j];
            abel.0[j] += 1;
            visit(pair, &next, abel, depth + 1, cap, rows)?;
            abel.0[j] -= 1;
        }
        Ok(())
    }
    let mut abel = MultiIndex::zero(pair.d);
    visit(pair, &identity(p), &mut abel, 0, cap, &mut rows)?;
    let mut stack = CMat::zeros(rows.len() * r, p);
    for (i, row) in rows.iter().enumerate() {
        stack.view_mut((i * r, 0), (r, p)).copy_from(row);
    }
    Ok(stack)
}

/// Decide unitary equivalence of two output pairs by solving the stacked
/// least-squares problem O_1 W = O_2 over words of length <= cap. The
/// decision is at finite cap and tolerance: residuals are reported rather
/// than a theorem asserted.
pub fn unitary_equivalence(
    pair1: &OutputPair,
    pair2: &OutputPair,
    cap: usize,
    tol: f64,
) -> Result<EquivalenceReport> {
    if pair1.d != pair2.d || pair1.dim_output() != pair2.dim_output() {
        return Err(EngineError::ShapeMismatch(
            "pairs must share variable count and output dimension".into(),
        ));
    }
    if pair1.dim_state() != pair2.dim_state() {
        return Ok(EquivalenceReport {
            equivalent: false,
            witness: None,
            residual: f64::INFINITY,
            witness_unitarity: f64::INFINITY,
            defect: f64::INFINITY,
        });
    }
    let p = pair1.dim_state();
    let o1 = word_stack(pair1, cap)?;
    let o2 = word_stack(pair2, cap)?;
    for o in [&o1, &o2] {
        let rk = rank(o, 1e-10);
        if rk < p {
            return Err(EngineError::ObservabilityRankDeficient {
                cap,
                rank: rk,
                dim: p,
            });
        }
    }
    let w = pinv(&o1, 1e-12) * &o2;
    let scale = opnorm(&o2).max(f64::MIN_POSITIVE);
    let residual = opnorm(&(&o1 * &w - &o2)) / scale;
    let witness_unitarity = opnorm(&(w.adjoint() * &w - identity(p)));
    let defect = residual.max(witness_unitarity);
    Ok(EquivalenceReport {
        equivalent: defect <= tol,
        witness: Some(w),
        residual,
        witness_unitarity,
        defect,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::demo;
    use crate::linalg::{ball_points, random_unitary, seeded_rng};

    fn re(x: f64) -> C64 {
        cplx(x, 0.0)
    }

    #[test]
    fn transfer_at_half_half() {
        let col = demo::degree_two_inner_row();
        let s = transfer_eval(&col, &[re(0.5), re(0.5)]).unwrap();
        assert!((s[(0, 0)] - re(0.25)).norm() < 1e-15);
        assert!((s[(0, 1)] - re(2f64.sqrt() * 0.25)).norm() < 1e-15);
        assert!((s[(0, 2)] - re(0.25)).norm() < 1e-15);
    }

    #[test]
    fn transfer_with_zero_b_is_constant() {
        let mut col = demo::degree_two_inner_row();
        for bj in &mut col.b {
            *bj = CMat::zeros(3, 3);
        }
        for p in ball_points(2, 5, 0.8, 1) {
            let s = transfer_eval(&col, &p).unwrap();
            assert!(opnorm(&(s - col.d_op.clone())) < 1e-15);
        }
    }

    #[test]
    fn taylor_recovers_monomial_row() {
        let col = demo::degree_two_inner_row();
        let t = taylor(&col, 6);
        let expect = demo::degree_two_inner_multiplier();
        // Exactly the three monomial coefficients, zero elsewhere.
        assert_eq!(t.num_terms(), 3);
        for (n, c) in expect.iter() {
            assert!(opnorm(&(t.coeff(n) - c)) < 1e-15, "coefficient {:?}", n);
        }
    }

    #[test]
    fn taylor_with_zero_b_is_constant() {
        let mut col = demo::degree_two_inner_row();
        for bj in &mut col.b {
            *bj = CMat::zeros(3, 3);
        }
        let t = taylor(&col, 5);
        assert_eq!(t.num_terms(), 0); // D is the zero row here
        let t2 = taylor(&demo::nilpotent_coisometric_colligation(), 0);
        assert_eq!(t2.num_terms(), 1); // constant coefficient D only
    }

    #[test]
    fn taylor_scalar_blaschke_matches_long_division() {
        // A = 0.5, B = C = sqrt(0.75), D = -0.5 realizes
        // (lambda - 0.5)/(1 - 0.5 lambda).
        let s = 0.75f64.sqrt();
        let col = Colligation::new(
            1,
            vec![CMat::from_element(1, 1, re(0.5))],
            vec![CMat::from_element(1, 1, re(s))],
            CMat::from_element(1, 1, re(s)),
            CMat::from_element(1, 1, re(-0.5)),
        )
        .unwrap();
        let t = taylor(&col, 10);
        // Long-division oracle for (lambda - 0.5)/(1 - 0.5 lambda).
        let mut num = vec![-0.5, 1.0];
        num.resize(11, 0.0);
        let den = [1.0, -0.5];
        let mut quot = vec![0.0; 11];
        for k in 0..=10usize {
            quot[k] = num[k] / den[0];
            if k + 1 <= 10 {
                num[k + 1] -= quot[k] * den[1];
            }
        }
        for (k, q) in quot.iter().enumerate() {
            let c = t.coeff(&MultiIndex(vec![k]))[(0, 0)];
            assert!((c - re(*q)).norm() < 1e-14, "degree {}", k);
        }
    }

    #[test]
    fn taylor_matches_transfer_at_interior_points() {
        let col = demo::degree_two_inner_row();
        let t = taylor(&col, 25);
        for p in ball_points(2, 10, 0.7, 5) {
            let direct = transfer_eval(&col, &p).unwrap();
            let summed = t.eval(&p);
            assert!(opnorm(&(direct - summed)) < 1e-12);
        }
    }

    #[test]
    fn structure_flags_for_inner_row() {
        let rep = structure_report(&demo::degree_two_inner_row(), 1e-10);
        assert!(rep.contractive);
        assert!(rep.isometric);
        assert!(!rep.coisometric);
        assert!(rep.commutative_a);
        assert!(!rep.unitary);
    }

    #[test]
    fn structure_flags_for_coisometric_nilpotent() {
        let rep = structure_report(&demo::nilpotent_coisometric_colligation(), 1e-10);
        assert!(rep.coisometric, "residual {}", rep.coisometric_residual);
        assert!(!rep.isometric);
        // The gamma = 0 tuple commutes (both products vanish);
        // noncommutative deformations need gamma != 0.
        assert!(rep.commutative_a);
        let deformed = Colligation::new(
            2,
            demo::shifted_state_tuple(re(0.1)),
            vec![CMat::zeros(3, 1), CMat::zeros(3, 1)],
            CMat::from_row_slice(1, 3, &[re(0.5), re(0.0), re(0.0)]),
            CMat::zeros(1, 1),
        )
        .unwrap();
        let rep2 = structure_report(&deformed, 1e-10);
        assert!(!rep2.commutative_a);
    }

    #[test]
    fn structure_flags_zero_colligation() {
        let z = Colligation::new(
            1,
            vec![CMat::zeros(2, 2)],
            vec![CMat::zeros(2, 2)],
            CMat::zeros(2, 2),
            CMat::zeros(2, 2),
        )
        .unwrap();
        let rep = structure_report(&z, 1e-10);
        assert!(rep.contractive);
        assert!(!rep.unitary);
    }

    #[test]
    fn flags_invariant_under_state_basis_change() {
        let col = demo::degree_two_inner_row();
        let mut rng = seeded_rng(17);
        let v = random_unitary(3, &mut rng);
        let rotated = Colligation::new(
            2,
            col.a.iter().map(|aj| v.adjoint() * aj * &v).collect(),
            col.b.iter().map(|bj| v.adjoint() * bj).collect(),
            &col.c * &v,
            col.d_op.clone(),
        )
        .unwrap();
        let r1 = structure_report(&col, 1e-9);
        let r2 = structure_report(&rotated, 1e-9);
        assert_eq!(r1.contractive, r2.contractive);
        assert_eq!(r1.isometric, r2.isometric);
        assert_eq!(r1.coisometric, r2.coisometric);
        assert_eq!(r1.commutative_a, r2.commutative_a);
    }

    #[test]
    fn extension_of_coisometric_adds_nothing() {
        let col = demo::nilpotent_coisometric_colligation();
        let ext = coisometric_extension(&col, 1e-10).unwrap();
        assert_eq!(ext.dim_input(), col.dim_input());
    }

    #[test]
    fn extension_scalar_appends_root() {
        // 1x1 colligation U = [0.5]: appended column sqrt(0.75).
        let col = Colligation::new(
            1,
            vec![CMat::from_element(1, 1, re(0.5))],
            vec![CMat::zeros(1, 0)],
            CMat::zeros(0, 1),
            CMat::zeros(0, 0),
        )
        .unwrap();
        let ext = coisometric_extension(&col, 1e-10).unwrap();
        assert_eq!(ext.dim_input(), 1);
        assert!((ext.b[0][(0, 0)] - re(0.75f64.sqrt())).norm() < 1e-12);
        let rep = structure_report(&ext, 1e-10);
        assert!(rep.coisometric);
    }

    #[test]
    fn extension_of_inner_row_is_coisometric_and_restricts_back() {
        let col = demo::degree_two_inner_row();
        let ext = coisometric_extension(&col, 1e-10).unwrap();
        // Eigenvalue-count oracle for the number of appended columns.
        let u = col.u_matrix();
        let m = identity(7) - &u * u.adjoint();
        let eigs = linalg::eigh(&m).0;
        let rank_oracle = eigs.iter().filter(|&&v| v > 1e-10).count();
        assert!(rank_oracle >= 1);
        assert_eq!(ext.dim_input(), col.dim_input() + rank_oracle);
        assert!(structure_report(&ext, 1e-10).coisometric);
        // Restriction to the original inputs reproduces the transfer
        // function pointwise.
        for p in ball_points(2, 8, 0.7, 2) {
            let s0 = transfer_eval(&col, &p).unwrap();
            let s1 = transfer_eval(&ext, &p).unwrap();
            assert!(opnorm(&(s1.columns(0, 3).into_owned() - s0)) < 1e-12);
        }
    }

    #[test]
    fn extension_rejects_expansive() {
        let col = Colligation::new(
            1,
            vec![CMat::from_element(1, 1, re(2.0))],
            vec![CMat::zeros(1, 0)],
            CMat::zeros(0, 1),
            CMat::zeros(0, 0),
        )
        .unwrap();
        assert!(matches!(
            coisometric_extension(&col, 1e-10),
            Err(EngineError::NotContractive { .. })
        ));
    }

    #[test]
    fn pair_equivalent_to_itself() {
        let pair = demo::degree_two_inner_pair();
        let rep = unitary_equivalence(&pair, &pair, 4, 1e-10).unwrap();
        assert!(rep.equivalent);
        let w = rep.witness.unwrap();
        assert!(opnorm(&(w - identity(3))) < 1e-10);
    }

    #[test]
    fn conjugated_pair_equivalent_with_witness() {
        let pair = demo::degree_two_inner_pair();
        let mut rng = seeded_rng(23);
        let v = random_unitary(3, &mut rng);
        let rotated = OutputPair::new(
            2,
            &pair.c * &v,
            pair.a.iter().map(|aj| v.adjoint() * aj * &v).collect(),
        )
        .unwrap();
        let rep = unitary_equivalence(&pair, &rotated, 4, 1e-9).unwrap();
        assert!(rep.equivalent, "defect {}", rep.defect);
        let w = rep.witness.unwrap();
        assert!(opnorm(&(w - v)) < 1e-9);
    }

    #[test]
    fn deformed_pairs_not_equivalent() {
        let p0 = demo::shifted_state_pair(re(0.0));
        let p1 = demo::shifted_state_pair(re(0.1));
        let rep = unitary_equivalence(&p0, &p1, 4, 1e-8).unwrap();
        assert!(!rep.equivalent);
        assert!(rep.defect >= 1e-3);
    }

    #[test]
    fn unobservable_pair_is_inconclusive() {
        let pair = OutputPair::new(
            1,
            CMat::from_row_slice(1, 2, &[re(1.0), re(0.0)]),
            vec![CMat::zeros(2, 2)],
        )
        .unwrap();
        assert!(matches!(
            unitary_equivalence(&pair, &pair, 3, 1e-10),
            Err(EngineError::ObservabilityRankDeficient { .. })
        ));
    }
}
