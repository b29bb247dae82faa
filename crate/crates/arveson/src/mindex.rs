//! Multi-index combinatorics, the weighted inner product of the
//! Drury-Arveson space and truncated matrix-valued power series — the
//! computational substrate for every other module.
//!
//! A function f = sum_n f_n lambda^n has squared norm
//! sum_n (n!/|n|!) |f_n|^2, so the multinomial weight |n|!/n! shows up as
//! the reciprocal of the monomial norm throughout.

use std::collections::BTreeMap;

use crate::error::{EngineError, Result};
use crate::linalg::{cplx, C64, CMat, CVec};

/// Multi-index n in Z_+^d with graded-lexicographic ordering.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct MultiIndex(pub Vec<usize>);

impl MultiIndex {
    pub fn zero(d: usize) -> Self {
        MultiIndex(vec![0; d])
    }

    pub fn unit(d: usize, j: usize) -> Self {
        let mut v = vec![0; d];
        v[j] = 1;
        MultiIndex(v)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// Total degree |n|.
    pub fn total(&self) -> usize {
        self.0.iter().sum()
    }

    pub fn add(&self, other: &MultiIndex) -> MultiIndex {
        MultiIndex(
            self.0
                .iter()
                .zip(other.0.iter())
                .map(|(a, b)| a + b)
                .collect(),
        )
    }

    /// n - e_j when n_j >= 1.
    pub fn dec(&self, j: usize) -> Option<MultiIndex> {
        if self.0[j] == 0 {
            return None;
        }
        let mut v = self.0.clone();
        v[j] -= 1;
        Some(MultiIndex(v))
    }

    pub fn inc(&self, j: usize) -> MultiIndex {
        let mut v = self.0.clone();
        v[j] += 1;
        MultiIndex(v)
    }

    /// lambda^n at a point.
    pub fn monomial_at(&self, point: &[C64]) -> C64 {
        self.0
            .iter()
            .zip(point.iter())
            .map(|(&k, z)| z.powu(k as u32))
            .product()
    }

    /// All indices of Z_+^d with total degree exactly `deg`, graded-lex order.
    pub fn layer(d: usize, deg: usize) -> Vec<MultiIndex> {
        let mut out = Vec::new();
        let mut cur = vec![0usize; d];
        fn rec(cur: &mut Vec<usize>, pos: usize, left: usize, out: &mut Vec<MultiIndex>) {
            if pos + 1 == cur.len() {
                cur[pos] = left;
                out.push(MultiIndex(cur.clone()));
                return;
            }
            for k in (0..=left).rev() {
                cur[pos] = k;
                rec(cur, pos + 1, left - k, out);
            }
        }
        if d == 0 {
            if deg == 0 {
                out.push(MultiIndex(Vec::new()));
            }
            return out;
        }
        rec(&mut cur, 0, deg, &mut out);
        out
    }

    /// All indices with total degree <= cap, graded-lex order.
    pub fn up_to(d: usize, cap: usize) -> Vec<MultiIndex> {
        (0..=cap).flat_map(|k| Self::layer(d, k)).collect()
    }
}

impl PartialOrd for MultiIndex {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for MultiIndex {
    /// Graded-lexicographic: compare total degree first, then the entries
    /// left to right with larger first entry coming first within a layer
    /// (so (1,0) precedes (0,1), matching the generation order of `layer`).
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.total()
            .cmp(&other.total())
            .then_with(|| other.0.cmp(&self.0))
    }
}

/// Multinomial weight |n|!/n! in exact integer arithmetic.
pub fn weight(n: &MultiIndex) -> Result<u128> {
    // Product of binomials C(s_k, n_k) over partial sums s_k.
    let mut acc: u128 = 1;
    let mut s: usize = 0;
    for &nk in &n.0 {
        s += nk;
        acc = acc
            .checked_mul(binomial(s, nk).ok_or(EngineError::DegreeTooLarge { degree: n.total() })?)
            .ok_or(EngineError::DegreeTooLarge { degree: n.total() })?;
    }
    Ok(acc)
}

fn binomial(n: usize, k: usize) -> Option<u128> {
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.checked_mul((n - i) as u128)?;
        acc /= (i + 1) as u128;
    }
    Some(acc)
}

pub fn weight_f64(n: &MultiIndex) -> Result<f64> {
    Ok(weight(n)? as f64)
}

/// Matrix-valued polynomial in d variables truncated at a total degree.
/// Absent indices mean zero; all stored coefficients share one shape.
#[derive(Clone, Debug, PartialEq)]
pub struct TruncatedSeries {
    pub d: usize,
    pub degree_cap: usize,
    pub rows: usize,
    pub cols: usize,
    coeffs: BTreeMap<MultiIndex, CMat>,
}

impl TruncatedSeries {
    pub fn zero(d: usize, degree_cap: usize, rows: usize, cols: usize) -> Self {
        TruncatedSeries {
            d,
            degree_cap,
            rows,
            cols,
            coeffs: BTreeMap::new(),
        }
    }

    /// Constant series with the given value.
    pub fn constant(d: usize, degree_cap: usize, value: CMat) -> Self {
        let mut s = TruncatedSeries::zero(d, degree_cap, value.nrows(), value.ncols());
        s.set(MultiIndex::zero(d), value);
        s
    }

    pub fn identity(d: usize, degree_cap: usize, n: usize) -> Self {
        Self::constant(d, degree_cap, CMat::identity(n, n))
    }

    /// Scalar monomial lambda^n (1x1 coefficient 1).
    pub fn monomial(d: usize, degree_cap: usize, n: MultiIndex) -> Self {
        let mut s = TruncatedSeries::zero(d, degree_cap, 1, 1);
        s.set(n, CMat::from_element(1, 1, cplx(1.0, 0.0)));
        s
    }

    pub fn set(&mut self, n: MultiIndex, value: CMat) {
        assert_eq!(n.dim(), self.d, "multi-index dimension mismatch");
        assert_eq!((value.nrows(), value.ncols()), (self.rows, self.cols));
        if n.total() > self.degree_cap {
            return;
        }
        if value.iter().all(|z| z.norm() == 0.0) {
            self.coeffs.remove(&n);
        } else {
            self.coeffs.insert(n, value);
        }
    }

    pub fn add_to(&mut self, n: &MultiIndex, value: &CMat) {
        if n.total() > self.degree_cap {
            return;
        }
        match self.coeffs.get_mut(n) {
            Some(c) => *c += value,
            None => {
                self.coeffs.insert(n.clone(), value.clone());
            }
        }
    }

    pub fn coeff(&self, n: &MultiIndex) -> CMat {
        self.coeffs
            .get(n)
            .cloned()
            .unwrap_or_else(|| CMat::zeros(self.rows, self.cols))
    }

    /// Deterministic (graded-lex) iteration over stored coefficients.
    pub fn iter(&self) -> impl Iterator<Item = (&MultiIndex, &CMat)> {
        self.coeffs.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.coeffs.len()
    }

    pub fn max_total_degree(&self) -> usize {
        self.coeffs.keys().map(|n| n.total()).max().unwrap_or(0)
    }

    /// Largest coefficient entry in modulus.
    pub fn max_coeff_norm(&self) -> f64 {
        self.coeffs
            .values()
            .map(|m| m.iter().map(|z| z.norm()).fold(0.0, f64::max))
            .fold(0.0, f64::max)
    }

    pub fn scale(&self, z: C64) -> TruncatedSeries {
        let mut out = self.clone();
        for c in out.coeffs.values_mut() {
            *c *= z;
        }
        out
    }

    pub fn add(&self, other: &TruncatedSeries) -> Result<TruncatedSeries> {
        if self.d != other.d || self.rows != other.rows || self.cols != other.cols {
            return Err(EngineError::ShapeMismatch(format!(
                "series add: ({},{}x{}) vs ({},{}x{})",
                self.d, self.rows, self.cols, other.d, other.rows, other.cols
            )));
        }
        let mut out = self.clone();
        out.degree_cap = self.degree_cap.min(other.degree_cap);
        out.coeffs.retain(|n, _| n.total() <= out.degree_cap);
        for (n, c) in other.iter() {
            if n.total() <= out.degree_cap {
                out.add_to(n, c);
            }
        }
        out.prune();
        Ok(out)
    }

    fn prune(&mut self) {
        self.coeffs.retain(|_, c| c.iter().any(|z| z.norm() != 0.0));
    }

    /// Truncate to a lower cap.
    pub fn truncate(&self, cap: usize) -> TruncatedSeries {
        let mut out = self.clone();
        out.degree_cap = cap;
        out.coeffs.retain(|n, _| n.total() <= cap);
        out
    }

    /// Pointwise evaluation sum_n coeff_n lambda^n.
    pub fn eval(&self, point: &[C64]) -> CMat {
        let mut acc = CMat::zeros(self.rows, self.cols);
        for (n, c) in self.iter() {
            acc += c * n.monomial_at(point);
        }
        acc
    }

    /// The series multiplied by the monomial lambda^n (degrees shift up).
    pub fn shifted(&self, n: &MultiIndex, cap: usize) -> TruncatedSeries {
        let mut out = TruncatedSeries::zero(self.d, cap, self.rows, self.cols);
        for (m, c) in self.iter() {
            out.set(m.add(n), c.clone());
        }
        out
    }

    /// Column j as a vector-valued series.
    pub fn column(&self, j: usize) -> TruncatedSeries {
        let mut out = TruncatedSeries::zero(self.d, self.degree_cap, self.rows, 1);
        for (n, c) in self.iter() {
            out.set(n.clone(), CMat::from_column_slice(self.rows, 1, c.column(j).as_slice()));
        }
        out
    }
}

/// Coefficientwise convolution a*b truncated at `cap`; exact up to the cap.
pub fn series_mul(a: &TruncatedSeries, b: &TruncatedSeries, cap: usize) -> Result<TruncatedSeries> {
    if a.d != b.d {
        return Err(EngineError::ShapeMismatch(format!(
            "series mul: variable counts {} vs {}",
            a.d, b.d
        )));
    }
    if a.cols != b.rows {
        return Err(EngineError::ShapeMismatch(format!(
            "series mul: inner shapes {}x{} times {}x{}",
            a.rows, a.cols, b.rows, b.cols
        )));
    }
    let mut out = TruncatedSeries::zero(a.d, cap, a.rows, b.cols);
    for (na, ca) in a.iter() {
        if na.total() > cap {
            continue;
        }
        for (nb, cb) in b.iter() {
            if na.total() + nb.total() > cap {
                continue;
            }
            out.add_to(&na.add(nb), &(ca * cb));
        }
    }
    out.prune();
    Ok(out)
}

/// Inverse of a = I - L (L with zero constant term) as the geometric series
/// sum_k L^k, truncated at `cap`. Satisfies a * result = I up to the cap.
pub fn neumann_inverse(a: &TruncatedSeries, cap: usize) -> Result<TruncatedSeries> {
    if a.rows != a.cols {
        return Err(EngineError::ShapeMismatch(format!(
            "neumann inverse of a non-square series {}x{}",
            a.rows, a.cols
        )));
    }
    let n = a.rows;
    let zero_idx = MultiIndex::zero(a.d);
    let c0 = a.coeff(&zero_idx);
    if (c0 - CMat::identity(n, n)).iter().any(|z| z.norm() > 0.0) {
        return Err(EngineError::NotIdentityAtZero);
    }
    // L = I - a has zero constant term.
    let mut l = a.scale(cplx(-1.0, 0.0));
    l.add_to(&zero_idx, &CMat::identity(n, n));
    l.prune();
    let mut acc = TruncatedSeries::identity(a.d, cap, n);
    let mut power = TruncatedSeries::identity(a.d, cap, n);
    for _ in 1..=cap {
        power = series_mul(&l, &power, cap)?;
        if power.num_terms() == 0 {
            break;
        }
        acc = acc.add(&power)?;
    }
    Ok(acc)
}

/// Y-valued element of the Arveson space: a truncated series with one
/// column, carrying the weighted norm of the space.
#[derive(Clone, Debug, PartialEq)]
pub struct ArvesonElement(pub TruncatedSeries);

impl ArvesonElement {
    pub fn new(series: TruncatedSeries) -> Result<Self> {
        if series.cols != 1 {
            return Err(EngineError::ShapeMismatch(format!(
                "Arveson element must be column-valued, got {} columns",
                series.cols
            )));
        }
        Ok(ArvesonElement(series))
    }

    pub fn zero(d: usize, cap: usize, value_dim: usize) -> Self {
        ArvesonElement(TruncatedSeries::zero(d, cap, value_dim, 1))
    }

    pub fn series(&self) -> &TruncatedSeries {
        &self.0
    }

    pub fn value_dim(&self) -> usize {
        self.0.rows
    }

    pub fn eval(&self, point: &[C64]) -> CVec {
        CVec::from_column_slice(self.0.eval(point).column(0).as_slice())
    }

    pub fn norm_squared(&self) -> Result<f64> {
        let mut acc = 0.0;
        for (n, c) in self.0.iter() {
            acc += c.norm_squared() / weight_f64(n)?;
        }
        Ok(acc)
    }

    pub fn norm(&self) -> Result<f64> {
        Ok(self.norm_squared()?.sqrt())
    }
}

/// Weighted inner product <f, g> = sum_n (n!/|n|!) <f_n, g_n>; linear in
/// the first argument, conjugate-linear in the second. Exact for
/// polynomials up to rounding.
pub fn arveson_inner(f: &ArvesonElement, g: &ArvesonElement) -> Result<C64> {
    if f.0.d != g.0.d || f.0.rows != g.0.rows {
        return Err(EngineError::ShapeMismatch(format!(
            "inner product between values in C^{} ({} vars) and C^{} ({} vars)",
            f.0.rows, f.0.d, g.0.rows, g.0.d
        )));
    }
    let mut acc = cplx(0.0, 0.0);
    for (n, fc) in f.0.iter() {
        let gc = g.0.coeff(n);
        // <f_n, g_n>_Y = g_n^* f_n.
        let dot = (gc.adjoint() * fc)[(0, 0)];
        acc += dot / weight_f64(n)?;
    }
    Ok(acc)
}

/// Adjoint of multiplication by lambda_j:
/// M_{lambda_j}^* lambda^m = (m_j/|m|) lambda^{m-e_j}, constants to zero.
pub fn backward_shift(f: &ArvesonElement, j: usize) -> ArvesonElement {
    let src = &f.0;
    let mut out = TruncatedSeries::zero(src.d, src.degree_cap, src.rows, 1);
    for (m, c) in src.iter() {
        if let Some(prev) = m.dec(j) {
            let factor = m.0[j] as f64 / m.total() as f64;
            out.add_to(&prev, &(c * cplx(factor, 0.0)));
        }
    }
    out.prune();
    ArvesonElement(out)
}

/// Multiplication by lambda_j (degree grows by one within the cap).
pub fn forward_shift(f: &ArvesonElement, j: usize) -> ArvesonElement {
    let src = &f.0;
    let mut out = TruncatedSeries::zero(src.d, src.degree_cap + 1, src.rows, 1);
    for (m, c) in src.iter() {
        out.set(m.inc(j), c.clone());
    }
    ArvesonElement(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::identity;

    /// Independent factorial oracle for the multinomial weight.
    fn weight_oracle(n: &[usize]) -> u128 {
        fn fact(k: usize) -> u128 {
            (1..=k as u128).product()
        }
        fact(n.iter().sum()) / n.iter().map(|&k| fact(k)).product::<u128>()
    }

    #[test]
    fn weight_examples() {
        assert_eq!(weight(&MultiIndex(vec![0, 0])).unwrap(), 1);
        assert_eq!(weight(&MultiIndex(vec![1, 1])).unwrap(), 2);
        // 3!/(2! 1!) by direct factorial evaluation.
        assert_eq!(
            weight(&MultiIndex(vec![2, 1])).unwrap(),
            weight_oracle(&[2, 1])
        );
        assert_eq!(weight(&MultiIndex(vec![2, 1])).unwrap(), 3);
    }

    #[test]
    fn weight_matches_oracle_and_permutation_symmetry() {
        for n in MultiIndex::up_to(3, 7) {
            let w = weight(&n).unwrap();
            assert_eq!(w, weight_oracle(&n.0), "weight at {:?}", n);
            let mut rev = n.0.clone();
            rev.reverse();
            assert_eq!(w, weight(&MultiIndex(rev)).unwrap());
        }
    }

    #[test]
    fn weight_overflow_reports_degree() {
        let n = MultiIndex(vec![90, 90]);
        match weight(&n) {
            Err(EngineError::DegreeTooLarge { degree }) => assert_eq!(degree, 180),
            other => panic!("expected overflow error, got {:?}", other),
        }
    }

    fn scalar_elem(d: usize, cap: usize, terms: &[(Vec<usize>, f64)]) -> ArvesonElement {
        let mut s = TruncatedSeries::zero(d, cap, 1, 1);
        for (n, v) in terms {
            s.set(MultiIndex(n.clone()), CMat::from_element(1, 1, cplx(*v, 0.0)));
        }
        ArvesonElement::new(s).unwrap()
    }

    #[test]
    fn inner_product_examples() {
        let l1l2 = scalar_elem(2, 4, &[(vec![1, 1], 1.0)]);
        let v = arveson_inner(&l1l2, &l1l2).unwrap();
        assert!((v.re - 0.5).abs() < 1e-15 && v.im.abs() < 1e-15);

        let l1sq = scalar_elem(2, 4, &[(vec![2, 0], 1.0)]);
        let v = arveson_inner(&l1sq, &l1sq).unwrap();
        assert!((v.re - 1.0).abs() < 1e-15);

        let l1 = scalar_elem(2, 4, &[(vec![1, 0], 1.0)]);
        let l2 = scalar_elem(2, 4, &[(vec![0, 1], 1.0)]);
        assert_eq!(arveson_inner(&l1, &l2).unwrap(), cplx(0.0, 0.0));
    }

    #[test]
    fn inner_product_shape_mismatch() {
        let a = scalar_elem(2, 4, &[(vec![1, 0], 1.0)]);
        let b = ArvesonElement::zero(2, 4, 2);
        assert!(matches!(
            arveson_inner(&a, &b),
            Err(EngineError::ShapeMismatch(_))
        ));
    }

    #[test]
    fn series_mul_identity_and_monomials() {
        let idm = TruncatedSeries::identity(2, 5, 1);
        let b = scalar_elem(2, 5, &[(vec![1, 0], 2.0), (vec![0, 2], -1.0)]).0;
        let prod = series_mul(&idm, &b, 5).unwrap();
        assert_eq!(prod, b);

        let l1 = TruncatedSeries::monomial(2, 5, MultiIndex(vec![1, 0]));
        let l2 = TruncatedSeries::monomial(2, 5, MultiIndex(vec![0, 1]));
        let p = series_mul(&l1, &l2, 5).unwrap();
        assert_eq!(p.coeff(&MultiIndex(vec![1, 1]))[(0, 0)], cplx(1.0, 0.0));
        assert_eq!(p.num_terms(), 1);
    }

    #[test]
    fn neumann_scalar_geometric() {
        // a = 1 - 0.5 lambda, inverse 1 + 0.5 lambda + 0.25 lambda^2 + ...
        let mut a = TruncatedSeries::identity(1, 6, 1);
        a.set(
            MultiIndex(vec![1]),
            CMat::from_element(1, 1, cplx(-0.5, 0.0)),
        );
        let inv = neumann_inverse(&a, 6).unwrap();
        for k in 0..=6usize {
            let c = inv.coeff(&MultiIndex(vec![k]))[(0, 0)];
            assert!((c.re - 0.5f64.powi(k as i32)).abs() < 1e-15);
        }
        // a * inv = I up to the cap.
        let prod = series_mul(&a, &inv, 6).unwrap();
        let idm = TruncatedSeries::identity(1, 6, 1);
        for (n, c) in prod.iter() {
            let expect = idm.coeff(n);
            assert!((c - expect).norm() < 1e-13);
        }
    }

    #[test]
    fn neumann_identity_input() {
        let idm = TruncatedSeries::identity(3, 4, 2);
        let inv = neumann_inverse(&idm, 4).unwrap();
        assert_eq!(inv, TruncatedSeries::identity(3, 4, 2));
    }

    #[test]
    fn neumann_rejects_nonidentity_constant() {
        let a = TruncatedSeries::constant(1, 3, CMat::from_element(1, 1, cplx(0.5, 0.0)));
        assert!(matches!(
            neumann_inverse(&a, 3),
            Err(EngineError::NotIdentityAtZero)
        ));
    }

    #[test]
    fn backward_shift_examples() {
        // M*_{l1} (l1 l2) = (1/2) l2.
        let f = scalar_elem(2, 4, &[(vec![1, 1], 1.0)]);
        let g = backward_shift(&f, 0);
        assert!((g.0.coeff(&MultiIndex(vec![0, 1]))[(0, 0)].re - 0.5).abs() < 1e-15);
        assert_eq!(g.0.num_terms(), 1);

        // Constants are annihilated.
        let c = scalar_elem(2, 4, &[(vec![0, 0], 3.0)]);
        assert_eq!(backward_shift(&c, 0).0.num_terms(), 0);

        // M*_{l1} (l1^2) = l1 (factor 2/2).
        let f = scalar_elem(2, 4, &[(vec![2, 0], 1.0)]);
        let g = backward_shift(&f, 0);
        assert!((g.0.coeff(&MultiIndex(vec![1, 0]))[(0, 0)].re - 1.0).abs() < 1e-15);
    }

    #[test]
    fn backward_shift_adjoint_to_forward_shift() {
        // <M*_j f, g> = <f, lambda_j g> on a spread of monomial pairs.
        let cap = 5;
        for j in 0..2 {
            for nf in MultiIndex::up_to(2, cap) {
                for ng in MultiIndex::up_to(2, cap - 1) {
                    let f = ArvesonElement::new(TruncatedSeries::monomial(2, cap, nf.clone()))
                        .unwrap();
                    let g = ArvesonElement::new(TruncatedSeries::monomial(2, cap, ng.clone()))
                        .unwrap();
                    let lhs = arveson_inner(&backward_shift(&f, j), &g).unwrap();
                    let rhs = arveson_inner(&f, &forward_shift(&g, j)).unwrap();
                    assert!(
                        (lhs - rhs).norm() < 1e-14,
                        "adjointness at {:?},{:?}",
                        nf,
                        ng
                    );
                }
            }
        }
    }

    #[test]
    fn gleason_identity_on_polynomials() {
        // f(lambda) - f(0) = sum_j lambda_j (M*_j f)(lambda).
        let f = scalar_elem(
            2,
            5,
            &[
                (vec![0, 0], 0.7),
                (vec![1, 0], -1.0),
                (vec![1, 1], 2.0),
                (vec![3, 1], 0.25),
            ],
        );
        let pts = crate::linalg::ball_points(2, 10, 0.8, 11);
        for p in pts {
            let lhs = f.eval(&p)[0] - f.eval(&[cplx(0.0, 0.0); 2])[0];
            let mut rhs = cplx(0.0, 0.0);
            for j in 0..2 {
                rhs += p[j] * backward_shift(&f, j).eval(&p)[0];
            }
            assert!((lhs - rhs).norm() < 1e-13);
        }
    }

    #[test]
    fn graded_lex_order() {
        let idx = MultiIndex::up_to(2, 2);
        let expect: Vec<Vec<usize>> = vec![
            vec![0, 0],
            vec![1, 0],
            vec![0, 1],
            vec![2, 0],
            vec![1, 1],
            vec![0, 2],
        ];
        assert_eq!(idx.iter().map(|n| n.0.clone()).collect::<Vec<_>>(), expect);
        let mut sorted = idx.clone();
        sorted.sort();
        assert_eq!(sorted, idx, "BTreeMap order must match generation order");
    }

    #[test]
    fn series_eval_matches_terms() {
        let s = scalar_elem(2, 3, &[(vec![1, 0], 2.0), (vec![0, 2], 1.0)]).0;
        let p = [cplx(0.3, 0.1), cplx(-0.2, 0.0)];
        let v = s.eval(&p)[(0, 0)];
        let expect = cplx(2.0, 0.0) * p[0] + p[1] * p[1];
        assert!((v - expect).norm() < 1e-15);
        let _ = identity(1);
    }
}
