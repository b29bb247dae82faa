//! Observability operators and gramians, strong stability via the
//! completely positive map Phi(X) = sum_j A_j^* X A_j, exact-observability
//! renormalization and the left-tangential annihilation test.
//!
//! Phi^N(I) equals the weighted power sum sum_{|n|=N} (N!/n!) A^{*n} A^n
//! for commutative tuples and the word sum in general, so one recursion
//! serves both cases without multinomial enumeration.

use std::collections::BTreeMap;

use crate::colligation::OutputPair;
use crate::error::{EngineError, Result};
use crate::linalg::{self, cplx, hermitize, identity, opnorm, CMat, CVec};
use crate::mindex::{weight_f64, ArvesonElement, MultiIndex, TruncatedSeries};

pub const DEFAULT_STABILITY_TOL: f64 = 1e-12;
pub const DEFAULT_STABILITY_HORIZON: usize = 300;
pub const DEFAULT_GRAMIAN_TOL: f64 = 1e-13;
pub const DEFAULT_GRAMIAN_MAX_TERMS: usize = 1 << 40;

/// State of the completely positive iteration: the pair, the current
/// iterate (Phi^N(I) or a partial gramian sum) and the iteration count.
#[derive(Clone, Debug)]
pub struct CpMapState {
    pub pair: OutputPair,
    pub iterate: CMat,
    pub n: usize,
}

impl CpMapState {
    pub fn start(pair: &OutputPair) -> Self {
        let p = pair.dim_state();
        CpMapState {
            pair: pair.clone(),
            iterate: identity(p),
            n: 0,
        }
    }

    /// One application of Phi to the iterate.
    pub fn step(&mut self) {
        self.iterate = apply_cp(&self.pair.a, &self.iterate);
        self.n += 1;
    }
}

/// Phi(X) = sum_j A_j^* X A_j.
pub fn apply_cp(a: &[CMat], x: &CMat) -> CMat {
    let p = x.nrows();
    let mut acc = CMat::zeros(p, p);
    for aj in a {
        acc += aj.adjoint() * x * aj;
    }
    acc
}

/// Truncated series of the observability operator value
/// C (I - Z(lambda)A)^{-1} x; for commutative A the coefficient at n is
/// weight(n) C A^n x.
pub fn observability_apply(pair: &OutputPair, x: &CVec, cap: usize) -> Result<ArvesonElement> {
    if x.len() != pair.dim_state() {
        return Err(EngineError::ShapeMismatch(format!(
            "state vector has length {}, pair state dimension is {}",
            x.len(),
            pair.dim_state()
        )));
    }
    let r = pair.dim_output();
    let mut out = TruncatedSeries::zero(pair.d, cap, r, 1);
    // v_n = (sum over words with abelianization n of A_w) x, built layer
    // by layer on the first letter: v_n = sum_j A_j v_{n-e_j}.
    let mut layer: BTreeMap<MultiIndex, CVec> = BTreeMap::new();
    layer.insert(MultiIndex::zero(pair.d), x.clone());
    for deg in 0..=cap {
        for (n, v) in &layer {
            let coeff = &pair.c * v;
            out.set(n.clone(), CMat::from_column_slice(r, 1, coeff.as_slice()));
        }
        if deg == cap {
            break;
        }
        let mut next: BTreeMap<MultiIndex, CVec> = BTreeMap::new();
        for (n, v) in &layer {
            for (j, aj) in pair.a.iter().enumerate() {
                let m = n.inc(j);
                let term = aj * v;
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
    ArvesonElement::new(out)
}

/// Decay report of the strong-stability iteration trace(Phi^N(I)).
#[derive(Clone, Debug)]
pub struct StabilityReport {
    pub stable: bool,
    /// Horizon exhausted while the sequence was still decreasing: the
    /// verdict is undecided rather than negative.
    pub inconclusive: bool,
    pub decay: Vec<f64>,
    pub iterations: usize,
}

/// Iterate Phi^N(I); stable when the trace falls below `tol` within
/// `max_iter` steps. The limit is not decidable at finite N, so a still
/// decreasing sequence at the horizon is flagged inconclusive instead of
/// unstable.
pub fn strong_stability(a: &[CMat], tol: f64, max_iter: usize) -> StabilityReport {
    let p = a.first().map_or(0, |m| m.nrows());
    let mut x = identity(p);
    let mut decay = vec![x.trace().re];
    let mut stable = false;
    for _ in 0..max_iter {
        x = apply_cp(a, &x);
        let t = x.trace().re;
        decay.push(t);
        if t < tol {
            stable = true;
            break;
        }
    }
    let n = decay.len();
    let decreasing = n >= 2 && decay[n - 1] < decay[n - 2] - f64::EPSILON * decay[n - 2].abs();
    StabilityReport {
        stable,
        inconclusive: !stable && decreasing,
        iterations: n - 1,
        decay,
    }
}

/// Observability gramian: the fixed point of G = C^*C + Phi(G), equal to
/// sum_n (|n|!/n!) A^{*n} C^* C A^n for commutative A and the word-sum
/// analogue otherwise.
///
/// For state dimension <= 64 the Neumann sum is accelerated by squaring
/// the vectorized map (each doubling squares the number of summed terms);
/// beyond that the plain Stein fixed-point iteration is used. Both paths
/// certify the Stein residual against `tol`.
pub fn gramian(pair: &OutputPair, tol: f64, max_iter: usize) -> Result<CMat> {
    let p = pair.dim_state();
    let q0 = pair.c.adjoint() * &pair.c;
    let g = if p <= 64 {
        gramian_doubling(pair, &q0, tol, max_iter)?
    } else {
        gramian_iteration(pair, &q0, tol, max_iter)?
    };
    let g = hermitize(&g);
    let residual = stein_residual(pair, &g);
    if residual > tol {
        return Err(EngineError::GramianDiverged {
            iterations: max_iter,
            residual,
        });
    }
    Ok(g)
}

/// || G - C^*C - sum_j A_j^* G A_j ||.
pub fn stein_residual(pair: &OutputPair, g: &CMat) -> f64 {
    opnorm(&(g - pair.c.adjoint() * &pair.c - apply_cp(&pair.a, g)))
}

fn gramian_doubling(pair: &OutputPair, q0: &CMat, tol: f64, max_iter: usize) -> Result<CMat> {
    let p = pair.dim_state();
    // Vectorized CP map: vec(A^* X A) = (A^T kron A^*) vec(X).
    let mut f = CMat::zeros(p * p, p * p);
    for aj in &pair.a {
        f += aj.transpose().kronecker(&aj.adjoint());
    }
    let mut s = CMat::from_column_slice(p * p, 1, q0.as_slice());
    let mut terms: usize = 1;
    let scale = opnorm(q0).max(1.0);
    loop {
        let tail = &f * &s;
        let tail_norm = opnorm(&tail);
        if tail_norm < 0.5 * tol * scale {
            s += tail; // fold the last tail in before stopping
            break;
        }
        if terms >= max_iter || !tail_norm.is_finite() || tail_norm > 1e12 * scale {
            return Err(EngineError::GramianDiverged {
                iterations: terms,
                residual: tail_norm,
            });
        }
        s += tail;
        f = &f * &f;
        terms *= 2;
    }
    Ok(CMat::from_column_slice(p, p, s.as_slice()))
}

fn gramian_iteration(pair: &OutputPair, q0: &CMat, tol: f64, max_iter: usize) -> Result<CMat> {
    let mut g = q0.clone();
    let scale = opnorm(q0).max(1.0);
    for k in 0..max_iter {
        let next = q0 + apply_cp(&pair.a, &g);
        let delta = opnorm(&(&next - &g));
        g = next;
        if delta < 0.5 * tol * scale {
            return Ok(g);
        }
        if !delta.is_finite() || delta > 1e12 * scale {
            return Err(EngineError::GramianDiverged {
                iterations: k + 1,
                residual: delta,
            });
        }
    }
    Ok(g)
}

/// Adjusted output pair with gramian renormalized to the identity:
/// A_j -> H^{1/2} A_j H^{-1/2}, C -> C H^{-1/2} with H the observability
/// gramian, which must be strictly positive definite. The result is
/// isometric, annihilates the same subspace and inherits commutativity and
/// strong stability.
pub fn renormalize_exactly_observable(pair: &OutputPair, tol: f64) -> Result<OutputPair> {
    let h = gramian(pair, DEFAULT_GRAMIAN_TOL.min(tol), DEFAULT_GRAMIAN_MAX_TERMS)?;
    let (h_inv_sqrt, _) =
        linalg::psd_inv_sqrt(&h, tol).ok_or(EngineError::NotExactlyObservable {
            min_eig: linalg::min_eig_hermitian(&h),
        })?;
    let h_sqrt = linalg::psd_sqrt(&h);
    let a = pair
        .a
        .iter()
        .map(|aj| &h_sqrt * aj * &h_inv_sqrt)
        .collect();
    OutputPair::new(pair.d, &pair.c * &h_inv_sqrt, a)
}

/// Left-tangential evaluation sum_n (1/weight(n)) h_n^* C^* f_n with
/// h_n the word sum of A over abelianization class n; collapses to
/// sum_n A^{*n} C^* f_n for commutative A. The input f is in the
/// annihilator subspace exactly when the result vanishes.
pub fn annihilator_residual(pair: &OutputPair, f: &ArvesonElement) -> Result<CVec> {
    if f.value_dim() != pair.dim_output() {
        return Err(EngineError::ShapeMismatch(format!(
            "element has values in C^{}, pair output dimension is {}",
            f.value_dim(),
            pair.dim_output()
        )));
    }
    let p = pair.dim_state();
    let cap = f.series().max_total_degree();
    let mut acc = CVec::zeros(p);
    let mut layer: BTreeMap<MultiIndex, CMat> = BTreeMap::new();
    layer.insert(MultiIndex::zero(pair.d), identity(p));
    for deg in 0..=cap {
        for (n, h) in &layer {
            let fn_coeff = f.series().coeff(n);
            if fn_coeff.iter().any(|z| z.norm() > 0.0) {
                let w = weight_f64(n)?;
                let fv = CVec::from_column_slice(fn_coeff.column(0).as_slice());
                acc += h.adjoint() * pair.c.adjoint() * fv * cplx(1.0 / w, 0.0);
            }
        }
        if deg == cap {
            break;
        }
        let mut next: BTreeMap<MultiIndex, CMat> = BTreeMap::new();
        for (n, h) in &layer {
            for (j, aj) in pair.a.iter().enumerate() {
                let m = n.inc(j);
                let term = aj * h;
                match next.get_mut(&m) {
                    Some(a) => *a += term,
                    None => {
                        next.insert(m, term);
                    }
                }
            }
        }
        layer = next;
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::demo;
    use crate::linalg::seeded_rng;
    use crate::mindex::arveson_inner;

    fn re(x: f64) -> crate::linalg::C64 {
        cplx(x, 0.0)
    }

    fn scalar_pair(a: f64, c: f64) -> OutputPair {
        OutputPair::new(
            1,
            CMat::from_element(1, 1, re(c)),
            vec![CMat::from_element(1, 1, re(a))],
        )
        .unwrap()
    }

    #[test]
    fn observability_apply_zero_a_is_constant() {
        let pair = OutputPair::new(
            2,
            CMat::from_row_slice(1, 2, &[re(2.0), re(-1.0)]),
            vec![CMat::zeros(2, 2), CMat::zeros(2, 2)],
        )
        .unwrap();
        let x = CVec::from_column_slice(&[re(1.0), re(1.0)]);
        let f = observability_apply(&pair, &x, 5).unwrap();
        assert_eq!(f.series().num_terms(), 1);
        assert!((f.series().coeff(&MultiIndex(vec![0, 0]))[(0, 0)] - re(1.0)).norm() < 1e-15);
    }

    #[test]
    fn observability_apply_monomial_basis() {
        // C (I - Z A)^{-1} = [1, l1, l2] on the inner-row pair.
        let pair = demo::degree_two_inner_pair();
        let e1 = CVec::from_column_slice(&[re(1.0), re(0.0), re(0.0)]);
        let f = observability_apply(&pair, &e1, 4).unwrap();
        assert_eq!(f.series().num_terms(), 1);
        assert!((f.series().coeff(&MultiIndex(vec![0, 0]))[(0, 0)] - re(1.0)).norm() < 1e-15);
        let e2 = CVec::from_column_slice(&[re(0.0), re(1.0), re(0.0)]);
        let f = observability_apply(&pair, &e2, 4).unwrap();
        assert_eq!(f.series().num_terms(), 1);
        assert!((f.series().coeff(&MultiIndex(vec![1, 0]))[(0, 0)] - re(1.0)).norm() < 1e-15);
    }

    #[test]
    fn observability_apply_geometric() {
        let pair = scalar_pair(0.5, 1.0);
        let x = CVec::from_element(1, re(1.0));
        let f = observability_apply(&pair, &x, 8).unwrap();
        for k in 0..=8usize {
            let c = f.series().coeff(&MultiIndex(vec![k]))[(0, 0)];
            assert!((c - re(0.5f64.powi(k as i32))).norm() < 1e-15);
        }
    }

    #[test]
    fn gramian_scalar_geometric() {
        let pair = scalar_pair(0.5, 1.0);
        let g = gramian(&pair, 1e-13, 1 << 30).unwrap();
        // Closed form 1/(1 - 0.25).
        assert!((g[(0, 0)] - re(4.0 / 3.0)).norm() < 1e-12);
    }

    #[test]
    fn gramian_of_isometric_nilpotent_pair_is_identity() {
        let pair = demo::degree_two_inner_pair();
        // Telescoping oracle: partial sums of Phi^k(C^*C) equal
        // I - Phi^{M+1}(I) for isometric pairs.
        let q0 = pair.c.adjoint() * &pair.c;
        let mut partial = q0.clone();
        let mut term = q0.clone();
        for _ in 0..4 {
            term = apply_cp(&pair.a, &term);
            partial += &term;
        }
        let mut phi_pow = identity(3);
        for _ in 0..5 {
            phi_pow = apply_cp(&pair.a, &phi_pow);
        }
        assert!(opnorm(&(&partial - (identity(3) - &phi_pow))) < 1e-14);
        let g = gramian(&pair, 1e-13, 1 << 30).unwrap();
        assert!(opnorm(&(g - identity(3))) < 1e-12);
    }

    #[test]
    fn gramian_zero_c() {
        let pair = OutputPair::new(
            2,
            CMat::zeros(1, 2),
            vec![
                CMat::from_partial_diagonal(2, 2, &[re(0.4), re(0.1)]),
                CMat::from_partial_diagonal(2, 2, &[re(0.2), re(0.3)]),
            ],
        )
        .unwrap();
        let g = gramian(&pair, 1e-13, 1 << 30).unwrap();
        assert!(opnorm(&g) < 1e-14);
    }

    #[test]
    fn gramian_diverges_for_unstable_pair() {
        let pair = scalar_pair(1.0, 1.0);
        assert!(matches!(
            gramian(&pair, 1e-12, 1 << 20),
            Err(EngineError::GramianDiverged { .. })
        ));
    }

    #[test]
    fn gramian_doubling_matches_iteration() {
        let mut rng = seeded_rng(41);
        for _ in 0..5 {
            let pair = demo::random_stable_pair(2, 5, 2, &mut rng);
            let q0 = pair.c.adjoint() * &pair.c;
            let g1 = gramian_doubling(&pair, &q0, 1e-13, 1 << 40).unwrap();
            let g2 = gramian_iteration(&pair, &q0, 1e-13, 1 << 20).unwrap();
            assert!(opnorm(&(g1 - g2)) < 1e-10);
        }
    }

    #[test]
    fn stein_residual_on_random_stable_pairs() {
        let mut rng = seeded_rng(42);
        for _ in 0..20 {
            let pair = demo::random_stable_pair(2, 4, 2, &mut rng);
            let g = gramian(&pair, 1e-13, 1 << 40).unwrap();
            assert!(stein_residual(&pair, &g) <= 1e-12);
        }
    }

    #[test]
    fn stability_nilpotent_at_two_steps() {
        let pair = demo::degree_two_inner_pair();
        let rep = strong_stability(&pair.a, 1e-12, 10);
        assert!(rep.stable);
        assert_eq!(rep.iterations, 2);
        assert!(rep.decay[2] <= 1e-14);
    }

    #[test]
    fn stability_identity_is_unstable_not_inconclusive() {
        let a = vec![CMat::from_element(1, 1, re(1.0))];
        let rep = strong_stability(&a, 1e-12, 50);
        assert!(!rep.stable);
        assert!(!rep.inconclusive);
        assert!(rep.decay.iter().all(|&t| (t - 1.0).abs() < 1e-15));
    }

    #[test]
    fn stability_scalar_decay_rate() {
        let a = vec![CMat::from_element(1, 1, re(0.9))];
        let rep = strong_stability(&a, 1e-12, 1000);
        assert!(rep.stable);
        for (k, t) in rep.decay.iter().enumerate().take(10) {
            assert!((t - 0.81f64.powi(k as i32)).abs() < 1e-13);
        }
    }

    #[test]
    fn stability_slow_decay_is_inconclusive() {
        let a = vec![CMat::from_element(1, 1, re(0.999))];
        let rep = strong_stability(&a, 1e-12, 100);
        assert!(!rep.stable);
        assert!(rep.inconclusive);
    }

    #[test]
    fn renormalize_isometric_pair_unchanged() {
        let pair = demo::degree_two_inner_pair();
        let adjusted = renormalize_exactly_observable(&pair, 1e-10).unwrap();
        assert!(opnorm(&(&adjusted.c - &pair.c)) < 1e-12);
        for j in 0..2 {
            assert!(opnorm(&(&adjusted.a[j] - &pair.a[j])) < 1e-12);
        }
    }

    #[test]
    fn renormalize_scalar_point_pair() {
        // Single interpolation node at (0.5, 0): H = 4/3, adjusted
        // C = sqrt(3)/2, A unchanged.
        let pair = OutputPair::new(
            2,
            CMat::from_element(1, 1, re(1.0)),
            vec![
                CMat::from_element(1, 1, re(0.5)),
                CMat::from_element(1, 1, re(0.0)),
            ],
        )
        .unwrap();
        let adjusted = renormalize_exactly_observable(&pair, 1e-10).unwrap();
        assert!((adjusted.c[(0, 0)] - re(3f64.sqrt() / 2.0)).norm() < 1e-12);
        assert!((adjusted.a[0][(0, 0)] - re(0.5)).norm() < 1e-12);
        assert!(adjusted.isometric_residual() < 1e-9);
    }

    #[test]
    fn renormalize_fails_on_unobservable_pair() {
        let pair = OutputPair::new(
            1,
            CMat::from_row_slice(1, 2, &[re(1.0), re(0.0)]),
            vec![CMat::zeros(2, 2)],
        )
        .unwrap();
        assert!(matches!(
            renormalize_exactly_observable(&pair, 1e-10),
            Err(EngineError::NotExactlyObservable { .. })
        ));
    }

    #[test]
    fn annihilator_constant_gives_c_star() {
        let pair = demo::degree_two_inner_pair();
        let mut s = TruncatedSeries::zero(2, 3, 1, 1);
        s.set(MultiIndex(vec![0, 0]), CMat::from_element(1, 1, re(2.0)));
        let f = ArvesonElement::new(s).unwrap();
        let res = annihilator_residual(&pair, &f).unwrap();
        let expect = pair.c.adjoint() * CVec::from_element(1, re(2.0));
        assert!((res - expect).norm() < 1e-15);
    }

    #[test]
    fn annihilator_at_origin_node() {
        // Single node at the origin: A = 0, C = 1; f = l1 vanishes there.
        let pair = OutputPair::new(
            2,
            CMat::from_element(1, 1, re(1.0)),
            vec![CMat::zeros(1, 1), CMat::zeros(1, 1)],
        )
        .unwrap();
        let f =
            ArvesonElement::new(TruncatedSeries::monomial(2, 3, MultiIndex(vec![1, 0]))).unwrap();
        let res = annihilator_residual(&pair, &f).unwrap();
        assert!(res.norm() < 1e-15);
    }

    #[test]
    fn annihilator_on_inner_row_pair() {
        let pair = demo::degree_two_inner_pair();
        // f = l1 is not annihilated: residual is A_1^* C^* = e_2.
        let f =
            ArvesonElement::new(TruncatedSeries::monomial(2, 3, MultiIndex(vec![1, 0]))).unwrap();
        let res = annihilator_residual(&pair, &f).unwrap();
        assert!((res[1] - re(1.0)).norm() < 1e-15);
        assert!(res[0].norm() < 1e-15 && res[2].norm() < 1e-15);
        // f = l1^2 is annihilated (explicit 3x3 products: A_1^{*2} C^* = 0).
        let f2 =
            ArvesonElement::new(TruncatedSeries::monomial(2, 3, MultiIndex(vec![2, 0]))).unwrap();
        let a1 = &pair.a[0];
        let oracle = a1.adjoint() * a1.adjoint() * pair.c.adjoint();
        assert!(opnorm(&oracle) < 1e-15);
        assert!(annihilator_residual(&pair, &f2).unwrap().norm() < 1e-15);
    }

    #[test]
    fn annihilator_adjoint_to_observability() {
        // <f, O x> = <residual(f), x> for random polynomials and states.
        let mut rng = seeded_rng(7);
        let pair = demo::random_stable_pair(2, 3, 2, &mut rng);
        for seed in 0..5u64 {
            let f = demo::random_polynomial(2, 4, 2, 100 + seed);
            let x = CVec::from_fn(3, |i, _| re(0.3 + 0.1 * (i as f64 + seed as f64)));
            let of = observability_apply(&pair, &x, 12).unwrap();
            let lhs = arveson_inner(&f, &of).unwrap();
            let res = annihilator_residual(&pair, &f).unwrap();
            let rhs = x.dotc(&res); // <res, x> = x^* res
            assert!((lhs - rhs).norm() < 1e-10, "seed {}", seed);
        }
    }

    #[test]
    fn renormalize_preserves_annihilator() {
        // f vanishing at the node stays annihilated after renormalization.
        let pair = OutputPair::new(
            2,
            CMat::from_element(1, 1, re(1.0)),
            vec![
                CMat::from_element(1, 1, re(0.5)),
                CMat::from_element(1, 1, re(0.0)),
            ],
        )
        .unwrap();
        let adjusted = renormalize_exactly_observable(&pair, 1e-10).unwrap();
        let mut s = TruncatedSeries::zero(2, 3, 1, 1);
        s.set(MultiIndex(vec![0, 0]), CMat::from_element(1, 1, re(-0.5)));
        s.set(MultiIndex(vec![1, 0]), CMat::from_element(1, 1, re(1.0)));
        let f = ArvesonElement::new(s).unwrap();
        assert!(annihilator_residual(&pair, &f).unwrap().norm() < 1e-14);
        assert!(annihilator_residual(&adjusted, &f).unwrap().norm() < 1e-14);
    }
}
