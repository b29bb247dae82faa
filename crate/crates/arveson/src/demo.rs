//! Worked multipliers, colligations and output pairs in two variables,
//! plus seeded random generators of structured instances, shared by the
//! unit tests, the acceptance suite and the CLI golden files.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::colligation::{Colligation, OutputPair};
use crate::linalg::{cplx, opnorm, random_unitary, seeded_rng, C64, CMat};
use crate::mindex::{ArvesonElement, MultiIndex, TruncatedSeries};

fn re(x: f64) -> C64 {
    cplx(x, 0.0)
}

fn mat(rows: usize, cols: usize, entries: &[f64]) -> CMat {
    CMat::from_row_slice(
        rows,
        cols,
        &entries.iter().map(|&x| re(x)).collect::<Vec<_>>(),
    )
}

/// The unique weakly coisometric, commutative, observable realization of the
/// inner row S = [l1^2, sqrt(2) l1 l2, l2^2] on the state space spanned by
/// {1, l1, l2}. Isometric but not coisometric.
pub fn degree_two_inner_row() -> Colligation {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    Colligation::new(
        2,
        vec![
            mat(3, 3, &[0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]),
            mat(3, 3, &[0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]),
        ],
        vec![
            mat(3, 3, &[0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, s, 0.0]),
            mat(3, 3, &[0.0, 0.0, 0.0, 0.0, s, 0.0, 0.0, 0.0, 1.0]),
        ],
        mat(1, 3, &[1.0, 0.0, 0.0]),
        mat(1, 3, &[0.0, 0.0, 0.0]),
    )
    .expect("shapes are consistent")
}

/// The output pair (C, A) of `degree_two_inner_row`.
pub fn degree_two_inner_pair() -> OutputPair {
    let col = degree_two_inner_row();
    col.output_pair()
}

/// Taylor series of S = [l1^2, sqrt(2) l1 l2, l2^2] (1x3, degree 2).
pub fn degree_two_inner_multiplier() -> TruncatedSeries {
    let mut s = TruncatedSeries::zero(2, 2, 1, 3);
    s.set(MultiIndex(vec![2, 0]), mat(1, 3, &[1.0, 0.0, 0.0]));
    s.set(
        MultiIndex(vec![1, 1]),
        mat(1, 3, &[0.0, std::f64::consts::SQRT_2, 0.0]),
    );
    s.set(MultiIndex(vec![0, 2]), mat(1, 3, &[0.0, 0.0, 1.0]));
    s
}

/// Taylor series of the redundant inner row S = [l1^2, l1 l2, l2^2, l1 l2]
/// (1x4, degree 2): same de Branges-Rovnyak space as
/// `degree_two_inner_multiplier`, but the input operator is no longer
/// unique — a one-parameter family survives.
pub fn degree_two_redundant_multiplier() -> TruncatedSeries {
    let mut s = TruncatedSeries::zero(2, 2, 1, 4);
    s.set(MultiIndex(vec![2, 0]), mat(1, 4, &[1.0, 0.0, 0.0, 0.0]));
    s.set(MultiIndex(vec![1, 1]), mat(1, 4, &[0.0, 1.0, 0.0, 1.0]));
    s.set(MultiIndex(vec![0, 2]), mat(1, 4, &[0.0, 0.0, 1.0, 0.0]));
    s
}

/// The input operators B_1, B_2 of the redundant-row family at a real
/// parameter alpha, written in the monomial basis {1, l1, l2}.
pub fn degree_two_redundant_b(alpha: f64) -> (CMat, CMat) {
    let p = (1.0 + alpha) / 2.0;
    let m = (1.0 - alpha) / 2.0;
    (
        mat(3, 4, &[0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, p, 0.0, m]),
        mat(3, 4, &[0.0, 0.0, 0.0, 0.0, 0.0, m, 0.0, p, 0.0, 0.0, 1.0, 0.0]),
    )
}

/// A coisometric (7x8) colligation with nilpotent commuting state tuple
/// realizing the non-inner row S = (1/2)[l1^2, l1 l2, l1 l2, l2^2, sqrt(3)].
pub fn nilpotent_coisometric_colligation() -> Colligation {
    let h = 0.5;
    let q = 3f64.sqrt() / 2.0;
    Colligation::new(
        2,
        shifted_state_tuple(re(0.0)),
        vec![
            mat(
                3,
                5,
                &[
                    0.0, 0.0, 0.0, 0.0, 0.0, //
                    1.0, 0.0, 0.0, 0.0, 0.0, //
                    0.0, 1.0, 0.0, 0.0, 0.0,
                ],
            ),
            mat(
                3,
                5,
                &[
                    0.0, 0.0, 0.0, 0.0, 0.0, //
                    0.0, 0.0, 1.0, 0.0, 0.0, //
                    0.0, 0.0, 0.0, 1.0, 0.0,
                ],
            ),
        ],
        mat(1, 3, &[h, 0.0, 0.0]),
        mat(1, 5, &[0.0, 0.0, 0.0, 0.0, q]),
    )
    .expect("shapes are consistent")
}

/// The gamma-deformed state tuple sharing the observability row
/// (1/2)[1, l1, l2] for every gamma; noncommutative exactly when
/// gamma != 0.
pub fn shifted_state_tuple(gamma: C64) -> Vec<CMat> {
    let mut a1 = mat(3, 3, &[0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
    a1[(2, 0)] = gamma;
    let mut a2 = mat(3, 3, &[0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
    a2[(1, 0)] = -gamma;
    vec![a1, a2]
}

/// Output pair (C, A_gamma) with C = (1/2)[1, 0, 0].
pub fn shifted_state_pair(gamma: C64) -> OutputPair {
    OutputPair::new(2, mat(1, 3, &[0.5, 0.0, 0.0]), shifted_state_tuple(gamma))
        .expect("shapes are consistent")
}

/// Taylor series of the non-inner row realized by
/// `nilpotent_coisometric_colligation` (1x5, degree 2, constant column).
pub fn nilpotent_multiplier_row() -> TruncatedSeries {
    let mut s = TruncatedSeries::zero(2, 2, 1, 5);
    s.set(
        MultiIndex(vec![0, 0]),
        mat(1, 5, &[0.0, 0.0, 0.0, 0.0, 3f64.sqrt() / 2.0]),
    );
    s.set(MultiIndex(vec![2, 0]), mat(1, 5, &[0.5, 0.0, 0.0, 0.0, 0.0]));
    s.set(MultiIndex(vec![1, 1]), mat(1, 5, &[0.0, 0.5, 0.5, 0.0, 0.0]));
    s.set(MultiIndex(vec![0, 2]), mat(1, 5, &[0.0, 0.0, 0.0, 0.5, 0.0]));
    s
}

/// The rational 2x4 Schur multiplier whose de Branges-Rovnyak space is
/// two-dimensional yet not backward-shift invariant:
/// S = (4 - l1 l2)^{-1} [2 sqrt(3) l1, sqrt(3) l2^2, 2 - 2 l1 l2, -3 l2;
///                       sqrt(3) l1^2, 2 sqrt(3) l2, -3 l1, 2 - 2 l1 l2].
pub fn rational_2x4_eval(point: &[C64]) -> CMat {
    let (l1, l2) = (point[0], point[1]);
    let s3 = re(3f64.sqrt());
    let den = re(4.0) - l1 * l2;
    let mut m = CMat::zeros(2, 4);
    m[(0, 0)] = re(2.0) * s3 * l1;
    m[(0, 1)] = s3 * l2 * l2;
    m[(0, 2)] = re(2.0) - re(2.0) * l1 * l2;
    m[(0, 3)] = re(-3.0) * l2;
    m[(1, 0)] = s3 * l1 * l1;
    m[(1, 1)] = re(2.0) * s3 * l2;
    m[(1, 2)] = re(-3.0) * l1;
    m[(1, 3)] = re(2.0) - re(2.0) * l1 * l2;
    m / den
}

/// The factored rank-two form of the kernel of `rational_2x4_eval`:
/// K_S(l, z) = 3 / ((4 - l1 l2)(4 - conj(z1) conj(z2)))
///             [2, l2; l1, 2] [2, conj(z1); conj(z2), 2].
pub fn rational_2x4_kernel_factored(lambda: &[C64], zeta: &[C64]) -> CMat {
    let (l1, l2) = (lambda[0], lambda[1]);
    let (z1, z2) = (zeta[0].conj(), zeta[1].conj());
    let left = CMat::from_row_slice(2, 2, &[re(2.0), l2, l1, re(2.0)]);
    let right = CMat::from_row_slice(2, 2, &[re(2.0), z1, z2, re(2.0)]);
    let den = (re(4.0) - l1 * l2) * (re(4.0) - z1 * z2);
    left * right * (re(3.0) / den)
}

/// The two spanning elements of the de Branges-Rovnyak space of
/// `rational_2x4_eval`, truncated at total degree `cap`:
/// f1 = 4 (4 - l1 l2)^{-1} [2; l1], f2 = 4 (4 - l1 l2)^{-1} [l2; 2].
pub fn rational_2x4_span(cap: usize) -> (ArvesonElement, ArvesonElement) {
    let mut f1 = TruncatedSeries::zero(2, cap, 2, 1);
    let mut f2 = TruncatedSeries::zero(2, cap, 2, 1);
    let mut k = 0usize;
    loop {
        let scale = 0.25f64.powi(k as i32);
        if 2 * k <= cap {
            f1.set(MultiIndex(vec![k, k]), mat(2, 1, &[2.0 * scale, 0.0]));
            f2.set(MultiIndex(vec![k, k]), mat(2, 1, &[0.0, 2.0 * scale]));
        }
        if 2 * k + 1 <= cap {
            f1.set(MultiIndex(vec![k + 1, k]), mat(2, 1, &[0.0, scale]));
            f2.set(MultiIndex(vec![k, k + 1]), mat(2, 1, &[scale, 0.0]));
        }
        if 2 * k >= cap {
            break;
        }
        k += 1;
    }
    (
        ArvesonElement::new(f1).unwrap(),
        ArvesonElement::new(f2).unwrap(),
    )
}

fn random_matrix(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> CMat {
    CMat::from_fn(rows, cols, |_, _| {
        cplx(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    })
}

/// Random output pair scaled so that the stacked column [A; C] has
/// operator norm 0.9: contractive with margin and strongly stable
/// (Phi(I) <= 0.81 I).
pub fn random_stable_pair(d: usize, p: usize, r: usize, rng: &mut ChaCha8Rng) -> OutputPair {
    let a: Vec<CMat> = (0..d).map(|_| random_matrix(p, p, rng)).collect();
    let c = random_matrix(r, p, rng);
    let pair = OutputPair::new(d, c, a).expect("shapes are consistent");
    let sigma = opnorm(&pair.stacked()).max(f64::MIN_POSITIVE);
    let scale = cplx(0.9 / sigma, 0.0);
    OutputPair::new(
        d,
        &pair.c * scale,
        pair.a.iter().map(|aj| aj * scale).collect(),
    )
    .expect("shapes are consistent")
}

/// Random contractive colligation: a random block matrix scaled to
/// operator norm <= `sigma`.
pub fn random_contractive_colligation(
    d: usize,
    p: usize,
    q: usize,
    r: usize,
    sigma: f64,
    rng: &mut ChaCha8Rng,
) -> Colligation {
    let u = random_matrix(d * p + r, p + q, rng);
    let scale = cplx(sigma / opnorm(&u).max(f64::MIN_POSITIVE), 0.0);
    let u = u * scale;
    let a = (0..d)
        .map(|j| u.view((j * p, 0), (p, p)).into_owned())
        .collect();
    let b = (0..d)
        .map(|j| u.view((j * p, p), (p, q)).into_owned())
        .collect();
    let c = u.view((d * p, 0), (r, p)).into_owned();
    let d_op = u.view((d * p, p), (r, q)).into_owned();
    Colligation::new(d, a, b, c, d_op).expect("shapes are consistent")
}

/// Random commuting strict row contraction: jointly diagonalizable tuple
/// V diag_j V^* with the block row scaled to norm `row_norm` < 1.
pub fn random_commuting_row_contraction(
    d: usize,
    p: usize,
    row_norm: f64,
    rng: &mut ChaCha8Rng,
) -> Vec<CMat> {
    let v = random_unitary(p, rng);
    let diags: Vec<Vec<C64>> = (0..d)
        .map(|_| {
            (0..p)
                .map(|_| cplx(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect()
        })
        .collect();
    // Row norm of a jointly diagonal tuple is max_i sqrt(sum_j |d_ji|^2).
    let worst = (0..p)
        .map(|i| diags.iter().map(|dg| dg[i].norm_sqr()).sum::<f64>().sqrt())
        .fold(0.0, f64::max)
        .max(f64::MIN_POSITIVE);
    let scale = cplx(row_norm / worst, 0.0);
    diags
        .iter()
        .map(|dg| {
            let m = CMat::from_diagonal(&nalgebra::DVector::from_iterator(
                p,
                dg.iter().map(|&z| z * scale),
            ));
            &v * m * v.adjoint()
        })
        .collect()
}

/// Random scalar- or vector-valued polynomial with entries in the unit
/// square, keyed by a seed.
pub fn random_polynomial(d: usize, cap: usize, value_dim: usize, seed: u64) -> ArvesonElement {
    let mut rng = seeded_rng(seed);
    let mut s = TruncatedSeries::zero(d, cap, value_dim, 1);
    for n in MultiIndex::up_to(d, cap) {
        s.set(n, random_matrix(value_dim, 1, &mut rng));
    }
    ArvesonElement::new(s).expect("column-valued by construction")
}
