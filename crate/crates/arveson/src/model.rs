//! The de Branges-Rovnyak side: truncated-polynomial model of H(K_S),
//! Gleason solvers, functional-model realizations with A_j the compressed
//! backward shifts and C evaluation at zero, the parametrized input
//! operator B (contraction X : D-perp -> U_S^0), the multiplier-Gram
//! partial-isometry test, and the representer family for shift-invariant
//! subspaces.

use crate::colligation::{Colligation, OutputPair};
use crate::error::{EngineError, Result};
use crate::kernels::{d_subspace, DSubspace};
use crate::linalg::{
    ball_points, canonical_subspace_basis, cplx, identity, null_basis, opnorm, pinv, rank, C64,
    CMat, CVec,
};
use crate::mindex::{
    arveson_inner, backward_shift, weight_f64, ArvesonElement, MultiIndex, TruncatedSeries,
};
use crate::observability::{strong_stability, DEFAULT_STABILITY_HORIZON, DEFAULT_STABILITY_TOL};

/// A finite-dimensional subspace of the Y-valued Arveson space presented
/// by an orthonormal basis of polynomials.
#[derive(Clone, Debug)]
pub struct FunctionSubspace {
    pub d: usize,
    pub value_dim: usize,
    pub degree_cap: usize,
    pub basis: Vec<ArvesonElement>,
}

impl FunctionSubspace {
    /// Orthonormalize a spanning family (modified Gram-Schmidt in the
    /// given order, dropping directions below `tol`).
    pub fn from_elements(
        d: usize,
        value_dim: usize,
        elements: Vec<ArvesonElement>,
        tol: f64,
    ) -> Result<Self> {
        let mut basis: Vec<ArvesonElement> = Vec::new();
        let mut degree_cap = 0;
        for el in elements {
            if el.value_dim() != value_dim || el.series().d != d {
                return Err(EngineError::ShapeMismatch(
                    "subspace elements must share shape".into(),
                ));
            }
            let mut work = el.series().clone();
            for b in &basis {
                let coeff = arveson_inner(&ArvesonElement(work.clone()), b)?;
                work = work.add(&b.series().scale(-coeff))?;
            }
            let candidate = ArvesonElement::new(work)?;
            let nrm = candidate.norm()?;
            if nrm > tol {
                let normalized = candidate.series().scale(cplx(1.0 / nrm, 0.0));
                degree_cap = degree_cap.max(normalized.max_total_degree());
                basis.push(ArvesonElement::new(normalized)?);
            }
        }
        Ok(FunctionSubspace {
            d,
            value_dim,
            degree_cap,
            basis,
        })
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// Row of basis evaluations E(lambda) = [e_1(lambda) ... e_p(lambda)]
    /// (value_dim x dim). Coordinates of the kernel section K_S(. , zeta)y
    /// in this basis are E(zeta)^* y.
    pub fn eval_matrix(&self, point: &[C64]) -> CMat {
        let mut m = CMat::zeros(self.value_dim, self.dim());
        for (k, b) in self.basis.iter().enumerate() {
            m.set_column(k, &b.eval(point));
        }
        m
    }

    /// Gram matrix in the weighted inner product (identity for a valid
    /// subspace).
    pub fn gram(&self) -> Result<CMat> {
        let p = self.dim();
        let mut g = CMat::zeros(p, p);
        for i in 0..p {
            for k in 0..p {
                g[(i, k)] = arveson_inner(&self.basis[k], &self.basis[i])?;
            }
        }
        Ok(g)
    }

    /// Evaluation at the origin as a value_dim x dim matrix.
    pub fn eval_at_zero(&self) -> CMat {
        self.eval_matrix(&vec![cplx(0.0, 0.0); self.d])
    }
}

/// Matrix of M_S^* M_S in the orthonormal weighted monomial basis
/// sqrt(weight(n)) lambda^n e_j of the input space, over all |n| <= degree.
#[derive(Clone, Debug)]
pub struct MultiplierGram {
    pub degree: usize,
    pub indices: Vec<MultiIndex>,
    pub input_dim: usize,
    pub matrix: CMat,
}

/// Assemble the Gram data of the multiplication operator for a polynomial
/// multiplier: entries <S lambda^n e_j, S lambda^m e_i> are exact via the
/// weighted inner product.
pub fn multiplier_gram(s: &TruncatedSeries, degree: usize) -> Result<MultiplierGram> {
    let q = s.cols;
    let g_deg = s.max_total_degree();
    let indices = MultiIndex::up_to(s.d, degree);
    let n_idx = indices.len();
    // Precompute all shifted columns S lambda^n e_j as elements.
    let mut products: Vec<ArvesonElement> = Vec::with_capacity(n_idx * q);
    for n in &indices {
        let shifted = s.shifted(n, degree + g_deg);
        for j in 0..q {
            products.push(ArvesonElement::new(shifted.column(j))?);
        }
    }
    let dim = n_idx * q;
    let mut matrix = CMat::zeros(dim, dim);
    for (alpha, n) in indices.iter().enumerate() {
        let wa = weight_f64(n)?.sqrt();
        for i in 0..q {
            for (beta, m) in indices.iter().enumerate() {
                let wb = weight_f64(m)?.sqrt();
                for j in 0..q {
                    // <M_S phi_beta, M_S phi_alpha>
                    let ip = arveson_inner(&products[beta * q + j], &products[alpha * q + i])?;
                    matrix[(alpha * q + i, beta * q + j)] = ip * cplx(wa * wb, 0.0);
                }
            }
        }
    }
    Ok(MultiplierGram {
        degree,
        indices,
        input_dim: q,
        matrix,
    })
}

#[derive(Clone, Debug)]
pub struct PartialIsometryReport {
    pub pass: bool,
    pub defect: f64,
    /// Degree up to which idempotency was certified.
    pub degree_certified: usize,
}

/// Check (M_S^* M_S)^2 = M_S^* M_S on inputs of degree <= k. The Gram is
/// assembled up to degree k + deg S so the composition is exact there;
/// certification is degree-limited and reported as such.
pub fn partial_isometry_test(s: &TruncatedSeries, k: usize, tol: f64) -> Result<PartialIsometryReport> {
    let pad = s.max_total_degree();
    let gram = multiplier_gram(s, k + pad)?;
    let q = gram.input_dim;
    let low = MultiIndex::up_to(s.d, k).len() * q;
    let g2 = &gram.matrix * &gram.matrix;
    let diff = (g2 - &gram.matrix).view((0, 0), (low, low)).into_owned();
    let defect = opnorm(&diff);
    Ok(PartialIsometryReport {
        pass: defect <= tol,
        defect,
        degree_certified: k,
    })
}

/// The polynomials of degree <= N - deg S orthogonal to every product
/// S lambda^n u: exactly H(K_S) intersected with that degree range when S
/// is inner. The reproducing property is then validated on sample points,
/// turning the truncation into a certificate.
pub fn hks_subspace(s: &TruncatedSeries, n_cap: usize, tol: f64) -> Result<FunctionSubspace> {
    let g_deg = s.max_total_degree();
    if n_cap < g_deg {
        return Err(EngineError::Invalid(format!(
            "degree cap {} below multiplier degree {}",
            n_cap, g_deg
        )));
    }
    let m_cap = n_cap - g_deg;
    let r = s.rows;
    let q = s.cols;
    let ambient: Vec<MultiIndex> = MultiIndex::up_to(s.d, m_cap);
    let dim = ambient.len() * r;
    // Constraint rows: coordinates of the truncations of S lambda^n e_j in
    // the orthonormal monomial basis of the ambient polynomial space.
    let mut rows: Vec<CVec> = Vec::new();
    for n in &ambient {
        let shifted = s.shifted(n, n_cap);
        for j in 0..q {
            let mut v = CVec::zeros(dim);
            for (a, m) in ambient.iter().enumerate() {
                let coeff = shifted.coeff(m);
                let w = weight_f64(m)?.sqrt();
                for i in 0..r {
                    v[a * r + i] = coeff[(i, j)] / cplx(w, 0.0);
                }
            }
            rows.push(v);
        }
    }
    let mut constraint = CMat::zeros(rows.len(), dim);
    for (i, v) in rows.iter().enumerate() {
        constraint.row_mut(i).copy_from(&v.adjoint());
    }
    let kernel = canonical_subspace_basis(&null_basis(&constraint, 1e-10), 1e-10);
    // Coordinates back to polynomials.
    let mut basis = Vec::with_capacity(kernel.ncols());
    for col in 0..kernel.ncols() {
        let mut series = TruncatedSeries::zero(s.d, m_cap, r, 1);
        for (a, m) in ambient.iter().enumerate() {
            let w = weight_f64(m)?.sqrt();
            let mut cm = CMat::zeros(r, 1);
            let mut nonzero = false;
            for i in 0..r {
                let z = kernel[(a * r + i, col)] * cplx(w, 0.0);
                if z.norm() > 0.0 {
                    nonzero = true;
                }
                cm[(i, 0)] = z;
            }
            if nonzero {
                series.add_to(m, &cm);
            }
        }
        basis.push(ArvesonElement::new(series)?);
    }
    let space = FunctionSubspace {
        d: s.d,
        value_dim: r,
        degree_cap: m_cap,
        basis,
    };
    // Reproducing-property certificate: the basis must factor the kernel,
    // E(eta) E(zeta)^* = K_S(eta, zeta), on sample pairs.
    let pts = ball_points(s.d, (2 * space.dim()).max(6), 0.6, 8_191);
    let mut worst: f64 = 0.0;
    for eta in &pts {
        for zeta in &pts {
            let ks = crate::kernels::kernel_ks(|p| Ok(s.eval(p)), eta, zeta)?;
            let reproduced = space.eval_matrix(eta) * space.eval_matrix(zeta).adjoint();
            worst = worst.max(opnorm(&(ks - reproduced)));
        }
    }
    if worst > tol {
        return Err(EngineError::HksValidationFailed { residual: worst });
    }
    Ok(space)
}

/// Closure diagnostics of the Gleason solution on a subspace.
#[derive(Clone, Debug)]
pub struct GleasonReport {
    /// Largest distance of a backward-shift image from the subspace.
    pub max_closure_residual: f64,
    /// Largest excess of sum_j ||A_j f||^2 over ||f||^2 - ||f(0)||^2 on
    /// the pair (0 when the solution is contractive).
    pub contractive_excess: f64,
    pub contractive: bool,
}

/// Compress the backward shifts to the subspace: A_j = M_{lambda_j}^*
/// restricted, C = evaluation at zero. Fails with the offending basis
/// vector when the subspace is not backward-shift invariant.
pub fn gleason_model_pair(
    space: &FunctionSubspace,
    tol: f64,
) -> Result<(OutputPair, GleasonReport)> {
    let p = space.dim();
    let mut a = Vec::with_capacity(space.d);
    let mut max_res: f64 = 0.0;
    for j in 0..space.d {
        let mut aj = CMat::zeros(p, p);
        for (k, f) in space.basis.iter().enumerate() {
            let img = backward_shift(f, j);
            let mut norm2 = img.norm_squared()?;
            for (i, e) in space.basis.iter().enumerate() {
                let coeff = arveson_inner(&img, e)?;
                aj[(i, k)] = coeff;
                norm2 -= coeff.norm_sqr();
            }
            let residual = norm2.max(0.0).sqrt();
            if residual > tol {
                return Err(EngineError::NotShiftInvariant {
                    basis_index: k,
                    var: j,
                    residual,
                });
            }
            max_res = max_res.max(residual);
        }
        a.push(aj);
    }
    let c = space.eval_at_zero();
    let pair = OutputPair::new(space.d, c, a)?;
    let excess = pair.contractive_excess();
    Ok((
        pair,
        GleasonReport {
            max_closure_residual: max_res,
            contractive_excess: excess,
            contractive: excess <= tol,
        },
    ))
}

/// The functional-model realization family of an inner multiplier: the
/// model pair, the subspace D with its complement, the D-determined part
/// of the input operator, and the kernel U_S^0 = {u : S u = 0} receiving
/// the free contraction parameter.
#[derive(Clone, Debug)]
pub struct ModelRealizationFamily {
    pub d: usize,
    pub s0: CMat,
    pub pair: OutputPair,
    pub dsub: DSubspace,
    /// Orthonormal basis of D-perp inside X^d.
    pub dperp: CMat,
    /// Orthonormal basis of U_S^0 inside the input space.
    pub u0_basis: CMat,
    /// B^* restricted to D (vanishing on D-perp), as a q x dp matrix.
    pub b_core_star: CMat,
    /// Relative least-squares residual of the D-determined part.
    pub core_residual: f64,
}

impl ModelRealizationFamily {
    pub fn dim_dperp(&self) -> usize {
        self.dperp.ncols()
    }

    pub fn dim_u0(&self) -> usize {
        self.u0_basis.ncols()
    }
}

/// Solve for the family of an inner polynomial multiplier from its model
/// pair: B^* on D is pinned by the kernel sections
/// Z(zeta)^* K_S(., zeta) y -> S(zeta)^* y - S(0)^* y, sampled in
/// oversupply and solved by minimum-norm least squares; U_S^0 is the
/// kernel of the stacked Taylor coefficients.
pub fn model_family(
    s: &TruncatedSeries,
    space: &FunctionSubspace,
    pair: &OutputPair,
    tol: f64,
    seed: u64,
) -> Result<ModelRealizationFamily> {
    let p = pair.dim_state();
    let r = s.rows;
    let q = s.cols;
    if space.dim() != p || space.value_dim != r {
        return Err(EngineError::ShapeMismatch(
            "model pair and subspace dimensions disagree".into(),
        ));
    }
    let dsub = d_subspace(pair, 2 * (space.degree_cap + 2), 1e-8, seed)?;
    let dperp = dsub.complement(1e-10);
    // U_S^0: kernel of the stacked coefficient matrix.
    let terms: Vec<&CMat> = s.iter().map(|(_, c)| c).collect();
    let mut stacked = CMat::zeros(terms.len() * r, q);
    for (i, c) in terms.iter().enumerate() {
        stacked.view_mut((i * r, 0), (r, q)).copy_from(*c);
    }
    let u0_basis = canonical_subspace_basis(&null_basis(&stacked, 1e-10), 1e-10);

    // Sampled generators of D with their targets.
    let k_d = dsub.dim();
    let count = (2 * k_d).max(4);
    let pts = ball_points(pair.d, count, 0.7, seed.wrapping_add(1));
    let mut gens = CMat::zeros(pair.d * p, count * r);
    let mut targets = CMat::zeros(q, count * r);
    let s0 = s.coeff(&MultiIndex::zero(s.d));
    for (i, zeta) in pts.iter().enumerate() {
        let coords = space.eval_matrix(zeta).adjoint(); // p x r
        for j in 0..pair.d {
            gens.view_mut((j * p, i * r), (p, r))
                .copy_from(&(&coords * zeta[j].conj()));
        }
        let t = (s.eval(zeta) - &s0).adjoint(); // q x r
        targets.view_mut((0, i * r), (q, r)).copy_from(&t);
    }
    if rank(&gens, 1e-10) < k_d {
        return Err(EngineError::ModelInconsistency {
            residual: f64::INFINITY,
            tol,
        });
    }
    let mut b_core_star = &targets * pinv(&gens, 1e-12);
    // Pin the minimum-norm solution exactly to D.
    b_core_star = b_core_star * (&dsub.basis * dsub.basis.adjoint());
    let scale = opnorm(&targets).max(1.0);
    let core_residual = opnorm(&(&b_core_star * &gens - &targets)) / scale;
    if core_residual > tol {
        return Err(EngineError::ModelInconsistency {
            residual: core_residual,
            tol,
        });
    }
    Ok(ModelRealizationFamily {
        d: pair.d,
        s0,
        pair: pair.clone(),
        dsub,
        dperp,
        u0_basis,
        b_core_star,
        core_residual,
    })
}

/// Structural classification promised by the free parameter.
#[derive(Clone, Debug)]
pub struct AssemblyClassification {
    /// X is an isometry from D-perp into U_S^0.
    pub coisometric_expected: bool,
    /// X is unitary between D-perp and U_S^0.
    pub unitary_expected: bool,
}

/// Assemble the colligation of the family member with parameter X
/// (a contraction from D-perp to U_S^0, in the orthonormal bases carried
/// by the family). Always weakly coisometric; coisometric exactly when X
/// is isometric, unitary exactly when X is unitary.
pub fn assemble(
    family: &ModelRealizationFamily,
    x: &CMat,
    tol: f64,
) -> Result<(Colligation, AssemblyClassification)> {
    let k_perp = family.dim_dperp();
    let k0 = family.dim_u0();
    if x.nrows() != k0 || x.ncols() != k_perp {
        return Err(EngineError::ShapeMismatch(format!(
            "parameter X is {}x{}, expected {}x{}",
            x.nrows(),
            x.ncols(),
            k0,
            k_perp
        )));
    }
    let norm = opnorm(x);
    if norm > 1.0 + tol {
        return Err(EngineError::ParameterNotContractive { norm });
    }
    let p = family.pair.dim_state();
    let q = family.s0.ncols();
    let b_star = &family.b_core_star + &family.u0_basis * x * family.dperp.adjoint();
    let b_full = b_star.adjoint(); // dp x q
    let b = (0..family.d)
        .map(|j| b_full.view((j * p, 0), (p, q)).into_owned())
        .collect();
    let col = Colligation::new(
        family.d,
        family.pair.a.clone(),
        b,
        family.pair.c.clone(),
        family.s0.clone(),
    )?;
    let iso = opnorm(&(x.adjoint() * x - identity(k_perp)));
    let coiso = opnorm(&(x * x.adjoint() - identity(k0)));
    Ok((
        col,
        AssemblyClassification {
            coisometric_expected: iso <= tol,
            unitary_expected: iso <= tol && coiso <= tol,
        },
    ))
}

/// The representer family of a shift-invariant subspace presented by its
/// model pair on N = M-perp: T = [A^*|_D, C^*], the defect root
/// (I - T^*T)^{1/2}, and a constructor taking any isometry G on the
/// defect range to an inner multiplier realization.
#[derive(Clone, Debug)]
pub struct RepresenterFamily {
    pub pair: OutputPair,
    pub dsub: DSubspace,
    pub t_mat: CMat,
    /// (I - T^* T)^{1/2} on D (+) Y.
    pub defect_root: CMat,
    /// Orthonormal basis of the range of the defect root.
    pub range: CMat,
}

impl RepresenterFamily {
    /// Dimension of the defect range: the least admissible input
    /// dimension.
    pub fn min_input_dim(&self) -> usize {
        self.range.ncols()
    }

    /// Build the inner realization for an isometry G (input_dim x rank,
    /// orthonormal columns) identifying the defect range inside the input
    /// space.
    pub fn inner_from_isometry(&self, g: &CMat) -> Result<Colligation> {
        let rho = self.min_input_dim();
        if g.ncols() != rho {
            return Err(EngineError::ShapeMismatch(format!(
                "G has {} columns, defect range has dimension {}",
                g.ncols(),
                rho
            )));
        }
        if opnorm(&(g.adjoint() * g - identity(rho))) > 1e-10 {
            return Err(EngineError::Invalid(
                "G must have orthonormal columns".into(),
            ));
        }
        let pair = &self.pair;
        let p = pair.dim_state();
        let r = pair.dim_output();
        let k = self.dsub.dim();
        let q = g.nrows();
        // [B^*|_D, D^*]^* = W R G^*, the generic isometric completion of
        // the D (+) Y compression.
        let t2_star = &self.defect_root * &self.range * g.adjoint(); // (k+r) x q
        let b_d = t2_star.view((0, 0), (k, q)).into_owned();
        let d_op = t2_star.view((k, 0), (r, q)).into_owned();
        let b_full = &self.dsub.basis * b_d; // dp x q
        let b = (0..pair.d)
            .map(|j| b_full.view((j * p, 0), (p, q)).into_owned())
            .collect();
        Colligation::new(pair.d, pair.a.clone(), b, pair.c.clone(), d_op)
    }

    /// The realization with minimal input space (G the identity).
    pub fn canonical(&self) -> Result<Colligation> {
        self.inner_from_isometry(&identity(self.min_input_dim()))
    }
}

/// Build the representer family from a model pair, which must satisfy the
/// inner-representer hypotheses: isometric, commutative, strongly stable.
pub fn representer_family(pair: &OutputPair, tol: f64, seed: u64) -> Result<RepresenterFamily> {
    let iso = pair.isometric_residual();
    if iso > tol.max(1e-8) {
        return Err(EngineError::HypothesesFailed(format!(
            "pair not isometric (residual {:.3e})",
            iso
        )));
    }
    let comm = pair.max_commutator();
    if comm > tol.max(1e-10) {
        return Err(EngineError::HypothesesFailed(format!(
            "state tuple not commutative (max commutator {:.3e})",
            comm
        )));
    }
    let stab = strong_stability(&pair.a, DEFAULT_STABILITY_TOL, DEFAULT_STABILITY_HORIZON);
    if !stab.stable {
        return Err(EngineError::HypothesesFailed(
            "state tuple not strongly stable within the horizon".into(),
        ));
    }
    let dsub = d_subspace(pair, 150, 1e-8, seed)?;
    if let Some(w) = &dsub.warning {
        return Err(EngineError::HypothesesFailed(format!(
            "D-subspace construction unreliable: {}",
            w
        )));
    }
    let p = pair.dim_state();
    let r = pair.dim_output();
    let k = dsub.dim();
    // A^* : X^d -> X restricted to D, then extended by C^*.
    let stacked_a = pair.stacked().view((0, 0), (pair.d * p, p)).into_owned();
    let a_star_d = stacked_a.adjoint() * &dsub.basis; // p x k
    let mut t_mat = CMat::zeros(p, k + r);
    t_mat.view_mut((0, 0), (p, k)).copy_from(&a_star_d);
    t_mat.view_mut((0, k), (p, r)).copy_from(&pair.c.adjoint());
    let m = identity(k + r) - t_mat.adjoint() * &t_mat;
    let defect_root = crate::linalg::psd_sqrt(&m);
    let range = crate::linalg::range_basis(&defect_root, 1e-10);
    Ok(RepresenterFamily {
        pair: pair.clone(),
        dsub,
        t_mat,
        defect_root,
        range,
    })
}
