//! Constructive side: three-qubit Hamiltonians, ground spaces, the face
//! parameterization of the extendible body's boundary, rank decompositions,
//! and verified symmetric-extension certificates.
//!
//! The route to a certificate mirrors the geometry. A boundary state is split
//! into rank-2 pieces (through the face of its supporting hyperplane, or
//! through an in-kernel perturbation for rank 3), each rank-2 piece is split
//! into states with pure symmetric extensions, the pure extensions are found
//! by a small unitary search on the ancilla frame, and an interior state is
//! first driven to the boundary along the chord through 𝕀/4.

use thiserror::Error;

use crate::criterion::{
    assemble_pqr, f_value, factor_pqr, hyperplane_h, in_set_a, CriterionError, PqrTriple,
};
use crate::linalg::{
    c, cr, det2, herm_eig, kron, mat_inv, outer, phase_fix, psd_sqrt_clipped, su2, vec_dot,
    vec_norm, vec_scale, CMat, Cplx, HermMat, LinalgError,
};
use crate::oracle::{dykstra_extend_default, OracleStatus};
use crate::states::{
    embed_ab, embed_ab_prime, partial_trace, partial_trace3_herm, partial_trace_herm,
    swap_bbprime_herm, DensityOp4, DensityOp8, Marginal, Marginal3, StateError,
};

#[derive(Debug, Error)]
pub enum ExtensionError {
    #[error("state is not extendible: f = {f:.3e}")]
    NotExtendible { f: f64 },
    #[error("state is not a boundary point: f = {f:.3e}")]
    NotBoundary { f: f64 },
    #[error("state does not have full rank (rank {rank})")]
    NotFullRank { rank: usize },
    #[error("state does not have rank 3 (rank {rank})")]
    NotRank3 { rank: usize },
    #[error("state has rank above 2 (rank {rank})")]
    NotRank2 { rank: usize },
    #[error("state is not a pure-extension marginal (spectra mismatch)")]
    NotInA,
    #[error("face parameters inadmissible: constraint value {value:.3e}")]
    InadmissibleParameters { value: f64 },
    #[error("face point is not a valid parameterization: {0}")]
    InvalidFacePoint(String),
    #[error("both face endpoint prefactors vanish; face is degenerate")]
    DegenerateFace,
    #[error("perturbation direction vanished; state should decompose blockwise")]
    DegenerateDirection,
    #[error("direction sweep exhausted; best residual {best_residual:.3e}")]
    SearchFailed { best_residual: f64 },
    #[error("ancilla-frame optimization failed; best residual {best_residual:.3e}")]
    OptimizationFailed { best_residual: f64 },
    #[error("recursion depth exceeded in extension dispatch")]
    RecursionDepth,
    #[error("construction failed verification: {0}")]
    ConstructionFailed(String),
    #[error(transparent)]
    Criterion(#[from] CriterionError),
    #[error(transparent)]
    State(#[from] StateError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

// ---------------------------------------------------------------------------
// three-qubit Hamiltonian and its ground space

/// H = H_AB ⊗ 𝕀_B' + (H on A,B') for the supporting hyperplane at a full-rank
/// boundary state. Positive semidefinite up to rounding.
pub fn three_qubit_hamiltonian(sigma: &DensityOp4, tol_f: f64) -> Result<HermMat<8>, ExtensionError> {
    let f = f_value(sigma)?;
    if f.abs() > tol_f {
        return Err(ExtensionError::NotBoundary { f });
    }
    let h4 = hyperplane_h(sigma)?;
    let h8 = HermMat::symmetrize(embed_ab(h4.matrix()) + embed_ab_prime(h4.matrix()));
    let min_eig = herm_eig(&h8)?.min_value();
    if min_eig < -1e-8 {
        return Err(ExtensionError::ConstructionFailed(format!(
            "three-qubit Hamiltonian not positive: min eigenvalue {min_eig:.3e}"
        )));
    }
    Ok(h8)
}

/// Orthonormal basis of the eigenspace within `tol` of the minimum eigenvalue.
/// Each basis vector is made symmetric or antisymmetric under the B↔B' swap
/// when the space allows it, via (v ± Sv)/√2 recombination followed by
/// Gram-Schmidt in a fixed order.
pub fn ground_space(h: &HermMat<8>, tol: f64) -> Result<Vec<[Cplx; 8]>, ExtensionError> {
    let e = herm_eig(h)?;
    let min = e.min_value();
    let members: Vec<[Cplx; 8]> = (0..8)
        .filter(|&k| e.values[k] <= min + tol)
        .map(|k| e.vectors[k])
        .collect();
    let dim = members.len();

    // S is the permutation |abb'⟩ ↦ |ab'b⟩
    let swap_vec = |v: &[Cplx; 8]| -> [Cplx; 8] {
        let mut out = [Cplx::new(0.0, 0.0); 8];
        for (i, o) in out.iter_mut().enumerate() {
            let (a, b2, c2) = (i / 4, (i / 2) % 2, i % 2);
            *o = v[4 * a + 2 * c2 + b2];
        }
        out
    };

    let mut accepted: Vec<[Cplx; 8]> = Vec::with_capacity(dim);
    let mut candidates: Vec<[Cplx; 8]> = Vec::with_capacity(2 * dim);
    for v in &members {
        let sv = swap_vec(v);
        let mut plus = *v;
        let mut minus = *v;
        for i in 0..8 {
            plus[i] += sv[i];
            minus[i] -= sv[i];
        }
        candidates.push(plus);
        candidates.push(minus);
    }
    for cand in candidates {
        if accepted.len() == dim {
            break;
        }
        let mut v = cand;
        for a in &accepted {
            let ov = vec_dot(a, &v);
            for i in 0..8 {
                v[i] -= ov * a[i];
            }
        }
        let n = vec_norm(&v);
        if n > 1e-8 {
            accepted.push(phase_fix(&vec_scale(&v, cr(1.0 / n))));
        }
    }
    if accepted.len() != dim {
        // fall back to the raw eigenbasis (already orthonormal)
        return Ok(members);
    }
    Ok(accepted)
}

// ---------------------------------------------------------------------------
// face parameterization

/// Point on the face of a supporting hyperplane: a 2×2 unitary frame plus the
/// two nonnegative scale parameters of the parameterization.
#[derive(Debug, Clone)]
pub struct FacePoint {
    pub u: CMat<2>,
    pub x: f64,
    pub y: f64,
}

impl FacePoint {
    pub fn new(u: CMat<2>, x: f64, y: f64) -> Result<Self, ExtensionError> {
        let unitary_resid = (u.adjoint() * u).frobenius_dist(&CMat::identity());
        if unitary_resid > 1e-10 {
            return Err(ExtensionError::InvalidFacePoint(format!(
                "frame not unitary: residual {unitary_resid:.3e}"
            )));
        }
        if !(x >= 0.0 && y >= 0.0) || (x == 0.0 && y == 0.0) {
            return Err(ExtensionError::InvalidFacePoint(format!(
                "scales must be nonnegative and not both zero (x = {x}, y = {y})"
            )));
        }
        Ok(FacePoint { u, x, y })
    }
}

/// Cached data of one boundary state's face: its hyperplane and the
/// frame-independent coefficient matrices of the parameterization.
struct FaceContext {
    sigma_matrix: CMat<4>,
    h: HermMat<4>,
    a0: CMat<2>,
    b0: CMat<2>,
}

/// Frame-dependent coefficients of the face formulas.
struct FaceCoeffs {
    a11: f64,
    a22: f64,
    a12: Cplx,
    a21: Cplx,
    b11: Cplx,
    b12: Cplx,
    b21: Cplx,
    b22: Cplx,
    /// a12·b11 − b12·a11; its modulus is the y-side endpoint prefactor.
    w_a: Cplx,
    /// a21·b22 − a22·b21; its modulus is the x-side endpoint prefactor.
    w_b: Cplx,
}

fn face_context(sigma: &DensityOp4, tol_f: f64) -> Result<FaceContext, ExtensionError> {
    let f = f_value(sigma)?;
    if f.abs() > tol_f {
        return Err(ExtensionError::NotBoundary { f });
    }
    let rank = sigma.numerical_rank()?;
    if rank < 4 {
        return Err(ExtensionError::NotFullRank { rank });
    }
    let t = factor_pqr(sigma)?;
    face_context_from_triple(sigma, &t)
}

fn face_context_from_triple(
    sigma: &DensityOp4,
    t: &PqrTriple,
) -> Result<FaceContext, ExtensionError> {
    let det_pr = (det2(&t.p) * det2(&t.r)).re;
    let r_inv = mat_inv(&t.r)?;
    let r_inv2 = r_inv * r_inv;
    let p_inv = mat_inv(&t.p)?;
    let a0 = r_inv2.scale(cr(det_pr)) + t.p * t.p;
    let b0 = (p_inv * t.q.adjoint() * r_inv2).scale(cr(det_pr)) + t.p * t.q.adjoint();
    Ok(FaceContext {
        sigma_matrix: *sigma.matrix(),
        h: hyperplane_h(sigma)?,
        a0,
        b0,
    })
}

fn face_coeffs(ctx: &FaceContext, u: &CMat<2>) -> FaceCoeffs {
    let au = u.adjoint() * ctx.a0 * *u;
    let bu = u.adjoint() * ctx.b0 * *u;
    let a11 = au[(0, 0)].re;
    let a22 = au[(1, 1)].re;
    let a12 = au[(0, 1)];
    let a21 = au[(1, 0)];
    let (b11, b12, b21, b22) = (bu[(0, 0)], bu[(0, 1)], bu[(1, 0)], bu[(1, 1)]);
    FaceCoeffs {
        a11,
        a22,
        a12,
        a21,
        b11,
        b12,
        b21,
        b22,
        w_a: a12 * b11 - b12 * cr(a11),
        w_b: a21 * b22 - cr(a22) * b21,
    }
}

/// Un-normalized face state at strictly positive (x, y). Every entry is a
/// linear combination of x² and y².
fn face_unnormalized(
    u: &CMat<2>,
    co: &FaceCoeffs,
    x: f64,
    y: f64,
) -> Result<HermMat<4>, ExtensionError> {
    assert!(x > 0.0 && y > 0.0, "interior evaluation needs positive scales");
    let (a11, a22, a12, a21) = (co.a11, co.a22, co.a12, co.a21);
    let (b11, b12, b21, b22) = (co.b11, co.b12, co.b21, co.b22);
    let det_a = (cr(a11 * a22) - a12 * a21).re;
    let tr_a = a11 + a22;
    let denom = det_a * tr_a;
    if denom.abs() < 1e-300 {
        return Err(ExtensionError::ConstructionFailed(
            "face coefficient matrix is singular".into(),
        ));
    }
    let (x2, y2) = (x * x, y * y);
    let mix = a11 * y2 + a22 * x2;

    let q11 = (cr(a11 * a22 + a22 * a22) - a12 * a21) * b11.conj() * cr(x2)
        - a12 * cr(a22) * b12.conj() * cr(x2)
        + a12 * (a21 * b11.conj() - cr(a11) * b12.conj()) * cr(y2);
    let q12 = -cr(mix) * co.w_b.conj();
    let q21 = -cr(mix) * co.w_a.conj();
    let q22 = a21 * (a12 * b22.conj() - cr(a22) * b21.conj()) * cr(x2)
        + ((cr(a11 * a22 + a11 * a11) - a12 * a21) * b22.conj() - a21 * cr(a11) * b21.conj())
            * cr(y2);

    // Q1 = U · qmat · diag(x, y)⁻¹ · U† / (det A · tr A)
    let qmat = CMat::<2>::from_rows([[q11 / cr(x), q12 / cr(y)], [q21 / cr(x), q22 / cr(y)]]);
    let q1 = (*u * qmat * u.adjoint()).scale(cr(1.0 / denom));

    let p1 = *u * CMat::diag([x, y]) * u.adjoint();

    let alpha2 = co.w_a.norm_sqr();
    let beta2 = co.w_b.norm_sqr();
    let radicand = (x2 - y2) * (alpha2 / x2 - beta2 / y2);
    let scale = (1.0 + alpha2 + beta2) * (1.0 + x2 + y2);
    if radicand < -1e-10 * scale {
        return Err(ExtensionError::InadmissibleParameters { value: radicand });
    }
    let pref = radicand.max(0.0).sqrt() / denom;
    let m_r = CMat::<2>::from_rows([
        [
            cr(a22 * a22 * x2 + a12.norm_sqr() * y2),
            -a12 * cr(mix),
        ],
        [
            -a21 * cr(mix),
            cr(a21.norm_sqr() * x2 + a11 * a11 * y2),
        ],
    ]);
    let m_r_sqrt = psd_sqrt_clipped(&HermMat::symmetrize(m_r))?;
    let r1 = (*u * *m_r_sqrt.matrix() * u.adjoint()).scale(cr(pref));

    Ok(assemble_pqr(&PqrTriple { p: p1, q: q1, r: r1 }))
}

/// The two coefficient matrices (Mx, My) with face(x, y) = x²·Mx + y²·My,
/// solved from two interior admissible evaluations. Used where a direct
/// endpoint evaluation would divide by a vanishing prefactor.
fn face_linear_parts(
    u: &CMat<2>,
    co: &FaceCoeffs,
) -> Result<(CMat<4>, CMat<4>), ExtensionError> {
    let alpha = co.w_a.norm();
    let beta = co.w_b.norm();
    // interior ratios r = x/y inside the admissible interval between 1 and α/β
    let (r1, r2) = if alpha >= beta {
        let hi: f64 = if beta < 1e-12 * (1.0 + alpha) {
            4.0
        } else {
            (alpha / beta).min(4.0)
        };
        (hi.powf(1.0 / 3.0), hi.powf(2.0 / 3.0))
    } else {
        let lo: f64 = if alpha < 1e-12 * (1.0 + beta) {
            0.25
        } else {
            (alpha / beta).max(0.25)
        };
        (lo.powf(1.0 / 3.0), lo.powf(2.0 / 3.0))
    };
    let f1 = face_unnormalized(u, co, r1, 1.0)?;
    let f2 = face_unnormalized(u, co, r2, 1.0)?;
    let denom = r1 * r1 - r2 * r2;
    if denom.abs() < 1e-14 {
        return Err(ExtensionError::ConstructionFailed(
            "degenerate ratio pair in face solve".into(),
        ));
    }
    let mx = (*f1.matrix() - *f2.matrix()).scale(cr(1.0 / denom));
    let my = *f1.matrix() - mx.scale(cr(r1 * r1));
    Ok((mx, my))
}

fn validate_face_output(
    ctx: &FaceContext,
    m: &HermMat<4>,
) -> Result<DensityOp4, ExtensionError> {
    let rho = DensityOp4::normalized(*m).map_err(|e| {
        ExtensionError::ConstructionFailed(format!("face state invalid: {e}"))
    })?;
    let on_plane = ctx.h.trace_product(rho.herm());
    let f = f_value(&rho)?;
    if on_plane.abs() > 1e-8 || f < -1e-8 {
        return Err(ExtensionError::ConstructionFailed(format!(
            "face state off the face: tr(Hρ) = {on_plane:.3e}, f = {f:.3e}"
        )));
    }
    Ok(rho)
}

/// State on the face of σ's supporting hyperplane at the given face point.
/// The admissibility constraint (x−y)(βx − αy) ≤ 0 is enforced; the output is
/// normalized and verified to lie on the hyperplane with f ≥ −1e-8.
pub fn face_state(
    sigma: &DensityOp4,
    fp: &FacePoint,
    tol_f: f64,
) -> Result<DensityOp4, ExtensionError> {
    let ctx = face_context(sigma, tol_f)?;
    let co = face_coeffs(&ctx, &fp.u);
    let alpha = co.w_a.norm();
    let beta = co.w_b.norm();
    if alpha < 1e-12 && beta < 1e-12 {
        return Err(ExtensionError::DegenerateFace);
    }
    let adm = (fp.x - fp.y) * (beta * fp.x - alpha * fp.y);
    if adm > 1e-12 * (1.0 + alpha + beta) * (1.0 + fp.x * fp.x + fp.y * fp.y) {
        return Err(ExtensionError::InadmissibleParameters { value: adm });
    }
    let raw = if fp.x > 1e-12 && fp.y > 1e-12 {
        face_unnormalized(&fp.u, &co, fp.x, fp.y)?
    } else {
        let (mx, my) = face_linear_parts(&fp.u, &co)?;
        HermMat::symmetrize(mx.scale(cr(fp.x * fp.x)) + my.scale(cr(fp.y * fp.y)))
    };
    validate_face_output(&ctx, &raw)
}

/// The endpoint prefactors (α, β) of the face slice at frame U; the two
/// rank-2 endpoints sit at (x : y) = (1 : 1) and (α : β).
pub fn face_endpoint_parameters(
    sigma: &DensityOp4,
    u: &CMat<2>,
    tol_f: f64,
) -> Result<(f64, f64), ExtensionError> {
    let ctx = face_context(sigma, tol_f)?;
    let co = face_coeffs(&ctx, u);
    Ok((co.w_a.norm(), co.w_b.norm()))
}

/// The two rank-2 endpoint states of the face slice at frame U: the x = y
/// point and the (x : y) = (α : β) point.
pub fn face_rank2_endpoints(
    sigma: &DensityOp4,
    u: &CMat<2>,
    tol_f: f64,
) -> Result<(DensityOp4, DensityOp4), ExtensionError> {
    let ctx = face_context(sigma, tol_f)?;
    endpoints_in_context(&ctx, u)
}

fn endpoints_in_context(
    ctx: &FaceContext,
    u: &CMat<2>,
) -> Result<(DensityOp4, DensityOp4), ExtensionError> {
    let co = face_coeffs(ctx, u);
    let alpha = co.w_a.norm();
    let beta = co.w_b.norm();
    if alpha < 1e-12 && beta < 1e-12 {
        return Err(ExtensionError::DegenerateFace);
    }
    let e1 = face_unnormalized(u, &co, 1.0, 1.0)?;
    let eps_deg = 1e-8 * (1.0 + alpha.max(beta));
    let e2 = if alpha > eps_deg && beta > eps_deg {
        face_unnormalized(u, &co, alpha, beta)?
    } else {
        let (mx, my) = face_linear_parts(u, &co)?;
        HermMat::symmetrize(mx.scale(cr(alpha * alpha)) + my.scale(cr(beta * beta)))
    };
    Ok((validate_face_output(ctx, &e1)?, validate_face_output(ctx, &e2)?))
}

// ---------------------------------------------------------------------------
// decompositions

fn rank_of(rho: &DensityOp4) -> Result<usize, ExtensionError> {
    Ok(rho.numerical_rank()?)
}

fn third_eigenvalue(rho: &DensityOp4) -> Result<f64, ExtensionError> {
    Ok(rho.eig()?.values[2])
}

/// Splits a full-rank boundary state into two rank-2 boundary states.
///
/// The state's own block factorization supplies the frame: P₂ = U·diag(x*,y*)·U†
/// identifies where the state sits inside its face, the x = y endpoint is
/// evaluated directly, and the second endpoint is recovered exactly from the
/// x²/y² linearity as σ − s·E1 with s = (α²y*² − β²x*²)/(α² − β²).
pub fn decompose_full_rank_boundary(
    sigma: &DensityOp4,
    tol_f: f64,
) -> Result<[(f64, DensityOp4); 2], ExtensionError> {
    let f = f_value(sigma)?;
    if f.abs() > tol_f {
        return Err(ExtensionError::NotBoundary { f });
    }
    let rank = rank_of(sigma)?;
    if rank < 4 {
        return Err(ExtensionError::NotFullRank { rank });
    }
    let triple = factor_pqr(sigma)?;
    let ctx = face_context_from_triple(sigma, &triple)?;
    let pe = herm_eig(&HermMat::symmetrize(triple.p))?;
    let (x_desc, y_desc) = (pe.values[0], pe.values[1]);
    if x_desc - y_desc < 1e-10 {
        return Err(ExtensionError::ConstructionFailed(
            "block eigenvalues degenerate; state is not a generic face interior point".into(),
        ));
    }
    let mut u_desc = CMat::<2>::zero();
    for i in 0..2 {
        u_desc[(i, 0)] = pe.vectors[0][i];
        u_desc[(i, 1)] = pe.vectors[1][i];
    }
    let swap = crate::linalg::pauli_x();
    let u_asc = u_desc * swap; // columns exchanged: diag order (y*, x*)

    let mut best_err: Option<ExtensionError> = None;
    for (u, x_star, y_star) in [(u_desc, x_desc, y_desc), (u_asc, y_desc, x_desc)] {
        match split_with_frame(&ctx, sigma, &u, x_star, y_star) {
            Ok(parts) => return Ok(parts),
            Err(e) => best_err = Some(e),
        }
    }
    Err(best_err.unwrap_or(ExtensionError::ConstructionFailed("no admissible frame".into())))
}

fn split_with_frame(
    ctx: &FaceContext,
    sigma: &DensityOp4,
    u: &CMat<2>,
    x_star: f64,
    y_star: f64,
) -> Result<[(f64, DensityOp4); 2], ExtensionError> {
    let co = face_coeffs(ctx, u);
    let alpha = co.w_a.norm();
    let beta = co.w_b.norm();
    if alpha < 1e-12 && beta < 1e-12 {
        return Err(ExtensionError::DegenerateFace);
    }
    // the state's own point must sit inside the admissible slice
    let adm = (x_star - y_star) * (beta * x_star - alpha * y_star);
    if adm > 1e-9 * (1.0 + alpha + beta) {
        return Err(ExtensionError::InadmissibleParameters { value: adm });
    }
    let denom = alpha * alpha - beta * beta;
    if denom.abs() < 1e-12 * (1.0 + alpha * alpha + beta * beta) {
        return Err(ExtensionError::ConstructionFailed(
            "endpoint prefactors coincide; face slice has no extent".into(),
        ));
    }
    let s = (alpha * alpha * y_star * y_star - beta * beta * x_star * x_star) / denom;
    let e1u = face_unnormalized(u, &co, 1.0, 1.0)?;
    let e2u = HermMat::symmetrize(ctx.sigma_matrix - e1u.matrix().scale(cr(s)));
    let w1 = (s * e1u.trace()).clamp(0.0, 1.0);
    let w2 = 1.0 - w1;
    let rho1 = DensityOp4::normalized(e1u)
        .map_err(|e| ExtensionError::ConstructionFailed(format!("endpoint 1 invalid: {e}")))?;
    let rho2 = DensityOp4::normalized(e2u)
        .map_err(|e| ExtensionError::ConstructionFailed(format!("endpoint 2 invalid: {e}")))?;

    // verification: rank-2 pieces on the boundary recombining to σ
    let recon = rho1.matrix().scale(cr(w1)) + rho2.matrix().scale(cr(w2));
    let resid = recon.frobenius_dist(sigma.matrix());
    if resid > 1e-8 {
        return Err(ExtensionError::ConstructionFailed(format!(
            "rank-2 split does not recombine: residual {resid:.3e}"
        )));
    }
    for rho in [&rho1, &rho2] {
        if third_eigenvalue(rho)? > 1e-8 {
            return Err(ExtensionError::ConstructionFailed(
                "rank-2 endpoint has a third eigenvalue above threshold".into(),
            ));
        }
        if f_value(rho)? < -1e-8 {
            return Err(ExtensionError::ConstructionFailed(
                "rank-2 endpoint fell outside the extendible set".into(),
            ));
        }
    }
    Ok([(w1, rho1), (w2, rho2)])
}

/// Result of splitting a rank-3 boundary state along an in-kernel direction.
#[derive(Debug, Clone)]
pub struct Rank3Split {
    pub parts: [(f64, DensityOp4); 2],
    /// |a·p + b·q̄|² for the chosen (p, q); zero by construction.
    pub constraint_sq: f64,
    /// The perturbation direction in the original frame.
    pub direction: HermMat<4>,
    /// The two parameter values where positivity is lost, (ε₋, ε₊).
    pub eps: (f64, f64),
}

/// 2×2 SVD: Φ = W·diag(s₀, s₁)·V† with s₀ ≥ s₁ ≥ 0.
fn svd2(phi: &CMat<2>) -> Result<(CMat<2>, [f64; 2], CMat<2>), ExtensionError> {
    let g = HermMat::symmetrize(phi.adjoint() * *phi);
    let ge = herm_eig(&g)?;
    let s0 = ge.values[0].max(0.0).sqrt();
    let s1 = ge.values[1].max(0.0).sqrt();
    let v0 = ge.vectors[0];
    let v1 = ge.vectors[1];
    let u0 = if s0 > 1e-14 {
        vec_scale(&phi.matvec(&v0), cr(1.0 / s0))
    } else {
        [cr(1.0), cr(0.0)]
    };
    let u1 = if s1 > 1e-12 * (1.0 + s0) {
        let raw = vec_scale(&phi.matvec(&v1), cr(1.0 / s1));
        // orthogonalize against u0 defensively
        let ov = vec_dot(&u0, &raw);
        let mut t = raw;
        for i in 0..2 {
            t[i] -= ov * u0[i];
        }
        let n = vec_norm(&t);
        if n > 1e-10 {
            vec_scale(&t, cr(1.0 / n))
        } else {
            [-u0[1].conj(), u0[0].conj()]
        }
    } else {
        [-u0[1].conj(), u0[0].conj()]
    };
    let mut w = CMat::<2>::zero();
    let mut v = CMat::<2>::zero();
    for i in 0..2 {
        w[(i, 0)] = u0[i];
        w[(i, 1)] = u1[i];
        v[(i, 0)] = v0[i];
        v[(i, 1)] = v1[i];
    }
    Ok((w, [s0, s1], v))
}

/// Splits a rank-3 extendible state into two rank ≤ 2 boundary states.
///
/// After rotating the kernel vector to Schmidt form a|00⟩ + b|11⟩, the
/// traceless Hermitian direction with (p, q) ∝ (b, −a) keeps both the kernel
/// and tr(ρ_B²) − tr(ρ_AB²) invariant, so positivity is the only constraint;
/// the split points are where the minimum eigenvalue hits zero.
pub fn decompose_rank3(sigma: &DensityOp4, tol_f: f64) -> Result<Rank3Split, ExtensionError> {
    let f = f_value(sigma)?;
    if f < -tol_f {
        return Err(ExtensionError::NotExtendible { f });
    }
    let e = sigma.eig()?;
    let rank = e.rank(1e-9);
    if rank != 3 {
        return Err(ExtensionError::NotRank3 { rank });
    }
    let kernel = e.vectors[3];
    let mut phi = CMat::<2>::zero();
    for a in 0..2 {
        for b in 0..2 {
            phi[(a, b)] = kernel[2 * a + b];
        }
    }
    let (w, _s, v) = svd2(&phi)?;
    let s_a = w.adjoint();
    let mut t_b = CMat::<2>::zero();
    for i in 0..2 {
        for j in 0..2 {
            t_b[(i, j)] = v[(j, i)];
        }
    }
    let rot: CMat<4> = kron(&s_a, &t_b);
    let sigma_rot = HermMat::symmetrize(rot * *sigma.matrix() * rot.adjoint());
    let sm = sigma_rot.matrix();

    let b_coef = sm[(0, 0)].re.max(0.0).sqrt();
    let a_coef = sm[(3, 3)].re.max(0.0).sqrt();
    let scale = a_coef * a_coef + b_coef * b_coef;
    if scale < 1e-20 {
        return Err(ExtensionError::DegenerateDirection);
    }
    if (sm[(0, 3)].re + a_coef * b_coef).abs() > 1e-8 || sm[(0, 3)].im.abs() > 1e-8 {
        return Err(ExtensionError::ConstructionFailed(
            "rotated state does not match the kernel normal form".into(),
        ));
    }
    let norm = scale.sqrt();
    let (p, q) = (b_coef / norm, -a_coef / norm);
    let constraint_sq = (a_coef * p + b_coef * q).powi(2);

    let mut m = CMat::<4>::zero();
    m[(0, 1)] = cr(b_coef * p);
    m[(1, 0)] = cr(b_coef * p);
    m[(0, 2)] = cr(b_coef * q);
    m[(2, 0)] = cr(b_coef * q);
    m[(1, 3)] = cr(-a_coef * p);
    m[(3, 1)] = cr(-a_coef * p);
    m[(2, 3)] = cr(-a_coef * q);
    m[(3, 2)] = cr(-a_coef * q);
    let m_herm = HermMat::symmetrize(m);
    if m_herm.matrix().frobenius_norm() < 1e-12 {
        return Err(ExtensionError::DegenerateDirection);
    }

    let min_eig_at = |eps: f64| -> Result<f64, ExtensionError> {
        let cand = HermMat::symmetrize(*sigma_rot.matrix() + m_herm.matrix().scale(cr(eps)));
        Ok(herm_eig(&cand)?.min_value())
    };
    // positivity gate relative to the state's own kernel noise
    let floor = min_eig_at(0.0)?.min(0.0) - 1e-12;
    let find_endpoint = |dir: f64| -> Result<f64, ExtensionError> {
        let mut inside = 0.0f64;
        let mut step = 0.125f64;
        let mut outside = None;
        for _ in 0..80 {
            let cand = dir * step;
            if min_eig_at(cand)? < floor {
                outside = Some(cand);
                break;
            }
            inside = cand;
            step *= 2.0;
        }
        let mut hi = outside.ok_or_else(|| {
            ExtensionError::ConstructionFailed("positivity never lost along direction".into())
        })?;
        let mut lo = inside;
        for _ in 0..100 {
            if (hi - lo).abs() <= 1e-13 {
                break;
            }
            let mid = 0.5 * (lo + hi);
            if min_eig_at(mid)? < floor {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Ok(lo)
    };
    let eps_plus = find_endpoint(1.0)?;
    let eps_minus = find_endpoint(-1.0)?;
    if eps_plus <= 0.0 || eps_minus >= 0.0 {
        return Err(ExtensionError::ConstructionFailed(format!(
            "degenerate positivity interval [{eps_minus:.3e}, {eps_plus:.3e}]"
        )));
    }

    let piece = |eps: f64| -> Result<DensityOp4, ExtensionError> {
        let cand = HermMat::symmetrize(*sigma_rot.matrix() + m_herm.matrix().scale(cr(eps)));
        let back = HermMat::symmetrize(rot.adjoint() * *cand.matrix() * rot);
        Ok(DensityOp4::new(back)?)
    };
    let rho_plus = piece(eps_plus)?;
    let rho_minus = piece(eps_minus)?;
    let w_plus = -eps_minus / (eps_plus - eps_minus);
    let w_minus = eps_plus / (eps_plus - eps_minus);

    let recon = rho_plus.matrix().scale(cr(w_plus)) + rho_minus.matrix().scale(cr(w_minus));
    let resid = recon.frobenius_dist(sigma.matrix());
    if resid > 1e-8 {
        return Err(ExtensionError::ConstructionFailed(format!(
            "rank-3 split does not recombine: residual {resid:.3e}"
        )));
    }
    for rho in [&rho_plus, &rho_minus] {
        if third_eigenvalue(rho)? > 1e-8 {
            return Err(ExtensionError::ConstructionFailed(
                "rank-3 split piece has rank above 2".into(),
            ));
        }
    }
    let direction = HermMat::symmetrize(rot.adjoint() * *m_herm.matrix() * rot);
    Ok(Rank3Split {
        parts: [(w_minus, rho_minus), (w_plus, rho_plus)],
        constraint_sq,
        direction,
        eps: (eps_minus, eps_plus),
    })
}

/// tr((tr_A m)²) − tr(m²): the f-value of a rank ≤ 2 state (whose determinant
/// vanishes identically), exactly quadratic along linear perturbations.
fn purity_gap(m: &HermMat<4>) -> f64 {
    let mb = partial_trace_herm(m, Marginal::B);
    mb.trace_sq() - m.trace_sq()
}

/// Pure-extension membership with a tolerance fallback for near-degenerate
/// spectra: rank ≤ 2 together with |tr ρ_B² − tr ρ_AB²| ≤ 1e-8 is equivalent
/// to the spectra condition for two nonzero eigenvalues with equal sums.
fn in_set_a_tolerant(rho: &DensityOp4) -> Result<bool, ExtensionError> {
    if in_set_a(rho)? {
        return Ok(true);
    }
    Ok(rank_of(rho)? <= 2 && purity_gap(rho.herm()).abs() <= 1e-8)
}

/// Splits a rank ≤ 2 extendible state into at most two pure-extension
/// marginals.
///
/// Perturbations inside the 2-dimensional support keep the determinant at
/// zero, so f reduces to the purity gap, an exactly quadratic function of the
/// step whose roots bracket the state; at the roots the spectra condition
/// holds and positivity is automatic because the gap is negative at the
/// support's own positivity limits.
pub fn decompose_rank2(
    rho: &DensityOp4,
    tol_f: f64,
) -> Result<Vec<(f64, DensityOp4)>, ExtensionError> {
    let f = f_value(rho)?;
    if f < -tol_f {
        return Err(ExtensionError::NotExtendible { f });
    }
    let e = rho.eig()?;
    let rank = e.rank(1e-9);
    if rank > 2 {
        return Err(ExtensionError::NotRank2 { rank });
    }
    if in_set_a_tolerant(rho)? {
        return Ok(vec![(1.0, *rho)]);
    }
    if rank == 1 {
        // a pure state in the extendible set is a product state, already
        // covered by the membership check above
        return Err(ExtensionError::NotExtendible { f });
    }
    let v1 = e.vectors[0];
    let v2 = e.vectors[1];
    let g0 = purity_gap(rho.herm());

    let n1 = HermMat::symmetrize(outer(&v1, &v1) - outer(&v2, &v2));
    let n2 = HermMat::symmetrize(outer(&v1, &v2) + outer(&v2, &v1));
    let n3 = HermMat::symmetrize(
        outer(&v1, &v2).scale(c(0.0, 1.0)) + outer(&v2, &v1).scale(c(0.0, -1.0)),
    );
    let mut directions = vec![n1, n2, n3];
    let mut gauss = crate::states::GaussStream::new(crate::states::RngSeed(0xD15C));
    for _ in 0..5 {
        let (c1, c2, c3) = (
            gauss.next_normal(),
            gauss.next_normal(),
            gauss.next_normal(),
        );
        directions.push(HermMat::symmetrize(
            n1.matrix().scale(cr(c1)) + n2.matrix().scale(cr(c2)) + n3.matrix().scale(cr(c3)),
        ));
    }

    let mut best_residual = f64::INFINITY;
    for n in &directions {
        let nn = n.matrix().frobenius_norm();
        if nn < 1e-12 {
            continue;
        }
        let n = n.scale_re(1.0 / nn);
        let g_at = |eps: f64| -> f64 {
            purity_gap(&HermMat::symmetrize(
                *rho.matrix() + n.matrix().scale(cr(eps)),
            ))
        };
        let gp = g_at(1.0);
        let gm = g_at(-1.0);
        let c2 = 0.5 * (gp + gm) - g0;
        let c1 = 0.5 * (gp - gm);
        if c2 >= -1e-14 {
            continue;
        }
        let disc = c1 * c1 - 4.0 * c2 * g0;
        if disc < 0.0 {
            continue;
        }
        let sq = disc.sqrt();
        let roots = [(-c1 + sq) / (2.0 * c2), (-c1 - sq) / (2.0 * c2)];
        let eps_minus = roots[0].min(roots[1]);
        let eps_plus = roots[0].max(roots[1]);
        if !(eps_minus < 0.0 && eps_plus > 0.0) {
            continue;
        }
        // Newton polish (the quadratic fit is exact, this only sharpens fp error)
        let polish = |mut eps: f64| -> f64 {
            for _ in 0..3 {
                let d = c1 + 2.0 * c2 * eps;
                if d.abs() < 1e-300 {
                    break;
                }
                eps -= g_at(eps) / d;
            }
            eps
        };
        let eps_minus = polish(eps_minus);
        let eps_plus = polish(eps_plus);

        let make = |eps: f64| -> Result<DensityOp4, ExtensionError> {
            Ok(DensityOp4::new(HermMat::symmetrize(
                *rho.matrix() + n.matrix().scale(cr(eps)),
            ))?)
        };
        let (a_minus, a_plus) = match (make(eps_minus), make(eps_plus)) {
            (Ok(a), Ok(b)) => (a, b),
            _ => continue,
        };
        let mut ok = true;
        let mut residual_here = 0.0f64;
        for a in [&a_minus, &a_plus] {
            let gap = purity_gap(a.herm()).abs();
            residual_here = residual_here.max(gap);
            if !in_set_a_tolerant(a)? {
                ok = false;
            }
        }
        best_residual = best_residual.min(residual_here);
        if !ok {
            continue;
        }
        let w_plus = -eps_minus / (eps_plus - eps_minus);
        let w_minus = eps_plus / (eps_plus - eps_minus);
        return Ok(vec![(w_minus, a_minus), (w_plus, a_plus)]);
    }
    Err(ExtensionError::SearchFailed {
        best_residual,
    })
}

// ---------------------------------------------------------------------------
// pure extensions

/// Simple Nelder-Mead on R³ for the ancilla-frame refinement.
fn nelder_mead3(
    f: &mut impl FnMut([f64; 3]) -> f64,
    x0: [f64; 3],
    scale: f64,
    max_iter: usize,
) -> ([f64; 3], f64) {
    let mut simplex: Vec<([f64; 3], f64)> = Vec::with_capacity(4);
    simplex.push((x0, f(x0)));
    for i in 0..3 {
        let mut x = x0;
        x[i] += scale;
        simplex.push((x, f(x)));
    }
    for _ in 0..max_iter {
        simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap());
        let spread = simplex[3].1 - simplex[0].1;
        if spread < 1e-16 * (1.0 + simplex[0].1.abs()) {
            break;
        }
        let mut centroid = [0.0; 3];
        for s in &simplex[..3] {
            for i in 0..3 {
                centroid[i] += s.0[i] / 3.0;
            }
        }
        let worst = simplex[3];
        let mut refl = [0.0; 3];
        for i in 0..3 {
            refl[i] = centroid[i] + (centroid[i] - worst.0[i]);
        }
        let fr = f(refl);
        if fr < simplex[0].1 {
            let mut exp = [0.0; 3];
            for i in 0..3 {
                exp[i] = centroid[i] + 2.0 * (centroid[i] - worst.0[i]);
            }
            let fe = f(exp);
            simplex[3] = if fe < fr { (exp, fe) } else { (refl, fr) };
        } else if fr < simplex[2].1 {
            simplex[3] = (refl, fr);
        } else {
            let mut con = [0.0; 3];
            for i in 0..3 {
                con[i] = centroid[i] + 0.5 * (worst.0[i] - centroid[i]);
            }
            let fc = f(con);
            if fc < worst.1 {
                simplex[3] = (con, fc);
            } else {
                let best = simplex[0].0;
                for s in simplex.iter_mut().skip(1) {
                    for i in 0..3 {
                        s.0[i] = best[i] + 0.5 * (s.0[i] - best[i]);
                    }
                    s.1 = f(s.0);
                }
            }
        }
    }
    simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap());
    simplex[0]
}

fn marginal_abprime_of_vec(psi: &[Cplx; 8]) -> CMat<4> {
    let mut m = CMat::<4>::zero();
    for a in 0..2 {
        for c2 in 0..2 {
            for a2 in 0..2 {
                for c3 in 0..2 {
                    let mut s = Cplx::new(0.0, 0.0);
                    for b in 0..2 {
                        s += psi[4 * a + 2 * b + c2] * psi[4 * a2 + 2 * b + c3].conj();
                    }
                    m[(2 * a + c2, 2 * a2 + c3)] = s;
                }
            }
        }
    }
    m
}

fn pure_extension_vec(a: &DensityOp4) -> Result<[Cplx; 8], ExtensionError> {
    if !in_set_a_tolerant(a)? {
        return Err(ExtensionError::NotInA);
    }
    let e = a.eig()?;
    let rank = e.rank(1e-9);
    let l1 = e.values[0].max(0.0);
    let l2 = e.values[1].max(0.0);
    let v1 = e.vectors[0];
    let v2 = e.vectors[1];

    if rank <= 1 {
        // product pure state g ⊗ h extends to g ⊗ h ⊗ h
        let b = partial_trace(a, Marginal::B);
        let be = b.eig()?;
        let h = be.vectors[0];
        let mut psi = [Cplx::new(0.0, 0.0); 8];
        for ab in 0..4 {
            for ci in 0..2 {
                psi[2 * ab + ci] = v1[ab] * h[ci];
            }
        }
        let resid = marginal_abprime_of_vec(&psi).frobenius_dist(a.matrix());
        if resid > 1e-7 {
            return Err(ExtensionError::OptimizationFailed {
                best_residual: resid,
            });
        }
        return Ok(phase_fix(&psi));
    }

    let (sq1, sq2) = (l1.sqrt(), l2.sqrt());
    let psi_for = |params: [f64; 3]| -> [Cplx; 8] {
        let u = su2(params[0], params[1], params[2]);
        let mut psi = [Cplx::new(0.0, 0.0); 8];
        for ab in 0..4 {
            for ci in 0..2 {
                psi[2 * ab + ci] =
                    cr(sq1) * v1[ab] * u[(ci, 0)] + cr(sq2) * v2[ab] * u[(ci, 1)];
            }
        }
        psi
    };
    let mut objective = |params: [f64; 3]| -> f64 {
        let psi = psi_for(params);
        let m = marginal_abprime_of_vec(&psi);
        let d = m.frobenius_dist(a.matrix());
        d * d
    };

    // 16³ grid seed, then simplex refinement from the best few cells
    let mut seeds: Vec<([f64; 3], f64)> = Vec::with_capacity(16 * 16 * 16);
    let half_pi = std::f64::consts::FRAC_PI_2;
    let two_pi = 2.0 * std::f64::consts::PI;
    for i in 0..16 {
        let theta = (i as f64 + 0.5) * half_pi / 16.0;
        for j in 0..16 {
            let phi1 = j as f64 * two_pi / 16.0;
            for k in 0..16 {
                let phi2 = k as f64 * two_pi / 16.0;
                let p = [theta, phi1, phi2];
                seeds.push((p, objective(p)));
            }
        }
    }
    seeds.sort_by(|x, y| x.1.partial_cmp(&y.1).unwrap());
    let mut best = seeds[0];
    for seed in seeds.iter().take(3) {
        let refined = nelder_mead3(&mut objective, seed.0, 0.05, 400);
        if refined.1 < best.1 {
            best = refined;
        }
    }
    let residual = best.1.max(0.0).sqrt();
    if residual > 1e-7 {
        return Err(ExtensionError::OptimizationFailed {
            best_residual: residual,
        });
    }
    let psi = psi_for(best.0);
    // ‖ψ‖² = λ₁ + λ₂ can sit a few 1e-10 off unity when the input carries
    // clipped negative eigenvalues
    let n = vec_norm(&psi);
    Ok(phase_fix(&vec_scale(&psi, cr(1.0 / n))))
}

/// Pure symmetric extension of a pure-extension marginal: a three-qubit pure
/// state whose AB and AB' marginals both equal the input. The ancilla frame
/// is a 3-parameter unitary found by a 16³ grid plus simplex refinement.
pub fn pure_extension(a: &DensityOp4) -> Result<DensityOp8, ExtensionError> {
    let psi = pure_extension_vec(a)?;
    Ok(DensityOp8::pure(&psi)?)
}

// ---------------------------------------------------------------------------
// full extension dispatch

/// How a certificate was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExtensionRoute {
    /// Boundary decomposition into pure-extension marginals.
    Analytic,
    /// Convex-feasibility fallback.
    DykstraFallback,
}

impl std::fmt::Display for ExtensionRoute {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ExtensionRoute::Analytic => write!(f, "analytic"),
            ExtensionRoute::DykstraFallback => write!(f, "dykstra-fallback"),
        }
    }
}

/// A verified symmetric extension.
#[derive(Debug, Clone)]
pub struct ExtensionCertificate {
    pub ext: DensityOp8,
    /// Max Frobenius distance of the AB and AB' marginals from the input.
    pub marginal_residual: f64,
    pub min_eig: f64,
    pub swap_residual: f64,
    pub route: ExtensionRoute,
}

const CERT_MARGINAL_TOL: f64 = 1e-7;
const CERT_MIN_EIG_TOL: f64 = -1e-8;
const CERT_SWAP_TOL: f64 = 1e-7;
const MAX_DISPATCH_DEPTH: usize = 3;

fn certificate_from_herm(
    ext_m: HermMat<8>,
    rho: &DensityOp4,
    route: ExtensionRoute,
    marginal_tol: f64,
) -> Result<ExtensionCertificate, ExtensionError> {
    let sym = HermMat::symmetrize(
        (*ext_m.matrix() + *swap_bbprime_herm(&ext_m).matrix()).scale(cr(0.5)),
    );
    let r_ab = partial_trace3_herm(&sym, Marginal3::Ab)
        .matrix()
        .frobenius_dist(rho.matrix());
    let r_abp = partial_trace3_herm(&sym, Marginal3::AbPrime)
        .matrix()
        .frobenius_dist(rho.matrix());
    let swap_residual = sym.matrix().frobenius_dist(swap_bbprime_herm(&sym).matrix());
    let min_eig = herm_eig(&sym)?.min_value();
    let marginal_residual = r_ab.max(r_abp);
    if marginal_residual > marginal_tol || min_eig < CERT_MIN_EIG_TOL || swap_residual > CERT_SWAP_TOL
    {
        return Err(ExtensionError::ConstructionFailed(format!(
            "certificate invariants violated: marginals {marginal_residual:.3e}, min eig {min_eig:.3e}, swap {swap_residual:.3e}"
        )));
    }
    let ext = DensityOp8::new(sym)?;
    Ok(ExtensionCertificate {
        ext,
        marginal_residual,
        min_eig,
        swap_residual,
        route,
    })
}

/// Clips trailing negative eigenvalues (bisection noise) and renormalizes.
fn clean_state(rho: &DensityOp4) -> Result<DensityOp4, ExtensionError> {
    let e = rho.eig()?;
    if e.min_value() >= 0.0 {
        return Ok(*rho);
    }
    let clipped = HermMat::symmetrize(e.reconstruct_with(|v| v.max(0.0)));
    Ok(DensityOp4::normalized(clipped)?)
}

/// Weighted pure extensions composing ρ.
fn atoms(rho: &DensityOp4, tol_f: f64, depth: usize) -> Result<Vec<(f64, [Cplx; 8])>, ExtensionError> {
    if depth > MAX_DISPATCH_DEPTH {
        return Err(ExtensionError::RecursionDepth);
    }
    let f = f_value(rho)?;
    if f < -tol_f {
        return Err(ExtensionError::NotExtendible { f });
    }
    let rank = rank_of(rho)?;
    if rank <= 2 {
        let mut out = Vec::new();
        for (w, a) in decompose_rank2(rho, tol_f)? {
            out.push((w, pure_extension_vec(&a)?));
        }
        return Ok(out);
    }
    if rank == 3 {
        let split = decompose_rank3(rho, tol_f)?;
        let mut out = Vec::new();
        for (w, part) in split.parts {
            for (w2, psi) in atoms(&part, tol_f, depth + 1)? {
                out.push((w * w2, psi));
            }
        }
        return Ok(out);
    }
    if f.abs() <= tol_f {
        let parts = decompose_full_rank_boundary(rho, tol_f)?;
        let mut out = Vec::new();
        for (w, part) in parts {
            for (w2, psi) in atoms(&part, tol_f, depth + 1)? {
                out.push((w * w2, psi));
            }
        }
        return Ok(out);
    }
    // interior: walk the chord through 𝕀/4 to the boundary on both sides
    let quarter = DensityOp4::maximally_mixed();
    let mut dir = *rho.matrix() - *quarter.matrix();
    if dir.frobenius_norm() < 1e-12 {
        // the maximally mixed state itself: any traceless chord through it
        dir = kron(&crate::linalg::pauli_z(), &crate::linalg::pauli_z()).scale(cr(0.25));
    }
    let gamma = |t: f64| HermMat::symmetrize(*rho.matrix() + dir.scale(cr(t)));
    let member = |m: &HermMat<4>| -> Result<bool, ExtensionError> {
        let e = herm_eig(m)?;
        if e.min_value() < -1e-12 {
            return Ok(false);
        }
        let det_hat: f64 = e.values.iter().map(|&v| v.max(0.0)).product();
        Ok(purity_gap(m) + 4.0 * det_hat.sqrt() >= 0.0)
    };
    let exit_point = |dir_sign: f64| -> Result<f64, ExtensionError> {
        let mut inside = 0.0f64;
        let mut step = 0.5f64;
        let mut outside = None;
        for _ in 0..80 {
            let t = dir_sign * step;
            if !member(&gamma(t))? {
                outside = Some(t);
                break;
            }
            inside = t;
            step *= 2.0;
        }
        let mut hi = outside.ok_or_else(|| {
            ExtensionError::ConstructionFailed("membership never lost along chord".into())
        })?;
        let mut lo = inside;
        for _ in 0..120 {
            if (hi - lo).abs() <= 1e-14 {
                break;
            }
            let mid = 0.5 * (lo + hi);
            if member(&gamma(mid))? {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(lo)
    };
    let t_plus = exit_point(1.0)?;
    let t_minus = exit_point(-1.0)?;
    if t_plus <= 0.0 || t_minus >= 0.0 {
        return Err(ExtensionError::ConstructionFailed(
            "chord endpoints degenerate".into(),
        ));
    }
    let sigma_plus = clean_state(&DensityOp4::new(gamma(t_plus))?)?;
    let sigma_minus = clean_state(&DensityOp4::new(gamma(t_minus))?)?;
    let w_plus = -t_minus / (t_plus - t_minus);
    let w_minus = t_plus / (t_plus - t_minus);
    let mut out = Vec::new();
    for (w, sigma) in [(w_plus, sigma_plus), (w_minus, sigma_minus)] {
        for (w2, psi) in atoms(&sigma, tol_f, depth + 1)? {
            out.push((w * w2, psi));
        }
    }
    Ok(out)
}

fn extension_from_atoms(parts: &[(f64, [Cplx; 8])]) -> HermMat<8> {
    let mut m = CMat::<8>::zero();
    for (w, psi) in parts {
        m = m + outer(psi, psi).scale(cr(*w));
    }
    HermMat::symmetrize(m)
}

/// Builds a verified symmetric extension of an extendible state.
///
/// Dispatch: rank ≤ 2 states split into pure-extension marginals; rank-3
/// boundary states split along an in-kernel direction; full-rank boundary
/// states split through their face; interior states are decomposed at the two
/// boundary ends of the chord through 𝕀/4. Any construction failure falls
/// back to the feasibility oracle, and the certificate records the route.
pub fn extend(rho: &DensityOp4, tol_f: f64) -> Result<ExtensionCertificate, ExtensionError> {
    let f = f_value(rho)?;
    if f < -tol_f {
        return Err(ExtensionError::NotExtendible { f });
    }
    let analytic = atoms(rho, tol_f, 0).and_then(|parts| {
        certificate_from_herm(
            extension_from_atoms(&parts),
            rho,
            ExtensionRoute::Analytic,
            CERT_MARGINAL_TOL,
        )
    });
    match analytic {
        Ok(cert) => Ok(cert),
        Err(analytic_err) => {
            let report = dykstra_extend_default(rho);
            match (report.status, report.ext) {
                (OracleStatus::Feasible, Some(ext)) => certificate_from_herm(
                    *ext.herm(),
                    rho,
                    ExtensionRoute::DykstraFallback,
                    1e-6,
                ),
                _ => Err(ExtensionError::ConstructionFailed(format!(
                    "analytic construction failed ({analytic_err}) and oracle returned {}",
                    report.status
                ))),
            }
        }
    }
}
