//! The extendibility criterion: f-value, classification, supporting
//! hyperplanes, witnesses, and the (P,Q,R) block characterization.
//!
//! The decision quantity is the slack
//! `f(ρ) = tr(ρ_B²) − tr(ρ_AB²) + 4·√det(ρ_AB)`; a two-qubit state admits a
//! symmetric extension exactly when f ≥ 0. Full-rank states with f = 0 and all
//! rank-deficient states form the boundary of the extendible body, and every
//! boundary point carries a supporting hyperplane that doubles as an
//! entanglement-style witness for states outside.

use serde::Serialize;
use thiserror::Error;

use crate::linalg::{
    cr, herm_eig, kron, mat_inv, outer, psd_sqrt_clipped, trace_norm2, CMat, Cplx, HermMat,
    LinalgError,
};
use crate::states::{det_re, partial_trace, DensityOp4, Marginal, StateError};

/// Default absolute tolerance for boundary classification.
pub const TOL_F: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum CriterionError {
    #[error("determinant {det:.3e} below -1e-12: non-PSD input slipped through")]
    NegativeDeterminant { det: f64 },
    #[error("state is rank deficient (min eigenvalue {min_eig:.3e}); no inverse-based hyperplane")]
    Singular { min_eig: f64 },
    #[error("state has full rank; kernel-projector hyperplane undefined")]
    FullRank,
    #[error("state is not a boundary point: f = {f:.3e}")]
    NotBoundary { f: f64 },
    #[error("bisection endpoints do not bracket the boundary: f(start) = {f_start:.3e}, f(end) = {f_end:.3e}")]
    BisectionFailed { f_start: f64, f_end: f64 },
    #[error("constructed witness fails the sign check: tr(Hρ) = {value:.3e}")]
    WitnessSign { value: f64 },
    #[error(transparent)]
    State(#[from] StateError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Extendibility classes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum StateClass {
    InteriorExtendible,
    BoundaryExtendible,
    NonExtendible,
}

impl std::fmt::Display for StateClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            StateClass::InteriorExtendible => "interior-extendible",
            StateClass::BoundaryExtendible => "boundary-extendible",
            StateClass::NonExtendible => "non-extendible",
        };
        write!(f, "{s}")
    }
}

/// Classification record for one state.
#[derive(Debug, Clone)]
pub struct Verdict {
    pub f_value: f64,
    pub class: StateClass,
    /// Present exactly when the state is non-extendible.
    pub witness: Option<HermMat<4>>,
    pub rank: usize,
}

/// f(ρ) = tr(ρ_B²) − tr(ρ_AB²) + 4√det ρ. Determinants in [−1e-12, 0) are
/// clipped to zero; anything lower is an error.
pub fn f_value(rho: &DensityOp4) -> Result<f64, CriterionError> {
    let d = det_re(rho);
    if d < -1e-12 {
        return Err(CriterionError::NegativeDeterminant { det: d });
    }
    let tr_b2 = partial_trace(rho, Marginal::B).purity();
    Ok(tr_b2 - rho.purity() + 4.0 * d.max(0.0).sqrt())
}

/// Class + witness with the default tolerance.
pub fn classify(rho: &DensityOp4) -> Result<Verdict, CriterionError> {
    classify_with_tol(rho, TOL_F)
}

pub fn classify_with_tol(rho: &DensityOp4, tol_f: f64) -> Result<Verdict, CriterionError> {
    let f = f_value(rho)?;
    let rank = rho.numerical_rank()?;
    let (class, witness) = if f < -tol_f {
        let (w, _) = witness_search(rho, tol_f)?;
        (StateClass::NonExtendible, Some(w))
    } else if f.abs() <= tol_f || rank < 4 {
        (StateClass::BoundaryExtendible, None)
    } else {
        (StateClass::InteriorExtendible, None)
    };
    Ok(Verdict {
        f_value: f,
        class,
        witness,
        rank,
    })
}

/// True when the descending nonzero spectra (threshold 1e-9) of ρ_AB and
/// ρ_B = tr_A ρ agree elementwise within 1e-8. These are exactly the states
/// with a pure symmetric extension.
pub fn in_set_a(rho: &DensityOp4) -> Result<bool, CriterionError> {
    let spec_ab: Vec<f64> = rho
        .eig()?
        .values
        .iter()
        .copied()
        .filter(|&v| v > 1e-9)
        .collect();
    let spec_b: Vec<f64> = partial_trace(rho, Marginal::B)
        .eig()?
        .values
        .iter()
        .copied()
        .filter(|&v| v > 1e-9)
        .collect();
    if spec_ab.len() != spec_b.len() {
        return Ok(false);
    }
    Ok(spec_ab
        .iter()
        .zip(spec_b.iter())
        .all(|(a, b)| (a - b).abs() <= 1e-8))
}

/// 𝕀_A ⊗ σ_B as a 4×4 operator.
fn embed_b(rho: &DensityOp4) -> CMat<4> {
    let b = partial_trace(rho, Marginal::B);
    kron(&CMat::<2>::identity(), b.matrix())
}

/// Supporting-hyperplane operator √(det σ)·σ⁻¹ − σ + 𝕀⊗σ_B for a full-rank σ.
/// At boundary points tr(Hσ) = 0 and tr(Hρ) ≥ 0 for every extendible ρ.
pub fn hyperplane_h(sigma: &DensityOp4) -> Result<HermMat<4>, CriterionError> {
    let min_eig = sigma.eig()?.min_value();
    if min_eig <= 1e-9 {
        return Err(CriterionError::Singular { min_eig });
    }
    let inv = mat_inv(sigma.matrix())?;
    let d = det_re(sigma).max(0.0);
    let h = inv.scale(cr(d.sqrt())) - *sigma.matrix() + embed_b(sigma);
    Ok(HermMat::symmetrize(h))
}

/// Supporting hyperplane at a rank-deficient boundary point: the projector
/// onto the kernel of σ. It annihilates σ and is nonnegative on every PSD
/// state, which is the full supporting-hyperplane contract on the extendible
/// body.
pub fn boundary_hyperplane_rank_deficient(sigma: &DensityOp4) -> Result<HermMat<4>, CriterionError> {
    let e = sigma.eig()?;
    if e.rank(1e-9) == 4 {
        return Err(CriterionError::FullRank);
    }
    let mut proj = CMat::<4>::zero();
    for k in 0..4 {
        if e.values[k] <= 1e-9 {
            proj = proj + outer(&e.vectors[k], &e.vectors[k]);
        }
    }
    Ok(HermMat::symmetrize(proj))
}

const BISECT_MAX_ITER: usize = 200;

/// Root of f on the segment (1−t)·start + t·end, where f(start) > 0 >
/// f(end). Terminates at |f| ≤ 1e-10 or interval width ≤ 1e-14 (cap 200
/// iterations) and returns the boundary state.
pub fn boundary_between(
    start: &DensityOp4,
    end: &DensityOp4,
) -> Result<DensityOp4, CriterionError> {
    let f_start = f_value(start)?;
    let f_end = f_value(end)?;
    if f_start <= 0.0 || f_end >= 0.0 {
        return Err(CriterionError::BisectionFailed { f_start, f_end });
    }
    let at = |t: f64| -> Result<DensityOp4, CriterionError> {
        let m = start.matrix().scale(cr(1.0 - t)) + end.matrix().scale(cr(t));
        Ok(DensityOp4::new(HermMat::symmetrize(m))?)
    };
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    let mut best = at(0.5)?;
    for _ in 0..BISECT_MAX_ITER {
        let mid = 0.5 * (lo + hi);
        best = at(mid)?;
        let fm = f_value(&best)?;
        if fm.abs() <= 1e-10 || (hi - lo) <= 1e-14 {
            return Ok(best);
        }
        if fm > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(best)
}

/// Witness construction for a non-extendible state: bisects f to zero along
/// the segment from 𝕀/4 (f = 1/2) to ρ, takes the supporting hyperplane at the
/// crossing σ*, and verifies tr(Hρ) < 0. Returns (H, σ*).
pub fn witness_search(
    rho: &DensityOp4,
    tol_f: f64,
) -> Result<(HermMat<4>, DensityOp4), CriterionError> {
    let f = f_value(rho)?;
    if f >= -tol_f {
        return Err(CriterionError::NotBoundary { f });
    }
    let sigma = boundary_between(&DensityOp4::maximally_mixed(), rho)?;
    let h = hyperplane_h(&sigma)?;
    let value = h.trace_product(rho.herm());
    if value >= 0.0 {
        return Err(CriterionError::WitnessSign { value });
    }
    Ok((h, sigma))
}

// ---------------------------------------------------------------------------
// block factorization

/// 2×2 block of a 4×4 matrix; `bi`, `bj` index block rows/columns.
pub fn block2(m: &CMat<4>, bi: usize, bj: usize) -> CMat<2> {
    let mut out = CMat::<2>::zero();
    for i in 0..2 {
        for j in 0..2 {
            out[(i, j)] = m[(2 * bi + i, 2 * bj + j)];
        }
    }
    out
}

/// 4×4 matrix from 2×2 blocks [[b00, b01], [b10, b11]].
pub fn from_blocks2(b00: &CMat<2>, b01: &CMat<2>, b10: &CMat<2>, b11: &CMat<2>) -> CMat<4> {
    let mut out = CMat::<4>::zero();
    for i in 0..2 {
        for j in 0..2 {
            out[(i, j)] = b00[(i, j)];
            out[(i, 2 + j)] = b01[(i, j)];
            out[(2 + i, j)] = b10[(i, j)];
            out[(2 + i, 2 + j)] = b11[(i, j)];
        }
    }
    out
}

/// (P, Q, R) factorization of a two-qubit state: the state equals the block
/// Gram product [[Q, R], [P, 0]]·[[Q†, P], [R, 0]] with P, R ⪰ 0, and the
/// membership inequality ‖PR‖²_tr ≥ ‖PQ†‖²_tr − ‖PQ‖²_tr holds exactly on the
/// extendible set.
#[derive(Debug, Clone)]
pub struct PqrTriple {
    pub p: CMat<2>,
    pub q: CMat<2>,
    pub r: CMat<2>,
}

/// Factors ρ = [[A, C], [C†, B]] (B the lower-right block) into (P, Q, R).
/// Regular branch (B invertible): P = B^{1/2}, Q = C·B^{−1/2},
/// R = (A − C·B⁻¹·C†)^{1/2}. Singular branch (B = β|u⟩⟨u|): P = √β|u⟩⟨u|,
/// Q = |v⟩⟨u| with v = C·u/√β, R = (A − |v⟩⟨v|)^{1/2}. Total on valid states.
pub fn factor_pqr(rho: &DensityOp4) -> Result<PqrTriple, CriterionError> {
    let m = rho.matrix();
    let a = block2(m, 0, 0);
    let c = block2(m, 0, 1);
    let b = HermMat::symmetrize(block2(m, 1, 1));
    let be = herm_eig(&b)?;

    if be.min_value() >= 1e-10 {
        let b_sqrt = be.reconstruct_with(|x| x.max(0.0).sqrt());
        let b_inv_sqrt = be.reconstruct_with(|x| 1.0 / x.max(1e-300).sqrt());
        let b_inv = be.reconstruct_with(|x| 1.0 / x.max(1e-300));
        let q = c * b_inv_sqrt;
        let d = HermMat::symmetrize(a - c * b_inv * c.adjoint());
        let r = psd_sqrt_clipped(&d)?;
        Ok(PqrTriple {
            p: b_sqrt,
            q,
            r: *r.matrix(),
        })
    } else {
        let beta = be.values[0].max(0.0);
        if beta < 1e-10 {
            // B ≈ 0 forces C ≈ 0 by positivity; the state lives in the a=0 block.
            let r = psd_sqrt_clipped(&HermMat::symmetrize(a))?;
            Ok(PqrTriple {
                p: CMat::zero(),
                q: CMat::zero(),
                r: *r.matrix(),
            })
        } else {
            let u = be.vectors[0];
            let w = c.matvec(&u);
            let v = crate::linalg::vec_scale(&w, cr(1.0 / beta.sqrt()));
            let p = outer(&u, &u).scale(cr(beta.sqrt()));
            let q = outer(&v, &u);
            let d = HermMat::symmetrize(a - outer(&v, &v));
            let r = psd_sqrt_clipped(&d)?;
            Ok(PqrTriple {
                p,
                q,
                r: *r.matrix(),
            })
        }
    }
}

/// The block Gram product [[Q, R], [P, 0]]·[[Q†, P], [R, 0]] =
/// [[QQ† + RR†, QP], [PQ†, P²]]. PSD by construction; the trace is reported
/// as-is (callers normalize).
pub fn assemble_pqr(t: &PqrTriple) -> HermMat<4> {
    let upper_left = t.q * t.q.adjoint() + t.r * t.r.adjoint();
    let upper_right = t.q * t.p;
    let lower_left = t.p * t.q.adjoint();
    let lower_right = t.p * t.p;
    HermMat::symmetrize(from_blocks2(&upper_left, &upper_right, &lower_left, &lower_right))
}

/// Membership slack ‖PR‖²_tr − ‖PQ†‖²_tr + ‖PQ‖²_tr; its sign matches the sign
/// of f away from the boundary band.
pub fn membership_slack(t: &PqrTriple) -> f64 {
    let pr = trace_norm2(&(t.p * t.r));
    let pqd = trace_norm2(&(t.p * t.q.adjoint()));
    let pq = trace_norm2(&(t.p * t.q));
    pr * pr - pqd * pqd + pq * pq
}

// ---------------------------------------------------------------------------
// boundary identities of the hyperplane operator

fn det3(m: [[Cplx; 3]; 3]) -> Cplx {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

fn principal_minor3(h: &CMat<4>, rows: [usize; 3]) -> Cplx {
    let mut sub = [[Cplx::new(0.0, 0.0); 3]; 3];
    for (i, &r) in rows.iter().enumerate() {
        for (j, &s) in rows.iter().enumerate() {
            sub[i][j] = h[(r, s)];
        }
    }
    det3(sub)
}

fn principal_minor2(h: &CMat<4>, rows: [usize; 2]) -> Cplx {
    h[(rows[0], rows[0])] * h[(rows[1], rows[1])] - h[(rows[0], rows[1])] * h[(rows[1], rows[0])]
}

/// Residual of the sub-determinant identity det H^{(1,3)} = det H^{(2,4)} of
/// the hyperplane operator; holds for every full-rank state, boundary or not.
pub fn hyperplane_subdet_residual(sigma: &DensityOp4) -> Result<f64, CriterionError> {
    let h = hyperplane_h(sigma)?;
    let m = h.matrix();
    Ok((principal_minor2(m, [0, 2]) - principal_minor2(m, [1, 3])).norm())
}

/// The three boundary identities of H's block form [[A, −B†], [−B, C]]:
/// |det H^{(1,3)} − det H^{(2,4)}|, |det H^{(1,2,3)} + det H^{(1,2,4)}|, and
/// |tr(C − B·A⁻¹·B†)|. All vanish on full-rank boundary states.
pub fn hyperplane_block_identities(
    sigma: &DensityOp4,
    tol_f: f64,
) -> Result<(f64, f64, f64), CriterionError> {
    let f = f_value(sigma)?;
    if f.abs() > tol_f {
        return Err(CriterionError::NotBoundary { f });
    }
    let h = hyperplane_h(sigma)?;
    let m = h.matrix();
    let r1 = (principal_minor2(m, [0, 2]) - principal_minor2(m, [1, 3])).norm();
    let r2 = (principal_minor3(m, [0, 1, 2]) + principal_minor3(m, [0, 1, 3])).norm();
    // blocks of H; the sign of the lower-left block cancels in L·A⁻¹·L†
    let a = block2(m, 0, 0);
    let lower_left = block2(m, 1, 0);
    let cblk = block2(m, 1, 1);
    let a_inv = mat_inv(&a)?;
    let r3 = (cblk - lower_left * a_inv * lower_left.adjoint()).trace().norm();
    Ok((r1, r2, r3))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::su2;
    use crate::states::{basis_vec, bell_phi_plus, random_density, werner, RngSeed};

    fn werner_h_golden() -> CMat<4> {
        let mut m = CMat::<4>::diag([2.0 / 9.0, 2.0 / 3.0, 2.0 / 3.0, 2.0 / 9.0]);
        m[(0, 3)] = cr(-4.0 / 9.0);
        m[(3, 0)] = cr(-4.0 / 9.0);
        m
    }

    #[test]
    fn f_reference_values() {
        let f = f_value(&DensityOp4::maximally_mixed()).unwrap();
        assert!((f - 0.5).abs() < 1e-12);
        let f = f_value(&werner(2.0 / 3.0).unwrap()).unwrap();
        assert!(f.abs() < 1e-12);
        let phi = DensityOp4::pure(&bell_phi_plus()).unwrap();
        assert!((f_value(&phi).unwrap() + 0.5).abs() < 1e-12);
        // determinant equals the eigenvalue product (1/12)³·(3/4)
        let d = crate::states::det_re(&werner(2.0 / 3.0).unwrap());
        assert!((d - 0.75 / 1728.0).abs() < 1e-15);
    }

    #[test]
    fn f_negative_determinant_error() {
        let m = CMat::<4>::diag([0.4 + 5e-10, 0.3, 0.3, -5e-10]);
        let rho = DensityOp4::from_matrix(m).unwrap();
        assert!(matches!(
            f_value(&rho),
            Err(CriterionError::NegativeDeterminant { .. })
        ));
    }

    #[test]
    fn classify_werner_family() {
        for p in [0.0, 0.2, 0.5, 0.65] {
            let v = classify(&werner(p).unwrap()).unwrap();
            assert_eq!(v.class, StateClass::InteriorExtendible, "p = {p}");
            assert!(v.witness.is_none());
        }
        for p in [0.7, 0.8, 1.0] {
            let v = classify(&werner(p).unwrap()).unwrap();
            assert_eq!(v.class, StateClass::NonExtendible, "p = {p}");
            let w = v.witness.expect("witness attached");
            assert!(w.trace_product(werner(p).unwrap().herm()) < 0.0);
        }
        let v = classify(&DensityOp4::maximally_mixed()).unwrap();
        assert_eq!(v.class, StateClass::InteriorExtendible);
    }

    #[test]
    fn classify_rank2_boundary() {
        let m = CMat::<4>::diag([0.5, 0.5, 0.0, 0.0]); // (|00⟩⟨00| + |01⟩⟨01|)/2
        let rho = DensityOp4::from_matrix(m).unwrap();
        let v = classify(&rho).unwrap();
        assert_eq!(v.class, StateClass::BoundaryExtendible);
        assert_eq!(v.rank, 2);
    }

    #[test]
    fn set_a_membership() {
        let e00 = DensityOp4::pure(&basis_vec::<4>(0)).unwrap();
        assert!(in_set_a(&e00).unwrap());
        assert!(!in_set_a(&DensityOp4::maximally_mixed()).unwrap());
        // marginals of pure states with equal B/B' marginals
        for seed in 0..50 {
            let psi = crate::states::random_pure_symmetric(RngSeed(seed)).unwrap();
            let marg = crate::states::partial_trace3(&psi, crate::states::Marginal3::Ab);
            assert!(in_set_a(&marg).unwrap(), "seed {seed}");
        }
    }

    #[test]
    fn hyperplane_golden_matrix() {
        let h = hyperplane_h(&werner(2.0 / 3.0).unwrap()).unwrap();
        assert!(h.matrix().max_abs_diff(&werner_h_golden()) < 1e-12);
        // tr(Hσ) = 0 at the boundary point
        let t = h.trace_product(werner(2.0 / 3.0).unwrap().herm());
        assert!(t.abs() < 1e-12);
    }

    #[test]
    fn hyperplane_nonnegative_on_extendible_samples() {
        let h = hyperplane_h(&werner(2.0 / 3.0).unwrap()).unwrap();
        let mut tried = 0;
        let mut seed = 0u64;
        while tried < 200 {
            seed += 1;
            let rho = random_density::<4>(RngSeed(seed), 4).unwrap();
            if f_value(&rho).unwrap() < 0.0 {
                continue;
            }
            tried += 1;
            assert!(h.trace_product(rho.herm()) >= -1e-9);
        }
    }

    #[test]
    fn rank_deficient_witnesses() {
        // rank-3 state: kernel projector annihilates it
        let m = CMat::<4>::diag([0.5, 0.3, 0.2, 0.0]);
        let sigma = DensityOp4::from_matrix(m).unwrap();
        let w = boundary_hyperplane_rank_deficient(&sigma).unwrap();
        assert!(w.trace_product(sigma.herm()).abs() < 1e-12);
        let e3 = DensityOp4::pure(&basis_vec::<4>(3)).unwrap();
        assert!((w.trace_product(e3.herm()) - 1.0).abs() < 1e-12);
        for seed in 0..20 {
            let rho = random_density::<4>(RngSeed(seed), 4).unwrap();
            assert!(w.trace_product(rho.herm()) >= -1e-12);
        }
        // pure σ: witness equals 𝕀 − σ
        let pure = DensityOp4::pure(&bell_phi_plus()).unwrap();
        let w = boundary_hyperplane_rank_deficient(&pure).unwrap();
        let expect = CMat::<4>::identity() - *pure.matrix();
        assert!(w.matrix().frobenius_dist(&expect) < 1e-10);
        assert!(matches!(
            boundary_hyperplane_rank_deficient(&DensityOp4::maximally_mixed()),
            Err(CriterionError::FullRank)
        ));
    }

    #[test]
    fn witness_for_werner_09() {
        let rho = werner(0.9).unwrap();
        let (h, sigma) = witness_search(&rho, TOL_F).unwrap();
        assert!(h.trace_product(rho.herm()) < 0.0);
        // the segment stays inside the Werner family, so σ* = ρ_W(2/3)
        assert!(sigma.matrix().frobenius_dist(werner(2.0 / 3.0).unwrap().matrix()) < 1e-8);
        assert!(h.matrix().max_abs_diff(&werner_h_golden()) < 1e-7);
    }

    #[test]
    fn witness_for_maximally_entangled() {
        let phi = DensityOp4::pure(&bell_phi_plus()).unwrap();
        let (h, _) = witness_search(&phi, TOL_F).unwrap();
        assert!(h.trace_product(phi.herm()) < 0.0);
        // nonnegative on pure-extension marginals
        for seed in 0..200 {
            let psi = crate::states::random_pure_symmetric(RngSeed(seed)).unwrap();
            let a = crate::states::partial_trace3(&psi, crate::states::Marginal3::Ab);
            assert!(h.trace_product(a.herm()) >= -1e-9, "seed {seed}");
        }
    }

    #[test]
    fn factor_roundtrip_and_identity_case() {
        // 𝕀/4: P = 𝕀/2, Q = 0, R = 𝕀/2
        let t = factor_pqr(&DensityOp4::maximally_mixed()).unwrap();
        assert!(t.p.frobenius_dist(&CMat::identity().scale(cr(0.5))) < 1e-12);
        assert!(t.q.frobenius_norm() < 1e-12);
        assert!(t.r.frobenius_dist(&CMat::identity().scale(cr(0.5))) < 1e-12);

        for seed in 0..100 {
            let rho = random_density::<4>(RngSeed(seed), 4).unwrap();
            let t = factor_pqr(&rho).unwrap();
            let back = assemble_pqr(&t);
            assert!(back.matrix().frobenius_dist(rho.matrix()) < 1e-10, "seed {seed}");
        }
    }

    #[test]
    fn factor_singular_branch() {
        // B block of rank 1
        let m = CMat::<4>::diag([0.5, 0.0, 0.0, 0.5]);
        let rho = DensityOp4::from_matrix(m).unwrap();
        let t = factor_pqr(&rho).unwrap();
        let back = assemble_pqr(&t);
        assert!(back.matrix().frobenius_dist(rho.matrix()) < 1e-10);
        // B block zero
        let m = CMat::<4>::diag([0.6, 0.4, 0.0, 0.0]);
        let rho = DensityOp4::from_matrix(m).unwrap();
        let t = factor_pqr(&rho).unwrap();
        assert!(t.p.frobenius_norm() < 1e-12);
        let back = assemble_pqr(&t);
        assert!(back.matrix().frobenius_dist(rho.matrix()) < 1e-10);
        // entangled rank-2 support hitting the rank-1 branch
        let mut v = [Cplx::new(0.0, 0.0); 4];
        v[0] = cr(0.8_f64.sqrt());
        v[3] = cr(0.2_f64.sqrt());
        let psi = crate::linalg::outer(&v, &v);
        let mixed = psi.scale(cr(0.5)) + CMat::diag([0.5, 0.0, 0.0, 0.0]);
        let rho = DensityOp4::from_matrix(mixed).unwrap();
        let t = factor_pqr(&rho).unwrap();
        assert!(assemble_pqr(&t).matrix().frobenius_dist(rho.matrix()) < 1e-10);
    }

    #[test]
    fn assemble_blocks_are_gram_psd() {
        let mut g = crate::states::GaussStream::new(RngSeed(5));
        for _ in 0..50 {
            let mut rand2 = || {
                let mut m = CMat::<2>::zero();
                for i in 0..2 {
                    for j in 0..2 {
                        m[(i, j)] = g.next_complex();
                    }
                }
                m
            };
            let x = rand2();
            let p = HermMat::symmetrize(x * x.adjoint()).into_matrix();
            let y = rand2();
            let r = HermMat::symmetrize(y * y.adjoint()).into_matrix();
            let q = rand2();
            let m = assemble_pqr(&PqrTriple { p, q, r });
            assert!(herm_eig(&m).unwrap().min_value() >= -1e-12);
        }
        // P = 𝕀, Q = R = 0 → lower-right block 𝕀
        let m = assemble_pqr(&PqrTriple {
            p: CMat::identity(),
            q: CMat::zero(),
            r: CMat::zero(),
        });
        let expect = from_blocks2(&CMat::zero(), &CMat::zero(), &CMat::zero(), &CMat::identity());
        assert!(m.matrix().frobenius_dist(&expect) < 1e-15);
    }

    #[test]
    fn slack_sign_matches_f() {
        let mut seed = 0u64;
        let mut checked = 0;
        while checked < 300 {
            seed += 1;
            let rho = random_density::<4>(RngSeed(seed), 4).unwrap();
            let f = f_value(&rho).unwrap();
            if f.abs() <= 1e-8 {
                continue;
            }
            checked += 1;
            let slack = membership_slack(&factor_pqr(&rho).unwrap());
            assert_eq!(slack > 0.0, f > 0.0, "seed {seed}: slack {slack:.3e}, f {f:.3e}");
        }
    }

    #[test]
    fn block_identities_on_werner_boundary() {
        let (r1, r2, r3) =
            hyperplane_block_identities(&werner(2.0 / 3.0).unwrap(), TOL_F).unwrap();
        assert!(r1 < 1e-10, "r1 = {r1:.3e}");
        assert!(r2 < 1e-10, "r2 = {r2:.3e}");
        assert!(r3 < 1e-10, "r3 = {r3:.3e}");
        assert!(matches!(
            hyperplane_block_identities(&DensityOp4::maximally_mixed(), TOL_F),
            Err(CriterionError::NotBoundary { .. })
        ));
    }

    #[test]
    fn subdet_identity_any_full_rank() {
        for seed in 0..100 {
            let rho = random_density::<4>(RngSeed(seed), 4).unwrap();
            let r = hyperplane_subdet_residual(&rho).unwrap();
            assert!(r < 1e-10, "seed {seed}: residual {r:.3e}");
        }
    }

    #[test]
    fn f_monotone_on_werner_grid() {
        let mut prev = f64::INFINITY;
        for k in 0..=1000 {
            let p = k as f64 / 1000.0;
            let f = f_value(&werner(p).unwrap()).unwrap();
            assert!(f < prev, "not strictly decreasing at p = {p}");
            prev = f;
        }
    }

    #[test]
    fn classify_local_unitary_covariant() {
        let mut g = crate::states::GaussStream::new(RngSeed(77));
        for seed in 0..30 {
            let rho = random_density::<4>(RngSeed(seed), 1 + (seed as usize % 4)).unwrap();
            let ua = g.next_unitary2();
            let ub = su2(1.1, 0.3, 2.2);
            let u: CMat<4> = kron(&ua, &ub);
            let rotated = DensityOp4::from_matrix(u * *rho.matrix() * u.adjoint()).unwrap();
            let v1 = classify(&rho).unwrap();
            let v2 = classify(&rotated).unwrap();
            assert_eq!(v1.class, v2.class, "seed {seed}");
            // f noise for rank-deficient states is dominated by 4·√(det noise)
            assert!((v1.f_value - v2.f_value).abs() < 1e-7);
        }
    }
}
