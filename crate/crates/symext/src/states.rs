//! Density operators for one, two, and three qubits.
//!
//! Index convention: product basis |00⟩,|01⟩,|10⟩,|11⟩ with A the left (slow)
//! factor, and |abb'⟩ ↦ 4a+2b+b' for three qubits. All partial traces derive
//! from it, and the lower-right 2×2 block of a two-qubit matrix is the a=1
//! block used by the (P,Q,R) factorization.

use std::path::Path;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{c, cr, det, herm_eig, kron, outer, vec_norm, CMat, Cplx, HermMat, LinalgError};

#[derive(Debug, Error)]
pub enum StateError {
    #[error("trace invalid: residual {residual:.3e}")]
    TraceInvalid { residual: f64 },
    #[error("not Hermitian: asymmetry {asymmetry:.3e}")]
    HermiticityInvalid { asymmetry: f64 },
    #[error("not positive semidefinite: min eigenvalue {min_eig:.3e}")]
    PsdInvalid { min_eig: f64 },
    #[error("parameter out of range: {0}")]
    Range(String),
    #[error("state file has dim {found}, expected {expected}")]
    BadDimension { expected: usize, found: usize },
    #[error("state file {part} grid is not {dim}x{dim}")]
    BadShape { part: &'static str, dim: usize },
    #[error("non-finite entry at row {row}, column {col}")]
    NonFiniteEntry { row: usize, col: usize },
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("parse error: {0}")]
    Parse(#[from] serde_json::Error),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Unit-trace positive semidefinite operator on N dimensions.
///
/// Invariants checked at construction: trace = 1 ± 1e-10 and min eigenvalue
/// ≥ −1e-9.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityOp<const N: usize> {
    m: HermMat<N>,
}

pub type DensityOp2 = DensityOp<2>;
pub type DensityOp4 = DensityOp<4>;
pub type DensityOp8 = DensityOp<8>;

impl<const N: usize> DensityOp<N> {
    pub fn new(m: HermMat<N>) -> Result<Self, StateError> {
        let tr = m.trace();
        if (tr - 1.0).abs() > 1e-10 {
            return Err(StateError::TraceInvalid {
                residual: (tr - 1.0).abs(),
            });
        }
        let min_eig = herm_eig(&m)?.min_value();
        if min_eig < -1e-9 {
            return Err(StateError::PsdInvalid { min_eig });
        }
        Ok(DensityOp { m })
    }

    /// Builds from a raw matrix: Hermiticity check, then state invariants.
    pub fn from_matrix(m: CMat<N>) -> Result<Self, StateError> {
        let h = HermMat::new(m).map_err(|e| match e {
            LinalgError::NotHermitian { asymmetry } => StateError::HermiticityInvalid { asymmetry },
            other => StateError::Linalg(other),
        })?;
        Self::new(h)
    }

    /// Normalizes a PSD-up-to-rounding matrix to unit trace and validates.
    pub fn normalized(m: HermMat<N>) -> Result<Self, StateError> {
        let tr = m.trace();
        if tr.abs() < 1e-300 {
            return Err(StateError::TraceInvalid { residual: 1.0 });
        }
        Self::new(m.scale_re(1.0 / tr))
    }

    /// The projector |v⟩⟨v| after normalizing `v`.
    pub fn pure(v: &[Cplx; N]) -> Result<Self, StateError> {
        let n = vec_norm(v);
        if n < 1e-300 {
            return Err(StateError::Range("zero vector".into()));
        }
        Self::new(HermMat::symmetrize(outer(v, v).scale(cr(1.0 / (n * n)))))
    }

    pub fn maximally_mixed() -> Self {
        DensityOp {
            m: HermMat::identity().scale_re(1.0 / N as f64),
        }
    }

    pub fn herm(&self) -> &HermMat<N> {
        &self.m
    }

    pub fn matrix(&self) -> &CMat<N> {
        self.m.matrix()
    }

    /// tr(ρ²).
    pub fn purity(&self) -> f64 {
        self.m.trace_sq()
    }

    pub fn eig(&self) -> Result<crate::linalg::EigDecomp<N>, LinalgError> {
        herm_eig(&self.m)
    }

    /// Count of eigenvalues above 1e-9.
    pub fn numerical_rank(&self) -> Result<usize, LinalgError> {
        Ok(self.eig()?.rank(1e-9))
    }
}

// ---------------------------------------------------------------------------
// partial traces and the B↔B' swap

/// Which single-qubit marginal to keep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Marginal {
    A,
    B,
}

/// Which two-qubit marginal of a three-qubit state to keep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Marginal3 {
    Ab,
    AbPrime,
    BbPrime,
}

/// Marginal of a two-qubit state; `keep` names the retained subsystem.
pub fn partial_trace(rho: &DensityOp4, keep: Marginal) -> DensityOp2 {
    let m = rho.matrix();
    let mut out = CMat::<2>::zero();
    for i in 0..2 {
        for j in 0..2 {
            let mut s = Cplx::new(0.0, 0.0);
            for t in 0..2 {
                s += match keep {
                    Marginal::A => m[(2 * i + t, 2 * j + t)],
                    Marginal::B => m[(2 * t + i, 2 * t + j)],
                };
            }
            out[(i, j)] = s;
        }
    }
    DensityOp {
        m: HermMat::symmetrize(out),
    }
}

/// Raw 4×4 marginal of a Hermitian (not necessarily PSD) two-qubit operator.
pub fn partial_trace_herm(m: &HermMat<4>, keep: Marginal) -> HermMat<2> {
    let m = m.matrix();
    let mut out = CMat::<2>::zero();
    for i in 0..2 {
        for j in 0..2 {
            for t in 0..2 {
                out[(i, j)] += match keep {
                    Marginal::A => m[(2 * i + t, 2 * j + t)],
                    Marginal::B => m[(2 * t + i, 2 * t + j)],
                };
            }
        }
    }
    HermMat::symmetrize(out)
}

/// Two-qubit marginal of a three-qubit state. For `AbPrime` the result is
/// reported in A⊗B' order, directly comparable with the AB marginal.
pub fn partial_trace3(rho: &DensityOp8, keep: Marginal3) -> DensityOp4 {
    DensityOp {
        m: partial_trace3_herm(rho.herm(), keep),
    }
}

/// Raw marginal of a Hermitian three-qubit operator.
pub fn partial_trace3_herm(m: &HermMat<8>, keep: Marginal3) -> HermMat<4> {
    let m = m.matrix();
    let mut out = CMat::<4>::zero();
    let idx = |a: usize, b: usize, c: usize| 4 * a + 2 * b + c;
    for i in 0..4 {
        for j in 0..4 {
            let (r, s) = (i / 2, i % 2);
            let (t, u) = (j / 2, j % 2);
            let mut acc = Cplx::new(0.0, 0.0);
            for k in 0..2 {
                acc += match keep {
                    Marginal3::Ab => m[(idx(r, s, k), idx(t, u, k))],
                    Marginal3::AbPrime => m[(idx(r, k, s), idx(t, k, u))],
                    Marginal3::BbPrime => m[(idx(k, r, s), idx(k, t, u))],
                };
            }
            out[(i, j)] = acc;
        }
    }
    HermMat::symmetrize(out)
}

fn swap_index(i: usize) -> usize {
    let (a, b, c) = (i / 4, (i / 2) % 2, i % 2);
    4 * a + 2 * c + b
}

/// K acting on qubits A and B, extended by the identity on B': K ⊗ 𝕀_B'.
pub fn embed_ab(k: &CMat<4>) -> CMat<8> {
    kron(k, &CMat::<2>::identity())
}

/// K acting on qubits A and B', extended by the identity on B.
pub fn embed_ab_prime(k: &CMat<4>) -> CMat<8> {
    let mut out = CMat::<8>::zero();
    for a in 0..2 {
        for b in 0..2 {
            for c in 0..2 {
                for a2 in 0..2 {
                    for c2 in 0..2 {
                        out[(4 * a + 2 * b + c, 4 * a2 + 2 * b + c2)] =
                            k[(2 * a + c, 2 * a2 + c2)];
                    }
                }
            }
        }
    }
    out
}

/// Conjugation by the permutation exchanging the B and B' slots (involution).
pub fn swap_bbprime(rho: &DensityOp8) -> DensityOp8 {
    DensityOp {
        m: swap_bbprime_herm(rho.herm()),
    }
}

/// Same conjugation on a raw Hermitian operator.
pub fn swap_bbprime_herm(m: &HermMat<8>) -> HermMat<8> {
    let src = m.matrix();
    let mut out = CMat::<8>::zero();
    for i in 0..8 {
        for j in 0..8 {
            out[(i, j)] = src[(swap_index(i), swap_index(j))];
        }
    }
    HermMat::symmetrize(out)
}

// ---------------------------------------------------------------------------
// named families

/// The Bell state (|00⟩+|11⟩)/√2 as a vector.
pub fn bell_phi_plus() -> [Cplx; 4] {
    let s = 1.0 / 2.0_f64.sqrt();
    [cr(s), cr(0.0), cr(0.0), cr(s)]
}

/// (1−p)·𝕀/4 + p·|φ⁺⟩⟨φ⁺|.
pub fn werner(p: f64) -> Result<DensityOp4, StateError> {
    if !(0.0..=1.0).contains(&p) {
        return Err(StateError::Range(format!("werner parameter {p} outside [0, 1]")));
    }
    let phi = bell_phi_plus();
    let m = CMat::<4>::identity().scale(cr((1.0 - p) / 4.0)) + outer(&phi, &phi).scale(cr(p));
    Ok(DensityOp {
        m: HermMat::symmetrize(m),
    })
}

/// The four Bell vectors in the order Φ⁺, Φ⁻, Ψ⁺, Ψ⁻.
pub fn bell_basis() -> [[Cplx; 4]; 4] {
    let s = 1.0 / 2.0_f64.sqrt();
    [
        [cr(s), cr(0.0), cr(0.0), cr(s)],
        [cr(s), cr(0.0), cr(0.0), cr(-s)],
        [cr(0.0), cr(s), cr(s), cr(0.0)],
        [cr(0.0), cr(s), cr(-s), cr(0.0)],
    ]
}

/// Mixture Σ pᵢ|βᵢ⟩⟨βᵢ| over the Bell basis.
pub fn bell_diagonal(p: [f64; 4]) -> Result<DensityOp4, StateError> {
    let sum: f64 = p.iter().sum();
    if p.iter().any(|&x| x < -1e-12) || (sum - 1.0).abs() > 1e-12 {
        return Err(StateError::Range(format!(
            "bell_diagonal weights must be a probability vector (sum residual {:.3e})",
            (sum - 1.0).abs()
        )));
    }
    let basis = bell_basis();
    let mut m = CMat::<4>::zero();
    for (w, v) in p.iter().zip(basis.iter()) {
        m = m + outer(v, v).scale(cr(*w));
    }
    DensityOp::new(HermMat::symmetrize(m))
}

// ---------------------------------------------------------------------------
// seeded randomness

/// Seed for the deterministic random-state streams (ChaCha8 + Box-Muller).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RngSeed(pub u64);

impl RngSeed {
    /// Derives an independent per-index seed from a base seed (SplitMix64),
    /// so indexed sweeps are reproducible regardless of worker partitioning.
    pub fn derive(base: u64, index: u64) -> RngSeed {
        let mut z = base.wrapping_add(index.wrapping_mul(0x9E3779B97F4A7C15));
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
        RngSeed(z ^ (z >> 31))
    }
}

/// Identifier of the generator + transform pair, recorded in survey metadata.
pub const RNG_IDENTITY: &str = "chacha8+box-muller";

/// Seeded stream of standard normals via the Box-Muller transform.
pub struct GaussStream {
    rng: ChaCha8Rng,
    spare: Option<f64>,
}

impl GaussStream {
    pub fn new(seed: RngSeed) -> Self {
        GaussStream {
            rng: ChaCha8Rng::seed_from_u64(seed.0),
            spare: None,
        }
    }

    fn uniform(&mut self) -> f64 {
        // 53-bit mantissa in [0, 1)
        (self.rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    /// Uniform draw in [0, 1).
    pub fn uniform_unit(&mut self) -> f64 {
        self.uniform()
    }

    pub fn next_normal(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        let u1 = 1.0 - self.uniform(); // (0, 1], keeps ln finite
        let u2 = self.uniform();
        let r = (-2.0 * u1.ln()).sqrt();
        let t = 2.0 * std::f64::consts::PI * u2;
        self.spare = Some(r * t.sin());
        r * t.cos()
    }

    /// One Box-Muller pair as a complex Gaussian entry.
    pub fn next_complex(&mut self) -> Cplx {
        let re = self.next_normal();
        let im = self.next_normal();
        c(re, im)
    }

    /// Haar-distributed 2×2 unitary.
    pub fn next_unitary2(&mut self) -> CMat<2> {
        let u = self.uniform();
        let theta = u.sqrt().asin();
        let phi1 = 2.0 * std::f64::consts::PI * self.uniform();
        let phi2 = 2.0 * std::f64::consts::PI * self.uniform();
        crate::linalg::su2(theta, phi1, phi2)
    }
}

/// Random pure three-qubit state that is symmetric (or, on the rare
/// degenerate draw, antisymmetric) under the B↔B' swap. Its AB marginal
/// equals its AB' marginal, so the marginal always has a pure symmetric
/// extension.
pub fn random_pure_symmetric(seed: RngSeed) -> Result<DensityOp8, StateError> {
    let mut g = GaussStream::new(seed);
    let mut chi = [Cplx::new(0.0, 0.0); 8];
    for e in chi.iter_mut() {
        *e = g.next_complex();
    }
    let mut psi = chi;
    for i in 0..8 {
        psi[i] = chi[i] + chi[swap_index(i)];
    }
    if vec_norm(&psi) < 1e-6 {
        for i in 0..8 {
            psi[i] = chi[i] - chi[swap_index(i)];
        }
    }
    DensityOp::pure(&psi)
}

/// G·G†/tr(G·G†) with G an N×rank matrix of seeded complex Gaussians
/// (Hilbert-Schmidt measure at full rank). Identical seeds give identical
/// matrices.
pub fn random_density<const N: usize>(seed: RngSeed, rank: usize) -> Result<DensityOp<N>, StateError> {
    if rank == 0 || rank > N {
        return Err(StateError::Range(format!("rank {rank} outside 1..={N}")));
    }
    let mut g = GaussStream::new(seed);
    let mut cols: Vec<[Cplx; N]> = Vec::with_capacity(rank);
    for _ in 0..rank {
        let mut col = [Cplx::new(0.0, 0.0); N];
        for e in col.iter_mut() {
            *e = g.next_complex();
        }
        cols.push(col);
    }
    let mut m = CMat::<N>::zero();
    for col in &cols {
        m = m + outer(col, col);
    }
    let tr = m.trace().re;
    DensityOp::new(HermMat::symmetrize(m.scale(cr(1.0 / tr))))
}

// ---------------------------------------------------------------------------
// file format

/// JSON state layout: `{"dim": 4, "re": [[..]], "im": [[..]]}` with
/// full-precision decimal floats.
#[derive(Debug, Serialize, Deserialize)]
struct StateFile {
    dim: usize,
    re: Vec<Vec<f64>>,
    im: Vec<Vec<f64>>,
}

fn grids_to_cmat4(file: &StateFile) -> Result<CMat<4>, StateError> {
    if file.dim != 4 {
        return Err(StateError::BadDimension {
            expected: 4,
            found: file.dim,
        });
    }
    for (part, grid) in [("re", &file.re), ("im", &file.im)] {
        if grid.len() != 4 || grid.iter().any(|r| r.len() != 4) {
            return Err(StateError::BadShape { part, dim: 4 });
        }
    }
    let mut m = CMat::<4>::zero();
    for i in 0..4 {
        for j in 0..4 {
            let (re, im) = (file.re[i][j], file.im[i][j]);
            if !re.is_finite() || !im.is_finite() {
                return Err(StateError::NonFiniteEntry { row: i, col: j });
            }
            m[(i, j)] = c(re, im);
        }
    }
    Ok(m)
}

/// Matrix as (re, im) grids, the layout of the JSON format.
pub fn to_grids<const N: usize>(m: &CMat<N>) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let re = m.0.iter().map(|r| r.iter().map(|e| e.re).collect()).collect();
    let im = m.0.iter().map(|r| r.iter().map(|e| e.im).collect()).collect();
    (re, im)
}

pub fn read_state(path: impl AsRef<Path>) -> Result<DensityOp4, StateError> {
    let text = std::fs::read_to_string(path)?;
    parse_state(&text)
}

pub fn parse_state(text: &str) -> Result<DensityOp4, StateError> {
    let file: StateFile = serde_json::from_str(text)?;
    DensityOp::from_matrix(grids_to_cmat4(&file)?)
}

pub fn write_state(rho: &DensityOp4, path: impl AsRef<Path>) -> Result<(), StateError> {
    std::fs::write(path, state_to_string(rho)?)?;
    Ok(())
}

pub fn state_to_string(rho: &DensityOp4) -> Result<String, StateError> {
    let (re, im) = to_grids(rho.matrix());
    Ok(serde_json::to_string_pretty(&StateFile { dim: 4, re, im })?)
}

// ---------------------------------------------------------------------------
// small constructors used across the crate

/// |i⟩ basis vector.
pub fn basis_vec<const N: usize>(i: usize) -> [Cplx; N] {
    let mut v = [Cplx::new(0.0, 0.0); N];
    v[i] = cr(1.0);
    v
}

/// ρ_A ⊗ ρ_B as a 4×4 state.
pub fn product_state(a: &DensityOp2, b: &DensityOp2) -> DensityOp4 {
    let m: CMat<4> = kron(a.matrix(), b.matrix());
    DensityOp {
        m: HermMat::symmetrize(m),
    }
}

/// det(ρ) as a real number (PSD inputs).
pub fn det_re(rho: &DensityOp4) -> f64 {
    det(rho.matrix()).re
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{kron, pauli_x};

    #[test]
    fn product_state_marginals() {
        let zero = DensityOp2::pure(&basis_vec::<2>(0)).unwrap();
        let rho = product_state(&zero, &zero); // |00⟩⟨00|
        let b = partial_trace(&rho, Marginal::B);
        assert!(b.matrix().frobenius_dist(&CMat::diag([1.0, 0.0])) < 1e-14);
        let a = partial_trace(&rho, Marginal::A);
        assert!(a.matrix().frobenius_dist(&CMat::diag([1.0, 0.0])) < 1e-14);
    }

    #[test]
    fn entangled_marginals_maximally_mixed() {
        let phi = DensityOp4::pure(&bell_phi_plus()).unwrap();
        for keep in [Marginal::A, Marginal::B] {
            let m = partial_trace(&phi, keep);
            assert!(m.matrix().frobenius_dist(&CMat::diag([0.5, 0.5])) < 1e-14);
        }
        let w = werner(2.0 / 3.0).unwrap();
        let b = partial_trace(&w, Marginal::B);
        assert!(b.matrix().frobenius_dist(&CMat::diag([0.5, 0.5])) < 1e-14);
    }

    #[test]
    fn werner_eigenvalues() {
        for k in 0..=100 {
            let p = k as f64 / 100.0;
            let w = werner(p).unwrap();
            let e = w.eig().unwrap();
            let expect_top = (1.0 + 3.0 * p) / 4.0;
            let expect_rest = (1.0 - p) / 4.0;
            assert!((e.values[0] - expect_top.max(expect_rest)).abs() < 1e-12);
            for v in &e.values[1..] {
                assert!((v - expect_rest.min(expect_top)).abs() < 1e-12);
            }
        }
        assert!(werner(0.0)
            .unwrap()
            .matrix()
            .frobenius_dist(&CMat::identity().scale(cr(0.25)))
            < 1e-15);
        let phi = DensityOp4::pure(&bell_phi_plus()).unwrap();
        assert!(werner(1.0).unwrap().matrix().frobenius_dist(phi.matrix()) < 1e-15);
        assert!(werner(1.5).is_err());
    }

    #[test]
    fn bell_diagonal_cases() {
        let phi = DensityOp4::pure(&bell_phi_plus()).unwrap();
        let b = bell_diagonal([1.0, 0.0, 0.0, 0.0]).unwrap();
        assert!(b.matrix().frobenius_dist(phi.matrix()) < 1e-14);
        let mixed = bell_diagonal([0.25; 4]).unwrap();
        assert!(mixed.matrix().frobenius_dist(&CMat::identity().scale(cr(0.25))) < 1e-14);
        // Bell weights of the p = 2/3 mixture with the maximally mixed state
        let w = bell_diagonal([0.75, 1.0 / 12.0, 1.0 / 12.0, 1.0 / 12.0]).unwrap();
        assert!(w.matrix().frobenius_dist(werner(2.0 / 3.0).unwrap().matrix()) < 1e-13);
        assert!(bell_diagonal([0.5, 0.2, 0.2, 0.2]).is_err());
    }

    #[test]
    fn three_qubit_marginals() {
        // product ρ_A ⊗ ρ_B ⊗ ρ_B'
        let a = random_density::<2>(RngSeed(1), 2).unwrap();
        let b = random_density::<2>(RngSeed(2), 2).unwrap();
        let bp = random_density::<2>(RngSeed(3), 1).unwrap();
        let abbp: CMat<8> = kron(&kron::<2, 2, 4>(a.matrix(), b.matrix()), bp.matrix());
        let rho = DensityOp8::from_matrix(abbp).unwrap();
        let ab = partial_trace3(&rho, Marginal3::Ab);
        assert!(ab.matrix().frobenius_dist(product_state(&a, &b).matrix()) < 1e-12);
        let abp = partial_trace3(&rho, Marginal3::AbPrime);
        assert!(abp.matrix().frobenius_dist(product_state(&a, &bp).matrix()) < 1e-12);
        let bbp = partial_trace3(&rho, Marginal3::BbPrime);
        assert!(bbp.matrix().frobenius_dist(product_state(&b, &bp).matrix()) < 1e-12);

        // GHZ marginal is the classically correlated state
        let mut ghz = [Cplx::new(0.0, 0.0); 8];
        ghz[0] = cr(1.0 / 2.0_f64.sqrt());
        ghz[7] = cr(1.0 / 2.0_f64.sqrt());
        let g = DensityOp8::pure(&ghz).unwrap();
        let ab = partial_trace3(&g, Marginal3::Ab);
        assert!(ab.matrix().frobenius_dist(&CMat::diag([0.5, 0.0, 0.0, 0.5])) < 1e-14);
    }

    #[test]
    fn swap_involution_and_basis_action() {
        // |001⟩⟨001| ↦ |010⟩⟨010|
        let e1 = DensityOp8::pure(&basis_vec::<8>(1)).unwrap();
        let s = swap_bbprime(&e1);
        assert!(s.matrix().frobenius_dist(DensityOp8::pure(&basis_vec::<8>(2)).unwrap().matrix()) < 1e-15);
        for seed in 0..5 {
            let r = random_density::<8>(RngSeed(seed), 8).unwrap();
            let twice = swap_bbprime(&swap_bbprime(&r));
            assert!(twice.matrix().frobenius_dist(r.matrix()) < 1e-14);
        }
        // marginal consistency: tr_B ρ = tr_B' (SρS) reported in the same order
        for seed in 10..15 {
            let r = random_density::<8>(RngSeed(seed), 4).unwrap();
            let direct = partial_trace3(&r, Marginal3::AbPrime);
            let swapped = partial_trace3(&swap_bbprime(&r), Marginal3::Ab);
            assert!(direct.matrix().frobenius_dist(swapped.matrix()) < 1e-12);
        }
    }

    #[test]
    fn random_density_contracts() {
        let full = random_density::<4>(RngSeed(42), 4).unwrap();
        assert!(full.eig().unwrap().min_value() > 1e-12);
        let pure = random_density::<4>(RngSeed(42), 1).unwrap();
        assert!((pure.purity() - 1.0).abs() < 1e-10);
        let r1 = random_density::<4>(RngSeed(7), 3).unwrap();
        let r2 = random_density::<4>(RngSeed(7), 3).unwrap();
        assert_eq!(r1.matrix().0, r2.matrix().0);
        for seed in 0..20 {
            let r = random_density::<8>(RngSeed(seed), 5).unwrap();
            assert!((r.herm().trace() - 1.0).abs() < 1e-12);
            assert!(r.eig().unwrap().min_value() > -1e-12);
        }
    }

    #[test]
    fn state_file_roundtrip() {
        let rho = werner(0.5).unwrap();
        let text = state_to_string(&rho).unwrap();
        let back = parse_state(&text).unwrap();
        assert!(back.matrix().frobenius_dist(rho.matrix()) < 1e-15);
    }

    #[test]
    fn state_file_invariant_errors() {
        let bad_trace = r#"{"dim":4,
            "re":[[0.4,0,0,0],[0,0.3,0,0],[0,0,0.2,0],[0,0,0,0.0]],
            "im":[[0,0,0,0],[0,0,0,0],[0,0,0,0],[0,0,0,0]]}"#;
        match parse_state(bad_trace) {
            Err(StateError::TraceInvalid { residual }) => assert!((residual - 0.1).abs() < 1e-12),
            other => panic!("expected TraceInvalid, got {other:?}"),
        }
        let non_herm = r#"{"dim":4,
            "re":[[0.25,0.1,0,0],[0,0.25,0,0],[0,0,0.25,0],[0,0,0,0.25]],
            "im":[[0,0,0,0],[0,0,0,0],[0,0,0,0],[0,0,0,0]]}"#;
        assert!(matches!(parse_state(non_herm), Err(StateError::HermiticityInvalid { .. })));
        let non_psd = r#"{"dim":4,
            "re":[[0.6,0,0,0],[0,0.6,0,0],[0,0,-0.2,0],[0,0,0,0.0]],
            "im":[[0,0,0,0],[0,0,0,0],[0,0,0,0],[0,0,0,0]]}"#;
        assert!(matches!(parse_state(non_psd), Err(StateError::PsdInvalid { .. })));
        let bad_dim = r#"{"dim":2,"re":[[1,0],[0,0]],"im":[[0,0],[0,0]]}"#;
        assert!(matches!(parse_state(bad_dim), Err(StateError::BadDimension { .. })));
    }

    #[test]
    fn marginal_traces_one() {
        for seed in 0..50 {
            let r = random_density::<4>(RngSeed(seed), 1 + (seed as usize % 4)).unwrap();
            for keep in [Marginal::A, Marginal::B] {
                let m = partial_trace(&r, keep);
                assert!((m.herm().trace() - 1.0).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn pauli_action_on_basis() {
        let xx: CMat<4> = kron(&pauli_x(), &pauli_x());
        let v = xx.matvec(&basis_vec::<4>(0));
        assert!((v[3] - cr(1.0)).norm() < 1e-15);
    }
}
