//! Exact-size complex matrix arithmetic and spectral routines.
//!
//! Everything here is dependency-free dense linear algebra for the three sizes
//! that occur in the problem (2, 4, 8). The eigensolver is a cyclic Jacobi
//! iteration on Hermitian matrices with a deterministic sweep order and a fixed
//! eigenvector phase convention, so identical inputs produce identical outputs.

use num_complex::Complex;
use thiserror::Error;

/// Complex scalar used throughout the crate.
pub type Cplx = Complex<f64>;

/// Shorthand for a real complex number.
#[inline]
pub fn cr(re: f64) -> Cplx {
    Cplx::new(re, 0.0)
}

/// Shorthand for a general complex number.
#[inline]
pub fn c(re: f64, im: f64) -> Cplx {
    Cplx::new(re, im)
}

#[derive(Debug, Error)]
pub enum LinalgError {
    #[error("Jacobi eigensolver did not converge: off-diagonal residual {residual:.3e}")]
    NoConvergence { residual: f64 },
    #[error("matrix is not Hermitian: max asymmetry {asymmetry:.3e}")]
    NotHermitian { asymmetry: f64 },
    #[error("matrix is not positive semidefinite: min eigenvalue {min_eig:.3e}")]
    NotPsd { min_eig: f64 },
    #[error("matrix is numerically singular: |det| = {det_abs:.3e}")]
    Singular { det_abs: f64 },
    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },
}

/// Dense N×N complex matrix, row-major.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CMat<const N: usize>(pub [[Cplx; N]; N]);

impl<const N: usize> CMat<N> {
    pub fn zero() -> Self {
        CMat([[Cplx::new(0.0, 0.0); N]; N])
    }

    pub fn identity() -> Self {
        let mut m = Self::zero();
        for i in 0..N {
            m.0[i][i] = cr(1.0);
        }
        m
    }

    pub fn from_rows(rows: [[Cplx; N]; N]) -> Self {
        CMat(rows)
    }

    /// Diagonal matrix from real entries.
    pub fn diag(d: [f64; N]) -> Self {
        let mut m = Self::zero();
        for i in 0..N {
            m.0[i][i] = cr(d[i]);
        }
        m
    }

    pub fn adjoint(&self) -> Self {
        let mut out = Self::zero();
        for i in 0..N {
            for j in 0..N {
                out.0[i][j] = self.0[j][i].conj();
            }
        }
        out
    }

    pub fn trace(&self) -> Cplx {
        (0..N).map(|i| self.0[i][i]).sum()
    }

    pub fn scale(&self, s: Cplx) -> Self {
        let mut out = *self;
        for row in out.0.iter_mut() {
            for e in row.iter_mut() {
                *e *= s;
            }
        }
        out
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0
            .iter()
            .flatten()
            .map(|e| e.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().flatten().map(|e| e.norm()).fold(0.0, f64::max)
    }

    /// Largest |entry| of `self − other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let mut m = 0.0f64;
        for i in 0..N {
            for j in 0..N {
                m = m.max((self.0[i][j] - other.0[i][j]).norm());
            }
        }
        m
    }

    pub fn frobenius_dist(&self, other: &Self) -> f64 {
        (*self - *other).frobenius_norm()
    }

    pub fn matvec(&self, v: &[Cplx; N]) -> [Cplx; N] {
        let mut out = [Cplx::new(0.0, 0.0); N];
        for i in 0..N {
            for j in 0..N {
                out[i] += self.0[i][j] * v[j];
            }
        }
        out
    }

    /// Checks every entry for NaN/Inf, reporting the first offender.
    pub fn check_finite(&self) -> Result<(), LinalgError> {
        for i in 0..N {
            for j in 0..N {
                let e = self.0[i][j];
                if !e.re.is_finite() || !e.im.is_finite() {
                    return Err(LinalgError::NonFinite { row: i, col: j });
                }
            }
        }
        Ok(())
    }
}

impl<const N: usize> std::ops::Index<(usize, usize)> for CMat<N> {
    type Output = Cplx;
    fn index(&self, (i, j): (usize, usize)) -> &Cplx {
        &self.0[i][j]
    }
}

impl<const N: usize> std::ops::IndexMut<(usize, usize)> for CMat<N> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Cplx {
        &mut self.0[i][j]
    }
}

impl<const N: usize> std::ops::Add for CMat<N> {
    type Output = CMat<N>;
    fn add(self, rhs: Self) -> Self {
        let mut out = self;
        for i in 0..N {
            for j in 0..N {
                out.0[i][j] += rhs.0[i][j];
            }
        }
        out
    }
}

impl<const N: usize> std::ops::Sub for CMat<N> {
    type Output = CMat<N>;
    fn sub(self, rhs: Self) -> Self {
        let mut out = self;
        for i in 0..N {
            for j in 0..N {
                out.0[i][j] -= rhs.0[i][j];
            }
        }
        out
    }
}

impl<const N: usize> std::ops::Neg for CMat<N> {
    type Output = CMat<N>;
    fn neg(self) -> Self {
        self.scale(cr(-1.0))
    }
}

impl<const N: usize> std::ops::Mul for CMat<N> {
    type Output = CMat<N>;
    fn mul(self, rhs: Self) -> Self {
        let mut out = Self::zero();
        for i in 0..N {
            for k in 0..N {
                let a = self.0[i][k];
                if a.norm_sqr() == 0.0 {
                    continue;
                }
                for j in 0..N {
                    out.0[i][j] += a * rhs.0[k][j];
                }
            }
        }
        out
    }
}

// ---------------------------------------------------------------------------
// vectors

pub fn vec_dot<const N: usize>(a: &[Cplx; N], b: &[Cplx; N]) -> Cplx {
    let mut s = Cplx::new(0.0, 0.0);
    for i in 0..N {
        s += a[i].conj() * b[i];
    }
    s
}

pub fn vec_norm<const N: usize>(v: &[Cplx; N]) -> f64 {
    v.iter().map(|e| e.norm_sqr()).sum::<f64>().sqrt()
}

pub fn vec_scale<const N: usize>(v: &[Cplx; N], s: Cplx) -> [Cplx; N] {
    let mut out = *v;
    for e in out.iter_mut() {
        *e *= s;
    }
    out
}

pub fn vec_sub<const N: usize>(a: &[Cplx; N], b: &[Cplx; N]) -> [Cplx; N] {
    let mut out = *a;
    for i in 0..N {
        out[i] -= b[i];
    }
    out
}

/// Rank-one matrix |a⟩⟨b|.
pub fn outer<const N: usize>(a: &[Cplx; N], b: &[Cplx; N]) -> CMat<N> {
    let mut m = CMat::zero();
    for i in 0..N {
        for j in 0..N {
            m.0[i][j] = a[i] * b[j].conj();
        }
    }
    m
}

/// Multiplies by a phase making the first component with |v_k| > 1e-10 real
/// positive. No-op for the zero vector.
pub fn phase_fix<const N: usize>(v: &[Cplx; N]) -> [Cplx; N] {
    for k in 0..N {
        let a = v[k].norm();
        if a > 1e-10 {
            return vec_scale(v, v[k].conj() / cr(a));
        }
    }
    *v
}

// ---------------------------------------------------------------------------
// Hermitian wrapper

/// Hermitian N×N matrix. Construction symmetrizes through (M + M†)/2 and
/// rejects inputs whose asymmetry exceeds 1e-8 in max-abs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HermMat<const N: usize>(CMat<N>);

impl<const N: usize> HermMat<N> {
    pub fn new(m: CMat<N>) -> Result<Self, LinalgError> {
        m.check_finite()?;
        let asym = m.max_abs_diff(&m.adjoint());
        if asym > 1e-8 {
            return Err(LinalgError::NotHermitian { asymmetry: asym });
        }
        Ok(Self::symmetrize(m))
    }

    /// (M + M†)/2 without the asymmetry check, for matrices that are Hermitian
    /// by construction up to rounding.
    pub fn symmetrize(m: CMat<N>) -> Self {
        let mut out = m;
        for i in 0..N {
            for j in i..N {
                let e = (m.0[i][j] + m.0[j][i].conj()).scale(0.5);
                out.0[i][j] = e;
                out.0[j][i] = e.conj();
            }
        }
        HermMat(out)
    }

    pub fn zero() -> Self {
        HermMat(CMat::zero())
    }

    pub fn identity() -> Self {
        HermMat(CMat::identity())
    }

    pub fn matrix(&self) -> &CMat<N> {
        &self.0
    }

    pub fn into_matrix(self) -> CMat<N> {
        self.0
    }

    pub fn trace(&self) -> f64 {
        self.0.trace().re
    }

    /// tr(M²) = ‖M‖_F² for Hermitian M.
    pub fn trace_sq(&self) -> f64 {
        let n = self.0.frobenius_norm();
        n * n
    }

    /// Real part of tr(self · other); exact for Hermitian pairs.
    pub fn trace_product(&self, other: &HermMat<N>) -> f64 {
        let mut s = 0.0;
        for i in 0..N {
            for j in 0..N {
                s += (self.0[(i, j)] * other.0[(j, i)]).re;
            }
        }
        s
    }

    pub fn eig(&self) -> Result<EigDecomp<N>, LinalgError> {
        herm_eig(self)
    }

    pub fn add(&self, other: &Self) -> Self {
        HermMat(self.0 + other.0)
    }

    pub fn sub(&self, other: &Self) -> Self {
        HermMat(self.0 - other.0)
    }

    pub fn scale_re(&self, s: f64) -> Self {
        HermMat(self.0.scale(cr(s)))
    }
}

/// Spectral decomposition of a Hermitian matrix. `values` are descending;
/// `vectors[k]` is the orthonormal eigenvector for `values[k]`.
#[derive(Debug, Clone)]
pub struct EigDecomp<const N: usize> {
    pub values: [f64; N],
    pub vectors: [[Cplx; N]; N],
}

impl<const N: usize> EigDecomp<N> {
    pub fn min_value(&self) -> f64 {
        self.values[N - 1]
    }

    /// Σ_k g(λ_k) |v_k⟩⟨v_k|.
    pub fn reconstruct_with(&self, g: impl Fn(f64) -> f64) -> CMat<N> {
        let mut m = CMat::zero();
        for k in 0..N {
            let w = g(self.values[k]);
            if w == 0.0 {
                continue;
            }
            for i in 0..N {
                for j in 0..N {
                    m.0[i][j] += cr(w) * self.vectors[k][i] * self.vectors[k][j].conj();
                }
            }
        }
        m
    }

    pub fn reconstruct(&self) -> CMat<N> {
        self.reconstruct_with(|x| x)
    }

    /// Count of eigenvalues above `threshold`.
    pub fn rank(&self, threshold: f64) -> usize {
        self.values.iter().filter(|&&v| v > threshold).count()
    }
}

/// Full spectral decomposition of a Hermitian matrix.
///
/// 2×2 inputs use the closed-form quadratic; larger sizes use cyclic Jacobi
/// sweeps (cap 100) converging when the off-diagonal Frobenius mass drops
/// below 1e-14·‖M‖_F. Eigenvalues are sorted descending, phases are fixed, and
/// eigenvectors inside degenerate clusters (gap < 1e-10) are re-orthonormalized
/// by Gram-Schmidt in index order for determinism.
pub fn herm_eig<const N: usize>(m: &HermMat<N>) -> Result<EigDecomp<N>, LinalgError> {
    let (mut values, mut vectors) = if N == 2 {
        eig2(m.matrix())
    } else {
        jacobi(m.matrix())?
    };

    // sort descending, stable in index for exact ties
    let mut idx: Vec<usize> = (0..N).collect();
    idx.sort_by(|&a, &b| values[b].partial_cmp(&values[a]).unwrap().then(a.cmp(&b)));
    let values_s: Vec<f64> = idx.iter().map(|&i| values[i]).collect();
    let vectors_s: Vec<[Cplx; N]> = idx.iter().map(|&i| vectors[i]).collect();
    values.copy_from_slice(&values_s);
    vectors.copy_from_slice(&vectors_s);

    // Gram-Schmidt inside degenerate clusters, then phase convention.
    let mut start = 0;
    while start < N {
        let mut end = start + 1;
        while end < N && (values[end - 1] - values[end]).abs() < 1e-10 {
            end += 1;
        }
        for i in start..end {
            let mut v = vectors[i];
            for j in start..i {
                let ov = vec_dot(&vectors[j], &v);
                for k in 0..N {
                    v[k] -= ov * vectors[j][k];
                }
            }
            let n = vec_norm(&v);
            if n > 1e-12 {
                vectors[i] = vec_scale(&v, cr(1.0 / n));
            }
        }
        start = end;
    }
    for v in vectors.iter_mut() {
        *v = phase_fix(v);
    }

    let mut out_values = [0.0; N];
    let mut out_vectors = [[Cplx::new(0.0, 0.0); N]; N];
    out_values.copy_from_slice(&values[..N]);
    out_vectors.copy_from_slice(&vectors[..N]);
    Ok(EigDecomp {
        values: out_values,
        vectors: out_vectors,
    })
}

/// Closed-form 2×2 Hermitian eigendecomposition (embedded in size-N storage,
/// only used with N = 2).
fn eig2<const N: usize>(m: &CMat<N>) -> ([f64; N], [[Cplx; N]; N]) {
    let a = m.0[0][0].re;
    let d = m.0[1][1].re;
    let b = m.0[0][1];
    let mean = 0.5 * (a + d);
    let diff = 0.5 * (a - d);
    let rad = (diff * diff + b.norm_sqr()).sqrt();
    let l1 = mean + rad;
    let l2 = mean - rad;

    let mut values = [0.0; N];
    let mut vectors = [[Cplx::new(0.0, 0.0); N]; N];
    values[0] = l1;
    values[1] = l2;
    if b.norm() < 1e-300 || rad < 1e-300 {
        // already diagonal (or fully degenerate): basis vectors ordered by the
        // diagonal entries
        let (i1, i2) = if a >= d { (0, 1) } else { (1, 0) };
        vectors[0][i1] = cr(1.0);
        vectors[1][i2] = cr(1.0);
    } else {
        let v1 = [b, cr(l1 - a)];
        let v2 = [cr(l2 - d), b.conj()];
        let n1 = (v1[0].norm_sqr() + v1[1].norm_sqr()).sqrt();
        let n2 = (v2[0].norm_sqr() + v2[1].norm_sqr()).sqrt();
        vectors[0][0] = Cplx::new(v1[0].re / n1, v1[0].im / n1);
        vectors[0][1] = Cplx::new(v1[1].re / n1, v1[1].im / n1);
        vectors[1][0] = Cplx::new(v2[0].re / n2, v2[0].im / n2);
        vectors[1][1] = Cplx::new(v2[1].re / n2, v2[1].im / n2);
    }
    (values, vectors)
}

const JACOBI_MAX_SWEEPS: usize = 100;

/// Cyclic Jacobi sweeps with two-sided complex rotations.
fn jacobi<const N: usize>(m: &CMat<N>) -> Result<([f64; N], [[Cplx; N]; N]), LinalgError> {
    let mut a = *m;
    let mut v = CMat::<N>::identity();
    let norm = a.frobenius_norm();
    let tol = 1e-14 * norm;

    let off = |a: &CMat<N>| -> f64 {
        let mut s = 0.0;
        for i in 0..N {
            for j in 0..N {
                if i != j {
                    s += a.0[i][j].norm_sqr();
                }
            }
        }
        s.sqrt()
    };

    let mut converged = norm == 0.0;
    for _ in 0..JACOBI_MAX_SWEEPS {
        if off(&a) <= tol {
            converged = true;
            break;
        }
        for p in 0..N {
            for q in (p + 1)..N {
                let apq = a.0[p][q];
                let r = apq.norm();
                if r < 1e-300 {
                    continue;
                }
                // unit phase of the pivot entry; componentwise division, since
                // dividing by the complex scalar squares r and can underflow
                let w = Cplx::new(apq.re / r, apq.im / r);
                let app = a.0[p][p].re;
                let aqq = a.0[q][q].re;
                let tau = (aqq - app) / (2.0 * r);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    1.0 / (tau - (1.0 + tau * tau).sqrt())
                };
                let cth = 1.0 / (1.0 + t * t).sqrt();
                let sth = t * cth;
                let cc = cr(cth);
                let sw = cr(sth) * w;
                let swc = cr(sth) * w.conj();

                // A ← A·G
                for k in 0..N {
                    let akp = a.0[k][p];
                    let akq = a.0[k][q];
                    a.0[k][p] = cc * akp - swc * akq;
                    a.0[k][q] = sw * akp + cc * akq;
                }
                // A ← G†·A
                for k in 0..N {
                    let apk = a.0[p][k];
                    let aqk = a.0[q][k];
                    a.0[p][k] = cc * apk - sw * aqk;
                    a.0[q][k] = swc * apk + cc * aqk;
                }
                a.0[p][q] = Cplx::new(0.0, 0.0);
                a.0[q][p] = Cplx::new(0.0, 0.0);
                a.0[p][p] = cr(a.0[p][p].re);
                a.0[q][q] = cr(a.0[q][q].re);

                // V ← V·G
                for k in 0..N {
                    let vkp = v.0[k][p];
                    let vkq = v.0[k][q];
                    v.0[k][p] = cc * vkp - swc * vkq;
                    v.0[k][q] = sw * vkp + cc * vkq;
                }
            }
        }
    }
    if !converged && off(&a) > tol {
        return Err(LinalgError::NoConvergence { residual: off(&a) });
    }

    let mut values = [0.0; N];
    let mut vectors = [[Cplx::new(0.0, 0.0); N]; N];
    for k in 0..N {
        values[k] = a.0[k][k].re;
        for i in 0..N {
            vectors[k][i] = v.0[i][k];
        }
    }
    Ok((values, vectors))
}

// ---------------------------------------------------------------------------
// determinants, inverses, roots, norms

/// Determinant by LU with partial pivoting.
pub fn det<const N: usize>(m: &CMat<N>) -> Cplx {
    let mut a = *m;
    let mut sign = 1.0;
    let mut d = cr(1.0);
    for k in 0..N {
        let mut piv = k;
        let mut best = a.0[k][k].norm();
        for i in (k + 1)..N {
            let v = a.0[i][k].norm();
            if v > best {
                best = v;
                piv = i;
            }
        }
        if best == 0.0 {
            return Cplx::new(0.0, 0.0);
        }
        if piv != k {
            a.0.swap(piv, k);
            sign = -sign;
        }
        d *= a.0[k][k];
        for i in (k + 1)..N {
            let f = a.0[i][k] / a.0[k][k];
            for j in k..N {
                let akj = a.0[k][j];
                a.0[i][j] -= f * akj;
            }
        }
    }
    d * cr(sign)
}

/// Determinant of a 4×4 matrix.
pub fn det4(m: &CMat<4>) -> Cplx {
    det(m)
}

/// 2×2 determinant.
pub fn det2(m: &CMat<2>) -> Cplx {
    m.0[0][0] * m.0[1][1] - m.0[0][1] * m.0[1][0]
}

/// Inverse by Gauss-Jordan with partial pivoting. Fails when
/// |det M| ≤ 1e-12·‖M‖_F^N.
pub fn mat_inv<const N: usize>(m: &CMat<N>) -> Result<CMat<N>, LinalgError> {
    let d = det(m).norm();
    let bound = 1e-12 * m.frobenius_norm().powi(N as i32);
    if d <= bound {
        return Err(LinalgError::Singular { det_abs: d });
    }
    let mut a = *m;
    let mut inv = CMat::<N>::identity();
    for k in 0..N {
        let mut piv = k;
        let mut best = a.0[k][k].norm();
        for i in (k + 1)..N {
            let v = a.0[i][k].norm();
            if v > best {
                best = v;
                piv = i;
            }
        }
        if best == 0.0 {
            return Err(LinalgError::Singular { det_abs: 0.0 });
        }
        if piv != k {
            a.0.swap(piv, k);
            inv.0.swap(piv, k);
        }
        let f = a.0[k][k];
        for j in 0..N {
            a.0[k][j] /= f;
            inv.0[k][j] /= f;
        }
        for i in 0..N {
            if i == k {
                continue;
            }
            let g = a.0[i][k];
            if g.norm_sqr() == 0.0 {
                continue;
            }
            for j in 0..N {
                let akj = a.0[k][j];
                let ikj = inv.0[k][j];
                a.0[i][j] -= g * akj;
                inv.0[i][j] -= g * ikj;
            }
        }
    }
    Ok(inv)
}

/// PSD square root. Eigenvalues in [−1e-9, 0) are clipped to zero; anything
/// below −1e-9 is an error.
pub fn psd_sqrt<const N: usize>(m: &HermMat<N>) -> Result<HermMat<N>, LinalgError> {
    let e = herm_eig(m)?;
    if e.min_value() < -1e-9 {
        return Err(LinalgError::NotPsd {
            min_eig: e.min_value(),
        });
    }
    Ok(HermMat::symmetrize(
        e.reconstruct_with(|x| x.max(0.0).sqrt()),
    ))
}

/// PSD square root that clips all negative eigenvalues (rounding guard for
/// Schur complements of validated states).
pub fn psd_sqrt_clipped<const N: usize>(m: &HermMat<N>) -> Result<HermMat<N>, LinalgError> {
    let e = herm_eig(m)?;
    Ok(HermMat::symmetrize(
        e.reconstruct_with(|x| x.max(0.0).sqrt()),
    ))
}

/// Trace norm (sum of the two singular values) of a 2×2 matrix, from the
/// closed-form identity (σ₁+σ₂)² = tr(M†M) + 2|det M|.
pub fn trace_norm2(m: &CMat<2>) -> f64 {
    let t = m.frobenius_norm().powi(2);
    (t + 2.0 * det2(m).norm()).max(0.0).sqrt()
}

/// Kronecker product. The output size must satisfy MN = M·N (checked at run
/// time; const arithmetic in bounds is not expressible here).
pub fn kron<const M: usize, const N: usize, const MN: usize>(
    a: &CMat<M>,
    b: &CMat<N>,
) -> CMat<MN> {
    assert_eq!(M * N, MN, "kron output size mismatch");
    let mut out = CMat::<MN>::zero();
    for i in 0..M {
        for j in 0..M {
            for k in 0..N {
                for l in 0..N {
                    out.0[i * N + k][j * N + l] = a.0[i][j] * b.0[k][l];
                }
            }
        }
    }
    out
}

// ---------------------------------------------------------------------------
// fixed operators

pub fn pauli_x() -> CMat<2> {
    CMat::from_rows([[cr(0.0), cr(1.0)], [cr(1.0), cr(0.0)]])
}

pub fn pauli_y() -> CMat<2> {
    CMat::from_rows([[cr(0.0), c(0.0, -1.0)], [c(0.0, 1.0), cr(0.0)]])
}

pub fn pauli_z() -> CMat<2> {
    CMat::from_rows([[cr(1.0), cr(0.0)], [cr(0.0), cr(-1.0)]])
}

/// 2×2 unitary from three real parameters:
/// [[cosθ·e^{iφ₁}, −sinθ·e^{iφ₂}], [sinθ·e^{−iφ₂}, cosθ·e^{−iφ₁}]].
pub fn su2(theta: f64, phi1: f64, phi2: f64) -> CMat<2> {
    let (ct, st) = (theta.cos(), theta.sin());
    CMat::from_rows([
        [Cplx::from_polar(ct, phi1), -Cplx::from_polar(st, phi2)],
        [Cplx::from_polar(st, -phi2), Cplx::from_polar(ct, -phi1)],
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rand_herm<const N: usize>(rng: &mut impl FnMut() -> f64) -> HermMat<N> {
        let mut m = CMat::<N>::zero();
        for i in 0..N {
            for j in 0..N {
                m.0[i][j] = c(rng() - 0.5, rng() - 0.5);
            }
        }
        HermMat::symmetrize(m)
    }

    fn lcg(seed: u64) -> impl FnMut() -> f64 {
        let mut s = seed;
        move || {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((s >> 11) as f64) / ((1u64 << 53) as f64)
        }
    }

    #[test]
    fn identity_eigenvalues() {
        let e = herm_eig(&HermMat::<4>::identity()).unwrap();
        for v in e.values {
            assert!((v - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn pauli_z_tensor_identity_spectrum() {
        let m: CMat<4> = kron(&pauli_z(), &CMat::<2>::identity());
        let e = herm_eig(&HermMat::new(m).unwrap()).unwrap();
        let expect = [1.0, 1.0, -1.0, -1.0];
        for (v, ex) in e.values.iter().zip(expect) {
            assert!((v - ex).abs() < 1e-13);
        }
    }

    // The 4×4 matrix with diagonal (2/9, 2/3, 2/3, 2/9) and anti-diagonal
    // corners −4/9 block-diagonalizes into the middle entries and the 2×2
    // block [[2/9, −4/9], [−4/9, 2/9]] with eigenvalues 2/9 ± 4/9, so the
    // spectrum is {2/3, 2/3, 2/3, −2/9}.
    #[test]
    fn corner_block_matrix_spectrum() {
        let mut m = CMat::<4>::diag([2.0 / 9.0, 2.0 / 3.0, 2.0 / 3.0, 2.0 / 9.0]);
        m[(0, 3)] = cr(-4.0 / 9.0);
        m[(3, 0)] = cr(-4.0 / 9.0);
        let e = herm_eig(&HermMat::new(m).unwrap()).unwrap();
        let expect = [2.0 / 3.0, 2.0 / 3.0, 2.0 / 3.0, -2.0 / 9.0];
        for (v, ex) in e.values.iter().zip(expect) {
            assert!((v - ex).abs() < 1e-13, "{v} vs {ex}");
        }
    }

    #[test]
    fn jacobi_reconstruction_all_sizes() {
        let mut rng = lcg(7);
        for _ in 0..200 {
            let m = rand_herm::<2>(&mut rng);
            let e = herm_eig(&m).unwrap();
            assert!(
                m.matrix().frobenius_dist(&e.reconstruct())
                    < 1e-9 * (1.0 + m.matrix().frobenius_norm())
            );
        }
        for _ in 0..200 {
            let m = rand_herm::<4>(&mut rng);
            let e = herm_eig(&m).unwrap();
            assert!(
                m.matrix().frobenius_dist(&e.reconstruct())
                    < 1e-9 * (1.0 + m.matrix().frobenius_norm())
            );
        }
        for _ in 0..200 {
            let m = rand_herm::<8>(&mut rng);
            let e = herm_eig(&m).unwrap();
            assert!(
                m.matrix().frobenius_dist(&e.reconstruct())
                    < 1e-9 * (1.0 + m.matrix().frobenius_norm())
            );
        }
    }

    #[test]
    fn eigenvectors_orthonormal() {
        let mut rng = lcg(11);
        for _ in 0..100 {
            let m = rand_herm::<8>(&mut rng);
            let e = herm_eig(&m).unwrap();
            for i in 0..8 {
                for j in 0..8 {
                    let ov = vec_dot(&e.vectors[i], &e.vectors[j]);
                    let expect = if i == j { 1.0 } else { 0.0 };
                    assert!((ov - cr(expect)).norm() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn eig_deterministic() {
        let mut rng = lcg(23);
        let m = rand_herm::<8>(&mut rng);
        let e1 = herm_eig(&m).unwrap();
        let e2 = herm_eig(&m).unwrap();
        assert_eq!(e1.values, e2.values);
        assert_eq!(e1.vectors, e2.vectors);
    }

    #[test]
    fn det_basics() {
        assert!((det(&CMat::<4>::identity()) - cr(1.0)).norm() < 1e-15);
        let quarter = CMat::<4>::identity().scale(cr(0.25));
        assert!((det(&quarter) - cr(1.0 / 256.0)).norm() < 1e-17);
        // determinant = product of eigenvalues for Hermitian inputs
        let mut rng = lcg(31);
        for _ in 0..100 {
            let m = rand_herm::<4>(&mut rng);
            let e = herm_eig(&m).unwrap();
            let prod: f64 = e.values.iter().product();
            let d = det(m.matrix());
            assert!((d.re - prod).abs() < 1e-9 * (1.0 + prod.abs()));
            assert!(d.im.abs() < 1e-12 * (1.0 + m.matrix().frobenius_norm().powi(4)));
        }
    }

    #[test]
    fn inverse_2x2_and_4x4() {
        let m = CMat::<2>::from_rows([[c(1.0, 0.5), c(2.0, -1.0)], [c(0.0, 1.0), c(3.0, 0.0)]]);
        let inv = mat_inv(&m).unwrap();
        let resid = (m * inv).frobenius_dist(&CMat::identity());
        assert!(resid < 1e-12);
        // adjugate formula check on the same sample
        let d = det2(&m);
        let adj = CMat::<2>::from_rows([[m[(1, 1)] / d, -m[(0, 1)] / d], [-m[(1, 0)] / d, m[(0, 0)] / d]]);
        assert!(inv.frobenius_dist(&adj) < 1e-12);

        let mut rng = lcg(41);
        for _ in 0..50 {
            let m = rand_herm::<4>(&mut rng).into_matrix() + CMat::identity().scale(cr(2.0));
            let inv = mat_inv(&m).unwrap();
            assert!((m * inv).frobenius_dist(&CMat::identity()) < 1e-9);
        }
        let diag = CMat::<2>::diag([2.0, 4.0]);
        let inv = mat_inv(&diag).unwrap();
        assert!(inv.frobenius_dist(&CMat::diag([0.5, 0.25])) < 1e-15);
        assert!(mat_inv(&CMat::<2>::zero()).is_err());
    }

    #[test]
    fn psd_sqrt_cases() {
        let s = psd_sqrt(&HermMat::<2>::identity()).unwrap();
        assert!(s.matrix().frobenius_dist(&CMat::identity()) < 1e-14);
        let m = HermMat::new(CMat::<2>::diag([4.0, 9.0])).unwrap();
        let s = psd_sqrt(&m).unwrap();
        assert!(s.matrix().frobenius_dist(&CMat::diag([2.0, 3.0])) < 1e-13);

        // Gram reconstruction: sqrt(G†G)² = G†G
        let mut rng = lcg(53);
        for _ in 0..50 {
            let mut g = CMat::<4>::zero();
            for i in 0..4 {
                for j in 0..4 {
                    g.0[i][j] = c(rng() - 0.5, rng() - 0.5);
                }
            }
            let gram = HermMat::symmetrize(g.adjoint() * g);
            let s = psd_sqrt(&gram).unwrap();
            let re = *s.matrix() * *s.matrix();
            assert!(gram.matrix().frobenius_dist(&re) < 1e-9 * (1.0 + gram.matrix().frobenius_norm()));
        }

        let bad = HermMat::new(CMat::<2>::diag([1.0, -0.5])).unwrap();
        assert!(matches!(psd_sqrt(&bad), Err(LinalgError::NotPsd { .. })));
    }

    #[test]
    fn psd_sqrt_commutes_with_unitary_conjugation() {
        let mut rng = lcg(57);
        for _ in 0..25 {
            let mut g = CMat::<4>::zero();
            for i in 0..4 {
                for j in 0..4 {
                    g.0[i][j] = c(rng() - 0.5, rng() - 0.5);
                }
            }
            let m = HermMat::symmetrize(g.adjoint() * g);
            let u: CMat<4> = kron(
                &su2(rng() * 3.0, rng() * 6.0, rng() * 6.0),
                &su2(rng() * 3.0, rng() * 6.0, rng() * 6.0),
            );
            let conj = HermMat::symmetrize(u * *m.matrix() * u.adjoint());
            let lhs = psd_sqrt(&conj).unwrap();
            let rhs = u * *psd_sqrt(&m).unwrap().matrix() * u.adjoint();
            assert!(lhs.matrix().frobenius_dist(&rhs) < 1e-9);
        }
    }

    #[test]
    fn trace_norm_cases() {
        assert!((trace_norm2(&CMat::identity()) - 2.0).abs() < 1e-14);
        assert!((trace_norm2(&CMat::diag([3.0, -4.0])) - 7.0).abs() < 1e-13);
        let nil = CMat::from_rows([[cr(0.0), cr(1.0)], [cr(0.0), cr(0.0)]]);
        assert!((trace_norm2(&nil) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn trace_norm_unitarily_invariant() {
        let mut rng = lcg(61);
        for _ in 0..100 {
            let m = CMat::<2>::from_rows([
                [c(rng() - 0.5, rng() - 0.5), c(rng() - 0.5, rng() - 0.5)],
                [c(rng() - 0.5, rng() - 0.5), c(rng() - 0.5, rng() - 0.5)],
            ]);
            let u = su2(rng() * 3.0, rng() * 6.0, rng() * 6.0);
            let v = su2(rng() * 3.0, rng() * 6.0, rng() * 6.0);
            let rotated = u * m * v;
            assert!((trace_norm2(&rotated) - trace_norm2(&m)).abs() < 1e-10);
        }
    }

    #[test]
    fn kron_cases() {
        let i4: CMat<4> = kron(&CMat::<2>::identity(), &CMat::<2>::identity());
        assert!(i4.frobenius_dist(&CMat::identity()) < 1e-15);
        let d: CMat<4> = kron(&CMat::diag([1.0, 2.0]), &CMat::diag([1.0, 3.0]));
        assert!(d.frobenius_dist(&CMat::diag([1.0, 3.0, 2.0, 6.0])) < 1e-15);
        // (X ⊗ X)|00⟩ = |11⟩
        let xx: CMat<4> = kron(&pauli_x(), &pauli_x());
        let e00 = [cr(1.0), cr(0.0), cr(0.0), cr(0.0)];
        let out = xx.matvec(&e00);
        assert!((out[3] - cr(1.0)).norm() < 1e-15);
        assert!(out[0].norm() + out[1].norm() + out[2].norm() < 1e-15);
    }

    #[test]
    fn kron_mixed_product_property() {
        let mut rng = lcg(71);
        for _ in 0..25 {
            let mut mk = || {
                let mut m = CMat::<2>::zero();
                for i in 0..2 {
                    for j in 0..2 {
                        m.0[i][j] = c(rng() - 0.5, rng() - 0.5);
                    }
                }
                m
            };
            let (a, b, cm, d) = (mk(), mk(), mk(), mk());
            let lhs: CMat<4> = kron(&a, &b) * kron(&cm, &d);
            let rhs: CMat<4> = kron(&(a * cm), &(b * d));
            assert!(lhs.frobenius_dist(&rhs) < 1e-12);
        }
    }

    #[test]
    fn herm_rejects_asymmetric() {
        let mut m = CMat::<2>::identity();
        m[(0, 1)] = cr(1e-3);
        assert!(matches!(HermMat::new(m), Err(LinalgError::NotHermitian { .. })));
    }

    #[test]
    fn herm_rejects_nonfinite() {
        let mut m = CMat::<2>::identity();
        m[(0, 1)] = cr(f64::NAN);
        assert!(matches!(HermMat::new(m), Err(LinalgError::NonFinite { .. })));
    }
}
