//! Complex dense linear algebra kernel shared by every stage.
//!
//! Conventions used throughout the crate:
//!
//! * Inner products are sesquilinear with `<x,y> = y† g x` for a Hermitian
//!   positive definite Gram matrix `g`; `gram_frame` produces the lower
//!   Cholesky factor `L` with `L L† = g`, so `v ↦ L† v` maps coefficient
//!   vectors to orthonormal coordinates and plain conjugate-transpose is the
//!   adjoint there.
//! * Antilinear operators are stored by the kernel `K` of `v ↦ K·conj(v)`
//!   expressed in orthonormal coordinates; their adjoint for the pairing
//!   `<Zu,v> = <Z*v,u>` is the plain transpose.
//! * Rank decisions compare singular values against `rank_ratio · σ_max`.

use ndarray::{Array1, Array2};
use ndarray_linalg::{Cholesky, Eigh, Inverse, LeastSquaresSvd, SVD, UPLO};
use num_complex::Complex64;

use crate::error::WqgError;
use crate::tol::Tolerance;
use crate::Result;

pub type C = Complex64;
pub type CMat = Array2<C>;
pub type CVec = Array1<C>;

pub fn c(re: f64, im: f64) -> C {
    C::new(re, im)
}

pub fn cr(re: f64) -> C {
    C::new(re, 0.0)
}

pub fn eye(n: usize) -> CMat {
    Array2::eye(n)
}

pub fn zeros(rows: usize, cols: usize) -> CMat {
    Array2::zeros((rows, cols))
}

pub fn zvec(n: usize) -> CVec {
    Array1::zeros(n)
}

/// Conjugate transpose.
pub fn dagger(a: &CMat) -> CMat {
    a.t().mapv(|x| x.conj())
}

/// Entrywise conjugate.
pub fn conj_mat(a: &CMat) -> CMat {
    a.mapv(|x| x.conj())
}

pub fn conj_vec(v: &CVec) -> CVec {
    v.mapv(|x| x.conj())
}

/// Largest absolute entry.
pub fn max_abs(a: &CMat) -> f64 {
    a.iter().map(|x| x.norm()).fold(0.0, f64::max)
}

pub fn max_abs_vec(v: &CVec) -> f64 {
    v.iter().map(|x| x.norm()).fold(0.0, f64::max)
}

/// Max-abs distance between two matrices.
pub fn mat_dist(a: &CMat, b: &CMat) -> f64 {
    debug_assert_eq!(a.dim(), b.dim());
    max_abs(&(a - b))
}

pub fn vec_dist(a: &CVec, b: &CVec) -> f64 {
    debug_assert_eq!(a.dim(), b.dim());
    max_abs_vec(&(a - b))
}

/// Frobenius norm.
pub fn fro_norm(a: &CMat) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

pub fn vec_norm(v: &CVec) -> f64 {
    v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

/// Kronecker product under the row-major mixed index `(i,j) ↦ i·n₂+j`.
pub fn kron(a: &CMat, b: &CMat) -> CMat {
    ndarray::linalg::kron(a, b)
}

pub fn kron_vec(a: &CVec, b: &CVec) -> CVec {
    let (la, lb) = (a.len(), b.len());
    let mut out = zvec(la * lb);
    for i in 0..la {
        for j in 0..lb {
            out[i * lb + j] = a[i] * b[j];
        }
    }
    out
}

/// Reshape a length-`n·m` vector to an `n×m` matrix, row-major.
pub fn unvec(v: &CVec, rows: usize, cols: usize) -> CMat {
    assert_eq!(v.len(), rows * cols);
    Array2::from_shape_vec((rows, cols), v.to_vec()).expect("shape checked")
}

/// Inverse of `unvec`.
pub fn vec_of(m: &CMat) -> CVec {
    Array1::from_iter(m.iter().cloned())
}

/// Tensor-factor flip on `ℂ^{n²}`: `(flip v)_{(a,b)} = v_{(b,a)}`.
pub fn flip_matrix(n: usize) -> CMat {
    let mut p = zeros(n * n, n * n);
    for a in 0..n {
        for b in 0..n {
            p[(a * n + b, b * n + a)] = cr(1.0);
        }
    }
    p
}

fn check_finite(a: &CMat, what: &str) -> Result<()> {
    if a.iter().any(|x| !x.re.is_finite() || !x.im.is_finite()) {
        return Err(WqgError::NonFiniteNumber(what.to_string()));
    }
    Ok(())
}

/// Singular values, descending.
pub fn singular_values(a: &CMat) -> Result<Array1<f64>> {
    let (_, s, _) = a
        .svd(false, false)
        .map_err(|e| WqgError::Backend(format!("svd: {e}")))?;
    Ok(s)
}

/// Operator 2-norm (largest singular value); 0 for empty matrices.
pub fn op_norm(a: &CMat) -> Result<f64> {
    if a.is_empty() {
        return Ok(0.0);
    }
    Ok(*singular_values(a)?
        .iter()
        .next()
        .expect("nonempty singular spectrum"))
}

/// Numerical rank via `σᵢ > rank_ratio · σ_max`.
pub fn rank(a: &CMat, tol: &Tolerance) -> Result<usize> {
    if a.is_empty() {
        return Ok(0);
    }
    let s = singular_values(a)?;
    let smax = s[0];
    if smax == 0.0 {
        return Ok(0);
    }
    Ok(s.iter().filter(|&&x| x > tol.rank_ratio * smax).count())
}

/// Orthonormal basis (columns) of the null space of `a`.
pub fn nullspace(a: &CMat, tol: &Tolerance) -> Result<CMat> {
    let cols = a.ncols();
    let (_, s, vt) = a
        .svd(false, true)
        .map_err(|e| WqgError::Backend(format!("svd: {e}")))?;
    let vt = vt.expect("requested");
    let smax = s.iter().cloned().fold(0.0, f64::max);
    let r = if smax == 0.0 {
        0
    } else {
        s.iter().filter(|&&x| x > tol.rank_ratio * smax).count()
    };
    let mut basis = zeros(cols, cols - r);
    for (k, row) in (r..vt.nrows()).enumerate() {
        for j in 0..cols {
            basis[(j, k)] = vt[(row, j)].conj();
        }
    }
    // rows of vt beyond nrows (wide case) are implicit zeros of s; the null
    // space then also contains the orthogonal complement of the row space
    if vt.nrows() < cols {
        // svd(false, true) returns full vt only when requested; lapack gives
        // min(m,n) rows for "some" mode. Recompute with full vectors.
        let (_, s2, vt2) = a
            .svd(true, true)
            .map_err(|e| WqgError::Backend(format!("svd: {e}")))?;
        let vt2 = vt2.expect("requested");
        let smax2 = s2.iter().cloned().fold(0.0, f64::max);
        let r2 = if smax2 == 0.0 {
            0
        } else {
            s2.iter().filter(|&&x| x > tol.rank_ratio * smax2).count()
        };
        let mut b2 = zeros(cols, cols - r2);
        for (k, row) in (r2..cols).enumerate() {
            for j in 0..cols {
                b2[(j, k)] = vt2[(row, j)].conj();
            }
        }
        return Ok(b2);
    }
    Ok(basis)
}

/// Moore–Penrose pseudo-inverse.
pub fn pinv(a: &CMat, tol: &Tolerance) -> Result<CMat> {
    let (u, s, vt) = a
        .svd(true, true)
        .map_err(|e| WqgError::Backend(format!("svd: {e}")))?;
    let (u, vt) = (u.expect("requested"), vt.expect("requested"));
    let smax = s.iter().cloned().fold(0.0, f64::max);
    let mut sinv = zeros(a.ncols(), a.nrows());
    for (i, &sv) in s.iter().enumerate() {
        if smax > 0.0 && sv > tol.rank_ratio * smax {
            sinv[(i, i)] = cr(1.0 / sv);
        }
    }
    Ok(dagger(&vt).dot(&sinv).dot(&dagger(&u)))
}

/// Inverse that fails on numerically singular input.
pub fn inv_checked(a: &CMat, tol: &Tolerance, what: &str) -> Result<CMat> {
    let n = a.nrows();
    if n != a.ncols() {
        return Err(WqgError::DimensionMismatch(format!(
            "{what}: inverse of {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    let s = singular_values(a)?;
    if n == 0 {
        return Ok(a.clone());
    }
    if s[n - 1] <= tol.rank_ratio * s[0] || s[0] == 0.0 {
        return Err(WqgError::NotFaithful(format!(
            "{what}: singular matrix (σ_min/σ_max = {:.3e})",
            if s[0] > 0.0 { s[n - 1] / s[0] } else { 0.0 }
        )));
    }
    a.inv()
        .map_err(|e| WqgError::Backend(format!("{what}: inv: {e}")))
}

/// Least-squares solve minimizing `‖Ax − b‖_F`, returning the minimal-norm
/// solution and the attained residual.
pub fn solve_least_squares(a: &CMat, b: &CMat) -> Result<(CMat, f64)> {
    if a.nrows() != b.nrows() {
        return Err(WqgError::DimensionMismatch(format!(
            "least squares: A has {} rows, b has {}",
            a.nrows(),
            b.nrows()
        )));
    }
    check_finite(a, "least squares lhs")?;
    check_finite(b, "least squares rhs")?;
    let res = a
        .least_squares(b)
        .map_err(|e| WqgError::Backend(format!("least squares: {e}")))?;
    // lapack's solution can come back with degenerate strides on 1×1 shapes;
    // rebuild it in standard layout so downstream factorizations accept it
    let x = Array2::from_shape_vec(res.solution.dim(), res.solution.iter().cloned().collect())
        .expect("solution shape");
    let residual = fro_norm(&(a.dot(&x) - b));
    Ok((x, residual))
}

/// Vector right-hand-side convenience wrapper.
pub fn solve_least_squares_vec(a: &CMat, b: &CVec) -> Result<(CVec, f64)> {
    let bm = unvec(b, b.len(), 1);
    let (x, r) = solve_least_squares(a, &bm)?;
    Ok((x.column(0).to_owned(), r))
}

/// Eigendecomposition of a Hermitian matrix (ascending eigenvalues,
/// eigenvectors in columns). The input is symmetrized first.
pub fn eigh_hermitian(h: &CMat) -> Result<(Array1<f64>, CMat)> {
    let sym = (h + &dagger(h)).mapv(|x| x * 0.5);
    sym.eigh(UPLO::Lower)
        .map_err(|e| WqgError::Backend(format!("eigh: {e}")))
}

/// Hermitian-PD test returning `(eigmin, eigmax)`.
pub fn pd_spectrum(h: &CMat, tol: &Tolerance) -> Result<(f64, f64)> {
    let herm_res = mat_dist(h, &dagger(h));
    if herm_res > tol.abs_residual.max(1e-12 * max_abs(h)) {
        return Err(WqgError::NotPositiveDefinite(format!(
            "matrix is not Hermitian (residual {herm_res:.3e})"
        )));
    }
    let (vals, _) = eigh_hermitian(h)?;
    let (lo, hi) = (vals[0], vals[vals.len() - 1]);
    if !(hi > 0.0 && lo > tol.pd_ratio * hi) {
        return Err(WqgError::NotPositiveDefinite(format!(
            "eigenvalue range [{lo:.3e}, {hi:.3e}]"
        )));
    }
    Ok((lo, hi))
}

/// `H^z` for Hermitian positive definite `H` via functional calculus on the
/// eigendecomposition. For purely imaginary `z` the result is unitary.
pub fn hermitian_power(h: &CMat, z: C, tol: &Tolerance) -> Result<CMat> {
    pd_spectrum(h, tol)?;
    let (vals, vecs) = eigh_hermitian(h)?;
    let n = h.nrows();
    let mut d = zeros(n, n);
    for i in 0..n {
        d[(i, i)] = (z * vals[i].ln()).exp();
    }
    Ok(vecs.dot(&d).dot(&dagger(&vecs)))
}

/// Orthonormalizing frame of a Hermitian positive definite Gram matrix.
#[derive(Debug, Clone)]
pub struct Frame {
    /// Lower Cholesky factor, `L·L† = G`.
    pub l: CMat,
    /// `L^{-1}`.
    pub l_inv: CMat,
    /// Condition number `λ_max/λ_min` of the Gram matrix.
    pub cond: f64,
}

impl Frame {
    /// Coefficient vector → orthonormal coordinates (`v ↦ L† v`).
    pub fn coords(&self, v: &CVec) -> CVec {
        dagger(&self.l).dot(v)
    }

    /// Orthonormal coordinates → coefficient vector.
    pub fn coeffs(&self, u: &CVec) -> CVec {
        dagger(&self.l_inv).dot(u)
    }

    /// Conjugate a coefficient-space operator into orthonormal coordinates:
    /// `L† · op · (L†)^{-1}`.
    pub fn conjugate(&self, op: &CMat) -> CMat {
        dagger(&self.l).dot(op).dot(&dagger(&self.l_inv))
    }

    /// Inverse of [`Frame::conjugate`].
    pub fn unconjugate(&self, op: &CMat) -> CMat {
        dagger(&self.l_inv).dot(op).dot(&dagger(&self.l))
    }
}

/// Cholesky frame of a Hermitian PD Gram matrix.
///
/// Fails with `NotPositiveDefinite` when the Gram matrix is not PD to
/// tolerance, which downstream signals a non-faithful or non-positive
/// functional.
pub fn gram_frame(g: &CMat, tol: &Tolerance) -> Result<Frame> {
    let (lo, hi) = pd_spectrum(g, tol)?;
    let l = g
        .cholesky(UPLO::Lower)
        .map_err(|e| WqgError::NotPositiveDefinite(format!("cholesky: {e}")))?;
    let l_inv = l
        .inv()
        .map_err(|e| WqgError::Backend(format!("triangular inverse: {e}")))?;
    Ok(Frame {
        l,
        l_inv,
        cond: hi / lo,
    })
}

/// Adjoint of `T` with respect to Gram inner products on its domain and
/// codomain: `T† = G_dom^{-1} · Tᴴ · G_cod`, so `<Tu,v>_cod = <u,T†v>_dom`.
pub fn adjoint_wrt(g_dom: &CMat, g_cod: &CMat, t: &CMat, tol: &Tolerance) -> Result<CMat> {
    if t.nrows() != g_cod.nrows() || t.ncols() != g_dom.nrows() {
        return Err(WqgError::DimensionMismatch(format!(
            "adjoint_wrt: T is {}x{}, G_dom {}x{}, G_cod {}x{}",
            t.nrows(),
            t.ncols(),
            g_dom.nrows(),
            g_dom.ncols(),
            g_cod.nrows(),
            g_cod.ncols()
        )));
    }
    pd_spectrum(g_dom, tol)?;
    pd_spectrum(g_cod, tol)?;
    let gd_inv = inv_checked(g_dom, tol, "adjoint_wrt domain Gram")?;
    Ok(gd_inv.dot(&dagger(t)).dot(g_cod))
}

/// Antilinear operator `v ↦ K·conj(v)`, stored by its kernel `K` expressed in
/// orthonormal coordinates of its domain and codomain.
#[derive(Debug, Clone)]
pub struct AntilinearOp {
    pub kernel: CMat,
}

impl AntilinearOp {
    pub fn new(kernel: CMat) -> Self {
        AntilinearOp { kernel }
    }

    pub fn apply(&self, v: &CVec) -> CVec {
        self.kernel.dot(&conj_vec(v))
    }

    /// Adjoint for the pairing `<Zu,v> = <Z*v,u>`: plain transpose.
    pub fn adjoint(&self) -> AntilinearOp {
        AntilinearOp::new(self.kernel.t().to_owned())
    }

    /// The linear, positive semidefinite operator `Z*Z = Kᵀ·conj(K)`.
    pub fn star_self(&self) -> CMat {
        self.kernel.t().dot(&conj_mat(&self.kernel))
    }

    /// Residual of the kernel being unitary (anti-unitarity of the operator).
    pub fn antiunitary_residual(&self) -> f64 {
        let k = &self.kernel;
        mat_dist(&dagger(k).dot(k), &eye(k.ncols()))
    }
}

/// Subspace of `ℂ^ambient` with orthonormal basis columns.
#[derive(Debug, Clone)]
pub struct Subspace {
    pub ambient_dim: usize,
    pub basis: CMat,
}

impl Subspace {
    /// Span of the columns of `cols`, orthonormalized by SVD; singular values
    /// below `rank_ratio·σ_max` are discarded.
    pub fn from_span(cols: &CMat, tol: &Tolerance) -> Result<Subspace> {
        let ambient = cols.nrows();
        if cols.ncols() == 0 {
            return Ok(Subspace {
                ambient_dim: ambient,
                basis: zeros(ambient, 0),
            });
        }
        let (u, s, _) = cols
            .svd(true, false)
            .map_err(|e| WqgError::Backend(format!("svd: {e}")))?;
        let u = u.expect("requested");
        let smax = s.iter().cloned().fold(0.0, f64::max);
        let r = if smax == 0.0 {
            0
        } else {
            s.iter().filter(|&&x| x > tol.rank_ratio * smax).count()
        };
        Ok(Subspace {
            ambient_dim: ambient,
            basis: u.slice(ndarray::s![.., ..r]).to_owned(),
        })
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    /// Orthogonal projection of `v` onto the subspace.
    pub fn project(&self, v: &CVec) -> CVec {
        self.basis.dot(&dagger(&self.basis).dot(v))
    }

    /// Distance of `v` from the subspace (max-abs of the orthogonal part).
    pub fn distance(&self, v: &CVec) -> f64 {
        max_abs_vec(&(v - &self.project(v)))
    }

    /// Coordinates of `v` in the orthonormal basis (valid when `v` lies in
    /// the subspace to tolerance).
    pub fn coords(&self, v: &CVec) -> CVec {
        dagger(&self.basis).dot(v)
    }

    /// Largest distance of any basis vector of `other` from `self`.
    pub fn contains_residual(&self, other: &Subspace) -> f64 {
        let mut worst: f64 = 0.0;
        for k in 0..other.dim() {
            worst = worst.max(self.distance(&other.basis.column(k).to_owned()));
        }
        worst
    }

    /// Residual of two subspaces being equal (dimension difference counts as
    /// an immediate failure).
    pub fn equals_residual(&self, other: &Subspace) -> f64 {
        if self.dim() != other.dim() {
            return f64::INFINITY;
        }
        self.contains_residual(other).max(other.contains_residual(self))
    }
}

/// Reduced row echelon form of a real matrix, in place; entries below `tol`
/// are flushed to zero. Returns the pivot columns.
pub fn rref_real(m: &mut Array2<f64>, tol: f64) -> Vec<usize> {
    let (rows, cols) = m.dim();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r >= rows {
            break;
        }
        // partial pivot
        let mut best = r;
        for i in r + 1..rows {
            if m[(i, c)].abs() > m[(best, c)].abs() {
                best = i;
            }
        }
        if m[(best, c)].abs() <= tol {
            continue;
        }
        if best != r {
            for j in 0..cols {
                m.swap((r, j), (best, j));
            }
        }
        let p = m[(r, c)];
        for j in 0..cols {
            m[(r, j)] /= p;
        }
        for i in 0..rows {
            if i != r {
                let f = m[(i, c)];
                if f != 0.0 {
                    for j in 0..cols {
                        let v = m[(r, j)];
                        m[(i, j)] -= f * v;
                    }
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    m.mapv_inplace(|x| if x.abs() <= tol { 0.0 } else { x });
    pivots
}

/// Orthonormal null-space basis of a real matrix (columns).
pub fn real_nullspace(a: &Array2<f64>, tol: &Tolerance) -> Result<Array2<f64>> {
    let cols = a.ncols();
    let (_, s, vt) = a
        .svd(true, true)
        .map_err(|e| WqgError::Backend(format!("real svd: {e}")))?;
    let vt = vt.expect("requested");
    let smax = s.iter().cloned().fold(0.0, f64::max);
    let r = if smax == 0.0 {
        0
    } else {
        s.iter().filter(|&&x| x > tol.rank_ratio * smax).count()
    };
    let mut basis = Array2::zeros((cols, cols - r));
    for (k, row) in (r..cols).enumerate() {
        for j in 0..cols {
            basis[(j, k)] = vt[(row, j)];
        }
    }
    Ok(basis)
}
