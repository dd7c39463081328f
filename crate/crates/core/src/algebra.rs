//! Finite-dimensional *-algebras over ℂ presented by structure constants.
//!
//! An element is a coefficient vector against the presentation basis; a linear
//! functional is a coefficient covector applied by the plain (bilinear) dot
//! product. All operations are pure functions over immutable presentations.

use ndarray::Array3;

use crate::linalg::{
    self, cr, dagger, eye, kron, max_abs, max_abs_vec, mat_dist, unvec, vec_dist, zeros, zvec,
    CMat, CVec, C,
};
use crate::report::VerificationReport;
use crate::tol::Tolerance;
use crate::{Result, Tolerance as Tol, WqgError};

/// A finite-dimensional unital *-algebra by structure constants.
///
/// `mult[(i,j,k)]` is the coefficient of `e_k` in `e_i · e_j`; column `i` of
/// `star` holds the coefficients of `e_i^*`, so `(Σ a_i e_i)^* = Σ conj(a_i) ·
/// star.column(i)`; `unit` is the coefficient vector of the multiplicative
/// identity.
#[derive(Debug, Clone)]
pub struct AlgebraPresentation {
    pub name: String,
    pub dim: usize,
    pub labels: Vec<String>,
    pub mult: Array3<C>,
    pub star: CMat,
    pub unit: CVec,
}

/// Gram data of a linear functional φ:
/// `f[(i,j)] = φ(e_i e_j)` and `g[(i,j)] = φ(e_i^* e_j)`, so the GNS
/// sesquilinear form is `<x,y> = φ(y^* x) = y† g x`.
#[derive(Debug, Clone)]
pub struct FunctionalGram {
    pub f: CMat,
    pub g: CMat,
    pub positive: bool,
    pub faithful: bool,
}

/// Apply a linear functional (bilinear dot, no conjugation).
pub fn apply_functional(f: &CVec, x: &CVec) -> C {
    f.dot(x)
}

impl AlgebraPresentation {
    pub fn new(
        name: impl Into<String>,
        labels: Vec<String>,
        mult: Array3<C>,
        star: CMat,
        unit: CVec,
    ) -> Result<Self> {
        let dim = labels.len();
        if mult.dim() != (dim, dim, dim) {
            return Err(WqgError::DimensionMismatch(format!(
                "mult tensor is {:?}, expected ({dim},{dim},{dim})",
                mult.dim()
            )));
        }
        if star.dim() != (dim, dim) || unit.len() != dim {
            return Err(WqgError::DimensionMismatch(
                "star matrix or unit vector does not match dim".into(),
            ));
        }
        let finite = mult.iter().chain(star.iter()).chain(unit.iter());
        for v in finite {
            if !v.re.is_finite() || !v.im.is_finite() {
                return Err(WqgError::NonFiniteNumber("algebra presentation".into()));
            }
        }
        Ok(AlgebraPresentation {
            name: name.into(),
            dim,
            labels,
            mult,
            star,
            unit,
        })
    }

    /// Coefficients of `e_i · e_j`.
    pub fn basis_product(&self, i: usize, j: usize) -> CVec {
        let mut out = zvec(self.dim);
        for k in 0..self.dim {
            out[k] = self.mult[(i, j, k)];
        }
        out
    }

    fn check_len(&self, v: &CVec, what: &str) -> Result<()> {
        if v.len() != self.dim {
            return Err(WqgError::AlgebraMismatch(format!(
                "{what}: element has length {}, algebra `{}` has dim {}",
                v.len(),
                self.name,
                self.dim
            )));
        }
        Ok(())
    }

    /// Product of two elements.
    pub fn multiply(&self, a: &CVec, b: &CVec) -> Result<CVec> {
        self.check_len(a, "multiply lhs")?;
        self.check_len(b, "multiply rhs")?;
        Ok(self.left_mult(a).dot(b))
    }

    /// Involution of an element.
    pub fn star_of(&self, a: &CVec) -> CVec {
        self.star.dot(&linalg::conj_vec(a))
    }

    /// Matrix of left multiplication by `a` on coefficient vectors.
    pub fn left_mult(&self, a: &CVec) -> CMat {
        let n = self.dim;
        let mut l = zeros(n, n);
        for i in 0..n {
            if a[i] == cr(0.0) {
                continue;
            }
            for j in 0..n {
                for k in 0..n {
                    let m = self.mult[(i, j, k)];
                    if m != cr(0.0) {
                        l[(k, j)] += a[i] * m;
                    }
                }
            }
        }
        l
    }

    /// Matrix of right multiplication by `b`.
    pub fn right_mult(&self, b: &CVec) -> CMat {
        let n = self.dim;
        let mut r = zeros(n, n);
        for j in 0..n {
            if b[j] == cr(0.0) {
                continue;
            }
            for i in 0..n {
                for k in 0..n {
                    let m = self.mult[(i, j, k)];
                    if m != cr(0.0) {
                        r[(k, i)] += b[j] * m;
                    }
                }
            }
        }
        r
    }

    /// Two-sided inverse of an element, when it exists.
    pub fn element_inverse(&self, a: &CVec, tol: &Tol) -> Result<CVec> {
        let l = self.left_mult(a);
        let linv = linalg::inv_checked(&l, tol, "element inverse")?;
        let inv = linv.dot(&self.unit);
        let left_res = vec_dist(&self.multiply(&inv, a)?, &self.unit);
        if left_res > tol.abs_residual {
            return Err(WqgError::NotFaithful(format!(
                "element has a right inverse but no two-sided inverse (residual {left_res:.3e})"
            )));
        }
        Ok(inv)
    }

    /// Named residuals for the algebra axioms.
    pub fn validate(&self, tol: &Tolerance) -> VerificationReport {
        let mut rep = VerificationReport::new();
        let n = self.dim;

        let mut assoc: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                let ij = self.basis_product(i, j);
                let lij = self.left_mult(&ij);
                for k in 0..n {
                    let jk = self.basis_product(j, k);
                    let mut ek = zvec(n);
                    ek[k] = cr(1.0);
                    let lhs = lij.dot(&ek);
                    let mut ei = zvec(n);
                    ei[i] = cr(1.0);
                    let rhs = self.left_mult(&ei).dot(&jk);
                    assoc = assoc.max(vec_dist(&lhs, &rhs));
                }
            }
        }
        rep.check("associativity", assoc, tol.abs_residual);

        let lu = self.left_mult(&self.unit);
        let ru = self.right_mult(&self.unit);
        let unit_res = mat_dist(&lu, &eye(n)).max(mat_dist(&ru, &eye(n)));
        rep.check("unit", unit_res, tol.abs_residual);

        let invol = mat_dist(&self.star.dot(&linalg::conj_mat(&self.star)), &eye(n));
        rep.check("star_involutive", invol, tol.abs_residual);

        let mut antimult: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                let mut ei = zvec(n);
                ei[i] = cr(1.0);
                let mut ej = zvec(n);
                ej[j] = cr(1.0);
                let lhs = self.star_of(&self.basis_product(i, j));
                let rhs = self
                    .multiply(&self.star_of(&ej), &self.star_of(&ei))
                    .expect("dims");
                antimult = antimult.max(vec_dist(&lhs, &rhs));
            }
        }
        rep.check("star_antimultiplicative", antimult, tol.abs_residual);

        // non-degeneracy: a ↦ L_a and a ↦ R_a injective
        for (name, which) in [("nondegenerate_left", 0), ("nondegenerate_right", 1)] {
            let mut stacked = zeros(n * n, n);
            for i in 0..n {
                let mut ei = zvec(n);
                ei[i] = cr(1.0);
                let m = if which == 0 {
                    self.left_mult(&ei)
                } else {
                    self.right_mult(&ei)
                };
                let v = linalg::vec_of(&m);
                for r in 0..n * n {
                    stacked[(r, i)] = v[r];
                }
            }
            match linalg::rank(&stacked, tol) {
                Ok(r) if r == n => {
                    rep.check(name, 0.0, tol.abs_residual);
                }
                Ok(r) => {
                    rep.check(name, (n - r) as f64, tol.abs_residual)
                        .with_detail(format!("regular representation rank {r} < {n}"));
                }
                Err(e) => {
                    rep.fail(name, e.to_string());
                }
            }
        }
        rep
    }

    /// Tensor product presentation with index order `(i1,i2) ↦ i1·n2 + i2`.
    pub fn tensor(&self, other: &AlgebraPresentation) -> AlgebraPresentation {
        let (n1, n2) = (self.dim, other.dim);
        let n = n1 * n2;
        let mut mult = Array3::zeros((n, n, n));
        for i1 in 0..n1 {
            for j1 in 0..n1 {
                for k1 in 0..n1 {
                    let m1 = self.mult[(i1, j1, k1)];
                    if m1 == cr(0.0) {
                        continue;
                    }
                    for i2 in 0..n2 {
                        for j2 in 0..n2 {
                            for k2 in 0..n2 {
                                let m2 = other.mult[(i2, j2, k2)];
                                if m2 != cr(0.0) {
                                    mult[(i1 * n2 + i2, j1 * n2 + j2, k1 * n2 + k2)] = m1 * m2;
                                }
                            }
                        }
                    }
                }
            }
        }
        let star = kron(&self.star, &other.star);
        let unit = linalg::kron_vec(&self.unit, &other.unit);
        let mut labels = Vec::with_capacity(n);
        for l1 in &self.labels {
            for l2 in &other.labels {
                labels.push(format!("{l1}(x){l2}"));
            }
        }
        AlgebraPresentation {
            name: format!("{}(x){}", self.name, other.name),
            dim: n,
            labels,
            mult,
            star,
            unit,
        }
    }

    /// Direct sum presentation, first summand indices first.
    pub fn direct_sum(&self, other: &AlgebraPresentation) -> AlgebraPresentation {
        let (n1, n2) = (self.dim, other.dim);
        let n = n1 + n2;
        let mut mult = Array3::zeros((n, n, n));
        for i in 0..n1 {
            for j in 0..n1 {
                for k in 0..n1 {
                    mult[(i, j, k)] = self.mult[(i, j, k)];
                }
            }
        }
        for i in 0..n2 {
            for j in 0..n2 {
                for k in 0..n2 {
                    mult[(n1 + i, n1 + j, n1 + k)] = other.mult[(i, j, k)];
                }
            }
        }
        let mut star = zeros(n, n);
        for i in 0..n1 {
            for j in 0..n1 {
                star[(i, j)] = self.star[(i, j)];
            }
        }
        for i in 0..n2 {
            for j in 0..n2 {
                star[(n1 + i, n1 + j)] = other.star[(i, j)];
            }
        }
        let mut unit = zvec(n);
        for i in 0..n1 {
            unit[i] = self.unit[i];
        }
        for i in 0..n2 {
            unit[n1 + i] = other.unit[i];
        }
        let mut labels = Vec::with_capacity(n);
        for l in &self.labels {
            labels.push(format!("L.{l}"));
        }
        for l in &other.labels {
            labels.push(format!("R.{l}"));
        }
        AlgebraPresentation {
            name: format!("{}(+){}", self.name, other.name),
            dim: n,
            labels,
            mult,
            star,
            unit,
        }
    }

    /// Gram data `F[(i,j)] = φ(e_i e_j)`, `G[(i,j)] = φ(e_i^* e_j)` with
    /// positivity/faithfulness flags from the spectrum of `G`.
    pub fn functional_gram(&self, phi: &CVec, tol: &Tolerance) -> Result<FunctionalGram> {
        self.check_len(phi, "functional")?;
        let n = self.dim;
        let mut f = zeros(n, n);
        let mut g = zeros(n, n);
        for i in 0..n {
            let mut ei = zvec(n);
            ei[i] = cr(1.0);
            let star_i = self.star_of(&ei);
            for j in 0..n {
                f[(i, j)] = apply_functional(phi, &self.basis_product(i, j));
                let sj = self.multiply(&star_i, &{
                    let mut ej = zvec(n);
                    ej[j] = cr(1.0);
                    ej
                })?;
                g[(i, j)] = apply_functional(phi, &sj);
            }
        }
        let herm = mat_dist(&g, &dagger(&g));
        let scale = max_abs(&g).max(1.0);
        let (positive, faithful) = if herm > tol.abs_residual.max(1e-12 * scale) {
            (false, false)
        } else {
            let (vals, _) = linalg::eigh_hermitian(&g)?;
            let (lo, hi) = (vals[0], vals[vals.len() - 1]);
            let positive = lo >= -tol.pd_ratio * scale;
            let faithful = positive && hi > 0.0 && lo > tol.pd_ratio * hi;
            (positive, faithful)
        };
        Ok(FunctionalGram {
            f,
            g,
            positive,
            faithful,
        })
    }

    // ------------------------------------------------------------------
    // Tensor-square element arithmetic (A ⊗ A without materializing the
    // n²-dimensional presentation's structure tensor).
    // ------------------------------------------------------------------

    /// Product of two elements of `A ⊗ A` given as length-`n²` vectors.
    pub fn mult2(&self, u: &CVec, v: &CVec) -> CVec {
        let n = self.dim;
        debug_assert_eq!(u.len(), n * n);
        debug_assert_eq!(v.len(), n * n);
        let vm = unvec(v, n, n);
        let mut out = zeros(n, n);
        for i in 0..n {
            let mut ei = zvec(n);
            ei[i] = cr(1.0);
            let li = self.left_mult(&ei);
            let mut row_used = false;
            for j in 0..n {
                if u[i * n + j] != cr(0.0) {
                    row_used = true;
                    break;
                }
            }
            if !row_used {
                continue;
            }
            let livm = li.dot(&vm);
            for j in 0..n {
                let coeff = u[i * n + j];
                if coeff == cr(0.0) {
                    continue;
                }
                let mut ej = zvec(n);
                ej[j] = cr(1.0);
                let lj = self.left_mult(&ej);
                let term = livm.dot(&lj.t());
                out = out + term.mapv(|x| x * coeff);
            }
        }
        linalg::vec_of(&out)
    }

    /// Involution on `A ⊗ A`: `(x⊗y)^* = x^*⊗y^*`.
    pub fn star2(&self, u: &CVec) -> CVec {
        kron(&self.star, &self.star).dot(&linalg::conj_vec(u))
    }

    /// Unit of `A ⊗ A`.
    pub fn unit2(&self) -> CVec {
        linalg::kron_vec(&self.unit, &self.unit)
    }

    /// `(f ⊗ id)(u)` for `u ∈ A⊗A`.
    pub fn contract_first(&self, f: &CVec, u: &CVec) -> CVec {
        let n = self.dim;
        let um = unvec(u, n, n);
        um.t().dot(f)
    }

    /// `(id ⊗ f)(u)` for `u ∈ A⊗A`.
    pub fn contract_second(&self, f: &CVec, u: &CVec) -> CVec {
        let n = self.dim;
        let um = unvec(u, n, n);
        um.dot(f)
    }

    /// `(f ⊗ g)(u)`.
    pub fn contract_both(&self, f: &CVec, g: &CVec, u: &CVec) -> C {
        apply_functional(g, &self.contract_first(f, u))
    }
}

/// Residual of `x` lying in the span of the columns of `basis` (orthonormal).
pub fn span_distance(basis: &CMat, x: &CVec) -> f64 {
    let proj = basis.dot(&dagger(basis).dot(x));
    max_abs_vec(&(x - &proj))
}
