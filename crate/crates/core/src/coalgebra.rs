//! Comultiplication validation, the canonical idempotent `E = Δ(1)`, its leg
//! subalgebras `B` and `C`, the leg anti-isomorphisms `S_B`, `S_C`, the
//! distinguished functionals `ν`, `μ`, and the counit.

use crate::algebra::{apply_functional, span_distance, AlgebraPresentation};
use crate::linalg::{
    self, cr, dagger, flip_matrix, kron, kron_vec, unvec, vec_dist, zeros, zvec, CMat, CVec,
    Subspace,
};
use crate::report::VerificationReport;
use crate::tol::Tolerance;
use crate::{Result, WqgError};

/// A comultiplication `Δ: A → A⊗A` stored as the `n²×n` matrix with
/// `Δ(e_k) = Σ_{i,j} delta[(i·n+j, k)] e_i⊗e_j`.
#[derive(Debug, Clone)]
pub struct Comultiplication {
    pub delta: CMat,
}

impl Comultiplication {
    pub fn new(dim: usize, delta: CMat) -> Result<Self> {
        if delta.dim() != (dim * dim, dim) {
            return Err(WqgError::DimensionMismatch(format!(
                "comultiplication matrix is {:?}, expected ({}, {})",
                delta.dim(),
                dim * dim,
                dim
            )));
        }
        Ok(Comultiplication { delta })
    }

    /// `Δx` as a length-`n²` coefficient vector.
    pub fn apply(&self, x: &CVec) -> CVec {
        self.delta.dot(x)
    }

    pub fn of_basis(&self, k: usize) -> CVec {
        self.delta.column(k).to_owned()
    }

    /// `(Δ ⊗ id)(v)` for `v ∈ A⊗A`, a length-`n³` vector.
    pub fn extend_left(&self, n: usize, v: &CVec) -> CVec {
        let mut out = zvec(n * n * n);
        for i in 0..n {
            let di = self.of_basis(i);
            for j in 0..n {
                let coeff = v[i * n + j];
                if coeff == cr(0.0) {
                    continue;
                }
                for ab in 0..n * n {
                    if di[ab] != cr(0.0) {
                        out[ab * n + j] += coeff * di[ab];
                    }
                }
            }
        }
        out
    }

    /// `(id ⊗ Δ)(v)` for `v ∈ A⊗A`.
    pub fn extend_right(&self, n: usize, v: &CVec) -> CVec {
        let mut out = zvec(n * n * n);
        for i in 0..n {
            for j in 0..n {
                let coeff = v[i * n + j];
                if coeff == cr(0.0) {
                    continue;
                }
                let dj = self.of_basis(j);
                for ab in 0..n * n {
                    if dj[ab] != cr(0.0) {
                        out[i * n * n + ab] += coeff * dj[ab];
                    }
                }
            }
        }
        out
    }
}

/// Leg data of the canonical idempotent: orthonormal bases of the two leg
/// subalgebras and the `n×n` reshape of `E`.
#[derive(Debug, Clone)]
pub struct LegData {
    pub b: Subspace,
    pub c: Subspace,
    pub e_mat: CMat,
}

/// Leg anti-isomorphisms stored as `n×n` coefficient-space maps which act as
/// `S_B: B → C` (resp. `S_C: C → B`) and annihilate the orthogonal complement
/// of their leg.
#[derive(Debug, Clone)]
pub struct LegAntipodes {
    pub s_b: CMat,
    pub s_b_inv: CMat,
    pub s_c: CMat,
    pub s_c_inv: CMat,
}

/// Residuals for the comultiplication axioms. Check order: coassociativity,
/// homomorphism, star compatibility, fullness of the two legs.
pub fn validate_comultiplication(
    p: &AlgebraPresentation,
    dl: &Comultiplication,
    tol: &Tolerance,
) -> VerificationReport {
    let mut rep = VerificationReport::new();
    let n = p.dim;

    let mut coassoc: f64 = 0.0;
    for k in 0..n {
        let dk = dl.of_basis(k);
        let lhs = dl.extend_left(n, &dk);
        let rhs = dl.extend_right(n, &dk);
        coassoc = coassoc.max(vec_dist(&lhs, &rhs));
    }
    rep.check("coassociativity", coassoc, tol.abs_residual);

    let mut hom: f64 = 0.0;
    for i in 0..n {
        let di = dl.of_basis(i);
        for j in 0..n {
            let dj = dl.of_basis(j);
            let prod = p.mult2(&di, &dj);
            let dij = dl.apply(&p.basis_product(i, j));
            hom = hom.max(vec_dist(&prod, &dij));
        }
    }
    rep.check("comult_homomorphism", hom, tol.abs_residual);

    let mut star_res: f64 = 0.0;
    for k in 0..n {
        let mut ek = zvec(n);
        ek[k] = cr(1.0);
        let lhs = dl.apply(&p.star_of(&ek));
        let rhs = p.star2(&dl.of_basis(k));
        star_res = star_res.max(vec_dist(&lhs, &rhs));
    }
    rep.check("comult_star", star_res, tol.abs_residual);

    // fullness: both leg unfoldings of the Δ tensor have full rank
    let mut first = zeros(n, n * n);
    let mut second = zeros(n, n * n);
    for k in 0..n {
        for a in 0..n {
            for b in 0..n {
                first[(a, b * n + k)] = dl.delta[(a * n + b, k)];
                second[(b, a * n + k)] = dl.delta[(a * n + b, k)];
            }
        }
    }
    for (name, m) in [("fullness_left", &first), ("fullness_right", &second)] {
        match linalg::rank(m, tol) {
            Ok(r) if r == n => {
                rep.check(name, 0.0, tol.abs_residual);
            }
            Ok(r) => {
                rep.check(name, (n - r) as f64, tol.abs_residual)
                    .with_detail(format!("leg span rank {r} < {n}"));
            }
            Err(e) => {
                rep.fail(name, e.to_string());
            }
        }
    }
    rep
}

/// `E = Δ(1)` together with the canonical-idempotent residuals: self-adjoint,
/// idempotent, acts as a unit on `Δ(A)` from both sides, and the weak
/// comultiplicativity chain
/// `(id⊗Δ)(E) = (E⊗1)(1⊗E) = (1⊗E)(E⊗1) = (Δ⊗id)(E)`.
pub fn compute_canonical_idempotent(
    p: &AlgebraPresentation,
    dl: &Comultiplication,
    tol: &Tolerance,
) -> (CVec, VerificationReport) {
    let mut rep = VerificationReport::new();
    let n = p.dim;
    let e = dl.apply(&p.unit);

    rep.check(
        "idempotent_selfadjoint",
        vec_dist(&p.star2(&e), &e),
        tol.abs_residual,
    );
    rep.check(
        "idempotent_squared",
        vec_dist(&p.mult2(&e, &e), &e),
        tol.abs_residual,
    );

    let mut left: f64 = 0.0;
    let mut right: f64 = 0.0;
    for k in 0..n {
        let dk = dl.of_basis(k);
        left = left.max(vec_dist(&p.mult2(&e, &dk), &dk));
        right = right.max(vec_dist(&p.mult2(&dk, &e), &dk));
    }
    rep.check("idempotent_unit_left", left, tol.abs_residual);
    rep.check("idempotent_unit_right", right, tol.abs_residual);

    // (E⊗1)(1⊗E) = Σ E_ij E_kl e_i⊗(e_j e_k)⊗e_l, and the reverse order
    let mut e1_1e = zvec(n * n * n);
    let mut onee_e1 = zvec(n * n * n);
    for i in 0..n {
        for j in 0..n {
            let eij = e[i * n + j];
            if eij == cr(0.0) {
                continue;
            }
            for k in 0..n {
                for l in 0..n {
                    let ekl = e[k * n + l];
                    if ekl == cr(0.0) {
                        continue;
                    }
                    let coeff = eij * ekl;
                    let jk = p.basis_product(j, k);
                    for m in 0..n {
                        if jk[m] != cr(0.0) {
                            e1_1e[(i * n + m) * n + l] += coeff * jk[m];
                        }
                    }
                    let il = p.basis_product(i, l);
                    for m in 0..n {
                        if il[m] != cr(0.0) {
                            onee_e1[(k * n + m) * n + j] += coeff * il[m];
                        }
                    }
                }
            }
        }
    }
    let id_delta_e = dl.extend_right(n, &e);
    let delta_id_e = dl.extend_left(n, &e);
    rep.check(
        "weak_comultiplicativity_left",
        vec_dist(&id_delta_e, &e1_1e),
        tol.abs_residual,
    );
    rep.check(
        "weak_comultiplicativity_flip",
        vec_dist(&e1_1e, &onee_e1),
        tol.abs_residual,
    );
    rep.check(
        "weak_comultiplicativity_right",
        vec_dist(&delta_id_e, &e1_1e),
        tol.abs_residual,
    );

    (e, rep)
}

/// Extract the leg subalgebras of `E`: `B` spans the first-leg slices
/// (columns of the `n×n` reshape), `C` spans the second-leg slices (rows).
/// Verifies each leg is a unital *-subalgebra, that `E ∈ B⊗C`, and that the
/// comultiplication acts on the legs by `Δx = E(1⊗x) = (1⊗x)E` for `x ∈ B`
/// and `Δy = (y⊗1)E = E(y⊗1)` for `y ∈ C`.
pub fn extract_legs(
    p: &AlgebraPresentation,
    dl: &Comultiplication,
    e: &CVec,
    tol: &Tolerance,
) -> Result<(LegData, VerificationReport)> {
    let mut rep = VerificationReport::new();
    let n = p.dim;
    let e_mat = unvec(e, n, n);
    let b = Subspace::from_span(&e_mat, tol)?;
    let c = Subspace::from_span(&e_mat.t().to_owned(), tol)?;
    rep.info(
        "leg_dimensions",
        format!("dim B = {}, dim C = {}", b.dim(), c.dim()),
    );
    if b.dim() != c.dim() || b.dim() == 0 {
        rep.fail(
            "leg_rank",
            format!("leg ranks {} and {} unusable", b.dim(), c.dim()),
        );
        return Ok((LegData { b, c, e_mat }, rep));
    }

    for (name, leg) in [("b", &b), ("c", &c)] {
        let mut closed_mult: f64 = 0.0;
        let mut closed_star: f64 = 0.0;
        for k in 0..leg.dim() {
            let bk = leg.basis.column(k).to_owned();
            closed_star = closed_star.max(leg.distance(&p.star_of(&bk)));
            for l in 0..leg.dim() {
                let bl = leg.basis.column(l).to_owned();
                closed_mult = closed_mult.max(leg.distance(&p.multiply(&bk, &bl)?));
            }
        }
        rep.check(format!("leg_{name}_unital"), leg.distance(&p.unit), tol.abs_residual);
        rep.check(format!("leg_{name}_closed_mult"), closed_mult, tol.abs_residual);
        rep.check(format!("leg_{name}_closed_star"), closed_star, tol.abs_residual);
    }

    let bc = kron(&b.basis, &c.basis);
    rep.check("e_in_b_tensor_c", span_distance(&bc, e), tol.abs_residual);

    let mut on_b: f64 = 0.0;
    for k in 0..b.dim() {
        let x = b.basis.column(k).to_owned();
        let dx = dl.apply(&x);
        let one_x = kron_vec(&p.unit, &x);
        on_b = on_b.max(vec_dist(&dx, &p.mult2(e, &one_x)));
        on_b = on_b.max(vec_dist(&dx, &p.mult2(&one_x, e)));
    }
    rep.check("delta_on_b", on_b, tol.abs_residual);

    let mut on_c: f64 = 0.0;
    for k in 0..c.dim() {
        let y = c.basis.column(k).to_owned();
        let dy = dl.apply(&y);
        let y_one = kron_vec(&y, &p.unit);
        on_c = on_c.max(vec_dist(&dy, &p.mult2(&y_one, e)));
        on_c = on_c.max(vec_dist(&dy, &p.mult2(e, &y_one)));
    }
    rep.check("delta_on_c", on_c, tol.abs_residual);

    Ok((LegData { b, c, e_mat }, rep))
}

/// Solve `E(b⊗1) = E(1⊗S_B(b))` per basis vector of `B` (and the symmetric
/// system for `S_C`), verify regularity `E(B⊗1) = E(1⊗C)` as a subspace
/// equality, `(S_B⊗S_C)(E) = ςE`, and the involutive twists
/// `S_C(S_B(b)^*)^* = b`, `S_B(S_C(c)^*)^* = c`.
pub fn solve_leg_antipodes(
    p: &AlgebraPresentation,
    e: &CVec,
    legs: &LegData,
    tol: &Tolerance,
) -> Result<(LegAntipodes, VerificationReport)> {
    let mut rep = VerificationReport::new();
    let n = p.dim;
    let (db, dc) = (legs.b.dim(), legs.c.dim());

    // columns E(1⊗c_k) and E(b_k⊗1) and their mirror-side versions
    let mut e_one_c = zeros(n * n, dc);
    for k in 0..dc {
        let ck = legs.c.basis.column(k).to_owned();
        let col = p.mult2(e, &kron_vec(&p.unit, &ck));
        for r in 0..n * n {
            e_one_c[(r, k)] = col[r];
        }
    }
    let mut b_one_e = zeros(n * n, db);
    for k in 0..db {
        let bk = legs.b.basis.column(k).to_owned();
        let col = p.mult2(&kron_vec(&bk, &p.unit), e);
        for r in 0..n * n {
            b_one_e[(r, k)] = col[r];
        }
    }

    // uniqueness of the solves: full column rank of the coefficient matrices
    for (name, m, d) in [("s_b", &e_one_c, dc), ("s_c", &b_one_e, db)] {
        let r = linalg::rank(m, tol)?;
        if r < d {
            rep.fail(
                format!("{name}_solve_unique"),
                format!("solution space has rank {r} < {d}"),
            );
        } else {
            rep.check(format!("{name}_solve_unique"), 0.0, tol.abs_residual);
        }
    }

    let mut sb_images = zeros(n, db);
    let mut worst_sb: f64 = 0.0;
    for k in 0..db {
        let bk = legs.b.basis.column(k).to_owned();
        let rhs = p.mult2(e, &kron_vec(&bk, &p.unit));
        let (t, res) = linalg::solve_least_squares_vec(&e_one_c, &rhs)?;
        worst_sb = worst_sb.max(res);
        let img = legs.c.basis.dot(&t);
        for r in 0..n {
            sb_images[(r, k)] = img[r];
        }
    }
    rep.check("s_b_solve", worst_sb, tol.abs_residual);

    let mut sc_images = zeros(n, dc);
    let mut worst_sc: f64 = 0.0;
    for k in 0..dc {
        let ck = legs.c.basis.column(k).to_owned();
        let rhs = p.mult2(&kron_vec(&p.unit, &ck), e);
        let (t, res) = linalg::solve_least_squares_vec(&b_one_e, &rhs)?;
        worst_sc = worst_sc.max(res);
        let img = legs.b.basis.dot(&t);
        for r in 0..n {
            sc_images[(r, k)] = img[r];
        }
    }
    rep.check("s_c_solve", worst_sc, tol.abs_residual);

    if rep.first_failure().is_some() {
        return Err(WqgError::AntipodeUnsolvable(
            rep.first_failure().unwrap_or("leg antipode").to_string(),
        ));
    }

    let s_b = sb_images.dot(&dagger(&legs.b.basis));
    let s_c = sc_images.dot(&dagger(&legs.c.basis));
    // inverses on the legs
    let sb_small = dagger(&legs.c.basis).dot(&s_b).dot(&legs.b.basis);
    let sc_small = dagger(&legs.b.basis).dot(&s_c).dot(&legs.c.basis);
    let sb_small_inv = linalg::inv_checked(&sb_small, tol, "S_B restriction")?;
    let sc_small_inv = linalg::inv_checked(&sc_small, tol, "S_C restriction")?;
    let s_b_inv = legs.b.basis.dot(&sb_small_inv).dot(&dagger(&legs.c.basis));
    let s_c_inv = legs.c.basis.dot(&sc_small_inv).dot(&dagger(&legs.b.basis));

    // regularity: E(B⊗1) = E(1⊗C) as subspaces of A⊗A
    let mut e_b_one = zeros(n * n, db);
    for k in 0..db {
        let bk = legs.b.basis.column(k).to_owned();
        let col = p.mult2(e, &kron_vec(&bk, &p.unit));
        for r in 0..n * n {
            e_b_one[(r, k)] = col[r];
        }
    }
    let left = Subspace::from_span(&e_b_one, tol)?;
    let right = Subspace::from_span(&e_one_c, tol)?;
    rep.check("regularity_spans", left.equals_residual(&right), tol.abs_residual);

    // (S_B ⊗ S_C)(E) = ςE
    let flipped = flip_matrix(n).dot(e);
    let mapped = kron(&s_b, &s_c).dot(e);
    rep.check("sb_sc_flip_e", vec_dist(&mapped, &flipped), tol.abs_residual);

    // S_C(S_B(b)^*)^* = b and S_B(S_C(c)^*)^* = c
    let mut twist_b: f64 = 0.0;
    for k in 0..db {
        let bk = legs.b.basis.column(k).to_owned();
        let back = p.star_of(&s_c.dot(&p.star_of(&s_b.dot(&bk))));
        twist_b = twist_b.max(vec_dist(&back, &bk));
    }
    rep.check("sb_twist_involutive", twist_b, tol.abs_residual);
    let mut twist_c: f64 = 0.0;
    for k in 0..dc {
        let ck = legs.c.basis.column(k).to_owned();
        let back = p.star_of(&s_b.dot(&p.star_of(&s_c.dot(&ck))));
        twist_c = twist_c.max(vec_dist(&back, &ck));
    }
    rep.check("sc_twist_involutive", twist_c, tol.abs_residual);

    // anti-homomorphism property on the legs
    let mut antihom: f64 = 0.0;
    for k in 0..db {
        let bk = legs.b.basis.column(k).to_owned();
        for l in 0..db {
            let bl = legs.b.basis.column(l).to_owned();
            let lhs = s_b.dot(&p.multiply(&bk, &bl)?);
            let rhs = p.multiply(&s_b.dot(&bl), &s_b.dot(&bk))?;
            antihom = antihom.max(vec_dist(&lhs, &rhs));
        }
    }
    rep.check("s_b_antihomomorphism", antihom, tol.abs_residual);

    Ok((
        LegAntipodes {
            s_b,
            s_b_inv,
            s_c,
            s_c_inv,
        },
        rep,
    ))
}

/// Distinguished functionals: `ν` on `B` with `(ν⊗id)(E) = 1` and `μ` on `C`
/// with `(id⊗μ)(E) = 1`, both represented as covectors on `A` vanishing on
/// the orthogonal complement of their leg. Verifies positivity and
/// faithfulness on the legs, the weak KMS automorphisms
/// `σ^ν = S_B^{-1}∘S_C^{-1}`, `σ^μ = S_B∘S_C`, and `μ = ν∘S_C`, `ν = μ∘S_B`.
pub fn distinguished_functionals(
    p: &AlgebraPresentation,
    legs: &LegData,
    anti: &LegAntipodes,
    tol: &Tolerance,
) -> Result<(CVec, CVec, VerificationReport)> {
    let mut rep = VerificationReport::new();

    // (ν⊗id)(E) = Ê^T ν; constrain ν to the bilinear annihilator complement
    let nu_coeff = legs.e_mat.t().dot(&linalg::conj_mat(&legs.b.basis));
    let (t, res_nu) = linalg::solve_least_squares_vec(&nu_coeff, &p.unit)?;
    let nu = linalg::conj_mat(&legs.b.basis).dot(&t);
    rep.check("nu_solve", res_nu, tol.abs_residual);

    let mu_coeff = legs.e_mat.dot(&linalg::conj_mat(&legs.c.basis));
    let (s, res_mu) = linalg::solve_least_squares_vec(&mu_coeff, &p.unit)?;
    let mu = linalg::conj_mat(&legs.c.basis).dot(&s);
    rep.check("mu_solve", res_mu, tol.abs_residual);

    // positivity & faithfulness of ν on B and μ on C via leg Gram matrices
    for (name, f, leg) in [("nu", &nu, &legs.b), ("mu", &mu, &legs.c)] {
        let d = leg.dim();
        let mut gram = zeros(d, d);
        for k in 0..d {
            let xk = leg.basis.column(k).to_owned();
            let xk_star = p.star_of(&xk);
            for l in 0..d {
                let xl = leg.basis.column(l).to_owned();
                gram[(k, l)] = apply_functional(f, &p.multiply(&xk_star, &xl)?);
            }
        }
        match linalg::pd_spectrum(&gram, tol) {
            Ok(_) => {
                rep.check(format!("{name}_positive_faithful"), 0.0, tol.abs_residual);
            }
            Err(e) => {
                rep.fail(format!("{name}_positive_faithful"), e.to_string());
            }
        }
    }
    if rep.first_failure().is_some() {
        return Err(WqgError::DistinguishedFunctionalNotPositive(
            rep.first_failure().unwrap_or("base functional").to_string(),
        ));
    }

    // weak KMS: ν(bb') = ν(b' σ^ν(b)) with σ^ν = S_B^{-1} ∘ S_C^{-1}
    let sigma_nu = anti.s_b_inv.dot(&anti.s_c_inv);
    let sigma_mu = anti.s_b.dot(&anti.s_c);
    let mut kms_nu: f64 = 0.0;
    let mut inv_nu: f64 = 0.0;
    for k in 0..legs.b.dim() {
        let bk = legs.b.basis.column(k).to_owned();
        inv_nu = inv_nu
            .max((apply_functional(&nu, &sigma_nu.dot(&bk)) - apply_functional(&nu, &bk)).norm());
        for l in 0..legs.b.dim() {
            let bl = legs.b.basis.column(l).to_owned();
            let lhs = apply_functional(&nu, &p.multiply(&bk, &bl)?);
            let rhs = apply_functional(&nu, &p.multiply(&bl, &sigma_nu.dot(&bk))?);
            kms_nu = kms_nu.max((lhs - rhs).norm());
        }
    }
    rep.check("nu_weak_kms", kms_nu, tol.abs_residual);
    rep.check("nu_sigma_invariant", inv_nu, tol.abs_residual);

    let mut kms_mu: f64 = 0.0;
    let mut inv_mu: f64 = 0.0;
    for k in 0..legs.c.dim() {
        let ck = legs.c.basis.column(k).to_owned();
        inv_mu = inv_mu
            .max((apply_functional(&mu, &sigma_mu.dot(&ck)) - apply_functional(&mu, &ck)).norm());
        for l in 0..legs.c.dim() {
            let cl = legs.c.basis.column(l).to_owned();
            let lhs = apply_functional(&mu, &p.multiply(&ck, &cl)?);
            let rhs = apply_functional(&mu, &p.multiply(&cl, &sigma_mu.dot(&ck))?);
            kms_mu = kms_mu.max((lhs - rhs).norm());
        }
    }
    rep.check("mu_weak_kms", kms_mu, tol.abs_residual);
    rep.check("mu_sigma_invariant", inv_mu, tol.abs_residual);

    // μ = ν∘S_C and ν = μ∘S_B as covectors supported on the legs
    let mu_from_nu = anti.s_c.t().dot(&nu);
    let nu_from_mu = anti.s_b.t().dot(&mu);
    rep.check("mu_eq_nu_sc", vec_dist(&mu_from_nu, &mu), tol.abs_residual);
    rep.check("nu_eq_mu_sb", vec_dist(&nu_from_mu, &nu), tol.abs_residual);

    Ok((nu, mu, rep))
}

/// Solve `(ε⊗id)Δ = id = (id⊗ε)Δ` jointly by least squares.
pub fn compute_counit(
    p: &AlgebraPresentation,
    dl: &Comultiplication,
    tol: &Tolerance,
) -> Result<(CVec, VerificationReport)> {
    let mut rep = VerificationReport::new();
    let n = p.dim;
    // rows (k,j): Σ_i ε_i D[(i,j),k] = δ_{jk};  rows (k,i): Σ_j ε_j D[(i,j),k] = δ_{ik}
    let mut a = zeros(2 * n * n, n);
    let mut b = zvec(2 * n * n);
    for k in 0..n {
        for j in 0..n {
            for i in 0..n {
                a[(k * n + j, i)] = dl.delta[(i * n + j, k)];
            }
        }
        b[k * n + k] = cr(1.0);
        for i in 0..n {
            for j in 0..n {
                a[(n * n + k * n + i, j)] = dl.delta[(i * n + j, k)];
            }
        }
        b[n * n + k * n + k] = cr(1.0);
    }
    let (eps, res) = linalg::solve_least_squares_vec(&a, &b)?;
    rep.check("counit_solve", res, tol.abs_residual);
    if res > tol.abs_residual {
        return Err(WqgError::CounitUnsolvable(format!(
            "joint least squares residual {res:.3e}"
        )));
    }
    Ok((eps, rep))
}

/// Radon–Nikodym on the base: the unique `y ∈ B` with `g(b) = ν(b·y)` for all
/// `b ∈ B`, plus whether `y` is invertible inside `B` (equivalently, whether
/// `g` is faithful on `B`).
pub fn radon_nikodym_on_base(
    p: &AlgebraPresentation,
    legs: &LegData,
    nu: &CVec,
    g: &CVec,
    tol: &Tolerance,
) -> Result<(CVec, bool, VerificationReport)> {
    let mut rep = VerificationReport::new();
    let d = legs.b.dim();
    let mut m = zeros(d, d);
    let mut rhs = zvec(d);
    for k in 0..d {
        let bk = legs.b.basis.column(k).to_owned();
        rhs[k] = apply_functional(g, &bk);
        let lk = p.left_mult(&bk);
        for l in 0..d {
            let bl = legs.b.basis.column(l).to_owned();
            m[(k, l)] = apply_functional(nu, &lk.dot(&bl));
        }
    }
    let (t, res) = linalg::solve_least_squares_vec(&m, &rhs)?;
    let y = legs.b.basis.dot(&t);
    rep.check("radon_nikodym_solve", res, tol.abs_residual);

    // invertibility of y within B: left multiplication by y restricted to B
    let ly = dagger(&legs.b.basis)
        .dot(&p.left_mult(&y))
        .dot(&legs.b.basis);
    let invertible = linalg::inv_checked(&ly, tol, "restricted left multiplication").is_ok();
    rep.info(
        "radon_nikodym_invertible",
        if invertible {
            "y invertible in B (g faithful)"
        } else {
            "y not invertible in B (g not faithful)"
        },
    );
    Ok((y, invertible, rep))
}
