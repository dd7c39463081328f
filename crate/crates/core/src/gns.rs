//! GNS spaces and the operator side of the pipeline: the bridge unitary
//! `Ĵ_B`, the embedding maps of the base algebras into `B(H)`, the
//! multiplicative partial isometry `W`, the modular operators `T`, `∇`, `J`,
//! the `δ`-twisted operators `Z`, `P`, the commutation suite, and the final
//! quantum-groupoid certificate.
//!
//! Every operator is materialized in orthonormal coordinates (via the
//! Cholesky frame of the relevant Gram matrix), so adjoints are plain
//! conjugate-transposes and antilinear adjoints are plain transposes.

use crate::algebra::{apply_functional, AlgebraPresentation};
use crate::coalgebra::{Comultiplication, LegAntipodes, LegData};
use crate::integrals::IntegralBundle;
use crate::linalg::{
    self, c, cr, dagger, eye, flip_matrix, kron, kron_vec, vec_dist, zvec, AntilinearOp, CMat,
    CVec, Frame, Subspace,
};
use crate::report::VerificationReport;
use crate::tol::Tolerance;
use crate::{Result, WqgError};

/// Analytic sample points for the one-parameter group checks.
pub const SAMPLED_T: [f64; 3] = [-1.0, 0.37, 2.0];

/// GNS space of a faithful positive functional: Gram matrix, orthonormal
/// frame, and the left-multiplication representation in orthonormal
/// coordinates.
#[derive(Debug, Clone)]
pub struct GnsSpace {
    pub gram: CMat,
    pub frame: Frame,
    pub dim: usize,
}

impl GnsSpace {
    /// `Λ(x)` in orthonormal coordinates.
    pub fn lambda(&self, x: &CVec) -> CVec {
        self.frame.coords(x)
    }

    /// Coefficient vector of the element with the given `Λ`-coordinates.
    pub fn coeffs(&self, u: &CVec) -> CVec {
        self.frame.coeffs(u)
    }

    /// Left multiplication by `x` as an operator on the GNS space.
    pub fn rep(&self, p: &AlgebraPresentation, x: &CVec) -> CMat {
        self.frame.conjugate(&p.left_mult(x))
    }

    /// Right multiplication by `x` as an operator on the GNS space.
    pub fn rep_right(&self, p: &AlgebraPresentation, x: &CVec) -> CMat {
        self.frame.conjugate(&p.right_mult(x))
    }
}

/// Build the GNS space of `φ` and verify the representation axioms
/// (`rep` is a unital *-homomorphism and `rep(x)Λ(y) = Λ(xy)`), which also
/// certifies `Λ(A)` as a left Hilbert algebra at finite dimension.
pub fn build_gns(
    p: &AlgebraPresentation,
    phi: &CVec,
    tol: &Tolerance,
) -> Result<(GnsSpace, VerificationReport)> {
    let mut rep = VerificationReport::new();
    let fg = p.functional_gram(phi, tol)?;
    let frame = linalg::gram_frame(&fg.g, tol)?;
    let gns = GnsSpace {
        gram: fg.g,
        frame,
        dim: p.dim,
    };
    rep.info(
        "gram_condition",
        format!("cond(G) = {:.3e}", gns.frame.cond),
    );
    let n = p.dim;
    let mut hom: f64 = 0.0;
    let mut star: f64 = 0.0;
    let mut module: f64 = 0.0;
    for i in 0..n {
        let mut ei = zvec(n);
        ei[i] = cr(1.0);
        let ri = gns.rep(p, &ei);
        star = star.max(linalg::mat_dist(
            &gns.rep(p, &p.star_of(&ei)),
            &dagger(&ri),
        ));
        for j in 0..n {
            let mut ej = zvec(n);
            ej[j] = cr(1.0);
            let rj = gns.rep(p, &ej);
            hom = hom.max(linalg::mat_dist(
                &ri.dot(&rj),
                &gns.rep(p, &p.basis_product(i, j)),
            ));
            module = module.max(vec_dist(
                &ri.dot(&gns.lambda(&ej)),
                &gns.lambda(&p.basis_product(i, j)),
            ));
        }
    }
    rep.check("gns_homomorphism", hom, tol.abs_residual);
    rep.check("gns_star_representation", star, tol.abs_residual);
    rep.check("gns_module_action", module, tol.abs_residual);
    rep.check(
        "gns_unital",
        linalg::mat_dist(&gns.rep(p, &p.unit), &eye(n)),
        tol.abs_residual,
    );
    Ok((gns, rep))
}

/// A base (leg) algebra presented on its own orthonormal basis, with the
/// distinguished functional and its GNS space.
#[derive(Debug, Clone)]
pub struct BaseAlgebra {
    pub pres: AlgebraPresentation,
    /// `n×d` orthonormal embedding of the leg into the ambient algebra.
    pub basis: CMat,
    /// The distinguished functional in leg coordinates.
    pub func: CVec,
    pub gns: GnsSpace,
    /// Modular operator of the distinguished functional on the leg.
    pub nabla: CMat,
}

impl BaseAlgebra {
    /// Leg coordinates of an ambient element lying in the leg span.
    pub fn to_leg(&self, x: &CVec) -> CVec {
        dagger(&self.basis).dot(x)
    }

    /// Ambient element of a leg-coordinate vector.
    pub fn to_ambient(&self, t: &CVec) -> CVec {
        self.basis.dot(t)
    }

    /// Lift a leg-coordinate operator to the ambient coefficient space,
    /// acting as zero on the orthogonal complement of the leg.
    pub fn lift(&self, m: &CMat) -> CMat {
        self.basis.dot(m).dot(&dagger(&self.basis))
    }

    /// The element map of the analytic modular flow at parameter `z`
    /// (`Λ(σ_z(x)) = ∇^{iz} Λ(x)`), as a matrix on leg coordinates.
    pub fn sigma_z(&self, z: linalg::C, tol: &Tolerance) -> Result<CMat> {
        let pw = linalg::hermitian_power(&self.nabla, c(0.0, 1.0) * z, tol)?;
        Ok(self.gns.frame.unconjugate(&pw))
    }

    /// Same map lifted to the ambient coefficient space.
    pub fn sigma_z_ambient(&self, z: linalg::C, tol: &Tolerance) -> Result<CMat> {
        Ok(self.lift(&self.sigma_z(z, tol)?))
    }
}

/// Antilinear kernel of the closure of `Λ(x) ↦ Λ(x^*)` in orthonormal
/// coordinates: `K = L† · Σ* · conj((L†)^{-1})`.
fn involution_kernel(p: &AlgebraPresentation, gns: &GnsSpace) -> AntilinearOp {
    let lh = dagger(&gns.frame.l);
    let lh_inv = dagger(&gns.frame.l_inv);
    AntilinearOp::new(lh.dot(&p.star).dot(&linalg::conj_mat(&lh_inv)))
}

/// Build a leg as a standalone algebra with its distinguished functional.
pub fn build_base(
    p: &AlgebraPresentation,
    leg: &Subspace,
    func_ambient: &CVec,
    name: &str,
    tol: &Tolerance,
) -> Result<BaseAlgebra> {
    let d = leg.dim();
    let n = p.dim;
    let mut mult = ndarray::Array3::zeros((d, d, d));
    for k in 0..d {
        let bk = leg.basis.column(k).to_owned();
        for l in 0..d {
            let bl = leg.basis.column(l).to_owned();
            let prod = p.multiply(&bk, &bl)?;
            if leg.distance(&prod) > tol.abs_residual {
                return Err(WqgError::LegNotSubalgebra(format!(
                    "{name}: product of basis elements {k},{l} leaves the leg"
                )));
            }
            let coords = leg.coords(&prod);
            for m in 0..d {
                mult[(k, l, m)] = coords[m];
            }
        }
    }
    let mut star = linalg::zeros(d, d);
    for k in 0..d {
        let bk = leg.basis.column(k).to_owned();
        let sk = p.star_of(&bk);
        if leg.distance(&sk) > tol.abs_residual {
            return Err(WqgError::LegNotSubalgebra(format!(
                "{name}: star of basis element {k} leaves the leg"
            )));
        }
        let coords = leg.coords(&sk);
        for m in 0..d {
            star[(m, k)] = coords[m];
        }
    }
    if leg.distance(&p.unit) > tol.abs_residual {
        return Err(WqgError::LegNotSubalgebra(format!("{name}: unit not in leg")));
    }
    let unit = leg.coords(&p.unit);
    let labels = (0..d).map(|k| format!("{name}{k}")).collect();
    let pres = AlgebraPresentation::new(name, labels, mult, star, unit)?;
    let func = {
        let mut f = zvec(d);
        for k in 0..d {
            f[k] = apply_functional(func_ambient, &leg.basis.column(k).to_owned());
        }
        f
    };
    let (gns, grep) = build_gns(&pres, &func, tol)?;
    if !grep.passed() {
        return Err(WqgError::NotPositiveDefinite(format!(
            "{name}: GNS construction failed: {}",
            grep.first_failure().unwrap_or("unknown")
        )));
    }
    let nabla = involution_kernel(&pres, &gns).star_self();
    linalg::pd_spectrum(&nabla, tol)?;
    let _ = n;
    Ok(BaseAlgebra {
        pres,
        basis: leg.basis.clone(),
        func,
        gns,
        nabla,
    })
}

/// The bridge unitary `Ĵ_B: H_B → H_C`, `Λ_B(x) ↦ Λ_C(S_B(x))`, together with
/// the right representations it induces.
pub fn base_bridge(
    p: &AlgebraPresentation,
    anti: &LegAntipodes,
    base_b: &BaseAlgebra,
    base_c: &BaseAlgebra,
    tol: &Tolerance,
) -> Result<(CMat, VerificationReport)> {
    let mut rep = VerificationReport::new();
    let db = base_b.pres.dim;

    // μ(S_B(b₁)^* S_B(b₂)) = ν(b₁^* b₂) — the isometry identity
    let mut iso: f64 = 0.0;
    for k in 0..db {
        let bk = base_b.basis.column(k).to_owned();
        let sbk = anti.s_b.dot(&bk);
        for l in 0..db {
            let bl = base_b.basis.column(l).to_owned();
            let sbl = anti.s_b.dot(&bl);
            let lhs = {
                // μ(S_B(b_k)^* S_B(b_l)) computed inside the C leg
                let prod = p.multiply(&p.star_of(&sbk), &sbl)?;
                apply_functional(&base_c.func, &base_c.to_leg(&prod))
            };
            let rhs = {
                let prod = p.multiply(&p.star_of(&bk), &bl)?;
                apply_functional(&base_b.func, &base_b.to_leg(&prod))
            };
            iso = iso.max((lhs - rhs).norm());
        }
    }
    rep.check("bridge_isometry_identity", iso, tol.abs_residual);

    // Ĵ_B in orthonormal coordinates
    let sb_leg = dagger(&base_c.basis).dot(&anti.s_b).dot(&base_b.basis);
    let jhat = dagger(&base_c.gns.frame.l)
        .dot(&sb_leg)
        .dot(&dagger(&base_b.gns.frame.l_inv));
    let unitary = linalg::mat_dist(&dagger(&jhat).dot(&jhat), &eye(db));
    rep.check("bridge_unitary", unitary, tol.abs_residual);
    if unitary > tol.abs_residual {
        return Err(WqgError::BridgeNotUnitary(format!("residual {unitary:.3e}")));
    }

    // right representations: π_B^R(b) = Ĵ_B^* π_C(S_B(b)) Ĵ_B acts as
    // Λ_B(x) ↦ Λ_B(xb), and symmetrically for π_C^R
    let mut right_b: f64 = 0.0;
    for k in 0..db {
        let bk = base_b.basis.column(k).to_owned();
        let sbk_leg = base_c.to_leg(&anti.s_b.dot(&bk));
        let via_bridge = dagger(&jhat)
            .dot(&base_c.gns.rep(&base_c.pres, &sbk_leg))
            .dot(&jhat);
        let direct = base_b.gns.rep_right(&base_b.pres, &{
            let mut t = zvec(db);
            t[k] = cr(1.0);
            t
        });
        right_b = right_b.max(linalg::mat_dist(&via_bridge, &direct));
    }
    rep.check("bridge_right_rep_b", right_b, tol.abs_residual);

    let mut right_c: f64 = 0.0;
    for k in 0..base_c.pres.dim {
        let ck = base_c.basis.column(k).to_owned();
        let sbinv_leg = base_b.to_leg(&anti.s_b_inv.dot(&ck));
        let via_bridge = jhat
            .dot(&base_b.gns.rep(&base_b.pres, &sbinv_leg))
            .dot(&dagger(&jhat));
        let direct = base_c.gns.rep_right(&base_c.pres, &{
            let mut t = zvec(base_c.pres.dim);
            t[k] = cr(1.0);
            t
        });
        right_c = right_c.max(linalg::mat_dist(&via_bridge, &direct));
    }
    rep.check("bridge_right_rep_c", right_c, tol.abs_residual);

    Ok((jhat, rep))
}

/// The maps `ρ_C(a): H_C → H`, `Λ_C(y) ↦ Λ(ya)` (and `ρ_B`), with the
/// commutant identity `ρ_C(b)† ρ_C(a) = π_C^R((id⊗φ)(Δ(a·σ(b^*))))` and the
/// norm bounds `‖π(c)‖ ≤ ‖π_C(c)‖`, `‖π(b)‖ ≤ ‖π_B(b)‖`.
#[allow(clippy::too_many_arguments)]
pub fn embed_maps(
    p: &AlgebraPresentation,
    dl: &Comultiplication,
    legs: &LegData,
    bundle: &IntegralBundle,
    gns: &GnsSpace,
    base_b: &BaseAlgebra,
    base_c: &BaseAlgebra,
    tol: &Tolerance,
) -> VerificationReport {
    let mut rep = VerificationReport::new();
    let n = p.dim;

    let rho_c = |a: &CVec| -> CMat {
        dagger(&gns.frame.l)
            .dot(&p.right_mult(a))
            .dot(&base_c.basis)
            .dot(&dagger(&base_c.gns.frame.l_inv))
    };
    let rho_b = |a: &CVec| -> CMat {
        dagger(&gns.frame.l)
            .dot(&p.right_mult(a))
            .dot(&base_b.basis)
            .dot(&dagger(&base_b.gns.frame.l_inv))
    };

    // ρ_C(a) Λ_C(y) = Λ(ya) on basis pairs
    let mut action: f64 = 0.0;
    for a in 0..n {
        let mut ea = zvec(n);
        ea[a] = cr(1.0);
        let ra = rho_c(&ea);
        for k in 0..base_c.pres.dim {
            let ck = base_c.basis.column(k).to_owned();
            let mut t = zvec(base_c.pres.dim);
            t[k] = cr(1.0);
            let lhs = ra.dot(&base_c.gns.lambda(&t));
            let rhs = gns.lambda(&p.multiply(&ck, &ea).expect("dims"));
            action = action.max(vec_dist(&lhs, &rhs));
        }
    }
    rep.check("rho_c_action", action, tol.abs_residual);

    // ρ_C(b)† ρ_C(a) = π_C^R(c̃) with c̃ = (id⊗φ)(Δ(a σ(b^*)))
    let mut commutant: f64 = 0.0;
    let mut membership: f64 = 0.0;
    for a in 0..n {
        let mut ea = zvec(n);
        ea[a] = cr(1.0);
        let ra = rho_c(&ea);
        for b in 0..n {
            let mut eb = zvec(n);
            eb[b] = cr(1.0);
            let rb = rho_c(&eb);
            let w = p
                .multiply(&ea, &bundle.sigma.dot(&p.star_of(&eb)))
                .expect("dims");
            let c_tilde = p.contract_second(&bundle.phi, &dl.apply(&w));
            membership = membership.max(legs.c.distance(&c_tilde));
            let rhs = base_c
                .gns
                .rep_right(&base_c.pres, &base_c.to_leg(&c_tilde));
            commutant = commutant.max(linalg::mat_dist(&dagger(&rb).dot(&ra), &rhs));
        }
    }
    rep.check("rho_c_slice_in_c", membership, tol.abs_residual);
    rep.check("rho_c_commutant_identity", commutant, tol.abs_residual);

    // ρ_B(a) is bounded and acts as Λ_B(x) ↦ Λ(xa)
    let mut action_b: f64 = 0.0;
    for a in 0..n {
        let mut ea = zvec(n);
        ea[a] = cr(1.0);
        let ra = rho_b(&ea);
        for k in 0..base_b.pres.dim {
            let bk = base_b.basis.column(k).to_owned();
            let mut t = zvec(base_b.pres.dim);
            t[k] = cr(1.0);
            let lhs = ra.dot(&base_b.gns.lambda(&t));
            let rhs = gns.lambda(&p.multiply(&bk, &ea).expect("dims"));
            action_b = action_b.max(vec_dist(&lhs, &rhs));
        }
    }
    rep.check("rho_b_action", action_b, tol.abs_residual);

    // ‖π(c)‖ ≤ ‖π_C(c)‖ and ‖π(b)‖ ≤ ‖π_B(b)‖ (operator 2-norms)
    let mut excess_c: f64 = 0.0;
    for k in 0..base_c.pres.dim {
        let ck = base_c.basis.column(k).to_owned();
        let mut t = zvec(base_c.pres.dim);
        t[k] = cr(1.0);
        let on_h = linalg::op_norm(&gns.rep(p, &ck)).unwrap_or(f64::INFINITY);
        let on_hc = linalg::op_norm(&base_c.gns.rep(&base_c.pres, &t)).unwrap_or(0.0);
        excess_c = excess_c.max((on_h - on_hc).max(0.0));
    }
    rep.check("alpha_norm_bound", excess_c, tol.abs_residual);
    let mut excess_b: f64 = 0.0;
    for k in 0..base_b.pres.dim {
        let bk = base_b.basis.column(k).to_owned();
        let mut t = zvec(base_b.pres.dim);
        t[k] = cr(1.0);
        let on_h = linalg::op_norm(&gns.rep(p, &bk)).unwrap_or(f64::INFINITY);
        let on_hb = linalg::op_norm(&base_b.gns.rep(&base_b.pres, &t)).unwrap_or(0.0);
        excess_b = excess_b.max((on_h - on_hb).max(0.0));
    }
    rep.check("beta_norm_bound", excess_b, tol.abs_residual);

    rep
}

/// `W`, `W*`, and the associated projections `E_op = W*W`, `G_op = WW*`.
#[derive(Debug, Clone)]
pub struct WData {
    pub w: CMat,
    pub w_star: CMat,
    pub e_op: CMat,
    pub g_op: CMat,
}

/// Left multiplication by `u ∈ A⊗A` as a matrix on `ℂ^{n²}`.
fn left_mult2(p: &AlgebraPresentation, u: &CVec) -> CMat {
    let n = p.dim;
    let mut out = linalg::zeros(n * n, n * n);
    let mut lefts = Vec::with_capacity(n);
    for i in 0..n {
        let mut ei = zvec(n);
        ei[i] = cr(1.0);
        lefts.push(p.left_mult(&ei));
    }
    for i in 0..n {
        for j in 0..n {
            let coeff = u[i * n + j];
            if coeff == cr(0.0) {
                continue;
            }
            let k = kron(&lefts[i], &lefts[j]);
            out = out + k.mapv(|x| x * coeff);
        }
    }
    out
}

/// The tensor-square GNS frame is the Kronecker square of the single frame.
fn frame2(gns: &GnsSpace) -> Frame {
    Frame {
        l: kron(&gns.frame.l, &gns.frame.l),
        l_inv: kron(&gns.frame.l_inv, &gns.frame.l_inv),
        cond: gns.frame.cond * gns.frame.cond,
    }
}

/// `(π⊗π)(u)` for `u ∈ A⊗A`, in orthonormal coordinates of `H⊗H`.
pub fn rep2(p: &AlgebraPresentation, gns: &GnsSpace, u: &CVec) -> CMat {
    frame2(gns).conjugate(&left_mult2(p, u))
}

/// Slice `(id ⊗ ω_{ξ,η})(W)`: the operator `X` with `<Xu,v> = <W(u⊗ξ), v⊗η>`.
fn slice_second(w: &CMat, n: usize, xi: &CVec, eta: &CVec) -> CMat {
    let mut x = linalg::zeros(n, n);
    for r in 0..n {
        for cidx in 0..n {
            let mut acc = cr(0.0);
            for l in 0..n {
                let etal = eta[l].conj();
                if etal == cr(0.0) {
                    continue;
                }
                for m in 0..n {
                    let xim = xi[m];
                    if xim == cr(0.0) {
                        continue;
                    }
                    acc += etal * w[(r * n + l, cidx * n + m)] * xim;
                }
            }
            x[(r, cidx)] = acc;
        }
    }
    x
}

/// Construct `W` from `W*(Λ(p)⊗Λ(a)) = (Λ⊗Λ)((Δa)(p⊗1))` and verify:
/// `W*W = (π⊗π)(E)`, the partial isometry identities, the antipode-side
/// characterization of `W`, `Δ(π(a)) = W*(1⊗π(a))W`, the slice formula, the
/// intertwining relations, and that the slices of `W` span `π(A)`.
pub fn build_w(
    p: &AlgebraPresentation,
    dl: &Comultiplication,
    e: &CVec,
    bundle: &IntegralBundle,
    gns: &GnsSpace,
    tol: &Tolerance,
) -> Result<(WData, VerificationReport)> {
    let mut rep = VerificationReport::new();
    let n = p.dim;
    let ab = tol.abs_residual;
    let f2 = frame2(gns);
    let degraded = f2.cond > 1e12;

    // W* columnwise on the product basis
    let mut w_star_coeff = linalg::zeros(n * n, n * n);
    for i in 0..n {
        let mut ei = zvec(n);
        ei[i] = cr(1.0);
        let pi_one = kron_vec(&ei, &p.unit);
        for j in 0..n {
            let col = p.mult2(&dl.of_basis(j), &pi_one);
            for r in 0..n * n {
                w_star_coeff[(r, i * n + j)] = col[r];
            }
        }
    }
    let w_star = f2.conjugate(&w_star_coeff);
    let w = dagger(&w_star);

    let e_op = rep2(p, gns, e);
    let g_op = w.dot(&w_star);

    rep.check_degradable(
        "w_star_w_is_e",
        linalg::mat_dist(&w_star.dot(&w), &e_op),
        ab,
        degraded,
    );
    let pi1 = linalg::mat_dist(&w.dot(&w_star).dot(&w), &w);
    let pi2 = linalg::mat_dist(&w_star.dot(&w).dot(&w_star), &w_star);
    rep.check_degradable("w_partial_isometry", pi1.max(pi2), ab, degraded);
    if !rep.passed() {
        return Err(WqgError::PartialIsometryViolation(
            rep.first_failure().unwrap_or("W").to_string(),
        ));
    }

    // W(Λ(a)⊗Λ(b)) = (Λ⊗Λ)((S^{-1}⊗id)(Δb)(a⊗1))
    let s_inv_ext = kron(&bundle.s_inv, &eye(n));
    let mut charac: f64 = 0.0;
    for a in 0..n {
        let mut ea = zvec(n);
        ea[a] = cr(1.0);
        let ea_one = kron_vec(&ea, &p.unit);
        for b in 0..n {
            let lhs = {
                let mut u = zvec(n * n);
                u[a * n + b] = cr(1.0);
                w.dot(&dagger(&f2.l).dot(&u))
            };
            let rhs = dagger(&f2.l).dot(&p.mult2(&s_inv_ext.dot(&dl.of_basis(b)), &ea_one));
            charac = charac.max(vec_dist(&lhs, &rhs));
        }
    }
    rep.check_degradable("w_characterization", charac, ab, degraded);

    // Δ(π(a)) = W*(1⊗π(a))W
    let mut comult: f64 = 0.0;
    for a in 0..n {
        let mut ea = zvec(n);
        ea[a] = cr(1.0);
        let lhs = rep2(p, gns, &dl.of_basis(a));
        let rhs = w_star.dot(&kron(&eye(n), &gns.rep(p, &ea))).dot(&w);
        comult = comult.max(linalg::mat_dist(&lhs, &rhs));
    }
    rep.check_degradable("w_implements_comultiplication", comult, ab, degraded);

    // slice formula: (id⊗ω_{Λ(p),Λ(q)})(W) Λ(a) = Λ((id⊗φ)(Δ(q^*)(1⊗p)) a)
    let mut slice_res: f64 = 0.0;
    for pq in 0..n * n {
        let (pp, qq) = (pq / n, pq % n);
        let mut ep = zvec(n);
        ep[pp] = cr(1.0);
        let mut eq = zvec(n);
        eq[qq] = cr(1.0);
        let xi = gns.lambda(&ep);
        let eta = gns.lambda(&eq);
        let x = slice_second(&w, n, &xi, &eta);
        let dq_star = dl.apply(&p.star_of(&eq));
        let inner = p.contract_second(&bundle.phi, &p.mult2(&dq_star, &kron_vec(&p.unit, &ep)));
        for a in 0..n {
            let mut ea = zvec(n);
            ea[a] = cr(1.0);
            let lhs = x.dot(&gns.lambda(&ea));
            let rhs = gns.lambda(&p.multiply(&inner, &ea).expect("dims"));
            slice_res = slice_res.max(vec_dist(&lhs, &rhs));
        }
    }
    rep.check_degradable("w_slice_formula", slice_res, ab, degraded);

    // W*(1⊗x) = Δ(x)W* and EW* = W*
    let mut intertwine: f64 = 0.0;
    for a in 0..n {
        let mut ea = zvec(n);
        ea[a] = cr(1.0);
        let lhs = w_star.dot(&kron(&eye(n), &gns.rep(p, &ea)));
        let rhs = rep2(p, gns, &dl.of_basis(a)).dot(&w_star);
        intertwine = intertwine.max(linalg::mat_dist(&lhs, &rhs));
    }
    rep.check_degradable("w_intertwines_comultiplication", intertwine, ab, degraded);
    rep.check_degradable(
        "e_w_star",
        linalg::mat_dist(&e_op.dot(&w_star), &w_star),
        ab,
        degraded,
    );

    // slices of W span π(A)
    let mut slice_cols = linalg::zeros(n * n, n * n);
    for k in 0..n {
        for l in 0..n {
            for r in 0..n {
                for cc in 0..n {
                    slice_cols[(r * n + cc, k * n + l)] = w[(r * n + k, cc * n + l)];
                }
            }
        }
    }
    let mut rep_cols = linalg::zeros(n * n, n);
    for i in 0..n {
        let mut ei = zvec(n);
        ei[i] = cr(1.0);
        let m = gns.rep(p, &ei);
        let v = linalg::vec_of(&m);
        for r in 0..n * n {
            rep_cols[(r, i)] = v[r];
        }
    }
    let span_w = Subspace::from_span(&slice_cols, tol)?;
    let span_a = Subspace::from_span(&rep_cols, tol)?;
    rep.check_degradable(
        "w_slices_span_a",
        span_w.equals_residual(&span_a),
        ab.max(1e-8),
        degraded,
    );

    let rank_w = linalg::rank(&w, tol)?;
    let rank_e = linalg::rank(&e_op, tol)?;
    rep.info(
        "w_rank",
        format!(
            "rank(W) = {rank_w}, rank(E_op) = {rank_e}, dim(H⊗H) = {}",
            n * n
        ),
    );
    let unit_res = linalg::mat_dist(&w.dot(&dagger(&w)), &eye(n * n));
    rep.info("w_unitarity_defect", format!("‖WW† − 1‖ = {unit_res:.3e}"));

    Ok((
        WData {
            w,
            w_star,
            e_op,
            g_op,
        },
        rep,
    ))
}

/// Modular operators of the left integral.
#[derive(Debug, Clone)]
pub struct ModularData {
    pub t: AntilinearOp,
    pub nabla: CMat,
    pub j: AntilinearOp,
    /// Sign `s` with `π(σ(a)) = ∇^s π(a) ∇^{-s}` (records which analytic
    /// convention holds for this build).
    pub sigma_sign: i8,
}

/// `T = closure of Λ(x) ↦ Λ(x^*)`, `∇ = T*T`, `J = T∇^{-1/2}`, together with
/// the `σ ↔ ∇` conjugation check and `JΛ(x) = Λ(σ_{i/2}(x)^*)`.
pub fn modular_operators(
    p: &AlgebraPresentation,
    gns: &GnsSpace,
    bundle: &IntegralBundle,
    tol: &Tolerance,
) -> Result<(ModularData, VerificationReport)> {
    let mut rep = VerificationReport::new();
    let n = p.dim;
    let ab = tol.abs_residual;

    let t = involution_kernel(p, gns);
    let nabla = t.star_self();
    linalg::pd_spectrum(&nabla, tol)
        .map_err(|_| WqgError::NotPositiveDefinite("modular operator ∇ = T*T".into()))?;
    let nabla_inv_half = linalg::hermitian_power(&nabla, cr(-0.5), tol)?;
    let j = AntilinearOp::new(t.kernel.dot(&linalg::conj_mat(&nabla_inv_half)));

    rep.check("j_antiunitary", j.antiunitary_residual(), ab);
    rep.check(
        "j_squared_identity",
        linalg::mat_dist(&j.kernel.dot(&linalg::conj_mat(&j.kernel)), &eye(n)),
        ab,
    );
    // J∇J = ∇^{-1}
    let nabla_inv = linalg::hermitian_power(&nabla, cr(-1.0), tol)?;
    let jnj = j.kernel.dot(&linalg::conj_mat(&nabla)).dot(&linalg::conj_mat(&j.kernel));
    rep.check("j_nabla_j", linalg::mat_dist(&jnj, &nabla_inv), ab);

    // ∇Λ(x) = Λ(σ(x)) and the conjugation π(σ(a)) = ∇^s π(a) ∇^{-s}
    let mut lam_res: f64 = 0.0;
    for k in 0..n {
        let mut ek = zvec(n);
        ek[k] = cr(1.0);
        lam_res = lam_res.max(vec_dist(
            &nabla.dot(&gns.lambda(&ek)),
            &gns.lambda(&bundle.sigma.dot(&ek)),
        ));
    }
    rep.check("nabla_implements_sigma", lam_res, ab);

    let mut plus: f64 = 0.0;
    let mut minus: f64 = 0.0;
    for k in 0..n {
        let mut ek = zvec(n);
        ek[k] = cr(1.0);
        let ra = gns.rep(p, &ek);
        let rsig = gns.rep(p, &bundle.sigma.dot(&ek));
        plus = plus.max(linalg::mat_dist(&rsig, &nabla.dot(&ra).dot(&nabla_inv)));
        minus = minus.max(linalg::mat_dist(&rsig, &nabla_inv.dot(&ra).dot(&nabla)));
    }
    let sigma_sign: i8 = if plus <= ab { 1 } else { -1 };
    rep.check("sigma_nabla_conjugation", plus.min(minus), ab);
    rep.info(
        "sigma_nabla_sign",
        format!("π(σ(a)) = ∇^s π(a) ∇^{{-s}} holds for s = {sigma_sign} (residuals +: {plus:.3e}, −: {minus:.3e})"),
    );

    // JΛ(x) = Λ(σ_{i/2}(x)^*)
    let lh = dagger(&gns.frame.l);
    let lh_inv = dagger(&gns.frame.l_inv);
    let sigma_half = lh_inv.dot(&nabla_inv_half).dot(&lh);
    let mut jres: f64 = 0.0;
    for k in 0..n {
        let mut ek = zvec(n);
        ek[k] = cr(1.0);
        let lhs = j.apply(&gns.lambda(&ek));
        let rhs = gns.lambda(&p.star_of(&sigma_half.dot(&ek)));
        jres = jres.max(vec_dist(&lhs, &rhs));
    }
    rep.check("j_lambda_formula", jres, ab);

    Ok((
        ModularData {
            t,
            nabla,
            j,
            sigma_sign,
        },
        rep,
    ))
}

/// The `δ`-twisted Hilbert space data: `Z: H → H_δ`, `P = Z*Z`, and the Gram
/// matrix of `H_δ`.
#[derive(Debug, Clone)]
pub struct DeltaOps {
    pub z: AntilinearOp,
    pub p_op: CMat,
    pub gram_delta: CMat,
}

/// Build `H_δ` (`<a,b> = φ(b^* δ a)`), the antilinear `Z: Λ(a) ↦ Λ_δ(S(a^*))`,
/// its adjoint, and `P = Z*Z`, verified against
/// `PΛ(a) = Λ(δ^{-1} S^{-2}(a) δ)`. Requires `δ` self-adjoint with positive
/// definite `π(δ)`; otherwise returns `None` and records a skip.
pub fn delta_space(
    p: &AlgebraPresentation,
    gns: &GnsSpace,
    bundle: &IntegralBundle,
    tol: &Tolerance,
) -> (Option<DeltaOps>, VerificationReport) {
    let mut rep = VerificationReport::new();
    let n = p.dim;
    let ab = tol.abs_residual;

    if !bundle.delta_selfadjoint {
        rep.skip("delta_space", "modular element is not self-adjoint");
        return (None, rep);
    }
    let rep_delta = gns.rep(p, &bundle.delta);
    if linalg::pd_spectrum(&rep_delta, tol).is_err() {
        rep.skip("delta_space", "π(δ) is not positive definite");
        return (None, rep);
    }
    rep.info("delta_positive", "π(δ) is positive definite");

    // Gram of H_δ: g_δ[(i,j)] = φ(e_i^* δ e_j)
    let mut g_delta = linalg::zeros(n, n);
    for i in 0..n {
        let mut ei = zvec(n);
        ei[i] = cr(1.0);
        let star_i = p.star_of(&ei);
        let si_delta = p.multiply(&star_i, &bundle.delta).expect("dims");
        for jx in 0..n {
            let mut ej = zvec(n);
            ej[jx] = cr(1.0);
            g_delta[(i, jx)] =
                apply_functional(&bundle.phi, &p.multiply(&si_delta, &ej).expect("dims"));
        }
    }
    let frame_delta = match linalg::gram_frame(&g_delta, tol) {
        Ok(f) => f,
        Err(e) => {
            rep.fail("delta_gram_pd", e.to_string());
            return (None, rep);
        }
    };
    rep.check("delta_gram_pd", 0.0, ab);

    // Z in orthonormal coordinates of H and H_δ
    let lh_inv = dagger(&gns.frame.l_inv);
    let k_z = dagger(&frame_delta.l)
        .dot(&bundle.s)
        .dot(&p.star)
        .dot(&linalg::conj_mat(&lh_inv));
    let z = AntilinearOp::new(k_z);

    // Z* Λ_δ(a) = Λ(δ^{-1} S(a)^* δ)
    let z_star = z.adjoint();
    let mut zstar_res: f64 = 0.0;
    for k in 0..n {
        let mut ek = zvec(n);
        ek[k] = cr(1.0);
        let lam_delta = dagger(&frame_delta.l).dot(&ek);
        let lhs = z_star.apply(&lam_delta);
        let inner = p
            .multiply(
                &p.multiply(&bundle.delta_inv, &p.star_of(&bundle.s.dot(&ek)))
                    .expect("dims"),
                &bundle.delta,
            )
            .expect("dims");
        let rhs = gns.lambda(&inner);
        zstar_res = zstar_res.max(vec_dist(&lhs, &rhs));
    }
    rep.check("z_star_formula", zstar_res, ab);

    // P = Z*Z with PΛ(a) = Λ(δ^{-1} S^{-2}(a) δ)
    let p_op = z.star_self();
    if let Err(e) = linalg::pd_spectrum(&p_op, tol) {
        rep.fail("p_positive_definite", e.to_string());
        return (None, rep);
    }
    rep.check("p_positive_definite", 0.0, ab);
    let s_inv2 = bundle.s_inv.dot(&bundle.s_inv);
    let mut p_res: f64 = 0.0;
    for k in 0..n {
        let mut ek = zvec(n);
        ek[k] = cr(1.0);
        let lhs = p_op.dot(&gns.lambda(&ek));
        let inner = p
            .multiply(
                &p.multiply(&bundle.delta_inv, &s_inv2.dot(&ek)).expect("dims"),
                &bundle.delta,
            )
            .expect("dims");
        let rhs = gns.lambda(&inner);
        p_res = p_res.max(vec_dist(&lhs, &rhs));
    }
    rep.check("p_formula", p_res, ab);

    (
        Some(DeltaOps {
            z,
            p_op,
            gram_delta: g_delta,
        }),
        rep,
    )
}

/// The commutation suite: `W(∇⊗P) = (∇⊗∇)W`, the projection-compression
/// identities, the one-parameter identities at the sampled values of `t`, and
/// invariance of `π(A)` under `Ad ∇^{it}`.
pub fn commutation_suite(
    p: &AlgebraPresentation,
    gns: &GnsSpace,
    wdata: &WData,
    modular: &ModularData,
    delta_ops: Option<&DeltaOps>,
    tol: &Tolerance,
) -> VerificationReport {
    let mut rep = VerificationReport::new();
    let n = p.dim;
    let ab = tol.abs_residual;
    let Some(dops) = delta_ops else {
        for name in [
            "w_nabla_p",
            "nabla_p_compression",
            "nabla_nabla_compression",
            "one_parameter_identity",
            "ad_nabla_leaves_a",
        ] {
            rep.skip(name, "δ-twisted operators unavailable");
        }
        return rep;
    };
    let nabla = &modular.nabla;
    let p_op = &dops.p_op;
    let (w, w_star) = (&wdata.w, &wdata.w_star);

    let np = kron(nabla, p_op);
    let nn = kron(nabla, nabla);
    rep.check(
        "w_nabla_p",
        linalg::mat_dist(&w.dot(&np), &nn.dot(w)),
        ab,
    );
    rep.check(
        "nabla_p_compression",
        linalg::mat_dist(
            &np.dot(&wdata.e_op),
            &wdata.e_op.dot(&np).dot(&wdata.e_op),
        ),
        ab,
    );
    rep.check(
        "nabla_nabla_compression",
        linalg::mat_dist(
            &nn.dot(&wdata.g_op),
            &wdata.g_op.dot(&nn).dot(&wdata.g_op),
        ),
        ab,
    );

    let mut one_param: f64 = 0.0;
    let mut span_res: f64 = 0.0;
    for t in SAMPLED_T {
        let nab_it = match linalg::hermitian_power(nabla, c(0.0, t), tol) {
            Ok(m) => m,
            Err(e) => {
                rep.fail("one_parameter_identity", e.to_string());
                return rep;
            }
        };
        let nab_mit = linalg::hermitian_power(nabla, c(0.0, -t), tol).expect("PD verified");
        let p_mit = match linalg::hermitian_power(p_op, c(0.0, -t), tol) {
            Ok(m) => m,
            Err(e) => {
                rep.fail("one_parameter_identity", e.to_string());
                return rep;
            }
        };
        let lhs = kron(&nab_it, &nab_it).dot(w).dot(&kron(&nab_mit, &p_mit));
        one_param = one_param.max(linalg::mat_dist(&lhs, w));

        // ∇^{it} π(A) ∇^{-it} = π(A) as spans of vectorized operators
        let mut conj_cols = linalg::zeros(n * n, n);
        let mut rep_cols = linalg::zeros(n * n, n);
        for i in 0..n {
            let mut ei = zvec(n);
            ei[i] = cr(1.0);
            let m = gns.rep(p, &ei);
            let cm = nab_it.dot(&m).dot(&nab_mit);
            let (v, cv) = (linalg::vec_of(&m), linalg::vec_of(&cm));
            for r in 0..n * n {
                rep_cols[(r, i)] = v[r];
                conj_cols[(r, i)] = cv[r];
            }
        }
        match (
            Subspace::from_span(&rep_cols, tol),
            Subspace::from_span(&conj_cols, tol),
        ) {
            (Ok(sa), Ok(sc)) => {
                span_res = span_res.max(sa.equals_residual(&sc));
            }
            _ => {
                rep.fail("ad_nabla_leaves_a", "span computation failed");
                return rep;
            }
        }
    }
    rep.check("one_parameter_identity", one_param, ab);
    rep.check("ad_nabla_leaves_a", span_res, ab.max(1e-8));

    let _ = w_star;
    rep
}

/// Inputs to the final certificate, aggregating every stage output.
pub struct CertificateInputs<'a> {
    pub p: &'a AlgebraPresentation,
    pub dl: &'a Comultiplication,
    pub e: &'a CVec,
    pub legs: &'a LegData,
    pub anti: &'a LegAntipodes,
    pub nu: &'a CVec,
    pub mu: &'a CVec,
    pub bundle: &'a IntegralBundle,
    pub gns: &'a GnsSpace,
    pub base_b: &'a BaseAlgebra,
    pub base_c: &'a BaseAlgebra,
    pub wdata: &'a WData,
    pub modular: &'a ModularData,
    pub delta_ops: Option<&'a DeltaOps>,
    pub quasi_invariant: bool,
}

/// Place an operator on `H⊗H` onto legs (1,2), (2,3), or (1,3) of `H⊗H⊗H`.
fn op_legs_12(x: &CMat, n: usize) -> CMat {
    kron(x, &eye(n))
}
fn op_legs_23(x: &CMat, n: usize) -> CMat {
    kron(&eye(n), x)
}
fn op_legs_13(x: &CMat, n: usize) -> CMat {
    let p23 = kron(&eye(n), &flip_matrix(n));
    p23.dot(&op_legs_12(x, n)).dot(&p23)
}

/// The final checklist: comultiplication coassociativity at the operator
/// level, non-degeneracy of the base representation, the KMS data of `ν`,
/// the canonical-idempotent axioms for `E_op`, the separability triple, the
/// flip identities of the base maps, invariance of the integrals, the
/// `θ_t`-condition, and the Radon–Nikodym sandwich `ψ = φ(δ^{1/2}·δ^{1/2})`.
pub fn lcqg_certificate(inp: &CertificateInputs<'_>, tol: &Tolerance) -> VerificationReport {
    let mut rep = VerificationReport::new();
    let n = inp.p.dim;
    let ab = tol.abs_residual;
    let (w, w_star) = (&inp.wdata.w, &inp.wdata.w_star);
    let e_op = &inp.wdata.e_op;

    // operator-level comultiplication and coassociativity via W
    let delta_op = |a: &CVec| -> CMat {
        w_star
            .dot(&kron(&eye(n), &inp.gns.rep(inp.p, a)))
            .dot(w)
    };
    if n <= 10 {
        let mut coassoc: f64 = 0.0;
        let w12 = op_legs_12(w, n);
        let w23 = op_legs_23(w, n);
        for a in 0..n {
            let mut ea = zvec(n);
            ea[a] = cr(1.0);
            let da = delta_op(&ea);
            let lhs = dagger(&w12).dot(&op_legs_23(&da, n)).dot(&w12);
            let rhs = dagger(&w23).dot(&op_legs_13(&da, n)).dot(&w23);
            coassoc = coassoc.max(linalg::mat_dist(&lhs, &rhs));
        }
        rep.check("comultiplication_coassociative", coassoc, ab);
    } else {
        // large dimension: fall back to the coefficient-level identity
        let mut coassoc: f64 = 0.0;
        for k in 0..n {
            let dk = inp.dl.of_basis(k);
            coassoc = coassoc.max(vec_dist(
                &inp.dl.extend_left(n, &dk),
                &inp.dl.extend_right(n, &dk),
            ));
        }
        rep.check("comultiplication_coassociative", coassoc, ab);
        rep.with_detail("coefficient-level identity (dimension too large for the operator form)");
    }

    // B acts non-degenerately on H
    let db = inp.base_b.pres.dim;
    let mut stacked = linalg::zeros(n * n, db);
    for k in 0..db {
        let bk = inp.base_b.basis.column(k).to_owned();
        let m = inp.gns.rep(inp.p, &bk);
        let v = linalg::vec_of(&m);
        for r in 0..n * n {
            stacked[(r, k)] = v[r];
        }
    }
    // the span of {β(b)ξ} over basis b and ξ is the column space of the
    // stacked representation matrices
    let mut cols = linalg::zeros(n, n * db);
    for k in 0..db {
        let bk = inp.base_b.basis.column(k).to_owned();
        let m = inp.gns.rep(inp.p, &bk);
        for r in 0..n {
            for cc in 0..n {
                cols[(r, k * n + cc)] = m[(r, cc)];
            }
        }
    }
    match linalg::rank(&cols, tol) {
        Ok(r) if r == n => {
            rep.check("b_nondegenerate", 0.0, ab);
        }
        Ok(r) => {
            rep.check("b_nondegenerate", (n - r) as f64, ab)
                .with_detail(format!("β(B)H has rank {r} < {n}"));
        }
        Err(e) => {
            rep.fail("b_nondegenerate", e.to_string());
        }
    }

    // ν KMS data: σ^ν_t = Ad ∇_ν^{it} leaves π_B(B) invariant, ν∘σ^ν_t = ν
    let mut kms_b: f64 = 0.0;
    for t in SAMPLED_T {
        match inp.base_b.sigma_z(cr(t), tol) {
            Ok(sig_t) => {
                for k in 0..db {
                    let mut tvec = zvec(db);
                    tvec[k] = cr(1.0);
                    let moved = sig_t.dot(&tvec);
                    // stays inside B by construction of the leg algebra; the
                    // real content is ν-invariance and well-definedness
                    let nu_res = (apply_functional(&inp.base_b.func, &moved)
                        - apply_functional(&inp.base_b.func, &tvec))
                    .norm();
                    kms_b = kms_b.max(nu_res);
                }
            }
            Err(e) => {
                rep.fail("nu_kms_weight", e.to_string());
                return rep;
            }
        }
    }
    rep.check("nu_kms_weight", kms_b, ab);

    // canonical idempotent at the operator level
    let idem = linalg::mat_dist(&e_op.dot(e_op), e_op)
        .max(linalg::mat_dist(&dagger(e_op), e_op));
    rep.check("e_op_projection", idem, ab);
    let mut unit_on_delta: f64 = 0.0;
    for a in 0..n {
        let mut ea = zvec(n);
        ea[a] = cr(1.0);
        let da = delta_op(&ea);
        unit_on_delta = unit_on_delta
            .max(linalg::mat_dist(&e_op.dot(&da), &da))
            .max(linalg::mat_dist(&da.dot(e_op), &da));
    }
    rep.check("e_op_unit_on_comultiplication", unit_on_delta, ab);
    if n <= 10 {
        let e12 = op_legs_12(e_op, n);
        let e23 = op_legs_23(e_op, n);
        let commute = linalg::mat_dist(&e12.dot(&e23), &e23.dot(&e12));
        let w23 = op_legs_23(w, n);
        let w12 = op_legs_12(w, n);
        let id_delta_e = dagger(&w23).dot(&op_legs_13(e_op, n)).dot(&w23);
        let delta_id_e = dagger(&w12).dot(&op_legs_23(e_op, n)).dot(&w12);
        let chain = linalg::mat_dist(&id_delta_e, &e12.dot(&e23))
            .max(linalg::mat_dist(&delta_id_e, &e12.dot(&e23)))
            .max(commute);
        rep.check("e_op_weak_comultiplicativity", chain, ab);
    } else {
        rep.skip(
            "e_op_weak_comultiplicativity",
            "dimension too large for the operator form; coefficient form verified upstream",
        );
    }

    // separability triple: (ν⊗id)(E) = 1 and (ν⊗id)(E(b⊗1)) = (R∘σ^ν_{i/2})(b)
    let nu_e = inp.p.contract_first(inp.nu, inp.e);
    rep.check("separability_nu_e", vec_dist(&nu_e, &inp.p.unit), ab);
    let r_map = match inp.base_b.sigma_z_ambient(c(0.0, -0.5), tol) {
        Ok(m) => inp.anti.s_b.dot(&m),
        Err(e) => {
            rep.fail("separability_r_sigma", e.to_string());
            return rep;
        }
    };
    let sig_half = match inp.base_b.sigma_z_ambient(c(0.0, 0.5), tol) {
        Ok(m) => m,
        Err(e) => {
            rep.fail("separability_r_sigma", e.to_string());
            return rep;
        }
    };
    let mut sep: f64 = 0.0;
    for k in 0..db {
        let bk = inp.base_b.basis.column(k).to_owned();
        let lhs = inp
            .p
            .contract_first(inp.nu, &inp.p.mult2(inp.e, &kron_vec(&bk, &inp.p.unit)));
        let rhs = r_map.dot(&sig_half.dot(&bk));
        sep = sep.max(vec_dist(&lhs, &rhs));
    }
    rep.check("separability_r_sigma", sep, ab);

    // (σ^ν_t ⊗ σ^μ_{-t})(E) = E at sampled t; (γ_N⊗γ_L)(E) = ςE;
    // (R⊗R^{-1})(E) = ςE
    let mut flow_e: f64 = 0.0;
    for t in SAMPLED_T {
        let sn = match inp.base_b.sigma_z_ambient(cr(t), tol) {
            Ok(m) => m,
            Err(e) => {
                rep.fail("base_flow_fixes_e", e.to_string());
                return rep;
            }
        };
        let sm = match inp.base_c.sigma_z_ambient(cr(-t), tol) {
            Ok(m) => m,
            Err(e) => {
                rep.fail("base_flow_fixes_e", e.to_string());
                return rep;
            }
        };
        flow_e = flow_e.max(vec_dist(&kron(&sn, &sm).dot(inp.e), inp.e));
    }
    rep.check("base_flow_fixes_e", flow_e, ab);
    let flip = flip_matrix(n);
    let flipped_e = flip.dot(inp.e);
    rep.check(
        "gamma_maps_flip_e",
        vec_dist(&kron(&inp.anti.s_b, &inp.anti.s_c).dot(inp.e), &flipped_e),
        ab,
    );
    let r_inv = match inp.base_b.sigma_z_ambient(c(0.0, 0.5), tol) {
        Ok(m) => m.dot(&inp.anti.s_b_inv),
        Err(e) => {
            rep.fail("r_maps_flip_e", e.to_string());
            return rep;
        }
    };
    rep.check(
        "r_maps_flip_e",
        vec_dist(&kron(&r_map, &r_inv).dot(inp.e), &flipped_e),
        ab,
    );

    // invariance of the integrals
    rep.check(
        "phi_left_invariant",
        crate::integrals::left_invariance_residual(inp.p, inp.dl, inp.legs, &inp.bundle.phi),
        ab,
    );
    rep.check(
        "psi_right_invariant",
        crate::integrals::right_invariance_residual(inp.p, inp.dl, inp.legs, &inp.bundle.psi),
        ab,
    );

    // θ_t condition: quasi-invariance plus σ_t(B) = B and ν∘σ_t|_B = ν
    if !inp.quasi_invariant {
        rep.fail(
            "theta_condition",
            "quasi-invariance fails: σ does not restrict to a ν-preserving flow on B",
        );
    } else {
        let lh = dagger(&inp.gns.frame.l);
        let lh_inv = dagger(&inp.gns.frame.l_inv);
        let mut theta: f64 = 0.0;
        for t in SAMPLED_T {
            let nab_it = match linalg::hermitian_power(&inp.modular.nabla, c(0.0, t), tol) {
                Ok(m) => m,
                Err(e) => {
                    rep.fail("theta_condition", e.to_string());
                    return rep;
                }
            };
            let sig_t = lh_inv.dot(&nab_it).dot(&lh);
            for k in 0..db {
                let bk = inp.base_b.basis.column(k).to_owned();
                let moved = sig_t.dot(&bk);
                theta = theta.max(inp.legs.b.distance(&moved));
                theta = theta.max(
                    (apply_functional(inp.nu, &moved) - apply_functional(inp.nu, &bk)).norm(),
                );
            }
        }
        rep.check("theta_condition", theta, ab);
    }

    // Radon–Nikodym sandwich: ψ(x) = φ(δ^{1/2} x δ^{1/2}) for positive δ
    if inp.delta_ops.is_none() {
        rep.skip(
            "radon_nikodym_sandwich",
            "modular element is not positive definite",
        );
    } else {
        let rep_delta = inp.gns.rep(inp.p, &inp.bundle.delta);
        match linalg::hermitian_power(&rep_delta, cr(0.5), tol) {
            Ok(half_op) => {
                let lam_unit = inp.gns.lambda(&inp.p.unit);
                let half = inp.gns.coeffs(&half_op.dot(&lam_unit));
                let consistency =
                    linalg::mat_dist(&inp.gns.rep(inp.p, &half), &half_op);
                let mut sandwich: f64 = consistency;
                for k in 0..n {
                    let mut ek = zvec(n);
                    ek[k] = cr(1.0);
                    let inner = inp
                        .p
                        .multiply(&inp.p.multiply(&half, &ek).expect("dims"), &half)
                        .expect("dims");
                    sandwich = sandwich.max(
                        (apply_functional(&inp.bundle.phi, &inner) - inp.bundle.psi[k]).norm(),
                    );
                }
                rep.check("radon_nikodym_sandwich", sandwich, ab);
            }
            Err(e) => {
                rep.fail("radon_nikodym_sandwich", e.to_string());
            }
        }
    }

    // record the scaling scalar τ with σ(δ) = τδ when one exists
    match crate::integrals::scaling_scalar(inp.bundle, tol) {
        Some(tau) => {
            rep.info(
                "sigma_delta_scalar",
                format!("σ(δ) = τδ with τ = {:.12}+{:.12}i", tau.re, tau.im),
            );
        }
        None => {
            rep.info("sigma_delta_scalar", "no scalar relation σ(δ) = τδ");
        }
    }

    rep
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coalgebra::{
        compute_canonical_idempotent, distinguished_functionals, extract_legs, solve_leg_antipodes,
    };
    use crate::groupoid::{
        gen_group_algebra, gen_groupoid_convolution, gen_groupoid_function, pair_groupoid,
        GroupTable,
    };
    use crate::integrals::{
        antipode_from_integral, find_integrals, modular_automorphism, modular_element,
        quasi_invariance_suite,
    };

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    struct Full {
        p: AlgebraPresentation,
        dl: Comultiplication,
        e: CVec,
        legs: LegData,
        anti: LegAntipodes,
        nu: CVec,
        mu: CVec,
        bundle: IntegralBundle,
    }

    fn run_algebraic(p: AlgebraPresentation, dl: Comultiplication, user_phi: Option<CVec>) -> Full {
        let t = tol();
        let (e, _) = compute_canonical_idempotent(&p, &dl, &t);
        let (legs, _) = extract_legs(&p, &dl, &e, &t).unwrap();
        let (anti, _) = solve_leg_antipodes(&p, &e, &legs, &t).unwrap();
        let (nu, mu, _) = distinguished_functionals(&p, &legs, &anti, &t).unwrap();
        let (cones, phi, frep) = find_integrals(&p, &dl, &legs, user_phi.as_ref(), &t).unwrap();
        assert!(frep.passed());
        let (s, s_inv, _) = antipode_from_integral(&p, &dl, &legs, &anti, &phi, &t).unwrap();
        let (sigma, sigma_inv, _) = modular_automorphism(&p, &phi, &t).unwrap();
        let psi = s.t().dot(&phi);
        let (delta, delta_inv, delta_sa, _) = modular_element(&p, &phi, &psi, &t).unwrap();
        let sigma_prime = s_inv.dot(&sigma_inv).dot(&s);
        let sigma_prime_inv = s_inv.dot(&sigma).dot(&s);
        let mut bundle = IntegralBundle {
            phi,
            psi,
            s,
            s_inv,
            sigma,
            sigma_inv,
            sigma_prime,
            sigma_prime_inv,
            delta,
            delta_inv,
            delta_selfadjoint: delta_sa,
            quasi_invariant: false,
            left_cone_dim: cones.left.len(),
            right_cone_dim: cones.right.len(),
        };
        let (qi, _) = quasi_invariance_suite(&p, &dl, &e, &legs, &nu, &bundle, &t);
        bundle.quasi_invariant = qi;
        Full {
            p,
            dl,
            e,
            legs,
            anti,
            nu,
            mu,
            bundle,
        }
    }

    fn weighted_trace_m2() -> Full {
        let (p, dl) = gen_groupoid_convolution(&pair_groupoid(2)).unwrap();
        let labels = p.labels.clone();
        let idx = |l: &str| labels.iter().position(|x| x == l).unwrap();
        let mut phi = zvec(4);
        phi[idx("(1,1)")] = cr(1.0);
        phi[idx("(2,2)")] = cr(2.0);
        run_algebraic(p, dl, Some(phi))
    }

    fn weighted_fun2() -> Full {
        let (p, dl) = gen_groupoid_function(&pair_groupoid(2)).unwrap();
        let labels = p.labels.clone();
        let idx = |l: &str| labels.iter().position(|x| x == l).unwrap();
        let mut phi = zvec(4);
        phi[idx("d(1,1)")] = cr(1.0);
        phi[idx("d(1,2)")] = cr(2.0);
        phi[idx("d(2,1)")] = cr(1.0);
        phi[idx("d(2,2)")] = cr(2.0);
        run_algebraic(p, dl, Some(phi))
    }

    #[test]
    fn gns_grams_match_hand_computation() {
        let t = tol();
        let f = weighted_trace_m2();
        let (gns, grep) = build_gns(&f.p, &f.bundle.phi, &t).unwrap();
        assert!(grep.passed(), "{}", grep.to_text(1e-9));
        // G = diag(1,2,1,2) in arrow order (1,1),(1,2),(2,1),(2,2)
        let idx = |l: &str| f.p.labels.iter().position(|x| x == l).unwrap();
        let want = [("(1,1)", 1.0), ("(1,2)", 2.0), ("(2,1)", 1.0), ("(2,2)", 2.0)];
        for (lab, v) in want {
            assert!((gns.gram[(idx(lab), idx(lab))] - cr(v)).norm() < 1e-12);
        }
        // rep(e12)† = rep(e21)
        let mut e12 = zvec(4);
        e12[idx("(1,2)")] = cr(1.0);
        let mut e21 = zvec(4);
        e21[idx("(2,1)")] = cr(1.0);
        assert!(
            linalg::mat_dist(&dagger(&gns.rep(&f.p, &e12)), &gns.rep(&f.p, &e21)) < 1e-12
        );
    }

    #[test]
    fn base_bridge_on_examples() {
        let t = tol();
        // trivial base for the group algebra
        let (p, dl) = gen_group_algebra(&GroupTable::cyclic(2)).unwrap();
        let f = run_algebraic(p, dl, None);
        let base_b = build_base(&f.p, &f.legs.b, &f.nu, "B", &t).unwrap();
        let base_c = build_base(&f.p, &f.legs.c, &f.mu, "C", &t).unwrap();
        assert_eq!(base_b.pres.dim, 1);
        let (jhat, brep) = base_bridge(&f.p, &f.anti, &base_b, &base_c, &t).unwrap();
        assert!(brep.passed(), "{}", brep.to_text(1e-9));
        assert!((jhat[(0, 0)].norm() - 1.0).abs() < 1e-12);

        // function algebra: Ĵ_B is unitary with residual < 1e-12
        let f = weighted_fun2();
        let base_b = build_base(&f.p, &f.legs.b, &f.nu, "B", &t).unwrap();
        let base_c = build_base(&f.p, &f.legs.c, &f.mu, "C", &t).unwrap();
        let (jhat, brep) = base_bridge(&f.p, &f.anti, &base_b, &base_c, &t).unwrap();
        assert!(brep.passed(), "{}", brep.to_text(1e-9));
        assert!(linalg::mat_dist(&dagger(&jhat).dot(&jhat), &eye(2)) < 1e-12);
    }

    #[test]
    fn embed_maps_residuals() {
        let t = tol();
        for f in [weighted_trace_m2(), weighted_fun2()] {
            let (gns, _) = build_gns(&f.p, &f.bundle.phi, &t).unwrap();
            let base_b = build_base(&f.p, &f.legs.b, &f.nu, "B", &t).unwrap();
            let base_c = build_base(&f.p, &f.legs.c, &f.mu, "C", &t).unwrap();
            let rep = embed_maps(&f.p, &f.dl, &f.legs, &f.bundle, &gns, &base_b, &base_c, &t);
            assert!(rep.passed(), "{}: {}", f.p.name, rep.to_text(1e-9));
        }
    }

    #[test]
    fn w_is_unitary_for_group_algebras() {
        let t = tol();
        let (p, dl) = gen_group_algebra(&GroupTable::cyclic(2)).unwrap();
        let f = run_algebraic(p, dl, None);
        let (gns, _) = build_gns(&f.p, &f.bundle.phi, &t).unwrap();
        let (wd, wrep) = build_w(&f.p, &f.dl, &f.e, &f.bundle, &gns, &t).unwrap();
        assert!(wrep.passed(), "{}", wrep.to_text(1e-9));
        // Hopf case: E_op = 1, W unitary
        assert!(linalg::mat_dist(&wd.e_op, &eye(4)) < 1e-10);
        assert!(linalg::mat_dist(&wd.w.dot(&dagger(&wd.w)), &eye(4)) < 1e-10);
    }

    #[test]
    fn w_is_a_proper_partial_isometry_for_m2() {
        let t = tol();
        let f = weighted_trace_m2();
        let (gns, _) = build_gns(&f.p, &f.bundle.phi, &t).unwrap();
        let (wd, wrep) = build_w(&f.p, &f.dl, &f.e, &f.bundle, &gns, &t).unwrap();
        assert!(wrep.passed(), "{}", wrep.to_text(1e-9));
        assert_eq!(linalg::rank(&wd.w, &t).unwrap(), 8);
        assert_eq!(linalg::rank(&wd.e_op, &t).unwrap(), 8);
        // strictly rank-deficient: not unitary
        assert!(linalg::mat_dist(&wd.w.dot(&dagger(&wd.w)), &eye(16)) > 0.5);
    }

    #[test]
    fn perturbed_comultiplication_breaks_w_e_identity() {
        let t = tol();
        let f = weighted_trace_m2();
        let (gns, _) = build_gns(&f.p, &f.bundle.phi, &t).unwrap();
        let mut dl = Comultiplication::new(f.p.dim, f.dl.delta.clone()).unwrap();
        dl.delta[(0, 0)] += cr(0.1);
        // W built from the perturbed Δ no longer satisfies W*W = (π⊗π)(E)
        let out = build_w(&f.p, &dl, &f.e, &f.bundle, &gns, &t);
        match out {
            Err(_) => {}
            Ok((_, wrep)) => {
                assert!(!wrep.passed());
            }
        }
    }

    #[test]
    fn modular_operator_is_weight_ratio_diagonal() {
        let t = tol();
        let f = weighted_trace_m2();
        let (gns, _) = build_gns(&f.p, &f.bundle.phi, &t).unwrap();
        let (md, mrep) = modular_operators(&f.p, &gns, &f.bundle, &t).unwrap();
        assert!(mrep.passed(), "{}", mrep.to_text(1e-9));
        // ∇ is diagonal with entries w_i/w_j = (1, 1/2, 2, 1) in arrow order
        let idx = |l: &str| f.p.labels.iter().position(|x| x == l).unwrap();
        let want = [("(1,1)", 1.0), ("(1,2)", 0.5), ("(2,1)", 2.0), ("(2,2)", 1.0)];
        for (lab, v) in want {
            let k = idx(lab);
            assert!(
                (md.nabla[(k, k)] - cr(v)).norm() < 1e-10,
                "∇ at {lab} = {}",
                md.nabla[(k, k)]
            );
        }
        assert_eq!(md.sigma_sign, 1);
    }

    #[test]
    fn commutative_example_has_trivial_nabla_and_p() {
        let t = tol();
        let f = weighted_fun2();
        let (gns, _) = build_gns(&f.p, &f.bundle.phi, &t).unwrap();
        let (md, mrep) = modular_operators(&f.p, &gns, &f.bundle, &t).unwrap();
        assert!(mrep.passed());
        // ∇ = 1 despite δ ≠ 1
        assert!(linalg::mat_dist(&md.nabla, &eye(4)) < 1e-10);
        let (dops, drep) = delta_space(&f.p, &gns, &f.bundle, &t);
        assert!(drep.passed(), "{}", drep.to_text(1e-9));
        let dops = dops.unwrap();
        // S² = id and the algebra is commutative, so P = 1
        assert!(linalg::mat_dist(&dops.p_op, &eye(4)) < 1e-10);
        let (wd, _) = build_w(&f.p, &f.dl, &f.e, &f.bundle, &gns, &t).unwrap();
        let crep = commutation_suite(&f.p, &gns, &wd, &md, Some(&dops), &t);
        assert!(crep.passed(), "{}", crep.to_text(1e-9));
    }

    #[test]
    fn commutation_suite_with_nontrivial_nabla() {
        let t = tol();
        let f = weighted_trace_m2();
        let (gns, _) = build_gns(&f.p, &f.bundle.phi, &t).unwrap();
        let (md, _) = modular_operators(&f.p, &gns, &f.bundle, &t).unwrap();
        let (dops, drep) = delta_space(&f.p, &gns, &f.bundle, &t);
        assert!(drep.passed());
        let (wd, _) = build_w(&f.p, &f.dl, &f.e, &f.bundle, &gns, &t).unwrap();
        let crep = commutation_suite(&f.p, &gns, &wd, &md, dops.as_ref(), &t);
        assert!(crep.passed(), "{}", crep.to_text(1e-9));
        assert!(crep.max_residual() < 1e-9);
    }

    #[test]
    fn delta_space_skips_without_positivity() {
        let t = tol();
        let f = weighted_fun2();
        let (gns, _) = build_gns(&f.p, &f.bundle.phi, &t).unwrap();
        let mut bundle = f.bundle.clone();
        bundle.delta_selfadjoint = false;
        let (dops, drep) = delta_space(&f.p, &gns, &bundle, &t);
        assert!(dops.is_none());
        assert!(drep.passed());
        assert!(drep.checks.iter().any(|c| c.status == crate::report::Status::Skip));
        // the commutation suite degrades to skips, never failures
        let (wd, _) = build_w(&f.p, &f.dl, &f.e, &f.bundle, &gns, &t).unwrap();
        let (md, _) = modular_operators(&f.p, &gns, &f.bundle, &t).unwrap();
        let crep = commutation_suite(&f.p, &gns, &wd, &md, None, &t);
        assert!(crep.passed());
        assert!(crep
            .checks
            .iter()
            .all(|c| c.status == crate::report::Status::Skip));
    }

    #[test]
    fn certificate_passes_on_examples() {
        let t = tol();
        for f in [
            {
                let (p, dl) = gen_group_algebra(&GroupTable::cyclic(2)).unwrap();
                run_algebraic(p, dl, None)
            },
            weighted_fun2(),
            weighted_trace_m2(),
        ] {
            let (gns, _) = build_gns(&f.p, &f.bundle.phi, &t).unwrap();
            let base_b = build_base(&f.p, &f.legs.b, &f.nu, "B", &t).unwrap();
            let base_c = build_base(&f.p, &f.legs.c, &f.mu, "C", &t).unwrap();
            let (wd, _) = build_w(&f.p, &f.dl, &f.e, &f.bundle, &gns, &t).unwrap();
            let (md, _) = modular_operators(&f.p, &gns, &f.bundle, &t).unwrap();
            let (dops, _) = delta_space(&f.p, &gns, &f.bundle, &t);
            let inputs = CertificateInputs {
                p: &f.p,
                dl: &f.dl,
                e: &f.e,
                legs: &f.legs,
                anti: &f.anti,
                nu: &f.nu,
                mu: &f.mu,
                bundle: &f.bundle,
                gns: &gns,
                base_b: &base_b,
                base_c: &base_c,
                wdata: &wd,
                modular: &md,
                delta_ops: dops.as_ref(),
                quasi_invariant: f.bundle.quasi_invariant,
            };
            let cert = lcqg_certificate(&inputs, &t);
            assert!(cert.passed(), "{}: {}", f.p.name, cert.to_text(1e-9));
        }
    }
}
