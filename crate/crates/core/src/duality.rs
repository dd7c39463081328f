//! The dual weak Hopf *-algebra on the dual basis: multiplication transposed
//! from the comultiplication, comultiplication transposed from the
//! multiplication, involution through the antipode, the dual idempotent from
//! the counit, the dual integrals, and the generalized Pontryagin biduality
//! check.

use ndarray::Array3;

use crate::algebra::{apply_functional, AlgebraPresentation};
use crate::coalgebra::Comultiplication;
use crate::integrals::{self, IntegralBundle};
use crate::linalg::{self, vec_dist, CMat, CVec};
use crate::pipeline::{run_pipeline, PipelineData, Stage};
use crate::report::VerificationReport;
use crate::tol::Tolerance;
use crate::{Result, WqgError};

/// The dual presentation with its predicted structure maps.
#[derive(Debug, Clone)]
pub struct DualPresentation {
    pub pres: AlgebraPresentation,
    pub comult: Comultiplication,
    pub e_hat: CVec,
    pub s_hat: CMat,
    /// Faithful right integral `ψ̂(φ(·c)) = ε(c)`.
    pub psi_hat: CVec,
    /// Left integral `φ̂ = ψ̂ ∘ Ŝ^{-1}`.
    pub phi_hat: CVec,
}

/// Build the dual `(Â, Δ̂)` on the dual basis `f_1..f_n`:
/// `(f_i f_j)(e_k) = Δ`-coefficient, `Δ̂(f_k)(e_i⊗e_j) = ` mult-coefficient,
/// `ω^*(x) = conj(ω(S(x)^*))`, `Ŝ(ω) = ω∘S`, `Ê(x⊗y) = ε(xy)`,
/// `ψ̂ = ε∘F^{-1}` through the bijection `c ↦ φ(·c)`, and `φ̂ = ψ̂∘Ŝ^{-1}`.
pub fn dualize(
    p: &AlgebraPresentation,
    dl: &Comultiplication,
    bundle: &IntegralBundle,
    counit: &CVec,
    tol: &Tolerance,
) -> Result<(DualPresentation, VerificationReport)> {
    let mut rep = VerificationReport::new();
    let n = p.dim;

    let mut mult = Array3::zeros((n, n, n));
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                mult[(i, j, k)] = dl.delta[(i * n + j, k)];
            }
        }
    }
    // ω^*: coeffs(ω^*) = Sᵀ · (Σ*)ᴴ · conj(coeffs(ω))
    let star = bundle.s.t().dot(&linalg::dagger(&p.star));
    let unit = counit.clone();
    let labels = p.labels.iter().map(|l| format!("{l}^")).collect();
    let pres = AlgebraPresentation::new(format!("{}^", p.name), labels, mult, star, unit)?;

    // the counit is the unit of the dual multiplication
    let unit_res = linalg::mat_dist(&pres.left_mult(&pres.unit), &linalg::eye(n)).max(
        linalg::mat_dist(&pres.right_mult(&pres.unit), &linalg::eye(n)),
    );
    rep.check("dual_unit_is_counit", unit_res, tol.abs_residual);

    let mut delta_hat = linalg::zeros(n * n, n);
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                delta_hat[(i * n + j, k)] = p.mult[(i, j, k)];
            }
        }
    }
    let comult = Comultiplication::new(n, delta_hat)?;

    // Ê = Δ̂(1̂) with coefficients ε(e_i e_j)
    let e_hat = comult.apply(&pres.unit);
    let mut e_check: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let want = apply_functional(counit, &p.basis_product(i, j));
            e_check = e_check.max((e_hat[i * n + j] - want).norm());
        }
    }
    rep.check("dual_idempotent_from_counit", e_check, tol.abs_residual);

    let s_hat = bundle.s.t().to_owned();

    // ψ̂ = ε∘F^{-1}: for ω = φ(·c) the coefficient vector of ω is F·c
    let fg = p.functional_gram(&bundle.phi, tol)?;
    let f_inv = linalg::inv_checked(&fg.f, tol, "F matrix")?;
    let psi_hat = f_inv.t().dot(counit);
    let s_hat_inv = linalg::inv_checked(&s_hat, tol, "dual antipode")?;
    let phi_hat = s_hat_inv.t().dot(&psi_hat);

    Ok((
        DualPresentation {
            pres,
            comult,
            e_hat,
            s_hat,
            psi_hat,
            phi_hat,
        },
        rep,
    ))
}

/// Run the entire pipeline on the dual presentation and additionally verify
/// that the predicted `ψ̂` is right invariant and `φ̂` is left invariant.
pub fn validate_dual(
    dual: &DualPresentation,
    tol: &Tolerance,
) -> (VerificationReport, Option<PipelineData>) {
    let (mut rep, data) = run_pipeline(
        &dual.pres,
        &dual.comult,
        None,
        None,
        Stage::GnsOperators,
        tol,
    );
    if let Some(d) = &data {
        rep.info(
            "duality.leg_ranks",
            format!(
                "dim Â = {}, rank(Ê-reshape) = {}",
                dual.pres.dim,
                d.legs.b.dim()
            ),
        );
        rep.check(
            "duality.psi_hat_right_invariant",
            integrals::right_invariance_residual(&dual.pres, &dual.comult, &d.legs, &dual.psi_hat),
            tol.abs_residual,
        );
        rep.check(
            "duality.phi_hat_left_invariant",
            integrals::left_invariance_residual(&dual.pres, &dual.comult, &d.legs, &dual.phi_hat),
            tol.abs_residual,
        );
        rep.check(
            "duality.e_hat_matches_pipeline",
            vec_dist(&dual.e_hat, &d.e),
            tol.abs_residual,
        );
        // the dual antipode predicted by transposition agrees with the one
        // solved from the dual's own left integral
        if let Some(b) = &d.bundle {
            rep.check(
                "duality.s_hat_matches_pipeline",
                linalg::mat_dist(&dual.s_hat, &b.s),
                tol.abs_residual,
            );
        }
    }
    (rep, data)
}

/// Compare a presentation with its double dual under the canonical
/// identification of the basis with the double-dual basis; records the
/// proportionality scalar between the original `φ` and the transported
/// double-dual integral when one exists.
pub fn biduality_check(
    p: &AlgebraPresentation,
    dl: &Comultiplication,
    bundle: &IntegralBundle,
    counit: &CVec,
    tol: &Tolerance,
) -> Result<VerificationReport> {
    let mut rep = VerificationReport::new();
    let ab = tol.abs_residual;

    let (dual, drep) = dualize(p, dl, bundle, counit, tol)?;
    rep.absorb("dual.", drep);
    let (vrep, ddata) = validate_dual(&dual, tol);
    rep.absorb("dual.", vrep);
    let Some(ddata) = ddata else {
        rep.fail("bidual.pipeline", "dual presentation failed verification");
        return Ok(rep);
    };
    let dbundle = ddata.bundle.as_ref().ok_or_else(|| {
        WqgError::NoIntegral("dual pipeline produced no integral bundle".into())
    })?;
    let (bidual, brep) = dualize(&dual.pres, &dual.comult, dbundle, &ddata.counit, tol)?;
    rep.absorb("bidual.", brep);

    // canonical identification: e_i ↦ evaluation at f_i
    let mut mult_res: f64 = 0.0;
    for i in 0..p.dim {
        for j in 0..p.dim {
            mult_res = mult_res.max(vec_dist(
                &bidual.pres.basis_product(i, j),
                &p.basis_product(i, j),
            ));
        }
    }
    rep.check("bidual.multiplication_tensor", mult_res, ab)
        .with_detail("equal by construction; recorded");
    rep.check(
        "bidual.comultiplication_tensor",
        linalg::mat_dist(&bidual.comult.delta, &dl.delta),
        ab,
    );
    rep.check(
        "bidual.star_matrix",
        linalg::mat_dist(&bidual.pres.star, &p.star),
        ab,
    );
    rep.check(
        "bidual.antipode",
        linalg::mat_dist(&bidual.s_hat, &bundle.s),
        ab,
    );
    // the unit of the double dual is the counit of the dual, which under the
    // identification is evaluation at the unit of A, i.e. the unit of A
    rep.check("bidual.unit", vec_dist(&bidual.pres.unit, &p.unit), ab);
    // the counit of the double dual, solved from its comultiplication, must
    // come back to the counit of A
    match crate::coalgebra::compute_counit(&bidual.pres, &bidual.comult, tol) {
        Ok((eps2, _)) => {
            rep.check("bidual.counit", vec_dist(&eps2, counit), ab);
        }
        Err(e) => {
            rep.fail("bidual.counit", e.to_string());
        }
    }
    let mut e_res: f64 = 0.0;
    {
        let e = dl.apply(&p.unit);
        e_res = e_res.max(vec_dist(&bidual.e_hat, &e));
    }
    rep.check("bidual.canonical_idempotent", e_res, ab);

    // proportionality of φ and the transported double-dual left integral
    let phi2 = &bidual.phi_hat;
    let (mut best, mut mag) = (0usize, 0.0f64);
    for (i, x) in bundle.phi.iter().enumerate() {
        if x.norm() > mag {
            mag = x.norm();
            best = i;
        }
    }
    if phi2[best].norm() > 0.0 {
        let scale = phi2[best] / bundle.phi[best];
        let res = vec_dist(phi2, &bundle.phi.mapv(|x| x * scale));
        if res <= ab {
            rep.info(
                "bidual.phi_scalar",
                format!("φ̂̂ = λ·φ with λ = {:.12}+{:.12}i", scale.re, scale.im),
            );
        } else {
            rep.info(
                "bidual.phi_scalar",
                format!("φ̂̂ not proportional to φ (residual {res:.3e})"),
            );
        }
    } else {
        rep.info("bidual.phi_scalar", "φ̂̂ vanishes on the reference slot");
    }

    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groupoid::{
        gen_group_algebra, gen_groupoid_convolution, gen_groupoid_function, pair_groupoid,
        GroupTable,
    };

    use crate::linalg::{cr, zvec};

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    fn pipeline_bundle(
        p: &AlgebraPresentation,
        dl: &Comultiplication,
        user_phi: Option<&CVec>,
    ) -> (IntegralBundle, CVec) {
        let (rep, data) = run_pipeline(p, dl, user_phi, None, Stage::GnsOperators, &tol());
        assert!(rep.passed(), "{}: {}", p.name, rep.to_text(1e-9));
        let data = data.unwrap();
        (data.bundle.unwrap(), data.counit)
    }

    #[test]
    fn dual_of_group_algebra_is_function_algebra() {
        let t = tol();
        let (p, dl) = gen_group_algebra(&GroupTable::cyclic(2)).unwrap();
        let (bundle, counit) = pipeline_bundle(&p, &dl, None);
        let (dual, drep) = dualize(&p, &dl, &bundle, &counit, &t).unwrap();
        assert!(drep.passed());
        // commutative pointwise algebra with Ê = 1⊗1
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    let want = if i == j && j == k { 1.0 } else { 0.0 };
                    assert!((dual.pres.mult[(i, j, k)] - cr(want)).norm() < 1e-12);
                }
            }
        }
        assert!(vec_dist(&dual.e_hat, &dual.pres.unit2()).max(0.0) < 1e-12 || {
            let unit2 = linalg::kron_vec(&dual.pres.unit, &dual.pres.unit);
            vec_dist(&dual.e_hat, &unit2) < 1e-12
        });
        let (vrep, _) = validate_dual(&dual, &t);
        assert!(vrep.passed(), "{}", vrep.to_text(1e-9));
    }

    #[test]
    fn dual_of_convolution_matches_function_generator() {
        let t = tol();
        let (p, dl) = gen_groupoid_convolution(&pair_groupoid(2)).unwrap();
        let (bundle, counit) = pipeline_bundle(&p, &dl, None);
        let (dual, _) = dualize(&p, &dl, &bundle, &counit, &t).unwrap();
        let (fp, fdl) = gen_groupoid_function(&pair_groupoid(2)).unwrap();
        // identical arrow ordering makes the relabeling the identity
        for i in 0..4 {
            for j in 0..4 {
                for k in 0..4 {
                    assert!((dual.pres.mult[(i, j, k)] - fp.mult[(i, j, k)]).norm() < 1e-12);
                }
            }
        }
        assert!(linalg::mat_dist(&dual.comult.delta, &fdl.delta) < 1e-12);
        assert!(linalg::mat_dist(&dual.pres.star, &fp.star) < 1e-12);
        assert!(vec_dist(&dual.pres.unit, &fp.unit) < 1e-12);
        // Ê has 8 terms for the 2-point pair groupoid
        let nnz = dual.e_hat.iter().filter(|x| x.norm() > 1e-12).count();
        assert_eq!(nnz, 8);
    }

    #[test]
    fn biduality_on_examples() {
        let t = tol();
        for (p, dl, phi) in [
            {
                let (p, dl) = gen_group_algebra(&GroupTable::cyclic(2)).unwrap();
                (p, dl, None)
            },
            {
                let (p, dl) = gen_groupoid_convolution(&pair_groupoid(2)).unwrap();
                (p, dl, None)
            },
            {
                let (p, dl) = gen_groupoid_function(&pair_groupoid(2)).unwrap();
                let labels = p.labels.clone();
                let idx = |l: &str| labels.iter().position(|x| x == l).unwrap();
                let mut phi = zvec(4);
                phi[idx("d(1,1)")] = cr(1.0);
                phi[idx("d(1,2)")] = cr(2.0);
                phi[idx("d(2,1)")] = cr(1.0);
                phi[idx("d(2,2)")] = cr(2.0);
                (p, dl, Some(phi))
            },
        ] {
            let (bundle, counit) = pipeline_bundle(&p, &dl, phi.as_ref());
            let rep = biduality_check(&p, &dl, &bundle, &counit, &t).unwrap();
            assert!(rep.passed(), "{}: {}", p.name, rep.to_text(1e-9));
        }
    }
}
