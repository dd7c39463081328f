//! Staged verification driver: algebra axioms → comultiplication → canonical
//! idempotent and legs → integrals and modular data → GNS operators and the
//! final certificate. Each stage's checks land in one ordered report under a
//! stage prefix; the first failing stage stops the run.

use crate::algebra::AlgebraPresentation;
use crate::coalgebra::{
    self, Comultiplication, LegAntipodes, LegData,
};
use crate::gns::{
    self, BaseAlgebra, CertificateInputs, DeltaOps, GnsSpace, ModularData, WData,
};
use crate::integrals::{self, IntegralBundle};
use crate::linalg::CVec;
use crate::report::VerificationReport;
use crate::tol::Tolerance;

/// How far to run the pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Stage {
    Algebra,
    Coalgebra,
    Integrals,
    GnsOperators,
}

impl Stage {
    pub fn parse(s: &str) -> Option<Stage> {
        match s {
            "algebra" => Some(Stage::Algebra),
            "coalgebra" => Some(Stage::Coalgebra),
            "integrals" => Some(Stage::Integrals),
            "gns_operators" | "gns" => Some(Stage::GnsOperators),
            _ => None,
        }
    }
}

/// Everything the pipeline constructs, available when all requested stages
/// pass.
pub struct PipelineData {
    pub e: CVec,
    pub legs: LegData,
    pub anti: LegAntipodes,
    pub nu: CVec,
    pub mu: CVec,
    pub counit: CVec,
    pub bundle: Option<IntegralBundle>,
    pub gns: Option<GnsSpace>,
    pub base_b: Option<BaseAlgebra>,
    pub base_c: Option<BaseAlgebra>,
    pub jhat_b: Option<crate::linalg::CMat>,
    pub wdata: Option<WData>,
    pub modular: Option<ModularData>,
    pub delta_ops: Option<DeltaOps>,
}

/// Run the verification pipeline through `stage`.
///
/// Never returns an error: construction failures become failing checks in the
/// report, and the run stops at the end of the first failed stage.
pub fn run_pipeline(
    p: &AlgebraPresentation,
    dl: &Comultiplication,
    user_phi: Option<&CVec>,
    user_psi: Option<&CVec>,
    stage: Stage,
    tol: &Tolerance,
) -> (VerificationReport, Option<PipelineData>) {
    let mut rep = VerificationReport::new();

    rep.absorb("algebra.", p.validate(tol));
    if !rep.passed() || stage < Stage::Coalgebra {
        return (rep, None);
    }

    rep.absorb("coalgebra.", coalgebra::validate_comultiplication(p, dl, tol));
    if !rep.passed() {
        return (rep, None);
    }
    let (e, erep) = coalgebra::compute_canonical_idempotent(p, dl, tol);
    rep.absorb("coalgebra.", erep);
    if !rep.passed() {
        return (rep, None);
    }
    let legs = match coalgebra::extract_legs(p, dl, &e, tol) {
        Ok((legs, lrep)) => {
            rep.absorb("coalgebra.", lrep);
            legs
        }
        Err(err) => {
            rep.fail("coalgebra.extract_legs", err.to_string());
            return (rep, None);
        }
    };
    if !rep.passed() {
        return (rep, None);
    }
    let anti = match coalgebra::solve_leg_antipodes(p, &e, &legs, tol) {
        Ok((anti, arep)) => {
            rep.absorb("coalgebra.", arep);
            anti
        }
        Err(err) => {
            rep.fail("coalgebra.leg_antipodes", err.to_string());
            return (rep, None);
        }
    };
    let (nu, mu) = match coalgebra::distinguished_functionals(p, &legs, &anti, tol) {
        Ok((nu, mu, drep)) => {
            rep.absorb("coalgebra.", drep);
            (nu, mu)
        }
        Err(err) => {
            rep.fail("coalgebra.distinguished_functionals", err.to_string());
            return (rep, None);
        }
    };
    let counit = match coalgebra::compute_counit(p, dl, tol) {
        Ok((eps, crep)) => {
            rep.absorb("coalgebra.", crep);
            eps
        }
        Err(err) => {
            rep.fail("coalgebra.counit", err.to_string());
            return (rep, None);
        }
    };
    if !rep.passed() {
        return (rep, None);
    }
    let mut data = PipelineData {
        e,
        legs,
        anti,
        nu,
        mu,
        counit,
        bundle: None,
        gns: None,
        base_b: None,
        base_c: None,
        jhat_b: None,
        wdata: None,
        modular: None,
        delta_ops: None,
    };
    if stage < Stage::Integrals {
        return (rep, Some(data));
    }

    // ------------------------------------------------------------ integrals
    let (cones, phi) = match integrals::find_integrals(p, dl, &data.legs, user_phi, tol) {
        Ok((cones, phi, frep)) => {
            rep.absorb("integrals.", frep);
            (cones, phi)
        }
        Err(err) => {
            rep.fail("integrals.find_integrals", err.to_string());
            return (rep, None);
        }
    };
    if !rep.passed() {
        return (rep, None);
    }
    let (s, s_inv) =
        match integrals::antipode_from_integral(p, dl, &data.legs, &data.anti, &phi, tol) {
            Ok((s, s_inv, arep)) => {
                rep.absorb("integrals.", arep);
                (s, s_inv)
            }
            Err(err) => {
                rep.fail("integrals.antipode", err.to_string());
                return (rep, None);
            }
        };
    let (sigma, sigma_inv) = match integrals::modular_automorphism(p, &phi, tol) {
        Ok((sigma, sigma_inv, srep)) => {
            rep.absorb("integrals.", srep);
            (sigma, sigma_inv)
        }
        Err(err) => {
            rep.fail("integrals.modular_automorphism", err.to_string());
            return (rep, None);
        }
    };
    let psi = s.t().dot(&phi);
    if let Some(user) = user_psi {
        rep.absorb(
            "integrals.",
            integrals::verify_user_psi(p, dl, &data.legs, &phi, user, tol),
        );
        if !rep.passed() {
            return (rep, None);
        }
    }
    let (delta, delta_inv, delta_selfadjoint) = match integrals::modular_element(p, &phi, &psi, tol)
    {
        Ok((delta, delta_inv, sa, mrep)) => {
            rep.absorb("integrals.", mrep);
            (delta, delta_inv, sa)
        }
        Err(err) => {
            rep.fail("integrals.modular_element", err.to_string());
            return (rep, None);
        }
    };
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
        delta_selfadjoint,
        quasi_invariant: false,
        left_cone_dim: cones.left.len(),
        right_cone_dim: cones.right.len(),
    };
    rep.absorb(
        "integrals.",
        integrals::relation_suite(
            p, dl, &data.e, &data.legs, &data.anti, &data.nu, &data.mu, &bundle, tol,
        ),
    );
    let (quasi_invariant, qrep) =
        integrals::quasi_invariance_suite(p, dl, &data.e, &data.legs, &data.nu, &bundle, tol);
    bundle.quasi_invariant = quasi_invariant;
    rep.absorb("integrals.", qrep);
    if !rep.passed() {
        return (rep, None);
    }
    data.bundle = Some(bundle);
    if stage < Stage::GnsOperators {
        return (rep, Some(data));
    }

    // -------------------------------------------------------- gns operators
    let bundle = data.bundle.as_ref().expect("set above");
    let gns_space = match gns::build_gns(p, &bundle.phi, tol) {
        Ok((g, grep)) => {
            rep.absorb("gns.", grep);
            g
        }
        Err(err) => {
            rep.fail("gns.build_gns", err.to_string());
            return (rep, None);
        }
    };
    let base_b = match gns::build_base(p, &data.legs.b, &data.nu, "B", tol) {
        Ok(b) => b,
        Err(err) => {
            rep.fail("gns.base_b", err.to_string());
            return (rep, None);
        }
    };
    let base_c = match gns::build_base(p, &data.legs.c, &data.mu, "C", tol) {
        Ok(c) => c,
        Err(err) => {
            rep.fail("gns.base_c", err.to_string());
            return (rep, None);
        }
    };
    let jhat = match gns::base_bridge(p, &data.anti, &base_b, &base_c, tol) {
        Ok((j, brep)) => {
            rep.absorb("gns.", brep);
            j
        }
        Err(err) => {
            rep.fail("gns.base_bridge", err.to_string());
            return (rep, None);
        }
    };
    rep.absorb(
        "gns.",
        gns::embed_maps(p, dl, &data.legs, bundle, &gns_space, &base_b, &base_c, tol),
    );
    if !rep.passed() {
        return (rep, None);
    }
    let wdata = match gns::build_w(p, dl, &data.e, bundle, &gns_space, tol) {
        Ok((w, wrep)) => {
            rep.absorb("gns.", wrep);
            w
        }
        Err(err) => {
            rep.fail("gns.build_w", err.to_string());
            return (rep, None);
        }
    };
    let modular = match gns::modular_operators(p, &gns_space, bundle, tol) {
        Ok((m, mrep)) => {
            rep.absorb("gns.", mrep);
            m
        }
        Err(err) => {
            rep.fail("gns.modular_operators", err.to_string());
            return (rep, None);
        }
    };
    let (delta_ops, drep) = gns::delta_space(p, &gns_space, bundle, tol);
    rep.absorb("gns.", drep);
    rep.absorb(
        "gns.",
        gns::commutation_suite(p, &gns_space, &wdata, &modular, delta_ops.as_ref(), tol),
    );
    if !rep.passed() {
        return (rep, None);
    }

    let cert = gns::lcqg_certificate(
        &CertificateInputs {
            p,
            dl,
            e: &data.e,
            legs: &data.legs,
            anti: &data.anti,
            nu: &data.nu,
            mu: &data.mu,
            bundle,
            gns: &gns_space,
            base_b: &base_b,
            base_c: &base_c,
            wdata: &wdata,
            modular: &modular,
            delta_ops: delta_ops.as_ref(),
            quasi_invariant: bundle.quasi_invariant,
        },
        tol,
    );
    let cert_passed = cert.passed();
    let cert_residual = cert.max_residual();
    rep.absorb("certificate.", cert);
    // summary line for the final verdict of the axiom checklist
    rep.checks.push(crate::report::Check {
        name: "lcqg_certificate".into(),
        status: if cert_passed {
            crate::report::Status::Pass
        } else {
            crate::report::Status::Fail
        },
        residual: cert_residual,
        detail: if cert_passed { "PASS".into() } else { "FAIL".into() },
    });
    let ok = rep.passed();
    data.gns = Some(gns_space);
    data.base_b = Some(base_b);
    data.base_c = Some(base_c);
    data.jhat_b = Some(jhat);
    data.wdata = Some(wdata);
    data.modular = Some(modular);
    data.delta_ops = delta_ops;
    (rep, if ok { Some(data) } else { None })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groupoid::{
        gen_group_algebra, gen_groupoid_convolution, gen_groupoid_function, pair_groupoid,
        GroupTable,
    };
    use crate::linalg::cr;

    #[test]
    fn full_pipeline_passes_on_generators() {
        let tol = Tolerance::default();
        let cases = vec![
            gen_group_algebra(&GroupTable::cyclic(2)).unwrap(),
            gen_group_algebra(&GroupTable::cyclic(3)).unwrap(),
            gen_groupoid_convolution(&pair_groupoid(2)).unwrap(),
            gen_groupoid_function(&pair_groupoid(2)).unwrap(),
        ];
        for (p, dl) in &cases {
            let (rep, data) = run_pipeline(p, dl, None, None, Stage::GnsOperators, &tol);
            assert!(rep.passed(), "{}: {}", p.name, rep.to_text(1e-9));
            assert!(data.is_some());
        }
    }

    #[test]
    fn one_dimensional_algebra_passes() {
        // the scalars as a one-point groupoid: exercises every 1×1 edge case
        let tol = Tolerance::default();
        let (p, dl) =
            gen_groupoid_convolution(&crate::groupoid::pair_groupoid(1)).unwrap();
        let (rep, data) = run_pipeline(&p, &dl, None, None, Stage::GnsOperators, &tol);
        assert!(rep.passed(), "{}", rep.to_text(1e-9));
        assert!(data.is_some());
    }

    #[test]
    fn stage_gating_stops_early() {
        let tol = Tolerance::default();
        let (p, dl) = gen_group_algebra(&GroupTable::cyclic(2)).unwrap();
        let (rep, data) = run_pipeline(&p, &dl, None, None, Stage::Algebra, &tol);
        assert!(rep.passed());
        assert!(data.is_none());
        assert!(rep.checks.iter().all(|c| c.name.starts_with("algebra.")));
        let (rep, _) = run_pipeline(&p, &dl, None, None, Stage::Coalgebra, &tol);
        assert!(rep.checks.iter().any(|c| c.name.starts_with("coalgebra.")));
        assert!(!rep.checks.iter().any(|c| c.name.starts_with("integrals.")));
    }

    #[test]
    fn broken_algebra_fails_at_first_stage() {
        let tol = Tolerance::default();
        let (mut p, dl) = gen_group_algebra(&GroupTable::cyclic(2)).unwrap();
        p.mult[(0, 0, 0)] += cr(0.1);
        let (rep, data) = run_pipeline(&p, &dl, None, None, Stage::GnsOperators, &tol);
        assert!(!rep.passed());
        assert!(data.is_none());
        assert_eq!(rep.first_failure(), Some("algebra.associativity"));
    }

    #[test]
    fn reports_are_deterministic() {
        let tol = Tolerance::default();
        let (p, dl) = gen_groupoid_function(&pair_groupoid(2)).unwrap();
        let (rep1, _) = run_pipeline(&p, &dl, None, None, Stage::GnsOperators, &tol);
        let (rep2, _) = run_pipeline(&p, &dl, None, None, Stage::GnsOperators, &tol);
        let j1 = serde_json::to_string(&rep1.to_json(tol.abs_residual)).unwrap();
        let j2 = serde_json::to_string(&rep2.to_json(tol.abs_residual)).unwrap();
        assert_eq!(j1, j2);
    }
}
