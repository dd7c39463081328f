//! Acceptance suite: one test per criterion, each printing a pass line.
//!
//! The bundled examples are the three group algebras (ℤ₂, ℤ₃, S₃), the 2- and
//! 3-point pair-groupoid convolution and function algebras, and the disjoint
//! union ℤ₂ ⊔ (2-point pair groupoid); weighted variants of the dim-4
//! examples exercise nontrivial modular data.

use wqg_core::algebra::AlgebraPresentation;
use wqg_core::coalgebra::Comultiplication;
use wqg_core::groupoid::{
    self, gen_group_algebra, gen_groupoid_convolution, gen_groupoid_function, pair_groupoid,
    GroupTable,
};
use wqg_core::io;
use wqg_core::linalg::{self, cr, kron_vec, vec_dist, zvec, CVec};
use wqg_core::pipeline::{run_pipeline, PipelineData, Stage};
use wqg_core::{Status, Tolerance, VerificationReport};

struct Example {
    name: &'static str,
    p: AlgebraPresentation,
    dl: Comultiplication,
    phi: Option<CVec>,
    hopf: bool,
}

fn weighted_phi(p: &AlgebraPresentation, assoc: &[(&str, f64)]) -> CVec {
    let mut phi = zvec(p.dim);
    for (lab, v) in assoc {
        let i = p.labels.iter().position(|x| x == lab).unwrap();
        phi[i] = cr(*v);
    }
    phi
}

fn bundled() -> Vec<Example> {
    let union = groupoid::disjoint_union(
        &groupoid::group_as_groupoid(&GroupTable::cyclic(2)).unwrap(),
        &pair_groupoid(2),
    );
    let mk = |name: &'static str,
              pair: (AlgebraPresentation, Comultiplication),
              hopf: bool|
     -> Example {
        Example {
            name,
            p: pair.0,
            dl: pair.1,
            phi: None,
            hopf,
        }
    };
    vec![
        mk("z2", gen_group_algebra(&GroupTable::cyclic(2)).unwrap(), true),
        mk("z3", gen_group_algebra(&GroupTable::cyclic(3)).unwrap(), true),
        mk("s3", gen_group_algebra(&GroupTable::s3()).unwrap(), true),
        mk(
            "pair2-convolution",
            gen_groupoid_convolution(&pair_groupoid(2)).unwrap(),
            false,
        ),
        mk(
            "pair2-function",
            gen_groupoid_function(&pair_groupoid(2)).unwrap(),
            false,
        ),
        mk(
            "pair3-function",
            gen_groupoid_function(&pair_groupoid(3)).unwrap(),
            false,
        ),
        mk(
            "union6-convolution",
            gen_groupoid_convolution(&union).unwrap(),
            false,
        ),
    ]
}

fn weighted_examples() -> Vec<Example> {
    let (p, dl) = gen_groupoid_convolution(&pair_groupoid(2)).unwrap();
    let phi = weighted_phi(&p, &[("(1,1)", 1.0), ("(2,2)", 2.0)]);
    let conv = Example {
        name: "pair2-convolution-weighted",
        p,
        dl,
        phi: Some(phi),
        hopf: false,
    };
    let (p, dl) = gen_groupoid_function(&pair_groupoid(2)).unwrap();
    let phi = weighted_phi(
        &p,
        &[
            ("d(1,1)", 1.0),
            ("d(1,2)", 2.0),
            ("d(2,1)", 1.0),
            ("d(2,2)", 2.0),
        ],
    );
    let fun = Example {
        name: "pair2-function-weighted",
        p,
        dl,
        phi: Some(phi),
        hopf: false,
    };
    vec![conv, fun]
}

fn tol() -> Tolerance {
    Tolerance::default()
}

fn run(ex: &Example) -> (VerificationReport, PipelineData) {
    let (rep, data) = run_pipeline(
        &ex.p,
        &ex.dl,
        ex.phi.as_ref(),
        None,
        Stage::GnsOperators,
        &tol(),
    );
    assert!(
        rep.passed(),
        "{} pipeline failed:\n{}",
        ex.name,
        rep.to_text(1e-9)
    );
    (rep, data.expect("pipeline data"))
}

fn residual_of(rep: &VerificationReport, name: &str) -> f64 {
    let c = rep
        .checks
        .iter()
        .find(|c| c.name == name)
        .unwrap_or_else(|| panic!("check {name} missing"));
    assert_eq!(c.status, Status::Pass, "check {name} did not pass");
    c.residual
}

#[test]
fn criterion_01_axiom_suites() {
    let t = tol();
    for ex in bundled() {
        let rep = ex.p.validate(&t);
        assert!(rep.passed(), "{}: {}", ex.name, rep.to_text(1e-9));
        assert!(
            rep.max_residual() < 1e-10,
            "{}: algebra residual {}",
            ex.name,
            rep.max_residual()
        );
        let rep = wqg_core::coalgebra::validate_comultiplication(&ex.p, &ex.dl, &t);
        assert!(rep.passed(), "{}: {}", ex.name, rep.to_text(1e-9));
        assert!(rep.max_residual() < 1e-10);
    }
    println!("acceptance 01 (axiom suites on all six generators): PASS");
}

#[test]
fn criterion_02_canonical_idempotent() {
    let t = tol();
    for ex in bundled() {
        let (e, erep) = wqg_core::coalgebra::compute_canonical_idempotent(&ex.p, &ex.dl, &t);
        assert!(erep.passed(), "{}: {}", ex.name, erep.to_text(1e-9));
        for name in [
            "idempotent_selfadjoint",
            "idempotent_squared",
            "idempotent_unit_left",
            "idempotent_unit_right",
            "weak_comultiplicativity_left",
            "weak_comultiplicativity_flip",
            "weak_comultiplicativity_right",
        ] {
            assert!(residual_of(&erep, name) < 1e-9, "{}: {name}", ex.name);
        }
        if ex.hopf {
            // group algebras: E = 1⊗1 exactly, entry by entry
            let unit2 = kron_vec(&ex.p.unit, &ex.p.unit);
            assert_eq!(e.len(), unit2.len());
            for (a, b) in e.iter().zip(unit2.iter()) {
                assert_eq!(a, b, "{}: E must equal 1⊗1 exactly", ex.name);
            }
        }
    }
    println!("acceptance 02 (canonical idempotent properties, E = 1⊗1 on Hopf cases): PASS");
}

// ---------------------------------------------------------------------------
// criterion 3: independent brute-force oracle for the invariant cone
// dimensions, using only hand-rolled Gaussian elimination (no LAPACK, none of
// the library's null-space machinery).
// ---------------------------------------------------------------------------

type Cx = (f64, f64);

fn cx_mul(a: Cx, b: Cx) -> Cx {
    (a.0 * b.0 - a.1 * b.1, a.0 * b.1 + a.1 * b.0)
}
fn cx_sub(a: Cx, b: Cx) -> Cx {
    (a.0 - b.0, a.1 - b.1)
}
fn cx_div(a: Cx, b: Cx) -> Cx {
    let d = b.0 * b.0 + b.1 * b.1;
    ((a.0 * b.0 + a.1 * b.1) / d, (a.1 * b.0 - a.0 * b.1) / d)
}
fn cx_abs(a: Cx) -> f64 {
    (a.0 * a.0 + a.1 * a.1).sqrt()
}

/// Row-reduce a complex matrix in place; returns its rank.
fn gauss_complex(rows: &mut Vec<Vec<Cx>>, tol: f64) -> usize {
    let nrows = rows.len();
    if nrows == 0 {
        return 0;
    }
    let ncols = rows[0].len();
    let mut rank = 0;
    for col in 0..ncols {
        let mut pivot = None;
        let mut best = tol;
        for r in rank..nrows {
            if cx_abs(rows[r][col]) > best {
                best = cx_abs(rows[r][col]);
                pivot = Some(r);
            }
        }
        let Some(pr) = pivot else { continue };
        rows.swap(rank, pr);
        let p = rows[rank][col];
        for c in 0..ncols {
            rows[rank][c] = cx_div(rows[rank][c], p);
        }
        for r in 0..nrows {
            if r != rank && cx_abs(rows[r][col]) > 0.0 {
                let f = rows[r][col];
                for c in 0..ncols {
                    let sub = cx_mul(f, rows[rank][c]);
                    rows[r][c] = cx_sub(rows[r][c], sub);
                }
            }
        }
        rank += 1;
        if rank == nrows {
            break;
        }
    }
    rank
}

/// Row-reduce a real matrix in place; returns its rank.
fn gauss_real(rows: &mut Vec<Vec<f64>>, tol: f64) -> usize {
    let nrows = rows.len();
    if nrows == 0 {
        return 0;
    }
    let ncols = rows[0].len();
    let mut rank = 0;
    for col in 0..ncols {
        let mut pivot = None;
        let mut best = tol;
        for r in rank..nrows {
            if rows[r][col].abs() > best {
                best = rows[r][col].abs();
                pivot = Some(r);
            }
        }
        let Some(pr) = pivot else { continue };
        rows.swap(rank, pr);
        let p = rows[rank][col];
        for c in 0..ncols {
            rows[rank][c] /= p;
        }
        for r in 0..nrows {
            if r != rank && rows[r][col] != 0.0 {
                let f = rows[r][col];
                for c in 0..ncols {
                    rows[r][c] -= f * rows[rank][c];
                }
            }
        }
        rank += 1;
        if rank == nrows {
            break;
        }
    }
    rank
}

/// Brute-force dimension of the real vector space of Hermitian left-invariant
/// functionals, straight from the structure constants.
fn brute_force_left_cone_dim(p: &AlgebraPresentation, dl: &Comultiplication) -> usize {
    let n = p.dim;
    let eps = 1e-9;
    // E = Δ(1) by direct contraction
    let mut e = vec![(0.0, 0.0); n * n];
    for k in 0..n {
        let uk = p.unit[k];
        if uk.norm() == 0.0 {
            continue;
        }
        for ij in 0..n * n {
            let d = dl.delta[(ij, k)];
            e[ij] = (e[ij].0 + uk.re * d.re - uk.im * d.im, e[ij].1 + uk.re * d.im + uk.im * d.re);
        }
    }
    // second-leg slices of E span C: rows c_i[j] = E[(i,j)]
    let c_rows: Vec<Vec<Cx>> = (0..n)
        .map(|i| (0..n).map(|j| e[i * n + j]).collect())
        .collect();
    // complement of span C under the Hermitian pairing, by elimination: find
    // all z with Σ_j conj(c_i[j]) z_j = 0, via the real null space of the
    // stacked system
    let mut comp_rows: Vec<Vec<Cx>> = c_rows
        .iter()
        .map(|row| row.iter().map(|&(re, im)| (re, -im)).collect())
        .collect();
    let rank_c = gauss_complex(&mut comp_rows, eps);
    // back-substitute to enumerate a complement basis: free columns of the
    // reduced system give null vectors
    let mut pivots = Vec::new();
    {
        let mut r = 0;
        for col in 0..n {
            if r < rank_c && cx_abs(comp_rows[r][col]) > 0.5 {
                pivots.push(col);
                r += 1;
            }
        }
    }
    let mut complement: Vec<Vec<Cx>> = Vec::new();
    for free in 0..n {
        if pivots.contains(&free) {
            continue;
        }
        let mut z = vec![(0.0, 0.0); n];
        z[free] = (1.0, 0.0);
        for (r, &pc) in pivots.iter().enumerate() {
            z[pc] = cx_sub((0.0, 0.0), comp_rows[r][free]);
        }
        complement.push(z);
    }

    // constraints on φ (2n real unknowns): for each basis element k and each
    // complement vector z: Σ_i conj(z_i) · (Σ_j Δ[k][(i,j)] φ_j) = 0,
    // plus the Hermitian condition star^T φ = conj(φ)
    let mut real_rows: Vec<Vec<f64>> = Vec::new();
    for k in 0..n {
        for z in &complement {
            // complex row a[j] = Σ_i conj(z_i) Δ[k][(i,j)]
            let mut a = vec![(0.0, 0.0); n];
            for i in 0..n {
                let zc = (z[i].0, -z[i].1);
                for j in 0..n {
                    let d = dl.delta[(i * n + j, k)];
                    let term = cx_mul(zc, (d.re, d.im));
                    a[j] = (a[j].0 + term.0, a[j].1 + term.1);
                }
            }
            let mut row_re = vec![0.0; 2 * n];
            let mut row_im = vec![0.0; 2 * n];
            for j in 0..n {
                row_re[j] = a[j].0;
                row_re[n + j] = -a[j].1;
                row_im[j] = a[j].1;
                row_im[n + j] = a[j].0;
            }
            real_rows.push(row_re);
            real_rows.push(row_im);
        }
    }
    for i in 0..n {
        let mut row_re = vec![0.0; 2 * n];
        let mut row_im = vec![0.0; 2 * n];
        for j in 0..n {
            let s = p.star[(i, j)]; // star^T[j][i] = star[(i,j)]? transpose below
            let _ = s;
        }
        // (star^T φ)_i = Σ_j star[(j, i)]^T ... use star^T[i][j] = star[(j, i)]
        for j in 0..n {
            let s = p.star[(j, i)];
            row_re[j] += s.re;
            row_re[n + j] += -s.im;
            row_im[j] += s.im;
            row_im[n + j] += s.re;
        }
        row_re[i] -= 1.0;
        row_im[n + i] += 1.0;
        real_rows.push(row_re);
        real_rows.push(row_im);
    }
    let rank = gauss_real(&mut real_rows, eps);
    2 * n - rank
}

#[test]
fn criterion_03_integral_cone_dimensions() {
    let t = tol();
    // frozen expected dimensions, computed by the oracle below
    let expect = [("z2", 1usize), ("pair2-convolution", 2), ("pair2-function", 2), ("pair3-function", 3)];
    for (name, want) in expect {
        let ex = bundled().into_iter().find(|e| e.name == name).unwrap();
        let oracle = brute_force_left_cone_dim(&ex.p, &ex.dl);
        assert_eq!(oracle, want, "{name}: oracle cone dim");
        // the library agrees with the oracle
        let (_, data) = run(&ex);
        let bundle = data.bundle.as_ref().unwrap();
        assert_eq!(bundle.left_cone_dim, want, "{name}: library cone dim");
    }
    let _ = t;
    println!("acceptance 03 (integral cone dimensions match the brute-force oracle): PASS");
}

#[test]
fn criterion_04_antipode() {
    for ex in bundled() {
        let (rep, data) = run(&ex);
        let bundle = data.bundle.as_ref().unwrap();
        // Prop-style cross-checks: legs (4), comultiplication twist (5),
        // star twist (6) — all below 1e-9 on every example
        for name in [
            "integrals.antipode_restricts_to_s_b",
            "integrals.antipode_restricts_to_s_c",
            "integrals.antipode_comultiplication",
            "integrals.antipode_star_twist",
        ] {
            assert!(residual_of(&rep, name) < 1e-9, "{}: {name}", ex.name);
        }
        if ex.name == "pair2-convolution" {
            // solver recovers S(e_ij) = e_ji
            let idx = |l: &str| ex.p.labels.iter().position(|x| x == l).unwrap();
            for (from, to) in [("(1,2)", "(2,1)"), ("(2,1)", "(1,2)"), ("(1,1)", "(1,1)")] {
                let mut v = zvec(ex.p.dim);
                v[idx(from)] = cr(1.0);
                let mut w = zvec(ex.p.dim);
                w[idx(to)] = cr(1.0);
                assert!(
                    vec_dist(&bundle.s.dot(&v), &w) < 1e-10,
                    "S({from}) ≠ {to}"
                );
            }
        }
        if ex.hopf {
            // S is the group-inverse permutation: S² = id and S is 0/1
            let s2 = bundle.s.dot(&bundle.s);
            assert!(linalg::mat_dist(&s2, &linalg::eye(ex.p.dim)) < 1e-10, "{}", ex.name);
            for v in bundle.s.iter() {
                assert!(v.norm() < 1e-10 || (v - cr(1.0)).norm() < 1e-10);
            }
        }
    }
    println!("acceptance 04 (antipode recovery and cross-checks): PASS");
}

#[test]
fn criterion_05_modular_data() {
    for ex in weighted_examples() {
        let (_, data) = run(&ex);
        let bundle = data.bundle.as_ref().unwrap();
        let idx = |l: &str| ex.p.labels.iter().position(|x| x == l).unwrap();
        if ex.name == "pair2-convolution-weighted" {
            // σ(e12) = (1/2)e12 and δ = 1 (hand-checked via φ(ab) = φ(bσ(a)))
            let mut e12 = zvec(4);
            e12[idx("(1,2)")] = cr(1.0);
            assert!(vec_dist(&bundle.sigma.dot(&e12), &e12.mapv(|x| x * cr(0.5))) < 1e-9);
            assert!(vec_dist(&bundle.delta, &ex.p.unit) < 1e-9);
        } else {
            // δ = (1, 1/2, 2, 1) on the arrow basis and σ = id
            for (lab, v) in [
                ("d(1,1)", 1.0),
                ("d(1,2)", 0.5),
                ("d(2,1)", 2.0),
                ("d(2,2)", 1.0),
            ] {
                assert!((bundle.delta[idx(lab)] - cr(v)).norm() < 1e-9, "{lab}");
            }
            assert!(linalg::mat_dist(&bundle.sigma, &linalg::eye(4)) < 1e-9);
        }
    }
    println!("acceptance 05 (modular data on the weighted examples): PASS");
}

#[test]
fn criterion_06_appendix_suite() {
    for ex in bundled().into_iter().chain(weighted_examples()) {
        let (rep, _) = run(&ex);
        // every relation-suite and quasi-invariance identity passes < 1e-9,
        // including the six Δ(δ) identities and (σ^{-1}⊗σ')(Δx) = Δ(S^{-2}x)
        let mut seen_deltadelta = 0;
        let mut seen_comult_exchange = false;
        for c in &rep.checks {
            if !c.name.starts_with("integrals.") {
                continue;
            }
            assert_ne!(c.status, Status::Fail, "{}: {}", ex.name, c.name);
            if c.status == Status::Pass && c.residual.is_finite() {
                assert!(c.residual < 1e-9, "{}: {} = {}", ex.name, c.name, c.residual);
            }
            if c.name.starts_with("integrals.deltadelta_") && !c.name.contains("prep") {
                assert_eq!(c.status, Status::Pass);
                seen_deltadelta += 1;
            }
            if c.name == "integrals.sigma_sigma_prime_comult" {
                assert_eq!(c.status, Status::Pass, "{}: must not be skipped", ex.name);
                seen_comult_exchange = true;
            }
        }
        assert_eq!(seen_deltadelta, 6, "{}: six Δ(δ) identities", ex.name);
        assert!(seen_comult_exchange, "{}", ex.name);
    }
    println!("acceptance 06 (relation and quasi-invariance suites): PASS");
}

#[test]
fn criterion_07_w_operator() {
    for ex in bundled().into_iter().chain(weighted_examples()) {
        let (rep, data) = run(&ex);
        for name in [
            "gns.w_star_w_is_e",
            "gns.w_partial_isometry",
            "gns.w_implements_comultiplication",
            "gns.w_nabla_p",
            "gns.one_parameter_identity",
        ] {
            assert!(residual_of(&rep, name) < 1e-9, "{}: {name}", ex.name);
        }
        let wdata = data.wdata.as_ref().unwrap();
        let w = &wdata.w;
        let n2 = ex.p.dim * ex.p.dim;
        let unitary_defect =
            linalg::mat_dist(&w.dot(&linalg::dagger(w)), &linalg::eye(n2));
        let rank = linalg::rank(w, &tol()).unwrap();
        assert_eq!(
            rank,
            linalg::rank(&wdata.e_op, &tol()).unwrap(),
            "{}: rank(W) = rank(E_op)",
            ex.name
        );
        if ex.hopf {
            assert!(unitary_defect < 1e-9, "{}: W must be unitary", ex.name);
            assert_eq!(rank, n2);
        } else {
            assert!(rank < n2, "{}: W must be strictly rank-deficient", ex.name);
            assert!(unitary_defect > 1e-3, "{}", ex.name);
        }
    }
    println!("acceptance 07 (partial isometry W and its commutation identities): PASS");
}

#[test]
fn criterion_08_certificate() {
    for ex in bundled().into_iter().chain(weighted_examples()) {
        let (rep, _) = run(&ex);
        let cert: Vec<_> = rep
            .checks
            .iter()
            .filter(|c| c.name.starts_with("certificate."))
            .collect();
        assert!(!cert.is_empty());
        for c in &cert {
            assert_ne!(c.status, Status::Fail, "{}: {}", ex.name, c.name);
        }
        let sandwich = cert
            .iter()
            .find(|c| c.name == "certificate.radon_nikodym_sandwich")
            .unwrap();
        assert_eq!(
            sandwich.status,
            Status::Pass,
            "{}: the Radon–Nikodym sandwich must be verified, not skipped",
            ex.name
        );
        assert!(sandwich.residual < 1e-9);
    }
    println!("acceptance 08 (quantum-groupoid certificate on all bundled examples): PASS");
}

#[test]
fn criterion_09_duality() {
    let t = tol();
    for ex in bundled() {
        let (_, data) = run(&ex);
        let bundle = data.bundle.as_ref().unwrap();
        let rep =
            wqg_core::duality::biduality_check(&ex.p, &ex.dl, bundle, &data.counit, &t).unwrap();
        assert!(rep.passed(), "{}: {}", ex.name, rep.to_text(1e-9));
        for c in &rep.checks {
            if c.name.starts_with("bidual.") && c.status == Status::Pass && c.residual.is_finite()
            {
                assert!(c.residual < 1e-9, "{}: {} = {}", ex.name, c.name, c.residual);
            }
        }
    }
    // dualize(convolution algebra of G) = function algebra of G for every
    // bundled groupoid, arrow for arrow
    let groupoids = vec![
        ("pair2", pair_groupoid(2)),
        ("pair3", pair_groupoid(3)),
        (
            "z2",
            groupoid::group_as_groupoid(&GroupTable::cyclic(2)).unwrap(),
        ),
        (
            "union",
            groupoid::disjoint_union(
                &groupoid::group_as_groupoid(&GroupTable::cyclic(2)).unwrap(),
                &pair_groupoid(2),
            ),
        ),
    ];
    for (gname, g) in groupoids {
        let (p, dl) = gen_groupoid_convolution(&g).unwrap();
        let (rep, data) = run_pipeline(&p, &dl, None, None, Stage::GnsOperators, &t);
        assert!(rep.passed(), "{gname}: {}", rep.to_text(1e-9));
        let data = data.unwrap();
        let (dual, _) = wqg_core::duality::dualize(
            &p,
            &dl,
            data.bundle.as_ref().unwrap(),
            &data.counit,
            &t,
        )
        .unwrap();
        let (fp, fdl) = gen_groupoid_function(&g).unwrap();
        let n = p.dim;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    assert!(
                        (dual.pres.mult[(i, j, k)] - fp.mult[(i, j, k)]).norm() < 1e-12,
                        "{gname}: mult tensor"
                    );
                }
            }
        }
        assert!(linalg::mat_dist(&dual.comult.delta, &fdl.delta) < 1e-12);
        assert!(linalg::mat_dist(&dual.pres.star, &fp.star) < 1e-12);
        assert!(vec_dist(&dual.pres.unit, &fp.unit) < 1e-12);
    }
    println!("acceptance 09 (duality, biduality, and Pontryagin matching): PASS");
}

/// The five documented single-entry perturbations. Each is applied to a
/// serialized presentation document, re-parsed, and run through the pipeline;
/// the verdict must be FAIL and the first violated check is the frozen name.
#[test]
fn criterion_10_fault_injection() {
    let t = tol();
    let cases: Vec<(&str, serde_json::Value, &str)> = {
        let (z2p, z2d) = gen_group_algebra(&GroupTable::cyclic(2)).unwrap();
        let (fp, fd) = gen_groupoid_function(&pair_groupoid(2)).unwrap();
        let fphi = weighted_phi(
            &fp,
            &[
                ("d(1,1)", 1.0),
                ("d(1,2)", 2.0),
                ("d(2,1)", 1.0),
                ("d(2,2)", 2.0),
            ],
        );
        // ψ = φ∘S: ψ(δ_(i,j)) = u(i) = (1, 1, 2, 2)
        let fpsi = weighted_phi(
            &fp,
            &[
                ("d(1,1)", 1.0),
                ("d(1,2)", 1.0),
                ("d(2,1)", 2.0),
                ("d(2,2)", 2.0),
            ],
        );

        let mut assoc = io::serialize_presentation(&z2p, &z2d, None, None);
        // 1. associativity: bump the coefficient of e in e·e
        assoc["mult"][0][3] = serde_json::json!(1.1);

        let mut coassoc = io::serialize_presentation(&fp, &fd, None, None);
        // 2. coassociativity: bump one term of Δ(δ_(1,1))
        let target = coassoc["comult"].as_array().unwrap().iter().position(|e| {
            let a = e.as_array().unwrap();
            a[0] == 0 && a[1] == 0 && a[2] == 0
        });
        coassoc["comult"][target.unwrap()][3] = serde_json::json!(1.1);

        let mut idem = io::serialize_presentation(&z2p, &z2d, None, None);
        // 3. canonical-idempotent defect: scale Δ(e) by 1.05. Coassociativity
        //    survives a scaling of one group-like image, and E² − E =
        //    Δ(1)Δ(1) − Δ(1·1) is exactly the homomorphism defect at the
        //    unit, so that is the first (and defining) violated check.
        let target = idem["comult"].as_array().unwrap().iter().position(|e| {
            let a = e.as_array().unwrap();
            a[0] == 0 && a[1] == 0 && a[2] == 0
        });
        idem["comult"][target.unwrap()][3] = serde_json::json!(1.05);

        // 4. integral invariance: perturb one entry of a valid φ
        let mut phi_bad = fphi.clone();
        phi_bad[1] += cr(0.1);
        let bad_phi = io::serialize_presentation(&fp, &fd, Some(&phi_bad), None);

        // 5. antipode consistency: perturb one entry of ψ = φ∘S, breaking the
        //    ψ-sided characterization of S (its right invariance)
        let mut psi_bad = fpsi.clone();
        psi_bad[0] += cr(0.1);
        let bad_psi = io::serialize_presentation(&fp, &fd, Some(&fphi), Some(&psi_bad));

        vec![
            ("associativity", assoc, "algebra.associativity"),
            ("coassociativity", coassoc, "coalgebra.coassociativity"),
            ("idempotent", idem, "coalgebra.comult_homomorphism"),
            ("integral invariance", bad_phi, "integrals.phi_left_invariance"),
            ("antipode consistency", bad_psi, "integrals.psi_right_invariance"),
        ]
    };
    for (what, doc, expected_first) in cases {
        let text = serde_json::to_string(&doc).unwrap();
        let parsed = io::parse_presentation(&text).unwrap();
        let (rep, data) = run_pipeline(
            &parsed.pres,
            &parsed.comult,
            parsed.phi.as_ref(),
            parsed.psi.as_ref(),
            Stage::GnsOperators,
            &t,
        );
        assert!(!rep.passed(), "{what}: must fail");
        assert!(data.is_none());
        assert_eq!(
            rep.first_failure(),
            Some(expected_first),
            "{what}: first violated check"
        );
    }
    println!("acceptance 10 (fault injection names the first violated check): PASS");
}

#[test]
fn pipeline_runs_complete_quickly() {
    // the largest bundled instance (dim 9, W on 81×81) end to end
    let (p, dl) = gen_groupoid_function(&pair_groupoid(3)).unwrap();
    let start = std::time::Instant::now();
    let (rep, _) = run_pipeline(&p, &dl, None, None, Stage::GnsOperators, &tol());
    assert!(rep.passed());
    let elapsed = start.elapsed();
    assert!(
        elapsed.as_secs_f64() < 10.0,
        "full pipeline took {elapsed:?}"
    );
    println!("acceptance perf (dim-9 pipeline in {elapsed:?} < 10 s): PASS");
}
