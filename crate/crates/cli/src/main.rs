//! Command-line interface: generate example presentations, verify them
//! through the full pipeline, dualize, and re-render stored reports.
//!
//! Exit codes: 0 = verdict pass, 1 = verdict fail, 2 = usage or schema error.

use std::io::{Read, Write};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use wqg_core::duality;
use wqg_core::groupoid::{
    gen_group_algebra, gen_groupoid_convolution, gen_groupoid_function, pair_groupoid, GroupTable,
};
use wqg_core::io::{parse_presentation, serialize_presentation};
use wqg_core::linalg::{cr, zvec, CVec};
use wqg_core::pipeline::{run_pipeline, Stage};
use wqg_core::{Tolerance, VerificationReport};

#[derive(Parser)]
#[command(
    name = "wqg",
    about = "Construct and verify finite-dimensional quantum groupoids from weak Hopf *-algebra presentations",
    version
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ReprKind {
    Convolution,
    Function,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum StageArg {
    Algebra,
    Coalgebra,
    Integrals,
    GnsOperators,
    Duality,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate a bundled example family as a presentation file.
    Generate {
        /// Family: "group" or "pair-groupoid".
        family: String,
        /// Group name for the group family: z2, z3, ..., or s3.
        #[arg(long)]
        name: Option<String>,
        /// Number of points for the pair groupoid.
        #[arg(long, default_value_t = 2)]
        points: usize,
        /// Representation of the pair groupoid.
        #[arg(long, value_enum, default_value_t = ReprKind::Function)]
        repr: ReprKind,
        /// Comma-separated positive weights (one per point) selecting the
        /// integral to embed as "phi".
        #[arg(long)]
        weights: Option<String>,
        /// Output file, or "-" for stdout.
        #[arg(short, long, default_value = "-")]
        output: String,
    },
    /// Run the verification pipeline on a presentation file.
    Verify {
        /// Input file, or "-" for stdin.
        file: String,
        /// Absolute residual tolerance (overrides WQG_TOL and the default 1e-9).
        #[arg(long)]
        tol: Option<f64>,
        /// Emit the report as JSON.
        #[arg(long, conflicts_with = "text")]
        json: bool,
        /// Emit the report as text (default).
        #[arg(long)]
        text: bool,
        /// Run only a prefix of the pipeline.
        #[arg(long, value_enum, default_value_t = StageArg::GnsOperators)]
        stage: StageArg,
    },
    /// Construct the dual presentation of a verified input.
    Dualize {
        /// Input file, or "-" for stdin.
        file: String,
        /// Output file, or "-" for stdout.
        #[arg(short, long, default_value = "-")]
        output: String,
    },
    /// Re-render a stored JSON report as text.
    Report {
        /// Report file, or "-" for stdin.
        file: String,
    },
}

fn read_input(path: &str) -> std::io::Result<String> {
    if path == "-" {
        let mut buf = String::new();
        std::io::stdin().read_to_string(&mut buf)?;
        Ok(buf)
    } else {
        std::fs::read_to_string(path)
    }
}

fn write_output(path: &str, content: &str) -> std::io::Result<()> {
    if path == "-" {
        std::io::stdout().write_all(content.as_bytes())?;
        std::io::stdout().write_all(b"\n")
    } else {
        std::fs::write(path, format!("{content}\n"))
    }
}

fn resolve_tolerance(flag: Option<f64>) -> Result<Tolerance, String> {
    let value = match flag {
        Some(v) => Some(v),
        None => match std::env::var("WQG_TOL") {
            Ok(s) => Some(
                s.parse::<f64>()
                    .map_err(|_| format!("WQG_TOL is not a number: {s}"))?,
            ),
            Err(_) => None,
        },
    };
    match value {
        Some(v) if v > 0.0 && v.is_finite() => Ok(Tolerance::with_abs(v)),
        Some(v) => Err(format!("tolerance must be positive and finite, got {v}")),
        None => Ok(Tolerance::default()),
    }
}

fn parse_weights(spec: &str, points: usize) -> Result<Vec<f64>, String> {
    let ws: Result<Vec<f64>, _> = spec.split(',').map(|s| s.trim().parse::<f64>()).collect();
    let ws = ws.map_err(|e| format!("bad weights: {e}"))?;
    if ws.len() != points {
        return Err(format!("expected {points} weights, found {}", ws.len()));
    }
    if ws.iter().any(|&w| !(w > 0.0) || !w.is_finite()) {
        return Err("weights must be positive and finite".into());
    }
    Ok(ws)
}

fn cmd_generate(
    family: &str,
    name: Option<&str>,
    points: usize,
    repr: ReprKind,
    weights: Option<&str>,
    output: &str,
) -> Result<(), (String, u8)> {
    let (pres, comult, phi) = match family {
        "group" => {
            let gname = name.unwrap_or("z2");
            let table = if gname == "s3" {
                GroupTable::s3()
            } else if let Some(k) = gname.strip_prefix('z') {
                let k: usize = k
                    .parse()
                    .map_err(|_| (format!("unknown group name {gname}"), 2u8))?;
                if k == 0 {
                    return Err(("cyclic group order must be positive".into(), 2));
                }
                GroupTable::cyclic(k)
            } else {
                return Err((format!("unknown group name {gname}"), 2));
            };
            let (p, d) = gen_group_algebra(&table).map_err(|e| (e.to_string(), 2u8))?;
            (p, d, None)
        }
        "pair-groupoid" => {
            if points == 0 {
                return Err(("pair groupoid needs at least one point".into(), 2));
            }
            let g = pair_groupoid(points);
            let (p, d) = match repr {
                ReprKind::Convolution => {
                    gen_groupoid_convolution(&g).map_err(|e| (e.to_string(), 2u8))?
                }
                ReprKind::Function => {
                    gen_groupoid_function(&g).map_err(|e| (e.to_string(), 2u8))?
                }
            };
            let phi = match weights {
                Some(spec) => {
                    let ws = parse_weights(spec, points).map_err(|m| (m, 2u8))?;
                    let mut phi: CVec = zvec(points * points);
                    for i in 0..points {
                        for j in 0..points {
                            let v = match repr {
                                // weighted trace on the convolution algebra
                                ReprKind::Convolution => {
                                    if i == j {
                                        ws[i]
                                    } else {
                                        0.0
                                    }
                                }
                                // source-weighted integral on the function algebra
                                ReprKind::Function => ws[j],
                            };
                            phi[i * points + j] = cr(v);
                        }
                    }
                    Some(phi)
                }
                None => None,
            };
            (p, d, phi)
        }
        other => return Err((format!("unknown family {other}"), 2)),
    };
    let doc = serialize_presentation(&pres, &comult, phi.as_ref(), None);
    let text = serde_json::to_string_pretty(&doc).expect("serializable");
    write_output(output, &text).map_err(|e| (e.to_string(), 2u8))?;
    Ok(())
}

fn render(report: &VerificationReport, tol: f64, json: bool) -> String {
    if json {
        serde_json::to_string_pretty(&report.to_json(tol)).expect("serializable")
    } else {
        report.to_text(tol)
    }
}

fn cmd_verify(file: &str, tol_flag: Option<f64>, json: bool, stage: StageArg) -> u8 {
    let tol = match resolve_tolerance(tol_flag) {
        Ok(t) => t,
        Err(m) => {
            eprintln!("error: {m}");
            return 2;
        }
    };
    let text = match read_input(file) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read {file}: {e}");
            return 2;
        }
    };
    let parsed = match parse_presentation(&text) {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    };
    let pipeline_stage = match stage {
        StageArg::Algebra => Stage::Algebra,
        StageArg::Coalgebra => Stage::Coalgebra,
        StageArg::Integrals => Stage::Integrals,
        StageArg::GnsOperators | StageArg::Duality => Stage::GnsOperators,
    };
    let (mut report, data) = run_pipeline(
        &parsed.pres,
        &parsed.comult,
        parsed.phi.as_ref(),
        parsed.psi.as_ref(),
        pipeline_stage,
        &tol,
    );
    if stage == StageArg::Duality {
        if let Some(data) = &data {
            if let Some(bundle) = &data.bundle {
                match duality::biduality_check(
                    &parsed.pres,
                    &parsed.comult,
                    bundle,
                    &data.counit,
                    &tol,
                ) {
                    Ok(drep) => report.absorb("duality.", drep),
                    Err(e) => {
                        report.fail("duality.dualize", e.to_string());
                    }
                }
            }
        } else {
            report.skip("duality.dualize", "pipeline failed before duality");
        }
    }
    let rendered = render(&report, tol.abs_residual, json);
    if json {
        println!("{rendered}");
    } else {
        print!("{rendered}");
    }
    u8::from(!report.passed())
}

fn cmd_dualize(file: &str, output: &str) -> u8 {
    let tol = match resolve_tolerance(None) {
        Ok(t) => t,
        Err(m) => {
            eprintln!("error: {m}");
            return 2;
        }
    };
    let text = match read_input(file) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read {file}: {e}");
            return 2;
        }
    };
    let parsed = match parse_presentation(&text) {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    };
    let (report, data) = run_pipeline(
        &parsed.pres,
        &parsed.comult,
        parsed.phi.as_ref(),
        parsed.psi.as_ref(),
        Stage::GnsOperators,
        &tol,
    );
    let Some(data) = data else {
        eprintln!("input failed verification; cannot dualize");
        eprint!("{}", report.to_text(tol.abs_residual));
        return 1;
    };
    let bundle = data.bundle.as_ref().expect("full pipeline ran");
    match duality::dualize(&parsed.pres, &parsed.comult, bundle, &data.counit, &tol) {
        Ok((dual, drep)) => {
            if !drep.passed() {
                eprint!("{}", drep.to_text(tol.abs_residual));
                return 1;
            }
            let doc = serialize_presentation(&dual.pres, &dual.comult, None, None);
            let text = serde_json::to_string_pretty(&doc).expect("serializable");
            if let Err(e) = write_output(output, &text) {
                eprintln!("error: {e}");
                return 2;
            }
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn cmd_report(file: &str) -> u8 {
    let text = match read_input(file) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read {file}: {e}");
            return 2;
        }
    };
    let doc: serde_json::Value = match serde_json::from_str(&text) {
        Ok(v) => v,
        Err(e) => {
            eprintln!("error: invalid report JSON: {e}");
            return 2;
        }
    };
    let checks: Vec<wqg_core::Check> = match doc.get("checks").cloned().map(serde_json::from_value)
    {
        Some(Ok(c)) => c,
        _ => {
            eprintln!("error: report has no valid checks array");
            return 2;
        }
    };
    let tol = doc.get("tol").and_then(|v| v.as_f64()).unwrap_or(1e-9);
    let report = VerificationReport { checks };
    print!("{}", report.to_text(tol));
    u8::from(!report.passed())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.cmd {
        Cmd::Generate {
            family,
            name,
            points,
            repr,
            weights,
            output,
        } => match cmd_generate(
            &family,
            name.as_deref(),
            points,
            repr,
            weights.as_deref(),
            &output,
        ) {
            Ok(()) => 0,
            Err((msg, code)) => {
                eprintln!("error: {msg}");
                code
            }
        },
        Cmd::Verify {
            file,
            tol,
            json,
            text: _,
            stage,
        } => cmd_verify(&file, tol, json, stage),
        Cmd::Dualize { file, output } => cmd_dualize(&file, &output),
        Cmd::Report { file } => cmd_report(&file),
    };
    ExitCode::from(code)
}
