use std::io::Read;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::{json, Map, Value};

use lldforge::exactalg::parse::parse_scalar;
use lldforge::exactalg::{Field, Mat, Scalar};
use lldforge::extract::{gallery_over, run_extraction, ExtractOptions, GalleryName};
use lldforge::format::{self, TwistedFile};
use lldforge::ldb::{make_char2_tower, make_octonion, make_quadratic_ext, make_quaternion, LdbAlgebra, QuadraticKind};
use lldforge::suite::{run_suite, Verdict};
use lldforge::twisted::{build_twisted, nonisotropic_hyperplane, rectify, reflexive_closure, verify_hyperplane_minrank, ClosureMode};
use lldforge::{lld, Error};

#[derive(Parser)]
#[command(name = "lldforge", version, about = "Exact tools for bounded-rank matrix spaces and LLD operator spaces")]
struct Cli {
    /// Single-line JSON report instead of text.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// LLD report of a matspace file; exits 1 unless the space is c-LLD.
    CheckLld {
        file: String,
        #[arg(long)]
        c: Option<usize>,
    },
    /// Upper rank.
    Urk { file: String },
    /// Minimal rank (exact over finite fields, a height search otherwise).
    Mrk {
        file: String,
        #[arg(long, default_value_t = 2)]
        height: u32,
    },
    /// Flanders-Atkinson identities for a space containing J_r.
    Flanders {
        file: String,
        #[arg(long)]
        r: usize,
    },
    /// Dual space.
    Dual { file: String },
    /// Reduced space.
    Reduce { file: String },
    #[command(subcommand)]
    Build(BuildCmd),
    /// Hyperplane A + K(alpha,1) of a twisted space.
    Hyperplane {
        file: String,
        #[arg(long, allow_hyphen_values = true)]
        alpha: String,
        /// Certify the minimal rank 2d instead of printing the hyperplane.
        #[arg(long)]
        verify: bool,
        #[arg(long, default_value_t = 1)]
        height: u32,
    },
    /// Reflexive closure R(S); exact over prime fields unless --samples is given.
    Closure {
        file: String,
        #[arg(long)]
        samples: Option<usize>,
    },
    /// Rectification data (F, G, H) along an axis of A + K^2.
    Rectify {
        file: String,
        #[arg(long, allow_hyphen_values = true)]
        axis: String,
    },
    /// Recover an LDB algebra from an LLD space and a hyperplane of minimal rank 2n-2.
    Extract {
        file: String,
        #[arg(long)]
        hyperplane: String,
        #[arg(long)]
        emit_algebra: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        height: u32,
    },
    /// Gallery space: alt4, alt8, quat4 or oct8.
    Gallery {
        name: String,
        #[arg(long)]
        field: Option<String>,
    },
    /// Run the named scenarios.
    VerifySuite {
        #[arg(long)]
        filter: Option<String>,
    },
}

#[derive(Subcommand)]
enum BuildCmd {
    /// quadext:d | quaternion:a,b | octonion:a,b,e | tower:n
    Algebra {
        spec: String,
        #[arg(long)]
        field: Option<String>,
    },
    /// Twisted space of an ldb file.
    Twisted { file: String },
}

#[derive(Default)]
struct Report {
    fields: Vec<(&'static str, Value)>,
    /// Replaces the `key: value` lines in text mode.
    text: Option<String>,
    code: u8,
}

impl Report {
    fn field(mut self, k: &'static str, v: impl Into<Value>) -> Report {
        self.fields.push((k, v.into()));
        self
    }

    fn text(mut self, t: impl Into<String>) -> Report {
        self.text = Some(t.into());
        self
    }

    fn code(mut self, c: u8) -> Report {
        self.code = c;
        self
    }

    fn print(&self, json_mode: bool) {
        if json_mode {
            let obj: Map<String, Value> = self.fields.iter().map(|(k, v)| (k.to_string(), v.clone())).collect();
            println!("{}", Value::Object(obj));
            return;
        }
        match &self.text {
            Some(t) => print!("{}", if t.ends_with('\n') { t.clone() } else { format!("{t}\n") }),
            None => {
                for (k, v) in &self.fields {
                    match v {
                        Value::String(s) => println!("{k}: {s}"),
                        other => println!("{k}: {other}"),
                    }
                }
            }
        }
    }
}

/// 1 for violated properties, 3 for undecided, 2 for everything the input caused.
fn exit_code(e: &Error) -> u8 {
    match e {
        Error::IdentityViolated(_)
        | Error::DichotomyViolated(_)
        | Error::StrataCheckFailed(_)
        | Error::NotAnEquivalence(_)
        | Error::AlphaInRange(_)
        | Error::NoWitnessFound(_) => 1,
        Error::Undecided(_) | Error::CertificateMissing(_) | Error::NotStabilized(_) => 3,
        _ => 2,
    }
}

fn read_input(path: &str) -> Result<String, Error> {
    let io = |e: std::io::Error| Error::PreconditionFailed(format!("{path}: {e}"));
    if path == "-" {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s).map_err(io)?;
        Ok(s)
    } else {
        std::fs::read_to_string(path).map_err(io)
    }
}

fn located(path: &str, e: Error) -> Error {
    match e {
        Error::Parse { line, col, msg } => Error::Parse { line, col, msg: format!("{path}: {msg}") },
        other => other,
    }
}

fn scalars(v: &[Scalar]) -> Value {
    Value::Array(v.iter().map(|s| Value::String(s.to_string())).collect())
}

fn vec_text(v: &[Scalar]) -> String {
    let p: Vec<String> = v.iter().map(|s| s.to_string()).collect();
    format!("({})", p.join(", "))
}

fn scalar_arg(text: &str, f: &Field) -> Result<Scalar, Error> {
    parse_scalar(text, f).map_err(|e| Error::PreconditionFailed(format!("bad scalar {text}: {e}")))
}

fn build_algebra(spec: &str, field: &Field) -> Result<LdbAlgebra, Error> {
    let (kind, args) = spec.split_once(':').unwrap_or((spec, ""));
    let args: Vec<&str> = if args.is_empty() { vec![] } else { args.split(',').collect() };
    let want = |n: usize| -> Result<Vec<Scalar>, Error> {
        if args.len() != n {
            return Err(Error::PreconditionFailed(format!("{kind} takes {n} parameter(s)")));
        }
        args.iter().map(|a| scalar_arg(a, field)).collect()
    };
    match kind {
        "quadext" => {
            let d = want(1)?.remove(0);
            let k = if field.characteristic() == 2 { QuadraticKind::ArtinSchreier(d) } else { QuadraticKind::Kummer(d) };
            make_quadratic_ext(field, k)
        }
        "quaternion" => {
            let p = want(2)?;
            make_quaternion(field, &p[0], &p[1])
        }
        "octonion" => {
            let p = want(3)?;
            make_octonion(field, &p[0], &p[1], &p[2])
        }
        "tower" => {
            let n = args.first().and_then(|a| a.parse::<usize>().ok()).filter(|_| args.len() == 1);
            make_char2_tower(n.ok_or_else(|| Error::PreconditionFailed("tower takes one integer".into()))?)
        }
        _ => Err(Error::PreconditionFailed(format!("unknown algebra {kind}; expected quadext, quaternion, octonion or tower"))),
    }
}

fn mat_block(label: &str, m: &Mat) -> String {
    format!("# {label}\n{}", format::write_mat(m))
}

fn run(cmd: Cmd) -> Result<Report, Error> {
    match cmd {
        Cmd::CheckLld { file, c } => {
            let s = format::parse_matspace(&read_input(&file)?).map_err(|e| located(&file, e))?;
            let rep = lld::analyze(&s)?;
            let ok = rep.c_max >= c.unwrap_or(1);
            let witness = rep.witness_small_rank.as_ref().map(|(_, r)| *r);
            Ok(Report::default()
                .field("space", format!("{}x{} dim {}", s.rows(), s.cols(), s.dim()))
                .field("c_max", rep.c_max)
                .field("rank_optimal_point", vec_text(&rep.rank_optimal_point))
                .field("rank_optimal_rank", rep.rank_optimal_rank)
                .field("kernel_basis_of_phi", format!("dim {}", rep.kernel_basis_of_phi.len()))
                .field("witness_small_rank", witness.map_or("none".to_string(), |r| format!("rank {r}")))
                .code(if ok { 0 } else { 1 }))
        }
        Cmd::Urk { file } => {
            let s = format::parse_matspace(&read_input(&file)?).map_err(|e| located(&file, e))?;
            let u = s.upper_rank()?;
            Ok(Report::default().field("urk", u).text(u.to_string()))
        }
        Cmd::Mrk { file, height } => {
            let s = format::parse_matspace(&read_input(&file)?).map_err(|e| located(&file, e))?;
            let m = s.min_rank(height)?;
            Ok(Report::default()
                .field("mrk", m.mrk_upper)
                .field("exact", m.exact)
                .field("coefficients", scalars(&m.coeffs))
                .text(format!("mrk={} exact={}", m.mrk_upper, m.exact))
                .code(if m.exact { 0 } else { 3 }))
        }
        Cmd::Flanders { file, r } => {
            let s = format::parse_matspace(&read_input(&file)?).map_err(|e| located(&file, e))?;
            let bad = s.flanders_check(r)?;
            let mut rep = Report::default().field("r", r).field("violations", bad.len());
            if let Some(w) = bad.first() {
                rep = rep.field("first_violation", format!("{:?}", w.violation)).field("matrix", format::write_mat(&w.reassemble()));
            }
            Ok(rep.code(if bad.is_empty() { 0 } else { 1 }))
        }
        Cmd::Dual { file } => {
            let s = format::parse_matspace(&read_input(&file)?).map_err(|e| located(&file, e))?;
            let out = format::write_matspace(&s.dual_space());
            Ok(Report::default().field("matspace", out.clone()).text(out))
        }
        Cmd::Reduce { file } => {
            let s = format::parse_matspace(&read_input(&file)?).map_err(|e| located(&file, e))?;
            let r = s.reduce();
            let out = format::write_matspace(&r.reduced_space);
            let text = format!("# kernel dim {}, essential range dim {}\n{out}", r.kernel_basis.len(), r.essential_range_basis.len());
            Ok(Report::default()
                .field("kernel_dim", r.kernel_basis.len())
                .field("essential_range_dim", r.essential_range_basis.len())
                .field("matspace", out)
                .text(text))
        }
        Cmd::Build(BuildCmd::Algebra { spec, field }) => {
            let f = match field {
                Some(t) => format::parse_field(&t)?,
                None => Field::Q,
            };
            let a = build_algebra(&spec, &f)?;
            let out = format::write_ldb(&a);
            Ok(Report::default().field("name", a.name.clone()).field("dim", a.dim()).field("ldb", out.clone()).text(out))
        }
        Cmd::Build(BuildCmd::Twisted { file }) => {
            let a = format::parse_ldb(&read_input(&file)?).map_err(|e| located(&file, e))?;
            let t = build_twisted(&a)?;
            let out = format::write_twisted(&TwistedFile { algebra: a, normal: None });
            Ok(Report::default().field("d", t.d()).field("dim", t.space.dim()).field("twisted", out.clone()).text(out))
        }
        Cmd::Hyperplane { file, alpha, verify, height } => {
            let tf = format::parse_twisted(&read_input(&file)?).map_err(|e| located(&file, e))?;
            let t = tf.twisted()?;
            let a = scalar_arg(&alpha, t.field())?;
            let h = nonisotropic_hyperplane(&t, &a)?;
            if verify {
                let m = verify_hyperplane_minrank(&t, &h, height)?;
                return Ok(Report::default()
                    .field("mrk", m.mrk)
                    .field("certified", m.certificate.to_string())
                    .field("n", t.d() + 1)
                    .field("search_height", m.search_height)
                    .field("search_min", m.search_min)
                    .text(format!("mrk={} certified={}", m.mrk, m.certificate)));
            }
            let out = format::write_twisted(&TwistedFile { normal: Some(format::alpha_normal(&t, &a)), algebra: tf.algebra });
            Ok(Report::default().field("twisted", out.clone()).text(out))
        }
        Cmd::Closure { file, samples } => {
            let s = format::parse_matspace(&read_input(&file)?).map_err(|e| located(&file, e))?;
            let mode = match (samples, s.field()) {
                (Some(n), _) => ClosureMode::Sampled(n),
                (None, Field::Fp(_)) => ClosureMode::Exact,
                (None, _) => ClosureMode::Sampled(lldforge::suite::CLOSURE_SAMPLES),
            };
            let r = reflexive_closure(&s, mode)?;
            let out = format::write_matspace(&r.space);
            let text = format!("# dim {} exact {} rounds {} dims {:?}\n{out}", r.space.dim(), r.exact, r.rounds, r.dims);
            Ok(Report::default()
                .field("dim", r.space.dim())
                .field("exact", r.exact)
                .field("rounds", r.rounds)
                .field("dims", json!(r.dims))
                .field("matspace", out)
                .text(text))
        }
        Cmd::Rectify { file, axis } => {
            let tf = format::parse_twisted(&read_input(&file)?).map_err(|e| located(&file, e))?;
            let t = tf.twisted()?;
            let x = format::parse_vector(&axis, t.field())?;
            let r = rectify(&t, &x)?;
            let text = [mat_block("s", &r.s), mat_block("F", &r.f), mat_block("G", &r.g), mat_block("H", &r.h)].join("\n");
            Ok(Report::default()
                .field("axis", scalars(&r.axis))
                .field("s", format::write_mat(&r.s))
                .field("F", format::write_mat(&r.f))
                .field("G", format::write_mat(&r.g))
                .field("H", format::write_mat(&r.h))
                .text(text))
        }
        Cmd::Extract { file, hyperplane, emit_algebra, height } => {
            let s = format::parse_matspace(&read_input(&file)?).map_err(|e| located(&file, e))?;
            let h = format::parse_matspace(&read_input(&hyperplane)?).map_err(|e| located(&hyperplane, e))?;
            let run = run_extraction(&s, &h, ExtractOptions { mrk_height: height });
            let lines: Vec<String> =
                run.transcript.iter().map(|l| format!("{} {}: {}", if l.pass { "PASS" } else { "FAIL" }, l.stage, l.detail)).collect();
            let mut rep = Report::default().field("stages", json!(lines)).text(lines.join("\n"));
            match run.outcome {
                Ok(ex) => {
                    if let Some(p) = emit_algebra {
                        std::fs::write(&p, format::write_ldb(&ex.algebra)).map_err(|e| Error::PreconditionFailed(format!("{}: {e}", p.display())))?;
                    }
                    rep = rep.field("dim", ex.algebra.dim()).field("ldb", format::write_ldb(&ex.algebra));
                    Ok(rep)
                }
                Err(e) => {
                    let code = exit_code(&e).max(1);
                    eprintln!("error: {e}");
                    Ok(rep.field("error", e.to_string()).code(if code == 2 { 1 } else { code }))
                }
            }
        }
        Cmd::Gallery { name, field } => {
            let g: GalleryName = name.parse()?;
            let f = match field {
                Some(t) => format::parse_field(&t)?,
                None => Field::Q,
            };
            let e = gallery_over(g, &f)?;
            let out = format::write_matspace(&e.space);
            Ok(Report::default()
                .field("invariant", e.invariant.to_string())
                .field("exponent", e.exponent)
                .field("matspace", out.clone())
                .text(format!("# invariant {}\n{out}", e.invariant)))
        }
        Cmd::VerifySuite { filter } => {
            let results = run_suite(filter.as_deref());
            if results.is_empty() {
                return Err(Error::PreconditionFailed(format!("no scenario matches {:?}", filter.unwrap_or_default())));
            }
            let mut lines = Vec::new();
            let mut objs = Vec::new();
            for r in &results {
                lines.push(format!("{} {} ({:.2} s)", r.verdict, r.name, r.seconds));
                if r.verdict != Verdict::Pass {
                    lines.extend(r.log.transcript.iter().map(|l| format!("    {l}")));
                }
                let metrics: Map<String, Value> = r.log.metrics.iter().map(|(k, v)| (k.clone(), Value::String(v.clone()))).collect();
                objs.push(json!({
                    "name": r.name,
                    "verdict": r.verdict.to_string(),
                    "seconds": r.seconds,
                    "metrics": metrics,
                    "counterexample": r.log.counterexample,
                }));
            }
            let code = if results.iter().any(|r| r.verdict == Verdict::Fail) {
                1
            } else if results.iter().any(|r| r.verdict == Verdict::Undecided) {
                3
            } else {
                0
            };
            Ok(Report::default().field("scenarios", Value::Array(objs)).text(lines.join("\n")).code(code))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Ok(t) = std::env::var("LLDFORGE_THREADS") {
        match t.parse::<usize>() {
            Ok(n) if n > 0 => {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
            _ => {
                eprintln!("error: LLDFORGE_THREADS must be a positive integer, got {t:?}");
                return ExitCode::from(2);
            }
        }
    }
    match run(cli.cmd) {
        Ok(rep) => {
            rep.print(cli.json);
            ExitCode::from(rep.code)
        }
        Err(e) => {
            let msg = match &e {
                Error::Parse { line, col, msg } => format!("parse error at line {line}, column {col}: {msg}"),
                other => other.to_string(),
            };
            if cli.json {
                println!("{}", json!({ "error": msg }));
            } else {
                eprintln!("error: {msg}");
            }
            ExitCode::from(exit_code(&e))
        }
    }
}
