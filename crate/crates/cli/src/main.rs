//! `lowlying`: one executable exposing the exact Satake/Plancherel/Sato-Tate
//! machinery, symmetry-type classification, random-matrix sampling, and the
//! one-level main-term pipeline. JSON on stdout by default, CSV for the
//! tabular subcommands via `--csv`; every run carries a reproducibility
//! manifest. Exit code 2 signals a precondition or usage error.

mod json;

use std::io::Write;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use num::{BigRational, ToPrimitive};

use json::{obj, Json};
use lowlying_core::hecke::{
    phi_nu, satake_forward, satake_inverse_char, HeckeElement, RepSpec, SphericalFunction,
};
use lowlying_core::laurent::HalfLaurent;
use lowlying_core::one_level::{
    model_one_level_density, convergence_study, predicted_limit, PipelineConfig, TestFunctionPair,
};
use lowlying_core::plancherel::{moment_table, TorusGrid};
use lowlying_core::rmt::{
    empirical_one_level, histogram, limit_pairing, EnsembleTag,
};
use lowlying_core::root_data::{build_root_datum, CartanType, RootDatum, Weight};
use lowlying_core::sato_tate::{convergence_report, st_moment_exact, st_moment_numeric};
use lowlying_core::symmetry::symmetry_verdict;

#[derive(Parser)]
#[command(name = "lowlying", version, about = "Satake transforms, Plancherel and Sato-Tate moments, symmetry types, and one-level densities for split classical groups")]
struct Cli {
    /// Worker threads (default: LOWLYING_THREADS or all cores). Results are
    /// independent of this setting.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Write output to a file instead of stdout.
    #[arg(long, global = true)]
    out: Option<std::path::PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct GroupArgs {
    /// Dual root datum as TYPE,RANK (e.g. B,2 for the odd orthogonal dual).
    #[arg(long)]
    dual: Option<String>,
    /// Group name as NAME,SIZE (GL,d / SL,d / Sp,2n / SO,m); mapped to its
    /// dual datum.
    #[arg(long)]
    group: Option<String>,
    /// Representation of the dual group: "std" or "weights:c1,c2;c1,c2xM".
    #[arg(long, default_value = "std")]
    rep: String,
}

#[derive(Subcommand)]
enum Command {
    /// Exact Satake transform of one character (tau-basis expansion).
    Satake {
        #[command(flatten)]
        grp: GroupArgs,
        /// Dominant weight, comma-separated coordinates.
        #[arg(long)]
        lambda: String,
        /// Transform direction: inverse-char (S^{-1} chi_lambda) or
        /// forward-tau (S tau_lambda in the character basis).
        #[arg(long, default_value = "inverse-char")]
        op: String,
    },
    /// The explicit test function phi^(nu) in the tau basis.
    Phi {
        #[command(flatten)]
        grp: GroupArgs,
        #[arg(long)]
        nu: u32,
    },
    /// Exact vs quadrature Plancherel moments over a q-list.
    PlancherelMoments {
        #[command(flatten)]
        grp: GroupArgs,
        #[arg(long, default_value_t = 2)]
        nu_max: u32,
        /// Comma-separated list of q values (> 1).
        #[arg(long, default_value = "2,3,4,5,25,121")]
        q: String,
        /// Grid nodes per axis (default: resolution-matched to the rank).
        #[arg(long)]
        grid: Option<usize>,
        #[arg(long, default_value_t = false)]
        csv: bool,
    },
    /// Exact Sato-Tate moments with a quadrature cross-check.
    SatoTateMoments {
        #[command(flatten)]
        grp: GroupArgs,
        #[arg(long, default_value_t = 3)]
        nu_max: u32,
        #[arg(long)]
        grid: Option<usize>,
        #[arg(long, default_value_t = false)]
        csv: bool,
    },
    /// Plancherel -> Sato-Tate convergence table over a q-ladder.
    StConvergence {
        #[command(flatten)]
        grp: GroupArgs,
        #[arg(long, default_value_t = 2)]
        nu: u32,
        #[arg(long, default_value = "2,3,5,25,121")]
        q: String,
        #[arg(long, default_value_t = false)]
        csv: bool,
    },
    /// Frobenius-Schur indicator and symmetry-type classification.
    FsIndicator {
        #[command(flatten)]
        grp: GroupArgs,
    },
    /// Monte Carlo one-level density of a Haar ensemble vs its limit.
    RmtDensity {
        /// u | so | usp
        #[arg(long)]
        ensemble: String,
        #[arg(long, default_value_t = 40)]
        n: usize,
        #[arg(long, default_value_t = 4000)]
        samples: usize,
        #[arg(long, default_value_t = 0.5)]
        delta: f64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Histogram of normalized eigenangles against the limiting density.
    RmtHistogram {
        #[arg(long)]
        ensemble: String,
        #[arg(long, default_value_t = 40)]
        n: usize,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long, default_value_t = 50)]
        bins: usize,
        #[arg(long, default_value_t = 10.0)]
        xmax: f64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// The main-term pipeline D_model vs the predicted limit.
    OneLevel {
        #[command(flatten)]
        grp: GroupArgs,
        #[arg(long, default_value_t = 1e10)]
        conductor: f64,
        #[arg(long, default_value_t = 0.4)]
        delta: f64,
        #[arg(long, default_value_t = 2)]
        numax: u32,
        /// Hard cap on the prime sieve.
        #[arg(long, default_value_t = 100_000)]
        prime_cap: u64,
    },
    /// The pipeline along an ascending conductor ladder.
    OneLevelStudy {
        #[command(flatten)]
        grp: GroupArgs,
        #[arg(long, default_value = "1e4,1e6,1e9,1e12")]
        conductors: String,
        #[arg(long, default_value_t = 0.4)]
        delta: f64,
        #[arg(long, default_value_t = 100_000)]
        prime_cap: u64,
        #[arg(long, default_value_t = false)]
        csv: bool,
    },
    /// Run the full invariant suite; nonzero exit on any failure.
    Selftest {
        /// Restrict the slowest sweeps.
        #[arg(long, default_value_t = false)]
        quick: bool,
    },
}

fn main() {
    let cli = Cli::parse();
    let threads = cli
        .threads
        .or_else(|| std::env::var("LOWLYING_THREADS").ok().and_then(|v| v.parse().ok()));
    if let Some(t) = threads {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t.max(1)).build_global();
    }
    let start = Instant::now();
    match run(&cli, start) {
        Ok(output) => {
            let emit = |text: &str| {
                if let Some(path) = &cli.out {
                    std::fs::write(path, text).unwrap_or_else(|e| {
                        eprintln!("cannot write {}: {e}", path.display());
                        std::process::exit(2);
                    });
                } else {
                    let mut stdout = std::io::stdout();
                    let _ = stdout.write_all(text.as_bytes());
                }
            };
            emit(&output.text);
            std::process::exit(output.exit_code);
        }
        Err(msg) => {
            eprintln!("error: {msg}");
            std::process::exit(2);
        }
    }
}

struct Output {
    text: String,
    exit_code: i32,
}

fn parse_cartan(s: &str) -> Result<(CartanType, usize), String> {
    let (t, n) = s.split_once(',').ok_or_else(|| format!("expected TYPE,RANK, got {s}"))?;
    let rank: usize = n.trim().parse().map_err(|_| format!("bad rank {n}"))?;
    let ty = match t.trim().to_uppercase().as_str() {
        "A" => CartanType::A,
        "B" => CartanType::B,
        "C" => CartanType::C,
        "D" => CartanType::D,
        other => return Err(format!("unknown Cartan type {other}")),
    };
    Ok((ty, rank))
}

/// Map a group name to its dual datum: GL_d and SL_d are self-dual in type
/// A; Sp_2n has the odd orthogonal dual (B_n); SO_2n+1 has the symplectic
/// dual (C_n); SO_2n is self-dual (D_n).
fn group_to_dual(s: &str) -> Result<(CartanType, usize), String> {
    let (name, k) = s.split_once(',').ok_or_else(|| format!("expected NAME,SIZE, got {s}"))?;
    let k: usize = k.trim().parse().map_err(|_| format!("bad size {k}"))?;
    match name.trim().to_uppercase().as_str() {
        "GL" | "SL" => {
            if k < 2 {
                return Err("GL/SL size must be >= 2".into());
            }
            Ok((CartanType::A, k - 1))
        }
        "SP" => {
            if k % 2 != 0 || k == 0 {
                return Err("Sp size must be even".into());
            }
            Ok((CartanType::B, k / 2))
        }
        "SO" => {
            if k >= 3 && k % 2 == 1 {
                Ok((CartanType::C, k / 2))
            } else if k >= 4 && k % 2 == 0 {
                Ok((CartanType::D, k / 2))
            } else {
                Err("SO size must be >= 3".into())
            }
        }
        other => Err(format!("unknown group {other}")),
    }
}

fn resolve_datum(grp: &GroupArgs) -> Result<RootDatum, String> {
    let (t, n) = match (&grp.dual, &grp.group) {
        (Some(d), None) => parse_cartan(d)?,
        (None, Some(g)) => group_to_dual(g)?,
        (Some(_), Some(_)) => return Err("give either --dual or --group, not both".into()),
        (None, None) => return Err("one of --dual or --group is required".into()),
    };
    build_root_datum(t, n).map_err(|e| e.to_string())
}

fn resolve_rep(grp: &GroupArgs, dual: &RootDatum) -> Result<RepSpec, String> {
    let spec = grp.rep.trim();
    if spec == "std" {
        return Ok(RepSpec::std(dual));
    }
    if let Some(rest) = spec.strip_prefix("weights:") {
        let mut summands = Vec::new();
        for part in rest.split(';') {
            let (coords, mult) = match part.split_once('x') {
                Some((c, m)) => (c, m.parse::<u32>().map_err(|_| format!("bad multiplicity {m}"))?),
                None => (part, 1),
            };
            let v: Vec<i64> = coords
                .split(',')
                .map(|c| c.trim().parse::<i64>().map_err(|_| format!("bad coordinate {c}")))
                .collect::<Result<_, _>>()?;
            if v.len() != dual.ambient_dim {
                return Err(format!(
                    "weight {:?} has {} coordinates, ambient dimension is {}",
                    v,
                    v.len(),
                    dual.ambient_dim
                ));
            }
            let w = Weight::from_i64(&v);
            if !dual.is_dominant(&w) {
                return Err(format!("weight {v:?} is not dominant"));
            }
            summands.push((w, mult));
        }
        return Ok(RepSpec::from_highest_weights(summands));
    }
    Err(format!("unknown representation spec {spec}; use std or weights:..."))
}

fn parse_f64_list(s: &str) -> Result<Vec<f64>, String> {
    s.split(',')
        .map(|x| x.trim().parse::<f64>().map_err(|_| format!("bad number {x}")))
        .collect()
}

fn parse_ensemble(s: &str) -> Result<EnsembleTag, String> {
    match s.to_lowercase().as_str() {
        "u" => Ok(EnsembleTag::U),
        "so" | "soeven" => Ok(EnsembleTag::SOeven),
        "usp" => Ok(EnsembleTag::USp),
        other => Err(format!("unknown ensemble {other}; use u|so|usp")),
    }
}

fn rational_pair(v: &BigRational) -> Json {
    Json::Arr(vec![Json::BigInt(v.numer().to_string()), Json::BigInt(v.denom().to_string())])
}

/// Laurent element as [[exp_num, exp_den, coeff_num, coeff_den], ...].
fn laurent_json(p: &HalfLaurent) -> Json {
    let mut terms = Vec::new();
    for (dk, c) in p.iter_doubled() {
        let (en, ed) = if dk % 2 == 0 { (dk / 2, 1) } else { (dk, 2) };
        terms.push(Json::Arr(vec![
            Json::Int(en),
            Json::Int(ed),
            Json::BigInt(c.numer().to_string()),
            Json::BigInt(c.denom().to_string()),
        ]));
    }
    Json::Arr(terms)
}

fn weight_json(w: &Weight) -> Json {
    Json::Arr(
        w.0.iter()
            .map(|c| {
                if c.is_integer() {
                    Json::BigInt(c.numer().to_string())
                } else {
                    rational_pair(c)
                }
            })
            .collect(),
    )
}

fn hecke_json(h: &HeckeElement) -> Json {
    let terms: Vec<Json> = h
        .coeffs
        .iter()
        .map(|(w, c)| obj(vec![("lambda", weight_json(w)), ("coeff", laurent_json(c))]))
        .collect();
    obj(vec![("basis", Json::Str("tau".into())), ("terms", Json::Arr(terms))])
}

fn spherical_json(f: &SphericalFunction) -> Json {
    let basis = match f.basis {
        lowlying_core::hecke::SphericalBasis::Character => "character",
        lowlying_core::hecke::SphericalBasis::OrbitSum => "orbit_sum",
    };
    let terms: Vec<Json> = f
        .coeffs
        .iter()
        .map(|(w, c)| obj(vec![("lambda", weight_json(w)), ("coeff", laurent_json(c))]))
        .collect();
    obj(vec![("basis", Json::Str(basis.into())), ("terms", Json::Arr(terms))])
}

fn manifest(subcommand: &str, flags: Vec<(&str, Json)>, start: Instant) -> Json {
    obj(vec![
        ("subcommand", Json::Str(subcommand.into())),
        ("flags", obj(flags)),
        ("version", Json::Str(lowlying_core::VERSION.into())),
        ("wall_time_ms", Json::Float(start.elapsed().as_secs_f64() * 1e3)),
    ])
}

fn csv_manifest_line(subcommand: &str, flags: Vec<(&str, Json)>, start: Instant) -> String {
    format!("# manifest: {}\n", manifest(subcommand, flags, start).render())
}

fn run(cli: &Cli, start: Instant) -> Result<Output, String> {
    match &cli.command {
        Command::Satake { grp, lambda, op } => {
            let dual = resolve_datum(grp)?;
            let coords: Vec<i64> = lambda
                .split(',')
                .map(|c| c.trim().parse::<i64>().map_err(|_| format!("bad coordinate {c}")))
                .collect::<Result<_, _>>()?;
            if coords.len() != dual.ambient_dim {
                return Err(format!(
                    "lambda has {} coordinates, ambient dimension is {}",
                    coords.len(),
                    dual.ambient_dim
                ));
            }
            let lam = Weight::from_i64(&coords);
            let flags = vec![
                ("dual", Json::Str(format!("{},{}", dual.cartan_type, dual.rank))),
                ("lambda", Json::Str(lambda.clone())),
                ("op", Json::Str(op.clone())),
            ];
            let body = match op.as_str() {
                "inverse-char" => {
                    let h = satake_inverse_char(&dual, &lam).map_err(|e| e.to_string())?;
                    hecke_json(&h)
                }
                "forward-tau" => {
                    let mut h = HeckeElement::zero();
                    h.add_term(lam, HalfLaurent::one());
                    let f = satake_forward(&dual, &h).map_err(|e| e.to_string())?;
                    spherical_json(&f)
                }
                other => return Err(format!("unknown op {other}")),
            };
            let out = obj(vec![
                ("result", body),
                ("manifest", manifest("satake", flags, start)),
            ]);
            Ok(Output { text: out.render() + "\n", exit_code: 0 })
        }
        Command::Phi { grp, nu } => {
            let dual = resolve_datum(grp)?;
            let rep = resolve_rep(grp, &dual)?;
            if *nu == 0 {
                return Err("nu must be >= 1".into());
            }
            let h = phi_nu(&dual, &rep, *nu).map_err(|e| e.to_string())?;
            let value = h.evaluate_at_identity();
            let flags = vec![
                ("dual", Json::Str(format!("{},{}", dual.cartan_type, dual.rank))),
                ("rep", Json::Str(grp.rep.clone())),
                ("nu", Json::Int(*nu as i64)),
            ];
            let out = obj(vec![
                ("result", hecke_json(&h)),
                ("value_at_identity", laurent_json(&value)),
                ("manifest", manifest("phi", flags, start)),
            ]);
            Ok(Output { text: out.render() + "\n", exit_code: 0 })
        }
        Command::PlancherelMoments { grp, nu_max, q, grid, csv } => {
            let dual = resolve_datum(grp)?;
            let rep = resolve_rep(grp, &dual)?;
            let qs = parse_f64_list(q)?;
            let g = grid
                .map(|m| TorusGrid::new(dual.ambient_dim, m))
                .unwrap_or_else(|| TorusGrid::default_for_rank(dual.ambient_dim));
            let rows = moment_table(&dual, &rep, *nu_max, &qs, g).map_err(|e| e.to_string())?;
            let flags = vec![
                ("dual", Json::Str(format!("{},{}", dual.cartan_type, dual.rank))),
                ("rep", Json::Str(grp.rep.clone())),
                ("nu_max", Json::Int(*nu_max as i64)),
                ("q", Json::Str(q.clone())),
                ("grid", Json::Int(g.points_per_dim as i64)),
            ];
            if *csv {
                let mut text = String::from("q,nu,beta_exact,beta_numeric,abs_err\n");
                for r in &rows {
                    text += &format!(
                        "{},{},{:.16e},{:.16e},{:.16e}\n",
                        r.q, r.nu, r.beta_exact, r.beta_numeric, r.abs_err
                    );
                }
                text += &csv_manifest_line("plancherel-moments", flags, start);
                Ok(Output { text, exit_code: 0 })
            } else {
                let rows_json: Vec<Json> = rows
                    .iter()
                    .map(|r| {
                        let mut fields = vec![
                            ("q", Json::Float(r.q)),
                            ("nu", Json::Int(r.nu as i64)),
                            ("beta_exact", Json::Float(r.beta_exact)),
                            ("beta_numeric", Json::Float(r.beta_numeric)),
                            ("abs_err", Json::Float(r.abs_err)),
                        ];
                        if let Some((n, d)) = &r.beta_exact_rational {
                            fields.push((
                                "beta_exact_rational",
                                Json::Arr(vec![Json::BigInt(n.clone()), Json::BigInt(d.clone())]),
                            ));
                        }
                        obj(fields)
                    })
                    .collect();
                let out = obj(vec![
                    ("rows", Json::Arr(rows_json)),
                    ("manifest", manifest("plancherel-moments", flags, start)),
                ]);
                Ok(Output { text: out.render() + "\n", exit_code: 0 })
            }
        }
        Command::SatoTateMoments { grp, nu_max, grid, csv } => {
            let dual = resolve_datum(grp)?;
            let rep = resolve_rep(grp, &dual)?;
            let g = grid
                .map(|m| TorusGrid::new(dual.ambient_dim, m))
                .unwrap_or_else(|| TorusGrid::default_for_rank(dual.ambient_dim));
            let mut rows = Vec::new();
            for nu in 1..=*nu_max {
                let exact = st_moment_exact(&dual, &rep, nu).map_err(|e| e.to_string())?;
                let numeric = st_moment_numeric(&dual, &rep, nu, g).map_err(|e| e.to_string())?;
                let ef = exact.to_f64().unwrap_or(f64::NAN);
                rows.push((nu, exact, ef, numeric, (ef - numeric).abs()));
            }
            let flags = vec![
                ("dual", Json::Str(format!("{},{}", dual.cartan_type, dual.rank))),
                ("rep", Json::Str(grp.rep.clone())),
                ("nu_max", Json::Int(*nu_max as i64)),
                ("grid", Json::Int(g.points_per_dim as i64)),
            ];
            if *csv {
                let mut text = String::from("nu,beta_exact,beta_numeric,abs_err\n");
                for (nu, _, ef, numeric, err) in &rows {
                    text += &format!("{},{:.16e},{:.16e},{:.16e}\n", nu, ef, numeric, err);
                }
                text += &csv_manifest_line("sato-tate-moments", flags, start);
                Ok(Output { text, exit_code: 0 })
            } else {
                let rows_json: Vec<Json> = rows
                    .iter()
                    .map(|(nu, exact, ef, numeric, err)| {
                        obj(vec![
                            ("nu", Json::Int(*nu as i64)),
                            ("beta_exact_rational", rational_pair(exact)),
                            ("beta_exact", Json::Float(*ef)),
                            ("beta_numeric", Json::Float(*numeric)),
                            ("abs_err", Json::Float(*err)),
                        ])
                    })
                    .collect();
                let out = obj(vec![
                    ("rows", Json::Arr(rows_json)),
                    ("manifest", manifest("sato-tate-moments", flags, start)),
                ]);
                Ok(Output { text: out.render() + "\n", exit_code: 0 })
            }
        }
        Command::StConvergence { grp, nu, q, csv } => {
            let dual = resolve_datum(grp)?;
            let rep = resolve_rep(grp, &dual)?;
            let qs = parse_f64_list(q)?;
            let rows = convergence_report(&dual, &rep, *nu, &qs).map_err(|e| e.to_string())?;
            let flags = vec![
                ("dual", Json::Str(format!("{},{}", dual.cartan_type, dual.rank))),
                ("rep", Json::Str(grp.rep.clone())),
                ("nu", Json::Int(*nu as i64)),
                ("q", Json::Str(q.clone())),
            ];
            if *csv {
                let mut text = String::from("q,beta_pl,beta_st,abs_diff,q_times_diff\n");
                for r in &rows {
                    text += &format!(
                        "{},{:.16e},{:.16e},{:.16e},{:.16e}\n",
                        r.q, r.beta_pl, r.beta_st, r.abs_diff, r.q_times_diff
                    );
                }
                text += &csv_manifest_line("st-convergence", flags, start);
                Ok(Output { text, exit_code: 0 })
            } else {
                let rows_json: Vec<Json> = rows
                    .iter()
                    .map(|r| {
                        obj(vec![
                            ("q", Json::Float(r.q)),
                            ("beta_pl", Json::Float(r.beta_pl)),
                            ("beta_st", Json::Float(r.beta_st)),
                            ("abs_diff", Json::Float(r.abs_diff)),
                            ("q_times_diff", Json::Float(r.q_times_diff)),
                        ])
                    })
                    .collect();
                let out = obj(vec![
                    ("rows", Json::Arr(rows_json)),
                    ("manifest", manifest("st-convergence", flags, start)),
                ]);
                Ok(Output { text: out.render() + "\n", exit_code: 0 })
            }
        }
        Command::FsIndicator { grp } => {
            let dual = resolve_datum(grp)?;
            let rep = resolve_rep(grp, &dual)?;
            let v = symmetry_verdict(&dual, &rep).map_err(|e| e.to_string())?;
            let flags = vec![
                ("dual", Json::Str(format!("{},{}", dual.cartan_type, dual.rank))),
                ("rep", Json::Str(grp.rep.clone())),
            ];
            let mut fields = vec![
                ("s", Json::Int(v.s)),
                ("sym", Json::Int(v.sym_mult)),
                ("wedge", Json::Int(v.wedge_mult)),
                ("type", Json::Str(v.symmetry_type.to_string())),
                ("ensemble", Json::Str(v.ensemble.to_string())),
            ];
            if v.reducible {
                fields.push(("reducible", Json::Bool(true)));
            }
            fields.push(("manifest", manifest("fs-indicator", flags, start)));
            Ok(Output { text: obj(fields).render() + "\n", exit_code: 0 })
        }
        Command::RmtDensity { ensemble, n, samples, delta, seed } => {
            let ens = parse_ensemble(ensemble)?;
            let pair = TestFunctionPair::fejer(*delta).map_err(|e| e.to_string())?;
            let (estimate, stderr) =
                empirical_one_level(ens, *n, *samples, &pair, *seed).map_err(|e| e.to_string())?;
            let limit = limit_pairing(ens, &pair).map_err(|e| e.to_string())?;
            let sigma_distance = if stderr > 0.0 { (estimate - limit).abs() / stderr } else { 0.0 };
            let flags = vec![
                ("ensemble", Json::Str(ens.to_string())),
                ("n", Json::Int(*n as i64)),
                ("samples", Json::Int(*samples as i64)),
                ("delta", Json::Float(*delta)),
                ("seed", Json::Int(*seed as i64)),
            ];
            let out = obj(vec![
                ("estimate", Json::Float(estimate)),
                ("stderr", Json::Float(stderr)),
                ("limit", Json::Float(limit)),
                ("sigma_distance", Json::Float(sigma_distance)),
                ("manifest", manifest("rmt-density", flags, start)),
            ]);
            Ok(Output { text: out.render() + "\n", exit_code: 0 })
        }
        Command::RmtHistogram { ensemble, n, samples, bins, xmax, seed } => {
            let ens = parse_ensemble(ensemble)?;
            let rows = histogram(ens, *n, *samples, *bins, *xmax, *seed).map_err(|e| e.to_string())?;
            let flags = vec![
                ("ensemble", Json::Str(ens.to_string())),
                ("n", Json::Int(*n as i64)),
                ("samples", Json::Int(*samples as i64)),
                ("bins", Json::Int(*bins as i64)),
                ("xmax", Json::Float(*xmax)),
                ("seed", Json::Int(*seed as i64)),
            ];
            let mut text = String::from("bin_center,empirical_density,limit_density\n");
            for (center, emp, lim) in &rows {
                text += &format!("{:.16e},{:.16e},{:.16e}\n", center, emp, lim);
            }
            text += &csv_manifest_line("rmt-histogram", flags, start);
            Ok(Output { text, exit_code: 0 })
        }
        Command::OneLevel { grp, conductor, delta, numax, prime_cap } => {
            let dual = resolve_datum(grp)?;
            let rep = resolve_rep(grp, &dual)?;
            let pair = TestFunctionPair::fejer(*delta).map_err(|e| e.to_string())?;
            let mut config = PipelineConfig::new(dual.clone(), rep, *conductor, pair)
                .map_err(|e| e.to_string())?;
            config.nu_max = (*numax).max(1);
            config.prime_cap = *prime_cap;
            let model = model_one_level_density(&config).map_err(|e| e.to_string())?;
            let predicted = predicted_limit(&config).map_err(|e| e.to_string())?;
            let flags = vec![
                ("dual", Json::Str(format!("{},{}", dual.cartan_type, dual.rank))),
                ("rep", Json::Str(grp.rep.clone())),
                ("conductor", Json::Float(*conductor)),
                ("delta", Json::Float(*delta)),
                ("numax", Json::Int(*numax as i64)),
                ("prime_cap", Json::Int(*prime_cap as i64)),
            ];
            let out = obj(vec![
                ("d_model", Json::Float(model.d_model)),
                ("predicted", Json::Float(predicted)),
                ("error", Json::Float((model.d_model - predicted).abs())),
                ("nu1_contribution", Json::Float(model.nu_contributions.first().copied().unwrap_or(0.0))),
                ("nu2_contribution", Json::Float(model.nu_contributions.get(1).copied().unwrap_or(0.0))),
                ("tail_bound", Json::Float(model.tail_bound)),
                ("primes_used", Json::Int(model.primes_used as i64)),
                ("manifest", manifest("one-level", flags, start)),
            ]);
            Ok(Output { text: out.render() + "\n", exit_code: 0 })
        }
        Command::OneLevelStudy { grp, conductors, delta, prime_cap, csv } => {
            let dual = resolve_datum(grp)?;
            let rep = resolve_rep(grp, &dual)?;
            let pair = TestFunctionPair::fejer(*delta).map_err(|e| e.to_string())?;
            let ladder = parse_f64_list(conductors)?;
            let mut config = PipelineConfig::new(dual.clone(), rep, ladder[0].max(100.0), pair)
                .map_err(|e| e.to_string())?;
            config.prime_cap = *prime_cap;
            let rows = convergence_study(&config, &ladder).map_err(|e| e.to_string())?;
            let flags = vec![
                ("dual", Json::Str(format!("{},{}", dual.cartan_type, dual.rank))),
                ("rep", Json::Str(grp.rep.clone())),
                ("conductors", Json::Str(conductors.clone())),
                ("delta", Json::Float(*delta)),
                ("prime_cap", Json::Int(*prime_cap as i64)),
            ];
            if *csv {
                let mut text = String::from("conductor,d_model,predicted,abs_error\n");
                for r in &rows {
                    text += &format!(
                        "{:.16e},{:.16e},{:.16e},{:.16e}\n",
                        r.conductor, r.d_model, r.predicted, r.abs_error
                    );
                }
                text += &csv_manifest_line("one-level-study", flags, start);
                Ok(Output { text, exit_code: 0 })
            } else {
                let rows_json: Vec<Json> = rows
                    .iter()
                    .map(|r| {
                        obj(vec![
                            ("conductor", Json::Float(r.conductor)),
                            ("d_model", Json::Float(r.d_model)),
                            ("predicted", Json::Float(r.predicted)),
                            ("abs_error", Json::Float(r.abs_error)),
                        ])
                    })
                    .collect();
                let out = obj(vec![
                    ("rows", Json::Arr(rows_json)),
                    ("manifest", manifest("one-level-study", flags, start)),
                ]);
                Ok(Output { text: out.render() + "\n", exit_code: 0 })
            }
        }
        Command::Selftest { quick } => {
            let results = lowlying_core::selftest::run_all(*quick);
            let mut text = String::new();
            let mut failures = 0;
            for r in &results {
                text += &format!(
                    "[{}] {} -- {}\n",
                    if r.passed { "PASS" } else { "FAIL" },
                    r.name,
                    r.detail
                );
                if !r.passed {
                    failures += 1;
                }
            }
            text += &format!("{} checks, {} failures\n", results.len(), failures);
            Ok(Output { text, exit_code: if failures == 0 { 0 } else { 1 } })
        }
    }
}
