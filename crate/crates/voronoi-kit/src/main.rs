use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use rand::rngs::StdRng;
use rand::SeedableRng;
use serde_json::{json, Value};

use voronoi_kit::arith::{euler_phi, gauss_sum_dirichlet, kloosterman_classical, DirichletCharacter, KloostermanSpec};
use voronoi_kit::bessel_arch::{bessel_transform_real, ArchRep, Bump, Contour};
use voronoi_kit::bessel_padic::{bessel_general, default_order, verify_duality, BesselRequest};
use voronoi_kit::local_reps::{hecke_coefficient, LocalRepresentation, SatakeModel, SatakeParams, TwistMinimal};
use voronoi_kit::padic::{
    enumerate_padic_characters, gauss_sum_closed_form, gauss_sum_padic, gauss_sum_progression, PadicShellFunction, Qp,
};
use voronoi_kit::verify::{duality_points, geometric_points, run_suite, DualityGrid, GeometricGrid, GridPoint};
use voronoi_kit::voronoi::{ingest_csv, verify_voronoi_gl2_with, CoefficientOracle, DeltaForm, Normalization};
use voronoi_kit::{Error, Result};

#[derive(Parser)]
#[command(name = "voronoi-kit", version, about = "Voronoi summation machinery for GL(n)")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Classical hyper-Kloosterman sum KL(x, y; q, c, d).
    Kloosterman {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        q: u64,
        /// Shifts c_2, ..., c_{n-1}; all 1 when omitted.
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        c: Vec<i64>,
        /// Divisors d_2, ..., d_{n-1}; all 1 when omitted.
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        d: Vec<i64>,
        #[arg(long, allow_negative_numbers = true)]
        x: i64,
        #[arg(long, allow_negative_numbers = true)]
        y: i64,
    },
    /// Gauss sum of a Dirichlet character.
    Gauss {
        #[arg(long)]
        modulus: u64,
        /// Index in the enumeration of characters modulo `modulus`.
        #[arg(long = "char")]
        index: u64,
    },
    /// Hecke coefficients from Satake parameters, as CSV `m1,...,mk,re,im`.
    Hecke {
        /// JSON file with `{"n": .., "params": {"p": {"p": .., "mu": [[re, im], ..]}, ..}}`.
        #[arg(long)]
        satake: PathBuf,
        /// One index tuple `m1,...,m_{n-1}`; repeatable.
        #[arg(long)]
        m: Vec<String>,
        /// Also list `A(m, 1, ..., 1)` for `m = 1..=UP_TO`.
        #[arg(long)]
        up_to: Option<i64>,
    },
    /// The p-adic Bessel transform, its duality residuals, and Gauss sums.
    BesselP(BesselP),
    /// The real Bessel transform as CSV `y,re,im,err_est`.
    BesselArch {
        /// JSON file with archimedean data, or `holomorphic:K` or `tempered:T`.
        #[arg(long)]
        rep: String,
        /// `plateau:a,b[,k[,fraction]]`.
        #[arg(long, default_value = "plateau:1,4")]
        phi: String,
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true, default_value = "1,2,4,8")]
        y_grid: Vec<f64>,
        #[arg(long)]
        sigma: Option<f64>,
        #[arg(long, default_value_t = 400.0)]
        height: f64,
    },
    /// Verification runs; the exit code is 0 iff every gate passes.
    Verify {
        #[command(subcommand)]
        which: Verify,
    },
}

#[derive(Args)]
struct BesselP {
    #[arg(long)]
    p: u64,
    #[arg(long)]
    n: usize,
    /// `unramified`, `minimal`, or `json:FILE`.
    #[arg(long, default_value = "unramified")]
    rep: String,
    #[arg(long, default_value_t = 3)]
    a_pi: u32,
    /// Valuation of the additive twist; nonnegative means no twist.
    #[arg(long, allow_negative_numbers = true, default_value_t = 0)]
    zeta_val: i32,
    /// `units`, `ap:K` or `json:FILE`.
    #[arg(long, default_value = "units")]
    phi: String,
    #[arg(long, allow_negative_numbers = true, default_value_t = 2)]
    cutoff: i32,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Print the Gauss sums at `a = p^zeta_val` instead of the transform.
    #[arg(long)]
    gauss: bool,
}

#[derive(Subcommand)]
enum Verify {
    /// Defining equation of the p-adic transform over a grid.
    Duality {
        #[arg(long, value_delimiter = ',', default_value = "2,3")]
        n: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_value = "2,3,5")]
        p: Vec<u64>,
        #[arg(long, value_delimiter = ',', default_value = "3,4,5")]
        a_pi: Vec<u32>,
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true, default_value = "-2,-1,0")]
        zeta_val: Vec<i32>,
        #[arg(long, default_value_t = 2)]
        char_level: u32,
        #[arg(long, default_value_t = 40)]
        order: i32,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        #[arg(long, default_value_t = 3)]
        seed: u64,
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Whittaker integral against its Kloosterman expansion over a grid.
    Geometric {
        #[arg(long, value_delimiter = ',', default_value = "2,3")]
        n: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_value = "2,3,5")]
        p: Vec<u64>,
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true, default_value = "-2,-1,0")]
        zeta_val: Vec<i32>,
        #[arg(long, value_delimiter = ',', default_value = "0,1,2,3")]
        y_val: Vec<i32>,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        #[arg(long, default_value_t = 5)]
        seed: u64,
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Both sides of the GL(2) formula for the discriminant form.
    VoronoiGl2(Gl2Args),
    /// The acceptance suite.
    Suite {
        /// Run only these criteria.
        #[arg(long, value_delimiter = ',')]
        only: Vec<usize>,
        #[arg(long)]
        json: Option<PathBuf>,
    },
}

#[derive(Args)]
struct Gl2Args {
    /// JSON file with any of `q`, `a`, `m_max`, `tol`, `phi`; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    q: Option<Vec<u64>>,
    #[arg(long, allow_negative_numbers = true)]
    a: Option<i64>,
    #[arg(long)]
    m_max: Option<u64>,
    #[arg(long)]
    tol: Option<f64>,
    /// `plateau:a,b[,k[,fraction]]`.
    #[arg(long)]
    phi: Option<String>,
    /// Coefficient table `m,re,im` used instead of the generated tau values.
    #[arg(long)]
    coefficients: Option<PathBuf>,
    /// `hecke` or `raw:EXPONENT`.
    #[arg(long, default_value = "hecke")]
    normalization: String,
    #[arg(long)]
    json: Option<PathBuf>,
}

fn c(z: Complex64) -> Value {
    json!({"re": z.re, "im": z.im})
}

fn parse_bump(spec: &str) -> Result<Bump> {
    let body = spec
        .strip_prefix("plateau:")
        .ok_or_else(|| Error::Parse(format!("expected plateau:a,b[,k[,fraction]], got {spec:?}")))?;
    let parts: Vec<f64> = body
        .split(',')
        .map(|x| x.trim().parse::<f64>().map_err(|_| Error::Parse(format!("bad number {x:?}"))))
        .collect::<Result<_>>()?;
    if parts.get(2).is_some_and(|k| k.fract() != 0.0 || *k < 1.0) {
        return Err(Error::Parse(format!("smoothness must be a positive integer in {spec:?}")));
    }
    match parts[..] {
        [a, b] => Bump::with_plateau(a, b, 2, 0.5),
        [a, b, k] => Bump::with_plateau(a, b, k as u32, 0.5),
        [a, b, k, f] => Bump::with_plateau(a, b, k as u32, f),
        _ => Err(Error::Parse(format!("expected two to four numbers in {spec:?}"))),
    }
}

fn parse_arch(spec: &str) -> Result<ArchRep> {
    if let Some(k) = spec.strip_prefix("holomorphic:") {
        return Ok(ArchRep::holomorphic(k.parse().map_err(|_| Error::Parse(format!("bad weight {k:?}")))?));
    }
    if let Some(t) = spec.strip_prefix("tempered:") {
        return Ok(ArchRep::tempered_gl2(t.parse().map_err(|_| Error::Parse(format!("bad shift {t:?}")))?));
    }
    let rep: ArchRep = serde_json::from_str(&fs::read_to_string(spec)?).map_err(|e| Error::Parse(e.to_string()))?;
    ArchRep::new(rep.shifts, rep.eps)
}

fn read_json(path: &str) -> Result<Value> {
    serde_json::from_str(&fs::read_to_string(path)?).map_err(|e| Error::Parse(format!("{path}: {e}")))
}

/// Writes to stdout, ignoring a closed pipe.
fn emit(text: &str) {
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "{text}");
}

fn print_json(v: &Value) {
    emit(&serde_json::to_string_pretty(v).unwrap());
}

fn kloosterman(n: usize, q: u64, c: Vec<i64>, d: Vec<i64>, x: i64, y: i64) -> Result<()> {
    let m = n.saturating_sub(2);
    let spec = KloostermanSpec {
        n,
        q,
        c: if c.is_empty() { vec![1; m] } else { c },
        d: if d.is_empty() { vec![1; m] } else { d },
    };
    let (value, terms) = kloosterman_classical(&spec, x, y)?;
    print_json(&json!({"value": self::c(value), "modulus": q, "terms": terms}));
    Ok(())
}

fn gauss(modulus: u64, index: u64) -> Result<()> {
    let chi = DirichletCharacter::from_index(modulus, index)?;
    let value = gauss_sum_dirichlet(&chi);
    print_json(&json!({
        "value": c(value),
        "modulus": modulus,
        "terms": euler_phi(modulus),
        "conductor": chi.conductor(),
    }));
    Ok(())
}

fn hecke(satake: PathBuf, m: Vec<String>, up_to: Option<i64>) -> Result<()> {
    let model: SatakeModel =
        serde_json::from_str(&fs::read_to_string(&satake)?).map_err(|e| Error::Parse(e.to_string()))?;
    let mut checked = SatakeModel::new(model.n);
    for sp in model.params.into_values() {
        if sp.n() != checked.n {
            return Err(Error::Parse(format!("prime {} has {} parameters, expected {}", sp.p, sp.n(), checked.n)));
        }
        checked.insert(SatakeParams::new(sp.p, sp.mu)?)?;
    }
    let k = checked.n - 1;
    let mut rows: Vec<Vec<i64>> = Vec::new();
    if let Some(top) = up_to {
        rows.extend((1..=top).map(|x| {
            let mut r = vec![1; k];
            r[0] = x;
            r
        }));
    }
    for t in m {
        let r: Vec<i64> = t
            .split(',')
            .map(|x| x.trim().parse::<i64>().map_err(|_| Error::Parse(format!("bad index {x:?}"))))
            .collect::<Result<_>>()?;
        if r.len() != k {
            return Err(Error::Parse(format!("{t:?} has {} entries, expected {k}", r.len())));
        }
        rows.push(r);
    }
    let header: Vec<String> = (1..=k).map(|i| format!("m{i}")).collect();
    let mut lines = vec![format!("{},re,im", header.join(","))];
    for r in rows {
        let a = hecke_coefficient(&checked, &r)?;
        let idx: Vec<String> = r.iter().map(|x| x.to_string()).collect();
        lines.push(format!("{},{:.17e},{:.17e}", idx.join(","), a.re, a.im));
    }
    emit(&lines.join("\n"));
    Ok(())
}

fn bessel_p(args: BesselP) -> Result<()> {
    let p = args.p;
    let z = Qp::from_unit(p, args.zeta_val, 1)?;
    let (phi, k) = if args.phi == "units" {
        (PadicShellFunction::indicator_shell(p, 0), 0)
    } else if let Some(k) = args.phi.strip_prefix("ap:") {
        let k: u32 = k.parse().map_err(|_| Error::Parse(format!("bad progression level {k:?}")))?;
        (PadicShellFunction::indicator_progression(p, k), k)
    } else if let Some(f) = args.phi.strip_prefix("json:") {
        let phi = PadicShellFunction::from_json(&read_json(f)?)?;
        let level = phi.level;
        (phi, level)
    } else {
        return Err(Error::Parse(format!("unknown test function {:?}", args.phi)));
    };
    if phi.p != p {
        return Err(Error::InvalidArgument(format!("test function is {}-adic, expected {p}-adic", phi.p)));
    }
    let level = k.max((-args.zeta_val).max(0) as u32).max(1);
    if args.gauss {
        let rows: Vec<Value> = enumerate_padic_characters(p, level)
            .iter()
            .map(|chi| {
                let mut row = json!({
                    "conductor_exp": chi.conductor_exp(),
                    "index": chi.primitive().index(),
                    "gauss": c(gauss_sum_padic(&z, chi)),
                    "closed_form": c(gauss_sum_closed_form(&z, chi)),
                });
                if k > 0 {
                    row["progression"] = c(gauss_sum_progression(&z, chi, k));
                }
                row
            })
            .collect();
        print_json(&json!({"p": p, "a_val": args.zeta_val, "progression_level": k, "sums": rows}));
        return Ok(());
    }
    let mut rng = StdRng::seed_from_u64(args.seed);
    let rep = match args.rep.as_str() {
        "unramified" => LocalRepresentation::Unramified(SatakeParams::random_unitary(p, args.n, 1.0.into(), &mut rng)),
        "minimal" => LocalRepresentation::TwistMinimal(TwistMinimal::random(p, args.n, args.a_pi, level + 1, &mut rng)),
        other => match other.strip_prefix("json:") {
            Some(f) => LocalRepresentation::from_json(&read_json(f)?)?,
            None => return Err(Error::Parse(format!("unknown representation {other:?}"))),
        },
    };
    let zeta = Some(z);
    let b = bessel_general(&BesselRequest { rep: rep.clone(), phi: phi.clone(), zeta, cutoff: args.cutoff })?;
    let mut residuals = Vec::new();
    let mut worst: f64 = 0.0;
    for chi in enumerate_padic_characters(p, b.level.max(1)) {
        let d = default_order(&rep, &chi, zeta.as_ref());
        let r = verify_duality(&rep, &phi, zeta.as_ref(), &chi, d)?;
        worst = worst.max(r);
        residuals.push(json!({
            "conductor_exp": chi.conductor_exp(), "index": chi.primitive().index(), "order": d, "residual": r,
        }));
    }
    print_json(&json!({
        "rep": rep.to_json(),
        "phi": phi.to_json(),
        "zeta_val": args.zeta_val,
        "transform": b.to_json(),
        "duality": residuals,
        "max_residual": worst,
    }));
    Ok(())
}

fn bessel_arch(rep: String, phi: String, ys: Vec<f64>, sigma: Option<f64>, height: f64) -> Result<()> {
    let rep = parse_arch(&rep)?;
    let phi = parse_bump(&phi)?;
    let mut contour = Contour::default_for(&rep, height);
    if let Some(s) = sigma {
        contour.sigma = s;
    }
    let mut lines = vec!["y,re,im,err_est".to_string()];
    for y in ys {
        let (v, err) = bessel_transform_real(&rep, &phi, y, contour)?;
        lines.push(format!("{y},{:.17e},{:.17e},{:.3e}", v.re, v.im, err));
    }
    emit(&lines.join("\n"));
    Ok(())
}

/// Writes the report, prints failures to stderr, and returns whether everything passed.
fn finish(report: Value, failures: Vec<Value>, out: Option<PathBuf>) -> Result<bool> {
    let mut report = report;
    report["passed"] = json!(failures.is_empty());
    report["failures"] = json!(failures);
    if let Some(path) = out {
        fs::write(&path, serde_json::to_string_pretty(&report).unwrap())?;
    }
    if !failures.is_empty() {
        eprintln!("{}", json!({"failures": failures}));
    }
    Ok(failures.is_empty())
}

fn grid_report(kind: &str, points: Vec<GridPoint>, tol: f64, out: Option<PathBuf>) -> Result<bool> {
    let worst = points.iter().map(|x| x.residual).fold(0.0, f64::max);
    let failures: Vec<Value> = points
        .iter()
        .filter(|x| !(x.residual <= tol))
        .map(|x| json!({"params": x.params, "residual": x.residual}))
        .collect();
    println!("{kind}: {} points, largest residual {worst:.3e}, tolerance {tol:.1e}", points.len());
    let points: Vec<Value> = points
        .into_iter()
        .map(|x| {
            json!({
                "params": x.params,
                "lhs": x.lhs.map(c),
                "rhs": x.rhs.map(c),
                "residual": x.residual,
            })
        })
        .collect();
    finish(json!({"check": kind, "tolerance": tol, "max_residual": worst, "points": points}), failures, out)
}

fn voronoi_gl2(args: Gl2Args) -> Result<bool> {
    let cfg = match &args.config {
        Some(path) => read_json(path.to_str().unwrap_or_default())?,
        None => json!({}),
    };
    let field = |k: &str| cfg.get(k).cloned().filter(|v| !v.is_null());
    let qs: Vec<u64> = match (args.q, field("q")) {
        (Some(q), _) => q,
        (None, Some(v)) => serde_json::from_value(v).map_err(|e| Error::Parse(format!("q: {e}")))?,
        (None, None) => vec![1, 3, 5],
    };
    let get_f64 = |flag: Option<f64>, k: &str, default: f64| -> Result<f64> {
        match (flag, field(k)) {
            (Some(x), _) => Ok(x),
            (None, Some(v)) => v.as_f64().ok_or_else(|| Error::Parse(format!("{k} must be a number"))),
            (None, None) => Ok(default),
        }
    };
    let a = get_f64(args.a.map(|x| x as f64), "a", 1.0)? as i64;
    let m_max = get_f64(args.m_max.map(|x| x as f64), "m_max", 10_000.0)? as u64;
    let tol = get_f64(args.tol, "tol", 1e-4)?;
    let phi = match (args.phi, field("phi")) {
        (Some(s), _) => parse_bump(&s)?,
        (None, Some(Value::String(s))) => parse_bump(&s)?,
        (None, Some(v)) => serde_json::from_value::<Bump>(v)
            .map_err(|e| Error::Parse(format!("phi: {e}")))
            .and_then(|b| Bump::with_plateau(b.a, b.b, b.k, b.plateau))?,
        (None, None) => Bump::with_plateau(5.0, 40.0, 2, 0.0)?,
    };
    let (oracle, warnings) = match &args.coefficients {
        Some(path) => {
            let norm = if args.normalization == "hecke" {
                Normalization::Hecke
            } else if let Some(e) = args.normalization.strip_prefix("raw:") {
                Normalization::Raw { exponent: e.parse().map_err(|_| Error::Parse(format!("bad exponent {e:?}")))? }
            } else {
                return Err(Error::Parse(format!("unknown normalization {:?}", args.normalization)));
            };
            ingest_csv(path, 2, norm)?
        }
        None => (CoefficientOracle::Delta(DeltaForm::new(m_max.max(1) as usize)?), Vec::new()),
    };
    for w in &warnings {
        eprintln!("warning: {w}");
    }
    let mut runs = Vec::new();
    let mut failures = Vec::new();
    for q in qs {
        let r = verify_voronoi_gl2_with(q, a, phi, &oracle, m_max, tol)?;
        println!(
            "q={q} a={a}: lhs={:.12e}{:+.12e}i rhs={:.12e}{:+.12e}i rel_err={:.3e} [{}]",
            r.lhs.re,
            r.lhs.im,
            r.rhs.re,
            r.rhs.im,
            r.rel_err,
            if r.passed { "pass" } else { "FAIL" }
        );
        let entry = json!({
            "q": q,
            "a": a,
            "lhs": c(r.lhs),
            "rhs": c(r.rhs),
            "rel_err": r.rel_err,
            "tails": {"dual": r.dual_tail, "archimedean": r.arch_error},
            "terms": {"lhs": r.lhs_terms, "rhs": r.rhs_terms},
            "height": r.height,
            "timing": r.seconds,
            "passed": r.passed,
        });
        if !r.passed {
            failures.push(entry.clone());
        }
        runs.push(entry);
    }
    let report = json!({
        "check": "voronoi-gl2",
        "tolerance": tol,
        "m_max": m_max,
        "phi": phi,
        "warnings": warnings,
        "runs": runs,
    });
    finish(report, failures, args.json)
}

fn suite(only: Vec<usize>, out: Option<PathBuf>) -> Result<bool> {
    let outcomes = run_suite(&only);
    for o in &outcomes {
        println!("{}", o.line());
    }
    let failures: Vec<Value> = outcomes.iter().filter(|o| !o.passed).map(|o| json!(o)).collect();
    finish(json!({"check": "suite", "criteria": outcomes}), failures, out)
}

fn verify(which: Verify) -> Result<bool> {
    match which {
        Verify::Duality { n, p, a_pi, zeta_val, char_level, order, tol, seed, json } => {
            let grid = DualityGrid { ns: n, ps: p, a_pis: a_pi, zeta_vals: zeta_val, char_level, order, seed };
            grid_report("duality", duality_points(&grid)?, tol, json)
        }
        Verify::Geometric { n, p, zeta_val, y_val, tol, seed, json } => {
            let grid = GeometricGrid { ns: n, ps: p, zeta_vals: zeta_val, y_vals: y_val, seed };
            grid_report("geometric", geometric_points(&grid)?, tol, json)
        }
        Verify::VoronoiGl2(args) => voronoi_gl2(args),
        Verify::Suite { only, json } => suite(only, json),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match cli.command {
        Command::Kloosterman { n, q, c, d, x, y } => kloosterman(n, q, c, d, x, y).map(|_| true),
        Command::Gauss { modulus, index } => gauss(modulus, index).map(|_| true),
        Command::Hecke { satake, m, up_to } => hecke(satake, m, up_to).map(|_| true),
        Command::BesselP(args) => bessel_p(args).map(|_| true),
        Command::BesselArch { rep, phi, y_grid, sigma, height } => {
            bessel_arch(rep, phi, y_grid, sigma, height).map(|_| true)
        }
        Command::Verify { which } => verify(which),
    };
    match res {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
