use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use quadspec::algebra::{parse_fp_poly, prime_power, AlgebraError, FieldCtx, Poly};
use quadspec::cfword::{distance, equivalent, CFWord, CfError, Distance};
use quadspec::oracle::{brute_force_check, OracleError, Root, MAX_DEG_BOUND};
use quadspec::spectrum::{
    approx_constant, candidate_exponents, hall_bound, spectrum, ApproxConstant, Orbit, SpectrumError,
    DEFAULT_MARGIN,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Map, Value};

/// Quadratic Lagrange spectra of power series over finite fields.
#[derive(Parser)]
#[command(name = "quadspec", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    opts: Opts,
}

#[derive(Args)]
struct Opts {
    /// Field order, a prime power up to 1024.
    #[arg(long, global = true, default_value_t = 2)]
    q: u32,
    /// Defining polynomial of F_q over F_p, e.g. "Y^2+Y+1".
    #[arg(long, global = true)]
    modulus: Option<String>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Table)]
    format: Format,
    /// Highest exponent scanned by `spectrum` and `hurwitz`.
    #[arg(long, global = true)]
    max_exponent: Option<i64>,
    /// Worker threads.
    #[arg(long, global = true, env = "QUADSPEC_WORKERS")]
    workers: Option<usize>,
    /// Seed for randomly chosen inputs.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Table,
    Json,
    Csv,
}

#[derive(Args)]
struct Alpha {
    /// Continued-fraction word, e.g. "[0; Y | Y^2, Y+1]".
    #[arg(long)]
    alpha: String,
}

#[derive(Args)]
struct Pair {
    #[arg(long)]
    f: String,
    #[arg(long)]
    g: String,
}

#[derive(Subcommand)]
enum Command {
    /// Exponent e with h(alpha) = q^e.
    Height(Alpha),
    /// Galois conjugate of a purely periodic word [b1; | b2, ..., bs, b1].
    Conjugate(Alpha),
    /// Primitive minimal polynomial A X^2 + B X + C with A monic.
    Minpoly(Alpha),
    /// Whether f and g lie in the same orbit.
    Equiv(Pair),
    /// Exponent e with |f - g| = q^-e.
    Dist(Pair),
    /// Quadratic approximation constant c_alpha(f).
    Cst {
        #[command(flatten)]
        alpha: Alpha,
        #[arg(long)]
        f: String,
    },
    /// Smallest exponent in the spectrum.
    Hurwitz(Alpha),
    /// Coarse and refined starts of the Hall ray.
    HallBound(Alpha),
    /// Every exponent below the Hall ray, with the ray verified over a margin.
    Spectrum(Alpha),
    /// Compare c_alpha(f) with a brute-force scan of orbit elements.
    OracleCheck {
        #[command(flatten)]
        alpha: Alpha,
        /// Random when omitted (see --seed).
        #[arg(long)]
        f: Option<String>,
        #[arg(long, default_value_t = 2)]
        deg_bound: usize,
        #[arg(long, default_value_t = 2)]
        h_min: i64,
        #[arg(long, default_value_t = 8)]
        h_max: i64,
    },
    /// Degree statistics of the period.
    Stats(Alpha),
}

enum Failure {
    Input(String),
    Consistency(String),
}

macro_rules! failure_from {
    ($($t:ty),*) => {$(
        impl From<$t> for Failure {
            fn from(e: $t) -> Self {
                let msg = e.to_string();
                match Kind::from(e) {
                    Kind::Input => Failure::Input(msg),
                    Kind::Consistency => Failure::Consistency(msg),
                }
            }
        }
    )*};
}

failure_from!(AlgebraError, CfError, SpectrumError, OracleError);

enum Kind {
    Input,
    Consistency,
}

impl From<AlgebraError> for Kind {
    fn from(_: AlgebraError) -> Self {
        Kind::Input
    }
}

impl From<CfError> for Kind {
    fn from(_: CfError) -> Self {
        Kind::Input
    }
}

impl From<SpectrumError> for Kind {
    fn from(e: SpectrumError) -> Self {
        match e {
            SpectrumError::HallBoundViolation { .. } | SpectrumError::NoApproximant => Kind::Consistency,
            _ => Kind::Input,
        }
    }
}

impl From<OracleError> for Kind {
    fn from(e: OracleError) -> Self {
        match e {
            OracleError::Laurent(_) => Kind::Consistency,
            OracleError::Spectrum(s) => s.into(),
            _ => Kind::Input,
        }
    }
}

fn field(opts: &Opts) -> Result<FieldCtx, Failure> {
    match &opts.modulus {
        None => Ok(FieldCtx::from_order(opts.q)?),
        Some(text) => {
            let (p, e) = prime_power(opts.q).ok_or_else(|| Failure::Input(format!("{} is not a prime power", opts.q)))?;
            let coeffs = parse_fp_poly(text, p)?;
            Ok(FieldCtx::with_modulus(p, e, &coeffs)?)
        }
    }
}

fn power(e: i64) -> String {
    format!("q^{e}")
}

fn poly_list(xs: &[Poly]) -> Value {
    Value::Array(xs.iter().map(|p| Value::String(p.to_string())).collect())
}

fn run(cli: &Cli) -> Result<Value, Failure> {
    let opts = &cli.opts;
    if let Some(n) = opts.workers {
        if n == 0 {
            return Err(Failure::Input("--workers must be at least 1".into()));
        }
        // Only fails if a pool already exists, which cannot happen here.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    if let Some(m) = opts.max_exponent {
        if m < 2 {
            return Err(Failure::Input("--max-exponent must be at least 2".into()));
        }
    }
    let k = field(opts)?;
    let parse = |s: &str| CFWord::parse(&k, s).map_err(Failure::from);
    let out = match &cli.command {
        Command::Height(a) => {
            let w = parse(&a.alpha)?;
            let e = w.height()?;
            json!({"alpha": w.to_string(), "exponent": e, "value": power(e)})
        }
        Command::Conjugate(a) => {
            let w = parse(&a.alpha)?;
            json!({"alpha": w.to_string(), "conjugate": w.galois_conjugate_period(&k)?.to_string()})
        }
        Command::Minpoly(a) => {
            let w = parse(&a.alpha)?;
            let (pa, pb, pc) = w.minimal_polynomial(&k)?;
            json!({"alpha": w.to_string(), "a": pa.to_string(), "b": pb.to_string(), "c": pc.to_string()})
        }
        Command::Equiv(p) => {
            let (f, g) = (parse(&p.f)?, parse(&p.g)?);
            json!({"f": f.to_string(), "g": g.to_string(), "equivalent": equivalent(&k, &f, &g)?})
        }
        Command::Dist(p) => {
            let (f, g) = (parse(&p.f)?, parse(&p.g)?);
            match distance(&f, &g) {
                Distance::Equal => json!({"f": f.to_string(), "g": g.to_string(), "equal": true, "exponent": null, "value": "0"}),
                Distance::Exponent(e) => {
                    json!({"f": f.to_string(), "g": g.to_string(), "equal": false, "exponent": e, "value": power(-e)})
                }
            }
        }
        Command::Cst { alpha, f } => {
            let (a, f) = (parse(&alpha.alpha)?, parse(f)?);
            match approx_constant(&k, &a, &f)? {
                ApproxConstant::Finite(m) => json!({"exponent": m, "value": power(-m)}),
                ApproxConstant::ZeroAxiomatic => json!({"exponent": null, "value": "0"}),
            }
        }
        Command::Hurwitz(a) => {
            let w = parse(&a.alpha)?;
            let (_, refined) = hall_bound(&w)?;
            let cap = opts.max_exponent.unwrap_or(refined).min(refined);
            let found = candidate_exponents(&k, &w, cap)?;
            match found.iter().next() {
                Some(&m) => json!({"alpha": w.to_string(), "exponent": m, "value": power(-m)}),
                None => json!({"alpha": w.to_string(), "exponent": null, "value": null}),
            }
        }
        Command::HallBound(a) => {
            let w = parse(&a.alpha)?;
            let (coarse, refined) = hall_bound(&w)?;
            json!({"alpha": w.to_string(), "coarse": coarse, "refined": refined})
        }
        Command::Spectrum(a) => {
            let w = parse(&a.alpha)?;
            let (_, refined) = hall_bound(&w)?;
            let margin = match opts.max_exponent {
                None => DEFAULT_MARGIN,
                Some(m) if m >= refined => m - refined,
                Some(m) => {
                    return Err(Failure::Input(format!("--max-exponent {m} is below the Hall start {refined}")));
                }
            };
            let rep = spectrum(&k, &w, margin)?;
            json!({
                "q": rep.q,
                "alpha": w.to_string(),
                "exponents_below_bound": rep.exponents_below_bound,
                "hall_start": rep.hall_start,
                "hall_bound_coarse": rep.hall_bound_coarse,
                "hurwitz_exponent": rep.hurwitz_exponent,
                "contains_zero": rep.contains_zero,
                "zero_is_axiomatic": rep.zero_is_axiomatic,
            })
        }
        Command::OracleCheck { alpha, f, deg_bound, h_min, h_max } => {
            let a = parse(&alpha.alpha)?;
            if *deg_bound > MAX_DEG_BOUND {
                return Err(Failure::Input(format!("--deg-bound must be at most {MAX_DEG_BOUND}")));
            }
            let f = match f {
                Some(s) => parse(s)?,
                None => random_f(&k, &a, opts.seed)?,
            };
            let head = json!({
                "alpha": a.to_string(),
                "f": f.to_string(),
                "deg_bound": deg_bound,
                "window": [h_min, h_max],
            });
            let mut obj = match head {
                Value::Object(m) => m,
                _ => unreachable!(),
            };
            match brute_force_check(&k, &a, &f, *deg_bound, (*h_min, *h_max)) {
                Ok(v) => {
                    let [ma, mb, mc, md] = &v.witness_matrix;
                    let verdict = match (v.pass, v.violations) {
                        (true, _) => "PASS",
                        (false, 0) => "INCONCLUSIVE",
                        _ => "FAIL",
                    };
                    obj.insert("verdict".into(), json!(verdict));
                    obj.insert("fast_exponent".into(), json!(v.fast_exponent));
                    obj.insert("best_exponent".into(), json!(v.best_exponent));
                    obj.insert("violations".into(), json!(v.violations));
                    obj.insert("examined".into(), json!(v.examined));
                    obj.insert(
                        "witness".into(),
                        json!({
                            "matrix": [ma.to_string(), mb.to_string(), mc.to_string(), md.to_string()],
                            "root": match v.witness_root { Root::Alpha => "alpha", Root::Conjugate => "conjugate" },
                            "height": v.witness_height,
                        }),
                    );
                    if verdict == "FAIL" {
                        emit(cli, &Value::Object(obj));
                        return Err(Failure::Consistency("an orbit element beats the fast-path exponent".into()));
                    }
                }
                Err(OracleError::EmptyWindow(..)) => {
                    obj.insert("verdict".into(), json!("EMPTY_WINDOW"));
                }
                Err(e) => return Err(e.into()),
            }
            Value::Object(obj)
        }
        Command::Stats(a) => {
            let w = parse(&a.alpha)?;
            let st = w.cf_stats()?;
            json!({
                "alpha": w.to_string(),
                "period": poly_list(w.period()),
                "max_degree": st.max,
                "max_pair_degree": st.max_pair,
                "min_degree": st.min,
            })
        }
    };
    Ok(out)
}

fn random_f(k: &FieldCtx, alpha: &CFWord, seed: u64) -> Result<CFWord, Failure> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let orbit = Orbit::new(k, alpha)?;
    loop {
        let len = rng.gen_range(1..=3);
        let period: Vec<Poly> = (0..len)
            .map(|_| {
                let d = rng.gen_range(1..=3usize);
                let mut c: Vec<_> = (0..d).map(|_| k.element(rng.gen_range(0..k.order())).unwrap()).collect();
                c.push(k.element(rng.gen_range(1..k.order())).unwrap());
                Poly::from_coeffs(c)
            })
            .collect();
        let f = CFWord::purely_periodic(period)?;
        if !orbit.contains_period(f.period()) {
            return Ok(f);
        }
    }
}

fn scalar(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => "-".into(),
        Value::Array(xs) => xs.iter().map(scalar).collect::<Vec<_>>().join(" "),
        Value::Object(m) => m.iter().map(|(k, v)| format!("{k}={}", scalar(v))).collect::<Vec<_>>().join(" "),
        other => other.to_string(),
    }
}

fn csv_field(s: String) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s
    }
}

fn emit(cli: &Cli, value: &Value) {
    let obj: &Map<String, Value> = value.as_object().expect("object output");
    let spectrum = matches!(cli.command, Command::Spectrum(_));
    match cli.opts.format {
        Format::Json => println!("{}", serde_json::to_string(value).unwrap()),
        Format::Csv if spectrum => {
            let below: Vec<i64> =
                obj["exponents_below_bound"].as_array().unwrap().iter().map(|x| x.as_i64().unwrap()).collect();
            let start = obj["hall_start"].as_i64().unwrap();
            let last = match cli.opts.max_exponent {
                Some(m) => m,
                None => start + DEFAULT_MARGIN,
            };
            println!("exponent,value,member");
            for m in 2..=last {
                let member = m >= start || below.contains(&m);
                println!("{m},q^-{m},{member}");
            }
        }
        Format::Csv => {
            println!("{}", obj.keys().cloned().collect::<Vec<_>>().join(","));
            println!("{}", obj.values().map(|v| csv_field(scalar(v))).collect::<Vec<_>>().join(","));
        }
        Format::Table if spectrum => {
            let start = obj["hall_start"].as_i64().unwrap();
            println!("alpha               {}", scalar(&obj["alpha"]));
            println!("q                   {}", obj["q"]);
            println!("hurwitz exponent    {}", obj["hurwitz_exponent"]);
            println!("hall start          {start} (refined)");
            println!("hall bound          {} (coarse)", obj["hall_bound_coarse"]);
            println!("members below ray   {}", scalar(&obj["exponents_below_bound"]));
            println!("ray                 every exponent >= {start}");
            println!("zero                present (axiomatic, not computed)");
        }
        Format::Table => {
            let width = obj.keys().map(String::len).max().unwrap_or(0);
            for (key, v) in obj {
                println!("{key:width$}  {}", scalar(v));
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(v) => {
            emit(&cli, &v);
            ExitCode::SUCCESS
        }
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Consistency(msg)) => {
            eprintln!("internal consistency failure: {msg}");
            ExitCode::from(3)
        }
    }
}
