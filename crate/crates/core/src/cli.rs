//! Command-line front end. [`run`] parses arguments, executes one subcommand and writes
//! its report to `out`; diagnostics go to `err` as `error:<code>:<message>`.
//!
//! Exit codes: 0 on success, 1 on a domain error, 2 on a usage error.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use serde_json::{json, Map, Value};

use crate::config::{config_load, Config};
use crate::error::{Error, Result};
use crate::forms::{class_group, is_fundamental, Form};
use crate::geodesics::{
    cutting_sequence_with, duke_from_samples, expanding_eigenvalue, form_to_matrix_cf,
    form_to_matrix_pell, frame, length, matrix_to_form, reduce_matrix, sample_class,
    unoriented_count, visual_point, HyperbolicMatrix, Region,
};
use crate::orbits::{
    cohen_ratio_with, geometric_grid, growth_exponent_with, hensley_delta, mcmullen_search_with,
    multiplicity_with, zaremba_check, zaremba_scan_with, Budget, LinearFunctional, OrbitQuery,
};
use crate::pell::{cross_check, solve_pell4, solve_pell_neg4};
use crate::surd::{cf_eval, cf_expand, reduce_even, CFExpansion, IntMatrix2, QuadSurd};

/// Environment variable read for the worker count when `--workers` is absent.
pub const WORKERS_ENV: &str = "THINORBITS_WORKERS";

const SCHEMAS: &str = "\
Output formats (--format):
  text  records as key=value lines; tables as rows, with summary lines prefixed by '# '
  csv   records as field,value; tables with a single header row
  json  one object: record fields, or summary fields plus \"rows\" (array of objects)
        and \"truncated\"
Arrays print as [a,b,...] in text, space-separated in csv, and as arrays in json.
Tables cut short by --limit or --time-budget end with '# truncated' in text and csv.

Errors are written to stderr as error:<code>:<message>.
Exit status: 0 ok, 1 domain error, 2 usage error.

Config file (--config): flat key = value lines; keys q_bound, step, corner_tolerance,
letters, digits, workers. Command-line flags override the file. The worker count may
also be set with THINORBITS_WORKERS.";

#[derive(Parser, Debug)]
#[command(
    name = "thinorbits",
    version,
    about = "Quadratic forms, continued fractions, modular geodesics and thin orbits",
    after_long_help = SCHEMAS
)]
struct Cli {
    /// Output format; each command has its own default.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Maximum number of table rows to emit.
    #[arg(long, global = true)]
    limit: Option<usize>,
    /// Wall-clock budget in seconds for long-running scans.
    #[arg(long, global = true)]
    time_budget: Option<f64>,
    /// Worker threads for the parallel scans.
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Settings file of key = value lines.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Csv,
    Json,
}

#[derive(Args, Debug)]
struct AxisArgs {
    /// Indefinite form `A,B,C`; its automorph from the Pell solution is used.
    #[arg(long, allow_hyphen_values = true, conflicts_with = "matrix", required_unless_present = "matrix")]
    form: Option<String>,
    /// Hyperbolic matrix `(a b;c d)` or `a,b,c,d`.
    #[arg(long, allow_hyphen_values = true)]
    matrix: Option<String>,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Continued fraction, decimal value and reduction of a quadratic surd.
    #[command(after_long_help = "Input: (P+C*sqrt(D))/R or a periodic expansion [a0;a1,(p1,p2)].\n\
        Fields: surd, conjugate, cf, decimal, norm, trace, is_reduced, reduced, gamma, reduced_cf.")]
    Surd {
        #[arg(allow_hyphen_values = true)]
        value: String,
        /// Decimal digits after the point.
        #[arg(long)]
        digits: Option<u32>,
    },
    /// Narrow class group: one reduced representative per class with its CF period.
    #[command(
        allow_negative_numbers = true,
        after_long_help = "Default format json: {discriminant, h, fundamental, [unoriented], rows: [{rep, period, cycle_length}], truncated}.\n\
        csv columns: rep,period,cycle_length."
    )]
    Classgroup {
        #[arg(value_parser = parse_bigint)]
        d: BigInt,
    },
    /// Least solutions of t^2 - D s^2 = 4 and = -4.
    #[command(after_long_help = "Fields: D, t, s, epsilon, minus_t, minus_s, minus_epsilon, brute_force_agrees.")]
    Pell {
        #[arg(value_parser = parse_bigint)]
        d: BigInt,
    },
    /// Closed geodesic of a hyperbolic matrix or of an indefinite form.
    #[command(after_long_help = "Fields: matrix, form, trace, lambda, length_exact, length, visual_point, \
        visual_cf, frame_z, frame_zeta, reduced_matrix, gamma[, cf_matrix].")]
    Geodesic {
        #[command(flatten)]
        axis: AxisArgs,
    },
    /// Cutting sequence of the geodesic flow through the fundamental domain.
    #[command(after_long_help = "Fields: matrix, letters (T, T- for T^-1, S), runs, count.")]
    Cutseq {
        #[command(flatten)]
        axis: AxisArgs,
        /// Number of letters.
        #[arg(long)]
        letters: Option<usize>,
        /// Distance from i, rho, rho+1 counted as a corner hit.
        #[arg(long)]
        corner_tolerance: Option<f64>,
    },
    /// Fraction of closed-geodesic arclength in boxes versus normalized hyperbolic area.
    #[command(after_long_help = "Default format csv, columns region,statistic,expected,ratio.\n\
        Regions are x0,x1,y0,y1 (y1 may be inf); three default boxes when none are given.")]
    Duke {
        #[arg(value_parser = parse_bigint)]
        d: BigInt,
        /// Box `x0,x1,y0,y1`; repeatable.
        #[arg(long = "region", allow_hyphen_values = true)]
        regions: Vec<String>,
        /// Arclength between samples.
        #[arg(long)]
        step: Option<f64>,
    },
    /// Counts N(X) in the max-entry ball and the fitted growth slope 2 delta_A.
    #[command(after_long_help = "Default format csv, columns X,count. Summary: A, slope, delta, hensley_delta \
        (the large-A approximation, for comparison only).")]
    Growth {
        #[arg(long, default_value_t = 2)]
        alphabet: u32,
        #[arg(long, default_value_t = 100)]
        lo: u64,
        #[arg(long, default_value_t = 100_000)]
        hi: u64,
        #[arg(long, default_value_t = 10)]
        points: usize,
        /// Explicit comma-separated radii, replacing lo/hi/points.
        #[arg(long, value_delimiter = ',')]
        grid: Option<Vec<u64>>,
    },
    /// Multiplicity of n as a value of a linear functional on the ball.
    #[command(
        allow_negative_numbers = true,
        after_long_help = "Default format json: {n, X, A, functional, count, admissible, q_bound, witnesses, truncated}.\n\
        Functional: top-left, trace, or alpha,beta,gamma,delta. X defaults to n."
    )]
    Mult {
        n: i64,
        #[arg(long, default_value_t = 2)]
        alphabet: u32,
        #[arg(long, default_value = "top-left", allow_hyphen_values = true)]
        functional: String,
        /// Ball radius.
        #[arg(long)]
        x: Option<u64>,
        /// Include the generator words.
        #[arg(long)]
        witnesses: bool,
        /// Largest modulus for the admissibility test.
        #[arg(long)]
        q_bound: Option<u32>,
    },
    /// Least b with b/d having all partial quotients at most A.
    #[command(after_long_help = "Fields: d, A, found, b, digits.")]
    Zaremba {
        d: u64,
        #[arg(long, default_value_t = 5)]
        alphabet: u32,
    },
    /// Zaremba check for every d up to N.
    #[command(after_long_help = "Default format csv, columns d,b,digits (b empty for exceptions). \
        Summary: N, A, density, exceptions, undecided (d left unreached by a time budget).")]
    ZarembaScan {
        n: u64,
        #[arg(long, default_value_t = 5)]
        alphabet: u32,
    },
    /// Top-left multiplicities against the conjectured main term.
    #[command(after_long_help = "Default format csv, columns n,mult,predicted,ratio. Summary: A, delta, mean_ratio.")]
    Cohen {
        #[arg(long, default_value_t = 2)]
        alphabet: u32,
        #[arg(long, default_value_t = 1000)]
        lo: u64,
        #[arg(long, default_value_t = 10_000)]
        hi: u64,
    },
    /// Periodic words whose continued fraction lies in a fixed real quadratic field.
    #[command(after_long_help = "Default format text: one canonical word per line and its surd. \
        csv columns word,value.")]
    Mcmullen {
        #[arg(long, default_value_t = 2)]
        alphabet: u32,
        #[arg(long, default_value_t = 5)]
        kernel: u64,
        #[arg(long, default_value_t = 20)]
        max_period: usize,
    },
}

fn parse_bigint(s: &str) -> std::result::Result<BigInt, String> {
    let t = s.trim();
    t.strip_prefix('+')
        .unwrap_or(t)
        .parse()
        .map_err(|_| format!("malformed integer {s:?}"))
}

struct Table {
    columns: Vec<&'static str>,
    rows: Vec<Vec<Value>>,
    truncated: bool,
}

struct Report {
    fields: Vec<(&'static str, Value)>,
    table: Option<Table>,
    default_format: Format,
}

impl Report {
    fn record(fields: Vec<(&'static str, Value)>) -> Self {
        Report { fields, table: None, default_format: Format::Text }
    }

    fn table(fields: Vec<(&'static str, Value)>, columns: Vec<&'static str>, rows: Vec<Vec<Value>>) -> Self {
        Report {
            fields,
            table: Some(Table { columns, rows, truncated: false }),
            default_format: Format::Csv,
        }
    }

    fn default_format(mut self, f: Format) -> Self {
        self.default_format = f;
        self
    }

    fn truncated(mut self, t: bool) -> Self {
        if let Some(tab) = &mut self.table {
            tab.truncated |= t;
        }
        self
    }

    fn limit(&mut self, limit: Option<usize>) {
        if let (Some(tab), Some(n)) = (&mut self.table, limit) {
            if tab.rows.len() > n {
                tab.rows.truncate(n);
                tab.truncated = true;
            }
        }
    }

    fn render(&self, format: Format) -> String {
        let mut s = String::new();
        match (format, &self.table) {
            (Format::Json, _) => {
                let mut obj = Map::new();
                for (k, v) in &self.fields {
                    obj.insert((*k).to_string(), v.clone());
                }
                if let Some(t) = &self.table {
                    let rows = t
                        .rows
                        .iter()
                        .map(|r| {
                            let o: Map<String, Value> =
                                t.columns.iter().map(|c| c.to_string()).zip(r.iter().cloned()).collect();
                            Value::Object(o)
                        })
                        .collect();
                    obj.insert("rows".into(), Value::Array(rows));
                    obj.insert("truncated".into(), Value::Bool(t.truncated));
                }
                s.push_str(&serde_json::to_string_pretty(&Value::Object(obj)).expect("serializable"));
                s.push('\n');
            }
            (Format::Text, None) => {
                for (k, v) in &self.fields {
                    s.push_str(&format!("{k}={}\n", text_value(v)));
                }
            }
            (Format::Csv, None) => {
                s.push_str("field,value\n");
                for (k, v) in &self.fields {
                    s.push_str(&format!("{k},{}\n", csv_cell(v)));
                }
            }
            (Format::Text, Some(t)) => {
                for (k, v) in &self.fields {
                    s.push_str(&format!("# {k}={}\n", text_value(v)));
                }
                for r in &t.rows {
                    let cells: Vec<String> = r.iter().map(text_value).collect();
                    s.push_str(&cells.join(" "));
                    s.push('\n');
                }
                if t.truncated {
                    s.push_str("# truncated\n");
                }
            }
            (Format::Csv, Some(t)) => {
                s.push_str(&t.columns.join(","));
                s.push('\n');
                for r in &t.rows {
                    let cells: Vec<String> = r.iter().map(csv_cell).collect();
                    s.push_str(&cells.join(","));
                    s.push('\n');
                }
                if t.truncated {
                    s.push_str("# truncated\n");
                }
            }
        }
        s
    }
}

fn text_value(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => "none".into(),
        Value::Array(a) => format!("[{}]", a.iter().map(text_value).collect::<Vec<_>>().join(",")),
        other => other.to_string(),
    }
}

fn csv_cell(v: &Value) -> String {
    let raw = match v {
        Value::String(s) => s.clone(),
        Value::Null => String::new(),
        Value::Array(a) => a.iter().map(csv_cell).collect::<Vec<_>>().join(" "),
        other => other.to_string(),
    };
    if raw.contains([',', '"', '\n']) {
        format!("\"{}\"", raw.replace('"', "\"\""))
    } else {
        raw
    }
}

fn big(b: &BigInt) -> Value {
    Value::Number(b.to_string().parse().expect("decimal integer"))
}

fn bigs(v: &[BigInt]) -> Value {
    Value::Array(v.iter().map(big).collect())
}

fn form_value(f: &Form) -> Value {
    bigs(&[f.a.clone(), f.b.clone(), f.c.clone()])
}

fn point(z: (f64, f64)) -> Value {
    json!([z.0, z.1])
}

fn fraction(p: &(BigInt, BigInt)) -> String {
    if p.1 == BigInt::from(1) {
        p.0.to_string()
    } else {
        format!("{}/{}", p.0, p.1)
    }
}

fn parse_form(s: &str) -> Result<Form> {
    let t = s.trim();
    if t.starts_with('[') {
        t.parse()
    } else {
        format!("[{t}]").parse()
    }
}

fn parse_surd(s: &str) -> Result<QuadSurd> {
    if s.trim_start().starts_with('[') {
        let e: CFExpansion = s.parse()?;
        if e.period().is_empty() {
            return Err(Error::Parse(format!("{s:?} has no period, so it is rational")));
        }
        Ok(cf_eval(&e))
    } else {
        s.parse()
    }
}

fn axis_matrix(axis: &AxisArgs) -> Result<(HyperbolicMatrix, Option<Form>)> {
    match (&axis.form, &axis.matrix) {
        (Some(f), _) => {
            let f = parse_form(f)?;
            Ok((form_to_matrix_pell(&f)?, Some(f)))
        }
        (None, Some(m)) => Ok((HyperbolicMatrix::new(m.parse::<IntMatrix2>()?)?, None)),
        (None, None) => Err(Error::Parse("one of --form or --matrix is required".into())),
    }
}

const DEFAULT_REGIONS: [&str; 3] = ["-0.5,-0.1,0.9,1.3", "-0.1,0.3,0.9,1.3", "-0.5,0.5,1.5,3"];

fn execute(cmd: &Cmd, cfg: &Config, budget: &Budget) -> Result<Report> {
    Ok(match cmd {
        Cmd::Surd { value, digits } => {
            let x = parse_surd(value)?;
            let (reduced, gamma) = reduce_even(&x);
            Report::record(vec![
                ("surd", json!(x.to_string())),
                ("conjugate", json!(x.galois_conjugate().to_string())),
                ("cf", json!(cf_expand(&x).to_string())),
                ("decimal", json!(x.to_decimal(digits.unwrap_or(cfg.digits)))),
                ("norm", json!(fraction(&x.norm()))),
                ("trace", json!(fraction(&x.trace()))),
                ("is_reduced", json!(x.is_reduced())),
                ("reduced", json!(reduced.to_string())),
                ("gamma", json!(gamma.to_string())),
                ("reduced_cf", json!(cf_expand(&reduced).to_string())),
            ])
        }
        Cmd::Classgroup { d } => {
            let listing = class_group(d)?;
            let mut fields = vec![
                ("discriminant", big(d)),
                ("h", json!(listing.h)),
                ("fundamental", json!(is_fundamental(d))),
            ];
            if d > &BigInt::from(0) {
                fields.push(("unoriented", json!(unoriented_count(&listing))));
            }
            let rows = listing
                .classes
                .iter()
                .map(|c| vec![form_value(&c.rep), bigs(&c.period), json!(c.cycle.len())])
                .collect();
            Report::table(fields, vec!["rep", "period", "cycle_length"], rows).default_format(Format::Json)
        }
        Cmd::Pell { d } => {
            let plus = solve_pell4(d)?;
            let minus = solve_pell_neg4(d)?;
            let mut agree = cross_check(d, &plus);
            if let Some(m) = &minus {
                agree &= cross_check(d, m);
            }
            let opt = |f: fn(&crate::pell::PellSolution) -> Value| minus.as_ref().map_or(Value::Null, f);
            Report::record(vec![
                ("D", big(d)),
                ("t", big(&plus.t)),
                ("s", big(&plus.s)),
                ("epsilon", json!(plus.epsilon.to_string())),
                ("minus_t", opt(|m| big(&m.t))),
                ("minus_s", opt(|m| big(&m.s))),
                ("minus_epsilon", opt(|m| json!(m.epsilon.to_string()))),
                ("brute_force_agrees", json!(agree)),
            ])
        }
        Cmd::Geodesic { axis } => {
            let (m, form) = axis_matrix(axis)?;
            let lambda = expanding_eigenvalue(&m);
            let alpha = visual_point(&m)?;
            let fr = frame(&m);
            let (red, gamma) = reduce_matrix(&m)?;
            let mut fields = vec![
                ("matrix", json!(m.matrix().to_string())),
                ("form", form_value(&matrix_to_form(&m))),
                ("trace", big(&m.trace())),
                ("lambda", json!(lambda.to_string())),
                ("length_exact", json!(format!("2*log({lambda})"))),
                ("length", json!(length(&m))),
                ("visual_point", json!(alpha.to_string())),
                ("visual_cf", json!(cf_expand(&alpha).to_string())),
                ("frame_z", point(fr.z)),
                ("frame_zeta", point(fr.zeta)),
                ("reduced_matrix", json!(red.matrix().to_string())),
                ("gamma", json!(gamma.to_string())),
            ];
            if let Some(f) = form {
                fields.push(("cf_matrix", json!(form_to_matrix_cf(&f)?.matrix().to_string())));
            }
            Report::record(fields)
        }
        Cmd::Cutseq { axis, letters, corner_tolerance } => {
            let (m, _) = axis_matrix(axis)?;
            let tol = corner_tolerance.unwrap_or(cfg.corner_tolerance);
            let cs = cutting_sequence_with(&m, letters.unwrap_or(cfg.letters), tol)?;
            Report::record(vec![
                ("matrix", json!(m.matrix().to_string())),
                ("letters", json!(cs.letters_string())),
                ("runs", json!(cs.runs)),
                ("count", json!(cs.letters.len())),
            ])
        }
        Cmd::Duke { d, regions, step } => {
            let step = step.unwrap_or(cfg.step);
            if !(step.is_finite() && step > 0.0) {
                return Err(Error::BadBound(format!("step {step} must be positive")));
            }
            let names: Vec<String> = if regions.is_empty() {
                DEFAULT_REGIONS.iter().map(|s| s.to_string()).collect()
            } else {
                regions.clone()
            };
            let boxes = names.iter().map(|r| r.parse::<Region>()).collect::<Result<Vec<_>>>()?;
            let samples = sample_class(d, step)?;
            let reports: Vec<_> = boxes.iter().map(|b| duke_from_samples(&samples, b)).collect();
            let total = reports.first().map_or(0, |r| r.samples);
            let rows = names
                .iter()
                .zip(&reports)
                .map(|(n, r)| vec![json!(n), json!(r.statistic), json!(r.expected), json!(r.ratio())])
                .collect();
            Report::table(
                vec![("D", big(d)), ("h", json!(samples.len())), ("step", json!(step)), ("samples", json!(total))],
                vec!["region", "statistic", "expected", "ratio"],
                rows,
            )
        }
        Cmd::Growth { alphabet, lo, hi, points, grid } => {
            let grid = grid.clone().unwrap_or_else(|| geometric_grid(*lo, *hi, *points));
            let fit = growth_exponent_with(*alphabet, &grid, budget)?;
            let rows = fit.counts.iter().map(|&(x, n)| vec![json!(x), json!(n)]).collect();
            Report::table(
                vec![
                    ("A", json!(alphabet)),
                    ("slope", json!(fit.slope)),
                    ("delta", json!(fit.delta())),
                    ("hensley_delta", json!(hensley_delta(*alphabet))),
                ],
                vec!["X", "count"],
                rows,
            )
            .truncated(fit.truncated)
        }
        Cmd::Mult { n, alphabet, functional, x, witnesses, q_bound } => {
            let f: LinearFunctional = functional.parse()?;
            let q_bound = q_bound.unwrap_or(cfg.q_bound);
            let q = OrbitQuery::new(*alphabet, x.unwrap_or_else(|| (*n).max(1) as u64))?;
            let r = multiplicity_with(&q, &f, *n, *witnesses, q_bound, budget)?;
            Report::record(vec![
                ("n", json!(r.n)),
                ("X", json!(r.x)),
                ("A", json!(alphabet)),
                ("functional", json!([f.alpha, f.beta, f.gamma, f.delta])),
                ("count", json!(r.count)),
                ("admissible", json!(r.admissible)),
                ("q_bound", json!(q_bound)),
                ("witnesses", json!(r.witnesses)),
                ("truncated", json!(r.truncated)),
            ])
            .default_format(Format::Json)
        }
        Cmd::Zaremba { d, alphabet } => {
            if *d == 0 {
                return Err(Error::BadBound("d must be positive".into()));
            }
            let hit = zaremba_check(*d, *alphabet);
            Report::record(vec![
                ("d", json!(d)),
                ("A", json!(alphabet)),
                ("found", json!(hit.is_some())),
                ("b", json!(hit.as_ref().map(|h| h.b))),
                ("digits", json!(hit.as_ref().map(|h| h.digits.clone()))),
            ])
        }
        Cmd::ZarembaScan { n, alphabet } => {
            let scan = zaremba_scan_with(*n, *alphabet, budget)?;
            let rows = scan
                .hits
                .iter()
                .enumerate()
                .map(|(i, h)| {
                    vec![
                        json!(i + 1),
                        json!(h.as_ref().map(|h| h.b)),
                        h.as_ref().map_or(Value::Null, |h| json!(h.digits)),
                    ]
                })
                .collect();
            Report::table(
                vec![
                    ("N", json!(n)),
                    ("A", json!(alphabet)),
                    ("density", json!(scan.density)),
                    ("exceptions", json!(scan.exceptions)),
                    ("undecided", json!(scan.undecided)),
                ],
                vec!["d", "b", "digits"],
                rows,
            )
            .truncated(scan.truncated)
        }
        Cmd::Cohen { alphabet, lo, hi } => {
            let rep = cohen_ratio_with(*alphabet, *lo, *hi, budget)?;
            let mean = rep.rows.iter().map(|r| r.ratio).sum::<f64>() / rep.rows.len() as f64;
            let rows = rep
                .rows
                .iter()
                .map(|r| vec![json!(r.n), json!(r.mult), json!(r.predicted), json!(r.ratio)])
                .collect();
            Report::table(
                vec![("A", json!(alphabet)), ("delta", json!(rep.delta)), ("mean_ratio", json!(mean))],
                vec!["n", "mult", "predicted", "ratio"],
                rows,
            )
            .truncated(rep.truncated)
        }
        Cmd::Mcmullen { alphabet, kernel, max_period } => {
            let words = mcmullen_search_with(*alphabet, *kernel, *max_period, budget)?;
            let rows = words
                .iter()
                .map(|w| vec![json!(w.word), json!(w.value.to_string())])
                .collect();
            Report::table(vec![], vec!["word", "value"], rows)
                .default_format(Format::Text)
                .truncated(budget.tripped())
        }
    })
}

fn worker_count(flag: Option<usize>, cfg: &Config) -> Result<Option<usize>> {
    if flag.is_some() {
        return Ok(flag);
    }
    if let Ok(v) = std::env::var(WORKERS_ENV) {
        let n = v
            .trim()
            .parse()
            .map_err(|_| Error::Config(format!("{WORKERS_ENV}={v:?} is not a worker count")))?;
        return Ok(Some(n));
    }
    Ok(cfg.workers)
}

fn run_parsed(cli: &Cli) -> Result<String> {
    let cfg = config_load(cli.config.as_deref())?;
    let budget = Budget::from_option(cli.time_budget);
    let go = || -> Result<String> {
        let mut report = execute(&cli.cmd, &cfg, &budget)?;
        report.limit(cli.limit);
        Ok(report.render(cli.format.unwrap_or(report.default_format)))
    };
    match worker_count(cli.workers, &cfg)? {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::Config(format!("worker pool: {e}")))?
            .install(go),
        None => go(),
    }
}

/// Runs the command line `args` (including the program name) and returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind::{DisplayHelp, DisplayVersion};
            return if matches!(e.kind(), DisplayHelp | DisplayVersion) {
                let _ = write!(out, "{e}");
                0
            } else {
                let msg = e.to_string();
                let first = msg.lines().next().unwrap_or("").trim_start_matches("error: ");
                let _ = writeln!(err, "error:usage:{first}");
                2
            };
        }
    };
    match run_parsed(&cli) {
        Ok(text) => {
            let _ = out.write_all(text.as_bytes());
            0
        }
        Err(e) => {
            let _ = writeln!(err, "error:{}:{}", e.code(), e.to_string().replace('\n', " "));
            if matches!(e, Error::Parse(_)) {
                2
            } else {
                1
            }
        }
    }
}
