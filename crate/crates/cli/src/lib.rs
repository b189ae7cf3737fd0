//! `quiver`: Poincaré series, HN strata, finite-field censuses and moment-map
//! flows for quivers described in a JSON file.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use quiver_moduli::flow::{classify_critical, flow_to_critical, FlowOptions, Termination};
use quiver_moduli::hn::{equivariant_ss_series, moduli_series, strata};
use quiver_moduli::io::{
    census_to_json, parse_list, parse_quiver_file, series_from_json, series_to_json, ParsedQuiver, RepFile,
};
use quiver_moduli::quiver::{DimensionVector, StabilityParam};
use quiver_moduli::replab::{Lab, TieBreak, DEFAULT_BUDGET};
use quiver_moduli::series::TruncatedSeries;
use quiver_moduli::supermixed::{example_series, example_strata, BaseCaseProvider, NoBase, SupermixedStratum};
use quiver_moduli::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_REFUSED: i32 = 3;
pub const EXIT_INCONSISTENT: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "quiver", version, about = "Moduli of quiver representations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Tie {
    Smallest,
    Largest,
}

#[derive(Debug, Args)]
struct Common {
    /// Quiver file (JSON)
    #[arg(short = 'q', long = "quiver")]
    quiver: PathBuf,
    /// Dimension vector, comma separated in vertex order
    #[arg(long)]
    dim: Option<String>,
    /// Stability parameter, comma separated in vertex order
    #[arg(long, allow_hyphen_values = true)]
    theta: Option<String>,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Equivariant Poincaré series of the semistable locus
    Poincare {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        truncate: u32,
    },
    /// Poincaré series of the moduli space, P^ss · (1 - t²)
    Moduli {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        truncate: u32,
    },
    /// HN strata with codimensions and Levi factors
    Strata {
        #[command(flatten)]
        common: Common,
    },
    /// HN type of a representation over F_q
    Hn {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        field: u32,
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        budget: Option<u128>,
    },
    /// Jordan-Hölder graded pieces of a semistable representation over F_q
    Jh {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        field: u32,
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum, default_value = "smallest")]
        tie: Tie,
        #[arg(long)]
        budget: Option<u128>,
    },
    /// Count representations over F_q by HN type and compare with the strata model
    Census {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        field: u32,
        #[arg(long)]
        budget: Option<u128>,
    },
    /// Gradient flow of the moment-map energy from a complex representation
    Flow {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        tol: Option<f64>,
        /// Tolerance relative to the size of the representation
        #[arg(long = "rel-tol")]
        rel_tol: Option<f64>,
        #[arg(long = "max-iters")]
        max_iters: Option<usize>,
        #[arg(long)]
        step: Option<f64>,
    },
    /// Series of the orthogonal example with dimension vector (1,1,n)
    SupermixedSeries {
        /// `n`, or `1,1,n`
        #[arg(long)]
        dim: String,
        /// `θ₁,θ₂`
        #[arg(long, allow_hyphen_values = true)]
        theta: String,
        #[arg(long)]
        truncate: u32,
        /// JSON object mapping n₁ to a series `[[exp,"p/q"],...]`
        #[arg(long)]
        base: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Parse and validate a quiver file
    Validate {
        #[arg(short = 'q', long = "quiver")]
        quiver: PathBuf,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
}

/// Runs one command. Output goes to `out`, diagnostics to `err`.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if code == EXIT_OK { write!(out, "{text}") } else { write!(err, "{text}") };
            return code;
        }
    };
    match dispatch(cli.command) {
        Ok(text) => {
            let _ = writeln!(out, "{text}");
            EXIT_OK
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Budget { .. } | Error::UnresolvedBase { .. } => EXIT_REFUSED,
        Error::Consistency(_) => EXIT_INCONSISTENT,
        Error::Structural(_) | Error::Domain(_) | Error::Parse(_) => EXIT_USAGE,
    }
}

fn read(path: &Path) -> Result<String, Error> {
    fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

struct Loaded {
    parsed: ParsedQuiver,
    dim: DimensionVector,
    theta: StabilityParam,
}

fn load(c: &Common) -> Result<Loaded, Error> {
    let parsed = parse_quiver_file(&read(&c.quiver)?)?;
    let q = &parsed.quiver;
    let dim = match (&c.dim, &parsed.defaults.dim) {
        (Some(s), _) => parse_list::<u32>(s)?,
        (None, Some(d)) => d.clone(),
        (None, None) => return Err(Error::Parse("no --dim given and the file has no default".into())),
    };
    let theta = match (&c.theta, &parsed.defaults.theta) {
        (Some(s), _) => parse_list::<i64>(s)?,
        (None, Some(t)) => t.clone(),
        (None, None) => return Err(Error::Parse("no --theta given and the file has no default".into())),
    };
    q.check_len(dim.len())?;
    q.check_len(theta.len())?;
    Ok(Loaded {
        parsed,
        dim: DimensionVector(dim),
        theta: StabilityParam(theta),
    })
}

fn render(format: Format, text: String, value: Value) -> String {
    match format {
        Format::Text => text,
        Format::Json => serde_json::to_string(&value).expect("json values serialize"),
    }
}

fn lab<'q>(l: &'q Loaded, field: u32, budget: Option<u128>) -> Result<Lab<'q>, Error> {
    Ok(Lab::new(&l.parsed.quiver, field)?.with_budget(budget.unwrap_or(DEFAULT_BUDGET)))
}

fn dispatch(cmd: Command) -> Result<String, Error> {
    match cmd {
        Command::Poincare { common, truncate } => {
            let l = load(&common)?;
            let s = equivariant_ss_series(&l.parsed.quiver, &l.dim, &l.theta, truncate)?;
            Ok(render(common.format, s.to_string(), series_to_json(&s)))
        }
        Command::Moduli { common, truncate } => {
            let l = load(&common)?;
            let s = moduli_series(&l.parsed.quiver, &l.dim, &l.theta, truncate)?;
            Ok(render(common.format, s.to_string(), series_to_json(&s)))
        }
        Command::Strata { common } => {
            let l = load(&common)?;
            let records = strata(&l.parsed.quiver, &l.dim, &l.theta)?;
            let text = records
                .iter()
                .map(|r| format!("{}\tcodim {}\tlevi {}", r.hn_type, r.codim, r.levi))
                .collect::<Vec<_>>()
                .join("\n");
            let value = records
                .iter()
                .map(|r| json!({"hn_type": r.hn_type.to_string(), "codim": r.codim, "levi": r.levi.to_string()}))
                .collect();
            Ok(render(common.format, text, Value::Array(value)))
        }
        Command::Hn {
            common,
            field,
            input,
            budget,
        } => {
            let l = load(&common)?;
            let r = RepFile::parse(&read(&input)?)?.to_ffrep(&l.parsed.quiver, Some(&l.dim), field)?;
            let (t, witnesses) = lab(&l, field, budget)?.hn_type(&r, &l.theta)?;
            let value = json!({
                "hn_type": t.to_string(),
                "pieces": t.pieces(),
                "witnesses": witnesses,
            });
            Ok(render(common.format, t.to_string(), value))
        }
        Command::Jh {
            common,
            field,
            input,
            tie,
            budget,
        } => {
            let l = load(&common)?;
            let q = &l.parsed.quiver;
            let r = RepFile::parse(&read(&input)?)?.to_ffrep(q, Some(&l.dim), field)?;
            let tie = match tie {
                Tie::Smallest => TieBreak::LexSmallest,
                Tie::Largest => TieBreak::LexLargest,
            };
            let pieces = lab(&l, field, budget)?.jh_graded(&r, &l.theta, tie)?;
            let text = pieces.iter().map(|(d, _)| d.to_string()).collect::<Vec<_>>().join("\n");
            let value = pieces
                .iter()
                .map(|(d, p)| json!({"dims": d, "rep": RepFile::from_ffrep(q, p)}))
                .collect();
            Ok(render(common.format, text, Value::Array(value)))
        }
        Command::Census { common, field, budget } => {
            let l = load(&common)?;
            let report = lab(&l, field, budget)?.census(&l.dim, &l.theta)?;
            let mut text = String::new();
            for e in &report.entries {
                text.push_str(&format!("{}\tobserved {}\tpredicted {}\n", e.hn_type, e.observed, e.predicted));
            }
            text.push_str(&format!("total {}\tmatch {}", report.total, report.matches));
            Ok(render(common.format, text, census_to_json(&report)))
        }
        Command::Flow {
            common,
            input,
            tol,
            rel_tol,
            max_iters,
            step,
        } => {
            let l = load(&common)?;
            let q = &l.parsed.quiver;
            let r = RepFile::parse(&read(&input)?)?.to_crep(q, Some(&l.dim))?;
            let d = FlowOptions::default();
            let opts = FlowOptions {
                step: step.unwrap_or(d.step),
                max_iters: max_iters.unwrap_or(d.max_iters),
                tol: tol.unwrap_or(d.tol),
                rel_tol: rel_tol.unwrap_or(d.rel_tol),
            };
            let res = flow_to_critical(q, &r, &l.theta, &opts)?;
            let guess = if res.converged() {
                classify_critical(&res, 1e-6, 1e-4).ok().map(|c| c.hn_type.to_string())
            } else {
                None
            };
            let termination = match res.termination {
                Termination::Converged => "converged",
                Termination::MaxIters => "max-iters",
                Termination::Stalled => "stalled",
            };
            let mut text = format!(
                "termination {termination}\niterations {}\nenergy {:e}\nresidual {:e}\nlimit norm {:e}",
                res.iterations,
                res.final_energy(),
                res.residual,
                res.limit.norm()
            );
            for (v, spec) in q.vertices().iter().zip(&res.beta_spectrum) {
                text.push_str(&format!("\nspectrum {v}: {spec:?}"));
            }
            if let Some(g) = &guess {
                text.push_str(&format!("\nhn type {g}"));
            }
            let value = json!({
                "termination": termination,
                "converged": res.converged(),
                "iterations": res.iterations,
                "energy": res.final_energy(),
                "residual": res.residual,
                "limit_norm": res.limit.norm(),
                "beta_spectrum": res.beta_spectrum,
                "energy_trace": res.energy_trace,
                "hn_type": guess,
            });
            Ok(render(common.format, text, value))
        }
        Command::SupermixedSeries {
            dim,
            theta,
            truncate,
            base,
            format,
        } => {
            let dims = parse_list::<u32>(&dim)?;
            let n = match dims[..] {
                [n] | [1, 1, n] => n,
                _ => return Err(Error::Parse(format!("--dim must be n or 1,1,n, got {dim:?}"))),
            };
            let (t1, t2) = match parse_list::<i64>(&theta)?[..] {
                [a, b] => (a, b),
                _ => return Err(Error::Parse(format!("--theta must be θ1,θ2, got {theta:?}"))),
            };
            let provider: Box<dyn BaseCaseProvider> = match base {
                Some(p) => Box::new(FileBase::load(&p, truncate)?),
                None => Box::new(NoBase),
            };
            let s = example_series(n, t1, t2, truncate, provider.as_ref())?;
            let mut text = s.to_string();
            for st in example_strata(n, t1, t2)? {
                text.push_str(&format!(
                    "\n{:?}\tn1 {}\tn2 {}\tcodim {}\tlevi {}",
                    st.family, st.n1, st.n2, st.codim, st.levi
                ));
            }
            Ok(render(format, text, series_to_json(&s)))
        }
        Command::Validate { quiver, format } => {
            let p = parse_quiver_file(&read(&quiver)?)?;
            let kind = if p.symmetric.is_some() { "supermixed" } else { "plain" };
            let text = format!(
                "ok: {} vertices, {} arrows, {kind}",
                p.quiver.num_vertices(),
                p.quiver.arrows().len()
            );
            let value = json!({
                "ok": true,
                "vertices": p.quiver.num_vertices(),
                "arrows": p.quiver.arrows().len(),
                "symmetric": p.symmetric.is_some(),
            });
            Ok(render(format, text, value))
        }
    }
}

/// Base cases read from a file, keyed by `n₁`.
struct FileBase {
    series: std::collections::BTreeMap<u32, TruncatedSeries>,
}

impl FileBase {
    fn load(path: &Path, degree: u32) -> Result<FileBase, Error> {
        let v: Value = serde_json::from_str(&read(path)?).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        let obj = v
            .as_object()
            .ok_or_else(|| Error::Parse("base file must be a JSON object keyed by n1".into()))?;
        let mut series = std::collections::BTreeMap::new();
        for (k, s) in obj {
            let n1 = k.parse::<u32>().map_err(|_| Error::Parse(format!("base key {k:?} is not an integer")))?;
            series.insert(n1, series_from_json(s, degree)?);
        }
        Ok(FileBase { series })
    }
}

impl BaseCaseProvider for FileBase {
    fn base_case(&self, st: &SupermixedStratum, _: u32) -> quiver_moduli::Result<Option<TruncatedSeries>> {
        Ok(self.series.get(&st.n1).cloned())
    }
}
