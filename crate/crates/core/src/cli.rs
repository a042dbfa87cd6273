//! Command-line front end. Exit codes: 0 decided or completed, 2 an
//! UNDECIDED outcome or exhausted budget, 1 usage or I/O error.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::config::{Budget, Tolerances};
use crate::constants::{constants, profiles, ConstantName};
use crate::error::{Error, Result};
use crate::io::{load_tuple, read_json, tuple_to_json};
use crate::oracles::{contains, hausdorff, inclusion_scale, plot_level1, svg_polygon, Verdict};
use crate::oracles::membership::membership_tol;
use crate::report::{verify_report, Report, RunConfig};
use crate::sets::catalog::{catalog, NAMES};
use crate::sets::expr::{load_set, set_to_json};
use crate::sets::{box_sum, FreeConvexSet};
use crate::suites::run_suite;

#[derive(Debug, Parser)]
#[command(name = "freeconvex", version, about = "Certified queries on matrix convex sets")]
pub struct Cli {
    #[command(flatten)]
    pub run: RunArgs,
    #[command(subcommand)]
    pub command: Command,
}

/// Work budget and tolerances; defaults are `Budget::default()` and
/// `Tolerances::default()` unless `--quick` is given.
#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    /// Start from the light test budget.
    #[arg(long, global = true)]
    pub quick: bool,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Highest matrix level visited by sweeps.
    #[arg(long, global = true)]
    pub level_cap: Option<usize>,
    /// Verdict margin for membership queries.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    #[arg(long, global = true)]
    pub budget_sweep_starts: Option<usize>,
    #[arg(long, global = true)]
    pub budget_sweep_iters: Option<usize>,
    #[arg(long, global = true)]
    pub budget_seesaw_iters: Option<usize>,
    #[arg(long, global = true)]
    pub budget_witness_samples: Option<usize>,
    #[arg(long, global = true)]
    pub budget_net_dim_cap: Option<usize>,
    #[arg(long, global = true)]
    pub budget_net_density: Option<usize>,
    #[arg(long, global = true)]
    pub budget_witness_unitaries: Option<usize>,
    /// Report path; stdout when absent. Wall time goes to `<out>.timing.json`.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

impl RunArgs {
    pub fn config(&self) -> Result<RunConfig> {
        let mut b = if self.quick { Budget::quick() } else { Budget::default() };
        let set = |slot: &mut usize, v: Option<usize>| {
            if let Some(v) = v {
                *slot = v;
            }
        };
        set(&mut b.level_cap, self.level_cap);
        set(&mut b.sweep_starts, self.budget_sweep_starts);
        set(&mut b.sweep_iters, self.budget_sweep_iters);
        set(&mut b.seesaw_iters, self.budget_seesaw_iters);
        set(&mut b.witness_samples, self.budget_witness_samples);
        set(&mut b.net_dim_cap, self.budget_net_dim_cap);
        set(&mut b.net_density, self.budget_net_density);
        set(&mut b.witness_unitaries, self.budget_witness_unitaries);
        if let Some(s) = self.seed {
            b.seed = s;
        }
        if b.level_cap == 0 {
            return Err(Error::InvalidArgument("--level-cap must be >= 1".into()));
        }
        let mut tol = Tolerances::default();
        if let Some(t) = self.tol {
            if !(t > 0.0 && t.is_finite()) {
                return Err(Error::InvalidArgument(format!("--tol must be positive, got {t}")));
            }
            tol.verdict_margin = t;
        }
        Ok(RunConfig { budget: b, tol })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ConstantQuery {
    Alpha,
    Beta,
    Gamma,
    Profile,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Is the point tuple in the set?
    Membership {
        #[arg(long)]
        set: String,
        #[arg(long)]
        point: PathBuf,
    },
    /// Is LEFT contained in RIGHT at every level?
    Contains {
        #[arg(long)]
        left: String,
        #[arg(long)]
        right: String,
    },
    /// Bounds on the least r >= 0 with LEFT ⊆ r RIGHT.
    Scale {
        #[arg(long)]
        left: String,
        #[arg(long)]
        right: String,
    },
    /// Bounds on the Hausdorff distance in the summed operator-norm metric.
    Hausdorff {
        #[arg(long)]
        left: String,
        #[arg(long)]
        right: String,
    },
    /// Scaling constants of a set.
    Constants {
        which: ConstantQuery,
        #[arg(long)]
        set: String,
        #[arg(long, default_value_t = 1)]
        k: usize,
        /// Largest k for `profile`.
        #[arg(long, default_value_t = 3)]
        k_max: usize,
        /// Also write the profile as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Polar dual as a set expression.
    Polar {
        #[arg(long)]
        set: String,
    },
    /// Generating tuple of W(T) ⊞ W(R).
    Boxsum {
        #[arg(long)]
        left: PathBuf,
        #[arg(long)]
        right: PathBuf,
    },
    /// Outer polygon of a level-one projection, optionally as SVG.
    PlotRange {
        #[arg(long)]
        set: String,
        #[arg(long, default_value_t = 360)]
        resolution: usize,
        /// Real coordinates to project on, e.g. `0,1`.
        #[arg(long, default_value = "0,1")]
        coords: String,
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// List the example catalog, or print one entry as a set expression.
    Catalog {
        name: Option<String>,
        #[arg(long)]
        n: Option<usize>,
    },
    /// Run a named acceptance suite, or `all`.
    Suite { name: String },
    /// Re-verify the certificates in a stored report.
    Verify { report: PathBuf },
}

/// A set argument: a set-expression file, or `catalog:NAME[:N]`.
pub fn resolve_set(arg: &str) -> Result<FreeConvexSet> {
    if let Some(rest) = arg.strip_prefix("catalog:") {
        let mut parts = rest.splitn(2, ':');
        let name = parts.next().unwrap_or_default();
        let n = parts
            .next()
            .map(|s| s.parse::<usize>().map_err(|_| Error::InvalidArgument(format!("bad catalog parameter in `{arg}`"))))
            .transpose()?;
        return Ok(catalog(name, n)?.set);
    }
    load_set(Path::new(arg)).map_err(|e| with_path(arg, e))
}

fn with_path(path: impl std::fmt::Display, e: Error) -> Error {
    match e {
        Error::Io(io) => Error::InvalidArgument(format!("{path}: {io}")),
        Error::Json(j) => Error::Parse(format!("{path}: {j}")),
        other => other,
    }
}

fn tuple_arg(p: &Path) -> Result<crate::linalg::MatrixTuple> {
    load_tuple(p).map_err(|e| with_path(p.display(), e))
}

fn verdict_code(v: Verdict) -> i32 {
    if v == Verdict::Undecided {
        2
    } else {
        0
    }
}

fn parse_coords(s: &str) -> Result<(usize, usize)> {
    let bad = || Error::InvalidArgument(format!("--coords expects `a,b`, got `{s}`"));
    let (a, b) = s.split_once(',').ok_or_else(bad)?;
    Ok((a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?))
}

/// A finished command: the report, an exit code and a one-line summary.
pub struct Outcome {
    pub report: Report,
    pub code: i32,
    pub summary: String,
}

pub fn execute(cmd: &Command, cfg: &RunConfig) -> Result<Outcome> {
    let b = &cfg.budget;
    let done = |query: &str, inputs: Value, result: Value, code: i32, summary: String| Outcome {
        report: Report::new(query, inputs, result, cfg),
        code,
        summary,
    };
    Ok(match cmd {
        Command::Membership { set, point } => {
            let s = resolve_set(set)?;
            let x = tuple_arg(point)?;
            let v = membership_tol(&s, &x, b, &cfg.tol)?;
            let summary = format!("{:?} (margin {:.3e})", v.verdict, v.margin);
            done("membership", json!({"set": set_to_json(&s), "point": tuple_to_json(&x)}), v.to_json(), verdict_code(v.verdict), summary)
        }
        Command::Contains { left, right } => {
            let (l, r) = (resolve_set(left)?, resolve_set(right)?);
            let v = contains(&l, &r, b)?;
            let summary = format!("{:?}", v.verdict);
            done("contains", json!({"left": set_to_json(&l), "right": set_to_json(&r)}), v.to_json(), verdict_code(v.verdict), summary)
        }
        Command::Scale { left, right } => {
            let (l, r) = (resolve_set(left)?, resolve_set(right)?);
            let s = inclusion_scale(&l, &r, b)?;
            let summary = format!("scale in [{:.6}, {:.6}]", s.lower, s.upper);
            done("scale", json!({"left": set_to_json(&l), "right": set_to_json(&r)}), s.to_json(), 0, summary)
        }
        Command::Hausdorff { left, right } => {
            let (l, r) = (resolve_set(left)?, resolve_set(right)?);
            let h = hausdorff(&l, &r, b)?;
            let summary = format!("distance in [{:.6}, {:.6}]", h.lower, h.upper);
            done("hausdorff", json!({"left": set_to_json(&l), "right": set_to_json(&r)}), h.to_json(), 0, summary)
        }
        Command::Constants { which, set, k, k_max, csv } => {
            let s = resolve_set(set)?;
            if *which == ConstantQuery::Profile {
                let ps = profiles(&s, *k_max, b)?;
                if let Some(path) = csv {
                    let mut text = String::from("constant,k,lower,upper,raw_lower,raw_upper\n");
                    for p in &ps {
                        for line in p.to_csv().lines().skip(1) {
                            text.push_str(&format!("{},{line}\n", p.name.as_str()));
                        }
                    }
                    std::fs::write(path, text)?;
                }
                let summary = ps
                    .iter()
                    .map(|p| {
                        let (l, u) = p.limit_estimate();
                        format!("{} at k = {k_max}: [{l:.6}, {u:.6}]", p.name.as_str())
                    })
                    .collect::<Vec<_>>()
                    .join("; ");
                let result = json!({"k_max": k_max, "profiles": ps.iter().map(|p| p.to_json()).collect::<Vec<_>>()});
                done("profile", json!({"set": set_to_json(&s), "k_max": k_max}), result, 0, summary)
            } else {
                let all = constants(&s, *k, b)?;
                let (name, bounds) = match which {
                    ConstantQuery::Alpha => (ConstantName::Alpha, &all.alpha),
                    ConstantQuery::Beta => (ConstantName::Beta, &all.beta),
                    _ => (ConstantName::Gamma, &all.gamma.merged),
                };
                let summary = format!("{}_{k} in [{:.6}, {:.6}]", name.as_str(), bounds.lower, bounds.upper);
                let result = json!({"name": name.as_str(), "k": k, "bounds": bounds.to_json(), "constants": all.to_json()});
                done("constants", json!({"set": set_to_json(&s), "k": k}), result, 0, summary)
            }
        }
        Command::Polar { set } => {
            let s = resolve_set(set)?;
            let p = s.polar()?;
            done("polar", json!({"set": set_to_json(&s)}), set_to_json(&p), 0, p.describe())
        }
        Command::Boxsum { left, right } => {
            let (t, r) = (tuple_arg(left)?, tuple_arg(right)?);
            let bs = box_sum(&t, &r)?;
            let summary = format!("d = {}, n = {}", bs.d(), bs.n());
            done("boxsum", json!({"left": tuple_to_json(&t), "right": tuple_to_json(&r)}), tuple_to_json(&bs), 0, summary)
        }
        Command::PlotRange { set, resolution, coords, svg } => {
            let s = resolve_set(set)?;
            let c = parse_coords(coords)?;
            let poly = plot_level1(&s, c, *resolution)?;
            if let Some(path) = svg {
                std::fs::write(path, svg_polygon(&poly, 400.0))?;
            }
            let summary = format!("{} vertices", poly.len());
            let inputs = json!({"set": set_to_json(&s), "coords": [c.0, c.1], "resolution": resolution});
            done("plot-range", inputs, json!({"polygon": poly}), 0, summary)
        }
        Command::Catalog { name, n } => match name {
            None => {
                let entries = NAMES
                    .iter()
                    .map(|nm| catalog(nm, *n).map(|e| json!({"name": e.name, "description": e.description})))
                    .collect::<Result<Vec<_>>>()?;
                let summary = NAMES.join(", ");
                done("catalog", json!({"n": n}), json!({"entries": entries}), 0, summary)
            }
            Some(nm) => {
                let e = catalog(nm, *n)?;
                let result = json!({"name": e.name, "description": e.description, "set": set_to_json(&e.set)});
                done("catalog", json!({"name": nm, "n": n}), result, 0, e.description.clone())
            }
        },
        Command::Suite { name } => {
            let outs = run_suite(name, b)?;
            let pass = outs.iter().all(|o| o.pass);
            let summary = outs.iter().map(|o| o.line()).collect::<Vec<_>>().join("\n");
            let result = json!({"pass": pass, "suites": outs.iter().map(|o| o.to_json()).collect::<Vec<_>>()});
            done("suite", json!({"name": name}), result, if pass { 0 } else { 1 }, summary)
        }
        Command::Verify { report } => {
            let r = Report::from_json(&read_json(report).map_err(|e| with_path(report.display(), e))?)?;
            let check = verify_report(&r)?;
            let summary = format!("{}: {}", if check.ok { "VERIFIED" } else { "REJECTED" }, check.detail);
            let result = json!({"ok": check.ok, "detail": check.detail, "query": r.query});
            done("verify", json!({"report": r.to_json()}), result, if check.ok { 0 } else { 1 }, summary)
        }
    })
}

/// Parses arguments, runs the command and writes the report.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let start = Instant::now();
    let result = cli.run.config().and_then(|cfg| execute(&cli.command, &cfg));
    match result {
        Ok(o) => {
            eprintln!("{}", o.summary);
            let written = match &cli.run.out {
                Some(p) => o.report.write(p, start.elapsed()),
                None => std::io::stdout().write_all(o.report.to_string_pretty().as_bytes()).map_err(Error::from),
            };
            match written {
                Ok(()) => o.code,
                Err(e) => {
                    eprintln!("error: {e}");
                    1
                }
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Budget(_) => 2,
                _ => 1,
            }
        }
    }
}
