//! `cspsketch`: file-based front end for the csp-sketch library.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{anyhow, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use csp_sketch::dist::{self, ConstraintDist};
use csp_sketch::feasibility::{
    alpha, decide_intersection, hardness_curve, is_approx_resistant, rho, FeasibilityConfig, Resistance,
};
use csp_sketch::games::{gen_pssd, gen_sd, psi_of_stream, psi_stream, GameCase, PaddedParams, SdParams};
use csp_sketch::polarize::GradedFunction;
use csp_sketch::separator::{separating_hyperplane, verify_hyperplane, SeparatorCertificate, SeparatorConfig};
use csp_sketch::sketch::{decide_stream, SketchMode, Stream, StreamDecision};
use csp_sketch::{constant_satisfiable, exact_count_solver, opt_value, ConstraintFamily, Instance, OptMode};

const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Parser, Serialize)]
#[command(name = "cspsketch", version, about = "Sketching approximability of Max-CSP(F)")]
struct Cli {
    /// Family file, or builtin:dicut | builtin:maxcut | builtin:qcol:Q | builtin:qug:Q
    #[arg(long, global = true)]
    family: Option<String>,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Decision tolerance delta.
    #[arg(long, global = true, env = "CSPSKETCH_TOL")]
    tol: Option<f64>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Human)]
    format: Format,
    /// Write the main output here instead of stdout.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
    /// Dump the resolved configuration as JSON.
    #[arg(long, global = true)]
    json_meta: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum, Serialize, PartialEq, Eq)]
enum Format {
    Human,
    Tsv,
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
enum Mode {
    Exact,
    Sampled,
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
enum Game {
    Sd,
    Pssd,
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
enum Case {
    Yes,
    No,
}

#[derive(Subcommand, Serialize)]
enum Command {
    /// Decide whether K^Y_gamma and K^N_beta intersect.
    Classify {
        #[arg(long)]
        gamma: f64,
        #[arg(long)]
        beta: f64,
        /// Write the witness pair to PREFIX.dy and PREFIX.dn.
        #[arg(long)]
        witness: Option<PathBuf>,
    },
    /// Hardness curve over a gamma grid (`a:step:b` ranges and numbers, comma separated).
    Curve {
        #[arg(long, default_value = "0.5:0.025:1")]
        grid: String,
    },
    /// Trivial approximation ratio rho
    Rho,
    /// Approximation resistance.
    Resist {
        #[arg(long)]
        witness: Option<PathBuf>,
    },
    /// Approximability threshold.
    Alpha {
        #[arg(long, default_value_t = 0.05)]
        step: f64,
    },
    /// Separating hyperplane certificate.
    Separate {
        #[arg(long)]
        gamma: f64,
        #[arg(long)]
        beta: f64,
    },
    /// Check a certificate against the two polytopes
    VerifyCert {
        #[arg(long)]
        cert: PathBuf,
        #[arg(long, default_value_t = 100)]
        trials: usize,
    },
    /// Decide a stream with a certificate (exit 0 = YES, 1 = NO).
    RunStream {
        #[arg(long)]
        cert: PathBuf,
        #[arg(long)]
        stream: PathBuf,
        #[arg(long, value_enum, default_value_t = Mode::Exact)]
        mode: Mode,
        #[arg(long, default_value_t = 0.25)]
        rate: f64,
    },
    /// Generate a hard-instance stream.
    Gen {
        #[arg(long, value_enum, default_value_t = Game::Pssd)]
        game: Game,
        #[arg(long, value_enum)]
        case: Case,
        #[arg(long, default_value_t = 16)]
        n: usize,
        /// Block density, a decimal or a fraction such as 1/16.
        #[arg(long, default_value = "1/16", value_parser = parse_fraction)]
        alpha: f64,
        #[arg(long, default_value_t = 12)]
        blocks: usize,
        #[arg(long, default_value = "0", value_parser = parse_fraction)]
        tau: f64,
        /// Distribution file, or uniform | sat | onewise:NAME | point:NAME:a1,a2,...
        #[arg(long, default_value = "sat")]
        dist_y: String,
        #[arg(long, default_value = "uniform")]
        dist_n: String,
        #[arg(long, default_value = "uniform")]
        dist_0: String,
        /// Sidecar metadata path (default: OUTPUT.meta.json when --output is set).
        #[arg(long)]
        meta: Option<PathBuf>,
        /// Record the planted assignment in the metadata.
        #[arg(long)]
        debug: bool,
    },
    /// Optimum of an instance or stream file.
    Eval {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        heuristic: bool,
    },
    /// Polarization trace and canonical distribution.
    Polarize {
        #[arg(long)]
        dist: String,
    },
    /// Padded one-wise decomposition of a matched pair (q = k = 2).
    DecomposePadded {
        #[arg(long)]
        dist_y: String,
        #[arg(long)]
        dist_n: String,
    },
    /// Constant satisfiability and the counting solver.
    Exactcheck {
        #[arg(long)]
        instance: Option<PathBuf>,
    },
}

#[derive(Debug)]
struct Usage(String);

impl std::fmt::Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    anyhow::Error::new(Usage(msg.into()))
}

fn builtin(spec: &str) -> Result<ConstraintFamily> {
    let parts: Vec<&str> = spec.split(':').collect();
    let num = |i: usize| -> Result<usize> {
        parts.get(i).ok_or_else(|| usage(format!("builtin:{spec} needs a parameter")))?.parse().map_err(|_| usage(format!("bad parameter in builtin:{spec}")))
    };
    Ok(match parts[0] {
        "dicut" => ConstraintFamily::dicut(),
        "maxcut" => ConstraintFamily::max_cut(),
        "qcol" => ConstraintFamily::qcol(num(1)?),
        "qug" => ConstraintFamily::qug(num(1)?),
        other => return Err(usage(format!("unknown builtin family {other}"))),
    })
}

struct Ctx {
    cli_family: Option<String>,
    format: Format,
    seed: u64,
    tol: Option<f64>,
}

impl Ctx {
    fn family_spec(&self) -> Result<&str> {
        self.cli_family.as_deref().ok_or_else(|| usage("--family is required"))
    }

    fn family(&self) -> Result<Arc<ConstraintFamily>> {
        let spec = self.family_spec()?;
        let fam = match spec.strip_prefix("builtin:") {
            Some(b) => builtin(b)?,
            None => ConstraintFamily::parse(&read(Path::new(spec))?).with_context(|| format!("family file {spec}"))?,
        };
        Ok(Arc::new(fam))
    }

    fn feasibility(&self) -> Result<FeasibilityConfig> {
        let mut cfg = FeasibilityConfig::default();
        if let Some(t) = self.tol {
            if !(t > 0.0) {
                return Err(usage(format!("tolerance must be positive, got {t}")));
            }
            cfg.delta = t;
        }
        cfg.inner.seed = self.seed;
        Ok(cfg)
    }

    fn separator(&self) -> Result<SeparatorConfig> {
        Ok(SeparatorConfig { feasibility: self.feasibility()?, seed: self.seed, ..SeparatorConfig::default() })
    }

    fn announce_seed(&self) {
        eprintln!("seed={}", self.seed);
    }

    fn tsv(&self, cols: &[&str], rows: &[Vec<String>]) -> String {
        let mut out = format!("# cspsketch {VERSION}\n{}\n", cols.join("\t"));
        for r in rows {
            out.push_str(&r.join("\t"));
            out.push('\n');
        }
        out
    }

    /// `key=value` lines, or a one-row table in tsv mode.
    fn record(&self, pairs: &[(&str, String)]) -> String {
        match self.format {
            Format::Human => pairs.iter().map(|(k, v)| format!("{k}={v}\n")).collect(),
            Format::Tsv => {
                let cols: Vec<&str> = pairs.iter().map(|p| p.0).collect();
                self.tsv(&cols, &[pairs.iter().map(|p| p.1.clone()).collect()])
            }
        }
    }
}

fn suffixed(prefix: &Path, ext: &str) -> PathBuf {
    PathBuf::from(format!("{}.{ext}", prefix.display()))
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn load_dist(fam: &Arc<ConstraintFamily>, spec: &str) -> Result<ConstraintDist> {
    let w = fam.num_patterns();
    if spec == "uniform" {
        return Ok(ConstraintDist::uniform(fam.clone()));
    }
    if spec == "sat" {
        let weights: Vec<f64> = (0..fam.len() * w).map(|j| if fam.table(j / w)[j % w] { 1.0 } else { 0.0 }).collect();
        return Ok(ConstraintDist::from_weights(fam.clone(), &weights)?);
    }
    if let Some(name) = spec.strip_prefix("onewise:") {
        let f = fam.index_of(name).ok_or_else(|| usage(format!("unknown function {name}")))?;
        return dist::supports_one_wise(fam, f)?.ok_or_else(|| anyhow!("{name} supports no one-wise distribution"));
    }
    if let Some(rest) = spec.strip_prefix("point:") {
        let (name, pat) = rest.split_once(':').ok_or_else(|| usage("point:NAME:a1,a2,..."))?;
        let f = fam.index_of(name).ok_or_else(|| usage(format!("unknown function {name}")))?;
        let pattern = pat
            .split(',')
            .map(|s| s.trim().parse::<usize>().ok().filter(|v| *v >= 1 && *v <= fam.q()).map(|v| v - 1))
            .collect::<Option<Vec<_>>>()
            .filter(|p| p.len() == fam.k())
            .ok_or_else(|| usage(format!("bad pattern {pat}")))?;
        return Ok(ConstraintDist::point_mass(fam.clone(), f, &pattern));
    }
    ConstraintDist::parse(fam.clone(), &read(Path::new(spec))?).with_context(|| format!("distribution file {spec}"))
}

fn load_instance(fam: &ConstraintFamily, path: &Path) -> Result<Instance> {
    let text = read(path)?;
    let is_stream = text
        .lines()
        .map(str::trim)
        .find(|l| !l.is_empty() && !l.starts_with('#'))
        .is_some_and(|l| l.contains("family="));
    let inst = if is_stream { Stream::parse(fam, &text)?.to_instance(fam)? } else { Instance::parse(fam, &text)? };
    Ok(inst)
}

fn parse_number(s: &str) -> Result<f64> {
    let s = s.trim();
    let v = match s.split_once('/') {
        Some((a, b)) => a.trim().parse::<f64>().ok().zip(b.trim().parse::<f64>().ok()).map(|(a, b)| a / b),
        None => s.parse::<f64>().ok(),
    };
    v.filter(|v| v.is_finite()).ok_or_else(|| usage(format!("bad number {s}")))
}

fn parse_fraction(s: &str) -> std::result::Result<f64, String> {
    parse_number(s).map_err(|e| e.to_string())
}

fn parse_grid(spec: &str) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for item in spec.split(',').filter(|s| !s.trim().is_empty()) {
        let parts: Vec<&str> = item.split(':').collect();
        match parts.as_slice() {
            [v] => out.push(parse_number(v)?),
            [a, s, b] => {
                let (a, s, b) = (parse_number(a)?, parse_number(s)?, parse_number(b)?);
                if !(s > 0.0) || b < a {
                    return Err(usage(format!("bad grid range {item}")));
                }
                let steps = ((b - a) / s + 1e-9).floor() as usize;
                out.extend((0..=steps).map(|i| a + i as f64 * s));
            }
            _ => return Err(usage(format!("bad grid item {item}"))),
        }
    }
    out.sort_by(f64::total_cmp);
    out.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    if out.is_empty() {
        return Err(usage("empty grid"));
    }
    Ok(out)
}

fn point_str(p: &[usize]) -> String {
    let inner: Vec<String> = p.iter().map(|v| (v + 1).to_string()).collect();
    format!("({})", inner.join(","))
}

struct Outcome {
    text: String,
    code: u8,
}

impl Outcome {
    fn ok(text: String) -> Self {
        Self { text, code: 0 }
    }
}

fn run(cli: &Cli) -> Result<Outcome> {
    let ctx = Ctx { cli_family: cli.family.clone(), format: cli.format, seed: cli.seed, tol: cli.tol };
    let fam_spec = || ctx.family_spec().map(str::to_string);
    match &cli.command {
        Command::Classify { gamma, beta, witness } => {
            let fam = ctx.family()?;
            ctx.announce_seed();
            let out = decide_intersection(&fam, *gamma, *beta, &ctx.feasibility()?)?;
            if let (Some(prefix), Some((dy, dn))) = (witness, &out.witness) {
                let spec = fam_spec()?;
                write(&suffixed(prefix, "dy"), &dy.to_text(&spec))?;
                write(&suffixed(prefix, "dn"), &dn.to_text(&spec))?;
            }
            let mut pairs = vec![
                ("verdict", out.verdict.to_string()),
                ("gamma", gamma.to_string()),
                ("beta", beta.to_string()),
                ("bound", out.bound.to_string()),
                ("lower", out.lower.to_string()),
                ("delta", out.delta.to_string()),
                ("iterations", out.iterations.to_string()),
            ];
            if let Some(n) = &out.note {
                pairs.push(("note", n.clone()));
            }
            Ok(Outcome::ok(ctx.record(&pairs)))
        }
        Command::Curve { grid } => {
            let fam = ctx.family()?;
            ctx.announce_seed();
            let pts = hardness_curve(&fam, &parse_grid(grid)?, &ctx.feasibility()?)?;
            let rows: Vec<Vec<String>> =
                pts.iter().map(|p| vec![p.gamma.to_string(), p.beta.to_string(), p.lower.to_string()]).collect();
            Ok(Outcome::ok(match ctx.format {
                Format::Tsv => ctx.tsv(&["gamma", "beta", "lower"], &rows),
                Format::Human => rows.iter().map(|r| format!("gamma={} beta={} lower={}\n", r[0], r[1], r[2])).collect(),
            }))
        }
        Command::Rho => {
            let fam = ctx.family()?;
            ctx.announce_seed();
            let r = rho(&fam, &ctx.feasibility()?)?;
            let mix: Vec<String> = r.mixture.iter().enumerate().map(|(f, v)| format!("{}:{v}", fam.name(f))).collect();
            let point: Vec<String> = r.point.iter().map(|v| v.to_string()).collect();
            Ok(Outcome::ok(ctx.record(&[
                ("rho", r.value.to_string()),
                ("lower", r.lower.to_string()),
                ("mixture", mix.join(",")),
                ("point", point.join(",")),
            ])))
        }
        Command::Resist { witness } => {
            let fam = ctx.family()?;
            ctx.announce_seed();
            let rep = is_approx_resistant(&fam, &ctx.feasibility()?)?;
            let mut pairs = vec![("rho", rep.rho.value.to_string())];
            match &rep.outcome {
                Resistance::Resistant { dy, dn, sy, sn } => {
                    pairs.push(("resistant", "yes".into()));
                    pairs.push(("sy", sy.to_string()));
                    pairs.push(("sn", sn.to_string()));
                    if let Some(prefix) = witness {
                        let spec = fam_spec()?;
                        write(&suffixed(prefix, "dy"), &dy.to_text(&spec))?;
                        write(&suffixed(prefix, "dn"), &dn.to_text(&spec))?;
                    }
                }
                Resistance::NotResistant { curve_lower } => {
                    pairs.push(("resistant", "no".into()));
                    pairs.push(("curve_lower", curve_lower.to_string()));
                }
                Resistance::Undecided { curve_lower, curve_upper } => {
                    pairs.push(("resistant", "undecided".into()));
                    pairs.push(("curve_lower", curve_lower.to_string()));
                    pairs.push(("curve_upper", curve_upper.to_string()));
                }
            }
            pairs.push(("below", rep.below.to_string()));
            Ok(Outcome::ok(ctx.record(&pairs)))
        }
        Command::Alpha { step } => {
            let fam = ctx.family()?;
            ctx.announce_seed();
            let a = alpha(&fam, *step, &ctx.feasibility()?)?;
            Ok(Outcome::ok(ctx.record(&[
                ("alpha", a.value.to_string()),
                ("gamma", a.gamma.to_string()),
                ("resolution", a.resolution.to_string()),
            ])))
        }
        Command::Separate { gamma, beta } => {
            let fam = ctx.family()?;
            ctx.announce_seed();
            let cert = separating_hyperplane(&fam, *gamma, *beta, &ctx.separator()?)?;
            eprintln!("tauY={} tauN={} margin={}", cert.tau_y, cert.tau_n, cert.verified_margin);
            Ok(Outcome::ok(cert.to_text(&fam)))
        }
        Command::VerifyCert { cert, trials } => {
            let fam = ctx.family()?;
            ctx.announce_seed();
            let c = SeparatorCertificate::parse(&fam, &read(cert)?)?;
            let rep = verify_hyperplane(&c, &fam, *trials, ctx.seed, &ctx.separator()?)?;
            let mut pairs = vec![
                ("pass", rep.pass.to_string()),
                ("yes_slack", rep.yes_slack.to_string()),
                ("no_slack", rep.no_slack.to_string()),
            ];
            if let Some(s) = &rep.structural {
                pairs.push(("structural", s.clone()));
            }
            Ok(Outcome { text: ctx.record(&pairs), code: if rep.pass { 0 } else { 1 } })
        }
        Command::RunStream { cert, stream, mode, rate } => {
            let fam = ctx.family()?;
            ctx.announce_seed();
            let c = SeparatorCertificate::parse(&fam, &read(cert)?)?;
            let s = Stream::parse(&fam, &read(stream)?)?;
            let mode = match mode {
                Mode::Exact => SketchMode::Exact,
                Mode::Sampled => SketchMode::Sampled { rate: *rate, seed: ctx.seed },
            };
            let (d, b) = decide_stream(&c, &fam, s.n, &s.updates, mode)?;
            eprintln!("b={b}");
            Ok(Outcome { text: format!("{d}\n"), code: if d == StreamDecision::Yes { 0 } else { 1 } })
        }
        Command::Gen { game, case, n, alpha, blocks, tau, dist_y, dist_n, dist_0, meta, debug } => {
            let fam = ctx.family()?;
            ctx.announce_seed();
            let sd = SdParams {
                n: *n,
                alpha: *alpha,
                dist_y: load_dist(&fam, dist_y)?,
                dist_n: load_dist(&fam, dist_n)?,
                seed: ctx.seed,
            };
            let (blocks, tau) = match game {
                Game::Sd => (1, 0.0),
                Game::Pssd => (*blocks, *tau),
            };
            let params = PaddedParams { sd, blocks, tau, dist_0: load_dist(&fam, dist_0)? };
            let gcase = match case {
                Case::Yes => GameCase::Yes,
                Case::No => GameCase::No,
            };
            let g = match game {
                Game::Sd => gen_sd(&params.sd, gcase, false)?,
                Game::Pssd => gen_pssd(&params, gcase, false)?,
            };
            let spec = fam_spec()?;
            let stream = psi_stream(&spec, *n, &g);
            let kept = psi_of_stream(&fam, *n, g.records())?.len();
            let meta_path = meta.clone().or_else(|| cli.output.as_ref().map(|o| PathBuf::from(format!("{}.meta.json", o.display()))));
            if let Some(p) = meta_path {
                #[derive(Serialize)]
                struct Meta<'a> {
                    version: &'a str,
                    family: &'a str,
                    game: Game,
                    case: Case,
                    seed: u64,
                    n: usize,
                    alpha: f64,
                    blocks: usize,
                    tau: f64,
                    padding: usize,
                    records: usize,
                    kept: usize,
                    dist_y: &'a str,
                    dist_n: &'a str,
                    dist_0: &'a str,
                    x_star: Option<Vec<usize>>,
                }
                let m = Meta {
                    version: VERSION,
                    family: &spec,
                    game: *game,
                    case: *case,
                    seed: ctx.seed,
                    n: *n,
                    alpha: *alpha,
                    blocks,
                    tau,
                    padding: g.padding.len(),
                    records: g.records().count(),
                    kept,
                    dist_y,
                    dist_n,
                    dist_0,
                    x_star: debug.then(|| g.x_star.0.iter().map(|v| v + 1).collect()),
                };
                write(&p, &(serde_json::to_string_pretty(&m)? + "\n"))?;
            }
            Ok(Outcome::ok(stream.to_text(&fam)))
        }
        Command::Eval { instance, heuristic } => {
            let fam = ctx.family()?;
            let inst = load_instance(&fam, instance)?;
            let mode = if *heuristic {
                ctx.announce_seed();
                OptMode::heuristic(ctx.seed)
            } else {
                OptMode::exact()
            };
            let r = opt_value(&fam, &inst, mode)?;
            let wit: Vec<String> = r.witness.0.iter().map(|v| (v + 1).to_string()).collect();
            Ok(Outcome::ok(ctx.record(&[
                ("optimum", r.value.to_string()),
                ("exact", (!heuristic).to_string()),
                ("constraints", inst.len().to_string()),
                ("witness", wit.join(",")),
            ])))
        }
        Command::Polarize { dist } => {
            let fam = ctx.family()?;
            let d = load_dist(&fam, dist)?;
            let mut out = String::new();
            let mut probs = Vec::with_capacity(d.probs().len());
            for f in 0..fam.len() {
                let comp = d.component(f);
                let (pol, steps) = comp.polarize()?;
                let canon = GradedFunction::canonical(&comp.marginals())?;
                let dev = pol.values().iter().zip(canon.values()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
                let _ = writeln!(out, "# function {} steps={} canonical_deviation={dev:e}", fam.name(f), steps.len());
                for s in &steps {
                    let _ = writeln!(
                        out,
                        "# step loop={} depth={} i={} j={} u={} v={} eps={}",
                        s.loop_id,
                        s.depth,
                        s.i + 1,
                        s.j + 1,
                        point_str(&s.u),
                        point_str(&s.v),
                        s.eps
                    );
                }
                probs.extend_from_slice(pol.values());
            }
            let polarized = ConstraintDist::from_weights(fam.clone(), &probs)?;
            out.push_str(&polarized.to_text(&fam_spec()?));
            Ok(Outcome::ok(out))
        }
        Command::DecomposePadded { dist_y, dist_n } => {
            let fam = ctx.family()?;
            let dy = load_dist(&fam, dist_y)?;
            let dn = load_dist(&fam, dist_n)?;
            let p = dist::padded_one_wise_decomposition(&dy, &dn)?;
            let spec = fam_spec()?;
            Ok(Outcome::ok(format!(
                "# tau={}\n# d0\n{}# dy_prime\n{}# dn_prime\n{}",
                p.tau,
                p.d0.to_text(&spec),
                p.dy_prime.to_text(&spec),
                p.dn_prime.to_text(&spec)
            )))
        }
        Command::Exactcheck { instance } => {
            let fam = ctx.family()?;
            let sigma = constant_satisfiable(&fam);
            let mut pairs = vec![("constant_satisfiable", sigma.map_or("none".to_string(), |s| (s + 1).to_string()))];
            if let (Some(path), Some(_)) = (instance, sigma) {
                let inst = load_instance(&fam, path)?;
                pairs.push(("count_value", exact_count_solver(&fam, &inst)?.to_string()));
            }
            Ok(Outcome::ok(ctx.record(&pairs)))
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    if let Some(p) = &cli.json_meta {
        #[derive(Serialize)]
        struct Resolved<'a> {
            version: &'a str,
            effective_tol: f64,
            config: &'a Cli,
        }
        let effective_tol = cli.tol.unwrap_or(FeasibilityConfig::default().delta);
        let json = serde_json::to_string_pretty(&Resolved { version: VERSION, effective_tol, config: &cli })
            .expect("config serializes");
        if let Err(e) = fs::write(p, json + "\n") {
            eprintln!("error: writing {}: {e}", p.display());
            return ExitCode::from(3);
        }
    }
    match run(&cli) {
        Ok(out) => {
            let res = match &cli.output {
                Some(p) => write(p, &out.text),
                None => {
                    print!("{}", out.text);
                    Ok(())
                }
            };
            match res {
                Ok(()) => ExitCode::from(out.code),
                Err(e) => {
                    eprintln!("error: {e:#}");
                    ExitCode::from(3)
                }
            }
        }
        Err(e) if e.downcast_ref::<Usage>().is_some() => {
            eprintln!("usage error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(3)
        }
    }
}
