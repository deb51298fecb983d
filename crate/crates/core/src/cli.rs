//! Command-line front end. `run` parses arguments, resolves configuration
//! (flags over file over defaults) and writes CSV preceded by a `#` header
//! that records the tool version and the resolved settings.
//!
//! Exit codes: 0 on success, 1 when a requested check fails, 2 on usage,
//! configuration or runtime errors.

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::audit::{
    audit_binary_with, check_dual_certificate, curve_csv, log_ratio_curve, mgf_ratio_check, pmk_table,
    AuditOptions,
};
use crate::binary::{closed_form_params, randomizer_dist, BinaryParams, BinaryProtocol, ParamMode};
use crate::config::{pick, BinarySection, ConfigFile, ExperimentSection, HistogramSection, PrecisionSection, RealSection, SearchSection};
use crate::error::{Error, Result};
use crate::harness::{run_experiment, DatasetSpec, ExperimentConfig};
use crate::histogram::{HistogramParams, HistogramProtocol};
use crate::lattice::{build_figure3_pair, figure3_params, gaussian_pair_params, pair_csv};
use crate::pmf::format_sci;
use crate::precision::{DEFAULT_GRID_POINTS, DEFAULT_PRECISION_BITS};
use crate::real::RealProtocol;
use crate::search::{engineering_search, SearchOptions, DEFAULT_D_CANDIDATES};

const DEFAULT_EPSILON: f64 = 1.0;
const DEFAULT_N: u64 = 100;
const DEFAULT_TRIALS: u64 = 1000;
const DEFAULT_BUCKETS: u32 = 8;

#[derive(Parser, Debug)]
#[command(name = "pure-shuffle", version, about = "Pure differential privacy in the shuffled model: simulation, exact audits and constructions")]
struct Cli {
    /// TOML file with [binary], [real], [histogram], [experiment], [precision] and [search] sections.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// MPFR working precision in bits.
    #[arg(long, global = true)]
    precision_bits: Option<u32>,
    /// Write output here instead of stdout.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Default, Clone)]
struct BinaryArgs {
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    n: Option<u64>,
    /// Messages per user (odd). Overrides the searched value.
    #[arg(long)]
    d: Option<u64>,
    /// Noise scale. Overrides the searched value.
    #[arg(long)]
    s: Option<f64>,
    /// Noise probability. Overrides the searched value.
    #[arg(long)]
    p: Option<f64>,
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    /// Comma-separated odd candidates for the parameter search.
    #[arg(long, value_delimiter = ',')]
    d_candidates: Option<Vec<u64>>,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum ModeArg {
    ClosedForm,
    Engineering,
}

impl From<ModeArg> for ParamMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::ClosedForm => ParamMode::ClosedForm,
            ModeArg::Engineering => ParamMode::Engineering,
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq)]
enum ProtocolArg {
    Binary,
    Real,
    Histogram,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq)]
enum Construction {
    Figure2,
    Figure3,
    GaussianPair,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq)]
enum MgfSource {
    Binary,
    Figure3,
    GaussianPair,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Monte Carlo error of a protocol; one ErrorReport row.
    Simulate {
        #[arg(long, value_enum, default_value = "binary")]
        protocol: ProtocolArg,
        #[command(flatten)]
        binary: BinaryArgs,
        #[arg(long)]
        buckets: Option<u32>,
        #[arg(long)]
        trials: Option<u64>,
        #[arg(long)]
        seed: Option<u64>,
        /// all-zeros, all-ones, uniform-random or a comma-separated list.
        #[arg(long)]
        inputs: Option<String>,
    },
    /// Exact privacy audit of binary-summation parameters.
    Audit {
        #[command(flatten)]
        binary: BinaryArgs,
        /// Exit 1 unless the audited epsilon is at most this value.
        #[arg(long)]
        assert_epsilon: Option<f64>,
        /// Emit the log-ratio curve of the pair (c, c+1) instead of the report.
        #[arg(long)]
        curve: Option<u64>,
    },
    /// Audit-driven search for binary-summation parameters.
    SearchParams {
        #[command(flatten)]
        binary: BinaryArgs,
        #[arg(long)]
        bisection_steps: Option<u32>,
    },
    /// Dump the distributions behind a construction.
    Construct {
        #[arg(value_enum)]
        name: Construction,
        #[arg(long)]
        gamma: Option<f64>,
        #[arg(long)]
        epsilon: Option<f64>,
    },
    /// Sup of |log MGF ratio| over a grid plus the limits at infinity.
    MgfCheck {
        #[arg(long, value_enum, default_value = "binary")]
        source: MgfSource,
        #[command(flatten)]
        binary: BinaryArgs,
        #[arg(long)]
        gamma: Option<f64>,
        #[arg(long)]
        t_range: Option<f64>,
        #[arg(long)]
        grid_points: Option<usize>,
    },
    /// Pointwise check of the quadratic dual certificate.
    DualCert {
        #[arg(long)]
        k: u32,
        #[arg(long)]
        m: u32,
        #[arg(long)]
        epsilon: f64,
    },
    /// Table of P[m][k], the law of a sum of m noise draws.
    PmkTable {
        #[arg(long)]
        d: u64,
        #[arg(long)]
        s: f64,
        #[arg(long)]
        m_max: u64,
        #[arg(long)]
        k_min: Option<i64>,
        #[arg(long)]
        k_max: Option<i64>,
    },
}

/// Everything a command needs besides its own flags.
struct Context {
    file: ConfigFile,
    prec: u32,
    search: SearchOptions,
    d_candidates: Vec<u64>,
}

impl Context {
    fn new(cli: &Cli) -> Result<Self> {
        let file = match &cli.config {
            Some(p) => ConfigFile::load(p)?,
            None => ConfigFile::default(),
        };
        let prec = pick(cli.precision_bits, file.precision.precision_bits, DEFAULT_PRECISION_BITS);
        if prec < 64 {
            return Err(Error::Config(format!("precision must be at least 64 bits, got {prec}")));
        }
        let defaults = SearchOptions::default();
        let search = SearchOptions {
            audit: AuditOptions {
                precision_bits: prec,
                support_ceiling: pick(None, file.search.support_ceiling, defaults.audit.support_ceiling),
            },
            bisection_steps: pick(None, file.search.bisection_steps, defaults.bisection_steps),
        };
        let d_candidates = file.search.d_candidates.clone().unwrap_or_else(|| DEFAULT_D_CANDIDATES.to_vec());
        Ok(Context {
            file,
            prec,
            search,
            d_candidates,
        })
    }

    fn candidates(&self, args: &BinaryArgs) -> Vec<u64> {
        args.d_candidates.clone().unwrap_or_else(|| self.d_candidates.clone())
    }

    /// Binary parameters from flags and the `[binary]` section. Values of
    /// `d`, `s` and `p` that are given override those of the base
    /// configuration, which comes from the search or the closed form.
    fn binary(&self, args: &BinaryArgs) -> Result<BinaryParams> {
        let f = &self.file.binary;
        let epsilon = pick(args.epsilon, f.epsilon, DEFAULT_EPSILON);
        let n = pick(args.n, f.n, DEFAULT_N);
        let mode = pick(args.mode.map(ParamMode::from), f.mode, ParamMode::Engineering);
        let d = args.d.or(f.d);
        let s = args.s.or(f.s);
        let p = args.p.or(f.p);
        if let (Some(d), Some(s), Some(p)) = (d, s, p) {
            return BinaryParams::new(epsilon, n, d, s, p, mode);
        }
        let base = match mode {
            ParamMode::ClosedForm => closed_form_params(epsilon, n)?,
            ParamMode::Engineering => {
                let cands = d.map_or_else(|| self.candidates(args), |d| vec![d]);
                engineering_search(epsilon, n, &cands, &self.search)?.params
            }
        };
        BinaryParams::new(epsilon, n, d.unwrap_or(base.d), s.unwrap_or(base.s), p.unwrap_or(base.p), mode)
    }

    fn precision_section(&self, grid_points: Option<usize>) -> PrecisionSection {
        PrecisionSection {
            precision_bits: Some(self.prec),
            grid_points,
        }
    }

    fn search_section(&self, candidates: Vec<u64>) -> SearchSection {
        SearchSection {
            d_candidates: Some(candidates),
            bisection_steps: Some(self.search.bisection_steps),
            support_ceiling: Some(self.search.audit.support_ceiling),
        }
    }
}

fn binary_section(bp: &BinaryParams) -> BinarySection {
    BinarySection {
        epsilon: Some(bp.epsilon),
        n: Some(bp.n),
        d: Some(bp.d),
        s: Some(bp.s),
        p: Some(bp.p),
        mode: Some(bp.mode),
    }
}

/// Accumulates the resolved configuration for the output header.
#[derive(Default)]
struct Header {
    table: toml::Table,
    notes: Vec<String>,
}

impl Header {
    fn section<T: Serialize>(&mut self, name: &str, value: &T) {
        if let Ok(toml::Value::Table(t)) = toml::Value::try_from(value) {
            self.table.insert(name.to_string(), toml::Value::Table(t));
        }
    }

    fn note(&mut self, line: impl Into<String>) {
        self.notes.push(line.into());
    }

    fn render(&self, command: &str) -> String {
        let mut out = format!("# pure-shuffle {}\n# command = \"{command}\"\n", env!("CARGO_PKG_VERSION"));
        let body = toml::to_string(&self.table).unwrap_or_default();
        for line in body.lines().filter(|l| !l.is_empty()) {
            out.push_str("# ");
            out.push_str(line);
            out.push('\n');
        }
        for n in &self.notes {
            out.push_str("# ");
            out.push_str(n);
            out.push('\n');
        }
        out
    }
}

struct Outcome {
    body: String,
    code: i32,
}

/// Entry point shared by the binary and the tests.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = out.write_all(text.as_bytes());
                    0
                }
                _ => {
                    let _ = err.write_all(text.as_bytes());
                    2
                }
            };
        }
    };
    let result = match cli.threads {
        Some(0) => Err(Error::Config("--threads must be at least 1".into())),
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| Error::Config(e.to_string()))
            .and_then(|pool| pool.install(|| execute(&cli))),
        None => execute(&cli),
    };
    match result {
        Ok(outcome) => {
            let written = match &cli.output {
                Some(path) => std::fs::write(path, &outcome.body).map_err(Error::from),
                None => out.write_all(outcome.body.as_bytes()).map_err(Error::from),
            };
            match written {
                Ok(()) => outcome.code,
                Err(e) => {
                    let _ = writeln!(err, "error: {e}");
                    2
                }
            }
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            2
        }
    }
}

fn execute(cli: &Cli) -> Result<Outcome> {
    let ctx = Context::new(cli)?;
    let mut h = Header::default();
    let (name, body, code) = match &cli.command {
        Command::Simulate {
            protocol,
            binary,
            buckets,
            trials,
            seed,
            inputs,
        } => ("simulate", simulate(&ctx, &mut h, *protocol, binary, *buckets, *trials, *seed, inputs)?, 0),
        Command::Audit {
            binary,
            assert_epsilon,
            curve,
        } => {
            let (body, code) = audit(&ctx, &mut h, binary, *assert_epsilon, *curve)?;
            ("audit", body, code)
        }
        Command::SearchParams { binary, bisection_steps } => {
            ("search-params", search_params(&ctx, &mut h, binary, *bisection_steps)?, 0)
        }
        Command::Construct { name, gamma, epsilon } => ("construct", construct(&ctx, &mut h, *name, *gamma, *epsilon)?, 0),
        Command::MgfCheck {
            source,
            binary,
            gamma,
            t_range,
            grid_points,
        } => ("mgf-check", mgf_check(&ctx, &mut h, *source, binary, *gamma, *t_range, *grid_points)?, 0),
        Command::DualCert { k, m, epsilon } => {
            let rep = check_dual_certificate(*k, *m, *epsilon)?;
            h.note(format!("dual_cert = {{ k = {k}, m = {m}, epsilon = {epsilon} }}"));
            ("dual-cert", rep.to_csv(), if rep.holds { 0 } else { 1 })
        }
        Command::PmkTable { d, s, m_max, k_min, k_max } => {
            let table = pmk_table(*d, *s, *m_max, ctx.prec, ctx.search.audit.support_ceiling)?;
            h.section("precision", &ctx.precision_section(None));
            h.note(format!("pmk_table = {{ d = {d}, s = {s}, m_max = {m_max} }}"));
            let range = match (k_min, k_max) {
                (None, None) => None,
                (lo, hi) => Some((lo.unwrap_or(0), hi.unwrap_or((*m_max * *d) as i64))),
            };
            ("pmk-table", table.to_csv(range), 0)
        }
    };
    Ok(Outcome {
        body: format!("{}{body}", h.render(name)),
        code,
    })
}

#[allow(clippy::too_many_arguments)]
fn simulate(
    ctx: &Context,
    h: &mut Header,
    protocol: ProtocolArg,
    args: &BinaryArgs,
    buckets: Option<u32>,
    trials: Option<u64>,
    seed: Option<u64>,
    inputs: &Option<String>,
) -> Result<String> {
    let fe = &ctx.file.experiment;
    let trials = pick(trials, fe.trials, DEFAULT_TRIALS);
    let seed = pick(seed, fe.seed, 0);
    let inputs_text = pick(inputs.clone(), fe.inputs.clone(), "uniform-random".to_string());
    let config = ExperimentConfig::new(trials, seed, DatasetSpec::parse(&inputs_text)?)?;
    h.section(
        "experiment",
        &ExperimentSection {
            trials: Some(trials),
            seed: Some(seed),
            inputs: Some(config.inputs.label()),
        },
    );
    let report = match protocol {
        ProtocolArg::Binary => {
            let bp = ctx.binary(args)?;
            h.section("binary", &binary_section(&bp));
            run_experiment(&config, &BinaryProtocol::new(bp)?)?
        }
        ProtocolArg::Real => {
            let fr = &ctx.file.real;
            let epsilon = pick(args.epsilon, fr.epsilon, DEFAULT_EPSILON);
            let n = pick(args.n, fr.n, DEFAULT_N);
            let mode = pick(args.mode.map(ParamMode::from), ctx.file.binary.mode, ParamMode::Engineering);
            let proto = match mode {
                ParamMode::Engineering => RealProtocol::engineering(epsilon, n, &ctx.candidates(args), &ctx.search)?,
                ParamMode::ClosedForm => RealProtocol::closed_form(epsilon, n)?,
            };
            h.section(
                "real",
                &RealSection {
                    epsilon: Some(epsilon),
                    n: Some(n),
                },
            );
            let digits: Vec<String> = proto
                .digit_params()
                .iter()
                .map(|p| format!("{{ d = {}, s = {}, p = {} }}", p.d, p.s, p.p))
                .collect();
            h.note(format!("eps_j = {:?}", proto.schedule().eps_j));
            h.note(format!("digits = [{}]", digits.join(", ")));
            run_experiment(&config, &proto)?
        }
        ProtocolArg::Histogram => {
            let fh = &ctx.file.histogram;
            let epsilon = pick(args.epsilon, fh.epsilon, DEFAULT_EPSILON);
            let n = pick(args.n, fh.n, DEFAULT_N);
            let buckets = pick(buckets, fh.buckets, DEFAULT_BUCKETS);
            let params = HistogramParams::engineering(epsilon, n, buckets, &ctx.candidates(args), &ctx.search)?;
            h.section(
                "histogram",
                &HistogramSection {
                    epsilon: Some(epsilon),
                    n: Some(n),
                    buckets: Some(buckets),
                },
            );
            h.section("binary", &binary_section(&params.per_coord));
            run_experiment(&config, &HistogramProtocol::new(params)?)?
        }
    };
    Ok(report.to_csv())
}

fn audit(
    ctx: &Context,
    h: &mut Header,
    args: &BinaryArgs,
    assert_epsilon: Option<f64>,
    curve: Option<u64>,
) -> Result<(String, i32)> {
    let bp = ctx.binary(args)?;
    h.section("binary", &binary_section(&bp));
    h.section("precision", &ctx.precision_section(None));
    if let Some(c) = curve {
        return Ok((curve_csv(&log_ratio_curve(&bp, c, &ctx.search.audit)?), 0));
    }
    let rep = audit_binary_with(&bp, &ctx.search.audit)?;
    let code = match assert_epsilon {
        Some(target) => {
            h.note(format!("assert_epsilon = {target}"));
            if rep.feasible && rep.epsilon_hat <= target {
                0
            } else {
                1
            }
        }
        None => 0,
    };
    Ok((rep.to_csv(), code))
}

fn search_params(ctx: &Context, h: &mut Header, args: &BinaryArgs, steps: Option<u32>) -> Result<String> {
    let f = &ctx.file.binary;
    let epsilon = pick(args.epsilon, f.epsilon, DEFAULT_EPSILON);
    let n = pick(args.n, f.n, DEFAULT_N);
    let cands = ctx.candidates(args);
    let mut opts = ctx.search;
    if let Some(s) = steps {
        opts.bisection_steps = s;
    }
    let choice = engineering_search(epsilon, n, &cands, &opts)?;
    let mut search = ctx.search_section(cands);
    search.bisection_steps = Some(opts.bisection_steps);
    h.section("search", &search);
    h.section("binary", &binary_section(&choice.params));
    let bp = &choice.params;
    Ok(format!(
        "epsilon,n,d,s,p,epsilon_bound,proxy,beyond_grid\n{},{},{},{},{},{},{},{}\n",
        bp.epsilon, bp.n, bp.d, bp.s, bp.p, choice.epsilon_bound, choice.proxy, choice.beyond_grid
    ))
}

fn construct(ctx: &Context, h: &mut Header, name: Construction, gamma: Option<f64>, epsilon: Option<f64>) -> Result<String> {
    h.section("precision", &ctx.precision_section(None));
    match name {
        Construction::Figure2 => {
            let bp = figure2_params()?;
            h.section("binary", &binary_section(&bp));
            let dist = randomizer_dist(&bp, ctx.prec)?;
            let mut out = String::from("value,mass_r0,mass_r1,log2_mass_r0,log2_mass_r1\n");
            for v in 0..=bp.d as i64 {
                let (a, b) = (dist.r0.mass(v), dist.r1.mass(v));
                let la = log2_mass(&a);
                let lb = log2_mass(&b);
                out.push_str(&format!("{v},{},{},{la},{lb}\n", format_sci(&a), format_sci(&b)));
            }
            Ok(out)
        }
        Construction::Figure3 => {
            let params = figure3_params();
            let (y0, y1) = build_figure3_pair(ctx.prec);
            h.note(format!(
                "pair = {{ gamma = {}, c = {}, m = {}, w = {}, s = {} }}",
                params.gamma, params.c, params.m, params.w, params.s
            ));
            h.note(format!("tv_distance = {}", y0.tv_distance(&y1).to_f64()));
            Ok(pair_csv(&y0, &y1))
        }
        Construction::GaussianPair => {
            let gamma = gamma.unwrap_or(1e-4);
            let epsilon = epsilon.unwrap_or(0.1);
            let params = gaussian_pair_params(gamma, epsilon)?;
            let (y0, y1) = params.pair(ctx.prec)?;
            h.note(format!(
                "pair = {{ gamma = {}, epsilon = {}, s = {}, ell_star = {}, w = {}, c = {}, m = {} }}",
                gamma, epsilon, params.s, params.ell_star, params.w, params.c, params.m
            ));
            h.note(format!("tv_distance = {}", y0.tv_distance(&y1).to_f64()));
            Ok(pair_csv(&y0, &y1))
        }
    }
}

fn log2_mass(x: &rug::Float) -> f64 {
    if x.is_zero() {
        f64::NEG_INFINITY
    } else {
        rug::Float::with_val(x.prec(), x.log2_ref()).to_f64()
    }
}

/// Noise-heavy example parameters: `d = 31, s = 0.5, p = 0.01`.
pub fn figure2_params() -> Result<BinaryParams> {
    BinaryParams::new(f64::INFINITY, 1, 31, 0.5, 0.01, ParamMode::Engineering)
}

fn mgf_check(
    ctx: &Context,
    h: &mut Header,
    source: MgfSource,
    args: &BinaryArgs,
    gamma: Option<f64>,
    t_range: Option<f64>,
    grid_points: Option<usize>,
) -> Result<String> {
    let grid = pick(grid_points, ctx.file.precision.grid_points, DEFAULT_GRID_POINTS);
    h.section("precision", &ctx.precision_section(Some(grid)));
    let (a, b, default_t) = match source {
        MgfSource::Binary => {
            let bp = ctx.binary(args)?;
            h.section("binary", &binary_section(&bp));
            let dist = randomizer_dist(&bp, ctx.prec)?;
            (dist.r0, dist.r1, 8.0 / bp.s)
        }
        MgfSource::Figure3 => {
            let (a, b) = build_figure3_pair(ctx.prec);
            (a, b, (1.0 / figure3_params().gamma).ln().sqrt())
        }
        MgfSource::GaussianPair => {
            let gamma = gamma.unwrap_or(1e-4);
            let params = gaussian_pair_params(gamma, args.epsilon.unwrap_or(0.1))?;
            let (a, b) = params.pair(ctx.prec)?;
            h.note(format!("pair = {{ gamma = {}, c = {}, m = {} }}", gamma, params.c, params.m));
            (a, b, (1.0 / gamma).ln().sqrt())
        }
    };
    let t = t_range.unwrap_or(default_t);
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::Config(format!("t-range must be positive, got {t}")));
    }
    Ok(mgf_ratio_check(&a, &b, t, grid).to_csv())
}
