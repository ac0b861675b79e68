//! Command-line front end. Every number it prints comes straight from a
//! library call and is written with [`crate::export::fmt_f64`].
//!
//! Exit codes: 0 success, 1 a checked property failed, 2 usage or input
//! error, 3 numerical failure.

use std::ffi::OsString;
use std::fs;
use std::path::PathBuf;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::chain::{
    build_bernoulli_laplace, build_hypercube_lazy, build_hypercube_weight_chain,
    build_random_to_random, build_random_transpositions, build_star_transpositions, load_chain,
    make_lazy, ReversibleChain, HYPERCUBE_LAZY_MAX_N,
};
use crate::conditions::{
    discrete_admissible, limsup_report, run_bound_trials, BoundTrial, ConditionId, DEFAULT_TOP_K,
};
use crate::distance::{
    empirical_profile, profile_from_model, BirthDeathStart, ProfileCurve, SpectralStart,
    StartModel, TimeConvention,
};
use crate::error::{Error, Result};
use crate::export::{curve_csv, fmt_f64, report_csv, spectrum_csv, Format};
use crate::family::{ChainFamily, FamilyKind};
use crate::profiles::ClosedFormProfile;
use crate::spectral::{birth_death_start_spectrum, decompose, hypercube_analytic_spectrum, SpectrumRow};

pub const THREADS_ENV: &str = "CUTOFFLAB_THREADS";

#[derive(Debug, Parser)]
#[command(name = "cutofflab", version, about = "Mixing profiles and continuity conditions for reversible Markov chains")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Write output here instead of standard output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Eigenvalues and start weights of a chain.
    Spectrum(SpectrumArgs),
    /// Distance to stationarity on a time grid or along the cutoff schedule.
    TvCurve(TvCurveArgs),
    /// Empirical profile of a family, or a closed-form profile.
    Profile(ProfileArgs),
    /// Continuity-condition table across n with its limsup estimate.
    Condition(ConditionArgs),
    /// Random trials of the mean-value bound.
    BoundCheck(BoundCheckArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ChainSource {
    /// Full lazy walk on {0,1}^n.
    Hypercube,
    /// Hamming-weight lumping of the hypercube walk.
    HypercubeWeight,
    BernoulliLaplace,
    RandomTranspositions,
    StarTranspositions,
    RandomToRandom,
    /// Chain file given by --path.
    File,
}

#[derive(Debug, Clone, Args)]
pub struct ChainArgs {
    #[arg(long, value_enum)]
    pub chain: ChainSource,
    #[arg(long)]
    pub n: Option<usize>,
    /// Urn size for bernoulli-laplace (default n/2).
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub path: Option<PathBuf>,
    /// Replace P by (I + P)/2.
    #[arg(long)]
    pub lazy: bool,
    /// Start state (bernoulli-laplace defaults to k, everything else to 0).
    #[arg(long)]
    pub start: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct GridArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub c_min: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub c_max: f64,
    #[arg(long)]
    pub c_count: usize,
}

impl GridArgs {
    pub fn grid(&self) -> Result<Vec<f64>> {
        linspace(self.c_min, self.c_max, self.c_count)
    }
}

#[derive(Debug, Clone, Args)]
pub struct SpectrumArgs {
    #[command(flatten)]
    pub chain: ChainArgs,
}

#[derive(Debug, Clone, Args)]
pub struct TvCurveArgs {
    #[command(flatten)]
    pub chain: ChainArgs,
    #[arg(long, value_enum, default_value_t = TimeConvention::Continuous)]
    pub convention: TimeConvention,
    #[arg(long, allow_hyphen_values = true)]
    pub t_min: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub t_max: Option<f64>,
    #[arg(long)]
    pub t_count: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    pub c_min: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub c_max: Option<f64>,
    #[arg(long)]
    pub c_count: Option<usize>,
    /// Cutoff time; defaults to the family schedule.
    #[arg(long)]
    pub t_n: Option<f64>,
    /// Cutoff window; defaults to the family schedule.
    #[arg(long)]
    pub w_n: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct ProfileArgs {
    /// hypercube, poisson-shuffle, bernoulli-laplace or ramanujan.
    #[arg(long, conflicts_with = "family")]
    pub closed_form: Option<String>,
    /// Degree for the ramanujan profile.
    #[arg(long)]
    pub d: Option<u32>,
    #[arg(long, value_enum)]
    pub family: Option<FamilyKind>,
    #[arg(long, value_delimiter = ',')]
    pub n: Vec<usize>,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub lazy: bool,
    #[arg(long)]
    pub start: Option<usize>,
    #[arg(long, value_enum)]
    pub convention: Option<TimeConvention>,
    #[command(flatten)]
    pub grid: GridArgs,
}

#[derive(Debug, Clone, Args)]
pub struct ConditionArgs {
    #[arg(long, value_enum)]
    pub family: FamilyKind,
    #[arg(long, value_enum)]
    pub id: ConditionId,
    #[arg(long, value_delimiter = ',', required = true)]
    pub n: Vec<usize>,
    #[command(flatten)]
    pub grid: GridArgs,
    /// Rows entering the limsup estimate (default 3, or fewer if the n list is shorter).
    #[arg(long)]
    pub top_k: Option<usize>,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub lazy: bool,
    #[arg(long)]
    pub start: Option<usize>,
    /// Constant in the Bernoulli-Laplace reference bound; no reference without it.
    #[arg(long)]
    pub a_prime: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ConventionChoice {
    Continuous,
    Discrete,
    /// Continuous, plus discrete when the chain admits it.
    Both,
}

#[derive(Debug, Clone, Args)]
pub struct BoundCheckArgs {
    #[command(flatten)]
    pub chain: ChainArgs,
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = ConventionChoice::Both)]
    pub convention: ConventionChoice,
    #[arg(long)]
    pub t_n: Option<f64>,
    #[arg(long)]
    pub w_n: Option<f64>,
}

/// `count` evenly spaced points from `min` to `max`, both included.
pub fn linspace(min: f64, max: f64, count: usize) -> Result<Vec<f64>> {
    if count < 2 || !(min < max) || !min.is_finite() || !max.is_finite() {
        return Err(Error::Parameter(format!(
            "grid needs count >= 2 and finite min < max, got [{min}, {max}] x {count}"
        )));
    }
    let step = (max - min) / (count - 1) as f64;
    let mut grid: Vec<f64> = (0..count).map(|j| min + step * j as f64).collect();
    grid[count - 1] = max;
    Ok(grid)
}

fn require_n(n: Option<usize>, what: &str) -> Result<usize> {
    n.ok_or_else(|| Error::Parameter(format!("--n is required for {what}")))
}

/// A chain source resolved into something distances can be evaluated on.
pub struct ResolvedChain {
    pub label: String,
    pub model: Box<dyn StartModel>,
    pub family: Option<ChainFamily>,
    pub n: Option<usize>,
    pub start: usize,
}

fn source_family(args: &ChainArgs) -> Option<ChainFamily> {
    let kind = match args.chain {
        ChainSource::Hypercube | ChainSource::HypercubeWeight => FamilyKind::Hypercube,
        ChainSource::BernoulliLaplace => FamilyKind::BernoulliLaplace,
        ChainSource::RandomTranspositions => FamilyKind::RandomTranspositions,
        ChainSource::StarTranspositions => FamilyKind::StarTranspositions,
        ChainSource::RandomToRandom => FamilyKind::RandomToRandom,
        ChainSource::File => return None,
    };
    Some(ChainFamily::new(kind).with_k(args.k).with_lazy(args.lazy))
}

/// Builds the chain named by `args` (full state space, laziness applied).
pub fn build_source_chain(args: &ChainArgs) -> Result<ReversibleChain> {
    let chain = match args.chain {
        ChainSource::Hypercube => build_hypercube_lazy(require_n(args.n, "hypercube")?)?,
        ChainSource::HypercubeWeight => build_hypercube_weight_chain(require_n(args.n, "hypercube-weight")?)?,
        ChainSource::BernoulliLaplace => {
            let n = require_n(args.n, "bernoulli-laplace")?;
            build_bernoulli_laplace(n, args.k.unwrap_or(n / 2))?
        }
        ChainSource::RandomTranspositions => build_random_transpositions(require_n(args.n, "random-transpositions")?)?,
        ChainSource::StarTranspositions => build_star_transpositions(require_n(args.n, "star-transpositions")?)?,
        ChainSource::RandomToRandom => build_random_to_random(require_n(args.n, "random-to-random")?)?,
        ChainSource::File => {
            let path = args
                .path
                .as_ref()
                .ok_or_else(|| Error::Parameter("--path is required for --chain file".into()))?;
            load_chain(path)?
        }
    };
    Ok(if args.lazy { make_lazy(&chain) } else { chain })
}

fn default_start(args: &ChainArgs) -> usize {
    match (args.chain, args.n) {
        (ChainSource::BernoulliLaplace, Some(n)) => args.k.unwrap_or(n / 2),
        _ => 0,
    }
}

/// Distance model for a chain source. The full hypercube is evaluated
/// through its Hamming-weight lumping from a corner, which gives the same
/// distances from every state.
pub fn resolve_chain(args: &ChainArgs) -> Result<ResolvedChain> {
    let start = args.start.unwrap_or_else(|| default_start(args));
    let family = source_family(args);
    let (label, model): (String, Box<dyn StartModel>) = match args.chain {
        ChainSource::Hypercube => {
            let n = require_n(args.n, "hypercube")?;
            if n == 0 || n > HYPERCUBE_LAZY_MAX_N {
                return Err(Error::SizeLimit(format!(
                    "hypercube dimension must be in 1..={HYPERCUBE_LAZY_MAX_N}, got {n}"
                )));
            }
            if start >= 1 << n {
                return Err(Error::Parameter(format!("state {start} out of range for n={n}")));
            }
            let mut weight = build_hypercube_weight_chain(n)?;
            let mut spec = hypercube_analytic_spectrum(n)?;
            if args.lazy {
                weight = make_lazy(&weight);
                spec = spec.lazy();
            }
            let label = if args.lazy {
                format!("lazy(hypercube-lazy(n={n}))")
            } else {
                format!("hypercube-lazy(n={n})")
            };
            (label, Box::new(BirthDeathStart::with_spectrum(weight, 0, spec)?))
        }
        ChainSource::HypercubeWeight | ChainSource::BernoulliLaplace => {
            let chain = build_source_chain(args)?;
            (chain.label().to_string(), Box::new(BirthDeathStart::new(chain, start)?))
        }
        _ => {
            let chain = build_source_chain(args)?;
            chain.check_state(start)?;
            let dec = Arc::new(decompose(&chain)?);
            (chain.label().to_string(), Box::new(SpectralStart::new(dec, start)?))
        }
    };
    Ok(ResolvedChain { label, model, family, n: args.n, start })
}

fn schedule_for(resolved: &ResolvedChain, t_n: Option<f64>, w_n: Option<f64>) -> Result<(f64, f64)> {
    let default = match (&resolved.family, resolved.n) {
        (Some(f), Some(n)) => Some(f.schedule(n)?),
        _ => None,
    };
    match (t_n.or(default.map(|d| d.0)), w_n.or(default.map(|d| d.1))) {
        (Some(t), Some(w)) if t >= 0.0 && w > 0.0 => Ok((t, w)),
        (Some(t), Some(w)) => Err(Error::Parameter(format!("need t_n >= 0 and w_n > 0, got {t}, {w}"))),
        _ => Err(Error::Parameter("this chain has no built-in schedule; pass --t-n and --w-n".into())),
    }
}

/// Spectrum rows for a chain source: birth-death chains use the
/// tridiagonal route, everything else the dense decomposition.
pub fn spectrum_rows(args: &ChainArgs) -> Result<Vec<SpectrumRow>> {
    let chain = build_source_chain(args)?;
    let start = args.start.unwrap_or_else(|| default_start(args));
    chain.check_state(start)?;
    if matches!(args.chain, ChainSource::HypercubeWeight | ChainSource::BernoulliLaplace) {
        let spec = birth_death_start_spectrum(&chain, start)?;
        return Ok(spec
            .betas()
            .iter()
            .zip(spec.start_weights())
            .enumerate()
            .map(|(index, (&eigenvalue, weight_at_start))| SpectrumRow { index, eigenvalue, weight_at_start })
            .collect());
    }
    decompose(&chain)?.spectrum_rows(start)
}

#[derive(Debug, Serialize)]
struct TimeCurve {
    chain: String,
    start: usize,
    convention: TimeConvention,
    t_grid: Vec<f64>,
    values: Vec<f64>,
}

fn time_curve_csv(curve: &TimeCurve) -> String {
    let mut out = format!(
        "# chain={}\n# start={}\n# convention={}\nt,value\n",
        curve.chain, curve.start, curve.convention
    );
    for (t, v) in curve.t_grid.iter().zip(&curve.values) {
        out.push_str(&format!("{},{}\n", fmt_f64(*t), fmt_f64(*v)));
    }
    out
}

#[derive(Debug, Serialize)]
struct BoundCheckOutput {
    chain: String,
    start: usize,
    t_n: f64,
    w_n: f64,
    seed: u64,
    skipped: Vec<String>,
    trials: Vec<BoundTrial>,
    all_hold: bool,
}

fn bound_check_csv(out: &BoundCheckOutput) -> String {
    let mut s = format!(
        "# chain={}\n# start={}\n# t_n={}\n# w_n={}\n# seed={}\n",
        out.chain,
        out.start,
        fmt_f64(out.t_n),
        fmt_f64(out.w_n),
        out.seed
    );
    for note in &out.skipped {
        s.push_str(&format!("# skipped: {note}\n"));
    }
    s.push_str("trial,convention,c1,c2,lhs,rhs,holds\n");
    for t in &out.trials {
        s.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            t.trial,
            t.convention,
            fmt_f64(t.c1),
            fmt_f64(t.c2),
            fmt_f64(t.lhs),
            fmt_f64(t.rhs),
            t.holds
        ));
    }
    s.push_str(&format!("all_hold={}\n", out.all_hold));
    s
}

fn to_json<T: Serialize>(value: &T) -> Result<String> {
    serde_json::to_string_pretty(value)
        .map(|s| s + "\n")
        .map_err(|e| Error::Numerical(format!("JSON serialization failed: {e}")))
}

/// Output text plus whether every checked property held.
pub fn render(cli: &Cli) -> Result<(String, bool)> {
    let json = cli.format == Format::Json;
    match &cli.command {
        Command::Spectrum(a) => {
            let rows = spectrum_rows(&a.chain)?;
            Ok((if json { to_json(&rows)? } else { spectrum_csv(&rows) }, true))
        }
        Command::TvCurve(a) => {
            let resolved = resolve_chain(&a.chain)?;
            let c_mode = a.c_min.is_some() || a.c_max.is_some() || a.c_count.is_some();
            let t_mode = a.t_min.is_some() || a.t_max.is_some() || a.t_count.is_some();
            if c_mode == t_mode {
                return Err(Error::Parameter(
                    "give either --t-min/--t-max/--t-count or --c-min/--c-max/--c-count".into(),
                ));
            }
            if c_mode {
                let (Some(lo), Some(hi), Some(count)) = (a.c_min, a.c_max, a.c_count) else {
                    return Err(Error::Parameter("--c-min, --c-max and --c-count go together".into()));
                };
                let grid = linspace(lo, hi, count)?;
                let (t_n, w_n) = schedule_for(&resolved, a.t_n, a.w_n)?;
                let curve = profile_from_model(
                    resolved.model.as_ref(),
                    &resolved.label,
                    resolved.n,
                    t_n,
                    w_n,
                    &grid,
                    a.convention,
                )?;
                let mut curve = curve;
                curve.meta.start = Some(resolved.start);
                Ok((if json { to_json(&curve)? } else { curve_csv(&curve) }, true))
            } else {
                let (Some(lo), Some(hi), Some(count)) = (a.t_min, a.t_max, a.t_count) else {
                    return Err(Error::Parameter("--t-min, --t-max and --t-count go together".into()));
                };
                if lo < 0.0 {
                    return Err(Error::Parameter(format!("--t-min must be nonnegative, got {lo}")));
                }
                let grid = linspace(lo, hi, count)?;
                let values = resolved.model.distances(&grid, a.convention)?;
                let curve = TimeCurve {
                    chain: resolved.label,
                    start: resolved.start,
                    convention: a.convention,
                    t_grid: grid,
                    values,
                };
                Ok((if json { to_json(&curve)? } else { time_curve_csv(&curve) }, true))
            }
        }
        Command::Profile(a) => {
            let grid = a.grid.grid()?;
            let curves: Vec<ProfileCurve> = match (&a.closed_form, a.family) {
                (Some(name), None) => vec![ClosedFormProfile::from_name(name, a.d)?.curve(&grid)?],
                (None, Some(kind)) => {
                    if a.n.is_empty() {
                        return Err(Error::Parameter("--n is required with --family".into()));
                    }
                    let family = ChainFamily::new(kind).with_k(a.k).with_lazy(a.lazy);
                    family.validate_schedule(&a.n)?;
                    a.n.iter()
                        .map(|&n| empirical_profile(&family, n, a.start, &grid, a.convention))
                        .collect::<Result<_>>()?
                }
                _ => return Err(Error::Parameter("give exactly one of --closed-form or --family".into())),
            };
            let text = if json {
                if curves.len() == 1 { to_json(&curves[0])? } else { to_json(&curves)? }
            } else {
                curves.iter().map(curve_csv).collect::<Vec<_>>().join("\n")
            };
            Ok((text, true))
        }
        Command::Condition(a) => {
            let grid = a.grid.grid()?;
            let family = ChainFamily::new(a.family).with_k(a.k).with_lazy(a.lazy);
            let top_k = a.top_k.unwrap_or(DEFAULT_TOP_K.min(a.n.len()));
            let report = limsup_report(&family, a.start, a.id, &a.n, &grid, top_k, a.a_prime)?;
            Ok((if json { to_json(&report)? } else { report_csv(&report) }, true))
        }
        Command::BoundCheck(a) => {
            let resolved = resolve_chain(&a.chain)?;
            let (t_n, w_n) = schedule_for(&resolved, a.t_n, a.w_n)?;
            let model = resolved.model.as_ref();
            let mut skipped = Vec::new();
            let conventions = match a.convention {
                ConventionChoice::Continuous => vec![TimeConvention::Continuous],
                ConventionChoice::Discrete => vec![TimeConvention::Discrete],
                ConventionChoice::Both => {
                    if discrete_admissible(model) {
                        vec![TimeConvention::Continuous, TimeConvention::Discrete]
                    } else {
                        skipped.push(
                            "discrete (negative eigenvalues, or real powers unavailable on this route)"
                                .to_string(),
                        );
                        vec![TimeConvention::Continuous]
                    }
                }
            };
            let trials = run_bound_trials(model, t_n, w_n, a.trials, a.seed, &conventions)?;
            let all_hold = trials.iter().all(|t| t.holds);
            let out = BoundCheckOutput {
                chain: resolved.label,
                start: resolved.start,
                t_n,
                w_n,
                seed: a.seed,
                skipped,
                trials,
                all_hold,
            };
            Ok((if json { to_json(&out)? } else { bound_check_csv(&out) }, all_hold))
        }
    }
}

fn configure_threads() -> Result<()> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let threads: usize = raw
        .trim()
        .parse()
        .map_err(|_| Error::Parameter(format!("{THREADS_ENV} must be a nonnegative integer, got `{raw}`")))?;
    // 0 leaves the choice to rayon; a pool that already exists is kept
    let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    Ok(())
}

/// Parses `args`, runs the command, writes output and returns the exit code.
pub fn main_entry<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let result = configure_threads().and_then(|_| render(&cli)).and_then(|(text, ok)| {
        match &cli.out {
            Some(path) => fs::write(path, &text)?,
            None => print!("{text}"),
        }
        Ok(ok)
    });
    match result {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linspace_endpoints() {
        let g = linspace(-2.0, 3.0, 101).unwrap();
        assert_eq!(g.len(), 101);
        assert_eq!(g[0], -2.0);
        assert_eq!(g[100], 3.0);
        assert!(linspace(1.0, 1.0, 5).is_err());
        assert!(linspace(0.0, 1.0, 1).is_err());
    }

    #[test]
    fn parses_negative_grid_bounds() {
        let cli = Cli::try_parse_from([
            "cutofflab", "profile", "--closed-form", "poisson-shuffle", "--c-min", "-2", "--c-max", "3",
            "--c-count", "5",
        ])
        .unwrap();
        let (text, ok) = render(&cli).unwrap();
        assert!(ok);
        assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 6);
    }
}
