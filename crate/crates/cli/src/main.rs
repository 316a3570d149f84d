use std::fs::File;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use augtest::harness::{
    beta_sweep, run_sweep, write_beta_csv, write_summary_csv, write_trials_csv, SweepConfig,
};
use augtest::ingest::{ingest_directory, load_keymap, save_keymap, KeyMap};
use augtest::instances::{
    closeness_lb_instance, hard_closeness_instance, interpolated_predictor, uniformity_lb_triple,
    Metadata,
};
use augtest::io::{load_dist, save_dist, save_meta};
use augtest::{
    augmented_closeness_test, augmented_identity_test, closeness_search, tv_distance,
    ClosenessOptions, DistributionOracle, SearchError, SeededRng, TesterError,
};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "augtest",
    version,
    about = "Distribution testing with predictions"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate instances.
    #[command(subcommand)]
    Gen(Gen),
    /// Run a single augmented tester.
    #[command(subcommand)]
    Test(Test),
    /// Run the accuracy-level search.
    #[command(subcommand)]
    Search(Search),
    /// Run a budget sweep from a JSON configuration.
    Sweep(SweepArgs),
    /// Turn one `key<TAB>count` chunk of a directory into a distribution.
    Ingest(IngestArgs),
}

#[derive(Subcommand)]
enum Gen {
    /// Hard closeness instance `(p, q)` with `tv(p, q) = 1/2`.
    HardCloseness {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        out_p: PathBuf,
        #[arg(long)]
        out_q: PathBuf,
    },
    /// Prediction `(1 − β)·p + β·U_n`.
    Hint {
        #[arg(long)]
        p: PathBuf,
        #[arg(long)]
        beta: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Uniformity lower-bound triple; writes `PFX.phat.dist`,
    /// `PFX.p_bullet.dist`, `PFX.p_diamond.dist` and `PFX.meta.json`.
    UniformityLb {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        eps: f64,
        #[arg(long)]
        d: f64,
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out_prefix: String,
    },
    /// Closeness lower-bound family; writes `PFX.phat.dist`,
    /// `PFX.p_plus.dist`, `PFX.p_minus.dist` and `PFX.meta.json`.
    ClosenessLb {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        eps: f64,
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out_prefix: String,
    },
}

#[derive(Args)]
struct TestArgs {
    #[arg(long)]
    p: PathBuf,
    #[arg(long)]
    q: PathBuf,
    #[arg(long)]
    hint: PathBuf,
    #[arg(long)]
    alpha: f64,
    #[arg(long)]
    eps: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Subcommand)]
enum Test {
    /// Closeness of two sampled distributions.
    Closeness(TestArgs),
    /// Identity of a sampled `p` to a known `q`.
    Identity(TestArgs),
}

#[derive(Subcommand)]
enum Search {
    Closeness {
        #[arg(long)]
        p: PathBuf,
        #[arg(long)]
        q: PathBuf,
        #[arg(long)]
        hint: PathBuf,
        #[arg(long)]
        eps: f64,
        #[arg(long, default_value_t = 0.1)]
        delta: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    config: PathBuf,
    /// Defaults to `trials.csv` in the configuration's `output` directory.
    #[arg(long)]
    out_trials: Option<PathBuf>,
    /// Defaults to `summary.csv` in the configuration's `output` directory.
    #[arg(long)]
    out_summary: Option<PathBuf>,
    /// Also run the interpolation sweep and write it here.
    #[arg(long)]
    out_beta: Option<PathBuf>,
}

#[derive(Args)]
struct IngestArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    chunk_index: usize,
    #[arg(long)]
    out: PathBuf,
    /// Loaded if present, then updated with the directory's keys.
    #[arg(long)]
    keymap: PathBuf,
    /// Domain size; defaults to the number of keys after scanning.
    #[arg(long)]
    final_n: Option<usize>,
}

fn meta_path(dist: &Path) -> PathBuf {
    dist.with_extension("meta.json")
}

fn prefixed(prefix: &str, suffix: &str) -> PathBuf {
    PathBuf::from(format!("{prefix}.{suffix}"))
}

fn gen(cmd: Gen) -> Result<()> {
    match cmd {
        Gen::HardCloseness { n, out_p, out_q } => {
            let inst = hard_closeness_instance(n)?;
            save_dist(&inst.p, &out_p)?;
            save_dist(&inst.q, &out_q)?;
            save_meta(&inst.metadata, meta_path(&out_p))?;
        }
        Gen::Hint { p, beta, out } => {
            let p = load_dist(&p)?;
            let hint = interpolated_predictor(&p, beta)?;
            let mut meta = Metadata::new();
            meta.insert("beta".into(), beta);
            meta.insert("tv_p_phat".into(), tv_distance(&p, &hint)?);
            save_dist(&hint, &out)?;
            save_meta(&meta, meta_path(&out))?;
        }
        Gen::UniformityLb {
            n,
            eps,
            d,
            alpha,
            seed,
            out_prefix,
        } => {
            let t = uniformity_lb_triple(n, eps, d, alpha, &mut SeededRng::new(seed))?;
            save_dist(&t.phat, prefixed(&out_prefix, "phat.dist"))?;
            save_dist(&t.p_bullet, prefixed(&out_prefix, "p_bullet.dist"))?;
            save_dist(&t.p_diamond, prefixed(&out_prefix, "p_diamond.dist"))?;
            save_meta(&t.metadata, prefixed(&out_prefix, "meta.json"))?;
        }
        Gen::ClosenessLb {
            n,
            eps,
            alpha,
            seed,
            out_prefix,
        } => {
            let inst = closeness_lb_instance(n, eps, alpha, &mut SeededRng::new(seed))?;
            save_dist(&inst.phat, prefixed(&out_prefix, "phat.dist"))?;
            save_dist(&inst.p_plus, prefixed(&out_prefix, "p_plus.dist"))?;
            save_dist(&inst.p_minus, prefixed(&out_prefix, "p_minus.dist"))?;
            save_meta(&inst.metadata, prefixed(&out_prefix, "meta.json"))?;
        }
    }
    Ok(())
}

fn test(cmd: Test) -> Result<()> {
    let (args, closeness) = match cmd {
        Test::Closeness(a) => (a, true),
        Test::Identity(a) => (a, false),
    };
    let p = load_dist(&args.p)?;
    let q = load_dist(&args.q)?;
    let hint = load_dist(&args.hint)?;
    let mut rng = SeededRng::new(args.seed);
    let p_src = DistributionOracle::new(&p);
    let report = if closeness {
        let q_src = DistributionOracle::new(&q);
        augmented_closeness_test(
            &hint,
            &p_src,
            &q_src,
            args.alpha,
            args.eps,
            ClosenessOptions::default(),
            &mut rng,
        )?
    } else {
        augmented_identity_test(&q, &hint, &p_src, args.alpha, args.eps, &mut rng)?
    };
    println!("{}", report.to_json_line());
    Ok(())
}

fn search(cmd: Search) -> Result<()> {
    let Search::Closeness {
        p,
        q,
        hint,
        eps,
        delta,
        seed,
    } = cmd;
    let (p, q, hint) = (load_dist(&p)?, load_dist(&q)?, load_dist(&hint)?);
    let report = closeness_search(
        &hint,
        &DistributionOracle::new(&p),
        &DistributionOracle::new(&q),
        eps,
        delta,
        &mut SeededRng::new(seed),
    )?;
    println!("{}", report.to_json());
    Ok(())
}

fn create(path: &Path) -> Result<File> {
    File::create(path).with_context(|| format!("cannot create {}", path.display()))
}

fn sweep(args: SweepArgs) -> Result<()> {
    let cfg = SweepConfig::load(&args.config)?;
    let target = |explicit: Option<PathBuf>, name: &str| -> Result<PathBuf> {
        match (explicit, &cfg.output) {
            (Some(path), _) => Ok(path),
            (None, Some(dir)) => Ok(dir.join(name)),
            (None, None) => bail!("no output path for {name}: pass a flag or set `output`"),
        }
    };
    let trials_path = target(args.out_trials, "trials.csv")?;
    let summary_path = target(args.out_summary, "summary.csv")?;
    for path in [&trials_path, &summary_path] {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir)?;
        }
    }

    let out = run_sweep(&cfg)?;
    write_trials_csv(&out.trials, create(&trials_path)?)?;
    write_summary_csv(&out.summary, create(&summary_path)?)?;
    if let Some(path) = args.out_beta {
        write_beta_csv(&beta_sweep(&cfg)?, create(&path)?)?;
    }
    Ok(())
}

fn ingest(args: IngestArgs) -> Result<()> {
    let mut keymap = if args.keymap.exists() {
        load_keymap(&args.keymap)?
    } else {
        KeyMap::new()
    };
    let dist = ingest_directory(&args.input, args.chunk_index, &mut keymap, args.final_n)?;
    save_dist(&dist, &args.out)?;
    save_keymap(&keymap, &args.keymap)?;
    Ok(())
}

fn is_precondition(err: &TesterError) -> bool {
    matches!(
        err,
        TesterError::InvalidParameter { .. } | TesterError::DomainMismatch { .. }
    )
}

/// 3 for violated tester preconditions, 2 for everything else.
fn exit_code(err: &anyhow::Error) -> u8 {
    let precondition = err.chain().any(|cause| {
        if let Some(e) = cause.downcast_ref::<TesterError>() {
            return is_precondition(e);
        }
        match cause.downcast_ref::<SearchError>() {
            Some(SearchError::DeltaOutOfRange(_)) => true,
            Some(SearchError::Tester(e)) => is_precondition(e),
            _ => false,
        }
    });
    if precondition {
        3
    } else {
        2
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Gen(cmd) => gen(cmd),
        Command::Test(cmd) => test(cmd),
        Command::Search(cmd) => search(cmd),
        Command::Sweep(args) => sweep(args),
        Command::Ingest(args) => ingest(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        let bad = TesterError::InvalidParameter {
            name: "eps",
            value: 0.0,
            requirement: "must lie in (0, 1)",
        };
        assert_eq!(exit_code(&anyhow::Error::new(bad.clone())), 3);
        assert_eq!(exit_code(&anyhow::Error::new(SearchError::Tester(bad))), 3);
        assert_eq!(
            exit_code(&anyhow::Error::new(SearchError::DeltaOutOfRange(0.7))),
            3
        );
        assert_eq!(exit_code(&anyhow::anyhow!("missing file")), 2);
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
