use clap::{Args, Parser, Subcommand, ValueEnum};
use plap::bundle::Report;
use plap::config::{Command, ExperimentConfig};
use plap::{default_plots, emit_plotdata, run, verify, write_outputs, ReportBundle};
use std::path::PathBuf;
use std::process::ExitCode;

const USAGE: u8 = 2;

#[derive(Parser)]
#[command(name = "plaplab", version, about = "Verification runs for p-Laplacian estimates", arg_required_else_help = true)]
struct Cli {
    /// Experiment config (flat `key = value` file).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Directory for bundle.json and the CSV tables.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    cmd: Option<Cmd>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Grid p-Laplace solves on annuli against the radial oracle.
    SolveElliptic(Overrides),
    /// Moser continuation p → 1 on a rotationally symmetric metric.
    Imcf(Overrides),
    /// Parabolic runs with differential Harnack checks.
    Parabolic(Overrides),
    /// Entropy functionals along a run.
    Entropy(Overrides),
    /// Pointwise identities on exact data.
    Identities(Overrides),
    /// The acceptance suite.
    Verify {
        #[arg(long, value_enum)]
        suite: Option<SuiteArg>,
        #[command(flatten)]
        o: Overrides,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum SuiteArg {
    Quick,
    Full,
}

/// Flags that mirror config keys.
#[derive(Args, Default)]
struct Overrides {
    #[arg(long)]
    metric: Option<String>,
    #[arg(long)]
    n: Option<String>,
    /// A single p or a comma-separated decreasing sequence.
    #[arg(long = "p", visible_alias = "p-seq")]
    p: Option<String>,
    #[arg(long)]
    eps: Option<String>,
    #[arg(long)]
    delta: Option<String>,
    #[arg(long)]
    alpha: Option<String>,
    #[arg(long)]
    equation: Option<String>,
    #[arg(long)]
    data: Option<String>,
    #[arg(long)]
    harnack: Option<String>,
    #[arg(long)]
    identities: Option<String>,
    /// Grid spacing (grid.h).
    #[arg(long)]
    h: Option<String>,
    /// Grid extent (grid.extent).
    #[arg(long)]
    extent: Option<String>,
    #[arg(long)]
    t0: Option<String>,
    #[arg(long)]
    t1: Option<String>,
    #[arg(long)]
    samples: Option<String>,
    /// Plot selectors (out.plots), e.g. harnack:lyp1,entropy:W.
    #[arg(long)]
    plots: Option<String>,
    /// Any config key, repeatable: --set tol.rel=1e-2
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

impl Overrides {
    fn pairs(&self) -> Vec<(String, String)> {
        let fixed = [
            ("metric", &self.metric),
            ("n", &self.n),
            ("p", &self.p),
            ("eps", &self.eps),
            ("delta", &self.delta),
            ("alpha", &self.alpha),
            ("equation", &self.equation),
            ("data", &self.data),
            ("harnack", &self.harnack),
            ("identities", &self.identities),
            ("grid.h", &self.h),
            ("grid.extent", &self.extent),
            ("time.t0", &self.t0),
            ("time.t1", &self.t1),
            ("time.samples", &self.samples),
            ("out.plots", &self.plots),
        ];
        let mut out: Vec<(String, String)> =
            fixed.iter().filter_map(|(k, v)| v.as_ref().map(|v| (k.to_string(), v.clone()))).collect();
        for kv in &self.set {
            let (k, v) = kv.split_once('=').unwrap_or((kv, ""));
            out.push((k.trim().to_string(), v.trim().to_string()));
        }
        out
    }
}

fn build_config(cli: &Cli) -> Result<ExperimentConfig, String> {
    let mut cfg = match &cli.config {
        Some(path) => ExperimentConfig::load(path).map_err(|e| e.to_string())?,
        None => ExperimentConfig::default(),
    };
    let (command, o, suite) = match &cli.cmd {
        None => (None, None, None),
        Some(Cmd::SolveElliptic(o)) => (Some(Command::SolveElliptic), Some(o), None),
        Some(Cmd::Imcf(o)) => (Some(Command::Imcf), Some(o), None),
        Some(Cmd::Parabolic(o)) => (Some(Command::Parabolic), Some(o), None),
        Some(Cmd::Entropy(o)) => (Some(Command::Entropy), Some(o), None),
        Some(Cmd::Identities(o)) => (Some(Command::Identities), Some(o), None),
        Some(Cmd::Verify { suite, o }) => (Some(Command::Verify), Some(o), *suite),
    };
    if let Some(c) = command {
        cfg.command = Some(c);
    }
    if let Some(o) = o {
        for (k, v) in o.pairs() {
            cfg.set(&k, &v).map_err(|e| e.to_string())?;
        }
    }
    if let Some(s) = suite {
        cfg.suite = Some(match s {
            SuiteArg::Quick => plap::Suite::Quick,
            SuiteArg::Full => plap::Suite::Full,
        });
    }
    if let Some(seed) = cli.seed {
        cfg.seed = Some(seed);
    }
    if let Some(out) = &cli.out {
        cfg.out_dir = Some(out.display().to_string());
    }
    cfg.validate().map_err(|e| e.to_string())?;
    Ok(cfg)
}

fn print_summary(b: &ReportBundle) {
    for r in &b.reports {
        match r {
            Report::Criterion(c) => println!("{}", verify::summary_line(c)),
            Report::Estimate(e) => println!(
                "{:<40} {}  lhs {:.6e}  rhs {:.6e}",
                e.name,
                if e.pass { "pass" } else { "FAIL" },
                e.lhs,
                e.rhs
            ),
            Report::Harnack(h) => {
                let (lo, hi) = h.ratio_range();
                println!(
                    "{:<40} {}  ratio [{lo:.4}, {hi:.4}]  slack {:.3e}  points {}",
                    format!("harnack:{} p={} n={}", h.id.tag(), h.p, h.n),
                    if h.pass { "pass" } else { "FAIL" },
                    h.worst_slack,
                    h.points_checked
                )
            }
            Report::Entropy(s) => println!("entropy series: {} samples, W from {:.4e} to {:.4e}", s.t.len(), s.w[0], s.w[s.w.len() - 1]),
            Report::Continuation(c) => {
                for row in &c.rows {
                    println!("p = {:<6} sup|∇u| = {:.6}  residual {:.2e}", row.p, row.sup_grad, row.residual);
                }
            }
            Report::Identity(_) => {}
        }
    }
    if let Some(e) = &b.error {
        eprintln!("error: {e}");
    }
    println!("overall: {}", if b.pass { "PASS" } else { "FAIL" });
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = match build_config(&cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(USAGE);
        }
    };
    if cfg.command.is_none() {
        eprintln!("error: no command in the config and none on the command line\n");
        let _ = <Cli as clap::CommandFactory>::command().write_help(&mut std::io::stderr());
        return ExitCode::from(USAGE);
    }
    let plots = default_plots(&cfg);
    let empty = ReportBundle::new(&cfg);
    for sel in &plots {
        if let Err(e) = emit_plotdata(&empty, sel) {
            eprintln!("error: {e}");
            return ExitCode::from(USAGE);
        }
    }
    let bundle = run(&cfg);
    print_summary(&bundle);
    if let Some(dir) = &cfg.out_dir {
        match write_outputs(&bundle, dir.as_ref(), &plots) {
            Ok(files) => {
                for f in files {
                    eprintln!("wrote {}", f.display());
                }
            }
            Err(e) => {
                eprintln!("error: writing {dir}: {e}");
                return ExitCode::from(1);
            }
        }
    }
    if bundle.pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
