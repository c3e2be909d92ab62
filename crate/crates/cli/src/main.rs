//! `veil`: command-line front end for the three-crystal simulator.
//!
//! Exit codes: 0 ok, 1 verification failure, 2 usage or schema error,
//! 3 physics validation error.

mod document;

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use veil_core::analysis::{
    dual_condition_feasibility, linspace, solve_invisibility, sweep, DualOutcome, Parameter,
};
use veil_core::detection::{full_report, reduce, ProbabilityReport, OBSERVABLES};
use veil_core::network::{build_network, NetworkConfig};
use veil_core::numfmt::sci;
use veil_core::oracle::{compare, max_amplitude_diff, oracle_output_state, oracle_probabilities};
use veil_core::random::random_configs;
use veil_core::tolerance::ORACLE;

use document::{DocumentError, ExperimentDocument, ResolvedConfig};

#[derive(Debug, Parser)]
#[command(
    name = "veil",
    version,
    about = "Three-crystal induced-coherence simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print every singles and coincidence probability as JSON.
    Simulate { config: PathBuf },
    /// Vary one parameter and print one CSV row per grid point.
    Sweep {
        config: PathBuf,
        #[arg(long)]
        param: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        from: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        to: Option<f64>,
        #[arg(long)]
        points: Option<usize>,
    },
    /// Solve for the object-1 settings that hide object 2.
    Solve {
        config: PathBuf,
        /// Also demand that P_AI lose its T2 dependence.
        #[arg(long)]
        dual: bool,
    },
    /// Compare the fast path against the dense Fock-space oracle.
    Verify {
        config: Option<PathBuf>,
        #[arg(long, conflicts_with = "config")]
        random: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Add this amount to the fast-path (A, I) amplitude before comparing.
        #[arg(long, hide = true, default_value_t = 0.0, allow_hyphen_values = true)]
        perturb: f64,
    },
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Document(DocumentError),
    Physics(veil_core::Error),
    Verification(String),
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Verification(_) => 1,
            Failure::Usage(_) | Failure::Document(DocumentError::Schema(_)) => 2,
            Failure::Physics(_) | Failure::Document(DocumentError::Physics(_)) => 3,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Usage(m) => write!(f, "usage error: {m}"),
            Failure::Document(e) => write!(f, "{e}"),
            Failure::Physics(e) => write!(f, "physics error: {e}"),
            Failure::Verification(m) => write!(f, "verification failed: {m}"),
        }
    }
}

impl From<veil_core::Error> for Failure {
    fn from(e: veil_core::Error) -> Self {
        match e {
            veil_core::Error::UnknownParameter(_) => Failure::Usage(e.to_string()),
            other => Failure::Physics(other),
        }
    }
}

impl From<DocumentError> for Failure {
    fn from(e: DocumentError) -> Self {
        Failure::Document(e)
    }
}

fn load(path: &Path) -> Result<(ExperimentDocument, NetworkConfig), Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))?;
    let doc = document::parse(&text)?;
    let config = doc.network.resolve()?;
    Ok((doc, config))
}

fn to_stdout(text: &str) -> Result<(), Failure> {
    io::stdout()
        .lock()
        .write_all(text.as_bytes())
        .map_err(|e| Failure::Usage(format!("cannot write output: {e}")))
}

fn pretty<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable output");
    s.push('\n');
    s
}

#[derive(Serialize)]
struct SimulateOutput<'a> {
    #[serde(flatten)]
    report: &'a ProbabilityReport,
    config: ResolvedConfig,
}

fn simulate(path: &Path) -> Result<(), Failure> {
    let (_, config) = load(path)?;
    let report = full_report(&build_network(config.clone())?)?;
    to_stdout(&pretty(&SimulateOutput {
        report: &report,
        config: ResolvedConfig::from(&config),
    }))
}

fn sweep_csv(
    path: &Path,
    param: Option<String>,
    from: Option<f64>,
    to: Option<f64>,
    points: Option<usize>,
) -> Result<(), Failure> {
    let (doc, config) = load(path)?;
    let block = doc.sweep.as_ref();
    let missing = |flag: &str| {
        Failure::Usage(format!(
            "--{flag} is required (or a `sweep` block in the document)"
        ))
    };
    let param = param
        .or_else(|| block.map(|b| b.param.clone()))
        .ok_or_else(|| missing("param"))?;
    let from = from
        .or_else(|| block.map(|b| b.from))
        .ok_or_else(|| missing("from"))?;
    let to = to
        .or_else(|| block.map(|b| b.to))
        .ok_or_else(|| missing("to"))?;
    let points = points
        .or_else(|| block.map(|b| b.points))
        .ok_or_else(|| missing("points"))?;
    if points < 2 {
        return Err(Failure::Usage(format!(
            "--points must be at least 2, got {points}"
        )));
    }
    let parameter: Parameter = param.parse()?;
    let table = sweep(&config, parameter, &linspace(from, to, points))?;

    let mut out = String::from("param,P_A,P_B,P_C,P_I,P_AI,P_BI,P_CI\n");
    for (x, row) in table.grid.iter().zip(&table.rows) {
        let s = &row.singles;
        let c = &row.coincidences;
        let cells: Vec<String> = [*x, s.a, s.b, s.c, s.i, c.ai, c.bi, c.ci]
            .iter()
            .map(|v| sci(*v, 12))
            .collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    to_stdout(&out)
}

fn pair(z: Complex64) -> [f64; 2] {
    // Adding 0.0 turns -0.0 into 0.0.
    [z.re + 0.0, z.im + 0.0]
}

fn solve(path: &Path, dual_flag: bool) -> Result<(), Failure> {
    let (doc, config) = load(path)?;
    let dual = dual_flag || doc.solve.as_ref().is_some_and(|s| s.dual);
    let [g1, g2, _] = config.gammas;
    let delays = (config.delays.phi1, config.delays.phi3);
    let value = if dual {
        match dual_condition_feasibility(g1, g2, &config.bs_a, delays)? {
            DualOutcome::Infeasible(w) => json!({
                "feasible": false,
                "phaseGap": w.phase_gap,
                "invisibilityPhase": pair(w.invisibility_phase),
                "coincidencePhase": pair(w.coincidence_phase),
                "invisibilityT1": w.invisibility_t1,
                "coincidenceT1": w.coincidence_t1,
            }),
            DualOutcome::Solution {
                t1,
                phi1,
                degenerate,
            } => json!({
                "feasible": true,
                "T1": t1,
                "phi1": phi1,
                "degenerate": degenerate,
            }),
        }
    } else {
        match solve_invisibility(g1, g2, &config.bs_a, delays) {
            Ok(s) => json!({
                "feasible": true,
                "T1": s.t1,
                "phi1": s.phi1,
                "residual": s.residual,
            }),
            Err(veil_core::Error::Infeasible { required_t1 }) => json!({
                "feasible": false,
                "requiredT1": required_t1,
            }),
            Err(e) => return Err(e.into()),
        }
    };
    to_stdout(&pretty(&value))
}

fn fast_report(config: &NetworkConfig, perturb: f64) -> Result<ProbabilityReport, Failure> {
    let net = build_network(config.clone())?;
    if perturb == 0.0 {
        return Ok(full_report(&net)?);
    }
    let ids = *net.ids();
    let mut state = net.output_state()?;
    state.add_amplitude(
        veil_core::algebra::ModePair::new(ids.a, ids.idler),
        Complex64::new(perturb, 0.0),
    );
    let n = net.normalization();
    Ok(ProbabilityReport::from_reduced(
        &reduce(&state, &ids),
        n * n,
    )?)
}

fn verify(
    config: Option<PathBuf>,
    random: Option<usize>,
    seed: u64,
    perturb: f64,
) -> Result<(), Failure> {
    let configs = match (config, random) {
        (Some(path), None) => vec![load(&path)?.1],
        (None, Some(n)) if n > 0 => random_configs(seed, n),
        (None, Some(_)) => return Err(Failure::Usage("--random needs at least one config".into())),
        _ => return Err(Failure::Usage("give a config file or --random N".into())),
    };
    let results = configs
        .par_iter()
        .map(|cfg| -> Result<_, Failure> {
            let diff = compare(
                &fast_report(cfg, perturb)?,
                &oracle_probabilities(cfg)?,
                ORACLE,
            );
            let net = build_network(cfg.clone())?;
            let amp = max_amplitude_diff(
                &net.output_state()?,
                net.modes(),
                &oracle_output_state(cfg)?,
            );
            Ok((diff, amp))
        })
        .collect::<Result<Vec<_>, _>>()?;

    let mut worst = [0.0f64; 7];
    let mut worst_amp = 0.0f64;
    for (diff, amp) in &results {
        for (w, d) in worst.iter_mut().zip(&diff.diffs) {
            *w = w.max(d.abs_diff);
        }
        worst_amp = worst_amp.max(*amp);
    }
    let mut out = format!("configs {}\n", results.len());
    for (name, w) in OBSERVABLES.iter().zip(worst) {
        out.push_str(&format!("{name:<5} max_abs_diff {}\n", sci(w, 3)));
    }
    out.push_str(&format!("amplitude max_abs_diff {}\n", sci(worst_amp, 3)));
    let max = worst.iter().copied().fold(0.0, f64::max);
    let passed = results.iter().all(|(d, _)| d.passed());
    out.push_str(&format!(
        "{} max {} tol {}\n",
        if passed { "PASS" } else { "FAIL" },
        sci(max, 3),
        sci(ORACLE, 0)
    ));
    to_stdout(&out)?;
    if passed {
        Ok(())
    } else {
        Err(Failure::Verification(format!(
            "max observable difference {max:e} exceeds {ORACLE:e}"
        )))
    }
}

/// `VEIL_THREADS` caps the worker pool; unset or 0 lets rayon decide.
fn configure_threads() -> Result<(), Failure> {
    let Ok(raw) = std::env::var("VEIL_THREADS") else {
        return Ok(());
    };
    let n: usize = raw.trim().parse().map_err(|_| {
        Failure::Usage(format!(
            "VEIL_THREADS must be a non-negative integer, got `{raw}`"
        ))
    })?;
    if n > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Usage(e.to_string()))?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    configure_threads()?;
    match cli.command {
        Command::Simulate { config } => simulate(&config),
        Command::Sweep {
            config,
            param,
            from,
            to,
            points,
        } => sweep_csv(&config, param, from, to, points),
        Command::Solve { config, dual } => solve(&config, dual),
        Command::Verify {
            config,
            random,
            seed,
            perturb,
        } => verify(config, random, seed, perturb),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("veil: {failure}");
            ExitCode::from(failure.exit_code())
        }
    }
}
