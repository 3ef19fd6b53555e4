use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use nalgebra::DMatrix;
use serde::Deserialize;
use serde_json::json;

use evodyn::certify::{
    classify_lead_lag, classify_matrix_game, closed_loop_matrix, dc_gain_condition, frequency_sweep_lti, linearize_rd,
    log_grid, tangent_symmetric_eigenvalues, verify_ni_lemma, NiCertificate, SweepKind,
};
use evodyn::game::matrix_from_rows;
use evodyn::scenario::{parse_scenario, run_scenario, ScenarioError, StateSpaceSpec};
use evodyn::{make_rps_game, Error, MatrixGame, SimplexState};

#[derive(Parser)]
#[command(name = "evodyn", version, about = "Evolutionary game dynamics and passivity certificates")]
struct Cli {
    /// Reserved; every computation is currently deterministic.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate a scenario and write its CSV/JSON outputs.
    Simulate {
        scenario: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Classify a matrix game on the tangent space of the simplex.
    ClassifyGame {
        /// RPS win payoff (with --l).
        #[arg(long, requires = "l", conflicts_with = "matrix")]
        w: Option<f64>,
        #[arg(long, requires = "w")]
        l: Option<f64>,
        /// Payoff matrix as JSON rows, e.g. '[[0,1],[-1,0]]'.
        #[arg(long)]
        matrix: Option<String>,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
    },
    /// Frequency sweep of a state-space system, or lead-lag classification.
    FreqCheck {
        /// JSON file with a, b, c, d.
        #[arg(long, conflicts_with_all = ["alpha", "beta"])]
        system: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "ni")]
        kind: KindArg,
        #[arg(long, requires = "beta")]
        alpha: Option<f64>,
        #[arg(long, requires = "alpha")]
        beta: Option<f64>,
        #[command(flatten)]
        grid: GridArgs,
    },
    /// Check the NI-lemma LMI for a state-space system and candidate P.
    LmiCheck {
        /// JSON file with a, b, c, d, p and optionally l, w.
        system: PathBuf,
    },
    /// Linearize replicator dynamics at an interior rest point.
    Linearize {
        /// Comma-separated rest point, e.g. 0.25,0.25,0.25,0.25.
        #[arg(long, value_delimiter = ',', required = true)]
        x_star: Vec<f64>,
    },
    /// Closed-loop Hurwitz test and DC gain condition for two systems.
    Stability {
        #[arg(long)]
        plant: PathBuf,
        #[arg(long)]
        controller: PathBuf,
    },
    /// Run every *.json scenario in a directory concurrently.
    Batch {
        dir: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        #[arg(long)]
        jobs: Option<usize>,
    },
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum KindArg {
    Ni,
    Sni,
    Passive,
}

impl From<KindArg> for SweepKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::Ni => SweepKind::Ni,
            KindArg::Sni => SweepKind::Sni,
            KindArg::Passive => SweepKind::Passive,
        }
    }
}

#[derive(Args)]
struct GridArgs {
    #[arg(long, default_value_t = 1e-3)]
    start: f64,
    #[arg(long, default_value_t = 1e3)]
    stop: f64,
    #[arg(long, default_value_t = 2000)]
    points: usize,
}

const EXIT_VALIDATION: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;
const EXIT_CERTIFICATION: u8 = 4;

struct Failure {
    code: u8,
    message: String,
}

impl From<ScenarioError> for Failure {
    fn from(e: ScenarioError) -> Self {
        Failure { code: e.exit_code() as u8, message: e.to_string() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Parameter(_) | Error::Dimension(_) | Error::Grid { .. } => EXIT_VALIDATION,
            Error::Blowup { .. } | Error::Numerical { .. } | Error::Domain { .. } | Error::Protocol { .. } => {
                EXIT_NUMERICAL
            }
            Error::Structural(_) | Error::NotSupported(_) | Error::IllPosed(_) | Error::NotApplicable(_) => {
                EXIT_CERTIFICATION
            }
        };
        Failure { code, message: e.to_string() }
    }
}

fn validation(msg: impl Into<String>) -> Failure {
    Failure { code: EXIT_VALIDATION, message: msg.into() }
}

type CmdResult = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate { scenario, out } => simulate(&scenario, &out),
        Command::ClassifyGame { w, l, matrix, tol } => classify_game(w, l, matrix.as_deref(), tol),
        Command::FreqCheck { system, kind, alpha, beta, grid } => {
            freq_check(system.as_deref(), kind, alpha, beta, &grid)
        }
        Command::LmiCheck { system } => lmi_check(&system),
        Command::Linearize { x_star } => linearize(&x_star),
        Command::Stability { plant, controller } => stability(&plant, &controller),
        Command::Batch { dir, out, jobs } => batch(&dir, &out, jobs),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn print(value: serde_json::Value) {
    use std::io::Write;
    let _ = writeln!(std::io::stdout().lock(), "{}", serde_json::to_string_pretty(&value).unwrap());
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| validation(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| validation(format!("{}: {e}", path.display())))
}

fn simulate(scenario: &Path, out: &Path) -> CmdResult {
    let cfg = parse_scenario(scenario)?;
    let summary = run_scenario(&cfg, out)?;
    print(serde_json::to_value(&summary).unwrap());
    if summary.has_hard_failure() {
        return Err(Failure { code: EXIT_CERTIFICATION, message: "a requested certificate is not applicable".into() });
    }
    Ok(())
}

fn classify_game(w: Option<f64>, l: Option<f64>, matrix: Option<&str>, tol: f64) -> CmdResult {
    let game = match (w, l, matrix) {
        (Some(w), Some(l), None) => make_rps_game(w, l)?,
        (None, None, Some(m)) => {
            let rows: Vec<Vec<f64>> = serde_json::from_str(m).map_err(|e| validation(format!("--matrix: {e}")))?;
            MatrixGame::new(matrix_from_rows(&rows)?)?
        }
        _ => return Err(validation("pass either --w and --l, or --matrix")),
    };
    let ev = tangent_symmetric_eigenvalues(&game);
    print(json!({
        "class": classify_matrix_game(&game, tol),
        "tangent_eigenvalues": ev.iter().collect::<Vec<_>>(),
    }));
    Ok(())
}

fn freq_check(
    system: Option<&Path>,
    kind: KindArg,
    alpha: Option<f64>,
    beta: Option<f64>,
    grid: &GridArgs,
) -> CmdResult {
    match (system, alpha, beta) {
        (Some(path), None, None) => {
            let spec: StateSpaceSpec = read_json(path)?;
            let sys = spec.build()?;
            let grid = log_grid(grid.start, grid.stop, grid.points)?;
            let report = frequency_sweep_lti(&sys, &grid, kind.into())?;
            print(json!({
                "kind": report.kind,
                "pass": report.pass,
                "grid_certified": true,
                "worst_omega": report.worst.omega,
                "worst_value": report.worst_value(),
                "grid_points": report.grid_points,
            }));
            if !report.pass {
                return Err(Failure { code: EXIT_CERTIFICATION, message: "frequency condition violated".into() });
            }
            Ok(())
        }
        (None, Some(alpha), Some(beta)) => {
            let v = classify_lead_lag(alpha, beta)?;
            print(json!({
                "class": v.class,
                "lossless_real_part": v.lossless_real_part,
                "sweep_agrees": v.sweep_agrees,
                "min_re": v.min_re,
                "max_im": v.max_im,
                "max_closed_form_gap": v.max_closed_form_gap,
            }));
            Ok(())
        }
        _ => Err(validation("pass either --system or --alpha and --beta")),
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct LmiInput {
    #[serde(flatten)]
    system: StateSpaceSpec,
    p: Vec<Vec<f64>>,
    #[serde(default)]
    l: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    w: Option<Vec<Vec<f64>>>,
}

fn lmi_check(path: &Path) -> CmdResult {
    let input: LmiInput = read_json(path)?;
    let sys = input.system.build()?;
    let mut cert = NiCertificate::new(matrix_from_rows(&input.p)?);
    match (&input.l, &input.w) {
        (Some(l), Some(w)) => cert = cert.with_factors(matrix_from_rows(l)?, matrix_from_rows(w)?),
        (None, None) => {}
        _ => return Err(validation("supply both l and w, or neither")),
    }
    let r = verify_ni_lemma(&sys, &cert)?;
    print(json!({
        "pass": r.pass,
        "lmi_max_eig": r.lmi_max_eig,
        "p_min_eig": r.p_min_eig,
        "factor_gap": r.factor_gap,
    }));
    if !r.pass {
        return Err(Failure { code: EXIT_CERTIFICATION, message: "LMI certificate rejected".into() });
    }
    Ok(())
}

fn rows_of(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

fn linearize(x_star: &[f64]) -> CmdResult {
    let x = SimplexState::from_slice(x_star)?;
    let lin = linearize_rd(&x)?;
    print(json!({
        "a_lin": rows_of(&lin.a_lin),
        "b_lin": rows_of(&lin.b_lin),
        "basis": rows_of(lin.basis.matrix()),
        "a_r": rows_of(&lin.a_r),
        "b_r": rows_of(&lin.b_r),
    }));
    Ok(())
}

fn stability(plant: &Path, controller: &Path) -> CmdResult {
    let plant = read_json::<StateSpaceSpec>(plant)?.build()?;
    let controller = read_json::<StateSpaceSpec>(controller)?.build()?;
    let cl = closed_loop_matrix(&plant, &controller)?;
    let dc = match dc_gain_condition(&plant, &controller) {
        Ok(r) => json!({ "lambda_max": r.lambda_max, "pass": r.pass }),
        Err(e) => json!({ "not_applicable": e.to_string() }),
    };
    print(json!({
        "hurwitz": cl.hurwitz,
        "spectral_abscissa": cl.spectral_abscissa,
        "eigenvalues": cl.eigenvalues.iter().map(|z| [z.re, z.im]).collect::<Vec<_>>(),
        "dc_gain": dc,
    }));
    Ok(())
}

fn batch(dir: &Path, out: &Path, jobs: Option<usize>) -> CmdResult {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| validation(format!("cannot read {}: {e}", dir.display())))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(validation(format!("no *.json scenarios in {}", dir.display())));
    }
    let jobs =
        jobs.or_else(|| std::thread::available_parallelism().ok().map(|n| n.get())).unwrap_or(1).clamp(1, files.len());

    let run_one = |path: &PathBuf| -> (String, Result<serde_json::Value, Failure>) {
        let stem = path.file_stem().unwrap().to_string_lossy().into_owned();
        let result = parse_scenario(path).and_then(|cfg| run_scenario(&cfg, &out.join(&stem))).map_err(Failure::from);
        let result = result.and_then(|s| {
            if s.has_hard_failure() {
                Err(Failure { code: EXIT_CERTIFICATION, message: "a requested certificate is not applicable".into() })
            } else {
                Ok(serde_json::to_value(&s).unwrap())
            }
        });
        (stem, result)
    };
    let chunk = files.len().div_ceil(jobs);
    let results: Vec<_> = std::thread::scope(|s| {
        let handles: Vec<_> =
            files.chunks(chunk).map(|c| s.spawn(move || c.iter().map(run_one).collect::<Vec<_>>())).collect();
        handles.into_iter().flat_map(|h| h.join().expect("worker panicked")).collect()
    });

    let mut worst = 0u8;
    let mut report = serde_json::Map::new();
    for (stem, r) in results {
        match r {
            Ok(v) => {
                report.insert(stem, v);
            }
            Err(f) => {
                worst = worst.max(f.code);
                report.insert(stem, json!({ "error": f.message, "exit_code": f.code }));
            }
        }
    }
    print(serde_json::Value::Object(report));
    if worst > 0 {
        return Err(Failure { code: worst, message: "one or more scenarios failed".into() });
    }
    Ok(())
}
