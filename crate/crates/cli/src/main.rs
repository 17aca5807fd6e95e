mod svg;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use jamloc_core::crlb::{EnergyModel, SnrGate};
use jamloc_core::io::{format_sweep, load_scenario, save_results, ResultRecord};
use jamloc_core::oracle::{grid_search, oracle_slack, refine, BoundingBox};
use jamloc_core::solver::{divergence_powers, linspace};
use jamloc_core::{bundled, field_map, goldens, solve, sweep, GridSpec, IoError, PlacementResult, Point2, Scenario, SolverError};

#[derive(Parser)]
#[command(name = "jamloc", version, about = "Max-min CRLB jammer placement")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ScenarioArgs {
    /// Scenario TOML file, or `bundled:<name>` (scenario_a, scenario_b, scenario_c, scenario_a_gated)
    #[arg(long)]
    scenario: String,
    /// Normalized jammer power; defaults to the file's value
    #[arg(long)]
    pj_norm: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Solve for the optimal jammer location
    Solve {
        #[command(flatten)]
        sc: ScenarioArgs,
        /// Write a results CSV
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solve over a range of powers and report regime breakpoints
    Sweep {
        #[arg(long)]
        scenario: String,
        #[arg(long)]
        pj_min: f64,
        #[arg(long)]
        pj_max: f64,
        #[arg(long)]
        steps: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Brute-force grid search with local refinement
    Oracle {
        #[command(flatten)]
        sc: ScenarioArgs,
        #[arg(long, default_value_t = GridSpec::DEFAULT_RESOLUTION)]
        resolution: f64,
    },
    /// Solver against the grid oracle; exit 4 when the values disagree beyond the slack
    Compare {
        #[command(flatten)]
        sc: ScenarioArgs,
        #[arg(long, default_value_t = GridSpec::DEFAULT_RESOLUTION)]
        resolution: f64,
    },
    /// Solve with the SNR gate, side by side with the ungated model
    Gated {
        #[command(flatten)]
        sc: ScenarioArgs,
        /// Critical SNR; replaces the file's gate
        #[arg(long, requires = "e0")]
        snr0: Option<f64>,
        /// Energy scale for E = e0 / d^2; replaces the file's gate
        #[arg(long, requires = "snr0")]
        e0: Option<f64>,
        /// Also locate per-target divergence powers over [MIN, MAX]
        #[arg(long, num_args = 2, value_names = ["MIN", "MAX"])]
        divergence: Option<Vec<f64>>,
    },
    /// SVG map of the minimum CRLB over the plane
    Heatmap {
        #[command(flatten)]
        sc: ScenarioArgs,
        /// Jammer power in watts; overrides --pj-norm
        #[arg(long, conflicts_with = "pj_norm")]
        pj_watts: Option<f64>,
        /// Noise spectral density (jammer power in watts is kept)
        #[arg(long)]
        n0: Option<f64>,
        #[arg(long, default_value_t = GridSpec::COARSE_RESOLUTION)]
        resolution: f64,
        /// Plot box as xmin,ymin,xmax,ymax
        #[arg(long, value_delimiter = ',')]
        bounds: Option<Vec<f64>>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the reference checks on the bundled scenarios
    Goldens,
}

enum Failure {
    Usage(String),
    Input(IoError),
    Solver(SolverError),
    Mismatch(String),
    Goldens,
}

impl From<IoError> for Failure {
    fn from(e: IoError) -> Self {
        Failure::Input(e)
    }
}

impl From<SolverError> for Failure {
    fn from(e: SolverError) -> Self {
        Failure::Solver(e)
    }
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Goldens => 1,
            Failure::Usage(_) | Failure::Input(_) => 2,
            Failure::Solver(_) => 3,
            Failure::Mismatch(_) => 4,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            match &f {
                Failure::Usage(m) => eprintln!("error: {m}"),
                Failure::Input(e) => eprintln!("error: {e}"),
                Failure::Solver(e) => eprintln!("solver error: {e}"),
                Failure::Mismatch(m) => eprintln!("mismatch: {m}"),
                Failure::Goldens => eprintln!("one or more reference checks failed"),
            }
            ExitCode::from(f.code())
        }
    }
}

fn load(spec: &str) -> Result<Scenario, Failure> {
    match spec.strip_prefix("bundled:") {
        Some(name) => bundled::by_name(name).ok_or_else(|| Failure::Usage(format!("no bundled scenario `{name}`"))),
        None => Ok(load_scenario(spec)?),
    }
}

fn positive(name: &str, v: f64) -> Result<f64, Failure> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(Failure::Usage(format!("{name} must be positive, got {v}")))
    }
}

fn load_at_power(sc: &ScenarioArgs) -> Result<Scenario, Failure> {
    let pj = sc.pj_norm.map(|p| positive("--pj-norm", p)).transpose()?;
    let s = load(&sc.scenario)?;
    Ok(match pj {
        Some(p) => s.with_normalized_power(p),
        None => s,
    })
}

fn ids(r: &PlacementResult) -> String {
    let v: Vec<String> = r.active_targets.iter().map(|t| t.to_string()).collect();
    format!("{{{}}}", v.join(", "))
}

fn print_result(label: &str, r: &PlacementResult) {
    println!("{label}");
    println!("  z_opt    {}", r.z_opt);
    println!("  value    {:.4} m^2", r.value);
    println!("  branch   {}", r.branch);
    println!("  active   {}", ids(r));
    println!("  feasible {}", r.feasible);
}

fn run(cmd: Command) -> Result<(), Failure> {
    match cmd {
        Command::Solve { sc, out } => {
            let s = load_at_power(&sc)?;
            let t = Instant::now();
            let r = solve(&s)?;
            let ms = t.elapsed().as_secs_f64() * 1e3;
            println!("normalized power {:.4}", s.normalized_power());
            print_result("solution", &r);
            if let Some(path) = out {
                save_results(&[ResultRecord::new(&s, r, ms)], &path)?;
            }
            Ok(())
        }
        Command::Sweep { scenario, pj_min, pj_max, steps, out } => {
            positive("--pj-min", pj_min)?;
            if !(pj_max > pj_min && pj_max.is_finite()) {
                return Err(Failure::Usage(format!("--pj-max must exceed --pj-min ({pj_max} <= {pj_min})")));
            }
            if steps < 2 {
                return Err(Failure::Usage("--steps must be at least 2".into()));
            }
            let s = load(&scenario)?;
            let sw = sweep(&s, &linspace(pj_min, pj_max, steps))?;
            write(&out, &format_sweep(&s, &sw))?;
            for b in &sw.breakpoints {
                println!("breakpoint {b:.2}");
            }
            Ok(())
        }
        Command::Oracle { sc, resolution } => {
            let s = load_at_power(&sc)?;
            let r = oracle(&s, positive("--resolution", resolution)?)?;
            print_result("oracle", &r);
            Ok(())
        }
        Command::Compare { sc, resolution } => {
            let s = load_at_power(&sc)?;
            let h = positive("--resolution", resolution)?;
            let sol = solve(&s)?;
            let orc = oracle(&s, h)?;
            print_result("solver", &sol);
            print_result("oracle", &orc);
            let dv = sol.value - orc.value;
            let slack = oracle_slack(&s, h);
            println!("delta value    {dv:+.6} m^2 (slack {slack:.6})");
            println!("delta position {:.6} m", jamloc_core::geometry::distance(sol.z_opt, orc.z_opt));
            if dv.abs() <= slack || (sol.value.is_infinite() && sol.value == orc.value) {
                Ok(())
            } else {
                Err(Failure::Mismatch(format!("|{dv:.6}| exceeds {slack:.6}")))
            }
        }
        Command::Gated { sc, snr0, e0, divergence } => {
            let mut s = load_at_power(&sc)?;
            if let (Some(snr), Some(e0)) = (snr0, e0) {
                let gate = SnrGate { snr_threshold: positive("--snr0", snr)?, energy: EnergyModel::InverseSquare { e0: positive("--e0", e0)? } };
                s = s.with_gate(gate).map_err(|e| Failure::Input(IoError::Model(e)))?;
            }
            if !s.is_gated() {
                return Err(Failure::Usage("scenario has no gate; pass --snr0 and --e0".into()));
            }
            println!("normalized power {:.4}", s.normalized_power());
            print_result("gated", &solve(&s)?);
            print_result("ungated", &solve(&s.without_gate())?);
            if let Some(range) = divergence {
                let (lo, hi) = (range[0], range[1]);
                if !(lo > 0.0 && hi > lo) {
                    return Err(Failure::Usage("--divergence needs 0 < MIN < MAX".into()));
                }
                let found = divergence_powers(&s, lo, hi, 2.5, 0.05)?;
                for (t, p) in s.targets.iter().zip(found) {
                    match p {
                        Some(p) => println!("target {} diverges at {p:.2}", t.id),
                        None => println!("target {} finite up to {hi:.2}", t.id),
                    }
                }
            }
            Ok(())
        }
        Command::Heatmap { sc, pj_watts, n0, resolution, bounds, out } => {
            let mut s = load_at_power(&sc)?;
            if let Some(w) = pj_watts {
                s = s.with_pj_watts(positive("--pj-watts", w)?);
            }
            if let Some(n0) = n0 {
                s = s.with_noise(positive("--n0", n0)?);
            }
            let h = positive("--resolution", resolution)?;
            let spec = match bounds {
                Some(b) if b.len() != 4 => return Err(Failure::Usage("--bounds takes xmin,ymin,xmax,ymax".into())),
                Some(b) => GridSpec::new(BoundingBox::new(Point2::new(b[0], b[1]), Point2::new(b[2], b[3])), h, true)
                    .map_err(|e| Failure::Usage(e.to_string()))?,
                None => svg::default_spec(&s, h)?,
            };
            let map = field_map(&s, &spec);
            let (z, v) = map.argmax().ok_or(SolverError::NoFeasiblePoint)?;
            write(&out, &svg::render(&s, &map, z))?;
            println!("argmax {z}");
            println!("value  {v:.4} m^2");
            Ok(())
        }
        Command::Goldens => {
            let reports = goldens::run_all();
            for r in &reports {
                println!("{r}");
                for c in &r.checks {
                    println!("    [{}] {}: {}", if c.passed { "ok" } else { "FAIL" }, c.label, c.detail);
                }
            }
            if reports.iter().all(|r| r.passed()) {
                Ok(())
            } else {
                Err(Failure::Goldens)
            }
        }
    }
}

fn oracle(s: &Scenario, h: f64) -> Result<PlacementResult, Failure> {
    let spec = GridSpec::around_targets(s, h)?;
    let coarse = grid_search(s, &spec)?;
    Ok(refine(s, coarse.z_opt, h, 4, 10))
}

fn write(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|source| Failure::Input(IoError::Write { path: path.to_path_buf(), source }))
}
