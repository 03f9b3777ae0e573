use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use netslice_core::harness::{compare, run_many, Scenario, Simulation, Summary, Table};
use netslice_core::jammer::{grid_candidates, location_objectives};
use netslice_core::radio::Geometry;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const OUT_ENV: &str = "NETSLICE_OUT";

#[derive(Parser)]
#[command(name = "netslice", version, about = "Multi-cell network slicing under jamming")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct ScenarioArgs {
    /// Named starting point: desk, attack or smoke.
    #[arg(long, default_value = "desk")]
    preset: String,
    /// TOML scenario file; replaces the preset.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Dotted-path override, e.g. `--set victim.learner.actor_lr=3e-4`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

impl ScenarioArgs {
    fn load(&self) -> Result<Scenario> {
        let base = match &self.config {
            Some(path) => Scenario::load(path).with_context(|| format!("reading {}", path.display()))?,
            None => Scenario::preset(&self.preset).with_context(|| format!("unknown preset '{}'", self.preset))?,
        };
        Ok(base.with_overrides(&self.overrides)?)
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum TableArg {
    Jammers,
    Ensembles,
}

#[derive(Subcommand)]
enum Command {
    /// Train and test one seeded run.
    Train {
        #[command(flatten)]
        scenario: ScenarioArgs,
    },
    /// Test a checkpoint with learning turned off.
    Eval {
        #[command(flatten)]
        scenario: ScenarioArgs,
        #[arg(long)]
        checkpoint: PathBuf,
    },
    /// Run the same scenario over several seeds in parallel.
    Sweep {
        #[command(flatten)]
        scenario: ScenarioArgs,
        #[arg(long, value_delimiter = ',', default_value = "1,2,3")]
        seeds: Vec<u64>,
        #[arg(long, default_value_t = 1)]
        threads: usize,
    },
    /// Tabulate finished runs by jammer or ensemble kind.
    Compare {
        #[arg(long, value_enum)]
        table: TableArg,
        /// Run directories holding `scenario.toml` and `summary.json`.
        runs: Vec<PathBuf>,
    },
    /// Score candidate jammer positions and print the best one.
    OptimizeJammerLocation {
        #[command(flatten)]
        scenario: ScenarioArgs,
    },
}

fn out_root() -> PathBuf {
    std::env::var_os(OUT_ENV).map(PathBuf::from).unwrap_or_else(|| PathBuf::from("out"))
}

fn run_dir(s: &Scenario) -> PathBuf {
    out_root().join(format!("{}-s{}", s.name, s.seed))
}

fn report(dir: &Path, summary: &Summary) -> bool {
    println!(
        "{} seed {}: test reward {:.3}, completion {:.2}% -> {}",
        summary.scenario,
        summary.seed,
        summary.test.avg_reward,
        100.0 * summary.test.completion_ratio,
        dir.display()
    );
    for v in &summary.invariant_violations {
        eprintln!("invariant violation: {v}");
    }
    summary.invariant_violations.is_empty()
}

fn run_one(s: Scenario) -> Result<bool> {
    let dir = run_dir(&s);
    let mut sim = Simulation::new(s)?;
    sim.run()?;
    let summary = sim.write_outputs(&dir)?;
    Ok(report(&dir, &summary))
}

fn read_run(dir: &Path) -> Result<(Scenario, Summary)> {
    let scenario = Scenario::load(&dir.join("scenario.toml")).with_context(|| format!("reading {}", dir.display()))?;
    let text = std::fs::read_to_string(dir.join("summary.json"))?;
    Ok((scenario, serde_json::from_str(&text)?))
}

fn execute(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Train { scenario } => run_one(scenario.load()?),
        Command::Eval { scenario, checkpoint } => {
            let mut s = scenario.load()?;
            s.name = format!("{}-eval", s.name);
            s.train_slots = 0;
            s.victim.learn_in_test = false;
            s.victim.checkpoint = Some(checkpoint.to_string_lossy().into_owned());
            run_one(s)
        }
        Command::Sweep { scenario, seeds, threads } => {
            let base = scenario.load()?;
            let jobs: Vec<Scenario> = seeds.iter().map(|&seed| Scenario { seed, ..base.clone() }).collect();
            let mut clean = true;
            for result in run_many(jobs, threads) {
                let sim = result?;
                let dir = run_dir(&sim.scenario);
                let summary = sim.write_outputs(&dir)?;
                clean &= report(&dir, &summary);
            }
            Ok(clean)
        }
        Command::Compare { table, runs } => {
            if runs.is_empty() {
                bail!("compare needs at least one run directory");
            }
            let runs = runs.iter().map(|d| read_run(d)).collect::<Result<Vec<_>>>()?;
            let table = match table {
                TableArg::Jammers => Table::Jammers,
                TableArg::Ensembles => Table::Ensembles,
            };
            let cmp = compare(table, &runs)?;
            print!("{}", cmp.to_markdown());
            let root = out_root();
            std::fs::create_dir_all(&root)?;
            std::fs::write(root.join("comparison.json"), serde_json::to_string_pretty(&cmp)?)?;
            Ok(runs.iter().all(|(_, s)| s.invariant_violations.is_empty()))
        }
        Command::OptimizeJammerLocation { scenario } => {
            let s = scenario.load()?;
            s.validate()?;
            let geometry = Geometry {
                bs_positions: s.station_positions(),
                user_positions: Vec::new(),
                jammer_position: None,
                coverage_radius_km: s.radio.cell_radius_km,
            };
            let grid = grid_candidates(&geometry, &s.jammer.search);
            let mut rng = ChaCha8Rng::seed_from_u64(s.jammer_seed);
            rng.set_stream(9);
            let obj = location_objectives(&geometry, &s.radio, &grid, s.jammer.search.samples, &mut rng)?;
            let best = (0..obj.len()).fold(0, |b, i| if obj[i] < obj[b] { i } else { b });
            let points: Vec<_> =
                grid.iter().zip(&obj).map(|(p, o)| serde_json::json!({"x": p.x, "y": p.y, "objective": o})).collect();
            let out = serde_json::json!({
                "best": {"x": grid[best].x, "y": grid[best].y, "objective": obj[best]},
                "candidates": points,
            });
            let root = out_root();
            std::fs::create_dir_all(&root)?;
            std::fs::write(root.join("jammer_location.json"), serde_json::to_string_pretty(&out)?)?;
            println!("best jammer position ({:.3}, {:.3}) km, objective {:.6}", grid[best].x, grid[best].y, obj[best]);
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
