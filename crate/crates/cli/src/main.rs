use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use delaylqr::config::{Horizon, RunConfig};
use delaylqr::infograph::NodeId;
use delaylqr::plant::{build_aggregate, AggregateSystem};
use delaylqr::sim::{random_direction, study_csv, trajectory_csv, ControlLaw, EpisodeConfig, Simulator};
use delaylqr::synthesis::{
    finite_horizon_dp, matrices_csv, probabilities_csv, render_report, synthesize, FiniteHorizonResult, SynthesisResult,
};
use delaylqr::verify::{run_all, Fault, VerifyOptions};
use delaylqr::Error;

#[derive(Parser)]
#[command(name = "delaylqr", version, about = "Optimal two-player LQR with random communication delay")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve for every node's gains and write a report plus matrix CSVs.
    Synth(Common),
    /// Estimate the closed-loop cost by Monte Carlo and compare with the prediction.
    Simulate(Common),
    /// Run the invariant suites; exit 4 on any violation.
    Verify(Common),
    /// Perturb each node's gain and record the cost curve.
    Study(Common),
}

#[derive(Args)]
struct Common {
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
    /// Master seed; overrides `simulation.seed`.
    #[arg(long, value_name = "N")]
    seed: Option<u64>,
    /// Overrides `simulation.episodes`.
    #[arg(long, value_name = "N")]
    episodes: Option<usize>,
    /// Output directory; overrides `output.dir`.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Inject a known fault (test hook): skip-absorption or keep-fresh-private.
    #[arg(long, value_name = "NAME")]
    fault: Option<String>,
}

/// Exit-code-carrying failure.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Numerical(_) => 3,
            _ => 2,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn io_failure(path: &Path, e: std::io::Error) -> Failure {
    Failure {
        code: 1,
        message: format!("{}: {e}", path.display()),
    }
}

struct Context {
    config: RunConfig,
    agg: AggregateSystem,
    out: PathBuf,
    fault: Option<Fault>,
}

impl Context {
    fn load(args: &Common) -> Result<Self, Failure> {
        let text = fs::read_to_string(&args.config).map_err(|e| Failure {
            code: 2,
            message: format!("config: cannot read {}: {e}", args.config.display()),
        })?;
        let mut config = RunConfig::from_toml(&text)?;
        if let Some(seed) = args.seed {
            config.simulation.seed = seed;
        }
        if let Some(n) = args.episodes {
            if n < 2 {
                return Err(Error::Validation {
                    field: "episodes".into(),
                    message: "need at least 2 episodes".into(),
                }
                .into());
            }
            config.simulation.episodes = n;
            config.study.episodes = n;
        }
        let fault = args.fault.as_deref().map(str::parse::<Fault>).transpose()?;
        let agg = build_aggregate(&config.plant)?;
        let out = args.out.clone().unwrap_or_else(|| PathBuf::from(&config.output));
        Ok(Context { config, agg, out, fault })
    }

    fn write(&self, name: &str, contents: &str) -> Result<(), Failure> {
        fs::create_dir_all(&self.out).map_err(|e| io_failure(&self.out, e))?;
        let path = self.out.join(name);
        fs::write(&path, contents).map_err(|e| io_failure(&path, e))
    }

    fn finite(&self, res: &SynthesisResult) -> Result<Option<FiniteHorizonResult>, Failure> {
        match self.config.horizon {
            Horizon::Infinite => Ok(None),
            Horizon::Finite(t) => Ok(Some(finite_horizon_dp(&self.agg, &res.graph, &res.probabilities, t)?)),
        }
    }
}

fn finite_gains_csv(fh: &FiniteHorizonResult, res: &SynthesisResult) -> String {
    let mut s = String::from("t,node,row,col,value\n");
    for (t, table) in fh.gains.iter().enumerate() {
        for node in res.graph.nodes() {
            let k = table.get(node);
            for i in 0..k.nrows() {
                for j in 0..k.ncols() {
                    s.push_str(&format!("{t},{},{i},{j},{:e}\n", node.key(), k[(i, j)]));
                }
            }
        }
    }
    s
}

fn cmd_synth(ctx: &Context) -> Result<(), Failure> {
    let res = synthesize(&ctx.agg, &ctx.config.delay)?;
    let mut report = render_report(&res, &ctx.agg);
    if let Some(fh) = ctx.finite(&res)? {
        report.push_str(&format!("finite horizon T = {}: V_0 = {:.12}\n", fh.horizon, fh.value));
        ctx.write("finite_gains.csv", &finite_gains_csv(&fh, &res))?;
    }
    print!("{report}");
    ctx.write("report.txt", &report)?;
    ctx.write("matrices.csv", &matrices_csv(&res))?;
    ctx.write("probabilities.csv", &probabilities_csv(&res))?;
    ctx.write("graph.dot", &res.graph.to_dot())?;
    Ok(())
}

fn cmd_simulate(ctx: &Context) -> Result<(), Failure> {
    let res = synthesize(&ctx.agg, &ctx.config.delay)?;
    let sim = Simulator::new(&ctx.agg, &ctx.config.delay)?;
    let s = &ctx.config.simulation;
    let (policy, cfg, predicted) = match ctx.finite(&res)? {
        None => (res.policy(), EpisodeConfig::new(s.steps, s.burn_in, s.seed, delaylqr::sim::CostMode::Average)?, res.predicted_cost),
        Some(fh) => (fh.policy(), EpisodeConfig::total(fh.horizon, s.seed)?, fh.value),
    };
    let est = sim.monte_carlo_cost(ControlLaw::Distributed(&policy), &cfg, s.episodes)?;
    let first = sim.run_episode(ControlLaw::Distributed(&policy), &cfg, 0, true)?;
    ctx.write("trajectory.csv", &trajectory_csv(first.trajectory.as_deref().unwrap_or_default()))?;
    let z = est.z_score(predicted);
    let row = format!(
        "predicted,simulated_mean,simulated_se,episodes,z_score\n{predicted:e},{:e},{:e},{},{z:.4}\n",
        est.mean, est.std_error, est.episodes
    );
    ctx.write("cost.csv", &row)?;
    println!(
        "predicted {predicted:.6}  simulated {:.6} ± {:.6} ({} episodes)  z = {z:.3}",
        est.mean, est.std_error, est.episodes
    );
    Ok(())
}

fn cmd_verify(ctx: &Context) -> Result<(), Failure> {
    let res = synthesize(&ctx.agg, &ctx.config.delay)?;
    let opts = VerifyOptions {
        seed: ctx.config.simulation.seed,
        fault: ctx.fault,
        ..VerifyOptions::default()
    };
    let report = run_all(&ctx.agg, &ctx.config.delay, &res.gain_table(), &opts)?;
    let text = report.render();
    print!("{text}");
    ctx.write("verify.txt", &text)?;
    if report.passed() {
        Ok(())
    } else {
        Err(Failure {
            code: 4,
            message: "invariant violation".into(),
        })
    }
}

fn cmd_study(ctx: &Context) -> Result<(), Failure> {
    let res = synthesize(&ctx.agg, &ctx.config.delay)?;
    let sim = Simulator::new(&ctx.agg, &ctx.config.delay)?;
    let st = &ctx.config.study;
    let cfg = EpisodeConfig::average(st.steps, ctx.config.simulation.seed)?;
    let gains = res.gain_table();
    let nodes: Vec<NodeId> = if st.nodes.is_empty() {
        res.graph.nodes().collect()
    } else {
        st.nodes.clone()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.config.simulation.seed);
    let mut summary = String::from("node,direction,epsilon,cost_mean,cost_se,diff_mean,diff_se\n");
    for node in nodes {
        let k = gains.get(node);
        for dir in 0..st.directions {
            let delta = random_direction(k.nrows(), k.ncols(), &mut rng);
            let points = sim.gain_perturbation_study(&gains, node, &delta, &st.epsilons, &cfg, st.episodes)?;
            let name = format!("study_{}_{dir}.csv", node.key().replace(':', "_"));
            ctx.write(&name, &study_csv(&points))?;
            for p in &points {
                summary.push_str(&format!(
                    "{},{dir},{:e},{:e},{:e},{:e},{:e}\n",
                    node.key(),
                    p.epsilon,
                    p.cost.mean,
                    p.cost.std_error,
                    p.difference.mean,
                    p.difference.std_error
                ));
                println!(
                    "node {node} dir {dir} eps {:+.3e}: cost {:.6} ± {:.6}, change {:+.3e} ± {:.3e}",
                    p.epsilon, p.cost.mean, p.cost.std_error, p.difference.mean, p.difference.std_error
                );
            }
        }
    }
    ctx.write("study_summary.csv", &summary)?;
    Ok(())
}

type Handler = fn(&Context) -> Result<(), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (args, run): (&Common, Handler) = match &cli.command {
        Command::Synth(a) => (a, cmd_synth),
        Command::Simulate(a) => (a, cmd_simulate),
        Command::Verify(a) => (a, cmd_verify),
        Command::Study(a) => (a, cmd_study),
    };
    match Context::load(args).and_then(|ctx| run(&ctx)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
