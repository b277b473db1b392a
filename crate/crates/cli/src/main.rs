use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use pomem_cli::commands::{self, TrainRequest};
use pomem_cli::{CliConfig, CliError};
use pomem_core::ObservabilityLevel;
use pomem_harness::AgentKind;

#[derive(Parser)]
#[command(name = "pomem", version, about = "Partially observable environments, memory agents and the improvability protocol")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Print an environment's observation sizes, action count, reward range, discount and step limit.
    EnvInfo { env: String },
    /// Train one agent on n_seeds consecutive seeds and write a record file per seed.
    Train(TrainArgs),
    /// Sweep, select and rerun the floor, ceiling and memory arms of a spec file.
    Protocol {
        spec: PathBuf,
        #[arg(long, default_value = "protocol_out")]
        out: PathBuf,
        /// Concurrent training runs [default: logical cores]
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Time batched stepping under uniformly random legal actions; prints CSV.
    Bench {
        env: String,
        /// Comma-separated batch sizes.
        #[arg(long, value_delimiter = ',', default_value = "1,16,256")]
        envs: Vec<usize>,
        /// Transitions per batch size.
        #[arg(long, default_value_t = 1_000_000)]
        steps: u64,
        #[arg(long, default_value = "partial")]
        level: ObservabilityLevel,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Threads stepping the batch [default: logical cores]
        #[arg(long)]
        workers: Option<usize>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Agent {
    Memoryless,
    Rnn,
    Ld,
}

impl From<Agent> for AgentKind {
    fn from(a: Agent) -> Self {
        match a {
            Agent::Memoryless => AgentKind::Memoryless,
            Agent::Rnn => AgentKind::Rnn,
            Agent::Ld => AgentKind::Ld,
        }
    }
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long)]
    env: String,
    #[arg(long, value_enum, default_value = "rnn")]
    agent: Agent,
    #[arg(long, default_value = "partial")]
    level: ObservabilityLevel,
    /// key = value file; flags below override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value = "runs")]
    out: PathBuf,
    /// Seeds trained concurrently [default: logical cores]
    #[arg(long)]
    workers: Option<usize>,
    #[command(flatten)]
    overrides: Overrides,
}

#[derive(Args)]
struct Overrides {
    #[arg(long)]
    num_envs: Option<String>,
    #[arg(long)]
    num_steps: Option<String>,
    #[arg(long)]
    num_minibatches: Option<String>,
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    double_critic: Option<String>,
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    action_concat: Option<String>,
    #[arg(long)]
    lr: Option<String>,
    #[arg(long)]
    lambda0: Option<String>,
    #[arg(long)]
    lambda1: Option<String>,
    #[arg(long)]
    alpha: Option<String>,
    #[arg(long)]
    ld_weight: Option<String>,
    #[arg(long)]
    vf_coeff: Option<String>,
    #[arg(long)]
    hidden_size: Option<String>,
    #[arg(long)]
    total_steps: Option<String>,
    #[arg(long)]
    entropy_coeff: Option<String>,
    #[arg(long)]
    clip_eps: Option<String>,
    #[arg(long)]
    max_grad_norm: Option<String>,
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    anneal_lr: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    #[arg(long)]
    n_seeds: Option<String>,
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    save_checkpoints: Option<String>,
}

impl Overrides {
    fn pairs(&self) -> [(&'static str, &Option<String>); 20] {
        [
            ("num_envs", &self.num_envs),
            ("num_steps", &self.num_steps),
            ("num_minibatches", &self.num_minibatches),
            ("double_critic", &self.double_critic),
            ("action_concat", &self.action_concat),
            ("lr", &self.lr),
            ("lambda0", &self.lambda0),
            ("lambda1", &self.lambda1),
            ("alpha", &self.alpha),
            ("ld_weight", &self.ld_weight),
            ("vf_coeff", &self.vf_coeff),
            ("hidden_size", &self.hidden_size),
            ("total_steps", &self.total_steps),
            ("entropy_coeff", &self.entropy_coeff),
            ("clip_eps", &self.clip_eps),
            ("max_grad_norm", &self.max_grad_norm),
            ("anneal_lr", &self.anneal_lr),
            ("seed", &self.seed),
            ("n_seeds", &self.n_seeds),
            ("save_checkpoints", &self.save_checkpoints),
        ]
    }

    fn apply(&self, cfg: &mut CliConfig) -> Result<(), CliError> {
        for (key, v) in self.pairs() {
            if let Some(v) = v {
                cfg.set(key, v)
                    .map_err(|m| CliError::Usage(format!("--{}: {m}", key.replace('_', "-"))))?;
            }
        }
        Ok(())
    }
}

fn run(cli: Cli) -> Result<String, CliError> {
    match cli.cmd {
        Cmd::EnvInfo { env } => commands::env_info(&env),
        Cmd::Train(a) => {
            let mut config = match &a.config {
                Some(p) => CliConfig::parse(&commands::read_text(p)?)?,
                None => CliConfig::default(),
            };
            a.overrides.apply(&mut config)?;
            let req = TrainRequest {
                env: a.env,
                agent: a.agent.into(),
                level: a.level,
                config,
                out_dir: a.out,
                workers: a.workers.unwrap_or_else(commands::default_workers),
            };
            let summary = commands::run_train(&req)?;
            Ok(summary.line(&req) + "\n")
        }
        Cmd::Protocol { spec, out, workers } => {
            commands::run_protocol_file(&spec, &out, workers.unwrap_or_else(commands::default_workers))
        }
        Cmd::Bench {
            env,
            envs,
            steps,
            level,
            seed,
            workers,
        } => commands::bench(&env, level, &envs, steps, workers.unwrap_or_else(commands::default_workers), seed),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
