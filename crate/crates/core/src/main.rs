use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use rsgame::error::{Error, Result};
use rsgame::irreducibility::analyze;
use rsgame::model::GameModel;
use rsgame::policy::{PolicyFile, StationaryPolicy};
use rsgame::report::{Payload, PhaseTiming, RunReport, Stopwatch};
use rsgame::saddle::{compute_saddle_with, ThetaAdmissibility};
use rsgame::smartgrid::{build_smartgrid, SmartGridParams};
use rsgame::value_iteration::{approximate_value_with, ValueIterationConfig, DEFAULT_MAX_OUTER};
use rsgame::verification::{simulate_cost_detailed, verify_saddle};

#[derive(Parser)]
#[command(
    name = "rsgame",
    version,
    about = "Risk-sensitive average-cost zero-sum stochastic games"
)]
struct Cli {
    /// Print a JSON run report on stdout instead of tables
    #[arg(long, global = true)]
    machine: bool,
    /// Cap on doubling rounds of the value iteration
    #[arg(long, global = true, default_value_t = DEFAULT_MAX_OUTER)]
    max_outer: u32,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a game file
    Validate { game: PathBuf },
    /// Irreducibility coefficient and the admissible risk factor
    Irreducibility { game: PathBuf },
    /// Approximate the game value
    Value {
        game: PathBuf,
        #[arg(long)]
        eps: f64,
    },
    /// Compute and certify an epsilon-saddle point
    Saddle {
        game: PathBuf,
        #[arg(long)]
        eps: f64,
        /// Write the stationary pair to this policy file
        #[arg(long)]
        policies_out: Option<PathBuf>,
    },
    /// Certify a stationary pair read from a policy file
    Verify {
        game: PathBuf,
        #[arg(long)]
        policies: PathBuf,
        #[arg(long)]
        eps: f64,
    },
    /// Monte Carlo estimate of the cost of a stationary pair
    Simulate {
        game: PathBuf,
        #[arg(long)]
        policies: PathBuf,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        horizon: u64,
        #[arg(long)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        start: usize,
    },
    /// Write a built-in example game
    #[command(subcommand)]
    Example(Example),
}

#[derive(Subcommand)]
enum Example {
    /// Prosumer with a storage unit against the grid
    Smartgrid(SmartGridArgs),
}

#[derive(Args)]
struct SmartGridArgs {
    /// Storage capacity [default: 2]
    #[arg(long)]
    ns: Option<u32>,
    /// Maximum consumption per period [default: 3]
    #[arg(long)]
    nc: Option<u32>,
    /// Maximum purchase per period [default: 2]
    #[arg(long)]
    np: Option<u32>,
    /// Maximum demand of the other prosumers [default: 2]
    #[arg(long)]
    m: Option<u32>,
    /// Risk factor [default: 0.01]
    #[arg(long)]
    theta: Option<f64>,
    /// Mean of the generation noise [default: 1.0]
    #[arg(long)]
    mean: Option<f64>,
    /// Standard deviation of the generation noise [default: 2.0]
    #[arg(long)]
    std: Option<f64>,
    #[arg(long)]
    out: PathBuf,
}

impl SmartGridArgs {
    fn params(&self) -> SmartGridParams {
        let d = SmartGridParams::default();
        SmartGridParams {
            n_s: self.ns.unwrap_or(d.n_s),
            n_c: self.nc.unwrap_or(d.n_c),
            n_p: self.np.unwrap_or(d.n_p),
            m: self.m.unwrap_or(d.m),
            gen_mean: self.mean.unwrap_or(d.gen_mean),
            gen_std: self.std.unwrap_or(d.gen_std),
            theta: self.theta.unwrap_or(d.theta),
        }
    }
}

struct Outcome {
    command: &'static str,
    inputs: serde_json::Value,
    payload: Payload,
    human: String,
    code: u8,
    timings: Vec<PhaseTiming>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let machine = cli.machine;
    match run(cli) {
        Ok(out) => {
            if machine {
                let report = RunReport::new(out.command, out.inputs, out.payload, out.timings);
                println!("{}", report.to_json_string());
            } else {
                print!("{}", out.human);
            }
            ExitCode::from(out.code)
        }
        Err((err, partial)) => {
            if let (true, Some(report)) = (machine, partial) {
                println!("{}", report.to_json_string());
            }
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}

type Failure = (Error, Option<Box<RunReport>>);
type CmdResult = std::result::Result<Outcome, Failure>;

fn plain<T>(r: Result<T>) -> std::result::Result<T, Failure> {
    r.map_err(|e| (e, None))
}

fn run(cli: Cli) -> CmdResult {
    let mut watch = Stopwatch::default();
    let max_outer = cli.max_outer;
    let mut out = match cli.command {
        Command::Validate { game } => cmd_validate(&game)?,
        Command::Irreducibility { game } => {
            let model = plain(watch.time("load", || GameModel::load(&game)))?;
            let report = watch.time("analyze", || analyze(&model));
            let human = format!(
                "gamma     {:.6}\neta       {:.6}\ni*        {}\nM_c       {:.6}\ntheta_max {}\ntheta     {}\nverdict   {}\n",
                report.gamma,
                report.eta,
                report.i_star,
                report.m_c,
                fmt_bound(report.theta_max),
                model.theta,
                if report.irreducible { "irreducible" } else { "reducible" },
            );
            Outcome {
                command: "irreducibility",
                inputs: json!({ "game": game }),
                payload: Payload::Irreducibility(report),
                human,
                code: 0,
                timings: Vec::new(),
            }
        }
        Command::Value { game, eps } => {
            let inputs = json!({ "game": game, "eps": eps, "max_outer": max_outer });
            let model = plain(watch.time("load", || GameModel::load(&game)))?;
            let cfg = ValueIterationConfig::new(eps).with_max_outer(max_outer);
            let r = match watch.time("value", || approximate_value_with(&model, &cfg)) {
                Ok(r) => r,
                Err(Error::NonConvergence(partial)) => {
                    let report = RunReport::new(
                        "value",
                        inputs,
                        Payload::Value((*partial).clone()),
                        Vec::new(),
                    );
                    return Err((Error::NonConvergence(partial), Some(Box::new(report))));
                }
                Err(e) => return Err((e, None)),
            };
            let mut human = String::from("  n        upper            lower            gap\n");
            for (k, (l, z)) in r.lambda_trace.iter().zip(&r.zeta_trace).enumerate() {
                human += &format!("{:>3}  {:>15.10}  {:>15.10}  {:.3e}\n", k + 1, l, z, l - z);
            }
            human += &format!(
                "value     {:.6}  (within {} after {} operator applications)\n",
                r.rho_tilde, eps, r.applications
            );
            Outcome {
                command: "value",
                inputs,
                payload: Payload::Value(r),
                human,
                code: 0,
                timings: Vec::new(),
            }
        }
        Command::Saddle {
            game,
            eps,
            policies_out,
        } => {
            let model = plain(watch.time("load", || GameModel::load(&game)))?;
            let cfg = ValueIterationConfig::new(eps).with_max_outer(max_outer);
            let result = plain(watch.time("saddle", || compute_saddle_with(&model, eps, &cfg)))?;
            let certificate = plain(watch.time("verify", || {
                verify_saddle(&model, &result.phi_eps, &result.psi_eps, eps)
            }))?;
            let policies = PolicyFile::from_policies(&model, &result.phi_eps, &result.psi_eps);
            if let Some(path) = &policies_out {
                plain(policies.save(path))?;
            }
            let mut human = String::new();
            if result.constant_cost {
                human += "costs are constant: every pair is a saddle point\n";
            }
            human += &format!(
                "rho_eps   {:.6}\ni*        {}\neta       {:.6}\nk_eps     {}\nN_eps     {}\ninner eps {:.3e}\n\n",
                result.rho_eps, result.i_star, result.eta, result.k_eps, result.n_eps, result.inner_eps
            );
            human += "player 1\n";
            human += &policy_table(&model, &result.phi_eps, true);
            human += "\nplayer 2\n";
            human += &policy_table(&model, &result.psi_eps, false);
            human += "\n";
            human += &certificate_text(&certificate);
            let code = if certificate.passes { 0 } else { 4 };
            Outcome {
                command: "saddle",
                inputs: json!({ "game": game, "eps": eps, "max_outer": max_outer, "policies_out": policies_out }),
                payload: Payload::Saddle {
                    result,
                    policies,
                    certificate: Some(certificate),
                },
                human,
                code,
                timings: Vec::new(),
            }
        }
        Command::Verify {
            game,
            policies,
            eps,
        } => {
            let model = plain(watch.time("load", || GameModel::load(&game)))?;
            let (phi, psi) =
                plain(PolicyFile::load(&policies).and_then(|p| p.to_policies(&model)))?;
            let cert = plain(watch.time("verify", || verify_saddle(&model, &phi, &psi, eps)))?;
            let human = certificate_text(&cert);
            let code = if cert.passes { 0 } else { 4 };
            Outcome {
                command: "verify",
                inputs: json!({ "game": game, "policies": policies, "eps": eps }),
                payload: Payload::Verification(cert),
                human,
                code,
                timings: Vec::new(),
            }
        }
        Command::Simulate {
            game,
            policies,
            seed,
            horizon,
            trials,
            start,
        } => {
            let model = plain(watch.time("load", || GameModel::load(&game)))?;
            let (phi, psi) =
                plain(PolicyFile::load(&policies).and_then(|p| p.to_policies(&model)))?;
            let est = plain(watch.time("simulate", || {
                simulate_cost_detailed(&model, &phi, &psi, start, horizon, trials, seed)
            }))?;
            let human = format!(
                "estimate  {:.6}\nstd error {:.3e}\n({} trials of {} steps from state {}, seed {})\n",
                est.estimate, est.std_error, trials, horizon, start, seed
            );
            Outcome {
                command: "simulate",
                inputs: json!({ "game": game, "policies": policies, "seed": seed, "horizon": horizon, "trials": trials, "start": start }),
                payload: Payload::Simulation(est),
                human,
                code: 0,
                timings: Vec::new(),
            }
        }
        Command::Example(Example::Smartgrid(args)) => {
            let params = args.params();
            let model = plain(build_smartgrid(&params))?;
            plain(model.save(&args.out))?;
            let report = analyze(&model);
            let adm = ThetaAdmissibility::new(model.theta, report.theta_max);
            if !adm.admissible {
                eprintln!(
                    "warning: theta = {} is not below theta_max = {}; saddle computation will refuse this model",
                    model.theta,
                    fmt_bound(report.theta_max)
                );
            }
            let human = format!(
                "wrote {} ({} states, theta_max {})\n",
                args.out.display(),
                model.n_states(),
                fmt_bound(report.theta_max)
            );
            Outcome {
                command: "example smartgrid",
                inputs: serde_json::to_value(params).expect("params serialize"),
                payload: Payload::Generated {
                    path: args.out.display().to_string(),
                    n_states: model.n_states(),
                    report,
                    theta_admissible: adm.admissible,
                },
                human,
                code: 0,
                timings: Vec::new(),
            }
        }
    };
    out.timings = watch.finish();
    Ok(out)
}

fn cmd_validate(game: &Path) -> CmdResult {
    let text = std::fs::read_to_string(game).map_err(|e| {
        (
            Error::Io {
                path: game.display().to_string(),
                source: e,
            },
            None,
        )
    })?;
    let inputs = json!({ "game": game });
    match GameModel::from_json_str(&text) {
        Ok(model) => Ok(Outcome {
            command: "validate",
            inputs,
            payload: Payload::Validation(model.validate()),
            human: format!("valid: {} states\n", model.n_states()),
            code: 0,
            timings: Vec::new(),
        }),
        Err(Error::Invalid(report)) => Ok(Outcome {
            command: "validate",
            inputs,
            human: format!("invalid:\n{report}"),
            payload: Payload::Validation(report),
            code: 2,
            timings: Vec::new(),
        }),
        Err(e) => Err((e, None)),
    }
}

fn fmt_bound(x: f64) -> String {
    if x.is_infinite() {
        "inf".into()
    } else {
        format!("{x:.6}")
    }
}

/// States down, action labels across, 4 decimals; blank where an action is
/// not available.
fn policy_table(model: &GameModel, policy: &StationaryPolicy, first: bool) -> String {
    let labels_of = |i: usize| {
        let s = model.state(i);
        if first {
            &s.actions_a
        } else {
            &s.actions_b
        }
    };
    let mut columns: Vec<&String> = Vec::new();
    for i in 0..model.n_states() {
        for l in labels_of(i) {
            if !columns.contains(&l) {
                columns.push(l);
            }
        }
    }
    let width = columns.iter().map(|c| c.len()).max().unwrap_or(0).max(6);
    let mut out = format!("{:>5}", "state");
    for c in &columns {
        out += &format!("  {c:>width$}");
    }
    out += "\n";
    for i in 0..model.n_states() {
        out += &format!("{i:>5}");
        let labels = labels_of(i);
        for c in &columns {
            match labels.iter().position(|l| l == *c) {
                Some(k) => out += &format!("  {:>width$.4}", policy.at(i)[k]),
                None => out += &format!("  {:>width$}", ""),
            }
        }
        out += "\n";
    }
    out
}

fn certificate_text(c: &rsgame::verification::SaddleCertificate) -> String {
    format!(
        "value bracket        [{:.6}, {:.6}]\n\
         best reply to phi    [{:.6}, {:.6}]\n\
         best reply to psi    [{:.6}, {:.6}]\n\
         slack player 1       {:.3e}\n\
         slack player 2       {:.3e}\n\
         certified eps        {:.3e} (target {}, tolerance {:.1e})\n\
         {}\n",
        c.rho_bracket.0,
        c.rho_bracket.1,
        c.best_response_vs_phi.0,
        c.best_response_vs_phi.1,
        c.best_response_vs_psi.0,
        c.best_response_vs_psi.1,
        c.slack_player1,
        c.slack_player2,
        c.certified_eps,
        c.eps,
        c.tolerance,
        if c.passes { "PASS" } else { "FAIL" }
    )
}
