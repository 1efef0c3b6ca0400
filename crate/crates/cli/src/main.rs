use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use msolv_core::checker::{
    check_compositional, check_safety_unchecked, compositional_neighbourhood, global_oracle,
    safety_neighbourhood, CheckConfig, Outcome, Stats, Verdict,
};
use msolv_core::frontend::{ast_to_json, parse, ContractBundle};
use msolv_core::localization::{Extension, Neighbourhood};
use msolv_core::properties::{parse_spec, Spec};
use msolv_core::ptg::{build_ptg, taint_summary, PtGraph};
use msolv_core::report::{action_json, state_json, state_text, verdict_json, verdict_text};
use msolv_core::semantics::{decode_trace, DataDomain, Machine, Overflow};

#[derive(Parser)]
#[command(
    name = "msolv",
    version,
    about = "Parameterized verifier for MicroSol contracts"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse and validate a contract; print its variable layout.
    Parse {
        contract: PathBuf,
        /// Print the syntax tree instead of the layout.
        #[arg(long)]
        dump_ast: bool,
    },
    /// Print the taint summary and participation topology graph.
    Ptg {
        contract: PathBuf,
        /// Graphviz output instead of JSON.
        #[arg(long)]
        dot: bool,
    },
    /// Print the neighbourhoods used to check a spec.
    Neighbourhood { contract: PathBuf, spec: PathBuf },
    /// Run a JSON trace file on the `N`-user network.
    Simulate {
        contract: PathBuf,
        trace: PathBuf,
        #[arg(long, default_value_t = 4)]
        users: usize,
        #[command(flatten)]
        opts: Options,
    },
    /// Check the invariant for compositionality, then every property.
    Check {
        contract: PathBuf,
        spec: PathBuf,
        #[command(flatten)]
        opts: Options,
    },
    /// Exhaustively explore the `N`-user network against a spec.
    Oracle {
        contract: PathBuf,
        spec: PathBuf,
        #[arg(long)]
        users: usize,
        #[command(flatten)]
        opts: Options,
    },
}

#[derive(Args)]
struct Options {
    /// Bit width of data values.
    #[arg(long, default_value_t = 3)]
    width: u32,
    #[arg(long, value_enum, default_value_t = OverflowArg::Checked)]
    overflow: OverflowArg,
    #[arg(long, default_value_t = msolv_core::checker::DEFAULT_BUDGET_STATES)]
    budget_states: u64,
    #[arg(long, default_value_t = msolv_core::checker::DEFAULT_BUDGET_SECS)]
    budget_secs: u64,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Report wall-clock time (makes output run-dependent).
    #[arg(long)]
    timing: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum OverflowArg {
    Checked,
    Wrap,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
}

/// A failure that maps to exit code 2.
struct Failure(String);

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure(e.to_string())
    }
}

impl Options {
    fn domain(&self) -> Result<DataDomain, Failure> {
        let overflow = match self.overflow {
            OverflowArg::Checked => Overflow::Checked,
            OverflowArg::Wrap => Overflow::Wrap,
        };
        Ok(DataDomain::new(self.width)?.with_overflow(overflow))
    }

    fn config(&self) -> Result<CheckConfig, Failure> {
        Ok(CheckConfig {
            budget_states: self.budget_states,
            budget_time: Duration::from_secs(self.budget_secs),
            ..CheckConfig::new(self.domain()?)
        })
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure(format!("{}: {e}", path.display())))
}

fn load(contract: &Path) -> Result<ContractBundle, Failure> {
    ContractBundle::from_source(&read(contract)?)
        .map_err(|e| Failure(format!("{}: {e}", contract.display())))
}

fn load_spec(bundle: &ContractBundle, spec: &Path) -> Result<Spec, Failure> {
    let spec_text = read(spec)?;
    let parsed = parse_spec(&spec_text, &bundle.layout)
        .map_err(|e| Failure(format!("{}: {e}", spec.display())))?;
    for w in &parsed.warnings {
        eprintln!("warning: {}: {w}", spec.display());
    }
    Ok(parsed)
}

fn ptg_of(bundle: &ContractBundle) -> PtGraph {
    build_ptg(&taint_summary(bundle))
}

fn print_json(v: &Value) {
    println!(
        "{}",
        serde_json::to_string_pretty(v).expect("values serialize")
    );
}

fn exit_for(v: &Verdict) -> u8 {
    match v.outcome {
        Outcome::Safe { .. } => 0,
        Outcome::CexToInvariant { .. } | Outcome::CexToProperty { .. } => 1,
        Outcome::Exhausted => 2,
    }
}

fn neighbourhood_json(n: &Neighbourhood, extended: &[u64]) -> Value {
    json!({ "exp": n.exp, "trans": n.trans, "impl": n.imp, "extended": extended })
}

/// Compositionality first; properties only once it holds. The summary is
/// the first verdict that is not safe, or a safe verdict over all checks.
fn check(
    bundle: &ContractBundle,
    spec: &Spec,
    config: &CheckConfig,
) -> Result<(Verdict, Vec<Value>), Failure> {
    let ptg = ptg_of(bundle);
    let theta = &spec.invariant;
    let comp = check_compositional(bundle, &ptg, theta, config)?;
    let mut checks = vec![
        json!({"check": "compositional", "result": comp.result_name(), "states": comp.stats.states}),
    ];
    if !comp.is_safe() {
        return Ok((comp, checks));
    }
    let mut total = comp.stats;
    for (i, phi) in spec.properties.iter().enumerate() {
        let mut v = check_safety_unchecked(bundle, &ptg, theta, phi, config)?;
        if let Outcome::CexToProperty {
            property: Some(p), ..
        } = &mut v.outcome
        {
            *p = i;
        }
        checks.push(json!({"check": format!("property {i}"), "result": v.result_name(), "states": v.stats.states}));
        if !v.is_safe() {
            return Ok((v, checks));
        }
        total = Stats {
            states: total.states + v.stats.states,
            transitions: total.transitions + v.stats.transitions,
            seconds: total.seconds + v.stats.seconds,
        };
    }
    Ok((
        Verdict {
            outcome: comp.outcome,
            stats: total,
        },
        checks,
    ))
}

fn report(bundle: &ContractBundle, v: &Verdict, opts: &Options, extra: Option<(&str, Value)>) {
    match opts.format {
        Format::Json => {
            let mut out = verdict_json(bundle, v, opts.timing);
            if let Some((key, value)) = extra {
                out.as_object_mut()
                    .expect("verdicts are objects")
                    .insert(key.into(), value);
            }
            print_json(&out);
        }
        Format::Text => print!("{}", verdict_text(bundle, v, opts.timing)),
    }
}

fn run(cli: Cli) -> Result<u8, Failure> {
    match cli.command {
        Command::Parse { contract, dump_ast } => {
            if dump_ast {
                let unit = parse(&read(&contract)?)
                    .map_err(|e| Failure(format!("{}: {e}", contract.display())))?;
                println!("{}", ast_to_json(&unit));
            } else {
                let bundle = load(&contract)?;
                print_json(&serde_json::to_value(&bundle.layout)?);
            }
        }
        Command::Ptg { contract, dot } => {
            let bundle = load(&contract)?;
            let summary = taint_summary(&bundle);
            let g = build_ptg(&summary);
            if dot {
                print!("{}", g.to_dot());
            } else {
                print_json(&json!({ "taint": summary, "graph": g }));
            }
        }
        Command::Neighbourhood { contract, spec } => {
            let bundle = load(&contract)?;
            let spec = load_spec(&bundle, &spec)?;
            let g = ptg_of(&bundle);
            let comp = compositional_neighbourhood(&g, &spec.invariant);
            let props: Vec<Value> = spec
                .properties
                .iter()
                .map(|phi| {
                    let n = safety_neighbourhood(&g, &spec.invariant, phi);
                    neighbourhood_json(&n, &n.extend(Extension::Safety(phi.k)))
                })
                .collect();
            print_json(&json!({
                "compositional": neighbourhood_json(&comp, &comp.extend(Extension::Compositionality)),
                "properties": props,
            }));
        }
        Command::Simulate {
            contract,
            trace,
            users,
            opts,
        } => {
            let bundle = load(&contract)?;
            let actions = decode_trace(&bundle, &read(&trace)?)
                .map_err(|e| Failure(format!("{}: {e}", trace.display())))?;
            let m = Machine::network(&bundle, users, opts.domain()?)?;
            let mut state = m.init_state();
            for (i, a) in actions.iter().enumerate() {
                state = m.step(&state, a)?;
                match opts.format {
                    Format::Json => println!(
                        "{}",
                        json!({"step": i, "action": action_json(&bundle, a), "state": state_json(&state)})
                    ),
                    Format::Text => println!(
                        "{:>3}. {}\n     {}",
                        i + 1,
                        a.describe(&bundle),
                        state_text(&bundle, &state)
                    ),
                }
                if state.is_error() {
                    return Ok(1);
                }
            }
        }
        Command::Check {
            contract,
            spec,
            opts,
        } => {
            let bundle = load(&contract)?;
            let spec = load_spec(&bundle, &spec)?;
            let (v, checks) = check(&bundle, &spec, &opts.config()?)?;
            report(&bundle, &v, &opts, Some(("checks", Value::Array(checks))));
            return Ok(exit_for(&v));
        }
        Command::Oracle {
            contract,
            spec,
            users,
            opts,
        } => {
            let bundle = load(&contract)?;
            let spec = load_spec(&bundle, &spec)?;
            let v = global_oracle(
                &bundle,
                users,
                Some(&spec.invariant),
                &spec.properties,
                &opts.config()?,
            )?;
            report(&bundle, &v, &opts, None);
            return Ok(exit_for(&v));
        }
    }
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(Failure(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
