use std::fmt;
use std::fs;
use std::io::{self, IsTerminal, Write};
use std::path::{Path, PathBuf};

use quantum_retarget::consensus::{validate_schedule_with, ValidationTolerance};
use quantum_retarget::feasibility::{self, HardwareProfile};
use quantum_retarget::race::{counterexample_longest_chain, race_win_probability_within, ChainSide, HonestModel};
use quantum_retarget::schedule::{emit_schedule_csv, format_number, parse_schedule_csv, AttackSchedule};
use quantum_retarget::{AttackVariant, ConsensusParams, Execution, ForkChoiceRule, MinerSpeed, Variant4Config};

use crate::args::{AttackArgs, ChainArgs, Command, FeasibilityArgs, Mode, RaceArgs, ShapeArgs, ValidateArgs, VariantId};

/// Relative paths given to `--output` are resolved against this directory.
pub const OUTPUT_DIR_ENV: &str = "QRETARGET_OUTPUT_DIR";

const DEFAULT_R: f64 = 0.25;
const DEFAULT_TRIALS: u64 = 10_000;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Model(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Model(_) => 2,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Model(m) => f.write_str(m),
        }
    }
}

fn usage(e: impl fmt::Display) -> CliError {
    CliError::Usage(e.to_string())
}

fn model(e: impl fmt::Display) -> CliError {
    CliError::Model(e.to_string())
}

pub fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Attack(a) => attack(a),
        Command::Race(a) => race(a),
        Command::Feasibility(a) => feasibility(a),
        Command::Validate(a) => validate(a),
    }
}

fn chain_params(chain: &ChainArgs) -> Result<ConsensusParams, CliError> {
    ConsensusParams::new(chain.epoch_length, chain.block_time, chain.clamp).map_err(usage)
}

fn speed(r: f64) -> Result<MinerSpeed, CliError> {
    MinerSpeed::new(r).map_err(usage)
}

fn reject(present: bool, flag: &str, variant: VariantId) -> Result<(), CliError> {
    if present {
        Err(CliError::Usage(format!(
            "--{flag} does not apply to --variant {}",
            variant_name(variant)
        )))
    } else {
        Ok(())
    }
}

fn variant_name(v: VariantId) -> &'static str {
    match v {
        VariantId::One => "1",
        VariantId::Two => "2",
        VariantId::Three => "3",
        VariantId::Four => "4",
        VariantId::Revenue => "revenue",
    }
}

fn build_variant(id: VariantId, s: &ShapeArgs) -> Result<AttackVariant, CliError> {
    let v4_only = [
        (s.step.is_some(), "step"),
        (s.n_up.is_some(), "n-up"),
        (s.n_down.is_some(), "n-down"),
        (s.lag_threshold.is_some(), "lag-threshold"),
    ];
    if id != VariantId::Four {
        for (present, flag) in v4_only {
            reject(present, flag, id)?;
        }
    }
    if id != VariantId::Revenue {
        reject(s.epsilon.is_some(), "epsilon", id)?;
    }
    if !matches!(id, VariantId::Three | VariantId::Four) {
        reject(s.n_top.is_some(), "n-top", id)?;
    }
    Ok(match id {
        VariantId::One => AttackVariant::Variant1,
        VariantId::Two => AttackVariant::Variant2,
        VariantId::Three => AttackVariant::Variant3 {
            n_top: s.n_top.unwrap_or(3),
        },
        VariantId::Four => {
            let d = Variant4Config::default();
            AttackVariant::Variant4(Variant4Config {
                step_factor: s.step.unwrap_or(d.step_factor),
                n_top: s.n_top.unwrap_or(d.n_top),
                n_up_steps: s.n_up,
                n_down_steps: s.n_down,
                lag_threshold: s.lag_threshold.unwrap_or(d.lag_threshold),
            })
        }
        VariantId::Revenue => AttackVariant::RevenueTarget {
            epsilon: s.epsilon.unwrap_or(0.05),
        },
    })
}

fn summary(schedule: &AttackSchedule) -> String {
    let a = schedule.aggregates();
    format!(
        "# epochs: {}\n\
         # peak difficulty: {} ({} epochs)\n\
         # total CPoW: {}\n\
         # total real time: {} epoch-times\n\
         # final timestamp: {} epoch-times\n\
         # lag: {} epoch-times\n\
         # revenue: {:.2}%\n",
        schedule.len(),
        format_number(schedule.peak_difficulty()),
        schedule.peak_epochs(),
        format_number(a.total_cpow),
        format_number(a.total_real_time),
        format_number(a.final_timestamp),
        format_number(a.lag),
        a.revenue_fraction * 100.0,
    )
}

fn resolve_output(path: &Path) -> PathBuf {
    match std::env::var_os(OUTPUT_DIR_ENV) {
        Some(dir) if path.is_relative() => Path::new(&dir).join(path),
        _ => path.to_path_buf(),
    }
}

fn write_stdout(text: &str) -> Result<(), CliError> {
    let mut out = io::stdout().lock();
    match out.write_all(text.as_bytes()).and_then(|_| out.flush()) {
        Ok(()) => Ok(()),
        Err(e) if e.kind() == io::ErrorKind::BrokenPipe => Ok(()),
        Err(e) => Err(model(format!("cannot write output: {e}"))),
    }
}

fn attack(args: AttackArgs) -> Result<(), CliError> {
    let params = chain_params(&args.chain)?;
    let speed = speed(args.shape.r.unwrap_or(DEFAULT_R))?;
    let variant = build_variant(args.variant, &args.shape)?;
    let schedule = variant.generate(speed, &params).map_err(model)?;
    let csv = emit_schedule_csv(&schedule);
    let footer = summary(&schedule);

    match args.output {
        Some(path) => {
            let path = resolve_output(&path);
            fs::write(&path, csv).map_err(|e| model(format!("cannot write {}: {e}", path.display())))?;
            write_stdout(&footer)
        }
        None => {
            if io::stdout().is_terminal() {
                write_stdout(&(csv + &footer))
            } else {
                write_stdout(&csv)?;
                eprint!("{footer}");
                Ok(())
            }
        }
    }
}

fn side_name(side: ChainSide) -> &'static str {
    match side {
        ChainSide::Honest => "honest",
        ChainSide::Attacker => "attacker",
        ChainSide::Tie => "tie",
    }
}

fn race(args: RaceArgs) -> Result<(), CliError> {
    let params = chain_params(&args.chain)?;

    if args.counterexample {
        let c = counterexample_longest_chain(args.n, args.power, args.hard, &params).map_err(model)?;
        let mut out = String::new();
        for (name, chain) in [("honest", &c.honest), ("attacker", &c.attacker)] {
            out += &format!(
                "{name}: epochs {}, blocks {}, CPoW {}\n",
                chain.epochs().len(),
                chain.block_count(),
                format_number(quantum_retarget::cumulative_work(chain))
            );
        }
        for rule in [ForkChoiceRule::LongestChain, ForkChoiceRule::CumulativeWork] {
            out += &format!("{rule}: {}\n", side_name(c.winner(rule)));
        }
        return write_stdout(&out);
    }

    let schedule = match &args.schedule {
        Some(path) => {
            for (present, flag) in [
                (args.shape.n_top.is_some(), "n-top"),
                (args.shape.epsilon.is_some(), "epsilon"),
                (args.shape.step.is_some(), "step"),
                (args.shape.n_up.is_some(), "n-up"),
                (args.shape.n_down.is_some(), "n-down"),
                (args.shape.lag_threshold.is_some(), "lag-threshold"),
            ] {
                if present {
                    return Err(usage(format!("--{flag} cannot be combined with --schedule")));
                }
            }
            let speed = args.shape.r.map(speed).transpose()?;
            let text =
                fs::read_to_string(path).map_err(|e| model(format!("cannot read {}: {e}", path.display())))?;
            parse_schedule_csv(&text, params, speed).map_err(|e| model(format!("{}: {e}", path.display())))?
        }
        None => {
            let id = args.variant.unwrap_or(VariantId::One);
            let variant = build_variant(id, &args.shape)?;
            let speed = speed(args.shape.r.unwrap_or(DEFAULT_R))?;
            variant.generate(speed, &params).map_err(model)?
        }
    };

    let base = match args.mode {
        Mode::Deterministic => {
            if args.trials.is_some() || args.seed.is_some() {
                return Err(usage("--trials and --seed require --mode mc"));
            }
            HonestModel::deterministic()
        }
        Mode::Mc => HonestModel::poisson_mc(args.trials.unwrap_or(DEFAULT_TRIALS), args.seed.unwrap_or(0))
            .map_err(usage)?,
    };
    let honest = base.with_efficiency(args.efficiency).map_err(usage)?;

    // a schedule read from CSV carries six significant digits
    let tolerance = if args.schedule.is_some() {
        ValidationTolerance::rendered(6)
    } else {
        ValidationTolerance::EXACT
    };
    let outcome = race_win_probability_within(&schedule, &honest, &params, &tolerance, Execution::default())
        .map_err(model)?;

    let winner = if outcome.margin > 0.0 {
        "attacker"
    } else if outcome.margin < 0.0 {
        "honest"
    } else {
        "tie"
    };
    let mut out = format!(
        "attacker CPoW: {}\nhonest CPoW (expected): {}\nmargin: {}\nwin probability: {}\n",
        format_number(outcome.attacker_cpow),
        format_number(outcome.honest_cpow_expected),
        format_number(outcome.margin),
        format_number(outcome.win_probability),
    );
    if let (Some((lo, hi)), Some(trials), Some(se)) =
        (outcome.confidence_interval, outcome.trials, outcome.standard_error())
    {
        out += &format!(
            "95% CI: [{}, {}]\nstandard error: {}\ntrials: {trials}\nseed: {}\n",
            format_number(lo),
            format_number(hi),
            format_number(se),
            args.seed.unwrap_or(0),
        );
    }
    out += &format!("winner ({}): {winner}\n", ForkChoiceRule::CumulativeWork);
    write_stdout(&out)
}

fn feasibility(args: FeasibilityArgs) -> Result<(), CliError> {
    let profile = HardwareProfile {
        network_hashrate: args.hashrate,
        block_time_seconds: args.block_seconds,
        hash_circuit_depth: args.depth,
        quantum_clock_hz: args.clock,
        machine_count: args.machines,
        overhead_factor: args.overhead,
    };
    profile.validate().map_err(usage)?;
    let params = ConsensusParams::new(args.epoch_length, args.block_seconds / 60.0, None).map_err(usage)?;
    let variants = [
        AttackVariant::Variant1,
        AttackVariant::Variant2,
        AttackVariant::Variant3 { n_top: 3 },
        AttackVariant::Variant4(Variant4Config::default()),
    ];
    let report = feasibility::evaluate(&profile, &params, &variants, Execution::default()).map_err(model)?;

    let r = report.speed.ratio();
    let mut out = format!(
        "per-hash success probability: {:.4e}\n\
         Grover iterations: {:.4e}\n\
         quantum block time: {} s ({} days)\n\
         speed ratio r: {} ({:.3}%)\n\
         r^-2 scale: {} years\n",
        report.success_probability,
        report.grover_iterations,
        format_number(report.quantum_block_seconds),
        format_number(report.quantum_block_seconds / 86_400.0),
        format_number(r),
        r * 100.0,
        format_number(report.leading_order_years),
    );
    for (variant, years) in &report.durations {
        match years {
            Ok(y) => out += &format!("{}: {} years\n", variant.label(), format_number(*y)),
            Err(e) => out += &format!("{}: unavailable ({e})\n", variant.label()),
        }
    }
    write_stdout(&out)
}

fn validate(args: ValidateArgs) -> Result<(), CliError> {
    let params = chain_params(&args.chain)?;
    let speed = args.r.map(speed).transpose()?;
    let text = fs::read_to_string(&args.file)
        .map_err(|e| model(format!("cannot read {}: {e}", args.file.display())))?;
    let schedule =
        parse_schedule_csv(&text, params, speed).map_err(|e| model(format!("{}: {e}", args.file.display())))?;
    let report =
        validate_schedule_with(&schedule, &params, &ValidationTolerance::rendered(6)).map_err(model)?;

    let mut out = String::new();
    if report.is_valid() {
        out += &format!("valid: {} epochs at r = {}\n", schedule.len(), format_number(schedule.speed().ratio()));
    }
    for v in &report.violations {
        out += &format!("violation: {v}\n");
    }
    for w in &report.warnings {
        out += &format!("warning: {w}\n");
    }
    write_stdout(&out)?;
    if report.is_valid() {
        Ok(())
    } else {
        Err(model(format!("{} violation(s)", report.violations.len())))
    }
}
