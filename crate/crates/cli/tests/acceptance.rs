//! Acceptance gate. Each criterion prints one PASS or FAIL line; the process
//! exits nonzero if any criterion fails.

use std::process::{Command, ExitCode};

use quantum_retarget::feasibility::{self, attack_duration_estimate, HardwareProfile};
use quantum_retarget::race::{counterexample_longest_chain, race_win_probability, ChainSide, HonestModel};
use quantum_retarget::schedule::{
    emit_schedule_csv, generate_revenue_target, generate_variant1, generate_variant2, generate_variant3,
    generate_variant4, parse_schedule_csv, AttackSchedule, REVENUE_TIME_CONSTANT,
};
use quantum_retarget::sweep::{self, SweepPoint};
use quantum_retarget::{
    validate_schedule, validate_schedule_with, AttackVariant, ConsensusParams, Execution, ForkChoiceRule,
    MinerSpeed, ValidationTolerance, Variant4Config,
};
use statrs::distribution::{ContinuousCDF, Normal};

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn quarter() -> MinerSpeed {
    MinerSpeed::new(0.25).unwrap()
}

fn within(name: &str, value: f64, target: f64, tol: f64) -> Check {
    if (value - target).abs() <= tol {
        Ok(format!("{name} {value:.6}"))
    } else {
        Err(format!("{name} {value:.6}, want {target} ± {tol}"))
    }
}

fn in_range(name: &str, value: f64, lo: f64, hi: f64) -> Check {
    if (lo..=hi).contains(&value) {
        Ok(format!("{name} {value:.6}"))
    } else {
        Err(format!("{name} {value:.6}, want [{lo}, {hi}]"))
    }
}

fn ensure(cond: bool, msg: String) -> Check {
    if cond {
        Ok(msg)
    } else {
        Err(msg)
    }
}

/// Runs every check, reporting all failures rather than the first.
fn all(checks: Vec<Check>) -> Check {
    let (ok, bad): (Vec<_>, Vec<_>) = checks.into_iter().partition(Result::is_ok);
    if bad.is_empty() {
        Ok(ok.into_iter().map(Result::unwrap).collect::<Vec<_>>().join("; "))
    } else {
        Err(bad.into_iter().map(Result::unwrap_err).collect::<Vec<_>>().join("; "))
    }
}

fn valid(s: &AttackSchedule, params: &ConsensusParams) -> Check {
    let report = validate_schedule(s, params).map_err(|e| e.to_string())?;
    ensure(report.is_valid(), format!("validation: {report}"))
}

fn variant1_table() -> Check {
    let p = ConsensusParams::default();
    let s = generate_variant1(quarter(), &p).map_err(|e| e.to_string())?;
    let rows: Vec<_> = s.epochs().iter().map(|e| (e.difficulty, e.cpow, e.mining_time, e.real_time)).collect();
    all(vec![
        ensure(
            rows == [(1.0, 1.0, 4.0, 4.0), (64.0, 65.0, 32.0, 36.0)],
            format!("rows {rows:?}"),
        ),
        within("final timestamp", s.aggregates().final_timestamp, 1.0156, 0.001),
        valid(&s, &p),
    ])
}

fn variant2_table() -> Check {
    let p = ConsensusParams::default();
    let s = generate_variant2(quarter(), &p).map_err(|e| e.to_string())?;
    let a = s.aggregates();
    all(vec![
        ensure(s.len() == 12, format!("{} epochs", s.len())),
        within("final timestamp", a.final_timestamp, 53.02, 0.01),
        within("real time", a.total_real_time, 53.72, 0.01),
        within("revenue", a.revenue_fraction, 0.223, 0.005),
        valid(&s, &p),
    ])
}

fn variant3_aggregates() -> Check {
    let p = ConsensusParams::default();
    let s = generate_variant3(quarter(), &p, 3).map_err(|e| e.to_string())?;
    let a = s.aggregates();
    all(vec![
        ensure(s.len() == 80, format!("{} epochs", s.len())),
        within("real time", a.total_real_time, 121.84, 0.02),
        within("revenue", a.revenue_fraction, 0.66, 0.01),
        valid(&s, &p),
    ])
}

fn variant4_aggregates() -> Check {
    let p = ConsensusParams::bitcoin();
    let s = generate_variant4(quarter(), &p, &Variant4Config::default()).map_err(|e| e.to_string())?;
    let a = s.aggregates();
    let ratios_ok = s.epochs().windows(2).all(|w| {
        let q = w[1].difficulty / w[0].difficulty;
        (0.5 - 1e-12..=2.0 + 1e-12).contains(&q)
    });
    all(vec![
        ensure(s.peak_difficulty() == 256.0, format!("peak {}", s.peak_difficulty())),
        within("bottom", s.bottom_difficulty(), 9.77e-4, 9.77e-6),
        ensure(ratios_ok, "consecutive ratios in [1/2, 2]".into()),
        within("revenue", a.revenue_fraction, 0.97, 0.01),
        within("epochs", s.len() as f64, 541.0, 5.0),
        within("real time", a.total_real_time, 555.06, 5.5506),
        valid(&s, &p),
    ])
}

fn revenue_target() -> Check {
    let p = ConsensusParams::default();
    let (r, eps) = (0.25, 0.05);
    let s = generate_revenue_target(quarter(), &p, eps).map_err(|e| e.to_string())?;
    let a = s.aggregates();
    let bound = REVENUE_TIME_CONSTANT / (eps * r * r);
    all(vec![
        ensure(a.revenue_fraction >= 0.95, format!("revenue {:.4}", a.revenue_fraction)),
        within("n_top", s.peak_epochs() as f64, 24.0, 2.0),
        ensure(
            a.total_real_time <= bound,
            format!("duration {:.2} <= {bound}", a.total_real_time),
        ),
        valid(&s, &p),
    ])
}

fn variant2_bound() -> Check {
    let p = ConsensusParams::default();
    all([0.25, 0.125, 0.0625]
        .iter()
        .map(|&r| {
            let s = generate_variant2(MinerSpeed::new(r).unwrap(), &p).map_err(|e| e.to_string())?;
            let t = s.aggregates().total_real_time;
            ensure(t <= 3.57 / (r * r), format!("r={r}: {t:.2} <= {:.2}", 3.57 / (r * r)))
        })
        .collect())
}

fn dominance_grid() -> Check {
    let p = ConsensusParams::default();
    let variants = [
        AttackVariant::Variant1,
        AttackVariant::Variant2,
        AttackVariant::Variant3 { n_top: 1 },
        AttackVariant::Variant3 { n_top: 3 },
        AttackVariant::Variant3 { n_top: 6 },
        AttackVariant::Variant4(Variant4Config::default()),
        AttackVariant::Variant4(Variant4Config {
            step_factor: 4.0,
            ..Variant4Config::default()
        }),
        AttackVariant::RevenueTarget { epsilon: 0.2 },
        AttackVariant::RevenueTarget { epsilon: 0.1 },
    ];
    let speeds = [1.0, 0.5, 0.25, 0.125, 0.0625, 1.0 / 32.0];
    let points: Vec<SweepPoint> = sweep::grid(&speeds, &variants, p).map_err(|e| e.to_string())?;
    let mut failures = Vec::new();
    for res in sweep::run(&points, Execution::default()) {
        match res {
            Err(e) => failures.push(e.to_string()),
            Ok(r) => {
                let a = r.aggregates;
                let label = format!("{} at r={}", r.point.variant.label(), r.point.speed);
                if !r.valid {
                    failures.push(format!("{label} invalid"));
                }
                if a.total_cpow <= a.total_real_time {
                    failures.push(format!("{label}: no dominance"));
                }
                if r.point.variant == AttackVariant::Variant1 {
                    let rr = r.point.speed.ratio();
                    if a.total_cpow - a.total_real_time < 1.0 / (rr * rr) {
                        failures.push(format!("{label}: margin below 1/r^2"));
                    }
                }
            }
        }
    }
    if failures.is_empty() {
        Ok(format!("{} cases", points.len()))
    } else {
        Err(failures.join("; "))
    }
}

/// Normal approximation to the chance that a Poisson(`lambda`) honest block
/// count stays below `attacker_blocks`.
fn normal_oracle(lambda: f64, attacker_blocks: f64) -> f64 {
    let below = attacker_blocks.ceil() - 1.0;
    Normal::new(lambda, lambda.sqrt()).unwrap().cdf(below + 0.5)
}

fn race_mc() -> Check {
    let p = ConsensusParams::default();
    let blocks = p.epoch_length() as f64;
    let model = HonestModel::poisson_mc(10_000, 2024).unwrap();
    let v1 = generate_variant1(quarter(), &p).map_err(|e| e.to_string())?;
    let a = race_win_probability(&v1, &model, &p).map_err(|e| e.to_string())?;
    let b = race_win_probability(&v1, &model, &p).map_err(|e| e.to_string())?;

    // a near tie, where the Monte Carlo estimate is far from 0 or 1
    let tie = AttackSchedule::from_steps(p, MinerSpeed::new(1.0).unwrap(), &[(1.0, 1.0)]).unwrap();
    let t = race_win_probability(&tie, &model, &p).map_err(|e| e.to_string())?;
    let oracle = normal_oracle(t.honest_cpow_expected * blocks, t.attacker_cpow * blocks);
    let se = t.standard_error().unwrap();

    let v1_oracle = normal_oracle(a.honest_cpow_expected * blocks, a.attacker_cpow * blocks);
    let v1_se = a.standard_error().unwrap().max(1.0 / 10_000.0);
    all(vec![
        ensure(a.win_probability >= 0.999, format!("variant 1 p {}", a.win_probability)),
        ensure(a == b, "seeded rerun identical".into()),
        ensure(
            (a.win_probability - v1_oracle).abs() <= 3.0 * v1_se,
            format!("variant 1 oracle {v1_oracle:.6}"),
        ),
        ensure(
            (t.win_probability - oracle).abs() <= 3.0 * se,
            format!("tie p {:.4} vs oracle {oracle:.4} (se {se:.4})", t.win_probability),
        ),
    ])
}

fn counterexample() -> Check {
    let p = ConsensusParams::default();
    let c = counterexample_longest_chain(10, 1.0 / 500.0, 1000.0, &p).map_err(|e| e.to_string())?;
    all(vec![
        ensure(
            c.winner(ForkChoiceRule::LongestChain) == ChainSide::Attacker,
            "LongestChain picks attacker".into(),
        ),
        ensure(
            c.winner(ForkChoiceRule::CumulativeWork) == ChainSide::Honest,
            "CumulativeWork picks honest".into(),
        ),
        ensure(c.honest_cpow() == 10001.0, format!("honest CPoW {}", c.honest_cpow())),
    ])
}

fn feasibility_defaults() -> Check {
    let profile = HardwareProfile::default();
    let p = ConsensusParams::default();
    let speed = feasibility::speed_ratio(&profile).map_err(|e| e.to_string())?;
    let years = attack_duration_estimate(speed, &p, &AttackVariant::Variant1).map_err(|e| e.to_string())?;
    let prob = feasibility::per_hash_success_probability(&profile);
    all(vec![
        within("p", prob, 3.33e-24, 3.33e-26),
        in_range("block seconds", feasibility::quantum_block_seconds(&profile), 8e4, 1.1e5),
        in_range("r", speed.ratio(), 0.006, 0.008),
        in_range("variant 1 years", years, 500.0, 1500.0),
    ])
}

fn qretarget(args: &[&str]) -> Result<Vec<u8>, String> {
    let o = Command::new(env!("CARGO_BIN_EXE_qretarget"))
        .args(args)
        .env_remove("QRETARGET_OUTPUT_DIR")
        .output()
        .map_err(|e| e.to_string())?;
    if !o.status.success() {
        return Err(format!("{args:?} exited with {}", o.status));
    }
    Ok(o.stdout)
}

fn determinism() -> Check {
    let p = ConsensusParams::default();
    let mut checks = Vec::new();
    let schedules = [
        generate_variant1(quarter(), &p),
        generate_variant2(quarter(), &p),
        generate_variant3(quarter(), &p, 3),
        generate_variant4(quarter(), &p, &Variant4Config::default()),
    ];
    for s in schedules {
        let s = s.map_err(|e| e.to_string())?;
        let text = emit_schedule_csv(&s);
        let parsed = parse_schedule_csv(&text, p, None).map_err(|e| e.to_string())?;
        let report =
            validate_schedule_with(&parsed, &p, &ValidationTolerance::rendered(6)).map_err(|e| e.to_string())?;
        checks.push(ensure(report.is_valid(), format!("{} rows round-trip", s.len())));
        checks.push(ensure(
            emit_schedule_csv(&parsed) == text,
            "re-emitted table identical".into(),
        ));
    }
    for args in [
        &["attack", "--variant", "2"][..],
        &["attack", "--variant", "4"],
        &["race", "--variant", "1", "--mode", "mc", "--trials", "2000", "--seed", "9"],
        &["feasibility"],
    ] {
        let a = qretarget(args)?;
        let b = qretarget(args)?;
        checks.push(ensure(a == b, format!("{} bytes stable", args.join(" "))));
    }
    all(checks)
}

fn main() -> ExitCode {
    let criteria: [Criterion; 11] = [
        ("variant 1 table", variant1_table),
        ("variant 2 table", variant2_table),
        ("variant 3 aggregates", variant3_aggregates),
        ("variant 4 aggregates", variant4_aggregates),
        ("revenue target", revenue_target),
        ("variant 2 time bound", variant2_bound),
        ("dominance and validity", dominance_grid),
        ("Monte Carlo race", race_mc),
        ("longest-chain counterexample", counterexample),
        ("feasibility defaults", feasibility_defaults),
        ("determinism and round trip", determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("PASS {:>2} {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {detail}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
