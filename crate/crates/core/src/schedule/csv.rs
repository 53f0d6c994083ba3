//! Table form of a schedule.
//!
//! One row per epoch under a fixed header. Numbers carry at most six
//! significant digits, rounded half away from zero; exact integers are
//! written without a decimal point.

use crate::consensus::ConsensusParams;
use crate::error::{Error, Result};
use crate::quantum::MinerSpeed;

use super::{AttackSchedule, EpochPlan};

pub const CSV_HEADER: [&str; 6] = ["n", "difficulty", "CPoW", "timeToCreate", "realTimeWhenCreated", "timestamp"];

const SIG_DIGITS: i32 = 6;

pub fn format_number(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    if v.fract() == 0.0 && v.abs() < 1e15 {
        return format!("{v:.0}");
    }
    let exp = v.abs().log10().floor() as i32;
    let mut s = round_half_up(v.abs(), SIG_DIGITS - 1 - exp);
    if s.contains('.') {
        let trimmed = s.trim_end_matches('0').trim_end_matches('.').len();
        s.truncate(trimmed);
    }
    if v < 0.0 && s != "0" {
        s.insert(0, '-');
    }
    s
}

/// Rounds a nonnegative value to `decimals` places (negative rounds to tens,
/// hundreds, ...) using its exact binary expansion.
fn round_half_up(v: f64, decimals: i32) -> String {
    let exact = format!("{v:.100}");
    let (int_part, frac_part) = exact.split_once('.').unwrap_or((&exact, ""));
    let mut digits: Vec<u8> = int_part.bytes().chain(frac_part.bytes()).map(|b| b - b'0').collect();
    let mut point = int_part.len() as i32;
    let keep = point + decimals;
    if keep < 0 {
        return "0".to_string();
    }
    let keep = keep as usize;
    let up = digits.get(keep).is_some_and(|&d| d >= 5);
    digits.truncate(keep);
    if up {
        let mut i = digits.len();
        loop {
            if i == 0 {
                digits.insert(0, 1);
                point += 1;
                break;
            }
            i -= 1;
            if digits[i] == 9 {
                digits[i] = 0;
            } else {
                digits[i] += 1;
                break;
            }
        }
    }
    // rounding to tens or coarser leaves zeros left of the point
    while (digits.len() as i32) < point {
        digits.push(0);
    }
    let (int_digits, frac_digits) = digits.split_at(point.max(0) as usize);
    let mut out: String = int_digits.iter().map(|d| char::from(b'0' + d)).collect();
    let out_int = out.trim_start_matches('0').to_string();
    out = if out_int.is_empty() { "0".to_string() } else { out_int };
    if !frac_digits.is_empty() {
        out.push('.');
        out.extend(frac_digits.iter().map(|d| char::from(b'0' + d)));
    }
    out
}

pub fn emit_schedule_csv(schedule: &AttackSchedule) -> String {
    let mut w = ::csv::WriterBuilder::new().terminator(::csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    // writes into a Vec cannot fail
    w.write_record(CSV_HEADER).expect("in-memory write");
    for e in schedule.epochs() {
        w.write_record([
            e.index.to_string(),
            format_number(e.difficulty),
            format_number(e.cpow),
            format_number(e.mining_time),
            format_number(e.real_time),
            format_number(e.timestamp),
        ])
        .expect("in-memory write");
    }
    let bytes = w.into_inner().expect("in-memory flush");
    String::from_utf8(bytes).expect("ascii output")
}

/// Reads a schedule table back. Timestamp deltas are recovered from
/// consecutive timestamps. When `speed` is `None` it is inferred from the
/// first row as `√difficulty / timeToCreate`.
pub fn parse_schedule_csv(text: &str, params: ConsensusParams, speed: Option<MinerSpeed>) -> Result<AttackSchedule> {
    let mut reader = ::csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(::csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut records = reader.records();

    let header = match records.next() {
        None => {
            return Err(Error::Parse {
                line: 1,
                message: "empty input".into(),
            })
        }
        Some(rec) => rec.map_err(csv_error)?,
    };
    if header.iter().ne(CSV_HEADER) {
        return Err(Error::Parse {
            line: 1,
            message: format!("expected header `{}`", CSV_HEADER.join(",")),
        });
    }

    let mut epochs = Vec::new();
    let mut prev_ts = 0.0;
    for rec in records {
        let rec = rec.map_err(csv_error)?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.len() != CSV_HEADER.len() {
            return Err(Error::Parse {
                line,
                message: format!("expected {} fields, found {}", CSV_HEADER.len(), rec.len()),
            });
        }
        let field = |i: usize| -> Result<f64> {
            let raw = &rec[i];
            match raw.parse::<f64>() {
                Ok(v) if v.is_finite() => Ok(v),
                _ => Err(Error::Parse {
                    line,
                    message: format!("column {}: `{raw}` is not a finite number", CSV_HEADER[i]),
                }),
            }
        };
        let index: usize = rec[0].parse().map_err(|_| Error::Parse {
            line,
            message: format!("column n: `{}` is not an epoch number", &rec[0]),
        })?;
        if index != epochs.len() + 1 {
            return Err(Error::Parse {
                line,
                message: format!("expected epoch {}, found {index}", epochs.len() + 1),
            });
        }
        let difficulty = field(1)?;
        if difficulty <= 0.0 {
            return Err(Error::Parse {
                line,
                message: format!("difficulty must be positive, found {difficulty}"),
            });
        }
        let mining_time = field(3)?;
        if mining_time <= 0.0 {
            return Err(Error::Parse {
                line,
                message: format!("timeToCreate must be positive, found {mining_time}"),
            });
        }
        let timestamp = field(5)?;
        epochs.push(EpochPlan {
            index,
            difficulty,
            timestamp_delta: timestamp - prev_ts,
            mining_time,
            cpow: field(2)?,
            real_time: field(4)?,
            timestamp,
        });
        prev_ts = timestamp;
    }

    let first = epochs.first().ok_or(Error::Parse {
        line: 2,
        message: "no epoch rows".into(),
    })?;
    let speed = match speed {
        Some(s) => s,
        None => {
            let r = first.difficulty.sqrt() / first.mining_time;
            // rounding in the table can push parity slightly above 1
            let r = if r > 1.0 && r < 1.0 + 1e-5 { 1.0 } else { r };
            MinerSpeed::new(r).map_err(|e| Error::Parse {
                line: 2,
                message: format!("cannot infer the miner speed: {e}"),
            })?
        }
    };
    AttackSchedule::from_plans(params, speed, epochs)
}

fn csv_error(e: ::csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line());
    Error::Parse {
        line,
        message: e.to_string(),
    }
}
