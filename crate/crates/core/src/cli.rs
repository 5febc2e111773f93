//! Command-line front end.
//!
//! Every command writes one JSON [`OutputDocument`] to standard output (or a
//! CSV table with `--format csv` where supported). Exit codes:
//!
//! | code | meaning                                   |
//! |------|-------------------------------------------|
//! | 0    | success, every certificate passed         |
//! | 1    | a certificate or identity failed          |
//! | 2    | bad arguments                             |
//! | 3    | map could not be loaded or is unsupported |
//! | 4    | the given members do not form a cycle     |

use std::path::Path;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use serde::Serialize;

use crate::certify::{
    orbit_gap_scan, orbit_identity_check, verify_eq1, verify_inverse_identities, verify_rotation_identity,
    verify_sum_identity, CertificateReport, Check, Outcome,
};
use crate::mapdef::{builtin, BranchTag, IntegerMap, Map, PiecewiseMap};
use crate::mapdsl::{parse_mapfile, print_map};
use crate::orbit::{
    canonicalize, iterate, term_stats, CycleStats, Limits, Orbit, DEFAULT_MAX_MAGNITUDE_BITS, DEFAULT_MAX_STEPS,
};
use crate::padic::{correspondence_residual, correspondence_series, PadicTrunc, DEFAULT_PRECISION};
use crate::search::{search_range, CheckSet, SearchConfig, SearchResult};
use crate::serde_big;

pub const SCHEMA_VERSION: u32 = 1;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_MAP: i32 = 3;
pub const EXIT_NOT_A_CYCLE: i32 = 4;

#[derive(Debug, Parser)]
#[command(
    name = "polycycle",
    version,
    about = "Orbits, cycles and exact cycle identities for piecewise polynomial maps"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Iterate the orbit of a seed.
    #[command(allow_negative_numbers = true)]
    Orbit {
        n: BigInt,
        /// Builtin name (`collatz`, `inverse-collatz`) or path to a map file.
        #[arg(long)]
        map: String,
        /// Apply the map exactly this many times (disables stopping on a repeat).
        #[arg(long)]
        steps: Option<u64>,
        #[arg(long, allow_hyphen_values = true)]
        stop_target: Option<BigInt>,
        #[arg(long, default_value_t = DEFAULT_MAX_MAGNITUDE_BITS)]
        max_magnitude_bits: u64,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Canonicalize a cycle and run certificates on it.
    Verify {
        #[arg(long)]
        map: String,
        /// Comma-separated members, e.g. `4,2,1` or `-5,-14,-7,-20,-10`.
        #[arg(long, allow_hyphen_values = true)]
        cycle: String,
        /// Comma-separated subset of t3, t4, eq1, inv. Defaults to all.
        #[arg(long, value_delimiter = ',')]
        checks: Option<Vec<CheckArg>>,
    },
    /// Check the p-adic correspondence for one seed at finite precision.
    #[command(name = "padic-verify", allow_negative_numbers = true)]
    PadicVerify {
        n: BigInt,
        #[arg(long)]
        map: String,
        #[arg(long, default_value_t = DEFAULT_PRECISION)]
        precision: u32,
    },
    /// Enumerate the cycles reached from every seed in a range.
    Cycles {
        #[arg(long)]
        map: String,
        /// Inclusive seed range `lo..hi`.
        #[arg(long, allow_hyphen_values = true)]
        range: String,
        #[arg(long, default_value_t = 1)]
        threads: usize,
        #[arg(long, default_value_t = DEFAULT_MAX_STEPS)]
        max_steps: u64,
        #[arg(long, default_value_t = DEFAULT_MAX_MAGNITUDE_BITS)]
        max_magnitude_bits: u64,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Orbit identity / gap table over a seed range.
    Identity {
        #[arg(long, allow_hyphen_values = true)]
        range: String,
        #[arg(long, default_value = "collatz")]
        map: String,
        #[arg(long, default_value = "2", allow_hyphen_values = true)]
        absorbing: BigInt,
        #[arg(long, default_value_t = DEFAULT_MAX_STEPS)]
        max_steps: u64,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Print a map in canonical file form.
    ShowMap {
        #[arg(long)]
        map: String,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CheckArg {
    T3,
    T4,
    Eq1,
    Inv,
}

#[derive(Debug, Serialize)]
pub struct OutputDocument {
    pub schema_version: u32,
    pub command: Vec<String>,
    pub result: Payload,
    pub timing: Timing,
}

#[derive(Debug, Serialize)]
pub struct Timing {
    pub elapsed_ms: f64,
}

#[derive(Debug, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Payload {
    Orbit(OrbitPayload),
    Verify(VerifyPayload),
    Padic(PadicPayload),
    Cycles(SearchResult),
    Identity(IdentityPayload),
    Map(MapPayload),
}

#[derive(Debug, Serialize)]
pub struct OrbitRow {
    pub index: usize,
    #[serde(with = "serde_big")]
    pub value: BigInt,
    /// Branch applied to this term; absent on the last term.
    pub branch: Option<BranchTag>,
    #[serde(with = "serde_big")]
    pub running_sum: BigInt,
}

#[derive(Debug, Serialize)]
pub struct OrbitPayload {
    #[serde(flatten)]
    pub orbit: Orbit,
    pub rows: Vec<OrbitRow>,
    /// Statistics over every term of the orbit, including the last.
    pub stats: CycleStats,
}

#[derive(Debug, Serialize)]
pub struct VerifyPayload {
    pub map: String,
    #[serde(with = "serde_big::vec")]
    pub cycle: Vec<BigInt>,
    pub all_pass: bool,
    pub reports: Vec<CertificateReport>,
}

#[derive(Debug, Serialize)]
pub struct PadicPayload {
    pub map: String,
    #[serde(with = "serde_big")]
    pub n: BigInt,
    pub p: u64,
    pub precision: u32,
    #[serde(with = "serde_big")]
    pub series_residue: BigInt,
    #[serde(with = "serde_big")]
    pub residual: BigInt,
    /// Little-endian base-p digits of the residual.
    pub residual_digits: Vec<u64>,
    pub zero: bool,
}

#[derive(Debug, Serialize)]
pub struct IdentityRow {
    #[serde(with = "serde_big")]
    pub n: BigInt,
    #[serde(with = "serde_big::option")]
    pub gap: Option<BigInt>,
    #[serde(with = "serde_big::option")]
    pub expected: Option<BigInt>,
    pub outcome: Option<Outcome>,
}

#[derive(Debug, Serialize)]
pub struct IdentityPayload {
    pub map: String,
    #[serde(with = "serde_big")]
    pub absorbing: BigInt,
    pub lo: i64,
    pub hi: i64,
    pub checked: bool,
    pub passes: u64,
    pub failures: u64,
    pub unresolved: u64,
    pub rows: Vec<IdentityRow>,
}

#[derive(Debug, Serialize)]
pub struct MapPayload {
    pub map: String,
    pub text: String,
}

/// What a command produced: its exit code and the text for each stream.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CliOutcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

struct Failure {
    code: i32,
    message: String,
}

fn fail<T>(code: i32, message: impl Into<String>) -> Result<T, Failure> {
    Err(Failure { code, message: message.into() })
}

/// Resolves `--map`: builtin names first, then a file path.
pub fn load_map(spec: &str) -> Result<Map, String> {
    if let Ok(m) = builtin(spec) {
        return Ok(m);
    }
    let path = Path::new(spec);
    let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read map `{spec}`: {e}"))?;
    let map = parse_mapfile(&text).map_err(|e| format!("{spec}: {e}"))?;
    let name = path.file_stem().and_then(|s| s.to_str()).unwrap_or(spec).to_string();
    Ok(Map::Piecewise(map.with_name(name)))
}

fn map_arg(spec: &str) -> Result<Map, Failure> {
    load_map(spec).map_err(|message| Failure { code: EXIT_MAP, message })
}

/// Parses `lo..hi` (inclusive, either side may be negative).
pub fn parse_range(text: &str) -> Result<(i64, i64), String> {
    let (lo, hi) = text.split_once("..").ok_or_else(|| format!("malformed range `{text}` (expected lo..hi)"))?;
    let parse = |s: &str| s.trim().parse::<i64>().map_err(|e| format!("malformed range `{text}`: {e}"));
    let (lo, hi) = (parse(lo)?, parse(hi.strip_prefix('=').unwrap_or(hi))?);
    if lo > hi {
        return Err(format!("empty range `{text}` (lo > hi)"));
    }
    Ok((lo, hi))
}

fn range_arg(text: &str) -> Result<(i64, i64), Failure> {
    parse_range(text).map_err(|message| Failure { code: EXIT_USAGE, message })
}

fn parse_members(text: &str) -> Result<Vec<BigInt>, Failure> {
    text.split(',')
        .map(|s| {
            s.trim()
                .parse::<BigInt>()
                .map_err(|_| Failure { code: EXIT_USAGE, message: format!("bad cycle member `{s}`") })
        })
        .collect()
}

fn not_applicable(check: Check) -> CertificateReport {
    CertificateReport {
        check,
        outcome: Outcome::NotApplicable,
        lhs: None,
        rhs: None,
        rotations: Vec::new(),
        quantities: Default::default(),
    }
}

fn csv_text<R: Serialize>(rows: impl IntoIterator<Item = R>) -> Result<String, Failure> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.serialize(row).map_err(|e| Failure { code: 1, message: e.to_string() })?;
    }
    let bytes = w.into_inner().map_err(|e| Failure { code: 1, message: e.to_string() })?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

enum Rendered {
    Doc(Box<Payload>),
    Text(String),
}

fn cmd_orbit(
    n: &BigInt,
    map: &str,
    steps: Option<u64>,
    stop_target: Option<BigInt>,
    max_magnitude_bits: u64,
    format: Format,
) -> Result<(i32, Rendered), Failure> {
    let map = map_arg(map)?;
    let mut limits = match steps {
        Some(s) => Limits::steps(s),
        None => Limits::default(),
    };
    limits.max_magnitude_bits = max_magnitude_bits;
    limits.stop_target = stop_target;
    let orbit = iterate(&map, n, &limits);
    let max_k = map.as_piecewise().map_or(1, PiecewiseMap::max_degree);
    let stats = term_stats(&map, &orbit.terms, max_k);
    let mut running = BigInt::from(0);
    let rows: Vec<OrbitRow> = orbit
        .terms
        .iter()
        .enumerate()
        .map(|(index, v)| {
            running += v;
            OrbitRow {
                index,
                value: v.clone(),
                branch: orbit.branch_tags.get(index).copied(),
                running_sum: running.clone(),
            }
        })
        .collect();
    match format {
        Format::Json => Ok((EXIT_OK, Rendered::Doc(Box::new(Payload::Orbit(OrbitPayload { orbit, rows, stats }))))),
        Format::Csv => {
            #[derive(Serialize)]
            struct Row {
                index: usize,
                value: String,
                branch: &'static str,
                running_sum: String,
            }
            let text = csv_text(rows.iter().map(|r| Row {
                index: r.index,
                value: r.value.to_string(),
                branch: r.branch.map_or("", BranchTag::as_str),
                running_sum: r.running_sum.to_string(),
            }))?;
            Ok((EXIT_OK, Rendered::Text(text)))
        }
    }
}

fn cmd_verify(map_spec: &str, cycle: &str, checks: Option<Vec<CheckArg>>) -> Result<(i32, Rendered), Failure> {
    let map = map_arg(map_spec)?;
    let members = parse_members(cycle)?;
    let cycle = canonicalize(&map, &members).map_err(|e| Failure { code: EXIT_NOT_A_CYCLE, message: e.to_string() })?;
    let checks = checks.unwrap_or_else(|| vec![CheckArg::T3, CheckArg::T4, CheckArg::Eq1, CheckArg::Inv]);
    let pw = map.as_piecewise();
    let mut reports = Vec::new();
    for check in checks {
        match check {
            CheckArg::T3 => reports.push(
                verify_rotation_identity(&map, &cycle).unwrap_or_else(|_| not_applicable(Check::RotationIdentity)),
            ),
            CheckArg::T4 => {
                reports.push(verify_sum_identity(&map, &cycle).unwrap_or_else(|_| not_applicable(Check::SumIdentity)))
            }
            CheckArg::Eq1 => reports.push(match pw {
                Some(m) if m.is_collatz() => verify_eq1(&cycle).unwrap_or_else(|_| not_applicable(Check::Eq1)),
                _ => not_applicable(Check::Eq1),
            }),
            CheckArg::Inv => match verify_inverse_identities(&cycle) {
                Ok(inv) if pw.is_none() => {
                    reports.push(inv.identity);
                    reports.push(inv.inequality);
                }
                _ => reports.push(not_applicable(Check::InverseIdentity)),
            },
        }
    }
    let all_pass = reports.iter().all(|r| !r.outcome.is_failure());
    let payload = VerifyPayload { map: map.label(), cycle: cycle.members().to_vec(), all_pass, reports };
    let code = if all_pass { EXIT_OK } else { EXIT_CHECK_FAILED };
    Ok((code, Rendered::Doc(Box::new(Payload::Verify(payload)))))
}

fn cmd_padic(n: &BigInt, map_spec: &str, precision: u32) -> Result<(i32, Rendered), Failure> {
    let map = map_arg(map_spec)?;
    let Some(pw) = map.as_piecewise() else {
        return fail(
            EXIT_MAP,
            format!("map `{}` has no coefficient form; padic-verify needs a piecewise map", map.label()),
        );
    };
    let usage = |e: crate::padic::PadicError| Failure { code: EXIT_USAGE, message: e.to_string() };
    let series = correspondence_series(pw, n, precision).map_err(usage)?;
    let residual: PadicTrunc = correspondence_residual(&map, n, precision).map_err(usage)?;
    let zero = residual.is_zero();
    let payload = PadicPayload {
        map: map.label(),
        n: n.clone(),
        p: pw.p(),
        precision,
        series_residue: series.residue().clone(),
        residual: residual.residue().clone(),
        residual_digits: residual.digits(),
        zero,
    };
    Ok((if zero { EXIT_OK } else { EXIT_CHECK_FAILED }, Rendered::Doc(Box::new(Payload::Padic(payload)))))
}

fn cmd_cycles(
    map_spec: &str,
    range: &str,
    threads: usize,
    max_steps: u64,
    max_magnitude_bits: u64,
    format: Format,
) -> Result<(i32, Rendered), Failure> {
    let (lo, hi) = range_arg(range)?;
    if threads == 0 {
        return fail(EXIT_USAGE, "--threads must be at least 1");
    }
    let map = map_arg(map_spec)?;
    let config = SearchConfig::new(lo, hi)
        .with_workers(threads)
        .with_limits(Limits::default().with_max_steps(max_steps).with_magnitude_bits(max_magnitude_bits))
        .with_checks(CheckSet::ALL);
    let result = search_range(&map, &config).map_err(|e| Failure { code: EXIT_USAGE, message: e.to_string() })?;
    let code = if result.all_certificates_pass() { EXIT_OK } else { EXIT_CHECK_FAILED };
    match format {
        Format::Json => Ok((code, Rendered::Doc(Box::new(Payload::Cycles(result))))),
        Format::Csv => {
            #[derive(Serialize)]
            struct Row {
                min_member: String,
                length: usize,
                members: String,
                certificates: String,
            }
            let text = csv_text(result.cycles.iter().map(|c| {
                Row {
                    min_member: c.cycle.min_member().to_string(),
                    length: c.length,
                    members: c.cycle.members().iter().map(ToString::to_string).collect::<Vec<_>>().join(" "),
                    certificates: c
                        .certificates
                        .iter()
                        .map(|r| format!("{}:{}", r.check, outcome_str(r.outcome)))
                        .collect::<Vec<_>>()
                        .join(" "),
                }
            }))?;
            Ok((code, Rendered::Text(text)))
        }
    }
}

fn outcome_str(o: Outcome) -> &'static str {
    match o {
        Outcome::Pass => "pass",
        Outcome::Fail => "fail",
        Outcome::NotApplicable => "not_applicable",
        Outcome::Unresolved => "unresolved",
    }
}

fn cmd_identity(
    range: &str,
    map_spec: &str,
    absorbing: BigInt,
    max_steps: u64,
    format: Format,
) -> Result<(i32, Rendered), Failure> {
    let (lo, hi) = range_arg(range)?;
    let map = map_arg(map_spec)?;
    let Some(pw) = map.as_piecewise() else {
        return fail(EXIT_MAP, format!("map `{}` has no coefficient form", map.label()));
    };
    let limits = Limits::default().with_max_steps(max_steps);
    let checked = pw.is_collatz() && absorbing == BigInt::from(2);
    let mut payload = IdentityPayload {
        map: map.label(),
        absorbing: absorbing.clone(),
        lo,
        hi,
        checked,
        passes: 0,
        failures: 0,
        unresolved: 0,
        rows: Vec::new(),
    };
    if checked {
        for n in lo..=hi {
            let report = orbit_identity_check(&BigInt::from(n), &limits);
            match report.outcome {
                Outcome::Pass => payload.passes += 1,
                Outcome::Fail => payload.failures += 1,
                Outcome::Unresolved => payload.unresolved += 1,
                Outcome::NotApplicable => {}
            }
            payload.rows.push(IdentityRow {
                n: BigInt::from(n),
                gap: report.lhs,
                expected: report.rhs,
                outcome: Some(report.outcome),
            });
        }
    } else {
        let rows = orbit_gap_scan(pw, lo..=hi, &absorbing, &limits);
        payload.unresolved = (hi as i128 - lo as i128 + 1) as u64 - rows.len() as u64;
        payload.rows =
            rows.into_iter().map(|r| IdentityRow { n: r.n, gap: Some(r.gap), expected: None, outcome: None }).collect();
    }
    let code = if payload.failures == 0 { EXIT_OK } else { EXIT_CHECK_FAILED };
    match format {
        Format::Json => Ok((code, Rendered::Doc(Box::new(Payload::Identity(payload))))),
        Format::Csv => {
            #[derive(Serialize)]
            struct Row {
                n: String,
                gap: String,
                expected: String,
                outcome: &'static str,
            }
            let show = |v: &Option<BigInt>| v.as_ref().map(ToString::to_string).unwrap_or_default();
            let text = csv_text(payload.rows.iter().map(|r| Row {
                n: r.n.to_string(),
                gap: show(&r.gap),
                expected: show(&r.expected),
                outcome: r.outcome.map_or("", outcome_str),
            }))?;
            Ok((code, Rendered::Text(text)))
        }
    }
}

fn cmd_show_map(map_spec: &str) -> Result<(i32, Rendered), Failure> {
    let map = map_arg(map_spec)?;
    let Some(pw) = map.as_piecewise() else {
        return fail(EXIT_MAP, format!("map `{}` has no file form", map.label()));
    };
    Ok((EXIT_OK, Rendered::Doc(Box::new(Payload::Map(MapPayload { map: map.label(), text: print_map(pw) })))))
}

fn dispatch(command: Command) -> Result<(i32, Rendered), Failure> {
    match command {
        Command::Orbit { n, map, steps, stop_target, max_magnitude_bits, format } => {
            cmd_orbit(&n, &map, steps, stop_target, max_magnitude_bits, format)
        }
        Command::Verify { map, cycle, checks } => cmd_verify(&map, &cycle, checks),
        Command::PadicVerify { n, map, precision } => cmd_padic(&n, &map, precision),
        Command::Cycles { map, range, threads, max_steps, max_magnitude_bits, format } => {
            cmd_cycles(&map, &range, threads, max_steps, max_magnitude_bits, format)
        }
        Command::Identity { range, map, absorbing, max_steps, format } => {
            cmd_identity(&range, &map, absorbing, max_steps, format)
        }
        Command::ShowMap { map } => cmd_show_map(&map),
    }
}

/// Runs the CLI on `args` (including the program name) without touching the
/// process streams.
pub fn run<I, T>(args: I) -> CliOutcome
where
    I: IntoIterator<Item = T>,
    T: Into<String>,
{
    let args: Vec<String> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            return if e.use_stderr() {
                CliOutcome { code, stdout: String::new(), stderr: text }
            } else {
                CliOutcome { code, stdout: text, stderr: String::new() }
            };
        }
    };
    let started = Instant::now();
    match dispatch(cli.command) {
        Ok((code, Rendered::Doc(result))) => {
            let doc = OutputDocument {
                schema_version: SCHEMA_VERSION,
                command: args.iter().skip(1).cloned().collect(),
                result: *result,
                timing: Timing { elapsed_ms: started.elapsed().as_secs_f64() * 1e3 },
            };
            let mut stdout = serde_json::to_string_pretty(&doc).expect("output document serializes");
            stdout.push('\n');
            CliOutcome { code, stdout, stderr: String::new() }
        }
        Ok((code, Rendered::Text(stdout))) => CliOutcome { code, stdout, stderr: String::new() },
        Err(Failure { code, message }) => {
            CliOutcome { code, stdout: String::new(), stderr: format!("error: {message}\n") }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges() {
        assert_eq!(parse_range("1..100"), Ok((1, 100)));
        assert_eq!(parse_range("-100..-1"), Ok((-100, -1)));
        assert_eq!(parse_range("2..=2"), Ok((2, 2)));
        assert!(parse_range("5..1").is_err());
        assert!(parse_range("5").is_err());
        assert!(parse_range("a..b").is_err());
    }

    #[test]
    fn members() {
        let m = parse_members("-5, -14,-7").ok().unwrap();
        assert_eq!(m, vec![BigInt::from(-5), BigInt::from(-14), BigInt::from(-7)]);
        assert!(parse_members("1,,2").is_err());
    }
}
