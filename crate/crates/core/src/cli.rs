//! Command-line front end.
//!
//! Exit codes: 0 success, 2 usage or precondition error, 3 infeasible
//! synthesis, 4 verification failure, 1 I/O failure.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_traits::Zero;
use serde::Serialize;
use serde_json::json;

use crate::geometry::{Lattice, MoleculeGeometry, DEFAULT_K_MAX, DEFAULT_TOL};
use crate::schedule::{
    gen_2d_three_step, gen_m_step, gen_one_step, gen_three_step, net_coupling, residual_ratio,
    Schedule,
};
use crate::simulator::{
    cluster_state, evolve, fidelity, fidelity_analytic, initial_state, jitter_sweep,
    residual_phases, JitterScope,
};
use crate::synthesis::{solve_durations, verify, SynthesisOutcome, TargetDocument};
use crate::{format_rational, format_signed, Error, Rational};

#[derive(Debug, Parser)]
#[command(
    name = "qdot-cluster",
    version,
    about = "Cancellation schedules and cluster-state fidelity for double-dot qubit arrays"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    #[command(flatten)]
    pub opts: Options,
}

#[derive(Debug, Clone, Args)]
pub struct Options {
    /// Dot spacing inside a molecule
    #[arg(long, global = true, default_value_t = 1.0)]
    pub a: f64,

    /// Nearest molecule spacing
    #[arg(long, global = true, default_value_t = 10.0)]
    pub b: f64,

    /// Chain length
    #[arg(long, global = true)]
    pub n: Option<usize>,

    /// Grid rows (with --cols)
    #[arg(long, global = true, requires = "cols")]
    pub rows: Option<usize>,

    /// Grid columns (with --rows)
    #[arg(long, global = true, requires = "rows")]
    pub cols: Option<usize>,

    /// gen:one-step | gen:three-step[:anchor] | gen:m-step:M[:anchor] |
    /// gen:2d-three-step[:row,col] | file:PATH
    #[arg(long, global = true)]
    pub schedule: Option<String>,

    /// Truncation of separation sums
    #[arg(long, global = true, default_value_t = DEFAULT_K_MAX)]
    pub kmax: usize,

    /// Certified truncation tolerance
    #[arg(long, global = true, default_value_t = DEFAULT_TOL)]
    pub tol: f64,

    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    /// Relative distance jitter
    #[arg(long, global = true, default_value_t = 0.0)]
    pub jitter: f64,

    /// Write output here instead of stdout
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TableKind {
    Table1,
    Table2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ScopeArg {
    All,
    Zero,
    Separations,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Coupling magnitudes per separation
    Couplings,
    /// Per-step and total coefficients of the built-in protocols
    Table {
        #[arg(value_enum)]
        kind: TableKind,
        /// Window period for table2 (4..=8)
        #[arg(long)]
        m: Option<usize>,
    },
    /// Emit a schedule in the text format
    ScheduleGen,
    /// Net coefficients of a schedule, optionally checked against a target
    ScheduleVerify {
        /// Target profile JSON, inline or a file path
        #[arg(long)]
        target: Option<String>,
    },
    /// Residual non-nearest coupling ratio
    Ratio,
    /// Fidelity of the prepared state against the ideal cluster state
    Simulate,
    /// Search for durations meeting a target profile
    Synth {
        /// Target profile JSON, inline or a file path
        #[arg(long)]
        target: String,
    },
    /// Fidelity samples under distance jitter
    Jitter {
        #[arg(long, default_value_t = 100)]
        samples: u64,
        #[arg(long, value_enum, default_value_t = ScopeArg::All)]
        scope: ScopeArg,
        /// Separations jittered with --scope separations
        #[arg(long, value_delimiter = ',')]
        separations: Vec<usize>,
    },
}

#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn usage(message: impl Into<String>) -> Self {
        Self {
            code: 2,
            message: message.into(),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::VerificationFailed { .. } => 4,
            _ => 2,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self {
            code: 1,
            message: e.to_string(),
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

/// Runs one command, writing to `--out` if given, else to `stdout`.
pub fn run(cli: &Cli, stdout: &mut dyn Write) -> CliResult<()> {
    let text = render(cli)?;
    match &cli.opts.out {
        Some(path) => std::fs::write(path, text)?,
        None => stdout.write_all(text.as_bytes())?,
    }
    Ok(())
}

fn render(cli: &Cli) -> CliResult<String> {
    let opts = &cli.opts;
    let geom = MoleculeGeometry::new(opts.a, opts.b)?;
    match &cli.command {
        Command::Couplings => cmd_couplings(opts, &geom),
        Command::Table { kind, m } => cmd_table(*kind, *m, opts.format),
        Command::ScheduleGen => {
            let (sched, _) = load_schedule(opts, 32)?;
            Ok(match opts.format {
                Format::Csv => sched.to_text(),
                Format::Json => to_json(&sched.to_document()),
            })
        }
        Command::ScheduleVerify { target } => cmd_verify(opts, &geom, target.as_deref()),
        Command::Ratio => cmd_ratio(opts, &geom),
        Command::Simulate => cmd_simulate(opts, &geom),
        Command::Synth { target } => cmd_synth(opts, &geom, target),
        Command::Jitter {
            samples,
            scope,
            separations,
        } => cmd_jitter(opts, &geom, *samples, *scope, separations),
    }
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

fn lattice_from(opts: &Options, default_n: usize) -> CliResult<Lattice> {
    Ok(match (opts.rows, opts.cols) {
        (Some(r), Some(c)) => Lattice::grid(r, c)?,
        _ => Lattice::chain(opts.n.unwrap_or(default_n))?,
    })
}

/// Resolves `--schedule` into a schedule and its label.
fn load_schedule(opts: &Options, default_n: usize) -> CliResult<(Schedule, String)> {
    let spec = opts
        .schedule
        .as_deref()
        .ok_or_else(|| CliError::usage("--schedule is required for this command"))?;
    let sched = if let Some(path) = spec.strip_prefix("file:") {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::usage(format!("cannot read {path}: {e}")))?;
        Schedule::parse_text(&text)?
    } else if let Some(generator) = spec.strip_prefix("gen:") {
        let lattice = lattice_from(opts, default_n)?;
        let mut parts = generator.split(':');
        let name = parts.next().unwrap_or_default();
        let params: Vec<&str> = parts.collect();
        let int = |s: &str| {
            s.parse::<i64>()
                .map_err(|_| CliError::usage(format!("bad generator parameter {s:?} in {spec:?}")))
        };
        match (name, params.as_slice()) {
            ("one-step", []) => gen_one_step(lattice),
            ("three-step", []) => gen_three_step(lattice, 0)?,
            ("three-step", [anchor]) => gen_three_step(lattice, int(anchor)?)?,
            ("m-step", [m]) => gen_m_step(lattice, int(m)?.max(0) as usize, 0)?,
            ("m-step", [m, anchor]) => gen_m_step(lattice, int(m)?.max(0) as usize, int(anchor)?)?,
            ("2d-three-step", []) => gen_2d_three_step(lattice, (0, 0))?,
            ("2d-three-step", [anchor]) => {
                let (r, c) = anchor.split_once(',').ok_or_else(|| {
                    CliError::usage(format!("anchor must be row,col in {spec:?}"))
                })?;
                gen_2d_three_step(lattice, (int(r)?, int(c)?))?
            }
            _ => return Err(CliError::usage(format!("unknown generator {spec:?}"))),
        }
    } else {
        return Err(CliError::usage(format!(
            "schedule must start with gen: or file:, got {spec:?}"
        )));
    };
    Ok((sched, spec.to_string()))
}

fn read_target(arg: &str) -> CliResult<TargetDocument> {
    let text = if arg.trim_start().starts_with('{') {
        arg.to_string()
    } else {
        std::fs::read_to_string(arg)
            .map_err(|e| CliError::usage(format!("cannot read target {arg}: {e}")))?
    };
    Ok(TargetDocument::parse(&text)?)
}

/// Formats with three significant digits.
fn sig3(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let magnitude = x.abs().log10().floor() as i32;
    let decimals = (2 - magnitude).max(0) as usize;
    format!("{x:.decimals$}")
}

fn cmd_couplings(opts: &Options, geom: &MoleculeGeometry) -> CliResult<String> {
    let lattice = lattice_from(opts, 10)?;
    let mut d2s = BTreeSet::new();
    for p in 0..lattice.len() {
        for q in p + 1..lattice.len() {
            d2s.insert(lattice.separation_sq(p, q));
        }
    }
    let mut rows = Vec::new();
    for d2 in d2s {
        let multiple = (d2 as f64).sqrt();
        let d = multiple * geom.b();
        rows.push(json!({
            "separation": multiple,
            "distance": d,
            "e_zero": geom.e_zero(d)?,
            "e_plus": geom.e_plus(d)?,
            "g": geom.coupling_strength(multiple)?.value,
        }));
    }
    Ok(match opts.format {
        Format::Json => to_json(&rows),
        Format::Csv => {
            let mut s = String::from("separation,distance,e_zero,e_plus,g\n");
            for r in &rows {
                writeln!(
                    s,
                    "{},{},{},{},{}",
                    r["separation"], r["distance"], r["e_zero"], r["e_plus"], r["g"]
                )
                .unwrap();
            }
            s
        }
    })
}

/// Rows of a protocol table: label followed by one entry per separation.
pub fn table_rows(kind: TableKind, m: Option<usize>) -> crate::Result<Vec<(String, Vec<String>)>> {
    match kind {
        TableKind::Table1 => {
            let lattice = Lattice::chain(16)?;
            let sched = gen_three_step(lattice, 0)?;
            let ks: Vec<usize> = (1..=7).collect();
            let mut rows = vec![("k".to_string(), ks.iter().map(|k| k.to_string()).collect())];
            for (label, step) in ["(a)", "(b)", "(c)"].iter().zip(sched.steps()) {
                rows.push((
                    label.to_string(),
                    ks.iter()
                        .map(|&k| format_signed(&step.coefficient(0, k)))
                        .collect(),
                ));
            }
            let net = net_coupling(&sched)?;
            rows.push((
                "Total".into(),
                ks.iter().map(|&k| format_signed(&net.get(0, k))).collect(),
            ));
            Ok(rows)
        }
        TableKind::Table2 => {
            let m = m.ok_or(Error::PeriodOutOfRange(0))?;
            let lattice = Lattice::chain(4 * 8)?;
            let sched = gen_m_step(lattice, m, 0)?;
            let ks: Vec<usize> = (1..=m + 2).collect();
            let quarter = |r: Rational| r * crate::ratio(4, 1);
            let mut rows = vec![("k".to_string(), ks.iter().map(|k| k.to_string()).collect())];
            let windows = &sched.steps()[..m];
            for (s, step) in windows.iter().enumerate() {
                rows.push((
                    format!("({})", s + 1),
                    ks.iter()
                        .map(|&k| match step.coefficient(0, k) {
                            c if c.is_zero() => "0".to_string(),
                            c if c > Rational::zero() => "+".to_string(),
                            _ => "-".to_string(),
                        })
                        .collect(),
                ));
            }
            let window_sum = |k: usize| {
                windows
                    .iter()
                    .fold(Rational::zero(), |acc, s| acc + s.coefficient(0, k))
            };
            rows.push((
                "(1)~(m)".into(),
                ks.iter()
                    .map(|&k| quarter(window_sum(k)).to_string())
                    .collect(),
            ));
            rows.push((
                "(m+1)".into(),
                ks.iter()
                    .map(|&k| quarter(sched.steps()[m].coefficient(0, k)).to_string())
                    .collect(),
            ));
            let net = net_coupling(&sched)?;
            rows.push((
                "Total".into(),
                ks.iter()
                    .map(|&k| quarter(net.get(0, k)).to_string())
                    .collect(),
            ));
            Ok(rows)
        }
    }
}

fn cmd_table(kind: TableKind, m: Option<usize>, format: Format) -> CliResult<String> {
    if kind == TableKind::Table2 && !m.is_some_and(|m| (4..=8).contains(&m)) {
        return Err(CliError::usage(format!(
            "table2 needs --m in 4..=8 (the final all-Up step lasts (8-m)/4 t0 and must be nonnegative); got {}",
            m.map_or("none".to_string(), |m| m.to_string())
        )));
    }
    let rows = table_rows(kind, m)?;
    Ok(match format {
        Format::Json => to_json(
            &rows
                .iter()
                .map(|(label, vals)| json!({"row": label, "values": vals}))
                .collect::<Vec<_>>(),
        ),
        Format::Csv => rows
            .iter()
            .map(|(label, vals)| format!("{label} {}\n", vals.join(" ")))
            .collect(),
    })
}

fn cmd_ratio(opts: &Options, geom: &MoleculeGeometry) -> CliResult<String> {
    let (sched, label) = load_schedule(opts, 32)?;
    let ratio = residual_ratio(&sched, geom, opts.kmax, opts.tol)?;
    let b_over_a = geom.b() / geom.a();
    Ok(match opts.format {
        Format::Json => to_json(&json!({"schedule": label, "b_over_a": b_over_a, "ratio": ratio})),
        Format::Csv => format!(
            "# ratio: residual non-nearest coupling over nearest coupling, 3 significant digits\nschedule,b_over_a,ratio\n{label},{b_over_a},{}\n",
            sig3(ratio)
        ),
    })
}

fn cmd_simulate(opts: &Options, geom: &MoleculeGeometry) -> CliResult<String> {
    let (sched, label) = load_schedule(opts, 10)?;
    let coupling = net_coupling(&sched)?;
    let lattice = sched.lattice();
    let evolved = evolve(&initial_state(lattice.len())?, &coupling, geom)?;
    let fid = fidelity(&evolved, &cluster_state(lattice)?)?;
    let oracle = fidelity_analytic(&residual_phases(&coupling, geom)?)?;
    if (fid - oracle).abs() > 1e-12 {
        return Err(CliError {
            code: 4,
            message: format!("state-vector fidelity {fid} disagrees with closed form {oracle}"),
        });
    }
    Ok(match opts.format {
        Format::Json => to_json(&json!({"N": lattice.label(), "schedule": label, "fidelity": fid})),
        Format::Csv => format!("N,schedule,fidelity\n{},{label},{fid}\n", lattice.label()),
    })
}

fn cmd_verify(opts: &Options, geom: &MoleculeGeometry, target: Option<&str>) -> CliResult<String> {
    let (sched, label) = load_schedule(opts, 32)?;
    let total = format_rational(&sched.total_time());
    let coupling = net_coupling(&sched)?;
    if let Lattice::Grid { .. } = sched.lattice() {
        if target.is_some() {
            return Err(CliError::usage("--target checks apply to chain schedules"));
        }
        // coefficient range per squared distance
        let mut classes: std::collections::BTreeMap<usize, (Rational, Rational)> =
            Default::default();
        for (p, q, c) in coupling.pairs() {
            let e = classes
                .entry(sched.lattice().separation_sq(p, q))
                .or_insert((c.clone(), c.clone()));
            if *c < e.0 {
                e.0 = c.clone();
            }
            if *c > e.1 {
                e.1 = c.clone();
            }
        }
        return Ok(match opts.format {
            Format::Json => to_json(&json!({
                "schedule": label,
                "total_time": total,
                "classes": classes.iter().map(|(d2, (lo, hi))| json!({"d2": d2, "min": format_rational(lo), "max": format_rational(hi)})).collect::<Vec<_>>(),
            })),
            Format::Csv => {
                let mut s = format!("# {label} total_time={total}\nd2,min,max\n");
                for (d2, (lo, hi)) in &classes {
                    writeln!(s, "{d2},{},{}", format_rational(lo), format_rational(hi)).unwrap();
                }
                s
            }
        });
    }
    let profile = sched.bulk_profile()?;
    if let Some(arg) = target {
        let doc = read_target(arg)?;
        let (_, profile_target) = doc.build()?;
        let checks = std::iter::once((1, profile_target.nearest().clone())).chain(
            profile_target
                .cancel_set()
                .iter()
                .map(|&k| (k, Rational::zero())),
        );
        for (k, want) in checks {
            if *profile.at(k) != want {
                return Err(Error::VerificationFailed {
                    k,
                    expected: format_rational(&want),
                    actual: format_rational(profile.at(k)),
                }
                .into());
            }
        }
    }
    let ratio = residual_ratio(&sched, geom, opts.kmax, opts.tol)?;
    let coeffs = profile.row(2 * profile.period().max(4));
    Ok(match opts.format {
        Format::Json => to_json(&json!({
            "schedule": label,
            "total_time": total,
            "period": profile.period(),
            "residual_ratio": ratio,
            "coefficients": coeffs.iter().map(format_rational).collect::<Vec<_>>(),
        })),
        Format::Csv => {
            let mut s = format!(
                "# {label} total_time={total} period={} residual_ratio={}\nk,coefficient\n",
                profile.period(),
                sig3(ratio)
            );
            for (i, c) in coeffs.iter().enumerate() {
                writeln!(s, "{},{}", i + 1, format_rational(c)).unwrap();
            }
            s
        }
    })
}

fn cmd_synth(opts: &Options, geom: &MoleculeGeometry, target: &str) -> CliResult<String> {
    let doc = read_target(target)?;
    let (family, profile) = doc.build()?;
    let result = match solve_durations(&family, &profile)? {
        SynthesisOutcome::Feasible(r) => r,
        SynthesisOutcome::Infeasible { reason } => {
            return Err(CliError {
                code: 3,
                message: format!("infeasible: {reason}"),
            })
        }
    };
    let n = opts
        .n
        .unwrap_or(4 * family.period())
        .max(4 * family.period());
    let lattice = Lattice::chain(n)?;
    let report = verify(&result, lattice, geom, opts.kmax, opts.tol)?;
    let sched = result.schedule(lattice, 0)?;
    Ok(match opts.format {
        Format::Json => to_json(&json!({
            "schedule": sched.to_document(),
            "total_time": format_rational(&result.total_time),
            "orbits": result.orbit_durations.iter().map(|(p, t)| json!({"pattern": p.to_string(), "duration": format_rational(t)})).collect::<Vec<_>>(),
            "certificate": result.certificate.iter().map(|(k, c)| json!({"k": k, "coefficient": format_rational(c)})).collect::<Vec<_>>(),
            "verify": report,
        })),
        Format::Csv => format!("{}\n{}", sched.to_text(), result.certificate_table()),
    })
}

fn cmd_jitter(
    opts: &Options,
    geom: &MoleculeGeometry,
    samples: u64,
    scope: ScopeArg,
    separations: &[usize],
) -> CliResult<String> {
    let (sched, label) = load_schedule(opts, 10)?;
    let scope = match scope {
        ScopeArg::All => JitterScope::AllPairs,
        ScopeArg::Zero => JitterScope::ZeroCoefficient,
        ScopeArg::Separations => {
            if separations.is_empty() {
                return Err(CliError::usage("--scope separations needs --separations"));
            }
            JitterScope::Separations(separations.iter().copied().collect())
        }
    };
    let seeds: Vec<u64> = (0..samples).map(|i| opts.seed.wrapping_add(i)).collect();
    let runs = jitter_sweep(&sched, geom, opts.jitter, seeds, &scope)?;
    Ok(match opts.format {
        Format::Json => to_json(&json!({"schedule": label, "samples": runs})),
        Format::Csv => {
            let mut s = String::from("seed,schedule,jitter,fidelity,nominal_fidelity\n");
            for r in &runs {
                writeln!(
                    s,
                    "{},{label},{},{},{}",
                    r.seed, r.jitter, r.fidelity, r.nominal_fidelity
                )
                .unwrap();
            }
            s
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn three_significant_digits() {
        assert_eq!(sig3(0.203_292), "0.203");
        assert_eq!(sig3(0.089_984), "0.0900");
        assert_eq!(sig3(0.009_857_9), "0.00986");
        assert_eq!(sig3(12.345), "12.3");
    }

    #[test]
    fn table_rows_match_protocols() {
        let rows = table_rows(TableKind::Table1, None).unwrap();
        assert_eq!(
            rows[1].1,
            ["+1/2", "-1/2", "-1/2", "+1/2", "+1/2", "-1/2", "-1/2"]
        );
        assert_eq!(rows[4].1, ["+1", "0", "+1", "+2", "+1", "0", "+1"]);
        let rows = table_rows(TableKind::Table2, Some(8)).unwrap();
        assert_eq!(
            rows.last().unwrap().1,
            ["4", "0", "0", "0", "0", "0", "4", "8", "4", "0"]
        );
        let window_row = &rows[rows.len() - 3].1;
        assert_eq!(
            window_row,
            &["4", "0", "0", "0", "0", "0", "4", "8", "4", "0"]
        );
        assert!(table_rows(TableKind::Table2, Some(3)).is_err());
    }
}
