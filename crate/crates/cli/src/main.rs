//! `iwatower`: spanning-tree valuations along Z_ell^d towers of graph covers.
//!
//! Exit codes: 0 on success, 1 when the input is well formed but rejected
//! (validation failure, route mismatch, budget exceeded), 2 on usage or
//! parse errors.

use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use iwatower::artin::{orbit_value, orbits_by_order, CharacterIndex, LValueRecord};
use iwatower::greenberg::{fit_report, valuation_sequence_timed, FitReport, ValuationSequence};
use iwatower::series::{default_truncation, iwasawa_invariants_d1, q_series};
use iwatower::voltage::{check_tower_connectivity, derived_graph};
use iwatower::{Error, VoltageSpec};
use serde_json::{json, Value};

const DEFAULT_BUDGET: u64 = 3000;

#[derive(Parser, Debug)]
#[command(name = "iwatower", version, about = "Spanning-tree valuations in Z_ell^d towers of graph covers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check the base graph and that every layer of the tower is connected.
    Validate(Common),
    /// ord_ell(kappa_n) for each layer, cross-checked by Matrix-Tree within the budget.
    Table(TableArgs),
    /// Exact fit of ord_ell(kappa_n) = P(ell^n, n) on the last window.
    Fit(TableArgs),
    /// Orbit products of L-values at one layer.
    Lvalues(LvalueArgs),
    /// Coefficients of the power series Q(T).
    Qseries(SeriesArgs),
    /// Graphviz rendering of one layer.
    ExportDot(DotArgs),
}

#[derive(Args, Debug)]
struct Common {
    /// Tower description (JSON).
    #[arg(long, value_name = "PATH")]
    spec: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Write to this file instead of stdout.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Worker threads (defaults to all cores).
    #[arg(long, value_name = "J")]
    jobs: Option<usize>,
}

#[derive(Args, Debug)]
struct TableArgs {
    #[command(flatten)]
    common: Common,
    /// Last layer; 0 prints only the base.
    #[arg(long, value_name = "K", default_value_t = 5)]
    n_max: u32,
    /// Largest layer (in vertices) also counted by Matrix-Tree.
    #[arg(long, value_name = "VERTICES", env = "IWATOWER_BUDGET", default_value_t = DEFAULT_BUDGET)]
    budget: u64,
    /// Add a wall-time column.
    #[arg(long)]
    timing: bool,
}

#[derive(Args, Debug)]
struct LvalueArgs {
    #[command(flatten)]
    common: Common,
    /// Layer whose characters are listed.
    #[arg(long, value_name = "K", default_value_t = 1)]
    n_max: u32,
    /// Print integer values only for orbits whose field degree is at most this.
    #[arg(long, value_name = "DEGREE", default_value_t = 64)]
    norm_degree: usize,
}

#[derive(Args, Debug)]
struct SeriesArgs {
    #[command(flatten)]
    common: Common,
    /// Total-degree truncation (defaults to a bound covering all of Q).
    #[arg(long, value_name = "N")]
    trunc: Option<u32>,
}

#[derive(Args, Debug)]
struct DotArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, value_name = "N", default_value_t = 0)]
    layer: u32,
    #[arg(long, value_name = "VERTICES", env = "IWATOWER_BUDGET", default_value_t = DEFAULT_BUDGET)]
    budget: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

/// Failure classes, mapped to exit codes 2 and 1.
enum Failure {
    Usage(anyhow::Error),
    Domain(anyhow::Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Parse(_) => Failure::Usage(e.into()),
            e => Failure::Domain(e.into()),
        }
    }
}

type CmdResult = std::result::Result<(), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Domain(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> CmdResult {
    let common = match &cli.command {
        Command::Validate(c) => c,
        Command::Table(a) | Command::Fit(a) => &a.common,
        Command::Lvalues(a) => &a.common,
        Command::Qseries(a) => &a.common,
        Command::ExportDot(a) => &a.common,
    };
    if let Some(j) = common.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(j)
            .build_global()
            .map_err(|e| Failure::Usage(anyhow!(e)))?;
    }
    let spec = load_spec(&common.spec)?;
    match &cli.command {
        Command::Validate(c) => cmd_validate(&spec, c),
        Command::Table(a) => cmd_table(&spec, a),
        Command::Fit(a) => cmd_fit(&spec, a),
        Command::Lvalues(a) => cmd_lvalues(&spec, a),
        Command::Qseries(a) => cmd_qseries(&spec, a),
        Command::ExportDot(a) => cmd_export_dot(&spec, a),
    }
}

fn load_spec(path: &Path) -> std::result::Result<VoltageSpec, Failure> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("cannot read {}", path.display()))
        .map_err(Failure::Usage)?;
    VoltageSpec::parse_json(&text).map_err(|e| match e {
        Error::Parse(m) => Failure::Usage(anyhow!("{}: {m}", path.display())),
        e => Failure::Domain(anyhow!(e).context(format!("{} is not a usable tower", path.display()))),
    })
}

fn emit(common: &Common, text: &str) -> CmdResult {
    let res = match &common.out {
        Some(p) => fs::write(p, text).with_context(|| format!("cannot write {}", p.display())),
        None => io::stdout().write_all(text.as_bytes()).context("cannot write to stdout"),
    };
    res.map_err(Failure::Usage)
}

fn json_text(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json values serialize");
    s.push('\n');
    s
}

fn cmd_validate(spec: &VoltageSpec, c: &Common) -> CmdResult {
    let base = spec.base().validate();
    let conn = check_tower_connectivity(spec);
    let mut reasons = base.failures();
    if !conn.connected {
        reasons.push(format!("voltages do not generate mod {}", spec.ell()));
    }
    let text = match c.format {
        Format::Json => json_text(&json!({
            "valid": reasons.is_empty(),
            "reasons": reasons,
            "connectivity": conn,
        })),
        Format::Csv => {
            let mut s = String::from("check,result\n");
            let _ = writeln!(s, "base,{}", if base.passes() { "ok" } else { "failed" });
            let _ = writeln!(s, "cycle voltage rank mod {},{}/{}", spec.ell(), conn.rank, conn.d);
            let _ = writeln!(s, "tower,{}", if conn.connected { "connected" } else { "disconnected" });
            s
        }
    };
    emit(c, &text)?;
    if reasons.is_empty() {
        Ok(())
    } else {
        for r in &reasons {
            eprintln!("{r}");
        }
        Err(Failure::Domain(anyhow!("validation failed")))
    }
}

fn sequence(spec: &VoltageSpec, a: &TableArgs) -> std::result::Result<(ValuationSequence, Vec<f64>), Failure> {
    match valuation_sequence_timed(spec, a.n_max, a.budget) {
        Ok((seq, times)) => Ok((seq, times.iter().map(|t| t.as_secs_f64()).collect())),
        Err(Error::RouteMismatch { n, matrix_tree, l_function }) => {
            eprintln!("route mismatch at n = {n}");
            eprintln!("  matrix-tree: {matrix_tree}");
            eprintln!("  l-function:  {l_function}");
            eprintln!("orbit values at n = {n}:");
            eprint!("{}", orbit_csv(&orbit_records(spec, n, 64)?));
            Err(Failure::Domain(anyhow!("the two routes disagree at n = {n}")))
        }
        Err(e) => Err(e.into()),
    }
}

fn cmd_table(spec: &VoltageSpec, a: &TableArgs) -> CmdResult {
    let (seq, times) = sequence(spec, a)?;
    let text = match a.common.format {
        Format::Json => {
            let rows: Vec<Value> = seq
                .entries
                .iter()
                .zip(&times)
                .map(|(e, t)| {
                    let mut row = json!({
                        "n": e.n,
                        "ord": e.ord,
                        "route": e.route.to_string(),
                        "agree": agree(e.route),
                    });
                    if a.timing {
                        row["seconds"] = json!(t);
                    }
                    row
                })
                .collect();
            json_text(&json!({ "ell": seq.ell, "d": seq.d, "rows": rows }))
        }
        Format::Csv => {
            let mut s = String::from("n,ord,route,agree");
            s.push_str(if a.timing { ",seconds\n" } else { "\n" });
            for (e, t) in seq.entries.iter().zip(&times) {
                let agree = agree(e.route).map_or(String::new(), |b| b.to_string());
                let _ = write!(s, "{},{},{},{}", e.n, e.ord, e.route, agree);
                if a.timing {
                    let _ = write!(s, ",{t:.3}");
                }
                s.push('\n');
            }
            s
        }
    };
    emit(&a.common, &text)
}

/// Rows checked by both routes always agree (a disagreement aborts).
fn agree(route: iwatower::greenberg::Route) -> Option<bool> {
    (route == iwatower::greenberg::Route::Both).then_some(true)
}

fn cmd_fit(spec: &VoltageSpec, a: &TableArgs) -> CmdResult {
    let (seq, _) = sequence(spec, a)?;
    let report = fit_report(&seq)?;
    let text = match a.common.format {
        Format::Json => json_text(&fit_json(&report)),
        Format::Csv => fit_csv(&report),
    };
    emit(&a.common, &text)?;
    if report.suspect() {
        eprintln!("warning: leading coefficients are not nonnegative integers; the fit is suspect");
    }
    Ok(())
}

fn rational(c: &num_rational::BigRational) -> String {
    format!("{}/{}", c.numer(), c.denom())
}

fn range(r: Option<(u32, u32)>) -> String {
    r.map_or(String::new(), |(lo, hi)| format!("{lo}..{hi}"))
}

fn fit_json(r: &FitReport) -> Value {
    let coefficients: Vec<Value> = r
        .fit
        .coefficients
        .iter()
        .map(|(m, c)| json!({ "monomial": m.name(), "value": rational(c) }))
        .collect();
    json!({
        "formula": r.fit.formula(),
        "coefficients": coefficients,
        "window": [r.fit.window.0, r.fit.window.1],
        "verified_range": r.verification.verified_range.map(|(lo, hi)| [lo, hi]),
        "stable": r.stable,
        "leading_integral": r.leading_integral,
    })
}

fn fit_csv(r: &FitReport) -> String {
    let mut s = String::from("field,value\n");
    let _ = writeln!(s, "formula,{}", r.fit.formula());
    for (m, c) in &r.fit.coefficients {
        let _ = writeln!(s, "{},{}", m.name(), rational(c));
    }
    let _ = writeln!(s, "window,{}", range(Some(r.fit.window)));
    let _ = writeln!(s, "verified_range,{}", range(r.verification.verified_range));
    let _ = writeln!(s, "stable,{}", r.stable);
    let _ = writeln!(s, "leading_integral,{}", r.leading_integral);
    s
}

fn orbit_records(spec: &VoltageSpec, n: u32, limit: usize) -> std::result::Result<Vec<LValueRecord>, Failure> {
    orbits_by_order(spec.ell(), n, spec.d())
        .iter()
        .map(|o| orbit_value(spec, o, limit).map_err(Failure::from))
        .collect()
}

fn index_str(chi: &CharacterIndex) -> String {
    let parts: Vec<String> = chi.a.iter().map(u64::to_string).collect();
    format!("({})", parts.join(" "))
}

fn orbit_csv(records: &[LValueRecord]) -> String {
    let mut s = String::from("representative,exact_order,size,value,ord\n");
    for r in records {
        let value = r.integer_value.as_ref().map_or(String::new(), |v| v.to_string());
        let _ = writeln!(
            s,
            "{},{},{},{},{}",
            index_str(&r.orbit.representative),
            r.orbit.exact_order(),
            r.orbit.size,
            value,
            r.ord_ell
        );
    }
    s
}

fn cmd_lvalues(spec: &VoltageSpec, a: &LvalueArgs) -> CmdResult {
    spec.validate()?;
    let records = orbit_records(spec, a.n_max, a.norm_degree)?;
    let text = match a.common.format {
        Format::Csv => orbit_csv(&records),
        Format::Json => {
            let rows: Vec<Value> = records
                .iter()
                .map(|r| {
                    json!({
                        "representative": r.orbit.representative.a,
                        "exact_order": r.orbit.exact_order(),
                        "size": r.orbit.size,
                        "value": r.integer_value.as_ref().map(|v| v.to_string()),
                        "ord": r.ord_ell,
                    })
                })
                .collect();
            json_text(&json!({ "ell": spec.ell(), "n": a.n_max, "orbits": rows }))
        }
    };
    emit(&a.common, &text)
}

fn cmd_qseries(spec: &VoltageSpec, a: &SeriesArgs) -> CmdResult {
    let trunc = a.trunc.unwrap_or_else(|| default_truncation(spec));
    let q = q_series(spec, trunc);
    let invariants = if spec.d() == 1 {
        Some(iwasawa_invariants_d1(&q, spec.ell())?)
    } else {
        None
    };
    let text = match a.common.format {
        Format::Json => {
            let mut v = json!(q.to_json());
            if let Some(inv) = invariants {
                v["iwasawa"] = json!(inv);
            }
            json_text(&v)
        }
        Format::Csv => {
            let mut s = String::from("exponent,coefficient\n");
            for (e, c) in q.coeffs() {
                let parts: Vec<String> = e.iter().map(u32::to_string).collect();
                let _ = writeln!(s, "({}),{}", parts.join(" "), c);
            }
            s
        }
    };
    emit(&a.common, &text)
}

fn cmd_export_dot(spec: &VoltageSpec, a: &DotArgs) -> CmdResult {
    let text = if a.layer == 0 {
        spec.base().to_dot("X")
    } else {
        derived_graph(spec, a.layer, a.budget)?.to_dot(&format!("X{}", a.layer))
    };
    emit(&a.common, &text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;

    #[test]
    fn rationals_keep_denominator() {
        assert_eq!(rational(&BigRational::new(33.into(), 4.into())), "33/4");
        assert_eq!(rational(&BigRational::from_integer((-6).into())), "-6/1");
    }

    #[test]
    fn ranges() {
        assert_eq!(range(Some((4, 10))), "4..10");
        assert_eq!(range(None), "");
    }

    #[test]
    fn character_indices() {
        assert_eq!(index_str(&CharacterIndex::new(3, 2, &[1, -1])), "(1 8)");
    }

    #[test]
    fn cli_shape() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
        let cli = Cli::try_parse_from(["iwatower", "table", "--spec", "x.json", "--n-max", "0", "--budget", "7"]).unwrap();
        let Command::Table(a) = cli.command else { panic!() };
        assert_eq!((a.n_max, a.budget, a.common.format), (0, 7, Format::Csv));
    }
}
