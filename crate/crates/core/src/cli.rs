//! The `humbert` command line: argument parsing, reports and rendering.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;

use clap::{Args, Parser, Subcommand};
use num_traits::Zero;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::byformula::{self, BYTermRecord, PrimeTally};
use crate::cmfield::{CMField, CmError};
use crate::embedcount::{self, EmbedError, PrimeReport};
use crate::exactmath::int::is_prime;
use crate::exactmath::Rat;
use crate::fixtures::{self, FieldFixture};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("unknown field {0:?}; known fields: {1}")]
    UnknownField(String, String),
    #[error("give either --field or all of --d, --alpha0, --alpha1, --beta0, --beta1")]
    MissingField,
    #[error("invalid field: {0}")]
    Field(#[from] CmError),
    #[error(transparent)]
    Embed(#[from] EmbedError),
    #[error("{0} is not prime")]
    NotPrime(i128),
    #[error("fixture check failed: {0}")]
    Fixture(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Parser)]
#[command(name = "humbert", version, about = "Bruinier-Yang tallies and embedding counts for quartic cyclic CM fields")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Predicted intersection tally from the Bruinier-Yang formula.
    By(ByArgs),
    /// Count embeddings of O_K into End(E x E').
    Embed(EmbedArgs),
    /// Compare both computations with the recorded denominators.
    Table(TableArgs),
    /// Re-check every bundled fixture.
    ValidateFixtures,
}

#[derive(Debug, Clone, Args)]
pub struct FieldArgs {
    /// Fixture key, e.g. dt29.
    #[arg(long)]
    pub field: Option<String>,
    /// Squarefree d with F = Q(sqrt d).
    #[arg(long, allow_negative_numbers = true)]
    pub d: Option<i128>,
    /// K = F(sqrt(a + b sqrt d)); optional, checked against eta when given.
    #[arg(long, allow_negative_numbers = true, requires = "b")]
    pub a: Option<i128>,
    #[arg(long, allow_negative_numbers = true, requires = "a")]
    pub b: Option<i128>,
    /// eta^2 - alpha eta + beta = 0 with alpha = alpha0 + alpha1 omega.
    #[arg(long, allow_negative_numbers = true)]
    pub alpha0: Option<i128>,
    #[arg(long, allow_negative_numbers = true)]
    pub alpha1: Option<i128>,
    #[arg(long, allow_negative_numbers = true)]
    pub beta0: Option<i128>,
    #[arg(long, allow_negative_numbers = true)]
    pub beta1: Option<i128>,
}

#[derive(Debug, Clone, Args)]
pub struct ByArgs {
    #[command(flatten)]
    pub field: FieldArgs,
    #[arg(long, default_value_t = 150)]
    pub max_prime: i128,
    /// Keep only terms with 8m + n = 0 mod 16.
    #[arg(long)]
    pub correction_mod16: bool,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Clone, Args)]
pub struct EmbedArgs {
    #[command(flatten)]
    pub field: FieldArgs,
    /// A single prime; otherwise every candidate up to --max-prime.
    #[arg(long)]
    pub p: Option<i128>,
    #[arg(long, default_value_t = 150)]
    pub max_prime: i128,
    #[arg(long)]
    pub json: bool,
    /// Print orbit representatives and the count modulo all of Aut(K).
    #[arg(long)]
    pub verbose_orbits: bool,
}

#[derive(Debug, Clone, Args)]
pub struct TableArgs {
    /// Comma separated fixture keys; default all.
    #[arg(long, value_delimiter = ',')]
    pub rows: Vec<String>,
    /// Leave out embedding counts for the slow rows.
    #[arg(long)]
    pub skip_heavy: bool,
    #[arg(long, default_value_t = 150)]
    pub max_prime: i128,
    #[arg(long)]
    pub correction_mod16: bool,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Flags {
    pub max_prime: i128,
    pub correction_mod16: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<i128>,
    #[serde(default)]
    pub verbose_orbits: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tallies {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub by: Option<PrimeTally>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub embed: Option<PrimeTally>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub denominators: Option<Vec<PrimeTally>>,
}

/// Output of `by` and `embed`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Report {
    pub field: String,
    pub tallies: Tallies,
    pub terms: Vec<BYTermRecord>,
    pub flags: Flags,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rendered: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub orbits: Vec<PrimeReport>,
}

/// One prime of one table row.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrimeRow {
    pub p: i128,
    #[serde(with = "byformula::rat_string")]
    pub by: Rat,
    #[serde(default, skip_serializing_if = "Option::is_none", with = "opt_rat")]
    pub embed: Option<Rat>,
    #[serde(with = "byformula::rat_string")]
    pub denominator: Rat,
    pub by_matches_embed: Option<bool>,
    pub embed_matches_denominator: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableRow {
    pub field: String,
    pub label: String,
    pub dtilde: i128,
    pub starred: bool,
    pub double_starred: bool,
    pub by: PrimeTally,
    pub by_rendered: String,
    pub embed: Option<PrimeTally>,
    pub denominators: Vec<PrimeTally>,
    pub primes: Vec<PrimeRow>,
    pub by_matches_recorded: bool,
    pub embed_matches_recorded: Option<bool>,
    pub notes: Vec<String>,
    pub terms: Vec<BYTermRecord>,
}

/// Output of `table`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub flags: Flags,
    pub skip_heavy: bool,
    pub rows: Vec<TableRow>,
}

mod opt_rat {
    use super::Rat;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &Option<Rat>, s: S) -> Result<S::Ok, S::Error> {
        match r {
            Some(r) => s.serialize_str(&r.to_string()),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Rat>, D::Error> {
        use serde::de::Error;
        Option::<String>::deserialize(d)?
            .map(|v| v.parse().map_err(|_| D::Error::custom(format!("bad exponent {v:?}"))))
            .transpose()
    }
}

/// Resolve the field selector to a name, field and optional fixture.
pub fn resolve_field(args: &FieldArgs) -> Result<(String, CMField, Option<FieldFixture>), CliError> {
    if let Some(name) = &args.field {
        let fx = fixtures::by_name(name)
            .ok_or_else(|| CliError::UnknownField(name.clone(), fixtures::names().join(", ")))?;
        let k = fx.field()?;
        return Ok((name.clone(), k, Some(fx)));
    }
    let (Some(d), Some(a0), Some(a1), Some(b0), Some(b1)) = (args.d, args.alpha0, args.alpha1, args.beta0, args.beta1)
    else {
        return Err(CliError::MissingField);
    };
    let k = match (args.a, args.b) {
        (Some(a), Some(b)) => CMField::from_surd(d, a, b, a0, a1, b0, b1)?,
        _ => CMField::from_generators(d, a0, a1, b0, b1)?,
    };
    let name = format!("d={d} alpha=({a0},{a1}) beta=({b0},{b1})");
    Ok((name, k, None))
}

pub fn cmd_by(args: &ByArgs) -> Result<Report, CliError> {
    let (name, k, fx) = resolve_field(&args.field)?;
    let res = byformula::predicted_tally(&k, args.max_prime, args.correction_mod16);
    Ok(Report {
        field: name,
        tallies: Tallies { by: Some(res.tally.clone()), embed: None, denominators: fx.map(|f| f.expected_denominators) },
        rendered: Some(res.render()),
        terms: res.terms,
        flags: Flags {
            max_prime: args.max_prime,
            correction_mod16: args.correction_mod16,
            p: None,
            verbose_orbits: false,
        },
        orbits: Vec::new(),
    })
}

pub fn cmd_embed(args: &EmbedArgs) -> Result<Report, CliError> {
    let (name, k, fx) = resolve_field(&args.field)?;
    let primes = match args.p {
        Some(p) if !is_prime(p) => return Err(CliError::NotPrime(p)),
        Some(p) => vec![p],
        None => embedcount::candidate_primes(&k, args.max_prime),
    };
    let reports: Vec<PrimeReport> =
        primes.par_iter().map(|&p| embedcount::embedding_report(&k, p)).collect::<Result<_, _>>()?;
    let mut tally = PrimeTally::new();
    for r in &reports {
        tally.add(r.p, Rat::from_integer(i128::from(r.count)));
    }
    let orbits = if args.verbose_orbits { reports } else { Vec::new() };
    Ok(Report {
        field: name,
        tallies: Tallies { by: None, embed: Some(tally), denominators: fx.map(|f| f.expected_denominators) },
        terms: Vec::new(),
        rendered: None,
        flags: Flags {
            max_prime: args.max_prime,
            correction_mod16: false,
            p: args.p,
            verbose_orbits: args.verbose_orbits,
        },
        orbits,
    })
}

fn table_row(fx: &FieldFixture, args: &TableArgs) -> Result<TableRow, CliError> {
    let k = fx.field()?;
    let by = byformula::predicted_tally(&k, args.max_prime, args.correction_mod16);
    let embed = if args.skip_heavy && fx.heavy {
        None
    } else {
        Some(embedcount::embedding_tally(&k, args.max_prime)?)
    };
    let denom = fx.denominator_lcm();
    let mut primes: Vec<i128> = by.tally.primes().chain(denom.primes()).collect();
    if let Some(e) = &embed {
        primes.extend(e.primes());
    }
    primes.sort();
    primes.dedup();
    let rows: Vec<PrimeRow> = primes
        .iter()
        .map(|&p| {
            let e = embed.as_ref().map(|e| e.get(p));
            PrimeRow {
                p,
                by: by.tally.get(p),
                embed: e,
                denominator: denom.get(p),
                by_matches_embed: e.map(|e| e == by.tally.get(p)),
                embed_matches_denominator: e.map(|e| e == denom.get(p)),
            }
        })
        .collect();
    let mut notes = Vec::new();
    if fx.double_starred {
        notes.push("outside hypotheses: F has even discriminant".to_string());
    }
    if by.tally.iter().any(|(_, e)| !e.is_integer()) || by.terms.iter().any(|t| t.contribution < Rat::zero()) {
        notes.push("fractional or negative exponents in the formula".to_string());
    }
    if !fx.double_starred {
        for r in &rows {
            if let Some(e) = r.embed {
                if !e.is_zero() && r.by != e {
                    notes.push(format!("multiplicity at {}: formula {} vs count {}", r.p, r.by, e));
                }
            }
        }
    }
    if by.uses_x_zero() {
        notes.push("includes the x = 0 index".to_string());
    }
    Ok(TableRow {
        field: fx.name.clone(),
        label: fx.label.clone(),
        dtilde: k.dtilde(),
        starred: fx.starred,
        double_starred: fx.double_starred,
        by_matches_recorded: by.tally == fx.expected_by.tally,
        embed_matches_recorded: embed.as_ref().map(|e| *e == fx.expected_embed),
        by_rendered: by.render(),
        by: by.tally,
        embed,
        denominators: fx.expected_denominators.clone(),
        primes: rows,
        notes,
        terms: by.terms,
    })
}

pub fn cmd_table(args: &TableArgs) -> Result<ComparisonReport, CliError> {
    let all = fixtures::all();
    let selected: Vec<FieldFixture> = if args.rows.is_empty() {
        all
    } else {
        args.rows
            .iter()
            .map(|r| {
                all.iter()
                    .find(|f| &f.name == r)
                    .cloned()
                    .ok_or_else(|| CliError::UnknownField(r.clone(), fixtures::names().join(", ")))
            })
            .collect::<Result<_, _>>()?
    };
    let rows: Vec<TableRow> = selected.par_iter().map(|fx| table_row(fx, args)).collect::<Result<_, _>>()?;
    Ok(ComparisonReport {
        flags: Flags {
            max_prime: args.max_prime,
            correction_mod16: args.correction_mod16,
            p: None,
            verbose_orbits: false,
        },
        skip_heavy: args.skip_heavy,
        rows,
    })
}

/// Reload every fixture and re-check its invariants; one line per row.
pub fn validate_fixtures() -> Result<Vec<String>, CliError> {
    let mut lines = Vec::new();
    for fx in fixtures::all() {
        let k = fx.field().map_err(|e| CliError::Fixture(format!("{}: {e}", fx.name)))?;
        if k.dtilde() != fx.expected_dtilde {
            return Err(CliError::Fixture(format!("{}: D~ {} != {}", fx.name, k.dtilde(), fx.expected_dtilde)));
        }
        if k.relative_discriminant().norm() != Rat::from_integer(fx.expected_dtilde) {
            return Err(CliError::Fixture(format!("{}: relative discriminant norm mismatch", fx.name)));
        }
        if fx.starred && !(is_prime(fx.expected_dtilde) && fx.expected_dtilde % 4 == 1) {
            return Err(CliError::Fixture(format!("{}: starred but D~ is not a prime = 1 mod 4", fx.name)));
        }
        lines.push(format!("{:<8} ok  D={:<3} D~={}", fx.name, k.disc(), k.dtilde()));
    }
    Ok(lines)
}

fn yes_no(b: Option<bool>) -> &'static str {
    match b {
        Some(true) => "yes",
        Some(false) => "NO",
        None => "-",
    }
}

pub fn render_report(r: &Report) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "field: {}", r.field);
    if let Some(by) = &r.tallies.by {
        let _ = writeln!(s, "by: {by}");
        if let Some(rendered) = &r.rendered {
            let _ = writeln!(s, "by (grouped): {rendered}");
        }
        if r.flags.correction_mod16 {
            let _ = writeln!(s, "by odd part: {}", by.odd_part());
        }
        for t in &r.terms {
            let _ = writeln!(
                s,
                "  m={} x={} n={} P={} ord={} rho={} f={} -> {}",
                t.m, t.x, t.n, t.prime, t.ord_t, t.rho, t.f, t.contribution
            );
        }
    }
    if let Some(e) = &r.tallies.embed {
        if let Some(p) = r.flags.p {
            let _ = writeln!(s, "embed at {p}: {}", e.get(p));
        } else {
            let _ = writeln!(s, "embed: {e}");
        }
    }
    for pr in &r.orbits {
        let _ = writeln!(s, "p={} count={} count modulo Aut(K)={}", pr.p, pr.count, pr.full_aut_count);
        for ring in &pr.rings {
            if ring.found == 0 {
                continue;
            }
            let _ = writeln!(
                s,
                "  ring {} N(I)={} diagonal={} found={} orbits={} orbits modulo Aut(K)={}",
                ring.index,
                ring.norm_ideal,
                ring.diagonal,
                ring.found,
                ring.representatives.len(),
                ring.full_aut_orbits
            );
            for sol in &ring.representatives {
                let m = |b: &embedcount::BlockMatrix| {
                    format!("[[{}, {}], [{}, {}]]", b.get(0, 0), b.get(0, 1), b.get(1, 0), b.get(1, 1))
                };
                let _ = writeln!(s, "    L1 = {}", m(&sol.lambda1));
                let _ = writeln!(s, "    L2 = {}", m(&sol.lambda2));
            }
        }
    }
    s
}

pub fn render_table(t: &ComparisonReport) -> String {
    let mut s = String::new();
    for row in &t.rows {
        let star = if row.starred {
            "*"
        } else if row.double_starred {
            "**"
        } else {
            ""
        };
        let _ = writeln!(s, "{}{} {} D~={}", row.field, star, row.label, row.dtilde);
        let _ = writeln!(s, "  by:    {}  [{}]  recorded: {}", row.by, row.by_rendered, yes_no(Some(row.by_matches_recorded)));
        match &row.embed {
            Some(e) => {
                let _ = writeln!(s, "  embed: {}  recorded: {}", e, yes_no(row.embed_matches_recorded));
            }
            None => {
                let _ = writeln!(s, "  embed: skipped");
            }
        }
        let _ = writeln!(s, "  {:>5} {:>8} {:>6} {:>6} {:>9} {:>11}", "p", "by", "embed", "denom", "by=embed", "embed=denom");
        for p in &row.primes {
            let e = p.embed.map(|e| e.to_string()).unwrap_or_else(|| "-".into());
            let _ = writeln!(
                s,
                "  {:>5} {:>8} {:>6} {:>6} {:>9} {:>11}",
                p.p,
                p.by.to_string(),
                e,
                p.denominator.to_string(),
                yes_no(p.by_matches_embed),
                yes_no(p.embed_matches_denominator)
            );
        }
        for n in &row.notes {
            let _ = writeln!(s, "  note: {n}");
        }
    }
    s
}

/// Run a parsed command, writing to `out`.
pub fn run(cli: &Cli, out: &mut dyn Write) -> Result<(), CliError> {
    match &cli.command {
        Command::By(a) => {
            let r = cmd_by(a)?;
            if a.json {
                writeln!(out, "{}", serde_json::to_string_pretty(&r)?)?;
            } else {
                write!(out, "{}", render_report(&r))?;
            }
        }
        Command::Embed(a) => {
            let r = cmd_embed(a)?;
            if a.json {
                writeln!(out, "{}", serde_json::to_string_pretty(&r)?)?;
            } else {
                write!(out, "{}", render_report(&r))?;
            }
        }
        Command::Table(a) => {
            let t = cmd_table(a)?;
            if a.json {
                writeln!(out, "{}", serde_json::to_string_pretty(&t)?)?;
            } else {
                write!(out, "{}", render_table(&t))?;
            }
        }
        Command::ValidateFixtures => {
            for line in validate_fixtures()? {
                writeln!(out, "{line}")?;
            }
        }
    }
    Ok(())
}

/// Entry point shared by the binary; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    match run(&cli, &mut lock) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> Cli {
        Cli::try_parse_from(std::iter::once("humbert").chain(args.iter().copied())).unwrap()
    }

    fn by_args(args: &[&str]) -> ByArgs {
        match parse(args).command {
            Command::By(a) => a,
            _ => unreachable!(),
        }
    }

    #[test]
    fn by_examples() {
        let r = cmd_by(&by_args(&["by", "--field", "dt29"])).unwrap();
        assert_eq!(r.tallies.by.unwrap(), PrimeTally::from_ints([(5, 2)]));
        let r = cmd_by(&by_args(&["by", "--field", "dt13"])).unwrap();
        assert!(r.tallies.by.unwrap().is_empty());
        let r = cmd_by(&by_args(&["by", "--field", "dt32", "--correction-mod16"])).unwrap();
        assert!(r.tallies.by.unwrap().odd_part().is_empty());
    }

    #[test]
    fn explicit_field_flags() {
        let base = ["by", "--d", "29", "--alpha0", "11", "--alpha1", "-1", "--beta0", "-35", "--beta1", "3"];
        let r = cmd_by(&by_args(&base)).unwrap();
        assert_eq!(r.tallies.by.unwrap(), PrimeTally::from_ints([(5, 2)]));
        assert!(r.tallies.denominators.is_none());
        let with_surd: Vec<&str> = base.iter().copied().chain(["--a", "-29", "--b", "2"]).collect();
        assert!(cmd_by(&by_args(&with_surd)).is_ok());
        let wrong_surd: Vec<&str> = base.iter().copied().chain(["--a", "-29", "--b", "4"]).collect();
        assert!(matches!(cmd_by(&by_args(&wrong_surd)), Err(CliError::Field(_))));
        assert!(matches!(cmd_by(&by_args(&["by", "--d", "29"])), Err(CliError::MissingField)));
    }

    #[test]
    fn unknown_field_is_an_error() {
        let e = cmd_by(&by_args(&["by", "--field", "nope"])).unwrap_err();
        assert!(e.to_string().contains("dt29"));
        assert_eq!(main_with_args(["humbert", "by", "--field", "nope"]), 1);
        assert_eq!(main_with_args(["humbert", "frobnicate"]), 2);
    }

    #[test]
    fn report_json_round_trip() {
        let r = cmd_by(&by_args(&["by", "--field", "dt64x5"])).unwrap();
        let s = serde_json::to_string(&r).unwrap();
        assert_eq!(serde_json::from_str::<Report>(&s).unwrap(), r);
        let v: serde_json::Value = serde_json::from_str(&s).unwrap();
        for key in ["field", "tallies", "terms", "flags"] {
            assert!(v.get(key).is_some(), "{key}");
        }
        assert_eq!(v["tallies"]["by"]["2"], "3");
    }

    #[test]
    fn validate_all_fixtures() {
        assert_eq!(validate_fixtures().unwrap().len(), 13);
    }
}
