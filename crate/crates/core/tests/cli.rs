use std::process::{Command, Output};

use humbert_core::byformula::PrimeTally;
use humbert_core::cli::{ComparisonReport, Report};

fn humbert(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_humbert")).args(args).output().expect("binary runs")
}

fn stdout(args: &[&str]) -> String {
    let out = humbert(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

#[test]
fn by_json() {
    let r: Report = serde_json::from_str(&stdout(&["by", "--field", "dt29", "--json"])).unwrap();
    assert_eq!(r.tallies.by, Some(PrimeTally::from_ints([(5, 2)])));
    assert_eq!(r.field, "dt29");
    assert!(!r.terms.is_empty());
    assert_eq!(r.flags.max_prime, 150);
}

#[test]
fn by_text() {
    let s = stdout(&["by", "--field", "dt64x5"]);
    assert!(s.contains("by: 2^3 11^2"), "{s}");
    assert!(s.contains("(2^2)^(3/2) 11^2"), "{s}");
    let s = stdout(&["by", "--field", "dt13"]);
    assert!(s.contains("by: 1"), "{s}");
}

#[test]
fn embed_examples() {
    assert!(stdout(&["embed", "--field", "dt29", "--p", "5"]).contains("embed at 5: 2"));
    assert!(stdout(&["embed", "--field", "dt5", "--p", "7"]).contains("embed at 7: 0"));
    assert!(stdout(&["embed", "--field", "dt64x5", "--p", "11"]).contains("embed at 11: 2"));
}

#[test]
fn embed_verbose_json_round_trip() {
    let s = stdout(&["embed", "--field", "dt29", "--p", "5", "--json", "--verbose-orbits"]);
    let r: Report = serde_json::from_str(&s).unwrap();
    assert_eq!(r.orbits.len(), 1);
    assert_eq!(r.orbits[0].count, 2);
    let again = serde_json::to_string_pretty(&r).unwrap();
    assert_eq!(again.trim_end(), s.trim_end());
}

#[test]
fn table_is_deterministic() {
    let args = ["table", "--rows", "dt29,dt61,dt32", "--json"];
    let a = stdout(&args);
    let b = stdout(&args);
    assert_eq!(a, b);
    let t: ComparisonReport = serde_json::from_str(&a).unwrap();
    assert_eq!(serde_json::to_string_pretty(&t).unwrap().trim_end(), a.trim_end());
    let names: Vec<&str> = t.rows.iter().map(|r| r.field.as_str()).collect();
    assert_eq!(names, ["dt29", "dt61", "dt32"]);
    let dt29 = &t.rows[0];
    assert!(dt29.primes.iter().all(|p| p.by_matches_embed == Some(true)));
    assert!(dt29.notes.is_empty());
    let dt61 = &t.rows[1];
    assert!(dt61.notes.iter().any(|n| n.starts_with("multiplicity at 3")), "{:?}", dt61.notes);
    let dt32 = &t.rows[2];
    assert!(dt32.notes.iter().any(|n| n.starts_with("outside hypotheses")), "{:?}", dt32.notes);
}

#[test]
fn table_skip_heavy() {
    let t: ComparisonReport =
        serde_json::from_str(&stdout(&["table", "--rows", "dt64x13,dt13", "--skip-heavy", "--json"])).unwrap();
    assert!(t.rows[0].embed.is_none());
    assert_eq!(t.rows[1].embed, Some(PrimeTally::new()));
    let text = stdout(&["table", "--rows", "dt64x13", "--skip-heavy"]);
    assert!(text.contains("embed: skipped"));
}

#[test]
fn validate_fixtures_command() {
    let s = stdout(&["validate-fixtures"]);
    assert_eq!(s.lines().count(), 13);
    assert!(s.lines().all(|l| l.contains(" ok ")));
}

#[test]
fn errors_exit_nonzero() {
    let out = humbert(&["by", "--field", "dt7"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown field"));
    let out = humbert(&["embed", "--field", "dt29", "--p", "9"]);
    assert_eq!(out.status.code(), Some(1));
    let out = humbert(&["by", "--d", "5", "--alpha0", "0", "--alpha1", "0", "--beta0", "1", "--beta1", "0"]);
    assert_eq!(out.status.code(), Some(1));
    let out = humbert(&["nonsense"]);
    assert_eq!(out.status.code(), Some(2));
}
