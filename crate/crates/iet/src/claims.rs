//! Cross-reference from claims to the code and checks that exercise them.
//!
//! Modules declare what they implement with header lines of the form
//! `//! claim <id>: <operation>, <operation>`. The generator collects them,
//! joins them with the fixed claim list below and fails when an in-scope
//! claim has no implementing module.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use iet_core::rational::format_rational;
use iet_core::rauzy::{expand, format_word, StopRule};
use iet_core::rigidity::rigidity_defect;
use iet_core::spectral::{rotation_rigidity, ContinuedFraction};
use iet_core::{Iet, Permutation, Rational};

use crate::error::DataError;

pub struct Claim {
    pub id: &'static str,
    pub statement: &'static str,
    /// Acceptance checks that exercise the claim.
    pub checks: &'static [&'static str],
}

macro_rules! claims {
    ($($id:literal => $stmt:literal, [$($c:literal),*];)*) => {
        &[$(Claim { id: $id, statement: $stmt, checks: &[$($c),*] }),*]
    };
}

pub const CLAIMS: &[Claim] = claims! {
    "iet-definition" => "Exact evaluation and powers of an exchange of d intervals.", ["exact_arithmetic"];
    "irreducible-permutations" => "Irreducibility test for permutations.", ["exact_arithmetic"];
    "keane-condition" => "Finite-depth check that discontinuity orbits avoid discontinuities.", [];
    "induction-matrix" => "Rauzy–Veech steps and accumulated integer matrices.", ["exact_arithmetic"];
    "balanced-matrices" => "Ratio of the largest to the smallest column sum.", ["balance_probe"];
    "dyadic-windows" => "Grouping of column norms into windows [2^i, 2^(i+1)).", ["dyadic_density"];
    "acceptable-pairs" => "Detection of steps completing a fixed positive word.", ["rigidity_scarcity"];
    "bounded-acceptable-pairs" => "Number of samples sharing one exact largest-column value.", ["rigidity_scarcity"];
    "balance-often" => "Frequency of reaching a balanced matrix within a bounded norm growth.", ["balance_probe"];
    "cylinder-size" => "Cylinder measures as inverse products of column sums.", ["cylinder_law"];
    "scarcity-estimate" => "Decay of the frequency of acceptable pairs at one exact norm m.", ["rigidity_scarcity"];
    "rigidity-defect" => "Exact mean displacement of the n-th power.", ["rotation_defect_oracle"];
    "expected-rigidity-times" => "Acceptable steps with one nearly full tower, and their exact defects.", ["dyadic_density", "expected_soundness"];
    "positive-lower-density" => "Share of dyadic windows holding expected rigidity times.", ["dyadic_density"];
    "good-times-in-a" => "Rigidity times restricted to a set of admissible times.", ["rigidity_in_a"];
    "rigidity-in-density-one-sets" => "Census of rigidity times inside sets of density 0.99.", ["rigidity_in_a"];
    "rotation-avoidance" => "Times at which a rotation stays away from the identity.", ["rigidity_in_a"];
    "spectral-moments" => "Exact correlation sequences of step functions.", ["wiener_dichotomy"];
    "wiener-dichotomy" => "Mean squared correlations.", ["wiener_dichotomy"];
    "low-correlation-density-one" => "Times at which all nearby correlations are small.", ["disjointness_witness"];
    "rigidity-kills-correlation" => "Rigidity times of a sample inside the low-correlation times of a target.", ["disjointness_witness"];
    "product-unique-ergodicity" => "Birkhoff averages of product orbits on rectangles.", ["product_unique_ergodicity"];
    "product-marginals" => "Frequencies of the first coordinate along product orbits.", ["product_unique_ergodicity"];
};

pub const OUT_OF_SCOPE: &[&str] = &[
    "Proofs of disjointness; the code only produces finite evidence.",
    "Weak mixing and total ergodicity of typical IETs.",
    "Statements about residual sets.",
    "Comparisons of rigidity sequences across different Rauzy classes.",
    "Induced maps of product systems.",
    "Products of more than two IETs.",
    "Constants known to exist but not computed.",
];

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClaimRow {
    pub id: String,
    pub statement: String,
    pub operations: Vec<String>,
    /// Source file holding the annotation, relative to the scanned root.
    pub location: String,
    pub checks: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClaimMap {
    pub rows: Vec<ClaimRow>,
    pub out_of_scope: Vec<String>,
}

/// Annotation lines of one source file: `(claim id, operations)`.
pub fn annotations(source: &str) -> Vec<(String, Vec<String>)> {
    source
        .lines()
        .map_while(|l| l.strip_prefix("//!"))
        .filter_map(|l| l.trim().strip_prefix("claim "))
        .filter_map(|rest| {
            let (id, ops) = rest.split_once(':')?;
            let ops = ops
                .split(',')
                .map(|o| o.trim().to_string())
                .filter(|o| !o.is_empty())
                .collect();
            Some((id.trim().to_string(), ops))
        })
        .collect()
}

/// Builds the map from `(path, contents)` pairs.
pub fn claim_map_from_sources(sources: &[(String, String)]) -> Result<ClaimMap, DataError> {
    let mut found: BTreeMap<String, (String, Vec<String>)> = BTreeMap::new();
    for (path, text) in sources {
        for (id, ops) in annotations(text) {
            if !CLAIMS.iter().any(|c| c.id == id) {
                return Err(DataError::UnknownClaim {
                    claim: id,
                    file: path.clone(),
                });
            }
            if let Some((first, _)) = found.get(&id) {
                return Err(DataError::DuplicateClaim {
                    claim: id,
                    first: first.clone(),
                    second: path.clone(),
                });
            }
            found.insert(id, (path.clone(), ops));
        }
    }
    let missing: Vec<String> = CLAIMS
        .iter()
        .filter(|c| found.get(c.id).is_none_or(|(_, ops)| ops.is_empty()))
        .map(|c| c.id.to_string())
        .collect();
    if !missing.is_empty() {
        return Err(DataError::UnmappedClaim(missing));
    }
    let rows = CLAIMS
        .iter()
        .map(|c| {
            let (location, operations) = found.remove(c.id).expect("checked above");
            ClaimRow {
                id: c.id.to_string(),
                statement: c.statement.to_string(),
                operations,
                location,
                checks: c.checks.iter().map(|s| s.to_string()).collect(),
            }
        })
        .collect();
    Ok(ClaimMap {
        rows,
        out_of_scope: OUT_OF_SCOPE.iter().map(|s| s.to_string()).collect(),
    })
}

/// Every `.rs` file under `<root>/crates/*/src`, sorted, with paths relative
/// to `root`.
pub fn read_sources(root: &Path) -> Result<Vec<(String, String)>, DataError> {
    let mut files = Vec::new();
    for krate in std::fs::read_dir(root.join("crates"))? {
        collect_rs(&krate?.path().join("src"), &mut files)?;
    }
    files.sort();
    files
        .into_iter()
        .map(|p| {
            let rel = p
                .strip_prefix(root)
                .unwrap_or(&p)
                .to_string_lossy()
                .replace('\\', "/");
            Ok((rel, std::fs::read_to_string(&p)?))
        })
        .collect()
}

fn collect_rs(dir: &Path, out: &mut Vec<PathBuf>) -> std::io::Result<()> {
    if !dir.is_dir() {
        return Ok(());
    }
    for entry in std::fs::read_dir(dir)? {
        let path = entry?.path();
        if path.is_dir() {
            collect_rs(&path, out)?;
        } else if path.extension().is_some_and(|e| e == "rs") {
            out.push(path);
        }
    }
    Ok(())
}

pub fn generate_claim_map(root: &Path) -> Result<ClaimMap, DataError> {
    claim_map_from_sources(&read_sources(root)?)
}

impl ClaimMap {
    pub fn to_markdown(&self) -> String {
        let mut s = String::new();
        s.push_str("# Claim map\n\n");
        s.push_str("Generated by `iet claims`; do not edit by hand. Each row names a claim, the\n");
        s.push_str("operations implementing it and the acceptance checks exercising it.\n\n");
        s.push_str("| claim | statement | operations | module | checks |\n");
        s.push_str("|---|---|---|---|---|\n");
        for r in &self.rows {
            let ops: Vec<String> = r.operations.iter().map(|o| format!("`{o}`")).collect();
            let checks = if r.checks.is_empty() {
                "unit tests".to_string()
            } else {
                r.checks.join(", ")
            };
            let _ = writeln!(
                s,
                "| {} | {} | {} | `{}` | {} |",
                r.id,
                r.statement,
                ops.join(", "),
                r.location,
                checks
            );
        }
        s.push_str("\n## Out of scope\n\n");
        for o in &self.out_of_scope {
            let _ = writeln!(s, "- {o}");
        }
        s.push('\n');
        s.push_str(&two_interval_example());
        s
    }
}

/// A worked two-interval example computed on the spot: induction on a
/// rotation runs the continued fraction algorithm, and the convergent
/// denominators are its rigidity times.
pub fn two_interval_example() -> String {
    let (a, b) = (89i64, 144i64);
    let alpha = Rational::new(a.into(), (a + b).into());
    let t = Iet::new(
        &[Rational::new(b.into(), (a + b).into()), alpha.clone()],
        Permutation::new(&[2, 1]).expect("valid"),
    )
    .expect("valid lengths");
    let state = expand(&t, StopRule::Steps(1000)).expect("irreducible");
    let cf = ContinuedFraction::of(&alpha);
    let quotients: Vec<String> = cf.quotients.iter().map(|q| q.to_string()).collect();
    let mut s = String::new();
    s.push_str("## Two intervals\n\n");
    let _ = writeln!(
        s,
        "The IET `{t}` is the rotation by `{}`. Its induction word is\n`{}`:",
        format_rational(&alpha),
        format_word(state.word())
    );
    s.push_str("runs of equal letters are the partial quotients of the continued fraction\n");
    let _ = writeln!(
        s,
        "`[{}]`, the last one shortened by the final tie.\n",
        quotients.join("; ")
    );
    s.push_str("Rigidity times of a rotation are its convergent denominators; their exact\ndefects are\n\n");
    s.push_str("| n | defect |\n|---|---|\n");
    for n in rotation_rigidity(&alpha, 8).expect("0 < alpha < 1") {
        let defect = rigidity_defect(&t, n).expect("nondegenerate");
        let _ = writeln!(s, "| {n} | {} |", format_rational(&defect));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn root() -> PathBuf {
        Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
    }

    #[test]
    fn complete_tree_maps_every_claim_once() {
        let map = generate_claim_map(&root()).unwrap();
        assert_eq!(map.rows.len(), CLAIMS.len());
        assert!(map.rows.iter().all(|r| !r.operations.is_empty()));
        let md = map.to_markdown();
        for o in OUT_OF_SCOPE {
            assert!(md.contains(o));
        }
    }

    #[test]
    fn removing_a_module_is_caught() {
        let sources: Vec<_> = read_sources(&root())
            .unwrap()
            .into_iter()
            .filter(|(p, _)| !p.ends_with("core/src/rigidity.rs"))
            .collect();
        match claim_map_from_sources(&sources) {
            Err(DataError::UnmappedClaim(ids)) => {
                assert!(ids.contains(&"good-times-in-a".to_string()))
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn duplicates_and_unknown_ids_are_errors() {
        let a = (
            "a.rs".to_string(),
            "//! claim keane-condition: f\n".to_string(),
        );
        let b = (
            "b.rs".to_string(),
            "//! x\n//! claim keane-condition: g\n".to_string(),
        );
        assert!(matches!(
            claim_map_from_sources(&[a.clone(), b]),
            Err(DataError::DuplicateClaim { .. })
        ));
        let c = (
            "c.rs".to_string(),
            "//! claim no-such-thing: f\n".to_string(),
        );
        assert!(matches!(
            claim_map_from_sources(&[a, c]),
            Err(DataError::UnknownClaim { .. })
        ));
        // annotations only count in the module header
        assert!(annotations("use x;\n//! claim keane-condition: f\n").is_empty());
    }
}
