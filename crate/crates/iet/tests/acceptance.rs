//! Acceptance run: one line per criterion.
//!
//! Runs without the libtest harness so the verdicts reach stdout even when
//! everything passes. Pass criterion numbers as arguments to run a subset.
//! The process fails when the set of failing criteria differs from
//! `KNOWN_FAILURES`; those are reported as FAIL like any other.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::Command;
use std::time::Instant;

use iet::census::run_census;
use iet::config::{SamplerConfig, SourceSpec};
use iet::record::{density_key, DetectionKind};
use iet::summary::{summarize, SummaryOptions};
use iet_core::product::{product_orbit_average, random_starts, ProductSystem, Rect, Span};
use iet_core::rational::{dist_to_int, frac, int, ratio, to_f64};
use iet_core::rauzy::{balance_probe, BalanceProbeConfig, RauzyClass, RvState, StepType, StopRule};
use iet_core::rigidity::{rigidity_defect, DensityPredicate};
use iet_core::sample::{random_below, stream, PermSource, Sampler};
use iet_core::spectral::{disjointness_witness, CorrelationSeries, StepFunction, WitnessSearch};
use iet_core::stats::within_sigmas;
use iet_core::{Iet, Permutation, PiecewiseTranslation, Rational};
use num_bigint::{BigInt, BigUint};

/// Criteria that fail at the stated tolerance; see the notes in each check.
const KNOWN_FAILURES: &[u32] = &[5, 9];

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: String) -> Self {
        Self { pass, detail }
    }
}

fn class(seed: &[usize]) -> RauzyClass {
    RauzyClass::of(&Permutation::new(seed).unwrap()).unwrap()
}

fn sampler(seed_perm: &[usize], seed: u64) -> Sampler {
    Sampler::new(PermSource::Class(class(seed_perm)), 128, seed).unwrap()
}

fn reversal(d: usize) -> Vec<usize> {
    (1..=d).rev().collect()
}

fn identity_map(t: &Iet) -> PiecewiseTranslation {
    PiecewiseTranslation::identity(t.scale().clone())
}

/// Measure preservation, inverse law, group law and the induction identity
/// at every step up to `|C_max| ≥ 2^20`.
fn exact_arithmetic() -> Outcome {
    let per_dim = [3334u64, 3333, 3333];
    let mut checked = 0u64;
    let mut steps = 0u64;
    let mut bad = Vec::new();
    let limit = BigUint::from(1u64 << 20);
    for (d, &count) in (2..=4).zip(&per_dim) {
        let s = sampler(&reversal(d), 100 + d as u64);
        for i in 0..count {
            let t = s.sample(i);
            let one = t.as_piecewise();
            let inv = t.invert().unwrap();
            let mut rng = stream(1000 + d as u64, i);
            let x = Rational::new(
                BigInt::from(random_below(&mut rng, t.scale())),
                BigInt::from(t.scale().clone()),
            );
            let p2 = t.to_piecewise(2).unwrap();
            let p3 = t.to_piecewise(3).unwrap();
            let p5 = t.to_piecewise(5).unwrap();
            let ok = one.domain_is_partition()
                && one.image_is_partition()
                && p5.image_is_partition()
                && inv.as_piecewise().compose(&one).same_map(&identity_map(&t))
                && inv.eval(&t.eval(&x).unwrap()).unwrap() == x
                && p2.compose(&p3).same_map(&p5)
                && p3.compose(&p2).same_map(&p5);
            let mut state = RvState::new(&t).unwrap();
            let mut induction_ok = state.identity_holds();
            while state.cmax() < limit && state.advance().is_ok() {
                steps += 1;
                induction_ok &= state.identity_holds();
            }
            let reached = state.cmax() >= limit || state.tie_step().is_some();
            if !(ok && induction_ok && reached) {
                bad.push((d, i));
            }
            checked += 1;
        }
    }
    Outcome::new(
        bad.is_empty(),
        format!("{checked} samples, {steps} induction steps, failures {bad:?}"),
    )
}

/// `rigidity_defect` on two-interval samples against `2{nβ}(1 − {nβ})`.
fn rotation_defect_oracle() -> Outcome {
    let s = Sampler::new(
        PermSource::Fixed(Permutation::new(&[2, 1]).unwrap()),
        128,
        2,
    )
    .unwrap();
    let mut mismatches = Vec::new();
    for i in 0..1000 {
        let t = s.sample(i);
        let beta = t.length(1);
        for n in 1..=1000u64 {
            let x = frac(&(&beta * int(n as i64)));
            let expected = int(2) * &x * (int(1) - &x);
            if rigidity_defect(&t, n).unwrap() != expected {
                mismatches.push((i, n));
            }
        }
    }
    Outcome::new(
        mismatches.is_empty(),
        format!("10^6 pairs (sample, n), mismatches {mismatches:?}"),
    )
}

/// Frequencies of the first one to three induction steps against the
/// normalised inverse products of column sums.
fn cylinder_law() -> Outcome {
    let samples = 100_000u64;
    let mut failures = Vec::new();
    let mut cylinders = 0;
    let mut ties = 0;
    for d in [2usize, 3] {
        let c = class(&reversal(d));
        let s = Sampler::new(PermSource::Class(c.clone()), 128, 30 + d as u64).unwrap();
        let mut counts: BTreeMap<(usize, Vec<StepType>), u64> = BTreeMap::new();
        for i in 0..samples {
            let t = s.sample(i);
            let start = c.index_of(t.perm()).unwrap();
            let mut state = RvState::new(&t).unwrap();
            state.run(StopRule::Steps(3));
            if state.steps() < 3 {
                ties += 1;
            }
            for k in 1..=state.steps() {
                *counts
                    .entry((start, state.word()[..k].to_vec()))
                    .or_default() += 1;
            }
        }
        for (start, perm) in c.members().iter().enumerate() {
            for k in 1..=3 {
                let words = iet_core::rauzy::all_words(perm, k);
                let total: Rational = words.iter().map(|(_, m)| m.cylinder_measure()).sum();
                for (w, m) in &words {
                    let p = m.cylinder_measure() / &total / int(c.len() as i64);
                    let seen = counts.get(&(start, w.clone())).copied().unwrap_or(0);
                    cylinders += 1;
                    if !within_sigmas(seen, samples, to_f64(&p), 3.0) {
                        failures.push(format!(
                            "d={d} {perm} {} seen {seen} p {:.5}",
                            iet_core::rauzy::format_word(w),
                            to_f64(&p)
                        ));
                    }
                }
            }
        }
    }
    Outcome::new(
        failures.is_empty(),
        format!("{cylinders} cylinders, {ties} early ties, outside 3σ: {failures:?}"),
    )
}

/// Slope of the log frequency of acceptable pairs at one exact norm.
fn rigidity_scarcity() -> Outcome {
    let mut cfg = SamplerConfig::new(SourceSpec::Class("3 2 1".into()), 100_000, 4);
    cfg.max_norm = Some(1 << 17);
    let records = run_census(&cfg).unwrap();
    let opts = SummaryOptions {
        bins: 8..=16,
        spot_every: 100,
    };
    let table = summarize(&records, &opts).unwrap();
    let spot = &table.spot_check;
    match &table.slope {
        Ok(r) => Outcome::new(
            (-1.3..=-0.8).contains(&r.slope) && spot.mismatches.is_empty() && table.errors == 0,
            format!(
                "slope {:.3} over {} windows; spot check {} defects, {} mismatches",
                r.slope,
                r.bins_used,
                spot.defects,
                spot.mismatches.len()
            ),
        ),
        Err(e) => Outcome::new(
            false,
            format!("insufficient data: {} windows with hits", e.nonempty_bins),
        ),
    }
}

fn density_census() -> Vec<iet::CensusRecord> {
    let mut cfg = SamplerConfig::new(SourceSpec::Class("3 2 1".into()), 1000, 5);
    cfg.max_norm = Some(1 << 16);
    cfg.epsilons = vec![ratio(1, 10)];
    run_census(&cfg).unwrap()
}

/// Share of samples with expected ε-rigidity times in a tenth of the windows.
///
/// Expected times need an acceptable block to end exactly when the largest
/// column carries nearly all the length; at this scale that almost never
/// happens, so this fails.
fn dyadic_density(records: &[iet::CensusRecord]) -> Outcome {
    let key = density_key(DetectionKind::Expected, &ratio(1, 10));
    let tenth = ratio(1, 10);
    let good = records
        .iter()
        .filter(|r| r.density.get(&key).is_some_and(|d| d.fraction >= tenth))
        .count();
    let detections: usize = records
        .iter()
        .map(|r| {
            r.detections
                .iter()
                .filter(|d| d.kind == DetectionKind::Expected)
                .count()
        })
        .sum();
    let with_any = records
        .iter()
        .filter(|r| r.density.get(&key).is_some_and(|d| !d.windows.is_empty()))
        .count();
    Outcome::new(
        good * 10 >= records.len() * 9,
        format!(
            "{good}/{} samples reach a tenth of windows 1..=15; {with_any} have any; {detections} expected detections",
            records.len()
        ),
    )
}

/// Exact defects of the expected detections against `2ε`.
fn expected_soundness(records: &[iet::CensusRecord]) -> Outcome {
    let table = summarize(
        records,
        &SummaryOptions {
            bins: 1..=15,
            spot_every: 1,
        },
    )
    .unwrap();
    let Some(s) = table.soundness.iter().find(|s| s.epsilon == "1/10") else {
        return Outcome::new(false, "no expected detections to assess".into());
    };
    for v in &s.violations {
        println!(
            "    violation: id {} seed {} step {} m {} defect {}",
            v.id, v.seed, v.step, v.m, v.defect
        );
    }
    Outcome::new(
        s.detections > 0
            && s.within * 100 >= s.detections * 99
            && table.spot_check.mismatches.is_empty(),
        format!(
            "{}/{} within 2ε, max defect/ε {:.2e}, spot check mismatches {}",
            s.within,
            s.detections,
            s.max_ratio,
            table.spot_check.mismatches.len()
        ),
    )
}

/// Rigidity times inside a set of density at least 0.99.
fn rigidity_in_a() -> Outcome {
    let mut cfg = SamplerConfig::new(SourceSpec::Class("3 2 1".into()), 200, 7);
    cfg.max_norm = Some(1 << 18);
    cfg.epsilons = vec![ratio(1, 10)];
    cfg.avoid = vec![(ratio(987, 1597), ratio(1, 400))];
    cfg.progressions = vec![(229, 0)];
    cfg.tower_mass = Some(ratio(7, 10));
    let density = cfg.predicate().unwrap().density_up_to(1 << 18);
    let records = run_census(&cfg).unwrap();
    let mut good = 0;
    let mut checked = 0;
    let eps = ratio(1, 10);
    let a: DensityPredicate = cfg.predicate().unwrap();
    for r in &records {
        let hit = r
            .detections
            .iter()
            .enumerate()
            .find(|(_, d)| d.kind == DetectionKind::Tower);
        let Some((j, d)) = hit else { continue };
        let defect = r.defect_of(j).unwrap();
        if d.in_a && a.contains(d.m) && d.m < 1 << 18 && *defect < eps {
            good += 1;
        }
        // second route for a tenth of the samples
        if r.id % 10 == 0 {
            let t: Iet = r.iet_text().parse().unwrap();
            assert_eq!(
                &rigidity_defect(&t, d.m).unwrap(),
                defect,
                "sample {}",
                r.id
            );
            checked += 1;
        }
    }
    Outcome::new(
        density >= ratio(99, 100) && good * 100 >= records.len() * 95,
        format!(
            "{good}/{} samples; density of A up to 2^18 is {:.5}; {checked} defects recomputed directly",
            records.len(),
            to_f64(&density)
        ),
    )
}

/// Probability of meeting a balanced matrix before the norm grows by `K^d`.
fn balance_probe_check() -> Outcome {
    let nus = [ratio(10, 1), ratio(30, 1), ratio(100, 1), ratio(300, 1)];
    let mut pass = true;
    let mut parts = Vec::new();
    for d in [3usize, 4] {
        let mut cfg = BalanceProbeConfig::new(ratio(2, 1), 10_000, 80 + d as u64);
        cfg.first_checkpoint_bits = 8;
        cfg.checkpoints = 1;
        let est = balance_probe(&class(&reversal(d)), &nus, &cfg).unwrap();
        let monotone = est.windows(2).all(|w| w[0].rho <= w[1].rho);
        let at100 = &est[2];
        pass &= monotone && at100.ci95.0 > 0.0 && at100.trials >= 9_000;
        parts.push(format!(
            "d={d}: rho(100) {:.4} ci [{:.4}, {:.4}] over {} trials, monotone {monotone}",
            to_f64(&at100.rho),
            at100.ci95.0,
            at100.ci95.1,
            at100.trials
        ));
    }
    Outcome::new(pass, parts.join("; "))
}

/// `⟨f, f∘Rⁿ⟩` for the rotation by 1/3 from interval overlaps.
fn third_rotation_oracle(n: u64) -> Rational {
    // |[0,1/2) ∩ ([0,1/2) − s)| = 1/2 − ‖s‖, minus the squared mean
    let s = dist_to_int(&ratio(n as i64, 3));
    ratio(1, 2) - s - ratio(1, 4)
}

/// Mean squared correlations: exact value for a rotation, small values for
/// random four-interval exchanges.
///
/// The random part fails: the averages do decay, but roughly like `N^-0.4`,
/// and at `N = 10^4` the median is near `0.017 c_0²`.
fn wiener_dichotomy() -> Outcome {
    let f = StepFunction::centered_indicator(&ratio(0, 1), &ratio(1, 2)).unwrap();
    let exact = ratio(11, 432);
    let oracle: Rational = (0..3)
        .map(third_rotation_oracle)
        .map(|c| &c * &c)
        .sum::<Rational>()
        / int(3);
    let rot = Iet::rotation(&ratio(1, 3)).unwrap();
    let series = CorrelationSeries::compute(&rot, &f, 300).unwrap();
    let oracle_agrees = (0..=300).all(|n| series.values()[n as usize] == third_rotation_oracle(n));
    let rotation_ok = oracle == exact
        && oracle_agrees
        && (1..=100).all(|k| series.wiener_average(3 * k).unwrap() == exact);

    let s = sampler(&reversal(4), 11);
    let mut ratios = Vec::new();
    for i in 0..20 {
        let series = CorrelationSeries::compute(&s.sample(i), &f, 10_000).unwrap();
        let c0 = series.c0().clone();
        ratios.push(series.wiener_average(10_000).unwrap() / (&c0 * &c0));
    }
    let below = ratios.iter().filter(|r| **r < ratio(1, 100)).count();
    let mut sorted: Vec<f64> = ratios.iter().map(to_f64).collect();
    sorted.sort_by(f64::total_cmp);
    Outcome::new(
        rotation_ok && below == ratios.len(),
        format!(
            "rotation 1/3 gives 11/432 at every N in 3..=300: {rotation_ok}; d=4: {below}/20 below 0.01 c0², median {:.4}, max {:.4}",
            sorted[10],
            sorted[19]
        ),
    )
}

/// Samples nearly the identity at times where a fixed target decorrelates.
fn disjointness_witness_check() -> Outcome {
    let target = sampler(&reversal(4), 2024).sample(0);
    let f = StepFunction::centered_indicator(&ratio(0, 1), &ratio(1, 2)).unwrap();
    let threshold = ratio(1, 20);
    let search = WitnessSearch {
        target: &target,
        f: &f,
        threshold: threshold.clone(),
        k_range: 2,
        horizon: 10_000,
        min_mass: ratio(1, 2),
        wanted: 0,
    };
    let out = disjointness_witness(&search, &sampler(&reversal(3), 10), 1000).unwrap();
    let mut valid = 0;
    let mut checked = 0;
    for w in out.witnesses.iter().step_by(10) {
        checked += 1;
        if w.defect < threshold
            && w.max_correlation < threshold
            && w.revalidate(&target, &f, &threshold, 2).unwrap()
        {
            valid += 1;
        }
    }
    Outcome::new(
        valid >= 10 && valid == checked,
        format!(
            "{} witnesses from {} samples; {valid}/{checked} revalidated from scratch",
            out.witnesses.len(),
            out.samples_used
        ),
    )
}

fn rects() -> Vec<Rect> {
    let span = |a, b, c, d| Span::new(ratio(a, b), ratio(c, d)).unwrap();
    vec![
        Rect {
            x: span(0, 1, 1, 2),
            y: span(0, 1, 1, 2),
        },
        Rect {
            x: span(1, 3, 2, 3),
            y: span(1, 5, 4, 5),
        },
        Rect {
            x: span(0, 1, 1, 10),
            y: span(0, 1, 1, 1),
        },
        Rect {
            x: span(1, 4, 3, 4),
            y: span(1, 2, 1, 1),
        },
        Rect {
            x: span(3, 7, 5, 7),
            y: span(2, 9, 7, 9),
        },
    ]
}

fn max_deviation(system: &ProductSystem, seed: u64, n: u64) -> f64 {
    let starts = random_starts(&mut stream(seed, 0), system, 100);
    product_orbit_average(system, &rects(), &starts, n)
        .unwrap()
        .iter()
        .map(|s| to_f64(&s.max_deviation))
        .fold(0.0, f64::max)
}

/// Birkhoff averages of a random product against a locked rotation pair.
fn product_unique_ergodicity() -> Outcome {
    let first = sampler(&reversal(3), 111).sample(0);
    let second = sampler(&reversal(3), 112).sample(0);
    let random = max_deviation(&ProductSystem::new(first, second).unwrap(), 11, 1_000_000);
    let half = Iet::rotation(&ratio(1, 2)).unwrap();
    let control = max_deviation(
        &ProductSystem::new(half.clone(), half).unwrap(),
        12,
        1_000_000,
    );
    Outcome::new(
        random < 5e-3 && control >= 5e-3,
        format!("random pair max deviation {random:.2e}; rotation 1/2 control {control:.3}"),
    )
}

fn census_file(dir: &std::path::Path, name: &str, seed: &str) -> Vec<u8> {
    let out = dir.join(name);
    let status = Command::new(env!("CARGO_BIN_EXE_iet"))
        .args([
            "census",
            "--class-seed",
            "3 2 1",
            "--samples",
            "200",
            "--seed",
            seed,
        ])
        .args([
            "--epsilon",
            "1/10",
            "--epsilon",
            "1/2",
            "--max-norm",
            "16384",
            "--events",
            "all",
        ])
        .args(["--tower-mass", "1/2", "--out"])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    std::fs::read(&out).unwrap()
}

/// Byte-identical census output for identical configurations.
fn reproducibility() -> Outcome {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("acceptance-census");
    std::fs::create_dir_all(&dir).unwrap();
    let a = census_file(&dir, "a.jsonl", "12");
    let b = census_file(&dir, "b.jsonl", "12");
    let other = census_file(&dir, "c.jsonl", "13");
    let lines = a.iter().filter(|&&c| c == b'\n').count();
    Outcome::new(
        a == b && a != other && lines == 200,
        format!(
            "{lines} lines, {} bytes, identical {}, other seed differs {}",
            a.len(),
            a == b,
            a != other
        ),
    )
}

fn main() {
    let wanted: Vec<u32> = std::env::args()
        .skip(1)
        .filter_map(|a| a.parse().ok())
        .collect();
    let on = |k: u32| wanted.is_empty() || wanted.contains(&k);
    let mut failed = Vec::new();
    let mut report = |k: u32, name: &str, run: &mut dyn FnMut() -> Outcome| {
        if !on(k) {
            return;
        }
        let start = Instant::now();
        let o = run();
        let verdict = if o.pass { "PASS" } else { "FAIL" };
        println!(
            "criterion {k:>2} {name}: {verdict} ({:.1}s) {}",
            start.elapsed().as_secs_f64(),
            o.detail
        );
        if !o.pass {
            failed.push(k);
        }
    };
    report(1, "exact_arithmetic", &mut exact_arithmetic);
    report(2, "rotation_defect_oracle", &mut rotation_defect_oracle);
    report(3, "cylinder_law", &mut cylinder_law);
    report(4, "rigidity_scarcity", &mut rigidity_scarcity);
    let mut density: Option<Vec<iet::CensusRecord>> = None;
    if on(5) || on(6) {
        density = Some(density_census());
    }
    report(5, "dyadic_density", &mut || {
        dyadic_density(density.as_ref().unwrap())
    });
    report(6, "expected_soundness", &mut || {
        expected_soundness(density.as_ref().unwrap())
    });
    report(7, "rigidity_in_a", &mut rigidity_in_a);
    report(8, "balance_probe", &mut balance_probe_check);
    report(9, "wiener_dichotomy", &mut wiener_dichotomy);
    report(10, "disjointness_witness", &mut disjointness_witness_check);
    report(
        11,
        "product_unique_ergodicity",
        &mut product_unique_ergodicity,
    );
    report(12, "reproducibility", &mut reproducibility);

    let known: Vec<u32> = KNOWN_FAILURES.iter().copied().filter(|&k| on(k)).collect();
    if failed == known {
        println!("acceptance: failures match the known list {known:?}");
    } else {
        println!("acceptance: failures {failed:?} differ from the known list {known:?}");
        std::process::exit(1);
    }
}
