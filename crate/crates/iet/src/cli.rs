//! Command line: `iet <subcommand> [flags]`. Exit status 0 on success, 1 on
//! usage errors, 2 on data errors.

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use iet_core::iet::parse_lengths;
use iet_core::product::{product_orbit_average, random_starts, ProductSystem, Rect, Span};
use iet_core::rational::{format_rational, parse_rational, to_f64};
use iet_core::rauzy::{expand, RauzyClass, StepType, StopRule};
use iet_core::rigidity::{scan_rigidity, DensityPredicate};
use iet_core::sample::stream;
use iet_core::spectral::{disjointness_witness, CorrelationSeries, StepFunction, WitnessSearch};
use iet_core::{Iet, Permutation, Rational};
use num_bigint::BigUint;
use serde_json::json;

use crate::census::Census;
use crate::claims::generate_claim_map;
use crate::config::{EventLog, SamplerConfig, SourceSpec};
use crate::error::DataError;
use crate::io::{read_jsonl, write_jsonl, write_summary_csv};
use crate::record::CensusRecord;
use crate::summary::{summarize, SummaryOptions};

#[derive(Parser, Debug)]
#[command(name = "iet", version, about = "Exact interval exchange experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum Format {
    #[default]
    Jsonl,
    Csv,
}

#[derive(Args, Debug, Clone)]
pub struct SampleArgs {
    /// Fixed permutation, e.g. "3 2 1".
    #[arg(long, conflicts_with = "class_seed")]
    pub perm: Option<String>,
    /// Draw permutations from the Rauzy class of this one.
    #[arg(long)]
    pub class_seed: Option<String>,
    #[arg(long, default_value_t = 128)]
    pub denom_bits: u32,
    #[arg(long, default_value_t = 1)]
    pub samples: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

impl SampleArgs {
    fn source(&self) -> SourceSpec {
        match (&self.perm, &self.class_seed) {
            (Some(p), _) => SourceSpec::Perm(p.clone()),
            (None, Some(c)) => SourceSpec::Class(c.clone()),
            (None, None) => SourceSpec::Class("3 2 1".into()),
        }
    }
}

#[derive(Args, Debug, Clone)]
pub struct IetArgs {
    /// Comma-separated lengths, e.g. "2/5,3/5".
    #[arg(long)]
    pub lengths: String,
    #[arg(long)]
    pub perm: String,
}

impl IetArgs {
    fn iet(&self) -> Result<Iet, DataError> {
        Ok(Iet::new(
            &parse_lengths(&self.lengths)?,
            self.perm.parse()?,
        )?)
    }
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Print sampled IETs.
    Sample {
        #[command(flatten)]
        sampling: SampleArgs,
        #[arg(long, value_enum, default_value_t)]
        format: Format,
    },
    /// Trace the Rauzy–Veech expansion of one IET.
    Expand {
        #[command(flatten)]
        iet: IetArgs,
        #[arg(long)]
        max_norm: Option<u64>,
        #[arg(long)]
        max_steps: Option<usize>,
        #[arg(long, value_enum, default_value_t)]
        format: Format,
    },
    /// List the ε-rigidity times `n ≤ max-n` of one IET.
    Rigidity {
        #[command(flatten)]
        iet: IetArgs,
        #[arg(long, required = true)]
        epsilon: Vec<String>,
        #[arg(long)]
        max_n: u64,
        /// Exclude times with ‖nα‖ < δ, given as "α,δ".
        #[arg(long)]
        avoid: Vec<String>,
        #[arg(long, value_enum, default_value_t)]
        format: Format,
    },
    /// Run a census and write one JSON record per sample.
    Census {
        #[command(flatten)]
        sampling: SampleArgs,
        #[arg(long)]
        epsilon: Vec<String>,
        #[arg(long)]
        max_norm: Option<u64>,
        #[arg(long)]
        max_steps: Option<usize>,
        /// Exclude times with ‖nα‖ < δ, given as "α,δ".
        #[arg(long)]
        avoid: Vec<String>,
        /// Exclude times n ≡ r (mod m), given as "m,r".
        #[arg(long)]
        progression: Vec<String>,
        #[arg(long, value_enum, default_value_t)]
        events: EventLog,
        /// Also search tall towers of at least this mass for rigidity times.
        #[arg(long)]
        tower_mass: Option<String>,
        #[arg(long)]
        acceptable_defects: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Aggregate census records.
    Summarize {
        input: PathBuf,
        #[arg(long, default_value_t = 1)]
        min_bin: u32,
        #[arg(long, default_value_t = 16)]
        max_bin: u32,
        /// Recompute the defects of every n-th record; 0 disables.
        #[arg(long, default_value_t = 100)]
        spot_every: u64,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Correlations, Wiener averages and disjointness witnesses.
    Spectral {
        #[command(flatten)]
        iet: IetArgs,
        #[arg(long, default_value_t = 1000)]
        max_n: u64,
        /// The step function is the centred indicator of [a, b), given as "a,b".
        #[arg(long, default_value = "0,1/2")]
        indicator: String,
        /// Search this many samples for witnesses.
        #[arg(long)]
        witness_samples: Option<u64>,
        #[arg(long, default_value = "1/20")]
        threshold: String,
        #[arg(long, default_value_t = 2)]
        k_range: usize,
        #[arg(long, default_value = "3 2 1")]
        class_seed: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Birkhoff averages of a product system on rectangles.
    Product {
        #[command(flatten)]
        iet: IetArgs,
        #[arg(long)]
        second_lengths: String,
        #[arg(long)]
        second_perm: String,
        /// Rectangle "a,b,c,d" for [a, b) × [c, d); repeatable.
        #[arg(long)]
        rect: Vec<String>,
        #[arg(long, default_value_t = 10)]
        starts: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 10_000)]
        horizon: u64,
        #[arg(long, value_enum, default_value_t)]
        format: Format,
    },
    /// List a Rauzy class with its two successors per member.
    Class {
        #[arg(long)]
        perm: String,
    },
    /// Write the claim map of a source tree as markdown.
    Claims {
        #[arg(long, default_value = ".")]
        root: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Parses `argv` (including the program name) and runs the command.
pub fn cli_main<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
                    let _ = write!(stdout, "{}", e.render());
                    0
                }
                _ => {
                    let _ = write!(stderr, "{}", e.render());
                    1
                }
            };
        }
    };
    match run(cli.command, stdout) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            2
        }
    }
}

fn ratio(s: &str) -> Result<Rational, DataError> {
    Ok(parse_rational(s.trim())?)
}

fn pair<T>(s: &str, f: impl Fn(&str) -> Result<T, DataError>) -> Result<(T, T), DataError> {
    let (a, b) = s.split_once(',').ok_or_else(|| {
        DataError::Config(format!("expected two comma-separated values, got `{s}`"))
    })?;
    Ok((f(a)?, f(b)?))
}

fn integer(s: &str) -> Result<u64, DataError> {
    s.trim()
        .parse()
        .map_err(|_| DataError::Config(format!("not an integer: `{s}`")))
}

fn create(path: &Path) -> Result<BufWriter<File>, DataError> {
    Ok(BufWriter::new(File::create(path)?))
}

fn run(command: Command, stdout: &mut dyn Write) -> Result<(), DataError> {
    match command {
        Command::Sample { sampling, format } => {
            let mut cfg = SamplerConfig::new(sampling.source(), sampling.samples, sampling.seed);
            cfg.denom_bits = sampling.denom_bits;
            let sampler = cfg.sampler()?;
            if format == Format::Csv {
                writeln!(stdout, "id,lengths,perm")?;
            }
            for i in 0..sampling.samples {
                let t = sampler.sample(i);
                let (lengths, perm) = t
                    .to_string()
                    .split_once(';')
                    .map(|(a, b)| (a.to_string(), b.to_string()))
                    .expect("text form");
                match format {
                    Format::Jsonl => write_jsonl(stdout, &json!({"id": i, "iet": t.to_string()}))?,
                    Format::Csv => writeln!(stdout, "{i},\"{lengths}\",{perm}")?,
                }
            }
        }
        Command::Expand {
            iet,
            max_norm,
            max_steps,
            format,
        } => {
            let t = iet.iet()?;
            let norm = max_norm.map(BigUint::from);
            let stop = match (max_steps, &norm) {
                (Some(s), Some(n)) => StopRule::StepsOrNorm(s, n),
                (None, Some(n)) => StopRule::Norm(n),
                (s, None) => StopRule::Steps(s.unwrap_or(100)),
            };
            let state = expand(&t, stop)?;
            if format == Format::Csv {
                writeln!(stdout, "step,type,perm,cmax,balance")?;
            }
            for (e, (step, perm)) in state
                .events()
                .iter()
                .zip(state.word().iter().zip(&state.perm_trace()[1..]))
            {
                let kind = match step {
                    StepType::A => 'A',
                    StepType::B => 'B',
                };
                match format {
                    Format::Jsonl => write_jsonl(
                        stdout,
                        &json!({"step": e.step, "type": kind.to_string(), "perm": perm.to_string(),
                                "cmax": e.cmax.to_string(), "balance": format_rational(&e.balance)}),
                    )?,
                    Format::Csv => writeln!(
                        stdout,
                        "{},{kind},{perm},{},{}",
                        e.step,
                        e.cmax,
                        format_rational(&e.balance)
                    )?,
                }
            }
            if let Some(tie) = state.tie_step() {
                writeln!(stdout, "# tie after step {tie}")?;
            }
        }
        Command::Rigidity {
            iet,
            epsilon,
            max_n,
            avoid,
            format,
        } => {
            let t = iet.iet()?;
            let mut a = DensityPredicate::all();
            for s in &avoid {
                let (alpha, delta) = pair(s, ratio)?;
                a = a.avoiding_rotation(alpha, delta)?;
            }
            if format == Format::Csv {
                writeln!(stdout, "epsilon,n,defect")?;
            }
            for e in &epsilon {
                let eps = ratio(e)?;
                let report = scan_rigidity(&t, &eps, max_n, &a)?;
                match format {
                    Format::Jsonl => {
                        let hits: Vec<_> = report
                            .detections
                            .iter()
                            .map(|d| json!({"n": d.n, "defect": format_rational(&d.defect)}))
                            .collect();
                        write_jsonl(
                            stdout,
                            &json!({"epsilon": format_rational(&eps), "hits": hits}),
                        )?;
                    }
                    Format::Csv => {
                        for d in &report.detections {
                            writeln!(
                                stdout,
                                "{},{},{}",
                                format_rational(&eps),
                                d.n,
                                format_rational(&d.defect)
                            )?;
                        }
                    }
                }
            }
        }
        Command::Census {
            sampling,
            epsilon,
            max_norm,
            max_steps,
            avoid,
            progression,
            events,
            tower_mass,
            acceptable_defects,
            out,
        } => {
            let mut cfg = SamplerConfig::new(sampling.source(), sampling.samples, sampling.seed);
            cfg.denom_bits = sampling.denom_bits;
            if max_norm.is_some() || max_steps.is_some() {
                cfg.max_norm = max_norm;
                cfg.max_steps = max_steps;
            }
            cfg.epsilons = epsilon.iter().map(|e| ratio(e)).collect::<Result<_, _>>()?;
            cfg.avoid = avoid
                .iter()
                .map(|s| pair(s, ratio))
                .collect::<Result<_, _>>()?;
            cfg.progressions = progression
                .iter()
                .map(|s| pair(s, integer))
                .collect::<Result<_, _>>()?;
            cfg.events = events;
            cfg.tower_mass = tower_mass.as_deref().map(ratio).transpose()?;
            cfg.acceptable_defects = acceptable_defects;
            let census = Census::new(cfg)?;
            match &out {
                Some(p) => {
                    let mut w = create(p)?;
                    census.run(|r| write_jsonl(&mut w, &r))?;
                    w.flush()?;
                }
                None => {
                    census.run(|r| write_jsonl(stdout, &r))?;
                }
            }
        }
        Command::Summarize {
            input,
            min_bin,
            max_bin,
            spot_every,
            out,
            format,
        } => {
            let records: Vec<CensusRecord> = read_jsonl(BufReader::new(File::open(&input)?))?;
            let opts = SummaryOptions {
                bins: min_bin..=max_bin,
                spot_every,
            };
            let table = summarize(&records, &opts)?;
            let mut w: Box<dyn Write + '_> = match &out {
                Some(p) => Box::new(create(p)?),
                None => Box::new(&mut *stdout),
            };
            match format {
                Format::Csv => write_summary_csv(&mut w, &table)?,
                Format::Jsonl => write_jsonl(&mut w, &table)?,
            }
            w.flush()?;
        }
        Command::Spectral {
            iet,
            max_n,
            indicator,
            witness_samples,
            threshold,
            k_range,
            class_seed,
            seed,
        } => {
            let t = iet.iet()?;
            let (a, b) = pair(&indicator, ratio)?;
            let f = StepFunction::centered_indicator(&a, &b)?;
            let series = CorrelationSeries::compute(&t, &f, max_n)?;
            let n =
                usize::try_from(max_n).map_err(|_| DataError::Config("max-n too large".into()))?;
            let w = series.wiener_average(n.max(1))?;
            let c0 = series.c0().clone();
            write_jsonl(
                stdout,
                &json!({"c0": format_rational(&c0), "n": n.max(1), "wiener": format_rational(&w),
                        "wiener_over_c0_sq": to_f64(&(&w / (&c0 * &c0)))}),
            )?;
            if let Some(budget) = witness_samples {
                let mut cfg = SamplerConfig::new(SourceSpec::Class(class_seed), 1, seed);
                cfg.denom_bits = 128;
                let search = WitnessSearch {
                    target: &t,
                    f: &f,
                    threshold: ratio(&threshold)?,
                    k_range,
                    horizon: max_n,
                    min_mass: Rational::new(1.into(), 2.into()),
                    wanted: 0,
                };
                let outcome = disjointness_witness(&search, &cfg.sampler()?, budget)?;
                for wit in &outcome.witnesses {
                    write_jsonl(
                        stdout,
                        &json!({"sample": wit.sample_index, "iet": wit.sample.to_string(), "n": wit.n,
                                "defect": format_rational(&wit.defect),
                                "max_correlation": format_rational(&wit.max_correlation)}),
                    )?;
                }
            }
        }
        Command::Product {
            iet,
            second_lengths,
            second_perm,
            rect,
            starts,
            seed,
            horizon,
            format,
        } => {
            let second = IetArgs {
                lengths: second_lengths,
                perm: second_perm,
            };
            let system = ProductSystem::new(iet.iet()?, second.iet()?)?;
            let rects = if rect.is_empty() {
                vec![Rect {
                    x: Span::unit(),
                    y: Span::unit(),
                }]
            } else {
                rect.iter()
                    .map(|r| parse_rect(r))
                    .collect::<Result<_, _>>()?
            };
            let points = random_starts(&mut stream(seed, 0), &system, starts as usize);
            let stats = product_orbit_average(&system, &rects, &points, horizon)?;
            if format == Format::Csv {
                writeln!(stdout, "rect,target,max_deviation,mean")?;
            }
            for s in &stats {
                let mean =
                    s.averages.iter().map(to_f64).sum::<f64>() / s.averages.len().max(1) as f64;
                let r = format!(
                    "{},{},{},{}",
                    format_rational(&s.rect.x.lo),
                    format_rational(&s.rect.x.hi),
                    format_rational(&s.rect.y.lo),
                    format_rational(&s.rect.y.hi)
                );
                match format {
                    Format::Jsonl => write_jsonl(
                        stdout,
                        &json!({"rect": r, "n": s.n, "target": format_rational(&s.target),
                                "max_deviation": format_rational(&s.max_deviation), "mean": mean}),
                    )?,
                    Format::Csv => writeln!(
                        stdout,
                        "\"{r}\",{},{},{mean}",
                        format_rational(&s.target),
                        format_rational(&s.max_deviation)
                    )?,
                }
            }
        }
        Command::Class { perm } => {
            let p: Permutation = perm.parse()?;
            let class = RauzyClass::of(&p)?;
            writeln!(stdout, "index,perm,a,b")?;
            for (i, m) in class.members().iter().enumerate() {
                writeln!(
                    stdout,
                    "{i},{m},{},{}",
                    class.successor(i, StepType::A),
                    class.successor(i, StepType::B)
                )?;
            }
        }
        Command::Claims { root, out } => {
            let md = generate_claim_map(&root)?.to_markdown();
            match out {
                Some(p) => std::fs::write(p, md)?,
                None => stdout.write_all(md.as_bytes())?,
            }
        }
    }
    Ok(())
}

fn parse_rect(s: &str) -> Result<Rect, DataError> {
    let v: Vec<Rational> = s.split(',').map(ratio).collect::<Result<_, _>>()?;
    let [a, b, c, d] = <[Rational; 4]>::try_from(v)
        .map_err(|_| DataError::Config(format!("rectangle needs four endpoints: `{s}`")))?;
    Ok(Rect {
        x: Span::new(a, b)?,
        y: Span::new(c, d)?,
    })
}
