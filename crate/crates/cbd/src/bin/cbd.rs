//! Command-line front end: file in, verdict out.
//!
//! Exit codes: 0 success, 1 domain negative (invalid system, or a
//! hidden-variable model was requested for a contextual system), 2 parse
//! or read failure, 3 capacity exceeded, 4 wrong shape for the closed-form
//! criterion.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::mpsc;

use clap::{Parser, Subcommand};
use serde::Serialize;

use cbd::coupling::{Analyzer, CouplingError};
use cbd::cyclic::{is_cyclic3, suppes_zanotti_value};
use cbd::hv::{extract, realize};
use cbd::io::{canonical_json, HvModelFile, LayoutFile, Report, SystemFile};
use cbd::rational::Rational;
use cbd::system::System;

const EXIT_DOMAIN: u8 = 1;
const EXIT_PARSE: u8 = 2;
const EXIT_CAPACITY: u8 = 3;
const EXIT_SHAPE: u8 = 4;

#[derive(Parser)]
#[command(
    name = "cbd",
    about = "Exact contextuality analysis for systems of dichotomous random variables",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check that a system file parses and satisfies every invariant.
    Validate {
        path: PathBuf,
        /// Emit a canonical JSON report instead of plain text.
        #[arg(long)]
        json: bool,
    },
    /// Compute delta0, delta_max, the contextuality measure, and the
    /// verdict for one or more system files.
    Analyze {
        #[arg(required = true)]
        paths: Vec<PathBuf>,
        /// Include the optimal witness coupling in the report.
        #[arg(long)]
        witness: bool,
        /// Emit a canonical JSON report instead of plain text.
        #[arg(long)]
        json: bool,
        /// Capacity cap on the slot count K (the LP has 2^K columns).
        #[arg(long, default_value_t = cbd::coupling::DEFAULT_MAX_SLOTS)]
        max_slots: usize,
        /// Analyze up to this many input files concurrently.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Apply the closed-form Suppes-Zanotti criterion to a consistently
    /// connected rank-3 cyclic system and cross-check it against the LP.
    Criterion {
        path: PathBuf,
        /// Emit a canonical JSON report instead of plain text.
        #[arg(long)]
        json: bool,
    },
    /// Extract an explicit hidden-variable model, if the system admits
    /// one, and write it to a file.
    ExtractHv {
        path: PathBuf,
        /// Output path for the hidden-variable model file.
        out: PathBuf,
        /// Capacity cap on the slot count K.
        #[arg(long, default_value_t = cbd::coupling::DEFAULT_MAX_SLOTS)]
        max_slots: usize,
    },
    /// Push a hidden-variable model through a context layout and write
    /// the resulting system file.
    Simulate {
        model: PathBuf,
        /// Layout file naming each context and its ordered contents.
        #[arg(long)]
        layout: PathBuf,
        /// Output path for the system file.
        out: PathBuf,
    },
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn new(code: u8, message: impl Into<String>) -> Failure {
        Failure {
            code,
            message: message.into(),
        }
    }
}

fn read_file(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| {
        Failure::new(EXIT_PARSE, format!("cannot read {}: {e}", path.display()))
    })
}

fn write_file(path: &Path, text: &str) -> Result<(), Failure> {
    std::fs::write(path, text).map_err(|e| {
        Failure::new(EXIT_DOMAIN, format!("cannot write {}: {e}", path.display()))
    })
}

fn parse_failure(path: &Path, err: &serde_json::Error) -> Failure {
    Failure::new(
        EXIT_PARSE,
        format!(
            "parse error in {} at line {}, column {}: {err}",
            path.display(),
            err.line(),
            err.column()
        ),
    )
}

fn load_system(path: &Path) -> Result<System, Failure> {
    let text = read_file(path)?;
    let file = SystemFile::parse(&text).map_err(|e| parse_failure(path, &e))?;
    file.to_system().map_err(|report| {
        let mut message = format!("{} is not a valid system:", path.display());
        for v in &report.violations {
            message.push_str(&format!("\n  {v}"));
        }
        Failure::new(EXIT_DOMAIN, message)
    })
}

fn capacity_failure(err: CouplingError) -> Failure {
    match err {
        CouplingError::Capacity { .. } => Failure::new(EXIT_CAPACITY, err.to_string()),
        other => Failure::new(EXIT_DOMAIN, other.to_string()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("{}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Validate { path, json } => cmd_validate(&path, json),
        Command::Analyze {
            paths,
            witness,
            json,
            max_slots,
            jobs,
        } => cmd_analyze(&paths, witness, json, max_slots, jobs),
        Command::Criterion { path, json } => cmd_criterion(&path, json),
        Command::ExtractHv {
            path,
            out,
            max_slots,
        } => cmd_extract_hv(&path, &out, max_slots),
        Command::Simulate { model, layout, out } => cmd_simulate(&model, &layout, &out),
    }
}

#[derive(Serialize)]
struct ValidationJson {
    valid: bool,
    violations: Vec<String>,
}

fn cmd_validate(path: &Path, json: bool) -> Result<(), Failure> {
    let text = read_file(path)?;
    let file = SystemFile::parse(&text).map_err(|e| parse_failure(path, &e))?;
    let report = file.validate();
    let payload = ValidationJson {
        valid: report.is_valid(),
        violations: report.violations.iter().map(|v| v.to_string()).collect(),
    };
    if report.is_valid() {
        if json {
            print!("{}", canonical_json(&payload));
        } else {
            println!("ok: {} is a valid system", path.display());
        }
        Ok(())
    } else if json {
        print!("{}", canonical_json(&payload));
        Err(Failure::new(EXIT_DOMAIN, format!("{} is invalid", path.display())))
    } else {
        let mut message = format!("{} is not a valid system:", path.display());
        for v in &report.violations {
            message.push_str(&format!("\n  {v}"));
        }
        Err(Failure::new(EXIT_DOMAIN, message))
    }
}

#[derive(Serialize)]
struct PathReport {
    path: String,
    report: Report,
}

fn analyze_one(path: &Path, witness: bool, max_slots: usize) -> Result<(System, Report), Failure> {
    let system = load_system(path)?;
    let analyzer = Analyzer::with_max_slots(max_slots);
    let report = Report::build(&system, &analyzer, witness).map_err(capacity_failure)?;
    Ok((system, report))
}

fn render_analysis(path: &Path, system: &System, report: &Report) -> String {
    let mut out = format!(
        "system: {} ({} contents, {} contexts, {} slots)\n",
        path.display(),
        system.contents().len(),
        system.contexts().len(),
        system.slots().len()
    );
    out.push_str(&report.render_text());
    out
}

fn cmd_analyze(
    paths: &[PathBuf],
    witness: bool,
    json: bool,
    max_slots: usize,
    jobs: usize,
) -> Result<(), Failure> {
    let results = run_parallel(paths, jobs.max(1), |path| {
        analyze_one(path, witness, max_slots)
    });

    // Output and exit code follow input order no matter how the jobs
    // finished.
    let mut reports = Vec::with_capacity(paths.len());
    for (path, result) in paths.iter().zip(results) {
        match result {
            Ok((system, report)) => reports.push((path, system, report)),
            Err(f) => {
                flush_reports(&reports, json);
                return Err(f);
            }
        }
    }
    flush_reports(&reports, json);
    Ok(())
}

fn flush_reports(reports: &[(&PathBuf, System, Report)], json: bool) {
    if json {
        match reports {
            [] => {}
            [(_, _, report)] => print!("{}", canonical_json(report)),
            many => {
                let payload: Vec<PathReport> = many
                    .iter()
                    .map(|(path, _, report)| PathReport {
                        path: path.display().to_string(),
                        report: report.clone(),
                    })
                    .collect();
                print!("{}", canonical_json(&payload));
            }
        }
    } else {
        for (i, (path, system, report)) in reports.iter().enumerate() {
            if i > 0 {
                println!();
            }
            print!("{}", render_analysis(path, system, report));
        }
    }
}

/// Runs `work` over the paths with at most `jobs` worker threads, keeping
/// results indexed by input position.
fn run_parallel<T: Send>(
    paths: &[PathBuf],
    jobs: usize,
    work: impl Fn(&Path) -> T + Sync,
) -> Vec<T> {
    let next = AtomicUsize::new(0);
    let (tx, rx) = mpsc::channel::<(usize, T)>();
    std::thread::scope(|scope| {
        for _ in 0..jobs.min(paths.len()) {
            let tx = tx.clone();
            let next = &next;
            let work = &work;
            scope.spawn(move || loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                if i >= paths.len() {
                    break;
                }
                let _ = tx.send((i, work(&paths[i])));
            });
        }
        drop(tx);
        let mut slots: Vec<Option<T>> = (0..paths.len()).map(|_| None).collect();
        for (i, value) in rx {
            slots[i] = Some(value);
        }
        slots
            .into_iter()
            .map(|v| v.expect("every index was processed"))
            .collect()
    })
}

#[derive(Serialize)]
struct CriterionJson {
    sz_value: Rational,
    criterion_verdict: String,
    lp_verdict: String,
    measure: Rational,
    agree: bool,
}

fn cmd_criterion(path: &Path, json: bool) -> Result<(), Failure> {
    let system = load_system(path)?;
    let view = is_cyclic3(&system).ok_or_else(|| {
        Failure::new(
            EXIT_SHAPE,
            "system is not a rank-3 cyclic system; run `cbd analyze` for the general LP verdict",
        )
    })?;
    let (consistent, _) = system.is_consistently_connected();
    if !consistent {
        return Err(Failure::new(
            EXIT_SHAPE,
            "system is not consistently connected, the closed-form criterion does not apply; \
             run `cbd analyze` for the general LP verdict",
        ));
    }
    let value = suppes_zanotti_value(&view);
    let criterion_contextual = value > Rational::one();
    let result = Analyzer::default().analyze(&system).map_err(capacity_failure)?;
    let verdict = |contextual: bool| if contextual { "contextual" } else { "noncontextual" };

    let agree = criterion_contextual == !result.noncontextual;
    let payload = CriterionJson {
        sz_value: value.clone(),
        criterion_verdict: verdict(criterion_contextual).to_string(),
        lp_verdict: verdict(!result.noncontextual).to_string(),
        measure: result.measure.clone(),
        agree,
    };
    if json {
        print!("{}", canonical_json(&payload));
    } else {
        println!(
            "cycle: {} -> {} -> {}",
            view.contents[0], view.contents[1], view.contents[2]
        );
        println!("suppes-zanotti value: {value}");
        println!("criterion verdict:    {}", payload.criterion_verdict);
        println!(
            "lp verdict:           {} (measure {})",
            payload.lp_verdict, payload.measure
        );
    }
    if !agree {
        return Err(Failure::new(
            EXIT_DOMAIN,
            "criterion and LP verdicts disagree; this is a bug",
        ));
    }
    Ok(())
}

fn cmd_extract_hv(path: &Path, out: &Path, max_slots: usize) -> Result<(), Failure> {
    let system = load_system(path)?;
    let analyzer = Analyzer::with_max_slots(max_slots);
    let (consistent, violations) = system.is_consistently_connected();
    let result = analyzer.analyze(&system).map_err(capacity_failure)?;
    if !consistent || !result.noncontextual {
        let mut message = String::from(
            "no hidden-variable model with context-independent responses exists:",
        );
        message.push_str(&format!("\n  contextuality measure: {}", result.measure));
        for v in &violations {
            message.push_str(&format!(
                "\n  inconsistent connection: {} has Pr[+1] {} in {} but {} in {}",
                v.pair.content, v.prob_plus_a, v.pair.context_a, v.prob_plus_b, v.pair.context_b
            ));
        }
        return Err(Failure::new(EXIT_DOMAIN, message));
    }
    // Noncontextual and consistently connected: the optimal witness agrees
    // on every connection with probability 1, so extraction cannot fail.
    let model = extract(&result.witness)
        .expect("witness of a noncontextual consistently connected system is identically connected");
    write_file(out, &canonical_json(&HvModelFile::from_model(&model)))?;
    println!(
        "wrote hidden-variable model with {} states to {}",
        model.states().len(),
        out.display()
    );
    Ok(())
}

fn cmd_simulate(model_path: &Path, layout_path: &Path, out: &Path) -> Result<(), Failure> {
    let model_text = read_file(model_path)?;
    let model_file =
        HvModelFile::parse(&model_text).map_err(|e| parse_failure(model_path, &e))?;
    let model = model_file
        .to_model()
        .map_err(|e| Failure::new(EXIT_DOMAIN, e.to_string()))?;
    let layout_text = read_file(layout_path)?;
    let layout_file =
        LayoutFile::parse(&layout_text).map_err(|e| parse_failure(layout_path, &e))?;
    let system = realize(&model, &layout_file.to_layout())
        .map_err(|e| Failure::new(EXIT_DOMAIN, e.to_string()))?;
    write_file(out, &canonical_json(&SystemFile::from_system(&system)))?;
    println!(
        "wrote system with {} contexts over {} contents to {}",
        system.contexts().len(),
        system.contents().len(),
        out.display()
    );
    Ok(())
}
