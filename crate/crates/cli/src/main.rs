//! Command-line front end: channel analysis, code audits, and randomized
//! verification suites.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use chanket::channel::StandardChannel;
use chanket::codes::{
    builtin_code, code_channel_ket, error_family_with_base, knill_laflamme, s_equals_2t_check,
    security, singleton_check, singleton_saturated, CodeSpec, KLReport, SecurityReport,
};
use chanket::infoloc::{all_info_present, cq_structure, CQReport, InfoVerdict, PreProbability};
use chanket::json::ChannelSpec;
use chanket::opbasis::{pauli_expand, CoefficientTensor};
use chanket::suites;
use chanket::{ChannelBundle, Config, Ket, LinearMap, Operator};

#[derive(Parser)]
#[command(name = "chanket", version, about = "Channel representations, information location, and code audits")]
struct Cli {
    /// Absolute numerical tolerance for every verdict.
    #[arg(long, global = true, default_value_t = 1e-9)]
    tol: f64,
    /// Seed for the randomized suites; fixed seed means byte-identical output.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Worker threads for parallel sweeps (defaults to all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Subcommand)]
enum Command {
    /// Convert a channel into all of its representations and report verdicts.
    Analyze {
        /// Built-in family: bit_flip, amplitude_damping, or depolarizing.
        #[arg(long, conflicts_with = "spec")]
        standard: Option<String>,
        /// Error probability for the built-in family.
        #[arg(long, requires = "standard")]
        p: Option<f64>,
        /// JSON channel specification file.
        #[arg(long)]
        spec: Option<PathBuf>,
    },
    /// Audit a quantum error-correcting code: security, recovery condition,
    /// Singleton bound.
    CodeAudit {
        /// Built-in code: repetition3 or five_qubit.
        #[arg(long, conflicts_with = "spec")]
        builtin: Option<String>,
        /// JSON code specification file.
        #[arg(long)]
        spec: Option<PathBuf>,
        /// Error family for the recovery check: pauli1 (every single-carrier
        /// basis element) or bitflip (single-carrier flips only).
        #[arg(long, default_value = "pauli1")]
        errors: String,
        /// Largest subset size swept by the security search
        /// (default: floor(n/2)).
        #[arg(long)]
        max_check: Option<usize>,
        /// Number of correctable errors assumed in the bound checks.
        #[arg(long, default_value_t = 1)]
        t: usize,
    },
    /// Run a randomized verification suite.
    Verify {
        /// theorems, fourkets, mixedenv, routes, isometry, cq, correlations,
        /// or all.
        suite: String,
        /// Instances per check.
        #[arg(short = 'n', long, default_value_t = 200)]
        instances: usize,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(jobs) = cli.jobs {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global();
    }
    let cfg = Config::with_tol(cli.tol);
    match run(&cli, &cfg) {
        Ok(code) => code,
        Err(failure) => {
            eprintln!("error: {}", failure.message);
            failure.exit
        }
    }
}

struct Failure {
    message: String,
    exit: ExitCode,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure {
            message: message.into(),
            exit: ExitCode::from(2),
        }
    }

    fn verdict(message: impl Into<String>) -> Self {
        Failure {
            message: message.into(),
            exit: ExitCode::from(1),
        }
    }
}

impl From<chanket::Error> for Failure {
    fn from(e: chanket::Error) -> Self {
        Failure::verdict(e.to_string())
    }
}

fn run(cli: &Cli, cfg: &Config) -> Result<ExitCode, Failure> {
    match &cli.command {
        Command::Analyze { standard, p, spec } => {
            let channel_spec = channel_spec_from_args(standard.as_deref(), *p, spec.as_deref())?;
            let bundle = channel_spec.build(cfg)?;
            let report = analyze(&channel_spec, &bundle, cfg)?;
            match cli.format {
                Format::Json => print_json(&report),
                Format::Text => print_analyze_text(&report),
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::CodeAudit {
            builtin,
            spec,
            errors,
            max_check,
            t,
        } => {
            let (name, code) = code_from_args(builtin.as_deref(), spec.as_deref(), cfg)?;
            let report = code_audit(&name, &code, errors, *max_check, *t, cfg)?;
            match cli.format {
                Format::Json => print_json(&report),
                Format::Text => print_code_audit_text(&report),
            }
            if report.knill_laflamme.passes {
                Ok(ExitCode::SUCCESS)
            } else {
                Ok(ExitCode::from(1))
            }
        }
        Command::Verify { suite, instances } => {
            let checks = run_suite(suite, cli.seed, *instances, cfg)?;
            match cli.format {
                Format::Json => print_json(&checks),
                Format::Text => {
                    for check in &checks {
                        println!(
                            "{}: {} (instances {}, failures {}, worst {:.3e}, threshold {:.0e})",
                            check.name,
                            if check.passed() { "PASS" } else { "FAIL" },
                            check.instances,
                            check.failures,
                            check.worst,
                            check.threshold
                        );
                    }
                }
            }
            if checks.iter().all(|c| c.passed()) {
                Ok(ExitCode::SUCCESS)
            } else {
                Ok(ExitCode::from(1))
            }
        }
    }
}

fn channel_spec_from_args(
    standard: Option<&str>,
    p: Option<f64>,
    spec: Option<&std::path::Path>,
) -> Result<ChannelSpec, Failure> {
    match (standard, spec) {
        (Some(name), None) => {
            let kind: StandardChannel = name
                .parse()
                .map_err(|e: chanket::Error| Failure::usage(e.to_string()))?;
            Ok(ChannelSpec::Standard {
                name: kind,
                p: p.unwrap_or(0.0),
            })
        }
        (None, Some(path)) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
            serde_json::from_str(&text)
                .map_err(|e| Failure::usage(format!("{}: {e}", path.display())))
        }
        _ => Err(Failure::usage("provide exactly one of --standard or --spec")),
    }
}

fn code_from_args(
    builtin: Option<&str>,
    spec: Option<&std::path::Path>,
    cfg: &Config,
) -> Result<(String, CodeSpec), Failure> {
    match (builtin, spec) {
        (Some(name), None) => Ok((
            name.to_string(),
            builtin_code(name, cfg).map_err(|e| Failure::usage(e.to_string()))?,
        )),
        (None, Some(path)) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
            let code: CodeSpec = serde_json::from_str(&text)
                .map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
            Ok((path.display().to_string(), code))
        }
        _ => Err(Failure::usage("provide exactly one of --builtin or --spec")),
    }
}

#[derive(Serialize)]
struct AnalyzeReport {
    channel: ChannelSpec,
    entrance_dim: usize,
    exit_dim: usize,
    env_dim: usize,
    channel_ket: Ket,
    dynamical: Operator,
    transition: Operator,
    transition_table: CoefficientTensor,
    dynamical_table: CoefficientTensor,
    kraus: Vec<LinearMap>,
    kraus_rank: usize,
    all_information_at_exit: InfoVerdict,
    cq: CQReport,
}

fn analyze(
    spec: &ChannelSpec,
    bundle: &ChannelBundle,
    cfg: &Config,
) -> Result<AnalyzeReport, Failure> {
    let pp = PreProbability::Channel(bundle.clone());
    let exit = bundle.exit_label().to_string();
    let all_at_exit = all_info_present(&pp, &[bundle.entrance_label()], &[&exit], cfg)?;
    let cq = cq_structure(bundle.dynamical(), cfg)?;
    Ok(AnalyzeReport {
        channel: spec.clone(),
        entrance_dim: bundle.entrance_dim(),
        exit_dim: bundle.isometry().codomain().dims()[0],
        env_dim: bundle.isometry().codomain().dims()[1],
        channel_ket: bundle.ket().clone(),
        dynamical: bundle.dynamical().clone(),
        transition: bundle.transition().clone(),
        transition_table: pauli_expand(bundle.transition(), cfg)?,
        dynamical_table: pauli_expand(bundle.dynamical(), cfg)?,
        kraus: bundle.kraus().to_vec(),
        kraus_rank: bundle.kraus_rank(),
        all_information_at_exit: all_at_exit,
        cq,
    })
}

fn print_coefficient_table(table: &CoefficientTensor) {
    let dims = table.dims();
    if dims.len() != 2 {
        println!("  (coefficients over {dims:?})");
        return;
    }
    let basis_a = chanket::opbasis::hermitian_basis(dims[0]).expect("dims >= 2");
    let basis_b = chanket::opbasis::hermitian_basis(dims[1]).expect("dims >= 2");
    print!("        ");
    for k in 0..dims[1] * dims[1] {
        print!("{:>10}", basis_b.label(k));
    }
    println!();
    for j in 0..dims[0] * dims[0] {
        print!("  {:>6}", basis_a.label(j));
        for k in 0..dims[1] * dims[1] {
            print!("{:>10.5}", table.value(&[j, k]));
        }
        println!();
    }
    println!("  normalization: {}", table.normalization());
}

fn verdict_line(v: &InfoVerdict) -> String {
    format!("{:?} (residual {:.3e})", v.verdict, v.residual)
}

fn print_analyze_text(report: &AnalyzeReport) {
    println!(
        "channel: entrance {}, exit {}, environment {}",
        report.entrance_dim, report.exit_dim, report.env_dim
    );
    println!("kraus rank: {}", report.kraus_rank);
    println!("transition operator coefficients:");
    print_coefficient_table(&report.transition_table);
    println!("dynamical operator coefficients:");
    print_coefficient_table(&report.dynamical_table);
    println!("kraus operators:");
    for (l, k) in report.kraus.iter().enumerate() {
        println!("  K{l}:");
        let m = k.matrix();
        for r in 0..m.nrows() {
            print!("   ");
            for cidx in 0..m.ncols() {
                let z = m[(r, cidx)];
                print!(" {:>8.5}{:+.5}i", z.re, z.im);
            }
            println!();
        }
    }
    println!(
        "all information present at exit: {}",
        verdict_line(&report.all_information_at_exit)
    );
    println!(
        "classical-quantum structure: {} (commutation residual {:.3e})",
        report.cq.is_cq, report.cq.commutation_residual
    );
}

#[derive(Serialize)]
struct SingletonLine {
    n: usize,
    t: usize,
    k: usize,
    d: usize,
    holds: bool,
    saturated: bool,
}

#[derive(Serialize)]
struct CodeAuditReport {
    source: String,
    n: usize,
    k: usize,
    carrier_dims: Vec<usize>,
    security: SecurityReport,
    error_family: String,
    error_count: usize,
    knill_laflamme: KLReport,
    s_equals_2t: bool,
    t: usize,
    singleton: SingletonLine,
    entrance_marginal_residual: f64,
}

fn code_audit(
    source: &str,
    code: &CodeSpec,
    errors: &str,
    max_check: Option<usize>,
    t: usize,
    cfg: &Config,
) -> Result<CodeAuditReport, Failure> {
    let n = code.n();
    if n > 8 {
        eprintln!("warning: security sweep is exponential in subset size; n = {n} carriers will be slow");
    }
    let max_check = max_check.unwrap_or(n / 2).min(n);
    let security_report = security(code, max_check, cfg)?;

    let family = match errors {
        "pauli1" => error_family_with_base(code.carriers(), 1, cfg)?,
        "bitflip" => {
            let mut maps = vec![LinearMap::identity(code.carriers().clone())];
            for m in 1..=n {
                let basis = chanket::opbasis::hermitian_basis(code.carrier_dims()[m - 1])?;
                let flip = basis
                    .operator(1, m.to_string())?
                    .embed(code.carriers())?;
                maps.push(LinearMap::new(
                    code.carriers().clone(),
                    code.carriers().clone(),
                    flip.matrix().clone(),
                )?);
            }
            maps
        }
        other => return Err(Failure::usage(format!("unknown error family {other:?}"))),
    };
    let kl = knill_laflamme(code, &family, cfg)?;
    let s2t = s_equals_2t_check(code, t, cfg)?;

    let d = code.carrier_dims()[0];
    let psi = code_channel_ket(code)?;
    let marginal = psi.dyad().partial_trace(&["a"])?;
    let uniform = Operator::identity(marginal.registry().clone())
        .scaled(chanket::kernels::c(1.0 / code.k() as f64, 0.0));

    Ok(CodeAuditReport {
        source: source.to_string(),
        n,
        k: code.k(),
        carrier_dims: code.carrier_dims(),
        security: security_report,
        error_family: errors.to_string(),
        error_count: family.len(),
        knill_laflamme: kl,
        s_equals_2t: s2t,
        t,
        singleton: SingletonLine {
            n,
            t,
            k: code.k(),
            d,
            holds: singleton_check(n, t, code.k(), d),
            saturated: singleton_saturated(n, t, code.k(), d),
        },
        entrance_marginal_residual: marginal.distance(&uniform),
    })
}

fn print_code_audit_text(report: &CodeAuditReport) {
    println!(
        "code {}: n = {}, K = {}, carriers {:?}",
        report.source, report.n, report.k, report.carrier_dims
    );
    println!(
        "security: s = {}{} (checked up to size {})",
        report.security.s,
        if report.security.capped { "+" } else { "" },
        report.security.max_checked
    );
    if let Some(w) = &report.security.witness {
        println!(
            "  witness: subset {:?}, violation {:.3e}",
            w.subset, w.violation
        );
    }
    println!(
        "recovery condition ({} errors, family {}): {} (residual {:.3e})",
        report.error_count,
        report.error_family,
        if report.knill_laflamme.passes {
            "PASS"
        } else {
            "FAIL"
        },
        report.knill_laflamme.residual
    );
    println!("security matches twice the correctable errors (t = {}): {}", report.t, report.s_equals_2t);
    println!(
        "singleton bound (n = {}, t = {}, K = {}, D = {}): {}{}",
        report.singleton.n,
        report.singleton.t,
        report.singleton.k,
        report.singleton.d,
        if report.singleton.holds { "holds" } else { "violated" },
        if report.singleton.saturated {
            " with equality"
        } else {
            ""
        }
    );
}

fn run_suite(
    suite: &str,
    seed: u64,
    instances: usize,
    cfg: &Config,
) -> Result<Vec<suites::SuiteCheck>, Failure> {
    let checks = match suite {
        "theorems" => suites::theorem_suite(seed, instances, cfg)?,
        "fourkets" => vec![suites::four_kets_suite(seed, instances, cfg)?],
        "mixedenv" => vec![suites::mixed_env_suite(seed, instances, cfg)?],
        "routes" => vec![suites::route_agreement_suite(seed, instances, cfg)?],
        "isometry" => vec![suites::isometry_law_suite(seed, instances, cfg)?],
        "cq" => vec![suites::cq_detection_suite(seed, instances, cfg)?],
        "correlations" => vec![suites::correlation_signature_suite(seed, instances, cfg)?],
        "all" => suites::all_suites(seed, instances, cfg)?,
        other => return Err(Failure::usage(format!("unknown suite {other:?}"))),
    };
    Ok(checks)
}

fn print_json<T: Serialize>(value: &T) {
    println!(
        "{}",
        serde_json::to_string_pretty(value).expect("report types serialize")
    );
}
