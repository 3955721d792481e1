use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use blockred::document::{self, format_number, DocumentError, SystemDocument, SystemModel};
use blockred::dompoles;
use blockred::linalg::C64;
use blockred::metrics::{self, HankelPower};
use blockred::reduce::{self, ErrorMetric, ReductionReport, Tolerances};
use blockred::sysrep::{self, StateSpace};
use blockred::{Error, ErrorClass};
use clap::{Args, Parser, Subcommand, ValueEnum};
use nalgebra::DMatrix;

const EXIT_CODES: &str = "\
Exit codes:
  0  success
  1  input could not be read or parsed (message carries line:column)
  2  invariant violation: inconsistent dimensions, non-finite data, bad flags
  3  algorithmic failure: no eliminable solvent, no complete solvent set,
     already minimal, no convergence
  4  numeric failure: singular solves, probes at poles, unstable where a
     stable system is required

Set BLOCKRED_LOG=error|warn|info|debug for diagnostics on stderr.";

#[derive(Parser)]
#[command(name = "blockred", version, about = "Block-solvent model order reduction of MIMO LTI systems", after_help = EXIT_CODES)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse a system document, check it and print dimensions, stability and poles.
    Validate { path: PathBuf },
    /// Print the complete solvent set, Hankel spectrum, H2 norm and dominant poles.
    Analyze { path: PathBuf },
    /// Reduce a system and write the reduced document plus a report.
    Reduce(ReduceArgs),
    /// Write frequency-response samples of one or two systems as CSV.
    Bode(BodeArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Latent,
    Dominant,
}

#[derive(Args)]
struct ReduceArgs {
    path: PathBuf,
    #[arg(long, value_enum, default_value = "dominant")]
    method: MethodArg,
    /// Error bound for an elimination to stand (0 forbids every elimination).
    #[arg(long, default_value_t = 0.01)]
    threshold: f64,
    /// Optional bound on the H2 error.
    #[arg(long)]
    h2_threshold: Option<f64>,
    /// Number of dominant poles (default: grow in steps of m until a drop is accepted).
    #[arg(long)]
    k: Option<usize>,
    /// Reduced document; the report goes next to it with a `.report` suffix.
    #[arg(long)]
    out: PathBuf,
    /// Report path (default: `<out>.report`).
    #[arg(long)]
    report: Option<PathBuf>,
    #[arg(long, default_value_t = 0.1)]
    match_tol: f64,
    #[arg(long, default_value_t = blockred::matpoly::DEFAULT_TAU_NULL)]
    tau_null: f64,
    #[arg(long, default_value_t = sysrep::DEFAULT_EPS_SING)]
    eps_sing: f64,
    #[arg(long, default_value_t = 1e-8)]
    tau_conv: f64,
    /// Exponent on the Hankel singular values in the relative error (2 or 4).
    #[arg(long, default_value_t = 4)]
    hankel_power: u32,
    /// After the matched drop keep removing blocks, then single modes, while the error allows.
    #[arg(long)]
    refine: bool,
}

#[derive(Args)]
struct BodeArgs {
    path: PathBuf,
    /// Second system, sampled on the same grid.
    path2: Option<PathBuf>,
    #[arg(long, default_value_t = 1e-2)]
    wmin: f64,
    #[arg(long, default_value_t = 1e3)]
    wmax: f64,
    #[arg(long, default_value_t = 200)]
    points: usize,
    /// CSV destination (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
}

enum Failure {
    Io(String),
    Parse(String),
    Core(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Io(_) | Failure::Parse(_) => 1,
            Failure::Core(e) => match e.class() {
                ErrorClass::Invariant => 2,
                ErrorClass::Algorithmic => 3,
                ErrorClass::Numeric => 4,
            },
        }
    }

    fn message(&self) -> String {
        match self {
            Failure::Io(m) | Failure::Parse(m) => m.clone(),
            Failure::Core(e) => e.to_string(),
        }
    }
}

type CmdResult = std::result::Result<(), Failure>;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("BLOCKRED_LOG", "warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Validate { path } => cmd_validate(&path),
        Command::Analyze { path } => cmd_analyze(&path),
        Command::Reduce(args) => cmd_reduce(&args),
        Command::Bode(args) => cmd_bode(&args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}

fn load(path: &Path) -> std::result::Result<SystemDocument, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
    document::parse(&text).map_err(|e| match e {
        DocumentError::Parse(p) => Failure::Parse(format!("{}:{p}", path.display())),
        DocumentError::Invalid(e) => Failure::Core(e),
    })
}

fn save(path: &Path, text: &str) -> CmdResult {
    fs::write(path, text).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

fn fmt_c(z: C64) -> String {
    if z.im == 0.0 {
        return format_number(z.re);
    }
    let sign = if z.im < 0.0 { '-' } else { '+' };
    format!("{}{sign}{}i", format_number(z.re), format_number(z.im.abs()))
}

fn fmt_list(zs: &[C64]) -> String {
    zs.iter().map(|&z| fmt_c(z)).collect::<Vec<_>>().join(", ")
}

fn sorted_poles(sys: &StateSpace) -> Vec<C64> {
    let mut poles = sys.poles();
    blockred::linalg::sort_roots(&mut poles);
    poles
}

fn cmd_validate(path: &Path) -> CmdResult {
    let doc = load(path)?;
    let sys = doc.model.to_state_space()?;
    let stable = if sys.is_stable() { "stable" } else { "unstable" };
    println!("representation {}", doc.model.representation().tag());
    println!("n={} m={} p={}, {stable}", sys.order(), sys.inputs(), sys.outputs());
    println!("poles:");
    for z in sorted_poles(&sys) {
        println!("  {}", fmt_c(z));
    }
    Ok(())
}

fn cmd_analyze(path: &Path) -> CmdResult {
    let doc = load(path)?;
    let sys = doc.model.to_state_space()?;
    let mut out = String::new();
    let _ = writeln!(out, "n={} m={} p={}, {}", sys.order(), sys.inputs(), sys.outputs(), if sys.is_stable() { "stable" } else { "unstable" });

    let dec = reduce::decouple(&sys, &Tolerances::default())?;
    let set = &dec.solvents;
    let _ = writeln!(out, "complete solvent set: {} solvents of size {}, cond(V_R) {}", set.len(), set.block_size(), format_number(set.vandermonde_condition()));
    for (i, s) in set.solvents().iter().enumerate() {
        let _ = writeln!(out, "R{}  eigenvalues: {}", i + 1, fmt_list(s.eigenvalues()));
        if let Some(x) = s.real_matrix() {
            write_rows(&mut out, x);
        }
    }

    let _ = writeln!(out, "metrics:");
    if !sys.is_stable() {
        let _ = writeln!(out, "  unavailable: unstable");
    } else {
        let hsv = metrics::hankel_singular_values(&sys)?;
        let sigmas: Vec<String> = hsv.sigmas.iter().map(|&x| format_number(x)).collect();
        let _ = writeln!(out, "  hankel singular values: {}", sigmas.join(" "));
        if sys.d().iter().all(|&x| x == 0.0) {
            let _ = writeln!(out, "  h2 norm: {}", format_number(metrics::h2_norm(&sys)?));
        } else {
            let _ = writeln!(out, "  h2 norm: unavailable: nonzero feedthrough");
        }
    }

    let poles = if sys.inputs() == sys.outputs() && sys.order() > 0 {
        dompoles::dominant_poles(&sys, sys.order(), None)?
    } else {
        dompoles::dominance_order(dompoles::all_poles_dense(&sys)?)
    };
    let _ = writeln!(out, "dominant poles (pole, dominance):");
    for p in &poles {
        let _ = writeln!(out, "  {}  {}", fmt_c(p.lambda), format_number(p.dominance));
    }
    print!("{out}");
    Ok(())
}

fn write_rows(out: &mut String, x: &DMatrix<f64>) {
    for i in 0..x.nrows() {
        let row: Vec<String> = (0..x.ncols()).map(|j| format_number(x[(i, j)])).collect();
        let _ = writeln!(out, "    {}", row.join(" "));
    }
}

fn tolerances(args: &ReduceArgs) -> std::result::Result<Tolerances, Failure> {
    let hankel_power = HankelPower::from_exponent(args.hankel_power)
        .ok_or_else(|| Failure::Core(Error::InvalidInput(format!("--hankel-power must be 2 or 4, got {}", args.hankel_power))))?;
    let tol = Tolerances {
        re_threshold: args.threshold,
        h2_threshold: args.h2_threshold,
        match_tol: args.match_tol,
        tau_null: args.tau_null,
        eps_sing: args.eps_sing,
        tau_conv: args.tau_conv,
        hankel_power,
        refine: args.refine,
    };
    tol.validate()?;
    Ok(tol)
}

fn cmd_reduce(args: &ReduceArgs) -> CmdResult {
    let doc = load(&args.path)?;
    let tol = tolerances(args)?;
    let (model, report) = match args.method {
        MethodArg::Latent => {
            let f = match &doc.model {
                SystemModel::RightMfd(f) => f.clone(),
                other => sysrep::mfd_from_state_space(&other.to_state_space()?)?,
            };
            let (reduced, report) = reduce::reduce_latent(&f, &tol)?;
            (SystemModel::RightMfd(reduced), report)
        }
        MethodArg::Dominant => {
            let sys = doc.model.to_state_space()?;
            let (reduced, report) = reduce::reduce_dominant(&sys, &tol, args.k)?;
            (SystemModel::StateSpace(reduced), report)
        }
    };
    let out_doc = SystemDocument { name: doc.name.clone(), description: doc.description.clone(), model };
    save(&args.out, &document::write(&out_doc))?;
    let report_path = args.report.clone().unwrap_or_else(|| {
        let mut p = args.out.clone().into_os_string();
        p.push(".report");
        PathBuf::from(p)
    });
    save(&report_path, &format_report(&report))?;
    eprintln!(
        "order {} -> {}, {} {} (threshold {})",
        report.original_order,
        report.reduced_order,
        metric_name(report.metric),
        format_number(report.re_value),
        format_number(report.threshold)
    );
    Ok(())
}

fn metric_name(m: ErrorMetric) -> &'static str {
    match m {
        ErrorMetric::HankelRatio => "hankel_ratio",
        ErrorMetric::FrequencyDeviation => "frequency_deviation",
    }
}

fn format_report(r: &ReductionReport) -> String {
    let idx = |v: &[usize]| v.iter().map(|i| format!(" {i}")).collect::<String>();
    let mut out = String::new();
    let _ = writeln!(out, "blockred-report 1");
    let _ = writeln!(out, "method {}", r.method.name());
    let _ = writeln!(out, "original_order {}", r.original_order);
    let _ = writeln!(out, "reduced_order {}", r.reduced_order);
    let _ = writeln!(out, "iterations {}", r.iterations);
    let _ = writeln!(out, "metric {}", metric_name(r.metric));
    let _ = writeln!(out, "re_value {}", format_number(r.re_value));
    let _ = writeln!(out, "threshold {}", format_number(r.threshold));
    match r.h2_error {
        Some(h) => writeln!(out, "h2_error {}", format_number(h)),
        None => writeln!(out, "h2_error unavailable"),
    }
    .ok();
    let _ = writeln!(out, "neglected_numerator_norm {}", format_number(r.neglected_numerator_norm));
    let _ = writeln!(out, "kept_blocks{}", idx(&r.kept_blocks));
    let _ = writeln!(out, "discarded_blocks{}", idx(&r.discarded_blocks));
    let _ = writeln!(out, "eliminated {}", r.eliminated.len());
    for e in &r.eliminated {
        let _ = writeln!(out, "  {}: {}", e.label, fmt_list(&e.eigenvalues));
    }
    let _ = writeln!(out, "dominant_poles {}", r.dominant_poles.len());
    for (z, d) in &r.dominant_poles {
        let _ = writeln!(out, "  {} {}", fmt_c(*z), format_number(*d));
    }
    for n in &r.notes {
        let _ = writeln!(out, "note {n}");
    }
    out
}

fn csv_number(x: f64) -> String {
    format!("{x:.16e}")
}

fn cmd_bode(args: &BodeArgs) -> CmdResult {
    if !(args.wmin > 0.0 && args.wmax >= args.wmin && args.wmax.is_finite()) {
        return Err(Error::InvalidInput(format!("need 0 < wmin <= wmax, got {} and {}", args.wmin, args.wmax)).into());
    }
    if args.points == 0 || (args.points > 1 && args.wmax == args.wmin) {
        return Err(Error::InvalidInput("the grid needs at least one point and distinct ends for more".into()).into());
    }
    let grid = metrics::log_grid(args.wmin, args.wmax, args.points);
    let mut docs = vec![load(&args.path)?];
    if let Some(p2) = &args.path2 {
        docs.push(load(p2)?);
    }
    let mut columns = vec!["omega_rad_s".to_string()];
    let mut samples = Vec::new();
    for (k, doc) in docs.iter().enumerate() {
        let tf = doc.model.as_transfer();
        let prefix = if docs.len() > 1 { format!("sys{}_", k + 1) } else { String::new() };
        for i in 1..=tf.outputs() {
            for j in 1..=tf.inputs() {
                columns.push(format!("{prefix}mag_db_{i}{j}"));
                columns.push(format!("{prefix}phase_deg_{i}{j}"));
            }
        }
        samples.push(metrics::bode_rows(tf, &grid)?);
    }

    let mut out = columns.join(",");
    out.push('\n');
    for (g, &w) in grid.iter().enumerate() {
        let mut fields = vec![csv_number(w)];
        for (k, doc) in docs.iter().enumerate() {
            let tf = doc.model.as_transfer();
            let (p, m) = (tf.outputs(), tf.inputs());
            match &samples[k][g] {
                Some(row) => {
                    for i in 0..p {
                        for j in 0..m {
                            fields.push(csv_number(row.mag_db[(i, j)]));
                            fields.push(csv_number(row.phase_deg[(i, j)]));
                        }
                    }
                }
                None => {
                    eprintln!("warning: system {} has a pole at omega = {}; fields left empty", k + 1, csv_number(w));
                    fields.extend(std::iter::repeat(String::new()).take(2 * p * m));
                }
            }
        }
        out.push_str(&fields.join(","));
        out.push('\n');
    }

    if samples.len() == 2 {
        let same_shape = docs[0].model.as_transfer().outputs() == docs[1].model.as_transfer().outputs()
            && docs[0].model.as_transfer().inputs() == docs[1].model.as_transfer().inputs();
        if same_shape {
            let worst = samples[0]
                .iter()
                .zip(&samples[1])
                .filter_map(|(a, b)| Some((a.as_ref()?, b.as_ref()?)))
                .map(|(a, b)| (&a.mag_db - &b.mag_db).amax())
                .fold(0.0_f64, f64::max);
            eprintln!("max |delta mag| {} dB", format_number(worst));
        }
    }

    match &args.out {
        Some(p) => save(p, &out),
        None => {
            print!("{out}");
            Ok(())
        }
    }
}
