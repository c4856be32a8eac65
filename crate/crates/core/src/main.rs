use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use sbibench::bench::{self, ReportFormat};
use sbibench::methods::{parse_method_list, Method};
use sbibench::metrics::{compute_all, MetricConfig, MetricReport};
use sbibench::seqio::{load_image, save_image, ImageFormat, Manifest};
use sbibench::synth::SceneScript;
use sbibench::Error;

#[derive(Parser)]
#[command(
    name = "sbibench",
    version,
    about = "Scene background initialization benchmark"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Estimate backgrounds for every (sequence, method) pair and score them.
    Eval {
        /// Dataset manifest. Defaults to the bundled SBI manifest rooted at $SBI_DATA.
        #[arg(long)]
        manifest: Option<PathBuf>,
        /// Comma-separated methods, e.g. `median,ws2006:eps_stable=8,min_len=12`.
        #[arg(long, value_parser = parse_methods)]
        methods: MethodList,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value = "csv", value_parser = parse_format)]
        format: ReportFormat,
        #[arg(long, default_value_t = 20)]
        tau: u8,
        /// Worker threads (default: all cores).
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Score one background estimate against its ground truth.
    Metrics {
        #[arg(long)]
        gt: PathBuf,
        #[arg(long)]
        cb: PathBuf,
        #[arg(long, default_value_t = 20)]
        tau: u8,
    },
    /// Per-sequence medians and average ranks from a results CSV.
    Aggregate {
        #[arg(long)]
        table: PathBuf,
        #[arg(long, default_value = "markdown", value_parser = parse_format)]
        format: ReportFormat,
    },
    /// Render a scene script to frames, ground truth and a manifest.
    Synth {
        #[arg(long)]
        script: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Clone)]
struct MethodList(Vec<Method>);

fn parse_methods(s: &str) -> Result<MethodList, String> {
    parse_method_list(s)
        .map(MethodList)
        .map_err(|e| e.to_string())
}

fn parse_format(s: &str) -> Result<ReportFormat, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

enum Failure {
    Usage(String),
    Data(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Data(e.to_string())
    }
}

fn file_stem(name: &str) -> String {
    name.chars()
        .map(|ch| {
            if ch.is_ascii_alphanumeric() || ch == '-' || ch == '.' {
                ch
            } else {
                '_'
            }
        })
        .collect()
}

fn write_text(path: &Path, text: &str) -> Result<(), Failure> {
    std::fs::write(path, text).map_err(|e| Failure::Data(format!("{}: {e}", path.display())))
}

fn report_line(r: &MetricReport) -> String {
    let f = |v: f64, d: usize| {
        if v.is_infinite() {
            "inf".to_string()
        } else {
            format!("{v:.d$}")
        }
    };
    let cqm = r.cqm.map(|v| f(v, 4)).unwrap_or_else(|| "n/a".into());
    format!(
        "AGE={} EPs={} pEPs={} CEPs={} pCEPs={} MSSSIM={} PSNR={} CQM={}",
        f(r.age, 4),
        r.eps,
        f(r.p_eps, 6),
        r.ceps,
        f(r.p_ceps, 6),
        f(r.ms_ssim, 4),
        f(r.psnr, 4),
        cqm
    )
}

fn eval(
    manifest: Option<PathBuf>,
    methods: Vec<Method>,
    out: PathBuf,
    format: ReportFormat,
    tau: u8,
) -> Result<(), Failure> {
    let manifest = match manifest {
        Some(path) => Manifest::load(&path, None)?,
        None => match std::env::var_os("SBI_DATA") {
            Some(root) => Manifest::sbi(Path::new(&root)),
            None => {
                return Err(Failure::Usage(
                    "--manifest not given and SBI_DATA is not set".into(),
                ))
            }
        },
    };
    if methods.is_empty() {
        return Err(Failure::Usage(
            "--methods must name at least one method".into(),
        ));
    }
    std::fs::create_dir_all(&out).map_err(|e| Failure::Data(format!("{}: {e}", out.display())))?;
    let outcome = bench::run(&manifest, &methods, &MetricConfig::with_tau(tau))?;
    for (seq, method, img) in &outcome.backgrounds {
        let path = out.join(format!("{}__{}.png", file_stem(seq), file_stem(method)));
        save_image(img, path, ImageFormat::Png)?;
    }
    let report = out.join(format!("report.{}", format.extension()));
    write_text(&report, &bench::render_matrix(&outcome.matrix, format))?;
    if outcome.failures.is_empty() {
        return Ok(());
    }
    let lines: Vec<String> = outcome
        .failures
        .iter()
        .map(|f| match &f.method {
            Some(m) => format!("{} [{m}]: {}", f.sequence, f.error),
            None => format!("{}: {}", f.sequence, f.error),
        })
        .collect();
    Err(Failure::Data(lines.join("\n")))
}

fn execute(command: Command) -> Result<(), Failure> {
    match command {
        Command::Eval {
            manifest,
            methods,
            out,
            format,
            tau,
            threads,
        } => {
            let methods = methods.0;
            match threads {
                Some(n) => rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build()
                    .map_err(|e| Failure::Usage(e.to_string()))?
                    .install(|| eval(manifest, methods, out, format, tau)),
                None => eval(manifest, methods, out, format, tau),
            }
        }
        Command::Metrics { gt, cb, tau } => {
            let gt = load_image(&gt)?;
            let cb = load_image(&cb)?;
            let report = compute_all(&gt, &cb, &MetricConfig::with_tau(tau))?;
            println!("{}", report_line(&report));
            Ok(())
        }
        Command::Aggregate { table, format } => {
            let text = std::fs::read_to_string(&table)
                .map_err(|e| Failure::Data(format!("{}: {e}", table.display())))?;
            let matrix = bench::parse_matrix_csv(&text)?;
            let ranked = bench::rank_sequences(&bench::median_by_sequence(&matrix)?)?;
            print!("{}", bench::render_aggregates(&ranked, format));
            Ok(())
        }
        Command::Synth { script, out } => {
            let script = SceneScript::load(&script)?;
            script.write_dataset(&out)?;
            println!("{}", out.join("manifest.txt").display());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Data(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
