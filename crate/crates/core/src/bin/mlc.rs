use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};
use meshlet_codec::container::Codec;
use meshlet_codec::obj::load_obj;
use meshlet_codec::pipeline::{
    compress, compress_with_solutions, export_lp_models, LpManifest, MANIFEST_FILE,
};
use meshlet_codec::{
    verify, CompressOptions, Error, MeshletContainer, MeshletLimits, RunReport, SolverKind,
};
use serde::Serialize;

const EXIT_VERIFY_FAILED: u8 = 1;
const EXIT_USAGE: u8 = 2;

#[derive(Parser)]
#[command(
    name = "mlc",
    version,
    about = "Meshlet compression with generalized triangle strips"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compress an OBJ mesh into an MLT1 container.
    Compress(CompressArgs),
    /// Decode a container and check it against its source mesh.
    Verify {
        container: PathBuf,
        input: PathBuf,
        /// Write the JSON report here instead of stdout.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Encode with strip solutions produced by an external MILP solver.
    ImportSolutions {
        /// manifest.json written by `compress --solver lp-export`.
        manifest: PathBuf,
        /// Directory holding the `.sol` files named in the manifest.
        solutions: PathBuf,
        /// Source mesh; defaults to the path recorded in the manifest.
        #[arg(long)]
        input: Option<PathBuf>,
        #[command(flatten)]
        encode: EncodeArgs,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum CodecArg {
    Gts,
    GtsReuse,
    Basic,
}

impl From<CodecArg> for Codec {
    fn from(c: CodecArg) -> Self {
        match c {
            CodecArg::Gts => Codec::Gts,
            CodecArg::GtsReuse => Codec::GtsReuse,
            CodecArg::Basic => Codec::Basic,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SolverArg {
    Eta,
    Exact,
    LpExport,
}

#[derive(Args)]
struct EncodeArgs {
    #[arg(long, value_enum, default_value = "gts")]
    codec: CodecArg,
    /// Bits per attribute channel.
    #[arg(long, default_value_t = 16, value_parser = clap::value_parser!(u8).range(1..=32))]
    bits: u8,
    /// Output container; defaults to the input path with an .mlt1 extension.
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Print an aligned text table to stdout.
    #[arg(long)]
    table: bool,
}

#[derive(Args)]
struct CompressArgs {
    input: PathBuf,
    #[arg(long, value_enum, default_value = "eta")]
    solver: SolverArg,
    #[arg(long, default_value_t = 128)]
    vmax: usize,
    #[arg(long, default_value_t = 256)]
    tmax: usize,
    /// Branch-and-bound budget per meshlet, in seconds.
    #[arg(long, default_value_t = 10.0)]
    time_budget: f64,
    /// Where `--solver lp-export` writes its models.
    #[arg(long)]
    lp_dir: Option<PathBuf>,
    #[command(flatten)]
    encode: EncodeArgs,
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Parse { .. }
        | Error::Solution { .. }
        | Error::Json(_)
        | Error::Io(_)
        | Error::InvalidLimits(_)
        | Error::Container(_) => EXIT_USAGE,
        _ => EXIT_VERIFY_FAILED,
    }
}

fn emit_json<T: Serialize>(value: &T, path: Option<&Path>) -> Result<(), Error> {
    let json = serde_json::to_string_pretty(value)?;
    match path {
        Some(p) => std::fs::write(p, json + "\n")?,
        None => println!("{json}"),
    }
    Ok(())
}

fn finish(
    mut report: RunReport,
    container: &MeshletContainer,
    input: &Path,
    args: &EncodeArgs,
) -> Result<(), Error> {
    let output = args
        .output
        .clone()
        .unwrap_or_else(|| input.with_extension("mlt1"));
    container.write(&output)?;
    report.input = Some(input.to_path_buf());
    log::info!(
        "wrote {} ({} bytes)",
        output.display(),
        report.sizes.total_bytes
    );
    if args.table {
        print!("{}", report.to_table());
        if let Some(p) = &args.report {
            emit_json(&report, Some(p))?;
        }
        Ok(())
    } else {
        emit_json(&report, args.report.as_deref())
    }
}

fn run_compress(args: &CompressArgs) -> Result<(), Error> {
    let limits = MeshletLimits::new(args.vmax, args.tmax)?;
    if !(args.time_budget >= 0.0 && args.time_budget.is_finite()) {
        return Err(Error::InvalidLimits(format!(
            "time budget {} is not a non-negative number",
            args.time_budget
        )));
    }
    let mesh = load_obj(&args.input)?;
    if args.solver == SolverArg::LpExport {
        let dir = args
            .lp_dir
            .clone()
            .unwrap_or_else(|| args.input.with_extension("lp.d"));
        let manifest = export_lp_models(&mesh, &limits, Some(&args.input), &dir)?;
        eprintln!(
            "wrote {} models and {} to {}",
            manifest.meshlets.len(),
            MANIFEST_FILE,
            dir.display()
        );
        return Ok(());
    }
    let options = CompressOptions {
        codec: args.encode.codec.into(),
        solver: match args.solver {
            SolverArg::Exact => SolverKind::Exact,
            _ => SolverKind::Eta,
        },
        limits,
        bits: args.encode.bits,
        time_budget: Duration::from_secs_f64(args.time_budget),
    };
    let c = compress(&mesh, &options)?;
    finish(c.report, &c.container, &args.input, &args.encode)
}

fn run_import(
    manifest: &Path,
    solutions: &Path,
    input: Option<&Path>,
    args: &EncodeArgs,
) -> Result<(), Error> {
    let m: LpManifest = serde_json::from_str(&std::fs::read_to_string(manifest)?)?;
    let input = input
        .map(Path::to_path_buf)
        .or_else(|| m.input.clone())
        .ok_or_else(|| Error::InvalidMesh("manifest records no input mesh; pass --input".into()))?;
    let mesh = load_obj(&input)?;
    let options = CompressOptions {
        codec: args.codec.into(),
        bits: args.bits,
        ..CompressOptions::default()
    };
    let (c, issues) = compress_with_solutions(&mesh, &m, solutions, &options)?;
    for i in &issues {
        eprintln!(
            "warning: meshlet {}: {} (fell back to tunneling)",
            i.meshlet, i.message
        );
    }
    finish(c.report, &c.container, &input, args)
}

fn run_verify(container: &Path, input: &Path, report: Option<&Path>) -> Result<bool, Error> {
    let c = MeshletContainer::read(container)?;
    let mesh = load_obj(input)?;
    let r = verify(&c, &mesh);
    emit_json(&r, report)?;
    for f in &r.failures {
        eprintln!("FAIL {f}");
    }
    Ok(r.passed)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Compress(args) => run_compress(args).map(|_| true),
        Command::Verify {
            container,
            input,
            report,
        } => run_verify(container, input, report.as_deref()),
        Command::ImportSolutions {
            manifest,
            solutions,
            input,
            encode,
        } => run_import(manifest, solutions, input.as_deref(), encode).map(|_| true),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_VERIFY_FAILED),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
