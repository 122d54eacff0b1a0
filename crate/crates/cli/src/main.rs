use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use fic::bench::{self, BenchSpec, Sweep};
use fic::codec::{coverage_for, deserialize, serialize};
use fic::{
    decode, encode, fixtures, load_image, rmse, save_image, Angle, BlockGrid, BoxCountConfig,
    CandidateSet, CodecConfig, Decoder, Direction, FicError, Image, MetricsReport,
};

#[derive(Parser, Debug)]
#[command(name = "fic", version, about = "Fractal image compression for grayscale PGM images")]
struct Cli {
    /// Worker threads for encoding and decoding (output does not depend on it).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Compress a PGM image into a .fic stream.
    Encode {
        input: PathBuf,
        output: PathBuf,
        #[command(flatten)]
        codec: CodecArgs,
        /// Also print the report as a CSV line.
        #[arg(long)]
        csv: bool,
    },
    /// Reconstruct a PGM image from a .fic stream.
    Decode {
        input: PathBuf,
        output: PathBuf,
        /// Starting image (default: uniform mid-gray).
        #[arg(long)]
        seed: Option<PathBuf>,
        /// Override the iteration count stored in the stream.
        #[arg(long)]
        iterations: Option<u32>,
        /// Write every iterate as iter_NN.pgm into this directory.
        #[arg(long)]
        dump_iterations: Option<PathBuf>,
    },
    /// Emit per-block fractal dimensions as CSV.
    Analyze {
        input: PathBuf,
        #[arg(long, default_value_t = 16)]
        dest_size: usize,
        #[arg(long, default_value_t = 50)]
        box_t1: u8,
        #[arg(long, default_value_t = 1.6)]
        box_t2: f64,
        /// Box edge lengths, largest first (default: powers of two dividing the block).
        #[arg(long, value_delimiter = ',')]
        box_sizes: Option<Vec<usize>>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// RMSE (and CR for .fic inputs) of a file against the original image.
    Metrics {
        original: PathBuf,
        /// A decoded PGM or a .fic stream.
        other: PathBuf,
    },
    /// Run the standard configuration set and write result tables as CSV.
    Bench {
        /// Input PGM, or `fixture:<name>` for a built-in synthetic image.
        input: String,
        #[command(flatten)]
        codec: CodecArgs,
        /// Results CSV (default: stdout).
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Sweep table CSV (default: <output stem>_sweep.csv, or stdout).
        #[arg(long)]
        sweep_output: Option<PathBuf>,
        #[arg(long, value_delimiter = ',', default_values_t = vec![30u8, 50])]
        sweep_t1: Vec<u8>,
        #[arg(long, value_delimiter = ',', default_values_t = vec![0.5, 1.6, 1.7, 1.8, 1.9, 2.0])]
        sweep_t2: Vec<f64>,
        #[arg(long, default_value_t = 50)]
        integrated_t1: u8,
        #[arg(long, default_value_t = 1.6)]
        integrated_t2: f64,
        /// Only run the named configurations.
        #[arg(long, value_delimiter = ',')]
        only: Option<Vec<String>>,
    },
    /// Write one of the built-in synthetic images as PGM.
    Fixture {
        #[arg(value_parser = clap::builder::PossibleValuesParser::new(fixtures::NAMES))]
        name: String,
        output: PathBuf,
        #[arg(long, default_value_t = 256)]
        size: usize,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Directions {
    Both,
    Identity,
}

/// Codec settings; defaults are the baseline 32/16/32 configuration.
#[derive(Args, Debug)]
struct CodecArgs {
    #[arg(long, default_value_t = 32)]
    source_size: usize,
    #[arg(long, default_value_t = 16)]
    dest_size: usize,
    /// Source grid step (default: source size).
    #[arg(long)]
    step: Option<usize>,
    #[arg(long, value_delimiter = ',', default_values_t = vec![0u16, 90, 180, 270])]
    angles: Vec<u16>,
    #[arg(long, value_enum, default_value_t = Directions::Both)]
    directions: Directions,
    /// Same as `--directions identity`.
    #[arg(long)]
    no_direction: bool,
    #[arg(long, default_value_t = 8)]
    contrast_bits: u32,
    #[arg(long, default_value_t = 8)]
    brightness_bits: u32,
    /// Gaussian sigma applied to source blocks before reduction.
    #[arg(long, default_value_t = 0.0)]
    sigma: f64,
    /// Enables box-counting pruning together with --box-t2.
    #[arg(long, requires = "box_t2")]
    box_t1: Option<u8>,
    #[arg(long, requires = "box_t1")]
    box_t2: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    box_sizes: Option<Vec<usize>>,
    #[arg(long, default_value_t = 8)]
    iterations: u32,
}

impl CodecArgs {
    fn to_config(&self) -> Result<CodecConfig> {
        let mut directions = vec![Direction::Identity];
        if self.directions == Directions::Both && !self.no_direction {
            directions.push(Direction::Mirrored);
        }
        let angles = self
            .angles
            .iter()
            .map(|&d| Angle::from_degrees(d).ok_or_else(|| anyhow!("unsupported angle {d}")))
            .collect::<Result<Vec<_>>>()?;
        let box_counting = match (self.box_t1, self.box_t2) {
            (Some(t1), Some(t2)) => Some(box_config(t1, t2, self.dest_size, self.box_sizes.clone())?),
            _ => None,
        };
        let cfg = CodecConfig {
            source_size: self.source_size,
            dest_size: self.dest_size,
            step: self.step.unwrap_or(self.source_size),
            candidates: CandidateSet::from_lists(&directions, &angles)?,
            contrast_bits: self.contrast_bits,
            brightness_bits: self.brightness_bits,
            gaussian_sigma: self.sigma,
            box_counting,
            decode_iterations: self.iterations,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

fn box_config(t1: u8, t2: f64, dest_size: usize, sizes: Option<Vec<usize>>) -> Result<BoxCountConfig> {
    let cfg = match sizes {
        Some(sizes) => BoxCountConfig::new(t1, t2, sizes)?,
        None => BoxCountConfig::with_default_sizes(t1, t2, dest_size)?,
    };
    cfg.validate_for(dest_size)?;
    Ok(cfg)
}

/// Failure that indicates a bug rather than bad input.
#[derive(Debug)]
struct Internal(anyhow::Error);

impl std::fmt::Display for Internal {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "internal error: {:#}", self.0)
    }
}

impl std::error::Error for Internal {}

fn internal(e: FicError) -> anyhow::Error {
    match e {
        FicError::InvariantViolation(_) => Internal(e.into()).into(),
        other => other.into(),
    }
}

fn read_stream(path: &Path) -> Result<fic::CompressedImage> {
    let bytes = fs::read(path).with_context(|| format!("cannot read {}", path.display()))?;
    deserialize(&bytes).with_context(|| format!("cannot decode {}", path.display()))
}

fn load(path: &Path) -> Result<Image> {
    load_image(path).with_context(|| format!("cannot load {}", path.display()))
}

fn write_output(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).with_context(|| format!("cannot write {}", path.display()))
}

fn cmd_encode(input: &Path, output: &Path, codec: &CodecArgs, csv: bool) -> Result<()> {
    let cfg = codec.to_config()?;
    let img = load(input)?;
    let start = Instant::now();
    let stream = encode(&img, &cfg).map_err(internal)?;
    let seconds = start.elapsed().as_secs_f64();
    let bytes = serialize(&stream);
    write_output(output, &bytes)?;
    let decoded = decode(&stream, None)?;
    let name = input.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let report = MetricsReport::new(name, &img, &decoded, &stream, bytes.len(), &cfg, seconds)?;
    println!("{report}");
    if csv {
        println!("{}", MetricsReport::CSV_HEADER);
        println!("{}", report.csv_line());
    }
    Ok(())
}

fn cmd_decode(
    input: &Path,
    output: &Path,
    seed: Option<&Path>,
    iterations: Option<u32>,
    dump: Option<&Path>,
) -> Result<()> {
    let mut stream = read_stream(input)?;
    if let Some(n) = iterations {
        stream = stream.with_decode_iterations(n)?;
    }
    let seed = seed.map(load).transpose()?;
    let mut decoder = Decoder::new(&stream, seed.as_ref())?;
    if let Some(dir) = dump {
        fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
        save_image(&decoder.image(), dir.join("iter_00.pgm"))?;
    }
    for _ in 0..stream.header().decode_iterations {
        decoder.step();
        if let Some(dir) = dump {
            save_image(&decoder.image(), dir.join(format!("iter_{:02}.pgm", decoder.iterations())))?;
        }
    }
    save_image(&decoder.image(), output)?;
    Ok(())
}

fn cmd_analyze(
    input: &Path,
    dest_size: usize,
    t1: u8,
    t2: f64,
    sizes: Option<Vec<usize>>,
    output: Option<&Path>,
) -> Result<()> {
    let img = load(input)?;
    let bc = box_config(t1, t2, dest_size, sizes)?;
    let grid = BlockGrid::for_image(&img, dest_size, dest_size)?;
    let cfg = CodecConfig {
        box_counting: Some(bc),
        ..CodecConfig::with_dest_size(dest_size)
    };
    let (_, map) = coverage_for(&img, &cfg)?;
    let map = map.expect("box counting enabled");
    let mut buf = Vec::new();
    map.write_csv(&mut buf)?;
    match output {
        Some(path) => write_output(path, &buf)?,
        None => io::stdout().write_all(&buf)?,
    }
    eprintln!("{} of {} blocks selected", map.selected_count(), grid.len());
    Ok(())
}

fn cmd_metrics(original: &Path, other: &Path) -> Result<()> {
    let img = load(original)?;
    let is_fic = fs::read(other)
        .map(|b| b.starts_with(fic::codec::MAGIC))
        .with_context(|| format!("cannot read {}", other.display()))?;
    if is_fic {
        let stream = read_stream(other)?;
        let decoded = decode(&stream, None)?;
        let ratio = fic::compression_ratio(&img, &stream)?;
        println!("CR,RMSE,transform_count");
        println!("{ratio:.2},{:.2},{}", rmse(&img, &decoded)?, stream.transform_count());
    } else {
        println!("RMSE");
        println!("{:.2}", rmse(&img, &load(other)?)?);
    }
    Ok(())
}

fn bench_input(input: &str) -> Result<Image> {
    match input.strip_prefix("fixture:") {
        Some(name) => fixtures::by_name(name, 256).ok_or_else(|| {
            anyhow!("unknown fixture {name:?}; expected one of {:?}", fixtures::NAMES)
        }),
        None => load(Path::new(input)),
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_bench(
    input: &str,
    codec: &CodecArgs,
    output: Option<&Path>,
    sweep_output: Option<&Path>,
    sweep: Sweep,
    integrated: (u8, f64),
    only: Option<&[String]>,
) -> Result<()> {
    let img = bench_input(input)?;
    let mut spec = BenchSpec::standard(&codec.to_config()?, sweep, integrated)?;
    if let Some(names) = only {
        spec.configs.retain(|c| names.contains(&c.name));
    }
    if spec.configs.is_empty() {
        bail!("no benchmark configurations selected");
    }
    let rows = bench::run(&img, &spec)?;

    let mut results = Vec::new();
    bench::write_results(&rows, &mut results)?;
    let mut table = Vec::new();
    bench::write_sweep(&rows, &spec.sweep, &mut table)?;
    match output {
        Some(path) => {
            write_output(path, &results)?;
            let sweep_path = sweep_output.map(Path::to_path_buf).unwrap_or_else(|| {
                let stem = path.file_stem().unwrap_or_default().to_string_lossy();
                path.with_file_name(format!("{stem}_sweep.csv"))
            });
            write_output(&sweep_path, &table)?;
        }
        None => {
            let mut out = io::stdout().lock();
            out.write_all(&results)?;
            match sweep_output {
                Some(path) => write_output(path, &table)?,
                None => {
                    writeln!(out)?;
                    out.write_all(&table)?;
                }
            }
        }
    }
    let failed = rows.iter().filter(|r| r.outcome.is_err()).count();
    if failed > 0 {
        eprintln!("{failed} of {} configurations failed", rows.len());
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("cannot configure thread pool")?;
    }
    match cli.command {
        Command::Encode { input, output, codec, csv } => cmd_encode(&input, &output, &codec, csv),
        Command::Decode { input, output, seed, iterations, dump_iterations } => cmd_decode(
            &input,
            &output,
            seed.as_deref(),
            iterations,
            dump_iterations.as_deref(),
        ),
        Command::Analyze { input, dest_size, box_t1, box_t2, box_sizes, output } => {
            cmd_analyze(&input, dest_size, box_t1, box_t2, box_sizes, output.as_deref())
        }
        Command::Metrics { original, other } => cmd_metrics(&original, &other),
        Command::Bench {
            input,
            codec,
            output,
            sweep_output,
            sweep_t1,
            sweep_t2,
            integrated_t1,
            integrated_t2,
            only,
        } => cmd_bench(
            &input,
            &codec,
            output.as_deref(),
            sweep_output.as_deref(),
            Sweep { t1: sweep_t1, t2: sweep_t2 },
            (integrated_t1, integrated_t2),
            only.as_deref(),
        ),
        Command::Fixture { name, output, size } => {
            let img = fixtures::by_name(&name, size).expect("validated by clap");
            save_image(&img, &output)?;
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<Internal>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
