//! `civc` command-line tool: encode, decode and analyze.
//!
//! Exit codes: 0 success, 2 usage, 3 I/O or unreadable input, 4 bitstream,
//! 1 anything else.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use civc::io::{read_container, write_y4m_sized};
use civc::{
    analyze_drift, analyze_rd, analyze_skip, decode_sequence, encode_sequence_with, read_y4m,
    CodecConfig, Error, Frame, FrameType, QuantTable, Schedule,
};
use clap::{Args, Parser, Subcommand, ValueEnum};

const QUALITY_COUNT: u8 = QuantTable::DEFAULT_STEPS.len() as u8;

#[derive(Parser)]
#[command(name = "civc", version, about = "Conditional-I video codec")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Encode a Y4M clip into a .civ container.
    Encode {
        input: PathBuf,
        output: PathBuf,
        #[command(flatten)]
        coding: Coding,
        /// Quality index into the quantization table (0 = finest).
        #[arg(long, default_value_t = 0, value_parser = clap::value_parser!(u8).range(0..QUALITY_COUNT as i64))]
        quality: u8,
    },
    /// Decode a .civ container into a Y4M clip.
    Decode { input: PathBuf, output: PathBuf },
    /// Run an analyzer over a Y4M clip and write a CSV report.
    Analyze {
        input: PathBuf,
        #[arg(long, value_enum)]
        mode: Mode,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        coding: Coding,
        /// Quality index for drift mode.
        #[arg(long, default_value_t = 0, value_parser = clap::value_parser!(u8).range(0..QUALITY_COUNT as i64))]
        quality: u8,
        /// Comma-separated quality indices for skip and rd modes.
        #[arg(long, value_delimiter = ',', value_parser = clap::value_parser!(u8).range(0..QUALITY_COUNT as i64))]
        qualities: Vec<u8>,
    },
}

#[derive(Args)]
struct Coding {
    #[arg(long, default_value_t = 20)]
    gop: usize,
    /// Skip threshold on the predicted scale.
    #[arg(long, conflicts_with = "no_skip")]
    tau_sigma: Option<f32>,
    /// Disable skipping (threshold 0).
    #[arg(long)]
    no_skip: bool,
    #[arg(long, value_enum, default_value_t = ScheduleArg::Full)]
    schedule: ScheduleArg,
}

#[derive(Clone, Copy, ValueEnum)]
enum ScheduleArg {
    Full,
    POnly,
    CiOnly,
}

impl From<ScheduleArg> for Schedule {
    fn from(s: ScheduleArg) -> Self {
        match s {
            ScheduleArg::Full => Schedule::Full,
            ScheduleArg::POnly => Schedule::POnly,
            ScheduleArg::CiOnly => Schedule::CiOnly,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Drift,
    Skip,
    Rd,
}

impl Coding {
    fn config(&self, quality: u8) -> CodecConfig {
        let defaults = CodecConfig::default();
        let tau_sigma = if self.no_skip {
            0.0
        } else {
            self.tau_sigma.unwrap_or(defaults.tau_sigma)
        };
        CodecConfig {
            gop_size: self.gop,
            quality_index: quality,
            tau_sigma,
            ..defaults
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config { .. } => 2,
        Error::Io(_) | Error::Y4m(_) | Error::Frame(_) => 3,
        e if e.is_bitstream() => 4,
        _ => 1,
    }
}

fn open(path: &Path) -> civc::Result<BufReader<File>> {
    Ok(BufReader::new(File::open(path)?))
}

fn read_clip(path: &Path) -> civc::Result<Vec<Frame>> {
    read_y4m(open(path)?)
}

fn write_file(path: &Path, bytes: &[u8]) -> civc::Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(bytes)?;
    w.flush()?;
    Ok(())
}

fn summarize(rd: &civc::RDPoint, width: usize, height: usize) {
    let pixels = (width * height) as f64;
    eprintln!(
        "{:<6}{:>7}{:>12}{:>10}{:>10}",
        "type", "frames", "bits", "bpp", "psnr"
    );
    for t in [FrameType::I, FrameType::P, FrameType::CI] {
        let frames: Vec<_> = rd.frames.iter().filter(|f| f.frame_type == t).collect();
        if frames.is_empty() {
            eprintln!("{:<6}{:>7}", t.label(), 0);
            continue;
        }
        let bits: u64 = frames.iter().map(|f| f.bits).sum();
        let psnr = frames.iter().map(|f| f.psnr).sum::<f64>() / frames.len() as f64;
        eprintln!(
            "{:<6}{:>7}{:>12}{:>10.4}{:>10.3}",
            t.label(),
            frames.len(),
            bits,
            bits as f64 / (pixels * frames.len() as f64),
            psnr
        );
    }
    eprintln!(
        "{:<6}{:>7}{:>12}{:>10.4}{:>10.3}",
        "all",
        rd.frames.len(),
        rd.bits_total,
        rd.bpp,
        rd.psnr
    );
}

fn encode(input: &Path, output: &Path, cfg: &CodecConfig, schedule: Schedule) -> civc::Result<()> {
    let frames = read_clip(input)?;
    let enc = encode_sequence_with(&frames, cfg, schedule)?;
    write_file(output, &enc.bytes)?;
    summarize(&enc.rd, frames[0].width, frames[0].height);
    Ok(())
}

fn decode(input: &Path, output: &Path) -> civc::Result<()> {
    let bytes = std::fs::read(input)?;
    let (header, _) = read_container(&bytes)?;
    let frames = decode_sequence(&bytes)?;
    let mut w = BufWriter::new(File::create(output)?);
    write_y4m_sized(
        &mut w,
        header.width as usize,
        header.height as usize,
        &frames,
    )?;
    w.flush()?;
    Ok(())
}

fn analyze(
    input: &Path,
    mode: Mode,
    out: &Path,
    cfg: &CodecConfig,
    schedule: Schedule,
    qualities: &[u8],
) -> civc::Result<()> {
    let frames = read_clip(input)?;
    let all: Vec<u8> = (0..QUALITY_COUNT).collect();
    let qualities = if qualities.is_empty() {
        &all[..]
    } else {
        qualities
    };
    let csv = match mode {
        Mode::Drift => analyze_drift(&frames, cfg, schedule)?.to_csv(),
        Mode::Skip => analyze_skip(&frames, cfg, qualities)?.to_csv(),
        Mode::Rd => analyze_rd(&frames, cfg, qualities, schedule)?.to_csv(),
    };
    write_file(out, csv.as_bytes())
}

fn run(cli: Cli) -> civc::Result<()> {
    match cli.command {
        Command::Encode {
            input,
            output,
            coding,
            quality,
        } => encode(
            &input,
            &output,
            &coding.config(quality),
            coding.schedule.into(),
        ),
        Command::Decode { input, output } => decode(&input, &output),
        Command::Analyze {
            input,
            mode,
            out,
            coding,
            quality,
            qualities,
        } => analyze(
            &input,
            mode,
            &out,
            &coding.config(quality),
            coding.schedule.into(),
            &qualities,
        ),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("civc: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
