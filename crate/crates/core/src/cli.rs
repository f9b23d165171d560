//! `edgeflow replay | simulate | bench`.

use std::ffi::OsString;
use std::fs;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand};

use crate::config::Config;
use crate::error::{Error, Result};
use crate::estimator::VelocityEstimator;
use crate::flow::RateMeasurement;
use crate::image::ImageFrame;
use crate::simulator::{
    export_sequence, render_stereo, write_log, LogRow, Motion, Scenario, ScenarioMode, Scene,
    Trajectory, Truth,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "edgeflow",
    version,
    about = "Edge-histogram optical flow and velocity estimation"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Estimate flow and velocity for a directory of PGM frames.
    Replay {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run an open- or closed-loop scenario against the synthetic scene.
    Simulate {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        /// Also write the rendered frames, rates and truth (open loop only).
        #[arg(long)]
        export: Option<PathBuf>,
    },
    /// Time the full stereo pipeline per frame pair.
    Bench {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value_t = 1000)]
        frames: usize,
    },
}

/// Exit status for an error: 1 for configuration and usage problems, 2 for
/// bad or unreadable data.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Config(_)
        | Error::Scenario(_)
        | Error::InvalidParams(_)
        | Error::InvalidIntrinsics(_)
        | Error::InvalidPose(_)
        | Error::Diverged { .. } => EXIT_USAGE,
        _ => EXIT_DATA,
    }
}

/// Parses arguments, runs the command, prints diagnostics to stderr and
/// returns the process exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let result = match cli.command {
        Command::Replay { input, config, out } => {
            load_config(config.as_deref()).and_then(|c| cmd_replay(&input, &c, &out))
        }
        Command::Simulate {
            scenario,
            config,
            out,
            export,
        } => load_config(config.as_deref())
            .and_then(|c| cmd_simulate(&scenario, &c, &out, export.as_deref())),
        Command::Bench { config, frames } => load_config(config.as_deref()).and_then(|c| {
            let report = cmd_bench(&c, frames)?;
            println!("{report}");
            Ok(())
        }),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("edgeflow: {e}");
            exit_code(&e)
        }
    }
}

/// Config file (defaults when absent) with the `EDGEFLOW_SEED` override.
pub fn load_config(path: Option<&Path>) -> Result<Config> {
    let mut c = match path {
        Some(p) => Config::load(p)?,
        None => Config::default(),
    };
    c.apply_env()?;
    Ok(c)
}

fn write_rows(path: &Path, rows: &[LogRow]) -> Result<()> {
    let file = fs::File::create(path).map_err(|e| Error::data(path, e.to_string()))?;
    write_log(BufWriter::new(file), rows).map_err(|e| Error::data(path, e.to_string()))
}

fn frame_path(dir: &Path, side: &str, k: usize) -> PathBuf {
    dir.join(format!("{side}_{k:06}.pgm"))
}

// Rows of a `frame,a,b[,c]` side file, indexed by frame.
fn read_table(path: &Path, columns: usize) -> Result<Vec<Vec<f64>>> {
    let text = fs::read_to_string(path).map_err(|e| Error::data(path, e.to_string()))?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (i, line) in text.lines().enumerate().skip(1) {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let bad = || {
            Error::data(
                path,
                format!("line {}: expected {} numeric columns", i + 1, columns + 1),
            )
        };
        let cols: Vec<&str> = line.split(',').map(str::trim).collect();
        if cols.len() != columns + 1 {
            return Err(bad());
        }
        let frame: usize = cols[0].parse().map_err(|_| bad())?;
        if frame != rows.len() {
            return Err(Error::data(
                path,
                format!("line {}: expected frame {}, got {frame}", i + 1, rows.len()),
            ));
        }
        let values = cols[1..]
            .iter()
            .map(|c| c.parse::<f64>().map_err(|_| bad()))
            .collect::<Result<Vec<f64>>>()?;
        rows.push(values);
    }
    Ok(rows)
}

fn count_frames(dir: &Path, side: &str) -> Result<usize> {
    let entries = fs::read_dir(dir).map_err(|e| Error::data(dir, e.to_string()))?;
    let mut n = 0;
    for entry in entries {
        let name = entry?.file_name();
        let name = name.to_string_lossy();
        if name.starts_with(&format!("{side}_")) && name.ends_with(".pgm") {
            n += 1;
        }
    }
    Ok(n)
}

fn read_frame(path: &Path, t: f64, config: &Config) -> Result<ImageFrame> {
    if !path.exists() {
        return Err(Error::data(path, "missing frame"));
    }
    let f = ImageFrame::read_pgm(path, t)?;
    if f.width() != config.image_width || f.height() != config.image_height {
        return Err(Error::data(
            path,
            format!(
                "frame is {}x{}, configured for {}x{}",
                f.width(),
                f.height(),
                config.image_width,
                config.image_height
            ),
        ));
    }
    Ok(f)
}

/// Runs the estimator over `left_%06d.pgm` (and `right_%06d.pgm` when
/// present) and writes the simulation-log CSV.
pub fn cmd_replay(input: &Path, config: &Config, out: &Path) -> Result<()> {
    let rows = replay_rows(input, config)?;
    write_rows(out, &rows)
}

pub fn replay_rows(input: &Path, config: &Config) -> Result<Vec<LogRow>> {
    config.validate()?;
    let frames = count_frames(input, "left")?;
    if frames == 0 {
        return Err(Error::data(frame_path(input, "left", 0), "no frames found"));
    }
    let stereo = frame_path(input, "right", 0).exists();
    if stereo && count_frames(input, "right")? != frames {
        return Err(Error::data(input, "left and right frame counts differ"));
    }
    let table = |name: &str, cols: usize| -> Result<Option<Vec<Vec<f64>>>> {
        let p = input.join(name);
        if !p.exists() {
            return Ok(None);
        }
        let t = read_table(&p, cols)?;
        if t.len() < frames {
            return Err(Error::data(
                &p,
                format!("{} rows for {frames} frames", t.len()),
            ));
        }
        Ok(Some(t))
    };
    let rates = if config.use_rates {
        table("rates.csv", 2)?
    } else {
        None
    };
    let truth = table("truth.csv", 3)?;

    let mut est = VelocityEstimator::new(config.estimator())?;
    let mut rows = Vec::with_capacity(frames);
    for k in 0..frames {
        let t = k as f64 / config.frame_rate;
        let lp = frame_path(input, "left", k);
        let left = read_frame(&lp, t, config)?;
        let right = if stereo {
            Some(read_frame(&frame_path(input, "right", k), t, config)?)
        } else {
            None
        };
        let rate = rates
            .as_ref()
            .map(|r| RateMeasurement::new(r[k][0], r[k][1], t));
        let out = est.process(&left, right.as_ref(), rate.as_ref())?;
        let truth = truth.as_ref().map_or(Truth::UNKNOWN, |r| Truth {
            v_ref: (f64::NAN, f64::NAN),
            velocity: (r[k][0], r[k][1]),
            height: r[k][2],
        });
        rows.push(LogRow::new(t, truth, &out));
    }
    Ok(rows)
}

pub fn cmd_simulate(
    scenario: &Path,
    config: &Config,
    out: &Path,
    export: Option<&Path>,
) -> Result<()> {
    config.validate()?;
    let sc = Scenario::load(scenario)?;
    if let Some(dir) = export {
        let ScenarioMode::OpenLoop(tr) = &sc.mode else {
            return Err(Error::Scenario(
                "--export needs an open_loop scenario".into(),
            ));
        };
        let frames = (sc.duration * config.frame_rate).round() as usize;
        export_sequence(
            &tr.samples(config.frame_rate, frames)?,
            &sc.scene(config),
            config,
            dir,
        )?;
    }
    let rows = sc.run(config)?;
    write_rows(out, &rows)
}

/// Per-frame-pair timing of the full pipeline.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BenchReport {
    pub frames: usize,
    pub image_width: usize,
    pub image_height: usize,
    pub mean_ms: f64,
    pub p99_ms: f64,
    pub max_ms: f64,
}

impl std::fmt::Display for BenchReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "frames {} ({}x{} stereo)\nmean_ms {:.4}\np99_ms {:.4}\nmax_ms {:.4}",
            self.frames,
            self.image_width,
            self.image_height,
            self.mean_ms,
            self.p99_ms,
            self.max_ms
        )
    }
}

const BENCH_CLIP: usize = 48;

/// Renders a short moving clip, then times `frames` stereo pairs through the
/// estimator, playing the clip back and forth.
pub fn cmd_bench(config: &Config, frames: usize) -> Result<BenchReport> {
    if frames == 0 {
        return Err(Error::Config("bench needs --frames >= 1".into()));
    }
    config.validate()?;
    let k = config.intrinsics();
    let scene = Scene::new(config.seed);
    let tr = Trajectory::new(
        Motion::Sinusoid {
            amplitude_x: 0.3,
            amplitude_y: 0.2,
            period: 4.0,
        },
        1.0,
    );
    let clip = tr
        .samples(config.frame_rate, BENCH_CLIP)?
        .iter()
        .map(|s| render_stereo(&scene, &s.pose, &k))
        .collect::<Result<Vec<_>>>()?;

    let mut est = VelocityEstimator::new(config.estimator())?;
    let mut times = Vec::with_capacity(frames);
    for i in 0..frames {
        let cycle = i % (2 * BENCH_CLIP);
        let idx = if cycle < BENCH_CLIP {
            cycle
        } else {
            2 * BENCH_CLIP - 1 - cycle
        };
        let (mut left, mut right) = clip[idx].clone();
        let t = i as f64 / config.frame_rate;
        left.timestamp = t;
        right.timestamp = t;
        let start = Instant::now();
        let out = est.process(&left, Some(&right), None)?;
        times.push(start.elapsed().as_secs_f64() * 1e3);
        std::hint::black_box(out);
    }
    let mean_ms = times.iter().sum::<f64>() / frames as f64;
    times.sort_by(f64::total_cmp);
    let p99_ms = times[((frames as f64 * 0.99).ceil() as usize).clamp(1, frames) - 1];
    Ok(BenchReport {
        frames,
        image_width: k.image_width,
        image_height: k.image_height,
        mean_ms,
        p99_ms,
        max_ms: times[frames - 1],
    })
}

/// Convenience for callers that want the CSV text rather than a file.
pub fn rows_to_csv(rows: &[LogRow]) -> String {
    let mut buf = Vec::new();
    write_log(&mut buf, rows).expect("writing to memory");
    String::from_utf8(buf).expect("ascii csv")
}
