use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use bgrid::grid::MAX_BIT_BUDGET;
use bgrid::image::textured_scene;
use bgrid::streaming::{audit_memory_accesses, run_streaming_with, PartitionLayout, StreamOptions};
use bgrid::{
    add_gaussian_noise, bg_denoise, bilateral_filter, load_pgm, mssim, psnr, save_pgm,
    ArithmeticMode, BgConfig, DenoiseParams, Image, MssimConfig, TiWeights,
};
use clap::{Args, Parser, Subcommand, ValueEnum};

/// Bilateral-grid denoiser, image metrics and streaming pipeline simulator.
#[derive(Parser)]
#[command(name = "bgrid", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Denoise a binary PGM.
    Denoise {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long = "out")]
        output: PathBuf,
        #[command(flatten)]
        filter: FilterArgs,
        #[arg(long, value_enum, default_value_t = Engine::Streaming)]
        engine: Engine,
    },
    /// Add seeded Gaussian noise to a PGM.
    Noise {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long = "out")]
        output: PathBuf,
        #[arg(long)]
        sigma: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Print the mean SSIM of two PGMs (7x7 window) with 6 decimals.
    Mssim { a: PathBuf, b: PathBuf },
    /// Print the PSNR of two PGMs in dB with 6 decimals (`inf` if identical).
    Psnr { a: PathBuf, b: PathBuf },
    /// Run the cycle-level pipeline model and print its report as JSON.
    ///
    /// Exits with status 1 if the memory-port audit fails.
    Simulate {
        /// Input PGM.
        #[arg(long = "in", required_unless_present = "synthetic")]
        input: Option<PathBuf>,
        /// Use a generated WIDTHxHEIGHT test scene instead of a file.
        #[arg(long, value_parser = parse_size, conflicts_with = "input")]
        synthetic: Option<(usize, usize)>,
        /// Also write the filtered image.
        #[arg(long = "out")]
        output: Option<PathBuf>,
        #[command(flatten)]
        filter: FilterArgs,
        /// Clock frequencies in Hz for the fps prediction.
        #[arg(long = "fclk", value_delimiter = ',', default_values_t = [100e6, 200e6])]
        f_clk: Vec<f64>,
        /// Partitions backing the three grid planes (1..=3).
        #[arg(long, default_value_t = 3)]
        grid_partitions: usize,
        /// Partitions backing the two blurred planes (1..=2).
        #[arg(long, default_value_t = 2)]
        blurred_partitions: usize,
    },
    /// Sweep radii over several engines and print CSV.
    Bench {
        /// Clean image; a generated textured scene is used when absent.
        #[arg(long = "in")]
        input: Option<PathBuf>,
        #[arg(long, default_value_t = 640)]
        width: usize,
        #[arg(long, default_value_t = 360)]
        height: usize,
        #[arg(long, value_delimiter = ',', default_values_t = [2usize, 4, 7, 15])]
        radii: Vec<usize>,
        #[arg(long, default_value_t = 8.0)]
        sigma_s: f64,
        #[arg(long, default_value_t = 70.0)]
        sigma_r: f64,
        #[arg(long, default_value_t = 30.0)]
        noise_sigma: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, value_delimiter = ',', default_values_t = [BenchEngine::Reference, BenchEngine::Streaming, BenchEngine::Bilateral])]
        engines: Vec<BenchEngine>,
    },
}

#[derive(Args)]
struct FilterArgs {
    /// Window radius in pixels (>= 1).
    #[arg(long)]
    radius: usize,
    /// Spatial standard deviation (> 0).
    #[arg(long)]
    sigma_s: f64,
    /// Range (intensity) standard deviation (> 0).
    #[arg(long)]
    sigma_r: f64,
    /// Blur arithmetic: exact Gaussian weights or power-of-two shifts.
    #[arg(long, value_enum, default_value_t = Mode::Float)]
    mode: Mode,
    /// Bit budget of the power-of-two kernel in shift mode.
    #[arg(long, default_value_t = 8)]
    bit_budget: u8,
    /// Interpolation weights: `standard` (1-f, f) or `far-corner` (f, 1-f).
    #[arg(long, value_enum, default_value_t = Weights::Standard)]
    ti_weights: Weights,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Engine {
    Reference,
    Streaming,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum BenchEngine {
    Reference,
    Streaming,
    Bilateral,
}

impl std::fmt::Display for BenchEngine {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Reference => "reference",
            Self::Streaming => "streaming",
            Self::Bilateral => "bilateral",
        })
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    Float,
    Shift,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Weights {
    Standard,
    #[value(alias = "paper-literal")]
    FarCorner,
}

/// Failure classes mapped to exit statuses.
enum Failure {
    /// Bad flags, missing or malformed inputs.
    Invalid(String),
    /// Anything that fails after inputs were accepted.
    Runtime(String),
}

impl Failure {
    fn status(&self) -> u8 {
        match self {
            Self::Invalid(_) => 2,
            Self::Runtime(_) => 1,
        }
    }

    fn message(&self) -> &str {
        match self {
            Self::Invalid(m) | Self::Runtime(m) => m,
        }
    }
}

type Outcome = Result<(), Failure>;

fn invalid(e: impl std::fmt::Display) -> Failure {
    Failure::Invalid(e.to_string())
}

fn runtime(e: impl std::fmt::Display) -> Failure {
    Failure::Runtime(e.to_string())
}

fn parse_size(s: &str) -> Result<(usize, usize), String> {
    let (w, h) = s.split_once('x').ok_or("expected WIDTHxHEIGHT")?;
    let w: usize = w.parse().map_err(|_| "bad width")?;
    let h: usize = h.parse().map_err(|_| "bad height")?;
    if w == 0 || h == 0 {
        return Err("dimensions must be positive".into());
    }
    Ok((w, h))
}

fn read_image(path: &Path) -> Result<Image, Failure> {
    let bytes = std::fs::read(path).map_err(|e| invalid(format!("{}: {e}", path.display())))?;
    load_pgm(&bytes).map_err(|e| invalid(format!("{}: {e}", path.display())))
}

fn write_image(path: &Path, image: &Image) -> Outcome {
    std::fs::write(path, save_pgm(image)).map_err(|e| runtime(format!("{}: {e}", path.display())))
}

impl FilterArgs {
    fn resolve(&self) -> Result<(DenoiseParams, BgConfig), Failure> {
        let params =
            DenoiseParams::new(self.radius, self.sigma_s, self.sigma_r).map_err(invalid)?;
        let mode = match self.mode {
            Mode::Float => ArithmeticMode::Float,
            Mode::Shift => {
                if self.bit_budget == 0 || self.bit_budget > MAX_BIT_BUDGET {
                    return Err(invalid(format!(
                        "invalid parameter `bit_budget`: must be in 1..={MAX_BIT_BUDGET}"
                    )));
                }
                ArithmeticMode::shift_for(&params, self.bit_budget).map_err(invalid)?
            }
        };
        let weights = match self.ti_weights {
            Weights::Standard => TiWeights::Standard,
            Weights::FarCorner => TiWeights::FarCorner,
        };
        Ok((params, BgConfig::new(mode, weights)))
    }
}

fn run(command: Command) -> Outcome {
    match command {
        Command::Denoise {
            input,
            output,
            filter,
            engine,
        } => {
            let (params, config) = filter.resolve()?;
            let image = read_image(&input)?;
            let out = match engine {
                Engine::Reference => bg_denoise(&image, &params, &config),
                Engine::Streaming => {
                    bgrid::run_streaming(&image, &params, &config)
                        .map_err(runtime)?
                        .0
                }
            };
            write_image(&output, &out)
        }
        Command::Noise {
            input,
            output,
            sigma,
            seed,
        } => {
            if !(sigma >= 0.0 && sigma.is_finite()) {
                return Err(invalid(
                    "invalid parameter `sigma`: must be a finite value >= 0",
                ));
            }
            let image = read_image(&input)?;
            write_image(
                &output,
                &add_gaussian_noise(&image, sigma, seed).map_err(invalid)?,
            )
        }
        Command::Mssim { a, b } => {
            let (a, b) = (read_image(&a)?, read_image(&b)?);
            println!(
                "{:.6}",
                mssim(&a, &b, &MssimConfig::default()).map_err(invalid)?
            );
            Ok(())
        }
        Command::Psnr { a, b } => {
            let (a, b) = (read_image(&a)?, read_image(&b)?);
            let v = psnr(&a, &b).map_err(invalid)?;
            if v.is_infinite() {
                println!("inf");
            } else {
                println!("{v:.6}");
            }
            Ok(())
        }
        Command::Simulate {
            input,
            synthetic,
            output,
            filter,
            f_clk,
            grid_partitions,
            blurred_partitions,
        } => {
            let (params, config) = filter.resolve()?;
            if f_clk.iter().any(|f| !(*f > 0.0 && f.is_finite())) {
                return Err(invalid(
                    "invalid parameter `fclk`: frequencies must be finite and > 0",
                ));
            }
            let options = StreamOptions {
                partitions: PartitionLayout {
                    grid: grid_partitions,
                    blurred: blurred_partitions,
                },
            };
            options.validate().map_err(invalid)?;
            let image = match (input, synthetic) {
                (Some(path), _) => read_image(&path)?,
                (None, Some((w, h))) => textured_scene(w, h),
                (None, None) => unreachable!("clap requires one of --in/--synthetic"),
            };
            let (out, report) =
                run_streaming_with(&image, &params, &config, &options).map_err(runtime)?;
            let json = serde_json::to_string_pretty(&report.to_json(&f_clk)).map_err(runtime)?;
            println!("{json}");
            if let Some(path) = output {
                write_image(&path, &out)?;
            }
            audit_memory_accesses(&report)
                .map(|_| ())
                .map_err(|e| runtime(format!("port audit failed: {e}")))
        }
        Command::Bench {
            input,
            width,
            height,
            radii,
            sigma_s,
            sigma_r,
            noise_sigma,
            seed,
            engines,
        } => {
            let params: Vec<DenoiseParams> = radii
                .iter()
                .map(|&r| DenoiseParams::new(r, sigma_s, sigma_r))
                .collect::<Result<_, _>>()
                .map_err(invalid)?;
            let clean = match input {
                Some(path) => read_image(&path)?,
                None => {
                    if width == 0 || height == 0 {
                        return Err(invalid(
                            "invalid parameter `width/height`: must be positive",
                        ));
                    }
                    textured_scene(width, height)
                }
            };
            let noisy = add_gaussian_noise(&clean, noise_sigma, seed).map_err(invalid)?;
            let metric = MssimConfig::default();
            println!("r,engine,wall_time,cycles,stalls,mssim_vs_original");
            for p in &params {
                for &engine in &engines {
                    let start = Instant::now();
                    let (out, cycles) = match engine {
                        BenchEngine::Reference => {
                            (bg_denoise(&noisy, p, &BgConfig::default()), None)
                        }
                        BenchEngine::Bilateral => (bilateral_filter(&noisy, p), None),
                        BenchEngine::Streaming => {
                            let (out, report) =
                                bgrid::run_streaming(&noisy, p, &BgConfig::default())
                                    .map_err(runtime)?;
                            (out, Some((report.total_cycles, report.stall_cycles)))
                        }
                    };
                    let wall = start.elapsed().as_secs_f64();
                    let score = mssim(&out, &clean, &metric).map_err(invalid)?;
                    let (c, s) = cycles.map_or((String::new(), String::new()), |(c, s)| {
                        (c.to_string(), s.to_string())
                    });
                    println!("{},{engine},{wall:.6},{c},{s},{score:.6}", p.radius());
                }
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("bgrid: {}", f.message());
            ExitCode::from(f.status())
        }
    }
}
