//! `cvent` command-line front end.
//!
//! Exit codes: 0 success, 2 usage error, 3 input validation failure (malformed or
//! unphysical matrix, unreadable file), 4 numerical failure. JSON (or CSV) goes to
//! stdout or `--out`; a short human summary goes to stderr.

use std::ffi::OsString;
use std::fs;
use std::io::{Read, Write};
use std::path::PathBuf;

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use nalgebra::DMatrix;
use serde::Serialize;
use serde_json::json;

use crate::channels::{disentanglement_threshold, loss_sweep, uniform_grid};
use crate::criteria::{classify_tripartite, ppt_all, ppt_test, vlf_inequalities, VlfResult, VLF_ALPHA_SYMBOL};
use crate::error::Error;
use crate::gaussian::{symplectic_eigenvalues, validate_covariance, StateMeta};
use crate::gaussianity::{gaussianity_test_with_blocks, DEFAULT_BLOCKS, DEFAULT_Z_THRESHOLD, MAX_ORDER};
use crate::io::{parse_f64le_samples, parse_state, parse_text_samples, StateFile};
use crate::synth::{self, TripletParams, ROBUST_FIXTURE, SUDDEN_DEATH_FIXTURE};
use crate::uncertainty::{monte_carlo, ErrorModel, DEFAULT_SAMPLES, DEFAULT_SHOT_NOISE_REL};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_INPUT: i32 = 3;
pub const EXIT_NUMERICAL: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "cvent", version, about = "Entanglement analysis of Gaussian covariance matrices")]
struct Cli {
    /// Write the result here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SampleFormat {
    Text,
    F64le,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Fixture {
    SuddenDeath,
    Robust,
}

#[derive(Debug, Args)]
struct Input {
    /// Covariance JSON file, or `-` for stdin.
    input: PathBuf,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check symmetry, positive definiteness and physicality.
    Validate(Input),
    /// Symplectic eigenvalues of the untransposed matrix.
    Symplectic(Input),
    /// PPT test across each (mode | rest) cut.
    Ppt {
        #[command(flatten)]
        input: Input,
        /// Only transpose this mode.
        #[arg(long)]
        mode: Option<usize>,
    },
    /// The three van Loock–Furusawa inequalities (three modes).
    Vlf(Input),
    /// Full/partial inseparability from the PPT pattern (three modes).
    Classify(Input),
    /// Smallest transposed symplectic eigenvalue as a function of transmittance.
    LossSweep {
        #[command(flatten)]
        input: Input,
        #[arg(long, value_delimiter = ',', default_value = "1,2")]
        lossy: Vec<usize>,
        /// Number of equally spaced transmittances in [0, 1].
        #[arg(long, default_value_t = 200)]
        grid: usize,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Largest transmittance at which a cut becomes separable under loss.
    SuddenDeath {
        #[command(flatten)]
        input: Input,
        /// Transposed mode; all modes when omitted.
        #[arg(long)]
        transpose: Option<usize>,
        #[arg(long, value_delimiter = ',', default_value = "1,2")]
        lossy: Vec<usize>,
    },
    /// Monte Carlo error bars for every criterion.
    Montecarlo {
        #[command(flatten)]
        input: Input,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_SAMPLES)]
        samples: usize,
        #[arg(long, default_value_t = DEFAULT_SHOT_NOISE_REL)]
        shot_noise_rel: f64,
        /// Uniform per-entry standard deviation; overrides the file's `errors`.
        #[arg(long)]
        entry_std: Option<f64>,
    },
    /// Central moments up to order 10 against Gaussian predictions.
    Moments {
        /// Sample file, or `-` for stdin.
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = SampleFormat::Text)]
        input_format: SampleFormat,
        #[arg(long, default_value_t = MAX_ORDER)]
        kmax: usize,
        #[arg(long, default_value_t = DEFAULT_Z_THRESHOLD)]
        z_threshold: f64,
        #[arg(long, default_value_t = DEFAULT_BLOCKS)]
        blocks: usize,
    },
    /// Emit a synthetic covariance matrix.
    Gen(GenArgs),
}

#[derive(Debug, Args)]
#[group(skip)]
#[command(group(ArgGroup::new("kind").required(true).args(["vacuum", "thermal", "tmsv", "triplet", "fixture"])))]
struct GenArgs {
    /// Vacuum state on `--modes` modes.
    #[arg(long)]
    vacuum: bool,
    /// Thermal state with this quadrature variance on `--modes` modes.
    #[arg(long)]
    thermal: Option<f64>,
    /// Two-mode squeezed vacuum with this squeezing parameter.
    #[arg(long)]
    tmsv: Option<f64>,
    /// Pump/twin triplet: key=value pairs among r_twin, r_pump, n_th, asymmetry.
    #[arg(long, num_args = 1..)]
    triplet: Option<Vec<String>>,
    /// One of the frozen triplet fixtures.
    #[arg(long, value_enum)]
    fixture: Option<Fixture>,
    #[arg(long, default_value_t = 3)]
    modes: usize,
    #[arg(long)]
    label: Option<String>,
    #[arg(long)]
    sigma_pump: Option<f64>,
}

/// Failure carrying its exit code.
#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure {
            code: if e.is_input_error() { EXIT_INPUT } else { EXIT_NUMERICAL },
            message: e.to_string(),
        }
    }
}

fn usage(message: String) -> Failure {
    Failure {
        code: EXIT_USAGE,
        message,
    }
}

fn input_failure(message: String) -> Failure {
    Failure {
        code: EXIT_INPUT,
        message,
    }
}

struct Output {
    body: String,
    summary: String,
    code: i32,
}

impl Output {
    fn json<T: Serialize>(value: &T, summary: String) -> Self {
        Output {
            body: serde_json::to_string_pretty(value).expect("report serializes") + "\n",
            summary,
            code: EXIT_OK,
        }
    }
}

/// Parses `argv` (including the program name) and runs one subcommand against the
/// process's stdin, stdout and stderr.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdin = std::io::stdin();
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(argv, &mut stdin.lock(), &mut stdout.lock(), &mut stderr.lock())
}

/// [`run`] with explicit streams.
pub fn run_with<I, T>(argv: I, stdin: &mut dyn Read, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                write!(stderr, "{}", text)
            } else {
                write!(stdout, "{}", text)
            };
            return code;
        }
    };

    let result = dispatch(&cli.command, stdin, stderr);
    match result {
        Ok(out) => {
            if !out.summary.is_empty() {
                let _ = writeln!(stderr, "{}", out.summary);
            }
            let written = match &cli.out {
                Some(path) => fs::write(path, &out.body).map_err(|e| e.to_string()),
                None => stdout.write_all(out.body.as_bytes()).map_err(|e| e.to_string()),
            };
            if let Err(e) = written {
                let _ = writeln!(stderr, "error: cannot write output: {}", e);
                return EXIT_INPUT;
            }
            out.code
        }
        Err(f) => {
            let _ = writeln!(stderr, "error: {}", f.message);
            f.code
        }
    }
}

fn read_source(path: &PathBuf, stdin: &mut dyn Read) -> Result<Vec<u8>, Failure> {
    if path.as_os_str() == "-" {
        let mut buf = Vec::new();
        stdin
            .read_to_end(&mut buf)
            .map_err(|e| input_failure(format!("cannot read stdin: {}", e)))?;
        Ok(buf)
    } else {
        fs::read(path).map_err(|e| input_failure(format!("cannot read {}: {}", path.display(), e)))
    }
}

fn load_state(input: &Input, stdin: &mut dyn Read) -> Result<StateFile, Failure> {
    let bytes = read_source(&input.input, stdin)?;
    let text = String::from_utf8(bytes).map_err(|_| input_failure(format!("{} is not UTF-8", input.input.display())))?;
    parse_state(&text).map_err(|e| input_failure(format!("{}: {}", input.input.display(), e)))
}

fn warn_if_unphysical(file: &StateFile, stderr: &mut dyn Write) -> Result<(), Failure> {
    let report = validate_covariance(&file.cm)?;
    if !report.physical {
        let _ = writeln!(
            stderr,
            "warning: input state is unphysical (nu_min = {:.6}); results are reported anyway",
            report.nu_min
        );
    }
    Ok(())
}

fn vlf_json(v: &VlfResult) -> serde_json::Value {
    json!({
        "v": v.v,
        "alpha": v.alpha,
        "alpha_symbols": VLF_ALPHA_SYMBOL.map(|i| format!("alpha{}", i)),
        "violated": v.violated,
        "violations": v.violation_count(),
    })
}

fn dispatch(command: &Command, stdin: &mut dyn Read, stderr: &mut dyn Write) -> Result<Output, Failure> {
    match command {
        Command::Validate(input) => {
            let file = load_state(input, stdin)?;
            let report = validate_covariance(&file.cm)?;
            let mut out = Output::json(
                &report,
                format!(
                    "symmetric={} positive_definite={} physical={} nu_min={:.9}",
                    report.symmetric, report.positive_definite, report.physical, report.nu_min
                ),
            );
            if !report.physical {
                out.code = EXIT_INPUT;
            }
            Ok(out)
        }
        Command::Symplectic(input) => {
            let file = load_state(input, stdin)?;
            let spectrum = symplectic_eigenvalues(&file.cm)?;
            Ok(Output::json(
                &json!({ "spectrum": spectrum, "nu_min": spectrum.min() }),
                format!("nu_min = {:.9}", spectrum.min()),
            ))
        }
        Command::Ppt { input, mode } => {
            let file = load_state(input, stdin)?;
            warn_if_unphysical(&file, stderr)?;
            let results = match mode {
                Some(k) => vec![ppt_test(&file.cm, *k)?],
                None => ppt_all(&file.cm)?,
            };
            let summary = results
                .iter()
                .map(|r| format!("mode {}: nu_min={:.9} npt={}", r.transposed_mode, r.nu_min, r.npt))
                .collect::<Vec<_>>()
                .join("\n");
            Ok(Output::json(&json!({ "ppt": results }), summary))
        }
        Command::Vlf(input) => {
            let file = load_state(input, stdin)?;
            warn_if_unphysical(&file, stderr)?;
            let v = vlf_inequalities(&file.cm)?;
            Ok(Output::json(
                &json!({ "vlf": vlf_json(&v) }),
                format!("V = [{:.6}, {:.6}, {:.6}], violations = {}", v.v[0], v.v[1], v.v[2], v.violation_count()),
            ))
        }
        Command::Classify(input) => {
            let file = load_state(input, stdin)?;
            warn_if_unphysical(&file, stderr)?;
            let report = classify_tripartite(&file.cm)?;
            let v = vlf_inequalities(&file.cm)?;
            Ok(Output::json(
                &json!({
                    "ppt": report.ppt,
                    "vlf": vlf_json(&v),
                    "npt_flags": report.npt_flags,
                    "class": report.klass,
                    "ppt_pattern_only": report.ppt_pattern_only,
                }),
                format!("class = {}", report.klass.label()),
            ))
        }
        Command::LossSweep {
            input,
            lossy,
            grid,
            format,
        } => {
            let file = load_state(input, stdin)?;
            warn_if_unphysical(&file, stderr)?;
            if *grid < 2 {
                return Err(usage(format!("--grid needs at least 2 points, got {}", grid)));
            }
            let curve = loss_sweep(&file.cm, lossy, &uniform_grid(*grid))?;
            let summary = format!("{} grid points, lossy modes {:?}", curve.grid.len(), lossy);
            Ok(match format {
                Format::Csv => Output {
                    body: curve.to_csv(),
                    summary,
                    code: EXIT_OK,
                },
                Format::Json => Output::json(&curve, summary),
            })
        }
        Command::SuddenDeath {
            input,
            transpose,
            lossy,
        } => {
            let file = load_state(input, stdin)?;
            warn_if_unphysical(&file, stderr)?;
            let modes: Vec<usize> = match transpose {
                Some(k) => vec![*k],
                None => (0..file.cm.n_modes()).collect(),
            };
            let mut rows = Vec::new();
            let mut summary = Vec::new();
            for k in modes {
                let th = disentanglement_threshold(&file.cm, k, lossy)?;
                summary.push(match (th.separable_without_loss, th.t_star) {
                    (true, _) => format!("mode {}: separable without loss", k),
                    (false, Some(t)) => format!("mode {}: disentangles at T* = {:.6}", k, t),
                    (false, None) => format!("mode {}: entangled down to total loss", k),
                });
                rows.push(json!({
                    "transposed_mode": k,
                    "t_star": th.t_star,
                    "separable_without_loss": th.separable_without_loss,
                    "nu_at_full_transmission": th.nu_at_full_transmission,
                }));
            }
            Ok(Output::json(
                &json!({ "lossy_modes": lossy, "thresholds": rows }),
                summary.join("\n"),
            ))
        }
        Command::Montecarlo {
            input,
            seed,
            samples,
            shot_noise_rel,
            entry_std,
        } => {
            let file = load_state(input, stdin)?;
            let dim = file.cm.dim();
            let entry = match (entry_std, &file.errors) {
                (Some(s), _) => DMatrix::from_element(dim, dim, *s),
                (None, Some(e)) => e.clone(),
                (None, None) => DMatrix::zeros(dim, dim),
            };
            let em = ErrorModel {
                entry_std: entry,
                shot_noise_rel: *shot_noise_rel,
                n_samples: *samples,
                seed: *seed,
            };
            let report = monte_carlo(&file.cm, &em)?;
            let summary = report
                .modes
                .iter()
                .map(|m| format!("mode {}: nu_min = {:.6} ± {:.6}", m.mode, m.nu_min.mean, m.nu_min.std))
                .collect::<Vec<_>>()
                .join("\n");
            Ok(Output::json(&report, summary))
        }
        Command::Moments {
            input,
            input_format,
            kmax,
            z_threshold,
            blocks,
        } => {
            let bytes = read_source(input, stdin)?;
            let samples = match input_format {
                SampleFormat::Text => {
                    let text = String::from_utf8(bytes).map_err(|_| input_failure("sample file is not UTF-8".into()))?;
                    parse_text_samples(&text)?
                }
                SampleFormat::F64le => parse_f64le_samples(&bytes)?,
            };
            let report = gaussianity_test_with_blocks(&samples, *kmax, *z_threshold, *blocks)?;
            Ok(Output::json(
                &report,
                format!("{} samples, gaussian = {}", report.n_samples, report.pass),
            ))
        }
        Command::Gen(args) => generate(args),
    }
}

fn parse_triplet(pairs: &[String]) -> Result<TripletParams, Failure> {
    let mut params = TripletParams::new(0.0, 0.0);
    for pair in pairs {
        let (key, value) = pair
            .split_once('=')
            .ok_or_else(|| usage(format!("--triplet expects key=value, got \"{}\"", pair)))?;
        let num = |s: &str| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| usage(format!("--triplet {}: cannot parse \"{}\"", key, s)))
        };
        match key {
            "r_twin" => params.r_twin = num(value)?,
            "r_pump" => params.r_pump = num(value)?,
            "asymmetry" => params.asymmetry = num(value)?,
            "n_th" => {
                let vals = value.split(',').map(num).collect::<Result<Vec<_>, _>>()?;
                params.n_th = match vals.as_slice() {
                    [n] => [*n; 3],
                    [a, b, c] => [*a, *b, *c],
                    _ => return Err(usage("--triplet n_th takes one value or three comma-separated values".into())),
                };
            }
            other => return Err(usage(format!("--triplet: unknown key \"{}\"", other))),
        }
    }
    Ok(params)
}

fn generate(args: &GenArgs) -> Result<Output, Failure> {
    let (cm, description) = if args.vacuum {
        (synth::vacuum(args.modes)?, format!("vacuum, {} modes", args.modes))
    } else if let Some(v) = args.thermal {
        (synth::thermal(args.modes, v)?, format!("thermal v={}, {} modes", v, args.modes))
    } else if let Some(r) = args.tmsv {
        (synth::two_mode_squeezed(r)?, format!("two-mode squeezed r={}", r))
    } else if let Some(pairs) = &args.triplet {
        let p = parse_triplet(pairs)?;
        (synth::pump_twin_triplet(&p)?, format!("triplet {:?}", p))
    } else if let Some(f) = args.fixture {
        let p = match f {
            Fixture::SuddenDeath => SUDDEN_DEATH_FIXTURE,
            Fixture::Robust => ROBUST_FIXTURE,
        };
        (synth::pump_twin_triplet(&p)?, format!("fixture {:?}", p))
    } else {
        return Err(usage("gen needs one of --vacuum, --thermal, --tmsv, --triplet, --fixture".into()));
    };
    let mut file = StateFile::new(cm);
    if args.label.is_some() || args.sigma_pump.is_some() {
        let meta = StateMeta {
            sigma_pump: args.sigma_pump,
            label: args.label.clone().unwrap_or_default(),
            ..Default::default()
        };
        meta.validate()?;
        file = file.with_meta(meta);
    }
    Ok(Output {
        body: file.to_json() + "\n",
        summary: description,
        code: EXIT_OK,
    })
}
