use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use spinfield::bundle::{verify_angle_lemma, verify_cocycle};
use spinfield::fieldsynth::{draw_coefficients, levy_field, synthesize_field, FieldRealization, Grid, Reality};
use spinfield::inference::CheckOptions;
use spinfield::io::{write_realization, Format, SpectrumDocument};
use spinfield::so3::SpherePoint;
use spinfield::spectral::{halfsphere_f_coefficients, levy_phi_coefficients, sqrt_spectrum, CovarianceSpectrum, Parity, SignPolicy};
use spinfield::verify::{example_spin2_spectrum, levy_distance_suite, levy_variance_summary, spectrum_suite, Suite, SuiteOutcome, DEFAULT_SEED};
use spinfield::Error;

const EXAMPLE_SPECTRUM: &str = include_str!("../data/spin2.json");

#[derive(Parser)]
#[command(name = "spinfield", version, about = "Spin-weighted Gaussian random fields on the sphere")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Text,
    Packed,
}

#[derive(Clone, Copy, ValueEnum)]
enum PolicyArg {
    AllPlus,
    AlternatingOdd,
    AlternatingEven,
}

#[derive(Clone, Copy, ValueEnum)]
enum Builtin {
    /// Lévy covariance `c_ℓ` for the field T
    Levy,
    /// Half-sphere root of the Lévy covariance
    Halfsphere,
    /// The spin-2 example root shipped with the tool
    Spin2Example,
    /// All-zero covariance of the given spin and band limit
    Zero,
}

#[derive(clap::Args)]
struct GridArgs {
    /// Equiangular grid as THETAxPHI
    #[arg(long, default_value = "64x128")]
    grid: String,
    /// Node list file with one `theta phi` pair per line; overrides --grid
    #[arg(long)]
    points: Option<PathBuf>,
}

#[derive(clap::Args)]
struct OutputArgs {
    /// Output file; stdout when omitted
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "text")]
    format: FormatArg,
}

#[derive(Subcommand)]
enum Command {
    /// Synthesize a realization from a spectrum file
    Synth {
        #[arg(long)]
        spectrum: PathBuf,
        /// Required spin; must match the file when given
        #[arg(long, allow_hyphen_values = true)]
        spin: Option<i32>,
        /// Truncate the spectrum to this band limit
        #[arg(long)]
        band_limit: Option<usize>,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        /// Real-constrained draws (spin 0, real root only)
        #[arg(long)]
        real: bool,
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Lévy's spherical Brownian field W, with a variance summary
    Levy {
        #[arg(long, default_value_t = 100)]
        band_limit: usize,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        /// Draws for the variance summary
        #[arg(long, default_value_t = 10_000)]
        n: usize,
        /// Also check Var(W_x - W_y) = d(x, y) on five pairs
        #[arg(long)]
        check_distance: bool,
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Write a built-in spectrum, or the square root of a covariance file
    Spectrum {
        #[arg(long, value_enum, conflicts_with = "spectrum")]
        builtin: Option<Builtin>,
        /// Covariance file whose square root is written
        #[arg(long)]
        spectrum: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "all-plus")]
        policy: PolicyArg,
        #[arg(long, allow_hyphen_values = true, default_value_t = 0)]
        spin: i32,
        #[arg(long, default_value_t = 16)]
        band_limit: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run verification suites; exit 0 iff all pass
    Verify {
        /// Suite name, `all`, or `spectrum` (checks driven by --spectrum)
        #[arg(long, default_value = "spectrum")]
        suite: String,
        /// Spectrum for the `spectrum` suite; the shipped spin-2 example when omitted
        #[arg(long)]
        spectrum: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        /// Draws for the `spectrum` suite
        #[arg(long, default_value_t = 4000)]
        n: usize,
        /// Widen k-sigma bands for the number of simultaneous checks
        #[arg(long)]
        bonferroni: bool,
        /// Print full reports
        #[arg(long)]
        verbose: bool,
    },
    /// Angle lemma and cocycle identity on random charts
    BundleCheck {
        #[arg(long, default_value_t = 1000)]
        n: usize,
        #[arg(long, allow_hyphen_values = true, default_value_t = 2)]
        spin: i32,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
    },
}

enum Failure {
    Usage(String),
    Checks,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

type CmdResult = Result<(), Failure>;

fn parse_grid(args: &GridArgs) -> Result<Grid, Failure> {
    if let Some(path) = &args.points {
        let text = std::fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
        let mut points = Vec::new();
        for (i, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty() && !l.starts_with('#')) {
            let xs: Vec<f64> = line
                .split_whitespace()
                .map(str::parse)
                .collect::<Result<_, _>>()
                .map_err(|e| Failure::Usage(format!("{}:{}: {e}", path.display(), i + 1)))?;
            if xs.len() != 2 {
                return Err(Failure::Usage(format!("{}:{}: expected `theta phi`", path.display(), i + 1)));
            }
            points.push(SpherePoint::new(xs[0], xs[1]));
        }
        return Ok(Grid::Points(points));
    }
    let (t, p) = args
        .grid
        .split_once('x')
        .ok_or_else(|| Failure::Usage(format!("grid {:?} is not THETAxPHI", args.grid)))?;
    let parse = |v: &str| v.parse::<usize>().map_err(|_| Failure::Usage(format!("grid {:?} is not THETAxPHI", args.grid)));
    Ok(Grid::equiangular(parse(t)?, parse(p)?)?)
}

fn emit(field: &FieldRealization, output: &OutputArgs) -> CmdResult {
    let format = match output.format {
        FormatArg::Text => Format::Text,
        FormatArg::Packed => Format::Packed,
    };
    match &output.out {
        Some(path) => {
            let file = File::create(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
            let mut w = BufWriter::new(file);
            write_realization(field, format, &mut w)?;
            w.flush()?;
        }
        None => write_realization(field, format, io::stdout().lock())?,
    }
    eprintln!(
        "provenance: spectrum={} seed={} spin={} band_limit={} grid={} nodes={}",
        field.provenance.spectrum_id,
        field.provenance.seed,
        field.spin,
        field.band_limit,
        field.grid.kind(),
        field.values.len()
    );
    Ok(())
}

fn read_spectrum(path: &Path) -> Result<SpectrumDocument, Failure> {
    SpectrumDocument::read(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn report(outcomes: &[SuiteOutcome], verbose: bool) -> CmdResult {
    for o in outcomes {
        println!("{}", o.line());
        if verbose || !o.passed {
            print!("{}", o.details);
        }
    }
    if outcomes.iter().all(|o| o.passed) {
        Ok(())
    } else {
        Err(Failure::Checks)
    }
}

fn run(cli: Cli) -> CmdResult {
    match cli.command {
        Command::Synth {
            spectrum,
            spin,
            band_limit,
            seed,
            real,
            grid,
            output,
        } => {
            let doc = read_spectrum(&spectrum)?;
            if let Some(s) = spin {
                if s != doc.spin() {
                    return Err(Error::SpinMismatch(s, doc.spin()).into());
                }
            }
            let mut f = doc.root()?;
            if let Some(l) = band_limit {
                f = f.truncated(l)?;
            }
            let reality = if real { Reality::RealConstrained } else { Reality::ComplexGaussian };
            let draw = draw_coefficients(&f, seed, reality)?;
            let field = synthesize_field(&f, &draw, parse_grid(&grid)?)?;
            emit(&field, &output)
        }
        Command::Levy {
            band_limit,
            seed,
            n,
            check_distance,
            grid,
            output,
        } => {
            let field = levy_field(band_limit, seed, parse_grid(&grid)?)?;
            emit(&field, &output)?;
            let summary = levy_variance_summary(band_limit, n, seed)?;
            let mut ok = summary.passed();
            eprint!("{}", summary.to_text());
            if check_distance {
                let o = levy_distance_suite(band_limit, n, seed, CheckOptions::default());
                eprintln!("{}", o.line());
                eprint!("{}", o.details);
                ok &= o.passed;
            }
            if ok {
                Ok(())
            } else {
                Err(Failure::Checks)
            }
        }
        Command::Spectrum {
            builtin,
            spectrum,
            policy,
            spin,
            band_limit,
            out,
        } => {
            let doc = match (builtin, spectrum) {
                (Some(Builtin::Levy), _) => SpectrumDocument::Covariance(levy_phi_coefficients(band_limit)),
                (Some(Builtin::Halfsphere), _) => SpectrumDocument::Root(halfsphere_f_coefficients(band_limit)),
                (Some(Builtin::Spin2Example), _) => SpectrumDocument::Root(example_spin2_spectrum()),
                (Some(Builtin::Zero), _) => {
                    let lo = spin.unsigned_abs() as usize;
                    let c = vec![0.0; (band_limit + 1).saturating_sub(lo)];
                    SpectrumDocument::Covariance(CovarianceSpectrum::new(spin, band_limit, c)?)
                }
                (None, Some(path)) => {
                    let phi = match read_spectrum(&path)? {
                        SpectrumDocument::Covariance(c) => c,
                        SpectrumDocument::Root(_) => {
                            return Err(Failure::Usage("--spectrum expects a covariance file".into()))
                        }
                    };
                    let signs = match policy {
                        PolicyArg::AllPlus => SignPolicy::AllPlus,
                        PolicyArg::AlternatingOdd => SignPolicy::Alternating(Parity::Odd),
                        PolicyArg::AlternatingEven => SignPolicy::Alternating(Parity::Even),
                    };
                    SpectrumDocument::Root(sqrt_spectrum(&phi, &signs)?)
                }
                (None, None) => return Err(Failure::Usage("give --builtin or --spectrum".into())),
            };
            match out {
                Some(path) => doc.write(&path)?,
                None => print!("{}", doc.to_json()),
            }
            eprintln!(
                "spectrum: kind={} spin={} band_limit={} hash={}",
                doc.kind(),
                doc.spin(),
                doc.band_limit(),
                doc.hash()
            );
            Ok(())
        }
        Command::Verify {
            suite,
            spectrum,
            seed,
            n,
            bonferroni,
            verbose,
        } => {
            let opts = CheckOptions {
                bonferroni,
                ..CheckOptions::default()
            };
            let outcomes = match suite.as_str() {
                "spectrum" => {
                    let doc = match spectrum {
                        Some(path) => read_spectrum(&path)?,
                        None => SpectrumDocument::from_json(EXAMPLE_SPECTRUM)?,
                    };
                    println!("spectrum: kind={} hash={} seed={seed}", doc.kind(), doc.hash());
                    vec![spectrum_suite(&doc, n, seed, opts)]
                }
                "all" => Suite::ALL.iter().map(|s| s.run(seed, opts)).collect(),
                name => match Suite::from_name(name) {
                    Some(s) => vec![s.run(seed, opts)],
                    None => {
                        let names: Vec<&str> = Suite::ALL.iter().map(|s| s.name()).collect();
                        return Err(Failure::Usage(format!(
                            "unknown suite {name:?}; expected spectrum, all, or one of {}",
                            names.join(", ")
                        )));
                    }
                },
            };
            report(&outcomes, verbose)
        }
        Command::BundleCheck { n, spin, seed } => {
            let lemma = verify_angle_lemma(n, seed);
            let cocycle = verify_cocycle(spin, n, seed ^ 1);
            print!("{}{}", lemma.to_text(), cocycle.to_text());
            if lemma.passed() && cocycle.passed() {
                Ok(())
            } else {
                Err(Failure::Checks)
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Checks) => ExitCode::from(1),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
