//! Command-line front end: channel validation, A-/B-unitality and
//! unitality detection, entropy and conditional entropy, ACVENN checks,
//! witness construction, gallery export, entropy bounds, and a self test.
//!
//! Exit codes: 0 = verdict true / computation done, 1 = verdict false,
//! 2 = input or validation error.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use condent::bounds::cve_bounds;
use condent::detect::{
    build_resource_witness, find_cve_decrease, is_a_unital, is_acvenn, is_b_unital, is_unital,
    DetectionReport, DETECT_TOL,
};
use condent::error::Error;
use condent::gallery::{gallery_channel, gallery_names};
use condent::io::{
    channel_from_json, channel_report_from_json, channel_to_json, from_json_str, state_from_json,
    state_to_json, to_json_string, ChannelJson, StateJson,
};
use condent::states::{conditional_entropy, von_neumann_entropy, DensityMatrix};

mod selftest;

#[derive(Parser)]
#[command(
    name = "condent",
    version,
    about = "Conditional-entropy resource detection for quantum channels"
)]
struct Cli {
    /// Output format for reports.
    #[arg(long, value_enum, default_value_t = Format::Human, global = true)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Format {
    Human,
    Json,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Detector {
    Aunital,
    Bunital,
    Unital,
}

#[derive(Subcommand)]
enum Command {
    /// Check the CPTP invariants of a channel file.
    Validate { channel: PathBuf },
    /// Run a detector on a channel file.
    Detect {
        #[arg(value_enum)]
        detector: Detector,
        channel: PathBuf,
        /// Frobenius deviation tolerance.
        #[arg(long, default_value_t = DETECT_TOL)]
        tol: f64,
    },
    /// Von Neumann entropy of a state file, in bits.
    Entropy { state: PathBuf },
    /// Conditional entropy of a state file, in bits.
    Cve {
        state: PathBuf,
        /// Comma-separated labels of the conditioning side, e.g. "A" or "A',A".
        #[arg(long, value_delimiter = ',')]
        a_labels: Vec<String>,
    },
    /// Absolute conditional-entropy nonnegativity of a state file.
    Acvenn {
        state: PathBuf,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// Search for a conditional-entropy decrease and build a witness.
    Witness {
        channel: PathBuf,
        #[arg(long, default_value_t = 500)]
        samples: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Where to write the witness input state.
        #[arg(short, long, default_value = "witness_state.json")]
        output: PathBuf,
    },
    /// Write a named gallery channel as a channel file.
    Gallery {
        /// Entry name, or "list" to enumerate.
        name: String,
        #[arg(long, default_value_t = 2)]
        dim: usize,
        /// Output path; stdout when omitted.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Conditional-entropy bounds at a given entropy.
    Bounds {
        #[arg(long)]
        entropy: f64,
        #[arg(long)]
        dim: usize,
        /// Write the lower-bound attaining state here.
        #[arg(long)]
        lower_attainer: Option<PathBuf>,
        /// Write the upper-bound attaining state here.
        #[arg(long)]
        upper_attainer: Option<PathBuf>,
    },
    /// Run the built-in fixture and theorem checks.
    Selftest {
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Corrupt a named gallery fixture to exercise failure reporting.
        #[arg(long, hide = true)]
        inject_fault: Option<String>,
    },
}

fn main() {
    let cli = Cli::parse();
    let code = match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    };
    std::process::exit(code);
}

fn read_state(path: &Path) -> Result<DensityMatrix, Error> {
    let text =
        fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    let sj: StateJson =
        from_json_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    state_from_json(&sj)
}

fn read_channel_json(path: &Path) -> Result<ChannelJson, Error> {
    let text =
        fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    from_json_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

fn write_state(path: &Path, rho: &DensityMatrix) -> Result<(), Error> {
    let json = to_json_string(&state_to_json(rho))?;
    fs::write(path, json).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

fn print_json<T: Serialize>(value: &T) -> Result<(), Error> {
    println!("{}", to_json_string(value)?);
    Ok(())
}

#[derive(Serialize)]
struct EntropyOut {
    entropy: f64,
}

#[derive(Serialize)]
struct CveOut {
    conditional_entropy: f64,
    a_labels: Vec<String>,
}

#[derive(Serialize)]
struct AcvennOut {
    verdict: bool,
    entropy: f64,
    threshold: f64,
    tolerance_used: f64,
}

#[derive(Serialize)]
struct WitnessOut {
    found: bool,
    cve_in: f64,
    cve_out: f64,
    input_cve: f64,
    output_cve: f64,
    channel_ref: String,
    witness_path: String,
}

#[derive(Serialize)]
struct BoundsOut {
    entropy_x: f64,
    lower: f64,
    upper: f64,
    lower_attainer: StateJson,
    upper_attainer: StateJson,
}

fn run(cli: &Cli) -> Result<i32, Error> {
    match &cli.command {
        Command::Validate { channel } => {
            let cj = read_channel_json(channel)?;
            let report = channel_report_from_json(&cj)?;
            match cli.format {
                Format::Json => print_json(&report)?,
                Format::Human => {
                    println!("trace-preserving deviation: {:.3e}", report.tp_deviation);
                    println!(
                        "Choi minimum eigenvalue:    {:.3e}",
                        report.choi_min_eigenvalue
                    );
                    println!("accepted: {}", report.accepted);
                }
            }
            Ok(if report.accepted { 0 } else { 1 })
        }
        Command::Detect {
            detector,
            channel,
            tol,
        } => {
            if *tol <= 0.0 {
                return Err(Error::Argument("tolerance must be positive".into()));
            }
            let ch = channel_from_json(&read_channel_json(channel)?)?;
            let report = match detector {
                Detector::Aunital => is_a_unital(&ch, *tol)?,
                Detector::Bunital => is_b_unital(&ch, *tol)?,
                Detector::Unital => is_unital(&ch, *tol)?,
            };
            print_detection(cli.format, &report)?;
            Ok(if report.verdict { 0 } else { 1 })
        }
        Command::Entropy { state } => {
            let rho = read_state(state)?;
            let s = von_neumann_entropy(&rho);
            match cli.format {
                Format::Json => print_json(&EntropyOut { entropy: s })?,
                Format::Human => println!("entropy: {s:.6} bits"),
            }
            Ok(0)
        }
        Command::Cve { state, a_labels } => {
            let rho = read_state(state)?;
            let refs: Vec<&str> = a_labels.iter().map(String::as_str).collect();
            let cve = conditional_entropy(&rho, &refs)?;
            match cli.format {
                Format::Json => print_json(&CveOut {
                    conditional_entropy: cve,
                    a_labels: a_labels.clone(),
                })?,
                Format::Human => println!("conditional entropy: {cve:.6} bits"),
            }
            Ok(0)
        }
        Command::Acvenn { state, tol } => {
            let rho = read_state(state)?;
            let verdict = is_acvenn(&rho, *tol)?;
            let entropy = von_neumann_entropy(&rho);
            let (a_side, _) = rho.layout().side_split();
            let a_refs: Vec<&str> = a_side.iter().map(String::as_str).collect();
            let threshold = (rho.layout().dim_of_set(&a_refs)? as f64).log2();
            match cli.format {
                Format::Json => print_json(&AcvennOut {
                    verdict,
                    entropy,
                    threshold,
                    tolerance_used: *tol,
                })?,
                Format::Human => {
                    println!("entropy: {entropy:.6} bits, threshold: {threshold:.6} bits");
                    println!("absolutely nonnegative conditional entropy: {verdict}");
                }
            }
            Ok(if verdict { 0 } else { 1 })
        }
        Command::Witness {
            channel,
            samples,
            seed,
            output,
        } => {
            let ch = channel_from_json(&read_channel_json(channel)?)?;
            let Some(hit) = find_cve_decrease(&ch, *samples, *seed)? else {
                match cli.format {
                    Format::Json => println!("{{\"found\":false}}"),
                    Format::Human => println!(
                        "no conditional-entropy decrease found over {samples} samples \
                         (not a proof of freeness; run `detect aunital` for a certificate)"
                    ),
                }
                return Ok(1);
            };
            let mut witness = build_resource_witness(&ch, &hit.state, hit.cve_in, hit.cve_out)?;
            witness.channel_ref = channel.display().to_string();
            write_state(output, &witness.input_state)?;
            let out = WitnessOut {
                found: true,
                cve_in: hit.cve_in,
                cve_out: hit.cve_out,
                input_cve: witness.input_cve,
                output_cve: witness.output_cve,
                channel_ref: witness.channel_ref.clone(),
                witness_path: output.display().to_string(),
            };
            match cli.format {
                Format::Json => print_json(&out)?,
                Format::Human => {
                    println!("decrease: {:.6} -> {:.6} bits", out.cve_in, out.cve_out);
                    println!(
                        "witness input CVE {:.6}, output CVE {:.6}",
                        out.input_cve, out.output_cve
                    );
                    println!("witness state written to {}", out.witness_path);
                }
            }
            Ok(0)
        }
        Command::Gallery { name, dim, output } => {
            if name == "list" {
                for n in gallery_names() {
                    println!("{n}");
                }
                return Ok(0);
            }
            let ch = gallery_channel(name, *dim)?;
            let json = to_json_string(&channel_to_json(&ch))?;
            match output {
                Some(path) => {
                    fs::write(path, json)
                        .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
                    if cli.format == Format::Human {
                        println!("wrote {name} (d={dim}) to {}", path.display());
                    }
                }
                None => println!("{json}"),
            }
            Ok(0)
        }
        Command::Bounds {
            entropy,
            dim,
            lower_attainer,
            upper_attainer,
        } => {
            let r = cve_bounds(*entropy, *dim)?;
            if let Some(path) = lower_attainer {
                write_state(path, &r.lower_attainer)?;
            }
            if let Some(path) = upper_attainer {
                write_state(path, &r.upper_attainer)?;
            }
            match cli.format {
                Format::Json => print_json(&BoundsOut {
                    entropy_x: r.entropy_x,
                    lower: r.lower,
                    upper: r.upper,
                    lower_attainer: state_to_json(&r.lower_attainer),
                    upper_attainer: state_to_json(&r.upper_attainer),
                })?,
                Format::Human => {
                    println!("entropy: {:.6} bits", r.entropy_x);
                    println!(
                        "conditional entropy range: [{:.6}, {:.6}]",
                        r.lower, r.upper
                    );
                }
            }
            Ok(0)
        }
        Command::Selftest { seed, inject_fault } => {
            let results = selftest::run_selftest(*seed, inject_fault.as_deref());
            let all_passed = results.iter().all(|r| r.passed);
            match cli.format {
                Format::Json => {
                    for r in &results {
                        print_json(r)?;
                    }
                }
                Format::Human => {
                    for r in &results {
                        let mark = if r.passed { "pass" } else { "FAIL" };
                        println!("[{mark}] {}: {}", r.theorem, r.detail);
                    }
                }
            }
            Ok(if all_passed { 0 } else { 1 })
        }
    }
}

fn print_detection(format: Format, report: &DetectionReport) -> Result<(), Error> {
    match format {
        Format::Json => print_json(report)?,
        Format::Human => {
            println!("verdict: {}", report.verdict);
            println!(
                "max deviation: {:.3e} (tolerance {:.3e})",
                report.max_deviation, report.tolerance_used
            );
            for (i, dev) in &report.per_probe {
                println!("  probe {i}: {dev:.3e}");
            }
        }
    }
    Ok(())
}
