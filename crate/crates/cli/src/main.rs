//! `qnet`: build, validate, take logarithms of, decompose and Fock-verify
//! scattering matrices of linear quantum-optical networks.
//!
//! Every verb reads one JSON document (a path, or stdin when the path is
//! omitted or `-`) and writes one JSON document to stdout or `--output`.
//! Exit codes: 0 success, 1 I/O or malformed input, 2 validation failure,
//! 3 no single effective Hamiltonian.

use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;
use serde_json::Value;

use qnet::blochmessiah::{factorize_g, factorize_g0};
use qnet::elements::{ElementKind, ElementSpec};
use qnet::fock::{self, FockSpace, HeisenbergReport};
use qnet::group::{validate_generator, validate_scattering, FormClass, QUASI_UNITARITY};
use qnet::hamiltonian::{effective_hamiltonian, scattering_at_time};
use qnet::io::{self as qio, FactorizationDoc, HamiltonianDoc, LogDoc, MatrixDoc, MatrixListDoc};
use qnet::logm::{expm, hamiltonian_log, LogOutcome};
use qnet::{ComplexMatrix, Error, Generator, ScatteringMatrix, C64, DEFAULT_TOL};

#[derive(Parser)]
#[command(name = "qnet", version, about = "Effective Hamiltonians and decompositions of linear optical networks")]
struct Cli {
    /// Write the JSON result to this file instead of stdout.
    #[arg(short, long, global = true)]
    output: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Emit the scattering matrix of a catalogue element, or of a random
    /// network with `random`.
    Element {
        /// beam_splitter, parametric_amplifier, phase_shifter,
        /// single_mode_squeezer, squeezer_pi, compensated_tap, identity or
        /// random.
        kind: String,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        phi: f64,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        zeta: f64,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        theta: f64,
        /// Mode count for `identity` and `random`.
        #[arg(long)]
        modes: Option<usize>,
        /// Frobenius norm of the random generator.
        #[arg(long, default_value_t = 0.5)]
        norm: f64,
        /// Seed for `random`.
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Check quasi-unitarity and block structure (or the Lie condition with
    /// `--generator`).
    Validate {
        input: Option<PathBuf>,
        #[arg(long)]
        generator: bool,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tolerance: f64,
    },
    /// Logarithm `K` with `expm(K) = S` in the physical algebra.
    Log {
        input: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tolerance: f64,
    },
    /// Effective Hamiltonian matrix `H = -i G K` of a generator.
    Hamiltonian {
        input: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tolerance: f64,
    },
    /// Three-factor decomposition passive x squeezer x passive.
    Decompose {
        input: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = VariantArg::G)]
        variant: VariantArg,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tolerance: f64,
    },
    /// Matrix exponential of a generator, or of each generator in a list.
    Exp {
        input: Option<PathBuf>,
        /// Fictitious time: emits `expm(tau K)`.
        #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
        tau: f64,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tolerance: f64,
    },
    /// Product of scattering matrices, left to right, across all inputs.
    Compose {
        inputs: Vec<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tolerance: f64,
    },
    /// Check a scattering matrix against its Fock-space operator.
    FockVerify {
        input: Option<PathBuf>,
        #[arg(long, default_value_t = 10)]
        cutoff: usize,
        #[arg(long, default_value_t = 3)]
        max_photons: usize,
        /// Pass threshold for the Heisenberg residual.
        #[arg(long, default_value_t = 1e-5)]
        tolerance: f64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum VariantArg {
    G0,
    G,
}

enum Failure {
    Input(String),
    Invalid(String),
    NoHamiltonian,
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Input(_) => 1,
            Failure::Invalid(_) => 2,
            Failure::NoHamiltonian => 3,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::NotScattering(_)
            | Error::NotGenerator { .. }
            | Error::NotHermitian { .. }
            | Error::NotUnitary { .. }
            | Error::ModeMismatch { .. }
            | Error::InvariantViolation(_)
            | Error::DegeneracyUnresolved { .. } => Failure::Invalid(e.to_string()),
            _ => Failure::Input(e.to_string()),
        }
    }
}

type Outcome<T> = Result<T, Failure>;

fn read_text(path: Option<&Path>) -> Outcome<String> {
    let mut text = String::new();
    match path {
        None => io::stdin().read_to_string(&mut text).map(|_| ()),
        Some(p) if p.as_os_str() == "-" => io::stdin().read_to_string(&mut text).map(|_| ()),
        Some(p) => fs::read_to_string(p).map(|t| text = t),
    }
    .map_err(|e| Failure::Input(format!("cannot read input: {e}")))?;
    Ok(text)
}

fn read_value(path: Option<&Path>) -> Outcome<Value> {
    serde_json::from_str(&read_text(path)?)
        .map_err(|e| Failure::Input(format!("input is not valid JSON: {e}")))
}

fn read_matrix(path: Option<&Path>) -> Outcome<ComplexMatrix> {
    Ok(qio::extract_matrix(&read_value(path)?)?)
}

struct Sink(Option<PathBuf>);

impl Sink {
    fn emit<T: Serialize>(&self, value: &T) -> Outcome<()> {
        let text = qio::to_json(value)?;
        let res = match &self.0 {
            Some(p) => fs::write(p, text),
            None => io::stdout().lock().write_all(text.as_bytes()),
        };
        res.map_err(|e| Failure::Input(format!("cannot write output: {e}")))
    }
}

fn random_scattering(modes: usize, norm: f64, seed: u64) -> Outcome<ScatteringMatrix> {
    if modes == 0 || !norm.is_finite() || norm < 0.0 {
        return Err(Failure::Input("random needs --modes >= 1 and a finite --norm >= 0".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut gauss = || -> f64 { StandardNormal.sample(&mut rng) };
    let mut a = ComplexMatrix::zeros(modes, modes);
    let mut d = ComplexMatrix::zeros(modes, modes);
    for i in 0..modes {
        for j in i..modes {
            let x = C64::new(gauss(), gauss());
            a[(i, j)] = x;
            a[(j, i)] = -x.conj();
            let y = C64::new(gauss(), gauss());
            d[(i, j)] = y;
            d[(j, i)] = y;
        }
        a[(i, i)] = C64::new(0.0, a[(i, i)].im);
    }
    let mut k = ComplexMatrix::zeros(2 * modes, 2 * modes);
    k.view_mut((0, 0), (modes, modes)).copy_from(&a);
    k.view_mut((0, modes), (modes, modes)).copy_from(&d);
    k.view_mut((modes, 0), (modes, modes)).copy_from(&d.map(|z| z.conj()));
    k.view_mut((modes, modes), (modes, modes)).copy_from(&a.map(|z| z.conj()));
    let scale = k.norm();
    if scale > 0.0 {
        k *= C64::new(norm / scale, 0.0);
    }
    let m = expm(&k)?;
    Ok(ScatteringMatrix::new(m, DEFAULT_TOL)?)
}

fn element(
    kind: &str,
    phi: f64,
    zeta: f64,
    theta: f64,
    modes: Option<usize>,
    norm: f64,
    seed: u64,
) -> Outcome<ScatteringMatrix> {
    if kind == "random" {
        return random_scattering(modes.unwrap_or(2), norm, seed);
    }
    let kind = ElementKind::parse(kind).ok_or_else(|| {
        let names: Vec<&str> = ElementKind::ALL.iter().map(|k| k.name()).collect();
        Failure::Input(format!("unknown element {kind:?}; expected one of {}, random", names.join(", ")))
    })?;
    let mut spec = ElementSpec::new(kind);
    spec.phi = phi;
    spec.zeta = zeta;
    spec.theta = theta;
    if let Some(m) = modes {
        spec.modes = m;
    }
    Ok(spec.build()?)
}

#[derive(Serialize)]
struct FockDoc {
    method: &'static str,
    passed: bool,
    tolerance: f64,
    #[serde(flatten)]
    report: HeisenbergReport,
}

fn fock_verify(m: ComplexMatrix, cutoff: usize, max_photons: usize, tolerance: f64) -> Outcome<FockDoc> {
    let s = ScatteringMatrix::new(m, DEFAULT_TOL)?;
    let space = FockSpace::new(s.n(), cutoff)?;
    let log = hamiltonian_log(&s, DEFAULT_TOL)?;
    let (method, op) = match &log.outcome {
        LogOutcome::GeneratorFound(k) => ("single_exponential", fock::scattering_operator(k, &space)?),
        LogOutcome::NoSingleHamiltonian(_) => {
            let f = factorize_g(&s)?;
            let ks = [f.k1.clone(), f.k2.clone(), f.k3.clone()];
            ("factorization", fock::product_operator(&ks, &space)?)
        }
    };
    let report = fock::heisenberg_residual(s.matrix(), &op, max_photons)?;
    Ok(FockDoc {
        method,
        passed: report.residual <= tolerance,
        tolerance,
        report,
    })
}

/// Accepts any member of the quasi-unitary group.
fn quasi_unitary(m: &ComplexMatrix, tol: f64) -> Outcome<()> {
    let report = validate_scattering(m, tol)?;
    let ok = report.dimension_ok
        && report
            .residuals
            .iter()
            .any(|r| r.name == QUASI_UNITARITY && r.ok());
    if ok {
        Ok(())
    } else {
        Err(Failure::Invalid(format!("input is not quasi-unitary ({})", report.summary())))
    }
}

fn generators(ms: Vec<ComplexMatrix>, tol: f64) -> Outcome<Vec<Generator>> {
    ms.into_iter()
        .map(|m| Generator::new(m, tol).map_err(Failure::from))
        .collect()
}

fn run(cli: Cli) -> Outcome<()> {
    let sink = Sink(cli.output);
    match cli.command {
        Command::Element { kind, phi, zeta, theta, modes, norm, seed } => {
            let s = element(&kind, phi, zeta, theta, modes, norm, seed)?;
            sink.emit(&MatrixDoc::from_matrix(s.matrix()))
        }
        Command::Validate { input, generator, tolerance } => {
            let m = read_matrix(input.as_deref())?;
            let report = if generator {
                validate_generator(&m, tolerance)?
            } else {
                validate_scattering(&m, tolerance)?
            };
            sink.emit(&report)?;
            eprintln!("{}", report.summary());
            if report.passed {
                Ok(())
            } else {
                Err(Failure::Invalid("validation failed".into()))
            }
        }
        Command::Log { input, tolerance } => {
            let s = ScatteringMatrix::new(read_matrix(input.as_deref())?, tolerance)?;
            let result = hamiltonian_log(&s, tolerance)?;
            sink.emit(&LogDoc::from(&result))?;
            match &result.outcome {
                LogOutcome::GeneratorFound(_) => Ok(()),
                LogOutcome::NoSingleHamiltonian(d) => {
                    eprintln!(
                        "no single effective Hamiltonian exists (trace {:.6}{:+.6}i{})",
                        d.trace.re,
                        d.trace.im,
                        if d.trace_obstruction { ", real trace below -2" } else { "" }
                    );
                    eprintln!(
                        "the network is still a product of three exponentials: run `qnet decompose --variant g`"
                    );
                    Err(Failure::NoHamiltonian)
                }
            }
        }
        Command::Hamiltonian { input, tolerance } => {
            let k = Generator::new(read_matrix(input.as_deref())?, tolerance)?;
            let h = effective_hamiltonian(&k)?;
            sink.emit(&HamiltonianDoc::from(&h))
        }
        Command::Decompose { input, variant, tolerance } => {
            let m = read_matrix(input.as_deref())?;
            let doc = match variant {
                VariantArg::G0 => FactorizationDoc::from(&factorize_g0(&m, tolerance)?),
                VariantArg::G => {
                    FactorizationDoc::from(&factorize_g(&ScatteringMatrix::new(m, tolerance)?)?)
                }
            };
            eprintln!("reconstruction residual {:.3e}", doc.reconstruction_residual);
            sink.emit(&doc)
        }
        Command::Exp { input, tau, tolerance } => {
            let value = read_value(input.as_deref())?;
            let is_list = value.get("matrix").is_none() && value.get("generator").is_none();
            let ks = generators(qio::extract_matrices(&value)?, tolerance)?;
            let docs = ks
                .iter()
                .map(|k| {
                    // Block-diagonal generators of the wider algebra map into the
                    // quasi-unitary group without the conjugate-pair layout.
                    let m = match k.form_class() {
                        FormClass::L => scattering_at_time(k, tau)?.into_matrix(),
                        _ => expm(&(k.matrix() * C64::new(tau, 0.0)))?,
                    };
                    Ok(MatrixDoc::from_matrix(&m))
                })
                .collect::<Outcome<Vec<_>>>()?;
            if is_list {
                sink.emit(&MatrixListDoc { matrices: docs })
            } else {
                sink.emit(&docs[0])
            }
        }
        Command::Compose { inputs, tolerance } => {
            let mut mats = Vec::new();
            if inputs.is_empty() {
                mats.extend(qio::extract_matrices(&read_value(None)?)?);
            }
            for p in &inputs {
                mats.extend(qio::extract_matrices(&read_value(Some(p))?)?);
            }
            let mut acc: Option<ComplexMatrix> = None;
            for m in mats {
                quasi_unitary(&m, tolerance)?;
                acc = Some(match acc {
                    None => m,
                    Some(prev) => {
                        if prev.shape() != m.shape() {
                            return Err(Failure::Invalid(format!(
                                "cannot compose {} modes with {}",
                                prev.nrows() / 2,
                                m.nrows() / 2
                            )));
                        }
                        prev * m
                    }
                });
            }
            let product = acc.ok_or_else(|| Failure::Input("nothing to compose".into()))?;
            sink.emit(&MatrixDoc::from_matrix(&product))
        }
        Command::FockVerify { input, cutoff, max_photons, tolerance } => {
            let doc = fock_verify(read_matrix(input.as_deref())?, cutoff, max_photons, tolerance)?;
            sink.emit(&doc)?;
            eprintln!(
                "Heisenberg residual {:.3e} via {} (cutoff {}, max photons {})",
                doc.report.residual, doc.method, cutoff, max_photons
            );
            if doc.passed {
                Ok(())
            } else {
                Err(Failure::Invalid(format!("residual above tolerance {tolerance:e}")))
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            match &f {
                Failure::Input(msg) | Failure::Invalid(msg) => eprintln!("qnet: {msg}"),
                Failure::NoHamiltonian => {}
            }
            ExitCode::from(f.code())
        }
    }
}
