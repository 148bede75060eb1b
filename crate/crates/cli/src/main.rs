use std::fs;
use std::io::{self, Read, Write};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use ltperm_core::config::{parse_configs, ConfigError, FSpec};
use ltperm_core::constructions::certificate::{verify, FieldRecord, VerifyFailure};
use ltperm_core::constructions::{certify, Certificate, CheckOptions, ConstructionError, Theorem};
use ltperm_core::field::{FieldCtx, Level, DEFAULT_MAX_ORDER, SIZE_CAP_ENV};
use ltperm_core::oracle::reproduce::{reproduce, Example, ReproduceError};
use ltperm_core::oracle::sweep::{agreement_sweep, sweep_fields, SweepConfig};
use ltperm_core::translators::{all_translators, translator_space, FqMap};
use ltperm_core::wire::{encode_elements, ElementWire, SubElementWire};

/// Exit statuses. Construct: 0 permutation, 1 not a permutation, 2 bad input
/// or violated hypothesis, 3 criterion/oracle disagreement. Verify adds 5 for
/// a certificate that does not match its recomputation. Reproduce adds 4 when
/// one verdict class never appeared.
mod status {
    pub const OK: u8 = 0;
    pub const NEGATIVE: u8 = 1;
    pub const INVALID: u8 = 2;
    pub const DISAGREEMENT: u8 = 3;
    pub const ONE_SIDED: u8 = 4;
    pub const MISMATCH: u8 = 5;
}

#[derive(Parser)]
#[command(
    name = "ltperm",
    version,
    about = "Permutation polynomials from linear translators, with brute-force certificates"
)]
struct Cli {
    /// Largest field order q^m any command may build.
    #[arg(long, global = true, env = SIZE_CAP_ENV, default_value_t = DEFAULT_MAX_ORDER)]
    size_cap: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Copy)]
struct FieldArgs {
    #[arg(long)]
    p: u64,
    #[arg(long, default_value_t = 1)]
    n: u64,
    #[arg(long)]
    m: u64,
}

#[derive(Subcommand)]
enum Command {
    /// Print the moduli, sizes and primitive elements of F_{p^n} ⊂ F_{p^{nm}}.
    FieldInfo(FieldArgs),
    /// Build the configured construction(s) and print one certificate per line.
    Construct {
        /// Config file (a JSON object or array), or - for standard input.
        config: String,
        /// Skip the brute-force check.
        #[arg(long)]
        no_oracle: bool,
        #[arg(long, hide = true)]
        inject_fault: bool,
    },
    /// Recompute certificates (one JSON document or one per line).
    Verify { certificate: String },
    /// List every linear translator of a map F_{q^m} → F_q.
    SearchTranslators {
        #[command(flatten)]
        field: FieldArgs,
        /// trace, zero, trace-square, or a path to a JSON map spec.
        #[arg(long, default_value = "trace")]
        f: String,
    },
    /// Re-run a worked example on random parameters.
    Reproduce {
        #[arg(long)]
        example: String,
        #[arg(long, default_value_t = 3)]
        q: u64,
        #[arg(long, default_value_t = 50)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Compare each criterion with the brute-force verdict on random instances.
    Sweep {
        /// Comma-separated criterion labels.
        #[arg(long, value_delimiter = ',', default_value = "2.1,2.2,3.1,2.10")]
        theorems: Vec<String>,
        /// Largest q^m included in the sweep.
        #[arg(long, default_value_t = 6561)]
        max_size: u64,
        /// Trials per field and criterion.
        #[arg(long, default_value_t = 200)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_delimiter = ',', default_value = "2,3,5")]
        primes: Vec<u32>,
        /// Include wall-clock time in the report (makes output run-dependent).
        #[arg(long)]
        timing: bool,
        #[arg(long, hide = true)]
        inject_fault: bool,
    },
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn invalid(message: impl ToString) -> Self {
        Failure {
            code: status::INVALID,
            message: message.to_string(),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut out = io::stdout().lock();
    let result = match cli.command {
        Command::FieldInfo(f) => field_info(&mut out, f, cli.size_cap),
        Command::Construct {
            config,
            no_oracle,
            inject_fault,
        } => construct(&mut out, &config, !no_oracle, inject_fault, cli.size_cap),
        Command::Verify { certificate } => verify_cmd(&mut out, &certificate, cli.size_cap),
        Command::SearchTranslators { field, f } => search(&mut out, field, &f, cli.size_cap),
        Command::Reproduce {
            example,
            q,
            trials,
            seed,
        } => reproduce_cmd(&mut out, &example, q, trials, seed, cli.size_cap),
        Command::Sweep {
            theorems,
            max_size,
            trials,
            seed,
            primes,
            timing,
            inject_fault,
        } => sweep_cmd(
            &mut out,
            &theorems,
            max_size,
            trials,
            seed,
            &primes,
            timing,
            inject_fault,
            cli.size_cap,
        ),
    };
    let _ = out.flush();
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("ltperm: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn read_input(path: &str) -> Result<String, Failure> {
    if path == "-" {
        let mut s = String::new();
        io::stdin().read_to_string(&mut s).map_err(Failure::invalid)?;
        Ok(s)
    } else {
        fs::read_to_string(path).map_err(|e| Failure::invalid(format!("{path}: {e}")))
    }
}

fn emit(out: &mut impl Write, value: &impl serde::Serialize) -> Result<(), Failure> {
    let line = serde_json::to_string(value).map_err(Failure::invalid)?;
    writeln!(out, "{line}").map_err(Failure::invalid)
}

fn field(f: FieldArgs, cap: u64) -> Result<FieldCtx, Failure> {
    FieldCtx::with_cap(f.p, f.n, f.m, cap).map_err(Failure::invalid)
}

fn field_info(out: &mut impl Write, f: FieldArgs, cap: u64) -> Result<u8, Failure> {
    let ctx = field(f, cap)?;
    let outer = ctx.find_primitive(Level::Outer);
    let inner = ctx.find_primitive(Level::Inner);
    emit(
        out,
        &json!({
            "field": FieldRecord::encode(&ctx),
            "primitive": ElementWire::encode(&ctx, outer),
            "primitive_subfield": ElementWire::encode(&ctx, inner),
            "trace_of_one": SubElementWire::encode(&ctx, ctx.trace(ltperm_core::field::Element::ONE)),
        }),
    )?;
    Ok(status::OK)
}

fn construct(out: &mut impl Write, path: &str, oracle: bool, inject_fault: bool, cap: u64) -> Result<u8, Failure> {
    let configs = parse_configs(&read_input(path)?).map_err(Failure::invalid)?;
    let mut worst = status::OK;
    for (i, config) in configs.iter().enumerate() {
        let label = if configs.len() > 1 {
            format!("config {}: ", i + 1)
        } else {
            String::new()
        };
        let built = match config.build(cap) {
            Ok(b) => b,
            Err(e) => {
                eprintln!("ltperm: {label}{e}");
                worst = worst.max(status::INVALID);
                continue;
            }
        };
        let opts = CheckOptions {
            oracle: oracle && built.oracle,
            flip_criterion: inject_fault,
        };
        let code = match certify(
            &built.ctx,
            built.theorem,
            &built.instance,
            built.prediction.as_ref(),
            opts,
        ) {
            Ok(cert) => {
                emit(out, &cert)?;
                if cert.is_positive() {
                    status::OK
                } else {
                    status::NEGATIVE
                }
            }
            Err(ConstructionError::Disagreement(cert)) => {
                emit(out, &cert)?;
                eprintln!("ltperm: {label}criterion and brute-force verdicts disagree");
                status::DISAGREEMENT
            }
            Err(ConstructionError::Hypothesis(h)) => {
                eprintln!("ltperm: {label}{}", ConfigError::from(h));
                status::INVALID
            }
        };
        worst = worst.max(code);
    }
    Ok(worst)
}

fn parse_certificates(text: &str) -> Result<Vec<Certificate>, serde_json::Error> {
    match serde_json::from_str::<Certificate>(text) {
        Ok(c) => Ok(vec![c]),
        Err(whole) => {
            let lines: Vec<&str> = text.lines().filter(|l| !l.trim().is_empty()).collect();
            if lines.len() <= 1 {
                return Err(whole);
            }
            lines.into_iter().map(serde_json::from_str).collect()
        }
    }
}

fn verify_cmd(out: &mut impl Write, path: &str, cap: u64) -> Result<u8, Failure> {
    let certs =
        parse_certificates(&read_input(path)?).map_err(|e| Failure::invalid(format!("malformed certificate: {e}")))?;
    let mut worst = status::OK;
    for (i, cert) in certs.iter().enumerate() {
        let (code, verdict) = match verify(cert, cap) {
            Ok(_) => (status::OK, "ok".to_string()),
            Err(e) => {
                let code = match e {
                    VerifyFailure::Malformed(_) => status::INVALID,
                    VerifyFailure::Disagreement => status::DISAGREEMENT,
                    VerifyFailure::Mismatch(_) | VerifyFailure::Hypothesis(_) => status::MISMATCH,
                };
                (code, e.to_string())
            }
        };
        emit(out, &json!({ "certificate": i + 1, "result": verdict }))?;
        // Disagreement is the most serious finding; otherwise keep the largest code.
        worst = match (worst, code) {
            (status::DISAGREEMENT, _) | (_, status::DISAGREEMENT) => status::DISAGREEMENT,
            (a, b) => a.max(b),
        };
    }
    Ok(worst)
}

fn search(out: &mut impl Write, f: FieldArgs, source: &str, cap: u64) -> Result<u8, Failure> {
    let ctx = field(f, cap)?;
    let map = match source {
        "trace" => FqMap::trace(&ctx),
        "zero" => FqMap::from_fn(&ctx, |_| ltperm_core::field::SubElement::ZERO),
        "trace-square" => FqMap::from_fn(&ctx, |x| ctx.trace(ctx.mul(x, x))),
        path => {
            let spec: FSpec = serde_json::from_str(&read_input(path)?).map_err(Failure::invalid)?;
            spec.build(&ctx, None).map_err(Failure::invalid)?
        }
    };
    let certs = all_translators(&ctx, &map);
    let space = translator_space(&ctx, &certs);
    emit(
        out,
        &json!({
            "field": FieldRecord::encode(&ctx),
            "translators": certs.iter().map(|c| json!({
                "alpha": ElementWire::encode(&ctx, c.alpha),
                "a": SubElementWire::encode(&ctx, c.a),
            })).collect::<Vec<_>>(),
            "space": {
                "dim": space.basis.dim(),
                "basis": encode_elements(&ctx, space.basis.vectors()),
                "is_subspace": space.is_subspace,
                "coefficient_linear": space.coefficient_linear,
            },
        }),
    )?;
    Ok(status::OK)
}

fn reproduce_cmd(
    out: &mut impl Write,
    example: &str,
    q: u64,
    trials: usize,
    seed: u64,
    cap: u64,
) -> Result<u8, Failure> {
    let ex = Example::from_label(example)
        .ok_or_else(|| Failure::invalid(format!("unknown example {example:?}; use 2.1 or 2.2")))?;
    let report = reproduce(ex, q, trials, seed, cap).map_err(|e| match e {
        ReproduceError::Hypothesis(_)
        | ReproduceError::EvenCharacteristic(_)
        | ReproduceError::NotPrimePower(_)
        | ReproduceError::Field(_) => Failure::invalid(e),
    })?;
    emit(out, &report)?;
    if !report.disagreements.is_empty() {
        eprintln!("ltperm: {} disagreement(s)", report.disagreements.len());
        return Ok(status::DISAGREEMENT);
    }
    if trials > 0 && !report.both_classes() {
        eprintln!("ltperm: only one verdict class observed within the retry budget");
        return Ok(status::ONE_SIDED);
    }
    Ok(status::OK)
}

#[allow(clippy::too_many_arguments)]
fn sweep_cmd(
    out: &mut impl Write,
    labels: &[String],
    max_size: u64,
    trials: usize,
    seed: u64,
    primes: &[u32],
    timing: bool,
    inject_fault: bool,
    cap: u64,
) -> Result<u8, Failure> {
    let theorems = labels
        .iter()
        .map(|l| Theorem::from_label(l.trim()).ok_or_else(|| Failure::invalid(format!("unknown theorem {l:?}"))))
        .collect::<Result<Vec<_>, _>>()?;
    if max_size > cap {
        return Err(Failure::invalid(format!(
            "--max-size {max_size} exceeds the size cap {cap}"
        )));
    }
    let cfg = SweepConfig {
        theorems,
        fields: sweep_fields(primes, max_size),
        trials,
        seed,
        inject_fault,
    };
    let start = Instant::now();
    let mut report = agreement_sweep(&cfg).map_err(Failure::invalid)?;
    if timing {
        report.elapsed_ms = Some(start.elapsed().as_millis() as u64);
    }
    emit(out, &report)?;
    if !report.is_clean() {
        eprintln!("ltperm: {} counterexample(s)", report.counterexamples.len());
        return Ok(status::DISAGREEMENT);
    }
    Ok(status::OK)
}
