//! Command-line front end: compile JSON model files into interpolating
//! polynomials, sweep sensitivity functions and divergences to CSV, and run
//! the brute-force optimality verifier.
//!
//! Exit codes: 0 success, 1 usage or parse error, 2 analysis error,
//! 3 verification failure.

use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};

use polysens::covariation::{check_properties, property_samples, CovariationScheme};
use polysens::divergence::{cd_block, cd_general, distributions, phi_divergence, DivergenceResult};
use polysens::oracle::{
    find_cd_counterexample, random_multilinear_model, random_variation, verify_cd_optimality,
    verify_phi_optimality, OptimalityVerdict, OracleConfig,
};
use polysens::rng::SplitMix64;
use polysens::sensitivity::{sensitivity_function, VariationRequest};
use polysens::Model;

use polysens_cli::model_file::ModelFile;
use polysens_cli::sweep::{
    self, parse_event, parse_measures, parse_schemes, parse_sweeps, Measure, SweepAxis,
};
use polysens_cli::AppError;

#[derive(Parser)]
#[command(
    name = "polysens",
    version,
    about = "Sensitivity analysis for discrete probability models via interpolating polynomials"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compile a model file and print its summary
    Compile {
        #[arg(long)]
        model: PathBuf,
        /// Print the summary as JSON
        #[arg(long)]
        json: bool,
        /// Write the parsed model back out in canonical form
        #[arg(long)]
        emit_canonical: Option<PathBuf>,
    },
    /// Sweep the probability of an event as varied parameters move
    Sensitivity {
        #[arg(long)]
        model: PathBuf,
        /// Conjunction like "Y3=0,Y1@2=1"; "Y1@*=1" spans all slices
        #[arg(long, default_value = "")]
        event: String,
        /// "label=lo:hi:step" or "label=value"; repeat for joint sweeps
        #[arg(long = "vary", required = true)]
        vary: Vec<String>,
        #[arg(long, default_value = "proportional")]
        scheme: String,
        /// CSV output path (stdout when omitted)
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sweep the CD distance between the original and the varied model
    Cd {
        #[arg(long)]
        model: PathBuf,
        #[arg(long = "vary", required = true)]
        vary: Vec<String>,
        /// Comma list of proportional,uniform,order-preserving,linear:<file>
        /// or "all"
        #[arg(long, default_value = "all")]
        scheme: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sweep divergences (cd, kl_pq, kl_qp, tv, j) between original and
    /// varied model
    Divergence {
        #[arg(long)]
        model: PathBuf,
        #[arg(long = "vary", required = true)]
        vary: Vec<String>,
        #[arg(long, default_value = "all")]
        scheme: String,
        /// Comma list of cd,kl_pq,kl_qp,tv,j or "all"
        #[arg(long, default_value = "all")]
        measure: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Verify proportional-covariation optimality by brute-force grid search
    Verify {
        /// Model file; omit when using --random-models
        #[arg(long)]
        model: Option<PathBuf>,
        /// "label=value" point variations (repeatable)
        #[arg(long = "vary")]
        vary: Vec<String>,
        /// cd, a phi divergence, or "all"
        #[arg(long, default_value = "cd")]
        measure: String,
        #[arg(long, default_value_t = 0.05)]
        grid_step: f64,
        /// Cap on candidate covariations per check
        #[arg(long, default_value_t = 1_000_000)]
        cap: u64,
        /// Run this many seeded random multilinear models instead of a file
        #[arg(long)]
        random_models: Option<u64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Also reproduce the covariation property matrix
        #[arg(long)]
        properties: bool,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code())
        }
    }
}

fn run(cli: Cli) -> Result<u8, AppError> {
    match cli.command {
        Command::Compile {
            model,
            json,
            emit_canonical,
        } => cmd_compile(&model, json, emit_canonical.as_deref()),
        Command::Sensitivity {
            model,
            event,
            vary,
            scheme,
            out,
        } => cmd_sensitivity(&model, &event, &vary, &scheme, out.as_deref()),
        Command::Cd {
            model,
            vary,
            scheme,
            out,
        } => cmd_divergence(&model, &vary, &scheme, "cd", out.as_deref()),
        Command::Divergence {
            model,
            vary,
            scheme,
            measure,
            out,
        } => cmd_divergence(&model, &vary, &scheme, &measure, out.as_deref()),
        Command::Verify {
            model,
            vary,
            measure,
            grid_step,
            cap,
            random_models,
            seed,
            properties,
        } => cmd_verify(
            model.as_deref(),
            &vary,
            &measure,
            grid_step,
            cap,
            random_models,
            seed,
            properties,
        ),
    }
}

fn write_output(out: Option<&std::path::Path>, text: &str) -> Result<(), AppError> {
    match out {
        Some(path) => fs::write(path, text)
            .map_err(|e| AppError::Io(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            std::io::stdout()
                .flush()
                .map_err(|e| AppError::Io(e.to_string()))
        }
    }
}

fn cmd_compile(
    path: &std::path::Path,
    json: bool,
    emit: Option<&std::path::Path>,
) -> Result<u8, AppError> {
    let file = ModelFile::load(path)?;
    let model = file.compile()?;
    let format = match &file {
        ModelFile::Bn(_) => "bn",
        ModelFile::Csbn { .. } => "csbn",
        ModelFile::Dbn { .. } => "dbn",
        ModelFile::Monomials { .. } => "monomials",
    };
    let total = model.poly.evaluate(model.space.base())?;
    if json {
        println!(
            "{}",
            serde_json::json!({
                "format": format,
                "atoms": model.atom_count(),
                "terms": model.poly.len(),
                "degree": model.poly.degree(),
                "homogeneous": model.poly.is_homogeneous(),
                "multilinear": model.poly.is_multilinear(),
                "indeterminates": model.space.len(),
                "blocks": model.space.blocks().len(),
                "total_mass": total,
            })
        );
    } else {
        println!("format: {format}");
        println!("atoms: {}", model.atom_count());
        println!("terms: {}", model.poly.len());
        println!("degree: {}", model.poly.degree());
        println!("homogeneous: {}", model.poly.is_homogeneous());
        println!("multilinear: {}", model.poly.is_multilinear());
        println!("indeterminates: {}", model.space.len());
        println!("blocks: {}", model.space.blocks().len());
        println!("total_mass: {total}");
    }
    if let Some(out) = emit {
        fs::write(out, file.to_canonical_json())
            .map_err(|e| AppError::Io(format!("cannot write {}: {e}", out.display())))?;
    }
    Ok(0)
}

fn request_for(model: &Model, axes: &[SweepAxis]) -> Result<VariationRequest, AppError> {
    let ids = axes
        .iter()
        .map(|axis| model.space.by_label(&axis.label))
        .collect::<Result<Vec<_>, polysens::Error>>()?;
    let req = VariationRequest::from_ids(&ids, model);
    req.validate(model)?;
    Ok(req)
}

fn cmd_sensitivity(
    path: &std::path::Path,
    event_text: &str,
    vary: &[String],
    scheme_text: &str,
    out: Option<&std::path::Path>,
) -> Result<u8, AppError> {
    let model = ModelFile::load(path)?.compile()?;
    let event = parse_event(&model, event_text)?;
    if event.is_empty() && !event_text.trim().is_empty() {
        eprintln!("warning: event `{event_text}` matches no atoms; emitting zeros");
    }
    let axes = parse_sweeps(vary)?;
    let schemes = parse_schemes(scheme_text)?;
    if schemes.len() != 1 {
        return Err(AppError::Usage(
            "sensitivity sweeps take exactly one --scheme".to_string(),
        ));
    }
    let req = request_for(&model, &axes)?;
    let f = sensitivity_function(&model, &event, &req, &schemes[0])?;

    let mut csv = String::new();
    for axis in &axes {
        csv.push_str(&axis.label);
        csv.push(',');
    }
    csv.push_str("value,segment\n");
    let mut skipped = 0usize;
    for point in sweep::grid(&axes) {
        match (f.eval(&point), f.segment_index(&point)) {
            (Ok(value), Some(segment)) => {
                for x in &point {
                    csv.push_str(&format!("{x},"));
                }
                csv.push_str(&format!("{value},{segment}\n"));
            }
            _ => skipped += 1,
        }
    }
    if skipped > 0 {
        eprintln!("warning: {skipped} grid point(s) outside the admissible box were skipped");
    }
    write_output(out, &csv)?;
    Ok(0)
}

fn divergence_value(
    model: &Model,
    req: &VariationRequest,
    values: &[f64],
    scheme: &CovariationScheme,
    measure: &Measure,
) -> Result<DivergenceResult, polysens::Error> {
    match measure {
        Measure::Cd => {
            if model.poly.is_multilinear() {
                cd_block(model, req, values, scheme)
            } else {
                cd_general(model, req, values, scheme)
            }
        }
        Measure::Phi(phi) => {
            let (p, q) = distributions(model, req, values, scheme)?;
            phi_divergence(&p, &q, phi)
        }
    }
}

fn cmd_divergence(
    path: &std::path::Path,
    vary: &[String],
    scheme_text: &str,
    measure_text: &str,
    out: Option<&std::path::Path>,
) -> Result<u8, AppError> {
    let model = ModelFile::load(path)?.compile()?;
    let axes = parse_sweeps(vary)?;
    let schemes = parse_schemes(scheme_text)?;
    let measures = parse_measures(measure_text)?;
    let req = request_for(&model, &axes)?;

    let mut csv = String::new();
    for axis in &axes {
        csv.push_str(&axis.label);
        csv.push(',');
    }
    csv.push_str("scheme,measure,value,witness_max,witness_min\n");
    let mut skipped = 0usize;
    for point in sweep::grid(&axes) {
        for scheme in &schemes {
            for measure in &measures {
                match divergence_value(&model, &req, &point, scheme, measure) {
                    Ok(result) => {
                        for x in &point {
                            csv.push_str(&format!("{x},"));
                        }
                        let witness = |w: &Option<polysens::divergence::Witness>| {
                            w.as_ref()
                                .map(|w| w.description.clone())
                                .unwrap_or_default()
                        };
                        csv.push_str(&format!(
                            "{},{},{},{},{}\n",
                            scheme.name(),
                            measure.name(),
                            result.value,
                            witness(&result.witness_max),
                            witness(&result.witness_min),
                        ));
                    }
                    Err(
                        polysens::Error::InvalidVariation(_)
                        | polysens::Error::UnsupportedCovariation(_)
                        | polysens::Error::UndefinedCovariation(_),
                    ) => skipped += 1,
                    Err(e) => return Err(e.into()),
                }
            }
        }
    }
    if skipped > 0 {
        eprintln!("warning: {skipped} scheme/point combination(s) were inadmissible and skipped");
    }
    write_output(out, &csv)?;
    Ok(0)
}

fn print_verdict(context: &str, verdict: &OptimalityVerdict) {
    println!(
        "{context}: scheme={:.12} grid_min={:.12} margin={:.3e} points={} -> {}",
        verdict.scheme_value,
        verdict.grid_min,
        verdict.margin,
        verdict.points_evaluated,
        if verdict.pass { "PASS" } else { "FAIL" }
    );
}

#[allow(clippy::too_many_arguments)]
fn cmd_verify(
    path: Option<&std::path::Path>,
    vary: &[String],
    measure_text: &str,
    grid_step: f64,
    cap: u64,
    random_models: Option<u64>,
    seed: u64,
    properties: bool,
) -> Result<u8, AppError> {
    let cfg = OracleConfig {
        grid_step,
        point_cap: cap,
        tolerance: 1e-9,
    };
    let measures = parse_measures(measure_text)?;
    let mut failed = false;

    if properties {
        let samples = property_samples(seed, 100);
        for scheme in [
            CovariationScheme::Proportional,
            CovariationScheme::Uniform,
            CovariationScheme::OrderPreserving,
        ] {
            let report = check_properties(&scheme, &samples);
            let [valid, imp, ord, ident, linear] = report.flags();
            println!(
                "properties {}: valid={valid} imp-pres={imp} ord-pres={ord} ident-pres={ident} linear={linear}",
                scheme.name()
            );
        }
    }

    if let Some(n) = random_models {
        for i in 0..n {
            let model_seed = seed.wrapping_add(i);
            let model = random_multilinear_model(model_seed);
            let mut rng = SplitMix64::new(model_seed.wrapping_mul(0x9e37).wrapping_add(1));
            let (req, values) = random_variation(&mut rng, &model, 3);
            for measure in &measures {
                let verdict = match measure {
                    Measure::Cd => verify_cd_optimality(&model, &req, &values, &cfg)?,
                    Measure::Phi(phi) => verify_phi_optimality(&model, &req, &values, phi, &cfg)?,
                };
                failed |= !verdict.pass;
                print_verdict(
                    &format!("model seed={model_seed} measure={}", measure.name()),
                    &verdict,
                );
            }
        }
        return Ok(if failed { 3 } else { 0 });
    }

    let Some(path) = path else {
        if properties {
            return Ok(0);
        }
        return Err(AppError::Usage(
            "verify needs --model or --random-models".to_string(),
        ));
    };
    let file = ModelFile::load(path)?;
    let model = file.compile()?;
    let axes = parse_sweeps(vary)?;
    if axes.iter().any(|a| a.points.len() != 1) {
        return Err(AppError::Usage(
            "verify takes point variations, e.g. --vary \"label=0.7\"".to_string(),
        ));
    }
    if axes.is_empty() {
        // fall back to the fixture's recorded expectations, if any
        let expected = file.expected_cd();
        if expected.is_empty() {
            return Err(AppError::Usage(
                "verify needs at least one --vary \"label=value\"".to_string(),
            ));
        }
        for case in expected {
            let varied = model.space.by_label(&case.varied)?;
            let req = VariationRequest::single(varied, case.varied.clone());
            for (scheme, reference) in [
                (CovariationScheme::Proportional, case.proportional),
                (CovariationScheme::Uniform, case.uniform),
            ] {
                let value = cd_general(&model, &req, &[case.new_value], &scheme)?.value;
                let ok = (value - reference).abs() < 1e-6;
                failed |= !ok;
                println!(
                    "cd[{}] {} -> {}: computed={value:.9} recorded={reference:.9} {}",
                    scheme.name(),
                    case.varied,
                    case.new_value,
                    if ok { "PASS" } else { "FAIL" }
                );
            }
        }
        return Ok(if failed { 3 } else { 0 });
    }

    let req = request_for(&model, &axes)?;
    let values: Vec<f64> = axes.iter().map(|a| a.points[0]).collect();
    if model.poly.is_multilinear() {
        for measure in &measures {
            let verdict = match measure {
                Measure::Cd => verify_cd_optimality(&model, &req, &values, &cfg)?,
                Measure::Phi(phi) => verify_phi_optimality(&model, &req, &values, phi, &cfg)?,
            };
            failed |= !verdict.pass;
            print_verdict(&format!("measure={}", measure.name()), &verdict);
        }
        Ok(if failed { 3 } else { 0 })
    } else {
        if req.entries.len() != 1 {
            return Err(AppError::Usage(
                "non-multilinear verification is one-way: give exactly one --vary".to_string(),
            ));
        }
        let verdict = find_cd_counterexample(&model, &req, &values, &cfg)?;
        print_verdict("counterexample search", &verdict);
        if !verdict.pass {
            println!(
                "proportional covariation is not CD-optimal here (margin {:.3e})",
                verdict.margin
            );
        }
        // an expected outcome either way on non-multilinear models
        Ok(0)
    }
}
