//! Batch front end for the realization engine: parse JSON inputs,
//! dispatch to the engine, emit machine-readable certificates and
//! human-readable reports.
//!
//! Exit codes: 0 all required checks pass, 1 a required check failed,
//! 2 input error, 3 a required check was inconclusive.

mod report;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use sha2::{Digest, Sha256};

use arveson::beurling::{
    hankel_probe, inner_certify, representer_pipeline, PipelineOptions,
};
use arveson::charfun::{
    characteristic_function, coincidence_conditions, halmos_dilation, pure_check,
};
use arveson::colligation::{structure_report, transfer_eval};
use arveson::io::{
    ColligationFile, MultiplierFile, PairFile, RowContractionFile, SpecFile,
};
use arveson::kernels::{d_subspace, defect_decomposition, weakly_coisometric_check};
use arveson::linalg::{ball_points, cplx, opnorm, CMat};
use arveson::model::{assemble, gleason_model_pair, hks_subspace, model_family};
use arveson::observability::{renormalize_exactly_observable, strong_stability};

use report::{exit_code, CheckEntry, Report, Verdict};

const DEFAULT_TOL: f64 = 1e-10;
const DEFAULT_SEED: u64 = 0x0a57_e50f;
const PURITY_MARGIN: f64 = 1e-8;

#[derive(Parser)]
#[command(
    name = "arveson",
    version,
    about = "Construct, evaluate and certify transfer-function realizations of Schur-class multipliers on the unit ball"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Structural flags, stability, kernel identities and the inner
    /// certificate of a colligation file.
    Check {
        file: PathBuf,
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long, default_value_t = 12)]
        grid_n: usize,
        #[arg(long, default_value_t = 0.7)]
        grid_radius: f64,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long, default_value_t = 300)]
        stability_horizon: usize,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
        /// Checks gating the exit code (comma separated names).
        #[arg(long, value_delimiter = ',', default_value = "contractive")]
        require: Vec<String>,
    },
    /// Complete a contractive output pair to a coisometric colligation by
    /// Cholesky factorization of the defect.
    Realize {
        file: PathBuf,
        #[arg(long)]
        tol: Option<f64>,
        /// Renormalize to an exactly-observable isometric pair first.
        #[arg(long)]
        renormalize: bool,
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Build and certify the inner Beurling-Lax representer of a
    /// homogeneous interpolation spec.
    Representer {
        file: PathBuf,
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long, default_value_t = 4)]
        check_cap: usize,
        #[arg(long)]
        no_renormalize: bool,
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[arg(long)]
        certificate: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Functional-model realization family of a polynomial inner
    /// multiplier; assemble the member at parameter X.
    Model {
        file: PathBuf,
        /// Contraction X as JSON: [re, im] for the scalar case or a
        /// matrix of such pairs; omitted means X = 0.
        #[arg(long)]
        param: Option<String>,
        #[arg(long)]
        degree_cap: Option<usize>,
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Halmos dilation and characteristic function of a commutative row
    /// contraction, with the coincidence report.
    Charfun {
        file: PathBuf,
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Exact ranks of the Hankel matrices H_n = [(i+j+1)/(2(i+j)+1)].
    ProbeHankel {
        #[arg(long, default_value_t = 8)]
        n: usize,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
}

fn resolve_tol(flag: Option<f64>) -> f64 {
    flag.or_else(|| {
        std::env::var("ARVESON_TOL")
            .ok()
            .and_then(|v| v.parse().ok())
    })
    .unwrap_or(DEFAULT_TOL)
}

fn digest(bytes: &[u8]) -> String {
    format!("sha256:{}", hex::encode(Sha256::digest(bytes)))
}

fn read_input(path: &Path) -> Result<(Vec<u8>, String), String> {
    let bytes = fs::read(path).map_err(|e| format!("cannot read {}: {}", path.display(), e))?;
    let dg = digest(&bytes);
    Ok((bytes, dg))
}

fn emit(report: &Report, format: Format) {
    match format {
        Format::Text => print!("{}", report.to_text()),
        Format::Json => println!("{}", serde_json::to_string_pretty(report).unwrap()),
    }
}

fn write_artifact(path: &Path, value: &serde_json::Value) -> Result<(), String> {
    let text = serde_json::to_string_pretty(value).unwrap();
    fs::write(path, text + "\n").map_err(|e| format!("cannot write {}: {}", path.display(), e))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(msg) => {
            eprintln!("error: {}", msg);
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<i32, String> {
    match cli.command {
        Command::Check {
            file,
            tol,
            grid_n,
            grid_radius,
            seed,
            stability_horizon,
            format,
            require,
        } => cmd_check(
            &file,
            resolve_tol(tol),
            grid_n,
            grid_radius,
            seed,
            stability_horizon,
            format,
            &require,
        ),
        Command::Realize {
            file,
            tol,
            renormalize,
            output,
            format,
        } => cmd_realize(&file, resolve_tol(tol), renormalize, output.as_deref(), format),
        Command::Representer {
            file,
            tol,
            seed,
            check_cap,
            no_renormalize,
            output,
            certificate,
            format,
        } => cmd_representer(
            &file,
            resolve_tol(tol),
            seed,
            check_cap,
            !no_renormalize,
            output.as_deref(),
            certificate.as_deref(),
            format,
        ),
        Command::Model {
            file,
            param,
            degree_cap,
            tol,
            seed,
            output,
            format,
        } => cmd_model(
            &file,
            param.as_deref(),
            degree_cap,
            resolve_tol(tol),
            seed,
            output.as_deref(),
            format,
        ),
        Command::Charfun {
            file,
            tol,
            seed,
            output,
            format,
        } => cmd_charfun(&file, resolve_tol(tol), seed, output.as_deref(), format),
        Command::ProbeHankel { n, format } => cmd_probe_hankel(n, format),
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_check(
    file: &Path,
    tol: f64,
    grid_n: usize,
    grid_radius: f64,
    seed: u64,
    stability_horizon: usize,
    format: Format,
    require: &[String],
) -> Result<i32, String> {
    let (bytes, dg) = read_input(file)?;
    let parsed: ColligationFile =
        serde_json::from_slice(&bytes).map_err(|e| format!("parse error: {}", e))?;
    let col = parsed.to_engine().map_err(|e| e.to_string())?;
    let mut report = Report::new(
        format!(
            "check {} --tol {:e} --grid-n {} --grid-radius {} --seed {} --stability-horizon {}",
            file.display(),
            tol,
            grid_n,
            grid_radius,
            seed,
            stability_horizon
        ),
        dg,
        seed,
        tol,
    );

    let rep = structure_report(&col, tol);
    report.push(CheckEntry::gated(
        "contractive",
        (rep.sigma_max - 1.0).max(0.0),
        tol,
    ));
    report.push(CheckEntry::gated("isometric", rep.isometric_residual, tol));
    report.push(CheckEntry::gated(
        "coisometric",
        rep.coisometric_residual,
        tol,
    ));
    report.push(CheckEntry::gated(
        "unitary",
        rep.isometric_residual.max(rep.coisometric_residual),
        tol,
    ));
    report.push(CheckEntry::gated("commutative", rep.commutator_max, tol));

    let pair = col.output_pair();
    let stab = strong_stability(&pair.a, 1e-12, stability_horizon);
    let final_trace = *stab.decay.last().unwrap_or(&0.0);
    report.push(if stab.stable {
        CheckEntry::gated("strongly_stable", final_trace, 1e-12)
    } else if stab.inconclusive {
        CheckEntry::inconclusive("strongly_stable", final_trace, 1e-12)
    } else {
        CheckEntry {
            name: "strongly_stable".into(),
            residual: final_trace,
            threshold: 1e-12,
            verdict: Verdict::Fail,
        }
    });

    let dsub = d_subspace(&pair, 150, 1e-8, seed).map_err(|e| e.to_string())?;
    report.push(CheckEntry::info("d_subspace_dim", dsub.dim() as f64));
    if let Some(w) = &dsub.warning {
        eprintln!("note: {}", w);
        report.push(CheckEntry::inconclusive(
            "d_subspace",
            dsub.cross_check_angle,
            1e-8,
        ));
    }
    let wc = weakly_coisometric_check(&col, &dsub, tol).map_err(|e| e.to_string())?;
    report.push(CheckEntry::gated("weakly_coisometric", wc.defect, tol));

    // Kernel identity and kernel match over a sampled grid.
    let pts = ball_points(col.d, grid_n.max(2), grid_radius, seed.wrapping_add(1));
    let mut identity_res: f64 = 0.0;
    let mut mismatch: f64 = 0.0;
    for l in &pts {
        for z in &pts {
            let dec = defect_decomposition(&col, l, z).map_err(|e| e.to_string())?;
            identity_res = identity_res.max(dec.identity_residual);
            mismatch = mismatch.max(opnorm(&(dec.ks - dec.kca)));
        }
    }
    report.push(CheckEntry::gated("kernel_identity", identity_res, 1e-11));
    report.push(CheckEntry::gated("kernel_match", mismatch, tol.max(1e-9)));

    let cert = inner_certify(&col, tol, seed).map_err(|e| e.to_string())?;
    let inner_residual = cert
        .commutator_max
        .max(cert.isometric_pair_residual)
        .max(cert.weak_coisometry_defect);
    report.push(if cert.inner {
        CheckEntry::gated("inner", inner_residual, tol.max(1e-9))
    } else if cert.stability.inconclusive {
        CheckEntry::inconclusive("inner", inner_residual, tol.max(1e-9))
    } else {
        CheckEntry {
            name: "inner".into(),
            residual: inner_residual.max(1.0),
            threshold: tol.max(1e-9),
            verdict: Verdict::Fail,
        }
    });

    let purity = pure_check(&col.d_op, PURITY_MARGIN);
    report.push(CheckEntry::gated(
        "pure",
        purity.sigma_max,
        1.0 - PURITY_MARGIN,
    ));

    emit(&report, format);
    Ok(exit_code(&report, require))
}

fn cmd_realize(
    file: &Path,
    tol: f64,
    renormalize: bool,
    output: Option<&Path>,
    format: Format,
) -> Result<i32, String> {
    let (bytes, dg) = read_input(file)?;
    let parsed: PairFile =
        serde_json::from_slice(&bytes).map_err(|e| format!("parse error: {}", e))?;
    let mut pair = parsed.to_engine().map_err(|e| e.to_string())?;
    let mut report = Report::new(
        format!(
            "realize {} --tol {:e}{}",
            file.display(),
            tol,
            if renormalize { " --renormalize" } else { "" }
        ),
        dg,
        DEFAULT_SEED,
        tol,
    );
    if renormalize {
        pair = renormalize_exactly_observable(&pair, tol).map_err(|e| e.to_string())?;
    }
    report.push(CheckEntry::info(
        "isometric_pair_residual",
        pair.isometric_residual(),
    ));
    let col = arveson::beurling::cholesky_complete(&pair, tol).map_err(|e| e.to_string())?;
    let rep = structure_report(&col, tol);
    report.push(CheckEntry::gated(
        "coisometric",
        rep.coisometric_residual,
        tol,
    ));
    report.push(CheckEntry::info("input_dim", col.dim_input() as f64));
    let artifact = serde_json::to_value(ColligationFile::from_engine(&col)).unwrap();
    if let Some(path) = output {
        write_artifact(path, &artifact)?;
    }
    report.artifacts = Some(serde_json::json!({ "colligation": artifact }));
    emit(&report, format);
    Ok(exit_code(&report, &["coisometric".to_string()]))
}

#[allow(clippy::too_many_arguments)]
fn cmd_representer(
    file: &Path,
    tol: f64,
    seed: u64,
    check_cap: usize,
    renormalize: bool,
    output: Option<&Path>,
    certificate: Option<&Path>,
    format: Format,
) -> Result<i32, String> {
    let (bytes, dg) = read_input(file)?;
    let parsed: SpecFile =
        serde_json::from_slice(&bytes).map_err(|e| format!("parse error: {}", e))?;
    let spec = parsed.to_engine().map_err(|e| e.to_string())?;
    let opts = PipelineOptions {
        tol,
        seed,
        check_cap,
        taylor_cap: 40,
        renormalize,
    };
    let result = representer_pipeline(&spec, &opts).map_err(|e| e.to_string())?;
    let mut report = Report::new(
        format!(
            "representer {} --tol {:e} --seed {} --check-cap {}{}",
            file.display(),
            tol,
            seed,
            check_cap,
            if renormalize { "" } else { " --no-renormalize" }
        ),
        dg,
        seed,
        tol,
    );
    report.push(CheckEntry::info(
        "renormalized",
        if result.renormalized { 1.0 } else { 0.0 },
    ));
    report.push(CheckEntry::gated(
        "commutative",
        result.inner.commutator_max,
        tol,
    ));
    report.push(CheckEntry::gated(
        "isometric_pair",
        result.inner.isometric_pair_residual,
        tol.max(1e-9),
    ));
    report.push(CheckEntry::gated(
        "weakly_coisometric",
        result.inner.weak_coisometry_defect,
        tol,
    ));
    report.push(CheckEntry::gated(
        "coisometric",
        result.structure.coisometric_residual,
        tol,
    ));
    report.push(if result.inner.inner {
        CheckEntry::gated("inner", result.inner.weak_coisometry_defect, tol.max(1e-9))
    } else {
        CheckEntry {
            name: "inner".into(),
            residual: 1.0,
            threshold: tol,
            verdict: Verdict::Fail,
        }
    });
    report.push(CheckEntry::gated(
        "membership",
        result.membership_residual,
        tol.max(1e-9),
    ));
    report.push(CheckEntry::info(
        "input_dim",
        result.colligation.dim_input() as f64,
    ));
    let artifact = serde_json::to_value(ColligationFile::from_engine(&result.colligation)).unwrap();
    if let Some(path) = output {
        write_artifact(path, &artifact)?;
    }
    report.artifacts = Some(serde_json::json!({ "colligation": artifact }));
    if let Some(path) = certificate {
        let cert_value = serde_json::to_value(&report).unwrap();
        write_artifact(path, &cert_value)?;
    }
    emit(&report, format);
    Ok(exit_code(
        &report,
        &["inner".to_string(), "membership".to_string()],
    ))
}

fn parse_param(text: &str, rows: usize, cols: usize) -> Result<CMat, String> {
    let value: serde_json::Value =
        serde_json::from_str(text).map_err(|e| format!("cannot parse --param: {}", e))?;
    let as_pair = |v: &serde_json::Value| -> Option<[f64; 2]> {
        let arr = v.as_array()?;
        if arr.len() != 2 {
            return None;
        }
        Some([arr[0].as_f64()?, arr[1].as_f64()?])
    };
    // Scalar shorthand [re, im].
    if let Some(p) = as_pair(&value) {
        if rows != 1 || cols != 1 {
            return Err(format!(
                "--param is a scalar but the family parameter is {}x{}",
                rows, cols
            ));
        }
        return Ok(CMat::from_element(1, 1, cplx(p[0], p[1])));
    }
    let outer = value
        .as_array()
        .ok_or_else(|| "--param must be [re,im] or a matrix of such pairs".to_string())?;
    if outer.len() != rows {
        return Err(format!("--param has {} rows, expected {}", outer.len(), rows));
    }
    let mut m = CMat::zeros(rows, cols);
    for (i, row) in outer.iter().enumerate() {
        let row = row
            .as_array()
            .ok_or_else(|| "--param rows must be arrays".to_string())?;
        if row.len() != cols {
            return Err(format!(
                "--param row {} has {} entries, expected {}",
                i,
                row.len(),
                cols
            ));
        }
        for (j, v) in row.iter().enumerate() {
            let p = as_pair(v).ok_or_else(|| "matrix entries must be [re,im]".to_string())?;
            m[(i, j)] = cplx(p[0], p[1]);
        }
    }
    Ok(m)
}

fn cmd_model(
    file: &Path,
    param: Option<&str>,
    degree_cap: Option<usize>,
    tol: f64,
    seed: u64,
    output: Option<&Path>,
    format: Format,
) -> Result<i32, String> {
    let (bytes, dg) = read_input(file)?;
    let parsed: MultiplierFile =
        serde_json::from_slice(&bytes).map_err(|e| format!("parse error: {}", e))?;
    let series = parsed.to_engine().map_err(|e| e.to_string())?;
    let cap = degree_cap.unwrap_or(series.max_total_degree() + 4);
    let space = hks_subspace(&series, cap, tol.max(1e-9)).map_err(|e| e.to_string())?;
    let (pair, gleason) = gleason_model_pair(&space, tol).map_err(|e| e.to_string())?;
    let family = model_family(&series, &space, &pair, tol.max(1e-9), seed)
        .map_err(|e| e.to_string())?;
    let x = match param {
        Some(text) => parse_param(text, family.dim_u0(), family.dim_dperp())?,
        None => CMat::zeros(family.dim_u0(), family.dim_dperp()),
    };
    let (col, class) = assemble(&family, &x, tol).map_err(|e| e.to_string())?;
    let mut report = Report::new(
        format!(
            "model {} --degree-cap {} --tol {:e} --seed {}{}",
            file.display(),
            cap,
            tol,
            seed,
            param.map(|p| format!(" --param {}", p)).unwrap_or_default()
        ),
        dg,
        seed,
        tol,
    );
    report.push(CheckEntry::info("hks_dim", space.dim() as f64));
    report.push(CheckEntry::info("dperp_dim", family.dim_dperp() as f64));
    report.push(CheckEntry::info("u0_dim", family.dim_u0() as f64));
    report.push(CheckEntry::gated(
        "gleason_closure",
        gleason.max_closure_residual,
        tol.max(1e-9),
    ));
    report.push(CheckEntry::gated(
        "b_core_residual",
        family.core_residual,
        tol.max(1e-9),
    ));
    let wc = weakly_coisometric_check(&col, &family.dsub, tol).map_err(|e| e.to_string())?;
    report.push(CheckEntry::gated("weakly_coisometric", wc.defect, tol));
    let rep = structure_report(&col, tol);
    report.push(CheckEntry {
        name: "coisometric".into(),
        residual: rep.coisometric_residual,
        threshold: tol,
        verdict: if rep.coisometric == class.coisometric_expected {
            if rep.coisometric {
                Verdict::Pass
            } else {
                Verdict::Fail
            }
        } else {
            Verdict::Inconclusive
        },
    });
    report.push(CheckEntry {
        name: "unitary".into(),
        residual: rep.isometric_residual.max(rep.coisometric_residual),
        threshold: tol,
        verdict: if rep.unitary == class.unitary_expected {
            if rep.unitary {
                Verdict::Pass
            } else {
                Verdict::Fail
            }
        } else {
            Verdict::Inconclusive
        },
    });
    // The assembled member must reproduce the multiplier.
    let mut transfer_mismatch: f64 = 0.0;
    for p in ball_points(series.d, 12, 0.7, seed.wrapping_add(2)) {
        let direct = transfer_eval(&col, &p).map_err(|e| e.to_string())?;
        transfer_mismatch = transfer_mismatch.max(opnorm(&(direct - series.eval(&p))));
    }
    report.push(CheckEntry::gated(
        "transfer_match",
        transfer_mismatch,
        tol.max(1e-9),
    ));
    let artifact = serde_json::to_value(ColligationFile::from_engine(&col)).unwrap();
    if let Some(path) = output {
        write_artifact(path, &artifact)?;
    }
    report.artifacts = Some(serde_json::json!({ "colligation": artifact }));
    emit(&report, format);
    Ok(exit_code(
        &report,
        &[
            "gleason_closure".to_string(),
            "b_core_residual".to_string(),
            "weakly_coisometric".to_string(),
            "transfer_match".to_string(),
        ],
    ))
}

fn cmd_charfun(
    file: &Path,
    tol: f64,
    seed: u64,
    output: Option<&Path>,
    format: Format,
) -> Result<i32, String> {
    let (bytes, dg) = read_input(file)?;
    let parsed: RowContractionFile =
        serde_json::from_slice(&bytes).map_err(|e| format!("parse error: {}", e))?;
    let t = parsed.to_engine(tol).map_err(|e| e.to_string())?;
    let col = halmos_dilation(&t, tol).map_err(|e| e.to_string())?;
    let mut report = Report::new(
        format!("charfun {} --tol {:e} --seed {}", file.display(), tol, seed),
        dg,
        seed,
        tol,
    );
    let rep = structure_report(&col, tol.max(1e-10));
    report.push(CheckEntry::gated(
        "unitary",
        rep.isometric_residual.max(rep.coisometric_residual),
        tol.max(1e-10),
    ));
    report.push(CheckEntry::gated("commutative", t.commutator_max, tol));
    let co = coincidence_conditions(&col, tol);
    report.push(CheckEntry {
        name: "pure".into(),
        residual: pure_check(&col.d_op, PURITY_MARGIN).sigma_max,
        threshold: 1.0 - PURITY_MARGIN,
        verdict: if co.pure { Verdict::Pass } else { Verdict::Fail },
    });
    report.push(CheckEntry {
        name: "coincides".into(),
        residual: if co.coincides { 0.0 } else { 1.0 },
        threshold: 0.5,
        verdict: if co.coincides {
            Verdict::Pass
        } else {
            Verdict::Fail
        },
    });
    report.push(CheckEntry {
        name: "injectivity_trio_agree".into(),
        residual: if co.trio_agree { 0.0 } else { 1.0 },
        threshold: 0.5,
        verdict: if co.trio_agree {
            Verdict::Pass
        } else {
            Verdict::Fail
        },
    });
    // The direct characteristic-function route must match the dilation
    // transfer function.
    let mut mismatch: f64 = 0.0;
    for p in ball_points(t.d, 10, 0.7, seed.wrapping_add(3)) {
        let via_col = transfer_eval(&col, &p).map_err(|e| e.to_string())?;
        let direct = characteristic_function(&t, tol, &p).map_err(|e| e.to_string())?;
        mismatch = mismatch.max(opnorm(&(via_col - direct)));
    }
    report.push(CheckEntry::gated("char_match", mismatch, 1e-12));
    let artifact = serde_json::to_value(ColligationFile::from_engine(&col)).unwrap();
    if let Some(path) = output {
        write_artifact(path, &artifact)?;
    }
    report.artifacts = Some(serde_json::json!({ "colligation": artifact }));
    emit(&report, format);
    Ok(exit_code(
        &report,
        &["unitary".to_string(), "char_match".to_string()],
    ))
}

fn cmd_probe_hankel(n: usize, format: Format) -> Result<i32, String> {
    let table = hankel_probe(n).map_err(|e| e.to_string())?;
    let mut report = Report::new(format!("probe-hankel --n {}", n), digest(&[]), 0, 0.0);
    let mut required = Vec::new();
    for entry in &table {
        let name = format!("H_{}_full_rank", entry.n);
        report.push(CheckEntry {
            name: name.clone(),
            residual: (entry.n + 1 - entry.rank) as f64,
            threshold: 0.5,
            verdict: if entry.full {
                Verdict::Pass
            } else {
                Verdict::Fail
            },
        });
        required.push(name);
    }
    match format {
        Format::Text => {
            println!("# probe-hankel --n {}", n);
            println!("{:>4} {:>6} {:>6}", "n", "rank", "full");
            for entry in &table {
                println!(
                    "{:>4} {:>6} {:>6}",
                    entry.n,
                    entry.rank,
                    if entry.full { "yes" } else { "NO" }
                );
            }
        }
        Format::Json => println!("{}", serde_json::to_string_pretty(&report).unwrap()),
    }
    Ok(exit_code(&report, &required))
}
