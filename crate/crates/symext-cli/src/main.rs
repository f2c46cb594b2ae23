//! Command-line front end: state checking, extension construction, family
//! sweeps, random surveys, face exploration, and channel analysis.
//!
//! Machine-readable output goes to stdout (JSON for single reports, CSV for
//! sweeps, with a leading `# schema: symext/v1` comment line); human summary
//! lines and summary JSON go to stderr. Exit codes: 0 extendible / success,
//! 1 not extendible (or not anti-degradable), 2 error.

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Serialize;

use symext::channels::{
    channel_families, is_antidegradable, kraus_to_choi, ChannelFamily, KrausSet,
};
use symext::criterion::{classify_with_tol, f_value, StateClass, TOL_F};
use symext::extension::{extend, face_endpoint_parameters, face_state, FacePoint};
use symext::linalg::{c, su2, CMat};
use symext::oracle::{dykstra_extend_default, OracleReport};
use symext::states::{
    random_density, read_state, to_grids, werner, GaussStream, RngSeed, RNG_IDENTITY,
};

const SCHEMA: &str = "symext/v1";

#[derive(Parser)]
#[command(
    name = "symext",
    about = "Symmetric extendibility of two-qubit states: checks, witnesses, extensions, sweeps"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Classify a state file; optionally attach witness, extension, oracle report.
    Check {
        state_file: PathBuf,
        /// Cross-check with the convex-feasibility oracle.
        #[arg(long)]
        oracle: bool,
        /// Include the supporting-hyperplane witness (non-extendible inputs).
        #[arg(long)]
        witness: bool,
        /// Include an extension certificate (extendible inputs).
        #[arg(long)]
        extend: bool,
    },
    /// f-values along the Werner family; CSV with a fidelity column.
    SweepWerner {
        #[arg(long, default_value_t = 0.0)]
        from: f64,
        #[arg(long, default_value_t = 1.0)]
        to: f64,
        #[arg(long, default_value_t = 200)]
        steps: usize,
        #[arg(long)]
        oracle: bool,
    },
    /// Random-state survey under the seeded Ginibre ensemble.
    Survey {
        #[arg(long, default_value_t = 100)]
        count: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value_t = 4)]
        rank: usize,
        /// Fraction of states also run through the oracle (deterministic subset).
        #[arg(long, default_value_t = 0.0)]
        oracle_fraction: f64,
        /// Worker threads (states are partitioned by index; output order is fixed).
        #[arg(long, default_value_t = 4)]
        threads: usize,
    },
    /// Sample the face of a full-rank boundary state's supporting hyperplane.
    Face {
        state_file: PathBuf,
        #[arg(long, default_value_t = 100)]
        samples: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
    /// Anti-degradability of a qubit channel; optional parameter sweep.
    Channel {
        /// Channel spec: a JSON file path or inline JSON
        /// ({"family": ..., "params": ...} or {"kraus": [{re, im}, ...]}).
        spec: String,
        /// Sweep the family parameter over [0, 1] with this many steps.
        #[arg(long)]
        sweep: Option<usize>,
    },
    /// Build and emit an extension certificate for a state file.
    Extend { state_file: PathBuf },
}

// ---------------------------------------------------------------------------
// JSON report shapes

#[derive(Serialize)]
struct MatrixJson {
    re: Vec<Vec<f64>>,
    im: Vec<Vec<f64>>,
}

fn matrix_json<const N: usize>(m: &CMat<N>) -> MatrixJson {
    let (re, im) = to_grids(m);
    MatrixJson { re, im }
}

#[derive(Serialize)]
struct WitnessJson {
    matrix: MatrixJson,
    trace_with_state: f64,
}

#[derive(Serialize)]
struct ExtensionJson {
    matrix: MatrixJson,
    marginal_residual: f64,
    min_eig: f64,
    swap_residual: f64,
    route: String,
}

#[derive(Serialize)]
struct OracleJson {
    status: String,
    iterations: usize,
    final_gap: f64,
}

impl From<&OracleReport> for OracleJson {
    fn from(r: &OracleReport) -> Self {
        OracleJson {
            status: r.status.to_string(),
            iterations: r.iterations,
            final_gap: r.final_gap,
        }
    }
}

#[derive(Serialize)]
struct CheckReport {
    schema: &'static str,
    f_value: f64,
    class: String,
    rank: usize,
    tol_f: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    witness: Option<WitnessJson>,
    #[serde(skip_serializing_if = "Option::is_none")]
    extension: Option<ExtensionJson>,
    #[serde(skip_serializing_if = "Option::is_none")]
    oracle: Option<OracleJson>,
}

#[derive(Serialize)]
struct ChannelReport {
    schema: &'static str,
    parameter_name: String,
    f_value: f64,
    class: String,
    anti_degradable: bool,
}

fn tol_from_env() -> Result<f64, String> {
    match std::env::var("SYMEXT_TOL") {
        Ok(v) => v
            .parse::<f64>()
            .map_err(|_| format!("SYMEXT_TOL is not a number: {v}")),
        Err(_) => Ok(TOL_F),
    }
}

fn exit_code_for(class: StateClass) -> u8 {
    match class {
        StateClass::InteriorExtendible | StateClass::BoundaryExtendible => 0,
        StateClass::NonExtendible => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<u8, String> {
    let tol_f = tol_from_env()?;
    match cli.cmd {
        Cmd::Check {
            state_file,
            oracle,
            witness,
            extend: want_ext,
        } => cmd_check(&state_file, oracle, witness, want_ext, tol_f),
        Cmd::SweepWerner {
            from,
            to,
            steps,
            oracle,
        } => cmd_sweep_werner(from, to, steps, oracle, tol_f),
        Cmd::Survey {
            count,
            seed,
            rank,
            oracle_fraction,
            threads,
        } => cmd_survey(count, seed, rank, oracle_fraction, threads, tol_f),
        Cmd::Face {
            state_file,
            samples,
            seed,
        } => cmd_face(&state_file, samples, seed, tol_f),
        Cmd::Channel { spec, sweep } => cmd_channel(&spec, sweep, tol_f),
        Cmd::Extend { state_file } => cmd_extend(&state_file, tol_f),
    }
}

fn cmd_check(
    path: &PathBuf,
    oracle: bool,
    witness: bool,
    want_ext: bool,
    tol_f: f64,
) -> Result<u8, String> {
    let rho = read_state(path).map_err(|e| e.to_string())?;
    let verdict = classify_with_tol(&rho, tol_f).map_err(|e| e.to_string())?;
    let witness_json = if witness {
        verdict.witness.as_ref().map(|w| WitnessJson {
            matrix: matrix_json(w.matrix()),
            trace_with_state: w.trace_product(rho.herm()),
        })
    } else {
        None
    };
    let extension_json = if want_ext && verdict.class != StateClass::NonExtendible {
        let cert = extend(&rho, tol_f).map_err(|e| e.to_string())?;
        Some(ExtensionJson {
            matrix: matrix_json(cert.ext.matrix()),
            marginal_residual: cert.marginal_residual,
            min_eig: cert.min_eig,
            swap_residual: cert.swap_residual,
            route: cert.route.to_string(),
        })
    } else {
        None
    };
    let oracle_json = if oracle {
        Some(OracleJson::from(&dykstra_extend_default(&rho)))
    } else {
        None
    };
    let report = CheckReport {
        schema: SCHEMA,
        f_value: verdict.f_value,
        class: verdict.class.to_string(),
        rank: verdict.rank,
        tol_f,
        witness: witness_json,
        extension: extension_json,
        oracle: oracle_json,
    };
    println!("{}", serde_json::to_string_pretty(&report).unwrap());
    eprintln!(
        "f = {:.6}, {} (rank {})",
        report.f_value, report.class, report.rank
    );
    Ok(exit_code_for(verdict.class))
}

fn cmd_extend(path: &PathBuf, tol_f: f64) -> Result<u8, String> {
    let rho = read_state(path).map_err(|e| e.to_string())?;
    let verdict = classify_with_tol(&rho, tol_f).map_err(|e| e.to_string())?;
    if verdict.class == StateClass::NonExtendible {
        let report = CheckReport {
            schema: SCHEMA,
            f_value: verdict.f_value,
            class: verdict.class.to_string(),
            rank: verdict.rank,
            tol_f,
            witness: verdict.witness.as_ref().map(|w| WitnessJson {
                matrix: matrix_json(w.matrix()),
                trace_with_state: w.trace_product(rho.herm()),
            }),
            extension: None,
            oracle: None,
        };
        println!("{}", serde_json::to_string_pretty(&report).unwrap());
        eprintln!("state is not extendible (f = {:.6})", verdict.f_value);
        return Ok(1);
    }
    let cert = extend(&rho, tol_f).map_err(|e| e.to_string())?;
    let report = CheckReport {
        schema: SCHEMA,
        f_value: verdict.f_value,
        class: verdict.class.to_string(),
        rank: verdict.rank,
        tol_f,
        witness: None,
        extension: Some(ExtensionJson {
            matrix: matrix_json(cert.ext.matrix()),
            marginal_residual: cert.marginal_residual,
            min_eig: cert.min_eig,
            swap_residual: cert.swap_residual,
            route: cert.route.to_string(),
        }),
        oracle: None,
    };
    println!("{}", serde_json::to_string_pretty(&report).unwrap());
    eprintln!(
        "extension built via {} route (marginal residual {:.3e})",
        cert.route, cert.marginal_residual
    );
    Ok(0)
}

fn cmd_sweep_werner(
    from: f64,
    to: f64,
    steps: usize,
    oracle: bool,
    tol_f: f64,
) -> Result<u8, String> {
    if !(0.0..=1.0).contains(&from) || !(0.0..=1.0).contains(&to) || from >= to {
        return Err(format!("need 0 <= from < to <= 1 (got {from}, {to})"));
    }
    if steps < 2 {
        return Err("steps must be at least 2".into());
    }
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    writeln!(out, "# schema: {SCHEMA}").unwrap();
    if oracle {
        writeln!(out, "p,f,class,fidelity,oracle_status").unwrap();
    } else {
        writeln!(out, "p,f,class,fidelity").unwrap();
    }
    for k in 0..steps {
        let p = from + (to - from) * (k as f64) / ((steps - 1) as f64);
        let rho = werner(p).map_err(|e| e.to_string())?;
        let v = classify_with_tol(&rho, tol_f).map_err(|e| e.to_string())?;
        let fidelity = (1.0 + 3.0 * p) / 4.0;
        if oracle {
            let rep = dykstra_extend_default(&rho);
            writeln!(out, "{p},{},{},{fidelity},{}", v.f_value, v.class, rep.status).unwrap();
        } else {
            writeln!(out, "{p},{},{},{fidelity}", v.f_value, v.class).unwrap();
        }
    }
    // root of f by bisection over the parameter
    let f_at = |p: f64| f_value(&werner(p).unwrap()).unwrap();
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f_at(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-14 {
            break;
        }
    }
    let root = 0.5 * (lo + hi);
    eprintln!(
        "{}",
        serde_json::json!({
            "schema": SCHEMA,
            "f_root_p": root,
            "fidelity_at_root": (1.0 + 3.0 * root) / 4.0,
        })
    );
    Ok(0)
}

struct SurveyRow {
    index: usize,
    seed: u64,
    f: f64,
    class: StateClass,
    oracle_status: Option<String>,
    oracle_agrees: Option<bool>,
}

fn cmd_survey(
    count: usize,
    seed: u64,
    rank: usize,
    oracle_fraction: f64,
    threads: usize,
    tol_f: f64,
) -> Result<u8, String> {
    if count == 0 {
        return Err("count must be at least 1".into());
    }
    if !(0.0..=1.0).contains(&oracle_fraction) {
        return Err("oracle-fraction must lie in [0, 1]".into());
    }
    let stride = if oracle_fraction > 0.0 {
        (1.0 / oracle_fraction).round().max(1.0) as usize
    } else {
        usize::MAX
    };
    let workers = threads.clamp(1, 64);
    let chunk = count.div_ceil(workers);
    let mut rows: Vec<Option<SurveyRow>> = Vec::new();
    rows.resize_with(count, || None);

    std::thread::scope(|scope| {
        for (w, slot) in rows.chunks_mut(chunk).enumerate() {
            scope.spawn(move || {
                let base = w * chunk;
                for (off, cell) in slot.iter_mut().enumerate() {
                    let index = base + off;
                    let state_seed = RngSeed::derive(seed, index as u64);
                    let rho = random_density::<4>(state_seed, rank).expect("valid rank");
                    let f = f_value(&rho).expect("valid state");
                    let class = classify_with_tol(&rho, tol_f).expect("classify").class;
                    let (oracle_status, oracle_agrees) = if index.is_multiple_of(stride) {
                        let rep = dykstra_extend_default(&rho);
                        let agrees = if f.abs() <= 1e-4 {
                            None // inside the ambiguity band
                        } else {
                            Some(match rep.status {
                                symext::OracleStatus::Feasible => f > 0.0,
                                symext::OracleStatus::InfeasibleHeuristic => f < 0.0,
                                symext::OracleStatus::MaxIter => false,
                            })
                        };
                        (Some(rep.status.to_string()), agrees)
                    } else {
                        (None, None)
                    };
                    *cell = Some(SurveyRow {
                        index,
                        seed: state_seed.0,
                        f,
                        class,
                        oracle_status,
                        oracle_agrees,
                    });
                }
            });
        }
    });

    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    writeln!(out, "# schema: {SCHEMA}").unwrap();
    writeln!(out, "index,seed,f,class,oracle_status").unwrap();
    let mut extendible = 0usize;
    let mut checked = 0usize;
    let mut agreed = 0usize;
    for row in rows.into_iter().flatten() {
        if row.class != StateClass::NonExtendible {
            extendible += 1;
        }
        if let Some(ok) = row.oracle_agrees {
            checked += 1;
            if ok {
                agreed += 1;
            }
        }
        writeln!(
            out,
            "{},{},{},{},{}",
            row.index,
            row.seed,
            row.f,
            row.class,
            row.oracle_status.unwrap_or_default()
        )
        .unwrap();
    }
    eprintln!(
        "{}",
        serde_json::json!({
            "schema": SCHEMA,
            "count": count,
            "rank": rank,
            "generator": RNG_IDENTITY,
            "extendible_fraction": extendible as f64 / count as f64,
            "oracle_checked": checked,
            "oracle_agreement": if checked > 0 { Some(agreed as f64 / checked as f64) } else { None },
        })
    );
    Ok(0)
}

fn cmd_face(path: &PathBuf, samples: usize, seed: u64, tol_f: f64) -> Result<u8, String> {
    let sigma = read_state(path).map_err(|e| e.to_string())?;
    let h = symext::criterion::hyperplane_h(&sigma).map_err(|e| e.to_string())?;
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    writeln!(out, "# schema: {SCHEMA}").unwrap();
    writeln!(out, "theta,phi1,phi2,x,y,f,tr_h_rho,rank").unwrap();
    let mut gauss = GaussStream::new(RngSeed(seed));
    let mut emitted = 0usize;
    let two_pi = 2.0 * std::f64::consts::PI;
    while emitted < samples {
        // Haar-distributed frame with reportable angles
        let theta = gauss.uniform_unit().sqrt().asin();
        let phi1 = gauss.uniform_unit() * two_pi;
        let phi2 = gauss.uniform_unit() * two_pi;
        let u = su2(theta, phi1, phi2);
        let (alpha, beta) =
            face_endpoint_parameters(&sigma, &u, tol_f).map_err(|e| e.to_string())?;
        if alpha < 1e-12 && beta < 1e-12 {
            continue; // degenerate frame, resample
        }
        // interior ratio: geometric mean of the admissible interval
        let ratio = if beta < 1e-12 {
            4.0
        } else if alpha < 1e-12 {
            0.25
        } else {
            (alpha / beta).sqrt()
        };
        let points = [
            (1.0, 1.0),
            (alpha.max(1e-300), beta.max(1e-300)),
            (ratio, 1.0),
        ];
        for (x, y) in points {
            if emitted >= samples {
                break;
            }
            let fp = FacePoint::new(u, x, y).map_err(|e| e.to_string())?;
            let rho = face_state(&sigma, &fp, tol_f).map_err(|e| e.to_string())?;
            let f = f_value(&rho).map_err(|e| e.to_string())?;
            let on_plane = h.trace_product(rho.herm());
            let rank = rho.numerical_rank().map_err(|e| e.to_string())?;
            writeln!(out, "{theta},{phi1},{phi2},{x},{y},{f},{on_plane},{rank}").unwrap();
            emitted += 1;
        }
    }
    eprintln!("emitted {emitted} face samples");
    Ok(0)
}

#[derive(serde::Deserialize)]
struct KrausSpec {
    kraus: Vec<KrausMatrixSpec>,
}

#[derive(serde::Deserialize)]
struct KrausMatrixSpec {
    re: Vec<Vec<f64>>,
    im: Vec<Vec<f64>>,
}

enum ChannelSpec {
    Family(ChannelFamily),
    Raw(KrausSet),
}

fn parse_channel_spec(spec: &str) -> Result<ChannelSpec, String> {
    let text = if spec.trim_start().starts_with('{') {
        spec.to_string()
    } else {
        std::fs::read_to_string(spec).map_err(|e| format!("cannot read {spec}: {e}"))?
    };
    if let Ok(fam) = serde_json::from_str::<ChannelFamily>(&text) {
        return Ok(ChannelSpec::Family(fam));
    }
    let raw: KrausSpec =
        serde_json::from_str(&text).map_err(|e| format!("invalid channel spec: {e}"))?;
    let mut ops = Vec::new();
    for m in raw.kraus {
        if m.re.len() != 2 || m.im.len() != 2 || m.re.iter().chain(m.im.iter()).any(|r| r.len() != 2)
        {
            return Err("kraus matrices must be 2x2".into());
        }
        let mut k = CMat::<2>::zero();
        for i in 0..2 {
            for j in 0..2 {
                k[(i, j)] = c(m.re[i][j], m.im[i][j]);
            }
        }
        ops.push(k);
    }
    Ok(ChannelSpec::Raw(
        KrausSet::new(ops).map_err(|e| e.to_string())?,
    ))
}

fn cmd_channel(spec: &str, sweep: Option<usize>, tol_f: f64) -> Result<u8, String> {
    let parsed = parse_channel_spec(spec)?;
    match (parsed, sweep) {
        (ChannelSpec::Raw(k), None) => {
            let v = is_antidegradable(&k, tol_f).map_err(|e| e.to_string())?;
            print_channel_report("kraus", &v);
            Ok(exit_code_for(v.class))
        }
        (ChannelSpec::Raw(_), Some(_)) => Err("--sweep requires a named channel family".into()),
        (ChannelSpec::Family(fam), None) => {
            let k = channel_families(&fam).map_err(|e| e.to_string())?;
            let v = is_antidegradable(&k, tol_f).map_err(|e| e.to_string())?;
            print_channel_report(fam.parameter_name(), &v);
            Ok(exit_code_for(v.class))
        }
        (ChannelSpec::Family(fam), Some(steps)) => {
            if steps < 2 {
                return Err("sweep needs at least 2 steps".into());
            }
            let f_at = |t: f64| -> Result<f64, String> {
                let k = channel_families(&fam.with_parameter(t)).map_err(|e| e.to_string())?;
                let choi = kraus_to_choi(&k).map_err(|e| e.to_string())?;
                f_value(choi.state()).map_err(|e| e.to_string())
            };
            let stdout = std::io::stdout();
            let mut out = stdout.lock();
            writeln!(out, "# schema: {SCHEMA}").unwrap();
            writeln!(out, "param,f,class,anti_degradable").unwrap();
            let mut prev: Option<(f64, f64)> = None;
            let mut crossings = Vec::new();
            for i in 0..steps {
                let t = i as f64 / (steps - 1) as f64;
                let k = channel_families(&fam.with_parameter(t)).map_err(|e| e.to_string())?;
                let v = is_antidegradable(&k, tol_f).map_err(|e| e.to_string())?;
                writeln!(
                    out,
                    "{t},{},{},{}",
                    v.f_value,
                    v.class,
                    v.class != StateClass::NonExtendible
                )
                .unwrap();
                if let Some((t0, f0)) = prev {
                    if f0.signum() != v.f_value.signum() && f0 != 0.0 {
                        // refine the crossing by bisection on f
                        let (mut lo, mut hi) = (t0, t);
                        let f_lo = f_at(lo)?;
                        for _ in 0..200 {
                            let mid = 0.5 * (lo + hi);
                            let fm = f_at(mid)?;
                            if (fm > 0.0) == (f_lo > 0.0) {
                                lo = mid;
                            } else {
                                hi = mid;
                            }
                            if hi - lo < 1e-12 {
                                break;
                            }
                        }
                        crossings.push(0.5 * (lo + hi));
                    }
                }
                prev = Some((t, v.f_value));
            }
            eprintln!(
                "{}",
                serde_json::json!({
                    "schema": SCHEMA,
                    "parameter": fam.parameter_name(),
                    "crossings": crossings,
                })
            );
            Ok(0)
        }
    }
}

fn print_channel_report(parameter_name: &str, v: &symext::Verdict) {
    let report = ChannelReport {
        schema: SCHEMA,
        parameter_name: parameter_name.to_string(),
        f_value: v.f_value,
        class: v.class.to_string(),
        anti_degradable: v.class != StateClass::NonExtendible,
    };
    println!("{}", serde_json::to_string_pretty(&report).unwrap());
    eprintln!(
        "channel is {}anti-degradable (Choi f = {:.6})",
        if report.anti_degradable { "" } else { "not " },
        v.f_value
    );
}
