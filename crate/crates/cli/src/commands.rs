//! One function per subcommand. Each builds a JSON report body and hands it
//! to [`emit`] together with the run manifest.

use std::path::{Path, PathBuf};

use renyikw_core::{
    c_alpha, c_alpha_with_outcomes, check_half_lemma, check_psuc_bound, check_single_copy_capacity_bound, eof_alpha,
    eof_alpha_with_outcomes, eof_half_roof_check, kw_verify, mutual_information, p_success, qjsd, quantum_discord,
    random_state, renyi_quantum, robustness_pure, AlphaParam, DensityMatrix64, OptReport, OptimizerConfig, PureState64,
    QEnsemble64, RandomState, Side, StateKind,
};
use serde_json::{json, Map, Value};

use crate::io::{
    ensemble_from_json, povm_json, pure_json, state_from_json, EnsembleJson, MemberJson, State, StateJson,
};
use crate::manifest::{Recorder, RunManifest};
use crate::{sweep, CliError, Command, Common, Kind, MeasureSide, RandomArgs};

pub fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Entropy(c) => single("entropy", c, entropy),
        Command::Qjsd(c) => single("qjsd", c, qjsd_cmd),
        Command::Calpha(c) => single("calpha", c, calpha),
        Command::Eof(c) => single("eof", c, eof),
        Command::Discord(c) => single("discord", c, discord),
        Command::KwVerify(c) => single("kw-verify", c, kw),
        Command::Discriminate(c) => single("discriminate", c, discriminate),
        Command::Robustness(c) => single("robustness", c, robustness),
        Command::PsucBound(c) => single("psuc-bound", c, psuc_bound),
        Command::Sweep(args) => sweep::run(args),
        Command::Random(args) => random(args),
    }
}

type Body = Map<String, Value>;

fn single(name: &str, common: Common, f: fn(&Common, &mut Recorder) -> Result<Body, CliError>) -> Result<(), CliError> {
    let mut rec = Recorder::new(name, &common, common.seed);
    let body = f(&common, &mut rec)?;
    emit(common.out.as_deref(), body, rec.finish())
}

/// Writes `body` plus the manifest as pretty JSON to `out` or standard output.
pub fn emit(out: Option<&Path>, mut body: Body, manifest: RunManifest) -> Result<(), CliError> {
    body.insert("manifest".into(), serde_json::to_value(manifest).expect("manifest serializes"));
    let mut text = serde_json::to_string_pretty(&Value::Object(body)).expect("report serializes");
    text.push('\n');
    write_text(out, &text)
}

pub fn write_text(out: Option<&Path>, text: &str) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| CliError::Validation(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

pub fn config(c: &Common) -> Result<OptimizerConfig, CliError> {
    let config = OptimizerConfig {
        restarts: c.restarts,
        max_iters: c.max_iters,
        objective_tol: c.tol,
        master_seed: c.seed,
        parallel: c.parallel,
        ..OptimizerConfig::default()
    };
    config.validate()?;
    Ok(config)
}

pub fn alpha(c: &Common) -> Result<f64, CliError> {
    c.alpha.ok_or_else(|| CliError::Usage("--alpha is required".into()))
}

fn required<'a>(path: &'a Option<PathBuf>, flag: &str) -> Result<&'a Path, CliError> {
    path.as_deref().ok_or_else(|| CliError::Usage(format!("{flag} is required")))
}

fn parse<T: serde::de::DeserializeOwned>(bytes: &[u8], path: &Path) -> Result<T, CliError> {
    serde_json::from_slice(bytes).map_err(|e| CliError::Validation(format!("InvalidInput: {}: {e}", path.display())))
}

/// Reads `--state`, regrouping subsystems when `--dims` is given.
pub fn load_state(c: &Common, rec: &mut Recorder) -> Result<State, CliError> {
    let path = required(&c.state, "--state")?;
    let mut json: StateJson = parse(&rec.read(path)?, path)?;
    if let Some(dims) = &c.dims {
        match &mut json {
            StateJson::Vector(v) => v.dims = dims.clone(),
            StateJson::Matrix(m) => m.dims = dims.clone(),
        }
    }
    Ok(state_from_json(&json)?)
}

fn load_ensemble(c: &Common, rec: &mut Recorder) -> Result<QEnsemble64, CliError> {
    let path = required(&c.ensemble, "--ensemble")?;
    let json: EnsembleJson = parse(&rec.read(path)?, path)?;
    Ok(ensemble_from_json(&json)?)
}

fn pure_tripartite(state: &State, command: &str) -> Result<PureState64, CliError> {
    match state {
        State::Pure(p) if p.dims().len() == 3 => Ok(p.clone()),
        _ => Err(CliError::Validation(format!("DimMismatch: {command} needs a pure state on A ⊗ B ⊗ E given as a vector"))),
    }
}

pub fn opt_report_json(r: &OptReport) -> Value {
    json!({
        "best_value": r.best_value,
        "best_params": r.best_params,
        "best_restart": r.best_restart,
        "per_restart_values": r.per_restart_values,
        "evaluations": r.evaluations,
        "converged": r.converged,
    })
}

fn object(v: Value) -> Body {
    match v {
        Value::Object(m) => m,
        _ => unreachable!("report bodies are objects"),
    }
}

fn entropy(c: &Common, rec: &mut Recorder) -> Result<Body, CliError> {
    let a = AlphaParam::entropy(alpha(c)?)?;
    let state = load_state(c, rec)?;
    Ok(object(json!({ "alpha": a.value(), "value": renyi_quantum(&state.density(), a) })))
}

fn qjsd_cmd(c: &Common, rec: &mut Recorder) -> Result<Body, CliError> {
    let a = AlphaParam::correlation(alpha(c)?)?;
    let xi = load_ensemble(c, rec)?;
    Ok(object(json!({ "alpha": a.value(), "value": qjsd(&xi, a)? })))
}

/// The bipartite state to measure and the measured side. Tripartite pure
/// inputs are reduced to (A, E) with E measured.
fn measured(c: &Common, state: &State) -> Result<(DensityMatrix64, Side, MeasureSide), CliError> {
    let rho = state.density();
    match (state.dims().len(), c.measure_side) {
        (3, None | Some(MeasureSide::E)) => Ok((rho.partial_trace(&[0, 2])?, Side::B, MeasureSide::E)),
        (2, None | Some(MeasureSide::B)) => Ok((rho, Side::B, MeasureSide::B)),
        (2, Some(MeasureSide::A)) => Ok((rho, Side::A, MeasureSide::A)),
        (n, side) => Err(CliError::Validation(format!("DimMismatch: cannot measure {side:?} on a state with {n} subsystems"))),
    }
}

fn calpha(c: &Common, rec: &mut Recorder) -> Result<Body, CliError> {
    let a = AlphaParam::correlation(alpha(c)?)?;
    let config = config(c)?;
    let state = load_state(c, rec)?;
    let (rho, side, label) = measured(c, &state)?;
    let value = match c.outcomes {
        Some(n) => c_alpha_with_outcomes(&rho, side, a, n, &config)?,
        None => c_alpha(&rho, side, a, &config)?,
    };
    Ok(object(json!({
        "alpha": a.value(),
        "value": value.value,
        "measure_side": label,
        "povm": povm_json(value.povm().expect("c_alpha returns a measurement")),
        "opt_report": opt_report_json(&value.opt_report),
    })))
}

fn eof(c: &Common, rec: &mut Recorder) -> Result<Body, CliError> {
    let a = AlphaParam::correlation(alpha(c)?)?;
    let config = config(c)?;
    let rho = load_state(c, rec)?.density();
    let value = match c.outcomes {
        Some(n) => eof_alpha_with_outcomes(&rho, a, n, &config)?,
        None => eof_alpha(&rho, a, &config)?,
    };
    let members = value
        .ensemble()
        .expect("eof returns a decomposition")
        .iter()
        .map(|(q, psi)| MemberJson { p: *q, state: StateJson::Vector(pure_json(psi)) })
        .collect();
    Ok(object(json!({
        "alpha": a.value(),
        "value": value.value,
        "decomposition": EnsembleJson { members },
        "opt_report": opt_report_json(&value.opt_report),
    })))
}

fn discord(c: &Common, rec: &mut Recorder) -> Result<Body, CliError> {
    let config = config(c)?;
    let state = load_state(c, rec)?;
    let (rho, side, label) = measured(c, &state)?;
    let (d, j) = quantum_discord(&rho, side, &config)?;
    Ok(object(json!({
        "discord": d,
        "classical_correlation": j.value,
        "mutual_information": mutual_information(&rho)?,
        "measure_side": label,
        "povm": povm_json(j.povm().expect("J comes with a measurement")),
        "opt_report": opt_report_json(&j.opt_report),
    })))
}

fn kw(c: &Common, rec: &mut Recorder) -> Result<Body, CliError> {
    let a = AlphaParam::correlation(alpha(c)?)?;
    let config = config(c)?;
    let psi = pure_tripartite(&load_state(c, rec)?, "kw-verify")?;
    let r = kw_verify(&psi, a, &config)?;
    Ok(object(json!({
        "alpha": r.alpha,
        "c_alpha_ae": r.c_alpha_ae,
        "s_alpha_a": r.s_alpha_a,
        "eof_alpha_ab": r.eof_alpha_ab,
        "gap": r.gap,
        "c_alpha_report": opt_report_json(&r.c_alpha_report),
        "eof_report": opt_report_json(&r.eof_report),
    })))
}

fn discriminate(c: &Common, rec: &mut Recorder) -> Result<Body, CliError> {
    let config = config(c)?;
    let xi = load_ensemble(c, rec)?;
    let r = p_success(&xi, &config)?;
    Ok(object(json!({
        "p_success": r.p_success,
        "optimal_povm": povm_json(&r.optimal_povm),
        "opt_report": opt_report_json(&r.opt_report),
        "helstrom_value": r.helstrom_value,
    })))
}

fn robustness(c: &Common, rec: &mut Recorder) -> Result<Body, CliError> {
    match load_state(c, rec)? {
        State::Pure(psi) => {
            let r = robustness_pure(&psi)?;
            let (s_half, _, diff) = check_half_lemma(&psi)?;
            Ok(object(json!({ "r_g": r.r_g, "lr_g": r.lr_g, "s_half": s_half, "half_lemma_diff": diff })))
        }
        State::Mixed(rho) => {
            let (eof, roof, diff) = eof_half_roof_check(&rho, &config(c)?)?;
            Ok(object(json!({ "eof_half": eof, "lr_g_roof": roof, "diff": diff })))
        }
    }
}

fn psuc_bound(c: &Common, rec: &mut Recorder) -> Result<Body, CliError> {
    let config = config(c)?;
    if c.ensemble.is_some() {
        let xi = load_ensemble(c, rec)?;
        let (s, neg_log, slack) = check_psuc_bound(&xi, &config)?;
        return Ok(object(json!({ "s_half_avg": s, "neg_log_psuc": neg_log, "slack": slack })));
    }
    if c.state.is_none() {
        return Err(CliError::Usage("psuc-bound needs --ensemble or --state".into()));
    }
    let psi = pure_tripartite(&load_state(c, rec)?, "psuc-bound")?;
    let (c_half, rhs, slack) = check_single_copy_capacity_bound(&psi, &config)?;
    Ok(object(json!({ "c_half": c_half, "rhs": rhs, "slack": slack })))
}

fn random(args: RandomArgs) -> Result<(), CliError> {
    let c = &args.common;
    let rec = Recorder::new("random", &args, c.seed);
    let dims = c.dims.clone().ok_or_else(|| CliError::Usage("--dims is required".into()))?;
    let (kind, rank) = match args.kind {
        Kind::Pure => (StateKind::HaarPure, 1),
        Kind::Mixed => (StateKind::GinibreMixed, args.rank.unwrap_or_else(|| dims.iter().product())),
    };
    let state = match random_state::<f64>(kind, &dims, rank, c.seed)? {
        RandomState::Pure(p) => State::Pure(p),
        RandomState::Mixed(r) => State::Mixed(r),
    };
    let body = object(serde_json::to_value(state.to_json()).expect("state serializes"));
    emit(c.out.as_deref(), body, rec.finish())
}
