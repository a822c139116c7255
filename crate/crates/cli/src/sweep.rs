//! `sweep`: one CSV row per (α, instance).
//!
//! The `gap` column is `value − S_α(ρ_A)` for pure bipartite inputs, the
//! identity gap for `kw`, and empty otherwise. The manifest goes to
//! `<out>.manifest.json`, or to standard error without `--out`.

use renyikw_core::random::{haar_pure, rng_from_seed};
use renyikw_core::{c_alpha, eof_alpha, kw_verify, renyi_quantum, AlphaParam, PureState64, Side};

use crate::commands::{config, load_state, write_text};
use crate::io::State;
use crate::manifest::Recorder;
use crate::{CliError, Quantity, SweepArgs};

pub const HEADER: &str = "alpha,instance_seed,quantity,value,gap,converged";

fn alpha_grid_error(spec: &str) -> CliError {
    CliError::Validation(format!("InvalidAlpha: grid {spec:?} is not start:stop:step with 0 < start <= stop < 1 and step > 0"))
}

/// Grid values `start, start + step, …` up to `stop`, rounded to 12 decimals.
pub fn parse_grid(spec: &str) -> Result<Vec<f64>, CliError> {
    let parts: Vec<f64> = spec
        .split(':')
        .map(|s| s.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| alpha_grid_error(spec))?;
    let [start, stop, step] = parts[..] else { return Err(alpha_grid_error(spec)) };
    if !(start > 0.0 && start <= stop && stop < 1.0 && step > 0.0) {
        return Err(alpha_grid_error(spec));
    }
    let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
    Ok((0..count).map(|k| ((start + k as f64 * step) * 1e12).round() / 1e12).collect())
}

struct Instance {
    seed: Option<u64>,
    state: State,
}

pub fn run(args: SweepArgs) -> Result<(), CliError> {
    let c = &args.common;
    let mut rec = Recorder::new("sweep", &args, c.seed);
    let grid = parse_grid(&args.grid)?;
    let config = config(c)?;
    let instances = if c.state.is_some() {
        vec![Instance { seed: None, state: load_state(c, &mut rec)? }]
    } else {
        let dims = c.dims.clone().ok_or_else(|| CliError::Usage("sweep needs --state or --dims".into()))?;
        (0..args.instances as u64)
            .map(|k| {
                let seed = c.seed.wrapping_add(k);
                Ok(Instance { seed: Some(seed), state: State::Pure(haar_pure(&dims, &mut rng_from_seed(seed))?) })
            })
            .collect::<Result<_, CliError>>()?
    };
    let mut csv = format!("{HEADER}\n");
    for &alpha in &grid {
        let a = AlphaParam::correlation(alpha)?;
        for inst in &instances {
            let (value, gap, converged) = match args.quantity {
                Quantity::Kw => {
                    let psi = tripartite(&inst.state)?;
                    let r = kw_verify(psi, a, &config)?;
                    (r.c_alpha_ae, Some(r.gap), r.c_alpha_report.converged && r.eof_report.converged)
                }
                Quantity::CAlpha => {
                    let v = c_alpha(&inst.state.density(), Side::B, a, &config)?;
                    (v.value, closed_form_gap(&inst.state, v.value, a)?, v.opt_report.converged)
                }
                Quantity::EofAlpha => {
                    let v = eof_alpha(&inst.state.density(), a, &config)?;
                    (v.value, closed_form_gap(&inst.state, v.value, a)?, v.opt_report.converged)
                }
            };
            let seed = inst.seed.map(|s| s.to_string()).unwrap_or_default();
            let gap = gap.map(|g| g.to_string()).unwrap_or_default();
            let quantity = match args.quantity {
                Quantity::CAlpha => "c_alpha",
                Quantity::EofAlpha => "eof_alpha",
                Quantity::Kw => "kw",
            };
            csv.push_str(&format!("{alpha},{seed},{quantity},{value},{gap},{converged}\n"));
        }
    }
    write_text(c.out.as_deref(), &csv)?;
    let manifest = serde_json::to_string_pretty(&rec.finish()).expect("manifest serializes") + "\n";
    match &c.out {
        Some(path) => {
            let mut side = path.clone().into_os_string();
            side.push(".manifest.json");
            write_text(Some(side.as_ref()), &manifest)
        }
        None => {
            eprint!("{manifest}");
            Ok(())
        }
    }
}

fn tripartite(state: &State) -> Result<&PureState64, CliError> {
    match state {
        State::Pure(p) if p.dims().len() == 3 => Ok(p),
        _ => Err(CliError::Validation("DimMismatch: kw needs a pure state on A ⊗ B ⊗ E".into())),
    }
}

/// Both quantities equal `S_α(ρ_A)` on pure bipartite states.
fn closed_form_gap(state: &State, value: f64, a: AlphaParam<f64>) -> Result<Option<f64>, CliError> {
    match state {
        State::Pure(p) if p.dims().len() == 2 => Ok(Some(value - renyi_quantum(&p.reduced(&[0])?, a))),
        _ => Ok(None),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_parsing() {
        assert_eq!(parse_grid("0.5:0.5:0.1").unwrap(), vec![0.5]);
        let g = parse_grid("0.1:0.9:0.1").unwrap();
        assert_eq!(g.len(), 9);
        assert_eq!(g[2], 0.3);
        assert_eq!(g[8], 0.9);
        for bad in ["0:1:0.1", "0.2:0.1:0.1", "0.1:0.5", "0.1:0.5:0", "a:b:c", "0.5:1:0.1"] {
            assert!(matches!(parse_grid(bad), Err(CliError::Validation(_))), "{bad}");
        }
    }
}
