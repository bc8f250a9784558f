//! Subcommand implementations. Model-producing commands emit canonical
//! JSON; trajectory, sweep, and wire commands emit CSV. All output goes to
//! `--out` when given, stdout otherwise.

use std::fs;

use slh_core::dynamics::{integrate_master, DensityMatrix};
use slh_core::fermi::validate_fermi;
use slh_core::network::{promote_pair, reduce_network, series};
use slh_core::slh::{ito_to_stratonovich, stratonovich_to_ito};
use slh_core::wire::{omega_grid, propagate_wavepacket, transfer_function, WireState};
use slh_core::SLHTriple;

use crate::csvout::{format_number, Csv};
use crate::error::{CliError, CliResult};
use crate::flags::Flags;
use crate::model::{
    parse_model_file, parse_observables, render_json, slh_to_json, stratonovich_to_json, ModelFile,
    ModelKind,
};

const DEFAULT_TOL: f64 = 1e-10;

fn tol_flag(flags: &mut Flags) -> CliResult<f64> {
    let tol = flags.take_f64("tol")?.unwrap_or(DEFAULT_TOL);
    if !tol.is_finite() || tol <= 0.0 {
        return Err(CliError::usage(format!(
            "--tol must be positive, got {tol}"
        )));
    }
    Ok(tol)
}

fn write_output(flags: &mut Flags, content: &str) -> CliResult<()> {
    match flags.take("out") {
        Some(path) => {
            fs::write(&path, content).map_err(|e| CliError::io(format!("cannot write {path}: {e}")))
        }
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

/// Extracts the Itō triple from an slh, stratonovich (converted), or fermi
/// model.
fn triple_of(model: &ModelFile) -> CliResult<SLHTriple> {
    match &model.kind {
        ModelKind::Slh(triple) => Ok(triple.clone()),
        ModelKind::Stratonovich(coeffs) => Ok(stratonovich_to_ito(coeffs)?),
        ModelKind::Fermi(fermi) => Ok(fermi.triple.clone()),
        other => Err(CliError::usage(format!(
            "this command needs an slh, stratonovich, or fermi model, got {}",
            other.name()
        ))),
    }
}

pub fn cmd_validate(mut flags: Flags) -> CliResult<()> {
    let path = flags.positional("model file")?;
    let tol = tol_flag(&mut flags)?;
    flags.finish()?;
    let model = parse_model_file(&path, tol)?;
    let summary = match &model.kind {
        ModelKind::Slh(t) => format!("slh model, n={}, dim={}", t.channels(), t.dim()),
        ModelKind::Stratonovich(c) => {
            format!("stratonovich model, n={}, dim={}", c.channels(), c.dim())
        }
        ModelKind::Fermi(f) => format!(
            "fermi model, n={}, dim={}",
            f.triple.channels(),
            f.triple.dim()
        ),
        ModelKind::Network(n) => format!(
            "network model, {} components, {} internal edges, {} external channels",
            n.components().len(),
            n.edges().len(),
            n.external_inputs().len()
        ),
        ModelKind::LinearPassive(lp) => format!(
            "linear_passive model, n={}, modes={}",
            lp.channels(),
            lp.modes()
        ),
    };
    println!("OK: {summary}");
    Ok(())
}

pub fn cmd_ito(mut flags: Flags) -> CliResult<()> {
    let path = flags.positional("stratonovich model file")?;
    let tol = tol_flag(&mut flags)?;
    let model = parse_model_file(&path, tol)?;
    let coeffs = match model.kind {
        ModelKind::Stratonovich(c) => c,
        other => {
            return Err(CliError::usage(format!(
                "ito needs a stratonovich model, got {}",
                other.name()
            )))
        }
    };
    let triple = stratonovich_to_ito(&coeffs)?;
    let out = render_json(&slh_to_json(&triple));
    write_output(&mut flags, &out)?;
    flags.finish()
}

pub fn cmd_stratonovich(mut flags: Flags) -> CliResult<()> {
    let path = flags.positional("slh model file")?;
    let tol = tol_flag(&mut flags)?;
    let model = parse_model_file(&path, tol)?;
    let triple = match model.kind {
        ModelKind::Slh(t) => t,
        other => {
            return Err(CliError::usage(format!(
                "stratonovich needs an slh model, got {}",
                other.name()
            )))
        }
    };
    let coeffs = ito_to_stratonovich(&triple)?;
    let out = render_json(&stratonovich_to_json(&coeffs));
    write_output(&mut flags, &out)?;
    flags.finish()
}

fn two_triples(flags: &mut Flags, tol: f64) -> CliResult<(SLHTriple, SLHTriple)> {
    let first = flags.positional("first (upstream) model file")?;
    let second = flags.positional("second (downstream) model file")?;
    let g1 = triple_of(&parse_model_file(&first, tol)?)?;
    let g2 = triple_of(&parse_model_file(&second, tol)?)?;
    Ok((g1, g2))
}

pub fn cmd_series(mut flags: Flags) -> CliResult<()> {
    let tol = tol_flag(&mut flags)?;
    let (g1, g2) = two_triples(&mut flags, tol)?;
    if g1.channels() != g2.channels() {
        return Err(CliError::from(slh_core::Error::ChannelMismatch {
            left: g2.channels(),
            right: g1.channels(),
        }));
    }
    // components declared in separate files live on distinct spaces
    let (p1, p2) = promote_pair(&g1, &g2)?;
    let composite = series(&p2, &p1)?;
    let out = render_json(&slh_to_json(&composite));
    write_output(&mut flags, &out)?;
    flags.finish()
}

pub fn cmd_concat(mut flags: Flags) -> CliResult<()> {
    let tol = tol_flag(&mut flags)?;
    let (g1, g2) = two_triples(&mut flags, tol)?;
    let composite = slh_core::network::concatenate(&g1, &g2)?;
    let out = render_json(&slh_to_json(&composite));
    write_output(&mut flags, &out)?;
    flags.finish()
}

pub fn cmd_reduce(mut flags: Flags) -> CliResult<()> {
    let path = flags.positional("network model file")?;
    let tol = tol_flag(&mut flags)?;
    let model = parse_model_file(&path, tol)?;
    let spec = match model.kind {
        ModelKind::Network(spec) => spec,
        other => {
            return Err(CliError::usage(format!(
                "reduce needs a network model, got {}",
                other.name()
            )))
        }
    };
    let (triple, trace) = reduce_network(&spec)?;
    for step in &trace.steps {
        eprintln!(
            "eliminated {} (condition {:.3e}), {} channels remain",
            step.edge, step.condition, step.channels_after
        );
    }
    let out = render_json(&slh_to_json(&triple));
    write_output(&mut flags, &out)?;
    flags.finish()
}

pub fn cmd_evolve(mut flags: Flags) -> CliResult<()> {
    let path = flags.positional("model file")?;
    let tol = tol_flag(&mut flags)?;
    let t_end = flags.require_f64("t-end")?;
    let dt = flags.require_f64("dt")?;
    let observables = match flags.take("observables") {
        Some(obs_path) => parse_observables(&obs_path)?,
        None => Vec::new(),
    };

    let model = parse_model_file(&path, tol)?;
    let triple = triple_of(&model)?;
    let rho0_op = model.rho0.ok_or_else(|| {
        CliError::usage("evolve needs a \"rho0\" matrix in the model file".to_string())
    })?;
    let rho0 = DensityMatrix::new(rho0_op, tol)?;

    let mut trajectory = integrate_master(&triple, &rho0, t_end, dt)?;
    for (name, op) in &observables {
        trajectory.record_observable(name.clone(), op)?;
    }

    let mut header = vec!["t".to_string()];
    for (name, _) in trajectory.observables() {
        header.push(format!("{name}_re"));
        header.push(format!("{name}_im"));
    }
    let mut csv = Csv::new(&header);
    for (k, t) in trajectory.times().iter().enumerate() {
        let mut row = vec![*t];
        for (_, series) in trajectory.observables() {
            row.push(series[k].re);
            row.push(series[k].im);
        }
        csv.row(&row);
    }
    write_output(&mut flags, &csv.finish())?;
    flags.finish()
}

pub fn cmd_sweep(mut flags: Flags) -> CliResult<()> {
    let path = flags.positional("linear_passive model file")?;
    let tol = tol_flag(&mut flags)?;
    let omega_min = flags.require_f64("omega-min")?;
    let omega_max = flags.require_f64("omega-max")?;
    let steps = flags
        .take_usize("omega-steps")?
        .ok_or_else(|| CliError::usage("--omega-steps is required".to_string()))?;
    if steps == 0 {
        return Err(CliError::usage(
            "--omega-steps must be at least 1".to_string(),
        ));
    }

    let model = parse_model_file(&path, tol)?;
    let component = match model.kind {
        ModelKind::LinearPassive(lp) => lp,
        other => {
            return Err(CliError::usage(format!(
                "sweep needs a linear_passive model, got {}",
                other.name()
            )))
        }
    };

    let n = component.channels();
    let mut header = vec!["omega".to_string()];
    for i in 0..n {
        for j in 0..n {
            header.push(format!("Xi_{i}_{j}_re"));
            header.push(format!("Xi_{i}_{j}_im"));
        }
    }
    let mut csv = Csv::new(&header);
    for omega in omega_grid(omega_min, omega_max, steps) {
        let point = transfer_function(&component, omega)?;
        let mut row = Vec::with_capacity(1 + 2 * n * n);
        row.push(omega);
        for i in 0..n {
            for j in 0..n {
                let z = point.matrix.get(i, j);
                row.push(z.re);
                row.push(z.im);
            }
        }
        csv.row(&row);
    }
    write_output(&mut flags, &csv.finish())?;
    flags.finish()
}

pub fn cmd_wire(mut flags: Flags) -> CliResult<()> {
    let epsilon = flags.require_f64("epsilon")?;
    let half_width = flags.require_f64("grid-half-width")?;
    let spacing = flags.require_f64("grid-spacing")?;
    let center = flags.require_f64("packet-center")?;
    let width = flags.require_f64("packet-width")?;
    let times = flags.require_f64_list("times")?;

    let initial = WireState::gaussian(half_width, spacing, center, width, epsilon)?;
    let mut snapshots = Vec::with_capacity(times.len());
    for &t in &times {
        snapshots.push(propagate_wavepacket(&initial, t)?);
    }

    let mut header = vec!["x".to_string()];
    for &t in &times {
        header.push(format!("abs_psi_t{}", format_number(t)));
    }
    let mut csv = Csv::new(&header);
    for k in 0..initial.len() {
        let mut row = Vec::with_capacity(1 + snapshots.len());
        row.push(initial.position(k));
        for snap in &snapshots {
            row.push(snap.amplitudes()[k].norm());
        }
        csv.row(&row);
    }
    write_output(&mut flags, &csv.finish())?;
    flags.finish()
}

pub fn cmd_parity(mut flags: Flags) -> CliResult<()> {
    let path = flags.positional("fermi model file")?;
    let tol = tol_flag(&mut flags)?;
    flags.finish()?;
    let model = parse_model_file(&path, tol)?;
    let fermi = match model.kind {
        ModelKind::Fermi(f) => f,
        other => {
            return Err(CliError::usage(format!(
                "parity needs a fermi model, got {}",
                other.name()
            )))
        }
    };
    let diagnostics = validate_fermi(&fermi, tol);
    println!("coefficient,required,observed,even_deviation,odd_deviation,status");
    for check in &diagnostics.checks {
        println!(
            "{},{},{},{},{},{}",
            check.label,
            check.required,
            check.observed,
            format_number(check.even_deviation),
            format_number(check.odd_deviation),
            if check.passed { "ok" } else { "violation" }
        );
    }
    if let Some(fail) = diagnostics.first_failure() {
        return Err(CliError::invariant(format!(
            "parity table violated at {}: required {}, observed {}",
            fail.label, fail.required, fail.observed
        )));
    }
    Ok(())
}
