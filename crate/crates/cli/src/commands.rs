//! Subcommand implementations.

use std::io::Write;
use std::path::Path;

use serde_json::{json, Map, Value};
use tcentre_core::fitkit::{
    fit_gamma_sd, fit_gfactor_calibration, fit_linewidth_spectrum, orientation_bound_sweep,
    subsets_for_direction, subsets_from, CalibrationOptions, FitResult, OrientationGrid,
    SpectrumFitOptions, SweepFitOptions, SweepMode, WeightMode,
};
use tcentre_core::io;
use tcentre_core::lineshape::{BranchWeights, HoleSubset, HyperpolModel, LineshapeSpec};
use tcentre_core::pipeline::{add_map_noise, indistinguishability, map_linewidths, simulate_map, simulate_sweep};
use tcentre_core::spinham::{
    compute_hole_g, enumerate_orientations, propagate_alignment_uncertainty, FieldSpec, HoleGFactors,
};
use tcentre_core::{Error, LsqOptions, Result};

use crate::config::RunConfig;
use crate::{Command, HoleArgs, Mode, ModelArgs, SweepFitArgs, Weighting};

/// Whether every fit in the command converged.
pub struct Status {
    pub converged: bool,
}

const OK: Status = Status { converged: true };

pub fn execute(cfg: &RunConfig, command: &Command, out: &mut dyn Write) -> Result<Status> {
    match command {
        Command::Gfactors { dir, alignment_error_deg, samples, seed, output } => {
            let model = cfg.hole_model();
            let set = enumerate_orientations(&model.strain)?;
            let field = FieldSpec::new(cfg.fit.gfactor_field_gauss, (*dir).into())?;
            let g = match alignment_error_deg {
                Some(e) => propagate_alignment_uncertainty(&model, &set, &field, *e, *e, *samples, *seed)?,
                None => compute_hole_g(&model, &set, &field)?,
            };
            emit_csv(cfg, output.as_deref(), out, |w| {
                let mut text = String::from("g_h,multiplicity,sigma\n");
                for e in g.entries() {
                    text.push_str(&format!("{},{},{}\n", e.g_h, e.multiplicity, e.sigma));
                }
                w.write_all(text.as_bytes())?;
                Ok(())
            })?;
            Ok(OK)
        }
        Command::CalibrateG { input, nominal, output } => {
            let measured = io::read_g_table_csv(input)?;
            let opts = CalibrationOptions {
                nominal: *nominal,
                lsq: lsq(cfg),
                ..CalibrationOptions::default()
            };
            let fit = fit_gfactor_calibration(&measured, &cfg.strain, &opts)?;
            let mut doc = fit_json(&fit.fit);
            doc.insert("raw_azimuth_deg".into(), json!(fit.raw_azimuth_deg));
            doc.insert("model_g_h".into(), json!(fit.model_g));
            emit_json(cfg, output.as_deref(), out, doc)?;
            Ok(Status { converged: fit.fit.converged })
        }
        Command::SimulateSweep { model, b_max, n_points, noise, seed, output } => {
            let m = hyperpol_model(cfg, model)?;
            let data = simulate_sweep(&m, &grid(0.0, *b_max, *n_points)?, *noise, *seed)?;
            emit_csv(cfg, output.as_deref(), out, |w| io::write_sweep(w, &data))?;
            Ok(OK)
        }
        Command::SimulateMap { model, b_max, n_b, delta_max, n_delta, noise, seed, output } => {
            let m = hyperpol_model(cfg, model)?;
            let d = delta_max * model.unit.to_mhz();
            let mut map = simulate_map(&m, &grid(0.0, *b_max, *n_b)?, &grid(-d, d, *n_delta)?)?;
            add_map_noise(&mut map, *noise, *seed)?;
            emit_csv(cfg, output.as_deref(), out, |w| io::write_map(w, &map))?;
            Ok(OK)
        }
        Command::FitSpectrum { input, shape, residual_b_gauss, holes, unit, output } => {
            let mut spec = io::read_spectrum_csv(input)?;
            spec.delta_mhz.iter_mut().for_each(|d| *d *= unit.to_mhz());
            let opts = SpectrumFitOptions {
                kind: (*shape).into(),
                residual_b_gauss: *residual_b_gauss,
                g_e: cfg.constants.g_e,
                lsq: lsq(cfg),
            };
            let fit = fit_linewidth_spectrum(&spec, &hole_subsets(cfg, holes)?, &opts)?;
            let converged = fit.converged;
            emit_json(cfg, output.as_deref(), out, fit_json(&fit))?;
            Ok(Status { converged })
        }
        Command::FitSweep { input, fit, holes, output } => {
            let sweep = io::read_sweep_csv(input)?;
            let r = fit_gamma_sd(&sweep, &hole_subsets(cfg, holes)?, &sweep_options(cfg, fit)?)?;
            let mut doc = fit_json(&r.fit);
            doc.insert("gamma_at_bound".into(), json!(r.gamma_at_bound));
            doc.insert("weak_decay".into(), json!(r.weak_decay));
            doc.insert("subset_g_h".into(), json!(r.subset.map(|s| s.g_h)));
            emit_json(cfg, output.as_deref(), out, doc)?;
            Ok(Status { converged: r.fit.converged })
        }
        Command::OrientationBound { input, fit, grid, map_output, output } => {
            let sweep = io::read_sweep_csv(input)?;
            let model = cfg.hole_model();
            let set = enumerate_orientations(&model.strain)?;
            let field = cfg.fit.gfactor_field_gauss;
            let map = orientation_bound_sweep(
                &sweep,
                |t, p| subsets_for_direction(&model, &set, t, p, field),
                &OrientationGrid::octant(grid.0, grid.1)?,
                &sweep_options(cfg, fit)?,
                cfg.fit.mask_chi2_reduced,
            )?;
            if let Some(p) = map_output {
                io::write_file(cfg.output_path(p), |f| io::write_orientation_map(f, &map))?;
            }
            let (theta, phi, gamma) = map.max_point;
            let n_converged = map.converged.iter().flatten().filter(|c| **c).count();
            let doc = json!({
                "max_point": {"theta_rad": theta, "phi_rad": phi, "gamma_sd_mhz": gamma},
                "n_converged": n_converged,
                "n_cells": grid.0 * grid.1,
            });
            emit_json(cfg, output.as_deref(), out, doc.as_object().unwrap().clone())?;
            Ok(OK)
        }
        Command::MapLinewidths { input, unit, output } => {
            let mut map = io::read_map_csv(input)?;
            map.delta_mhz.iter_mut().for_each(|d| *d *= unit.to_mhz());
            let table = map_linewidths(&map, &lsq(cfg))?;
            emit_csv(cfg, output.as_deref(), out, |w| io::write_linewidths(w, &table))?;
            Ok(Status { converged: table.flagged_b_gauss.is_empty() })
        }
        Command::Indist { gamma_sd, unit, output } => {
            let c = cfg.constants;
            let i = indistinguishability(gamma_sd * unit.to_mhz(), c.xi, c.gamma1_mhz)?;
            let doc = json!({"xi": i.xi, "gamma1_mhz": i.gamma1_mhz, "gamma_sd_mhz": i.gamma_sd_mhz, "value": i.value});
            emit_json(cfg, output.as_deref(), out, doc.as_object().unwrap().clone())?;
            Ok(OK)
        }
        Command::Config { output } => {
            emit_csv(cfg, output.as_deref(), out, |w| {
                w.write_all((cfg.to_json() + "\n").as_bytes())?;
                Ok(())
            })?;
            Ok(OK)
        }
    }
}

fn lsq(cfg: &RunConfig) -> LsqOptions {
    LsqOptions { max_iter: cfg.fit.max_iter, ..LsqOptions::default() }
}

fn grid(lo: f64, hi: f64, n: usize) -> Result<Vec<f64>> {
    if n < 2 || !(hi > lo) {
        return Err(Error::Validation(format!("need at least 2 points over a non-empty range, got {n} over [{lo}, {hi}]")));
    }
    Ok((0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect())
}

fn hole_subsets(cfg: &RunConfig, args: &HoleArgs) -> Result<Vec<HoleSubset>> {
    let g = match args.g_h {
        Some(g) => HoleGFactors::uniform(g)?,
        None => {
            let model = cfg.hole_model();
            let set = enumerate_orientations(&model.strain)?;
            compute_hole_g(&model, &set, &FieldSpec::new(cfg.fit.gfactor_field_gauss, args.dir.into())?)?
        }
    };
    Ok(subsets_from(&g))
}

fn hyperpol_model(cfg: &RunConfig, args: &ModelArgs) -> Result<HyperpolModel> {
    let f = args.unit.to_mhz();
    let inhom = args.lambda.map(|l| LineshapeSpec::new(args.shape.into(), l * f)).transpose()?;
    let m = HyperpolModel::new(args.gamma * f, cfg.constants.g_e, hole_subsets(cfg, &args.holes)?)?
        .with_branch_ratio(args.branch_ratio)
        .with_inhom(inhom);
    m.validate()?;
    Ok(m)
}

fn sweep_options(cfg: &RunConfig, args: &SweepFitArgs) -> Result<SweepFitOptions> {
    let mode = match args.mode {
        Mode::Homogeneous => SweepMode::Homogeneous,
        Mode::Convolved => {
            let l = args
                .lambda
                .ok_or_else(|| Error::Validation("convolved mode needs --lambda".into()))?;
            SweepMode::Convolved(LineshapeSpec::new(args.shape.into(), l * args.unit.to_mhz())?)
        }
    };
    Ok(SweepFitOptions {
        g_e: cfg.constants.g_e,
        mode,
        weight_mode: match args.weight_mode {
            Weighting::Equal => WeightMode::Equal,
            Weighting::SingleMin => WeightMode::SingleMin,
            Weighting::SingleMax => WeightMode::SingleMax,
        },
        branches: BranchWeights::Ratio(args.branch_ratio),
        free_offset: args.free_offset,
        free_scale: true,
        gamma_bounds: cfg.fit.gamma_bounds_mhz,
        lsq: lsq(cfg),
    })
}

/// `params`, `sigmas`, `chi2_reduced`, `converged` plus diagnostics.
pub fn fit_json(fit: &FitResult) -> Map<String, Value> {
    let named = |v: &[f64]| -> Map<String, Value> { fit.names.iter().cloned().zip(v.iter().map(|x| json!(x))).collect() };
    let mut doc = Map::new();
    doc.insert("params".into(), Value::Object(named(&fit.params)));
    doc.insert("sigmas".into(), Value::Object(named(&fit.sigmas)));
    doc.insert("chi2_reduced".into(), json!(fit.chi2_reduced));
    doc.insert("converged".into(), json!(fit.converged));
    doc.insert("singular".into(), json!(fit.singular));
    doc.insert("n_iter".into(), json!(fit.n_iter));
    let at_bound: Vec<&String> = fit.names.iter().zip(&fit.at_bound).filter(|(_, b)| **b).map(|(n, _)| n).collect();
    doc.insert("at_bound".into(), json!(at_bound));
    doc
}

fn emit_json(cfg: &RunConfig, path: Option<&Path>, out: &mut dyn Write, doc: Map<String, Value>) -> Result<()> {
    let text = serde_json::to_string_pretty(&Value::Object(doc)).expect("json serializes") + "\n";
    emit_csv(cfg, path, out, |w| {
        w.write_all(text.as_bytes())?;
        Ok(())
    })
}

/// Writes through `f` to the resolved output file, or to `out`.
fn emit_csv(
    cfg: &RunConfig,
    path: Option<&Path>,
    out: &mut dyn Write,
    f: impl FnOnce(&mut dyn Write) -> Result<()>,
) -> Result<()> {
    match path {
        Some(p) => {
            let mut file = std::fs::File::create(cfg.output_path(p))?;
            f(&mut file)
        }
        None => f(out),
    }
}
