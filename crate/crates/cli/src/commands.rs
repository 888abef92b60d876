use std::io::Write;

use serde_json::json;
use vnc::systems::disk_reference::diff_against_printed;
use vnc::{
    christoffel_of, compare_trajectories, simulate as integrate_formulation, ConnectionKind, Formulation, Trajectory,
};

use crate::args::{ChristoffelArgs, CompareArgs, Format, KindArg, SimulateArgs};
use crate::exit::Failure;
use crate::run::{control_settings, Context};

/// Coefficients smaller than this are not listed.
const ZERO_TOL: f64 = 1e-14;

fn formulation(name: &str) -> Result<Formulation, Failure> {
    name.trim().parse::<Formulation>().map_err(|e| Failure::config(e.to_string()))
}

fn fmt_vec(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.9e}")).collect();
    format!("[{}]", parts.join(", "))
}

fn summary(ctx: &Context, traj: &Trajectory) -> String {
    let last = traj.final_state();
    let f = traj.formulation.map(|f| f.name()).unwrap_or("-");
    format!(
        "system: {}\nformulation: {f}\nsamples: {}\nfinal t: {:.6}\nfinal q: {}\nfinal qdot: {}\nmax_drift: {:.3e}\nmax |u|: {:.3e}\nenergy_span: {:.3e}\n",
        ctx.system.name,
        traj.len(),
        last.t,
        fmt_vec(last.q.as_slice()),
        fmt_vec(last.qdot.as_slice()),
        traj.max_drift(),
        traj.max_control(),
        traj.energy_span(),
    )
}

pub fn simulate(ctx: &Context, args: &SimulateArgs) -> Result<(), Failure> {
    let form = formulation(&args.formulation)?;
    let settings = ctx.integrator(&args.run)?;
    let initial = ctx.initial_state(&args.run)?;
    let traj = integrate_formulation(&ctx.system, form, &initial, &settings, &control_settings(&args.run))?;
    let mut out = ctx.output()?;
    match ctx.format().unwrap_or(Format::Csv) {
        Format::Csv => traj.write_csv(&mut out)?,
        Format::Json => traj.write_json(&mut out)?,
    }
    out.flush()?;
    let text = summary(ctx, &traj);
    if ctx.writes_to_file() {
        print!("{text}");
    } else {
        eprint!("{text}");
    }
    Ok(())
}

fn connection_kind(kind: KindArg) -> ConnectionKind {
    match kind {
        KindArg::Constrained => ConnectionKind::Constrained,
        KindArg::Levicivita => ConnectionKind::LeviCivita,
        KindArg::Nonholonomic => ConnectionKind::Nonholonomic,
    }
}

pub fn christoffel(ctx: &Context, args: &ChristoffelArgs) -> Result<(), Failure> {
    let n = ctx.system.dim();
    let point = args.point.clone().unwrap_or_else(|| vec![0.0; n]);
    if point.len() != n {
        return Err(Failure::config(format!("--point has {} entries, the system has {n} coordinates", point.len())));
    }
    let kind = connection_kind(args.kind);
    let gamma = christoffel_of(&ctx.system, &point, kind)?;
    let names = ctx.system.chart.coordinates();
    let entries: Vec<_> = gamma
        .entries()
        .filter(|(_, _, _, v)| v.abs() > ZERO_TOL)
        .map(|(k, i, j, v)| {
            json!({
                "upper": names[k],
                "lower": [names[i], names[j]],
                "indices": [k, i, j],
                "value": v,
            })
        })
        .collect();
    let mut doc = json!({
        "system": ctx.system.name,
        "kind": kind.name(),
        "convention": "nabla_{d_i} d_j = Gamma^k_ij d_k",
        "point": point,
        "parameters": ctx.system.chart.parameters(),
        "entries": entries,
    });
    if args.diff_reference {
        let report = diff_against_printed(&ctx.system, &point)?;
        doc["reference_diff"] = serde_json::to_value(report).expect("diff report serializes");
    }
    let mut out = ctx.output()?;
    serde_json::to_writer_pretty(&mut out, &doc).map_err(|e| Failure::config(e.to_string()))?;
    writeln!(out)?;
    out.flush()?;
    Ok(())
}

pub fn compare(ctx: &Context, args: &CompareArgs) -> Result<(), Failure> {
    let [a, b] = args.formulations.as_slice() else {
        return Err(Failure::config(format!(
            "--formulations needs exactly two names, got {}",
            args.formulations.len()
        )));
    };
    let (fa, fb) = (formulation(a)?, formulation(b)?);
    let settings = ctx.integrator(&args.run)?;
    let initial = ctx.initial_state(&args.run)?;
    let control = control_settings(&args.run);
    let ta = integrate_formulation(&ctx.system, fa, &initial, &settings, &control)?;
    let tb = integrate_formulation(&ctx.system, fb, &initial, &settings, &control)?;
    let d = compare_trajectories(&ta, &tb)?;
    let passed = args.tol.is_none_or(|tol| d.max <= tol);
    let mut out = ctx.output()?;
    if ctx.format() == Some(Format::Json) {
        let doc = json!({
            "system": ctx.system.name,
            "formulations": [fa.name(), fb.name()],
            "horizon": settings.horizon,
            "grid_points": d.series.len(),
            "max": d.max,
            "q_distance": d.q_distance,
            "qdot_distance": d.qdot_distance,
            "max_drift": [ta.max_drift(), tb.max_drift()],
            "tol": args.tol,
            "passed": passed,
        });
        serde_json::to_writer_pretty(&mut out, &doc).map_err(|e| Failure::config(e.to_string()))?;
        writeln!(out)?;
    } else {
        writeln!(out, "system: {}", ctx.system.name)?;
        writeln!(out, "formulations: {} vs {}", fa, fb)?;
        writeln!(out, "grid points: {}", d.series.len())?;
        writeln!(out, "sup |dq|: {:.3e}", d.q_distance)?;
        writeln!(out, "sup |dqdot|: {:.3e}", d.qdot_distance)?;
        writeln!(out, "distance: {:.3e}", d.max)?;
        if let Some(tol) = args.tol {
            writeln!(out, "{} (tol {tol:.1e})", if passed { "PASS" } else { "FAIL" })?;
        }
    }
    out.flush()?;
    if passed {
        Ok(())
    } else {
        Err(Failure::check(format!("distance {:.3e} exceeds {:.1e}", d.max, args.tol.unwrap_or_default())))
    }
}
