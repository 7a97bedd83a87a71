//! The four jobs. Each turns a validated config into a [`Report`].

use log::warn;
use pr3bp_core::{
    analytic_epsilons, analytic_triangular_point, integrate, jacobi_audit, jacobi_constant,
    jacobi_drift_rate, limiting_case_point, locate_triangular_point, photogravitational_base,
    zero_velocity_curve, Branch, EquilibriumPoint, Error, LimitingCase, PhaseState, SystemParams,
};
use rayon::prelude::*;
use serde_json::json;

use crate::config::{EquilibriaJob, IntegrateJob, Job, JobConfig, SweepJob, SweepVariable, ZvcJob};
use crate::error::Result;
use crate::output::{Cell, Report, Table};

pub fn run(cfg: &JobConfig) -> Result<Report> {
    let params = cfg.system.build()?;
    match &cfg.job {
        Job::Equilibria(j) => equilibria(&params, j),
        Job::Integrate(j) => trajectory(&params, j),
        Job::Zvc(j) => zvc(&params, j),
        Job::Sweep(j) => sweep(&params, j),
    }
}

fn system_meta(p: &SystemParams) -> serde_json::Value {
    json!({
        "mu": p.mu(),
        "q1": p.q1(),
        "a2": p.a2(),
        "cd": p.cd(),
        "w1": p.w1(),
        "n": p.n(),
        "collision_guard": p.collision_guard(),
    })
}

fn point_row(pt: &EquilibriumPoint) -> Vec<Cell> {
    vec![
        pt.label.to_string().into(),
        pt.method.to_string().into(),
        pt.x.into(),
        pt.y.into(),
        pt.residual_norm.into(),
    ]
}

/// Base, analytic, refined and applicable limiting-case points for both
/// branches. Fails only if refinement fails.
pub fn equilibria(p: &SystemParams, job: &EquilibriaJob) -> Result<Report> {
    let mut table = Table::new(&["branch", "method", "x", "y", "residual_norm"]);
    let mut warnings = Vec::new();
    for branch in Branch::BOTH {
        table.push(point_row(&photogravitational_base(p, branch)?));
        if !analytic_epsilons(p, branch).in_validity_regime() {
            warnings.push(format!("{branch}: first-order perturbations exceed 0.1"));
        }
        match analytic_triangular_point(p, branch) {
            Ok(pt) => table.push(point_row(&pt)),
            Err(Error::DegenerateFormula(msg)) => {
                warn!("{branch}: analytic formula not usable: {msg}");
                warnings.push(format!("{branch}: analytic formula degenerate"));
            }
            Err(e) => return Err(e.into()),
        }
        table.push(point_row(&locate_triangular_point(
            p,
            branch,
            job.tol,
            job.max_iter,
        )?));
        for case in LimitingCase::ALL {
            if case.applies_to(p) {
                table.push(point_row(&limiting_case_point(p, case, branch)?));
            }
        }
    }
    Ok(Report {
        table,
        meta: Some(json!({ "system": system_meta(p), "warnings": warnings })),
    })
}

/// Samples with `C` and `dC/dt`; the meta block carries the termination
/// reason and the Jacobi audit.
pub fn trajectory(p: &SystemParams, job: &IntegrateJob) -> Result<Report> {
    let i = job.initial;
    let s0 = PhaseState::new(i.x, i.y, i.vx, i.vy, i.t);
    let traj = integrate(p, &s0, job.t_end, &job.integrator())?;
    let audit = match jacobi_audit(&traj) {
        Ok(a) => Some(a),
        Err(e) => {
            warn!("jacobi audit skipped: {e}");
            None
        }
    };
    let mut table = Table::new(&["t", "x", "y", "vx", "vy", "C", "dCdt"]);
    for s in &traj.samples {
        let st = s.state;
        let rate = jacobi_drift_rate(p, &st).unwrap_or(f64::NAN);
        table.push(vec![
            st.t.into(),
            st.x.into(),
            st.y.into(),
            st.vx.into(),
            st.vy.into(),
            s.jacobi.into(),
            rate.into(),
        ]);
    }
    let first = traj.samples.first().map(|s| s.jacobi);
    let last = traj.samples.last();
    let meta = json!({
        "termination": traj.termination,
        "samples": traj.len(),
        "t_final": last.map(|s| s.state.t),
        "c_initial": first,
        "c_final": last.map(|s| s.jacobi),
        "jacobi_audit": audit,
        "system": system_meta(p),
    });
    Ok(Report {
        table,
        meta: Some(meta),
    })
}

/// Contour vertices of `2 U1 = C`, one row per vertex.
pub fn zvc(p: &SystemParams, job: &ZvcJob) -> Result<Report> {
    let level = match (job.level_c, job.level_at) {
        (Some(c), _) => c,
        (None, Some(b)) => {
            let pt = locate_triangular_point(
                p,
                b.into(),
                pr3bp_core::equilibria::DEFAULT_TOL,
                pr3bp_core::equilibria::DEFAULT_MAX_ITER,
            )?;
            jacobi_constant(p, &PhaseState::at_rest(pt.x, pt.y))? + job.level_offset
        }
        (None, None) => unreachable!("validated config has a level"),
    };
    let curve = zero_velocity_curve(p, level, job.window()?, job.resolution)?;
    if curve.is_empty() {
        warn!("no zero-velocity curve at C = {level} in the window");
    }
    let mut table = Table::new(&["segment_id", "vertex_index", "x", "y"]);
    for (sid, seg) in curve.segments.iter().enumerate() {
        for (vid, &(x, y)) in seg.iter().enumerate() {
            table.push(vec![sid.into(), vid.into(), x.into(), y.into()]);
        }
    }
    let meta = json!({
        "level_c": level,
        "segments": curve.segments.len(),
        "resolution": job.resolution,
        "window": job.window,
        "system": system_meta(p),
    });
    Ok(Report {
        table,
        meta: Some(meta),
    })
}

/// The system with one parameter replaced. Unless `w1` itself is swept, `cd`
/// is held fixed and `W1` follows from it; without drag `W1` stays 0.
fn vary(base: &SystemParams, var: SweepVariable, v: f64) -> pr3bp_core::Result<SystemParams> {
    if var == SweepVariable::W1 {
        return base.replace_w1(v);
    }
    let (mut mu, mut q1, mut a2) = (base.mu(), base.q1(), base.a2());
    match var {
        SweepVariable::Mu => mu = v,
        SweepVariable::Q1 => q1 = v,
        SweepVariable::A2 => a2 = v,
        SweepVariable::W1 => unreachable!(),
    }
    let p = match base.cd() {
        Some(cd) => SystemParams::new(mu, q1, a2, cd),
        None => SystemParams::with_w1(mu, q1, a2, base.w1()),
    }?;
    p.with_collision_guard(base.collision_guard())
}

struct SweepRow {
    analytic: Option<(f64, f64)>,
    refined: Option<(f64, f64)>,
    status: String,
}

fn sweep_point(base: &SystemParams, job: &SweepJob, v: f64) -> SweepRow {
    let branch: Branch = job.branch.into();
    let p = match vary(base, job.variable, v) {
        Ok(p) => p,
        Err(e) => {
            warn!("{} = {v}: {e}", job.variable.name());
            return SweepRow {
                analytic: None,
                refined: None,
                status: "invalid-params".into(),
            };
        }
    };
    let mut status = Vec::new();
    let analytic = match analytic_triangular_point(&p, branch) {
        Ok(pt) => {
            if !analytic_epsilons(&p, branch).in_validity_regime() {
                status.push("outside-first-order");
            }
            Some((pt.x, pt.y))
        }
        Err(e) => {
            warn!("{} = {v}: {e}", job.variable.name());
            status.push("analytic-degenerate");
            None
        }
    };
    let refined = match locate_triangular_point(&p, branch, job.tol, job.max_iter) {
        Ok(pt) => Some((pt.x, pt.y)),
        Err(e) => {
            warn!("{} = {v}: {e}", job.variable.name());
            status.push("refine-failed");
            None
        }
    };
    SweepRow {
        analytic,
        refined,
        status: if status.is_empty() {
            "ok".into()
        } else {
            status.join("+")
        },
    }
}

/// Analytic and refined points across a one-parameter grid, evaluated in
/// parallel. Rows stay in grid order; problems are reported per row.
pub fn sweep(p: &SystemParams, job: &SweepJob) -> Result<Report> {
    let values = job.values()?;
    let rows: Vec<SweepRow> = values.par_iter().map(|&v| sweep_point(p, job, v)).collect();
    let mut table = Table::new(&[
        "value",
        "x_analytic",
        "y_analytic",
        "x_refined",
        "y_refined",
        "err_norm",
        "status",
    ]);
    let mut warnings = 0;
    for (v, row) in values.iter().zip(&rows) {
        let (xa, ya) = row.analytic.unwrap_or((f64::NAN, f64::NAN));
        let (xr, yr) = row.refined.unwrap_or((f64::NAN, f64::NAN));
        if row.status != "ok" {
            warnings += 1;
        }
        table.push(vec![
            (*v).into(),
            xa.into(),
            ya.into(),
            xr.into(),
            yr.into(),
            (xa - xr).hypot(ya - yr).into(),
            row.status.clone().into(),
        ]);
    }
    let meta = json!({
        "variable": job.variable.name(),
        "branch": Branch::from(job.branch).to_string(),
        "points": values.len(),
        "warnings": warnings,
        "system": system_meta(p),
    });
    Ok(Report {
        table,
        meta: Some(meta),
    })
}
