//! Task execution. Everything is computed before any file is written.

use balred::benchmarks::random_stable;
use balred::metrics::{gramian_rel_error, hinf_rel_error, pq_rel_error, FreqGrid};
use balred::reducers::{bt_square_root, tcr, tor, tsia};
use balred::{alrs_lyap, atia_bt, atia_hsv_compare, AtiaConfig, Model, Reduced};

use crate::config::{Resolved, Task};
use crate::error::CliError;

/// One iteration of an adaptive solver: counters and the leading estimates.
#[derive(Clone, Debug, PartialEq)]
pub struct HistoryRow {
    pub k: usize,
    pub i: usize,
    pub r: usize,
    pub values: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CompareRow {
    pub tol: f64,
    pub r_selected: usize,
    pub atia_hinf_ratio: f64,
    pub bt_hinf_ratio: f64,
    pub converged: bool,
}

#[derive(Clone, Debug, Default)]
pub struct Artifacts {
    pub hsv: Vec<f64>,
    /// `(metric, value, r)`
    pub errors: Vec<(&'static str, f64, usize)>,
    pub history: Vec<HistoryRow>,
    pub compare: Option<Vec<CompareRow>>,
    pub converged: bool,
}

fn dense_ok(model: &Model, cfg: &Resolved) -> bool {
    model.n() <= cfg.dense_cap
}

/// An unstable reduced model has unbounded error; it is reported as `inf`.
fn unbounded_if_unstable(value: balred::Result<f64>) -> Result<f64, CliError> {
    match value {
        Err(balred::Error::NonHurwitz { .. }) => Ok(f64::INFINITY),
        other => Ok(other?),
    }
}

fn fixed_order_errors(model: &Model, red: &Reduced, out: &mut Artifacts) -> Result<(), CliError> {
    let grid = FreqGrid::for_model(model)?;
    let r = red.order();
    out.errors.push(("hinf_rel_error", unbounded_if_unstable(hinf_rel_error(model, &red.rom, &grid))?, r));
    out.errors.push(("pq_rel_error", unbounded_if_unstable(pq_rel_error(model, red))?, r));
    Ok(())
}

fn solve_lyap(model: &Model, cfg: &Resolved) -> Result<Artifacts, CliError> {
    let alrs = cfg.alrs.as_ref().expect("resolved for solve-lyap");
    let res = alrs_lyap(model.a(), model.b(), alrs)?;
    let r = res.factor.rank();
    let mut out = Artifacts { hsv: res.factor.singular_values(), converged: res.converged, ..Default::default() };
    out.errors.push(("lyapunov_residual", res.residual, r));
    if dense_ok(model, cfg) {
        let p = model.gramians_dense_capped(cfg.dense_cap)?.p;
        out.errors.push(("gramian_rel_error", gramian_rel_error(&p, &res.factor)?, r));
    }
    let (mut order, mut i) = (alrs.r0, 1);
    for (idx, values) in res.singular_history.iter().enumerate() {
        let k = idx + 1;
        out.history.push(HistoryRow { k, i, r: order, values: values.clone() });
        if res.stage_ends.contains(&k) {
            order += alrs.dr;
            i = 1;
        } else {
            i += 1;
        }
    }
    Ok(out)
}

fn atia(model: &Model, cfg: &Resolved) -> Result<Artifacts, CliError> {
    let res = atia_bt(model, cfg.atia.as_ref().expect("resolved for atia-bt"))?;
    let r = res.rom.order();
    let mut out =
        Artifacts { hsv: res.hankel_estimates.values.clone(), converged: res.converged, ..Default::default() };
    out.history = res.history.iter().map(|h| HistoryRow { k: h.k, i: h.i, r: h.r, values: h.sv.clone() }).collect();
    if dense_ok(model, cfg) {
        let grid = FreqGrid::for_model(model)?;
        out.errors.push(("hinf_rel_error", hinf_rel_error(model, &res.rom.rom, &grid)?, r));
        out.errors.push(("bt_hinf_rel_error", hinf_rel_error(model, &bt_square_root(model, r)?.rom, &grid)?, r));
        out.errors.push(("pq_rel_error", pq_rel_error(model, &res.rom)?, r));
        let worst = atia_hsv_compare(&res, model)?.iter().map(|row| row.rel_diff).fold(0.0, f64::max);
        out.errors.push(("hsv_max_rel_diff", worst, r));
    }
    Ok(out)
}

fn fixed_order(model: &Model, cfg: &Resolved) -> Result<Artifacts, CliError> {
    let r = cfg.r.expect("resolved for fixed-order tasks");
    let (red, converged) = match cfg.task {
        Task::DenseBt => (bt_square_root(model, r)?, true),
        Task::Tcr => (tcr(model, r)?, true),
        Task::Tor => (tor(model, r)?, true),
        Task::Tsia => {
            let init = random_stable(r, model.m(), model.p(), cfg.seed)?;
            let res = tsia(model, &init, cfg.tsia.expect("resolved for tsia"))?;
            (res.reduced, res.converged)
        }
        _ => unreachable!("not a fixed-order task"),
    };
    let hsv = match &red.retained_sv {
        Some(sv) => sv.values.clone(),
        None => match red.rom.hankel_singular_values() {
            Ok(sv) => sv.values,
            Err(balred::Error::NonHurwitz { .. }) => Vec::new(),
            Err(e) => return Err(e.into()),
        },
    };
    let mut out = Artifacts { hsv, converged, ..Default::default() };
    fixed_order_errors(model, &red, &mut out)?;
    Ok(out)
}

fn compare(model: &Model, cfg: &Resolved) -> Result<Artifacts, CliError> {
    let base = cfg.atia.clone().expect("resolved for compare");
    let grid = FreqGrid::for_model(model)?;
    let mut rows = Vec::new();
    for &tol in cfg.tols.as_ref().expect("resolved for compare") {
        let res = atia_bt(model, &AtiaConfig { tol, ..base.clone() })?;
        let r = res.rom.order();
        rows.push(CompareRow {
            tol,
            r_selected: r,
            atia_hinf_ratio: hinf_rel_error(model, &res.rom.rom, &grid)?,
            bt_hinf_ratio: hinf_rel_error(model, &bt_square_root(model, r)?.rom, &grid)?,
            converged: res.converged,
        });
    }
    let converged = rows.iter().all(|row| row.converged);
    Ok(Artifacts { compare: Some(rows), converged, ..Default::default() })
}

pub fn execute(cfg: &Resolved) -> Result<Artifacts, CliError> {
    let model: Model = cfg.model.build(cfg.seed)?;
    match cfg.task {
        Task::SolveLyap => solve_lyap(&model, cfg),
        Task::AtiaBt => atia(&model, cfg),
        Task::Compare => compare(&model, cfg),
        Task::DenseBt | Task::Tcr | Task::Tor | Task::Tsia => fixed_order(&model, cfg),
    }
}
