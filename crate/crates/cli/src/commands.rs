use std::f64::consts::PI;

use serde_json::{json, Value};
use vrpl_core::resource::{self, CapabilityBreakdown, RateEstimate};
use vrpl_core::trace::{self, AggregateReport, ErrorSample, ViewpointTrace};
use vrpl_core::{leakage, qoe, CapRadius, Exec, OverlapCase, QoeValue};

use crate::config::{Scenario, SfovSource, TraceSource};
use crate::error::CliError;
use crate::output::{plot_point, plot_table, round_json, Cell, Report, Table};

fn scenario_json(s: &Scenario) -> Value {
    json!({
        "r_fov": s.r_fov.value(),
        "epsilon": s.epsilon,
        "seed": s.seed,
        "windowing": s.windowing,
        "privacy": s.privacy,
    })
}

fn series(name: &str, v: f64) -> String {
    format!("{name}={}", crate::output::fmt_sig(v))
}

/// Evaluates the error-upload leakage over the `e × ε` grid.
pub fn sweep_error(s: &Scenario) -> Result<Report, CliError> {
    let cells: Vec<(f64, f64)> = s
        .eps_grid
        .iter()
        .flat_map(|&eps| s.e_grid.iter().map(move |&e| (eps, e)))
        .collect();
    let results = Exec::default().map(&cells, |&(eps, e)| leakage::leak_prob_from_error(e, eps));
    let mut table = Table::new(&["e", "eps", "pr_e", "zone_kind"]);
    let mut plot = plot_table();
    for (&(eps, e), r) in cells.iter().zip(results) {
        let r = r?;
        table.push(vec![
            e.into(),
            eps.into(),
            r.probability.into(),
            r.zone_kind.name().into(),
        ]);
        plot_point(
            &mut plot,
            "pr_e_vs_e",
            &series("eps", eps),
            "e",
            e,
            "pr_e",
            r.probability,
        );
    }
    Ok(Report {
        name: "sweep_error",
        json: round_json(json!({
            "command": "sweep-error",
            "scenario": scenario_json(s),
            "rows": table.json_rows(),
        })),
        table,
        plot: Some(plot),
        extra: Vec::new(),
        both_formats: false,
    })
}

/// Capability and rate details behind a resource-derived radius.
pub struct ResourceResolution {
    pub breakdown: CapabilityBreakdown,
    pub rate: Option<RateEstimate>,
}

pub fn resolve_resource(s: &Scenario) -> Result<ResourceResolution, CliError> {
    let Some(SfovSource::Resource(res)) = &s.sfov else {
        return Err(CliError::config("a [resource] block is required"));
    };
    let rate = match (&res.avg_data_rate, &res.channel) {
        (Some(_), _) => None,
        (None, Some(ch)) => Some(
            resource::mc_avg_rate(&ch.channel(), ch.mc_samples, s.seed)
                .map_err(|e| CliError::from(e).context("resource.channel"))?,
        ),
        (None, None) => unreachable!("checked during resolution"),
    };
    let data_rate = res.avg_data_rate.unwrap_or_else(|| rate.unwrap().mean);
    let breakdown = resource::capability_breakdown(&res.config(data_rate), &res.tile())
        .map_err(|e| CliError::from(e).context("resource"))?;
    Ok(ResourceResolution { breakdown, rate })
}

fn sfov_values(s: &Scenario) -> Result<Vec<f64>, CliError> {
    match &s.sfov {
        Some(SfovSource::Single(r)) => Ok(vec![*r]),
        Some(SfovSource::Grid(g)) => Ok(g.clone()),
        Some(SfovSource::Resource(_)) => Ok(vec![resolve_resource(s)?.breakdown.sfov_radius]),
        None => Err(CliError::config(
            "give exactly one of `resource`, `r_sv` or `r_sv_grid` (or --grid r_sv=...)",
        )),
    }
}

fn radius(r: f64) -> CapRadius {
    CapRadius::new(r).expect("validated during resolution")
}

pub fn sweep_qoe(s: &Scenario) -> Result<Report, CliError> {
    let cells: Vec<(f64, f64)> = sfov_values(s)?
        .into_iter()
        .flat_map(|rs| s.e_grid.iter().map(move |&e| (rs, e)))
        .collect();
    let results = Exec::default().map(&cells, |&(rs, e)| {
        qoe::qoe_with_case(s.r_fov, radius(rs), e)
    });
    let mut table = Table::new(&["r_sv", "e", "case", "qoe"]);
    let mut plot = plot_table();
    for (&(rs, e), r) in cells.iter().zip(results) {
        let (case, q) = r?;
        table.push(vec![
            rs.into(),
            e.into(),
            case.name().into(),
            q.value().into(),
        ]);
        plot_point(
            &mut plot,
            "qoe_vs_e",
            &series("r_sv", rs),
            "e",
            e,
            "qoe",
            q.value(),
        );
    }
    Ok(Report {
        name: "sweep_qoe",
        json: round_json(json!({
            "command": "sweep-qoe",
            "scenario": scenario_json(s),
            "rows": table.json_rows(),
        })),
        table,
        plot: Some(plot),
        extra: Vec::new(),
        both_formats: false,
    })
}

/// Forward QoE, then the adversary's inversion, on every `r_sv × e × ε` cell.
/// With a `q` grid the forward step is skipped and each observed QoE is
/// inverted directly, so a value no case can produce is an inconsistency.
pub fn sweep_leakage(s: &Scenario) -> Result<Report, CliError> {
    let rsv = sfov_values(s)?;
    let observed = s.q_grid.is_some();
    let inner: &[f64] = s.q_grid.as_deref().unwrap_or(&s.e_grid);
    let mut cells = Vec::new();
    for &eps in &s.eps_grid {
        for &rs in &rsv {
            for &x in inner {
                cells.push((eps, rs, x));
            }
        }
    }
    let results = Exec::default().map(&cells, |&(eps, rs, x)| {
        let (e, q) = if observed {
            (None, QoeValue::new(x)?)
        } else {
            (Some(x), qoe::qoe(s.r_fov, radius(rs), x)?)
        };
        let l = leakage::leak_prob_from_qoe(q, s.r_fov, radius(rs), eps)?;
        Ok::<_, vrpl_core::Error>((e, q, l))
    });
    let mut table = Table::new(&[
        "r_sv",
        "e",
        "eps",
        "qoe",
        "case",
        "pr_q",
        "zone_kind",
        "ambiguous",
    ]);
    let mut plot = plot_table();
    for (&(eps, rs, x), r) in cells.iter().zip(results) {
        let what = if observed { "q" } else { "e" };
        let (e, q, l) =
            r.map_err(|err| CliError::from(err).context(&format!("cell r_sv={rs}, {what}={x}")))?;
        table.push(vec![
            rs.into(),
            e.into(),
            eps.into(),
            q.value().into(),
            l.case.map_or(Cell::Empty, |c| c.name().into()),
            l.probability.into(),
            l.zone_kind.name().into(),
            l.ambiguous.into(),
        ]);
        let name = format!("{},{}", series("eps", eps), series("r_sv", rs));
        let (fig, x_name, xv) = match e {
            Some(e) => ("pr_q_vs_e", "e", e),
            None => ("pr_q_vs_q", "qoe", q.value()),
        };
        plot_point(&mut plot, fig, &name, x_name, xv, "pr_q", l.probability);
    }
    Ok(Report {
        name: "sweep_leakage",
        json: round_json(json!({
            "command": "sweep-leakage",
            "scenario": scenario_json(s),
            "observed_qoe": observed,
            "rows": table.json_rows(),
        })),
        table,
        plot: Some(plot),
        extra: Vec::new(),
        both_formats: false,
    })
}

pub fn load_or_generate(s: &Scenario) -> Result<Vec<ViewpointTrace>, CliError> {
    match &s.traces {
        Some(TraceSource::File(p)) => {
            trace::load_traces(p).map_err(|e| CliError::from(e).context("traces"))
        }
        Some(TraceSource::Synthetic {
            model,
            n_traces,
            duration,
        }) => trace::generate_synthetic_traces(
            *model,
            *n_traces,
            *duration,
            s.windowing.sample_rate,
            s.seed,
        )
        .map_err(|e| CliError::config(format!("traces.synthetic: {e}"))),
        None => Err(CliError::config(
            "a [traces] block with `path` or [traces.synthetic] is required",
        )),
    }
}

const CASES: [OverlapCase; 5] = [
    OverlapCase::FovInSfov,
    OverlapCase::SfovInFov,
    OverlapCase::Disjoint,
    OverlapCase::SfovComplementInFov,
    OverlapCase::Remaining,
];

pub const TRACE_COLUMNS: [&str; 16] = [
    "r_sv",
    "region",
    "avg_leakage",
    "mean_qoe",
    "ratio_fov_in_sfov",
    "ratio_sfov_in_fov",
    "ratio_disjoint",
    "ratio_sfov_complement_in_fov",
    "ratio_remaining",
    "ratio_degenerate",
    "leak_fov_in_sfov",
    "leak_sfov_in_fov",
    "leak_disjoint",
    "leak_sfov_complement_in_fov",
    "leak_remaining",
    "leak_degenerate",
];

fn trace_tables(rep: &AggregateReport) -> (Table, Table) {
    let mut table = Table::new(&TRACE_COLUMNS);
    let mut plot = plot_table();
    for p in &rep.points {
        let mut row: Vec<Cell> = vec![
            p.r_sv.into(),
            p.region.map_or(Cell::Empty, |g| g.name().into()),
            p.avg_leakage.into(),
            p.mean_qoe.into(),
        ];
        for c in CASES {
            row.push(p.ratios.get(c).into());
        }
        row.push(p.ratios.degenerate.into());
        for c in CASES {
            row.push(p.components.get(c).into());
        }
        row.push(p.components.degenerate.into());
        table.push(row);

        plot_point(
            &mut plot,
            "avg_leakage_vs_r_sv",
            "total",
            "r_sv",
            p.r_sv,
            "avg_leakage",
            p.avg_leakage,
        );
        for c in CASES {
            plot_point(
                &mut plot,
                "avg_leakage_vs_r_sv",
                c.name(),
                "r_sv",
                p.r_sv,
                "avg_leakage",
                p.components.get(c),
            );
            plot_point(
                &mut plot,
                "case_ratio_vs_r_sv",
                c.name(),
                "r_sv",
                p.r_sv,
                "ratio",
                p.ratios.get(c),
            );
        }
        plot_point(
            &mut plot,
            "mean_qoe_vs_r_sv",
            "mean_qoe",
            "r_sv",
            p.r_sv,
            "mean_qoe",
            p.mean_qoe,
        );
    }
    (table, plot)
}

fn error_table(traces: &[ViewpointTrace], errs: &[ErrorSample]) -> Table {
    let mut t = Table::new(&["user_id", "video_id", "segment", "frame", "e"]);
    for s in errs {
        let tr = &traces[s.trace];
        t.push(vec![
            tr.user_id.as_str().into(),
            tr.video_id.as_str().into(),
            s.segment.into(),
            s.frame.into(),
            s.e.into(),
        ]);
    }
    t
}

/// Traces → predictions → aggregate leakage sweep.
pub fn trace_pipeline(s: &Scenario) -> Result<Report, CliError> {
    let rsv = sfov_values(s)?;
    let traces = load_or_generate(s)?;
    let samples = trace::predict_all(Exec::default(), &traces, &s.windowing, s.predictor)?;
    let errs: Vec<f64> = samples.iter().map(|x| x.e).collect();
    let rep = trace::aggregate(Exec::default(), &errs, s.r_fov, s.epsilon, s.privacy, &rsv)?;
    let (table, plot) = trace_tables(&rep);
    let json = round_json(json!({
        "command": "trace",
        "scenario": scenario_json(s),
        "predictor": s.predictor,
        "n_traces": traces.len(),
        "report": serde_json::to_value(&rep).map_err(|e| CliError::Inconsistent(e.to_string()))?,
    }));
    Ok(Report {
        name: "trace_report",
        json,
        table,
        plot: Some(plot),
        extra: vec![("trace_errors".into(), error_table(&traces, &samples))],
        both_formats: true,
    })
}

pub fn resource_report(s: &Scenario) -> Result<Report, CliError> {
    let ResourceResolution { breakdown: b, rate } = resolve_resource(s)?;
    let mut table = Table::new(&[
        "s_com_bits",
        "s_cpt_bits",
        "c_cpt_bps",
        "avg_data_rate_bps",
        "rate_std_error_bps",
        "full_demand_s",
        "unclamped_capability",
        "capability",
        "r_sv",
    ]);
    table.push(vec![
        b.transmit_bits.into(),
        b.render_bits.into(),
        b.compute_rate.into(),
        b.data_rate.into(),
        rate.map(|r| r.std_error).into(),
        b.full_demand_time.into(),
        b.unclamped.into(),
        b.capability.into(),
        b.sfov_radius.into(),
    ]);
    Ok(Report {
        name: "resource",
        json: round_json(json!({
            "command": "resource",
            "scenario": scenario_json(s),
            "breakdown": b,
            "rate_estimate": rate,
            "r_sv_over_pi": b.sfov_radius / PI,
        })),
        table,
        plot: None,
        extra: Vec::new(),
        both_formats: false,
    })
}

/// Checks the scenario end to end without writing anything; returns a
/// human-readable summary.
pub fn validate(s: &Scenario) -> Result<Vec<String>, CliError> {
    let mut lines = vec![
        format!("r_fov = {} rad", crate::output::fmt_sig(s.r_fov.value())),
        format!("epsilon = {} rad", crate::output::fmt_sig(s.epsilon)),
        format!(
            "e grid: {} points, eps grid: {} points",
            s.e_grid.len(),
            s.eps_grid.len()
        ),
    ];
    match &s.sfov {
        Some(SfovSource::Resource(_)) => {
            let r = resolve_resource(s)?;
            lines.push(format!(
                "resource: C = {}, r_sv = {} rad",
                crate::output::fmt_sig(r.breakdown.capability),
                crate::output::fmt_sig(r.breakdown.sfov_radius)
            ));
        }
        Some(SfovSource::Single(r)) => {
            lines.push(format!("r_sv = {} rad", crate::output::fmt_sig(*r)))
        }
        Some(SfovSource::Grid(g)) => lines.push(format!("r_sv grid: {} points", g.len())),
        None => lines.push("no SFoV source (only sweep-error can run)".into()),
    }
    if let Some(req) = &s.privacy {
        let range = match leakage::error_range_for_requirement(req).bounds() {
            Some((lo, hi)) => format!(
                "errors in [{}, {}] rad meet it",
                crate::output::fmt_sig(lo),
                crate::output::fmt_sig(hi)
            ),
            None => "infeasible for every error".into(),
        };
        lines.push(format!(
            "privacy: max leak {}, {range}",
            crate::output::fmt_sig(req.max_leak_prob)
        ));
    }
    if s.traces.is_some() {
        let traces = load_or_generate(s)?;
        let need = s.windowing.min_samples();
        for t in &traces {
            if t.samples.len() < need {
                return Err(CliError::data(format!(
                    "trace {}: {} samples, windowing needs {need}",
                    t.name(),
                    t.samples.len()
                )));
            }
        }
        lines.push(format!("traces: {} loaded", traces.len()));
    }
    Ok(lines)
}
