//! Static SVG Gantt charts: one row per machine, one rectangle per
//! operation, and a dashed tick at every due date of a JIT job.

use std::collections::{BTreeSet, HashMap};
use std::fmt::Write;

use jitshop_core::{Instance, Result, Schedule, Time};

const ROW_HEIGHT: i64 = 36;
const BAR_HEIGHT: i64 = 24;
const LEFT: i64 = 48;
const TOP: i64 = 24;
const PLOT_WIDTH: f64 = 800.0;

const PALETTE: [&str; 8] = [
    "#4e79a7", "#f28e2b", "#59a14f", "#e15759", "#76b7b2", "#edc948", "#b07aa1", "#9c755f",
];

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            _ => out.push(c),
        }
    }
    out
}

/// Renders `sched` as a standalone SVG document.
///
/// Output depends only on the instance and schedule, so equal inputs give
/// byte-identical files.
pub fn render_svg(inst: &Instance, sched: &Schedule) -> Result<String> {
    let rows = sched.operations(inst)?;
    let index = inst.id_index();
    let horizon = rows
        .iter()
        .flatten()
        .map(|op| op.end)
        .chain(sched.jit_set.iter().filter_map(|id| index.get(id).map(|&j| inst.jobs[j].due)))
        .max()
        .unwrap_or(0)
        .max(1);
    let scale = PLOT_WIDTH / horizon as f64;
    let x = |t: Time| LEFT as f64 + t as f64 * scale;

    let machines = inst.machines as i64;
    let height = TOP + machines * ROW_HEIGHT + 28;
    let width = LEFT as f64 + PLOT_WIDTH + 24.0;

    let colour: HashMap<_, _> = inst
        .jobs
        .iter()
        .enumerate()
        .map(|(j, job)| (&job.id, PALETTE[j % PALETTE.len()]))
        .collect();

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0}" height="{height}" viewBox="0 0 {width:.0} {height}" font-family="monospace" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);

    for m in 0..machines {
        let y = TOP + m * ROW_HEIGHT;
        let _ = writeln!(
            svg,
            r#"<text x="8" y="{}" dominant-baseline="middle">M{}</text>"#,
            y + ROW_HEIGHT / 2,
            m + 1
        );
        let _ = writeln!(
            svg,
            r##"<line x1="{LEFT}" y1="{0}" x2="{1:.2}" y2="{0}" stroke="#ccc"/>"##,
            y + ROW_HEIGHT,
            x(horizon)
        );
    }

    for (m, ops) in rows.iter().enumerate() {
        let y = TOP + m as i64 * ROW_HEIGHT + (ROW_HEIGHT - BAR_HEIGHT) / 2;
        for op in ops {
            let fill = colour.get(&op.job).copied().unwrap_or(PALETTE[0]);
            let id = escape(&op.job.0);
            let _ = writeln!(
                svg,
                r#"<rect x="{:.2}" y="{y}" width="{:.2}" height="{BAR_HEIGHT}" fill="{fill}" stroke="black"><title>{id} ({}, {}]</title></rect>"#,
                x(op.start),
                (op.end - op.start) as f64 * scale,
                op.start,
                op.end
            );
            let _ = writeln!(
                svg,
                r#"<text x="{:.2}" y="{}" text-anchor="middle" dominant-baseline="middle">{id}</text>"#,
                x(op.start) + (op.end - op.start) as f64 * scale / 2.0,
                y + BAR_HEIGHT / 2
            );
        }
    }

    let dues: BTreeSet<Time> = sched
        .jit_set
        .iter()
        .filter_map(|id| index.get(id).map(|&j| inst.jobs[j].due))
        .collect();
    let axis = TOP + machines * ROW_HEIGHT;
    for d in dues {
        let _ = writeln!(
            svg,
            r##"<line x1="{0:.2}" y1="{TOP}" x2="{0:.2}" y2="{1}" stroke="#d62728" stroke-dasharray="4 3"/>"##,
            x(d),
            axis + 6
        );
        let _ = writeln!(
            svg,
            r##"<text x="{:.2}" y="{}" text-anchor="middle" fill="#d62728">{d}</text>"##,
            x(d),
            axis + 20
        );
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}
