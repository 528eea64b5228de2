//! Line chart of the threshold roots against `d`, written as a plain SVG document.

use std::fmt::Write as _;

use combtn_core::SweepRow;

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 600.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 40.0;
const TOP: f64 = 50.0;
const BOTTOM: f64 = 70.0;

/// Round step for about `target` ticks over `span`.
fn tick_step(span: f64, target: f64) -> f64 {
    let raw = (span / target).max(f64::MIN_POSITIVE);
    let mag = 10f64.powf(raw.log10().floor());
    let norm = raw / mag;
    let nice = if norm <= 1.0 {
        1.0
    } else if norm <= 2.0 {
        2.0
    } else if norm <= 5.0 {
        5.0
    } else {
        10.0
    };
    nice * mag
}

fn fmt_tick(v: f64, step: f64) -> String {
    if step >= 1.0 {
        format!("{v:.0}")
    } else {
        let decimals = (-step.log10().floor()) as usize;
        format!("{v:.decimals$}")
    }
}

/// Contiguous runs of rows that have roots, so gaps break the polyline.
fn segments(rows: &[SweepRow], pick: impl Fn(&SweepRow) -> Option<f64>) -> Vec<Vec<(f64, f64)>> {
    let mut out: Vec<Vec<(f64, f64)>> = Vec::new();
    let mut current = Vec::new();
    for r in rows {
        match pick(r) {
            Some(y) => current.push((r.d, y)),
            None if !current.is_empty() => out.push(std::mem::take(&mut current)),
            None => {}
        }
    }
    if !current.is_empty() {
        out.push(current);
    }
    out
}

pub fn threshold_chart(rows: &[SweepRow], teeth: usize) -> String {
    let d_lo = rows.first().map_or(0.0, |r| r.d);
    let mut d_hi = rows.last().map_or(1.0, |r| r.d);
    if d_hi <= d_lo {
        d_hi = d_lo + 1.0;
    }
    let y_max = rows
        .iter()
        .filter_map(|r| r.x_plus)
        .fold(0.0f64, f64::max)
        .max(1.0)
        * 1.05;

    let plot_w = WIDTH - LEFT - RIGHT;
    let plot_h = HEIGHT - TOP - BOTTOM;
    let px = |d: f64| LEFT + (d - d_lo) / (d_hi - d_lo) * plot_w;
    let py = |y: f64| TOP + plot_h - y / y_max * plot_h;

    let mut s = String::new();
    writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {WIDTH} {HEIGHT}" width="{WIDTH}" height="{HEIGHT}" font-family="sans-serif" font-size="14">"#
    )
    .unwrap();
    writeln!(s, r#"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#).unwrap();
    writeln!(
        s,
        r#"<text x="{:.2}" y="30" text-anchor="middle" font-size="18">Threshold roots x+ and x- versus d (M = {teeth})</text>"#,
        WIDTH / 2.0
    )
    .unwrap();

    // axes
    let (x0, y0) = (LEFT, TOP + plot_h);
    writeln!(
        s,
        r#"<path d="M{x0:.2} {TOP:.2} L{x0:.2} {y0:.2} L{:.2} {y0:.2}" fill="none" stroke="black" stroke-width="1.5"/>"#,
        LEFT + plot_w
    )
    .unwrap();

    let xstep = tick_step(d_hi - d_lo, 10.0);
    let mut t = (d_lo / xstep).ceil() * xstep;
    while t <= d_hi + 1e-9 * xstep {
        let x = px(t);
        writeln!(
            s,
            r#"<line x1="{x:.2}" y1="{y0:.2}" x2="{x:.2}" y2="{:.2}" stroke="black"/><text x="{x:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            y0 + 6.0,
            y0 + 24.0,
            fmt_tick(t, xstep)
        )
        .unwrap();
        t += xstep;
    }
    let ystep = tick_step(y_max, 8.0);
    let mut t = 0.0;
    while t <= y_max + 1e-9 * ystep {
        let y = py(t);
        writeln!(
            s,
            r#"<line x1="{:.2}" y1="{y:.2}" x2="{x0:.2}" y2="{y:.2}" stroke="black"/><text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
            x0 - 6.0,
            x0 - 10.0,
            y + 5.0,
            fmt_tick(t, ystep)
        )
        .unwrap();
        t += ystep;
    }
    writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-size="16">d</text>"#,
        LEFT + plot_w / 2.0,
        HEIGHT - 20.0
    )
    .unwrap();
    writeln!(
        s,
        r#"<text x="25" y="{:.2}" text-anchor="middle" font-size="16" transform="rotate(-90 25 {:.2})">x</text>"#,
        TOP + plot_h / 2.0,
        TOP + plot_h / 2.0
    )
    .unwrap();

    let curves: [(&str, &str, fn(&SweepRow) -> Option<f64>); 2] =
        [("x-", "#1f77b4", |r| r.x_minus), ("x+", "#d62728", |r| r.x_plus)];
    for (label, color, pick) in curves {
        for seg in segments(rows, pick) {
            let pts: Vec<String> = seg.iter().map(|&(d, y)| format!("{:.2},{:.2}", px(d), py(y))).collect();
            writeln!(
                s,
                r#"<polyline class="{label}" points="{}" fill="none" stroke="{color}" stroke-width="2"/>"#,
                pts.join(" ")
            )
            .unwrap();
        }
    }

    // legend, top-left inside the plot
    for (i, (label, color, _)) in curves.iter().enumerate() {
        let y = TOP + 20.0 + i as f64 * 22.0;
        writeln!(
            s,
            r#"<line x1="{:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="{color}" stroke-width="2"/><text x="{:.2}" y="{:.2}">{label}</text>"#,
            LEFT + 20.0,
            LEFT + 50.0,
            LEFT + 58.0,
            y + 5.0
        )
        .unwrap();
    }
    s.push_str("</svg>\n");
    s
}
