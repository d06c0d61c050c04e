use std::fmt::Write;

use super::SummaryRow;
use crate::policies::PolicyKind;

const W: f64 = 640.0;
const H: f64 = 400.0;
const LEFT: f64 = 64.0;
const RIGHT: f64 = 120.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 48.0;

const COLORS: [&str; 5] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#7f7f7f"];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Line chart of one metric: the mean per axis value for every policy, with
/// 5%-95% whiskers. Returns `None` when the summary has no such metric.
pub fn svg_plot(summary: &[SummaryRow], metric: &str, title: &str) -> Option<String> {
    let picked: Vec<&SummaryRow> = summary.iter().filter(|s| s.metric == metric).collect();
    let first = picked.first()?;
    let mut policies: Vec<PolicyKind> = Vec::new();
    for s in &picked {
        if !policies.contains(&s.policy) {
            policies.push(s.policy);
        }
    }
    let (mut x0, mut x1) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY);
    for s in &picked {
        x0 = x0.min(s.axis_value);
        x1 = x1.max(s.axis_value);
        y0 = y0.min(s.stat.p5.min(s.stat.mean));
        y1 = y1.max(s.stat.p95.max(s.stat.mean));
    }
    y0 = y0.min(0.0);
    if y1 <= y0 {
        y1 = y0 + 1.0;
    }
    if x1 <= x0 {
        x0 -= 0.5;
        x1 += 0.5;
    }
    let px = |x: f64| LEFT + (x - x0) / (x1 - x0) * (W - LEFT - RIGHT);
    let py = |y: f64| H - BOTTOM - (y - y0) / (y1 - y0) * (H - TOP - BOTTOM);

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(svg, r#"<text x="{}" y="22" text-anchor="middle" font-size="14">{}</text>"#, W / 2.0, escape(title));
    let (bx, by) = (H - BOTTOM, W - RIGHT);
    let _ = writeln!(svg, r#"<line x1="{LEFT}" y1="{bx}" x2="{by}" y2="{bx}" stroke="black"/>"#);
    let _ = writeln!(svg, r#"<line x1="{LEFT}" y1="{TOP}" x2="{LEFT}" y2="{bx}" stroke="black"/>"#);
    for i in 0..=4 {
        let y = y0 + (y1 - y0) * i as f64 / 4.0;
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{:.1}" text-anchor="end">{}</text>"#,
            LEFT - 6.0,
            py(y) + 4.0,
            format_tick(y)
        );
    }
    let mut xs: Vec<f64> = picked.iter().map(|s| s.axis_value).collect();
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    for x in &xs {
        let _ = writeln!(
            svg,
            r#"<text x="{:.1}" y="{}" text-anchor="middle">{}</text>"#,
            px(*x),
            bx + 16.0,
            format_tick(*x)
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
        (LEFT + W - RIGHT) / 2.0,
        H - 10.0,
        first.axis.name()
    );
    for (p, policy) in policies.iter().enumerate() {
        let color = COLORS[p % COLORS.len()];
        let mut pts: Vec<&&SummaryRow> = picked.iter().filter(|s| s.policy == *policy).collect();
        pts.sort_by(|a, b| a.axis_value.total_cmp(&b.axis_value));
        let path: Vec<String> = pts
            .iter()
            .map(|s| format!("{:.1},{:.1}", px(s.axis_value), py(s.stat.mean)))
            .collect();
        let _ = writeln!(
            svg,
            r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="2"/>"#,
            path.join(" ")
        );
        for s in pts {
            let x = px(s.axis_value);
            let _ = writeln!(
                svg,
                r#"<line x1="{x:.1}" y1="{:.1}" x2="{x:.1}" y2="{:.1}" stroke="{color}"/>"#,
                py(s.stat.p5),
                py(s.stat.p95)
            );
            let _ = writeln!(svg, r#"<circle cx="{x:.1}" cy="{:.1}" r="3" fill="{color}"/>"#, py(s.stat.mean));
        }
        let ly = TOP + 18.0 * p as f64;
        let lx = W - RIGHT + 16.0;
        let _ = writeln!(
            svg,
            r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"/><text x="{}" y="{}">{}</text>"#,
            lx + 18.0,
            lx + 24.0,
            ly + 4.0,
            policy.name()
        );
    }
    svg.push_str("</svg>\n");
    Some(svg)
}

fn format_tick(v: f64) -> String {
    let s = format!("{v:.3}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::{Axis, Stat};

    fn point(policy: PolicyKind, x: f64, mean: f64) -> SummaryRow {
        SummaryRow {
            policy,
            axis: Axis::Alpha,
            axis_value: x,
            metric: "deployed_frac".into(),
            n: 3,
            stat: Stat {
                mean,
                p5: mean - 0.1,
                p95: mean + 0.1,
            },
        }
    }

    #[test]
    fn draws_one_line_per_policy() {
        let s = vec![
            point(PolicyKind::Lr, 0.0, 0.9),
            point(PolicyKind::Lr, 1.5, 0.7),
            point(PolicyKind::Gff, 0.0, 0.8),
            point(PolicyKind::Gff, 1.5, 0.4),
        ];
        let svg = svg_plot(&s, "deployed_frac", "a < b").unwrap();
        assert!(svg.starts_with("<svg"));
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert_eq!(svg.matches("<circle").count(), 4);
        assert!(svg.contains("a &lt; b"));
        assert!(svg_plot(&s, "J", "x").is_none());
    }

    #[test]
    fn ticks_are_trimmed() {
        assert_eq!(format_tick(1.5), "1.5");
        assert_eq!(format_tick(20.0), "20");
        assert_eq!(format_tick(-0.0001), "0");
    }
}
