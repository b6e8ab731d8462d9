use std::fmt::Write as _;
use std::path::Path;

use super::ReportError;
use crate::ablation::LearningCurve;
use crate::metrics::{Metric, Summary};

const W: f64 = 640.0;
const H: f64 = 400.0;
const LEFT: f64 = 60.0;
const RIGHT: f64 = 150.0;
const TOP: f64 = 20.0;
const BOTTOM: f64 = 50.0;
/// Extra room for the full-data marker beyond the largest size.
const FULL_GAP: f64 = 40.0;

fn color(m: Metric) -> &'static str {
    match m {
        Metric::F1Macro => "#1f77b4",
        Metric::F1Weighted => "#ff7f0e",
        Metric::Accuracy => "#2ca02c",
        Metric::PrecisionWeighted => "#d62728",
        Metric::RecallWeighted => "#9467bd",
    }
}

fn y_of(v: f64) -> f64 {
    TOP + (1.0 - v.clamp(0.0, 1.0)) * (H - TOP - BOTTOM)
}

struct Marker {
    x: f64,
    n: usize,
    kind: &'static str,
    value: Summary,
}

/// Learning curve as a standalone SVG document.
pub fn render_curve_svg(curve: &LearningCurve, metrics: &[Metric]) -> Result<String, ReportError> {
    if curve.is_empty() {
        return Err(ReportError::EmptyCurve);
    }
    if metrics.is_empty() {
        return Err(ReportError::EmptyMetrics);
    }
    let max_n = curve.points.iter().map(|p| p.n_train).max().unwrap_or(1).max(1) as f64;
    let plot_right = W - RIGHT - if curve.full_data_point.is_some() { FULL_GAP } else { 0.0 };
    let x_of = |n: usize| LEFT + n as f64 / max_n * (plot_right - LEFT);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);

    // axes and grid
    let (y0, y1) = (y_of(0.0), y_of(1.0));
    let _ = writeln!(
        s,
        r#"<line x1="{LEFT}" y1="{y0}" x2="{}" y2="{y0}" stroke="black"/>"#,
        W - RIGHT
    );
    let _ = writeln!(
        s,
        r#"<line x1="{LEFT}" y1="{y0}" x2="{LEFT}" y2="{y1}" stroke="black"/>"#
    );
    for i in 0..=5 {
        let v = i as f64 / 5.0;
        let y = y_of(v);
        let _ = writeln!(
            s,
            r##"<line x1="{LEFT}" y1="{y:.2}" x2="{}" y2="{y:.2}" stroke="#dddddd"/><text x="{}" y="{:.2}" text-anchor="end">{v:.1}</text>"##,
            W - RIGHT,
            LEFT - 6.0,
            y + 4.0
        );
    }
    let mut ticks: Vec<(f64, String)> = Vec::new();
    if curve.zero_shot_anchor.is_some() {
        ticks.push((x_of(0), "0".into()));
    }
    ticks.extend(curve.points.iter().map(|p| (x_of(p.n_train), p.n_train.to_string())));
    if let Some(full) = &curve.full_data_point {
        ticks.push((W - RIGHT, format!("full ({})", full.n_train)));
    }
    for (x, label) in &ticks {
        let _ = writeln!(
            s,
            r#"<line x1="{x:.2}" y1="{y0}" x2="{x:.2}" y2="{}" stroke="black"/><text x="{x:.2}" y="{}" text-anchor="middle">{label}</text>"#,
            y0 + 4.0,
            y0 + 16.0
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle">Training set size (N)</text>"#,
        (LEFT + W - RIGHT) / 2.0,
        H - 10.0
    );

    for (row, &m) in metrics.iter().enumerate() {
        let c = color(m);
        let mut markers: Vec<Marker> = Vec::new();
        if let Some(a) = &curve.zero_shot_anchor {
            markers.push(Marker {
                x: x_of(0),
                n: 0,
                kind: "anchor",
                value: Summary {
                    mean: m.of(&a.report),
                    std: 0.0,
                },
            });
        }
        markers.extend(curve.points.iter().map(|p| Marker {
            x: x_of(p.n_train),
            n: p.n_train,
            kind: "point",
            value: p.aggregate.get(m),
        }));
        if let Some(full) = &curve.full_data_point {
            markers.push(Marker {
                x: W - RIGHT,
                n: full.n_train,
                kind: "full",
                value: full.aggregate.get(m),
            });
        }

        let line: Vec<String> = markers
            .iter()
            .filter(|mk| mk.kind == "point")
            .map(|mk| format!("{:.2},{:.2}", mk.x, y_of(mk.value.mean)))
            .collect();
        let _ = writeln!(
            s,
            r#"<polyline data-metric="{}" points="{}" fill="none" stroke="{c}" stroke-width="1.5"/>"#,
            m.key(),
            line.join(" ")
        );
        for mk in &markers {
            let (x, y) = (mk.x, y_of(mk.value.mean));
            if mk.value.std > 0.0 {
                let _ = writeln!(
                    s,
                    r#"<line x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{:.2}" stroke="{c}"/>"#,
                    y_of(mk.value.mean - mk.value.std),
                    y_of(mk.value.mean + mk.value.std)
                );
            }
            let opacity = if mk.kind == "anchor" { 0.4 } else { 1.0 };
            let _ = writeln!(
                s,
                r#"<circle class="marker" data-metric="{}" data-kind="{}" data-n="{}" data-mean="{}" data-std="{}" cx="{x:.2}" cy="{y:.2}" r="4" fill="{c}" fill-opacity="{opacity}"/>"#,
                m.key(),
                mk.kind,
                mk.n,
                mk.value.mean,
                mk.value.std
            );
        }
        let ly = TOP + 10.0 + row as f64 * 18.0;
        let lx = W - RIGHT + 20.0;
        let _ = writeln!(
            s,
            r#"<rect x="{lx}" y="{}" width="10" height="10" fill="{c}"/><text x="{}" y="{}">{}</text>"#,
            ly - 8.0,
            lx + 14.0,
            ly + 1.0,
            m.header()
        );
    }
    if let Some(a) = &curve.zero_shot_anchor {
        let ly = TOP + 10.0 + metrics.len() as f64 * 18.0;
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{ly}" fill-opacity="0.6">N=0: {}</text>"#,
            W - RIGHT + 20.0,
            xml_escape(&a.system_name)
        );
    }
    s.push_str("</svg>\n");
    Ok(s)
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

pub fn render_curve_plot(curve: &LearningCurve, metrics: &[Metric], out_path: &Path) -> Result<(), ReportError> {
    let svg = render_curve_svg(curve, metrics)?;
    std::fs::write(out_path, svg).map_err(|e| ReportError::UnwritablePath {
        path: out_path.to_path_buf(),
        reason: e.to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ablation::{Anchor, CurvePoint};
    use crate::metrics::{aggregate, MetricReport};

    fn report(v: f64) -> MetricReport {
        MetricReport {
            accuracy: v,
            precision_weighted: v,
            recall_weighted: v,
            f1_macro: v - 0.05,
            f1_weighted: v,
            support: vec![1, 1],
            n_excluded: 0,
        }
    }

    fn curve(sizes: &[usize], anchor: bool) -> LearningCurve {
        LearningCurve {
            points: sizes
                .iter()
                .map(|&n| CurvePoint {
                    n_train: n,
                    aggregate: aggregate(&[report(0.6 + n as f64 / 5000.0), report(0.62 + n as f64 / 5000.0)]).unwrap(),
                    runs: vec![],
                })
                .collect(),
            zero_shot_anchor: anchor.then(|| Anchor {
                system_name: "BART <nli>".into(),
                report: report(0.55),
            }),
            full_data_point: None,
            test_record_ids: vec![],
            seeds: vec![1, 2],
        }
    }

    const FIG: [Metric; 3] = [Metric::F1Macro, Metric::F1Weighted, Metric::Accuracy];

    #[test]
    fn anchor_adds_position() {
        let svg = render_curve_svg(&curve(&[50, 100, 200, 500, 1000], true), &FIG).unwrap();
        for m in FIG {
            let n = svg
                .matches(&format!(r#"class="marker" data-metric="{}""#, m.key()))
                .count();
            assert_eq!(n, 6);
        }
        assert!(svg.contains(r#"data-kind="anchor" data-n="0""#));
        assert!(svg.contains("BART &lt;nli&gt;"));
        assert_eq!(
            svg,
            render_curve_svg(&curve(&[50, 100, 200, 500, 1000], true), &FIG).unwrap()
        );
    }

    #[test]
    fn single_point_and_errors() {
        let svg = render_curve_svg(&curve(&[50], false), &[Metric::Accuracy]).unwrap();
        assert_eq!(svg.matches(r#"class="marker""#).count(), 1);
        assert!(matches!(
            render_curve_svg(&curve(&[], false), &FIG),
            Err(ReportError::EmptyCurve)
        ));
        assert!(matches!(
            render_curve_svg(&curve(&[50], false), &[]),
            Err(ReportError::EmptyMetrics)
        ));
        let err = render_curve_plot(&curve(&[50], false), &FIG, Path::new("/nonexistent-dir/x.svg")).unwrap_err();
        assert!(matches!(err, ReportError::UnwritablePath { .. }));
    }

    #[test]
    fn full_data_at_right_edge() {
        let mut c = curve(&[50, 100], false);
        c.full_data_point = Some(c.points[1].clone());
        c.full_data_point.as_mut().unwrap().n_train = 4000;
        let svg = render_curve_svg(&c, &[Metric::Accuracy]).unwrap();
        assert!(svg.contains(r#"data-kind="full" data-n="4000""#));
        assert!(svg.contains("full (4000)"));
    }
}
