use super::ReportError;
use crate::metrics::{AggregateReport, Metric, Summary};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TableFormat {
    #[default]
    Markdown,
    Latex,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct TableOptions {
    pub format: TableFormat,
    /// Bold the best mean per column; ties at two decimals are all bold.
    pub bold_best: bool,
}

/// `"m.mm (±s.ss)"`.
pub fn format_cell(s: Summary) -> String {
    format!("{:.2} (±{:.2})", s.mean, s.std)
}

fn rounded(x: f64) -> String {
    format!("{x:.2}")
}

pub fn render_table(rows: &[(String, AggregateReport)], opts: &TableOptions) -> Result<String, ReportError> {
    if rows.is_empty() {
        return Err(ReportError::EmptyRows);
    }
    let best: Vec<String> = Metric::ALL
        .iter()
        .map(|&m| {
            let top = rows
                .iter()
                .map(|(_, r)| r.get(m).mean)
                .fold(f64::NEG_INFINITY, f64::max);
            rounded(top)
        })
        .collect();
    let is_best =
        |r: &AggregateReport, col: usize| opts.bold_best && rounded(r.get(Metric::ALL[col]).mean) == best[col];

    let mut out = String::new();
    match opts.format {
        TableFormat::Markdown => {
            out.push_str("| Model |");
            for m in Metric::ALL {
                out.push_str(&format!(" {} |", m.header()));
            }
            out.push_str("\n|---|");
            out.push_str(&"---:|".repeat(Metric::ALL.len()));
            out.push('\n');
            for (name, r) in rows {
                out.push_str(&format!("| {name} |"));
                for (col, m) in Metric::ALL.iter().enumerate() {
                    let cell = format_cell(r.get(*m));
                    if is_best(r, col) {
                        out.push_str(&format!(" **{cell}** |"));
                    } else {
                        out.push_str(&format!(" {cell} |"));
                    }
                }
                out.push('\n');
            }
        }
        TableFormat::Latex => {
            out.push_str("\\begin{tabular}{l");
            out.push_str(&"c".repeat(Metric::ALL.len()));
            out.push_str("}\n\\toprule\nModel");
            for m in Metric::ALL {
                out.push_str(&format!(" & {}", m.header()));
            }
            out.push_str(" \\\\\n\\midrule\n");
            for (name, r) in rows {
                out.push_str(&name.replace('_', "\\_"));
                for (col, m) in Metric::ALL.iter().enumerate() {
                    let s = r.get(*m);
                    let cell = format!("{:.2}\\,\\scriptstyle{{(\\pm{:.2})}}", s.mean, s.std);
                    if is_best(r, col) {
                        out.push_str(&format!(" & $\\bm{{{cell}}}$"));
                    } else {
                        out.push_str(&format!(" & ${cell}$"));
                    }
                }
                out.push_str(" \\\\\n");
            }
            out.push_str("\\bottomrule\n\\end{tabular}\n");
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn summary(mean: f64, std: f64) -> Summary {
        Summary { mean, std }
    }

    fn report(acc: f64, std: f64) -> AggregateReport {
        AggregateReport {
            accuracy: summary(acc, std),
            precision_weighted: summary(acc, std),
            recall_weighted: summary(acc, std),
            f1_macro: summary(acc - 0.1, std),
            f1_weighted: summary(acc, std),
            n_runs: 3,
        }
    }

    #[test]
    fn cell_format() {
        assert_eq!(format_cell(summary(0.92, 0.0082)), "0.92 (±0.01)");
        assert_eq!(format_cell(summary(0.7278, 0.0)), "0.73 (±0.00)");
    }

    #[test]
    fn markdown_layout() {
        let rows = vec![
            ("MAJ-VOT".to_string(), report(0.7278, 0.0)),
            ("ROB-LRG".to_string(), report(0.92, 0.0082)),
        ];
        let t = render_table(
            &rows,
            &TableOptions {
                bold_best: true,
                ..Default::default()
            },
        )
        .unwrap();
        let lines: Vec<&str> = t.lines().collect();
        assert_eq!(
            lines[0],
            "| Model | Accuracy | Prec. (wgt.) | Recall (wgt.) | F1 (macro) | F1 (wgt.) |"
        );
        assert_eq!(
            lines[2],
            "| MAJ-VOT | 0.73 (±0.00) | 0.73 (±0.00) | 0.73 (±0.00) | 0.63 (±0.00) | 0.73 (±0.00) |"
        );
        assert!(lines[3].starts_with("| ROB-LRG | **0.92 (±0.01)** |"));
        assert_eq!(
            t,
            render_table(
                &rows,
                &TableOptions {
                    bold_best: true,
                    ..Default::default()
                }
            )
            .unwrap()
        );
        let plain = render_table(&rows, &TableOptions::default()).unwrap();
        assert!(!plain.contains("**"));
    }

    #[test]
    fn latex_layout() {
        let rows = vec![("ROB_LRG".to_string(), report(0.92, 0.0082))];
        let t = render_table(
            &rows,
            &TableOptions {
                format: TableFormat::Latex,
                bold_best: true,
            },
        )
        .unwrap();
        assert!(t.contains("ROB\\_LRG & $\\bm{0.92\\,\\scriptstyle{(\\pm0.01)}}$"));
        assert!(t.ends_with("\\end{tabular}\n"));
    }

    #[test]
    fn empty_rows() {
        assert!(matches!(
            render_table(&[], &TableOptions::default()),
            Err(ReportError::EmptyRows)
        ));
    }
}
