//! `boxplot`: per-stage figure and table from an analysis report.
//!
//! The SVG uses a fixed 640x400 viewport with the PE axis spanning [0, 1],
//! one box per stage in S4..W order, and outliers drawn as red "+" marks.
//! Every box group carries its numbers in `data-*` attributes (six decimal
//! places, identical to the CSV), so figures can be checked by string
//! inspection without a renderer.

use std::fmt::Write as _;

use sleep_pe::{Report, StageBox};

use crate::error::CliError;
use crate::output::{read_to_string, write_atomic};
use crate::{BoxplotArgs, OutputFormat};

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const PLOT_LEFT: f64 = 60.0;
const PLOT_RIGHT: f64 = 620.0;
const PLOT_TOP: f64 = 20.0;
const PLOT_BOTTOM: f64 = 350.0;

pub fn run(args: BoxplotArgs) -> Result<(), CliError> {
    if args.format.contains(&OutputFormat::Report) {
        return Err(CliError::param(
            "format report applies to the analyze command",
        ));
    }

    let text = read_to_string(&args.report)?;
    let report = Report::from_json(&text)
        .map_err(|e| CliError::format(format!("{}: {e}", args.report.display())))?;

    std::fs::create_dir_all(&args.out)
        .map_err(|e| CliError::file(format!("{}: {e}", args.out.display())))?;
    let stem = args
        .report
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "report".to_string());
    let stem = stem.strip_suffix(".report").unwrap_or(&stem).to_string();

    if args.format.contains(&OutputFormat::Svg) {
        let path = args.out.join(format!("{stem}.boxplot.svg"));
        write_atomic(&path, render_svg(&report).as_bytes())?;
    }
    if args.format.contains(&OutputFormat::Csv) {
        let path = args.out.join(format!("{stem}.boxplot.csv"));
        write_atomic(&path, render_csv(&report.stages).as_bytes())?;
    }
    Ok(())
}

fn render_csv(stages: &[StageBox]) -> String {
    let mut out = String::from("stage,n,q1,median,q3,whisker_low,whisker_high,outliers\n");
    for b in stages {
        let outliers: Vec<String> = b.outliers.iter().map(|v| format!("{v:.6}")).collect();
        writeln!(
            out,
            "{},{},{:.6},{:.6},{:.6},{:.6},{:.6},{}",
            b.stage.label(),
            b.n,
            b.q1,
            b.median,
            b.q3,
            b.whisker_low,
            b.whisker_high,
            outliers.join(";")
        )
        .expect("string write");
    }
    out
}

/// PE value to pixel row; the axis always spans [0, 1].
fn y(v: f64) -> f64 {
    PLOT_TOP + (1.0 - v) * (PLOT_BOTTOM - PLOT_TOP)
}

fn render_svg(report: &Report) -> String {
    let stages = &report.stages;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(
        s,
        r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#
    );

    // Gridlines and axis labels for PE = 0.0 .. 1.0.
    for i in 0..=5 {
        let v = f64::from(i) * 0.2;
        let yy = y(v);
        let _ = writeln!(
            s,
            r##"<line x1="{PLOT_LEFT}" y1="{yy:.2}" x2="{PLOT_RIGHT}" y2="{yy:.2}" stroke="#ddd"/>"##
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{v:.1}</text>"#,
            PLOT_LEFT - 6.0,
            yy + 4.0
        );
    }
    let _ = writeln!(
        s,
        r#"<line x1="{PLOT_LEFT}" y1="{PLOT_TOP}" x2="{PLOT_LEFT}" y2="{PLOT_BOTTOM}" stroke="black"/>"#
    );
    let _ = writeln!(
        s,
        r#"<line x1="{PLOT_LEFT}" y1="{PLOT_BOTTOM}" x2="{PLOT_RIGHT}" y2="{PLOT_BOTTOM}" stroke="black"/>"#
    );
    let _ = writeln!(
        s,
        r#"<text x="16" y="{:.2}" text-anchor="middle" transform="rotate(-90 16 {:.2})">normalized PE</text>"#,
        (PLOT_TOP + PLOT_BOTTOM) / 2.0,
        (PLOT_TOP + PLOT_BOTTOM) / 2.0
    );

    let k = stages.len().max(1) as f64;
    let slot = (PLOT_RIGHT - PLOT_LEFT) / k;
    for (i, b) in stages.iter().enumerate() {
        let cx = PLOT_LEFT + slot * (i as f64 + 0.5);
        let hw = (slot * 0.3).min(40.0);
        let (yq1, ymed, yq3) = (y(b.q1), y(b.median), y(b.q3));
        let (ywl, ywh) = (y(b.whisker_low), y(b.whisker_high));

        let _ = writeln!(
            s,
            r#"<g class="box" data-stage="{}" data-n="{}" data-q1="{:.6}" data-median="{:.6}" data-q3="{:.6}" data-whisker-low="{:.6}" data-whisker-high="{:.6}">"#,
            b.stage.label(),
            b.n,
            b.q1,
            b.median,
            b.q3,
            b.whisker_low,
            b.whisker_high
        );
        // Whisker stems and caps.
        let _ = writeln!(
            s,
            r#"<line x1="{cx:.2}" y1="{ywl:.2}" x2="{cx:.2}" y2="{yq1:.2}" stroke="black" stroke-dasharray="4 3"/>"#
        );
        let _ = writeln!(
            s,
            r#"<line x1="{cx:.2}" y1="{yq3:.2}" x2="{cx:.2}" y2="{ywh:.2}" stroke="black" stroke-dasharray="4 3"/>"#
        );
        for yy in [ywl, ywh] {
            let _ = writeln!(
                s,
                r#"<line x1="{:.2}" y1="{yy:.2}" x2="{:.2}" y2="{yy:.2}" stroke="black"/>"#,
                cx - hw / 2.0,
                cx + hw / 2.0
            );
        }
        // Interquartile box and median.
        let _ = writeln!(
            s,
            r#"<rect x="{:.2}" y="{yq3:.2}" width="{:.2}" height="{:.2}" fill="none" stroke="black"/>"#,
            cx - hw,
            2.0 * hw,
            yq1 - yq3
        );
        let _ = writeln!(
            s,
            r#"<line x1="{:.2}" y1="{ymed:.2}" x2="{:.2}" y2="{ymed:.2}" stroke="black" stroke-width="2"/>"#,
            cx - hw,
            cx + hw
        );
        // Outliers as red plus marks.
        for &v in &b.outliers {
            let yo = y(v);
            let _ = writeln!(
                s,
                r#"<path class="outlier" data-value="{v:.6}" d="M {:.2} {yo:.2} L {:.2} {yo:.2} M {cx:.2} {:.2} L {cx:.2} {:.2}" stroke="red" fill="none"/>"#,
                cx - 4.0,
                cx + 4.0,
                yo - 4.0,
                yo + 4.0
            );
        }
        let _ = writeln!(
            s,
            r#"<text x="{cx:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            PLOT_BOTTOM + 20.0,
            b.stage.label()
        );
        let _ = writeln!(s, "</g>");
    }
    s.push_str("</svg>\n");
    s
}
