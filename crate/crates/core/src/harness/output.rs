use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use super::{ExperimentKind, ExperimentResult, ResultRow};
use crate::error::{Error, Result};

pub const CSV_HEADER: [&str; 8] = [
    "experiment",
    "sweep_param",
    "sweep_value",
    "detector",
    "avg_error",
    "trials",
    "failures",
    "extra",
];

/// Formats like C's `%.12g`: 12 significant digits, trailing zeros removed,
/// scientific notation outside `[1e-4, 1e12)`.
pub fn format_sig12(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    let sci = format!("{:.11e}", x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..12).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        trim_zeros(format!("{:.*}", decimals, x))
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{}{:02}", trim_zeros(mantissa.to_string()), sign, exp.abs())
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

fn io_error(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn extra_field(row: &ResultRow) -> String {
    row.extra.iter().map(|(k, v)| format!("{k}={v}")).collect::<Vec<_>>().join(";")
}

fn csv_bytes(result: &ExperimentResult) -> Result<Vec<u8>> {
    let mut writer = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    let to_err = |e: csv::Error| Error::InvalidInput(format!("csv encoding failed: {e}"));
    writer.write_record(CSV_HEADER).map_err(to_err)?;
    for row in &result.rows {
        let avg = row.avg_error.map(format_sig12).unwrap_or_default();
        writer
            .write_record([
                result.experiment.name().to_string(),
                result.sweep_param.clone(),
                format_sig12(row.sweep_value),
                row.detector.clone(),
                avg,
                row.trials.to_string(),
                row.failures.to_string(),
                extra_field(row),
            ])
            .map_err(to_err)?;
    }
    writer
        .into_inner()
        .map_err(|e| Error::InvalidInput(format!("csv encoding failed: {e}")))
}

/// CSV text of a result. Wall-clock times are left out so the bytes depend
/// only on the config and seed.
pub fn csv_string(result: &ExperimentResult) -> Result<String> {
    Ok(String::from_utf8(csv_bytes(result)?).expect("csv output is utf-8"))
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(io_error(parent))?;
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    fs::write(&tmp, bytes).map_err(io_error(&tmp))?;
    fs::rename(&tmp, path).map_err(io_error(path))
}

pub fn write_csv(result: &ExperimentResult, path: &Path) -> Result<()> {
    write_atomic(path, &csv_bytes(result)?)
}

/// Writes `<stem>.csv` and `<stem>.svg`, returning both paths.
pub fn write_outputs(result: &ExperimentResult, csv_path: &Path) -> Result<(PathBuf, PathBuf)> {
    let svg_path = csv_path.with_extension("svg");
    write_csv(result, csv_path)?;
    write_atomic(&svg_path, render_plot(result).as_bytes())?;
    Ok((csv_path.to_path_buf(), svg_path))
}

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 480.0;
const MARGIN_LEFT: f64 = 70.0;
const MARGIN_RIGHT: f64 = 200.0;
const MARGIN_Y: f64 = 40.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

struct Series {
    label: String,
    points: Vec<(f64, f64)>,
    dashed: bool,
}

fn plotted_series(result: &ExperimentResult) -> Vec<Series> {
    let mut names: Vec<&str> = Vec::new();
    for row in &result.rows {
        if !names.contains(&row.detector.as_str()) {
            names.push(&row.detector);
        }
    }
    let mut out = Vec::new();
    for name in names {
        let rows: Vec<&ResultRow> = result.rows_for(name).collect();
        let value = |r: &ResultRow| r.exponent.or(r.avg_error);
        out.push(Series {
            label: name.to_string(),
            points: rows.iter().filter_map(|r| value(r).map(|v| (r.sweep_value, v))).collect(),
            dashed: false,
        });
        let reference: Vec<(f64, f64)> = rows
            .iter()
            .filter_map(|r| r.reference.map(|v| (r.sweep_value, v)))
            .filter(|(_, v)| v.is_finite())
            // bounds above one carry no information on a probability axis
            .map(|(x, v)| if result.experiment == ExperimentKind::BoundCheck { (x, v.min(1.0)) } else { (x, v) })
            .collect();
        if !reference.is_empty() {
            let label = match result.experiment {
                ExperimentKind::Fig2 => format!("2B {name}"),
                _ => format!("bound {name}"),
            };
            out.push(Series {
                label,
                points: reference,
                dashed: true,
            });
        }
    }
    out
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Line plot of every series against the sweep value, as a standalone SVG.
pub fn render_plot(result: &ExperimentResult) -> String {
    let series = plotted_series(result);
    let all: Vec<(f64, f64)> = series
        .iter()
        .flat_map(|s| s.points.iter().copied())
        .filter(|(x, y)| x.is_finite() && y.is_finite())
        .collect();
    let (mut x0, mut x1) = all.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| (a.min(p.0), b.max(p.0)));
    let mut y1 = all.iter().fold(0.0f64, |a, p| a.max(p.1));
    if !x0.is_finite() {
        (x0, x1) = (0.0, 1.0);
    }
    if x1 <= x0 {
        x1 = x0 + 1.0;
    }
    if y1 <= 0.0 {
        y1 = 1.0;
    }
    let y1 = y1 * 1.05;
    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = HEIGHT - 2.0 * MARGIN_Y;
    let sx = |x: f64| MARGIN_LEFT + (x - x0) / (x1 - x0) * plot_w;
    let sy = |y: f64| HEIGHT - MARGIN_Y - y / y1 * plot_h;

    let y_label = match result.experiment {
        ExperimentKind::Fig2 => "exponent (bits)",
        ExperimentKind::BoundCheck => "P(estimate outside ball)",
        _ => "average error",
    };

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let (left, right, top, bottom) = (MARGIN_LEFT, MARGIN_LEFT + plot_w, MARGIN_Y, HEIGHT - MARGIN_Y);
    let _ = writeln!(
        svg,
        r#"<path d="M{left} {top} V{bottom} H{right}" fill="none" stroke="black"/>"#
    );
    for i in 0..=5 {
        let f = i as f64 / 5.0;
        let x = x0 + f * (x1 - x0);
        let y = f * y1;
        let _ = writeln!(
            svg,
            r#"<line x1="{0:.1}" y1="{bottom}" x2="{0:.1}" y2="{1}" stroke="black"/><text x="{0:.1}" y="{2}" text-anchor="middle">{3}</text>"#,
            sx(x),
            bottom + 5.0,
            bottom + 18.0,
            format_sig12((x * 1e4).round() / 1e4)
        );
        let _ = writeln!(
            svg,
            r#"<line x1="{0}" y1="{1:.1}" x2="{2}" y2="{1:.1}" stroke="black"/><text x="{3}" y="{4:.1}" text-anchor="end">{5}</text>"#,
            left - 5.0,
            sy(y),
            left,
            left - 8.0,
            sy(y) + 4.0,
            format_sig12((y * 1e4).round() / 1e4)
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{:.1}" y="{}" text-anchor="middle">{}</text>"#,
        left + plot_w / 2.0,
        HEIGHT - 6.0,
        escape(&result.sweep_param)
    );
    let _ = writeln!(
        svg,
        r#"<text x="14" y="{:.1}" text-anchor="middle" transform="rotate(-90 14 {:.1})">{}</text>"#,
        top + plot_h / 2.0,
        top + plot_h / 2.0,
        y_label
    );
    for (i, s) in series.iter().enumerate() {
        let color = COLORS[(i / 2 + i % 2 * 3) % COLORS.len()];
        let dash = if s.dashed { r#" stroke-dasharray="6 4""# } else { "" };
        let pts: Vec<String> = s
            .points
            .iter()
            .filter(|(x, y)| x.is_finite() && y.is_finite())
            .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
            .collect();
        if !pts.is_empty() {
            let _ = writeln!(
                svg,
                r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"{dash}/>"#,
                pts.join(" ")
            );
        }
        let ly = top + 16.0 * i as f64;
        let _ = writeln!(
            svg,
            r#"<line x1="{0}" y1="{1}" x2="{2}" y2="{1}" stroke="{color}" stroke-width="1.5"{dash}/><text x="{3}" y="{4}">{5}</text>"#,
            right + 10.0,
            ly,
            right + 30.0,
            right + 35.0,
            ly + 4.0,
            escape(&s.label)
        );
    }
    svg.push_str("</svg>\n");
    svg
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::time::Duration;

    #[test]
    fn sig12_matches_printf() {
        assert_eq!(format_sig12(0.5), "0.5");
        assert_eq!(format_sig12(1.0), "1");
        assert_eq!(format_sig12(1.0 / 3.0), "0.333333333333");
        assert_eq!(format_sig12(2.0 / 3.0), "0.666666666667");
        assert_eq!(format_sig12(123456.789), "123456.789");
        assert_eq!(format_sig12(1e-5), "1e-05");
        assert_eq!(format_sig12(0.0001), "0.0001");
        assert_eq!(format_sig12(1.5e12), "1.5e+12");
        assert_eq!(format_sig12(999999999999.0), "999999999999");
        assert_eq!(format_sig12(-0.25), "-0.25");
        assert_eq!(format_sig12(0.0), "0");
        assert_eq!(format_sig12(f64::INFINITY), "inf");
        // rounding can carry into the next decade
        assert_eq!(format_sig12(9.9999999999999e-5), "0.0001");
    }

    fn sample() -> ExperimentResult {
        ExperimentResult {
            experiment: ExperimentKind::Custom,
            sweep_param: "c".into(),
            rows: vec![ResultRow {
                sweep_value: 0.1,
                detector: "mean".into(),
                avg_error: Some(0.25),
                trials: 4,
                failures: 0,
                exponent: None,
                reference: None,
                extra: vec![("t".into(), "2".into())],
                wall_time: Duration::from_millis(5),
            }],
        }
    }

    #[test]
    fn csv_layout() {
        let text = csv_string(&sample()).unwrap();
        assert_eq!(
            text,
            "experiment,sweep_param,sweep_value,detector,avg_error,trials,failures,extra\n\
             custom,c,0.1,mean,0.25,4,0,t=2\n"
        );
    }

    #[test]
    fn outputs_land_next_to_each_other() {
        let dir = tempfile::tempdir().unwrap();
        let csv = dir.path().join("nested/run.csv");
        let (c, s) = write_outputs(&sample(), &csv).unwrap();
        assert!(c.exists() && s.exists());
        assert_eq!(s.extension().unwrap(), "svg");
        let text = fs::read_to_string(c).unwrap();
        assert!(!text.contains('\r'));
        assert_eq!(text, csv_string(&sample()).unwrap());
        assert!(fs::read_to_string(s).unwrap().starts_with("<svg"));
    }
}
