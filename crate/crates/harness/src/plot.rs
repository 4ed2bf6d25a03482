//! Minimal SVG line charts rendered from the result CSVs.
//!
//! Every chart is a pure function of the CSV text, so plots are exactly as
//! reproducible as the CSVs they are drawn from.

use mcstab::{Error, Result};

/// One polyline of a chart; points are (x, y) pairs sorted by x.
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const LEFT: f64 = 72.0;
const RIGHT: f64 = 616.0;
const TOP: f64 = 42.0;
const BOTTOM: f64 = 368.0;
const PALETTE: [&str; 4] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];

/// Formats an axis value with up to four decimals, trimming trailing zeros.
fn fmt_num(v: f64) -> String {
    let mut s = format!("{v:.4}");
    if s.contains('.') {
        while s.ends_with('0') {
            s.pop();
        }
        if s.ends_with('.') {
            s.pop();
        }
    }
    if s == "-0" {
        s = "0".to_string();
    }
    s
}

fn value_range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for v in values {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if !lo.is_finite() || !hi.is_finite() {
        return (0.0, 1.0);
    }
    if lo == hi {
        // Degenerate span: pad so the single level sits mid-plot.
        let pad = if lo == 0.0 { 1.0 } else { lo.abs() * 0.1 };
        return (lo - pad, hi + pad);
    }
    (lo, hi)
}

/// Renders a line chart of the given series with axes, ticks, and a legend.
/// Empty series are skipped; at least one point must exist overall.
pub fn line_chart(title: &str, x_label: &str, y_label: &str, series: &[Series]) -> Result<String> {
    let drawn: Vec<&Series> = series.iter().filter(|s| !s.points.is_empty()).collect();
    if drawn.is_empty() {
        return Err(Error::InvalidArgument(
            "cannot chart an empty series collection".into(),
        ));
    }
    let (x_lo, x_hi) = value_range(drawn.iter().flat_map(|s| s.points.iter().map(|p| p.0)));
    let (y_lo, y_hi) = value_range(drawn.iter().flat_map(|s| s.points.iter().map(|p| p.1)));
    let px = |x: f64| LEFT + (x - x_lo) / (x_hi - x_lo) * (RIGHT - LEFT);
    let py = |y: f64| BOTTOM - (y - y_lo) / (y_hi - y_lo) * (BOTTOM - TOP);

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" \
         viewBox=\"0 0 {WIDTH} {HEIGHT}\" font-family=\"sans-serif\" font-size=\"12\">\n"
    ));
    svg.push_str(&format!(
        "  <rect width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>\n"
    ));
    svg.push_str(&format!(
        "  <text x=\"{:.1}\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">{}</text>\n",
        (LEFT + RIGHT) / 2.0,
        title
    ));
    // Axes.
    svg.push_str(&format!(
        "  <line x1=\"{LEFT}\" y1=\"{BOTTOM}\" x2=\"{RIGHT}\" y2=\"{BOTTOM}\" stroke=\"black\"/>\n"
    ));
    svg.push_str(&format!(
        "  <line x1=\"{LEFT}\" y1=\"{TOP}\" x2=\"{LEFT}\" y2=\"{BOTTOM}\" stroke=\"black\"/>\n"
    ));
    // Ticks and grid.
    for i in 0..=4 {
        let f = i as f64 / 4.0;
        let xv = x_lo + f * (x_hi - x_lo);
        let yv = y_lo + f * (y_hi - y_lo);
        let xp = px(xv);
        let yp = py(yv);
        svg.push_str(&format!(
            "  <line x1=\"{xp:.1}\" y1=\"{BOTTOM}\" x2=\"{xp:.1}\" y2=\"{:.1}\" stroke=\"black\"/>\n",
            BOTTOM + 4.0
        ));
        svg.push_str(&format!(
            "  <text x=\"{xp:.1}\" y=\"{:.1}\" text-anchor=\"middle\">{}</text>\n",
            BOTTOM + 18.0,
            fmt_num(xv)
        ));
        svg.push_str(&format!(
            "  <line x1=\"{:.1}\" y1=\"{yp:.1}\" x2=\"{LEFT}\" y2=\"{yp:.1}\" stroke=\"black\"/>\n",
            LEFT - 4.0
        ));
        svg.push_str(&format!(
            "  <text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"end\">{}</text>\n",
            LEFT - 8.0,
            yp + 4.0,
            fmt_num(yv)
        ));
    }
    // Axis labels.
    svg.push_str(&format!(
        "  <text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\">{}</text>\n",
        (LEFT + RIGHT) / 2.0,
        HEIGHT - 12.0,
        x_label
    ));
    svg.push_str(&format!(
        "  <text x=\"16\" y=\"{:.1}\" text-anchor=\"middle\" \
         transform=\"rotate(-90 16 {:.1})\">{}</text>\n",
        (TOP + BOTTOM) / 2.0,
        (TOP + BOTTOM) / 2.0,
        y_label
    ));
    // Series.
    for (idx, s) in drawn.iter().enumerate() {
        let color = PALETTE[idx % PALETTE.len()];
        let pts: Vec<String> = s
            .points
            .iter()
            .map(|&(x, y)| format!("{:.2},{:.2}", px(x), py(y)))
            .collect();
        svg.push_str(&format!(
            "  <polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\"/>\n",
            pts.join(" ")
        ));
        for &(x, y) in &s.points {
            svg.push_str(&format!(
                "  <circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"3\" fill=\"{color}\"/>\n",
                px(x),
                py(y)
            ));
        }
        // Legend row.
        let ly = TOP + 14.0 * idx as f64 + 6.0;
        svg.push_str(&format!(
            "  <line x1=\"{:.1}\" y1=\"{ly:.1}\" x2=\"{:.1}\" y2=\"{ly:.1}\" \
             stroke=\"{color}\" stroke-width=\"1.5\"/>\n",
            LEFT + 10.0,
            LEFT + 34.0
        ));
        svg.push_str(&format!(
            "  <text x=\"{:.1}\" y=\"{:.1}\">{}</text>\n",
            LEFT + 40.0,
            ly + 4.0,
            s.label
        ));
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

/// A parsed CSV with named columns (no quoting; fields must not contain
/// commas).
struct Table<'a> {
    header: Vec<&'a str>,
    rows: Vec<(usize, Vec<&'a str>)>,
}

impl<'a> Table<'a> {
    fn parse(csv: &'a str) -> Result<Table<'a>> {
        let mut lines = csv.lines().enumerate();
        let (_, header_line) = lines
            .next()
            .ok_or(Error::Parse { line: 1, message: "empty CSV".into() })?;
        let header: Vec<&str> = header_line.split(',').collect();
        let mut rows = Vec::new();
        for (idx, line) in lines {
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != header.len() {
                return Err(Error::Parse {
                    line: idx + 1,
                    message: format!(
                        "expected {} fields, got {}",
                        header.len(),
                        fields.len()
                    ),
                });
            }
            rows.push((idx + 1, fields));
        }
        Ok(Table { header, rows })
    }

    fn col(&self, name: &str) -> Result<usize> {
        self.header.iter().position(|&h| h == name).ok_or_else(|| Error::Parse {
            line: 1,
            message: format!("missing CSV column `{name}`"),
        })
    }
}

fn parse_field_f64(line: usize, name: &str, raw: &str) -> Result<f64> {
    raw.parse::<f64>().map_err(|_| Error::Parse {
        line,
        message: format!("cannot parse `{raw}` in column `{name}` as a number"),
    })
}

/// Accumulates (sum, count) keyed by (group, x) in first-appearance group
/// order, then returns per-group mean series sorted by x.
struct MeanAccumulator {
    groups: Vec<(String, Vec<(f64, f64, usize)>)>,
}

impl MeanAccumulator {
    fn new() -> Self {
        MeanAccumulator { groups: Vec::new() }
    }

    fn add(&mut self, group: &str, x: f64, y: f64) {
        let entry = match self.groups.iter_mut().find(|(g, _)| g == group) {
            Some((_, pts)) => pts,
            None => {
                self.groups.push((group.to_string(), Vec::new()));
                &mut self.groups.last_mut().unwrap().1
            }
        };
        match entry.iter_mut().find(|(px, _, _)| *px == x) {
            Some((_, sum, count)) => {
                *sum += y;
                *count += 1;
            }
            None => entry.push((x, y, 1)),
        }
    }

    fn into_series(self) -> Vec<Series> {
        self.groups
            .into_iter()
            .map(|(label, mut pts)| {
                pts.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
                Series {
                    label,
                    points: pts
                        .into_iter()
                        .map(|(x, sum, count)| (x, sum / count as f64))
                        .collect(),
                }
            })
            .collect()
    }
}

/// Per-model mean of `value_column` against attacker count, from a result
/// CSV. Rows flagged `solver_error` or with an empty value field are
/// skipped (capped-iteration rows still carry valid measurements and are
/// kept); models appear in first-appearance order.
pub fn mean_series_by_model(csv: &str, value_column: &str) -> Result<Vec<Series>> {
    let table = Table::parse(csv)?;
    let (c_model, c_ne, c_status) =
        (table.col("model")?, table.col("n_e")?, table.col("status")?);
    let c_value = table.col(value_column)?;
    let mut acc = MeanAccumulator::new();
    for (line, fields) in &table.rows {
        if fields[c_status] == "solver_error" || fields[c_value].is_empty() {
            continue;
        }
        let n_e = parse_field_f64(*line, "n_e", fields[c_ne])?;
        let value = parse_field_f64(*line, value_column, fields[c_value])?;
        acc.add(fields[c_model], n_e, value);
    }
    Ok(acc.into_series())
}

/// Mean of several value columns against attacker count for one model,
/// one series per column, labeled by the column name.
pub fn mean_series_of_columns(
    csv: &str,
    model: &str,
    value_columns: &[&str],
) -> Result<Vec<Series>> {
    let table = Table::parse(csv)?;
    let (c_model, c_ne, c_status) =
        (table.col("model")?, table.col("n_e")?, table.col("status")?);
    let mut acc = MeanAccumulator::new();
    for column in value_columns {
        let c_value = table.col(column)?;
        for (line, fields) in &table.rows {
            if fields[c_model] != model
                || fields[c_status] == "solver_error"
                || fields[c_value].is_empty()
            {
                continue;
            }
            let n_e = parse_field_f64(*line, "n_e", fields[c_ne])?;
            let value = parse_field_f64(*line, column, fields[c_value])?;
            acc.add(column, n_e, value);
        }
    }
    Ok(acc.into_series())
}

/// Chart for the attack-sweep scenario: mean total RMSE per model against
/// the number of attacker columns.
pub fn figure1_svg(rows_csv: &str) -> Result<String> {
    let series = mean_series_by_model(rows_csv, "rmse_total")?;
    line_chart(
        "Recovery error vs attacker count",
        "attacker columns",
        "mean total RMSE",
        &series,
    )
}

/// Chart for the error-split scenario: mean honest-block and attacker-block
/// RMSE of the mass model against the number of attacker columns.
pub fn figure2_svg(rows_csv: &str) -> Result<String> {
    let series = mean_series_of_columns(rows_csv, "mass", &["rmse_y", "rmse_e"])?;
    line_chart(
        "Error split under mass attacks",
        "attacker columns",
        "mean block RMSE",
        &series,
    )
}
