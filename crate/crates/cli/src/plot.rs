//! Deterministic SVG charts built from the CSV artifacts.

use std::fmt::Write as _;
use std::path::Path;

use crate::CliError;

pub const MSE_COLUMNS: [&str; 4] = ["n", "k", "t", "mse"];
pub const SUP_COLUMNS: [&str; 8] = ["n", "k", "eps", "p_hat", "ci_lo", "ci_hi", "replicates", "seed"];
pub const MODULUS_COLUMNS: [&str; 7] = ["n", "k", "t", "s", "lhs", "bound", "margin"];

/// Numeric rows of a CSV whose header must match `columns` exactly. An empty
/// file has no rows.
pub fn read_table(path: &Path, columns: &[&str]) -> Result<Vec<Vec<f64>>, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("reading {}: {e}", path.display())))?;
    if text.trim().is_empty() {
        return Ok(Vec::new());
    }
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let header = reader
        .headers()
        .map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?
        .clone();
    if header.iter().ne(columns.iter().copied()) {
        return Err(CliError::Validation(format!(
            "{}: expected columns {}, found {}",
            path.display(),
            columns.join(","),
            header.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut rows = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record.map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
        let row = record
            .iter()
            .map(|f| f.trim().parse::<f64>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| CliError::Validation(format!("{} row {}: {e}", path.display(), line + 1)))?;
        rows.push(row);
    }
    Ok(rows)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
    pub whisker: Option<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub name: String,
    pub points: Vec<Point>,
    pub connect: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Chart {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub log_y: bool,
    /// Fixed linear y range instead of fitting the data.
    pub y_range: Option<(f64, f64)>,
    /// Categorical x tick labels at 0, 1, ...; numeric ticks when empty.
    pub categories: Vec<String>,
    pub series: Vec<Series>,
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 150.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];
/// Values below this are drawn at the floor of a log axis.
const LOG_FLOOR: f64 = 1e-20;

struct Axis {
    lo: f64,
    hi: f64,
    log: bool,
}

impl Axis {
    fn fit(values: impl Iterator<Item = f64>, log: bool, pad: f64) -> Self {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for v in values.filter(|v| v.is_finite()) {
            let v = if log { v.max(LOG_FLOOR).log10() } else { v };
            lo = lo.min(v);
            hi = hi.max(v);
        }
        if !lo.is_finite() {
            return Self { lo: 0.0, hi: 1.0, log };
        }
        if log {
            lo = lo.floor();
            hi = hi.ceil();
        }
        if hi - lo < 1e-12 {
            lo -= 0.5;
            hi += 0.5;
        } else if !log {
            let m = pad * (hi - lo);
            lo -= m;
            hi += m;
        }
        Self { lo, hi, log }
    }

    fn unit(&self, v: f64) -> f64 {
        let v = if self.log { v.max(LOG_FLOOR).log10() } else { v };
        (v - self.lo) / (self.hi - self.lo)
    }

    fn ticks(&self) -> Vec<(f64, String)> {
        if self.log {
            let step = ((self.hi - self.lo) / 8.0).ceil().max(1.0) as i64;
            (self.lo as i64..=self.hi as i64)
                .step_by(step as usize)
                .map(|e| ((e as f64 - self.lo) / (self.hi - self.lo), format!("1e{e}")))
                .collect()
        } else {
            (0..=4)
                .map(|i| {
                    let u = i as f64 / 4.0;
                    (u, format!("{:.3}", self.lo + u * (self.hi - self.lo)))
                })
                .collect()
        }
    }
}

fn px(u: f64) -> f64 {
    LEFT + u * (WIDTH - LEFT - RIGHT)
}

fn py(u: f64) -> f64 {
    HEIGHT - BOTTOM - u * (HEIGHT - TOP - BOTTOM)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

impl Chart {
    pub fn to_svg(&self) -> String {
        let points = || self.series.iter().flat_map(|s| s.points.iter());
        let xs = Axis::fit(points().map(|p| p.x), false, 0.05);
        let xs = if self.categories.is_empty() {
            xs
        } else {
            Axis {
                lo: -0.5,
                hi: self.categories.len().max(1) as f64 - 0.5,
                log: false,
            }
        };
        let ys = match self.y_range {
            Some((lo, hi)) => Axis { lo, hi, log: false },
            None => Axis::fit(
                points().flat_map(|p| {
                    let (a, b) = p.whisker.unwrap_or((p.y, p.y));
                    [p.y, a, b]
                }),
                self.log_y,
                0.05,
            ),
        };
        let mut s = String::new();
        let w = &mut s;
        writeln!(
            w,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
        )
        .unwrap();
        writeln!(w, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#).unwrap();
        writeln!(
            w,
            r#"<text x="{:.1}" y="24" text-anchor="middle" font-size="15">{}</text>"#,
            (LEFT + WIDTH - RIGHT) / 2.0,
            escape(&self.title)
        )
        .unwrap();
        writeln!(
            w,
            r#"<path d="M{:.1},{:.1} V{:.1} H{:.1}" fill="none" stroke="black"/>"#,
            px(0.0),
            py(1.0),
            py(0.0),
            px(1.0)
        )
        .unwrap();
        for (u, label) in ys.ticks() {
            writeln!(
                w,
                r##"<line x1="{:.1}" y1="{y:.1}" x2="{:.1}" y2="{y:.1}" stroke="#ddd"/><text x="{:.1}" y="{:.1}" text-anchor="end">{label}</text>"##,
                px(0.0),
                px(1.0),
                px(0.0) - 6.0,
                py(u) + 4.0,
                y = py(u)
            )
            .unwrap();
        }
        let x_ticks: Vec<(f64, String)> = if self.categories.is_empty() {
            xs.ticks()
        } else {
            self.categories
                .iter()
                .enumerate()
                .map(|(i, c)| (xs.unit(i as f64), escape(c)))
                .collect()
        };
        for (u, label) in x_ticks {
            writeln!(
                w,
                r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{label}</text>"#,
                px(u),
                py(0.0) + 18.0
            )
            .unwrap();
        }
        writeln!(
            w,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
            (LEFT + WIDTH - RIGHT) / 2.0,
            HEIGHT - 16.0,
            escape(&self.x_label)
        )
        .unwrap();
        writeln!(
            w,
            r#"<text x="18" y="{:.1}" text-anchor="middle" transform="rotate(-90 18 {:.1})">{}</text>"#,
            (TOP + HEIGHT - BOTTOM) / 2.0,
            (TOP + HEIGHT - BOTTOM) / 2.0,
            escape(&self.y_label)
        )
        .unwrap();
        for (i, series) in self.series.iter().filter(|s| !s.points.is_empty()).enumerate() {
            let color = COLORS[i % COLORS.len()];
            let at = |p: &Point| (px(xs.unit(p.x)), py(ys.unit(p.y)));
            if series.connect && series.points.len() > 1 {
                let path: Vec<String> = series
                    .points
                    .iter()
                    .map(|p| {
                        let (x, y) = at(p);
                        format!("{x:.1},{y:.1}")
                    })
                    .collect();
                writeln!(w, r#"<polyline points="{}" fill="none" stroke="{color}"/>"#, path.join(" ")).unwrap();
            }
            for p in &series.points {
                let (x, y) = at(p);
                if let Some((lo, hi)) = p.whisker {
                    let (y0, y1) = (py(ys.unit(lo)), py(ys.unit(hi)));
                    writeln!(
                        w,
                        r#"<path d="M{x:.1},{y0:.1} V{y1:.1} M{:.1},{y0:.1} H{:.1} M{:.1},{y1:.1} H{:.1}" stroke="{color}"/>"#,
                        x - 4.0,
                        x + 4.0,
                        x - 4.0,
                        x + 4.0
                    )
                    .unwrap();
                }
                writeln!(w, r#"<circle cx="{x:.1}" cy="{y:.1}" r="3" fill="{color}"/>"#).unwrap();
            }
            let ly = TOP + 10.0 + 18.0 * i as f64;
            writeln!(
                w,
                r#"<circle cx="{:.1}" cy="{ly:.1}" r="4" fill="{color}"/><text x="{:.1}" y="{:.1}">{}</text>"#,
                WIDTH - RIGHT + 16.0,
                WIDTH - RIGHT + 26.0,
                ly + 4.0,
                escape(&series.name)
            )
            .unwrap();
        }
        s.push_str("</svg>\n");
        s
    }
}

/// Schemes in order of first appearance, keyed by `(n, k)`.
fn scheme_order(rows: &[Vec<f64>]) -> Vec<(u64, u64)> {
    let mut out: Vec<(u64, u64)> = Vec::new();
    for r in rows {
        let key = (r[0] as u64, r[1] as u64);
        if !out.contains(&key) {
            out.push(key);
        }
    }
    out
}

fn labels(schemes: &[(u64, u64)]) -> Vec<String> {
    schemes.iter().map(|(n, k)| format!("({n},{k})")).collect()
}

/// Largest MSE over the grid for each scheme, on a log axis.
pub fn mse_chart(rows: &[Vec<f64>]) -> Chart {
    let schemes = scheme_order(rows);
    let points = schemes
        .iter()
        .enumerate()
        .map(|(i, key)| Point {
            x: i as f64,
            y: rows
                .iter()
                .filter(|r| (r[0] as u64, r[1] as u64) == *key)
                .map(|r| r[3])
                .fold(0.0, f64::max),
            whisker: None,
        })
        .collect();
    Chart {
        title: "Mean-square truncation error".into(),
        x_label: "scheme (n, k)".into(),
        y_label: "max over grid of MSE".into(),
        log_y: true,
        y_range: None,
        categories: labels(&schemes),
        series: vec![Series {
            name: "max MSE".into(),
            points,
            connect: true,
        }],
    }
}

/// Exceedance estimates with Wilson intervals, one series per threshold.
pub fn sup_chart(rows: &[Vec<f64>]) -> Chart {
    let schemes = scheme_order(rows);
    let mut eps: Vec<f64> = Vec::new();
    for r in rows {
        if !eps.contains(&r[2]) {
            eps.push(r[2]);
        }
    }
    let series = eps
        .iter()
        .map(|&e| Series {
            name: format!("eps = {e}"),
            points: rows
                .iter()
                .filter(|r| r[2] == e)
                .map(|r| Point {
                    x: schemes.iter().position(|k| *k == (r[0] as u64, r[1] as u64)).unwrap() as f64,
                    y: r[3],
                    whisker: Some((r[4], r[5])),
                })
                .collect(),
            connect: true,
        })
        .collect();
    Chart {
        title: "Sup-norm exceedance probability".into(),
        x_label: "scheme (n, k)".into(),
        y_label: "p_hat (95% Wilson interval)".into(),
        log_y: false,
        y_range: Some((0.0, 1.0)),
        categories: labels(&schemes),
        series,
    }
}

/// Bound-to-increment margins against the time gap, one series per scheme.
pub fn modulus_chart(rows: &[Vec<f64>]) -> Chart {
    let schemes = scheme_order(rows);
    let series = schemes
        .iter()
        .map(|key| Series {
            name: format!("({},{})", key.0, key.1),
            points: rows
                .iter()
                .filter(|r| (r[0] as u64, r[1] as u64) == *key && r[6].is_finite())
                .map(|r| Point {
                    x: (r[2] - r[3]).abs(),
                    y: r[6],
                    whisker: None,
                })
                .collect(),
            connect: false,
        })
        .collect();
    Chart {
        title: "Modulus bound margins".into(),
        x_label: "|t - s|".into(),
        y_label: "bound / increment".into(),
        log_y: true,
        y_range: None,
        categories: Vec::new(),
        series,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_input_gives_empty_axes() {
        let svg = mse_chart(&[]).to_svg();
        assert!(svg.starts_with("<svg") && svg.ends_with("</svg>\n"));
        assert!(!svg.contains("<circle"));
        assert!(svg.contains("<path"));
    }

    #[test]
    fn single_row_has_one_point_with_whiskers() {
        let rows = vec![vec![1.0, 8.0, 0.5, 0.3, 0.28, 0.32, 2000.0, 1.0]];
        let svg = sup_chart(&rows).to_svg();
        // one data point plus one legend marker
        assert_eq!(svg.matches("<circle").count(), 2);
        assert_eq!(svg.matches(" H").count(), 2 + 1);
        assert!(svg.contains("(1,8)"));
    }

    #[test]
    fn charts_are_deterministic() {
        let rows = vec![
            vec![1.0, 8.0, 0.0, 1.0],
            vec![1.0, 8.0, 1.0, 0.5],
            vec![2.0, 16.0, 0.0, 1e-6],
            vec![6.0, 64.0, 0.0, 0.0],
        ];
        assert_eq!(mse_chart(&rows).to_svg(), mse_chart(&rows).to_svg());
        assert_eq!(mse_chart(&rows).series[0].points[0].y, 1.0);
    }

    #[test]
    fn schema_mismatch_is_a_validation_error() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("x.csv");
        std::fs::write(&p, "n,k,t\n1,2,3\n").unwrap();
        assert!(matches!(read_table(&p, &MSE_COLUMNS), Err(CliError::Validation(_))));
        std::fs::write(&p, "n,k,t,mse\n1,2,3,x\n").unwrap();
        assert!(matches!(read_table(&p, &MSE_COLUMNS), Err(CliError::Validation(_))));
        std::fs::write(&p, "").unwrap();
        assert!(read_table(&p, &MSE_COLUMNS).unwrap().is_empty());
        std::fs::write(&p, "n,k,t,mse\n1,2,3,inf\n").unwrap();
        assert_eq!(read_table(&p, &MSE_COLUMNS).unwrap()[0][3], f64::INFINITY);
    }
}
