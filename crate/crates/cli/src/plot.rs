use std::path::Path;

use plotters::prelude::*;

use crate::table::Table;
use iclbench_core::{Error, Result};

const PANEL_W: u32 = 420;
const PANEL_H: u32 = 300;

/// How a long-format table maps onto panels, series and axes.
#[derive(Debug, Clone, PartialEq)]
pub struct PlotSpec {
    pub title: String,
    /// One panel per distinct value of this column.
    pub panel: Option<String>,
    /// One line per distinct value of this column (times each `ys` column).
    pub series: Option<String>,
    pub x: String,
    pub ys: Vec<String>,
    pub log_y: bool,
}

impl PlotSpec {
    pub fn new(title: impl Into<String>, x: &str, ys: &[&str]) -> Self {
        Self {
            title: title.into(),
            panel: None,
            series: None,
            x: x.into(),
            ys: ys.iter().map(|s| s.to_string()).collect(),
            log_y: false,
        }
    }

    pub fn panel(mut self, col: &str) -> Self {
        self.panel = Some(col.into());
        self
    }

    pub fn series(mut self, col: &str) -> Self {
        self.series = Some(col.into());
        self
    }

    pub fn log_y(mut self) -> Self {
        self.log_y = true;
        self
    }

    /// Recognizes the tables this tool writes from their header.
    pub fn infer(table: &Table, title: &str) -> Result<Self> {
        let spec = if table.has(&["learner_id", "scenario_id", "t", "mse"]) {
            Self::new(title, "t", &["mse"]).panel("scenario_id").series("learner_id").log_y()
        } else if table.has(&["learner_id", "scenario_id", "t", "spd"]) {
            Self::new(title, "t", &["spd"]).panel("scenario_id").series("learner_id").log_y()
        } else if table.has(&["learner_id", "Q", "tau", "rho"]) {
            Self::new(title, "tau", &["rho"]).panel("Q").series("learner_id")
        } else if table.has(&["learner_id", "Q", "mpr"]) {
            Self::new(title, "Q", &["mpr"]).series("learner_id")
        } else if table.has(&["t", "bayes_risk", "excess_risk"]) {
            Self::new(title, "t", &["bayes_risk", "excess_risk"])
        } else {
            return Err(Error::data(format!("unrecognized table columns {:?}", table.columns)));
        };
        Ok(spec)
    }
}

struct Panel {
    name: String,
    lines: Vec<(String, Vec<(f64, f64)>)>,
}

fn first_seen<'a>(items: impl Iterator<Item = &'a str>) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    for s in items {
        if !out.iter().any(|o| o == s) {
            out.push(s.to_string());
        }
    }
    out
}

fn collect(table: &Table, spec: &PlotSpec) -> Result<Vec<Panel>> {
    let col = |name: &str| {
        table
            .column(name)
            .ok_or_else(|| Error::data(format!("table has no column `{name}`")))
    };
    let xc = col(&spec.x)?;
    let ycs = spec.ys.iter().map(|y| col(y)).collect::<Result<Vec<_>>>()?;
    let pc = spec.panel.as_deref().map(col).transpose()?;
    let sc = spec.series.as_deref().map(col).transpose()?;
    let panels = match pc {
        Some(c) => first_seen(table.rows.iter().map(|r| r[c].as_str())),
        None => vec![String::new()],
    };
    let series = match sc {
        Some(c) => first_seen(table.rows.iter().map(|r| r[c].as_str())),
        None => vec![String::new()],
    };
    let mut out = Vec::with_capacity(panels.len());
    for p in &panels {
        let mut lines = Vec::new();
        for s in &series {
            for (y_name, &yc) in spec.ys.iter().zip(&ycs) {
                let pts: Vec<(f64, f64)> = table
                    .rows
                    .iter()
                    .filter(|r| pc.is_none_or(|c| &r[c] == p) && sc.is_none_or(|c| &r[c] == s))
                    .filter_map(|r| Some((r[xc].parse::<f64>().ok()?, r[yc].parse::<f64>().ok()?)))
                    .filter(|&(x, y)| x.is_finite() && y.is_finite() && (!spec.log_y || y > 0.0))
                    .map(|(x, y)| (x, if spec.log_y { y.log10() } else { y }))
                    .collect();
                if pts.is_empty() {
                    continue;
                }
                let label = match (s.is_empty(), spec.ys.len() > 1) {
                    (true, _) => y_name.clone(),
                    (false, false) => s.clone(),
                    (false, true) => format!("{s} {y_name}"),
                };
                lines.push((label, pts));
            }
        }
        let name = match &spec.panel {
            Some(c) => format!("{c} = {p}"),
            None => String::new(),
        };
        out.push(Panel { name, lines });
    }
    Ok(out)
}

fn bounds(panel: &Panel) -> ((f64, f64), (f64, f64)) {
    let pts = panel.lines.iter().flat_map(|(_, p)| p.iter());
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in pts {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if !x0.is_finite() {
        return ((0.0, 1.0), (0.0, 1.0));
    }
    let pad = |a: f64, b: f64| if b > a { (a, b) } else { (a - 0.5, b + 0.5) };
    let (y0, y1) = pad(y0, y1);
    let m = 0.05 * (y1 - y0);
    (pad(x0, x1), (y0 - m, y1 + m))
}

/// Renders `table` as an SVG grid of line charts.
pub fn render(table: &Table, spec: &PlotSpec, path: &Path) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let panels = collect(table, spec)?;
    let cols = (panels.len() as f64).sqrt().ceil() as usize;
    let rows = panels.len().div_ceil(cols);
    let size = (PANEL_W * cols as u32, PANEL_H * rows as u32 + 30);
    let fail = |e: String| Error::data(format!("{}: plotting failed: {e}", path.display()));
    let root = SVGBackend::new(path, size).into_drawing_area();
    root.fill(&WHITE).map_err(|e| fail(e.to_string()))?;
    let root = root
        .titled(&spec.title, ("sans-serif", 18))
        .map_err(|e| fail(e.to_string()))?;
    let y_desc = if spec.log_y {
        format!("log10 {}", spec.ys.join(", "))
    } else {
        spec.ys.join(", ")
    };
    for (area, panel) in root.split_evenly((rows, cols)).iter().zip(&panels) {
        let ((x0, x1), (y0, y1)) = bounds(panel);
        let mut chart = ChartBuilder::on(area)
            .caption(&panel.name, ("sans-serif", 14))
            .margin(8)
            .x_label_area_size(28)
            .y_label_area_size(48)
            .build_cartesian_2d(x0..x1, y0..y1)
            .map_err(|e| fail(e.to_string()))?;
        chart
            .configure_mesh()
            .x_desc(spec.x.as_str())
            .y_desc(y_desc.as_str())
            .draw()
            .map_err(|e| fail(e.to_string()))?;
        for (k, (label, pts)) in panel.lines.iter().enumerate() {
            let color = Palette99::pick(k).to_rgba();
            chart
                .draw_series(LineSeries::new(pts.iter().copied(), color.stroke_width(2)))
                .map_err(|e| fail(e.to_string()))?
                .label(label.as_str())
                .legend(move |(x, y)| PathElement::new(vec![(x, y), (x + 16, y)], color.stroke_width(2)));
        }
        if !panel.lines.is_empty() {
            chart
                .configure_series_labels()
                .background_style(WHITE.mix(0.8))
                .border_style(BLACK)
                .label_font(("sans-serif", 11))
                .draw()
                .map_err(|e| fail(e.to_string()))?;
        }
    }
    root.present().map_err(|e| fail(e.to_string()))
}
