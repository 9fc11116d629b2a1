//! Deterministic SVG rendering of the CSV tables: fixed viewport, no
//! timestamps, fixed-precision coordinates, so repeated invocations are
//! byte-identical.

use crate::{CliError, PlotArgs, PlotKindArg};
use std::fmt::Write as _;
use std::path::Path;

const WIDTH: f64 = 900.0;
const HEIGHT: f64 = 620.0;
const MARGIN_L: f64 = 72.0;
const MARGIN_R: f64 = 24.0;
const MARGIN_T: f64 = 40.0;
const MARGIN_B: f64 = 56.0;

const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"];

struct Csv {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Csv {
    fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)?;
        let mut lines = text.lines();
        let header = lines
            .next()
            .ok_or_else(|| CliError::Usage(format!("{}: empty csv", path.display())))?
            .split(',')
            .map(|s| s.trim().to_string())
            .collect();
        let rows = lines
            .filter(|l| !l.trim().is_empty())
            .map(|l| l.split(',').map(|s| s.trim().to_string()).collect())
            .collect();
        Ok(Self { header, rows })
    }

    fn column(&self, name: &str) -> Result<usize, CliError> {
        self.header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| CliError::Usage(format!("missing column: {name}")))
    }

    fn f64_at(&self, row: &[String], col: usize) -> Result<f64, CliError> {
        row.get(col)
            .and_then(|s| s.parse::<f64>().ok())
            .ok_or_else(|| CliError::Usage(format!("non-numeric value in column {col}")))
    }
}

struct Series {
    name: String,
    points: Vec<(f64, f64)>,
}

/// (x, value) pairs of an analytic overlay file.
fn load_xy(path: &Path) -> Result<Series, CliError> {
    let csv = Csv::load(path)?;
    let xcol = 0;
    let ycol = if csv.header.len() > 1 { 1 } else { return Err(CliError::Usage("overlay needs two columns".into())) };
    let mut points = Vec::with_capacity(csv.rows.len());
    for row in &csv.rows {
        points.push((csv.f64_at(row, xcol)?, csv.f64_at(row, ycol)?));
    }
    let name = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    Ok(Series { name, points })
}

pub fn cmd_plot(args: PlotArgs) -> Result<(), CliError> {
    let svg = match args.kind {
        PlotKindArg::Ratio2d => render_ratio2d(&args)?,
        PlotKindArg::Marginal => render_lines(&args, marginal_series(&args)?, false)?,
        PlotKindArg::Spacing => render_lines(&args, spacing_series(&args)?, false)?,
        PlotKindArg::SmallSLoglog => render_lines(&args, loglog_series(&args)?, true)?,
        PlotKindArg::DensityRadial => render_lines(&args, density_series(&args)?, false)?,
        PlotKindArg::Analytic => {
            let mut series = vec![load_xy(&args.input)?];
            for o in &args.overlay {
                series.push(load_xy(o)?);
            }
            render_lines(&args, series, false)?
        }
    };
    std::fs::write(&args.out, svg)?;
    Ok(())
}

fn marginal_series(args: &PlotArgs) -> Result<Vec<Series>, CliError> {
    let csv = Csv::load(&args.input)?;
    let (rc, kc) = (csv.column("region")?, csv.column("kind")?);
    let (cc, dc) = (csv.column("center")?, csv.column("density")?);
    let mut points = Vec::new();
    for row in &csv.rows {
        if row[rc] == args.region && row[kc] == args.which {
            points.push((csv.f64_at(row, cc)?, csv.f64_at(row, dc)?));
        }
    }
    if points.is_empty() {
        return Err(CliError::Usage(format!(
            "no rows for region={} kind={}",
            args.region, args.which
        )));
    }
    let mut series = vec![Series { name: format!("{} {}", args.region, args.which), points }];
    for o in &args.overlay {
        series.push(load_xy(o)?);
    }
    Ok(series)
}

fn spacing_series(args: &PlotArgs) -> Result<Vec<Series>, CliError> {
    let csv = Csv::load(&args.input)?;
    let (rc, kc) = (csv.column("region")?, csv.column("kind")?);
    let (cc, dc) = (csv.column("center")?, csv.column("density")?);
    let mut series = Vec::new();
    for kind in ["nn", "nnn"] {
        let mut points = Vec::new();
        for row in &csv.rows {
            if row[rc] == args.region && row[kc] == kind {
                points.push((csv.f64_at(row, cc)?, csv.f64_at(row, dc)?));
            }
        }
        if !points.is_empty() {
            series.push(Series { name: format!("{} {}", args.region, kind), points });
        }
    }
    if series.is_empty() {
        return Err(CliError::Usage(format!("no spacing rows for region={}", args.region)));
    }
    for o in &args.overlay {
        series.push(load_xy(o)?);
    }
    Ok(series)
}

fn density_series(args: &PlotArgs) -> Result<Vec<Series>, CliError> {
    let csv = Csv::load(&args.input)?;
    let (rc, dc) = (csv.column("r")?, csv.column("density")?);
    let mut points = Vec::new();
    for row in &csv.rows {
        points.push((csv.f64_at(row, rc)?, csv.f64_at(row, dc)?));
    }
    let mut series = vec![Series { name: "radial density".into(), points }];
    for o in &args.overlay {
        series.push(load_xy(o)?);
    }
    Ok(series)
}

/// Cumulative NN distribution on log-log axes, from the binned spacing
/// densities, with an optional power-law guide line.
fn loglog_series(args: &PlotArgs) -> Result<Vec<Series>, CliError> {
    let csv = Csv::load(&args.input)?;
    let (rc, kc) = (csv.column("region")?, csv.column("kind")?);
    let (cc, dc) = (csv.column("center")?, csv.column("density")?);
    let mut centers = Vec::new();
    let mut densities = Vec::new();
    for row in &csv.rows {
        if row[rc] == args.region && row[kc] == "nn" {
            centers.push(csv.f64_at(row, cc)?);
            densities.push(csv.f64_at(row, dc)?);
        }
    }
    if centers.len() < 2 {
        return Err(CliError::Usage(format!("no nn rows for region={}", args.region)));
    }
    let ds = centers[1] - centers[0];
    let mut cum = 0.0;
    let mut points = Vec::new();
    for (s, d) in centers.iter().zip(&densities) {
        cum += d * ds;
        if *s > 0.0 && cum > 0.0 && *s <= 1.0 {
            points.push((s.log10(), cum.log10()));
        }
    }
    let mut series = vec![Series { name: format!("{} cumulative", args.region), points }];
    if let Some(slope) = args.guide_slope {
        // anchor the guide at the last cumulative point
        if let Some(&(x1, y1)) = series[0].points.last() {
            let x0 = series[0].points.first().map(|p| p.0).unwrap_or(x1 - 2.0);
            let guide = vec![(x0, y1 - slope * (x1 - x0)), (x1, y1)];
            series.push(Series { name: format!("slope {slope}"), points: guide });
        }
    }
    for o in &args.overlay {
        let s = load_xy(o)?;
        let logged = s
            .points
            .iter()
            .filter(|(x, y)| *x > 0.0 && *y > 0.0)
            .map(|(x, y)| (x.log10(), y.log10()))
            .collect();
        series.push(Series { name: s.name, points: logged });
    }
    Ok(series)
}

fn nice_ticks(lo: f64, hi: f64, target: usize) -> Vec<f64> {
    if !(hi > lo) {
        return vec![lo];
    }
    let span = hi - lo;
    let raw_step = span / target as f64;
    let mag = 10f64.powf(raw_step.log10().floor());
    let norm = raw_step / mag;
    let step = if norm < 1.5 {
        mag
    } else if norm < 3.5 {
        2.0 * mag
    } else if norm < 7.5 {
        5.0 * mag
    } else {
        10.0 * mag
    };
    let mut t = (lo / step).ceil() * step;
    let mut ticks = Vec::new();
    while t <= hi + step * 1e-9 {
        ticks.push(t);
        t += step;
    }
    ticks
}

fn fmt_tick(v: f64) -> String {
    if v == 0.0 {
        "0".into()
    } else if v.abs() >= 0.01 && v.abs() < 10000.0 {
        let s = format!("{v:.3}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        format!("{v:.1e}")
    }
}

fn render_lines(args: &PlotArgs, series: Vec<Series>, loglog: bool) -> Result<String, CliError> {
    let (mut xmin, mut xmax) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut ymin, mut ymax) = (f64::INFINITY, f64::NEG_INFINITY);
    for s in &series {
        for &(x, y) in &s.points {
            xmin = xmin.min(x);
            xmax = xmax.max(x);
            ymin = ymin.min(y);
            ymax = ymax.max(y);
        }
    }
    if !(xmin.is_finite() && ymin.is_finite()) {
        return Err(CliError::Numeric("nothing to plot".into()));
    }
    if ymin > 0.0 && !loglog {
        ymin = 0.0;
    }
    let pad = 0.02 * (ymax - ymin).max(1e-300);
    ymax += pad;
    if loglog {
        ymin -= pad;
    }

    let px = |x: f64| MARGIN_L + (x - xmin) / (xmax - xmin) * (WIDTH - MARGIN_L - MARGIN_R);
    let py = |y: f64| HEIGHT - MARGIN_B - (y - ymin) / (ymax - ymin) * (HEIGHT - MARGIN_T - MARGIN_B);

    let mut svg = svg_open(args);
    draw_axes(&mut svg, xmin, xmax, ymin, ymax, &px, &py);
    for (i, s) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let mut d = String::new();
        for &(x, y) in &s.points {
            let _ = write!(d, "{:.2},{:.2} ", px(x), py(y));
        }
        let _ = writeln!(
            svg,
            "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.6\" points=\"{}\"/>",
            d.trim_end()
        );
        let ly = MARGIN_T + 16.0 * i as f64 + 4.0;
        let _ = writeln!(
            svg,
            "<rect x=\"{:.2}\" y=\"{:.2}\" width=\"14\" height=\"4\" fill=\"{color}\"/>",
            WIDTH - MARGIN_R - 170.0,
            ly
        );
        let _ = writeln!(
            svg,
            "<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"12\" font-family=\"monospace\">{}</text>",
            WIDTH - MARGIN_R - 150.0,
            ly + 6.0,
            xml_escape(&s.name)
        );
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

fn render_ratio2d(args: &PlotArgs) -> Result<String, CliError> {
    let csv = Csv::load(&args.input)?;
    let (rc, xc) = (csv.column("region")?, csv.column("x")?);
    let (yc, dc) = (csv.column("y")?, csv.column("density")?);
    let mut cells = Vec::new();
    for row in &csv.rows {
        if row[rc] == args.region {
            cells.push((csv.f64_at(row, xc)?, csv.f64_at(row, yc)?, csv.f64_at(row, dc)?));
        }
    }
    if cells.is_empty() {
        return Err(CliError::Usage(format!("no ratio cells for region={}", args.region)));
    }
    let grid = (cells.len() as f64).sqrt().round() as usize;
    // downsample to at most 120x120 drawn rects
    let factor = grid.div_ceil(120);
    let coarse = grid / factor;
    let mut acc = vec![0.0f64; coarse * coarse];
    for (idx, &(_x, _y, d)) in cells.iter().enumerate() {
        let ix = (idx % grid) / factor;
        let iy = (idx / grid) / factor;
        if ix < coarse && iy < coarse {
            acc[iy * coarse + ix] += d;
        }
    }
    let vmax = acc.iter().cloned().fold(0.0f64, f64::max).max(1e-300);
    let plot_w = WIDTH - MARGIN_L - MARGIN_R;
    let plot_h = HEIGHT - MARGIN_T - MARGIN_B;
    let side = plot_w.min(plot_h);
    let cell_px = side / coarse as f64;
    let mut svg = svg_open(args);
    for iy in 0..coarse {
        for ix in 0..coarse {
            let v = acc[iy * coarse + ix] / vmax;
            let (r, g, b) = colormap(v);
            let x = MARGIN_L + ix as f64 * cell_px;
            // svg y grows downward; ratio grid y grows upward
            let y = MARGIN_T + (coarse - 1 - iy) as f64 * cell_px;
            let _ = writeln!(
                svg,
                "<rect x=\"{x:.2}\" y=\"{y:.2}\" width=\"{cell_px:.2}\" height=\"{cell_px:.2}\" fill=\"rgb({r},{g},{b})\"/>"
            );
        }
    }
    let _ = writeln!(
        svg,
        "<rect x=\"{MARGIN_L:.2}\" y=\"{MARGIN_T:.2}\" width=\"{side:.2}\" height=\"{side:.2}\" fill=\"none\" stroke=\"#333\"/>"
    );
    let _ = writeln!(
        svg,
        "<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"12\" font-family=\"monospace\">unit disc, region {}</text>",
        MARGIN_L,
        HEIGHT - 20.0,
        xml_escape(&args.region)
    );
    svg.push_str("</svg>\n");
    Ok(svg)
}

fn svg_open(args: &PlotArgs) -> String {
    let mut svg = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
    );
    if let Some(t) = &args.title {
        let _ = writeln!(
            svg,
            "<text x=\"{:.2}\" y=\"24\" font-size=\"15\" font-family=\"monospace\">{}</text>",
            MARGIN_L,
            xml_escape(t)
        );
    }
    svg
}

fn draw_axes(
    svg: &mut String,
    xmin: f64,
    xmax: f64,
    ymin: f64,
    ymax: f64,
    px: &dyn Fn(f64) -> f64,
    py: &dyn Fn(f64) -> f64,
) {
    let _ = writeln!(
        svg,
        "<rect x=\"{MARGIN_L:.2}\" y=\"{MARGIN_T:.2}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"none\" stroke=\"#333\"/>",
        WIDTH - MARGIN_L - MARGIN_R,
        HEIGHT - MARGIN_T - MARGIN_B
    );
    for t in nice_ticks(xmin, xmax, 6) {
        let x = px(t);
        let _ = writeln!(
            svg,
            "<line x1=\"{x:.2}\" y1=\"{:.2}\" x2=\"{x:.2}\" y2=\"{:.2}\" stroke=\"#999\" stroke-width=\"0.5\"/>",
            HEIGHT - MARGIN_B,
            MARGIN_T
        );
        let _ = writeln!(
            svg,
            "<text x=\"{x:.2}\" y=\"{:.2}\" font-size=\"11\" font-family=\"monospace\" text-anchor=\"middle\">{}</text>",
            HEIGHT - MARGIN_B + 16.0,
            fmt_tick(t)
        );
    }
    for t in nice_ticks(ymin, ymax, 6) {
        let y = py(t);
        let _ = writeln!(
            svg,
            "<line x1=\"{MARGIN_L:.2}\" y1=\"{y:.2}\" x2=\"{:.2}\" y2=\"{y:.2}\" stroke=\"#999\" stroke-width=\"0.5\"/>",
            WIDTH - MARGIN_R
        );
        let _ = writeln!(
            svg,
            "<text x=\"{:.2}\" y=\"{y:.2}\" font-size=\"11\" font-family=\"monospace\" text-anchor=\"end\">{}</text>",
            MARGIN_L - 6.0,
            fmt_tick(t)
        );
    }
}

fn colormap(v: f64) -> (u8, u8, u8) {
    // dark blue -> yellow through teal/green
    let stops = [
        (0.0, (13u8, 8u8, 135u8)),
        (0.25, (84, 2, 163)),
        (0.5, (190, 54, 124)),
        (0.75, (248, 135, 67)),
        (1.0, (240, 249, 33)),
    ];
    let v = v.clamp(0.0, 1.0);
    for w in stops.windows(2) {
        let (t0, c0) = w[0];
        let (t1, c1) = w[1];
        if v <= t1 {
            let f = (v - t0) / (t1 - t0);
            let mix = |a: u8, b: u8| (a as f64 + f * (b as f64 - a as f64)).round() as u8;
            return (mix(c0.0, c1.0), mix(c0.1, c1.1), mix(c0.2, c1.2));
        }
    }
    stops[4].1
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
