//! SVG figures: per-step gap and speed of one trace, the sweep's score
//! surface and the score distribution.

use std::path::Path;

use plotters::prelude::*;

use crate::error::{Error, Result};
use crate::types::{Specs, Trace};

const SIZE: (u32, u32) = (800, 480);

fn draw_err<E: std::error::Error + Send + Sync + 'static>(path: &Path) -> impl Fn(E) -> Error + '_ {
    move |e| Error::io(path, std::io::Error::other(e.to_string()))
}

fn span(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    let pad = ((hi - lo) * 0.05).max(1e-3);
    (lo - pad, hi + pad)
}

/// Line chart of one or more `(label, points)` series over the step index.
pub fn line_chart(path: &Path, title: &str, y_label: &str, series: &[(&str, Vec<(f64, f64)>)]) -> Result<()> {
    let err = draw_err(path);
    let (x0, x1) = span(series.iter().flat_map(|(_, p)| p.iter().map(|q| q.0)));
    let (y0, y1) = span(series.iter().flat_map(|(_, p)| p.iter().map(|q| q.1)));
    let root = SVGBackend::new(path, SIZE).into_drawing_area();
    root.fill(&WHITE).map_err(&err)?;
    let mut chart = ChartBuilder::on(&root)
        .caption(title, ("sans-serif", 20))
        .margin(12)
        .x_label_area_size(36)
        .y_label_area_size(56)
        .build_cartesian_2d(x0..x1, y0..y1)
        .map_err(&err)?;
    chart
        .configure_mesh()
        .x_desc("step")
        .y_desc(y_label)
        .draw()
        .map_err(&err)?;
    for (i, (label, points)) in series.iter().enumerate() {
        let color = Palette99::pick(i).to_rgba();
        chart
            .draw_series(LineSeries::new(points.iter().copied(), color.stroke_width(2)))
            .map_err(&err)?
            .label(*label)
            .legend(move |(x, y)| PathElement::new(vec![(x, y), (x + 18, y)], color.stroke_width(2)));
    }
    if series.len() > 1 {
        chart
            .configure_series_labels()
            .background_style(WHITE.mix(0.8))
            .border_style(BLACK)
            .draw()
            .map_err(&err)?;
    }
    root.present().map_err(&err)?;
    Ok(())
}

pub fn gap_plot(path: &Path, trace: &Trace, specs: &Specs) -> Result<()> {
    let pts: Vec<(f64, f64)> = trace.gaps(specs).enumerate().map(|(i, g)| (i as f64, g)).collect();
    line_chart(path, "Distance between ego and agent", "bumper gap (m)", &[("gap", pts)])
}

pub fn velocity_plot(path: &Path, trace: &Trace) -> Result<()> {
    let ego = trace.steps.iter().enumerate().map(|(i, s)| (i as f64, s.ego.v)).collect();
    let agent = trace.steps.iter().enumerate().map(|(i, s)| (i as f64, s.agent.v)).collect();
    line_chart(path, "Vehicle speeds", "speed (m/s)", &[("ego", ego), ("agent", agent)])
}

fn score_color(s: f64) -> RGBColor {
    // 0.5 or less is blue, 1.0 is red.
    let t = ((s - 0.5) / 0.5).clamp(0.0, 1.0);
    let hsl = HSLColor((1.0 - t) * 0.66, 0.75, 0.5);
    let (r, g, b) = hsl.rgb();
    RGBColor(r, g, b)
}

/// Heat map of the mean best score per cell. `values[i][j]` belongs to
/// `dv[i]`, `dx[j]`; NaN cells are left blank.
pub fn score_surface(path: &Path, dv: &[f64], dx: &[f64], values: &[Vec<f64>]) -> Result<()> {
    let err = draw_err(path);
    let half = |xs: &[f64]| if xs.len() > 1 { (xs[1] - xs[0]) / 2.0 } else { 0.5 };
    let (hx, hv) = (half(dx), half(dv));
    let root = SVGBackend::new(path, SIZE).into_drawing_area();
    root.fill(&WHITE).map_err(&err)?;
    let mut chart = ChartBuilder::on(&root)
        .caption("Mean best score", ("sans-serif", 20))
        .margin(12)
        .x_label_area_size(36)
        .y_label_area_size(56)
        .build_cartesian_2d(
            (dx[0] - hx)..(dx[dx.len() - 1] + hx),
            (dv[0] - hv)..(dv[dv.len() - 1] + hv),
        )
        .map_err(&err)?;
    chart
        .configure_mesh()
        .disable_mesh()
        .x_desc("dX (m)")
        .y_desc("dV (km/h)")
        .draw()
        .map_err(&err)?;
    let mut cells = Vec::new();
    let mut labels = Vec::new();
    for (i, &v) in dv.iter().enumerate() {
        for (j, &x) in dx.iter().enumerate() {
            let s = values[i][j];
            if s.is_nan() {
                continue;
            }
            cells.push(Rectangle::new([(x - hx, v - hv), (x + hx, v + hv)], score_color(s).filled()));
            labels.push(Text::new(format!("{s:.2}"), (x - hx * 0.6, v + hv * 0.3), ("sans-serif", 11)));
        }
    }
    chart.draw_series(cells).map_err(&err)?;
    chart.draw_series(labels).map_err(&err)?;
    root.present().map_err(&err)?;
    Ok(())
}

/// One box per group.
pub fn score_boxplot(path: &Path, groups: &[(String, Vec<f64>)]) -> Result<()> {
    let err = draw_err(path);
    let labels: Vec<String> = groups.iter().map(|g| g.0.clone()).collect();
    let (lo, hi) = span(groups.iter().flat_map(|g| g.1.iter().copied()));
    let root = SVGBackend::new(path, SIZE).into_drawing_area();
    root.fill(&WHITE).map_err(&err)?;
    let mut chart = ChartBuilder::on(&root)
        .caption("Best score distribution", ("sans-serif", 20))
        .margin(12)
        .x_label_area_size(36)
        .y_label_area_size(56)
        .build_cartesian_2d(labels.as_slice().into_segmented(), (lo as f32)..(hi as f32))
        .map_err(&err)?;
    chart
        .configure_mesh()
        .x_desc("dV (km/h)")
        .y_desc("score")
        .draw()
        .map_err(&err)?;
    let boxes: Vec<_> = groups
        .iter()
        .zip(&labels)
        .filter(|(g, _)| !g.1.is_empty())
        .map(|(g, l)| Boxplot::new_vertical(SegmentValue::CenterOf(l), &Quartiles::new(&g.1)))
        .collect();
    chart.draw_series(boxes).map_err(&err)?;
    root.present().map_err(&err)?;
    Ok(())
}
