//! Static SVG line chart of a forecast report.

use std::fmt::Write;

use crate::forecast::ForecastReport;

pub const WIDTH: f64 = 800.0;
pub const HEIGHT: f64 = 400.0;

const LEFT: f64 = 60.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 30.0;
const BOTTOM: f64 = 50.0;
const Y_TICKS: usize = 5;

struct Frame {
    x_max: f64,
    y_min: f64,
    y_max: f64,
}

impl Frame {
    fn x(&self, hour: f64) -> f64 {
        let span = if self.x_max > 0.0 { self.x_max } else { 1.0 };
        LEFT + hour / span * (WIDTH - LEFT - RIGHT)
    }

    fn y(&self, value: f64) -> f64 {
        TOP + (self.y_max - value) / (self.y_max - self.y_min) * (HEIGHT - TOP - BOTTOM)
    }

    fn polyline(&self, values: &[f64], color: &str) -> String {
        let points: Vec<String> =
            values.iter().enumerate().map(|(i, &v)| format!("{:.2},{:.2}", self.x(i as f64), self.y(v))).collect();
        format!("<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"2\" points=\"{}\"/>\n", points.join(" "))
    }
}

/// Predicted values in red, actual values (when present) in blue, hours on
/// the x-axis. Identical reports render to identical bytes.
pub fn render_svg(report: &ForecastReport) -> String {
    let series = report.predicted.iter().chain(report.actual.iter().flatten());
    let (lo, hi) = series.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    let pad = if hi > lo { 0.05 * (hi - lo) } else { 1.0 };
    let frame = Frame { x_max: report.horizon().saturating_sub(1) as f64, y_min: lo - pad, y_max: hi + pad };
    let (x0, x1) = (LEFT, WIDTH - RIGHT);
    let (y0, y1) = (HEIGHT - BOTTOM, TOP);

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\" font-family=\"sans-serif\" font-size=\"12\">"
    );
    let _ = writeln!(svg, "<rect width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>");
    let _ = writeln!(
        svg,
        "<text x=\"{:.2}\" y=\"18\" text-anchor=\"middle\">forecast from {}</text>",
        WIDTH / 2.0,
        report.start.format("%Y-%m-%d %H:%M UTC")
    );

    // axes
    let _ = writeln!(svg, "<line x1=\"{x0}\" y1=\"{y0}\" x2=\"{x1}\" y2=\"{y0}\" stroke=\"black\"/>");
    let _ = writeln!(svg, "<line x1=\"{x0}\" y1=\"{y0}\" x2=\"{x0}\" y2=\"{y1}\" stroke=\"black\"/>");

    let x_step = if report.horizon() > 24 { 6 } else { 2 };
    for hour in (0..report.horizon()).step_by(x_step) {
        let x = frame.x(hour as f64);
        let _ =
            writeln!(svg, "<line x1=\"{x:.2}\" y1=\"{y0}\" x2=\"{x:.2}\" y2=\"{:.2}\" stroke=\"black\"/>", y0 + 5.0);
        let _ = writeln!(svg, "<text x=\"{x:.2}\" y=\"{:.2}\" text-anchor=\"middle\">{hour}</text>", y0 + 18.0);
    }
    for i in 0..Y_TICKS {
        let value = frame.y_min + (frame.y_max - frame.y_min) * i as f64 / (Y_TICKS - 1) as f64;
        let y = frame.y(value);
        let _ =
            writeln!(svg, "<line x1=\"{:.2}\" y1=\"{y:.2}\" x2=\"{x0}\" y2=\"{y:.2}\" stroke=\"black\"/>", x0 - 5.0);
        let _ = writeln!(svg, "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"end\">{value:.1}</text>", x0 - 8.0, y + 4.0);
    }
    let _ = writeln!(
        svg,
        "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"middle\">hour</text>",
        (x0 + x1) / 2.0,
        HEIGHT - 10.0
    );
    let _ = writeln!(
        svg,
        "<text x=\"15\" y=\"{mid:.2}\" text-anchor=\"middle\" transform=\"rotate(-90 15 {mid:.2})\">°C</text>",
        mid = (y0 + y1) / 2.0
    );

    if let Some(actual) = &report.actual {
        svg.push_str(&frame.polyline(actual, "blue"));
    }
    svg.push_str(&frame.polyline(&report.predicted, "red"));

    // legend
    let lx = x1 - 110.0;
    let mut entries = vec![("predicted", "red")];
    if report.actual.is_some() {
        entries.push(("actual", "blue"));
    }
    for (i, (label, color)) in entries.into_iter().enumerate() {
        let y = TOP + 10.0 + 18.0 * i as f64;
        let _ = writeln!(
            svg,
            "<line x1=\"{lx:.2}\" y1=\"{y:.2}\" x2=\"{:.2}\" y2=\"{y:.2}\" stroke=\"{color}\" stroke-width=\"2\"/>",
            lx + 24.0
        );
        let _ = writeln!(svg, "<text x=\"{:.2}\" y=\"{:.2}\">{label}</text>", lx + 30.0, y + 4.0);
    }
    svg.push_str("</svg>\n");
    svg
}
