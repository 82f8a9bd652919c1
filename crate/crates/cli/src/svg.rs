//! Minimal SVG output: space-time fields on the mesh and log-log convergence plots.

use std::fmt::Write as _;

use stcontrol::mesh::SpaceTimeMesh;
use stcontrol::metrics::ConvergenceReport;

const SIZE: f64 = 560.0;
const MARGIN: f64 = 50.0;

/// Blue (-1) through white (0) to red (+1).
pub fn diverging(s: f64) -> (u8, u8, u8) {
    let s = if s.is_finite() { s.clamp(-1.0, 1.0) } else { 0.0 };
    let fade = |c: f64| (255.0 * (1.0 - s.abs()) + c * s.abs()).round() as u8;
    if s < 0.0 {
        (fade(33.0), fade(102.0), fade(172.0))
    } else {
        (fade(178.0), fade(24.0), fade(43.0))
    }
}

/// Triangles coloured by the average of their nodal values, `x` to the right,
/// `t` upwards, colour range symmetric about zero.
pub fn field_svg(mesh: &SpaceTimeMesh, values: &[f64], title: &str) -> String {
    let (x_lo, x_hi, t_lo, t_hi) = mesh.bounding_box();
    let sx = SIZE / (x_hi - x_lo);
    let st = SIZE / (t_hi - t_lo);
    let px = |p: [f64; 2]| (MARGIN + (p[0] - x_lo) * sx, MARGIN + SIZE - (p[1] - t_lo) * st);
    let range = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let scale = if range > 0.0 { 1.0 / range } else { 0.0 };

    let mut s = header(SIZE + 2.0 * MARGIN + 60.0, SIZE + 2.0 * MARGIN);
    let _ = writeln!(s, r#"<text x="{MARGIN}" y="30" font-size="16">{}</text>"#, escape(title));
    let _ = writeln!(s, r#"<g stroke-width="0.2">"#);
    for (k, tri) in mesh.triangles.iter().enumerate() {
        let avg = tri.vertices.iter().map(|&v| values[v]).sum::<f64>() / 3.0;
        let (r, g, b) = diverging(avg * scale);
        let pts: Vec<String> = mesh
            .corners(k)
            .iter()
            .map(|&p| {
                let (x, y) = px(p);
                format!("{x:.2},{y:.2}")
            })
            .collect();
        let _ = writeln!(
            s,
            r#"<polygon points="{}" fill="rgb({r},{g},{b})" stroke="rgb({r},{g},{b})"/>"#,
            pts.join(" ")
        );
    }
    let _ = writeln!(s, "</g>");
    for &[a, b] in &mesh.interface_edges {
        let (x0, y0) = px(mesh.vertices[a]);
        let (x1, y1) = px(mesh.vertices[b]);
        let _ = writeln!(
            s,
            r#"<line x1="{x0:.2}" y1="{y0:.2}" x2="{x1:.2}" y2="{y1:.2}" stroke="black" stroke-width="1"/>"#
        );
    }
    let frame = MARGIN + SIZE;
    let _ = writeln!(
        s,
        r#"<rect x="{MARGIN}" y="{MARGIN}" width="{SIZE}" height="{SIZE}" fill="none" stroke="black"/>"#
    );
    let _ = writeln!(s, r#"<text x="{}" y="{}" font-size="13">x</text>"#, MARGIN + SIZE / 2.0, frame + 30.0);
    let _ = writeln!(s, r#"<text x="{}" y="{}" font-size="13">t</text>"#, MARGIN - 30.0, MARGIN + SIZE / 2.0);

    // Colour bar.
    let bar_x = frame + 20.0;
    for k in 0..50 {
        let v = 1.0 - 2.0 * (k as f64 + 0.5) / 50.0;
        let (r, g, b) = diverging(v);
        let _ = writeln!(
            s,
            r#"<rect x="{bar_x}" y="{:.2}" width="15" height="{:.2}" fill="rgb({r},{g},{b})"/>"#,
            MARGIN + SIZE * k as f64 / 50.0,
            SIZE / 50.0 + 0.5
        );
    }
    let _ = writeln!(s, r#"<text x="{bar_x}" y="{}" font-size="11">{range:.3e}</text>"#, MARGIN - 5.0);
    let _ = writeln!(s, r#"<text x="{bar_x}" y="{}" font-size="11">{:.3e}</text>"#, frame + 15.0, -range);
    s.push_str("</svg>\n");
    s
}

/// Error against `h` on log-log axes, with a first-order reference slope.
pub fn convergence_svg(report: &ConvergenceReport) -> String {
    let pts: Vec<(f64, f64)> = report
        .rows
        .iter()
        .filter(|r| r.h > 0.0 && r.error > 0.0)
        .map(|r| (r.h.log10(), r.error.log10()))
        .collect();
    let mut s = header(SIZE + 2.0 * MARGIN, SIZE + 2.0 * MARGIN);
    let title = format!("{} ({}, {})", report.preset, report.metric, report.adjoint_space);
    let _ = writeln!(s, r#"<text x="{MARGIN}" y="30" font-size="16">{}</text>"#, escape(&title));
    let _ = writeln!(
        s,
        r#"<rect x="{MARGIN}" y="{MARGIN}" width="{SIZE}" height="{SIZE}" fill="none" stroke="black"/>"#
    );
    if pts.is_empty() {
        s.push_str("</svg>\n");
        return s;
    }
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in &pts {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    let (x0, x1) = (x0.floor(), x1.ceil().max(x0.floor() + 1.0));
    let (y0, y1) = (y0.floor(), y1.ceil().max(y0.floor() + 1.0));
    let map = |x: f64, y: f64| {
        (
            MARGIN + (x - x0) / (x1 - x0) * SIZE,
            MARGIN + SIZE - (y - y0) / (y1 - y0) * SIZE,
        )
    };
    for d in x0 as i32..=x1 as i32 {
        let (x, _) = map(d as f64, y0);
        let _ = writeln!(
            s,
            r##"<line x1="{x:.2}" y1="{MARGIN}" x2="{x:.2}" y2="{}" stroke="#ddd"/><text x="{:.2}" y="{}" font-size="11">1e{d}</text>"##,
            MARGIN + SIZE,
            x - 10.0,
            MARGIN + SIZE + 18.0
        );
    }
    for d in y0 as i32..=y1 as i32 {
        let (_, y) = map(x0, d as f64);
        let _ = writeln!(
            s,
            r##"<line x1="{MARGIN}" y1="{y:.2}" x2="{}" y2="{y:.2}" stroke="#ddd"/><text x="5" y="{:.2}" font-size="11">1e{d}</text>"##,
            MARGIN + SIZE,
            y + 4.0
        );
    }
    let line: Vec<String> = pts
        .iter()
        .map(|&(x, y)| {
            let (a, b) = map(x, y);
            format!("{a:.2},{b:.2}")
        })
        .collect();
    let _ = writeln!(
        s,
        r#"<polyline points="{}" fill="none" stroke="rgb(178,24,43)" stroke-width="2"/>"#,
        line.join(" ")
    );
    for &(x, y) in &pts {
        let (a, b) = map(x, y);
        let _ = writeln!(s, r#"<circle cx="{a:.2}" cy="{b:.2}" r="4" fill="rgb(178,24,43)"/>"#);
    }
    // Slope one through the coarsest point.
    let (xa, ya) = pts[0];
    let xb = pts[pts.len() - 1].0;
    let (a0, b0) = map(xa, ya);
    let (a1, b1) = map(xb, ya + (xb - xa));
    let _ = writeln!(
        s,
        r#"<line x1="{a0:.2}" y1="{b0:.2}" x2="{a1:.2}" y2="{b1:.2}" stroke="rgb(33,102,172)" stroke-dasharray="6 4"/>"#
    );
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" font-size="13">h</text><text x="{}" y="{}" font-size="11" fill="rgb(33,102,172)">slope 1</text>"#,
        MARGIN + SIZE / 2.0,
        MARGIN + SIZE + 38.0,
        MARGIN + SIZE - 60.0,
        MARGIN + SIZE - 10.0
    );
    s.push_str("</svg>\n");
    s
}

fn header(width: f64, height: f64) -> String {
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width}\" height=\"{height}\" viewBox=\"0 0 {width} {height}\" font-family=\"sans-serif\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
    )
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;
    use stcontrol::mesh::build_mesh;
    use stcontrol::problem::{Example1Variant, ProblemSpec};

    #[test]
    fn colour_map_ends_and_centre() {
        assert_eq!(diverging(0.0), (255, 255, 255));
        assert_eq!(diverging(1.0), (178, 24, 43));
        assert_eq!(diverging(-1.0), (33, 102, 172));
        assert_eq!(diverging(7.0), diverging(1.0));
        assert_eq!(diverging(f64::NAN), (255, 255, 255));
    }

    #[test]
    fn field_plot_has_one_polygon_per_triangle() {
        let spec = ProblemSpec::example1(Example1Variant::Moving);
        let mesh = build_mesh(&spec, 4).unwrap();
        let values: Vec<f64> = mesh.vertices.iter().map(|v| v[0] - 0.5).collect();
        let svg = field_svg(&mesh, &values, "u <h>");
        assert_eq!(svg.matches("<polygon").count(), mesh.n_triangles());
        assert!(svg.contains("u &lt;h&gt;"));
        assert!(svg.trim_end().ends_with("</svg>"));
        let zero = field_svg(&mesh, &vec![0.0; mesh.n_vertices()], "zero");
        assert!(zero.contains("rgb(255,255,255)"));
    }

    #[test]
    fn convergence_plot_marks_every_level() {
        let report = ConvergenceReport::new("p", "U_h", 1, "E", &[(10, 0.1, 1.0), (40, 0.05, 0.5), (160, 0.025, 0.25)]).unwrap();
        let svg = convergence_svg(&report);
        assert_eq!(svg.matches("<circle").count(), 3);
        assert!(svg.contains("slope 1"));
    }
}
