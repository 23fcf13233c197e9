//! SVG views of run data: log-log convergence plots and element heat maps.
//! Plotting only reads the values it is given.

use std::fmt::Write as _;

use vemadapt_core::mesh::Mesh;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const MARGIN: f64 = 70.0;
const PALETTE: &[&str] =
    &["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

/// Log-log plot of several series; non-positive values are skipped.
pub fn convergence_plot(title: &str, x_label: &str, y_label: &str, series: &[Series]) -> String {
    let pts: Vec<(f64, f64)> = series
        .iter()
        .flat_map(|s| s.points.iter().copied())
        .filter(|&(x, y)| x > 0.0 && y > 0.0 && x.is_finite() && y.is_finite())
        .collect();
    let mut s = String::new();
    writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    )
    .unwrap();
    writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#).unwrap();
    writeln!(s, r#"<text x="{}" y="24" text-anchor="middle" font-size="15">{}</text>"#, WIDTH / 2.0, escape(title))
        .unwrap();
    if pts.is_empty() {
        s.push_str("</svg>\n");
        return s;
    }
    let decades = |lo: f64, hi: f64| {
        let a = lo.log10().floor();
        let b = hi.log10().ceil();
        (a, if b > a { b } else { a + 1.0 })
    };
    let (x0, x1) = decades(
        pts.iter().map(|p| p.0).fold(f64::INFINITY, f64::min),
        pts.iter().map(|p| p.0).fold(0.0, f64::max),
    );
    let (y0, y1) = decades(
        pts.iter().map(|p| p.1).fold(f64::INFINITY, f64::min),
        pts.iter().map(|p| p.1).fold(0.0, f64::max),
    );
    let (pw, ph) = (WIDTH - 2.0 * MARGIN, HEIGHT - 2.0 * MARGIN);
    let sx = |x: f64| MARGIN + (x.log10() - x0) / (x1 - x0) * pw;
    let sy = |y: f64| HEIGHT - MARGIN - (y.log10() - y0) / (y1 - y0) * ph;

    writeln!(s, r##"<g stroke="#ddd">"##).unwrap();
    for d in x0 as i32..=x1 as i32 {
        let x = sx(10f64.powi(d));
        writeln!(s, r#"<line x1="{x:.2}" y1="{MARGIN}" x2="{x:.2}" y2="{}"/>"#, HEIGHT - MARGIN).unwrap();
    }
    for d in y0 as i32..=y1 as i32 {
        let y = sy(10f64.powi(d));
        writeln!(s, r#"<line x1="{MARGIN}" y1="{y:.2}" x2="{}" y2="{y:.2}"/>"#, WIDTH - MARGIN).unwrap();
    }
    s.push_str("</g>\n");
    for d in x0 as i32..=x1 as i32 {
        writeln!(
            s,
            r#"<text x="{:.2}" y="{}" text-anchor="middle">1e{d}</text>"#,
            sx(10f64.powi(d)),
            HEIGHT - MARGIN + 18.0
        )
        .unwrap();
    }
    for d in y0 as i32..=y1 as i32 {
        writeln!(s, r#"<text x="{}" y="{:.2}" text-anchor="end">1e{d}</text>"#, MARGIN - 6.0, sy(10f64.powi(d)) + 4.0)
            .unwrap();
    }
    writeln!(
        s,
        r#"<rect x="{MARGIN}" y="{MARGIN}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
    )
    .unwrap();
    writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, WIDTH / 2.0, HEIGHT - 20.0, escape(x_label))
        .unwrap();
    writeln!(
        s,
        r#"<text x="18" y="{}" text-anchor="middle" transform="rotate(-90 18 {})">{}</text>"#,
        HEIGHT / 2.0,
        HEIGHT / 2.0,
        escape(y_label)
    )
    .unwrap();

    for (i, ser) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let coords: Vec<String> = ser
            .points
            .iter()
            .filter(|&&(x, y)| x > 0.0 && y > 0.0 && x.is_finite() && y.is_finite())
            .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
            .collect();
        if coords.is_empty() {
            continue;
        }
        writeln!(s, r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#, coords.join(" "))
            .unwrap();
        for c in &coords {
            let (x, y) = c.split_once(',').unwrap();
            writeln!(s, r#"<circle cx="{x}" cy="{y}" r="2.5" fill="{color}"/>"#).unwrap();
        }
        let ly = MARGIN + 14.0 + 16.0 * i as f64;
        let lx = WIDTH - MARGIN - 150.0;
        writeln!(
            s,
            r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"/><text x="{}" y="{}">{}</text>"#,
            lx + 18.0,
            lx + 24.0,
            ly + 4.0,
            escape(&ser.label)
        )
        .unwrap();
    }
    s.push_str("</svg>\n");
    s
}

/// Blue-to-yellow ramp for `t` in [0, 1].
fn ramp(t: f64) -> String {
    const STOPS: [(f64, f64, f64); 5] = [
        (68.0, 1.0, 84.0),
        (59.0, 82.0, 139.0),
        (33.0, 145.0, 140.0),
        (94.0, 201.0, 98.0),
        (253.0, 231.0, 37.0),
    ];
    let t = if t.is_finite() { t.clamp(0.0, 1.0) } else { 0.0 };
    let f = t * (STOPS.len() - 1) as f64;
    let i = (f.floor() as usize).min(STOPS.len() - 2);
    let u = f - i as f64;
    let (a, b) = (STOPS[i], STOPS[i + 1]);
    let mix = |p: f64, q: f64| (p + u * (q - p)).round() as u8;
    format!("#{:02x}{:02x}{:02x}", mix(a.0, b.0), mix(a.1, b.1), mix(a.2, b.2))
}

/// Element-wise heat map, colours scaled by the largest value.
pub fn heat_map(mesh: &Mesh, values: &[f64], title: &str) -> String {
    let (mut lo_x, mut lo_y, mut hi_x, mut hi_y) = (f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
    for p in mesh.vertices() {
        lo_x = lo_x.min(p.x);
        lo_y = lo_y.min(p.y);
        hi_x = hi_x.max(p.x);
        hi_y = hi_y.max(p.y);
    }
    let side = HEIGHT - 2.0 * MARGIN;
    let scale = side / (hi_x - lo_x).max(hi_y - lo_y).max(f64::MIN_POSITIVE);
    let vmax = values.iter().copied().filter(|v| v.is_finite()).fold(0.0, f64::max);
    let mut s = String::new();
    writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    )
    .unwrap();
    writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#).unwrap();
    writeln!(s, r#"<text x="{}" y="24" text-anchor="middle" font-size="15">{}</text>"#, WIDTH / 2.0, escape(title))
        .unwrap();
    writeln!(s, r##"<g stroke="#333" stroke-width="0.3">"##).unwrap();
    for (e, lp) in mesh.elements().iter().enumerate() {
        let coords: Vec<String> = lp
            .iter()
            .map(|&v| {
                let p = mesh.vertices()[v];
                format!("{:.3},{:.3}", MARGIN + (p.x - lo_x) * scale, HEIGHT - MARGIN - (p.y - lo_y) * scale)
            })
            .collect();
        let t = if vmax > 0.0 { values.get(e).copied().unwrap_or(0.0) / vmax } else { 0.0 };
        writeln!(s, r#"<polygon points="{}" fill="{}"/>"#, coords.join(" "), ramp(t)).unwrap();
    }
    s.push_str("</g>\n");
    let bx = MARGIN + side + 30.0;
    for k in 0..=20 {
        let t = k as f64 / 20.0;
        let y = HEIGHT - MARGIN - t * side;
        writeln!(s, r#"<rect x="{bx}" y="{:.2}" width="20" height="{:.2}" fill="{}"/>"#, y - side / 20.0, side / 20.0, ramp(t))
            .unwrap();
    }
    writeln!(s, r#"<text x="{}" y="{}">{vmax:.3e}</text>"#, bx + 26.0, MARGIN + 4.0).unwrap();
    writeln!(s, r#"<text x="{}" y="{}">0</text>"#, bx + 26.0, HEIGHT - MARGIN + 4.0).unwrap();
    s.push_str("</svg>\n");
    s
}
