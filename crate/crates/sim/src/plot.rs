//! Static SVG quiver plots of marker fields.

use hydroshear_core::MarkerField;

/// Arrows for each field at every taxel, drawn on a shared scale so the
/// longest arrow spans 0.9 of the grid pitch. Fields must share a grid and
/// unit; `(field, colour, label)` per layer.
pub fn quiver_svg(title: &str, layers: &[(&MarkerField, &str, &str)]) -> String {
    let Some((first, _, _)) = layers.first() else {
        return String::new();
    };
    let g = first.grid;
    let px_per_cell = 60.0;
    let margin = 40.0;
    let w = (g.cols.max(1) as f64) * px_per_cell + 2.0 * margin;
    let h = (g.rows.max(1) as f64) * px_per_cell + 2.0 * margin + 20.0 * layers.len() as f64;
    let longest = layers
        .iter()
        .flat_map(|(f, _, _)| f.vectors.iter())
        .map(|v| v[0].hypot(v[1]))
        .fold(0.0, f64::max);
    let gain = if longest > 0.0 { 0.9 * px_per_cell / longest } else { 0.0 };
    let mut s = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w:.0}\" height=\"{h:.0}\" viewBox=\"0 0 {w:.0} {h:.0}\">\n\
         <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n\
         <text x=\"{margin}\" y=\"24\" font-family=\"sans-serif\" font-size=\"14\">{}</text>\n",
        escape(title)
    );
    for q in 0..g.len() {
        let (r, c) = (q / g.cols, q % g.cols);
        let cx = margin + (c as f64 + 0.5) * px_per_cell;
        // rows grow upwards in the sensor frame
        let cy = margin + (g.rows - 1 - r) as f64 * px_per_cell + 0.5 * px_per_cell;
        s.push_str(&format!("<circle cx=\"{cx:.2}\" cy=\"{cy:.2}\" r=\"1.5\" fill=\"#888\"/>\n"));
        for (f, colour, _) in layers {
            let v = f.vectors[q];
            let (x2, y2) = (cx + gain * v[0], cy - gain * v[1]);
            s.push_str(&format!(
                "<line x1=\"{cx:.2}\" y1=\"{cy:.2}\" x2=\"{x2:.2}\" y2=\"{y2:.2}\" stroke=\"{colour}\" stroke-width=\"1.5\"/>\n"
            ));
        }
    }
    let mut y = margin + g.rows as f64 * px_per_cell + 16.0;
    for (_, colour, label) in layers {
        s.push_str(&format!(
            "<text x=\"{margin}\" y=\"{y:.0}\" font-family=\"sans-serif\" font-size=\"12\" fill=\"{colour}\">{}</text>\n",
            escape(label)
        ));
        y += 20.0;
    }
    s.push_str(&format!(
        "<text x=\"{:.0}\" y=\"{:.0}\" font-family=\"sans-serif\" font-size=\"11\" fill=\"#555\">longest arrow {longest:.4} {}</text>\n",
        w - 220.0,
        h - 8.0,
        first.unit.tag()
    ));
    s.push_str("</svg>\n");
    s
}

fn escape(t: &str) -> String {
    t.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
