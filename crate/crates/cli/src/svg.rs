//! Minimal SVG line plots, one polyline per intensity. Derived artifacts:
//! the determinism contract covers the CSVs, not these.

use boolmodel::analysis::EstimateRow;

const W: f64 = 640.0;
const H: f64 = 400.0;
const PAD: f64 = 48.0;

pub fn estimate_plot(rows: &[EstimateRow], title: &str) -> String {
    let mut us: Vec<f64> = rows.iter().map(|r| r.u).collect();
    us.sort_by(|a, b| a.partial_cmp(b).unwrap());
    us.dedup();
    let (mut lmin, mut lmax) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut ymin, mut ymax) = (0.0f64, 1e-12f64);
    for r in rows {
        lmin = lmin.min(r.l);
        lmax = lmax.max(r.l);
        ymin = ymin.min(r.lo);
        ymax = ymax.max(r.hi);
    }
    if !lmin.is_finite() || lmax <= lmin {
        lmax = lmin + 1.0;
    }
    let x = |l: f64| PAD + (l - lmin) / (lmax - lmin) * (W - 2.0 * PAD);
    let y = |v: f64| H - PAD - (v - ymin) / (ymax - ymin) * (H - 2.0 * PAD);

    let mut svg = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" \
         viewBox=\"0 0 {W} {H}\">\n<rect width=\"{W}\" height=\"{H}\" fill=\"white\"/>\n\
         <text x=\"{}\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">{title}</text>\n",
        W / 2.0
    );
    svg.push_str(&format!(
        "<line x1=\"{PAD}\" y1=\"{0}\" x2=\"{1}\" y2=\"{0}\" stroke=\"black\"/>\n\
         <line x1=\"{PAD}\" y1=\"{PAD}\" x2=\"{PAD}\" y2=\"{0}\" stroke=\"black\"/>\n",
        H - PAD,
        W - PAD
    ));
    let palette = ["#1b6ca8", "#c44536", "#3a7d44", "#7d3a96", "#b07d00"];
    for (i, &u) in us.iter().enumerate() {
        let color = palette[i % palette.len()];
        let mut pts: Vec<&EstimateRow> = rows.iter().filter(|r| r.u == u).collect();
        pts.sort_by(|a, b| a.l.partial_cmp(&b.l).unwrap());
        let path: Vec<String> = pts.iter().map(|r| format!("{:.2},{:.2}", x(r.l), y(r.estimate))).collect();
        svg.push_str(&format!(
            "<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\"/>\n",
            path.join(" ")
        ));
        for r in &pts {
            svg.push_str(&format!(
                "<line x1=\"{0:.2}\" y1=\"{1:.2}\" x2=\"{0:.2}\" y2=\"{2:.2}\" stroke=\"{color}\"/>\n",
                x(r.l),
                y(r.lo),
                y(r.hi)
            ));
        }
        svg.push_str(&format!(
            "<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"11\" fill=\"{color}\">u={u}</text>\n",
            W - PAD + 4.0,
            PAD + 14.0 * i as f64
        ));
    }
    svg.push_str("</svg>\n");
    svg
}
