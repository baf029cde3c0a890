use std::fmt::Write;

use super::SceneFile;
use crate::linalg::Vector;
use crate::tracer::Trajectory;

const SIZE: f64 = 600.0;

/// Plots the spatial projection (the last two axes) of every trajectory.
/// Straight-oriented branches are solid, others dashed. The interface is
/// drawn in the slice through the first event (or the box centre), and each
/// event carries the spatial section of the outgoing cone.
pub fn render_svg(file: &SceneFile, rays: &[Vec<Trajectory>]) -> String {
    let d = file.dim;
    let (ax, ay) = (d.saturating_sub(2), d - 1);
    let (x0, x1) = (file.bounds.min[ax], file.bounds.max[ax]);
    let (y0, y1) = (file.bounds.min[ay], file.bounds.max[ay]);
    let scale = SIZE / (x1 - x0).max(y1 - y0);
    let px = |x: f64| (x - x0) * scale;
    let py = |y: f64| SIZE - (y - y0) * scale;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white" stroke="black"/>"#);
    let media = file.media().ok();
    let slice = rays
        .iter()
        .flatten()
        .flat_map(|t| t.events.first())
        .map(|e| e.crossing.point.clone())
        .next()
        .unwrap_or_else(|| file.bounds().center());
    if let Some(media) = &media {
        const N: usize = 160;
        let at = |i: usize, j: usize| {
            let mut x = slice.clone();
            x[ax] = x0 + (x1 - x0) * i as f64 / N as f64;
            x[ay] = y0 + (y1 - y0) * j as f64 / N as f64;
            x
        };
        let f: Vec<Vec<f64>> = (0..=N).map(|i| (0..=N).map(|j| media.interface.value(&at(i, j))).collect()).collect();
        let mut path = String::new();
        for i in 0..N {
            for j in 0..N {
                let corners = [(i, j), (i + 1, j), (i + 1, j + 1), (i, j + 1)];
                let mut cuts = Vec::new();
                for k in 0..4 {
                    let (a, b) = (corners[k], corners[(k + 1) % 4]);
                    let (fa, fb) = (f[a.0][a.1], f[b.0][b.1]);
                    if (fa < 0.0) != (fb < 0.0) {
                        let t = fa / (fa - fb);
                        let pa = at(a.0, a.1);
                        let pb = at(b.0, b.1);
                        cuts.push((pa[ax] + t * (pb[ax] - pa[ax]), pa[ay] + t * (pb[ay] - pa[ay])));
                    }
                }
                if cuts.len() >= 2 {
                    let _ = write!(
                        path,
                        "M{:.2},{:.2}L{:.2},{:.2}",
                        px(cuts[0].0),
                        py(cuts[0].1),
                        px(cuts[1].0),
                        py(cuts[1].1)
                    );
                }
            }
        }
        let _ = writeln!(s, r#"<path d="{path}" fill="none" stroke="gray" stroke-width="2"/>"#);
    }
    let glyph = 0.04 * (x1 - x0).max(y1 - y0);
    let colours = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];
    for (i, ts) in rays.iter().enumerate() {
        let colour = colours[i % colours.len()];
        for t in ts {
            let straight = t.events.iter().all(|e| e.chosen.as_ref().is_none_or(|b| b.straight_oriented));
            let dash = if straight { "" } else { r#" stroke-dasharray="6 4""# };
            let pts: Vec<String> = t
                .samples()
                .map(|(_, st)| format!("{:.2},{:.2}", px(st.x[ax]), py(st.x[ay])))
                .collect();
            let _ = writeln!(
                s,
                r#"<polyline fill="none" stroke="{colour}" stroke-width="1.5"{dash} points="{}"/>"#,
                pts.join(" ")
            );
            for e in &t.events {
                let p = &e.crossing.point;
                let _ = writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{colour}"/>"#, px(p[ax]), py(p[ay]));
                let Some(medium) = e.to_medium else { continue };
                let Some(media) = &media else { continue };
                let m = media.metric(medium);
                if !m.is_product() {
                    continue;
                }
                let pts: Vec<String> = (0..48)
                    .filter_map(|k| {
                        let a = k as f64 / 48.0 * std::f64::consts::TAU;
                        let mut w = Vector::zeros(d);
                        w[ax] = a.cos();
                        w[ay] = a.sin();
                        let r = glyph / m.triple_norm(p, &w).ok()?;
                        Some(format!("{:.2},{:.2}", px(p[ax] + r * w[ax]), py(p[ay] + r * w[ay])))
                    })
                    .collect();
                let _ = writeln!(
                    s,
                    r#"<polygon fill="none" stroke="{colour}" stroke-width="0.8" points="{}"/>"#,
                    pts.join(" ")
                );
            }
        }
    }
    s.push_str("</svg>\n");
    s
}
