//! SVG drawings of packings.
//!
//! 1d bins are horizontal bars stacked vertically, 2d bins are drawn side by
//! side, and every 3d bin gets a row with its top, front and side
//! projections. Bin outlines are red and items are colored by category.

use std::fmt::Write as _;

use crate::model::{Dimensionality, Instance, Solution};

pub const PALETTE: [&str; 10] = [
    "#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f", "#edc948", "#b07aa1", "#ff9da7",
    "#9c755f", "#bab0ac",
];

const MARGIN: f64 = 20.0;
const GAP: f64 = 20.0;
const PANEL: f64 = 300.0;
const BAR: f64 = 40.0;

/// One drawing area: a bin seen along some axis pair.
struct Panel {
    bin: usize,
    /// Axes drawn horizontally and vertically (vertical grows upwards).
    axes: (usize, usize),
    origin: (f64, f64),
    size: (f64, f64),
    /// Axis along which items are sorted so nearer ones are drawn last.
    depth: Option<usize>,
    label: &'static str,
}

fn fmt(v: f64) -> String {
    let s = format!("{v:.2}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".to_string()
    } else {
        s.to_string()
    }
}

fn layout(instance: &Instance, scale: f64) -> (Vec<Panel>, f64, f64) {
    let mut panels = Vec::new();
    let (mut width, mut height) = (0.0f64, 0.0f64);
    let mut cursor = (MARGIN, MARGIN);
    for (j, bin) in instance.bins().iter().enumerate() {
        let dim = |a: usize| bin.dims[a] as f64 * scale;
        match instance.dimensionality() {
            Dimensionality::One => {
                panels.push(Panel {
                    bin: j,
                    axes: (0, 3),
                    origin: cursor,
                    size: (dim(0), BAR),
                    depth: None,
                    label: "",
                });
                width = width.max(cursor.0 + dim(0));
                cursor.1 += BAR + GAP;
                height = cursor.1;
            }
            Dimensionality::Two => {
                panels.push(Panel {
                    bin: j,
                    axes: (0, 1),
                    origin: cursor,
                    size: (dim(0), dim(1)),
                    depth: None,
                    label: "",
                });
                cursor.0 += dim(0) + GAP;
                width = cursor.0;
                height = height.max(MARGIN + dim(1) + GAP);
            }
            Dimensionality::Three => {
                let views: [((usize, usize), usize, &'static str); 3] = [
                    ((0, 1), 2, "top"),
                    ((0, 2), 1, "front"),
                    ((1, 2), 0, "side"),
                ];
                let mut x = MARGIN;
                let row = dim(1).max(dim(2));
                for (axes, depth, label) in views {
                    panels.push(Panel {
                        bin: j,
                        axes,
                        origin: (x, cursor.1 + 14.0),
                        size: (dim(axes.0), dim(axes.1)),
                        depth: Some(depth),
                        label,
                    });
                    x += dim(axes.0) + GAP;
                }
                width = width.max(x);
                cursor.1 += row + 14.0 + GAP;
                height = cursor.1;
            }
        }
    }
    (panels, width + MARGIN, height + MARGIN)
}

pub fn render_svg(instance: &Instance, solution: &Solution) -> Vec<u8> {
    let d = instance.dimensionality().count();
    let largest = instance
        .bins()
        .iter()
        .flat_map(|b| b.dims[..d].iter().copied())
        .max()
        .unwrap_or(1)
        .max(1);
    let scale = PANEL / largest as f64;
    let (panels, width, height) = layout(instance, scale);
    let mut out = String::new();
    writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{}" height="{}" viewBox="0 0 {} {}" font-family="sans-serif" font-size="10">"#,
        fmt(width),
        fmt(height),
        fmt(width),
        fmt(height)
    )
    .unwrap();
    let items = instance.items();
    for panel in &panels {
        let (ox, oy) = panel.origin;
        let (pw, ph) = panel.size;
        if !panel.label.is_empty() {
            writeln!(
                out,
                r#"<text x="{}" y="{}">bin {} {}</text>"#,
                fmt(ox),
                fmt(oy - 4.0),
                panel.bin,
                panel.label
            )
            .unwrap();
        }
        let mut members: Vec<usize> = (0..solution.placements.len())
            .filter(|&i| solution.placements[i].bin == panel.bin)
            .collect();
        if let Some(axis) = panel.depth {
            // far items first; the viewer sits at the high end of the depth axis
            members.sort_by(|&a, &b| {
                let key = |i: usize| {
                    solution.placements[i].position[axis]
                        + solution.placements[i].extents[axis] as f64
                };
                key(a).total_cmp(&key(b)).then(a.cmp(&b))
            });
        }
        for i in members {
            let p = &solution.placements[i];
            let local = solution.local_position(instance, i);
            let (h, v) = panel.axes;
            let x = ox + local[h] * scale;
            let w = p.extents[h] as f64 * scale;
            let (y, hgt) = if v == 3 {
                (oy, ph)
            } else {
                let hgt = p.extents[v] as f64 * scale;
                (oy + ph - local[v] * scale - hgt, hgt)
            };
            let category = items[i].category;
            writeln!(
                out,
                r##"<rect class="item" data-item="{i}" data-bin="{}" x="{}" y="{}" width="{}" height="{}" fill="{}" stroke="#333" stroke-width="0.5"/>"##,
                panel.bin,
                fmt(x),
                fmt(y),
                fmt(w),
                fmt(hgt),
                PALETTE[category as usize % PALETTE.len()]
            )
            .unwrap();
            writeln!(
                out,
                r#"<text x="{}" y="{}" text-anchor="middle" dominant-baseline="middle">{category}</text>"#,
                fmt(x + w / 2.0),
                fmt(y + hgt / 2.0)
            )
            .unwrap();
        }
        writeln!(
            out,
            r#"<rect class="bin" data-bin="{}" x="{}" y="{}" width="{}" height="{}" fill="none" stroke="red" stroke-width="2"/>"#,
            panel.bin,
            fmt(ox),
            fmt(oy),
            fmt(pw),
            fmt(ph)
        )
        .unwrap();
    }
    out.push_str("</svg>\n");
    out.into_bytes()
}
