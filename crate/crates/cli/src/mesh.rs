//! Wavefront OBJ export of the maximal cells of a normal complex.

use std::fmt::Write;

use anyhow::{bail, Result};
use num_traits::ToPrimitive;

use normalvol_core::exact::QVec;
use normalvol_core::fan::ConeRef;
use normalvol_core::normalcx::{polytope_vertices, Context, ZValues};

/// Corner order around a square, as bit masks over two rays.
const SQUARE: [usize; 4] = [0b00, 0b01, 0b11, 0b10];

fn subset(sigma: &ConeRef, mask: usize) -> ConeRef {
    ConeRef::new(sigma.rays().iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, &r)| r).collect())
}

/// Polygons of one cell, each a cycle of corner masks.
fn polygons(d: usize) -> Vec<Vec<usize>> {
    match d {
        2 => vec![SQUARE.to_vec()],
        3 => {
            let mut out = Vec::new();
            for axis in 0..3 {
                let (j, k) = match axis {
                    0 => (1, 2),
                    1 => (0, 2),
                    _ => (0, 1),
                };
                for side in [0, 1 << axis] {
                    out.push(SQUARE.iter().map(|&m| side | (m & 1) << j | (m >> 1) << k).collect());
                }
            }
            out
        }
        _ => Vec::new(),
    }
}

fn coord(p: &QVec, i: usize) -> f64 {
    p.get(i).and_then(|x| x.to_f64()).unwrap_or(0.0)
}

/// One group per maximal cone; polygons are triangulated from their first corner.
pub fn to_obj(ctx: &Context, z: &ZValues) -> Result<String> {
    let fan = ctx.fan();
    let d = fan.dim();
    if fan.ambient_dim() > 3 || d == 0 || d > 3 {
        bail!("mesh export needs 1 ≤ d ≤ 3 in ambient dimension ≤ 3, got d = {d} in ℝ^{}", fan.ambient_dim());
    }
    let mut out = String::new();
    writeln!(out, "# normal complex, {} maximal cells", fan.max_cones().len())?;
    let mut next = 1usize;
    for mc in fan.max_cones() {
        let sigma = &mc.cone;
        let verts = polytope_vertices(ctx, sigma, z)?;
        writeln!(out, "g cell_{}", fan.cone_ids(sigma).join("_"))?;
        let base = next;
        for mask in 0..1usize << d {
            let p = &verts[&subset(sigma, mask)];
            writeln!(out, "v {} {} {}", coord(p, 0), coord(p, 1), coord(p, 2))?;
            next += 1;
        }
        if d == 1 {
            writeln!(out, "l {} {}", base, base + 1)?;
            continue;
        }
        for poly in polygons(d) {
            for k in 1..poly.len() - 1 {
                writeln!(out, "f {} {} {}", base + poly[0], base + poly[k], base + poly[k + 1])?;
            }
        }
    }
    Ok(out)
}
