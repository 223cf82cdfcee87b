//! Small fans and matroids used throughout the tests and the acceptance suite.

use crate::exact::{rat, vec_of};
use crate::fan::{MarkedFan, Ray, Validation};
use crate::matroid::Matroid;

fn ray(id: &str, u: &[i64]) -> Ray {
    Ray { id: id.into(), u: vec_of(u) }
}

/// Rays `x+, y+, x-, y-` along the coordinate axes of `ℝ²`, four quadrants.
pub fn quadrant() -> MarkedFan {
    let rays = vec![ray("x+", &[1, 0]), ray("y+", &[0, 1]), ray("x-", &[-1, 0]), ray("y-", &[0, -1])];
    let cones = [(0, 1), (1, 2), (2, 3), (3, 0)].iter().map(|&(a, b)| (vec![a, b], rat(1))).collect();
    MarkedFan::from_parts(2, rays, cones, Validation::Full).expect("quadrant fan")
}

/// The complete fan of `ℝ¹` with rays `+` and `-`.
pub fn pm1() -> MarkedFan {
    let rays = vec![ray("+", &[1]), ray("-", &[-1])];
    MarkedFan::from_parts(1, rays, vec![(vec![0], rat(1)), (vec![1], rat(1))], Validation::Full).expect("pm1 fan")
}

/// The eight orthants of `ℝ³`.
pub fn octants() -> MarkedFan {
    let rays = vec![
        ray("x+", &[1, 0, 0]),
        ray("y+", &[0, 1, 0]),
        ray("z+", &[0, 0, 1]),
        ray("x-", &[-1, 0, 0]),
        ray("y-", &[0, -1, 0]),
        ray("z-", &[0, 0, -1]),
    ];
    let mut cones = Vec::new();
    for a in [0, 3] {
        for b in [1, 4] {
            for c in [2, 5] {
                cones.push((vec![a, b, c], rat(1)));
            }
        }
    }
    MarkedFan::from_parts(3, rays, cones, Validation::Full).expect("octant fan")
}

pub fn uniform(r: usize, n: usize) -> Matroid {
    Matroid::uniform(r, n).expect("uniform matroid")
}

fn graph(edges: &[(&str, &str)]) -> Matroid {
    let labels = edges.iter().map(|(u, v)| format!("{u}{v}")).collect();
    let e = edges.iter().map(|(u, v)| (u.to_string(), v.to_string())).collect::<Vec<_>>();
    Matroid::graphic(labels, &e).expect("graphic matroid")
}

/// Cycle matroid of `K₄`; elements are edges labelled `01, 02, …, 23`.
pub fn k4() -> Matroid {
    graph(&[("0", "1"), ("0", "2"), ("0", "3"), ("1", "2"), ("1", "3"), ("2", "3")])
}

/// `K₄` without the edge `23`.
pub fn k4_minus_edge() -> Matroid {
    graph(&[("0", "1"), ("0", "2"), ("0", "3"), ("1", "2"), ("1", "3")])
}

/// Named matroid fixtures.
pub fn matroids() -> Vec<(&'static str, Matroid)> {
    vec![
        ("U23", uniform(2, 3)),
        ("U34", uniform(3, 4)),
        ("U35", uniform(3, 5)),
        ("U45", uniform(4, 5)),
        ("K4", k4()),
        ("K4-e", k4_minus_edge()),
    ]
}
