//! Exact geometric predicates for 3-D Delaunay construction.
//!
//! Lattice inputs (every coordinate a small multiple of `1/N`) are scaled to
//! integers and evaluated in `i128`. Anything else goes through Shewchuk's
//! adaptive floating-point predicates. Either way the sign is exact, so
//! degeneracies show up as exact zeros and can be broken symbolically.
//!
//! Sign conventions used throughout the mesh code:
//! - `orient(a, b, c, d) = sign det[b - a, c - a, d - a]`; a cell is positively
//!   oriented when this is `+1`.
//! - `insphere(a, b, c, d, e) = +1` when `e` is strictly inside the sphere
//!   through a positively oriented `a, b, c, d`.

use std::cmp::Ordering;

/// Largest scaled coordinate admitted on the integer path. Keeps every
/// determinant below, including the lifted coplanar circle test, inside `i128`.
const MAX_LATTICE_COORD: i64 = 1 << 10;
const MAX_DENOMINATOR: u32 = 1024;

#[derive(Clone, Debug)]
pub(crate) enum Coords {
    Lattice(Vec<[i64; 3]>),
    Float(Vec<[f64; 3]>),
}

pub(crate) struct Predicates {
    coords: Coords,
}

impl Predicates {
    pub fn new(points: &[[f64; 3]]) -> Self {
        let coords = match lattice_scale(points) {
            Some(n) => Coords::Lattice(
                points
                    .iter()
                    .map(|p| p.map(|c| (c * n as f64).round() as i64))
                    .collect(),
            ),
            None => Coords::Float(points.to_vec()),
        };
        Self { coords }
    }

    #[cfg(test)]
    pub fn is_lattice(&self) -> bool {
        matches!(self.coords, Coords::Lattice(_))
    }

    /// Lexicographic order on the original coordinates; the symbolic
    /// perturbation treats larger points as perturbed more.
    pub fn compare(&self, a: usize, b: usize) -> Ordering {
        match &self.coords {
            Coords::Lattice(p) => p[a].cmp(&p[b]),
            Coords::Float(p) => p[a]
                .iter()
                .zip(&p[b])
                .map(|(x, y)| x.total_cmp(y))
                .find(|o| o.is_ne())
                .unwrap_or(Ordering::Equal),
        }
    }

    pub fn orient(&self, a: usize, b: usize, c: usize, d: usize) -> i8 {
        match &self.coords {
            Coords::Lattice(p) => orient_i(p[a], p[b], p[c], p[d]),
            Coords::Float(p) => orient_f(p[a], p[b], p[c], p[d]),
        }
    }

    pub fn insphere(&self, a: usize, b: usize, c: usize, d: usize, e: usize) -> i8 {
        match &self.coords {
            Coords::Lattice(p) => insphere_i(p[a], p[b], p[c], p[d], p[e]),
            Coords::Float(p) => insphere_f(p[a], p[b], p[c], p[d], p[e]),
        }
    }

    /// For coplanar `a, b, c, e`: `+1` when `e` is strictly inside the circle
    /// through `a, b, c`.
    pub fn in_circle_coplanar(&self, a: usize, b: usize, c: usize, e: usize) -> i8 {
        match &self.coords {
            Coords::Lattice(p) => {
                let n = normal_i(p[a], p[b], p[c]);
                let lifted = [p[a][0] + n[0], p[a][1] + n[1], p[a][2] + n[2]];
                // orient(a, b, c, a + n) = |n|² > 0, so no sign fix needed.
                insphere_i(p[a], p[b], p[c], lifted, p[e])
            }
            Coords::Float(p) => {
                let n = normal_f(p[a], p[b], p[c]);
                let lifted = [p[a][0] + n[0], p[a][1] + n[1], p[a][2] + n[2]];
                // Any point off the plane defines a sphere meeting the plane in
                // the circumcircle; correct for its side.
                orient_f(p[a], p[b], p[c], lifted) * insphere_f(p[a], p[b], p[c], lifted, p[e])
            }
        }
    }

    /// Orientation of coplanar `u, v, w` inside the plane of `a, b, c`,
    /// relative to that triangle's own orientation.
    pub fn coplanar_orient(&self, plane: [usize; 3], u: usize, v: usize, w: usize) -> i8 {
        let [a, b, c] = plane;
        match &self.coords {
            Coords::Lattice(p) => {
                let n = normal_i(p[a], p[b], p[c]);
                let m = normal_i(p[u], p[v], p[w]);
                let dot: i128 = (0..3).map(|k| n[k] as i128 * m[k] as i128).sum();
                dot.signum() as i8
            }
            Coords::Float(p) => {
                let n = normal_f(p[a], p[b], p[c]);
                let lifted = [p[u][0] + n[0], p[u][1] + n[1], p[u][2] + n[2]];
                orient_f(p[a], p[b], p[c], [p[a][0] + n[0], p[a][1] + n[1], p[a][2] + n[2]])
                    * orient_f(p[u], p[v], p[w], lifted)
            }
        }
    }
}

/// Smallest `N <= MAX_DENOMINATOR` putting every coordinate on the `1/N` lattice.
fn lattice_scale(points: &[[f64; 3]]) -> Option<u32> {
    (1..=MAX_DENOMINATOR).find(|&n| {
        let nf = n as f64;
        points.iter().flatten().all(|&c| {
            let s = c * nf;
            let r = s.round();
            (s - r).abs() <= 1e-9 * r.abs().max(1.0) && r.abs() <= MAX_LATTICE_COORD as f64
        })
    })
}

fn sub_i(a: [i64; 3], b: [i64; 3]) -> [i128; 3] {
    [
        (a[0] - b[0]) as i128,
        (a[1] - b[1]) as i128,
        (a[2] - b[2]) as i128,
    ]
}

fn det3_i(r0: [i128; 3], r1: [i128; 3], r2: [i128; 3]) -> i128 {
    r0[0] * (r1[1] * r2[2] - r1[2] * r2[1]) - r0[1] * (r1[0] * r2[2] - r1[2] * r2[0])
        + r0[2] * (r1[0] * r2[1] - r1[1] * r2[0])
}

fn orient_i(a: [i64; 3], b: [i64; 3], c: [i64; 3], d: [i64; 3]) -> i8 {
    det3_i(sub_i(b, a), sub_i(c, a), sub_i(d, a)).signum() as i8
}

fn normal_i(a: [i64; 3], b: [i64; 3], c: [i64; 3]) -> [i64; 3] {
    let u = sub_i(b, a);
    let v = sub_i(c, a);
    [
        (u[1] * v[2] - u[2] * v[1]) as i64,
        (u[2] * v[0] - u[0] * v[2]) as i64,
        (u[0] * v[1] - u[1] * v[0]) as i64,
    ]
}

fn insphere_i(a: [i64; 3], b: [i64; 3], c: [i64; 3], d: [i64; 3], e: [i64; 3]) -> i8 {
    let row = |p: [i64; 3]| {
        let v = sub_i(p, e);
        [v[0], v[1], v[2], v[0] * v[0] + v[1] * v[1] + v[2] * v[2]]
    };
    let m = [row(a), row(b), row(c), row(d)];
    // Laplace expansion along the lifted column.
    let minor = |skip: usize| {
        let rows: Vec<[i128; 3]> = (0..4)
            .filter(|&r| r != skip)
            .map(|r| [m[r][0], m[r][1], m[r][2]])
            .collect();
        det3_i(rows[0], rows[1], rows[2])
    };
    let mut det: i128 = 0;
    for r in 0..4 {
        let sign = if (r + 3) % 2 == 0 { 1 } else { -1 };
        det += sign * m[r][3] * minor(r);
    }
    // Positive for `e` inside when `a..d` has Shewchuk orientation > 0, which
    // is negative orientation in our convention.
    (-det.signum()) as i8
}

fn coord(p: [f64; 3]) -> robust::Coord3D<f64> {
    robust::Coord3D {
        x: p[0],
        y: p[1],
        z: p[2],
    }
}

fn sign_f(v: f64) -> i8 {
    if v > 0.0 {
        1
    } else if v < 0.0 {
        -1
    } else {
        0
    }
}

fn orient_f(a: [f64; 3], b: [f64; 3], c: [f64; 3], d: [f64; 3]) -> i8 {
    -sign_f(robust::orient3d(coord(a), coord(b), coord(c), coord(d)))
}

fn insphere_f(a: [f64; 3], b: [f64; 3], c: [f64; 3], d: [f64; 3], e: [f64; 3]) -> i8 {
    -sign_f(robust::insphere(coord(a), coord(b), coord(c), coord(d), coord(e)))
}

fn normal_f(a: [f64; 3], b: [f64; 3], c: [f64; 3]) -> [f64; 3] {
    let u = [b[0] - a[0], b[1] - a[1], b[2] - a[2]];
    let v = [c[0] - a[0], c[1] - a[1], c[2] - a[2]];
    [
        u[1] * v[2] - u[2] * v[1],
        u[2] * v[0] - u[0] * v[2],
        u[0] * v[1] - u[1] * v[0],
    ]
}
