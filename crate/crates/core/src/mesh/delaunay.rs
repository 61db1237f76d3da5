//! Incremental Bowyer-Watson Delaunay tetrahedralization.
//!
//! The convex hull is closed off with a symbolic vertex at infinity, so
//! every hull facet has an "infinite" cell on its outer side and points
//! outside the current hull are inserted like any other point. Ties from
//! co-spherical or coplanar points (the norm on regular lattices) are broken
//! by a symbolic perturbation that ranks points lexicographically, which
//! makes the result a genuine Delaunay triangulation of a perturbed input.

use std::collections::HashMap;

use super::predicates::Predicates;
use crate::error::{Error, Result};

const INF: usize = usize::MAX;

type Cell = [usize; 4];

/// Positively oriented tetrahedra over `points`, as index quadruples.
pub(crate) fn tetrahedralize(points: &[[f64; 3]]) -> Result<Vec<Cell>> {
    if points.len() < 4 {
        return Err(Error::DegenerateMesh(format!(
            "need at least 4 points in 3-D, got {}",
            points.len()
        )));
    }
    let pred = Predicates::new(points);
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&a, &b| pred.compare(a, b).then(a.cmp(&b)));
    if let Some(w) = order.windows(2).find(|w| pred.compare(w[0], w[1]).is_eq()) {
        return Err(Error::DegenerateMesh(format!(
            "duplicate points at indices {} and {}",
            w[0].min(w[1]),
            w[0].max(w[1])
        )));
    }

    let seed = initial_simplex(&pred, points.len())?;
    let mut cells = seed_cells(&pred, seed);

    for q in (0..points.len()).filter(|i| !seed.contains(i)) {
        insert(&pred, &mut cells, q)?;
    }

    Ok(cells.into_iter().filter(|c| !c.contains(&INF)).collect())
}

fn initial_simplex(pred: &Predicates, n: usize) -> Result<[usize; 4]> {
    let a = 0;
    let b = 1; // distinct from `a`, checked by the caller
    let collinear = |c: usize| {
        // Collinear iff every orientation with a fourth point vanishes; test
        // against all points to stay exact.
        (0..n).all(|d| pred.orient(a, b, c, d) == 0)
    };
    let c = (2..n).find(|&c| !collinear(c));
    let Some(c) = c else {
        return Err(Error::DegenerateMesh(
            "all points are collinear or coplanar; no nonzero-volume tetrahedra can be generated".into(),
        ));
    };
    let d = (2..n).find(|&d| d != c && pred.orient(a, b, c, d) != 0);
    match d {
        Some(d) if pred.orient(a, b, c, d) > 0 => Ok([a, b, c, d]),
        Some(d) => Ok([a, b, d, c]),
        None => Err(Error::DegenerateMesh(
            "all points are coplanar; no nonzero-volume tetrahedra can be generated".into(),
        )),
    }
}

fn seed_cells(pred: &Predicates, [a, b, c, d]: [usize; 4]) -> Vec<Cell> {
    debug_assert_eq!(pred.orient(a, b, c, d), 1);
    // Each infinite cell replaces one vertex by INF and swaps two others, so
    // that substituting a point beyond the hull facet for INF is positive.
    vec![
        [a, b, c, d],
        [INF, b, d, c],
        [a, INF, d, c],
        [b, a, INF, d],
        [b, a, c, INF],
    ]
}

fn sign_with(pred: &Predicates, cell: Cell, q: usize) -> i8 {
    let [a, b, c, d] = cell.map(|v| if v == INF { q } else { v });
    pred.orient(a, b, c, d)
}

/// Is `q` inside the (perturbed) circumsphere of `cell`?
fn in_conflict(pred: &Predicates, cell: Cell, q: usize) -> bool {
    match cell.iter().position(|&v| v == INF) {
        None => insphere_perturbed(pred, cell, q) > 0,
        Some(slot) => {
            let o = sign_with(pred, cell, q);
            if o != 0 {
                return o > 0;
            }
            let facet: Vec<usize> = (1..4).map(|k| cell[(slot + k) % 4]).collect();
            in_circle_perturbed(pred, [facet[0], facet[1], facet[2]], q) > 0
        }
    }
}

fn insphere_perturbed(pred: &Predicates, cell: Cell, q: usize) -> i8 {
    let [p0, p1, p2, p3] = cell;
    let s = pred.insphere(p0, p1, p2, p3, q);
    if s != 0 {
        return s;
    }
    let mut pts = [p0, p1, p2, p3, q];
    pts.sort_by(|&a, &b| pred.compare(a, b));
    for &top in pts[2..].iter().rev() {
        if top == q {
            return -1;
        }
        let o = if top == p3 {
            pred.orient(p0, p1, p2, q)
        } else if top == p2 {
            pred.orient(p0, p1, q, p3)
        } else if top == p1 {
            pred.orient(p0, q, p2, p3)
        } else {
            pred.orient(q, p1, p2, p3)
        };
        if o != 0 {
            return o;
        }
    }
    unreachable!("symbolic perturbation always decides an insphere test")
}

fn in_circle_perturbed(pred: &Predicates, [p0, p1, p2]: [usize; 3], q: usize) -> i8 {
    let s = pred.in_circle_coplanar(p0, p1, p2, q);
    if s != 0 {
        return s;
    }
    let plane = [p0, p1, p2];
    let mut pts = [p0, p1, p2, q];
    pts.sort_by(|&a, &b| pred.compare(a, b));
    for &top in pts[1..].iter().rev() {
        if top == q {
            return -1;
        }
        let o = if top == p2 {
            pred.coplanar_orient(plane, p0, p1, q)
        } else if top == p1 {
            pred.coplanar_orient(plane, p0, q, p2)
        } else {
            pred.coplanar_orient(plane, q, p1, p2)
        };
        if o != 0 {
            return o;
        }
    }
    unreachable!("symbolic perturbation always decides an in-circle test")
}

fn facet_key(cell: Cell, slot: usize) -> [usize; 3] {
    let mut f = [0; 3];
    let mut k = 0;
    for (i, &v) in cell.iter().enumerate() {
        if i != slot {
            f[k] = v;
            k += 1;
        }
    }
    f.sort_unstable();
    f
}

fn insert(pred: &Predicates, cells: &mut Vec<Cell>, q: usize) -> Result<()> {
    let (conflict, keep): (Vec<Cell>, Vec<Cell>) = cells.iter().partition(|&&c| in_conflict(pred, c, q));
    if conflict.is_empty() {
        return Err(Error::DegenerateMesh(format!("point {q} conflicts with no cell")));
    }
    let mut facet_count: HashMap<[usize; 3], usize> = HashMap::new();
    for &c in &conflict {
        for slot in 0..4 {
            *facet_count.entry(facet_key(c, slot)).or_default() += 1;
        }
    }
    let mut fresh = Vec::new();
    for &c in &conflict {
        for slot in 0..4 {
            if facet_count[&facet_key(c, slot)] == 1 {
                let mut cell = c;
                cell[slot] = q;
                if !cell.contains(&INF) && pred.orient(cell[0], cell[1], cell[2], cell[3]) <= 0 {
                    return Err(Error::DegenerateMesh(format!(
                        "inserting point {q} produced a flat or inverted tetrahedron"
                    )));
                }
                fresh.push(cell);
            }
        }
    }
    *cells = keep;
    cells.extend(fresh);
    Ok(())
}
