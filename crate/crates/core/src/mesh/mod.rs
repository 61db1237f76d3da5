//! Simplicial meshes over reference points.
//!
//! [`build_mesh`] triangulates a point set (3-D Delaunay); [`SimplicialMesh::from_parts`]
//! rebuilds a mesh from stored simplices without re-triangulating, which is
//! how saved landscapes come back bit-identically. Everything after
//! construction (neighbour sets, point location) works for any dimension.

mod delaunay;
mod predicates;

use std::collections::{BTreeSet, HashMap};

use crate::error::{Error, Result};
use crate::gatefam::ParamPoint;

/// Smallest admissible simplex volume, in coordinate units to the power `d`.
pub const MIN_SIMPLEX_VOLUME: f64 = 1e-12;
/// Slack on barycentric coordinates when deciding containment.
pub const LOCATE_TOL: f64 = 1e-9;
/// Queries this close to a vertex get an exact unit coordinate.
const VERTEX_SNAP: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct BarycentricLocation {
    pub simplex: usize,
    /// One weight per vertex of the simplex, in the simplex's vertex order.
    pub coords: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct SimplicialMesh {
    dim: usize,
    vertices: Vec<ParamPoint>,
    simplices: Vec<Vec<usize>>,
    adjacency: Vec<Vec<usize>>,
    /// `across[s][k]`: the simplex sharing the facet of `s` opposite slot `k`.
    across: Vec<Vec<Option<usize>>>,
    /// Row-major inverse of the edge matrix `[v_1 - v_0, ..., v_d - v_0]`.
    inverses: Vec<Vec<f64>>,
}

/// Delaunay tetrahedralization of `points`; vertex `i` of the mesh is `points[i]`.
pub fn build_mesh(points: &[ParamPoint]) -> Result<SimplicialMesh> {
    let dim = common_dim(points)?;
    if dim != 3 {
        return Err(Error::DegenerateMesh(format!(
            "mesh construction is implemented for 3-D points, got {dim}-D"
        )));
    }
    let coords: Vec<[f64; 3]> = points.iter().map(|p| [p.0[0], p.0[1], p.0[2]]).collect();
    let cells = delaunay::tetrahedralize(&coords)?;
    let mut simplices: Vec<Vec<usize>> = cells.into_iter().map(|c| c.to_vec()).collect();
    // Canonical order so the mesh does not depend on insertion history.
    for s in &mut simplices {
        canonical_rotation(s);
    }
    simplices.sort();
    SimplicialMesh::from_parts(points.to_vec(), simplices)
}

fn common_dim(points: &[ParamPoint]) -> Result<usize> {
    let Some(first) = points.first() else {
        return Err(Error::DegenerateMesh("no points".into()));
    };
    let dim = first.dim();
    for p in points {
        if p.dim() != dim {
            return Err(Error::DimensionMismatch { expected: dim, got: p.dim() });
        }
        if p.0.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite(Some(p.0.clone())));
        }
    }
    Ok(dim)
}

/// Rotate the smallest index to the front with an even permutation, keeping
/// the orientation.
fn canonical_rotation(s: &mut [usize]) {
    let min_pos = (0..s.len()).min_by_key(|&i| s[i]).unwrap_or(0);
    if min_pos == 0 {
        return;
    }
    // A transposition with slot 0 followed by one between two other slots is even.
    s.swap(0, min_pos);
    let others: Vec<usize> = (1..s.len()).filter(|&i| i != min_pos).collect();
    if let [a, b, ..] = others[..] {
        s.swap(a, b);
    } else {
        // Only possible for d = 1, where orientation carries no meaning.
    }
}

impl SimplicialMesh {
    /// Validate and index a mesh given explicit simplices.
    pub fn from_parts(vertices: Vec<ParamPoint>, simplices: Vec<Vec<usize>>) -> Result<Self> {
        let dim = common_dim(&vertices)?;
        if simplices.is_empty() {
            return Err(Error::DegenerateMesh("mesh has no simplices".into()));
        }
        let n = vertices.len();
        let mut used = vec![false; n];
        let mut inverses = Vec::with_capacity(simplices.len());
        for s in &simplices {
            if s.len() != dim + 1 {
                return Err(Error::WrongArity { expected: dim + 1, got: s.len() });
            }
            for &v in s {
                if v >= n {
                    return Err(Error::VertexOutOfRange { index: v, len: n });
                }
                used[v] = true;
            }
            let (det, inv) = edge_inverse(&vertices, s);
            let volume = det.abs() / factorial(dim);
            if !(volume > MIN_SIMPLEX_VOLUME) {
                return Err(Error::DegenerateMesh(format!(
                    "simplex {s:?} has volume {volume:.3e}, below {MIN_SIMPLEX_VOLUME:e}"
                )));
            }
            inverses.push(inv);
        }
        if let Some(v) = used.iter().position(|&u| !u) {
            return Err(Error::IsolatedVertex(v));
        }

        let mut adjacency: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
        for s in &simplices {
            for &a in s {
                for &b in s {
                    if a != b {
                        adjacency[a].insert(b);
                    }
                }
            }
        }

        let mut across = vec![vec![None; dim + 1]; simplices.len()];
        let mut open: HashMap<Vec<usize>, (usize, usize)> = HashMap::new();
        for (si, s) in simplices.iter().enumerate() {
            for k in 0..=dim {
                let mut facet: Vec<usize> = s.iter().enumerate().filter(|&(j, _)| j != k).map(|(_, &v)| v).collect();
                facet.sort_unstable();
                match open.remove(&facet) {
                    Some((sj, kj)) => {
                        if across[sj][kj].is_some() {
                            return Err(Error::DegenerateMesh(format!("facet {facet:?} shared by more than two simplices")));
                        }
                        across[sj][kj] = Some(si);
                        across[si][k] = Some(sj);
                        // Mark as closed so a third owner is detected.
                        open.insert(facet, (sj, kj));
                    }
                    None => {
                        open.insert(facet, (si, k));
                    }
                }
            }
        }

        Ok(Self {
            dim,
            vertices,
            simplices,
            adjacency: adjacency.into_iter().map(|s| s.into_iter().collect()).collect(),
            across,
            inverses,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vertices(&self) -> &[ParamPoint] {
        &self.vertices
    }

    pub fn simplices(&self) -> &[Vec<usize>] {
        &self.simplices
    }

    pub fn simplex_volume(&self, s: usize) -> f64 {
        edge_inverse(&self.vertices, &self.simplices[s]).0.abs() / factorial(self.dim)
    }

    /// Vertices joined to `i` by a mesh edge, ascending.
    pub fn neighbors(&self, i: usize) -> Result<&[usize]> {
        self.adjacency
            .get(i)
            .map(Vec::as_slice)
            .ok_or(Error::VertexOutOfRange { index: i, len: self.vertices.len() })
    }

    /// Barycentric coordinates of `p` with respect to simplex `s`.
    pub fn barycentric(&self, s: usize, p: &[f64]) -> Vec<f64> {
        let d = self.dim;
        let verts = &self.simplices[s];
        let origin = &self.vertices[verts[0]].0;
        let inv = &self.inverses[s];
        let rel: Vec<f64> = (0..d).map(|j| p[j] - origin[j]).collect();
        let mut b = vec![0.0; d + 1];
        let mut rest = 0.0;
        for r in 0..d {
            let v: f64 = (0..d).map(|j| inv[r * d + j] * rel[j]).sum();
            b[r + 1] = v;
            rest += v;
        }
        b[0] = 1.0 - rest;
        b
    }

    /// Find a simplex containing `p` and its barycentric coordinates there.
    pub fn locate(&self, p: &ParamPoint) -> Result<BarycentricLocation> {
        if p.dim() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: p.dim() });
        }
        if p.0.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite(Some(p.0.clone())));
        }
        let found = self.walk(&p.0).or_else(|| self.scan(&p.0));
        let Some((simplex, mut coords)) = found else {
            return Err(Error::OutsideHull(p.0.clone()));
        };
        for (slot, &v) in self.simplices[simplex].iter().enumerate() {
            if distance(&self.vertices[v].0, &p.0) <= VERTEX_SNAP {
                coords.iter_mut().for_each(|c| *c = 0.0);
                coords[slot] = 1.0;
                break;
            }
        }
        Ok(BarycentricLocation { simplex, coords })
    }

    fn walk(&self, p: &[f64]) -> Option<(usize, Vec<f64>)> {
        let mut s = 0;
        for _ in 0..self.simplices.len() {
            let b = self.barycentric(s, p);
            let (slot, &min) = b.iter().enumerate().min_by(|x, y| x.1.total_cmp(y.1))?;
            if min >= -LOCATE_TOL {
                return Some((s, b));
            }
            s = self.across[s][slot]?;
        }
        None
    }

    fn scan(&self, p: &[f64]) -> Option<(usize, Vec<f64>)> {
        let mut best: Option<(usize, Vec<f64>, f64)> = None;
        for s in 0..self.simplices.len() {
            let b = self.barycentric(s, p);
            let min = b.iter().copied().fold(f64::INFINITY, f64::min);
            if best.as_ref().is_none_or(|x| min > x.2) {
                best = Some((s, b, min));
            }
        }
        best.filter(|x| x.2 >= -LOCATE_TOL).map(|(s, b, _)| (s, b))
    }

    /// Barycentric combination of per-vertex vectors at `p`.
    pub fn interpolate(&self, values: &[Vec<f64>], p: &ParamPoint) -> Result<Vec<f64>> {
        if values.len() != self.vertices.len() {
            return Err(Error::DimensionMismatch { expected: self.vertices.len(), got: values.len() });
        }
        let loc = self.locate(p)?;
        Ok(self.combine(&loc, values))
    }

    pub fn combine(&self, loc: &BarycentricLocation, values: &[Vec<f64>]) -> Vec<f64> {
        let verts = &self.simplices[loc.simplex];
        let len = values[verts[0]].len();
        let mut out = vec![0.0; len];
        for (&v, &b) in verts.iter().zip(&loc.coords) {
            if b == 0.0 {
                continue;
            }
            for (o, x) in out.iter_mut().zip(&values[v]) {
                *o += b * x;
            }
        }
        out
    }
}

fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// Determinant and inverse of the edge matrix of simplex `s`.
fn edge_inverse(vertices: &[ParamPoint], s: &[usize]) -> (f64, Vec<f64>) {
    let d = s.len() - 1;
    let origin = &vertices[s[0]].0;
    // Column j holds v_{j+1} - v_0.
    let mut a = vec![0.0; d * d];
    for j in 0..d {
        let v = &vertices[s[j + 1]].0;
        for r in 0..d {
            a[r * d + j] = v[r] - origin[r];
        }
    }
    let mut inv = vec![0.0; d * d];
    for i in 0..d {
        inv[i * d + i] = 1.0;
    }
    let mut det = 1.0;
    for col in 0..d {
        let pivot = (col..d)
            .max_by(|&x, &y| a[x * d + col].abs().total_cmp(&a[y * d + col].abs()))
            .unwrap_or(col);
        if a[pivot * d + col] == 0.0 {
            return (0.0, inv);
        }
        if pivot != col {
            for j in 0..d {
                a.swap(pivot * d + j, col * d + j);
                inv.swap(pivot * d + j, col * d + j);
            }
            det = -det;
        }
        let diag = a[col * d + col];
        det *= diag;
        for j in 0..d {
            a[col * d + j] /= diag;
            inv[col * d + j] /= diag;
        }
        for r in 0..d {
            if r != col {
                let f = a[r * d + col];
                if f != 0.0 {
                    for j in 0..d {
                        a[r * d + j] -= f * a[col * d + j];
                        inv[r * d + j] -= f * inv[col * d + j];
                    }
                }
            }
        }
    }
    (det, inv)
}
