//! Parameterized gate families and their reference/test lattices.

use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qcore::{expm_hermitian, kron2, pauli, Axis, CMatrix, HermitianMatrix};

/// Slack allowed when checking a floating-point point against a domain.
pub const DOMAIN_TOL: f64 = 1e-12;

/// Coordinates of a gate inside a family, e.g. Cartan coordinates `(t_x, t_y, t_z)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ParamPoint(pub Vec<f64>);

impl ParamPoint {
    pub fn new(coords: impl Into<Vec<f64>>) -> Self {
        Self(coords.into())
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    fn xyz(&self) -> Result<[f64; 3]> {
        match self.0.as_slice() {
            &[x, y, z] => Ok([x, y, z]),
            other => Err(Error::WrongArity {
                expected: 3,
                got: other.len(),
            }),
        }
    }
}

impl fmt::Display for ParamPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|c| format!("{c}")).collect();
        write!(f, "({})", parts.join(", "))
    }
}

/// Lattice spacing, held as an exact reduced fraction `num/den`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Granularity {
    num: u32,
    den: u32,
}

impl Granularity {
    pub fn new(num: u32, den: u32) -> Result<Self> {
        if num == 0 || den == 0 {
            return Err(Error::InvalidGranularity(format!("{num}/{den}")));
        }
        let g = gcd(num, den);
        Ok(Self {
            num: num / g,
            den: den / g,
        })
    }

    /// `1/n`.
    pub fn reciprocal(n: u32) -> Result<Self> {
        Self::new(1, n)
    }

    pub fn num(&self) -> u32 {
        self.num
    }

    pub fn den(&self) -> u32 {
        self.den
    }

    pub fn value(&self) -> f64 {
        self.num as f64 / self.den as f64
    }

    /// Largest lattice index `i` with `i * g <= 1`.
    fn max_index(&self) -> u32 {
        self.den / self.num
    }

    /// Coordinate of lattice index `i`, i.e. `i * num / den`, correctly rounded.
    fn coord(&self, i: u32) -> f64 {
        (i as u64 * self.num as u64) as f64 / self.den as f64
    }
}

fn gcd(mut a: u32, mut b: u32) -> u32 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

impl fmt::Display for Granularity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

impl FromStr for Granularity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidGranularity(s.to_string());
        let s = s.trim();
        let (n, d) = match s.split_once('/') {
            Some((n, d)) => (n.trim(), d.trim()),
            None => (s, "1"),
        };
        let n: u32 = n.parse().map_err(|_| bad())?;
        let d: u32 = d.parse().map_err(|_| bad())?;
        Self::new(n, d).map_err(|_| bad())
    }
}

impl Serialize for Granularity {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Granularity {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// The built-in gate families. Calibration code only goes through the
/// methods below, so adding a family means adding a variant here.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GateFamily {
    /// Two-qubit Cartan gates restricted to the Weyl chamber.
    WeylChamber,
    /// Two-qubit Cartan gates over the box `[0,1]^3`.
    CartanBox,
    /// Single-qubit rotations `exp(-iπ/2 t·σ)` over `[0,1]^3`.
    SingleQubit,
}

impl GateFamily {
    pub const ALL: [GateFamily; 3] = [Self::WeylChamber, Self::CartanBox, Self::SingleQubit];

    pub fn name(&self) -> &'static str {
        match self {
            Self::WeylChamber => "weyl-chamber",
            Self::CartanBox => "cartan-box",
            Self::SingleQubit => "single-qubit",
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|f| f.name() == name)
            .ok_or_else(|| Error::UnknownFamily(name.to_string()))
    }

    /// Hilbert-space dimension of the target unitaries.
    pub fn hilbert_dim(&self) -> usize {
        match self {
            Self::WeylChamber | Self::CartanBox => 4,
            Self::SingleQubit => 2,
        }
    }

    pub fn param_dim(&self) -> usize {
        3
    }

    pub fn target(&self, p: &ParamPoint) -> Result<CMatrix> {
        match self {
            Self::WeylChamber | Self::CartanBox => cartan_unitary(p),
            Self::SingleQubit => single_qubit_unitary(p),
        }
    }

    /// Checks domain membership (boundary inclusive, with [`DOMAIN_TOL`] slack)
    /// and names the violated constraint otherwise.
    pub fn check_domain(&self, p: &ParamPoint) -> Result<()> {
        let [x, y, z] = p.xyz()?;
        let fail = |reason: String| {
            Err(Error::OutOfDomain {
                family: self.name().to_string(),
                point: p.0.clone(),
                reason,
            })
        };
        if !(x.is_finite() && y.is_finite() && z.is_finite()) {
            return fail("coordinates must be finite".into());
        }
        let in_unit = |v: f64| (-DOMAIN_TOL..=1.0 + DOMAIN_TOL).contains(&v);
        match self {
            Self::WeylChamber => {
                if !in_unit(x) {
                    return fail(format!("requires 0 <= t_x <= 1 (t_x = {x})"));
                }
                let ymax = x.min(1.0 - x);
                if y < -DOMAIN_TOL || y > ymax + DOMAIN_TOL {
                    return fail(format!(
                        "requires 0 <= t_y <= min(t_x, 1 - t_x) = {ymax} (t_y = {y})"
                    ));
                }
                if z < -DOMAIN_TOL || z > y + DOMAIN_TOL {
                    return fail(format!("requires 0 <= t_z <= t_y = {y} (t_z = {z})"));
                }
            }
            Self::CartanBox | Self::SingleQubit => {
                for (name, v) in [("t_x", x), ("t_y", y), ("t_z", z)] {
                    if !in_unit(v) {
                        return fail(format!("requires 0 <= {name} <= 1 ({name} = {v})"));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn contains(&self, p: &ParamPoint) -> bool {
        self.check_domain(p).is_ok()
    }

    /// Exact membership test for lattice indices scaled to a common denominator.
    fn contains_lattice(&self, [a, b, c]: [u64; 3], one: u64) -> bool {
        match self {
            Self::WeylChamber => a <= one && b <= a.min(one - a) && c <= b,
            Self::CartanBox | Self::SingleQubit => a <= one && b <= one && c <= one,
        }
    }

    /// All lattice points with spacing `g` inside the domain, in lexicographic order.
    pub fn grid_points(&self, g: Granularity) -> Vec<ParamPoint> {
        let n = g.max_index();
        let one = g.den as u64;
        let step = g.num as u64;
        let mut out = Vec::new();
        for i in 0..=n {
            for j in 0..=n {
                for k in 0..=n {
                    let scaled = [i as u64 * step, j as u64 * step, k as u64 * step];
                    if self.contains_lattice(scaled, one) {
                        out.push(ParamPoint(vec![g.coord(i), g.coord(j), g.coord(k)]));
                    }
                }
            }
        }
        out
    }
    /// Vertices of the (polytope) domain.
    pub fn corners(&self) -> Vec<ParamPoint> {
        let raw: &[[f64; 3]] = match self {
            Self::WeylChamber => &[[0.0, 0.0, 0.0], [0.5, 0.5, 0.0], [0.5, 0.5, 0.5], [1.0, 0.0, 0.0]],
            Self::CartanBox | Self::SingleQubit => &[
                [0.0, 0.0, 0.0],
                [0.0, 0.0, 1.0],
                [0.0, 1.0, 0.0],
                [0.0, 1.0, 1.0],
                [1.0, 0.0, 0.0],
                [1.0, 0.0, 1.0],
                [1.0, 1.0, 0.0],
                [1.0, 1.0, 1.0],
            ],
        };
        raw.iter().map(|c| ParamPoint(c.to_vec())).collect()
    }

    /// Reference lattice: [`grid_points`](Self::grid_points) plus any domain
    /// corners the lattice misses, so the mesh hull is the whole domain.
    /// Lexicographic order.
    pub fn reference_points(&self, g: Granularity) -> Vec<ParamPoint> {
        let mut points = self.grid_points(g);
        for c in self.corners() {
            if !points.contains(&c) {
                points.push(c);
            }
        }
        points.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite lattice coordinates"));
        points
    }
}


impl fmt::Display for GateFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for GateFamily {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::from_name(s)
    }
}

pub fn in_weyl_chamber(p: &ParamPoint) -> bool {
    GateFamily::WeylChamber.contains(p)
}

fn pauli_sum(terms: [(f64, CMatrix); 3]) -> Result<HermitianMatrix> {
    let dim = terms[0].1.dim();
    let hs = terms
        .into_iter()
        .map(|(c, m)| Ok((c, HermitianMatrix::new(m)?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(HermitianMatrix::linear_combination(
        dim,
        hs.iter().map(|(c, h)| (*c, h)),
    ))
}

/// `exp(-i π/2 (t_x XX + t_y YY + t_z ZZ))`.
pub fn cartan_unitary(p: &ParamPoint) -> Result<CMatrix> {
    let [x, y, z] = p.xyz()?;
    let two = |a| kron2(&pauli(a), &pauli(a));
    let h = pauli_sum([(x, two(Axis::X)?), (y, two(Axis::Y)?), (z, two(Axis::Z)?)])?;
    Ok(expm_hermitian(&h, FRAC_PI_2))
}

/// `exp(-i π/2 (t_x σ_x + t_y σ_y + t_z σ_z))`.
pub fn single_qubit_unitary(p: &ParamPoint) -> Result<CMatrix> {
    let [x, y, z] = p.xyz()?;
    let h = pauli_sum([
        (x, pauli(Axis::X)),
        (y, pauli(Axis::Y)),
        (z, pauli(Axis::Z)),
    ])?;
    Ok(expm_hermitian(&h, FRAC_PI_2))
}
