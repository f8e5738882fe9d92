//! Symmetric polytope unit balls: vertex and facet representations, the
//! Minkowski gauge, faces, Birkhoff–James orthogonality, and the finite
//! predicates used to describe perturbations on faces.

use std::collections::{BTreeSet, HashSet};

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use crate::arith::{invert, kernel_basis, vectors_rank, QMatrix, QVector, Rational};
use crate::error::{Error, Result};

pub const MAX_DIM: usize = 6;
pub const MAX_VERTICES: usize = 64;

/// A finite-dimensional real space whose unit ball is a centrally symmetric
/// polytope, held in both vertex and facet form.
///
/// Facet functionals `f` are normalized so the facet is `{x : f·x = 1}` and
/// the ball is `{x : f·x <= 1 for all f}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolyhedralSpace {
    name: String,
    dim: usize,
    vertices: Vec<QVector>,
    facets: Vec<QVector>,
    incidence: Vec<Vec<usize>>,
}

/// A face of the unit ball, given by the facets that are active on it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Face {
    pub facets: Vec<usize>,
    pub vertices: Vec<usize>,
    pub dimension: usize,
}

#[derive(Clone, Debug)]
pub struct FAssociatedTuple {
    pub base: QVector,
    pub face: Face,
    pub mu: Vec<Rational>,
    pub epsilon: Rational,
}

#[derive(Clone, Debug)]
pub struct EpsDiametricPair {
    pub center: QVector,
    pub u: QVector,
    pub v: QVector,
    pub epsilon: Rational,
}

/// On-disk description of a space. Only vertices are stored; facets are
/// always recomputed.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct SpaceFile {
    pub name: String,
    pub dim: usize,
    pub vertices: Vec<QVector>,
}

/// `true` if the first nonzero coordinate is positive.
pub(crate) fn is_positive_representative(v: &QVector) -> bool {
    v.iter()
        .find(|x| !x.is_zero())
        .is_some_and(Rational::is_positive)
}

impl PolyhedralSpace {
    /// Validates the vertex list and derives the facet representation by
    /// hyperplane enumeration over `n`-subsets of vertices.
    pub fn build(vertices: Vec<QVector>, name: impl Into<String>) -> Result<Self> {
        let name = name.into();
        let Some(first) = vertices.first() else {
            return Err(Error::InvalidSpace("empty vertex list".into()));
        };
        let dim = first.dim();
        if dim == 0 {
            return Err(Error::InvalidSpace("zero-dimensional vertices".into()));
        }
        if let Some(bad) = vertices.iter().find(|v| v.dim() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: bad.dim(),
            });
        }
        if dim > MAX_DIM {
            return Err(Error::CapExceeded(format!("dimension {dim} > {MAX_DIM}")));
        }
        if vertices.len() > MAX_VERTICES {
            return Err(Error::CapExceeded(format!(
                "{} vertices > {MAX_VERTICES}",
                vertices.len()
            )));
        }

        let set: BTreeSet<&QVector> = vertices.iter().collect();
        if set.len() != vertices.len() {
            return Err(Error::InvalidSpace("duplicate vertex".into()));
        }
        if let Some(v) = vertices.iter().find(|v| !set.contains(&-*v)) {
            return Err(Error::InvalidSpace(format!(
                "vertex set is not symmetric: -{v} missing"
            )));
        }
        if vectors_rank(&vertices) < dim {
            return Err(Error::InvalidSpace(format!(
                "vertices span less than dimension {dim}"
            )));
        }

        let facets = enumerate_facets(&vertices, dim);
        let incidence: Vec<Vec<usize>> = facets
            .iter()
            .map(|f| {
                (0..vertices.len())
                    .filter(|&i| f.dot(&vertices[i]).is_one())
                    .collect()
            })
            .collect();

        // A point of the vertex list is extreme iff the facets through it
        // pin it down, i.e. their functionals have full rank.
        for (i, v) in vertices.iter().enumerate() {
            let active: Vec<QVector> = facets
                .iter()
                .zip(&incidence)
                .filter(|(_, inc)| inc.contains(&i))
                .map(|(f, _)| f.clone())
                .collect();
            if vectors_rank(&active) < dim {
                return Err(Error::InvalidSpace(format!("{v} is not an extreme point")));
            }
        }

        Ok(PolyhedralSpace {
            name,
            dim,
            vertices,
            facets,
            incidence,
        })
    }

    pub fn from_file(file: &SpaceFile) -> Result<Self> {
        if let Some(v) = file.vertices.iter().find(|v| v.dim() != file.dim) {
            return Err(Error::DimensionMismatch {
                expected: file.dim,
                found: v.dim(),
            });
        }
        Self::build(file.vertices.clone(), file.name.clone())
    }

    pub fn to_file(&self) -> SpaceFile {
        SpaceFile {
            name: self.name.clone(),
            dim: self.dim,
            vertices: self.vertices.clone(),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vertices(&self) -> &[QVector] {
        &self.vertices
    }

    pub fn facets(&self) -> &[QVector] {
        &self.facets
    }

    pub fn incidence(&self) -> &[Vec<usize>] {
        &self.incidence
    }

    /// Vertices of facet `k`.
    pub fn facet_vertices(&self, k: usize) -> impl Iterator<Item = &QVector> {
        self.incidence[k].iter().map(move |&i| &self.vertices[i])
    }

    /// One facet index from each `±f` pair: the one whose first nonzero
    /// coordinate is positive.
    pub fn facet_pair_representatives(&self) -> Vec<usize> {
        (0..self.facets.len())
            .filter(|&k| is_positive_representative(&self.facets[k]))
            .collect()
    }

    /// One vertex index from each `±v` pair.
    pub fn vertex_pair_representatives(&self) -> Vec<usize> {
        (0..self.vertices.len())
            .filter(|&i| is_positive_representative(&self.vertices[i]))
            .collect()
    }

    pub fn vertex_index(&self, v: &QVector) -> Option<usize> {
        self.vertices.iter().position(|w| w == v)
    }

    pub fn is_vertex(&self, v: &QVector) -> bool {
        self.vertex_index(v).is_some()
    }

    fn check_dim(&self, x: &QVector) -> Result<()> {
        if x.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: x.dim(),
            });
        }
        Ok(())
    }

    /// The Minkowski gauge: the largest facet functional value.
    pub fn norm(&self, x: &QVector) -> Result<Rational> {
        self.check_dim(x)?;
        Ok(self.gauge(x))
    }

    pub(crate) fn gauge(&self, x: &QVector) -> Rational {
        self.facets
            .iter()
            .map(|f| f.dot(x))
            .max()
            .expect("space has facets")
    }

    /// Dual norm of a functional: its largest value over the vertices.
    pub fn dual_norm(&self, g: &QVector) -> Result<Rational> {
        self.check_dim(g)?;
        Ok(self
            .vertices
            .iter()
            .map(|v| g.dot(v))
            .max()
            .expect("space has vertices"))
    }

    /// Indices of facets with `f·v = 1`.
    pub fn active_facets(&self, v: &QVector) -> Vec<usize> {
        (0..self.facets.len())
            .filter(|&k| self.facets[k].dot(v).is_one())
            .collect()
    }

    /// The face cut out by the given facets.
    pub fn face_of(&self, facets: Vec<usize>) -> Face {
        let vertices: Vec<usize> = (0..self.vertices.len())
            .filter(|i| facets.iter().all(|&k| self.incidence[k].contains(i)))
            .collect();
        let dimension = match vertices.split_first() {
            None => 0,
            Some((&base, rest)) => {
                let diffs: Vec<QVector> = rest
                    .iter()
                    .map(|&i| &self.vertices[i] - &self.vertices[base])
                    .collect();
                vectors_rank(&diffs)
            }
        };
        Face {
            facets,
            vertices,
            dimension,
        }
    }

    /// The smallest face containing a point of the unit sphere: the
    /// intersection of every facet active at it.
    pub fn minimal_face(&self, v: &QVector) -> Result<Face> {
        let n = self.norm(v)?;
        if !n.is_one() {
            return Err(Error::NotOnSphere(n.to_string()));
        }
        Ok(self.face_of(self.active_facets(v)))
    }

    /// Whether `p` lies in the given face.
    pub fn face_contains(&self, face: &Face, p: &QVector) -> bool {
        p.dim() == self.dim
            && self.gauge(p) <= Rational::one()
            && face.facets.iter().all(|&k| self.facets[k].dot(p).is_one())
    }

    /// Birkhoff–James orthogonality `x ⊥ y`: `‖x + λy‖ >= ‖x‖` for all real λ.
    ///
    /// `λ ↦ ‖x + λy‖` is the upper envelope of the lines `f·x + λ f·y`; its
    /// minimum is attained where a rising line crosses a falling one, so the
    /// one-variable program is solved exactly by checking those crossings.
    pub fn bj_orthogonal(&self, x: &QVector, y: &QVector) -> Result<bool> {
        self.check_dim(x)?;
        self.check_dim(y)?;
        if y.is_zero() || x.is_zero() {
            return Ok(true);
        }
        let lines: BTreeSet<(Rational, Rational)> = self
            .facets
            .iter()
            .map(|f| (f.dot(x), f.dot(y)))
            .collect();
        let envelope = |lambda: &Rational| {
            lines
                .iter()
                .map(|(a, b)| a + lambda * b)
                .max()
                .expect("nonempty")
        };
        let rising: Vec<_> = lines.iter().filter(|(_, b)| b.is_positive()).collect();
        let falling: Vec<_> = lines.iter().filter(|(_, b)| b.is_negative()).collect();
        let mut min = None::<Rational>;
        for (a1, b1) in &rising {
            for (a2, b2) in &falling {
                let lambda = (a2 - a1) / (b1 - b2);
                let value = envelope(&lambda);
                if min.as_ref().is_none_or(|m| value < *m) {
                    min = Some(value);
                }
            }
        }
        let min = min.ok_or_else(|| Error::Internal("gauge envelope is unbounded".into()))?;
        Ok(min >= self.gauge(x))
    }

    /// A supporting functional at `v`: the mean of the facet functionals
    /// active at `v`. It takes the value 1 at `v`.
    pub fn averaged_supporting_functional(&self, v: &QVector) -> Result<QVector> {
        let n = self.norm(v)?;
        if !n.is_one() {
            return Err(Error::NotOnSphere(n.to_string()));
        }
        let active = self.active_facets(v);
        let mut g = QVector::zeros(self.dim);
        for &k in &active {
            g.axpy(&Rational::one(), &self.facets[k]);
        }
        Ok(g.scale(&Rational::from_integer(active.len() as i64).recip()))
    }

    /// `n - 1` independent unit vectors Birkhoff–James orthogonal to `v`,
    /// spanning the kernel of the averaged supporting functional at `v`.
    pub fn orthogonal_hyperplane_basis(&self, v: &QVector) -> Result<Vec<QVector>> {
        let g = self.averaged_supporting_functional(v)?;
        self.orthogonal_hyperplane_basis_for(v, &g)
    }

    /// Like [`Self::orthogonal_hyperplane_basis`] but for a caller-chosen
    /// supporting functional `g` at `v`.
    pub fn orthogonal_hyperplane_basis_for(&self, v: &QVector, g: &QVector) -> Result<Vec<QVector>> {
        let n = self.norm(v)?;
        if !n.is_one() {
            return Err(Error::NotOnSphere(n.to_string()));
        }
        if !g.dot(v).is_one() || !self.dual_norm(g)?.is_one() {
            return Err(Error::InvalidSpace(format!(
                "{g} is not a supporting functional at {v}"
            )));
        }
        let row = QMatrix::from_rows(std::slice::from_ref(g), self.dim)?;
        Ok(kernel_basis(&row)
            .into_iter()
            .map(|z| {
                let s = self.gauge(&z).recip();
                z.scale(&s)
            })
            .collect())
    }

    /// Checks the defining conditions of a face-associated tuple:
    /// `v ± Σ μ_i w_i` both lie in the face and `‖Σ μ_i w_i‖ < ε`.
    pub fn is_f_associated(&self, t: &FAssociatedTuple) -> Result<bool> {
        self.check_dim(&t.base)?;
        if t.mu.len() != t.face.vertices.len() {
            return Err(Error::DimensionMismatch {
                expected: t.face.vertices.len(),
                found: t.mu.len(),
            });
        }
        let mut shift = QVector::zeros(self.dim);
        for (mu, &i) in t.mu.iter().zip(&t.face.vertices) {
            shift.axpy(mu, &self.vertices[i]);
        }
        Ok(self.face_contains(&t.face, &(&t.base + &shift))
            && self.face_contains(&t.face, &(&t.base - &shift))
            && self.gauge(&shift) < t.epsilon)
    }

    /// `u, v` are ε-diametric about `x`: `u + v = 2x`, both in the ball and
    /// both within ε of `x`.
    pub fn is_eps_diametric(&self, p: &EpsDiametricPair) -> bool {
        if [&p.center, &p.u, &p.v].iter().any(|x| x.dim() != self.dim) {
            return false;
        }
        let one = Rational::one();
        &p.u + &p.v == p.center.scale(&Rational::from_integer(2))
            && self.gauge(&p.u) <= one
            && self.gauge(&p.v) <= one
            && self.gauge(&(&p.u - &p.center)) <= p.epsilon
            && self.gauge(&(&p.v - &p.center)) <= p.epsilon
    }
}

fn enumerate_facets(vertices: &[QVector], dim: usize) -> Vec<QVector> {
    let ones = QVector::new(vec![Rational::one(); dim]);
    let mut seen = HashSet::new();
    let mut facets = Vec::new();
    for subset in (0..vertices.len()).combinations(dim) {
        let rows: Vec<QVector> = subset.iter().map(|&i| vertices[i].clone()).collect();
        let m = QMatrix::from_rows(&rows, dim).expect("uniform dimension");
        let Some(inv) = invert(&m) else { continue };
        let f = inv.mul_vec(&ones).expect("square");
        if seen.contains(&f) {
            continue;
        }
        if vertices.iter().all(|v| f.dot(v) <= Rational::one()) {
            seen.insert(f.clone());
            facets.push(f);
        }
    }
    facets
}

/// Vertices of the cube ball of `ℓ∞ⁿ`, ordered with `+1` before `-1`
/// and the first coordinate most significant.
pub fn linf(n: usize) -> Result<PolyhedralSpace> {
    let vertices = (0..1usize << n)
        .map(|bits| {
            (0..n)
                .map(|i| {
                    if bits >> (n - 1 - i) & 1 == 0 {
                        Rational::one()
                    } else {
                        Rational::from_integer(-1)
                    }
                })
                .collect()
        })
        .collect();
    PolyhedralSpace::build(vertices, format!("linf{n}"))
}

/// Vertices `e1, -e1, e2, -e2, ...` of the cross-polytope ball of `ℓ₁ⁿ`.
pub fn l1(n: usize) -> Result<PolyhedralSpace> {
    let vertices = (0..n)
        .flat_map(|i| {
            let e = QVector::unit(n, i);
            let neg = -&e;
            [e, neg]
        })
        .collect();
    PolyhedralSpace::build(vertices, format!("l1-{n}"))
}

/// Hexagon with vertices `±(1,0), ±(1,1), ±(0,1)`.
pub fn hexagon() -> PolyhedralSpace {
    let vertices = [[1, 0], [1, 1], [0, 1], [-1, 0], [-1, -1], [0, -1]]
        .iter()
        .map(|v| QVector::from_ints(v))
        .collect();
    PolyhedralSpace::build(vertices, "hex").expect("hexagon is valid")
}

/// Octagon inscribed in the square: `±(1, ±1/2), ±(1/2, ±1)`.
pub fn octagon() -> PolyhedralSpace {
    let h = (1, 2);
    let o = (1, 1);
    let m = (-1, 2);
    let n = (-1, 1);
    let vertices = [[o, h], [h, o], [m, o], [n, h], [n, m], [m, n], [h, n], [o, m]]
        .iter()
        .map(|v| QVector::from_fracs(v))
        .collect();
    PolyhedralSpace::build(vertices, "oct").expect("octagon is valid")
}

/// Built-in spaces: `linfN`, `l1-N` (`1 <= N <= 6`), `hex`, `oct`.
pub fn builtin(name: &str) -> Option<PolyhedralSpace> {
    let parse_n = |s: &str| s.parse::<usize>().ok().filter(|n| (1..=MAX_DIM).contains(n));
    match name {
        "hex" => Some(hexagon()),
        "oct" => Some(octagon()),
        _ => {
            if let Some(n) = name.strip_prefix("linf").and_then(parse_n) {
                linf(n).ok()
            } else if let Some(n) = name.strip_prefix("l1-").and_then(parse_n) {
                l1(n).ok()
            } else {
                None
            }
        }
    }
}

pub const BUILTIN_NAMES: &[&str] = &["linf2", "linf3", "l1-2", "l1-3", "hex", "oct"];
