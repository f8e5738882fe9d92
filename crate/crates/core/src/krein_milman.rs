//! Convex decompositions of norm-one operators into extreme contractions.
//!
//! The rank-one procedure writes `T = w ⊗ h` as `Σ c_i α_ij (w_i ⊗ f_j)`,
//! where `Σ c_i w_i` is a Carathéodory decomposition of `w = T v` over the
//! codomain vertices and the `f_j` are the facet functionals through a
//! norming vertex `v`. The weights `α_j` solve
//!
//! ```text
//! Σ_j α_j = 1,   Σ_j α_j f_j(z_k) = 0 for every kernel vector z_k,   α >= 0,
//! ```
//!
//! which does not depend on `i`. Companion matrices and the general
//! decomposition over the enumerated operator-ball vertices live here too.

use std::collections::BTreeMap;
use std::sync::Arc;

use itertools::Itertools;
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::arith::{kernel_basis_normalized, vectors_rank, QMatrix, QVector, Rational};
use crate::error::{Error, Result};
use crate::lp::{caratheodory_decompose, farkas_decide, lp_feasible, verify_dual, ConvexDecomposition, FarkasCertificate};
use crate::operators::{enumerate_extreme_contractions, Operator};
use crate::polytope::PolyhedralSpace;

/// Largest number of ordered facet tuples `enumerate_companion_matrices`
/// will build.
pub const DEFAULT_COMPANION_CAP: usize = 720;

fn serialize_operators<S: Serializer>(ops: &[Operator], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(ops.iter().map(Operator::matrix))
}

/// `T = Σ weights[k] · parts[k]`.
#[derive(Clone, Debug, Serialize)]
pub struct Decomposition {
    pub weights: Vec<Rational>,
    #[serde(serialize_with = "serialize_operators")]
    pub parts: Vec<Operator>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub transcript: Option<Rank1Transcript>,
}

/// Intermediate data of a successful rank-one run.
#[derive(Clone, Debug, Serialize)]
pub struct Rank1Transcript {
    pub vertex_index: usize,
    pub vertex: QVector,
    pub image: QVector,
    pub caratheodory: ConvexDecomposition,
    /// Gauge-normalized kernel basis of `T`.
    pub kernel: Vec<QVector>,
    /// Domain facets whose functionals form the columns of the system.
    pub facets: Vec<usize>,
    /// Solution `α` of the system, shared by every Carathéodory term.
    pub alpha: Vec<Rational>,
    /// Vertex indices tried, in order, the last one being `vertex_index`.
    pub tried_vertices: Vec<usize>,
}

/// Dual Farkas certificate for an infeasible system `A x = b, x >= 0`.
#[derive(Clone, Debug, Serialize)]
pub struct InfeasibilityReport {
    pub context: String,
    pub matrix: QMatrix,
    pub rhs: QVector,
    pub certificate: QVector,
}

impl InfeasibilityReport {
    pub fn verify(&self) -> bool {
        verify_dual(&self.matrix, &self.rhs, &self.certificate)
    }
}

#[derive(Clone, Debug, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum DecompositionOutcome {
    Decomposed(Decomposition),
    Infeasible(InfeasibilityReport),
}

impl DecompositionOutcome {
    pub fn decomposition(&self) -> Option<&Decomposition> {
        match self {
            DecompositionOutcome::Decomposed(d) => Some(d),
            DecompositionOutcome::Infeasible(_) => None,
        }
    }

    pub fn report(&self) -> Option<&InfeasibilityReport> {
        match self {
            DecompositionOutcome::Decomposed(_) => None,
            DecompositionOutcome::Infeasible(r) => Some(r),
        }
    }
}

impl Decomposition {
    pub fn reconstruct(&self) -> Option<QMatrix> {
        let first = self.parts.first()?;
        let mut acc = QMatrix::zeros(first.matrix().rows(), first.matrix().cols());
        for (w, p) in self.weights.iter().zip(&self.parts) {
            acc.axpy(w, p.matrix());
        }
        Some(acc)
    }

    /// Exact check: nonnegative weights summing to 1, every part an extreme
    /// contraction, and the combination equal to `t`.
    pub fn verify(&self, t: &Operator) -> bool {
        if self.weights.len() != self.parts.len() || self.weights.iter().any(Rational::is_negative) {
            return false;
        }
        let total: Rational = self.weights.iter().sum();
        if !total.is_one() || self.reconstruct().as_ref() != Some(t.matrix()) {
            return false;
        }
        self.parts
            .iter()
            .all(|p| p.is_extreme_contraction().is_ok_and(|c| c.is_extreme))
    }
}

/// Which facet functionals through `v` become columns of the system.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum FacetSelection {
    /// All facets through `v` at once.
    #[default]
    All,
    /// Every `n`-subset in turn, stopping at the first feasible one.
    NSubsets,
}

#[derive(Clone, Debug, Default)]
pub struct Rank1Options {
    /// Start from this domain vertex instead of the lowest norming one.
    pub vertex: Option<usize>,
    pub facets: FacetSelection,
}

pub fn decompose_rank1(t: &Operator) -> Result<DecompositionOutcome> {
    decompose_rank1_with(t, &Rank1Options::default())
}

/// Rank-one decomposition. Tries every norming vertex (the chosen one
/// first) before giving up with the last dual certificate.
pub fn decompose_rank1_with(t: &Operator, opts: &Rank1Options) -> Result<DecompositionOutcome> {
    if t.rank() != 1 {
        return Err(Error::InvalidOperator(format!("rank is {}, expected 1", t.rank())));
    }
    if !t.norm().is_one() {
        return Err(Error::InvalidOperator(format!("norm is {}, expected 1", t.norm())));
    }
    let mut order: Vec<usize> = t.attaining_indices().to_vec();
    if let Some(start) = opts.vertex {
        let pos = order.iter().position(|&i| i == start).ok_or_else(|| {
            Error::InvalidOperator(format!("vertex {start} does not attain the norm"))
        })?;
        order.remove(pos);
        order.insert(0, start);
    }
    let mut last = None;
    for (k, &vi) in order.iter().enumerate() {
        match rank1_at(t, vi, opts.facets)? {
            Ok(mut dec) => {
                if let Some(tr) = dec.transcript.as_mut() {
                    tr.tried_vertices = order[..=k].to_vec();
                }
                return Ok(DecompositionOutcome::Decomposed(dec));
            }
            Err(report) => last = Some(report),
        }
    }
    Ok(DecompositionOutcome::Infeasible(
        last.ok_or_else(|| Error::Internal("no norming vertex".into()))?,
    ))
}

/// Rows: `Σ α = 1`, then `Σ α_j f_j(z_k) = 0` per kernel vector.
fn weight_system(x: &PolyhedralSpace, kernel: &[QVector], facets: &[usize]) -> (QMatrix, QVector) {
    let mut a = QMatrix::zeros(kernel.len() + 1, facets.len());
    for (j, &f) in facets.iter().enumerate() {
        a[(0, j)] = Rational::one();
        for (k, z) in kernel.iter().enumerate() {
            a[(k + 1, j)] = x.facets()[f].dot(z);
        }
    }
    (a, QVector::unit(kernel.len() + 1, 0))
}

fn rank1_at(
    t: &Operator,
    vi: usize,
    selection: FacetSelection,
) -> Result<std::result::Result<Decomposition, InfeasibilityReport>> {
    let x = t.domain();
    let y = t.codomain();
    let v = x.vertices()[vi].clone();
    let w = t.apply(&v)?;
    let cara = caratheodory_decompose(y.vertices(), &w)?;
    let kernel = kernel_basis_normalized(t.matrix(), |z| x.gauge(z));
    let through_v = x.active_facets(&v);
    let candidates: Vec<Vec<usize>> = match selection {
        FacetSelection::All => vec![through_v],
        FacetSelection::NSubsets => through_v.into_iter().combinations(x.dim()).collect(),
    };

    let mut last = None;
    for cols in candidates {
        let (a, b) = weight_system(x, &kernel, &cols);
        match farkas_decide(&a, &b)? {
            FarkasCertificate::Primal(alpha) => {
                let mut acc: BTreeMap<QMatrix, Rational> = BTreeMap::new();
                for (c, wi) in cara.weights.iter().zip(&cara.points) {
                    for (aj, &f) in alpha.iter().zip(&cols) {
                        if aj.is_zero() {
                            continue;
                        }
                        *acc.entry(QMatrix::outer(wi, &x.facets()[f])).or_default() += c * aj;
                    }
                }
                let (weights, parts) = collect_parts(t, acc)?;
                let dec = Decomposition {
                    weights,
                    parts,
                    transcript: Some(Rank1Transcript {
                        vertex_index: vi,
                        vertex: v,
                        image: w,
                        caratheodory: cara,
                        kernel,
                        facets: cols,
                        alpha: alpha.into_entries(),
                        tried_vertices: vec![vi],
                    }),
                };
                if dec.reconstruct().as_ref() != Some(t.matrix()) {
                    return Err(Error::Internal("rank-one decomposition does not reconstruct".into()));
                }
                return Ok(Ok(dec));
            }
            FarkasCertificate::Dual(cert) => {
                last = Some(InfeasibilityReport {
                    context: format!("weight system at vertex {vi} with facets {cols:?}"),
                    matrix: a,
                    rhs: b,
                    certificate: cert,
                });
            }
        }
    }
    Ok(Err(last.ok_or_else(|| {
        Error::Internal(format!("fewer than {} facets through vertex {vi}", x.dim()))
    })?))
}

fn collect_parts(t: &Operator, acc: BTreeMap<QMatrix, Rational>) -> Result<(Vec<Rational>, Vec<Operator>)> {
    let mut weights = Vec::new();
    let mut parts = Vec::new();
    for (m, w) in acc {
        if w.is_zero() {
            continue;
        }
        parts.push(t.with_matrix(m)?);
        weights.push(w);
    }
    Ok((weights, parts))
}

/// Matrix `A` with `a_1j = 1` and `T_j z_i = a_(i+1)j · T_j v`, together
/// with the data it was computed from.
#[derive(Clone, Debug)]
pub struct CompanionMatrix {
    pub matrix: QMatrix,
    pub vertex: QVector,
    pub z_basis: Vec<QVector>,
    pub witnesses: Vec<Operator>,
}

impl Serialize for CompanionMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("CompanionMatrix", 4)?;
        st.serialize_field("matrix", &self.matrix)?;
        st.serialize_field("vertex", &self.vertex)?;
        st.serialize_field("z_basis", &self.z_basis)?;
        let ws: Vec<&QMatrix> = self.witnesses.iter().map(Operator::matrix).collect();
        st.serialize_field("witnesses", &ws)?;
        st.end()
    }
}

impl CompanionMatrix {
    pub fn hypothesis_holds(&self) -> Result<bool> {
        companion_hypothesis_holds(&self.matrix)
    }
}

fn collinear_ratio(u: &QVector, w: &QVector) -> Option<Rational> {
    let p = w.iter().position(|x| !x.is_zero())?;
    let a = &u[p] / &w[p];
    (w.scale(&a) == *u).then_some(a)
}

fn bad(msg: impl Into<String>) -> Error {
    Error::InvalidCompanion(msg.into())
}

pub fn build_companion_matrix(v: &QVector, z_basis: &[QVector], witnesses: &[Operator]) -> Result<CompanionMatrix> {
    let first = witnesses.first().ok_or_else(|| bad("no witnesses"))?;
    let x = first.domain().clone();
    let n = x.dim();
    if witnesses.len() != n {
        return Err(bad(format!("{} witnesses, expected {n}", witnesses.len())));
    }
    if z_basis.len() + 1 != n {
        return Err(bad(format!("{} z vectors, expected {}", z_basis.len(), n - 1)));
    }
    let vi = x
        .vertex_index(v)
        .ok_or_else(|| bad(format!("{v} is not a vertex of the domain")))?;

    let image = first.apply(v)?;
    for (j, t) in witnesses.iter().enumerate() {
        if t.domain() != first.domain() || t.codomain() != first.codomain() {
            return Err(bad(format!("witness {j} acts between different spaces")));
        }
        if t.rank() != 1 || !t.norm().is_one() || t.is_rank1_extreme_by_theorem()?.is_none() {
            return Err(bad(format!("witness {j} is not a rank-one extreme contraction")));
        }
        if !t.attaining_indices().contains(&vi) {
            return Err(bad(format!("witness {j} does not attain its norm at {v}")));
        }
        if t.apply(v)? != image {
            return Err(bad(format!("witness {j} has a different image at {v}")));
        }
    }

    for (i, z) in z_basis.iter().enumerate() {
        if z.dim() != n {
            return Err(Error::DimensionMismatch { expected: n, found: z.dim() });
        }
        if !x.norm(z)?.is_one() {
            return Err(bad(format!("z_{} is not a unit vector", i + 2)));
        }
        if !x.bj_orthogonal(v, z)? {
            return Err(bad(format!("{v} is not Birkhoff-James orthogonal to {z}")));
        }
    }
    if vectors_rank(z_basis) != n - 1 {
        return Err(bad("z vectors are linearly dependent"));
    }

    let mut a = QMatrix::zeros(n, n);
    for (j, t) in witnesses.iter().enumerate() {
        a[(0, j)] = Rational::one();
        for (i, z) in z_basis.iter().enumerate() {
            a[(i + 1, j)] = collinear_ratio(&t.apply(z)?, &image)
                .ok_or_else(|| bad(format!("T_{} z_{} is not a multiple of T v", j + 1, i + 2)))?;
        }
    }
    Ok(CompanionMatrix {
        matrix: a,
        vertex: v.clone(),
        z_basis: z_basis.to_vec(),
        witnesses: witnesses.to_vec(),
    })
}

/// True iff no `y` with `y_1 < 0` has `Aᵀ y >= 0`.
pub fn companion_hypothesis_holds(a: &QMatrix) -> Result<bool> {
    let n = a.rows();
    if a.cols() != n {
        return Err(bad(format!("matrix is {}x{}, expected square", n, a.cols())));
    }
    let pin = QMatrix::from_rows(&[QVector::unit(n, 0)], n)?;
    let y = lp_feasible(&pin, &QVector::from_ints(&[-1]), &a.transpose(), &QVector::zeros(n))?;
    Ok(y.is_none())
}

/// Companion matrices at `v` over the fixed z-basis of
/// `orthogonal_hyperplane_basis(v)` and every ordered `n`-tuple of distinct
/// facet maps `w ⊗ f_j` through `v`.
pub fn enumerate_companion_matrices(
    x: &Arc<PolyhedralSpace>,
    y: &Arc<PolyhedralSpace>,
    v: &QVector,
    w: &QVector,
    cap: usize,
) -> Result<Vec<CompanionMatrix>> {
    if !x.is_vertex(v) {
        return Err(Error::InvalidSpace(format!("{v} is not a vertex of {}", x.name())));
    }
    if !y.is_vertex(w) {
        return Err(Error::InvalidSpace(format!("{w} is not a vertex of {}", y.name())));
    }
    let n = x.dim();
    let facets = x.active_facets(v);
    let count: usize = (0..n).map(|i| facets.len().saturating_sub(i)).product();
    if count > cap {
        return Err(Error::CapExceeded(format!("{count} facet tuples > {cap}")));
    }
    let z = x.orthogonal_hyperplane_basis(v)?;
    let maps: Vec<Operator> = facets
        .iter()
        .map(|&f| Operator::rank_one(x.clone(), y.clone(), w, &x.facets()[f]))
        .collect::<Result<_>>()?;
    (0..maps.len())
        .permutations(n)
        .map(|tuple| {
            let ws: Vec<Operator> = tuple.iter().map(|&k| maps[k].clone()).collect();
            build_companion_matrix(v, &z, &ws)
        })
        .collect()
}

/// Solves `Σ λ_e E = T, Σ λ_e = 1, λ >= 0` over the vertices of the
/// operator ball, optionally keeping only those of a given rank.
pub fn decompose_general(t: &Operator, rank_filter: Option<usize>, cap: usize) -> Result<DecompositionOutcome> {
    if !t.norm().is_one() {
        return Err(Error::InvalidOperator(format!("norm is {}, expected 1", t.norm())));
    }
    let extremes: Vec<Operator> = enumerate_extreme_contractions(t.domain(), t.codomain(), cap)?
        .into_iter()
        .filter(|e| rank_filter.is_none_or(|r| e.rank() == r))
        .collect();
    let size = t.matrix().rows() * t.matrix().cols();
    let mut a = QMatrix::zeros(size + 1, extremes.len());
    for (c, e) in extremes.iter().enumerate() {
        for (r, val) in e.matrix().flatten().iter().enumerate() {
            a[(r, c)] = val.clone();
        }
        a[(size, c)] = Rational::one();
    }
    let mut rhs = t.matrix().flatten().into_entries();
    rhs.push(Rational::one());
    let b = QVector::new(rhs);
    let context = match rank_filter {
        Some(r) => format!("convex combination of rank-{r} extreme contractions"),
        None => "convex combination of extreme contractions".to_string(),
    };

    let cert = if extremes.is_empty() {
        FarkasCertificate::Dual(QVector::unit(size + 1, size).scale(&Rational::from_integer(-1)))
    } else {
        farkas_decide(&a, &b)?
    };
    match cert {
        FarkasCertificate::Primal(lambda) => {
            let mut acc = BTreeMap::new();
            for (l, e) in lambda.iter().zip(&extremes) {
                if !l.is_zero() {
                    acc.insert(e.matrix().clone(), l.clone());
                }
            }
            let (weights, parts) = collect_parts(t, acc)?;
            Ok(DecompositionOutcome::Decomposed(Decomposition {
                weights,
                parts,
                transcript: None,
            }))
        }
        FarkasCertificate::Dual(y) => Ok(DecompositionOutcome::Infeasible(InfeasibilityReport {
            context,
            matrix: a,
            rhs: b,
            certificate: y,
        })),
    }
}
