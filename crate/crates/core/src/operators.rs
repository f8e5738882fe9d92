//! Linear operators between polyhedral spaces: norm, norm attainment,
//! extremality in the operator ball, and enumeration of extreme contractions.
//!
//! The operator ball of `L(X, Y)` is the polytope
//! `{D : g·(D v) <= 1 for every vertex v of X and facet functional g of Y}`,
//! so an operator of norm one is extreme exactly when the constraints active
//! at it have full rank `dim X · dim Y`. That vertex test is the ground truth
//! every structural criterion in this crate is checked against.

use std::collections::BTreeSet;
use std::sync::Arc;

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use crate::arith::{invert, kernel_basis, vectors_rank, QMatrix, QVector, Rational};
use crate::error::{Error, Result};
use crate::polytope::{builtin, PolyhedralSpace, SpaceFile};

/// Largest `dim X · dim Y` for which the operator ball is enumerated.
pub const DEFAULT_ENUMERATION_CAP: usize = 9;

/// A matrix acting from `domain` to `codomain` in the coordinates the
/// spaces' vertices are written in, with its norm data cached.
#[derive(Clone, Debug)]
pub struct Operator {
    domain: Arc<PolyhedralSpace>,
    codomain: Arc<PolyhedralSpace>,
    matrix: QMatrix,
    norm: Rational,
    attaining: Vec<usize>,
    rank: usize,
}

impl PartialEq for Operator {
    fn eq(&self, other: &Self) -> bool {
        self.matrix == other.matrix && self.domain == other.domain && self.codomain == other.codomain
    }
}

/// Result of the exact vertex test for the operator ball.
#[derive(Clone, Debug, Serialize)]
pub struct ExtremalityCertificate {
    pub is_extreme: bool,
    /// `(domain vertex index, codomain facet index)` with `g·(T v) = 1`.
    pub active_pairs: Vec<(usize, usize)>,
    pub active_rank: usize,
    /// For a non-extreme operator: a nonzero `D` with `‖T ± D‖ <= 1`,
    /// scaled so the larger of the two norms is exactly 1.
    pub witness: Option<QMatrix>,
}

fn flat_pair_functional(g: &QVector, v: &QVector) -> QVector {
    QMatrix::outer(g, v).flatten()
}

impl Operator {
    pub fn new(domain: Arc<PolyhedralSpace>, codomain: Arc<PolyhedralSpace>, matrix: QMatrix) -> Result<Self> {
        if matrix.rows() != codomain.dim() || matrix.cols() != domain.dim() {
            return Err(Error::InvalidOperator(format!(
                "matrix is {}x{}, expected {}x{}",
                matrix.rows(),
                matrix.cols(),
                codomain.dim(),
                domain.dim()
            )));
        }
        let images: Vec<Rational> = domain
            .vertices()
            .iter()
            .map(|v| codomain.gauge(&matrix.mul_vec(v).expect("shape checked")))
            .collect();
        let norm = images.iter().max().cloned().unwrap_or_else(Rational::zero);
        let attaining = (0..images.len()).filter(|&i| images[i] == norm).collect();
        let rank = matrix.rank();
        Ok(Operator {
            domain,
            codomain,
            matrix,
            norm,
            attaining,
            rank,
        })
    }

    /// The rank-one operator `x ↦ (f·x) w`.
    pub fn rank_one(domain: Arc<PolyhedralSpace>, codomain: Arc<PolyhedralSpace>, w: &QVector, f: &QVector) -> Result<Self> {
        Self::new(domain, codomain, QMatrix::outer(w, f))
    }

    pub fn domain(&self) -> &Arc<PolyhedralSpace> {
        &self.domain
    }

    pub fn codomain(&self) -> &Arc<PolyhedralSpace> {
        &self.codomain
    }

    pub fn matrix(&self) -> &QMatrix {
        &self.matrix
    }

    pub fn norm(&self) -> &Rational {
        &self.norm
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    /// Indices of the domain vertices at which the norm is attained.
    pub fn attaining_indices(&self) -> &[usize] {
        &self.attaining
    }

    pub fn apply(&self, x: &QVector) -> Result<QVector> {
        self.matrix.mul_vec(x)
    }

    /// Same spaces, different matrix.
    pub fn with_matrix(&self, matrix: QMatrix) -> Result<Operator> {
        Operator::new(self.domain.clone(), self.codomain.clone(), matrix)
    }

    fn require_norm_one(&self) -> Result<()> {
        if !self.norm.is_one() {
            return Err(Error::InvalidOperator(format!("norm is {}, expected 1", self.norm)));
        }
        Ok(())
    }

    /// The domain vertices `v` with `‖T v‖ = ‖T‖`.
    pub fn norm_attainment_vertices(&self) -> Result<Vec<QVector>> {
        if self.matrix.is_zero() {
            return Err(Error::InvalidOperator("zero operator".into()));
        }
        Ok(self
            .attaining
            .iter()
            .map(|&i| self.domain.vertices()[i].clone())
            .collect())
    }

    /// Exact vertex test for the operator ball.
    pub fn is_extreme_contraction(&self) -> Result<ExtremalityCertificate> {
        self.require_norm_one()?;
        let n = self.domain.dim();
        let m = self.codomain.dim();
        let images: Vec<QVector> = self
            .domain
            .vertices()
            .iter()
            .map(|v| self.matrix.mul_vec(v).expect("shape checked"))
            .collect();

        let mut active_pairs = Vec::new();
        let mut functionals = Vec::new();
        for (i, (v, tv)) in self.domain.vertices().iter().zip(&images).enumerate() {
            for (k, g) in self.codomain.facets().iter().enumerate() {
                if g.dot(tv).is_one() {
                    active_pairs.push((i, k));
                    functionals.push(flat_pair_functional(g, v));
                }
            }
        }
        let active_rank = vectors_rank(&functionals);
        let is_extreme = active_rank == n * m;
        let witness = if is_extreme {
            None
        } else {
            let system = QMatrix::from_rows(&functionals, n * m)?;
            let direction = kernel_basis(&system)
                .into_iter()
                .next()
                .ok_or_else(|| Error::Internal("rank-deficient system without kernel".into()))?;
            let d = QMatrix::from_flat(m, n, &direction);
            Some(self.scale_witness(&d, &images)?)
        };
        Ok(ExtremalityCertificate {
            is_extreme,
            active_pairs,
            active_rank,
            witness,
        })
    }

    /// Largest `s` with `‖T ± sD‖ <= 1`, returned as `s·D`.
    fn scale_witness(&self, d: &QMatrix, images: &[QVector]) -> Result<QMatrix> {
        let mut best: Option<Rational> = None;
        for (v, tv) in self.domain.vertices().iter().zip(images) {
            let dv = d.mul_vec(v)?;
            for g in self.codomain.facets() {
                let slope = g.dot(&dv);
                if slope.is_zero() {
                    continue;
                }
                let slack = Rational::one() - g.dot(tv);
                let s = slack / slope.abs();
                if best.as_ref().is_none_or(|b| s < *b) {
                    best = Some(s);
                }
            }
        }
        let s = best.ok_or_else(|| Error::Internal("perturbation leaves every constraint unchanged".into()))?;
        Ok(d.scale(&s))
    }

    /// Structural test for rank-one operators: some facet `F` of the domain
    /// ball has `M_T ∩ Ext = vert(F) ∪ -vert(F)` and `T` maps `F` to a single
    /// vertex of the codomain ball. Returns the matching facet index.
    pub fn is_rank1_extreme_by_theorem(&self) -> Result<Option<usize>> {
        if self.rank != 1 {
            return Err(Error::InvalidOperator(format!("rank is {}, expected 1", self.rank)));
        }
        self.require_norm_one()?;
        let attaining: BTreeSet<usize> = self.attaining.iter().copied().collect();
        let verts = self.domain.vertices();
        for (k, inc) in self.domain.incidence().iter().enumerate() {
            let mut pair: BTreeSet<usize> = inc.iter().copied().collect();
            for &i in inc {
                let neg = self
                    .domain
                    .vertex_index(&-&verts[i])
                    .expect("vertex set is symmetric");
                pair.insert(neg);
            }
            if pair != attaining {
                continue;
            }
            let image = self.apply(&verts[inc[0]])?;
            let constant = inc[1..]
                .iter()
                .all(|&i| self.apply(&verts[i]).is_ok_and(|t| t == image));
            if constant && self.codomain.is_vertex(&image) {
                return Ok(Some(k));
            }
        }
        Ok(None)
    }

    /// Rank of the norming vertices whose images are vertices of the
    /// codomain ball.
    pub fn extremal_number(&self) -> Result<usize> {
        self.require_norm_one()?;
        let mut set = Vec::new();
        for &i in &self.attaining {
            let v = &self.domain.vertices()[i];
            if self.codomain.is_vertex(&self.apply(v)?) {
                set.push(v.clone());
            }
        }
        Ok(vectors_rank(&set))
    }

    pub fn to_file(&self) -> OperatorFile {
        OperatorFile {
            domain: SpaceRef::of(&self.domain),
            codomain: SpaceRef::of(&self.codomain),
            matrix: self.matrix.clone(),
        }
    }
}

impl ExtremalityCertificate {
    /// Re-checks the certificate against the operator.
    pub fn verify(&self, op: &Operator) -> bool {
        let n = op.domain.dim();
        let m = op.codomain.dim();
        let functionals: Vec<QVector> = self
            .active_pairs
            .iter()
            .map(|&(i, k)| flat_pair_functional(&op.codomain.facets()[k], &op.domain.vertices()[i]))
            .collect();
        let pairs_ok = self.active_pairs.iter().all(|&(i, k)| {
            op.apply(&op.domain.vertices()[i])
                .is_ok_and(|tv| op.codomain.facets()[k].dot(&tv).is_one())
        });
        if !pairs_ok || vectors_rank(&functionals) != self.active_rank {
            return false;
        }
        if self.is_extreme != (self.active_rank == n * m) {
            return false;
        }
        match (&self.witness, self.is_extreme) {
            (None, true) => true,
            (Some(d), false) => {
                if d.is_zero() || functionals.iter().any(|f| !f.dot(&d.flatten()).is_zero()) {
                    return false;
                }
                let (Ok(plus), Ok(minus)) = (
                    op.with_matrix(&op.matrix + d),
                    op.with_matrix(&op.matrix - d),
                ) else {
                    return false;
                };
                let one = Rational::one();
                plus.norm <= one && minus.norm <= one && (plus.norm == one || minus.norm == one)
            }
            _ => false,
        }
    }
}

/// All rank-one extreme contractions `x ↦ (f_F·x) w` for facet pairs `±F`
/// of `X` and vertices `w` of `Y`: `2rs` operators.
pub fn enumerate_rank1_extremes(x: &Arc<PolyhedralSpace>, y: &Arc<PolyhedralSpace>) -> Vec<Operator> {
    let mut out = Vec::new();
    for k in x.facet_pair_representatives() {
        let f = &x.facets()[k];
        for w in y.vertices() {
            out.push(Operator::rank_one(x.clone(), y.clone(), w, f).expect("dimensions agree"));
        }
    }
    out
}

/// Every vertex of the operator ball of `L(X, Y)`, by solving all
/// nonsingular `nm`-subsets of the constraint normals against every sign
/// pattern and keeping the feasible solutions. Sorted by matrix.
pub fn enumerate_extreme_contractions(
    x: &Arc<PolyhedralSpace>,
    y: &Arc<PolyhedralSpace>,
    cap: usize,
) -> Result<Vec<Operator>> {
    let n = x.dim();
    let m = y.dim();
    let size = n * m;
    if size > cap {
        return Err(Error::CapExceeded(format!("dim X · dim Y = {size} > {cap}")));
    }
    let mut normals: Vec<QVector> = Vec::new();
    for i in x.vertex_pair_representatives() {
        for k in y.facet_pair_representatives() {
            let a = flat_pair_functional(&y.facets()[k], &x.vertices()[i]);
            if !normals.contains(&a) {
                normals.push(a);
            }
        }
    }
    let one = Rational::one();
    let mut found = BTreeSet::new();
    for subset in (0..normals.len()).combinations(size) {
        let rows: Vec<QVector> = subset.iter().map(|&i| normals[i].clone()).collect();
        let Some(inv) = invert(&QMatrix::from_rows(&rows, size)?) else {
            continue;
        };
        for signs in 0..1u64 << size {
            let s: QVector = (0..size)
                .map(|b| {
                    if signs >> b & 1 == 0 {
                        one.clone()
                    } else {
                        -&one
                    }
                })
                .collect();
            let d = inv.mul_vec(&s)?;
            if normals.iter().all(|a| a.dot(&d).abs() <= one) {
                found.insert(QMatrix::from_flat(m, n, &d));
            }
        }
    }
    found
        .into_iter()
        .map(|mat| Operator::new(x.clone(), y.clone(), mat))
        .collect()
}

/// A space given by built-in name or inline.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum SpaceRef {
    Named(String),
    Inline(SpaceFile),
}

impl SpaceRef {
    pub fn resolve(&self) -> Result<PolyhedralSpace> {
        match self {
            SpaceRef::Named(name) => {
                builtin(name).ok_or_else(|| Error::InvalidSpace(format!("unknown space {name:?}")))
            }
            SpaceRef::Inline(file) => PolyhedralSpace::from_file(file),
        }
    }

    /// The built-in name when the space is a built-in, inline otherwise.
    pub fn of(space: &PolyhedralSpace) -> SpaceRef {
        match builtin(space.name()) {
            Some(b) if b == *space => SpaceRef::Named(space.name().to_string()),
            _ => SpaceRef::Inline(space.to_file()),
        }
    }
}

/// On-disk operator: `{"domain": ..., "codomain": ..., "matrix": [[...]]}`.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct OperatorFile {
    pub domain: SpaceRef,
    pub codomain: SpaceRef,
    pub matrix: QMatrix,
}

impl OperatorFile {
    pub fn load(&self) -> Result<Operator> {
        Operator::new(
            Arc::new(self.domain.resolve()?),
            Arc::new(self.codomain.resolve()?),
            self.matrix.clone(),
        )
    }
}
