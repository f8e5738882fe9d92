//! Rank-one operators `ℓ∞ⁿ(ℂ) → ℓ₁ⁿ(ℂ)` in floating point.
//!
//! Fix a unimodular `u` and write `ũ_1 = u`, `ũ_j` = `u` with its `j`-th
//! coordinate negated. A rank-one `T` maps every `ũ_j` to a multiple
//! `κ_j w` of `w = T u`; the κ-profile classifies norm-one and extreme
//! operators and drives the splitting decomposition.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Comparison tolerance for everything in this module.
pub const TOL: f64 = 1e-9;
const SNAP: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CVector(pub Vec<Complex64>);

impl CVector {
    pub fn new(entries: Vec<Complex64>) -> Self {
        CVector(entries)
    }

    pub fn from_real(xs: &[f64]) -> Self {
        CVector(xs.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    pub fn ones(n: usize) -> Self {
        CVector(vec![Complex64::new(1.0, 0.0); n])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn l1_norm(&self) -> f64 {
        self.0.iter().map(|z| z.norm()).sum()
    }

    pub fn linf_norm(&self) -> f64 {
        self.0.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Bilinear pairing `Σ a_j b_j` (no conjugation).
    pub fn pair(&self, other: &CVector) -> Complex64 {
        self.0.iter().zip(&other.0).map(|(a, b)| a * b).sum()
    }

    pub fn scale(&self, s: Complex64) -> CVector {
        CVector(self.0.iter().map(|z| z * s).collect())
    }

    pub fn is_unimodular(&self) -> bool {
        self.0.iter().all(|z| (z.norm() - 1.0).abs() < TOL)
    }

    fn check_finite(&self) -> Result<()> {
        if self.0.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            Ok(())
        } else {
            Err(Error::Complex("non-finite entry".into()))
        }
    }

    /// `ũ_j` for `j` counted from 0.
    pub fn flipped(&self, j: usize) -> CVector {
        let mut out = self.clone();
        if j > 0 {
            out.0[j] = -out.0[j];
        }
        out
    }
}

/// `T(z) = (f·z) w`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComplexRank1Op {
    pub w: CVector,
    pub f: CVector,
}

impl ComplexRank1Op {
    pub fn new(w: CVector, f: CVector) -> Result<Self> {
        if w.dim() != f.dim() || w.dim() == 0 {
            return Err(Error::DimensionMismatch {
                expected: w.dim(),
                found: f.dim(),
            });
        }
        w.check_finite()?;
        f.check_finite()?;
        Ok(ComplexRank1Op { w, f })
    }

    /// The operator with the given profile: `T u = w` and `T ũ_j = κ_j w`.
    pub fn from_profile(p: &KappaProfile) -> Result<Self> {
        let n = p.u.dim();
        if !p.u.is_unimodular() {
            return Err(Error::Complex("u is not unimodular".into()));
        }
        let tail: f64 = p.kappa[1..].iter().sum();
        let mut f = Vec::with_capacity(n);
        f.push(Complex64::new((3.0 - n as f64 + tail) / 2.0, 0.0) / p.u.0[0]);
        for j in 1..n {
            f.push(Complex64::new((1.0 - p.kappa[j]) / 2.0, 0.0) / p.u.0[j]);
        }
        ComplexRank1Op::new(p.w.clone(), CVector(f))
    }

    pub fn dim(&self) -> usize {
        self.w.dim()
    }

    pub fn apply(&self, z: &CVector) -> CVector {
        self.w.scale(self.f.pair(z))
    }

    /// `‖T‖ = ‖w‖₁ · Σ|f_j|`.
    pub fn norm(&self) -> f64 {
        self.w.l1_norm() * self.f.l1_norm()
    }

    pub fn matrix(&self) -> Vec<Vec<Complex64>> {
        self.w
            .0
            .iter()
            .map(|wi| self.f.0.iter().map(|fj| wi * fj).collect())
            .collect()
    }

    /// A unimodular vector at which the norm is attained: all ones when that
    /// works, otherwise the phases of `conj(f)`.
    pub fn attaining_u(&self) -> CVector {
        let ones = CVector::ones(self.dim());
        if (self.f.pair(&ones).norm() - self.f.l1_norm()).abs() < TOL {
            return ones;
        }
        CVector(
            self.f
                .0
                .iter()
                .map(|fj| {
                    if fj.norm() < TOL {
                        Complex64::new(1.0, 0.0)
                    } else {
                        fj.conj() / fj.norm()
                    }
                })
                .collect(),
        )
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KappaProfile {
    pub u: CVector,
    pub w: CVector,
    pub kappa: Vec<f64>,
}

impl KappaProfile {
    pub fn interior_indices(&self) -> Vec<usize> {
        (1..self.kappa.len())
            .filter(|&j| (self.kappa[j] - 1.0).abs() > TOL && (self.kappa[j] + 1.0).abs() > TOL)
            .collect()
    }

    /// `½|(3−n) + Σ_{j≥2} κ_j| + ½ Σ_{j≥2} |1 − κ_j|`.
    pub fn norm_formula(&self) -> f64 {
        let n = self.kappa.len() as f64;
        let tail = &self.kappa[1..];
        0.5 * (3.0 - n + tail.iter().sum::<f64>()).abs() + 0.5 * tail.iter().map(|k| (1.0 - k).abs()).sum::<f64>()
    }

    /// The profile conditions: `κ_1 = 1`, `κ_j ∈ [−1, 1]`, `Σ κ_j >= n − 2`,
    /// `‖w‖₁ = 1` and the norm formula equal to 1.
    pub fn is_norm_one(&self) -> bool {
        let n = self.kappa.len() as f64;
        (self.kappa[0] - 1.0).abs() < TOL
            && self.kappa.iter().all(|k| k.abs() <= 1.0 + TOL)
            && self.kappa.iter().sum::<f64>() >= n - 2.0 - TOL
            && (self.w.l1_norm() - 1.0).abs() < TOL
            && (self.norm_formula() - 1.0).abs() < TOL
    }

    pub fn is_extreme(&self) -> bool {
        let support: Vec<f64> = self.w.0.iter().map(|z| z.norm()).filter(|&m| m >= TOL).collect();
        self.is_norm_one()
            && support.len() == 1
            && (support[0] - 1.0).abs() < TOL
            && self.interior_indices().is_empty()
    }
}

/// Coefficients `α` with `z = Σ α_j ũ_j`.
pub fn u_basis_coords(u: &CVector, z: &CVector) -> Result<Vec<Complex64>> {
    if !u.is_unimodular() {
        return Err(Error::Complex("u is not unimodular".into()));
    }
    if u.dim() != z.dim() {
        return Err(Error::DimensionMismatch {
            expected: u.dim(),
            found: z.dim(),
        });
    }
    let n = u.dim();
    let r: Vec<Complex64> = z.0.iter().zip(&u.0).map(|(a, b)| a / b).collect();
    let mut alpha = Vec::with_capacity(n);
    alpha.push(r[0] * ((3.0 - n as f64) / 2.0) + r[1..].iter().sum::<Complex64>() * 0.5);
    for rj in &r[1..] {
        alpha.push((r[0] - rj) * 0.5);
    }

    let mut back = vec![Complex64::new(0.0, 0.0); n];
    for (j, a) in alpha.iter().enumerate() {
        for (b, x) in back.iter_mut().zip(&u.flipped(j).0) {
            *b += a * x;
        }
    }
    let err = back.iter().zip(&z.0).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    if err > TOL * (1.0 + z.linf_norm()) {
        return Err(Error::Complex(format!("coordinate reconstruction error {err:e}")));
    }
    Ok(alpha)
}

/// The κ-profile of `T` relative to `u`, with `w = T u`.
pub fn kappa_profile(t: &ComplexRank1Op, u: &CVector) -> Result<KappaProfile> {
    if !u.is_unimodular() {
        return Err(Error::Complex("u is not unimodular".into()));
    }
    if u.dim() != t.dim() {
        return Err(Error::DimensionMismatch {
            expected: t.dim(),
            found: u.dim(),
        });
    }
    let base = t.f.pair(u);
    let w = t.w.scale(base);
    if w.l1_norm() < TOL {
        return Err(Error::Complex("T u vanishes; u does not attain the norm".into()));
    }
    let mut kappa = Vec::with_capacity(u.dim());
    for j in 0..u.dim() {
        let k = t.f.pair(&u.flipped(j)) / base;
        if k.im.abs() >= TOL {
            return Err(Error::Complex(format!("κ_{} = {k} is not real", j + 1)));
        }
        kappa.push(k.re);
    }
    Ok(KappaProfile {
        u: u.clone(),
        w,
        kappa,
    })
}

/// Profile extraction succeeds and satisfies the norm-one conditions.
pub fn is_norm_one_rank1(t: &ComplexRank1Op, u: &CVector) -> bool {
    kappa_profile(t, u).is_ok_and(|p| p.is_norm_one() && (t.norm() - 1.0).abs() < TOL)
}

pub fn is_extreme_contraction_c(t: &ComplexRank1Op, u: &CVector) -> bool {
    is_norm_one_rank1(t, u) && kappa_profile(t, u).is_ok_and(|p| p.is_extreme())
}

fn snap(x: f64) -> f64 {
    if (x - 1.0).abs() < SNAP {
        1.0
    } else if (x + 1.0).abs() < SNAP {
        -1.0
    } else {
        x
    }
}

/// Splits a profile with an interior `κ` into two profiles `A₁`, `A₂` with
/// `κ = (1 − t) κ(A₁) + t κ(A₂)` and one more coordinate equal to `±1`.
pub fn split_once(p: &KappaProfile) -> Result<(KappaProfile, KappaProfile, f64)> {
    let interior = p.interior_indices();
    let mut a1 = p.clone();
    let mut a2 = p.clone();
    let t = match interior[..] {
        [] => return Err(Error::Complex("profile has no interior κ to split".into())),
        // A lone interior κ forces every other κ to be +1, since a second −1
        // would push Σκ below n − 2. Both ±1 endpoints are then admissible.
        [j] => {
            let k = p.kappa[j];
            a1.kappa[j] = 1.0;
            a2.kappa[j] = -1.0;
            (1.0 - k) / 2.0
        }
        [a, b, ..] => {
            let (ka, kb) = (p.kappa[a], p.kappa[b]);
            let merged = snap(ka + kb - 1.0);
            a1.kappa[a] = 1.0;
            a1.kappa[b] = merged;
            a2.kappa[a] = merged;
            a2.kappa[b] = 1.0;
            (1.0 - ka) / ((1.0 - ka) + (1.0 - kb))
        }
    };
    for prof in [&a1, &a2] {
        if !prof.is_norm_one() {
            return Err(Error::Complex(format!("split produced invalid profile {:?}", prof.kappa)));
        }
    }
    Ok((a1, a2, t))
}

#[derive(Clone, Debug, Serialize)]
pub struct ComplexLeaf {
    pub weight: f64,
    pub op: ComplexRank1Op,
    pub kappa: Vec<f64>,
    /// Number of `split_once` calls on the path to this leaf.
    pub depth: usize,
}

/// Writes a norm-one `T` as a convex combination of extreme contractions:
/// first split `w` over its support, then split κ until every leaf is
/// extreme. Leaves come depth-first, lowest index first.
pub fn decompose_c(t: &ComplexRank1Op, u: &CVector) -> Result<Vec<ComplexLeaf>> {
    let profile = kappa_profile(t, u)?;
    if !profile.is_norm_one() || (t.norm() - 1.0).abs() >= TOL {
        return Err(Error::Complex("operator does not have norm one".into()));
    }
    let n = t.dim();
    let mut leaves = Vec::new();
    for (i, wi) in profile.w.0.iter().enumerate() {
        let m = wi.norm();
        if m < TOL {
            continue;
        }
        let mut e = vec![Complex64::new(0.0, 0.0); n];
        e[i] = wi / m;
        let term = KappaProfile {
            w: CVector(e),
            ..profile.clone()
        };
        split_tree(&term, m, 0, &mut leaves)?;
    }
    Ok(leaves)
}

fn split_tree(p: &KappaProfile, weight: f64, depth: usize, out: &mut Vec<ComplexLeaf>) -> Result<()> {
    if p.interior_indices().is_empty() {
        if weight > TOL {
            out.push(ComplexLeaf {
                weight,
                op: ComplexRank1Op::from_profile(p)?,
                kappa: p.kappa.clone(),
                depth,
            });
        }
        return Ok(());
    }
    let (a1, a2, t) = split_once(p)?;
    split_tree(&a1, weight * (1.0 - t), depth + 1, out)?;
    split_tree(&a2, weight * t, depth + 1, out)
}

/// Largest entrywise modulus of `Σ weight · leaf − T`.
pub fn reconstruction_error(t: &ComplexRank1Op, leaves: &[ComplexLeaf]) -> f64 {
    let target = t.matrix();
    let mut acc = vec![vec![Complex64::new(0.0, 0.0); t.dim()]; t.dim()];
    for leaf in leaves {
        for (row, lrow) in acc.iter_mut().zip(leaf.op.matrix()) {
            for (a, x) in row.iter_mut().zip(lrow) {
                *a += x * leaf.weight;
            }
        }
    }
    acc.iter()
        .flatten()
        .zip(target.iter().flatten())
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max)
}

/// On-disk form: `{"w": [[re, im], ...], "f": [...], "u": optional}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ComplexOpFile {
    pub w: CVector,
    pub f: CVector,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub u: Option<CVector>,
}

impl ComplexOpFile {
    /// The operator and the `u` to profile it at.
    pub fn load(&self) -> Result<(ComplexRank1Op, CVector)> {
        let op = ComplexRank1Op::new(self.w.clone(), self.f.clone())?;
        let u = match &self.u {
            Some(u) if u.dim() != op.dim() => {
                return Err(Error::Complex(format!("u has {} entries, expected {}", u.dim(), op.dim())))
            }
            Some(u) if !u.is_unimodular() => return Err(Error::Complex("u is not unimodular".into())),
            Some(u) => u.clone(),
            None => op.attaining_u(),
        };
        Ok((op, u))
    }
}
