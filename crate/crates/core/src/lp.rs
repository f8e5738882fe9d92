//! Exact feasibility linear programming with certificates.
//!
//! Everything here runs a phase-one simplex over rationals with Bland's
//! rule (lowest-index entering column, lowest-index leaving variable on
//! ratio ties), which terminates and is fully reproducible.

use serde::Serialize;

use crate::arith::{kernel_basis, QMatrix, QVector, Rational};
use crate::error::{Error, Result};

/// One side of the Farkas alternative for `A x = b, x >= 0`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "variant", content = "witness")]
pub enum FarkasCertificate {
    /// `x >= 0` with `A x = b`.
    Primal(QVector),
    /// `y` with `Aᵀ y >= 0` and `bᵀ y < 0`.
    Dual(QVector),
}

impl FarkasCertificate {
    pub fn verify(&self, a: &QMatrix, b: &QVector) -> bool {
        match self {
            FarkasCertificate::Primal(x) => verify_primal(a, b, x),
            FarkasCertificate::Dual(y) => verify_dual(a, b, y),
        }
    }

    pub fn is_primal(&self) -> bool {
        matches!(self, FarkasCertificate::Primal(_))
    }
}

pub fn verify_primal(a: &QMatrix, b: &QVector, x: &QVector) -> bool {
    x.dim() == a.cols()
        && b.dim() == a.rows()
        && x.iter().all(|xi| !xi.is_negative())
        && a.mul_vec(x).is_ok_and(|ax| &ax == b)
}

pub fn verify_dual(a: &QMatrix, b: &QVector, y: &QVector) -> bool {
    y.dim() == a.rows()
        && b.dim() == a.rows()
        && b.dot(y).is_negative()
        && a
            .transpose()
            .mul_vec(y)
            .is_ok_and(|aty| aty.iter().all(|v| !v.is_negative()))
}

enum PhaseOne {
    Feasible(QVector),
    Infeasible(QVector),
}

/// Phase-one simplex for `A x = b, x >= 0`.
///
/// Rows are sign-normalized so the right-hand side is nonnegative and one
/// artificial column per row forms the starting basis. At the optimum the
/// simplex multipliers `y` of the normalized system satisfy `A'ᵀ y <= 0`
/// and `b'ᵀ y > 0` whenever the optimum is positive; negating and undoing
/// the row signs yields the dual certificate.
fn phase_one(a: &QMatrix, b: &QVector) -> PhaseOne {
    let m = a.rows();
    let n = a.cols();
    let width = n + m;
    let signs: Vec<bool> = b.iter().map(Rational::is_negative).collect();

    let mut tab: Vec<Vec<Rational>> = (0..m)
        .map(|i| {
            let mut row = Vec::with_capacity(width);
            for j in 0..n {
                let x = &a[(i, j)];
                row.push(if signs[i] { -x } else { x.clone() });
            }
            for k in 0..m {
                row.push(if k == i { Rational::one() } else { Rational::zero() });
            }
            row
        })
        .collect();
    let mut rhs: Vec<Rational> = b.iter().map(Rational::abs).collect();
    let mut basis: Vec<usize> = (n..width).collect();
    let mut reduced: Vec<Rational> = (0..width)
        .map(|j| {
            if j < n {
                -tab.iter().map(|row| &row[j]).sum::<Rational>()
            } else {
                Rational::zero()
            }
        })
        .collect();

    while let Some(enter) = (0..width).find(|&j| reduced[j].is_negative()) {
        let mut leave: Option<(usize, Rational)> = None;
        for i in 0..m {
            if !tab[i][enter].is_positive() {
                continue;
            }
            let ratio = &rhs[i] / &tab[i][enter];
            let better = match &leave {
                None => true,
                Some((li, best)) => ratio < *best || (ratio == *best && basis[i] < basis[*li]),
            };
            if better {
                leave = Some((i, ratio));
            }
        }
        // Phase one is bounded below by zero, so a pivot row always exists.
        let (r, _) = leave.expect("phase-one objective is bounded");

        let pivot = tab[r][enter].clone();
        for x in tab[r].iter_mut() {
            *x = &*x / &pivot;
        }
        rhs[r] = &rhs[r] / &pivot;
        let pivot_row = tab[r].clone();
        let pivot_rhs = rhs[r].clone();
        for i in 0..m {
            if i == r || tab[i][enter].is_zero() {
                continue;
            }
            let factor = tab[i][enter].clone();
            for (x, p) in tab[i].iter_mut().zip(&pivot_row) {
                if !p.is_zero() {
                    *x -= &(&factor * p);
                }
            }
            rhs[i] -= &(&factor * &pivot_rhs);
        }
        let factor = reduced[enter].clone();
        for (x, p) in reduced.iter_mut().zip(&pivot_row) {
            if !p.is_zero() {
                *x -= &(&factor * p);
            }
        }
        basis[r] = enter;
    }

    let residual: Rational = basis
        .iter()
        .zip(&rhs)
        .filter(|(&j, _)| j >= n)
        .map(|(_, v)| v.clone())
        .sum();
    if residual.is_zero() {
        let mut x = QVector::zeros(n);
        for (&j, v) in basis.iter().zip(&rhs) {
            if j < n {
                x[j] = v.clone();
            }
        }
        PhaseOne::Feasible(x)
    } else {
        // reduced cost of artificial i is 1 - y_i; the certificate is -D y
        // where D holds the row signs
        let y: QVector = (0..m)
            .map(|i| {
                let yi = Rational::one() - &reduced[n + i];
                if signs[i] {
                    yi
                } else {
                    -yi
                }
            })
            .collect();
        PhaseOne::Infeasible(y)
    }
}

/// Decides the Farkas alternative for `(A, b)` and returns the certificate
/// for whichever side holds, after re-verifying it exactly.
pub fn farkas_decide(a: &QMatrix, b: &QVector) -> Result<FarkasCertificate> {
    if a.rows() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.rows(),
            found: b.dim(),
        });
    }
    let cert = match phase_one(a, b) {
        PhaseOne::Feasible(x) => FarkasCertificate::Primal(x),
        PhaseOne::Infeasible(y) => FarkasCertificate::Dual(y),
    };
    if !cert.verify(a, b) {
        return Err(Error::Internal(format!(
            "simplex produced an unverifiable certificate {cert:?}"
        )));
    }
    Ok(cert)
}

/// An exact point with `A_eq x = b_eq` and `A_ge x >= b_ge` (x free), or
/// `None` if the system is infeasible.
pub fn lp_feasible(
    a_eq: &QMatrix,
    b_eq: &QVector,
    a_ge: &QMatrix,
    b_ge: &QVector,
) -> Result<Option<QVector>> {
    let n = a_eq.cols();
    if a_ge.cols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: a_ge.cols(),
        });
    }
    for (rows, b) in [(a_eq.rows(), b_eq), (a_ge.rows(), b_ge)] {
        if rows != b.dim() {
            return Err(Error::DimensionMismatch {
                expected: rows,
                found: b.dim(),
            });
        }
    }
    let m_eq = a_eq.rows();
    let m_ge = a_ge.rows();
    if m_eq + m_ge == 0 {
        return Ok(Some(QVector::zeros(n)));
    }
    // variables: x+ (n), x- (n), surplus (m_ge)
    let width = 2 * n + m_ge;
    let mut big = QMatrix::zeros(m_eq + m_ge, width);
    let mut rhs = Vec::with_capacity(m_eq + m_ge);
    for i in 0..m_eq {
        for j in 0..n {
            big[(i, j)] = a_eq[(i, j)].clone();
            big[(i, n + j)] = -&a_eq[(i, j)];
        }
        rhs.push(b_eq[i].clone());
    }
    for i in 0..m_ge {
        let r = m_eq + i;
        for j in 0..n {
            big[(r, j)] = a_ge[(i, j)].clone();
            big[(r, n + j)] = -&a_ge[(i, j)];
        }
        big[(r, 2 * n + i)] = Rational::from_integer(-1);
        rhs.push(b_ge[i].clone());
    }
    match phase_one(&big, &QVector::new(rhs)) {
        PhaseOne::Infeasible(_) => Ok(None),
        PhaseOne::Feasible(z) => {
            let x: QVector = (0..n).map(|j| &z[j] - &z[n + j]).collect();
            let ok = a_eq.mul_vec(&x)? == *b_eq
                && a_ge
                    .mul_vec(&x)?
                    .iter()
                    .zip(b_ge.iter())
                    .all(|(l, r)| l >= r);
            if !ok {
                return Err(Error::Internal("lp_feasible produced an infeasible point".into()));
            }
            Ok(Some(x))
        }
    }
}

/// A convex combination of candidate points.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ConvexDecomposition {
    /// Index of each term in the candidate list.
    pub indices: Vec<usize>,
    pub points: Vec<QVector>,
    pub weights: Vec<Rational>,
}

impl ConvexDecomposition {
    pub fn reconstruct(&self) -> QVector {
        let dim = self.points.first().map_or(0, QVector::dim);
        let mut acc = QVector::zeros(dim);
        for (p, w) in self.points.iter().zip(&self.weights) {
            acc.axpy(w, p);
        }
        acc
    }
}

fn lifted(p: &QVector) -> QVector {
    let mut e = p.entries().to_vec();
    e.push(Rational::one());
    QVector::new(e)
}

/// Removes affinely dependent points from a convex combination until the
/// remaining support is affinely independent (hence at most `dim + 1`).
fn reduce_support(points: &[QVector], support: &mut Vec<(usize, Rational)>) {
    loop {
        if support.len() <= 1 {
            return;
        }
        let cols: Vec<QVector> = support.iter().map(|(i, _)| lifted(&points[*i])).collect();
        let m = QMatrix::from_rows(&cols, cols[0].dim())
            .expect("uniform")
            .transpose();
        let Some(mut mu) = kernel_basis(&m).into_iter().next() else {
            return;
        };
        if !mu.iter().any(Rational::is_positive) {
            mu = -&mu;
        }
        let (drop, theta) = support
            .iter()
            .zip(mu.iter())
            .enumerate()
            .filter(|(_, (_, m))| m.is_positive())
            .map(|(k, ((_, w), m))| (k, w / m))
            .min_by(|a, b| a.1.cmp(&b.1))
            .expect("kernel vector has a positive entry");
        for ((_, w), m) in support.iter_mut().zip(mu.iter()) {
            *w -= &(&theta * m);
        }
        support[drop].1 = Rational::zero();
        support.retain(|(_, w)| !w.is_zero());
    }
}

/// Writes `target` as a convex combination of at most `dim + 1` candidates,
/// or reports a separating functional when `target` is outside their hull.
pub fn caratheodory_decompose(candidates: &[QVector], target: &QVector) -> Result<ConvexDecomposition> {
    if candidates.is_empty() {
        return Err(Error::InvalidOperator("no candidate points".into()));
    }
    let dim = target.dim();
    if let Some(p) = candidates.iter().find(|p| p.dim() != dim) {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: p.dim(),
        });
    }
    let cols: Vec<QVector> = candidates.iter().map(lifted).collect();
    let a = QMatrix::from_rows(&cols, dim + 1)?.transpose();
    let b = lifted(target);
    match farkas_decide(&a, &b)? {
        FarkasCertificate::Primal(x) => {
            let mut support: Vec<(usize, Rational)> = x
                .iter()
                .enumerate()
                .filter(|(_, w)| !w.is_zero())
                .map(|(i, w)| (i, w.clone()))
                .collect();
            reduce_support(candidates, &mut support);
            let decomposition = ConvexDecomposition {
                indices: support.iter().map(|(i, _)| *i).collect(),
                points: support.iter().map(|(i, _)| candidates[*i].clone()).collect(),
                weights: support.into_iter().map(|(_, w)| w).collect(),
            };
            if decomposition.reconstruct() != *target
                || decomposition.weights.iter().sum::<Rational>() != Rational::one()
            {
                return Err(Error::Internal("convex decomposition does not reconstruct".into()));
            }
            Ok(decomposition)
        }
        FarkasCertificate::Dual(y) => {
            let separator: QVector = (0..dim).map(|i| -&y[i]).collect();
            let threshold = y[dim].clone();
            Err(Error::OutsideHull {
                separator,
                threshold,
            })
        }
    }
}
