//! Exact rational scalars, vectors and dense matrices.
//!
//! Every real-space computation in the crate runs on these types. Elimination
//! is fraction-free (Bareiss) over integer-scaled rows, with the pivot chosen
//! as the first nonzero entry in row order so results are reproducible.

use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Div, Index, IndexMut, Mul, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// An exact rational number in lowest terms with a positive denominator.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Rational(BigRational);

impl Rational {
    pub fn new(numer: i64, denom: i64) -> Self {
        assert!(denom != 0, "zero denominator");
        Rational(BigRational::new(numer.into(), denom.into()))
    }

    pub fn from_integer(n: i64) -> Self {
        Rational(BigRational::from_integer(n.into()))
    }

    pub fn from_big(numer: BigInt, denom: BigInt) -> Self {
        Rational(BigRational::new(numer, denom))
    }

    pub fn zero() -> Self {
        Rational(BigRational::zero())
    }

    pub fn one() -> Self {
        Rational(BigRational::one())
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.0.is_one()
    }

    pub fn is_positive(&self) -> bool {
        self.0.is_positive()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn abs(&self) -> Self {
        Rational(self.0.abs())
    }

    pub fn recip(&self) -> Self {
        Rational(self.0.recip())
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }

    /// Canonical serialized form: always `p/q`, even for integers.
    pub fn to_fraction_string(&self) -> String {
        format!("{}/{}", self.0.numer(), self.0.denom())
    }

    pub fn as_big(&self) -> &BigRational {
        &self.0
    }
}

impl From<i64> for Rational {
    fn from(n: i64) -> Self {
        Rational::from_integer(n)
    }
}

impl From<BigRational> for Rational {
    fn from(r: BigRational) -> Self {
        Rational(r)
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.denom().is_one() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

impl fmt::Debug for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

fn parse_int(text: &str, whole: &str) -> Result<BigInt> {
    let digits = text.strip_prefix(['+', '-']).unwrap_or(text);
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return Err(Error::Parse(format!("malformed rational {whole:?}")));
    }
    text.parse::<BigInt>()
        .map_err(|_| Error::Parse(format!("malformed rational {whole:?}")))
}

/// Parses `p`, `p/q` or a finite decimal such as `-0.25`.
pub fn rat_parse(text: &str) -> Result<Rational> {
    let s = text.trim();
    if let Some((p, q)) = s.split_once('/') {
        let numer = parse_int(p.trim(), s)?;
        let denom = parse_int(q.trim(), s)?;
        if denom.is_zero() {
            return Err(Error::Parse(format!("zero denominator in {s:?}")));
        }
        return Ok(Rational::from_big(numer, denom));
    }
    if let Some((int_part, frac_part)) = s.split_once('.') {
        let negative = int_part.starts_with('-');
        let int_digits = int_part.strip_prefix(['+', '-']).unwrap_or(int_part);
        if frac_part.is_empty() && int_digits.is_empty() {
            return Err(Error::Parse(format!("malformed rational {s:?}")));
        }
        if !frac_part.bytes().all(|b| b.is_ascii_digit())
            || !int_digits.bytes().all(|b| b.is_ascii_digit())
        {
            return Err(Error::Parse(format!("malformed rational {s:?}")));
        }
        let all_digits = format!("{int_digits}{frac_part}");
        let magnitude = if all_digits.is_empty() {
            BigInt::zero()
        } else {
            all_digits.parse::<BigInt>().unwrap()
        };
        let denom = num_traits::pow(BigInt::from(10), frac_part.len());
        let numer = if negative { -magnitude } else { magnitude };
        return Ok(Rational::from_big(numer, denom));
    }
    Ok(Rational(BigRational::from_integer(parse_int(s, s)?)))
}

impl FromStr for Rational {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        rat_parse(s)
    }
}

impl Serialize for Rational {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_fraction_string())
    }
}

impl<'de> Deserialize<'de> for Rational {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Text(String),
            Int(i64),
        }
        match Raw::deserialize(deserializer)? {
            Raw::Text(s) => rat_parse(&s).map_err(serde::de::Error::custom),
            Raw::Int(n) => Ok(Rational::from_integer(n)),
        }
    }
}

macro_rules! binop {
    ($trait:ident, $method:ident) => {
        impl $trait<Rational> for Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                Rational(self.0.$method(rhs.0))
            }
        }
        impl $trait<&Rational> for Rational {
            type Output = Rational;
            fn $method(self, rhs: &Rational) -> Rational {
                Rational(self.0.$method(&rhs.0))
            }
        }
        impl $trait<Rational> for &Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                Rational((&self.0).$method(rhs.0))
            }
        }
        impl $trait<&Rational> for &Rational {
            type Output = Rational;
            fn $method(self, rhs: &Rational) -> Rational {
                Rational((&self.0).$method(&rhs.0))
            }
        }
    };
}

binop!(Add, add);
binop!(Sub, sub);
binop!(Mul, mul);
binop!(Div, div);

impl Neg for Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-self.0)
    }
}

impl Neg for &Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-&self.0)
    }
}

impl AddAssign<&Rational> for Rational {
    fn add_assign(&mut self, rhs: &Rational) {
        self.0 += &rhs.0;
    }
}

impl AddAssign for Rational {
    fn add_assign(&mut self, rhs: Rational) {
        self.0 += rhs.0;
    }
}

impl SubAssign<&Rational> for Rational {
    fn sub_assign(&mut self, rhs: &Rational) {
        self.0 -= &rhs.0;
    }
}

impl Sum for Rational {
    fn sum<I: Iterator<Item = Rational>>(iter: I) -> Rational {
        iter.fold(Rational::zero(), |acc, x| acc + x)
    }
}

impl<'a> Sum<&'a Rational> for Rational {
    fn sum<I: Iterator<Item = &'a Rational>>(iter: I) -> Rational {
        iter.fold(Rational::zero(), |acc, x| acc + x)
    }
}

/// A dense vector of rationals.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct QVector(Vec<Rational>);

impl QVector {
    pub fn new(entries: Vec<Rational>) -> Self {
        QVector(entries)
    }

    pub fn zeros(dim: usize) -> Self {
        QVector(vec![Rational::zero(); dim])
    }

    pub fn unit(dim: usize, i: usize) -> Self {
        let mut v = Self::zeros(dim);
        v.0[i] = Rational::one();
        v
    }

    pub fn from_ints(values: &[i64]) -> Self {
        QVector(values.iter().map(|&x| Rational::from_integer(x)).collect())
    }

    pub fn from_fracs(values: &[(i64, i64)]) -> Self {
        QVector(values.iter().map(|&(p, q)| Rational::new(p, q)).collect())
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn entries(&self) -> &[Rational] {
        &self.0
    }

    pub fn into_entries(self) -> Vec<Rational> {
        self.0
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Rational> {
        self.0.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(Rational::is_zero)
    }

    pub fn dot(&self, other: &QVector) -> Rational {
        debug_assert_eq!(self.dim(), other.dim());
        self.0.iter().zip(&other.0).map(|(a, b)| a * b).sum()
    }

    pub fn scale(&self, s: &Rational) -> QVector {
        QVector(self.0.iter().map(|x| x * s).collect())
    }

    /// Adds `s * other` in place.
    pub fn axpy(&mut self, s: &Rational, other: &QVector) {
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            *a += s * b;
        }
    }
}

impl Index<usize> for QVector {
    type Output = Rational;
    fn index(&self, i: usize) -> &Rational {
        &self.0[i]
    }
}

impl IndexMut<usize> for QVector {
    fn index_mut(&mut self, i: usize) -> &mut Rational {
        &mut self.0[i]
    }
}

impl Add<&QVector> for &QVector {
    type Output = QVector;
    fn add(self, rhs: &QVector) -> QVector {
        QVector(self.0.iter().zip(&rhs.0).map(|(a, b)| a + b).collect())
    }
}

impl Sub<&QVector> for &QVector {
    type Output = QVector;
    fn sub(self, rhs: &QVector) -> QVector {
        QVector(self.0.iter().zip(&rhs.0).map(|(a, b)| a - b).collect())
    }
}

impl Neg for &QVector {
    type Output = QVector;
    fn neg(self) -> QVector {
        QVector(self.0.iter().map(|a| -a).collect())
    }
}

impl fmt::Debug for QVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, x) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{x}")?;
        }
        write!(f, ")")
    }
}

impl fmt::Display for QVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

impl FromIterator<Rational> for QVector {
    fn from_iter<I: IntoIterator<Item = Rational>>(iter: I) -> Self {
        QVector(iter.into_iter().collect())
    }
}

/// A dense row-major matrix of rationals.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct QMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Rational>,
}

impl QMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        QMatrix {
            rows,
            cols,
            data: vec![Rational::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Rational::one();
        }
        m
    }

    /// Builds a matrix from rows. An empty row list gives a `0 x cols` matrix.
    pub fn from_rows(rows: &[QVector], cols: usize) -> Result<Self> {
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            if r.dim() != cols {
                return Err(Error::DimensionMismatch {
                    expected: cols,
                    found: r.dim(),
                });
            }
            data.extend(r.iter().cloned());
        }
        Ok(QMatrix {
            rows: rows.len(),
            cols,
            data,
        })
    }

    pub fn from_ints(rows: &[&[i64]]) -> Self {
        let cols = rows.first().map_or(0, |r| r.len());
        let vs: Vec<QVector> = rows.iter().map(|r| QVector::from_ints(r)).collect();
        Self::from_rows(&vs, cols).expect("ragged integer matrix")
    }

    pub fn from_fracs(rows: &[&[(i64, i64)]]) -> Self {
        let cols = rows.first().map_or(0, |r| r.len());
        let vs: Vec<QVector> = rows.iter().map(|r| QVector::from_fracs(r)).collect();
        Self::from_rows(&vs, cols).expect("ragged rational matrix")
    }

    /// Outer product `a bᵀ`.
    pub fn outer(a: &QVector, b: &QVector) -> Self {
        let mut data = Vec::with_capacity(a.dim() * b.dim());
        for x in a.iter() {
            for y in b.iter() {
                data.push(x * y);
            }
        }
        QMatrix {
            rows: a.dim(),
            cols: b.dim(),
            data,
        }
    }

    /// Reshapes a row-major flattened vector.
    pub fn from_flat(rows: usize, cols: usize, flat: &QVector) -> Self {
        assert_eq!(rows * cols, flat.dim());
        QMatrix {
            rows,
            cols,
            data: flat.entries().to_vec(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> QVector {
        QVector(self.data[i * self.cols..(i + 1) * self.cols].to_vec())
    }

    pub fn row_vectors(&self) -> Vec<QVector> {
        (0..self.rows).map(|i| self.row(i)).collect()
    }

    pub fn col(&self, j: usize) -> QVector {
        (0..self.rows).map(|i| self[(i, j)].clone()).collect()
    }

    pub fn flatten(&self) -> QVector {
        QVector(self.data.clone())
    }

    pub fn transpose(&self) -> QMatrix {
        let mut t = QMatrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)].clone();
            }
        }
        t
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Rational::is_zero)
    }

    pub fn mul_vec(&self, x: &QVector) -> Result<QVector> {
        if x.dim() != self.cols {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                found: x.dim(),
            });
        }
        Ok((0..self.rows)
            .map(|i| {
                self.data[i * self.cols..(i + 1) * self.cols]
                    .iter()
                    .zip(x.iter())
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect())
    }

    pub fn mul(&self, rhs: &QMatrix) -> Result<QMatrix> {
        if self.cols != rhs.rows {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                found: rhs.rows,
            });
        }
        let mut out = QMatrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    let prod = a * &rhs[(k, j)];
                    out[(i, j)] += prod;
                }
            }
        }
        Ok(out)
    }

    pub fn scale(&self, s: &Rational) -> QMatrix {
        QMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|x| x * s).collect(),
        }
    }

    /// Adds `s * other` in place.
    pub fn axpy(&mut self, s: &Rational, other: &QMatrix) {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += s * b;
        }
    }

    pub fn rank(&self) -> usize {
        matrix_rank(self)
    }
}

impl Index<(usize, usize)> for QMatrix {
    type Output = Rational;
    fn index(&self, (i, j): (usize, usize)) -> &Rational {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for QMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Rational {
        &mut self.data[i * self.cols + j]
    }
}

impl Add<&QMatrix> for &QMatrix {
    type Output = QMatrix;
    fn add(self, rhs: &QMatrix) -> QMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        QMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub<&QMatrix> for &QMatrix {
    type Output = QMatrix;
    fn sub(self, rhs: &QMatrix) -> QMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        QMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Neg for &QMatrix {
    type Output = QMatrix;
    fn neg(self) -> QMatrix {
        self.scale(&Rational::from_integer(-1))
    }
}

impl fmt::Debug for QMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for i in 0..self.rows {
            if i > 0 {
                write!(f, "; ")?;
            }
            for j in 0..self.cols {
                if j > 0 {
                    write!(f, " ")?;
                }
                write!(f, "{}", self[(i, j)])?;
            }
        }
        write!(f, "]")
    }
}

impl fmt::Display for QMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

impl Serialize for QMatrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.row_vectors().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for QMatrix {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let rows = Vec::<QVector>::deserialize(deserializer)?;
        let cols = rows.first().map_or(0, QVector::dim);
        QMatrix::from_rows(&rows, cols).map_err(serde::de::Error::custom)
    }
}

/// Row echelon form computed fraction-free over integers.
///
/// Each row is first scaled by the lcm of its denominators; Bareiss
/// elimination then keeps every intermediate entry an exact integer
/// (each division by the previous pivot is exact).
struct Echelon {
    rows: Vec<Vec<BigInt>>,
    pivots: Vec<usize>,
}

fn integer_rows(m: &QMatrix) -> Vec<Vec<BigInt>> {
    (0..m.rows)
        .map(|i| {
            let row = &m.data[i * m.cols..(i + 1) * m.cols];
            let lcm = row
                .iter()
                .fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
            row.iter()
                .map(|x| x.numer() * (&lcm / x.denom()))
                .collect()
        })
        .collect()
}

fn bareiss(mut a: Vec<Vec<BigInt>>, cols: usize) -> Echelon {
    let nrows = a.len();
    let mut pivots = Vec::new();
    let mut prev = BigInt::one();
    let mut r = 0;
    for c in 0..cols {
        if r == nrows {
            break;
        }
        let Some(p) = (r..nrows).find(|&i| !a[i][c].is_zero()) else {
            continue;
        };
        a.swap(r, p);
        for i in r + 1..nrows {
            for j in c + 1..cols {
                let v = (&a[r][c] * &a[i][j] - &a[i][c] * &a[r][j]) / &prev;
                a[i][j] = v;
            }
            a[i][c] = BigInt::zero();
        }
        prev = a[r][c].clone();
        pivots.push(c);
        r += 1;
    }
    a.truncate(r);
    Echelon { rows: a, pivots }
}

/// Exact rank over the rationals.
pub fn matrix_rank(m: &QMatrix) -> usize {
    if m.rows == 0 || m.cols == 0 {
        return 0;
    }
    bareiss(integer_rows(m), m.cols).pivots.len()
}

/// Rank of a family of vectors of a common dimension.
pub fn vectors_rank(vs: &[QVector]) -> usize {
    match vs.first() {
        None => 0,
        Some(v) => QMatrix::from_rows(vs, v.dim()).map_or(0, |m| m.rank()),
    }
}

/// Reduced row echelon form over the rationals, derived from the
/// fraction-free echelon form by exact back substitution.
fn rref(m: &QMatrix) -> (Vec<QVector>, Vec<usize>) {
    let ech = bareiss(integer_rows(m), m.cols);
    let mut rows: Vec<QVector> = ech
        .rows
        .iter()
        .zip(&ech.pivots)
        .map(|(row, &p)| {
            let lead = &row[p];
            row.iter()
                .map(|x| Rational::from_big(x.clone(), lead.clone()))
                .collect()
        })
        .collect();
    for k in (0..rows.len()).rev() {
        let p = ech.pivots[k];
        let pivot_row = rows[k].clone();
        for row in rows.iter_mut().take(k) {
            let factor = row[p].clone();
            if !factor.is_zero() {
                row.axpy(&-factor, &pivot_row);
            }
        }
    }
    (rows, ech.pivots)
}

/// Exact null-space basis, one vector per free column, with the free
/// coordinate set to 1. Empty iff `m` is injective.
pub fn kernel_basis(m: &QMatrix) -> Vec<QVector> {
    let n = m.cols;
    let (rows, pivots) = if m.rows == 0 {
        (Vec::new(), Vec::new())
    } else {
        rref(m)
    };
    let mut basis = Vec::new();
    for free in (0..n).filter(|c| !pivots.contains(c)) {
        let mut z = QVector::zeros(n);
        z[free] = Rational::one();
        for (row, &p) in rows.iter().zip(&pivots) {
            z[p] = -row[free].clone();
        }
        basis.push(z);
    }
    basis
}

/// Kernel basis with each vector rescaled so that `gauge(z) = 1`.
pub fn kernel_basis_normalized<F>(m: &QMatrix, gauge: F) -> Vec<QVector>
where
    F: Fn(&QVector) -> Rational,
{
    kernel_basis(m)
        .into_iter()
        .map(|z| {
            let g = gauge(&z);
            z.scale(&g.recip())
        })
        .collect()
}

/// Some exact solution of `A x = b`, or `None` if the system is inconsistent.
pub fn solve_linear(a: &QMatrix, b: &QVector) -> Result<Option<QVector>> {
    if a.rows != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.rows,
            found: b.dim(),
        });
    }
    let n = a.cols;
    let mut aug = QMatrix::zeros(a.rows, n + 1);
    for i in 0..a.rows {
        for j in 0..n {
            aug[(i, j)] = a[(i, j)].clone();
        }
        aug[(i, n)] = b[i].clone();
    }
    if a.rows == 0 {
        return Ok(Some(QVector::zeros(n)));
    }
    let (rows, pivots) = rref(&aug);
    if pivots.last() == Some(&n) {
        return Ok(None);
    }
    let mut x = QVector::zeros(n);
    for (row, &p) in rows.iter().zip(&pivots) {
        x[p] = row[n].clone();
    }
    Ok(Some(x))
}

/// Inverse of a square matrix, or `None` if singular.
pub fn invert(a: &QMatrix) -> Option<QMatrix> {
    let n = a.rows;
    assert_eq!(n, a.cols, "invert: matrix must be square");
    let mut aug = QMatrix::zeros(n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            aug[(i, j)] = a[(i, j)].clone();
        }
        aug[(i, n + i)] = Rational::one();
    }
    let (rows, pivots) = rref(&aug);
    if pivots.len() < n || pivots[n - 1] != n - 1 {
        return None;
    }
    let mut inv = QMatrix::zeros(n, n);
    for (i, row) in rows.iter().enumerate() {
        for j in 0..n {
            inv[(i, j)] = row[n + j].clone();
        }
    }
    Some(inv)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(p: i64, d: i64) -> Rational {
        Rational::new(p, d)
    }

    #[test]
    fn parse_forms() {
        assert_eq!(rat_parse("1/2").unwrap(), q(1, 2));
        assert_eq!(rat_parse("-3/6").unwrap(), q(-1, 2));
        assert_eq!(rat_parse("0.25").unwrap(), q(1, 4));
        assert_eq!(rat_parse("-1.5").unwrap(), q(-3, 2));
        assert_eq!(rat_parse("+7").unwrap(), q(7, 1));
        assert_eq!(rat_parse(".5").unwrap(), q(1, 2));
        assert_eq!(rat_parse("3/-6").unwrap(), q(-1, 2));
    }

    #[test]
    fn parse_errors() {
        assert!(rat_parse("1/0").is_err());
        assert!(rat_parse("abc").is_err());
        assert!(rat_parse("1/2/3").is_err());
        assert!(rat_parse("").is_err());
        assert!(rat_parse("1e5").is_err());
        assert!(rat_parse(".").is_err());
    }

    #[test]
    fn canonical_serialization() {
        assert_eq!(q(-3, 6).to_fraction_string(), "-1/2");
        assert_eq!(q(4, 2).to_fraction_string(), "2/1");
        let json = serde_json::to_string(&QVector::from_fracs(&[(1, 2), (-2, 1)])).unwrap();
        assert_eq!(json, r#"["1/2","-2/1"]"#);
    }

    #[test]
    fn rank_examples() {
        assert_eq!(QMatrix::identity(2).rank(), 2);
        assert_eq!(QMatrix::from_ints(&[&[1, 2], &[2, 4]]).rank(), 1);
        assert_eq!(QMatrix::from_ints(&[&[1, 1], &[1, -1]]).rank(), 2);
        assert_eq!(QMatrix::zeros(3, 2).rank(), 0);
    }

    #[test]
    fn kernel_examples() {
        assert!(kernel_basis(&QMatrix::identity(2)).is_empty());
        let k = kernel_basis(&QMatrix::from_ints(&[&[1, -1]]));
        assert_eq!(k, vec![QVector::from_ints(&[1, 1])]);
        let remark = QMatrix::from_fracs(&[&[(1, 1), (0, 1)], &[(1, 2), (1, 2)]]);
        assert!(kernel_basis(&remark).is_empty());
    }

    #[test]
    fn kernel_normalized_by_max_norm() {
        let m = QMatrix::from_ints(&[&[2, 1, 0]]);
        let linf = |z: &QVector| z.iter().map(Rational::abs).max().unwrap();
        for z in kernel_basis_normalized(&m, linf) {
            assert!(m.mul_vec(&z).unwrap().is_zero());
            assert_eq!(linf(&z), Rational::one());
        }
    }

    #[test]
    fn solve_examples() {
        let x = solve_linear(&QMatrix::identity(2), &QVector::from_ints(&[1, 2]))
            .unwrap()
            .unwrap();
        assert_eq!(x, QVector::from_ints(&[1, 2]));

        let a = QMatrix::from_ints(&[&[1, 1]]);
        let x = solve_linear(&a, &QVector::from_ints(&[0])).unwrap().unwrap();
        assert_eq!(&x[0] + &x[1], Rational::zero());

        let a = QMatrix::from_ints(&[&[1, 1], &[1, 1]]);
        assert!(solve_linear(&a, &QVector::from_ints(&[0, 1])).unwrap().is_none());

        assert!(solve_linear(&a, &QVector::from_ints(&[0])).is_err());
    }

    #[test]
    fn inverse_roundtrip() {
        let a = QMatrix::from_fracs(&[&[(1, 1), (0, 1)], &[(1, 2), (1, 2)]]);
        let inv = invert(&a).unwrap();
        assert_eq!(a.mul(&inv).unwrap(), QMatrix::identity(2));
        assert!(invert(&QMatrix::from_ints(&[&[1, 2], &[2, 4]])).is_none());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn small_rat() -> impl Strategy<Value = Rational> {
            (-6i64..=6, 1i64..=4).prop_map(|(p, q)| Rational::new(p, q))
        }

        fn small_matrix() -> impl Strategy<Value = QMatrix> {
            (1usize..=4, 1usize..=5).prop_flat_map(|(r, c)| {
                prop::collection::vec(small_rat(), r * c).prop_map(move |data| QMatrix {
                    rows: r,
                    cols: c,
                    data,
                })
            })
        }

        proptest! {
            #[test]
            fn rank_equals_transpose_rank(m in small_matrix()) {
                prop_assert_eq!(m.rank(), m.transpose().rank());
            }

            #[test]
            fn kernel_vectors_are_independent_null_vectors(m in small_matrix()) {
                let k = kernel_basis(&m);
                prop_assert_eq!(k.len() + m.rank(), m.cols());
                for z in &k {
                    prop_assert!(m.mul_vec(z).unwrap().is_zero());
                }
                prop_assert_eq!(vectors_rank(&k), k.len());
            }

            #[test]
            fn solutions_satisfy_system(m in small_matrix(), seed in prop::collection::vec(small_rat(), 5)) {
                let b: QVector = seed.into_iter().take(m.rows()).collect();
                prop_assume!(b.dim() == m.rows());
                if let Some(x) = solve_linear(&m, &b).unwrap() {
                    prop_assert_eq!(m.mul_vec(&x).unwrap(), b);
                } else {
                    // inconsistent: rank of augmented exceeds rank of A
                    let mut rows = m.row_vectors();
                    for (r, bi) in rows.iter_mut().zip(b.iter()) {
                        let mut e = r.clone().into_entries();
                        e.push(bi.clone());
                        *r = QVector::new(e);
                    }
                    let aug = QMatrix::from_rows(&rows, m.cols() + 1).unwrap();
                    prop_assert!(aug.rank() > m.rank());
                }
            }
        }
    }
}
