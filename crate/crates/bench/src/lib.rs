//! Fixtures shared by the benchmarks.

use std::sync::Arc;

use polyext::polytope::{hexagon, l1, linf};
use polyext::{Operator, PolyhedralSpace, QMatrix, QVector, Rational};

pub fn arc(s: PolyhedralSpace) -> Arc<PolyhedralSpace> {
    Arc::new(s)
}

/// Regular-ish polygon with `2k` rational vertices on the unit circle.
pub fn circle_polygon(k: i64) -> PolyhedralSpace {
    let one = Rational::one();
    let mut verts = Vec::new();
    for i in 0..k {
        let t = Rational::new(i, 2);
        let d = &one + &(&t * &t);
        let p = QVector::new(vec![(&one - &(&t * &t)) / d.clone(), Rational::from_integer(2) * t / d]);
        verts.push(-&p);
        verts.push(p);
    }
    PolyhedralSpace::build(verts, format!("circle{k}")).expect("convex position")
}

/// A norm-one rank-one operator `hexagon → ℓ₁²` that is not extreme.
pub fn hex_rank1() -> Operator {
    let x = arc(hexagon());
    let f = QVector::from_fracs(&[(2, 3), (1, 3)]);
    let w = QVector::from_fracs(&[(1, 4), (-3, 4)]);
    Operator::rank_one(x, arc(l1(2).unwrap()), &w, &f).unwrap()
}

pub fn remark_operator() -> Operator {
    let x = arc(linf(2).unwrap());
    Operator::new(x.clone(), x, QMatrix::from_fracs(&[&[(1, 1), (0, 1)], &[(1, 2), (1, 2)]])).unwrap()
}

/// Deterministic dense `m × n` system with small rational entries.
pub fn farkas_instance(m: usize, n: usize) -> (QMatrix, QVector) {
    let mut a = QMatrix::zeros(m, n);
    for i in 0..m {
        for j in 0..n {
            a[(i, j)] = Rational::new(((i * 7 + j * 3) % 9) as i64 - 4, 1 + ((i + j) % 3) as i64);
        }
    }
    let b = (0..m).map(|i| Rational::new(i as i64 - 2, 1)).collect();
    (a, b)
}
