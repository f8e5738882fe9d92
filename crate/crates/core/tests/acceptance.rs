use std::collections::BTreeSet;
use std::process::ExitCode;
use std::sync::Arc;
use std::time::{Duration, Instant};

use itertools::Itertools;
use num_complex::Complex64;
use polyext::arith::vectors_rank;
use polyext::lp::{verify_dual, verify_primal};
use polyext::polytope::{hexagon, l1, linf, octagon};
use polyext::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = std::result::Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> std::result::Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn sp(s: PolyhedralSpace) -> Arc<PolyhedralSpace> {
    Arc::new(s)
}

fn rat(rng: &mut ChaCha8Rng, span: i64, den: i64) -> Rational {
    Rational::new(rng.gen_range(-span..=span), rng.gen_range(1..=den))
}

fn rand_vec(rng: &mut ChaCha8Rng, dim: usize) -> QVector {
    loop {
        let v: QVector = (0..dim).map(|_| rat(rng, 6, 4)).collect();
        if !v.is_zero() {
            return v;
        }
    }
}

/// Symmetric octagon through four rational points of the unit circle in
/// the upper half-plane and their negatives.
fn random_octagon(rng: &mut ChaCha8Rng, tag: usize) -> PolyhedralSpace {
    let mut ts = BTreeSet::new();
    while ts.len() < 4 {
        ts.insert(Rational::new(rng.gen_range(0..=24), rng.gen_range(1..=6)));
    }
    let one = Rational::one();
    let mut verts = Vec::new();
    for t in &ts {
        let t2 = t * t;
        let d = &one + &t2;
        let p = QVector::new(vec![(&one - &t2) / d.clone(), (Rational::from_integer(2) * t.clone()) / d]);
        verts.push(-&p);
        verts.push(p);
    }
    PolyhedralSpace::build(verts, format!("octagon{tag}")).expect("points on a circle are in convex position")
}

fn a_matrices() -> Vec<QMatrix> {
    let mut out = Vec::new();
    for a in [
        QMatrix::from_ints(&[&[1, 0], &[0, 1]]),
        QMatrix::from_ints(&[&[1, 0], &[0, -1]]),
        QMatrix::from_ints(&[&[0, 1], &[1, 0]]),
        QMatrix::from_ints(&[&[0, 1], &[-1, 0]]),
    ] {
        out.push(-&a);
        out.push(a);
    }
    out
}

fn remark_operator() -> Operator {
    let x = sp(linf(2).unwrap());
    Operator::new(x.clone(), x, QMatrix::from_fracs(&[&[(1, 1), (0, 1)], &[(1, 2), (1, 2)]])).unwrap()
}

fn criterion_1() -> Outcome {
    let x = sp(linf(2).unwrap());
    let all = enumerate_extreme_contractions(&x, &x, DEFAULT_ENUMERATION_CAP).map_err(|e| e.to_string())?;
    let rank2: BTreeSet<QMatrix> = all.iter().filter(|t| t.rank() == 2).map(|t| t.matrix().clone()).collect();
    let expected: BTreeSet<QMatrix> = a_matrices().into_iter().collect();
    ensure(rank2 == expected, || format!("rank-2 vertices {rank2:?}"))?;
    Ok(format!("{} vertices, {} of rank 2", all.len(), rank2.len()))
}

fn criterion_2() -> Outcome {
    let t = remark_operator();
    let filtered = decompose_general(&t, Some(2), DEFAULT_ENUMERATION_CAP).map_err(|e| e.to_string())?;
    let report = filtered.report().ok_or("rank-2 decomposition unexpectedly feasible")?;
    ensure(report.verify(), || "certificate does not verify".into())?;

    let free = decompose_general(&t, None, DEFAULT_ENUMERATION_CAP).map_err(|e| e.to_string())?;
    let dec = free.decomposition().ok_or("unrestricted decomposition infeasible")?;
    ensure(dec.verify(&t), || "unrestricted decomposition does not verify".into())?;

    let half = Rational::new(1, 2);
    let a1 = QMatrix::identity(2);
    let b = QMatrix::from_ints(&[&[1, 0], &[1, 0]]);
    let pair = &a1.scale(&half) + &b.scale(&half);
    ensure(pair == *t.matrix(), || format!("½A1 + ½B = {pair:?}"))?;
    for m in [a1, b] {
        let op = t.with_matrix(m).map_err(|e| e.to_string())?;
        ensure(
            op.is_extreme_contraction().is_ok_and(|c| c.is_extreme),
            || format!("{:?} is not extreme", op.matrix()),
        )?;
    }
    Ok(format!("certificate y = {}, unrestricted split into {} parts", report.certificate, dec.parts.len()))
}

fn criterion_3() -> Outcome {
    let cases = [
        ("linf2 -> l1-2", sp(linf(2).unwrap()), sp(l1(2).unwrap()), 8),
        ("hex -> l1-2", sp(hexagon()), sp(l1(2).unwrap()), 12),
        ("linf2 -> linf2", sp(linf(2).unwrap()), sp(linf(2).unwrap()), 8),
        ("hex -> l1-3", sp(hexagon()), sp(l1(3).unwrap()), 18),
    ];
    let mut counts = Vec::new();
    for (label, x, y, expected) in cases {
        let ops = enumerate_rank1_extremes(&x, &y);
        let r = x.facet_pair_representatives().len();
        let s = y.vertex_pair_representatives().len();
        ensure(ops.len() == expected && ops.len() == 2 * r * s, || {
            format!("{label}: {} operators, expected {expected}", ops.len())
        })?;
        let distinct: BTreeSet<&QMatrix> = ops.iter().map(Operator::matrix).collect();
        ensure(distinct.len() == ops.len(), || format!("{label}: duplicates"))?;
        for t in &ops {
            let theorem = t.is_rank1_extreme_by_theorem().map_err(|e| e.to_string())?;
            let oracle = t.is_extreme_contraction().map_err(|e| e.to_string())?;
            ensure(theorem.is_some() && oracle.is_extreme, || {
                format!("{label}: {:?} fails a test", t.matrix())
            })?;
        }
        counts.push(format!("{label}={}", ops.len()));
    }
    Ok(counts.join(", "))
}

/// A random point of the unit sphere that is not a vertex.
fn non_vertex_sphere_point(rng: &mut ChaCha8Rng, y: &PolyhedralSpace) -> QVector {
    loop {
        let w = rand_vec(rng, y.dim());
        let w = w.scale(&y.norm(&w).unwrap().recip());
        if !y.is_vertex(&w) {
            return w;
        }
    }
}

fn criterion_4() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let domains = [linf(2).unwrap(), hexagon(), octagon(), l1(2).unwrap(), linf(3).unwrap(), l1(3).unwrap()];
    let codomains = [l1(2).unwrap(), linf(2).unwrap(), hexagon(), l1(3).unwrap(), linf(3).unwrap()];
    let mut total = 0;
    let mut extreme = 0;
    for x in domains.iter().cloned().map(sp) {
        for y in codomains.iter().cloned().map(sp) {
            let mut family: Vec<Operator> = Vec::new();
            // facet x vertex constructions
            family.extend(enumerate_rank1_extremes(&x, &y).into_iter().take(4));
            for _ in 0..3 {
                // facet functional with a non-vertex image
                let k = rng.gen_range(0..x.facets().len());
                let w = non_vertex_sphere_point(&mut rng, &y);
                family.push(Operator::rank_one(x.clone(), y.clone(), &w, &x.facets()[k]).unwrap());
                // functional normed at a lower-dimensional face, vertex image
                let f = rand_vec(&mut rng, x.dim());
                let f = f.scale(&x.dual_norm(&f).unwrap().recip());
                let w = &y.vertices()[rng.gen_range(0..y.vertices().len())];
                family.push(Operator::rank_one(x.clone(), y.clone(), w, &f).unwrap());
            }
            for t in &family {
                ensure(t.norm().is_one() && t.rank() == 1, || format!("bad instance {:?}", t.matrix()))?;
                let theorem = t.is_rank1_extreme_by_theorem().map_err(|e| e.to_string())?.is_some();
                let oracle = t.is_extreme_contraction().map_err(|e| e.to_string())?;
                ensure(oracle.verify(t), || format!("certificate for {:?} does not verify", t.matrix()))?;
                ensure(theorem == oracle.is_extreme, || {
                    format!(
                        "{} -> {}: {:?} theorem={theorem} oracle={}",
                        x.name(),
                        y.name(),
                        t.matrix(),
                        oracle.is_extreme
                    )
                })?;
                total += 1;
                extreme += usize::from(theorem);
            }
        }
    }
    ensure(total >= 200, || format!("only {total} instances"))?;
    Ok(format!("{total} instances agree ({extreme} extreme)"))
}

fn criterion_5() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut domains = vec![sp(linf(2).unwrap()), sp(hexagon())];
    domains.extend((0..3).map(|i| sp(random_octagon(&mut rng, i))));
    let codomains = [sp(l1(2).unwrap()), sp(linf(2).unwrap()), sp(l1(3).unwrap())];
    let pools: Vec<Vec<BTreeSet<QMatrix>>> = domains
        .iter()
        .map(|x| {
            codomains
                .iter()
                .map(|y| enumerate_rank1_extremes(x, y).iter().map(|e| e.matrix().clone()).collect())
                .collect()
        })
        .collect();
    let mut count = 0;
    let mut parts = 0;
    for k in 0..120 {
        let (di, ci) = (k % domains.len(), (k / domains.len()) % codomains.len());
        let (x, y) = (&domains[di], &codomains[ci]);
        let f = rand_vec(&mut rng, 2);
        let f = f.scale(&x.dual_norm(&f).unwrap().recip());
        let w = rand_vec(&mut rng, y.dim());
        let w = w.scale(&y.norm(&w).unwrap().recip());
        let t = Operator::rank_one(x.clone(), y.clone(), &w, &f).map_err(|e| e.to_string())?;
        let out = decompose_rank1(&t).map_err(|e| e.to_string())?;
        let dec = out
            .decomposition()
            .ok_or_else(|| format!("{} -> {}: infeasible for {:?}", x.name(), y.name(), t.matrix()))?;
        ensure(dec.verify(&t), || format!("decomposition of {:?} does not verify", t.matrix()))?;
        ensure(
            dec.parts.iter().all(|p| p.rank() == 1 && pools[di][ci].contains(p.matrix())),
            || format!("non rank-1-extreme part for {:?}", t.matrix()),
        )?;
        count += 1;
        parts += dec.parts.len();
    }
    Ok(format!("{count} operators decomposed, {parts} parts in total"))
}

fn criterion_6() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut domains = vec![sp(linf(2).unwrap()), sp(hexagon()), sp(octagon())];
    domains.extend((0..2).map(|i| sp(random_octagon(&mut rng, i))));
    let codomains = [sp(l1(2).unwrap()), sp(linf(2).unwrap()), sp(l1(3).unwrap())];
    let mut count = 0;
    for x in &domains {
        for y in &codomains {
            for v in x.vertices() {
                for w in y.vertices() {
                    let comps = enumerate_companion_matrices(x, y, v, w, DEFAULT_COMPANION_CAP)
                        .map_err(|e| e.to_string())?;
                    for c in comps {
                        let a = &c.matrix;
                        ensure(a[(0, 0)].is_one() && a[(0, 1)].is_one(), || format!("first row of {a:?}"))?;
                        ensure(!(&a[(1, 0)] * &a[(1, 1)]).is_positive(), || format!("a21·a22 > 0 in {a:?}"))?;
                        ensure(c.hypothesis_holds().map_err(|e| e.to_string())?, || {
                            format!("hypothesis fails for {a:?}")
                        })?;
                        count += 1;
                    }
                }
            }
        }
    }
    ensure(count > 0, || "no companions enumerated".into())?;
    Ok(format!("{count} companion matrices"))
}

/// Feasibility of `A x = b, x >= 0` by trying every linearly independent
/// column subset as a basis.
fn brute_force_feasible(a: &QMatrix, b: &QVector) -> bool {
    if b.is_zero() {
        return true;
    }
    let cols: Vec<QVector> = (0..a.cols()).map(|j| a.col(j)).collect();
    for k in 1..=a.rows().min(a.cols()) {
        for subset in (0..a.cols()).combinations(k) {
            let chosen: Vec<QVector> = subset.iter().map(|&j| cols[j].clone()).collect();
            if vectors_rank(&chosen) < k {
                continue;
            }
            let sub = QMatrix::from_rows(&chosen, a.rows()).unwrap().transpose();
            if let Ok(Some(x)) = solve_linear(&sub, b) {
                if x.iter().all(|v| !v.is_negative()) {
                    return true;
                }
            }
        }
    }
    false
}

fn criterion_7() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (mut primal, mut dual) = (0, 0);
    for _ in 0..600 {
        let m = rng.gen_range(1..=5);
        let n = rng.gen_range(1..=7);
        let mut a = QMatrix::zeros(m, n);
        for i in 0..m {
            for j in 0..n {
                a[(i, j)] = rat(&mut rng, 4, 3);
            }
        }
        let b: QVector = if rng.gen_bool(0.5) {
            let x0: QVector = (0..n).map(|_| Rational::new(rng.gen_range(0..=3), rng.gen_range(1..=2))).collect();
            a.mul_vec(&x0).unwrap()
        } else {
            (0..m).map(|_| rat(&mut rng, 4, 3)).collect()
        };
        let cert = farkas_decide(&a, &b).map_err(|e| e.to_string())?;
        ensure(cert.verify(&a, &b), || format!("certificate does not verify for A={a:?} b={b}"))?;
        let feasible = brute_force_feasible(&a, &b);
        match &cert {
            FarkasCertificate::Primal(x) => {
                ensure(feasible && !verify_dual(&a, &b, x), || format!("primal branch disputed for A={a:?} b={b}"))?;
                primal += 1;
            }
            FarkasCertificate::Dual(y) => {
                ensure(!feasible && !verify_primal(&a, &b, y), || format!("dual branch disputed for A={a:?} b={b}"))?;
                dual += 1;
            }
        }
    }
    Ok(format!("600 instances ({primal} primal, {dual} dual)"))
}

fn criterion_8() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut max_err: f64 = 0.0;
    let mut leaves_total = 0;
    for k in 0..240 {
        let n = 2 + k % 5;
        let u = CVector((0..n).map(|_| Complex64::cis(rng.gen_range(0.0..std::f64::consts::TAU))).collect());
        let raw: Vec<Complex64> = (0..n)
            .map(|_| {
                if rng.gen_bool(0.25) {
                    Complex64::new(0.0, 0.0)
                } else {
                    Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
                }
            })
            .collect();
        let mut w = CVector(raw);
        if w.l1_norm() < 1e-3 {
            w.0[0] = Complex64::new(1.0, 0.0);
        }
        let w = w.scale(Complex64::new(1.0 / w.l1_norm(), 0.0));
        // deficits 1 − κ_j, summing to at most 2
        let mut d: Vec<f64> = (1..n)
            .map(|_| if rng.gen_bool(0.2) { 0.0 } else { rng.gen_range(0.0..1.0) })
            .collect();
        let total: f64 = d.iter().sum();
        let budget = rng.gen_range(0.0..=2.0);
        if total > 0.0 {
            d.iter_mut().for_each(|x| *x *= budget / total);
        }
        let mut kappa = vec![1.0];
        kappa.extend(d.iter().map(|x| 1.0 - x));
        let profile = KappaProfile { u: u.clone(), w, kappa };
        let t = ComplexRank1Op::from_profile(&profile).map_err(|e| e.to_string())?;
        ensure(is_norm_one_rank1(&t, &u), || format!("generated operator not norm one: {profile:?}"))?;
        let leaves = decompose_c(&t, &u).map_err(|e| format!("{e} for {profile:?}"))?;
        let err = complex::reconstruction_error(&t, &leaves);
        let wsum: f64 = leaves.iter().map(|l| l.weight).sum();
        ensure(err < 1e-9, || format!("reconstruction error {err:e}"))?;
        ensure((wsum - 1.0).abs() < 1e-9, || format!("weights sum to {wsum}"))?;
        for leaf in &leaves {
            ensure(leaf.depth < n, || format!("depth {} for n = {n}", leaf.depth))?;
            ensure(is_extreme_contraction_c(&leaf.op, &u), || format!("leaf {:?} not extreme", leaf.kappa))?;
        }
        max_err = max_err.max(err);
        leaves_total += leaves.len();
    }
    Ok(format!("240 operators, {leaves_total} leaves, max error {max_err:.1e}"))
}

fn criterion_9() -> Outcome {
    let x = sp(octagon());
    let y = sp(linf(2).unwrap());
    ensure(x.vertices().len() == 8, || "octagon must have 8 vertices".into())?;
    let t = Operator::new(x.clone(), y.clone(), QMatrix::identity(2)).map_err(|e| e.to_string())?;
    ensure(t.norm().is_one(), || format!("norm {}", t.norm()))?;
    ensure(t.attaining_indices().len() == 8, || "norm not attained at all 8 vertices".into())?;
    for v in x.vertices() {
        let image = t.apply(v).map_err(|e| e.to_string())?;
        ensure(!y.is_vertex(&image), || format!("image {image} is a vertex"))?;
    }
    let cert = t.is_extreme_contraction().map_err(|e| e.to_string())?;
    ensure(cert.is_extreme && cert.verify(&t), || format!("oracle says not extreme: rank {}", cert.active_rank))?;
    Ok(format!("active rank {}, extremal number {}", cert.active_rank, t.extremal_number().unwrap()))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome, u64); 9] = [
        ("rank-2 extreme contractions of linf2", criterion_1, 5),
        ("rank-2 infeasibility of the (1 0; 1/2 1/2) operator", criterion_2, 5),
        ("rank-1 extreme contraction counts", criterion_3, 30),
        ("rank-1 criterion agrees with the vertex oracle", criterion_4, 60),
        ("planar rank-1 decompositions", criterion_5, 120),
        ("2x2 companion sign property", criterion_6, 10),
        ("Farkas alternative totality", criterion_7, 30),
        ("complex rank-1 splitting decomposition", criterion_8, 60),
        ("octagon identity into linf2 is extreme", criterion_9, 10),
    ];
    let mut failed = 0;
    for (i, (name, run, budget)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let elapsed = start.elapsed();
        let outcome = match outcome {
            Ok(msg) if elapsed > Duration::from_secs(budget) => {
                Err(format!("{msg}; took {elapsed:.2?}, budget {budget} s"))
            }
            other => other,
        };
        match outcome {
            Ok(msg) => println!("PASS criterion {}: {name} [{elapsed:.2?}] {msg}", i + 1),
            Err(msg) => {
                failed += 1;
                println!("FAIL criterion {}: {name} [{elapsed:.2?}] {msg}", i + 1);
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
