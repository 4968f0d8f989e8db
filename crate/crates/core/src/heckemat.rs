//! Explicit matrices for principal dual Hecke and Atkin-Lehner operators.

use std::collections::BTreeSet;

use num_traits::One;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::heckeops::{is_exact_divisor, Normalization, Op};
use crate::ideals::{crt, psi, sublattice_count, ClassGroup, Ideal};
use crate::linmod::{ab_matrix, Lattice, Mat2};
use crate::modpts::{random_gamma0, FormalSum, Level, ModPoint};
use crate::msym::P1;
use crate::qfield::{Elt, Field, Rat};

/// Which operator a matrix set realises.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SetKind {
    /// `T~_(a,a) T~_b`, general construction.
    IndexB {
        a: Ideal,
        b: Ideal,
    },
    PrincipalPrime {
        p: Ideal,
    },
    SquareClassPrime {
        a: Ideal,
        p: Ideal,
    },
    PrincipalPrimeSquare {
        p: Ideal,
    },
    TaaTp2 {
        a: Ideal,
        p: Ideal,
    },
    PrincipalPq {
        p: Ideal,
        q: Ideal,
    },
    TaaTpq {
        a: Ideal,
        p: Ideal,
        q: Ideal,
    },
    Wq {
        q: Ideal,
    },
    Wqm {
        q: Ideal,
        m: Ideal,
    },
    TpWq {
        p: Ideal,
        q: Ideal,
    },
}

impl SetKind {
    /// The dual operator realised by the set.
    pub fn operator(&self) -> Op {
        let taa_ta = |a: &Ideal, b: Ideal| {
            if a.is_unit_ideal() {
                Op::TaDual(b)
            } else {
                Op::Comp(vec![Op::TaaDual(*a), Op::TaDual(b)])
            }
        };
        match self {
            SetKind::IndexB { a, b } => taa_ta(a, *b),
            SetKind::PrincipalPrime { p } => Op::TaDual(*p),
            SetKind::SquareClassPrime { a, p } => taa_ta(a, *p),
            SetKind::PrincipalPrimeSquare { p } => Op::TaDual(p.mul(p)),
            SetKind::TaaTp2 { a, p } => taa_ta(a, p.mul(p)),
            SetKind::PrincipalPq { p, q } => Op::TaDual(p.mul(q)),
            SetKind::TaaTpq { a, p, q } => taa_ta(a, p.mul(q)),
            SetKind::Wq { q } => Op::WqDual(*q),
            SetKind::Wqm { q, m } => Op::Comp(vec![Op::TaaDual(*m), Op::WqDual(*q)]),
            SetKind::TpWq { p, q } => Op::Comp(vec![Op::TaDual(*p), Op::WqDual(*q)]),
        }
    }

    /// Index ideal of `(O ⊕ O) g` in `O ⊕ O`.
    pub fn index(&self) -> Ideal {
        match self {
            SetKind::IndexB { a, b } => a.mul(a).mul(b),
            SetKind::PrincipalPrime { p } => *p,
            SetKind::SquareClassPrime { a, p } => a.mul(a).mul(p),
            SetKind::PrincipalPrimeSquare { p } => p.mul(p),
            SetKind::TaaTp2 { a, p } => a.mul(a).mul(p).mul(p),
            SetKind::PrincipalPq { p, q } => p.mul(q),
            SetKind::TaaTpq { a, p, q } => a.mul(a).mul(p).mul(q),
            SetKind::Wq { q } => *q,
            SetKind::Wqm { q, m } => q.mul(m).mul(m),
            SetKind::TpWq { p, q } => p.mul(q),
        }
    }

    pub fn expected_count(&self) -> usize {
        let eta = |b: Ideal| sublattice_count(&b) as usize;
        match self {
            SetKind::IndexB { b, .. } => eta(*b),
            SetKind::PrincipalPrime { p } | SetKind::SquareClassPrime { p, .. } => eta(*p),
            SetKind::PrincipalPrimeSquare { p } | SetKind::TaaTp2 { p, .. } => eta(p.mul(p)),
            SetKind::PrincipalPq { p, q } | SetKind::TaaTpq { p, q, .. } => eta(p.mul(q)),
            SetKind::Wq { .. } | SetKind::Wqm { .. } => 1,
            SetKind::TpWq { p, .. } => psi(p) as usize,
        }
    }

    pub fn is_atkin_lehner(&self) -> bool {
        matches!(self, SetKind::Wq { .. } | SetKind::Wqm { .. } | SetKind::TpWq { .. })
    }

    /// `(a, b)` for the general construction this case specialises, if any.
    pub fn general_form(&self) -> Option<(Ideal, Ideal)> {
        let f = self.index().field();
        let o = Ideal::unit(f);
        match self {
            SetKind::IndexB { a, b } => Some((*a, *b)),
            SetKind::PrincipalPrime { p } => Some((o, *p)),
            SetKind::SquareClassPrime { a, p } => Some((*a, *p)),
            SetKind::PrincipalPrimeSquare { p } => Some((o, p.mul(p))),
            SetKind::TaaTp2 { a, p } => Some((*a, p.mul(p))),
            SetKind::PrincipalPq { p, q } => Some((o, p.mul(q))),
            SetKind::TaaTpq { a, p, q } => Some((*a, p.mul(q))),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HeckeMatrixSet {
    pub level: Ideal,
    pub kind: SetKind,
    pub delta: Elt,
    pub matrices: Vec<Mat2>,
}

impl HeckeMatrixSet {
    pub fn field(&self) -> Field {
        self.level.field()
    }

    pub fn descriptor(&self) -> String {
        self.kind.operator().to_string()
    }

    /// Sublattices `(O ⊕ O) g`, in matrix order.
    pub fn lattices(&self) -> Result<Vec<Lattice>> {
        let std = Lattice::standard(self.field());
        self.matrices.iter().map(|g| std.apply(g)).collect()
    }

    /// Unscaled action on a principal point `P = P_00 U`.
    pub fn act(&self, level: &Level, p: &ModPoint) -> Result<FormalSum> {
        let cg = level.class_group();
        if p.class(cg) != cg.identity() {
            return Err(Error::Precondition("matrix sets act on principal points".into()));
        }
        let u = level.admissible_basis0(&p.underlying())?;
        let base = level.principal_point0();
        let mut out = FormalSum::zero(&self.level);
        for g in &self.matrices {
            out.add_term(base.apply(&(*g * u))?, Rat::one());
        }
        Ok(out)
    }
}

impl HeckeMatrixSet {
    fn shrunk(mut self) -> HeckeMatrixSet {
        let n = self.level;
        self.matrices = self.matrices.into_iter().map(|m| m.size_reduced(Some(&n))).collect();
        self
    }
}

fn require(cond: bool, msg: impl Into<String>) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::Precondition(msg.into()))
    }
}

/// Rescale the first row so the determinant is exactly `delta`.
fn fix_det(m: Mat2, delta: &Elt) -> Result<Mat2> {
    let u = *delta / m.det();
    if !u.is_unit() {
        return Err(Error::Inconsistent(format!("determinant of {m} is not associate to {delta}")));
    }
    Ok(Mat2::new(m.a() * u, m.b() * u, m.c(), m.d()))
}

fn level_ab(a: &Ideal, b: &Ideal, n: &Ideal, delta: &Elt) -> Result<Mat2> {
    fix_det(ab_matrix(a, b, n)?, delta)
}

/// Smallest element of `n` outside every ideal in `avoid`.
fn nu(n: &Ideal, avoid: &[Ideal]) -> Elt {
    n.search(|v| avoid.iter().all(|p| !p.contains(v)))
}

/// Lifts to `Gamma_0(n)` of all points of the projective line mod `b`.
fn coset_lifts(b: &Ideal, n: &Ideal) -> Result<Vec<Mat2>> {
    let p1 = P1::new(b)?;
    p1.symbols().iter().map(|s| p1.lift_to_gamma0(s, n)).collect()
}

/// Hecke matrices of level `n` for `T~_(a,a) T~_b`, `a^2 b` principal.
pub fn hecke_matrices_index_b(a: &Ideal, b: &Ideal, n: &Ideal) -> Result<HeckeMatrixSet> {
    require(a.is_integral() && b.is_integral(), "ideals must be integral")?;
    require(b.is_coprime(n), format!("{b} is not coprime to the level {n}"))?;
    require(a.is_coprime(n), format!("{a} is not coprime to the level {n}"))?;
    let delta = a.mul(a).mul(b).require_generator()?;
    let mut matrices = Vec::new();
    for (b1, b2) in crate::ideals::square_splits(b) {
        let big = level_ab(&a.mul(&b1).mul(&b2), &a.mul(&b2), n, &delta)?;
        for c in coset_lifts(&b1, n)? {
            matrices.push(big * c);
        }
    }
    Ok(HeckeMatrixSet { level: *n, kind: SetKind::IndexB { a: *a, b: *b }, delta, matrices }.shrunk())
}

fn check_prime(p: &Ideal, n: &Ideal) -> Result<()> {
    require(p.is_prime(), format!("{p} is not prime"))?;
    require(p.is_coprime(n), format!("{p} divides the level {n}"))
}

/// `[[pi,0],[0,1]]` and `[[1,x],[0,pi]]` for `x` mod `p`.
pub fn principal_prime(p: &Ideal, n: &Ideal) -> Result<HeckeMatrixSet> {
    check_prime(p, n)?;
    let pi = p.require_generator()?;
    let f = p.field();
    let mut matrices = vec![Mat2::diag(pi, f.one())];
    for x in p.residues() {
        matrices.push(Mat2::new(f.one(), x, f.zero(), pi));
    }
    Ok(HeckeMatrixSet { level: *n, kind: SetKind::PrincipalPrime { p: *p }, delta: pi, matrices }.shrunk())
}

/// `B` and `B [[1,x],[nu,1+x nu]]` with `B` an `(ap, a)`-matrix of level `n`.
pub fn square_class_prime(a: &Ideal, p: &Ideal, n: &Ideal) -> Result<HeckeMatrixSet> {
    check_prime(p, n)?;
    require(a.is_integral() && a.is_coprime(n), "a must be integral and coprime to the level")?;
    let f = p.field();
    let delta = a.mul(a).mul(p).require_generator()?;
    let big = level_ab(&a.mul(p), a, n, &delta)?;
    let v = nu(n, &[*p]);
    let mut matrices = vec![big];
    for x in p.residues() {
        matrices.push(big * Mat2::new(f.one(), x, v, f.one() + x * v));
    }
    Ok(HeckeMatrixSet { level: *n, kind: SetKind::SquareClassPrime { a: *a, p: *p }, delta, matrices }.shrunk())
}

/// `T~_(p^2)` for a prime whose square is principal.
pub fn principal_prime_square(p: &Ideal, n: &Ideal) -> Result<HeckeMatrixSet> {
    check_prime(p, n)?;
    let f = p.field();
    let p2 = p.mul(p);
    let beta = p2.require_generator()?;
    let mut matrices = vec![level_ab(p, p, n, &beta)?];
    for x in p2.residues() {
        matrices.push(Mat2::new(f.one(), x, f.zero(), beta));
    }
    let v = nu(n, &[*p]);
    for y in p2.residues().into_iter().filter(|y| p.contains(y)) {
        matrices.push(Mat2::new(beta, f.zero(), y * v, f.one()));
    }
    Ok(HeckeMatrixSet { level: *n, kind: SetKind::PrincipalPrimeSquare { p: *p }, delta: beta, matrices }.shrunk())
}

/// `T~_(a,a) T~_(p^2)` with `a p` principal.
pub fn taa_tp2(a: &Ideal, p: &Ideal, n: &Ideal) -> Result<HeckeMatrixSet> {
    check_prime(p, n)?;
    require(a.is_integral() && a.is_coprime(n), "a must be integral and coprime to the level")?;
    let p2 = p.mul(p);
    let delta = a.mul(a).mul(&p2).require_generator()?;
    let ap = a.mul(p);
    let mut matrices = vec![level_ab(&ap, &ap, n, &delta)?];
    let b2 = level_ab(&a.mul(&p2), a, n, &delta)?;
    for c in coset_lifts(&p2, n)? {
        matrices.push(b2 * c);
    }
    Ok(HeckeMatrixSet { level: *n, kind: SetKind::TaaTp2 { a: *a, p: *p }, delta, matrices }.shrunk())
}

/// `T~_(pq)` for distinct primes with `pq` principal.
pub fn principal_pq(p: &Ideal, q: &Ideal, n: &Ideal) -> Result<HeckeMatrixSet> {
    check_prime(p, n)?;
    check_prime(q, n)?;
    require(p != q, "primes must be distinct")?;
    let f = p.field();
    let pq = p.mul(q);
    let beta = pq.require_generator()?;
    let mut matrices = Vec::new();
    for x in pq.residues() {
        matrices.push(Mat2::new(f.one(), x, f.zero(), beta));
    }
    let v = nu(n, &[*p, *q]);
    for y in pq.residues().into_iter().filter(|y| p.contains(y) || q.contains(y)) {
        matrices.push(Mat2::new(beta, f.zero(), y * v, f.one()));
    }
    matrices.push(level_ab(p, q, n, &beta)?);
    matrices.push(level_ab(q, p, n, &beta)?);
    Ok(HeckeMatrixSet { level: *n, kind: SetKind::PrincipalPq { p: *p, q: *q }, delta: beta, matrices }.shrunk())
}

/// `T~_(a,a) T~_(pq)` with `a^2 pq` principal.
pub fn taa_tpq(a: &Ideal, p: &Ideal, q: &Ideal, n: &Ideal) -> Result<HeckeMatrixSet> {
    check_prime(p, n)?;
    check_prime(q, n)?;
    require(p != q, "primes must be distinct")?;
    require(a.is_integral() && a.is_coprime(n), "a must be integral and coprime to the level")?;
    let pq = p.mul(q);
    let delta = a.mul(a).mul(&pq).require_generator()?;
    let big = level_ab(&a.mul(&pq), a, n, &delta)?;
    let matrices = coset_lifts(&pq, n)?.into_iter().map(|c| big * c).collect();
    Ok(HeckeMatrixSet { level: *n, kind: SetKind::TaaTpq { a: *a, p: *p, q: *q }, delta, matrices }.shrunk())
}

/// Entries in `[[mq, m], [mn, mq]]` with `<det> = q m^2`.
pub fn is_wqm_matrix(mat: &Mat2, q: &Ideal, m: &Ideal, n: &Ideal) -> bool {
    let mq = m.mul(q);
    let det = mat.det();
    !det.is_zero()
        && mq.contains(&mat.a())
        && m.contains(&mat.b())
        && m.mul(n).contains(&mat.c())
        && mq.contains(&mat.d())
        && Ideal::principal(det).map(|i| i == q.mul(m).mul(m)).unwrap_or(false)
}

pub fn is_wq_matrix(mat: &Mat2, q: &Ideal, n: &Ideal) -> bool {
    is_wqm_matrix(mat, q, &Ideal::unit(q.field()), n)
}

/// A `W_q^m`-matrix of level `n`.
pub fn wqm_matrix(cg: &ClassGroup, q: &Ideal, m: &Ideal, n: &Ideal) -> Result<Mat2> {
    let f = q.field();
    require(is_exact_divisor(q, n), format!("{q} is not an exact divisor of {n}"))?;
    require(m.is_integral(), "m must be integral")?;
    let qp = n.div(q);
    require(m.is_coprime(&qp), format!("{m} is not coprime to {qp}"))?;
    if q.is_unit_ideal() && m.is_unit_ideal() {
        return Ok(Mat2::identity(f));
    }
    let g = q.mul(m).mul(m).require_generator()?;
    let mn = m.mul(n);
    let a = cg.ideal_in_class_coprime_to(&cg.neg(&cg.class_of(&mn)), &mn);
    let z = a.mul(&mn).require_generator()?;
    let mq = m.mul(q);
    let b = cg.ideal_in_class_coprime_to(&cg.neg(&cg.class_of(&mq)), &a.mul(&qp));
    let x = b.mul(&mq).require_generator()?;
    let gx = g * x;
    let (e1, e2) = m.scale(&gx)?.decompose(&m.scale(&z)?, &g)?;
    let w = e1 / gx;
    let y = -(e2 / z);
    Ok(Mat2::new(x, y, z, g * w))
}

pub fn wq_matrix(cg: &ClassGroup, q: &Ideal, n: &Ideal) -> Result<Mat2> {
    wqm_matrix(cg, q, &Ideal::unit(q.field()), n)
}

pub fn wq_set(cg: &ClassGroup, q: &Ideal, n: &Ideal) -> Result<HeckeMatrixSet> {
    let m = wq_matrix(cg, q, n)?;
    Ok(HeckeMatrixSet { level: *n, kind: SetKind::Wq { q: *q }, delta: m.det(), matrices: vec![m] }.shrunk())
}

pub fn wqm_set(cg: &ClassGroup, q: &Ideal, m: &Ideal, n: &Ideal) -> Result<HeckeMatrixSet> {
    let mat = wqm_matrix(cg, q, m, n)?;
    Ok(HeckeMatrixSet { level: *n, kind: SetKind::Wqm { q: *q, m: *m }, delta: mat.det(), matrices: vec![mat] }
        .shrunk())
}

/// `(q3, m3)` for the product of a `W_q1^m1`- and a `W_q2^m2`-matrix.
pub fn wqm_product_class(q1: &Ideal, m1: &Ideal, q2: &Ideal, m2: &Ideal) -> (Ideal, Ideal) {
    let a = q1.add(q2);
    (q1.mul(q2).div(&a.mul(&a)), a.mul(m1).mul(m2))
}

/// `N(p) + 1` matrices for `T~_p W~_q` with `pq` principal.
pub fn tp_wq_matrices(cg: &ClassGroup, p: &Ideal, q: &Ideal, n: &Ideal) -> Result<HeckeMatrixSet> {
    let f = p.field();
    check_prime(p, n)?;
    require(!q.is_unit_ideal(), "q must be a proper exact divisor; use Hecke matrices for q = O")?;
    require(is_exact_divisor(q, n), format!("{q} is not an exact divisor of {n}"))?;
    let g = p.mul(q).require_generator()?;
    let qp = n.div(q);
    let b = cg.ideal_in_class_coprime_to(&cg.neg(&cg.class_of(&qp)), &p.mul(q));
    let bq = b.mul(&qp);
    let h = bq.require_generator()?;
    let big = p.mul(n).mul(&b);
    let p1 = P1::new(p)?;
    let mut matrices = Vec::new();
    for s in p1.symbols() {
        let c = crt(&crt(&s.c, p, &f.one(), q)?, &p.mul(q), &f.zero(), &bq)?;
        let d = crt(&crt(&s.d, p, &f.zero(), q)?, &p.mul(q), &f.one(), &bq)?;
        let lift = crate::msym::lift_pair(&c, &d, &big)?;
        let (a0, b0, c0, d0) = (lift.a(), lift.b(), lift.c(), lift.d());
        matrices.push(Mat2::new(d0, c0 / h, b0 * g * h, a0 * g));
    }
    Ok(HeckeMatrixSet { level: *n, kind: SetKind::TpWq { p: *p, q: *q }, delta: g, matrices }.shrunk())
}

fn hecke_case(a: Option<&Ideal>, b: &Ideal, n: &Ideal) -> Result<HeckeMatrixSet> {
    require(b.is_integral(), format!("{b} is not integral"))?;
    let f = b.field();
    let o = Ideal::unit(f);
    let fac = b.factor();
    let principal_a = a.is_none_or(|x| x.is_unit_ideal());
    match (principal_a, fac.as_slice()) {
        (true, [(p, 1)]) => principal_prime(p, n),
        (true, [(p, 2)]) => principal_prime_square(p, n),
        (true, [(p, 1), (q, 1)]) => principal_pq(p, q, n),
        (false, [(p, 1)]) => square_class_prime(a.unwrap(), p, n),
        (false, [(p, 2)]) => taa_tp2(a.unwrap(), p, n),
        (false, [(p, 1), (q, 1)]) => taa_tpq(a.unwrap(), p, q, n),
        _ => hecke_matrices_index_b(a.unwrap_or(&o), b, n),
    }
}

/// The matrix set realising a principal operator at level `n`. Plain and
/// dual descriptors are accepted alike; the set records the dual form.
pub fn matrix_set_for(cg: &ClassGroup, op: &Op, n: &Ideal) -> Result<HeckeMatrixSet> {
    let bad = || Error::InvalidOperator(format!("no matrix construction for {op}"));
    let set = match op {
        Op::Ta(b) | Op::TaDual(b) => hecke_case(None, b, n)?,
        Op::Wq(q) | Op::WqDual(q) => wq_set(cg, q, n)?,
        Op::Comp(parts) => match parts.as_slice() {
            [Op::Taa(a) | Op::TaaDual(a), Op::Ta(b) | Op::TaDual(b)] => hecke_case(Some(a), b, n)?,
            [Op::Taa(m) | Op::TaaDual(m), Op::Wq(q) | Op::WqDual(q)] => wqm_set(cg, q, m, n)?,
            [Op::Ta(p) | Op::TaDual(p), Op::Wq(q) | Op::WqDual(q)] => tp_wq_matrices(cg, p, q, n)?,
            _ => return Err(bad()),
        },
        _ => return Err(bad()),
    };
    Ok(set)
}

/// Outcome of [`verify_sublattice_action`].
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Report {
    pub distinct: bool,
    pub count: bool,
    pub index: bool,
    pub determinant: bool,
    pub level: bool,
    pub points: bool,
    pub stable: bool,
    pub operator: bool,
    pub messages: Vec<String>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.distinct
            && self.count
            && self.index
            && self.determinant
            && self.level
            && self.points
            && self.stable
            && self.operator
    }
}

/// Generators of `SL(2, O)` plus diagonal units.
fn sl2_generators(f: Field) -> Vec<Mat2> {
    let mut out = vec![
        Mat2::new(f.one(), f.one(), f.zero(), f.one()),
        Mat2::new(f.one(), f.omega(), f.zero(), f.one()),
        Mat2::new(f.zero(), -f.one(), f.one(), f.zero()),
    ];
    for u in f.units() {
        out.push(Mat2::diag(u, u.inv().expect("unit")));
    }
    out
}

/// Checks a matrix set: distinct sublattices, count, index, determinants,
/// level, validity of the image points, stability under the relevant
/// group, and agreement with lattice enumeration of the operator.
pub fn verify_sublattice_action(set: &HeckeMatrixSet, level: &Level) -> Result<Report> {
    let f = set.field();
    let n = &set.level;
    let mut r = Report::default();
    let note = |ok: bool, msg: String, r: &mut Vec<String>| {
        if !ok {
            r.push(msg);
        }
        ok
    };
    let lats = set.lattices()?;
    let uniq: BTreeSet<Lattice> = lats.iter().copied().collect();
    r.distinct = note(uniq.len() == lats.len(), "sublattices are not pairwise distinct".into(), &mut r.messages);
    r.count = note(
        lats.len() == set.kind.expected_count(),
        format!("expected {} matrices, found {}", set.kind.expected_count(), lats.len()),
        &mut r.messages,
    );
    let std = Lattice::standard(f);
    let idx = set.kind.index();
    r.index = note(
        lats.iter().all(|l| std.contains(l) && std.index_ideal(l) == idx),
        format!("some sublattice does not have index {idx}"),
        &mut r.messages,
    );
    r.determinant = note(
        set.matrices.iter().all(|g| (g.det() / set.delta).is_unit()),
        "determinant not associate to delta".into(),
        &mut r.messages,
    );
    r.level = note(
        set.matrices.iter().all(|g| g.is_integral() && n.contains(&g.c())),
        "some matrix is not integral with lower-left entry in the level".into(),
        &mut r.messages,
    );
    let base = level.principal_point0();
    let pts: Vec<ModPoint> = set.matrices.iter().map(|g| base.apply(g)).collect::<Result<_>>()?;
    r.points = note(pts.iter().all(|p| p.is_valid(n)), "some image is not a modular point".into(), &mut r.messages);
    let pset: BTreeSet<ModPoint> = pts.iter().copied().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let gam0: Vec<Mat2> = (0..4).map(|_| random_gamma0(&mut rng, n, 5)).collect();
    let mut stable = gam0.iter().all(|g| {
        let moved: Option<BTreeSet<ModPoint>> = pts.iter().map(|p| p.apply(g).ok()).collect();
        moved.as_ref() == Some(&pset)
    });
    if !set.kind.is_atkin_lehner() {
        stable &= sl2_generators(f).iter().all(|g| {
            let moved: Option<BTreeSet<Lattice>> = lats.iter().map(|l| l.apply(g).ok()).collect();
            moved.as_ref() == Some(&uniq)
        });
    }
    r.stable = note(stable, "image set is not stable under right multiplication".into(), &mut r.messages);
    let want = set.kind.operator().apply_with(&FormalSum::point(n, base), Normalization::Unscaled);
    let got = set.act(level, &base);
    r.operator = note(
        matches!((&want, &got), (Ok(a), Ok(b)) if a == b),
        "matrix action differs from the lattice operator".into(),
        &mut r.messages,
    );
    Ok(r)
}

/// Sublattices of the general construction for the same `(a, b)`.
pub fn agrees_with_general(set: &HeckeMatrixSet) -> Result<bool> {
    let std = Lattice::standard(set.field());
    let mine: BTreeSet<Lattice> = set.lattices()?.into_iter().collect();
    match set.kind.general_form() {
        Some((a, b)) => {
            let gen = hecke_matrices_index_b(&a, &b, &set.level)?;
            let theirs: BTreeSet<Lattice> = gen.lattices()?.into_iter().collect();
            Ok(mine == theirs)
        }
        None => {
            let all: BTreeSet<Lattice> = std.sublattices(&set.kind.index())?.into_iter().collect();
            Ok(mine.is_subset(&all))
        }
    }
}
