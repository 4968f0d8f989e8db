//! Modular points for `Gamma_0(n)` and `Gamma_1(n)`, standard points,
//! admissible bases, and formal sums of points.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use num_traits::{One, Zero};

use crate::cyclo::CycValue;
use crate::eigsys::UnramifiedCharacter;
use crate::error::{Error, Result};
use crate::ideals::{Class, ClassGroup, Ideal, StandardReps};
use crate::linmod::{Lattice, Mat2, Vec2};
use crate::qfield::{rat, Elt, Field, Rat};

/// `(L, L')` or `(L, L', beta)`; `beta` is kept reduced modulo `L`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ModPoint {
    pub l: Lattice,
    pub lp: Lattice,
    beta: Option<Vec2>,
}

impl ModPoint {
    pub fn gamma0(l: Lattice, lp: Lattice) -> ModPoint {
        ModPoint { l, lp, beta: None }
    }

    pub fn gamma1(l: Lattice, lp: Lattice, beta: Vec2) -> ModPoint {
        ModPoint { l, lp, beta: Some(l.reduce(&beta)) }
    }

    pub fn beta(&self) -> Option<Vec2> {
        self.beta
    }

    pub fn is_gamma1(&self) -> bool {
        self.beta.is_some()
    }

    pub fn field(&self) -> Field {
        self.l.field()
    }

    pub fn underlying(&self) -> ModPoint {
        ModPoint { beta: None, ..*self }
    }

    pub fn with_beta(&self, beta: Vec2) -> ModPoint {
        ModPoint::gamma1(self.l, self.lp, beta)
    }

    /// Why the point fails to be a modular point of level `n`, if it does.
    pub fn check(&self, n: &Ideal) -> std::result::Result<(), String> {
        if !self.lp.contains(&self.l) {
            return Err("L is not contained in L'".into());
        }
        if self.lp.index_ideal(&self.l) != *n {
            return Err("index of L in L' is not the level".into());
        }
        for p in n.prime_divisors() {
            if self.lp.scale(&p).contains(&self.l) {
                return Err(format!("L'/L is not cyclic at {p}"));
            }
        }
        if let Some(b) = self.beta {
            if !self.lp.contains_vec(&b) {
                return Err("beta is not in L'".into());
            }
            if self.l.add_vec(&b) != self.lp {
                return Err("beta does not generate L'/L".into());
            }
        }
        Ok(())
    }

    pub fn is_valid(&self, n: &Ideal) -> bool {
        self.check(n).is_ok()
    }

    pub fn apply(&self, u: &Mat2) -> Result<ModPoint> {
        let l = self.l.apply(u)?;
        let lp = self.lp.apply(u)?;
        Ok(match self.beta {
            Some(b) => ModPoint::gamma1(l, lp, u.apply(b)),
            None => ModPoint::gamma0(l, lp),
        })
    }

    /// `(aL, aL', beta)` with beta unchanged.
    pub fn scale(&self, a: &Ideal) -> ModPoint {
        let l = self.l.scale(a);
        let lp = self.lp.scale(a);
        match self.beta {
            Some(b) => ModPoint::gamma1(l, lp, b),
            None => ModPoint::gamma0(l, lp),
        }
    }

    pub fn steinitz(&self) -> Ideal {
        self.l.det_ideal()
    }

    pub fn class(&self, cg: &ClassGroup) -> Class {
        cg.class_of(&self.steinitz())
    }

    pub fn literal(&self) -> String {
        match self.beta {
            None => format!("{{{}, {}}}", self.l.literal(), self.lp.literal()),
            Some(b) => format!("{{{}, {}, [{},{}]}}", self.l.literal(), self.lp.literal(), b[0], b[1]),
        }
    }
}

impl fmt::Display for ModPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.literal())
    }
}

/// `[diamond alpha](L, L', beta) = (L, L', alpha beta)`.
pub fn diamond(alpha: &Elt, p: &ModPoint, n: &Ideal) -> Result<ModPoint> {
    let ai = Ideal::principal(*alpha)?;
    let num = ai.numerator();
    if !num.is_coprime(n) || !Ideal::from_int(n.field(), ai.denominator())?.is_coprime(n) {
        return Err(Error::NotCoprime(alpha.to_string(), n.to_string()));
    }
    let b = p.beta.ok_or_else(|| Error::InvalidPoint("diamond operators act on Gamma_1 points".into()))?;
    // replace alpha by an integral representative of alpha mod n
    let f = n.field();
    let a = if alpha.is_integral() {
        *alpha
    } else {
        let d = f.from_int(ai.denominator());
        let dinv = Ideal::principal(d)?.unit_sum(n)?;
        // d * e ≡ 1 mod n where e = dinv.0 / d
        let e = dinv.0 / d;
        let num_elt = *alpha * d;
        num_elt * e
    };
    Ok(p.with_beta([b[0] * a, b[1] * a]))
}

/// Everything attached to one level: standard representatives, the
/// generator data for Gamma_1 points, and admissible bases.
pub struct Level {
    cg: Arc<ClassGroup>,
    n: Ideal,
    reps: StandardReps,
    n0: Elt,
    z: Vec<Elt>,
}

impl Level {
    pub fn new(cg: Arc<ClassGroup>, n: &Ideal) -> Result<Level> {
        if !n.is_integral() {
            return Err(Error::NotIntegral(n.to_string()));
        }
        let f = n.field();
        let reps = cg.standard_reps(n);
        let ninv = n.inverse();
        let o = Ideal::unit(f);
        let n0 = if n.is_unit_ideal() {
            f.zero()
        } else {
            ninv.search(|e| Ideal::principal(*e).map(|i| i.add(&o) == ninv).unwrap_or(false))
        };
        let mut z = Vec::new();
        for (q, qc) in reps.q.iter().zip(&reps.q_class) {
            let a = cg.ideal_in_class_coprime_to(&cg.neg(qc), n);
            z.push(a.mul(q).require_generator()?);
        }
        Ok(Level { cg, n: *n, reps, n0, z })
    }

    pub fn ideal(&self) -> &Ideal {
        &self.n
    }

    pub fn field(&self) -> Field {
        self.n.field()
    }

    pub fn class_group(&self) -> &ClassGroup {
        &self.cg
    }

    pub fn class_group_arc(&self) -> Arc<ClassGroup> {
        self.cg.clone()
    }

    pub fn reps(&self) -> &StandardReps {
        &self.reps
    }

    pub fn n0(&self) -> Elt {
        self.n0
    }

    pub fn beta_j(&self, j: usize) -> Vec2 {
        let f = self.field();
        [f.zero(), self.n0 * self.z[j]]
    }

    pub fn standard_point0(&self, i: usize, j: usize) -> ModPoint {
        let p = &self.reps.p[i];
        let q = &self.reps.q[j];
        let pq = p.mul(q);
        ModPoint::gamma0(Lattice::split(&pq, q), Lattice::split(&pq, &q.div(&self.n)))
    }

    pub fn standard_point1(&self, i: usize, j: usize) -> ModPoint {
        self.standard_point0(i, j).with_beta(self.beta_j(j))
    }

    pub fn principal_point0(&self) -> ModPoint {
        self.standard_point0(0, 0)
    }

    pub fn principal_point1(&self) -> ModPoint {
        self.standard_point1(0, 0)
    }

    /// All standard points, index order.
    pub fn standard_points0(&self) -> Vec<ModPoint> {
        let mut out = Vec::new();
        for i in 0..self.reps.p.len() {
            for j in 0..self.reps.q.len() {
                out.push(self.standard_point0(i, j));
            }
        }
        out
    }

    pub fn class_index(&self, p: &ModPoint) -> (usize, usize) {
        self.reps.index_of(&self.cg, &p.class(&self.cg))
    }

    /// `(b1, b2, U0)` integral with `L = (b1 ⊕ b2) U0` and
    /// `L' = (b1 ⊕ n^-1 b2) U0`.
    pub fn adapted_basis(&self, p: &ModPoint) -> Result<(Ideal, Ideal, Mat2)> {
        let f = self.field();
        let pb = p.lp.pseudo_basis();
        let w = pb.u;
        let lam = p.l.apply(&w.inverse()?)?;
        let ratio = pb.b1.div(&pb.b2);
        let try_r = |r: Elt| -> Result<Option<(Ideal, Ideal, Mat2)>> {
            let g = Mat2::new(f.one(), f.zero(), r, f.one());
            let lg = lam.apply(&g)?;
            let pg = lg.pseudo_basis();
            if pg.b1 != pb.b1 {
                return Ok(None);
            }
            let t = Mat2::new(f.one(), pg.u.b(), f.zero(), f.one());
            let u0 = t * g.inverse()? * w;
            Ok(Some((pb.b1, self.n.mul(&pb.b2), u0)))
        };
        let found = match try_r(f.zero())? {
            Some(x) => x,
            None => {
                let mut bound = ratio.norm() * rat(4);
                let mut seen = Rat::zero();
                loop {
                    let mut hit = None;
                    for r in ratio.elements_up_to_norm(bound) {
                        if r.is_zero() || r.norm() <= seen {
                            continue;
                        }
                        if let Some(x) = try_r(r)? {
                            hit = Some(x);
                            break;
                        }
                    }
                    if let Some(x) = hit {
                        break x;
                    }
                    seen = bound;
                    bound *= rat(4);
                }
            }
        };
        let (b1, b2, u0) = found;
        let k1 = b1.denominator();
        let k2 = b2.denominator();
        let d = Mat2::diag(f.elt(Rat::new(1, k1), Rat::zero()), f.elt(Rat::new(1, k2), Rat::zero()));
        Ok((b1.scale_rat(rat(k1)), b2.scale_rat(rat(k2)), d * u0))
    }

    /// `U` with `P = P_ij U`, built as in the existence proof.
    pub fn admissible_basis0(&self, p: &ModPoint) -> Result<Mat2> {
        let cg = &self.cg;
        let f = self.field();
        let (i, j) = self.class_index(p);
        let pp = p.underlying().scale(&self.reps.q[j].inverse());
        let (b1, b2, u0) = self.adapted_basis(&pp)?;
        let t = b1.mul(&b2).div(&self.reps.p[i]).require_generator()?;
        let nb1 = self.n.mul(&b1);
        let a = cg.ideal_in_class_coprime_to(&cg.neg(&cg.class_of(&nb1)), &b2);
        let z = a.mul(&nb1).require_generator()?;
        let an = a.mul(&self.n);
        let b2inv = b2.inverse();
        let x = b2inv.search(|x| b2.scale(x).map(|i| i.is_coprime(&an)).unwrap_or(false));
        let (u, v) = b2.scale(&x)?.decompose(&b1.inverse().scale(&z)?, &f.one())?;
        let w = u / x;
        let y = -(v / z);
        let vm = Mat2::new(x, y, z, w);
        Ok(Mat2::diag(t, f.one()) * vm * u0)
    }

    /// `U` with `P~ = P~_ij U`.
    pub fn admissible_basis1(&self, p: &ModPoint) -> Result<Mat2> {
        let f = self.field();
        let beta = p.beta().ok_or_else(|| Error::InvalidPoint("admissible_basis1 needs a Gamma_1 point".into()))?;
        let u0 = self.admissible_basis0(p)?;
        let (i, j) = self.class_index(p);
        let bp = u0.inverse()?.apply(beta);
        let nj = self.beta_j(j)[1];
        let qj = &self.reps.q[j];
        let u = if self.n.is_unit_ideal() {
            f.one()
        } else {
            *self
                .n
                .residues()
                .iter()
                .find(|r| qj.contains(&(nj * **r - bp[1])))
                .ok_or_else(|| Error::InvalidPoint("beta does not generate L'/L".into()))?
        };
        let pi = &self.reps.p[i];
        let gamma = gamma_with_corner(&u, pi, &self.n)?;
        Ok(gamma * u0)
    }
}

/// A matrix `[[a, b], [c, u]]` of determinant one in `Gamma_0^p(n)`.
pub fn gamma_with_corner(u: &Elt, p: &Ideal, n: &Ideal) -> Result<Mat2> {
    let np = n.mul(p);
    let pinv = p.inverse();
    let uid = Ideal::principal(*u)?;
    let c = np.search(|c| pinv.scale(c).map(|i| i.is_coprime(&uid)).unwrap_or(false));
    let (e, g) = uid.unit_sum(&pinv.scale(&c)?)?;
    Ok(Mat2::new(e / *u, -(g / c), c, *u))
}

/// Exact rational combination of modular points of one level.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FormalSum {
    level: Ideal,
    terms: BTreeMap<ModPoint, Rat>,
}

impl FormalSum {
    pub fn zero(level: &Ideal) -> FormalSum {
        FormalSum { level: *level, terms: BTreeMap::new() }
    }

    pub fn point(level: &Ideal, p: ModPoint) -> FormalSum {
        let mut s = Self::zero(level);
        s.add_term(p, Rat::one());
        s
    }

    pub fn from_terms<I: IntoIterator<Item = (Rat, ModPoint)>>(level: &Ideal, it: I) -> FormalSum {
        let mut s = Self::zero(level);
        for (c, p) in it {
            s.add_term(p, c);
        }
        s
    }

    pub fn level(&self) -> &Ideal {
        &self.level
    }

    pub fn add_term(&mut self, p: ModPoint, c: Rat) {
        if c.is_zero() {
            return;
        }
        let e = self.terms.entry(p).or_insert_with(Rat::zero);
        *e += c;
        if e.is_zero() {
            self.terms.remove(&p);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&ModPoint, &Rat)> {
        self.terms.iter()
    }

    pub fn coeff(&self, p: &ModPoint) -> Rat {
        self.terms.get(p).copied().unwrap_or_else(Rat::zero)
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn scale(&self, r: Rat) -> FormalSum {
        Self::from_terms(&self.level, self.terms.iter().map(|(p, c)| (*c * r, *p)))
    }

    pub fn plus(&self, o: &FormalSum) -> FormalSum {
        let mut s = self.clone();
        for (p, c) in &o.terms {
            s.add_term(*p, *c);
        }
        s
    }

    pub fn minus(&self, o: &FormalSum) -> FormalSum {
        self.plus(&o.scale(-Rat::one()))
    }

    pub fn all_valid(&self) -> bool {
        self.terms.keys().all(|p| p.is_valid(&self.level))
    }

    pub fn classes(&self, cg: &ClassGroup) -> BTreeSet<Class> {
        self.terms.keys().map(|p| p.class(cg)).collect()
    }

    pub fn component(&self, cg: &ClassGroup, c: &Class) -> FormalSum {
        Self::from_terms(&self.level, self.terms.iter().filter(|(p, _)| p.class(cg) == *c).map(|(p, x)| (*x, *p)))
    }

    pub fn literal(&self) -> String {
        let parts: Vec<String> = self.terms.iter().map(|(p, c)| format!("{{{}, {}}}", c, p.literal())).collect();
        format!("[{}]", parts.join(", "))
    }
}

/// Formal sum with cyclotomic coefficients, the result of twisting.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TwistedSum {
    pub level: Ideal,
    pub terms: Vec<(ModPoint, CycValue)>,
}

/// `v ⊗ psi = sum over classes c of psi(c)^-1 v_c`.
pub fn twist_formal_sum(v: &FormalSum, psi: &UnramifiedCharacter, cg: &ClassGroup) -> TwistedSum {
    let terms = v
        .terms()
        .map(|(p, c)| {
            let val = psi.value(cg, &p.class(cg)).inv().expect("root of unity");
            (*p, val.scale(*c))
        })
        .collect();
    TwistedSum { level: *v.level(), terms }
}

/// Twist a twisted sum further (coefficients multiply).
pub fn twist_again(v: &TwistedSum, psi: &UnramifiedCharacter, cg: &ClassGroup) -> TwistedSum {
    let terms = v
        .terms
        .iter()
        .map(|(p, c)| {
            let val = psi.value(cg, &p.class(cg)).inv().expect("root of unity");
            (*p, c * &val)
        })
        .collect();
    TwistedSum { level: v.level, terms }
}

impl TwistedSum {
    pub fn from_rational(v: &FormalSum) -> TwistedSum {
        TwistedSum { level: *v.level(), terms: v.terms().map(|(p, c)| (*p, CycValue::from_rat(1, *c))).collect() }
    }
}

/// Random element of `Gamma_1(n)` as a short word in elementary matrices.
pub fn random_gamma1<R: rand::Rng>(rng: &mut R, n: &Ideal, steps: usize) -> Mat2 {
    let f = n.field();
    let [g1, g2] = n.zbasis();
    let mut m = Mat2::identity(f);
    for _ in 0..steps {
        let x = f.int(rng.gen_range(-2..=2), rng.gen_range(-2..=2));
        let c = g1 * rng.gen_range(-1..=1) + g2 * rng.gen_range(-1..=1);
        let e = if rng.gen_bool(0.5) {
            Mat2::new(f.one(), x, f.zero(), f.one())
        } else {
            Mat2::new(f.one(), f.zero(), c, f.one())
        };
        m = m * e;
    }
    m
}

/// Random element of `Gamma_0(n)`: a `Gamma_1(n)` word times a diagonal unit.
pub fn random_gamma0<R: rand::Rng>(rng: &mut R, n: &Ideal, steps: usize) -> Mat2 {
    let f = n.field();
    let units = f.units();
    let u = units[rng.gen_range(0..units.len())];
    let g = random_gamma1(rng, n, steps);
    let t = if n.is_unit_ideal() {
        Mat2::identity(f)
    } else {
        let units: Vec<Elt> = n
            .residues()
            .into_iter()
            .filter(|r| !r.is_zero() && Ideal::principal(*r).map(|i| i.is_coprime(n)).unwrap_or(false))
            .collect();
        let d = units[rng.gen_range(0..units.len())];
        crate::msym::lift_pair(&f.zero(), &d, n).expect("unimodular")
    };
    Mat2::diag(u, u.inv().expect("unit")) * t * g
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ideals::primes_above;

    fn level(d: i64, n: Ideal) -> Level {
        let f = Field::new(d).unwrap();
        Level::new(Arc::new(ClassGroup::new(f)), &n).unwrap()
    }

    #[test]
    fn basic_validity() {
        let f = Field::new(1).unwrap();
        let n = Ideal::from_int(f, 3).unwrap();
        let lv = level(1, n);
        let p = lv.principal_point0();
        assert!(p.is_valid(&n));
        let o = Ideal::unit(f);
        assert_eq!(p.l, Lattice::standard(f));
        assert_eq!(p.lp, Lattice::split(&o, &n.inverse()));
        let bad = ModPoint::gamma0(Lattice::standard(f), Lattice::standard(f).scale(&n.inverse()));
        assert!(!bad.is_valid(&n));
        assert!(lv.principal_point1().is_valid(&n));
    }

    #[test]
    fn standard_points_have_expected_classes() {
        let f = Field::new(5).unwrap();
        let n = primes_above(f, 3)[0].0;
        let lv = level(5, n);
        let cg = lv.class_group();
        for (i, pc) in lv.reps().p_class.iter().enumerate() {
            for (j, qc) in lv.reps().q_class.iter().enumerate() {
                let p = lv.standard_point0(i, j);
                assert!(p.is_valid(&n));
                assert_eq!(p.class(cg), cg.add(pc, &cg.times(qc, 2)));
                let u = lv.admissible_basis0(&p).unwrap();
                assert!(u.in_gamma0_twisted(&lv.reps().p[i], &n));
            }
        }
    }

    #[test]
    fn admissible_round_trip_nonprincipal() {
        let f = Field::new(5).unwrap();
        let n = primes_above(f, 3)[0].0;
        let lv = level(5, n);
        let g = Mat2::ints(f, [[(2, 1), (1, 0)], [(3, 0), (1, 1)]]);
        for i in 0..2 {
            let p = lv.standard_point1(i, 0).apply(&g).unwrap();
            let u = lv.admissible_basis0(&p).unwrap();
            assert_eq!(lv.standard_point0(i, 0).apply(&u).unwrap(), p.underlying());
            let u1 = lv.admissible_basis1(&p).unwrap();
            assert_eq!(lv.standard_point1(i, 0).apply(&u1).unwrap(), p);
        }
    }
}
