//! Fractional ideals in Hermite normal form, factorisation, and the
//! element searches that the rest of the crate leans on.

mod class;

pub use class::{Class, ClassGroup, StandardReps};

use std::fmt;

use num_integer::Integer;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::qfield::{rat, Elt, Field, Rat};
use crate::zlinalg::{factor_int, floor_div, hnf, hnf_with_transform};

/// A nonzero fractional ideal `(1/den) * (Z*a + Z*(b + c*w))` with the
/// numerator lattice in Hermite normal form (`c | a`, `c | b`,
/// `0 <= b < a`) and `gcd(den, c) = 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Ideal {
    field: Field,
    den: i128,
    a: i128,
    b: i128,
    c: i128,
}

pub type FractionalIdeal = Ideal;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Splitting {
    Split,
    Inert,
    Ramified,
}

impl Ideal {
    /// Z-span of the given elements. The caller guarantees the span is an
    /// O-module of rank two.
    fn from_zspan(field: Field, gens: &[Elt]) -> Result<Ideal> {
        let den = gens.iter().fold(1i128, |acc, g| acc.lcm(&g.denominator()));
        let rows: Vec<[i128; 2]> = gens
            .iter()
            .map(|g| {
                let s = g.scale(rat(den));
                [s.y().to_integer(), s.x().to_integer()]
            })
            .collect();
        let h = hnf(rows);
        if h.len() < 2 {
            return Err(Error::ZeroIdeal);
        }
        Ok(Self::normalized(field, den, h[1][1], h[0][1], h[0][0]))
    }

    fn normalized(field: Field, den: i128, a: i128, b: i128, c: i128) -> Ideal {
        let g = den.gcd(&c);
        Ideal { field, den: den / g, a: a / g, b: b / g, c: c / g }
    }

    /// The O-module generated by `gens`.
    pub fn generated(field: Field, gens: &[Elt]) -> Result<Ideal> {
        let w = field.omega();
        let all: Vec<Elt> = gens.iter().flat_map(|g| [*g, *g * w]).collect();
        Self::from_zspan(field, &all)
    }

    pub fn principal(g: Elt) -> Result<Ideal> {
        Self::generated(g.field(), &[g])
    }

    pub fn unit(field: Field) -> Ideal {
        Ideal { field, den: 1, a: 1, b: 0, c: 1 }
    }

    pub fn from_int(field: Field, n: i128) -> Result<Ideal> {
        Self::principal(field.from_int(n))
    }

    /// Integral ideal from an HNF triple, validated.
    pub fn from_hnf(field: Field, a: i128, b: i128, c: i128) -> Result<Ideal> {
        let ok = a > 0 && c > 0 && a % c == 0 && b % c == 0 && (0..a).contains(&b);
        if !ok {
            return Err(Error::Parse(format!("[{a},{b},{c}] is not a Hermite normal form")));
        }
        let i = Self::generated(field, &[field.from_int(a), field.int(b, c)])?;
        if (i.a, i.b, i.c) != (a, b, c) {
            return Err(Error::Parse(format!("[{a},{b},{c}] is not an ideal")));
        }
        Ok(i)
    }

    pub fn field(&self) -> Field {
        self.field
    }
    pub fn hnf(&self) -> (i128, i128, i128) {
        (self.a, self.b, self.c)
    }
    pub fn denominator(&self) -> i128 {
        self.den
    }
    pub fn numerator(&self) -> Ideal {
        Ideal { den: 1, ..*self }
    }

    pub fn is_integral(&self) -> bool {
        self.den == 1
    }

    pub fn is_unit_ideal(&self) -> bool {
        *self == Ideal::unit(self.field)
    }

    pub fn zbasis(&self) -> [Elt; 2] {
        let d = Rat::new(1, self.den);
        [self.field.from_int(self.a).scale(d), self.field.int(self.b, self.c).scale(d)]
    }

    pub fn norm(&self) -> Rat {
        Rat::new(self.a * self.c, self.den * self.den)
    }

    /// Norm of an integral ideal as an integer.
    pub fn int_norm(&self) -> i128 {
        debug_assert!(self.is_integral());
        self.a * self.c
    }

    pub fn contains(&self, e: &Elt) -> bool {
        let x = e.x() * rat(self.den);
        let y = e.y() * rat(self.den);
        let k = y / rat(self.c);
        if !k.is_integer() {
            return false;
        }
        ((x - k * rat(self.b)) / rat(self.a)).is_integer()
    }

    /// `other` is a subset of `self`.
    pub fn contains_ideal(&self, other: &Ideal) -> bool {
        other.zbasis().iter().all(|e| self.contains(e))
    }

    /// `self` divides `other` (for fractional ideals: `other ⊆ self`).
    pub fn divides(&self, other: &Ideal) -> bool {
        self.contains_ideal(other)
    }

    pub fn mul(&self, o: &Ideal) -> Ideal {
        let [a0, a1] = self.zbasis();
        let [b0, b1] = o.zbasis();
        Self::from_zspan(self.field, &[a0 * b0, a0 * b1, a1 * b0, a1 * b1]).expect("product of nonzero ideals")
    }

    pub fn add(&self, o: &Ideal) -> Ideal {
        let [a0, a1] = self.zbasis();
        let [b0, b1] = o.zbasis();
        Self::from_zspan(self.field, &[a0, a1, b0, b1]).expect("sum of nonzero ideals")
    }

    pub fn conj(&self) -> Ideal {
        let [a0, a1] = self.zbasis();
        Self::from_zspan(self.field, &[a0.conj(), a1.conj()]).expect("nonzero")
    }

    pub fn scale(&self, e: &Elt) -> Result<Ideal> {
        if e.is_zero() {
            return Err(Error::ZeroIdeal);
        }
        let [a0, a1] = self.zbasis();
        Self::from_zspan(self.field, &[a0 * *e, a1 * *e])
    }

    pub fn scale_rat(&self, r: Rat) -> Ideal {
        self.scale(&self.field.elt(r, Rat::zero())).expect("nonzero scalar")
    }

    pub fn inverse(&self) -> Ideal {
        self.conj().scale_rat(self.norm().recip())
    }

    pub fn div(&self, o: &Ideal) -> Ideal {
        self.mul(&o.inverse())
    }

    pub fn intersect(&self, o: &Ideal) -> Ideal {
        self.mul(o).div(&self.add(o))
    }

    pub fn pow(&self, e: i64) -> Ideal {
        let base = if e < 0 { self.inverse() } else { *self };
        let mut acc = Ideal::unit(self.field);
        for _ in 0..e.unsigned_abs() {
            acc = acc.mul(&base);
        }
        acc
    }

    pub fn is_coprime(&self, o: &Ideal) -> bool {
        self.add(o).is_unit_ideal()
    }

    /// Sort key: norm first, then the HNF triple.
    pub fn order_key(&self) -> (Rat, i128, i128, i128, i128) {
        (self.norm(), self.den, self.a, self.b, self.c)
    }

    /// Residue representatives of `O/self` for an integral ideal.
    pub fn residues(&self) -> Vec<Elt> {
        assert!(self.is_integral(), "residues need an integral ideal");
        let mut out = Vec::with_capacity((self.a * self.c) as usize);
        for y in 0..self.c {
            for x in 0..self.a {
                out.push(self.field.int(x, y));
            }
        }
        out
    }

    /// Canonical representative of an integral element modulo this
    /// integral ideal, lying in the box used by [`Ideal::residues`].
    pub fn reduce(&self, e: &Elt) -> Elt {
        let (x, y) = e.int_coords().expect("reduce needs an integral element");
        let k = floor_div(y, self.c);
        let x = (x - k * self.b).rem_euclid(self.a);
        self.field.int(x, y - k * self.c)
    }

    /// Write `t = u + v` with `u ∈ self` and `v ∈ other`.
    pub fn decompose(&self, other: &Ideal, t: &Elt) -> Result<(Elt, Elt)> {
        let gens: Vec<Elt> = self.zbasis().into_iter().chain(other.zbasis()).collect();
        let den = gens.iter().chain(std::iter::once(t)).fold(1i128, |acc, g| acc.lcm(&g.denominator()));
        let rows: Vec<Vec<i128>> = gens
            .iter()
            .map(|g| {
                let s = g.scale(rat(den));
                vec![s.y().to_integer(), s.x().to_integer()]
            })
            .collect();
        let (h, u) = hnf_with_transform(&rows, 2);
        let ts = t.scale(rat(den));
        let (ty, tx) = (ts.y().to_integer(), ts.x().to_integer());
        let fail = || Error::Precondition(format!("{t} is not in {self} + {other}"));
        if h.len() < 2 || ty % h[0][0] != 0 {
            return Err(fail());
        }
        let l0 = ty / h[0][0];
        let rem = tx - l0 * h[0][1];
        if rem % h[1][1] != 0 {
            return Err(fail());
        }
        let l1 = rem / h[1][1];
        let coeff: Vec<i128> = (0..4).map(|k| l0 * u[0][k] + l1 * u[1][k]).collect();
        let part = |range: std::ops::Range<usize>| range.fold(self.field.zero(), |acc, k| acc + gens[k] * coeff[k]);
        Ok((part(0..2), part(2..4)))
    }

    /// For coprime integral ideals: `e ∈ self`, `f ∈ other`, `e + f = 1`.
    pub fn unit_sum(&self, other: &Ideal) -> Result<(Elt, Elt)> {
        self.decompose(other, &self.field.one()).map_err(|_| Error::NotCoprime(self.to_string(), other.to_string()))
    }

    /// All elements of norm at most `bound`, ordered by norm then
    /// coordinates.
    pub fn elements_up_to_norm(&self, bound: Rat) -> Vec<Elt> {
        let [e0, e1] = self.zbasis();
        let qa = e0.norm();
        let qb = (e0 * e1.conj()).trace();
        let qc = e1.norm();
        let f = |r: Rat| *r.numer() as f64 / *r.denom() as f64;
        let (fa, fb, fc, fx) = (f(qa), f(qb), f(qc), f(bound));
        let disc = 4.0 * fa * fc - fb * fb;
        let vmax = (4.0 * fa * fx / disc).sqrt().floor() as i128 + 1;
        let mut out = Vec::new();
        for v in -vmax..=vmax {
            let vf = v as f64;
            let dd = (fb * vf).powi(2) - 4.0 * fa * (fc * vf * vf - fx);
            if dd < -1e-6 {
                continue;
            }
            let s = dd.max(0.0).sqrt();
            let lo = ((-fb * vf - s) / (2.0 * fa)).floor() as i128 - 1;
            let hi = ((-fb * vf + s) / (2.0 * fa)).ceil() as i128 + 1;
            for u in lo..=hi {
                let e = e0 * u + e1 * v;
                if e.norm() <= bound {
                    out.push(e);
                }
            }
        }
        out.sort_by_key(|p| (p.norm(), p.x(), p.y()));
        out
    }

    /// Smallest nonzero element (by norm, then coordinates) satisfying `pred`.
    pub fn search<F: Fn(&Elt) -> bool>(&self, pred: F) -> Elt {
        let mut bound = self.norm() * rat(4);
        loop {
            if let Some(e) = self.elements_up_to_norm(bound).into_iter().find(|e| !e.is_zero() && pred(e)) {
                return e;
            }
            bound *= rat(4);
        }
    }

    /// A generator, if the ideal is principal. Among associates the
    /// lexicographically largest `(x, y)` is returned.
    pub fn generator(&self) -> Option<Elt> {
        let n = self.norm();
        self.elements_up_to_norm(n)
            .into_iter()
            .filter(|e| e.norm() == n)
            .max_by(|p, q| (p.x(), p.y()).cmp(&(q.x(), q.y())))
    }

    pub fn require_generator(&self) -> Result<Elt> {
        self.generator().ok_or_else(|| Error::NotPrincipal(self.to_string()))
    }

    /// Prime factorisation with signed exponents, primes in `order_key`
    /// order.
    pub fn factor(&self) -> Vec<(Ideal, i64)> {
        let mut out: Vec<(Ideal, i64)> = Vec::new();
        let num = self.numerator();
        let den = Ideal::from_int(self.field, self.den).expect("nonzero");
        let mut ps: Vec<i128> =
            factor_int(num.int_norm()).into_iter().chain(factor_int(self.den)).map(|(p, _)| p).collect();
        ps.sort();
        ps.dedup();
        for p in ps {
            for (pr, _) in primes_above(self.field, p) {
                let v = num.valuation(&pr) - den.valuation(&pr);
                if v != 0 {
                    out.push((pr, v));
                }
            }
        }
        out.sort_by_key(|(p, _)| p.order_key());
        out
    }

    /// Valuation at a prime for an integral ideal.
    pub fn valuation(&self, p: &Ideal) -> i64 {
        let mut v = 0;
        let mut j = *self;
        let pinv = p.inverse();
        while p.contains_ideal(&j) {
            j = j.mul(&pinv);
            v += 1;
        }
        v
    }

    pub fn prime_divisors(&self) -> Vec<Ideal> {
        self.factor().into_iter().map(|(p, _)| p).collect()
    }

    pub fn is_prime(&self) -> bool {
        self.is_integral() && matches!(self.factor().as_slice(), [(_, 1)])
    }
}

impl fmt::Display for Ideal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{},{},{}]", self.a, self.b, self.c)?;
        if self.den != 1 {
            write!(f, "/{}", self.den)?;
        }
        Ok(())
    }
}

fn field_poly_roots(field: Field, p: i128) -> Vec<i128> {
    let t = field.omega_trace();
    let n = field.omega_norm();
    (0..p).filter(|r| (r * r - t * r + n).rem_euclid(p) == 0).collect()
}

/// Primes above a rational prime with their residue degree.
pub fn primes_above(field: Field, p: i128) -> Vec<(Ideal, u32)> {
    let roots = field_poly_roots(field, p);
    let mk = |r: i128| Ideal::generated(field, &[field.from_int(p), field.int(-r, 1)]).unwrap();
    let mut out: Vec<(Ideal, u32)> = match roots.as_slice() {
        [] => vec![(Ideal::from_int(field, p).unwrap(), 2)],
        [r] => vec![(mk(*r), 1)],
        rs => {
            let mut v: Vec<(Ideal, u32)> = rs.iter().map(|&r| (mk(r), 1)).collect();
            v.dedup();
            v
        }
    };
    out.sort_by_key(|(i, _)| i.order_key());
    out
}

pub fn splitting(field: Field, p: i128) -> Splitting {
    let ps = primes_above(field, p);
    match (ps.len(), ps[0].1) {
        (2, _) => Splitting::Split,
        (1, 2) => Splitting::Inert,
        _ => Splitting::Ramified,
    }
}

/// Every integral ideal of norm `n`, in `order_key` order.
pub fn ideals_of_norm(field: Field, n: i128) -> Vec<Ideal> {
    let mut acc = vec![Ideal::unit(field)];
    for (p, e) in factor_int(n) {
        let ps = primes_above(field, p);
        let local: Vec<Ideal> = match ps.as_slice() {
            [(q, 2)] => {
                if e % 2 == 0 {
                    vec![q.pow(i64::from(e / 2))]
                } else {
                    vec![]
                }
            }
            [(q, 1)] => {
                if splitting(field, p) == Splitting::Ramified {
                    vec![q.pow(i64::from(e))]
                } else {
                    vec![]
                }
            }
            [(q1, _), (q2, _)] => (0..=e).map(|i| q1.pow(i64::from(i)).mul(&q2.pow(i64::from(e - i)))).collect(),
            _ => unreachable!(),
        };
        acc = acc.iter().flat_map(|x| local.iter().map(move |y| x.mul(y))).collect();
    }
    if n < 1 {
        acc.clear();
    }
    acc.sort_by_key(|i| i.order_key());
    acc
}

pub fn ideals_up_to_norm(field: Field, bound: i128) -> Vec<Ideal> {
    (1..=bound).flat_map(|n| ideals_of_norm(field, n)).collect()
}

/// Prime ideals of norm at most `bound`, in `order_key` order.
pub fn primes_up_to_norm(field: Field, bound: i128) -> Vec<Ideal> {
    let mut out: Vec<Ideal> = crate::zlinalg::primes_up_to(bound)
        .into_iter()
        .flat_map(|p| primes_above(field, p))
        .map(|(i, _)| i)
        .filter(|i| i.int_norm() <= bound)
        .collect();
    out.sort_by_key(|i| i.order_key());
    out
}

/// Chinese remainder: `z ≡ x mod a`, `z ≡ y mod b` for coprime integral
/// ideals.
pub fn crt(x: &Elt, a: &Ideal, y: &Elt, b: &Ideal) -> Result<Elt> {
    let (e, f) = a.unit_sum(b)?;
    Ok(*x * f + *y * e)
}

/// Euler totient of an integral ideal via its factorisation.
pub fn phi(n: &Ideal) -> i128 {
    n.factor().iter().fold(1, |acc, (p, e)| {
        let q = p.int_norm();
        acc * (q - 1) * q.pow((*e - 1) as u32)
    })
}

/// Dedekind psi: the number of points on the projective line mod `n`.
pub fn psi(n: &Ideal) -> i128 {
    n.factor().iter().fold(1, |acc, (p, e)| {
        let q = p.int_norm();
        acc * (q + 1) * q.pow((*e - 1) as u32)
    })
}

/// Number of O-sublattices of index `b` in a rank-two lattice.
pub fn sublattice_count(b: &Ideal) -> i128 {
    b.factor().iter().fold(1, |acc, (p, e)| {
        let q = p.int_norm();
        acc * (0..=*e as u32).map(|k| q.pow(k)).sum::<i128>()
    })
}

/// Integral divisors of an integral ideal, in `order_key` order.
pub fn divisors(n: &Ideal) -> Vec<Ideal> {
    let mut acc = vec![Ideal::unit(n.field())];
    for (p, e) in n.factor() {
        acc = acc.iter().flat_map(|x| (0..=e).map(move |k| x.mul(&p.pow(k)))).collect();
    }
    acc.sort_by_key(|i| i.order_key());
    acc
}

/// Pairs `(b1, b2)` with `b1 * b2^2 = b`.
pub fn square_splits(b: &Ideal) -> Vec<(Ideal, Ideal)> {
    let f = b.field();
    let mut acc = vec![(Ideal::unit(f), Ideal::unit(f))];
    for (p, e) in b.factor() {
        acc = acc
            .iter()
            .flat_map(|(x1, x2)| (0..=e / 2).map(move |k| (x1.mul(&p.pow(e - 2 * k)), x2.mul(&p.pow(k)))))
            .collect();
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    fn k(d: i64) -> Field {
        Field::new(d).unwrap()
    }

    #[test]
    fn hnf_of_principal() {
        let f = k(1);
        let i = Ideal::principal(f.int(1, 1)).unwrap();
        assert_eq!(i.hnf(), (2, 1, 1));
        assert_eq!(i.norm(), rat(2));
        assert!(i.contains(&f.int(2, 0)));
        assert!(!i.contains(&f.one()));
    }

    #[test]
    fn inverse_and_division() {
        let f = k(5);
        let p2 = primes_above(f, 2)[0].0;
        assert_eq!(p2.mul(&p2.inverse()), Ideal::unit(f));
        assert_eq!(p2.mul(&p2), Ideal::from_int(f, 2).unwrap());
        assert!(p2.generator().is_none());
    }

    #[test]
    fn factor_round_trip() {
        let f = k(5);
        let n = Ideal::from_int(f, 30).unwrap();
        let prod = n.factor().iter().fold(Ideal::unit(f), |acc, (p, e)| acc.mul(&p.pow(*e)));
        assert_eq!(prod, n);
    }

    #[test]
    fn unit_sum_works() {
        let f = k(23);
        let a = primes_above(f, 2)[0].0;
        let b = primes_above(f, 3)[0].0;
        let (e, g) = a.unit_sum(&b).unwrap();
        assert!(a.contains(&e) && b.contains(&g));
        assert_eq!(e + g, f.one());
    }

    #[test]
    fn residue_count() {
        let f = k(2);
        let n = Ideal::from_int(f, 6).unwrap();
        assert_eq!(n.residues().len() as i128, n.int_norm());
        let r = n.reduce(&f.int(17, -5));
        assert!(n.contains(&(r - f.int(17, -5))));
    }

    #[test]
    fn norm_counts() {
        let f = k(1);
        assert_eq!(ideals_of_norm(f, 5).len(), 2);
        assert_eq!(ideals_of_norm(f, 3).len(), 0);
        assert_eq!(ideals_of_norm(f, 9).len(), 1);
        assert_eq!(ideals_of_norm(f, 2).len(), 1);
    }
}
