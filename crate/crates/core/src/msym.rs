//! The projective line over `O/n` (M-symbols) and lifts of its points
//! to `SL(2, O)`.

use std::collections::HashMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::ideals::{crt, Ideal};
use crate::linmod::Mat2;
use crate::qfield::{Elt, Field};

/// A point `(c:d)` of the projective line mod some level, stored in its
/// canonical form: the lexicographically least pair among unit multiples,
/// both entries reduced into the standard residue box.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MSymbol {
    pub c: Elt,
    pub d: Elt,
}

impl fmt::Display for MSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.c, self.d)
    }
}

/// `<c, d> + n = O`.
pub fn is_unimodular(c: &Elt, d: &Elt, n: &Ideal) -> bool {
    let f = n.field();
    let gens: Vec<Elt> = [*c, *d].into_iter().filter(|e| !e.is_zero()).collect();
    if gens.is_empty() {
        return n.is_unit_ideal();
    }
    Ideal::generated(f, &gens).map(|i| i.is_coprime(n)).unwrap_or(false)
}

pub struct P1 {
    level: Ideal,
    units: Vec<Elt>,
    symbols: Vec<MSymbol>,
    index: HashMap<MSymbol, usize>,
}

impl P1 {
    pub fn new(level: &Ideal) -> Result<P1> {
        if !level.is_integral() {
            return Err(Error::NotIntegral(level.to_string()));
        }
        let f = level.field();
        let units: Vec<Elt> = level.residues().into_iter().filter(|r| is_unimodular(r, &f.zero(), level)).collect();
        let mut p1 = P1 { level: *level, units, symbols: Vec::new(), index: HashMap::new() };

        // local points at each prime power, glued by CRT
        let mut acc: Vec<(Elt, Elt)> = vec![(f.zero(), f.one())];
        let mut modulus = Ideal::unit(f);
        for (p, e) in level.factor() {
            let q = p.pow(e);
            let mut local: Vec<(Elt, Elt)> = q.residues().into_iter().map(|c| (c, f.one())).collect();
            local.extend(q.residues().into_iter().filter(|d| p.contains(d)).map(|d| (f.one(), d)));
            let (e0, e1) = modulus.unit_sum(&q)?;
            let glue = |x: &Elt, y: &Elt| *x * e1 + *y * e0;
            let mut next = Vec::with_capacity(acc.len() * local.len());
            for (c0, d0) in &acc {
                for (c1, d1) in &local {
                    next.push((glue(c0, c1), glue(d0, d1)));
                }
            }
            acc = next;
            modulus = modulus.mul(&q);
        }
        let mut syms: Vec<MSymbol> = acc.iter().map(|(c, d)| p1.normalize(c, d)).collect::<Result<_>>()?;
        syms.sort();
        syms.dedup();
        p1.index = syms.iter().enumerate().map(|(i, s)| (*s, i)).collect();
        p1.symbols = syms;
        Ok(p1)
    }

    pub fn level(&self) -> &Ideal {
        &self.level
    }

    pub fn field(&self) -> Field {
        self.level.field()
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn symbols(&self) -> &[MSymbol] {
        &self.symbols
    }

    /// Units of `O/n` in residue order.
    pub fn units(&self) -> &[Elt] {
        &self.units
    }

    pub fn normalize(&self, c: &Elt, d: &Elt) -> Result<MSymbol> {
        if !c.is_integral() || !d.is_integral() {
            return Err(Error::NotIntegral(format!("{c}:{d}")));
        }
        if !is_unimodular(c, d, &self.level) {
            return Err(Error::Precondition(format!(
                "({c}:{d}) is not a point of the projective line mod {}",
                self.level
            )));
        }
        let n = &self.level;
        let f = n.field();
        let (cx, cy) = c.int_coords().expect("integral");
        let (dx, dy) = d.int_coords().expect("integral");
        // integer products avoid rational normalisation in the unit scan
        let mul = |(a, b): (i128, i128), (x, y): (i128, i128)| {
            let bd = b * y;
            f.int(a * x - f.omega_norm() * bd, a * y + b * x + f.omega_trace() * bd)
        };
        Ok(self
            .units
            .iter()
            .map(|u| {
                let u = u.int_coords().expect("integral");
                MSymbol { c: n.reduce(&mul(u, (cx, cy))), d: n.reduce(&mul(u, (dx, dy))) }
            })
            .min()
            .expect("at least one unit"))
    }

    pub fn index_of(&self, s: &MSymbol) -> Option<usize> {
        self.index.get(s).copied()
    }

    /// Symbol of the bottom row of an integral matrix.
    pub fn symbol_of(&self, m: &Mat2) -> Result<MSymbol> {
        self.normalize(&m.c(), &m.d())
    }

    /// A matrix in `SL(2, O)` whose bottom row represents `s`.
    pub fn lift_to_sl2(&self, s: &MSymbol) -> Result<Mat2> {
        let f = self.field();
        if *s == self.normalize(&f.zero(), &f.one())? {
            return Ok(Mat2::identity(f));
        }
        lift_pair(&s.c, &s.d, &self.level)
    }

    /// A lift of `s` lying in `Gamma_0(m)`, for `m` coprime to the level:
    /// the symbol is glued with `(0:1)` mod `m` and lifted at level `n*m`.
    pub fn lift_to_gamma0(&self, s: &MSymbol, m: &Ideal) -> Result<Mat2> {
        let f = self.field();
        let n = &self.level;
        if !n.is_coprime(m) {
            return Err(Error::NotCoprime(n.to_string(), m.to_string()));
        }
        let c = crt(&s.c, n, &f.zero(), m)?;
        let d = crt(&s.d, n, &f.one(), m)?;
        lift_pair(&c, &d, &n.mul(m))
    }
}

/// Lift a unimodular pair mod `n` to `[[a, b], [c', d']]` of determinant
/// one with `c' ≡ c`, `d' ≡ d` mod `n`.
pub fn lift_pair(c: &Elt, d: &Elt, n: &Ideal) -> Result<Mat2> {
    let f = n.field();
    if !is_unimodular(c, d, n) {
        return Err(Error::Precondition(format!("({c}:{d}) is not unimodular mod {n}")));
    }
    let c1 = if n.contains(c) {
        if n.is_unit_ideal() {
            f.zero()
        } else {
            f.from_int(n.hnf().0)
        }
    } else {
        *c
    };
    if c1.is_zero() {
        // n = O and c ≡ 0: take (0, 1)
        let o = f.one();
        let z = f.zero();
        return Ok(Mat2::new(o, z, z, o));
    }
    let bad: Vec<Ideal> = Ideal::principal(c1)?.prime_divisors().into_iter().filter(|p| !p.divides(n)).collect();
    let d1 = if bad.is_empty() {
        *d
    } else {
        let r = bad.iter().fold(Ideal::unit(f), |acc, p| acc.mul(p));
        *d + crt(&f.zero(), n, &(f.one() - *d), &r)?
    };
    if d1.is_zero() {
        let b = -c1.inv()?;
        return Ok(Mat2::new(f.zero(), b, c1, d1));
    }
    let (e, g) = Ideal::principal(d1)?.unit_sum(&Ideal::principal(c1)?)?;
    Ok(Mat2::new(e / d1, -(g / c1), c1, d1).size_reduced(None))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ideals::psi;

    #[test]
    fn counts_match_psi() {
        let f = Field::new(1).unwrap();
        for n in [2, 3, 5, 6, 9] {
            let lvl = Ideal::from_int(f, n).unwrap();
            let p1 = P1::new(&lvl).unwrap();
            assert_eq!(p1.len() as i128, psi(&lvl), "n = {n}");
        }
        let lvl = Ideal::principal(f.int(1, 1)).unwrap();
        assert_eq!(P1::new(&lvl).unwrap().len(), 3);
    }

    #[test]
    fn lifts_have_det_one_and_right_symbol() {
        let f = Field::new(5).unwrap();
        let lvl = Ideal::from_int(f, 6).unwrap();
        let p1 = P1::new(&lvl).unwrap();
        let m = crate::ideals::primes_above(f, 7)[0].0;
        for s in p1.symbols() {
            let g = p1.lift_to_sl2(s).unwrap();
            assert!(g.is_integral());
            assert_eq!(g.det(), f.one());
            assert_eq!(p1.symbol_of(&g).unwrap(), *s);
            let h = p1.lift_to_gamma0(s, &m).unwrap();
            assert_eq!(h.det(), f.one());
            assert!(m.contains(&h.c()));
            assert_eq!(p1.symbol_of(&h).unwrap(), *s);
        }
    }
}
