//! Rank-two O-lattices in `K^2`, stored canonically as a Z-lattice in
//! Hermite normal form over the coordinates `(x1, y1, x2, y2)`.

mod mat2;

pub use mat2::Mat2;

use std::fmt;

use num_integer::Integer;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::ideals::{square_splits, Ideal};
use crate::msym::P1;
use crate::qfield::{rat, Elt, Field, Rat};
use crate::zlinalg::hnf;

pub type Vec2 = [Elt; 2];

fn coords(v: &Vec2) -> [Rat; 4] {
    [v[0].x(), v[0].y(), v[1].x(), v[1].y()]
}

fn common_den(vs: &[[Rat; 4]]) -> i128 {
    vs.iter().flatten().fold(1i128, |acc, r| acc.lcm(r.denom()))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Lattice {
    field: Field,
    den: i128,
    h: [[i128; 4]; 4],
}

/// `L = b1 * u1 + b2 * u2` where `u1`, `u2` are the rows of `u`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PseudoBasis {
    pub b1: Ideal,
    pub b2: Ideal,
    pub u: Mat2,
}

impl PseudoBasis {
    pub fn lattice(&self) -> Result<Lattice> {
        Lattice::from_pseudo_basis(&self.b1, &self.b2, &self.u)
    }
}

impl Lattice {
    fn from_coords(field: Field, vs: &[[Rat; 4]]) -> Result<Lattice> {
        let den = common_den(vs);
        let rows: Vec<[i128; 4]> = vs
            .iter()
            .map(|v| {
                let mut r = [0i128; 4];
                for (x, y) in r.iter_mut().zip(v.iter()) {
                    *x = (*y * rat(den)).to_integer();
                }
                r
            })
            .collect();
        let hh = hnf(rows);
        if hh.len() != 4 {
            return Err(Error::Precondition("lattice is not of full rank".into()));
        }
        let mut h = [[0i128; 4]; 4];
        h.copy_from_slice(&hh);
        let g = h.iter().flatten().fold(den, |acc, x| acc.gcd(x));
        for x in h.iter_mut().flatten() {
            *x /= g;
        }
        Ok(Lattice { field, den: den / g, h })
    }

    /// Z-span of the given vectors together with their multiples by `w`.
    pub fn generated(field: Field, vs: &[Vec2]) -> Result<Lattice> {
        let w = field.omega();
        let all: Vec<[Rat; 4]> = vs.iter().flat_map(|v| [coords(v), coords(&[v[0] * w, v[1] * w])]).collect();
        Self::from_coords(field, &all)
    }

    pub fn from_pseudo_basis(b1: &Ideal, b2: &Ideal, u: &Mat2) -> Result<Lattice> {
        let f = b1.field();
        let mut vs = Vec::with_capacity(4);
        for (b, row) in [(b1, u.e[0]), (b2, u.e[1])] {
            for g in b.zbasis() {
                vs.push(coords(&[row[0] * g, row[1] * g]));
            }
        }
        Self::from_coords(f, &vs)
    }

    /// `b1 ⊕ b2` in the standard basis.
    pub fn split(b1: &Ideal, b2: &Ideal) -> Lattice {
        Self::from_pseudo_basis(b1, b2, &Mat2::identity(b1.field())).expect("full rank")
    }

    /// `O ⊕ O`.
    pub fn standard(f: Field) -> Lattice {
        let o = Ideal::unit(f);
        Self::split(&o, &o)
    }

    pub fn field(&self) -> Field {
        self.field
    }

    /// Z-basis as vectors in `K^2`.
    pub fn zbasis(&self) -> Vec<Vec2> {
        let d = Rat::new(1, self.den);
        self.h
            .iter()
            .map(|r| [self.field.elt(rat(r[0]) * d, rat(r[1]) * d), self.field.elt(rat(r[2]) * d, rat(r[3]) * d)])
            .collect()
    }

    fn basis_coords(&self) -> Vec<[Rat; 4]> {
        let d = Rat::new(1, self.den);
        self.h.iter().map(|r| [rat(r[0]) * d, rat(r[1]) * d, rat(r[2]) * d, rat(r[3]) * d]).collect()
    }

    fn reduce_coords(&self, v: [Rat; 4]) -> [Rat; 4] {
        let mut w = v.map(|x| x * rat(self.den));
        for i in 0..4 {
            let k = (w[i] / rat(self.h[i][i])).floor();
            if !k.is_zero() {
                for j in i..4 {
                    w[j] -= k * rat(self.h[i][j]);
                }
            }
        }
        w.map(|x| x / rat(self.den))
    }

    pub fn contains_vec(&self, v: &Vec2) -> bool {
        let mut w = coords(v).map(|x| x * rat(self.den));
        for i in 0..4 {
            let k = w[i] / rat(self.h[i][i]);
            if !k.is_integer() {
                return false;
            }
            for j in i..4 {
                w[j] -= k * rat(self.h[i][j]);
            }
        }
        true
    }

    /// `other ⊆ self`.
    pub fn contains(&self, other: &Lattice) -> bool {
        other.zbasis().iter().all(|v| self.contains_vec(v))
    }

    /// Canonical representative of `v` modulo the lattice.
    pub fn reduce(&self, v: &Vec2) -> Vec2 {
        let r = self.reduce_coords(coords(v));
        [self.field.elt(r[0], r[1]), self.field.elt(r[2], r[3])]
    }

    pub fn sum(&self, o: &Lattice) -> Lattice {
        let mut vs = self.basis_coords();
        vs.extend(o.basis_coords());
        Self::from_coords(self.field, &vs).expect("full rank")
    }

    pub fn add_vec(&self, v: &Vec2) -> Lattice {
        let w = self.field.omega();
        let mut vs = self.basis_coords();
        vs.push(coords(v));
        vs.push(coords(&[v[0] * w, v[1] * w]));
        Self::from_coords(self.field, &vs).expect("full rank")
    }

    pub fn scale(&self, a: &Ideal) -> Lattice {
        let gens = a.zbasis();
        let vs: Vec<[Rat; 4]> =
            self.zbasis().iter().flat_map(|v| gens.iter().map(move |g| coords(&[v[0] * *g, v[1] * *g]))).collect();
        Self::from_coords(self.field, &vs).expect("full rank")
    }

    pub fn scale_elt(&self, g: &Elt) -> Result<Lattice> {
        let vs: Vec<[Rat; 4]> = self.zbasis().iter().map(|v| coords(&[v[0] * *g, v[1] * *g])).collect();
        Self::from_coords(self.field, &vs)
    }

    /// `L * U` (row vectors times `U`).
    pub fn apply(&self, u: &Mat2) -> Result<Lattice> {
        let vs: Vec<[Rat; 4]> = self.zbasis().iter().map(|v| coords(&u.apply(*v))).collect();
        Self::from_coords(self.field, &vs)
    }

    /// Dual Z-lattice for the standard pairing on `Q^4`.
    fn dual_coords(&self) -> Vec<[Rat; 4]> {
        // basis B = H / den, dual basis rows = den * (H^-1)^T
        let mut inv = [[Rat::zero(); 4]; 4];
        for col in 0..4 {
            // solve H x = e_col (upper triangular)
            for i in (0..4).rev() {
                let mut s = if i == col { rat(1) } else { Rat::zero() };
                for j in i + 1..4 {
                    s -= rat(self.h[i][j]) * inv[j][col];
                }
                inv[i][col] = s / rat(self.h[i][i]);
            }
        }
        (0..4)
            .map(|i| {
                let mut r = [Rat::zero(); 4];
                for (j, x) in r.iter_mut().enumerate() {
                    *x = inv[j][i] * rat(self.den);
                }
                r
            })
            .collect()
    }

    pub fn intersect(&self, o: &Lattice) -> Lattice {
        let mut vs = self.dual_coords();
        vs.extend(o.dual_coords());
        let s = Self::from_coords(self.field, &vs).expect("full rank");
        Self::from_coords(self.field, &s.dual_coords()).expect("full rank")
    }

    /// First-coordinate ideal, the second-coordinate kernel ideal.
    fn projection_ideals(&self) -> (Ideal, Ideal) {
        let f = self.field;
        let zb = self.zbasis();
        let c1 = Ideal::generated(f, &[zb[0][0], zb[1][0]]).expect("full rank");
        let c2 = Ideal::generated(f, &[zb[2][1], zb[3][1]]).expect("full rank");
        (c1, c2)
    }

    /// Determinant ideal; its class is the Steinitz class.
    pub fn det_ideal(&self) -> Ideal {
        let (c1, c2) = self.projection_ideals();
        c1.mul(&c2)
    }

    /// `[self : sub]` for a sublattice.
    pub fn index_ideal(&self, sub: &Lattice) -> Ideal {
        sub.det_ideal().div(&self.det_ideal())
    }

    /// `L = c1 (1, s) ⊕ c2 (0, 1)`.
    pub fn pseudo_basis(&self) -> PseudoBasis {
        let f = self.field;
        let zb = self.zbasis();
        let (c1, c2) = self.projection_ideals();
        let (a0, a1) = (zb[0][0], zb[1][0]);
        let cinv = c1.inverse();
        let i0 = cinv.scale(&a0).expect("nonzero");
        let i1 = cinv.scale(&a1).expect("nonzero");
        let (u, v) = i0.unit_sum(&i1).expect("coprime by construction");
        let s = zb[0][1] * (u / a0) + zb[1][1] * (v / a1);
        PseudoBasis { b1: c1, b2: c2, u: Mat2::new(f.one(), s, f.zero(), f.one()) }
    }

    /// Coordinates of `v` with respect to the rows of `u`.
    fn coords_in(u: &Mat2, v: &Vec2) -> Vec2 {
        u.inverse().expect("invertible").apply(*v)
    }

    /// Elementary divisors `(a1, a2)` of `sub ⊆ self`, with `a1 | a2`.
    pub fn elementary_divisors(&self, sub: &Lattice) -> (Ideal, Ideal) {
        let f = self.field;
        let pb = self.pseudo_basis();
        let cs: Vec<Vec2> = sub.zbasis().iter().map(|v| Self::coords_in(&pb.u, v)).collect();
        let part = |k: usize, b: &Ideal| {
            let gens: Vec<Elt> = cs.iter().map(|c| c[k]).filter(|x| !x.is_zero()).collect();
            Ideal::generated(f, &gens).ok().map(|i| i.mul(&b.inverse()))
        };
        let a1 = match (part(0, &pb.b1), part(1, &pb.b2)) {
            (Some(x), Some(y)) => x.add(&y),
            (Some(x), None) | (None, Some(x)) => x,
            (None, None) => unreachable!("full rank sublattice"),
        };
        let a2 = self.index_ideal(sub).div(&a1);
        (a1, a2)
    }

    /// All sublattices `M ⊆ L` with `[L : M] = b`, canonical and sorted.
    pub fn sublattices(&self, b: &Ideal) -> Result<Vec<Lattice>> {
        if !b.is_integral() {
            return Err(Error::NotIntegral(b.to_string()));
        }
        let pb = self.pseudo_basis();
        let mut out = Vec::new();
        for (b1, b2) in square_splits(b) {
            let pick = |c: &Ideal| {
                let ci = c.inverse();
                c.search(|t| ci.scale(t).map(|i| i.is_coprime(&b1)).unwrap_or(false))
            };
            let t1 = pick(&pb.b1);
            let t2 = pick(&pb.b2);
            let e1 = [pb.u.a() * t1, pb.u.b() * t1];
            let e2 = [pb.u.c() * t2, pb.u.d() * t2];
            let base = self.scale(&b1);
            let p1 = P1::new(&b1)?;
            for s in p1.symbols() {
                let v = [e1[0] * s.c + e2[0] * s.d, e1[1] * s.c + e2[1] * s.d];
                out.push(base.add_vec(&v).scale(&b2));
            }
        }
        out.sort();
        out.dedup();
        Ok(out)
    }

    /// All superlattices `M ⊇ L` with `[M : L] = a`.
    pub fn superlattices(&self, a: &Ideal) -> Result<Vec<Lattice>> {
        let ainv = a.inverse();
        let mut out: Vec<Lattice> = self.sublattices(a)?.iter().map(|m| m.scale(&ainv)).collect();
        out.sort();
        Ok(out)
    }

    /// Canonical pseudo-basis rendering `{b1, b2, U}`.
    pub fn literal(&self) -> String {
        let pb = self.pseudo_basis();
        format!("{{{}, {}, {}}}", pb.b1, pb.b2, pb.u)
    }
}

impl fmt::Display for Lattice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.literal())
    }
}

/// Matrix with `(O ⊕ O) M = a ⊕ b`, first column generating `a` and
/// lower-left entry in `n`. Needs `a*b` principal.
pub fn ab_matrix(a: &Ideal, b: &Ideal, n: &Ideal) -> Result<Mat2> {
    let f = a.field();
    if a.is_unit_ideal() && b.is_unit_ideal() {
        return Ok(Mat2::identity(f));
    }
    let g = a.mul(b).require_generator()?;
    let an = a.mul(n);
    let ainv = a.inverse();
    let z = an.search(|_| true);
    let zi = ainv.scale(&z)?;
    let x = a.search(|x| ainv.scale(x).map(|i| i.is_coprime(&zi)).unwrap_or(false));
    let (e1, e2) = b.scale(&x)?.decompose(&b.scale(&z)?, &g)?;
    let w = e1 / x;
    let y = -(e2 / z);
    Ok(Mat2::new(x, y, z, w))
}

/// Checks the defining properties of an `(a, b)`-matrix of level `n`.
pub fn is_ab_matrix(m: &Mat2, a: &Ideal, b: &Ideal, n: &Ideal) -> bool {
    let f = a.field();
    let det = m.det();
    if det.is_zero() {
        return false;
    }
    let lat = Lattice::standard(f).apply(m);
    lat.map(|l| l == Lattice::split(a, b)).unwrap_or(false)
        && Ideal::generated(f, &[m.a(), m.c()]).map(|i| i == *a).unwrap_or(false)
        && n.contains(&m.c())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ideals::{primes_above, sublattice_count};

    #[test]
    fn pseudo_basis_round_trip() {
        let f = Field::new(5).unwrap();
        let p2 = primes_above(f, 2)[0].0;
        let p3 = primes_above(f, 3)[0].0;
        let u = Mat2::ints(f, [[(1, 2), (3, 0)], [(0, 1), (2, -1)]]);
        let l = Lattice::from_pseudo_basis(&p2, &p3, &u).unwrap();
        let pb = l.pseudo_basis();
        assert_eq!(pb.lattice().unwrap(), l);
        assert_eq!(l.det_ideal(), p2.mul(&p3).scale(&u.det()).unwrap());
    }

    #[test]
    fn intersection_and_sum() {
        let f = Field::new(1).unwrap();
        let o = Ideal::unit(f);
        let two = Ideal::from_int(f, 2).unwrap();
        let three = Ideal::from_int(f, 3).unwrap();
        let a = Lattice::split(&two, &o);
        let b = Lattice::split(&o, &three);
        assert_eq!(a.intersect(&b), Lattice::split(&two, &three));
        assert_eq!(a.sum(&b), Lattice::standard(f));
    }

    #[test]
    fn sublattice_counts() {
        let f = Field::new(2).unwrap();
        let l = Lattice::standard(f);
        for n in [2, 3, 4, 6] {
            let b = Ideal::from_int(f, n).unwrap();
            let subs = l.sublattices(&b).unwrap();
            assert_eq!(subs.len() as i128, sublattice_count(&b));
            for m in &subs {
                assert!(l.contains(m));
                assert_eq!(l.index_ideal(m), b);
            }
        }
    }

    #[test]
    fn ab_matrices() {
        let f = Field::new(5).unwrap();
        let p2 = primes_above(f, 2)[0].0;
        let p3 = primes_above(f, 3)[0].0;
        let n = Ideal::from_int(f, 7).unwrap();
        let m = ab_matrix(&p2, &p3, &n).unwrap();
        assert!(is_ab_matrix(&m, &p2, &p3, &n));
        let o = Ideal::unit(f);
        assert!(is_ab_matrix(&ab_matrix(&o, &o, &n).unwrap(), &o, &o, &n));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn size_reduction_keeps_lattice_and_coset(
                d in prop::sample::select(vec![1i64, 2, 5, 23]),
                e in prop::array::uniform8(-40i128..40),
            ) {
                let f = Field::new(d).unwrap();
                let m = Mat2::new(f.int(e[0], e[1]), f.int(e[2], e[3]), f.int(e[4], e[5]), f.int(e[6], e[7]));
                prop_assume!(!m.det().is_zero());
                let n = primes_above(f, 3)[0].0;
                let r = m.size_reduced(Some(&n));
                prop_assert_eq!(r.det(), m.det());
                let std = Lattice::standard(f);
                prop_assert_eq!(std.apply(&r).unwrap(), std.apply(&m).unwrap());
                let g = r * m.inverse().unwrap();
                prop_assert!(g.in_gamma1_twisted(&Ideal::unit(f), &n));
                let top = |x: &Mat2| x.a().norm() + x.b().norm();
                prop_assert!(top(&r.size_reduced(None)) <= top(&m));
            }
        }
    }
}
