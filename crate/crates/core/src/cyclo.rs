//! Exact arithmetic in cyclotomic fields `Q(zeta_m)` with rational
//! coefficients on the power basis modulo the cyclotomic polynomial.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_integer::Integer;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::qfield::{rat, Rat};

fn poly_divexact(num: &[i128], den: &[i128]) -> Vec<i128> {
    let mut r = num.to_vec();
    let dl = den.len();
    let mut q = vec![0i128; r.len() + 1 - dl];
    for i in (0..q.len()).rev() {
        let c = r[i + dl - 1] / den[dl - 1];
        q[i] = c;
        for j in 0..dl {
            r[i + j] -= c * den[j];
        }
    }
    q
}

/// Coefficients of the m-th cyclotomic polynomial, constant term first.
pub fn cyclotomic_poly(m: u32) -> Vec<i128> {
    let mut p = vec![0i128; m as usize + 1];
    p[0] = -1;
    p[m as usize] = 1;
    for d in 1..m {
        if m.is_multiple_of(d) {
            p = poly_divexact(&p, &cyclotomic_poly(d));
        }
    }
    p
}

pub fn euler_phi(m: u32) -> usize {
    (1..=m).filter(|k| k.gcd(&m) == 1).count()
}

#[derive(Clone, Debug)]
pub struct CycValue {
    m: u32,
    c: Vec<Rat>,
}

fn reduce(mut v: Vec<Rat>, m: u32) -> Vec<Rat> {
    let phi = cyclotomic_poly(m);
    let deg = phi.len() - 1;
    while v.len() > deg {
        let top = v.pop().unwrap();
        if top.is_zero() {
            continue;
        }
        let shift = v.len() - deg;
        for (j, pj) in phi.iter().take(deg).enumerate() {
            v[shift + j] -= top * rat(*pj);
        }
    }
    v.resize(deg, Rat::zero());
    v
}

impl CycValue {
    pub fn from_coeffs(m: u32, c: Vec<Rat>) -> Result<CycValue> {
        if m == 0 {
            return Err(Error::Precondition("conductor must be positive".into()));
        }
        Ok(CycValue { m, c: reduce(c, m) })
    }

    pub fn from_rat(m: u32, r: Rat) -> CycValue {
        CycValue { m, c: reduce(vec![r], m) }
    }

    pub fn zero(m: u32) -> CycValue {
        Self::from_rat(m, Rat::zero())
    }

    pub fn one(m: u32) -> CycValue {
        Self::from_rat(m, Rat::one())
    }

    /// `zeta_m^k`.
    pub fn zeta_pow(m: u32, k: i64) -> CycValue {
        let e = k.rem_euclid(i64::from(m)) as usize;
        let mut v = vec![Rat::zero(); e + 1];
        v[e] = Rat::one();
        CycValue { m, c: reduce(v, m) }
    }

    pub fn conductor(&self) -> u32 {
        self.m
    }

    pub fn coeffs(&self) -> &[Rat] {
        &self.c
    }

    pub fn is_zero(&self) -> bool {
        self.c.iter().all(|x| x.is_zero())
    }

    pub fn as_rational(&self) -> Option<Rat> {
        self.c[1..].iter().all(|x| x.is_zero()).then(|| self.c[0])
    }

    /// Same value in `Q(zeta_big)`, `m | big`.
    pub fn lift(&self, big: u32) -> CycValue {
        assert_eq!(big % self.m, 0, "conductor {} does not divide {}", self.m, big);
        let step = (big / self.m) as usize;
        let mut v = vec![Rat::zero(); step * self.c.len().max(1)];
        for (i, x) in self.c.iter().enumerate() {
            v[i * step] = *x;
        }
        CycValue { m: big, c: reduce(v, big) }
    }

    fn aligned(&self, o: &CycValue) -> (CycValue, CycValue) {
        let m = self.m.lcm(&o.m);
        (self.lift(m), o.lift(m))
    }

    pub fn scale(&self, r: Rat) -> CycValue {
        CycValue { m: self.m, c: self.c.iter().map(|x| *x * r).collect() }
    }

    pub fn pow(&self, e: u32) -> CycValue {
        let mut acc = CycValue::one(self.m);
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    pub fn inv(&self) -> Result<CycValue> {
        if self.is_zero() {
            return Err(Error::Precondition("inverse of zero".into()));
        }
        // columns: self * zeta^j ; solve for x with (sum x_j col_j) = 1
        let n = self.c.len();
        let cols: Vec<Vec<Rat>> = (0..n).map(|j| (self * &CycValue::zeta_pow(self.m, j as i64)).c).collect();
        let mut a: Vec<Vec<Rat>> = (0..n)
            .map(|i| {
                let mut row: Vec<Rat> = (0..n).map(|j| cols[j][i]).collect();
                row.push(if i == 0 { Rat::one() } else { Rat::zero() });
                row
            })
            .collect();
        for col in 0..n {
            let piv = (col..n).find(|&r| !a[r][col].is_zero()).expect("field element invertible");
            a.swap(col, piv);
            let p = a[col][col];
            for x in a[col].iter_mut() {
                *x /= p;
            }
            for r in 0..n {
                if r != col && !a[r][col].is_zero() {
                    let f = a[r][col];
                    let src = a[col].clone();
                    for (x, y) in a[r].iter_mut().zip(src.iter()) {
                        *x -= f * y;
                    }
                }
            }
        }
        Ok(CycValue { m: self.m, c: a.iter().map(|r| r[n]).collect() })
    }

    pub fn div(&self, o: &CycValue) -> Result<CycValue> {
        Ok(self * &o.inv()?)
    }
}

impl PartialEq for CycValue {
    fn eq(&self, o: &CycValue) -> bool {
        let (a, b) = self.aligned(o);
        a.c == b.c
    }
}

impl Eq for CycValue {}

impl<'a> Add<&'a CycValue> for &'a CycValue {
    type Output = CycValue;
    fn add(self, o: &CycValue) -> CycValue {
        let (a, b) = self.aligned(o);
        CycValue { m: a.m, c: a.c.iter().zip(&b.c).map(|(x, y)| *x + *y).collect() }
    }
}

impl<'a> Sub<&'a CycValue> for &'a CycValue {
    type Output = CycValue;
    fn sub(self, o: &CycValue) -> CycValue {
        self + &(-o)
    }
}

impl Neg for &CycValue {
    type Output = CycValue;
    fn neg(self) -> CycValue {
        self.scale(-Rat::one())
    }
}

impl<'a> Mul<&'a CycValue> for &'a CycValue {
    type Output = CycValue;
    fn mul(self, o: &CycValue) -> CycValue {
        let (a, b) = self.aligned(o);
        let mut v = vec![Rat::zero(); a.c.len() + b.c.len()];
        for (i, x) in a.c.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, y) in b.c.iter().enumerate() {
                v[i + j] += *x * *y;
            }
        }
        CycValue { m: a.m, c: reduce(v, a.m) }
    }
}

impl fmt::Display for CycValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.c.iter().map(|x| x.to_string()).collect();
        write!(f, "[{}]@{}", parts.join(","), self.m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polys() {
        assert_eq!(cyclotomic_poly(1), vec![-1, 1]);
        assert_eq!(cyclotomic_poly(4), vec![1, 0, 1]);
        assert_eq!(cyclotomic_poly(6), vec![1, -1, 1]);
        assert_eq!(cyclotomic_poly(12), vec![1, 0, -1, 0, 1]);
    }

    #[test]
    fn roots_of_unity() {
        let z = CycValue::zeta_pow(6, 1);
        assert_eq!(z.pow(6), CycValue::one(6));
        assert_eq!(z.pow(3), CycValue::from_rat(1, -Rat::one()));
        let i = CycValue::zeta_pow(4, 1);
        assert_eq!(&i * &i, CycValue::from_rat(2, -Rat::one()));
    }

    #[test]
    fn inverse() {
        let z = CycValue::zeta_pow(5, 2);
        let v = &CycValue::from_rat(5, rat(3)) + &z;
        assert_eq!(&v * &v.inv().unwrap(), CycValue::one(5));
    }
}
