//! Imaginary quadratic fields `Q(sqrt(-d))` and their elements.
//!
//! Elements are stored as `x + y*w` where `w` generates the ring of
//! integers: `w = sqrt(-d)` when `d` is 1 or 2 mod 4, `w = (1+sqrt(-d))/2`
//! when `d` is 3 mod 4. In both cases `w^2 = t*w - n` with `t = w + conj(w)`
//! and `n = w*conj(w)`.

use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::zlinalg::is_squarefree;

pub type Rat = Ratio<i128>;

pub fn rat(n: i128) -> Rat {
    Rat::from_integer(n)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Field {
    d: i64,
}

impl Field {
    pub fn new(d: i64) -> Result<Self> {
        if d <= 0 || !is_squarefree(i128::from(d)) {
            return Err(Error::InvalidField(d));
        }
        Ok(Field { d })
    }

    pub fn d(self) -> i64 {
        self.d
    }

    pub fn discriminant(self) -> i128 {
        let d = i128::from(self.d);
        if d % 4 == 3 {
            -d
        } else {
            -4 * d
        }
    }

    /// Trace of the integral generator.
    pub fn omega_trace(self) -> i128 {
        i128::from(self.d % 4 == 3)
    }

    /// Norm of the integral generator.
    pub fn omega_norm(self) -> i128 {
        let d = i128::from(self.d);
        if d % 4 == 3 {
            (1 + d) / 4
        } else {
            d
        }
    }

    pub fn elt(self, x: Rat, y: Rat) -> Elt {
        Elt { field: self, x, y }
    }

    pub fn int(self, x: i128, y: i128) -> Elt {
        self.elt(rat(x), rat(y))
    }

    pub fn from_int(self, x: i128) -> Elt {
        self.int(x, 0)
    }

    pub fn zero(self) -> Elt {
        self.int(0, 0)
    }

    pub fn one(self) -> Elt {
        self.int(1, 0)
    }

    pub fn omega(self) -> Elt {
        self.int(0, 1)
    }

    /// The unit group of the ring of integers.
    pub fn units(self) -> Vec<Elt> {
        match self.d {
            1 => vec![self.int(1, 0), self.int(0, 1), self.int(-1, 0), self.int(0, -1)],
            3 => {
                vec![self.int(1, 0), self.int(0, 1), self.int(-1, 1), self.int(-1, 0), self.int(0, -1), self.int(1, -1)]
            }
            _ => vec![self.int(1, 0), self.int(-1, 0)],
        }
    }
}

impl fmt::Display for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Q(sqrt(-{}))", self.d)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Elt {
    field: Field,
    x: Rat,
    y: Rat,
}

impl Elt {
    pub fn field(&self) -> Field {
        self.field
    }
    pub fn x(&self) -> Rat {
        self.x
    }
    pub fn y(&self) -> Rat {
        self.y
    }

    pub fn is_zero(&self) -> bool {
        self.x.is_zero() && self.y.is_zero()
    }

    pub fn is_integral(&self) -> bool {
        self.x.is_integer() && self.y.is_integer()
    }

    /// Integer coordinates, when the element is integral.
    pub fn int_coords(&self) -> Option<(i128, i128)> {
        self.is_integral().then(|| (self.x.to_integer(), self.y.to_integer()))
    }

    /// Least positive integer `m` with `m * self` integral.
    pub fn denominator(&self) -> i128 {
        self.x.denom().lcm(self.y.denom())
    }

    pub fn conj(&self) -> Elt {
        let t = rat(self.field.omega_trace());
        Elt { field: self.field, x: self.x + t * self.y, y: -self.y }
    }

    pub fn norm(&self) -> Rat {
        let t = rat(self.field.omega_trace());
        let n = rat(self.field.omega_norm());
        self.x * self.x + t * self.x * self.y + n * self.y * self.y
    }

    pub fn trace(&self) -> Rat {
        rat(2) * self.x + rat(self.field.omega_trace()) * self.y
    }

    pub fn inv(&self) -> Result<Elt> {
        if self.is_zero() {
            return Err(Error::Precondition("division by zero".into()));
        }
        let n = self.norm();
        let c = self.conj();
        Ok(Elt { field: self.field, x: c.x / n, y: c.y / n })
    }

    pub fn scale(&self, r: Rat) -> Elt {
        Elt { field: self.field, x: self.x * r, y: self.y * r }
    }

    pub fn is_unit(&self) -> bool {
        self.is_integral() && self.norm().is_one()
    }

    pub fn checked_div(&self, o: &Elt) -> Result<Elt> {
        Ok(*self * o.inv()?)
    }

    pub fn pow(&self, e: u32) -> Elt {
        let mut acc = self.field.one();
        for _ in 0..e {
            acc *= *self;
        }
        acc
    }
}

fn same(a: Field, b: Field) {
    assert_eq!(a, b, "{}", Error::FieldMismatch);
}

impl Add for Elt {
    type Output = Elt;
    fn add(self, o: Elt) -> Elt {
        same(self.field, o.field);
        Elt { field: self.field, x: self.x + o.x, y: self.y + o.y }
    }
}

impl Sub for Elt {
    type Output = Elt;
    fn sub(self, o: Elt) -> Elt {
        same(self.field, o.field);
        Elt { field: self.field, x: self.x - o.x, y: self.y - o.y }
    }
}

impl Neg for Elt {
    type Output = Elt;
    fn neg(self) -> Elt {
        Elt { field: self.field, x: -self.x, y: -self.y }
    }
}

impl Mul for Elt {
    type Output = Elt;
    fn mul(self, o: Elt) -> Elt {
        same(self.field, o.field);
        let t = rat(self.field.omega_trace());
        let n = rat(self.field.omega_norm());
        let yy = self.y * o.y;
        Elt { field: self.field, x: self.x * o.x - n * yy, y: self.x * o.y + o.x * self.y + t * yy }
    }
}

impl Div for Elt {
    type Output = Elt;
    fn div(self, o: Elt) -> Elt {
        self.checked_div(&o).expect("division by zero element")
    }
}

impl AddAssign for Elt {
    fn add_assign(&mut self, o: Elt) {
        *self = *self + o;
    }
}

impl SubAssign for Elt {
    fn sub_assign(&mut self, o: Elt) {
        *self = *self - o;
    }
}

impl MulAssign for Elt {
    fn mul_assign(&mut self, o: Elt) {
        *self = *self * o;
    }
}

impl Mul<i128> for Elt {
    type Output = Elt;
    fn mul(self, k: i128) -> Elt {
        self.scale(rat(k))
    }
}

fn fmt_rat(r: &Rat) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

impl fmt::Display for Elt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let yterm = |y: &Rat| -> String {
            if y.is_one() {
                "w".to_string()
            } else if *y == -Rat::one() {
                "-w".to_string()
            } else {
                format!("{}*w", fmt_rat(y))
            }
        };
        match (self.x.is_zero(), self.y.is_zero()) {
            (_, true) => write!(f, "{}", fmt_rat(&self.x)),
            (true, false) => write!(f, "{}", yterm(&self.y)),
            (false, false) => {
                if self.y.is_negative() {
                    write!(f, "{}-{}", fmt_rat(&self.x), yterm(&-self.y))
                } else {
                    write!(f, "{}+{}", fmt_rat(&self.x), yterm(&self.y))
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaussian_arithmetic() {
        let k = Field::new(1).unwrap();
        let i = k.omega();
        assert_eq!(i * i, k.from_int(-1));
        let a = k.int(1, 1);
        assert_eq!(a.norm(), rat(2));
        assert_eq!(a * a.inv().unwrap(), k.one());
    }

    #[test]
    fn eisenstein_generator() {
        let k = Field::new(3).unwrap();
        let w = k.omega();
        assert_eq!(w * w, w - k.one());
        assert_eq!(k.units().len(), 6);
        assert!(k.units().iter().all(|u| u.is_unit()));
    }

    #[test]
    fn rejects_bad_d() {
        assert!(Field::new(4).is_err());
        assert!(Field::new(0).is_err());
        assert!(Field::new(-3).is_err());
    }

    #[test]
    fn display() {
        let k = Field::new(5).unwrap();
        assert_eq!(k.int(1, -1).to_string(), "1-w");
        assert_eq!(k.elt(Rat::new(1, 2), rat(3)).to_string(), "1/2+3*w");
        assert_eq!(k.int(0, -1).to_string(), "-w");
    }
}
