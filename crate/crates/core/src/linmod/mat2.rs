use std::fmt;
use std::ops::Mul;

use crate::error::{Error, Result};
use crate::ideals::Ideal;
use num_traits::Zero;

use crate::qfield::{Elt, Field, Rat};

/// A 2x2 matrix over the field, acting on row vectors from the right.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Mat2 {
    pub e: [[Elt; 2]; 2],
}

impl Mat2 {
    pub fn new(a: Elt, b: Elt, c: Elt, d: Elt) -> Mat2 {
        Mat2 { e: [[a, b], [c, d]] }
    }

    pub fn identity(f: Field) -> Mat2 {
        Mat2::new(f.one(), f.zero(), f.zero(), f.one())
    }

    pub fn diag(a: Elt, d: Elt) -> Mat2 {
        let z = a.field().zero();
        Mat2::new(a, z, z, d)
    }

    pub fn ints(f: Field, m: [[(i128, i128); 2]; 2]) -> Mat2 {
        let g = |p: (i128, i128)| f.int(p.0, p.1);
        Mat2::new(g(m[0][0]), g(m[0][1]), g(m[1][0]), g(m[1][1]))
    }

    pub fn field(&self) -> Field {
        self.e[0][0].field()
    }

    pub fn a(&self) -> Elt {
        self.e[0][0]
    }
    pub fn b(&self) -> Elt {
        self.e[0][1]
    }
    pub fn c(&self) -> Elt {
        self.e[1][0]
    }
    pub fn d(&self) -> Elt {
        self.e[1][1]
    }

    pub fn det(&self) -> Elt {
        self.a() * self.d() - self.b() * self.c()
    }

    pub fn inverse(&self) -> Result<Mat2> {
        let det = self.det();
        if det.is_zero() {
            return Err(Error::Precondition("singular matrix".into()));
        }
        let inv = det.inv()?;
        Ok(Mat2::new(self.d() * inv, -self.b() * inv, -self.c() * inv, self.a() * inv))
    }

    pub fn scale(&self, s: Elt) -> Mat2 {
        Mat2::new(self.a() * s, self.b() * s, self.c() * s, self.d() * s)
    }

    pub fn is_integral(&self) -> bool {
        self.e.iter().flatten().all(|x| x.is_integral())
    }

    /// Row vector times matrix.
    pub fn apply(&self, v: [Elt; 2]) -> [Elt; 2] {
        [v[0] * self.a() + v[1] * self.c(), v[0] * self.b() + v[1] * self.d()]
    }

    /// Integral with unit determinant and lower-left entry in `n`.
    pub fn in_gamma0(&self, n: &Ideal) -> bool {
        self.is_integral() && self.det().is_unit() && n.contains(&self.c())
    }

    /// Entries in `[[O, p^-1], [n p, O]]` with unit determinant.
    pub fn in_gamma0_twisted(&self, p: &Ideal, n: &Ideal) -> bool {
        let o = Ideal::unit(self.field());
        o.contains(&self.a())
            && o.contains(&self.d())
            && p.inverse().contains(&self.b())
            && n.mul(p).contains(&self.c())
            && self.det().is_unit()
    }

    pub fn in_gamma1_twisted(&self, p: &Ideal, n: &Ideal) -> bool {
        self.in_gamma0_twisted(p, n) && n.contains(&(self.d() - self.field().one()))
    }
}

/// Nearest element of the Z-lattice spanned by `basis`, coordinatewise.
fn round_into(x: &Elt, basis: [Elt; 2]) -> Elt {
    let [e0, e1] = basis;
    let det = e0.x() * e1.y() - e0.y() * e1.x();
    let s = ((x.x() * e1.y() - x.y() * e1.x()) / det).round();
    let t = ((e0.x() * x.y() - e0.y() * x.x()) / det).round();
    e0.scale(s) + e1.scale(t)
}

fn row_size(r: &[Elt; 2]) -> Rat {
    r[0].norm() + r[1].norm()
}

/// `r - x s` with `x` in the span of `basis`, if that is shorter than `r`.
fn reduce_row(r: &[Elt; 2], s: &[Elt; 2], basis: [Elt; 2]) -> Option<[Elt; 2]> {
    let ss = row_size(s);
    if ss.is_zero() {
        return None;
    }
    let dot = r[0] * s[0].conj() + r[1] * s[1].conj();
    let x = round_into(&dot.scale(ss.recip()), basis);
    let cand = [r[0] - x * s[0], r[1] - x * s[1]];
    (!x.is_zero() && row_size(&cand) < row_size(r)).then_some(cand)
}

impl Mat2 {
    /// Shorten the rows by left multiplication with `[[1,x],[0,1]]`,
    /// `x ∈ O`, and, when `lower` is given, `[[1,0],[y,1]]` with
    /// `y ∈ lower`.
    pub fn size_reduced(&self, lower: Option<&Ideal>) -> Mat2 {
        let f = self.field();
        let (mut top, mut bot) = (self.e[0], self.e[1]);
        // every accepted step strictly shrinks a row, so this terminates
        loop {
            let mut moved = false;
            if let Some(r) = reduce_row(&top, &bot, [f.one(), f.omega()]) {
                top = r;
                moved = true;
            }
            if let Some(r) = lower.and_then(|l| reduce_row(&bot, &top, l.zbasis())) {
                bot = r;
                moved = true;
            }
            if !moved {
                return Mat2 { e: [top, bot] };
            }
        }
    }
}

impl Mul for Mat2 {
    type Output = Mat2;
    fn mul(self, o: Mat2) -> Mat2 {
        let r0 = o.apply(self.e[0]);
        let r1 = o.apply(self.e[1]);
        Mat2 { e: [r0, r1] }
    }
}

impl fmt::Display for Mat2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[[{},{}],[{},{}]]", self.a(), self.b(), self.c(), self.d())
    }
}
