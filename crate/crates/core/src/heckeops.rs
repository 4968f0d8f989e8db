//! Formal Hecke operators acting on formal sums of modular points.

use std::fmt;

use num_traits::One;

use crate::error::{Error, Result};
use crate::ideals::{Class, ClassGroup, Ideal};
use crate::linmod::{Lattice, Vec2};
use crate::modpts::{diamond, FormalSum, ModPoint};
use crate::qfield::{Elt, Rat};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Op {
    Ta(Ideal),
    Taa(Ideal),
    Diamond(Elt),
    Wq(Ideal),
    /// Level change to `m` by `d`.
    Ad {
        m: Ideal,
        d: Ideal,
    },
    TaDual(Ideal),
    TaaDual(Ideal),
    WqDual(Ideal),
    /// Product, applied right to left.
    Comp(Vec<Op>),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Normalization {
    #[default]
    Scaled,
    Unscaled,
}

impl fmt::Display for Op {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Op::Ta(a) => write!(f, "Ta({a})"),
            Op::Taa(a) => write!(f, "Taa({a})"),
            Op::Diamond(x) => write!(f, "D({x})"),
            Op::Wq(q) => write!(f, "Wq({q})"),
            Op::Ad { m, d } => write!(f, "Ad({m},{d})"),
            Op::TaDual(a) => write!(f, "dual:Ta({a})"),
            Op::TaaDual(a) => write!(f, "dual:Taa({a})"),
            Op::WqDual(q) => write!(f, "dual:Wq({q})"),
            Op::Comp(ops) => {
                let parts: Vec<String> = ops.iter().map(|o| o.to_string()).collect();
                write!(f, "Comp[{}]", parts.join(","))
            }
        }
    }
}

pub fn is_exact_divisor(q: &Ideal, n: &Ideal) -> bool {
    q.is_integral() && q.divides(n) && q.is_coprime(&n.div(q))
}

impl Op {
    pub fn compose(ops: Vec<Op>) -> Op {
        Op::Comp(ops)
    }

    /// Class by which the operator shifts the Steinitz class of a point.
    pub fn class(&self, cg: &ClassGroup) -> Class {
        match self {
            Op::Ta(a) => cg.neg(&cg.class_of(a)),
            Op::Taa(a) => cg.times(&cg.class_of(a), -2),
            Op::Diamond(_) => cg.identity(),
            Op::Wq(q) => cg.neg(&cg.class_of(q)),
            Op::Ad { d, .. } => cg.class_of(d),
            Op::TaDual(a) => cg.class_of(a),
            Op::TaaDual(a) => cg.times(&cg.class_of(a), 2),
            Op::WqDual(q) => cg.class_of(q),
            Op::Comp(ops) => ops.iter().fold(cg.identity(), |acc, o| cg.add(&acc, &o.class(cg))),
        }
    }

    pub fn is_principal(&self, cg: &ClassGroup) -> bool {
        self.class(cg) == cg.identity()
    }

    /// Level of the output given the input level.
    pub fn target_level(&self, n: &Ideal) -> Ideal {
        match self {
            Op::Ad { m, .. } => *m,
            Op::Comp(ops) => ops.iter().rev().fold(*n, |acc, o| o.target_level(&acc)),
            _ => *n,
        }
    }

    /// Reject descriptors that make no sense at level `n`.
    pub fn check(&self, n: &Ideal, gamma1: bool) -> Result<()> {
        let bad = |s: &str| Err(Error::InvalidOperator(format!("{self}: {s}")));
        match self {
            Op::Ta(a) | Op::TaDual(a) if !a.is_integral() => bad("ideal must be integral"),
            Op::TaDual(a) if !a.is_coprime(n) => bad("ideal must be coprime to the level"),
            Op::Taa(a) | Op::TaaDual(a) if gamma1 && !coprime_fractional(a, n) => {
                bad("ideal must be coprime to the level on Gamma_1 points")
            }
            Op::Diamond(x) if x.is_zero() || !coprime_fractional(&Ideal::principal(*x)?, n) => {
                bad("element must be coprime to the level")
            }
            Op::Wq(q) | Op::WqDual(q) if !is_exact_divisor(q, n) => bad("not an exact divisor of the level"),
            Op::Wq(_) | Op::WqDual(_) if gamma1 => bad("Atkin-Lehner operators act on Gamma_0 points"),
            Op::Ad { m, d } => {
                if !m.is_integral() || !d.is_integral() || !m.divides(n) || !d.divides(&n.div(m)) {
                    bad("need m | n and d | n/m")
                } else if gamma1 {
                    bad("level change acts on Gamma_0 points")
                } else {
                    Ok(())
                }
            }
            Op::Comp(ops) => {
                let mut lv = *n;
                for o in ops.iter().rev() {
                    o.check(&lv, gamma1)?;
                    lv = o.target_level(&lv);
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// Scalar in front of the lattice part of the definition.
    fn factor(&self) -> Rat {
        let n = |a: &Ideal| a.norm();
        match self {
            Op::Ta(a) => Rat::one() / n(a),
            Op::Taa(a) => Rat::one() / (n(a) * n(a)),
            Op::Wq(q) => Rat::one() / n(q),
            Op::Ad { d, .. } => n(d),
            Op::TaDual(a) => n(a),
            Op::TaaDual(a) => n(a) * n(a),
            Op::WqDual(q) => n(q),
            Op::Diamond(_) | Op::Comp(_) => Rat::one(),
        }
    }

    pub fn apply(&self, v: &FormalSum) -> Result<FormalSum> {
        self.apply_with(v, Normalization::Scaled)
    }

    pub fn apply_with(&self, v: &FormalSum, norm: Normalization) -> Result<FormalSum> {
        let n = *v.level();
        let gamma1 = v.terms().any(|(p, _)| p.is_gamma1());
        self.check(&n, gamma1)?;
        if let Op::Comp(ops) = self {
            let mut cur = v.clone();
            for o in ops.iter().rev() {
                cur = o.apply_with(&cur, norm)?;
            }
            return Ok(cur);
        }
        let scale = match norm {
            Normalization::Scaled => self.factor(),
            Normalization::Unscaled => Rat::one(),
        };
        let mut out = FormalSum::zero(&self.target_level(&n));
        for (p, c) in v.terms() {
            for q in self.image(p, &n)? {
                out.add_term(q, *c * scale);
            }
        }
        Ok(out)
    }

    /// Unscaled image of one point.
    fn image(&self, p: &ModPoint, n: &Ideal) -> Result<Vec<ModPoint>> {
        let (l, lp) = (p.l, p.lp);
        let keep = |m: ModPoint, lv: &Ideal| if m.is_valid(lv) { Some(m) } else { None };
        Ok(match self {
            Op::Ta(a) => l
                .superlattices(a)?
                .into_iter()
                .filter_map(|m| {
                    let mp = m.sum(&lp);
                    keep(rebuild(m, mp, p.beta()), n)
                })
                .collect(),
            Op::TaDual(a) => {
                let beta = match p.beta() {
                    Some(b) => {
                        let u = one_mod(a, n)?;
                        Some([b[0] * u, b[1] * u])
                    }
                    None => None,
                };
                let alp = lp.scale(a);
                l.sublattices(a)?
                    .into_iter()
                    .filter_map(|m| {
                        let mp = m.sum(&alp);
                        keep(rebuild(m, mp, beta), n)
                    })
                    .collect()
            }
            Op::Taa(a) => vec![scale_point(p, &a.inverse(), n)?],
            Op::TaaDual(a) => vec![scale_point(p, a, n)?],
            Op::Diamond(x) => vec![if p.is_gamma1() { diamond(x, p, n)? } else { *p }],
            Op::Wq(q) => {
                let qp = n.div(q);
                let m = l.sum(&lp.scale(&qp));
                let mp = l.scale(&q.inverse()).sum(&lp);
                vec![ModPoint::gamma0(m, mp)]
            }
            Op::WqDual(q) => {
                let m = l.scale(q).sum(&lp.scale(n));
                let mp = l.sum(&lp.scale(q));
                vec![ModPoint::gamma0(m, mp)]
            }
            Op::Ad { m, d } => {
                let lt = l.intersect(&lp.scale(d));
                let ltp = lt.sum(&lp.scale(&n.div(m)));
                vec![ModPoint::gamma0(lt, ltp)]
            }
            Op::Comp(_) => unreachable!("composites are expanded by the caller"),
        })
    }
}

/// Numerator and denominator of `a` both coprime to `n`.
pub fn coprime_fractional(a: &Ideal, n: &Ideal) -> bool {
    let den = a.add(&Ideal::unit(a.field())).inverse();
    a.mul(&den).is_coprime(n) && den.is_coprime(n)
}

fn rebuild(m: Lattice, mp: Lattice, beta: Option<Vec2>) -> ModPoint {
    match beta {
        Some(b) => ModPoint::gamma1(m, mp, b),
        None => ModPoint::gamma0(m, mp),
    }
}

/// Some `u ∈ O ∩ a` with `u ≡ 1 mod n`.
fn one_mod(a: &Ideal, n: &Ideal) -> Result<Elt> {
    let f = n.field();
    let oa = Ideal::unit(f).intersect(a);
    let (u, _) = oa.decompose(n, &f.one())?;
    Ok(u)
}

/// `(bL, bL', u beta)` with `u ∈ O ∩ b`, `u ≡ 1 mod n`.
fn scale_point(p: &ModPoint, b: &Ideal, n: &Ideal) -> Result<ModPoint> {
    let l = p.l.scale(b);
    let lp = p.lp.scale(b);
    Ok(match p.beta() {
        Some(beta) => {
            let u = one_mod(b, n)?;
            ModPoint::gamma1(l, lp, [beta[0] * u, beta[1] * u])
        }
        None => ModPoint::gamma0(l, lp),
    })
}

pub fn t_a(a: &Ideal, v: &FormalSum) -> Result<FormalSum> {
    Op::Ta(*a).apply(v)
}

pub fn t_aa(a: &Ideal, v: &FormalSum) -> Result<FormalSum> {
    Op::Taa(*a).apply(v)
}

pub fn w_q(q: &Ideal, v: &FormalSum) -> Result<FormalSum> {
    Op::Wq(*q).apply(v)
}

pub fn a_d(m: &Ideal, d: &Ideal, v: &FormalSum) -> Result<FormalSum> {
    Op::Ad { m: *m, d: *d }.apply(v)
}

pub fn t_a_dual(a: &Ideal, v: &FormalSum) -> Result<FormalSum> {
    Op::TaDual(*a).apply(v)
}

pub fn t_aa_dual(a: &Ideal, v: &FormalSum) -> Result<FormalSum> {
    Op::TaaDual(*a).apply(v)
}

pub fn w_q_dual(q: &Ideal, v: &FormalSum) -> Result<FormalSum> {
    Op::WqDual(*q).apply(v)
}

pub fn operator_class(op: &Op, cg: &ClassGroup) -> Class {
    op.class(cg)
}
