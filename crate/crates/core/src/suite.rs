//! Fixed relation suites for the formal Hecke algebra, shared by the CLI
//! `verify` command and the test suite.

use std::sync::Arc;

use num_traits::One;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::heckemat::*;
use crate::heckeops::{is_exact_divisor, Op};
use crate::ideals::{divisors, primes_above, ClassGroup, Ideal};
use crate::modpts::{random_gamma0, random_gamma1, FormalSum, Level, ModPoint};
use crate::qfield::{rat, Elt, Field, Rat};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
}

/// Linear combination of operators.
type Lin = Vec<(Rat, Op)>;

fn one(op: Op) -> Lin {
    vec![(Rat::one(), op)]
}

fn comp(ops: &[Op]) -> Op {
    Op::Comp(ops.to_vec())
}

fn eval(lin: &Lin, v: &FormalSum) -> Result<FormalSum> {
    let mut acc: Option<FormalSum> = None;
    for (c, op) in lin {
        let img = op.apply(v)?.scale(*c);
        acc = Some(match acc {
            None => img,
            Some(a) => a.plus(&img),
        });
    }
    acc.ok_or_else(|| Error::InvalidOperator("empty combination".into()))
}

pub struct Fixture {
    pub name: String,
    pub cg: Arc<ClassGroup>,
    pub level: Level,
    pub points0: Vec<ModPoint>,
    pub points1: Vec<ModPoint>,
    pub primes_good: Vec<Ideal>,
    pub primes_bad: Vec<Ideal>,
}

impl Fixture {
    pub fn new(name: &str, field: Field, n: &Ideal, seed: u64) -> Result<Fixture> {
        let cg = Arc::new(ClassGroup::new(field));
        let level = Level::new(cg.clone(), n)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut points0 = Vec::new();
        let mut points1 = Vec::new();
        for i in 0..level.reps().p.len() {
            for j in 0..level.reps().q.len() {
                let p0 = level.standard_point0(i, j);
                let p1 = level.standard_point1(i, j);
                points0.push(p0);
                points1.push(p1);
                for _ in 0..2 {
                    points0.push(p0.apply(&random_gamma0(&mut rng, n, 4))?);
                    points1.push(p1.apply(&random_gamma1(&mut rng, n, 4))?);
                }
            }
        }
        let primes_bad = n.prime_divisors();
        let primes_good: Vec<Ideal> =
            crate::ideals::primes_up_to_norm(field, 13).into_iter().filter(|p| p.is_coprime(n)).collect();
        Ok(Fixture { name: name.to_string(), cg, level, points0, points1, primes_good, primes_bad })
    }

    fn n(&self) -> Ideal {
        *self.level.ideal()
    }

    fn field(&self) -> Field {
        self.n().field()
    }
}

/// Q(i) at level 6, Q(sqrt -5) at levels p2*p3 and 2*p3.
pub fn standard_fixtures() -> Result<Vec<Fixture>> {
    let qi = Field::new(1)?;
    let q5 = Field::new(5)?;
    let p2 = primes_above(q5, 2)[0].0;
    let p3 = primes_above(q5, 3)[0].0;
    Ok(vec![
        Fixture::new("Q(i) n=(6)", qi, &Ideal::from_int(qi, 6)?, 1)?,
        Fixture::new("Q(sqrt-5) n=p2*p3", q5, &p2.mul(&p3), 2)?,
        Fixture::new("Q(sqrt-5) n=p2^2*p3", q5, &p2.mul(&p2).mul(&p3), 3)?,
    ])
}

struct Runner<'a> {
    fx: &'a Fixture,
    out: Vec<Check>,
}

impl Runner<'_> {
    fn eq_on(&mut self, name: String, pts: &[ModPoint], lhs: &Lin, rhs: &Lin) {
        let n = self.fx.n();
        let passed = pts.iter().all(|p| {
            let v = FormalSum::point(&n, *p);
            match (eval(lhs, &v), eval(rhs, &v)) {
                (Ok(a), Ok(b)) => !a.is_empty() && a == b,
                _ => false,
            }
        });
        self.out.push(Check { name: format!("{}: {}", self.fx.name, name), passed });
    }

    fn eq0(&mut self, name: String, lhs: Lin, rhs: Lin) {
        let pts = self.fx.points0.clone();
        self.eq_on(name, &pts, &lhs, &rhs);
    }

    fn eq1(&mut self, name: String, lhs: Lin, rhs: Lin) {
        let pts = self.fx.points1.clone();
        self.eq_on(name, &pts, &lhs, &rhs);
    }

    fn graded(&mut self, op: Op) {
        let cg = &self.fx.cg;
        let n = self.fx.n();
        let shift = op.class(cg);
        let passed = self.fx.points0.iter().all(|p| {
            let want = cg.add(&p.class(cg), &shift);
            match op.apply(&FormalSum::point(&n, *p)) {
                Ok(img) => img.terms().all(|(q, _)| q.class(cg) == want),
                Err(_) => false,
            }
        });
        self.out.push(Check { name: format!("{}: grading of {}", self.fx.name, op), passed });
    }
}

fn exact_divisors(n: &Ideal) -> Vec<Ideal> {
    divisors(n).into_iter().filter(|q| is_exact_divisor(q, n)).collect()
}

pub fn run_fixture(fx: &Fixture) -> Result<Vec<Check>> {
    let f = fx.field();
    let n = fx.n();
    let o = Ideal::unit(f);
    let mut r = Runner { fx, out: Vec::new() };
    let good = fx.primes_good.clone();
    let bad = fx.primes_bad.clone();
    let g0 = good[0];
    let g1 = good[1];

    // (1)
    r.eq0("T_O = 1".into(), one(Op::Ta(o)), one(Op::Comp(vec![])));
    r.eq0("T_(O,O) = 1".into(), one(Op::Taa(o)), one(Op::Comp(vec![])));
    // (2)
    for (a, b) in [(g0, g1), (g0.inverse(), g1), (g0, g0)] {
        let ab = a.mul(&b);
        r.eq0(
            format!("T_(a,a) T_(b,b) = T_(ab,ab) for a={a}, b={b}"),
            one(comp(&[Op::Taa(a), Op::Taa(b)])),
            one(Op::Taa(ab)),
        );
        r.eq1(
            format!("T_(a,a) T_(b,b) = T_(b,b) T_(a,a) on Gamma_1 for a={a}, b={b}"),
            one(comp(&[Op::Taa(a), Op::Taa(b)])),
            one(comp(&[Op::Taa(b), Op::Taa(a)])),
        );
    }
    // (3)
    for b in [g1, bad[0], bad[bad.len() - 1]] {
        r.eq0(
            format!("T_(a,a) T_b = T_b T_(a,a) for a={g0}, b={b}"),
            one(comp(&[Op::Taa(g0), Op::Ta(b)])),
            one(comp(&[Op::Ta(b), Op::Taa(g0)])),
        );
        r.eq1(
            format!("T_(a,a) T_b = T_b T_(a,a) on Gamma_1 for a={g0}, b={b}"),
            one(comp(&[Op::Taa(g0), Op::Ta(b)])),
            one(comp(&[Op::Ta(b), Op::Taa(g0)])),
        );
    }
    // (4)
    let mut pairs = vec![(g0, g1), (bad[0], g0)];
    if bad.len() > 1 {
        pairs.push((bad[0], bad[1]));
    }
    for (a, b) in pairs {
        r.eq0(format!("T_a T_b = T_ab for a={a}, b={b}"), one(comp(&[Op::Ta(a), Op::Ta(b)])), one(Op::Ta(a.mul(&b))));
        r.eq0(
            format!("T_a T_b = T_b T_a for a={a}, b={b}"),
            one(comp(&[Op::Ta(a), Op::Ta(b)])),
            one(comp(&[Op::Ta(b), Op::Ta(a)])),
        );
    }
    r.eq1(
        format!("T_a T_b = T_ab on Gamma_1 for a={g0}, b={}", bad[0]),
        one(comp(&[Op::Ta(g0), Op::Ta(bad[0])])),
        one(Op::Ta(g0.mul(&bad[0]))),
    );
    // (5)
    for p in &bad {
        for k in 2..=3i64 {
            if p.norm() * p.norm() > rat(25) && k == 3 {
                continue;
            }
            r.eq0(
                format!("T_p^{k} = (T_p)^{k} for p={p} dividing the level"),
                one(Op::Ta(p.pow(k))),
                one(Op::Comp(vec![Op::Ta(*p); k as usize])),
            );
        }
    }
    // (6)
    let np = g0.norm();
    for k in 1..=3i64 {
        let lhs = one(comp(&[Op::Ta(g0.pow(k)), Op::Ta(g0)]));
        let rhs = vec![(Rat::one(), Op::Ta(g0.pow(k + 1))), (np, comp(&[Op::Ta(g0.pow(k - 1)), Op::Taa(g0)]))];
        r.eq0(format!("T_p^{k} T_p = T_p^{} + N(p) T_p^{} T_(p,p) for p={g0}", k + 1, k - 1), lhs.clone(), rhs.clone());
        if k == 1 {
            r.eq1(format!("T_p T_p = T_p^2 + N(p) T_(p,p) on Gamma_1 for p={g0}"), lhs, rhs);
        }
    }

    // Atkin-Lehner
    let qs = exact_divisors(&n);
    for q in &qs {
        r.eq0(format!("W_q^2 = T_(q,q) for q={q}"), one(comp(&[Op::Wq(*q), Op::Wq(*q)])), one(Op::Taa(*q)));
        for a in [g0, g0.mul(&g1)] {
            r.eq0(
                format!("T_a W_q = W_q T_a for a={a}, q={q}"),
                one(comp(&[Op::Ta(a), Op::Wq(*q)])),
                one(comp(&[Op::Wq(*q), Op::Ta(a)])),
            );
        }
        for q2 in &qs {
            let g = q.add(q2);
            let q3 = q.mul(q2).div(&g.mul(&g));
            r.eq0(
                format!("W_q1 W_q2 = T_(q,q) W_q3 for q1={q}, q2={q2}"),
                one(comp(&[Op::Wq(*q), Op::Wq(*q2)])),
                one(comp(&[Op::Taa(g), Op::Wq(q3)])),
            );
        }
    }

    // level change
    for m in divisors(&n) {
        let rest = n.div(&m);
        for d in divisors(&rest) {
            let ad = Op::Ad { m, d };
            r.eq0(
                format!("A_d T_p = T_p A_d for m={m}, d={d}, p={g0}"),
                one(comp(&[ad.clone(), Op::Ta(g0)])),
                one(comp(&[Op::Ta(g0), ad.clone()])),
            );
            for q in [g1.inverse(), bad[0]] {
                r.eq0(
                    format!("A_d T_(q,q) = T_(q,q) A_d for m={m}, d={d}, q={q}"),
                    one(comp(&[ad.clone(), Op::Taa(q)])),
                    one(comp(&[Op::Taa(q), ad.clone()])),
                );
            }
            r.graded(ad);
        }
    }
    let a = g0.mul(&g1);
    for m in divisors(&n).into_iter().filter(|m| !m.is_unit_ideal()).take(2) {
        let d = n.div(&m).prime_divisors().first().copied().unwrap_or(o);
        let ad = Op::Ad { m, d };
        r.eq0(
            format!("A_d T_a = T_a A_d for m={m}, d={d}, a={a}"),
            one(comp(&[ad.clone(), Op::Ta(a)])),
            one(comp(&[Op::Ta(a), ad])),
        );
    }
    // A_d and W_q, with n = p^(alpha+beta) m
    for p in &bad {
        let e = n.valuation(p);
        for s in 1..=e {
            let m = n.div(&p.pow(s));
            for alpha in 0..=s {
                let d = p.pow(alpha);
                let dp = p.pow(s - alpha);
                for q in exact_divisors(&m) {
                    let ad = Op::Ad { m, d };
                    if q.is_coprime(p) {
                        r.eq0(
                            format!("A_d W_q = W_q A_d for m={m}, d={d}, q={q}"),
                            one(comp(&[ad.clone(), Op::Wq(q)])),
                            one(comp(&[Op::Wq(q), ad])),
                        );
                    } else {
                        let qq = q.mul(&p.pow(s));
                        r.eq0(
                            format!("A_d W_q' = W_q T_(d',d') A_d' for m={m}, d={d}, q={q}"),
                            one(comp(&[ad, Op::Wq(qq)])),
                            one(comp(&[Op::Wq(q), Op::Taa(dp), Op::Ad { m, d: dp }])),
                        );
                    }
                }
            }
        }
    }

    // dual operators
    for a in [g0, g1, g0.mul(&g0)] {
        r.eq0(
            format!("dual T_a = T_(a,a)^-1 T_a for a={a}"),
            one(Op::TaDual(a)),
            one(comp(&[Op::Taa(a.inverse()), Op::Ta(a)])),
        );
        r.eq0(format!("dual T_(a,a) = T_(a^-1,a^-1) for a={a}"), one(Op::TaaDual(a)), one(Op::Taa(a.inverse())));
    }
    r.eq1(
        format!("dual T_a = T_(a,a)^-1 T_a on Gamma_1 for a={g0}"),
        one(Op::TaDual(g0)),
        one(comp(&[Op::Taa(g0.inverse()), Op::Ta(g0)])),
    );
    for q in &qs {
        r.eq0(
            format!("dual W_q = T_(q,q)^-1 W_q for q={q}"),
            one(Op::WqDual(*q)),
            one(comp(&[Op::Taa(q.inverse()), Op::Wq(*q)])),
        );
        r.eq0(
            format!("dual W_q^2 = dual T_(q,q) for q={q}"),
            one(comp(&[Op::WqDual(*q), Op::WqDual(*q)])),
            one(Op::TaaDual(*q)),
        );
    }

    // diamond operators
    let alpha = diamond_sample(f, &n);
    for op in [Op::Ta(g0), Op::Ta(bad[0]), Op::Taa(g0), Op::TaDual(g0)] {
        r.eq1(
            format!("<alpha> commutes with {op} for alpha={alpha}"),
            one(comp(&[Op::Diamond(alpha), op.clone()])),
            one(comp(&[op.clone(), Op::Diamond(alpha)])),
        );
    }

    // grading
    for op in
        [Op::Ta(g0), Op::Ta(bad[0]), Op::Taa(g1), Op::TaDual(g0), Op::TaaDual(g0), Op::Wq(qs[1]), Op::WqDual(qs[1])]
    {
        r.graded(op);
    }
    Ok(r.out)
}

/// Smallest non-unit element coprime to `n` (a unit mod `n` that is not +-1).
fn diamond_sample(f: Field, n: &Ideal) -> Elt {
    let mut best = None;
    for bound in 2..50 {
        for x in -bound..=bound {
            for y in -bound..=bound {
                let e = f.int(x, y);
                if e.is_zero() || e.is_unit() {
                    continue;
                }
                let ok = Ideal::principal(e).map(|i| i.is_coprime(n)).unwrap_or(false)
                    && !n.contains(&(e - f.one()))
                    && !n.contains(&(e + f.one()));
                if ok {
                    best = Some(e);
                    break;
                }
            }
            if best.is_some() {
                break;
            }
        }
        if let Some(b) = best {
            return b;
        }
    }
    f.one()
}

pub fn run_all() -> Result<Vec<Check>> {
    let mut out = Vec::new();
    for fx in standard_fixtures()? {
        out.extend(run_fixture(&fx)?);
    }
    Ok(out)
}

pub struct MatrixFixture {
    pub name: String,
    pub level: Level,
    pub set: HeckeMatrixSet,
}

/// Matrix sets for every special case over fields of class number 1, 2, 3.
pub fn matrix_fixtures() -> Result<Vec<MatrixFixture>> {
    let mut out = Vec::new();
    let mut push = |name: &str, cg: &Arc<ClassGroup>, n: &Ideal, set: Result<HeckeMatrixSet>| -> Result<()> {
        let set = set.map_err(|e| Error::Inconsistent(format!("{name}: {e}")))?;
        out.push(MatrixFixture { name: name.to_string(), level: Level::new(cg.clone(), n)?, set });
        Ok(())
    };
    let prime = |f: Field, p: i128, k: usize| primes_above(f, p)[k].0;
    let half_inv = |cg: &ClassGroup, x: &Ideal, n: &Ideal| -> Result<Ideal> {
        let c = cg
            .half(&cg.neg(&cg.class_of(x)))
            .ok_or_else(|| Error::Precondition(format!("class of {x} is not a square")))?;
        Ok(cg.ideal_in_class_coprime_to(&c, n))
    };

    // class number 1
    let f = Field::new(1)?;
    let cg = Arc::new(ClassGroup::new(f));
    let o = Ideal::unit(f);
    let pi = prime(f, 2, 0);
    let p5 = prime(f, 5, 0);
    let p5b = prime(f, 5, 1);
    let three = Ideal::from_int(f, 3)?;
    let six = Ideal::from_int(f, 6)?;
    let two = Ideal::from_int(f, 2)?;
    push("Q(i) principal prime 1+i", &cg, &three, principal_prime(&pi, &three))?;
    push("Q(i) principal prime 2+i", &cg, &three, principal_prime(&p5, &three))?;
    push("Q(i) square class prime", &cg, &three, square_class_prime(&o, &pi, &three))?;
    push("Q(i) prime square", &cg, &three, principal_prime_square(&pi, &three))?;
    push("Q(i) Taa T(p^2)", &cg, &three, taa_tp2(&o, &p5, &three))?;
    push("Q(i) pq", &cg, &three, principal_pq(&pi, &p5, &three))?;
    push("Q(i) Taa T(pq)", &cg, &three, taa_tpq(&o, &p5, &p5b, &three))?;
    push("Q(i) W_2 at 6", &cg, &six, wq_set(&cg, &two, &six))?;
    push("Q(i) W_3 at 6", &cg, &six, wq_set(&cg, &three, &six))?;
    push("Q(i) W_2^O at 6", &cg, &six, wqm_set(&cg, &two, &o, &six))?;
    push("Q(i) T_p W_3", &cg, &three, tp_wq_matrices(&cg, &pi, &three, &three))?;
    push("Q(i) index 2", &cg, &three, hecke_matrices_index_b(&o, &two, &three))?;

    // class number 2
    let f = Field::new(5)?;
    let cg = Arc::new(ClassGroup::new(f));
    let p2 = prime(f, 2, 0);
    let p3 = prime(f, 3, 0);
    let p3b = prime(f, 3, 1);
    let p5 = prime(f, 5, 0);
    let p7 = prime(f, 7, 0);
    let seven = Ideal::from_int(f, 7)?;
    let two = Ideal::from_int(f, 2)?;
    let n23 = two.mul(&p3);
    push("Q(sqrt-5) principal prime sqrt-5", &cg, &p3, principal_prime(&p5, &p3))?;
    push("Q(sqrt-5) square class prime", &cg, &p3, square_class_prime(&p2, &p5, &p3))?;
    push("Q(sqrt-5) prime square p2", &cg, &p3, principal_prime_square(&p2, &p3))?;
    push("Q(sqrt-5) prime square p3", &cg, &p7, principal_prime_square(&p3, &p7))?;
    push("Q(sqrt-5) Taa T(p^2)", &cg, &p7, taa_tp2(&p3, &p2, &p7))?;
    push("Q(sqrt-5) pq", &cg, &seven, principal_pq(&p2, &p3, &seven))?;
    push("Q(sqrt-5) Taa T(pq)", &cg, &p3b, taa_tpq(&p7, &p2, &p3, &p3b))?;
    push("Q(sqrt-5) W_2 at 2p3", &cg, &n23, wq_set(&cg, &two, &n23))?;
    push("Q(sqrt-5) W_2^p7 at 2p3", &cg, &n23, wqm_set(&cg, &two, &p7, &n23))?;
    push("Q(sqrt-5) T_p2 W_p3", &cg, &p3, tp_wq_matrices(&cg, &p2, &p3, &p3))?;
    push("Q(sqrt-5) index 3", &cg, &p7, hecke_matrices_index_b(&p2, &Ideal::from_int(f, 3)?, &p7))?;

    // class number 3
    let f = Field::new(23)?;
    let cg = Arc::new(ClassGroup::new(f));
    let p2 = prime(f, 2, 0);
    let p2b = prime(f, 2, 1);
    let p3 = prime(f, 3, 0);
    let p23 = prime(f, 23, 0);
    let two = Ideal::from_int(f, 2)?;
    let n23 = two.mul(&p3);
    let np = p2.mul(&p3);
    push("Q(sqrt-23) principal prime", &cg, &p2, principal_prime(&p23, &p2))?;
    push("Q(sqrt-23) square class prime", &cg, &p3, square_class_prime(&half_inv(&cg, &p2, &p3)?, &p2, &p3))?;
    push("Q(sqrt-23) Taa T(p^2)", &cg, &p3, taa_tp2(&half_inv(&cg, &p2.mul(&p2), &p3)?, &p2, &p3))?;
    push("Q(sqrt-23) pq", &cg, &p3, principal_pq(&p2, &p2b, &p3))?;
    push("Q(sqrt-23) Taa T(pq)", &cg, &p23, taa_tpq(&half_inv(&cg, &np, &p23)?, &p2, &p3, &p23))?;
    push("Q(sqrt-23) W_2 at 2p3", &cg, &n23, wq_set(&cg, &two, &n23))?;
    push("Q(sqrt-23) W_p2^m at p2p3", &cg, &np, wqm_set(&cg, &p2, &half_inv(&cg, &p2, &np)?, &np))?;
    let pinv = cg.ideal_in_class_coprime_to(&cg.neg(&cg.class_of(&p3)), &p3);
    push("Q(sqrt-23) T_p W_p3", &cg, &p3, tp_wq_matrices(&cg, &pinv, &p3, &p3))?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaussian_level_six() {
        let f = Field::new(1).unwrap();
        let fx = Fixture::new("qi", f, &Ideal::from_int(f, 6).unwrap(), 1).unwrap();
        let checks = run_fixture(&fx).unwrap();
        let bad: Vec<&Check> = checks.iter().filter(|c| !c.passed).collect();
        assert!(bad.is_empty(), "{bad:#?}");
    }

    #[test]
    fn matrix_sets() {
        for fx in matrix_fixtures().unwrap() {
            let r = verify_sublattice_action(&fx.set, &fx.level).unwrap();
            assert!(r.passed(), "{}: {:?}", fx.name, r);
            assert!(agrees_with_general(&fx.set).unwrap(), "{}", fx.name);
        }
    }
}
