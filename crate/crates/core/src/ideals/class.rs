//! Ideal class group via reduced binary quadratic forms.

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::sync::Mutex;

use num_integer::Integer;

use super::{ideals_of_norm, Ideal};
use crate::qfield::Field;
use crate::zlinalg::{isqrt, smith};

type Form = (i128, i128, i128);

/// A class as exponents with respect to the invariant-factor generators.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Class(pub Vec<i128>);

fn reduce_form(mut a: i128, mut b: i128, disc: i128) -> Form {
    loop {
        let mut r = b.rem_euclid(2 * a);
        if r > a {
            r -= 2 * a;
        }
        b = r;
        let c = (b * b - disc) / (4 * a);
        if a > c {
            a = c;
            b = -b;
            continue;
        }
        if a == c && b < 0 {
            b = -b;
        }
        return (a, b, c);
    }
}

fn form_of(i: &Ideal) -> Form {
    let f = i.field();
    let (a, b, c) = i.numerator().hnf();
    let (a, b) = (a / c, b / c);
    reduce_form(a, 2 * b + f.omega_trace(), f.discriminant())
}

fn reduced_forms(disc: i128) -> Vec<Form> {
    let mut out = Vec::new();
    let amax = isqrt(-disc / 3) + 1;
    for a in 1..=amax {
        for b in (-a + 1)..=a {
            if (b - disc).rem_euclid(2) != 0 || (b * b - disc) % (4 * a) != 0 {
                continue;
            }
            let c = (b * b - disc) / (4 * a);
            if c < a || (a == c && b < 0) || a.gcd(&b).gcd(&c) != 1 {
                continue;
            }
            out.push((a, b, c));
        }
    }
    out
}

fn ideal_of_form(field: Field, (a, b, _): Form) -> Ideal {
    let b0 = (b - field.omega_trace()) / 2;
    Ideal::generated(field, &[field.from_int(a), field.int(b0, 1)]).unwrap()
}

pub struct ClassGroup {
    field: Field,
    invariants: Vec<i128>,
    classes: Vec<Class>,
    by_form: HashMap<Form, usize>,
    form_reps: Vec<Ideal>,
    coprime_cache: Mutex<HashMap<(Class, Ideal), Ideal>>,
}

/// Level-coprime representatives: `p` runs over Cl/Cl^2 and `q` over a set
/// whose squares are exactly Cl^2. The first of each is the unit ideal.
#[derive(Clone, Debug)]
pub struct StandardReps {
    pub level: Ideal,
    pub p: Vec<Ideal>,
    pub q: Vec<Ideal>,
    pub p_class: Vec<Class>,
    pub q_class: Vec<Class>,
}

impl ClassGroup {
    pub fn new(field: Field) -> ClassGroup {
        let disc = field.discriminant();
        let forms = reduced_forms(disc);
        let h = forms.len();
        let by_form: HashMap<Form, usize> = forms.iter().enumerate().map(|(i, f)| (*f, i)).collect();
        let reps: Vec<Ideal> = forms.iter().map(|f| ideal_of_form(field, *f)).collect();
        let id = by_form[&form_of(&Ideal::unit(field))];
        let mul = |i: usize, j: usize| by_form[&form_of(&reps[i].mul(&reps[j]))];

        // greedy generators and BFS exponent vectors
        let mut gens: Vec<usize> = Vec::new();
        let mut expo: Vec<Option<Vec<i128>>> = vec![None; h];
        expo[id] = Some(vec![]);
        for cand in 0..h {
            if expo[cand].is_some() {
                continue;
            }
            gens.push(cand);
            let k = gens.len();
            for e in expo.iter_mut().flatten() {
                e.resize(k, 0);
            }
            let mut queue: VecDeque<usize> = (0..h).filter(|&i| expo[i].is_some()).collect();
            while let Some(x) = queue.pop_front() {
                for (gi, &g) in gens.iter().enumerate() {
                    let y = mul(x, g);
                    if expo[y].is_none() {
                        let mut e = expo[x].clone().unwrap();
                        e[gi] += 1;
                        expo[y] = Some(e);
                        queue.push_back(y);
                    }
                }
            }
        }
        let k = gens.len();
        let expo: Vec<Vec<i128>> = expo
            .into_iter()
            .map(|e| {
                let mut e = e.unwrap();
                e.resize(k, 0);
                e
            })
            .collect();

        let (invariants, classes) = if k == 0 {
            (vec![], vec![Class(vec![])])
        } else {
            let mut rels = Vec::new();
            for x in 0..h {
                for (gi, &g) in gens.iter().enumerate() {
                    let y = mul(x, g);
                    let row: Vec<i128> = (0..k).map(|j| expo[x][j] + i128::from(j == gi) - expo[y][j]).collect();
                    rels.push(row);
                }
            }
            let s = smith(&rels, k);
            let keep: Vec<usize> = (0..k).filter(|&j| s.diag[j] != 1).collect();
            let invariants: Vec<i128> = keep.iter().map(|&j| s.diag[j]).collect();
            let classes = expo
                .iter()
                .map(|e| {
                    Class(
                        keep.iter()
                            .map(|&j| {
                                let v: i128 = (0..k).map(|i| e[i] * s.v[i][j]).sum();
                                v.rem_euclid(s.diag[j])
                            })
                            .collect(),
                    )
                })
                .collect();
            (invariants, classes)
        };
        ClassGroup { field, invariants, classes, by_form, form_reps: reps, coprime_cache: Mutex::new(HashMap::new()) }
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn order(&self) -> usize {
        self.classes.len()
    }

    /// Invariant factors `d1 | d2 | ...`, all greater than one.
    pub fn invariants(&self) -> &[i128] {
        &self.invariants
    }

    pub fn exponent(&self) -> i128 {
        self.invariants.last().copied().unwrap_or(1)
    }

    /// Number of even invariant factors (the 2-rank).
    pub fn two_rank(&self) -> usize {
        self.invariants.iter().filter(|d| *d % 2 == 0).count()
    }

    pub fn h2(&self) -> usize {
        1 << self.two_rank()
    }

    pub fn class_of(&self, i: &Ideal) -> Class {
        self.classes[self.by_form[&form_of(i)]].clone()
    }

    pub fn is_principal(&self, i: &Ideal) -> bool {
        self.class_of(i) == self.identity()
    }

    pub fn identity(&self) -> Class {
        Class(vec![0; self.invariants.len()])
    }

    pub fn add(&self, a: &Class, b: &Class) -> Class {
        Class(self.invariants.iter().enumerate().map(|(j, d)| (a.0[j] + b.0[j]).rem_euclid(*d)).collect())
    }

    pub fn neg(&self, a: &Class) -> Class {
        self.times(a, -1)
    }

    pub fn times(&self, a: &Class, k: i128) -> Class {
        Class(self.invariants.iter().enumerate().map(|(j, d)| (a.0[j] * k).rem_euclid(*d)).collect())
    }

    pub fn sub(&self, a: &Class, b: &Class) -> Class {
        self.add(a, &self.neg(b))
    }

    /// All classes in lexicographic exponent order.
    pub fn elements(&self) -> Vec<Class> {
        let mut out = vec![Class(vec![])];
        for d in &self.invariants {
            out = out
                .into_iter()
                .flat_map(|c| {
                    (0..*d).map(move |x| {
                        let mut v = c.0.clone();
                        v.push(x);
                        Class(v)
                    })
                })
                .collect();
        }
        out
    }

    pub fn is_square(&self, c: &Class) -> bool {
        self.invariants.iter().zip(&c.0).all(|(d, x)| d % 2 == 1 || x % 2 == 0)
    }

    pub fn two_torsion(&self) -> Vec<Class> {
        self.elements().into_iter().filter(|c| self.times(c, 2) == self.identity()).collect()
    }

    /// Coset of `c` in Cl/Cl^2 as a bit vector on the even factors.
    pub fn square_coset(&self, c: &Class) -> Vec<i128> {
        self.invariants.iter().zip(&c.0).filter(|(d, _)| *d % 2 == 0).map(|(_, x)| x % 2).collect()
    }

    /// A class `x` with `2x = c`, for `c` a square; chosen from the same
    /// set as the `q` representatives.
    pub fn half(&self, c: &Class) -> Option<Class> {
        if !self.is_square(c) {
            return None;
        }
        Some(Class(
            self.invariants
                .iter()
                .zip(&c.0)
                .map(|(d, x)| if d % 2 == 0 { x / 2 } else { (x * (d + 1) / 2).rem_euclid(*d) })
                .collect(),
        ))
    }

    /// Small ideal in a class (from the reduced form).
    pub fn representative(&self, c: &Class) -> Ideal {
        let idx = self.classes.iter().position(|x| x == c).expect("class in group");
        self.form_reps[idx]
    }

    /// Integral ideal of least norm (then least HNF) in class `c`, coprime
    /// to `m`.
    pub fn ideal_in_class_coprime_to(&self, c: &Class, m: &Ideal) -> Ideal {
        let key = (c.clone(), m.numerator());
        if let Some(i) = self.coprime_cache.lock().unwrap().get(&key) {
            return *i;
        }
        let mut n = 1;
        let found = loop {
            if let Some(i) =
                ideals_of_norm(self.field, n).into_iter().find(|i| i.is_coprime(m) && self.class_of(i) == *c)
            {
                break i;
            }
            n += 1;
        };
        self.coprime_cache.lock().unwrap().insert(key, found);
        found
    }

    pub fn standard_reps(&self, level: &Ideal) -> StandardReps {
        let r = self.two_rank();
        let even: Vec<usize> = (0..self.invariants.len()).filter(|&j| self.invariants[j] % 2 == 0).collect();
        let p_class: Vec<Class> = (0..1usize << r)
            .map(|mask| {
                let mut v = vec![0; self.invariants.len()];
                for (bit, &j) in even.iter().enumerate() {
                    v[j] = ((mask >> (r - 1 - bit)) & 1) as i128;
                }
                Class(v)
            })
            .collect();
        let mut q_class = vec![Class(vec![])];
        for d in &self.invariants {
            let top = if d % 2 == 0 { d / 2 } else { *d };
            q_class = q_class
                .into_iter()
                .flat_map(|c| {
                    (0..top).map(move |x| {
                        let mut v = c.0.clone();
                        v.push(x);
                        Class(v)
                    })
                })
                .collect();
        }
        let p = p_class.iter().map(|c| self.ideal_in_class_coprime_to(c, level)).collect();
        let q = q_class.iter().map(|c| self.ideal_in_class_coprime_to(c, level)).collect();
        StandardReps { level: *level, p, q, p_class, q_class }
    }

    /// Sizes used by CLI reports.
    pub fn summary(&self) -> BTreeMap<&'static str, String> {
        let mut m = BTreeMap::new();
        m.insert("h", self.order().to_string());
        m.insert("h2", self.h2().to_string());
        m.insert("invariants", format!("{:?}", self.invariants));
        m
    }
}

impl StandardReps {
    /// Indices `(i, j)` with `c = [p_i] + 2[q_j]`.
    pub fn index_of(&self, cg: &ClassGroup, c: &Class) -> (usize, usize) {
        let coset = cg.square_coset(c);
        let i = self.p_class.iter().position(|p| cg.square_coset(p) == coset).expect("coset representative");
        let rest = cg.sub(c, &self.p_class[i]);
        let j = self.q_class.iter().position(|q| cg.times(q, 2) == rest).expect("square root representative");
        (i, j)
    }

    pub fn class_of_index(&self, cg: &ClassGroup, i: usize, j: usize) -> Class {
        cg.add(&self.p_class[i], &cg.times(&self.q_class[j], 2))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cg(d: i64) -> ClassGroup {
        ClassGroup::new(Field::new(d).unwrap())
    }

    #[test]
    fn small_class_numbers() {
        for (d, h) in [(1, 1), (2, 1), (3, 1), (5, 2), (6, 2), (14, 4), (17, 4), (21, 4), (23, 3), (26, 6), (30, 4)] {
            assert_eq!(cg(d).order(), h, "d = {d}");
        }
        assert_eq!(cg(14).invariants(), &[4]);
        assert_eq!(cg(21).invariants(), &[2, 2]);
    }

    #[test]
    fn class_map_is_a_homomorphism() {
        let g = cg(26);
        let f = g.field();
        let ps = super::super::primes_up_to_norm(f, 30);
        for a in &ps {
            for b in &ps {
                assert_eq!(g.class_of(&a.mul(b)), g.add(&g.class_of(a), &g.class_of(b)));
            }
            assert_eq!(g.is_principal(a), a.generator().is_some());
        }
    }

    #[test]
    fn standard_reps_cover_group() {
        let g = cg(30);
        let f = g.field();
        let n = Ideal::from_int(f, 3).unwrap();
        let s = g.standard_reps(&n);
        assert_eq!(s.p.len() * s.q.len(), 4);
        assert!(s.p[0].is_unit_ideal() && s.q[0].is_unit_ideal());
        for c in g.elements() {
            let (i, j) = s.index_of(&g, &c);
            assert_eq!(s.class_of_index(&g, i, j), c);
        }
        assert!(s.p.iter().chain(&s.q).all(|i| i.is_coprime(&n)));
    }
}
