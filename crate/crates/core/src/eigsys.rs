//! Hecke eigensystems, unramified twists and recovery from principal data.
//!
//! Values are stored for primes of norm at most the bound `B`. Each prime
//! carries `alpha(p^k)` for `k = 1, 2, ...` while `N(p)^k <= B`, and always
//! at least up to `k = 2`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cyclo::{euler_phi, CycValue};
use crate::error::{Error, Result};
use crate::ideals::{primes_up_to_norm, Class, ClassGroup, Ideal};
use crate::qfield::{rat, Rat};

/// A character of the class group, given by exponents against the
/// invariant-factor generators: `psi(g_k) = zeta_{d_k}^{e_k}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct UnramifiedCharacter {
    pub exps: Vec<i128>,
}

impl UnramifiedCharacter {
    pub fn new(cg: &ClassGroup, exps: Vec<i128>) -> Result<Self> {
        if exps.len() != cg.invariants().len() {
            return Err(Error::Precondition(format!(
                "character needs {} exponents, got {}",
                cg.invariants().len(),
                exps.len()
            )));
        }
        let exps = exps.iter().zip(cg.invariants()).map(|(e, d)| e.rem_euclid(*d)).collect();
        Ok(UnramifiedCharacter { exps })
    }

    pub fn trivial(cg: &ClassGroup) -> Self {
        UnramifiedCharacter { exps: vec![0; cg.invariants().len()] }
    }

    /// Every character of the class group, in lexicographic exponent order.
    pub fn all(cg: &ClassGroup) -> Vec<Self> {
        cg.elements().into_iter().map(|c| UnramifiedCharacter { exps: c.0 }).collect()
    }

    pub fn is_trivial(&self) -> bool {
        self.exps.iter().all(|e| *e == 0)
    }

    pub fn mul(&self, cg: &ClassGroup, o: &Self) -> Self {
        UnramifiedCharacter { exps: cg.add(&Class(self.exps.clone()), &Class(o.exps.clone())).0 }
    }

    pub fn pow(&self, cg: &ClassGroup, k: i128) -> Self {
        UnramifiedCharacter { exps: cg.times(&Class(self.exps.clone()), k).0 }
    }

    pub fn inverse(&self, cg: &ClassGroup) -> Self {
        self.pow(cg, -1)
    }

    /// Root-of-unity index of `psi(c)` in `Z/e` where `e` is the group exponent.
    pub fn index(&self, cg: &ClassGroup, c: &Class) -> i128 {
        let e = cg.exponent();
        cg.invariants().iter().enumerate().map(|(k, d)| self.exps[k] * c.0[k] * (e / d)).sum::<i128>().rem_euclid(e)
    }

    pub fn value(&self, cg: &ClassGroup, c: &Class) -> CycValue {
        let e = cg.exponent() as u32;
        CycValue::zeta_pow(e, self.index(cg, c) as i64)
    }

    pub fn at(&self, cg: &ClassGroup, i: &Ideal) -> CycValue {
        self.value(cg, &cg.class_of(i))
    }
}

/// `base * prod_{i in mask} sqrt(radicands[i])`.
///
/// Values attached to primes in one coset of `Cl/Cl^2` share a mask, so
/// sums only ever combine equal masks.
#[derive(Clone, Debug)]
pub struct AdjoinedValue {
    base: CycValue,
    mask: u32,
    radicands: Arc<Vec<CycValue>>,
}

fn merge(a: &Arc<Vec<CycValue>>, b: &Arc<Vec<CycValue>>) -> Arc<Vec<CycValue>> {
    if a.is_empty() {
        b.clone()
    } else {
        debug_assert!(b.is_empty() || a == b, "incompatible radicands");
        a.clone()
    }
}

impl AdjoinedValue {
    pub fn new(base: CycValue, mask: u32, radicands: Arc<Vec<CycValue>>) -> Result<Self> {
        if mask >> radicands.len() != 0 {
            return Err(Error::Precondition(format!("mask {mask} uses more than {} radicands", radicands.len())));
        }
        if radicands.iter().any(|r| r.is_zero()) {
            return Err(Error::Precondition("zero radicand".into()));
        }
        Ok(AdjoinedValue { base, mask, radicands })
    }

    pub fn plain(base: CycValue) -> Self {
        AdjoinedValue { base, mask: 0, radicands: Arc::new(Vec::new()) }
    }

    pub fn base(&self) -> &CycValue {
        &self.base
    }

    pub fn mask(&self) -> u32 {
        if self.is_zero() {
            0
        } else {
            self.mask
        }
    }

    pub fn radicands(&self) -> &Arc<Vec<CycValue>> {
        &self.radicands
    }

    pub fn is_zero(&self) -> bool {
        self.base.is_zero()
    }

    /// The value as a cyclotomic number, when no square root remains.
    pub fn as_cyc(&self) -> Option<CycValue> {
        (self.mask() == 0).then(|| self.base.clone())
    }

    fn rad_product(&self, bits: u32) -> CycValue {
        let mut acc = CycValue::one(1);
        for (i, r) in self.radicands.iter().enumerate() {
            if bits >> i & 1 == 1 {
                acc = &acc * r;
            }
        }
        acc
    }

    pub fn mul(&self, o: &AdjoinedValue) -> AdjoinedValue {
        let radicands = merge(&self.radicands, &o.radicands);
        let shared = self.mask() & o.mask();
        let mut r = AdjoinedValue { base: &self.base * &o.base, mask: self.mask() ^ o.mask(), radicands };
        r.base = &r.base * &r.rad_product(shared);
        r
    }

    pub fn scale(&self, c: &CycValue) -> AdjoinedValue {
        AdjoinedValue { base: &self.base * c, mask: self.mask, radicands: self.radicands.clone() }
    }

    pub fn neg(&self) -> AdjoinedValue {
        self.scale(&CycValue::from_rat(1, -Rat::one()))
    }

    /// Sum, defined when both sides carry the same square roots.
    pub fn add(&self, o: &AdjoinedValue) -> Option<AdjoinedValue> {
        if o.is_zero() {
            return Some(self.clone());
        }
        if self.is_zero() {
            return Some(o.clone());
        }
        if self.mask != o.mask {
            return None;
        }
        Some(AdjoinedValue {
            base: &self.base + &o.base,
            mask: self.mask,
            radicands: merge(&self.radicands, &o.radicands),
        })
    }

    pub fn sub(&self, o: &AdjoinedValue) -> Option<AdjoinedValue> {
        self.add(&o.neg())
    }

    pub fn inv(&self) -> Result<AdjoinedValue> {
        let base = self.base.inv()?.div(&self.rad_product(self.mask))?;
        Ok(AdjoinedValue { base, mask: self.mask, radicands: self.radicands.clone() })
    }

    pub fn square(&self) -> CycValue {
        &(&self.base * &self.base) * &self.rad_product(self.mask())
    }
}

impl PartialEq for AdjoinedValue {
    fn eq(&self, o: &AdjoinedValue) -> bool {
        if self.is_zero() || o.is_zero() {
            return self.is_zero() && o.is_zero();
        }
        self.mask == o.mask
            && self.base == o.base
            && (0..32).filter(|i| self.mask >> i & 1 == 1).all(|i| self.radicands[i] == o.radicands[i])
    }
}

impl Eq for AdjoinedValue {}

impl fmt::Display for AdjoinedValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.base)?;
        for i in (0..32).filter(|i| self.mask() >> i & 1 == 1) {
            write!(f, "*sqrt{}", i)?;
        }
        Ok(())
    }
}

/// How many powers of a prime of norm `norm` are stored at bound `bound`.
pub fn stored_exponent(norm: i128, bound: i128) -> usize {
    let mut k = 1;
    let mut q = norm;
    while q.saturating_mul(norm) <= bound {
        q *= norm;
        k += 1;
    }
    k.max(2)
}

/// Primes of norm at most `bound`, smallest norm first.
pub fn stored_primes(cg: &ClassGroup, bound: i128) -> Vec<Ideal> {
    primes_up_to_norm(cg.field(), bound)
}

/// A principal element `T_{a,a} T_b` of the Hecke algebra, with `b` given
/// as a list of prime powers and `a^2 b` principal.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Descriptor {
    pub a: Ideal,
    pub b: Vec<(Ideal, u32)>,
}

impl Descriptor {
    pub fn new(cg: &ClassGroup, a: Ideal, mut b: Vec<(Ideal, u32)>) -> Result<Self> {
        b.sort();
        let mut total = cg.times(&cg.class_of(&a), 2);
        for (p, k) in &b {
            if !p.is_prime() {
                return Err(Error::Precondition(format!("{p} is not prime")));
            }
            total = cg.add(&total, &cg.times(&cg.class_of(p), *k as i128));
        }
        if total != cg.identity() {
            return Err(Error::NotPrincipal(format!("descriptor {}", Descriptor { a, b })));
        }
        Ok(Descriptor { a, b })
    }

    /// The descriptor for `T_b` with `a` chosen from the class representatives.
    fn for_product(cg: &ClassGroup, b: Vec<(Ideal, u32)>) -> Descriptor {
        let total = b.iter().fold(cg.identity(), |acc, (p, k)| cg.add(&acc, &cg.times(&cg.class_of(p), *k as i128)));
        let half = cg.half(&cg.neg(&total)).expect("product class is a square");
        Descriptor::new(cg, cg.representative(&half), b).expect("principal by construction")
    }

    fn two_torsion(cg: &ClassGroup, c: &Class) -> Descriptor {
        Descriptor { a: cg.representative(c), b: Vec::new() }
    }
}

impl fmt::Display for Descriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Taa({})", self.a)?;
        for (p, k) in &self.b {
            write!(f, "T({})", p)?;
            if *k != 1 {
                write!(f, "^{}", k)?;
            }
        }
        Ok(())
    }
}

/// An eigensystem `(alpha, chi)` with unramified character, truncated at a
/// prime-norm bound.
#[derive(Clone)]
pub struct Eigensystem {
    cg: Arc<ClassGroup>,
    level: Ideal,
    bound: i128,
    chi: UnramifiedCharacter,
    alpha: BTreeMap<Ideal, Vec<AdjoinedValue>>,
}

fn extend_powers(
    alpha1: &AdjoinedValue,
    count: usize,
    norm: i128,
    chi_p: &CycValue,
    divides_level: bool,
) -> Option<Vec<AdjoinedValue>> {
    let one = AdjoinedValue::plain(CycValue::one(1));
    let weight = chi_p.scale(rat(norm));
    let mut out = vec![alpha1.clone()];
    while out.len() < count {
        let k = out.len();
        let next = out[k - 1].mul(alpha1);
        let next = if divides_level {
            next
        } else {
            let prev = if k == 1 { &one } else { &out[k - 2] };
            next.sub(&prev.scale(&weight))?
        };
        out.push(next);
    }
    Some(out)
}

impl Eigensystem {
    /// Builds a system from `alpha(p)` on every stored prime, extending to
    /// prime powers by the Hecke recurrence.
    pub fn from_primes(
        cg: Arc<ClassGroup>,
        level: Ideal,
        bound: i128,
        chi: UnramifiedCharacter,
        alpha1: &BTreeMap<Ideal, AdjoinedValue>,
    ) -> Result<Eigensystem> {
        let mut alpha = BTreeMap::new();
        for p in stored_primes(&cg, bound) {
            let a = alpha1.get(&p).ok_or_else(|| Error::OutOfBound(format!("alpha({p})")))?;
            let n = p.int_norm();
            let powers = extend_powers(a, stored_exponent(n, bound), n, &chi.at(&cg, &p), p.divides(&level))
                .ok_or_else(|| Error::Inconsistent(format!("mixed square roots at {p}")))?;
            alpha.insert(p, powers);
        }
        Ok(Eigensystem { cg, level, bound, chi, alpha })
    }

    /// Builds a system from explicit prime-power values; checks the shape
    /// but not the relations (see `validate`).
    pub fn from_table(
        cg: Arc<ClassGroup>,
        level: Ideal,
        bound: i128,
        chi: UnramifiedCharacter,
        alpha: BTreeMap<Ideal, Vec<AdjoinedValue>>,
    ) -> Result<Eigensystem> {
        let primes = stored_primes(&cg, bound);
        if alpha.len() != primes.len() {
            return Err(Error::Document(format!(
                "expected {} primes at bound {bound}, got {}",
                primes.len(),
                alpha.len()
            )));
        }
        for p in &primes {
            let vals = alpha.get(p).ok_or_else(|| Error::Document(format!("missing prime {p}")))?;
            let want = stored_exponent(p.int_norm(), bound);
            if vals.len() != want {
                return Err(Error::Document(format!("prime {p} needs {want} powers, got {}", vals.len())));
            }
        }
        Ok(Eigensystem { cg, level, bound, chi, alpha })
    }

    pub fn class_group(&self) -> &ClassGroup {
        &self.cg
    }

    pub fn class_group_arc(&self) -> Arc<ClassGroup> {
        self.cg.clone()
    }

    pub fn level(&self) -> &Ideal {
        &self.level
    }

    pub fn bound(&self) -> i128 {
        self.bound
    }

    pub fn chi(&self) -> &UnramifiedCharacter {
        &self.chi
    }

    /// Primes in norm order.
    pub fn primes(&self) -> Vec<Ideal> {
        stored_primes(&self.cg, self.bound)
    }

    pub fn table(&self) -> &BTreeMap<Ideal, Vec<AdjoinedValue>> {
        &self.alpha
    }

    pub fn alpha(&self, p: &Ideal, k: u32) -> Result<AdjoinedValue> {
        if k == 0 {
            return Ok(AdjoinedValue::plain(CycValue::one(1)));
        }
        self.alpha
            .get(p)
            .and_then(|v| v.get(k as usize - 1))
            .cloned()
            .ok_or_else(|| Error::OutOfBound(format!("alpha({p}^{k})")))
    }

    /// Checks the prime-power recurrence (or the power law at primes
    /// dividing the level) on every stored value.
    pub fn validate(&self) -> bool {
        self.alpha.iter().all(|(p, vals)| {
            match extend_powers(&vals[0], vals.len(), p.int_norm(), &self.chi.at(&self.cg, p), p.divides(&self.level)) {
                Some(expected) => expected == *vals,
                None => false,
            }
        })
    }

    /// `lambda(T_{a,a} T_b) = chi(a) alpha(b)`.
    pub fn evaluate(&self, a: &Ideal, b: &Ideal) -> Result<AdjoinedValue> {
        if !b.is_integral() {
            return Err(Error::NotIntegral(b.to_string()));
        }
        let mut acc = AdjoinedValue::plain(self.chi.at(&self.cg, a));
        for (p, k) in b.factor() {
            acc = acc.mul(&self.alpha(&p, k as u32)?);
        }
        Ok(acc)
    }

    pub fn evaluate_descriptor(&self, d: &Descriptor) -> Result<AdjoinedValue> {
        let mut acc = AdjoinedValue::plain(self.chi.at(&self.cg, &d.a));
        for (p, k) in &d.b {
            acc = acc.mul(&self.alpha(p, *k)?);
        }
        Ok(acc)
    }

    /// `(lambda x psi)(T_a) = psi(a) lambda(T_a)`, character `chi psi^2`.
    pub fn twist(&self, psi: &UnramifiedCharacter) -> Eigensystem {
        let cg = &self.cg;
        let alpha = self
            .alpha
            .iter()
            .map(|(p, vals)| {
                let s = psi.at(cg, p);
                let mut pow = CycValue::one(1);
                let twisted = vals
                    .iter()
                    .map(|v| {
                        pow = &pow * &s;
                        v.scale(&pow)
                    })
                    .collect();
                (*p, twisted)
            })
            .collect();
        Eigensystem {
            cg: self.cg.clone(),
            level: self.level,
            bound: self.bound,
            chi: self.chi.mul(cg, &psi.pow(cg, 2)),
            alpha,
        }
    }

    /// Characters fixing the system, as observed on the stored data.
    pub fn inner_twists(&self) -> Vec<UnramifiedCharacter> {
        UnramifiedCharacter::all(&self.cg).into_iter().filter(|psi| self.twist(psi) == *self).collect()
    }

    /// The subgroup generated by `Cl^2` and the classes of prime powers
    /// with nonzero stored value.
    pub fn support_subgroup(&self) -> Vec<Class> {
        let cg = &self.cg;
        let mut gens: BTreeSet<Class> = cg.elements().into_iter().filter(|c| cg.is_square(c)).collect();
        for (p, vals) in &self.alpha {
            let c = cg.class_of(p);
            for (k, v) in vals.iter().enumerate() {
                if !v.is_zero() {
                    gens.insert(cg.times(&c, k as i128 + 1));
                }
            }
        }
        let mut group: BTreeSet<Class> = [cg.identity()].into_iter().collect();
        loop {
            let next: BTreeSet<Class> = group
                .iter()
                .flat_map(|x| gens.iter().map(move |g| cg.add(x, g)))
                .chain(group.iter().cloned())
                .collect();
            if next.len() == group.len() {
                return group.into_iter().collect();
            }
            group = next;
        }
    }

    /// All distinct twists by unramified characters.
    pub fn twist_orbit(&self) -> Vec<Eigensystem> {
        let mut out: Vec<Eigensystem> = Vec::new();
        for psi in UnramifiedCharacter::all(&self.cg) {
            let t = self.twist(&psi);
            if !out.contains(&t) {
                out.push(t);
            }
        }
        out.sort_by_key(|e| e.to_string());
        out
    }

    fn nonzero_references(&self) -> BTreeMap<Vec<i128>, Ideal> {
        let cg = &self.cg;
        let mut refs = BTreeMap::new();
        for p in self.primes() {
            let c = cg.class_of(&p);
            if !cg.is_square(&c) && !self.alpha[&p][0].is_zero() {
                refs.entry(cg.square_coset(&c)).or_insert(p);
            }
        }
        refs
    }

    /// The values on principal operators that determine the system up to
    /// unramified twist.
    pub fn restrict_to_principal(&self) -> PrincipalRestriction {
        let cg = &self.cg;
        let descs = principal_descriptors(cg, self.bound, &self.nonzero_references());
        let values = descs
            .into_iter()
            .map(|d| {
                let v = self
                    .evaluate_descriptor(&d)
                    .expect("descriptor within bound")
                    .as_cyc()
                    .expect("principal values carry no square roots");
                (d, v)
            })
            .collect();
        PrincipalRestriction {
            cg: self.cg.clone(),
            level: self.level,
            bound: self.bound,
            values,
            witnesses: Vec::new(),
        }
    }

    /// Square roots of `alpha(p)^2` across all twists, for primes outside
    /// the square classes. Registering these lets recovery return plain
    /// cyclotomic values.
    pub fn witnesses(&self) -> Vec<CycValue> {
        let cg = &self.cg;
        let mut out: Vec<CycValue> = Vec::new();
        for p in self.primes() {
            if cg.is_square(&cg.class_of(&p)) {
                continue;
            }
            let Some(a) = self.alpha[&p][0].as_cyc() else { continue };
            for psi in UnramifiedCharacter::all(cg) {
                let w = &a * &psi.at(cg, &p);
                if !w.is_zero() && !out.contains(&w) {
                    out.push(w);
                }
            }
        }
        out
    }
}

impl PartialEq for Eigensystem {
    fn eq(&self, o: &Eigensystem) -> bool {
        self.cg.field() == o.cg.field()
            && self.level == o.level
            && self.bound == o.bound
            && self.chi == o.chi
            && self.alpha == o.alpha
    }
}

impl fmt::Display for Eigensystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "d={} level={} bound={} chi={:?}", self.cg.field().d(), self.level, self.bound, self.chi.exps)?;
        for p in self.primes() {
            let vals: Vec<String> = self.alpha[&p].iter().map(|v| v.to_string()).collect();
            writeln!(f, "{} {}", p, vals.join(" "))?;
        }
        Ok(())
    }
}

impl fmt::Debug for Eigensystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

struct Plan {
    /// Cosets whose reference value is a free square root.
    free: Vec<(Vec<i128>, Ideal)>,
    /// Cosets in the span of earlier free cosets: reference prime and the
    /// indices of the free cosets it is linked to.
    linked: Vec<(Vec<i128>, Ideal, Vec<usize>)>,
}

fn xor(a: &[i128], b: &[i128]) -> Vec<i128> {
    a.iter().zip(b).map(|(x, y)| (x + y) % 2).collect()
}

fn reference_plan(refs: &BTreeMap<Vec<i128>, Ideal>) -> Plan {
    let mut plan = Plan { free: Vec::new(), linked: Vec::new() };
    for (coset, p) in refs {
        let k = plan.free.len();
        let combo = (1u32..1 << k).find(|bits| {
            let mut acc = vec![0; coset.len()];
            for i in 0..k {
                if bits >> i & 1 == 1 {
                    acc = xor(&acc, &plan.free[i].0);
                }
            }
            acc == *coset
        });
        match combo {
            Some(bits) => {
                let idx = (0..k).filter(|i| bits >> i & 1 == 1).collect();
                plan.linked.push((coset.clone(), *p, idx));
            }
            None => plan.free.push((coset.clone(), *p)),
        }
    }
    plan
}

fn principal_descriptors(cg: &ClassGroup, bound: i128, refs: &BTreeMap<Vec<i128>, Ideal>) -> Vec<Descriptor> {
    let mut out = Vec::new();
    for c in cg.two_torsion() {
        if c != cg.identity() {
            out.push(Descriptor::two_torsion(cg, &c));
        }
    }
    let primes = stored_primes(cg, bound);
    let classes: Vec<Class> = primes.iter().map(|p| cg.class_of(p)).collect();
    for (p, c) in primes.iter().zip(&classes) {
        if cg.is_square(c) {
            out.push(Descriptor::for_product(cg, vec![(*p, 1)]));
        }
        out.push(Descriptor::for_product(cg, vec![(*p, 2)]));
    }
    for i in 0..primes.len() {
        for j in i + 1..primes.len() {
            if cg.is_square(&cg.add(&classes[i], &classes[j])) {
                out.push(Descriptor::for_product(cg, vec![(primes[i], 1), (primes[j], 1)]));
            }
        }
    }
    let plan = reference_plan(refs);
    for (_, p, idx) in &plan.linked {
        let mut b = vec![(*p, 1)];
        b.extend(idx.iter().map(|i| (plan.free[*i].1, 1)));
        out.push(Descriptor::for_product(cg, b));
    }
    out
}

/// Values of an eigensystem on principal operators, as produced by
/// `Eigensystem::restrict_to_principal`, plus optional registered square
/// roots.
#[derive(Clone)]
pub struct PrincipalRestriction {
    pub cg: Arc<ClassGroup>,
    pub level: Ideal,
    pub bound: i128,
    pub values: BTreeMap<Descriptor, CycValue>,
    pub witnesses: Vec<CycValue>,
}

impl PartialEq for PrincipalRestriction {
    fn eq(&self, o: &PrincipalRestriction) -> bool {
        self.cg.field() == o.cg.field() && self.level == o.level && self.bound == o.bound && self.values == o.values
    }
}

impl fmt::Debug for PrincipalRestriction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "d={} level={} bound={}", self.cg.field().d(), self.level, self.bound)?;
        for (d, v) in &self.values {
            writeln!(f, "{d} = {v}")?;
        }
        Ok(())
    }
}

impl PrincipalRestriction {
    pub fn with_witnesses(mut self, w: Vec<CycValue>) -> Self {
        self.witnesses = w;
        self
    }

    fn get(&self, d: &Descriptor) -> Result<&CycValue> {
        self.values.get(d).ok_or_else(|| Error::Inconsistent(format!("missing value for {d}")))
    }

    fn witness_for(&self, v: &CycValue) -> Option<CycValue> {
        self.witnesses.iter().find(|w| *w * *w == *v).cloned()
    }

    /// Products of principal single-prime values must agree with the pair
    /// values, up to the two-torsion character values.
    pub fn check_consistency(&self) -> Result<()> {
        let cg = &self.cg;
        let chi2 = |c: &Class| -> Result<CycValue> {
            if *c == cg.identity() {
                Ok(CycValue::one(1))
            } else {
                self.get(&Descriptor::two_torsion(cg, c)).cloned()
            }
        };
        let singles: BTreeMap<Ideal, &Descriptor> =
            self.values.keys().filter(|d| d.b.len() == 1 && d.b[0].1 == 1).map(|d| (d.b[0].0, d)).collect();
        for (d, v) in &self.values {
            if d.b.len() != 2 || d.b.iter().any(|(_, k)| *k != 1) {
                continue;
            }
            let (Some(d1), Some(d2)) = (singles.get(&d.b[0].0), singles.get(&d.b[1].0)) else {
                continue;
            };
            let c = cg.sub(&cg.class_of(&d.a), &cg.add(&cg.class_of(&d1.a), &cg.class_of(&d2.a)));
            let rhs = &(&chi2(&c)? * self.get(d1)?) * self.get(d2)?;
            if *v != rhs {
                return Err(Error::Inconsistent(format!("{d} disagrees with {d1} and {d2}")));
            }
        }
        Ok(())
    }

    /// All eigensystems whose principal restriction is this one.
    pub fn recover(&self) -> Result<Vec<Eigensystem>> {
        self.check_consistency()?;
        let cg = &self.cg;
        let primes = stored_primes(cg, self.bound);
        let mut chis = Vec::new();
        for chi in UnramifiedCharacter::all(cg) {
            let mut ok = true;
            for c in cg.two_torsion() {
                if c != cg.identity() && chi.value(cg, &c) != *self.get(&Descriptor::two_torsion(cg, &c))? {
                    ok = false;
                }
            }
            if ok {
                chis.push(chi);
            }
        }
        if chis.is_empty() {
            return Err(Error::Inconsistent("no character matches the two-torsion values".into()));
        }
        let mut found: Vec<Eigensystem> = Vec::new();
        let mut first_miss: Option<String> = None;
        for chi in &chis {
            let div_chi = |d: &Descriptor| -> Result<CycValue> { self.get(d)?.div(&chi.at(cg, &d.a)) };
            // alpha(p)^2 for primes outside the square classes
            let mut squares = BTreeMap::new();
            let mut refs = BTreeMap::new();
            for p in &primes {
                let c = cg.class_of(p);
                if cg.is_square(&c) {
                    continue;
                }
                let a2 = div_chi(&Descriptor::for_product(cg, vec![(*p, 2)]))?;
                let sq = if p.divides(&self.level) { a2 } else { &a2 + &chi.at(cg, p).scale(rat(p.int_norm())) };
                if !sq.is_zero() {
                    refs.entry(cg.square_coset(&c)).or_insert(*p);
                }
                squares.insert(*p, sq);
            }
            let plan = reference_plan(&refs);
            let mut radicands = Vec::new();
            let mut free_roots = Vec::new();
            for (_, p) in &plan.free {
                match self.witness_for(&squares[p]) {
                    Some(w) => free_roots.push(Ok(w)),
                    None => {
                        free_roots.push(Err(radicands.len()));
                        radicands.push(squares[p].clone());
                    }
                }
            }
            let radicands = Arc::new(radicands);
            for signs in 0u32..1 << plan.free.len() {
                let mut alpha1: BTreeMap<Ideal, AdjoinedValue> = BTreeMap::new();
                let mut coset_ref: BTreeMap<Vec<i128>, Ideal> = BTreeMap::new();
                for (i, ((coset, p), root)) in plan.free.iter().zip(&free_roots).enumerate() {
                    let sign = if signs >> i & 1 == 1 { -Rat::one() } else { Rat::one() };
                    let v = match root {
                        Ok(w) => AdjoinedValue::plain(w.scale(sign)),
                        Err(bit) => AdjoinedValue::new(CycValue::from_rat(1, sign), 1 << bit, radicands.clone())?,
                    };
                    alpha1.insert(*p, v);
                    coset_ref.insert(coset.clone(), *p);
                }
                for (coset, p, idx) in &plan.linked {
                    let mut b = vec![(*p, 1)];
                    b.extend(idx.iter().map(|i| (plan.free[*i].1, 1)));
                    let d = Descriptor::for_product(cg, b);
                    let mut den = AdjoinedValue::plain(CycValue::one(1));
                    for i in idx {
                        den = den.mul(&alpha1[&plan.free[*i].1]);
                    }
                    let v = AdjoinedValue::plain(div_chi(&d)?).mul(&den.inv()?);
                    alpha1.insert(*p, v);
                    coset_ref.insert(coset.clone(), *p);
                }
                for p in &primes {
                    if alpha1.contains_key(p) {
                        continue;
                    }
                    let c = cg.class_of(p);
                    let v = if cg.is_square(&c) {
                        AdjoinedValue::plain(div_chi(&Descriptor::for_product(cg, vec![(*p, 1)]))?)
                    } else {
                        match coset_ref.get(&cg.square_coset(&c)) {
                            None => AdjoinedValue::plain(CycValue::zero(1)),
                            Some(r) => {
                                let d = Descriptor::for_product(cg, vec![(*p, 1), (*r, 1)]);
                                AdjoinedValue::plain(div_chi(&d)?).mul(&alpha1[r].inv()?)
                            }
                        }
                    };
                    alpha1.insert(*p, v);
                }
                let Ok(cand) = Eigensystem::from_primes(cg.clone(), self.level, self.bound, chi.clone(), &alpha1)
                else {
                    continue;
                };
                match self.first_mismatch(&cand) {
                    None => {
                        if cand.validate() && !found.contains(&cand) {
                            found.push(cand);
                        }
                    }
                    Some(d) => {
                        first_miss.get_or_insert(d);
                    }
                }
            }
        }
        if found.is_empty() {
            return Err(Error::Inconsistent(first_miss.unwrap_or_else(|| "no eigensystem matches".into())));
        }
        found.sort_by_key(|e| e.to_string());
        Ok(found)
    }

    fn first_mismatch(&self, cand: &Eigensystem) -> Option<String> {
        for (d, v) in &self.values {
            let got = cand.evaluate_descriptor(d).ok().and_then(|x| x.as_cyc());
            if got.as_ref() != Some(v) {
                let partner =
                    d.b.first()
                        .map(|(p, _)| Descriptor::for_product(&self.cg, vec![(*p, 2)]).to_string())
                        .unwrap_or_else(|| "the character".into());
                return Some(format!("{d} disagrees with {partner}"));
            }
        }
        None
    }
}

/// Options for `synthesize`.
#[derive(Clone, Copy, Debug, Default)]
pub struct SynthOptions {
    /// Zero every prime outside the square classes, so that the system is
    /// its own twist by every character trivial on `Cl^2`.
    pub force_inner_twist: bool,
}

/// A random valid eigensystem with small cyclotomic-integer values.
pub fn synthesize(seed: u64, cg: Arc<ClassGroup>, level: Ideal, bound: i128, opts: SynthOptions) -> Eigensystem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let chars = UnramifiedCharacter::all(&cg);
    let chi = chars[rng.gen_range(0..chars.len())].clone();
    let m = cg.exponent() as u32;
    let width = euler_phi(m);
    let mut alpha1 = BTreeMap::new();
    for p in stored_primes(&cg, bound) {
        let v = if opts.force_inner_twist && !cg.is_square(&cg.class_of(&p)) {
            CycValue::zero(m)
        } else {
            loop {
                let c: Vec<Rat> = (0..width).map(|_| rat(rng.gen_range(-3..=3))).collect();
                if c.iter().any(|x| !x.is_zero()) {
                    break CycValue::from_coeffs(m, c).expect("positive conductor");
                }
            }
        };
        alpha1.insert(p, AdjoinedValue::plain(v));
    }
    Eigensystem::from_primes(cg, level, bound, chi, &alpha1).expect("plain values extend")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qfield::Field;

    fn group(d: i64) -> Arc<ClassGroup> {
        Arc::new(ClassGroup::new(Field::new(d).unwrap()))
    }

    fn level(cg: &ClassGroup, n: i128) -> Ideal {
        Ideal::from_int(cg.field(), n).unwrap()
    }

    #[test]
    fn eisenstein_shape_is_valid() {
        let cg = group(1);
        let n = level(&cg, 1);
        let mut alpha = BTreeMap::new();
        for p in stored_primes(&cg, 30) {
            let q = p.int_norm();
            let vals = (1..=stored_exponent(q, 30))
                .map(|k| {
                    let s: i128 = (0..=k as u32).map(|i| q.pow(i)).sum();
                    AdjoinedValue::plain(CycValue::from_rat(1, rat(s)))
                })
                .collect();
            alpha.insert(p, vals);
        }
        let chi = UnramifiedCharacter::trivial(&cg);
        let lam = Eigensystem::from_table(cg.clone(), n, 30, chi.clone(), alpha.clone()).unwrap();
        assert!(lam.validate());
        let p = stored_primes(&cg, 30)[0];
        alpha.get_mut(&p).unwrap()[1] = AdjoinedValue::plain(CycValue::from_rat(1, rat(8)));
        let bad = Eigensystem::from_table(cg, n, 30, chi, alpha).unwrap();
        assert!(!bad.validate());
    }

    #[test]
    fn twist_basics() {
        let cg = group(5);
        let n = level(&cg, 3);
        let lam = synthesize(4, cg.clone(), n, 40, SynthOptions::default());
        assert!(lam.validate());
        assert_eq!(lam.twist(&UnramifiedCharacter::trivial(&cg)), lam);
        let psi = UnramifiedCharacter::new(&cg, vec![1]).unwrap();
        let t = lam.twist(&psi);
        assert!(t.validate());
        assert_eq!(t.chi(), lam.chi());
        assert_eq!(t.twist(&psi.inverse(&cg)), lam);
        let g = Ideal::principal(cg.field().int(1, 1)).unwrap();
        assert_eq!(
            t.evaluate(&Ideal::unit(cg.field()), &g).unwrap(),
            lam.evaluate(&Ideal::unit(cg.field()), &g).unwrap()
        );
        assert_eq!(lam.restrict_to_principal(), t.restrict_to_principal());
        assert_eq!(lam.inner_twists().len(), 1);
        assert_eq!(lam.support_subgroup().len(), 2);
    }

    #[test]
    fn recover_pair_and_self_twist() {
        let cg = group(5);
        let n = level(&cg, 3);
        let lam = synthesize(9, cg.clone(), n, 60, SynthOptions::default());
        let r = lam.restrict_to_principal().with_witnesses(lam.witnesses());
        let rec = r.recover().unwrap();
        assert_eq!(rec.len(), 2);
        assert!(rec.contains(&lam));
        assert_eq!(rec, lam.twist_orbit());

        let st = synthesize(9, cg.clone(), n, 60, SynthOptions { force_inner_twist: true });
        assert_eq!(st.inner_twists().len(), 2);
        assert_eq!(st.support_subgroup().len(), 1);
        let rec = st.restrict_to_principal().recover().unwrap();
        assert_eq!(rec, vec![st]);
    }

    #[test]
    fn recover_without_witnesses_keeps_roots() {
        let cg = group(5);
        let n = level(&cg, 1);
        let lam = synthesize(2, cg.clone(), n, 60, SynthOptions::default());
        let r = lam.restrict_to_principal();
        let rec = r.recover().unwrap();
        assert_eq!(rec.len(), 2);
        for e in &rec {
            assert!(e.validate());
            assert_eq!(e.restrict_to_principal(), r);
            assert!(e.table().values().any(|v| v[0].mask() != 0));
        }
    }

    #[test]
    fn sign_perturbation_changes_restriction() {
        let cg = group(5);
        let n = level(&cg, 1);
        let lam = synthesize(3, cg.clone(), n, 60, SynthOptions::default());
        let r = lam.restrict_to_principal();
        let odd: Vec<Ideal> = lam.primes().into_iter().filter(|p| !cg.is_square(&cg.class_of(p))).collect();
        let mut alpha1: BTreeMap<Ideal, AdjoinedValue> = lam.table().iter().map(|(p, v)| (*p, v[0].clone())).collect();
        let flipped = alpha1[&odd[1]].neg();
        alpha1.insert(odd[1], flipped);
        let other = Eigensystem::from_primes(cg.clone(), n, 60, lam.chi().clone(), &alpha1).unwrap();
        assert!(other.validate());
        assert_ne!(other.restrict_to_principal(), r);

        let mut broken = r.clone();
        let key = broken
            .values
            .keys()
            .find(|d| {
                d.b.len() == 2 && d.b.iter().all(|(p, _)| odd.contains(p)) && !d.b.iter().any(|(p, _)| *p == odd[0])
            })
            .unwrap()
            .clone();
        let v = broken.values[&key].clone();
        broken.values.insert(key, -&v);
        assert!(matches!(broken.recover(), Err(Error::Inconsistent(_))));
    }

    #[test]
    fn odd_class_number() {
        let cg = group(23);
        let n = level(&cg, 2);
        let lam = synthesize(5, cg.clone(), n, 60, SynthOptions::default());
        assert_eq!(lam.inner_twists().len(), 1);
        let rec = lam.restrict_to_principal().recover().unwrap();
        assert_eq!(rec.len(), 3);
        let chis: BTreeSet<_> = rec.iter().map(|e| e.chi().clone()).collect();
        assert_eq!(chis.len(), 3);
        assert!(rec.contains(&lam));
    }

    #[test]
    fn class_number_four() {
        for d in [17, 21] {
            let cg = group(d);
            assert_eq!(cg.order(), 4);
            let n = level(&cg, 1);
            for seed in 0..3 {
                let lam = synthesize(seed, cg.clone(), n, 60, SynthOptions::default());
                let r = lam.restrict_to_principal().with_witnesses(lam.witnesses());
                let rec = r.recover().unwrap();
                assert_eq!(rec, lam.twist_orbit(), "d={d} seed={seed}");
            }
            let st = synthesize(7, cg.clone(), n, 60, SynthOptions { force_inner_twist: true });
            let rec = st.restrict_to_principal().recover().unwrap();
            assert_eq!(rec.len() * st.inner_twists().len(), 4);
        }
    }
}
