//! Literal syntax for field objects and the JSON document formats.
//!
//! Literals:
//! - element `x+y*w` (rationals as `p/q`)
//! - ideal `(g1, g2, ...)` or HNF `[a,b,c]`, optionally `/den`
//! - symbol `c:d`, matrix `[[a,b],[c,d]]`
//! - pseudo-lattice `{b1, b2, U}`, point `{L, Lp}` or `{L, Lp, [x,y]}`
//! - formal sum `[{coeff, point}, ...]`
//! - operator `Ta(a)`, `Taa(a)`, `D(x)`, `Wq(q)`, `Ad(m,d)`, `dual:...`, `Comp[...]`

use std::collections::BTreeMap;
use std::sync::Arc;

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::cyclo::CycValue;
use crate::eigsys::{AdjoinedValue, Descriptor, Eigensystem, PrincipalRestriction, UnramifiedCharacter};
use crate::error::{Error, Result};
use crate::heckemat::HeckeMatrixSet;
use crate::heckeops::Op;
use crate::ideals::{ClassGroup, Ideal};
use crate::linmod::{Lattice, Mat2};
use crate::modpts::{FormalSum, ModPoint};
use crate::qfield::{Elt, Field, Rat};

pub const SCHEMA: u32 = 1;

fn perr(what: &str, s: &str) -> Error {
    Error::Parse(format!("bad {what} literal '{s}'"))
}

/// Splits on commas outside any brackets.
fn split_top(s: &str) -> Result<Vec<&str>> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, ch) in s.char_indices() {
        match ch {
            '(' | '[' | '{' => depth += 1,
            ')' | ']' | '}' => {
                depth -= 1;
                if depth < 0 {
                    return Err(perr("bracketed", s));
                }
            }
            ',' if depth == 0 => {
                out.push(s[start..i].trim());
                start = i + 1;
            }
            _ => {}
        }
    }
    if depth != 0 {
        return Err(perr("bracketed", s));
    }
    let last = s[start..].trim();
    if !last.is_empty() || !out.is_empty() {
        out.push(last);
    }
    Ok(out)
}

fn inner<'a>(s: &'a str, open: char, close: char, what: &str) -> Result<&'a str> {
    let t = s.trim();
    if t.len() >= 2 && t.starts_with(open) && t.ends_with(close) {
        let body = &t[1..t.len() - 1];
        // the opening bracket must close at the very end
        let mut depth = 0i32;
        for (i, ch) in t.char_indices() {
            match ch {
                '(' | '[' | '{' => depth += 1,
                ')' | ']' | '}' => {
                    depth -= 1;
                    if depth == 0 && i != t.len() - 1 {
                        return Err(perr(what, s));
                    }
                }
                _ => {}
            }
        }
        Ok(body)
    } else {
        Err(perr(what, s))
    }
}

pub fn parse_rat(s: &str) -> Result<Rat> {
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    let r = match t.split_once('/') {
        Some((p, q)) => {
            let p: i128 = p.parse().map_err(|_| perr("rational", s))?;
            let q: i128 = q.parse().map_err(|_| perr("rational", s))?;
            if q == 0 {
                return Err(perr("rational", s));
            }
            Rat::new(p, q)
        }
        None => Rat::from_integer(t.parse().map_err(|_| perr("rational", s))?),
    };
    Ok(r)
}

pub fn parse_elt(field: Field, s: &str) -> Result<Elt> {
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    if t.is_empty() {
        return Err(perr("element", s));
    }
    let mut terms = Vec::new();
    let mut start = 0;
    let bytes = t.as_bytes();
    for i in 1..bytes.len() {
        if (bytes[i] == b'+' || bytes[i] == b'-') && !matches!(bytes[i - 1], b'*' | b'/' | b'+' | b'-') {
            terms.push(&t[start..i]);
            start = i;
        }
    }
    terms.push(&t[start..]);
    let (mut x, mut y) = (Rat::zero(), Rat::zero());
    for term in terms {
        let term = term.strip_prefix('+').unwrap_or(term);
        if let Some(c) = term.strip_suffix('w') {
            let c = c.strip_suffix('*').unwrap_or(c);
            y += match c {
                "" => Rat::from_integer(1),
                "-" => Rat::from_integer(-1),
                _ => parse_rat(c).map_err(|_| perr("element", s))?,
            };
        } else {
            x += parse_rat(term).map_err(|_| perr("element", s))?;
        }
    }
    Ok(field.elt(x, y))
}

pub fn parse_ideal(field: Field, s: &str) -> Result<Ideal> {
    let t = s.trim();
    if t.starts_with('(') {
        let gens = split_top(inner(t, '(', ')', "ideal")?)?
            .into_iter()
            .map(|g| parse_elt(field, g))
            .collect::<Result<Vec<_>>>()?;
        if gens.is_empty() || gens.iter().all(|g| g.is_zero()) {
            return Err(Error::ZeroIdeal);
        }
        return Ideal::generated(field, &gens);
    }
    let (body, den) = match t.rfind(']') {
        Some(i) if i + 1 < t.len() => {
            let rest = t[i + 1..].trim();
            let den = rest.strip_prefix('/').ok_or_else(|| perr("ideal", s))?;
            (&t[..=i], den.trim().parse::<i128>().map_err(|_| perr("ideal", s))?)
        }
        _ => (t, 1),
    };
    let parts = split_top(inner(body, '[', ']', "ideal")?)?;
    if parts.len() != 3 || den <= 0 {
        return Err(perr("ideal", s));
    }
    let v: Vec<i128> = parts.iter().map(|p| p.parse::<i128>().map_err(|_| perr("ideal", s))).collect::<Result<_>>()?;
    Ok(Ideal::from_hnf(field, v[0], v[1], v[2])?.scale_rat(Rat::new(1, den)))
}

pub fn parse_symbol(field: Field, s: &str) -> Result<(Elt, Elt)> {
    let (c, d) = s.split_once(':').ok_or_else(|| perr("symbol", s))?;
    Ok((parse_elt(field, c)?, parse_elt(field, d)?))
}

fn parse_vec2(field: Field, s: &str) -> Result<[Elt; 2]> {
    let parts = split_top(inner(s, '[', ']', "vector")?)?;
    if parts.len() != 2 {
        return Err(perr("vector", s));
    }
    Ok([parse_elt(field, parts[0])?, parse_elt(field, parts[1])?])
}

pub fn parse_mat(field: Field, s: &str) -> Result<Mat2> {
    let rows = split_top(inner(s, '[', ']', "matrix")?)?;
    if rows.len() != 2 {
        return Err(perr("matrix", s));
    }
    let r0 = parse_vec2(field, rows[0])?;
    let r1 = parse_vec2(field, rows[1])?;
    Ok(Mat2::new(r0[0], r0[1], r1[0], r1[1]))
}

pub fn parse_lattice(field: Field, s: &str) -> Result<Lattice> {
    let parts = split_top(inner(s, '{', '}', "lattice")?)?;
    if parts.len() != 3 {
        return Err(perr("lattice", s));
    }
    let b1 = parse_ideal(field, parts[0])?;
    let b2 = parse_ideal(field, parts[1])?;
    let u = parse_mat(field, parts[2])?;
    Lattice::from_pseudo_basis(&b1, &b2, &u)
}

pub fn parse_point(field: Field, s: &str) -> Result<ModPoint> {
    let parts = split_top(inner(s, '{', '}', "point")?)?;
    match parts.len() {
        2 => Ok(ModPoint::gamma0(parse_lattice(field, parts[0])?, parse_lattice(field, parts[1])?)),
        3 => Ok(ModPoint::gamma1(
            parse_lattice(field, parts[0])?,
            parse_lattice(field, parts[1])?,
            parse_vec2(field, parts[2])?,
        )),
        _ => Err(perr("point", s)),
    }
}

pub fn parse_formal_sum(level: &Ideal, s: &str) -> Result<FormalSum> {
    let field = level.field();
    let mut terms = Vec::new();
    for item in split_top(inner(s, '[', ']', "formal sum")?)? {
        let parts = split_top(inner(item, '{', '}', "formal sum term")?)?;
        if parts.len() != 2 {
            return Err(perr("formal sum term", item));
        }
        terms.push((parse_rat(parts[0])?, parse_point(field, parts[1])?));
    }
    Ok(FormalSum::from_terms(level, terms))
}

pub fn parse_op(field: Field, s: &str) -> Result<Op> {
    let t = s.trim();
    if let Some(rest) = t.strip_prefix("dual:") {
        return match parse_op(field, rest)? {
            Op::Ta(a) => Ok(Op::TaDual(a)),
            Op::Taa(a) => Ok(Op::TaaDual(a)),
            Op::Wq(q) => Ok(Op::WqDual(q)),
            _ => Err(Error::Parse(format!("no dual form for '{rest}'"))),
        };
    }
    if let Some(rest) = t.strip_prefix("Comp") {
        let ops = split_top(inner(rest, '[', ']', "operator")?)?
            .into_iter()
            .map(|o| parse_op(field, o))
            .collect::<Result<Vec<_>>>()?;
        return Ok(Op::Comp(ops));
    }
    let open = t.find('(').ok_or_else(|| perr("operator", s))?;
    let name = &t[..open];
    let args = split_top(inner(&t[open..], '(', ')', "operator")?)?;
    let one = |kind: fn(Ideal) -> Op| -> Result<Op> {
        if args.len() != 1 {
            return Err(perr("operator", s));
        }
        Ok(kind(parse_ideal(field, args[0])?))
    };
    match name {
        "Ta" => one(Op::Ta),
        "Taa" => one(Op::Taa),
        "Wq" => one(Op::Wq),
        "D" if args.len() == 1 => Ok(Op::Diamond(parse_elt(field, args[0])?)),
        "Ad" if args.len() == 2 => Ok(Op::Ad { m: parse_ideal(field, args[0])?, d: parse_ideal(field, args[1])? }),
        _ => Err(perr("operator", s)),
    }
}

/// `Taa(a)T(p)^k T(q)...`, as printed by `Descriptor`.
pub fn parse_descriptor(cg: &ClassGroup, s: &str) -> Result<Descriptor> {
    let field = cg.field();
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    let rest = t.strip_prefix("Taa").ok_or_else(|| perr("descriptor", s))?;
    let (a, mut rest) = take_group(rest, s)?;
    let a = parse_ideal(field, a)?;
    let mut b = Vec::new();
    while !rest.is_empty() {
        let r = rest.strip_prefix('T').ok_or_else(|| perr("descriptor", s))?;
        let (p, r) = take_group(r, s)?;
        let p = parse_ideal(field, p)?;
        let (k, r) = match r.strip_prefix('^') {
            Some(r) => {
                let end = r.find(|c: char| !c.is_ascii_digit()).unwrap_or(r.len());
                (r[..end].parse::<u32>().map_err(|_| perr("descriptor", s))?, &r[end..])
            }
            None => (1, r),
        };
        b.push((p, k));
        rest = r;
    }
    Descriptor::new(cg, a, b)
}

/// Splits a leading `( ... )` group off `s`.
fn take_group<'a>(s: &'a str, whole: &str) -> Result<(&'a str, &'a str)> {
    if !s.starts_with('(') {
        return Err(perr("descriptor", whole));
    }
    let mut depth = 0;
    for (i, ch) in s.char_indices() {
        match ch {
            '(' | '[' => depth += 1,
            ')' | ']' => {
                depth -= 1;
                if depth == 0 {
                    return Ok((&s[1..i], &s[i + 1..]));
                }
            }
            _ => {}
        }
    }
    Err(perr("descriptor", whole))
}

// ---------------------------------------------------------------------------
// documents

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CycDoc {
    pub m: u32,
    pub coeffs: Vec<String>,
}

impl CycDoc {
    pub fn from_value(v: &CycValue) -> CycDoc {
        CycDoc { m: v.conductor(), coeffs: v.coeffs().iter().map(|c| c.to_string()).collect() }
    }

    pub fn value(&self) -> Result<CycValue> {
        let c = self.coeffs.iter().map(|x| parse_rat(x)).collect::<Result<Vec<_>>>()?;
        CycValue::from_coeffs(self.m, c)
    }
}

fn check_header(schema: u32, kind: &str, want: &str) -> Result<()> {
    if schema != SCHEMA {
        return Err(Error::Document(format!("unsupported schema {schema}")));
    }
    if kind != want {
        return Err(Error::Document(format!("expected a '{want}' document, found '{kind}'")));
    }
    Ok(())
}

pub fn to_json<T: Serialize>(doc: &T) -> String {
    let mut s = serde_json::to_string_pretty(doc).expect("documents serialise");
    s.push('\n');
    s
}

pub fn from_json<'a, T: Deserialize<'a>>(s: &'a str) -> Result<T> {
    serde_json::from_str(s).map_err(|e| Error::Document(e.to_string()))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatrixSetDoc {
    pub schema: u32,
    pub kind: String,
    pub d: i64,
    pub level: String,
    pub descriptor: String,
    pub delta: String,
    pub matrices: Vec<String>,
}

/// Typed contents of a matrix-set document.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MatrixSetData {
    pub field: Field,
    pub level: Ideal,
    pub op: Op,
    pub delta: Elt,
    pub matrices: Vec<Mat2>,
}

impl MatrixSetDoc {
    pub fn from_set(set: &HeckeMatrixSet) -> MatrixSetDoc {
        MatrixSetDoc {
            schema: SCHEMA,
            kind: "hecke-matrices".into(),
            d: set.field().d(),
            level: set.level.to_string(),
            descriptor: set.descriptor(),
            delta: set.delta.to_string(),
            matrices: set.matrices.iter().map(|m| m.to_string()).collect(),
        }
    }

    pub fn data(&self) -> Result<MatrixSetData> {
        check_header(self.schema, &self.kind, "hecke-matrices")?;
        let field = Field::new(self.d)?;
        Ok(MatrixSetData {
            field,
            level: parse_ideal(field, &self.level)?,
            op: parse_op(field, &self.descriptor)?,
            delta: parse_elt(field, &self.delta)?,
            matrices: self.matrices.iter().map(|m| parse_mat(field, m)).collect::<Result<_>>()?,
        })
    }
}

impl MatrixSetData {
    pub fn of(set: &HeckeMatrixSet) -> MatrixSetData {
        MatrixSetData {
            field: set.field(),
            level: set.level,
            op: set.kind.operator(),
            delta: set.delta,
            matrices: set.matrices.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TermDoc {
    pub coeff: String,
    pub point: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FormalSumDoc {
    pub schema: u32,
    pub kind: String,
    pub d: i64,
    pub level: String,
    pub terms: Vec<TermDoc>,
}

impl FormalSumDoc {
    pub fn from_sum(v: &FormalSum) -> FormalSumDoc {
        FormalSumDoc {
            schema: SCHEMA,
            kind: "formal-sum".into(),
            d: v.level().field().d(),
            level: v.level().to_string(),
            terms: v.terms().map(|(p, c)| TermDoc { coeff: c.to_string(), point: p.literal() }).collect(),
        }
    }

    pub fn sum(&self) -> Result<FormalSum> {
        check_header(self.schema, &self.kind, "formal-sum")?;
        let field = Field::new(self.d)?;
        let level = parse_ideal(field, &self.level)?;
        let terms = self
            .terms
            .iter()
            .map(|t| Ok((parse_rat(&t.coeff)?, parse_point(field, &t.point)?)))
            .collect::<Result<Vec<_>>>()?;
        Ok(FormalSum::from_terms(&level, terms))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValueDoc {
    pub m: u32,
    pub coeffs: Vec<String>,
    #[serde(default, skip_serializing_if = "is_zero_mask")]
    pub mask: u32,
}

fn is_zero_mask(m: &u32) -> bool {
    *m == 0
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrimeDoc {
    pub prime: String,
    pub values: Vec<ValueDoc>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SystemDoc {
    pub chi: Vec<i128>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub radicands: Vec<CycDoc>,
    pub alpha: Vec<PrimeDoc>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EigensystemsDoc {
    pub schema: u32,
    pub kind: String,
    pub d: i64,
    pub level: String,
    pub bound: i128,
    pub systems: Vec<SystemDoc>,
}

fn system_doc(e: &Eigensystem) -> SystemDoc {
    let radicands = e
        .table()
        .values()
        .flatten()
        .find(|v| !v.radicands().is_empty())
        .map(|v| v.radicands().iter().map(CycDoc::from_value).collect())
        .unwrap_or_default();
    let alpha = e
        .primes()
        .into_iter()
        .map(|p| PrimeDoc {
            prime: p.to_string(),
            values: e.table()[&p]
                .iter()
                .map(|v| {
                    let c = CycDoc::from_value(v.base());
                    ValueDoc { m: c.m, coeffs: c.coeffs, mask: v.mask() }
                })
                .collect(),
        })
        .collect();
    SystemDoc { chi: e.chi().exps.clone(), radicands, alpha }
}

impl EigensystemsDoc {
    /// All systems must share field, level and bound.
    pub fn from_systems(systems: &[Eigensystem]) -> Result<EigensystemsDoc> {
        let first = systems.first().ok_or_else(|| Error::Document("no eigensystems to write".into()))?;
        for e in systems {
            if e.class_group().field() != first.class_group().field()
                || e.level() != first.level()
                || e.bound() != first.bound()
            {
                return Err(Error::Document("eigensystems differ in field, level or bound".into()));
            }
        }
        Ok(EigensystemsDoc {
            schema: SCHEMA,
            kind: "eigensystems".into(),
            d: first.class_group().field().d(),
            level: first.level().to_string(),
            bound: first.bound(),
            systems: systems.iter().map(system_doc).collect(),
        })
    }

    pub fn systems(&self, cg: Arc<ClassGroup>) -> Result<Vec<Eigensystem>> {
        check_header(self.schema, &self.kind, "eigensystems")?;
        let field = Field::new(self.d)?;
        if cg.field() != field {
            return Err(Error::FieldMismatch);
        }
        let level = parse_ideal(field, &self.level)?;
        self.systems
            .iter()
            .map(|s| {
                let chi = UnramifiedCharacter::new(&cg, s.chi.clone())?;
                let rads = Arc::new(s.radicands.iter().map(CycDoc::value).collect::<Result<Vec<_>>>()?);
                let mut alpha = BTreeMap::new();
                for pd in &s.alpha {
                    let p = parse_ideal(field, &pd.prime)?;
                    let vals = pd
                        .values
                        .iter()
                        .map(|v| {
                            let base = CycDoc { m: v.m, coeffs: v.coeffs.clone() }.value()?;
                            if v.mask == 0 {
                                Ok(AdjoinedValue::plain(base))
                            } else {
                                AdjoinedValue::new(base, v.mask, rads.clone())
                            }
                        })
                        .collect::<Result<Vec<_>>>()?;
                    alpha.insert(p, vals);
                }
                Eigensystem::from_table(cg.clone(), level, self.bound, chi, alpha)
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RestrictionValueDoc {
    pub op: String,
    pub m: u32,
    pub coeffs: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RestrictionDoc {
    pub schema: u32,
    pub kind: String,
    pub d: i64,
    pub level: String,
    pub bound: i128,
    /// Character values on the two-torsion classes, as exponents of a root
    /// of unity of order the group exponent.
    pub chi_two_torsion: Vec<(Vec<i128>, i128)>,
    pub values: Vec<RestrictionValueDoc>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub witnesses: Vec<CycDoc>,
}

impl RestrictionDoc {
    pub fn from_restriction(r: &PrincipalRestriction) -> RestrictionDoc {
        let cg = &r.cg;
        let e = cg.exponent() as u32;
        let chi_two_torsion = cg
            .two_torsion()
            .into_iter()
            .filter_map(|c| {
                let v = r.values.iter().find(|(d, _)| d.b.is_empty() && cg.class_of(&d.a) == c)?.1;
                (0..e as i64).find(|k| CycValue::zeta_pow(e, *k) == *v).map(|k| (c.0.clone(), k as i128))
            })
            .collect();
        RestrictionDoc {
            schema: SCHEMA,
            kind: "restriction".into(),
            d: cg.field().d(),
            level: r.level.to_string(),
            bound: r.bound,
            chi_two_torsion,
            values: r
                .values
                .iter()
                .map(|(d, v)| {
                    let c = CycDoc::from_value(v);
                    RestrictionValueDoc { op: d.to_string(), m: c.m, coeffs: c.coeffs }
                })
                .collect(),
            witnesses: r.witnesses.iter().map(CycDoc::from_value).collect(),
        }
    }

    pub fn restriction(&self, cg: Arc<ClassGroup>) -> Result<PrincipalRestriction> {
        check_header(self.schema, &self.kind, "restriction")?;
        let field = Field::new(self.d)?;
        if cg.field() != field {
            return Err(Error::FieldMismatch);
        }
        let mut values = BTreeMap::new();
        for v in &self.values {
            let d = parse_descriptor(&cg, &v.op)?;
            let val = CycDoc { m: v.m, coeffs: v.coeffs.clone() }.value()?;
            if values.insert(d, val).is_some() {
                return Err(Error::Document(format!("duplicate value for {}", v.op)));
            }
        }
        Ok(PrincipalRestriction {
            level: parse_ideal(field, &self.level)?,
            bound: self.bound,
            values,
            witnesses: self.witnesses.iter().map(CycDoc::value).collect::<Result<_>>()?,
            cg,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eigsys::{synthesize, SynthOptions};
    use crate::ideals::primes_above;
    use crate::modpts::Level;
    use proptest::prelude::*;

    #[test]
    fn element_literals() {
        let k = Field::new(5).unwrap();
        for s in ["1-w", "1/2+3*w", "-w", "0", "7", "-3/4*w", "w"] {
            assert_eq!(parse_elt(k, s).unwrap().to_string(), s);
        }
        assert_eq!(parse_elt(k, " 2 + w ").unwrap(), k.int(2, 1));
        assert_eq!(parse_elt(k, "-1-2w").unwrap(), k.int(-1, -2));
        assert!(parse_elt(k, "1+").is_err());
        assert!(parse_elt(k, "x").is_err());
    }

    #[test]
    fn ideal_literals() {
        let k = Field::new(5).unwrap();
        let p2 = primes_above(k, 2)[0].0;
        assert_eq!(parse_ideal(k, &p2.to_string()).unwrap(), p2);
        assert_eq!(parse_ideal(k, "(2, 1+w)").unwrap(), p2);
        let half = p2.scale_rat(Rat::new(1, 3));
        assert_eq!(parse_ideal(k, &half.to_string()).unwrap(), half);
        assert!(parse_ideal(k, "(0)").is_err());
        assert!(parse_ideal(k, "[2,5,1]").is_err());
    }

    #[test]
    fn operator_literals() {
        let k = Field::new(5).unwrap();
        for s in ["Ta([2,1,1])", "dual:Taa([3,1,1])", "Comp[Wq([2,1,1]),D(1+w)]", "Ad([2,1,1],[3,0,3])"] {
            assert_eq!(parse_op(k, s).unwrap().to_string(), s);
        }
        assert!(parse_op(k, "Tx([2,1,1])").is_err());
        assert!(parse_op(k, "dual:Ad([2,1,1],[1,0,1])").is_err());
    }

    #[test]
    fn points_and_sums() {
        let k = Field::new(5).unwrap();
        let cg = Arc::new(ClassGroup::new(k));
        let n = primes_above(k, 3)[0].0;
        let level = Level::new(cg, &n).unwrap();
        let mut v = FormalSum::zero(&n);
        for (i, p) in level.standard_points0().into_iter().enumerate() {
            assert_eq!(parse_point(k, &p.literal()).unwrap(), p);
            v.add_term(p, Rat::new(i as i128 + 1, 2));
        }
        let p1 = level.standard_point1(1, 0);
        assert_eq!(parse_point(k, &p1.literal()).unwrap(), p1);
        assert_eq!(parse_formal_sum(&n, &v.literal()).unwrap(), v);
        let doc = FormalSumDoc::from_sum(&v);
        let back: FormalSumDoc = from_json(&to_json(&doc)).unwrap();
        assert_eq!(back.sum().unwrap(), v);
    }

    #[test]
    fn eigensystem_documents() {
        let k = Field::new(5).unwrap();
        let cg = Arc::new(ClassGroup::new(k));
        let n = Ideal::from_int(k, 3).unwrap();
        let lam = synthesize(1, cg.clone(), n, 30, SynthOptions::default());
        let r = lam.restrict_to_principal();
        let rec = r.recover().unwrap();
        let doc = EigensystemsDoc::from_systems(&rec).unwrap();
        let text = to_json(&doc);
        let back: EigensystemsDoc = from_json(&text).unwrap();
        assert_eq!(back.systems(cg.clone()).unwrap(), rec);
        assert_eq!(to_json(&back), text);
        let rdoc = RestrictionDoc::from_restriction(&r);
        let rback: RestrictionDoc = from_json(&to_json(&rdoc)).unwrap();
        assert_eq!(rback.restriction(cg).unwrap(), r);
    }

    proptest! {
        #[test]
        fn element_round_trip(x in -50i128..50, y in -50i128..50, q in 1i128..9, d in prop::sample::select(vec![1i64, 2, 3, 5, 23])) {
            let k = Field::new(d).unwrap();
            let e = k.elt(Rat::new(x, q), Rat::new(y, q + 1));
            prop_assert_eq!(parse_elt(k, &e.to_string()).unwrap(), e);
        }

        #[test]
        fn matrix_round_trip(v in prop::collection::vec(-20i128..20, 8)) {
            let k = Field::new(2).unwrap();
            let m = Mat2::new(k.int(v[0], v[1]), k.int(v[2], v[3]), k.int(v[4], v[5]), k.int(v[6], v[7]));
            prop_assert_eq!(parse_mat(k, &m.to_string()).unwrap(), m);
        }

        #[test]
        fn ideal_round_trip(x in -30i128..30, y in -30i128..30, z in 1i128..20) {
            let k = Field::new(5).unwrap();
            prop_assume!(x != 0 || y != 0);
            let i = Ideal::generated(k, &[k.int(x, y), k.from_int(z)]).unwrap();
            prop_assert_eq!(parse_ideal(k, &i.to_string()).unwrap(), i);
        }
    }
}
