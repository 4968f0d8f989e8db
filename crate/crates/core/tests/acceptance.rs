use std::collections::{BTreeMap, BTreeSet};
use std::mem::discriminant;
use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use fmf_core::eigsys::{synthesize, SynthOptions};
use fmf_core::heckemat::{agrees_with_general, verify_sublattice_action};
use fmf_core::heckeops::Normalization;
use fmf_core::ideals::{ideals_of_norm, ideals_up_to_norm, phi, primes_above, psi, sublattice_count};
use fmf_core::modpts::{random_gamma0, random_gamma1};
use fmf_core::msym::{is_unimodular, P1};
use fmf_core::suite::{matrix_fixtures, run_all, standard_fixtures};
use fmf_core::{ClassGroup, Elt, Field, FormalSum, Ideal, Lattice, Level, Mat2, Result};

struct Outcome {
    passed: bool,
    detail: String,
}

fn ok(detail: impl Into<String>) -> Outcome {
    Outcome { passed: true, detail: detail.into() }
}

fn fail(detail: impl Into<String>) -> Outcome {
    Outcome { passed: false, detail: detail.into() }
}

fn run(id: usize, title: &str, limit: Duration, body: impl FnOnce() -> Result<Outcome>) -> bool {
    let start = Instant::now();
    let out = body().unwrap_or_else(|e| fail(format!("error: {e}")));
    let took = start.elapsed();
    let in_time = took <= limit;
    let passed = out.passed && in_time;
    println!(
        "criterion {id} [{}] {title}: {:.2}s of {}s{}{}",
        if passed { "PASS" } else { "FAIL" },
        took.as_secs_f64(),
        limit.as_secs(),
        if out.detail.is_empty() { String::new() } else { format!(", {}", out.detail) },
        if in_time { "" } else { ", over time" },
    );
    passed
}

fn class_numbers() -> Result<Outcome> {
    let want = [(1, 1), (5, 2), (23, 3), (31, 3)];
    let mut got = Vec::new();
    for (d, h) in want {
        let order = ClassGroup::new(Field::new(d)?).order();
        if order != h {
            return Ok(fail(format!("d={d} gives {order}, want {h}")));
        }
        got.push(order.to_string());
    }
    Ok(ok(format!("h = {}", got.join(","))))
}

fn projective_lines() -> Result<Outcome> {
    let mut levels = 0;
    for d in [1, 5] {
        let f = Field::new(d)?;
        for n in ideals_up_to_norm(f, 200) {
            let p1 = P1::new(&n)?;
            let residues = n.residues();
            let coprime = residues
                .iter()
                .filter(|r| !r.is_zero() && Ideal::principal(**r).map(|i| i.is_coprime(&n)).unwrap_or(false))
                .count() as i128;
            let coprime = if n.is_unit_ideal() { 1 } else { coprime };
            if p1.len() as i128 != psi(&n) || p1.units().len() as i128 != phi(&n) || coprime != phi(&n) {
                return Ok(fail(format!("d={d} n={n}: #P1 {} units {}", p1.len(), p1.units().len())));
            }
            if n.int_norm() <= 40 {
                // unimodular pairs mod n, counted directly
                let pairs = residues
                    .iter()
                    .flat_map(|c| residues.iter().map(move |e| (c, e)))
                    .filter(|(c, e)| is_unimodular(c, e, &n))
                    .count() as i128;
                if pairs != psi(&n) * phi(&n) {
                    return Ok(fail(format!("d={d} n={n}: {pairs} unimodular pairs")));
                }
            }
            levels += 1;
        }
    }
    Ok(ok(format!("{levels} levels")))
}

/// Row-style integer HNF in `Z^4`, rows upper triangular with positive pivots.
type Hnf4 = [[i128; 4]; 4];

/// Multiplication by omega on one component, coordinates in the basis `1, omega`.
fn omega_on(f: Field, x: i128, y: i128) -> (i128, i128) {
    (-f.omega_norm() * y, x + f.omega_trace() * y)
}

fn omega_row(f: Field, r: &[i128; 4]) -> [i128; 4] {
    let (a, b) = omega_on(f, r[0], r[1]);
    let (c, d) = omega_on(f, r[2], r[3]);
    [a, b, c, d]
}

fn in_span(h: &Hnf4, v: [i128; 4]) -> bool {
    let mut v = v;
    for (i, row) in h.iter().enumerate() {
        if v[i] % row[i] != 0 {
            return false;
        }
        let q = v[i] / row[i];
        for (x, r) in v.iter_mut().zip(row) {
            *x -= q * r;
        }
    }
    true
}

/// Omega-stable `2x2` row HNFs with the given determinant.
fn stable_planes(f: Field, det: i128) -> Vec<(i128, i128, i128)> {
    let mut out = Vec::new();
    for a in (1..=det).filter(|a| det % a == 0) {
        let c = det / a;
        for b in 0..c {
            // rows (a, b) and (0, c); stability under omega
            let stable = [(a, b), (0, c)].iter().all(|&(x, y)| {
                let (u, v) = omega_on(f, x, y);
                u % a == 0 && (v - (u / a) * b) % c == 0
            });
            if stable {
                out.push((a, b, c));
            }
        }
    }
    out
}

/// All O-stable sublattices of `O^2` with Z-index `norm`, by brute force.
fn brute_sublattices(f: Field, norm: i128) -> Vec<Hnf4> {
    let mut out = Vec::new();
    for n1 in (1..=norm).filter(|n1| norm % n1 == 0) {
        let n2 = norm / n1;
        for &(d3, x34, d4) in &stable_planes(f, n2) {
            for &(d1, x12, d2) in &stable_planes(f, n1) {
                for x13 in 0..d3 {
                    for x14 in 0..d4 {
                        for x23 in 0..d3 {
                            for x24 in 0..d4 {
                                let h = [[d1, x12, x13, x14], [0, d2, x23, x24], [0, 0, d3, x34], [0, 0, 0, d4]];
                                if h.iter().all(|r| in_span(&h, omega_row(f, r))) {
                                    out.push(h);
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    out
}

fn ideal_of_plane(f: Field, a: i128, b: i128, c: i128) -> Result<Ideal> {
    Ideal::generated(f, &[f.int(a, b), f.int(0, c)])
}

fn sublattice_counts() -> Result<Outcome> {
    let mut checked = 0;
    for d in [1, 5] {
        let f = Field::new(d)?;
        let std = Lattice::standard(f);
        for norm in 1..=50 {
            let mut by_index: BTreeMap<Ideal, BTreeSet<Lattice>> = BTreeMap::new();
            for h in brute_sublattices(f, norm) {
                let top = ideal_of_plane(f, h[0][0], h[0][1], h[1][1])?;
                let bottom = ideal_of_plane(f, h[2][2], h[2][3], h[3][3])?;
                let rows: Vec<[Elt; 2]> = h.iter().map(|r| [f.int(r[0], r[1]), f.int(r[2], r[3])]).collect();
                by_index.entry(top.mul(&bottom)).or_default().insert(Lattice::generated(f, &rows)?);
            }
            let ideals: BTreeSet<Ideal> = ideals_of_norm(f, norm).into_iter().collect();
            let seen: BTreeSet<Ideal> = by_index.keys().copied().collect();
            if ideals != seen {
                return Ok(fail(format!("d={d} norm {norm}: index ideals differ")));
            }
            for (b, subs) in &by_index {
                let mine: BTreeSet<Lattice> = std.sublattices(b)?.into_iter().collect();
                if subs.len() as i128 != sublattice_count(b) || &mine != subs {
                    return Ok(fail(format!("d={d} b={b}: brute {} vs {}", subs.len(), sublattice_count(b))));
                }
                checked += 1;
            }
        }
    }
    Ok(ok(format!("{checked} index ideals")))
}

fn matrix_sets() -> Result<Outcome> {
    let fixtures = matrix_fixtures()?;
    let mut per_kind: BTreeMap<String, usize> = BTreeMap::new();
    for fx in &fixtures {
        let report = verify_sublattice_action(&fx.set, &fx.level)?;
        if !report.passed() || !agrees_with_general(&fx.set)? {
            return Ok(fail(format!("{}: {}", fx.name, report.messages.join("; "))));
        }
        let kind = format!("{:?}", discriminant(&fx.set.kind));
        *per_kind.entry(kind).or_default() += 1;
    }
    if per_kind.len() < 10 || per_kind.values().any(|&c| c < 2) {
        return Ok(fail(format!("coverage {:?}", per_kind.values().collect::<Vec<_>>())));
    }
    Ok(ok(format!("{} sets, {} cases", fixtures.len(), per_kind.len())))
}

fn relation_suite() -> Result<Outcome> {
    let checks = run_all()?;
    let failed: Vec<&str> = checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
    if failed.is_empty() {
        Ok(ok(format!("{} checks", checks.len())))
    } else {
        Ok(fail(format!("{} of {} failed, first {}", failed.len(), checks.len(), failed[0])))
    }
}

fn random_scaling(rng: &mut ChaCha8Rng, f: Field) -> Ideal {
    let small = ideals_up_to_norm(f, 12);
    let a = small[rng.gen_range(0..small.len())];
    if rng.gen_bool(0.5) {
        a
    } else {
        a.inverse()
    }
}

fn admissible_bases() -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut total = 0;
    for fx in standard_fixtures()? {
        let lv = &fx.level;
        let n = *lv.ideal();
        let f = lv.field();
        let reps = lv.reps();
        let (hp, hq) = (reps.p.len(), reps.q.len());
        for _ in 0..50 {
            let (i, j) = (rng.gen_range(0..hp), rng.gen_range(0..hq));
            let g0 = random_gamma0(&mut rng, &n, 6);
            let g1 = random_gamma1(&mut rng, &n, 6);
            let moved = random_gamma1(&mut rng, &n, 4);

            // Gamma_0: any ideal scaling
            let p = lv.standard_point0(i, j).apply(&g0)?.scale(&random_scaling(&mut rng, f));
            let (pi, pj) = lv.class_index(&p);
            let u = lv.admissible_basis0(&p)?;
            if lv.standard_point0(pi, pj).apply(&u)? != p {
                return Ok(fail(format!("{}: Gamma_0 round trip", fx.name)));
            }
            let gm = random_gamma0(&mut rng, &n, 4);
            let u2 = lv.admissible_basis0(&p.apply(&gm)?)?;
            if !(u2 * (u * gm).inverse()?).in_gamma0_twisted(&reps.p[pi], &n) {
                return Ok(fail(format!("{}: Gamma_0 stabilizer coset", fx.name)));
            }

            // Gamma_1: scalings by elements keep beta meaningful
            let s = f.int(rng.gen_range(1..=3), rng.gen_range(-2..=2));
            let p = lv.standard_point1(i, j).apply(&g1)?.apply(&Mat2::diag(s, s))?;
            let (pi, pj) = lv.class_index(&p);
            let u = lv.admissible_basis1(&p)?;
            if lv.standard_point1(pi, pj).apply(&u)? != p {
                return Ok(fail(format!("{}: Gamma_1 round trip", fx.name)));
            }
            let u2 = lv.admissible_basis1(&p.apply(&moved)?)?;
            if !(u2 * (u * moved).inverse()?).in_gamma1_twisted(&reps.p[pi], &n) {
                return Ok(fail(format!("{}: Gamma_1 stabilizer coset", fx.name)));
            }
            total += 1;
        }
    }
    Ok(ok(format!("{total} random points")))
}

fn eigensystems() -> Result<Outcome> {
    let mut cases: Vec<(i64, Ideal, Arc<ClassGroup>)> = Vec::new();
    for (d, p) in [(1, 3), (5, 3), (23, 2), (17, 3), (21, 2)] {
        let f = Field::new(d)?;
        let cg = Arc::new(ClassGroup::new(f));
        cases.push((d, Ideal::unit(f), cg.clone()));
        cases.push((d, primes_above(f, p)[0].0, cg));
    }
    let mut seed = 0u64;
    let mut runs = 0;
    while runs < 100 {
        for (d, n, cg) in &cases {
            if runs == 100 {
                break;
            }
            seed += 1;
            let lam = synthesize(seed, cg.clone(), *n, 60, SynthOptions::default());
            let rec = lam.restrict_to_principal().with_witnesses(lam.witnesses()).recover()?;
            if !rec.contains(&lam) || rec != lam.twist_orbit() {
                return Ok(fail(format!("d={d} n={n} seed {seed}: {} recovered", rec.len())));
            }
            runs += 1;
        }
    }
    let f = Field::new(5)?;
    let cg = Arc::new(ClassGroup::new(f));
    let st = synthesize(11, cg, primes_above(f, 3)[0].0, 60, SynthOptions { force_inner_twist: true });
    let rec = st.restrict_to_principal().recover()?;
    if st.inner_twists().len() != 2 || rec != vec![st] {
        return Ok(fail("self-twist case"));
    }
    Ok(ok(format!("{runs} systems plus a self-twist")))
}

fn principal_action() -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut points = 0;
    for fx in matrix_fixtures()? {
        let n = fx.set.level;
        let lv: &Level = &fx.level;
        let op = fx.set.kind.operator();
        let mut pts = vec![lv.principal_point0()];
        for _ in 0..3 {
            pts.push(lv.principal_point0().apply(&random_gamma0(&mut rng, &n, 5))?);
        }
        for p in pts {
            let want = op.apply_with(&FormalSum::point(&n, p), Normalization::Unscaled)?;
            if fx.set.act(lv, &p)? != want {
                return Ok(fail(format!("{} at {}", fx.name, p.literal())));
            }
            points += 1;
        }
    }
    Ok(ok(format!("{points} principal points")))
}

#[test]
fn acceptance() {
    let secs = Duration::from_secs;
    let results = [
        run(1, "class numbers", secs(1), class_numbers),
        run(2, "projective lines and unit counts", secs(30), projective_lines),
        run(3, "sublattice counts against brute force", secs(60), sublattice_counts),
        run(4, "special matrix sets", secs(60), matrix_sets),
        run(5, "operator relation suite", secs(300), relation_suite),
        run(6, "admissible bases", secs(60), admissible_bases),
        run(7, "eigensystem recovery", secs(300), eigensystems),
        run(8, "matrix action on principal points", secs(120), principal_action),
    ];
    let passed = results.iter().filter(|&&p| p).count();
    println!("acceptance: {passed}/{} criteria passed", results.len());
    assert!(results.iter().all(|&p| p));
}
