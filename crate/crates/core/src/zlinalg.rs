//! Small dense integer linear algebra: Hermite and Smith normal forms,
//! trial-division factoring.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};

pub fn floor_div(a: i128, b: i128) -> i128 {
    Integer::div_floor(&a, &b)
}

pub fn gcd(a: i128, b: i128) -> i128 {
    a.gcd(&b)
}

pub fn lcm(a: i128, b: i128) -> i128 {
    a.lcm(&b)
}

/// Row-style Hermite normal form. Returns the nonzero rows, upper
/// triangular with positive pivots and entries above each pivot reduced
/// into `[0, pivot)`. Falls back to big integers if `i128` overflows.
pub fn hnf<const K: usize>(rows: Vec<[i128; K]>) -> Vec<[i128; K]> {
    let small: Vec<Vec<i128>> = rows.iter().map(|r| r.to_vec()).collect();
    let out = match hnf_small(small, K) {
        Some(h) => h,
        None => {
            let big: Vec<Vec<BigInt>> = rows.iter().map(|r| r.iter().map(|x| BigInt::from(*x)).collect()).collect();
            hnf_big(big, K)
                .into_iter()
                .map(|r| r.iter().map(|x| x.to_i128().expect("HNF entry fits in i128")).collect())
                .collect()
        }
    };
    out.into_iter()
        .map(|r| {
            let mut a = [0i128; K];
            a.copy_from_slice(&r);
            a
        })
        .collect()
}

fn hnf_small(mut rows: Vec<Vec<i128>>, ncols: usize) -> Option<Vec<Vec<i128>>> {
    fn axpy(dst: &mut [i128], src: &[i128], q: i128) -> Option<()> {
        for (x, y) in dst.iter_mut().zip(src) {
            *x = x.checked_sub(q.checked_mul(*y)?)?;
        }
        Some(())
    }
    let n = rows.len();
    let mut r = 0;
    for col in 0..ncols {
        if r == n {
            break;
        }
        for i in r + 1..n {
            while rows[i][col] != 0 {
                let q = floor_div(rows[r][col], rows[i][col]);
                if q != 0 {
                    let src = rows[i].clone();
                    axpy(&mut rows[r], &src, q)?;
                }
                rows.swap(r, i);
            }
        }
        if rows[r][col] == 0 {
            continue;
        }
        if rows[r][col] < 0 {
            for x in rows[r].iter_mut() {
                *x = x.checked_neg()?;
            }
        }
        let piv = rows[r].clone();
        for row in rows.iter_mut().take(r) {
            let q = floor_div(row[col], piv[col]);
            if q != 0 {
                axpy(row, &piv, q)?;
            }
        }
        r += 1;
    }
    rows.truncate(r);
    Some(rows)
}

fn hnf_big(mut rows: Vec<Vec<BigInt>>, ncols: usize) -> Vec<Vec<BigInt>> {
    let n = rows.len();
    let mut r = 0;
    for col in 0..ncols {
        if r == n {
            break;
        }
        for i in r + 1..n {
            while !rows[i][col].is_zero() {
                let q = rows[r][col].div_floor(&rows[i][col]);
                let src = rows[i].clone();
                for (x, y) in rows[r].iter_mut().zip(&src) {
                    *x -= &q * y;
                }
                rows.swap(r, i);
            }
        }
        if rows[r][col].is_zero() {
            continue;
        }
        if rows[r][col].is_negative() {
            for x in rows[r].iter_mut() {
                *x = -&*x;
            }
        }
        let piv = rows[r].clone();
        for row in rows.iter_mut().take(r) {
            let q = row[col].div_floor(&piv[col]);
            for (x, y) in row.iter_mut().zip(&piv) {
                *x -= &q * y;
            }
        }
        r += 1;
    }
    rows.truncate(r);
    rows
}

/// Hermite normal form with a record of the row operations:
/// `u * input == h`, where `u` has one row per output row.
pub fn hnf_with_transform(rows: &[Vec<i128>], ncols: usize) -> (Vec<Vec<i128>>, Vec<Vec<i128>>) {
    let n = rows.len();
    let mut h: Vec<Vec<i128>> = rows.to_vec();
    let mut u: Vec<Vec<i128>> = (0..n).map(|i| (0..n).map(|j| i128::from(i == j)).collect()).collect();
    let sub = |m: &mut Vec<Vec<i128>>, dst: usize, src: usize, q: i128| {
        let s = m[src].clone();
        for (x, y) in m[dst].iter_mut().zip(s.iter()) {
            *x -= q * y;
        }
    };
    let mut r = 0;
    for col in 0..ncols {
        if r == n {
            break;
        }
        for i in r + 1..n {
            while h[i][col] != 0 {
                let q = floor_div(h[r][col], h[i][col]);
                if q != 0 {
                    sub(&mut h, r, i, q);
                    sub(&mut u, r, i, q);
                }
                h.swap(r, i);
                u.swap(r, i);
            }
        }
        if h[r][col] == 0 {
            continue;
        }
        if h[r][col] < 0 {
            h[r].iter_mut().for_each(|x| *x = -*x);
            u[r].iter_mut().for_each(|x| *x = -*x);
        }
        for k in 0..r {
            let q = floor_div(h[k][col], h[r][col]);
            if q != 0 {
                sub(&mut h, k, r, q);
                sub(&mut u, k, r, q);
            }
        }
        r += 1;
    }
    h.truncate(r);
    u.truncate(r);
    (h, u)
}

/// Smith normal form of an integer matrix. Returns the diagonal (length
/// `min(rows, cols)`, each dividing the next) together with the column
/// transform `v` and its inverse, so that `rows_op * m * v` is diagonal.
pub struct Smith {
    pub diag: Vec<i128>,
    pub v: Vec<Vec<i128>>,
    pub v_inv: Vec<Vec<i128>>,
}

pub fn smith(m: &[Vec<i128>], ncols: usize) -> Smith {
    let mut a: Vec<Vec<i128>> = m.to_vec();
    let nrows = a.len();
    let ident = |k: usize| -> Vec<Vec<i128>> { (0..k).map(|i| (0..k).map(|j| i128::from(i == j)).collect()).collect() };
    let mut v = ident(ncols);
    let mut vi = ident(ncols);

    // column op: col_j -= q * col_i ; V updated alike, V^-1 gets row_i += q * row_j
    fn col_sub(a: &mut [Vec<i128>], j: usize, i: usize, q: i128) {
        for row in a.iter_mut() {
            row[j] -= q * row[i];
        }
    }
    fn col_swap(a: &mut [Vec<i128>], i: usize, j: usize) {
        for row in a.iter_mut() {
            row.swap(i, j);
        }
    }

    let dim = nrows.min(ncols);
    for t in 0..dim {
        loop {
            // pick the smallest nonzero entry in the remaining block as pivot
            let mut best: Option<(usize, usize)> = None;
            for i in t..nrows {
                for j in t..ncols {
                    if a[i][j] != 0 && best.is_none_or(|(bi, bj)| a[i][j].abs() < a[bi][bj].abs()) {
                        best = Some((i, j));
                    }
                }
            }
            let Some((pi, pj)) = best else { break };
            a.swap(t, pi);
            if pj != t {
                col_swap(&mut a, t, pj);
                col_swap(&mut v, t, pj);
                vi.swap(t, pj);
            }
            let p = a[t][t];
            let mut clean = true;
            for i in t + 1..nrows {
                let q = floor_div(a[i][t], p);
                if q != 0 {
                    let src = a[t].clone();
                    for (x, y) in a[i].iter_mut().zip(src.iter()) {
                        *x -= q * y;
                    }
                }
                if a[i][t] != 0 {
                    clean = false;
                }
            }
            for j in t + 1..ncols {
                let q = floor_div(a[t][j], p);
                if q != 0 {
                    col_sub(&mut a, j, t, q);
                    col_sub(&mut v, j, t, q);
                    let src = vi[j].clone();
                    for (x, y) in vi[t].iter_mut().zip(src.iter()) {
                        *x += q * y;
                    }
                }
                if a[t][j] != 0 {
                    clean = false;
                }
            }
            if !clean {
                continue;
            }
            // enforce divisibility into the rest of the block
            let mut bad = None;
            'outer: for i in t + 1..nrows {
                for j in t + 1..ncols {
                    if a[i][j] % p != 0 {
                        bad = Some(i);
                        break 'outer;
                    }
                }
            }
            match bad {
                Some(i) => {
                    let src = a[i].clone();
                    for (x, y) in a[t].iter_mut().zip(src.iter()) {
                        *x += y;
                    }
                }
                None => break,
            }
        }
        if a[t][t] < 0 {
            a[t][t] = -a[t][t];
        }
    }
    let diag = (0..dim).map(|i| a[i][i]).collect();
    Smith { diag, v, v_inv: vi }
}

/// Trial-division factorisation of `|n|`, primes ascending.
pub fn factor_int(n: i128) -> Vec<(i128, u32)> {
    let mut n = n.abs();
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            let mut e = 0;
            while n % p == 0 {
                n /= p;
                e += 1;
            }
            out.push((p, e));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

pub fn is_squarefree(n: i128) -> bool {
    n != 0 && factor_int(n).iter().all(|&(_, e)| e == 1)
}

pub fn primes_up_to(bound: i128) -> Vec<i128> {
    (2..=bound.max(1)).filter(|&p| factor_int(p).len() == 1 && factor_int(p)[0].1 == 1).collect()
}

pub fn isqrt(n: i128) -> i128 {
    if n <= 0 {
        return 0;
    }
    let mut x = (n as f64).sqrt() as i128;
    while x * x > n {
        x -= 1;
    }
    while (x + 1) * (x + 1) <= n {
        x += 1;
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hnf_basic() {
        let h = hnf(vec![[4, 6], [2, 4], [6, 0]]);
        assert_eq!(h, vec![[2, 0], [0, 2]]);
    }

    #[test]
    fn transform_reproduces_output() {
        let rows = vec![vec![3, 1], vec![5, 2], vec![7, 0], vec![0, 9]];
        let (h, u) = hnf_with_transform(&rows, 2);
        for (hr, ur) in h.iter().zip(u.iter()) {
            for c in 0..2 {
                let s: i128 = ur.iter().zip(rows.iter()).map(|(k, r)| k * r[c]).sum();
                assert_eq!(s, hr[c]);
            }
        }
        assert_eq!(h, vec![vec![1, 0], vec![0, 1]]);
    }

    #[test]
    fn smith_invariants() {
        let m = vec![vec![2, 4, 4], vec![-6, 6, 12], vec![10, -4, -16]];
        let s = smith(&m, 3);
        assert_eq!(s.diag, vec![2, 6, 12]);
        for i in 0..3 {
            for j in 0..3 {
                let x: i128 = (0..3).map(|k| s.v[i][k] * s.v_inv[k][j]).sum();
                assert_eq!(x, i128::from(i == j));
            }
        }
    }

    #[test]
    fn factoring() {
        assert_eq!(factor_int(360), vec![(2, 3), (3, 2), (5, 1)]);
        assert!(is_squarefree(30));
        assert!(!is_squarefree(12));
    }
}
