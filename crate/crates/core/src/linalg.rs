//! Exact linear algebra over ℚ and ℤ on small dense matrices.

use num_integer::Integer as _;
use num_traits::{One, Signed, Zero};

use crate::exact_arith::{Integer, Rational};

pub type QMatrix = Vec<Vec<Rational>>;
pub type ZMatrix = Vec<Vec<Integer>>;

pub fn to_q(m: &[Vec<i64>]) -> QMatrix {
    m.iter().map(|r| r.iter().map(|&x| Rational::from_integer(x.into())).collect()).collect()
}

pub fn z_to_q(m: &[Vec<Integer>]) -> QMatrix {
    m.iter().map(|r| r.iter().map(|x| Rational::from_integer(x.clone())).collect()).collect()
}

pub fn to_z(m: &[Vec<i64>]) -> ZMatrix {
    m.iter().map(|r| r.iter().map(|&x| Integer::from(x)).collect()).collect()
}

pub fn transpose<T: Clone>(m: &[Vec<T>]) -> Vec<Vec<T>> {
    if m.is_empty() {
        return Vec::new();
    }
    (0..m[0].len()).map(|j| m.iter().map(|r| r[j].clone()).collect()).collect()
}

/// Reduced row echelon form; returns the matrix and its pivot columns.
pub fn rref(m: &QMatrix) -> (QMatrix, Vec<usize>) {
    let mut a = m.clone();
    let rows = a.len();
    let cols = if rows == 0 { 0 } else { a[0].len() };
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !a[i][c].is_zero()) else {
            continue;
        };
        a.swap(r, p);
        let inv = a[r][c].recip();
        for x in a[r].iter_mut() {
            if !x.is_zero() {
                *x *= &inv;
            }
        }
        let pivot_row = a[r].clone();
        for (i, row) in a.iter_mut().enumerate() {
            if i == r || row[c].is_zero() {
                continue;
            }
            let f = row[c].clone();
            for (x, y) in row.iter_mut().zip(&pivot_row) {
                if !y.is_zero() {
                    *x -= &f * y;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    (a, pivots)
}

pub fn rank(m: &QMatrix) -> usize {
    rref(m).1.len()
}

pub fn rank_i64(m: &[Vec<i64>]) -> usize {
    rank(&to_q(m))
}

/// Rational basis of the right kernel, one vector per free column.
pub fn kernel(m: &QMatrix, cols: usize) -> Vec<Vec<Rational>> {
    let (r, pivots) = rref(m);
    let mut basis = Vec::new();
    for free in (0..cols).filter(|c| !pivots.contains(c)) {
        let mut v = vec![Rational::zero(); cols];
        v[free] = Rational::one();
        for (i, &p) in pivots.iter().enumerate() {
            v[p] = -r[i][free].clone();
        }
        basis.push(v);
    }
    basis
}

/// Scales a rational vector to the primitive integer vector in its direction.
pub fn primitive(v: &[Rational]) -> Vec<Integer> {
    let l = v.iter().fold(Integer::one(), |acc, x| acc.lcm(x.denom()));
    let ints: Vec<Integer> = v.iter().map(|x| (x * Rational::from_integer(l.clone())).to_integer()).collect();
    primitive_int(&ints)
}

pub fn primitive_int(v: &[Integer]) -> Vec<Integer> {
    let g = v.iter().fold(Integer::zero(), |acc, x| acc.gcd(x));
    if g.is_zero() || g.is_one() {
        return v.to_vec();
    }
    v.iter().map(|x| x / &g).collect()
}

/// Basis of the lattice `ker(m) ∩ ℤ^cols`, in Hermite normal form with each
/// vector's last nonzero entry made negative.
pub fn integer_kernel(m: &[Vec<Integer>], cols: usize) -> Vec<Vec<Integer>> {
    // Column-reduce m while recording the unimodular transform; the columns of
    // the transform that end up under zero columns span the integer kernel.
    let rows = m.len();
    let mut a: Vec<Vec<Integer>> = m.to_vec();
    let mut u: Vec<Vec<Integer>> = (0..cols)
        .map(|i| (0..cols).map(|j| if i == j { Integer::one() } else { Integer::zero() }).collect())
        .collect();
    let col_op = |a: &mut Vec<Vec<Integer>>, u: &mut Vec<Vec<Integer>>, j: usize, k: usize, x: &Integer, y: &Integer, z: &Integer, w: &Integer| {
        // (col_j, col_k) <- (x col_j + y col_k, z col_j + w col_k)
        for row in a.iter_mut().chain(u.iter_mut()) {
            let cj = row[j].clone();
            let ck = row[k].clone();
            row[j] = x * &cj + y * &ck;
            row[k] = z * &cj + w * &ck;
        }
    };
    let mut piv = 0;
    for r in 0..rows {
        if piv == cols {
            break;
        }
        for k in piv + 1..cols {
            if a[r][k].is_zero() {
                continue;
            }
            let p = a[r][piv].clone();
            let q = a[r][k].clone();
            let e = p.extended_gcd(&q);
            let g = e.gcd;
            // [x y; -q/g p/g] has determinant 1.
            col_op(&mut a, &mut u, piv, k, &e.x, &e.y, &(-&q / &g), &(&p / &g));
        }
        if !a[r][piv].is_zero() {
            piv += 1;
        }
    }
    let basis: Vec<Vec<Integer>> = (piv..cols).map(|j| u.iter().map(|row| row[j].clone()).collect()).collect();
    let mut h = hermite_normal_form(basis);
    for v in h.iter_mut() {
        if let Some(last) = v.iter().rev().find(|x| !x.is_zero()) {
            if last.is_positive() {
                for x in v.iter_mut() {
                    *x = -x.clone();
                }
            }
        }
    }
    h
}

pub fn integer_kernel_i64(m: &[Vec<i64>], cols: usize) -> Vec<Vec<Integer>> {
    integer_kernel(&to_z(m), cols)
}

/// Row Hermite normal form; zero rows are dropped.
pub fn hermite_normal_form(mut a: Vec<Vec<Integer>>) -> Vec<Vec<Integer>> {
    if a.is_empty() {
        return a;
    }
    let cols = a[0].len();
    let mut r = 0;
    for c in 0..cols {
        if r == a.len() {
            break;
        }
        loop {
            let nz: Vec<usize> = (r..a.len()).filter(|&i| !a[i][c].is_zero()).collect();
            if nz.is_empty() {
                break;
            }
            let best = *nz.iter().min_by(|&&i, &&j| a[i][c].abs().cmp(&a[j][c].abs())).unwrap();
            a.swap(r, best);
            if a[r][c].is_negative() {
                for x in a[r].iter_mut() {
                    *x = -x.clone();
                }
            }
            let mut done = true;
            for i in r + 1..a.len() {
                if a[i][c].is_zero() {
                    continue;
                }
                let f = a[i][c].div_floor(&a[r][c]);
                let pr = a[r].clone();
                for (x, y) in a[i].iter_mut().zip(&pr) {
                    *x -= &f * y;
                }
                if !a[i][c].is_zero() {
                    done = false;
                }
            }
            if done {
                break;
            }
        }
        if r < a.len() && !a[r][c].is_zero() {
            let pr = a[r].clone();
            for i in 0..r {
                let f = a[i][c].div_floor(&pr[c]);
                if !f.is_zero() {
                    for (x, y) in a[i].iter_mut().zip(&pr) {
                        *x -= &f * y;
                    }
                }
            }
            r += 1;
        }
    }
    a.truncate(r);
    a
}

/// Some solution of `m x = b`, or `None` when the system is inconsistent.
pub fn solve(m: &QMatrix, b: &[Rational]) -> Option<Vec<Rational>> {
    let cols = if m.is_empty() { 0 } else { m[0].len() };
    let aug: QMatrix = m.iter().zip(b).map(|(r, x)| {
        let mut r = r.clone();
        r.push(x.clone());
        r
    }).collect();
    let (r, pivots) = rref(&aug);
    if pivots.contains(&cols) {
        return None;
    }
    let mut x = vec![Rational::zero(); cols];
    for (i, &p) in pivots.iter().enumerate() {
        x[p] = r[i][cols].clone();
    }
    Some(x)
}

pub fn mat_vec(m: &QMatrix, v: &[Rational]) -> Vec<Rational> {
    m.iter()
        .map(|r| r.iter().zip(v).filter(|(a, b)| !a.is_zero() && !b.is_zero()).map(|(a, b)| a * b).sum())
        .collect()
}

pub fn mat_vec_z(m: &[Vec<Integer>], v: &[Integer]) -> Vec<Integer> {
    m.iter().map(|r| r.iter().zip(v).map(|(a, b)| a * b).sum()).collect()
}

/// Determinant by fraction-free (Bareiss) elimination.
pub fn det_bareiss(m: &[Vec<Integer>]) -> Integer {
    let n = m.len();
    if n == 0 {
        return Integer::one();
    }
    let mut a = m.to_vec();
    let mut sign = Integer::one();
    let mut prev = Integer::one();
    for k in 0..n - 1 {
        if a[k][k].is_zero() {
            let Some(p) = (k + 1..n).find(|&i| !a[i][k].is_zero()) else {
                return Integer::zero();
            };
            a.swap(k, p);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = &a[i][j] * &a[k][k] - &a[i][k] * &a[k][j];
                a[i][j] = v / &prev;
            }
        }
        prev = a[k][k].clone();
    }
    sign * a[n - 1][n - 1].clone()
}

pub fn inverse(m: &QMatrix) -> Option<QMatrix> {
    let n = m.len();
    let aug: QMatrix = m
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let mut r = r.clone();
            r.extend((0..n).map(|j| if i == j { Rational::one() } else { Rational::zero() }));
            r
        })
        .collect();
    let (r, pivots) = rref(&aug);
    if pivots.len() < n || pivots[n - 1] != n - 1 {
        return None;
    }
    Some(r.into_iter().map(|row| row[n..].to_vec()).collect())
}
