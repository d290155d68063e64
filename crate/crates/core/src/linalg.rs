//! Small exact linear algebra: row reduction over Q and Smith normal form over Z.

use num_traits::{One, Zero};

use crate::rational::Q;

/// Reduces `m` in place to reduced row echelon form and returns the pivot columns.
#[allow(clippy::needless_range_loop)]
pub fn rref(m: &mut [Vec<Q>]) -> Vec<usize> {
    let rows = m.len();
    let cols = m.first().map_or(0, Vec::len);
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let inv = m[r][c].recip();
        for x in m[r].iter_mut() {
            *x *= &inv;
        }
        for i in 0..rows {
            if i != r && !m[i][c].is_zero() {
                let f = m[i][c].clone();
                for j in 0..cols {
                    let delta = &f * &m[r][j];
                    m[i][j] -= delta;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

pub fn rank(rows: &[Vec<Q>]) -> usize {
    let mut m = rows.to_vec();
    rref(&mut m).len()
}

/// Solves `sum_i x_i * cols[i] = target` when the columns are linearly
/// independent and `target` lies in their span; `None` otherwise.
pub fn solve_unique(cols: &[Vec<Q>], target: &[Q]) -> Option<Vec<Q>> {
    let n = cols.len();
    let dim = target.len();
    let mut aug: Vec<Vec<Q>> = (0..dim)
        .map(|r| {
            let mut row: Vec<Q> = cols.iter().map(|c| c[r].clone()).collect();
            row.push(target[r].clone());
            row
        })
        .collect();
    let pivots = rref(&mut aug);
    if pivots.len() != n || pivots.contains(&n) {
        return None;
    }
    let mut x = vec![Q::zero(); n];
    for (r, &c) in pivots.iter().enumerate() {
        x[c] = aug[r][n].clone();
    }
    Some(x)
}

pub fn inverse(m: &[Vec<Q>]) -> Option<Vec<Vec<Q>>> {
    let n = m.len();
    let mut aug: Vec<Vec<Q>> = m
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { Q::one() } else { Q::zero() }));
            r
        })
        .collect();
    let pivots = rref(&mut aug);
    if pivots.len() < n || pivots[n - 1] >= n {
        return None;
    }
    Some(aug.into_iter().map(|r| r[n..].to_vec()).collect())
}

/// Result of `U * M * V = D` with `U`, `V` unimodular and `D` diagonal.
#[derive(Debug, Clone)]
pub struct Snf {
    pub diag: Vec<i64>,
    pub u: Vec<Vec<i64>>,
    pub v: Vec<Vec<i64>>,
}

fn identity(n: usize) -> Vec<Vec<i64>> {
    (0..n)
        .map(|i| (0..n).map(|j| i64::from(i == j)).collect())
        .collect()
}

#[allow(clippy::needless_range_loop)]
pub fn smith_normal_form(m: &[Vec<i64>]) -> Snf {
    let rows = m.len();
    let cols = m.first().map_or(0, Vec::len);
    let mut a = m.to_vec();
    let mut u = identity(rows);
    let mut v = identity(cols);

    let row_axpy = |a: &mut Vec<Vec<i64>>, u: &mut Vec<Vec<i64>>, dst: usize, src: usize, f: i64| {
        for j in 0..cols {
            a[dst][j] -= f * a[src][j];
        }
        for j in 0..rows {
            u[dst][j] -= f * u[src][j];
        }
    };
    let col_axpy = |a: &mut Vec<Vec<i64>>, v: &mut Vec<Vec<i64>>, dst: usize, src: usize, f: i64| {
        for row in a.iter_mut() {
            row[dst] -= f * row[src];
        }
        for row in v.iter_mut() {
            row[dst] -= f * row[src];
        }
    };

    for t in 0..rows.min(cols) {
        loop {
            let mut best: Option<(usize, usize)> = None;
            for i in t..rows {
                for j in t..cols {
                    if a[i][j] != 0
                        && best.is_none_or(|(bi, bj)| a[i][j].abs() < a[bi][bj].abs())
                    {
                        best = Some((i, j));
                    }
                }
            }
            let Some((pi, pj)) = best else {
                return finish(a, u, v, rows.min(cols));
            };
            a.swap(t, pi);
            u.swap(t, pi);
            for row in a.iter_mut() {
                row.swap(t, pj);
            }
            for row in v.iter_mut() {
                row.swap(t, pj);
            }

            let mut clean = true;
            for i in t + 1..rows {
                let f = a[i][t].div_euclid(a[t][t]);
                row_axpy(&mut a, &mut u, i, t, f);
                clean &= a[i][t] == 0;
            }
            for j in t + 1..cols {
                let f = a[t][j].div_euclid(a[t][t]);
                col_axpy(&mut a, &mut v, j, t, f);
                clean &= a[t][j] == 0;
            }
            if !clean {
                continue;
            }
            let offender = (t + 1..rows)
                .find(|&i| (t + 1..cols).any(|j| a[i][j] % a[t][t] != 0));
            match offender {
                Some(i) => row_axpy(&mut a, &mut u, t, i, -1),
                None => break,
            }
        }
        if a[t][t] < 0 {
            for x in a[t].iter_mut() {
                *x = -*x;
            }
            for x in u[t].iter_mut() {
                *x = -*x;
            }
        }
    }
    finish(a, u, v, rows.min(cols))
}

fn finish(a: Vec<Vec<i64>>, u: Vec<Vec<i64>>, v: Vec<Vec<i64>>, n: usize) -> Snf {
    Snf {
        diag: (0..n).map(|i| a[i][i]).collect(),
        u,
        v,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{q, qi};

    fn matmul(a: &[Vec<i64>], b: &[Vec<i64>]) -> Vec<Vec<i64>> {
        let inner = b.len();
        let cols = b.first().map_or(0, Vec::len);
        a.iter()
            .map(|row| {
                (0..cols)
                    .map(|j| (0..inner).map(|k| row[k] * b[k][j]).sum())
                    .collect()
            })
            .collect()
    }

    #[test]
    fn snf_reproduces_diagonal() {
        let m = vec![vec![2, 4, 4], vec![-6, 6, 12], vec![10, -4, -16]];
        let snf = smith_normal_form(&m);
        assert_eq!(snf.diag, vec![2, 6, 12]);
        let d = matmul(&matmul(&snf.u, &m), &snf.v);
        for (i, row) in d.iter().enumerate() {
            for (j, x) in row.iter().enumerate() {
                assert_eq!(*x, if i == j { snf.diag[i] } else { 0 });
            }
        }
    }

    #[test]
    fn snf_of_weighted_support() {
        // rows rho_4 = (2,1), rho_5 = (0,1)
        let snf = smith_normal_form(&[vec![2, 1], vec![0, 1]]);
        let mut d = snf.diag.clone();
        d.sort();
        assert_eq!(d, vec![1, 2]);
    }

    #[test]
    fn solve_and_invert() {
        let cols = vec![vec![qi(1), qi(0)], vec![qi(0), qi(1)]];
        assert_eq!(
            solve_unique(&cols, &[qi(2), qi(3)]),
            Some(vec![qi(2), qi(3)])
        );
        let dependent = vec![vec![qi(1), qi(0)], vec![qi(2), qi(0)]];
        assert_eq!(solve_unique(&dependent, &[qi(1), qi(0)]), None);
        let inv = inverse(&[vec![qi(2), qi(1)], vec![qi(0), qi(1)]]).unwrap();
        assert_eq!(inv, vec![vec![q(1, 2), q(-1, 2)], vec![qi(0), qi(1)]]);
        assert!(inverse(&[vec![qi(1), qi(2)], vec![qi(2), qi(4)]]).is_none());
        assert_eq!(rank(&[vec![qi(1), qi(2)], vec![qi(2), qi(4)]]), 1);
    }
}
