//! Row-style Hermite normal form over Z and exact solving against an
//! echelonized lattice basis.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntLattice {
    pub generators: Vec<Vec<BigInt>>,
}

impl IntLattice {
    pub fn rank(&self) -> usize {
        self.generators.len()
    }
}

/// Canonical HNF basis of the row span: echelon rows with positive pivots and
/// entries above each pivot reduced into [0, pivot).
pub fn hermite_normal_form(l: &IntLattice) -> IntLattice {
    IntLattice { generators: hnf_rows(l.generators.clone()) }
}

pub fn hnf_rows(mut rows: Vec<Vec<BigInt>>) -> Vec<Vec<BigInt>> {
    rows.retain(|r| r.iter().any(|x| !x.is_zero()));
    if rows.is_empty() {
        return rows;
    }
    let ncols = rows[0].len();
    let mut done = 0usize;
    for col in 0..ncols {
        // gcd-eliminate below `done`
        loop {
            let mut best: Option<usize> = None;
            for (i, row) in rows.iter().enumerate().skip(done) {
                if !row[col].is_zero() {
                    best = match best {
                        None => Some(i),
                        Some(b) => {
                            if row[col].abs() < rows[b][col].abs() {
                                Some(i)
                            } else {
                                Some(b)
                            }
                        }
                    };
                }
            }
            let Some(b) = best else { break };
            rows.swap(done, b);
            if rows[done][col].is_negative() {
                for x in rows[done].iter_mut() {
                    *x = -std::mem::take(x);
                }
            }
            let mut finished = true;
            let pivot = rows[done][col].clone();
            for i in done + 1..rows.len() {
                if !rows[i][col].is_zero() {
                    let q = rows[i][col].div_floor(&pivot);
                    if !q.is_zero() {
                        for j in 0..ncols {
                            let sub = &q * &rows[done][j];
                            rows[i][j] -= sub;
                        }
                    }
                    if !rows[i][col].is_zero() {
                        finished = false;
                    }
                }
            }
            if finished {
                // reduce entries above the pivot
                for i in 0..done {
                    let q = rows[i][col].div_floor(&pivot);
                    if !q.is_zero() {
                        for j in 0..ncols {
                            let sub = &q * &rows[done][j];
                            rows[i][j] -= sub;
                        }
                    }
                }
                done += 1;
                break;
            }
        }
        if done == rows.len() {
            break;
        }
    }
    rows.truncate(done);
    rows
}

/// HNF together with a transform: returns (H, U) where the rows of H are the
/// HNF basis and H = U * A for the input rows A.
pub fn hnf_with_transform(rows: &[Vec<BigInt>]) -> (Vec<Vec<BigInt>>, Vec<Vec<BigInt>>) {
    let n = rows.len();
    if n == 0 {
        return (vec![], vec![]);
    }
    let ncols = rows[0].len();
    // augment with an identity block and run the same elimination
    let mut aug: Vec<Vec<BigInt>> = rows
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let mut v = r.clone();
            v.extend((0..n).map(|j| if i == j { BigInt::from(1) } else { BigInt::zero() }));
            v
        })
        .collect();
    // elimination restricted to the first `ncols` columns; zero data rows can
    // still carry transform info, keep them but sort zero rows to the bottom
    let mut done = 0usize;
    for col in 0..ncols {
        loop {
            let mut best: Option<usize> = None;
            for (i, row) in aug.iter().enumerate().skip(done) {
                if !row[col].is_zero() {
                    best = match best {
                        None => Some(i),
                        Some(b) => {
                            if row[col].abs() < aug[b][col].abs() {
                                Some(i)
                            } else {
                                Some(b)
                            }
                        }
                    };
                }
            }
            let Some(b) = best else { break };
            aug.swap(done, b);
            if aug[done][col].is_negative() {
                for x in aug[done].iter_mut() {
                    *x = -std::mem::take(x);
                }
            }
            let mut finished = true;
            let pivot = aug[done][col].clone();
            for i in done + 1..aug.len() {
                if !aug[i][col].is_zero() {
                    let q = aug[i][col].div_floor(&pivot);
                    if !q.is_zero() {
                        for j in 0..ncols + n {
                            let sub = &q * &aug[done][j];
                            aug[i][j] -= sub;
                        }
                    }
                    if !aug[i][col].is_zero() {
                        finished = false;
                    }
                }
            }
            if finished {
                for i in 0..done {
                    let q = aug[i][col].div_floor(&pivot);
                    if !q.is_zero() {
                        for j in 0..ncols + n {
                            let sub = &q * &aug[done][j];
                            aug[i][j] -= sub;
                        }
                    }
                }
                done += 1;
                break;
            }
        }
        if done == aug.len() {
            break;
        }
    }
    let h: Vec<Vec<BigInt>> = aug[..done].iter().map(|r| r[..ncols].to_vec()).collect();
    let u: Vec<Vec<BigInt>> = aug[..done].iter().map(|r| r[ncols..].to_vec()).collect();
    (h, u)
}

/// Solve x * H = target over Z for an HNF (echelon) basis H. Returns None
/// when the target lies outside the lattice.
pub fn solve_in_hnf(h: &[Vec<BigInt>], target: &[BigInt]) -> Option<Vec<BigInt>> {
    let mut rest = target.to_vec();
    let mut coeffs = vec![BigInt::zero(); h.len()];
    for (r, row) in h.iter().enumerate() {
        let piv = row.iter().position(|x| !x.is_zero())?;
        if rest[piv].is_zero() {
            continue;
        }
        let (q, rem) = rest[piv].div_rem(&row[piv]);
        if !rem.is_zero() {
            return None;
        }
        for (j, x) in row.iter().enumerate() {
            let sub = &q * x;
            rest[j] -= sub;
        }
        coeffs[r] = q;
    }
    if rest.iter().all(|x| x.is_zero()) {
        Some(coeffs)
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bi(v: i64) -> BigInt {
        BigInt::from(v)
    }
    fn rows(data: &[&[i64]]) -> Vec<Vec<BigInt>> {
        data.iter().map(|r| r.iter().map(|&x| bi(x)).collect()).collect()
    }

    #[test]
    fn hnf_even_sum_lattice() {
        let l = IntLattice { generators: rows(&[&[2, 0], &[0, 2], &[1, 1]]) };
        let h = hermite_normal_form(&l);
        assert_eq!(h.generators, rows(&[&[1, 1], &[0, 2]]));
    }

    #[test]
    fn hnf_identity() {
        let l = IntLattice { generators: rows(&[&[1, 0], &[0, 1]]) };
        assert_eq!(hermite_normal_form(&l).generators, rows(&[&[1, 0], &[0, 1]]));
    }

    #[test]
    fn hnf_empty() {
        let l = IntLattice { generators: vec![] };
        assert_eq!(hermite_normal_form(&l).rank(), 0);
    }

    #[test]
    fn transform_reproduces_hnf() {
        let data = rows(&[&[4, 6, 2], &[6, 9, 3], &[2, 1, 7]]);
        let (h, u) = hnf_with_transform(&data);
        for (r, hr) in h.iter().enumerate() {
            let mut acc = vec![BigInt::zero(); 3];
            for (i, c) in u[r].iter().enumerate() {
                for j in 0..3 {
                    let add = c * &data[i][j];
                    acc[j] += add;
                }
            }
            assert_eq!(&acc, hr);
        }
    }

    #[test]
    fn solve_membership() {
        let h = rows(&[&[1, 1], &[0, 2]]);
        assert_eq!(solve_in_hnf(&h, &rows(&[&[3, 5]])[0]), Some(vec![bi(3), bi(1)]));
        assert_eq!(solve_in_hnf(&h, &rows(&[&[1, 0]])[0]), None);
    }
}
