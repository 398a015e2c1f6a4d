//! Independent weight-multiplicity oracle (Freudenthal's recursion) and the
//! Weyl dimension formula, used to cross-check the lattice construction.

use crate::rootfold::{Rat, RootSystem};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::collections::HashMap;

fn rho(rs: &RootSystem) -> Vec<Rat> {
    let rank = rs.rank();
    let mut r = vec![Rat::zero(); rank];
    for i in 0..rank {
        for j in 0..rank {
            r[j] += rs.fundamental_weights[i][j];
        }
    }
    r
}

fn add(a: &[Rat], b: &[Rat]) -> Vec<Rat> {
    a.iter().zip(b).map(|(x, y)| *x + *y).collect()
}

fn sub(a: &[Rat], b: &[Rat]) -> Vec<Rat> {
    a.iter().zip(b).map(|(x, y)| *x - *y).collect()
}

/// All weight multiplicities of the simple module with highest weight
/// `lambda`, by Freudenthal's recursion over dominant representatives.
pub fn weight_multiplicities(rs: &RootSystem, lambda: &[Rat]) -> HashMap<Vec<Rat>, u64> {
    let _rank = rs.rank();
    let rho_v = rho(rs);
    let lam_rho = add(lambda, &rho_v);
    let lam_rho_sq = rs.inner_coords(&lam_rho, &lam_rho);

    let mut memo: HashMap<Vec<Rat>, u64> = HashMap::new();

    struct Ctx<'a> {
        rs: &'a RootSystem,
        lambda: Vec<Rat>,
        rho: Vec<Rat>,
        lam_rho_sq: Rat,
    }
    let ctx = Ctx { rs, lambda: lambda.to_vec(), rho: rho_v.clone(), lam_rho_sq };

    fn in_cone(rs: &RootSystem, lambda: &[Rat], mu: &[Rat]) -> bool {
        // lambda - dom(mu) must be a nonnegative integer root combination
        let dom = rs.dominant_rep(mu);
        sub(lambda, &dom).iter().all(|c| c.is_integer() && !c.is_negative())
    }

    fn mult(ctx: &Ctx, mu: &[Rat], memo: &mut HashMap<Vec<Rat>, u64>) -> u64 {
        let dom = ctx.rs.dominant_rep(mu);
        if dom == ctx.lambda {
            return 1;
        }
        if !in_cone(ctx.rs, &ctx.lambda, &dom) {
            return 0;
        }
        if let Some(&m) = memo.get(&dom) {
            return m;
        }
        let mu_rho = add(&dom, &ctx.rho);
        let denom = ctx.lam_rho_sq - ctx.rs.inner_coords(&mu_rho, &mu_rho);
        if denom.is_zero() {
            memo.insert(dom, 0);
            return 0;
        }
        let mut num = Rat::zero();
        for r in 0..ctx.rs.num_positive() {
            let alpha: Vec<Rat> = ctx.rs.positive_roots[r]
                .iter()
                .map(|&c| Rat::from_integer(c))
                .collect();
            let mut k = 1i64;
            loop {
                let shifted: Vec<Rat> = dom
                    .iter()
                    .zip(&alpha)
                    .map(|(m, a)| *m + Rat::from_integer(k) * *a)
                    .collect();
                if !in_cone(ctx.rs, &ctx.lambda, &shifted) {
                    break;
                }
                let m = mult(ctx, &shifted, memo);
                if m > 0 {
                    let p = ctx.rs.inner_coords(&shifted, &alpha);
                    num += Rat::from_integer(2 * m as i64) * p;
                }
                k += 1;
            }
        }
        let v = num / denom;
        assert!(v.is_integer() && !v.is_negative(), "Freudenthal output must be in Z_+");
        let m = v.to_integer() as u64;
        memo.insert(dom, m);
        m
    }

    // enumerate the support box lambda - eta, 0 <= eta <= lambda - w0 lambda
    let w0 = {
        let neg: Vec<Rat> = lambda.iter().map(|c| -*c).collect();
        let dom = rs.dominant_rep(&neg);
        dom.iter().map(|c| -*c).collect::<Vec<Rat>>()
    };
    let bounds: Vec<i64> = sub(lambda, &w0).iter().map(|c| c.to_integer()).collect();
    let mut etas: Vec<Vec<i64>> = vec![vec![]];
    for b in &bounds {
        let mut next = Vec::new();
        for p in &etas {
            for v in 0..=*b {
                let mut q = p.clone();
                q.push(v);
                next.push(q);
            }
        }
        etas = next;
    }
    let mut out = HashMap::new();
    for eta in etas {
        let eta_r: Vec<Rat> = eta.iter().map(|&x| Rat::from_integer(x)).collect();
        let mu = sub(lambda, &eta_r);
        let m = mult(&ctx, &mu, &mut memo);
        if m > 0 {
            out.insert(mu, m);
        }
    }

    out
}

/// Weyl dimension formula.
pub fn weyl_dim(rs: &RootSystem, lambda: &[Rat]) -> BigInt {
    let rho_v = rho(rs);
    let lam_rho = add(lambda, &rho_v);
    let mut acc = BigRational::one();
    for r in 0..rs.num_positive() {
        let alpha: Vec<Rat> =
            rs.positive_roots[r].iter().map(|&c| Rat::from_integer(c)).collect();
        let num = rs.inner_coords(&lam_rho, &alpha);
        let den = rs.inner_coords(&rho_v, &alpha);
        let q = num / den;
        acc *= BigRational::new(BigInt::from(*q.numer()), BigInt::from(*q.denom()));
    }
    assert!(acc.is_integer());
    acc.to_integer()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rootfold::{build_root_system, DynkinType};

    fn rs(s: &str) -> RootSystem {
        build_root_system(DynkinType::parse(s).unwrap())
    }

    fn fw(rs: &RootSystem, coeffs: &[i64]) -> Vec<Rat> {
        let mut w = vec![Rat::zero(); rs.rank()];
        for (i, &c) in coeffs.iter().enumerate() {
            for j in 0..rs.rank() {
                w[j] += Rat::from_integer(c) * rs.fundamental_weights[i][j];
            }
        }
        w
    }

    #[test]
    fn dims_match_classical_values() {
        let a2 = rs("A2");
        assert_eq!(weyl_dim(&a2, &fw(&a2, &[1, 0])), BigInt::from(3));
        assert_eq!(weyl_dim(&a2, &fw(&a2, &[1, 1])), BigInt::from(8));
        let g2 = rs("G2");
        assert_eq!(weyl_dim(&g2, &fw(&g2, &[1, 0])), BigInt::from(7));
        assert_eq!(weyl_dim(&g2, &fw(&g2, &[0, 1])), BigInt::from(14));
        let b3 = rs("B3");
        assert_eq!(weyl_dim(&b3, &fw(&b3, &[0, 0, 1])), BigInt::from(8));
        assert_eq!(weyl_dim(&b3, &fw(&b3, &[1, 0, 0])), BigInt::from(7));
    }

    #[test]
    fn multiplicities_sum_to_dim() {
        for (s, coeffs) in [("A2", vec![1i64, 1]), ("B2", vec![1, 1]), ("G2", vec![0, 1])] {
            let r = rs(s);
            let lam = fw(&r, &coeffs);
            let mults = weight_multiplicities(&r, &lam);
            let total: u64 = {
                // sum over the full orbit of each dominant-ish table entry:
                // the table already lists every weight in the box
                mults.values().sum()
            };
            assert_eq!(BigInt::from(total), weyl_dim(&r, &lam), "type {s}");
        }
    }

    #[test]
    fn adjoint_zero_weight_multiplicity_is_rank() {
        let a2 = rs("A2");
        let lam = fw(&a2, &[1, 1]);
        let mults = weight_multiplicities(&a2, &lam);
        assert_eq!(mults[&vec![Rat::zero(), Rat::zero()]], 2);
    }
}
