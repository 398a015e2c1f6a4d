//! Straightening engine for the universal highest-weight module: ordered
//! monomials in the lowering operators with integer coefficients, raising
//! operators commuted through letter by letter, and the contravariant
//! pairing that cuts out the simple quotient together with its minimal
//! integral lattice.

use super::{weight_sub, ZLattice};
use crate::chevalley::{ChevalleyBasis, GElt, Sign};
use crate::coeffring::{factorial_big, hnf_with_transform, solve_in_hnf};
use crate::rootfold::Rat;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

/// Ordered monomial in the lowering root vectors: exponent per positive root.
type Mono = Vec<u16>;
/// Verma vector: integer combination of ordered monomials applied to v.
type VVec = BTreeMap<Mono, BigInt>;

pub struct VermaEngine {
    pub cb: Arc<ChevalleyBasis>,
    pub hw: Vec<Rat>,
    lower_cache: HashMap<(usize, Mono), Arc<VVec>>,
    raise_cache: HashMap<(usize, Mono), Arc<VVec>>,
}

fn vvec_add(acc: &mut VVec, v: &VVec, scale: &BigInt) {
    if scale.is_zero() {
        return;
    }
    for (m, c) in v {
        let add = c * scale;
        let slot = acc.entry(m.clone()).or_insert_with(BigInt::zero);
        *slot += add;
        if slot.is_zero() {
            acc.remove(m);
        }
    }
}

impl VermaEngine {
    pub fn new(cb: Arc<ChevalleyBasis>, hw: Vec<Rat>) -> Self {
        VermaEngine { cb, hw, lower_cache: HashMap::new(), raise_cache: HashMap::new() }
    }

    fn first_letter(m: &Mono) -> Option<usize> {
        m.iter().position(|&e| e > 0)
    }

    fn weight_of_mono(&self, m: &Mono) -> Vec<Rat> {
        let rank = self.cb.rs.rank();
        let mut w = vec![Rat::zero(); rank];
        for (r, &e) in m.iter().enumerate() {
            if e > 0 {
                for i in 0..rank {
                    w[i] += Rat::from_integer(e as i64 * self.cb.rs.positive_roots[r][i]);
                }
            }
        }
        w
    }

    /// x^-_gamma times an ordered monomial, re-straightened.
    pub fn lower(&mut self, gamma: usize, m: &Mono) -> Arc<VVec> {
        if let Some(hit) = self.lower_cache.get(&(gamma, m.clone())) {
            return hit.clone();
        }
        let result = match Self::first_letter(m) {
            None => {
                let mut mono = vec![0u16; self.cb.rs.num_positive()];
                mono[gamma] = 1;
                let mut v = VVec::new();
                v.insert(mono, BigInt::one());
                v
            }
            Some(f) if gamma <= f => {
                let mut mono = m.clone();
                mono[gamma] += 1;
                let mut v = VVec::new();
                v.insert(mono, BigInt::one());
                v
            }
            Some(f) => {
                let mut rest = m.clone();
                rest[f] -= 1;
                // x_g x_f rest = x_f (x_g rest) + [x_g, x_f] rest
                let inner = self.lower(gamma, &rest);
                let mut acc = VVec::new();
                for (mono, c) in inner.iter() {
                    // every letter of `inner` is >= f, prepend directly
                    debug_assert!(Self::first_letter(mono).map_or(true, |x| x >= f));
                    let mut mm = mono.clone();
                    mm[f] += 1;
                    vvec_add(&mut acc, &VVec::from([(mm, BigInt::one())]), c);
                }
                let br = self.cb.bracket_elt(&GElt::X(gamma, Sign::Minus), &GElt::X(f, Sign::Minus));
                for (e, n) in br {
                    match e {
                        GElt::X(d, Sign::Minus) => {
                            let t = self.lower(d, &rest);
                            vvec_add(&mut acc, &t, &BigInt::from(n));
                        }
                        _ => unreachable!("lowering bracket stays in n^-"),
                    }
                }
                acc
            }
        };
        let arc = Arc::new(result);
        self.lower_cache.insert((gamma, m.clone()), arc.clone());
        arc
    }

    /// x^+_gamma applied to an ordered monomial times the highest vector.
    pub fn raise(&mut self, gamma: usize, m: &Mono) -> Arc<VVec> {
        if let Some(hit) = self.raise_cache.get(&(gamma, m.clone())) {
            return hit.clone();
        }
        let result = match Self::first_letter(m) {
            None => VVec::new(),
            Some(f) => {
                let mut rest = m.clone();
                rest[f] -= 1;
                let mut acc = VVec::new();
                // x_f * (x^+_g rest v)
                let inner = self.raise(gamma, &rest);
                for (mono, c) in inner.iter() {
                    let t = self.lower(f, mono);
                    vvec_add(&mut acc, &t, c);
                }
                // [x^+_g, x^-_f] rest v
                let br = self.cb.bracket_elt(&GElt::X(gamma, Sign::Plus), &GElt::X(f, Sign::Minus));
                for (e, n) in br {
                    match e {
                        GElt::H(i) => {
                            let w = self.weight_of_mono(&rest);
                            let val = self
                                .cb
                                .rs
                                .pairing(&weight_sub(&self.hw, &w), i);
                            assert!(val.is_integer());
                            let scalar = BigInt::from(n) * BigInt::from(val.to_integer());
                            vvec_add(&mut acc, &VVec::from([(rest.clone(), BigInt::one())]), &scalar);
                        }
                        GElt::X(d, Sign::Minus) => {
                            let t = self.lower(d, &rest);
                            vvec_add(&mut acc, &t, &BigInt::from(n));
                        }
                        GElt::X(d, Sign::Plus) => {
                            let t = self.raise(d, &rest);
                            vvec_add(&mut acc, &t, &BigInt::from(n));
                        }
                    }
                }
                acc
            }
        };
        let arc = Arc::new(result);
        self.raise_cache.insert((gamma, m.clone()), arc.clone());
        arc
    }

    /// Contravariant pairing of ordered (ordinary-power) monomials applied
    /// to the highest vector.
    fn pair_ord(&mut self, mi: &Mono, vj: &VVec) -> BigInt {
        // peel the raising word of mi letter by letter, low root first
        let mut cur = vj.clone();
        for (r, &e) in mi.iter().enumerate() {
            for _ in 0..e {
                let mut next = VVec::new();
                for (mono, c) in cur.iter() {
                    let t = self.raise(r, mono);
                    vvec_add(&mut next, &t, c);
                }
                cur = next;
                if cur.is_empty() {
                    return BigInt::zero();
                }
            }
        }
        let empty: Mono = vec![0; self.cb.rs.num_positive()];
        cur.get(&empty).cloned().unwrap_or_else(BigInt::zero)
    }
}

/// Monomial exponent vectors of weight eta over the positive roots.
fn kostant_monomials(cb: &ChevalleyBasis, eta: &[i64]) -> Vec<Mono> {
    let roots = &cb.rs.positive_roots;
    let mut out = Vec::new();
    let mut cur: Mono = vec![0; roots.len()];
    // recurse from the highest root down; heights prune fast
    fn go(
        roots: &[Vec<i64>],
        r: usize,
        remaining: Vec<i64>,
        cur: &mut Mono,
        out: &mut Vec<Mono>,
    ) {
        if remaining.iter().all(|&x| x == 0) {
            out.push(cur.clone());
            return;
        }
        if r == 0 {
            // only alpha_min left: remaining must be a multiple of it
            let root = &roots[0];
            let mut k: Option<i64> = None;
            for (a, b) in remaining.iter().zip(root) {
                if *b == 0 {
                    if *a != 0 {
                        return;
                    }
                } else {
                    if a % b != 0 || a / b < 0 {
                        return;
                    }
                    match k {
                        None => k = Some(a / b),
                        Some(kk) => {
                            if kk != a / b {
                                return;
                            }
                        }
                    }
                }
            }
            if let Some(kk) = k {
                cur[0] = kk as u16;
                out.push(cur.clone());
                cur[0] = 0;
            }
            return;
        }
        let root = &roots[r];
        let maxk = remaining
            .iter()
            .zip(root)
            .filter(|(_, &b)| b > 0)
            .map(|(&a, &b)| a / b)
            .min()
            .unwrap_or(0);
        for k in (0..=maxk).rev() {
            if remaining.iter().zip(root).any(|(&a, &b)| a - k * b < 0) {
                continue;
            }
            let next: Vec<i64> = remaining.iter().zip(root).map(|(&a, &b)| a - k * b).collect();
            cur[r] = k as u16;
            go(roots, r - 1, next, cur, out);
            cur[r] = 0;
        }
    }
    if roots.is_empty() {
        return out;
    }
    go(roots, roots.len() - 1, eta.to_vec(), &mut cur, &mut out);
    out.sort();
    out
}

fn mono_factorial(m: &Mono) -> BigInt {
    let mut acc = BigInt::one();
    for &e in m {
        if e > 1 {
            acc *= factorial_big(e as usize);
        }
    }
    acc
}

/// Build the minimal integral lattice of the simple highest-weight module by
/// the contravariant pairing on the universal module, weight space by weight
/// space. Intended for small highest weights (the fundamental modules); large
/// weights go through the tensor bootstrap.
pub fn verma_lattice(cb: Arc<ChevalleyBasis>, hw: Vec<Rat>, kmax: usize) -> ZLattice {
    let rank = cb.rs.rank();
    // lambda - w0(lambda) bounds the support box
    let w0 = {
        let neg: Vec<Rat> = hw.iter().map(|c| -*c).collect();
        let dom = cb.rs.dominant_rep(&neg);
        dom.iter().map(|c| -*c).collect::<Vec<Rat>>()
    };
    let span = weight_sub(&hw, &w0);
    let bounds: Vec<i64> = span
        .iter()
        .map(|c| {
            assert!(c.is_integer() && !c.is_negative());
            c.to_integer()
        })
        .collect();

    // candidate etas ordered by height then lex
    let mut etas: Vec<Vec<i64>> = Vec::new();
    let mut stack = vec![vec![]];
    while let Some(prefix) = stack.pop() {
        if prefix.len() == rank {
            etas.push(prefix);
            continue;
        }
        let i = prefix.len();
        for v in 0..=bounds[i] {
            let mut p = prefix.clone();
            p.push(v);
            stack.push(p);
        }
    }
    etas.sort_by_key(|e| (e.iter().sum::<i64>(), e.clone()));

    let mut eng = VermaEngine::new(cb.clone(), hw.clone());

    struct Block {
        eta: Vec<i64>,
        monos: Vec<Mono>,
        gram_div: Vec<Vec<BigInt>>,
        basis_u: Vec<Vec<BigInt>>, // rows: integer combos of divided monomials
        hnf: Vec<Vec<BigInt>>,     // pairing coordinates of the basis rows
        offset: usize,
    }

    let mut blocks: Vec<Block> = Vec::new();
    let mut eta_index: HashMap<Vec<i64>, usize> = HashMap::new();
    let mut offset = 0usize;
    for eta in &etas {
        let monos = kostant_monomials(&cb, eta);
        if monos.is_empty() {
            continue;
        }
        // divided Gram matrix
        let n = monos.len();
        let singletons: Vec<VVec> = monos
            .iter()
            .map(|m| VVec::from([(m.clone(), BigInt::one())]))
            .collect();
        let mut gram = vec![vec![BigInt::zero(); n]; n];
        for i in 0..n {
            for j in 0..=i {
                let p = eng.pair_ord(&monos[i], &singletons[j]);
                let den = mono_factorial(&monos[i]) * mono_factorial(&monos[j]);
                let (q, r) = num_integer::Integer::div_rem(&p, &den);
                assert!(r.is_zero(), "lattice denominator: non-integral pairing");
                gram[i][j] = q.clone();
                gram[j][i] = q;
            }
        }
        let (hnf, u) = hnf_with_transform(&gram);
        if hnf.is_empty() {
            continue;
        }
        let rank_w = hnf.len();
        blocks.push(Block {
            eta: eta.clone(),
            monos,
            gram_div: gram,
            basis_u: u,
            hnf,
            offset,
        });
        eta_index.insert(eta.clone(), blocks.len() - 1);
        offset += rank_w;
    }
    let dim = offset;

    // weights & blocks
    let weights: Vec<Vec<Rat>> = blocks
        .iter()
        .map(|b| {
            let eta_r: Vec<Rat> = b.eta.iter().map(|&x| Rat::from_integer(x)).collect();
            weight_sub(&hw, &eta_r)
        })
        .collect();
    let mut basis_weight = Vec::with_capacity(dim);
    for (wi, b) in blocks.iter().enumerate() {
        for _ in 0..b.hnf.len() {
            basis_weight.push(wi);
        }
    }
    let hv = blocks
        .iter()
        .position(|b| b.eta.iter().all(|&x| x == 0))
        .expect("highest weight block");
    let hv_idx = blocks[hv].offset;
    assert_eq!(blocks[hv].hnf.len(), 1);

    // action matrices
    let mut ops: BTreeMap<(usize, Sign, usize), Vec<Vec<(usize, BigInt)>>> = BTreeMap::new();
    for gamma in 0..cb.rs.num_positive() {
        for sign in [Sign::Plus, Sign::Minus] {
            for k in 1..=kmax {
                let mut cols: Vec<Vec<(usize, BigInt)>> = vec![Vec::new(); dim];
                for b in &blocks {
                    // target eta
                    let mut te = b.eta.clone();
                    let root = &cb.rs.positive_roots[gamma];
                    let mut ok = true;
                    for (i, &rc) in root.iter().enumerate() {
                        let v = match sign {
                            Sign::Minus => te[i] + k as i64 * rc,
                            Sign::Plus => te[i] - k as i64 * rc,
                        };
                        if v < 0 || (v > bounds[i]) {
                            ok = false;
                            break;
                        }
                        te[i] = v;
                    }
                    if !ok {
                        continue;
                    }
                    let Some(&tb) = eta_index.get(&te) else { continue };
                    let target = &blocks[tb];
                    for (s, urow) in b.basis_u.iter().enumerate() {
                        // result as rational combo over ordinary monomials
                        let mut res: BTreeMap<Mono, BigRational> = BTreeMap::new();
                        for (j, uc) in urow.iter().enumerate() {
                            if uc.is_zero() {
                                continue;
                            }
                            let mono = &b.monos[j];
                            // scale: uc / (k! * c_j)
                            let den = factorial_big(k) * mono_factorial(mono);
                            let scale = BigRational::new(uc.clone(), den);
                            let mut cur = VVec::from([(mono.clone(), BigInt::one())]);
                            for _ in 0..k {
                                let mut next = VVec::new();
                                for (mm, c) in cur.iter() {
                                    let t = match sign {
                                        Sign::Minus => eng.lower(gamma, mm),
                                        Sign::Plus => eng.raise(gamma, mm),
                                    };
                                    vvec_add(&mut next, &t, c);
                                }
                                cur = next;
                                if cur.is_empty() {
                                    break;
                                }
                            }
                            for (mm, c) in cur.iter() {
                                let add = &scale * BigRational::from(c.clone());
                                let slot = res
                                    .entry(mm.clone())
                                    .or_insert_with(BigRational::zero);
                                *slot += add;
                                if slot.is_zero() {
                                    res.remove(mm);
                                }
                            }
                        }
                        if res.is_empty() {
                            continue;
                        }
                        // to divided-monomial coordinates: ord = c_l * div
                        let mut qcoords = vec![BigRational::zero(); target.monos.len()];
                        for (mm, c) in res.iter() {
                            let l = target
                                .monos
                                .binary_search(mm)
                                .expect("result mono in target weight space");
                            qcoords[l] = c * BigRational::from(mono_factorial(mm));
                        }
                        // pairing coordinates: D * q, must be integral
                        let mut pair = vec![BigInt::zero(); target.monos.len()];
                        for (row, pr) in pair.iter_mut().enumerate() {
                            let mut acc = BigRational::zero();
                            for (col, qc) in qcoords.iter().enumerate() {
                                if !qc.is_zero() {
                                    acc += qc * BigRational::from(target.gram_div[row][col].clone());
                                }
                            }
                            assert!(acc.is_integer(), "lattice denominator in action");
                            *pr = acc.to_integer();
                        }
                        let sol = solve_in_hnf(&target.hnf, &pair)
                            .expect("action image inside the lattice");
                        for (t, c) in sol.iter().enumerate() {
                            if !c.is_zero() {
                                cols[b.offset + s].push((target.offset + t, c.clone()));
                            }
                        }
                    }
                }
                if cols.iter().any(|c| !c.is_empty()) {
                    ops.insert((gamma, sign, k), cols);
                }
            }
        }
    }

    // gram blocks on the chosen bases: B * G_div * B^T
    let gram_blocks: Vec<Vec<Vec<BigInt>>> = blocks
        .iter()
        .map(|b| {
            let r = b.basis_u.len();
            let mut g = vec![vec![BigInt::zero(); r]; r];
            for s in 0..r {
                for t in 0..=s {
                    let mut acc = BigInt::zero();
                    for (i, ci) in b.basis_u[s].iter().enumerate() {
                        if ci.is_zero() {
                            continue;
                        }
                        for (j, cj) in b.basis_u[t].iter().enumerate() {
                            if !cj.is_zero() {
                                acc += ci * cj * &b.gram_div[i][j];
                            }
                        }
                    }
                    g[s][t] = acc.clone();
                    g[t][s] = acc;
                }
            }
            g
        })
        .collect();

    let block_ranges: Vec<(usize, usize)> =
        blocks.iter().map(|b| (b.offset, b.hnf.len())).collect();

    ZLattice {
        cb,
        hw,
        weights,
        basis_weight,
        block_ranges,
        hv: hv_idx,
        kmax,
        ops,
        gram_blocks,
    }
}

pub(super) fn weight_is_integral_dominant(cb: &ChevalleyBasis, w: &[Rat]) -> bool {
    (0..cb.rs.rank()).all(|i| {
        let p = cb.rs.pairing(w, i);
        p.is_integer() && !p.is_negative()
    })
}
