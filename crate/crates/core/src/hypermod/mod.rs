//! Finite-dimensional weight modules over any supported field: universal
//! highest-weight modules realized by reduction of a minimal integral
//! lattice, simple quotients via the contravariant form, divided-power
//! action tables, characters, tensor products, and cyclic closures.

mod freudenthal;
mod verma;

pub use freudenthal::{weight_multiplicities, weyl_dim};

use crate::chevalley::{chevalley_basis, ChevalleyBasis, Sign};
use crate::coeffring::{binom_big, hnf_with_transform, solve_in_hnf, Field};
use crate::rootfold::{DynkinType, Rat};
use num_bigint::BigInt;
use num_traits::{One, Zero};
use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, Mutex};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModError {
    #[error("characteristic 2 is not admissible for the fixed algebra of an A_2n fold")]
    CharTwoA2n,
    #[error("divided power degree {0} exceeds the stored table bound {1}")]
    DegreeOutOfRange(usize, usize),
    #[error("highest weight must be dominant integral")]
    NotDominant,
}

pub fn weight_add(a: &[Rat], b: &[Rat]) -> Vec<Rat> {
    a.iter().zip(b).map(|(x, y)| *x + *y).collect()
}

pub fn weight_sub(a: &[Rat], b: &[Rat]) -> Vec<Rat> {
    a.iter().zip(b).map(|(x, y)| *x - *y).collect()
}

/// Dominant weight from fundamental-weight coefficients, in root coordinates.
pub fn weight_from_coeffs(cb: &ChevalleyBasis, coeffs: &[i64]) -> Vec<Rat> {
    let rank = cb.rs.rank();
    assert_eq!(coeffs.len(), rank);
    let mut w = vec![Rat::zero(); rank];
    for (i, &c) in coeffs.iter().enumerate() {
        for j in 0..rank {
            w[j] += Rat::from_integer(c) * cb.rs.fundamental_weights[i][j];
        }
    }
    w
}

/// Fundamental-weight coefficients (pairings with the simple coroots).
pub fn weight_coeffs(cb: &ChevalleyBasis, w: &[Rat]) -> Vec<i64> {
    (0..cb.rs.rank())
        .map(|i| {
            let p = cb.rs.pairing(w, i);
            assert!(p.is_integer());
            p.to_integer()
        })
        .collect()
}

pub type SparseColsZ = Vec<Vec<(usize, BigInt)>>;

/// Minimal integral form of the simple highest-weight module: basis grouped
/// into weight blocks, divided-power action tables over Z, and the
/// contravariant Gram blocks.
#[derive(Debug, Clone)]
pub struct ZLattice {
    pub cb: Arc<ChevalleyBasis>,
    pub hw: Vec<Rat>,
    /// Distinct weights, one per block.
    pub weights: Vec<Vec<Rat>>,
    pub basis_weight: Vec<usize>,
    /// (offset, size) per weight block.
    pub block_ranges: Vec<(usize, usize)>,
    pub hv: usize,
    pub kmax: usize,
    /// (root, sign, k) -> columns of the action matrix.
    pub ops: BTreeMap<(usize, Sign, usize), SparseColsZ>,
    pub gram_blocks: Vec<Vec<Vec<BigInt>>>,
}

impl ZLattice {
    pub fn dim(&self) -> usize {
        self.basis_weight.len()
    }

    fn trivial(cb: Arc<ChevalleyBasis>, kmax: usize) -> ZLattice {
        let rank = cb.rs.rank();
        ZLattice {
            cb,
            hw: vec![Rat::zero(); rank],
            weights: vec![vec![Rat::zero(); rank]],
            basis_weight: vec![0],
            block_ranges: vec![(0, 1)],
            hv: 0,
            kmax,
            ops: BTreeMap::new(),
            gram_blocks: vec![vec![vec![BigInt::one()]]],
        }
    }

    pub fn apply_op(&self, root: usize, sign: Sign, k: usize, v: &[BigInt]) -> Vec<BigInt> {
        let mut out = vec![BigInt::zero(); self.dim()];
        if k == 0 {
            out.clone_from_slice(v);
            return out;
        }
        if let Some(cols) = self.ops.get(&(root, sign, k)) {
            for (c, col) in cols.iter().enumerate() {
                if v[c].is_zero() {
                    continue;
                }
                for (r, x) in col {
                    out[*r] += x * &v[c];
                }
            }
        }
        out
    }

    /// Reduce the lattice along a ring map into a concrete field.
    pub fn reduce<F: Field>(&self, field: F) -> Result<Module<F>, ModError> {
        if field.characteristic() == 2 && self.cb.a2n_derived {
            return Err(ModError::CharTwoA2n);
        }
        let mut ops = BTreeMap::new();
        for (key, cols) in &self.ops {
            let rcols: Vec<Vec<(usize, F::Elt)>> = cols
                .iter()
                .map(|col| {
                    col.iter()
                        .filter_map(|(r, x)| {
                            let e = field.from_bigint(x);
                            if field.is_zero(&e) {
                                None
                            } else {
                                Some((*r, e))
                            }
                        })
                        .collect()
                })
                .collect();
            ops.insert(*key, rcols);
        }
        let gram = self
            .gram_blocks
            .iter()
            .map(|g| {
                g.iter()
                    .map(|row| row.iter().map(|x| field.from_bigint(x)).collect())
                    .collect()
            })
            .collect();
        Ok(Module {
            field,
            cb: self.cb.clone(),
            hw: self.hw.clone(),
            weights: self.weights.clone(),
            basis_weight: self.basis_weight.clone(),
            block_ranges: self.block_ranges.clone(),
            hv: self.hv,
            kmax: self.kmax,
            ops,
            gram: Some(gram),
        })
    }
}

/// Universal highest-weight lattice for a dominant integral weight, built
/// from the fundamental lattices by cyclic spanning inside tensor products,
/// with an HNF pass at every weight level. Memoized per (type, weight, kmax).
pub fn weyl_lattice(cb: &Arc<ChevalleyBasis>, hw: &[Rat], kmax_req: Option<usize>) -> Arc<ZLattice> {
    type Key = (DynkinType, Vec<Rat>, usize);
    static CACHE: Mutex<Option<HashMap<Key, Arc<ZLattice>>>> = Mutex::new(None);

    assert!(verma::weight_is_integral_dominant(cb, hw), "dominant integral weight required");
    let coeffs = weight_coeffs(cb, hw);
    let kmax = kmax_req.unwrap_or_else(|| default_kmax(cb, hw));
    let key = (cb.rs.dynkin_type, hw.to_vec(), kmax);
    if let Some(hit) = CACHE.lock().unwrap().get_or_insert_with(HashMap::new).get(&key) {
        return hit.clone();
    }

    let height: i64 = coeffs.iter().sum();
    let built = if height == 0 {
        ZLattice::trivial(cb.clone(), kmax)
    } else if height == 1 {
        verma::verma_lattice(cb.clone(), hw.to_vec(), kmax)
    } else {
        // peel one fundamental weight off
        let i = coeffs.iter().position(|&c| c > 0).unwrap();
        let omega = weight_from_coeffs(cb, &{
            let mut e = vec![0i64; cb.rs.rank()];
            e[i] = 1;
            e
        });
        let rest = weight_sub(hw, &omega);
        let left = weyl_lattice(cb, &rest, Some(kmax));
        let right = weyl_lattice(cb, &omega, Some(kmax));
        tensor_span(cb, &left, &right, hw, kmax)
    };
    let arc = Arc::new(built);
    CACHE.lock().unwrap().as_mut().unwrap().insert(key, arc.clone());
    arc
}

/// Default stored power bound: max pairing of the weight against a coroot,
/// plus one so the vanishing beyond the string is witnessed in the tables.
pub fn default_kmax(cb: &ChevalleyBasis, hw: &[Rat]) -> usize {
    let mut best = 0i64;
    for r in 0..cb.rs.num_positive() {
        let p = cb.rs.pairing_coroot(hw, r);
        assert!(p.is_integer());
        best = best.max(p.to_integer());
    }
    (best + 1) as usize
}

/// Cyclic span of hv (x) hv inside the tensor product of two lattices.
fn tensor_span(
    cb: &Arc<ChevalleyBasis>,
    left: &ZLattice,
    right: &ZLattice,
    hw: &[Rat],
    kmax: usize,
) -> ZLattice {
    let _ = cb.rs.rank();
    let dim_r = right.dim();
    let amb = left.dim() * dim_r;
    let amb_weight = |idx: usize| -> Vec<Rat> {
        let (a, b) = (idx / dim_r, idx % dim_r);
        weight_add(&left.weights[left.basis_weight[a]], &right.weights[right.basis_weight[b]])
    };

    // ambient indices grouped by weight
    let mut amb_blocks: HashMap<Vec<Rat>, Vec<usize>> = HashMap::new();
    for idx in 0..amb {
        amb_blocks.entry(amb_weight(idx)).or_default().push(idx);
    }

    // support box for the target weight
    let w0 = {
        let neg: Vec<Rat> = hw.iter().map(|c| -*c).collect();
        let dom = cb.rs.dominant_rep(&neg);
        dom.iter().map(|c| -*c).collect::<Vec<Rat>>()
    };
    let span_bound = weight_sub(hw, &w0);
    let bounds: Vec<i64> = span_bound.iter().map(|c| c.to_integer()).collect();
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
    etas.sort_by_key(|e| (e.iter().sum::<i64>(), e.clone()));

    // divided op applied to a sparse ambient vector
    type SV = BTreeMap<usize, BigInt>;
    let apply = |root: usize, sign: Sign, k: usize, v: &SV| -> SV {
        let mut out: SV = BTreeMap::new();
        for l in 0..=k {
            // left part, by column
            let mut mid: SV = BTreeMap::new();
            for (&idx, c) in v {
                let (a, b) = (idx / dim_r, idx % dim_r);
                if l == 0 {
                    let slot = mid.entry(idx).or_insert_with(BigInt::zero);
                    *slot += c;
                } else if let Some(cols) = left.ops.get(&(root, sign, l)) {
                    for (r, x) in &cols[a] {
                        let slot = mid.entry(r * dim_r + b).or_insert_with(BigInt::zero);
                        *slot += x * c;
                    }
                }
            }
            let kr = k - l;
            for (&idx, c) in &mid {
                if c.is_zero() {
                    continue;
                }
                let (a, b) = (idx / dim_r, idx % dim_r);
                if kr == 0 {
                    let slot = out.entry(idx).or_insert_with(BigInt::zero);
                    *slot += c;
                } else if let Some(cols) = right.ops.get(&(root, sign, kr)) {
                    for (r, x) in &cols[b] {
                        let slot = out.entry(a * dim_r + r).or_insert_with(BigInt::zero);
                        *slot += x * c;
                    }
                }
            }
        }
        out.retain(|_, c| !c.is_zero());
        out
    };

    // spanning sweep from the top
    struct WBlock {
        weight: Vec<Rat>,
        amb_ids: Vec<usize>,
        basis: Vec<SV>,
        hnf: Vec<Vec<BigInt>>,
    }
    let mut built: Vec<WBlock> = Vec::new();
    let mut weight_pos: HashMap<Vec<Rat>, usize> = HashMap::new();

    for eta in &etas {
        let eta_r: Vec<Rat> = eta.iter().map(|&x| Rat::from_integer(x)).collect();
        let w = weight_sub(hw, &eta_r);
        let Some(amb_ids) = amb_blocks.get(&w) else { continue };
        let mut candidates: Vec<SV> = Vec::new();
        if eta.iter().all(|&x| x == 0) {
            let mut hvv: SV = BTreeMap::new();
            hvv.insert(left.hv * dim_r + right.hv, BigInt::one());
            candidates.push(hvv);
        } else {
            for gamma in 0..cb.rs.num_positive() {
                let root = &cb.rs.positive_roots[gamma];
                // largest k with eta - k*gamma >= 0
                let mut kcap = i64::MAX;
                for (i, &rc) in root.iter().enumerate() {
                    if rc > 0 {
                        kcap = kcap.min(eta[i] / rc);
                    }
                }
                for k in 1..=kcap.max(0) as usize {
                    let src_eta: Vec<i64> =
                        eta.iter().zip(root).map(|(&e, &rc)| e - k as i64 * rc).collect();
                    let src_r: Vec<Rat> = src_eta.iter().map(|&x| Rat::from_integer(x)).collect();
                    let src_w = weight_sub(hw, &src_r);
                    if let Some(&pos) = weight_pos.get(&src_w) {
                        for bvec in &built[pos].basis {
                            let img = apply(gamma, Sign::Minus, k, bvec);
                            if !img.is_empty() {
                                candidates.push(img);
                            }
                        }
                    }
                }
            }
        }
        if candidates.is_empty() {
            continue;
        }
        // local dense coordinates for HNF
        let local: HashMap<usize, usize> =
            amb_ids.iter().enumerate().map(|(i, &x)| (x, i)).collect();
        let rows: Vec<Vec<BigInt>> = candidates
            .iter()
            .map(|sv| {
                let mut row = vec![BigInt::zero(); amb_ids.len()];
                for (idx, c) in sv {
                    row[local[idx]] = c.clone();
                }
                row
            })
            .collect();
        let (hnf, _) = hnf_with_transform(&rows);
        if hnf.is_empty() {
            continue;
        }
        let basis: Vec<SV> = hnf
            .iter()
            .map(|row| {
                row.iter()
                    .enumerate()
                    .filter(|(_, c)| !c.is_zero())
                    .map(|(i, c)| (amb_ids[i], c.clone()))
                    .collect()
            })
            .collect();
        weight_pos.insert(w.clone(), built.len());
        built.push(WBlock { weight: w, amb_ids: amb_ids.clone(), basis, hnf });
    }

    // assemble
    let mut offset = 0usize;
    let mut block_ranges = Vec::new();
    let mut basis_weight = Vec::new();
    for (wi, b) in built.iter().enumerate() {
        block_ranges.push((offset, b.basis.len()));
        for _ in 0..b.basis.len() {
            basis_weight.push(wi);
        }
        offset += b.basis.len();
    }
    let dim = offset;
    let weights: Vec<Vec<Rat>> = built.iter().map(|b| b.weight.clone()).collect();
    let hv_block = built
        .iter()
        .position(|b| b.weight == hw.to_vec())
        .expect("highest weight block");
    assert_eq!(built[hv_block].basis.len(), 1, "highest weight space is a line");
    let hv = block_ranges[hv_block].0;

    // ops on the new basis
    let mut ops: BTreeMap<(usize, Sign, usize), SparseColsZ> = BTreeMap::new();
    for gamma in 0..cb.rs.num_positive() {
        let root: Vec<Rat> = cb.rs.positive_roots[gamma]
            .iter()
            .map(|&x| Rat::from_integer(x))
            .collect();
        for sign in [Sign::Plus, Sign::Minus] {
            for k in 1..=kmax {
                let mut cols: SparseColsZ = vec![Vec::new(); dim];
                let mut any = false;
                for (wi, b) in built.iter().enumerate() {
                    let shift: Vec<Rat> = root.iter().map(|c| *c * Rat::from_integer(k as i64)).collect();
                    let tw = match sign {
                        Sign::Minus => weight_sub(&b.weight, &shift),
                        Sign::Plus => weight_add(&b.weight, &shift),
                    };
                    let Some(&tpos) = weight_pos.get(&tw) else {
                        // image must vanish; verify on the fly
                        for (s, bvec) in b.basis.iter().enumerate() {
                            let img = apply(gamma, sign, k, bvec);
                            assert!(img.is_empty(), "image escapes the built support");
                            let _ = s;
                        }
                        continue;
                    };
                    let target = &built[tpos];
                    let tlocal: HashMap<usize, usize> =
                        target.amb_ids.iter().enumerate().map(|(i, &x)| (x, i)).collect();
                    for (s, bvec) in b.basis.iter().enumerate() {
                        let img = apply(gamma, sign, k, bvec);
                        if img.is_empty() {
                            continue;
                        }
                        let mut t = vec![BigInt::zero(); target.amb_ids.len()];
                        for (idx, c) in &img {
                            t[tlocal[idx]] = c.clone();
                        }
                        let sol = solve_in_hnf(&target.hnf, &t)
                            .expect("action image inside the lattice");
                        let src = block_ranges[wi].0 + s;
                        let toff = block_ranges[tpos].0;
                        for (ti, c) in sol.iter().enumerate() {
                            if !c.is_zero() {
                                cols[src].push((toff + ti, c.clone()));
                                any = true;
                            }
                        }
                    }
                }
                if any {
                    ops.insert((gamma, sign, k), cols);
                }
            }
        }
    }

    // gram blocks: product form restricted to the new basis
    let lblock = |a: usize| left.basis_weight[a];
    let rblock = |b: usize| right.basis_weight[b];
    let pair_amb = |i: usize, j: usize| -> BigInt {
        let (a, b) = (i / dim_r, i % dim_r);
        let (a2, b2) = (j / dim_r, j % dim_r);
        if lblock(a) != lblock(a2) || rblock(b) != rblock(b2) {
            return BigInt::zero();
        }
        let (la, sa) = left.block_ranges[lblock(a)];
        let (lb, sb) = right.block_ranges[rblock(b)];
        let _ = (sa, sb);
        let g1 = &left.gram_blocks[lblock(a)][a - la][a2 - la];
        let g2 = &right.gram_blocks[rblock(b)][b - lb][b2 - lb];
        g1 * g2
    };
    let gram_blocks: Vec<Vec<Vec<BigInt>>> = built
        .iter()
        .map(|b| {
            let r = b.basis.len();
            let mut g = vec![vec![BigInt::zero(); r]; r];
            for s in 0..r {
                for t in 0..=s {
                    let mut acc = BigInt::zero();
                    for (i, ci) in &b.basis[s] {
                        for (j, cj) in &b.basis[t] {
                            let p = pair_amb(*i, *j);
                            if !p.is_zero() {
                                acc += ci * cj * p;
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

    ZLattice {
        cb: cb.clone(),
        hw: hw.to_vec(),
        weights,
        basis_weight,
        block_ranges,
        hv,
        kmax,
        ops,
        gram_blocks,
    }
}

/// Weight module over a concrete field with divided-power action tables.
#[derive(Debug, Clone)]
pub struct Module<F: Field> {
    pub field: F,
    pub cb: Arc<ChevalleyBasis>,
    pub hw: Vec<Rat>,
    pub weights: Vec<Vec<Rat>>,
    pub basis_weight: Vec<usize>,
    pub block_ranges: Vec<(usize, usize)>,
    pub hv: usize,
    pub kmax: usize,
    ops: BTreeMap<(usize, Sign, usize), Vec<Vec<(usize, F::Elt)>>>,
    /// Contravariant Gram blocks (present on lattice reductions and tensors).
    gram: Option<Vec<Vec<Vec<F::Elt>>>>,
}

/// Construct the universal highest-weight module over a field.
pub fn build_weyl_module<F: Field>(
    cb: &Arc<ChevalleyBasis>,
    hw: &[Rat],
    field: F,
    kmax: Option<usize>,
) -> Result<Module<F>, ModError> {
    if !verma::weight_is_integral_dominant(cb, hw) {
        return Err(ModError::NotDominant);
    }
    weyl_lattice(cb, hw, kmax).reduce(field)
}

impl<F: Field> Module<F> {
    pub fn dim(&self) -> usize {
        self.basis_weight.len()
    }

    pub fn zero_vec(&self) -> Vec<F::Elt> {
        vec![self.field.zero(); self.dim()]
    }

    pub fn hv_vec(&self) -> Vec<F::Elt> {
        let mut v = self.zero_vec();
        v[self.hv] = self.field.one();
        v
    }

    pub fn weight_of_basis(&self, idx: usize) -> &[Rat] {
        &self.weights[self.basis_weight[idx]]
    }

    /// Apply (x^{sign}_root)^{(k)}.
    pub fn apply_divided_power(
        &self,
        root: usize,
        sign: Sign,
        k: usize,
        v: &[F::Elt],
    ) -> Result<Vec<F::Elt>, ModError> {
        if k == 0 {
            return Ok(v.to_vec());
        }
        if k > self.kmax {
            return Err(ModError::DegreeOutOfRange(k, self.kmax));
        }
        let mut out = self.zero_vec();
        if let Some(cols) = self.ops.get(&(root, sign, k)) {
            for (c, col) in cols.iter().enumerate() {
                if self.field.is_zero(&v[c]) {
                    continue;
                }
                for (r, x) in col {
                    let add = self.field.mul(x, &v[c]);
                    out[*r] = self.field.add(&out[*r], &add);
                }
            }
        }
        Ok(out)
    }

    /// binom(h_i; k) acts diagonally through the weight grading.
    pub fn apply_h_binom(&self, i: usize, k: usize, v: &[F::Elt]) -> Vec<F::Elt> {
        let mut out = self.zero_vec();
        for (idx, c) in v.iter().enumerate() {
            if self.field.is_zero(c) {
                continue;
            }
            let mu = self.weight_of_basis(idx);
            let p = self.cb.rs.pairing(mu, i);
            let scal = self.field.from_bigint(&binom_big(p.to_integer(), k));
            out[idx] = self.field.mul(c, &scal);
        }
        out
    }

    pub fn character(&self) -> BTreeMap<Vec<Rat>, usize> {
        let mut ch = BTreeMap::new();
        for (wi, (_, size)) in self.block_ranges.iter().enumerate() {
            if *size > 0 {
                ch.insert(self.weights[wi].clone(), *size);
            }
        }
        ch
    }

    /// Tensor product with the comultiplication action on divided powers.
    pub fn tensor(&self, other: &Module<F>) -> Module<F> {
        assert_eq!(self.cb.rs.dynkin_type, other.cb.rs.dynkin_type);
        let dim_r = other.dim();
        let kmax = self.kmax.min(other.kmax);
        let hw = weight_add(&self.hw, &other.hw);
        // weight blocks of the product
        let mut blocks: BTreeMap<Vec<Rat>, Vec<usize>> = BTreeMap::new();
        for a in 0..self.dim() {
            for b in 0..dim_r {
                let w = weight_add(self.weight_of_basis(a), other.weight_of_basis(b));
                blocks.entry(w).or_default().push(a * dim_r + b);
            }
        }
        let weights: Vec<Vec<Rat>> = blocks.keys().cloned().collect();
        let mut perm = vec![0usize; self.dim() * dim_r]; // ambient -> new index
        let mut basis_weight = Vec::new();
        let mut block_ranges = Vec::new();
        let mut off = 0usize;
        let mut amb_order = Vec::new();
        for (wi, ids) in blocks.values().enumerate() {
            block_ranges.push((off, ids.len()));
            for &idx in ids {
                perm[idx] = off;
                basis_weight.push(wi);
                amb_order.push(idx);
                off += 1;
            }
        }
        let hv = perm[self.hv * dim_r + other.hv];

        let mut ops = BTreeMap::new();
        for gamma in 0..self.cb.rs.num_positive() {
            for sign in [Sign::Plus, Sign::Minus] {
                for k in 1..=kmax {
                    let mut cols: Vec<Vec<(usize, F::Elt)>> = vec![Vec::new(); off];
                    let mut any = false;
                    for (new_c, &amb) in amb_order.iter().enumerate() {
                        let (a, b) = (amb / dim_r, amb % dim_r);
                        let mut acc: HashMap<usize, F::Elt> = HashMap::new();
                        for l in 0..=k {
                            let la: Vec<(usize, F::Elt)> = if l == 0 {
                                vec![(a, self.field.one())]
                            } else {
                                self.ops
                                    .get(&(gamma, sign, l))
                                    .map(|cc| cc[a].clone())
                                    .unwrap_or_default()
                            };
                            let lb: Vec<(usize, F::Elt)> = if k - l == 0 {
                                vec![(b, self.field.one())]
                            } else {
                                other
                                    .ops
                                    .get(&(gamma, sign, k - l))
                                    .map(|cc| cc[b].clone())
                                    .unwrap_or_default()
                            };
                            for (ra, xa) in &la {
                                for (rb, xb) in &lb {
                                    let prod = self.field.mul(xa, xb);
                                    if self.field.is_zero(&prod) {
                                        continue;
                                    }
                                    let tgt = perm[ra * dim_r + rb];
                                    let slot =
                                        acc.entry(tgt).or_insert_with(|| self.field.zero());
                                    *slot = self.field.add(slot, &prod);
                                }
                            }
                        }
                        let mut col: Vec<(usize, F::Elt)> = acc
                            .into_iter()
                            .filter(|(_, x)| !self.field.is_zero(x))
                            .collect();
                        col.sort_by_key(|(r, _)| *r);
                        if !col.is_empty() {
                            any = true;
                        }
                        cols[new_c] = col;
                    }
                    if any {
                        ops.insert((gamma, sign, k), cols);
                    }
                }
            }
        }

        // product form per block
        let gram = match (&self.gram, &other.gram) {
            (Some(gl), Some(gr)) => {
                let mut out = Vec::new();
                for (wi, ids) in blocks.values().enumerate() {
                    let n = ids.len();
                    let mut g = vec![vec![self.field.zero(); n]; n];
                    for (s, &i1) in ids.iter().enumerate() {
                        for (t, &i2) in ids.iter().enumerate() {
                            let (a, b) = (i1 / dim_r, i1 % dim_r);
                            let (a2, b2) = (i2 / dim_r, i2 % dim_r);
                            if self.basis_weight[a] != self.basis_weight[a2]
                                || other.basis_weight[b] != other.basis_weight[b2]
                            {
                                continue;
                            }
                            let (la, _) = self.block_ranges[self.basis_weight[a]];
                            let (lb, _) = other.block_ranges[other.basis_weight[b]];
                            let g1 = &gl[self.basis_weight[a]][a - la][a2 - la];
                            let g2 = &gr[other.basis_weight[b]][b - lb][b2 - lb];
                            g[s][t] = self.field.mul(g1, g2);
                        }
                    }
                    out.push(g);
                    let _ = wi;
                }
                Some(out)
            }
            _ => None,
        };

        Module {
            field: self.field.clone(),
            cb: self.cb.clone(),
            hw,
            weights,
            basis_weight,
            block_ranges,
            hv,
            kmax,
            ops,
            gram,
        }
    }

    /// Radical of the contravariant form, as one dense vector per radical
    /// basis element.
    pub fn contravariant_radical(&self) -> Vec<Vec<F::Elt>> {
        let gram = self.gram.as_ref().expect("module carries no form");
        let mut rad = Vec::new();
        for (wi, (off, size)) in self.block_ranges.iter().enumerate() {
            if *size == 0 {
                continue;
            }
            let g = &gram[wi];
            for null in nullspace(&self.field, g) {
                let mut v = self.zero_vec();
                for (j, c) in null.into_iter().enumerate() {
                    v[off + j] = c;
                }
                rad.push(v);
            }
        }
        rad
    }

    /// Quotient by the radical of the contravariant form: the simple head.
    pub fn simple_quotient(&self) -> Module<F> {
        let gram = self.gram.as_ref().expect("module carries no form");
        let f = &self.field;
        // per block: echelonized radical + complement coordinates
        struct Q<T> {
            keep: Vec<usize>,                  // retained local coordinates
            reduce_rows: Vec<(usize, Vec<T>)>, // echelon rows (pivot, row)
        }
        let mut qs: Vec<Q<F::Elt>> = Vec::new();
        for (wi, (_, size)) in self.block_ranges.iter().enumerate() {
            let g = &gram[wi];
            let rad = nullspace(f, g);
            // echelonize the radical
            let mut rows: Vec<(usize, Vec<F::Elt>)> = Vec::new();
            for mut v in rad {
                for (p, row) in &rows {
                    if !f.is_zero(&v[*p]) {
                        let c = v[*p].clone();
                        for (x, y) in v.iter_mut().zip(row) {
                            let sub = f.mul(&c, y);
                            *x = f.sub(x, &sub);
                        }
                    }
                }
                if let Some(p) = v.iter().position(|x| !f.is_zero(x)) {
                    let inv = f.inv(&v[p]).unwrap();
                    for x in v.iter_mut() {
                        *x = f.mul(x, &inv);
                    }
                    rows.push((p, v));
                    rows.sort_by_key(|(p, _)| *p);
                }
            }
            let pivots: Vec<usize> = rows.iter().map(|(p, _)| *p).collect();
            let keep: Vec<usize> = (0..*size).filter(|i| !pivots.contains(i)).collect();
            qs.push(Q { keep, reduce_rows: rows });
        }

        let mut block_ranges = Vec::new();
        let mut basis_weight = Vec::new();
        let mut off = 0usize;
        let mut old_to_new: HashMap<usize, usize> = HashMap::new();
        for (wi, q) in qs.iter().enumerate() {
            block_ranges.push((off, q.keep.len()));
            let (boff, _) = self.block_ranges[wi];
            for &loc in &q.keep {
                old_to_new.insert(boff + loc, off);
                basis_weight.push(wi);
                off += 1;
            }
        }

        // projection of a dense vector
        let project = |v: &[F::Elt]| -> Vec<F::Elt> {
            let mut out = vec![f.zero(); off];
            for (wi, q) in qs.iter().enumerate() {
                let (boff, size) = self.block_ranges[wi];
                let mut local: Vec<F::Elt> = v[boff..boff + size].to_vec();
                for (p, row) in &q.reduce_rows {
                    if !f.is_zero(&local[*p]) {
                        let c = local[*p].clone();
                        for (x, y) in local.iter_mut().zip(row) {
                            let sub = f.mul(&c, y);
                            *x = f.sub(x, &sub);
                        }
                    }
                }
                let (noff, _) = block_ranges[wi];
                for (j, &loc) in q.keep.iter().enumerate() {
                    out[noff + j] = local[loc].clone();
                }
            }
            out
        };

        let mut ops = BTreeMap::new();
        for (key, cols) in &self.ops {
            let mut ncols: Vec<Vec<(usize, F::Elt)>> = vec![Vec::new(); off];
            let mut any = false;
            for (c, col) in cols.iter().enumerate() {
                let Some(&nc) = old_to_new.get(&c) else { continue };
                let mut dense = self.zero_vec();
                for (r, x) in col {
                    dense[*r] = x.clone();
                }
                let proj = project(&dense);
                let nonzero: Vec<(usize, F::Elt)> = proj
                    .into_iter()
                    .enumerate()
                    .filter(|(_, x)| !f.is_zero(x))
                    .collect();
                if !nonzero.is_empty() {
                    any = true;
                }
                ncols[nc] = nonzero;
            }
            if any {
                ops.insert(*key, ncols);
            }
        }

        // induced form on the retained coordinates
        let ngram: Vec<Vec<Vec<F::Elt>>> = qs
            .iter()
            .enumerate()
            .map(|(wi, q)| {
                let g = &gram[wi];
                q.keep
                    .iter()
                    .map(|&i| q.keep.iter().map(|&j| g[i][j].clone()).collect())
                    .collect()
            })
            .collect();

        let hv = *old_to_new.get(&self.hv).expect("highest vector survives the quotient");
        Module {
            field: f.clone(),
            cb: self.cb.clone(),
            hw: self.hw.clone(),
            weights: self.weights.clone(),
            basis_weight,
            block_ranges,
            hv,
            kmax: self.kmax,
            ops,
            gram: Some(ngram),
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        let weights: Vec<String> = self
            .basis_weight
            .iter()
            .map(|&wi| {
                self.weights[wi]
                    .iter()
                    .map(crate::rootfold::rat_string)
                    .collect::<Vec<_>>()
                    .join(",")
            })
            .collect();
        let mut ops = Vec::new();
        for ((root, sign, k), cols) in &self.ops {
            let mut entries = Vec::new();
            for (c, col) in cols.iter().enumerate() {
                for (r, x) in col {
                    entries.push(serde_json::json!([r, c, self.field.elt_string(x)]));
                }
            }
            ops.push(serde_json::json!({
                "root": self.cb.rs.positive_roots[*root],
                "sign": *sign == Sign::Plus,
                "k": k,
                "entries": entries,
            }));
        }
        serde_json::json!({
            "field": format!("{}", self.field.ring_spec()),
            "type": self.cb.rs.dynkin_type.to_string(),
            "dim": self.dim(),
            "highest_weight": weight_coeffs(&self.cb, &self.hw),
            "basis_weights": weights,
            "hv": self.hv,
            "kmax": self.kmax,
            "operators": ops,
        })
    }
}

/// Kernel of a symmetric matrix over a field, as dense rows.
fn nullspace<F: Field>(f: &F, g: &[Vec<F::Elt>]) -> Vec<Vec<F::Elt>> {
    let n = g.len();
    if n == 0 {
        return vec![];
    }
    // row reduce [g | I], kernel rows are those whose g-part vanishes
    let mut rows: Vec<(Vec<F::Elt>, Vec<F::Elt>)> = (0..n)
        .map(|i| {
            let id: Vec<F::Elt> =
                (0..n).map(|j| if i == j { f.one() } else { f.zero() }).collect();
            (g[i].clone(), id)
        })
        .collect();
    let mut pivot_row = 0usize;
    for col in 0..n {
        let Some(p) = (pivot_row..n).find(|&r| !f.is_zero(&rows[r].0[col])) else { continue };
        rows.swap(pivot_row, p);
        let inv = f.inv(&rows[pivot_row].0[col]).unwrap();
        for x in rows[pivot_row].0.iter_mut() {
            *x = f.mul(x, &inv);
        }
        for x in rows[pivot_row].1.iter_mut() {
            *x = f.mul(x, &inv);
        }
        for r in 0..n {
            if r != pivot_row && !f.is_zero(&rows[r].0[col]) {
                let c = rows[r].0[col].clone();
                let (head, tail) = if r < pivot_row {
                    let (a, b) = rows.split_at_mut(pivot_row);
                    (&mut a[r], &b[0])
                } else {
                    let (a, b) = rows.split_at_mut(r);
                    (&mut b[0], &a[pivot_row])
                };
                for (x, y) in head.0.iter_mut().zip(&tail.0) {
                    let sub = f.mul(&c, y);
                    *x = f.sub(x, &sub);
                }
                for (x, y) in head.1.iter_mut().zip(&tail.1) {
                    let sub = f.mul(&c, y);
                    *x = f.sub(x, &sub);
                }
            }
        }
        pivot_row += 1;
    }
    rows[pivot_row..].iter().map(|(_, id)| id.clone()).collect()
}

/// Incremental echelon basis of a subspace, used for cyclic closures.
pub struct EchelonSpace<F: Field> {
    field: F,
    rows: Vec<(usize, Vec<F::Elt>)>,
}

impl<F: Field> EchelonSpace<F> {
    pub fn new(field: F) -> Self {
        EchelonSpace { field, rows: Vec::new() }
    }
    pub fn dim(&self) -> usize {
        self.rows.len()
    }
    /// Insert a vector; returns the reduced vector if it enlarged the space.
    pub fn insert(&mut self, mut v: Vec<F::Elt>) -> Option<Vec<F::Elt>> {
        let f = &self.field;
        for (p, row) in &self.rows {
            if !f.is_zero(&v[*p]) {
                let c = v[*p].clone();
                for (x, y) in v.iter_mut().zip(row) {
                    let sub = f.mul(&c, y);
                    *x = f.sub(x, &sub);
                }
            }
        }
        let p = v.iter().position(|x| !f.is_zero(x))?;
        let inv = f.inv(&v[p]).unwrap();
        for x in v.iter_mut() {
            *x = f.mul(x, &inv);
        }
        self.rows.push((p, v.clone()));
        self.rows.sort_by_key(|(p, _)| *p);
        Some(v)
    }
    pub fn contains(&self, v: &[F::Elt]) -> bool {
        let f = &self.field;
        let mut v = v.to_vec();
        for (p, row) in &self.rows {
            if !f.is_zero(&v[*p]) {
                let c = v[*p].clone();
                for (x, y) in v.iter_mut().zip(row) {
                    let sub = f.mul(&c, y);
                    *x = f.sub(x, &sub);
                }
            }
        }
        v.iter().all(|x| f.is_zero(x))
    }
}

/// Smallest subspace containing `seed` and closed under the given operators.
pub fn cyclic_closure<F: Field>(
    module: &Module<F>,
    seed: &[F::Elt],
    gens: &[(usize, Sign, usize)],
) -> EchelonSpace<F> {
    let mut space = EchelonSpace::new(module.field.clone());
    let mut frontier: Vec<Vec<F::Elt>> = Vec::new();
    if let Some(r) = space.insert(seed.to_vec()) {
        frontier.push(r);
    }
    while let Some(v) = frontier.pop() {
        for &(root, sign, k) in gens {
            if k > module.kmax {
                continue;
            }
            let img = module.apply_divided_power(root, sign, k, &v).unwrap();
            if img.iter().all(|x| module.field.is_zero(x)) {
                continue;
            }
            if let Some(r) = space.insert(img) {
                frontier.push(r);
            }
        }
    }
    space
}

/// The standard generator set: all divided powers of all signed root vectors
/// up to the module's table bound.
pub fn full_generator_set<F: Field>(module: &Module<F>) -> Vec<(usize, Sign, usize)> {
    let mut gens = Vec::new();
    for r in 0..module.cb.rs.num_positive() {
        for s in [Sign::Plus, Sign::Minus] {
            for k in 1..=module.kmax {
                gens.push((r, s, k));
            }
        }
    }
    gens
}

pub fn sl2() -> Arc<ChevalleyBasis> {
    chevalley_basis(DynkinType::parse("A1").unwrap())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeffring::{FqField, QExt};

    fn cb(s: &str) -> Arc<ChevalleyBasis> {
        chevalley_basis(DynkinType::parse(s).unwrap())
    }

    fn wt(c: &Arc<ChevalleyBasis>, coeffs: &[i64]) -> Vec<Rat> {
        weight_from_coeffs(c, coeffs)
    }

    #[test]
    fn sl2_string_dimension() {
        let c = cb("A1");
        let m = build_weyl_module(&c, &wt(&c, &[3]), QExt::plain(), None).unwrap();
        assert_eq!(m.dim(), 4);
        let ch = m.character();
        assert_eq!(ch.len(), 4);
        assert!(ch.values().all(|&v| v == 1));
    }

    #[test]
    fn sl2_string_endpoints() {
        let c = cb("A1");
        let m = build_weyl_module(&c, &wt(&c, &[3]), QExt::plain(), None).unwrap();
        let hv = m.hv_vec();
        let down3 = m.apply_divided_power(0, Sign::Minus, 3, &hv).unwrap();
        assert!(down3.iter().any(|x| !x.is_zero()));
        let down4 = m.apply_divided_power(0, Sign::Minus, 4, &hv).unwrap();
        assert!(down4.iter().all(|x| x.is_zero()));
    }

    #[test]
    fn a2_adjoint_dimension_and_zero_weight() {
        let c = cb("A2");
        let m = build_weyl_module(&c, &wt(&c, &[1, 1]), QExt::plain(), None).unwrap();
        assert_eq!(m.dim(), 8);
        let zero = vec![Rat::zero(), Rat::zero()];
        let ch = m.character();
        assert_eq!(ch[&zero], 2);
    }

    #[test]
    fn weyl_dim_is_field_independent() {
        let c = cb("A1");
        let f2 = FqField::new(2, 1).unwrap();
        let m = build_weyl_module(&c, &wt(&c, &[2]), f2, None).unwrap();
        assert_eq!(m.dim(), 3);
    }

    #[test]
    fn form1_divided_power_product() {
        // x^(k) x^(l) = binom(k+l, k) x^(k+l) as matrices
        let c = cb("A1");
        let m = build_weyl_module(&c, &wt(&c, &[4]), QExt::plain(), None).unwrap();
        for k in 1..=2usize {
            for l in 1..=2usize {
                for idx in 0..m.dim() {
                    let mut v = m.zero_vec();
                    v[idx] = m.field.one();
                    let a = m
                        .apply_divided_power(0, Sign::Minus, l, &v)
                        .and_then(|w| m.apply_divided_power(0, Sign::Minus, k, &w))
                        .unwrap();
                    let b = m.apply_divided_power(0, Sign::Minus, k + l, &v).unwrap();
                    let scal = m.field.from_bigint(&binom_big((k + l) as i64, k));
                    let b: Vec<_> = b.iter().map(|x| m.field.mul(x, &scal)).collect();
                    assert_eq!(a, b);
                }
            }
        }
    }

    #[test]
    fn commutation_on_hv() {
        // x^+ x^- hv = lambda(h) hv
        let c = cb("A2");
        let m = build_weyl_module(&c, &wt(&c, &[2, 1]), QExt::plain(), None).unwrap();
        for root in 0..c.rs.num_positive() {
            let hv = m.hv_vec();
            let down = m.apply_divided_power(root, Sign::Minus, 1, &hv).unwrap();
            let up = m.apply_divided_power(root, Sign::Plus, 1, &down).unwrap();
            let lam = c.rs.pairing_coroot(&m.hw, root).to_integer();
            let expect: Vec<_> = hv
                .iter()
                .map(|x| m.field.mul(x, &m.field.from_i64(lam)))
                .collect();
            assert_eq!(up, expect, "root {root}");
        }
    }

    #[test]
    fn radical_char0_is_zero() {
        let c = cb("A2");
        let m = build_weyl_module(&c, &wt(&c, &[1, 1]), QExt::plain(), None).unwrap();
        assert!(m.contravariant_radical().is_empty());
    }

    #[test]
    fn modular_simple_quotients_sl2() {
        let c = cb("A1");
        let f2 = FqField::new(2, 1).unwrap();
        let w = build_weyl_module(&c, &wt(&c, &[2]), f2, None).unwrap();
        assert_eq!(w.contravariant_radical().len(), 1);
        let v = w.simple_quotient();
        assert_eq!(v.dim(), 2);

        let f3 = FqField::new(3, 1).unwrap();
        let w3 = build_weyl_module(&c, &wt(&c, &[3]), f3, None).unwrap();
        let v3 = w3.simple_quotient();
        assert_eq!(v3.dim(), 2);
    }

    #[test]
    fn tensor_character_and_cyclic_submodule_mod2() {
        let c = cb("A1");
        let q = QExt::plain();
        let v1 = build_weyl_module(&c, &wt(&c, &[1]), q.clone(), Some(3)).unwrap();
        let t = v1.tensor(&v1);
        assert_eq!(t.dim(), 4);
        let ch = t.character();
        assert_eq!(ch[&vec![Rat::new(1, 1)]], 1);
        assert_eq!(ch[&vec![Rat::zero()]], 2);

        // over F2 the cyclic submodule from hv (x) hv has dimension 3
        let f2 = FqField::new(2, 1).unwrap();
        let v1f = build_weyl_module(&c, &wt(&c, &[1]), f2, Some(3)).unwrap();
        let tf = v1f.tensor(&v1f);
        let mut seed = tf.zero_vec();
        seed[tf.hv] = tf.field.one();
        let gens = full_generator_set(&tf);
        let space = cyclic_closure(&tf, &seed, &gens);
        assert_eq!(space.dim(), 3);
    }

    #[test]
    fn divided_power_pth_power_vanishes() {
        // (x^(1))^2 = 2 x^(2) = 0 over F2
        let c = cb("A1");
        let f2 = FqField::new(2, 1).unwrap();
        let m = build_weyl_module(&c, &wt(&c, &[2]), f2, None).unwrap();
        for idx in 0..m.dim() {
            let mut v = m.zero_vec();
            v[idx] = m.field.one();
            let once = m.apply_divided_power(0, Sign::Minus, 1, &v).unwrap();
            let twice = m.apply_divided_power(0, Sign::Minus, 1, &once).unwrap();
            assert!(twice.iter().all(|x| m.field.is_zero(x)));
        }
    }

    #[test]
    fn simple_module_is_cyclic_from_every_vector() {
        let c = cb("A1");
        let f2 = FqField::new(2, 1).unwrap();
        let v = build_weyl_module(&c, &wt(&c, &[2]), f2, None)
            .unwrap()
            .simple_quotient();
        let gens = full_generator_set(&v);
        for idx in 0..v.dim() {
            let mut seed = v.zero_vec();
            seed[idx] = v.field.one();
            assert_eq!(cyclic_closure(&v, &seed, &gens).dim(), v.dim());
        }
    }

    #[test]
    fn lowest_weight_is_cyclic_upward() {
        let c = cb("A2");
        let m = build_weyl_module(&c, &wt(&c, &[1, 0]), QExt::plain(), None).unwrap();
        // w0 * lambda block must be one-dimensional
        let low = {
            let neg: Vec<Rat> = m.hw.iter().map(|c| -*c).collect();
            let dom = c.rs.dominant_rep(&neg);
            dom.iter().map(|c| -*c).collect::<Vec<Rat>>()
        };
        let wi = m.weights.iter().position(|w| *w == low).unwrap();
        let (off, size) = m.block_ranges[wi];
        assert_eq!(size, 1);
        let mut seed = m.zero_vec();
        seed[off] = m.field.one();
        let gens: Vec<(usize, Sign, usize)> = (0..c.rs.num_positive())
            .flat_map(|r| (1..=m.kmax).map(move |k| (r, Sign::Plus, k)))
            .collect();
        assert_eq!(cyclic_closure(&m, &seed, &gens).dim(), m.dim());
    }
}
