//! Dominant l-weights stored as root multisets, standard decompositions
//! into evaluation blocks, the weight-of map, and Drinfeld polynomial
//! extraction from twisted modules with a highest vector.

use crate::chevalley::Sign;
use crate::coeffring::{find_roots, Field, FqElt, FqField};
use crate::hypermod::weight_add;
use crate::loopaction::TwistedModule;
use crate::rootfold::{FoldingDatum, Rat, RootVec};
use num_traits::Zero;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LwError {
    #[error("evaluation point must be nonzero")]
    ZeroEvaluationPoint,
    #[error("polynomial at index {index} does not split; extension degree {suggest:?} would")]
    NotSplit { index: usize, suggest: Option<usize> },
    #[error("field lacks a primitive root of unity of the folding order")]
    NoPrimitiveRoot,
    #[error("vector is not a highest-l-weight vector: {0}")]
    NotHighestLWeight(String),
    #[error(transparent)]
    Loop(#[from] crate::loopaction::LoopError),
}

/// Tuple of constant-term-1 polynomials, stored as multisets of inverse
/// roots: entry i holds the values b with (1 - b u) dividing the i-th
/// polynomial, sorted canonically.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LWeight {
    pub entries: Vec<Vec<FqElt>>,
}

impl LWeight {
    pub fn one(indices: usize) -> Self {
        LWeight { entries: vec![Vec::new(); indices] }
    }

    pub fn is_one(&self) -> bool {
        self.entries.iter().all(|e| e.is_empty())
    }

    pub fn normalize(&mut self, field: &FqField) {
        for e in self.entries.iter_mut() {
            e.sort_by_key(|x| field.elt_code(x));
        }
    }

    pub fn mul(&self, other: &LWeight, field: &FqField) -> LWeight {
        let mut out = self.clone();
        for (e, o) in out.entries.iter_mut().zip(&other.entries) {
            e.extend(o.iter().copied());
        }
        out.normalize(field);
        out
    }

    /// Degrees per index: the weight of the l-weight as values on the
    /// corresponding coroots.
    pub fn weight_values(&self) -> Vec<i64> {
        self.entries.iter().map(|e| e.len() as i64).collect()
    }

    /// The a -> a^{-1} involution on the roots.
    pub fn bar(&self, field: &FqField) -> LWeight {
        let mut out = LWeight {
            entries: self
                .entries
                .iter()
                .map(|e| e.iter().map(|b| field.inv(b).expect("roots are nonzero")).collect())
                .collect(),
        };
        out.normalize(field);
        out
    }

    /// Polynomial coefficients per index, low to high.
    pub fn poly_coeffs(&self, field: &FqField) -> Vec<Vec<FqElt>> {
        self.entries
            .iter()
            .map(|roots| {
                let mut coeffs = vec![field.one()];
                for b in roots {
                    let mut next = vec![field.zero(); coeffs.len() + 1];
                    for (i, c) in coeffs.iter().enumerate() {
                        next[i] = field.add(&next[i], c);
                        let sub = field.mul(c, b);
                        next[i + 1] = field.sub(&next[i + 1], &sub);
                    }
                    coeffs = next;
                }
                coeffs
            })
            .collect()
    }

    pub fn to_json(&self, field: &FqField) -> serde_json::Value {
        let polys = self.poly_coeffs(field);
        let entries: Vec<serde_json::Value> = self
            .entries
            .iter()
            .enumerate()
            .map(|(i, roots)| {
                serde_json::json!({
                    "index": i + 1,
                    "inverse_roots": roots.iter().map(|b| field.elt_string(b)).collect::<Vec<_>>(),
                    "coefficients": polys[i].iter().map(|c| field.elt_string(c)).collect::<Vec<_>>(),
                })
            })
            .collect();
        serde_json::json!({ "entries": entries })
    }
}

/// Parse an l-weight from polynomial coefficients, factoring each entry over
/// the field (suggesting an extension degree when it does not split).
pub fn lweight_from_coeffs(coeffs: &[Vec<FqElt>], field: &FqField) -> Result<LWeight, LwError> {
    let mut entries = Vec::new();
    for (index, cs) in coeffs.iter().enumerate() {
        let mut cs = cs.clone();
        while cs.len() > 1 && field.is_zero(cs.last().unwrap()) {
            cs.pop();
        }
        assert!(
            !cs.is_empty() && cs[0] == field.one(),
            "l-weight polynomials have constant term 1"
        );
        if cs.len() == 1 {
            entries.push(Vec::new());
            continue;
        }
        let rep = find_roots(&cs, field, field).map_err(LwError::from_coeff)?;
        if !rep.fully_split {
            let mut suggest = None;
            for mult in 2..=3usize {
                let k2 = field.k * mult;
                if let Ok(big) = FqField::new(field.p, k2) {
                    if let Ok(r2) = find_roots(&cs, field, &big) {
                        if r2.fully_split {
                            suggest = Some(k2);
                            break;
                        }
                    }
                }
            }
            return Err(LwError::NotSplit { index: index + 1, suggest });
        }
        let mut inv_roots = Vec::new();
        for (r, mult) in rep.roots {
            let b = field.inv(&r).expect("constant term 1 forbids zero roots");
            for _ in 0..mult {
                inv_roots.push(b);
            }
        }
        entries.push(inv_roots);
    }
    let mut lw = LWeight { entries };
    lw.normalize(field);
    Ok(lw)
}

impl LwError {
    fn from_coeff(e: crate::coeffring::CoeffError) -> Self {
        LwError::Loop(crate::loopaction::LoopError::Scalar(e))
    }
}

/// Whether the branch for a folded node takes the m-th power of the point
/// (long node outside type A_2n) rather than the point itself.
pub fn node_takes_power(fd: &FoldingDatum, i0: usize) -> bool {
    if fd.a2n || fd.order == 1 {
        return false;
    }
    let coords: RootVec = (0..fd.folded.rank()).map(|j| i64::from(j == i0)).collect();
    let idx = fd.folded.root_index(&coords).unwrap();
    !fd.short_folded[idx]
}

/// Fundamental twisted l-weight at a node: a single linear factor whose
/// root is the point or its m-th power, per the branch rule.
pub fn fundamental_tw(
    fd: &FoldingDatum,
    field: &FqField,
    i0: usize,
    a: &FqElt,
) -> Result<LWeight, LwError> {
    if field.is_zero(a) {
        return Err(LwError::ZeroEvaluationPoint);
    }
    let mut lw = LWeight::one(fd.folded.rank());
    let b = if node_takes_power(fd, i0) {
        field.pow(a, fd.order as i64)
    } else {
        *a
    };
    lw.entries[i0].push(b);
    Ok(lw)
}

/// The twisted l-weight of a dominant g_0-weight (value tuple on h_{i,0})
/// at a point: the matching product of fundamentals.
pub fn omega_sigma(
    fd: &FoldingDatum,
    field: &FqField,
    lambda_values: &[i64],
    a: &FqElt,
) -> Result<LWeight, LwError> {
    let mut lw = LWeight::one(fd.folded.rank());
    for (i0, &mult) in lambda_values.iter().enumerate() {
        assert!(mult >= 0);
        for _ in 0..mult {
            lw = lw.mul(&fundamental_tw(fd, field, i0, a)?, field);
        }
    }
    Ok(lw)
}

/// One block of a standard decomposition: an evaluation point plus the
/// dominant weights attached to each grade (value tuples on h_{i,0}).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Block {
    pub a: FqElt,
    pub lambda_eps: Vec<Vec<i64>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StandardDecomposition {
    pub order: usize,
    pub blocks: Vec<Block>,
}

impl StandardDecomposition {
    pub fn to_json(&self, field: &FqField) -> serde_json::Value {
        serde_json::json!({
            "order": self.order,
            "blocks": self.blocks.iter().map(|b| serde_json::json!({
                "a": field.elt_string(&b.a),
                "lambda_per_grade": b.lambda_eps,
            })).collect::<Vec<_>>(),
        })
    }
}

/// Partition the roots of a twisted l-weight into blocks with pairwise
/// distinct m-th powers of the evaluation points, assigning each root a
/// grade through the primitive root of unity. The reassembled product is
/// checked against the input.
pub fn standard_decomposition(
    pi: &LWeight,
    fd: &FoldingDatum,
    field: &FqField,
) -> Result<StandardDecomposition, LwError> {
    let m = fd.order;
    let zeta = match &field.embedding {
        Some(e) if e.m == m => e.zeta,
        _ if m == 1 => field.one(),
        _ => return Err(LwError::NoPrimitiveRoot),
    };
    let mut zeta_pows = vec![field.one(); m];
    for e in 1..m {
        zeta_pows[e] = field.mul(&zeta_pows[e - 1], &zeta);
    }

    use std::collections::BTreeMap;
    let mut blocks: BTreeMap<u64, Block> = BTreeMap::new();
    let pick_a = |field: &FqField, key: &FqElt| -> Result<FqElt, LwError> {
        field
            .iter_elements()
            .find(|c| field.pow(c, m as i64) == *key)
            .ok_or(LwError::NotSplit { index: 0, suggest: Some(field.k * m) })
    };
    for (i0, roots) in pi.entries.iter().enumerate() {
        let takes_power = node_takes_power(fd, i0);
        for b in roots {
            let key = if takes_power { *b } else { field.pow(b, m as i64) };
            let code = field.elt_code(&key);
            if !blocks.contains_key(&code) {
                let a = pick_a(field, &key)?;
                blocks.insert(
                    code,
                    Block { a, lambda_eps: vec![vec![0; fd.folded.rank()]; m] },
                );
            }
            let block = blocks.get_mut(&code).unwrap();
            if takes_power {
                // any grade reassembles identically; use grade 0
                block.lambda_eps[0][i0] += 1;
            } else {
                // b = zeta^{m - eps} a for a unique eps
                let ratio = field.mul(b, &field.inv(&block.a).unwrap());
                let eps = (0..m)
                    .find(|&e| zeta_pows[(m - e) % m] == ratio)
                    .expect("root ratio is a power of the primitive root");
                block.lambda_eps[eps][i0] += 1;
            }
        }
    }
    let sd = StandardDecomposition { order: m, blocks: blocks.into_values().collect() };

    let mut rebuilt = LWeight::one(fd.folded.rank());
    for b in &sd.blocks {
        for (eps, lam) in b.lambda_eps.iter().enumerate() {
            let point = field.mul(&zeta_pows[(m - eps) % m], &b.a);
            rebuilt = rebuilt.mul(&omega_sigma(fd, field, lam, &point)?, field);
        }
    }
    let mut pi_sorted = pi.clone();
    pi_sorted.normalize(field);
    assert_eq!(rebuilt, pi_sorted, "standard decomposition must reassemble");
    Ok(sd)
}

/// The untwisted l-weight matched to a standard decomposition, together with
/// the per-block dominant weights of the base algebra (root coordinates).
pub fn omega_from_pi(
    sd: &StandardDecomposition,
    fd: &FoldingDatum,
    field: &FqField,
) -> (LWeight, Vec<(Vec<Rat>, FqElt)>) {
    let rank = fd.base.rank();
    let mut factors = Vec::new();
    let mut omega = LWeight::one(rank);
    for block in &sd.blocks {
        let mut mu = vec![Rat::zero(); rank];
        for (eps, lam) in block.lambda_eps.iter().enumerate() {
            for (i0, &e) in lam.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                let mut node = fd.o_map[i0];
                for _ in 0..eps {
                    node = fd.sigma.perm[node];
                }
                let fw = &fd.base.fundamental_weights[node];
                let scaled: Vec<Rat> = fw.iter().map(|c| *c * Rat::from_integer(e)).collect();
                mu = weight_add(&mu, &scaled);
            }
        }
        for j in 0..rank {
            let p = fd.base.pairing(&mu, j);
            assert!(p.is_integer() && p.to_integer() >= 0);
            for _ in 0..p.to_integer() {
                omega.entries[j].push(block.a);
            }
        }
        factors.push((mu, block.a));
    }
    omega.normalize(field);
    (omega, factors)
}

/// Read the Drinfeld polynomial off a twisted module at its canonical
/// highest vector: raising twisted operators must vanish on it inside the
/// probe window, and the twisted series coefficients must truncate at the
/// weight bound with a nonzero top coefficient. The minus-side coefficients
/// are checked against the inverted-root polynomial.
pub fn extract_drinfeld(tm: &TwistedModule<FqField>, window: i64) -> Result<LWeight, LwError> {
    let field = tm.field().clone();
    let fd = &tm.tb.fd;
    let m = fd.order as i64;
    let idx = tm.lm.hv_index();
    let hv = tm.lm.hv_vec();

    let lam: Vec<i64> = tm
        .g0_weight(idx)
        .iter()
        .enumerate()
        .map(|(i, v)| {
            if !v.is_integer() {
                return Err(LwError::NotHighestLWeight(format!(
                    "weight pairs fractionally with h_{{{i},0}}"
                )));
            }
            Ok(v.to_integer())
        })
        .collect::<Result<_, _>>()?;

    let kcap = tm.lm.kmax();
    for eps in 0..fd.order {
        for mu in fd.eps_weights[eps].clone() {
            if mu.iter().sum::<i64>() <= 0 {
                continue;
            }
            for r in -window..=window {
                if (-r).rem_euclid(m) as usize != eps {
                    continue;
                }
                for k in 1..=kcap {
                    let img = tm.apply_twisted(&mu, Sign::Plus, r, k, &hv)?;
                    if img.iter().any(|x| !field.is_zero(x)) {
                        return Err(LwError::NotHighestLWeight(format!(
                            "raising operator (mu={mu:?}, r={r}, k={k}) acts nontrivially"
                        )));
                    }
                }
            }
        }
    }

    let mut entries = Vec::new();
    for i0 in 0..fd.folded.rank() {
        let coords: RootVec = (0..fd.folded.rank()).map(|j| i64::from(j == i0)).collect();
        let fi = fd.folded.root_index(&coords).unwrap();
        let bound = lam[i0].max(0) as usize;
        let mut coeffs = Vec::with_capacity(bound + 1);
        for r in 0..=bound {
            coeffs.push(tm.lambda_sigma_eigen(fi, true, r, idx));
        }
        for r in bound + 1..=bound + 2 {
            let v = tm.lambda_sigma_eigen(fi, true, r, idx);
            if !field.is_zero(&v) {
                return Err(LwError::NotHighestLWeight(format!(
                    "series coefficient {r} at node {i0} exceeds the weight bound {bound}"
                )));
            }
        }
        if bound > 0 && field.is_zero(&coeffs[bound]) {
            return Err(LwError::NotHighestLWeight(format!(
                "top series coefficient vanishes at node {i0}"
            )));
        }
        entries.push(coeffs);
    }
    let lw = lweight_from_coeffs(&entries, &field)?;

    let bar = lw.bar(&field);
    let bar_coeffs = bar.poly_coeffs(&field);
    for (i0, roots) in lw.entries.iter().enumerate() {
        let coords: RootVec = (0..fd.folded.rank()).map(|j| i64::from(j == i0)).collect();
        let fi = fd.folded.root_index(&coords).unwrap();
        for r in 0..=roots.len() {
            let got = tm.lambda_sigma_eigen(fi, false, r, idx);
            assert_eq!(
                got, bar_coeffs[i0][r],
                "minus series must match the inverted-root polynomial"
            );
        }
    }
    Ok(lw)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chevalley::{chevalley_basis, TwistedBasis};
    use crate::rootfold::{fold, DiagramAutomorphism, DynkinType};

    fn folding(s: &str) -> FoldingDatum {
        let cb = chevalley_basis(DynkinType::parse(s).unwrap());
        let sig = DiagramAutomorphism::flip(&cb.rs).unwrap();
        let fd = fold(&cb.rs, &sig).unwrap();
        let tb = TwistedBasis::new(cb, fd).unwrap();
        tb.fd.clone()
    }

    #[test]
    fn fundamental_branches_a3_c2() {
        let fd = folding("A3");
        let f7 = FqField::with_scalars(7, 1, 2, false).unwrap();
        let a = f7.from_i64(2);
        let lw0 = fundamental_tw(&fd, &f7, 0, &a).unwrap();
        assert_eq!(lw0.entries[0], vec![f7.from_i64(2)]);
        assert!(lw0.entries[1].is_empty());
        let lw1 = fundamental_tw(&fd, &f7, 1, &a).unwrap();
        assert!(lw1.entries[0].is_empty());
        assert_eq!(lw1.entries[1], vec![f7.from_i64(4)]);
    }

    #[test]
    fn weight_of_products() {
        let fd = folding("A3");
        let f7 = FqField::with_scalars(7, 1, 2, false).unwrap();
        let a = f7.from_i64(2);
        let b = f7.from_i64(3);
        let lw = fundamental_tw(&fd, &f7, 0, &a)
            .unwrap()
            .mul(&fundamental_tw(&fd, &f7, 0, &b).unwrap(), &f7);
        assert_eq!(lw.weight_values(), vec![2, 0]);
        assert!(LWeight::one(2).is_one());
    }

    #[test]
    fn standard_decomposition_roundtrip_two_blocks() {
        let fd = folding("A3");
        let f7 = FqField::with_scalars(7, 1, 2, false).unwrap();
        let a = f7.from_i64(2);
        let b = f7.from_i64(3);
        let pi = fundamental_tw(&fd, &f7, 0, &a)
            .unwrap()
            .mul(&fundamental_tw(&fd, &f7, 0, &b).unwrap(), &f7);
        let sd = standard_decomposition(&pi, &fd, &f7).unwrap();
        assert_eq!(sd.blocks.len(), 2);
    }

    #[test]
    fn standard_decomposition_eps_split() {
        let fd = folding("A3");
        let f7 = FqField::with_scalars(7, 1, 2, false).unwrap();
        let a = f7.from_i64(2);
        let neg_a = f7.neg(&a);
        let mut pi = LWeight::one(2);
        pi.entries[0] = vec![a, neg_a];
        pi.normalize(&f7);
        let sd = standard_decomposition(&pi, &fd, &f7).unwrap();
        assert_eq!(sd.blocks.len(), 1);
        let populated: Vec<usize> = sd.blocks[0]
            .lambda_eps
            .iter()
            .enumerate()
            .filter(|(_, l)| l.iter().any(|&x| x > 0))
            .map(|(e, _)| e)
            .collect();
        assert_eq!(populated.len(), 2);
    }

    #[test]
    fn empty_decomposition() {
        let fd = folding("A3");
        let f7 = FqField::with_scalars(7, 1, 2, false).unwrap();
        let pi = LWeight::one(2);
        let sd = standard_decomposition(&pi, &fd, &f7).unwrap();
        assert!(sd.blocks.is_empty());
        let (omega, factors) = omega_from_pi(&sd, &fd, &f7);
        assert!(omega.is_one());
        assert!(factors.is_empty());
    }

    #[test]
    fn omega_from_single_fundamental() {
        let fd = folding("A3");
        let f7 = FqField::with_scalars(7, 1, 2, false).unwrap();
        let a = f7.from_i64(2);
        let pi = fundamental_tw(&fd, &f7, 0, &a).unwrap();
        let sd = standard_decomposition(&pi, &fd, &f7).unwrap();
        let (omega, factors) = omega_from_pi(&sd, &fd, &f7);
        assert_eq!(factors.len(), 1);
        let expect = fd.base.fundamental_weights[fd.o_map[0]].clone();
        assert_eq!(factors[0].0, expect);
        assert_eq!(omega.entries[fd.o_map[0]], vec![a]);
    }

    #[test]
    fn mixed_grades_merge_weights() {
        let fd = folding("A3");
        let f7 = FqField::with_scalars(7, 1, 2, false).unwrap();
        let a = f7.from_i64(2);
        let neg_a = f7.neg(&a);
        let mut pi = LWeight::one(2);
        pi.entries[0] = vec![a, neg_a];
        pi.normalize(&f7);
        let sd = standard_decomposition(&pi, &fd, &f7).unwrap();
        let (_, factors) = omega_from_pi(&sd, &fd, &f7);
        assert_eq!(factors.len(), 1);
        let node = fd.o_map[0];
        let image = fd.sigma.perm[node];
        let expect = weight_add(
            &fd.base.fundamental_weights[node],
            &fd.base.fundamental_weights[image],
        );
        assert_eq!(factors[0].0, expect);
    }

    #[test]
    fn bar_is_an_involution() {
        let fd = folding("A3");
        let f7 = FqField::with_scalars(7, 1, 2, false).unwrap();
        let a = f7.from_i64(2);
        let b = f7.from_i64(3);
        let pi = fundamental_tw(&fd, &f7, 0, &a)
            .unwrap()
            .mul(&fundamental_tw(&fd, &f7, 1, &b).unwrap(), &f7);
        assert_eq!(pi.bar(&f7).bar(&f7), pi);
    }

    #[test]
    fn nonsplit_reports_suggested_degree() {
        let f5 = FqField::new(5, 1).unwrap();
        // 1 + u^2 over F5 splits, 1 + 2 u^2 does not (-1/2 = 2 is not a QR mod 5)
        let coeffs = vec![vec![f5.one(), f5.zero(), f5.from_i64(2)]];
        match lweight_from_coeffs(&coeffs, &f5) {
            Err(LwError::NotSplit { index: 1, suggest: Some(2) }) => {}
            other => panic!("expected NotSplit with suggestion, got {other:?}"),
        }
    }
}
