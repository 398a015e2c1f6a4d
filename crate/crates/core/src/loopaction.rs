//! Loop-algebra and twisted-loop-algebra divided-power operators acting on
//! evaluation modules and their tensor products: evaluation actions, the
//! expansion of twisted operators through non-twisted ones, the restriction
//! functor, and both routes to the twisted eigenvalue series.

use crate::chevalley::{GElt, Sign, TwistedBasis};
use crate::coeffring::{binom_big, Char0, CoeffError, Field, Q};
use crate::hypermod::Module;
use crate::rootfold::{Rat, Restricted, RootVec};
use num_traits::Zero;
use std::collections::HashMap;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LoopError {
    #[error("field characteristic equals the folding order")]
    CharEqualsOrder,
    #[error("characteristic 2 with an A_2n folding")]
    CharTwoA2n,
    #[error("scalar embedding failed: {0}")]
    Scalar(#[from] CoeffError),
    #[error("divided power degree out of range")]
    DegreeOutOfRange,
}

/// Tensor product of evaluation modules: factors with invertible evaluation
/// points, acted on by loop operators through the comultiplication.
#[derive(Clone)]
pub struct LoopModule<F: Field> {
    pub field: F,
    pub factors: Vec<(Arc<Module<F>>, F::Elt)>,
    strides: Vec<usize>,
    dim: usize,
}

impl<F: Field> LoopModule<F> {
    pub fn new(field: F, factors: Vec<(Arc<Module<F>>, F::Elt)>) -> Self {
        assert!(!factors.is_empty());
        let mut strides = vec![1usize; factors.len()];
        for i in (0..factors.len() - 1).rev() {
            strides[i] = strides[i + 1] * factors[i + 1].0.dim();
        }
        let dim = strides[0] * factors[0].0.dim();
        for (_, a) in &factors {
            assert!(!field.is_zero(a), "evaluation point must be invertible");
        }
        LoopModule { field, factors, strides, dim }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn zero_vec(&self) -> Vec<F::Elt> {
        vec![self.field.zero(); self.dim]
    }

    pub fn hv_index(&self) -> usize {
        self.factors.iter().zip(&self.strides).map(|((m, _), s)| m.hv * s).sum()
    }

    pub fn hv_vec(&self) -> Vec<F::Elt> {
        let mut v = self.zero_vec();
        v[self.hv_index()] = self.field.one();
        v
    }

    pub fn split_index(&self, idx: usize) -> Vec<usize> {
        self.strides
            .iter()
            .zip(&self.factors)
            .map(|(s, (m, _))| (idx / s) % m.dim())
            .collect()
    }

    pub fn kmax(&self) -> usize {
        self.factors.iter().map(|(m, _)| m.kmax).min().unwrap()
    }

    /// Weight of a product basis vector (sum over slots), root coordinates.
    pub fn weight_of_index(&self, idx: usize) -> Vec<Rat> {
        let parts = self.split_index(idx);
        let rank = self.factors[0].0.cb.rs.rank();
        let mut w = vec![Rat::zero(); rank];
        for (slot, (m, _)) in self.factors.iter().enumerate() {
            let mw = m.weight_of_basis(parts[slot]);
            for i in 0..rank {
                w[i] += mw[i];
            }
        }
        w
    }

    /// Apply (x^{sign}_root (x) t^r)^{(k)} through the comultiplication:
    /// slot j contributes a_j^{r l} (x)^{(l)} over compositions of k.
    pub fn apply_loop(
        &self,
        root: usize,
        sign: Sign,
        r: i64,
        k: usize,
        v: &[F::Elt],
    ) -> Result<Vec<F::Elt>, LoopError> {
        let mut state: HashMap<usize, Vec<F::Elt>> = HashMap::new();
        state.insert(k, v.to_vec());
        for (slot, (m, a)) in self.factors.iter().enumerate() {
            let mut next: HashMap<usize, Vec<F::Elt>> = HashMap::new();
            for (&rem, vec) in &state {
                for l in 0..=rem {
                    if l > 0 && l > m.kmax {
                        continue;
                    }
                    let img = self.apply_slot(slot, m, root, sign, l, vec)?;
                    if img.iter().all(|x| self.field.is_zero(x)) {
                        continue;
                    }
                    let coef = self.field.pow(a, r * l as i64);
                    let slot_v = next.entry(rem - l).or_insert_with(|| self.zero_vec());
                    for (dst, x) in slot_v.iter_mut().zip(&img) {
                        let add = self.field.mul(x, &coef);
                        *dst = self.field.add(dst, &add);
                    }
                }
            }
            state = next;
            if state.is_empty() {
                return Ok(self.zero_vec());
            }
        }
        Ok(state.remove(&0).unwrap_or_else(|| self.zero_vec()))
    }

    fn apply_slot(
        &self,
        slot: usize,
        m: &Module<F>,
        root: usize,
        sign: Sign,
        l: usize,
        v: &[F::Elt],
    ) -> Result<Vec<F::Elt>, LoopError> {
        if l == 0 {
            return Ok(v.to_vec());
        }
        let stride = self.strides[slot];
        let fdim = m.dim();
        let mut out = self.zero_vec();
        for (idx, c) in v.iter().enumerate() {
            if self.field.is_zero(c) {
                continue;
            }
            let a = (idx / stride) % fdim;
            let base = idx - a * stride;
            let mut unit = vec![self.field.zero(); fdim];
            unit[a] = self.field.one();
            let img = m
                .apply_divided_power(root, sign, l, &unit)
                .map_err(|_| LoopError::DegreeOutOfRange)?;
            for (b, x) in img.iter().enumerate() {
                if !self.field.is_zero(x) {
                    let add = self.field.mul(x, c);
                    out[base + b * stride] = self.field.add(&out[base + b * stride], &add);
                }
            }
        }
        Ok(out)
    }

    /// r-th coefficient of the non-twisted eigenvalue series for a positive
    /// root on a product basis vector: the convolution over slots of
    /// (-a^{+-power})^s binom(nu(h_root), s). `power` realizes the t -> t^power
    /// substitution by rescaling the evaluation points.
    pub fn lambda_eigen(&self, root: usize, plus: bool, r: usize, idx: usize, power: i64) -> F::Elt {
        let f = &self.field;
        let parts = self.split_index(idx);
        let mut acc = vec![f.zero(); r + 1];
        acc[0] = f.one();
        for (slot, (m, a)) in self.factors.iter().enumerate() {
            let nu = m.weight_of_basis(parts[slot]);
            let pairing = m.cb.rs.pairing_coroot(nu, root);
            assert!(pairing.is_integer());
            let n = pairing.to_integer();
            let base = f.pow(a, if plus { power } else { -power });
            let mut slotpoly = vec![f.zero(); r + 1];
            for (s, sp) in slotpoly.iter_mut().enumerate() {
                let b = binom_big(n, s);
                if b.is_zero() {
                    continue;
                }
                let mut c = f.from_bigint(&b);
                c = f.mul(&c, &f.pow(&base, s as i64));
                if s % 2 == 1 {
                    c = f.neg(&c);
                }
                *sp = c;
            }
            let mut next = vec![f.zero(); r + 1];
            for (i, x) in acc.iter().enumerate() {
                if f.is_zero(x) {
                    continue;
                }
                for (j, y) in slotpoly.iter().enumerate() {
                    if i + j <= r && !f.is_zero(y) {
                        let add = f.mul(x, y);
                        next[i + j] = f.add(&next[i + j], &add);
                    }
                }
            }
            acc = next;
        }
        acc[r].clone()
    }
}

/// A primitive loop factor of an expansion: (x^{sign}_root (x) t^r)^{(k)}.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LoopFactor {
    pub root: usize,
    pub sign: Sign,
    pub r: i64,
    pub k: usize,
}

fn compositions(total: usize, slots: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::new();
    fn go(total: usize, slots: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if slots == 1 {
            cur.push(total);
            out.push(cur.clone());
            cur.pop();
            return;
        }
        for v in 0..=total {
            cur.push(v);
            go(total - v, slots - 1, cur, out);
            cur.pop();
        }
    }
    go(total, slots, &mut cur, &mut out);
    out
}

/// Locate the sigma-orbit restricting to a graded weight; `true` marks the
/// doubled short weights of type A_2n.
pub fn orbit_for_weight(fd: &crate::rootfold::FoldingDatum, mu: &[i64]) -> Option<(usize, bool)> {
    if let Some(fi) = fd.folded.root_index(mu) {
        for (oid, cyc) in fd.orbits.iter().enumerate() {
            if matches!(fd.restriction[cyc[0]], Restricted::R0(k) if k == fi) {
                return Some((oid, false));
            }
        }
    }
    if fd.a2n && mu.iter().all(|&c| c % 2 == 0) {
        let half: RootVec = mu.iter().map(|&c| c / 2).collect();
        if let Some(fi) = fd.folded.root_index(&half) {
            for (oid, cyc) in fd.orbits.iter().enumerate() {
                if matches!(fd.restriction[cyc[0]], Restricted::TwoRs(k) if k == fi) {
                    return Some((oid, true));
                }
            }
        }
    }
    None
}

/// Expansion of a twisted divided power through non-twisted loop operators:
/// a sum of scalar-weighted products, factors to be applied right to left.
/// Off-grade requests (mu outside wt(g_{-r})) expand to the zero operator.
pub fn expand_twisted_op(
    tb: &TwistedBasis,
    mu: &[i64],
    sign: Sign,
    r: i64,
    k: usize,
) -> Result<Vec<(Char0, Vec<LoopFactor>)>, LoopError> {
    let m = tb.fd.order as i64;
    let eps = (-r).rem_euclid(m) as usize;
    let Some((oid, doubled)) = orbit_for_weight(&tb.fd, mu) else {
        return Ok(vec![]);
    };
    let cyc = &tb.fd.orbits[oid];
    let rep = cyc[0];
    let fixed = cyc.len() == 1;

    if fixed {
        // x_{mu,eps} = delta x_rep: live at eps = 1 for the doubled A_2n
        // weights and at eps = 0 otherwise
        let live = if tb.fd.a2n { doubled && eps == 1 } else { eps == 0 };
        if !live {
            return Ok(vec![]);
        }
        return Ok(vec![(Char0::one(), vec![LoopFactor { root: rep, sign, r, k }])]);
    }

    let short = match tb.fd.restriction[rep] {
        Restricted::R0(fi) => tb.fd.short_folded[fi],
        Restricted::TwoRs(_) => unreachable!("moving orbits restrict into R_0"),
    };

    if tb.fd.a2n && short {
        // Heisenberg pair: x = sqrt2 x_rep (x) t^r, y = (-1)^eps sqrt2 x_other (x) t^r,
        // z = [x,y] = 2 (-1)^eps n_z x_{rep+other} (x) t^{2r}
        let other = cyc[1];
        let nz = tb
            .cb
            .n((rep, sign), (other, sign))
            .expect("Heisenberg pair brackets onto the doubled root");
        let sum_coords: RootVec = tb.cb.rs.positive_roots[rep]
            .iter()
            .zip(&tb.cb.rs.positive_roots[other])
            .map(|(a, b)| a + b)
            .collect();
        let zroot = tb.cb.rs.root_index(&sum_coords).expect("doubled root exists");
        let mut out = Vec::new();
        let mut kk = k % 2;
        while kk <= k {
            let j = (k - kk) / 2;
            let zbase = if eps == 1 { nz } else { -nz };
            let mut zc = 1i64;
            for _ in 0..j {
                zc *= zbase;
            }
            for rr in 0..=kk {
                let mut coef = Char0::one();
                for _ in 0..kk {
                    coef = coef.mul(&Char0::sqrt2());
                }
                let sgn = if eps == 1 && (kk - rr) % 2 == 1 { -1 } else { 1 };
                coef = coef.scale(Q::from_integer((sgn * zc) as i128));
                let mut factors = Vec::new();
                if rr > 0 {
                    factors.push(LoopFactor { root: rep, sign, r, k: rr });
                }
                if kk - rr > 0 {
                    factors.push(LoopFactor { root: other, sign, r, k: kk - rr });
                }
                if j > 0 {
                    factors.push(LoopFactor { root: zroot, sign, r: 2 * r, k: j });
                }
                out.push((coef, factors));
            }
            kk += 2;
        }
        return Ok(out);
    }

    // commuting orbit: multinomial expansion with zeta powers
    let mut out = Vec::new();
    for c in compositions(k, cyc.len()) {
        let mut exp = 0i64;
        for (j, &n) in c.iter().enumerate() {
            exp += (j * eps) as i64 * n as i64;
        }
        let coef = Char0::zeta_pow(m as usize, exp);
        let factors: Vec<LoopFactor> = cyc
            .iter()
            .zip(&c)
            .filter(|(_, &n)| n > 0)
            .map(|(&root, &n)| LoopFactor { root, sign, r, k: n })
            .collect();
        out.push((coef, factors));
    }
    Ok(out)
}

/// A loop module viewed through the twisted subalgebra.
#[derive(Clone)]
pub struct TwistedModule<F: Field> {
    pub lm: LoopModule<F>,
    pub tb: Arc<TwistedBasis>,
}

/// Restriction functor: same underlying space, twisted operators act through
/// their loop expansion.
pub fn restrict<F: Field>(
    lm: LoopModule<F>,
    tb: Arc<TwistedBasis>,
) -> Result<TwistedModule<F>, LoopError> {
    let p = lm.field.characteristic();
    let m = tb.fd.order as u64;
    if m > 1 && p == m {
        return Err(LoopError::CharEqualsOrder);
    }
    if tb.fd.a2n && p == 2 {
        return Err(LoopError::CharTwoA2n);
    }
    if m == 3 {
        lm.field.embed_char0(&Char0::zeta(3))?;
    }
    if tb.fd.a2n {
        lm.field.embed_char0(&Char0::sqrt2())?;
    }
    Ok(TwistedModule { lm, tb })
}

impl<F: Field> TwistedModule<F> {
    pub fn field(&self) -> &F {
        &self.lm.field
    }

    /// Apply (x^{sign}_{mu,-r} (x) t^r)^{(k)}.
    pub fn apply_twisted(
        &self,
        mu: &[i64],
        sign: Sign,
        r: i64,
        k: usize,
        v: &[F::Elt],
    ) -> Result<Vec<F::Elt>, LoopError> {
        let f = &self.lm.field;
        let mut out = self.lm.zero_vec();
        for (coef, factors) in expand_twisted_op(&self.tb, mu, sign, r, k)? {
            let c = f.embed_char0(&coef)?;
            if f.is_zero(&c) {
                continue;
            }
            let mut w = v.to_vec();
            for lf in factors.iter().rev() {
                w = self.lm.apply_loop(lf.root, lf.sign, lf.r, lf.k, &w)?;
                if w.iter().all(|x| f.is_zero(x)) {
                    break;
                }
            }
            for (dst, x) in out.iter_mut().zip(&w) {
                let add = f.mul(x, &c);
                *dst = f.add(dst, &add);
            }
        }
        Ok(out)
    }

    /// Value of h_{i,0} on a product basis vector (always an integer on
    /// weight vectors of evaluation modules with admissible weights is not
    /// guaranteed; half-integers flag weights outside the sigma-lattice).
    pub fn g0_weight(&self, idx: usize) -> Vec<Rat> {
        let w = self.lm.weight_of_index(idx);
        (0..self.tb.fd.folded.rank())
            .map(|i| self.tb.fd.pairing_h0(&w, i))
            .collect()
    }

    /// Pairing of a basis vector's weight with h_{mu,0} for a folded root.
    pub fn hmu_value(&self, folded_root: usize, idx: usize) -> Rat {
        let combo = self.tb.hmu_combo(folded_root, 0);
        let w = self.lm.weight_of_index(idx);
        let mut acc = Char0::zero();
        for (e, c) in &combo {
            if let GElt::H(i) = e {
                let p = self.tb.cb.rs.pairing(&w, *i);
                acc = acc.add(&c.scale(Q::new(*p.numer() as i128, *p.denom() as i128)));
            }
        }
        assert!(acc.0[1].is_zero() && acc.0[2].is_zero() && acc.0[3].is_zero());
        Rat::new(*acc.0[0].numer() as i64, *acc.0[0].denom() as i64)
    }

    /// binom(h_{i,0}; k) acts diagonally.
    pub fn apply_h0_binom(&self, i0: usize, k: usize, v: &[F::Elt]) -> Vec<F::Elt> {
        let f = &self.lm.field;
        let mut out = self.lm.zero_vec();
        for (idx, c) in v.iter().enumerate() {
            if f.is_zero(c) {
                continue;
            }
            let w = self.lm.weight_of_index(idx);
            let p = self.tb.fd.pairing_h0(&w, i0);
            assert!(p.is_integer());
            let scal = f.from_bigint(&binom_big(p.to_integer(), k));
            out[idx] = f.mul(c, &scal);
        }
        out
    }

    /// Closed-form eigenvalue of the r-th twisted series coefficient on a
    /// product basis vector, for mu a folded positive root: the orbit product
    /// when Gamma = m, the point-power substitution when Gamma = 1.
    pub fn lambda_sigma_eigen(&self, folded_root: usize, plus: bool, r: usize, idx: usize) -> F::Elt {
        let f = &self.lm.field;
        let fd = &self.tb.fd;
        let oid = (0..fd.orbits.len())
            .find(|&o| {
                matches!(fd.restriction[fd.orbits[o][0]], Restricted::R0(k) if k == folded_root)
            })
            .expect("folded root has a restricting orbit");
        let cyc = &fd.orbits[oid];
        let m = fd.order;
        if cyc.len() == 1 {
            return self.lm.lambda_eigen(cyc[0], plus, r, idx, m as i64);
        }
        let mut acc = vec![f.zero(); r + 1];
        acc[0] = f.one();
        for (j, &root) in cyc.iter().enumerate() {
            let zeta_pow = f
                .embed_char0(&Char0::zeta_pow(m, (m - j) as i64))
                .expect("zeta embeds in the module field");
            let mut slot = vec![f.zero(); r + 1];
            let mut zp = f.one();
            for (s, sp) in slot.iter_mut().enumerate() {
                *sp = f.mul(&self.lm.lambda_eigen(root, plus, s, idx, 1), &zp);
                zp = f.mul(&zp, &zeta_pow);
            }
            let mut next = vec![f.zero(); r + 1];
            for (i, x) in acc.iter().enumerate() {
                for (jj, y) in slot.iter().enumerate() {
                    if i + jj <= r {
                        let add = f.mul(x, y);
                        next[i + jj] = f.add(&next[i + jj], &add);
                    }
                }
            }
            acc = next;
        }
        acc[r].clone()
    }

    /// Twisted series of a doubled A_2n weight (exponential over
    /// h_{mu,0} (x) t^{+-mk} u^k): both orbit factors at the squared point.
    pub fn lambda_sigma_doubled_eigen(
        &self,
        folded_root: usize,
        plus: bool,
        r: usize,
        idx: usize,
    ) -> F::Elt {
        let f = &self.lm.field;
        let fd = &self.tb.fd;
        assert!(fd.a2n);
        let oid = (0..fd.orbits.len())
            .find(|&o| {
                matches!(fd.restriction[fd.orbits[o][0]], Restricted::R0(k) if k == folded_root)
            })
            .expect("short folded root with a restricting orbit");
        let cyc = &fd.orbits[oid];
        let mut acc = vec![f.zero(); r + 1];
        acc[0] = f.one();
        for &root in cyc {
            let mut slot = vec![f.zero(); r + 1];
            for (s, sp) in slot.iter_mut().enumerate() {
                *sp = self.lm.lambda_eigen(root, plus, s, idx, 2);
            }
            let mut next = vec![f.zero(); r + 1];
            for (i, x) in acc.iter().enumerate() {
                for (jj, y) in slot.iter().enumerate() {
                    if i + jj <= r {
                        let add = f.mul(x, y);
                        next[i + jj] = f.add(&next[i + jj], &add);
                    }
                }
            }
            acc = next;
        }
        acc[r].clone()
    }

    /// Independent exponential route to the twisted series on a basis vector.
    /// The defining series is expanded in the universal char-0 Laurent ring
    /// (one variable per evaluation point, coefficients in Q(zeta)),
    /// truncated, asserted integral, then mapped into the field.
    pub fn lambda_sigma_series_exp(
        &self,
        i0: usize,
        plus: bool,
        trunc: usize,
        idx: usize,
    ) -> Result<Vec<F::Elt>, LoopError> {
        let fd = &self.tb.fd;
        let m = fd.order;
        let slots = self.lm.factors.len();
        let parts = self.lm.split_index(idx);

        let folded_idx = {
            let coords: RootVec = (0..fd.folded.rank()).map(|j| i64::from(j == i0)).collect();
            fd.folded.root_index(&coords).unwrap()
        };
        let oid = (0..fd.orbits.len())
            .find(|&o| {
                matches!(fd.restriction[fd.orbits[o][0]], Restricted::R0(k) if k == folded_idx)
            })
            .unwrap();
        let gamma_one = fd.orbits[oid].len() == 1;

        let h_eigen = |eps: usize, slot: usize| -> Char0 {
            let combo = self.tb.hmu_combo(folded_idx, eps);
            let w = self.lm.factors[slot].0.weight_of_basis(parts[slot]);
            let mut acc = Char0::zero();
            for (e, c) in &combo {
                if let GElt::H(i) = e {
                    let p = self.tb.cb.rs.pairing(w, *i);
                    acc = acc.add(&c.scale(Q::new(*p.numer() as i128, *p.denom() as i128)));
                }
            }
            acc
        };

        // Laurent polynomials in the slot variables over the char-0 ring
        type Laur = HashMap<Vec<i64>, Char0>;

        // S(u): for Gamma = m the u^s term carries h_{mu, eps(s)} (x) t^{+-s}
        // over s with eps(s) = (-s) mod m; for Gamma = 1 the u^k term carries
        // h_{mu,0} (x) t^{+-mk} over k.
        let mut series: Vec<Laur> = vec![HashMap::new(); trunc + 1];
        for s in 1..=trunc {
            let (eps, denom, texp) = if gamma_one {
                (0usize, s as i128, (m * s) as i64)
            } else {
                ((m as i64 - (s as i64 % m as i64)) as usize % m, s as i128, s as i64)
            };
            let eps_used = if plus { eps } else { (m - eps % m) % m };
            let texp = if plus { texp } else { -texp };
            for slot in 0..slots {
                let ev = h_eigen(eps_used, slot);
                if ev.is_zero() {
                    continue;
                }
                let mut key = vec![0i64; slots];
                key[slot] = texp;
                let coef = ev.scale(Q::new(-1, denom));
                let entry = series[s].entry(key).or_insert_with(Char0::zero);
                *entry = entry.add(&coef);
            }
        }

        let mul_trunc = |a: &Vec<Laur>, b: &Vec<Laur>| -> Vec<Laur> {
            let mut out: Vec<Laur> = vec![HashMap::new(); trunc + 1];
            for (da, la) in a.iter().enumerate() {
                if la.is_empty() {
                    continue;
                }
                for (db, lb) in b.iter().enumerate() {
                    if da + db > trunc || lb.is_empty() {
                        continue;
                    }
                    for (ka, ca) in la {
                        for (kb, cb) in lb {
                            let c = ca.mul(cb);
                            if c.is_zero() {
                                continue;
                            }
                            let key: Vec<i64> = ka.iter().zip(kb).map(|(x, y)| x + y).collect();
                            let slot = out[da + db].entry(key).or_insert_with(Char0::zero);
                            *slot = slot.add(&c);
                        }
                    }
                }
            }
            for l in out.iter_mut() {
                l.retain(|_, c| !c.is_zero());
            }
            out
        };

        let mut result: Vec<Laur> = vec![HashMap::new(); trunc + 1];
        result[0].insert(vec![0; slots], Char0::one());
        let mut power: Vec<Laur> = result.clone();
        let mut factorial = Q::from_integer(1);
        for n in 1..=trunc {
            power = mul_trunc(&power, &series);
            factorial *= Q::from_integer(n as i128);
            let inv_fact = Q::from_integer(1) / factorial;
            for (d, l) in power.iter().enumerate() {
                for (key, c) in l {
                    let add = c.scale(inv_fact);
                    if add.is_zero() {
                        continue;
                    }
                    let slot = result[d].entry(key.clone()).or_insert_with(Char0::zero);
                    *slot = slot.add(&add);
                }
            }
        }

        let f = &self.lm.field;
        let mut out = Vec::with_capacity(trunc + 1);
        for l in result.iter() {
            let mut acc = f.zero();
            for (key, c) in l {
                if c.is_zero() {
                    continue;
                }
                assert!(c.is_integral(), "twisted series coefficient escapes Z[zeta]");
                let mut term = f.embed_char0(c)?;
                for (slot, &e) in key.iter().enumerate() {
                    let a = &self.lm.factors[slot].1;
                    term = f.mul(&term, &f.pow(a, e));
                }
                acc = f.add(&acc, &term);
            }
            out.push(acc);
        }
        Ok(out)
    }
}

/// Closed-form eigenvalue of the twisted series coefficient on the highest
/// vector of a single twisted evaluation module, by the evaluation formula;
/// `lambda_h[beta]` are the base pairings of the highest weight.
pub fn ev_sigma_lambda<F: Field>(
    tb: &TwistedBasis,
    field: &F,
    lambda_h: &[i64],
    a: &F::Elt,
    i0: usize,
    r: usize,
    plus: bool,
) -> F::Elt {
    let fd = &tb.fd;
    let m = fd.order;
    let folded_idx = {
        let coords: RootVec = (0..fd.folded.rank()).map(|j| i64::from(j == i0)).collect();
        fd.folded.root_index(&coords).unwrap()
    };
    let oid = (0..fd.orbits.len())
        .find(|&o| matches!(fd.restriction[fd.orbits[o][0]], Restricted::R0(k) if k == folded_idx))
        .unwrap();
    let cyc = &fd.orbits[oid];
    if cyc.len() == 1 {
        let base = field.pow(a, if plus { m as i64 } else { -(m as i64) });
        let mut c = field.from_bigint(&binom_big(lambda_h[cyc[0]], r));
        c = field.mul(&c, &field.pow(&base, r as i64));
        if r % 2 == 1 {
            c = field.neg(&c);
        }
        c
    } else {
        let mut acc = field.zero();
        for comp in compositions(r, cyc.len()) {
            let mut term = field.one();
            let mut zexp = 0i64;
            for (j, (&root, &rj)) in cyc.iter().zip(&comp).enumerate() {
                let b = binom_big(lambda_h[root], rj);
                if b.is_zero() {
                    term = field.zero();
                    break;
                }
                term = field.mul(&term, &field.from_bigint(&b));
                zexp -= (j * rj) as i64;
            }
            if field.is_zero(&term) {
                continue;
            }
            let z = field
                .embed_char0(&Char0::zeta_pow(m, zexp))
                .expect("zeta embeds in the module field");
            acc = field.add(&acc, &field.mul(&term, &z));
        }
        let base = field.pow(a, if plus { 1 } else { -1 });
        acc = field.mul(&acc, &field.pow(&base, r as i64));
        if r % 2 == 1 {
            acc = field.neg(&acc);
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chevalley::{chevalley_basis, TwistedBasis};
    use crate::coeffring::FqField;
    use crate::hypermod::{build_weyl_module, weight_from_coeffs};
    use crate::rootfold::{fold, DiagramAutomorphism, DynkinType};

    fn twisted(s: &str) -> Arc<TwistedBasis> {
        let cb = chevalley_basis(DynkinType::parse(s).unwrap());
        let sig = DiagramAutomorphism::flip(&cb.rs).unwrap();
        let fd = fold(&cb.rs, &sig).unwrap();
        Arc::new(TwistedBasis::new(cb, fd).unwrap())
    }

    fn eval_module(s: &str, coeffs: &[i64], field: FqField, a: i64, kmax: usize) -> LoopModule<FqField> {
        let cb = chevalley_basis(DynkinType::parse(s).unwrap());
        let hw = weight_from_coeffs(&cb, coeffs);
        let m = build_weyl_module(&cb, &hw, field.clone(), Some(kmax)).unwrap();
        let pt = m.field.from_i64(a);
        LoopModule::new(field, vec![(Arc::new(m), pt)])
    }

    #[test]
    fn r_zero_matches_base_action_and_t_powers_scale() {
        let f5 = FqField::new(5, 1).unwrap();
        let lm = eval_module("A1", &[2], f5, 2, 4);
        let hv = lm.hv_vec();
        let v1 = lm.apply_loop(0, Sign::Minus, 0, 1, &hv).unwrap();
        let v2 = lm.apply_loop(0, Sign::Minus, 3, 1, &hv).unwrap();
        let scal = lm.field.from_i64(8);
        let v1s: Vec<_> = v1.iter().map(|x| lm.field.mul(x, &scal)).collect();
        assert_eq!(v1s, v2);
    }

    #[test]
    fn lambda_on_highest_vector_is_truncated_binomial_line() {
        let f7 = FqField::new(7, 1).unwrap();
        let lm = eval_module("A2", &[2, 1], f7.clone(), 3, 4);
        let idx = lm.hv_index();
        let rs = &lm.factors[0].0.cb.rs.clone();
        let a1 = rs.root_index(&[1, 0]).unwrap();
        let a2 = rs.root_index(&[0, 1]).unwrap();
        for (i, lam) in [(a1, 2i64), (a2, 1i64)] {
            for r in 0..=3usize {
                let got = lm.lambda_eigen(i, true, r, idx, 1);
                let mut expect = f7.from_bigint(&binom_big(lam, r));
                let a = f7.from_i64(3);
                expect = f7.mul(&expect, &f7.pow(&a, r as i64));
                if r % 2 == 1 {
                    expect = f7.neg(&expect);
                }
                assert_eq!(got, expect, "i={i} r={r}");
            }
        }
    }

    #[test]
    fn twisted_grading_vanishing() {
        let tb = twisted("A3");
        let f5 = FqField::new(5, 1).unwrap();
        let lm = eval_module("A3", &[0, 1, 0], f5, 2, 3);
        let tm = restrict(lm, tb.clone()).unwrap();
        let long = (0..tb.fd.folded.num_positive()).find(|&i| !tb.fd.short_folded[i]).unwrap();
        let mu = tb.fd.folded.positive_roots[long].clone();
        let hv = tm.lm.hv_vec();
        let off = tm.apply_twisted(&mu, Sign::Minus, 1, 1, &hv).unwrap();
        assert!(off.iter().all(|x| tm.lm.field.is_zero(x)));
        let on = tm.apply_twisted(&mu, Sign::Minus, 0, 1, &hv).unwrap();
        assert!(on.iter().any(|x| !tm.lm.field.is_zero(x)));
    }

    #[test]
    fn identity_folding_preserves_action() {
        let cb = chevalley_basis(DynkinType::parse("A2").unwrap());
        let fd = fold(&cb.rs, &DiagramAutomorphism::identity(&cb.rs)).unwrap();
        let tb = Arc::new(TwistedBasis::new(cb.clone(), fd).unwrap());
        let f5 = FqField::new(5, 1).unwrap();
        let lm = eval_module("A2", &[1, 0], f5, 2, 3);
        let tm = restrict(lm.clone(), tb).unwrap();
        for r in 0..3i64 {
            for root in 0..cb.rs.num_positive() {
                let mu = tm.tb.fd.restricted_coords(root);
                let hv = lm.hv_vec();
                let a = lm.apply_loop(root, Sign::Minus, r, 1, &hv).unwrap();
                let b = tm.apply_twisted(&mu, Sign::Minus, r, 1, &hv).unwrap();
                assert_eq!(a, b);
            }
        }
    }

    #[test]
    fn char_equals_order_rejected() {
        let tb = twisted("A3");
        let f2 = FqField::new(2, 1).unwrap();
        let cb = chevalley_basis(DynkinType::parse("A3").unwrap());
        let hw = weight_from_coeffs(&cb, &[1, 0, 0]);
        let m = build_weyl_module(&cb, &hw, f2.clone(), Some(2)).unwrap();
        let pt = m.field.from_i64(1);
        let lm = LoopModule::new(f2, vec![(Arc::new(m), pt)]);
        assert!(matches!(restrict(lm, tb), Err(LoopError::CharEqualsOrder)));
    }

    #[test]
    fn reconstruction_through_graded_pieces() {
        // x_alpha (x) t^r = (1/Gamma) sum_eps zeta^{-j eps} (x_{mu,eps} (x) t^r)
        // as operators, with each graded piece expanded over the orbit.
        let tb = twisted("A3");
        let f5 = FqField::new(5, 1).unwrap();
        let lm = eval_module("A3", &[1, 1, 0], f5, 2, 2);
        let f = &lm.field;
        let m = 2usize;
        for root in 0..tb.cb.rs.num_positive() {
            if tb.fd.gamma(root) == 1 {
                continue;
            }
            let cyc = &tb.fd.orbits[tb.fd.root_orbit[root]];
            let j = cyc.iter().position(|&x| x == root).unwrap() as i64;
            for r in 0..2i64 {
                for idx in (0..lm.dim()).step_by(3) {
                    let mut v = lm.zero_vec();
                    v[idx] = f.one();
                    let direct = lm.apply_loop(root, Sign::Plus, r, 1, &v).unwrap();
                    let mut recon = lm.zero_vec();
                    for eps in 0..m {
                        // x_{mu,eps} (x) t^r = sum_{j'} zeta^{j' eps} x_{sigma^{j'} alpha} (x) t^r
                        let mut piece = lm.zero_vec();
                        for (jp, &rt) in cyc.iter().enumerate() {
                            let z = f
                                .embed_char0(&Char0::zeta_pow(m, (jp * eps) as i64))
                                .unwrap();
                            let img = lm.apply_loop(rt, Sign::Plus, r, 1, &v).unwrap();
                            for (dst, x) in piece.iter_mut().zip(&img) {
                                let add = f.mul(x, &z);
                                *dst = f.add(dst, &add);
                            }
                        }
                        let z = f
                            .embed_char0(&Char0::zeta_pow(m, -j * eps as i64))
                            .unwrap();
                        for (dst, x) in recon.iter_mut().zip(&piece) {
                            let add = f.mul(x, &z);
                            *dst = f.add(dst, &add);
                        }
                    }
                    let gamma_inv = f.inv(&f.from_i64(m as i64)).unwrap();
                    let recon: Vec<_> = recon.iter().map(|x| f.mul(x, &gamma_inv)).collect();
                    assert_eq!(direct, recon, "root {root} r {r} idx {idx}");
                }
            }
        }
    }

    #[test]
    fn exp_route_matches_closed_form_on_eval_module() {
        let tb = twisted("A3");
        let f7 = FqField::new(7, 1).unwrap();
        let lm = eval_module("A3", &[1, 1, 0], f7, 2, 3);
        let tm = restrict(lm, tb.clone()).unwrap();
        let idx = tm.lm.hv_index();
        for i0 in 0..tb.fd.folded.rank() {
            let coords: RootVec =
                (0..tb.fd.folded.rank()).map(|j| i64::from(j == i0)).collect();
            let fi = tb.fd.folded.root_index(&coords).unwrap();
            for plus in [true, false] {
                let series = tm.lambda_sigma_series_exp(i0, plus, 4, idx).unwrap();
                for (r, got) in series.iter().enumerate() {
                    let closed = tm.lambda_sigma_eigen(fi, plus, r, idx);
                    assert_eq!(*got, closed, "i0={i0} plus={plus} r={r}");
                }
            }
        }
    }
}
