//! Finite fields F_{p^k} as F_p[x]/(modulus) with the lexicographically
//! least irreducible modulus, exhaustive root extraction, and the reduction
//! map from the characteristic-zero coefficient ring.

use super::{Char0, CoeffError, Field, RingSpec};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};

/// Largest supported extension degree; desk scale keeps p^k small anyway.
pub const MAX_EXT_DEGREE: usize = 6;

/// Element of F_{p^k}: coefficients of the residue polynomial, low to high,
/// length MAX_EXT_DEGREE with the tail zeroed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FqElt(pub [u64; MAX_EXT_DEGREE]);

impl FqElt {
    fn zero() -> Self {
        FqElt([0; MAX_EXT_DEGREE])
    }
    fn scalar(c: u64) -> Self {
        let mut e = Self::zero();
        e.0[0] = c;
        e
    }
}

/// Images of the char-0 generators inside a finite field.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Embedding {
    /// Order of the root of unity the `zeta` image satisfies.
    pub m: usize,
    /// Image of zeta_m (1 for m = 1, -1 for m = 2, a primitive cube root
    /// for m = 3).
    pub zeta: FqElt,
    /// Image of sqrt 2, when requested.
    pub sqrt2: Option<FqElt>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FqField {
    pub p: u64,
    pub k: usize,
    /// Monic modulus, coefficients low to high, length k+1.
    pub modulus: Vec<u64>,
    /// Embedding of the char-0 constants, when constructed with scalars.
    pub embedding: Option<Embedding>,
}

fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= p {
        if p % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

fn poly_mod_mul(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let mut out = vec![0u64; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            out[i + j] = (out[i + j] + x * y) % p;
        }
    }
    out
}

fn poly_mod_rem(mut a: Vec<u64>, m: &[u64], p: u64) -> Vec<u64> {
    let dm = m.len() - 1;
    assert_eq!(m[dm], 1, "modulus must be monic");
    while a.len() > dm {
        let lead = *a.last().unwrap() % p;
        let shift = a.len() - 1 - dm;
        if lead != 0 {
            for i in 0..dm {
                let sub = (lead * m[i]) % p;
                a[shift + i] = (a[shift + i] + p - sub) % p;
            }
        }
        a.pop();
    }
    a
}

fn poly_is_irreducible(f: &[u64], p: u64) -> bool {
    let d = f.len() - 1;
    if d == 1 {
        return true;
    }
    // trial division by every monic polynomial of degree 1..=d/2
    for deg in 1..=d / 2 {
        let count = p.pow(deg as u32);
        for code in 0..count {
            let mut g = vec![0u64; deg + 1];
            let mut c = code;
            for gi in g.iter_mut().take(deg) {
                *gi = c % p;
                c /= p;
            }
            g[deg] = 1;
            let r = poly_mod_rem(f.to_vec(), &g, p);
            if r.iter().all(|&x| x % p == 0) {
                return false;
            }
        }
    }
    true
}

impl FqField {
    /// F_{p^k} with the canonical modulus. No char-0 constants are embedded;
    /// use [`FqField::with_scalars`] when zeta or sqrt 2 are needed.
    pub fn new(p: u64, k: usize) -> Result<Self, CoeffError> {
        if !is_prime(p) {
            return Err(CoeffError::UnsupportedField(format!("{p} is not prime")));
        }
        if k == 0 || k > MAX_EXT_DEGREE {
            return Err(CoeffError::UnsupportedField(format!(
                "extension degree {k} out of range 1..={MAX_EXT_DEGREE}"
            )));
        }
        if (p as u128).pow(k as u32) > 1_000_000 {
            return Err(CoeffError::UnsupportedField(format!(
                "field size {p}^{k} beyond desk scale"
            )));
        }
        let modulus = if k == 1 {
            vec![0, 1]
        } else {
            let mut found = None;
            let count = p.pow(k as u32);
            'outer: for code in 0..count {
                let mut f = vec![0u64; k + 1];
                let mut c = code;
                for fi in f.iter_mut().take(k) {
                    *fi = c % p;
                    c /= p;
                }
                f[k] = 1;
                if poly_is_irreducible(&f, p) {
                    found = Some(f);
                    break 'outer;
                }
            }
            found.ok_or_else(|| {
                CoeffError::UnsupportedField(format!("no irreducible modulus for {p}^{k}"))
            })?
        };
        Ok(FqField { p, k, modulus, embedding: None })
    }

    /// F_{p^k} with zeta_m and optionally sqrt 2 located inside it.
    pub fn with_scalars(p: u64, k: usize, m: usize, sqrt2: bool) -> Result<Self, CoeffError> {
        let mut f = FqField::new(p, k)?;
        let zeta = match m {
            1 => f.one(),
            2 => {
                if p == 2 {
                    return Err(CoeffError::NoPrimitiveRoot(
                        "no primitive square root of unity in characteristic 2".into(),
                    ));
                }
                f.from_i64(-1)
            }
            3 => f
                .iter_elements()
                .find(|x| {
                    !f.is_zero(x) && f.mul(&f.mul(x, x), x) == f.one() && *x != f.one()
                })
                .ok_or_else(|| {
                    CoeffError::NoPrimitiveRoot(format!(
                        "F_{p}^{k} lacks a primitive cube root of unity; enlarge k"
                    ))
                })?,
            _ => return Err(CoeffError::UnsupportedField(format!("order {m}"))),
        };
        let s2 = if sqrt2 {
            let two = f.from_i64(2);
            Some(
                f.iter_elements()
                    .find(|x| f.mul(x, x) == two)
                    .ok_or_else(|| {
                        CoeffError::NoPrimitiveRoot(format!(
                            "F_{p}^{k} lacks a square root of 2; enlarge k"
                        ))
                    })?,
            )
        } else {
            None
        };
        f.embedding = Some(Embedding { m, zeta, sqrt2: s2 });
        Ok(f)
    }

    pub fn order(&self) -> u64 {
        self.p.pow(self.k as u32)
    }

    /// Elements in the canonical enumeration order (base-p digit strings).
    pub fn iter_elements(&self) -> impl Iterator<Item = FqElt> + '_ {
        let p = self.p;
        let k = self.k;
        (0..self.order()).map(move |code| {
            let mut e = FqElt::zero();
            let mut c = code;
            for i in 0..k {
                e.0[i] = c % p;
                c /= p;
            }
            e
        })
    }

    /// Canonical rank of an element in the enumeration order.
    pub fn elt_code(&self, a: &FqElt) -> u64 {
        let mut code = 0u64;
        for i in (0..self.k).rev() {
            code = code * self.p + a.0[i];
        }
        code
    }

    pub fn from_coeffs(&self, coeffs: &[u64]) -> FqElt {
        let mut e = FqElt::zero();
        for (i, &c) in coeffs.iter().enumerate() {
            assert!(i < self.k);
            e.0[i] = c % self.p;
        }
        e
    }
}

impl Field for FqField {
    type Elt = FqElt;

    fn zero(&self) -> FqElt {
        FqElt::zero()
    }
    fn one(&self) -> FqElt {
        FqElt::scalar(1)
    }
    fn add(&self, a: &FqElt, b: &FqElt) -> FqElt {
        let mut out = FqElt::zero();
        for i in 0..self.k {
            out.0[i] = (a.0[i] + b.0[i]) % self.p;
        }
        out
    }
    fn sub(&self, a: &FqElt, b: &FqElt) -> FqElt {
        let mut out = FqElt::zero();
        for i in 0..self.k {
            out.0[i] = (a.0[i] + self.p - b.0[i] % self.p) % self.p;
        }
        out
    }
    fn neg(&self, a: &FqElt) -> FqElt {
        self.sub(&FqElt::zero(), a)
    }
    fn mul(&self, a: &FqElt, b: &FqElt) -> FqElt {
        let prod = poly_mod_mul(&a.0[..self.k], &b.0[..self.k], self.p);
        let rem = poly_mod_rem(prod, &self.modulus, self.p);
        let mut out = FqElt::zero();
        for (i, &c) in rem.iter().enumerate().take(self.k) {
            out.0[i] = c % self.p;
        }
        out
    }
    fn inv(&self, a: &FqElt) -> Option<FqElt> {
        if self.is_zero(a) {
            return None;
        }
        // a^(q-2)
        let mut e = self.order() - 2;
        let mut base = *a;
        let mut acc = self.one();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            base = self.mul(&base, &base);
            e >>= 1;
        }
        Some(acc)
    }
    fn is_zero(&self, a: &FqElt) -> bool {
        a.0[..self.k].iter().all(|&c| c % self.p == 0)
    }
    fn characteristic(&self) -> u64 {
        self.p
    }
    fn from_bigint(&self, n: &BigInt) -> FqElt {
        let p = BigInt::from(self.p);
        let mut r = n % &p;
        if r.is_negative() {
            r += &p;
        }
        FqElt::scalar(r.to_u64().unwrap())
    }
    fn from_rational(&self, r: &BigRational) -> Result<FqElt, CoeffError> {
        let den = self.from_bigint(r.denom());
        let num = self.from_bigint(r.numer());
        let inv = self
            .inv(&den)
            .ok_or(CoeffError::DenominatorNotInvertible { p: self.p })?;
        Ok(self.mul(&num, &inv))
    }
    fn embed_char0(&self, c: &Char0) -> Result<FqElt, CoeffError> {
        let q_to_f = |q: &super::Q| -> Result<FqElt, CoeffError> {
            let num = self.from_bigint(&BigInt::from(*q.numer()));
            let den = self.from_bigint(&BigInt::from(*q.denom()));
            let inv = self
                .inv(&den)
                .ok_or(CoeffError::DenominatorNotInvertible { p: self.p })?;
            Ok(self.mul(&num, &inv))
        };
        let mut acc = q_to_f(&c.0[0])?;
        let needs_zeta = !c.0[1].is_zero() || !c.0[3].is_zero();
        let needs_sqrt2 = !c.0[2].is_zero() || !c.0[3].is_zero();
        if !needs_zeta && !needs_sqrt2 {
            return Ok(acc);
        }
        let emb = self.embedding.as_ref().ok_or_else(|| {
            CoeffError::NoEmbedding("field constructed without scalar embedding".into())
        })?;
        // zeta coordinates always refer to zeta_3
        if needs_zeta && emb.m != 3 {
            return Err(CoeffError::NoEmbedding(
                "element uses zeta_3 but the embedding carries none".into(),
            ));
        }
        if !c.0[1].is_zero() {
            acc = self.add(&acc, &self.mul(&q_to_f(&c.0[1])?, &emb.zeta));
        }
        if needs_sqrt2 {
            let s = emb.sqrt2.ok_or_else(|| {
                CoeffError::NoEmbedding("element uses sqrt 2 but the embedding carries none".into())
            })?;
            acc = self.add(&acc, &self.mul(&q_to_f(&c.0[2])?, &s));
            if !c.0[3].is_zero() {
                let zs = self.mul(&emb.zeta, &s);
                acc = self.add(&acc, &self.mul(&q_to_f(&c.0[3])?, &zs));
            }
        }
        Ok(acc)
    }
    fn elt_string(&self, a: &FqElt) -> String {
        if self.k == 1 {
            format!("{}", a.0[0] % self.p)
        } else {
            let coeffs: Vec<String> = (0..self.k).map(|i| format!("{}", a.0[i])).collect();
            format!("[{}]", coeffs.join(","))
        }
    }
    fn ring_spec(&self) -> RingSpec {
        RingSpec::Finite { p: self.p, k: self.k }
    }
}

/// Reduce a char-0 scalar into a finite field along an explicit embedding.
pub fn reduce(s: &Char0, target: &FqField, emb: &Embedding) -> Result<FqElt, CoeffError> {
    let mut t = target.clone();
    t.embedding = Some(emb.clone());
    t.embed_char0(s)
}

/// All roots of `f` (coefficients over `field`, low to high) found in
/// `search`, with multiplicities, by exhaustive evaluation and deflation.
#[derive(Debug, Clone)]
pub struct RootReport {
    pub roots: Vec<(FqElt, usize)>,
    pub fully_split: bool,
    pub degree: usize,
}

/// Image of `field`'s generator inside `search`, when `search` extends it.
pub fn embed_field(field: &FqField, search: &FqField) -> Result<impl Fn(&FqElt) -> FqElt, CoeffError> {
    if field.p != search.p || search.k % field.k != 0 {
        return Err(CoeffError::NoEmbedding(format!(
            "F_{}^{} does not embed in F_{}^{}",
            field.p, field.k, search.p, search.k
        )));
    }
    // root of field.modulus inside search
    let gen_img = if field.k == 1 {
        search.one() // unused
    } else {
        let coeffs: Vec<FqElt> = field
            .modulus
            .iter()
            .map(|&c| search.from_i64(c as i64))
            .collect();
        search
            .iter_elements()
            .find(|x| { search.is_zero(&eval_poly(search, &coeffs, x)) })
            .ok_or_else(|| CoeffError::NoEmbedding("modulus has no root in search field".into()))?
    };
    let search = search.clone();
    let k = field.k;
    Ok(move |a: &FqElt| -> FqElt {
        let mut acc = search.zero();
        let mut pw = search.one();
        for i in 0..k {
            let c = search.from_i64(a.0[i] as i64);
            acc = search.add(&acc, &search.mul(&c, &pw));
            pw = search.mul(&pw, &gen_img);
        }
        acc
    })
}

pub fn eval_poly(field: &FqField, coeffs: &[FqElt], x: &FqElt) -> FqElt {
    let mut acc = field.zero();
    for c in coeffs.iter().rev() {
        acc = field.add(&field.mul(&acc, x), c);
    }
    acc
}

pub fn find_roots(
    coeffs: &[FqElt],
    field: &FqField,
    search: &FqField,
) -> Result<RootReport, CoeffError> {
    assert!(!coeffs.is_empty() && !field.is_zero(&coeffs[0]), "constant term must be nonzero");
    let embed = embed_field(field, search)?;
    let mut f: Vec<FqElt> = coeffs.iter().map(|c| embed(c)).collect();
    while f.len() > 1 && search.is_zero(f.last().unwrap()) {
        f.pop();
    }
    let degree = f.len() - 1;
    let mut roots = Vec::new();
    for x in search.iter_elements() {
        if search.is_zero(&x) {
            continue; // constant term nonzero, zero is never a root
        }
        let mut mult = 0usize;
        let mut g = f.clone();
        while g.len() > 1 && search.is_zero(&eval_poly(search, &g, &x)) {
            g = deflate(search, &g, &x);
            mult += 1;
        }
        if mult > 0 {
            roots.push((x, mult));
        }
    }
    roots.sort_by_key(|(r, _)| search.elt_code(r));
    let total: usize = roots.iter().map(|(_, m)| m).sum();
    Ok(RootReport { roots, fully_split: total == degree, degree })
}

/// Divide by (x - r); the division must be exact.
fn deflate(field: &FqField, f: &[FqElt], r: &FqElt) -> Vec<FqElt> {
    let n = f.len() - 1;
    let mut q = vec![field.zero(); n];
    q[n - 1] = f[n];
    for i in (1..n).rev() {
        q[i - 1] = field.add(&f[i], &field.mul(r, &q[i]));
    }
    let rem = field.add(&f[0], &field.mul(r, &q[0]));
    debug_assert!(field.is_zero(&rem), "deflation must be exact");
    q
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeffring::Q;

    #[test]
    fn reduce_one_half_mod_five() {
        let f5 = FqField::new(5, 1).unwrap();
        let emb = Embedding { m: 1, zeta: f5.one(), sqrt2: None };
        let half = Char0::from_q(Q::new(1, 2));
        assert_eq!(reduce(&half, &f5, &emb).unwrap(), f5.from_i64(3));
    }

    #[test]
    fn reduce_sqrt2_mod_seven() {
        let f7 = FqField::with_scalars(7, 1, 1, true).unwrap();
        let img = f7.embed_char0(&Char0::sqrt2()).unwrap();
        assert_eq!(f7.mul(&img, &img), f7.from_i64(2));
        // canonical least square root of 2 mod 7 is 3
        assert_eq!(img, f7.from_i64(3));
    }

    #[test]
    fn reduce_zeta3_mod_seven() {
        let f7 = FqField::with_scalars(7, 1, 3, false).unwrap();
        let z = f7.embed_char0(&Char0::zeta(3)).unwrap();
        assert_eq!(z, f7.from_i64(2));
        let z3 = f7.mul(&f7.mul(&z, &z), &z);
        assert_eq!(z3, f7.one());
        let sum = f7.add(&f7.add(&f7.one(), &z), &f7.mul(&z, &z));
        assert!(f7.is_zero(&sum));
    }

    #[test]
    fn no_sqrt2_in_f5_but_in_f25() {
        assert!(matches!(
            FqField::with_scalars(5, 1, 1, true),
            Err(CoeffError::NoPrimitiveRoot(_))
        ));
        let f25 = FqField::with_scalars(5, 2, 1, true).unwrap();
        let s = f25.embedding.as_ref().unwrap().sqrt2.unwrap();
        assert_eq!(f25.mul(&s, &s), f25.from_i64(2));
    }

    #[test]
    fn denominator_not_invertible() {
        let f5 = FqField::new(5, 1).unwrap();
        let fifth = BigRational::new(1.into(), 5.into());
        assert!(matches!(
            f5.from_rational(&fifth),
            Err(CoeffError::DenominatorNotInvertible { p: 5 })
        ));
    }

    #[test]
    fn field_axioms_f8() {
        let f8 = FqField::new(2, 3).unwrap();
        let elems: Vec<FqElt> = f8.iter_elements().collect();
        assert_eq!(elems.len(), 8);
        for a in &elems {
            if !f8.is_zero(a) {
                let inv = f8.inv(a).unwrap();
                assert_eq!(f8.mul(a, &inv), f8.one());
            }
            for b in &elems {
                assert_eq!(f8.mul(a, b), f8.mul(b, a));
                for c in &elems {
                    let l = f8.mul(a, &f8.add(b, c));
                    let r = f8.add(&f8.mul(a, b), &f8.mul(a, c));
                    assert_eq!(l, r);
                }
            }
        }
    }

    #[test]
    fn roots_linear() {
        // 1 - u has the single root 1
        let f5 = FqField::new(5, 1).unwrap();
        let coeffs = vec![f5.one(), f5.from_i64(-1)];
        let rep = find_roots(&coeffs, &f5, &f5).unwrap();
        assert_eq!(rep.roots, vec![(f5.one(), 1)]);
        assert!(rep.fully_split);
    }

    #[test]
    fn roots_u2_plus_one() {
        let f5 = FqField::new(5, 1).unwrap();
        let coeffs = vec![f5.one(), f5.zero(), f5.one()];
        let rep = find_roots(&coeffs, &f5, &f5).unwrap();
        let vals: Vec<u64> = rep.roots.iter().map(|(r, _)| r.0[0]).collect();
        assert_eq!(vals, vec![2, 3]);

        let f7 = FqField::new(7, 1).unwrap();
        let coeffs7 = vec![f7.one(), f7.zero(), f7.one()];
        let rep7 = find_roots(&coeffs7, &f7, &f7).unwrap();
        assert!(rep7.roots.is_empty() && !rep7.fully_split);
        let f49 = FqField::new(7, 2).unwrap();
        let rep49 = find_roots(&coeffs7, &f7, &f49).unwrap();
        assert_eq!(rep49.roots.len(), 2);
        assert!(rep49.fully_split);
    }

    #[test]
    fn roots_with_multiplicity() {
        // (1 - 2u)^2 (1 - 3u) over F_7
        let f7 = FqField::new(7, 1).unwrap();
        let two = f7.from_i64(2);
        let three = f7.from_i64(3);
        // roots of the polynomial in u are u = 1/2 (twice), u = 1/3
        let r2 = f7.inv(&two).unwrap();
        let r3 = f7.inv(&three).unwrap();
        // expand (1-2u)^2(1-3u)
        let mut coeffs = vec![f7.one()];
        for r in [two, two, three] {
            let mut next = vec![f7.zero(); coeffs.len() + 1];
            for (i, c) in coeffs.iter().enumerate() {
                next[i] = f7.add(&next[i], c);
                next[i + 1] = f7.sub(&next[i + 1], &f7.mul(c, &r));
            }
            coeffs = next;
        }
        let rep = find_roots(&coeffs, &f7, &f7).unwrap();
        let mut expected = vec![(r2, 2), (r3, 1)];
        expected.sort_by_key(|(r, _)| f7.elt_code(r));
        assert_eq!(rep.roots, expected);
        assert!(rep.fully_split);
    }
}
