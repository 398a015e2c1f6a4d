//! Exact scalar arithmetic: the characteristic-zero coefficient ring
//! Z[zeta_3, sqrt(2)] sitting inside Q(zeta_3, sqrt(2)), finite fields
//! F_{p^k} with deterministic moduli, the reduction maps between them, and
//! integer-lattice normal forms.

mod fq;
mod hnf;

pub use fq::{find_roots, reduce, Embedding, FqElt, FqField, RootReport, MAX_EXT_DEGREE};
pub use hnf::{hermite_normal_form, hnf_with_transform, solve_in_hnf, IntLattice};

use num_bigint::BigInt;
use num_rational::{BigRational, Ratio};
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type Q = Ratio<i128>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CoeffError {
    #[error("denominator not invertible modulo {p}")]
    DenominatorNotInvertible { p: u64 },
    #[error("no primitive root: {0}")]
    NoPrimitiveRoot(String),
    #[error("field characteristic equals the automorphism order {p}")]
    CharEqualsOrder { p: u64 },
    #[error("no embedding: {0}")]
    NoEmbedding(String),
    #[error("unsupported field: {0}")]
    UnsupportedField(String),
}

/// Descriptor of a supported coefficient ring.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum RingSpec {
    /// Q, extended by zeta_m (nontrivial only for m = 3) and optionally sqrt 2.
    Char0 { m: usize, sqrt2: bool },
    /// F_{p^k} with the lexicographically least monic irreducible modulus.
    Finite { p: u64, k: usize },
}

impl std::fmt::Display for RingSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RingSpec::Char0 { m, sqrt2 } => {
                write!(f, "Q")?;
                let mut ext = vec![];
                if *m == 3 {
                    ext.push("z3");
                }
                if *sqrt2 {
                    ext.push("s2");
                }
                if !ext.is_empty() {
                    write!(f, "({})", ext.join(","))?;
                }
                Ok(())
            }
            RingSpec::Finite { p, k } => {
                if *k == 1 {
                    write!(f, "F{p}")
                } else {
                    write!(f, "F{p}^{k}")
                }
            }
        }
    }
}

/// Element of Q(zeta_3, sqrt 2) over the power basis {1, z, s, zs} where
/// z = zeta_3 (z^2 = -1-z) and s = sqrt 2 (s^2 = 2). Ring specs with m < 3
/// simply never populate the z coordinates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Char0(pub [Q; 4]);

impl Char0 {
    pub fn zero() -> Self {
        Char0([Q::zero(); 4])
    }
    pub fn one() -> Self {
        Char0([Q::one(), Q::zero(), Q::zero(), Q::zero()])
    }
    pub fn from_int(n: i64) -> Self {
        Char0([Q::from_integer(n as i128), Q::zero(), Q::zero(), Q::zero()])
    }
    pub fn from_q(q: Q) -> Self {
        Char0([q, Q::zero(), Q::zero(), Q::zero()])
    }
    pub fn sqrt2() -> Self {
        Char0([Q::zero(), Q::zero(), Q::one(), Q::zero()])
    }
    /// zeta_m as an element: 1, -1, or the basis vector z.
    pub fn zeta(m: usize) -> Self {
        match m {
            1 => Char0::one(),
            2 => Char0::from_int(-1),
            3 => Char0([Q::zero(), Q::one(), Q::zero(), Q::zero()]),
            _ => panic!("order {m} out of range"),
        }
    }
    pub fn zeta_pow(m: usize, e: i64) -> Self {
        let e = e.rem_euclid(m as i64) as usize;
        let mut acc = Char0::one();
        for _ in 0..e {
            acc = acc.mul(&Char0::zeta(m));
        }
        acc
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|c| c.is_zero())
    }

    pub fn add(&self, o: &Char0) -> Char0 {
        let mut out = self.clone();
        for i in 0..4 {
            out.0[i] += o.0[i];
        }
        out
    }
    pub fn sub(&self, o: &Char0) -> Char0 {
        let mut out = self.clone();
        for i in 0..4 {
            out.0[i] -= o.0[i];
        }
        out
    }
    pub fn neg(&self) -> Char0 {
        let mut out = self.clone();
        for c in out.0.iter_mut() {
            *c = -*c;
        }
        out
    }
    pub fn scale(&self, q: Q) -> Char0 {
        let mut out = self.clone();
        for c in out.0.iter_mut() {
            *c *= q;
        }
        out
    }

    pub fn mul(&self, o: &Char0) -> Char0 {
        // z^2 = -1-z, s^2 = 2, so z·zs = -s-zs, s·zs = 2z, (zs)^2 = -2-2z.
        let a = &self.0;
        let b = &o.0;
        let two = Q::from_integer(2);
        let mut out = [Q::zero(); 4];
        out[0] = a[0] * b[0] - a[1] * b[1] + two * a[2] * b[2] - two * a[3] * b[3];
        out[1] = a[0] * b[1] + a[1] * b[0] - a[1] * b[1] + two * a[2] * b[3]
            + two * a[3] * b[2]
            - two * a[3] * b[3];
        out[2] = a[0] * b[2] + a[2] * b[0] - a[1] * b[3] - a[3] * b[1];
        out[3] = a[0] * b[3] + a[3] * b[0] + a[1] * b[2] + a[2] * b[1]
            - a[1] * b[3]
            - a[3] * b[1];
        Char0(out)
    }

    /// Multiplicative inverse (the 4-dimensional algebra is a field).
    pub fn inv(&self) -> Option<Char0> {
        if self.is_zero() {
            return None;
        }
        // Solve M x = e0 where M is left-multiplication by self.
        let cols: Vec<Char0> = (0..4)
            .map(|j| {
                let mut e = Char0::zero();
                e.0[j] = Q::one();
                self.mul(&e)
            })
            .collect();
        let mut m = [[Q::zero(); 5]; 4];
        for (j, col) in cols.iter().enumerate() {
            for i in 0..4 {
                m[i][j] = col.0[i];
            }
        }
        m[0][4] = Q::one();
        for col in 0..4 {
            let piv = (col..4).find(|&r| !m[r][col].is_zero())?;
            m.swap(col, piv);
            let p = m[col][col];
            for j in 0..5 {
                m[col][j] /= p;
            }
            for r in 0..4 {
                if r != col && !m[r][col].is_zero() {
                    let f = m[r][col];
                    for j in 0..5 {
                        let v = m[col][j];
                        m[r][j] -= f * v;
                    }
                }
            }
        }
        let mut out = Char0::zero();
        for i in 0..4 {
            out.0[i] = m[i][4];
        }
        Some(out)
    }

    /// True when every coordinate lies in Z (i.e. the element is in
    /// Z[zeta_3, sqrt 2]).
    pub fn is_integral(&self) -> bool {
        self.0.iter().all(|c| c.denom().is_one())
    }

    /// Canonical string, e.g. `-1/2 + 3·z + s`.
    pub fn canonical_string(&self) -> String {
        if self.is_zero() {
            return "0".into();
        }
        let names = ["", "z", "s", "z·s"];
        let mut parts = Vec::new();
        for (i, c) in self.0.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let mag = format_q(&c.abs());
            let body = if names[i].is_empty() {
                mag
            } else if c.abs().is_one() {
                names[i].to_string()
            } else {
                format!("{mag}·{}", names[i])
            };
            if c.is_negative() {
                parts.push(format!("-{body}"));
            } else {
                parts.push(body);
            }
        }
        parts.join(" + ").replace("+ -", "- ")
    }
}

pub fn format_q(q: &Q) -> String {
    if q.denom().is_one() {
        format!("{}", q.numer())
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

/// Field abstraction shared by the char-0 ring and the finite fields;
/// elements carry no context, all operations go through the field value.
pub trait Field: Clone + Send + Sync + 'static {
    type Elt: Clone + PartialEq + std::fmt::Debug + Send + Sync + 'static;

    fn zero(&self) -> Self::Elt;
    fn one(&self) -> Self::Elt;
    fn add(&self, a: &Self::Elt, b: &Self::Elt) -> Self::Elt;
    fn sub(&self, a: &Self::Elt, b: &Self::Elt) -> Self::Elt;
    fn neg(&self, a: &Self::Elt) -> Self::Elt;
    fn mul(&self, a: &Self::Elt, b: &Self::Elt) -> Self::Elt;
    fn inv(&self, a: &Self::Elt) -> Option<Self::Elt>;
    fn is_zero(&self, a: &Self::Elt) -> bool;
    fn characteristic(&self) -> u64;
    fn from_bigint(&self, n: &BigInt) -> Self::Elt;
    fn from_rational(&self, r: &BigRational) -> Result<Self::Elt, CoeffError>;
    /// Image of an element of Z[zeta_3, sqrt 2] (or its fraction field when
    /// denominators are invertible).
    fn embed_char0(&self, c: &Char0) -> Result<Self::Elt, CoeffError>;
    fn elt_string(&self, a: &Self::Elt) -> String;
    fn ring_spec(&self) -> RingSpec;

    fn from_i64(&self, n: i64) -> Self::Elt {
        self.from_bigint(&BigInt::from(n))
    }
    fn pow(&self, a: &Self::Elt, e: i64) -> Self::Elt {
        let base = if e < 0 {
            self.inv(a).expect("negative power of non-invertible element")
        } else {
            a.clone()
        };
        let mut acc = self.one();
        for _ in 0..e.unsigned_abs() {
            acc = self.mul(&acc, &base);
        }
        acc
    }
}

/// The characteristic-zero field Q(zeta_3, sqrt 2) (or a declared subfield).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QExt {
    pub m: usize,
    pub sqrt2: bool,
}

impl QExt {
    pub fn plain() -> Self {
        QExt { m: 1, sqrt2: false }
    }
    pub fn for_folding(m: usize, a2n: bool) -> Self {
        QExt { m, sqrt2: a2n }
    }
}

impl Field for QExt {
    type Elt = Char0;

    fn zero(&self) -> Char0 {
        Char0::zero()
    }
    fn one(&self) -> Char0 {
        Char0::one()
    }
    fn add(&self, a: &Char0, b: &Char0) -> Char0 {
        a.add(b)
    }
    fn sub(&self, a: &Char0, b: &Char0) -> Char0 {
        a.sub(b)
    }
    fn neg(&self, a: &Char0) -> Char0 {
        a.neg()
    }
    fn mul(&self, a: &Char0, b: &Char0) -> Char0 {
        a.mul(b)
    }
    fn inv(&self, a: &Char0) -> Option<Char0> {
        a.inv()
    }
    fn is_zero(&self, a: &Char0) -> bool {
        a.is_zero()
    }
    fn characteristic(&self) -> u64 {
        0
    }
    fn from_bigint(&self, n: &BigInt) -> Char0 {
        let v = n
            .to_i128()
            .expect("integer too large for char-0 scalar coordinates");
        Char0::from_q(Q::from_integer(v))
    }
    fn from_rational(&self, r: &BigRational) -> Result<Char0, CoeffError> {
        let n = r.numer().to_i128().ok_or_else(|| {
            CoeffError::UnsupportedField("rational numerator overflow".into())
        })?;
        let d = r.denom().to_i128().ok_or_else(|| {
            CoeffError::UnsupportedField("rational denominator overflow".into())
        })?;
        Ok(Char0::from_q(Q::new(n, d)))
    }
    fn embed_char0(&self, c: &Char0) -> Result<Char0, CoeffError> {
        Ok(c.clone())
    }
    fn elt_string(&self, a: &Char0) -> String {
        a.canonical_string()
    }
    fn ring_spec(&self) -> RingSpec {
        RingSpec::Char0 { m: self.m, sqrt2: self.sqrt2 }
    }
}

/// Binomial coefficient with integer (possibly negative) upper argument.
pub fn binom_big(n: i64, k: usize) -> BigInt {
    let mut num = BigInt::one();
    for j in 0..k {
        num *= BigInt::from(n - j as i64);
    }
    let mut den = BigInt::one();
    for j in 1..=k {
        den *= BigInt::from(j as i64);
    }
    let (q, r) = num_integer::Integer::div_rem(&num, &den);
    debug_assert!(r.is_zero());
    q
}

pub fn factorial_big(k: usize) -> BigInt {
    let mut acc = BigInt::one();
    for j in 2..=k {
        acc *= BigInt::from(j as u64);
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn char0_relations() {
        let z = Char0::zeta(3);
        let s = Char0::sqrt2();
        // z^3 = 1 and 1 + z + z^2 = 0
        let z2 = z.mul(&z);
        assert_eq!(z2.mul(&z), Char0::one());
        assert!(Char0::one().add(&z).add(&z2).is_zero());
        // s^2 = 2
        assert_eq!(s.mul(&s), Char0::from_int(2));
        // (z s)^2 = 2 z^2
        let zs = z.mul(&s);
        assert_eq!(zs.mul(&zs), z2.scale(Q::from_integer(2)));
    }

    #[test]
    fn char0_inverse() {
        let x = Char0([Q::new(1, 2), Q::from_integer(3), Q::new(-2, 5), Q::one()]);
        let inv = x.inv().unwrap();
        assert_eq!(x.mul(&inv), Char0::one());
        assert!(Char0::zero().inv().is_none());
    }

    #[test]
    fn binomials() {
        assert_eq!(binom_big(5, 2), BigInt::from(10));
        assert_eq!(binom_big(-2, 1), BigInt::from(-2));
        assert_eq!(binom_big(-1, 3), BigInt::from(-1));
        assert_eq!(binom_big(3, 0), BigInt::from(1));
        assert_eq!(binom_big(2, 5), BigInt::from(0));
    }

    #[test]
    fn canonical_strings() {
        assert_eq!(Char0::zero().canonical_string(), "0");
        let x = Char0([Q::new(-1, 2), Q::from_integer(3), Q::one(), Q::zero()]);
        assert_eq!(x.canonical_string(), "-1/2 + 3·z + s");
    }
}
