//! Identity suites and the empirical restriction-theorem checker, producing
//! structured, byte-stable reports.

mod garland;
mod restriction;

pub use garland::{garland_suite, run_garland_case, GarlandCase, GarlandFamily};
pub use restriction::{
    check_hw_relations, check_restriction_theorem, restriction_suite, window_stable_cyclicity,
    PiSpec,
};

use crate::chevalley::{chevalley_basis, TwistedBasis};
use crate::coeffring::{binom_big, factorial_big, Field, FqField};
use crate::hypermod::{build_weyl_module, weight_from_coeffs, Module};
use crate::loopaction::{restrict, LoopModule, TwistedModule};
use crate::rootfold::{fold, DiagramAutomorphism, DynkinType, Rat};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;
use std::collections::BTreeMap;
use std::sync::Arc;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    Skipped,
}

#[derive(Debug, Clone, Serialize)]
pub struct Assertion {
    pub name: String,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<String>,
}

impl Assertion {
    pub fn pass(name: impl Into<String>) -> Self {
        Assertion { name: name.into(), status: Status::Pass, witness: None }
    }
    pub fn fail(name: impl Into<String>, witness: impl Into<String>) -> Self {
        Assertion { name: name.into(), status: Status::Fail, witness: Some(witness.into()) }
    }
    pub fn skip(name: impl Into<String>, why: impl Into<String>) -> Self {
        Assertion { name: name.into(), status: Status::Skipped, witness: Some(why.into()) }
    }
    pub fn check(name: impl Into<String>, ok: bool, witness: impl Fn() -> String) -> Self {
        if ok {
            Assertion::pass(name)
        } else {
            Assertion::fail(name, witness())
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CaseReport {
    pub case: String,
    pub assertions: Vec<Assertion>,
}

impl CaseReport {
    pub fn passed(&self) -> bool {
        self.assertions.iter().all(|a| a.status != Status::Fail)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct VerificationReport {
    pub suite: String,
    pub cases: Vec<CaseReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timing_ms: Option<u128>,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.cases.iter().all(|c| c.passed())
    }
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).unwrap()
    }
}

/// Named automorphism choices exposed by the toolkit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AutoKind {
    Id,
    Flip,
    Rot3,
}

impl AutoKind {
    pub fn parse(s: &str) -> Option<AutoKind> {
        match s {
            "id" => Some(AutoKind::Id),
            "flip" => Some(AutoKind::Flip),
            "rot3" => Some(AutoKind::Rot3),
            _ => None,
        }
    }
    pub fn name(&self) -> &'static str {
        match self {
            AutoKind::Id => "id",
            AutoKind::Flip => "flip",
            AutoKind::Rot3 => "rot3",
        }
    }
}

/// Twisted basis for a named folding, with the sign-normalized orbit data.
pub fn twisted_basis_for(
    ty: DynkinType,
    auto: AutoKind,
) -> Result<Arc<TwistedBasis>, crate::rootfold::RootError> {
    let cb = chevalley_basis(ty);
    let sig = match auto {
        AutoKind::Id => DiagramAutomorphism::identity(&cb.rs),
        AutoKind::Flip => DiagramAutomorphism::flip(&cb.rs)?,
        AutoKind::Rot3 => DiagramAutomorphism::triality(&cb.rs)?,
    };
    let fd = fold(&cb.rs, &sig)?;
    Ok(Arc::new(TwistedBasis::new(cb, fd).unwrap()))
}

/// Smallest field F_{p^k} carrying the scalars a folding needs; the degree
/// grows until the primitive root (and sqrt 2 for A_2n) exists.
pub fn field_for(tb: &TwistedBasis, p: u64, min_k: usize) -> Result<FqField, crate::coeffring::CoeffError> {
    let m = tb.fd.order;
    let needs_sqrt2 = tb.fd.a2n;
    let mut last = None;
    for k in [1usize, 2, 3, 4, 6] {
        if k < min_k {
            continue;
        }
        match FqField::with_scalars(p, k, m, needs_sqrt2) {
            Ok(f) => return Ok(f),
            Err(e) => last = Some(e),
        }
    }
    Err(last.unwrap())
}

/// Simple evaluation module of a dominant base weight at a point, wrapped as
/// a loop module.
pub fn eval_module(
    tb: &TwistedBasis,
    field: &FqField,
    hw: &[Rat],
    a: i64,
    kmax: usize,
) -> LoopModule<FqField> {
    let m = build_weyl_module(&tb.cb, hw, field.clone(), Some(kmax))
        .unwrap()
        .simple_quotient();
    let pt = field.from_i64(a);
    LoopModule::new(field.clone(), vec![(Arc::new(m), pt)])
}

/// Extend a g_0-dominant value tuple to the base algebra along the node map.
pub fn extend_weight(tb: &TwistedBasis, values: &[i64]) -> Vec<Rat> {
    let mut hw = vec![Rat::zero(); tb.cb.rs.rank()];
    for (i0, &v) in values.iter().enumerate() {
        let node = tb.fd.o_map[i0];
        for (j, c) in tb.cb.rs.fundamental_weights[node].iter().enumerate() {
            hw[j] += *c * Rat::from_integer(v);
        }
    }
    hw
}

/// Twisted evaluation module of a g_0-dominant value tuple.
pub fn twisted_eval_module(
    tb: &Arc<TwistedBasis>,
    field: &FqField,
    values: &[i64],
    a: i64,
    kmax: usize,
) -> TwistedModule<FqField> {
    let hw = extend_weight(tb, values);
    let lm = eval_module(tb, field, &hw, a, kmax);
    restrict(lm, tb.clone()).unwrap()
}

/// Free model of the three-dimensional algebra with [x,y] = z central:
/// ordered monomials x^(a) y^(b) z^(c) with exact rational coefficients.
type HeisVec = BTreeMap<(usize, usize, usize), BigRational>;

fn heis_add(acc: &mut HeisVec, key: (usize, usize, usize), c: BigRational) {
    if c.is_zero() {
        return;
    }
    let slot = acc.entry(key).or_insert_with(BigRational::zero);
    *slot += c;
    if slot.is_zero() {
        acc.remove(&key);
    }
}

fn heis_mul_x(v: &HeisVec) -> HeisVec {
    let mut out = HeisVec::new();
    for (&(a, b, c), coef) in v {
        heis_add(&mut out, (a + 1, b, c), coef * BigRational::from(BigInt::from(a as i64 + 1)));
    }
    out
}

fn heis_mul_y(v: &HeisVec) -> HeisVec {
    // y x^(a) y^(b) z^(c) = (b+1) x^(a) y^(b+1) z^(c) - (c+1) x^(a-1) y^(b) z^(c+1)
    let mut out = HeisVec::new();
    for (&(a, b, c), coef) in v {
        heis_add(&mut out, (a, b + 1, c), coef * BigRational::from(BigInt::from(b as i64 + 1)));
        if a > 0 {
            heis_add(
                &mut out,
                (a - 1, b, c + 1),
                -coef * BigRational::from(BigInt::from(c as i64 + 1)),
            );
        }
    }
    out
}

/// Verify the divided-power expansion of (x + y)^(n) in the free model.
pub fn check_heisenberg_identity(n_max: usize) -> VerificationReport {
    let mut cases = Vec::new();
    for n in 1..=n_max {
        // (x+y)^(n) built by repeated multiplication and division by n!
        let mut lhs = HeisVec::new();
        lhs.insert((0, 0, 0), BigRational::one());
        for step in 1..=n {
            let mut next = heis_mul_x(&lhs);
            for (k, c) in heis_mul_y(&lhs) {
                heis_add(&mut next, k, c);
            }
            let inv = BigRational::from(BigInt::from(step as i64));
            lhs = next.into_iter().map(|(k, c)| (k, c / &inv)).collect();
        }
        // sum over k = n mod 2 of (-z/2)^((n-k)/2) sum_r x^(r) y^(k-r)
        let mut rhs = HeisVec::new();
        let mut k = n % 2;
        while k <= n {
            let j = (n - k) / 2;
            // (-z/2)^(j) = (-1/2)^j z^j / j! = (-1)^j / 2^j * z^(j)
            let mut zc = BigRational::one();
            for _ in 0..j {
                zc = -zc / BigRational::from(BigInt::from(2));
            }
            for r in 0..=k {
                heis_add(&mut rhs, (r, k - r, j), zc.clone());
            }
            k += 2;
        }
        cases.push(CaseReport {
            case: format!("n={n}"),
            assertions: vec![Assertion::check("expansion matches", lhs == rhs, || {
                format!("lhs {lhs:?} rhs {rhs:?}")
            })],
        });
    }
    VerificationReport { suite: "heisenberg".into(), cases, timing_ms: None }
}

/// Multinomial and Vandermonde identities over the requested fields,
/// evaluated on a deterministic grid of integer arguments.
pub fn check_divided_power_identities(n_max: usize, fields: &[FqField]) -> VerificationReport {
    let grid: Vec<Vec<i64>> = vec![
        vec![1, 2, 3],
        vec![0, 4, 1],
        vec![2, 2, 2],
        vec![5, 0, 3],
        vec![3, 7, 2],
    ];
    let mut cases = Vec::new();

    // exact rational divided-power expansion
    for n in 1..=n_max {
        let mut asserts = Vec::new();
        for c in &grid {
            let total: i64 = c.iter().sum();
            let mut lhs = BigRational::from(BigInt::from(total).pow(n as u32));
            lhs /= BigRational::from(factorial_big(n));
            let mut rhs = BigRational::zero();
            for comp in comps3(n) {
                let mut term = BigRational::one();
                for (ci, ni) in c.iter().zip(&comp) {
                    term *= BigRational::from(BigInt::from(*ci).pow(*ni as u32));
                    term /= BigRational::from(factorial_big(*ni));
                }
                rhs += term;
            }
            asserts.push(Assertion::check(
                format!("divided sum split {c:?}"),
                lhs == rhs,
                || format!("{lhs} vs {rhs}"),
            ));
        }
        cases.push(CaseReport { case: format!("rational n={n}"), assertions: asserts });
    }

    for field in fields {
        for n in 1..=n_max {
            let mut asserts = Vec::new();
            for c in &grid {
                // multinomial theorem over the field
                let total: i64 = c.iter().sum();
                let lhs = field.pow(&field.from_i64(total), n as i64);
                let mut rhs = field.zero();
                for comp in comps3(n) {
                    let mut multinom = factorial_big(n);
                    for ni in &comp {
                        let (q, r) =
                            num_integer::Integer::div_rem(&multinom, &factorial_big(*ni));
                        debug_assert!(r.is_zero());
                        multinom = q;
                    }
                    let mut term = field.from_bigint(&multinom);
                    for (ci, ni) in c.iter().zip(&comp) {
                        term = field.mul(&term, &field.pow(&field.from_i64(*ci), *ni as i64));
                    }
                    rhs = field.add(&rhs, &term);
                }
                asserts.push(Assertion::check(
                    format!("multinomial {c:?}"),
                    lhs == rhs,
                    || "multinomial mismatch".into(),
                ));

                // Vandermonde convolution of binomials
                let (x1, x2) = (c[0] + c[1], c[2] + 1);
                let lhs_b = field.from_bigint(&binom_big(x1 + x2, n));
                let mut rhs_b = field.zero();
                for j in 0..=n {
                    let t = field.mul(
                        &field.from_bigint(&binom_big(x1, j)),
                        &field.from_bigint(&binom_big(x2, n - j)),
                    );
                    rhs_b = field.add(&rhs_b, &t);
                }
                asserts.push(Assertion::check(
                    format!("binomial convolution ({x1},{x2})"),
                    lhs_b == rhs_b,
                    || "convolution mismatch".into(),
                ));
            }
            cases.push(CaseReport {
                case: format!("{} n={n}", field.ring_spec()),
                assertions: asserts,
            });
        }
    }
    VerificationReport { suite: "identities".into(), cases, timing_ms: None }
}

fn comps3(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for a in 0..=n {
        for b in 0..=n - a {
            out.push(vec![a, b, n - a - b]);
        }
    }
    out
}

/// Evaluation-formula suite: the eigenvalue series against its closed forms
/// and the exponential route, on twisted evaluation modules.
pub fn evaluation_suite() -> VerificationReport {
    let trunc = 4usize;
    let mut cases = Vec::new();
    for (ty, min_k) in [("A2", 1usize), ("A3", 1)] {
        let tb = twisted_basis_for(DynkinType::parse(ty).unwrap(), AutoKind::Flip).unwrap();
        for p in [5u64, 7] {
            let field = match field_for(&tb, p, min_k) {
                Ok(f) => f,
                Err(e) => {
                    cases.push(CaseReport {
                        case: format!("{ty} flip F{p}"),
                        assertions: vec![Assertion::skip("field", e.to_string())],
                    });
                    continue;
                }
            };
            for a in [2i64, 3] {
                let mut asserts = Vec::new();
                // one fundamental value tuple per folded node
                for i0 in 0..tb.fd.folded.rank() {
                    let mut values = vec![0i64; tb.fd.folded.rank()];
                    values[i0] = 1;
                    let tm = twisted_eval_module(&tb, &field, &values, a, 4);
                    let idx = tm.lm.hv_index();
                    let hw = extend_weight(&tb, &values);

                    // non-twisted series on the underlying evaluation module:
                    // coefficients of (1 - a u)^{hw(h_i)}
                    for i in 0..tb.cb.rs.rank() {
                        let lam = tb.cb.rs.pairing(&hw, i).to_integer();
                        for r in 0..=trunc {
                            let got = tm.lm.lambda_eigen(
                                tb.cb.rs.root_index(&unit_vec(tb.cb.rs.rank(), i)).unwrap(),
                                true,
                                r,
                                idx,
                                1,
                            );
                            let mut expect =
                                field.from_bigint(&binom_big(lam, r));
                            expect = field.mul(&expect, &field.pow(&field.from_i64(a), r as i64));
                            if r % 2 == 1 {
                                expect = field.neg(&expect);
                            }
                            if got != expect {
                                asserts.push(Assertion::fail(
                                    format!("plain series node {i} r {r}"),
                                    "binomial line mismatch".to_string(),
                                ));
                            }
                        }
                    }
                    asserts.push(Assertion::pass(format!("plain series lambda {values:?}")));

                    // twisted closed forms vs the exponential route, both signs
                    for j0 in 0..tb.fd.folded.rank() {
                        let fi = tb
                            .fd
                            .folded
                            .root_index(&unit_vec(tb.fd.folded.rank(), j0))
                            .unwrap();
                        for plus in [true, false] {
                            let series =
                                tm.lambda_sigma_series_exp(j0, plus, trunc, idx).unwrap();
                            let mut ok = true;
                            for (r, got) in series.iter().enumerate() {
                                let closed = tm.lambda_sigma_eigen(fi, plus, r, idx);
                                let evform = crate::loopaction::ev_sigma_lambda(
                                    &tb,
                                    &field,
                                    &(0..tb.cb.rs.num_positive())
                                        .map(|root| {
                                            tb.cb.rs.pairing_coroot(&hw, root).to_integer()
                                        })
                                        .collect::<Vec<_>>(),
                                    &field.from_i64(a),
                                    j0,
                                    r,
                                    plus,
                                );
                                if *got != closed || *got != evform {
                                    ok = false;
                                }
                            }
                            asserts.push(Assertion::check(
                                format!("twisted series lambda {values:?} node {j0} {}", if plus { "+" } else { "-" }),
                                ok,
                                || "series routes disagree".into(),
                            ));
                        }
                    }
                }
                cases.push(CaseReport { case: format!("{ty} flip F{p} a={a}"), assertions: asserts });
            }
        }
    }
    VerificationReport { suite: "evaluation".into(), cases, timing_ms: None }
}

fn unit_vec(n: usize, i: usize) -> Vec<i64> {
    (0..n).map(|j| i64::from(j == i)).collect()
}

/// Build the default field list for identity suites.
pub fn default_fields() -> Vec<FqField> {
    vec![FqField::new(5, 1).unwrap(), FqField::new(7, 1).unwrap(), FqField::new(2, 1).unwrap()]
}

/// Weyl-dimension audit: constructed lattice ranks against the dimension
/// formula and the recursion oracle, over the requested fields.
pub fn weyl_dimension_suite(
    types: &[&str],
    max_height: i64,
    primes: &[u64],
) -> VerificationReport {
    let mut cases = Vec::new();
    for ty in types {
        let cb = chevalley_basis(DynkinType::parse(ty).unwrap());
        let rank = cb.rs.rank();
        let mut tuples = vec![vec![]];
        for _ in 0..rank {
            let mut next = Vec::new();
            for t in &tuples {
                let used: i64 = t.iter().sum();
                for v in 0..=(max_height - used) {
                    let mut tt = t.clone();
                    tt.push(v);
                    next.push(tt);
                }
            }
            tuples = next;
        }
        tuples.retain(|t| t.iter().sum::<i64>() > 0);
        let checks = crate::par::maybe_par_map(&tuples, |coeffs| {
            let hw = weight_from_coeffs(&cb, coeffs);
            let expected = crate::hypermod::weyl_dim(&cb.rs, &hw);
            let lat = crate::hypermod::weyl_lattice(&cb, &hw, None);
            let mut asserts = Vec::new();
            asserts.push(Assertion::check(
                format!("lattice rank = dimension formula ({coeffs:?})"),
                BigInt::from(lat.dim() as u64) == expected,
                || format!("rank {} vs {}", lat.dim(), expected),
            ));
            // character against the recursion oracle
            let mults = crate::hypermod::weight_multiplicities(&cb.rs, &hw);
            let mut ok = true;
            for (wi, (_, size)) in lat.block_ranges.iter().enumerate() {
                let expect = mults.get(&lat.weights[wi]).copied().unwrap_or(0) as usize;
                if *size != expect {
                    ok = false;
                }
            }
            let total: usize = lat.block_ranges.iter().map(|(_, s)| s).sum();
            asserts.push(Assertion::check(
                format!("character matches recursion ({coeffs:?})"),
                ok && BigInt::from(total as u64) == expected,
                || "multiplicity mismatch".into(),
            ));
            // fields: reduction keeps the dimension
            for &p in primes {
                let f = FqField::new(p, 1).unwrap();
                match lat.reduce(f) {
                    Ok(m) => asserts.push(Assertion::check(
                        format!("dim over F{p} ({coeffs:?})"),
                        BigInt::from(m.dim() as u64) == expected,
                        || "reduced dimension changed".into(),
                    )),
                    Err(e) => asserts.push(Assertion::skip(
                        format!("dim over F{p} ({coeffs:?})"),
                        e.to_string(),
                    )),
                }
            }
            asserts
        });
        cases.push(CaseReport {
            case: format!("type {ty}"),
            assertions: checks.into_iter().flatten().collect(),
        });
    }
    VerificationReport { suite: "weyl-dimensions".into(), cases, timing_ms: None }
}

/// Construct the tensor of twisted evaluation modules for a list of factors.
pub fn tensor_twisted(
    tb: &Arc<TwistedBasis>,
    field: &FqField,
    factors: &[(Vec<Rat>, i64)],
    kmax: usize,
) -> TwistedModule<FqField> {
    let mods: Vec<(Arc<Module<FqField>>, crate::coeffring::FqElt)> = factors
        .iter()
        .map(|(hw, a)| {
            let m = build_weyl_module(&tb.cb, hw, field.clone(), Some(kmax))
                .unwrap()
                .simple_quotient();
            (Arc::new(m), field.from_i64(*a))
        })
        .collect();
    let lm = LoopModule::new(field.clone(), mods);
    restrict(lm, tb.clone()).unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn heisenberg_small_orders() {
        let rep = check_heisenberg_identity(4);
        assert!(rep.passed());
        assert_eq!(rep.cases.len(), 4);
    }

    #[test]
    fn identity_suite_passes() {
        let rep = check_divided_power_identities(4, &default_fields());
        assert!(rep.passed());
    }

    #[test]
    fn evaluation_suite_passes() {
        let rep = evaluation_suite();
        assert!(rep.passed(), "{}", serde_json::to_string_pretty(&rep.to_json()).unwrap());
    }

    #[test]
    fn report_json_is_stable() {
        let a = check_heisenberg_identity(3).to_json().to_string();
        let b = check_heisenberg_identity(3).to_json().to_string();
        assert_eq!(a, b);
    }
}
