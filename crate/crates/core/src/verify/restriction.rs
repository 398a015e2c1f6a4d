//! The empirical restriction checker: a twisted dominant l-weight is pushed
//! through standard decomposition to an untwisted l-weight, the matching
//! tensor of simple evaluation modules is restricted, and simplicity plus
//! the recovered Drinfeld polynomial are verified; plus the highest-vector
//! relation battery run on every constructed twisted module.

use super::{field_for, twisted_basis_for, Assertion, AutoKind, CaseReport, VerificationReport};
use crate::chevalley::{Sign, TwistedBasis};
use crate::coeffring::{Field, FqElt, FqField};
use crate::hypermod::build_weyl_module;
use crate::loopaction::{restrict, LoopModule, TwistedModule};
use crate::lweights::{
    extract_drinfeld, fundamental_tw, omega_from_pi, standard_decomposition, LWeight,
};
use crate::rootfold::{DynkinType, RootVec};
use std::sync::Arc;

/// The highest-vector relation battery: integrality of the weight, the
/// divided-power vanishing bounds (with the doubled factor on A_2n short
/// roots), series truncation, and the nonzero top coefficient.
pub fn check_hw_relations(tm: &TwistedModule<FqField>, case: &str) -> CaseReport {
    let f = tm.field().clone();
    let fd = &tm.tb.fd;
    let m = fd.order as i64;
    let idx = tm.lm.hv_index();
    let hv = tm.lm.hv_vec();
    let mut asserts = Vec::new();

    // (a) the weight lands in the admissible lattice
    let g0w = tm.g0_weight(idx);
    let integral = g0w.iter().all(|v| v.is_integer());
    asserts.push(Assertion::check("weight integral on h_{i,0}", integral, || {
        format!("{g0w:?}")
    }));
    if !integral {
        return CaseReport { case: case.into(), assertions: asserts };
    }

    // (b) lowering bounds per folded positive root
    for fi in 0..fd.folded.num_positive() {
        let mu: RootVec = fd.folded.positive_roots[fi].clone();
        let d_mu: i64 = if fd.a2n && fd.short_folded[fi] { 2 } else { 1 };
        let pair = tm.hmu_value(fi, idx);
        let bound_r = pair * crate::rootfold::Rat::from_integer(d_mu);
        assert!(bound_r.is_integer());
        let bound = bound_r.to_integer().max(0);
        let mut ok = true;
        for s in [0i64, 1] {
            for extra in 1..=2i64 {
                let k = (bound + extra) as usize;
                if k > tm.lm.kmax() {
                    continue;
                }
                let img = tm.apply_twisted(&mu, Sign::Minus, m * s, k, &hv).unwrap();
                if img.iter().any(|x| !f.is_zero(x)) {
                    ok = false;
                }
            }
        }
        asserts.push(Assertion::check(
            format!("lowering vanishes beyond {} at mu {:?}", bound, mu),
            ok,
            || "bound violated".into(),
        ));
        // tightness of the doubled factor
        if d_mu == 2 && bound > 0 && (bound as usize) <= tm.lm.kmax() {
            let img = tm.apply_twisted(&mu, Sign::Minus, 0, bound as usize, &hv).unwrap();
            asserts.push(Assertion::check(
                format!("doubled bound attained at mu {:?}", mu),
                img.iter().any(|x| !f.is_zero(x)),
                || "doubled string truncated early".into(),
            ));
        }
    }

    // (c) and (d): series truncation and the nonzero top coefficient
    for i0 in 0..fd.folded.rank() {
        let coords: RootVec = (0..fd.folded.rank()).map(|j| i64::from(j == i0)).collect();
        let fi = fd.folded.root_index(&coords).unwrap();
        let lam = g0w[i0].to_integer().max(0) as usize;
        let mut ok_trunc = true;
        for plus in [true, false] {
            for r in lam + 1..=lam + 2 {
                if !f.is_zero(&tm.lambda_sigma_eigen(fi, plus, r, idx)) {
                    ok_trunc = false;
                }
            }
        }
        asserts.push(Assertion::check(
            format!("series truncates at node {i0}"),
            ok_trunc,
            || "coefficient beyond the weight bound".into(),
        ));
        let mut ok_top = true;
        for plus in [true, false] {
            if f.is_zero(&tm.lambda_sigma_eigen(fi, plus, lam, idx)) {
                ok_top = false;
            }
        }
        asserts.push(Assertion::check(
            format!("top coefficient nonzero at node {i0}"),
            ok_top,
            || "vanishing top coefficient".into(),
        ));
    }

    CaseReport { case: case.into(), assertions: asserts }
}

/// Generator list for simplicity sweeps: every graded lowering/raising
/// divided power with loop exponent inside the window.
fn twisted_generators(
    tm: &TwistedModule<FqField>,
    window: i64,
) -> Vec<(RootVec, Sign, i64, usize)> {
    let fd = &tm.tb.fd;
    let m = fd.order as i64;
    let kcap = tm.lm.kmax();
    let mut gens = Vec::new();
    for eps in 0..fd.order {
        for mu in &fd.eps_weights[eps] {
            if mu.iter().sum::<i64>() <= 0 {
                continue;
            }
            for r in -window..=window {
                if (-r).rem_euclid(m) as usize != eps {
                    continue;
                }
                for k in 1..=kcap {
                    for sign in [Sign::Plus, Sign::Minus] {
                        gens.push((mu.clone(), sign, r, k));
                    }
                }
            }
        }
    }
    gens
}

/// Echelon closure of a seed vector under the twisted generator set.
fn closure_dim(tm: &TwistedModule<FqField>, seed: &[FqElt], window: i64) -> usize {
    let f = tm.field().clone();
    let gens = twisted_generators(tm, window);
    let mut rows: Vec<(usize, Vec<FqElt>)> = Vec::new();
    let insert = |rows: &mut Vec<(usize, Vec<FqElt>)>, mut v: Vec<FqElt>, f: &FqField| -> Option<Vec<FqElt>> {
        for (p, row) in rows.iter() {
            if !f.is_zero(&v[*p]) {
                let c = v[*p];
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
        rows.push((p, v.clone()));
        rows.sort_by_key(|(p, _)| *p);
        Some(v)
    };
    let mut frontier = Vec::new();
    if let Some(r) = insert(&mut rows, seed.to_vec(), &f) {
        frontier.push(r);
    }
    while let Some(v) = frontier.pop() {
        if rows.len() == tm.lm.dim() {
            break;
        }
        for (mu, sign, r, k) in &gens {
            let img = tm.apply_twisted(mu, *sign, *r, *k, &v).unwrap();
            if img.iter().all(|x| f.is_zero(x)) {
                continue;
            }
            if let Some(red) = insert(&mut rows, img, &f) {
                frontier.push(red);
            }
        }
    }
    rows.len()
}

/// Cyclicity from every basis vector under the twisted generators, with the
/// probe window doubling until two consecutive windows agree. Returns the
/// final window and the minimum closure dimension observed.
pub fn window_stable_cyclicity(tm: &TwistedModule<FqField>, start_window: i64) -> (i64, usize) {
    let dim = tm.lm.dim();
    let seeds: Vec<usize> = (0..dim).collect();
    let run = |window: i64| -> usize {
        let dims = crate::par::maybe_par_map(&seeds, |&i| {
            let mut v = tm.lm.zero_vec();
            v[i] = tm.field().one();
            closure_dim(tm, &v, window)
        });
        dims.into_iter().min().unwrap_or(0)
    };
    let mut window = start_window.max(1);
    let mut prev = run(window);
    loop {
        if prev == dim {
            return (window, prev);
        }
        let next_window = window * 2;
        if next_window > 64 {
            return (window, prev);
        }
        let next = run(next_window);
        if next == prev {
            return (next_window, next);
        }
        window = next_window;
        prev = next;
    }
}

/// Specification of a twisted dominant l-weight as a product of fundamental
/// factors (node, point).
#[derive(Debug, Clone)]
pub struct PiSpec {
    pub factors: Vec<(usize, i64)>,
}

impl PiSpec {
    pub fn build(&self, fd: &crate::rootfold::FoldingDatum, field: &FqField) -> Result<LWeight, crate::lweights::LwError> {
        let mut pi = LWeight::one(fd.folded.rank());
        for (i0, a) in &self.factors {
            let af = field.from_i64(*a);
            pi = pi.mul(&fundamental_tw(fd, field, *i0, &af)?, field);
        }
        Ok(pi)
    }
    pub fn name(&self) -> String {
        if self.factors.is_empty() {
            return "1".into();
        }
        self.factors
            .iter()
            .map(|(i, a)| format!("w{}@{}", i + 1, a))
            .collect::<Vec<_>>()
            .join("*")
    }
}

/// The full pipeline for one l-weight: decompose, lift, restrict, and verify
/// simplicity, the recovered polynomial, and the highest-vector relations.
pub fn check_restriction_theorem(
    pi: &LWeight,
    tb: &Arc<TwistedBasis>,
    field: &FqField,
    case: &str,
) -> CaseReport {
    let mut asserts = Vec::new();
    if pi.is_one() {
        // trivial module: nothing to restrict, simplicity is immediate
        asserts.push(Assertion::pass("trivial l-weight gives the trivial module"));
        return CaseReport { case: case.into(), assertions: asserts };
    }
    let sd = match standard_decomposition(pi, &tb.fd, field) {
        Ok(sd) => sd,
        Err(e) => {
            asserts.push(Assertion::fail("standard decomposition", e.to_string()));
            return CaseReport { case: case.into(), assertions: asserts };
        }
    };
    asserts.push(Assertion::pass(format!(
        "standard decomposition reassembles ({} block{})",
        sd.blocks.len(),
        if sd.blocks.len() == 1 { "" } else { "s" }
    )));
    let (_omega, factors) = omega_from_pi(&sd, &tb.fd, field);

    // distinct points (blocks have distinct m-th powers, so points differ);
    // the table bound must reach the doubled lowering bound of the tensor
    // plus the vanishing witnesses
    let kmax = {
        let mut total = vec![crate::rootfold::Rat::from_integer(0); tb.cb.rs.rank()];
        for (mu, _) in &factors {
            total = crate::hypermod::weight_add(&total, mu);
        }
        let mut maxpair = 0i64;
        for r in 0..tb.cb.rs.num_positive() {
            maxpair = maxpair.max(tb.cb.rs.pairing_coroot(&total, r).to_integer());
        }
        let d = if tb.fd.a2n { 2 } else { 1 };
        (d * maxpair + 2).max(2) as usize
    };
    let mods: Vec<(Arc<crate::hypermod::Module<FqField>>, FqElt)> = factors
        .iter()
        .map(|(mu, a)| {
            let m = build_weyl_module(&tb.cb, mu, field.clone(), Some(kmax))
                .unwrap()
                .simple_quotient();
            (Arc::new(m), *a)
        })
        .collect();
    let lm = LoopModule::new(field.clone(), mods);
    let tm = match restrict(lm, tb.clone()) {
        Ok(tm) => tm,
        Err(e) => {
            asserts.push(Assertion::fail("restriction", e.to_string()));
            return CaseReport { case: case.into(), assertions: asserts };
        }
    };

    // (i) simplicity by window-stabilized cyclicity from every basis vector
    let start = (tb.fd.order * sd.blocks.len().max(1)) as i64;
    let (window, min_dim) = window_stable_cyclicity(&tm, start);
    asserts.push(Assertion::check(
        format!("restriction simple (window {window}, dim {})", tm.lm.dim()),
        min_dim == tm.lm.dim(),
        || format!("cyclic closure stalls at {min_dim} of {}", tm.lm.dim()),
    ));

    // (ii) the recovered Drinfeld polynomial
    match extract_drinfeld(&tm, start.max(3)) {
        Ok(got) => {
            let mut expect = pi.clone();
            expect.normalize(field);
            asserts.push(Assertion::check(
                "drinfeld polynomial recovered",
                got == expect,
                || format!("{:?} vs {:?}", got, expect),
            ));
        }
        Err(e) => asserts.push(Assertion::fail("drinfeld polynomial recovered", e.to_string())),
    }

    // (iii) the highest-vector relations
    let hw_rep = check_hw_relations(&tm, case);
    asserts.extend(hw_rep.assertions);

    CaseReport { case: case.into(), assertions: asserts }
}

/// Desk-scale restriction grid over the order-2 foldings.
pub fn restriction_suite(primes: &[u64]) -> VerificationReport {
    let mut jobs: Vec<(String, AutoKind, u64, PiSpec)> = Vec::new();
    for base in ["A2", "A3"] {
        for &p in primes {
            let specs: Vec<PiSpec> = if base == "A2" {
                vec![
                    PiSpec { factors: vec![(0, 2)] },
                    PiSpec { factors: vec![(0, 2), (0, 3)] },
                    PiSpec { factors: vec![(0, 2), (0, 2)] },
                    PiSpec { factors: vec![(0, 2), (0, p as i64 - 2)] },
                ]
            } else {
                vec![
                    PiSpec { factors: vec![(0, 2)] },
                    PiSpec { factors: vec![(1, 2)] },
                    PiSpec { factors: vec![(0, 2), (0, 3)] },
                    PiSpec { factors: vec![(0, 2), (1, 3)] },
                    PiSpec { factors: vec![(0, 2), (0, p as i64 - 2)] },
                    PiSpec { factors: vec![(1, 2), (1, 2)] },
                ]
            };
            for s in specs {
                jobs.push((base.to_string(), AutoKind::Flip, p, s));
            }
        }
    }
    let cases = crate::par::maybe_par_map(&jobs, |(base, auto, p, spec)| {
        let ty = DynkinType::parse(base).unwrap();
        let tb = twisted_basis_for(ty, *auto).unwrap();
        let name = format!("{base} {} F{p} pi={}", auto.name(), spec.name());
        let field = match field_for(&tb, *p, 1) {
            Ok(f) => f,
            Err(e) => {
                return CaseReport {
                    case: name,
                    assertions: vec![Assertion::fail("field", e.to_string())],
                }
            }
        };
        let pi = match spec.build(&tb.fd, &field) {
            Ok(pi) => pi,
            Err(e) => {
                return CaseReport {
                    case: name,
                    assertions: vec![Assertion::fail("l-weight", e.to_string())],
                }
            }
        };
        let name = format!("{name} over {}", field.ring_spec());
        check_restriction_theorem(&pi, &tb, &field, &name)
    });
    VerificationReport { suite: "restriction".into(), cases, timing_ms: None }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::verify::twisted_eval_module;

    #[test]
    fn hw_relations_on_a3_fundamental() {
        let tb = twisted_basis_for(DynkinType::parse("A3").unwrap(), AutoKind::Flip).unwrap();
        let field = field_for(&tb, 7, 1).unwrap();
        let tm = twisted_eval_module(&tb, &field, &[1, 0], 2, 4);
        let rep = check_hw_relations(&tm, "test");
        assert!(rep.passed(), "{rep:?}");
    }

    #[test]
    fn hw_relations_doubled_case() {
        let tb = twisted_basis_for(DynkinType::parse("A2").unwrap(), AutoKind::Flip).unwrap();
        let field = field_for(&tb, 7, 1).unwrap();
        let tm = twisted_eval_module(&tb, &field, &[1], 2, 4);
        let rep = check_hw_relations(&tm, "test");
        assert!(rep.passed(), "{rep:?}");
        assert!(rep
            .assertions
            .iter()
            .any(|a| a.name.contains("doubled bound attained")));
    }

    #[test]
    fn single_block_restriction_a2() {
        let tb = twisted_basis_for(DynkinType::parse("A2").unwrap(), AutoKind::Flip).unwrap();
        let field = field_for(&tb, 5, 1).unwrap();
        let pi = PiSpec { factors: vec![(0, 2)] }.build(&tb.fd, &field).unwrap();
        let rep = check_restriction_theorem(&pi, &tb, &field, "test");
        assert!(rep.passed(), "{}", serde_json::to_string_pretty(&rep).unwrap());
    }

    #[test]
    fn two_block_restriction_a3() {
        let tb = twisted_basis_for(DynkinType::parse("A3").unwrap(), AutoKind::Flip).unwrap();
        let field = field_for(&tb, 7, 1).unwrap();
        let pi = PiSpec { factors: vec![(0, 2), (0, 3)] }
            .build(&tb.fd, &field)
            .unwrap();
        let rep = check_restriction_theorem(&pi, &tb, &field, "test");
        assert!(rep.passed(), "{}", serde_json::to_string_pretty(&rep).unwrap());
    }

    #[test]
    fn trivial_pi() {
        let tb = twisted_basis_for(DynkinType::parse("A2").unwrap(), AutoKind::Flip).unwrap();
        let field = field_for(&tb, 5, 1).unwrap();
        let pi = LWeight::one(1);
        let rep = check_restriction_theorem(&pi, &tb, &field, "test");
        assert!(rep.passed());
    }
}
