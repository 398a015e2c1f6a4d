//! Finite-type root systems, diagram automorphisms, and the folding
//! combinatorics attached to them: orbit structure on positive roots,
//! restriction to the fixed Cartan, and the graded weight sets.

use num_rational::Ratio;
use num_traits::{One, Zero};
use serde_json::{json, Value};
use std::collections::HashMap;
use std::fmt;
use thiserror::Error;

pub type Rat = Ratio<i64>;
pub type RootVec = Vec<i64>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RootError {
    #[error("invalid Dynkin type {0}")]
    InvalidType(String),
    #[error("permutation is not a diagram automorphism: {0}")]
    NotAnAutomorphism(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Series {
    A,
    B,
    C,
    D,
    E,
    F,
    G,
}

impl fmt::Display for Series {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = match self {
            Series::A => 'A',
            Series::B => 'B',
            Series::C => 'C',
            Series::D => 'D',
            Series::E => 'E',
            Series::F => 'F',
            Series::G => 'G',
        };
        write!(f, "{c}")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct DynkinType {
    pub series: Series,
    pub rank: usize,
}

impl fmt::Display for DynkinType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.series, self.rank)
    }
}

impl DynkinType {
    pub fn new(series: Series, rank: usize) -> Result<Self, RootError> {
        let ok = match series {
            Series::A => rank >= 1,
            Series::B | Series::C => rank >= 2,
            Series::D => rank >= 4,
            Series::E => (6..=8).contains(&rank),
            Series::F => rank == 4,
            Series::G => rank == 2,
        };
        if ok {
            Ok(DynkinType { series, rank })
        } else {
            Err(RootError::InvalidType(format!("{series}{rank}")))
        }
    }

    pub fn parse(s: &str) -> Result<Self, RootError> {
        let s = s.trim();
        let mut chars = s.chars();
        let series = match chars.next().map(|c| c.to_ascii_uppercase()) {
            Some('A') => Series::A,
            Some('B') => Series::B,
            Some('C') => Series::C,
            Some('D') => Series::D,
            Some('E') => Series::E,
            Some('F') => Series::F,
            Some('G') => Series::G,
            _ => return Err(RootError::InvalidType(s.to_string())),
        };
        let rank: usize = chars
            .as_str()
            .parse()
            .map_err(|_| RootError::InvalidType(s.to_string()))?;
        DynkinType::new(series, rank)
    }

    /// Dimension of the simple Lie algebra, from the classical tables.
    pub fn algebra_dim(&self) -> usize {
        let n = self.rank;
        match self.series {
            Series::A => n * (n + 2),
            Series::B | Series::C => n * (2 * n + 1),
            Series::D => n * (2 * n - 1),
            Series::E => match n {
                6 => 78,
                7 => 133,
                _ => 248,
            },
            Series::F => 52,
            Series::G => 14,
        }
    }
}

/// Cartan matrix with the convention `cartan[i][j] = <alpha_j, alpha_i^vee>`,
/// so a weight `mu` (coordinates over simple roots) pairs with the coroot
/// `h_i` as `sum_j mu_j * cartan[i][j]`.
fn cartan_matrix(ty: DynkinType) -> Vec<Vec<i64>> {
    let n = ty.rank;
    let mut a = vec![vec![0i64; n]; n];
    for (i, row) in a.iter_mut().enumerate() {
        row[i] = 2;
    }
    let bond = |a: &mut Vec<Vec<i64>>, i: usize, j: usize| {
        a[i][j] = -1;
        a[j][i] = -1;
    };
    match ty.series {
        Series::A => {
            for i in 0..n - 1 {
                bond(&mut a, i, i + 1);
            }
        }
        Series::B => {
            for i in 0..n - 1 {
                bond(&mut a, i, i + 1);
            }
            // alpha_{n-1} long, alpha_n short
            a[n - 2][n - 1] = -1;
            a[n - 1][n - 2] = -2;
        }
        Series::C => {
            for i in 0..n - 1 {
                bond(&mut a, i, i + 1);
            }
            a[n - 2][n - 1] = -2;
            a[n - 1][n - 2] = -1;
        }
        Series::D => {
            for i in 0..n - 2 {
                bond(&mut a, i, i + 1);
            }
            bond(&mut a, n - 3, n - 1);
        }
        Series::E => {
            // Bourbaki: chain 1-3-4-5-6(-7-8), node 2 hangs off node 4.
            let chain: Vec<usize> = std::iter::once(0).chain(2..n).collect();
            for w in chain.windows(2) {
                bond(&mut a, w[0], w[1]);
            }
            bond(&mut a, 1, 3);
        }
        Series::F => {
            bond(&mut a, 0, 1);
            bond(&mut a, 2, 3);
            a[1][2] = -1;
            a[2][1] = -2;
        }
        Series::G => {
            // alpha_1 short, alpha_2 long
            a[0][1] = -3;
            a[1][0] = -1;
        }
    }
    a
}

#[derive(Debug, Clone)]
pub struct RootSystem {
    pub dynkin_type: DynkinType,
    pub cartan: Vec<Vec<i64>>,
    /// Squared lengths of the simple roots (shortest normalized to 2).
    pub norm2: Vec<Rat>,
    /// Positive roots as integer coordinate vectors over the simple roots,
    /// in height-then-lex order. The first `rank` entries are the simple
    /// roots themselves.
    pub positive_roots: Vec<RootVec>,
    /// Index of the highest root in `positive_roots`.
    pub highest_root: usize,
    /// Fundamental weights as rational coordinate vectors over simple roots.
    pub fundamental_weights: Vec<Vec<Rat>>,
    index: HashMap<RootVec, usize>,
}

impl RootSystem {
    pub fn rank(&self) -> usize {
        self.dynkin_type.rank
    }

    pub fn num_positive(&self) -> usize {
        self.positive_roots.len()
    }

    pub fn root_index(&self, coords: &[i64]) -> Option<usize> {
        self.index.get(coords).copied()
    }

    pub fn height(&self, idx: usize) -> i64 {
        self.positive_roots[idx].iter().sum()
    }

    /// `<mu, alpha_i^vee>` for a weight in simple-root coordinates.
    pub fn pairing(&self, mu: &[Rat], i: usize) -> Rat {
        mu.iter()
            .zip(&self.cartan[i])
            .map(|(c, a)| *c * Rat::from_integer(*a))
            .sum()
    }

    pub fn root_pairing(&self, root: usize, i: usize) -> i64 {
        let v: i64 = self.positive_roots[root]
            .iter()
            .zip(&self.cartan[i])
            .map(|(c, a)| c * a)
            .sum();
        v
    }

    /// Squared length of a root.
    pub fn root_norm2(&self, root: usize) -> Rat {
        let c = &self.positive_roots[root];
        self.inner_coords(
            &c.iter().map(|&x| Rat::from_integer(x)).collect::<Vec<_>>(),
            &c.iter().map(|&x| Rat::from_integer(x)).collect::<Vec<_>>(),
        )
    }

    /// Invariant inner product of two weights in simple-root coordinates.
    pub fn inner_coords(&self, mu: &[Rat], nu: &[Rat]) -> Rat {
        // (alpha_i, alpha_j) = cartan[i][j] * norm2_i / 2
        let mut acc = Rat::zero();
        for i in 0..self.rank() {
            for j in 0..self.rank() {
                let g = Rat::from_integer(self.cartan[i][j]) * self.norm2[i]
                    / Rat::from_integer(2);
                acc += mu[i] * nu[j] * g;
            }
        }
        acc
    }

    /// Coroot of a positive root over the simple coroots (integer vector).
    pub fn coroot_coords(&self, root: usize) -> Vec<i64> {
        let nb = self.root_norm2(root);
        self.positive_roots[root]
            .iter()
            .enumerate()
            .map(|(i, &c)| {
                let v = Rat::from_integer(c) * self.norm2[i] / nb;
                assert!(v.is_integer(), "coroot coordinates must be integral");
                v.to_integer()
            })
            .collect()
    }

    /// `<mu, beta^vee>` for a positive root `beta` given by index.
    pub fn pairing_coroot(&self, mu: &[Rat], root: usize) -> Rat {
        self.coroot_coords(root)
            .iter()
            .enumerate()
            .map(|(i, &cv)| Rat::from_integer(cv) * self.pairing_fw(mu, i))
            .sum()
    }

    // <mu, alpha_i^vee> again, kept separate for clarity at call sites.
    fn pairing_fw(&self, mu: &[Rat], i: usize) -> Rat {
        self.pairing(mu, i)
    }

    pub fn simple_reflection(&self, mu: &[Rat], i: usize) -> Vec<Rat> {
        let k = self.pairing(mu, i);
        let mut out = mu.to_vec();
        out[i] -= k;
        out
    }

    /// Full Weyl orbit of a weight, by closure under simple reflections.
    pub fn weyl_orbit(&self, mu: &[Rat]) -> Vec<Vec<Rat>> {
        let mut seen: Vec<Vec<Rat>> = vec![mu.to_vec()];
        let mut frontier = vec![mu.to_vec()];
        while let Some(w) = frontier.pop() {
            for i in 0..self.rank() {
                let r = self.simple_reflection(&w, i);
                if !seen.contains(&r) {
                    seen.push(r.clone());
                    frontier.push(r);
                }
            }
        }
        seen.sort();
        seen
    }

    /// Dominant representative of the Weyl orbit of `mu`.
    pub fn dominant_rep(&self, mu: &[Rat]) -> Vec<Rat> {
        let mut w = mu.to_vec();
        'outer: loop {
            for i in 0..self.rank() {
                if self.pairing(&w, i) < Rat::zero() {
                    w = self.simple_reflection(&w, i);
                    continue 'outer;
                }
            }
            return w;
        }
    }

    pub fn to_json(&self) -> Value {
        json!({
            "type": self.dynkin_type.to_string(),
            "rank": self.rank(),
            "cartan_matrix": self.cartan,
            "positive_roots": self.positive_roots,
            "highest_root": self.positive_roots[self.highest_root],
            "fundamental_weights": self.fundamental_weights.iter()
                .map(|fw| fw.iter().map(rat_string).collect::<Vec<_>>())
                .collect::<Vec<_>>(),
        })
    }
}

pub fn rat_string(r: &Rat) -> String {
    if r.denom().is_one() {
        format!("{}", r.numer())
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Build the root system of a valid finite type. Positive roots are
/// enumerated by closing the simple roots under all simple reflections.
pub fn build_root_system(ty: DynkinType) -> RootSystem {
    let n = ty.rank;
    let cartan = cartan_matrix(ty);

    // Squared lengths, propagated along bonds with the shortest root at 2.
    let mut norm2 = vec![Rat::zero(); n];
    norm2[0] = Rat::from_integer(2);
    let mut todo = vec![0usize];
    let mut done = vec![false; n];
    done[0] = true;
    while let Some(i) = todo.pop() {
        for j in 0..n {
            if i != j && cartan[i][j] != 0 && !done[j] {
                // norm_j / norm_i = a_ij / a_ji
                norm2[j] = norm2[i] * Rat::new(cartan[i][j], cartan[j][i]);
                done[j] = true;
                todo.push(j);
            }
        }
    }
    let min = norm2.iter().cloned().fold(norm2[0], |a, b| a.min(b));
    for v in norm2.iter_mut() {
        *v = *v * Rat::from_integer(2) / min;
    }

    // Reflection closure over all roots (positive and negative).
    let mut all: Vec<RootVec> = Vec::new();
    let mut seen: HashMap<RootVec, ()> = HashMap::new();
    for i in 0..n {
        let mut e = vec![0i64; n];
        e[i] = 1;
        seen.insert(e.clone(), ());
        all.push(e);
    }
    let mut frontier: Vec<RootVec> = all.clone();
    while let Some(b) = frontier.pop() {
        for i in 0..n {
            let k: i64 = b.iter().zip(&cartan[i]).map(|(c, a)| c * a).sum();
            let mut r = b.clone();
            r[i] -= k;
            if r.iter().all(|&c| c == 0) {
                continue;
            }
            if seen.insert(r.clone(), ()).is_none() {
                all.push(r.clone());
                frontier.push(r);
            }
        }
    }
    let mut positive: Vec<RootVec> = all
        .iter()
        .filter(|r| r.iter().all(|&c| c >= 0))
        .cloned()
        .collect();
    positive.sort_by_key(|r| (r.iter().sum::<i64>(), r.clone()));
    assert_eq!(2 * positive.len(), all.len(), "roots must split into +/-");

    let index: HashMap<RootVec, usize> = positive
        .iter()
        .enumerate()
        .map(|(i, r)| (r.clone(), i))
        .collect();
    let highest_root = positive.len() - 1;

    // Fundamental weights: columns of the inverse Cartan matrix.
    let fundamental_weights = invert_cartan(&cartan);

    RootSystem {
        dynkin_type: ty,
        cartan,
        norm2,
        positive_roots: positive,
        highest_root,
        fundamental_weights,
        index,
    }
}

fn invert_cartan(a: &[Vec<i64>]) -> Vec<Vec<Rat>> {
    let n = a.len();
    let mut m: Vec<Vec<Rat>> = (0..n)
        .map(|i| {
            (0..2 * n)
                .map(|j| {
                    if j < n {
                        Rat::from_integer(a[i][j])
                    } else if j - n == i {
                        Rat::one()
                    } else {
                        Rat::zero()
                    }
                })
                .collect()
        })
        .collect();
    for col in 0..n {
        let piv = (col..n).find(|&r| !m[r][col].is_zero()).expect("singular");
        m.swap(col, piv);
        let p = m[col][col];
        for j in 0..2 * n {
            m[col][j] /= p;
        }
        for r in 0..n {
            if r != col && !m[r][col].is_zero() {
                let f = m[r][col];
                for j in 0..2 * n {
                    let s = m[col][j];
                    m[r][j] -= f * s;
                }
            }
        }
    }
    // omega_i solves cartan * c = e_i, i.e. column i of the inverse.
    (0..n)
        .map(|i| (0..n).map(|j| m[j][n + i]).collect())
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiagramAutomorphism {
    pub perm: Vec<usize>,
    pub order: usize,
}

impl DiagramAutomorphism {
    pub fn new(rs: &RootSystem, perm: Vec<usize>) -> Result<Self, RootError> {
        let n = rs.rank();
        if perm.len() != n {
            return Err(RootError::NotAnAutomorphism("wrong length".into()));
        }
        let mut hit = vec![false; n];
        for &p in &perm {
            if p >= n || hit[p] {
                return Err(RootError::NotAnAutomorphism("not a permutation".into()));
            }
            hit[p] = true;
        }
        for i in 0..n {
            for j in 0..n {
                if rs.cartan[perm[i]][perm[j]] != rs.cartan[i][j] {
                    return Err(RootError::NotAnAutomorphism(format!(
                        "Cartan entry ({i},{j}) not preserved"
                    )));
                }
            }
        }
        let mut order = 1usize;
        let mut cur = perm.clone();
        while cur.iter().enumerate().any(|(i, &p)| p != i) {
            cur = cur.iter().map(|&i| perm[i]).collect();
            order += 1;
            if order > n + 1 {
                return Err(RootError::NotAnAutomorphism("order overflow".into()));
            }
        }
        if order > 3 {
            return Err(RootError::NotAnAutomorphism(format!(
                "order {order} not in {{1,2,3}}"
            )));
        }
        Ok(DiagramAutomorphism { perm, order })
    }

    pub fn identity(rs: &RootSystem) -> Self {
        DiagramAutomorphism {
            perm: (0..rs.rank()).collect(),
            order: 1,
        }
    }

    /// The unique nontrivial diagram flip (types A_n n>=2, D_n, E_6).
    pub fn flip(rs: &RootSystem) -> Result<Self, RootError> {
        let n = rs.rank();
        let perm: Vec<usize> = match rs.dynkin_type.series {
            Series::A if n >= 2 => (0..n).map(|i| n - 1 - i).collect(),
            Series::D => {
                let mut p: Vec<usize> = (0..n).collect();
                p.swap(n - 2, n - 1);
                p
            }
            Series::E if n == 6 => vec![5, 1, 4, 3, 2, 0],
            _ => {
                return Err(RootError::NotAnAutomorphism(format!(
                    "no flip for {}",
                    rs.dynkin_type
                )))
            }
        };
        DiagramAutomorphism::new(rs, perm)
    }

    /// Triality of D_4: 3-cycle on the outer nodes.
    pub fn triality(rs: &RootSystem) -> Result<Self, RootError> {
        if rs.dynkin_type != (DynkinType { series: Series::D, rank: 4 }) {
            return Err(RootError::NotAnAutomorphism(
                "triality only exists for D4".into(),
            ));
        }
        DiagramAutomorphism::new(rs, vec![2, 1, 3, 0])
    }

    pub fn apply_root(&self, coords: &[i64]) -> RootVec {
        let mut out = vec![0i64; coords.len()];
        for (i, &c) in coords.iter().enumerate() {
            out[self.perm[i]] = c;
        }
        out
    }

    pub fn apply_weight(&self, coords: &[Rat]) -> Vec<Rat> {
        let mut out = vec![Rat::zero(); coords.len()];
        for (i, &c) in coords.iter().enumerate() {
            out[self.perm[i]] = c;
        }
        out
    }
}

/// Where a positive root lands under restriction to the fixed Cartan.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Restricted {
    /// Index into `folded.positive_roots`.
    R0(usize),
    /// Twice a short folded root (type A_2n, sigma-fixed roots only);
    /// the payload indexes the halved root in `folded.positive_roots`.
    TwoRs(usize),
}

#[derive(Debug, Clone)]
pub struct FoldingDatum {
    pub base: RootSystem,
    pub sigma: DiagramAutomorphism,
    /// Order m of sigma.
    pub order: usize,
    /// Node orbits in I_0 order (folded Bourbaki numbering).
    pub node_orbits: Vec<Vec<usize>>,
    /// Representative node per I_0 index (alpha_{o(i)} lies in O).
    pub o_map: Vec<usize>,
    pub folded: RootSystem,
    /// Orbits of sigma on R^+: lists of root indices in sigma-cycle order
    /// starting from the representative.
    pub orbits: Vec<Vec<usize>>,
    /// R^+ index -> orbit id.
    pub root_orbit: Vec<usize>,
    /// Orbit id -> representative root index (the set O).
    pub orbit_reps: Vec<usize>,
    /// R^+ index -> restriction to the fixed Cartan.
    pub restriction: Vec<Restricted>,
    /// Folded positive root -> lies in R_s.
    pub short_folded: Vec<bool>,
    /// For each eps in 0..m, the set wt(g_eps)\{0} as coordinate vectors over
    /// the folded simple roots (both signs), sorted.
    pub eps_weights: Vec<Vec<RootVec>>,
    /// Base type is A_{2n} with the flip (the doubled-root case).
    pub a2n: bool,
}

impl FoldingDatum {
    pub fn gamma(&self, root: usize) -> usize {
        self.orbits[self.root_orbit[root]].len()
    }

    /// Coordinates of `alpha|_{h_0}` over the folded simple roots.
    pub fn restricted_coords(&self, root: usize) -> RootVec {
        let c = &self.base.positive_roots[root];
        self.node_orbits
            .iter()
            .map(|orb| orb.iter().map(|&l| c[l]).sum())
            .collect()
    }

    /// `mu(h_{i,0})` for a base weight in simple-root coordinates;
    /// `h_{i,0} = sum of h_l over the node orbit of i` in every case.
    pub fn pairing_h0(&self, mu: &[Rat], i0: usize) -> Rat {
        self.node_orbits[i0]
            .iter()
            .map(|&l| self.base.pairing(mu, l))
            .sum()
    }

    /// Pairing of a folded weight (values on h_{i,0}) with the coroot
    /// `h_{mu,0}` of a folded positive root. The A_2n short normalization
    /// (h halved against hbar) is already built into the stored values.
    pub fn folded_is_short(&self, folded_root: usize) -> bool {
        self.short_folded[folded_root]
    }

    pub fn to_json(&self) -> Value {
        let restr: Vec<Value> = (0..self.base.num_positive())
            .map(|r| match self.restriction[r] {
                Restricted::R0(k) => json!({
                    "root": self.base.positive_roots[r],
                    "restriction": self.folded.positive_roots[k],
                    "doubled": false,
                }),
                Restricted::TwoRs(k) => json!({
                    "root": self.base.positive_roots[r],
                    "restriction": self.folded.positive_roots[k]
                        .iter().map(|c| 2 * c).collect::<Vec<_>>(),
                    "doubled": true,
                }),
            })
            .collect();
        json!({
            "base": self.base.to_json(),
            "sigma": self.sigma.perm,
            "order": self.order,
            "folded_type": self.folded.dynkin_type.to_string(),
            "node_orbits": self.node_orbits,
            "o_map": self.o_map,
            "orbit_representatives": self.orbit_reps.iter()
                .map(|&r| self.base.positive_roots[r].clone()).collect::<Vec<_>>(),
            "gamma": (0..self.base.num_positive())
                .map(|r| self.gamma(r)).collect::<Vec<_>>(),
            "restriction_map": restr,
            "short_folded_roots": self.folded.positive_roots.iter().enumerate()
                .filter(|(i, _)| self.short_folded[*i])
                .map(|(_, r)| r.clone()).collect::<Vec<_>>(),
            "eps_weights": self.eps_weights,
        })
    }
}

fn folded_type(base: DynkinType, m: usize) -> DynkinType {
    use Series::*;
    let n = base.rank;
    let ty = match (base.series, n, m) {
        (_, _, 1) => base,
        (A, 2, 2) => DynkinType { series: A, rank: 1 },
        (A, r, 2) if r % 2 == 0 => DynkinType { series: B, rank: r / 2 },
        (A, r, 2) => DynkinType { series: C, rank: (r + 1) / 2 },
        (D, r, 2) => DynkinType { series: B, rank: r - 1 },
        (E, 6, 2) => DynkinType { series: F, rank: 4 },
        (D, 4, 3) => DynkinType { series: G, rank: 2 },
        _ => panic!("unsupported folding ({base}, m={m})"),
    };
    ty
}

/// Fold a root system along a diagram automorphism.
pub fn fold(rs: &RootSystem, sigma: &DiagramAutomorphism) -> Result<FoldingDatum, RootError> {
    // Re-validate so foreign permutations fail here.
    let sigma = DiagramAutomorphism::new(rs, sigma.perm.clone())?;
    let m = sigma.order;
    let n = rs.rank();
    let a2n = m == 2 && rs.dynkin_type.series == Series::A && n % 2 == 0;

    // Node orbits in I_0 order: by minimal element, except E6 -> F4 where
    // Bourbaki numbering of F4 dictates [fixed 2, fixed 4, orbit {3,5},
    // orbit {1,6}] (1-indexed).
    let mut node_orbits: Vec<Vec<usize>> = Vec::new();
    let mut assigned = vec![false; n];
    for i in 0..n {
        if assigned[i] {
            continue;
        }
        let mut orb = vec![i];
        assigned[i] = true;
        let mut j = sigma.perm[i];
        while j != i {
            assigned[j] = true;
            orb.push(j);
            j = sigma.perm[j];
        }
        orb.sort();
        node_orbits.push(orb);
    }
    node_orbits.sort_by_key(|o| o[0]);
    if rs.dynkin_type == (DynkinType { series: Series::E, rank: 6 }) && m == 2 {
        node_orbits = vec![vec![1], vec![3], vec![2, 4], vec![0, 5]];
    }

    let fty = folded_type(rs.dynkin_type, m);
    let folded = if m == 1 {
        rs.clone()
    } else {
        build_root_system(fty)
    };

    // Verify the folded Cartan matrix against the restriction pairing.
    // The Chevalley coroot of folded node i is c_i * sum_{l in orbit} h_l,
    // where c_i = 2 exactly for the A_2n adjacent orbit pair.
    for (i, orb_i) in node_orbits.iter().enumerate() {
        let heis = a2n
            && orb_i.len() == 2
            && rs.cartan[orb_i[0]][orb_i[1]] != 0;
        let c_i: i64 = if heis { 2 } else { 1 };
        for (j, orb_j) in node_orbits.iter().enumerate() {
            let rep_j = orb_j[0];
            let mut val = 0i64;
            for &l in orb_i {
                val += rs.cartan[l][rep_j];
            }
            let got = c_i * val;
            assert_eq!(
                got, folded.cartan[i][j],
                "folded Cartan mismatch at ({i},{j}) for {} m={m}",
                rs.dynkin_type
            );
        }
    }

    // Root orbits of sigma on R^+.
    let nroots = rs.num_positive();
    let mut root_orbit = vec![usize::MAX; nroots];
    let mut orbits: Vec<Vec<usize>> = Vec::new();
    for r in 0..nroots {
        if root_orbit[r] != usize::MAX {
            continue;
        }
        let id = orbits.len();
        let mut cyc = vec![r];
        root_orbit[r] = id;
        let mut cur = sigma.apply_root(&rs.positive_roots[r]);
        loop {
            let idx = rs.root_index(&cur).expect("sigma permutes R^+");
            if idx == r {
                break;
            }
            root_orbit[idx] = id;
            cyc.push(idx);
            cur = sigma.apply_root(&cur);
        }
        orbits.push(cyc);
    }

    // Representatives. m=2: first root in the global order (the A_2n sign
    // normalization may still swap Heisenberg pairs during twisted-basis
    // construction). m=3: the explicit transversal built from the first
    // non-fixed node.
    let mut orbit_reps: Vec<usize> = orbits.iter().map(|c| *c.iter().min().unwrap()).collect();
    if m == 3 {
        let fixed_node = (0..n).find(|&i| sigma.perm[i] == i).expect("D4 center");
        let moving = (0..n).find(|&i| sigma.perm[i] != i).expect("outer node");
        let mut special: Vec<RootVec> = Vec::new();
        // alpha_i
        let mut v = vec![0i64; n];
        v[moving] = 1;
        special.push(v.clone());
        // alpha_j + alpha_i
        v[fixed_node] = 1;
        special.push(v.clone());
        // alpha_j + sigma(alpha_i) + sigma^2(alpha_i)
        let mut w = vec![0i64; n];
        w[fixed_node] = 1;
        w[sigma.perm[moving]] = 1;
        w[sigma.perm[sigma.perm[moving]]] = 1;
        special.push(w);
        for coords in special {
            let idx = rs.root_index(&coords).expect("special rep is a root");
            orbit_reps[root_orbit[idx]] = idx;
        }
    }
    // Re-root each cycle at its representative.
    for (id, cyc) in orbits.iter_mut().enumerate() {
        let rep = orbit_reps[id];
        let pos = cyc.iter().position(|&r| r == rep).unwrap();
        cyc.rotate_left(pos);
    }

    // Restriction map: orbit-sum coordinates over node orbits.
    let restricted = |r: usize| -> RootVec {
        let c = &rs.positive_roots[r];
        node_orbits
            .iter()
            .map(|orb| orb.iter().map(|&l| c[l]).sum())
            .collect()
    };
    let mut restriction = Vec::with_capacity(nroots);
    for r in 0..nroots {
        let rc = restricted(r);
        let fixed = orbits[root_orbit[r]].len() == 1;
        if a2n && fixed {
            let half: RootVec = rc.iter().map(|&c| c / 2).collect();
            assert!(rc.iter().all(|&c| c % 2 == 0), "fixed A_2n root must double");
            let k = folded.root_index(&half).expect("halved root in R_0");
            restriction.push(Restricted::TwoRs(k));
        } else {
            let k = folded
                .root_index(&rc)
                .unwrap_or_else(|| panic!("restriction {rc:?} not in folded R^+"));
            restriction.push(Restricted::R0(k));
        }
    }

    // Short roots of the folded system (by length); for a simply-laced folded
    // system every root counts as long unless the base is A_2n, whose folded
    // A_1 root doubles and is short.
    let min_norm = folded
        .positive_roots
        .iter()
        .enumerate()
        .map(|(i, _)| folded.root_norm2(i))
        .fold(None::<Rat>, |acc, v| Some(acc.map_or(v, |a| a.min(v))))
        .unwrap();
    let max_norm = (0..folded.num_positive())
        .map(|i| folded.root_norm2(i))
        .fold(min_norm, |a, v| a.max(v));
    let simply_laced_folded = min_norm == max_norm;
    let short_folded: Vec<bool> = (0..folded.num_positive())
        .map(|i| {
            if m == 1 {
                false
            } else if simply_laced_folded {
                // only A_2 -> A_1 reaches here among m>1 foldings
                a2n
            } else {
                folded.root_norm2(i) == min_norm
            }
        })
        .collect();

    // Cross-check: in type A_2n, short restricted roots are exactly the
    // restrictions of Heisenberg pairs (alpha + sigma(alpha) a root).
    if a2n {
        for r in 0..nroots {
            if let Restricted::R0(k) = restriction[r] {
                let img = sigma.apply_root(&rs.positive_roots[r]);
                let sum: RootVec = rs.positive_roots[r]
                    .iter()
                    .zip(&img)
                    .map(|(a, b)| a + b)
                    .collect();
                let heis = rs.root_index(&sum).is_some();
                assert_eq!(
                    heis, short_folded[k],
                    "A_2n short/Heisenberg classification out of sync"
                );
            }
        }
    }

    // wt(g_eps) \ {0}: restrictions of roots whose eps-component is nonzero.
    let mut eps_weights: Vec<Vec<RootVec>> = vec![Vec::new(); m];
    for r in 0..nroots {
        let fixed = orbits[root_orbit[r]].len() == 1;
        let rc = restricted(r);
        for (eps, bucket) in eps_weights.iter_mut().enumerate() {
            let nonzero = if !fixed {
                true
            } else if a2n {
                eps == 1
            } else {
                eps == 0
            };
            if nonzero {
                let neg: RootVec = rc.iter().map(|&c| -c).collect();
                if !bucket.contains(&rc) {
                    bucket.push(rc.clone());
                }
                if !bucket.contains(&neg) {
                    bucket.push(neg);
                }
            }
        }
    }
    for bucket in eps_weights.iter_mut() {
        bucket.sort();
    }

    // o(i): the node whose simple root is the chosen representative of its
    // sigma-orbit on R^+.
    let o_map: Vec<usize> = node_orbits
        .iter()
        .map(|orb| {
            let mut e = vec![0i64; n];
            e[orb[0]] = 1;
            let simple_idx = rs.root_index(&e).unwrap();
            let rep_root = orbit_reps[root_orbit[simple_idx]];
            let coords = &rs.positive_roots[rep_root];
            debug_assert_eq!(rs.height(rep_root), 1);
            (0..n).find(|&i| coords[i] == 1).unwrap()
        })
        .collect();

    Ok(FoldingDatum {
        base: rs.clone(),
        sigma,
        order: m,
        node_orbits,
        o_map,
        folded,
        orbits,
        root_orbit,
        orbit_reps,
        restriction,
        short_folded,
        eps_weights,
        a2n,
    })
}

/// Orbit size Gamma_alpha of a positive root.
pub fn orbit_size(fd: &FoldingDatum, root: usize) -> usize {
    fd.gamma(root)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rs(s: &str) -> RootSystem {
        build_root_system(DynkinType::parse(s).unwrap())
    }

    #[test]
    fn rank_one_roots() {
        let r = rs("A1");
        assert_eq!(r.num_positive(), 1);
        assert_eq!(r.positive_roots[r.highest_root], vec![1]);
    }

    #[test]
    fn positive_root_counts_match_dimension_table() {
        for s in ["A1", "A2", "A3", "A4", "A5", "B2", "B3", "C3", "D4", "D5", "E6", "F4", "G2"] {
            let r = rs(s);
            let dim = r.dynkin_type.algebra_dim();
            assert_eq!(2 * r.num_positive() + r.rank(), dim, "type {s}");
        }
    }

    #[test]
    fn g2_has_twelve_roots() {
        assert_eq!(2 * rs("G2").num_positive(), 12);
    }

    #[test]
    fn d4_highest_root() {
        let r = rs("D4");
        assert_eq!(r.num_positive(), 12);
        assert_eq!(r.positive_roots[r.highest_root], vec![1, 2, 1, 1]);
    }

    #[test]
    fn invalid_types_rejected() {
        assert!(DynkinType::parse("E9").is_err());
        assert!(DynkinType::parse("F5").is_err());
        assert!(DynkinType::parse("D3").is_err());
        assert!(DynkinType::parse("H4").is_err());
    }

    #[test]
    fn cartan_symmetry_of_zeros() {
        for s in ["A3", "B3", "C3", "D4", "E6", "F4", "G2"] {
            let r = rs(s);
            for i in 0..r.rank() {
                for j in 0..r.rank() {
                    assert_eq!(r.cartan[i][j] == 0, r.cartan[j][i] == 0);
                    if i == j {
                        assert_eq!(r.cartan[i][j], 2);
                    } else {
                        assert!((-3..=0).contains(&r.cartan[i][j]));
                    }
                }
            }
        }
    }

    #[test]
    fn weyl_orbit_sl2() {
        let r = rs("A1");
        // mu = 3*omega_1 = (3/2) alpha_1
        let mu = vec![Rat::new(3, 2)];
        let orbit = r.weyl_orbit(&mu);
        assert_eq!(orbit.len(), 2);
        assert!(orbit.contains(&vec![Rat::new(-3, 2)]));
    }

    #[test]
    fn weyl_orbit_a2_fundamental() {
        let r = rs("A2");
        let mu = r.fundamental_weights[0].clone();
        assert_eq!(r.weyl_orbit(&mu).len(), 3);
    }

    #[test]
    fn weyl_orbit_zero() {
        let r = rs("D4");
        let mu = vec![Rat::zero(); 4];
        assert_eq!(r.weyl_orbit(&mu).len(), 1);
    }

    #[test]
    fn fold_a2_row() {
        let r = rs("A2");
        let f = fold(&r, &DiagramAutomorphism::flip(&r).unwrap()).unwrap();
        assert_eq!(f.order, 2);
        assert_eq!(f.folded.dynkin_type, DynkinType::parse("A1").unwrap());
        // wt(g_1)\{0} = +-R_0 and +-2 R_s = {+-1, +-2}
        assert_eq!(f.eps_weights[1], vec![vec![-2], vec![-1], vec![1], vec![2]]);
        // theta is fixed, the simple roots form one orbit
        assert_eq!(f.gamma(0), 2);
        assert_eq!(f.gamma(2), 1);
    }

    #[test]
    fn fold_a5_row() {
        let r = rs("A5");
        let f = fold(&r, &DiagramAutomorphism::flip(&r).unwrap()).unwrap();
        assert_eq!(f.folded.dynkin_type, DynkinType::parse("C3").unwrap());
        // wt(g_1)\{0} = +-R_s
        let shorts: Vec<RootVec> = f
            .folded
            .positive_roots
            .iter()
            .enumerate()
            .filter(|(i, _)| f.short_folded[*i])
            .flat_map(|(_, c)| {
                vec![c.clone(), c.iter().map(|&x| -x).collect::<Vec<_>>()]
            })
            .collect();
        let mut shorts = shorts;
        shorts.sort();
        assert_eq!(f.eps_weights[1], shorts);
    }

    #[test]
    fn fold_d4_triality_row() {
        let r = rs("D4");
        let f = fold(&r, &DiagramAutomorphism::triality(&r).unwrap()).unwrap();
        assert_eq!(f.order, 3);
        assert_eq!(f.folded.dynkin_type, DynkinType::parse("G2").unwrap());
        // the representative transversal contains the three fixed roots
        let fixed: Vec<usize> = (0..r.num_positive()).filter(|&x| f.gamma(x) == 1).collect();
        assert_eq!(fixed.len(), 3);
        for x in fixed {
            assert!(f.orbit_reps.contains(&x));
        }
        // fixed node contributes orbit size 1
        let alpha2 = r.root_index(&[0, 1, 0, 0]).unwrap();
        assert_eq!(orbit_size(&f, alpha2), 1);
        let alpha1 = r.root_index(&[1, 0, 0, 0]).unwrap();
        assert_eq!(orbit_size(&f, alpha1), 3);
    }

    #[test]
    fn fold_identity_trivial() {
        let r = rs("A3");
        let f = fold(&r, &DiagramAutomorphism::identity(&r)).unwrap();
        assert_eq!(f.order, 1);
        assert_eq!(f.folded.dynkin_type, r.dynkin_type);
        assert!((0..r.num_positive()).all(|x| f.gamma(x) == 1));
    }

    #[test]
    fn restriction_constant_on_orbits_injective_on_reps() {
        for (s, auto) in [("A4", "flip"), ("A5", "flip"), ("D4", "rot3"), ("E6", "flip")] {
            let r = rs(s);
            let sig = if auto == "flip" {
                DiagramAutomorphism::flip(&r).unwrap()
            } else {
                DiagramAutomorphism::triality(&r).unwrap()
            };
            let f = fold(&r, &sig).unwrap();
            for orb in &f.orbits {
                let first = f.restricted_coords(orb[0]);
                for &x in orb {
                    assert_eq!(f.restricted_coords(x), first);
                }
            }
            let mut seen = std::collections::HashSet::new();
            for &rep in &f.orbit_reps {
                assert!(seen.insert(f.restricted_coords(rep)));
            }
        }
    }

    #[test]
    fn gamma_matches_fixedness() {
        let r = rs("A4");
        let f = fold(&r, &DiagramAutomorphism::flip(&r).unwrap()).unwrap();
        for x in 0..r.num_positive() {
            let img = f.sigma.apply_root(&r.positive_roots[x]);
            let fixed = img == r.positive_roots[x];
            assert_eq!(f.gamma(x) == 1, fixed);
        }
    }

    #[test]
    fn bad_automorphism_rejected() {
        let r = rs("A3");
        assert!(DiagramAutomorphism::new(&r, vec![1, 0, 2]).is_err());
        let r4 = rs("A4");
        assert!(DiagramAutomorphism::new(&r4, vec![0, 2, 1, 3]).is_err());
    }
}
