//! Dynkin catalog, bipartite seeds and the source–sink belt.

use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::exact_arith::LaurentPolynomial;
use crate::exact_arith::{pow_mod, Integer, Rational};
use crate::seeds::{ExchangeData, Seed};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Family {
    A,
    B,
    C,
    D,
    E,
    F,
    G,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct DynkinType {
    pub family: Family,
    pub rank: usize,
}

impl DynkinType {
    pub fn new(family: Family, rank: usize) -> Result<DynkinType> {
        let ok = match family {
            Family::A => rank >= 1,
            Family::B => rank >= 3,
            Family::C => rank >= 2,
            Family::D => rank >= 4,
            Family::E => (6..=8).contains(&rank),
            Family::F => rank == 4,
            Family::G => rank == 2,
        };
        if !ok {
            return Err(Error::Unsupported(format!("{family:?}{rank} is not a finite-type Dynkin diagram")));
        }
        Ok(DynkinType { family, rank })
    }

    pub fn coxeter_number(&self) -> usize {
        let n = self.rank;
        match self.family {
            Family::A => n + 1,
            Family::B | Family::C => 2 * n,
            Family::D => 2 * n - 2,
            Family::E => match n {
                6 => 12,
                7 => 18,
                _ => 30,
            },
            Family::F => 12,
            Family::G => 6,
        }
    }

    /// Number of almost positive roots, i.e. of mutable cluster variables.
    pub fn num_variables(&self) -> usize {
        self.rank * (self.coxeter_number() + 2) / 2
    }

    /// Edges of the diagram (0-based) and node weights.
    fn diagram(&self) -> (Vec<(usize, usize)>, Vec<i64>) {
        let n = self.rank;
        let path: Vec<(usize, usize)> = (0..n.saturating_sub(1)).map(|i| (i, i + 1)).collect();
        match self.family {
            Family::A => (path, vec![1; n]),
            Family::B => {
                let mut w = vec![1; n];
                w[n - 1] = 2;
                (path, w)
            }
            Family::C => {
                let mut w = vec![2; n];
                w[n - 1] = 1;
                (path, w)
            }
            Family::D => {
                let mut e: Vec<(usize, usize)> = (0..n - 2).map(|i| (i, i + 1)).collect();
                e.pop();
                e.push((n - 3, n - 2));
                e.push((n - 3, n - 1));
                (e, vec![1; n])
            }
            Family::E => {
                let mut e: Vec<(usize, usize)> = (0..n - 2).map(|i| (i, i + 1)).collect();
                e.push((2, n - 1));
                (e, vec![1; n])
            }
            Family::F => (path, vec![1, 1, 2, 2]),
            Family::G => (path, vec![3, 1]),
        }
    }
}

impl fmt::Display for DynkinType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}{}", self.family, self.rank)
    }
}

impl FromStr for DynkinType {
    type Err = Error;

    fn from_str(s: &str) -> Result<DynkinType> {
        let s = s.trim();
        let mut chars = s.chars();
        let fam = match chars.next().map(|c| c.to_ascii_uppercase()) {
            Some('A') => Family::A,
            Some('B') => Family::B,
            Some('C') => Family::C,
            Some('D') => Family::D,
            Some('E') => Family::E,
            Some('F') => Family::F,
            Some('G') => Family::G,
            _ => return Err(Error::Unsupported(format!("unknown Dynkin family in `{s}`"))),
        };
        let rank: usize = chars.as_str().parse().map_err(|_| Error::Unsupported(format!("bad rank in `{s}`")))?;
        DynkinType::new(fam, rank)
    }
}

/// Bipartite orientation with node 1 a source, no frozen nodes.
pub fn catalog_bipartite_seed(t: DynkinType) -> ExchangeData {
    let n = t.rank;
    let (edges, w) = t.diagram();
    let mut adj = vec![Vec::new(); n];
    for &(i, j) in &edges {
        adj[i].push(j);
        adj[j].push(i);
    }
    // Parity of the distance from node 0.
    let mut colour = vec![usize::MAX; n];
    colour[0] = 0;
    let mut queue = VecDeque::from([0]);
    while let Some(i) = queue.pop_front() {
        for &j in &adj[i] {
            if colour[j] == usize::MAX {
                colour[j] = 1 - colour[i];
                queue.push_back(j);
            }
        }
    }
    let mut b = vec![vec![0i64; n]; n];
    for &(i, j) in &edges {
        let (s, t) = if colour[i] == 0 { (i, j) } else { (j, i) };
        b[s][t] = w[s].max(w[t]) / w[s];
        b[t][s] = -(w[s].max(w[t]) / w[t]);
    }
    ExchangeData::from_matrix(b, w).expect("catalog matrices are skew-symmetrizable")
}

/// The catalog seed with m frozen nodes f1..fm, frozen j pointing into
/// mutable node j.
pub fn catalog_seed_with_frozen(t: DynkinType, m: usize) -> Result<ExchangeData> {
    let base = catalog_bipartite_seed(t);
    let n = base.n;
    if m > n {
        return Err(Error::Contract(format!("at most {n} frozen nodes for {t}")));
    }
    let size = n + m;
    let mut b = vec![vec![0i64; size]; size];
    for i in 0..n {
        b[i][..n].copy_from_slice(&base.b[i]);
    }
    for j in 0..m {
        b[n + j][j] = 1;
        b[j][n + j] = -1;
    }
    let mut weights = base.weights.clone();
    weights.extend(std::iter::repeat(1).take(m));
    let mut names = base.names.clone();
    names.extend((1..=m).map(|j| format!("f{j}")));
    ExchangeData::new(n, m, b, weights, names)
}

/// Identifies the Dynkin type of an acyclic finite-type principal part.
pub fn classify(e: &ExchangeData) -> Result<DynkinType> {
    let n = e.n;
    let b = e.principal();
    let mut adj = vec![Vec::new(); n];
    let mut bonds = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if b[i][j] != 0 {
                adj[i].push(j);
                adj[j].push(i);
                bonds.push((i, j, (b[i][j] * b[j][i]).abs()));
            }
        }
    }
    let err = || Error::NotFiniteType(format!("diagram with matrix {b:?} is not a connected Dynkin diagram"));
    if n == 0 || bonds.len() != n - 1 || !connected(&adj) {
        return Err(err());
    }
    let degs: Vec<usize> = adj.iter().map(|a| a.len()).collect();
    let heavy: Vec<&(usize, usize, i64)> = bonds.iter().filter(|x| x.2 > 1).collect();
    if heavy.iter().any(|x| x.2 > 3) || heavy.len() > 1 {
        return Err(err());
    }
    if let Some(&&(i, j, p)) = heavy.first() {
        if degs.iter().any(|&d| d > 2) {
            return Err(err());
        }
        if p == 3 {
            return if n == 2 { DynkinType::new(Family::G, 2) } else { Err(err()) };
        }
        if n == 2 {
            return DynkinType::new(Family::C, 2);
        }
        let (end, inner) = if degs[i] == 1 { (i, j) } else if degs[j] == 1 { (j, i) } else { (usize::MAX, usize::MAX) };
        if end == usize::MAX {
            return if n == 4 { DynkinType::new(Family::F, 4) } else { Err(err()) };
        }
        let fam = if e.weights[end] > e.weights[inner] { Family::B } else { Family::C };
        return DynkinType::new(fam, n);
    }
    let branch: Vec<usize> = (0..n).filter(|&i| degs[i] > 2).collect();
    match branch.as_slice() {
        [] => DynkinType::new(Family::A, n),
        [c] if degs[*c] == 3 => {
            let mut arms: Vec<usize> = adj[*c].iter().map(|&s| arm_length(&adj, *c, s)).collect();
            arms.sort();
            match arms.as_slice() {
                [1, 1, k] => DynkinType::new(Family::D, k + 3),
                [1, 2, 2] => DynkinType::new(Family::E, 6),
                [1, 2, 3] => DynkinType::new(Family::E, 7),
                [1, 2, 4] => DynkinType::new(Family::E, 8),
                _ => Err(err()),
            }
        }
        _ => Err(err()),
    }
}

fn connected(adj: &[Vec<usize>]) -> bool {
    let mut seen = vec![false; adj.len()];
    let mut stack = vec![0];
    seen[0] = true;
    while let Some(i) = stack.pop() {
        for &j in &adj[i] {
            if !seen[j] {
                seen[j] = true;
                stack.push(j);
            }
        }
    }
    seen.iter().all(|&s| s)
}

fn arm_length(adj: &[Vec<usize>], from: usize, start: usize) -> usize {
    let (mut prev, mut cur, mut len) = (from, start, 1);
    loop {
        let next: Vec<usize> = adj[cur].iter().copied().filter(|&x| x != prev).collect();
        if next.len() != 1 {
            return len;
        }
        prev = cur;
        cur = next[0];
        len += 1;
    }
}


/// Bound on the number of exchange matrices visited by [`find_bipartite_seed`];
/// the largest finite mutation class met in practice (E₈) needs about 3·10⁵.
pub const BFS_LIMIT: usize = 2_000_000;

/// Shortest mutation sequence reaching a bipartite mutable part (breadth-first
/// over principal parts, neighbours explored in index order).
pub fn find_bipartite_seed(e: &ExchangeData) -> Result<Vec<usize>> {
    let n = e.n;
    let start: Vec<i8> = e.principal().iter().flatten().map(|&v| v as i8).collect();
    if flat_bipartite(&start, n) {
        return Ok(Vec::new());
    }
    // States live in a flat arena; each remembers its parent and last mutation.
    let mut arena: Vec<i8> = start.clone();
    let mut parent: Vec<(u32, u8)> = vec![(u32::MAX, u8::MAX)];
    let mut seen: HashSet<Box<[i8]>> = HashSet::new();
    seen.insert(start.into_boxed_slice());
    let mut head = 0usize;
    let mut next = vec![0i8; n * n];
    while head < parent.len() {
        let last = parent[head].1 as usize;
        for k in (0..n).filter(|&k| k != last) {
            let cur = &arena[head * n * n..(head + 1) * n * n];
            flat_mutate(cur, &mut next, n, k)?;
            if seen.contains(next.as_slice()) {
                continue;
            }
            seen.insert(next.clone().into_boxed_slice());
            arena.extend_from_slice(&next);
            parent.push((head as u32, k as u8));
            if flat_bipartite(&next, n) {
                let mut path = Vec::new();
                let mut at = parent.len() - 1;
                while parent[at].0 != u32::MAX {
                    path.push(parent[at].1 as usize);
                    at = parent[at].0 as usize;
                }
                path.reverse();
                return Ok(path);
            }
            if parent.len() > BFS_LIMIT {
                return Err(Error::NotFiniteType(format!("no bipartite seed among the first {BFS_LIMIT} seeds")));
            }
        }
        head += 1;
    }
    Err(Error::NotFiniteType("the mutation class has no bipartite seed".into()))
}

fn flat_mutate(b: &[i8], out: &mut [i8], n: usize, k: usize) -> Result<()> {
    for i in 0..n {
        let bik = b[i * n + k] as i32;
        for j in 0..n {
            let v = if i == k || j == k {
                -(b[i * n + j] as i32)
            } else {
                let bkj = b[k * n + j] as i32;
                b[i * n + j] as i32 + bik.max(0) * bkj.max(0) - bik.min(0) * bkj.min(0)
            };
            if v.abs() > 3 {
                return Err(Error::NotFiniteType("mutation class contains an entry of absolute value > 3".into()));
            }
            out[i * n + j] = v as i8;
        }
    }
    for i in 0..n {
        for j in 0..i {
            if (out[i * n + j] as i32 * out[j * n + i] as i32).abs() > 3 {
                return Err(Error::NotFiniteType("mutation class contains a rank-2 subpattern of infinite type".into()));
            }
        }
    }
    Ok(())
}

fn flat_bipartite(b: &[i8], n: usize) -> bool {
    (0..n).all(|i| {
        let row = &b[i * n..(i + 1) * n];
        row.iter().all(|&x| x >= 0) || row.iter().all(|&x| x <= 0)
    })
}


/// Anything that can be pushed through exchange relations.
pub trait ClusterValue: Clone + PartialEq {
    fn mul(&self, o: &Self) -> Self;
    fn add(&self, o: &Self) -> Option<Self>;
    /// Exact quotient, `None` when it does not exist.
    fn div(&self, o: &Self) -> Option<Self>;
    fn one_like(&self) -> Self;

    fn pow(&self, e: u32) -> Self {
        let mut acc = self.one_like();
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }
}

impl ClusterValue for Rational {
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn add(&self, o: &Self) -> Option<Self> {
        Some(self + o)
    }
    fn div(&self, o: &Self) -> Option<Self> {
        (!num_traits::Zero::is_zero(o)).then(|| self / o)
    }
    fn one_like(&self) -> Self {
        num_traits::One::one()
    }
    fn pow(&self, e: u32) -> Self {
        num_traits::pow(self.clone(), e as usize)
    }
}

impl ClusterValue for LaurentPolynomial {
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn add(&self, o: &Self) -> Option<Self> {
        Some(self + o)
    }
    fn div(&self, o: &Self) -> Option<Self> {
        self.divide_exact(o).ok()
    }
    fn one_like(&self) -> Self {
        LaurentPolynomial::one(self.nvars())
    }
    fn pow(&self, e: u32) -> Self {
        LaurentPolynomial::pow(self, e)
    }
}

/// The Mersenne prime 2^61 − 1 used for fingerprints.
pub const FINGERPRINT_PRIME: u64 = (1 << 61) - 1;

/// Residue modulo [`FINGERPRINT_PRIME`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Fp(pub u64);

impl ClusterValue for Fp {
    fn mul(&self, o: &Self) -> Self {
        Fp(((self.0 as u128 * o.0 as u128) % FINGERPRINT_PRIME as u128) as u64)
    }
    fn add(&self, o: &Self) -> Option<Self> {
        Some(Fp((self.0 + o.0) % FINGERPRINT_PRIME))
    }
    fn div(&self, o: &Self) -> Option<Self> {
        (o.0 != 0).then(|| self.mul(&Fp(pow_mod(o.0, FINGERPRINT_PRIME - 2, FINGERPRINT_PRIME))))
    }
    fn one_like(&self) -> Self {
        Fp(1)
    }
}

/// Max-plus tropical vectors: denominator vectors follow this recurrence.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Trop(pub Vec<i64>);

impl ClusterValue for Trop {
    fn mul(&self, o: &Self) -> Self {
        Trop(self.0.iter().zip(&o.0).map(|(a, b)| a + b).collect())
    }
    fn add(&self, o: &Self) -> Option<Self> {
        Some(Trop(self.0.iter().zip(&o.0).map(|(a, b)| *a.max(b)).collect()))
    }
    fn div(&self, o: &Self) -> Option<Self> {
        Some(Trop(self.0.iter().zip(&o.0).map(|(a, b)| a - b).collect()))
    }
    fn one_like(&self) -> Self {
        Trop(vec![0; self.0.len()])
    }
}

/// Grading vectors: sums are only defined between equal degrees, so pushing
/// degrees through an exchange relation checks its homogeneity.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Grading(pub Vec<Integer>);

impl ClusterValue for Grading {
    fn mul(&self, o: &Self) -> Self {
        Grading(self.0.iter().zip(&o.0).map(|(a, b)| a + b).collect())
    }
    fn add(&self, o: &Self) -> Option<Self> {
        (self == o).then(|| self.clone())
    }
    fn div(&self, o: &Self) -> Option<Self> {
        Some(Grading(self.0.iter().zip(&o.0).map(|(a, b)| a - b).collect()))
    }
    fn one_like(&self) -> Self {
        Grading(vec![Integer::from(0); self.0.len()])
    }
}

/// Exchange relation at k: (∏ in + ∏ out) / x_k.
pub fn exchange<V: ClusterValue>(row: &[i64], values: &[V], k: usize) -> Option<V> {
    let (inc, out) = exchange_monomials(row, values, k);
    inc.add(&out)?.div(&values[k])
}

/// The two monomials (incoming, outgoing) of the exchange relation at k.
pub fn exchange_monomials<V: ClusterValue>(row: &[i64], values: &[V], k: usize) -> (V, V) {
    let mut inc = values[k].one_like();
    let mut out = values[k].one_like();
    for (j, &b) in row.iter().enumerate() {
        if b > 0 {
            out = out.mul(&values[j].pow(b as u32));
        } else if b < 0 {
            inc = inc.mul(&values[j].pow((-b) as u32));
        }
    }
    (inc, out)
}

/// Mutates at every current source.
pub fn mutate_sources(s: &Seed) -> Result<Seed> {
    let srcs: Vec<usize> = (0..s.n()).filter(|&i| s.exchange.is_source(i)).collect();
    s.mutate_sequence(&srcs)
}

/// Negated minimal exponents of the first n (mutable) initial variables.
pub fn denominator_of(p: &LaurentPolynomial, n: usize) -> Vec<i64> {
    p.min_exponents()[..n].iter().map(|&e| -e).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LaurentMode {
    /// Always expand; fail if expansion is impossible.
    Always,
    /// Never expand: identify variables by fingerprints only.
    Never,
    /// Expand while every intermediate product stays below this many terms.
    Budget(usize),
}

impl Default for LaurentMode {
    fn default() -> Self {
        LaurentMode::Budget(50_000)
    }
}

const FINGERPRINT_POINTS: usize = 4;

/// All h+2 bipartite seeds of a finite-type pattern and its cluster variables.
///
/// Registry ids list the N mutable variables in order of first appearance
/// along the belt, then the m frozen ones. Laurent forms, when present, are in
/// the cluster of the reference seed S_0.
#[derive(Clone, Debug)]
pub struct BipartiteBelt {
    pub dynkin: DynkinType,
    /// Exchange data of the seed the belt was requested for.
    pub input: ExchangeData,
    /// Mutations taking the input seed to the reference seed S_0.
    pub path: Vec<usize>,
    /// Exchange data of S_0 .. S_{h+2}; the last is S_0 with positions permuted.
    pub matrices: Vec<ExchangeData>,
    pub sources: Vec<Vec<usize>>,
    /// Registry id at each position of S_0 .. S_{h+1}.
    pub ids: Vec<Vec<usize>>,
    /// S_{h+2}[i] = S_0[closing[i]].
    pub closing: Vec<usize>,
    pub laurent: Option<Vec<LaurentPolynomial>>,
    pub fingerprints: Vec<Vec<Fp>>,
    /// First source occurrence (seed, position) of each mutable variable.
    pub source_of: Vec<(usize, usize)>,
    pub sink_of: Vec<(usize, usize)>,
    /// Denominator vectors w.r.t. S_0.
    pub roots: Vec<Vec<i64>>,
    pub names: Vec<String>,
    num_mutable: usize,
}

impl BipartiteBelt {
    /// Finds a bipartite seed from `input` and enumerates its belt.
    pub fn from_exchange(input: &ExchangeData) -> Result<BipartiteBelt> {
        Self::from_exchange_with(input, LaurentMode::default())
    }

    pub fn from_exchange_with(input: &ExchangeData, mode: LaurentMode) -> Result<BipartiteBelt> {
        let path = find_bipartite_seed(input)?;
        let mut e = input.clone();
        for &k in &path {
            e = e.mutate(k)?;
        }
        let mut belt = enumerate_belt_with(&e, mode)?;
        belt.input = input.clone();
        belt.path = path;
        Ok(belt)
    }

    pub fn catalog(t: DynkinType) -> Result<BipartiteBelt> {
        enumerate_belt_with(&catalog_bipartite_seed(t), LaurentMode::default())
    }

    pub fn n(&self) -> usize {
        self.dynkin.rank
    }

    pub fn m(&self) -> usize {
        self.matrices[0].m
    }

    /// Number of mutable variables N.
    pub fn num_mutable(&self) -> usize {
        self.num_mutable
    }

    /// N + m.
    pub fn len(&self) -> usize {
        self.num_mutable + self.m()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_frozen_id(&self, id: usize) -> bool {
        id >= self.num_mutable
    }

    /// h + 2.
    pub fn period(&self) -> usize {
        self.matrices.len() - 1
    }

    pub fn reference(&self) -> &ExchangeData {
        &self.matrices[0]
    }

    /// Registry id at position i of belt seed t, for any t ≥ 0.
    pub fn id_at(&self, t: usize, i: usize) -> usize {
        let p = self.period();
        if t < p {
            self.ids[t][i]
        } else if i < self.n() {
            self.id_at(t - p, self.closing[i])
        } else {
            self.id_at(t - p, i)
        }
    }

    /// Exchange data of belt seed t, for any t ≥ 0.
    pub fn exchange_at(&self, t: usize) -> ExchangeData {
        let p = self.period();
        if t < p {
            return self.matrices[t].clone();
        }
        let inner = self.exchange_at(t - p);
        let n = self.n();
        let perm = |i: usize| if i < n { self.closing[i] } else { i };
        let size = inner.size();
        let mut e = inner.clone();
        e.b = (0..size).map(|i| (0..size).map(|j| inner.b[perm(i)][perm(j)]).collect()).collect();
        e.weights = (0..size).map(|i| inner.weights[perm(i)]).collect();
        e
    }

    /// Registry ids of the cluster of belt seed t.
    pub fn cluster_ids(&self, t: usize) -> Vec<usize> {
        (0..self.n() + self.m()).map(|i| self.id_at(t, i)).collect()
    }

    /// The variable that replaces γ when mutating at its source position: x_γ'.
    pub fn partner(&self, gamma: usize) -> usize {
        let (t, i) = self.source_of[gamma];
        self.id_at(t + 1, i)
    }

    /// Exchange monomials at γ's source as exponent vectors over registry ids:
    /// (incoming, outgoing).
    pub fn exchange_vectors(&self, gamma: usize) -> (Vec<i64>, Vec<i64>) {
        let (t, i) = self.source_of[gamma];
        let e = self.exchange_at(t);
        let mut inc = vec![0i64; self.len()];
        let mut out = vec![0i64; self.len()];
        for (j, &b) in e.b[i].iter().enumerate() {
            let id = self.id_at(t, j);
            if b > 0 {
                out[id] += b;
            } else if b < 0 {
                inc[id] -= b;
            }
        }
        (inc, out)
    }

    pub fn laurent_forms(&self) -> Result<&[LaurentPolynomial]> {
        self.laurent
            .as_deref()
            .ok_or_else(|| Error::Unsupported(format!("Laurent forms of {} were not expanded", self.dynkin)))
    }

    pub fn name_to_id(&self) -> HashMap<String, usize> {
        self.names.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect()
    }

    /// Pushes values of the S_0 cluster through the belt; one vector per seed
    /// S_0 .. S_{h+1}.
    pub fn walk<V: ClusterValue>(&self, start: Vec<V>, abort: &dyn Fn(&V) -> bool) -> Result<Option<Vec<Vec<V>>>> {
        walk_values(&self.matrices, start, abort)
    }

    /// Values of all registry variables given values of the S_0 cluster.
    pub fn evaluate<V: ClusterValue>(&self, start: Vec<V>) -> Result<Vec<V>> {
        self.evaluate_at_seed(0, start)
    }

    /// Values of all registry variables given values of the cluster of belt
    /// seed t.
    pub fn evaluate_at_seed<V: ClusterValue>(&self, t: usize, start: Vec<V>) -> Result<Vec<V>> {
        let seeds = if t == 0 {
            self.walk(start, &|_| false)?
        } else {
            let mats: Vec<ExchangeData> = (0..=self.period()).map(|u| self.exchange_at(t + u)).collect();
            walk_values(&mats, start, &|_| false)?
        }
        .expect("no abort requested");
        let mut out: Vec<Option<V>> = vec![None; self.len()];
        for (u, vals) in seeds.iter().enumerate() {
            for (i, v) in vals.iter().enumerate() {
                let id = self.id_at(t + u, i);
                if out[id].is_none() {
                    out[id] = Some(v.clone());
                }
            }
        }
        out.into_iter()
            .map(|v| v.ok_or_else(|| Error::Internal("a variable is missing from the belt walk".into())))
            .collect()
    }

    /// Values of the S_0 cluster given values of the input seed's cluster.
    pub fn reference_values<V: ClusterValue>(&self, input_values: Vec<V>) -> Result<Vec<V>> {
        let mut vals = input_values;
        let mut e = self.input.clone();
        for &k in &self.path {
            let v = exchange(&e.b[k], &vals, k)
                .ok_or_else(|| Error::Internal(format!("exchange at {k} failed along the input path")))?;
            vals[k] = v;
            e = e.mutate(k)?;
        }
        Ok(vals)
    }

    /// Values of all registry variables given values of the input seed.
    pub fn evaluate_input<V: ClusterValue>(&self, input_values: Vec<V>) -> Result<Vec<V>> {
        self.evaluate(self.reference_values(input_values)?)
    }

    /// Exponent of x_γ in the denominator of x_ω, computed in γ's source seed;
    /// (γ‖γ) is 0.
    pub fn compatibility_degree(&self, gamma: usize, omega: usize) -> Result<i64> {
        Ok(self.compatibility_row(gamma)?[omega])
    }

    /// (γ‖ω) for all mutable ω.
    pub fn compatibility_row(&self, gamma: usize) -> Result<Vec<i64>> {
        let (t, i) = self.source_of[gamma];
        let table = self.denominators_from(t)?;
        Ok(table.iter().enumerate().map(|(w, d)| if w == gamma { 0 } else { d[i] }).collect())
    }

    /// Matrix C[γ][ω] = (γ‖ω).
    pub fn compatibility_matrix(&self) -> Result<Vec<Vec<i64>>> {
        let nm = self.num_mutable;
        let mut by_seed: HashMap<usize, Vec<Vec<i64>>> = HashMap::new();
        let mut out = vec![vec![0; nm]; nm];
        for (gamma, row) in out.iter_mut().enumerate() {
            let (t, i) = self.source_of[gamma];
            if !by_seed.contains_key(&t) {
                by_seed.insert(t, self.denominators_from(t)?);
            }
            for (omega, x) in row.iter_mut().enumerate() {
                if omega != gamma {
                    *x = by_seed[&t][omega][i];
                }
            }
        }
        Ok(out)
    }

    /// Denominator vectors of all mutable variables w.r.t. belt seed t: the belt
    /// is re-run with S_t as initial seed (Laurent expansion when this belt has
    /// one, the tropical recurrence otherwise).
    pub fn denominators_from(&self, t: usize) -> Result<Vec<Vec<i64>>> {
        let n = self.n();
        let size = n + self.m();
        let mats: Vec<ExchangeData> = (0..=self.period()).map(|u| self.exchange_at(t + u)).collect();
        let per_seed: Vec<Vec<Vec<i64>>> = if self.laurent.is_some() {
            let start: Vec<LaurentPolynomial> = (0..size).map(|i| LaurentPolynomial::var(size, i)).collect();
            let seeds = walk_values(&mats, start, &|_| false)?.expect("no abort requested");
            seeds.iter().map(|s| s.iter().map(|p| denominator_of(p, n)).collect()).collect()
        } else {
            let start: Vec<Trop> = (0..size)
                .map(|i| Trop((0..n).map(|j| if i == j { -1 } else { 0 }).collect()))
                .collect();
            let seeds = walk_values(&mats, start, &|_| false)?.expect("no abort requested");
            seeds.into_iter().map(|s| s.into_iter().map(|d| d.0).collect()).collect()
        };
        let mut out: Vec<Option<Vec<i64>>> = vec![None; self.num_mutable];
        for (u, seed) in per_seed.iter().enumerate() {
            for (pos, d) in seed.iter().enumerate().take(n) {
                let id = self.id_at(t + u, pos);
                if out[id].is_none() {
                    out[id] = Some(d.clone());
                }
            }
        }
        out.into_iter()
            .enumerate()
            .map(|(i, d)| d.ok_or_else(|| Error::Internal(format!("variable {i} missing from the re-run belt"))))
            .collect()
    }
}

/// Pushes values through a sequence of bipartite seeds by mutating every
/// source of each one. Returns `None` if `abort` fires on an intermediate value.
pub fn walk_values<V: ClusterValue>(
    mats: &[ExchangeData],
    start: Vec<V>,
    abort: &dyn Fn(&V) -> bool,
) -> Result<Option<Vec<Vec<V>>>> {
    let mut out = vec![start];
    for e in &mats[..mats.len() - 1] {
        let cur = out.last().unwrap();
        let mut next = cur.clone();
        for k in (0..e.n).filter(|&k| e.is_source(k)) {
            // Sources are pairwise non-adjacent, so their rows agree in S_t and
            // in every partial mutation of it.
            let (inc, outm) = exchange_monomials(&e.b[k], cur, k);
            if abort(&inc) || abort(&outm) {
                return Ok(None);
            }
            let v = inc
                .add(&outm)
                .and_then(|s| s.div(&cur[k]))
                .ok_or_else(|| Error::Internal(format!("exchange relation at position {k} failed")))?;
            next[k] = v;
        }
        out.push(next);
    }
    Ok(Some(out))
}

/// Enumerates the belt starting from the bipartite seed with exchange data `e0`.
pub fn enumerate_belt(start: &Seed) -> Result<BipartiteBelt> {
    enumerate_belt_with(&start.exchange, LaurentMode::default())
}

fn fingerprint_start(size: usize) -> Vec<Vec<Fp>> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x5eed_f00d);
    (0..FINGERPRINT_POINTS)
        .map(|_| (0..size).map(|_| Fp(rng.gen_range(2..FINGERPRINT_PRIME))).collect())
        .collect()
}

pub fn enumerate_belt_with(e0: &ExchangeData, mode: LaurentMode) -> Result<BipartiteBelt> {
    if !e0.is_bipartite() {
        return Err(Error::Contract("belt enumeration needs a bipartite seed".into()));
    }
    let dynkin = classify(e0)?;
    let (n, m) = (e0.n, e0.m);
    let size = n + m;
    let h = dynkin.coxeter_number();
    let mut matrices = vec![e0.clone()];
    for _ in 0..h + 2 {
        let cur = matrices.last().unwrap();
        let mut next = cur.clone();
        for k in (0..n).filter(|&k| cur.is_source(k)) {
            next = next.mutate(k)?;
        }
        matrices.push(next);
    }
    let sources: Vec<Vec<usize>> = matrices.iter().map(|e| (0..n).filter(|&i| e.is_source(i)).collect()).collect();

    // Fingerprints at several random points, one walk per point.
    let fp_starts = fingerprint_start(size);
    let mut fp_seeds: Vec<Vec<Vec<Fp>>> = Vec::new();
    for s in fp_starts {
        fp_seeds.push(walk_values(&matrices, s, &|_| false)?.expect("no abort requested"));
    }
    let fp_at = |t: usize, i: usize| -> Vec<Fp> { fp_seeds.iter().map(|w| w[t][i]).collect() };

    let laurent_seeds: Option<Vec<Vec<LaurentPolynomial>>> = {
        let start: Vec<LaurentPolynomial> = (0..size).map(|i| LaurentPolynomial::var(size, i)).collect();
        match mode {
            LaurentMode::Never => None,
            LaurentMode::Always => walk_values(&matrices, start, &|_| false)?,
            LaurentMode::Budget(limit) => walk_values(&matrices, start, &|p: &LaurentPolynomial| p.len() > limit)?,
        }
    };

    let mut index: HashMap<Vec<Fp>, usize> = HashMap::new();
    let mut fingerprints: Vec<Vec<Fp>> = Vec::new();
    let mut ids = Vec::new();
    for t in 0..h + 2 {
        let mut row = Vec::with_capacity(size);
        for i in 0..n {
            let fp = fp_at(t, i);
            let id = *index.entry(fp.clone()).or_insert_with(|| {
                fingerprints.push(fp);
                fingerprints.len() - 1
            });
            row.push(id);
        }
        ids.push(row);
    }
    let nm = fingerprints.len();
    if nm != dynkin.num_variables() {
        return Err(Error::Internal(format!(
            "belt of {dynkin} produced {nm} variables, expected {}",
            dynkin.num_variables()
        )));
    }
    for i in n..size {
        fingerprints.push(fp_at(0, i));
    }
    for row in ids.iter_mut() {
        row.extend(nm..nm + m);
    }

    // S_{h+2} must be S_0 up to a permutation of mutable positions.
    let mut closing = Vec::with_capacity(n);
    for i in 0..n {
        let fp = fp_at(h + 2, i);
        let j = (0..n)
            .find(|&j| fp_at(0, j) == fp)
            .ok_or_else(|| Error::Internal("belt does not close after h+2 steps".into()))?;
        closing.push(j);
    }
    let last = &matrices[h + 2];
    let perm = |i: usize| if i < n { closing[i] } else { i };
    for i in 0..n {
        for j in 0..size {
            if last.b[i][j] != e0.b[perm(i)][perm(j)] {
                return Err(Error::Internal("closing seed has a different exchange matrix".into()));
            }
        }
    }

    let mut occurrence: Vec<Option<(usize, usize)>> = vec![None; nm + m];
    let mut source_of = vec![None; nm];
    let mut sink_of = vec![None; nm];
    for t in 0..h + 2 {
        for i in 0..size {
            let id = ids[t][i];
            occurrence[id].get_or_insert((t, i));
            if i < n {
                if matrices[t].is_source(i) && source_of[id].is_none() {
                    source_of[id] = Some((t, i));
                }
                if matrices[t].is_sink(i) && sink_of[id].is_none() {
                    sink_of[id] = Some((t, i));
                }
            }
        }
    }
    let source_of: Vec<(usize, usize)> = source_of
        .into_iter()
        .collect::<Option<_>>()
        .ok_or_else(|| Error::Internal("a variable never sits at a source".into()))?;
    let sink_of: Vec<(usize, usize)> = sink_of
        .into_iter()
        .collect::<Option<_>>()
        .ok_or_else(|| Error::Internal("a variable never sits at a sink".into()))?;

    // Denominator vectors by the tropical recurrence.
    let trop_start: Vec<Trop> = (0..size).map(|i| Trop((0..n).map(|j| if i == j { -1 } else { 0 }).collect())).collect();
    let trop = walk_values(&matrices, trop_start, &|_| false)?.expect("no abort requested");
    let roots: Vec<Vec<i64>> = (0..nm)
        .map(|id| {
            let (t, i) = occurrence[id].unwrap();
            trop[t][i].0.clone()
        })
        .collect();

    // Laurent forms: the registry must be injective on them, they must agree
    // with the fingerprints, and their denominators with the tropical roots.
    let laurent = match laurent_seeds {
        None => None,
        Some(seeds) => {
            let forms: Vec<LaurentPolynomial> = (0..nm + m)
                .map(|id| {
                    let (t, i) = occurrence[id].unwrap();
                    seeds[t][i].clone()
                })
                .collect();
            for t in 0..h + 3 {
                for i in 0..n {
                    let id = if t < h + 2 { ids[t][i] } else { ids[0][closing[i]] };
                    if seeds.get(t).is_some_and(|s| s[i] != forms[id]) {
                        return Err(Error::Internal(format!("fingerprint collision at seed {t}, position {i}")));
                    }
                }
            }
            let distinct: HashSet<&LaurentPolynomial> = forms.iter().collect();
            if distinct.len() != forms.len() {
                return Err(Error::Internal("distinct fingerprints for equal Laurent forms".into()));
            }
            for (id, p) in forms[..nm].iter().enumerate() {
                if denominator_of(p, n) != roots[id] {
                    return Err(Error::Internal(format!("denominator of variable {id} disagrees with the tropical recurrence")));
                }
                if p.min_exponents()[n..].iter().any(|&e| e < 0) {
                    return Err(Error::Internal(format!("variable {id} has a frozen variable in its denominator")));
                }
            }
            Some(forms)
        }
    };

    let mut names: Vec<String> = roots
        .iter()
        .map(|r| format!("x[{}]", r.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")))
        .collect();
    names.extend(e0.names[n..].iter().cloned());
    Ok(BipartiteBelt {
        dynkin,
        input: e0.clone(),
        path: Vec::new(),
        matrices,
        sources,
        ids,
        closing,
        laurent,
        fingerprints,
        source_of,
        sink_of,
        roots,
        names,
        num_mutable: nm,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn variable_counts_match_almost_positive_roots() {
        // n(h + 2)/2 against hand-counted positive roots plus simple negatives.
        for (name, positive_roots) in [("A3", 6), ("B3", 9), ("C2", 4), ("D4", 12), ("G2", 6), ("F4", 24), ("E6", 36)] {
            let t: DynkinType = name.parse().unwrap();
            assert_eq!(t.num_variables(), positive_roots + t.rank, "{name}");
        }
    }

    #[test]
    fn invalid_types_are_rejected() {
        for s in ["B2", "D3", "E9", "F3", "G3", "A0", "X2", "A"] {
            assert!(s.parse::<DynkinType>().is_err(), "{s}");
        }
    }

    #[test]
    fn belt_closes_after_h_plus_2_steps() {
        for name in ["A1", "A4", "B3", "C3", "D5", "G2", "F4"] {
            let t: DynkinType = name.parse().unwrap();
            let belt = BipartiteBelt::catalog(t).unwrap();
            assert_eq!(belt.period(), t.coxeter_number() + 2, "{name}");
            assert_eq!(belt.num_mutable(), t.num_variables(), "{name}");
        }
    }

    #[test]
    fn classify_survives_mutation() {
        let t: DynkinType = "D5".parse().unwrap();
        let e = catalog_bipartite_seed(t).mutate(2).unwrap().mutate(0).unwrap().mutate(3).unwrap();
        assert_eq!(classify(&e).unwrap(), t);
        let belt = BipartiteBelt::from_exchange(&e).unwrap();
        assert_eq!(belt.dynkin, t);
    }

    #[test]
    fn affine_quiver_is_not_finite_type() {
        // Kronecker quiver: a double arrow.
        let e = ExchangeData::from_matrix(vec![vec![0, 2], vec![-2, 0]], vec![1, 1]).unwrap();
        assert!(classify(&e).is_err());
    }

    #[test]
    fn frozen_nodes_point_into_mutable_nodes() {
        let e = catalog_seed_with_frozen("A2".parse().unwrap(), 2).unwrap();
        assert_eq!(e.b[2][0], 1);
        assert_eq!(e.b[0][2], -1);
        assert_eq!(e.b[3][1], 1);
        assert!(e.is_full_rank());
        assert!(catalog_seed_with_frozen("A2".parse().unwrap(), 3).is_err());
    }

    #[test]
    fn compatibility_degree_is_symmetric_when_simply_laced() {
        let belt = BipartiteBelt::catalog("A4".parse().unwrap()).unwrap();
        let c = belt.compatibility_matrix().unwrap();
        for (i, row) in c.iter().enumerate() {
            for (j, &x) in row.iter().enumerate() {
                assert_eq!(x, c[j][i]);
            }
        }
    }
}
