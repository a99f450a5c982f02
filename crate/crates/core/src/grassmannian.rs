//! Grassmannian grid seeds, Plücker identification and Plücker cones.

use std::collections::HashMap;

use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::cones::{self, Certificate, ConeDescription, UMatrix, Verdict};
use crate::error::{Error, Result};
use crate::exact_arith::{pow_mod, Integer, Rational};
use crate::expr::{self, ParsedRatio};
use crate::finite_type::{BipartiteBelt, ClusterValue, Fp, FINGERPRINT_PRIME};
use crate::linalg;
use crate::seeds::ExchangeData;
use crate::uvars::{self, RatioVector, WeightFunctional};

/// Sorted k-subset of {1..n}.
pub type PlueckerLabel = Vec<usize>;

pub fn pluecker_name(label: &[usize]) -> String {
    format!("p[{}]", label_text(label))
}

fn label_text(label: &[usize]) -> String {
    if label.iter().all(|&i| i <= 9) {
        label.iter().map(|i| i.to_string()).collect()
    } else {
        label.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(",")
    }
}

/// Name of a product of column sets, `p[124|356]`.
pub fn tableau_name(cols: &[PlueckerLabel]) -> String {
    format!("p[{}]", cols.iter().map(|c| label_text(c)).collect::<Vec<_>>().join("|"))
}

/// Parses the inside of `p[...]`: digit strings or comma lists, columns
/// separated by `|`.
pub fn parse_tableau(inner: &str) -> Option<Vec<PlueckerLabel>> {
    inner
        .split('|')
        .map(|col| {
            let col = col.trim();
            let mut l: Vec<usize> = if col.contains(',') {
                col.split(',').map(|s| s.trim().parse().ok()).collect::<Option<_>>()?
            } else {
                col.chars().map(|c| c.to_digit(10).map(|d| d as usize)).collect::<Option<_>>()?
            };
            let len = l.len();
            l.sort();
            l.dedup();
            (l.len() == len && !l.is_empty()).then_some(l)
        })
        .collect()
}

/// All k-subsets of {1..n} in lexicographic order.
pub fn k_subsets(n: usize, k: usize) -> Vec<PlueckerLabel> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<PlueckerLabel>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..=n {
            if n - i + 1 < k - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(1, n, k, &mut Vec::new(), &mut out);
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct GrassmannianSpec {
    pub k: usize,
    pub n: usize,
}

impl GrassmannianSpec {
    /// Gr(k, n) of finite cluster type: k = 2 with n ≥ 4, or k = 3 with n ≤ 8.
    pub fn new(k: usize, n: usize) -> Result<GrassmannianSpec> {
        match (k, n) {
            (2, n) if n >= 4 => Ok(GrassmannianSpec { k, n }),
            (3, 6..=8) => Ok(GrassmannianSpec { k, n }),
            _ => Err(Error::NotFiniteType(format!("Gr({k},{n}) is outside the finite-type range"))),
        }
    }

    /// No finite-type check; for sampling-only work such as Gr(4,8).
    pub fn any(k: usize, n: usize) -> Result<GrassmannianSpec> {
        if k == 0 || k >= n {
            return Err(Error::Contract(format!("Gr({k},{n}) needs 0 < k < n")));
        }
        Ok(GrassmannianSpec { k, n })
    }

    pub fn mutable_count(&self) -> usize {
        (self.k - 1) * (self.n - self.k - 1)
    }

    pub fn labels(&self) -> Vec<PlueckerLabel> {
        k_subsets(self.n, self.k)
    }

    /// i ↦ i + 1 mod n.
    pub fn rotate(&self, l: &[usize]) -> PlueckerLabel {
        let mut r: Vec<usize> = l.iter().map(|&i| i % self.n + 1).collect();
        r.sort();
        r
    }

    /// i ↦ n + 1 − i.
    pub fn reflect(&self, l: &[usize]) -> PlueckerLabel {
        let mut r: Vec<usize> = l.iter().map(|&i| self.n + 1 - i).collect();
        r.sort();
        r
    }

    pub fn complement(&self, l: &[usize]) -> PlueckerLabel {
        (1..=self.n).filter(|i| !l.contains(i)).collect()
    }

    /// Multiplicity of every column in a ratio over `labels`.
    pub fn column_weights(&self, labels: &[PlueckerLabel], v: &[i64]) -> Vec<i64> {
        let mut w = vec![0i64; self.n];
        for (l, &e) in labels.iter().zip(v) {
            for &c in l {
                w[c - 1] += e;
            }
        }
        w
    }
}

/// Column set of grid vertex (a, b), or of the empty vertex when `None`.
fn grid_label(k: usize, n: usize, v: Option<(usize, usize)>) -> PlueckerLabel {
    let raw: Vec<usize> = match v {
        None => (1..=k).collect(),
        Some((a, b)) => (1..=k - a).chain(k - a + b + 1..=k + b).collect(),
    };
    let mut l: Vec<usize> = raw.into_iter().map(|i| n + 1 - i).collect();
    l.sort();
    l
}

/// The rectangle-grid seed of Gr(k, n) with its Plücker labels.
pub fn grid_seed_labelled(k: usize, n: usize) -> Result<(ExchangeData, Vec<PlueckerLabel>)> {
    if k < 2 || k + 2 > n {
        return Err(Error::Contract(format!("grid seed needs 2 ≤ k ≤ n−2, got Gr({k},{n})")));
    }
    let c = n - k;
    let mut order: Vec<Option<(usize, usize)>> = Vec::new();
    for a in 1..k {
        for b in 1..c {
            order.push(Some((a, b)));
        }
    }
    let nm = order.len();
    order.push(None);
    for a in 1..=k {
        order.push(Some((a, c)));
    }
    for b in (1..c).rev() {
        order.push(Some((k, b)));
    }
    let t = order.len();
    let pos = |v: Option<(usize, usize)>| order.iter().position(|&w| w == v);
    let mut bm = vec![vec![0i64; t]; t];
    let mut arrow = |from: Option<(usize, usize)>, to: Option<(usize, usize)>| {
        if let (Some(i), Some(j)) = (pos(from), pos(to)) {
            if i < nm || j < nm {
                bm[i][j] += 1;
                bm[j][i] -= 1;
            }
        }
    };
    arrow(None, Some((1, 1)));
    for a in 1..=k {
        for b in 1..=c {
            arrow(Some((a, b)), Some((a, b + 1)));
            arrow(Some((a, b)), Some((a + 1, b)));
            arrow(Some((a + 1, b + 1)), Some((a, b)));
        }
    }
    let labels: Vec<PlueckerLabel> = order.iter().map(|&v| grid_label(k, n, v)).collect();
    let names = labels.iter().map(|l| pluecker_name(l)).collect();
    let e = ExchangeData::new(nm, t - nm, bm, vec![1; t], names)?;
    Ok((e, labels))
}

pub fn grid_seed(k: usize, n: usize) -> Result<ExchangeData> {
    Ok(grid_seed_labelled(k, n)?.0)
}

/// A point of the positive Grassmannian: the k×n matrix with columns
/// (1, t_j, …, t_j^{k−1}) for 0 < t_1 < … < t_n.
#[derive(Clone, Debug)]
pub struct TotallyPositivePoint {
    pub k: usize,
    pub n: usize,
    pub t: Vec<Rational>,
}

impl TotallyPositivePoint {
    pub fn new(k: usize, t: Vec<Rational>) -> Result<TotallyPositivePoint> {
        if !t.windows(2).all(|w| w[0] < w[1]) || t.first().is_some_and(|x| !x.is_positive()) {
            return Err(Error::Contract("Vandermonde parameters must be positive and increasing".into()));
        }
        Ok(TotallyPositivePoint { k, n: t.len(), t })
    }

    /// Maximal minor on columns `label`, by the Vandermonde product formula.
    pub fn pluecker(&self, label: &[usize]) -> Rational {
        let mut p = Rational::one();
        for (a, &i) in label.iter().enumerate() {
            for &j in &label[a + 1..] {
                p *= &self.t[j - 1] - &self.t[i - 1];
            }
        }
        p
    }

    pub fn matrix(&self) -> Vec<Vec<Rational>> {
        (0..self.k).map(|r| self.t.iter().map(|x| num_traits::pow(x.clone(), r)).collect()).collect()
    }

    pub fn values(&self, labels: &[PlueckerLabel]) -> Vec<Rational> {
        labels.iter().map(|l| self.pluecker(l)).collect()
    }
}

/// Deterministic pseudo-random positive point of Gr(k, n).
pub fn tp_sample(k: usize, n: usize, seed: u64) -> TotallyPositivePoint {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut t: Vec<Rational> = Vec::with_capacity(n);
    while t.len() < n {
        let x = Rational::new(Integer::from(rng.gen_range(1..=200i64)), Integer::from(rng.gen_range(1..=12i64)));
        if !t.contains(&x) {
            t.push(x);
        }
    }
    t.sort();
    TotallyPositivePoint { k, n, t }
}

fn fp_sub(a: Fp, b: Fp) -> Fp {
    Fp((a.0 + FINGERPRINT_PRIME - b.0) % FINGERPRINT_PRIME)
}

fn fp_inv(a: Fp) -> Fp {
    Fp(pow_mod(a.0, FINGERPRINT_PRIME - 2, FINGERPRINT_PRIME))
}

fn fp_det(mut m: Vec<Vec<Fp>>) -> Fp {
    let n = m.len();
    let mut det = Fp(1);
    for c in 0..n {
        let Some(p) = (c..n).find(|&r| m[r][c].0 != 0) else { return Fp(0) };
        if p != c {
            m.swap(p, c);
            det = fp_sub(Fp(0), det);
        }
        det = det.mul(&m[c][c]);
        let inv = fp_inv(m[c][c]);
        for r in c + 1..n {
            if m[r][c].0 == 0 {
                continue;
            }
            let f = m[r][c].mul(&inv);
            for j in c..n {
                let d = f.mul(&m[c][j]);
                m[r][j] = fp_sub(m[r][j], d);
            }
        }
    }
    det
}

/// A random k×n matrix modulo the fingerprint prime.
#[derive(Clone, Debug)]
struct FpPoint {
    cols: Vec<Vec<Fp>>,
}

impl FpPoint {
    fn random(k: usize, n: usize, rng: &mut ChaCha8Rng) -> FpPoint {
        FpPoint { cols: (0..n).map(|_| (0..k).map(|_| Fp(rng.gen_range(1..FINGERPRINT_PRIME))).collect()).collect() }
    }

    fn pluecker(&self, label: &[usize]) -> Fp {
        let k = label.len();
        fp_det((0..k).map(|r| label.iter().map(|&c| self.cols[c - 1][r]).collect()).collect())
    }

    /// Columns shifted by one with the twist (−1)^{k−1} on the wrapped column,
    /// so that P_I(shifted) = P_{I+1}(self).
    fn rotated(&self) -> FpPoint {
        let k = self.cols[0].len();
        let mut cols: Vec<Vec<Fp>> = self.cols[1..].to_vec();
        let first = self.cols[0].iter().map(|&x| if k % 2 == 0 { fp_sub(Fp(0), x) } else { x }).collect();
        cols.push(first);
        FpPoint { cols }
    }
}

/// Classification of one registry variable.
#[derive(Clone, Debug, Serialize)]
pub struct VariableTag {
    pub id: usize,
    /// Multiplicity of each column 1..n.
    pub content: Vec<i64>,
    pub degree: usize,
    pub label: Option<PlueckerLabel>,
    /// Columns of the distinguished tableau, for degree ≥ 2.
    pub tableau: Option<Vec<PlueckerLabel>>,
    /// Standard-monomial expansion: semistandard tableaux with coefficients.
    pub expansion: Vec<(Vec<PlueckerLabel>, i64)>,
    pub name: String,
}

/// A finite-type Grassmannian belt with every variable tagged by content.
#[derive(Clone, Debug)]
pub struct GrassmannianBelt {
    pub spec: GrassmannianSpec,
    pub belt: BipartiteBelt,
    /// Plücker labels of the input grid seed positions.
    pub grid_labels: Vec<PlueckerLabel>,
    pub tags: Vec<VariableTag>,
    /// Registry permutation induced by i ↦ i + 1.
    pub rotation: Vec<usize>,
    pub columns: Vec<WeightFunctional>,
    by_name: HashMap<String, usize>,
}

const TAG_SEED: u64 = 0x6772_6173_736d;

impl GrassmannianBelt {
    pub fn new(spec: GrassmannianSpec) -> Result<GrassmannianBelt> {
        let (e, grid_labels) = grid_seed_labelled(spec.k, spec.n)?;
        let belt = BipartiteBelt::from_exchange(&e)?;
        let alphas: Vec<Vec<Integer>> = (1..=spec.n)
            .map(|c| grid_labels.iter().map(|l| Integer::from(i64::from(l.contains(&c)))).collect())
            .collect();
        let columns = uvars::weight_tables(&belt, &alphas)?;
        let mut gb = GrassmannianBelt {
            spec,
            belt,
            grid_labels,
            tags: Vec::new(),
            rotation: Vec::new(),
            columns,
            by_name: HashMap::new(),
        };
        gb.tag_variables()?;
        gb.rotation = gb.rotation_permutation()?;
        for t in &gb.tags {
            gb.by_name.insert(t.name.clone(), t.id);
        }
        for (i, s) in gb.belt.names.iter().enumerate() {
            gb.by_name.entry(s.clone()).or_insert(i);
        }
        Ok(gb)
    }

    pub fn len(&self) -> usize {
        self.belt.len()
    }

    pub fn is_empty(&self) -> bool {
        self.belt.is_empty()
    }

    pub fn names(&self) -> Vec<String> {
        self.tags.iter().map(|t| t.name.clone()).collect()
    }

    pub fn evaluate(&self, point: &TotallyPositivePoint) -> Result<Vec<Rational>> {
        self.belt.evaluate_input(point.values(&self.grid_labels))
    }

    fn evaluate_fp(&self, point: &FpPoint) -> Result<Vec<Fp>> {
        self.belt.evaluate_input(self.grid_labels.iter().map(|l| point.pluecker(l)).collect())
    }

    fn tag_variables(&mut self) -> Result<()> {
        let (k, n) = (self.spec.k, self.spec.n);
        let len = self.belt.len();
        let contents: Vec<Vec<i64>> = (0..len)
            .map(|id| {
                self.columns
                    .iter()
                    .map(|w| i64::try_from(&w.weights[id]).map_err(|_| Error::Internal("column weight overflow".into())))
                    .collect::<Result<Vec<i64>>>()
            })
            .collect::<Result<_>>()?;
        let tp: Vec<Vec<Rational>> =
            (0..3).map(|s| self.evaluate(&tp_sample(k, n, TAG_SEED + s))).collect::<Result<_>>()?;
        let mut rng = ChaCha8Rng::seed_from_u64(TAG_SEED);
        let fp_points: Vec<FpPoint> = (0..40).map(|_| FpPoint::random(k, n, &mut rng)).collect();
        let fp_values: Vec<Vec<Fp>> = fp_points.iter().map(|p| self.evaluate_fp(p)).collect::<Result<_>>()?;
        let mut tags = Vec::with_capacity(len);
        for (id, content) in contents.into_iter().enumerate() {
            let total: i64 = content.iter().sum();
            if total <= 0 || total % k as i64 != 0 || content.iter().any(|&c| c < 0) {
                return Err(Error::Internal(format!("variable {id} has content {content:?}")));
            }
            let degree = (total / k as i64) as usize;
            let mut tag =
                VariableTag { id, content: content.clone(), degree, label: None, tableau: None, expansion: Vec::new(), name: String::new() };
            if degree == 1 {
                let label: PlueckerLabel = (1..=n).filter(|&c| content[c - 1] == 1).collect();
                let sample = |s: u64| tp_sample(k, n, TAG_SEED + s).pluecker(&label);
                if (0..3).any(|s| tp[s as usize][id] != sample(s)) {
                    return Err(Error::Internal(format!("variable {id} has a Plücker content but another value")));
                }
                tag.expansion = vec![(vec![label.clone()], 1)];
                tag.name = pluecker_name(&label);
                tag.label = Some(label);
            } else {
                let values: Vec<Fp> = fp_values.iter().map(|v| v[id]).collect();
                tag.expansion = standard_monomial_expansion(&content, k, &fp_points, &values)?;
                let t = distinguished_tableau(&tag.expansion)
                    .ok_or_else(|| Error::Internal(format!("variable {id} has no distinguished tableau")))?;
                tag.name = tableau_name(&t);
                tag.tableau = Some(t);
            }
            tags.push(tag);
        }
        let mut seen = HashMap::new();
        for t in &tags {
            if let Some(other) = seen.insert(t.name.clone(), t.id) {
                return Err(Error::Internal(format!("variables {other} and {} share the name {}", t.id, t.name)));
            }
        }
        self.tags = tags;
        Ok(())
    }

    fn rotation_permutation(&self) -> Result<Vec<usize>> {
        let mut rng = ChaCha8Rng::seed_from_u64(TAG_SEED ^ 0x5a5a);
        let pts: Vec<FpPoint> = (0..2).map(|_| FpPoint::random(self.spec.k, self.spec.n, &mut rng)).collect();
        let at: Vec<Vec<Fp>> = pts.iter().map(|p| self.evaluate_fp(p)).collect::<Result<_>>()?;
        let shifted: Vec<Vec<Fp>> = pts.iter().map(|p| self.evaluate_fp(&p.rotated())).collect::<Result<_>>()?;
        let key = |vals: &[Vec<Fp>], id: usize| (vals[0][id].0, vals[1][id].0);
        let index: HashMap<(u64, u64), usize> = (0..self.len()).map(|id| (key(&at, id), id)).collect();
        if index.len() != self.len() {
            return Err(Error::Internal("fingerprint collision while computing the rotation".into()));
        }
        let perm: Vec<usize> = (0..self.len())
            .map(|id| index.get(&key(&shifted, id)).copied())
            .collect::<Option<_>>()
            .ok_or_else(|| Error::Internal("rotation does not permute the cluster variables".into()))?;
        let mut check = perm.clone();
        check.sort();
        check.dedup();
        if check.len() != perm.len() {
            return Err(Error::Internal("rotation is not a permutation".into()));
        }
        Ok(perm)
    }

    /// Registry id of a name: `p[356]`, `p[124|356]`, or a belt name.
    pub fn resolve(&self, name: &str) -> Option<usize> {
        if let Some(&id) = self.by_name.get(name) {
            return Some(id);
        }
        let inner = name.strip_prefix("p[")?.strip_suffix(']')?;
        let cols = parse_tableau(inner)?;
        self.by_name.get(&tableau_name(&cols)).copied()
    }

    pub fn parse(&self, text: &str) -> Result<ParsedRatio> {
        expr::parse_ratio(text, self.len(), &|s| self.resolve(s))
    }

    pub fn render(&self, v: &[i64]) -> String {
        uvars::render_ratio(v, &self.names())
    }

    pub fn id_of_label(&self, label: &[usize]) -> Option<usize> {
        self.by_name.get(&pluecker_name(label)).copied()
    }

    pub fn pluecker_ids(&self) -> Vec<usize> {
        self.ids_of_degree_at_most(1)
    }

    pub fn ids_of_degree_at_most(&self, d: usize) -> Vec<usize> {
        self.tags.iter().filter(|t| t.degree <= d).map(|t| t.id).collect()
    }

    /// The vector w with w[ρ(id)] = v[id].
    pub fn rotate_vector(&self, v: &[i64]) -> Vec<i64> {
        let mut w = vec![0; v.len()];
        for (id, &e) in v.iter().enumerate() {
            w[self.rotation[id]] = e;
        }
        w
    }

    /// Partition of `vectors` into rotation orbits (indices, orbit order by
    /// first member).
    pub fn orbits(&self, vectors: &[Vec<i64>]) -> Result<Vec<Vec<usize>>> {
        let index: HashMap<&Vec<i64>, usize> = vectors.iter().enumerate().map(|(i, v)| (v, i)).collect();
        let mut orbit_of = vec![usize::MAX; vectors.len()];
        let mut out: Vec<Vec<usize>> = Vec::new();
        for start in 0..vectors.len() {
            if orbit_of[start] != usize::MAX {
                continue;
            }
            let mut orbit = vec![start];
            orbit_of[start] = out.len();
            let mut cur = vectors[start].clone();
            loop {
                cur = self.rotate_vector(&cur);
                let &i = index.get(&cur).ok_or_else(|| Error::Internal("rotation leaves the ray set".into()))?;
                if i == start {
                    break;
                }
                orbit_of[i] = out.len();
                orbit.push(i);
            }
            out.push(orbit);
        }
        Ok(out)
    }

    /// P_{i(j+1)S} P_{j(i+1)S} / (P_{ijS} P_{(i+1)(j+1)S}), indices mod n.
    pub fn primitive_ratio(&self, i: usize, j: usize, s: &[usize]) -> Result<RatioVector> {
        let n = self.spec.n;
        let next = |x: usize| x % n + 1;
        let mut all = vec![i, next(i), j, next(j)];
        all.extend_from_slice(s);
        let mut sorted = all.clone();
        sorted.sort();
        sorted.dedup();
        if sorted.len() != all.len() || all.iter().any(|&x| x == 0 || x > n) || s.len() + 2 != self.spec.k {
            return Err(Error::Contract(format!("indices {i}, {j}, {s:?} clash in Gr({},{n})", self.spec.k)));
        }
        let lab = |a: usize, b: usize| {
            let mut l = vec![a, b];
            l.extend_from_slice(s);
            l.sort();
            l
        };
        let mut v = vec![0i64; self.len()];
        for (l, e) in [(lab(i, next(j)), 1), (lab(j, next(i)), 1), (lab(i, j), -1), (lab(next(i), next(j)), -1)] {
            let id = self.id_of_label(&l).ok_or_else(|| Error::Internal(format!("no variable for {l:?}")))?;
            v[id] += e;
        }
        Ok(v)
    }

    /// Every primitive ratio once, sorted by vector.
    pub fn primitive_ratios(&self) -> Result<Vec<RatioVector>> {
        let n = self.spec.n;
        let next = |x: usize| x % n + 1;
        let mut out = Vec::new();
        for i in 1..=n {
            for j in i + 1..=n {
                if next(i) == j || next(j) == i {
                    continue;
                }
                let rest: Vec<usize> = (1..=n).filter(|&x| x != i && x != j && x != next(i) && x != next(j)).collect();
                for s in k_subsets(rest.len(), self.spec.k - 2) {
                    let s: Vec<usize> = s.iter().map(|&x| rest[x - 1]).collect();
                    out.push(self.primitive_ratio(i, j, &s)?);
                }
            }
        }
        out.sort();
        out.dedup();
        Ok(out)
    }
}

/// Semistandard tableaux (as column lists) with the given column content.
pub fn semistandard_tableaux(content: &[i64], k: usize) -> Vec<Vec<PlueckerLabel>> {
    fn rec(left: &mut Vec<i64>, k: usize, cols: &mut Vec<PlueckerLabel>, out: &mut Vec<Vec<PlueckerLabel>>) {
        if left.iter().all(|&c| c == 0) {
            out.push(cols.clone());
            return;
        }
        let avail: Vec<usize> = (0..left.len()).filter(|&c| left[c] > 0).map(|c| c + 1).collect();
        for pick in k_subsets(avail.len(), k) {
            let col: PlueckerLabel = pick.iter().map(|&x| avail[x - 1]).collect();
            if let Some(prev) = cols.last() {
                if col.iter().zip(prev).any(|(a, b)| a < b) {
                    continue;
                }
            }
            for &c in &col {
                left[c - 1] -= 1;
            }
            cols.push(col.clone());
            rec(left, k, cols, out);
            cols.pop();
            for &c in &col {
                left[c - 1] += 1;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut content.to_vec(), k, &mut Vec::new(), &mut out);
    out
}

/// Coefficients of a variable in the basis of standard monomials, solved
/// from its values at random points modulo the fingerprint prime.
fn standard_monomial_expansion(
    content: &[i64],
    k: usize,
    points: &[FpPoint],
    values: &[Fp],
) -> Result<Vec<(Vec<PlueckerLabel>, i64)>> {
    let tabs = semistandard_tableaux(content, k);
    let cols = tabs.len();
    if cols == 0 || cols + 3 > points.len() {
        return Err(Error::Internal(format!("{cols} standard monomials for content {content:?}")));
    }
    let mut rows: Vec<Vec<Fp>> = points
        .iter()
        .zip(values)
        .map(|(p, &val)| {
            let mut r: Vec<Fp> = tabs.iter().map(|t| t.iter().fold(Fp(1), |acc, c| acc.mul(&p.pluecker(c)))).collect();
            r.push(val);
            r
        })
        .collect();
    // Gauss–Jordan modulo p.
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..rows.len()).find(|&i| rows[i][c].0 != 0) else { continue };
        rows.swap(r, p);
        let inv = fp_inv(rows[r][c]);
        rows[r] = rows[r].iter().map(|x| x.mul(&inv)).collect();
        for i in 0..rows.len() {
            if i != r && rows[i][c].0 != 0 {
                let f = rows[i][c];
                let pr = rows[r].clone();
                for (x, y) in rows[i].iter_mut().zip(&pr) {
                    *x = fp_sub(*x, f.mul(y));
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    if pivots.len() != cols || rows[r..].iter().any(|row| row[cols].0 != 0) {
        return Err(Error::Internal(format!("no standard-monomial expansion for content {content:?}")));
    }
    let half = FINGERPRINT_PRIME / 2;
    let mut out = Vec::new();
    for (i, t) in tabs.into_iter().enumerate() {
        let x = rows[i][cols].0;
        let c = if x > half { -((FINGERPRINT_PRIME - x) as i64) } else { x as i64 };
        if c != 0 {
            out.push((t, c));
        }
    }
    Ok(out)
}

/// The tableau naming a variable: the lexicographically largest column list
/// among the terms of its expansion.
fn distinguished_tableau(expansion: &[(Vec<PlueckerLabel>, i64)]) -> Option<Vec<PlueckerLabel>> {
    expansion.iter().map(|(t, _)| t.clone()).max()
}

/// A subset cone with its rays grouped into rotation orbits.
#[derive(Clone, Debug, Serialize)]
pub struct OrbitCone {
    pub cone: ConeDescription,
    pub orbits: Vec<Vec<usize>>,
    /// Whether every ray is a primitive ratio; only decided for Gr(2,n) and
    /// Gr(3,6).
    pub all_primitive: Option<bool>,
}

/// The bounded cone restricted to Plücker coordinates.
pub fn pluecker_cone(gb: &GrassmannianBelt, u: &UMatrix) -> Result<OrbitCone> {
    let mut oc = subset_orbit_cone(gb, u, &gb.pluecker_ids())?;
    if gb.spec.k == 2 || (gb.spec.k, gb.spec.n) == (3, 6) {
        let prims = gb.primitive_ratios()?;
        oc.all_primitive = Some(oc.cone.rays.iter().all(|r| prims.binary_search(&r.vector).is_ok()));
    }
    Ok(oc)
}

/// The bounded cone restricted to variables of degree at most `dmax`.
pub fn degree_filtered_cone(gb: &GrassmannianBelt, u: &UMatrix, dmax: usize) -> Result<OrbitCone> {
    subset_orbit_cone(gb, u, &gb.ids_of_degree_at_most(dmax))
}

fn subset_orbit_cone(gb: &GrassmannianBelt, u: &UMatrix, subset: &[usize]) -> Result<OrbitCone> {
    let cone = cones::subset_cone(subset, u)?;
    let vectors: Vec<Vec<i64>> = cone.rays.iter().map(|r| r.vector.clone()).collect();
    let orbits = gb.orbits(&vectors)?;
    Ok(OrbitCone { cone, orbits, all_primitive: None })
}

/// Representative ratios with their u-factorizations, grouped by section.
pub const REPRESENTATIVES: &str = include_str!("../data/representatives.txt");

#[derive(Clone, Debug, Serialize)]
pub struct GoldenEntry {
    pub section: String,
    pub ratio: String,
    pub factors: Vec<String>,
}

pub fn parse_golden(text: &str) -> Result<Vec<GoldenEntry>> {
    let mut section = String::new();
    let mut out = Vec::new();
    for (no, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some(s) = line.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
            section = s.to_string();
            continue;
        }
        let (ratio, factors) =
            line.split_once(';').ok_or_else(|| Error::Parse { pos: no + 1, msg: "expected `ratio ; factors`".into() })?;
        out.push(GoldenEntry {
            section: section.clone(),
            ratio: ratio.trim().to_string(),
            factors: factors.split_whitespace().map(String::from).collect(),
        });
    }
    Ok(out)
}

/// Outcome of checking one [`GoldenEntry`].
#[derive(Clone, Debug, Serialize)]
pub struct GoldenCheck {
    pub entry: GoldenEntry,
    /// The listed u-variables multiply to the ratio.
    pub product_matches: bool,
    /// Membership returns exactly the listed u-variables as λ.
    pub lambda_matches: bool,
    /// The ratio is an extreme ray of the given cone.
    pub is_ray: bool,
}

impl GoldenCheck {
    pub fn passed(&self) -> bool {
        self.product_matches && self.lambda_matches && self.is_ray
    }
}

pub fn check_golden(gb: &GrassmannianBelt, u: &UMatrix, rays: &[Vec<i64>], entry: &GoldenEntry) -> Result<GoldenCheck> {
    let v = gb.parse(&entry.ratio)?.vector;
    let mut expected = vec![0i64; u.cols()];
    for f in &entry.factors {
        let id = gb.resolve(f).ok_or_else(|| Error::UnknownName { pos: 0, name: f.clone() })?;
        let col = u
            .uvars
            .iter()
            .position(|x| x.gamma == id)
            .ok_or_else(|| Error::Contract(format!("{f} is not a mutable variable")))?;
        expected[col] += 1;
    }
    let product: Vec<i64> = (0..u.rows()).map(|r| (0..u.cols()).map(|c| u.entries[r][c] * expected[c]).sum()).collect();
    let lambda_matches = u.solve(&v).is_some_and(|l| l.iter().zip(&expected).all(|(a, &b)| *a == Rational::from_integer(b.into())));
    Ok(GoldenCheck { entry: entry.clone(), product_matches: product == v, lambda_matches, is_ray: rays.contains(&v) })
}

/// Result of [`factor_into_primitives`].
#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum Factorization {
    /// Multiplicities of primitive ratios (indices into `primitive_ratios`).
    Primitives { terms: Vec<(usize, i64)> },
    Unbounded { certificate: Box<Certificate> },
    /// Bounded, but no primitive can be split off while staying bounded.
    Stuck { remainder: RatioVector },
}

/// Splits a bounded Plücker ratio into primitive ratios: repeatedly removes a
/// primitive whose quotient stays bounded.
pub fn factor_into_primitives(
    gb: &GrassmannianBelt,
    u: &UMatrix,
    tables: &[WeightFunctional],
    v: &[i64],
) -> Result<Factorization> {
    let pl = gb.pluecker_ids();
    if v.iter().enumerate().any(|(id, &e)| e != 0 && !pl.contains(&id)) {
        return Err(Error::Contract("ratio involves non-Plücker variables".into()));
    }
    let cert = cones::membership(v, u, tables, &gb.belt)?;
    if cert.verdict != Verdict::Bounded {
        return Ok(Factorization::Unbounded { certificate: Box::new(cert) });
    }
    let prims = gb.primitive_ratios()?;
    let prim_lambda: Vec<Vec<Rational>> =
        prims.iter().map(|p| u.solve(p).ok_or_else(|| Error::Internal("primitive outside the span".into()))).collect::<Result<_>>()?;
    let mut lambda = u.solve(v).expect("bounded ratios are in the span");
    let mut rest = v.to_vec();
    let mut counts = vec![0i64; prims.len()];
    while rest.iter().any(|&x| x != 0) {
        let next = prim_lambda
            .iter()
            .position(|pl| lambda.iter().zip(pl).all(|(a, b)| a >= b))
            .filter(|_| true);
        let Some(p) = next else { return Ok(Factorization::Stuck { remainder: rest }) };
        for (a, b) in lambda.iter_mut().zip(&prim_lambda[p]) {
            *a -= b;
        }
        for (a, b) in rest.iter_mut().zip(&prims[p]) {
            *a -= b;
        }
        counts[p] += 1;
    }
    Ok(Factorization::Primitives { terms: counts.into_iter().enumerate().filter(|(_, c)| *c != 0).collect() })
}

/// Rows P_ij with i < j − 1 and j ≥ 4 of the Gr(2,n) U-matrix, and the
/// determinant of that square minor.
pub fn staircase_minor(gb: &GrassmannianBelt, u: &UMatrix) -> Result<(Vec<usize>, Integer)> {
    if gb.spec.k != 2 {
        return Err(Error::Contract("the staircase minor is defined for Gr(2,n)".into()));
    }
    let n = gb.spec.n;
    let mut rows = Vec::new();
    for j in 4..=n {
        for i in 1..j - 1 {
            rows.push(gb.id_of_label(&[i, j]).ok_or_else(|| Error::Internal(format!("no variable p[{i}{j}]")))?);
        }
    }
    if rows.len() != u.cols() {
        return Err(Error::Internal(format!("staircase has {} rows for {} columns", rows.len(), u.cols())));
    }
    let sub: Vec<Vec<Integer>> = rows.iter().map(|&r| u.entries[r].iter().map(|&x| Integer::from(x)).collect()).collect();
    Ok((rows, linalg::det_bareiss(&sub)))
}

/// The stored Gr(4,8) representatives, one ratio per line.
pub const GR48_TABLE: &str = include_str!("../data/gr48.txt");

/// Parses Plücker ratios over the k-subsets of {1..n} in lexicographic order.
pub fn parse_pluecker_ratio(spec: GrassmannianSpec, text: &str) -> Result<RatioVector> {
    let labels = spec.labels();
    let index: HashMap<PlueckerLabel, usize> = labels.iter().cloned().enumerate().map(|(i, l)| (l, i)).collect();
    let resolve = |s: &str| {
        let inner = s.strip_prefix("p[")?.strip_suffix(']')?;
        let cols = parse_tableau(inner)?;
        (cols.len() == 1).then(|| index.get(&cols[0]).copied()).flatten()
    };
    Ok(expr::parse_ratio(text, labels.len(), &resolve)?.vector)
}

pub fn gr48_ratios() -> Result<Vec<RatioVector>> {
    let spec = GrassmannianSpec::any(4, 8)?;
    GR48_TABLE
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(|l| parse_pluecker_ratio(spec, l))
        .collect()
}

/// Images of Plücker ratios under rotations, reflection and complementation,
/// deduplicated and sorted.
pub fn dihedral_duality_closure(spec: GrassmannianSpec, ratios: &[RatioVector]) -> Vec<RatioVector> {
    let labels = spec.labels();
    let index: HashMap<PlueckerLabel, usize> = labels.iter().cloned().enumerate().map(|(i, l)| (l, i)).collect();
    let apply = |v: &RatioVector, f: &dyn Fn(&[usize]) -> PlueckerLabel| {
        let mut w = vec![0i64; v.len()];
        for (i, &e) in v.iter().enumerate() {
            if e != 0 {
                w[index[&f(&labels[i])]] += e;
            }
        }
        w
    };
    let mut out: Vec<RatioVector> = Vec::new();
    for v in ratios {
        let mut base = vec![v.clone(), apply(v, &|l| spec.complement(l))];
        base.extend(base.clone().iter().map(|w| apply(w, &|l| spec.reflect(l))));
        for mut w in base {
            for _ in 0..spec.n {
                out.push(w.clone());
                w = apply(&w, &|l| spec.rotate(l));
            }
        }
    }
    out.sort();
    out.dedup();
    out
}

#[derive(Clone, Debug, Serialize)]
pub struct SamplingReport {
    pub ratios: usize,
    pub images: usize,
    pub samples: usize,
    pub weight_zero: bool,
    /// Number of (ratio, point) pairs with value > 1.
    pub violations: usize,
    /// Exact maximum over all samples, as a fraction string.
    pub max: String,
    pub max_approx: f64,
    pub below_one: bool,
}

/// Weight-zero check under the n column functionals and exact evaluation at
/// `samples` Vandermonde points for every ratio, split over `jobs` threads.
///
/// Ratios of equal degree are invariant under scaling all t_j, so each point
/// is evaluated with the integer parameters D·t_j.
pub fn sample_ratios(spec: GrassmannianSpec, ratios: &[RatioVector], samples: usize, seed: u64, jobs: usize) -> SamplingReport {
    let labels = spec.labels();
    let weight_zero = ratios.iter().all(|v| spec.column_weights(&labels, v).iter().all(|&w| w == 0));
    let balanced = ratios.iter().all(|v| v.iter().sum::<i64>() == 0);
    let jobs = jobs.max(1).min(samples.max(1));
    let chunk = samples.div_ceil(jobs);
    let partial: Vec<(usize, Integer, Integer)> = std::thread::scope(|scope| {
        let handles: Vec<_> = (0..jobs)
            .map(|j| {
                let labels = &labels;
                scope.spawn(move || {
                    let mut best = (Integer::zero(), Integer::one());
                    let mut violations = 0;
                    for s in j * chunk..((j + 1) * chunk).min(samples) {
                        let p = tp_sample(spec.k, spec.n, seed.wrapping_add(s as u64));
                        let d = p.t.iter().fold(Integer::one(), |acc, t| num_integer::Integer::lcm(&acc, t.denom()));
                        let scaled = if balanced {
                            let t = p.t.iter().map(|t| Rational::from_integer((t * Rational::from_integer(d.clone())).to_integer())).collect();
                            TotallyPositivePoint { t, ..p }
                        } else {
                            p
                        };
                        let vals = scaled.values(labels);
                        let ints: Option<Vec<Integer>> =
                            balanced.then(|| vals.iter().map(|x| x.to_integer()).collect());
                        for v in ratios {
                            let (num, den) = match &ints {
                                Some(ints) => power_product(ints, v),
                                None => {
                                    let (a, b) = power_product(&vals, v);
                                    let r = a / b;
                                    (r.numer().clone(), r.denom().clone())
                                }
                            };
                            if num > den {
                                violations += 1;
                            }
                            if &num * &best.1 > &best.0 * &den {
                                best = (num, den);
                            }
                        }
                    }
                    (violations, best.0, best.1)
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("sampling thread panicked")).collect()
    });
    let mut max = Rational::zero();
    let mut violations = 0;
    for (v, a, b) in partial {
        violations += v;
        let r = Rational::new(a, b);
        if r > max {
            max = r;
        }
    }
    use num_traits::ToPrimitive;
    SamplingReport {
        ratios: ratios.len(),
        images: ratios.len(),
        samples,
        weight_zero,
        violations,
        max_approx: max.to_f64().unwrap_or(f64::NAN),
        below_one: max < Rational::one(),
        max: max.to_string(),
    }
}

/// (∏ x^e over e > 0, ∏ x^−e over e < 0).
fn power_product<T: Clone + One + for<'a> std::ops::MulAssign<&'a T>>(vals: &[T], v: &[i64]) -> (T, T) {
    let mut num = T::one();
    let mut den = T::one();
    for (x, &e) in vals.iter().zip(v) {
        for _ in 0..e.unsigned_abs() {
            if e > 0 {
                num *= x;
            } else {
                den *= x;
            }
        }
    }
    (num, den)
}

/// Checks the stored Gr(4,8) table and its dihedral/duality closure.
pub fn verify_gr48_table(samples: usize, seed: u64, jobs: usize) -> Result<SamplingReport> {
    let spec = GrassmannianSpec::any(4, 8)?;
    let base = gr48_ratios()?;
    let closure = dihedral_duality_closure(spec, &base);
    let mut report = sample_ratios(spec, &closure, samples, seed, jobs);
    report.ratios = base.len();
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(a: i64) -> Rational {
        Rational::from_integer(Integer::from(a))
    }

    #[test]
    fn vandermonde_minors_of_gr24() {
        let p = TotallyPositivePoint::new(2, (1..=4).map(q).collect()).unwrap();
        let want = [(vec![1, 2], 1), (vec![1, 3], 2), (vec![1, 4], 3), (vec![2, 3], 1), (vec![2, 4], 2), (vec![3, 4], 1)];
        for (l, v) in want {
            assert_eq!(p.pluecker(&l), q(v), "{l:?}");
        }
        // Plücker relation P13 P24 = P12 P34 + P14 P23.
        assert_eq!(p.pluecker(&[1, 3]) * p.pluecker(&[2, 4]), p.pluecker(&[1, 2]) * p.pluecker(&[3, 4]) + p.pluecker(&[1, 4]) * p.pluecker(&[2, 3]));
    }

    #[test]
    fn sample_points_are_totally_positive() {
        for seed in 0..10 {
            let p = tp_sample(3, 7, seed);
            assert!(k_subsets(7, 3).iter().all(|l| p.pluecker(l).is_positive()));
        }
    }

    #[test]
    fn names_round_trip() {
        assert_eq!(pluecker_name(&[1, 2, 4]), "p[124]");
        assert_eq!(pluecker_name(&[2, 9, 10]), "p[2,9,10]");
        let cols = vec![vec![1, 2, 4], vec![3, 5, 6]];
        assert_eq!(tableau_name(&cols), "p[124|356]");
        assert_eq!(parse_tableau("124|356").unwrap(), cols);
        assert_eq!(parse_tableau("2,9,10").unwrap(), vec![vec![2, 9, 10]]);
        assert!(parse_tableau("112").is_none());
    }

    #[test]
    fn dihedral_actions() {
        let s = GrassmannianSpec::any(3, 6).unwrap();
        assert_eq!(s.rotate(&[1, 2, 4]), vec![2, 3, 5]);
        assert_eq!(s.rotate(&[4, 5, 6]), vec![1, 5, 6]);
        assert_eq!(s.reflect(&[1, 2, 4]), vec![3, 5, 6]);
        assert_eq!(s.complement(&[1, 2, 4]), vec![3, 5, 6]);
        assert_eq!(k_subsets(5, 2).len(), 10);
        assert_eq!(k_subsets(5, 2)[0], vec![1, 2]);
        assert_eq!(k_subsets(5, 2)[9], vec![4, 5]);
    }

    #[test]
    fn finite_type_grassmannians_only() {
        assert!(GrassmannianSpec::new(3, 9).is_err());
        assert!(GrassmannianSpec::new(4, 8).is_err());
        assert!(GrassmannianSpec::new(2, 9).is_ok());
        assert_eq!(GrassmannianSpec::new(3, 8).unwrap().mutable_count(), 8);
    }

    #[test]
    fn standard_tableaux_count_by_hook_length() {
        // Content 1..6 once each, two columns of height 3: f^(2,2,2) = 5.
        assert_eq!(semistandard_tableaux(&[1, 1, 1, 1, 1, 1], 3).len(), 5);
        // One column: a single tableau.
        assert_eq!(semistandard_tableaux(&[1, 0, 1, 0, 1, 0], 3).len(), 1);
    }

    #[test]
    fn gr36_exotics_and_primitives() {
        let gb = GrassmannianBelt::new(GrassmannianSpec::new(3, 6).unwrap()).unwrap();
        let mut exotic: Vec<&str> = gb.tags.iter().filter(|t| t.degree == 2).map(|t| t.name.as_str()).collect();
        exotic.sort();
        assert_eq!(exotic, ["p[124|356]", "p[135|246]"]);
        assert_eq!(gb.primitive_ratios().unwrap().len(), 18);
        // Rotation is a permutation of order dividing n.
        let mut p: Vec<usize> = (0..gb.len()).collect();
        for _ in 0..6 {
            p = p.iter().map(|&i| gb.rotation[i]).collect();
        }
        assert_eq!(p, (0..gb.len()).collect::<Vec<_>>());
    }

    #[test]
    fn variable_census() {
        for (n, pl, deg2, deg3) in [(6, 14, 2, 0), (7, 28, 14, 0), (8, 48, 56, 24)] {
            let gb = GrassmannianBelt::new(GrassmannianSpec::new(3, n).unwrap()).unwrap();
            let mutable = &gb.tags[..gb.belt.num_mutable()];
            let count = |d: usize| mutable.iter().filter(|t| t.degree == d).count();
            assert_eq!((count(1), count(2), count(3)), (pl, deg2, deg3), "Gr(3,{n})");
            assert!(mutable.iter().filter(|t| t.degree == 1).all(|t| t.label.is_some()));
            assert!(gb.tags[gb.belt.num_mutable()..].iter().all(|t| t.degree == 1));
        }
    }

    #[test]
    fn pluecker_ratio_parsing() {
        let spec = GrassmannianSpec::any(4, 8).unwrap();
        let v = parse_pluecker_ratio(spec, "p[1234]*p[5678] / (p[1256]*p[3478])").unwrap();
        assert_eq!(v.iter().sum::<i64>(), 0);
        assert_eq!(v.iter().filter(|&&x| x != 0).count(), 4);
        assert!(parse_pluecker_ratio(spec, "p[1239]").is_err());
    }
}
