//! The bounded cone: U-matrix, membership certificates, subset cones by double
//! description, unimodular minors and subtraction-freeness.

use num_integer::Integer as _;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact_arith::{Integer, Rational};
use crate::finite_type::BipartiteBelt;
use crate::linalg::{self, QMatrix};
use crate::uvars::{self, DegenerationReport, RatioVector, UVariable, WeightFunctional};

/// Exponents of every registry variable (rows) in every u-variable (columns).
#[derive(Clone, Debug)]
pub struct UMatrix {
    pub entries: Vec<Vec<i64>>,
    pub uvars: Vec<UVariable>,
    /// False when the extended exchange matrix is rank deficient; cone answers
    /// then carry the note that the generators may not span.
    pub full_rank: bool,
    /// Rows I with U_I invertible, and U_I⁻¹.
    basis_rows: Vec<usize>,
    basis_inverse: QMatrix,
}

impl UMatrix {
    pub fn rows(&self) -> usize {
        self.entries.len()
    }

    pub fn cols(&self) -> usize {
        self.uvars.len()
    }

    pub fn column(&self, j: usize) -> &[i64] {
        &self.uvars[j].ratio
    }

    /// The unique λ with Uλ = v, or `None` if v is outside the column span.
    pub fn solve(&self, v: &[i64]) -> Option<Vec<Rational>> {
        let rhs: Vec<Rational> = self.basis_rows.iter().map(|&r| Rational::from_integer(v[r].into())).collect();
        let lambda = linalg::mat_vec(&self.basis_inverse, &rhs);
        let back = self.apply(&lambda);
        back.iter().zip(v).all(|(a, &b)| *a == Rational::from_integer(b.into())).then_some(lambda)
    }

    pub fn apply(&self, lambda: &[Rational]) -> Vec<Rational> {
        self.entries
            .iter()
            .map(|row| {
                row.iter()
                    .zip(lambda)
                    .filter(|(a, b)| **a != 0 && !b.is_zero())
                    .map(|(&a, b)| b * Rational::from_integer(a.into()))
                    .sum()
            })
            .collect()
    }
}

pub fn build_u_matrix(belt: &BipartiteBelt, us: &[UVariable]) -> Result<UMatrix> {
    let rows = belt.len();
    let entries: Vec<Vec<i64>> = (0..rows).map(|r| us.iter().map(|u| u.ratio[r]).collect()).collect();
    let (_, pivots) = linalg::rref(&linalg::to_q(&linalg::transpose(&entries)));
    if pivots.len() != us.len() {
        return Err(Error::NotFullRank);
    }
    let sub: Vec<Vec<i64>> = pivots.iter().map(|&r| entries[r].clone()).collect();
    let inv = linalg::inverse(&linalg::to_q(&sub)).ok_or_else(|| Error::Internal("basis rows are singular".into()))?;
    Ok(UMatrix { entries, uvars: us.to_vec(), full_rank: belt.input.is_full_rank(), basis_rows: pivots, basis_inverse: inv })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Bounded,
    Unbounded,
    NotWeightZero,
}

/// Evidence for a membership verdict; every field replays through
/// [`replay_certificate`].
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Certificate {
    pub verdict: Verdict,
    pub vector: RatioVector,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub lambda: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub alpha: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub weight: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub ray: Option<DegenerationReport>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub integral: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub proof_chain: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub note: Option<String>,
}

impl Certificate {
    fn new(verdict: Verdict, v: &[i64]) -> Certificate {
        Certificate {
            verdict,
            vector: v.to_vec(),
            lambda: None,
            alpha: None,
            weight: None,
            ray: None,
            integral: None,
            proof_chain: None,
            note: None,
        }
    }

    pub fn lambda_values(&self) -> Result<Option<Vec<Rational>>> {
        self.lambda
            .as_ref()
            .map(|l| {
                l.iter()
                    .map(|s| s.parse::<Rational>().map_err(|_| Error::Contract(format!("bad rational `{s}` in certificate"))))
                    .collect()
            })
            .transpose()
    }
}

const NOT_SPANNING: &str = "generators may not span";

/// Decides boundedness of the ratio v.
pub fn membership(v: &[i64], u: &UMatrix, tables: &[WeightFunctional], belt: &BipartiteBelt) -> Result<Certificate> {
    if v.len() != u.rows() {
        return Err(Error::Contract(format!("ratio has length {}, registry has {}", v.len(), u.rows())));
    }
    if let Some((alpha, w)) = uvars::check_weight_zero(v, tables) {
        let mut c = Certificate::new(Verdict::NotWeightZero, v);
        c.alpha = Some(alpha.iter().map(|a| a.to_string()).collect());
        c.weight = Some(w.to_string());
        return Ok(c);
    }
    let Some(lambda) = u.solve(v) else {
        // Weight zero but outside the span: only possible without full rank.
        let mut c = Certificate::new(Verdict::NotWeightZero, v);
        c.alpha = Some(separating_functional(u, v).iter().map(|a| a.to_string()).collect());
        c.note = Some("outside the span of the u-variables; alpha is a separating functional".into());
        return Ok(c);
    };
    let strs = lambda.iter().map(|l| l.to_string()).collect();
    if let Some(gamma) = lambda.iter().position(|l| l.is_negative()) {
        let mut c = Certificate::new(Verdict::Unbounded, v);
        c.lambda = Some(strs);
        if u.full_rank {
            c.ray = Some(uvars::degeneration_ray(belt, &u.uvars, gamma)?);
        } else {
            c.note = Some(NOT_SPANNING.into());
        }
        return Ok(c);
    }
    let mut c = Certificate::new(Verdict::Bounded, v);
    if !u.full_rank {
        c.note = Some(NOT_SPANNING.into());
    }
    let integral = lambda.iter().all(|l| l.is_integer());
    c.lambda = Some(strs);
    c.integral = Some(integral);
    if !integral {
        let d = lambda.iter().fold(Integer::one(), |acc, l| acc.lcm(l.denom()));
        c.note = Some(format!("bounded, non-integral u-factorization; the ratio raised to the power {d} factors integrally"));
    }
    Ok(c)
}

fn separating_functional(u: &UMatrix, v: &[i64]) -> Vec<Integer> {
    let ut = linalg::to_q(&linalg::transpose(&u.entries));
    for k in linalg::kernel(&ut, u.rows()) {
        let y = linalg::primitive(&k);
        let dot: Integer = y.iter().zip(v).map(|(a, &b)| a * Integer::from(b)).sum();
        if !dot.is_zero() {
            return y;
        }
    }
    Vec::new()
}

/// Re-derives the verdict of a certificate from scratch and compares the
/// evidence.
pub fn replay_certificate(c: &Certificate, u: &UMatrix, tables: &[WeightFunctional], belt: &BipartiteBelt) -> Result<bool> {
    let fresh = membership(&c.vector, u, tables, belt)?;
    if fresh.verdict != c.verdict {
        return Ok(false);
    }
    match c.verdict {
        Verdict::Bounded | Verdict::Unbounded => {
            let Some(lambda) = c.lambda_values()? else { return Ok(false) };
            let back = u.apply(&lambda);
            let exact = back.iter().zip(&c.vector).all(|(a, &b)| *a == Rational::from_integer(b.into()));
            Ok(exact && fresh.lambda == c.lambda)
        }
        Verdict::NotWeightZero => Ok(fresh.alpha == c.alpha),
    }
}

/// Subset of coordinates where a ray vanishes.
#[derive(Clone, Debug, PartialEq, Eq)]
struct ZeroSet(Vec<u64>);

impl ZeroSet {
    fn of(v: &[i64]) -> ZeroSet {
        let mut w = vec![0u64; v.len().div_ceil(64)];
        for (i, x) in v.iter().enumerate() {
            if *x == 0 {
                w[i / 64] |= 1 << (i % 64);
            }
        }
        ZeroSet(w)
    }

    fn meet(&self, o: &ZeroSet) -> ZeroSet {
        ZeroSet(self.0.iter().zip(&o.0).map(|(a, b)| a & b).collect())
    }

    fn count(&self) -> usize {
        self.0.iter().map(|w| w.count_ones() as usize).sum()
    }

    fn contains(&self, o: &ZeroSet) -> bool {
        self.0.iter().zip(&o.0).all(|(a, b)| a & b == *b)
    }
}

/// Extreme rays of {λ ≥ 0, Mλ = 0} as primitive integer vectors, sorted
/// lexicographically. Constraints are added one row at a time; two rays are
/// combined when no third ray vanishes wherever both do.
pub fn double_description(m: &[Vec<i64>], dim: usize) -> Result<Vec<Vec<i64>>> {
    let overflow = || Error::Internal("double description entry overflow".into());
    let mut rays: Vec<(Vec<i64>, ZeroSet)> = (0..dim)
        .map(|i| {
            let v: Vec<i64> = (0..dim).map(|j| i64::from(i == j)).collect();
            let z = ZeroSet::of(&v);
            (v, z)
        })
        .collect();
    let mut done: Vec<Vec<i64>> = Vec::new();
    for row in m {
        if row.iter().all(|&x| x == 0) {
            continue;
        }
        let rank = linalg::rank_i64(&done);
        done.push(row.clone());
        let mut vals = Vec::with_capacity(rays.len());
        for (v, _) in &rays {
            let mut s: i128 = 0;
            for (a, b) in row.iter().zip(v) {
                s = s.checked_add(*a as i128 * *b as i128).ok_or_else(overflow)?;
            }
            vals.push(s);
        }
        let pos: Vec<usize> = (0..rays.len()).filter(|&r| vals[r] > 0).collect();
        let neg: Vec<usize> = (0..rays.len()).filter(|&r| vals[r] < 0).collect();
        let need = dim.saturating_sub(2 + rank);
        let mut next: Vec<(Vec<i64>, ZeroSet)> = (0..rays.len()).filter(|&r| vals[r] == 0).map(|r| rays[r].clone()).collect();
        for &p in &pos {
            for &q in &neg {
                let z = rays[p].1.meet(&rays[q].1);
                if z.count() < need {
                    continue;
                }
                let adjacent = rays
                    .iter()
                    .enumerate()
                    .all(|(r, (_, zr))| r == p || r == q || !zr.contains(&z));
                if !adjacent {
                    continue;
                }
                let (a, b) = (vals[p], -vals[q]);
                let mut v = Vec::with_capacity(dim);
                for (x, y) in rays[q].0.iter().zip(&rays[p].0) {
                    let c = (a.checked_mul(*x as i128).ok_or_else(overflow)?)
                        .checked_add(b.checked_mul(*y as i128).ok_or_else(overflow)?)
                        .ok_or_else(overflow)?;
                    v.push(c);
                }
                let g = v.iter().fold(0i128, |g, x| g.gcd(x));
                let v: Vec<i64> = v.iter().map(|x| i64::try_from(x / g).map_err(|_| overflow())).collect::<Result<_>>()?;
                let z = ZeroSet::of(&v);
                next.push((v, z));
            }
        }
        rays = next;
    }
    let mut out: Vec<Vec<i64>> = rays.into_iter().map(|(v, _)| v).collect();
    out.sort();
    out.dedup();
    Ok(out)
}

/// Oracle for [`double_description`]: every column subset whose restricted
/// kernel is a line spanned by a positive vector.
pub fn brute_force_rays(m: &[Vec<i64>], dim: usize) -> Vec<Vec<i64>> {
    let mut out = Vec::new();
    for mask in 1u64..(1 << dim) {
        let cols: Vec<usize> = (0..dim).filter(|&j| mask >> j & 1 == 1).collect();
        let sub: Vec<Vec<i64>> = m.iter().map(|r| cols.iter().map(|&j| r[j]).collect()).collect();
        let ker = if sub.is_empty() {
            if cols.len() == 1 {
                vec![vec![Rational::one()]]
            } else {
                continue;
            }
        } else {
            linalg::kernel(&linalg::to_q(&sub), cols.len())
        };
        if ker.len() != 1 {
            continue;
        }
        let k = linalg::primitive(&ker[0]);
        let sign = if k.iter().all(|x| x.is_positive()) {
            1
        } else if k.iter().all(|x| x.is_negative()) {
            -1
        } else {
            continue;
        };
        let mut v = vec![0i64; dim];
        for (&j, x) in cols.iter().zip(&k) {
            v[j] = sign * i64::try_from(x).expect("small entries");
        }
        out.push(v);
    }
    out.sort();
    out.dedup();
    out
}

#[derive(Clone, Debug, Serialize)]
pub struct ConeRay {
    /// Primitive ratio vector over the registry.
    pub vector: RatioVector,
    /// Its u-factorization.
    pub lambda: Vec<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConeDescription {
    pub subset: Vec<usize>,
    pub rays: Vec<ConeRay>,
}

impl ConeRay {
    pub fn lambda_values(&self) -> Vec<Rational> {
        self.lambda.iter().map(|s| s.parse().expect("canonical rational")).collect()
    }
}

/// Extreme rays of the bounded cone restricted to the span of `subset`.
pub fn subset_cone(subset: &[usize], u: &UMatrix) -> Result<ConeDescription> {
    let mut inside = vec![false; u.rows()];
    for &s in subset {
        inside[s] = true;
    }
    let m: Vec<Vec<i64>> = (0..u.rows()).filter(|&r| !inside[r]).map(|r| u.entries[r].clone()).collect();
    let lambdas = double_description(&m, u.cols())?;
    let mut rays = Vec::with_capacity(lambdas.len());
    for l in lambdas {
        let lq: Vec<Rational> = l.iter().map(|&x| Rational::from_integer(x.into())).collect();
        let v: Vec<Integer> = u.apply(&lq).iter().map(|x| x.to_integer()).collect();
        let g = v.iter().fold(Integer::zero(), |g, x| g.gcd(x));
        let vector: Vec<i64> = v
            .iter()
            .map(|x| i64::try_from(x / &g).map_err(|_| Error::Internal("ray entry overflow".into())))
            .collect::<Result<_>>()?;
        let gq = Rational::from_integer(g);
        let lambda = lq.iter().map(|x| (x / &gq).to_string()).collect();
        rays.push(ConeRay { vector, lambda });
    }
    rays.sort_by(|a, b| a.vector.cmp(&b.vector));
    let mut subset = subset.to_vec();
    subset.sort();
    Ok(ConeDescription { subset, rays })
}

/// Rows I with det U_I = ±1 and the integer inverse of U_I.
#[derive(Clone, Debug)]
pub struct UnimodularMinor {
    pub rows: Vec<usize>,
    pub det: Integer,
    pub inverse: Vec<Vec<Integer>>,
}

impl UnimodularMinor {
    /// λ = U_I⁻¹ v_I.
    pub fn factor(&self, v: &[i64]) -> Vec<Integer> {
        let vi: Vec<Integer> = self.rows.iter().map(|&r| Integer::from(v[r])).collect();
        linalg::mat_vec_z(&self.inverse, &vi)
    }
}

/// Greedy ±1 pivoting over the rows of `u` (rows × cols, full column rank).
/// Several deterministic row orders are tried; `None` is not a proof that no
/// unimodular minor exists.
pub fn unimodular_minor_search(u: &[Vec<i64>]) -> Option<UnimodularMinor> {
    let rows = u.len();
    let mut orders: Vec<Vec<usize>> = vec![(0..rows).collect(), (0..rows).rev().collect()];
    let mut state: u64 = 0x9e37_79b9_7f4a_7c15;
    for _ in 0..30 {
        let mut o: Vec<usize> = (0..rows).collect();
        for i in (1..rows).rev() {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            o.swap(i, (state % (i as u64 + 1)) as usize);
        }
        orders.push(o);
    }
    orders.into_iter().find_map(|o| greedy_minor(u, &o)).and_then(|rows| certify_minor(u, rows))
}

fn greedy_minor(u: &[Vec<i64>], order: &[usize]) -> Option<Vec<usize>> {
    let cols = u.first().map_or(0, |r| r.len());
    let mut w: Vec<Vec<i128>> = u.iter().map(|r| r.iter().map(|&x| x as i128).collect()).collect();
    let mut used_row = vec![false; u.len()];
    let mut used_col = vec![false; cols];
    let mut chosen = Vec::with_capacity(cols);
    for _ in 0..cols {
        // Sparsest unused row that has a ±1 in an unused column.
        let mut best: Option<(usize, usize, usize)> = None;
        for &r in order {
            if used_row[r] {
                continue;
            }
            let nz = (0..cols).filter(|&c| !used_col[c] && w[r][c] != 0).count();
            if let Some(c) = (0..cols).find(|&c| !used_col[c] && w[r][c].abs() == 1) {
                if best.is_none_or(|b| nz < b.2) {
                    best = Some((r, c, nz));
                }
            }
        }
        let (r, c, _) = best?;
        used_row[r] = true;
        used_col[c] = true;
        chosen.push(r);
        let pivot = w[r].clone();
        let s = pivot[c];
        for (i, row) in w.iter_mut().enumerate() {
            if used_row[i] || row[c] == 0 {
                continue;
            }
            let f = row[c] * s;
            for (x, y) in row.iter_mut().zip(&pivot) {
                *x = x.checked_sub(f.checked_mul(*y)?)?;
            }
        }
    }
    chosen.sort();
    Some(chosen)
}

fn certify_minor(u: &[Vec<i64>], rows: Vec<usize>) -> Option<UnimodularMinor> {
    let sub: Vec<Vec<i64>> = rows.iter().map(|&r| u[r].clone()).collect();
    let det = linalg::det_bareiss(&linalg::to_z(&sub));
    if det.abs() != Integer::one() {
        return None;
    }
    let inv = linalg::inverse(&linalg::to_q(&sub))?;
    let inverse = inv.iter().map(|r| r.iter().map(|x| x.to_integer()).collect()).collect();
    Some(UnimodularMinor { rows, det, inverse })
}

/// Outcome of [`subtraction_free_check`].
#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum SubtractionFree {
    /// Telescoping proof from nonnegative integer λ.
    ProofChain { steps: Vec<String> },
    /// Expansion of denominator − numerator in the reference cluster.
    Expansion { difference: String, nonnegative: bool, positive_terms: usize, negative_terms: usize },
}

/// Proof chain for integral λ, otherwise the sign pattern of den − num
/// expanded in the cluster of the reference seed.
pub fn subtraction_free_check(cert: &Certificate, belt: &BipartiteBelt, us: &[UVariable]) -> Result<SubtractionFree> {
    if cert.verdict != Verdict::Bounded {
        return Err(Error::Contract("subtraction-freeness is only checked for bounded ratios".into()));
    }
    let lambda = cert.lambda_values()?.ok_or_else(|| Error::Contract("certificate lacks λ".into()))?;
    if lambda.iter().all(|l| l.is_integer()) {
        let names = &belt.names;
        let mut steps = Vec::new();
        let mut acc: Vec<String> = Vec::new();
        for (g, l) in lambda.iter().enumerate() {
            let times: usize = l.to_integer().try_into().unwrap_or(0);
            if times == 0 {
                continue;
            }
            let gamma = us[g].gamma;
            let (inc, _) = belt.exchange_vectors(gamma);
            let inc_text = uvars::render_ratio(&inc, names);
            steps.push(format!(
                "u({}) = {}: denominator - numerator = {} by the exchange relation",
                names[gamma],
                uvars::render_ratio(&us[g].ratio, names),
                inc_text
            ));
            for _ in 0..times {
                if !acc.is_empty() {
                    steps.push(format!(
                        "({}) * u({}): bd - ac = b(d - c) + c(b - a) with a/b the product so far and c/d = u({})",
                        acc.join(" * "),
                        names[gamma],
                        names[gamma]
                    ));
                }
                acc.push(format!("u({})", names[gamma]));
            }
        }
        if acc.is_empty() {
            steps.push("the ratio is 1".into());
        }
        return Ok(SubtractionFree::ProofChain { steps });
    }
    let forms = belt.laurent_forms()?;
    let (num, den) = uvars::ratio_fraction(&cert.vector, forms);
    let diff = &den - &num;
    let (p, n) = diff.sign_profile();
    let var_names: Vec<String> = (0..forms[0].nvars()).map(|i| belt.names[belt.ids[0][i]].clone()).collect();
    Ok(SubtractionFree::Expansion {
        difference: diff.display_with(&var_names),
        nonnegative: diff.is_coefficient_nonnegative(),
        positive_terms: p,
        negative_terms: n,
    })
}
