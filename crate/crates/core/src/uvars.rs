//! Torus weights, u-variables, degeneration rays and the u-equations.

use num_integer::Integer as _;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact_arith::{pow_rat, Integer, LaurentPolynomial, Rational};
use crate::finite_type::{BipartiteBelt, ClusterValue, Fp, Grading};
use crate::linalg;
use crate::seeds::{Fraction, YSeed};

/// Exponent vector over the registry (N mutable ids, then m frozen).
pub type RatioVector = Vec<i64>;

/// Torus weights of every registry variable for one kernel vector α of the
/// input seed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeightFunctional {
    pub alpha: Vec<Integer>,
    pub weights: Vec<Integer>,
}

impl WeightFunctional {
    pub fn weight_of(&self, v: &[i64]) -> Integer {
        self.weights.iter().zip(v).map(|(w, &e)| w * Integer::from(e)).sum()
    }
}

/// Weights for several kernel vectors at once. Each α is indexed by the
/// positions of the input seed.
pub fn weight_tables(belt: &BipartiteBelt, alphas: &[Vec<Integer>]) -> Result<Vec<WeightFunctional>> {
    let size = belt.input.size();
    if alphas.iter().any(|a| a.len() != size) {
        return Err(Error::Contract(format!("kernel vectors must have length {size}")));
    }
    let start: Vec<Grading> = (0..size).map(|i| Grading(alphas.iter().map(|a| a[i].clone()).collect())).collect();
    let not_kernel = |_| Error::Contract("weight vector is not in the kernel of the extended exchange matrix".into());
    let reference = belt.reference_values(start).map_err(not_kernel)?;
    let all = belt.evaluate(reference.clone()).map_err(not_kernel)?;
    if let Some(forms) = &belt.laurent {
        // Every term of a Laurent form must carry the tracked weight.
        for (id, p) in forms.iter().enumerate() {
            for t in 0..p.len() {
                let e = p.exponent(t);
                let deg = e.iter().zip(&reference).fold(Grading(vec![Integer::zero(); alphas.len()]), |acc, (&x, g)| {
                    acc.mul(&Grading(g.0.iter().map(|w| w * Integer::from(x)).collect()))
                });
                if deg != all[id] {
                    return Err(Error::Contract(format!("variable {} is not homogeneous", belt.names[id])));
                }
            }
        }
    }
    Ok(alphas
        .iter()
        .enumerate()
        .map(|(r, a)| WeightFunctional { alpha: a.clone(), weights: all.iter().map(|g| g.0[r].clone()).collect() })
        .collect())
}

pub fn weight_table(belt: &BipartiteBelt, alpha: &[Integer]) -> Result<WeightFunctional> {
    Ok(weight_tables(belt, &[alpha.to_vec()])?.remove(0))
}

/// Weights for a lattice basis of the kernel of the input seed's extended
/// exchange matrix.
pub fn kernel_weights(belt: &BipartiteBelt) -> Result<Vec<WeightFunctional>> {
    weight_tables(belt, &belt.input.kernel_basis())
}

/// `None` when v has weight zero for every table, otherwise a violating α
/// and the weight it assigns.
pub fn check_weight_zero(v: &[i64], tables: &[WeightFunctional]) -> Option<(Vec<Integer>, Integer)> {
    tables.iter().find_map(|t| {
        let w = t.weight_of(v);
        (!w.is_zero()).then(|| (t.alpha.clone(), w))
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct UVariable {
    pub gamma: usize,
    /// x_γ', the variable replacing x_γ at its source.
    pub partner: usize,
    pub root: Vec<i64>,
    /// Out-neighbour product over x_γ x_γ'.
    pub ratio: RatioVector,
    /// (belt seed, position) of the source occurrence.
    pub source: (usize, usize),
}

/// The ratio v_γ = ∏ out / (x_γ x_γ') for every mutable variable, after
/// checking the exchange relation x_γ x_γ' = ∏ in + ∏ out.
pub fn u_variables(belt: &BipartiteBelt) -> Result<Vec<UVariable>> {
    let mut out = Vec::with_capacity(belt.num_mutable());
    for gamma in 0..belt.num_mutable() {
        let partner = belt.partner(gamma);
        let (inc, outm) = belt.exchange_vectors(gamma);
        check_exchange(belt, gamma, partner, &inc, &outm)?;
        let mut ratio = outm;
        ratio[gamma] -= 1;
        ratio[partner] -= 1;
        out.push(UVariable { gamma, partner, root: belt.roots[gamma].clone(), ratio, source: belt.source_of[gamma] });
    }
    Ok(out)
}

fn check_exchange(belt: &BipartiteBelt, gamma: usize, partner: usize, inc: &[i64], outm: &[i64]) -> Result<()> {
    let fail = || Error::Internal(format!("exchange relation of {} fails", belt.names[gamma]));
    let points = belt.fingerprints[0].len();
    for p in 0..points {
        let vals: Vec<Fp> = belt.fingerprints.iter().map(|f| f[p]).collect();
        let lhs = vals[gamma].mul(&vals[partner]);
        let rhs = monomial_value(inc, &vals).add(&monomial_value(outm, &vals)).unwrap();
        if lhs != rhs {
            return Err(fail());
        }
    }
    if let Some(forms) = &belt.laurent {
        let lhs = &forms[gamma] * &forms[partner];
        if lhs != &monomial_value(inc, forms) + &monomial_value(outm, forms) {
            return Err(fail());
        }
    }
    Ok(())
}

fn monomial_value<V: ClusterValue>(e: &[i64], vals: &[V]) -> V {
    let mut acc = vals[0].one_like();
    for (v, &x) in vals.iter().zip(e) {
        if x > 0 {
            acc = acc.mul(&v.pow(x as u32));
        }
    }
    acc
}

/// Value of a ratio given values of every registry variable.
pub fn ratio_value(v: &[i64], values: &[Rational]) -> Rational {
    v.iter()
        .zip(values)
        .filter(|(e, _)| **e != 0)
        .fold(Rational::one(), |acc, (&e, x)| acc * pow_rat(x, e))
}

/// A ratio as `num/den` over Laurent forms.
pub fn ratio_fraction(v: &[i64], forms: &[LaurentPolynomial]) -> (LaurentPolynomial, LaurentPolynomial) {
    let nv = forms[0].nvars();
    let mut num = LaurentPolynomial::one(nv);
    let mut den = LaurentPolynomial::one(nv);
    for (p, &e) in forms.iter().zip(v) {
        if e > 0 {
            num = &num * &p.pow(e as u32);
        } else if e < 0 {
            den = &den * &p.pow((-e) as u32);
        }
    }
    (num, den)
}

/// `a*b^2/(c*d)` style rendering.
pub fn render_ratio(v: &[i64], names: &[String]) -> String {
    let part = |sign: i64| -> Vec<String> {
        v.iter()
            .enumerate()
            .filter(|(_, &e)| e * sign > 0)
            .map(|(i, &e)| if e * sign == 1 { names[i].clone() } else { format!("{}^{}", names[i], e * sign) })
            .collect()
    };
    let (num, den) = (part(1), part(-1));
    let top = if num.is_empty() { "1".to_string() } else { num.join("*") };
    match den.len() {
        0 => top,
        1 => format!("{top}/{}", den[0]),
        _ => format!("{top}/({})", den.join("*")),
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DegenerationRow {
    pub t: String,
    pub v_gamma: String,
    pub min_other: String,
}

/// A one-parameter family of positive points along which v_γ → 0.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DegenerationReport {
    pub gamma: usize,
    /// Belt seed whose cluster carries the family.
    pub seed: usize,
    /// Solution of B̃β = e_i in that seed.
    pub beta: Vec<String>,
    /// The family is x_j = s^{scale·β_j}, so y_γ = s^scale.
    pub scale: i64,
    pub table: Vec<DegenerationRow>,
    pub decays: bool,
    pub others_bounded: bool,
}

/// Dyadic parameters used by degeneration reports.
pub fn dyadic_parameters() -> Vec<Rational> {
    (1..=10).map(|k| Rational::new(Integer::one(), Integer::one() << k)).collect()
}

pub fn degeneration_ray(belt: &BipartiteBelt, us: &[UVariable], gamma: usize) -> Result<DegenerationReport> {
    let (t, i) = belt.source_of[gamma];
    let e = belt.exchange_at(t);
    let bt = linalg::to_q(&e.extended());
    let rhs: Vec<Rational> = (0..e.n).map(|r| if r == i { Rational::one() } else { Rational::zero() }).collect();
    let beta = linalg::solve(&bt, &rhs).ok_or(Error::NotFullRank)?;
    let scale = beta.iter().fold(Integer::one(), |acc, b| acc.lcm(b.denom()));
    let scale_i: i64 = scale.clone().try_into().map_err(|_| Error::Internal("degeneration scale overflow".into()))?;
    let exps: Vec<i64> = beta
        .iter()
        .map(|b| (b * Rational::from_integer(scale.clone())).to_integer().try_into().unwrap_or(i64::MAX))
        .collect();
    let mut table = Vec::new();
    let mut vg = Vec::new();
    let mut mins = Vec::new();
    for s in dyadic_parameters() {
        let start: Vec<Rational> = exps.iter().map(|&x| pow_rat(&s, x)).collect();
        let vals = belt.evaluate_at_seed(t, start)?;
        let vs: Vec<Rational> = us.iter().map(|u| ratio_value(&u.ratio, &vals)).collect();
        let g = vs[gamma].clone();
        let m = vs
            .iter()
            .enumerate()
            .filter(|(w, _)| *w != gamma)
            .map(|(_, v)| v.clone())
            .min()
            .unwrap_or_else(Rational::one);
        table.push(DegenerationRow { t: s.to_string(), v_gamma: g.to_string(), min_other: m.to_string() });
        vg.push(g);
        mins.push(m);
    }
    let decays = vg.windows(2).all(|w| w[1] < w[0]) && &vg[vg.len() - 1] * Rational::from_integer(Integer::from(32)) < vg[0];
    // Other u-variables converge to positive limits: the last two samples agree
    // up to a factor of 2.
    let n = mins.len();
    let others_bounded = mins.iter().all(|m| m.is_positive())
        && &mins[n - 1] * Rational::from_integer(Integer::from(2)) > mins[n - 2]
        && &mins[n - 2] * Rational::from_integer(Integer::from(2)) > mins[n - 1];
    Ok(DegenerationReport {
        gamma,
        seed: t,
        beta: beta.iter().map(|b| b.to_string()).collect(),
        scale: scale_i,
        table,
        decays,
        others_bounded,
    })
}

/// The u-equation of γ: exponents (ω‖γ) over all ω ≠ γ.
pub fn u_equation_exponents(compat: &[Vec<i64>], gamma: usize) -> Vec<i64> {
    (0..compat.len()).map(|w| if w == gamma { 0 } else { compat[w][gamma] }).collect()
}

/// Checks u_γ + ∏_{ω≠γ} u_ω^{(ω‖γ)} = 1 as an identity of Laurent
/// polynomials after clearing denominators. Returns the failing γ's.
pub fn verify_u_equations(belt: &BipartiteBelt, us: &[UVariable]) -> Result<Vec<usize>> {
    let forms = belt.laurent_forms()?;
    let compat = belt.compatibility_matrix()?;
    let mut failed = Vec::new();
    for gamma in 0..us.len() {
        let (a, b) = ratio_fraction(&us[gamma].ratio, forms);
        let prod = product_ratio(us, &u_equation_exponents(&compat, gamma));
        let (c, d) = ratio_fraction(&prod, forms);
        if &a * &d + &c * &b != &b * &d {
            failed.push(gamma);
        }
    }
    Ok(failed)
}

/// Same identity checked by exact evaluation at a point (values of every
/// registry variable).
pub fn verify_u_equations_at(compat: &[Vec<i64>], us: &[UVariable], values: &[Rational]) -> Vec<usize> {
    (0..us.len())
        .filter(|&g| {
            let prod = product_ratio(us, &u_equation_exponents(compat, g));
            ratio_value(&us[g].ratio, values) + ratio_value(&prod, values) != Rational::one()
        })
        .collect()
}

/// The y-variable at the source position of every mutable variable, as a
/// Laurent polynomial in p_1..p_n, where p_i = y_i when i is a source of S_0
/// and p_i = 1/y_i when it is a sink. Indexed by registry id; the
/// denominator vector of the result is itself a root, in general not the
/// root of that id.
pub fn y_laurent_forms(belt: &BipartiteBelt) -> Result<Vec<LaurentPolynomial>> {
    let n = belt.n();
    let s0 = belt.reference();
    let yvars = (0..n)
        .map(|i| {
            let p = LaurentPolynomial::var(n, i);
            let one = LaurentPolynomial::one(n);
            if s0.is_source(i) { Fraction::new(p, one) } else { Fraction::new(one, p) }
        })
        .collect::<Result<Vec<_>>>()?;
    let mut ys = YSeed::new(s0.clone(), yvars)?;
    let mut out: Vec<Option<LaurentPolynomial>> = vec![None; belt.num_mutable()];
    for t in 0..belt.period() {
        for &i in &belt.sources[t] {
            let id = belt.id_at(t, i);
            if out[id].is_none() {
                let y = &ys.yvars[i];
                let q = y.num.divide_exact(&y.den).map_err(|e| {
                    Error::Internal(format!("Y-variable of {} is not Laurent ({e})", belt.names[id]))
                })?;
                out[id] = Some(q);
            }
        }
        for &i in &belt.sources[t] {
            ys = ys.mutate(i)?;
        }
    }
    out.into_iter()
        .enumerate()
        .map(|(id, y)| y.ok_or_else(|| Error::Internal(format!("{} is never a source", belt.names[id]))))
        .collect()
}

/// Whether N has constant term 1, writing p = N/m with m the smallest
/// monomial dividing every term.
pub fn has_unit_constant_term(p: &LaurentPolynomial) -> bool {
    p.coeff_of(&p.min_exponents()).is_one()
}

/// ∑ λ_γ v_γ as a ratio vector.
pub fn product_ratio(us: &[UVariable], lambda: &[i64]) -> RatioVector {
    let len = us.first().map_or(0, |u| u.ratio.len());
    let mut v = vec![0i64; len];
    for (u, &l) in us.iter().zip(lambda) {
        if l != 0 {
            for (x, y) in v.iter_mut().zip(&u.ratio) {
                *x += l * y;
            }
        }
    }
    v
}
