//! Exchange matrices, seeds, Y-seeds and their mutations.
//!
//! Matrix convention: `b[i][j] > 0` iff there are arrows `i → j`. Mutable
//! indices come first (`0..n`), frozen ones after (`n..n+m`).

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact_arith::{Integer, LaurentPolynomial};
use crate::linalg;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ExchangeData {
    pub n: usize,
    pub m: usize,
    /// Full (n+m)×(n+m) matrix. Frozen-frozen entries are carried along but never read.
    pub b: Vec<Vec<i64>>,
    /// Symmetrizer weights for all n+m indices; the frozen ones only matter for
    /// reading quiver files.
    pub weights: Vec<i64>,
    pub names: Vec<String>,
}

fn pos(x: i64) -> i64 {
    x.max(0)
}

fn negp(x: i64) -> i64 {
    (-x).max(0)
}

impl ExchangeData {
    pub fn new(n: usize, m: usize, b: Vec<Vec<i64>>, weights: Vec<i64>, names: Vec<String>) -> Result<Self> {
        let t = n + m;
        if b.len() != t || b.iter().any(|r| r.len() != t) || weights.len() != t || names.len() != t {
            return Err(Error::Contract("exchange data dimensions disagree".into()));
        }
        if weights.iter().any(|&w| w <= 0) {
            return Err(Error::Contract("symmetrizer weights must be positive".into()));
        }
        let e = ExchangeData { n, m, b, weights, names };
        e.check_skew_symmetrizable()?;
        Ok(e)
    }

    /// Square exchange matrix without frozen part, default names `x1..xn`.
    pub fn from_matrix(b: Vec<Vec<i64>>, weights: Vec<i64>) -> Result<Self> {
        let n = b.len();
        let names = (1..=n).map(|i| format!("x{i}")).collect();
        Self::new(n, 0, b, weights, names)
    }

    pub fn size(&self) -> usize {
        self.n + self.m
    }

    pub fn is_frozen(&self, i: usize) -> bool {
        i >= self.n
    }

    pub fn check_skew_symmetrizable(&self) -> Result<()> {
        for i in 0..self.n {
            if self.b[i][i] != 0 {
                return Err(Error::Contract(format!("nonzero diagonal entry at {i}")));
            }
            for j in 0..self.n {
                if self.weights[i] * self.b[i][j] != -self.weights[j] * self.b[j][i] {
                    return Err(Error::Contract(format!(
                        "W·B is not skew-symmetric at ({}, {})",
                        self.names[i], self.names[j]
                    )));
                }
            }
        }
        Ok(())
    }

    /// The n×(n+m) extended exchange matrix B̃.
    pub fn extended(&self) -> Vec<Vec<i64>> {
        self.b[..self.n].to_vec()
    }

    /// The n×n principal part.
    pub fn principal(&self) -> Vec<Vec<i64>> {
        self.b[..self.n].iter().map(|r| r[..self.n].to_vec()).collect()
    }

    pub fn mutate(&self, k: usize) -> Result<ExchangeData> {
        if k >= self.n {
            return Err(Error::Contract(format!("cannot mutate at frozen or out-of-range index {k}")));
        }
        let t = self.size();
        let mut b = self.b.clone();
        for i in 0..t {
            for j in 0..t {
                b[i][j] = if i == k || j == k {
                    -self.b[i][j]
                } else {
                    let (bik, bkj) = (self.b[i][k], self.b[k][j]);
                    let d = pos(bik) * pos(bkj) - negp(bik) * negp(bkj);
                    self.b[i][j].checked_add(d).expect("exchange matrix entry overflow")
                };
            }
        }
        Ok(ExchangeData { n: self.n, m: self.m, b, weights: self.weights.clone(), names: self.names.clone() })
    }

    pub fn extended_rank(&self) -> usize {
        linalg::rank_i64(&self.extended())
    }

    pub fn is_full_rank(&self) -> bool {
        self.extended_rank() == self.n
    }

    /// Lattice basis of the right kernel of B̃ (vectors of length n+m).
    pub fn kernel_basis(&self) -> Vec<Vec<Integer>> {
        linalg::integer_kernel_i64(&self.extended(), self.size())
    }

    /// Sources and sinks of the mutable part (an isolated node is both).
    pub fn is_source(&self, i: usize) -> bool {
        (0..self.n).all(|j| self.b[i][j] >= 0)
    }

    pub fn is_sink(&self, i: usize) -> bool {
        (0..self.n).all(|j| self.b[i][j] <= 0)
    }

    pub fn is_bipartite(&self) -> bool {
        (0..self.n).all(|i| self.is_source(i) || self.is_sink(i))
    }

    pub fn from_quiver(q: &QuiverFile) -> Result<ExchangeData> {
        let mut order: Vec<usize> = (0..q.nodes.len()).filter(|&i| !q.nodes[i].frozen).collect();
        let n = order.len();
        order.extend((0..q.nodes.len()).filter(|&i| q.nodes[i].frozen));
        let m = order.len() - n;
        let mut index = HashMap::new();
        for (p, &i) in order.iter().enumerate() {
            if index.insert(q.nodes[i].name.clone(), p).is_some() {
                return Err(Error::SeedFile(format!("duplicate node name `{}`", q.nodes[i].name)));
            }
        }
        let weights: Vec<i64> = order.iter().map(|&i| q.nodes[i].weight.unwrap_or(1)).collect();
        let names: Vec<String> = order.iter().map(|&i| q.nodes[i].name.clone()).collect();
        let t = n + m;
        let mut b = vec![vec![0i64; t]; t];
        let lookup = |s: &str| index.get(s).copied().ok_or_else(|| Error::SeedFile(format!("unknown node `{s}`")));
        for a in &q.arrows {
            let (f, to) = (lookup(&a.from)?, lookup(&a.to)?);
            if f == to {
                return Err(Error::SeedFile(format!("loop at `{}`", a.from)));
            }
            let back = a.mult * weights[f];
            if back % weights[to] != 0 {
                return Err(Error::SeedFile(format!(
                    "arrow {}→{} of multiplicity {} is incompatible with the node weights",
                    a.from, a.to, a.mult
                )));
            }
            b[f][to] += a.mult;
            b[to][f] -= back / weights[to];
        }
        ExchangeData::new(n, m, b, weights, names)
    }

    pub fn to_quiver(&self) -> QuiverFile {
        let nodes = (0..self.size())
            .map(|i| QuiverNode { name: self.names[i].clone(), frozen: self.is_frozen(i), weight: Some(self.weights[i]) })
            .collect();
        let mut arrows = Vec::new();
        for i in 0..self.size() {
            for j in 0..self.size() {
                if self.b[i][j] > 0 && !(self.is_frozen(i) && self.is_frozen(j)) {
                    arrows.push(QuiverArrow { from: self.names[i].clone(), to: self.names[j].clone(), mult: self.b[i][j] });
                }
            }
        }
        QuiverFile { nodes, arrows }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct QuiverNode {
    pub name: String,
    #[serde(default)]
    pub frozen: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weight: Option<i64>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct QuiverArrow {
    pub from: String,
    pub to: String,
    #[serde(default = "one")]
    pub mult: i64,
}

fn one() -> i64 {
    1
}

/// On-disk seed description.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct QuiverFile {
    pub nodes: Vec<QuiverNode>,
    pub arrows: Vec<QuiverArrow>,
}

impl QuiverFile {
    pub fn from_json(text: &str) -> Result<QuiverFile> {
        Ok(serde_json::from_str(text)?)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Seed {
    pub exchange: ExchangeData,
    /// Current cluster in the fixed initial variables (universe size n+m).
    pub cluster: Vec<LaurentPolynomial>,
    pub history: Vec<usize>,
}

impl Seed {
    /// The initial seed: cluster entry i is the variable x_i.
    pub fn initial(exchange: ExchangeData) -> Seed {
        let t = exchange.size();
        let cluster = (0..t).map(|i| LaurentPolynomial::var(t, i)).collect();
        Seed { exchange, cluster, history: Vec::new() }
    }

    pub fn n(&self) -> usize {
        self.exchange.n
    }

    /// The two monomials of the exchange relation at k: (incoming, outgoing).
    pub fn exchange_monomials(&self, k: usize) -> (LaurentPolynomial, LaurentPolynomial) {
        let t = self.exchange.size();
        let mut inc = LaurentPolynomial::one(t);
        let mut out = LaurentPolynomial::one(t);
        for j in 0..t {
            let bkj = self.exchange.b[k][j];
            if bkj > 0 {
                out = &out * &self.cluster[j].pow(bkj as u32);
            } else if bkj < 0 {
                inc = &inc * &self.cluster[j].pow((-bkj) as u32);
            }
        }
        (inc, out)
    }

    pub fn mutate(&self, k: usize) -> Result<Seed> {
        let exchange = self.exchange.mutate(k)?;
        let (inc, out) = self.exchange_monomials(k);
        let new = (&inc + &out).divide_exact(&self.cluster[k]).map_err(|e| {
            Error::Internal(format!("exchange relation at {k} is not Laurent ({e})"))
        })?;
        let mut cluster = self.cluster.clone();
        cluster[k] = new;
        let mut history = self.history.clone();
        history.push(k);
        Ok(Seed { exchange, cluster, history })
    }

    pub fn mutate_sequence(&self, ks: &[usize]) -> Result<Seed> {
        let mut s = self.clone();
        for &k in ks {
            s = s.mutate(k)?;
        }
        Ok(s)
    }

    /// y_i = ∏_j x_j^{B̃_ij} over the current cluster: exponent rows.
    pub fn y_exponents(&self) -> Vec<Vec<i64>> {
        self.exchange.extended()
    }

    /// y_i as a fraction of Laurent polynomials in the initial variables.
    pub fn y_to_x(&self) -> Vec<Fraction> {
        let t = self.exchange.size();
        (0..self.n())
            .map(|i| {
                let mut num = LaurentPolynomial::one(t);
                let mut den = LaurentPolynomial::one(t);
                for j in 0..t {
                    let e = self.exchange.b[i][j];
                    if e > 0 {
                        num = &num * &self.cluster[j].pow(e as u32);
                    } else if e < 0 {
                        den = &den * &self.cluster[j].pow((-e) as u32);
                    }
                }
                Fraction { num, den }
            })
            .collect()
    }
}

/// Unreduced quotient of Laurent polynomials.
#[derive(Clone, Debug)]
pub struct Fraction {
    pub num: LaurentPolynomial,
    pub den: LaurentPolynomial,
}

impl Fraction {
    pub fn new(num: LaurentPolynomial, den: LaurentPolynomial) -> Result<Fraction> {
        if den.is_zero() {
            return Err(Error::Contract("zero denominator".into()));
        }
        Ok(Fraction { num, den })
    }

    pub fn from_poly(p: LaurentPolynomial) -> Fraction {
        let den = LaurentPolynomial::one(p.nvars());
        Fraction { num: p, den }
    }

    pub fn same_value(&self, other: &Fraction) -> bool {
        &self.num * &other.den == &other.num * &self.den
    }

    pub fn recip(&self) -> Fraction {
        Fraction { num: self.den.clone(), den: self.num.clone() }
    }

    pub fn mul(&self, other: &Fraction) -> Fraction {
        Fraction { num: &self.num * &other.num, den: &self.den * &other.den }
    }

    pub fn pow(&self, e: u32) -> Fraction {
        Fraction { num: self.num.pow(e), den: self.den.pow(e) }
    }

    // Drops a common factor when one side divides the other exactly.
    fn tidy(self) -> Fraction {
        if self.den.len() > 1 {
            if let Ok(q) = self.num.divide_exact(&self.den) {
                return Fraction::from_poly(q);
            }
        }
        self
    }
}

#[derive(Clone, Debug)]
pub struct YSeed {
    pub exchange: ExchangeData,
    pub yvars: Vec<Fraction>,
}

impl YSeed {
    pub fn new(exchange: ExchangeData, yvars: Vec<Fraction>) -> Result<YSeed> {
        if yvars.len() != exchange.n {
            return Err(Error::Contract("one y-variable per mutable index".into()));
        }
        Ok(YSeed { exchange, yvars })
    }

    pub fn from_seed(s: &Seed) -> YSeed {
        YSeed { exchange: s.exchange.clone(), yvars: s.y_to_x() }
    }

    pub fn mutate(&self, k: usize) -> Result<YSeed> {
        let exchange = self.exchange.mutate(k)?;
        let yk = &self.yvars[k];
        let sum = &yk.num + &yk.den;
        let mut yvars = Vec::with_capacity(self.yvars.len());
        for (i, yi) in self.yvars.iter().enumerate() {
            if i == k {
                yvars.push(yk.recip());
                continue;
            }
            let bik = self.exchange.b[i][k];
            let f = if bik > 0 {
                // (1 + y_k^{-1})^{-b} = (y_k / (1 + y_k))^b
                Fraction { num: yk.num.clone(), den: sum.clone() }.pow(bik as u32)
            } else {
                Fraction { num: sum.clone(), den: yk.den.clone() }.pow((-bik) as u32)
            };
            yvars.push(yi.mul(&f).tidy());
        }
        Ok(YSeed { exchange, yvars })
    }
}
