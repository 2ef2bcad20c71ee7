//! Symbolic rates: polynomials over species multiplicities, constrained by
//! intervals, and bounds on their ratios.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::alts::{AbsMultInfo, AbstractTransition};
use crate::concrete::Reactants;
use crate::domain::{Interval, Upper};
use crate::model::Name;

/// A factor of a monomial: the multiplicity of a species, or that
/// multiplicity minus one (truncated at zero).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Factor {
    Var(Name),
    Pred(Name),
}

impl Factor {
    pub fn name(&self) -> &Name {
        match self {
            Factor::Var(x) | Factor::Pred(x) => x,
        }
    }

    fn eval(&self, v: u64) -> u64 {
        match self {
            Factor::Var(_) => v,
            Factor::Pred(_) => v.saturating_sub(1),
        }
    }
}

/// Product of factors with positive exponents.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Monomial(BTreeMap<Factor, u32>);

impl Monomial {
    pub fn one() -> Self {
        Self::default()
    }

    pub fn of(factors: impl IntoIterator<Item = Factor>) -> Self {
        let mut m = Monomial::one();
        for f in factors {
            *m.0.entry(f).or_insert(0) += 1;
        }
        m
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let mut out = self.clone();
        for (f, e) in &other.0 {
            *out.0.entry(f.clone()).or_insert(0) += e;
        }
        out
    }

    pub fn variables(&self) -> impl Iterator<Item = &Name> {
        self.0.keys().map(Factor::name)
    }
}

/// Polynomial with nonnegative rational coefficients. Every factor is
/// nondecreasing in its species, so the polynomial is monotone in every
/// variable.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct Polynomial(BTreeMap<Monomial, BigRational>);

/// A value in `[0, ∞]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Extended {
    Finite(BigRational),
    Infinite,
}

impl Extended {
    pub fn is_zero(&self) -> bool {
        matches!(self, Extended::Finite(x) if x.is_zero())
    }

    pub fn is_positive(&self) -> bool {
        !self.is_zero()
    }
}

/// Integer assignment to species variables.
pub type Valuation = BTreeMap<Name, u64>;

impl Polynomial {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn term(coeff: BigRational, monomial: Monomial) -> Self {
        let mut p = Polynomial::zero();
        p.add_term(coeff, monomial);
        p
    }

    fn add_term(&mut self, coeff: BigRational, monomial: Monomial) {
        assert!(coeff >= BigRational::zero(), "coefficients are nonnegative");
        if coeff.is_zero() {
            return;
        }
        let c = self.0.entry(monomial).or_insert_with(BigRational::zero);
        *c += coeff;
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn add(&self, other: &Polynomial) -> Polynomial {
        let mut out = self.clone();
        for (m, c) in &other.0 {
            out.add_term(c.clone(), m.clone());
        }
        out
    }

    pub fn mul(&self, other: &Polynomial) -> Polynomial {
        let mut out = Polynomial::zero();
        for (m1, c1) in &self.0 {
            for (m2, c2) in &other.0 {
                out.add_term(c1 * c2, m1.mul(m2));
            }
        }
        out
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &BigRational)> {
        self.0.iter()
    }

    pub fn variables(&self) -> Vec<Name> {
        let mut vs: Vec<Name> = self.0.keys().flat_map(|m| m.variables().cloned()).collect();
        vs.sort();
        vs.dedup();
        vs
    }

    /// Value at an integer point; every variable must be assigned.
    pub fn eval(&self, v: &Valuation) -> BigRational {
        self.0
            .iter()
            .map(|(m, c)| {
                let prod = m.0.iter().fold(BigInt::one(), |acc, (f, e)| {
                    let x = v.get(f.name()).copied().expect("variable is assigned");
                    acc * num_traits::pow(BigInt::from(f.eval(x)), *e as usize)
                });
                c * BigRational::from_integer(prod)
            })
            .sum()
    }

    /// Value at the corner where each variable takes `corner(name)`.
    pub fn eval_extended(&self, corner: impl Fn(&Name) -> Upper) -> Extended {
        let mut total = BigRational::zero();
        let mut infinite = false;
        for (m, c) in &self.0 {
            let mut prod = BigInt::one();
            let mut unbounded = false;
            for (f, e) in &m.0 {
                match corner(f.name()) {
                    Upper::Finite(x) => {
                        prod *= num_traits::pow(BigInt::from(f.eval(x)), *e as usize)
                    }
                    Upper::Infinity => unbounded = true,
                }
            }
            if prod.is_zero() {
                continue;
            }
            if unbounded {
                infinite = true;
            } else {
                total += c * BigRational::from_integer(prod);
            }
        }
        if infinite {
            Extended::Infinite
        } else {
            Extended::Finite(total)
        }
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "0");
        }
        for (k, (m, c)) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, " + ")?;
            }
            let mut parts = Vec::new();
            if !c.is_one() || m.0.is_empty() {
                parts.push(c.to_string());
            }
            for (fac, e) in &m.0 {
                let base = match fac {
                    Factor::Var(x) => x.to_string(),
                    Factor::Pred(x) => format!("({x}-1)"),
                };
                parts.push(if *e == 1 { base } else { format!("{base}^{e}") });
            }
            write!(f, "{}", parts.join("*"))?;
        }
        Ok(())
    }
}

/// `(e, c)`: a rate expression with interval constraints on its variables.
/// Terms in `maybe_absent` belong to moves that may not be taken towards
/// the target at hand; they count as 0 for the minimum and in full for the
/// maximum.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SymbolicRate {
    pub expr: Polynomial,
    pub maybe_absent: Polynomial,
    pub constraints: BTreeMap<Name, Interval>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("transitions with the same label have different rate expressions: `{left}` and `{right}`")]
pub struct InconsistentMerge {
    pub left: String,
    pub right: String,
}

/// Joins constraints per variable.
pub fn constraint_union(
    c1: &BTreeMap<Name, Interval>,
    c2: &BTreeMap<Name, Interval>,
) -> BTreeMap<Name, Interval> {
    let mut out = c1.clone();
    for (x, i) in c2 {
        out.entry(x.clone())
            .and_modify(|j| *j = j.join(i))
            .or_insert(*i);
    }
    out
}

impl SymbolicRate {
    pub fn zero() -> Self {
        Self::default()
    }

    /// The full expression, present or not.
    pub fn total(&self) -> Polynomial {
        self.expr.add(&self.maybe_absent)
    }

    /// Moves all terms to the may-be-absent part.
    pub fn zeroed(&self) -> SymbolicRate {
        SymbolicRate {
            expr: Polynomial::zero(),
            maybe_absent: self.total(),
            constraints: self.constraints.clone(),
        }
    }

    /// Largest value over the constraint box.
    pub fn max(&self) -> Extended {
        let c = &self.constraints;
        self.total()
            .eval_extended(|x| c.get(x).map_or(Upper::Finite(0), |i| i.hi()))
    }

    /// Smallest value over the constraint box; absent terms count as 0.
    pub fn min(&self) -> BigRational {
        let c = &self.constraints;
        match self
            .expr
            .eval_extended(|x| Upper::Finite(c.get(x).map_or(0, |i| i.lo())))
        {
            Extended::Finite(v) => v,
            Extended::Infinite => unreachable!("lower corner is finite"),
        }
    }
}

/// `rate°(t̂)`.
pub fn sym_rate(t: &AbstractTransition) -> SymbolicRate {
    let r = t.rate_param.clone();
    let (mono, constraints) = match (&t.reactants, &t.delta) {
        (Reactants::One(x), AbsMultInfo::Single(i)) => {
            (Monomial::of([Factor::Var(x.clone())]), vec![(x, *i)])
        }
        (Reactants::Two(x, y), AbsMultInfo::Pair(i, _)) if x == y => (
            Monomial::of([Factor::Var(x.clone()), Factor::Pred(x.clone())]),
            vec![(x, *i)],
        ),
        (Reactants::Two(x, y), AbsMultInfo::Pair(i, j)) => (
            Monomial::of([Factor::Var(x.clone()), Factor::Var(y.clone())]),
            vec![(x, *i), (y, *j)],
        ),
        _ => unreachable!("arity of Δ̂ matches the reactants"),
    };
    SymbolicRate {
        expr: Polynomial::term(r, mono),
        maybe_absent: Polynomial::zero(),
        constraints: constraints
            .into_iter()
            .map(|(x, i)| (x.clone(), i))
            .collect(),
    }
}

/// `(e₁,c₁) +° (e₂,c₂)`.
pub fn sym_add(a: &SymbolicRate, b: &SymbolicRate) -> SymbolicRate {
    SymbolicRate {
        expr: a.expr.add(&b.expr),
        maybe_absent: a.maybe_absent.add(&b.maybe_absent),
        constraints: constraint_union(&a.constraints, &b.constraints),
    }
}

/// Merge of rates that share a label: one expression, joined constraints.
pub fn sym_merge(a: &SymbolicRate, b: &SymbolicRate) -> Result<SymbolicRate, InconsistentMerge> {
    if a.expr != b.expr || a.maybe_absent != b.maybe_absent {
        return Err(InconsistentMerge {
            left: a.total().to_string(),
            right: b.total().to_string(),
        });
    }
    Ok(SymbolicRate {
        expr: a.expr.clone(),
        maybe_absent: a.maybe_absent.clone(),
        constraints: constraint_union(&a.constraints, &b.constraints),
    })
}

/// Enclosure of a ratio of symbolic rates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RatioBounds {
    pub lo: BigRational,
    pub hi: BigRational,
    /// Every valuation was enumerated, so both ends are attained.
    pub exhaustive: bool,
}

/// Box of valuations used by [`bound_ratio`]: the denominator's constraints,
/// narrowed to the numerator's own constraint on every variable of the
/// numerator's always-present part.
pub fn ratio_box(num: &SymbolicRate, den: &SymbolicRate) -> Option<BTreeMap<Name, Interval>> {
    let mut bx = num.constraints.clone();
    bx.extend(den.constraints.iter().map(|(x, i)| (x.clone(), *i)));
    for x in num.expr.variables() {
        let own = num.constraints.get(&x).copied().unwrap_or(Interval::ZERO);
        let narrowed = bx.get(&x).copied().unwrap_or(own).meet(&own)?;
        bx.insert(x, narrowed);
    }
    Some(bx)
}

fn box_size(bx: &BTreeMap<Name, Interval>) -> Option<u128> {
    bx.values().try_fold(1u128, |acc, i| {
        i.width().map(|w| acc.saturating_mul(w as u128))
    })
}

/// Bounds on `num(v) / den(v)` over integer valuations `v` with
/// `den(v) > 0`. Exhaustive when the box has at most `enum_cap` points,
/// otherwise corner arithmetic. Always within `[0,1]`.
pub fn bound_ratio(num: &SymbolicRate, den: &SymbolicRate, enum_cap: usize) -> RatioBounds {
    let zero = || RatioBounds {
        lo: BigRational::zero(),
        hi: BigRational::zero(),
        exhaustive: true,
    };
    if num.total().is_zero() {
        return zero();
    }
    let Some(bx) = ratio_box(num, den) else {
        return zero();
    };
    match box_size(&bx) {
        Some(n) if n <= enum_cap as u128 => enumerate_ratio(num, den, &bx),
        _ => corner_ratio(num, den, &bx),
    }
}

fn enumerate_ratio(
    num: &SymbolicRate,
    den: &SymbolicRate,
    bx: &BTreeMap<Name, Interval>,
) -> RatioBounds {
    let sure = &num.expr;
    let total = num.total();
    let axes: Vec<(&Name, Vec<u64>)> = bx.iter().map(|(x, i)| (x, i.points().collect())).collect();
    let mut lo: Option<BigRational> = None;
    let mut hi: Option<BigRational> = None;
    let mut idx = vec![0usize; axes.len()];
    'outer: loop {
        let v: Valuation = axes
            .iter()
            .zip(&idx)
            .map(|((x, pts), &k)| ((*x).clone(), pts[k]))
            .collect();
        let d = den.total().eval(&v);
        if !d.is_zero() {
            let a = sure.eval(&v) / &d;
            let b = total.eval(&v) / &d;
            if lo.as_ref().is_none_or(|l| a < *l) {
                lo = Some(a);
            }
            if hi.as_ref().is_none_or(|h| b > *h) {
                hi = Some(b);
            }
        }
        let mut k = axes.len();
        loop {
            if k == 0 {
                break 'outer;
            }
            k -= 1;
            idx[k] += 1;
            if idx[k] < axes[k].1.len() {
                break;
            }
            idx[k] = 0;
        }
    }
    let one = BigRational::one();
    let clip = |x: BigRational| if x > one { one.clone() } else { x };
    RatioBounds {
        lo: clip(lo.unwrap_or_else(BigRational::zero)),
        hi: clip(hi.unwrap_or_else(BigRational::zero)),
        exhaustive: true,
    }
}

fn corner_ratio(
    num: &SymbolicRate,
    den: &SymbolicRate,
    bx: &BTreeMap<Name, Interval>,
) -> RatioBounds {
    let low = |x: &Name| Upper::Finite(bx.get(x).map_or(0, |i| i.lo()));
    let high = |x: &Name| bx.get(x).map_or(Upper::Finite(0), |i| i.hi());
    let den_total = den.total();
    let num_min = num.expr.eval_extended(low);
    let num_max = num.total().eval_extended(high);
    let den_min = den_total.eval_extended(low);
    let den_max = den_total.eval_extended(high);
    let one = BigRational::one();
    let lo = match (&num_min, &den_max) {
        (Extended::Finite(n), Extended::Finite(d)) if !d.is_zero() => n / d,
        _ => BigRational::zero(),
    };
    let hi = match (&num_max, &den_min) {
        (Extended::Finite(n), Extended::Finite(d)) if !d.is_zero() => n / d,
        _ => one.clone(),
    };
    RatioBounds {
        lo: lo.min(one.clone()),
        hi: hi.min(one),
        exhaustive: false,
    }
}
