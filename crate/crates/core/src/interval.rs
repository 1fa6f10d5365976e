//! Interval arithmetic over exact decimals, plus the bounded-term /
//! bounded-expression machinery used to evaluate enclosures of the
//! trigonometric expressions that appear in the map derivative.
//!
//! Addition, subtraction, and multiplication of intervals are exact
//! (no rounding is ever required), so containment is unconditional.

use crate::dec::Dec;

/// Closed interval `[lb, ub]` with exact decimal endpoints.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Interval {
    lb: Dec,
    ub: Dec,
}

impl Interval {
    pub fn new(lb: Dec, ub: Dec) -> Interval {
        assert!(lb <= ub, "interval endpoints out of order");
        Interval { lb, ub }
    }

    pub fn point(v: Dec) -> Interval {
        Interval { lb: v.clone(), ub: v }
    }

    pub fn from_f64(lo: f64, hi: f64) -> Interval {
        Interval::new(Dec::from_f64_exact(lo), Dec::from_f64_exact(hi))
    }

    pub fn lb(&self) -> &Dec {
        &self.lb
    }

    pub fn ub(&self) -> &Dec {
        &self.ub
    }

    pub fn width(&self) -> Dec {
        &self.ub - &self.lb
    }

    pub fn contains(&self, v: &Dec) -> bool {
        &self.lb <= v && v <= &self.ub
    }

    pub fn contains_interval(&self, other: &Interval) -> bool {
        self.lb <= other.lb && other.ub <= self.ub
    }

    /// Largest absolute value attained on the interval.
    pub fn abs_ub(&self) -> Dec {
        Dec::max(&self.lb.abs(), &self.ub.abs())
    }

    /// Widen both endpoints outward by `eps >= 0`.
    pub fn widen(&self, eps: &Dec) -> Interval {
        Interval { lb: &self.lb - eps, ub: &self.ub + eps }
    }

    pub fn add(&self, other: &Interval) -> Interval {
        Interval { lb: &self.lb + &other.lb, ub: &self.ub + &other.ub }
    }

    pub fn sub(&self, other: &Interval) -> Interval {
        Interval { lb: &self.lb - &other.ub, ub: &self.ub - &other.lb }
    }

    pub fn neg(&self) -> Interval {
        Interval { lb: -&self.ub, ub: -&self.lb }
    }

    pub fn mul(&self, other: &Interval) -> Interval {
        let cands = [
            &self.lb * &other.lb,
            &self.lb * &other.ub,
            &self.ub * &other.lb,
            &self.ub * &other.ub,
        ];
        let mut lo = cands[0].clone();
        let mut hi = cands[0].clone();
        for c in &cands[1..] {
            if c < &lo {
                lo = c.clone();
            }
            if c > &hi {
                hi = c.clone();
            }
        }
        Interval { lb: lo, ub: hi }
    }

    pub fn mul_scalar(&self, s: &Dec) -> Interval {
        if s.is_negative() {
            Interval { lb: &self.ub * s, ub: &self.lb * s }
        } else {
            Interval { lb: &self.lb * s, ub: &self.ub * s }
        }
    }

    pub fn add_scalar(&self, s: &Dec) -> Interval {
        Interval { lb: &self.lb + s, ub: &self.ub + s }
    }

    /// Tight enclosure of x^2 over the interval (never negative).
    pub fn square(&self) -> Interval {
        let a = &self.lb * &self.lb;
        let b = &self.ub * &self.ub;
        if self.contains(&Dec::zero()) {
            Interval { lb: Dec::zero(), ub: Dec::max(&a, &b) }
        } else {
            Interval { lb: Dec::min(&a, &b), ub: Dec::max(&a, &b) }
        }
    }

    pub fn hull(&self, other: &Interval) -> Interval {
        Interval {
            lb: Dec::min(&self.lb, &other.lb),
            ub: Dec::max(&self.ub, &other.ub),
        }
    }
}

/// One product term `coef * factor_1 * ... * factor_k` of a bounded expression.
#[derive(Clone, Debug)]
pub struct BoundedTerm {
    coef: Dec,
    factors: Vec<Interval>,
    bound: Interval,
}

impl BoundedTerm {
    pub fn new(coef: Dec, factors: Vec<Interval>) -> BoundedTerm {
        let mut bound = Interval::point(coef.clone());
        for f in &factors {
            bound = bound.mul(f);
        }
        BoundedTerm { coef, factors, bound }
    }

    pub fn bound(&self) -> &Interval {
        &self.bound
    }

    pub fn coef(&self) -> &Dec {
        &self.coef
    }

    pub fn factors(&self) -> &[Interval] {
        &self.factors
    }
}

/// `constant + sum of terms`, with a cached enclosure.
#[derive(Clone, Debug)]
pub struct BoundedExpr {
    constant: Dec,
    terms: Vec<BoundedTerm>,
    bound: Interval,
}

impl BoundedExpr {
    pub fn new(constant: Dec, terms: Vec<BoundedTerm>) -> BoundedExpr {
        let mut bound = Interval::point(constant.clone());
        for t in &terms {
            bound = bound.add(t.bound());
        }
        BoundedExpr { constant, terms, bound }
    }

    /// Enclosure of the expression's value over every choice of factor
    /// values within their intervals.
    pub fn eval(&self) -> Interval {
        self.bound.clone()
    }

    pub fn constant(&self) -> &Dec {
        &self.constant
    }

    pub fn terms(&self) -> &[BoundedTerm] {
        &self.terms
    }
}
