//! Validated sine, cosine, and square root with explicit worst-case error
//! ledgers, interval versions of the trig functions, and a high-precision
//! enclosure of pi.
//!
//! Every scalar routine returns a value within `10^-dp` of the true result;
//! the interval routines return enclosures that always contain the true
//! range. All intermediate truncations are accounted for.

use crate::dec::Dec;
use crate::interval::Interval;
use crate::ArithError;

/// Configuration for the validated trig routines.
///
/// Invariants, established by [`TrigConfig::with_dp`]:
/// * `1/(2N+3)! < 10^-(dp+2)` (Taylor tail below target), with `N = trig_terms`
/// * `N * 10^-trig_dp <= 10^-(dp+2)` (accumulated truncation below target)
#[derive(Clone, Debug)]
pub struct TrigConfig {
    dp: i64,
    trig_terms: usize,
    trig_dp: i64,
    pi: Dec,
    pi_places: i64,
}

impl TrigConfig {
    /// Build a config producing `dp` correct decimal places, choosing the
    /// least Taylor order that meets the tail invariant.
    pub fn with_dp(dp: i64) -> TrigConfig {
        assert!(dp >= 1, "need at least one decimal place");
        let threshold = Dec::pow10(dp + 2);
        let mut n = 0usize;
        let mut fact = Dec::from_int(6); // 3!
        loop {
            if fact > threshold {
                break;
            }
            n += 1;
            // (2n+2)! then (2n+3)!
            fact = &fact * &Dec::from_int(2 * n as i64 + 2);
            fact = &fact * &Dec::from_int(2 * n as i64 + 3);
        }
        let n_digits = {
            let mut d = 1i64;
            let mut v = n.max(1);
            while v >= 10 {
                v /= 10;
                d += 1;
            }
            d
        };
        let trig_dp = dp + 2 + n_digits;
        let pi_places = (dp + 40).max(60);
        TrigConfig {
            dp,
            trig_terms: n,
            trig_dp,
            pi: pi_dec(pi_places),
            pi_places,
        }
    }

    pub fn dp(&self) -> i64 {
        self.dp
    }

    pub fn trig_terms(&self) -> usize {
        self.trig_terms
    }

    pub fn trig_dp(&self) -> i64 {
        self.trig_dp
    }

    /// Stored enclosure of pi: `pi() <= pi <= pi() + 10^-pi_places`.
    pub fn pi(&self) -> &Dec {
        &self.pi
    }

    pub fn pi_places(&self) -> i64 {
        self.pi_places
    }

    pub fn half_pi(&self) -> Dec {
        self.pi.half()
    }

    pub fn quarter_pi(&self) -> Dec {
        self.pi.half().half()
    }

    pub fn two_pi(&self) -> Dec {
        &self.pi + &self.pi
    }

    /// `10^-dp`, the guaranteed accuracy of the scalar routines.
    pub fn eps(&self) -> Dec {
        Dec::pow10(-self.dp)
    }

    fn check_invariants(&self) -> bool {
        let n = self.trig_terms as i64;
        let mut fact = Dec::one();
        for k in 2..=(2 * n + 3) {
            fact = &fact * &Dec::from_int(k);
        }
        let tail_ok = fact > Dec::pow10(self.dp + 2);
        let trunc_ok =
            &Dec::from_int(n.max(1)) * &Dec::pow10(-self.trig_dp) <= Dec::pow10(-(self.dp + 2));
        tail_ok && trunc_ok
    }
}

/// Pi truncated toward zero, with `|result - pi| <= 10^-places`.
///
/// Machin's formula `pi = 16 atan(1/5) - 4 atan(1/239)`; the two alternating
/// series are summed in exact arithmetic with divisions truncated at
/// `places + 8` digits, so the guard digits dominate every error source.
pub fn pi_dec(places: i64) -> Dec {
    let w = places + 8;
    let atan_inv = |x: i64| -> Dec {
        let x2 = Dec::from_int(x * x);
        let mut xpow = Dec::from_int(x); // x^(2k+1)
        let mut sum = Dec::zero();
        let mut k = 0i64;
        loop {
            let denom = &Dec::from_int(2 * k + 1) * &xpow;
            let term = Dec::divide(&Dec::one(), &denom, w).unwrap();
            if term.is_zero() {
                break;
            }
            if k % 2 == 0 {
                sum = &sum + &term;
            } else {
                sum = &sum - &term;
            }
            xpow = &xpow * &x2;
            k += 1;
        }
        sum
    };
    let a5 = atan_inv(5);
    let a239 = atan_inv(239);
    let pi = &(&Dec::from_int(16) * &a5) - &(&Dec::from_int(4) * &a239);
    // Truncating toward zero keeps the result below pi; the series error
    // (< 10^-(places+4)) is far inside the declared 10^-places envelope.
    pi.truncate(places + 2)
}

/// sin of an angle in `[0, pi/4]` by the truncated Horner recursion.
///
/// `|result - sin(theta)| <= |arg - theta| + N*10^-trig_dp/(2N+1)!
///  + theta^(2N+3)/(2N+3)!`, which the config invariants keep below `10^-dp`.
pub fn reduced_sin(arg: &Dec, cfg: &TrigConfig) -> Dec {
    debug_assert!(!arg.is_negative() && arg <= &Dec::parse("0.7855").unwrap());
    let n = cfg.trig_terms as i64;
    assert!(n >= 1);
    let tdp = cfg.trig_dp;
    let arg2 = arg * arg;
    // s = (-1)^N; s <- [arg^2 * s + (-1)^(N-j) (2N+1)!/(2(N-j)+1)!]_tdp
    let mut s = if n % 2 == 0 { Dec::one() } else { -Dec::one() };
    let mut ratio = Dec::one(); // (2N+1)!/(2(N-j)+1)! for the current j
    for j in 1..=n {
        // going from j-1 to j multiplies by (2(N-j)+2)(2(N-j)+3)
        let m = n - j;
        ratio = &ratio * &Dec::from_int((2 * m + 2) * (2 * m + 3));
        let c = if (n - j) % 2 == 0 { ratio.clone() } else { -&ratio };
        s = (&(&arg2 * &s) + &c).truncate(tdp);
    }
    // ratio is now (2N+1)!
    Dec::divide(&(arg * &s), &ratio, tdp).unwrap()
}

/// cos of an angle in `[0, pi/4]`, mirroring [`reduced_sin`].
///
/// The recursion constants use even factorials (2N)!/(2(N-j))! and the
/// series ends at the constant term 1 rather than at theta, so the final
/// step divides by (2N)! with no leading factor of the argument.
pub fn reduced_cos(arg: &Dec, cfg: &TrigConfig) -> Dec {
    debug_assert!(!arg.is_negative() && arg <= &Dec::parse("0.7855").unwrap());
    let n = cfg.trig_terms as i64;
    assert!(n >= 1);
    let tdp = cfg.trig_dp;
    let arg2 = arg * arg;
    let mut s = if n % 2 == 0 { Dec::one() } else { -Dec::one() };
    let mut ratio = Dec::one(); // (2N)!/(2(N-j))!
    for j in 1..=n {
        let m = n - j;
        ratio = &ratio * &Dec::from_int((2 * m + 1) * (2 * m + 2));
        let c = if (n - j) % 2 == 0 { ratio.clone() } else { -&ratio };
        s = (&(&arg2 * &s) + &c).truncate(tdp);
    }
    // ratio is now (2N)!
    Dec::divide(&s, &ratio, tdp).unwrap()
}

fn quadrant_reduce(theta: &Dec, cfg: &TrigConfig) -> Result<(u8, Dec, bool), ArithError> {
    // |theta| = k * pi/2 + t, t in [0, pi/2); returns (k mod 4, t, theta < 0)
    let neg = theta.is_negative();
    let a = theta.abs();
    let half_pi = cfg.half_pi();
    let k = Dec::divide(&a, &half_pi, 0)?;
    let budget = cfg.pi_places - cfg.dp - 5;
    if k.integer_digits() > budget {
        return Err(ArithError::PrecisionLoss {
            angle_digits: k.integer_digits(),
            budget,
        });
    }
    let mut t = &a - &(&k * &half_pi);
    let mut kq = {
        // k mod 4 from the low decimal digit pair of the integer k
        let k4 = &k - &(&Dec::divide(&k, &Dec::from_int(4), 0)? * &Dec::from_int(4));
        k4.to_f64() as i64 as u8
    };
    // slop from the inexact pi can leave t marginally outside [0, pi/2)
    if t.is_negative() {
        t = Dec::zero();
    }
    if t >= half_pi {
        t = &t - &half_pi;
        kq = (kq + 1) % 4;
    }
    Ok((kq % 4, t, neg))
}

/// sin with full argument reduction; `|result - sin(theta)| <= 10^-dp`.
pub fn rig_sin(theta: &Dec, cfg: &TrigConfig) -> Result<Dec, ArithError> {
    let (quad, t, neg) = quadrant_reduce(theta, cfg)?;
    let quarter = cfg.quarter_pi();
    // sin on [0, pi/2)
    let s = if t <= quarter {
        reduced_sin(&t, cfg)
    } else {
        let mut c = &cfg.half_pi() - &t;
        if c.is_negative() {
            c = Dec::zero();
        }
        reduced_cos(&c, cfg)
    };
    let c_of_t = || -> Dec {
        if t <= quarter {
            reduced_cos(&t, cfg)
        } else {
            let mut c = &cfg.half_pi() - &t;
            if c.is_negative() {
                c = Dec::zero();
            }
            reduced_sin(&c, cfg)
        }
    };
    let v = match quad {
        0 => s,
        1 => c_of_t(),
        2 => -s,
        _ => -c_of_t(),
    };
    let v = if neg { -v } else { v };
    Ok(v.truncate(cfg.dp + 2))
}

/// cos with full argument reduction; `|result - cos(theta)| <= 10^-dp`.
pub fn rig_cos(theta: &Dec, cfg: &TrigConfig) -> Result<Dec, ArithError> {
    let (quad, t, _neg) = quadrant_reduce(theta, cfg)?;
    let quarter = cfg.quarter_pi();
    let c = if t <= quarter {
        reduced_cos(&t, cfg)
    } else {
        let mut w = &cfg.half_pi() - &t;
        if w.is_negative() {
            w = Dec::zero();
        }
        reduced_sin(&w, cfg)
    };
    let s_of_t = || -> Dec {
        if t <= quarter {
            reduced_sin(&t, cfg)
        } else {
            let mut w = &cfg.half_pi() - &t;
            if w.is_negative() {
                w = Dec::zero();
            }
            reduced_cos(&w, cfg)
        }
    };
    // cos is even, so the sign of theta is irrelevant
    let v = match quad {
        0 => c,
        1 => -s_of_t(),
        2 => -c,
        _ => s_of_t(),
    };
    Ok(v.truncate(cfg.dp + 2))
}

/// Square root by Newton iteration with truncated divisions.
///
/// `y_{j+1} = [ (y_j + [x/y_j]_{dp+2}) / 2 ]_{dp+2}` until successive
/// iterates differ by less than `10^-(dp+1)`; `|result - sqrt(x)| <= 10^-dp`.
pub fn rig_sqrt(x: &Dec, dp: i64) -> Result<Dec, ArithError> {
    if x.is_negative() {
        return Err(ArithError::SqrtOfNegative);
    }
    if x.is_zero() {
        return Ok(Dec::zero());
    }
    if x <= &Dec::pow10(-2 * dp) {
        // sqrt(x) <= 10^-dp, so zero is already within tolerance
        return Ok(Dec::zero());
    }
    let dpp = dp + 2;
    let xf = x.to_f64();
    let mut y = if xf.is_finite() && xf > 0.0 && xf.sqrt() > 0.0 && xf.sqrt().is_finite() {
        Dec::from_f64_exact(xf.sqrt())
    } else {
        x.clone()
    };
    if y.is_zero() || y.is_negative() {
        y = x.clone();
    }
    let stop = Dec::pow10(-(dp + 1));
    for _ in 0..20_000 {
        let q = Dec::divide(x, &y, dpp)?;
        let next = (&y + &q).half().truncate(dpp);
        let dec = &y - &next;
        // one step always lands at or above sqrt(x); from there the
        // iterates are non-increasing, so a small non-negative decrement
        // means convergence (a negative one means the seed was low)
        if !dec.is_negative() && dec < stop {
            return Ok(next);
        }
        y = next;
    }
    Ok(y)
}

/// Lower bound for sqrt(x): `result <= sqrt(x)`.
pub fn sqrt_lb(x: &Dec, dp: i64) -> Result<Dec, ArithError> {
    let v = rig_sqrt(x, dp)?;
    let lb = &v - &Dec::pow10(-dp);
    Ok(if lb.is_negative() { Dec::zero() } else { lb })
}

/// Upper bound for sqrt(x): `sqrt(x) <= result`.
pub fn sqrt_ub(x: &Dec, dp: i64) -> Result<Dec, ArithError> {
    let v = rig_sqrt(x, dp)?;
    Ok(&v + &Dec::pow10(-dp))
}

fn snap_criticals(
    lo: &mut Dec,
    hi: &mut Dec,
    input: &Interval,
    cfg: &TrigConfig,
    offset_half_pi: bool,
) -> Result<(), ArithError> {
    // critical points of sin are pi/2 + k*pi (offset), of cos are k*pi
    let pi = cfg.pi().clone();
    let off = if offset_half_pi { cfg.half_pi() } else { Dec::zero() };
    let margin = Dec::pow10(-cfg.dp); // snapping only widens, sloppy inclusion is sound
    let a = &(input.lb().clone()) - &margin;
    let b = &(input.ub().clone()) + &margin;
    // k kept as an exact integer Dec so arbitrarily large offsets are safe
    let k_lo = Dec::divide(&(&a - &off), &pi, 0)?;
    let mut k = &k_lo - &Dec::two();
    let two = Dec::two();
    for _ in 0..8 {
        let c = &off + &(&pi * &k);
        if c >= a && c <= b {
            // sin(pi/2 + k pi) = (-1)^k; cos(k pi) = (-1)^k
            let half = Dec::divide(&k, &two, 0)?;
            let even = (&k - &(&half * &two)).is_zero();
            if even {
                *hi = Dec::one();
            } else {
                *lo = -Dec::one();
            }
        } else if c > b {
            break;
        }
        k = &k + &Dec::one();
    }
    Ok(())
}

fn bd_trig(
    input: &Interval,
    cfg: &TrigConfig,
    eval: &dyn Fn(&Dec, &TrigConfig) -> Result<Dec, ArithError>,
    offset_half_pi: bool,
) -> Result<Interval, ArithError> {
    if input.width() >= cfg.two_pi() {
        return Ok(Interval::new(-Dec::one(), Dec::one()));
    }
    let eps = cfg.eps();
    let va = eval(input.lb(), cfg)?;
    let vb = eval(input.ub(), cfg)?;
    let mut lo = &Dec::min(&va, &vb) - &eps;
    let mut hi = &Dec::max(&va, &vb) + &eps;
    snap_criticals(&mut lo, &mut hi, input, cfg, offset_half_pi)?;
    // the true range is inside [-1, 1]; clamping is sound
    if lo < -Dec::one() {
        lo = -Dec::one();
    }
    if hi > Dec::one() {
        hi = Dec::one();
    }
    Ok(Interval::new(lo, hi))
}

/// Enclosure of `{ sin t : t in I }`.
pub fn bd_sin(input: &Interval, cfg: &TrigConfig) -> Result<Interval, ArithError> {
    bd_trig(input, cfg, &rig_sin, true)
}

/// Enclosure of `{ cos t : t in I }`.
pub fn bd_cos(input: &Interval, cfg: &TrigConfig) -> Result<Interval, ArithError> {
    bd_trig(input, cfg, &rig_cos, false)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(s: &str) -> Dec {
        Dec::parse(s).unwrap()
    }

    #[test]
    fn pi_matches_reference_digits() {
        // pi to 50 places, reference value
        let reference =
            "3.14159265358979323846264338327950288419716939937510";
        let p = pi_dec(45);
        let r = d(reference);
        let diff = (&p - &r).abs();
        assert!(diff <= Dec::pow10(-45), "pi differs: {}", diff.to_plain_string());
        assert!(p <= r, "stored pi must not exceed the true value");
    }

    #[test]
    fn trig_dp_selection() {
        // dp = 35: least N with (2N+3)! > 10^37 is N = 16 (35! ~ 1.03e40)
        let c = TrigConfig::with_dp(35);
        assert_eq!(c.trig_terms(), 16);
        assert!(c.check_invariants());
        // dp = 1: least N with (2N+3)! > 1000 is N = 2 (7! = 5040)
        let c = TrigConfig::with_dp(1);
        assert_eq!(c.trig_terms(), 2);
        assert!(c.check_invariants());
        for dp in 1..=60 {
            assert!(TrigConfig::with_dp(dp).check_invariants(), "dp = {dp}");
        }
    }

    #[test]
    fn reduced_sin_basics() {
        let cfg = TrigConfig::with_dp(35);
        assert!(reduced_sin(&Dec::zero(), &cfg).is_zero());
        // sin(pi/6) = 1/2
        let sixth = Dec::divide(cfg.pi(), &Dec::from_int(6), 60).unwrap();
        let s = reduced_sin(&sixth, &cfg);
        let err = (&s - &d("0.5")).abs();
        assert!(err <= Dec::pow10(-35), "err = {}", err.to_sci_string(3));
    }

    #[test]
    fn reduced_cos_at_zero_is_one() {
        let cfg = TrigConfig::with_dp(30);
        let c = reduced_cos(&Dec::zero(), &cfg);
        assert!((&c - &Dec::one()).abs() <= Dec::pow10(-30));
    }

    #[test]
    fn rig_sin_of_pi_is_small() {
        let cfg = TrigConfig::with_dp(35);
        let s = rig_sin(cfg.pi(), &cfg).unwrap();
        assert!(s.abs() <= Dec::pow10(-35));
    }

    #[test]
    fn rig_cos_is_even() {
        let cfg = TrigConfig::with_dp(25);
        for x in ["0.3", "1.7", "4.2", "9.9"] {
            let a = rig_cos(&d(x), &cfg).unwrap();
            let b = rig_cos(&-d(x), &cfg).unwrap();
            assert!((&a - &b).abs() <= Dec::pow10(-24));
        }
    }

    #[test]
    fn pythagorean_identity() {
        let cfg = TrigConfig::with_dp(20);
        let mut x = d("-9.7");
        let step = d("0.83");
        for _ in 0..24 {
            let s = rig_sin(&x, &cfg).unwrap();
            let c = rig_cos(&x, &cfg).unwrap();
            let v = &(&s * &s) + &(&c * &c);
            let err = (&v - &Dec::one()).abs();
            assert!(err <= &Dec::from_int(4) * &Dec::pow10(-20), "x = {}", x.to_plain_string());
            x = &x + &step;
        }
    }

    #[test]
    fn huge_angle_is_refused() {
        let cfg = TrigConfig::with_dp(35);
        // pi_places = 75, budget = 35 integer digits of theta/(pi/2)
        let huge = Dec::pow10(40);
        assert!(matches!(
            rig_sin(&huge, &cfg),
            Err(ArithError::PrecisionLoss { .. })
        ));
        // but moderately large angles are fine
        assert!(rig_sin(&d("1e20"), &cfg).is_ok());
    }

    #[test]
    fn sqrt_basics() {
        let r = rig_sqrt(&d("4"), 35).unwrap();
        assert!((&r - &d("2")).abs() <= Dec::pow10(-35));
        assert!(rig_sqrt(&Dec::zero(), 10).unwrap().is_zero());
        assert!(rig_sqrt(&d("-1"), 10).is_err());
        // tiny input short-circuits to zero
        assert!(rig_sqrt(&Dec::pow10(-25), 10).unwrap().is_zero());
    }

    #[test]
    fn sqrt_square_bracket() {
        for (x, dp) in [("2", 30i64), ("3.75", 25), ("123456.789", 20), ("0.04", 30)] {
            let x = d(x);
            let r = rig_sqrt(&x, dp).unwrap();
            let r2 = &r * &r;
            let bound = &(&Dec::from_int(3) * &Dec::pow10(-dp)) * &(&Dec::one() + &r);
            assert!((&r2 - &x).abs() <= bound, "x = {}", x.to_plain_string());
        }
    }

    #[test]
    fn bd_sin_cases() {
        let cfg = TrigConfig::with_dp(30);
        // [0, pi]: contains the max at pi/2, ub snaps to exactly 1
        let i = Interval::new(Dec::zero(), cfg.pi().clone());
        let b = bd_sin(&i, &cfg).unwrap();
        assert_eq!(b.ub(), &Dec::one());
        assert!(b.lb() >= &-Dec::pow10(-29));
        // point interval has width <= 2 * 10^-dp
        let p = Interval::point(d("0.7"));
        let bp = bd_sin(&p, &cfg).unwrap();
        assert!(bp.width() <= &Dec::from_int(2) * &Dec::pow10(-30));
        // [pi/4, 3pi/4]: lb <= sqrt(2)/2 <= ub, ub = 1
        let q = cfg.quarter_pi();
        let i = Interval::new(q.clone(), cfg.pi() - &q);
        let b = bd_sin(&i, &cfg).unwrap();
        assert_eq!(b.ub(), &Dec::one());
        let half_sqrt2 = rig_sqrt(&d("0.5"), 40).unwrap();
        assert!(b.lb() <= &half_sqrt2 && &half_sqrt2 <= b.ub());
    }

    #[test]
    fn bd_cos_snaps_at_zero() {
        let cfg = TrigConfig::with_dp(30);
        let i = Interval::new(d("-0.5"), d("0.5"));
        let b = bd_cos(&i, &cfg).unwrap();
        assert_eq!(b.ub(), &Dec::one());
    }

    #[test]
    fn bd_sin_monotone_widening() {
        let cfg = TrigConfig::with_dp(25);
        let narrow = Interval::new(d("0.2"), d("0.9"));
        let wide = Interval::new(d("0.1"), d("1.1"));
        let bn = bd_sin(&narrow, &cfg).unwrap();
        let bw = bd_sin(&wide, &cfg).unwrap();
        assert!(bw.contains_interval(&bn));
    }

    #[test]
    fn wide_interval_gives_unit_range() {
        let cfg = TrigConfig::with_dp(20);
        let i = Interval::new(d("0"), d("7"));
        let b = bd_sin(&i, &cfg).unwrap();
        assert_eq!(b.lb(), &-Dec::one());
        assert_eq!(b.ub(), &Dec::one());
    }
}
