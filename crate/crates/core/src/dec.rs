//! Exact arbitrary-precision decimal numbers.
//!
//! A `Dec` is `sign * mag * 10^exp` where `mag` is a big integer stored as
//! little-endian limbs in base 10^9. Addition, subtraction, and
//! multiplication are exact; division truncates toward zero at a requested
//! number of decimal places. The normal form is unique: zero is the empty
//! magnitude, otherwise the top limb is nonzero and the magnitude is not
//! divisible by ten (trailing decimal zeros are folded into the exponent).

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use crate::ArithError;

const BASE: u64 = 1_000_000_000;
const BASE_DIGITS: i64 = 9;

/// Exact decimal number: `(-1)^neg * mag * 10^exp`.
#[derive(Clone, Debug)]
pub struct Dec {
    neg: bool,
    exp: i64,
    mag: Vec<u32>,
}

// ---------------------------------------------------------------------------
// magnitude helpers (base 10^9, little-endian, no leading zero limbs)
// ---------------------------------------------------------------------------

fn mag_trim(m: &mut Vec<u32>) {
    while m.last() == Some(&0) {
        m.pop();
    }
}

fn mag_cmp(a: &[u32], b: &[u32]) -> Ordering {
    if a.len() != b.len() {
        return a.len().cmp(&b.len());
    }
    for i in (0..a.len()).rev() {
        if a[i] != b[i] {
            return a[i].cmp(&b[i]);
        }
    }
    Ordering::Equal
}

fn mag_add(a: &[u32], b: &[u32]) -> Vec<u32> {
    let (long, short) = if a.len() >= b.len() { (a, b) } else { (b, a) };
    let mut out = Vec::with_capacity(long.len() + 1);
    let mut carry = 0u64;
    for i in 0..long.len() {
        let mut v = long[i] as u64 + carry;
        if i < short.len() {
            v += short[i] as u64;
        }
        out.push((v % BASE) as u32);
        carry = v / BASE;
    }
    if carry > 0 {
        out.push(carry as u32);
    }
    out
}

/// a - b, requires a >= b.
fn mag_sub(a: &[u32], b: &[u32]) -> Vec<u32> {
    debug_assert!(mag_cmp(a, b) != Ordering::Less);
    let mut out = Vec::with_capacity(a.len());
    let mut borrow = 0i64;
    for i in 0..a.len() {
        let mut v = a[i] as i64 - borrow - if i < b.len() { b[i] as i64 } else { 0 };
        if v < 0 {
            v += BASE as i64;
            borrow = 1;
        } else {
            borrow = 0;
        }
        out.push(v as u32);
    }
    debug_assert_eq!(borrow, 0);
    mag_trim(&mut out);
    out
}

fn mag_mul(a: &[u32], b: &[u32]) -> Vec<u32> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0u64; a.len() + b.len()];
    for (i, &ai) in a.iter().enumerate() {
        if ai == 0 {
            continue;
        }
        let mut carry = 0u64;
        for (j, &bj) in b.iter().enumerate() {
            // max term: (1e9-1)^2 + (1e9-1) + (1e9-1) < 1e18 < u64::MAX
            let v = out[i + j] + ai as u64 * bj as u64 + carry;
            out[i + j] = v % BASE;
            carry = v / BASE;
        }
        let mut k = i + b.len();
        while carry > 0 {
            let v = out[k] + carry;
            out[k] = v % BASE;
            carry = v / BASE;
            k += 1;
        }
    }
    let mut res: Vec<u32> = out.into_iter().map(|v| v as u32).collect();
    mag_trim(&mut res);
    res
}

fn mag_mul_small(a: &[u32], s: u64) -> Vec<u32> {
    debug_assert!(s < BASE);
    let mut out = Vec::with_capacity(a.len() + 1);
    let mut carry = 0u64;
    for &ai in a {
        let v = ai as u64 * s + carry;
        out.push((v % BASE) as u32);
        carry = v / BASE;
    }
    while carry > 0 {
        out.push((carry % BASE) as u32);
        carry /= BASE;
    }
    mag_trim(&mut out);
    out
}

/// Divide by a single limb, returning (quotient, remainder).
fn mag_div_small(a: &[u32], d: u32) -> (Vec<u32>, u32) {
    debug_assert!(d > 0);
    let mut out = vec![0u32; a.len()];
    let mut rem = 0u64;
    for i in (0..a.len()).rev() {
        let cur = rem * BASE + a[i] as u64;
        out[i] = (cur / d as u64) as u32;
        rem = cur % d as u64;
    }
    mag_trim(&mut out);
    (out, rem as u32)
}

/// Multiply by 10^k for k >= 0.
fn mag_shift_digits(a: &[u32], k: i64) -> Vec<u32> {
    debug_assert!(k >= 0);
    if a.is_empty() {
        return Vec::new();
    }
    let limbs = (k / BASE_DIGITS) as usize;
    let rest = (k % BASE_DIGITS) as u32;
    let mut out = vec![0u32; limbs];
    out.extend_from_slice(a);
    if rest > 0 {
        out = mag_mul_small(&out, 10u64.pow(rest));
    }
    out
}

/// Knuth algorithm D. Returns (quotient, remainder) with u = q*v + r, r < v.
fn mag_div_rem(u: &[u32], v: &[u32]) -> (Vec<u32>, Vec<u32>) {
    assert!(!v.is_empty(), "division by zero magnitude");
    if mag_cmp(u, v) == Ordering::Less {
        return (Vec::new(), u.to_vec());
    }
    if v.len() == 1 {
        let (q, r) = mag_div_small(u, v[0]);
        return (q, if r == 0 { Vec::new() } else { vec![r] });
    }
    // Normalize so the top limb of v is >= BASE/2.
    let scale = (BASE / (v[v.len() - 1] as u64 + 1)) as u64;
    let mut un = mag_mul_small(u, scale);
    let vn = mag_mul_small(v, scale);
    let n = vn.len();
    let m = un.len().saturating_sub(n);
    un.push(0);
    let mut q = vec![0u32; m + 1];
    for j in (0..=m).rev() {
        let top = un[j + n] as u64 * BASE + un[j + n - 1] as u64;
        let mut qhat = top / vn[n - 1] as u64;
        let mut rhat = top % vn[n - 1] as u64;
        while qhat >= BASE
            || qhat * vn[n - 2] as u64 > rhat * BASE + un[j + n - 2] as u64
        {
            qhat -= 1;
            rhat += vn[n - 1] as u64;
            if rhat >= BASE {
                break;
            }
        }
        // multiply-subtract
        let mut borrow = 0i64;
        let mut carry = 0u64;
        for i in 0..n {
            let p = qhat * vn[i] as u64 + carry;
            carry = p / BASE;
            let sub = (p % BASE) as i64;
            let mut val = un[j + i] as i64 - sub - borrow;
            if val < 0 {
                val += BASE as i64;
                borrow = 1;
            } else {
                borrow = 0;
            }
            un[j + i] = val as u32;
        }
        let mut val = un[j + n] as i64 - carry as i64 - borrow;
        if val < 0 {
            // qhat was one too large: add v back
            val += BASE as i64;
            qhat -= 1;
            let mut c = 0u64;
            for i in 0..n {
                let s = un[j + i] as u64 + vn[i] as u64 + c;
                un[j + i] = (s % BASE) as u32;
                c = s / BASE;
            }
            val += c as i64;
            val -= BASE as i64;
            if val < 0 {
                val += BASE as i64;
            }
        }
        un[j + n] = val as u32;
        q[j] = qhat as u32;
    }
    mag_trim(&mut q);
    let mut r = un[..n].to_vec();
    mag_trim(&mut r);
    if !r.is_empty() && scale > 1 {
        let (rq, rr) = mag_div_small(&r, scale as u32);
        debug_assert_eq!(rr, 0);
        r = rq;
    }
    (q, r)
}

/// Number of decimal digits in the magnitude.
fn mag_digits(m: &[u32]) -> i64 {
    match m.last() {
        None => 0,
        Some(&top) => {
            let mut d = 1;
            let mut t = top as u64;
            while t >= 10 {
                t /= 10;
                d += 1;
            }
            (m.len() as i64 - 1) * BASE_DIGITS + d
        }
    }
}

/// Count of trailing decimal zeros.
fn mag_trailing_zeros(m: &[u32]) -> i64 {
    let mut z = 0i64;
    for &limb in m {
        if limb == 0 {
            z += BASE_DIGITS;
        } else {
            let mut v = limb;
            while v % 10 == 0 {
                v /= 10;
                z += 1;
            }
            return z;
        }
    }
    z
}

// ---------------------------------------------------------------------------
// Dec
// ---------------------------------------------------------------------------

impl Dec {
    fn make(neg: bool, exp: i64, mut mag: Vec<u32>) -> Dec {
        mag_trim(&mut mag);
        if mag.is_empty() {
            return Dec { neg: false, exp: 0, mag };
        }
        let tz = mag_trailing_zeros(&mag);
        if tz > 0 {
            let limbs = (tz / BASE_DIGITS) as usize;
            mag.drain(..limbs);
            let rest = tz % BASE_DIGITS;
            if rest > 0 {
                let (q, r) = mag_div_small(&mag, 10u32.pow(rest as u32));
                debug_assert_eq!(r, 0);
                mag = q;
            }
        }
        Dec { neg, exp: exp + tz, mag }
    }

    pub fn zero() -> Dec {
        Dec { neg: false, exp: 0, mag: Vec::new() }
    }

    pub fn one() -> Dec {
        Dec::from_int(1)
    }

    pub fn two() -> Dec {
        Dec::from_int(2)
    }

    pub fn from_int(v: i64) -> Dec {
        let neg = v < 0;
        let mut a = v.unsigned_abs();
        let mut mag = Vec::new();
        while a > 0 {
            mag.push((a % BASE) as u32);
            a /= BASE;
        }
        Dec::make(neg, 0, mag)
    }

    /// 10^k as a Dec.
    pub fn pow10(k: i64) -> Dec {
        Dec { neg: false, exp: k, mag: vec![1] }
    }

    /// Exact conversion: every f64 is a dyadic rational, hence a finite decimal.
    pub fn from_f64_exact(x: f64) -> Dec {
        assert!(x.is_finite(), "cannot convert non-finite float");
        if x == 0.0 {
            return Dec::zero();
        }
        let bits = x.to_bits();
        let neg = bits >> 63 == 1;
        let biased = ((bits >> 52) & 0x7ff) as i64;
        let frac = bits & ((1u64 << 52) - 1);
        let (mant, e2) = if biased == 0 {
            (frac, -1074i64)
        } else {
            (frac | (1u64 << 52), biased - 1075)
        };
        let mut mag = Vec::new();
        let mut a = mant;
        while a > 0 {
            mag.push((a % BASE) as u32);
            a /= BASE;
        }
        if e2 >= 0 {
            // * 2^e2
            for _ in 0..e2 / 20 {
                mag = mag_mul_small(&mag, 1 << 20);
            }
            mag = mag_mul_small(&mag, 1 << (e2 % 20) as u32);
            Dec::make(neg, 0, mag)
        } else {
            // * 2^e2 = * 5^(-e2) * 10^(e2)
            let k = -e2;
            for _ in 0..k / 12 {
                mag = mag_mul_small(&mag, 5u64.pow(12));
            }
            mag = mag_mul_small(&mag, 5u64.pow((k % 12) as u32));
            Dec::make(neg, e2, mag)
        }
    }

    pub fn is_zero(&self) -> bool {
        self.mag.is_empty()
    }

    pub fn is_negative(&self) -> bool {
        self.neg
    }

    pub fn signum(&self) -> i32 {
        if self.is_zero() {
            0
        } else if self.neg {
            -1
        } else {
            1
        }
    }

    pub fn abs(&self) -> Dec {
        Dec { neg: false, exp: self.exp, mag: self.mag.clone() }
    }

    /// Exact scaling by 10^k.
    pub fn scale10(&self, k: i64) -> Dec {
        if self.is_zero() {
            return Dec::zero();
        }
        Dec { neg: self.neg, exp: self.exp + k, mag: self.mag.clone() }
    }

    /// Exact halving (multiply by 5, shift down one digit).
    pub fn half(&self) -> Dec {
        Dec::make(self.neg, self.exp - 1, mag_mul_small(&self.mag, 5))
    }

    /// Number of digits left of the decimal point (0 when |x| < 1).
    pub fn integer_digits(&self) -> i64 {
        let d = mag_digits(&self.mag) + self.exp;
        d.max(0)
    }

    fn align(a: &Dec, b: &Dec) -> (Vec<u32>, Vec<u32>, i64) {
        let exp = a.exp.min(b.exp);
        let am = mag_shift_digits(&a.mag, a.exp - exp);
        let bm = mag_shift_digits(&b.mag, b.exp - exp);
        (am, bm, exp)
    }

    fn add_signed(aneg: bool, am: Vec<u32>, bneg: bool, bm: Vec<u32>, exp: i64) -> Dec {
        if aneg == bneg {
            return Dec::make(aneg, exp, mag_add(&am, &bm));
        }
        match mag_cmp(&am, &bm) {
            Ordering::Equal => Dec::zero(),
            Ordering::Greater => Dec::make(aneg, exp, mag_sub(&am, &bm)),
            Ordering::Less => Dec::make(bneg, exp, mag_sub(&bm, &am)),
        }
    }

    /// Truncated division: result r with |r - x/y| <= 10^-dp, exactly representable.
    /// Truncation is toward zero.
    pub fn divide(x: &Dec, y: &Dec, dp: i64) -> Result<Dec, ArithError> {
        if y.is_zero() {
            return Err(ArithError::DivisionByZero);
        }
        if x.is_zero() {
            return Ok(Dec::zero());
        }
        // |x/y| * 10^dp = x.mag * 10^(x.exp - y.exp + dp) / y.mag
        let s = x.exp - y.exp + dp;
        let (num, den) = if s >= 0 {
            (mag_shift_digits(&x.mag, s), y.mag.clone())
        } else {
            (x.mag.clone(), mag_shift_digits(&y.mag, -s))
        };
        let (q, _r) = mag_div_rem(&num, &den);
        Ok(Dec::make(x.neg != y.neg, -dp, q))
    }

    /// Truncate toward zero after `dp` decimal places.
    pub fn truncate(&self, dp: i64) -> Dec {
        if self.is_zero() || self.exp >= -dp {
            return self.clone();
        }
        let drop = -dp - self.exp;
        if drop >= mag_digits(&self.mag) {
            return Dec::zero();
        }
        let limbs = (drop / BASE_DIGITS) as usize;
        let mut m = self.mag[limbs..].to_vec();
        let rest = drop % BASE_DIGITS;
        if rest > 0 {
            let (q, _) = mag_div_small(&m, 10u32.pow(rest as u32));
            m = q;
        }
        Dec::make(self.neg, -dp, m)
    }

    pub fn min(a: &Dec, b: &Dec) -> Dec {
        if a <= b {
            a.clone()
        } else {
            b.clone()
        }
    }

    pub fn max(a: &Dec, b: &Dec) -> Dec {
        if a >= b {
            a.clone()
        } else {
            b.clone()
        }
    }

    /// Approximate value as f64 (for staging and diagnostics only).
    pub fn to_f64(&self) -> f64 {
        let mut v = 0.0f64;
        let start = self.mag.len().saturating_sub(8);
        for i in (start..self.mag.len()).rev() {
            v = v * BASE as f64 + self.mag[i] as f64;
        }
        let exp = self.exp + start as i64 * BASE_DIGITS;
        let sign = if self.neg { -1.0 } else { 1.0 };
        sign * v * 10f64.powi(exp.clamp(i32::MIN as i64, i32::MAX as i64) as i32)
    }

    /// Exact plain-notation string ("-0.00125", "42", "3.5").
    pub fn to_plain_string(&self) -> String {
        if self.is_zero() {
            return "0".to_string();
        }
        let mut digits = String::new();
        for (i, &limb) in self.mag.iter().enumerate().rev() {
            if i == self.mag.len() - 1 {
                digits.push_str(&limb.to_string());
            } else {
                digits.push_str(&format!("{:09}", limb));
            }
        }
        let mut s = String::new();
        if self.neg {
            s.push('-');
        }
        if self.exp >= 0 {
            s.push_str(&digits);
            for _ in 0..self.exp {
                s.push('0');
            }
        } else {
            let frac = (-self.exp) as usize;
            if digits.len() > frac {
                s.push_str(&digits[..digits.len() - frac]);
                s.push('.');
                s.push_str(&digits[digits.len() - frac..]);
            } else {
                s.push_str("0.");
                for _ in 0..frac - digits.len() {
                    s.push('0');
                }
                s.push_str(&digits);
            }
        }
        s
    }

    /// Scientific notation with `sig` significant digits, two-digit exponent
    /// ("3.08500000000000e-01"). Rounds half away from zero; display only.
    pub fn to_sci_string(&self, sig: usize) -> String {
        if self.is_zero() {
            let mut s = String::from("0.");
            s.push_str(&"0".repeat(sig.saturating_sub(1)));
            s.push_str("e+00");
            return s;
        }
        let mut digits = String::new();
        for (i, &limb) in self.mag.iter().enumerate().rev() {
            if i == self.mag.len() - 1 {
                digits.push_str(&limb.to_string());
            } else {
                digits.push_str(&format!("{:09}", limb));
            }
        }
        // power of ten of the leading digit
        let mut pow = digits.len() as i64 - 1 + self.exp;
        if digits.len() > sig {
            // round at sig digits
            let round_up = digits.as_bytes()[sig] >= b'5';
            digits.truncate(sig);
            if round_up {
                let mut bytes = digits.into_bytes();
                let mut i = bytes.len();
                loop {
                    if i == 0 {
                        bytes.insert(0, b'1');
                        pow += 1;
                        bytes.truncate(sig);
                        break;
                    }
                    i -= 1;
                    if bytes[i] == b'9' {
                        bytes[i] = b'0';
                    } else {
                        bytes[i] += 1;
                        break;
                    }
                }
                digits = String::from_utf8(bytes).unwrap();
            }
        } else {
            digits.push_str(&"0".repeat(sig - digits.len()));
        }
        let mut s = String::new();
        if self.neg {
            s.push('-');
        }
        s.push_str(&digits[..1]);
        s.push('.');
        s.push_str(&digits[1..]);
        if pow < 0 {
            s.push_str(&format!("e-{:02}", -pow));
        } else {
            s.push_str(&format!("e+{:02}", pow));
        }
        s
    }

    /// Parse plain or scientific decimal notation exactly.
    pub fn parse(text: &str) -> Result<Dec, ArithError> {
        let t = text.trim();
        let bad = || ArithError::Parse(format!("invalid decimal literal {t:?}"));
        if t.is_empty() {
            return Err(bad());
        }
        let bytes = t.as_bytes();
        let mut i = 0;
        let neg = match bytes[0] {
            b'-' => {
                i = 1;
                true
            }
            b'+' => {
                i = 1;
                false
            }
            _ => false,
        };
        let mut digits = String::new();
        let mut frac = 0i64;
        let mut seen_dot = false;
        let mut seen_digit = false;
        while i < bytes.len() {
            match bytes[i] {
                b'0'..=b'9' => {
                    digits.push(bytes[i] as char);
                    if seen_dot {
                        frac += 1;
                    }
                    seen_digit = true;
                }
                b'.' if !seen_dot => seen_dot = true,
                b'e' | b'E' => break,
                _ => return Err(bad()),
            }
            i += 1;
        }
        if !seen_digit {
            return Err(bad());
        }
        let mut exp = -frac;
        if i < bytes.len() {
            // exponent part
            let e: i64 = t[i + 1..].parse().map_err(|_| bad())?;
            exp += e;
        }
        // build magnitude from the digit string, nine digits per limb
        let mut mag: Vec<u32> = Vec::new();
        let ds = digits.as_bytes();
        let mut pos = 0;
        let lead = ds.len() % 9;
        if lead > 0 {
            let chunk: u32 = std::str::from_utf8(&ds[..lead]).unwrap().parse().unwrap();
            if chunk != 0 {
                mag.push(chunk);
            }
            pos = lead;
        }
        while pos < ds.len() {
            let chunk: u32 = std::str::from_utf8(&ds[pos..pos + 9]).unwrap().parse().unwrap();
            if !mag.is_empty() {
                mag.insert(0, 0); // value *= 10^9
            }
            if chunk != 0 {
                mag = mag_add(&mag, &[chunk]);
            }
            pos += 9;
        }
        Ok(Dec::make(neg, exp, mag))
    }
}

impl PartialEq for Dec {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Dec {}

impl PartialOrd for Dec {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Dec {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self.is_zero(), other.is_zero()) {
            (true, true) => return Ordering::Equal,
            (true, false) => return if other.neg { Ordering::Greater } else { Ordering::Less },
            (false, true) => return if self.neg { Ordering::Less } else { Ordering::Greater },
            _ => {}
        }
        if self.neg != other.neg {
            return if self.neg { Ordering::Less } else { Ordering::Greater };
        }
        // same sign: compare magnitudes cheaply by digit count, then aligned
        let da = mag_digits(&self.mag) + self.exp;
        let db = mag_digits(&other.mag) + other.exp;
        let mag_ord = if da != db {
            da.cmp(&db)
        } else {
            let (am, bm, _) = Dec::align(self, other);
            mag_cmp(&am, &bm)
        };
        if self.neg {
            mag_ord.reverse()
        } else {
            mag_ord
        }
    }
}

impl Add for &Dec {
    type Output = Dec;
    fn add(self, rhs: &Dec) -> Dec {
        if self.is_zero() {
            return rhs.clone();
        }
        if rhs.is_zero() {
            return self.clone();
        }
        let (am, bm, exp) = Dec::align(self, rhs);
        Dec::add_signed(self.neg, am, rhs.neg, bm, exp)
    }
}

impl Sub for &Dec {
    type Output = Dec;
    fn sub(self, rhs: &Dec) -> Dec {
        if rhs.is_zero() {
            return self.clone();
        }
        if self.is_zero() {
            return -rhs;
        }
        let (am, bm, exp) = Dec::align(self, rhs);
        Dec::add_signed(self.neg, am, !rhs.neg, bm, exp)
    }
}

impl Mul for &Dec {
    type Output = Dec;
    fn mul(self, rhs: &Dec) -> Dec {
        Dec::make(self.neg != rhs.neg, self.exp + rhs.exp, mag_mul(&self.mag, &rhs.mag))
    }
}

impl Neg for &Dec {
    type Output = Dec;
    fn neg(self) -> Dec {
        if self.is_zero() {
            return Dec::zero();
        }
        Dec { neg: !self.neg, exp: self.exp, mag: self.mag.clone() }
    }
}

impl Add for Dec {
    type Output = Dec;
    fn add(self, rhs: Dec) -> Dec {
        &self + &rhs
    }
}

impl Sub for Dec {
    type Output = Dec;
    fn sub(self, rhs: Dec) -> Dec {
        &self - &rhs
    }
}

impl Mul for Dec {
    type Output = Dec;
    fn mul(self, rhs: Dec) -> Dec {
        &self * &rhs
    }
}

impl Neg for Dec {
    type Output = Dec;
    fn neg(self) -> Dec {
        -&self
    }
}

impl fmt::Display for Dec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_plain_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(s: &str) -> Dec {
        Dec::parse(s).unwrap()
    }

    #[test]
    fn exact_add_mul() {
        assert_eq!(d("1.5") + d("2.25"), d("3.75"));
        assert_eq!(d("0.1") * d("0.1"), d("0.01"));
        assert_eq!(d("-0.5") * d("0.5"), d("-0.25"));
        assert_eq!(d("999999999999999999") + d("1"), d("1000000000000000000"));
    }

    #[test]
    fn sub_self_is_zero() {
        let mut rng = 123456789u64;
        for _ in 0..500 {
            rng = rng.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let v = (rng >> 11) as i64 - (1 << 52);
            let x = Dec::from_int(v).scale10((rng % 7) as i64 - 3);
            assert!((&x - &x).is_zero());
        }
    }

    #[test]
    fn divide_examples() {
        let r = Dec::divide(&d("1"), &d("3"), 5).unwrap();
        assert_eq!(r, d("0.33333"));
        let r = Dec::divide(&d("1"), &d("8"), 10).unwrap();
        assert_eq!(r, d("0.125"));
        assert!(Dec::divide(&d("1"), &Dec::zero(), 5).is_err());
        // negative operands truncate toward zero
        let r = Dec::divide(&d("-1"), &d("3"), 5).unwrap();
        assert_eq!(r, d("-0.33333"));
    }

    #[test]
    fn divide_agrees_across_precisions() {
        let x = d("355");
        let y = d("113");
        let a = Dec::divide(&x, &y, 20).unwrap();
        let b = Dec::divide(&x, &y, 30).unwrap();
        let diff = (&a - &b).abs();
        assert!(diff <= Dec::pow10(-20));
    }

    #[test]
    fn truncate_examples() {
        assert_eq!(d("1.23456").truncate(3), d("1.234"));
        assert_eq!(d("-1.23456").truncate(3), d("-1.234"));
        assert_eq!(d("1.2").truncate(5), d("1.2"));
        assert_eq!(d("0.0001").truncate(3), Dec::zero());
        assert_eq!(d("123.456").truncate(0), d("123"));
    }

    #[test]
    fn ordering_is_total_and_consistent() {
        let vals = ["-10", "-2.5", "-0.001", "0", "0.001", "1", "1.0000001", "10", "1e3"];
        for i in 0..vals.len() {
            for j in 0..vals.len() {
                let a = d(vals[i]);
                let b = d(vals[j]);
                let by_sub = (&a - &b).signum();
                let by_cmp = match a.cmp(&b) {
                    Ordering::Less => -1,
                    Ordering::Equal => 0,
                    Ordering::Greater => 1,
                };
                assert_eq!(by_sub, by_cmp, "{} vs {}", vals[i], vals[j]);
            }
        }
    }

    #[test]
    fn parse_format_round_trip() {
        for s in ["0", "1", "-1", "0.125", "-0.00125", "3.0850", "12345678901234567890.5", "1e-9", "2.5e3"] {
            let x = d(s);
            let y = d(&x.to_plain_string());
            assert_eq!(x, y, "round trip failed for {s}");
        }
    }

    #[test]
    fn sci_format() {
        assert_eq!(d("0.3085").to_sci_string(15), "3.08500000000000e-01");
        assert_eq!(d("0.00125").to_sci_string(15), "1.25000000000000e-03");
        assert_eq!(d("-2").to_sci_string(4), "-2.000e+00");
        assert_eq!(d("0.999999").to_sci_string(3), "1.00e+00");
    }

    #[test]
    fn from_f64_is_exact() {
        let x = Dec::from_f64_exact(0.5);
        assert_eq!(x, d("0.5"));
        let y = Dec::from_f64_exact(3.0);
        assert_eq!(y, d("3"));
        let z = Dec::from_f64_exact(0.1);
        // 0.1 in binary is not exactly 0.1; conversion is exact to the float
        assert!(z != d("0.1"));
        assert!((z.to_f64() - 0.1).abs() == 0.0);
    }

    #[test]
    fn big_division_identity() {
        // u = q*v + r with 0 <= r < v, via exact multiplication
        let mut rng = 987654321u64;
        for _ in 0..200 {
            let mut next = || {
                rng = rng.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                rng >> 33
            };
            let u_len = (next() % 6 + 1) as usize;
            let v_len = (next() % 3 + 1) as usize;
            let u: Vec<u32> = (0..u_len).map(|_| (next() % BASE as u64) as u32).collect();
            let mut v: Vec<u32> = (0..v_len).map(|_| (next() % BASE as u64) as u32).collect();
            if v.iter().all(|&x| x == 0) {
                v[0] = 1;
            }
            let mut u = u;
            mag_trim(&mut u);
            mag_trim(&mut v);
            if v.is_empty() {
                v.push(1);
            }
            let (q, r) = mag_div_rem(&u, &v);
            let back = mag_add(&mag_mul(&q, &v), &r);
            let mut u2 = u.clone();
            mag_trim(&mut u2);
            assert_eq!(back, u2);
            assert!(r.is_empty() || mag_cmp(&r, &v) == Ordering::Less);
        }
    }

    #[test]
    fn integer_digit_count() {
        assert_eq!(d("123.45").integer_digits(), 3);
        assert_eq!(d("0.5").integer_digits(), 0);
        assert_eq!(d("1e10").integer_digits(), 11);
        assert_eq!(Dec::zero().integer_digits(), 0);
    }
}
