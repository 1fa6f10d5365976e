//! The dynamical systems under study: 2-D standard-type delay maps, the
//! three-parameter 4-D symplectic map, their derivative blocks, and the
//! generating functions.
//!
//! The rigorous path evaluates everything through validated trig at a
//! configured precision; a parallel double-precision fast path mirrors each
//! operation for the staging passes of the proof engine and for the
//! non-rigorous laboratory.

use crate::dec::Dec;
use crate::interval::Interval;
use crate::matrix::{DMat, IMat};
use crate::special::{bd_cos, bd_sin, rig_cos, TrigConfig};
use crate::ArithError;

pub const TWO_PI: f64 = std::f64::consts::TAU;

/// Normalization of the trigonometric perturbation so max |V| = 1 on the
/// torus. Recomputed by `normalization_constant` and checked in tests;
/// frozen here to keep runs reproducible.
pub const M_TRIG: f64 = 1.760172593046087;

/// Normalization of the polynomial perturbation; the maximum of
/// |u(x0) w(x1)| is (1/256)(1/16) at (1/2, 1/2), exactly.
pub const M_POLY: f64 = 1.0 / 4096.0;

// ---------------------------------------------------------------------------
// 2-D standard-type family
// ---------------------------------------------------------------------------

/// An area-preserving family `p' = p + f(x), x' = x + p'` with periodic,
/// zero-average forcing.
pub struct StdFamily {
    k: f64,
    f: Box<dyn Fn(f64) -> f64 + Send + Sync>,
    df: Box<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl StdFamily {
    /// The Taylor-Chirikov standard map: f(x) = -(k/2pi) sin(2pi x).
    pub fn standard(k: f64) -> StdFamily {
        StdFamily {
            k,
            f: Box::new(move |x| -(k / TWO_PI) * (TWO_PI * x).sin()),
            df: Box::new(move |x| -k * (TWO_PI * x).cos()),
        }
    }

    pub fn custom(
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
        df: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> StdFamily {
        StdFamily { k: f64::NAN, f: Box::new(f), df: Box::new(df) }
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn f(&self, x: f64) -> f64 {
        (self.f)(x)
    }

    pub fn df(&self, x: f64) -> f64 {
        (self.df)(x)
    }

    /// Potential with f = -dV/dx, by quadrature from 0 to x.
    pub fn v_potential(&self, x: f64) -> f64 {
        let n = 256;
        let mut acc = 0.0;
        let h = x / n as f64;
        for i in 0..n {
            let a = i as f64 * h;
            acc += h / 6.0 * (self.f(a) + 4.0 * self.f(a + h / 2.0) + self.f(a + h));
        }
        -acc
    }

    /// Tangent-vector evolution coefficient of the delay map, `2 + f'(v)`.
    pub fn beta(&self, v: f64) -> f64 {
        2.0 + self.df(v)
    }
}

/// One step of the lift: `p' = p + f(x), x' = x + p'` (no mod).
pub fn std_step(x: f64, p: f64, fam: &StdFamily) -> (f64, f64) {
    let p1 = p + fam.f(x);
    (x + p1, p1)
}

/// Jacobian of the lift step in (x, p) coordinates.
pub fn std_jacobian(x: f64, fam: &StdFamily) -> [[f64; 2]; 2] {
    let d = fam.df(x);
    [[1.0 + d, 1.0], [d, 1.0]]
}

/// The delay-coordinate form: `(u, v) -> (v, 2v - u + f(v))`.
pub fn delay_step_2d(u: f64, v: f64, fam: &StdFamily) -> (f64, f64) {
    (v, 2.0 * v - u + fam.f(v))
}

// ---------------------------------------------------------------------------
// 4-D perturbations (unit-torus coordinates, f64)
// ---------------------------------------------------------------------------

/// The three perturbation shapes for the 4-D map, normalized so that the
/// trigonometric and polynomial cases have max |V| = 1 on the torus.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Perturbation {
    Trigonometric,
    Polynomial,
    FastFroeschle,
}

fn poly_u(x: f64) -> f64 {
    let p = x * x * (1.0 - x) * (1.0 - x);
    let q = -x * x + x - 3.0 / 16.0;
    p * q
}

fn poly_u1(x: f64) -> f64 {
    let p = x * x * (1.0 - x) * (1.0 - x);
    let p1 = 2.0 * x - 6.0 * x * x + 4.0 * x * x * x;
    let q = -x * x + x - 3.0 / 16.0;
    let q1 = -2.0 * x + 1.0;
    p1 * q + p * q1
}

fn poly_u2(x: f64) -> f64 {
    let p = x * x * (1.0 - x) * (1.0 - x);
    let p1 = 2.0 * x - 6.0 * x * x + 4.0 * x * x * x;
    let p2 = 2.0 - 12.0 * x + 12.0 * x * x;
    let q = -x * x + x - 3.0 / 16.0;
    let q1 = -2.0 * x + 1.0;
    p2 * q + 2.0 * p1 * q1 - 2.0 * p
}

fn poly_w(y: f64) -> f64 {
    y * y * (1.0 - y) * (1.0 - y)
}

fn poly_w1(y: f64) -> f64 {
    2.0 * y - 6.0 * y * y + 4.0 * y * y * y
}

fn poly_w2(y: f64) -> f64 {
    2.0 - 12.0 * y + 12.0 * y * y
}

fn ff_c(x: f64) -> f64 {
    let x = x.rem_euclid(1.0);
    if x <= 0.5 {
        1.0 - 24.0 * x * x + 32.0 * x * x * x
    } else {
        9.0 - 48.0 * x + 72.0 * x * x - 32.0 * x * x * x
    }
}

fn ff_c1(x: f64) -> f64 {
    let x = x.rem_euclid(1.0);
    if x <= 0.5 {
        -48.0 * x + 96.0 * x * x
    } else {
        -48.0 + 144.0 * x - 96.0 * x * x
    }
}

fn ff_c2(x: f64) -> f64 {
    let x = x.rem_euclid(1.0);
    if x <= 0.5 {
        -48.0 + 192.0 * x
    } else {
        144.0 - 192.0 * x
    }
}

impl Perturbation {
    pub fn name(&self) -> &'static str {
        match self {
            Perturbation::Trigonometric => "trigonometric",
            Perturbation::Polynomial => "polynomial",
            Perturbation::FastFroeschle => "fast-froeschle",
        }
    }

    /// V(x) at unit perturbation strength.
    pub fn value(&self, x: [f64; 2]) -> f64 {
        match self {
            Perturbation::Trigonometric => {
                let (a, b) = (TWO_PI * x[0], TWO_PI * x[1]);
                -(0.5 * (a.sin() + b.sin()) + (a + b).sin()) / M_TRIG
            }
            Perturbation::Polynomial => {
                let (x0, x1) = (x[0].rem_euclid(1.0), x[1].rem_euclid(1.0));
                -poly_u(x0) * poly_w(x1) / M_POLY
            }
            Perturbation::FastFroeschle => {
                -0.5 * (0.5 * (ff_c(x[0]) + ff_c(x[1])) + ff_c(x[0] + x[1]))
            }
        }
    }

    pub fn grad(&self, x: [f64; 2]) -> [f64; 2] {
        match self {
            Perturbation::Trigonometric => {
                let (a, b) = (TWO_PI * x[0], TWO_PI * x[1]);
                let cab = (a + b).cos();
                [
                    -(std::f64::consts::PI * a.cos() + TWO_PI * cab) / M_TRIG,
                    -(std::f64::consts::PI * b.cos() + TWO_PI * cab) / M_TRIG,
                ]
            }
            Perturbation::Polynomial => {
                let (x0, x1) = (x[0].rem_euclid(1.0), x[1].rem_euclid(1.0));
                [
                    -poly_u1(x0) * poly_w(x1) / M_POLY,
                    -poly_u(x0) * poly_w1(x1) / M_POLY,
                ]
            }
            Perturbation::FastFroeschle => {
                let c1 = ff_c1(x[0] + x[1]);
                [
                    -0.5 * (0.5 * ff_c1(x[0]) + c1),
                    -0.5 * (0.5 * ff_c1(x[1]) + c1),
                ]
            }
        }
    }

    pub fn hess(&self, x: [f64; 2]) -> [[f64; 2]; 2] {
        match self {
            Perturbation::Trigonometric => {
                let (a, b) = (TWO_PI * x[0], TWO_PI * x[1]);
                let sab = (a + b).sin();
                let tp2 = TWO_PI * std::f64::consts::PI; // 2 pi^2
                let d00 = tp2 * (a.sin() + 2.0 * sab) / M_TRIG;
                let d11 = tp2 * (b.sin() + 2.0 * sab) / M_TRIG;
                let d01 = 2.0 * tp2 * sab / M_TRIG;
                [[d00, d01], [d01, d11]]
            }
            Perturbation::Polynomial => {
                let (x0, x1) = (x[0].rem_euclid(1.0), x[1].rem_euclid(1.0));
                let d00 = -poly_u2(x0) * poly_w(x1) / M_POLY;
                let d01 = -poly_u1(x0) * poly_w1(x1) / M_POLY;
                let d11 = -poly_u(x0) * poly_w2(x1) / M_POLY;
                [[d00, d01], [d01, d11]]
            }
            Perturbation::FastFroeschle => {
                let c2 = ff_c2(x[0] + x[1]);
                let d00 = -0.5 * (0.5 * ff_c2(x[0]) + c2);
                let d11 = -0.5 * (0.5 * ff_c2(x[1]) + c2);
                let d01 = -0.5 * c2;
                [[d00, d01], [d01, d11]]
            }
        }
    }

    /// Numerically recompute the normalization maximum of the unnormalized
    /// potential (grid seed plus Newton on the diagonal).
    pub fn normalization_constant(&self) -> f64 {
        match self {
            Perturbation::Trigonometric => {
                // max over theta of sin(theta) + sin(2 theta), via Newton on
                // cos(theta) + 2 cos(2 theta) = 0 from a grid seed
                let g = |t: f64| t.sin() + (2.0 * t).sin();
                let dg = |t: f64| t.cos() + 2.0 * (2.0 * t).cos();
                let ddg = |t: f64| -t.sin() - 4.0 * (2.0 * t).sin();
                let mut best = 0.0f64;
                let mut seed = 0.0f64;
                for i in 0..1000 {
                    let t = i as f64 / 1000.0 * TWO_PI;
                    if g(t) > best {
                        best = g(t);
                        seed = t;
                    }
                }
                let mut t = seed;
                for _ in 0..60 {
                    t -= dg(t) / ddg(t);
                }
                g(t)
            }
            Perturbation::Polynomial => {
                let mut best = 0.0f64;
                for i in 0..=400 {
                    for j in 0..=400 {
                        let v = (poly_u(i as f64 / 400.0) * poly_w(j as f64 / 400.0)).abs();
                        if v > best {
                            best = v;
                        }
                    }
                }
                best
            }
            Perturbation::FastFroeschle => 1.0,
        }
    }
}

/// One step of the 4-D lift `p' = p - eps grad V(x), x' = x + p'`.
pub fn map4_step(x: [f64; 2], p: [f64; 2], pert: Perturbation, eps: f64) -> ([f64; 2], [f64; 2]) {
    let g = pert.grad(x);
    let p1 = [p[0] - eps * g[0], p[1] - eps * g[1]];
    ([x[0] + p1[0], x[1] + p1[1]], p1)
}

/// Jacobian of the 4-D step in (x, p) ordering.
pub fn map4_jacobian(x: [f64; 2], pert: Perturbation, eps: f64) -> [[f64; 4]; 4] {
    let h = pert.hess(x);
    let v = [[eps * h[0][0], eps * h[0][1]], [eps * h[1][0], eps * h[1][1]]];
    [
        [1.0 - v[0][0], -v[0][1], 1.0, 0.0],
        [-v[1][0], 1.0 - v[1][1], 0.0, 1.0],
        [-v[0][0], -v[0][1], 1.0, 0.0],
        [-v[1][0], -v[1][1], 0.0, 1.0],
    ]
}

/// Generating function H(x, x') = 1/2 |x' - x|^2 - eps V(x).
pub fn action_h(x: [f64; 2], x1: [f64; 2], pert: Perturbation, eps: f64) -> f64 {
    let d = [x1[0] - x[0], x1[1] - x[1]];
    0.5 * (d[0] * d[0] + d[1] * d[1]) - eps * pert.value(x)
}

/// (dH/dx, dH/dx') for momentum recovery.
pub fn action_h_partials(
    x: [f64; 2],
    x1: [f64; 2],
    pert: Perturbation,
    eps: f64,
) -> ([f64; 2], [f64; 2]) {
    let d = [x1[0] - x[0], x1[1] - x[1]];
    let g = pert.grad(x);
    ([-d[0] - eps * g[0], -d[1] - eps * g[1]], d)
}

// ---------------------------------------------------------------------------
// parameter conversions for the (a, b, c) form
// ---------------------------------------------------------------------------

/// Parameters of the 3-parameter map conjugate to the trigonometric example
/// at perturbation strength eps: a = b = 2 pi^2 eps / M, c = 4 pi^2 eps / M.
pub fn eps_to_abc(eps: f64) -> (f64, f64, f64) {
    let pi2 = std::f64::consts::PI * std::f64::consts::PI;
    let a = 2.0 * pi2 * eps / M_TRIG;
    (a, a, 2.0 * a)
}

/// Inverse of the conversion, read off the c parameter.
pub fn abc_to_eps(c: f64) -> f64 {
    let pi2 = std::f64::consts::PI * std::f64::consts::PI;
    c * M_TRIG / (4.0 * pi2)
}

// ---------------------------------------------------------------------------
// the 3-parameter map in angle coordinates (y = 2 pi x), f64 fast path
// ---------------------------------------------------------------------------

/// `-dV_abc/dy` where V_abc(y) = -a sin y0 - b sin y1 - c sin(y0+y1).
pub fn force_abc_f64(v: [f64; 2], abc: [f64; 3]) -> [f64; 2] {
    let c01 = (v[0] + v[1]).cos();
    [
        abc[0] * v[0].cos() + abc[2] * c01,
        abc[1] * v[1].cos() + abc[2] * c01,
    ]
}

/// Delay step of the 3-parameter map: `(u, v) -> (v, 2v - u - dV/dy(v))`.
pub fn g_abc_f64(u: [f64; 2], v: [f64; 2], abc: [f64; 3]) -> ([f64; 2], [f64; 2]) {
    let f = force_abc_f64(v, abc);
    (v, [2.0 * v[0] - u[0] + f[0], 2.0 * v[1] - u[1] + f[1]])
}

pub fn beta_abc_f64(v: [f64; 2], abc: [f64; 3]) -> [[f64; 2]; 2] {
    let s01 = (v[0] + v[1]).sin();
    [
        [2.0 - abc[0] * v[0].sin() - abc[2] * s01, -abc[2] * s01],
        [-abc[2] * s01, 2.0 - abc[1] * v[1].sin() - abc[2] * s01],
    ]
}

pub fn gamma_abc_f64(v: [f64; 2]) -> [[f64; 3]; 2] {
    let c01 = (v[0] + v[1]).cos();
    [[v[0].cos(), 0.0, c01], [0.0, v[1].cos(), c01]]
}

/// Full 7x7 derivative of the extended map at a point, for cross-checks.
pub fn dg_abc_f64(v: [f64; 2], abc: [f64; 3]) -> [[f64; 7]; 7] {
    let beta = beta_abc_f64(v, abc);
    let gamma = gamma_abc_f64(v);
    let mut m = [[0.0f64; 7]; 7];
    for i in 0..3 {
        m[i][i] = 1.0;
    }
    // u' = v
    m[3][5] = 1.0;
    m[4][6] = 1.0;
    // v' = 2v - u - dV/dy(v): dv'/dparams = gamma, dv'/du = -I, dv'/dv = beta
    for i in 0..2 {
        for j in 0..3 {
            m[5 + i][j] = gamma[i][j];
        }
        m[5 + i][3 + i] = -1.0;
        for j in 0..2 {
            m[5 + i][5 + j] = beta[i][j];
        }
    }
    m
}

// ---------------------------------------------------------------------------
// rigorous evaluation
// ---------------------------------------------------------------------------

/// Parameter box: centers and half-widths for (a, b, c), all exact.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AbcParams {
    pub a: Dec,
    pub da: Dec,
    pub b: Dec,
    pub db: Dec,
    pub c: Dec,
    pub dc: Dec,
}

impl AbcParams {
    pub fn intervals(&self) -> [Interval; 3] {
        [
            Interval::new(&self.a - &self.da, &self.a + &self.da),
            Interval::new(&self.b - &self.db, &self.b + &self.db),
            Interval::new(&self.c - &self.dc, &self.c + &self.dc),
        ]
    }

    pub fn centers(&self) -> [Dec; 3] {
        [self.a.clone(), self.b.clone(), self.c.clone()]
    }

    pub fn centers_f64(&self) -> [f64; 3] {
        [self.a.to_f64(), self.b.to_f64(), self.c.to_f64()]
    }

    pub fn half_widths(&self) -> [Dec; 3] {
        [self.da.clone(), self.db.clone(), self.dc.clone()]
    }
}

/// A point of the 7-D extended phase space (3 parameters + delay pair).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExtPoint {
    pub params: [Dec; 3],
    pub u: [Dec; 2],
    pub v: [Dec; 2],
}

impl ExtPoint {
    pub fn coord(&self, i: usize) -> &Dec {
        match i {
            0..=2 => &self.params[i],
            3 | 4 => &self.u[i - 3],
            5 | 6 => &self.v[i - 5],
            _ => panic!("coordinate index out of range"),
        }
    }

    pub fn set_coord(&mut self, i: usize, v: Dec) {
        match i {
            0..=2 => self.params[i] = v,
            3 | 4 => self.u[i - 3] = v,
            5 | 6 => self.v[i - 5] = v,
            _ => panic!("coordinate index out of range"),
        }
    }

    pub fn to_f64(&self) -> [f64; 7] {
        let mut out = [0.0; 7];
        for (i, slot) in out.iter_mut().enumerate() {
            *slot = self.coord(i).to_f64();
        }
        out
    }
}

/// Rigorous step of the extended map; `u'` is an exact copy of `v`, the new
/// `v'` carries error at most a few units of `10^-out_dp`.
pub fn g_abc(x: &ExtPoint, cfg: &TrigConfig, out_dp: i64) -> Result<ExtPoint, ArithError> {
    let [a, b, c] = &x.params;
    let v01 = &x.v[0] + &x.v[1];
    let c0 = rig_cos(&x.v[0], cfg)?;
    let c1 = rig_cos(&x.v[1], cfg)?;
    let c01 = rig_cos(&v01, cfg)?;
    let two = Dec::two();
    let v0p = &(&(&two * &x.v[0]) - &x.u[0]) + &(&(a * &c0) + &(c * &c01));
    let v1p = &(&(&two * &x.v[1]) - &x.u[1]) + &(&(b * &c1) + &(c * &c01));
    Ok(ExtPoint {
        params: x.params.clone(),
        u: x.v.clone(),
        v: [v0p.truncate(out_dp), v1p.truncate(out_dp)],
    })
}

/// Point evaluation of the beta block, entries truncated to `out_dp`.
pub fn beta_point(
    v: &[Dec; 2],
    abc: &[Dec; 3],
    cfg: &TrigConfig,
    out_dp: i64,
) -> Result<DMat, ArithError> {
    let v01 = &v[0] + &v[1];
    let s0 = crate::special::rig_sin(&v[0], cfg)?;
    let s1 = crate::special::rig_sin(&v[1], cfg)?;
    let s01 = crate::special::rig_sin(&v01, cfg)?;
    let two = Dec::two();
    let off = -&(&abc[2] * &s01);
    let m = DMat::from_fn(2, 2, |i, j| {
        if i == j {
            let diag = if i == 0 { &abc[0] * &s0 } else { &abc[1] * &s1 };
            &(&two - &diag) + &off
        } else {
            off.clone()
        }
    });
    Ok(m.truncate_entries(out_dp))
}

/// Point evaluation of the gamma block (2x3), entries truncated to `out_dp`.
pub fn gamma_point(v: &[Dec; 2], cfg: &TrigConfig, out_dp: i64) -> Result<DMat, ArithError> {
    let v01 = &v[0] + &v[1];
    let c0 = rig_cos(&v[0], cfg)?;
    let c1 = rig_cos(&v[1], cfg)?;
    let c01 = rig_cos(&v01, cfg)?;
    let mut m = DMat::zeros(2, 3);
    m.set(0, 0, c0);
    m.set(1, 1, c1);
    m.set(0, 2, c01.clone());
    m.set(1, 2, c01);
    Ok(m.truncate_entries(out_dp))
}

/// Validated enclosure of the beta block over a region of angles and
/// parameters.
pub fn beta_range(
    v0: &Interval,
    v1: &Interval,
    params: &AbcParams,
    cfg: &TrigConfig,
) -> Result<IMat, ArithError> {
    let [ai, bi, ci] = params.intervals();
    let s0 = bd_sin(v0, cfg)?;
    let s1 = bd_sin(v1, cfg)?;
    let s01 = bd_sin(&v0.add(v1), cfg)?;
    let two = Interval::point(Dec::two());
    let off = ci.mul(&s01).neg();
    let mut m = IMat::from_fn(2, 2, |_, _| off.clone());
    m.set(0, 0, two.sub(&ai.mul(&s0)).add(&off));
    m.set(1, 1, two.sub(&bi.mul(&s1)).add(&off));
    Ok(m)
}

/// Validated enclosure of the gamma block over a region of angles.
pub fn gamma_range(v0: &Interval, v1: &Interval, cfg: &TrigConfig) -> Result<IMat, ArithError> {
    let c0 = bd_cos(v0, cfg)?;
    let c1 = bd_cos(v1, cfg)?;
    let c01 = bd_cos(&v0.add(v1), cfg)?;
    let zero = Interval::point(Dec::zero());
    let mut m = IMat::from_fn(2, 3, |_, _| zero.clone());
    m.set(0, 0, c0);
    m.set(1, 1, c1);
    m.set(0, 2, c01.clone());
    m.set(1, 2, c01);
    Ok(m)
}

/// Upper bounds on Tr, lambda_plus, lambda_minus of beta over a region.
#[derive(Clone, Debug)]
pub struct BetaStats {
    pub tr_ub: Dec,
    pub lam_plus_ub: Dec,
    pub lam_minus_ub: Dec,
}

/// Closed-form 2x2 eigenvalue bounds with outward-rounded square roots.
pub fn beta_stats(
    v0: &Interval,
    v1: &Interval,
    params: &AbcParams,
    cfg: &TrigConfig,
) -> Result<BetaStats, ArithError> {
    let [ai, bi, ci] = params.intervals();
    let s0 = bd_sin(v0, cfg)?;
    let s1 = bd_sin(v1, cfg)?;
    let s01 = bd_sin(&v0.add(v1), cfg)?;
    let four = Interval::point(Dec::from_int(4));
    let a_s0 = ai.mul(&s0);
    let b_s1 = bi.mul(&s1);
    let c_s01 = ci.mul(&s01);
    let tr = four.sub(&a_s0).sub(&b_s1).sub(&c_s01.mul_scalar(&Dec::two()));
    // discriminant (a sin v0 - b sin v1)^2 + 4 c^2 sin^2(v0+v1), derived
    // directly from the 2x2 block
    let diff = a_s0.sub(&b_s1);
    let disc = diff
        .square()
        .add(&ci.square().mul(&s01.square()).mul_scalar(&Dec::from_int(4)));
    let dp = cfg.dp();
    let root_lb = crate::special::sqrt_lb(disc.lb(), dp)?;
    let root_ub = crate::special::sqrt_ub(disc.ub(), dp)?;
    Ok(BetaStats {
        tr_ub: tr.ub().clone(),
        lam_plus_ub: (tr.ub() + &root_ub).half(),
        lam_minus_ub: (tr.ub() - &root_lb).half(),
    })
}
