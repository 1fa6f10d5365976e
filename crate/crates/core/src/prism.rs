//! Prisms in the extended phase space, the image-bounding lemma, the two
//! fattening schemes, and rigorously error-tracked matrix inversion.
//!
//! A prism is the set `{ center + P eta : eta in Q^7, |eta_j| <= 1 }`. The
//! parameter block of `P` is diagonal with the (a, b, c) half-widths and the
//! parameter rows never acquire phase coupling, so the parameter box is
//! preserved exactly by every image.

use crate::dec::Dec;
use crate::interval::Interval;
use crate::map::{beta_point, beta_range, g_abc, gamma_point, gamma_range, AbcParams, ExtPoint};
use crate::matrix::{DMat, IMat};
use crate::special::TrigConfig;
use crate::RigorError;

pub const SAFETY_DP: i64 = 5;

/// Shared constants of a rigorous run.
#[derive(Clone, Debug)]
pub struct RigorCtx {
    /// Requested correct decimal places of the final results.
    pub dp: i64,
    /// Working precision: `dp + SAFETY_DP` extra digits on intermediates.
    pub precision: i64,
    /// `10^-dp`; every intermediate computed to `precision` places is
    /// regarded as accurate only to this.
    pub max_error: Dec,
    /// Validated trig configured at the working precision.
    pub trig: TrigConfig,
    /// Minimum pairwise column angle for the column-rotor, radians.
    pub min_angle: f64,
}

impl RigorCtx {
    pub fn new(dp: i64) -> RigorCtx {
        let precision = dp + SAFETY_DP;
        RigorCtx {
            dp,
            precision,
            max_error: Dec::pow10(-dp),
            trig: TrigConfig::with_dp(precision),
            min_angle: 27.0f64.to_radians(),
        }
    }
}

/// Disposition of a prism in the worklist.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PrismStatus {
    NoTori,
    Untried,
    Maybe,
    Active,
    Symmtrc,
}

impl PrismStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            PrismStatus::NoTori => "NO_TORI",
            PrismStatus::Untried => "UNTRIED",
            PrismStatus::Maybe => "MAYBE",
            PrismStatus::Active => "ACTIVE",
            PrismStatus::Symmtrc => "SYMMTRC",
        }
    }

    pub fn parse(s: &str) -> Option<PrismStatus> {
        Some(match s {
            "NO_TORI" => PrismStatus::NoTori,
            "UNTRIED" => PrismStatus::Untried,
            "MAYBE" => PrismStatus::Maybe,
            "ACTIVE" => PrismStatus::Active,
            "SYMMTRC" => PrismStatus::Symmtrc,
            _ => return None,
        })
    }
}

/// Axis of a refining cut.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CutAxis {
    V0,
    V1,
    Eps,
}

impl CutAxis {
    pub fn as_str(&self) -> &'static str {
        match self {
            CutAxis::V0 => "v0",
            CutAxis::V1 => "v1",
            CutAxis::Eps => "eps",
        }
    }

    pub fn parse(s: &str) -> Option<CutAxis> {
        Some(match s {
            "v0" => CutAxis::V0,
            "v1" => CutAxis::V1,
            "eps" => CutAxis::Eps,
            _ => return None,
        })
    }
}

/// One refinement step in a prism's history: axis and which half was kept.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Cut {
    pub axis: CutAxis,
    pub right: bool,
}

/// A parallelepiped in the 7-D extended phase space.
#[derive(Clone, Debug)]
pub struct Prism {
    pub center: ExtPoint,
    pub matrix: DMat,
    pub status: PrismStatus,
    pub n_cuts: u32,
    pub cut_history: Vec<Cut>,
}

impl Prism {
    /// A worklist prism: parameter box times the point `xstar` times an
    /// axis-aligned box of successors.
    pub fn worklist(
        params: &AbcParams,
        xstar: &[Dec; 2],
        v_center: &[Dec; 2],
        v_half: &[Dec; 2],
    ) -> Prism {
        let mut m = DMat::zeros(7, 7);
        m.set(0, 0, params.da.clone());
        m.set(1, 1, params.db.clone());
        m.set(2, 2, params.dc.clone());
        m.set(5, 5, v_half[0].clone());
        m.set(6, 6, v_half[1].clone());
        Prism {
            center: ExtPoint {
                params: params.centers(),
                u: xstar.clone(),
                v: v_center.clone(),
            },
            matrix: m,
            status: PrismStatus::Untried,
            n_cuts: 0,
            cut_history: Vec::new(),
        }
    }

    /// True when the u-rows and the off-diagonal v-row blocks vanish, the
    /// shape of every prism on the worklist.
    pub fn is_worklist_shape(&self) -> bool {
        for j in 0..7 {
            if !self.matrix.get(3, j).is_zero() || !self.matrix.get(4, j).is_zero() {
                return false;
            }
        }
        for i in 5..7 {
            for j in 0..5 {
                if !self.matrix.get(i, j).is_zero() {
                    return false;
                }
            }
        }
        true
    }

    pub fn block(&self, row0: usize, col0: usize, rows: usize, cols: usize) -> DMat {
        DMat::from_fn(rows, cols, |i, j| self.matrix.get(row0 + i, col0 + j).clone())
    }

    /// Parameter box carried by the prism (P_pp diagonal by invariant).
    pub fn param_box(&self) -> AbcParams {
        AbcParams {
            a: self.center.params[0].clone(),
            da: self.matrix.get(0, 0).abs(),
            b: self.center.params[1].clone(),
            db: self.matrix.get(1, 1).abs(),
            c: self.center.params[2].clone(),
            dc: self.matrix.get(2, 2).abs(),
        }
    }

    /// Enclosing interval of coordinate `i` over the prism.
    pub fn coord_range(&self, i: usize) -> Interval {
        let r = self.matrix.row_sum(i);
        Interval::new(self.center.coord(i) - &r, self.center.coord(i) + &r)
    }

    pub fn v_range(&self) -> (Interval, Interval) {
        (self.coord_range(5), self.coord_range(6))
    }

    pub fn u_range(&self) -> (Interval, Interval) {
        (self.coord_range(3), self.coord_range(4))
    }

    /// Total column mass `sum_i |P_ik|`, the influence of the initial
    /// eta-axis `k` on the prism's extent.
    pub fn column_mass_f64(&self, k: usize) -> f64 {
        let mut s = 0.0;
        for i in 0..7 {
            s += self.matrix.get(i, k).to_f64().abs();
        }
        s
    }
}

// ---------------------------------------------------------------------------
// validated matrix inversion
// ---------------------------------------------------------------------------

/// Output of [`rgauss`]: an approximate inverse and a uniform entrywise
/// error bound `delta` against the true inverse.
#[derive(Clone, Debug)]
pub struct InverseWithError {
    pub approx: DMat,
    pub delta: Dec,
}

/// Gauss-Jordan elimination with full pivoting over exact decimals, all
/// divisions truncated at `inv_dp` places, with a running error ledger.
///
/// The ledger tracks `delta`, a bound on the entrywise difference between
/// the computed tableau and the exact tableau the same pivot sequence would
/// produce; after the last step `delta` bounds `|approx - M^-1|` entrywise,
/// hence `|[M approx]_ij - delta_ij| <= n * delta * max|M|`.
pub fn rgauss(m: &DMat, inv_dp: i64) -> Result<InverseWithError, RigorError> {
    let n = m.rows();
    assert_eq!(n, m.cols());
    let eps = Dec::pow10(-inv_dp);
    // augmented tableau [M | I]
    let mut g = DMat::zeros(n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            g.set(i, j, m.get(i, j).clone());
        }
        g.set(i, n + i, Dec::one());
    }
    let mut delta = Dec::zero();
    let mut pivoted_row = vec![false; n];
    let mut pivoted_col = vec![false; n];
    let mut col_of_step = vec![0usize; n];
    let mut row_of_step = vec![0usize; n];
    for step in 0..n {
        // full pivot search over the unreduced submatrix
        let mut best = Dec::zero();
        let (mut pr, mut pc) = (usize::MAX, usize::MAX);
        for i in 0..n {
            if pivoted_row[i] {
                continue;
            }
            for j in 0..n {
                if pivoted_col[j] {
                    continue;
                }
                let a = g.get(i, j).abs();
                if a > best {
                    best = a;
                    pr = i;
                    pc = j;
                }
            }
        }
        if pr == usize::MAX || best <= delta {
            // pivot indistinguishable from zero at the current error level
            return Err(RigorError::SingularMatrix);
        }
        pivoted_row[pr] = true;
        pivoted_col[pc] = true;
        row_of_step[step] = pr;
        col_of_step[step] = pc;
        let piv = g.get(pr, pc).clone();
        // (i) error of the truncated pivot reciprocal:
        // |piv_inv - 1/true| <= delta/(|piv|(|piv|-delta)) + eps
        let piv_inv = Dec::divide(&Dec::one(), &piv, inv_dp)?;
        let denom = &piv.abs() - &delta;
        if denom.is_negative() || denom.is_zero() {
            return Err(RigorError::SingularMatrix);
        }
        let delta_piv =
            &Dec::divide(&delta, &(&piv.abs() * &denom), inv_dp)? + &(&eps + &eps);
        // (ii) normalize the pivot row: r_j = [g_prj * piv_inv]
        let mut row_max = Dec::zero();
        for j in 0..2 * n {
            let a = g.get(pr, j).abs();
            if a > row_max {
                row_max = a;
            }
        }
        let mut new_row = Vec::with_capacity(2 * n);
        for j in 0..2 * n {
            new_row.push((g.get(pr, j) * &piv_inv).truncate(inv_dp));
        }
        let inv_mag = &piv_inv.abs() + &delta_piv;
        let delta_r = &(&eps + &(&row_max * &delta_piv)) + &(&delta * &inv_mag);
        // (iii) eliminate the pivot column from the other rows
        let mut col_max = Dec::zero();
        for i in 0..n {
            if i == pr {
                continue;
            }
            let a = g.get(i, pc).abs();
            if a > col_max {
                col_max = a;
            }
        }
        let mut r_max = Dec::zero();
        for r in &new_row {
            let a = r.abs();
            if a > r_max {
                r_max = a;
            }
        }
        for i in 0..n {
            if i == pr {
                continue;
            }
            let f = g.get(i, pc).clone();
            for j in 0..2 * n {
                let prod = (&f * &new_row[j]).truncate(inv_dp);
                let v = (g.get(i, j) - &prod).truncate(inv_dp);
                g.set(i, j, v);
            }
        }
        for (j, r) in new_row.into_iter().enumerate() {
            g.set(pr, j, r);
        }
        // (iv) matrix-wide error after this step
        let delta_m = &(&(&eps + &eps) + &delta)
            + &(&(&col_max * &delta_r) + &(&delta * &(&r_max + &delta_r)));
        delta = Dec::max(&delta_r, &(&delta_m + &eps));
    }
    // unscramble: step k reduced column pc using row pr; row pc of the
    // inverse is tableau row pr
    let mut inv = DMat::zeros(n, n);
    for step in 0..n {
        let pr = row_of_step[step];
        let pc = col_of_step[step];
        for j in 0..n {
            inv.set(pc, j, g.get(pr, n + j).clone());
        }
    }
    Ok(InverseWithError { approx: inv, delta })
}

/// Retry ladder around [`rgauss`]: start at `precision + 10` digits and
/// double twice until both the entrywise error and the residual bound fall
/// below `10^-precision`.
pub fn rgauss_auto(m: &DMat, precision: i64) -> Result<InverseWithError, RigorError> {
    let target = Dec::pow10(-precision);
    let n = Dec::from_int(m.rows() as i64);
    let mut inv_dp = precision + 10;
    for _ in 0..3 {
        match rgauss(m, inv_dp) {
            Ok(r) => {
                let residual = &(&n * &r.delta) * &m.max_abs();
                if r.delta <= target && residual <= target {
                    return Ok(r);
                }
            }
            Err(RigorError::SingularMatrix) => {}
            Err(e) => return Err(e),
        }
        inv_dp *= 2;
    }
    let r = rgauss(m, inv_dp)?;
    let residual = &(&n * &r.delta) * &m.max_abs();
    if r.delta <= target && residual <= target {
        Ok(r)
    } else {
        Err(RigorError::InversionTooCoarse)
    }
}

/// Approximate inverse of an exact 2x2 matrix by the adjugate formula,
/// each division truncated at `inv_dp`; entrywise error at most `10^-inv_dp`.
fn inv2_approx(m: &DMat, inv_dp: i64) -> Result<DMat, RigorError> {
    let det = &(m.get(0, 0) * m.get(1, 1)) - &(m.get(0, 1) * m.get(1, 0));
    if det.is_zero() {
        return Err(RigorError::SingularFattener);
    }
    let mut out = DMat::zeros(2, 2);
    out.set(0, 0, Dec::divide(m.get(1, 1), &det, inv_dp)?);
    out.set(0, 1, Dec::divide(&-m.get(0, 1), &det, inv_dp)?);
    out.set(1, 0, Dec::divide(&-m.get(1, 0), &det, inv_dp)?);
    out.set(1, 1, Dec::divide(m.get(0, 0), &det, inv_dp)?);
    Ok(out)
}

// ---------------------------------------------------------------------------
// fatteners
// ---------------------------------------------------------------------------

/// Which scheme chooses the enclosure matrix A.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Fattener {
    FixedForm,
    ColumnRotor,
}

fn pad_param_diag(ppp: &DMat, precision: i64) -> DMat {
    let tiny = Dec::pow10(-precision);
    DMat::from_fn(3, 3, |i, j| {
        if i == j && ppp.get(i, i).is_zero() {
            tiny.clone()
        } else {
            ppp.get(i, j).clone()
        }
    })
}

fn assemble_blocks(
    app: &DMat,
    aup: &DMat,
    auu: &DMat,
    auv: &DMat,
    avp: &DMat,
    avu: &DMat,
    avv: &DMat,
) -> DMat {
    DMat::from_fn(7, 7, |i, j| {
        let v = match (i, j) {
            (0..=2, 0..=2) => app.get(i, j),
            (0..=2, _) => return Dec::zero(),
            (3..=4, 0..=2) => aup.get(i - 3, j),
            (3..=4, 3..=4) => auu.get(i - 3, j - 3),
            (3..=4, _) => auv.get(i - 3, j - 5),
            (_, 0..=2) => avp.get(i - 5, j),
            (_, 3..=4) => avu.get(i - 5, j - 3),
            (_, _) => avv.get(i - 5, j - 5),
        };
        v.clone()
    })
}

/// The fixed-form fattener for worklist prisms (zero u-extent).
///
/// Returns the enclosure matrix A and the scale vector w. The parameter
/// entries of w are exactly one, and so are the v-entries: `u'` is an exact
/// copy of `v` and the choice `A_uv = P_vu + P_vv` collapses those row sums.
pub fn fixed_form_fatten(prism: &Prism, ctx: &RigorCtx) -> Result<(DMat, [Dec; 7]), RigorError> {
    if !prism.is_worklist_shape() {
        return Err(RigorError::BadPrismShape);
    }
    let params = prism.param_box();
    let beta_c = beta_point(&prism.center.v, &prism.center.params, &ctx.trig, ctx.precision)?;
    let gamma_c = gamma_point(&prism.center.v, &ctx.trig, ctx.precision)?;
    let ppp = prism.block(0, 0, 3, 3);
    let pvp = prism.block(5, 0, 2, 3); // zero for worklist prisms
    let pvu = prism.block(5, 3, 2, 2); // zero
    let pvv = prism.block(5, 5, 2, 2);
    let pup = prism.block(3, 0, 2, 3); // zero
    let puv = prism.block(3, 5, 2, 2); // zero
    let auv = pvu.add(&pvv);
    let det_auv = &(auv.get(0, 0) * auv.get(1, 1)) - &(auv.get(0, 1) * auv.get(1, 0));
    if det_auv.is_zero() {
        return Err(RigorError::SingularFattener);
    }
    let avp = gamma_c.mul(&ppp).sub(&pup).add(&beta_c.mul(&pvp));
    let avu = beta_c.mul(&auv);
    let avv = beta_c.mul(&pvv).sub(&puv);
    // a degenerate parameter axis would make A singular; pad its diagonal
    // entry in A only (the true prism keeps the zero column, and the image
    // merely gains a 10^-precision-wide parameter slab there)
    let app = pad_param_diag(&ppp, ctx.precision);
    let a = assemble_blocks(&app, &pvp, &DMat::zeros(2, 2), &auv, &avp, &avu, &avv);

    // row sums of the approximate inverse of A_vu, padded for the division
    let inv_dp = ctx.precision + 10;
    let dvu = inv2_approx(&avu, inv_dp)?;
    let pad = &Dec::pow10(-inv_dp) * &Dec::two();

    // interval enclosures of beta and gamma over the prism
    let (v0r, v1r) = prism.v_range();
    let beta_r = beta_range(&v0r, &v1r, &params, &ctx.trig)?;
    let gamma_r = gamma_range(&v0r, &v1r, &ctx.trig)?;
    let d_beta = beta_r.sub_dmat(&beta_c).mat_abs_sum_ub();
    let d_gamma = gamma_r.sub_dmat(&gamma_c).mat_abs_sum_ub();
    let beta_ms = beta_r.mat_abs_sum_ub();
    let expr = &(&(&d_gamma * &ppp.mat_sum()) + &(&beta_ms * &pvu.mat_sum()))
        + &(&d_beta * &(&pvp.mat_sum() + &pvv.mat_sum()));
    // the center error enters the u-rows through A_vu^-1; fold it in here
    let expr = &expr + &ctx.max_error;

    let one = Dec::one();
    let w = [
        one.clone(),
        one.clone(),
        one.clone(),
        &(&dvu.row_sum(0) + &pad) * &expr,
        &(&dvu.row_sum(1) + &pad) * &expr,
        one.clone(),
        one,
    ];
    Ok((a, w))
}

fn rotate_pair_f64(cols: &mut [[f64; 4]; 4], i: usize, j: usize, min_angle: f64) {
    let dot = |x: &[f64; 4], y: &[f64; 4]| x.iter().zip(y).map(|(a, b)| a * b).sum::<f64>();
    let norm = |x: &[f64; 4]| dot(x, x).sqrt();
    let (ni, nj) = (norm(&cols[i]), norm(&cols[j]));
    if ni == 0.0 || nj == 0.0 {
        return;
    }
    let cosang = (dot(&cols[i], &cols[j]) / (ni * nj)).clamp(-1.0, 1.0);
    let ang = cosang.abs().acos();
    if ang >= min_angle {
        return;
    }
    // rotate the shorter column away from the longer within their span
    let (keep, turn) = if ni >= nj { (i, j) } else { (j, i) };
    let x = cols[keep];
    let y = cols[turn];
    let nx = norm(&x);
    let xhat: [f64; 4] = std::array::from_fn(|k| x[k] / nx);
    let proj = dot(&y, &xhat);
    let mut perp: [f64; 4] = std::array::from_fn(|k| y[k] - proj * xhat[k]);
    let np = norm(&perp);
    if np < 1e-14 * nj {
        // exactly parallel: fall back to a coordinate direction
        let mut best = 0;
        for k in 1..4 {
            if xhat[k].abs() < xhat[best].abs() {
                best = k;
            }
        }
        let mut e = [0.0; 4];
        e[best] = 1.0;
        let pr = dot(&e, &xhat);
        perp = std::array::from_fn(|k| e[k] - pr * xhat[k]);
    }
    let np = norm(&perp);
    let phat: [f64; 4] = std::array::from_fn(|k| perp[k] / np);
    let ny = norm(&y);
    let sign = if proj >= 0.0 { 1.0 } else { -1.0 };
    cols[turn] = std::array::from_fn(|k| {
        ny * (sign * min_angle.cos() * xhat[k] + min_angle.sin() * phat[k])
    });
}

/// Rotate parts of columns 4-7 of an enclosure-matrix candidate so every
/// pair of phase columns subtends at least `min_angle` in the 4-D phase
/// subspace; parameter columns are untouched. Rotated entries are
/// re-expressed as exact decimals (any invertible A is a valid choice, so
/// the float detour costs tightness only, never soundness).
pub fn column_rotor_fatten(a: &DMat, min_angle: f64) -> DMat {
    let mut cols = [[0.0f64; 4]; 4];
    for (c, col) in cols.iter_mut().enumerate() {
        for (r, entry) in col.iter_mut().enumerate() {
            *entry = a.get(3 + r, 3 + c).to_f64();
        }
    }
    let before = cols;
    for i in 0..4 {
        for j in (i + 1)..4 {
            rotate_pair_f64(&mut cols, i, j, min_angle);
        }
    }
    let mut out = a.clone();
    for c in 0..4 {
        if cols[c] != before[c] {
            for r in 0..4 {
                out.set(3 + r, 3 + c, Dec::from_f64_exact(cols[c][r]));
            }
        }
    }
    out
}

// ---------------------------------------------------------------------------
// image bounding
// ---------------------------------------------------------------------------

fn round_up_trunc(x: &Dec, dp: i64) -> Dec {
    let t = x.truncate(dp);
    if &t < x {
        &t + &Dec::pow10(-dp)
    } else {
        t
    }
}

/// Bound the image `G(S)` of a prism by the prism `(G(center), A W)`.
///
/// The scale factors `w_j` dominate the row sums of `A^-1 DG_x P` over
/// every `x` in `S` plus the center-error slack, as the bounding lemma
/// requires; the subsequent entry truncation is covered by the `max_error`
/// slack already inside each `w_j`.
pub fn bound_image(prism: &Prism, ctx: &RigorCtx, fattener: Fattener) -> Result<Prism, RigorError> {
    let center_image = g_abc(&prism.center, &ctx.trig, ctx.precision)?;
    let (a, w) = match fattener {
        Fattener::FixedForm => fixed_form_fatten(prism, ctx)?,
        Fattener::ColumnRotor => column_rotor_w(prism, ctx)?,
    };
    // P' = A * diag(w~), w rounded up so the scaling never loses containment
    let mut p1 = DMat::zeros(7, 7);
    for j in 0..7 {
        let wj = round_up_trunc(&w[j], ctx.precision);
        for i in 0..7 {
            p1.set(i, j, a.get(i, j) * &wj);
        }
    }
    let p1 = p1.truncate_entries(ctx.precision);
    Ok(Prism {
        center: center_image,
        matrix: p1,
        status: PrismStatus::Active,
        n_cuts: prism.n_cuts,
        cut_history: prism.cut_history.clone(),
    })
}

/// Derivative-at-center times the prism matrix, in exact block arithmetic.
fn dg_center_times_p(
    prism: &Prism,
    beta_c: &DMat,
    gamma_c: &DMat,
) -> (DMat, DMat, DMat, DMat, DMat, DMat, DMat) {
    let ppp = prism.block(0, 0, 3, 3);
    let pup = prism.block(3, 0, 2, 3);
    let puu = prism.block(3, 3, 2, 2);
    let puv = prism.block(3, 5, 2, 2);
    let pvp = prism.block(5, 0, 2, 3);
    let pvu = prism.block(5, 3, 2, 2);
    let pvv = prism.block(5, 5, 2, 2);
    let avp = gamma_c.mul(&ppp).sub(&pup).add(&beta_c.mul(&pvp));
    let avu = beta_c.mul(&pvu).sub(&puu);
    let avv = beta_c.mul(&pvv).sub(&puv);
    (ppp, pvp, pvu, pvv, avp, avu, avv)
}

/// Column-rotor route: A ~ DG_center * P with rotated phase columns, the
/// inverse phase block from `rgauss`, and interval row bounds for w.
fn column_rotor_w(prism: &Prism, ctx: &RigorCtx) -> Result<(DMat, [Dec; 7]), RigorError> {
    let params = prism.param_box();
    let beta_c = beta_point(&prism.center.v, &prism.center.params, &ctx.trig, ctx.precision)?;
    let gamma_c = gamma_point(&prism.center.v, &ctx.trig, ctx.precision)?;
    let (ppp, pvp, pvu, pvv, avp, avu0, avv0) = dg_center_times_p(prism, &beta_c, &gamma_c);
    let puu = prism.block(3, 3, 2, 2);
    let puv = prism.block(3, 5, 2, 2);
    let app = pad_param_diag(&ppp, ctx.precision);
    let a0 = assemble_blocks(&app, &pvp, &pvu, &pvv, &avp, &avu0, &avv0);
    let a = column_rotor_fatten(&a0, ctx.min_angle);
    // invert the 4x4 phase block rigorously
    let phase = DMat::from_fn(4, 4, |i, j| a.get(3 + i, 3 + j).clone());
    let inv = rgauss_auto(&phase, ctx.precision)?;
    let b = inv.approx;
    let buu = DMat::from_fn(2, 2, |i, j| b.get(i, j).clone());
    let buv = DMat::from_fn(2, 2, |i, j| b.get(i, j + 2).clone());
    let bvu = DMat::from_fn(2, 2, |i, j| b.get(i + 2, j).clone());
    let bvv = DMat::from_fn(2, 2, |i, j| b.get(i + 2, j + 2).clone());

    let (v0r, v1r) = prism.v_range();
    let beta_r = beta_range(&v0r, &v1r, &params, &ctx.trig)?;
    let gamma_r = gamma_range(&v0r, &v1r, &ctx.trig)?;
    let d_beta = beta_r.sub_dmat(&beta_c);
    let d_gamma = gamma_r.sub_dmat(&gamma_c);

    // common interval blocks of A^-1 DG_x P
    let m_p = d_gamma.mul_dmat(&ppp).add(&d_beta.mul_dmat(&pvp)); // 2x3
    let m_u = beta_r.mul_dmat(&pvu).sub_dmat(&puu); // 2x2
    let m_v = beta_r.mul_dmat(&pvv).sub_dmat(&puv); // 2x2

    let row_w = |bu: &DMat, bv: &DMat, j: usize| -> Dec {
        let tp = IMat::dmat_mul(bv, &m_p).row_abs_sum_ub(j);
        let tu = IMat::from_dmat(&bu.mul(&pvu))
            .add(&IMat::dmat_mul(bv, &m_u))
            .row_abs_sum_ub(j);
        let tv = IMat::from_dmat(&bu.mul(&pvv))
            .add(&IMat::dmat_mul(bv, &m_v))
            .row_abs_sum_ub(j);
        // center error through the v-columns of the inverse, plus the
        // inversion and truncation slack
        let slack = &(&bv.row_sum(j) + &Dec::one()) * &ctx.max_error;
        &(&(&tp + &tu) + &tv) + &slack
    };

    let one = Dec::one();
    let w = [
        one.clone(),
        one.clone(),
        one,
        row_w(&buu, &buv, 0),
        row_w(&buu, &buv, 1),
        row_w(&bvu, &bvv, 0),
        row_w(&bvu, &bvv, 1),
    ];
    Ok((a, w))
}

// ---------------------------------------------------------------------------
// refinement and serialization
// ---------------------------------------------------------------------------

/// Halve a prism along an axis column; the two halves cover the parent and
/// their interiors are disjoint.
pub fn split_prism(prism: &Prism, axis: CutAxis) -> (Prism, Prism) {
    let col = match axis {
        CutAxis::V0 => 5,
        CutAxis::V1 => 6,
        CutAxis::Eps => {
            // widest parameter column
            let mut best = 0;
            for k in 1..3 {
                if prism.matrix.get(k, k).abs() > prism.matrix.get(best, best).abs() {
                    best = k;
                }
            }
            best
        }
    };
    let make = |right: bool| {
        let mut m = prism.matrix.clone();
        let mut c = prism.center.clone();
        for i in 0..7 {
            let half = prism.matrix.get(i, col).half();
            let shifted = if right { c.coord(i) + &half } else { c.coord(i) - &half };
            c.set_coord(i, shifted);
            m.set(i, col, half);
        }
        let mut cuts = prism.cut_history.clone();
        cuts.push(Cut { axis, right });
        Prism {
            center: c,
            matrix: m,
            status: PrismStatus::Untried,
            n_cuts: prism.n_cuts + 1,
            cut_history: cuts,
        }
    };
    (make(false), make(true))
}

/// Pick the refinement axis from the shape of the final prism of a failing
/// run: the initial axis whose column carries the most mass. Ties prefer
/// v0, then v1, then the parameters.
pub fn suggest_cut_axis(final_prism: &Prism) -> CutAxis {
    let eps_mass = (0..3)
        .map(|k| final_prism.column_mass_f64(k))
        .fold(0.0f64, f64::max);
    let v0_mass = final_prism.column_mass_f64(5);
    let v1_mass = final_prism.column_mass_f64(6);
    if v0_mass >= v1_mass && v0_mass >= eps_mass {
        CutAxis::V0
    } else if v1_mass >= eps_mass {
        CutAxis::V1
    } else {
        CutAxis::Eps
    }
}

impl Prism {
    /// Line-oriented exact serialization (part of the backup format).
    pub fn serialize(&self, out: &mut String) {
        out.push_str("prism ");
        out.push_str(self.status.as_str());
        out.push(' ');
        out.push_str(&self.n_cuts.to_string());
        out.push(' ');
        if self.cut_history.is_empty() {
            out.push('-');
        } else {
            for (i, c) in self.cut_history.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                out.push_str(c.axis.as_str());
                out.push(if c.right { 'R' } else { 'L' });
            }
        }
        out.push('\n');
        out.push('c');
        for i in 0..7 {
            out.push(' ');
            out.push_str(&self.center.coord(i).to_plain_string());
        }
        out.push('\n');
        for i in 0..7 {
            out.push('m');
            for j in 0..7 {
                out.push(' ');
                out.push_str(&self.matrix.get(i, j).to_plain_string());
            }
            out.push('\n');
        }
    }

    /// Parse the serialization produced by [`Prism::serialize`]; `line0` is
    /// the 1-based number of the first line, for error reporting.
    pub fn deserialize(lines: &[&str], line0: usize) -> Result<Prism, RigorError> {
        let err = |off: usize, msg: &str| RigorError::Backup {
            line: line0 + off,
            msg: msg.to_string(),
        };
        if lines.len() < 9 {
            return Err(err(0, "truncated prism record"));
        }
        let head: Vec<&str> = lines[0].split_whitespace().collect();
        if head.len() != 4 || head[0] != "prism" {
            return Err(err(0, "expected `prism <status> <n_cuts> <cuts>`"));
        }
        let status = PrismStatus::parse(head[1]).ok_or_else(|| err(0, "bad status"))?;
        let n_cuts: u32 = head[2].parse().map_err(|_| err(0, "bad cut count"))?;
        let mut cut_history = Vec::new();
        if head[3] != "-" {
            for item in head[3].split(',') {
                if item.len() < 3 {
                    return Err(err(0, "bad cut descriptor"));
                }
                let (axis_s, side) = item.split_at(item.len() - 1);
                let axis = CutAxis::parse(axis_s).ok_or_else(|| err(0, "bad cut axis"))?;
                let right = match side {
                    "R" => true,
                    "L" => false,
                    _ => return Err(err(0, "bad cut side")),
                };
                cut_history.push(Cut { axis, right });
            }
        }
        let cvals: Vec<&str> = lines[1].split_whitespace().collect();
        if cvals.len() != 8 || cvals[0] != "c" {
            return Err(err(1, "expected center line"));
        }
        let mut coords = Vec::new();
        for s in &cvals[1..] {
            coords.push(Dec::parse(s).map_err(|e| err(1, &e.to_string()))?);
        }
        let center = ExtPoint {
            params: [coords[0].clone(), coords[1].clone(), coords[2].clone()],
            u: [coords[3].clone(), coords[4].clone()],
            v: [coords[5].clone(), coords[6].clone()],
        };
        let mut matrix = DMat::zeros(7, 7);
        for i in 0..7 {
            let mv: Vec<&str> = lines[2 + i].split_whitespace().collect();
            if mv.len() != 8 || mv[0] != "m" {
                return Err(err(2 + i, "expected matrix row"));
            }
            for j in 0..7 {
                matrix.set(i, j, Dec::parse(mv[1 + j]).map_err(|e| err(2 + i, &e.to_string()))?);
            }
        }
        Ok(Prism { center, matrix, status, n_cuts, cut_history })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn d(s: &str) -> Dec {
        Dec::parse(s).unwrap()
    }

    fn small_prism() -> Prism {
        let params = AbcParams {
            a: d("0.3085"),
            da: d("0.00125"),
            b: d("0.3085"),
            db: d("0.00125"),
            c: d("0.617"),
            dc: d("0.0025"),
        };
        let xstar = [d("0.9"), d("0.9")];
        Prism::worklist(&params, &xstar, &[d("2.0"), d("2.2")], &[d("0.05"), d("0.04")])
    }

    #[test]
    fn rgauss_identity() {
        let r = rgauss(&DMat::identity(4), 30).unwrap();
        assert_eq!(r.approx, DMat::identity(4));
        assert!(r.delta <= Dec::pow10(-25));
    }

    #[test]
    fn rgauss_integer_inverse() {
        let m = DMat::from_fn(2, 2, |i, j| Dec::from_int([[2, 1], [1, 1]][i][j]));
        let r = rgauss(&m, 30).unwrap();
        let want = DMat::from_fn(2, 2, |i, j| Dec::from_int([[1, -1], [-1, 2]][i][j]));
        for i in 0..2 {
            for j in 0..2 {
                assert!((r.approx.get(i, j) - want.get(i, j)).abs() <= r.delta);
            }
        }
    }

    #[test]
    fn rgauss_residual_bound_on_random_matrices() {
        let mut rng = StdRng::seed_from_u64(2024);
        for trial in 0..50 {
            // well-conditioned: diagonally dominant random 4x4
            let mut m = DMat::zeros(4, 4);
            for i in 0..4 {
                for j in 0..4 {
                    let v: f64 = rng.gen_range(-1.0..1.0);
                    m.set(i, j, Dec::from_f64_exact((v * 1000.0).round() / 1000.0));
                }
                let boost: f64 = rng.gen_range(4.0..6.0);
                m.set(i, i, Dec::from_f64_exact((boost * 1000.0).round() / 1000.0));
            }
            let r = rgauss_auto(&m, 40).unwrap();
            // exact-arithmetic residual check
            let prod = m.mul(&r.approx);
            let bound = &(&Dec::from_int(4) * &r.delta) * &m.max_abs();
            for i in 0..4 {
                for j in 0..4 {
                    let want = if i == j { Dec::one() } else { Dec::zero() };
                    let e = (prod.get(i, j) - &want).abs();
                    assert!(
                        e <= bound,
                        "trial {trial}: residual {} > {}",
                        e.to_sci_string(3),
                        bound.to_sci_string(3)
                    );
                    assert!(e <= Dec::pow10(-40));
                }
            }
        }
    }

    #[test]
    fn rgauss_rejects_singular() {
        let m = DMat::from_fn(2, 2, |i, j| Dec::from_int([[1, 2], [2, 4]][i][j]));
        assert!(matches!(rgauss(&m, 30), Err(RigorError::SingularMatrix)));
    }

    #[test]
    fn fixed_form_parameter_and_v_scales_are_one() {
        let ctx = RigorCtx::new(35);
        let prism = small_prism();
        let (_a, w) = fixed_form_fatten(&prism, &ctx).unwrap();
        for k in [0, 1, 2, 5, 6] {
            assert_eq!(w[k], Dec::one());
        }
        assert!(!w[3].is_zero() && !w[3].is_negative());
    }

    #[test]
    fn fixed_form_constant_derivative_case() {
        // a = b = c = 0: beta = 2I and gamma = const exactly, so the only
        // contribution to w_u is the center error slack
        let ctx = RigorCtx::new(35);
        let params = AbcParams {
            a: Dec::zero(),
            da: Dec::zero(),
            b: Dec::zero(),
            db: Dec::zero(),
            c: Dec::zero(),
            dc: Dec::zero(),
        };
        let prism = Prism::worklist(
            &params,
            &[d("0.5"), d("0.5")],
            &[d("1.0"), d("1.5")],
            &[d("0.2"), d("0.2")],
        );
        let (_a, w) = fixed_form_fatten(&prism, &ctx).unwrap();
        // rowSum(Avu^-1) ~ 1/(2*0.2) = 2.5, expr ~ max_error
        let cap = &d("5") * &ctx.max_error;
        assert!(w[3] <= cap, "w_u = {}", w[3].to_sci_string(3));
        assert!(w[4] <= cap);
    }

    #[test]
    fn rotor_leaves_orthogonal_columns_alone() {
        let mut a = DMat::identity(7);
        a.set(3, 3, d("2"));
        a.set(4, 4, d("3"));
        let out = column_rotor_fatten(&a, 27f64.to_radians());
        assert_eq!(out, a);
    }

    #[test]
    fn rotor_separates_parallel_columns() {
        let mut a = DMat::identity(7);
        // phase columns 0 and 1 exactly parallel
        let c0 = ["1", "2", "0", "1"];
        let c1 = ["2", "4", "0", "2"];
        for r in 0..4 {
            a.set(3 + r, 3, d(c0[r]));
            a.set(3 + r, 4, d(c1[r]));
        }
        let min_angle = 27f64.to_radians();
        let out = column_rotor_fatten(&a, min_angle);
        let col = |m: &DMat, c: usize| -> [f64; 4] {
            std::array::from_fn(|r| m.get(3 + r, 3 + c).to_f64())
        };
        let x = col(&out, 0);
        let y = col(&out, 1);
        let dot: f64 = x.iter().zip(&y).map(|(a, b)| a * b).sum();
        let nx: f64 = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        let ny: f64 = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        let ang = (dot / (nx * ny)).abs().acos();
        assert!(ang >= min_angle - 1e-9, "angle = {ang}");
        // norm preserved for the rotated column
        assert!((ny - 6.0f64.sqrt() * 2.0).abs() < 1e-9);
    }

    #[test]
    fn bound_image_integrable_box_is_tight() {
        // a = b = c = 0: the map is affine, the image prism is the exact
        // affine image up to the slack scales
        let ctx = RigorCtx::new(35);
        let params = AbcParams {
            a: Dec::zero(),
            da: d("0.001"),
            b: Dec::zero(),
            db: d("0.001"),
            c: Dec::zero(),
            dc: d("0.001"),
        };
        let prism = Prism::worklist(
            &params,
            &[d("0.5"), d("0.5")],
            &[d("1.0"), d("1.5")],
            &[d("0.2"), d("0.2")],
        );
        let img = bound_image(&prism, &ctx, Fattener::FixedForm).unwrap();
        // center: u' = v = (1.0, 1.5); v' = 2v - u = (1.5, 2.5)
        assert_eq!(img.center.u, [d("1.0"), d("1.5")]);
        assert!((&img.center.v[0] - &d("1.5")).abs() <= ctx.max_error);
        assert!((&img.center.v[1] - &d("2.5")).abs() <= ctx.max_error);
        // u-rows of P' come only from the v-columns: here exactly Pvv
        assert!((img.matrix.get(3, 5) - &d("0.2")).abs() <= &d("2") * &ctx.max_error);
        assert!((img.matrix.get(5, 5) - &d("0.4")).abs() <= &d("2") * &ctx.max_error);
        // u-columns collapsed to the slack scale
        assert!(img.matrix.get(3, 3).abs() <= &d("2") * &ctx.max_error);
    }

    #[test]
    fn split_halves_cover_parent() {
        let prism = small_prism();
        let (l, r) = split_prism(&prism, CutAxis::V0);
        assert_eq!(l.n_cuts, 1);
        assert_eq!(l.matrix.get(5, 5), &d("0.025"));
        // only column 5 halved
        assert_eq!(l.matrix.get(6, 6), prism.matrix.get(6, 6));
        // vertex containment: parent's v0 extremes belong to a child
        let parent_lo = &prism.center.v[0] - prism.matrix.get(5, 5);
        let parent_hi = &prism.center.v[0] + prism.matrix.get(5, 5);
        let l_lo = &l.center.v[0] - l.matrix.get(5, 5);
        let r_hi = &r.center.v[0] + r.matrix.get(5, 5);
        assert_eq!(parent_lo, l_lo);
        assert_eq!(parent_hi, r_hi);
        let l_hi = &l.center.v[0] + l.matrix.get(5, 5);
        let r_lo = &r.center.v[0] - r.matrix.get(5, 5);
        assert_eq!(l_hi, r_lo);
    }

    #[test]
    fn serialization_round_trip() {
        let mut prism = small_prism();
        prism.status = PrismStatus::Maybe;
        prism.n_cuts = 3;
        prism.cut_history = vec![
            Cut { axis: CutAxis::V0, right: false },
            Cut { axis: CutAxis::V1, right: true },
            Cut { axis: CutAxis::Eps, right: false },
        ];
        let mut s = String::new();
        prism.serialize(&mut s);
        let lines: Vec<&str> = s.lines().collect();
        let back = Prism::deserialize(&lines, 1).unwrap();
        assert_eq!(back.status, prism.status);
        assert_eq!(back.n_cuts, 3);
        assert_eq!(back.cut_history, prism.cut_history);
        assert_eq!(back.center, prism.center);
        assert_eq!(back.matrix, prism.matrix);
    }

    #[test]
    fn deserialize_reports_line_numbers() {
        let text = "prism MAYBE 0 -\nc 1 2 3 4 5 6 7\nm 1 oops 0 0 0 0 0 0\n";
        let mut padded: Vec<&str> = text.lines().collect();
        for _ in 0..6 {
            padded.push("m 0 0 0 0 0 0 0");
        }
        match Prism::deserialize(&padded, 10) {
            Err(RigorError::Backup { line, .. }) => assert_eq!(line, 12),
            other => panic!("expected backup error, got {other:?}"),
        }
    }
}
