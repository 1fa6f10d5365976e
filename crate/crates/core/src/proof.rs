//! The subdivide-and-conquer proof orchestrator: a worklist of prisms,
//! staged testing (double-precision screen, semi-rigorous image bounding,
//! rigorous image bounding), symmetry pruning, depth control, persistence,
//! and reporting.
//!
//! A prism leaves the worklist only when the rigorous stage certifies that
//! no minimizing state can pass from the starting point through it; the
//! cheaper stages only decide whether the rigorous attempt is worth making.

use std::fmt::Write as _;
use std::time::Instant;

use crate::cones::{
    eigen_suite_step, global_bounds_4d, starting_point, DiagStats, FireReason, GlobalBounds,
    StartKind, SuiteWin,
};
use crate::dec::Dec;
use crate::interval::Interval;
use crate::map::{beta_stats, AbcParams};
use crate::prism::{
    bound_image, split_prism, suggest_cut_axis, Fattener, Prism, PrismStatus, RigorCtx,
};
use crate::RigorError;

/// Knobs of a rigorous run.
#[derive(Clone, Debug)]
pub struct ProofConfig {
    /// Correct decimal places of the rigorous computations (flag -p).
    pub dp: i64,
    /// Give up when a prism that has been cut this many times fails (-d).
    pub max_depth: u32,
    /// Keep going past unresolvable prisms instead of quitting (-s).
    pub stubborn: bool,
    /// Chatty progress logging (-t).
    pub verbose: bool,
    /// Rigorous image-bounding steps allowed per prism.
    pub step_budget: usize,
    /// Steps allowed in the double-precision screen.
    pub quick_budget: usize,
}

impl Default for ProofConfig {
    fn default() -> Self {
        ProofConfig {
            dp: 35,
            max_depth: 30,
            stubborn: false,
            verbose: false,
            step_budget: 25,
            quick_budget: 25,
        }
    }
}

/// Everything the engine needs to start: the parameter box, the successor
/// region (angle coordinates), and the input text to echo in the report.
#[derive(Clone, Debug)]
pub struct RunInput {
    pub params: AbcParams,
    pub v_center: [Dec; 2],
    pub v_half: [Dec; 2],
    pub comments: String,
}

/// Axis-aligned successor-square region, recorded for graphics and audits.
#[derive(Clone, Debug, PartialEq)]
pub struct BoxRegion {
    pub center: [Dec; 2],
    pub half: [Dec; 2],
}

impl BoxRegion {
    fn of_prism(p: &Prism) -> BoxRegion {
        BoxRegion {
            center: p.center.v.clone(),
            half: [p.matrix.get(5, 5).abs(), p.matrix.get(6, 6).abs()],
        }
    }
}

/// Cumulative run counters; all monotone totals.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ProofStats {
    pub quick_checks: u64,
    pub semi_tries: u64,
    pub rigorous_tries: u64,
    pub successes: u64,
    pub trace_fires: u64,
    pub eig_fires: u64,
    pub deepest_cut: u32,
    pub longest_semi: usize,
    pub longest_rigorous: usize,
    pub win_trace: u64,
    pub win_max_blam: u64,
    pub win_min_blam: u64,
    pub symmetric_skips: u64,
}

/// Final outcome of a run.
#[derive(Clone, Debug, PartialEq)]
pub enum RunVerdict {
    NoInvariantTori,
    DepthExceeded { cut_history: String, unresolved: u64 },
}

#[derive(Clone, Debug)]
pub struct ProofReport {
    pub verdict: RunVerdict,
    pub input: RunInput,
    pub stats: ProofStats,
    pub certified: Vec<BoxRegion>,
    pub skipped: Vec<BoxRegion>,
    pub elapsed_seconds: f64,
}

enum StageOutcome {
    Success { steps: usize, fire: FireReason },
    Failure { final_prism: Option<Prism>, steps: usize },
}

/// The orchestrator.
pub struct ProofEngine {
    pub cfg: ProofConfig,
    pub input: RunInput,
    ctx: RigorCtx,
    gb: GlobalBounds,
    xstar: [Dec; 2],
    worklist: Vec<Prism>,
    stats: ProofStats,
    certified: Vec<BoxRegion>,
    skipped: Vec<BoxRegion>,
    symmetry_enabled: bool,
    failed: Vec<Prism>,
}

impl ProofEngine {
    pub fn new(input: RunInput, cfg: ProofConfig) -> Result<ProofEngine, RigorError> {
        let ctx = RigorCtx::new(cfg.dp);
        let gb = global_bounds_4d(&input.params, cfg.dp)?;
        let xstar = starting_point(&gb, StartKind::LeastLambda);
        let seed = Prism::worklist(&input.params, &xstar, &input.v_center, &input.v_half);
        let symmetry_enabled =
            input.params.a == input.params.b && input.params.da == input.params.db;
        Ok(ProofEngine {
            cfg,
            input,
            ctx,
            gb,
            xstar,
            worklist: vec![seed],
            stats: ProofStats::default(),
            certified: Vec::new(),
            skipped: Vec::new(),
            symmetry_enabled,
            failed: Vec::new(),
        })
    }

    pub fn xstar(&self) -> &[Dec; 2] {
        &self.xstar
    }

    pub fn global_bounds(&self) -> &GlobalBounds {
        &self.gb
    }

    /// A prism strictly inside the closed upper triangle v0 <= v1 can be
    /// skipped: its mirror through the swap v0 <-> v1 lies on the kept side,
    /// where every point is eventually certified (the swap preserves both
    /// the action and the starting point, which sits on the diagonal).
    fn symmetric_skip(&self, prism: &Prism) -> bool {
        if !self.symmetry_enabled {
            return false;
        }
        let (v0, v1) = prism.v_range();
        v0.ub() <= v1.lb()
    }

    /// Double-precision d-suite along the single state seeded by the
    /// starting point and the prism's center.
    fn quick_try(&mut self, prism: &Prism) -> bool {
        self.stats.quick_checks += 1;
        let abc = prism.param_box().centers_f64();
        let lam_min = self.gb.lam_minus_min.to_f64();
        let lam_max = self.gb.lam_minus_max.to_f64();
        let tr_min = self.gb.tr_min.to_f64();
        let tr_max = self.gb.tr_max.to_f64();
        let mut u = [self.xstar[0].to_f64(), self.xstar[1].to_f64()];
        let mut v = [prism.center.v[0].to_f64(), prism.center.v[1].to_f64()];
        let mut lam = lam_max;
        let mut tr = tr_max;
        // d_0 is evaluated at the starting point itself
        let mut angle = u;
        for _ in 0..self.cfg.quick_budget {
            let m = crate::map::beta_abc_f64(angle, abc);
            let btr = m[0][0] + m[1][1];
            let disc = (m[0][0] - m[1][1]).powi(2) + 4.0 * m[0][1] * m[0][1];
            let (blm, blp) = (0.5 * (btr - disc.sqrt()), 0.5 * (btr + disc.sqrt()));
            if lam <= 0.0 || tr <= 0.0 {
                return true;
            }
            let s1 = 0.5 * btr - 2.0 / tr;
            let s2 = blp - 1.0 / lam;
            let denom = tr - lam_min;
            let s3 = if denom > 0.0 { blm - 1.0 / denom } else { f64::INFINITY };
            lam = s1.min(s2).min(s3).min(lam_max);
            tr = (btr - 4.0 / tr).min(tr_max);
            if lam < lam_min || tr < tr_min {
                return true;
            }
            // advance the delayed pair and evaluate beta at the new angle
            let (u1, v1) = crate::map::g_abc_f64(u, v, abc);
            angle = v;
            u = u1;
            v = v1;
        }
        false
    }

    /// Semi-rigorous stage: the full image-bounding loop in doubles.
    fn try_prism(&mut self, prism: &Prism) -> StageOutcome {
        self.stats.semi_tries += 1;
        let out = fast::try_prism_f64(prism, &self.gb, self.ctx.min_angle, self.cfg.step_budget);
        match out {
            Some(steps) => {
                self.stats.longest_semi = self.stats.longest_semi.max(steps);
                StageOutcome::Success { steps, fire: FireReason::LeastEigenvalue }
            }
            None => StageOutcome::Failure { final_prism: None, steps: 0 },
        }
    }

    fn record_win(&mut self, win: SuiteWin) {
        match win {
            SuiteWin::Trace => self.stats.win_trace += 1,
            SuiteWin::MaxBlam => self.stats.win_max_blam += 1,
            SuiteWin::MinBlam => self.stats.win_min_blam += 1,
        }
    }

    /// Rigorous stage: interleave validated image bounding with the
    /// eigenvalue suite until it fires, goes vacuous, or stalls.
    fn rtry_prism(&mut self, prism: &Prism) -> StageOutcome {
        self.stats.rigorous_tries += 1;
        let params = prism.param_box();
        let mut stats = DiagStats::initial(&self.gb);
        let mut steps = 0usize;
        // step 0 evaluates at the starting point, step 1 over the prism's
        // own successor range; bounded images begin after that
        let x0 = (
            Interval::point(self.xstar[0].clone()),
            Interval::point(self.xstar[1].clone()),
        );
        let regions0 = [x0, prism.v_range()];
        for (v0, v1) in regions0 {
            let beta = match beta_stats(&v0, &v1, &params, &self.ctx.trig) {
                Ok(b) => b,
                Err(_) => return StageOutcome::Failure { final_prism: None, steps },
            };
            match eigen_suite_step(&beta, &stats, &self.gb, self.ctx.precision) {
                Some(step) => {
                    self.record_win(step.win);
                    if let Some(fire) = step.fired {
                        return StageOutcome::Success { steps, fire };
                    }
                    stats = step.stats;
                }
                None => return StageOutcome::Failure { final_prism: None, steps },
            }
        }
        // image-bounded steps: fixed-form first, column-rotor after
        let mut cur = prism.clone();
        for step_no in 0..self.cfg.step_budget {
            let fat = if step_no == 0 { Fattener::FixedForm } else { Fattener::ColumnRotor };
            let next = match bound_image(&cur, &self.ctx, fat) {
                Ok(p) => p,
                Err(_) => return StageOutcome::Failure { final_prism: Some(cur), steps },
            };
            steps = step_no + 1;
            let (v0, v1) = next.v_range();
            let beta = match beta_stats(&v0, &v1, &params, &self.ctx.trig) {
                Ok(b) => b,
                Err(_) => return StageOutcome::Failure { final_prism: Some(next), steps },
            };
            match eigen_suite_step(&beta, &stats, &self.gb, self.ctx.precision) {
                Some(step) => {
                    self.record_win(step.win);
                    if let Some(fire) = step.fired {
                        return StageOutcome::Success { steps, fire };
                    }
                    // the bounds may rise while the orbit crosses a stiff
                    // region and fall later, so only a vacuous suite or the
                    // step budget ends the loop
                    stats = step.stats;
                }
                None => return StageOutcome::Failure { final_prism: Some(next), steps },
            }
            cur = next;
        }
        StageOutcome::Failure { final_prism: Some(cur), steps }
    }

    fn refine(&mut self, prism: Prism, hint: Option<&Prism>) -> Result<(), Prism> {
        if prism.n_cuts >= self.cfg.max_depth {
            return Err(prism);
        }
        let axis = match hint {
            Some(shape) => suggest_cut_axis(shape),
            None => suggest_cut_axis(&prism),
        };
        let (l, r) = split_prism(&prism, axis);
        self.stats.deepest_cut = self.stats.deepest_cut.max(l.n_cuts);
        self.worklist.push(r);
        self.worklist.push(l);
        Ok(())
    }

    /// Process one prism off the worklist. Returns Ok(false) when the list
    /// is exhausted. An unresolvable prism at maximum depth aborts the run
    /// unless the engine is stubborn.
    pub fn step(&mut self) -> Result<bool, Prism> {
        let mut prism = match self.worklist.pop() {
            Some(p) => p,
            None => return Ok(false),
        };
        self.stats.deepest_cut = self.stats.deepest_cut.max(prism.n_cuts);
        if self.symmetric_skip(&prism) {
            prism.status = PrismStatus::Symmtrc;
            self.stats.symmetric_skips += 1;
            self.skipped.push(BoxRegion::of_prism(&prism));
            return Ok(true);
        }
        prism.status = PrismStatus::Active;
        if !self.quick_try(&prism) {
            return self.handle_failure(prism, None);
        }
        if let StageOutcome::Failure { .. } = self.try_prism(&prism) {
            return self.handle_failure(prism, None);
        }
        match self.rtry_prism(&prism) {
            StageOutcome::Success { steps, fire } => {
                self.stats.successes += 1;
                self.stats.longest_rigorous = self.stats.longest_rigorous.max(steps);
                match fire {
                    FireReason::Trace => self.stats.trace_fires += 1,
                    FireReason::LeastEigenvalue => self.stats.eig_fires += 1,
                }
                if self.cfg.verbose {
                    eprintln!(
                        "certified prism at depth {} after {} bounded steps",
                        prism.n_cuts, steps
                    );
                }
                self.certified.push(BoxRegion::of_prism(&prism));
                Ok(true)
            }
            StageOutcome::Failure { final_prism, .. } => self.handle_failure(prism, final_prism),
        }
    }

    fn handle_failure(&mut self, prism: Prism, shape: Option<Prism>) -> Result<bool, Prism> {
        match self.refine(prism, shape.as_ref()) {
            Ok(()) => Ok(true),
            Err(p) => {
                if self.cfg.stubborn {
                    self.failed.push(p);
                    Ok(true)
                } else {
                    Err(p)
                }
            }
        }
    }

    pub fn pending(&self) -> usize {
        self.worklist.len()
    }

    /// Prisms parked as unresolvable at the depth cap (stubborn runs).
    pub fn failed_prisms(&self) -> &[Prism] {
        &self.failed
    }

    /// Run to completion (or to an unresolvable prism). `checkpoint` is
    /// called after every processed prism, e.g. to maintain a backup file.
    pub fn run(&mut self, mut checkpoint: impl FnMut(&ProofEngine)) -> ProofReport {
        let t0 = Instant::now();
        let verdict = loop {
            match self.step() {
                Ok(true) => checkpoint(self),
                Ok(false) => {
                    if self.failed.is_empty() {
                        break RunVerdict::NoInvariantTori;
                    }
                    break RunVerdict::DepthExceeded {
                        cut_history: cut_history_string(&self.failed[0]),
                        unresolved: self.failed.len() as u64,
                    };
                }
                Err(p) => {
                    break RunVerdict::DepthExceeded {
                        cut_history: cut_history_string(&p),
                        unresolved: 1 + self.worklist.len() as u64,
                    };
                }
            }
        };
        ProofReport {
            verdict,
            input: self.input.clone(),
            stats: self.stats.clone(),
            certified: self.certified.clone(),
            skipped: self.skipped.clone(),
            elapsed_seconds: t0.elapsed().as_secs_f64(),
        }
    }
}

fn cut_history_string(p: &Prism) -> String {
    if p.cut_history.is_empty() {
        return "-".to_string();
    }
    p.cut_history
        .iter()
        .map(|c| format!("{}{}", c.axis.as_str(), if c.right { 'R' } else { 'L' }))
        .collect::<Vec<_>>()
        .join(",")
}

// ---------------------------------------------------------------------------
// persistence
// ---------------------------------------------------------------------------

const BACKUP_HEADER: &str = "converse-backup v1";

impl ProofEngine {
    /// Serialize the full engine state: pending order, statuses, cut
    /// histories, statistics, and the already-decided regions.
    pub fn backup(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{BACKUP_HEADER}");
        let _ = writeln!(
            s,
            "config {} {} {} {} {} {}",
            self.cfg.dp,
            self.cfg.max_depth,
            self.cfg.stubborn as u8,
            self.cfg.verbose as u8,
            self.cfg.step_budget,
            self.cfg.quick_budget
        );
        let p = &self.input.params;
        let _ = writeln!(
            s,
            "params {} {} {} {} {} {}",
            p.a.to_plain_string(),
            p.da.to_plain_string(),
            p.b.to_plain_string(),
            p.db.to_plain_string(),
            p.c.to_plain_string(),
            p.dc.to_plain_string()
        );
        let _ = writeln!(
            s,
            "region {} {} {} {}",
            self.input.v_center[0].to_plain_string(),
            self.input.v_half[0].to_plain_string(),
            self.input.v_center[1].to_plain_string(),
            self.input.v_half[1].to_plain_string()
        );
        let _ = writeln!(s, "comments {}", self.input.comments.escape_default());
        let st = &self.stats;
        let _ = writeln!(
            s,
            "stats {} {} {} {} {} {} {} {} {} {} {} {} {}",
            st.quick_checks,
            st.semi_tries,
            st.rigorous_tries,
            st.successes,
            st.trace_fires,
            st.eig_fires,
            st.deepest_cut,
            st.longest_semi,
            st.longest_rigorous,
            st.win_trace,
            st.win_max_blam,
            st.win_min_blam,
            st.symmetric_skips
        );
        let _ = writeln!(s, "pending {}", self.worklist.len());
        for prism in &self.worklist {
            prism.serialize(&mut s);
        }
        let dump_boxes = |s: &mut String, name: &str, list: &[BoxRegion]| {
            let _ = writeln!(s, "{name} {}", list.len());
            for b in list {
                let _ = writeln!(
                    s,
                    "box {} {} {} {}",
                    b.center[0].to_plain_string(),
                    b.half[0].to_plain_string(),
                    b.center[1].to_plain_string(),
                    b.half[1].to_plain_string()
                );
            }
        };
        dump_boxes(&mut s, "certified", &self.certified);
        dump_boxes(&mut s, "skipped", &self.skipped);
        s
    }

    /// Rebuild an engine from a backup; the pending order, statuses, cut
    /// histories, and statistics are restored exactly.
    pub fn restore(text: &str) -> Result<ProofEngine, RigorError> {
        let lines: Vec<&str> = text.lines().collect();
        let err = |line: usize, msg: &str| RigorError::Backup { line, msg: msg.to_string() };
        let mut i = 0usize;
        let need = |i: &mut usize, tag: &str| -> Result<Vec<String>, RigorError> {
            let line = lines.get(*i).ok_or_else(|| err(*i + 1, "unexpected end of file"))?;
            let fields: Vec<String> = line.split_whitespace().map(String::from).collect();
            if fields.is_empty() || fields[0] != tag {
                return Err(err(*i + 1, &format!("expected `{tag}` line")));
            }
            *i += 1;
            Ok(fields)
        };
        if lines.first().copied() != Some(BACKUP_HEADER) {
            return Err(err(1, "not a backup file"));
        }
        i += 1;
        let cfgf = need(&mut i, "config")?;
        if cfgf.len() != 7 {
            return Err(err(i, "bad config line"));
        }
        let cfg = ProofConfig {
            dp: cfgf[1].parse().map_err(|_| err(i, "bad dp"))?,
            max_depth: cfgf[2].parse().map_err(|_| err(i, "bad depth"))?,
            stubborn: cfgf[3] == "1",
            verbose: cfgf[4] == "1",
            step_budget: cfgf[5].parse().map_err(|_| err(i, "bad step budget"))?,
            quick_budget: cfgf[6].parse().map_err(|_| err(i, "bad quick budget"))?,
        };
        let pf = need(&mut i, "params")?;
        if pf.len() != 7 {
            return Err(err(i, "bad params line"));
        }
        let dec = |s: &str, at: usize| Dec::parse(s).map_err(|e| err(at, &e.to_string()));
        let params = AbcParams {
            a: dec(&pf[1], i)?,
            da: dec(&pf[2], i)?,
            b: dec(&pf[3], i)?,
            db: dec(&pf[4], i)?,
            c: dec(&pf[5], i)?,
            dc: dec(&pf[6], i)?,
        };
        let rf = need(&mut i, "region")?;
        if rf.len() != 5 {
            return Err(err(i, "bad region line"));
        }
        let v_center = [dec(&rf[1], i)?, dec(&rf[3], i)?];
        let v_half = [dec(&rf[2], i)?, dec(&rf[4], i)?];
        let cline = lines.get(i).ok_or_else(|| err(i + 1, "unexpected end of file"))?;
        let comments = match cline.strip_prefix("comments") {
            Some(rest) => unescape(rest.trim_start()),
            None => return Err(err(i + 1, "expected `comments` line")),
        };
        i += 1;
        let sf = need(&mut i, "stats")?;
        if sf.len() != 14 {
            return Err(err(i, "bad stats line"));
        }
        let n = |k: usize| -> Result<u64, RigorError> {
            sf[k].parse().map_err(|_| err(i, "bad stats field"))
        };
        let stats = ProofStats {
            quick_checks: n(1)?,
            semi_tries: n(2)?,
            rigorous_tries: n(3)?,
            successes: n(4)?,
            trace_fires: n(5)?,
            eig_fires: n(6)?,
            deepest_cut: n(7)? as u32,
            longest_semi: n(8)? as usize,
            longest_rigorous: n(9)? as usize,
            win_trace: n(10)?,
            win_max_blam: n(11)?,
            win_min_blam: n(12)?,
            symmetric_skips: n(13)?,
        };
        let pend = need(&mut i, "pending")?;
        let n_pending: usize = pend[1].parse().map_err(|_| err(i, "bad pending count"))?;
        let mut worklist = Vec::with_capacity(n_pending);
        for _ in 0..n_pending {
            if i + 9 > lines.len() {
                return Err(err(lines.len(), "truncated prism record"));
            }
            let prism = Prism::deserialize(&lines[i..i + 9], i + 1)?;
            worklist.push(prism);
            i += 9;
        }
        let mut read_boxes = |i: &mut usize, tag: &str| -> Result<Vec<BoxRegion>, RigorError> {
            let hb = need(i, tag)?;
            let count: usize = hb[1].parse().map_err(|_| err(*i, "bad box count"))?;
            let mut out = Vec::with_capacity(count);
            for _ in 0..count {
                let bf = need(i, "box")?;
                if bf.len() != 5 {
                    return Err(err(*i, "bad box line"));
                }
                out.push(BoxRegion {
                    center: [dec(&bf[1], *i)?, dec(&bf[3], *i)?],
                    half: [dec(&bf[2], *i)?, dec(&bf[4], *i)?],
                });
            }
            Ok(out)
        };
        let certified = read_boxes(&mut i, "certified")?;
        let skipped = read_boxes(&mut i, "skipped")?;
        let input = RunInput { params, v_center, v_half, comments };
        let ctx = RigorCtx::new(cfg.dp);
        let gb = global_bounds_4d(&input.params, cfg.dp)?;
        let xstar = starting_point(&gb, StartKind::LeastLambda);
        let symmetry_enabled =
            input.params.a == input.params.b && input.params.da == input.params.db;
        Ok(ProofEngine {
            cfg,
            input,
            ctx,
            gb,
            xstar,
            worklist,
            stats,
            certified,
            skipped,
            symmetry_enabled,
            failed: Vec::new(),
        })
    }
}

fn unescape(s: &str) -> String {
    // inverse of escape_default for the characters it produces
    let mut out = String::new();
    let mut chars = s.chars();
    while let Some(c) = chars.next() {
        if c != '\\' {
            out.push(c);
            continue;
        }
        match chars.next() {
            Some('n') => out.push('\n'),
            Some('t') => out.push('\t'),
            Some('r') => out.push('\r'),
            Some('\\') => out.push('\\'),
            Some('\'') => out.push('\''),
            Some('"') => out.push('"'),
            Some('u') => {
                let mut hex = String::new();
                for h in chars.by_ref() {
                    if h == '{' {
                        continue;
                    }
                    if h == '}' {
                        break;
                    }
                    hex.push(h);
                }
                if let Ok(v) = u32::from_str_radix(&hex, 16) {
                    if let Some(ch) = char::from_u32(v) {
                        out.push(ch);
                    }
                }
            }
            Some(other) => {
                out.push('\\');
                out.push(other);
            }
            None => out.push('\\'),
        }
    }
    out
}

// ---------------------------------------------------------------------------
// report rendering
// ---------------------------------------------------------------------------

fn plain6(x: &Dec) -> String {
    // fixed six decimal places, matching the verdict block style
    let t = x.truncate(6);
    let s = t.to_plain_string();
    match s.find('.') {
        Some(pos) => {
            let frac = s.len() - pos - 1;
            format!("{}{}", s, "0".repeat(6usize.saturating_sub(frac)))
        }
        None => format!("{s}.000000"),
    }
}

/// The report body: echo block, verdict block, statistics block. The
/// timing line is appended separately so reports can be compared across
/// runs bit for bit.
pub fn render_report_body(report: &ProofReport) -> String {
    let mut s = String::new();
    let p = &report.input.params;
    let _ = writeln!(s, "Parameters : ");
    let _ = writeln!(s, "a : {} \t {}", p.a.to_sci_string(15), p.da.to_sci_string(15));
    let _ = writeln!(s, "b : {} \t {}", p.b.to_sci_string(15), p.db.to_sci_string(15));
    let _ = writeln!(s, "c : {} \t {}", p.c.to_sci_string(15), p.dc.to_sci_string(15));
    let _ = writeln!(s);
    let _ = writeln!(s, "Initial region : ");
    for k in 0..2 {
        let _ = writeln!(
            s,
            "v[{k}] : {} \t {}",
            report.input.v_center[k].to_sci_string(15),
            report.input.v_half[k].to_sci_string(15)
        );
    }
    let _ = writeln!(s);
    let _ = writeln!(s, "Comments :");
    let _ = writeln!(s);
    for line in report.input.comments.lines() {
        let _ = writeln!(s, "{line}");
    }
    let _ = writeln!(s);
    let _ = writeln!(s, "++++++++++++++++++++++++++++++++++++++++++++++++");
    match &report.verdict {
        RunVerdict::NoInvariantTori => {
            let _ = writeln!(s, "I find no invariant tori for the range of parameters :");
            let _ = writeln!(s, "{} < a < {} ", plain6(&(&p.a - &p.da)), plain6(&(&p.a + &p.da)));
            let _ = writeln!(s, "{} < b < {} ", plain6(&(&p.b - &p.db)), plain6(&(&p.b + &p.db)));
            let _ = writeln!(s, "{} < c < {} ", plain6(&(&p.c - &p.dc)), plain6(&(&p.c + &p.dc)));
        }
        RunVerdict::DepthExceeded { cut_history, unresolved } => {
            let _ = writeln!(s, "I could not decide whether invariant tori exist.");
            let _ = writeln!(
                s,
                "{unresolved} region(s) remain unresolved at the maximum refinement depth."
            );
            let _ = writeln!(s, "The first unresolvable prism came from the cuts: {cut_history}");
        }
    }
    let st = &report.stats;
    let _ = writeln!(s);
    let _ = writeln!(
        s,
        "Did {} quick checks, {} semi-rigorous bounding tries,",
        st.quick_checks, st.semi_tries
    );
    let _ = writeln!(s, "and {} rigorous bounding tries. ", st.rigorous_tries);
    let _ = writeln!(s, "The most deeply refined prism was cut {} times. ", st.deepest_cut);
    let _ = writeln!(
        s,
        "The longest semi-rigorous orbit ran for {} iterations, ",
        st.longest_semi
    );
    let _ = writeln!(s, "the longest successful orbit, {} iterations. ", st.longest_rigorous);
    let _ = writeln!(
        s,
        "Of the {} successful prisms, {} fell to the trace criterion, ",
        st.successes, st.trace_fires
    );
    let _ = writeln!(s, "{} to the least eigenvalue test. ", st.eig_fires);
    let wins = (st.win_trace + st.win_max_blam + st.win_min_blam).max(1);
    let pct = |n: u64| 100.0 * n as f64 / wins as f64;
    let _ = writeln!(s, "The best upper bound on the least eigenvalue came from ");
    let _ = writeln!(s, "the maxBlam criterion {:.1}% of the time, ", pct(st.win_max_blam));
    let _ = writeln!(s, "the minBlam criterion {:.1}% of the time, ", pct(st.win_min_blam));
    let _ = writeln!(s, "and from the trace criterion {:.1}% of the time. ", pct(st.win_trace));
    s
}

pub fn render_report(report: &ProofReport) -> String {
    let mut s = render_report_body(report);
    let _ = writeln!(s);
    let _ = writeln!(s, "This investigation took {:.2} seconds. ", report.elapsed_seconds);
    s
}

// ---------------------------------------------------------------------------
// graphics
// ---------------------------------------------------------------------------

/// Vector drawing of the successor square: certified regions dark,
/// symmetry-skipped regions light.
pub fn render_graphics(report: &ProofReport, postscript: bool) -> String {
    let cx = report.input.v_center[0].to_f64();
    let cy = report.input.v_center[1].to_f64();
    let hx = report.input.v_half[0].to_f64().max(1e-12);
    let hy = report.input.v_half[1].to_f64().max(1e-12);
    let (x0, y0) = (cx - hx, cy - hy);
    let size = 512.0;
    let sx = size / (2.0 * hx);
    let sy = size / (2.0 * hy);
    let rect = |b: &BoxRegion| -> (f64, f64, f64, f64) {
        let bx = (b.center[0].to_f64() - b.half[0].to_f64() - x0) * sx;
        let by = (b.center[1].to_f64() - b.half[1].to_f64() - y0) * sy;
        let bw = 2.0 * b.half[0].to_f64() * sx;
        let bh = 2.0 * b.half[1].to_f64() * sy;
        (bx, by, bw, bh)
    };
    if postscript {
        let mut s = String::new();
        let _ = writeln!(s, "%!PS-Adobe-3.0 EPSF-3.0");
        let _ = writeln!(s, "%%BoundingBox: 0 0 {size} {size}");
        let _ = writeln!(s, "0 setlinewidth");
        for (list, shade) in [(&report.certified, 0.3), (&report.skipped, 0.8)] {
            for b in list.iter() {
                let (x, y, w, h) = rect(b);
                let _ = writeln!(
                    s,
                    "newpath {x:.2} {y:.2} moveto {w:.2} 0 rlineto 0 {h:.2} rlineto {:.2} 0 rlineto closepath {shade} setgray fill",
                    -w
                );
            }
        }
        let _ = writeln!(
            s,
            "newpath 0 0 moveto {size} 0 rlineto 0 {size} rlineto -{size} 0 rlineto closepath 0 setgray stroke"
        );
        let _ = writeln!(s, "showpage");
        s
    } else {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {size} {size}\">"
        );
        for (list, fill) in [(&report.certified, "#444444"), (&report.skipped, "#cccccc")] {
            for b in list.iter() {
                let (x, y, w, h) = rect(b);
                // SVG's y axis points down; flip so v1 grows upward
                let yy = size - y - h;
                let _ = writeln!(
                    s,
                    "  <rect x=\"{x:.2}\" y=\"{yy:.2}\" width=\"{w:.2}\" height=\"{h:.2}\" fill=\"{fill}\"/>"
                );
            }
        }
        let _ = writeln!(
            s,
            "  <rect x=\"0\" y=\"0\" width=\"{size}\" height=\"{size}\" fill=\"none\" stroke=\"black\"/>"
        );
        let _ = writeln!(s, "</svg>");
        s
    }
}

// ---------------------------------------------------------------------------
// double-precision mirror of the rigorous pipeline
// ---------------------------------------------------------------------------

mod fast {
    //! A floating-point copy of the prism-bounding loop, used only to decide
    //! whether the exact-arithmetic attempt is worth its cost.

    use super::GlobalBounds;
    use crate::map::{beta_abc_f64, g_abc_f64, gamma_abc_f64};
    use crate::prism::Prism;

    const TAU: f64 = std::f64::consts::TAU;

    #[derive(Clone, Copy)]
    struct Iv {
        lo: f64,
        hi: f64,
    }

    impl Iv {
        fn point(x: f64) -> Iv {
            Iv { lo: x, hi: x }
        }

        fn add(self, o: Iv) -> Iv {
            Iv { lo: self.lo + o.lo, hi: self.hi + o.hi }
        }

        fn sub(self, o: Iv) -> Iv {
            Iv { lo: self.lo - o.hi, hi: self.hi - o.lo }
        }

        fn mul(self, o: Iv) -> Iv {
            let c = [self.lo * o.lo, self.lo * o.hi, self.hi * o.lo, self.hi * o.hi];
            Iv {
                lo: c.iter().cloned().fold(f64::INFINITY, f64::min),
                hi: c.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
            }
        }

        fn abs_ub(self) -> f64 {
            self.lo.abs().max(self.hi.abs())
        }
    }

    fn sin_range(lo: f64, hi: f64) -> Iv {
        if hi - lo >= TAU {
            return Iv { lo: -1.0, hi: 1.0 };
        }
        let (a, b) = (lo.sin(), hi.sin());
        let mut out = Iv { lo: a.min(b), hi: a.max(b) };
        let k0 = ((lo - TAU / 4.0) / TAU).floor() as i64 - 1;
        for k in k0..k0 + 4 {
            let up = TAU / 4.0 + k as f64 * TAU;
            if up >= lo && up <= hi {
                out.hi = 1.0;
            }
            let dn = 3.0 * TAU / 4.0 + k as f64 * TAU;
            if dn >= lo && dn <= hi {
                out.lo = -1.0;
            }
        }
        out
    }

    fn cos_range(lo: f64, hi: f64) -> Iv {
        sin_range(lo + TAU / 4.0, hi + TAU / 4.0)
    }

    struct FPrism {
        center: [f64; 7],
        m: [[f64; 7]; 7],
    }

    impl FPrism {
        fn coord_range(&self, i: usize) -> Iv {
            let r: f64 = (0..7).map(|j| self.m[i][j].abs()).sum();
            Iv { lo: self.center[i] - r, hi: self.center[i] + r }
        }
    }

    fn beta_range_iv(v0: Iv, v1: Iv, abc: &[Iv; 3]) -> [[Iv; 2]; 2] {
        let s0 = sin_range(v0.lo, v0.hi);
        let s1 = sin_range(v1.lo, v1.hi);
        let s01 = sin_range(v0.lo + v1.lo, v0.hi + v1.hi);
        let two = Iv::point(2.0);
        let off = Iv::point(0.0).sub(abc[2].mul(s01));
        [
            [two.sub(abc[0].mul(s0)).add(off), off],
            [off, two.sub(abc[1].mul(s1)).add(off)],
        ]
    }

    fn gamma_range_iv(v0: Iv, v1: Iv) -> [[Iv; 3]; 2] {
        let c0 = cos_range(v0.lo, v0.hi);
        let c1 = cos_range(v1.lo, v1.hi);
        let c01 = cos_range(v0.lo + v1.lo, v0.hi + v1.hi);
        let z = Iv::point(0.0);
        [[c0, z, c01], [z, c1, c01]]
    }

    fn beta_stats_iv(v0: Iv, v1: Iv, abc: &[Iv; 3]) -> (f64, f64, f64) {
        let s0 = sin_range(v0.lo, v0.hi);
        let s1 = sin_range(v1.lo, v1.hi);
        let s01 = sin_range(v0.lo + v1.lo, v0.hi + v1.hi);
        let a_s0 = abc[0].mul(s0);
        let b_s1 = abc[1].mul(s1);
        let c_s01 = abc[2].mul(s01);
        let tr_ub = 4.0 - a_s0.lo - b_s1.lo - 2.0 * c_s01.lo;
        let diff = a_s0.sub(b_s1);
        let dsq = diff.mul(diff);
        let csq = c_s01.mul(c_s01);
        let disc_lo = dsq.lo.max(0.0) + 4.0 * csq.lo.max(0.0);
        let disc_hi = dsq.hi.max(0.0) + 4.0 * csq.hi.max(0.0);
        let lam_plus_ub = 0.5 * (tr_ub + disc_hi.sqrt());
        let lam_minus_ub = 0.5 * (tr_ub - disc_lo.sqrt());
        (tr_ub, lam_plus_ub, lam_minus_ub)
    }

    fn gauss_inv4(m: [[f64; 4]; 4]) -> Option<[[f64; 4]; 4]> {
        let mut a = [[0.0f64; 8]; 4];
        for i in 0..4 {
            for j in 0..4 {
                a[i][j] = m[i][j];
            }
            a[i][4 + i] = 1.0;
        }
        for c in 0..4 {
            let mut piv = c;
            for r in c + 1..4 {
                if a[r][c].abs() > a[piv][c].abs() {
                    piv = r;
                }
            }
            a.swap(c, piv);
            if a[c][c].abs() < 1e-300 {
                return None;
            }
            let f = a[c][c];
            for k in 0..8 {
                a[c][k] /= f;
            }
            for r in 0..4 {
                if r == c {
                    continue;
                }
                let f = a[r][c];
                for k in 0..8 {
                    a[r][k] -= f * a[c][k];
                }
            }
        }
        let mut out = [[0.0f64; 4]; 4];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = a[i][4 + j];
            }
        }
        Some(out)
    }

    type Mat = Vec<Vec<f64>>;
    type IvMat = Vec<Vec<Iv>>;

    fn iv_from(m: &Mat) -> IvMat {
        m.iter().map(|r| r.iter().map(|&x| Iv::point(x)).collect()).collect()
    }

    fn ivmat_mul_d(m: &IvMat, d: &Mat) -> IvMat {
        (0..m.len())
            .map(|i| {
                (0..d[0].len())
                    .map(|j| {
                        let mut acc = Iv::point(0.0);
                        for k in 0..d.len() {
                            acc = acc.add(m[i][k].mul(Iv::point(d[k][j])));
                        }
                        acc
                    })
                    .collect()
            })
            .collect()
    }

    fn d_mul_iv(d: &Mat, m: &IvMat) -> IvMat {
        (0..d.len())
            .map(|i| {
                (0..m[0].len())
                    .map(|j| {
                        let mut acc = Iv::point(0.0);
                        for k in 0..m.len() {
                            acc = acc.add(m[k][j].mul(Iv::point(d[i][k])));
                        }
                        acc
                    })
                    .collect()
            })
            .collect()
    }

    fn iv_add(x: &IvMat, y: &IvMat) -> IvMat {
        x.iter()
            .zip(y)
            .map(|(rx, ry)| rx.iter().zip(ry).map(|(a, b)| a.add(*b)).collect())
            .collect()
    }

    fn iv_sub_d(x: &IvMat, y: &Mat) -> IvMat {
        x.iter()
            .zip(y)
            .map(|(rx, ry)| rx.iter().zip(ry).map(|(a, b)| a.sub(Iv::point(*b))).collect())
            .collect()
    }

    /// Mirror of the rigorous image bound, without the error ledgers.
    fn bound_image_f64(
        p: &FPrism,
        abc_iv: &[Iv; 3],
        first: bool,
        min_angle: f64,
    ) -> Option<FPrism> {
        let abc = [p.center[0], p.center[1], p.center[2]];
        let u = [p.center[3], p.center[4]];
        let v = [p.center[5], p.center[6]];
        let (u1, v1) = g_abc_f64(u, v, abc);
        let mut c1 = p.center;
        c1[3] = u1[0];
        c1[4] = u1[1];
        c1[5] = v1[0];
        c1[6] = v1[1];
        let beta_c = beta_abc_f64(v, abc);
        let gamma_c = gamma_abc_f64(v);
        let blk = |r0: usize, c0: usize, rows: usize, cols: usize| -> Mat {
            (0..rows).map(|i| (0..cols).map(|j| p.m[r0 + i][c0 + j]).collect()).collect()
        };
        let ppp = blk(0, 0, 3, 3);
        let pup = blk(3, 0, 2, 3);
        let puu = blk(3, 3, 2, 2);
        let puv = blk(3, 5, 2, 2);
        let pvp = blk(5, 0, 2, 3);
        let pvu = blk(5, 3, 2, 2);
        let pvv = blk(5, 5, 2, 2);
        let mul22 = |a: &[[f64; 2]; 2], b: &Mat| -> Mat {
            (0..2)
                .map(|i| {
                    (0..b[0].len()).map(|j| (0..2).map(|k| a[i][k] * b[k][j]).sum()).collect()
                })
                .collect()
        };
        let sub = |a: &Mat, b: &Mat| -> Mat {
            a.iter()
                .zip(b)
                .map(|(ra, rb)| ra.iter().zip(rb).map(|(x, y)| x - y).collect())
                .collect()
        };
        let add = |a: &Mat, b: &Mat| -> Mat {
            a.iter()
                .zip(b)
                .map(|(ra, rb)| ra.iter().zip(rb).map(|(x, y)| x + y).collect())
                .collect()
        };
        let gmul = |g: &[[f64; 3]; 2], b: &Mat| -> Mat {
            (0..2)
                .map(|i| {
                    (0..b[0].len()).map(|j| (0..3).map(|k| g[i][k] * b[k][j]).sum()).collect()
                })
                .collect()
        };
        let avp = add(&sub(&gmul(&gamma_c, &ppp), &pup), &mul22(&beta_c, &pvp));
        let mut a = [[0.0f64; 7]; 7];
        for i in 0..3 {
            for j in 0..3 {
                a[i][j] = ppp[i][j];
            }
            if a[i][i] == 0.0 {
                a[i][i] = 1e-30;
            }
        }
        let (auu, auv, avu, avv): (Mat, Mat, Mat, Mat) = if first {
            let auv = add(&pvu, &pvv);
            (
                vec![vec![0.0; 2]; 2],
                auv.clone(),
                mul22(&beta_c, &auv),
                sub(&mul22(&beta_c, &pvv), &puv),
            )
        } else {
            (
                pvu.clone(),
                pvv.clone(),
                sub(&mul22(&beta_c, &pvu), &puu),
                sub(&mul22(&beta_c, &pvv), &puv),
            )
        };
        for i in 0..2 {
            for j in 0..3 {
                a[3 + i][j] = pvp[i][j];
                a[5 + i][j] = avp[i][j];
            }
            for j in 0..2 {
                a[3 + i][3 + j] = auu[i][j];
                a[3 + i][5 + j] = auv[i][j];
                a[5 + i][3 + j] = avu[i][j];
                a[5 + i][5 + j] = avv[i][j];
            }
        }
        if !first {
            // column rotor on the phase block
            let mut cols = [[0.0f64; 4]; 4];
            for c in 0..4 {
                for r in 0..4 {
                    cols[c][r] = a[3 + r][3 + c];
                }
            }
            for i in 0..4 {
                for j in i + 1..4 {
                    rotate_pair(&mut cols, i, j, min_angle);
                }
            }
            for c in 0..4 {
                for r in 0..4 {
                    a[3 + r][3 + c] = cols[c][r];
                }
            }
        }
        let phase = [
            [a[3][3], a[3][4], a[3][5], a[3][6]],
            [a[4][3], a[4][4], a[4][5], a[4][6]],
            [a[5][3], a[5][4], a[5][5], a[5][6]],
            [a[6][3], a[6][4], a[6][5], a[6][6]],
        ];
        let inv = gauss_inv4(phase)?;
        let (v0, v1) = (p.coord_range(5), p.coord_range(6));
        let br = beta_range_iv(v0, v1, abc_iv);
        let gr = gamma_range_iv(v0, v1);
        let db: IvMat = (0..2)
            .map(|i| (0..2).map(|j| br[i][j].sub(Iv::point(beta_c[i][j]))).collect())
            .collect();
        let dg: IvMat = (0..2)
            .map(|i| (0..3).map(|j| gr[i][j].sub(Iv::point(gamma_c[i][j]))).collect())
            .collect();
        let br_iv: IvMat = (0..2).map(|i| (0..2).map(|j| br[i][j]).collect()).collect();
        let m_p = iv_add(&ivmat_mul_d(&dg, &ppp), &ivmat_mul_d(&db, &pvp));
        let m_u = iv_sub_d(&ivmat_mul_d(&br_iv, &pvu), &puu);
        let m_v = iv_sub_d(&ivmat_mul_d(&br_iv, &pvv), &puv);
        let mut w = [1.0f64; 7];
        for r in 0..4 {
            let bu_r: Mat = vec![vec![inv[r][0], inv[r][1]]];
            let bv_r: Mat = vec![vec![inv[r][2], inv[r][3]]];
            let t_p = d_mul_iv(&bv_r, &m_p);
            let t_u = iv_add(&d_mul_iv(&bu_r, &iv_from(&pvu)), &d_mul_iv(&bv_r, &m_u));
            let t_v = iv_add(&d_mul_iv(&bu_r, &iv_from(&pvv)), &d_mul_iv(&bv_r, &m_v));
            let sum = |m: &IvMat| -> f64 { m[0].iter().map(|iv| iv.abs_ub()).sum() };
            w[3 + r] = sum(&t_p) + sum(&t_u) + sum(&t_v) + 1e-12;
        }
        let mut m1 = [[0.0f64; 7]; 7];
        for j in 0..7 {
            for i in 0..7 {
                m1[i][j] = a[i][j] * w[j];
            }
        }
        Some(FPrism { center: c1, m: m1 })
    }

    fn rotate_pair(cols: &mut [[f64; 4]; 4], i: usize, j: usize, min_angle: f64) {
        let dot = |x: &[f64; 4], y: &[f64; 4]| x.iter().zip(y).map(|(a, b)| a * b).sum::<f64>();
        let norm = |x: &[f64; 4]| dot(x, x).sqrt();
        let (ni, nj) = (norm(&cols[i]), norm(&cols[j]));
        if ni == 0.0 || nj == 0.0 {
            return;
        }
        let cosang = (dot(&cols[i], &cols[j]) / (ni * nj)).clamp(-1.0, 1.0);
        if cosang.abs().acos() >= min_angle {
            return;
        }
        let (keep, turn) = if ni >= nj { (i, j) } else { (j, i) };
        let x = cols[keep];
        let y = cols[turn];
        let nx = norm(&x);
        let xhat: [f64; 4] = std::array::from_fn(|k| x[k] / nx);
        let proj = dot(&y, &xhat);
        let mut perp: [f64; 4] = std::array::from_fn(|k| y[k] - proj * xhat[k]);
        let np = norm(&perp);
        if np < 1e-14 * nj {
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

    /// The floating-point orbit-following test. Returns the number of
    /// bounded steps on success.
    pub fn try_prism_f64(
        prism: &Prism,
        gb: &GlobalBounds,
        min_angle: f64,
        budget: usize,
    ) -> Option<usize> {
        let pb = prism.param_box();
        let centers = pb.centers_f64();
        let halves = [pb.da.to_f64(), pb.db.to_f64(), pb.dc.to_f64()];
        let abc_iv: [Iv; 3] = std::array::from_fn(|k| Iv {
            lo: centers[k] - halves[k],
            hi: centers[k] + halves[k],
        });
        let lam_min = gb.lam_minus_min.to_f64();
        let lam_max = gb.lam_minus_max.to_f64();
        let tr_min = gb.tr_min.to_f64();
        let tr_max = gb.tr_max.to_f64();
        let mut lam = lam_max;
        let mut tr = tr_max;
        let mut suite = |tr_b: f64, lp_b: f64, lm_b: f64| -> Option<bool> {
            if lam <= 0.0 || tr <= 0.0 {
                return Some(true);
            }
            let s1 = 0.5 * tr_b - 2.0 / tr;
            let s2 = lp_b - 1.0 / lam;
            let denom = tr - lam_min;
            let s3 = if denom > 0.0 { lm_b - 1.0 / denom } else { f64::INFINITY };
            let new_lam = s1.min(s2).min(s3).min(lam_max);
            let new_tr = (tr_b - 4.0 / tr).min(tr_max);
            if new_lam < lam_min || new_tr < tr_min {
                return Some(true);
            }
            lam = new_lam;
            tr = new_tr;
            Some(false)
        };
        let fp = FPrism {
            center: prism.center.to_f64(),
            m: {
                let mm = prism.matrix.to_f64();
                let mut out = [[0.0f64; 7]; 7];
                for i in 0..7 {
                    for j in 0..7 {
                        out[i][j] = mm[i][j];
                    }
                }
                out
            },
        };
        // step 0: the starting point itself
        let x0 = Iv::point(fp.center[3]);
        let x1 = Iv::point(fp.center[4]);
        let (t0, p0, m0) = beta_stats_iv(x0, x1, &abc_iv);
        if suite(t0, p0, m0)? {
            return Some(0);
        }
        let (tv, pv, mv) = beta_stats_iv(fp.coord_range(5), fp.coord_range(6), &abc_iv);
        if suite(tv, pv, mv)? {
            return Some(0);
        }
        let mut cur = fp;
        for step in 0..budget {
            let next = bound_image_f64(&cur, &abc_iv, step == 0, min_angle)?;
            let (tb, pb2, mb) = beta_stats_iv(next.coord_range(5), next.coord_range(6), &abc_iv);
            if suite(tb, pb2, mb)? {
                return Some(step + 1);
            }
            cur = next;
        }
        None
    }
}
