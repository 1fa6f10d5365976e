use ckam_core::dec::Dec;
use ckam_core::map::{AbcParams, beta_stats};
use ckam_core::prism::{bound_image, Fattener, Prism, RigorCtx};
use ckam_core::cones::{global_bounds_4d, starting_point, StartKind, DiagStats, eigen_suite_step};
use ckam_core::interval::Interval;

fn main() {
    let d = |s: &str| Dec::parse(s).unwrap();
    let params = AbcParams {
        a: d("0.3085"), da: d("0.00125"),
        b: d("0.3085"), db: d("0.00125"),
        c: d("0.617"),  dc: d("0.0025"),
    };
    let ctx = RigorCtx::new(35);
    let gb = global_bounds_4d(&params, 35).unwrap();
    let xstar = starting_point(&gb, StartKind::LeastLambda);
    eprintln!("xstar angle = {}", xstar[0].to_f64());
    eprintln!("lam cone = [{}, {}], tr cone = [{}, {}]",
        gb.lam_minus_min.to_f64(), gb.lam_minus_max.to_f64(),
        gb.tr_min.to_f64(), gb.tr_max.to_f64());
    // a hard box: near the corner by the potential max (hardest per the thesis)
    // the failing cut history pointed near upper-right of the square
    for (vc, vh) in [
        ([4.4171, 0.0782], [0.00077, 0.00153]),
        ([4.4140, 0.0844], [0.00077, 0.00153]),
    ] {
        eprintln!("--- box at {:?} half {:?}", vc, vh);
        let prism = Prism::worklist(&params, &xstar,
            &[Dec::from_f64_exact(vc[0]), Dec::from_f64_exact(vc[1])],
            &[Dec::from_f64_exact(vh[0]), Dec::from_f64_exact(vh[1])]);
        let mut stats = DiagStats::initial(&gb);
        let x0 = (Interval::point(xstar[0].clone()), Interval::point(xstar[1].clone()));
        let regions = [x0, prism.v_range()];
        let mut ok = true;
        for (v0, v1) in regions {
            let b = beta_stats(&v0, &v1, &params, &ctx.trig).unwrap();
            match eigen_suite_step(&b, &stats, &gb, ctx.precision) {
                Some(st) => {
                    eprintln!("  pre-step: lam={:.6} tr={:.6} fired={:?} (beta: tr_ub {:.4} lp {:.4} lm {:.4})",
                        st.stats.ub_lam_minus.to_f64(), st.stats.ub_trace.to_f64(), st.fired,
                        b.tr_ub.to_f64(), b.lam_plus_ub.to_f64(), b.lam_minus_ub.to_f64());
                    if st.fired.is_some() { ok = false; break; }
                    stats = st.stats;
                }
                None => { eprintln!("  vacuous"); ok = false; break; }
            }
        }
        if !ok { continue; }
        let mut cur = prism.clone();
        for step in 0..8 {
            let fat = if step == 0 { Fattener::FixedForm } else { Fattener::ColumnRotor };
            match bound_image(&cur, &ctx, fat) {
                Ok(next) => {
                    let (r0, r1) = next.v_range();
                    eprintln!("  step {}: v-range widths = {:.5} x {:.5}, u widths = {:.5} x {:.5}",
                        step + 1, r0.width().to_f64(), r1.width().to_f64(),
                        next.coord_range(3).width().to_f64(), next.coord_range(4).width().to_f64());
                    let b = beta_stats(&r0, &r1, &params, &ctx.trig).unwrap();
                    match eigen_suite_step(&b, &stats, &gb, ctx.precision) {
                        Some(st) => {
                            eprintln!("    suite: lam={:.6} tr={:.6} fired={:?}",
                                st.stats.ub_lam_minus.to_f64(), st.stats.ub_trace.to_f64(), st.fired);
                            if st.fired.is_some() { break; }
                            if st.stats.ub_lam_minus >= stats.ub_lam_minus && st.stats.ub_trace >= stats.ub_trace {
                                eprintln!("    STALL");
                                break;
                            }
                            stats = st.stats;
                        }
                        None => { eprintln!("    vacuous"); break; }
                    }
                    cur = next;
                }
                Err(e) => { eprintln!("  step {} error: {e}", step + 1); break; }
            }
        }
    }
}
