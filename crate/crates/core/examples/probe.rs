use ckam_core::dec::Dec;
use ckam_core::map::AbcParams;
use ckam_core::proof::{ProofConfig, ProofEngine, RunInput, render_report};
use ckam_core::special::pi_dec;

fn main() {
    let d = |s: &str| Dec::parse(s).unwrap();
    let pi = pi_dec(45);
    let input = RunInput {
        params: AbcParams {
            a: d("0.3085"), da: d("0.00125"),
            b: d("0.3085"), db: d("0.00125"),
            c: d("0.617"),  dc: d("0.0025"),
        },
        v_center: [pi.clone(), pi.clone()],
        v_half: [pi.clone(), pi],
        comments: "0.0274 < epsilon < 0.0276".to_string(),
    };
    let cfg = ProofConfig { max_depth: 30, ..ProofConfig::default() };
    let mut engine = ProofEngine::new(input, cfg).unwrap();
    let t0 = std::time::Instant::now();
    let mut n = 0u64;
    let report = engine.run(|e| {
        n += 1;
        if n % 50 == 0 {
            eprintln!("[{:.1}s] processed {} prisms, {} pending", t0.elapsed().as_secs_f64(), n, e.pending());
        }
    });
    println!("{}", render_report(&report));
}
