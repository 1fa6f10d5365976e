use ckam_core::dec::Dec;
use ckam_core::map::AbcParams;
use ckam_core::proof::{ProofConfig, ProofEngine, RunInput};
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
        comments: String::new(),
    };
    let cfg = ProofConfig { max_depth: 24, stubborn: true, ..ProofConfig::default() };
    let mut engine = ProofEngine::new(input, cfg).unwrap();
    let report = engine.run(|_| {});
    eprintln!("verdict: {:?}", report.verdict);
    eprintln!("stats: {:?}", report.stats);
    for p in engine.failed_prisms().iter().take(12) {
        eprintln!("failed at: v=({:.4}, {:.4}) half=({:.5}, {:.5})",
            p.center.v[0].to_f64(), p.center.v[1].to_f64(),
            p.matrix.get(5,5).to_f64(), p.matrix.get(6,6).to_f64());
    }
}
