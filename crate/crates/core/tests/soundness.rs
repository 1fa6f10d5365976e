//! Monte Carlo containment checks for the image-bounding machinery: for
//! every sampled point x of a prism S, G(x) must land inside the bounding
//! prism of G(S). This is the one property the whole proof rests on.

use ckam_core::dec::Dec;
use ckam_core::map::{g_abc_f64, AbcParams};
use ckam_core::prism::{bound_image, Fattener, Prism, RigorCtx};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

fn d(s: &str) -> Dec {
    Dec::parse(s).unwrap()
}

/// Solve a 7x7 linear system in f64 (partial pivoting).
fn solve7(a: &[Vec<f64>], b: [f64; 7]) -> [f64; 7] {
    let mut m = [[0.0f64; 8]; 7];
    for i in 0..7 {
        for j in 0..7 {
            m[i][j] = a[i][j];
        }
        m[i][7] = b[i];
    }
    for c in 0..7 {
        let mut piv = c;
        for r in c + 1..7 {
            if m[r][c].abs() > m[piv][c].abs() {
                piv = r;
            }
        }
        m.swap(c, piv);
        assert!(m[c][c].abs() > 1e-300, "singular bounding matrix");
        for r in 0..7 {
            if r == c {
                continue;
            }
            let f = m[r][c] / m[c][c];
            for k in c..8 {
                m[r][k] -= f * m[c][k];
            }
        }
    }
    std::array::from_fn(|i| m[i][7] / m[i][i])
}

fn extended_step(z: [f64; 7]) -> [f64; 7] {
    let (u1, v1) = g_abc_f64([z[3], z[4]], [z[5], z[6]], [z[0], z[1], z[2]]);
    [z[0], z[1], z[2], u1[0], u1[1], v1[0], v1[1]]
}

fn point_in_prism(prism: &Prism, z: [f64; 7], tol: f64) -> bool {
    let a = prism.matrix.to_f64();
    let c = prism.center.to_f64();
    let rhs: [f64; 7] = std::array::from_fn(|i| z[i] - c[i]);
    let eta = solve7(&a, rhs);
    eta.iter().all(|e| e.abs() <= 1.0 + tol)
}

fn sample_in_prism(prism: &Prism, rng: &mut StdRng) -> [f64; 7] {
    let a = prism.matrix.to_f64();
    let c = prism.center.to_f64();
    let eta: [f64; 7] = std::array::from_fn(|_| rng.gen_range(-1.0..1.0));
    std::array::from_fn(|i| {
        let mut v = c[i];
        for (j, e) in eta.iter().enumerate() {
            v += a[i][j] * e;
        }
        v
    })
}

fn random_worklist_prism(rng: &mut StdRng) -> Prism {
    let a = rng.gen_range(0.05..0.45);
    let b = rng.gen_range(0.05..0.45);
    let c = rng.gen_range(0.1..0.7);
    let params = AbcParams {
        a: Dec::from_f64_exact(a),
        da: Dec::from_f64_exact(rng.gen_range(0.0001..0.01)),
        b: Dec::from_f64_exact(b),
        db: Dec::from_f64_exact(rng.gen_range(0.0001..0.01)),
        c: Dec::from_f64_exact(c),
        dc: Dec::from_f64_exact(rng.gen_range(0.0001..0.02)),
    };
    let s = rng.gen_range(0.0..6.28);
    let xstar = [Dec::from_f64_exact(s), Dec::from_f64_exact(s)];
    let vc = [
        Dec::from_f64_exact(rng.gen_range(0.0..6.28)),
        Dec::from_f64_exact(rng.gen_range(0.0..6.28)),
    ];
    let vh = [
        Dec::from_f64_exact(rng.gen_range(0.001..0.3)),
        Dec::from_f64_exact(rng.gen_range(0.001..0.3)),
    ];
    Prism::worklist(&params, &xstar, &vc, &vh)
}

/// Fixed-form step on random worklist prisms.
#[test]
fn fixed_form_containment_monte_carlo() {
    let ctx = RigorCtx::new(35);
    let mut rng = StdRng::seed_from_u64(71);
    let mut checked = 0usize;
    for _ in 0..40 {
        let prism = random_worklist_prism(&mut rng);
        let image = bound_image(&prism, &ctx, Fattener::FixedForm).unwrap();
        for _ in 0..300 {
            let z = sample_in_prism(&prism, &mut rng);
            let z1 = extended_step(z);
            assert!(
                point_in_prism(&image, z1, 1e-8),
                "escape from fixed-form image (prism center {:?})",
                prism.center.to_f64()
            );
            checked += 1;
        }
    }
    assert!(checked >= 10_000);
}

/// Column-rotor steps chained after the fixed-form step; the sampled orbit
/// must stay inside the corresponding image prisms.
#[test]
fn column_rotor_containment_monte_carlo() {
    let ctx = RigorCtx::new(35);
    let mut rng = StdRng::seed_from_u64(72);
    let mut checked = 0usize;
    for _ in 0..25 {
        let prism = random_worklist_prism(&mut rng);
        let s1 = bound_image(&prism, &ctx, Fattener::FixedForm).unwrap();
        let s2 = match bound_image(&s1, &ctx, Fattener::ColumnRotor) {
            Ok(p) => p,
            Err(_) => continue, // singular chains are failures upstream
        };
        let s3 = match bound_image(&s2, &ctx, Fattener::ColumnRotor) {
            Ok(p) => p,
            Err(_) => continue,
        };
        for _ in 0..200 {
            let z = sample_in_prism(&prism, &mut rng);
            let z1 = extended_step(z);
            let z2 = extended_step(z1);
            let z3 = extended_step(z2);
            assert!(point_in_prism(&s1, z1, 1e-8), "step 1 escape");
            assert!(point_in_prism(&s2, z2, 1e-8), "step 2 escape");
            assert!(point_in_prism(&s3, z3, 1e-8), "step 3 escape");
            checked += 3;
        }
    }
    assert!(checked >= 9_000, "only {checked} checks ran");
}

/// The 1-D version of the bounding lemma applied to a lift of the circle
/// map x + 0.3 + (0.8/2pi) sin(2pi x): the returned interval contains the
/// true image of the input interval (checked by dense sampling).
#[test]
fn circle_map_interval_bound() {
    let omega = 0.3;
    let eps = 0.8;
    let tau = std::f64::consts::TAU;
    let phi = |x: f64| x + omega + eps / tau * (tau * x).sin();
    let dphi = |x: f64| 1.0 + eps * (tau * x).cos();
    // interval I0 = [xc - dx, xc + dx]
    let (xc, dx) = (0.15, 0.1);
    let delta = 1e-12; // accuracy of the f64 "computed" center image
    let a = dphi(xc) * dx;
    // w = delta/|A| + ub over S of |phi'(x)/phi'(xc)|
    let mut sup = 0.0f64;
    for i in 0..=100_000 {
        let x = xc - dx + 2.0 * dx * i as f64 / 100_000.0;
        sup = sup.max((dphi(x) / dphi(xc)).abs());
    }
    let w = delta / a.abs() + sup * 1.0001; // small slack for the sampled sup
    let center = phi(xc);
    let half = (a * w).abs();
    for i in 0..=10_000 {
        let x = xc - dx + 2.0 * dx * i as f64 / 10_000.0;
        let y = phi(x);
        assert!(
            y >= center - half - 1e-12 && y <= center + half + 1e-12,
            "phi({x}) = {y} outside [{}, {}]",
            center - half,
            center + half
        );
    }
}

/// 2-D analog of the rotor-angle comparison: for a contracted image, the
/// 27-degree rotor encloses the parallelogram more tightly than forcing the
/// columns orthogonal (90 degrees), while both contain the true image.
#[test]
fn rotor_angle_comparison_2d() {
    // contracting linear map applied to a thin box: columns of D*P nearly
    // parallel
    let dmap: [[f64; 2]; 2] = [[1.0, 0.96], [0.9, 0.91]];
    let p: [[f64; 2]; 2] = [[0.2, 0.0], [0.0, 0.05]];
    let dp = [
        [
            dmap[0][0] * p[0][0] + dmap[0][1] * p[1][0],
            dmap[0][0] * p[0][1] + dmap[0][1] * p[1][1],
        ],
        [
            dmap[1][0] * p[0][0] + dmap[1][1] * p[1][0],
            dmap[1][0] * p[0][1] + dmap[1][1] * p[1][1],
        ],
    ];
    let fatten = |angle: f64| -> ([[f64; 2]; 2], f64) {
        // rotate the shorter column to sit at `angle` from the longer
        let n0 = (dp[0][0].powi(2) + dp[1][0].powi(2)).sqrt();
        let n1 = (dp[0][1].powi(2) + dp[1][1].powi(2)).sqrt();
        let (keep, turn) = if n0 >= n1 { (0, 1) } else { (1, 0) };
        let kx = [dp[0][keep], dp[1][keep]];
        let nk = (kx[0] * kx[0] + kx[1] * kx[1]).sqrt();
        let xhat = [kx[0] / nk, kx[1] / nk];
        let perp = [-xhat[1], xhat[0]];
        let ty = [dp[0][turn], dp[1][turn]];
        let nt = (ty[0] * ty[0] + ty[1] * ty[1]).sqrt();
        let sign = if ty[0] * xhat[0] + ty[1] * xhat[1] >= 0.0 { 1.0 } else { -1.0 };
        let newcol = [
            nt * (sign * angle.cos() * xhat[0] + angle.sin() * perp[0]),
            nt * (sign * angle.cos() * xhat[1] + angle.sin() * perp[1]),
        ];
        let mut a = dp;
        a[0][turn] = newcol[0];
        a[1][turn] = newcol[1];
        // w_j = ub sum_k |(A^-1 D P)_jk| over the box (D constant here)
        let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
        let ainv = [[a[1][1] / det, -a[0][1] / det], [-a[1][0] / det, a[0][0] / det]];
        let m = [
            [
                ainv[0][0] * dp[0][0] + ainv[0][1] * dp[1][0],
                ainv[0][0] * dp[0][1] + ainv[0][1] * dp[1][1],
            ],
            [
                ainv[1][0] * dp[0][0] + ainv[1][1] * dp[1][0],
                ainv[1][0] * dp[0][1] + ainv[1][1] * dp[1][1],
            ],
        ];
        let w0 = m[0][0].abs() + m[0][1].abs();
        let w1 = m[1][0].abs() + m[1][1].abs();
        let area = (a[0][0] * w0 * a[1][1] * w1 - a[0][1] * w1 * a[1][0] * w0).abs();
        (
            [[a[0][0] * w0, a[0][1] * w1], [a[1][0] * w0, a[1][1] * w1]],
            area,
        )
    };
    let (p27, area27) = fatten(27f64.to_radians());
    let (p90, area90) = fatten(90f64.to_radians());
    assert!(area27 < area90, "27 deg: {area27}, 90 deg: {area90}");
    // both contain the true image of the box
    for (pp, name) in [(p27, "27"), (p90, "90")] {
        let det = pp[0][0] * pp[1][1] - pp[0][1] * pp[1][0];
        for i in 0..=40 {
            for j in 0..=40 {
                let e0 = -1.0 + 2.0 * i as f64 / 40.0;
                let e1 = -1.0 + 2.0 * j as f64 / 40.0;
                let x = [p[0][0] * e0, p[1][1] * e1];
                let y = [
                    dmap[0][0] * x[0] + dmap[0][1] * x[1],
                    dmap[1][0] * x[0] + dmap[1][1] * x[1],
                ];
                let n0 = (pp[1][1] * y[0] - pp[0][1] * y[1]) / det;
                let n1 = (-pp[1][0] * y[0] + pp[0][0] * y[1]) / det;
                assert!(n0.abs() <= 1.0 + 1e-9 && n1.abs() <= 1.0 + 1e-9, "{name} deg escape");
            }
        }
    }
}
