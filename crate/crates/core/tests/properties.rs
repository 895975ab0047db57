mod common;

use common::*;
use graphvar::io::{function_to_string, graph_to_string, measure_to_string, read_function, read_graph};
use graphvar::meanfield::solve_meanfield_negative;
use graphvar::schrodinger::solve_local_schrodinger;
use graphvar::spaces::{h_inner, h_norm};
use graphvar::yamabe::{nonlinearity, scaling_map_check, yamabe_energy};
use graphvar::{VertexFunction, WeightedGraph};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn graph_from(seed: u64, n: usize) -> (WeightedGraph, ChaCha8Rng) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = random_connected_graph(&mut rng, n, (0.1, 5.0), (0.1, 5.0), 0.25);
    (g, rng)
}

fn random_fn(rng: &mut ChaCha8Rng, n: usize, lo: f64, hi: f64) -> VertexFunction {
    VertexFunction::from_values((0..n).map(|_| rng.random_range(lo..=hi)).collect())
}

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(1.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn laplacian_matches_oracle(seed in any::<u64>(), n in 1usize..20) {
        let (g, mut rng) = graph_from(seed, n);
        let u = random_fn(&mut rng, n, -3.0, 3.0);
        for x in 0..n {
            prop_assert!(close(g.laplacian(&u, x).unwrap(), laplacian(&g, u.values(), x), 1e-12));
        }
    }

    /// `∫ Γ(u,v) dμ = −∫ v Δu dμ` on a finite graph.
    #[test]
    fn green_identity(seed in any::<u64>(), n in 1usize..20) {
        let (g, mut rng) = graph_from(seed, n);
        let u = random_fn(&mut rng, n, -3.0, 3.0);
        let v = random_fn(&mut rng, n, -3.0, 3.0);
        let lhs: f64 = (0..n).map(|x| g.measure(x) * g.gradient_form(&u, &v, x).unwrap()).sum();
        let rhs: f64 = -(0..n).map(|x| g.measure(x) * v.value(x) * g.laplacian(&u, x).unwrap()).sum::<f64>();
        prop_assert!(close(lhs, rhs, 1e-10), "{lhs} vs {rhs}");
    }

    #[test]
    fn inner_product_is_symmetric_and_matches_oracle(seed in any::<u64>(), n in 1usize..20) {
        let (g, mut rng) = graph_from(seed, n);
        let h = random_fn(&mut rng, n, 0.5, 3.0);
        let u = random_fn(&mut rng, n, -3.0, 3.0);
        let v = random_fn(&mut rng, n, -3.0, 3.0);
        let uv = h_inner(&g, &u, &v, &h).unwrap();
        prop_assert!(close(uv, h_inner(&g, &v, &u, &h).unwrap(), 1e-12));
        let uu = h_inner(&g, &u, &u, &h).unwrap();
        prop_assert!(close(uu, h_norm_sq(&g, u.values(), h.values()), 1e-12));
    }

    #[test]
    fn norm_triangle_inequality(seed in any::<u64>(), n in 1usize..20) {
        let (g, mut rng) = graph_from(seed, n);
        let h = random_fn(&mut rng, n, 0.5, 3.0);
        let u = random_fn(&mut rng, n, -3.0, 3.0);
        let v = random_fn(&mut rng, n, -3.0, 3.0);
        let sum = h_norm(&g, &u.add(&v), &h).unwrap();
        let bound = h_norm(&g, &u, &h).unwrap() + h_norm(&g, &v, &h).unwrap();
        prop_assert!(sum <= bound * (1.0 + 1e-12));
    }

    #[test]
    fn norm_is_monotone_in_the_potential(seed in any::<u64>(), n in 1usize..20) {
        let (g, mut rng) = graph_from(seed, n);
        let h = random_fn(&mut rng, n, 0.5, 3.0);
        let bump = random_fn(&mut rng, n, 0.0, 1.0);
        let u = random_fn(&mut rng, n, -3.0, 3.0);
        prop_assert!(h_norm(&g, &u, &h).unwrap() <= h_norm(&g, &u, &h.add(&bump)).unwrap());
    }

    #[test]
    fn balls_are_nested(seed in any::<u64>(), n in 1usize..25, k in 1usize..8) {
        let (g, mut rng) = graph_from(seed, n);
        let o = rng.random_range(0..n);
        let dist = bfs(&g, o);
        let small = g.ball(o, k).unwrap();
        let large = g.ball(o, k + 1).unwrap();
        prop_assert_eq!(small.interior().to_vec(), interior(&g, o, k));
        for &x in small.boundary() {
            prop_assert_eq!(dist[x], k);
            prop_assert!(large.interior().contains(&x));
        }
        for &x in small.interior() {
            prop_assert!(large.interior().contains(&x));
        }
    }

    #[test]
    fn schrodinger_levels_are_nonincreasing(seed in any::<u64>(), n in 2usize..20) {
        let (g, mut rng) = graph_from(seed, n);
        let h = random_fn(&mut rng, n, 0.5, 3.0);
        let f = random_fn(&mut rng, n, -2.0, 2.0);
        let ecc = *bfs(&g, 0).iter().max().unwrap();
        let mut last = 0.0;
        for k in 1..=ecc + 1 {
            let s = solve_local_schrodinger(&g, &g.ball(0, k).unwrap(), &h, &f, 1e-12).unwrap();
            // J_k(u_k) = −½ ‖u_k‖²
            prop_assert!(close(s.energy, -0.5 * s.norm_sq, 1e-9));
            prop_assert!(s.energy <= last + 1e-12);
            last = s.energy;
        }
    }

    #[test]
    fn negative_meanfield_solves_match_oracle(seed in any::<u64>(), n in 2usize..15) {
        let (g, mut rng) = graph_from(seed, n);
        let f = random_fn(&mut rng, n, -2.0, -0.2);
        let gg = VertexFunction::from_values(f.values().iter().map(|v| v - rng.random_range(0.0..=2.0)).collect());
        let ball = g.ball(0, 2).unwrap();
        let s = solve_meanfield_negative(&g, &ball, &f, &gg, 1e-11).unwrap();
        prop_assert!(negative_mf_residual(&g, f.values(), gg.values(), s.u.values(), ball.interior()) <= 1e-10);
    }

    /// `s f(s) = q F(s)`.
    #[test]
    fn nonlinearity_euler_identity(s in -50.0f64..50.0, q in 2.01f64..8.0) {
        let (f, big_f) = nonlinearity(s, q).unwrap();
        prop_assert!(close(s * f, q * big_f, 1e-12));
    }

    /// `t ↦ J(tu)` rises then falls, peaking at the critical scaling.
    #[test]
    fn scaling_map_has_one_peak(seed in any::<u64>(), n in 2usize..15, q in 2.2f64..6.0) {
        let (g, mut rng) = graph_from(seed, n);
        let h = random_fn(&mut rng, n, 0.5, 3.0);
        let ball = g.ball(0, 2).unwrap();
        let u = VertexFunction::from_values(
            (0..n).map(|x| if ball.interior().contains(&x) { rng.random_range(0.1..=2.0) } else { 0.0 }).collect(),
        );
        let check = scaling_map_check(&g, &ball, &h, q, &u, 200).unwrap();
        prop_assert_eq!(check.sign_changes, 1);
        let j = |t: f64| yamabe_energy(&g, Some(&ball), &h, q, &u.scaled(t)).unwrap();
        let t = check.critical_t;
        prop_assert!(j(t) >= j(0.9 * t) && j(t) >= j(1.1 * t));
    }

    #[test]
    fn graph_and_function_files_round_trip(seed in any::<u64>(), n in 1usize..20) {
        let (g, mut rng) = graph_from(seed, n);
        let dir = tempfile::tempdir().unwrap();
        let (gp, mp, fp) = (dir.path().join("g"), dir.path().join("m"), dir.path().join("f"));
        std::fs::write(&gp, graph_to_string(&g)).unwrap();
        std::fs::write(&mp, measure_to_string(&g)).unwrap();
        let back = read_graph(&gp, Some(&mp)).unwrap();
        prop_assert_eq!(back.ids(), g.ids());
        prop_assert_eq!(back.edges().len(), g.edges().len());
        for (a, b) in back.edges().iter().zip(g.edges()) {
            prop_assert_eq!((a.0, a.1, a.2.to_bits()), (b.0, b.1, b.2.to_bits()));
        }
        for (a, b) in back.measures().iter().zip(g.measures()) {
            prop_assert_eq!(a.to_bits(), b.to_bits());
        }
        let u = VertexFunction::from_values((0..n).map(|_| rng.random_range(-1e6..=1e6) * rng.random::<f64>()).collect());
        std::fs::write(&fp, function_to_string(&g, &u)).unwrap();
        let v = read_function(&back, &fp).unwrap();
        for (a, b) in u.values().iter().zip(v.values()) {
            prop_assert_eq!(a.to_bits(), b.to_bits());
        }
    }
}
