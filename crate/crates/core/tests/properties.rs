mod common;

use common::*;
use gpq::calculus::{
    embedding_constants, gamma_form, grad_norms, integral, kahan_sum, norm, p_laplacian_all,
    w_lambda_pow, w_omega_pow, NormTag,
};
use gpq::energy::EnergyContext;
use gpq::graph::{boundary, closure, wells, PairState, VertexFunction, VertexSubset};
use gpq::limit::{extend_by_zero, LimitProblem};
use gpq::nehari::{fiber_g, fiber_g_prime, project_state, project_to_nehari, Fiber};
use gpq::nonlinearity::{check_envelopes, check_f2, check_f3, check_f4, SampleOpts};
use proptest::prelude::*;

const REL: f64 = 1e-12;

fn cases(n: u32) -> ProptestConfig {
    ProptestConfig {
        cases: n,
        ..ProptestConfig::default()
    }
}

proptest! {
    #![proptest_config(cases(64))]

    #[test]
    fn gamma_is_symmetric_and_kills_constants(seed in any::<u64>(), n in 2usize..9, c in -5.0f64..5.0) {
        let mut r = rng(seed);
        let g = random_graph(&mut r, n);
        let psi = random_function(&mut r, n, 2.0);
        let phi = random_function(&mut r, n, 2.0);
        let k = VertexFunction::constant(n, c);
        for x in 0..n {
            let a = gamma_form(&g, &psi, &phi, x).unwrap();
            let b = gamma_form(&g, &phi, &psi, x).unwrap();
            prop_assert_eq!(a, b);
            prop_assert_eq!(gamma_form(&g, &k, &psi, x).unwrap(), 0.0);
            prop_assert!(gamma_form(&g, &psi, &psi, x).unwrap() >= 0.0);
        }
    }

    #[test]
    fn weak_form_of_p_laplacian(seed in any::<u64>(), n in 2usize..9, pi in 0usize..3) {
        let p = [1.5, 2.0, 3.0][pi];
        let mut r = rng(seed);
        let g = random_graph(&mut r, n);
        let psi = random_function(&mut r, n, 2.0);
        let phi = random_function(&mut r, n, 2.0);
        let lap = p_laplacian_all(&g, &psi, p).unwrap();
        let gn = grad_norms(&g, psi.values());
        prop_assume!(p >= 2.0 || gn.iter().all(|&v| v > 1e-8));
        let lhs = kahan_sum((0..n).map(|x| g.mu()[x] * lap[x] * phi[x]));
        let rhs = -kahan_sum((0..n).map(|x| {
            g.mu()[x] * gn[x].powf(p - 2.0) * gamma_form(&g, &psi, &phi, x).unwrap()
        }));
        let scale = kahan_sum((0..n).map(|x| g.mu()[x] * (lap[x] * phi[x]).abs())).max(1e-300);
        prop_assert!((lhs - rhs).abs() <= 1e-10 * scale.max(1.0), "lhs {lhs} rhs {rhs}");
    }

    #[test]
    fn p_laplacian_at_two_is_linear(seed in any::<u64>(), n in 2usize..9, c in -3.0f64..3.0) {
        let mut r = rng(seed);
        let g = random_graph(&mut r, n);
        let psi = random_function(&mut r, n, 2.0);
        let phi = random_function(&mut r, n, 2.0);
        let sum = VertexFunction::new((0..n).map(|x| psi[x] + c * phi[x]).collect());
        let a = p_laplacian_all(&g, &psi, 2.0).unwrap();
        let b = p_laplacian_all(&g, &phi, 2.0).unwrap();
        let s = p_laplacian_all(&g, &sum, 2.0).unwrap();
        for x in 0..n {
            prop_assert!((s[x] - a[x] - c * b[x]).abs() <= 1e-12 * (1.0 + a[x].abs() + (c * b[x]).abs()));
        }
    }

    #[test]
    fn lebesgue_norm_is_a_norm(seed in any::<u64>(), n in 1usize..9, theta in 1.0f64..6.0, c in -4.0f64..4.0) {
        let mut r = rng(seed);
        let g = random_graph(&mut r, n.max(2));
        let n = g.len();
        let f = random_function(&mut r, n, 3.0);
        let h = random_function(&mut r, n, 3.0);
        let nf = norm(&g, &f, NormTag::Lebesgue(theta), None).unwrap();
        let nh = norm(&g, &h, NormTag::Lebesgue(theta), None).unwrap();
        let ncf = norm(&g, &f.scaled(c), NormTag::Lebesgue(theta), None).unwrap();
        prop_assert!((ncf - c.abs() * nf).abs() <= 1e-12 * (1.0 + ncf));
        let sum = VertexFunction::new((0..n).map(|x| f[x] + h[x]).collect());
        let ns = norm(&g, &sum, NormTag::Lebesgue(theta), None).unwrap();
        prop_assert!(ns <= (nf + nh) * (1.0 + 1e-12));
    }

    #[test]
    fn embedding_inequalities_hold(seed in any::<u64>(), n in 2usize..9, li in 0usize..3) {
        let lambda = [1.0, 10.0, 100.0][li];
        let mut r = rng(seed);
        let g = random_graph(&mut r, n);
        let pot = random_potentials(&mut r, n);
        let cfg = random_config(&mut r);
        let k = embedding_constants(&g, &pot, cfg.p, cfg.q).unwrap();
        let psi = random_function(&mut r, n, 3.0);
        let w = w_lambda_pow(&g, psi.values(), cfg.p, lambda, pot.a.values()).powf(1.0 / cfg.p);
        let slack = 1.0 + REL;
        prop_assert!(psi.sup_norm() <= k.d1 * w * slack);
        for theta in [1.0, cfg.p / 2.0 + 0.5, cfg.p, 2.0 * cfg.p] {
            let lt = norm(&g, &psi, NormTag::Lebesgue(theta), None).unwrap();
            prop_assert!(lt <= k.k_p(theta) * w * slack, "theta {theta}: {lt} > {}", k.k_p(theta) * w);
        }
        let l1 = norm(&g, &psi, NormTag::Lebesgue(1.0), None).unwrap();
        prop_assert!(l1 <= k.l1_constant_a() * w * slack);
        let wq = w_lambda_pow(&g, psi.values(), cfg.q, lambda, pot.b.values()).powf(1.0 / cfg.q);
        for theta in [1.0, cfg.q / 2.0 + 0.5, cfg.q, 2.0 * cfg.q] {
            let lt = norm(&g, &psi, NormTag::Lebesgue(theta), None).unwrap();
            prop_assert!(lt <= k.k_q(theta) * wq * slack);
        }
    }

    #[test]
    fn well_embedding_holds(seed in any::<u64>(), n in 2usize..9) {
        let mut r = rng(seed);
        let g = random_graph(&mut r, n);
        let pot = random_potentials(&mut r, n);
        let cfg = random_config(&mut r);
        let w = wells(&g, &pot).unwrap();
        let k = embedding_constants(&g, &pot, cfg.p, cfg.q).unwrap();
        let raw = random_function(&mut r, n, 3.0);
        let psi: Vec<f64> = (0..n).map(|x| if w.omega_a.contains(x) { raw[x] } else { 0.0 }).collect();
        let wn = w_omega_pow(&g, &psi, cfg.p, &w.omega_a).powf(1.0 / cfg.p);
        for theta in [1.0, cfg.p, 2.0 * cfg.p, cfg.r1] {
            let lt = gpq::calculus::lebesgue_norm_on(&g, &psi, theta, &w.omega_a);
            prop_assert!(lt <= k.k_star_p(theta) * wn * (1.0 + REL));
        }
    }

    #[test]
    fn boundary_is_outside_and_closure_contains(seed in any::<u64>(), n in 2usize..9, bits in any::<u16>()) {
        let mut r = rng(seed);
        let g = random_graph(&mut r, n);
        let omega = VertexSubset::from_mask((0..n).map(|x| bits >> x & 1 == 1).collect());
        let b = boundary(&g, &omega);
        prop_assert!(b.is_disjoint(&omega));
        let c = closure(&g, &omega);
        for x in omega.iter().chain(b.iter()) {
            prop_assert!(c.contains(x));
        }
    }

    #[test]
    fn wells_are_idempotent(seed in any::<u64>(), n in 2usize..9) {
        let mut r = rng(seed);
        let g = random_graph(&mut r, n);
        let pot = random_potentials(&mut r, n);
        let w1 = wells(&g, &pot).unwrap();
        let w2 = wells(&g, &pot).unwrap();
        prop_assert_eq!(w1.omega_a.mask(), w2.omega_a.mask());
        prop_assert!(w1.both.iter().all(|x| w1.omega_a.contains(x) && w1.omega_b.contains(x)));
    }
}

proptest! {
    #![proptest_config(cases(48))]

    #[test]
    fn gateaux_derivative_matches_finite_differences(seed in any::<u64>(), n in 2usize..7) {
        let mut r = rng(seed);
        let inst = random_instance(&mut r, n);
        let ctx = full_ctx(&inst, 3.0);
        let z = random_pair(&mut r, n, 1.0);
        let d = random_pair(&mut r, n, 1.0);
        // central differences lose accuracy next to the kinks of |t|^p
        let g = &inst.graph;
        let away = |f: &[f64]| {
            f.iter().all(|v| v.abs() > 1e-2) && grad_norms(g, f).iter().all(|v| *v > 1e-2)
        };
        prop_assume!(away(z.u.values()) && away(z.v.values()));
        let h = 1e-5;
        let jp = ctx.j_eval(&z.axpy(h, &d)).unwrap();
        let jm = ctx.j_eval(&z.axpy(-h, &d)).unwrap();
        let fd = (jp - jm) / (2.0 * h);
        let an = ctx.j_gateaux(&z, &d).unwrap();
        prop_assert!((fd - an).abs() <= 1e-6 * (1.0 + an.abs()), "fd {fd} analytic {an}");
    }

    #[test]
    fn nehari_functional_is_fiber_slope_at_one(seed in any::<u64>(), n in 2usize..7) {
        let mut r = rng(seed);
        let inst = random_instance(&mut r, n);
        let ctx = full_ctx(&inst, 2.0);
        let z = random_pair(&mut r, n, 1.0);
        let k = ctx.nehari_k(&z).unwrap();
        let gp = fiber_g_prime(&ctx, &z, 1.0).unwrap();
        prop_assert!((k - gp).abs() <= 1e-12 * (1.0 + k.abs()));
        prop_assert!((ctx.j_gateaux(&z, &z).unwrap() - k).abs() <= 1e-10 * (1.0 + k.abs()));
    }

    #[test]
    fn projection_lands_on_nehari_and_maximizes_fiber(seed in any::<u64>(), n in 2usize..7, c in 0.01f64..100.0) {
        let mut r = rng(seed);
        let inst = random_instance(&mut r, n);
        let ctx = full_ctx(&inst, 5.0);
        let dir = random_pair(&mut r, n, 1.0);
        let fr = project_to_nehari(&ctx, &dir).unwrap();
        let fiber = Fiber::new(&ctx, &dir).unwrap();
        prop_assert!(fiber.g_prime(fr.t0).abs() <= 1e-10 * fiber.g_prime_scale(fr.t0));
        let frc = project_to_nehari(&ctx, &dir.scaled(c)).unwrap();
        prop_assert!((frc.t0 * c - fr.t0).abs() <= 1e-10 * fr.t0);
        let mut changes = 0;
        let mut prev = None;
        for i in 0..60 {
            let t = fr.t0 * 10f64.powf(-3.0 + 6.0 * i as f64 / 59.0);
            let s = fiber.g_prime(t);
            if s.abs() <= 1e-9 * fiber.g_prime_scale(t) {
                continue;
            }
            let sign = s > 0.0;
            if prev.is_some_and(|p| p != sign) {
                changes += 1;
            }
            prev = Some(sign);
        }
        prop_assert!(changes <= 1);
        let (z, _) = project_state(&ctx, &dir).unwrap();
        let j = ctx.j_eval(&z).unwrap();
        prop_assert!(j > 0.0);
        for i in 0..30 {
            let t = 10f64.powf(-2.0 + 4.0 * i as f64 / 29.0);
            prop_assert!(fiber_g(&ctx, &z, t).unwrap() <= j * (1.0 + 1e-12));
        }
    }

    #[test]
    fn residual_vanishes_where_gradient_does(seed in any::<u64>(), n in 2usize..7) {
        let mut r = rng(seed);
        let inst = random_instance(&mut r, n);
        let ctx = full_ctx(&inst, 2.0);
        let z = random_pair(&mut r, n, 1.0);
        let res = ctx.residual(&z).unwrap();
        let mu = inst.graph.mu();
        for x in 0..n {
            let mut e = PairState::zeros(n);
            e.u[x] = 1.0;
            let d = ctx.j_gateaux(&z, &e).unwrap();
            prop_assert!((d - mu[x] * res.u[x]).abs() <= 1e-10 * (1.0 + d.abs()));
        }
    }

    #[test]
    fn zero_extension_of_limit_nehari_states_is_nehari(seed in any::<u64>(), n in 2usize..8, li in 0usize..2) {
        let lambda = [1.0, 1e3][li];
        let mut r = rng(seed);
        let inst = random_instance(&mut r, n);
        let lp = LimitProblem::new(inst.graph.clone(), inst.pot.clone(), inst.cfg, inst.nl.clone()).unwrap();
        let lctx: &EnergyContext = lp.context();
        let dir = lctx.restrict(&random_pair(&mut r, n, 1.0));
        prop_assume!(!dir.is_zero());
        let (z, _) = project_state(lctx, &dir).unwrap();
        let full = full_ctx(&inst, lambda);
        let ext = extend_by_zero(&z, n);
        let (nu, nv) = full.norm_pows(&ext);
        prop_assert!(full.nehari_k(&ext).unwrap().abs() <= 1e-12 * (1.0 + nu + nv));
        let jl = lctx.j_eval(&z).unwrap();
        prop_assert!((full.j_eval(&ext).unwrap() - jl).abs() <= 1e-12 * (1.0 + jl.abs()));
    }

    #[test]
    fn model_coupling_satisfies_growth_assumptions(seed in any::<u64>(), n in 1usize..6) {
        let mut r = rng(seed);
        let inst = random_instance(&mut r, n.max(2));
        let opts = SampleOpts { random: 300, lattice: 15, ..SampleOpts::default() };
        let nl = inst.nl.as_ref();
        let n = inst.graph.len();
        prop_assert!(check_f2(nl, &inst.cfg, n, &opts).passed);
        prop_assert!(check_f3(nl, &inst.cfg, nl.envelope(), n, &opts).passed);
        prop_assert!(check_f4(nl, &inst.cfg, n, &opts).passed);
        prop_assert!(check_envelopes(nl, &inst.cfg, nl.envelope(), n, &opts).passed);
    }

    #[test]
    fn integral_is_linear(seed in any::<u64>(), n in 2usize..9, c in -3.0f64..3.0) {
        let mut r = rng(seed);
        let g = random_graph(&mut r, n);
        let f = random_function(&mut r, n, 2.0);
        let h = random_function(&mut r, n, 2.0);
        let s = VertexFunction::new((0..n).map(|x| f[x] + c * h[x]).collect());
        let lhs = integral(&g, &s).unwrap();
        let rhs = integral(&g, &f).unwrap() + c * integral(&g, &h).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + lhs.abs()));
    }
}
