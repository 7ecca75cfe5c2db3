use nsco::geometry::SetDescriptor;
use nsco::linalg::{dist, dist_sq, norm};
use nsco::oracles::*;
use nsco::problems::*;
use nsco::rng::StreamRng;
use nsco::solvers::*;
use nsco::Error;

fn ctx<'a>(
    f: &'a dyn FirstOrderOracle,
    set: &'a SetDescriptor,
    counters: &'a OracleCounters,
) -> RunContext<'a> {
    RunContext {
        objective: f,
        subgradients: Subgradients::Exact(f),
        set,
        counters,
        options: TraceOptions::default(),
    }
}

/// `|x - 0.6|` on `X = [-1, 1]` inside `X' = B(0, 2)`.
fn interval() -> (L1Distance, SetDescriptor, Derivation) {
    let f = L1Distance::new(vec![0.6]).unwrap();
    let set = SetDescriptor::l2(1, 1.0).unwrap();
    let d = Derivation::new(0.05, 1.0, set.diameter(), 2.0);
    (f, set, d)
}

#[test]
fn prox_slide_examples() {
    let f = L1Distance::new(vec![0.0]).unwrap();
    let counters = OracleCounters::new();
    let mut rng = StreamRng::from_seed(0);
    let one = prox_slide(&[0.0], &[2.0], 1.0, 1, Subgradients::Exact(&f), Some(5.0), &mut rng, &counters).unwrap();
    assert_eq!(one.last, one.average);
    let out = prox_slide(&[0.0], &[2.0], 1.0, 1000, Subgradients::Exact(&f), Some(5.0), &mut rng, &counters).unwrap();
    assert!((out.last[0] - 1.0).abs() < 1e-2);
    assert!((out.average[0] - 1.0).abs() < 1e-2);
    assert_eq!(counters.fo_calls(), 1001);
    for t in 1..=50usize {
        let tf = t as f64;
        let s: f64 = (1..=t).map(|i| 2.0 * (i as f64 + 1.0) / (tf * (tf + 3.0))).sum();
        assert!((s - 1.0).abs() < 1e-14);
    }
    assert!(matches!(
        prox_slide(&[0.0], &[2.0], 1.0, 0, Subgradients::Exact(&f), None, &mut rng, &counters),
        Err(Error::InvalidArgument(_))
    ));
}

#[test]
fn prox_slide_average_matches_weights() {
    let f = synth_piecewise_linear(3, 5, 2, &[0.1, 0.0, -0.1]).unwrap();
    let counters = OracleCounters::new();
    let mut rng = StreamRng::from_seed(1);
    let g = [0.3, -0.2, 0.5];
    let u0 = [0.5, 0.5, 0.0];
    let beta = 2.5;
    let steps = 37;
    let out = prox_slide(&g, &u0, beta, steps, Subgradients::Exact(&f), Some(1.0), &mut rng, &counters).unwrap();
    // Replay the iteration to collect u_1..u_T.
    let center: Vec<f64> = u0.iter().zip(&g).map(|(u, gi)| u - gi / beta).collect();
    let mut u = u0.to_vec();
    let mut avg = vec![0.0; 3];
    let mut grad = vec![0.0; 3];
    let tf = steps as f64;
    for t in 1..=steps {
        f.evaluate(&u, &mut grad).unwrap();
        let step = 1.0 / ((1.0 + t as f64 / 2.0) * beta);
        for i in 0..3 {
            u[i] -= step * (grad[i] + beta * (u[i] - center[i]));
        }
        let n = norm(&u);
        if n > 1.0 {
            u.iter_mut().for_each(|v| *v /= n);
        }
        let w = 2.0 * (t as f64 + 1.0) / (tf * (tf + 3.0));
        for i in 0..3 {
            avg[i] += w * u[i];
        }
    }
    assert_eq!(out.last, u);
    assert!(dist(&out.average, &avg) < 1e-12);
}

#[test]
fn prox_slide_meets_its_guarantee() {
    let mut rng = StreamRng::from_seed(3);
    let radius = 2.0;
    for trial in 0..20 {
        let d = 2 + trial % 4;
        let anchor: Vec<f64> = (0..d).map(|_| 0.3 * rng.normal()).collect();
        let f = synth_piecewise_linear(d, 4 + trial % 5, trial as u64, &anchor).unwrap();
        let ball = SetDescriptor::l2(d, radius).unwrap();
        let u0 = ball.random_point(&mut rng);
        let g: Vec<f64> = (0..d).map(|_| rng.normal()).collect();
        let beta = 0.5 + 4.0 * rng.uniform();
        let steps = 1 + rng.index(200);
        let counters = OracleCounters::new();
        let out = prox_slide(&g, &u0, beta, steps, Subgradients::Exact(&f), Some(radius), &mut rng, &counters).unwrap();
        let phi = |u: &[f64]| prox_slide_objective(f.value(u).unwrap(), &g, u, &u0, beta);
        let t = steps as f64;
        let lip = f.lipschitz();
        for _ in 0..100 {
            let xp = ball.random_point(&mut rng);
            let rhs = 2.0 / (t * (t + 3.0)) * beta / 2.0 * dist_sq(&u0, &xp)
                - (t + 1.0) * (t + 2.0) / (t * (t + 3.0)) * beta / 2.0 * dist_sq(&out.last, &xp)
                + 16.0 * lip * lip / (beta * t);
            assert!(phi(&out.average) - phi(&xp) <= rhs + 1e-9);
        }
    }
}

#[test]
fn fw_projection_examples() {
    let set = SetDescriptor::l1(2, 1.0).unwrap();
    let mut rng = StreamRng::from_seed(4);
    let inside = [0.2, -0.3];
    let stop = FwStop::WolfeGap { tol: 0.0, max_iter: 10 };
    let out = fw_quadratic_projection(&inside, &inside, 1.0, stop, &set, &mut rng).unwrap();
    assert_eq!(out.point, inside);
    assert_eq!((out.iterations, out.lmo_calls, out.gap), (0, 1, Some(0.0)));

    let z = [3.0, 0.0];
    let exact = set.project_vec(&z).unwrap();
    assert_eq!(exact, vec![1.0, 0.0]);
    let budget = 200;
    let out = fw_quadratic_projection(&z, &[0.0, 1.0], 1.0, FwStop::Budget(budget), &set, &mut rng).unwrap();
    let h = |u: &[f64]| 0.5 * dist_sq(u, &z);
    let bound = 7.0 * set.diameter().powi(2) / budget as f64;
    assert!(h(&out.point) - h(&exact) <= bound);
    assert_eq!(out.lmo_calls, budget);
    assert!(matches!(
        fw_quadratic_projection(&z, &[0.0, 1.0], 1.0, FwStop::Budget(0), &set, &mut rng),
        Err(Error::InvalidArgument(_))
    ));
    let hopeless = FwStop::WolfeGap { tol: 0.0, max_iter: 3 };
    assert!(matches!(
        fw_quadratic_projection(&[0.3, 0.3], &[1.0, 0.0], 1.0, hopeless, &set, &mut rng),
        Err(Error::NumericalFailure(_))
    ));
}

#[test]
fn fw_gap_after_budget() {
    let mut rng = StreamRng::from_seed(5);
    for trial in 0..100 {
        let d = 2 + trial % 8;
        let set = match trial % 3 {
            0 => SetDescriptor::l1(d, 0.5 + rng.uniform()).unwrap(),
            1 => SetDescriptor::l2(d, 0.5 + rng.uniform()).unwrap(),
            _ => SetDescriptor::nuclear(2, d, 0.5 + rng.uniform()).unwrap(),
        };
        let n = set.dim();
        let z: Vec<f64> = (0..n).map(|_| 2.0 * rng.normal()).collect();
        let u0 = set.extreme_point(&mut rng);
        let beta = 0.1 + 3.0 * rng.uniform();
        let budget = 10 + rng.index(300);
        let out = fw_quadratic_projection(&z, &u0, beta, FwStop::Budget(budget), &set, &mut rng).unwrap();
        let gap = wolfe_gap(&out.point, &z, beta, &set, &mut rng).unwrap();
        let bound = 7.0 * beta * set.diameter().powi(2) / budget as f64;
        assert!(gap <= bound, "trial {trial}: {gap} > {bound}");
        assert!(set.residual(&out.point).unwrap() <= 1e-8);
    }
}

#[test]
fn fw_iterates_stay_sparse() {
    let mut rng = StreamRng::from_seed(6);
    let set = SetDescriptor::l1(200, 1.0).unwrap();
    let u0 = set.extreme_point(&mut rng);
    let z: Vec<f64> = (0..200).map(|_| rng.normal()).collect();
    for steps in [1usize, 5, 20, 60] {
        let out = fw_quadratic_projection(&z, &u0, 1.0, FwStop::Budget(steps), &set, &mut rng).unwrap();
        assert!(support_size(&out.point, 0.0) <= steps + 1);
    }
}

#[test]
fn mopes_solves_the_interval_problem() {
    let (f, set, der) = interval();
    let cfg = MoreauConfig::mopes(&der).unwrap();
    assert_eq!(cfg.outer_steps, 340);
    let counters = OracleCounters::new();
    let mut rng = StreamRng::from_seed(7);
    let mut trace = RunTrace::new("mopes");
    let out = mopes(&ctx(&f, &set, &counters), &[-1.0], &cfg, &mut rng, &mut trace).unwrap();
    assert!(f.value(&out.x).unwrap() <= 0.05);
    assert_eq!(counters.po_calls(), cfg.outer_steps as u64);
    assert_eq!(counters.fo_calls(), cfg.total_inner_steps());
    assert_eq!(counters.lmo_calls(), 0);
    assert_eq!(trace.records.len(), cfg.outer_steps + 1);
    for (k, r) in trace.records.iter().enumerate() {
        assert_eq!(r.k, k);
        assert_eq!(r.calls.po, k as u64);
    }
    assert!(trace.records.windows(2).all(|w| w[0].calls.fo <= w[1].calls.fo));
    assert!(set.residual(&out.x).unwrap() <= 1e-8);
    assert!(norm(&out.x_prime) <= 2.0 + 1e-12);

    let p = cfg.schedule_params();
    let k = cfg.outer_steps as f64;
    let rhs = (10.0 * 1.6f64.powi(2) + 8.0 * cfg.d_tilde) / (cfg.lambda * k * (k + 1.0)) + cfg.lambda / 2.0;
    assert!(f.value(&out.x).unwrap() <= rhs);
    assert!((1..cfg.outer_steps).all(|k| inner_steps(&p, k) <= inner_steps(&p, k + 1)));
}

#[test]
fn moles_solves_the_interval_problem() {
    let (f, set, der) = interval();
    let cfg = MoreauConfig::moles(&der).unwrap();
    let counters = OracleCounters::new();
    let mut rng = StreamRng::from_seed(8);
    let mut trace = RunTrace::new("moles");
    let out = moles(&ctx(&f, &set, &counters), &[-1.0], &cfg, &mut rng, &mut trace).unwrap();
    let k = cfg.outer_steps as f64;
    assert!(f.value(&out.x).unwrap() <= 0.05);
    assert_eq!(counters.lmo_calls(), (cfg.outer_steps * cfg.fw_budget()) as u64);
    assert_eq!(counters.fo_calls(), cfg.total_inner_steps());
    assert_eq!(counters.po_calls(), 0);
    assert!(set.residual(&out.x).unwrap() <= 1e-8);

    // Sum of 2k eta_k with eta_k = 4 c' D~ / (lambda K k).
    let eta_sum = 8.0 * cfg.c_prime * cfg.d_tilde / cfg.lambda;
    let rhs = (10.0 * 1.6f64.powi(2) + 8.0 * cfg.d_tilde) / (cfg.lambda * k * (k + 1.0))
        + eta_sum / (k * (k + 1.0))
        + cfg.lambda / 2.0;
    assert!(f.value(&out.x).unwrap() <= rhs);
}

#[test]
fn moles_gap_mode_stops_early() {
    let (f, set, der) = interval();
    let mut cfg = MoreauConfig::moles(&der).unwrap();
    cfg.projection_mode = ProjectionMode::WolfeGap { max_iter: 1_000_000 };
    let counters = OracleCounters::new();
    let mut rng = StreamRng::from_seed(9);
    let mut trace = RunTrace::new("moles");
    let out = moles(&ctx(&f, &set, &counters), &[-1.0], &cfg, &mut rng, &mut trace).unwrap();
    assert!(f.value(&out.x).unwrap() <= 0.05);
    assert!(counters.lmo_calls() < (cfg.outer_steps * cfg.fw_budget()) as u64);
}

#[test]
fn general_method_specializes() {
    let mut rng = StreamRng::from_seed(10);
    let set = SetDescriptor::l1(6, 1.0).unwrap();
    let mut anchor = set.boundary_point(&mut rng);
    anchor.iter_mut().for_each(|v| *v *= 0.5);
    let f = synth_piecewise_linear(6, 20, 1, &anchor).unwrap();
    let x0 = set.extreme_point(&mut rng);
    let der = Derivation::new(0.2, f.lipschitz(), set.diameter(), set.enclosing_radius() + 1.0);

    let cfg = MoreauConfig::mopes(&der).unwrap();
    let (c1, c2) = (OracleCounters::new(), OracleCounters::new());
    let (mut t1, mut t2) = (RunTrace::new("a"), RunTrace::new("a"));
    let a = mopes(&ctx(&f, &set, &c1), &x0, &cfg, &mut StreamRng::from_seed(1), &mut t1).unwrap();
    let b = moreau_subgradient_general(&ctx(&f, &set, &c2), &ExactProjection(&set), &x0, &cfg, &mut StreamRng::from_seed(1), &mut t2).unwrap();
    assert_eq!(a, b);
    assert_eq!(t1, t2);

    let cfg = MoreauConfig::moles(&der).unwrap();
    let (c1, c2) = (OracleCounters::new(), OracleCounters::new());
    let (mut t1, mut t2) = (RunTrace::new("a"), RunTrace::new("a"));
    let a = moles(&ctx(&f, &set, &c1), &x0, &cfg, &mut StreamRng::from_seed(2), &mut t1).unwrap();
    let fw = FrankWolfeProjection { lmo: &set, budget: cfg.fw_budget(), mode: ProjectionMode::FixedBudget };
    let b = moreau_subgradient_general(&ctx(&f, &set, &c2), &fw, &x0, &cfg, &mut StreamRng::from_seed(2), &mut t2).unwrap();
    assert_eq!(a, b);
    assert_eq!(t1, t2);
}

#[test]
fn identical_seeds_give_identical_traces() {
    let mut rng = StreamRng::from_seed(11);
    let rows: Vec<f64> = (0..60 * 5).map(|_| rng.normal() / 5f64.sqrt()).collect();
    let h = HingeSvm::new(rows, 60, 5).unwrap();
    let sfo = minibatch_sfo(&h, 4).unwrap();
    let set = SetDescriptor::l1(5, 1.0).unwrap();
    let mut der = Derivation::new(0.1, h.lipschitz(), set.diameter(), 2.0);
    der.variance = sfo.variance_bound();
    let cfg = MoreauConfig::mopes(&der).unwrap();
    let run = || {
        let counters = OracleCounters::new();
        let c = RunContext {
            objective: &h,
            subgradients: Subgradients::Stochastic(&sfo),
            set: &set,
            counters: &counters,
            options: TraceOptions { reference: Some(0.0), ..Default::default() },
        };
        let mut trace = RunTrace::new("mopes");
        let out = mopes(&c, &[0.0; 5], &cfg, &mut StreamRng::new(3, 1), &mut trace).unwrap();
        (out, trace)
    };
    let (o1, t1) = run();
    let (o2, t2) = run();
    assert_eq!(o1, o2);
    assert_eq!(t1, t2);
    assert!(t1.records.iter().all(|r| r.calls.fo == 0 && r.wall_ms == 0.0));
    assert_eq!(t1.last().unwrap().calls.sfo, cfg.total_inner_steps());
}

#[test]
fn pgd_examples() {
    let f = L1Distance::new(vec![0.0]).unwrap();
    let set = SetDescriptor::l2(1, 1.0).unwrap();
    let steps = 10_000;
    let cfg = PgdConfig { steps, rule: StepRule::Fixed, lipschitz: 1.0, variance: 0.0, diameter: 2.0 };
    let counters = OracleCounters::new();
    let mut trace = RunTrace::new("pgd");
    let out = pgd(&ctx(&f, &set, &counters), &[1.0], &cfg, &mut StreamRng::from_seed(0), &mut trace).unwrap();
    assert!(f.value(&out.average).unwrap() <= 2.0 * 2.0 / (steps as f64).sqrt());
    assert!(out.best_value <= f.value(&out.average).unwrap());
    assert_eq!((counters.po_calls(), counters.fo_calls()), (steps as u64, steps as u64));
    assert_eq!(trace.records.len(), steps + 1);

    let counters = OracleCounters::new();
    let out = pgd(&ctx(&f, &set, &counters), &[0.0], &cfg, &mut StreamRng::from_seed(0), &mut trace).unwrap();
    assert_eq!((out.average, out.last), (vec![0.0], vec![0.0]));
    assert!(trace.records.iter().all(|r| r.f_value == 0.0));

    assert_eq!(pgd_steps(0.1, 1.0, 0.0, 2.0), 400);
    assert_eq!(fw_pgd_steps(0.1, 1.0, 0.0, 2.0), 1600);
    let cfg = PgdConfig { rule: StepRule::Diminishing, ..cfg };
    assert_eq!(cfg.stepsize(4).unwrap(), 1.0);
}

#[test]
fn fw_pgd_examples() {
    let cfg = FwPgdConfig { steps: 4, lipschitz: 1.0, variance: 0.0, diameter: 2.0, projection_mode: ProjectionMode::FixedBudget };
    assert_eq!(cfg.stepsize().unwrap(), 0.5);
    assert_eq!(cfg.tolerance().unwrap(), 0.5);

    let (f, set, _) = interval();
    for steps in [4usize, 100] {
        let cfg = FwPgdConfig { steps, ..cfg };
        let counters = OracleCounters::new();
        let mut trace = RunTrace::new("fw_pgd");
        let out = fw_pgd(&ctx(&f, &set, &counters), &[-1.0], &cfg, &mut StreamRng::from_seed(1), &mut trace).unwrap();
        let k = steps as u64;
        assert_eq!(counters.lmo_calls(), 28 * k * k + k);
        assert_eq!(counters.fo_calls(), k);
        assert!(f.value(&out.average).unwrap() <= 2.0 * 2.0 / (steps as f64).sqrt());
        assert!(set.residual(&out.average).unwrap() <= 1e-8);
    }
}

#[test]
fn every_solver_stays_feasible() {
    let mut rng = StreamRng::from_seed(12);
    let samples: Vec<f64> = (0..20 * 9).map(|_| rng.normal()).collect();
    let labels: Vec<f64> = (0..20).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
    let mh = MatrixSvm::new(&samples, &labels, 3, 3).unwrap();
    let pl = synth_piecewise_linear(9, 30, 4, &[0.05; 9]).unwrap();
    let cases: Vec<(&dyn FirstOrderOracle, SetDescriptor)> = vec![
        (&mh, SetDescriptor::nuclear(3, 3, 1.0).unwrap()),
        (&pl, SetDescriptor::l1(9, 1.0).unwrap()),
        (&pl, SetDescriptor::l2(9, 0.7).unwrap()),
    ];
    for (f, set) in &cases {
        let counters = OracleCounters::new();
        let c = ctx(*f, set, &counters);
        let x0 = set.extreme_point(&mut rng);
        let der = Derivation::new(0.5, f.lipschitz(), set.diameter(), set.enclosing_radius() * 2.0);
        let mut trace = RunTrace::new("");
        let outs = [
            mopes(&c, &x0, &MoreauConfig::mopes(&der).unwrap(), &mut rng, &mut trace).unwrap().x,
            moles(&c, &x0, &MoreauConfig::moles(&der).unwrap(), &mut rng, &mut trace).unwrap().x,
            pgd(&c, &x0, &PgdConfig { steps: 50, rule: StepRule::Fixed, lipschitz: f.lipschitz(), variance: 0.0, diameter: set.diameter() }, &mut rng, &mut trace).unwrap().last,
            fw_pgd(&c, &x0, &FwPgdConfig { steps: 10, lipschitz: f.lipschitz(), variance: 0.0, diameter: set.diameter(), projection_mode: ProjectionMode::FixedBudget }, &mut rng, &mut trace).unwrap().average,
        ];
        for x in &outs {
            assert!(set.residual(x).unwrap() <= 1e-8);
        }
    }
}

#[test]
fn infeasible_start_is_rejected() {
    let (f, set, der) = interval();
    let counters = OracleCounters::new();
    let c = ctx(&f, &set, &counters);
    let mut rng = StreamRng::from_seed(0);
    let mut trace = RunTrace::new("");
    let cfg = MoreauConfig::mopes(&der).unwrap();
    assert!(matches!(mopes(&c, &[1.5], &cfg, &mut rng, &mut trace), Err(Error::InvalidArgument(_))));
    assert!(matches!(moles(&c, &[1.5], &cfg, &mut rng, &mut trace), Err(Error::InvalidArgument(_))));
    let p = PgdConfig { steps: 5, rule: StepRule::Fixed, lipschitz: 1.0, variance: 0.0, diameter: 2.0 };
    assert!(matches!(pgd(&c, &[1.5], &p, &mut rng, &mut trace), Err(Error::InvalidArgument(_))));
    let mut bad = cfg;
    bad.outer_steps = 0;
    assert!(mopes(&c, &[0.0], &bad, &mut rng, &mut trace).is_err());
    assert_eq!(counters.snapshot(), CallCounts::default());
}

#[test]
fn early_stop_truncates_the_trace() {
    let (f, set, der) = interval();
    let counters = OracleCounters::new();
    let mut c = ctx(&f, &set, &counters);
    c.options = TraceOptions { reference: Some(0.0), stop_gap: Some(0.1), wall_clock: false };
    let cfg = MoreauConfig::mopes(&der).unwrap();
    let mut trace = RunTrace::new("mopes");
    let out = mopes(&c, &[-1.0], &cfg, &mut StreamRng::from_seed(0), &mut trace).unwrap();
    assert!(out.steps < cfg.outer_steps);
    assert_eq!(trace.records.len(), out.steps + 1);
    assert!(trace.last().unwrap().gap.unwrap() <= 0.1);
    assert_eq!(trace.first_reaching(0.1).unwrap().k, out.steps);
}
