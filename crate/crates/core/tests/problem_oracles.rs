use std::f64::consts::PI;

use pikan_core::diffengine::seed_input;
use pikan_core::problems::{Location, ProblemId};
use pikan_core::rng::SeededRng;
use pikan_core::{Jet2, Problem, Scalar};

/// Closed forms rebuilt from jet primitives, independent of the hand-written
/// derivatives inside the crate.
fn oracle(id: ProblemId, p: &[f64], d: usize) -> Jet2 {
    let x: Jet2 = seed_input(p[0], d == 0);
    let y: Jet2 = seed_input(*p.get(1).unwrap_or(&0.0), d == 1);
    let c = Jet2::constant;
    match id {
        ProblemId::Logistic => c(1.0).checked_div(c(1.0) + (-x).exp().scale(9.0)).unwrap(),
        ProblemId::Harmonic => x.scale(PI).sin().scale(1.0 / PI),
        ProblemId::Laplace => y.scale(PI).sinh().scale(1.0 / PI.sinh()) * x.scale(PI).sin(),
        ProblemId::Poisson => x.scale(PI).sin() * y.scale(PI).sin(),
        ProblemId::Heat => y.scale(-PI * PI).exp() * x.scale(PI).sin(),
        ProblemId::Wave => y.scale(PI).cos() * x.scale(PI).sin(),
        _ => unreachable!(),
    }
}

fn random_point(rng: &mut SeededRng, problem: &Problem) -> Vec<f64> {
    problem
        .domain()
        .iter()
        .map(|&(lo, hi)| rng.uniform_in(lo, hi))
        .collect()
}

fn closed_form() -> impl Iterator<Item = Problem> {
    Problem::all().filter(|p| p.has_closed_form())
}

#[test]
fn closed_form_set() {
    let ids: Vec<_> = closed_form().map(|p| p.id).collect();
    use ProblemId::*;
    assert_eq!(ids, vec![Logistic, Harmonic, Laplace, Poisson, Heat, Wave]);
    for id in [Oscillatory, Airy, Burgers] {
        assert!(matches!(Problem::new(id).exact_solution(&[0.5, 0.5]), Err(pikan_core::Error::Capability(_))));
    }
}

#[test]
fn exact_jets_match_independent_oracle() {
    let mut rng = SeededRng::new(3);
    for problem in closed_form() {
        for _ in 0..50 {
            let p = random_point(&mut rng, &problem);
            for d in 0..problem.dim() {
                let a = problem.exact_jet(&p, Some(d)).unwrap();
                let b = oracle(problem.id, &p, d);
                for (u, v) in [(a.v, b.v), (a.d1, b.d1), (a.d2, b.d2)] {
                    assert!((u - v).abs() < 1e-12 * (1.0 + v.abs()), "{}: {u} vs {v}", problem.id);
                }
            }
        }
    }
}

#[test]
fn exact_solutions_satisfy_residuals() {
    let mut rng = SeededRng::new(4);
    for problem in closed_form() {
        for _ in 0..100 {
            let p = random_point(&mut rng, &problem);
            let jets: Vec<Jet2> = (0..problem.dim()).map(|d| oracle(problem.id, &p, d)).collect();
            let r = problem.residual(&p, &jets).unwrap();
            assert!(r.value().abs() < 1e-10, "{} at {p:?}: {r}", problem.id);
        }
    }
}

#[test]
fn exact_gradient_matches_finite_differences() {
    let mut rng = SeededRng::new(5);
    let h = 1e-6;
    for problem in closed_form() {
        for _ in 0..50 {
            let p = random_point(&mut rng, &problem);
            let g = problem.exact_gradient(&p).unwrap();
            for d in 0..problem.dim() {
                let (mut a, mut b) = (p.clone(), p.clone());
                a[d] += h;
                b[d] -= h;
                let fd = (problem.exact_solution(&a).unwrap() - problem.exact_solution(&b).unwrap()) / (2.0 * h);
                assert!((g[d] - fd).abs() < 1e-7 * g[d].abs().max(1.0), "{} {d}: {} vs {fd}", problem.id, g[d]);
            }
        }
    }
}

#[test]
fn residual_examples() {
    let logistic = Problem::new(ProblemId::Logistic);
    let r: f64 = logistic.residual(&[1.0], &[Jet2::new(0.5, 0.3, 0.0)]).unwrap();
    assert!((r - 0.05).abs() < 1e-15);
    let poisson = Problem::new(ProblemId::Poisson);
    let r: f64 = poisson.residual(&[0.5, 0.5], &[Jet2::zero(), Jet2::zero()]).unwrap();
    assert!((r - 2.0 * PI * PI).abs() < 1e-12);
    assert!((r - 19.7392).abs() < 1e-4);
    let heat = Problem::new(ProblemId::Heat);
    let p = [0.3, 0.2];
    let jets = [heat.exact_jet(&p, Some(0)).unwrap(), heat.exact_jet(&p, Some(1)).unwrap()];
    assert!(heat.residual(&p, &jets).unwrap().abs() < 1e-12);
    assert!(heat.residual(&p, &jets[..1]).is_err());
}

#[test]
fn exact_value_examples() {
    let logistic = Problem::new(ProblemId::Logistic);
    assert!((logistic.exact_solution(&[0.0]).unwrap() - 0.1).abs() < 1e-15);
    assert!((logistic.exact_solution(&[5.0]).unwrap() - 1.0 / (1.0 + 9.0 * (-5f64).exp())).abs() < 1e-15);
    assert!((logistic.exact_solution(&[5.0]).unwrap() - 0.9428256).abs() < 1e-7);
    let laplace = Problem::new(ProblemId::Laplace);
    assert!((laplace.exact_solution(&[0.5, 1.0]).unwrap() - 1.0).abs() < 1e-15);
    let harmonic = Problem::new(ProblemId::Harmonic);
    assert!((harmonic.exact_gradient(&[0.0]).unwrap()[0] - 1.0).abs() < 1e-15);
    let poisson = Problem::new(ProblemId::Poisson);
    for g in poisson.exact_gradient(&[0.5, 0.5]).unwrap() {
        assert!(g.abs() < 1e-15);
    }
    let heat = Problem::new(ProblemId::Heat);
    let gx = heat.exact_gradient(&[0.25, 0.0]).unwrap()[0];
    assert!((gx - PI * (PI / 4.0).cos()).abs() < 1e-14);
    assert!((gx - 2.2214).abs() < 1e-4);
}

#[test]
fn conditions_agree_at_segment_corners() {
    for problem in Problem::all().filter(|p| !p.is_ode()) {
        let domain = problem.domain();
        let conds = problem.conditions();
        let value_conds: Vec<_> = conds.iter().filter(|c| c.direction().is_none()).collect();
        for a in &value_conds {
            for b in &value_conds {
                let (Location::Segment { axis: ia, value: va }, Location::Segment { axis: ib, value: vb }) =
                    (&a.location, &b.location)
                else {
                    continue;
                };
                if ia == ib {
                    continue;
                }
                let mut corner = vec![0.0; 2];
                corner[*ia] = *va;
                corner[*ib] = *vb;
                assert!(
                    (a.target_at(&corner) - b.target_at(&corner)).abs() < 1e-15,
                    "{}: {} vs {} at {corner:?}",
                    problem.id,
                    a.name,
                    b.name
                );
            }
        }
        for c in &conds {
            for p in c.points(&domain, 7) {
                let on_boundary = p.iter().zip(&domain).any(|(x, (lo, hi))| x == lo || x == hi);
                assert!(on_boundary, "{} point {p:?} off the boundary", c.name);
            }
        }
    }
}

#[test]
fn closed_form_conditions_hold_exactly() {
    for problem in closed_form() {
        let domain = problem.domain();
        for c in problem.conditions() {
            for p in c.points(&domain, 11) {
                let jet = problem.exact_jet(&p, c.direction()).unwrap();
                assert!((c.quantity(&jet) - c.target_at(&p)).abs() < 1e-12, "{} {}", problem.id, c.name);
            }
        }
    }
}

#[test]
fn condition_counts() {
    let count = |id| Problem::new(id).conditions().len();
    assert_eq!(count(ProblemId::Harmonic), 2);
    assert_eq!(count(ProblemId::Heat), 3);
    assert_eq!(count(ProblemId::Wave), 4);
    assert_eq!(count(ProblemId::Poisson), 4);
    let airy = Problem::new(ProblemId::Airy);
    assert_eq!(airy.domain(), vec![(-2.0, 3.0)]);
    for c in airy.conditions() {
        assert_eq!(c.location, Location::Point(vec![0.0]));
    }
}

#[test]
fn ids_roundtrip_through_strings() {
    for id in ProblemId::ALL {
        assert_eq!(id.as_str().parse::<ProblemId>().unwrap(), id);
    }
    assert!("schrodinger".parse::<ProblemId>().is_err());
}
