mod common;

use std::collections::HashMap;

use common::{bfs_oracle, random_lp, Kind, OracleStatus};
use lpreach::autodiff::directional;
use lpreach::simplex::{solve_batch, solve_batch_sequential};
use lpreach::{linprog, GeneralLP, SolverConfig};
use ndarray::{Array1, Array2};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn agrees(p: &GeneralLP) -> Result<(), String> {
    let out = linprog(p).unwrap();
    let got = if !out.status.feasible {
        OracleStatus::Infeasible
    } else if !out.status.bounded {
        OracleStatus::Unbounded
    } else {
        OracleStatus::Optimal(out.fun)
    };
    match (bfs_oracle(p), got) {
        (OracleStatus::Optimal(a), OracleStatus::Optimal(b)) if (a - b).abs() <= 1e-8 => Ok(()),
        (a, b) if a == b && !matches!(a, OracleStatus::Optimal(_)) => Ok(()),
        (a, b) => Err(format!("oracle {a:?}, solver {b:?}")),
    }
}

#[test]
fn free_mode_matches_split_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let mut checked = 0;
    while checked < 150 {
        let (mut p, _) = random_lp(&mut rng, Kind::Plain);
        if p.n() > 3 || p.m_ub() + p.m_eq() > 5 {
            continue;
        }
        p.unbounded = true;
        // a box keeps some of the free instances bounded
        if checked % 2 == 0 {
            let n = p.n();
            let mut a = Array2::zeros((p.m_ub() + 2 * n, n));
            a.slice_mut(ndarray::s![..p.m_ub(), ..]).assign(&p.a_ub);
            let mut b = Array1::from_elem(p.m_ub() + 2 * n, 3.0);
            b.slice_mut(ndarray::s![..p.m_ub()]).assign(&p.b_ub);
            for j in 0..n {
                a[[p.m_ub() + 2 * j, j]] = 1.0;
                a[[p.m_ub() + 2 * j + 1, j]] = -1.0;
            }
            p = p.with_ub(a, b);
        }
        agrees(&p).unwrap_or_else(|e| panic!("instance {checked}: {e}\n{p:?}"));
        checked += 1;
    }
}

#[test]
fn solutions_are_feasible_and_match_objective() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for i in 0..300 {
        let kind = [Kind::Plain, Kind::Duplicated][i % 2];
        let (p, _) = random_lp(&mut rng, kind);
        let out = linprog(&p).unwrap();
        if out.status.success {
            assert!(p.max_violation(out.x.view()) <= 1e-9, "instance {i}");
            assert!((p.objective(out.x.view()) - out.fun).abs() <= 1e-12);
        } else {
            assert!(out.x.iter().all(|&v| v == 0.0) && out.fun == 0.0);
        }
    }
}

#[test]
fn batch_of_mixed_instances_matches_sequential() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut by_shape: HashMap<(usize, usize, usize), Vec<GeneralLP>> = HashMap::new();
    for _ in 0..1000 {
        let (p, _) = random_lp(&mut rng, Kind::Plain);
        by_shape.entry((p.n(), p.m_ub(), p.m_eq())).or_default().push(p);
    }
    let problems = by_shape.into_values().max_by_key(Vec::len).unwrap();
    assert!(problems.len() >= 10);
    let cfg = SolverConfig::default();
    let a = solve_batch(&problems, &cfg).unwrap();
    let b = solve_batch_sequential(&problems, &cfg).unwrap();
    assert_eq!(a, b);
    let mixed = [GeneralLP::new(Array1::ones(2)), GeneralLP::new(Array1::ones(3))];
    assert!(solve_batch(&mixed, &cfg).is_err());
}

fn lp_strategy() -> impl Strategy<Value = GeneralLP> {
    (1usize..5, 0usize..4, 0usize..3).prop_flat_map(|(n, m_ub, m_eq)| {
        (
            prop::collection::vec(-1.0f64..1.0, n),
            prop::collection::vec(-1.0f64..1.0, m_ub * n),
            prop::collection::vec(-2.0f64..2.0, m_ub),
            prop::collection::vec(-1.0f64..1.0, m_eq * n),
            prop::collection::vec(-1.0f64..1.0, m_eq),
            any::<bool>(),
        )
            .prop_map(move |(c, a, b, ae, be, free)| {
                GeneralLP::new(Array1::from(c))
                    .with_ub(Array2::from_shape_vec((m_ub, n), a).unwrap(), Array1::from(b))
                    .with_eq(Array2::from_shape_vec((m_eq, n), ae).unwrap(), Array1::from(be))
                    .free(free && n <= 3)
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(400))]

    /// Arbitrary small LPs, including infeasible and unbounded ones.
    #[test]
    fn arbitrary_lps_match_oracle(p in lp_strategy()) {
        prop_assert!(agrees(&p).is_ok(), "{:?}", agrees(&p));
    }

    /// Scaling the objective by a positive factor keeps the point and scales
    /// the value.
    #[test]
    fn objective_scaling(p in lp_strategy(), s in 0.1f64..10.0) {
        let a = linprog(&p).unwrap();
        let mut q = p.clone();
        q.c *= s;
        let b = linprog(&q).unwrap();
        prop_assert_eq!(a.status.success, b.status.success);
        if a.status.success {
            prop_assert!((b.fun - s * a.fun).abs() <= 1e-8 * (1.0 + b.fun.abs()));
        }
    }

    /// Tangents are linear in the seed.
    #[test]
    fn tangents_are_linear(p in lp_strategy(), s in -3.0f64..3.0) {
        let (n, mu, me) = (p.n(), p.m_ub(), p.m_eq());
        let dc = Array1::from_shape_fn(n, |j| (j as f64 + 1.0).sin());
        let db = Array1::from_shape_fn(mu, |i| (i as f64).cos());
        let z2 = |r, c| Array2::<f64>::zeros((r, c));
        let one = directional(&p, dc.view(), z2(mu, n).view(), db.view(), z2(me, n).view(), Array1::zeros(me).view()).unwrap();
        let (dcs, dbs) = (&dc * s, &db * s);
        let many = directional(&p, dcs.view(), z2(mu, n).view(), dbs.view(), z2(me, n).view(), Array1::zeros(me).view()).unwrap();
        prop_assert_eq!(one.valid, many.valid);
        if one.valid {
            prop_assert!((many.dfun[0] - s * one.dfun[0]).abs() <= 1e-9 * (1.0 + many.dfun[0].abs()));
        }
    }
}
