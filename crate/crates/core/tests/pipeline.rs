use radiomap_wpt::cli_io::parse_scenario;
use radiomap_wpt::robust::closed_form_power;
use radiomap_wpt::{
    brute_force_plan_oracle, compare_designs, evaluate_plan, los_blocked, solve_p1,
    solve_p1_detailed, sweep, worst_case_energy, worst_case_location, DesignPolicy, Point2,
    PositioningPlan, RobustMode, Scenario, SearchGrid, Stop, SweepAxis, UncertainReceiver,
};

fn fixture(name: &str) -> Scenario {
    let path = format!("{}/fixtures/{name}", env!("CARGO_MANIFEST_DIR"));
    parse_scenario(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

#[test]
fn single_receiver_hovers_overhead() {
    let r = UncertainReceiver::new(Point2::new(1.0, -2.0), 1.0).unwrap();
    let s = Scenario::new(vec![r], vec![], 5.0, 10.0, 60.0);
    let plan = solve_p1(&s, DesignPolicy::RadioMap).unwrap();
    assert_eq!(plan.stops.len(), 1);
    let stop = plan.stops[0];
    assert!(stop.location.distance(&r.approx) <= s.solver.grid_resolution);
    let direct = 60.0 * closed_form_power(&s.true_model(), r.approx, 5.0, &r, 10.0);
    assert!(rel(plan.min_energy, direct) <= 1e-9);
}

#[test]
fn well_separated_pair_is_policy_agnostic() {
    let s = fixture("two_er_obstacle.toml")
        .with_separation(20.0)
        .unwrap();
    let energies: Vec<f64> = DesignPolicy::ALL
        .iter()
        .map(|&p| {
            evaluate_plan(&s, &solve_p1(&s, p).unwrap(), RobustMode::ClosedForm)
                .unwrap()
                .min_energy
        })
        .collect();
    let hi = energies.iter().cloned().fold(f64::MIN, f64::max);
    let lo = energies.iter().cloned().fold(f64::MAX, f64::min);
    assert!((hi - lo) / hi <= 0.05, "{energies:?}");
}

#[test]
fn obstacle_free_compare_is_close() {
    let reports = compare_designs(&fixture("open_field.toml")).unwrap();
    assert_eq!(reports.len(), 3);
    let hi = reports[0].achieved_closed.min_energy;
    let lo = reports[2].achieved_closed.min_energy;
    assert!((hi - lo) / hi <= 0.10, "{hi} vs {lo}");
}

#[test]
fn radiomap_plan_avoids_shadow_while_los_plan_sits_between() {
    let s = fixture("two_er_obstacle.toml")
        .with_separation(3.0)
        .unwrap();
    let rm = solve_p1(&s, DesignPolicy::RadioMap).unwrap();
    let los = solve_p1(&s, DesignPolicy::AssumeLos).unwrap();
    let shadowed = |q: Point2| {
        s.receivers
            .iter()
            .all(|r| los_blocked(q, s.altitude, worst_case_location(q, r), &s.obstacles))
    };
    assert!(rm.stops.iter().all(|st| !shadowed(st.location)));
    assert!(los.stops.iter().any(|st| shadowed(st.location)));
    assert!(los.stops.iter().all(|st| st.location.x.abs() < 1.5));

    let achieved_rm = evaluate_plan(&s, &rm, RobustMode::ClosedForm)
        .unwrap()
        .min_energy;
    let achieved_los = evaluate_plan(&s, &los, RobustMode::ClosedForm)
        .unwrap()
        .min_energy;
    assert!(achieved_rm > achieved_los);
}

#[test]
fn plan_energies_recompute_from_stops() {
    for name in [
        "two_er_obstacle.toml",
        "five_er_field.toml",
        "open_field.toml",
    ] {
        let s = fixture(name);
        for policy in DesignPolicy::ALL {
            let plan = solve_p1(&s, policy).unwrap();
            let total: f64 = plan.stops.iter().map(|st| st.duration).sum();
            assert!(rel(total, s.duration) <= 1e-9);
            assert!(plan.stops.iter().all(|st| st.duration > 0.0));
            let model = s.model_for(policy);
            for (k, r) in s.receivers.iter().enumerate() {
                let e = worst_case_energy(
                    &model,
                    &plan,
                    s.duration,
                    s.altitude,
                    r,
                    s.tx_power,
                    RobustMode::ClosedForm,
                )
                .unwrap();
                assert!(
                    rel(e, plan.per_receiver_energy[k]) <= 1e-9,
                    "{name} {policy} receiver {k}"
                );
            }
            let min = plan
                .per_receiver_energy
                .iter()
                .cloned()
                .fold(f64::MAX, f64::min);
            assert!(rel(min, plan.min_energy) <= 1e-9);
        }
    }
}

#[test]
fn dual_bound_certifies_every_fixture() {
    for name in [
        "two_er_obstacle.toml",
        "five_er_field.toml",
        "open_field.toml",
    ] {
        let s = fixture(name);
        for policy in DesignPolicy::ALL {
            let sol = solve_p1_detailed(&s, policy).unwrap();
            assert!(sol.dual_bound >= sol.plan.min_energy * (1.0 - 1e-12));
            assert!(
                sol.relative_gap() <= 0.01,
                "{name} {policy}: {}",
                sol.relative_gap()
            );
        }
    }
}

#[test]
fn radiomap_dominates_on_every_fixture() {
    for name in [
        "two_er_obstacle.toml",
        "five_er_field.toml",
        "open_field.toml",
    ] {
        let reports = compare_designs(&fixture(name)).unwrap();
        let rm = reports
            .iter()
            .find(|r| r.policy == DesignPolicy::RadioMap)
            .unwrap();
        let gap = 0.01 * rm.achieved_closed.min_energy;
        for r in &reports {
            assert!(
                rm.achieved_closed.min_energy >= r.achieved_closed.min_energy - gap,
                "{name}: {}",
                r.policy
            );
        }
        assert!(rel(rm.achieved_closed.min_energy, rm.planned_energy) <= 1e-9);
    }
}

#[test]
fn doubling_power_doubles_energy_and_keeps_stops() {
    let s = fixture("five_er_field.toml");
    let a = compare_designs(&s).unwrap();
    let b = compare_designs(&s.with_tx_power(2.0 * s.tx_power)).unwrap();
    for ra in &a {
        let rb = b.iter().find(|r| r.policy == ra.policy).unwrap();
        assert!(
            rel(
                rb.achieved_closed.min_energy,
                2.0 * ra.achieved_closed.min_energy
            ) <= 1e-9
        );
        let la: Vec<Point2> = ra.plan.stops.iter().map(|s| s.location).collect();
        let lb: Vec<Point2> = rb.plan.stops.iter().map(|s| s.location).collect();
        assert_eq!(la, lb);
    }
}

#[test]
fn power_sweep_is_linear() {
    let s = fixture("two_er_obstacle.toml");
    let values = [5.0, 10.0, 15.0, 20.0];
    let rows = sweep(&s, SweepAxis::TxPower, &values, RobustMode::ClosedForm).unwrap();
    assert_eq!(rows.len(), values.len() * 3);
    for policy in DesignPolicy::ALL {
        let per_watt: Vec<f64> = rows
            .iter()
            .filter(|r| r.policy == policy)
            .map(|r| r.achieved_energy / r.value)
            .collect();
        assert!(
            per_watt.iter().all(|v| rel(*v, per_watt[0]) <= 1e-9),
            "{policy}: {per_watt:?}"
        );
    }
}

#[test]
fn separation_gap_closes_with_distance() {
    let s = fixture("two_er_obstacle.toml");
    let rows = sweep(
        &s,
        SweepAxis::Separation,
        &[3.0, 16.0],
        RobustMode::ClosedForm,
    )
    .unwrap();
    let at = |v: f64, p: DesignPolicy| {
        rows.iter()
            .find(|r| r.value == v && r.policy == p)
            .unwrap()
            .achieved_energy
    };
    let near_gap = at(3.0, DesignPolicy::RadioMap) / at(3.0, DesignPolicy::AssumeLos) - 1.0;
    let far_gap = at(16.0, DesignPolicy::RadioMap) / at(16.0, DesignPolicy::AssumeLos) - 1.0;
    assert!(near_gap > 0.2);
    assert!(far_gap.abs() < 0.05);
}

#[test]
fn zero_radius_single_stop_matches_direct_integration() {
    let s0 = fixture("two_er_obstacle.toml");
    let receivers: Vec<UncertainReceiver> = s0
        .receivers
        .iter()
        .map(|r| UncertainReceiver::new(r.approx, 0.0).unwrap())
        .collect();
    let s = Scenario { receivers, ..s0 };
    let q = Point2::new(0.3, 1.7);
    let plan = PositioningPlan {
        stops: vec![Stop {
            location: q,
            duration: s.duration,
        }],
        min_energy: 0.0,
        per_receiver_energy: vec![],
    };
    let eval = evaluate_plan(&s, &plan, RobustMode::ClosedForm).unwrap();
    let model = s.true_model();
    for (k, r) in s.receivers.iter().enumerate() {
        let direct = s.duration * model.rf_power(q, s.altitude, r.approx, s.tx_power);
        assert!(rel(eval.per_receiver[k], direct) <= 1e-12);
    }
}

#[test]
fn sampled_evaluation_is_reproducible_and_bounded_in_open_field() {
    let s = fixture("open_field.toml");
    let plan = solve_p1(&s, DesignPolicy::RadioMap).unwrap();
    let mode = s.sampled_mode();
    let a = evaluate_plan(&s, &plan, mode).unwrap();
    let b = evaluate_plan(&s, &plan, mode).unwrap();
    assert_eq!(a, b);
    let closed = evaluate_plan(&s, &plan, RobustMode::ClosedForm).unwrap();
    for (sampled, c) in a.per_receiver.iter().zip(&closed.per_receiver) {
        assert!(*sampled >= c * (1.0 - 1e-12));
    }
}

#[test]
fn oracle_is_monotone_in_allowed_stops() {
    let mut s = fixture("two_er_obstacle.toml")
        .with_separation(4.0)
        .unwrap();
    s.grid = Some(SearchGrid::new(-4.0, 4.0, -3.0, 3.0, 0.5).unwrap());
    let one = brute_force_plan_oracle(&s, DesignPolicy::RadioMap, 1).unwrap();
    let two = brute_force_plan_oracle(&s, DesignPolicy::RadioMap, 2).unwrap();
    let three = brute_force_plan_oracle(&s, DesignPolicy::RadioMap, 3).unwrap();
    assert!(one.min_energy <= two.min_energy * (1.0 + 1e-12));
    assert!(two.min_energy <= three.min_energy * (1.0 + 1e-12));
    let pipeline = solve_p1(&s, DesignPolicy::RadioMap).unwrap();
    assert!(rel(pipeline.min_energy, three.min_energy) <= 0.01);
}

#[test]
fn oracle_rejects_oversized_problems() {
    let s = fixture("two_er_obstacle.toml");
    assert!(brute_force_plan_oracle(&s, DesignPolicy::RadioMap, 2).is_err());
    let mut coarse = s.clone();
    coarse.grid = Some(SearchGrid::new(-4.0, 4.0, -3.0, 3.0, 1.0).unwrap());
    assert!(brute_force_plan_oracle(&coarse, DesignPolicy::RadioMap, 4).is_err());
}
