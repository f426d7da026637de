//! Exhaustive level-pair routing sweeps at d = 3 plus gateway and
//! step-set diagnostics on solver-produced flow/cut pairs.

use std::collections::BTreeSet;

use hcf_core::flow::{max_flow_min_cut, CapMap, Capacity, FlowProblem};
use hcf_core::hypercube::{Dimension, Vertex};
use hcf_core::lr_routing::{
    double_lr_solution, gateway_step_sets, gateways, lr_solution, pink_count, GatewayContext,
    GatewayMode, LRSolution,
};
use hcf_core::matched_pairs::{enumerate_level_matched_pairs, MatchedPair};
use hcf_core::Error;

fn d3() -> Dimension {
    Dimension::new(3).unwrap()
}

fn level_pairs(i: usize, j: usize) -> Vec<MatchedPair> {
    enumerate_level_matched_pairs(d3(), i, j, 3).unwrap().collect()
}

fn assert_routes_pair(sol: &LRSolution, p: &MatchedPair, i: usize, j: usize) {
    assert_eq!(sol.len(), p.len());
    let mut want_sources = p.sources();
    want_sources.sort_unstable();
    let mut want_targets = p.targets();
    want_targets.sort_unstable();
    assert_eq!(sol.sources(), want_sources);
    assert_eq!(sol.targets(), want_targets);
    let mut seen: BTreeSet<Vertex> = BTreeSet::new();
    for path in sol.paths() {
        assert_eq!(path[0].layer(), i);
        assert_eq!(path.last().unwrap().layer(), j);
        assert_eq!(path.len(), j - i + 1);
        for w in path.windows(2) {
            assert!(w[0].lt(&w[1]));
            assert_eq!(w[1].layer(), w[0].layer() + 1);
        }
        for v in path {
            assert!(seen.insert(*v), "vertex {v} appears on two paths");
        }
    }
}

#[test]
fn every_level_pair_routes_disjointly() {
    let mut checked = 0;
    for i in 0..3 {
        for j in i + 1..=3 {
            for p in level_pairs(i, j) {
                let sol = lr_solution(&p).unwrap();
                assert_routes_pair(&sol, &p, i, j);
                checked += 1;
            }
        }
    }
    assert_eq!(checked, 29);
}

#[test]
fn distant_level_pairs_route_two_collections() {
    let mut checked = 0;
    for (i, j) in [(0, 2), (0, 3), (1, 3)] {
        for p in level_pairs(i, j) {
            let double = double_lr_solution(&p).unwrap();
            double.verify().unwrap();
            assert_routes_pair(double.first(), &p, i, j);
            assert_routes_pair(double.second(), &p, i, j);
            checked += 1;
        }
    }
    assert_eq!(checked, 7);
}

#[test]
fn adjacent_levels_refuse_double_routing() {
    let p = level_pairs(1, 2).into_iter().next().unwrap();
    let err = double_lr_solution(&p).unwrap_err();
    assert_eq!(err, Error::LevelGapTooSmall { gap: 1 });
    assert!(err.to_string().contains("distance \u{2265} 2 required"));
}

fn vertex_cut_context(p: &MatchedPair) -> (FlowProblem, GatewayContext) {
    let problem = FlowProblem::on_full_cube(
        p.d(),
        &p.sources(),
        &p.targets(),
        CapMap::uniform(Capacity::Finite(1)),
        CapMap::uniform(Capacity::Infinite),
    )
    .unwrap();
    let (flow, cut) = max_flow_min_cut(&problem).unwrap();
    let ctx = GatewayContext::new(&problem, &flow, &cut).unwrap();
    (problem, ctx)
}

#[test]
fn vertex_gateways_sit_off_every_path() {
    for (i, j) in [(0, 2), (0, 3), (1, 2), (1, 3)] {
        for p in level_pairs(i, j) {
            let (_, ctx) = vertex_cut_context(&p);
            let on_paths: BTreeSet<Vertex> =
                ctx.paths().paths().iter().flatten().copied().collect();
            for k in i..j {
                for gw in gateways(&ctx, k, GatewayMode::VertexOnly) {
                    assert_eq!(gw.layer(), k);
                    assert!(ctx.partition().s_side().binary_search(&gw).is_ok());
                    assert!(!on_paths.contains(&gw), "gateway {gw} lies on a path");
                    assert!(ctx.cut().vertices().binary_search(&gw).is_err());
                }
                for gw in gateways(&ctx, k, GatewayMode::General) {
                    assert!(ctx.path_count(&gw) <= 1);
                    assert!(ctx.restricted_cover().contains(&gw));
                }
            }
        }
    }
}

#[test]
fn step_sets_project_injectively() {
    for (i, j) in [(0, 2), (0, 3)] {
        for p in level_pairs(i, j) {
            let (_, ctx) = vertex_cut_context(&p);
            for v_star in ctx.partition().s_side().to_vec() {
                for r in 1..=3 {
                    if v_star.coordinate(r).unwrap() {
                        let err = gateway_step_sets(&ctx, &v_star, r).unwrap_err();
                        assert!(matches!(err, Error::ContextMismatch(_)));
                        continue;
                    }
                    let sets = gateway_step_sets(&ctx, &v_star, r).unwrap();
                    let (a, x, b, y) = sets.sizes();
                    assert_eq!(a, x);
                    assert_eq!(b, y);
                    let raised: Vec<Vertex> =
                        sets.a().iter().map(|v| v.project(r).unwrap()).collect();
                    assert_eq!(raised, sets.x());
                    let lowered: Vec<Vertex> =
                        sets.b().iter().map(|v| v.project(r).unwrap()).collect();
                    assert_eq!(lowered, sets.y());
                    for v in sets.a() {
                        assert_eq!(v.layer(), v_star.layer());
                        assert!(!v.coordinate(r).unwrap());
                        assert!(ctx.partition().s_side().binary_search(v).is_ok());
                    }
                    let successors: BTreeSet<Vertex> = ctx
                        .paths()
                        .paths()
                        .iter()
                        .flat_map(|path| path.windows(2))
                        .filter(|w| sets.x().contains(&w[0]))
                        .map(|w| w[1])
                        .collect();
                    assert_eq!(successors.into_iter().collect::<Vec<_>>(), sets.b());
                }
            }
        }
    }
}

#[test]
fn pink_count_matches_direct_enumeration() {
    for p in level_pairs(0, 3) {
        let (_, ctx) = vertex_cut_context(&p);
        let everything: Vec<Vertex> =
            ctx.paths().paths().iter().flatten().copied().collect();
        for r in 1..=3 {
            let expected = ctx
                .paths()
                .arc_flow()
                .keys()
                .filter(|e| e.dim() != r)
                .count();
            assert_eq!(pink_count(&ctx, r, &everything).unwrap(), expected);
            assert!(pink_count(&ctx, r, &[]).unwrap() == 0);
        }
        let err = pink_count(&ctx, 0, &everything).unwrap_err();
        assert!(matches!(err, Error::CoordinateRange { .. }));
        let err = pink_count(&ctx, 4, &everything).unwrap_err();
        assert!(matches!(err, Error::CoordinateRange { .. }));
    }
}
