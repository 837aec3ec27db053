//! Calibration run for the frozen constants in `verifier::frozen`.
//!
//! Measures the empirical reverse-Poincaré and Lipschitz-estimate constants
//! and the Moser (C1, C2) pair over the calibration suite, and prints the
//! maxima observed. The frozen bounds are these maxima with 1.5x headroom.

use npc_core::cat0::MetricTree;
use npc_core::verifier::{
    harmonic_instance, lipschitz_estimate_constant, moser_measure, reverse_poincare_constant,
    torsion_instance, BoundarySpec, CheckSpec, DomainSpec, RegionSpec, Scenario,
};
use npc_core::{SolverParams, TargetSpace};

fn scenario(target: TargetSpace, seed: u64) -> Scenario {
    Scenario {
        name: format!("calibrate-{seed}"),
        seed,
        domain: DomainSpec::Torus { nx: 12, ny: 12, spacing: 1.0 },
        target,
        region: RegionSpec::FrameComplement,
        boundary: BoundarySpec::Anchored { anchors: 5, amplitude: 1.0, seed },
        solver: SolverParams { tolerance: 1e-11, ..Default::default() },
        checks: vec![CheckSpec::named("subharmonicity")],
        refinement_levels: 3,
    }
}

fn main() {
    let targets: Vec<(&str, TargetSpace)> = vec![
        ("euclidean", TargetSpace::Euclidean { dim: 2 }),
        ("tree", TargetSpace::Tree(MetricTree::tripod())),
        ("hyperbolic", TargetSpace::Hyperbolic),
    ];
    for (name, target) in &targets {
        let mut rp_max = 0.0f64;
        let mut lip_max = 0.0f64;
        for seed in 101..=105u64 {
            let sc = scenario(target.clone(), seed);
            for level in 0..3usize {
                let (g, region, solve) = sc.solve_level(level).expect("solve");
                let (center, radius) = sc.default_ball(&g, &region);
                let rp = reverse_poincare_constant(&g, &solve.map, &region, center, radius, 0.5, None)
                    .expect("rp");
                let lip =
                    lipschitz_estimate_constant(&g, &solve.map, &region, center, radius / 2.0)
                        .expect("lip");
                rp_max = rp_max.max(rp);
                lip_max = lip_max.max(lip);
                println!("{name} seed={seed} level={level} rp={rp:.4} lip={lip:.4}");
            }
        }
        println!("== {name}: rp_max={rp_max:.4} (freeze {:.4}), lip_max={lip_max:.4} (freeze {:.4})",
            1.5 * rp_max, 1.5 * lip_max);
    }

    // Moser constants on the torus family, lambda = 1/2
    let sc = scenario(TargetSpace::Euclidean { dim: 1 }, 200);
    let mut c1_max = 0.0f64;
    for seed in 101..=110u64 {
        for level in 0..2usize {
            let g = sc.domain.build(level).unwrap();
            let region = sc.region.build(&sc.domain, level, &g).unwrap();
            let f = harmonic_instance(&g, &region, seed).unwrap();
            let (center, radius) = sc.default_ball(&g, &region);
            let m = moser_measure(&g, &f, &region, center, radius, 0.0, 0.0, 2.0 * radius, 0.5, 0.0)
                .expect("harmonic measure");
            if m.avg_plus > 1e-12 {
                c1_max = c1_max.max(m.sup_small / m.avg_plus);
            }
            println!("moser harmonic seed={seed} level={level} ratio={:.4}", m.sup_small / m.avg_plus.max(1e-300));
        }
    }
    println!("== moser C1_max={c1_max:.4} (freeze {:.4})", 1.5 * c1_max);
        let mut c2_max = 0.0f64;
    for level in 0..2usize {
        for beta in [0.5f64, 1.0, 2.0] {
            let g = sc.domain.build(level).unwrap();
            let region = sc.region.build(&sc.domain, level, &g).unwrap();
            let (center, radius) = sc.default_ball(&g, &region);
            let big_r = 2.0 * radius;
            let f = torsion_instance(&g, &region, beta, big_r).unwrap();
            // zero out the averaging term for a conservative C2
            let m = moser_measure(&g, &f, &region, center, radius, 0.0, beta, big_r, 0.5, 0.0)
                .expect("torsion measure");
            c2_max = c2_max.max(m.c2_usage);
            println!("moser torsion beta={beta} level={level} c2_usage={:.4}", m.c2_usage);
        }
    }
    println!("== moser C2_max={c2_max:.4} (freeze {:.4})", 1.5 * c2_max);

    // path-family Moser (for completeness of the frozen table)
    let path = DomainSpec::Path { n: 101, spacing: 0.05 };
    let mut c1_path = 0.0f64;
    let mut c2_path = 0.0f64;
    for seed in 101..=110u64 {
        let g = path.build(0).unwrap();
        let region = npc_core::VertexSubset::whole_graph_with_boundary(&g, vec![0, 100]).unwrap();
        let f = harmonic_instance(&g, &region, seed).unwrap();
        let center = 50;
        let radius = 1.0;
        let m = moser_measure(&g, &f, &region, center, radius, 0.0, 0.0, 2.0 * radius, 0.5, 0.0)
            .expect("path harmonic");
        if m.avg_plus > 1e-12 {
            c1_path = c1_path.max(m.sup_small / m.avg_plus);
        }
    }
    for beta in [0.5f64, 1.0, 2.0] {
        let g = path.build(0).unwrap();
        let region = npc_core::VertexSubset::whole_graph_with_boundary(&g, vec![0, 100]).unwrap();
        let f = torsion_instance(&g, &region, beta, 2.0).unwrap();
        let m = moser_measure(&g, &f, &region, 50, 1.0, 0.0, beta, 2.0, 0.5, 0.0)
            .expect("path torsion");
        c2_path = c2_path.max(m.c2_usage);
    }
    println!(
        "== moser path C1_max={c1_path:.4} (freeze {:.4}) C2_max={c2_path:.4} (freeze {:.4})",
        1.5 * c1_path,
        1.5 * c2_path
    );
}
