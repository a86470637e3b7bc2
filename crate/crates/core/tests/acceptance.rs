//! Acceptance suite: one line per criterion, run as a plain binary so the
//! lines always reach the output. Exits nonzero if any criterion fails.

use decomp_forge::algebraic::{template, triangle_decompose_algebraic, Labeling};
use decomp_forge::barriers::{
    detect_divisibility_barrier, exact_max_matching, parity_barrier, space_barrier, BarrierVerdict,
    SpaceBarrierSpec,
};
use decomp_forge::codegree::perfect_matching_codegree;
use decomp_forge::design::{steiner_auxiliary, DesignParams};
use decomp_forge::exact::exact_triangle_decomposition;
use decomp_forge::generators::generate_codegree_3graph;
use decomp_forge::iterative::{triangle_decompose_iterative, IterativeParams};
use decomp_forge::latin::{all_latin_squares, latin_to_3graph, transversals};
use decomp_forge::nibble::{rodl_nibble, NibbleParams};
use decomp_forge::octahedron::FlipStats;
use decomp_forge::relaxations::{
    fractional_triangle_decomposition, integral_triangle_decomposition_with, FractionalOutcome,
    IntegralMethod, TriangleLattice,
};
use decomp_forge::verify::{verify_perfect_matching, verify_triangle_decomposition};
use decomp_forge::{Error, SimpleGraph, TriangleDecomposition};
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use std::sync::Mutex;
use std::time::{Duration, Instant};

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        detail: detail.into(),
    }
}

/// Flip and hole tallies shared by criteria 6 and 7, read by criterion 8.
static FLIPS: Mutex<(FlipStats, u64, usize)> = Mutex::new((
    FlipStats {
        flips: 0,
        checks: 0,
        violations: 0,
    },
    0,
    0,
));

fn graph_from_mask(n: usize, mask: u32) -> SimpleGraph {
    let mut g = SimpleGraph::new(n);
    let mut bit = 0;
    for u in 0..n {
        for v in u + 1..n {
            if mask >> bit & 1 == 1 {
                g.add_edge(u, v);
            }
            bit += 1;
        }
    }
    g
}

fn c1_projective_templates() -> Verdict {
    let mut parts = Vec::new();
    let mut pass = true;
    for (a, n, want) in [(3u32, 7usize, 7usize), (4, 15, 35), (5, 31, 155)] {
        let start = Instant::now();
        let kn = SimpleGraph::complete(n);
        let t = template(&kn, &Labeling::identity(n, a).unwrap()).unwrap();
        let d = TriangleDecomposition::new(t.triangles.iter().copied());
        let ok = t.len() == want
            && want == n * (n - 1) / 6
            && verify_triangle_decomposition(&kn.to_hypergraph(), &d).accepted
            && start.elapsed() < Duration::from_secs(1);
        pass &= ok;
        parts.push(format!("K{n}: {} triangles", t.len()));
    }
    verdict(pass, parts.join(", "))
}

fn c2_oracle_equivalence() -> Verdict {
    let mut checked = 0u64;
    let mut bad = Vec::new();
    let mut check = |n: usize, g: &SimpleGraph, lattice: &TriangleLattice| {
        let tri = g.is_tridivisible();
        if exact_triangle_decomposition(g).unwrap().is_some() && !tri {
            bad.push(format!("exact decomposition of non-tridivisible {g:?}"));
        }
        let integral = lattice.solve(g).unwrap().is_some();
        if integral != tri {
            bad.push(format!(
                "integral {integral} but tridivisible {tri} at n = {n}: {g:?}"
            ));
        }
        checked += 1;
    };
    for n in 3..=6 {
        let host = SimpleGraph::complete(n);
        let lattice = TriangleLattice::new(&host);
        let pairs = n * (n - 1) / 2;
        for mask in 0..1u32 << pairs {
            check(n, &graph_from_mask(n, mask), &lattice);
        }
    }
    let host = SimpleGraph::complete(7);
    let lattice = TriangleLattice::new(&host);
    let mut r = rand_chacha::ChaCha8Rng::seed_from_u64(7);
    for _ in 0..100_000 {
        check(
            7,
            &graph_from_mask(7, r.gen::<u32>() & ((1 << 21) - 1)),
            &lattice,
        );
    }
    // The public entry point with the lattice route agrees on a few cases.
    let k7 = SimpleGraph::complete(7);
    let c4 = SimpleGraph::from_edges(7, [(0, 1), (1, 2), (2, 3), (0, 3)]);
    let api_ok = integral_triangle_decomposition_with(&k7, &k7, IntegralMethod::Lattice)
        .unwrap()
        .is_some()
        && integral_triangle_decomposition_with(&c4, &k7, IntegralMethod::Lattice)
            .unwrap()
            .is_none();
    verdict(
        bad.is_empty() && api_ok,
        format!(
            "{checked} graphs, {} disagreements{}",
            bad.len(),
            bad.first().map(|b| format!(": {b}")).unwrap_or_default()
        ),
    )
}

fn c3_space_barriers() -> Verdict {
    let mut equal = [0usize; 4];
    let mut cases = 0;
    let mut bad = Vec::new();
    for n in 3..=12 {
        for i in 1..=3 {
            for s in 0..n {
                if 3 * s >= i * n {
                    continue;
                }
                let spec = SpaceBarrierSpec {
                    n,
                    r: 3,
                    i,
                    s: (0..s).collect(),
                };
                let h = space_barrier(&spec).unwrap();
                let m = exact_max_matching(&h).unwrap().len();
                cases += 1;
                if m > s / i {
                    bad.push((n, i, s, m));
                }
                if m == s / i {
                    equal[i] += 1;
                }
            }
        }
    }
    let pass = bad.is_empty() && equal[1..].iter().all(|&e| e > 0);
    verdict(
        pass,
        format!(
            "{cases} cases, equality counts by i: {:?}, violations: {:?}",
            &equal[1..],
            bad
        ),
    )
}

fn c4_lp_certificates() -> Verdict {
    let mut bad = Vec::new();
    for n in 3..=30 {
        match fractional_triangle_decomposition(&SimpleGraph::complete(n)).unwrap() {
            FractionalOutcome::Feasible(s) => {
                let want = BigRational::new(1.into(), ((n - 2) as i64).into());
                let triangles = n * (n - 1) * (n - 2) / 6;
                if s.weights.len() != triangles || s.weights.values().any(|w| *w != want) {
                    bad.push(format!("K{n}: weights not uniform 1/{}", n - 2));
                }
            }
            FractionalOutcome::Infeasible => bad.push(format!("K{n}: infeasible")),
        }
    }
    // K_{4,4} with a perfect matching inside each part.
    let mut g = SimpleGraph::new(8);
    for u in 0..4 {
        for v in 4..8 {
            g.add_edge(u, v);
        }
    }
    for (u, v) in [(0, 1), (2, 3), (4, 5), (6, 7)] {
        g.add_edge(u, v);
    }
    let extremal = fractional_triangle_decomposition(&g).unwrap();
    if extremal != FractionalOutcome::Infeasible {
        bad.push("extremal graph on 8 vertices is feasible".into());
    }
    verdict(
        bad.is_empty(),
        format!("K3..K30 uniform, extremal n=8 infeasible; problems: {bad:?}"),
    )
}

fn c5_codegree_pipeline() -> Verdict {
    let mut ok = 0;
    let mut notes = Vec::new();
    let mut structural = false;
    for seed in 1..=20u64 {
        let g = generate_codegree_3graph(12, 0.55, seed).unwrap();
        match perfect_matching_codegree(&g, 0.05, seed) {
            Ok(rep) if verify_perfect_matching(&g, &rep.matching).accepted => ok += 1,
            Ok(_) => notes.push(format!("seed {seed}: unverified matching")),
            Err(e) => {
                let best = exact_max_matching(&g).unwrap().len();
                structural |= best != 4;
                notes.push(format!("seed {seed}: {e} (exact max matching {best})"));
            }
        }
    }
    verdict(
        ok >= 18 && !structural,
        format!(
            "{ok}/20 verified{}",
            if notes.is_empty() {
                String::new()
            } else {
                format!("; {}", notes.join("; "))
            }
        ),
    )
}

fn c6_algebraic_pipeline() -> Verdict {
    let mut parts = Vec::new();
    let mut pass = true;
    for n in [7, 9, 13, 15] {
        let g = SimpleGraph::complete(n);
        let h = g.to_hypergraph();
        let mut ok = 0;
        for seed in 1..=20u64 {
            match triangle_decompose_algebraic(&g, seed) {
                Ok(rep) => {
                    let mut tally = FLIPS.lock().unwrap();
                    tally.0.absorb(&rep.flips);
                    tally.1 += rep.hole_checks;
                    tally.2 += 1;
                    if verify_triangle_decomposition(&h, &rep.decomposition).accepted
                        && rep.attempts.len() <= 25
                    {
                        ok += 1;
                    }
                }
                Err(Error::Failed(_)) => {}
                Err(e) => panic!("K{n} seed {seed}: {e}"),
            }
        }
        pass &= ok * 5 >= 20 * 4;
        parts.push(format!("K{n} {ok}/20"));
    }
    verdict(pass, parts.join(", "))
}

fn c7_iterative_pipeline() -> Verdict {
    let mut parts = Vec::new();
    let mut pass = true;
    for n in [13, 19, 21] {
        let g = SimpleGraph::complete(n);
        let h = g.to_hypergraph();
        let mut ok = 0;
        for seed in 1..=20u64 {
            match triangle_decompose_iterative(&g, &IterativeParams::default(), seed) {
                Ok(rep) if verify_triangle_decomposition(&h, &rep.decomposition).accepted => {
                    ok += 1
                }
                Ok(_) => {}
                Err(Error::Failed(_)) => {}
                Err(e) => panic!("K{n} seed {seed}: {e}"),
            }
        }
        pass &= ok * 10 >= 20 * 7;
        parts.push(format!("K{n} {ok}/20"));
    }
    verdict(pass, parts.join(", "))
}

fn c8_flip_invariants() -> Verdict {
    let (stats, holes, runs) = *FLIPS.lock().unwrap();
    verdict(
        stats.checks > 0 && stats.violations == 0 && holes > 0,
        format!(
            "{runs} algebraic runs: {} flips, {} edge-sum checks, {} violations, {holes} exact hole checks",
            stats.flips, stats.checks, stats.violations
        ),
    )
}

fn c9_nibble_leave() -> Verdict {
    let aux = steiner_auxiliary(&DesignParams::new(99, 3, 2, 1).unwrap()).unwrap();
    let h = &aux.hypergraph;
    let fractions: Vec<f64> = (1..=20u64)
        .map(|s| {
            rodl_nibble(h, &NibbleParams::with_seed(s))
                .unwrap()
                .leave_fraction(h.n())
        })
        .collect();
    let good = fractions.iter().filter(|&&f| f <= 0.15).count();
    let worst = fractions.iter().cloned().fold(0.0, f64::max);
    verdict(
        good >= 18,
        format!(
            "{good}/20 seeds leave at most 15% of {} vertices (worst {:.3})",
            h.n(),
            worst
        ),
    )
}

fn c10_divisibility_detection() -> Verdict {
    let mut parts = Vec::new();
    let mut pass = true;
    for n in [6, 9, 12] {
        let (h, p) = parity_barrier(n, 3).unwrap();
        let v = detect_divisibility_barrier(&h, &p).unwrap();
        let index = match &v {
            BarrierVerdict::Barrier { index, .. } => *index,
            _ => None,
        };
        let m = exact_max_matching(&h).unwrap().len();
        let ok = v.is_barrier() && index == Some(2) && m * 3 < n;
        pass &= ok;
        parts.push(format!("n={n}: index {index:?}, max matching {m}"));
    }
    verdict(pass, parts.join(", "))
}

fn c11_latin_reduction() -> Verdict {
    let mut squares = 0;
    let mut bad = 0;
    let mut order2_none = true;
    let mut order3_cyclic = false;
    for k in 1..=4 {
        for l in all_latin_squares(k) {
            squares += 1;
            let h = latin_to_3graph(&l);
            let pm = exact_max_matching(&h).unwrap().len() == k;
            let tv = !transversals(&l).is_empty();
            if pm != tv {
                bad += 1;
            }
            if k == 2 && tv {
                order2_none = false;
            }
            if k == 3 && l == decomp_forge::latin::LatinSquare::cyclic(3) && tv {
                order3_cyclic = true;
            }
        }
    }
    verdict(
        bad == 0 && order2_none && order3_cyclic,
        format!("{squares} squares of order <= 4, {bad} mismatches"),
    )
}

fn main() {
    // `cargo test` passes harness flags; a name filter that matches nothing
    // here skips the suite.
    let args: Vec<String> = std::env::args()
        .skip(1)
        .filter(|a| !a.starts_with('-'))
        .collect();
    if !args.is_empty() && !args.iter().any(|a| "acceptance".contains(a.as_str())) {
        return;
    }
    type Criterion = (usize, &'static str, fn() -> Verdict);
    let criteria: [Criterion; 11] = [
        (1, "projective templates", c1_projective_templates),
        (2, "oracle equivalence", c2_oracle_equivalence),
        (3, "space-barrier bound", c3_space_barriers),
        (4, "LP certificates", c4_lp_certificates),
        (5, "codegree pipeline", c5_codegree_pipeline),
        (6, "algebraic pipeline", c6_algebraic_pipeline),
        (7, "iterative pipeline", c7_iterative_pipeline),
        (8, "flip and hole invariants", c8_flip_invariants),
        (9, "nibble leave", c9_nibble_leave),
        (10, "divisibility detection", c10_divisibility_detection),
        (11, "Latin reduction", c11_latin_reduction),
    ];
    // Criterion 8 reads what 6 and 7 recorded, so it runs after them.
    let results: Vec<(Verdict, Duration)> = std::thread::scope(|s| {
        let early: Vec<_> = criteria[..7]
            .iter()
            .map(|&(_, _, f)| {
                s.spawn(move || {
                    let t = Instant::now();
                    (f(), t.elapsed())
                })
            })
            .collect();
        let mut out: Vec<_> = early
            .into_iter()
            .map(|h| h.join().expect("criterion panicked"))
            .collect();
        let late: Vec<_> = criteria[7..]
            .iter()
            .map(|&(_, _, f)| {
                s.spawn(move || {
                    let t = Instant::now();
                    (f(), t.elapsed())
                })
            })
            .collect();
        out.extend(
            late.into_iter()
                .map(|h| h.join().expect("criterion panicked")),
        );
        out
    });
    let mut failed = 0;
    for ((id, name, _), (v, dt)) in criteria.iter().zip(&results) {
        let tag = if v.pass { "PASS" } else { "FAIL" };
        println!(
            "criterion {id:>2} {tag} {name}: {} [{:.1}s]",
            v.detail,
            dt.as_secs_f64()
        );
        failed += usize::from(!v.pass);
    }
    println!(
        "acceptance: {}/{} criteria pass",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
