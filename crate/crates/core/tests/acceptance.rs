//! Acceptance suite: one test per criterion, each printing a PASS line.
//!
//! Every comparison here is an exact rational identity; there are no
//! tolerances anywhere. Run with `--nocapture` to see the lines:
//!
//! ```text
//! cargo test --release --test acceptance -- --nocapture
//! ```

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use krawlp_core::field::FieldSpec;
use krawlp_core::hierarchy::{
    build_kraw_pseudo, build_kraw_pseudo_weak, build_partial_pseudo, build_unsym_kraw,
    build_unsym_partial, kraw_objective, Instance, PseudoDistribution,
};
use krawlp_core::lattice::Lattice;
use krawlp_core::lp::{solve, verify_optimality, LinearProgram, LpSolution, Sense, Status};
use krawlp_core::oracle::{
    brute_force_a, fourier_row_value, infeasibility_level, integrality_test, mass_transfer_step,
    nonintegral_point, true_solution,
};
use krawlp_core::suites::{charsum_suite, mobius_suite};
use krawlp_core::{Caps, Rational};

fn f2() -> FieldSpec {
    FieldSpec::new(2).unwrap()
}

fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

fn int(n: i64) -> Rational {
    Rational::from(BigInt::from(n))
}

/// Criterion 11 is enforced at every solve: optima must re-verify exactly.
fn solve_checked(lp: &LinearProgram, what: &str) -> LpSolution {
    let sol = solve(lp);
    assert_eq!(sol.status, Status::Optimal, "{what}: expected an optimum");
    assert!(verify_optimality(lp, &sol), "{what}: certificate failed re-verification");
    sol
}

/// The completeness grid of criterion 1/2 with the table values of
/// A_2^Lin(n, d) frozen independently of the oracle.
const GRID: &[(usize, usize, u64)] = &[
    (2, 2, 2),
    (3, 2, 4),
    (3, 3, 2),
    (4, 2, 8),
    (4, 3, 2),
    (4, 4, 2),
    (5, 3, 4),
];

#[test]
fn acceptance_01_kraw_completeness_grid() {
    for &(n, d, a_expected) in GRID {
        let spec = f2();
        let lat = Lattice::enumerate(&spec, n).unwrap();
        let inst = Instance::new(spec, n, d, n as u32).unwrap();
        let report = brute_force_a(&inst, &lat);
        assert_eq!(report.a_value, a_expected.into(), "oracle at (2,{n},{d})");

        let lp = build_kraw_pseudo(&inst, &lat).unwrap();
        let sol = solve_checked(&lp, &format!("kraw (2,{n},{d})"));
        let expected = Rational::from(BigInt::from(a_expected).pow(n as u32));
        assert_eq!(
            sol.objective_value, expected,
            "val(kraw) != A^l at (2,{n},{d})"
        );
    }
    println!("acceptance 1 (kraw completeness, val = A^l on the grid): PASS");
}

#[test]
fn acceptance_02_partial_completeness_grid() {
    for &(n, d, a_expected) in GRID {
        let spec = f2();
        let lat = Lattice::enumerate(&spec, n).unwrap();
        let inst = Instance::new(spec, n, d, n as u32).unwrap();
        let report = brute_force_a(&inst, &lat);
        assert_eq!(report.a_value, a_expected.into(), "oracle at (2,{n},{d})");

        let lp = build_partial_pseudo(&inst, &lat).unwrap();
        let sol = solve_checked(&lp, &format!("partial (2,{n},{d})"));
        assert_eq!(
            sol.objective_value,
            int(a_expected as i64),
            "val(partial) != A at (2,{n},{d})"
        );
    }
    println!("acceptance 2 (partial completeness, val = A on the grid): PASS");
}

#[test]
fn acceptance_03_relaxation_sandwich_above_level_n() {
    let spec = f2();
    let lat = Lattice::enumerate(&spec, 3).unwrap();
    let mut shapes = Vec::new();
    for level in [3u32, 4] {
        let inst = Instance::new(spec.clone(), 3, 2, level).unwrap();
        let a_pow = Rational::from(BigInt::from(4u32).pow(level));
        let lp = build_kraw_pseudo(&inst, &lat).unwrap();
        assert_eq!(lp.num_variables(), 16);
        shapes.push((lp.num_variables(), lp.num_constraints()));
        let sol = solve_checked(&lp, &format!("kraw level {level}"));
        assert!(sol.objective_value >= a_pow, "A^l <= val fails at level {level}");
        assert_eq!(sol.objective_value, a_pow, "equality fails at level {level}");
    }
    assert_eq!(shapes[0], shapes[1], "variable/row counts must not depend on the level");
    println!("acceptance 3 (relaxation sandwich at levels 3 and 4): PASS");
}

#[test]
fn acceptance_04_nonintegral_point() {
    let spec = f2();
    let lat = Lattice::enumerate(&spec, 3).unwrap();
    let inst = Instance::new(spec, 3, 2, 3).unwrap();
    let point = nonintegral_point(&lat, 2, 3, &rat(1, 2)).unwrap();

    let lp = build_kraw_pseudo(&inst, &lat).unwrap();
    let violated = lp.check_feasible_dense(point.distribution.values());
    assert!(violated.is_empty(), "violated rows: {violated:?}");
    assert_eq!(point.distribution.get(point.line), &rat(-1, 16));
    assert!(!integrality_test(&point.distribution));
    println!("acceptance 4 (feasible non-integral point with mass -1/16): PASS");
}

#[test]
fn acceptance_05_infeasibility_level_escalation() {
    let spec = f2();
    let lat = Lattice::enumerate(&spec, 3).unwrap();
    let point = nonintegral_point(&lat, 2, 3, &rat(1, 2)).unwrap();

    let (level, witness) = infeasibility_level(&point.distribution, &lat, 3, 64).unwrap();
    assert_eq!(level, 4);
    assert_eq!(witness, point.line);
    let at3 = fourier_row_value(&point.distribution, &lat, witness, 3);
    let at4 = fourier_row_value(&point.distribution, &lat, witness, 4);
    assert!(!at3.is_negative(), "row at level 3 should be nonnegative, got {at3}");
    assert!(at4.is_negative(), "row at level 4 should be negative, got {at4}");
    println!("acceptance 5 (escalation to level 4 at the negative line): PASS");
}

#[test]
fn acceptance_06_partial_polytope_integrality_structure() {
    for (n, d) in [(2usize, 2usize), (3, 2)] {
        let spec = f2();
        let lat = Lattice::enumerate(&spec, n).unwrap();
        let inst = Instance::new(spec, n, d, n as u32).unwrap();
        let lp = build_partial_pseudo(&inst, &lat).unwrap();

        for s in lat.ids() {
            let singleton = lp.constraints().iter().any(|c| {
                c.relation() == krawlp_core::Relation::Ge
                    && c.rhs().is_zero()
                    && c.coeffs().len() == 1
                    && c.coeffs()[0].0 == s.0
                    && c.coeffs()[0].1.is_positive()
            });
            assert!(singleton, "(2,{n},{d}): no singleton row for P_{}", s.0);

            let min_lp = lp
                .with_objective(Sense::Minimize, vec![(s.0, Rational::one())])
                .unwrap();
            let sol = solve_checked(&min_lp, &format!("min P_{} at (2,{n},{d})", s.0));
            assert!(
                !sol.objective_value.is_negative(),
                "(2,{n},{d}): min P_{} = {} < 0",
                s.0,
                sol.objective_value
            );
        }
    }
    println!("acceptance 6 (partial polytope: singleton rows, minima >= 0): PASS");
}

#[test]
fn acceptance_07_mobius_inversion() {
    for (q, n) in [(2u32, 4usize), (3, 3)] {
        let spec = FieldSpec::new(q).unwrap();
        let outcome = mobius_suite(&spec, n, 20240811, 100).unwrap();
        assert!(outcome.passed(), "mobius suite at (q={q}, n={n}): {outcome:?}");
    }
    println!("acceptance 7 (zeta/Mobius round-trip and sum identities): PASS");
}

#[test]
fn acceptance_08_unsym_pseudo_crosscheck() {
    let spec = f2();
    let lat = Lattice::enumerate(&spec, 2).unwrap();
    let inst = Instance::new(spec, 2, 2, 2).unwrap();
    let caps = Caps::default();

    let kraw_unsym = solve_checked(&build_unsym_kraw(&inst, &caps).unwrap(), "unsym kraw");
    let kraw_pseudo = solve_checked(&build_kraw_pseudo(&inst, &lat).unwrap(), "pseudo kraw");
    assert_eq!(kraw_unsym.objective_value, int(4));
    assert_eq!(kraw_pseudo.objective_value, int(4));

    let partial_unsym =
        solve_checked(&build_unsym_partial(&inst, &caps).unwrap(), "unsym partial");
    let partial_pseudo =
        solve_checked(&build_partial_pseudo(&inst, &lat).unwrap(), "pseudo partial");
    assert_eq!(partial_unsym.objective_value, int(2));
    assert_eq!(partial_pseudo.objective_value, int(2));
    println!("acceptance 8 (unsymmetrized optima equal subspace optima, 4 and 2): PASS");
}

#[test]
fn acceptance_09_character_sum_identities() {
    let spec = f2();
    for n in 1..=3usize {
        let outcome = charsum_suite(&spec, n).unwrap();
        assert!(outcome.passed(), "charsum at n = {n}: {outcome:?}");
    }
    println!("acceptance 9 (character sums, full and mixed, n <= 3): PASS");
}

#[test]
fn acceptance_10_mass_transfer() {
    let spec = f2();
    let lat = Lattice::enumerate(&spec, 3).unwrap();
    let inst = Instance::new(spec, 3, 2, 3).unwrap();
    let k0 = brute_force_a(&inst, &lat).k0;
    assert_eq!(k0, 2);
    let fig5 = build_kraw_pseudo_weak(&inst, &lat, k0).unwrap();

    let start = true_solution(lat.zero_space(), &lat);
    let first = mass_transfer_step(&start, &lat, k0, 3).unwrap();
    assert_eq!(first.objective_increase, int(7));
    assert!(fig5.check_feasible_dense(first.distribution.values()).is_empty());
    assert_eq!(
        kraw_objective(&first.distribution, &lat, 3) - kraw_objective(&start, &lat, 3),
        int(7)
    );

    // Every further step must match |S_min|^l (q^l - 1) P[S_min] exactly.
    let q_gain = int(7); // q^l - 1 = 2^3 - 1
    let mut p = first.distribution;
    while let Ok(step) = mass_transfer_step(&p, &lat, k0, 3) {
        let src_size_pow =
            Rational::from(BigInt::from(2u32).pow(3 * lat.dim(step.source) as u32));
        assert_eq!(
            step.objective_increase,
            src_size_pow * &q_gain * p.get(step.source)
        );
        assert_eq!(
            kraw_objective(&step.distribution, &lat, 3) - kraw_objective(&p, &lat, 3),
            step.objective_increase
        );
        assert!(fig5.check_feasible_dense(step.distribution.values()).is_empty());
        p = step.distribution;
    }
    println!("acceptance 10 (mass transfer: +7 first step, formula throughout): PASS");
}

#[test]
fn acceptance_11_solver_integrity() {
    // Every solve in this suite goes through `solve_checked`, which insists
    // on exact strong duality. Re-verify a representative spread here so the
    // criterion has its own line and its own witnesses.
    let spec = f2();
    for (n, d) in [(2usize, 2usize), (3, 2), (3, 3)] {
        let lat = Lattice::enumerate(&spec, n).unwrap();
        let inst = Instance::new(spec.clone(), n, d, n as u32).unwrap();
        for (name, lp) in [
            ("kraw", build_kraw_pseudo(&inst, &lat).unwrap()),
            ("partial", build_partial_pseudo(&inst, &lat).unwrap()),
        ] {
            let sol = solve(&lp);
            assert_eq!(sol.status, Status::Optimal);
            assert!(
                verify_optimality(&lp, &sol),
                "strong duality failed on {name} at (2,{n},{d})"
            );
            // Perturbing the reported value must break verification.
            let mut broken = sol.clone();
            broken.objective_value += rat(1, 1_000_000);
            assert!(!verify_optimality(&lp, &broken));
        }
    }
    println!("acceptance 11 (exact strong duality on every optimum): PASS");
}

#[test]
fn acceptance_optimal_vertices_are_integral_on_grid() {
    // Companion to criteria 1 and 2: the returned optimal vertices of both
    // programs are genuine distributions over codes at level n.
    for &(n, d, _) in GRID {
        let spec = f2();
        let lat = Lattice::enumerate(&spec, n).unwrap();
        let inst = Instance::new(spec, n, d, n as u32).unwrap();
        for (name, lp) in [
            ("kraw", build_kraw_pseudo(&inst, &lat).unwrap()),
            ("partial", build_partial_pseudo(&inst, &lat).unwrap()),
        ] {
            let sol = solve_checked(&lp, name);
            let vertex = PseudoDistribution::new(sol.primal().to_vec());
            assert!(
                integrality_test(&vertex),
                "{name} vertex at (2,{n},{d}) is not integral"
            );
        }
    }
    println!("acceptance extra (optimal vertices integral at level n): PASS");
}
