//! Ground truth and executable verification of the structural results.
//!
//! `brute_force_a` scans the whole lattice for the largest code of minimum
//! distance d, giving the exact A_q^Lin(n, d) every completeness check is
//! measured against. The module also builds the explicit non-integral
//! feasible point for k0 >= 2, locates the level at which a point with a
//! negative mass turns infeasible, and performs the cover-averaging mass
//! transfer step that drives the completeness argument.

use std::collections::BTreeMap;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::hierarchy::{
    build_kraw_pseudo, build_partial_pseudo, HierarchyError, Instance,
    PseudoDistribution,
};
use crate::lattice::{Lattice, SubspaceId};
use crate::lp::{fmt_rational, solve, verify_optimality, LpSolution, Status};
use crate::Rational;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("construction requires k0 >= 2, but k0 = {k0}")]
    NeedsLargerCode { k0: usize },
    #[error("epsilon must lie strictly between 0 and 1")]
    BadEpsilon,
    #[error("the point has no negative entry")]
    NoNegativeEntry,
    #[error("no level up to {cap} makes the point infeasible")]
    LevelCapReached { cap: u32 },
    #[error("no mass sits below dimension {k0}; nothing to transfer")]
    NoTransferStep { k0: usize },
    #[error("the transfer source must carry positive mass")]
    NonpositiveSource,
    #[error(transparent)]
    Hierarchy(#[from] HierarchyError),
    #[error("solver returned {status:?} on `{model}`, expected an optimum")]
    SolverAnomaly { model: String, status: Status },
    #[error("solver certificate failed re-verification on `{model}`")]
    CertificateRejected { model: String },
}

/// Result of the exhaustive code search.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OracleReport {
    /// A_q^Lin(n, d) = q^k0.
    pub a_value: BigUint,
    pub k0: usize,
    /// First code (canonical order) of dimension k0 with min weight >= d.
    pub witness: SubspaceId,
}

/// Exhaustive scan for the largest-dimension subspace with minimum weight
/// at least d. The zero space always qualifies, so k0 >= 0.
pub fn brute_force_a(inst: &Instance, lat: &Lattice) -> OracleReport {
    for dim in (0..=lat.n()).rev() {
        if let Some(witness) = lat
            .ids_of_dim(dim)
            .find(|&s| !lat.violates_distance(s, inst.d()))
        {
            return OracleReport {
                a_value: BigUint::from(inst.q()).pow(dim as u32),
                k0: dim,
                witness,
            };
        }
    }
    unreachable!("the zero space has infinite minimum weight");
}

/// The point mass sitting entirely on one code.
pub fn true_solution(code: SubspaceId, lat: &Lattice) -> PseudoDistribution {
    let mut p = PseudoDistribution::zero(lat);
    p.set(code, Rational::one());
    p
}

/// A point is integral exactly when it is a genuine probability
/// distribution: nonnegative everywhere and of total mass one. Such a point
/// is literally a convex combination of true solutions.
pub fn integrality_test(p: &PseudoDistribution) -> bool {
    p.all_nonnegative() && p.total_mass() == Rational::one()
}

/// The explicit non-integral feasible point, available whenever k0 >= 2.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NonIntegralPoint {
    pub distribution: PseudoDistribution,
    /// The witness code T carrying the bulk of the mass.
    pub code: SubspaceId,
    /// The line T' inside T carrying the negative mass.
    pub line: SubspaceId,
    pub epsilon: Rational,
}

/// Distribute mass 1 - (eps - eps/q^l) on the witness code T, -eps/q^l on
/// its first one-dimensional subspace T', and eps on the zero space. The
/// point sums to one, satisfies every distance row (T has distance >= d),
/// and the Fourier row at T' holds with equality, so the point is feasible
/// for the Krawtchouk subspace program yet fails the integrality test.
pub fn nonintegral_point(
    lat: &Lattice,
    d: usize,
    level: u32,
    epsilon: &Rational,
) -> Result<NonIntegralPoint, OracleError> {
    if !epsilon.is_positive() || *epsilon >= Rational::one() {
        return Err(OracleError::BadEpsilon);
    }
    let inst = Instance::new(lat.spec().clone(), lat.n(), d, level)?;
    let report = brute_force_a(&inst, lat);
    if report.k0 < 2 {
        return Err(OracleError::NeedsLargerCode { k0: report.k0 });
    }
    let code = report.witness;
    let line = lat
        .ids_of_dim(1)
        .find(|&s| lat.leq(s, code))
        .expect("a code of dimension >= 2 contains a line");

    let line_size_pow = Rational::from(BigInt::from(lat.spec().q()).pow(level));
    let neg = -(epsilon / &line_size_pow);
    let mut p = PseudoDistribution::zero(lat);
    p.set(code, Rational::one() - epsilon + (epsilon / &line_size_pow));
    p.set(line, neg);
    p.set(lat.zero_space(), epsilon.clone());
    Ok(NonIntegralPoint { distribution: p, code, line, epsilon: epsilon.clone() })
}

/// Unscaled Fourier row value at U for a given level:
/// sum over S <= U of |S|^level P[S].
pub fn fourier_row_value(
    p: &PseudoDistribution,
    lat: &Lattice,
    u: SubspaceId,
    level: u32,
) -> Rational {
    let q = BigInt::from(lat.spec().q());
    lat.below(u)
        .iter()
        .map(|s| Rational::from(q.pow(lat.dim(*s) as u32 * level)) * p.get(*s))
        .sum()
}

/// Upward-sum (nonnegativity) row value at U: sum over S >= U of P[S].
pub fn nonneg_row_value(p: &PseudoDistribution, lat: &Lattice, u: SubspaceId) -> Rational {
    lat.above(u).iter().map(|s| p.get(*s).clone()).sum()
}

/// Find the smallest level `l >= start_level` at which the Fourier row of
/// the highest-dimensional negative entry turns negative. The coefficient
/// of that entry dominates the row as the level grows, so the search always
/// terminates for genuine inputs; `cap` guards against misuse.
pub fn infeasibility_level(
    p: &PseudoDistribution,
    lat: &Lattice,
    start_level: u32,
    cap: u32,
) -> Result<(u32, SubspaceId), OracleError> {
    let witness = p
        .support()
        .into_iter()
        .filter(|s| p.get(*s).is_negative())
        .max_by_key(|s| (lat.dim(*s), std::cmp::Reverse(s.0)))
        .ok_or(OracleError::NoNegativeEntry)?;
    for level in start_level.max(1)..=cap {
        if fourier_row_value(p, lat, witness, level).is_negative() {
            return Ok((level, witness));
        }
    }
    Err(OracleError::LevelCapReached { cap })
}

/// One cover-averaging step of the mass transfer argument.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MassTransferStep {
    pub distribution: PseudoDistribution,
    /// The minimum-dimension support element whose mass was moved.
    pub source: SubspaceId,
    /// Exact objective gain: |source|^level (q^level - 1) P[source].
    pub objective_increase: Rational,
}

/// Move the mass of the minimum-dimension support element onto its covers,
/// split equally. For a point feasible for the dimension-constrained
/// program this preserves feasibility and strictly increases the
/// sum |S|^level P[S] objective; errors out once all mass sits at
/// dimension k0 or above.
pub fn mass_transfer_step(
    p: &PseudoDistribution,
    lat: &Lattice,
    k0: usize,
    level: u32,
) -> Result<MassTransferStep, OracleError> {
    // Canonical order sorts by dimension, so the first support id is a
    // minimum-dimension element with ties already broken canonically.
    let source = *p.support().first().ok_or(OracleError::NoTransferStep { k0 })?;
    if lat.dim(source) >= k0 {
        return Err(OracleError::NoTransferStep { k0 });
    }
    let mass = p.get(source).clone();
    if !mass.is_positive() {
        return Err(OracleError::NonpositiveSource);
    }
    let covers = lat.covers(source);
    if covers.is_empty() {
        // Only reachable when k0 exceeds n and the mass sits on the full
        // space; there is nowhere higher to move it.
        return Err(OracleError::NoTransferStep { k0 });
    }
    let share = &mass / Rational::from(BigInt::from(covers.len() as u64));
    let mut next = p.clone();
    next.set(source, Rational::zero());
    for &c in covers {
        let bumped = next.get(c) + &share;
        next.set(c, bumped);
    }
    let q_pow = BigInt::from(lat.spec().q()).pow(level);
    let increase = Rational::from(
        BigInt::from(lat.spec().q()).pow(lat.dim(source) as u32 * level) * (q_pow - BigInt::one()),
    ) * &mass;
    Ok(MassTransferStep { distribution: next, source, objective_increase: increase })
}

/// One exact comparison made by a verification run.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VerificationReport {
    pub claim: String,
    pub lp_value: Rational,
    pub expected: Rational,
    pub equal: bool,
    pub artifacts: BTreeMap<String, String>,
}

impl VerificationReport {
    fn compare(claim: &str, lp_value: Rational, expected: Rational) -> Self {
        let equal = lp_value == expected;
        VerificationReport {
            claim: claim.to_string(),
            lp_value,
            expected,
            equal,
            artifacts: BTreeMap::new(),
        }
    }

    fn boolean(claim: &str, holds: bool) -> Self {
        Self::compare(
            claim,
            if holds { Rational::one() } else { Rational::zero() },
            Rational::one(),
        )
    }

    /// Key: value lines, one per field, artifacts flattened.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("claim: {}\n", self.claim));
        out.push_str(&format!("lp_value: {}\n", fmt_rational(&self.lp_value)));
        out.push_str(&format!("expected: {}\n", fmt_rational(&self.expected)));
        out.push_str(&format!("equal: {}\n", self.equal));
        for (k, v) in &self.artifacts {
            out.push_str(&format!("{k}: {v}\n"));
        }
        out
    }
}

fn solve_or_anomaly(
    lp: &crate::lp::LinearProgram,
    model: &str,
) -> Result<LpSolution, OracleError> {
    let sol = solve(lp);
    if sol.status != Status::Optimal {
        return Err(OracleError::SolverAnomaly { model: model.to_string(), status: sol.status });
    }
    if !verify_optimality(lp, &sol) {
        return Err(OracleError::CertificateRejected { model: model.to_string() });
    }
    Ok(sol)
}

/// Solve both subspace programs and compare with the brute-force oracle:
/// the Krawtchouk optimum must equal A^level and the partial optimum must
/// equal A, both as exact rationals. The optimal vertices are additionally
/// run through the integrality test, and a flag records whether the solver
/// saw signs of alternative optima.
pub fn verify_completeness(
    inst: &Instance,
    lat: &Lattice,
) -> Result<Vec<VerificationReport>, OracleError> {
    let report = brute_force_a(inst, lat);
    let a = Rational::from(BigInt::from(report.a_value.clone()));
    let a_pow = Rational::from(BigInt::from(report.a_value.clone()).pow(inst.level()));

    let kraw = build_kraw_pseudo(inst, lat)?;
    let kraw_sol = solve_or_anomaly(&kraw, "kraw-pseudo")?;
    let partial = build_partial_pseudo(inst, lat)?;
    let partial_sol = solve_or_anomaly(&partial, "partial-pseudo")?;

    let kraw_vertex = PseudoDistribution::new(kraw_sol.primal().to_vec());
    let partial_vertex = PseudoDistribution::new(partial_sol.primal().to_vec());

    // Nonzero entries of an optimal vertex, as `P_<id>=p/q` pairs.
    let support_of = |p: &PseudoDistribution| {
        p.support()
            .iter()
            .map(|s| format!("P_{}={}", s.0, fmt_rational(p.get(*s))))
            .collect::<Vec<_>>()
            .join(" ")
    };

    let mut out = Vec::new();
    let mut with_common = |mut r: VerificationReport, alternate: bool, support: String| {
        r.artifacts.insert("A".into(), report.a_value.to_string());
        r.artifacts.insert("k0".into(), report.k0.to_string());
        r.artifacts.insert(
            "witness".into(),
            lat.subspace(report.witness).row_strings().join(","),
        );
        r.artifacts
            .insert("alternate_optima_possible".into(), alternate.to_string());
        r.artifacts.insert("solution_support".into(), support);
        out.push(r);
    };
    with_common(
        VerificationReport::compare("kraw-completeness", kraw_sol.objective_value.clone(), a_pow),
        kraw_sol.alternate_optima_possible,
        support_of(&kraw_vertex),
    );
    with_common(
        VerificationReport::compare("partial-completeness", partial_sol.objective_value.clone(), a),
        partial_sol.alternate_optima_possible,
        support_of(&partial_vertex),
    );
    out.push(VerificationReport::boolean(
        "kraw-vertex-integrality",
        integrality_test(&kraw_vertex),
    ));
    out.push(VerificationReport::boolean(
        "partial-vertex-integrality",
        integrality_test(&partial_vertex),
    ));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::FieldSpec;
    use crate::hierarchy::{build_kraw_pseudo_weak, kraw_objective};

    fn f2() -> FieldSpec {
        FieldSpec::new(2).unwrap()
    }

    fn rat(n: i64, d: i64) -> Rational {
        Rational::new(BigInt::from(n), BigInt::from(d))
    }

    fn setup(n: usize, d: usize, level: u32) -> (Instance, Lattice) {
        let spec = f2();
        let lat = Lattice::enumerate(&spec, n).unwrap();
        (Instance::new(spec, n, d, level).unwrap(), lat)
    }

    #[test]
    fn oracle_finds_even_weight_code() {
        let (inst, lat) = setup(3, 2, 3);
        let report = brute_force_a(&inst, &lat);
        assert_eq!(report.a_value, BigUint::from(4u32));
        assert_eq!(report.k0, 2);
        let spec = f2();
        let even = lat.canonicalize(&[
            spec.vector(&[1, 1, 0]).unwrap(),
            spec.vector(&[0, 1, 1]).unwrap(),
        ]);
        assert_eq!(report.witness, even);
        // Exhaustiveness: no 3-dimensional space works.
        assert!(lat.ids_of_dim(3).all(|s| lat.violates_distance(s, 2)));
    }

    #[test]
    fn oracle_trivial_and_sparse_cases() {
        let (inst, lat) = setup(4, 1, 4);
        let report = brute_force_a(&inst, &lat);
        assert_eq!(report.k0, 4);
        assert_eq!(report.a_value, BigUint::from(16u32));
        assert_eq!(report.witness, lat.full_space());

        let (inst, lat) = setup(4, 3, 4);
        let report = brute_force_a(&inst, &lat);
        assert_eq!(report.a_value, BigUint::from(2u32));
        assert_eq!(report.k0, 1);
    }

    #[test]
    fn integrality_test_examples() {
        let (_, lat) = setup(3, 2, 3);
        let spec = f2();
        let c1 = lat.canonicalize(&[spec.vector(&[1, 1, 0]).unwrap()]);
        let c2 = lat.canonicalize(&[spec.vector(&[0, 1, 1]).unwrap()]);
        assert!(integrality_test(&true_solution(c1, &lat)));

        let mut mix = PseudoDistribution::zero(&lat);
        mix.set(c1, rat(1, 2));
        mix.set(c2, rat(1, 2));
        assert!(integrality_test(&mix));

        let point = nonintegral_point(&lat, 2, 3, &rat(1, 2)).unwrap();
        assert!(!integrality_test(&point.distribution));
    }

    #[test]
    fn nonintegral_point_2323_matches_known_values() {
        let (inst, lat) = setup(3, 2, 3);
        let point = nonintegral_point(&lat, 2, 3, &rat(1, 2)).unwrap();
        let p = &point.distribution;
        assert_eq!(p.get(point.code), &rat(9, 16));
        assert_eq!(p.get(point.line), &rat(-1, 16));
        assert_eq!(p.get(lat.zero_space()), &rat(1, 2));
        assert_eq!(p.total_mass(), Rational::one());

        let lp = build_kraw_pseudo(&inst, &lat).unwrap();
        assert!(lp.check_feasible_dense(p.values()).is_empty());

        // The Fourier row at the line vanishes: 8 * (-1/16) + 1/2 = 0.
        assert_eq!(fourier_row_value(p, &lat, point.line, 3), Rational::zero());
        // The nonnegativity row at the line evaluates to 1 - eps.
        assert_eq!(nonneg_row_value(p, &lat, point.line), rat(1, 2));

        // Feasibility holds for any epsilon in (0, 1).
        for eps in [rat(1, 7), rat(3, 4), rat(99, 100)] {
            let pt = nonintegral_point(&lat, 2, 3, &eps).unwrap();
            assert!(lp.check_feasible_dense(pt.distribution.values()).is_empty());
            assert_eq!(
                nonneg_row_value(&pt.distribution, &lat, pt.line),
                Rational::one() - &eps
            );
        }
    }

    #[test]
    fn nonintegral_point_requires_k0_at_least_two() {
        let spec = f2();
        let lat = Lattice::enumerate(&spec, 4).unwrap();
        // (2, 4, 3) has k0 = 1.
        assert!(matches!(
            nonintegral_point(&lat, 3, 4, &rat(1, 2)),
            Err(OracleError::NeedsLargerCode { k0: 1 })
        ));
        assert!(matches!(
            nonintegral_point(&lat, 2, 4, &rat(3, 2)),
            Err(OracleError::BadEpsilon)
        ));
    }

    #[test]
    fn infeasibility_level_on_known_points() {
        let (_, lat) = setup(3, 2, 3);
        let point = nonintegral_point(&lat, 2, 3, &rat(1, 2)).unwrap();
        let (level, witness) = infeasibility_level(&point.distribution, &lat, 3, 64).unwrap();
        assert_eq!(level, 4);
        assert_eq!(witness, point.line);
        assert!(fourier_row_value(&point.distribution, &lat, witness, 3) >= Rational::zero());
        assert!(fourier_row_value(&point.distribution, &lat, witness, 4) < Rational::zero());

        // Halving epsilon rescales the whole row, so the threshold level is
        // unchanged.
        let half = nonintegral_point(&lat, 2, 3, &rat(1, 4)).unwrap();
        let (level, witness) = infeasibility_level(&half.distribution, &lat, 3, 64).unwrap();
        assert_eq!(level, 4);
        assert_eq!(witness, half.line);

        // A lone negative mass at the zero space is negative immediately.
        let mut p = PseudoDistribution::zero(&lat);
        p.set(lat.zero_space(), rat(-1, 1));
        let (level, witness) = infeasibility_level(&p, &lat, 3, 64).unwrap();
        assert_eq!(level, 3);
        assert_eq!(witness, lat.zero_space());

        assert!(matches!(
            infeasibility_level(&true_solution(lat.zero_space(), &lat), &lat, 1, 64),
            Err(OracleError::NoNegativeEntry)
        ));
        assert!(matches!(
            infeasibility_level(&point.distribution, &lat, 3, 3),
            Err(OracleError::LevelCapReached { cap: 3 })
        ));
    }

    #[test]
    fn mass_transfer_from_zero_space() {
        let (inst, lat) = setup(3, 2, 3);
        let fig5 = build_kraw_pseudo_weak(&inst, &lat, 2).unwrap();
        let mut p = true_solution(lat.zero_space(), &lat);
        assert!(fig5.check_feasible_dense(p.values()).is_empty());

        let step = mass_transfer_step(&p, &lat, 2, 3).unwrap();
        assert_eq!(step.source, lat.zero_space());
        assert_eq!(step.objective_increase, rat(7, 1));
        for line in lat.ids_of_dim(1) {
            assert_eq!(step.distribution.get(line), &rat(1, 7));
        }
        assert_eq!(
            kraw_objective(&step.distribution, &lat, 3) - kraw_objective(&p, &lat, 3),
            rat(7, 1)
        );
        assert!(fig5.check_feasible_dense(step.distribution.values()).is_empty());

        // Iterate to exhaustion: strict increases, feasibility throughout,
        // and a clean no-op signal at the end.
        p = step.distribution;
        let mut guard = lat.len() + 1;
        loop {
            match mass_transfer_step(&p, &lat, 2, 3) {
                Ok(step) => {
                    assert!(step.objective_increase.is_positive());
                    assert_eq!(
                        kraw_objective(&step.distribution, &lat, 3) - kraw_objective(&p, &lat, 3),
                        step.objective_increase
                    );
                    assert!(fig5.check_feasible_dense(step.distribution.values()).is_empty());
                    p = step.distribution;
                }
                Err(OracleError::NoTransferStep { k0: 2 }) => break,
                Err(other) => panic!("unexpected error {other:?}"),
            }
            guard -= 1;
            assert!(guard > 0, "transfer failed to terminate");
        }
        assert!(p.support().iter().all(|s| lat.dim(*s) == 2));

        // A point already at dimension k0 cannot be transferred.
        let report = brute_force_a(&inst, &lat);
        assert!(matches!(
            mass_transfer_step(&true_solution(report.witness, &lat), &lat, 2, 3),
            Err(OracleError::NoTransferStep { k0: 2 })
        ));
    }

    #[test]
    fn verify_completeness_2323() {
        let (inst, lat) = setup(3, 2, 3);
        let reports = verify_completeness(&inst, &lat).unwrap();
        assert_eq!(reports.len(), 4);
        assert!(reports.iter().all(|r| r.equal), "{reports:?}");
        assert_eq!(reports[0].lp_value, rat(64, 1));
        assert_eq!(reports[1].lp_value, rat(4, 1));
        assert!(reports[0].to_text().contains("equal: true"));
    }

    #[test]
    fn nonintegral_and_escalation_over_f3() {
        // The construction is field-generic; exercise it away from q = 2.
        let spec = FieldSpec::new(3).unwrap();
        let lat = Lattice::enumerate(&spec, 3).unwrap();
        let inst = Instance::new(spec, 3, 2, 3).unwrap();
        let report = brute_force_a(&inst, &lat);
        assert_eq!(report.k0, 2); // the zero-sum code has minimum weight 2

        let point = nonintegral_point(&lat, 2, 3, &rat(1, 2)).unwrap();
        assert_eq!(point.distribution.get(point.line), &rat(-1, 54)); // -eps / 3^3
        assert_eq!(point.distribution.total_mass(), Rational::one());
        let lp = build_kraw_pseudo(&inst, &lat).unwrap();
        assert!(lp.check_feasible_dense(point.distribution.values()).is_empty());
        assert!(!integrality_test(&point.distribution));

        // 3^l * (1/54) > 1/2 first at l = 4.
        let (level, witness) = infeasibility_level(&point.distribution, &lat, 3, 64).unwrap();
        assert_eq!((level, witness), (4, point.line));

        // Mass transfer stays feasible over F_3 as well.
        let fig5 = build_kraw_pseudo_weak(&inst, &lat, report.k0).unwrap();
        let step = mass_transfer_step(&true_solution(lat.zero_space(), &lat), &lat, 2, 3).unwrap();
        assert!(fig5.check_feasible_dense(step.distribution.values()).is_empty());
        assert_eq!(step.objective_increase, rat(26, 1)); // q^l - 1 = 26
    }

    #[test]
    fn verify_completeness_3222() {
        let spec = FieldSpec::new(3).unwrap();
        let lat = Lattice::enumerate(&spec, 2).unwrap();
        let inst = Instance::new(spec, 2, 2, 2).unwrap();
        let reports = verify_completeness(&inst, &lat).unwrap();
        assert!(reports.iter().all(|r| r.equal), "{reports:?}");
        assert_eq!(reports[1].lp_value, rat(3, 1)); // A_3^Lin(2, 2) = 3
        assert_eq!(reports[0].lp_value, rat(9, 1)); // A^2
    }

    #[test]
    fn true_solution_examples() {
        let (inst, lat) = setup(3, 2, 3);
        let p0 = true_solution(lat.zero_space(), &lat);
        assert_eq!(kraw_objective(&p0, &lat, inst.level()), Rational::one());

        let lp = build_kraw_pseudo(&inst, &lat).unwrap();
        let full = true_solution(lat.full_space(), &lat);
        assert_eq!(
            lp.check_feasible_dense(full.values()),
            vec![format!("dist_{}", lat.full_space().0)]
        );
    }
}
