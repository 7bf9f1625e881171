//! Named verification suites.
//!
//! Each suite runs a fixed list of exact checks against one instance and
//! reports them as labeled pass/fail lines carrying both sides of every
//! comparison. The CLI `verify` command and the acceptance tests drive the
//! same code, so a green suite here is exactly a green acceptance line.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use thiserror::Error;

use crate::field::{FieldSpec, FqVector};
use crate::hierarchy::{
    build_kraw_pseudo, build_kraw_pseudo_weak, build_partial_pseudo, kraw_objective,
    HierarchyError, Instance, TupleSpace,
};
use crate::lattice::{Lattice, LatticeError};
use crate::lp::{fmt_rational, solve, verify_optimality, LpError, Relation, Sense, Status};
use crate::oracle::{
    brute_force_a, fourier_row_value, infeasibility_level, integrality_test, mass_transfer_step,
    nonintegral_point, nonneg_row_value, true_solution, verify_completeness, OracleError,
};
use crate::{Caps, Rational};

/// A suite could not run at all (as opposed to running and failing).
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SuiteError {
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error(transparent)]
    Hierarchy(#[from] HierarchyError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error("charsum checks need q = 2 and n <= 3 (got q = {q}, n = {n})")]
    CharsumRange { q: u32, n: usize },
}

/// One exact assertion with both sides recorded.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CheckLine {
    pub label: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SuiteOutcome {
    pub name: String,
    pub checks: Vec<CheckLine>,
}

impl SuiteOutcome {
    fn new(name: &str) -> Self {
        SuiteOutcome { name: name.to_string(), checks: Vec::new() }
    }

    fn push(&mut self, label: &str, pass: bool, detail: String) {
        self.checks.push(CheckLine { label: label.to_string(), pass, detail });
    }

    fn push_eq(&mut self, label: &str, lhs: &Rational, rhs: &Rational) {
        self.push(
            label,
            lhs == rhs,
            format!("lhs = {} rhs = {}", fmt_rational(lhs), fmt_rational(rhs)),
        );
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

/// Completeness of both subspace programs against the brute-force oracle,
/// plus integrality of the returned optimal vertices.
pub fn completeness_suite(inst: &Instance, lat: &Lattice) -> Result<SuiteOutcome, SuiteError> {
    let mut out = SuiteOutcome::new("completeness");
    for report in verify_completeness(inst, lat)? {
        let mut detail = format!(
            "lp_value = {} expected = {}",
            fmt_rational(&report.lp_value),
            fmt_rational(&report.expected)
        );
        for (k, v) in &report.artifacts {
            detail.push_str(&format!(" {k} = {v}"));
        }
        out.push(&report.claim, report.equal, detail);
    }
    Ok(out)
}

/// The explicit non-integral feasible point: feasibility with zero violated
/// rows, the expected negative mass, the vanishing Fourier row, the 1 - eps
/// nonnegativity row, and failure of the integrality test.
pub fn nonintegral_suite(
    inst: &Instance,
    lat: &Lattice,
    epsilon: &Rational,
) -> Result<SuiteOutcome, SuiteError> {
    let mut out = SuiteOutcome::new("nonintegral");
    let point = nonintegral_point(lat, inst.d(), inst.level(), epsilon)?;
    let p = &point.distribution;

    let lp = build_kraw_pseudo(inst, lat)?;
    let violated = lp.check_feasible_dense(p.values());
    out.push(
        "feasible",
        violated.is_empty(),
        format!("violated rows = [{}]", violated.join(", ")),
    );
    let expected_neg =
        -(epsilon / Rational::from(BigInt::from(inst.q()).pow(inst.level())));
    out.push_eq("negative-mass", p.get(point.line), &expected_neg);
    out.push(
        "negative-mass-sign",
        p.get(point.line).is_negative(),
        format!("P[T'] = {}", fmt_rational(p.get(point.line))),
    );
    out.push_eq("total-mass", &p.total_mass(), &Rational::one());
    out.push_eq(
        "fourier-row-at-line",
        &fourier_row_value(p, lat, point.line, inst.level()),
        &Rational::zero(),
    );
    out.push_eq(
        "nonneg-row-at-line",
        &nonneg_row_value(p, lat, point.line),
        &(Rational::one() - epsilon),
    );
    out.push(
        "fails-integrality",
        !integrality_test(p),
        format!("integrality_test = {}", integrality_test(p)),
    );
    Ok(out)
}

/// Level escalation: the non-integral point stays feasible at its own level
/// but the Fourier row at the negative line flips sign at the reported
/// higher level.
pub fn escalation_suite(
    inst: &Instance,
    lat: &Lattice,
    epsilon: &Rational,
    cap: u32,
) -> Result<SuiteOutcome, SuiteError> {
    let mut out = SuiteOutcome::new("escalation");
    let point = nonintegral_point(lat, inst.d(), inst.level(), epsilon)?;
    let (level, witness) = infeasibility_level(&point.distribution, lat, inst.level(), cap)?;
    out.push(
        "witness-is-line",
        witness == point.line,
        format!("witness = {} line = {}", witness, point.line),
    );
    out.push(
        "escalation-level",
        level >= inst.level(),
        format!("level = {level}"),
    );
    let at = fourier_row_value(&point.distribution, lat, witness, level);
    out.push(
        "row-negative-at-level",
        at.is_negative(),
        format!("row({level}) = {}", fmt_rational(&at)),
    );
    if level > 1 {
        let before = fourier_row_value(&point.distribution, lat, witness, level - 1);
        out.push(
            "row-nonnegative-below",
            !before.is_negative(),
            format!("row({}) = {}", level - 1, fmt_rational(&before)),
        );
    }
    Ok(out)
}

/// Mass transfer from the zero-space point mass: every step's objective gain
/// matches the closed form, stays feasible for the dimension-constrained
/// program, and is strictly positive until all mass reaches dimension k0.
pub fn masstransfer_suite(inst: &Instance, lat: &Lattice) -> Result<SuiteOutcome, SuiteError> {
    let mut out = SuiteOutcome::new("masstransfer");
    let report = brute_force_a(inst, lat);
    let fig5 = build_kraw_pseudo_weak(inst, lat, report.k0)?;

    let mut p = true_solution(lat.zero_space(), lat);
    out.push(
        "start-feasible",
        fig5.check_feasible_dense(p.values()).is_empty(),
        "delta at the zero space".to_string(),
    );

    let mut steps = 0usize;
    let mut first_increase: Option<Rational> = None;
    let mut all_match = true;
    let mut all_feasible = true;
    let mut all_positive = true;
    loop {
        match mass_transfer_step(&p, lat, report.k0, inst.level()) {
            Ok(step) => {
                let actual = kraw_objective(&step.distribution, lat, inst.level())
                    - kraw_objective(&p, lat, inst.level());
                all_match &= actual == step.objective_increase;
                all_positive &= step.objective_increase.is_positive();
                all_feasible &= fig5.check_feasible_dense(step.distribution.values()).is_empty();
                if first_increase.is_none() {
                    first_increase = Some(step.objective_increase.clone());
                }
                p = step.distribution;
                steps += 1;
                assert!(steps <= lat.len(), "transfer failed to terminate");
            }
            Err(OracleError::NoTransferStep { .. }) => break,
            Err(other) => return Err(other.into()),
        }
    }
    let first = first_increase.unwrap_or_else(Rational::zero);
    out.push(
        "first-step-increase",
        steps > 0,
        format!("steps = {steps} first increase = {}", fmt_rational(&first)),
    );
    out.push("increase-formula", all_match, format!("checked over {steps} steps"));
    out.push("steps-feasible", all_feasible, format!("checked over {steps} steps"));
    out.push("strict-increase", all_positive, format!("checked over {steps} steps"));
    out.push(
        "final-support-at-k0",
        p.support().iter().all(|s| lat.dim(*s) >= report.k0),
        format!("k0 = {}", report.k0),
    );
    Ok(out)
}

/// Zeta/Möbius inversion on random rational vectors plus the two exhaustive
/// Möbius sum identities.
pub fn mobius_suite(
    spec: &FieldSpec,
    n: usize,
    seed: u64,
    samples: usize,
) -> Result<SuiteOutcome, SuiteError> {
    let mut out = SuiteOutcome::new("mobius");
    let lat = Lattice::enumerate(spec, n)?;
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut roundtrips = true;
    for _ in 0..samples {
        let v: Vec<Rational> = (0..lat.len())
            .map(|_| {
                Rational::new(
                    BigInt::from(rng.gen_range(-20i64..=20)),
                    BigInt::from(rng.gen_range(1i64..=20)),
                )
            })
            .collect();
        roundtrips &= lat.mobius_transform(&lat.zeta_transform(&v)) == v;
        roundtrips &= lat.zeta_transform(&lat.mobius_transform(&v)) == v;
    }
    out.push(
        "zeta-mobius-roundtrip",
        roundtrips,
        format!("{samples} random vectors over {} subspaces", lat.len()),
    );

    let mut rows = true;
    let mut cols = true;
    for s in lat.ids() {
        for &t in lat.above(s) {
            let mut up = BigInt::zero();
            let mut down = BigInt::zero();
            for &u in lat.above(s) {
                if lat.leq(u, t) {
                    up += lat.mobius(s, u);
                    down += lat.mobius(u, t);
                }
            }
            let expect = if s == t { BigInt::one() } else { BigInt::zero() };
            rows &= up == expect;
            cols &= down == expect;
        }
    }
    out.push("mobius-sum-left", rows, "sum of mu(S, U) over intervals".to_string());
    out.push("mobius-sum-right", cols, "sum of mu(U, T) over intervals".to_string());
    Ok(out)
}

/// Brute-force mixed character/indicator sum over S^level: positions with
/// `chi[i]` set contribute the sign character at alpha_i, the rest pin the
/// coordinate to alpha_i.
fn brute_force_theta_sum(
    spec: &FieldSpec,
    alpha: &[FqVector],
    chi: &[bool],
    members: &[FqVector],
) -> BigInt {
    let level = chi.len();
    let mut idxs = vec![0usize; level];
    let mut total = BigInt::zero();
    loop {
        let mut term = BigInt::one();
        for i in 0..level {
            let x_i = &members[idxs[i]];
            if chi[i] {
                let sign = spec
                    .char_value(std::slice::from_ref(&alpha[i]), std::slice::from_ref(x_i))
                    .expect("q = 2");
                term *= BigInt::from(sign);
            } else if *x_i != alpha[i] {
                term = BigInt::zero();
                break;
            }
        }
        total += term;
        let mut pos = 0;
        while pos < level {
            idxs[pos] += 1;
            if idxs[pos] < members.len() {
                break;
            }
            idxs[pos] = 0;
            pos += 1;
        }
        if pos == level {
            return total;
        }
    }
}

/// Closed-form character sums against brute force, full and mixed variants,
/// for every alpha, subspace and position subset at levels 1 and 2.
pub fn charsum_suite(spec: &FieldSpec, n: usize) -> Result<SuiteOutcome, SuiteError> {
    if spec.q() != 2 || n > 3 {
        return Err(SuiteError::CharsumRange { q: spec.q(), n });
    }
    let mut out = SuiteOutcome::new("charsum");
    let lat = Lattice::enumerate(spec, n)?;
    for level in 1..=2u32 {
        let space = TupleSpace::new(spec.clone(), n, level);
        let count = space.count() as usize;
        let tuples: Vec<Vec<FqVector>> = (0..count).map(|i| space.tuple(i as u128)).collect();
        let mut full_ok = true;
        let mut partial_ok = true;
        let mut cases = 0usize;
        for alpha in &tuples {
            for s in lat.ids() {
                let members = lat.vectors(s);
                for mask in 0..(1u32 << level) {
                    let chi: Vec<bool> = (0..level).map(|i| mask & (1 << i) != 0).collect();
                    let brute = brute_force_theta_sum(spec, alpha, &chi, &members);
                    if mask == (1u32 << level) - 1 {
                        full_ok &= lat.char_sum_full(alpha, s) == brute;
                    }
                    partial_ok &= lat.char_sum_partial(alpha, &chi, s) == brute;
                    cases += 1;
                }
            }
        }
        out.push(
            &format!("full-charsum-l{level}"),
            full_ok,
            format!("{cases} (alpha, S, mask) cases"),
        );
        out.push(
            &format!("partial-charsum-l{level}"),
            partial_ok,
            format!("{cases} (alpha, S, mask) cases"),
        );
    }
    Ok(out)
}

/// Integrality structure of the partial program: every variable appears in
/// a singleton nonnegativity row, and minimizing each variable over the
/// polytope stays at or above zero.
pub fn partial_integrality_suite(
    inst: &Instance,
    lat: &Lattice,
) -> Result<SuiteOutcome, SuiteError> {
    let mut out = SuiteOutcome::new("partial-integrality");
    let lp = build_partial_pseudo(inst, lat)?;

    let mut all_singleton = true;
    for s in lat.ids() {
        let found = lp.constraints().iter().any(|c| {
            c.relation() == Relation::Ge
                && c.rhs().is_zero()
                && c.coeffs().len() == 1
                && c.coeffs()[0].0 == s.0
                && c.coeffs()[0].1.is_positive()
        });
        all_singleton &= found;
    }
    out.push(
        "singleton-rows",
        all_singleton,
        format!("{} variables scanned", lat.len()),
    );

    let mut all_nonneg = true;
    let mut worst: Option<Rational> = None;
    for s in lat.ids() {
        let min_lp = lp.with_objective(Sense::Minimize, vec![(s.0, Rational::one())])?;
        let sol = solve(&min_lp);
        if sol.status != Status::Optimal || !verify_optimality(&min_lp, &sol) {
            return Err(SuiteError::Oracle(OracleError::SolverAnomaly {
                model: format!("min P_{}", s.0),
                status: sol.status,
            }));
        }
        all_nonneg &= !sol.objective_value.is_negative();
        worst = Some(match worst {
            None => sol.objective_value.clone(),
            Some(w) => w.min(sol.objective_value.clone()),
        });
    }
    out.push(
        "min-each-variable",
        all_nonneg,
        format!(
            "minimum over variables = {}",
            worst.map(|w| fmt_rational(&w)).unwrap_or_default()
        ),
    );
    Ok(out)
}

/// Cross-check of the unsymmetrized and subspace programs at one instance:
/// equal optima pairwise, Krawtchouk against partial.
pub fn unsym_crosscheck_suite(
    inst: &Instance,
    lat: &Lattice,
    caps: &Caps,
) -> Result<SuiteOutcome, SuiteError> {
    let mut out = SuiteOutcome::new("unsym-crosscheck");
    let solve_checked = |lp: &crate::lp::LinearProgram, name: &str| {
        let sol = solve(lp);
        if sol.status != Status::Optimal || !verify_optimality(lp, &sol) {
            Err(SuiteError::Oracle(OracleError::SolverAnomaly {
                model: name.to_string(),
                status: sol.status,
            }))
        } else {
            Ok(sol.objective_value)
        }
    };
    let kraw_unsym = solve_checked(&crate::hierarchy::build_unsym_kraw(inst, caps)?, "kraw-unsym")?;
    let kraw_pseudo = solve_checked(&build_kraw_pseudo(inst, lat)?, "kraw-pseudo")?;
    out.push_eq("kraw-unsym-vs-pseudo", &kraw_unsym, &kraw_pseudo);

    let partial_unsym =
        solve_checked(&crate::hierarchy::build_unsym_partial(inst, caps)?, "partial-unsym")?;
    let partial_pseudo = solve_checked(&build_partial_pseudo(inst, lat)?, "partial-pseudo")?;
    out.push_eq("partial-unsym-vs-pseudo", &partial_unsym, &partial_pseudo);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f2() -> FieldSpec {
        FieldSpec::new(2).unwrap()
    }

    fn rat(n: i64, d: i64) -> Rational {
        Rational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn all_suites_pass_on_232() {
        let spec = f2();
        let lat = Lattice::enumerate(&spec, 3).unwrap();
        let inst = Instance::new(spec.clone(), 3, 2, 3).unwrap();

        let c = completeness_suite(&inst, &lat).unwrap();
        assert!(c.passed(), "{c:?}");
        let ni = nonintegral_suite(&inst, &lat, &rat(1, 2)).unwrap();
        assert!(ni.passed(), "{ni:?}");
        let esc = escalation_suite(&inst, &lat, &rat(1, 2), 64).unwrap();
        assert!(esc.passed(), "{esc:?}");
        let mt = masstransfer_suite(&inst, &lat).unwrap();
        assert!(mt.passed(), "{mt:?}");
        let pi = partial_integrality_suite(&inst, &lat).unwrap();
        assert!(pi.passed(), "{pi:?}");
    }

    #[test]
    fn mobius_and_charsum_suites() {
        let spec = f2();
        let m = mobius_suite(&spec, 3, 1, 10).unwrap();
        assert!(m.passed(), "{m:?}");
        let cs = charsum_suite(&spec, 2).unwrap();
        assert!(cs.passed(), "{cs:?}");

        let f3 = FieldSpec::new(3).unwrap();
        assert!(matches!(
            charsum_suite(&f3, 2),
            Err(SuiteError::CharsumRange { q: 3, n: 2 })
        ));
    }

    #[test]
    fn unsym_crosscheck_2222() {
        let spec = f2();
        let lat = Lattice::enumerate(&spec, 2).unwrap();
        let inst = Instance::new(spec, 2, 2, 2).unwrap();
        let s = unsym_crosscheck_suite(&inst, &lat, &Caps::default()).unwrap();
        assert!(s.passed(), "{s:?}");
    }
}
