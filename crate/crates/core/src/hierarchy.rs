//! Builders for the LP hierarchies bounding A_q^Lin(n, d).
//!
//! Two families are built, each in two representations:
//!
//! - subspace ("pseudoprobability") programs with one variable `P_<id>` per
//!   subspace: the level-l Krawtchouk program (objective sum |S|^l P[S]),
//!   its dimension-constrained weakening, the partial program with the mixed
//!   character/indicator rows (objective sum |S| P[S]), and the weakened
//!   full-Fourier variant. These require level >= n, where the row set
//!   stops depending on the level's tuple space.
//! - unsymmetrized programs over F_2 with one variable `a_<idx>` per tuple
//!   in (F_2^n)^l, carrying explicit character rows; these exist at every
//!   level and are the bridge used to cross-check the subspace programs.
//!
//! Fourier-type rows are scaled by |U|^-r so every coefficient lies in
//! [-1, 1]; scaling by a positive constant changes neither feasibility nor
//! optimal values. Solution vectors move between representations through
//! the zeta/Möbius transforms of the subspace lattice.

use num_bigint::BigInt;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::field::{FieldSpec, FqVector};
use crate::lattice::{rref, Lattice, SubspaceId};
use crate::lp::{LinearProgram, Relation, Sense};
use crate::{Caps, Rational};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum HierarchyError {
    #[error("instance requires n >= 1, d >= 1 and level >= 1")]
    BadInstance,
    #[error("subspace programs require level >= n (got level {level}, n {n})")]
    LevelTooLow { level: u32, n: usize },
    #[error("unsymmetrized programs are only available over F_2 (got q = {q})")]
    RequiresBinary { q: u32 },
    #[error("model needs {required} tuples/rows, exceeding the cap of {cap}")]
    TupleCapExceeded { required: u128, cap: u64 },
    #[error("lattice does not match the instance (q or n differ)")]
    LatticeMismatch,
}

/// A problem instance (q, n, d, level).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Instance {
    spec: FieldSpec,
    n: usize,
    d: usize,
    level: u32,
}

impl Instance {
    pub fn new(spec: FieldSpec, n: usize, d: usize, level: u32) -> Result<Self, HierarchyError> {
        if n == 0 || d == 0 || level == 0 {
            return Err(HierarchyError::BadInstance);
        }
        Ok(Instance { spec, n, d, level })
    }

    pub fn spec(&self) -> &FieldSpec {
        &self.spec
    }

    pub fn q(&self) -> u32 {
        self.spec.q()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn with_level(&self, level: u32) -> Result<Self, HierarchyError> {
        Instance::new(self.spec.clone(), self.n, self.d, level)
    }

    fn require_level_at_least_n(&self) -> Result<(), HierarchyError> {
        if (self.level as usize) < self.n {
            Err(HierarchyError::LevelTooLow { level: self.level, n: self.n })
        } else {
            Ok(())
        }
    }

    fn require_binary(&self) -> Result<(), HierarchyError> {
        if self.q() != 2 {
            Err(HierarchyError::RequiresBinary { q: self.q() })
        } else {
            Ok(())
        }
    }

    fn check_lattice(&self, lat: &Lattice) -> Result<(), HierarchyError> {
        if lat.spec() != &self.spec || lat.n() != self.n {
            Err(HierarchyError::LatticeMismatch)
        } else {
            Ok(())
        }
    }
}

/// Values P[S], one per subspace: a signed "point mass" on codes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PseudoDistribution {
    values: Vec<Rational>,
}

impl PseudoDistribution {
    pub fn new(values: Vec<Rational>) -> Self {
        PseudoDistribution { values }
    }

    pub fn zero(lat: &Lattice) -> Self {
        PseudoDistribution { values: vec![Rational::zero(); lat.len()] }
    }

    pub fn values(&self) -> &[Rational] {
        &self.values
    }

    pub fn get(&self, id: SubspaceId) -> &Rational {
        &self.values[id.0]
    }

    pub fn set(&mut self, id: SubspaceId, v: Rational) {
        self.values[id.0] = v;
    }

    pub fn total_mass(&self) -> Rational {
        self.values.iter().cloned().sum()
    }

    pub fn all_nonnegative(&self) -> bool {
        self.values.iter().all(|v| *v >= Rational::zero())
    }

    /// Ids carrying a nonzero value, in canonical order.
    pub fn support(&self) -> Vec<SubspaceId> {
        self.values
            .iter()
            .enumerate()
            .filter(|(_, v)| !v.is_zero())
            .map(|(i, _)| SubspaceId(i))
            .collect()
    }
}

/// Values P[S contained in the code], one per subspace. Normalized
/// solutions carry value 1 at the zero space, since every code contains it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CumulativeSolution {
    values: Vec<Rational>,
}

impl CumulativeSolution {
    pub fn new(values: Vec<Rational>) -> Self {
        CumulativeSolution { values }
    }

    pub fn values(&self) -> &[Rational] {
        &self.values
    }

    pub fn get(&self, id: SubspaceId) -> &Rational {
        &self.values[id.0]
    }
}

/// Cumulative vector induced by a point mass (upward sums).
pub fn pseudo_to_cumulative(p: &PseudoDistribution, lat: &Lattice) -> CumulativeSolution {
    CumulativeSolution::new(lat.zeta_transform(&p.values))
}

/// Point mass recovered from a cumulative vector (Möbius inversion).
pub fn cumulative_to_pseudo(c: &CumulativeSolution, lat: &Lattice) -> PseudoDistribution {
    PseudoDistribution::new(lat.mobius_transform(&c.values))
}

/// q^(dim(S) * exp) as a rational.
fn size_pow(lat: &Lattice, s: SubspaceId, exp: u32) -> Rational {
    Rational::from(BigInt::from(lat.spec().q()).pow(lat.dim(s) as u32 * exp))
}

/// Objective of the Krawtchouk subspace program: sum |S|^level P[S].
pub fn kraw_objective(p: &PseudoDistribution, lat: &Lattice, level: u32) -> Rational {
    lat.ids().map(|s| size_pow(lat, s, level) * p.get(s)).sum()
}

/// Objective of the partial subspace program: sum |S| P[S].
pub fn partial_objective(p: &PseudoDistribution, lat: &Lattice) -> Rational {
    lat.ids().map(|s| size_pow(lat, s, 1) * p.get(s)).sum()
}

fn new_subspace_lp(lat: &Lattice, objective_exp: u32) -> LinearProgram {
    let mut lp = LinearProgram::new(Sense::Maximize);
    for s in lat.ids() {
        lp.add_variable(&format!("P_{}", s.0)).expect("ids are unique");
    }
    let objective = lat
        .ids()
        .map(|s| (s.0, size_pow(lat, s, objective_exp)))
        .collect();
    lp.set_objective(objective).expect("objective over declared variables");
    lp
}

fn push_norm_row(lp: &mut LinearProgram, lat: &Lattice) {
    let coeffs = lat.ids().map(|s| (s.0, Rational::one())).collect();
    lp.add_constraint("norm", coeffs, Relation::Eq, Rational::one())
        .expect("labels unique");
}

fn push_distance_rows(lp: &mut LinearProgram, lat: &Lattice, d: usize) {
    for s in lat.ids() {
        if lat.violates_distance(s, d) {
            lp.add_constraint(
                &format!("dist_{}", s.0),
                vec![(s.0, Rational::one())],
                Relation::Eq,
                Rational::zero(),
            )
            .expect("labels unique");
        }
    }
}

fn push_dimension_rows(lp: &mut LinearProgram, lat: &Lattice, k0: usize) {
    for s in lat.ids() {
        if lat.dim(s) > k0 {
            lp.add_constraint(
                &format!("dim_{}", s.0),
                vec![(s.0, Rational::one())],
                Relation::Eq,
                Rational::zero(),
            )
            .expect("labels unique");
        }
    }
}

/// Full Fourier rows, one per subspace U, scaled by |U|^-level:
/// sum over S <= U of (|S|/|U|)^level P[S] >= 0.
fn push_fourier_rows(lp: &mut LinearProgram, lat: &Lattice, level: u32) {
    let q = BigInt::from(lat.spec().q());
    for u in lat.ids() {
        let du = lat.dim(u) as u32;
        let coeffs = lat
            .below(u)
            .iter()
            .map(|s| {
                let ds = lat.dim(*s) as u32;
                (s.0, Rational::new(BigInt::one(), q.pow(level * (du - ds))))
            })
            .collect();
        lp.add_constraint(&format!("fourier_{}", u.0), coeffs, Relation::Ge, Rational::zero())
            .expect("labels unique");
    }
}

fn push_nonneg_rows(lp: &mut LinearProgram, lat: &Lattice) {
    for u in lat.ids() {
        let coeffs = lat.above(u).iter().map(|s| (s.0, Rational::one())).collect();
        lp.add_constraint(&format!("nonneg_{}", u.0), coeffs, Relation::Ge, Rational::zero())
            .expect("labels unique");
    }
}

/// Krawtchouk subspace program at level >= n: maximize sum |S|^level P[S]
/// under normalization, distance equalities, Fourier rows and nonnegativity
/// rows. Its optimum is A_q^Lin(n, d)^level.
pub fn build_kraw_pseudo(inst: &Instance, lat: &Lattice) -> Result<LinearProgram, HierarchyError> {
    inst.check_lattice(lat)?;
    inst.require_level_at_least_n()?;
    let mut lp = new_subspace_lp(lat, inst.level);
    push_norm_row(&mut lp, lat);
    push_distance_rows(&mut lp, lat, inst.d);
    push_fourier_rows(&mut lp, lat, inst.level);
    push_nonneg_rows(&mut lp, lat);
    Ok(lp)
}

/// Weakening of the Krawtchouk program: the distance equalities are replaced
/// by `P[S] = 0 for dim(S) > k0`. Every distance-feasible point remains
/// feasible, so the optimum can only grow.
pub fn build_kraw_pseudo_weak(
    inst: &Instance,
    lat: &Lattice,
    k0: usize,
) -> Result<LinearProgram, HierarchyError> {
    inst.check_lattice(lat)?;
    inst.require_level_at_least_n()?;
    let mut lp = new_subspace_lp(lat, inst.level);
    push_norm_row(&mut lp, lat);
    push_dimension_rows(&mut lp, lat, k0);
    push_fourier_rows(&mut lp, lat, inst.level);
    push_nonneg_rows(&mut lp, lat);
    Ok(lp)
}

/// Same feasible region as [`build_kraw_pseudo_weak`], but with the partial
/// program's objective sum |S| P[S].
pub fn build_full_pseudo_weak(
    inst: &Instance,
    lat: &Lattice,
    k0: usize,
) -> Result<LinearProgram, HierarchyError> {
    inst.check_lattice(lat)?;
    inst.require_level_at_least_n()?;
    let mut lp = new_subspace_lp(lat, 1);
    push_norm_row(&mut lp, lat);
    push_dimension_rows(&mut lp, lat, k0);
    push_fourier_rows(&mut lp, lat, inst.level);
    push_nonneg_rows(&mut lp, lat);
    Ok(lp)
}

/// Partial Krawtchouk subspace program at level >= n: maximize
/// sum |S| P[S] under normalization, distance equalities, the partial
/// Fourier family and nonnegativity rows. Its optimum is A_q^Lin(n, d).
///
/// Partial rows range over pairs T <= U and exponents r with
/// n - dim(U) <= r <= level - dim(T):
///
/// ```text
/// sum over T <= S <= U of (|S|/|U|)^r P[S] >= 0        (pfourier_<T>_<U>_<r>)
/// ```
///
/// Rows identical after scaling are emitted once, keeping the
/// lexicographically smallest (T, U, r). Taking r = n - dim(U) and T = U
/// leaves the singleton row P[U] >= 0, so the whole family subsumes plain
/// nonnegativity of the point masses; the upward-sum nonnegativity rows are
/// still emitted as their own block.
pub fn build_partial_pseudo(inst: &Instance, lat: &Lattice) -> Result<LinearProgram, HierarchyError> {
    inst.check_lattice(lat)?;
    inst.require_level_at_least_n()?;
    let mut lp = new_subspace_lp(lat, 1);
    push_norm_row(&mut lp, lat);
    push_distance_rows(&mut lp, lat, inst.d);

    let q = BigInt::from(lat.spec().q());
    let level = inst.level as usize;
    let n = inst.n;
    let mut seen: std::collections::HashSet<Vec<(usize, Rational)>> =
        std::collections::HashSet::new();
    for t in lat.ids() {
        let dt = lat.dim(t);
        for &u in lat.above(t) {
            let du = lat.dim(u);
            let r_lo = n - du;
            let r_hi = level - dt;
            for r in r_lo..=r_hi {
                let coeffs: Vec<(usize, Rational)> = lat
                    .below(u)
                    .iter()
                    .filter(|s| lat.leq(t, **s))
                    .map(|s| {
                        let ds = lat.dim(*s);
                        (s.0, Rational::new(BigInt::one(), q.pow((r * (du - ds)) as u32)))
                    })
                    .collect();
                if seen.insert(coeffs.clone()) {
                    lp.add_constraint(
                        &format!("pfourier_{}_{}_{}", t.0, u.0, r),
                        coeffs,
                        Relation::Ge,
                        Rational::zero(),
                    )
                    .expect("labels unique");
                }
            }
        }
    }

    push_nonneg_rows(&mut lp, lat);
    Ok(lp)
}

// ---------------------------------------------------------------------------
// Tuple space of (F_q^n)^level
// ---------------------------------------------------------------------------

/// Row-major indexing of tuples in (F_q^n)^level: the first vector of the
/// tuple is the most significant block, and within a vector the first
/// coordinate is the most significant digit.
#[derive(Clone, Debug)]
pub struct TupleSpace {
    spec: FieldSpec,
    n: usize,
    level: u32,
}

impl TupleSpace {
    pub fn new(spec: FieldSpec, n: usize, level: u32) -> Self {
        TupleSpace { spec, n, level }
    }

    /// q^n, saturating so oversized requests fail the cap check instead of
    /// overflowing.
    pub fn block_count(&self) -> u128 {
        (self.spec.q() as u128)
            .checked_pow(self.n as u32)
            .unwrap_or(u128::MAX)
    }

    /// q^(n * level), saturating.
    pub fn count(&self) -> u128 {
        self.block_count()
            .checked_pow(self.level)
            .unwrap_or(u128::MAX)
    }

    pub fn vector(&self, mut idx: u128) -> FqVector {
        let q = self.spec.q() as u128;
        let mut vals = vec![0u32; self.n];
        for k in (0..self.n).rev() {
            vals[k] = (idx % q) as u32;
            idx /= q;
        }
        self.spec.vector(&vals).expect("digits below q")
    }

    pub fn vector_index(&self, v: &FqVector) -> u128 {
        let q = self.spec.q() as u128;
        v.entries()
            .iter()
            .fold(0u128, |acc, e| acc * q + e.value() as u128)
    }

    pub fn tuple(&self, mut idx: u128) -> Vec<FqVector> {
        let block = self.block_count();
        let mut out = vec![self.spec.zero_vector(self.n); self.level as usize];
        for k in (0..self.level as usize).rev() {
            out[k] = self.vector(idx % block);
            idx /= block;
        }
        out
    }

    pub fn tuple_index(&self, tuple: &[FqVector]) -> u128 {
        let block = self.block_count();
        tuple
            .iter()
            .fold(0u128, |acc, v| acc * block + self.vector_index(v))
    }
}

/// Minimum weight of the span of a tuple falls below d: computed directly
/// from the tuple, without a lattice.
fn tuple_violates_distance(spec: &FieldSpec, tuple: &[FqVector], d: usize) -> bool {
    if d <= 1 {
        return false;
    }
    let (basis, _) = rref(spec, tuple);
    let k = basis.len();
    let q = spec.q() as u64;
    let total = q.pow(k as u32);
    for mut idx in 1..total {
        let mut acc = spec.zero_vector(tuple[0].len());
        for row in &basis {
            let c = (idx % q) as u32;
            idx /= q;
            if c != 0 {
                acc = spec.vec_add(&acc, &spec.vec_scale(spec.element(c).unwrap(), row));
            }
        }
        if acc.hamming_weight() < d {
            return true;
        }
    }
    false
}

fn check_tuple_cap(required: u128, cap: u64) -> Result<(), HierarchyError> {
    if required > cap as u128 {
        Err(HierarchyError::TupleCapExceeded { required, cap })
    } else {
        Ok(())
    }
}

/// Unsymmetrized Krawtchouk program over F_2 at any level: variables a_x for
/// tuples x, objective sum a_x, normalization a_0 = 1, distance equalities,
/// one character row per tuple alpha, and nonnegativity rows.
///
/// Reflection equalities a_x = a_{-x} are vacuous over F_2 and therefore
/// never emitted; this builder is restricted to q = 2, where real-valued
/// characters exist.
pub fn build_unsym_kraw(inst: &Instance, caps: &Caps) -> Result<LinearProgram, HierarchyError> {
    inst.require_binary()?;
    let space = TupleSpace::new(inst.spec.clone(), inst.n, inst.level);
    let count = space.count();
    check_tuple_cap(count, caps.max_tuples)?;
    let count = count as usize;

    let mut lp = LinearProgram::new(Sense::Maximize);
    for idx in 0..count {
        lp.add_variable(&format!("a_{idx}")).expect("indices unique");
    }
    lp.set_objective((0..count).map(|idx| (idx, Rational::one())).collect())
        .expect("objective over declared variables");

    lp.add_constraint("norm", vec![(0, Rational::one())], Relation::Eq, Rational::one())
        .expect("labels unique");

    let tuples: Vec<Vec<FqVector>> = (0..count).map(|idx| space.tuple(idx as u128)).collect();
    for (idx, tuple) in tuples.iter().enumerate() {
        if tuple_violates_distance(&inst.spec, tuple, inst.d) {
            lp.add_constraint(
                &format!("dist_{idx}"),
                vec![(idx, Rational::one())],
                Relation::Eq,
                Rational::zero(),
            )
            .expect("labels unique");
        }
    }

    for (aidx, alpha) in tuples.iter().enumerate() {
        let coeffs: Vec<(usize, Rational)> = tuples
            .iter()
            .enumerate()
            .map(|(xidx, x)| {
                let sign = inst.spec.char_value(alpha, x).expect("q = 2");
                (xidx, Rational::from(BigInt::from(sign)))
            })
            .collect();
        lp.add_constraint(&format!("fourier_{aidx}"), coeffs, Relation::Ge, Rational::zero())
            .expect("labels unique");
    }

    for idx in 0..count {
        lp.add_constraint(
            &format!("nonneg_{idx}"),
            vec![(idx, Rational::one())],
            Relation::Ge,
            Rational::zero(),
        )
        .expect("labels unique");
    }
    Ok(lp)
}

/// Unsymmetrized partial Krawtchouk program over F_2 at any level:
/// objective sum over x_1 of a_(x_1, 0, ..., 0); rows are normalization,
/// distance equalities, one mixed character/indicator row per pair
/// (alpha, subset-of-positions) with duplicates emitted once, and explicit
/// equalities a_x = a_y for tuples with equal span. Plain nonnegativity is
/// recovered by the empty subset, so no separate nonnegativity block exists.
pub fn build_unsym_partial(inst: &Instance, caps: &Caps) -> Result<LinearProgram, HierarchyError> {
    inst.require_binary()?;
    let space = TupleSpace::new(inst.spec.clone(), inst.n, inst.level);
    let count = space.count();
    check_tuple_cap(count, caps.max_tuples)?;
    let level = inst.level as usize;
    let rows = count
        .checked_mul(1u128 << level)
        .ok_or(HierarchyError::TupleCapExceeded { required: u128::MAX, cap: caps.max_tuples })?;
    check_tuple_cap(rows, caps.max_tuples)?;
    let count = count as usize;

    let mut lp = LinearProgram::new(Sense::Maximize);
    for idx in 0..count {
        lp.add_variable(&format!("a_{idx}")).expect("indices unique");
    }
    // Tuples of the form (x_1, 0, ..., 0) occupy the top index block.
    let block = space.block_count() as usize;
    let top = count / block;
    lp.set_objective((0..block).map(|x1| (x1 * top, Rational::one())).collect())
        .expect("objective over declared variables");

    lp.add_constraint("norm", vec![(0, Rational::one())], Relation::Eq, Rational::one())
        .expect("labels unique");

    let tuples: Vec<Vec<FqVector>> = (0..count).map(|idx| space.tuple(idx as u128)).collect();
    for (idx, tuple) in tuples.iter().enumerate() {
        if tuple_violates_distance(&inst.spec, tuple, inst.d) {
            lp.add_constraint(
                &format!("dist_{idx}"),
                vec![(idx, Rational::one())],
                Relation::Eq,
                Rational::zero(),
            )
            .expect("labels unique");
        }
    }

    let mut seen: std::collections::HashSet<Vec<(usize, Rational)>> =
        std::collections::HashSet::new();
    for (aidx, alpha) in tuples.iter().enumerate() {
        for mask in 0..(1u32 << level) {
            // Positions in the mask contribute characters; the rest pin the
            // coordinate to alpha's.
            let mut coeffs: Vec<(usize, Rational)> = Vec::new();
            for (xidx, x) in tuples.iter().enumerate() {
                let mut sign = 1i32;
                let mut supported = true;
                for i in 0..level {
                    if mask & (1 << i) != 0 {
                        sign *= inst.spec.char_value(&alpha[i..=i], &x[i..=i]).expect("q = 2");
                    } else if x[i] != alpha[i] {
                        supported = false;
                        break;
                    }
                }
                if supported {
                    coeffs.push((xidx, Rational::from(BigInt::from(sign))));
                }
            }
            if seen.insert(coeffs.clone()) {
                lp.add_constraint(
                    &format!("pfourier_{aidx}_{mask}"),
                    coeffs,
                    Relation::Ge,
                    Rational::zero(),
                )
                .expect("labels unique");
            }
        }
    }

    // Basis-change symmetry: tuples with the same span share a value.
    let mut first_by_span: std::collections::HashMap<Vec<u32>, usize> =
        std::collections::HashMap::new();
    let mut gl_idx = 0usize;
    for (idx, tuple) in tuples.iter().enumerate() {
        let (basis, _) = rref(&inst.spec, tuple);
        let key: Vec<u32> = basis
            .iter()
            .flat_map(|r| r.entries().iter().map(|e| e.value()))
            .collect();
        match first_by_span.entry(key) {
            std::collections::hash_map::Entry::Vacant(v) => {
                v.insert(idx);
            }
            std::collections::hash_map::Entry::Occupied(o) => {
                let rep = *o.get();
                lp.add_constraint(
                    &format!("gl_{gl_idx}"),
                    vec![(rep, Rational::one()), (idx, -Rational::one())],
                    Relation::Eq,
                    Rational::zero(),
                )
                .expect("labels unique");
                gl_idx += 1;
            }
        }
    }
    Ok(lp)
}

/// Tuple-indexed solution induced by a point mass: a_x is the cumulative
/// value of the span of x. If the point mass is feasible for the subspace
/// Krawtchouk program, the lift is feasible for the unsymmetrized one.
pub fn lift_pseudo_to_unsym(
    p: &PseudoDistribution,
    inst: &Instance,
    lat: &Lattice,
    caps: &Caps,
) -> Result<Vec<Rational>, HierarchyError> {
    inst.check_lattice(lat)?;
    let space = TupleSpace::new(inst.spec.clone(), inst.n, inst.level);
    let count = space.count();
    check_tuple_cap(count, caps.max_tuples)?;
    let cumulative = pseudo_to_cumulative(p, lat);
    Ok((0..count as usize)
        .map(|idx| {
            let span = lat.canonicalize(&space.tuple(idx as u128));
            cumulative.get(span).clone()
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lp::{solve, verify_optimality, Status};
    use num_traits::Signed;
    use rand::{Rng, SeedableRng};

    fn f2() -> FieldSpec {
        FieldSpec::new(2).unwrap()
    }

    fn int(v: i64) -> Rational {
        Rational::from(BigInt::from(v))
    }

    fn solve_checked(lp: &LinearProgram) -> crate::lp::LpSolution {
        let sol = solve(lp);
        assert_eq!(sol.status, Status::Optimal);
        assert!(verify_optimality(lp, &sol));
        sol
    }

    #[test]
    fn kraw_pseudo_2222_structure_and_value() {
        let lat = Lattice::enumerate(&f2(), 2).unwrap();
        let inst = Instance::new(f2(), 2, 2, 2).unwrap();
        let lp = build_kraw_pseudo(&inst, &lat).unwrap();
        assert_eq!(lp.num_variables(), 5);
        let dist_labels: Vec<&str> = lp
            .constraints()
            .iter()
            .map(|c| c.label())
            .filter(|l| l.starts_with("dist_"))
            .collect();
        // Violating subspaces: the two axis lines and the full plane.
        assert_eq!(dist_labels, vec!["dist_1", "dist_2", "dist_4"]);
        let sol = solve_checked(&lp);
        assert_eq!(sol.objective_value, int(4));
    }

    #[test]
    fn kraw_pseudo_distance_one_reaches_full_mass() {
        let lat = Lattice::enumerate(&f2(), 2).unwrap();
        let inst = Instance::new(f2(), 2, 1, 2).unwrap();
        let lp = build_kraw_pseudo(&inst, &lat).unwrap();
        assert!(lp.constraints().iter().all(|c| !c.label().starts_with("dist_")));
        let sol = solve_checked(&lp);
        assert_eq!(sol.objective_value, int(16)); // q^(n*level)
    }

    #[test]
    fn level_below_n_is_rejected() {
        let lat = Lattice::enumerate(&f2(), 3).unwrap();
        let inst = Instance::new(f2(), 3, 2, 2).unwrap();
        assert!(matches!(
            build_kraw_pseudo(&inst, &lat),
            Err(HierarchyError::LevelTooLow { level: 2, n: 3 })
        ));
        assert!(matches!(
            build_partial_pseudo(&inst, &lat),
            Err(HierarchyError::LevelTooLow { .. })
        ));
    }

    #[test]
    fn kraw_weak_2323_dimension_rows_and_value() {
        let lat = Lattice::enumerate(&f2(), 3).unwrap();
        let inst = Instance::new(f2(), 3, 2, 3).unwrap();
        let lp = build_kraw_pseudo_weak(&inst, &lat, 2).unwrap();
        let dim_rows: Vec<&str> = lp
            .constraints()
            .iter()
            .map(|c| c.label())
            .filter(|l| l.starts_with("dim_"))
            .collect();
        assert_eq!(dim_rows, vec!["dim_15"]); // only the full space has dim 3
        let sol = solve_checked(&lp);
        assert_eq!(sol.objective_value, int(64));

        // k0 = n leaves no dimension rows.
        let loose = build_kraw_pseudo_weak(&inst, &lat, 3).unwrap();
        assert!(loose.constraints().iter().all(|c| !c.label().starts_with("dim_")));
    }

    #[test]
    fn full_weak_shares_rows_with_kraw_weak() {
        let lat = Lattice::enumerate(&f2(), 3).unwrap();
        let inst = Instance::new(f2(), 3, 2, 3).unwrap();
        let weak = build_kraw_pseudo_weak(&inst, &lat, 2).unwrap();
        let full = build_full_pseudo_weak(&inst, &lat, 2).unwrap();
        assert_eq!(weak.constraints(), full.constraints());
        assert_eq!(full.objective_coeff(0), int(1)); // |{0}| = 1
        let sol = solve_checked(&full);
        assert_eq!(sol.objective_value, int(4));
    }

    #[test]
    fn partial_pseudo_2222_has_singleton_rows_and_value_two() {
        let lat = Lattice::enumerate(&f2(), 2).unwrap();
        let inst = Instance::new(f2(), 2, 2, 2).unwrap();
        let lp = build_partial_pseudo(&inst, &lat).unwrap();
        // Every variable gets a singleton >= 0 row from (T = U, r = n - dim U).
        for s in lat.ids() {
            let found = lp.constraints().iter().any(|c| {
                c.relation() == Relation::Ge
                    && c.rhs().is_zero()
                    && c.coeffs().len() == 1
                    && c.coeffs()[0].0 == s.0
                    && c.coeffs()[0].1.is_positive()
            });
            assert!(found, "no singleton row for P_{}", s.0);
        }
        // Admissibility: every pfourier label names a contained pair.
        for c in lp.constraints() {
            if let Some(rest) = c.label().strip_prefix("pfourier_") {
                let parts: Vec<usize> = rest.split('_').map(|t| t.parse().unwrap()).collect();
                assert!(lat.leq(SubspaceId(parts[0]), SubspaceId(parts[1])));
            }
        }
        let sol = solve_checked(&lp);
        assert_eq!(sol.objective_value, int(2));
    }

    #[test]
    fn partial_rows_contain_all_fourier_rows() {
        // Content check: the (T = {0}, r = level) partial rows reproduce the
        // full Fourier block.
        let lat = Lattice::enumerate(&f2(), 3).unwrap();
        let inst = Instance::new(f2(), 3, 2, 3).unwrap();
        let kraw = build_kraw_pseudo(&inst, &lat).unwrap();
        let partial = build_partial_pseudo(&inst, &lat).unwrap();
        let partial_contents: std::collections::HashSet<Vec<(usize, Rational)>> = partial
            .constraints()
            .iter()
            .filter(|c| c.label().starts_with("pfourier_"))
            .map(|c| c.coeffs().to_vec())
            .collect();
        for c in kraw.constraints() {
            if c.label().starts_with("fourier_") {
                assert!(
                    partial_contents.contains(c.coeffs()),
                    "missing partial row matching {}",
                    c.label()
                );
            }
        }
    }

    #[test]
    fn built_models_survive_the_text_format() {
        let lat = Lattice::enumerate(&f2(), 2).unwrap();
        let inst = Instance::new(f2(), 2, 2, 2).unwrap();
        let lp = build_kraw_pseudo(&inst, &lat).unwrap();
        let parsed = crate::lp::LinearProgram::parse_text(&lp.export_text()).unwrap();
        assert_eq!(parsed, lp);
    }

    #[test]
    fn level_count_stability_for_fixed_instance() {
        let lat = Lattice::enumerate(&f2(), 2).unwrap();
        let a = Instance::new(f2(), 2, 2, 2).unwrap();
        let b = Instance::new(f2(), 2, 2, 5).unwrap();
        let lp_a = build_kraw_pseudo(&a, &lat).unwrap();
        let lp_b = build_kraw_pseudo(&b, &lat).unwrap();
        assert_eq!(lp_a.num_variables(), lp_b.num_variables());
        assert_eq!(lp_a.num_constraints(), lp_b.num_constraints());
    }

    #[test]
    fn weakening_is_a_relaxation() {
        let lat = Lattice::enumerate(&f2(), 3).unwrap();
        let inst = Instance::new(f2(), 3, 2, 3).unwrap();
        let strict_lp = build_kraw_pseudo(&inst, &lat).unwrap();
        let weak_lp = build_kraw_pseudo_weak(&inst, &lat, 2).unwrap();
        let strict = solve_checked(&strict_lp);
        let weak = solve_checked(&weak_lp);
        assert!(weak.objective_value >= strict.objective_value);

        // Row-level containment of feasible sets: the two models agree
        // outside the dist/dim blocks, and every dimension equality is
        // implied by a distance equality (a space above dimension k0 cannot
        // keep minimum weight >= d, so both models pin it to zero).
        let non_pin = |lp: &LinearProgram| -> Vec<crate::lp::Constraint> {
            lp.constraints()
                .iter()
                .filter(|c| !c.label().starts_with("dist_") && !c.label().starts_with("dim_"))
                .cloned()
                .collect()
        };
        assert_eq!(non_pin(&strict_lp), non_pin(&weak_lp));
        for c in weak_lp.constraints() {
            if let Some(id) = c.label().strip_prefix("dim_") {
                let s = SubspaceId(id.parse().unwrap());
                assert!(lat.violates_distance(s, inst.d()));
                assert!(strict_lp.constraint(&format!("dist_{}", s.0)).is_some());
            }
        }
    }

    #[test]
    fn true_solutions_are_feasible_iff_distance_holds() {
        let lat = Lattice::enumerate(&f2(), 3).unwrap();
        let inst = Instance::new(f2(), 3, 2, 3).unwrap();
        let lp = build_kraw_pseudo(&inst, &lat).unwrap();
        for c in lat.ids() {
            let mut p = PseudoDistribution::zero(&lat);
            p.set(c, Rational::one());
            let violated = lp.check_feasible_dense(p.values());
            if lat.violates_distance(c, inst.d()) {
                assert_eq!(violated, vec![format!("dist_{}", c.0)]);
            } else {
                assert!(violated.is_empty(), "delta on {} should be feasible", c.0);
            }
        }
    }

    #[test]
    fn unsym_kraw_2222_matches_pseudo_value() {
        let caps = Caps::default();
        let inst = Instance::new(f2(), 2, 2, 2).unwrap();
        let lp = build_unsym_kraw(&inst, &caps).unwrap();
        assert_eq!(lp.num_variables(), 16);
        let fourier_rows = lp
            .constraints()
            .iter()
            .filter(|c| c.label().starts_with("fourier_"))
            .count();
        assert_eq!(fourier_rows, 16);
        let sol = solve_checked(&lp);
        assert_eq!(sol.objective_value, int(4));

        // The all-mass-at-zero point is feasible with value 1.
        let mut point = vec![Rational::zero(); 16];
        point[0] = Rational::one();
        assert!(lp.check_feasible_dense(&point).is_empty());
        assert_eq!(lp.objective_value(&point), int(1));
    }

    #[test]
    fn unsym_partial_2222_structure_and_value() {
        let caps = Caps::default();
        let inst = Instance::new(f2(), 2, 2, 2).unwrap();
        let lp = build_unsym_partial(&inst, &caps).unwrap();
        assert_eq!(lp.num_variables(), 16);
        let pfourier = lp
            .constraints()
            .iter()
            .filter(|c| c.label().starts_with("pfourier_"))
            .count();
        assert_eq!(pfourier, 64); // all 16 * 2^2 rows are distinct here
        let gl = lp.constraints().iter().filter(|c| c.label().starts_with("gl_")).count();
        assert_eq!(gl, 11);
        // The empty mask at alpha recovers a_alpha >= 0.
        for idx in 0..16usize {
            let found = lp.constraints().iter().any(|c| {
                c.label().starts_with("pfourier_")
                    && c.relation() == Relation::Ge
                    && c.coeffs() == [(idx, Rational::one())]
            });
            assert!(found, "missing nonnegativity row for a_{idx}");
        }
        let sol = solve_checked(&lp);
        assert_eq!(sol.objective_value, int(2));
    }

    #[test]
    fn unsym_builders_reject_odd_fields_and_honor_caps() {
        let f3 = FieldSpec::new(3).unwrap();
        let inst = Instance::new(f3, 2, 2, 2).unwrap();
        assert!(matches!(
            build_unsym_kraw(&inst, &Caps::default()),
            Err(HierarchyError::RequiresBinary { q: 3 })
        ));
        let inst2 = Instance::new(f2(), 3, 2, 3).unwrap();
        let tiny = Caps { max_tuples: 100, ..Caps::default() };
        assert!(matches!(
            build_unsym_kraw(&inst2, &tiny),
            Err(HierarchyError::TupleCapExceeded { required: 512, cap: 100 })
        ));
    }

    #[test]
    fn lift_of_code_mass_is_span_indicator() {
        let lat = Lattice::enumerate(&f2(), 2).unwrap();
        let inst = Instance::new(f2(), 2, 2, 2).unwrap();
        let spec = f2();
        let code = lat.canonicalize(&[spec.vector(&[1, 1]).unwrap()]);

        let mut p = PseudoDistribution::zero(&lat);
        p.set(code, Rational::one());
        let lift = lift_pseudo_to_unsym(&p, &inst, &lat, &Caps::default()).unwrap();
        let space = TupleSpace::new(spec.clone(), 2, 2);
        let mut ones = 0;
        for (idx, v) in lift.iter().enumerate() {
            let tuple = space.tuple(idx as u128);
            let inside = tuple.iter().all(|x| lat.contains_vector(code, x));
            assert_eq!(*v == Rational::one(), inside);
            assert_eq!(*v == Rational::zero(), !inside);
            if inside {
                ones += 1;
            }
        }
        assert_eq!(ones, 4);

        // Mass at {0} lifts to the indicator of the zero tuple.
        let mut delta0 = PseudoDistribution::zero(&lat);
        delta0.set(lat.zero_space(), Rational::one());
        let lift0 = lift_pseudo_to_unsym(&delta0, &inst, &lat, &Caps::default()).unwrap();
        assert_eq!(lift0[0], Rational::one());
        assert!(lift0[1..].iter().all(|v| v.is_zero()));
    }

    #[test]
    fn lift_preserves_feasibility_and_value() {
        let lat = Lattice::enumerate(&f2(), 2).unwrap();
        let inst = Instance::new(f2(), 2, 2, 2).unwrap();
        let pseudo_lp = build_kraw_pseudo(&inst, &lat).unwrap();
        let unsym_lp = build_unsym_kraw(&inst, &Caps::default()).unwrap();

        // The optimal vertex of the subspace program lifts to a feasible
        // point of the unsymmetrized program with the same objective.
        let sol = solve_checked(&pseudo_lp);
        let p = PseudoDistribution::new(sol.primal().to_vec());
        let lift = lift_pseudo_to_unsym(&p, &inst, &lat, &Caps::default()).unwrap();
        assert!(unsym_lp.check_feasible_dense(&lift).is_empty());
        assert_eq!(unsym_lp.objective_value(&lift), sol.objective_value);

        // Same for every feasible code mass.
        for c in lat.ids() {
            if lat.violates_distance(c, inst.d()) {
                continue;
            }
            let mut p = PseudoDistribution::zero(&lat);
            p.set(c, Rational::one());
            let lift = lift_pseudo_to_unsym(&p, &inst, &lat, &Caps::default()).unwrap();
            assert!(unsym_lp.check_feasible_dense(&lift).is_empty());
            assert_eq!(
                unsym_lp.objective_value(&lift),
                kraw_objective(&p, &lat, inst.level())
            );
        }
    }

    #[test]
    fn objective_value_identity_on_random_masses() {
        // sum over tuples of cumulative[span(x)] equals sum |S|^level P[S].
        let lat = Lattice::enumerate(&f2(), 2).unwrap();
        let inst = Instance::new(f2(), 2, 2, 2).unwrap();
        let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(3);
        for _ in 0..20 {
            let p = PseudoDistribution::new(
                (0..lat.len())
                    .map(|_| {
                        Rational::new(
                            BigInt::from(rng.gen_range(-9i64..=9)),
                            BigInt::from(rng.gen_range(1i64..=9)),
                        )
                    })
                    .collect(),
            );
            let lift = lift_pseudo_to_unsym(&p, &inst, &lat, &Caps::default()).unwrap();
            let lhs: Rational = lift.iter().cloned().sum();
            assert_eq!(lhs, kraw_objective(&p, &lat, inst.level()));
        }
    }

    #[test]
    fn transforms_roundtrip_through_wrappers() {
        let lat = Lattice::enumerate(&f2(), 3).unwrap();
        let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(11);
        for _ in 0..10 {
            let p = PseudoDistribution::new(
                (0..lat.len())
                    .map(|_| {
                        Rational::new(
                            BigInt::from(rng.gen_range(-9i64..=9)),
                            BigInt::from(rng.gen_range(1i64..=9)),
                        )
                    })
                    .collect(),
            );
            let c = pseudo_to_cumulative(&p, &lat);
            assert_eq!(cumulative_to_pseudo(&c, &lat), p);
        }
    }
}
