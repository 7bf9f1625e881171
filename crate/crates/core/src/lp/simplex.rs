//! Two-phase exact rational simplex with certificate reconstruction.
//!
//! `solve` canonicalizes the model to an internal maximization, then:
//!
//! 1. presolve: variables pinned by singleton equality rows are substituted
//!    out (the hierarchy models pin large blocks of variables to zero this
//!    way), empty rows are checked for consistency, and rows identical after
//!    positive scaling are collapsed keeping the tighter side;
//! 2. the reduced model is solved either directly or through its dual —
//!    whichever has fewer rows — by a dense tableau two-phase simplex over
//!    `BigRational` with Bland's rule (a Dantzig rule with a degeneracy
//!    detector that falls back to Bland is available as an option);
//! 3. primal values, dual multipliers and rays are mapped back to the
//!    original rows; multipliers for the eliminated rows are reconstructed
//!    from the stationarity equations in reverse elimination order, so the
//!    returned certificate refers to the model as given.
//!
//! Every row is scaled to integer coefficients before pivoting to keep the
//! rational bit-length flat.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::{
    verify_infeasibility_ray, verify_optimality, verify_unbounded_ray, CertificateKind,
    LinearProgram, LpSolution, Relation, Sense, Status,
};
use crate::Rational;

/// Column selection rule for the simplex.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum PivotRule {
    /// Bland's anti-cycling rule: always pick the lowest-index improving
    /// column and the lowest-index blocking basic variable. Terminates on
    /// every input.
    #[default]
    Bland,
    /// Dantzig's largest-coefficient rule, demoted permanently to Bland once
    /// a long run of consecutive degenerate pivots is observed.
    DantzigThenBland,
}

/// Which formulation the tableau works on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum SolveRoute {
    /// Pick the formulation with the smaller tableau.
    #[default]
    Auto,
    Primal,
    Dual,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SolverOptions {
    pub pivot_rule: PivotRule,
    pub route: SolveRoute,
}

/// Solve with default options (Bland's rule, automatic route).
pub fn solve(lp: &LinearProgram) -> LpSolution {
    solve_with(lp, &SolverOptions::default())
}

pub fn solve_with(lp: &LinearProgram, options: &SolverOptions) -> LpSolution {
    let nvars = lp.num_variables();
    let nrows = lp.num_constraints();

    // Internal form always maximizes.
    let mut c_int = vec![Rational::zero(); nvars];
    for (j, coeff) in lp.objective() {
        c_int[*j] = match lp.sense() {
            Sense::Maximize => coeff.clone(),
            Sense::Minimize => -coeff.clone(),
        };
    }

    // Original columns, used when reconstructing multipliers.
    let mut columns: Vec<Vec<(usize, Rational)>> = vec![Vec::new(); nvars];
    for (i, con) in lp.constraints().iter().enumerate() {
        for (j, coeff) in con.coeffs() {
            columns[*j].push((i, coeff.clone()));
        }
    }

    let pre = presolve(lp);

    if let Some(conflict) = pre.conflict {
        let mut ray = vec![Rational::zero(); nrows];
        for (row, value) in conflict {
            ray[row] += value;
        }
        let ray = lift_multipliers(&columns, &pre.events, ray, &vec![Rational::zero(); nvars]);
        debug_assert!(verify_infeasibility_ray(lp, &ray));
        return LpSolution::new(
            Status::Infeasible,
            CertificateKind::InfeasibilityRay,
            Vec::new(),
            ray,
            Rational::zero(),
            false,
        );
    }

    let var_map: Vec<usize> = (0..nvars).filter(|j| pre.fixed[*j].is_none()).collect();
    let finish_optimal = |x_red: &[Rational], y_kept: &[Rational], alternate: bool| {
        let mut primal = vec![Rational::zero(); nvars];
        for (j, value) in pre.fixed.iter().enumerate() {
            if let Some(v) = value {
                primal[j] = v.clone();
            }
        }
        for (red_j, &j) in var_map.iter().enumerate() {
            primal[j] = x_red[red_j].clone();
        }
        let mut duals = vec![Rational::zero(); nrows];
        for (row, y) in pre.rows.iter().zip(y_kept) {
            duals[row.origin] = y.clone();
        }
        let mut duals = lift_multipliers(&columns, &pre.events, duals, &c_int);
        if lp.sense() == Sense::Minimize {
            for y in &mut duals {
                *y = -y.clone();
            }
        }
        let value = lp.objective_value(&primal);
        let sol = LpSolution::new(
            Status::Optimal,
            CertificateKind::Optimality,
            primal,
            duals,
            value,
            alternate,
        );
        debug_assert!(verify_optimality(lp, &sol));
        sol
    };

    if var_map.is_empty() {
        // Everything pinned; surviving rows would have coefficients, so none
        // survive and the fixed point is the unique solution.
        debug_assert!(pre.rows.is_empty());
        return finish_optimal(&[], &[], false);
    }

    let red_index: HashMap<usize, usize> =
        var_map.iter().enumerate().map(|(r, &j)| (j, r)).collect();
    let c_red: Vec<Rational> = var_map.iter().map(|&j| c_int[j].clone()).collect();
    let rows_red: Vec<RedRow> = pre
        .rows
        .iter()
        .map(|row| RedRow {
            coeffs: row
                .coeffs
                .iter()
                .map(|(j, v)| (red_index[j], v.clone()))
                .collect(),
            relation: row.relation,
            rhs: row.rhs.clone(),
        })
        .collect();

    let use_dual = match options.route {
        SolveRoute::Primal => false,
        SolveRoute::Dual => true,
        SolveRoute::Auto => rows_red.len() >= 16 && rows_red.len() >= 4 * var_map.len(),
    };

    let attempt = if use_dual {
        solve_via_dual(&rows_red, &c_red, options.pivot_rule)
    } else {
        None
    };
    let outcome = match attempt {
        Some(outcome) => outcome,
        None => solve_via_primal(&rows_red, &c_red, options.pivot_rule),
    };

    match outcome {
        RouteOutcome::Optimal { x_red, y_red, alternate } => {
            finish_optimal(&x_red, &y_red, alternate)
        }
        RouteOutcome::Infeasible { ray_red } => {
            let mut ray = vec![Rational::zero(); nrows];
            for (row, r) in pre.rows.iter().zip(&ray_red) {
                ray[row.origin] = r.clone();
            }
            let ray = lift_multipliers(&columns, &pre.events, ray, &vec![Rational::zero(); nvars]);
            debug_assert!(verify_infeasibility_ray(lp, &ray));
            LpSolution::new(
                Status::Infeasible,
                CertificateKind::InfeasibilityRay,
                Vec::new(),
                ray,
                Rational::zero(),
                false,
            )
        }
        RouteOutcome::Unbounded { dir_red } => {
            let mut dir = vec![Rational::zero(); nvars];
            for (red_j, &j) in var_map.iter().enumerate() {
                dir[j] = dir_red[red_j].clone();
            }
            debug_assert!(verify_unbounded_ray(lp, &dir));
            let rate = lp.objective_value(&dir);
            LpSolution::new(
                Status::Unbounded,
                CertificateKind::UnboundedRay,
                dir,
                Vec::new(),
                rate,
                false,
            )
        }
    }
}

// ---------------------------------------------------------------------------
// Presolve
// ---------------------------------------------------------------------------

struct FixEvent {
    var: usize,
    row: usize,
    coeff: Rational,
}

struct PreRow {
    coeffs: Vec<(usize, Rational)>,
    relation: Relation,
    rhs: Rational,
    origin: usize,
}

struct Presolved {
    fixed: Vec<Option<Rational>>,
    events: Vec<FixEvent>,
    rows: Vec<PreRow>,
    /// Sparse infeasibility evidence over original row indices; the lift
    /// turns it into a full ray.
    conflict: Option<Vec<(usize, Rational)>>,
}

fn presolve(lp: &LinearProgram) -> Presolved {
    let nvars = lp.num_variables();
    struct Work {
        coeffs: HashMap<usize, Rational>,
        relation: Relation,
        rhs: Rational,
        alive: bool,
    }
    let mut work: Vec<Work> = lp
        .constraints()
        .iter()
        .map(|c| Work {
            coeffs: c.coeffs().iter().cloned().collect(),
            relation: c.relation(),
            rhs: c.rhs().clone(),
            alive: true,
        })
        .collect();
    let mut var_rows: Vec<Vec<usize>> = vec![Vec::new(); nvars];
    for (i, w) in work.iter().enumerate() {
        for &j in w.coeffs.keys() {
            var_rows[j].push(i);
        }
    }

    let mut fixed: Vec<Option<Rational>> = vec![None; nvars];
    let mut events: Vec<FixEvent> = Vec::new();
    let mut queue: Vec<usize> = (0..work.len()).collect();
    let mut conflict: Option<Vec<(usize, Rational)>> = None;

    'outer: while let Some(i) = queue.pop() {
        if !work[i].alive {
            continue;
        }
        if work[i].coeffs.is_empty() {
            let rhs = &work[i].rhs;
            let consistent = match work[i].relation {
                Relation::Le => !rhs.is_negative(),
                Relation::Eq => rhs.is_zero(),
                Relation::Ge => !rhs.is_positive(),
            };
            if consistent {
                work[i].alive = false;
                continue;
            }
            // 0 <= negative / 0 = nonzero / 0 >= positive: one row suffices.
            let mult = match work[i].relation {
                Relation::Le => -Rational::one(),
                Relation::Ge => Rational::one(),
                Relation::Eq => {
                    if rhs.is_positive() {
                        Rational::one()
                    } else {
                        -Rational::one()
                    }
                }
            };
            conflict = Some(vec![(i, mult)]);
            break 'outer;
        }
        if work[i].relation == Relation::Eq && work[i].coeffs.len() == 1 {
            let (&var, coeff) = work[i].coeffs.iter().next().unwrap();
            let coeff = coeff.clone();
            let value = &work[i].rhs / &coeff;
            work[i].alive = false;
            fixed[var] = Some(value.clone());
            events.push(FixEvent { var, row: i, coeff });
            for &other in &var_rows[var] {
                if other == i || !work[other].alive {
                    continue;
                }
                if let Some(a) = work[other].coeffs.remove(&var) {
                    let delta = &a * &value;
                    work[other].rhs -= delta;
                    queue.push(other);
                }
            }
        }
    }

    if conflict.is_some() {
        return Presolved { fixed, events, rows: Vec::new(), conflict };
    }

    // Deduplicate rows that agree after positive scaling, keeping the
    // tighter right-hand side, and detect pairwise contradictions.
    struct Group {
        eq: Option<(usize, Rational, Rational)>, // row, scale, scaled rhs
        le: Option<(usize, Rational, Rational)>,
        ge: Option<(usize, Rational, Rational)>,
    }
    let mut keep = vec![false; work.len()];
    let mut groups: HashMap<Vec<(usize, Rational)>, usize> = HashMap::new();
    let mut group_list: Vec<Group> = Vec::new();
    for (i, w) in work.iter().enumerate() {
        if !w.alive {
            continue;
        }
        let mut coeffs: Vec<(usize, Rational)> =
            w.coeffs.iter().map(|(j, v)| (*j, v.clone())).collect();
        coeffs.sort_by_key(|(j, _)| *j);
        let scale = coeffs[0].1.abs().recip();
        let key: Vec<(usize, Rational)> =
            coeffs.iter().map(|(j, v)| (*j, v * &scale)).collect();
        let rhs = &w.rhs * &scale;
        let slot = *groups.entry(key).or_insert_with(|| {
            group_list.push(Group { eq: None, le: None, ge: None });
            group_list.len() - 1
        });
        let group = &mut group_list[slot];
        let entry = (i, scale, rhs);
        match w.relation {
            Relation::Eq => match &group.eq {
                None => {
                    keep[i] = true;
                    group.eq = Some(entry);
                }
                Some((_, _, prev_rhs)) => {
                    if *prev_rhs != entry.2 {
                        conflict = Some(pair_conflict(group.eq.as_ref().unwrap(), &entry));
                        break;
                    }
                }
            },
            Relation::Le => match &group.le {
                None => {
                    keep[i] = true;
                    group.le = Some(entry);
                }
                Some(prev) => {
                    if entry.2 < prev.2 {
                        keep[prev.0] = false;
                        keep[i] = true;
                        group.le = Some(entry);
                    }
                }
            },
            Relation::Ge => match &group.ge {
                None => {
                    keep[i] = true;
                    group.ge = Some(entry);
                }
                Some(prev) => {
                    if entry.2 > prev.2 {
                        keep[prev.0] = false;
                        keep[i] = true;
                        group.ge = Some(entry);
                    }
                }
            },
        }
        if conflict.is_some() {
            break;
        }
    }

    if conflict.is_none() {
        for group in &group_list {
            // eq vs le: activity forced to rhs_eq must respect <= rhs_le.
            if let (Some(eq), Some(le)) = (&group.eq, &group.le) {
                if eq.2 > le.2 {
                    conflict = Some(vec![
                        (eq.0, eq.1.clone()),
                        (le.0, -le.1.clone()),
                    ]);
                    break;
                }
                keep[le.0] = false;
            }
            if let (Some(eq), Some(ge)) = (&group.eq, &group.ge) {
                if eq.2 < ge.2 {
                    conflict = Some(vec![
                        (eq.0, -eq.1.clone()),
                        (ge.0, ge.1.clone()),
                    ]);
                    break;
                }
                keep[ge.0] = false;
            }
            if group.eq.is_none() {
                if let (Some(le), Some(ge)) = (&group.le, &group.ge) {
                    if ge.2 > le.2 {
                        conflict = Some(vec![
                            (ge.0, ge.1.clone()),
                            (le.0, -le.1.clone()),
                        ]);
                        break;
                    }
                }
            }
        }
    }

    if conflict.is_some() {
        return Presolved { fixed, events, rows: Vec::new(), conflict };
    }

    let rows = work
        .iter()
        .enumerate()
        .filter(|(i, w)| w.alive && keep[*i])
        .map(|(i, w)| {
            let mut coeffs: Vec<(usize, Rational)> =
                w.coeffs.iter().map(|(j, v)| (*j, v.clone())).collect();
            coeffs.sort_by_key(|(j, _)| *j);
            PreRow { coeffs, relation: w.relation, rhs: w.rhs.clone(), origin: i }
        })
        .collect();
    Presolved { fixed, events, rows, conflict: None }
}

/// Combine two scaled-identical rows into `0 >= positive` evidence. `a`
/// carries the larger scaled rhs, so `a - b` has positive value.
fn pair_conflict(a: &(usize, Rational, Rational), b: &(usize, Rational, Rational)) -> Vec<(usize, Rational)> {
    if a.2 > b.2 {
        vec![(a.0, a.1.clone()), (b.0, -b.1.clone())]
    } else {
        vec![(b.0, b.1.clone()), (a.0, -a.1.clone())]
    }
}

/// Fill in multipliers for the rows consumed by presolve so that the full
/// vector satisfies the stationarity equations `A^T y = target` on every
/// eliminated variable. Processing events in reverse order keeps each
/// equation triangular in the remaining unknown.
fn lift_multipliers(
    columns: &[Vec<(usize, Rational)>],
    events: &[FixEvent],
    mut y: Vec<Rational>,
    target: &[Rational],
) -> Vec<Rational> {
    for ev in events.iter().rev() {
        let mut sum = Rational::zero();
        for (row, coeff) in &columns[ev.var] {
            if *row != ev.row {
                sum += coeff * &y[*row];
            }
        }
        y[ev.row] = (target[ev.var].clone() - sum) / &ev.coeff;
    }
    y
}

// ---------------------------------------------------------------------------
// Routes: reduced model -> core standard form and back
// ---------------------------------------------------------------------------

struct RedRow {
    coeffs: Vec<(usize, Rational)>,
    relation: Relation,
    rhs: Rational,
}

enum RouteOutcome {
    Optimal {
        x_red: Vec<Rational>,
        y_red: Vec<Rational>,
        alternate: bool,
    },
    Infeasible {
        ray_red: Vec<Rational>,
    },
    Unbounded {
        dir_red: Vec<Rational>,
    },
}

/// Positive factor clearing every denominator in the row.
fn denominator_lcm<'a>(values: impl Iterator<Item = &'a Rational>) -> BigInt {
    let mut acc = BigInt::one();
    for v in values {
        acc = acc.lcm(v.denom());
    }
    acc
}

fn solve_via_primal(rows: &[RedRow], c_red: &[Rational], rule: PivotRule) -> RouteOutcome {
    let nred = c_red.len();
    let m = rows.len();
    let nslack = rows
        .iter()
        .filter(|r| r.relation != Relation::Eq)
        .count();
    let ncols = 2 * nred + nslack;

    let mut dense = vec![vec![Rational::zero(); ncols]; m];
    let mut rhs = Vec::with_capacity(m);
    let mut cost = vec![Rational::zero(); ncols];
    // Unscaling data: y_red[i] = w[i] * lambda[i] * sigma[i].
    let mut unscale = Vec::with_capacity(m);

    for j in 0..nred {
        cost[2 * j] = c_red[j].clone();
        cost[2 * j + 1] = -c_red[j].clone();
    }

    let mut slack_at = 2 * nred;
    for (i, row) in rows.iter().enumerate() {
        let sigma = if row.rhs.is_negative() { -Rational::one() } else { Rational::one() };
        let lambda = Rational::from(denominator_lcm(
            row.coeffs.iter().map(|(_, v)| v).chain(std::iter::once(&row.rhs)),
        ));
        let factor = &sigma * &lambda;
        for (j, v) in &row.coeffs {
            let scaled = v * &factor;
            dense[i][2 * j] = scaled.clone();
            dense[i][2 * j + 1] = -scaled;
        }
        rhs.push(&row.rhs * &factor);
        let oriented = match (row.relation, sigma.is_negative()) {
            (rel, false) => rel,
            (Relation::Le, true) => Relation::Ge,
            (Relation::Ge, true) => Relation::Le,
            (Relation::Eq, true) => Relation::Eq,
        };
        match oriented {
            Relation::Le => {
                dense[i][slack_at] = Rational::one();
                slack_at += 1;
            }
            Relation::Ge => {
                dense[i][slack_at] = -Rational::one();
                slack_at += 1;
            }
            Relation::Eq => {}
        }
        unscale.push(factor);
    }

    let core = CoreProblem { rows: dense, rhs, cost, ncols };
    match solve_core(core, rule) {
        CoreOutcome::Optimal { x, w, zero_reduced_nonbasic, basis, .. } => {
            let x_red: Vec<Rational> = (0..nred)
                .map(|j| &x[2 * j] - &x[2 * j + 1])
                .collect();
            let y_red: Vec<Rational> = (0..m).map(|i| &w[i] * &unscale[i]).collect();
            // A zero reduced cost on a column whose split twin is off the
            // basis hints at another optimal vertex.
            let basic = |col: usize| basis.contains(&col);
            let alternate = zero_reduced_nonbasic.iter().any(|&col| {
                if col < 2 * nred {
                    let twin = col ^ 1;
                    !basic(twin)
                } else {
                    true
                }
            });
            RouteOutcome::Optimal { x_red, y_red, alternate }
        }
        CoreOutcome::Infeasible { farkas } => {
            let ray_red: Vec<Rational> = (0..m).map(|i| -(&farkas[i] * &unscale[i])).collect();
            RouteOutcome::Infeasible { ray_red }
        }
        CoreOutcome::Unbounded { ray } => {
            let dir_red: Vec<Rational> = (0..nred)
                .map(|j| &ray[2 * j] - &ray[2 * j + 1])
                .collect();
            RouteOutcome::Unbounded { dir_red }
        }
    }
}

/// Solve through the dual when the reduced model is row-heavy. Returns None
/// when the dual core is itself infeasible (primal unbounded or infeasible),
/// in which case the caller falls back to the primal route.
fn solve_via_dual(rows: &[RedRow], c_red: &[Rational], rule: PivotRule) -> Option<RouteOutcome> {
    let nred = c_red.len();
    let m = rows.len();

    // Core rows are the stationarity equations, one per reduced variable,
    // oriented and scaled like any other row.
    let mut sigma = Vec::with_capacity(nred);
    for c in c_red {
        sigma.push(if c.is_negative() { -Rational::one() } else { Rational::one() });
    }

    // Columns: y_i >= 0 for <=-rows, y_i = -z for >=-rows, split for =-rows.
    // col_sign[k] = (row index, sign s_i of this column).
    let mut col_sign: Vec<(usize, Rational)> = Vec::new();
    for (i, row) in rows.iter().enumerate() {
        match row.relation {
            Relation::Le => col_sign.push((i, Rational::one())),
            Relation::Ge => col_sign.push((i, -Rational::one())),
            Relation::Eq => {
                col_sign.push((i, Rational::one()));
                col_sign.push((i, -Rational::one()));
            }
        }
    }
    let ncols = col_sign.len();

    let mut dense = vec![vec![Rational::zero(); ncols]; nred];
    let mut cost = vec![Rational::zero(); ncols];
    for (k, (i, s)) in col_sign.iter().enumerate() {
        cost[k] = -(&rows[*i].rhs * s);
        for (j, v) in &rows[*i].coeffs {
            dense[*j][k] = v * s;
        }
    }
    // Scale stationarity rows: entries get lambda*sigma, rhs = c * lambda*sigma.
    let mut unscale = Vec::with_capacity(nred);
    let mut rhs = Vec::with_capacity(nred);
    for j in 0..nred {
        let lambda = Rational::from(denominator_lcm(
            dense[j].iter().chain(std::iter::once(&c_red[j])),
        ));
        let factor = &sigma[j] * &lambda;
        for v in dense[j].iter_mut() {
            *v *= &factor;
        }
        rhs.push(&c_red[j] * &factor);
        unscale.push(factor);
    }

    let core = CoreProblem { rows: dense, rhs, cost, ncols };
    match solve_core(core, rule) {
        CoreOutcome::Optimal { x: z, w, degenerate_basic, .. } => {
            let mut y_red = vec![Rational::zero(); m];
            for (k, (i, s)) in col_sign.iter().enumerate() {
                y_red[*i] += s * &z[k];
            }
            let x_red: Vec<Rational> = (0..nred).map(|j| -(&w[j] * &unscale[j])).collect();
            Some(RouteOutcome::Optimal { x_red, y_red, alternate: degenerate_basic })
        }
        CoreOutcome::Unbounded { ray } => {
            // An unbounded dual certifies primal infeasibility.
            let mut y_ray = vec![Rational::zero(); m];
            for (k, (i, s)) in col_sign.iter().enumerate() {
                y_ray[*i] += s * &ray[k];
            }
            let ray_red: Vec<Rational> = y_ray.into_iter().map(|v| -v).collect();
            Some(RouteOutcome::Infeasible { ray_red })
        }
        CoreOutcome::Infeasible { .. } => None,
    }
}

// ---------------------------------------------------------------------------
// Core: max c.x  s.t.  A x = b, x >= 0, with b >= 0 on entry
// ---------------------------------------------------------------------------

struct CoreProblem {
    rows: Vec<Vec<Rational>>,
    rhs: Vec<Rational>,
    cost: Vec<Rational>,
    ncols: usize,
}

enum CoreOutcome {
    Optimal {
        /// Values per structural/slack column.
        x: Vec<Rational>,
        /// Multipliers per row (c_B B^-1, read off the artificial columns).
        w: Vec<Rational>,
        /// Nonbasic non-artificial columns with zero reduced cost.
        zero_reduced_nonbasic: Vec<usize>,
        /// Some basic variable sits at zero.
        degenerate_basic: bool,
        basis: Vec<usize>,
    },
    /// Phase 1 could not drive the artificials to zero; `farkas` satisfies
    /// A^T w >= 0 (over real columns) and b^T w < 0.
    Infeasible { farkas: Vec<Rational> },
    /// Improving direction per column.
    Unbounded { ray: Vec<Rational> },
}

struct Tableau {
    m: usize,
    ncols: usize,
    width: usize,
    rows: Vec<Vec<Rational>>,
    rhs: Vec<Rational>,
    basis: Vec<usize>,
    objrow: Vec<Rational>,
    rule: PivotRule,
    degenerate_streak: u32,
}

const DEGENERATE_LIMIT: u32 = 500;

impl Tableau {
    fn pivot(&mut self, r: usize, col: usize) {
        let inv = self.rows[r][col].clone().recip();
        if !inv.is_one() {
            for v in self.rows[r].iter_mut() {
                if !v.is_zero() {
                    *v *= &inv;
                }
            }
            self.rhs[r] *= &inv;
        }
        let pivot_row = self.rows[r].clone();
        let pivot_rhs = self.rhs[r].clone();
        for i in 0..self.m {
            if i == r {
                continue;
            }
            let factor = self.rows[i][col].clone();
            if factor.is_zero() {
                continue;
            }
            for (v, pv) in self.rows[i].iter_mut().zip(&pivot_row) {
                if !pv.is_zero() {
                    *v -= &factor * pv;
                }
            }
            self.rhs[i] -= &factor * &pivot_rhs;
        }
        let factor = self.objrow[col].clone();
        if !factor.is_zero() {
            for (v, pv) in self.objrow.iter_mut().zip(&pivot_row) {
                if !pv.is_zero() {
                    *v -= &factor * pv;
                }
            }
        }
        self.basis[r] = col;
    }

    /// Entering column among the first `limit` columns, by the active rule.
    fn entering(&mut self, limit: usize) -> Option<usize> {
        match self.rule {
            PivotRule::Bland => (0..limit).find(|&j| self.objrow[j].is_positive()),
            PivotRule::DantzigThenBland => {
                let mut best: Option<usize> = None;
                for j in 0..limit {
                    if self.objrow[j].is_positive()
                        && best.is_none_or(|b| self.objrow[j] > self.objrow[b])
                    {
                        best = Some(j);
                    }
                }
                best
            }
        }
    }

    /// Lowest-ratio blocking row; ties by smallest basic variable index.
    fn leaving(&self, col: usize) -> Option<usize> {
        let mut best: Option<(usize, Rational)> = None;
        for i in 0..self.m {
            if !self.rows[i][col].is_positive() {
                continue;
            }
            let ratio = &self.rhs[i] / &self.rows[i][col];
            match &best {
                None => best = Some((i, ratio)),
                Some((bi, bratio)) => {
                    if ratio < *bratio || (ratio == *bratio && self.basis[i] < self.basis[*bi]) {
                        best = Some((i, ratio));
                    }
                }
            }
        }
        best.map(|(i, _)| i)
    }

    /// Run pivots until no entering column remains. Returns the entering
    /// column if the problem is unbounded in it.
    fn run(&mut self, limit: usize) -> Option<usize> {
        loop {
            let col = self.entering(limit)?;
            let Some(row) = self.leaving(col) else {
                return Some(col);
            };
            if self.rule == PivotRule::DantzigThenBland {
                if self.rhs[row].is_zero() {
                    self.degenerate_streak += 1;
                    if self.degenerate_streak > DEGENERATE_LIMIT {
                        self.rule = PivotRule::Bland;
                    }
                } else {
                    self.degenerate_streak = 0;
                }
            }
            self.pivot(row, col);
        }
    }
}

fn solve_core(p: CoreProblem, rule: PivotRule) -> CoreOutcome {
    let m = p.rows.len();
    let ncols = p.ncols;
    let width = ncols + m;

    let mut rows = p.rows;
    for (i, row) in rows.iter_mut().enumerate() {
        row.resize(width, Rational::zero());
        row[ncols + i] = Rational::one();
    }
    debug_assert!(p.rhs.iter().all(|b| !b.is_negative()));

    let mut t = Tableau {
        m,
        ncols,
        width,
        rows,
        rhs: p.rhs,
        basis: (ncols..width).collect(),
        objrow: Vec::new(),
        rule,
        degenerate_streak: 0,
    };

    // Phase 1: maximize -(sum of artificials). With the all-artificial basis
    // the reduced cost of column j is the column sum over rows.
    t.objrow = vec![Rational::zero(); t.width];
    for j in 0..t.ncols {
        let mut s = Rational::zero();
        for i in 0..t.m {
            s += &t.rows[i][j];
        }
        t.objrow[j] = s;
    }
    let unbounded = t.run(t.ncols);
    debug_assert!(unbounded.is_none(), "phase 1 objective is bounded by zero");

    let infeasibility: Rational = (0..t.m)
        .filter(|&i| t.basis[i] >= t.ncols)
        .map(|i| t.rhs[i].clone())
        .sum();
    if !infeasibility.is_zero() {
        // w_i = -1 - objrow[artificial_i] under phase-1 costs.
        let farkas: Vec<Rational> = (0..t.m)
            .map(|i| -Rational::one() - &t.objrow[t.ncols + i])
            .collect();
        return CoreOutcome::Infeasible { farkas };
    }

    // Evict artificials stuck in the basis at level zero; rows where no real
    // column has a nonzero entry are redundant and stay frozen.
    for i in 0..t.m {
        if t.basis[i] >= t.ncols {
            debug_assert!(t.rhs[i].is_zero());
            if let Some(col) = (0..t.ncols).find(|&j| !t.rows[i][j].is_zero()) {
                t.pivot(i, col);
            }
        }
    }

    // Phase 2 objective row: c_j - c_B . (column j).
    t.objrow = vec![Rational::zero(); t.width];
    let basic_cost: Vec<Rational> = t
        .basis
        .iter()
        .map(|&b| if b < t.ncols { p.cost[b].clone() } else { Rational::zero() })
        .collect();
    for j in 0..t.width {
        let mut s = if j < t.ncols { p.cost[j].clone() } else { Rational::zero() };
        for (cb, row) in basic_cost.iter().zip(&t.rows) {
            if !cb.is_zero() && !row[j].is_zero() {
                s -= cb * &row[j];
            }
        }
        t.objrow[j] = s;
    }

    if let Some(col) = t.run(t.ncols) {
        let mut ray = vec![Rational::zero(); t.ncols];
        ray[col] = Rational::one();
        for i in 0..t.m {
            if t.basis[i] < t.ncols && !t.rows[i][col].is_zero() {
                ray[t.basis[i]] = -t.rows[i][col].clone();
            }
        }
        return CoreOutcome::Unbounded { ray };
    }

    let mut x = vec![Rational::zero(); t.ncols];
    for i in 0..t.m {
        if t.basis[i] < t.ncols {
            x[t.basis[i]] = t.rhs[i].clone();
        }
    }
    // Multipliers from the artificial block, which holds B^-1.
    let basic_cost: Vec<Rational> = t
        .basis
        .iter()
        .map(|&b| if b < t.ncols { p.cost[b].clone() } else { Rational::zero() })
        .collect();
    let w: Vec<Rational> = (0..t.m)
        .map(|i| {
            let mut s = Rational::zero();
            for (cb, row) in basic_cost.iter().zip(&t.rows) {
                if !cb.is_zero() {
                    s += cb * &row[t.ncols + i];
                }
            }
            s
        })
        .collect();
    let zero_reduced_nonbasic: Vec<usize> = (0..t.ncols)
        .filter(|&j| !t.basis.contains(&j) && t.objrow[j].is_zero())
        .collect();
    let degenerate_basic = (0..t.m).any(|i| t.basis[i] < t.ncols && t.rhs[i].is_zero());
    CoreOutcome::Optimal {
        x,
        w,
        zero_reduced_nonbasic,
        degenerate_basic,
        basis: t.basis,
    }
}
