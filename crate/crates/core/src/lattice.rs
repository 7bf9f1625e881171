//! The lattice of subspaces of F_q^n.
//!
//! Subspaces are identified by their unique reduced row-echelon basis and
//! enumerated in a fixed global order: by dimension, then lexicographically
//! on the flattened basis matrix. Identifiers are positions in that order,
//! so they are stable across runs and usable as LP variable names.
//!
//! Besides enumeration the module provides containment and cover structure,
//! duals, minimum weights, Gaussian binomials, the Möbius function of the
//! lattice, and the zeta/Möbius transforms that convert between point-mass
//! and cumulative solution vectors.

use std::collections::HashMap;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::field::{FieldSpec, FqElement, FqVector};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LatticeError {
    #[error("lattice of F_{q}^{n} has {count} subspaces, exceeding the cap of {cap}")]
    TooManySubspaces { q: u32, n: usize, count: String, cap: u64 },
}

/// Position of a subspace in the canonical enumeration of a lattice.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SubspaceId(pub usize);

impl std::fmt::Display for SubspaceId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Minimum Hamming weight of the nonzero vectors of a subspace.
///
/// The zero space has no nonzero vector; its minimum weight is `Infinity`,
/// which keeps "violates distance d" equivalent to `min_weight <= d - 1`
/// without a numeric sentinel leaking into comparisons.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum MinWeight {
    Finite(usize),
    Infinity,
}

impl std::fmt::Display for MinWeight {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            MinWeight::Finite(w) => write!(f, "{w}"),
            MinWeight::Infinity => write!(f, "inf"),
        }
    }
}

/// A subspace of F_q^n in canonical form: basis rows in reduced row-echelon
/// form with strictly increasing pivot columns.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Subspace {
    dim: usize,
    basis: Vec<FqVector>,
    pivots: Vec<usize>,
}

impl Subspace {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn basis(&self) -> &[FqVector] {
        &self.basis
    }

    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }

    /// Basis rows as digit strings over the alphabet of F_q.
    pub fn row_strings(&self) -> Vec<String> {
        self.basis.iter().map(|r| r.digit_string()).collect()
    }

    fn flat_key(&self) -> Vec<u32> {
        self.basis
            .iter()
            .flat_map(|r| r.entries().iter().map(|e| e.value()))
            .collect()
    }
}

/// Reduce `rows` to RREF over `spec`; returns the nonzero rows and their
/// pivot columns.
pub(crate) fn rref(spec: &FieldSpec, rows: &[FqVector]) -> (Vec<FqVector>, Vec<usize>) {
    let mut mat: Vec<FqVector> = rows.to_vec();
    if mat.is_empty() {
        return (Vec::new(), Vec::new());
    }
    let n = mat[0].len();
    let mut pivots = Vec::new();
    let mut r = 0usize;
    for col in 0..n {
        let Some(sel) = (r..mat.len()).find(|&i| !mat[i].entry(col).is_zero()) else {
            continue;
        };
        mat.swap(r, sel);
        let inv = spec.inv(mat[r].entry(col)).expect("pivot is nonzero");
        mat[r] = spec.vec_scale(inv, &mat[r]);
        for i in 0..mat.len() {
            if i != r && !mat[i].entry(col).is_zero() {
                let factor = spec.neg(mat[i].entry(col));
                mat[i] = spec.vec_add(&mat[i], &spec.vec_scale(factor, &mat[r]));
            }
        }
        pivots.push(col);
        r += 1;
        if r == mat.len() {
            break;
        }
    }
    mat.truncate(r);
    (mat, pivots)
}

/// Number of k-dimensional subspaces of F_q^n as an exact integer.
/// Returns 0 when k > n.
pub fn gaussian_binomial(n: usize, k: usize, q: u32) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let q = BigUint::from(q);
    let mut numer = BigUint::one();
    let mut denom = BigUint::one();
    for i in 0..k {
        numer *= q.pow((n - i) as u32) - 1u32;
        denom *= q.pow((i + 1) as u32) - 1u32;
    }
    numer / denom
}

/// Total number of subspaces of F_q^n.
pub fn subspace_count(n: usize, q: u32) -> BigUint {
    (0..=n).map(|k| gaussian_binomial(n, k, q)).sum()
}

/// Dense bit matrix used for O(1) containment queries.
#[derive(Clone, Debug)]
struct BitMatrix {
    width_words: usize,
    bits: Vec<u64>,
}

impl BitMatrix {
    fn new(rows: usize, cols: usize) -> Self {
        let width_words = cols.div_ceil(64);
        BitMatrix {
            width_words,
            bits: vec![0; rows * width_words],
        }
    }

    fn set(&mut self, r: usize, c: usize) {
        self.bits[r * self.width_words + c / 64] |= 1 << (c % 64);
    }

    fn get(&self, r: usize, c: usize) -> bool {
        self.bits[r * self.width_words + c / 64] & (1 << (c % 64)) != 0
    }
}

/// The fully materialized subspace lattice of F_q^n.
///
/// Immutable after construction; all queries are pure.
#[derive(Clone, Debug)]
pub struct Lattice {
    spec: FieldSpec,
    n: usize,
    spaces: Vec<Subspace>,
    stratum_start: Vec<usize>,
    id_by_key: HashMap<Vec<u32>, SubspaceId>,
    leq: BitMatrix,
    above: Vec<Vec<SubspaceId>>,
    below: Vec<Vec<SubspaceId>>,
    covers_up: Vec<Vec<SubspaceId>>,
    covers_down: Vec<Vec<SubspaceId>>,
    min_weights: Vec<MinWeight>,
    duals: Vec<SubspaceId>,
}

impl Lattice {
    /// Enumerate the lattice with the default subspace cap.
    pub fn enumerate(spec: &FieldSpec, n: usize) -> Result<Lattice, LatticeError> {
        Self::enumerate_with_cap(spec, n, crate::Caps::default().max_subspaces)
    }

    /// Enumerate the lattice, refusing to materialize more than `cap` subspaces.
    pub fn enumerate_with_cap(
        spec: &FieldSpec,
        n: usize,
        cap: u64,
    ) -> Result<Lattice, LatticeError> {
        let total = subspace_count(n, spec.q());
        if total > BigUint::from(cap) {
            return Err(LatticeError::TooManySubspaces {
                q: spec.q(),
                n,
                count: total.to_string(),
                cap,
            });
        }

        let mut spaces = Vec::new();
        for dim in 0..=n {
            let mut stratum = enumerate_rref(spec, n, dim);
            stratum.sort_by_key(|a| a.flat_key());
            spaces.extend(stratum);
        }

        let count = spaces.len();
        let mut stratum_start = vec![0usize; n + 2];
        for s in &spaces {
            stratum_start[s.dim + 1] += 1;
        }
        for d in 0..=n {
            stratum_start[d + 1] += stratum_start[d];
        }

        let mut id_by_key = HashMap::with_capacity(count);
        for (i, s) in spaces.iter().enumerate() {
            id_by_key.insert(s.flat_key(), SubspaceId(i));
        }

        let mut lat = Lattice {
            spec: spec.clone(),
            n,
            spaces,
            stratum_start,
            id_by_key,
            leq: BitMatrix::new(count, count),
            above: vec![Vec::new(); count],
            below: vec![Vec::new(); count],
            covers_up: vec![Vec::new(); count],
            covers_down: vec![Vec::new(); count],
            min_weights: Vec::with_capacity(count),
            duals: Vec::with_capacity(count),
        };
        lat.build_containment();
        lat.build_min_weights();
        lat.build_duals();
        Ok(lat)
    }

    fn build_containment(&mut self) {
        let count = self.spaces.len();
        for s in 0..count {
            for t in 0..count {
                let (ds, dt) = (self.spaces[s].dim, self.spaces[t].dim);
                if ds > dt {
                    continue;
                }
                let contained = self.spaces[s]
                    .basis
                    .iter()
                    .all(|row| self.member_of(row, t));
                if contained {
                    self.leq.set(s, t);
                    self.above[s].push(SubspaceId(t));
                    self.below[t].push(SubspaceId(s));
                    if dt == ds + 1 {
                        self.covers_up[s].push(SubspaceId(t));
                        self.covers_down[t].push(SubspaceId(s));
                    }
                }
            }
        }
    }

    fn build_min_weights(&mut self) {
        for s in &self.spaces {
            if s.dim == 0 {
                self.min_weights.push(MinWeight::Infinity);
                continue;
            }
            let w = nonzero_vectors(&self.spec, &s.basis)
                .map(|v| v.hamming_weight())
                .min()
                .expect("nonzero subspace has nonzero vectors");
            self.min_weights.push(MinWeight::Finite(w));
        }
    }

    fn build_duals(&mut self) {
        for i in 0..self.spaces.len() {
            let kernel = self.kernel_basis(i);
            let id = self.canonicalize(&kernel);
            self.duals.push(id);
        }
    }

    /// Basis of the null space of the basis matrix of space `i` under the
    /// standard bilinear form.
    fn kernel_basis(&self, i: usize) -> Vec<FqVector> {
        let s = &self.spaces[i];
        let mut out = Vec::with_capacity(self.n - s.dim);
        for free in 0..self.n {
            if s.pivots.contains(&free) {
                continue;
            }
            let mut v = self.spec.zero_vector(self.n);
            v.set_entry(free, FqElement::ONE);
            for (row, &p) in s.basis.iter().zip(&s.pivots) {
                v.set_entry(p, self.spec.neg(row.entry(free)));
            }
            out.push(v);
        }
        out
    }

    /// Reduce `v` against the RREF basis of space `t`; membership holds iff
    /// the residue is zero.
    fn member_of(&self, v: &FqVector, t: usize) -> bool {
        let s = &self.spaces[t];
        let mut r = v.clone();
        for (row, &p) in s.basis.iter().zip(&s.pivots) {
            let c = r.entry(p);
            if !c.is_zero() {
                r = self.spec.vec_add(&r, &self.spec.vec_scale(self.spec.neg(c), row));
            }
        }
        r.is_zero()
    }

    pub fn spec(&self) -> &FieldSpec {
        &self.spec
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.spaces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.spaces.is_empty()
    }

    pub fn subspace(&self, id: SubspaceId) -> &Subspace {
        &self.spaces[id.0]
    }

    pub fn ids(&self) -> impl Iterator<Item = SubspaceId> {
        (0..self.spaces.len()).map(SubspaceId)
    }

    /// Ids of the subspaces of dimension `dim`, in canonical order.
    pub fn ids_of_dim(&self, dim: usize) -> impl Iterator<Item = SubspaceId> {
        let range = if dim > self.n {
            0..0
        } else {
            self.stratum_start[dim]..self.stratum_start[dim + 1]
        };
        range.map(SubspaceId)
    }

    pub fn zero_space(&self) -> SubspaceId {
        SubspaceId(0)
    }

    pub fn full_space(&self) -> SubspaceId {
        SubspaceId(self.spaces.len() - 1)
    }

    pub fn dim(&self, id: SubspaceId) -> usize {
        self.spaces[id.0].dim
    }

    /// |S| = q^dim(S).
    pub fn size_of(&self, id: SubspaceId) -> BigUint {
        BigUint::from(self.spec.q()).pow(self.dim(id) as u32)
    }

    /// Whether S <= T in the lattice.
    pub fn leq(&self, s: SubspaceId, t: SubspaceId) -> bool {
        self.leq.get(s.0, t.0)
    }

    /// All T with S <= T, in canonical order (includes S).
    pub fn above(&self, s: SubspaceId) -> &[SubspaceId] {
        &self.above[s.0]
    }

    /// All T with T <= S, in canonical order (includes S).
    pub fn below(&self, s: SubspaceId) -> &[SubspaceId] {
        &self.below[s.0]
    }

    /// All T > S with dim(T) = dim(S) + 1. Empty for the full space.
    pub fn covers(&self, s: SubspaceId) -> &[SubspaceId] {
        &self.covers_up[s.0]
    }

    /// All T < S with dim(T) = dim(S) - 1.
    pub fn covered_by(&self, s: SubspaceId) -> &[SubspaceId] {
        &self.covers_down[s.0]
    }

    pub fn min_weight(&self, s: SubspaceId) -> MinWeight {
        self.min_weights[s.0]
    }

    /// A subspace violates minimum distance d iff it contains a nonzero
    /// vector of weight at most d - 1.
    pub fn violates_distance(&self, s: SubspaceId, d: usize) -> bool {
        d > 0 && self.min_weights[s.0] <= MinWeight::Finite(d - 1)
    }

    pub fn dual(&self, s: SubspaceId) -> SubspaceId {
        self.duals[s.0]
    }

    /// Id of the span of the given vectors. The empty list spans {0}.
    pub fn canonicalize(&self, vectors: &[FqVector]) -> SubspaceId {
        assert!(
            vectors.iter().all(|v| v.len() == self.n),
            "canonicalize: vector length must equal n"
        );
        let (rows, _) = rref(&self.spec, vectors);
        let key: Vec<u32> = rows
            .iter()
            .flat_map(|r| r.entries().iter().map(|e| e.value()))
            .collect();
        *self
            .id_by_key
            .get(&key)
            .expect("every RREF matrix is enumerated")
    }

    pub fn contains_vector(&self, s: SubspaceId, v: &FqVector) -> bool {
        assert_eq!(v.len(), self.n, "vector length must equal n");
        self.member_of(v, s.0)
    }

    /// All q^dim vectors of the subspace, the zero vector first.
    pub fn vectors(&self, s: SubspaceId) -> Vec<FqVector> {
        let basis = &self.spaces[s.0].basis;
        let mut out = vec![self.spec.zero_vector(self.n)];
        out.extend(nonzero_vectors(&self.spec, basis));
        out
    }

    /// Möbius function of the lattice: (-1)^r q^(r choose 2) for S <= T with
    /// r = dim(T) - dim(S), and 0 when S is not below T.
    pub fn mobius(&self, s: SubspaceId, t: SubspaceId) -> BigInt {
        if !self.leq(s, t) {
            return BigInt::zero();
        }
        let r = (self.dim(t) - self.dim(s)) as u32;
        let mag = BigInt::from(self.spec.q()).pow(r * (r.saturating_sub(1)) / 2);
        if r.is_multiple_of(2) {
            mag
        } else {
            -mag
        }
    }

    /// Upward-sum transform: out[S] = sum over T >= S of input[T].
    ///
    /// Takes a point-mass vector to the cumulative vector it induces.
    pub fn zeta_transform(&self, point_mass: &[BigRational]) -> Vec<BigRational> {
        assert_eq!(point_mass.len(), self.len(), "vector must cover all subspaces");
        self.ids()
            .map(|s| {
                self.above(s)
                    .iter()
                    .map(|t| point_mass[t.0].clone())
                    .sum()
            })
            .collect()
    }

    /// Inverse of `zeta_transform`: out[S] = sum over T >= S of
    /// mobius(S, T) * input[T].
    pub fn mobius_transform(&self, cumulative: &[BigRational]) -> Vec<BigRational> {
        assert_eq!(cumulative.len(), self.len(), "vector must cover all subspaces");
        self.ids()
            .map(|s| {
                self.above(s)
                    .iter()
                    .map(|t| BigRational::from(self.mobius(s, *t)) * &cumulative[t.0])
                    .sum()
            })
            .collect()
    }

    /// Closed form of the full character sum over S^l at alpha: |S|^l when
    /// S lies in the dual of the span of alpha, and 0 otherwise.
    pub fn char_sum_full(&self, alpha: &[FqVector], s: SubspaceId) -> BigInt {
        let span_alpha = self.canonicalize(alpha);
        if self.leq(s, self.dual(span_alpha)) {
            BigInt::from(self.size_of(s)).pow(alpha.len() as u32)
        } else {
            BigInt::zero()
        }
    }

    /// Closed form of the mixed character/indicator sum over S^l.
    ///
    /// `chi_positions[i]` selects the character factor at coordinate i; the
    /// remaining coordinates contribute point indicators. The sum is
    /// |S|^(#characters) when S lies in the dual of the span of the character
    /// coordinates and every indicator coordinate of alpha lies in S; else 0.
    pub fn char_sum_partial(
        &self,
        alpha: &[FqVector],
        chi_positions: &[bool],
        s: SubspaceId,
    ) -> BigInt {
        assert_eq!(alpha.len(), chi_positions.len(), "tuple shape mismatch");
        let chi_vecs: Vec<FqVector> = alpha
            .iter()
            .zip(chi_positions)
            .filter(|(_, &is_chi)| is_chi)
            .map(|(v, _)| v.clone())
            .collect();
        let span_chi = self.canonicalize(&chi_vecs);
        if !self.leq(s, self.dual(span_chi)) {
            return BigInt::zero();
        }
        for (v, &is_chi) in alpha.iter().zip(chi_positions) {
            if !is_chi && !self.contains_vector(s, v) {
                return BigInt::zero();
            }
        }
        BigInt::from(self.size_of(s)).pow(chi_vecs.len() as u32)
    }

    /// One subspace per line: `id dim basis_rows_hex` with comma-joined rows
    /// and `-` for the empty basis of {0}.
    pub fn dump_line(&self, id: SubspaceId) -> String {
        let s = &self.spaces[id.0];
        let rows = if s.basis.is_empty() {
            "-".to_string()
        } else {
            s.row_strings().join(",")
        };
        format!("{} {} {}", id.0, s.dim, rows)
    }
}

/// All nonzero linear combinations of the given independent rows.
fn nonzero_vectors<'a>(
    spec: &'a FieldSpec,
    basis: &'a [FqVector],
) -> impl Iterator<Item = FqVector> + 'a {
    let k = basis.len();
    let q = spec.q() as u64;
    let total = q.pow(k as u32);
    (1..total).map(move |mut idx| {
        let mut acc = spec.zero_vector(basis.first().map_or(0, |b| b.len()));
        for row in basis {
            let c = (idx % q) as u32;
            idx /= q;
            if c != 0 {
                acc = spec.vec_add(&acc, &spec.vec_scale(spec.element(c).unwrap(), row));
            }
        }
        acc
    })
}

/// All dim-k subspaces of F_q^n as RREF matrices (unsorted).
fn enumerate_rref(spec: &FieldSpec, n: usize, dim: usize) -> Vec<Subspace> {
    if dim == 0 {
        return vec![Subspace {
            dim: 0,
            basis: Vec::new(),
            pivots: Vec::new(),
        }];
    }
    let mut out = Vec::new();
    let mut pivots = (0..dim).collect::<Vec<usize>>();
    loop {
        emit_for_pivots(spec, n, &pivots, &mut out);
        // Next pivot combination in lexicographic order.
        let mut i = dim;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if pivots[i] < n - (dim - i) {
                pivots[i] += 1;
                for j in i + 1..dim {
                    pivots[j] = pivots[j - 1] + 1;
                }
                break;
            }
        }
    }
}

fn emit_for_pivots(spec: &FieldSpec, n: usize, pivots: &[usize], out: &mut Vec<Subspace>) {
    let dim = pivots.len();
    let is_pivot: Vec<bool> = {
        let mut v = vec![false; n];
        for &p in pivots {
            v[p] = true;
        }
        v
    };
    // Free positions: in row i, the non-pivot columns right of pivot i.
    let mut free: Vec<(usize, usize)> = Vec::new();
    for (i, &p) in pivots.iter().enumerate() {
        for (col, &piv) in is_pivot.iter().enumerate().skip(p + 1) {
            if !piv {
                free.push((i, col));
            }
        }
    }
    let q = spec.q() as u64;
    let total = q.pow(free.len() as u32);
    for mut idx in 0..total {
        let mut basis = vec![spec.zero_vector(n); dim];
        for (i, &p) in pivots.iter().enumerate() {
            basis[i].set_entry(p, FqElement::ONE);
        }
        for &(row, col) in &free {
            let c = (idx % q) as u32;
            idx /= q;
            basis[row].set_entry(col, spec.element(c).unwrap());
        }
        out.push(Subspace {
            dim,
            basis,
            pivots: pivots.to_vec(),
        });
    }
}
