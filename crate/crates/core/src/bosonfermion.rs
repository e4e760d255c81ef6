//! The boson-fermion correspondence, made executable.
//!
//! Basis vectors of the charge-zero semi-infinite wedge space are
//! `v_lambda = z^{k_1} ^ z^{k_2} ^ ...` with `k_i = lambda_i - i` strictly
//! decreasing and `k_i = -i` for large `i`. The correspondence is the
//! coordinate-wise isomorphism `s_lambda <-> v_lambda` with the Schur
//! functions; the vacuum is `v_{}` (the empty partition).
//!
//! Operators `z^m f(z d/dz)` act on a wedge by the Leibniz rule slot by
//! slot; a zero-shift (diagonal) operator must be regularized:
//! `A-hat v = sum_i (f(k_i) - f(-i)) v`. Both directions of the
//! correspondence are built from the correspondence itself: `s_lambda` is
//! computed from the vacuum-coefficient formula
//! `v <-> < e^{sum p_m a_{-m}/m} v >_0`, and series are mapped to wedge
//! coordinates by a graded triangular solve against those Schur functions.

use crate::diffop::{apply, materialize, OpSpec};
use crate::error::{Error, Result};
use crate::laurent::LaurentZ;
use crate::rat::{factorial, Rat};
use crate::series::{Caps, Family, Monomial, Param, Series, Var, Window};
use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::{Mutex, OnceLock};

/// A partition: weakly decreasing positive parts.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Partition(Vec<u32>);

impl Partition {
    pub fn new(mut parts: Vec<u32>) -> Self {
        parts.retain(|&p| p > 0);
        parts.sort_unstable_by(|a, b| b.cmp(a));
        Partition(parts)
    }

    pub fn empty() -> Self {
        Partition(Vec::new())
    }

    pub fn parts(&self) -> &[u32] {
        &self.0
    }

    pub fn size(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `k_i = lambda_i - i` for 1-indexed `i` (0 parts beyond the length).
    pub fn k(&self, i: usize) -> i64 {
        let part = if i <= self.0.len() {
            self.0[i - 1] as i64
        } else {
            0
        };
        part - i as i64
    }

    /// All partitions of size at most `max`, graded by size.
    pub fn all_up_to(max: u32) -> Vec<Partition> {
        let mut out = vec![Partition::empty()];
        for n in 1..=max {
            out.extend(crate::hurwitz::partitions_of(n).into_iter().map(Partition));
        }
        out
    }
}

impl PartialOrd for Partition {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Partition {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.size()
            .cmp(&other.size())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, p) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{p}")?;
        }
        write!(f, ")")
    }
}

/// An energy-truncated element of the charge-zero wedge space: parameter
/// series coordinates over basis vectors `v_lambda` with `|lambda|` at most
/// the cap.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WedgeVector {
    coords: BTreeMap<Partition, Series>,
    energy_cap: u32,
}

impl WedgeVector {
    pub fn zero(energy_cap: u32) -> Self {
        WedgeVector {
            coords: BTreeMap::new(),
            energy_cap,
        }
    }

    pub fn vacuum(energy_cap: u32) -> Self {
        WedgeVector::basis(Partition::empty(), energy_cap)
    }

    pub fn basis(l: Partition, energy_cap: u32) -> Self {
        let mut v = WedgeVector::zero(energy_cap);
        v.accumulate(l, Series::one(crate::diffop::exact_coeff_caps(0)));
        v
    }

    pub fn energy_cap(&self) -> u32 {
        self.energy_cap
    }

    pub fn coords(&self) -> &BTreeMap<Partition, Series> {
        &self.coords
    }

    pub fn coord(&self, l: &Partition) -> Series {
        self.coords
            .get(l)
            .cloned()
            .unwrap_or_else(|| Series::zero(crate::diffop::exact_coeff_caps(0)))
    }

    pub fn is_zero(&self) -> bool {
        self.coords.is_empty()
    }

    fn accumulate(&mut self, l: Partition, c: Series) {
        if l.size() > self.energy_cap || c.is_zero() {
            return;
        }
        match self.coords.entry(l) {
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let sum = e.get().add(&c);
                if sum.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = sum;
                }
            }
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
        }
    }

    pub fn add(&self, other: &WedgeVector) -> WedgeVector {
        let mut out = self.clone();
        out.energy_cap = self.energy_cap.min(other.energy_cap);
        out.coords.retain(|l, _| l.size() <= out.energy_cap);
        for (l, c) in &other.coords {
            out.accumulate(l.clone(), c.clone());
        }
        out
    }

    pub fn scale(&self, c: &Rat) -> WedgeVector {
        let mut out = self.clone();
        if c.is_zero() {
            out.coords.clear();
            return out;
        }
        for v in out.coords.values_mut() {
            *v = v.scale(c);
        }
        out
    }

    /// Coordinate-wise term equality (caps of the coordinate series are
    /// bookkeeping, the terms are the content).
    pub fn same_coords(&self, other: &WedgeVector) -> bool {
        if self.coords.len() != other.coords.len() {
            return false;
        }
        self.coords.iter().all(|(l, c)| {
            other
                .coords
                .get(l)
                .map(|d| c.same_terms(d))
                .unwrap_or(false)
        })
    }
}

/// A one-diagonal operator `z^shift * f(z d/dz)`: acts by
/// `z^j -> f(j) z^{j + shift}`. `symbol` lists the coefficients of
/// `(z d/dz)^0, (z d/dz)^1, ...`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ZOp {
    pub shift: i64,
    pub symbol: Vec<Rat>,
}

impl ZOp {
    pub fn new(shift: i64, symbol: Vec<Rat>) -> Self {
        ZOp { shift, symbol }
    }

    /// `z^m`, the z-side of `a_m`.
    pub fn a(m: i64) -> Self {
        ZOp::new(m, vec![Rat::one()])
    }

    /// `z^m (z d/dz + (m+1)/2)`, the z-side of `Lambda_m`.
    pub fn lambda(m: i64) -> Self {
        ZOp::new(m, vec![Rat::new(m + 1, 2), Rat::one()])
    }

    /// `z^m (1/2 (z d/dz)^2 + (m+1)/2 z d/dz + (m+1)(m+2)/12)`,
    /// the z-side of `M_m`.
    pub fn m(m: i64) -> Self {
        ZOp::new(
            m,
            vec![
                Rat::new((m + 1) * (m + 2), 12),
                Rat::new(m + 1, 2),
                Rat::new(1, 2),
            ],
        )
    }

    /// The energy operator `z d/dz`.
    pub fn energy() -> Self {
        ZOp::new(0, vec![Rat::zero(), Rat::one()])
    }

    pub fn eval(&self, j: i64) -> Rat {
        let mut acc = Rat::zero();
        for c in self.symbol.iter().rev() {
            acc = acc * &Rat::from_int(j) + c;
        }
        acc
    }

    /// Operator composition: `(z^a f(zd)) (z^b g(zd)) = z^{a+b} f(zd + b) g(zd)`.
    pub fn compose(&self, other: &ZOp) -> ZOp {
        // f(j + b) as a polynomial in j
        let b = other.shift;
        let mut shifted = vec![Rat::zero(); self.symbol.len()];
        for (t, c) in self.symbol.iter().enumerate() {
            // c * (j + b)^t
            let mut pow = vec![Rat::one()]; // (j+b)^0
            for _ in 0..t {
                let mut next = vec![Rat::zero(); pow.len() + 1];
                for (d, v) in pow.iter().enumerate() {
                    next[d + 1] += &v.clone();
                    next[d] += &(v * &Rat::from_int(b));
                }
                pow = next;
            }
            if shifted.len() < pow.len() {
                shifted.resize(pow.len(), Rat::zero());
            }
            for (d, v) in pow.iter().enumerate() {
                shifted[d] += &(c * v);
            }
        }
        // multiply the polynomials shifted(j) * g(j)
        let mut symbol = vec![Rat::zero(); shifted.len() + other.symbol.len() - 1];
        for (i, a) in shifted.iter().enumerate() {
            for (j, c) in other.symbol.iter().enumerate() {
                symbol[i + j] += &(a * c);
            }
        }
        ZOp::new(self.shift + b, symbol)
    }

    pub fn sub(&self, other: &ZOp) -> ZOp {
        assert_eq!(
            self.shift, other.shift,
            "can only subtract parallel diagonals"
        );
        let n = self.symbol.len().max(other.symbol.len());
        let mut symbol = vec![Rat::zero(); n];
        for (i, c) in self.symbol.iter().enumerate() {
            symbol[i] += c;
        }
        for (i, c) in other.symbol.iter().enumerate() {
            symbol[i] -= &c.clone();
        }
        ZOp::new(self.shift, symbol)
    }
}

/// Applies the hat of a one-diagonal operator to a wedge vector: the
/// Leibniz rule for nonzero shifts, the regularized diagonal formula
/// `sum_i (f(k_i) - f(-i))` for shift zero.
pub fn hat_apply(op: &ZOp, v: &WedgeVector) -> WedgeVector {
    let mut out = WedgeVector::zero(v.energy_cap);
    for (l, c) in &v.coords {
        if op.shift == 0 {
            let mut eig = Rat::zero();
            for i in 1..=l.len() {
                eig += &(op.eval(l.k(i)) - op.eval(-(i as i64)));
            }
            out.accumulate(l.clone(), c.scale(&eig));
            continue;
        }
        // prefix long enough that every move stays inside it
        let n = l.len() + 2 * (op.shift.unsigned_abs() as usize + 1);
        let ks: Vec<i64> = (1..=n).map(|i| l.k(i)).collect();
        for slot in 0..n {
            let factor = op.eval(ks[slot]);
            if factor.is_zero() {
                continue;
            }
            let new_val = ks[slot] + op.shift;
            if ks
                .iter()
                .enumerate()
                .any(|(i, &k)| i != slot && k == new_val)
            {
                continue; // repeated exponent: the wedge vanishes
            }
            if new_val <= -(n as i64 + 1) {
                // collides with the untouched natural tail z^{-j}, j > n
                continue;
            }
            // position of new_val in the (still decreasing) remaining list
            let mut new_ks = ks.clone();
            new_ks.remove(slot);
            let pos = new_ks
                .iter()
                .position(|&k| k < new_val)
                .unwrap_or(new_ks.len());
            new_ks.insert(pos, new_val);
            // moving one element over |slot - pos| others flips the sign
            let sign = if (slot as i64 - pos as i64).rem_euclid(2) == 1 {
                -Rat::one()
            } else {
                Rat::one()
            };
            let parts: Vec<u32> = new_ks
                .iter()
                .enumerate()
                .map(|(i, &k)| (k + i as i64 + 1).max(0) as u32)
                .collect();
            debug_assert!(new_ks
                .iter()
                .enumerate()
                .all(|(i, &k)| k + i as i64 + 1 >= 0));
            out.accumulate(Partition::new(parts), c.scale(&(factor * &sign)));
        }
    }
    out
}

/// The Schur polynomial `s_lambda(p)`, computed from the vacuum-coefficient
/// formula `v <-> < e^{sum p_m a_{-m}/m} v >_0` and cached process-wide.
pub fn schur(l: &Partition) -> Series {
    static CACHE: OnceLock<Mutex<HashMap<Partition, Series>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(hit) = cache.lock().unwrap().get(l) {
        return hit.clone();
    }
    let n = l.size();
    let caps = Caps::weight_only(n);
    let mut out = Series::zero(caps);
    for mu in crate::hurwitz::partitions_of(n) {
        // apply prod a_{-m} over the parts of mu to v_lambda
        let mut v = WedgeVector::basis(l.clone(), n);
        for &m in &mu {
            v = hat_apply(&ZOp::a(-(m as i64)), &v);
            if v.is_zero() {
                break;
            }
        }
        let vac = v
            .coord(&Partition::empty())
            .coefficient_unchecked(&Monomial::one());
        if vac.is_zero() {
            continue;
        }
        // divide by prod m^{c_m} c_m! over multiplicities of mu
        let mut denom = Rat::one();
        let mut run = 0u32;
        for (i, &m) in mu.iter().enumerate() {
            denom *= &Rat::from_int(m as i64);
            run = if i > 0 && mu[i - 1] == m { run + 1 } else { 1 };
            denom *= &Rat::from_int(run as i64);
        }
        let mut mono = Monomial::one();
        for &m in &mu {
            mono = mono.times_var(Var::p(m), 1);
        }
        out.accumulate_clipped(mono, vac / denom);
    }
    if n == 0 {
        out = Series::one(Caps::weight_only(0));
    }
    cache.lock().unwrap().insert(l.clone(), out.clone());
    out
}

/// Writes a p-family series in wedge coordinates by a graded triangular
/// solve against the Schur basis. Requires `s` exact to at least the
/// energy cap.
pub fn boson_to_fermion(s: &Series, energy_cap: u32) -> WedgeVector {
    assert!(
        s.caps().weight >= energy_cap,
        "series caps {} below the energy cap {energy_cap}",
        s.caps().weight
    );
    let mut out = WedgeVector::zero(energy_cap);
    for w in 0..=energy_cap {
        let lambdas: Vec<Partition> = if w == 0 {
            vec![Partition::empty()]
        } else {
            crate::hurwitz::partitions_of(w)
                .into_iter()
                .map(Partition)
                .collect()
        };
        // monomial index for weight w
        let monos: Vec<Monomial> = lambdas
            .iter()
            .map(|mu| {
                let mut m = Monomial::one();
                for &part in mu.parts() {
                    m = m.times_var(Var::p(part), 1);
                }
                m
            })
            .collect();
        let index: HashMap<Monomial, usize> = monos
            .iter()
            .cloned()
            .enumerate()
            .map(|(i, m)| (m, i))
            .collect();
        // matrix [p^mu](s_lambda) and the rhs vector from s (split by the
        // parameter part of each monomial)
        let dim = lambdas.len();
        let mut mat = vec![vec![Rat::zero(); dim]; dim];
        for (col, l) in lambdas.iter().enumerate() {
            for (m, c) in schur(l).iter() {
                mat[index[m]][col] = c.clone();
            }
        }
        let mut rhs: Vec<Series> = vec![Series::zero(param_only_caps(s.caps())); dim];
        for (m, c) in s.iter() {
            if m.weight() != w {
                continue;
            }
            let mut vars_only = Monomial::one();
            for &(v, e) in m.vars() {
                assert_eq!(v.family, Family::P, "boson_to_fermion expects the p-family");
                vars_only = vars_only.times_var(v, e);
            }
            let row = index[&vars_only];
            let param_part = Monomial::one().with_param_shift(m.params());
            rhs[row].accumulate_clipped(param_part, c.clone());
        }
        // dense exact Gauss with the series-valued right side
        let coords = solve_with_series_rhs(mat, rhs);
        for (l, coord) in lambdas.into_iter().zip(coords) {
            out.accumulate(l, coord);
        }
    }
    out
}

fn param_only_caps(caps: &Caps) -> Caps {
    Caps {
        weight: 0,
        windows: caps.windows,
    }
}

fn solve_with_series_rhs(mut mat: Vec<Vec<Rat>>, mut rhs: Vec<Series>) -> Vec<Series> {
    let n = mat.len();
    let mut perm: Vec<usize> = (0..n).collect();
    for col in 0..n {
        let pivot = (col..n)
            .find(|&r| !mat[perm[r]][col].is_zero())
            .expect("Schur transition matrix is invertible");
        perm.swap(col, pivot);
        let inv = mat[perm[col]][col].recip();
        for c in col..n {
            mat[perm[col]][c] *= &inv;
        }
        rhs[perm[col]] = rhs[perm[col]].scale(&inv);
        for r in 0..n {
            if r == col || mat[perm[r]][col].is_zero() {
                continue;
            }
            let f = mat[perm[r]][col].clone();
            for c in col..n {
                let delta = &f * &mat[perm[col]][c];
                mat[perm[r]][c] -= &delta;
            }
            let delta = rhs[perm[col]].scale(&f);
            rhs[perm[r]] = rhs[perm[r]].sub(&delta);
        }
    }
    (0..n).map(|c| rhs[perm[c]].clone()).collect()
}

/// The inverse direction: `v -> sum coords_lambda s_lambda(p)`.
pub fn fermion_to_boson(v: &WedgeVector) -> Series {
    let mut windows = [Window::ZERO; 4];
    for (i, w) in windows.iter_mut().enumerate() {
        let lo = v
            .coords
            .values()
            .map(|c| c.caps().windows[i].lo)
            .min()
            .unwrap_or(0);
        let hi = v
            .coords
            .values()
            .map(|c| c.caps().windows[i].hi)
            .min()
            .unwrap_or(0);
        *w = Window::new(lo.min(0), hi.max(0));
    }
    let caps = Caps {
        weight: v.energy_cap,
        windows,
    };
    let mut out = Series::zero(caps.clone());
    for (l, coord) in &v.coords {
        let contrib = schur(l).mul_capped(coord, caps.clone());
        out = out.add(&contrib);
    }
    out
}

/// Checks one row of the operator correspondence table: the z-side action
/// conjugated through the correspondence equals the p-side materialization,
/// on every `v_lambda` with `|lambda| <= energy_cap`.
pub fn table_check(spec: &OpSpec, energy_cap: u32) -> bool {
    let (zop, shift) = match spec {
        OpSpec::A(m) => (ZOp::a(*m), *m),
        OpSpec::Lambda(m) => (ZOp::lambda(*m), *m),
        OpSpec::M(m) => (ZOp::m(*m), *m),
        OpSpec::CutJoin => (ZOp::m(0), 0),
        _ => panic!("table_check covers a_k, Lambda_m, M_m"),
    };
    let out_cap = energy_cap + shift.max(0) as u32;
    let wide = energy_cap + shift.unsigned_abs() as u32;
    let op = materialize(spec, Family::P, wide);
    use rayon::prelude::*;
    Partition::all_up_to(energy_cap).into_par_iter().all(|l| {
        let lhs = hat_apply(&zop, &WedgeVector::basis(l.clone(), out_cap));
        // schur(l) is exact, so widening its caps before applying the
        // operator is sound
        let boson = schur(&l).with_trusted_caps(Caps::weight_only(wide));
        let rhs = boson_to_fermion(&apply(&op, &boson), out_cap);
        lhs.same_coords(&rhs)
    })
}

/// Pluecker coordinates of a decomposable wedge `phi_1 ^ phi_2 ^ ...`:
/// the coordinate of `v_lambda` is the minor over rows `k_i = lambda_i - i`
/// and columns `1..=len(lambda)`. Requires each factor `phi_j` to be
/// `z^{-j} + higher order` with unit leading coefficient, and at least
/// `energy_cap` factors.
pub fn decomposable_to_coords(factors: &[LaurentZ], energy_cap: u32) -> Result<WedgeVector> {
    if (factors.len() as u32) < energy_cap.max(1) {
        return Err(Error::BadWedgeFactor(factors.len()));
    }
    for (idx, phi) in factors.iter().enumerate() {
        let j = idx as i64 + 1;
        let lead_ok = phi.min_z() == Some(-j)
            && phi
                .coefficient(-j, [0; 4])
                .map(|c| c.is_one())
                .unwrap_or(false)
            && phi.iter().all(|(&(k, p), _)| k > -j || p == [0; 4]);
        if !lead_ok {
            return Err(Error::BadWedgeFactor(idx + 1));
        }
    }
    let mut out = WedgeVector::zero(energy_cap);
    for l in Partition::all_up_to(energy_cap) {
        let n = l.len();
        if n == 0 {
            out.accumulate(l, Series::one(crate::diffop::exact_coeff_caps(0)));
            continue;
        }
        // entry (i, j) = coefficient of z^{k_i} in phi_{j+1}, as a
        // parameter-only series
        let mut entries: Vec<Vec<Series>> = Vec::with_capacity(n);
        for i in 1..=n {
            let mut row = Vec::with_capacity(n);
            for j in 0..n {
                row.push(z_coefficient_series(&factors[j], l.k(i)));
            }
            entries.push(row);
        }
        let det = determinant(&entries);
        out.accumulate(l, det);
    }
    Ok(out)
}

fn z_coefficient_series(phi: &LaurentZ, k: i64) -> Series {
    let mut windows = [Window::ZERO; 4];
    for (i, w) in windows.iter_mut().enumerate() {
        let zw = phi.caps().windows[i];
        *w = Window::new(zw.lo.min(0), zw.hi.max(0));
    }
    let mut out = Series::zero(Caps { weight: 0, windows });
    for (&(zk, params), c) in phi.iter() {
        if zk == k {
            let mut m = Monomial::one();
            for (idx, p) in crate::series::PARAMS.iter().enumerate() {
                m = m.times_param(*p, params[idx]);
            }
            out.accumulate_clipped(m, c.clone());
        }
    }
    out
}

/// Exact determinant of a small series matrix by column-subset expansion.
fn determinant(entries: &[Vec<Series>]) -> Series {
    let n = entries.len();
    let caps = entries[0][0].caps().clone();
    let mut memo: HashMap<u32, Series> = HashMap::new();
    memo.insert(0, Series::one(caps));
    fn rec(entries: &[Vec<Series>], mask: u32, memo: &mut HashMap<u32, Series>) -> Series {
        if let Some(hit) = memo.get(&mask) {
            return hit.clone();
        }
        let row = mask.count_ones() as usize - 1;
        let mut acc: Option<Series> = None;
        // Laplace along `row`: the leftmost active column carries (-1)^row
        let mut sign_flip = row % 2 == 1;
        for j in 0..entries.len() {
            if mask & (1 << j) == 0 {
                continue;
            }
            let sub = rec(entries, mask & !(1 << j), memo);
            let mut term = sub.mul(&entries[row][j]);
            if sign_flip {
                term = term.neg();
            }
            sign_flip = !sign_flip;
            acc = Some(match acc {
                None => term,
                Some(a) => a.add(&term),
            });
        }
        let out = acc.unwrap();
        memo.insert(mask, out.clone());
        out
    }
    rec(entries, (1 << n) - 1, &mut memo)
}

/// The wedge factors of the Hurwitz tau-function (the explicit example):
/// `phi_k = sum_{i>=0} e^{beta i (i - 2k + 1)/2} z^{i-k} / i!`, truncated.
pub fn hurwitz_wedge_factors(count: usize, beta_cap: i32, z_cap: i64) -> Vec<LaurentZ> {
    (1..=count as i64)
        .map(|k| {
            let caps = crate::laurent::ZCaps::new(-k, z_cap).with_window(Param::Beta, 0, beta_cap);
            let mut phi = LaurentZ::zero(caps.clone());
            for i in 0..=(z_cap + k) {
                let c_exp = i * (i - 2 * k + 1) / 2; // always an integer
                let inv_fact = Rat::from_bigint(factorial(i as u32)).recip();
                // e^{beta c} = sum_t (c beta)^t / t!
                for t in 0..=beta_cap {
                    let coeff = Rat::from_int(c_exp).pow(t) / Rat::from_bigint(factorial(t as u32));
                    phi = phi.add(&LaurentZ::term(
                        i - k,
                        [t, 0, 0, 0],
                        coeff * &inv_fact,
                        caps.clone(),
                    ));
                }
            }
            phi
        })
        .collect()
}
