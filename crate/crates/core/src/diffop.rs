//! The operator algebra acting on series: `a_k`, `Lambda_m`, `M_m` and
//! normal-ordered products, materialized as finite differential operators
//! below a truncation cap.
//!
//! Conventions (all on a family with `wt x_i = i`):
//!
//! - `a_k = x_k` (multiplication) for `k > 0`, `a_0 = 0`,
//!   `a_k = (-k) d/dx_{-k}` for `k < 0`.
//! - Normal ordering `:a_{i_1} ... a_{i_n}:` sorts indices non-increasing,
//!   so multiplications act to the left of differentiations.
//! - `Lambda_m = 1/2 sum_{i+j=m} :a_i a_j:`, which for `m > 0` equals
//!   `sum_i i x_{i+m} d/dx_i + 1/2 sum_{j=1}^{m-1} x_j x_{m-j}`. The
//!   quadratic part here is the normal-ordered one (already nonzero at
//!   `m = 2`, giving `x_1^2 / 2`); it is what the string equation needs.
//! - `M_m = 1/6 sum_{i+j+k=m} :a_i a_j a_k:`; `M_0` is the cut-and-join
//!   operator.
//!
//! Materializations are exact on the capped domain: a term is kept iff its
//! multiplication weight and differentiation weight both fit under the cap.

use crate::error::Result;
use crate::rat::Rat;
use crate::series::{Caps, Family, Monomial, Param, Series, Var, Window};
use std::collections::BTreeMap;
use std::fmt;

/// One summand of a differential operator: a parameter-only coefficient
/// series times a multiplication multiset times a differentiation multiset.
/// Equality compares coefficient terms, not their caps.
#[derive(Clone, Debug)]
pub struct OpTerm {
    pub coeff: Series,
    pub mul_vars: Vec<(Var, u32)>,
    pub diff_vars: Vec<(Var, u32)>,
}

impl OpTerm {
    pub fn new(coeff: Series, mul_vars: Vec<(Var, u32)>, diff_vars: Vec<(Var, u32)>) -> Self {
        debug_assert!(coeff.iter().all(|(m, _)| m.is_param_only()));
        fn canon(mut v: Vec<(Var, u32)>) -> Vec<(Var, u32)> {
            v.sort_unstable_by_key(|&(w, _)| w);
            let mut out: Vec<(Var, u32)> = Vec::with_capacity(v.len());
            for (var, e) in v {
                if e == 0 {
                    continue;
                }
                match out.last_mut() {
                    Some((w, ee)) if *w == var => *ee += e,
                    _ => out.push((var, e)),
                }
            }
            out
        }
        OpTerm {
            coeff,
            mul_vars: canon(mul_vars),
            diff_vars: canon(diff_vars),
        }
    }

    pub fn mul_weight(&self) -> u32 {
        self.mul_vars.iter().map(|&(v, e)| v.weight() * e).sum()
    }

    pub fn diff_weight(&self) -> u32 {
        self.diff_vars.iter().map(|&(v, e)| v.weight() * e).sum()
    }

    /// Weight shift of the term as an operator.
    pub fn weight_shift(&self) -> i64 {
        self.mul_weight() as i64 - self.diff_weight() as i64
    }
}

impl PartialEq for OpTerm {
    fn eq(&self, other: &Self) -> bool {
        self.mul_vars == other.mul_vars
            && self.diff_vars == other.diff_vars
            && self.coeff.same_terms(&other.coeff)
    }
}

impl Eq for OpTerm {}

/// Caps for exactly-known parameter coefficients (no truncation hides
/// content above any exponent up to the wide sentinel).
pub fn exact_coeff_caps(lo: i32) -> Caps {
    let w = Window::new(lo.min(0), Window::WIDE_HI);
    Caps {
        weight: 0,
        windows: [w; 4],
    }
}

/// Symbolic operator family; `materialize` turns it into a finite term list
/// exact on a capped domain.
#[derive(Clone, Debug)]
pub enum OpSpec {
    /// `a_k`: multiplication by `x_k` (k > 0), `(-k) d/dx_{-k}` (k < 0), 0 at k = 0.
    A(i64),
    /// `Lambda_m = 1/2 sum :a_i a_{m-i}:`.
    Lambda(i64),
    /// `M_m = 1/6 sum :a_i a_j a_{m-i-j}:`.
    M(i64),
    /// The cut-and-join operator, an alias for `M_0`.
    CutJoin,
    Custom(Vec<OpTerm>),
    LinComb(Vec<(Series, OpSpec)>),
}

/// A materialized operator: canonicalized finite list of [`OpTerm`]s.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DiffOp {
    terms: Vec<OpTerm>,
}

impl DiffOp {
    pub fn terms(&self) -> &[OpTerm] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn from_raw(raw: Vec<OpTerm>) -> Self {
        // merge terms sharing the same (mul, diff) signature
        let mut map: BTreeMap<(Vec<(Var, u32)>, Vec<(Var, u32)>), Series> = BTreeMap::new();
        for t in raw {
            if t.coeff.is_zero() {
                continue;
            }
            match map.entry((t.mul_vars.clone(), t.diff_vars.clone())) {
                std::collections::btree_map::Entry::Occupied(mut e) => {
                    let merged = e.get().add(&t.coeff);
                    *e.get_mut() = merged;
                }
                std::collections::btree_map::Entry::Vacant(v) => {
                    v.insert(t.coeff);
                }
            }
        }
        let terms = map
            .into_iter()
            .filter(|(_, c)| !c.is_zero())
            .map(|((m, d), c)| OpTerm {
                coeff: c,
                mul_vars: m,
                diff_vars: d,
            })
            .collect();
        DiffOp { terms }
    }

    pub fn neg(&self) -> DiffOp {
        DiffOp {
            terms: self
                .terms
                .iter()
                .map(|t| OpTerm {
                    coeff: t.coeff.neg(),
                    ..t.clone()
                })
                .collect(),
        }
    }

    pub fn add(&self, other: &DiffOp) -> DiffOp {
        let mut raw = self.terms.clone();
        raw.extend(other.terms.iter().cloned());
        DiffOp::from_raw(raw)
    }

    pub fn sub(&self, other: &DiffOp) -> DiffOp {
        self.add(&other.neg())
    }

    pub fn scale(&self, c: &Rat) -> DiffOp {
        DiffOp::from_raw(
            self.terms
                .iter()
                .map(|t| OpTerm {
                    coeff: t.coeff.scale(c),
                    ..t.clone()
                })
                .collect(),
        )
    }

    /// Restricts to terms acting within weight `w` (both the multiplication
    /// and the differentiation side must fit).
    pub fn restrict_weight(&self, w: u32) -> DiffOp {
        DiffOp {
            terms: self
                .terms
                .iter()
                .filter(|t| t.mul_weight() <= w && t.diff_weight() <= w)
                .cloned()
                .collect(),
        }
    }
}

impl fmt::Display for DiffOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, t) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "({})", t.coeff)?;
            for &(v, e) in &t.mul_vars {
                if e == 1 {
                    write!(f, "*{}", v)?;
                } else {
                    write!(f, "*{}^{}", v, e)?;
                }
            }
            for &(v, e) in &t.diff_vars {
                if e == 1 {
                    write!(f, "*d/d{}", v)?;
                } else {
                    write!(f, "*d{}/d{}^{}", e, v, e)?;
                }
            }
        }
        Ok(())
    }
}

/// Normal-ordered product of `a`-operators with the given nonzero indices:
/// positives become multiplications, negatives become `(-k) d/dx_{-k}`.
fn normal_ordered_term(family: Family, indices: &[i64]) -> OpTerm {
    let mut coeff = Rat::one();
    let mut mul_vars: Vec<(Var, u32)> = Vec::new();
    let mut diff_vars: Vec<(Var, u32)> = Vec::new();
    let push = |list: &mut Vec<(Var, u32)>, idx: u32| {
        let v = Var::new(family, idx);
        match list.iter_mut().find(|(w, _)| *w == v) {
            Some((_, e)) => *e += 1,
            None => list.push((v, 1)),
        }
    };
    for &i in indices {
        if i > 0 {
            push(&mut mul_vars, i as u32);
        } else {
            coeff *= &Rat::from_int(-i);
            push(&mut diff_vars, (-i) as u32);
        }
    }
    OpTerm::new(
        Series::constant(coeff, exact_coeff_caps(0)),
        mul_vars,
        diff_vars,
    )
}

/// Materializes `spec` on the given family, exact for inputs and outputs of
/// weight at most `weight_cap`.
pub fn materialize(spec: &OpSpec, family: Family, weight_cap: u32) -> DiffOp {
    let w = weight_cap as i64;
    let fits = |indices: &[i64]| -> bool {
        let pos: i64 = indices.iter().filter(|&&i| i > 0).sum();
        let neg: i64 = -indices.iter().filter(|&&i| i < 0).sum::<i64>();
        pos <= w && neg <= w
    };
    match spec {
        OpSpec::A(k) => {
            let k = *k;
            if k == 0 || k.unsigned_abs() as i64 > w {
                return DiffOp { terms: vec![] };
            }
            DiffOp::from_raw(vec![normal_ordered_term(family, &[k])])
        }
        OpSpec::Lambda(m) => {
            let m = *m;
            let mut raw = Vec::new();
            // multisets {i, j}, i >= j, i + j = m, both nonzero
            let lo = -(w as i64);
            let hi = w + m.abs();
            for i in lo..=hi {
                let j = m - i;
                if j > i || i == 0 || j == 0 {
                    continue;
                }
                if !fits(&[i, j]) {
                    continue;
                }
                let arrangements = if i == j { 1 } else { 2 };
                let t = normal_ordered_term(family, &[i, j]);
                let c = t.coeff.scale(&Rat::new(arrangements, 2));
                raw.push(OpTerm { coeff: c, ..t });
            }
            DiffOp::from_raw(raw)
        }
        OpSpec::M(m) => {
            let m = *m;
            let mut raw = Vec::new();
            // multisets {i, j, k}, i >= j >= k, i + j + k = m, all nonzero;
            // every entry is bounded by the cap in absolute value
            for i in -(w as i64)..=w {
                if i == 0 {
                    continue;
                }
                for j in -(w as i64)..=i {
                    if j == 0 {
                        continue;
                    }
                    let k = m - i - j;
                    if k > j || k == 0 || k < -w {
                        continue;
                    }
                    if !fits(&[i, j, k]) {
                        continue;
                    }
                    // arrangements of the multiset {i, j, k}
                    let arrangements = if i == j && j == k {
                        1
                    } else if i == j || j == k {
                        3
                    } else {
                        6
                    };
                    let t = normal_ordered_term(family, &[i, j, k]);
                    let c = t.coeff.scale(&Rat::new(arrangements, 6));
                    raw.push(OpTerm { coeff: c, ..t });
                }
            }
            DiffOp::from_raw(raw)
        }
        OpSpec::CutJoin => materialize(&OpSpec::M(0), family, weight_cap),
        OpSpec::Custom(terms) => DiffOp::from_raw(
            terms
                .iter()
                .filter(|t| t.mul_weight() as i64 <= w && t.diff_weight() as i64 <= w)
                .cloned()
                .collect(),
        ),
        OpSpec::LinComb(parts) => {
            let mut raw = Vec::new();
            for (c, sub) in parts {
                let op = materialize(sub, family, weight_cap);
                for t in op.terms {
                    raw.push(OpTerm {
                        coeff: t.coeff.mul(c),
                        ..t
                    });
                }
            }
            DiffOp::from_raw(raw)
        }
    }
}

/// Applies a materialized operator to a series. The result caps are the
/// trustworthy region implied by the input caps and the term shifts.
pub fn apply(op: &DiffOp, s: &Series) -> Series {
    let in_caps = s.caps();
    if op.terms.is_empty() {
        return Series::zero(in_caps.clone());
    }
    let mut weight_hi = i64::MAX;
    let mut windows = [Window {
        lo: i32::MAX,
        hi: i32::MAX,
    }; 4];
    for t in &op.terms {
        weight_hi = weight_hi.min(in_caps.weight as i64 + t.weight_shift());
        for p in crate::series::PARAMS {
            let k = p.idx();
            let plo = t.coeff.min_param_exp(p).unwrap_or(0);
            windows[k].lo = windows[k].lo.min(in_caps.windows[k].lo + plo);
            windows[k].hi = windows[k].hi.min(in_caps.windows[k].hi + plo);
        }
    }
    let caps = Caps {
        weight: weight_hi.max(0) as u32,
        windows,
    };
    let mut out = Series::zero(caps);
    for t in &op.terms {
        for (m, c) in s.iter() {
            // differentiate
            let mut mono = m.clone();
            let mut factor = c.clone();
            let mut ok = true;
            for &(v, d) in &t.diff_vars {
                let e = mono.exp(v);
                if e < d {
                    ok = false;
                    break;
                }
                for k in 0..d {
                    factor *= &Rat::from_int((e - k) as i64);
                }
                mono = mono.div_var(v, d).unwrap();
            }
            if !ok || factor.is_zero() {
                continue;
            }
            for &(v, e) in &t.mul_vars {
                mono = mono.times_var(v, e);
            }
            if mono.weight() > out.caps().weight {
                continue;
            }
            for (pm, pc) in t.coeff.iter() {
                out.accumulate_clipped(mono.with_param_shift(pm.params()), &factor * pc);
            }
        }
    }
    out
}

/// Applies `op` and truncates into explicit target caps, erroring if content
/// falls below a parameter floor of the target.
pub fn apply_within(op: &DiffOp, s: &Series, caps: &Caps) -> Result<Series> {
    let full = apply(op, s);
    let mut out = Series::zero(caps.clone());
    for (m, c) in full.iter() {
        out.accumulate_checked(m.clone(), c.clone())?;
    }
    Ok(out)
}

/// Operator composition `a . b` (apply `b` first), exact on the domain where
/// both factor materializations are exact.
pub fn compose(a: &DiffOp, b: &DiffOp) -> DiffOp {
    let mut raw = Vec::new();
    for ta in &a.terms {
        for tb in &b.terms {
            compose_terms(ta, tb, &mut raw);
        }
    }
    DiffOp::from_raw(raw)
}

/// Leibniz exchange: `d^d/dv^d . v^m = sum_k C(d,k) m!/(m-k)! v^(m-k) d^(d-k)`.
fn compose_terms(a: &OpTerm, b: &OpTerm, out: &mut Vec<OpTerm>) {
    // variables where a differentiates and b multiplies
    let shared: Vec<Var> = a
        .diff_vars
        .iter()
        .map(|&(v, _)| v)
        .filter(|v| b.mul_vars.iter().any(|&(w, _)| w == *v))
        .collect();
    let coeff = a.coeff.mul(&b.coeff);

    // iterate over contraction counts k_v for each shared variable
    let mut choices: Vec<(Var, u32, u32)> = Vec::new(); // (var, d, m)
    for &v in &shared {
        let d = a.diff_vars.iter().find(|&&(w, _)| w == v).unwrap().1;
        let m = b.mul_vars.iter().find(|&&(w, _)| w == v).unwrap().1;
        choices.push((v, d, m));
    }
    let mut stack: Vec<(usize, Rat, Vec<(Var, u32)>)> = vec![(0, Rat::one(), Vec::new())];
    while let Some((i, fac, ks)) = stack.pop() {
        if i == choices.len() {
            // assemble the composed term
            let mut mul_vars: Vec<(Var, u32)> = Vec::new();
            let mut diff_vars: Vec<(Var, u32)> = Vec::new();
            let push = |list: &mut Vec<(Var, u32)>, v: Var, e: u32| {
                if e == 0 {
                    return;
                }
                match list.iter_mut().find(|(w, _)| *w == v) {
                    Some((_, ee)) => *ee += e,
                    None => list.push((v, e)),
                }
            };
            for &(v, e) in &a.mul_vars {
                push(&mut mul_vars, v, e);
            }
            for &(v, e) in &b.mul_vars {
                let k = ks
                    .iter()
                    .find(|&&(w, _)| w == v)
                    .map(|&(_, k)| k)
                    .unwrap_or(0);
                push(&mut mul_vars, v, e - k);
            }
            for &(v, e) in &a.diff_vars {
                let k = ks
                    .iter()
                    .find(|&&(w, _)| w == v)
                    .map(|&(_, k)| k)
                    .unwrap_or(0);
                push(&mut diff_vars, v, e - k);
            }
            for &(v, e) in &b.diff_vars {
                push(&mut diff_vars, v, e);
            }
            out.push(OpTerm::new(coeff.scale(&fac), mul_vars, diff_vars));
            continue;
        }
        let (v, d, m) = choices[i];
        for k in 0..=d.min(m) {
            // C(d, k) * falling(m, k)
            let mut f = Rat::one();
            for t in 0..k {
                f *= &Rat::from_int((m - t) as i64);
            }
            f *= &Rat::from_bigint(crate::rat::binomial(d as u64, k as u64));
            let mut ks2 = ks.clone();
            ks2.push((v, k));
            stack.push((i + 1, &fac * &f, ks2));
        }
    }
}

/// Materialized commutator `[a, b] = ab - ba` on the capped domain.
///
/// Factors are materialized with headroom `2 * weight_cap` so that no
/// composition channel inside the cap is lost, then restricted back.
pub fn commutator(a: &OpSpec, b: &OpSpec, family: Family, weight_cap: u32) -> DiffOp {
    let wa = materialize(a, family, 2 * weight_cap);
    let wb = materialize(b, family, 2 * weight_cap);
    compose(&wa, &wb)
        .sub(&compose(&wb, &wa))
        .restrict_weight(weight_cap)
}

/// `sum_m param^m gen^m(init) / m!` truncated at `param_cap`: the flow of a
/// (weight-shift >= 0 or param-capped) generator applied to `init`.
pub fn exp_flow(gen: &DiffOp, param: Param, init: &Series, param_cap: u32) -> Series {
    let mut caps = init.caps().clone();
    let win = caps.windows[param.idx()];
    caps.windows[param.idx()] = Window::new(win.lo, win.hi + param_cap as i32);
    let mut out = Series::zero(caps);
    for (m, c) in init.iter() {
        out.accumulate_clipped(m.clone(), c.clone());
    }
    let mut cur = init.clone();
    for order in 1..=param_cap {
        cur = apply(gen, &cur).scale(&Rat::new(1, order as i64));
        if cur.is_zero() {
            break;
        }
        let shift = Monomial::param(param, order as i32);
        for (m, c) in cur.iter() {
            out.accumulate_clipped(m.mul(&shift), c.clone());
        }
    }
    out
}

/// Order-by-order solution of `dZ/d(param) = gen(param) Z`, `Z|_0 = init`,
/// where `gen = sum_j param^j gens[j]`. `init` must be param-free in the
/// flow parameter.
pub fn nonautonomous_flow(
    gens: &[(u32, DiffOp)],
    param: Param,
    init: &Series,
    param_cap: u32,
) -> Series {
    debug_assert!(init.iter().all(|(m, _)| m.param_exp(param) == 0));
    let mut caps = init.caps().clone();
    let win = caps.windows[param.idx()];
    caps.windows[param.idx()] = Window::new(win.lo.min(0), win.hi + param_cap as i32);
    let mut slices: Vec<Series> = vec![init.clone()];
    for m in 0..param_cap {
        // (m+1) Z_{m+1} = sum_j gen_j Z_{m-j}
        let mut next: Option<Series> = None;
        for (j, g) in gens {
            if *j > m {
                continue;
            }
            let term = apply(g, &slices[(m - j) as usize]);
            next = Some(match next {
                None => term,
                Some(acc) => acc.add(&term),
            });
        }
        let next = match next {
            None => Series::zero(slices[0].caps().clone()),
            Some(s) => s.scale(&Rat::new(1, m as i64 + 1)),
        };
        slices.push(next);
    }
    let mut out = Series::zero(caps);
    for (m, slice) in slices.iter().enumerate() {
        let shift = Monomial::param(param, m as i32);
        for (mono, c) in slice.iter() {
            out.accumulate_clipped(mono.mul(&shift), c.clone());
        }
    }
    out
}

/// Convenience: materialize and apply in one go, sizing the materialization
/// to the input caps.
pub fn apply_spec(spec: &OpSpec, s: &Series, family: Family) -> Series {
    let shift_room = s.caps().weight;
    apply(&materialize(spec, family, shift_room + 8), s)
}
