//! Truncated graded sparse series with exact rational coefficients.
//!
//! A [`Series`] is a finite sum of terms `c * m` where `c` is a [`Rat`] and
//! `m` is a [`Monomial`]: a product of indexed variables (families `p`, `q`,
//! `r`, `t`) and integer powers of the formal parameters `beta`, `u`, `v`,
//! `gamma`. Variables carry weights (`wt p_i = wt q_i = wt r_i = i`,
//! `wt t_d = 2d + 1`) and every series carries explicit truncation caps:
//! a maximal weight plus one exponent window per parameter.
//!
//! Window semantics: the lower end is a hard floor (the exact series is
//! guaranteed to have no terms below it), the upper end is a truncation cap
//! (terms above it are unknown and silently dropped). Ring operations are
//! exact modulo the truncation ideal, so two truncations of the same exact
//! series agree on their common caps.

use crate::error::{Error, Result};
use crate::rat::Rat;
use serde::Serialize;
use std::collections::BTreeMap;
use std::fmt;

/// Variable family. Weight of an index-`i` variable is `i` for `P`/`Q`/`R`
/// and `2i + 1` for `T`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Family {
    P,
    Q,
    R,
    T,
}

impl Family {
    pub fn letter(self) -> char {
        match self {
            Family::P => 'p',
            Family::Q => 'q',
            Family::R => 'r',
            Family::T => 't',
        }
    }
}

/// An indexed variable; index >= 1 for `P`/`Q`/`R`, index >= 0 for `T`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Var {
    pub family: Family,
    pub index: u32,
}

impl Var {
    pub fn new(family: Family, index: u32) -> Self {
        if family != Family::T {
            assert!(index >= 1, "{:?} variables are indexed from 1", family);
        }
        Var { family, index }
    }

    pub fn p(index: u32) -> Self {
        Var::new(Family::P, index)
    }

    pub fn q(index: u32) -> Self {
        Var::new(Family::Q, index)
    }

    pub fn r(index: u32) -> Self {
        Var::new(Family::R, index)
    }

    pub fn t(index: u32) -> Self {
        Var::new(Family::T, index)
    }

    pub fn weight(self) -> u32 {
        match self.family {
            Family::T => 2 * self.index + 1,
            _ => self.index,
        }
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.family.letter(), self.index)
    }
}

/// Formal parameter slot. Exponents are integers and may be negative.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Param {
    Beta,
    U,
    V,
    Gamma,
}

pub const PARAMS: [Param; 4] = [Param::Beta, Param::U, Param::V, Param::Gamma];

impl Param {
    pub fn idx(self) -> usize {
        match self {
            Param::Beta => 0,
            Param::U => 1,
            Param::V => 2,
            Param::Gamma => 3,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Param::Beta => "beta",
            Param::U => "u",
            Param::V => "v",
            Param::Gamma => "gamma",
        }
    }
}

pub type ParamExps = [i32; 4];

/// A single monomial: sparse variable exponents times parameter powers.
/// No zero exponents are stored; the weight is cached.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Monomial {
    weight: u32,
    vars: Vec<(Var, u32)>,
    params: ParamExps,
}

impl Monomial {
    pub fn one() -> Self {
        Monomial {
            weight: 0,
            vars: Vec::new(),
            params: [0; 4],
        }
    }

    pub fn var(v: Var, e: u32) -> Self {
        Monomial::one().times_var(v, e)
    }

    pub fn param(p: Param, e: i32) -> Self {
        Monomial::one().times_param(p, e)
    }

    pub fn times_var(mut self, v: Var, e: u32) -> Self {
        if e == 0 {
            return self;
        }
        match self.vars.binary_search_by_key(&v, |&(w, _)| w) {
            Ok(i) => self.vars[i].1 += e,
            Err(i) => self.vars.insert(i, (v, e)),
        }
        self.weight += v.weight() * e;
        self
    }

    pub fn times_param(mut self, p: Param, e: i32) -> Self {
        self.params[p.idx()] += e;
        self
    }

    pub fn is_one(&self) -> bool {
        self.vars.is_empty() && self.params == [0; 4]
    }

    pub fn weight(&self) -> u32 {
        self.weight
    }

    /// Total variable degree (number of variable factors with multiplicity).
    pub fn degree(&self) -> u32 {
        self.vars.iter().map(|&(_, e)| e).sum()
    }

    pub fn exp(&self, v: Var) -> u32 {
        self.vars
            .binary_search_by_key(&v, |&(w, _)| w)
            .map(|i| self.vars[i].1)
            .unwrap_or(0)
    }

    pub fn param_exp(&self, p: Param) -> i32 {
        self.params[p.idx()]
    }

    pub fn params(&self) -> &ParamExps {
        &self.params
    }

    pub fn vars(&self) -> &[(Var, u32)] {
        &self.vars
    }

    pub fn is_param_only(&self) -> bool {
        self.vars.is_empty()
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let mut vars = Vec::with_capacity(self.vars.len() + other.vars.len());
        let (mut i, mut j) = (0, 0);
        while i < self.vars.len() && j < other.vars.len() {
            let (a, ea) = self.vars[i];
            let (b, eb) = other.vars[j];
            match a.cmp(&b) {
                std::cmp::Ordering::Less => {
                    vars.push((a, ea));
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    vars.push((b, eb));
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    vars.push((a, ea + eb));
                    i += 1;
                    j += 1;
                }
            }
        }
        vars.extend_from_slice(&self.vars[i..]);
        vars.extend_from_slice(&other.vars[j..]);
        let mut params = self.params;
        for k in 0..4 {
            params[k] += other.params[k];
        }
        Monomial {
            weight: self.weight + other.weight,
            vars,
            params,
        }
    }

    /// Removes `e` powers of `v`; returns None if fewer are present.
    pub fn div_var(&self, v: Var, e: u32) -> Option<Monomial> {
        let i = self.vars.binary_search_by_key(&v, |&(w, _)| w).ok()?;
        let have = self.vars[i].1;
        if have < e {
            return None;
        }
        let mut m = self.clone();
        if have == e {
            m.vars.remove(i);
        } else {
            m.vars[i].1 -= e;
        }
        m.weight -= v.weight() * e;
        Some(m)
    }

    pub fn with_param_shift(&self, shift: &ParamExps) -> Monomial {
        let mut m = self.clone();
        for k in 0..4 {
            m.params[k] += shift[k];
        }
        m
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Monomial {
    /// Graded-lex: weight, then variables, then parameter exponents.
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.weight
            .cmp(&other.weight)
            .then_with(|| self.vars.cmp(&other.vars))
            .then_with(|| self.params.cmp(&other.params))
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_one() {
            return write!(f, "1");
        }
        let mut first = true;
        let mut sep = |f: &mut fmt::Formatter<'_>| -> fmt::Result {
            if !first {
                write!(f, "*")?;
            }
            first = false;
            Ok(())
        };
        for &(v, e) in &self.vars {
            sep(f)?;
            if e == 1 {
                write!(f, "{}", v)?;
            } else {
                write!(f, "{}^{}", v, e)?;
            }
        }
        for p in PARAMS {
            let e = self.params[p.idx()];
            if e != 0 {
                sep(f)?;
                if e == 1 {
                    write!(f, "{}", p.name())?;
                } else {
                    write!(f, "{}^{}", p.name(), e)?;
                }
            }
        }
        Ok(())
    }
}

/// Exponent window for one parameter: `lo` is a hard floor, `hi` a cap.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Window {
    pub lo: i32,
    pub hi: i32,
}

impl Window {
    pub const ZERO: Window = Window { lo: 0, hi: 0 };

    /// Cap value for exactly-known content: effectively "no truncation in
    /// this parameter" while staying far from i32 overflow under addition.
    pub const WIDE_HI: i32 = 1 << 24;

    pub fn new(lo: i32, hi: i32) -> Self {
        assert!(lo <= hi, "empty parameter window [{lo}, {hi}]");
        Window { lo, hi }
    }

    pub fn contains(&self, e: i32) -> bool {
        self.lo <= e && e <= self.hi
    }
}

/// Truncation caps: maximal weight plus a window per parameter.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Caps {
    pub weight: u32,
    pub windows: [Window; 4],
}

impl Caps {
    /// Caps with all parameter windows pinned to exponent zero.
    pub fn weight_only(weight: u32) -> Self {
        Caps {
            weight,
            windows: [Window::ZERO; 4],
        }
    }

    pub fn with_window(mut self, p: Param, lo: i32, hi: i32) -> Self {
        self.windows[p.idx()] = Window::new(lo, hi);
        self
    }

    pub fn window(&self, p: Param) -> Window {
        self.windows[p.idx()]
    }

    fn admits(&self, m: &Monomial) -> Admit {
        if m.weight() > self.weight {
            return Admit::AboveCap;
        }
        for k in 0..4 {
            let e = m.params[k];
            if e > self.windows[k].hi {
                return Admit::AboveCap;
            }
            if e < self.windows[k].lo {
                return Admit::BelowFloor(PARAMS[k]);
            }
        }
        Admit::Ok
    }

    /// Caps of a sum: floors drop to the lower floor, caps to the lower cap.
    pub fn meet_add(&self, other: &Caps) -> Caps {
        let mut windows = [Window::ZERO; 4];
        for k in 0..4 {
            windows[k] = Window {
                lo: self.windows[k].lo.min(other.windows[k].lo),
                hi: self.windows[k].hi.min(other.windows[k].hi),
            };
        }
        Caps {
            weight: self.weight.min(other.weight),
            windows,
        }
    }

    /// Caps of a product: floors add; each cap is limited by the partner's
    /// floor (content above a cap is unknown and could land anywhere above
    /// `cap + partner floor`).
    pub fn meet_mul(&self, other: &Caps) -> Caps {
        let mut windows = [Window::ZERO; 4];
        for k in 0..4 {
            let (a, b) = (self.windows[k], other.windows[k]);
            windows[k] = Window {
                lo: a.lo + b.lo,
                hi: (a.hi + b.lo).min(b.hi + a.lo),
            };
        }
        Caps {
            weight: self.weight.min(other.weight),
            windows,
        }
    }

    pub fn shifted(&self, weight_shift: i64, params: &ParamExps) -> Caps {
        let w = (self.weight as i64 + weight_shift).max(0) as u32;
        let mut windows = self.windows;
        for k in 0..4 {
            windows[k].lo += params[k];
            windows[k].hi += params[k];
        }
        Caps { weight: w, windows }
    }

    /// True if `self` is contained in `other` (every monomial admitted by
    /// `self` is admitted by `other`).
    pub fn subset_of(&self, other: &Caps) -> bool {
        self.weight <= other.weight
            && (0..4).all(|k| {
                self.windows[k].lo >= other.windows[k].lo
                    && self.windows[k].hi <= other.windows[k].hi
            })
    }
}

enum Admit {
    Ok,
    AboveCap,
    BelowFloor(Param),
}

/// Sparse truncated series. No zero coefficients are stored and every
/// stored monomial satisfies the caps. Values are immutable in spirit:
/// all operations are pure functions returning fresh series.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Series {
    terms: BTreeMap<Monomial, Rat>,
    caps: Caps,
}

impl Series {
    pub fn zero(caps: Caps) -> Self {
        Series {
            terms: BTreeMap::new(),
            caps,
        }
    }

    pub fn one(caps: Caps) -> Self {
        Series::monomial(Monomial::one(), Rat::one(), caps)
    }

    /// Single-term series; the term is dropped if it lies above the caps.
    pub fn monomial(m: Monomial, c: Rat, caps: Caps) -> Self {
        let mut s = Series::zero(caps);
        s.accumulate_clipped(m, c);
        s
    }

    pub fn var(v: Var, caps: Caps) -> Self {
        Series::monomial(Monomial::var(v, 1), Rat::one(), caps)
    }

    pub fn constant(c: Rat, caps: Caps) -> Self {
        Series::monomial(Monomial::one(), c, caps)
    }

    pub fn caps(&self) -> &Caps {
        &self.caps
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Monomial, &Rat)> {
        self.terms.iter()
    }

    /// Adds `c * m`, silently dropping anything above the caps.
    /// Content below a parameter floor indicates a bookkeeping bug upstream.
    pub(crate) fn accumulate_clipped(&mut self, m: Monomial, c: Rat) {
        if c.is_zero() {
            return;
        }
        match self.caps.admits(&m) {
            Admit::Ok => match self.terms.entry(m) {
                std::collections::btree_map::Entry::Occupied(mut e) => {
                    *e.get_mut() += &c;
                    if e.get().is_zero() {
                        e.remove();
                    }
                }
                std::collections::btree_map::Entry::Vacant(v) => {
                    v.insert(c);
                }
            },
            Admit::AboveCap => {}
            Admit::BelowFloor(p) => {
                debug_assert!(
                    false,
                    "term {m} below {} floor {}",
                    p.name(),
                    self.caps.window(p).lo
                );
            }
        }
    }

    /// Adds `c * m`, erroring if the term falls below a parameter floor.
    pub(crate) fn accumulate_checked(&mut self, m: Monomial, c: Rat) -> Result<()> {
        if c.is_zero() {
            return Ok(());
        }
        if let Admit::BelowFloor(p) = self.caps.admits(&m) {
            return Err(Error::WindowOverflow(
                m.to_string(),
                p.name(),
                self.caps.window(p).lo,
            ));
        }
        self.accumulate_clipped(m, c);
        Ok(())
    }

    /// Exact coefficient of `m`; 0 if absent, error if `m` is outside the
    /// caps (the coefficient is unknown there, not zero).
    pub fn coefficient(&self, m: &Monomial) -> Result<Rat> {
        match self.caps.admits(m) {
            Admit::Ok => Ok(self.terms.get(m).cloned().unwrap_or_default()),
            _ => Err(Error::CoefficientOutsideCaps(m.to_string())),
        }
    }

    /// Coefficient lookup that does not consult the caps. Only for callers
    /// that already know the monomial is inside the trusted region.
    pub fn coefficient_unchecked(&self, m: &Monomial) -> Rat {
        self.terms.get(m).cloned().unwrap_or_default()
    }

    pub fn add(&self, other: &Series) -> Series {
        let caps = self.caps.meet_add(&other.caps);
        let mut out = Series::zero(caps);
        for (m, c) in self.terms.iter().chain(other.terms.iter()) {
            out.accumulate_clipped(m.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Series) -> Series {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Series {
        let mut out = self.clone();
        for c in out.terms.values_mut() {
            *c = -c.clone();
        }
        out
    }

    pub fn scale(&self, c: &Rat) -> Series {
        if c.is_zero() {
            return Series::zero(self.caps.clone());
        }
        let mut out = self.clone();
        for v in out.terms.values_mut() {
            *v *= c;
        }
        out
    }

    pub fn mul(&self, other: &Series) -> Series {
        self.mul_capped(other, self.caps.meet_mul(&other.caps))
    }

    /// Product truncated to explicit caps (which must make sense for the
    /// inputs; used by pipelines that have proved a better trust region).
    pub fn mul_capped(&self, other: &Series, caps: Caps) -> Series {
        let mut out = Series::zero(caps);
        let wcap = out.caps.weight;
        // iterate the smaller operand outermost
        let (a, b) = if self.terms.len() <= other.terms.len() {
            (self, other)
        } else {
            (other, self)
        };
        for (ma, ca) in &a.terms {
            if ma.weight() > wcap {
                continue;
            }
            let budget = wcap - ma.weight();
            for (mb, cb) in &b.terms {
                if mb.weight() > budget {
                    break; // BTreeMap iterates in increasing weight order
                }
                out.accumulate_clipped(ma.mul(mb), ca * cb);
            }
        }
        out
    }

    /// Exact multiplication by a single monomial: caps shift along with it.
    pub fn mul_monomial(&self, m: &Monomial, c: &Rat) -> Series {
        let caps = self.caps.shifted(m.weight() as i64, m.params());
        let mut out = Series::zero(caps);
        for (mm, cc) in &self.terms {
            out.accumulate_clipped(mm.mul(m), cc * c);
        }
        out
    }

    pub fn pow(&self, e: u32) -> Series {
        let mut acc = Series::one(self.caps.clone());
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }

    /// Restriction to tighter caps. Errors if the new caps are not a subset
    /// of the old ones, or if raising a floor would discard stored content.
    pub fn truncated(&self, caps: &Caps) -> Result<Series> {
        if !caps.subset_of(&self.caps) {
            return Err(Error::CapsNotTighter(format!(
                "{:?} vs {:?}",
                caps, self.caps
            )));
        }
        let mut out = Series::zero(caps.clone());
        for (m, c) in &self.terms {
            out.accumulate_checked(m.clone(), c.clone())?;
        }
        Ok(out)
    }

    /// Declares caps the caller has proved exact for this term set.
    /// Panics if a stored term violates them.
    pub fn with_trusted_caps(mut self, caps: Caps) -> Series {
        let old = std::mem::replace(&mut self.caps, caps);
        for m in self.terms.keys() {
            if !matches!(self.caps.admits(m), Admit::Ok) {
                panic!("term {m} violates trusted caps (old caps {:?})", old);
            }
        }
        self
    }

    /// d/d`v`, applied `times` times.
    pub fn deriv(&self, v: Var, times: u32) -> Series {
        if times == 0 {
            return self.clone();
        }
        let shift = -(v.weight() as i64) * times as i64;
        let caps = self.caps.shifted(shift, &[0; 4]);
        let mut out = Series::zero(caps);
        for (m, c) in &self.terms {
            let e = m.exp(v);
            if e < times {
                continue;
            }
            let mut fac = Rat::one();
            for k in 0..times {
                fac *= &Rat::from_int((e - k) as i64);
            }
            out.accumulate_clipped(m.div_var(v, times).unwrap(), c * &fac);
        }
        out
    }

    /// Formal d/d`p` on a parameter: `p^e -> e p^(e-1)`.
    pub fn dparam(&self, p: Param) -> Series {
        let mut shift = [0i32; 4];
        shift[p.idx()] = -1;
        let caps = self.caps.shifted(0, &shift);
        let mut out = Series::zero(caps);
        for (m, c) in &self.terms {
            let e = m.param_exp(p);
            if e == 0 {
                continue;
            }
            out.accumulate_clipped(m.with_param_shift(&shift), c * &Rat::from_int(e as i64));
        }
        out
    }

    /// Substitutes `beta = u^3` (every beta exponent becomes 3 u-exponents).
    pub fn beta_to_u_cubed(&self) -> Series {
        let bw = self.caps.window(Param::Beta);
        let uw = self.caps.window(Param::U);
        let caps = Caps {
            weight: self.caps.weight,
            windows: {
                let mut w = self.caps.windows;
                w[Param::Beta.idx()] = Window::ZERO;
                w[Param::U.idx()] = Window::new(uw.lo + 3 * bw.lo, uw.hi + 3 * bw.hi);
                w
            },
        };
        let mut out = Series::zero(caps);
        for (m, c) in &self.terms {
            let b = m.param_exp(Param::Beta);
            let shift = [-b, 3 * b, 0, 0];
            out.accumulate_clipped(m.with_param_shift(&shift), c.clone());
        }
        out
    }

    /// Keeps only terms satisfying the predicate (caps unchanged; the caller
    /// is narrowing to a sub-grading, e.g. the `u = 0` slice).
    pub fn filter_terms(&self, mut pred: impl FnMut(&Monomial) -> bool) -> Series {
        let mut out = Series::zero(self.caps.clone());
        for (m, c) in &self.terms {
            if pred(m) {
                out.terms.insert(m.clone(), c.clone());
            }
        }
        out
    }

    /// exp of a series with zero constant term. Requires every term to move
    /// strictly up the truncation order (positive weight, or weight zero
    /// with all parameter exponents nonnegative and at least one positive).
    pub fn exp(&self) -> Result<Series> {
        if !self.coefficient_unchecked(&Monomial::one()).is_zero() {
            return Err(Error::ExpNonzeroConstant);
        }
        self.check_nilpotent()?;
        let mut acc = Series::one(self.caps.clone());
        let mut power = Series::one(self.caps.clone());
        let mut k = 1u64;
        loop {
            power = power.mul(self);
            if power.is_zero() {
                break;
            }
            power = power.scale(&Rat::new(1, k as i64));
            acc = acc.add(&power);
            k += 1;
        }
        Ok(acc)
    }

    /// log of a series with constant term exactly 1.
    pub fn log(&self) -> Result<Series> {
        if !self.coefficient_unchecked(&Monomial::one()).is_one() {
            return Err(Error::LogConstantNotOne);
        }
        let x = self.sub(&Series::one(self.caps.clone()));
        x.check_nilpotent()?;
        let mut acc = Series::zero(self.caps.clone());
        let mut power = Series::one(self.caps.clone());
        let mut k = 1i64;
        loop {
            power = power.mul(&x);
            if power.is_zero() {
                break;
            }
            let sign = if k % 2 == 1 {
                Rat::new(1, k)
            } else {
                Rat::new(-1, k)
            };
            acc = acc.add(&power.scale(&sign));
            k += 1;
        }
        Ok(acc)
    }

    fn check_nilpotent(&self) -> Result<()> {
        for m in self.terms.keys() {
            let ok = m.weight() > 0
                || (m.params.iter().all(|&e| e >= 0) && m.params.iter().any(|&e| e > 0));
            if !ok {
                return Err(Error::NotNilpotent(m.to_string()));
            }
        }
        Ok(())
    }

    /// Weight of the heaviest stored term.
    pub fn max_weight(&self) -> u32 {
        self.terms.keys().map(|m| m.weight()).max().unwrap_or(0)
    }

    /// Smallest exponent of `p` among stored terms, if any term exists.
    pub fn min_param_exp(&self, p: Param) -> Option<i32> {
        self.terms.keys().map(|m| m.param_exp(p)).min()
    }

    pub fn max_param_exp(&self, p: Param) -> Option<i32> {
        self.terms.keys().map(|m| m.param_exp(p)).max()
    }

    /// First term in canonical order, for failure reports.
    pub fn first_term(&self) -> Option<(&Monomial, &Rat)> {
        self.terms.iter().next()
    }

    /// Term-level equality, ignoring caps.
    pub fn same_terms(&self, other: &Series) -> bool {
        self.terms == other.terms
    }

    /// The variable families that actually occur.
    pub fn families(&self) -> Vec<Family> {
        let mut fams = Vec::new();
        for m in self.terms.keys() {
            for &(v, _) in m.vars() {
                if !fams.contains(&v.family) {
                    fams.push(v.family);
                }
            }
        }
        fams
    }
}

impl fmt::Display for Series {
    /// Canonical rendering: terms in graded-lex order, rationals as
    /// `num/den`, joined by ` + `/` - `. Bit-exact across runs.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (m, c)) in self.terms.iter().enumerate() {
            let neg = c.numerator().sign() == num_bigint::Sign::Minus;
            let abs = if neg { -c.clone() } else { c.clone() };
            if i == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else if neg {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            if m.is_one() {
                write!(f, "{}", abs)?;
            } else {
                write!(f, "{}*{}", abs, m)?;
            }
        }
        Ok(())
    }
}
