//! The lambda_g machinery: the top Hodge generating series `F^top`, the
//! symmetrization identity behind Faber's closed form, the Bernoulli
//! reduction operator `W`, and the `G~`/`Psi` evolution equations.
//!
//! `F^top = sum (-1)^g <lambda_g tau_0^{k_0} tau_1^{k_1} ...>_g prod t^k/k!`
//! satisfies
//!
//! ```text
//! F - sum_i t_i dF/dt_i + 1/2 sum_{i,j} C(i+j, i) t_i t_j dF/dt_{i+j-1}
//!   + t_0^3/3 = 0,
//! ```
//!
//! so its degree-`m` layers obey `F^(m+1) = A F^(m) / m` with
//! `A = 1/2 sum C(i+j,i) t_i t_j d/dt_{i+j-1}` and the seed
//! `F^(1) = sum_g c_g t_{2g-2}`, `c_g = <lambda_g tau_{2g-2}>_g` (the index
//! `i+j-1` and the symmetrization exponents are forced by the degree
//! bookkeeping: `A P_{m,d} = m P_{m+1,d+1}` and `Sigma_m P_{m,d} = (sum x)^d`).
//!
//! The reduction operator (Bernoulli convention `B_2 = 1/6, B_4 = -1/30`):
//!
//! ```text
//! e^calF = e^W e^F,
//! W = -sum_{k>=1} B_{2k} u^{2(2k-1)} / (2k(2k-1)) *
//!     (d/dt_{2k} - sum_i t_i d/dt_{i+2k-1}
//!      + 1/2 sum_{i+j=2k-2} (-1)^i d^2/dt_i dt_j).
//! ```

use crate::diffop::{apply, exact_coeff_caps, materialize, DiffOp, OpSpec, OpTerm};
use crate::elsv::{r_shift, rtilde_shift, subscript_sum, u_series_to_v, CorrelatorTable};
use crate::error::{Error, Result};
use crate::kp::{EquationId, KpReport};
use crate::rat::{bernoulli, binomial, factorial, multinomial, Rat};
use crate::series::{Caps, Family, Monomial, Param, Series, Var, Window};
use std::collections::BTreeMap;

/// A truncation of `F^top`: series in `t`-variables whose degree-`m`
/// homogeneous layers sit on the shells `subscript sum = 2g - 3 + m`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TopSeries {
    series: Series,
    max_factors: u32,
}

impl TopSeries {
    pub fn series(&self) -> &Series {
        &self.series
    }

    pub fn max_factors(&self) -> u32 {
        self.max_factors
    }

    /// The degree-`m` homogeneous layer.
    pub fn layer(&self, m: u32) -> Series {
        self.series.filter_terms(|mono| mono.degree() == m)
    }
}

// ---------------------------------------------------------------------------
// The operator A and the symmetric polynomials P_{m,d}
// ---------------------------------------------------------------------------

fn op_a_materialized(weight_cap: u32) -> DiffOp {
    let mut terms = Vec::new();
    // 1/2 sum_{i,j>=0} C(i+j, i) t_i t_j d/dt_{i+j-1}; i = j = 0 acts on
    // t_{-1}, which does not exist, so it is dropped
    let max_idx = weight_cap / 2;
    for i in 0..=max_idx {
        for j in i..=max_idx {
            if i == 0 && j == 0 {
                continue;
            }
            if (2 * i + 1) + (2 * j + 1) > weight_cap {
                continue;
            }
            let arrangements = if i == j { 1 } else { 2 };
            let c =
                Rat::from_bigint(binomial((i + j) as u64, i as u64)) * &Rat::new(arrangements, 2);
            terms.push(OpTerm::new(
                Series::constant(c, exact_coeff_caps(0)),
                vec![(Var::t(i), 1), (Var::t(j), 1)],
                vec![(Var::t(i + j - 1), 1)],
            ));
        }
    }
    materialize(&OpSpec::Custom(terms), Family::T, weight_cap)
}

/// `A s` for a series in `t`-variables: raises the factor count and the
/// subscript sum by one each.
pub fn op_a(s: &Series) -> Series {
    apply(&op_a_materialized(s.caps().weight), s)
}

/// `P_{m,d} = 1/m! sum_{d_1+..+d_m=d} C(d; d_1..d_m) t_{d_1}...t_{d_m}`.
pub fn p_md(m: u32, d: u32, weight_cap: u32) -> Series {
    let caps = Caps::weight_only(weight_cap);
    let mut out = Series::zero(caps);
    for parts in multisets_nonneg(m as usize, d) {
        let mut mono = Monomial::one();
        let mut denom = Rat::one();
        let mut mults: BTreeMap<u32, u32> = BTreeMap::new();
        for &p in &parts {
            mono = mono.times_var(Var::t(p), 1);
            *mults.entry(p).or_insert(0) += 1;
        }
        for (_, mult) in mults {
            denom *= &Rat::from_bigint(factorial(mult));
        }
        let c = Rat::from_bigint(multinomial(&parts)) / denom;
        out.accumulate_clipped(mono, c);
    }
    out
}

fn multisets_nonneg(n: usize, total: u32) -> Vec<Vec<u32>> {
    fn rec(n: usize, total: u32, max: u32, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if n == 0 {
            if total == 0 {
                out.push(prefix.clone());
            }
            return;
        }
        for d in (0..=max.min(total)).rev() {
            prefix.push(d);
            rec(n - 1, total - d, d, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, total, total, &mut Vec::new(), &mut out);
    out
}

/// A symmetric polynomial in `x_1..x_m`, stored by the coefficient of the
/// representative monomial with weakly decreasing exponents.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SymPoly {
    pub nvars: usize,
    pub coeffs: BTreeMap<Vec<u32>, Rat>,
}

impl SymPoly {
    fn accumulate(&mut self, mut expo: Vec<u32>, c: Rat) {
        expo.sort_unstable_by(|a, b| b.cmp(a));
        let entry = self.coeffs.entry(expo).or_default();
        *entry += &c;
        if entry.is_zero() {
            self.coeffs.retain(|_, v| !v.is_zero());
        }
    }

    /// `(x_1 + ... + x_m)^d`.
    pub fn power_sum(m: usize, d: u32) -> SymPoly {
        let mut out = SymPoly {
            nvars: m,
            coeffs: BTreeMap::new(),
        };
        for parts in multisets_nonneg(m, d) {
            out.accumulate(parts.clone(), Rat::from_bigint(multinomial(&parts)));
        }
        out
    }

    pub fn scale(&self, c: &Rat) -> SymPoly {
        SymPoly {
            nvars: self.nvars,
            coeffs: self
                .coeffs
                .iter()
                .map(|(k, v)| (k.clone(), v * c))
                .collect(),
        }
    }
}

/// `Sigma_m (t_{d_1}...t_{d_m}) = Sym_m x_1^{d_1}...x_m^{d_m}` extended
/// linearly: the symmetrization isomorphism onto symmetric polynomials in
/// `m` variables. The input must be homogeneous of factor count `m`.
pub fn symmetrize(m: usize, s: &Series) -> Result<SymPoly> {
    let mut out = SymPoly {
        nvars: m,
        coeffs: BTreeMap::new(),
    };
    for (mono, c) in s.iter() {
        if mono.degree() as usize != m {
            return Err(Error::NonHomogeneous);
        }
        let mut expo = Vec::with_capacity(m);
        let mut aut = Rat::one();
        for &(v, e) in mono.vars() {
            debug_assert_eq!(v.family, Family::T);
            for _ in 0..e {
                expo.push(v.index);
            }
            aut *= &Rat::from_bigint(factorial(e));
        }
        // Sym_m over all m! permutations: the representative coefficient
        // picks up the stabilizer prod mult_j!
        out.accumulate(expo, c * &aut);
    }
    Ok(out)
}

/// Inverse of [`symmetrize`] on representatives (injectivity in action).
pub fn unsymmetrize(p: &SymPoly, weight_cap: u32) -> Series {
    let caps = Caps::weight_only(weight_cap);
    let mut out = Series::zero(caps);
    for (expo, c) in &p.coeffs {
        let mut mono = Monomial::one();
        let mut aut = Rat::one();
        let mut mults: BTreeMap<u32, u32> = BTreeMap::new();
        for &d in expo {
            mono = mono.times_var(Var::t(d), 1);
            *mults.entry(d).or_insert(0) += 1;
        }
        for (_, mult) in mults {
            aut *= &Rat::from_bigint(factorial(mult));
        }
        out.accumulate_clipped(mono, c / &aut);
    }
    out
}

// ---------------------------------------------------------------------------
// F^top
// ---------------------------------------------------------------------------

/// Builds `F^top` to the given factor count from the seeds
/// `c_g = <lambda_g tau_{2g-2}>_g`, `g = 1..=g_max`, plus the genus-zero
/// layer that the `t_0^3/3` inhomogeneity seeds on its own.
pub fn ftop_build(max_factors: u32, seeds: &BTreeMap<u32, Rat>) -> TopSeries {
    let g_max = seeds.keys().max().copied().unwrap_or(0);
    let weight_cap = 4 * g_max + 3 * max_factors;
    let caps = Caps::weight_only(weight_cap);
    let mut layer = Series::zero(caps.clone());
    for (&g, c) in seeds {
        assert!(g >= 1, "seeds start at genus 1");
        // the series carries (-1)^g <lambda_g ...>, and the defining
        // equation is sign-blind per genus sector, so the seed must be
        // signed here
        let signed = if g % 2 == 1 { -c.clone() } else { c.clone() };
        layer = layer.add(&Series::monomial(
            Monomial::var(Var::t(2 * g - 2), 1),
            signed,
            caps.clone(),
        ));
    }
    let a = op_a_materialized(weight_cap);
    let mut total = layer.clone();
    for m in 2..=max_factors {
        let mut next = apply(&a, &layer);
        if m == 3 {
            next = next.add(&Series::monomial(
                Monomial::var(Var::t(0), 3),
                Rat::new(1, 3),
                caps.clone(),
            ));
        }
        layer = next.scale(&Rat::new(1, m as i64 - 1));
        // re-pin the container caps so layers keep accumulating
        layer = layer.with_trusted_caps(caps.clone());
        total = total.add(&layer);
    }
    TopSeries {
        series: total,
        max_factors,
    }
}

/// Residual of the defining equation of `F^top`, restricted to the factor
/// counts the truncation determines:
/// `F - sum t_i dF/dt_i + A F + t_0^3/3` on degrees `<= max_factors`.
pub fn ftop_residual(f: &TopSeries) -> Series {
    let s = f.series();
    let euler = {
        let mut out = Series::zero(s.caps().clone());
        for (m, c) in s.iter() {
            out.accumulate_clipped(m.clone(), c * &Rat::from_int(m.degree() as i64));
        }
        out
    };
    let cube = Series::monomial(
        Monomial::var(Var::t(0), 3),
        Rat::new(1, 3),
        s.caps().clone(),
    );
    s.sub(&euler)
        .add(&op_a(s).with_trusted_caps(s.caps().clone()))
        .add(&cube)
        .filter_terms(|m| m.degree() <= f.max_factors)
}

/// Reads the seed constants `c_g = <lambda_g tau_{2g-2}>_g` off a solved
/// correlator table (never hard-coded).
pub fn seed_constants(table: &CorrelatorTable, g_max: u32) -> Result<BTreeMap<u32, Rat>> {
    let mut seeds = BTreeMap::new();
    for g in 1..=g_max {
        let c = table.get(g, &[2 * g - 2], g).ok_or(Error::MissingSeed(g))?;
        seeds.insert(g, c.clone());
    }
    Ok(seeds)
}

/// Faber's closed form: `<lambda_g tau_{d_1}..tau_{d_n}>_g =
/// C(2g-3+n; d_1..d_n) c_g` for every shell entry with `sum d = 2g-3+n`.
/// `true` iff all entries of the table's `j = g` stratum match exactly.
pub fn faber_check(g: u32, n: u32, table: &CorrelatorTable) -> Result<bool> {
    let total = 2 * g as i64 - 3 + n as i64;
    if total < 0 {
        return Ok(true); // empty shell
    }
    let c_g = table.get(g, &[2 * g - 2], g).ok_or(Error::MissingSeed(g))?;
    for ds in multisets_nonneg(n as usize, total as u32) {
        let value = table.get(g, &ds, g).ok_or(Error::MissingCorrelator {
            j: g,
            ks: ds.clone(),
            genus: g,
        })?;
        let expect = Rat::from_bigint(multinomial(&ds)) * c_g;
        if *value != expect {
            return Ok(false);
        }
    }
    Ok(true)
}

// ---------------------------------------------------------------------------
// The reduction operator W
// ---------------------------------------------------------------------------

/// One `u`-block of `W`: the operator multiplying `u^{2(2k-1)}`.
fn w_block(k: u32, weight_cap: u32) -> DiffOp {
    let c_k =
        -(bernoulli(2 * k) / (Rat::from_int(2 * k as i64) * &Rat::from_int(2 * k as i64 - 1)));
    let mut terms = Vec::new();
    let coeffs = |c: Rat| Series::constant(c, exact_coeff_caps(0));
    // d/dt_{2k}
    terms.push(OpTerm::new(
        coeffs(c_k.clone()),
        vec![],
        vec![(Var::t(2 * k), 1)],
    ));
    // - sum_i t_i d/dt_{i+2k-1}
    let max_i = weight_cap / 2;
    for i in 0..=max_i {
        terms.push(OpTerm::new(
            coeffs(-c_k.clone()),
            vec![(Var::t(i), 1)],
            vec![(Var::t(i + 2 * k - 1), 1)],
        ));
    }
    // + 1/2 sum_{i+j=2k-2} (-1)^i d^2/dt_i dt_j
    let s = 2 * k - 2;
    for i in 0..=s {
        let j = s - i;
        if i > j {
            continue;
        }
        let sign = if i % 2 == 0 { Rat::one() } else { -Rat::one() };
        let arrangements = if i == j { Rat::new(1, 2) } else { Rat::one() };
        terms.push(OpTerm::new(
            coeffs(&c_k * &(sign * &arrangements)),
            vec![],
            vec![(Var::t(i), 1), (Var::t(j), 1)],
        ));
    }
    materialize(&OpSpec::Custom(terms), Family::T, weight_cap)
}

/// `calF(u, t) = log(e^W e^F)` truncated at the u-cap. The trustworthy
/// region is diagonal: the weight at `u`-order `a` is reliable up to
/// [`w_trusted_weight`]`(f_weight, a)`; everything stored respects it.
pub fn w_reduce(f_t: &Series, u_cap: i32) -> Result<Series> {
    let f_weight = f_t.caps().weight;
    let caps = Caps::weight_only(f_weight).with_window(Param::U, 0, u_cap);
    let ef = f_t.exp()?;
    let mut acc = Series::zero(caps);
    // expand e^W = sum over ordered application sequences (k_1, ..., k_s)
    // of W-blocks, each sequence weighted 1/s!
    let mut stack: Vec<(Series, i32, u32)> = vec![(ef, 0, 0)];
    while let Some((cur, u_order, depth)) = stack.pop() {
        let scale = Rat::from_bigint(factorial(depth)).recip();
        let shift = Monomial::param(Param::U, u_order);
        for (m, c) in cur.iter() {
            acc.accumulate_clipped(m.mul(&shift), c * &scale);
        }
        let mut k = 1u32;
        loop {
            let du = 2 * (2 * k as i32 - 1);
            if u_order + du > u_cap {
                break;
            }
            let block = w_block(k, cur.caps().weight);
            let next = apply(&block, &cur);
            if !next.is_zero() {
                stack.push((next, u_order + du, depth + 1));
            }
            k += 1;
        }
    }
    acc.log()
}

/// Trusted weight of the `u^a` stratum of [`w_reduce`] output when the
/// input was exact to `f_weight`: each `u^{2(2k-1)}` block costs at most
/// `4k + 1` weight, so the worst case over compositions of `a` is
/// `a + 3 * (a / 2)`.
pub fn w_trusted_weight(f_weight: u32, u_order: i32) -> i64 {
    f_weight as i64 - u_order as i64 - 3 * (u_order as i64 / 2)
}

/// Extracts every correlator `<lambda_j tau_{d_1}..>_g` whose monomial
/// `u^{2j} prod t` lies inside the trusted diagonal of a reduced series.
pub fn reduction_correlators(fcal: &Series, f_weight: u32) -> CorrelatorTable {
    let mut table = CorrelatorTable::new();
    let mut seen: BTreeMap<(u32, Vec<u32>, u32), Rat> = BTreeMap::new();
    for (m, c) in fcal.iter() {
        let u = m.param_exp(Param::U);
        if u % 2 != 0 || (m.weight() as i64) > w_trusted_weight(f_weight, u) {
            continue;
        }
        let j = (u / 2) as u32;
        let mut ds: Vec<u32> = Vec::new();
        let mut aut = Rat::one();
        for &(v, e) in m.vars() {
            for _ in 0..e {
                ds.push(v.index);
            }
            aut *= &Rat::from_bigint(factorial(e));
        }
        ds.sort_unstable_by(|a, b| b.cmp(a));
        let n = ds.len() as i64;
        let total: i64 = ds.iter().map(|&d| d as i64).sum();
        // dimension shell: j + sum d = 3g - 3 + n
        let three_g = j as i64 + total + 3 - n;
        if three_g < 0 || three_g % 3 != 0 {
            continue;
        }
        let g = (three_g / 3) as u32;
        if 2 * g as i64 - 2 + n <= 0 {
            continue;
        }
        let sign = if j % 2 == 1 { -Rat::one() } else { Rat::one() };
        seen.insert((j, ds, g), c * &aut * &sign);
    }
    for ((j, ds, g), v) in seen {
        table.insert(j, &ds, g, v);
    }
    table
}

// ---------------------------------------------------------------------------
// G~ and Psi
// ---------------------------------------------------------------------------

fn wide_u_caps(weight_cap: u32) -> Caps {
    Caps::weight_only(weight_cap).with_window(Param::U, -Window::WIDE_HI, Window::WIDE_HI)
}

/// `G~`: the series `G` in the intermediate variables `r~_i = r_i / v`,
/// expressed in `v = u^(-3)`. Exact for r-weights `I` with `3 I <= Wq` and
/// `2 I <= Uc` when `G` is exact on `(Wq, u <= Uc)`; the returned series is
/// truncated to that trusted region.
pub fn gtilde_from_g(g: &Series, r_weight_cap: u32) -> Result<Series> {
    let wq = g.caps().weight;
    let uc = g.caps().window(Param::U).hi;
    if 3 * r_weight_cap > wq || 2 * r_weight_cap as i32 > uc {
        return Err(Error::InsufficientCaps(format!(
            "G~ to r-weight {r_weight_cap} needs G at (weight {}, u {})",
            3 * r_weight_cap,
            2 * r_weight_cap
        )));
    }
    let shifted = rtilde_shift(g, &wide_u_caps(r_weight_cap))?;
    let wq = g.caps().weight as i64;
    let uc = g.caps().window(Param::U).hi as i64;
    // a positive u-exponent s at r-weight I is trusted iff every source
    // contributing to it was present: B <= 3I + s <= Wq and the u-exponent
    // of the deepest source s + 2I <= Uc
    series_to_v_checked(&shifted, |m| {
        (wq - 3 * m.weight() as i64).min(uc - 2 * m.weight() as i64)
    })
}

/// Converts to `v = u^(-3)` after verifying the power-series-in-v claim on
/// the trusted band of positive u-exponents (where all truncation partners
/// were present, surviving positive powers are genuine failures) and
/// discarding the untrusted band beyond it.
fn series_to_v_checked(s: &Series, trusted_pos_band: impl Fn(&Monomial) -> i64) -> Result<Series> {
    let mut kept = Series::zero(s.caps().clone());
    for (m, c) in s.iter() {
        let e = m.param_exp(Param::U) as i64;
        if e > 0 {
            if e <= trusted_pos_band(m) {
                return Err(Error::NotAPowerSeriesInV(m.to_string()));
            }
            continue;
        }
        kept.accumulate_clipped(m.clone(), c.clone());
    }
    u_series_to_v(&kept)
}

/// `Psi = v G(q(r))`: exact on subscript sums `d <= d_cap` when `G` is
/// exact on `(weight >= 3 d_cap + 3, u >= 2 d_cap + 2)`; truncated to that
/// region (`d = weight - degree` of an r-monomial).
pub fn psi_from_g(g: &Series, d_cap: i64) -> Result<Series> {
    let wq = g.caps().weight as i64;
    let uc = g.caps().window(Param::U).hi as i64;
    if 3 * d_cap + 3 > wq || 2 * d_cap + 2 > uc {
        return Err(Error::InsufficientCaps(format!(
            "Psi to subscript sum {d_cap} needs G at (weight {}, u {})",
            3 * d_cap + 3,
            2 * d_cap + 2
        )));
    }
    let container = wide_u_caps(g.caps().weight);
    let shifted = r_shift(g, &container)?;
    let v_times = shifted.mul_monomial(&Monomial::param(Param::U, -3), &Rat::one());
    let wq = g.caps().weight as i64;
    let uc = g.caps().window(Param::U).hi as i64;
    let psi = series_to_v_checked(&v_times, |m| {
        let d = subscript_sum(m);
        (wq - 3 * d - 3).min(uc - 2 * d - 2)
    })?;
    Ok(psi.filter_terms(|m| subscript_sum(m) <= d_cap))
}

/// Residual of the `G~` evolution equation
/// `d e^G~/dv = (-M_2 + 2v M_3 - v^2 M_4 + Lambda_1 + v/6 a_3 - v^2/8 a_4) e^G~`.
///
/// The `M_4` term carries `v^2`: the binomial pattern `(-M_2 + 2v M_3
/// - v^2 M_4)` is the operator side of the `(-r_{k+2} + 2v r_{k+3}
/// - v^2 r_{k+4})` pattern in the `Psi` equation, and it keeps `M_4`
/// paired with the `v^2 a_4 / 8` term. With a bare `M_4` the residual is
/// exactly `(1 - v^2) M_4 e^G~`, nonzero.
pub fn gtilde_evolution_residual(gt: &Series) -> Result<KpReport> {
    let egt = gt.exp()?;
    let lhs = egt.dparam(Param::V);
    let coeff = |num: i64, den: i64, vpow: i32| {
        Series::monomial(
            Monomial::param(Param::V, vpow),
            Rat::new(num, den),
            exact_coeff_caps(0),
        )
    };
    let op = OpSpec::LinComb(vec![
        (coeff(-1, 1, 0), OpSpec::M(2)),
        (coeff(2, 1, 1), OpSpec::M(3)),
        (coeff(-1, 1, 2), OpSpec::M(4)),
        (coeff(1, 1, 0), OpSpec::Lambda(1)),
        (coeff(1, 6, 1), OpSpec::A(3)),
        (coeff(-1, 8, 2), OpSpec::A(4)),
    ]);
    let rhs = apply(&materialize(&op, Family::R, gt.caps().weight + 4), &egt);
    Ok(KpReport::new(EquationId::GTilde, lhs.sub(&rhs)))
}

/// Residual of the `Psi` evolution equation (the long displayed PDE),
/// restricted to the subscript sums where `Psi` is exact. All terms of the
/// equation raise `d = weight - degree` and the `v`-order by nonnegative
/// amounts, so the restriction is sound.
pub fn psi_pde_residual(psi: &Series, d_cap: i64) -> KpReport {
    let caps = psi.caps().clone();
    let w = caps.weight;
    let rvar = |i: u32| Var::r(i);
    let dpsi: Vec<Series> = (0..=w)
        .map(|i| {
            if i == 0 {
                psi.clone()
            } else {
                psi.deriv(rvar(i), 1)
            }
        })
        .collect();
    let lhs = psi
        .dparam(Param::V)
        .mul_monomial(&Monomial::param(Param::V, 1), &Rat::one());
    let mut rhs = psi.clone();
    // sum_i (v i r_{i+1} - r_i) dPsi/dr_i
    for i in 1..=w {
        if dpsi[i as usize].is_zero() {
            continue;
        }
        if i + 1 <= w {
            rhs = rhs.add(&dpsi[i as usize].mul_monomial(
                &Monomial::var(rvar(i + 1), 1).times_param(Param::V, 1),
                &Rat::from_int(i as i64),
            ));
        }
        rhs = rhs.add(&dpsi[i as usize].mul_monomial(&Monomial::var(rvar(i), 1), &-Rat::one()));
    }
    // the quadratic blocks, over ordered pairs i + j = k with the global 1/2
    for i in 1..=w {
        for j in 1..=w {
            let k = i + j;
            // ij v (-r_{k+2} + 2v r_{k+3} - v^2 r_{k+4}) (v Psi_ij + Psi_i Psi_j)
            let second = psi.deriv(rvar(i), 1).deriv(rvar(j), 1);
            let prod = dpsi[i as usize].mul(&dpsi[j as usize]);
            let bracket = second
                .mul_monomial(&Monomial::param(Param::V, 1), &Rat::one())
                .add(&prod);
            if !bracket.is_zero() {
                let ij = Rat::from_int((i * j) as i64) * &Rat::new(1, 2);
                for (ridx, vpow, sign) in [(k + 2, 1, -1i64), (k + 3, 2, 2), (k + 4, 3, -1)] {
                    if ridx > w {
                        continue;
                    }
                    rhs = rhs.add(&bracket.mul_monomial(
                        &Monomial::var(rvar(ridx), 1).times_param(Param::V, vpow),
                        &(&ij * &Rat::from_int(sign)),
                    ));
                }
            }
            // r_i r_j (-(k-2) Psi_{k-2} + 2v (k-3) Psi_{k-3} - v^2 (k-4) Psi_{k-4})
            let rr = Monomial::var(rvar(i), 1).times_var(rvar(j), 1);
            for (didx, vpow, sign) in [
                (k as i64 - 2, 0, -1i64),
                (k as i64 - 3, 1, 2),
                (k as i64 - 4, 2, -1),
            ] {
                if didx < 1 || didx as u32 > w {
                    continue;
                }
                let h = &dpsi[didx as usize];
                if h.is_zero() {
                    continue;
                }
                rhs = rhs.add(&h.mul_monomial(
                    &rr.clone().times_param(Param::V, vpow),
                    &(Rat::new(sign, 2) * &Rat::from_int(didx)),
                ));
            }
        }
    }
    // + r_1^3/3 - v/2 r_1^2 r_2 + v^2/6 r_3 - v^3/8 r_4
    let caps_c = caps.clone();
    let extra = Series::monomial(Monomial::var(rvar(1), 3), Rat::new(1, 3), caps_c.clone())
        .add(&Series::monomial(
            Monomial::var(rvar(1), 2)
                .times_var(rvar(2), 1)
                .times_param(Param::V, 1),
            Rat::new(-1, 2),
            caps_c.clone(),
        ))
        .add(&Series::monomial(
            Monomial::var(rvar(3), 1).times_param(Param::V, 2),
            Rat::new(1, 6),
            caps_c.clone(),
        ))
        .add(&Series::monomial(
            Monomial::var(rvar(4), 1).times_param(Param::V, 3),
            Rat::new(-1, 8),
            caps_c,
        ));
    let rhs = rhs.add(&extra);
    let residual = lhs.sub(&rhs).filter_terms(|m| subscript_sum(m) <= d_cap);
    KpReport::new(EquationId::Psi, residual)
}

/// Subscript sum of a `t`-family monomial (`wt t_d = 2d + 1`, so the sum
/// of the `d`s is half of weight minus degree).
pub fn t_subscript_sum(m: &Monomial) -> i64 {
    (m.weight() as i64 - m.degree() as i64) / 2
}

/// The `v = 0` slice of `Psi` rewritten through `t_k = (-1)^k k! r_{k+1}`,
/// i.e. `r_{k+1} -> (-1)^k t_k / k!`: by the dual construction this equals
/// `F^top` on the trusted subscript sums.
pub fn psi_v0_as_ftop(psi: &Series) -> Series {
    let slice = psi.filter_terms(|m| m.param_exp(Param::V) == 0);
    let mut out = Series::zero(Caps::weight_only(2 * psi.caps().weight + 1));
    for (m, c) in slice.iter() {
        let mut mono = Monomial::one();
        let mut coeff = c.clone();
        for &(v, e) in m.vars() {
            debug_assert_eq!(v.family, Family::R);
            let k = v.index - 1;
            mono = mono.times_var(Var::t(k), e);
            for _ in 0..e {
                coeff = coeff / Rat::from_bigint(factorial(k));
                if k % 2 == 1 {
                    coeff = -coeff;
                }
            }
        }
        out.accumulate_clipped(mono, coeff);
    }
    out
}
