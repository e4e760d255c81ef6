//! Truncated Laurent series in one variable `z` with parameter coefficients.
//!
//! A [`LaurentZ`] stores terms `c * z^k * beta^a u^b ...` with integer `k`
//! bounded below by a hard floor and above by a truncation cap, mirroring
//! the window semantics of [`crate::series::Series`]. These series host the
//! coordinate changes `x(z)`, the wedge factors of the Hurwitz tau-function,
//! and the `Xi` transform.

use crate::error::{Error, Result};
use crate::rat::Rat;
use crate::series::{Param, ParamExps, Window, PARAMS};
use std::collections::BTreeMap;
use std::fmt;

/// Truncation data for a Laurent series: a z-range plus parameter windows.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ZCaps {
    /// Hard floor: the exact series has no terms below this z-exponent.
    pub z_lo: i64,
    /// Truncation cap: terms above are unknown and dropped.
    pub z_hi: i64,
    pub windows: [Window; 4],
}

impl ZCaps {
    pub fn new(z_lo: i64, z_hi: i64) -> Self {
        assert!(z_lo <= z_hi);
        ZCaps {
            z_lo,
            z_hi,
            windows: [Window::ZERO; 4],
        }
    }

    pub fn with_window(mut self, p: Param, lo: i32, hi: i32) -> Self {
        self.windows[p.idx()] = Window::new(lo, hi);
        self
    }

    fn admits(&self, k: i64, params: &ParamExps) -> bool {
        if k < self.z_lo || k > self.z_hi {
            return false;
        }
        (0..4).all(|i| self.windows[i].contains(params[i]))
    }

    fn meet_add(&self, other: &ZCaps) -> ZCaps {
        let mut windows = [Window::ZERO; 4];
        for i in 0..4 {
            windows[i] = Window {
                lo: self.windows[i].lo.min(other.windows[i].lo),
                hi: self.windows[i].hi.min(other.windows[i].hi),
            };
        }
        ZCaps {
            z_lo: self.z_lo.min(other.z_lo),
            z_hi: self.z_hi.min(other.z_hi),
            windows,
        }
    }

    fn meet_mul(&self, other: &ZCaps) -> ZCaps {
        let mut windows = [Window::ZERO; 4];
        for i in 0..4 {
            let (a, b) = (self.windows[i], other.windows[i]);
            windows[i] = Window {
                lo: a.lo + b.lo,
                hi: (a.hi + b.lo).min(b.hi + a.lo),
            };
        }
        ZCaps {
            z_lo: self.z_lo + other.z_lo,
            z_hi: (self.z_hi + other.z_lo).min(other.z_hi + self.z_lo),
            windows,
        }
    }
}

/// Sparse truncated Laurent series in `z`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LaurentZ {
    terms: BTreeMap<(i64, ParamExps), Rat>,
    caps: ZCaps,
}

impl LaurentZ {
    pub fn zero(caps: ZCaps) -> Self {
        LaurentZ {
            terms: BTreeMap::new(),
            caps,
        }
    }

    pub fn term(k: i64, params: ParamExps, c: Rat, caps: ZCaps) -> Self {
        let mut s = LaurentZ::zero(caps);
        s.accumulate(k, params, c);
        s
    }

    /// The monomial `z^k`.
    pub fn z_pow(k: i64, caps: ZCaps) -> Self {
        LaurentZ::term(k, [0; 4], Rat::one(), caps)
    }

    pub fn caps(&self) -> &ZCaps {
        &self.caps
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&(i64, ParamExps), &Rat)> {
        self.terms.iter()
    }

    pub fn min_z(&self) -> Option<i64> {
        self.terms.keys().map(|&(k, _)| k).min()
    }

    fn accumulate(&mut self, k: i64, params: ParamExps, c: Rat) {
        if c.is_zero() || !self.caps.admits(k, &params) {
            return;
        }
        match self.terms.entry((k, params)) {
            std::collections::btree_map::Entry::Occupied(mut e) => {
                *e.get_mut() += &c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
        }
    }

    pub fn coefficient(&self, k: i64, params: ParamExps) -> Result<Rat> {
        if !self.caps.admits(k, &params) {
            return Err(Error::CoefficientOutsideCaps(format!("z^{k} {params:?}")));
        }
        Ok(self.terms.get(&(k, params)).cloned().unwrap_or_default())
    }

    pub fn add(&self, other: &LaurentZ) -> LaurentZ {
        let mut out = LaurentZ::zero(self.caps.meet_add(&other.caps));
        for (&(k, p), c) in self.terms.iter().chain(other.terms.iter()) {
            out.accumulate(k, p, c.clone());
        }
        out
    }

    pub fn neg(&self) -> LaurentZ {
        let mut out = self.clone();
        for c in out.terms.values_mut() {
            *c = -c.clone();
        }
        out
    }

    pub fn sub(&self, other: &LaurentZ) -> LaurentZ {
        self.add(&other.neg())
    }

    pub fn scale(&self, c: &Rat) -> LaurentZ {
        if c.is_zero() {
            return LaurentZ::zero(self.caps.clone());
        }
        let mut out = self.clone();
        for v in out.terms.values_mut() {
            *v *= c;
        }
        out
    }

    pub fn mul(&self, other: &LaurentZ) -> LaurentZ {
        let mut out = LaurentZ::zero(self.caps.meet_mul(&other.caps));
        for (&(ka, pa), ca) in &self.terms {
            for (&(kb, pb), cb) in &other.terms {
                let k = ka + kb;
                if k > out.caps.z_hi {
                    continue;
                }
                let mut p = pa;
                for i in 0..4 {
                    p[i] += pb[i];
                }
                out.accumulate(k, p, ca * cb);
            }
        }
        out
    }

    /// Exact shift by `z^k * params`: caps move along.
    pub fn mul_monomial(&self, k: i64, params: &ParamExps, c: &Rat) -> LaurentZ {
        let mut caps = self.caps.clone();
        caps.z_lo += k;
        caps.z_hi += k;
        for i in 0..4 {
            caps.windows[i].lo += params[i];
            caps.windows[i].hi += params[i];
        }
        let mut out = LaurentZ::zero(caps);
        for (&(kk, pp), cc) in &self.terms {
            let mut p = pp;
            for i in 0..4 {
                p[i] += params[i];
            }
            out.accumulate(kk + k, p, cc * c);
        }
        out
    }

    /// d/dz.
    pub fn deriv_z(&self) -> LaurentZ {
        let mut caps = self.caps.clone();
        caps.z_lo -= 1;
        caps.z_hi -= 1;
        let mut out = LaurentZ::zero(caps);
        for (&(k, p), c) in &self.terms {
            out.accumulate(k - 1, p, c * &Rat::from_int(k));
        }
        out
    }

    /// Formal derivative in a parameter.
    pub fn dparam(&self, p: Param) -> LaurentZ {
        let mut caps = self.caps.clone();
        caps.windows[p.idx()].lo -= 1;
        caps.windows[p.idx()].hi -= 1;
        let mut out = LaurentZ::zero(caps);
        for (&(k, pp), c) in &self.terms {
            let e = pp[p.idx()];
            if e == 0 {
                continue;
            }
            let mut q = pp;
            q[p.idx()] -= 1;
            out.accumulate(k, q, c * &Rat::from_int(e as i64));
        }
        out
    }

    fn require_positive_order(&self) -> Result<()> {
        for &(k, _) in self.terms.keys() {
            if k < 1 {
                return Err(Error::NotNilpotent(format!("z^{k}")));
            }
        }
        Ok(())
    }

    /// `(1 + self)^alpha` by the generalized binomial series; `self` must
    /// have strictly positive z-order. Rational `alpha` keeps everything
    /// exact (used for the `(1 + beta z)^(-3/2)` factor).
    pub fn one_plus_pow(&self, alpha: &Rat) -> Result<LaurentZ> {
        self.require_positive_order()?;
        let one = LaurentZ::term(0, [0; 4], Rat::one(), self.caps_including_one());
        let mut acc = one.clone();
        let mut power = one;
        let mut coeff = Rat::one();
        let mut n = 0i64;
        loop {
            power = power.mul(self);
            if power.is_zero() {
                break;
            }
            n += 1;
            // binom(alpha, n) = binom(alpha, n-1) * (alpha - n + 1) / n
            coeff = coeff * &(alpha - &Rat::from_int(n - 1)) / Rat::from_int(n);
            acc = acc.add(&power.scale(&coeff));
        }
        Ok(acc)
    }

    /// Caps admitting the constant term as well as everything `self` does;
    /// the result caps for power series built on top of `self`.
    fn caps_including_one(&self) -> ZCaps {
        let mut caps = self.caps.clone();
        caps.z_lo = caps.z_lo.min(0);
        for w in caps.windows.iter_mut() {
            w.lo = w.lo.min(0);
        }
        caps
    }

    /// exp of a series with strictly positive z-order.
    pub fn exp(&self) -> Result<LaurentZ> {
        self.require_positive_order()?;
        let mut acc = LaurentZ::term(0, [0; 4], Rat::one(), self.caps_including_one());
        let mut power = acc.clone();
        let mut k = 1i64;
        loop {
            power = power.mul(self);
            if power.is_zero() {
                break;
            }
            power = power.scale(&Rat::new(1, k));
            acc = acc.add(&power);
            k += 1;
        }
        Ok(acc)
    }

    /// Integer power of a series of the form `z * (unit + higher)`, i.e.
    /// unit coefficient on its lowest term `z^1`. Supports negative `e`.
    pub fn unit_z_pow(&self, e: i64) -> Result<LaurentZ> {
        let lead = self.coefficient(1, [0; 4]).unwrap_or_else(|_| Rat::zero());
        if self.min_z() != Some(1) || lead.is_zero() {
            return Err(Error::NonUnitLinearTerm);
        }
        // self = lead * z * (1 + h)
        let h = self
            .mul_monomial(-1, &[0; 4], &lead.recip())
            .sub(&LaurentZ::term(0, [0; 4], Rat::one(), {
                let mut c = self.caps.clone();
                c.z_lo -= 1;
                c.z_hi -= 1;
                c
            }));
        let bracket = h.one_plus_pow(&Rat::from_int(e))?;
        Ok(bracket.mul_monomial(e, &[0; 4], &lead.pow(e as i32)))
    }

    /// Composition `self(w)` for `w = z * (unit + higher)`. The caps of the
    /// result are the meet of `w`'s caps over all powers that contribute.
    pub fn compose(&self, w: &LaurentZ) -> Result<LaurentZ> {
        let mut powers: BTreeMap<i64, LaurentZ> = BTreeMap::new();
        let mut out: Option<LaurentZ> = None;
        for (&(k, p), c) in &self.terms {
            let wk = match powers.get(&k) {
                Some(s) => s.clone(),
                None => {
                    let s = w.unit_z_pow(k)?;
                    powers.insert(k, s.clone());
                    s
                }
            };
            let contrib = wk.mul_monomial(0, &p, c);
            out = Some(match out {
                None => contrib,
                Some(acc) => acc.add(&contrib),
            });
        }
        Ok(out.unwrap_or_else(|| LaurentZ::zero(self.caps.clone())))
    }
}

impl fmt::Display for LaurentZ {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (&(k, p), c) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "{}*z^{}", c, k)?;
            for pm in PARAMS {
                let e = p[pm.idx()];
                if e != 0 {
                    write!(f, "*{}^{}", pm.name(), e)?;
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bz(k: i64, b: i32, num: i64, den: i64, caps: &ZCaps) -> LaurentZ {
        LaurentZ::term(k, [b, 0, 0, 0], Rat::new(num, den), caps.clone())
    }

    #[test]
    fn square_of_z_minus_2bz2() {
        // (z - 2 beta z^2)^2 = z^2 - 4 beta z^3 + 4 beta^2 z^4
        let caps = ZCaps::new(1, 8).with_window(Param::Beta, 0, 4);
        let s = bz(1, 0, 1, 1, &caps).add(&bz(2, 1, -2, 1, &caps));
        let sq = s.mul(&s);
        assert_eq!(sq.coefficient(2, [0, 0, 0, 0]).unwrap(), Rat::one());
        assert_eq!(sq.coefficient(3, [1, 0, 0, 0]).unwrap(), Rat::from_int(-4));
        assert_eq!(sq.coefficient(4, [2, 0, 0, 0]).unwrap(), Rat::from_int(4));
        assert_eq!(sq.iter().count(), 3);
    }

    #[test]
    fn geometric_inverse() {
        // (z + z^2)^-1 = z^-1 (1 - z + z^2 - ...)
        let caps = ZCaps::new(1, 6);
        let w = LaurentZ::z_pow(1, caps.clone()).add(&LaurentZ::z_pow(2, caps));
        let inv = w.unit_z_pow(-1).unwrap();
        assert_eq!(inv.coefficient(-1, [0; 4]).unwrap(), Rat::one());
        assert_eq!(inv.coefficient(0, [0; 4]).unwrap(), Rat::from_int(-1));
        assert_eq!(inv.coefficient(1, [0; 4]).unwrap(), Rat::one());
        // w * w^-1 = 1 on the shared caps
        let prod = w.mul(&inv);
        assert_eq!(prod.coefficient(0, [0; 4]).unwrap(), Rat::one());
        assert_eq!(prod.iter().count(), 1);
    }

    #[test]
    fn binomial_pow_minus_three_halves() {
        // (1 + z)^(-3/2) = 1 - 3/2 z + 15/8 z^2 - ...
        let caps = ZCaps::new(0, 3);
        let h = LaurentZ::z_pow(1, caps);
        let s = h.one_plus_pow(&Rat::new(-3, 2)).unwrap();
        assert_eq!(s.coefficient(1, [0; 4]).unwrap(), Rat::new(-3, 2));
        assert_eq!(s.coefficient(2, [0; 4]).unwrap(), Rat::new(15, 8));
        assert_eq!(s.coefficient(3, [0; 4]).unwrap(), Rat::new(-35, 16));
    }

    #[test]
    fn compose_with_shifted_z() {
        // phi(z) = z^-1, w = z(1+z): phi(w) = z^-1 - 1 + z - z^2 + ...
        let phi = LaurentZ::z_pow(-1, ZCaps::new(-1, 3));
        let w = LaurentZ::z_pow(1, ZCaps::new(1, 5)).add(&LaurentZ::z_pow(2, ZCaps::new(1, 5)));
        let c = phi.compose(&w).unwrap();
        assert_eq!(c.coefficient(-1, [0; 4]).unwrap(), Rat::one());
        assert_eq!(c.coefficient(0, [0; 4]).unwrap(), Rat::from_int(-1));
        assert_eq!(c.coefficient(1, [0; 4]).unwrap(), Rat::one());
    }
}
