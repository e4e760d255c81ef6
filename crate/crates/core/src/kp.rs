//! Executable KP hierarchy checks: the four lowest equations, the KdV
//! specialization, the Virasoro constraints, and the transformed
//! cut-and-join equation.
//!
//! The four hard-coded equations, as residuals moved to one side
//! (`F_{i,j,..}` are iterated partial derivatives):
//!
//! ```text
//! KP22: F22 + 1/2 F11^2 - F31 + 1/12 F1111
//! KP32: F32 + F11 F21 - F41 + 1/6 F2111
//! KP42: F42 + 1/2 F21^2 + F11 F31 - F51 - 1/8 F111^2
//!       - 1/12 F11 F1111 + 1/4 F3111 - 1/120 F111111
//! KP33: F33 - 1/3 F11^3 + F21^2 + F11 F31 - F51 - 1/4 F111^2
//!       - 1/3 F11 F1111 + 1/3 F3111 - 1/45 F111111
//! ```
//!
//! Caps discipline: differentiating shrinks the trustworthy weight, so each
//! report's residual caps are exactly the region where the input truncation
//! determines the residual; `passed` means no nonzero term inside them.

use crate::diffop::{apply, materialize, OpSpec};
use crate::error::{Error, Result};
use crate::rat::{double_factorial_odd, Rat};
use crate::series::{Caps, Family, Monomial, Param, Series, Var, Window};
use rayon::prelude::*;
use std::fmt;

/// Which identity a report speaks about.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EquationId {
    Kp22,
    Kp32,
    Kp42,
    Kp33,
    Virasoro(i64),
    NewCaj,
    GTilde,
    Psi,
}

impl fmt::Display for EquationId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EquationId::Kp22 => write!(f, "KP22"),
            EquationId::Kp32 => write!(f, "KP32"),
            EquationId::Kp42 => write!(f, "KP42"),
            EquationId::Kp33 => write!(f, "KP33"),
            EquationId::Virasoro(m) => write!(f, "VIRASORO({m})"),
            EquationId::NewCaj => write!(f, "NEWCAJ"),
            EquationId::GTilde => write!(f, "GTILDE"),
            EquationId::Psi => write!(f, "PSI"),
        }
    }
}

/// Outcome of one equation check. `passed` holds iff the residual has no
/// nonzero term within its caps.
#[derive(Clone, Debug)]
pub struct KpReport {
    pub id: EquationId,
    pub residual: Series,
    pub passed: bool,
}

impl KpReport {
    pub fn new(id: EquationId, residual: Series) -> Self {
        let passed = residual.is_zero();
        KpReport {
            id,
            residual,
            passed,
        }
    }

    /// Canonical rendering of the first offending monomial, if any.
    pub fn first_offender(&self) -> Option<String> {
        self.residual.first_term().map(|(m, c)| format!("{c}*{m}"))
    }
}

type Term = (Rat, &'static [&'static [u32]]);

fn kp_equation_terms(id: &EquationId) -> Vec<Term> {
    match id {
        EquationId::Kp22 => vec![
            (Rat::one(), &[&[2, 2]]),
            (Rat::new(1, 2), &[&[1, 1], &[1, 1]]),
            (Rat::from_int(-1), &[&[3, 1]]),
            (Rat::new(1, 12), &[&[1, 1, 1, 1]]),
        ],
        EquationId::Kp32 => vec![
            (Rat::one(), &[&[3, 2]]),
            (Rat::one(), &[&[1, 1], &[2, 1]]),
            (Rat::from_int(-1), &[&[4, 1]]),
            (Rat::new(1, 6), &[&[2, 1, 1, 1]]),
        ],
        EquationId::Kp42 => vec![
            (Rat::one(), &[&[4, 2]]),
            (Rat::new(1, 2), &[&[2, 1], &[2, 1]]),
            (Rat::one(), &[&[1, 1], &[3, 1]]),
            (Rat::from_int(-1), &[&[5, 1]]),
            (Rat::new(-1, 8), &[&[1, 1, 1], &[1, 1, 1]]),
            (Rat::new(-1, 12), &[&[1, 1], &[1, 1, 1, 1]]),
            (Rat::new(1, 4), &[&[3, 1, 1, 1]]),
            (Rat::new(-1, 120), &[&[1, 1, 1, 1, 1, 1]]),
        ],
        EquationId::Kp33 => vec![
            (Rat::one(), &[&[3, 3]]),
            (Rat::new(-1, 3), &[&[1, 1], &[1, 1], &[1, 1]]),
            (Rat::one(), &[&[2, 1], &[2, 1]]),
            (Rat::one(), &[&[1, 1], &[3, 1]]),
            (Rat::from_int(-1), &[&[5, 1]]),
            (Rat::new(-1, 4), &[&[1, 1, 1], &[1, 1, 1]]),
            (Rat::new(-1, 3), &[&[1, 1], &[1, 1, 1, 1]]),
            (Rat::new(1, 3), &[&[3, 1, 1, 1]]),
            (Rat::new(-1, 45), &[&[1, 1, 1, 1, 1, 1]]),
        ],
        _ => panic!("not a plain KP equation: {id:?}"),
    }
}

fn series_family(s: &Series) -> Family {
    s.families().first().copied().unwrap_or(Family::P)
}

fn deriv_multi(f: &Series, family: Family, idxs: &[u32]) -> Series {
    let mut out = f.clone();
    for &i in idxs {
        out = out.deriv(Var::new(family, i), 1);
    }
    out
}

/// Residual of one KP equation at the caps implied by the input truncation.
pub fn kp_residual(f: &Series, id: EquationId) -> KpReport {
    let family = series_family(f);
    let mut residual: Option<Series> = None;
    for (coeff, factors) in kp_equation_terms(&id) {
        let mut term: Option<Series> = None;
        for idxs in factors {
            let d = deriv_multi(f, family, idxs);
            term = Some(match term {
                None => d,
                Some(t) => t.mul(&d),
            });
        }
        let term = term.unwrap().scale(&coeff);
        residual = Some(match residual {
            None => term,
            Some(r) => r.add(&term),
        });
    }
    KpReport::new(id, residual.unwrap())
}

/// Residuals of all four hard-coded KP equations on `F` (constant term 0).
pub fn kp_residuals(f: &Series) -> Vec<KpReport> {
    [
        EquationId::Kp22,
        EquationId::Kp32,
        EquationId::Kp42,
        EquationId::Kp33,
    ]
    .into_par_iter()
    .map(|id| kp_residual(f, id))
    .collect()
}

/// Embeds a `t`-variable series into odd `q`-variables via the rescaling
/// `q_{2d+1} = t_d / (2d-1)!!`, i.e. `t_d -> (2d-1)!! q_{2d+1}`.
pub fn t_to_odd_q(f: &Series) -> Series {
    map_t_embedding(f, Family::Q)
}

/// Same embedding into odd `p`-variables (for the Virasoro constraints).
pub fn t_to_odd_p(f: &Series) -> Series {
    map_t_embedding(f, Family::P)
}

fn map_t_embedding(f: &Series, family: Family) -> Series {
    let mut out = Series::zero(f.caps().clone());
    for (m, c) in f.iter() {
        let mut mono = Monomial::one().with_param_shift(m.params());
        let mut coeff = c.clone();
        for &(v, e) in m.vars() {
            assert_eq!(v.family, Family::T);
            mono = mono.times_var(Var::new(family, 2 * v.index + 1), e);
            for _ in 0..e {
                coeff *= &Rat::from_bigint(double_factorial_odd(v.index));
            }
        }
        out.accumulate_clipped(mono, coeff);
    }
    out
}

/// Inverse of the embedding: an odd-`q` series (the `u = 0` slice of `G`)
/// rewritten in `t`-variables. Errors on even indices.
pub fn odd_q_to_t(f: &Series) -> Result<Series> {
    let mut out = Series::zero(f.caps().clone());
    for (m, c) in f.iter() {
        let mut mono = Monomial::one().with_param_shift(m.params());
        let mut coeff = c.clone();
        for &(v, e) in m.vars() {
            if v.index % 2 == 0 {
                return Err(Error::InsufficientCaps(format!(
                    "even-index variable {v} in a KdV specialization"
                )));
            }
            let d = (v.index - 1) / 2;
            mono = mono.times_var(Var::t(d), e);
            for _ in 0..e {
                coeff = coeff / Rat::from_bigint(double_factorial_odd(d));
            }
        }
        out.accumulate_clipped(mono, coeff);
    }
    Ok(out)
}

/// KdV check: embed a `t`-series into odd q-variables (even ones absent by
/// construction) and run all four KP residuals.
pub fn kdv_check(f_t: &Series) -> Vec<KpReport> {
    kp_residuals(&t_to_odd_q(f_t))
}

/// Residual of the Virasoro constraint
/// `(2m+3) d e^F/d p_{2m+3} = (Lambda_{-2m} + 1/8 delta_{m,0}) e^F`
/// for `m >= -1` on a potential in odd p-variables.
pub fn virasoro_check(f: &Series, m: i64) -> Result<KpReport> {
    assert!(m >= -1);
    let family = series_family(f);
    let ef = f.exp()?;
    let idx = (2 * m + 3) as u32;
    let lhs = ef
        .deriv(Var::new(family, idx), 1)
        .scale(&Rat::from_int(2 * m + 3));
    let lam = materialize(&OpSpec::Lambda(-2 * m), family, f.caps().weight + idx);
    let mut rhs = apply(&lam, &ef);
    if m == 0 {
        rhs = rhs.add(&ef.scale(&Rat::new(1, 8)));
    }
    Ok(KpReport::new(EquationId::Virasoro(m), lhs.sub(&rhs)))
}

/// Residual of the transformed cut-and-join equation, cleared of negative
/// u-powers (i.e. `u^4 *` the equation):
///
/// `1/3 u^2 d e^G/du = (u^4 M0 + 4u^3 M1 + 6u^2 M2 + 4u M3 + M4
///  - 4/3 u Lambda_0 - Lambda_1 + 1/4 u^2 a2 + 1/3 u a3 + 1/8 a4) e^G`.
pub fn newcaj_check(g: &Series) -> Result<KpReport> {
    let family = series_family(g);
    let eg = g.exp()?;
    let lhs = eg
        .dparam(Param::U)
        .mul_monomial(&Monomial::param(Param::U, 2), &Rat::new(1, 3));
    let coeff = |num: i64, den: i64, upow: i32| -> Series {
        Series::monomial(
            Monomial::param(Param::U, upow),
            Rat::new(num, den),
            crate::diffop::exact_coeff_caps(upow),
        )
    };
    let op = OpSpec::LinComb(vec![
        (coeff(1, 1, 4), OpSpec::M(0)),
        (coeff(4, 1, 3), OpSpec::M(1)),
        (coeff(6, 1, 2), OpSpec::M(2)),
        (coeff(4, 1, 1), OpSpec::M(3)),
        (coeff(1, 1, 0), OpSpec::M(4)),
        (coeff(-4, 3, 1), OpSpec::Lambda(0)),
        (coeff(-1, 1, 0), OpSpec::Lambda(1)),
        (coeff(1, 4, 2), OpSpec::A(2)),
        (coeff(1, 3, 1), OpSpec::A(3)),
        (coeff(1, 8, 0), OpSpec::A(4)),
    ]);
    let rhs = apply(&materialize(&op, family, g.caps().weight + 4), &eg);
    Ok(KpReport::new(EquationId::NewCaj, lhs.sub(&rhs)))
}

/// `p_k -> c^k p_k` on every variable: the quasihomogeneous rescaling.
pub fn rescale_by_weight(f: &Series, c: &Rat) -> Series {
    let mut out = Series::zero(f.caps().clone());
    for (m, coeff) in f.iter() {
        out.accumulate_clipped(m.clone(), coeff * &c.pow(m.weight() as i32));
    }
    out
}

/// The change-of-variables automorphism: `Phi -> (Phi - H_{0,2})`
/// substituted through `p_b = sum c^b_k beta^(k-b) q_k`. An automorphism of
/// the KP hierarchy: it sends solutions to solutions. `phi` must be
/// beta-free (its beta window is widened to the target's, which is sound
/// exactly then).
pub fn elsv_automorphism(phi: &Series, target_caps: &Caps) -> Result<Series> {
    assert!(phi.iter().all(|(m, _)| m.param_exp(Param::Beta) == 0));
    let weight = target_caps.weight;
    let beta_hi = target_caps.window(Param::Beta).hi;
    let mut wide = phi.caps().clone();
    wide.windows[Param::Beta.idx()] = Window::new(0, beta_hi);
    let widened = phi.clone().with_trusted_caps(wide);
    let shifted = widened.sub(&crate::hurwitz::h02(weight, beta_hi.max(0) as u32));
    let change = crate::elsv::elsv_change(weight);
    crate::elsv::apply_change(&shifted, &change, target_caps)
}
