//! The Weil-representation action of u(p,q)(C) and u(r,s)(C) on Fock forms,
//! the exterior differentials and the lowering operator, construction of the
//! Kudla-Millson form and its companion (q-1,q-1)-form, and exact verification
//! of the identities relating them.
//!
//! All operators are specialized at the Fock parameter lambda = 2*pi*i, kept
//! as an exact pi-power-carrying scalar so that every computation stays in
//! Q(i)[pi, pi^-1].

use crate::error::SymbolicError;
use crate::exact::ExactScalar;
use crate::fock::{
    omega_q, omega_q_minus_1, zp_alpha, zp_mu, zpp_alpha, zpp_mu, ExtGen, ExtMonomial, FockForm,
    FockVariable, Kind, PolyMonomial, Signature,
};
use std::ops::Neg;

/// A basis element of u(p,q)(C) or u(r,s)(C) in the families used by the
/// Fock-model action.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LieBasisElement {
    /// Z'_{ij} in k: both indices in the alpha-range 1..=p, or both in the
    /// mu-range p+1..=p+q.
    ZPrimeK { i: u32, j: u32 },
    /// Z''_{ij} in k (acts as -Z'_{ji}).
    ZDoublePrimeK { i: u32, j: u32 },
    /// Z'_{alpha mu} in p^+.
    ZPrimePPlus { alpha: u32, mu: u32 },
    /// Z''_{alpha mu} in p^-.
    ZDoublePrimePMinus { alpha: u32, mu: u32 },
    /// w_a o w_b + i w_a o w_b i in k' (a, b in 1..=r).
    KPrimeAb { a: u32, b: u32 },
    /// w_u o w_v + i w_u o w_v i in k' (u, v in r+1..=r+s).
    KPrimeUv { u: u32, v: u32 },
    /// w_a o w_u - i w_a o w_u i in p'^+.
    PPrimePlus { a: u32, u: u32 },
    /// w_a o w_u + i w_a o w_u i in p'^-.
    PPrimeMinus { a: u32, u: u32 },
}

fn check_range(cond: bool, what: &str) -> Result<(), SymbolicError> {
    if cond {
        Ok(())
    } else {
        Err(SymbolicError::IndexOutOfRange(what.to_string()))
    }
}

fn var(sig: &Signature, vec: u32, wit: u32, kind: Kind) -> Result<FockVariable, SymbolicError> {
    FockVariable::new(sig, vec, wit, kind)
}

/// `f` multiplied by the product of two variables.
fn mul2(f: &FockForm, v1: FockVariable, v2: FockVariable) -> Result<FockForm, SymbolicError> {
    f.mul_var(v1)?.mul_var(v2)
}

/// Second mixed partial derivative of `f`.
fn d2(f: &FockForm, v1: FockVariable, v2: FockVariable) -> Result<FockForm, SymbolicError> {
    f.partial_derivative(v1)?.partial_derivative(v2)
}

/// The action of a u(p,q)(C) basis element on the polynomial part of `f`,
/// with lambda = 2*pi*i.
pub fn act_g(elem: LieBasisElement, f: &FockForm) -> Result<FockForm, SymbolicError> {
    let sig = f.signature;
    let lam = ExactScalar::lambda();
    match elem {
        LieBasisElement::ZPrimeK { i, j } => act_g_zprime_k(i, j, f),
        LieBasisElement::ZDoublePrimeK { i, j } => Ok(act_g_zprime_k(j, i, f)?.neg()),
        LieBasisElement::ZPrimePPlus { alpha, mu } => {
            check_range(alpha >= 1 && alpha <= sig.p, "alpha")?;
            check_range(mu > sig.p && mu <= sig.m(), "mu")?;
            // -(1/(2 i lambda)) sum_a z''_{alpha a} z'_{mu a}
            //  + 2 i lambda sum_u d^2/(dz'_{alpha u} dz''_{mu u})
            let two_i_lam = &(&ExactScalar::from_int(2) * &ExactScalar::i()) * &lam;
            let c_mul = (&two_i_lam.inv()?).neg();
            let mut out = FockForm::zero(sig);
            for a in 1..=sig.r {
                let t = mul2(
                    f,
                    var(&sig, alpha, a, Kind::DoublePrime)?,
                    var(&sig, mu, a, Kind::Prime)?,
                )?;
                out = out.add(&t.scale(&c_mul))?;
            }
            for u in sig.r + 1..=sig.n() {
                let t = d2(
                    f,
                    var(&sig, alpha, u, Kind::Prime)?,
                    var(&sig, mu, u, Kind::DoublePrime)?,
                )?;
                out = out.add(&t.scale(&two_i_lam))?;
            }
            Ok(out)
        }
        LieBasisElement::ZDoublePrimePMinus { alpha, mu } => {
            check_range(alpha >= 1 && alpha <= sig.p, "alpha")?;
            check_range(mu > sig.p && mu <= sig.m(), "mu")?;
            // 2 i lambda sum_a d^2/(dz''_{alpha a} dz'_{mu a})
            //  - (1/(2 i lambda)) sum_u z'_{alpha u} z''_{mu u}
            let two_i_lam = &(&ExactScalar::from_int(2) * &ExactScalar::i()) * &lam;
            let c_mul = (&two_i_lam.inv()?).neg();
            let mut out = FockForm::zero(sig);
            for a in 1..=sig.r {
                let t = d2(
                    f,
                    var(&sig, alpha, a, Kind::DoublePrime)?,
                    var(&sig, mu, a, Kind::Prime)?,
                )?;
                out = out.add(&t.scale(&two_i_lam))?;
            }
            for u in sig.r + 1..=sig.n() {
                let t = mul2(
                    f,
                    var(&sig, alpha, u, Kind::Prime)?,
                    var(&sig, mu, u, Kind::DoublePrime)?,
                )?;
                out = out.add(&t.scale(&c_mul))?;
            }
            Ok(out)
        }
        _ => Err(SymbolicError::IndexOutOfRange(
            "act_g expects a u(p,q) family element".to_string(),
        )),
    }
}

fn act_g_zprime_k(i: u32, j: u32, f: &FockForm) -> Result<FockForm, SymbolicError> {
    let sig = f.signature;
    let both_alpha = i >= 1 && i <= sig.p && j >= 1 && j <= sig.p;
    let both_mu = i > sig.p && i <= sig.m() && j > sig.p && j <= sig.m();
    check_range(both_alpha || both_mu, "Z'_k indices must both be alpha-range or both mu-range")?;
    let half_r_minus_s = ExactScalar::ratio_pi(sig.r as i64 - sig.s as i64, 2, 0);
    let mut out = f.scale(&(&half_r_minus_s).neg());
    if i != j {
        out = FockForm::zero(sig);
    }
    if both_alpha {
        let (alpha, beta) = (i, j);
        // -sum_a z''_{alpha a} d/dz''_{beta a} + sum_u z'_{beta u} d/dz'_{alpha u}
        for a in 1..=sig.r {
            let t = f
                .partial_derivative(var(&sig, beta, a, Kind::DoublePrime)?)?
                .mul_var(var(&sig, alpha, a, Kind::DoublePrime)?)?;
            out = out.add(&t.neg())?;
        }
        for u in sig.r + 1..=sig.n() {
            let t = f
                .partial_derivative(var(&sig, alpha, u, Kind::Prime)?)?
                .mul_var(var(&sig, beta, u, Kind::Prime)?)?;
            out = out.add(&t)?;
        }
    } else {
        let (mu, nu) = (i, j);
        // -sum_a z'_{nu a} d/dz'_{mu a} + sum_u z''_{mu u} d/dz''_{nu u}
        for a in 1..=sig.r {
            let t = f
                .partial_derivative(var(&sig, mu, a, Kind::Prime)?)?
                .mul_var(var(&sig, nu, a, Kind::Prime)?)?;
            out = out.add(&t.neg())?;
        }
        for u in sig.r + 1..=sig.n() {
            let t = f
                .partial_derivative(var(&sig, nu, u, Kind::DoublePrime)?)?
                .mul_var(var(&sig, mu, u, Kind::DoublePrime)?)?;
            out = out.add(&t)?;
        }
    }
    Ok(out)
}

/// The action of a u(r,s)(C) basis element on the polynomial part of `f`,
/// with lambda = 2*pi*i.
pub fn act_gprime(elem: LieBasisElement, f: &FockForm) -> Result<FockForm, SymbolicError> {
    let sig = f.signature;
    let lam = ExactScalar::lambda();
    let two_i = &ExactScalar::from_int(2) * &ExactScalar::i();
    match elem {
        LieBasisElement::KPrimeAb { a, b } => {
            check_range(a >= 1 && a <= sig.r && b >= 1 && b <= sig.r, "a, b")?;
            // 2i [ sum_alpha z''_{alpha b} d/dz''_{alpha a}
            //     - sum_mu z'_{mu a} d/dz'_{mu b} ] + i(p - q) delta_ab
            let mut out = FockForm::zero(sig);
            for alpha in 1..=sig.p {
                let t = f
                    .partial_derivative(var(&sig, alpha, a, Kind::DoublePrime)?)?
                    .mul_var(var(&sig, alpha, b, Kind::DoublePrime)?)?;
                out = out.add(&t)?;
            }
            for mu in sig.p + 1..=sig.m() {
                let t = f
                    .partial_derivative(var(&sig, mu, b, Kind::Prime)?)?
                    .mul_var(var(&sig, mu, a, Kind::Prime)?)?;
                out = out.add(&t.neg())?;
            }
            let mut out = out.scale(&two_i);
            if a == b {
                let c = &ExactScalar::i() * &ExactScalar::from_int(sig.p as i64 - sig.q as i64);
                out = out.add(&f.scale(&c))?;
            }
            Ok(out)
        }
        LieBasisElement::KPrimeUv { u, v } => {
            check_range(
                u > sig.r && u <= sig.n() && v > sig.r && v <= sig.n(),
                "u, v",
            )?;
            // 2i [ sum_alpha z'_{alpha u} d/dz'_{alpha v}
            //     - sum_mu z''_{mu v} d/dz''_{mu u} ] + i(p - q) delta_uv
            let mut out = FockForm::zero(sig);
            for alpha in 1..=sig.p {
                let t = f
                    .partial_derivative(var(&sig, alpha, v, Kind::Prime)?)?
                    .mul_var(var(&sig, alpha, u, Kind::Prime)?)?;
                out = out.add(&t)?;
            }
            for mu in sig.p + 1..=sig.m() {
                let t = f
                    .partial_derivative(var(&sig, mu, u, Kind::DoublePrime)?)?
                    .mul_var(var(&sig, mu, v, Kind::DoublePrime)?)?;
                out = out.add(&t.neg())?;
            }
            let mut out = out.scale(&two_i);
            if u == v {
                let c = &ExactScalar::i() * &ExactScalar::from_int(sig.p as i64 - sig.q as i64);
                out = out.add(&f.scale(&c))?;
            }
            Ok(out)
        }
        LieBasisElement::PPrimePlus { a, u } => {
            check_range(a >= 1 && a <= sig.r && u > sig.r && u <= sig.n(), "a, u")?;
            // (1/lambda) sum_alpha z''_{alpha a} z'_{alpha u}
            //  + 4 lambda sum_mu d^2/(dz'_{mu a} dz''_{mu u})
            let inv_lam = lam.inv()?;
            let four_lam = &ExactScalar::from_int(4) * &lam;
            let mut out = FockForm::zero(sig);
            for alpha in 1..=sig.p {
                let t = mul2(
                    f,
                    var(&sig, alpha, a, Kind::DoublePrime)?,
                    var(&sig, alpha, u, Kind::Prime)?,
                )?;
                out = out.add(&t.scale(&inv_lam))?;
            }
            for mu in sig.p + 1..=sig.m() {
                let t = d2(
                    f,
                    var(&sig, mu, a, Kind::Prime)?,
                    var(&sig, mu, u, Kind::DoublePrime)?,
                )?;
                out = out.add(&t.scale(&four_lam))?;
            }
            Ok(out)
        }
        LieBasisElement::PPrimeMinus { a, u } => {
            check_range(a >= 1 && a <= sig.r && u > sig.r && u <= sig.n(), "a, u")?;
            // -4 lambda sum_alpha d^2/(dz''_{alpha a} dz'_{alpha u})
            //  - (1/lambda) sum_mu z'_{mu a} z''_{mu u}
            let neg_inv_lam = (&lam.inv()?).neg();
            let neg_four_lam = (&(&ExactScalar::from_int(4) * &lam)).neg();
            let mut out = FockForm::zero(sig);
            for alpha in 1..=sig.p {
                let t = d2(
                    f,
                    var(&sig, alpha, a, Kind::DoublePrime)?,
                    var(&sig, alpha, u, Kind::Prime)?,
                )?;
                out = out.add(&t.scale(&neg_four_lam))?;
            }
            for mu in sig.p + 1..=sig.m() {
                let t = mul2(
                    f,
                    var(&sig, mu, a, Kind::Prime)?,
                    var(&sig, mu, u, Kind::DoublePrime)?,
                )?;
                out = out.add(&t.scale(&neg_inv_lam))?;
            }
            Ok(out)
        }
        _ => Err(SymbolicError::IndexOutOfRange(
            "act_gprime expects a u(r,s) family element".to_string(),
        )),
    }
}

fn require_rs11(sig: &Signature) -> Result<(), SymbolicError> {
    if sig.r == 1 && sig.s == 1 {
        Ok(())
    } else {
        Err(SymbolicError::IndexOutOfRange(format!(
            "operation requires r = s = 1, got r = {}, s = {}",
            sig.r, sig.s
        )))
    }
}

/// The lowering operator L = -(i/2) omega(w_1 o w_2 + i w_1 o w_2 i)
/// = -4 pi sum_{gamma=1..p} d^2/(dz''_gamma dz'_gamma)
///   + (1/(4 pi)) sum_mu z''_mu z'_mu   (r = s = 1).
pub fn lowering_l(f: &FockForm) -> Result<FockForm, SymbolicError> {
    require_rs11(&f.signature)?;
    let raw = act_gprime(LieBasisElement::PPrimeMinus { a: 1, u: 2 }, f)?;
    let c = (&(&ExactScalar::i() * &ExactScalar::ratio_pi(1, 2, 0))).neg();
    Ok(raw.scale(&c))
}

/// The weight operator omega(1/2 (w_1 o w_1 + w_2 o w_2)) (r = s = 1).
pub fn weight_operator(f: &FockForm) -> Result<FockForm, SymbolicError> {
    require_rs11(&f.signature)?;
    let t1 = act_gprime(LieBasisElement::KPrimeAb { a: 1, b: 1 }, f)?;
    let t2 = act_gprime(LieBasisElement::KPrimeUv { u: 2, v: 2 }, f)?;
    Ok(t1.add(&t2)?.scale(&ExactScalar::ratio_pi(1, 2, 0)))
}

/// The exterior differential in the Fock model (r = s = 1):
/// del = sum_{alpha, mu} [ (1/(4 pi)) z''_alpha z'_mu
///       - 4 pi d^2/(dz'_alpha dz''_mu) ] (x) left multiplication by xi'_{alpha mu}.
pub fn del(f: &FockForm) -> Result<FockForm, SymbolicError> {
    require_rs11(&f.signature)?;
    let sig = f.signature;
    let quarter_pi_inv = ExactScalar::ratio_pi(1, 4, -1);
    let neg_four_pi = ExactScalar::ratio_pi(-4, 1, 1);
    let mut out = FockForm::zero(sig);
    for alpha in 1..=sig.p {
        for mu in sig.p + 1..=sig.m() {
            let mul_part = mul2(f, zpp_alpha(alpha), zp_mu(mu))?.scale(&quarter_pi_inv);
            let der_part = d2(f, zp_alpha(alpha), zpp_mu(mu))?.scale(&neg_four_pi);
            let coeff = mul_part.add(&der_part)?;
            out = out.add(&coeff.ext_mul_left(ExtGen::prime(alpha, mu))?)?;
        }
    }
    Ok(out)
}

/// delbar = sum_{beta, nu} [ (1/(4 pi)) z'_beta z''_nu
///          - 4 pi d^2/(dz''_beta dz'_nu) ] (x) left multiplication by xi''_{beta nu}.
pub fn delbar(f: &FockForm) -> Result<FockForm, SymbolicError> {
    require_rs11(&f.signature)?;
    let sig = f.signature;
    let quarter_pi_inv = ExactScalar::ratio_pi(1, 4, -1);
    let neg_four_pi = ExactScalar::ratio_pi(-4, 1, 1);
    let mut out = FockForm::zero(sig);
    for beta in 1..=sig.p {
        for nu in sig.p + 1..=sig.m() {
            let mul_part = mul2(f, zp_alpha(beta), zpp_mu(nu))?.scale(&quarter_pi_inv);
            let der_part = d2(f, zpp_alpha(beta), zp_mu(nu))?.scale(&neg_four_pi);
            let coeff = mul_part.add(&der_part)?;
            out = out.add(&coeff.ext_mul_left(ExtGen::doubleprime(beta, nu))?)?;
        }
    }
    Ok(out)
}

/// All multi-indices of the given length with entries 1..=p, in lexicographic
/// order.
pub fn multi_indices(p: u32, len: usize) -> Vec<Vec<u32>> {
    let mut out = vec![vec![]];
    for _ in 0..len {
        let mut next = Vec::with_capacity(out.len() * p as usize);
        for prefix in &out {
            for a in 1..=p {
                let mut v = prefix.clone();
                v.push(a);
                next.push(v);
            }
        }
        out = next;
    }
    out
}

fn monomial_zpp_zp(alphas: &[u32], betas: &[u32]) -> PolyMonomial {
    let mut m = PolyMonomial::one();
    for &a in alphas {
        m = m.mul(&PolyMonomial::var(zpp_alpha(a)));
    }
    for &b in betas {
        m = m.mul(&PolyMonomial::var(zp_alpha(b)));
    }
    m
}

/// The Kudla-Millson (q,q)-form in the Fock model:
/// (-1)^q / (2^{3q} pi^{2q}) sum_{alphas, betas}
///   z''_{alpha_1}...z''_{alpha_q} z'_{beta_1}...z'_{beta_q}
///   (x) Omega_q(alphas; betas).
pub fn build_phi_km(p: u32, q: u32) -> Result<FockForm, SymbolicError> {
    check_range(p >= 1 && q >= 1, "p, q >= 1")?;
    let sig = Signature::pq11(p, q);
    let sign = if q % 2 == 0 { 1 } else { -1 };
    let coeff = ExactScalar::ratio_pi(sign, 1i64 << (3 * q), -2 * q as i64);
    let mut out = FockForm::zero(sig);
    let idx = multi_indices(p, q as usize);
    for alphas in &idx {
        for betas in &idx {
            let omega = omega_q(sig, alphas, betas)?;
            for ((e, ep), c) in &omega.terms {
                debug_assert!(ep.exponents.is_empty());
                out.add_term(e.clone(), monomial_zpp_zp(alphas, betas), &(c * &coeff) * &ExactScalar::one())?;
            }
        }
    }
    Ok(out)
}

/// The companion (q-1,q-1)-form in the Fock model:
/// 2i / (2^{3(q-1)} pi^{2(q-1)}) sum_{alphas, betas}
///   z''_{alpha_1}...z''_{alpha_{q-1}} z'_{beta_1}...z'_{beta_{q-1}}
///   (x) Omega_{q-1}(alphas; betas).
pub fn build_psi(p: u32, q: u32) -> Result<FockForm, SymbolicError> {
    check_range(p >= 1 && q >= 1, "p, q >= 1")?;
    let sig = Signature::pq11(p, q);
    let coeff = &ExactScalar::ratio_pi(2, 1i64 << (3 * (q - 1)), -2 * (q as i64 - 1))
        * &ExactScalar::i();
    let mut out = FockForm::zero(sig);
    let idx = multi_indices(p, q as usize - 1);
    for alphas in &idx {
        for betas in &idx {
            let omega = omega_q_minus_1(sig, alphas, betas)?;
            for ((e, ep), c) in &omega.terms {
                debug_assert!(ep.exponents.is_empty());
                out.add_term(e.clone(), monomial_zpp_zp(alphas, betas), c * &coeff)?;
            }
        }
    }
    Ok(out)
}

/// The constant-free variant of the Kudla-Millson form used in the direct
/// verification: plain (non-interleaved) wedges, no normalizing constant.
pub fn build_phi_km_reduced(p: u32, q: u32) -> Result<FockForm, SymbolicError> {
    check_range(p >= 1 && q >= 1, "p, q >= 1")?;
    let sig = Signature::pq11(p, q);
    let mut out = FockForm::zero(sig);
    let idx = multi_indices(p, q as usize);
    for alphas in &idx {
        for betas in &idx {
            let mut gens = Vec::with_capacity(2 * q as usize);
            for (i, &a) in alphas.iter().enumerate() {
                gens.push(ExtGen::prime(a, p + 1 + i as u32));
            }
            for (i, &b) in betas.iter().enumerate() {
                gens.push(ExtGen::doubleprime(b, p + 1 + i as u32));
            }
            if let Some((ext, s)) = ExtMonomial::from_gens(&gens) {
                out.add_term(
                    ext,
                    monomial_zpp_zp(alphas, betas),
                    ExactScalar::from_int(s as i64),
                )?;
            }
        }
    }
    Ok(out)
}

/// The constant-free companion form: for each multi-index pair, the sum over
/// hat positions j of the plain wedge with the j-th slot omitted in both the
/// primed and doubleprimed blocks.
pub fn build_psi_reduced(p: u32, q: u32) -> Result<FockForm, SymbolicError> {
    check_range(p >= 1 && q >= 1, "p, q >= 1")?;
    let sig = Signature::pq11(p, q);
    let mut out = FockForm::zero(sig);
    let idx = multi_indices(p, q as usize - 1);
    for alphas in &idx {
        for betas in &idx {
            for j in 1..=q {
                let mut gens = Vec::with_capacity(2 * (q as usize - 1));
                let mut t = 0usize;
                for slot in 1..=q {
                    if slot == j {
                        continue;
                    }
                    gens.push(ExtGen::prime(alphas[t], p + slot));
                    t += 1;
                }
                t = 0;
                for slot in 1..=q {
                    if slot == j {
                        continue;
                    }
                    gens.push(ExtGen::doubleprime(betas[t], p + slot));
                    t += 1;
                }
                if let Some((ext, s)) = ExtMonomial::from_gens(&gens) {
                    out.add_term(
                        ext,
                        monomial_zpp_zp(alphas, betas),
                        ExactScalar::from_int(s as i64),
                    )?;
                }
            }
        }
    }
    Ok(out)
}

/// Report of an exact identity verification.
#[derive(Debug, Clone)]
pub struct IdentityReport {
    pub holds: bool,
    pub lhs_terms: usize,
    pub rhs_terms: usize,
    pub residual_terms: usize,
}

/// Verify L phi' = (-1)^{q-1} 4 pi del delbar psi' exactly.
pub fn verify_main_identity(p: u32, q: u32) -> Result<IdentityReport, SymbolicError> {
    let phi = build_phi_km_reduced(p, q)?;
    let psi = build_psi_reduced(p, q)?;
    let lhs = lowering_l(&phi)?;
    let sign = if (q - 1) % 2 == 0 { 4 } else { -4 };
    let rhs = del(&delbar(&psi)?)?.scale(&ExactScalar::ratio_pi(sign, 1, 1));
    let residual = lhs.sub(&rhs)?;
    Ok(IdentityReport {
        holds: residual.is_zero(),
        lhs_terms: lhs.num_terms(),
        rhs_terms: rhs.num_terms(),
        residual_terms: residual.num_terms(),
    })
}

/// The k-action on a single exterior generator, from the composition rules
/// Z'_{alpha beta}.xi'_{a mu} = delta_{alpha a} xi'_{beta mu},
/// Z'_{alpha beta}.xi''_{b mu} = -delta_{beta b} xi''_{alpha mu},
/// Z'_{mu nu}.xi'_{a mu'} = -delta_{nu mu'} xi'_{a mu},
/// Z'_{mu nu}.xi''_{b mu'} = delta_{mu mu'} xi''_{b nu}.
fn k_act_gen(sig: &Signature, i: u32, j: u32, g: ExtGen) -> Option<(ExtGen, i32)> {
    let both_alpha = i <= sig.p;
    if both_alpha {
        let (alpha, beta) = (i, j);
        match g.kind {
            Kind::Prime if g.alpha == alpha => Some((ExtGen::prime(beta, g.mu), 1)),
            Kind::DoublePrime if g.alpha == beta => Some((ExtGen::doubleprime(alpha, g.mu), -1)),
            _ => None,
        }
    } else {
        let (mu, nu) = (i, j);
        match g.kind {
            Kind::Prime if g.mu == nu => Some((ExtGen::prime(g.alpha, mu), -1)),
            Kind::DoublePrime if g.mu == mu => Some((ExtGen::doubleprime(g.alpha, nu), 1)),
            _ => None,
        }
    }
}

/// Extend the k-action on exterior generators to a derivation on the
/// exterior parts of `f`. `i, j` index Z'_{ij} with both indices in the
/// alpha-range or both in the mu-range.
pub fn k_act_exterior(i: u32, j: u32, f: &FockForm) -> Result<FockForm, SymbolicError> {
    let sig = f.signature;
    let mut out = FockForm::zero(sig);
    for ((e, poly), c) in &f.terms {
        for (pos, g) in e.factors.iter().enumerate() {
            if let Some((replacement, rule_sign)) = k_act_gen(&sig, i, j, *g) {
                let mut gens = e.factors.clone();
                gens[pos] = replacement;
                if let Some((ext, s)) = ExtMonomial::from_gens(&gens) {
                    let coeff = c * &ExactScalar::from_int((rule_sign * s) as i64);
                    out.add_term(ext, poly.clone(), coeff)?;
                }
            }
        }
    }
    Ok(out)
}

/// The total k-action (Weil action on coefficients plus the derived action on
/// exterior generators) of Z'_{ij} on `f`.
pub fn k_act_total(i: u32, j: u32, f: &FockForm) -> Result<FockForm, SymbolicError> {
    let weil = act_g(LieBasisElement::ZPrimeK { i, j }, f)?;
    let ext = k_act_exterior(i, j, f)?;
    weil.add(&ext)
}

/// Check that every k-basis element annihilates `f` exactly.
pub fn verify_k_invariance_of(f: &FockForm) -> Result<IdentityReport, SymbolicError> {
    let sig = f.signature;
    let mut max_residual = 0usize;
    let mut holds = true;
    for i in 1..=sig.p {
        for j in 1..=sig.p {
            let r = k_act_total(i, j, f)?;
            if !r.is_zero() {
                holds = false;
                max_residual = max_residual.max(r.num_terms());
            }
        }
    }
    for i in sig.p + 1..=sig.m() {
        for j in sig.p + 1..=sig.m() {
            let r = k_act_total(i, j, f)?;
            if !r.is_zero() {
                holds = false;
                max_residual = max_residual.max(r.num_terms());
            }
        }
    }
    Ok(IdentityReport {
        holds,
        lhs_terms: f.num_terms(),
        rhs_terms: 0,
        residual_terms: max_residual,
    })
}

/// Check k-invariance of the companion form for signature (p, q).
pub fn verify_k_invariance(p: u32, q: u32) -> Result<IdentityReport, SymbolicError> {
    verify_k_invariance_of(&build_psi(p, q)?)
}

/// Check the weight eigenvalue: the weight operator acts on `f` by
/// multiplication with i * expected_weight.
pub fn verify_weight(f: &FockForm, expected_weight: i64) -> Result<IdentityReport, SymbolicError> {
    let lhs = weight_operator(f)?;
    let rhs = f.scale(&(&ExactScalar::i() * &ExactScalar::from_int(expected_weight)));
    let residual = lhs.sub(&rhs)?;
    Ok(IdentityReport {
        holds: residual.is_zero(),
        lhs_terms: lhs.num_terms(),
        rhs_terms: rhs.num_terms(),
        residual_terms: residual.num_terms(),
    })
}

/// Both weight eigenvalues for signature (p, q): p+q on the (q,q)-form and
/// p+q-2 on the companion form.
pub fn verify_weights(p: u32, q: u32) -> Result<IdentityReport, SymbolicError> {
    let a = verify_weight(&build_phi_km(p, q)?, (p + q) as i64)?;
    let b = verify_weight(&build_psi(p, q)?, (p + q) as i64 - 2)?;
    Ok(IdentityReport {
        holds: a.holds && b.holds,
        lhs_terms: a.lhs_terms + b.lhs_terms,
        rhs_terms: a.rhs_terms + b.rhs_terms,
        residual_terms: a.residual_terms + b.residual_terms,
    })
}

/// Result of building d^c of the companion form, together with the termwise
/// match of its two direct expansions.
#[derive(Debug, Clone)]
pub struct DcPsiResult {
    /// d^c psi = (del psi - delbar psi) / (4 pi i).
    pub dc: FockForm,
    /// Whether (1/4pi) del psi matches its direct expansion termwise.
    pub del_display_matches: bool,
    /// Whether (1/4pi) delbar psi matches its direct expansion termwise.
    pub delbar_display_matches: bool,
}

/// Compute d^c of the companion form and verify its two direct expansions.
pub fn dc_psi_fock(p: u32, q: u32) -> Result<DcPsiResult, SymbolicError> {
    let sig = Signature::pq11(p, q);
    let psi = build_psi(p, q)?;
    let quarter_pi_inv = ExactScalar::ratio_pi(1, 4, -1);
    let d1 = del(&psi)?.scale(&quarter_pi_inv);
    let d2v = delbar(&psi)?.scale(&quarter_pi_inv);

    // Direct expansion of (1/4pi) del psi:
    // i / (2^{3q-2} pi^{2q-1}) sum_{gamma, alphas, betas}
    //   z''_gamma z''_{alphas} z'_{betas} sum_j (-1)^{j-1} z'_{p+j}
    //   (x) [xi' block with gamma at slot j] ^ [xi'' block with hat at j].
    // The derivative part of del annihilates the companion form (it contains
    // no doubleprimed mu-variables), so only the multiplication part
    // contributes and the overall constant is i / (2^{3q} pi^{2q}).
    // The block-ordered display also inherits the alternating-sum prefactor
    // (-1)^{q(q-1)/2} from the interleaved form it expands.
    let presign = if (q * (q - 1) / 2) % 2 == 0 { 1 } else { -1 };
    let cst = &ExactScalar::ratio_pi(presign, 1i64 << (3 * q as i64), -(2 * q as i64))
        * &ExactScalar::i();
    let idx = multi_indices(p, q as usize - 1);
    let mut expected_d1 = FockForm::zero(sig);
    let mut expected_d2 = FockForm::zero(sig);
    for gamma in 1..=p {
        for alphas in &idx {
            for betas in &idx {
                for j in 1..=q {
                    let jsign = if (j - 1) % 2 == 0 { 1 } else { -1 };
                    // primed block: gamma at slot j, alphas fill the rest.
                    let mut gens = Vec::new();
                    let mut t = 0usize;
                    for slot in 1..=q {
                        if slot == j {
                            gens.push(ExtGen::prime(gamma, p + slot));
                        } else {
                            gens.push(ExtGen::prime(alphas[t], p + slot));
                            t += 1;
                        }
                    }
                    t = 0;
                    for slot in 1..=q {
                        if slot == j {
                            continue;
                        }
                        gens.push(ExtGen::doubleprime(betas[t], p + slot));
                        t += 1;
                    }
                    if let Some((ext, s)) = ExtMonomial::from_gens(&gens) {
                        let poly = monomial_zpp_zp(alphas, betas)
                            .mul(&PolyMonomial::var(zpp_alpha(gamma)))
                            .mul(&PolyMonomial::var(zp_mu(p + j)));
                        expected_d1.add_term(
                            ext,
                            poly,
                            &cst * &ExactScalar::from_int((jsign * s) as i64),
                        )?;
                    }
                    // Direct expansion of (1/4pi) delbar psi: sign (-1)^{q+j},
                    // z'_gamma and z''_{p+j}, gamma in the doubleprimed block.
                    let jsign2 = if (q + j) % 2 == 0 { 1 } else { -1 };
                    let mut gens2 = Vec::new();
                    let mut t2 = 0usize;
                    for slot in 1..=q {
                        if slot == j {
                            continue;
                        }
                        gens2.push(ExtGen::prime(alphas[t2], p + slot));
                        t2 += 1;
                    }
                    t2 = 0;
                    for slot in 1..=q {
                        if slot == j {
                            gens2.push(ExtGen::doubleprime(gamma, p + slot));
                        } else {
                            gens2.push(ExtGen::doubleprime(betas[t2], p + slot));
                            t2 += 1;
                        }
                    }
                    if let Some((ext, s)) = ExtMonomial::from_gens(&gens2) {
                        let poly = monomial_zpp_zp(alphas, betas)
                            .mul(&PolyMonomial::var(zp_alpha(gamma)))
                            .mul(&PolyMonomial::var(zpp_mu(p + j)));
                        expected_d2.add_term(
                            ext,
                            poly,
                            &cst * &ExactScalar::from_int((jsign2 * s) as i64),
                        )?;
                    }
                }
            }
        }
    }

    // d^c = (del - delbar) / (4 pi i); dividing by i multiplies by -i.
    let neg_i = (&ExactScalar::i()).neg();
    let dc = d1.sub(&d2v)?.scale(&neg_i);
    Ok(DcPsiResult {
        dc,
        del_display_matches: d1 == expected_d1,
        delbar_display_matches: d2v == expected_d2,
    })
}

/// Euler-count check used inside the weight lemma: counting z''_alpha and
/// z'_alpha degrees of the companion form both give q-1.
pub fn verify_euler_counts(p: u32, q: u32) -> Result<bool, SymbolicError> {
    let psi = build_psi(p, q)?;
    let mut count_pp = FockForm::zero(psi.signature);
    let mut count_p = FockForm::zero(psi.signature);
    for alpha in 1..=p {
        count_pp = count_pp.add(
            &psi.partial_derivative(zpp_alpha(alpha))?
                .mul_var(zpp_alpha(alpha))?,
        )?;
        count_p = count_p.add(
            &psi.partial_derivative(zp_alpha(alpha))?
                .mul_var(zp_alpha(alpha))?,
        )?;
    }
    let expected = psi.scale(&ExactScalar::from_int(q as i64 - 1));
    Ok(count_pp == expected && count_p == expected)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::zpp_alpha;

    #[test]
    fn act_g_constant_term_vanishes_rs11() {
        // omega(Z'_{11}) on 1 with r = s = 1: constant -(r-s)/2 = 0.
        let f = FockForm::scalar(Signature::pq11(1, 1), ExactScalar::one());
        let out = act_g(LieBasisElement::ZPrimeK { i: 1, j: 1 }, &f).unwrap();
        assert!(out.is_zero());
    }

    #[test]
    fn act_g_euler_term() {
        // omega(Z'_{11}) z''_{11} = -z''_{11} for r = s = 1.
        let sig = Signature::pq11(1, 1);
        let f = FockForm::term(
            sig,
            ExtMonomial::empty(),
            PolyMonomial::var(zpp_alpha(1)),
            ExactScalar::one(),
        );
        let out = act_g(LieBasisElement::ZPrimeK { i: 1, j: 1 }, &f).unwrap();
        assert_eq!(out, f.neg());
    }

    #[test]
    fn act_g_pminus_on_one() {
        // omega(Z''_{alpha mu}) 1 = -(1/(2 i lambda)) sum_u z'_{alpha u} z''_{mu u}
        // = (1/(4 pi)) z'_{alpha 2} z''_{mu 2} at lambda = 2 pi i, r = s = 1.
        let sig = Signature::pq11(1, 1);
        let one = FockForm::scalar(sig, ExactScalar::one());
        let out = act_g(LieBasisElement::ZDoublePrimePMinus { alpha: 1, mu: 2 }, &one).unwrap();
        let expected = FockForm::term(
            sig,
            ExtMonomial::empty(),
            PolyMonomial::var(zp_alpha(1)).mul(&PolyMonomial::var(zpp_mu(2))),
            ExactScalar::ratio_pi(1, 4, -1),
        );
        assert_eq!(out, expected);
    }

    #[test]
    fn act_gprime_weight_constant() {
        // omega(w_1 o w_1 + i w_1 o w_1 i) on 1 = i(p-q) = 0 for p = q = 1.
        let f = FockForm::scalar(Signature::pq11(1, 1), ExactScalar::one());
        let out = act_gprime(LieBasisElement::KPrimeAb { a: 1, b: 1 }, &f).unwrap();
        assert!(out.is_zero());
        // and 2i z''_{11} on the degree-one monomial.
        let g = FockForm::term(
            Signature::pq11(1, 1),
            ExtMonomial::empty(),
            PolyMonomial::var(zpp_alpha(1)),
            ExactScalar::one(),
        );
        let out = act_gprime(LieBasisElement::KPrimeAb { a: 1, b: 1 }, &g).unwrap();
        let two_i = &ExactScalar::from_int(2) * &ExactScalar::i();
        assert_eq!(out, g.scale(&two_i));
    }

    #[test]
    fn lowering_on_one() {
        // L(1) = (1/(4 pi)) sum_mu z''_mu z'_mu.
        let sig = Signature::pq11(1, 1);
        let one = FockForm::scalar(sig, ExactScalar::one());
        let out = lowering_l(&one).unwrap();
        let expected = FockForm::term(
            sig,
            ExtMonomial::empty(),
            PolyMonomial::var(zp_mu(2)).mul(&PolyMonomial::var(zpp_mu(2))),
            ExactScalar::ratio_pi(1, 4, -1),
        );
        assert_eq!(out, expected);
    }

    #[test]
    fn lowering_spec_example() {
        // L(z''_1 z'_1) for p = q = 1:
        //   -4 pi + (1/(4 pi)) z''_2 z'_2 z''_1 z'_1.
        let sig = Signature::pq11(1, 1);
        let f = FockForm::term(
            sig,
            ExtMonomial::empty(),
            PolyMonomial::var(zpp_alpha(1)).mul(&PolyMonomial::var(zp_alpha(1))),
            ExactScalar::one(),
        );
        let out = lowering_l(&f).unwrap();
        let mut expected = FockForm::scalar(sig, ExactScalar::ratio_pi(-4, 1, 1));
        expected
            .add_term(
                ExtMonomial::empty(),
                PolyMonomial::var(zpp_alpha(1))
                    .mul(&PolyMonomial::var(zp_alpha(1)))
                    .mul(&PolyMonomial::var(zp_mu(2)))
                    .mul(&PolyMonomial::var(zpp_mu(2))),
                ExactScalar::ratio_pi(1, 4, -1),
            )
            .unwrap();
        assert_eq!(out, expected);
    }

    #[test]
    fn delbar_on_one() {
        // delbar(1) for p = q = 1: (1/(4 pi)) z'_1 z''_2 (x) xi''_{12}.
        let sig = Signature::pq11(1, 1);
        let one = FockForm::scalar(sig, ExactScalar::one());
        let out = delbar(&one).unwrap();
        let (ext, s) = ExtMonomial::from_gens(&[ExtGen::doubleprime(1, 2)]).unwrap();
        assert_eq!(s, 1);
        let expected = FockForm::term(
            sig,
            ext,
            PolyMonomial::var(zp_alpha(1)).mul(&PolyMonomial::var(zpp_mu(2))),
            ExactScalar::ratio_pi(1, 4, -1),
        );
        assert_eq!(out, expected);
    }

    #[test]
    fn del_delbar_on_one() {
        // del(delbar(1)) for p = q = 1:
        //   ((1/(16 pi^2)) z''_1 z'_2 z'_1 z''_2 - 1) (x) xi'_{12} ^ xi''_{12}.
        let sig = Signature::pq11(1, 1);
        let one = FockForm::scalar(sig, ExactScalar::one());
        let out = del(&delbar(&one).unwrap()).unwrap();
        let (ext, s) =
            ExtMonomial::from_gens(&[ExtGen::prime(1, 2), ExtGen::doubleprime(1, 2)]).unwrap();
        assert_eq!(s, 1);
        let mut expected = FockForm::term(sig, ext.clone(), PolyMonomial::one(), ExactScalar::from_int(-1));
        expected
            .add_term(
                ext,
                PolyMonomial::var(zpp_alpha(1))
                    .mul(&PolyMonomial::var(zp_mu(2)))
                    .mul(&PolyMonomial::var(zp_alpha(1)))
                    .mul(&PolyMonomial::var(zpp_mu(2))),
                ExactScalar::ratio_pi(1, 16, -2),
            )
            .unwrap();
        assert_eq!(out, expected);
    }

    #[test]
    fn phi_km_base_case() {
        // p = q = 1: (-1/(8 pi^2)) z''_1 z'_1 (x) xi'_{12} ^ xi''_{12}.
        let phi = build_phi_km(1, 1).unwrap();
        assert_eq!(phi.num_terms(), 1);
        let ((e, p), c) = phi.terms.iter().next().unwrap();
        assert_eq!(e.degree(), 2);
        assert_eq!(p.degree(), 2);
        assert_eq!(*c, ExactScalar::ratio_pi(-1, 8, -2));
    }

    #[test]
    fn phi_km_term_counts() {
        assert_eq!(build_phi_km(2, 1).unwrap().num_terms(), 4);
        assert_eq!(build_phi_km(1, 2).unwrap().num_terms(), 1);
    }

    #[test]
    fn psi_base_cases() {
        // q = 1: the scalar 2i.
        let psi = build_psi(3, 1).unwrap();
        let two_i = &ExactScalar::from_int(2) * &ExactScalar::i();
        assert_eq!(psi, FockForm::scalar(Signature::pq11(3, 1), two_i));
        // p = 1, q = 2: (2i/(8 pi^2)) z''_1 z'_1 (x) Omega_1((1);(1)).
        let psi = build_psi(1, 2).unwrap();
        let coeff = &ExactScalar::ratio_pi(2, 8, -2) * &ExactScalar::i();
        let omega = omega_q_minus_1(Signature::pq11(1, 2), &[1], &[1]).unwrap();
        let expected = omega
            .poly_mul(&FockForm::term(
                Signature::pq11(1, 2),
                ExtMonomial::empty(),
                monomial_zpp_zp(&[1], &[1]),
                coeff,
            ))
            .unwrap();
        assert_eq!(psi, expected);
        // bidegree (q-1, q-1)
        assert_eq!(psi.bidegrees(), vec![(1, 1)]);
    }

    #[test]
    fn main_identity_1_1() {
        let report = verify_main_identity(1, 1).unwrap();
        assert!(report.holds, "residual has {} terms", report.residual_terms);
    }

    #[test]
    fn main_identity_2_2() {
        let report = verify_main_identity(2, 2).unwrap();
        assert!(report.holds, "residual has {} terms", report.residual_terms);
    }

    #[test]
    fn k_invariance_small() {
        assert!(verify_k_invariance(1, 1).unwrap().holds);
        assert!(verify_k_invariance(2, 2).unwrap().holds);
        // the (q,q)-form is invariant under the same machinery
        assert!(verify_k_invariance_of(&build_phi_km(2, 2).unwrap())
            .unwrap()
            .holds);
    }

    #[test]
    fn weights_small() {
        assert!(verify_weights(1, 1).unwrap().holds);
        assert!(verify_weights(2, 2).unwrap().holds);
    }

    #[test]
    fn euler_counts() {
        assert!(verify_euler_counts(1, 1).unwrap());
        assert!(verify_euler_counts(2, 2).unwrap());
    }

    #[test]
    fn dc_psi_displays_match() {
        for (p, q) in [(1, 1), (1, 2), (2, 2)] {
            let r = dc_psi_fock(p, q).unwrap();
            assert!(r.del_display_matches, "(p,q)=({},{}) del display", p, q);
            assert!(r.delbar_display_matches, "(p,q)=({},{}) delbar display", p, q);
            if q > 1 {
                // del psi part has bidegree (q, q-1), delbar part (q-1, q).
                assert_eq!(r.dc.bidegrees(), vec![(q - 1, q), (q, q - 1)]);
            }
        }
    }

    #[test]
    fn del_squared_zero() {
        let psi = build_psi(2, 2).unwrap();
        assert!(del(&del(&psi).unwrap()).unwrap().is_zero());
        assert!(delbar(&delbar(&psi).unwrap()).unwrap().is_zero());
        let ab = del(&delbar(&psi).unwrap()).unwrap();
        let ba = delbar(&del(&psi).unwrap()).unwrap();
        assert_eq!(ab, ba.neg());
    }

    #[test]
    fn p_plus_abelian() {
        // [omega(Z'_{alpha mu}), omega(Z'_{alpha' mu'})] = 0 on a sample form.
        let f = build_psi(2, 2).unwrap();
        let a = LieBasisElement::ZPrimePPlus { alpha: 1, mu: 3 };
        let b = LieBasisElement::ZPrimePPlus { alpha: 2, mu: 4 };
        let ab = act_g(a, &act_g(b, &f).unwrap()).unwrap();
        let ba = act_g(b, &act_g(a, &f).unwrap()).unwrap();
        assert_eq!(ab, ba);
    }
}
