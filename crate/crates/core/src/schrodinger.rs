//! The Schroedinger-model side of the construction: the ladder operators
//! D_alpha and Dbar_alpha acting on polynomial multiples of the standard
//! Gaussian, the closed-form power formula, the Laguerre identity, the exact
//! polynomials attached to multi-index pairs, and the coefficient bridge to
//! the Fock-model forms.
//!
//! A `GaussianPolynomial` with polynomial part P stands for P * phi_0, where
//! phi_0(x) = exp(-pi sum |z_i|^2) is the standard Gaussian. The operators
//! are
//!   D_alpha    = zbar_alpha - (1/pi) d/dz_alpha,
//!   Dbar_alpha = z_alpha    - (1/pi) d/dzbar_alpha,
//! so on P * phi_0 they act as
//!   D_alpha    (P phi_0) = (2 zbar_alpha P - (1/pi) dP/dz_alpha)    phi_0,
//!   Dbar_alpha (P phi_0) = (2 z_alpha    P - (1/pi) dP/dzbar_alpha) phi_0.

use crate::error::SymbolicError;
use crate::exact::{ExactScalar, GaussRat};
use crate::fock::{omega_q, omega_q_minus_1, zp_alpha, zpp_alpha, ExtMonomial, PolyMonomial, Signature};
use crate::weil::{build_phi_km, build_psi, multi_indices};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::Neg;

/// A commuting monomial in the indeterminates z_alpha, zbar_alpha.
/// Keys are (alpha, barred); values are exponents.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Default)]
pub struct GMonomial(pub BTreeMap<(u32, bool), u32>);

impl GMonomial {
    pub fn one() -> Self {
        GMonomial(BTreeMap::new())
    }

    pub fn var(alpha: u32, barred: bool) -> Self {
        let mut m = BTreeMap::new();
        m.insert((alpha, barred), 1);
        GMonomial(m)
    }

    pub fn mul(&self, other: &GMonomial) -> GMonomial {
        let mut m = self.0.clone();
        for (k, e) in &other.0 {
            *m.entry(*k).or_insert(0) += e;
        }
        GMonomial(m)
    }

    pub fn degree(&self) -> u32 {
        self.0.values().sum()
    }

    /// (unbarred degree, barred degree).
    pub fn bidegree(&self) -> (u32, u32) {
        let mut plain = 0;
        let mut barred = 0;
        for ((_, b), e) in &self.0 {
            if *b {
                barred += e;
            } else {
                plain += e;
            }
        }
        (plain, barred)
    }
}

/// An exact polynomial multiple of the standard Gaussian.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct GaussianPolynomial {
    pub terms: BTreeMap<GMonomial, ExactScalar>,
}

impl GaussianPolynomial {
    pub fn zero() -> Self {
        GaussianPolynomial::default()
    }

    /// The bare Gaussian phi_0 (polynomial part 1).
    pub fn one() -> Self {
        GaussianPolynomial::scalar(ExactScalar::one())
    }

    pub fn scalar(c: ExactScalar) -> Self {
        let mut g = GaussianPolynomial::zero();
        g.add_term(GMonomial::one(), c).expect("fresh term");
        g
    }

    pub fn var(alpha: u32, barred: bool) -> Self {
        let mut g = GaussianPolynomial::zero();
        g.add_term(GMonomial::var(alpha, barred), ExactScalar::one())
            .expect("fresh term");
        g
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Add a term, enforcing that each monomial keeps a pi-homogeneous
    /// coefficient.
    pub fn add_term(&mut self, m: GMonomial, c: ExactScalar) -> Result<(), SymbolicError> {
        if c.is_zero() {
            return Ok(());
        }
        let entry = self.terms.entry(m);
        match entry {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let sum = o.get().checked_add(&c)?;
                if sum.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = sum;
                }
            }
        }
        Ok(())
    }

    pub fn add(&self, other: &GaussianPolynomial) -> Result<GaussianPolynomial, SymbolicError> {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone())?;
        }
        Ok(out)
    }

    pub fn sub(&self, other: &GaussianPolynomial) -> Result<GaussianPolynomial, SymbolicError> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> GaussianPolynomial {
        GaussianPolynomial {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), c.neg())).collect(),
        }
    }

    pub fn scale(&self, c: &ExactScalar) -> GaussianPolynomial {
        if c.is_zero() {
            return GaussianPolynomial::zero();
        }
        GaussianPolynomial {
            terms: self.terms.iter().map(|(m, k)| (m.clone(), k * c)).collect(),
        }
    }

    pub fn mul(&self, other: &GaussianPolynomial) -> Result<GaussianPolynomial, SymbolicError> {
        let mut out = GaussianPolynomial::zero();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                out.add_term(m1.mul(m2), c1 * c2)?;
            }
        }
        Ok(out)
    }

    /// d/dz_alpha (barred = false) or d/dzbar_alpha (barred = true) of the
    /// polynomial part.
    pub fn derivative(&self, alpha: u32, barred: bool) -> Result<GaussianPolynomial, SymbolicError> {
        let mut out = GaussianPolynomial::zero();
        for (m, c) in &self.terms {
            let e = m.0.get(&(alpha, barred)).copied().unwrap_or(0);
            if e == 0 {
                continue;
            }
            let mut m2 = m.0.clone();
            if e == 1 {
                m2.remove(&(alpha, barred));
            } else {
                m2.insert((alpha, barred), e - 1);
            }
            out.add_term(GMonomial(m2), c * &ExactScalar::from_int(e as i64))?;
        }
        Ok(out)
    }

    /// The homogeneous component of total degree `d`.
    pub fn homogeneous_component(&self, d: u32) -> GaussianPolynomial {
        GaussianPolynomial {
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| m.degree() == d)
                .map(|(m, c)| (m.clone(), c.clone()))
                .collect(),
        }
    }

    /// The degrees of the nonzero homogeneous components, ascending.
    pub fn homogeneous_degrees(&self) -> Vec<u32> {
        let mut v: Vec<u32> = self.terms.keys().map(|m| m.degree()).collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(|m| m.degree()).max().unwrap_or(0)
    }

    /// The constant term coefficient.
    pub fn constant_term(&self) -> ExactScalar {
        self.terms
            .get(&GMonomial::one())
            .cloned()
            .unwrap_or_else(ExactScalar::zero)
    }

    /// Restrict to a single coordinate: set z_beta = zbar_beta = 0 for all
    /// beta != alpha.
    pub fn restrict_to_coordinate(&self, alpha: u32) -> GaussianPolynomial {
        GaussianPolynomial {
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| m.0.keys().all(|(a, _)| *a == alpha))
                .map(|(m, c)| (m.clone(), c.clone()))
                .collect(),
        }
    }
}

impl fmt::Display for GaussianPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (m, c) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "{}", c)?;
            for ((a, b), e) in &m.0 {
                let name = if *b { "zbar" } else { "z" };
                if *e == 1 {
                    write!(f, "*{}_{}", name, a)?;
                } else {
                    write!(f, "*{}_{}^{}", name, a, e)?;
                }
            }
        }
        Ok(())
    }
}

fn check_alpha(alpha: u32, p: u32) -> Result<(), SymbolicError> {
    if alpha >= 1 && alpha <= p {
        Ok(())
    } else {
        Err(SymbolicError::IndexOutOfRange(format!(
            "coordinate index {} not in 1..={}",
            alpha, p
        )))
    }
}

/// Apply D_alpha (conjugated = false) or Dbar_alpha (conjugated = true) to
/// `f`, using d(phi_0)/dz_alpha = -pi zbar_alpha phi_0.
pub fn apply_d(
    f: &GaussianPolynomial,
    alpha: u32,
    conjugated: bool,
) -> Result<GaussianPolynomial, SymbolicError> {
    // D(P phi_0) = (2 zbar P - (1/pi) dP/dz) phi_0; Dbar swaps z <-> zbar.
    let mult = GaussianPolynomial::var(alpha, !conjugated).scale(&ExactScalar::from_int(2));
    let lead = f.mul(&mult)?;
    let der = f
        .derivative(alpha, conjugated)?
        .scale(&ExactScalar::ratio_pi(-1, 1, -1));
    lead.add(&der)
}

fn big_binom(n: u32, k: u32) -> BigRational {
    let mut acc = BigRational::one();
    for i in 0..k {
        acc = acc * BigRational::new(BigInt::from(n - i), BigInt::from(i + 1));
    }
    acc
}

fn big_falling(n: u32, k: u32) -> BigRational {
    // n! / (n-k)!
    let mut acc = BigRational::one();
    for i in 0..k {
        acc = acc * BigRational::from_integer(BigInt::from(n - i));
    }
    acc
}

/// Closed form for D_alpha^l Dbar_alpha^k phi_0:
/// 2^k sum_{m=0}^{l} C(l,m) sum_{n=0}^{min(m,k)} zbar^{l-n} z^{k-n}
///     C(m,n) k!/(k-n)! (-1/pi)^n.
pub fn power_formula(l: u32, k: u32, alpha: u32) -> Result<GaussianPolynomial, SymbolicError> {
    check_alpha(alpha, u32::MAX)?;
    let mut out = GaussianPolynomial::zero();
    for m in 0..=l {
        for n in 0..=m.min(k) {
            let rat = big_binom(l, m) * big_binom(m, n) * big_falling(k, n);
            let sign = if n % 2 == 0 { rat } else { -rat };
            let coeff = &ExactScalar::new(
                GaussRat::new(sign, BigRational::from_integer(BigInt::from(0))),
                -(n as i64),
            ) * &ExactScalar::from_int(1i64 << k);
            let mut mono = BTreeMap::new();
            if l - n > 0 {
                mono.insert((alpha, true), l - n);
            }
            if k - n > 0 {
                mono.insert((alpha, false), k - n);
            }
            out.add_term(GMonomial(mono), coeff)?;
        }
    }
    Ok(out)
}

/// Iterated application: D_alpha^l Dbar_alpha^k phi_0 via `apply_d`.
pub fn iterated_d(l: u32, k: u32, alpha: u32) -> Result<GaussianPolynomial, SymbolicError> {
    let mut f = GaussianPolynomial::one();
    for _ in 0..k {
        f = apply_d(&f, alpha, true)?;
    }
    for _ in 0..l {
        f = apply_d(&f, alpha, false)?;
    }
    Ok(f)
}

/// The Laguerre polynomial L_k(t) = sum_j C(k,j) (-1)^j t^j / j!, with t
/// substituted by 2 pi z_alpha zbar_alpha, as an exact Gaussian polynomial.
fn laguerre_substituted(k: u32, alpha: u32) -> Result<GaussianPolynomial, SymbolicError> {
    let mut out = GaussianPolynomial::zero();
    let mut fact = BigRational::one();
    for j in 0..=k {
        if j > 0 {
            fact = fact * BigRational::from_integer(BigInt::from(j));
        }
        let rat = big_binom(k, j) / fact.clone();
        let signed = if j % 2 == 0 { rat } else { -rat };
        // t^j = (2 pi)^j (z zbar)^j
        let coeff = &ExactScalar::new(
            GaussRat::new(signed, BigRational::from_integer(BigInt::from(0))),
            j as i64,
        ) * &ExactScalar::from_int(1i64 << j);
        let mut mono = BTreeMap::new();
        if j > 0 {
            mono.insert((alpha, false), j);
            mono.insert((alpha, true), j);
        }
        out.add_term(GMonomial(mono), coeff)?;
    }
    Ok(out)
}

/// Exact check of (D_alpha Dbar_alpha)^k phi_0
/// = (-1/pi)^k 2^k k! L_k(2 pi |z_alpha|^2) phi_0.
pub fn laguerre_identity_check(k: u32, alpha: u32) -> Result<bool, SymbolicError> {
    let lhs = iterated_d(k, k, alpha)?;
    let mut kfact = BigRational::one();
    for i in 1..=k {
        kfact = kfact * BigRational::from_integer(BigInt::from(i));
    }
    let sign = if k % 2 == 0 { kfact } else { -kfact };
    let front = &ExactScalar::new(
        GaussRat::new(sign, BigRational::from_integer(BigInt::from(0))),
        -(k as i64),
    ) * &ExactScalar::from_int(1i64 << k);
    let rhs = laguerre_substituted(k, alpha)?.scale(&front);
    Ok(lhs == rhs)
}

/// The exact polynomial attached to a multi-index pair of length q-1:
/// P = (D_{alphas} Dbar_{betas} phi_0) / phi_0.
pub fn compute_p(
    p: u32,
    q: u32,
    alphas: &[u32],
    betas: &[u32],
) -> Result<GaussianPolynomial, SymbolicError> {
    if alphas.len() != (q - 1) as usize || betas.len() != (q - 1) as usize {
        return Err(SymbolicError::IndexOutOfRange(format!(
            "multi-indices must have length q-1 = {}",
            q - 1
        )));
    }
    let mut f = GaussianPolynomial::one();
    for &b in betas {
        check_alpha(b, p)?;
        f = apply_d(&f, b, true)?;
    }
    for &a in alphas {
        check_alpha(a, p)?;
        f = apply_d(&f, a, false)?;
    }
    Ok(f)
}

/// Structural report for the attached polynomials over all multi-index pairs.
#[derive(Debug, Clone)]
pub struct PolyStructureReport {
    pub pairs_checked: usize,
    /// degree 2q-2 and only coordinates 1..=p occur.
    pub degree_ok: bool,
    /// leading term 2^{2(q-1)} prod zbar_{alpha} prod z_{beta}.
    pub leading_ok: bool,
    /// every monomial has even total degree.
    pub even_ok: bool,
    /// constant term nonzero iff multiplicities match, with the predicted
    /// value.
    pub constant_ok: bool,
}

impl PolyStructureReport {
    pub fn all_ok(&self) -> bool {
        self.degree_ok && self.leading_ok && self.even_ok && self.constant_ok
    }
}

fn multiplicities(idx: &[u32]) -> BTreeMap<u32, u32> {
    let mut m = BTreeMap::new();
    for &a in idx {
        *m.entry(a).or_insert(0) += 1;
    }
    m
}

/// Check the four structural properties of the attached polynomials for all
/// multi-index pairs of signature (p, q).
pub fn check_poly_structure(p: u32, q: u32) -> Result<PolyStructureReport, SymbolicError> {
    let idx = multi_indices(p, q as usize - 1);
    let mut report = PolyStructureReport {
        pairs_checked: 0,
        degree_ok: true,
        leading_ok: true,
        even_ok: true,
        constant_ok: true,
    };
    for alphas in &idx {
        for betas in &idx {
            report.pairs_checked += 1;
            let poly = compute_p(p, q, alphas, betas)?;

            // (1) degree 2q-2, coordinates within 1..=p.
            if poly.total_degree() != 2 * (q - 1)
                || poly
                    .terms
                    .keys()
                    .any(|m| m.0.keys().any(|(a, _)| *a < 1 || *a > p))
            {
                report.degree_ok = false;
            }

            // (2) leading term 2^{2(q-1)} prod zbar_alpha prod z_beta.
            let mut lead_mono = GMonomial::one();
            for &a in alphas {
                lead_mono = lead_mono.mul(&GMonomial::var(a, true));
            }
            for &b in betas {
                lead_mono = lead_mono.mul(&GMonomial::var(b, false));
            }
            let top = poly.homogeneous_component(2 * (q - 1));
            let expected_top = ExactScalar::from_int(1i64 << (2 * (q - 1)));
            if top.num_terms() != 1 || top.terms.get(&lead_mono) != Some(&expected_top) {
                report.leading_ok = false;
            }

            // (3) even total degree termwise.
            if poly.terms.keys().any(|m| m.degree() % 2 != 0) {
                report.even_ok = false;
            }

            // (4) constant term.
            let c = poly.constant_term();
            if multiplicities(alphas) == multiplicities(betas) {
                let mut expected = BigRational::one();
                for (_, m) in multiplicities(alphas) {
                    for i in 1..=m {
                        expected = expected * BigRational::from_integer(BigInt::from(i));
                    }
                }
                expected = expected * BigRational::from_integer(BigInt::from(1i64 << (q - 1)));
                let sign = if (q - 1) % 2 == 0 { expected } else { -expected };
                let want = ExactScalar::new(
                    GaussRat::new(sign, BigRational::from_integer(BigInt::from(0))),
                    -((q - 1) as i64),
                );
                if c != want {
                    report.constant_ok = false;
                }
            } else if !c.is_zero() {
                report.constant_ok = false;
            }
        }
    }
    Ok(report)
}

/// Coefficient-bridge report between the Schroedinger construction and the
/// Fock-model forms.
#[derive(Debug, Clone)]
pub struct BridgeReport {
    pub phi_matches: bool,
    pub psi_matches: bool,
}

/// Verify that replacing each ladder operator by its Fock image
/// (D_alpha -> c z''_alpha, Dbar_beta -> c z'_beta with c^2 = -1/(2 pi^2))
/// turns the Schroedinger constructions into exactly the Fock-model forms,
/// constants included. The bridge constant only ever occurs in pairs, so no
/// radical extension of the scalar ring is needed.
pub fn bridge_to_fock(p: u32, q: u32) -> Result<BridgeReport, SymbolicError> {
    let sig = Signature::pq11(p, q);

    // phi: front 1/2^{2q}, 2q bridge pairs -> (-1/(2 pi^2))^q.
    let pair = ExactScalar::ratio_pi(-1, 2, -2);
    let phi_coeff = &ExactScalar::ratio_pi(1, 1i64 << (2 * q), 0) * &pair.pow(q);
    let mut expected_phi = crate::fock::FockForm::zero(sig);
    let idx_q = multi_indices(p, q as usize);
    for alphas in &idx_q {
        for betas in &idx_q {
            let omega = omega_q(sig, alphas, betas)?;
            let mut mono = PolyMonomial::one();
            for &a in alphas {
                mono = mono.mul(&PolyMonomial::var(zpp_alpha(a)));
            }
            for &b in betas {
                mono = mono.mul(&PolyMonomial::var(zp_alpha(b)));
            }
            for ((e, ep), c) in &omega.terms {
                debug_assert!(ep.exponents.is_empty());
                expected_phi.add_term(e.clone(), mono.clone(), c * &phi_coeff)?;
            }
        }
    }
    let phi_matches = expected_phi == build_phi_km(p, q)?;

    // psi: front 2i(-1)^{q-1}/2^{2(q-1)}, q-1 bridge pairs.
    let sgn = if (q - 1) % 2 == 0 { 2 } else { -2 };
    let front = &(&ExactScalar::ratio_pi(sgn, 1i64 << (2 * (q - 1)), 0) * &ExactScalar::i())
        * &pair.pow(q - 1);
    let mut expected_psi = crate::fock::FockForm::zero(sig);
    let idx_q1 = multi_indices(p, q as usize - 1);
    for alphas in &idx_q1 {
        for betas in &idx_q1 {
            let omega = omega_q_minus_1(sig, alphas, betas)?;
            let mut mono = PolyMonomial::one();
            for &a in alphas {
                mono = mono.mul(&PolyMonomial::var(zpp_alpha(a)));
            }
            for &b in betas {
                mono = mono.mul(&PolyMonomial::var(zp_alpha(b)));
            }
            for ((e, ep), c) in &omega.terms {
                debug_assert!(ep.exponents.is_empty());
                expected_psi.add_term(e.clone(), mono.clone(), c * &front)?;
            }
        }
    }
    let psi_matches = expected_psi == build_psi(p, q)?;

    Ok(BridgeReport {
        phi_matches,
        psi_matches,
    })
}

/// The homogeneous split used by the Green-form evaluator: components of
/// even degrees 0, 2, ..., 2(q-1), each balanced in z and zbar.
pub fn homogeneous_split(poly: &GaussianPolynomial) -> Vec<(u32, GaussianPolynomial)> {
    poly.homogeneous_degrees()
        .into_iter()
        .map(|d| (d, poly.homogeneous_component(d)))
        .collect()
}

// Keep the unused import warning away when ExtMonomial is only used in tests.
#[allow(unused)]
fn _ty(_: &ExtMonomial) {}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn d_on_gaussian() {
        // D_alpha phi_0 = 2 zbar_alpha phi_0.
        let f = apply_d(&GaussianPolynomial::one(), 1, false).unwrap();
        let expected = GaussianPolynomial::var(1, true).scale(&ExactScalar::from_int(2));
        assert_eq!(f, expected);
        // Dbar_alpha phi_0 = 2 z_alpha phi_0 (conjugate convention).
        let g = apply_d(&GaussianPolynomial::one(), 1, true).unwrap();
        let expected = GaussianPolynomial::var(1, false).scale(&ExactScalar::from_int(2));
        assert_eq!(g, expected);
    }

    #[test]
    fn d_dbar_on_gaussian() {
        // D Dbar phi_0 = (4 |z|^2 - 2/pi) phi_0.
        let f = iterated_d(1, 1, 1).unwrap();
        let mut expected = GaussianPolynomial::zero();
        expected
            .add_term(
                GMonomial::var(1, false).mul(&GMonomial::var(1, true)),
                ExactScalar::from_int(4),
            )
            .unwrap();
        expected
            .add_term(GMonomial::one(), ExactScalar::ratio_pi(-2, 1, -1))
            .unwrap();
        assert_eq!(f, expected);
    }

    #[test]
    fn operators_commute() {
        // D_1 D_2 = D_2 D_1 and D_1 Dbar_2 = Dbar_2 D_1 on a sample.
        let base = iterated_d(1, 1, 1).unwrap();
        let a = apply_d(&apply_d(&base, 1, false).unwrap(), 2, false).unwrap();
        let b = apply_d(&apply_d(&base, 2, false).unwrap(), 1, false).unwrap();
        assert_eq!(a, b);
        let c = apply_d(&apply_d(&base, 1, false).unwrap(), 2, true).unwrap();
        let d = apply_d(&apply_d(&base, 2, true).unwrap(), 1, false).unwrap();
        assert_eq!(c, d);
    }

    #[test]
    fn power_formula_matches_iteration() {
        for l in 0..=4u32 {
            for k in 0..=4u32 {
                if l + k > 8 {
                    continue;
                }
                assert_eq!(
                    power_formula(l, k, 1).unwrap(),
                    iterated_d(l, k, 1).unwrap(),
                    "l={} k={}",
                    l,
                    k
                );
            }
        }
    }

    #[test]
    fn power_formula_examples() {
        // l=2, k=0 -> 4 zbar^2.
        let f = power_formula(2, 0, 1).unwrap();
        let mut expected = GaussianPolynomial::zero();
        expected
            .add_term(
                GMonomial::var(1, true).mul(&GMonomial::var(1, true)),
                ExactScalar::from_int(4),
            )
            .unwrap();
        assert_eq!(f, expected);
    }

    #[test]
    fn laguerre_identity() {
        for k in 0..=5 {
            assert!(laguerre_identity_check(k, 1).unwrap(), "k={}", k);
        }
    }

    #[test]
    fn compute_p_examples() {
        // q=1: empty products -> constant 1.
        let p0 = compute_p(2, 1, &[], &[]).unwrap();
        assert_eq!(p0, GaussianPolynomial::one());
        // q=2, alphas=betas=(1): 4|z_1|^2 - 2/pi.
        let p1 = compute_p(2, 2, &[1], &[1]).unwrap();
        assert_eq!(p1, iterated_d(1, 1, 1).unwrap());
        // q=3, alphas=betas=(1,1): constant term 2^2 (1/pi^2) 2! = 8/pi^2.
        let p2 = compute_p(1, 3, &[1, 1], &[1, 1]).unwrap();
        assert_eq!(p2.constant_term(), ExactScalar::ratio_pi(8, 1, -2));
    }

    #[test]
    fn compute_p_symmetry() {
        // Invariance under permuting each multi-index separately.
        let a = compute_p(2, 3, &[1, 2], &[2, 1]).unwrap();
        let b = compute_p(2, 3, &[2, 1], &[2, 1]).unwrap();
        let c = compute_p(2, 3, &[1, 2], &[1, 2]).unwrap();
        assert_eq!(a, b);
        assert_eq!(a, c);
    }

    #[test]
    fn poly_structure_small() {
        let r = check_poly_structure(2, 2).unwrap();
        assert_eq!(r.pairs_checked, 4);
        assert!(r.all_ok(), "{:?}", r);
        let r = check_poly_structure(1, 3).unwrap();
        assert!(r.all_ok(), "{:?}", r);
        let r = check_poly_structure(2, 3).unwrap();
        assert_eq!(r.pairs_checked, 16);
        assert!(r.all_ok(), "{:?}", r);
    }

    #[test]
    fn mismatched_multiplicity_constant_vanishes() {
        let p = compute_p(2, 2, &[1], &[2]).unwrap();
        assert!(p.constant_term().is_zero());
    }

    #[test]
    fn homogeneous_components_balanced() {
        // Every homogeneous component of even degree 2l is balanced: l
        // unbarred and l barred factors in each monomial, which is exactly
        // the scaling law P_{;2l}(w x) = |w|^{2l} P_{;2l}(x).
        let poly = compute_p(2, 3, &[1, 2], &[1, 1]).unwrap();
        for (d, comp) in homogeneous_split(&poly) {
            assert_eq!(d % 2, 0);
            for m in comp.terms.keys() {
                let (plain, barred) = m.bidegree();
                assert_eq!(plain, d / 2);
                assert_eq!(barred, d / 2);
            }
        }
    }

    #[test]
    fn single_coordinate_restriction() {
        // Restricting to x = z_1 v_1 kills P exactly when the multi-index
        // multiplicities disagree: a mismatched coordinate leaves an unmatched
        // variable in every monomial. Matched multiplicities leave a product
        // of Laguerre factors, nonzero at the origin even when the indices
        // avoid coordinate 1 entirely.
        let p_match = compute_p(2, 3, &[1, 1], &[1, 1]).unwrap();
        assert!(!p_match.restrict_to_coordinate(1).is_zero());
        let p_mixed = compute_p(2, 3, &[1, 2], &[1, 1]).unwrap();
        assert!(p_mixed.restrict_to_coordinate(1).is_zero());
        let p_other = compute_p(2, 3, &[2, 2], &[2, 2]).unwrap();
        assert_eq!(
            p_other.restrict_to_coordinate(1).constant_term(),
            ExactScalar::ratio_pi(8, 1, -2)
        );
        for alphas in multi_indices(2, 2) {
            for betas in multi_indices(2, 2) {
                let r = compute_p(2, 3, &alphas, &betas)
                    .unwrap()
                    .restrict_to_coordinate(1);
                assert_eq!(
                    r.is_zero(),
                    multiplicities(&alphas) != multiplicities(&betas),
                    "alphas={:?} betas={:?}",
                    alphas,
                    betas
                );
            }
        }
    }

    #[test]
    fn bridge_small_signatures() {
        for (p, q) in [(1, 1), (2, 1), (1, 2), (2, 2), (3, 2), (2, 3)] {
            let r = bridge_to_fock(p, q).unwrap();
            assert!(r.phi_matches, "phi bridge (p,q)=({},{})", p, q);
            assert!(r.psi_matches, "psi bridge (p,q)=({},{})", p, q);
        }
    }
}
