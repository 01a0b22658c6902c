//! The polynomial Fock space tensored with the exterior algebra on the
//! generators xi'_{alpha mu}, xi''_{alpha mu}.
//!
//! Elements are sparse sums of terms `(exterior monomial, polynomial
//! monomial) -> exact scalar`, with scalars in Q(i) times a power of a formal
//! pi (see [`crate::exact`]). Exterior monomials are kept in one global
//! canonical order (sorted by (mu, kind with prime < doubleprime, alpha));
//! the reordering sign is folded into the coefficient on construction, which
//! makes all identities independent of the order in which wedges are written.

use crate::error::SymbolicError;
use crate::exact::ExactScalar;
use std::collections::BTreeMap;
use std::fmt;

/// Prime / double-prime flavor of a variable or exterior generator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Kind {
    Prime,
    DoublePrime,
}

impl Kind {
    fn tick(&self) -> &'static str {
        match self {
            Kind::Prime => "'",
            Kind::DoublePrime => "''",
        }
    }
}

/// The signature (p, q, r, s) of the dual pair U(p,q) x U(r,s).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Signature {
    pub p: u32,
    pub q: u32,
    pub r: u32,
    pub s: u32,
}

impl Signature {
    pub fn new(p: u32, q: u32, r: u32, s: u32) -> Self {
        Signature { p, q, r, s }
    }

    /// Signature for the dual pair with U(1,1) on the small side.
    pub fn pq11(p: u32, q: u32) -> Self {
        Signature::new(p, q, 1, 1)
    }

    /// Dimension m = p + q of the hermitian space.
    pub fn m(&self) -> u32 {
        self.p + self.q
    }

    /// Number of witness indices r + s.
    pub fn n(&self) -> u32 {
        self.r + self.s
    }

    pub fn tuple(&self) -> (u32, u32, u32, u32) {
        (self.p, self.q, self.r, self.s)
    }
}

/// A variable of the polynomial Fock space.
///
/// The admissible combinations are z''_{alpha a}, z'_{mu a} for witness
/// indices a in 1..=r, and z'_{alpha u}, z''_{mu u} for u in r+1..=r+s, where
/// alpha ranges over 1..=p and mu over p+1..=p+q.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FockVariable {
    pub vec_index: u32,
    pub witness_index: u32,
    pub kind: Kind,
}

impl FockVariable {
    /// Construct with admissibility validation against `sig`.
    pub fn new(
        sig: &Signature,
        vec_index: u32,
        witness_index: u32,
        kind: Kind,
    ) -> Result<Self, SymbolicError> {
        let v = FockVariable {
            vec_index,
            witness_index,
            kind,
        };
        if v.is_admissible(sig) {
            Ok(v)
        } else {
            Err(SymbolicError::InadmissibleVariable {
                vec_index,
                witness_index,
                kind: kind.tick(),
            })
        }
    }

    pub fn is_admissible(&self, sig: &Signature) -> bool {
        let in_alpha = self.vec_index >= 1 && self.vec_index <= sig.p;
        let in_mu = self.vec_index > sig.p && self.vec_index <= sig.m();
        let in_a = self.witness_index >= 1 && self.witness_index <= sig.r;
        let in_u = self.witness_index > sig.r && self.witness_index <= sig.n();
        match self.kind {
            Kind::DoublePrime => (in_alpha && in_a) || (in_mu && in_u),
            Kind::Prime => (in_mu && in_a) || (in_alpha && in_u),
        }
    }
}

/// Abbreviated variables for the r = s = 1 case used throughout:
/// z''_alpha = z''_{alpha 1}, z'_alpha = z'_{alpha 2},
/// z'_mu = z'_{mu 1}, z''_mu = z''_{mu 2}.
pub fn zpp_alpha(alpha: u32) -> FockVariable {
    FockVariable {
        vec_index: alpha,
        witness_index: 1,
        kind: Kind::DoublePrime,
    }
}

pub fn zp_alpha(alpha: u32) -> FockVariable {
    FockVariable {
        vec_index: alpha,
        witness_index: 2,
        kind: Kind::Prime,
    }
}

pub fn zp_mu(mu: u32) -> FockVariable {
    FockVariable {
        vec_index: mu,
        witness_index: 1,
        kind: Kind::Prime,
    }
}

pub fn zpp_mu(mu: u32) -> FockVariable {
    FockVariable {
        vec_index: mu,
        witness_index: 2,
        kind: Kind::DoublePrime,
    }
}

/// A sparse monomial in the Fock variables; exponents are >= 1.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct PolyMonomial {
    pub exponents: BTreeMap<FockVariable, u32>,
}

impl PolyMonomial {
    pub fn one() -> Self {
        PolyMonomial::default()
    }

    pub fn var(v: FockVariable) -> Self {
        let mut e = BTreeMap::new();
        e.insert(v, 1);
        PolyMonomial { exponents: e }
    }

    pub fn degree(&self) -> u32 {
        self.exponents.values().sum()
    }

    pub fn mul(&self, other: &PolyMonomial) -> PolyMonomial {
        let mut e = self.exponents.clone();
        for (v, k) in &other.exponents {
            *e.entry(*v).or_insert(0) += k;
        }
        PolyMonomial { exponents: e }
    }

    pub fn exponent(&self, v: &FockVariable) -> u32 {
        self.exponents.get(v).copied().unwrap_or(0)
    }

    /// Remove one power of `v`; returns the old exponent, or None if absent.
    fn lower(&self, v: &FockVariable) -> Option<(PolyMonomial, u32)> {
        let k = self.exponent(v);
        if k == 0 {
            return None;
        }
        let mut e = self.exponents.clone();
        if k == 1 {
            e.remove(v);
        } else {
            e.insert(*v, k - 1);
        }
        Some((PolyMonomial { exponents: e }, k))
    }
}

/// An exterior generator xi'_{alpha mu} or xi''_{alpha mu}.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ExtGen {
    pub kind: Kind,
    pub alpha: u32,
    pub mu: u32,
}

impl ExtGen {
    pub fn prime(alpha: u32, mu: u32) -> Self {
        ExtGen {
            kind: Kind::Prime,
            alpha,
            mu,
        }
    }

    pub fn doubleprime(alpha: u32, mu: u32) -> Self {
        ExtGen {
            kind: Kind::DoublePrime,
            alpha,
            mu,
        }
    }

    fn key(&self) -> (u32, Kind, u32) {
        (self.mu, self.kind, self.alpha)
    }
}

impl PartialOrd for ExtGen {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ExtGen {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.key().cmp(&other.key())
    }
}

/// A strictly increasing wedge of exterior generators in the canonical order.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct ExtMonomial {
    pub factors: Vec<ExtGen>,
}

impl ExtMonomial {
    pub fn empty() -> Self {
        ExtMonomial::default()
    }

    /// Sort `gens` into canonical order. Returns the sorted monomial and the
    /// sign of the permutation, or None if a generator repeats (the wedge is
    /// zero).
    pub fn from_gens(gens: &[ExtGen]) -> Option<(ExtMonomial, i32)> {
        let mut v: Vec<ExtGen> = gens.to_vec();
        // Count inversions with a simple insertion sort; the monomials here
        // have at most ~2q factors.
        let mut sign = 1i32;
        for i in 1..v.len() {
            let mut j = i;
            while j > 0 && v[j - 1] > v[j] {
                v.swap(j - 1, j);
                sign = -sign;
                j -= 1;
            }
        }
        for w in v.windows(2) {
            if w[0] == w[1] {
                return None;
            }
        }
        Some((ExtMonomial { factors: v }, sign))
    }

    pub fn degree(&self) -> u32 {
        self.factors.len() as u32
    }

    /// (number of prime factors, number of doubleprime factors).
    pub fn bidegree(&self) -> (u32, u32) {
        let a = self
            .factors
            .iter()
            .filter(|g| g.kind == Kind::Prime)
            .count() as u32;
        (a, self.degree() - a)
    }

    /// Wedge of two canonical monomials; None if they share a generator.
    pub fn wedge(&self, other: &ExtMonomial) -> Option<(ExtMonomial, i32)> {
        let mut gens = self.factors.clone();
        gens.extend_from_slice(&other.factors);
        ExtMonomial::from_gens(&gens)
    }
}

/// An exact element of the polynomial Fock space tensored with the exterior
/// algebra: a sparse sum of terms with [`ExactScalar`] coefficients.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FockForm {
    pub signature: Signature,
    pub terms: BTreeMap<(ExtMonomial, PolyMonomial), ExactScalar>,
}

impl FockForm {
    pub fn zero(sig: Signature) -> Self {
        FockForm {
            signature: sig,
            terms: BTreeMap::new(),
        }
    }

    /// The scalar `c` as a form.
    pub fn scalar(sig: Signature, c: ExactScalar) -> Self {
        let mut f = FockForm::zero(sig);
        f.add_term(ExtMonomial::empty(), PolyMonomial::one(), c)
            .expect("adding to an empty form cannot fail");
        f
    }

    /// A single term.
    pub fn term(
        sig: Signature,
        ext: ExtMonomial,
        poly: PolyMonomial,
        c: ExactScalar,
    ) -> Self {
        let mut f = FockForm::zero(sig);
        f.add_term(ext, poly, c)
            .expect("adding to an empty form cannot fail");
        f
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Add a single term in place, enforcing pi-homogeneity per key and the
    /// no-stored-zero canonical form.
    pub fn add_term(
        &mut self,
        ext: ExtMonomial,
        poly: PolyMonomial,
        c: ExactScalar,
    ) -> Result<(), SymbolicError> {
        if c.is_zero() {
            return Ok(());
        }
        let key = (ext, poly);
        match self.terms.get(&key) {
            Some(existing) => {
                let sum = existing.checked_add(&c)?;
                if sum.is_zero() {
                    self.terms.remove(&key);
                } else {
                    self.terms.insert(key, sum);
                }
            }
            None => {
                self.terms.insert(key, c);
            }
        }
        Ok(())
    }

    fn check_sig(&self, other: &FockForm) -> Result<(), SymbolicError> {
        if self.signature != other.signature {
            return Err(SymbolicError::SignatureMismatch(
                self.signature.tuple(),
                other.signature.tuple(),
            ));
        }
        Ok(())
    }

    pub fn add(&self, other: &FockForm) -> Result<FockForm, SymbolicError> {
        self.check_sig(other)?;
        let mut out = self.clone();
        for ((e, p), c) in &other.terms {
            out.add_term(e.clone(), p.clone(), c.clone())?;
        }
        Ok(out)
    }

    pub fn sub(&self, other: &FockForm) -> Result<FockForm, SymbolicError> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> FockForm {
        let mut out = FockForm::zero(self.signature);
        for ((e, p), c) in &self.terms {
            out.terms.insert((e.clone(), p.clone()), -c);
        }
        out
    }

    pub fn scale(&self, c: &ExactScalar) -> FockForm {
        if c.is_zero() {
            return FockForm::zero(self.signature);
        }
        let mut out = FockForm::zero(self.signature);
        for ((e, p), coeff) in &self.terms {
            out.terms.insert((e.clone(), p.clone()), coeff * c);
        }
        out
    }

    /// Product that multiplies polynomial parts and wedges exterior parts.
    pub fn poly_mul(&self, other: &FockForm) -> Result<FockForm, SymbolicError> {
        self.check_sig(other)?;
        let mut out = FockForm::zero(self.signature);
        for ((e1, p1), c1) in &self.terms {
            for ((e2, p2), c2) in &other.terms {
                if let Some((ext, sign)) = e1.wedge(e2) {
                    let c = &(c1 * c2) * &ExactScalar::from_int(sign as i64);
                    out.add_term(ext, p1.mul(p2), c)?;
                }
            }
        }
        Ok(out)
    }

    /// Wedge product (same as [`FockForm::poly_mul`]: polynomial factors
    /// commute, exterior factors anticommute).
    pub fn wedge(&self, other: &FockForm) -> Result<FockForm, SymbolicError> {
        self.poly_mul(other)
    }

    /// Multiply by a single variable.
    pub fn mul_var(&self, v: FockVariable) -> Result<FockForm, SymbolicError> {
        FockVariable::new(&self.signature, v.vec_index, v.witness_index, v.kind)?;
        let mut out = FockForm::zero(self.signature);
        for ((e, p), c) in &self.terms {
            out.add_term(e.clone(), p.mul(&PolyMonomial::var(v)), c.clone())?;
        }
        Ok(out)
    }

    /// Formal partial derivative with respect to `v` on polynomial parts.
    pub fn partial_derivative(&self, v: FockVariable) -> Result<FockForm, SymbolicError> {
        FockVariable::new(&self.signature, v.vec_index, v.witness_index, v.kind)?;
        let mut out = FockForm::zero(self.signature);
        for ((e, p), c) in &self.terms {
            if let Some((lowered, k)) = p.lower(&v) {
                let c = c * &ExactScalar::from_int(k as i64);
                out.add_term(e.clone(), lowered, c)?;
            }
        }
        Ok(out)
    }

    /// Left exterior multiplication by a single generator.
    pub fn ext_mul_left(&self, g: ExtGen) -> Result<FockForm, SymbolicError> {
        let single = ExtMonomial {
            factors: vec![g],
        };
        let mut out = FockForm::zero(self.signature);
        for ((e, p), c) in &self.terms {
            if let Some((ext, sign)) = single.wedge(e) {
                let c = c * &ExactScalar::from_int(sign as i64);
                out.add_term(ext, p.clone(), c)?;
            }
        }
        Ok(out)
    }

    /// The component whose exterior bidegree is exactly (a, b).
    pub fn bidegree_component(&self, a: u32, b: u32) -> FockForm {
        let mut out = FockForm::zero(self.signature);
        for ((e, p), c) in &self.terms {
            if e.bidegree() == (a, b) {
                out.terms.insert((e.clone(), p.clone()), c.clone());
            }
        }
        out
    }

    /// Sorted list of exterior bidegrees present.
    pub fn bidegrees(&self) -> Vec<(u32, u32)> {
        let mut v: Vec<(u32, u32)> = self.terms.keys().map(|(e, _)| e.bidegree()).collect();
        v.sort_unstable();
        v.dedup();
        v
    }
}

fn write_poly(f: &mut fmt::Formatter<'_>, p: &PolyMonomial) -> fmt::Result {
    if p.exponents.is_empty() {
        return write!(f, "1");
    }
    let mut first = true;
    for (v, k) in &p.exponents {
        if !first {
            write!(f, "*")?;
        }
        first = false;
        write!(
            f,
            "z{}_{{{},{}}}",
            v.kind.tick(),
            v.vec_index,
            v.witness_index
        )?;
        if *k > 1 {
            write!(f, "^{}", k)?;
        }
    }
    Ok(())
}

fn write_ext(f: &mut fmt::Formatter<'_>, e: &ExtMonomial) -> fmt::Result {
    if e.factors.is_empty() {
        return write!(f, "1");
    }
    let mut first = true;
    for g in &e.factors {
        if !first {
            write!(f, "^")?;
        }
        first = false;
        write!(f, "xi{}_{{{},{}}}", g.kind.tick(), g.alpha, g.mu)?;
    }
    Ok(())
}

/// Canonical text form: terms in key order, each as
/// `coeff * pi^k * z-monomial * ext-monomial`.
impl fmt::Display for FockForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for ((e, p), c) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "{} * pi^{} * ", c.gauss, c.pi_pow)?;
            write_poly(f, p)?;
            write!(f, " * ")?;
            write_ext(f, e)?;
        }
        Ok(())
    }
}

/// The basis (q,q)-form Omega_q(alphas; betas) of the exterior algebra,
/// built from the interleaved wedge with the (-1)^{q(q-1)/2} normalization:
///
/// Omega_q = (-1)^{q(q-1)/2} xi'_{alpha_1, p+1} ^ xi''_{beta_1, p+1} ^ ...
///           ^ xi'_{alpha_q, p+q} ^ xi''_{beta_q, p+q}.
pub fn omega_q(sig: Signature, alphas: &[u32], betas: &[u32]) -> Result<FockForm, SymbolicError> {
    let q = sig.q as usize;
    check_multi_index(sig.p, alphas, q)?;
    check_multi_index(sig.p, betas, q)?;
    let mut gens = Vec::with_capacity(2 * q);
    for i in 0..q {
        let mu = sig.p + 1 + i as u32;
        gens.push(ExtGen::prime(alphas[i], mu));
        gens.push(ExtGen::doubleprime(betas[i], mu));
    }
    let mut sign = if (q * (q - 1) / 2) % 2 == 0 { 1 } else { -1 };
    let ext = match ExtMonomial::from_gens(&gens) {
        Some((ext, s)) => {
            sign *= s;
            ext
        }
        None => return Ok(FockForm::zero(sig)),
    };
    Ok(FockForm::term(
        sig,
        ext,
        PolyMonomial::one(),
        ExactScalar::from_int(sign as i64),
    ))
}

/// The basis (q-1,q-1)-form Omega_{q-1}(alphas; betas) with multi-indices of
/// length q-1: the hatted sum
///
/// Omega_{q-1} = (-1)^{q(q-1)/2} sum_{j=1}^{q} [interleaved wedge over the
/// slots p+1..p+q with the j-th pair omitted].
pub fn omega_q_minus_1(
    sig: Signature,
    alphas: &[u32],
    betas: &[u32],
) -> Result<FockForm, SymbolicError> {
    let q = sig.q as usize;
    check_multi_index(sig.p, alphas, q - 1)?;
    check_multi_index(sig.p, betas, q - 1)?;
    let prefactor = if (q * (q - 1) / 2) % 2 == 0 { 1 } else { -1 };
    let mut out = FockForm::zero(sig);
    for j in 1..=q {
        let mut gens = Vec::with_capacity(2 * (q - 1));
        let mut t = 0usize;
        for slot in 1..=q {
            if slot == j {
                continue;
            }
            let mu = sig.p + slot as u32;
            gens.push(ExtGen::prime(alphas[t], mu));
            gens.push(ExtGen::doubleprime(betas[t], mu));
            t += 1;
        }
        if let Some((ext, s)) = ExtMonomial::from_gens(&gens) {
            out.add_term(
                ext,
                PolyMonomial::one(),
                ExactScalar::from_int((prefactor * s) as i64),
            )?;
        }
    }
    Ok(out)
}

fn check_multi_index(p: u32, idx: &[u32], expected_len: usize) -> Result<(), SymbolicError> {
    if idx.len() != expected_len {
        return Err(SymbolicError::IndexOutOfRange(format!(
            "multi-index length {} (expected {})",
            idx.len(),
            expected_len
        )));
    }
    for &a in idx {
        if a < 1 || a > p {
            return Err(SymbolicError::IndexOutOfRange(format!(
                "multi-index entry {} not in 1..={}",
                a, p
            )));
        }
    }
    Ok(())
}
