//! Hermitian lattices over imaginary quadratic orders: exact field and
//! matrix arithmetic, the realified trace form, dual lattice and
//! discriminant group, short-vector enumeration under a positive-definite
//! majorant, and the finite Weil representation on the discriminant group.

use crate::error::LatticeError;
use nalgebra::{DMatrix, DVector};
use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeSet, VecDeque};

/// An imaginary quadratic field of fundamental discriminant `disc` < 0, with
/// ring of integers Z[omega], omega = (disc + sqrt(disc)) / 2, and different
/// generated by sqrt(disc) (positive imaginary part under the fixed
/// embedding).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ImagQuadField {
    pub disc: i64,
}

fn is_squarefree(mut n: i64) -> bool {
    let mut d = 2;
    while d * d <= n {
        if n % (d * d) == 0 {
            return false;
        }
        while n % d == 0 {
            n /= d;
        }
        d += 1;
    }
    true
}

impl ImagQuadField {
    pub fn new(disc: i64) -> Result<Self, LatticeError> {
        if disc >= 0 {
            return Err(LatticeError::BadDiscriminant(disc));
        }
        let fundamental = if disc.rem_euclid(4) == 1 {
            is_squarefree(-disc)
        } else if disc.rem_euclid(4) == 0 {
            let m = disc / 4;
            is_squarefree(-m) && matches!(m.rem_euclid(4), 2 | 3)
        } else {
            false
        };
        if !fundamental {
            return Err(LatticeError::BadDiscriminant(disc));
        }
        Ok(ImagQuadField { disc })
    }

    /// Tr(omega) = disc.
    pub fn omega_trace(&self) -> i64 {
        self.disc
    }

    /// Nm(omega) = (disc^2 - disc) / 4.
    pub fn omega_norm(&self) -> i64 {
        (self.disc * self.disc - self.disc) / 4
    }

    /// omega as a complex number: (disc + i sqrt(|disc|)) / 2.
    pub fn omega_complex(&self) -> Complex64 {
        Complex64::new(self.disc as f64 / 2.0, ((-self.disc) as f64).sqrt() / 2.0)
    }

    /// The different generator delta = sqrt(disc) = 2 omega - disc, with
    /// positive imaginary part.
    pub fn delta_complex(&self) -> Complex64 {
        Complex64::new(0.0, ((-self.disc) as f64).sqrt())
    }
}

/// An element a + b*omega of the field, with rational a, b.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct QuadElem {
    pub a: BigRational,
    pub b: BigRational,
}

impl QuadElem {
    pub fn new(a: BigRational, b: BigRational) -> Self {
        QuadElem { a, b }
    }

    pub fn zero() -> Self {
        QuadElem::new(BigRational::zero(), BigRational::zero())
    }

    pub fn one() -> Self {
        QuadElem::new(BigRational::one(), BigRational::zero())
    }

    pub fn from_ints(a: i64, b: i64) -> Self {
        QuadElem::new(
            BigRational::from_integer(BigInt::from(a)),
            BigRational::from_integer(BigInt::from(b)),
        )
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    pub fn add(&self, o: &QuadElem) -> QuadElem {
        QuadElem::new(&self.a + &o.a, &self.b + &o.b)
    }

    pub fn sub(&self, o: &QuadElem) -> QuadElem {
        QuadElem::new(&self.a - &o.a, &self.b - &o.b)
    }

    pub fn neg(&self) -> QuadElem {
        QuadElem::new(-self.a.clone(), -self.b.clone())
    }

    /// Multiplication using omega^2 = d*omega - (d^2 - d)/4.
    pub fn mul(&self, o: &QuadElem, field: &ImagQuadField) -> QuadElem {
        let d = BigRational::from_integer(BigInt::from(field.disc));
        let nm = BigRational::from_integer(BigInt::from(field.omega_norm()));
        let bb = &self.b * &o.b;
        QuadElem::new(
            &self.a * &o.a - &bb * &nm,
            &self.a * &o.b + &self.b * &o.a + &bb * &d,
        )
    }

    /// Complex conjugate: omega-bar = d - omega.
    pub fn conj(&self, field: &ImagQuadField) -> QuadElem {
        let d = BigRational::from_integer(BigInt::from(field.disc));
        QuadElem::new(&self.a + &self.b * &d, -self.b.clone())
    }

    /// Tr_{F/Q} = 2a + b*d.
    pub fn trace(&self, field: &ImagQuadField) -> BigRational {
        let d = BigRational::from_integer(BigInt::from(field.disc));
        &self.a + &self.a + &self.b * &d
    }

    /// The real part: a + b*d/2.
    pub fn real_part(&self, field: &ImagQuadField) -> BigRational {
        self.trace(field) / BigRational::from_integer(BigInt::from(2))
    }

    /// Is this element real (fixed by conjugation)?
    pub fn is_real(&self) -> bool {
        self.b.is_zero()
    }

    pub fn to_complex(&self, field: &ImagQuadField) -> Complex64 {
        let omega = field.omega_complex();
        let a = crate::exact::rational_to_f64(&self.a);
        let b = crate::exact::rational_to_f64(&self.b);
        Complex64::new(a, 0.0) + omega * b
    }
}

fn rat_is_integer(r: &BigRational) -> bool {
    r.denom().is_one() || (-r.denom()).is_one()
}

/// JSON configuration entry a + b*omega with a = re_num/re_den,
/// b = omega_num/omega_den.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GramEntryConfig {
    pub re_num: i64,
    pub re_den: i64,
    pub omega_num: i64,
    pub omega_den: i64,
}

/// JSON configuration for a hermitian lattice.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LatticeConfig {
    pub field_disc: i64,
    pub signature: [u32; 2],
    pub gram: Vec<Vec<GramEntryConfig>>,
}

/// An even hermitian lattice: the standard basis of O_F^n equipped with a
/// hermitian Gram matrix (linear in the first argument, conjugate-linear in
/// the second), of signature (p, q).
#[derive(Debug, Clone)]
pub struct HermitianLattice {
    pub field: ImagQuadField,
    pub rank: usize,
    pub signature: (u32, u32),
    pub gram: Vec<Vec<QuadElem>>,
}

impl HermitianLattice {
    pub fn new(
        field: ImagQuadField,
        signature: (u32, u32),
        gram: Vec<Vec<QuadElem>>,
    ) -> Result<Self, LatticeError> {
        let n = gram.len();
        if n == 0 || gram.iter().any(|row| row.len() != n) {
            return Err(LatticeError::DimensionMismatch(
                "gram matrix must be square and nonempty".to_string(),
            ));
        }
        if (signature.0 + signature.1) as usize != n {
            return Err(LatticeError::SignatureMismatch(
                signature.0, signature.1, signature.0, signature.1,
            ));
        }
        let lat = HermitianLattice {
            field,
            rank: n,
            signature,
            gram,
        };
        lat.validate()?;
        Ok(lat)
    }

    pub fn from_config(cfg: &LatticeConfig) -> Result<Self, LatticeError> {
        let field = ImagQuadField::new(cfg.field_disc)?;
        let mk = |num: i64, den: i64| -> Result<BigRational, LatticeError> {
            if den == 0 {
                return Err(LatticeError::BadConfig("zero denominator".to_string()));
            }
            Ok(BigRational::new(BigInt::from(num), BigInt::from(den)))
        };
        let mut gram = Vec::with_capacity(cfg.gram.len());
        for row in &cfg.gram {
            let mut out = Vec::with_capacity(row.len());
            for e in row {
                out.push(QuadElem::new(
                    mk(e.re_num, e.re_den)?,
                    mk(e.omega_num, e.omega_den)?,
                ));
            }
            gram.push(out);
        }
        HermitianLattice::new(field, (cfg.signature[0], cfg.signature[1]), gram)
    }

    fn validate(&self) -> Result<(), LatticeError> {
        let f = &self.field;
        // Hermitian symmetry.
        for i in 0..self.rank {
            for j in 0..self.rank {
                if self.gram[j][i] != self.gram[i][j].conj(f) {
                    return Err(LatticeError::NotHermitian);
                }
            }
        }
        // Evenness: <x, x> in Z for all lattice vectors. Equivalent to
        // H_ii in Z, Tr(H_ij) in Z, Tr(omega-bar H_ij) in Z.
        for i in 0..self.rank {
            let d = &self.gram[i][i];
            if !d.is_real() || !rat_is_integer(&d.a) {
                return Err(LatticeError::NotIntegral(format!(
                    "diagonal entry ({}, {}) is not a rational integer",
                    i, i
                )));
            }
            for j in 0..self.rank {
                let h = &self.gram[i][j];
                let omega = QuadElem::from_ints(0, 1);
                let t1 = h.trace(f);
                let t2 = omega.conj(f).mul(h, f).trace(f);
                if !rat_is_integer(&t1) || !rat_is_integer(&t2) {
                    return Err(LatticeError::NotIntegral(format!(
                        "pairing of basis vectors ({}, {}) is not integral",
                        i, j
                    )));
                }
            }
        }
        // Signature over R via the realified trace form.
        let t = self.trace_gram_f64();
        let eig = t.symmetric_eigen();
        let pos = eig.eigenvalues.iter().filter(|&&e| e > 1e-9).count();
        let neg = eig.eigenvalues.iter().filter(|&&e| e < -1e-9).count();
        if pos + neg < 2 * self.rank {
            return Err(LatticeError::SingularGram);
        }
        if pos != 2 * self.signature.0 as usize || neg != 2 * self.signature.1 as usize {
            return Err(LatticeError::SignatureMismatch(
                (pos / 2) as u32,
                (neg / 2) as u32,
                self.signature.0,
                self.signature.1,
            ));
        }
        Ok(())
    }

    /// Realified rank over Z: 2n, basis e_1, omega e_1, ..., e_n, omega e_n.
    pub fn real_rank(&self) -> usize {
        2 * self.rank
    }

    /// Interpret realified rational coordinates as field coordinates.
    fn field_coords(&self, c: &[BigRational]) -> Vec<QuadElem> {
        (0..self.rank)
            .map(|i| QuadElem::new(c[2 * i].clone(), c[2 * i + 1].clone()))
            .collect()
    }

    /// The hermitian pairing <x, y> of two realified rational vectors.
    pub fn hermitian_pairing(&self, x: &[BigRational], y: &[BigRational]) -> QuadElem {
        let f = &self.field;
        let xs = self.field_coords(x);
        let ys = self.field_coords(y);
        let mut acc = QuadElem::zero();
        for i in 0..self.rank {
            for j in 0..self.rank {
                let term = xs[i].mul(&ys[j].conj(f), f).mul(&self.gram[i][j], f);
                acc = acc.add(&term);
            }
        }
        acc
    }

    /// The exact hermitian norm <x, x> (a rational number).
    pub fn hermitian_norm(&self, x: &[BigRational]) -> BigRational {
        let v = self.hermitian_pairing(x, x);
        debug_assert!(v.is_real());
        v.a
    }

    /// The Z-valued trace form on the realified basis:
    /// T_{(i,a),(j,b)} = Tr(m_a m_b-bar H_ij), m in {1, omega}.
    pub fn trace_gram(&self) -> Vec<Vec<BigRational>> {
        let f = &self.field;
        let ms = [QuadElem::one(), QuadElem::from_ints(0, 1)];
        let n2 = self.real_rank();
        let mut t = vec![vec![BigRational::zero(); n2]; n2];
        for i in 0..self.rank {
            for a in 0..2 {
                for j in 0..self.rank {
                    for b in 0..2 {
                        let v = ms[a]
                            .mul(&ms[b].conj(f), f)
                            .mul(&self.gram[i][j], f)
                            .trace(f);
                        t[2 * i + a][2 * j + b] = v;
                    }
                }
            }
        }
        t
    }

    pub fn trace_gram_f64(&self) -> DMatrix<f64> {
        let t = self.trace_gram();
        let n2 = self.real_rank();
        DMatrix::from_fn(n2, n2, |i, j| crate::exact::rational_to_f64(&t[i][j]))
    }

    /// Basis of the dual lattice in realified rational coordinates: the
    /// columns of the inverse trace Gram.
    pub fn dual_basis(&self) -> Result<Vec<Vec<BigRational>>, LatticeError> {
        let t = self.trace_gram();
        rational_matrix_inverse(&t)
            .ok_or(LatticeError::SingularGram)
            .map(|inv| {
                let n2 = inv.len();
                (0..n2)
                    .map(|j| (0..n2).map(|i| inv[i][j].clone()).collect())
                    .collect()
            })
    }

    /// |L-sharp / L| = |det(trace Gram)|.
    pub fn discriminant_order(&self) -> BigInt {
        let t = self.trace_gram();
        let det = rational_matrix_determinant(&t);
        debug_assert!(rat_is_integer(&det));
        det.to_integer().abs()
    }

    /// The discriminant group with explicit coset representatives (realified
    /// rational coordinates, entries reduced to [0, 1)) in a deterministic
    /// order, together with elementary divisors from the Smith normal form
    /// of the trace Gram.
    pub fn discriminant_group(&self) -> Result<DiscriminantGroup, LatticeError> {
        let duals = self.dual_basis()?;
        let n2 = self.real_rank();
        let reduce = |v: &[BigRational]| -> Vec<BigRational> {
            v.iter().map(|r| r - r.floor()).collect()
        };
        let mut seen: BTreeSet<Vec<BigRational>> = BTreeSet::new();
        let zero = vec![BigRational::zero(); n2];
        seen.insert(zero.clone());
        let mut queue: VecDeque<Vec<BigRational>> = VecDeque::new();
        queue.push_back(zero);
        while let Some(cur) = queue.pop_front() {
            for g in &duals {
                let next = reduce(
                    &cur.iter()
                        .zip(g.iter())
                        .map(|(a, b)| a + b)
                        .collect::<Vec<_>>(),
                );
                if seen.insert(next.clone()) {
                    queue.push_back(next);
                }
            }
        }
        let reps: Vec<Vec<BigRational>> = seen.into_iter().collect();
        let expected = self.discriminant_order();
        if BigInt::from(reps.len()) != expected {
            return Err(LatticeError::DimensionMismatch(format!(
                "discriminant closure found {} cosets, determinant predicts {}",
                reps.len(),
                expected
            )));
        }
        // Elementary divisors via integer Smith normal form.
        let t = self.trace_gram();
        let mut m: Vec<Vec<i128>> = t
            .iter()
            .map(|row| {
                row.iter()
                    .map(|r| r.to_integer().to_i128().expect("trace gram fits i128"))
                    .collect()
            })
            .collect();
        let divisors = smith_normal_form_divisors(&mut m);
        let norms = reps.iter().map(|h| self.hermitian_norm(h)).collect();
        Ok(DiscriminantGroup {
            order: reps.len(),
            representatives: reps,
            elementary_divisors: divisors,
            norms,
        })
    }

    /// The index of a coset representative inside the deterministic coset
    /// table, identifying first modulo 1.
    pub fn coset_index(&self, group: &DiscriminantGroup, h: &[BigRational]) -> Option<usize> {
        let reduced: Vec<BigRational> = h.iter().map(|r| r - r.floor()).collect();
        group.representatives.iter().position(|r| *r == reduced)
    }

    /// Complex coordinates of a realified rational vector under the fixed
    /// embedding.
    pub fn to_complex_vec(&self, c: &[BigRational]) -> Vec<Complex64> {
        self.field_coords(c)
            .iter()
            .map(|q| q.to_complex(&self.field))
            .collect()
    }
}

/// The discriminant group L-sharp / L.
#[derive(Debug, Clone)]
pub struct DiscriminantGroup {
    pub order: usize,
    /// Coset representatives, realified rational coordinates in [0, 1),
    /// sorted deterministically; index 0 is the zero coset.
    pub representatives: Vec<Vec<BigRational>>,
    /// Nontrivial elementary divisors of the trace Gram.
    pub elementary_divisors: Vec<i128>,
    /// Exact hermitian norms <h, h> of the representatives.
    pub norms: Vec<BigRational>,
}

fn rational_matrix_inverse(m: &[Vec<BigRational>]) -> Option<Vec<Vec<BigRational>>> {
    let n = m.len();
    let mut a: Vec<Vec<BigRational>> = m.to_vec();
    let mut inv: Vec<Vec<BigRational>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    if i == j {
                        BigRational::one()
                    } else {
                        BigRational::zero()
                    }
                })
                .collect()
        })
        .collect();
    for col in 0..n {
        let pivot = (col..n).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, pivot);
        inv.swap(col, pivot);
        let p = a[col][col].clone();
        for j in 0..n {
            a[col][j] = &a[col][j] / &p;
            inv[col][j] = &inv[col][j] / &p;
        }
        for r in 0..n {
            if r != col && !a[r][col].is_zero() {
                let f = a[r][col].clone();
                for j in 0..n {
                    a[r][j] = &a[r][j] - &(&f * &a[col][j]);
                    inv[r][j] = &inv[r][j] - &(&f * &inv[col][j]);
                }
            }
        }
    }
    Some(inv)
}

fn rational_matrix_determinant(m: &[Vec<BigRational>]) -> BigRational {
    let n = m.len();
    let mut a: Vec<Vec<BigRational>> = m.to_vec();
    let mut det = BigRational::one();
    for col in 0..n {
        let pivot = match (col..n).find(|&r| !a[r][col].is_zero()) {
            Some(p) => p,
            None => return BigRational::zero(),
        };
        if pivot != col {
            a.swap(col, pivot);
            det = -det;
        }
        let p = a[col][col].clone();
        det = &det * &p;
        for r in col + 1..n {
            if !a[r][col].is_zero() {
                let f = &a[r][col] / &p;
                for j in col..n {
                    a[r][j] = &a[r][j] - &(&f * &a[col][j]);
                }
            }
        }
    }
    det
}

/// Diagonal of the Smith normal form of an integer matrix, nontrivial
/// entries only (absolute values, ascending divisibility chain).
pub fn smith_normal_form_divisors(m: &mut Vec<Vec<i128>>) -> Vec<i128> {
    let rows = m.len();
    let cols = if rows > 0 { m[0].len() } else { 0 };
    let mut divisors = Vec::new();
    let mut top = 0;
    while top < rows.min(cols) {
        // Find the smallest-magnitude nonzero pivot in the remaining block.
        let mut pivot: Option<(usize, usize)> = None;
        for i in top..rows {
            for j in top..cols {
                if m[i][j] != 0
                    && pivot.map_or(true, |(pi, pj)| m[i][j].abs() < m[pi][pj].abs())
                {
                    pivot = Some((i, j));
                }
            }
        }
        let (pi, pj) = match pivot {
            Some(p) => p,
            None => break,
        };
        m.swap(top, pi);
        for row in m.iter_mut() {
            row.swap(top, pj);
        }
        // Clear the row and column by Euclidean reduction.
        let mut dirty = true;
        while dirty {
            dirty = false;
            for i in top + 1..rows {
                if m[i][top] != 0 {
                    let q = m[i][top].div_euclid(m[top][top]);
                    for j in top..cols {
                        m[i][j] -= q * m[top][j];
                    }
                    if m[i][top] != 0 {
                        m.swap(top, i);
                        dirty = true;
                    }
                }
            }
            for j in top + 1..cols {
                if m[top][j] != 0 {
                    let q = m[top][j].div_euclid(m[top][top]);
                    for row in m.iter_mut().take(rows).skip(top) {
                        row[j] -= q * row[top];
                    }
                    if m[top][j] != 0 {
                        for row in m.iter_mut() {
                            row.swap(top, j);
                        }
                        dirty = true;
                    }
                }
            }
        }
        divisors.push(m[top][top].abs());
        top += 1;
    }
    // Enforce the divisibility chain.
    let k = divisors.len();
    for i in 0..k {
        for j in i + 1..k {
            let (a, b) = (divisors[i], divisors[j]);
            if a != 0 && b % a != 0 {
                let g = gcd_i128(a, b);
                let l = a / g * b;
                divisors[i] = g;
                divisors[j] = l;
            }
        }
    }
    divisors.retain(|&d| d > 1);
    divisors
}

fn gcd_i128(a: i128, b: i128) -> i128 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// A lattice vector found by enumeration: lambda = n + h in realified
/// coordinates, with its exact hermitian norm.
#[derive(Debug, Clone, PartialEq)]
pub struct EnumeratedVector {
    /// The integer part n (lambda = n + h).
    pub coords_int: Vec<i64>,
    /// Full rational coordinates of lambda.
    pub coords: Vec<BigRational>,
    /// Exact hermitian norm <lambda, lambda>.
    pub norm: BigRational,
    /// Value of the majorant at lambda.
    pub majorant_value: f64,
}

/// All lambda in L + h with exact hermitian norm `two_m` and majorant value
/// at most `bound`, in lexicographic order of the integer coordinates.
///
/// `majorant` is a positive-definite symmetric matrix on the realified
/// integer coordinates (the standard majorant of a point of the symmetric
/// space); Fincke-Pohst enumeration under it guarantees completeness even
/// though the hermitian form itself is indefinite.
pub fn enumerate_vectors(
    lattice: &HermitianLattice,
    h: &[BigRational],
    two_m: &BigRational,
    majorant: &DMatrix<f64>,
    bound: f64,
) -> Result<Vec<EnumeratedVector>, LatticeError> {
    enumerate_vectors_sharded(lattice, h, two_m, majorant, bound, 1)
}

/// Sharded variant: the outermost enumeration coordinate is split across
/// `workers` threads; shard outputs are concatenated in fixed shard order,
/// so the result is identical for any worker count.
pub fn enumerate_vectors_sharded(
    lattice: &HermitianLattice,
    h: &[BigRational],
    two_m: &BigRational,
    majorant: &DMatrix<f64>,
    bound: f64,
    workers: usize,
) -> Result<Vec<EnumeratedVector>, LatticeError> {
    enumerate_core(lattice, h, Some(two_m), majorant, bound, workers)
}

/// All lambda in L + h with majorant value at most `bound`, regardless of
/// hermitian norm, in lexicographic order of the integer coordinates.
pub fn enumerate_below_sharded(
    lattice: &HermitianLattice,
    h: &[BigRational],
    majorant: &DMatrix<f64>,
    bound: f64,
    workers: usize,
) -> Result<Vec<EnumeratedVector>, LatticeError> {
    enumerate_core(lattice, h, None, majorant, bound, workers)
}

fn enumerate_core(
    lattice: &HermitianLattice,
    h: &[BigRational],
    two_m: Option<&BigRational>,
    majorant: &DMatrix<f64>,
    bound: f64,
    workers: usize,
) -> Result<Vec<EnumeratedVector>, LatticeError> {
    let n2 = lattice.real_rank();
    if h.len() != n2 || majorant.nrows() != n2 || majorant.ncols() != n2 {
        return Err(LatticeError::DimensionMismatch(format!(
            "expected realified dimension {}",
            n2
        )));
    }
    if bound < 0.0 {
        return Ok(Vec::new());
    }
    let chol = majorant
        .clone()
        .cholesky()
        .ok_or_else(|| LatticeError::BadConfig("majorant is not positive definite".to_string()))?;
    // Upper-triangular factor R with M = R^T R.
    let r = chol.l().transpose();
    let hf: Vec<f64> = h.iter().map(crate::exact::rational_to_f64).collect();
    // Slightly inflated bound to absorb floating-point rounding at the
    // boundary; exactness is restored by the rational norm filter.
    let bound_eff = bound * (1.0 + 1e-9) + 1e-9;

    // Range of the outermost (last) coordinate: R_{kk}^2 (n_k + h_k)^2 <= B.
    let k = n2 - 1;
    let rkk = r[(k, k)];
    let half_width = bound_eff.sqrt() / rkk;
    let lo = (-half_width - hf[k]).floor() as i64;
    let hi = (half_width - hf[k]).ceil() as i64;
    let outer: Vec<i64> = (lo..=hi).collect();

    let workers = workers.max(1);
    let chunk = outer.len().div_ceil(workers.max(1)).max(1);
    let shards: Vec<&[i64]> = outer.chunks(chunk).collect();

    let results: Vec<Vec<Candidate>> = std::thread::scope(|scope| {
        let handles: Vec<_> = shards
            .iter()
            .map(|shard| {
                let r = &r;
                let hf = &hf;
                scope.spawn(move || {
                    let mut found = Vec::new();
                    for &nk in shard.iter() {
                        let mut partial = vec![0.0; n2 + 1];
                        let mut coords = vec![0i64; n2];
                        coords[k] = nk;
                        let xk = nk as f64 + hf[k];
                        let contrib = r[(k, k)] * xk;
                        partial[k] = contrib * contrib;
                        if partial[k] <= bound_eff {
                            descend(
                                r, hf, bound_eff, k, &mut coords, &mut partial, &mut found,
                            );
                        }
                    }
                    found
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("shard")).collect()
    });

    let mut out = Vec::new();
    for shard in results {
        for coords_int in shard {
            let coords: Vec<BigRational> = coords_int
                .coords_int
                .iter()
                .zip(h.iter())
                .map(|(n, hh)| BigRational::from_integer(BigInt::from(*n)) + hh)
                .collect();
            let norm = lattice.hermitian_norm(&coords);
            if two_m.map_or(true, |t| &norm == t) {
                out.push(EnumeratedVector {
                    coords_int: coords_int.coords_int,
                    coords,
                    norm,
                    majorant_value: coords_int.majorant_value,
                });
            }
        }
    }
    out.sort_by(|a, b| a.coords_int.cmp(&b.coords_int));
    Ok(out)
}

/// Candidate from the Fincke-Pohst descent, before the exact norm filter.
struct Candidate {
    coords_int: Vec<i64>,
    majorant_value: f64,
}

/// Recursive Fincke-Pohst descent: coordinates k..n2-1 are fixed; extend
/// downward to coordinate `level - 1`.
fn descend(
    r: &DMatrix<f64>,
    h: &[f64],
    bound: f64,
    level: usize,
    coords: &mut Vec<i64>,
    partial: &mut Vec<f64>,
    found: &mut Vec<Candidate>,
) {
    if level == 0 {
        let total: f64 = partial[..coords.len()].iter().sum();
        found.push(Candidate {
            coords_int: coords.clone(),
            majorant_value: total,
        });
        return;
    }
    let i = level - 1;
    let n2 = coords.len();
    // Row i of R applied to the fixed tail: R_ii x_i + sum_{j>i} R_ij x_j.
    let mut tail = 0.0;
    for j in i + 1..n2 {
        tail += r[(i, j)] * (coords[j] as f64 + h[j]);
    }
    let used: f64 = partial[i + 1..n2].iter().sum();
    let remaining = bound - used;
    if remaining < 0.0 {
        return;
    }
    let rii = r[(i, i)];
    let center = -tail / rii - h[i];
    let half = remaining.sqrt() / rii;
    let lo = (center - half).floor() as i64;
    let hi = (center + half).ceil() as i64;
    for ni in lo..=hi {
        let xi = ni as f64 + h[i];
        let contrib = rii * xi + tail;
        let sq = contrib * contrib;
        if sq <= remaining {
            coords[i] = ni;
            partial[i] = sq;
            descend(r, h, bound, i, coords, partial, found);
        }
    }
    coords[i] = 0;
    partial[i] = 0.0;
}

/// The standard majorant at the base point: from the spectral decomposition
/// of the realified trace form T = Q diag(e) Q^T, the majorant is
/// Q diag(|e|) Q^T.
pub fn base_majorant(lattice: &HermitianLattice) -> DMatrix<f64> {
    let t = lattice.trace_gram_f64();
    let eig = t.symmetric_eigen();
    let abs = DVector::from_iterator(
        eig.eigenvalues.len(),
        eig.eigenvalues.iter().map(|e| e.abs()),
    );
    &eig.eigenvectors * DMatrix::from_diagonal(&abs) * eig.eigenvectors.transpose()
}

/// The finite Weil representation on C[L-sharp / L], or its dual
/// (complex-conjugate) model when `dual` is set.
#[derive(Debug, Clone)]
pub struct WeilRepFinite {
    pub order: usize,
    pub dual: bool,
    /// i^{p-q} / sqrt(order).
    s_front: Complex64,
    /// T phases: <h, h> mod 1 for each coset.
    t_phase: Vec<BigRational>,
    /// Pairing phases Tr<mu, h> mod 1.
    pairing: Vec<Vec<BigRational>>,
}

/// A generator of SL_2(Z).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sl2Gen {
    S,
    T,
}

fn e_of(r: &BigRational) -> Complex64 {
    let x = crate::exact::rational_to_f64(r);
    Complex64::new(0.0, 2.0 * std::f64::consts::PI * x).exp()
}

impl WeilRepFinite {
    pub fn new(
        lattice: &HermitianLattice,
        group: &DiscriminantGroup,
        dual: bool,
    ) -> Result<Self, LatticeError> {
        let n = group.order;
        let (p, q) = lattice.signature;
        let ipq = Complex64::i().powi(p as i32 - q as i32);
        let s_front = ipq / (n as f64).sqrt();
        let reduce1 = |r: &BigRational| -> BigRational { r - r.floor() };
        let t_phase: Vec<BigRational> = group.norms.iter().map(reduce1).collect();
        let mut pairing = vec![vec![BigRational::zero(); n]; n];
        for (i, mu) in group.representatives.iter().enumerate() {
            for (j, h) in group.representatives.iter().enumerate() {
                let tr = lattice.hermitian_pairing(mu, h).trace(&lattice.field);
                pairing[i][j] = reduce1(&tr);
            }
        }
        Ok(WeilRepFinite {
            order: n,
            dual,
            s_front,
            t_phase,
            pairing,
        })
    }

    /// Apply T^n for any integer n; T is diagonal with unit phases, so the
    /// power acts by the n-fold phase directly.
    pub fn apply_t_pow(&self, n: i64, v: &[Complex64]) -> Result<Vec<Complex64>, LatticeError> {
        if v.len() != self.order {
            return Err(LatticeError::DimensionMismatch(format!(
                "expected coefficient vector of length {}",
                self.order
            )));
        }
        let conj_if_dual = |z: Complex64| if self.dual { z.conj() } else { z };
        Ok(v.iter()
            .enumerate()
            .map(|(i, c)| {
                let ph = &self.t_phase[i] * BigRational::from_integer(BigInt::from(n));
                conj_if_dual(e_of(&ph)) * c
            })
            .collect())
    }

    /// Apply a generator to a coefficient vector over the cosets.
    pub fn apply(&self, gen: Sl2Gen, v: &[Complex64]) -> Result<Vec<Complex64>, LatticeError> {
        if v.len() != self.order {
            return Err(LatticeError::DimensionMismatch(format!(
                "expected coefficient vector of length {}",
                self.order
            )));
        }
        let conj_if_dual = |z: Complex64| if self.dual { z.conj() } else { z };
        match gen {
            Sl2Gen::T => Ok(v
                .iter()
                .enumerate()
                .map(|(i, c)| conj_if_dual(e_of(&self.t_phase[i])) * c)
                .collect()),
            Sl2Gen::S => {
                let front = conj_if_dual(self.s_front);
                let mut out = vec![Complex64::new(0.0, 0.0); self.order];
                for (mu, slot) in out.iter_mut().enumerate() {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for (h, c) in v.iter().enumerate() {
                        // e(-Tr<mu, h>) = e(-2 <mu, h>_R).
                        acc += conj_if_dual(e_of(&(-self.pairing[mu][h].clone()))) * c;
                    }
                    *slot = front * acc;
                }
                Ok(out)
            }
        }
    }
}
