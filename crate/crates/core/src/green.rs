//! Numerical evaluation on the hermitian symmetric domain: the standard
//! majorant and the invariant R, the singular form built from the companion
//! Schwartz form (closed form and quadrature), Green forms of Kudla and of
//! Bruinier type, the companion theta series with modularity checks, geodesic
//! asymptotics of the closed-form summands, and Hejhal Poincare series over
//! the finite Weil representation.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::Zero;

use crate::error::{LatticeError, NumericError, SymbolicError};
use crate::exact::rational_to_f64;
use crate::lattice::{
    enumerate_below_sharded, enumerate_vectors_sharded, DiscriminantGroup, HermitianLattice,
    Sl2Gen, WeilRepFinite,
};
use crate::schrodinger::{compute_p, homogeneous_split, GaussianPolynomial};
use crate::special::{gamma_fn, gauss_2f1, inc_gamma_int, whittaker_m, Accumulator, PrecisionPolicy};
use crate::weil::multi_indices;

/// Refusal threshold on R: closer to the cycle than this, evaluation of the
/// singular form reports a singularity instead of a huge unstable value.
pub const EPS_CYCLE: f64 = 1e-9;

type CMat = DMatrix<Complex64>;
type CVec = DVector<Complex64>;

/// A pair of multi-indices in {1..p}^{q-1} labelling one wedge-basis slot.
pub type MultiIndexPair = (Vec<u32>, Vec<u32>);

/// Frame-dependent coefficients of a (q-1, q-1)-form on the wedge basis.
pub type CoeffArray = BTreeMap<MultiIndexPair, Complex64>;

fn lat_err(e: LatticeError) -> NumericError {
    NumericError::InvalidParameter(format!("lattice: {e}"))
}

/// The signature form diag(1_p, -1_q) as a sign vector.
fn h_signs(p: u32, q: u32) -> Vec<f64> {
    let mut s = vec![1.0; (p + q) as usize];
    for e in s.iter_mut().skip(p as usize) {
        *e = -1.0;
    }
    s
}

/// The indefinite hermitian pairing <x, y> = sum_k H_k x_k conj(y_k),
/// linear in the first argument.
fn herm_ip(p: u32, q: u32, x: &CVec, y: &CVec) -> Complex64 {
    let signs = h_signs(p, q);
    let mut acc = Complex64::new(0.0, 0.0);
    for k in 0..(p + q) as usize {
        acc += signs[k] * x[k] * y[k].conj();
    }
    acc
}

/// A point of the symmetric space: a negative-definite q-plane z together
/// with an adapted frame g (unitary for the indefinite form) with g z0 = z.
#[derive(Debug, Clone)]
pub struct DomainPoint {
    pub p: u32,
    pub q: u32,
    /// (p+q) x q matrix whose columns span z.
    pub z_span: CMat,
    /// Frame g: first p columns an orthonormal basis of z-perp (norm +1),
    /// last q columns an orthonormal basis of z (norm -1).
    pub frame: CMat,
}

impl DomainPoint {
    /// The base point z0 = span(v_{p+1}, ..., v_{p+q}).
    pub fn base(p: u32, q: u32) -> Self {
        let m = (p + q) as usize;
        let mut z = CMat::zeros(m, q as usize);
        for j in 0..q as usize {
            z[(p as usize + j, j)] = Complex64::new(1.0, 0.0);
        }
        DomainPoint {
            p,
            q,
            z_span: z,
            frame: CMat::identity(m, m),
        }
    }

    /// The geodesic point a_t . z0 with a_t the hyperbolic rotation by t in
    /// the (v_1, v_{p+q}) plane.
    pub fn geodesic(p: u32, q: u32, t: f64) -> Self {
        let m = (p + q) as usize;
        let mut g = CMat::identity(m, m);
        let (ch, sh) = (t.cosh(), t.sinh());
        g[(0, 0)] = Complex64::new(ch, 0.0);
        g[(0, m - 1)] = Complex64::new(sh, 0.0);
        g[(m - 1, 0)] = Complex64::new(sh, 0.0);
        g[(m - 1, m - 1)] = Complex64::new(ch, 0.0);
        let base = DomainPoint::base(p, q);
        DomainPoint {
            p,
            q,
            z_span: &g * &base.z_span,
            frame: g,
        }
    }

    /// Build the adapted frame for the plane spanned by the columns of
    /// `span` by modified Gram-Schmidt against the indefinite form: the
    /// z-columns are orthonormalized (norm -1), then the orthogonal
    /// complement is extracted from the standard basis with deterministic
    /// pivoting on the largest remaining positive norm.
    ///
    /// The coefficient arrays produced against this frame are
    /// frame-dependent (they transform under the stabilizer of the point by
    /// the wedge-basis action); the scalars R, the majorant, and all tail
    /// bounds are frame-free.
    pub fn from_span(p: u32, q: u32, span: &CMat) -> Result<Self, NumericError> {
        let m = (p + q) as usize;
        if span.nrows() != m || span.ncols() != q as usize {
            return Err(NumericError::InvalidParameter(format!(
                "span must be {m} x {q}"
            )));
        }
        // Orthonormalize the negative plane.
        let mut w: Vec<CVec> = Vec::with_capacity(q as usize);
        for j in 0..q as usize {
            let mut x: CVec = span.column(j).into();
            for wi in &w {
                // <w_i, w_i> = -1, so the projection is -<x, w_i> w_i.
                let c = herm_ip(p, q, &x, wi);
                x += wi * c;
            }
            let n = herm_ip(p, q, &x, &x).re;
            if n >= -1e-12 {
                return Err(NumericError::InvalidParameter(
                    "span is not negative definite for the hermitian form".to_string(),
                ));
            }
            w.push(x / Complex64::new((-n).sqrt(), 0.0));
        }
        // Candidates for z-perp: the standard basis projected off z.
        let mut cands: Vec<CVec> = (0..m)
            .map(|k| {
                let mut e = CVec::zeros(m);
                e[k] = Complex64::new(1.0, 0.0);
                for wi in &w {
                    let c = herm_ip(p, q, &e, wi);
                    e += wi * c;
                }
                e
            })
            .collect();
        let mut u: Vec<CVec> = Vec::with_capacity(p as usize);
        for _ in 0..p {
            // Deterministic pivot: largest remaining positive norm; ties
            // break toward the lower candidate index.
            let (best, norm) = cands
                .iter()
                .enumerate()
                .map(|(i, x)| (i, herm_ip(p, q, x, x).re))
                .fold((usize::MAX, f64::NEG_INFINITY), |acc, (i, n)| {
                    if n > acc.1 + 1e-14 {
                        (i, n)
                    } else {
                        acc
                    }
                });
            if norm <= 1e-12 {
                return Err(NumericError::InvalidParameter(
                    "could not complete a positive-definite complement".to_string(),
                ));
            }
            let x = cands[best].clone() / Complex64::new(norm.sqrt(), 0.0);
            for c in cands.iter_mut() {
                let pr = herm_ip(p, q, c, &x);
                *c -= &x * pr;
            }
            u.push(x);
        }
        let mut g = CMat::zeros(m, m);
        for (j, col) in u.iter().chain(w.iter()).enumerate() {
            g.set_column(j, col);
        }
        let point = DomainPoint {
            p,
            q,
            z_span: span.clone(),
            frame: g,
        };
        point.validate()?;
        Ok(point)
    }

    /// Check the frame invariants: g* H g = H and the span is negative
    /// definite, both to 1e-10.
    pub fn validate(&self) -> Result<(), NumericError> {
        let (p, q) = (self.p, self.q);
        let m = (p + q) as usize;
        let signs = h_signs(p, q);
        let mut defect: f64 = 0.0;
        for i in 0..m {
            for j in 0..m {
                let mut acc = Complex64::new(0.0, 0.0);
                for k in 0..m {
                    acc += self.frame[(k, i)].conj() * signs[k] * self.frame[(k, j)];
                }
                let target = if i == j { signs[i] } else { 0.0 };
                defect = defect.max((acc - target).norm());
            }
        }
        if defect > 1e-10 {
            return Err(NumericError::InvalidParameter(format!(
                "frame is not H-unitary (defect {defect:.3e})"
            )));
        }
        for j in 0..q as usize {
            let col: CVec = self.z_span.column(j).into();
            if herm_ip(p, q, &col, &col).re >= 0.0 {
                return Err(NumericError::InvalidParameter(
                    "span column has nonnegative norm".to_string(),
                ));
            }
        }
        Ok(())
    }

    /// Pull a vector back to the base frame: g^{-1} x = H g* H x.
    pub fn pullback(&self, x: &CVec) -> CVec {
        let (p, q) = (self.p, self.q);
        let m = (p + q) as usize;
        let signs = h_signs(p, q);
        let mut y = CVec::zeros(m);
        for i in 0..m {
            let mut acc = Complex64::new(0.0, 0.0);
            for k in 0..m {
                acc += signs[i] * self.frame[(k, i)].conj() * signs[k] * x[k];
            }
            y[i] = acc;
        }
        y
    }
}

/// R(x, z) = -<x_z, x_z>: the norm of the projection onto the negative
/// plane, nonnegative, zero exactly when x is orthogonal to z.
pub fn big_r(x: &CVec, z: &DomainPoint) -> f64 {
    let y = z.pullback(x);
    let (p, q) = (z.p, z.q);
    (p as usize..(p + q) as usize).map(|k| y[k].norm_sqr()).sum()
}

/// The standard majorant <x, x>_z = <x, x> + 2 R(x, z).
pub fn majorant(x: &CVec, z: &DomainPoint) -> f64 {
    let y = z.pullback(x);
    (0..(z.p + z.q) as usize).map(|k| y[k].norm_sqr()).sum()
}

/// Evaluate a polynomial-times-Gaussian coefficient polynomial at complex
/// positive coordinates (the Gaussian factor excluded).
pub fn eval_gaussian_poly(poly: &GaussianPolynomial, zpos: &[Complex64]) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for (mono, c) in &poly.terms {
        let (re, im) = c.to_complex_f64();
        let mut term = Complex64::new(re, im);
        for (&(alpha, barred), &e) in &mono.0 {
            let base = zpos[(alpha - 1) as usize];
            let base = if barred { base.conj() } else { base };
            term *= base.powi(e as i32);
        }
        acc += term;
    }
    acc
}

/// The exact coefficient polynomials for signature (p, q), stored as
/// homogeneous pieces of degree 2l, l = 0..q-1, per multi-index pair.
#[derive(Debug, Clone)]
pub struct PolyTable {
    pub p: u32,
    pub q: u32,
    pieces: BTreeMap<MultiIndexPair, Vec<(u32, GaussianPolynomial)>>,
}

impl PolyTable {
    pub fn new(p: u32, q: u32) -> Result<Self, SymbolicError> {
        let idx = multi_indices(p, (q - 1) as usize);
        let mut pieces = BTreeMap::new();
        for alphas in &idx {
            for betas in &idx {
                let poly = compute_p(p, q, alphas, betas)?;
                let split = homogeneous_split(&poly)
                    .into_iter()
                    .map(|(d, piece)| {
                        debug_assert!(d % 2 == 0);
                        (d / 2, piece)
                    })
                    .collect();
                pieces.insert((alphas.clone(), betas.clone()), split);
            }
        }
        Ok(PolyTable { p, q, pieces })
    }

    /// All multi-index pairs, in the deterministic key order.
    pub fn index_pairs(&self) -> Vec<MultiIndexPair> {
        self.pieces.keys().cloned().collect()
    }

    /// Evaluate the full polynomial for one pair.
    pub fn eval_full(&self, key: &MultiIndexPair, zpos: &[Complex64]) -> Complex64 {
        self.pieces[key]
            .iter()
            .map(|(_, piece)| eval_gaussian_poly(piece, zpos))
            .sum()
    }

    /// Evaluate the homogeneous piece of weight 2l for one pair.
    pub fn eval_piece(&self, key: &MultiIndexPair, l: u32, zpos: &[Complex64]) -> Complex64 {
        self.pieces[key]
            .iter()
            .find(|(d, _)| *d == l)
            .map(|(_, piece)| eval_gaussian_poly(piece, zpos))
            .unwrap_or_else(|| Complex64::new(0.0, 0.0))
    }

    /// Sum of coefficient magnitudes over all pairs and pieces; a crude
    /// amplitude for tail bounds.
    pub fn amplitude(&self) -> f64 {
        self.pieces
            .values()
            .flat_map(|v| v.iter())
            .flat_map(|(_, piece)| piece.terms.values())
            .map(|c| {
                let (re, im) = c.to_complex_f64();
                (re * re + im * im).sqrt()
            })
            .sum()
    }
}

/// The scalar front constant 2i (-1)^{q-1} / 2^{2(q-1)} of the companion
/// form.
pub fn psi_front(q: u32) -> Complex64 {
    let sign = if (q - 1) % 2 == 0 { 1.0 } else { -1.0 };
    Complex64::new(0.0, 2.0 * sign / f64::powi(4.0, (q - 1) as i32))
}

/// The companion Gaussian form at (x, z): front * P(y) e^{-2 pi R} per
/// wedge slot, with y the pullback of x to the base frame.
pub fn psi0_eval(x: &CVec, z: &DomainPoint, table: &PolyTable) -> CoeffArray {
    let y = z.pullback(x);
    let zpos: Vec<Complex64> = (0..z.p as usize).map(|k| y[k]).collect();
    let r: f64 = (z.p as usize..(z.p + z.q) as usize)
        .map(|k| y[k].norm_sqr())
        .sum();
    let damp = (-2.0 * PI * r).exp();
    let front = psi_front(z.q);
    table
        .index_pairs()
        .into_iter()
        .map(|key| {
            let v = front * table.eval_full(&key, &zpos) * damp;
            (key, v)
        })
        .collect()
}

/// The singular form at (x, z) by the closed form
///   - front * sum_l P_{;2l}(y) (2 pi R)^{-l} Gamma(l, 2 pi R),
/// valid for x != 0 off the cycle (R > 0).
pub fn psi0_singular(
    x: &CVec,
    z: &DomainPoint,
    table: &PolyTable,
    policy: &PrecisionPolicy,
) -> Result<CoeffArray, NumericError> {
    let y = z.pullback(x);
    let zpos: Vec<Complex64> = (0..z.p as usize).map(|k| y[k]).collect();
    let r: f64 = (z.p as usize..(z.p + z.q) as usize)
        .map(|k| y[k].norm_sqr())
        .sum();
    if r < EPS_CYCLE {
        return Err(NumericError::Singularity(format!(
            "R = {r:.3e} below the cycle-proximity threshold {EPS_CYCLE:.0e}"
        )));
    }
    let front = psi_front(z.q);
    let tpr = 2.0 * PI * r;
    let mut out = CoeffArray::new();
    for key in table.index_pairs() {
        let mut acc = Complex64::new(0.0, 0.0);
        for l in 0..z.q {
            let piece = table.eval_piece(&key, l, &zpos);
            if piece.norm() == 0.0 {
                continue;
            }
            let g = inc_gamma_int(l, tpr, policy)?;
            acc += piece * tpr.powi(-(l as i32)) * g;
        }
        out.insert(key, -front * acc);
    }
    Ok(out)
}

/// Gauss-Legendre nodes and weights on [-1, 1] by Newton iteration.
fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut xs = vec![0.0; n];
    let mut ws = vec![0.0; n];
    for i in 0..n {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let kf = k as f64;
                let pk = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = pk;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        xs[i] = x;
        ws[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    (xs, ws)
}

/// The singular form by its defining integral
///   - int_1^infty psi0(sqrt(t) x, z) dt / t,
/// evaluated with composite Gauss-Legendre on a logarithmic scale. This is
/// the independent oracle for the closed form.
pub fn psi0_singular_quadrature(
    x: &CVec,
    z: &DomainPoint,
    table: &PolyTable,
) -> Result<CoeffArray, NumericError> {
    let r = big_r(x, z);
    if r < EPS_CYCLE {
        return Err(NumericError::Singularity(format!(
            "R = {r:.3e} below the cycle-proximity threshold {EPS_CYCLE:.0e}"
        )));
    }
    // Substitute t = e^s; the integrand decays like exp(-2 pi R e^s).
    let upper = (45.0 / (2.0 * PI * r)).max(2.0).ln();
    let panels = 48usize;
    let (nodes, weights) = gauss_legendre(16);
    let mut out: BTreeMap<MultiIndexPair, (Accumulator, Accumulator)> = table
        .index_pairs()
        .into_iter()
        .map(|k| (k, (Accumulator::new(), Accumulator::new())))
        .collect();
    let width = upper / panels as f64;
    for j in 0..panels {
        let a = j as f64 * width;
        for (xi, wi) in nodes.iter().zip(weights.iter()) {
            let s = a + width * 0.5 * (xi + 1.0);
            let scale = Complex64::new((s / 2.0).exp(), 0.0);
            let arr = psi0_eval(&(x * scale), z, table);
            let w = wi * width * 0.5;
            for (key, v) in arr {
                let slot = out.get_mut(&key).expect("key set is fixed");
                slot.0.add(-w * v.re);
                slot.1.add(-w * v.im);
            }
        }
    }
    Ok(out
        .into_iter()
        .map(|(k, (re, im))| (k, Complex64::new(re.value(), im.value())))
        .collect())
}

/// Max-norm of a coefficient array.
pub fn coeff_norm(a: &CoeffArray) -> f64 {
    a.values().map(|v| v.norm()).fold(0.0, f64::max)
}

/// Entrywise difference max-norm.
pub fn coeff_distance(a: &CoeffArray, b: &CoeffArray) -> f64 {
    let mut d: f64 = 0.0;
    for (k, v) in a {
        let w = b.get(k).copied().unwrap_or_else(|| Complex64::new(0.0, 0.0));
        d = d.max((v - w).norm());
    }
    for (k, w) in b {
        if !a.contains_key(k) {
            d = d.max(w.norm());
        }
    }
    d
}

/// The reality defect of a coefficient array from the companion family:
/// the front constant is purely imaginary, the coefficient polynomials are
/// conjugate-symmetric under the slot swap (alphas <-> betas), and the
/// radial factors are real, so every such array obeys
/// c(a; b) = -conj(c(b; a)). Returns the max deviation.
pub fn hermitian_symmetry_defect(coeffs: &CoeffArray) -> f64 {
    let mut d: f64 = 0.0;
    for ((al, be), v) in coeffs {
        let partner = coeffs
            .get(&(be.clone(), al.clone()))
            .copied()
            .unwrap_or_else(|| Complex64::new(0.0, 0.0));
        d = d.max((v + partner.conj()).norm());
    }
    d
}

/// A truncated lattice-sum value with its truncation metadata.
#[derive(Debug, Clone)]
pub struct GreenValue {
    pub coeffs: CoeffArray,
    pub truncation_bound: f64,
    pub tail_estimate: f64,
    pub lattice_vector_count: usize,
}

/// The complex embedding of a hermitian lattice into the standard
/// indefinite space diag(1_p, -1_q), from the spectral decomposition of the
/// (conjugated) gram matrix.
#[derive(Debug, Clone)]
pub struct LatticeEmbedding {
    pub p: u32,
    pub q: u32,
    e: CMat,
}

impl LatticeEmbedding {
    pub fn new(lattice: &HermitianLattice) -> Result<Self, NumericError> {
        let (p, q) = lattice.signature;
        let n = lattice.gram.len();
        let m = (p + q) as usize;
        if m != n {
            return Err(NumericError::InvalidParameter(
                "embedding requires a nondegenerate full-rank gram".to_string(),
            ));
        }
        // The pairing is linear in the first slot, so the standard-space
        // pairing matches conj(G): diagonalize that.
        let gc = CMat::from_fn(n, n, |i, j| {
            lattice.gram[i][j].to_complex(&lattice.field).conj()
        });
        let eig = gc.clone().symmetric_eigen();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| {
            eig.eigenvalues[b]
                .partial_cmp(&eig.eigenvalues[a])
                .expect("finite eigenvalues")
        });
        let pos = order.iter().filter(|&&i| eig.eigenvalues[i] > 0.0).count();
        if pos != p as usize {
            return Err(NumericError::InvalidParameter(format!(
                "gram has {pos} positive eigenvalues, signature says {p}"
            )));
        }
        let mut e = CMat::zeros(m, n);
        for (row, &idx) in order.iter().enumerate() {
            let scale = eig.eigenvalues[idx].abs().sqrt();
            for col in 0..n {
                e[(row, col)] = eig.eigenvectors[(col, idx)].conj() * scale;
            }
        }
        Ok(LatticeEmbedding { p, q, e })
    }

    /// Embed realified rational lattice coordinates into the standard space.
    pub fn embed(&self, lattice: &HermitianLattice, coords: &[BigRational]) -> CVec {
        let xc = lattice.to_complex_vec(coords);
        let n = xc.len();
        let m = (self.p + self.q) as usize;
        let mut out = CVec::zeros(m);
        for k in 0..m {
            let mut acc = Complex64::new(0.0, 0.0);
            for (j, xj) in xc.iter().enumerate().take(n) {
                acc += self.e[(k, j)] * xj;
            }
            out[k] = acc;
        }
        out
    }

    /// The realified positive-definite majorant matrix at z, on the integer
    /// coordinate order (e_1, omega e_1, e_2, omega e_2, ...), normalized so
    /// that the quadratic form equals <x, x> + 2 R(x, z).
    pub fn realified_majorant(&self, lattice: &HermitianLattice, z: &DomainPoint) -> DMatrix<f64> {
        let n = lattice.gram.len();
        let m = (self.p + self.q) as usize;
        // Columns of g^{-1} E: the pullback of each embedded basis vector.
        let cols: Vec<CVec> = (0..n)
            .map(|j| {
                let col: CVec = self.e.column(j).into();
                z.pullback(&col)
            })
            .collect();
        // A_ij = sum_k conj(col_i)_k (col_j)_k (positive-definite hermitian).
        let mut a = CMat::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                let mut acc = Complex64::new(0.0, 0.0);
                for k in 0..m {
                    acc += cols[i][k].conj() * cols[j][k];
                }
                a[(i, j)] = acc;
            }
        }
        let omega = lattice.field.omega_complex();
        let ms = [Complex64::new(1.0, 0.0), omega];
        let n2 = 2 * n;
        DMatrix::from_fn(n2, n2, |r, c| {
            let (i, ai) = (r / 2, r % 2);
            let (j, bj) = (c / 2, c % 2);
            (ms[ai].conj() * ms[bj] * a[(i, j)]).re
        })
    }
}

/// Crude but conservative tail bound for a truncated lattice sum whose
/// omitted terms at majorant value t are bounded by
/// amp * (1 + t)^deg * exp(-rate * t): the point count below t is estimated
/// from the observed density, and the integral over [bound, infinity) is
/// evaluated with incomplete Gammas.
fn gaussian_tail(
    count: usize,
    bound: f64,
    rate: f64,
    deg: u32,
    amp: f64,
    policy: &PrecisionPolicy,
) -> Result<f64, NumericError> {
    let density = 8.0 * (count as f64 + 1.0) / bound.max(1.0);
    let mut total = 0.0;
    let mut binom = 1.0;
    for j in 0..=deg {
        if j > 0 {
            binom *= (deg - j + 1) as f64 / j as f64;
        }
        let g = inc_gamma_int(j + 1, rate * bound, policy)?;
        total += binom * g / rate.powi(j as i32 + 1);
    }
    Ok(amp * density * total)
}

/// Options for the Kudla-type Green form: the alternate normalization with
/// the extra factor exp(-2 pi m w), and the logarithmic term at (m, h) =
/// (0, 0).
#[derive(Debug, Clone, Copy, Default)]
pub struct KudlaFlags {
    pub exp_factor: bool,
    pub log_term: bool,
}

/// The Kudla-type Green form: the sum of the singular form over the
/// nonzero lattice vectors of norm 2m in the coset h, scaled by sqrt(w),
/// truncated at majorant value `bound`.
#[allow(clippy::too_many_arguments)]
pub fn xi_kudla(
    lattice: &HermitianLattice,
    emb: &LatticeEmbedding,
    table: &PolyTable,
    h: &[BigRational],
    two_m: &BigRational,
    w: f64,
    z: &DomainPoint,
    bound: f64,
    workers: usize,
    flags: KudlaFlags,
    policy: &PrecisionPolicy,
) -> Result<GreenValue, NumericError> {
    if w <= 0.0 {
        return Err(NumericError::InvalidParameter(format!(
            "w must be positive, got {w}"
        )));
    }
    let m_f = rational_to_f64(two_m) / 2.0;
    let maj = emb.realified_majorant(lattice, z);
    let vectors =
        enumerate_vectors_sharded(lattice, h, two_m, &maj, bound, workers).map_err(lat_err)?;
    let mut acc: BTreeMap<MultiIndexPair, (Accumulator, Accumulator)> = table
        .index_pairs()
        .into_iter()
        .map(|k| (k, (Accumulator::new(), Accumulator::new())))
        .collect();
    let mut used = 0usize;
    let sqrt_w = Complex64::new(w.sqrt(), 0.0);
    for vec in &vectors {
        if vec.coords.iter().all(|c| c.is_zero()) {
            continue;
        }
        let xe = emb.embed(lattice, &vec.coords);
        let r = big_r(&xe, z);
        if r < EPS_CYCLE {
            return Err(NumericError::Singularity(format!(
                "lattice vector on the cycle: R = {r:.3e}"
            )));
        }
        let arr = psi0_singular(&(&xe * sqrt_w), z, table, policy)?;
        for (key, v) in arr {
            let slot = acc.get_mut(&key).expect("key set is fixed");
            slot.0.add(v.re);
            slot.1.add(v.im);
        }
        used += 1;
    }
    let mut coeffs: CoeffArray = acc
        .into_iter()
        .map(|(k, (re, im))| (k, Complex64::new(re.value(), im.value())))
        .collect();
    if flags.log_term && two_m.is_zero() && h.iter().all(|c| c.is_zero()) {
        // -psi0(0) log(w) on the constant block.
        let zero = CVec::zeros((z.p + z.q) as usize);
        let at_zero = psi0_eval(&zero, z, table);
        for (key, v) in at_zero {
            *coeffs.entry(key).or_insert_with(|| Complex64::new(0.0, 0.0)) -= v * w.ln();
        }
    }
    if flags.exp_factor {
        let factor = (-2.0 * PI * m_f * w).exp();
        for v in coeffs.values_mut() {
            *v *= factor;
        }
    }
    let amp = psi_front(z.q).norm() * table.amplitude() * (1.0 + w).powi(z.q as i32 - 1)
        * (PI * w * 2.0 * m_f).exp();
    let tail = gaussian_tail(
        used,
        bound,
        PI * w,
        (z.q - 1) + lattice.real_rank() as u32,
        amp,
        policy,
    )?;
    Ok(GreenValue {
        coeffs,
        truncation_bound: bound,
        tail_estimate: tail,
        lattice_vector_count: used,
    })
}

/// The companion theta series at (tau, z): per-coset coefficient blocks with
/// modular metadata.
#[derive(Debug, Clone)]
pub struct ThetaValue {
    pub blocks: Vec<CoeffArray>,
    pub tau: (f64, f64),
    /// Modular weight p + q - 2.
    pub weight: i64,
    pub truncation_bound: f64,
    pub tail_estimate: f64,
    pub terms: usize,
}

/// The companion theta series
///   Theta(tau, z) = v sum_h sum_{lambda in h + L}
///     P(sqrt(v) lambda, z) e^{-2 pi v <lambda,lambda>_z
///                             + 2 pi i u <lambda,lambda>} e_h,
/// truncated over majorant <= bound / v.
#[allow(clippy::too_many_arguments)]
pub fn theta_psi(
    lattice: &HermitianLattice,
    emb: &LatticeEmbedding,
    table: &PolyTable,
    group: &DiscriminantGroup,
    tau: (f64, f64),
    z: &DomainPoint,
    bound: f64,
    workers: usize,
    policy: &PrecisionPolicy,
) -> Result<ThetaValue, NumericError> {
    let (u, v) = tau;
    if v <= 0.0 {
        return Err(NumericError::InvalidParameter(format!(
            "Im(tau) must be positive, got {v}"
        )));
    }
    let maj = emb.realified_majorant(lattice, z);
    let front = psi_front(z.q);
    let sqrt_v = Complex64::new(v.sqrt(), 0.0);
    let mut blocks = Vec::with_capacity(group.order);
    let mut terms = 0usize;
    for rep in &group.representatives {
        let vectors =
            enumerate_below_sharded(lattice, rep, &maj, bound / v, workers).map_err(lat_err)?;
        let mut acc: BTreeMap<MultiIndexPair, (Accumulator, Accumulator)> = table
            .index_pairs()
            .into_iter()
            .map(|k| (k, (Accumulator::new(), Accumulator::new())))
            .collect();
        for vec in &vectors {
            let xe = emb.embed(lattice, &vec.coords);
            let y = z.pullback(&xe);
            let maj_v: f64 = (0..(z.p + z.q) as usize).map(|k| y[k].norm_sqr()).sum();
            let norm_f = rational_to_f64(&vec.norm);
            let zpos: Vec<Complex64> = (0..z.p as usize).map(|k| y[k] * sqrt_v).collect();
            let phase = Complex64::new(0.0, 2.0 * PI * u * norm_f).exp();
            let damp = (-2.0 * PI * v * maj_v).exp();
            for key in table.index_pairs() {
                let val = v * front * table.eval_full(&key, &zpos) * damp * phase;
                let slot = acc.get_mut(&key).expect("key set is fixed");
                slot.0.add(val.re);
                slot.1.add(val.im);
            }
            terms += 1;
        }
        blocks.push(
            acc.into_iter()
                .map(|(k, (re, im))| (k, Complex64::new(re.value(), im.value())))
                .collect(),
        );
    }
    let amp = v * front.norm() * table.amplitude() * (1.0 + v).powi(z.q as i32 - 1);
    let tail = gaussian_tail(
        terms,
        bound / v,
        PI * v,
        (z.q - 1) + lattice.real_rank() as u32,
        amp,
        policy,
    )?;
    Ok(ThetaValue {
        blocks,
        tau,
        weight: (z.p + z.q) as i64 - 2,
        truncation_bound: bound,
        tail_estimate: tail,
        terms,
    })
}

/// Apply a finite Weil-representation generator across the coset blocks of
/// a theta-like value, entrywise in the coefficient keys.
pub fn apply_weil_to_blocks(
    weil: &WeilRepFinite,
    gen: Sl2Gen,
    blocks: &[CoeffArray],
) -> Result<Vec<CoeffArray>, NumericError> {
    let mut keys: Vec<MultiIndexPair> = Vec::new();
    for b in blocks {
        for k in b.keys() {
            if !keys.contains(k) {
                keys.push(k.clone());
            }
        }
    }
    keys.sort();
    let mut out = vec![CoeffArray::new(); blocks.len()];
    for key in &keys {
        let v: Vec<Complex64> = blocks
            .iter()
            .map(|b| b.get(key).copied().unwrap_or_else(|| Complex64::new(0.0, 0.0)))
            .collect();
        let w = weil.apply(gen, &v).map_err(lat_err)?;
        for (i, val) in w.into_iter().enumerate() {
            out[i].insert(key.clone(), val);
        }
    }
    Ok(out)
}

/// One closed-form summand of the Bruinier-type Green form, for a lattice
/// vector with pullback y and norm 2m: front and wedge constants included.
pub fn bruinier_term(
    table: &PolyTable,
    y: &CVec,
    two_m_f: f64,
    s: f64,
    policy: &PrecisionPolicy,
) -> Result<CoeffArray, NumericError> {
    let (p, q) = (table.p, table.q);
    let k = 2.0 - (p + q) as f64;
    let smk = s - k / 2.0;
    let m_f = two_m_f / 2.0;
    let r: f64 = (p as usize..(p + q) as usize).map(|i| y[i].norm_sqr()).sum();
    if r < EPS_CYCLE {
        return Err(NumericError::Singularity(format!(
            "lattice vector on the cycle: R = {r:.3e}"
        )));
    }
    let perp = two_m_f + r;
    let arg = 2.0 * m_f / perp;
    let zpos: Vec<Complex64> = (0..p as usize).map(|i| y[i]).collect();
    let global = (4.0 * PI * m_f.abs()).powf(smk) / (2.0 * gamma_fn(2.0 * s)?);
    let front = psi_front(q);
    let mut out = CoeffArray::new();
    for key in table.index_pairs() {
        let mut acc = Complex64::new(0.0, 0.0);
        for l in 0..q {
            let piece = table.eval_piece(&key, l, &zpos);
            if piece.norm() == 0.0 {
                continue;
            }
            let lf = l as f64;
            let gamma = gamma_fn(smk + lf)?;
            let hyp = gauss_2f1(smk + lf, s + k / 2.0, 2.0 * s, arg, policy)?;
            acc += piece * gamma / (2.0 * PI * perp).powf(smk + lf) * hyp;
        }
        out.insert(key, front * global * acc);
    }
    Ok(out)
}

/// The Bruinier-type Green form by the closed formula: the lattice sum of
/// `bruinier_term` over vectors of norm 2m > 0 in the coset h, truncated at
/// majorant value `bound`. Requires s strictly inside the convergence range
/// s > 1 + (p + q)/2.
#[allow(clippy::too_many_arguments)]
pub fn green_bruinier_closed(
    lattice: &HermitianLattice,
    emb: &LatticeEmbedding,
    table: &PolyTable,
    h: &[BigRational],
    two_m: &BigRational,
    s: f64,
    z: &DomainPoint,
    bound: f64,
    workers: usize,
    policy: &PrecisionPolicy,
) -> Result<GreenValue, NumericError> {
    let (p, q) = (table.p, table.q);
    let two_m_f = rational_to_f64(two_m);
    if two_m_f <= 0.0 {
        return Err(NumericError::InvalidParameter(format!(
            "requires m > 0, got 2m = {two_m_f}"
        )));
    }
    let s_min = 1.0 + (p + q) as f64 / 2.0;
    if s <= s_min {
        return Err(NumericError::InvalidParameter(format!(
            "s = {s} outside the convergence range: requires s > {s_min}"
        )));
    }
    let maj = emb.realified_majorant(lattice, z);
    let vectors =
        enumerate_vectors_sharded(lattice, h, two_m, &maj, bound, workers).map_err(lat_err)?;
    let mut acc: BTreeMap<MultiIndexPair, (Accumulator, Accumulator)> = table
        .index_pairs()
        .into_iter()
        .map(|k| (k, (Accumulator::new(), Accumulator::new())))
        .collect();
    let mut used = 0usize;
    for vec in &vectors {
        let xe = emb.embed(lattice, &vec.coords);
        let y = z.pullback(&xe);
        let term = bruinier_term(table, &y, two_m_f, s, policy)?;
        for (key, v) in term {
            let slot = acc.get_mut(&key).expect("key set is fixed");
            slot.0.add(v.re);
            slot.1.add(v.im);
        }
        used += 1;
    }
    let coeffs: CoeffArray = acc
        .into_iter()
        .map(|(k, (re, im))| (k, Complex64::new(re.value(), im.value())))
        .collect();
    // Omitted terms decay polynomially like t^{-(s - k/2)} with a
    // polynomial amplitude: integrate the density-weighted envelope.
    let k_wt = 2.0 - (p + q) as f64;
    let smk = s - k_wt / 2.0;
    // Vectors of a fixed norm with majorant <= t grow like t^{rank/2 - 1};
    // the polynomial factor adds t^{q-1}.
    let deg = (q - 1) as f64 + (lattice.real_rank() as f64 / 2.0 - 1.0);
    let slope = smk - deg;
    let amp = psi_front(q).norm() * table.amplitude()
        * (4.0 * PI * two_m_f / 2.0).powf(smk)
        * gamma_fn(smk + (q - 1) as f64)?
        / (2.0 * gamma_fn(2.0 * s)?);
    let density = 8.0 * (used as f64 + 1.0) / bound.max(1.0);
    let tail = if slope > 1.0 {
        amp * density * (2.0 * PI).powf(-smk) * bound.powf(1.0 - slope) / (slope - 1.0)
    } else {
        f64::INFINITY
    };
    Ok(GreenValue {
        coeffs,
        truncation_bound: bound,
        tail_estimate: tail,
        lattice_vector_count: used,
    })
}

/// The geodesic summand of the Bruinier-type Green form for lambda =
/// sqrt(2m) v_1 at the geodesic point a_t: all three displayed equivalent
/// expressions are evaluated (raw, homogeneity-simplified, and
/// Euler-transformed) and mutual agreement to 1e-9 is asserted; the
/// Euler-transformed expression (stable as t -> 0) is returned.
pub fn phi_s_summand(
    table: &PolyTable,
    m: f64,
    s: f64,
    t: f64,
    policy: &PrecisionPolicy,
) -> Result<CoeffArray, NumericError> {
    let (p, q) = (table.p, table.q);
    if m <= 0.0 || t <= 0.0 {
        return Err(NumericError::InvalidParameter(format!(
            "requires m > 0 and t > 0, got m = {m}, t = {t}"
        )));
    }
    let k = 2.0 - (p + q) as f64;
    let smk = s - k / 2.0;
    let ch = t.cosh();
    let sh = t.sinh();
    let sech2 = 1.0 / (ch * ch);
    let front = psi_front(q) / (2.0 * gamma_fn(2.0 * s)?);
    let mut e1_scaled = vec![Complex64::new(0.0, 0.0); p as usize];
    e1_scaled[0] = Complex64::new((2.0 * m).sqrt() * ch, 0.0);
    let mut e1 = vec![Complex64::new(0.0, 0.0); p as usize];
    e1[0] = Complex64::new(1.0, 0.0);
    let mut raw = CoeffArray::new();
    let mut simplified = CoeffArray::new();
    let mut euler = CoeffArray::new();
    for key in table.index_pairs() {
        let mut acc_a = Complex64::new(0.0, 0.0);
        let mut acc_b = Complex64::new(0.0, 0.0);
        let mut acc_c = Complex64::new(0.0, 0.0);
        for l in 0..q {
            let lf = l as f64;
            let gamma = gamma_fn(smk + lf)?;
            let hyp_direct = gauss_2f1(smk + lf, s + k / 2.0, 2.0 * s, sech2, policy)?;
            let hyp_euler = gauss_2f1(s + k / 2.0 - lf, smk, 2.0 * s, sech2, policy)?;
            let piece_scaled = table.eval_piece(&key, l, &e1_scaled);
            let piece_unit = table.eval_piece(&key, l, &e1);
            acc_a += piece_scaled * gamma
                / ((4.0 * PI * m).powf(lf) * ch.powf(2.0 * s - k + 2.0 * lf))
                * hyp_direct;
            acc_b += piece_unit * gamma / ((2.0 * PI).powf(lf) * ch.powf(2.0 * s - k))
                * hyp_direct;
            acc_c += piece_unit * gamma / ((2.0 * PI).powf(lf) * ch.powf(2.0 * s - k))
                * (sh / ch).powf(-2.0 * lf)
                * hyp_euler;
        }
        raw.insert(key.clone(), front * acc_a);
        simplified.insert(key.clone(), front * acc_b);
        euler.insert(key, front * acc_c);
    }
    // The raw and homogeneity-simplified routes hit the hypergeometric
    // argument 1 - sech^2 t, whose conditioning degrades like 1/t^2 as
    // t -> 0; 1e-9 leaves room for that while still catching any formula
    // discrepancy.
    let scale = coeff_norm(&euler).max(1e-300);
    let d1 = coeff_distance(&raw, &simplified);
    let d2 = coeff_distance(&simplified, &euler);
    if d1 > 1e-9 * scale || d2 > 1e-9 * scale {
        return Err(NumericError::NoConvergence {
            context: format!(
                "geodesic summand expressions disagree: raw/simplified {d1:.3e}, \
                 simplified/euler {d2:.3e} at t = {t}"
            ),
            estimate: d1.max(d2),
            target: 1e-9 * scale,
        });
    }
    Ok(euler)
}

/// A letter of a word in the SL2(Z) generators.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WordLetter {
    S,
    TPow(i64),
}

/// Decompose an SL2(Z) matrix into a word in S and T by the continued
/// fraction of a/c; the letters multiply left to right to the matrix.
pub fn sl2_word(a: i64, b: i64, c: i64, d: i64) -> Result<Vec<WordLetter>, NumericError> {
    if a * d - b * c != 1 {
        return Err(NumericError::InvalidParameter(format!(
            "not an SL2(Z) matrix: [[{a}, {b}], [{c}, {d}]]"
        )));
    }
    let (mut a, mut b, mut c, mut d) = (a, b, c, d);
    let mut word = Vec::new();
    while c != 0 {
        // Rounded division keeps the entries small.
        let n = (a as f64 / c as f64).round() as i64;
        word.push(WordLetter::TPow(n));
        word.push(WordLetter::S);
        let (na, nb, nc, nd) = (c, d, -(a - n * c), -(b - n * d));
        (a, b, c, d) = (na, nb, nc, nd);
    }
    if a == 1 {
        word.push(WordLetter::TPow(b));
    } else {
        // a = d = -1: S^2 = -I absorbs the sign.
        word.push(WordLetter::S);
        word.push(WordLetter::S);
        word.push(WordLetter::TPow(-b));
    }
    Ok(word)
}

/// Multiply a word back into a matrix (for verification).
pub fn sl2_word_matrix(word: &[WordLetter]) -> (i64, i64, i64, i64) {
    let mut m = (1i64, 0i64, 0i64, 1i64);
    for letter in word {
        let g = match letter {
            WordLetter::S => (0, -1, 1, 0),
            WordLetter::TPow(n) => (1, *n, 0, 1),
        };
        m = (
            m.0 * g.0 + m.1 * g.2,
            m.0 * g.1 + m.1 * g.3,
            m.2 * g.0 + m.3 * g.2,
            m.2 * g.1 + m.3 * g.3,
        );
    }
    m
}

/// Apply rho(u_1 u_2 ... u_s) to a coset vector, where the letters
/// multiply left to right to a matrix: as operators the letters act right
/// to left, so the word is traversed in reverse.
pub fn apply_word(
    weil: &WeilRepFinite,
    word: &[WordLetter],
    v: &[Complex64],
) -> Result<Vec<Complex64>, NumericError> {
    let mut cur = v.to_vec();
    for letter in word.iter().rev() {
        cur = match letter {
            WordLetter::S => weil.apply(Sl2Gen::S, &cur).map_err(lat_err)?,
            WordLetter::TPow(n) => weil.apply_t_pow(*n, &cur).map_err(lat_err)?,
        };
    }
    Ok(cur)
}

/// Coprime bottom rows (c, d) with 0 <= c <= c_max; c = 0 contributes only
/// (0, 1), and for c >= 1 the d-range is truncated at |d| <= c_max.
pub fn coset_reps(c_max: u32) -> Vec<(i64, i64)> {
    let mut reps = vec![(0i64, 1i64)];
    for c in 1..=c_max as i64 {
        for d in -(c_max as i64)..=c_max as i64 {
            if gcd_i64(c, d) == 1 {
                reps.push((c, d));
            }
        }
    }
    reps
}

fn gcd_i64(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// Complete a coprime bottom row to an SL2(Z) matrix.
pub fn complete_to_sl2(c: i64, d: i64) -> Result<(i64, i64), NumericError> {
    if gcd_i64(c, d) != 1 {
        return Err(NumericError::InvalidParameter(format!(
            "({c}, {d}) is not coprime"
        )));
    }
    // Extended gcd: u c + v d = 1; then (a, b) = (v, -u).
    let (mut r0, mut r1) = (c, d);
    let (mut u0, mut u1) = (1i64, 0i64);
    let (mut v0, mut v1) = (0i64, 1i64);
    while r1 != 0 {
        let qt = r0.div_euclid(r1);
        (r0, r1) = (r1, r0 - qt * r1);
        (u0, u1) = (u1, u0 - qt * u1);
        (v0, v1) = (v1, v0 - qt * v1);
    }
    let (u, v) = if r0 == 1 { (u0, v0) } else { (-u0, -v0) };
    Ok((v, -u))
}

/// The Whittaker seed profile t^{-k/2} M_{-k/2, s - 1/2}(t).
pub fn whittaker_profile(
    k: f64,
    s: f64,
    t: f64,
    policy: &PrecisionPolicy,
) -> Result<f64, NumericError> {
    Ok(t.powf(-k / 2.0) * whittaker_m(-k / 2.0, s - 0.5, t, policy)?)
}

/// A Hejhal Poincare series value over the cosets, with truncation data.
#[derive(Debug, Clone)]
pub struct PoincareValue {
    pub coeffs: Vec<Complex64>,
    pub reps_used: usize,
    pub tail_estimate: f64,
}

/// The Hejhal Poincare series
///   F_{m,h}(tau, s) = (1 / 4 Gamma(2s)) sum_{Gamma_infty \ SL2(Z)}
///     [M-profile](4 pi |m| v) e^{2 pi i m u} e_h  |_{k}  A
/// over the given coset representatives, with the slash action
///   (f | A)(tau) = (c tau + d)^{-k} rho(A)^{-1} f(A tau)
/// and rho(A)^{-1} realized by an S, T word for the inverse matrix. The
/// weight is k = 2 - (p + q) on the conjugate (dual) representation. Each
/// slash term is an eigenfunction of the weight-k Laplacian, so any
/// truncation retains the exact eigenvalue.
#[allow(clippy::too_many_arguments)]
pub fn hejhal_poincare(
    weil: &WeilRepFinite,
    group: &DiscriminantGroup,
    k: i64,
    m: f64,
    h_index: usize,
    s: f64,
    tau: (f64, f64),
    reps: &[(i64, i64)],
    policy: &PrecisionPolicy,
) -> Result<PoincareValue, NumericError> {
    let (u, v) = tau;
    if v <= 0.0 || s <= 1.0 {
        return Err(NumericError::InvalidParameter(format!(
            "requires Im(tau) > 0 and s > 1, got v = {v}, s = {s}"
        )));
    }
    if m == 0.0 {
        return Err(NumericError::InvalidParameter(
            "requires a nonzero index m".to_string(),
        ));
    }
    if h_index >= group.order {
        return Err(NumericError::InvalidParameter(format!(
            "coset index {h_index} out of range"
        )));
    }
    // Well-definedness over Gamma_infty: the seed must be T-invariant,
    // which pins m modulo 1 to the coset norm.
    let norm_h = rational_to_f64(&group.norms[h_index]);
    let gap = m + norm_h;
    if (gap - gap.round()).abs() > 1e-9 {
        return Err(NumericError::InvalidParameter(format!(
            "index m = {m} is not congruent to minus the coset norm {norm_h} modulo 1"
        )));
    }
    let front = 1.0 / (4.0 * gamma_fn(2.0 * s)?);
    let tau_c = Complex64::new(u, v);
    let mut acc: Vec<(Accumulator, Accumulator)> = (0..group.order)
        .map(|_| (Accumulator::new(), Accumulator::new()))
        .collect();
    let mut last_size = 0.0;
    for &(c, d) in reps {
        let (a, b) = complete_to_sl2(c, d)?;
        let j = Complex64::new(c as f64, 0.0) * tau_c + Complex64::new(d as f64, 0.0);
        let a_tau = (Complex64::new(a as f64, 0.0) * tau_c + Complex64::new(b as f64, 0.0)) / j;
        let vp = a_tau.im;
        let up = a_tau.re;
        let profile = whittaker_profile(k as f64, s, 4.0 * PI * m.abs() * vp, policy)?;
        let scalar = front * profile;
        let phase = Complex64::new(0.0, 2.0 * PI * m * up).exp();
        let mut seed = vec![Complex64::new(0.0, 0.0); group.order];
        seed[h_index] = scalar * phase;
        // rho(A)^{-1} = rho(A^{-1}) with A^{-1} = [[d, -b], [-c, a]].
        let word = sl2_word(d, -b, -c, a)?;
        let rotated = apply_word(weil, &word, &seed)?;
        let aut = j.powi(-k as i32);
        let mut size = 0.0f64;
        for (slot, val) in acc.iter_mut().zip(rotated.iter()) {
            let term = aut * val;
            slot.0.add(term.re);
            slot.1.add(term.im);
            size = size.max(term.norm());
        }
        last_size = size;
    }
    Ok(PoincareValue {
        coeffs: acc
            .into_iter()
            .map(|(re, im)| Complex64::new(re.value(), im.value()))
            .collect(),
        reps_used: reps.len(),
        tail_estimate: last_size * reps.len() as f64,
    })
}

/// The weight-k hyperbolic Laplacian
///   Delta_k = -v^2 (d_uu + d_vv) + i k v (d_u + i d_v)
/// applied to a coset-vector-valued function by 5-point central finite
/// differences with step `h_step`.
pub fn laplacian_k_fd<F>(
    f: F,
    k: i64,
    u: f64,
    v: f64,
    h_step: f64,
) -> Result<Vec<Complex64>, NumericError>
where
    F: Fn(f64, f64) -> Result<Vec<Complex64>, NumericError>,
{
    let f00 = f(u, v)?;
    let n = f00.len();
    let fu = [f(u - 2.0 * h_step, v)?, f(u - h_step, v)?, f(u + h_step, v)?, f(u + 2.0 * h_step, v)?];
    let fv = [f(u, v - 2.0 * h_step)?, f(u, v - h_step)?, f(u, v + h_step)?, f(u, v + 2.0 * h_step)?];
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    for i in 0..n {
        let duu =
            (-fu[3][i] + 16.0 * fu[2][i] - 30.0 * f00[i] + 16.0 * fu[1][i] - fu[0][i])
                / (12.0 * h_step * h_step);
        let dvv =
            (-fv[3][i] + 16.0 * fv[2][i] - 30.0 * f00[i] + 16.0 * fv[1][i] - fv[0][i])
                / (12.0 * h_step * h_step);
        let du = (-fu[3][i] + 8.0 * fu[2][i] - 8.0 * fu[1][i] + fu[0][i]) / (12.0 * h_step);
        let dv = (-fv[3][i] + 8.0 * fv[2][i] - 8.0 * fv[1][i] + fv[0][i]) / (12.0 * h_step);
        let ikv = Complex64::new(0.0, k as f64 * v);
        out[i] = -v * v * (duu + dvv) + ikv * (du + Complex64::new(0.0, 1.0) * dv);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::ExactScalar;
    use crate::fock::{omega_q_minus_1, Signature};
    use crate::lattice::{ImagQuadField, QuadElem};
    use crate::weil::k_act_exterior;
    use num_bigint::BigInt;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn policy() -> PrecisionPolicy {
        PrecisionPolicy::default()
    }

    fn rat(n: i64) -> BigRational {
        BigRational::from_integer(BigInt::from(n))
    }

    fn cvec(entries: &[(f64, f64)]) -> CVec {
        CVec::from_iterator(
            entries.len(),
            entries.iter().map(|&(re, im)| Complex64::new(re, im)),
        )
    }

    fn random_cvec(rng: &mut ChaCha8Rng, m: usize) -> CVec {
        CVec::from_iterator(
            m,
            (0..m).map(|_| Complex64::new(rng.gen_range(-1.5..1.5), rng.gen_range(-1.5..1.5))),
        )
    }

    fn gaussian_hyperbolic() -> HermitianLattice {
        let field = ImagQuadField::new(-4).unwrap();
        let gram = vec![
            vec![QuadElem::from_ints(1, 0), QuadElem::zero()],
            vec![QuadElem::zero(), QuadElem::from_ints(-1, 0)],
        ];
        HermitianLattice::new(field, (1, 1), gram).unwrap()
    }

    fn eisenstein_offdiag() -> HermitianLattice {
        let field = ImagQuadField::new(-3).unwrap();
        let gram = vec![
            vec![QuadElem::from_ints(1, 0), QuadElem::from_ints(0, 1)],
            vec![QuadElem::from_ints(-3, -1), QuadElem::from_ints(-1, 0)],
        ];
        HermitianLattice::new(field, (1, 1), gram).unwrap()
    }

    fn gaussian_rank3() -> HermitianLattice {
        let field = ImagQuadField::new(-4).unwrap();
        let mut gram = vec![vec![QuadElem::zero(); 3]; 3];
        gram[0][0] = QuadElem::from_ints(1, 0);
        gram[1][1] = QuadElem::from_ints(1, 0);
        gram[2][2] = QuadElem::from_ints(-1, 0);
        HermitianLattice::new(field, (2, 1), gram).unwrap()
    }

    fn gaussian_sig12() -> HermitianLattice {
        let field = ImagQuadField::new(-4).unwrap();
        let mut gram = vec![vec![QuadElem::zero(); 3]; 3];
        gram[0][0] = QuadElem::from_ints(1, 0);
        gram[1][1] = QuadElem::from_ints(-1, 0);
        gram[2][2] = QuadElem::from_ints(-1, 0);
        HermitianLattice::new(field, (1, 2), gram).unwrap()
    }

    #[test]
    fn base_and_geodesic_frames_validate() {
        for &(p, q) in &[(1u32, 1u32), (2, 1), (1, 2), (2, 2), (3, 2)] {
            DomainPoint::base(p, q).validate().unwrap();
            for &t in &[0.3, 1.0, 2.5] {
                DomainPoint::geodesic(p, q, t).validate().unwrap();
            }
        }
    }

    #[test]
    fn majorant_equals_pairing_plus_twice_r() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for &(p, q) in &[(1u32, 1u32), (2, 2), (3, 1)] {
            let m = (p + q) as usize;
            for &t in &[0.0, 0.7] {
                let z = if t == 0.0 {
                    DomainPoint::base(p, q)
                } else {
                    DomainPoint::geodesic(p, q, t)
                };
                for _ in 0..5 {
                    let x = random_cvec(&mut rng, m);
                    let pair = herm_ip(p, q, &x, &x).re;
                    let r = big_r(&x, &z);
                    let maj = majorant(&x, &z);
                    assert!(r >= 0.0);
                    assert!((maj - (pair + 2.0 * r)).abs() < 1e-10 * (1.0 + maj.abs()));
                }
            }
        }
    }

    #[test]
    fn from_span_matches_geodesic_scalars() {
        // The frame from a raw span differs from the geodesic frame by the
        // stabilizer, but R and the majorant are frame-free.
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for &(p, q) in &[(1u32, 1u32), (2, 1), (2, 2)] {
            let z1 = DomainPoint::geodesic(p, q, 0.8);
            let z2 = DomainPoint::from_span(p, q, &z1.z_span).unwrap();
            for _ in 0..6 {
                let x = random_cvec(&mut rng, (p + q) as usize);
                assert!((big_r(&x, &z1) - big_r(&x, &z2)).abs() < 1e-10);
                assert!((majorant(&x, &z1) - majorant(&x, &z2)).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn from_span_rejects_indefinite_spans() {
        let base = DomainPoint::base(2, 1);
        let mut span = base.z_span.clone();
        span[(0, 0)] = Complex64::new(2.0, 0.0); // now positive norm
        assert!(matches!(
            DomainPoint::from_span(2, 1, &span),
            Err(NumericError::InvalidParameter(_))
        ));
    }

    #[test]
    fn rank_one_negative_space_values() {
        // (p, q) = (1, 1): psi0 = 2i e^{-2 pi R}, singular lift -2i E1(2 pi R).
        let table = PolyTable::new(1, 1).unwrap();
        let z = DomainPoint::base(1, 1);
        let x = cvec(&[(0.9, -0.4), (0.6, 0.3)]);
        let r = big_r(&x, &z);
        let arr = psi0_eval(&x, &z, &table);
        assert_eq!(arr.len(), 1);
        let v = arr.values().next().unwrap();
        let expect = Complex64::new(0.0, 2.0 * (-2.0 * PI * r).exp());
        assert!((v - expect).norm() < 1e-12);
        let sing = psi0_singular(&x, &z, &table, &policy()).unwrap();
        let e1 = inc_gamma_int(0, 2.0 * PI * r, &policy()).unwrap();
        let vs = sing.values().next().unwrap();
        let expect_s = Complex64::new(0.0, -2.0 * e1);
        assert!((vs - expect_s).norm() < 1e-12);
    }

    #[test]
    fn singular_form_refuses_the_cycle() {
        let table = PolyTable::new(1, 1).unwrap();
        let z = DomainPoint::base(1, 1);
        let x = cvec(&[(1.0, 0.0), (1e-6, 0.0)]);
        assert!(matches!(
            psi0_singular(&x, &z, &table, &policy()),
            Err(NumericError::Singularity(_))
        ));
    }

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        let (xs, ws) = gauss_legendre(16);
        // Degree 30 <= 2n - 1.
        let value: f64 = xs
            .iter()
            .zip(ws.iter())
            .map(|(x, w)| w * x.powi(30))
            .sum();
        assert!((value - 2.0 / 31.0).abs() < 1e-13);
        let total: f64 = ws.iter().sum();
        assert!((total - 2.0).abs() < 1e-13);
    }

    #[test]
    fn closed_form_matches_defining_integral() {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        for &(p, q) in &[(1u32, 1u32), (2, 1), (1, 2), (2, 2)] {
            let table = PolyTable::new(p, q).unwrap();
            let z = DomainPoint::geodesic(p, q, 0.4);
            let mut done = 0;
            while done < 10 {
                let x = random_cvec(&mut rng, (p + q) as usize);
                let r = big_r(&x, &z);
                if !(0.05..1.0).contains(&r) {
                    continue;
                }
                let closed = psi0_singular(&x, &z, &table, &policy()).unwrap();
                let quad = psi0_singular_quadrature(&x, &z, &table).unwrap();
                let scale = coeff_norm(&closed);
                assert!(
                    coeff_distance(&closed, &quad) < 1e-9 * scale.max(1e-4),
                    "(p, q) = ({p}, {q}): distance {:.3e} at scale {:.3e}",
                    coeff_distance(&closed, &quad),
                    scale
                );
                done += 1;
            }
        }
    }

    #[test]
    fn scaled_norm_is_stable_near_the_cycle() {
        // q = 2: R^{q-1} ||singular form|| tends to a nonzero constant.
        let table = PolyTable::new(1, 2).unwrap();
        let z = DomainPoint::base(1, 2);
        let mut vals = Vec::new();
        for &rr in &[1e-6f64, 1e-5, 1e-4] {
            let eps = (rr / 2.0).sqrt();
            let x = cvec(&[(1.2, 0.3), (eps, 0.0), (0.0, eps)]);
            let r = big_r(&x, &z);
            assert!((r - rr).abs() < 1e-12);
            let sing = psi0_singular(&x, &z, &table, &policy()).unwrap();
            vals.push(r * coeff_norm(&sing));
        }
        let lo = vals.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = vals.iter().cloned().fold(0.0f64, f64::max);
        assert!(lo > 0.0);
        assert!(hi / lo < 1.05, "scaled norm varies too much: {vals:?}");
    }

    #[test]
    fn singular_form_has_conjugate_antisymmetry() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for &(p, q) in &[(1u32, 2u32), (2, 2), (2, 1)] {
            let table = PolyTable::new(p, q).unwrap();
            let z = DomainPoint::geodesic(p, q, 0.3);
            let mut done = 0;
            while done < 4 {
                let x = random_cvec(&mut rng, (p + q) as usize);
                let r = big_r(&x, &z);
                if !(0.05..1.5).contains(&r) {
                    continue;
                }
                let sing = psi0_singular(&x, &z, &table, &policy()).unwrap();
                let defect = hermitian_symmetry_defect(&sing);
                assert!(defect < 1e-10 * coeff_norm(&sing).max(1e-6));
                done += 1;
            }
        }
    }

    #[test]
    fn diagonal_torus_covariance_matches_wedge_eigenvalues() {
        // Rotating one positive coordinate by a phase multiplies each
        // coefficient by the inverse phase raised to the integer eigenvalue
        // of the compact generator on the corresponding wedge slot.
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for &(p, q) in &[(2u32, 2u32), (1, 2)] {
            let table = PolyTable::new(p, q).unwrap();
            let z = DomainPoint::base(p, q);
            let sig = Signature::pq11(p, q);
            let theta: f64 = 0.7;
            for alpha in 1..=p {
                let x = random_cvec(&mut rng, (p + q) as usize);
                let mut xr = x.clone();
                xr[(alpha - 1) as usize] *= Complex64::new(0.0, theta).exp();
                let before = psi0_eval(&x, &z, &table);
                let after = psi0_eval(&xr, &z, &table);
                for (key, v) in &before {
                    let form = omega_q_minus_1(sig, &key.0, &key.1).unwrap();
                    let res = k_act_exterior(alpha, alpha, &form).unwrap();
                    let mut eig = None;
                    for e in -4i64..=4 {
                        let diff = res
                            .sub(&form.scale(&ExactScalar::from_int(e)))
                            .unwrap();
                        if diff.is_zero() {
                            eig = Some(e);
                            break;
                        }
                    }
                    let e = eig.expect("wedge slot must be a torus eigenvector");
                    let predicted = v * Complex64::new(0.0, -(e as f64) * theta).exp();
                    let got = after[key];
                    assert!(
                        (got - predicted).norm() < 1e-10 * (1.0 + v.norm()),
                        "(p, q) = ({p}, {q}), alpha = {alpha}, key {key:?}"
                    );
                }
            }
        }
    }

    #[test]
    fn embedding_preserves_the_hermitian_pairing() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for lat in [gaussian_hyperbolic(), eisenstein_offdiag(), gaussian_rank3()] {
            let emb = LatticeEmbedding::new(&lat).unwrap();
            let n2 = lat.real_rank();
            let (p, q) = lat.signature;
            for _ in 0..8 {
                let x: Vec<BigRational> = (0..n2).map(|_| rat(rng.gen_range(-3i64..4))).collect();
                let y: Vec<BigRational> = (0..n2).map(|_| rat(rng.gen_range(-3i64..4))).collect();
                let expect = lat.hermitian_pairing(&x, &y).to_complex(&lat.field);
                let got = herm_ip(p, q, &emb.embed(&lat, &x), &emb.embed(&lat, &y));
                assert!(
                    (got - expect).norm() < 1e-9 * (1.0 + expect.norm()),
                    "pairing mismatch: {got} vs {expect}"
                );
            }
        }
    }

    #[test]
    fn realified_majorant_matches_embedded_majorant() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for lat in [gaussian_hyperbolic(), gaussian_rank3(), gaussian_sig12()] {
            let (p, q) = lat.signature;
            let emb = LatticeEmbedding::new(&lat).unwrap();
            let z = DomainPoint::geodesic(p, q, 0.35);
            let mq = emb.realified_majorant(&lat, &z);
            let n2 = lat.real_rank();
            for _ in 0..8 {
                let c: Vec<i64> = (0..n2).map(|_| rng.gen_range(-3i64..4)).collect();
                let quad: f64 = (0..n2)
                    .map(|i| {
                        (0..n2)
                            .map(|j| c[i] as f64 * mq[(i, j)] * c[j] as f64)
                            .sum::<f64>()
                    })
                    .sum();
                let coords: Vec<BigRational> = c.iter().map(|&v| rat(v)).collect();
                let direct = majorant(&emb.embed(&lat, &coords), &z);
                assert!((quad - direct).abs() < 1e-9 * (1.0 + direct.abs()));
            }
        }
    }

    #[test]
    fn kudla_green_form_truncation_is_consistent() {
        let lat = gaussian_hyperbolic();
        let table = PolyTable::new(1, 1).unwrap();
        let emb = LatticeEmbedding::new(&lat).unwrap();
        let z = DomainPoint::base(1, 1);
        let h = vec![BigRational::zero(); 4];
        let flags = KudlaFlags::default();
        let a = xi_kudla(
            &lat, &emb, &table, &h, &rat(-2), 1.0, &z, 20.0, 2, flags, &policy(),
        )
        .unwrap();
        let b = xi_kudla(
            &lat, &emb, &table, &h, &rat(-2), 1.0, &z, 40.0, 2, flags, &policy(),
        )
        .unwrap();
        assert!(a.lattice_vector_count > 0);
        assert!(b.lattice_vector_count >= a.lattice_vector_count);
        let d = coeff_distance(&a.coeffs, &b.coeffs);
        assert!(d <= a.tail_estimate, "drift {d:.3e} vs tail {:.3e}", a.tail_estimate);
        assert!(b.tail_estimate < a.tail_estimate);
        // q = 1: the single coefficient is purely imaginary.
        assert!(hermitian_symmetry_defect(&a.coeffs) < 1e-12 * coeff_norm(&a.coeffs).max(1e-9));
    }

    #[test]
    fn kudla_flags_apply_expected_factors() {
        let lat = gaussian_hyperbolic();
        let table = PolyTable::new(1, 1).unwrap();
        let emb = LatticeEmbedding::new(&lat).unwrap();
        let z = DomainPoint::base(1, 1);
        let h = vec![BigRational::zero(); 4];
        let w = 0.7;
        let plain = xi_kudla(
            &lat, &emb, &table, &h, &rat(-2), w, &z, 16.0, 1,
            KudlaFlags::default(), &policy(),
        )
        .unwrap();
        let scaled = xi_kudla(
            &lat, &emb, &table, &h, &rat(-2), w, &z, 16.0, 1,
            KudlaFlags { exp_factor: true, log_term: false }, &policy(),
        )
        .unwrap();
        let factor = (-2.0 * PI * (-1.0) * w).exp();
        for (key, v) in &plain.coeffs {
            assert!((scaled.coeffs[key] - v * factor).norm() < 1e-12 * (1.0 + v.norm()));
        }
        // Logarithmic term at (m, h) = (0, 0): difference is -psi0(0) ln w.
        let w0 = 0.5;
        let bare = xi_kudla(
            &lat, &emb, &table, &h, &rat(0), w0, &z, 16.0, 1,
            KudlaFlags::default(), &policy(),
        )
        .unwrap();
        let logged = xi_kudla(
            &lat, &emb, &table, &h, &rat(0), w0, &z, 16.0, 1,
            KudlaFlags { exp_factor: false, log_term: true }, &policy(),
        )
        .unwrap();
        let expect = Complex64::new(0.0, -2.0 * w0.ln());
        for (key, v) in &bare.coeffs {
            assert!((logged.coeffs[key] - v - expect).norm() < 1e-12);
        }
    }

    #[test]
    fn theta_t_translation_is_exact() {
        let lat = gaussian_hyperbolic();
        let table = PolyTable::new(1, 1).unwrap();
        let emb = LatticeEmbedding::new(&lat).unwrap();
        let group = lat.discriminant_group().unwrap();
        let z = DomainPoint::base(1, 1);
        let t1 = theta_psi(&lat, &emb, &table, &group, (0.3, 0.8), &z, 12.0, 2, &policy()).unwrap();
        let t2 = theta_psi(&lat, &emb, &table, &group, (1.3, 0.8), &z, 12.0, 2, &policy()).unwrap();
        let scale: f64 = t1
            .blocks
            .iter()
            .map(coeff_norm)
            .fold(0.0, f64::max);
        for (i, norm) in group.norms.iter().enumerate() {
            let phase = Complex64::new(0.0, 2.0 * PI * rational_to_f64(norm)).exp();
            for (key, v) in &t1.blocks[i] {
                let got = t2.blocks[i][key];
                assert!((got - phase * v).norm() < 1e-12 * scale.max(1e-9));
            }
        }
    }

    #[test]
    fn theta_s_inversion_matches_weil_action() {
        let lat = gaussian_hyperbolic();
        let table = PolyTable::new(1, 1).unwrap();
        let emb = LatticeEmbedding::new(&lat).unwrap();
        let group = lat.discriminant_group().unwrap();
        let weil = WeilRepFinite::new(&lat, &group, false).unwrap();
        let z = DomainPoint::base(1, 1);
        let (u, v) = (0.3, 0.8);
        let n2 = u * u + v * v;
        let th = theta_psi(&lat, &emb, &table, &group, (u, v), &z, 14.0, 2, &policy()).unwrap();
        let th_inv =
            theta_psi(&lat, &emb, &table, &group, (-u / n2, v / n2), &z, 14.0, 2, &policy())
                .unwrap();
        let rhs = apply_weil_to_blocks(&weil, Sl2Gen::S, &th.blocks).unwrap();
        // Weight p + q - 2 = 0: the automorphy factor is trivial here.
        assert_eq!(th.weight, 0);
        let scale: f64 = th.blocks.iter().map(coeff_norm).fold(0.0, f64::max);
        let mut worst: f64 = 0.0;
        for i in 0..group.order {
            worst = worst.max(coeff_distance(&th_inv.blocks[i], &rhs[i]));
        }
        assert!(
            worst < 1e-6 * scale,
            "S-inversion defect {worst:.3e} at scale {scale:.3e}"
        );
    }

    #[test]
    fn theta_is_deterministic_across_worker_counts() {
        let lat = gaussian_hyperbolic();
        let table = PolyTable::new(1, 1).unwrap();
        let emb = LatticeEmbedding::new(&lat).unwrap();
        let group = lat.discriminant_group().unwrap();
        let z = DomainPoint::geodesic(1, 1, 0.25);
        let runs: Vec<ThetaValue> = [1usize, 4, 8]
            .iter()
            .map(|&w| {
                theta_psi(&lat, &emb, &table, &group, (0.17, 0.9), &z, 10.0, w, &policy()).unwrap()
            })
            .collect();
        for other in &runs[1..] {
            assert_eq!(runs[0].terms, other.terms);
            for (a, b) in runs[0].blocks.iter().zip(other.blocks.iter()) {
                for (key, v) in a {
                    let wv = b[key];
                    assert_eq!(v.re.to_bits(), wv.re.to_bits());
                    assert_eq!(v.im.to_bits(), wv.im.to_bits());
                }
            }
        }
    }

    #[test]
    fn closed_summand_matches_geodesic_expression() {
        for &(p, q) in &[(1u32, 2u32), (2, 2)] {
            let table = PolyTable::new(p, q).unwrap();
            let points = [
                (0.5f64, 2.8f64, 1.0f64),
                (0.9, 3.1, 1.0),
                (1.3, 2.6, 2.0),
                (0.7, 3.3, 0.5),
                (1.8, 2.9, 1.5),
            ];
            for &(t, s, m) in &points {
                let z = DomainPoint::geodesic(p, q, t);
                let mut x = CVec::zeros((p + q) as usize);
                x[0] = Complex64::new((2.0 * m).sqrt(), 0.0);
                let y = z.pullback(&x);
                let term = bruinier_term(&table, &y, 2.0 * m, s, &policy()).unwrap();
                let summand = phi_s_summand(&table, m, s, t, &policy()).unwrap();
                let scale = coeff_norm(&summand).max(1e-12);
                assert!(
                    coeff_distance(&term, &summand) < 1e-9 * scale,
                    "(p, q) = ({p}, {q}), (t, s, m) = ({t}, {s}, {m}): {:.3e}",
                    coeff_distance(&term, &summand)
                );
            }
        }
    }

    #[test]
    fn bruinier_green_form_validates_and_sums() {
        let lat = gaussian_hyperbolic();
        let table = PolyTable::new(1, 1).unwrap();
        let emb = LatticeEmbedding::new(&lat).unwrap();
        let z = DomainPoint::geodesic(1, 1, 0.6);
        let h = vec![BigRational::zero(); 4];
        // Outside the convergence range.
        assert!(matches!(
            green_bruinier_closed(
                &lat, &emb, &table, &h, &rat(2), 1.5, &z, 30.0, 2, &policy()
            ),
            Err(NumericError::InvalidParameter(_))
        ));
        let a = green_bruinier_closed(
            &lat, &emb, &table, &h, &rat(2), 2.5, &z, 60.0, 2, &policy(),
        )
        .unwrap();
        assert!(a.lattice_vector_count > 0);
        assert!(a.tail_estimate.is_finite());
        let b = green_bruinier_closed(
            &lat, &emb, &table, &h, &rat(2), 2.5, &z, 120.0, 2, &policy(),
        )
        .unwrap();
        let d = coeff_distance(&a.coeffs, &b.coeffs);
        assert!(d <= a.tail_estimate, "drift {d:.3e} vs tail {:.3e}", a.tail_estimate);
        assert!(hermitian_symmetry_defect(&a.coeffs) < 1e-10 * coeff_norm(&a.coeffs).max(1e-9));
    }

    #[test]
    fn geodesic_summand_small_t_limit() {
        // t^{2(q-1)} times the summand converges to a nonzero limit.
        let table = PolyTable::new(1, 2).unwrap();
        let f = |t: f64| {
            let v = phi_s_summand(&table, 1.0, 2.5, t, &policy()).unwrap();
            t * t * coeff_norm(&v)
        };
        let a = f(1e-3);
        let b = f(5e-4);
        assert!(a > 0.0);
        assert!(
            (a - b).abs() < 1e-4 * a,
            "no small-t limit: {a:.12e} vs {b:.12e}"
        );
    }

    #[test]
    fn geodesic_summand_decay_rate() {
        for &(p, q, s) in &[(1u32, 2u32, 2.5f64), (2, 2, 3.0)] {
            let table = PolyTable::new(p, q).unwrap();
            let n5 = coeff_norm(&phi_s_summand(&table, 1.0, s, 5.0, &policy()).unwrap());
            let n15 = coeff_norm(&phi_s_summand(&table, 1.0, s, 15.0, &policy()).unwrap());
            let slope = (n15 / n5).ln() / 10.0;
            let expect = -(2.0 * s + (p + q) as f64 - 2.0);
            assert!(
                (slope - expect).abs() < 1e-3,
                "(p, q) = ({p}, {q}): slope {slope:.6} vs {expect}"
            );
        }
    }

    #[test]
    fn sl2_words_multiply_back() {
        for c in -12i64..=12 {
            for d in -12i64..=12 {
                if gcd_i64(c, d) != 1 {
                    continue;
                }
                let (a, b) = complete_to_sl2(c, d).unwrap();
                assert_eq!(a * d - b * c, 1);
                for shift in [-2i64, 0, 3] {
                    let (aa, bb) = (a + shift * c, b + shift * d);
                    let word = sl2_word(aa, bb, c, d).unwrap();
                    assert_eq!(sl2_word_matrix(&word), (aa, bb, c, d));
                }
            }
        }
        let word = sl2_word(-1, 0, 0, -1).unwrap();
        assert_eq!(sl2_word_matrix(&word), (-1, 0, 0, -1));
    }

    #[test]
    fn word_action_is_a_homomorphism() {
        let lat = gaussian_hyperbolic();
        let group = lat.discriminant_group().unwrap();
        let weil = WeilRepFinite::new(&lat, &group, true).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let v: Vec<Complex64> = (0..group.order)
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let a = (2i64, 1i64, 1i64, 1i64);
        let b = (1i64, -1i64, 3i64, -2i64);
        let ab = (
            a.0 * b.0 + a.1 * b.2,
            a.0 * b.1 + a.1 * b.3,
            a.2 * b.0 + a.3 * b.2,
            a.2 * b.1 + a.3 * b.3,
        );
        let wa = sl2_word(a.0, a.1, a.2, a.3).unwrap();
        let wb = sl2_word(b.0, b.1, b.2, b.3).unwrap();
        let wab = sl2_word(ab.0, ab.1, ab.2, ab.3).unwrap();
        let nested = apply_word(&weil, &wa, &apply_word(&weil, &wb, &v).unwrap()).unwrap();
        let direct = apply_word(&weil, &wab, &v).unwrap();
        for (x, y) in nested.iter().zip(direct.iter()) {
            assert!((x - y).norm() < 1e-12);
        }
    }

    #[test]
    fn poincare_identity_coset_reproduces_the_seed() {
        let lat = gaussian_hyperbolic();
        let group = lat.discriminant_group().unwrap();
        let weil = WeilRepFinite::new(&lat, &group, true).unwrap();
        let (s, m) = (1.6, -1.0);
        let tau = (0.3, 0.8);
        let val = hejhal_poincare(
            &weil, &group, 0, m, 0, s, tau, &[(0, 1)], &policy(),
        )
        .unwrap();
        let profile = whittaker_profile(0.0, s, 4.0 * PI * m.abs() * tau.1, &policy()).unwrap();
        let expect = Complex64::new(0.0, 2.0 * PI * m * tau.0).exp() * profile
            / (4.0 * gamma_fn(2.0 * s).unwrap());
        assert!((val.coeffs[0] - expect).norm() < 1e-12 * expect.norm());
        for c in &val.coeffs[1..] {
            assert!(c.norm() < 1e-15);
        }
    }

    #[test]
    fn poincare_is_consistent_under_t_shift() {
        let lat = gaussian_hyperbolic();
        let group = lat.discriminant_group().unwrap();
        let weil = WeilRepFinite::new(&lat, &group, true).unwrap();
        let (s, m) = (1.6, -1.0);
        let (u, v) = (0.21, 0.93);
        let reps = coset_reps(8);
        let shifted: Vec<(i64, i64)> = reps.iter().map(|&(c, d)| (c, c + d)).collect();
        let lhs = hejhal_poincare(&weil, &group, 0, m, 0, s, (u, v), &shifted, &policy()).unwrap();
        let base = hejhal_poincare(&weil, &group, 0, m, 0, s, (u + 1.0, v), &reps, &policy()).unwrap();
        let rhs = weil.apply_t_pow(-1, &base.coeffs).unwrap();
        let scale: f64 = lhs.coeffs.iter().map(|c| c.norm()).fold(1e-12, f64::max);
        for (x, y) in lhs.coeffs.iter().zip(rhs.iter()) {
            assert!(
                (x - y).norm() < 1e-9 * scale,
                "T-shift defect {:.3e} at scale {scale:.3e}",
                (x - y).norm()
            );
        }
    }

    #[test]
    fn poincare_satisfies_the_laplacian_eigenvalue() {
        let lat = gaussian_hyperbolic();
        let group = lat.discriminant_group().unwrap();
        let weil = WeilRepFinite::new(&lat, &group, true).unwrap();
        let (k, s, m) = (0i64, 1.6, -1.0);
        let reps = coset_reps(15);
        let f = |u: f64, v: f64| {
            hejhal_poincare(&weil, &group, k, m, 0, s, (u, v), &reps, &policy())
                .map(|p| p.coeffs)
        };
        let lap = laplacian_k_fd(&f, k, 0.0, 1.0, 1e-3).unwrap();
        let val = f(0.0, 1.0).unwrap();
        let kappa = -(k as f64);
        let eigen = kappa * kappa / 4.0 + kappa / 2.0 + s * (1.0 - s);
        let scale: f64 = val.iter().map(|c| c.norm()).fold(0.0, f64::max);
        assert!(scale > 0.0);
        for (l, v) in lap.iter().zip(val.iter()) {
            assert!(
                (l - eigen * v).norm() < 1e-4 * scale,
                "Laplacian defect {:.3e} at scale {scale:.3e}",
                (l - eigen * v).norm()
            );
        }
    }

    #[test]
    fn poincare_rejects_incompatible_index() {
        let lat = gaussian_hyperbolic();
        let group = lat.discriminant_group().unwrap();
        let weil = WeilRepFinite::new(&lat, &group, true).unwrap();
        let err = hejhal_poincare(
            &weil, &group, 0, -1.3, 0, 1.6, (0.0, 1.0), &[(0, 1)], &policy(),
        );
        assert!(matches!(err, Err(NumericError::InvalidParameter(_))));
    }
}
