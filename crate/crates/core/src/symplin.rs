//! Exact linear algebra over Q_p and its extensions: the standard symplectic
//! form, even characteristic polynomials of Omega0^-1 M, eigen-structure
//! analysis in dimensions 2 and 4, kernel solving over extension towers, and
//! the nilpotent symplectic Jordan basis.

use crate::error::{ArithError, Result};
use crate::ext::{
    ext_square_class, is_square_ext, sqrt_ext, ExtElem, ExtSquareClass, QuadExt, TowerElem,
    TowerExt,
};
use crate::padic::{PadicScalar, Prime};
use crate::rng::SplitMix64;

/// Minimal field interface shared by Q_p, Q_p[alpha] and the tower.
pub trait Field: Clone {
    fn f_zero(&self) -> Self;
    fn f_one(&self) -> Self;
    fn f_add(&self, o: &Self) -> Self;
    fn f_sub(&self, o: &Self) -> Self;
    fn f_mul(&self, o: &Self) -> Self;
    fn f_neg(&self) -> Self;
    fn f_inv(&self) -> Result<Self>;
    fn f_is_zero(&self) -> bool;
    /// Collapse indeterminate-zero components into exact zeros (valid at
    /// seams where vanishing-to-precision implies exact vanishing).
    fn f_clean_zero(&self) -> Self;
}

impl Field for PadicScalar {
    fn f_zero(&self) -> Self {
        PadicScalar::zero(self.prime())
    }
    fn f_one(&self) -> Self {
        PadicScalar::one(self.prime())
    }
    fn f_add(&self, o: &Self) -> Self {
        self.add(o)
    }
    fn f_sub(&self, o: &Self) -> Self {
        self.sub(o)
    }
    fn f_mul(&self, o: &Self) -> Self {
        self.mul(o)
    }
    fn f_neg(&self) -> Self {
        self.neg()
    }
    fn f_inv(&self) -> Result<Self> {
        self.inv()
    }
    fn f_is_zero(&self) -> bool {
        self.is_zero_to_precision()
    }
    fn f_clean_zero(&self) -> Self {
        self.clean_zero()
    }
}

impl Field for ExtElem {
    fn f_zero(&self) -> Self {
        self.ext().zero()
    }
    fn f_one(&self) -> Self {
        self.ext().one()
    }
    fn f_add(&self, o: &Self) -> Self {
        self.add(o)
    }
    fn f_sub(&self, o: &Self) -> Self {
        self.sub(o)
    }
    fn f_mul(&self, o: &Self) -> Self {
        self.mul(o)
    }
    fn f_neg(&self) -> Self {
        self.neg()
    }
    fn f_inv(&self) -> Result<Self> {
        self.inv()
    }
    fn f_is_zero(&self) -> bool {
        self.a.is_zero_to_precision() && self.b.is_zero_to_precision()
    }
    fn f_clean_zero(&self) -> Self {
        self.ext().elem(self.a.clean_zero(), self.b.clean_zero())
    }
}

impl Field for TowerElem {
    fn f_zero(&self) -> Self {
        self.tower().zero()
    }
    fn f_one(&self) -> Self {
        self.tower().one()
    }
    fn f_add(&self, o: &Self) -> Self {
        self.add(o)
    }
    fn f_sub(&self, o: &Self) -> Self {
        self.sub(o)
    }
    fn f_mul(&self, o: &Self) -> Self {
        self.mul(o)
    }
    fn f_neg(&self) -> Self {
        self.neg()
    }
    fn f_inv(&self) -> Result<Self> {
        self.inv()
    }
    fn f_is_zero(&self) -> bool {
        self.x.f_is_zero() && self.y.f_is_zero()
    }
    fn f_clean_zero(&self) -> Self {
        self.tower().elem(self.x.f_clean_zero(), self.y.f_clean_zero())
    }
}

/// Dense square matrix over a field.
#[derive(Debug, Clone)]
pub struct Mat<T> {
    pub dim: usize,
    pub e: Vec<T>,
}

/// Exact matrix over Q_p.
pub type MatQ = Mat<PadicScalar>;

impl<T: Field> Mat<T> {
    pub fn from_vec(dim: usize, e: Vec<T>) -> Self {
        assert_eq!(e.len(), dim * dim);
        Mat { dim, e }
    }

    pub fn at(&self, i: usize, j: usize) -> &T {
        &self.e[i * self.dim + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.e[i * self.dim + j] = v;
    }

    pub fn zero_like(&self) -> Self {
        let z = self.e[0].f_zero();
        Mat::from_vec(self.dim, vec![z; self.dim * self.dim])
    }

    pub fn identity_like(&self) -> Self {
        let mut m = self.zero_like();
        for i in 0..self.dim {
            m.set(i, i, self.e[0].f_one());
        }
        m
    }

    pub fn transpose(&self) -> Self {
        let mut m = self.clone();
        for i in 0..self.dim {
            for j in 0..self.dim {
                m.set(i, j, self.at(j, i).clone());
            }
        }
        m
    }

    pub fn add(&self, o: &Self) -> Self {
        let e = self.e.iter().zip(&o.e).map(|(a, b)| a.f_add(b)).collect();
        Mat::from_vec(self.dim, e)
    }

    pub fn sub(&self, o: &Self) -> Self {
        let e = self.e.iter().zip(&o.e).map(|(a, b)| a.f_sub(b)).collect();
        Mat::from_vec(self.dim, e)
    }

    pub fn neg(&self) -> Self {
        Mat::from_vec(self.dim, self.e.iter().map(|a| a.f_neg()).collect())
    }

    pub fn scale(&self, s: &T) -> Self {
        Mat::from_vec(self.dim, self.e.iter().map(|a| a.f_mul(s)).collect())
    }

    pub fn mul(&self, o: &Self) -> Self {
        assert_eq!(self.dim, o.dim);
        let n = self.dim;
        let mut m = self.zero_like();
        for i in 0..n {
            for j in 0..n {
                let mut acc = self.e[0].f_zero();
                for k in 0..n {
                    acc = acc.f_add(&self.at(i, k).f_mul(o.at(k, j)));
                }
                m.set(i, j, acc);
            }
        }
        m
    }

    pub fn mul_vec(&self, v: &[T]) -> Vec<T> {
        let n = self.dim;
        (0..n)
            .map(|i| {
                let mut acc = self.e[0].f_zero();
                for k in 0..n {
                    acc = acc.f_add(&self.at(i, k).f_mul(&v[k]));
                }
                acc
            })
            .collect()
    }

    pub fn is_zero(&self) -> bool {
        self.e.iter().all(|x| x.f_is_zero())
    }

    pub fn is_symmetric(&self) -> bool {
        for i in 0..self.dim {
            for j in 0..i {
                if !self.at(i, j).f_sub(self.at(j, i)).f_is_zero() {
                    return false;
                }
            }
        }
        true
    }

    /// Map entries into another field through f.
    pub fn map<U: Field>(&self, f: impl Fn(&T) -> U) -> Mat<U> {
        Mat::from_vec(self.dim, self.e.iter().map(f).collect())
    }

    /// Inverse by Gauss-Jordan elimination.
    pub fn inverse(&self) -> Result<Self> {
        let n = self.dim;
        let mut a = self.clone();
        let mut inv = self.identity_like();
        for col in 0..n {
            let piv = (col..n)
                .find(|&r| !a.at(r, col).f_is_zero())
                .ok_or(ArithError::SingularSystem)?;
            if piv != col {
                for j in 0..n {
                    a.e.swap(col * n + j, piv * n + j);
                    inv.e.swap(col * n + j, piv * n + j);
                }
            }
            let d = a.at(col, col).f_inv()?;
            for j in 0..n {
                a.set(col, j, a.at(col, j).f_mul(&d));
                inv.set(col, j, inv.at(col, j).f_mul(&d));
            }
            for r in 0..n {
                if r != col && !a.at(r, col).f_is_zero() {
                    let f = a.at(r, col).clone();
                    for j in 0..n {
                        let v = a.at(r, j).f_sub(&f.f_mul(a.at(col, j)));
                        a.set(r, j, v);
                        let v = inv.at(r, j).f_sub(&f.f_mul(inv.at(col, j)));
                        inv.set(r, j, v);
                    }
                }
            }
        }
        Ok(inv)
    }

    /// Basis of the kernel, each vector normalized so its first nonzero
    /// coordinate is 1.
    pub fn kernel(&self) -> Result<Vec<Vec<T>>> {
        let n = self.dim;
        let mut a = self.clone();
        let mut pivot_of_row: Vec<usize> = Vec::new();
        let mut row = 0usize;
        for col in 0..n {
            let piv = (row..n).find(|&r| !a.at(r, col).f_is_zero());
            let Some(piv) = piv else { continue };
            if piv != row {
                for j in 0..n {
                    a.e.swap(row * n + j, piv * n + j);
                }
            }
            let d = a.at(row, col).f_inv()?;
            for j in 0..n {
                a.set(row, j, a.at(row, j).f_mul(&d));
            }
            for r in 0..n {
                if r != row && !a.at(r, col).f_is_zero() {
                    let f = a.at(r, col).clone();
                    for j in 0..n {
                        let v = a.at(r, j).f_sub(&f.f_mul(a.at(row, j)));
                        a.set(r, j, v);
                    }
                }
            }
            pivot_of_row.push(col);
            row += 1;
            if row == n {
                break;
            }
        }
        let pivots: std::collections::HashSet<usize> = pivot_of_row.iter().copied().collect();
        let mut basis = Vec::new();
        for free in 0..n {
            if pivots.contains(&free) {
                continue;
            }
            let mut v = vec![self.e[0].f_zero(); n];
            v[free] = self.e[0].f_one();
            for (r, &pc) in pivot_of_row.iter().enumerate() {
                v[pc] = a.at(r, free).f_neg();
            }
            // normalize on the first nonzero coordinate; kernel vectors of
            // exact systems have exact zeros where they vanish to precision
            let k = v.iter().position(|x| !x.f_is_zero()).unwrap();
            let d = v[k].f_inv()?;
            for x in v.iter_mut() {
                *x = x.f_mul(&d).f_clean_zero();
            }
            basis.push(v);
        }
        Ok(basis)
    }

    /// Coefficients of the characteristic polynomial, monic, highest first:
    /// [1, c_{n-1}, ..., c_0] for det(tI - M) = t^n + c_{n-1} t^(n-1) + ... + c_0.
    pub fn char_poly(&self) -> Vec<T> {
        // Faddeev-LeVerrier; exact over characteristic-zero fields.
        let n = self.dim;
        let one = self.e[0].f_one();
        let mut coeffs = vec![one.clone()];
        let mut m = self.zero_like();
        let mut c_prev = one.clone();
        for k in 1..=n {
            let step = m.add(&self.identity_like().scale(&c_prev));
            m = self.mul(&step);
            let mut tr = self.e[0].f_zero();
            for i in 0..n {
                tr = tr.f_add(m.at(i, i));
            }
            let kinv = int_in(&one, k as i64).f_inv().expect("k nonzero");
            let ck = tr.f_neg().f_mul(&kinv);
            coeffs.push(ck.clone());
            c_prev = ck;
        }
        coeffs
    }
}

fn int_in<T: Field>(proto: &T, n: i64) -> T {
    let one = proto.f_one();
    let mut acc = proto.f_zero();
    for _ in 0..n.abs() {
        acc = acc.f_add(&one);
    }
    if n < 0 {
        acc.f_neg()
    } else {
        acc
    }
}

/// v^T Omega w pairing.
pub fn sym_pairing<T: Field>(omega: &Mat<T>, v: &[T], w: &[T]) -> T {
    let ow = omega.mul_vec(w);
    let mut acc = omega.e[0].f_zero();
    for (a, b) in v.iter().zip(&ow) {
        acc = acc.f_add(&a.f_mul(b));
    }
    acc
}

impl MatQ {
    pub fn prime(&self) -> Prime {
        self.e[0].prime()
    }

    pub fn from_i64_rows(p: Prime, dim: usize, rows: &[&[i64]]) -> MatQ {
        assert_eq!(rows.len(), dim);
        let mut e = Vec::with_capacity(dim * dim);
        for r in rows {
            assert_eq!(r.len(), dim);
            for &x in *r {
                e.push(PadicScalar::from_i64(p, x));
            }
        }
        Mat::from_vec(dim, e)
    }
}

/// The standard symplectic form: block-diagonal with [[0,1],[-1,0]] blocks.
pub fn omega0(p: Prime, dim: usize) -> Result<MatQ> {
    if dim % 2 != 0 {
        return Err(ArithError::OddDimension(dim));
    }
    let z = PadicScalar::zero(p);
    let mut m = Mat::from_vec(dim, vec![z; dim * dim]);
    for b in 0..dim / 2 {
        m.set(2 * b, 2 * b + 1, PadicScalar::one(p));
        m.set(2 * b + 1, 2 * b, PadicScalar::from_i64(p, -1));
    }
    Ok(m)
}

/// Omega0^-1 = -Omega0.
pub fn omega0_inv(p: Prime, dim: usize) -> Result<MatQ> {
    Ok(omega0(p, dim)?.neg())
}

/// S^T Omega0 S = Omega0, exactly on rationals, to precision on lifted entries.
pub fn is_symplectic(s: &MatQ) -> Result<bool> {
    if s.dim % 2 != 0 {
        return Err(ArithError::OddDimension(s.dim));
    }
    let om = omega0(s.prime(), s.dim)?;
    let lhs = s.transpose().mul(&om).mul(s);
    Ok(lhs.sub(&om).is_zero())
}

/// Monic even characteristic polynomial of Omega0^-1 M: returns (A, B) with
/// t^4 + A t^2 + B for dim 4, and (A, 0) with t^2 + A for dim 2.
pub fn char_poly_even(m: &MatQ) -> Result<(PadicScalar, PadicScalar)> {
    if !(m.dim == 2 || m.dim == 4) {
        return Err(ArithError::BadDimension(m.dim));
    }
    if !m.is_symmetric() {
        return Err(ArithError::NotSymmetric);
    }
    let p = m.prime();
    let a = omega0_inv(p, m.dim)?.mul(m);
    let coeffs = a.char_poly();
    // structural invariant: odd-degree coefficients vanish (exactly on
    // rational input, to precision on lifted input)
    for (k, c) in coeffs.iter().enumerate() {
        if k % 2 == 1 && !c.is_zero_to_precision() {
            return Err(ArithError::NotSymmetric);
        }
    }
    if m.dim == 2 {
        Ok((coeffs[2].clone(), PadicScalar::zero(p)))
    } else {
        Ok((coeffs[2].clone(), coeffs[4].clone()))
    }
}

/// Degenerate eigenvalue patterns of Omega0^-1 M in dimension 4.
#[derive(Debug, Clone)]
pub enum DegeneratePattern {
    /// Eigenvalues l, l, -l, -l (l != 0) with diagonalizable action.
    DoublePairDiagonalizable { lambda_sq: PadicScalar },
    /// Eigenvalues l, l, -l, -l (l != 0), one Jordan block per sign.
    DoublePairJordan { lambda_sq: PadicScalar },
    /// Eigenvalues l, -l, 0, 0 with l != 0.
    SemiNilpotent { lambda_sq: PadicScalar },
    /// All eigenvalues zero.
    Nilpotent,
}

/// Resolved eigen-structure of Omega0^-1 M for dim 2 and 4.
#[derive(Debug, Clone)]
pub enum EigenTower {
    /// dim 2: the single pair +-lambda with lambda^2 = -det M.
    Single { lambda_sq: PadicScalar },
    /// dim 4, lambda^2 and mu^2 rational, distinct, both nonzero.
    SplitPair {
        lambda_sq: PadicScalar,
        mu_sq: PadicScalar,
    },
    /// lambda^2 irrational but lambda = s + r alpha in Q_p[alpha].
    QuadraticEigen {
        ext: QuadExt,
        lambda_sq: ExtElem,
        r: PadicScalar,
        s: PadicScalar,
    },
    /// lambda = (r + s alpha) gamma in the biquadratic tower.
    QuarticEigen {
        tower: TowerExt,
        /// square of the root whose class matches the canonical table row
        lambda_sq: ExtElem,
        /// square of the first root of the quadratic formula (+ branch)
        lambda_sq_orig: ExtElem,
        gamma_class: ExtSquareClass,
        r: PadicScalar,
        s: PadicScalar,
    },
    Degenerate(DegeneratePattern),
}

/// Resolve lambda^2 via the quadratic formula on (A, B) and decide
/// squareness exactly in Q_p or Q_p[alpha].
pub fn eigen_structure(m: &MatQ) -> Result<EigenTower> {
    let p = m.prime();
    let (ca, cb) = char_poly_even(m)?;
    if m.dim == 2 {
        return Ok(EigenTower::Single { lambda_sq: ca.neg() });
    }
    let two = PadicScalar::from_i64(p, 2);
    let four = PadicScalar::from_i64(p, 4);
    // t^4 + A t^2 + B: lambda^2, mu^2 = (-A +- sqrt(A^2 - 4B)) / 2
    let disc = ca.mul(&ca).sub(&four.mul(&cb));
    if disc.is_zero_to_precision() {
        // lambda^2 = mu^2: double pair (possibly all-zero)
        let lambda_sq = ca.neg().div(&two)?;
        if lambda_sq.is_zero_to_precision() {
            return Ok(EigenTower::Degenerate(DegeneratePattern::Nilpotent));
        }
        let a = omega0_inv(p, 4)?.mul(m);
        let lam2_mat = a.identity_like().scale(&lambda_sq);
        let diag = a.mul(&a).sub(&lam2_mat).is_zero();
        let pat = if diag {
            DegeneratePattern::DoublePairDiagonalizable { lambda_sq }
        } else {
            DegeneratePattern::DoublePairJordan { lambda_sq }
        };
        return Ok(EigenTower::Degenerate(pat));
    }
    if cb.is_zero_to_precision() {
        // roots 0, 0, +-lambda with lambda^2 = -A (nonzero since disc != 0)
        return Ok(EigenTower::Degenerate(DegeneratePattern::SemiNilpotent {
            lambda_sq: ca.neg(),
        }));
    }
    if disc.is_square()? {
        let rd = disc.sqrt()?.unwrap();
        let lambda_sq = ca.neg().add(&rd).div(&two)?;
        let mu_sq = ca.neg().sub(&rd).div(&two)?;
        return Ok(EigenTower::SplitPair { lambda_sq, mu_sq });
    }
    // lambda^2 lives in the quadratic extension by the discriminant class
    let ext = QuadExt::of_class(&disc)?;
    let f = disc.div(ext.alpha_sq())?.sqrt()?.expect("disc/c is a square");
    let lambda_sq = ext.elem(ca.neg().div(&two)?, f.div(&two)?);
    if is_square_ext(&lambda_sq)? {
        let w = sqrt_ext(&lambda_sq)?.unwrap();
        // lambda = s + r alpha in the proposition's naming
        return Ok(EigenTower::QuadraticEigen {
            ext,
            r: w.b,
            s: w.a,
            lambda_sq,
        });
    }
    // quartic case: gamma^2 is the canonical-table element for the class of
    // lambda^2; when only the paired class is listed, the conjugate root
    // mu^2 = conj(lambda^2) is taken as primary instead
    let lambda_sq_orig = lambda_sq.clone();
    let mut lambda_sq = lambda_sq;
    let mut cls = ext_square_class(&lambda_sq)?;
    let row = crate::ext::canonical_row(&ext, cls)?;
    if row.via_pair {
        lambda_sq = lambda_sq.conj();
        cls = ext_square_class(&lambda_sq)?;
    }
    let g2 = ext.elem(row.t1.clone(), row.t2.clone());
    debug_assert_eq!(ext_square_class(&g2)?, cls);
    let tower = TowerExt::new(g2)?;
    let ratio = lambda_sq.div(tower.gamma_sq())?;
    let w = sqrt_ext(&ratio)?.expect("lambda^2 / gamma^2 is a square by class match");
    Ok(EigenTower::QuarticEigen {
        gamma_class: cls,
        r: w.a.clone(),
        s: w.b.clone(),
        lambda_sq,
        lambda_sq_orig,
        tower,
    })
}

/// Nonzero v with A v = lambda v over any field containing the entries;
/// first nonzero coordinate normalized to 1.
pub fn eigenvector<T: Field>(a: &Mat<T>, lambda: &T) -> Result<Vec<T>> {
    let shifted = a.sub(&a.identity_like().scale(lambda));
    let ker = shifted.kernel()?;
    ker.into_iter().next().ok_or(ArithError::SingularSystem)
}

/// Lift a rational matrix into the tower field.
pub fn mat_to_tower(m: &MatQ, tower: &TowerExt) -> Mat<TowerElem> {
    m.map(|x| tower.scalar(tower.base().scalar(x.clone())))
}

/// Lift a rational matrix into a quadratic extension.
pub fn mat_to_ext(m: &MatQ, ext: &QuadExt) -> Mat<ExtElem> {
    m.map(|x| ext.scalar(x.clone()))
}

/// A good tuple: non-increasing block sizes, each odd size occurring an even
/// number of times, plus its pairing involution f_K.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GoodTuple {
    pub parts: Vec<usize>,
}

impl GoodTuple {
    pub fn is_good(&self) -> bool {
        if self.parts.windows(2).any(|w| w[0] < w[1]) {
            return false;
        }
        for &k in &self.parts {
            if k % 2 == 1 {
                let count = self.parts.iter().filter(|&&x| x == k).count();
                if count % 2 != 0 {
                    return false;
                }
            }
        }
        true
    }

    /// f_K: identity on even sizes; pairs consecutive equal odd sizes.
    pub fn involution(&self, i: usize) -> usize {
        let k = self.parts[i];
        if k % 2 == 0 {
            return i;
        }
        let i0 = self.parts.iter().position(|&x| x == k).unwrap();
        if (i - i0) % 2 == 0 {
            i + 1
        } else {
            i - 1
        }
    }
}

/// Jordan basis + repair loop for a nilpotent A = Omega0^-1 M (dim <= 4):
/// returns the good tuple K and the basis matrix whose columns are
/// u_11, ..., u_1k1, u_21, ... satisfying both bullets of the theorem.
pub fn nilpotent_symplectic_basis(m: &MatQ) -> Result<(GoodTuple, MatQ)> {
    let p = m.prime();
    let n = m.dim;
    if n > 4 || n % 2 != 0 {
        return Err(ArithError::BadDimension(n));
    }
    if !m.is_symmetric() {
        return Err(ArithError::NotSymmetric);
    }
    let a = omega0_inv(p, n)?.mul(m);
    let mut pw = a.identity_like();
    for _ in 0..n {
        pw = pw.mul(&a);
    }
    if !pw.is_zero() {
        return Err(ArithError::NotNilpotent);
    }
    let (tuple, mut chains) = jordan_chains_nilpotent(&a)?;
    if !tuple.is_good() {
        return Err(ArithError::SingularSystem);
    }
    repair_basis(&a, &tuple, &mut chains)?;
    let mut basis = Mat::from_vec(n, vec![PadicScalar::zero(p); n * n]);
    let mut cidx = 0usize;
    for (i, chain) in chains.iter().enumerate() {
        debug_assert_eq!(chain.len(), tuple.parts[i]);
        for u in chain {
            for r in 0..n {
                basis.set(r, cidx, u[r].clone());
            }
            cidx += 1;
        }
    }
    Ok((tuple, basis))
}

/// Jordan chain extraction for a nilpotent matrix over Q_p.
/// chains[i][j-1] = u_{i,j}, with A u_{i,j} = u_{i,j-1} and u_{i,0} = 0.
fn jordan_chains_nilpotent(a: &MatQ) -> Result<(GoodTuple, Vec<Vec<Vec<PadicScalar>>>)> {
    let n = a.dim;
    let mut powers = vec![a.identity_like()];
    for j in 1..=n {
        let next = powers[j - 1].mul(a);
        powers.push(next);
    }
    let mut kdim = vec![0usize];
    for j in 1..=n {
        kdim.push(powers[j].kernel()?.len());
    }
    let max_s = (1..=n).rev().find(|&s| kdim[s] > kdim[s - 1]).unwrap_or(0);
    let mut sizes = Vec::new();
    for s in (1..=max_s).rev() {
        let ge_s = kdim[s] - kdim[s - 1];
        let ge_s1 = if s + 1 <= n { kdim[s + 1] - kdim[s] } else { 0 };
        for _ in 0..ge_s.saturating_sub(ge_s1) {
            sizes.push(s);
        }
    }
    sizes.sort_unstable_by(|x, y| y.cmp(x));
    let mut chains: Vec<Vec<Vec<PadicScalar>>> = Vec::new();
    let mut used_tops: Vec<Vec<PadicScalar>> = Vec::new();
    for &s in &sizes {
        let top = pick_chain_top(a, &powers, s, &used_tops)?;
        let mut chain = vec![top.clone()];
        let mut cur = top;
        for _ in 1..s {
            cur = a.mul_vec(&cur);
            chain.push(cur.clone());
        }
        chain.reverse(); // chain[0] = u_{i,1} lies in ker A
        used_tops.push(chain[s - 1].clone());
        chains.push(chain);
    }
    Ok((GoodTuple { parts: sizes }, chains))
}

/// Choose a chain top of length s: a vector of ker A^s independent of
/// ker A^(s-1) together with the A-orbits of previously chosen tops.
fn pick_chain_top(
    a: &MatQ,
    powers: &[MatQ],
    s: usize,
    used_tops: &[Vec<PadicScalar>],
) -> Result<Vec<PadicScalar>> {
    let n = a.dim;
    let cands = powers[s].kernel()?;
    // span to avoid: ker A^(s-1) plus every A^j (used top) that lies in ker A^s
    let mut avoid: Vec<Vec<PadicScalar>> = powers[s - 1].kernel()?;
    for top in used_tops {
        let mut v = top.clone();
        loop {
            if powers[s].mul_vec(&v).iter().all(|x| x.is_zero()) {
                avoid.push(v.clone());
            }
            v = a.mul_vec(&v);
            if v.iter().all(|x| x.is_zero()) {
                break;
            }
        }
    }
    let base_rank = rank(&avoid, n)?;
    for cand in &cands {
        let mut s2 = avoid.clone();
        s2.push(cand.clone());
        if rank(&s2, n)? > base_rank {
            return Ok(cand.clone());
        }
    }
    for i in 0..cands.len() {
        for j in i + 1..cands.len() {
            let sum: Vec<PadicScalar> = cands[i]
                .iter()
                .zip(&cands[j])
                .map(|(x, y)| x.add(y))
                .collect();
            let mut s2 = avoid.clone();
            s2.push(sum.clone());
            if rank(&s2, n)? > base_rank {
                return Ok(sum);
            }
        }
    }
    Err(ArithError::SingularSystem)
}

fn rank(vectors: &[Vec<PadicScalar>], n: usize) -> Result<usize> {
    if vectors.is_empty() {
        return Ok(0);
    }
    let mut rows: Vec<Vec<PadicScalar>> = vectors.to_vec();
    let mut r = 0usize;
    for col in 0..n {
        let Some(piv) = (r..rows.len()).find(|&i| !rows[i][col].is_zero()) else {
            continue;
        };
        rows.swap(r, piv);
        let d = rows[r][col].inv()?;
        for j in 0..n {
            rows[r][j] = rows[r][j].mul(&d);
        }
        for i in 0..rows.len() {
            if i != r && !rows[i][col].is_zero() {
                let f = rows[i][col].clone();
                for j in 0..n {
                    rows[i][j] = rows[i][j].sub(&f.mul(&rows[r][j]));
                }
            }
        }
        r += 1;
        if r == rows.len() {
            break;
        }
    }
    Ok(r)
}

/// The iterative acceptability repair loop: walks R_K in its total order and
/// fixes each pairing condition by chain modifications that keep the Jordan
/// property intact.
fn repair_basis(
    a: &MatQ,
    tuple: &GoodTuple,
    chains: &mut Vec<Vec<Vec<PadicScalar>>>,
) -> Result<()> {
    let p = a.prime();
    let n = a.dim;
    let om = omega0(p, n)?;
    let t = tuple.parts.len();
    let k = tuple.parts.clone();
    let prod = |ch: &Vec<Vec<Vec<PadicScalar>>>, i: usize, j: usize, i2: usize, j2: usize| {
        sym_pairing(&om, &ch[i][j - 1], &ch[i2][j2 - 1])
    };
    // B[l, i, j, c]: u_{i,j'} += c * u_{l, j'-j+1} for j' >= j
    let modify = |ch: &mut Vec<Vec<Vec<PadicScalar>>>, l: usize, i: usize, j: usize, c: &PadicScalar| {
        for jp in j..=k[i] {
            let src = ch[l][jp - j].clone();
            for r in 0..n {
                let v = ch[i][jp - 1][r].add(&c.mul(&src[r]));
                ch[i][jp - 1][r] = v;
            }
        }
    };
    let kmax = *k.iter().max().unwrap_or(&1);
    for l in 0..t {
        for j in 1..=kmax {
            for i in l..t {
                if j > k[i] {
                    continue;
                }
                let fk_l = tuple.involution(l);
                if i == l && (k[l] as i64 - j as i64).rem_euclid(2) == 0 {
                    // automatically zero by the shifting lemma
                    continue;
                }
                if j == 1 && i == fk_l {
                    // want a nonzero pairing <u_{l,k_l}, u_{i,1}>
                    if !prod(chains, l, k[l], i, 1).is_zero() {
                        continue;
                    }
                    let mut found = None;
                    'search: for i1 in 0..t {
                        for j1 in 1..=k[i1] {
                            if !prod(chains, l, 1, i1, j1).is_zero() {
                                found = Some((i1, j1));
                                break 'search;
                            }
                        }
                    }
                    let (i1, _j1) = found.ok_or(ArithError::SingularSystem)?;
                    let one = PadicScalar::one(p);
                    if i != l {
                        modify(chains, i1, i, 1, &one);
                    } else {
                        let mut trial = chains.clone();
                        modify(&mut trial, i1, i, 1, &one);
                        if !prod(&trial, l, k[l], i, 1).is_zero() {
                            *chains = trial;
                        } else {
                            modify(chains, i1, i, 1, &one.neg());
                        }
                    }
                    debug_assert!(!prod(chains, l, k[l], i, 1).is_zero());
                    continue;
                }
                // want zero
                let cur = prod(chains, l, k[l], i, j);
                if cur.is_zero() {
                    continue;
                }
                let denom = prod(chains, l, k[l], fk_l, 1);
                if denom.is_zero() {
                    return Err(ArithError::SingularSystem);
                }
                let c = if i == l {
                    cur.neg().div(&PadicScalar::from_i64(p, 2).mul(&denom))?
                } else {
                    cur.neg().div(&denom)?
                };
                modify(chains, fk_l, i, j, &c);
                debug_assert!(prod(chains, l, k[l], i, j).is_zero());
            }
        }
    }
    Ok(())
}

/// Check both bullets of the nilpotent-basis theorem exhaustively.
pub fn check_nilpotent_basis(m: &MatQ, tuple: &GoodTuple, basis: &MatQ) -> Result<bool> {
    let p = m.prime();
    let n = m.dim;
    let a = omega0_inv(p, n)?.mul(m);
    let om = omega0(p, n)?;
    let t = tuple.parts.len();
    let col = |i: usize, j: usize| -> Vec<PadicScalar> {
        let mut cidx = 0;
        for ii in 0..i {
            cidx += tuple.parts[ii];
        }
        cidx += j - 1;
        (0..n).map(|r| basis.at(r, cidx).clone()).collect()
    };
    for i in 0..t {
        for j in 1..=tuple.parts[i] {
            let got = a.mul_vec(&col(i, j));
            let want = if j == 1 {
                vec![PadicScalar::zero(p); n]
            } else {
                col(i, j - 1)
            };
            for r in 0..n {
                if !got[r].sub(&want[r]).is_zero() {
                    return Ok(false);
                }
            }
            for i2 in 0..t {
                for j2 in 1..=tuple.parts[i2] {
                    let v = sym_pairing(&om, &col(i, j), &col(i2, j2));
                    let expect_nonzero =
                        i2 == tuple.involution(i) && j + j2 == tuple.parts[i] + 1;
                    if expect_nonzero == v.is_zero() {
                        return Ok(false);
                    }
                }
            }
        }
    }
    Ok(true)
}

/// Deterministic random symplectic matrix: a product of at most 12 symplectic
/// transvections x -> x + c w(x, v) v and block scalings diag(k, 1/k) with
/// small rational parameters, driven by the seeded generator.
pub fn random_symplectic(p: Prime, dim: usize, rng: &mut SplitMix64) -> MatQ {
    let om = omega0(p, dim).unwrap();
    let mut s = om.identity_like();
    let steps = 4 + (rng.below(9) as usize);
    for _ in 0..steps {
        if rng.below(4) == 0 {
            let b = rng.below((dim / 2) as u64) as usize;
            let mut kfac = rng.small(3);
            if kfac == 0 {
                kfac = 1;
            }
            let mut g = om.identity_like();
            g.set(2 * b, 2 * b, PadicScalar::from_i64(p, kfac));
            g.set(2 * b + 1, 2 * b + 1, PadicScalar::from_ratio(p, 1, kfac));
            s = s.mul(&g);
        } else {
            let v: Vec<PadicScalar> = (0..dim)
                .map(|_| PadicScalar::from_i64(p, rng.small(2)))
                .collect();
            if v.iter().all(|x| x.is_zero()) {
                continue;
            }
            let c = PadicScalar::from_ratio(p, 1 + rng.small(1), 1 + rng.below(2) as i64);
            let ov = om.mul_vec(&v);
            let mut g = om.identity_like();
            for i in 0..dim {
                for j in 0..dim {
                    let add = c.mul(&v[i]).mul(&ov[j]);
                    let cur = g.at(i, j).add(&add);
                    g.set(i, j, cur);
                }
            }
            s = s.mul(&g);
        }
    }
    debug_assert!(is_symplectic(&s).unwrap());
    s
}

/// Deterministic random symmetric matrix with small integer entries.
pub fn random_symmetric(p: Prime, dim: usize, rng: &mut SplitMix64) -> MatQ {
    let mut m = omega0(p, dim).unwrap().zero_like();
    for i in 0..dim {
        for j in i..dim {
            let v = PadicScalar::from_i64(p, rng.small(6));
            m.set(i, j, v.clone());
            m.set(j, i, v);
        }
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(n: u64) -> Prime {
        Prime::new(n).unwrap()
    }

    fn s(pr: Prime, n: i64) -> PadicScalar {
        PadicScalar::from_i64(pr, n)
    }

    fn example_matrix(pr: Prime) -> MatQ {
        MatQ::from_i64_rows(
            pr,
            4,
            &[
                &[1, 2, 3, 4],
                &[2, 5, 6, 7],
                &[3, 6, 8, 9],
                &[4, 7, 9, 10],
            ],
        )
    }

    fn example_degenerate(pr: Prime) -> MatQ {
        MatQ::from_i64_rows(
            pr,
            4,
            &[
                &[2, 6, -2, -3],
                &[6, 11, 1, -5],
                &[-2, 1, -6, -2],
                &[-3, -5, -2, 3],
            ],
        )
    }

    #[test]
    fn omega_squares_to_minus_identity() {
        for d in [2usize, 4, 6] {
            let om = omega0(p(5), d).unwrap();
            let sq = om.mul(&om);
            assert!(sq.add(&om.identity_like()).is_zero());
        }
        assert!(omega0(p(5), 3).is_err());
    }

    #[test]
    fn symplectic_checks() {
        let pr = p(5);
        let id = omega0(pr, 4).unwrap().identity_like();
        assert!(is_symplectic(&id).unwrap());
        let mut d = id.clone();
        d.set(0, 0, s(pr, 3));
        d.set(1, 1, PadicScalar::from_ratio(pr, 1, 3));
        assert!(is_symplectic(&d).unwrap());
        let two = id.scale(&s(pr, 2));
        assert!(!is_symplectic(&two).unwrap());
    }

    #[test]
    fn char_poly_of_worked_examples() {
        let m = example_matrix(p(2));
        let (a, b) = char_poly_even(&m).unwrap();
        assert_eq!(a, s(p(2), -6));
        assert_eq!(b, s(p(2), -2));

        let zero = m.zero_like();
        let (a, b) = char_poly_even(&zero).unwrap();
        assert!(a.is_zero() && b.is_zero());

        let md = example_degenerate(p(5));
        let (a, b) = char_poly_even(&md).unwrap();
        // (t^2 - 5)^2 = t^4 - 10 t^2 + 25
        assert_eq!(a, s(p(5), -10));
        assert_eq!(b, s(p(5), 25));
    }

    #[test]
    fn eigen_structure_of_worked_matrix() {
        let m = example_matrix(p(5));
        match eigen_structure(&m).unwrap() {
            EigenTower::SplitPair { lambda_sq, mu_sq } => {
                assert!(lambda_sq.is_square().unwrap() ^ mu_sq.is_square().unwrap());
            }
            other => panic!("expected SplitPair at p=5, got {other:?}"),
        }
        let m = example_matrix(p(3));
        match eigen_structure(&m).unwrap() {
            EigenTower::QuadraticEigen { ext, lambda_sq, r, s } => {
                assert_eq!(ext.alpha_key(), -1);
                let lam = ext.elem(s, r);
                assert!(lam.mul(&lam).eq_to_precision(&lambda_sq));
            }
            other => panic!("expected QuadraticEigen at p=3, got {other:?}"),
        }
        let m = example_matrix(p(2));
        match eigen_structure(&m).unwrap() {
            EigenTower::QuarticEigen { tower, lambda_sq, r, s, .. } => {
                assert_eq!(tower.base().alpha_key(), 3);
                let e = tower.base();
                let w = e.elem(r, s);
                let lam2 = w.mul(&w).mul(tower.gamma_sq());
                assert!(lam2.eq_to_precision(&lambda_sq));
            }
            other => panic!("expected QuarticEigen at p=2, got {other:?}"),
        }
        let md = example_degenerate(p(5));
        match eigen_structure(&md).unwrap() {
            EigenTower::Degenerate(DegeneratePattern::DoublePairJordan { lambda_sq }) => {
                assert_eq!(lambda_sq, s(p(5), 5));
            }
            other => panic!("expected Jordan double pair, got {other:?}"),
        }
    }

    #[test]
    fn eigenvector_residual_vanishes() {
        let pr = p(7);
        let m = MatQ::from_i64_rows(pr, 2, &[&[0, 1], &[1, 0]]);
        let a = omega0_inv(pr, 2).unwrap().mul(&m);
        let v = eigenvector(&a, &s(pr, 1)).unwrap();
        let got = a.mul_vec(&v);
        for (g, w) in got.iter().zip(&v) {
            assert!(g.sub(w).is_zero());
        }
        let lead = v.iter().find(|x| !x.is_zero()).unwrap();
        assert_eq!(lead, &s(pr, 1)); // first nonzero coordinate normalized
    }

    #[test]
    fn nilpotent_basis_all_good_tuples() {
        let pr = p(5);
        let z = MatQ::from_i64_rows(pr, 4, &[&[0; 4], &[0; 4], &[0; 4], &[0; 4]]);
        let (k, b) = nilpotent_symplectic_basis(&z).unwrap();
        assert_eq!(k.parts, vec![1, 1, 1, 1]);
        assert!(check_nilpotent_basis(&z, &k, &b).unwrap());

        // rank-one Hessian of x^2: K = (2,1,1)
        let m = MatQ::from_i64_rows(
            pr,
            4,
            &[&[2, 0, 0, 0], &[0, 0, 0, 0], &[0, 0, 0, 0], &[0, 0, 0, 0]],
        );
        let (k, b) = nilpotent_symplectic_basis(&m).unwrap();
        assert_eq!(k.parts, vec![2, 1, 1]);
        assert!(check_nilpotent_basis(&m, &k, &b).unwrap());

        let m = MatQ::from_i64_rows(
            pr,
            4,
            &[&[2, 0, 0, 0], &[0, 0, 0, 0], &[0, 0, 10, 0], &[0, 0, 0, 0]],
        );
        let (k, b) = nilpotent_symplectic_basis(&m).unwrap();
        assert_eq!(k.parts, vec![2, 2]);
        assert!(check_nilpotent_basis(&m, &k, &b).unwrap());

        // the K = (4) chain matrix of the degenerate theorem's case (4)
        let m = MatQ::from_i64_rows(
            pr,
            4,
            &[&[1, 0, 0, 0], &[0, 0, 0, -1], &[0, 0, 0, 0], &[0, -1, 0, 0]],
        );
        let (k, b) = nilpotent_symplectic_basis(&m).unwrap();
        assert_eq!(k.parts, vec![4]);
        assert!(check_nilpotent_basis(&m, &k, &b).unwrap());
    }

    #[test]
    fn nilpotent_rejects_invertible() {
        let m = MatQ::from_i64_rows(p(5), 2, &[&[1, 0], &[0, 1]]);
        assert!(matches!(
            nilpotent_symplectic_basis(&m),
            Err(ArithError::NotNilpotent)
        ));
    }

    #[test]
    fn random_symplectic_is_symplectic() {
        let mut rng = SplitMix64::new(42);
        for pr in [2u64, 3, 5] {
            for dim in [2usize, 4] {
                for _ in 0..10 {
                    let s = random_symplectic(p(pr), dim, &mut rng);
                    assert!(is_symplectic(&s).unwrap());
                }
            }
        }
    }

    #[test]
    fn eigen_structure_invariant_under_conjugation() {
        let mut rng = SplitMix64::new(7);
        let pr = p(3);
        let m = example_matrix(pr);
        for _ in 0..5 {
            let t = random_symplectic(pr, 4, &mut rng);
            let m2 = t.transpose().mul(&m).mul(&t);
            match (eigen_structure(&m).unwrap(), eigen_structure(&m2).unwrap()) {
                (
                    EigenTower::QuadraticEigen { lambda_sq: l1, .. },
                    EigenTower::QuadraticEigen { lambda_sq: l2, .. },
                ) => {
                    assert!(l1.eq_to_precision(&l2));
                }
                other => panic!("variants changed under conjugation: {other:?}"),
            }
        }
    }
}
