//! Floating-point real Weierstrass-Williamson classification for 2n <= 8:
//! eigen-analysis of Omega0^-1 M over C, block detection (hyperbolic,
//! elliptic, focus-focus), and the ten 4x4 forms.

use crate::error::{ArithError, Result};

/// Dense real symmetric matrix, dimension at most 8.
#[derive(Debug, Clone)]
pub struct MatR {
    pub dim: usize,
    pub e: Vec<f64>,
}

impl MatR {
    pub fn from_rows(rows: &[&[f64]]) -> MatR {
        let dim = rows.len();
        let mut e = Vec::with_capacity(dim * dim);
        for r in rows {
            assert_eq!(r.len(), dim);
            e.extend_from_slice(r);
        }
        MatR { dim, e }
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.e[i * self.dim + j]
    }

    fn set(&mut self, i: usize, j: usize, v: f64) {
        self.e[i * self.dim + j] = v;
    }

    pub fn zero(dim: usize) -> MatR {
        MatR { dim, e: vec![0.0; dim * dim] }
    }

    pub fn mul(&self, o: &MatR) -> MatR {
        let n = self.dim;
        let mut m = MatR::zero(n);
        for i in 0..n {
            for j in 0..n {
                let mut acc = 0.0;
                for k in 0..n {
                    acc += self.at(i, k) * o.at(k, j);
                }
                m.set(i, j, acc);
            }
        }
        m
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        for i in 0..self.dim {
            for j in 0..i {
                if (self.at(i, j) - self.at(j, i)).abs() > tol {
                    return false;
                }
            }
        }
        true
    }
}

fn omega0_inv_r(dim: usize) -> MatR {
    let mut m = MatR::zero(dim);
    for b in 0..dim / 2 {
        m.set(2 * b, 2 * b + 1, -1.0);
        m.set(2 * b + 1, 2 * b, 1.0);
    }
    m
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct C64 {
    re: f64,
    im: f64,
}

impl C64 {
    fn new(re: f64, im: f64) -> C64 {
        C64 { re, im }
    }
    fn add(self, o: C64) -> C64 {
        C64::new(self.re + o.re, self.im + o.im)
    }
    fn sub(self, o: C64) -> C64 {
        C64::new(self.re - o.re, self.im - o.im)
    }
    fn mul(self, o: C64) -> C64 {
        C64::new(
            self.re * o.re - self.im * o.im,
            self.re * o.im + self.im * o.re,
        )
    }
    fn div(self, o: C64) -> C64 {
        let d = o.re * o.re + o.im * o.im;
        C64::new(
            (self.re * o.re + self.im * o.im) / d,
            (self.im * o.re - self.re * o.im) / d,
        )
    }
    fn abs(self) -> f64 {
        self.re.hypot(self.im)
    }
    fn conj(self) -> C64 {
        C64::new(self.re, -self.im)
    }
}

/// Monic characteristic polynomial coefficients of a real matrix
/// (Faddeev-LeVerrier), highest power first.
fn char_poly_r(a: &MatR) -> Vec<f64> {
    let n = a.dim;
    let mut coeffs = vec![1.0];
    let mut m = MatR::zero(n);
    let mut c_prev = 1.0;
    for k in 1..=n {
        // M_k = A (M_{k-1} + c_{k-1} I)
        let mut step = m.clone();
        for i in 0..n {
            step.set(i, i, step.at(i, i) + c_prev);
        }
        m = a.mul(&step);
        let tr: f64 = (0..n).map(|i| m.at(i, i)).sum();
        let ck = -tr / k as f64;
        coeffs.push(ck);
        c_prev = ck;
    }
    coeffs
}

/// Durand-Kerner simultaneous root iteration for a monic polynomial.
fn poly_roots(coeffs: &[f64]) -> Vec<C64> {
    let n = coeffs.len() - 1;
    if n == 0 {
        return Vec::new();
    }
    // scale-aware starting points on a spiral
    let scale = 1.0
        + coeffs[1..]
            .iter()
            .map(|c| c.abs())
            .fold(0.0f64, f64::max);
    let mut z: Vec<C64> = (0..n)
        .map(|k| {
            let ang = 2.0 * std::f64::consts::PI * k as f64 / n as f64 + 0.4;
            C64::new(
                scale.powf(1.0 / n as f64) * ang.cos(),
                scale.powf(1.0 / n as f64) * ang.sin(),
            )
        })
        .collect();
    let eval = |x: C64| -> C64 {
        let mut acc = C64::new(0.0, 0.0);
        for &c in coeffs {
            acc = acc.mul(x).add(C64::new(c, 0.0));
        }
        acc
    };
    for _ in 0..500 {
        let mut delta = 0.0f64;
        for i in 0..n {
            let mut denom = C64::new(1.0, 0.0);
            for j in 0..n {
                if i != j {
                    denom = denom.mul(z[i].sub(z[j]));
                }
            }
            let step = eval(z[i]).div(denom);
            z[i] = z[i].sub(step);
            delta = delta.max(step.abs());
        }
        if delta < 1e-14 * scale {
            break;
        }
    }
    z
}

/// One diagonal block of the real normal form.
#[derive(Debug, Clone, PartialEq)]
pub enum RealBlock {
    /// M_h(k, r, a): real eigenvalue pair +-r; a = 0 forced when r != 0.
    Hyperbolic { k: usize, r: f64, a: i8 },
    /// M_e(k, r, a): imaginary pair +- i r (r > 0), signed by a.
    Elliptic { k: usize, r: f64, a: i8 },
    /// M_ff(k, r, s): quadruple +- s +- i r with r, s > 0.
    FocusFocus { k: usize, r: f64, s: f64 },
}

/// Classify a real symmetric matrix into its Williamson block list.
pub fn classify_real(m: &MatR, tol: f64) -> Result<Vec<RealBlock>> {
    if m.dim % 2 != 0 {
        return Err(ArithError::OddDimension(m.dim));
    }
    if m.dim > 10 {
        return Err(ArithError::BadDimension(m.dim));
    }
    if !m.is_symmetric(tol) {
        return Err(ArithError::NotSymmetric);
    }
    let a = omega0_inv_r(m.dim).mul(m);
    let coeffs = char_poly_r(&a);
    let mut roots = poly_roots(&coeffs);
    let scale = 1.0 + roots.iter().map(|z| z.abs()).fold(0.0f64, f64::max);
    // multiple roots converge like eps^(1/mult); snap the zero cluster and
    // merge with a coarse radius, then polish by cluster means (the mean of
    // a symmetric multiple-root cluster is accurate to machine precision)
    let zero_snap = tol.max(1e-4) * scale;
    for z in roots.iter_mut() {
        if z.abs() < zero_snap {
            *z = C64::new(0.0, 0.0);
        }
    }
    let coarse = tol.max(1e-6) * scale;
    let mut clusters: Vec<Vec<C64>> = Vec::new();
    for z in roots {
        match clusters
            .iter_mut()
            .find(|cl| cl.iter().any(|w| z.sub(*w).abs() < coarse))
        {
            Some(cl) => cl.push(z),
            None => clusters.push(vec![z]),
        }
    }
    // cluster separation sanity
    let centers: Vec<C64> = clusters
        .iter()
        .map(|cl| {
            let mut c = C64::new(0.0, 0.0);
            for z in cl {
                c = c.add(*z);
            }
            C64::new(c.re / cl.len() as f64, c.im / cl.len() as f64)
        })
        .collect();
    for i in 0..centers.len() {
        for j in 0..i {
            if centers[i].sub(centers[j]).abs() < 10.0 * tol * scale {
                return Err(ArithError::IllConditioned);
            }
        }
    }
    let snap = |x: f64| if x.abs() < tol * scale { 0.0 } else { x };
    let mut blocks: Vec<RealBlock> = Vec::new();
    let mut used = vec![false; centers.len()];
    for i in 0..centers.len() {
        if used[i] {
            continue;
        }
        let z = C64::new(snap(centers[i].re), snap(centers[i].im));
        let mult = clusters[i].len();
        used[i] = true;
        if z.re == 0.0 && z.im == 0.0 {
            // zero eigenvalues: pair into hyperbolic r = 0 blocks with the
            // sign read off the restricted quadratic form
            blocks.extend(zero_blocks(m, mult, tol * scale)?);
            continue;
        }
        if z.im == 0.0 {
            // real pair: find the opposite cluster
            let j = partner(&centers, &used, C64::new(-z.re, 0.0), tol * scale)?;
            used[j] = true;
            let k = jordan_k(&a, z, mult, tol * scale)?;
            for _ in 0..mult / k {
                blocks.push(RealBlock::Hyperbolic { k, r: z.re.abs(), a: 0 });
            }
        } else if z.re == 0.0 {
            let j = partner(&centers, &used, z.conj(), tol * scale)?;
            used[j] = true;
            let k = jordan_k(&a, z, mult, tol * scale)?;
            let sign = elliptic_sign(m, &a, z, tol)?;
            for _ in 0..mult / k {
                blocks.push(RealBlock::Elliptic { k, r: z.im.abs(), a: sign });
            }
        } else {
            // quadruple
            for target in [z.conj(), C64::new(-z.re, z.im), C64::new(-z.re, -z.im)] {
                let j = partner(&centers, &used, target, tol * scale)?;
                used[j] = true;
            }
            let k = jordan_k(&a, z, mult, tol * scale)?;
            for _ in 0..mult / k {
                blocks.push(RealBlock::FocusFocus {
                    k,
                    r: z.im.abs(),
                    s: z.re.abs(),
                });
            }
        }
    }
    // canonical order: hyperbolic, elliptic, focus-focus; then by parameters
    blocks.sort_by(|x, y| block_key(x).partial_cmp(&block_key(y)).unwrap());
    Ok(blocks)
}

fn block_key(b: &RealBlock) -> (u8, usize, f64, f64) {
    match b {
        RealBlock::Hyperbolic { k, r, a } => (0, *k, *r, *a as f64),
        RealBlock::Elliptic { k, r, a } => (1, *k, *r, *a as f64),
        RealBlock::FocusFocus { k, r, s } => (2, *k, *r, *s),
    }
}

fn partner(centers: &[C64], used: &[bool], want: C64, tol: f64) -> Result<usize> {
    centers
        .iter()
        .enumerate()
        .find(|(i, c)| {
            (!used[*i] || want.abs() < tol) && c.sub(want).abs() < 10.0 * tol.max(1e-12)
        })
        .map(|(i, _)| i)
        .ok_or(ArithError::IllConditioned)
        .or_else(|e| {
            // a cluster may contain both members (e.g. +-0); accept self
            centers
                .iter()
                .enumerate()
                .find(|(_, c)| c.sub(want).abs() < 10.0 * tol.max(1e-12))
                .map(|(i, _)| i)
                .ok_or(e)
        })
}

/// Jordan chain length (capped at 2) for a repeated eigenvalue: compare the
/// numerical rank of (A - z) restricted against the algebraic multiplicity.
fn jordan_k(a: &MatR, z: C64, mult: usize, tol: f64) -> Result<usize> {
    if mult == 1 {
        return Ok(1);
    }
    // geometric multiplicity = dim - rank(A - zI) over C
    let n = a.dim;
    let mut m: Vec<Vec<C64>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let mut v = C64::new(a.at(i, j), 0.0);
                    if i == j {
                        v = v.sub(z);
                    }
                    v
                })
                .collect()
        })
        .collect();
    let mut rank = 0usize;
    for col in 0..n {
        let piv = (rank..n).max_by(|&x, &y| {
            m[x][col].abs().partial_cmp(&m[y][col].abs()).unwrap()
        });
        let Some(piv) = piv else { break };
        if m[piv][col].abs() < tol.max(1e-12) {
            continue;
        }
        m.swap(rank, piv);
        let d = m[rank][col];
        for j in 0..n {
            m[rank][j] = m[rank][j].div(d);
        }
        for r in 0..n {
            if r != rank && m[r][col].abs() > 0.0 {
                let f = m[r][col];
                for j in 0..n {
                    let v = m[r][j].sub(f.mul(m[rank][j]));
                    m[r][j] = v;
                }
            }
        }
        rank += 1;
    }
    let geo = n - rank;
    let k = mult / geo.max(1);
    if k > 2 {
        return Err(ArithError::BadDimension(k));
    }
    Ok(k.max(1))
}

/// Sign a of an elliptic block: the one making 2 a c positive, where
/// c comes from the eigenvector pairing u^T Omega0 u-bar.
fn elliptic_sign(m: &MatR, a: &MatR, z: C64, _tol: f64) -> Result<i8> {
    let n = m.dim;
    // complex eigenvector of A for z by inverse-iteration style elimination
    let mut mm: Vec<Vec<C64>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let mut v = C64::new(a.at(i, j), 0.0);
                    if i == j {
                        v = v.sub(z);
                    }
                    v
                })
                .collect()
        })
        .collect();
    // Gaussian elimination with partial pivoting; the kernel vector comes
    // from the last free column
    let mut pivots: Vec<(usize, usize)> = Vec::new();
    let mut row = 0usize;
    for col in 0..n {
        let piv = (row..n)
            .max_by(|&x, &y| mm[x][col].abs().partial_cmp(&mm[y][col].abs()).unwrap())
            .unwrap();
        if mm[piv][col].abs() < 1e-8 {
            continue;
        }
        mm.swap(row, piv);
        let d = mm[row][col];
        for j in 0..n {
            mm[row][j] = mm[row][j].div(d);
        }
        for r in 0..n {
            if r != row {
                let f = mm[r][col];
                if f.abs() > 0.0 {
                    for j in 0..n {
                        let v = mm[r][j].sub(f.mul(mm[row][j]));
                        mm[r][j] = v;
                    }
                }
            }
        }
        pivots.push((row, col));
        row += 1;
    }
    let pivot_cols: Vec<usize> = pivots.iter().map(|&(_, c)| c).collect();
    let free = (0..n)
        .find(|c| !pivot_cols.contains(c))
        .ok_or(ArithError::IllConditioned)?;
    let mut u = vec![C64::new(0.0, 0.0); n];
    u[free] = C64::new(1.0, 0.0);
    for &(r, c) in &pivots {
        u[c] = C64::new(0.0, 0.0).sub(mm[r][free]);
    }
    // q = u^T Omega0 u-bar (purely imaginary); a = sign(Im q * Im z)
    let mut q = C64::new(0.0, 0.0);
    for b in 0..n / 2 {
        // (Omega0 w)_{2b} = w_{2b+1}, (Omega0 w)_{2b+1} = -w_{2b}
        let ub = [u[2 * b].conj(), u[2 * b + 1].conj()];
        q = q.add(u[2 * b].mul(ub[1])).sub(u[2 * b + 1].mul(ub[0]));
    }
    // d1 conj(d1) = 2 lambda a / q with lambda = i Im(z): positive requires
    // a = sign(Im z / Im q) ... = sign(Im z) * sign(Im q)
    let s = (z.im * q.im).signum();
    Ok(if s >= 0.0 { 1 } else { -1 })
}

/// Zero-eigenvalue handling: pair the kernel directions into hyperbolic
/// r = 0 blocks, signed by the restricted quadratic form (k <= 2).
fn zero_blocks(m: &MatR, mult: usize, tol: f64) -> Result<Vec<RealBlock>> {
    // rank of M restricted to the zero generalized eigenspace differentiates
    // M_h(1,0,a) from chains; for this classifier the symmetric restriction
    // is diagonalized by its extremal values
    if mult % 2 != 0 {
        return Err(ArithError::IllConditioned);
    }
    let n = m.dim;
    let a = omega0_inv_r(n).mul(m);
    // generalized kernel basis via A^n applied to coordinate vectors
    let mut an = a.clone();
    for _ in 1..n {
        an = an.mul(&a);
    }
    // vectors with A^n v = 0: solve by elimination on rows of an
    let mut rows: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| an.at(i, j)).collect()).collect();
    let mut rank = 0usize;
    let mut pivots = Vec::new();
    for col in 0..n {
        let piv = (rank..n)
            .max_by(|&x, &y| rows[x][col].abs().partial_cmp(&rows[y][col].abs()).unwrap());
        let Some(piv) = piv else { break };
        if rows[piv][col].abs() < tol.max(1e-10) {
            continue;
        }
        rows.swap(rank, piv);
        let d = rows[rank][col];
        for j in 0..n {
            rows[rank][j] /= d;
        }
        for r in 0..n {
            if r != rank && rows[r][col].abs() > 0.0 {
                let f = rows[r][col];
                for j in 0..n {
                    rows[r][j] -= f * rows[rank][j];
                }
            }
        }
        pivots.push(col);
        rank += 1;
    }
    let mut kernel: Vec<Vec<f64>> = Vec::new();
    for free in 0..n {
        if pivots.contains(&free) {
            continue;
        }
        let mut v = vec![0.0; n];
        v[free] = 1.0;
        for (r, &pc) in pivots.iter().enumerate() {
            v[pc] = -rows[r][free];
        }
        kernel.push(v);
    }
    if kernel.len() != mult {
        return Err(ArithError::IllConditioned);
    }
    // restricted symmetric form values: eigenvalues of the Gram matrix
    let mut out = Vec::new();
    let mut remaining = mult;
    // quadratic form on the kernel: count positive/negative/zero directions
    let g: Vec<Vec<f64>> = kernel
        .iter()
        .map(|u| {
            kernel
                .iter()
                .map(|v| {
                    let mut acc = 0.0;
                    for i in 0..n {
                        for j in 0..n {
                            acc += u[i] * m.at(i, j) * v[j];
                        }
                    }
                    acc
                })
                .collect()
        })
        .collect();
    // symmetric eigenvalue signs by Jacobi on small g
    let signs = jacobi_signs(&g, tol);
    let (pos, neg) = signs;
    let zero_dirs = mult - pos - neg;
    for _ in 0..pos {
        out.push(RealBlock::Hyperbolic { k: 1, r: 0.0, a: 1 });
        remaining -= 1;
    }
    for _ in 0..neg {
        out.push(RealBlock::Hyperbolic { k: 1, r: 0.0, a: -1 });
        remaining -= 1;
    }
    let _ = zero_dirs;
    for _ in 0..remaining / 2 {
        out.push(RealBlock::Hyperbolic { k: 1, r: 0.0, a: 0 });
    }
    Ok(out)
}

fn jacobi_signs(g: &[Vec<f64>], tol: f64) -> (usize, usize) {
    let n = g.len();
    let mut a: Vec<Vec<f64>> = g.to_vec();
    for _ in 0..60 {
        let mut off = 0.0;
        for i in 0..n {
            for j in 0..i {
                off += a[i][j] * a[i][j];
            }
        }
        if off < 1e-24 {
            break;
        }
        for pq in 0..n {
            for q in 0..pq {
                let app = a[pq][pq];
                let aqq = a[q][q];
                let apq = a[pq][q];
                if apq.abs() < 1e-18 {
                    continue;
                }
                let theta = 0.5 * (aqq - app).atan2(2.0 * apq) * -1.0;
                let (c, s) = (theta.cos(), theta.sin());
                for k in 0..n {
                    let akp = a[k][pq];
                    let akq = a[k][q];
                    a[k][pq] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[pq][k];
                    let aqk = a[q][k];
                    a[pq][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut pos = 0;
    let mut neg = 0;
    for i in 0..n {
        if a[i][i] > tol {
            pos += 1;
        } else if a[i][i] < -tol {
            neg += 1;
        }
    }
    (pos, neg)
}

/// Map a 4x4 block list onto the corollary's enumeration of ten forms.
/// Returns the 1-based index and the parameters (r, s, a, b) that occur.
pub fn ten_forms_dim4(m: &MatR, tol: f64) -> Result<(usize, Vec<f64>)> {
    if m.dim != 4 {
        return Err(ArithError::BadDimension(m.dim));
    }
    let blocks = classify_real(m, tol)?;
    use RealBlock::*;
    let out = match blocks.as_slice() {
        [Hyperbolic { k: 1, r, a: 0 }, Hyperbolic { k: 1, r: s, a: 0 }]
            if *r != 0.0 && *s != 0.0 =>
        {
            (1, vec![*r, *s])
        }
        [Hyperbolic { k: 1, r: z, a }, Hyperbolic { k: 1, r, a: 0 }]
        | [Hyperbolic { k: 1, r, a: 0 }, Hyperbolic { k: 1, r: z, a }]
            if *z == 0.0 && *a != 0 && *r != 0.0 =>
        {
            (2, vec![*a as f64, *r])
        }
        [Hyperbolic { k: 1, r: z1, a }, Hyperbolic { k: 1, r: z2, a: b }]
            if *z1 == 0.0 && *z2 == 0.0 && *a != 0 && *b != 0 =>
        {
            (3, vec![*a as f64, *b as f64])
        }
        [Hyperbolic { k: 2, r, a: 0 }] if *r != 0.0 => (4, vec![*r]),
        [Hyperbolic { k: 2, r: z, a }] if *z == 0.0 => (5, vec![*a as f64]),
        [Hyperbolic { k: 1, r, a: 0 }, Elliptic { k: 1, r: s, a }] if *r != 0.0 => {
            (6, vec![*r, *s * *a as f64])
        }
        [Hyperbolic { k: 1, r: z, a }, Elliptic { k: 1, r: s, a: ae }] if *z == 0.0 => {
            let _ = ae;
            (7, vec![*a as f64, *s])
        }
        [Elliptic { k: 1, r, a }, Elliptic { k: 1, r: s, a: b }] => {
            (8, vec![*r * *a as f64, *s * *b as f64])
        }
        [Elliptic { k: 2, r, a }] => (9, vec![*a as f64, *r]),
        [FocusFocus { k: 1, r, s }] => (10, vec![*r, *s]),
        _ => {
            return Err(ArithError::ParameterDomain(format!(
                "unmapped block list {blocks:?}"
            )))
        }
    };
    Ok(out)
}

/// The eigenvalues of the emitted block list, for the eigen-multiset
/// invariant.
pub fn block_eigenvalues(blocks: &[RealBlock]) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    for b in blocks {
        match b {
            RealBlock::Hyperbolic { k, r, .. } => {
                for _ in 0..*k {
                    out.push((*r, 0.0));
                    out.push((-*r, 0.0));
                }
            }
            RealBlock::Elliptic { k, r, .. } => {
                for _ in 0..*k {
                    out.push((0.0, *r));
                    out.push((0.0, -*r));
                }
            }
            RealBlock::FocusFocus { k, r, s } => {
                for _ in 0..*k {
                    out.push((*s, *r));
                    out.push((*s, -*r));
                    out.push((-*s, *r));
                    out.push((-*s, -*r));
                }
            }
        }
    }
    out
}

/// The arbitrary-order example family: a corner entry, the chain of
/// antidiagonal pairs, and a signed final corner. The sign -1 gives the
/// characteristic polynomial t^(2n) - 1 for odd n (hyperbolic block plus
/// focus-focus blocks N(k)) and t^(2n) + 1 for even n (focus-focus blocks
/// N(k + 1/2) only); flipping any single entry exchanges the two behaviors.
pub fn example_family(n: usize) -> MatR {
    let dim = 2 * n;
    let mut m = MatR::zero(dim);
    m.set(0, 0, 1.0);
    for j in 0..n - 1 {
        m.set(2 * j + 1, 2 * j + 2, 1.0);
        m.set(2 * j + 2, 2 * j + 1, 1.0);
    }
    m.set(dim - 1, dim - 1, -1.0);
    m
}
