//! The classification engines: 2x2 p-adic normal forms, 4x4 non-degenerate
//! (three cases) and degenerate (four cases) normal forms, normal-form matrix
//! emission, equivalence testing, and witness symplectic matrices where the
//! construction is directly implementable.

use crate::error::{ArithError, Result};
use crate::ext::{
    dsq_ext_member, ext_square_class, ExtElem, QuadExt, TowerElem,
};
use crate::padic::{self, PadicScalar, Prime};
use crate::symplin::{
    eigen_structure, eigenvector, mat_to_ext, mat_to_tower,
    nilpotent_symplectic_basis, omega0, omega0_inv, sym_pairing, DegeneratePattern, EigenTower,
    Field, Mat, MatQ,
};

/// One 2x2 block of a diagonal normal form: diag(r, c r).
#[derive(Debug, Clone)]
pub struct Block2 {
    pub c: PadicScalar,
    pub r: PadicScalar,
}

/// A classification outcome.
#[derive(Debug, Clone)]
pub enum NormalForm {
    /// diag(r, c r) with c in X_p (r free) or c = 0 (r in Y_p + {1}, or 0).
    Dim2(Block2),
    /// Non-degenerate split case: diag(r, c1 r, s, c2 s), c_i in X_p.
    Dim4Case1 { b1: Block2, b2: Block2 },
    /// Focus-type case: c in Y_p, lambda = s + r alpha.
    Dim4Case2 {
        c: PadicScalar,
        r: PadicScalar,
        s: PadicScalar,
    },
    /// Quartic-extension case: one row of the canonical table plus
    /// (a, b) in {(1,0), (a1,b1)} and lambda = (r + s alpha) gamma.
    Dim4Case3 {
        c: PadicScalar,
        t1: PadicScalar,
        t2: PadicScalar,
        a: PadicScalar,
        b: PadicScalar,
        r: PadicScalar,
        s: PadicScalar,
    },
    /// Degenerate case (1): two diagonal blocks, c_i in X_p + {0}.
    Deg1 { b1: Block2, b2: Block2 },
    /// Degenerate case (2): the Jordan family with rational eigenvalue r.
    Deg2 { r: PadicScalar },
    /// Degenerate case (3): c in Y_p, a in {1, h_p(c)}.
    Deg3 {
        c: PadicScalar,
        r: PadicScalar,
        a: PadicScalar,
    },
    /// Degenerate case (4): the corner form, c in Y_p + {1}.
    Deg4 { c: PadicScalar },
}

/// The non-residue function h_p on Y_p.
pub fn h_p(p: Prime, c: &PadicScalar) -> Result<PadicScalar> {
    let s = |n: i64| PadicScalar::from_i64(p, n);
    let ci = c
        .rational()
        .and_then(|q| {
            if q.is_integer() {
                i64::try_from(q.numer().clone()).ok()
            } else {
                None
            }
        })
        .ok_or_else(|| ArithError::ParameterDomain(format!("h_p on non-representative {c}")))?;
    let pi = p.get() as i64;
    match p.mod4() {
        1 => {
            let c0 = padic::smallest_nonresidue(p)? as i64;
            if ci == c0 {
                Ok(s(pi))
            } else if ci == pi || ci == c0 * pi {
                Ok(s(c0))
            } else {
                Err(ArithError::ParameterDomain(format!("{c} not in Y_p")))
            }
        }
        3 => {
            if ci == -1 {
                Ok(s(pi))
            } else if ci == pi || ci == -pi {
                Ok(s(-1))
            } else {
                Err(ArithError::ParameterDomain(format!("{c} not in Y_p")))
            }
        }
        2 => match ci {
            -1 | -2 | 3 | 6 => Ok(s(-1)),
            -3 | -6 => Ok(s(2)),
            2 => Ok(s(3)),
            _ => Err(ArithError::ParameterDomain(format!("{c} not in Y_2"))),
        },
        _ => unreachable!(),
    }
}

/// Position of c in the X_p list; used for canonical block ordering.
fn xp_index(p: Prime, c: &PadicScalar) -> usize {
    if c.is_zero() {
        return usize::MAX;
    }
    let (xs, _) = padic::nonresidue_sets(p);
    xs.iter()
        .position(|x| x == c)
        .expect("block parameter lies in X_p")
}

fn order_blocks(p: Prime, b1: Block2, b2: Block2) -> (Block2, Block2, bool) {
    let k1 = (xp_index(p, &b1.c), b1.r.to_string());
    let k2 = (xp_index(p, &b2.c), b2.r.to_string());
    if k2 < k1 {
        (b2, b1, true)
    } else {
        (b1, b2, false)
    }
}

/// Classify a symmetric 2x2 matrix over Q_p into its unique normal form
/// diag(r, c r).
pub fn classify2(m: &MatQ) -> Result<NormalForm> {
    if m.dim != 2 {
        return Err(ArithError::BadDimension(m.dim));
    }
    if !m.is_symmetric() {
        return Err(ArithError::NotSymmetric);
    }
    Ok(NormalForm::Dim2(classify2_block(m)?))
}

fn hyperbolic_c(p: Prime) -> PadicScalar {
    // the split 2x2 family carries c = 1 when -1 is a square, c = -1 otherwise
    if p.mod4() == 1 {
        PadicScalar::one(p)
    } else {
        PadicScalar::from_i64(p, -1)
    }
}

fn classify2_block(m: &MatQ) -> Result<Block2> {
    let b = classify2_block_raw(m)?;
    // when [-1] is a value of the norm form the sign of r is free, and the
    // digit-minimal representative is the canonical one
    Ok(canon_block(&b))
}

fn classify2_block_raw(m: &MatQ) -> Result<Block2> {
    let p = m.prime();
    let det = m
        .at(0, 0)
        .mul(m.at(1, 1))
        .sub(&m.at(0, 1).mul(m.at(1, 0)));
    if det.is_zero() {
        if m.is_zero() {
            return Ok(Block2 {
                c: hyperbolic_c(p),
                r: PadicScalar::zero(p),
            });
        }
        // rank one: c = 0 and r the unique class representative with a r a square
        let a = if !m.at(0, 0).is_zero() {
            m.at(0, 0).clone()
        } else {
            m.at(1, 1).clone()
        };
        debug_assert!(!a.is_zero(), "rank-one symmetric 2x2 has a nonzero diagonal");
        let r = padic::class_representative(p, padic::square_class(&a)?);
        return Ok(Block2 {
            c: PadicScalar::zero(p),
            r,
        });
    }
    let lambda_sq = det.neg();
    if lambda_sq.is_square()? {
        // eigenvalues in Q_p: the split family
        let c = hyperbolic_c(p);
        // diag(r, cr) has lambda^2 = -c r^2
        let r_sq = lambda_sq.div(&c.neg())?;
        let r = r_sq.sqrt()?.expect("-lambda^2 / c is a square here");
        return Ok(Block2 { c, r });
    }
    // elliptic: candidates are the X_p entries in the class of -lambda^2
    let target = padic::square_class(&lambda_sq.neg())?;
    let (xs, _) = padic::nonresidue_sets(p);
    let cands: Vec<PadicScalar> = xs
        .into_iter()
        .filter(|c| padic::square_class(c).map(|k| k == target).unwrap_or(false))
        .collect();
    debug_assert!(!cands.is_empty() && cands.len() <= 2);
    let c1 = cands[0].clone();
    let a1 = lambda_sq
        .neg()
        .div(&c1)?
        .sqrt()?
        .expect("-lambda^2/c1 is a square by class choice");
    // the DSq condition 2 lambda a / (u^T Omega0 u-bar) for a = a1
    let w = elliptic_membership_value(m, &lambda_sq, &a1)?;
    let member = padic::dsq_member(&c1, &w)?;
    if member {
        return Ok(Block2 { c: c1, r: a1 });
    }
    if cands.len() == 2 {
        // second candidate c1 k^2 with a = a1 / k
        let k = cands[1]
            .div(&c1)?
            .sqrt()?
            .expect("candidates differ by a rational square");
        let a = a1.div(&k)?;
        let w2 = w.div(&k)?;
        debug_assert!(padic::dsq_member(&c1, &w2)?);
        Ok(Block2 {
            c: cands[1].clone(),
            r: a,
        })
    } else {
        // single candidate: the sign flip works instead
        let w2 = w.neg();
        debug_assert!(padic::dsq_member(&c1, &w2)?);
        Ok(Block2 { c: c1, r: a1.neg() })
    }
}

/// 2 lambda a / (u^T Omega0 u-bar) for the eigenvector u of lambda over
/// Q_p[alpha]; the value lies in Q_p.
fn elliptic_membership_value(
    m: &MatQ,
    lambda_sq: &PadicScalar,
    a: &PadicScalar,
) -> Result<PadicScalar> {
    let p = m.prime();
    let ext = QuadExt::of_class(lambda_sq)?;
    let e = lambda_sq.div(ext.alpha_sq())?.sqrt()?.unwrap();
    let lambda = ext.elem(PadicScalar::zero(p), e.clone());
    let a_mat = omega0_inv(p, 2)?.mul(m);
    let a_ext = mat_to_ext(&a_mat, &ext);
    let u = eigenvector(&a_ext, &lambda)?;
    let ubar: Vec<ExtElem> = u.iter().map(|z| z.conj()).collect();
    let om = mat_to_ext(&omega0(p, 2)?, &ext);
    let pairing = sym_pairing(&om, &u, &ubar);
    // the pairing is alpha-odd: q alpha; the quotient is 2 e a / q
    debug_assert!(pairing.a.is_zero_to_precision());
    let q = pairing.b.clone();
    let two = PadicScalar::from_i64(p, 2);
    two.mul(&e).mul(a).div(&q)
}

/// Classify a symmetric 4x4 matrix over Q_p into its unique normal form.
pub fn classify4(m: &MatQ) -> Result<NormalForm> {
    if m.dim != 4 {
        return Err(ArithError::BadDimension(m.dim));
    }
    if !m.is_symmetric() {
        return Err(ArithError::NotSymmetric);
    }
    let p = m.prime();
    match eigen_structure(m)? {
        EigenTower::Single { .. } => unreachable!("dim 4 input"),
        EigenTower::SplitPair { lambda_sq, .. } => {
            let (bl1, bl2) = split_blocks(m, &lambda_sq)?;
            let b1 = classify2_block(&bl1)?;
            let b2 = classify2_block(&bl2)?;
            let (b1, b2, _) = order_blocks(p, b1, b2);
            Ok(NormalForm::Dim4Case1 { b1, b2 })
        }
        EigenTower::QuadraticEigen { ext, r, s, .. } => Ok(NormalForm::Dim4Case2 {
            c: ext.alpha_sq().clone(),
            r: canonical_sign(&r),
            s: canonical_sign(&s),
        }),
        EigenTower::QuarticEigen {
            tower,
            gamma_class,
            lambda_sq_orig,
            r,
            s,
            ..
        } => {
            let ext = tower.base().clone();
            let row = crate::ext::canonical_row(&ext, gamma_class)?;
            // (a, b) is decided in the constructive configuration of the
            // proof: gamma^2 the generator-product representative of the
            // class of the first root, u its eigenvector
            let (a, b) = case3_ab(m, &lambda_sq_orig, &row.a1, &row.b1)?;
            // cohere the sign of (r, s) with the decided (a, b): the table
            // configuration must reproduce the same choice
            let (a_tab, _) = case3_ab_in(
                m,
                &tower,
                gamma_class,
                &ext.elem(r.clone(), s.clone()),
                &row.a1,
                &row.b1,
            )?;
            let (r, s) = if a_tab.eq_to_precision(&a) {
                (r, s)
            } else {
                (r.neg(), s.neg())
            };
            Ok(NormalForm::Dim4Case3 {
                c: ext.alpha_sq().clone(),
                t1: row.t1,
                t2: row.t2,
                a,
                b,
                r,
                s,
            })
        }
        EigenTower::Degenerate(pat) => classify4_degenerate(m, pat),
    }
}

/// The (a, b) decision of case (3), run in the configuration of the proof:
/// gamma^2 is the generator-product representative of the class of the given
/// root and u is its eigenvector in the tower over that representative.
fn case3_ab(
    m: &MatQ,
    lambda_sq: &ExtElem,
    a1: &PadicScalar,
    b1: &PadicScalar,
) -> Result<(PadicScalar, PadicScalar)> {
    let ext = lambda_sq.ext().clone();
    let cls = ext_square_class(lambda_sq)?;
    let rep = crate::ext::class_representative_ext(&ext, cls);
    let tower = crate::ext::TowerExt::new(rep)?;
    let ratio = lambda_sq.div(tower.gamma_sq())?;
    let w = crate::ext::sqrt_ext(&ratio)?.expect("same square class");
    case3_ab_in(m, &tower, cls, &w, a1, b1)
}

/// The (a, b) membership test for a fixed tower, class row and root
/// lambda = w gamma.
fn case3_ab_in(
    m: &MatQ,
    tower: &crate::ext::TowerExt,
    row_class: crate::ext::ExtSquareClass,
    w: &ExtElem,
    a1: &PadicScalar,
    b1: &PadicScalar,
) -> Result<(PadicScalar, PadicScalar)> {
    let p = m.prime();
    let ext = tower.base().clone();
    let lam = tower.elem(ext.zero(), w.clone());
    let a_mat = omega0_inv(p, 4)?.mul(m);
    let a_tow = mat_to_tower(&a_mat, tower);
    let u = eigenvector(&a_tow, &lam)?;
    let uhat: Vec<TowerElem> = u.iter().map(|z| z.hat_conj()).collect();
    let om = mat_to_tower(&omega0(p, 4)?, tower);
    let pairing = sym_pairing(&om, &u, &uhat);
    // hat-odd pairing: w gamma
    debug_assert!(pairing.x.f_is_zero());
    let wden = pairing.y.clone();
    let one = PadicScalar::one(p);
    let test = |aa: &PadicScalar, bb: &PadicScalar| -> Result<bool> {
        // a alpha gamma (b + alpha) / (w gamma) = a alpha (b + alpha) / w
        let val = ext
            .elem(bb.clone(), one.clone())
            .mul(&ext.alpha())
            .scale(aa)
            .div(&wden)?;
        let cls = ext_square_class(&val)?;
        dsq_ext_member(&ext, row_class, cls)
    };
    let zero = PadicScalar::zero(p);
    if test(&one, &zero)? {
        Ok((one, zero))
    } else {
        debug_assert!(test(a1, b1)?);
        Ok((a1.clone(), b1.clone()))
    }
}

fn classify4_degenerate(m: &MatQ, pat: DegeneratePattern) -> Result<NormalForm> {
    let p = m.prime();
    match pat {
        DegeneratePattern::DoublePairDiagonalizable { .. } => {
            let (bl1, bl2) = split_double_pair(m)?;
            let b1 = normalize_deg_block(classify2_block(&bl1)?, &bl1);
            let b2 = normalize_deg_block(classify2_block(&bl2)?, &bl2);
            let (b1, b2, _) = order_blocks(p, b1, b2);
            Ok(NormalForm::Deg1 { b1, b2 })
        }
        DegeneratePattern::SemiNilpotent { lambda_sq } => {
            let (bl1, bl2) = split_blocks(m, &lambda_sq)?;
            let b1 = normalize_deg_block(classify2_block(&bl1)?, &bl1);
            let b2 = normalize_deg_block(classify2_block(&bl2)?, &bl2);
            let (b1, b2, _) = order_blocks(p, b1, b2);
            Ok(NormalForm::Deg1 { b1, b2 })
        }
        DegeneratePattern::DoublePairJordan { lambda_sq } => {
            if lambda_sq.is_square()? {
                let r = lambda_sq.sqrt()?.unwrap();
                return Ok(NormalForm::Deg2 { r });
            }
            let c = padic::class_representative(p, padic::square_class(&lambda_sq)?);
            let r = lambda_sq.div(&c)?.sqrt()?.unwrap();
            let a = deg3_unit(m, &c, &lambda_sq)?;
            Ok(NormalForm::Deg3 { c, r, a })
        }
        DegeneratePattern::Nilpotent => {
            let (tuple, basis) = nilpotent_symplectic_basis(m)?;
            nilpotent_normal_form(m, &tuple, &basis)
        }
    }
}

/// The a-parameter of degenerate case (3): a = 1 when
/// -4 alpha^2 k / (1 - alpha^2) lies in DSq(Q_p, -c), else h_p(c).
fn deg3_unit(m: &MatQ, c: &PadicScalar, lambda_sq: &PadicScalar) -> Result<PadicScalar> {
    let p = m.prime();
    let ext = QuadExt::new(p, c.clone())?;
    let e = lambda_sq.div(c)?.sqrt()?.unwrap();
    let lambda = ext.elem(PadicScalar::zero(p), e);
    let a_mat = omega0_inv(p, 4)?.mul(m);
    let a_ext = mat_to_ext(&a_mat, &ext);
    let u = eigenvector(&a_ext, &lambda)?;
    // Jordan partner: (A - lambda) v = u
    let shifted = a_ext.sub(&a_ext.identity_like().scale(&lambda));
    let mut v = solve_linear(&shifted, &u)?;
    let om = mat_to_ext(&omega0(p, 4)?, &ext);
    let conj = |w: &Vec<ExtElem>| -> Vec<ExtElem> { w.iter().map(|z| z.conj()).collect() };
    // normalize v so that <v, v-bar> = 0 (shift by a multiple of u)
    let beta_e = sym_pairing(&om, &u, &conj(&v));
    debug_assert!(beta_e.b.is_zero_to_precision(), "beta is rational");
    let beta = beta_e.a.clone();
    let delta = sym_pairing(&om, &v, &conj(&v));
    debug_assert!(delta.a.is_zero_to_precision(), "delta is alpha-odd");
    let two = PadicScalar::from_i64(p, 2);
    let d2 = delta.b.neg().div(&two.mul(&beta))?;
    let shift = ext.elem(PadicScalar::zero(p), d2);
    for (vi, ui) in v.iter_mut().zip(&u) {
        *vi = vi.add(&ui.mul(&shift));
    }
    debug_assert!(sym_pairing(&om, &v, &conj(&v)).b.is_zero_to_precision());
    // the eigenvector of -lambda is k u-bar with k = -1/beta
    let k = beta.inv()?.neg();
    let four = PadicScalar::from_i64(p, 4);
    let one = PadicScalar::one(p);
    let t = four.neg().mul(c).mul(&k).div(&one.sub(c))?;
    if padic::dsq_member(&c.neg(), &t)? {
        Ok(one)
    } else {
        let h = h_p(p, c)?;
        debug_assert!(padic::dsq_member(&c.neg(), &t.div(&h)?)?);
        Ok(h)
    }
}

/// Solve A x = b by Gaussian elimination (consistent systems; free variables
/// set to zero).
fn solve_linear<T: Field>(a: &Mat<T>, b: &[T]) -> Result<Vec<T>> {
    let n = a.dim;
    let mut m = a.clone();
    let mut rhs: Vec<T> = b.to_vec();
    let mut pivots: Vec<(usize, usize)> = Vec::new();
    let mut row = 0usize;
    for col in 0..n {
        let Some(piv) = (row..n).find(|&r| !m.at(r, col).f_is_zero()) else {
            continue;
        };
        if piv != row {
            for j in 0..n {
                let x = m.at(row, j).clone();
                m.set(row, j, m.at(piv, j).clone());
                m.set(piv, j, x);
            }
            rhs.swap(row, piv);
        }
        let d = m.at(row, col).f_inv()?;
        for j in 0..n {
            m.set(row, j, m.at(row, j).f_mul(&d));
        }
        rhs[row] = rhs[row].f_mul(&d);
        for r in 0..n {
            if r != row && !m.at(r, col).f_is_zero() {
                let f = m.at(r, col).clone();
                for j in 0..n {
                    let v = m.at(r, j).f_sub(&f.f_mul(m.at(row, j)));
                    m.set(r, j, v);
                }
                rhs[r] = rhs[r].f_sub(&f.f_mul(&rhs[row]));
            }
        }
        pivots.push((row, col));
        row += 1;
        if row == n {
            break;
        }
    }
    // consistency: zero rows must have zero rhs
    for r in row..n {
        if !rhs[r].f_is_zero() {
            return Err(ArithError::SingularSystem);
        }
    }
    let mut x = vec![b[0].f_zero(); n];
    for &(r, c) in &pivots {
        x[c] = rhs[r].f_clean_zero();
    }
    Ok(x)
}

/// Split M along the two invariant symplectic planes ker(A^2 - lambda^2) and
/// its Omega0-complement; returns the two 2x2 restrictions.
fn split_blocks(m: &MatQ, lambda_sq: &PadicScalar) -> Result<(MatQ, MatQ)> {
    let p = m.prime();
    let a = omega0_inv(p, 4)?.mul(m);
    let asq = a.mul(&a);
    let shifted = asq.sub(&asq.identity_like().scale(lambda_sq));
    let v1 = shifted.kernel()?;
    if v1.len() != 2 {
        return Err(ArithError::SingularSystem);
    }
    let om = omega0(p, 4)?;
    let dot = |x: &[PadicScalar], y: &[PadicScalar]| {
        x.iter()
            .zip(y)
            .fold(PadicScalar::zero(p), |acc, (a, b)| acc.add(&a.mul(b)))
    };
    let block = |w1: &[PadicScalar], w2: &[PadicScalar]| -> Result<MatQ> {
        let q = sym_pairing(&om, w1, w2);
        if q.is_zero() {
            return Err(ArithError::SingularSystem);
        }
        let v: Vec<PadicScalar> = w2.iter().map(|x| x.div(&q)).collect::<Result<_>>()?;
        let mw1 = m.mul_vec(&w1.to_vec());
        let mv = m.mul_vec(&v);
        Ok(MatQ::from_vec(
            2,
            vec![dot(w1, &mw1), dot(w1, &mv), dot(&v, &mw1), dot(&v, &mv)],
        ))
    };
    let b1 = block(&v1[0], &v1[1])?;
    // complement: vectors pairing to zero with both kernel vectors
    let mut cons = om.zero_like();
    for (r, w) in v1.iter().enumerate() {
        let ow = om.mul_vec(w);
        for j in 0..4 {
            cons.set(r, j, ow[j].clone());
        }
    }
    let v2 = cons.kernel()?;
    if v2.len() != 2 {
        return Err(ArithError::SingularSystem);
    }
    let b2 = block(&v2[0], &v2[1])?;
    Ok((b1, b2))
}

/// Split for the diagonalizable (l, l, -l, -l) pattern: span(w, Aw) for a
/// vector with w^T M w nonzero, plus its Omega0-complement.
fn split_double_pair(m: &MatQ) -> Result<(MatQ, MatQ)> {
    let p = m.prime();
    let a = omega0_inv(p, 4)?.mul(m);
    let om = omega0(p, 4)?;
    let mut cand: Vec<Vec<PadicScalar>> = Vec::new();
    for i in 0..4 {
        let mut v = vec![PadicScalar::zero(p); 4];
        v[i] = PadicScalar::one(p);
        cand.push(v);
    }
    for i in 0..4 {
        for j in i + 1..4 {
            for sg in [1i64, -1] {
                let mut v = vec![PadicScalar::zero(p); 4];
                v[i] = PadicScalar::one(p);
                v[j] = PadicScalar::from_i64(p, sg);
                cand.push(v);
            }
        }
    }
    let dot = |x: &[PadicScalar], y: &[PadicScalar]| {
        x.iter()
            .zip(y)
            .fold(PadicScalar::zero(p), |acc, (a, b)| acc.add(&a.mul(b)))
    };
    let w = cand
        .into_iter()
        .find(|w| !dot(w, &m.mul_vec(w)).is_zero())
        .ok_or(ArithError::SingularSystem)?;
    let aw = a.mul_vec(&w);
    let q = sym_pairing(&om, &w, &aw);
    debug_assert!(!q.is_zero());
    let v: Vec<PadicScalar> = aw.iter().map(|x| x.div(&q)).collect::<Result<_>>()?;
    let mw = m.mul_vec(&w);
    let mv = m.mul_vec(&v);
    let b1 = MatQ::from_vec(
        2,
        vec![dot(&w, &mw), dot(&w, &mv), dot(&v, &mw), dot(&v, &mv)],
    );
    let mut cons = om.zero_like();
    for (r, x) in [w.clone(), v.clone()].iter().enumerate() {
        let ox = om.mul_vec(x);
        for j in 0..4 {
            cons.set(r, j, ox[j].clone());
        }
    }
    let comp = cons.kernel()?;
    if comp.len() != 2 {
        return Err(ArithError::SingularSystem);
    }
    let q2 = sym_pairing(&om, &comp[0], &comp[1]);
    let v2: Vec<PadicScalar> = comp[1].iter().map(|x| x.div(&q2)).collect::<Result<_>>()?;
    let mw2 = m.mul_vec(&comp[0]);
    let mv2 = m.mul_vec(&v2);
    let b2 = MatQ::from_vec(
        2,
        vec![
            dot(&comp[0], &mw2),
            dot(&comp[0], &mv2),
            dot(&v2, &mw2),
            dot(&v2, &mv2),
        ],
    );
    Ok((b1, b2))
}

/// In the degenerate two-block case a zero block is recorded as (c, r) = (0, 0).
fn normalize_deg_block(b: Block2, raw: &MatQ) -> Block2 {
    if raw.is_zero() {
        let p = raw.prime();
        Block2 {
            c: PadicScalar::zero(p),
            r: PadicScalar::zero(p),
        }
    } else {
        b
    }
}

/// Normal forms for the all-zero-eigenvalue case, from the good tuple.
fn nilpotent_normal_form(
    m: &MatQ,
    tuple: &crate::symplin::GoodTuple,
    basis: &MatQ,
) -> Result<NormalForm> {
    let p = m.prime();
    let om = omega0(p, 4)?;
    let col = |c: usize| -> Vec<PadicScalar> { (0..4).map(|r| basis.at(r, c).clone()).collect() };
    let zero_block = || Block2 {
        c: PadicScalar::zero(p),
        r: PadicScalar::zero(p),
    };
    match tuple.parts.as_slice() {
        [1, 1, 1, 1] => Ok(NormalForm::Deg1 {
            b1: zero_block(),
            b2: zero_block(),
        }),
        [2, 1, 1] => {
            // chain pair (u11, u12) carries the rank-one block
            let r = rank_one_r(m, &col(0), &col(1), &om)?;
            let (b1, b2, _) = order_blocks(
                p,
                Block2 {
                    c: PadicScalar::zero(p),
                    r,
                },
                zero_block(),
            );
            Ok(NormalForm::Deg1 { b1, b2 })
        }
        [2, 2] => {
            let r = rank_one_r(m, &col(0), &col(1), &om)?;
            let s = rank_one_r(m, &col(2), &col(3), &om)?;
            let (b1, b2, _) = order_blocks(
                p,
                Block2 {
                    c: PadicScalar::zero(p),
                    r,
                },
                Block2 {
                    c: PadicScalar::zero(p),
                    r: s,
                },
            );
            Ok(NormalForm::Deg1 { b1, b2 })
        }
        [4] => {
            let k = sym_pairing(&om, &col(0), &col(3));
            debug_assert!(!k.is_zero());
            let c = padic::class_representative(p, padic::square_class(&k)?);
            Ok(NormalForm::Deg4 { c })
        }
        other => Err(ArithError::ParameterDomain(format!(
            "unexpected good tuple {other:?}"
        ))),
    }
}

/// r in Y_p + {1} for the rank-one block spanned by a 2-chain (u1, u2).
fn rank_one_r(
    m: &MatQ,
    u1: &Vec<PadicScalar>,
    u2: &Vec<PadicScalar>,
    om: &MatQ,
) -> Result<PadicScalar> {
    let p = m.prime();
    let q = sym_pairing(om, u1, u2);
    let v: Vec<PadicScalar> = u2.iter().map(|x| x.div(&q)).collect::<Result<_>>()?;
    let dot = |x: &[PadicScalar], y: &[PadicScalar]| {
        x.iter()
            .zip(y)
            .fold(PadicScalar::zero(p), |acc, (a, b)| acc.add(&a.mul(b)))
    };
    let b = MatQ::from_vec(
        2,
        vec![
            dot(u1, &m.mul_vec(u1)),
            dot(u1, &m.mul_vec(&v)),
            dot(&v, &m.mul_vec(u1)),
            dot(&v, &m.mul_vec(&v)),
        ],
    );
    match classify2_block(&b)? {
        Block2 { c, r } if c.is_zero() => Ok(r),
        _ => Err(ArithError::SingularSystem),
    }
}

fn canonical_sign(x: &PadicScalar) -> PadicScalar {
    if x.is_zero() || x.is_canonical_sign() {
        x.clone()
    } else {
        x.neg()
    }
}

/// Emit the literal normal-form matrix of a classification outcome.
pub fn normal_form_matrix(p: Prime, nf: &NormalForm) -> Result<MatQ> {
    let z = PadicScalar::zero(p);
    match nf {
        NormalForm::Dim2(b) => {
            let mut m = MatQ::from_vec(2, vec![z; 4]);
            m.set(0, 0, b.r.clone());
            m.set(1, 1, b.c.mul(&b.r));
            Ok(m)
        }
        NormalForm::Dim4Case1 { b1, b2 } | NormalForm::Deg1 { b1, b2 } => {
            let mut m = MatQ::from_vec(4, vec![z; 16]);
            m.set(0, 0, b1.r.clone());
            m.set(1, 1, b1.c.mul(&b1.r));
            m.set(2, 2, b2.r.clone());
            m.set(3, 3, b2.c.mul(&b2.r));
            Ok(m)
        }
        NormalForm::Dim4Case2 { c, r, s } => {
            let mut m = MatQ::from_vec(4, vec![z; 16]);
            let cr = c.mul(r);
            m.set(0, 1, s.clone());
            m.set(1, 0, s.clone());
            m.set(0, 3, r.clone());
            m.set(3, 0, r.clone());
            m.set(1, 2, cr.clone());
            m.set(2, 1, cr);
            m.set(2, 3, s.clone());
            m.set(3, 2, s.clone());
            Ok(m)
        }
        NormalForm::Dim4Case3 {
            c,
            t1,
            t2,
            a,
            b,
            r,
            s,
        } => {
            // entries per the theorem's case (3) display
            let cb2 = c.sub(&b.mul(b));
            if cb2.is_zero() {
                return Err(ArithError::ParameterDomain("c = b^2".into()));
            }
            if a.is_zero() {
                return Err(ArithError::ParameterDomain("a = 0".into()));
            }
            let t1bt2 = t1.add(&b.mul(t2));
            let bt1ct2 = b.mul(t1).add(&c.mul(t2));
            let n11 = a.mul(c).mul(&r.sub(&b.mul(s))).div(&cb2)?;
            let n13 = s.mul(c).sub(&r.mul(b)).div(&cb2)?;
            let n22 = r.neg().mul(&t1bt2).sub(&s.mul(&bt1ct2)).div(a)?;
            let n24 = r.neg().mul(&bt1ct2).sub(&s.mul(c).mul(&t1bt2));
            let n33 = r.sub(&b.mul(s)).div(&a.mul(&cb2))?;
            let n44 = a.mul(c).mul(&r.neg().mul(&t1bt2).sub(&s.mul(&bt1ct2)));
            let mut m = MatQ::from_vec(4, vec![z; 16]);
            m.set(0, 0, n11);
            m.set(0, 2, n13.clone());
            m.set(2, 0, n13);
            m.set(1, 1, n22);
            m.set(1, 3, n24.clone());
            m.set(3, 1, n24);
            m.set(2, 2, n33);
            m.set(3, 3, n44);
            Ok(m)
        }
        NormalForm::Deg2 { r } => {
            let mut m = MatQ::from_vec(4, vec![z; 16]);
            let one = PadicScalar::one(p);
            m.set(0, 1, r.clone());
            m.set(1, 0, r.clone());
            m.set(1, 2, one.clone());
            m.set(2, 1, one);
            m.set(2, 3, r.clone());
            m.set(3, 2, r.clone());
            Ok(m)
        }
        NormalForm::Deg3 { c, r, a } => {
            let mut m = MatQ::from_vec(4, vec![z; 16]);
            let cr = c.mul(r);
            m.set(0, 0, a.clone());
            m.set(2, 2, a.clone());
            m.set(0, 3, r.clone());
            m.set(3, 0, r.clone());
            m.set(1, 2, cr.clone());
            m.set(2, 1, cr);
            Ok(m)
        }
        NormalForm::Deg4 { c } => {
            let mut m = MatQ::from_vec(4, vec![z; 16]);
            m.set(0, 0, c.clone());
            m.set(1, 3, c.neg());
            m.set(3, 1, c.neg());
            Ok(m)
        }
    }
}

impl NormalForm {
    /// Structural equality with scalar comparison to shared precision.
    pub fn same_as(&self, other: &NormalForm) -> bool {
        use NormalForm::*;
        let eq = |a: &PadicScalar, b: &PadicScalar| a.eq_to_precision(b);
        match (self, other) {
            (Dim2(x), Dim2(y)) => eq(&x.c, &y.c) && eq(&x.r, &y.r),
            (Dim4Case1 { b1, b2 }, Dim4Case1 { b1: c1, b2: c2 })
            | (Deg1 { b1, b2 }, Deg1 { b1: c1, b2: c2 }) => {
                eq(&b1.c, &c1.c) && eq(&b1.r, &c1.r) && eq(&b2.c, &c2.c) && eq(&b2.r, &c2.r)
            }
            (Dim4Case2 { c, r, s }, Dim4Case2 { c: c2, r: r2, s: s2 }) => {
                eq(c, c2) && eq(r, r2) && eq(s, s2)
            }
            (
                Dim4Case3 { c, t1, t2, a, b, r, s },
                Dim4Case3 {
                    c: c2,
                    t1: u1,
                    t2: u2,
                    a: a2,
                    b: b2,
                    r: r2,
                    s: s2,
                },
            ) => {
                eq(c, c2)
                    && eq(t1, u1)
                    && eq(t2, u2)
                    && eq(a, a2)
                    && eq(b, b2)
                    && eq(r, r2)
                    && eq(s, s2)
            }
            (Deg2 { r }, Deg2 { r: r2 }) => eq(r, r2),
            (Deg3 { c, r, a }, Deg3 { c: c2, r: r2, a: a2 }) => {
                eq(c, c2) && eq(r, r2) && eq(a, a2)
            }
            (Deg4 { c }, Deg4 { c: c2 }) => eq(c, c2),
            _ => false,
        }
    }

    /// Human-readable one-line summary.
    pub fn summary(&self) -> String {
        match self {
            NormalForm::Dim2(b) => {
                format!("2x2 normal form diag(r, c r): c = {}, r = {}", b.c, b.r)
            }
            NormalForm::Dim4Case1 { b1, b2 } => format!(
                "case (1): diag(r, c1 r, s, c2 s) with c1 = {}, r = {}, c2 = {}, s = {}",
                b1.c, b1.r, b2.c, b2.r
            ),
            NormalForm::Dim4Case2 { c, r, s } => {
                format!("case (2): c = {c}, r = {r}, s = {s}")
            }
            NormalForm::Dim4Case3 { c, t1, t2, a, b, .. } => {
                format!("case (3): c = {c}, t1 = {t1}, t2 = {t2}, a = {a}, b = {b}")
            }
            NormalForm::Deg1 { b1, b2 } => format!(
                "degenerate (1): blocks (c1, r) = ({}, {}), (c2, s) = ({}, {})",
                b1.c, b1.r, b2.c, b2.r
            ),
            NormalForm::Deg2 { r } => format!("degenerate (2): r = {r}"),
            NormalForm::Deg3 { c, r, a } => {
                format!("degenerate (3): c = {c}, r = {r}, a = {a}")
            }
            NormalForm::Deg4 { c } => format!("degenerate (4): c = {c}"),
        }
    }
}

/// True iff the two symmetric matrices are congruent by a symplectic matrix,
/// decided by comparing canonical classifications.
pub fn equivalent(m1: &MatQ, m2: &MatQ) -> Result<bool> {
    if m1.dim != m2.dim {
        return Ok(false);
    }
    let nf1 = if m1.dim == 2 { classify2(m1)? } else { classify4(m1)? };
    let nf2 = if m2.dim == 2 { classify2(m2)? } else { classify4(m2)? };
    Ok(nf1.same_as(&nf2))
}

/// A constructed symplectic matrix S with S^T M S = N, plus verification data.
#[derive(Debug, Clone)]
pub struct Witness {
    pub s: MatQ,
    pub verified: bool,
    pub residual_precision: i64,
}

/// Construct a witness for Dim2, Case1 or Case2 classifications. Case3 and
/// the degenerate cases are refused.
pub fn witness(m: &MatQ, nf: &NormalForm) -> Result<Witness> {
    let p = m.prime();
    let s = match nf {
        NormalForm::Dim2(b) => witness2(m, b)?,
        NormalForm::Dim4Case1 { b1, b2 } => {
            let eig = eigen_structure(m)?;
            let EigenTower::SplitPair { lambda_sq, .. } = eig else {
                return Err(ArithError::SingularSystem);
            };
            let (blocks, basis) = split_basis(m, &lambda_sq)?;
            let c1 = classify2_block(&blocks.0)?;
            let c2 = classify2_block(&blocks.1)?;
            let (_, _, swapped) = order_blocks(p, c1, c2);
            let s1 = witness2(&blocks.0, if swapped { b2 } else { b1 })?;
            let s2 = witness2(&blocks.1, if swapped { b1 } else { b2 })?;
            let mut blk = MatQ::from_vec(4, vec![PadicScalar::zero(p); 16]);
            for i in 0..2 {
                for j in 0..2 {
                    blk.set(i, j, s1.at(i, j).clone());
                    blk.set(i + 2, j + 2, s2.at(i, j).clone());
                }
            }
            let mut s = basis.mul(&blk);
            if swapped {
                // exchange the two symplectic pairs
                let perm_rows: [usize; 4] = [2, 3, 0, 1];
                let mut pm = MatQ::from_vec(4, vec![PadicScalar::zero(p); 16]);
                for (j, &i) in perm_rows.iter().enumerate() {
                    pm.set(i, j, PadicScalar::one(p));
                }
                s = s.mul(&pm);
            }
            s
        }
        NormalForm::Dim4Case2 { c, r, s } => witness_focus(m, c, r, s)?,
        _ => return Err(ArithError::WitnessOutOfScope),
    };
    let om = omega0(p, m.dim)?;
    let n = normal_form_matrix(p, nf)?;
    let r1 = s.transpose().mul(&om).mul(&s).sub(&om);
    let r2 = s.transpose().mul(m).mul(&s).sub(&n);
    let mut verified = true;
    let mut min_prec: i64 = padic::DEFAULT_PRECISION as i64;
    for e in r1.e.iter().chain(r2.e.iter()) {
        if e.is_zero() {
            continue;
        }
        if !e.is_zero_to_precision() {
            verified = false;
            break;
        }
        if let Err(ArithError::PrecisionExhausted { have, .. }) = e.ord_checked() {
            min_prec = min_prec.min(have as i64);
        }
    }
    Ok(Witness {
        s,
        verified: verified && min_prec >= (padic::DEFAULT_PRECISION as i64 - 8),
        residual_precision: if verified { min_prec } else { 0 },
    })
}

/// The symplectic split basis (columns u1, v1, u2, v2) plus the two blocks.
fn split_basis(m: &MatQ, lambda_sq: &PadicScalar) -> Result<((MatQ, MatQ), MatQ)> {
    let p = m.prime();
    let a = omega0_inv(p, 4)?.mul(m);
    let asq = a.mul(&a);
    let shifted = asq.sub(&asq.identity_like().scale(lambda_sq));
    let v1 = shifted.kernel()?;
    let om = omega0(p, 4)?;
    let q1 = sym_pairing(&om, &v1[0], &v1[1]);
    let w1b: Vec<PadicScalar> = v1[1].iter().map(|x| x.div(&q1)).collect::<Result<_>>()?;
    let mut cons = om.zero_like();
    for (r, w) in v1.iter().enumerate() {
        let ow = om.mul_vec(w);
        for j in 0..4 {
            cons.set(r, j, ow[j].clone());
        }
    }
    let v2 = cons.kernel()?;
    let q2 = sym_pairing(&om, &v2[0], &v2[1]);
    let w2b: Vec<PadicScalar> = v2[1].iter().map(|x| x.div(&q2)).collect::<Result<_>>()?;
    let mut basis = MatQ::from_vec(4, vec![PadicScalar::zero(p); 16]);
    for r in 0..4 {
        basis.set(r, 0, v1[0][r].clone());
        basis.set(r, 1, w1b[r].clone());
        basis.set(r, 2, v2[0][r].clone());
        basis.set(r, 3, w2b[r].clone());
    }
    let dot = |x: &[PadicScalar], y: &[PadicScalar]| {
        x.iter()
            .zip(y)
            .fold(PadicScalar::zero(p), |acc, (a, b)| acc.add(&a.mul(b)))
    };
    let block = |u: &[PadicScalar], v: &[PadicScalar]| -> MatQ {
        MatQ::from_vec(
            2,
            vec![
                dot(u, &m.mul_vec(&u.to_vec())),
                dot(u, &m.mul_vec(&v.to_vec())),
                dot(v, &m.mul_vec(&u.to_vec())),
                dot(v, &m.mul_vec(&v.to_vec())),
            ],
        )
    };
    Ok(((block(&v1[0], &w1b), block(&v2[0], &w2b)), basis))
}

/// 2x2 witness for all Dim2 variants.
fn witness2(m: &MatQ, b: &Block2) -> Result<MatQ> {
    let p = m.prime();
    if m.is_zero() {
        return Ok(omega0(p, 2)?.identity_like());
    }
    if b.c.is_zero() {
        // rank-one reduction: S = [[-kd, kb],[0, -ka]] with k^2 a d = 1
        let (mm, pre) = if m.at(0, 0).is_zero() {
            let sw = MatQ::from_i64_rows(p, 2, &[&[0, 1], &[-1, 0]]);
            (sw.transpose().mul(m).mul(&sw), Some(sw))
        } else {
            (m.clone(), None)
        };
        let a = mm.at(0, 0).clone();
        let bb = mm.at(0, 1).clone();
        let d = b.r.clone();
        let k = a.mul(&d).sqrt()?.ok_or(ArithError::NormUnsolvable)?.inv()?;
        let mut s = MatQ::from_vec(2, vec![PadicScalar::zero(p); 4]);
        s.set(0, 0, k.mul(&d).neg());
        s.set(0, 1, k.mul(&bb));
        s.set(1, 1, k.mul(&a).neg());
        return Ok(match pre {
            Some(sw) => sw.mul(&s),
            None => s,
        });
    }
    let det = m
        .at(0, 0)
        .mul(m.at(1, 1))
        .sub(&m.at(0, 1).mul(m.at(1, 0)));
    let lambda_sq = det.neg();
    if lambda_sq.is_square()? {
        witness2_split(m, b, &lambda_sq)
    } else {
        witness2_elliptic(m, b, &lambda_sq)
    }
}

/// Split (eigenvalues in Q_p) witness: eigenvector columns, pairing-scaled.
fn witness2_split(m: &MatQ, b: &Block2, lambda_sq: &PadicScalar) -> Result<MatQ> {
    let p = m.prime();
    let lambda = lambda_sq.sqrt()?.unwrap();
    let a = omega0_inv(p, 2)?.mul(m);
    let u = eigenvector(&a, &lambda)?;
    let v = eigenvector(&a, &lambda.neg())?;
    let om = omega0(p, 2)?;
    let n = normal_form_matrix(p, &NormalForm::Dim2(b.clone()))?;
    let an = omega0_inv(p, 2)?.mul(&n);
    let un = eigenvector(&an, &lambda)?;
    let vn = eigenvector(&an, &lambda.neg())?;
    let d_ratio = sym_pairing(&om, &un, &vn).div(&sym_pairing(&om, &u, &v))?;
    let mut psi1 = MatQ::from_vec(2, vec![PadicScalar::zero(p); 4]);
    let mut psi2 = psi1.clone();
    for r in 0..2 {
        psi1.set(r, 0, u[r].clone());
        psi1.set(r, 1, v[r].mul(&d_ratio));
        psi2.set(r, 0, un[r].clone());
        psi2.set(r, 1, vn[r].clone());
    }
    Ok(psi1.mul(&psi2.inverse()?))
}

/// Elliptic witness via the norm-equation split d1 = x + y lambda.
fn witness2_elliptic(m: &MatQ, b: &Block2, lambda_sq: &PadicScalar) -> Result<MatQ> {
    let p = m.prime();
    let ext = QuadExt::of_class(lambda_sq)?;
    let e = lambda_sq.div(ext.alpha_sq())?.sqrt()?.unwrap();
    let lambda = ext.elem(PadicScalar::zero(p), e.clone());
    let a_ext = mat_to_ext(&omega0_inv(p, 2)?.mul(m), &ext);
    let u = eigenvector(&a_ext, &lambda)?;
    let ubar: Vec<ExtElem> = u.iter().map(|z| z.conj()).collect();
    let om = mat_to_ext(&omega0(p, 2)?, &ext);
    let q = sym_pairing(&om, &u, &ubar);
    debug_assert!(q.a.is_zero_to_precision());
    let two = PadicScalar::from_i64(p, 2);
    let w = two.mul(&e).mul(&b.r).div(&q.b)?;
    let (x, y) =
        crate::padic::norm_solve(&lambda_sq.neg(), &w)?.ok_or(ArithError::NormUnsolvable)?;
    // d1 = x + y lambda, d2 = conj(d1)
    let d1 = ext.elem(x.clone(), y.mul(&e));
    let d2 = d1.conj();
    // Psi2 = [[lambda, -lambda], [a, a]] with a = r
    let aa = ext.scalar(b.r.clone());
    let psi2 = Mat::from_vec(2, vec![lambda.clone(), lambda.neg(), aa.clone(), aa]);
    let psi1 = Mat::from_vec(
        2,
        vec![
            u[0].mul(&d1),
            ubar[0].mul(&d2),
            u[1].mul(&d1),
            ubar[1].mul(&d2),
        ],
    );
    let s_ext = psi1.mul(&psi2.inverse()?);
    let mut s = MatQ::from_vec(2, vec![PadicScalar::zero(p); 4]);
    for i in 0..2 {
        for j in 0..2 {
            let z = s_ext.at(i, j);
            debug_assert!(z.b.is_zero_to_precision(), "witness entry not in Q_p");
            s.set(i, j, z.a.clone());
        }
    }
    Ok(s)
}

/// Focus-type witness (case 2): d3 = conj(d1), d4 = conj(d2), with
/// d1 d2 = -2 alpha / (u^T Omega0 v).
fn witness_focus(m: &MatQ, c: &PadicScalar, r: &PadicScalar, s: &PadicScalar) -> Result<MatQ> {
    let p = m.prime();
    let ext = QuadExt::new(p, c.clone())?;
    let lambda = ext.elem(s.clone(), r.clone());
    let a_ext = mat_to_ext(&omega0_inv(p, 4)?.mul(m), &ext);
    let u = eigenvector(&a_ext, &lambda)?;
    let v = eigenvector(&a_ext, &lambda.neg())?;
    let om = mat_to_ext(&omega0(p, 4)?, &ext);
    let quv = sym_pairing(&om, &u, &v);
    let alpha = ext.alpha();
    let two = ext.from_ints(2, 0);
    let d1 = ext.one();
    let d2 = alpha.neg().mul(&two).div(&quv)?;
    let d3 = d1.conj();
    let d4 = d2.conj();
    let ubar: Vec<ExtElem> = u.iter().map(|z| z.conj()).collect();
    let vbar: Vec<ExtElem> = v.iter().map(|z| z.conj()).collect();
    let z = ext.zero();
    let one = ext.one();
    let psi2 = Mat::from_vec(
        4,
        vec![
            z.clone(),
            alpha.clone(),
            z.clone(),
            alpha.neg(),
            one.clone(),
            z.clone(),
            one.clone(),
            z.clone(),
            z.clone(),
            one.clone(),
            z.clone(),
            one.clone(),
            alpha.clone(),
            z.clone(),
            alpha.neg(),
            z.clone(),
        ],
    );
    let mut psi1 = Mat::from_vec(4, vec![ext.zero(); 16]);
    for row in 0..4 {
        psi1.set(row, 0, u[row].mul(&d1));
        psi1.set(row, 1, v[row].mul(&d2));
        psi1.set(row, 2, ubar[row].mul(&d3));
        psi1.set(row, 3, vbar[row].mul(&d4));
    }
    let s_ext = psi1.mul(&psi2.inverse()?);
    let mut sm = MatQ::from_vec(4, vec![PadicScalar::zero(p); 16]);
    for i in 0..4 {
        for j in 0..4 {
            let zch = s_ext.at(i, j);
            debug_assert!(zch.b.is_zero_to_precision(), "witness entry not in Q_p");
            sm.set(i, j, zch.a.clone());
        }
    }
    Ok(sm)
}

/// Sign normalization of a diagonal block parameter: r and -r label the
/// same class exactly when [-1] is a value of the associated norm form.
fn block_sign_free(b: &Block2) -> bool {
    if b.c.is_zero() || b.r.is_zero() {
        return false;
    }
    let p = b.c.prime();
    padic::dsq_member(&b.c, &PadicScalar::from_i64(p, -1)).unwrap_or(false)
}

fn canon_block(b: &Block2) -> Block2 {
    if block_sign_free(b) {
        Block2 {
            c: b.c.clone(),
            r: canonical_sign(&b.r),
        }
    } else {
        b.clone()
    }
}

/// Whether the gamma^2 class is its own conjugate pair; then lambda and mu
/// generate the same tower and the (r, s) signs normalize independently.
fn case3_self_paired(p: Prime, c: &PadicScalar, t1: &PadicScalar, t2: &PadicScalar) -> Result<bool> {
    let ext = QuadExt::new(p, c.clone())?;
    let g2 = ext.elem(t1.clone(), t2.clone());
    let cls = ext_square_class(&g2)?;
    Ok(crate::ext::class_pair(&ext, cls)? == cls)
}

/// The documented relabelings of a case-(3) outcome: the joint (r, s) flip
/// relabels the root (swapping (a, b) when [-1] is not a norm of the
/// tower), and for self-paired rows the s-flip alone also relabels.
pub fn case3_relabels(p: Prime, nf: &NormalForm) -> Result<Vec<NormalForm>> {
    let NormalForm::Dim4Case3 { c, t1, t2, a, b, r, s } = nf else {
        return Ok(vec![nf.clone()]);
    };
    let swapped_ab = if case3_sign_swaps_ab(p, c, t1, t2)? {
        let ext = QuadExt::new(p, c.clone())?;
        let g2 = ext.elem(t1.clone(), t2.clone());
        let row = crate::ext::canonical_row(&ext, ext_square_class(&g2)?)?;
        if a.eq_to_precision(&PadicScalar::one(p)) && b.is_zero() {
            (row.a1, row.b1)
        } else {
            (PadicScalar::one(p), PadicScalar::zero(p))
        }
    } else {
        (a.clone(), b.clone())
    };
    let build = |a: &PadicScalar, b: &PadicScalar, r: PadicScalar, s: PadicScalar| {
        NormalForm::Dim4Case3 {
            c: c.clone(),
            t1: t1.clone(),
            t2: t2.clone(),
            a: a.clone(),
            b: b.clone(),
            r,
            s,
        }
    };
    let mut out = vec![
        nf.clone(),
        build(&swapped_ab.0, &swapped_ab.1, r.neg(), s.neg()),
    ];
    if case3_self_paired(p, c, t1, t2)? {
        out.push(build(a, b, r.clone(), s.neg()));
        out.push(build(&swapped_ab.0, &swapped_ab.1, r.neg(), s.clone()));
    }
    Ok(out)
}

/// Whether flipping the sign of (r, s) in case (3) swaps the (a, b) choice:
/// true exactly when [-1] is not in DSq(Q_p[alpha], -gamma^2).
pub fn case3_sign_swaps_ab(
    p: Prime,
    c: &PadicScalar,
    t1: &PadicScalar,
    t2: &PadicScalar,
) -> Result<bool> {
    let ext = QuadExt::new(p, c.clone())?;
    let g2 = ext.elem(t1.clone(), t2.clone());
    let cls = ext_square_class(&g2)?;
    let minus_one = ext.from_ints(-1, 0);
    let m1cls = ext_square_class(&minus_one)?;
    Ok(!dsq_ext_member(&ext, cls, m1cls)?)
}

/// Canonicalize a normal form to the representative classify() itself emits:
/// orders case-(1)/deg-(1) blocks, normalizes branch signs of (r, s), and
/// couples the case-(3) sign flip with the (a, b) swap when required.
pub fn canonicalize(p: Prime, nf: &NormalForm) -> Result<NormalForm> {
    Ok(match nf {
        NormalForm::Dim2(b) => NormalForm::Dim2(canon_block(b)),
        NormalForm::Dim4Case1 { b1, b2 } => {
            let (b1, b2, _) = order_blocks(p, canon_block(b1), canon_block(b2));
            NormalForm::Dim4Case1 { b1, b2 }
        }
        NormalForm::Deg1 { b1, b2 } => {
            let (b1, b2, _) = order_blocks(p, canon_block(b1), canon_block(b2));
            NormalForm::Deg1 { b1, b2 }
        }
        NormalForm::Dim4Case2 { c, r, s } => NormalForm::Dim4Case2 {
            c: c.clone(),
            r: canonical_sign(r),
            s: canonical_sign(s),
        },
        // the case-(3) label is pinned by the constructive procedure, so
        // the canonical representative is classification's own output
        NormalForm::Dim4Case3 { .. } => classify4(&normal_form_matrix(p, nf)?)?,
        NormalForm::Deg2 { r } => NormalForm::Deg2 {
            r: canonical_sign(r),
        },
        NormalForm::Deg3 { c, r, a } => NormalForm::Deg3 {
            c: c.clone(),
            r: canonical_sign(r),
            a: a.clone(),
        },
        NormalForm::Deg4 { .. } => nf.clone(),
    })
}

/// S^T M S for test helpers.
pub fn conjugate(m: &MatQ, s: &MatQ) -> MatQ {
    s.transpose().mul(m).mul(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SplitMix64;
    use crate::symplin::{is_symplectic, random_symplectic};

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
    fn classify2_zero_and_rank_one() {
        let pr = p(5);
        let z = MatQ::from_i64_rows(pr, 2, &[&[0, 0], &[0, 0]]);
        match classify2(&z).unwrap() {
            NormalForm::Dim2(b) => {
                assert!(b.r.is_zero());
                assert_eq!(b.c, s(pr, 1)); // p = 1 mod 4 convention
            }
            _ => unreachable!(),
        }
        let m = MatQ::from_i64_rows(pr, 2, &[&[1, 0], &[0, 0]]);
        match classify2(&m).unwrap() {
            NormalForm::Dim2(b) => {
                assert!(b.c.is_zero());
                assert_eq!(b.r, s(pr, 1));
            }
            _ => unreachable!(),
        }
    }

    #[test]
    fn classify2_hyperbolic() {
        let m7 = MatQ::from_i64_rows(p(7), 2, &[&[0, 1], &[1, 0]]);
        match classify2(&m7).unwrap() {
            NormalForm::Dim2(b) => {
                assert_eq!(b.c, s(p(7), -1));
                assert_eq!(b.r, s(p(7), 1));
            }
            _ => unreachable!(),
        }
    }

    #[test]
    fn elliptic_vs_hyperbolic_depends_on_p_mod_4() {
        // family-level: the elliptic and split forms share the family c
        // exactly when p = 1 mod 4
        for (pr, expect) in [(p(5), true), (p(13), true), (p(7), false), (p(2), false)] {
            let e = MatQ::from_i64_rows(pr, 2, &[&[1, 0], &[0, 1]]);
            let h = MatQ::from_i64_rows(pr, 2, &[&[0, 1], &[1, 0]]);
            let (NormalForm::Dim2(be), NormalForm::Dim2(bh)) =
                (classify2(&e).unwrap(), classify2(&h).unwrap())
            else {
                unreachable!()
            };
            assert_eq!(be.c.eq_to_precision(&bh.c), expect, "p = {pr}");
        }
        // exact congruence at p = 5: match the eigenvalues with sqrt(-1)
        let pr = p(5);
        let e = MatQ::from_i64_rows(pr, 2, &[&[1, 0], &[0, 1]]);
        let i = s(pr, -1).sqrt().unwrap().unwrap();
        let mut h = MatQ::from_i64_rows(pr, 2, &[&[0, 0], &[0, 0]]);
        h.set(0, 1, i.clone());
        h.set(1, 0, i);
        assert!(equivalent(&e, &h).unwrap());
    }

    #[test]
    fn golden_example_p5_case1() {
        let m = example_matrix(p(5));
        match classify4(&m).unwrap() {
            NormalForm::Dim4Case1 { b1, b2 } => {
                assert_eq!(b1.c, s(p(5), 1));
                assert_eq!(b2.c, s(p(5), 2));
            }
            other => panic!("expected case 1, got {other:?}"),
        }
    }

    #[test]
    fn golden_example_p3_case2() {
        let m = example_matrix(p(3));
        match classify4(&m).unwrap() {
            NormalForm::Dim4Case2 { c, r, s: sv } => {
                assert_eq!(c, s(p(3), -1));
                assert!(!r.is_zero() && !sv.is_zero());
            }
            other => panic!("expected case 2, got {other:?}"),
        }
    }

    #[test]
    fn golden_example_p2_case3() {
        let m = example_matrix(p(2));
        match classify4(&m).unwrap() {
            NormalForm::Dim4Case3 { c, t1, t2, a, b, .. } => {
                assert_eq!(c, s(p(2), 3));
                assert_eq!(t1, s(p(2), 1));
                assert_eq!(t2, s(p(2), 1));
                assert_eq!(a, s(p(2), -1));
                assert!(b.is_zero());
            }
            other => panic!("expected case 3, got {other:?}"),
        }
    }

    #[test]
    fn golden_degenerate_p5_and_p11() {
        let m = example_degenerate(p(5));
        match classify4(&m).unwrap() {
            NormalForm::Deg3 { c, r, a } => {
                assert_eq!(c, s(p(5), 5));
                assert_eq!(r, s(p(5), 1));
                assert_eq!(a, s(p(5), 1));
            }
            other => panic!("expected degenerate case 3, got {other:?}"),
        }
        let m = example_degenerate(p(11));
        match classify4(&m).unwrap() {
            NormalForm::Deg2 { r } => {
                let rr = r.mul(&r);
                assert!(rr.eq_to_precision(&s(p(11), 5)));
            }
            other => panic!("expected degenerate case 2, got {other:?}"),
        }
    }

    #[test]
    fn symplectic_invariance_smoke() {
        let mut rng = SplitMix64::new(2024);
        for pr in [2u64, 5, 7] {
            let pp = p(pr);
            let m = example_matrix(pp);
            let nf = classify4(&m).unwrap();
            for _ in 0..3 {
                let t = random_symplectic(pp, 4, &mut rng);
                let m2 = conjugate(&m, &t);
                let nf2 = classify4(&m2).unwrap();
                assert!(nf.same_as(&nf2), "p={pr}: {nf:?} vs {nf2:?}");
            }
        }
    }

    #[test]
    fn normal_form_matrices_are_symmetric_and_reclassify() {
        for pr in [2u64, 3, 5] {
            let pp = p(pr);
            let m = example_matrix(pp);
            let nf = classify4(&m).unwrap();
            let n = normal_form_matrix(pp, &nf).unwrap();
            assert!(n.is_symmetric());
            let nf2 = classify4(&n).unwrap();
            assert!(nf.same_as(&nf2), "p={pr}: {nf:?} vs {nf2:?}");
        }
    }

    #[test]
    fn witness_hyperbolic_2x2() {
        let pr = p(7);
        let m = MatQ::from_i64_rows(pr, 2, &[&[0, 2], &[2, 3]]);
        let nf = classify2(&m).unwrap();
        let w = witness(&m, &nf).unwrap();
        assert!(w.verified, "residual precision {}", w.residual_precision);
        assert!(is_symplectic(&w.s).unwrap());
    }

    #[test]
    fn witness_elliptic_2x2() {
        let pr = p(5);
        let m = MatQ::from_i64_rows(pr, 2, &[&[1, 0], &[0, 1]]);
        let nf = classify2(&m).unwrap();
        let w = witness(&m, &nf).unwrap();
        assert!(w.verified, "residual precision {}", w.residual_precision);
    }

    #[test]
    fn witness_case1_and_case2() {
        let m = example_matrix(p(5));
        let nf = classify4(&m).unwrap();
        let w = witness(&m, &nf).unwrap();
        assert!(w.verified, "case 1 residual {}", w.residual_precision);

        let m = example_matrix(p(3));
        let nf = classify4(&m).unwrap();
        let w = witness(&m, &nf).unwrap();
        assert!(w.verified, "case 2 residual {}", w.residual_precision);

        let m = example_matrix(p(2));
        let nf = classify4(&m).unwrap();
        assert!(matches!(
            witness(&m, &nf),
            Err(ArithError::WitnessOutOfScope)
        ));
    }

    #[test]
    fn deg4_detected_from_chain_matrix() {
        let pr = p(5);
        let m = MatQ::from_i64_rows(
            pr,
            4,
            &[&[1, 0, 0, 0], &[0, 0, 0, -1], &[0, 0, 0, 0], &[0, -1, 0, 0]],
        );
        match classify4(&m).unwrap() {
            NormalForm::Deg4 { c } => {
                assert_eq!(c, s(pr, 1));
            }
            other => panic!("expected degenerate case 4, got {other:?}"),
        }
    }
}
