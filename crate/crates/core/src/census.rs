//! Counting and enumeration: exact normal-form counts in dimensions 2 and 4,
//! block lower bounds from the gcd lemma, integer partitions, the M(P, p) and
//! f_{P,p} constructions, Hardy-Ramanujan asymptotics, and the table of form
//! counts over all even dimensions.

use crate::error::{ArithError, Result};
use crate::ext::{canonical_rows, QuadExt};
use crate::padic::{self, PadicScalar, Prime};
use crate::symplin::MatQ;

/// An integer partition: non-increasing positive parts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    pub parts: Vec<usize>,
}

impl Partition {
    pub fn sum(&self) -> usize {
        self.parts.iter().sum()
    }
}

/// All partitions of n in reverse-lexicographic order.
pub fn partitions(n: usize) -> Vec<Partition> {
    fn rec(n: usize, max: usize, cur: &mut Vec<usize>, out: &mut Vec<Partition>) {
        if n == 0 {
            out.push(Partition { parts: cur.clone() });
            return;
        }
        for k in (1..=n.min(max)).rev() {
            cur.push(k);
            rec(n - k, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, n, &mut Vec::new(), &mut out);
    out
}

/// p(n) via the pentagonal-number recurrence.
pub fn partition_count(n: usize) -> u128 {
    let mut table = vec![0u128; n + 1];
    table[0] = 1;
    for i in 1..=n {
        let mut sum: i128 = 0;
        let mut k: i64 = 1;
        loop {
            let g1 = (k * (3 * k - 1) / 2) as usize;
            if g1 > i {
                break;
            }
            let sign: i128 = if k % 2 == 1 { 1 } else { -1 };
            sum += sign * table[i - g1] as i128;
            let g2 = (k * (3 * k + 1) / 2) as usize;
            if g2 <= i {
                sum += sign * table[i - g2] as i128;
            }
            k += 1;
        }
        table[i] = sum as u128;
    }
    table[n]
}

/// The Hardy-Ramanujan main term e^(pi sqrt(2n/3)) / (4 n sqrt 3).
pub fn hardy_ramanujan(n: usize) -> f64 {
    let nf = n as f64;
    (std::f64::consts::PI * (2.0 * nf / 3.0).sqrt()).exp() / (4.0 * nf * 3.0f64.sqrt())
}

/// Normal-form counts; for dimension 2 only (families, isolated) are
/// populated, with families carried in `one_dof`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FormCount {
    pub two_dof: u128,
    pub one_dof: u128,
    pub isolated: u128,
}

fn residue_sizes(p: Prime) -> (usize, usize) {
    let (x, y) = padic::nonresidue_sets(p);
    (x.len(), y.len())
}

/// Number of canonical-parameter rows across all extensions of Q_p.
pub fn canonical_row_total(p: Prime) -> Result<usize> {
    let (_, ys) = padic::nonresidue_sets(p);
    let mut total = 0;
    for c in ys {
        let ext = QuadExt::new(p, c)?;
        total += canonical_rows(&ext).len();
    }
    Ok(total)
}

/// Dimension 2: (families with one degree of freedom, isolated forms).
pub fn count_dim2(p: Prime) -> FormCount {
    let (nx, ny) = residue_sizes(p);
    FormCount {
        two_dof: 0,
        one_dof: nx as u128,
        isolated: (ny + 1) as u128,
    }
}

/// Dimension 4: families with two and one degrees of freedom plus isolated
/// forms, assembled from the itemized sums of the counting theorem.
pub fn count_dim4(p: Prime) -> Result<FormCount> {
    let (nx, ny) = residue_sizes(p);
    let rows = canonical_row_total(p)? as u128;
    let nx = nx as u128;
    let ny = ny as u128;
    let two_dof = nx * (nx + 1) / 2 + ny + 2 * rows;
    let one_dof = nx * (ny + 1) + 1 + 2 * ny;
    let isolated = (ny + 1) * (ny + 1) + (ny + 1);
    Ok(FormCount {
        two_dof,
        one_dof,
        isolated,
    })
}

/// Lower bound on the number of block families of size 2n; exact block
/// counts override for n = 1, 2.
pub fn block_lower_bound(n: usize, p: Prime) -> Result<u128> {
    let gcd = |a: u64, b: u64| -> u64 {
        let (mut a, mut b) = (a, b);
        while b != 0 {
            let t = a % b;
            a = b;
            b = t;
        }
        a
    };
    match n {
        0 => Err(ArithError::ParameterDomain("n must be positive".into())),
        1 => Ok(residue_sizes(p).0 as u128),
        2 => {
            let (_, ny) = residue_sizes(p);
            Ok(ny as u128 + 2 * canonical_row_total(p)? as u128)
        }
        _ => {
            let pm1 = p.get() - 1;
            let b = if n % 2 == 1 {
                gcd(2 * n as u64, pm1) + gcd(n as u64, pm1)
            } else {
                gcd(2 * n as u64, pm1)
            };
            Ok(b as u128)
        }
    }
}

fn binomial(n: u128, k: u128) -> u128 {
    if k > n {
        return 0;
    }
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

/// Multiset coefficient: ways to choose m blocks from b families with
/// repetition.
fn multiset(b: u128, m: usize) -> u128 {
    binomial(b + m as u128 - 1, m as u128)
}

/// Number of normal-form families in dimension 2n over Q_p: exact for
/// n <= 2, the partition lower bound otherwise.
pub fn forms_lower_bound(n: usize, p: Prime) -> Result<u128> {
    match n {
        1 => Ok(count_dim2(p).one_dof),
        2 => Ok(count_dim4(p)?.two_dof),
        _ => {
            let mut total: u128 = 0;
            for part in partitions(n) {
                let mut prod: u128 = 1;
                let mut j = 0;
                while j < part.parts.len() {
                    let size = part.parts[j];
                    let mut mult = 0;
                    while j < part.parts.len() && part.parts[j] == size {
                        mult += 1;
                        j += 1;
                    }
                    prod *= multiset(block_lower_bound(size, p)?, mult);
                }
                total += prod;
            }
            Ok(total)
        }
    }
}

/// Real form count for dimension 2n: the sum over the number of focus-focus
/// blocks, sum_{k=0}^{floor(n/2)} (n - 2k + 1).
pub fn real_form_count(n: usize) -> u128 {
    (0..=n / 2).map(|k| (n - 2 * k + 1) as u128).sum()
}

/// Real block count: 2 families in dimension 2, one focus-focus family in
/// dimension 4, none beyond.
pub fn real_block_count(n: usize) -> u128 {
    match n {
        1 => 2,
        2 => 1,
        _ => 0,
    }
}

/// One row of the table of form counts.
#[derive(Debug, Clone, serde::Serialize)]
pub struct NumFormsRow {
    pub dim: usize,
    pub real_blocks: u128,
    pub real_forms: u128,
    pub cells: Vec<NumFormsCell>,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct NumFormsCell {
    pub p: u64,
    pub blocks: u128,
    pub forms: u128,
}

/// The table of block and form counts for the requested even dimensions and
/// primes, plus the real columns.
pub fn table_numforms(dims: &[usize], primes: &[Prime]) -> Result<Vec<NumFormsRow>> {
    let mut rows = Vec::new();
    for &dim in dims {
        if dim % 2 != 0 {
            return Err(ArithError::OddDimension(dim));
        }
        let n = dim / 2;
        let mut cells = Vec::new();
        for &p in primes {
            cells.push(NumFormsCell {
                p: p.get(),
                blocks: block_lower_bound(n, p)?,
                forms: forms_lower_bound(n, p)?,
            });
        }
        rows.push(NumFormsRow {
            dim,
            real_blocks: real_block_count(n),
            real_forms: real_form_count(n),
            cells,
        });
    }
    Ok(rows)
}

/// The block-diagonal matrix M(P, p) whose blocks are the displayed chains
/// of sizes 2 a_i ending in p.
pub fn matrix_m(part: &Partition, p: Prime) -> MatQ {
    let n = part.sum();
    let dim = 2 * n;
    let mut m = MatQ::from_vec(dim, vec![PadicScalar::zero(p); dim * dim]);
    let one = PadicScalar::one(p);
    let pp = PadicScalar::from_i64(p, p.get() as i64);
    let mut off = 0usize;
    for &a in &part.parts {
        m.set(off, off, one.clone());
        for j in 1..a {
            m.set(off + 2 * j - 1, off + 2 * j, one.clone());
            m.set(off + 2 * j, off + 2 * j - 1, one.clone());
        }
        m.set(off + 2 * a - 1, off + 2 * a - 1, pp.clone());
        off += 2 * a;
    }
    m
}

/// Hessian of the associated quadratic f_{P,p} in the interleaved
/// coordinates (x_1, xi_1, ..., x_n, xi_n); equals M(P, p) by construction.
pub fn f_hessian(part: &Partition, p: Prime) -> MatQ {
    let n = part.sum();
    let dim = 2 * n;
    let mut h = MatQ::from_vec(dim, vec![PadicScalar::zero(p); dim * dim]);
    let one = PadicScalar::one(p);
    let pp = PadicScalar::from_i64(p, p.get() as i64);
    // variable indices: x_j at 2(j-1), xi_j at 2(j-1)+1 (1-based j)
    let xv = |j: usize| 2 * (j - 1);
    let xiv = |j: usize| 2 * (j - 1) + 1;
    let mut b_prev = 0usize;
    for &a in &part.parts {
        let b_i = b_prev + a;
        // x_{b_prev+1}^2 / 2
        h.set(xv(b_prev + 1), xv(b_prev + 1), one.clone());
        // xi_j x_{j+1} terms
        for j in b_prev + 1..b_i {
            h.set(xiv(j), xv(j + 1), one.clone());
            h.set(xv(j + 1), xiv(j), one.clone());
        }
        // p xi_{b_i}^2 / 2
        h.set(xiv(b_i), xiv(b_i), pp.clone());
        b_prev = b_i;
    }
    h
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symplin::{char_poly_even, omega0_inv};

    fn p(n: u64) -> Prime {
        Prime::new(n).unwrap()
    }

    #[test]
    fn partition_enumeration() {
        let p4 = partitions(4);
        assert_eq!(p4.len(), 5);
        assert_eq!(p4[0].parts, vec![4]);
        assert_eq!(p4[1].parts, vec![3, 1]);
        assert_eq!(p4[4].parts, vec![1, 1, 1, 1]);
        assert_eq!(partitions(10).len(), 42);
        for n in 1..=20 {
            assert_eq!(partitions(n).len() as u128, partition_count(n));
        }
    }

    #[test]
    fn dim2_counts() {
        assert_eq!(count_dim2(p(5)).one_dof, 7);
        assert_eq!(count_dim2(p(5)).isolated, 4);
        assert_eq!(count_dim2(p(7)).one_dof, 5);
        assert_eq!(count_dim2(p(7)).isolated, 4);
        assert_eq!(count_dim2(p(2)).one_dof, 11);
        assert_eq!(count_dim2(p(2)).isolated, 8);
    }

    #[test]
    fn dim4_counts() {
        let c5 = count_dim4(p(5)).unwrap();
        assert_eq!((c5.two_dof, c5.one_dof, c5.isolated), (49, 35, 20));
        let c7 = count_dim4(p(7)).unwrap();
        assert_eq!((c7.two_dof, c7.one_dof, c7.isolated), (32, 27, 20));
        let c2 = count_dim4(p(2)).unwrap();
        assert_eq!((c2.two_dof, c2.one_dof, c2.isolated), (211, 103, 72));
        // the itemized p=2 sum: C(12,2) + 7 + (9+11+9+9+11+9+11) * 2
        assert_eq!(66 + 7 + 69 * 2, 211);
        assert_eq!(canonical_row_total(p(2)).unwrap(), 69);
    }

    #[test]
    fn block_bounds_match_table() {
        // dim 6 row: Q2 2, Q3 3, Q5 3, Q7 9
        for (pr, want) in [(2u64, 2u128), (3, 3), (5, 3), (7, 9)] {
            assert_eq!(block_lower_bound(3, p(pr)).unwrap(), want, "p={pr}");
        }
        assert_eq!(block_lower_bound(5, p(3)).unwrap(), 3);
        assert_eq!(block_lower_bound(4, p(5)).unwrap(), 4);
        // dim 2 and 4 use the exact counts
        assert_eq!(block_lower_bound(1, p(2)).unwrap(), 11);
        assert_eq!(block_lower_bound(2, p(2)).unwrap(), 145);
        assert_eq!(block_lower_bound(2, p(5)).unwrap(), 21);
        assert_eq!(block_lower_bound(2, p(3)).unwrap(), 17);
    }

    #[test]
    fn forms_table_cells() {
        assert_eq!(forms_lower_bound(3, p(3)).unwrap(), 123);
        assert_eq!(forms_lower_bound(4, p(2)).unwrap(), 21179);
        assert_eq!(forms_lower_bound(10, p(2)).unwrap(), 2469098766);
        assert_eq!(forms_lower_bound(7, p(5)).unwrap(), 47462);
    }

    #[test]
    fn real_columns() {
        let want_forms = [2u128, 4, 6, 9, 12, 16, 20, 25, 30, 36];
        for (i, &w) in want_forms.iter().enumerate() {
            assert_eq!(real_form_count(i + 1), w, "n = {}", i + 1);
        }
        assert_eq!(real_block_count(1), 2);
        assert_eq!(real_block_count(2), 1);
        assert_eq!(real_block_count(3), 0);
    }

    #[test]
    fn hardy_ramanujan_vs_recurrence() {
        assert_eq!(partition_count(20), 627);
        let hr = hardy_ramanujan(20);
        assert!((hr - 692.0).abs() < 2.0, "HR(20) = {hr}");
        let ratio = partition_count(20) as f64 / hr;
        assert!((ratio - 0.906).abs() < 0.01);
        for n in 20..=100 {
            let r = partition_count(n) as f64 / hardy_ramanujan(n);
            assert!((0.75..=1.25).contains(&r), "ratio at n={n}: {r}");
        }
    }

    #[test]
    fn m_matrix_and_hessian_agree() {
        for pr in [2u64, 3, 5] {
            for n in 1..=4 {
                for part in partitions(n) {
                    let m = matrix_m(&part, p(pr));
                    let h = f_hessian(&part, p(pr));
                    assert!(m.sub(&h).is_zero(), "P = {:?}, p = {pr}", part.parts);
                    assert!(m.is_symmetric());
                }
            }
        }
        // P = (1): the displayed 2x2 block
        let m = matrix_m(&Partition { parts: vec![1] }, p(3));
        assert_eq!(m.at(0, 0), &PadicScalar::one(p(3)));
        assert_eq!(m.at(1, 1), &PadicScalar::from_i64(p(3), 3));
        assert!(m.at(0, 1).is_zero());
    }

    #[test]
    fn chain_blocks_are_eisenstein() {
        // char poly of each block of Omega0^-1 M((a), p) is Eisenstein at p,
        // hence irreducible of degree 2a
        for pr in [3u64, 5] {
            let pp = p(pr);
            for a in 1..=4 {
                let part = Partition { parts: vec![a] };
                let m = matrix_m(&part, pp);
                let amat = omega0_inv(pp, 2 * a).unwrap().mul(&m);
                let coeffs = amat.char_poly();
                // monic; all middle coefficients divisible by p; constant
                // term of valuation exactly 1
                assert_eq!(coeffs[0], PadicScalar::one(pp));
                for c in &coeffs[1..coeffs.len() - 1] {
                    if !c.is_zero() {
                        assert!(c.ord().unwrap() >= 1);
                    }
                }
                let last = coeffs.last().unwrap();
                assert_eq!(last.ord().unwrap(), 1, "constant term p exactly once");
            }
        }
    }

    #[test]
    fn distinct_partitions_have_distinct_block_degree_multisets() {
        // together with Eisenstein irreducibility, this separates M(P,p)
        // and M(Q,p) for P != Q
        for n in 2..=5 {
            let parts = partitions(n);
            for i in 0..parts.len() {
                for j in i + 1..parts.len() {
                    assert_ne!(parts[i].parts, parts[j].parts);
                }
            }
        }
        // dim-4 level: the two partitions of 2 classify differently
        let pp = p(5);
        let m2 = matrix_m(&Partition { parts: vec![2] }, pp);
        let m11 = matrix_m(&Partition { parts: vec![1, 1] }, pp);
        let (a2, b2) = char_poly_even(&m2).unwrap();
        let (a11, b11) = char_poly_even(&m11).unwrap();
        assert!(!(a2 == a11 && b2 == b11));
        assert!(!crate::classify::equivalent(&m2, &m11).unwrap());
    }
}
