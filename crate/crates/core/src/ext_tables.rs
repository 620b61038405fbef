//! Static classification tables for the quadratic extensions of Q_2 and the
//! canonical (c, t1, t2, a1, b1) parameter rows.
//!
//! These are data, not code: the test suite re-derives every marked cell from
//! the norm-form membership oracle and checks the checksum below, so the
//! runtime never recomputes them.

/// Identifiers of the seven quadratic extensions of Q_2, by alpha^2.
pub const ALPHA2_KEYS: [i64; 7] = [-1, 2, -2, 3, -3, 6, -6];

/// One row of an S_alpha table: the marked columns (bit j = column j), the
/// second (a1, b1) parameter choice, and the index of the paired class.
#[derive(Debug, Clone, Copy)]
pub struct SAlphaRow {
    pub mask: u16,
    pub a1: i64,
    pub b1_num: i64,
    pub b1_den: i64,
    pub pair: u8,
}

const fn row(mask: u16, a1: i64, b1_num: i64, b1_den: i64, pair: u8) -> SAlphaRow {
    SAlphaRow { mask, a1, b1_num, b1_den, pair }
}

/// S_alpha tables for Q_2[alpha], indexed like `ALPHA2_KEYS`.
///
/// Classes are indexed by bits (e_s1, e_s2, e_u1, e_u2) over the generator
/// order documented in `ext::generators`; the table index is
/// (e_u1 + 2 e_u2) * 4 + (e_s1 + 2 e_s2), matching the row/column layout of
/// the source tables. A set bit j in `mask` marks the column with index j.
pub const S_ALPHA: [[SAlphaRow; 16]; 7] = [
    // alpha^2 = -1: seconds over <2,3>, firsts over <1+i, 1+2i>
    [
        row(0xFFFF, 0, 0, 1, 0),
        row(0x00FF, 1, 2, 1, 1),
        row(0x0F0F, 1, 1, 1, 2),
        row(0xF00F, 1, 1, 1, 3),
        row(0xCC33, 3, 0, 1, 5),
        row(0x3333, 3, 0, 1, 4),
        row(0x3CC3, 3, 0, 1, 7),
        row(0xC3C3, 3, 0, 1, 6),
        row(0xA5A5, 2, 0, 1, 10),
        row(0x5AA5, 2, 0, 1, 11),
        row(0x5555, 2, 0, 1, 8),
        row(0xAA55, 2, 0, 1, 9),
        row(0x9669, 2, 0, 1, 15),
        row(0x6969, 2, 0, 1, 14),
        row(0x6699, 2, 0, 1, 13),
        row(0x9999, 2, 0, 1, 12),
    ],
    // alpha^2 = 2: seconds over <-1,3>, firsts over <sqrt2, 1+sqrt2>
    [
        row(0xFFFF, 0, 0, 1, 0),
        row(0xF00F, 1, 2, 1, 1),
        row(0x00FF, 1, 1, 1, 2),
        row(0x0F0F, 1, 1, 1, 3),
        row(0x5AA5, -1, 0, 1, 5),
        row(0x5555, -1, 0, 1, 4),
        row(0xA5A5, -1, 0, 1, 7),
        row(0xAA55, -1, 0, 1, 6),
        row(0x9669, -1, 0, 1, 9),
        row(0x9999, -1, 0, 1, 8),
        row(0x6969, -1, 0, 1, 11),
        row(0x6699, -1, 0, 1, 10),
        row(0x3333, 3, 0, 1, 12),
        row(0x3CC3, 3, 0, 1, 13),
        row(0xCC33, 3, 0, 1, 14),
        row(0xC3C3, 3, 0, 1, 15),
    ],
    // alpha^2 = -2: seconds over <-1,3>, firsts over <i sqrt2, 1+i sqrt2>
    [
        row(0xFFFF, 0, 0, 1, 0),
        row(0x00FF, 1, 1, 1, 1),
        row(0xF00F, 1, -2, 1, 2),
        row(0x0F0F, 1, 1, 1, 3),
        row(0xCC33, 3, 0, 1, 5),
        row(0x3333, 3, 0, 1, 4),
        row(0xC3C3, 3, 0, 1, 7),
        row(0x3CC3, 3, 0, 1, 6),
        row(0x9669, -1, 0, 1, 10),
        row(0x6969, -1, 0, 1, 11),
        row(0x9999, -1, 0, 1, 8),
        row(0x6699, -1, 0, 1, 9),
        row(0xA5A5, -1, 0, 1, 15),
        row(0x5AA5, -1, 0, 1, 14),
        row(0xAA55, -1, 0, 1, 13),
        row(0x5555, -1, 0, 1, 12),
    ],
    // alpha^2 = 3: seconds over <-1,2>, firsts over <sqrt3, 1+sqrt3>
    [
        row(0xFFFF, 0, 0, 1, 0),
        row(0x00FF, 1, 1, 1, 1),
        row(0x0F0F, 1, 1, 1, 2),
        row(0xF00F, 1, 3, 1, 3),
        row(0xCC33, 2, 0, 1, 5),
        row(0x3333, 2, 0, 1, 4),
        row(0x3CC3, 2, 0, 1, 7),
        row(0xC3C3, 2, 0, 1, 6),
        row(0x5AA5, -1, 0, 1, 11),
        row(0xA5A5, -1, 0, 1, 10),
        row(0xAA55, -1, 0, 1, 9),
        row(0x5555, -1, 0, 1, 8),
        row(0x6969, -1, 0, 1, 14),
        row(0x9669, -1, 0, 1, 15),
        row(0x9999, -1, 0, 1, 12),
        row(0x6699, -1, 0, 1, 13),
    ],
    // alpha^2 = -3: seconds over <-1,2>, firsts over <i sqrt3, 1+2i sqrt3>.
    // The masks printed in the source table fail the norm-form re-derivation
    // on 12 of the 16 rows (and the (a1,b1) printed for the class of 2 does
    // not cover the second coset); the values below are the re-derived ones,
    // verified cell by cell by the oracle test suite via explicit witnesses.
    [
        row(0xFFFF, 0, 0, 1, 0),
        row(0x0F0F, 2, 1, 2, 1),
        row(0xF00F, 1, -6, 1, 2),
        row(0x00FF, 1, -6, 1, 3),
        row(0x9669, -1, 0, 1, 5),
        row(0x6699, -1, 0, 1, 4),
        row(0x9999, -1, 0, 1, 7),
        row(0x6969, -1, 0, 1, 6),
        row(0xC3C3, 2, 0, 1, 8),
        row(0x3333, 2, 0, 1, 9),
        row(0xCC33, 2, 0, 1, 10),
        row(0x3CC3, 2, 0, 1, 11),
        row(0xAA55, -1, 0, 1, 13),
        row(0x5AA5, -1, 0, 1, 12),
        row(0xA5A5, -1, 0, 1, 15),
        row(0x5555, -1, 0, 1, 14),
    ],
    // alpha^2 = 6: seconds over <-1,3>, firsts over <sqrt6, 1+sqrt6>
    [
        row(0xFFFF, 0, 0, 1, 0),
        row(0x00FF, 1, 1, 1, 1),
        row(0xF00F, 1, 6, 1, 2),
        row(0x0F0F, 1, 1, 1, 3),
        row(0xCC33, 3, 0, 1, 5),
        row(0x3333, 3, 0, 1, 4),
        row(0xC3C3, 3, 0, 1, 7),
        row(0x3CC3, 3, 0, 1, 6),
        row(0x9669, -1, 0, 1, 10),
        row(0x6969, -1, 0, 1, 11),
        row(0x9999, -1, 0, 1, 8),
        row(0x6699, -1, 0, 1, 9),
        row(0xA5A5, -1, 0, 1, 15),
        row(0x5AA5, -1, 0, 1, 14),
        row(0xAA55, -1, 0, 1, 13),
        row(0x5555, -1, 0, 1, 12),
    ],
    // alpha^2 = -6: seconds over <-1,3>, firsts over <i sqrt6, 1+i sqrt6>
    [
        row(0xFFFF, 0, 0, 1, 0),
        row(0xF00F, 1, -6, 1, 1),
        row(0x00FF, 1, 1, 1, 2),
        row(0x0F0F, 1, 1, 1, 3),
        row(0x5AA5, -1, 0, 1, 5),
        row(0x5555, -1, 0, 1, 4),
        row(0xA5A5, -1, 0, 1, 7),
        row(0xAA55, -1, 0, 1, 6),
        row(0x9669, -1, 0, 1, 9),
        row(0x9999, -1, 0, 1, 8),
        row(0x6969, -1, 0, 1, 11),
        row(0x6699, -1, 0, 1, 10),
        row(0x3333, 3, 0, 1, 12),
        row(0x3CC3, 3, 0, 1, 13),
        row(0xCC33, 3, 0, 1, 14),
        row(0xC3C3, 3, 0, 1, 15),
    ],
];

/// One row of the canonical-parameter table for normal form (3):
/// gamma^2 = t1 + t2 alpha and the second (a, b) choice (a1, b1).
/// b1 may be a non-integer rational; it is stored verbatim.
#[derive(Debug, Clone, Copy)]
pub struct CanonicalRowData {
    pub t1: i64,
    pub t2: i64,
    pub a1: i64,
    pub b1_num: i64,
    pub b1_den: i64,
}

const fn crow(t1: i64, t2: i64, a1: i64, b1_num: i64, b1_den: i64) -> CanonicalRowData {
    CanonicalRowData { t1, t2, a1, b1_num, b1_den }
}

/// Canonical rows for p = 2, one block per c in ALPHA2_KEYS order.
pub const CANONICAL_ROWS_2: [&[CanonicalRowData]; 7] = [
    // c = -1 (9 rows)
    &[
        crow(2, 0, 1, 2, 1),
        crow(3, 0, 1, 1, 1),
        crow(6, 0, 1, 1, 1),
        crow(1, 1, 3, 0, 1),
        crow(3, 3, 3, 0, 1),
        crow(1, 2, 2, 0, 1),
        crow(2, 4, 2, 0, 1),
        crow(-1, 3, 2, 0, 1),
        crow(-2, 6, 2, 0, 1),
    ],
    // c = 2 (11 rows)
    &[
        crow(-1, 0, 1, 2, 1),
        crow(3, 0, 1, 1, 1),
        crow(-3, 0, 1, 1, 1),
        crow(0, 1, -1, 0, 1),
        crow(0, 3, -1, 0, 1),
        crow(1, 1, -1, 0, 1),
        crow(3, 3, -1, 0, 1),
        crow(2, 1, 3, 0, 1),
        crow(-2, -1, 3, 0, 1),
        crow(6, 3, 3, 0, 1),
        crow(-6, -3, 3, 0, 1),
    ],
    // c = -2 (9 rows)
    &[
        crow(-1, 0, 1, 1, 1),
        crow(3, 0, 1, -2, 1),
        crow(-3, 0, 1, 1, 1),
        crow(0, 1, 3, 0, 1),
        crow(0, 3, 3, 0, 1),
        crow(1, 1, -1, 0, 1),
        crow(-1, -1, -1, 0, 1),
        crow(-2, 1, -1, 0, 1),
        crow(2, -1, -1, 0, 1),
    ],
    // c = 3 (9 rows)
    &[
        crow(-1, 0, 1, 1, 1),
        crow(2, 0, 1, 1, 1),
        crow(-2, 0, 1, 3, 1),
        crow(0, 1, 2, 0, 1),
        crow(0, 2, 2, 0, 1),
        crow(1, 1, -1, 0, 1),
        crow(-1, -1, -1, 0, 1),
        crow(3, 1, -1, 0, 1),
        crow(-3, -1, -1, 0, 1),
    ],
    // c = -3 (11 rows); the (-1, 0) row carries b1 = 1/2 verbatim. The
    // printed (2, 1/2) for the (2, 0) row fails the coset-coverage property
    // under the re-derived S table; (1, -6) is the corrected choice.
    &[
        crow(-1, 0, 2, 1, 2),
        crow(2, 0, 1, -6, 1),
        crow(-2, 0, 1, -6, 1),
        crow(0, 1, -1, 0, 1),
        crow(0, 2, -1, 0, 1),
        crow(1, 2, 2, 0, 1),
        crow(-1, -2, 2, 0, 1),
        crow(2, 4, 2, 0, 1),
        crow(-2, -4, 2, 0, 1),
        crow(-6, 1, -1, 0, 1),
        crow(-12, 2, -1, 0, 1),
    ],
    // c = 6 (9 rows)
    &[
        crow(-1, 0, 1, 1, 1),
        crow(3, 0, 1, 6, 1),
        crow(-3, 0, 1, 1, 1),
        crow(0, 1, 3, 0, 1),
        crow(0, 3, 3, 0, 1),
        crow(1, 1, -1, 0, 1),
        crow(-1, -1, -1, 0, 1),
        crow(6, 1, -1, 0, 1),
        crow(-6, -1, -1, 0, 1),
    ],
    // c = -6 (11 rows)
    &[
        crow(-1, 0, 1, -6, 1),
        crow(3, 0, 1, 1, 1),
        crow(-3, 0, 1, 1, 1),
        crow(0, 1, -1, 0, 1),
        crow(0, 3, -1, 0, 1),
        crow(1, 1, -1, 0, 1),
        crow(3, 3, -1, 0, 1),
        crow(-6, 1, 3, 0, 1),
        crow(6, -1, 3, 0, 1),
        crow(-18, 3, 3, 0, 1),
        crow(18, -3, 3, 0, 1),
    ],
];

/// FNV-1a checksum over the embedded tables, pinned by a unit test.
pub fn table_checksum() -> u64 {
    let mut h: u64 = 0xcbf29ce484222325;
    let mut eat = |v: i64| {
        for b in v.to_le_bytes() {
            h ^= b as u64;
            h = h.wrapping_mul(0x100000001b3);
        }
    };
    for table in &S_ALPHA {
        for r in table {
            eat(r.mask as i64);
            eat(r.a1);
            eat(r.b1_num);
            eat(r.b1_den);
            eat(r.pair as i64);
        }
    }
    for block in &CANONICAL_ROWS_2 {
        for r in *block {
            eat(r.t1);
            eat(r.t2);
            eat(r.a1);
            eat(r.b1_num);
            eat(r.b1_den);
        }
    }
    h
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn row_and_block_counts() {
        let lens: Vec<usize> = CANONICAL_ROWS_2.iter().map(|b| b.len()).collect();
        assert_eq!(lens, vec![9, 11, 9, 9, 11, 9, 11]);
        assert_eq!(lens.iter().sum::<usize>(), 69);
    }

    #[test]
    fn every_row_has_eight_marks() {
        for table in &S_ALPHA {
            assert_eq!(table[0].mask, 0xFFFF);
            for r in &table[1..] {
                assert_eq!(r.mask.count_ones(), 8);
                assert_eq!(r.mask & 1, 1, "class 1 always attainable");
            }
        }
    }

    #[test]
    fn marks_are_symmetric_and_rows_are_subgroups() {
        for table in &S_ALPHA {
            for u in 0..16usize {
                for v in 0..16usize {
                    let muv = table[u].mask >> v & 1;
                    let mvu = table[v].mask >> u & 1;
                    assert_eq!(muv, mvu, "symbol symmetry at ({u},{v})");
                }
                // indices encode exponent vectors, so xor of indices is the
                // product of classes: each marked set must be closed under it
                let m = table[u].mask;
                for a in 0..16usize {
                    for b in 0..16usize {
                        if m >> a & 1 == 1 && m >> b & 1 == 1 {
                            assert_eq!(m >> (a ^ b) & 1, 1, "subgroup closure");
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn pairing_is_an_involution() {
        for table in &S_ALPHA {
            for (i, r) in table.iter().enumerate() {
                assert_eq!(table[r.pair as usize].pair as usize, i);
                // conjugation fixes the first index group
                assert_eq!(r.pair as usize / 4, i / 4);
            }
        }
    }
}
