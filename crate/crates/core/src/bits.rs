//! Byte-packed bit vector helpers shared by the database and codec layers.
//!
//! Bit `j` of a width-`w` vector lives in byte `j / 8` at mask `1 << (j % 8)`
//! (least-significant bit first). Padding bits past `w` are kept zero.

/// Bytes needed to hold `width` bits.
pub(crate) fn stride(width: usize) -> usize {
    width.div_ceil(8)
}

#[inline]
pub(crate) fn get(bytes: &[u8], j: usize) -> bool {
    bytes[j / 8] & (1 << (j % 8)) != 0
}

#[inline]
pub(crate) fn set(bytes: &mut [u8], j: usize) {
    bytes[j / 8] |= 1 << (j % 8);
}

/// Clear any padding bits beyond `width` in the last byte.
pub(crate) fn mask_tail(bytes: &mut [u8], width: usize) {
    let tail = width % 8;
    if tail != 0 {
        if let Some(last) = bytes.last_mut() {
            *last &= (1u8 << tail) - 1;
        }
    }
}

pub(crate) fn tail_is_zero(bytes: &[u8], width: usize) -> bool {
    let tail = width % 8;
    if tail == 0 {
        return true;
    }
    match bytes.last() {
        Some(&last) => last & !((1u8 << tail) - 1) == 0,
        None => true,
    }
}

/// Positions of set bits, ascending.
pub(crate) fn ones(bytes: &[u8]) -> impl Iterator<Item = usize> + '_ {
    bytes.iter().enumerate().flat_map(|(i, &byte)| {
        (0..8)
            .filter(move |bit| byte & (1 << bit) != 0)
            .map(move |bit| i * 8 + bit)
    })
}

/// Index of the unordered pair `{a, b}` (`a < b < d`) in the row-major
/// upper-triangular enumeration of all d(d-1)/2 column pairs.
#[inline]
pub(crate) fn pair_index(d: usize, a: usize, b: usize) -> usize {
    debug_assert!(a < b && b < d);
    a * (2 * d - a - 1) / 2 + (b - a - 1)
}
