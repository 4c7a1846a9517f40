//! Bitstring helpers. Character 0 of every string is particle 1, which is
//! the most significant bit of the matching index.

use crate::error::{Error, Result};

pub fn to_bitstring(index: usize, width: usize) -> String {
    (0..width)
        .map(|pos| if index >> (width - 1 - pos) & 1 == 1 { '1' } else { '0' })
        .collect()
}

pub fn parse_bitstring(s: &str) -> Result<usize> {
    if s.is_empty() || s.len() > usize::BITS as usize {
        return Err(Error::InvalidInput(format!("bad bitstring {s:?}")));
    }
    s.chars().try_fold(0usize, |acc, c| match c {
        '0' => Ok(acc << 1),
        '1' => Ok(acc << 1 | 1),
        _ => Err(Error::InvalidInput(format!("bad bitstring {s:?}"))),
    })
}

/// Value of 0-based position `pos` (particle `pos + 1`) in an n-bit index.
#[inline]
pub fn bit(index: usize, pos: usize, width: usize) -> bool {
    index >> (width - 1 - pos) & 1 == 1
}

#[inline]
pub fn mask(pos: usize, width: usize) -> usize {
    1 << (width - 1 - pos)
}
