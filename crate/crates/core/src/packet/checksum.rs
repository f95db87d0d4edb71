//! One's-complement Internet checksum (RFC 1071) and incremental update
//! (RFC 1624).

/// Adds big-endian 16-bit words of `data` into a 32-bit accumulator.
/// An odd trailing byte is padded with zero.
pub fn ones_complement_sum(data: &[u8], initial: u32) -> u32 {
    let mut sum = initial as u64;
    let mut chunks = data.chunks_exact(2);
    for word in &mut chunks {
        sum += u16::from_be_bytes([word[0], word[1]]) as u64;
    }
    if let [last] = chunks.remainder() {
        sum += (*last as u64) << 8;
    }
    fold(sum) as u32
}

/// Folds carries back into the low 16 bits (end-around carry).
pub fn fold(mut sum: u64) -> u16 {
    while sum >> 16 != 0 {
        sum = (sum & 0xffff) + (sum >> 16);
    }
    sum as u16
}

/// The checksum value to place in a header: complement of the folded sum.
pub fn internet_checksum(data: &[u8]) -> u16 {
    !fold(ones_complement_sum(data, 0) as u64)
}

/// RFC 1624 eqn. 3: `HC' = ~(~HC + ~m + m')`.
///
/// Patches `old_csum` after one 16-bit header word changes from `old_word`
/// to `new_word`. Unlike the naive `HC - m + m'` form this never produces
/// the negative-zero `0xFFFF` for a header whose sum is non-zero, so it
/// agrees with a full recomputation. The one exception is an all-zero image
/// (checksum `0xFFFF`), whose sum has no distinguishable sign; an unchanged
/// word is therefore returned untouched.
pub fn incremental_checksum_update(old_csum: u16, old_word: u16, new_word: u16) -> u16 {
    if old_word == new_word {
        return old_csum;
    }
    let sum = (!old_csum) as u64 + (!old_word) as u64 + new_word as u64;
    !fold(sum)
}
