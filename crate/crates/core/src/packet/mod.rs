//! Simulated TCP segments.
//!
//! Only the header fields the switch logic touches are modeled at the bit
//! level. For checksum purposes a segment serializes to a fixed 20-byte image
//! (all fields big-endian):
//!
//! | bytes  | content                                                     |
//! |--------|-------------------------------------------------------------|
//! | 0..2   | source port                                                 |
//! | 2..4   | destination port                                            |
//! | 4..8   | sequence number (low 32 bits of the byte offset)            |
//! | 8..12  | acknowledgment number (low 32 bits)                         |
//! | 12..14 | `doff:4 | reserved:2 | scale:4 | URG ACK PSH RST SYN FIN`   |
//! | 14..16 | receive window field                                        |
//! | 16..18 | checksum                                                    |
//! | 18..20 | urgent pointer (always zero)                                |
//!
//! `doff` is `header_len / 4`. The window scale exponent lives in the four
//! lowest-order bits of the six-bit reserved field of the original TCP
//! header, i.e. bits 6..=9 of the big-endian word at offset 12.

mod checksum;

pub use checksum::{fold, incremental_checksum_update, internet_checksum, ones_complement_sum};

use std::fmt;

use crate::error::{Error, Result};
use crate::time::SimTime;

/// Largest exponent the window-scale option allows.
pub const MAX_WINDOW_SCALE: u8 = 14;

pub const HEADER_IMAGE_LEN: usize = 20;

/// Byte offset of the word holding data offset, reserved bits and flags.
const FLAGS_WORD_OFFSET: usize = 12;
const WINDOW_OFFSET: usize = 14;
const CHECKSUM_OFFSET: usize = 16;
const SCALE_SHIFT: u16 = 6;
const SCALE_MASK: u16 = 0xF << SCALE_SHIFT;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FlowKey {
    pub src: u32,
    pub dst: u32,
    pub sport: u16,
    pub dport: u16,
}

impl fmt::Display for FlowKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}->{}:{}", self.src, self.sport, self.dst, self.dport)
    }
}

/// TCP control bits, using their on-the-wire positions.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct Flags(u8);

impl Flags {
    pub const NONE: Flags = Flags(0);
    pub const FIN: Flags = Flags(0x01);
    pub const SYN: Flags = Flags(0x02);
    pub const ACK: Flags = Flags(0x10);
    pub const SYNACK: Flags = Flags(0x12);
    pub const FINACK: Flags = Flags(0x11);

    const WIRE_MASK: u8 = 0x3F;

    pub const fn bits(self) -> u8 {
        self.0
    }

    pub const fn from_bits(bits: u8) -> Flags {
        Flags(bits & Self::WIRE_MASK)
    }

    pub const fn contains(self, other: Flags) -> bool {
        self.0 & other.0 == other.0
    }

    pub const fn union(self, other: Flags) -> Flags {
        Flags(self.0 | other.0)
    }

    pub const fn is_syn(self) -> bool {
        self.contains(Flags::SYN) && !self.contains(Flags::ACK)
    }

    pub const fn is_synack(self) -> bool {
        self.contains(Flags::SYNACK)
    }

    pub const fn is_fin(self) -> bool {
        self.contains(Flags::FIN)
    }

    pub const fn is_ack(self) -> bool {
        self.contains(Flags::ACK)
    }
}

impl std::ops::BitOr for Flags {
    type Output = Flags;
    fn bitor(self, rhs: Flags) -> Flags {
        self.union(rhs)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TcpSegment {
    pub flow: FlowKey,
    /// Byte offset of the first payload byte.
    pub seq: u64,
    /// Cumulative acknowledgment (next byte expected by the sender of this
    /// segment). Only meaningful with [`Flags::ACK`].
    pub ack: u64,
    pub payload_len: u32,
    pub flags: Flags,
    /// Unscaled wire value of the receive window.
    pub rwnd_field: u16,
    /// Window-scale exponent carried in the reserved bits.
    pub scale_bits: u8,
    pub checksum: u16,
    pub header_len: u8,
    pub send_time: SimTime,
    /// Send time of the data segment that triggered this ACK, echoed back
    /// for RTT sampling (the simulator's stand-in for TCP timestamps).
    pub ts_echo: SimTime,
}

impl TcpSegment {
    pub const TCP_HEADER_LEN: u8 = 20;

    /// A segment with a valid checksum. `scale_bits` is masked to 4 bits.
    pub fn new(flow: FlowKey, flags: Flags) -> Self {
        let mut seg = TcpSegment {
            flow,
            seq: 0,
            ack: 0,
            payload_len: 0,
            flags,
            rwnd_field: 0,
            scale_bits: 0,
            checksum: 0,
            header_len: Self::TCP_HEADER_LEN,
            send_time: SimTime::ZERO,
            ts_echo: SimTime::ZERO,
        };
        seg.seal();
        seg
    }

    /// Recomputes the checksum from scratch after direct field edits.
    pub fn seal(&mut self) {
        self.checksum = full_checksum(self);
    }

    pub fn header_image(&self) -> [u8; HEADER_IMAGE_LEN] {
        let mut image = [0u8; HEADER_IMAGE_LEN];
        image[0..2].copy_from_slice(&self.flow.sport.to_be_bytes());
        image[2..4].copy_from_slice(&self.flow.dport.to_be_bytes());
        image[4..8].copy_from_slice(&(self.seq as u32).to_be_bytes());
        image[8..12].copy_from_slice(&(self.ack as u32).to_be_bytes());
        image[FLAGS_WORD_OFFSET..FLAGS_WORD_OFFSET + 2].copy_from_slice(&self.flags_word().to_be_bytes());
        image[WINDOW_OFFSET..WINDOW_OFFSET + 2].copy_from_slice(&self.rwnd_field.to_be_bytes());
        image[CHECKSUM_OFFSET..CHECKSUM_OFFSET + 2].copy_from_slice(&self.checksum.to_be_bytes());
        image
    }

    fn flags_word(&self) -> u16 {
        let doff = ((self.header_len / 4) as u16 & 0xF) << 12;
        let scale = ((self.scale_bits as u16) << SCALE_SHIFT) & SCALE_MASK;
        doff | scale | self.flags.bits() as u16
    }

    /// True when a full recomputation over the image, checksum included,
    /// sums to negative zero.
    pub fn checksum_ok(&self) -> bool {
        internet_checksum(&self.header_image()) == 0
    }

    /// Window in bytes: `rwnd_field << scale_bits`.
    pub fn effective_rwnd(&self) -> u64 {
        (self.rwnd_field as u64) << self.scale_bits
    }

    /// Replaces the window field and patches the checksum incrementally.
    pub fn rewrite_rwnd(&mut self, new_field: u16) {
        self.checksum = incremental_checksum_update(self.checksum, self.rwnd_field, new_field);
        self.rwnd_field = new_field;
    }

    /// Rewrites the window field so the effective window is `bytes` rounded
    /// down to the segment's scale granularity.
    pub fn rewrite_effective_rwnd(&mut self, bytes: u64) {
        let field = (bytes >> self.scale_bits).min(u16::MAX as u64) as u16;
        self.rewrite_rwnd(field);
    }

    pub fn encode_scale(mut self, scale: u8) -> Result<TcpSegment> {
        if scale > MAX_WINDOW_SCALE {
            return Err(Error::ScaleOutOfRange(scale));
        }
        let old_word = self.flags_word();
        self.scale_bits = scale;
        self.checksum = incremental_checksum_update(self.checksum, old_word, self.flags_word());
        Ok(self)
    }
}

/// Internet checksum of the header image with the checksum field zeroed.
pub fn full_checksum(segment: &TcpSegment) -> u16 {
    let mut image = segment.header_image();
    image[CHECKSUM_OFFSET] = 0;
    image[CHECKSUM_OFFSET + 1] = 0;
    internet_checksum(&image)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn zeroed() -> TcpSegment {
        TcpSegment {
            flow: FlowKey::default(),
            seq: 0,
            ack: 0,
            payload_len: 0,
            flags: Flags::NONE,
            rwnd_field: 0,
            scale_bits: 0,
            checksum: 0,
            header_len: 0,
            send_time: SimTime::ZERO,
            ts_echo: SimTime::ZERO,
        }
    }

    fn ack_with(rwnd_field: u16, scale: u8) -> TcpSegment {
        let mut seg = TcpSegment::new(
            FlowKey { src: 1, dst: 2, sport: 40000, dport: 5001 },
            Flags::ACK,
        );
        seg.rwnd_field = rwnd_field;
        seg.scale_bits = scale;
        seg.seal();
        seg
    }

    #[test]
    fn all_zero_header_checksum() {
        assert_eq!(full_checksum(&zeroed()), 0xFFFF);
    }

    #[test]
    fn single_word_header_checksum() {
        let mut seg = zeroed();
        seg.rwnd_field = 1;
        assert_eq!(full_checksum(&seg), 0xFFFE);
    }

    #[test]
    fn image_layout() {
        let mut seg = TcpSegment::new(
            FlowKey { src: 9, dst: 9, sport: 0x0102, dport: 0x0304 },
            Flags::SYNACK,
        );
        seg.seq = 0x1_0506_0708;
        seg.ack = 0x090A_0B0C;
        seg.rwnd_field = 0xBEEF;
        seg.scale_bits = 7;
        let image = seg.header_image();
        assert_eq!(&image[0..12], &[1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12]);
        // doff 5, scale 7 in bits 6..=9, SYN|ACK
        assert_eq!(u16::from_be_bytes([image[12], image[13]]), 0x5000 | (7 << 6) | 0x12);
        assert_eq!(&image[14..16], &[0xBE, 0xEF]);
        assert_eq!(&image[18..20], &[0, 0]);
    }

    #[test]
    fn effective_window_examples() {
        assert_eq!(ack_with(100, 8).effective_rwnd(), 25_600);
        assert_eq!(ack_with(65535, 14).effective_rwnd(), 1_073_725_440);
        for s in 0..=14 {
            assert_eq!(ack_with(0, s).effective_rwnd(), 0);
        }
    }

    #[test]
    fn encode_scale_bounds() {
        let seg = ack_with(1000, 3);
        let s0 = seg.clone().encode_scale(0).unwrap();
        assert_eq!(s0.scale_bits, 0);
        assert!(s0.checksum_ok());
        let s14 = seg.clone().encode_scale(14).unwrap();
        assert_eq!(s14.scale_bits, 14);
        assert!(s14.checksum_ok());
        assert_eq!(s14.checksum, full_checksum(&s14));
        assert!(matches!(seg.encode_scale(15), Err(Error::ScaleOutOfRange(15))));
    }

    #[test]
    fn synack_is_also_ack() {
        assert!(Flags::SYNACK.is_synack());
        assert!(Flags::SYNACK.is_ack());
        assert!(!Flags::SYNACK.is_syn());
        assert!(Flags::SYN.is_syn());
        assert!(Flags::FINACK.is_fin() && Flags::FINACK.is_ack());
    }

    fn any_segment() -> impl Strategy<Value = TcpSegment> {
        (
            any::<(u16, u16, u32, u32)>(),
            any::<u8>(),
            any::<u16>(),
            0u8..=14,
        )
            .prop_map(|((sport, dport, seq, ack), flags, rwnd, scale)| {
                let mut seg = TcpSegment::new(
                    FlowKey { src: 0, dst: 1, sport, dport },
                    Flags::from_bits(flags),
                );
                seg.seq = seq as u64;
                seg.ack = ack as u64;
                seg.rwnd_field = rwnd;
                seg.scale_bits = scale;
                seg.seal();
                seg
            })
    }

    proptest! {
        #[test]
        fn sealed_segment_verifies(seg in any_segment()) {
            prop_assert!(seg.checksum_ok());
        }

        #[test]
        fn incremental_matches_full(seg in any_segment(), new in any::<u16>()) {
            let mut patched = seg.clone();
            patched.rewrite_rwnd(new);
            prop_assert_eq!(patched.checksum, full_checksum(&patched));
            prop_assert!(patched.checksum_ok());
        }

        #[test]
        fn rewrite_loses_under_one_scale_unit(seg in any_segment(), v in 0u64..(1u64 << 30)) {
            let mut out = seg.clone();
            let v = v.min((u16::MAX as u64) << seg.scale_bits);
            out.rewrite_effective_rwnd(v);
            prop_assert_eq!(out.effective_rwnd(), (v >> seg.scale_bits) << seg.scale_bits);
            prop_assert!(v - out.effective_rwnd() < (1u64 << seg.scale_bits));
        }
    }
}
