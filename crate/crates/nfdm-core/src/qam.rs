//! Cross 32-QAM: the 6x6 odd-integer grid without its four corners, scaled by
//! 1/sqrt(20) for unit mean symbol energy.
//!
//! Labeling is frozen: 5 bits [b4 b3 b2 b1 b0], MSB first.
//!   b3 -> sign of re (1 = negative), b4 -> sign of im (1 = negative);
//!   b2 b1 b0 Gray-code a snake path over the 8 first-quadrant points.
//! Crossing either axis flips exactly one bit, and the in-quadrant path is
//! Gray, so the labeling is quasi-Gray everywhere (a handful of diagonal
//! reflections at the cross notches differ in 2 bits — unavoidable on the
//! cross shape).

use crate::scalar::{Scalar, C};

pub const BITS_PER_SYMBOL: usize = 5;
pub const CONSTELLATION_SIZE: usize = 32;

/// First-quadrant points along the Gray snake path. Integer coordinates
/// before the 1/sqrt(20) scaling.
const QUAD_PATH: [(i8, i8); 8] = [
    (1, 1), // Gray 000
    (3, 1), // Gray 001
    (5, 1), // Gray 011
    (5, 3), // Gray 010
    (3, 3), // Gray 110
    (1, 3), // Gray 111
    (1, 5), // Gray 101
    (3, 5), // Gray 100
];

/// Gray decode of the low three bits onto the path position.
/// Path order: 000,001,011,010,110,111,101,100.
const LOW3_TO_PATH: [usize; 8] = [0, 1, 3, 2, 7, 6, 4, 5];

/// Energy normalization: mean integer-grid energy of the cross is 20.
pub fn scale<T: Scalar>() -> T {
    T::one() / T::of(20.0).sqrt()
}

/// Map a 5-bit label to its constellation point (unit mean energy).
pub fn map_label<T: Scalar>(label: u8) -> C<T> {
    debug_assert!(label < 32);
    let low3 = (label & 0b111) as usize;
    let (re_base, im_base) = QUAD_PATH[LOW3_TO_PATH[low3]];
    let re_sign = if label & 0b01000 != 0 { -1.0 } else { 1.0 };
    let im_sign = if label & 0b10000 != 0 { -1.0 } else { 1.0 };
    let s = scale::<T>();
    C::new(
        T::of(re_sign * re_base as f64) * s,
        T::of(im_sign * im_base as f64) * s,
    )
}

/// The full constellation, indexed by label.
pub fn constellation<T: Scalar>() -> [C<T>; CONSTELLATION_SIZE] {
    std::array::from_fn(|i| map_label(i as u8))
}

/// Pack a bit slice (5 bits per symbol, MSB first) into symbols.
pub fn map_bits<T: Scalar>(bits: &[u8]) -> Vec<C<T>> {
    assert_eq!(bits.len() % BITS_PER_SYMBOL, 0);
    bits.chunks_exact(BITS_PER_SYMBOL)
        .map(|c| {
            let label = (c[0] << 4) | (c[1] << 3) | (c[2] << 2) | (c[3] << 1) | c[4];
            map_label(label)
        })
        .collect()
}

pub fn label_to_bits(label: u8) -> [u8; BITS_PER_SYMBOL] {
    [
        (label >> 4) & 1,
        (label >> 3) & 1,
        (label >> 2) & 1,
        (label >> 1) & 1,
        label & 1,
    ]
}

/// Minimum-distance hard decision.
pub fn hard_decision<T: Scalar>(y: C<T>) -> u8 {
    let mut best = 0u8;
    let mut best_d = T::infinity();
    for (i, c) in constellation::<T>().iter().enumerate() {
        let d = (y - *c).norm_sqr();
        if d < best_d {
            best_d = d;
            best = i as u8;
        }
    }
    best
}

/// Exact per-bit LLRs under a circular Gaussian channel with total noise
/// variance `sigma2` (both quadratures combined).
///
/// Convention: llr[j] = ln P(bit_j = 0 | y) - ln P(bit_j = 1 | y), bit 0 of
/// the output being the label MSB (b4). Computed with log-sum-exp over the
/// full constellation, so it stays finite at high SNR.
pub fn llrs<T: Scalar>(y: C<T>, sigma2: T, out: &mut [T; BITS_PER_SYMBOL]) {
    let con = constellation::<T>();
    let inv = T::one() / sigma2.max(T::of(1e-300));
    // accumulate per-bit log-sum-exp for each hypothesis
    let mut m0 = [T::neg_infinity(); BITS_PER_SYMBOL];
    let mut m1 = [T::neg_infinity(); BITS_PER_SYMBOL];
    let mut metric = [T::zero(); CONSTELLATION_SIZE];
    for (i, c) in con.iter().enumerate() {
        metric[i] = -(y - *c).norm_sqr() * inv;
        for (j, m) in m0.iter_mut().enumerate() {
            let bit = (i >> (4 - j)) & 1;
            if bit == 0 {
                *m = m.max(metric[i]);
            } else {
                m1[j] = m1[j].max(metric[i]);
            }
        }
    }
    let mut s0 = [T::zero(); BITS_PER_SYMBOL];
    let mut s1 = [T::zero(); BITS_PER_SYMBOL];
    for (i, &m) in metric.iter().enumerate() {
        for j in 0..BITS_PER_SYMBOL {
            let bit = (i >> (4 - j)) & 1;
            if bit == 0 {
                s0[j] += (m - m0[j]).exp();
            } else {
                s1[j] += (m - m1[j]).exp();
            }
        }
    }
    for j in 0..BITS_PER_SYMBOL {
        out[j] = (m0[j] + s0[j].ln()) - (m1[j] + s1[j].ln());
    }
}
