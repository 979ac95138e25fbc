//! Gray-mapped unit-modulus constellations.
//!
//! QPSK maps the bit pair `(b0, b1)` to `((1 - 2 b0) + i (1 - 2 b1)) / sqrt(2)`;
//! BPSK maps `b` to `1 - 2 b`. Hard decisions slice on the sign of each
//! component; a component exactly on the boundary decides bit 0.

use super::Modulation;
use crate::{Error, Result, C64};
use std::f64::consts::FRAC_1_SQRT_2;

pub fn modulate(bits: &[bool], modulation: Modulation) -> Result<Vec<C64>> {
    let bps = modulation.bits_per_symbol();
    if bits.len() % bps != 0 {
        return Err(Error::BitLength {
            len: bits.len(),
            bits_per_symbol: bps,
        });
    }
    let level = |b: bool| if b { -1.0 } else { 1.0 };
    Ok(match modulation {
        Modulation::Qpsk => bits
            .chunks_exact(2)
            .map(|p| C64::new(level(p[0]), level(p[1])) * FRAC_1_SQRT_2)
            .collect(),
        Modulation::Bpsk => bits.iter().map(|&b| C64::new(level(b), 0.0)).collect(),
    })
}

/// Nearest-point hard decision for one symbol, appended to `out`.
#[inline]
pub fn slice_into(symbol: C64, modulation: Modulation, out: &mut Vec<bool>) {
    match modulation {
        Modulation::Qpsk => {
            out.push(symbol.re < 0.0);
            out.push(symbol.im < 0.0);
        }
        Modulation::Bpsk => out.push(symbol.re < 0.0),
    }
}

pub fn demodulate(symbols: &[C64], modulation: Modulation) -> Vec<bool> {
    let mut bits = Vec::with_capacity(symbols.len() * modulation.bits_per_symbol());
    for &s in symbols {
        slice_into(s, modulation, &mut bits);
    }
    bits
}

/// Constellation points in bit-pattern order.
pub fn constellation(modulation: Modulation) -> Vec<C64> {
    let bps = modulation.bits_per_symbol();
    (0..1usize << bps)
        .map(|v| {
            let bits: Vec<bool> = (0..bps).rev().map(|k| (v >> k) & 1 == 1).collect();
            modulate(&bits, modulation).expect("whole symbol")[0]
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;

    fn min_pairwise_distance(points: &[C64]) -> f64 {
        let mut best = f64::INFINITY;
        for (i, a) in points.iter().enumerate() {
            for b in &points[i + 1..] {
                best = best.min((a - b).norm());
            }
        }
        best
    }

    #[test]
    fn minimum_distances() {
        let q = constellation(Modulation::Qpsk);
        assert!((min_pairwise_distance(&q) - 2f64.sqrt()).abs() < 1e-12);
        assert!((min_pairwise_distance(&constellation(Modulation::Bpsk)) - 2.0).abs() < 1e-12);
        assert!((Modulation::Qpsk.min_distance() - min_pairwise_distance(&q)).abs() < 1e-12);
    }

    #[test]
    fn unit_modulus_and_gray_neighbours() {
        let q = constellation(Modulation::Qpsk);
        for s in &q {
            assert!((s.norm() - 1.0).abs() < 1e-12);
        }
        // nearest neighbours differ in exactly one bit
        let bits: Vec<Vec<bool>> = q.iter().map(|&s| demodulate(&[s], Modulation::Qpsk)).collect();
        for i in 0..4 {
            for j in 0..4 {
                if (q[i] - q[j]).norm() < 1.5 && i != j {
                    let diff = bits[i].iter().zip(&bits[j]).filter(|(a, b)| a != b).count();
                    assert_eq!(diff, 1);
                }
            }
        }
    }

    #[test]
    fn round_trip_random_bits() {
        let mut rng = rng::substream(5, &[]);
        let bits: Vec<bool> = (0..1000).map(|_| rng::bit(&mut rng)).collect();
        for m in [Modulation::Qpsk, Modulation::Bpsk] {
            assert_eq!(demodulate(&modulate(&bits, m).unwrap(), m), bits);
        }
    }

    #[test]
    fn odd_length_rejected_for_qpsk() {
        assert!(matches!(
            modulate(&[true, false, true], Modulation::Qpsk),
            Err(Error::BitLength { len: 3, .. })
        ));
    }

    #[test]
    fn boundary_decides_zero() {
        assert_eq!(demodulate(&[C64::new(0.0, 0.3)], Modulation::Bpsk), vec![false]);
        assert_eq!(
            demodulate(&[C64::new(0.0, -0.0)], Modulation::Qpsk),
            vec![false, false]
        );
    }
}
