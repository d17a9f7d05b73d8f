//! Counter-based random streams (Philox4x64-10).
//!
//! A stream is addressed by `(master seed, trajectory id, lane)`: the seed is
//! the key, the id and lane sit in the counter, and the block index advances
//! in the low word. Nothing is shared between streams, so trajectories can be
//! stepped in any order or on any number of threads.

use rand::RngCore;
use rand_distr::{Distribution, StandardNormal};

const M0: u64 = 0xD2E7_470E_E14C_6C93;
const M1: u64 = 0xCA5A_8263_9512_1157;
const W0: u64 = 0x9E37_79B9_7F4A_7C15;
const W1: u64 = 0xBB67_AE85_84CA_A73B;

#[inline]
fn mulhilo(a: u64, b: u64) -> (u64, u64) {
    let p = (a as u128) * (b as u128);
    ((p >> 64) as u64, p as u64)
}

/// Ten-round Philox4x64 block function.
pub fn philox4x64(counter: [u64; 4], key: [u64; 2]) -> [u64; 4] {
    let mut c = counter;
    let mut k = key;
    for round in 0..10 {
        let (hi0, lo0) = mulhilo(M0, c[0]);
        let (hi1, lo1) = mulhilo(M1, c[2]);
        c = [hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0];
        if round < 9 {
            k = [k[0].wrapping_add(W0), k[1].wrapping_add(W1)];
        }
    }
    c
}

/// Lane used for the dynamics noise.
pub const LANE_NOISE: u64 = 0;
/// Lane used for sampling initial positions.
pub const LANE_INIT: u64 = 1;

#[derive(Debug, Clone)]
pub struct RngStream {
    key: [u64; 2],
    counter: [u64; 4],
    block: [u64; 4],
    next: usize,
}

impl RngStream {
    pub fn new(master_seed: u64, trajectory_id: u64, lane: u64) -> Self {
        Self { key: [master_seed, 0], counter: [0, trajectory_id, lane, 0], block: [0; 4], next: 4 }
    }

    fn refill(&mut self) {
        self.block = philox4x64(self.counter, self.key);
        self.counter[0] = self.counter[0].wrapping_add(1);
        if self.counter[0] == 0 {
            self.counter[3] = self.counter[3].wrapping_add(1);
        }
        self.next = 0;
    }

    /// Uniform on `[0, 1)` with 53 random bits.
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn standard_normal(&mut self) -> f64 {
        StandardNormal.sample(self)
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        (self.next_u64() >> 32) as u32
    }

    fn next_u64(&mut self) -> u64 {
        if self.next == 4 {
            self.refill();
        }
        let v = self.block[self.next];
        self.next += 1;
        v
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        for chunk in dst.chunks_mut(8) {
            let bytes = self.next_u64().to_le_bytes();
            chunk.copy_from_slice(&bytes[..chunk.len()]);
        }
    }
}

/// Noise stream of one trajectory.
pub fn rng_stream(master_seed: u64, trajectory_id: u64) -> RngStream {
    RngStream::new(master_seed, trajectory_id, LANE_NOISE)
}

/// Wiener increment with variance `2 D_Q dt`.
pub fn wiener_increment(stream: &mut RngStream, dt: f64, diffusion: f64) -> f64 {
    if dt == 0.0 {
        return 0.0;
    }
    (2.0 * diffusion * dt).sqrt() * stream.standard_normal()
}

#[cfg(test)]
mod tests {
    use super::*;

    // Reference blocks from an independent Philox4x64-10 implementation.
    #[test]
    fn known_answers() {
        assert_eq!(
            philox4x64([1, 0, 0, 0], [0, 0]),
            [0x02f4ba6408e4d89b, 0x3dd62b0b9ca8c5b2, 0x1c8667a55d902e79, 0x907d7a052fd5b4dc]
        );
        assert_eq!(
            philox4x64([4, 4, 5, 6], [1, 2]),
            [0x8070e5788d05927e, 0x1c5aef1cb5451508, 0xd04b22ec4863e2a0, 0xd67cc7da10e919ce]
        );
        assert_eq!(
            philox4x64([5, 4, 5, 6], [1, 2]),
            [0x00a7b5fae736fabf, 0x832df5ec2023505b, 0xf40f1906a82eedc2, 0xab5e719edeec3829]
        );
    }

    #[test]
    fn same_address_same_sequence() {
        let mut a = rng_stream(9, 3);
        let mut b = rng_stream(9, 3);
        for _ in 0..20 {
            assert_eq!(a.next_u64(), b.next_u64());
        }
    }

    #[test]
    fn lanes_and_ids_differ() {
        let first = |s: u64, id: u64, lane: u64| RngStream::new(s, id, lane).next_u64();
        assert_ne!(first(1, 0, 0), first(1, 1, 0));
        assert_ne!(first(1, 0, 0), first(1, 0, 1));
        assert_ne!(first(1, 0, 0), first(2, 0, 0));
    }

    #[test]
    fn uniform_in_unit_interval() {
        let mut s = rng_stream(0, 0);
        for _ in 0..10_000 {
            let u = s.uniform();
            assert!((0.0..1.0).contains(&u));
        }
    }

    #[test]
    fn zero_step_has_no_noise() {
        assert_eq!(wiener_increment(&mut rng_stream(1, 1), 0.0, 1.0), 0.0);
    }
}
