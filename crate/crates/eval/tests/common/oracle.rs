//! Brute-force bootstrap following the documented procedure, written
//! without the library's generator crate.

#![allow(dead_code)]

pub struct SplitMix(pub u64);

impl SplitMix {
    pub fn next(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9e37_79b9_7f4a_7c15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }
}

pub struct Xoshiro([u64; 4]);

impl Xoshiro {
    pub fn from_u64(seed: u64) -> Self {
        let mut sm = SplitMix(seed);
        Xoshiro([sm.next(), sm.next(), sm.next(), sm.next()])
    }

    pub fn next(&mut self) -> u64 {
        let s = &mut self.0;
        let result = s[0].wrapping_add(s[3]).rotate_left(23).wrapping_add(s[0]);
        let t = s[1] << 17;
        s[2] ^= s[0];
        s[3] ^= s[1];
        s[1] ^= s[2];
        s[0] ^= s[3];
        s[2] ^= t;
        s[3] = s[3].rotate_left(45);
        result
    }
}

/// Rate of every resample, in generation order.
pub fn resampled_rates(outcomes: &[bool], resamples: usize, seed: u64) -> Vec<f64> {
    let n = outcomes.len() as u128;
    let mut master = SplitMix(seed);
    let mut rates = Vec::with_capacity(resamples);
    for _ in 0..resamples {
        let mut rng = Xoshiro::from_u64(master.next());
        let mut hits = 0u64;
        for _ in 0..outcomes.len() {
            let i = ((rng.next() as u128 * n) >> 64) as usize;
            hits += outcomes[i] as u64;
        }
        rates.push(hits as f64 * 100.0 / outcomes.len() as f64);
    }
    rates
}

/// Linear-interpolation quantile on 1-based ranks.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let rank = 1.0 + q * (sorted.len() as f64 - 1.0);
    let below = rank.floor();
    let frac = rank - below;
    let a = sorted[below as usize - 1];
    let b = if (below as usize) < sorted.len() { sorted[below as usize] } else { a };
    a * (1.0 - frac) + b * frac
}

pub fn brute_force_ci(outcomes: &[bool], resamples: usize, level: f64, seed: u64) -> (f64, f64) {
    let mut rates = resampled_rates(outcomes, resamples, seed);
    rates.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let alpha = 1.0 - level;
    (quantile(&rates, alpha / 2.0), quantile(&rates, 1.0 - alpha / 2.0))
}

pub fn bernoulli_half(n: usize, seed: u64) -> Vec<bool> {
    let mut rng = Xoshiro::from_u64(seed);
    (0..n).map(|_| rng.next() >> 63 == 1).collect()
}

pub fn parse_bits(bits: &str) -> Vec<bool> {
    bits.chars().map(|c| c == '1').collect()
}
