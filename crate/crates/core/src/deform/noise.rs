//! Seeded 3D gradient noise and the hard (absolute-value) turbulence built
//! on it.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::Vec3;

/// `|noise(p)| <= NOISE_AMPLITUDE_BOUND` everywhere. Each corner term is
/// `g·d` with `g` having two unit components and `|dᵢ| <= 1`, so `|g·d| <= 2`,
/// and the fade-weighted trilinear blend is a convex combination.
pub const NOISE_AMPLITUDE_BOUND: f64 = 2.0;

pub const TURBULENCE_OCTAVES: u32 = 4;

/// Improved-Perlin gradient noise over a seeded permutation table.
#[derive(Debug, Clone)]
pub struct GradientNoise {
    perm: [u8; 512],
}

fn fade(t: f64) -> f64 {
    t * t * t * (t * (t * 6.0 - 15.0) + 10.0)
}

fn lerp(t: f64, a: f64, b: f64) -> f64 {
    a + t * (b - a)
}

/// Dot product with one of the 12 cube-edge gradients.
fn grad(hash: u8, x: f64, y: f64, z: f64) -> f64 {
    match hash % 12 {
        0 => x + y,
        1 => -x + y,
        2 => x - y,
        3 => -x - y,
        4 => x + z,
        5 => -x + z,
        6 => x - z,
        7 => -x - z,
        8 => y + z,
        9 => -y + z,
        10 => y - z,
        _ => -y - z,
    }
}

impl GradientNoise {
    pub fn new(seed: u64) -> Self {
        let mut table: Vec<u8> = (0..=255).collect();
        table.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        let mut perm = [0u8; 512];
        for (i, p) in perm.iter_mut().enumerate() {
            *p = table[i & 255];
        }
        GradientNoise { perm }
    }

    /// Zero at every integer lattice point.
    pub fn sample(&self, p: &Vec3) -> f64 {
        let (fx, fy, fz) = (p.x.floor(), p.y.floor(), p.z.floor());
        let xi = (fx as i64 & 255) as usize;
        let yi = (fy as i64 & 255) as usize;
        let zi = (fz as i64 & 255) as usize;
        let (x, y, z) = (p.x - fx, p.y - fy, p.z - fz);
        let (u, v, w) = (fade(x), fade(y), fade(z));
        let pm = &self.perm;
        let a = pm[xi] as usize + yi;
        let aa = pm[a] as usize + zi;
        let ab = pm[a + 1] as usize + zi;
        let b = pm[xi + 1] as usize + yi;
        let ba = pm[b] as usize + zi;
        let bb = pm[b + 1] as usize + zi;

        lerp(
            w,
            lerp(
                v,
                lerp(u, grad(pm[aa], x, y, z), grad(pm[ba], x - 1.0, y, z)),
                lerp(u, grad(pm[ab], x, y - 1.0, z), grad(pm[bb], x - 1.0, y - 1.0, z)),
            ),
            lerp(
                v,
                lerp(u, grad(pm[aa + 1], x, y, z - 1.0), grad(pm[ba + 1], x - 1.0, y, z - 1.0)),
                lerp(
                    u,
                    grad(pm[ab + 1], x, y - 1.0, z - 1.0),
                    grad(pm[bb + 1], x - 1.0, y - 1.0, z - 1.0),
                ),
            ),
        )
    }
}

/// `Σₒ |noise(2ᵒ p)| / 2ᵒ` over four octaves, divided by its closed-form
/// maximum `1.875 · NOISE_AMPLITUDE_BOUND` so the result lies in [0, 1].
#[derive(Debug, Clone)]
pub struct Turbulence {
    noise: GradientNoise,
}

impl Turbulence {
    pub fn new(seed: u64) -> Self {
        Turbulence {
            noise: GradientNoise::new(seed),
        }
    }

    pub fn max_raw() -> f64 {
        (0..TURBULENCE_OCTAVES).map(|o| 0.5f64.powi(o as i32)).sum::<f64>() * NOISE_AMPLITUDE_BOUND
    }

    pub fn sample(&self, p: &Vec3) -> f64 {
        let mut sum = 0.0;
        let mut freq = 1.0;
        for _ in 0..TURBULENCE_OCTAVES {
            sum += self.noise.sample(&(p * freq)).abs() / freq;
            freq *= 2.0;
        }
        sum / Self::max_raw()
    }
}

pub fn hard_turbulence(point: &Vec3, seed: u64) -> f64 {
    Turbulence::new(seed).sample(point)
}
