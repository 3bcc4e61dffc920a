use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::symbols::WcoSymbols;

/// The three cases `|A| < 1`, `|A| = 1`, `|A| > 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stratum {
    Inside,
    Circle,
    Outside,
}

impl Stratum {
    pub const ALL: [Stratum; 3] = [Stratum::Inside, Stratum::Circle, Stratum::Outside];

    pub fn of_trial(k: usize) -> Self {
        Self::ALL[k % 3]
    }

    pub fn name(self) -> &'static str {
        match self {
            Stratum::Inside => "|A|<1",
            Stratum::Circle => "|A|=1",
            Stratum::Outside => "|A|>1",
        }
    }
}

/// Stream `trial` of the generator seeded by `seed`.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

pub(crate) fn gaussian(rng: &mut ChaCha8Rng, sigma: f64) -> Complex<f64> {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex::new(sigma * re, sigma * im)
}

pub(crate) fn slope_in(rng: &mut ChaCha8Rng, stratum: Stratum) -> Complex<f64> {
    let theta = rng.random_range(0.0..std::f64::consts::TAU);
    let r = match stratum {
        Stratum::Inside => rng.random_range(0.0..1.0),
        Stratum::Circle => 1.0,
        Stratum::Outside => rng.random_range(1.0..2.0),
    };
    Complex::from_polar(r, theta)
}

/// `A` with modulus drawn in the stratum (uniform phase); `B`, `C`, `D`
/// i.i.d. standard complex Gaussians.
pub fn random_symbols(rng: &mut ChaCha8Rng, stratum: Stratum) -> WcoSymbols<f64> {
    let a = slope_in(rng, stratum);
    let b = gaussian(rng, 1.0);
    let mut c = gaussian(rng, 1.0);
    if c.norm() < 1e-3 {
        c = Complex::new(1.0, 0.0);
    }
    let d = gaussian(rng, 1.0);
    WcoSymbols::new(a, b, c, d).expect("C is non-zero")
}
