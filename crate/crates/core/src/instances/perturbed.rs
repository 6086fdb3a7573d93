//! Cross-polytope with Gaussian noise on every left-hand-side coefficient.
//!
//! Row `I`: `sum_{i∈I} a_{I,i} x_i + sum_{i∉I} (1 - a_{I,i} x_i) >= 2n/25`
//! with `a_{I,i} = 1 + g_{I,i}`, `g ~ N(0, 1/400)`, stored as
//! `sum_{i∈I} a x_i - sum_{i∉I} a x_i >= 2n/25 - (n - |I|)`.
//!
//! Each `g_{I,i}` comes from its own position in a ChaCha8 stream keyed by
//! the seed and `I`, goes through Box–Muller, and is rounded to the nearest
//! multiple of `2^-20`, so the polytope is an exact function of the seed.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::One;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{InstanceError, MAX_EXPLICIT_EXP};
use crate::lp::{LinearConstraint, Polytope, Provenance};
use crate::rational::{self, Rational};

pub const PERTURBED_DENOM_LOG2: u32 = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PerturbedSpec {
    pub n: usize,
    pub seed: u64,
}

impl PerturbedSpec {
    /// Standard deviation of the noise, `1/20`.
    pub fn sigma() -> Rational {
        rational::ratio(1, 20)
    }

    /// `1.6 n / 20 = 2n / 25`.
    pub fn rhs(&self) -> Rational {
        rational::ratio(2 * self.n as i64, 25)
    }

    pub fn denominator() -> BigInt {
        BigInt::one() << PERTURBED_DENOM_LOG2
    }
}

/// Noise for row `mask`, one sample per coordinate.
///
/// `ln` and `cos` come from the platform libm; a last-bit difference could
/// move a sample across a rounding boundary on another platform.
fn row_noise(seed: u64, n: usize, mask: u64) -> Vec<Rational> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(mask);
    let scale = (1u64 << PERTURBED_DENOM_LOG2) as f64;
    (0..n)
        .map(|_| {
            let u1: f64 = 1.0 - rng.random::<f64>();
            let u2: f64 = rng.random::<f64>();
            let z = (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos();
            let steps = (z / 20.0 * scale).round() as i64;
            Rational::new(steps.into(), PerturbedSpec::denominator())
        })
        .collect()
}

pub fn gen_perturbed_cross(spec: PerturbedSpec) -> Result<Polytope, InstanceError> {
    let n = spec.n;
    if n == 0 {
        return Err(InstanceError::SpecViolation("n must be at least 1".into()));
    }
    if n > MAX_EXPLICIT_EXP {
        return Err(InstanceError::TooLarge(n));
    }
    let rhs = spec.rhs();
    let rows = (0..1u64 << n)
        .map(|mask| {
            let noise = row_noise(spec.seed, n, mask);
            let mut outside = 0i64;
            let coeffs = noise
                .into_iter()
                .enumerate()
                .map(|(i, g)| {
                    let a = Rational::one() + g;
                    if mask >> i & 1 == 1 {
                        a
                    } else {
                        outside += 1;
                        -a
                    }
                })
                .collect();
            LinearConstraint::ge(coeffs, &rhs - rational::int(outside))
        })
        .collect();
    let provenance = Provenance {
        family: "perturbed-cross".into(),
        params: BTreeMap::from([
            ("n".into(), n.to_string()),
            ("sigma".into(), rational::format(&PerturbedSpec::sigma())),
            ("rhs".into(), rational::format(&rhs)),
        ]),
        seed: Some(spec.seed),
        rounding_denominator: Some(PerturbedSpec::denominator().to_string()),
    };
    Ok(Polytope::new(n, rows, true)?.with_provenance(provenance))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;

    #[test]
    fn deterministic_and_exact() {
        let spec = PerturbedSpec { n: 4, seed: 7 };
        let a = gen_perturbed_cross(spec).unwrap();
        let b = gen_perturbed_cross(spec).unwrap();
        assert_eq!(a.rows(), b.rows());
        assert_eq!(a.rows().len(), 16);
        assert_eq!(spec.rhs(), ratio(8, 25));
        assert_eq!(PerturbedSpec::sigma() * PerturbedSpec::sigma(), ratio(1, 400));
        let den = PerturbedSpec::denominator();
        for r in a.rows() {
            for c in &r.coeffs {
                assert!((&den % c.denom()) == BigInt::from(0));
            }
        }
        let other = gen_perturbed_cross(PerturbedSpec { n: 4, seed: 8 }).unwrap();
        assert_ne!(a.rows(), other.rows());
    }
}
