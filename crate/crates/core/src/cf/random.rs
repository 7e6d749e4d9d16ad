//! Seeded uniform samples and the continued-fraction digits they certify.

use num_bigint::{BigUint, RandBigInt};
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Full continued-fraction expansion `[a_0; a_1, ..., a_m]` of `num/den`.
fn expand_rational(mut num: BigUint, mut den: BigUint) -> Vec<BigUint> {
    let mut out = Vec::new();
    while !den.is_zero() {
        let (a, r) = num.div_rem(&den);
        out.push(a);
        num = den;
        den = r;
    }
    out
}

/// Digits `a_1, a_2, ...` shared by every real in `[n/2^bits, (n+1)/2^bits]`.
///
/// Each endpoint is rational; its final coefficient is ambiguous (`[.., a]`
/// equals `[.., a-1, 1]`), so it is dropped before taking the common prefix.
/// Digits that do not fit in `u64` end the stream.
pub(crate) fn dyadic_cell_digits(n: &BigUint, bits: u32) -> Vec<u64> {
    let den = BigUint::one() << bits as usize;
    let mut lo = expand_rational(n.clone(), den.clone());
    let mut hi = expand_rational(n + 1u32, den);
    lo.pop();
    hi.pop();
    lo.iter()
        .zip(hi.iter())
        .skip(1)
        .take_while(|(a, b)| a == b)
        .map_while(|(a, _)| a.to_u64())
        .collect()
}

pub(crate) fn sample_numerator(rng: &mut ChaCha8Rng, bits: u32) -> BigUint {
    rng.gen_biguint(bits as u64)
}

pub(crate) fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub(crate) fn seeded_digits(seed: u64, bits: u32) -> Vec<u64> {
    let mut r = rng(seed);
    let n = sample_numerator(&mut r, bits);
    dyadic_cell_digits(&n, bits)
}
