//! Small numeric helpers shared by the simulator and the analysis code.

/// Distance below which a transcendental value is treated as the integer it
/// approximates before taking a ceiling.
pub const NEAR_INTEGER_GUARD: f64 = 1e-9;

/// Ceiling of `x` that snaps values within [`NEAR_INTEGER_GUARD`] of an
/// integer onto that integer first.
///
/// `2f64.powi(3)` is exact, but `1.3361f64.powf(j)` or `ln(16) / ln(2)` are
/// not, and a plain `ceil` would turn `3.0000000000000004` into `4`.
pub fn guarded_ceil(x: f64) -> f64 {
    let nearest = x.round();
    if (x - nearest).abs() < NEAR_INTEGER_GUARD {
        nearest
    } else {
        x.ceil()
    }
}

/// 64-bit finalizer from SplitMix64 (Steele, Lea and Flood).
///
/// This is the fixed mixing function behind every derived seed in the crate:
/// per-trial seeds, per-station keys and per-round random words. It is a
/// bijection on `u64`, so distinct inputs never collide.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Combines two words into one seed. Not symmetric: `combine(a, b) != combine(b, a)`.
#[inline]
pub fn combine(a: u64, b: u64) -> u64 {
    mix64(mix64(a) ^ b.rotate_left(17))
}

/// Uniform double in `[0, 1)` built from the top 53 bits of `word`.
#[inline]
pub fn unit_f64(word: u64) -> f64 {
    (word >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Formats `x` with six significant digits, dropping trailing zeros, in the
/// style of C's `%.6g`.
pub fn format_sig6(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return if x.is_nan() {
            "nan".to_string()
        } else if x > 0.0 {
            "inf".to_string()
        } else {
            "-inf".to_string()
        };
    }
    // Round to 6 significant digits first so that e.g. 999999.7 moves to the
    // next decade before the layout is chosen.
    let sci = format!("{:.5e}", x);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("exponent");
    if (-5..6).contains(&exp) {
        let decimals = (5 - exp).max(0) as usize;
        trim_zeros(format!("{:.*}", decimals, x))
    } else {
        format!("{}e{}", trim_zeros(mantissa.to_string()), exp)
    }
}

fn trim_zeros(s: String) -> String {
    if !s.contains('.') {
        return s;
    }
    let t = s.trim_end_matches('0').trim_end_matches('.');
    t.to_string()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ceil_snaps_near_integers() {
        assert_eq!(guarded_ceil(3.0000000000000004), 3.0);
        assert_eq!(guarded_ceil(2.9999999999), 3.0);
        assert_eq!(guarded_ceil(7.59375), 8.0);
        assert_eq!(guarded_ceil(1.3361), 2.0);
        assert_eq!(guarded_ceil(0.0), 0.0);
        assert_eq!(guarded_ceil(9.568), 10.0);
    }

    #[test]
    fn unit_interval() {
        assert_eq!(unit_f64(0), 0.0);
        assert!(unit_f64(u64::MAX) < 1.0);
    }

    #[test]
    fn mix_is_not_identity() {
        assert_ne!(mix64(0), 0);
        assert_ne!(combine(1, 2), combine(2, 1));
    }

    #[test]
    fn sig6() {
        assert_eq!(format_sig6(0.188209329921), "0.188209");
        assert_eq!(format_sig6(8.837021), "8.83702");
        assert_eq!(format_sig6(1024.0), "1024");
        assert_eq!(format_sig6(0.5), "0.5");
        assert_eq!(format_sig6(1.0e-7), "1e-7");
        assert_eq!(format_sig6(123456789.0), "1.23457e8");
        assert_eq!(format_sig6(999999.7), "1e6");
        assert_eq!(format_sig6(-2.5), "-2.5");
        assert_eq!(format_sig6(0.000123456789), "0.000123457");
    }
}
