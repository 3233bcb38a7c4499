//! Fixed-point dyadic rationals `n / 2^100`, exact for the block arithmetic of the gallery.

/// Number of fractional bits.
pub const SCALE_BITS: u32 = 100;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Dyadic(i128);

impl Dyadic {
    pub fn zero() -> Self {
        Dyadic(0)
    }

    pub fn from_scaled(n: i128) -> Self {
        Dyadic(n)
    }

    /// `2^e`, for `−100 ≤ e ≤ 26`.
    pub fn pow2(e: i32) -> Self {
        let shift = SCALE_BITS as i32 + e;
        assert!((0..127).contains(&shift), "2^{e} does not fit");
        Dyadic(1i128 << shift)
    }

    /// Exact conversion; panics when `x` has bits below `2^−100` or is too large.
    pub fn from_f64(x: f64) -> Self {
        if x == 0.0 {
            return Dyadic(0);
        }
        let bits = x.to_bits();
        let exp = ((bits >> 52) & 0x7ff) as i32;
        assert!(exp != 0 && exp != 0x7ff, "{x} is not a normal float");
        let mantissa = ((bits & ((1u64 << 52) - 1)) | (1u64 << 52)) as i128;
        // x = ±mantissa · 2^(exp − 1075)
        let shift = exp - 1075 + SCALE_BITS as i32;
        let mag = if shift >= 0 {
            assert!(shift < 74, "{x} is too large");
            mantissa << shift
        } else {
            let s = -shift;
            assert!(s < 64 && mantissa & ((1i128 << s) - 1) == 0, "{x} has bits below 2^-{SCALE_BITS}");
            mantissa >> s
        };
        Dyadic(if x < 0.0 { -mag } else { mag })
    }

    pub fn add(self, other: Dyadic) -> Self {
        Dyadic(self.0.checked_add(other.0).expect("dyadic overflow"))
    }

    pub fn sub(self, other: Dyadic) -> Self {
        Dyadic(self.0.checked_sub(other.0).expect("dyadic overflow"))
    }

    pub fn mul_int(self, k: i128) -> Self {
        Dyadic(self.0.checked_mul(k).expect("dyadic overflow"))
    }

    /// Nearest float (one rounding).
    pub fn to_f64(self) -> f64 {
        self.0 as f64 * 2f64.powi(-(SCALE_BITS as i32))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips() {
        for x in [-1.0, -0.75, 0.5, -2f64.powi(-40) * 1.25, 3.0] {
            assert_eq!(Dyadic::from_f64(x).to_f64(), x);
        }
        assert_eq!(Dyadic::pow2(-3).to_f64(), 0.125);
        assert_eq!(Dyadic::pow2(-1).add(Dyadic::pow2(-2)).mul_int(4).to_f64(), 3.0);
    }
}
