//! A Lipschitz d.c. function on `[−1, 0]` that is not a difference of two
//! Lipschitz convex functions near `0`.
//!
//! `d` is the indicator of `S = ⋃ₙ [−2^{2−2n}, −2^{1−2n})`, `g = ∫_{−1}^x d`,
//! `v(x)` is the total variation of `d` on `[−1, x]`, `w = v − d`, and
//! `c₁ = ∫ v`, `c₂ = ∫ w` are convex with `g = c₁ − c₂`.
//!
//! Every point `x ∈ [−1, 0)` lies in exactly one block `[−2^{1−m}, −2^{−m})`;
//! on that block `d = [m odd]` and `v = m − 1`. Closed forms below are
//! evaluated in exact dyadic arithmetic while `m ≤ 40`.

use super::dyadic::{Dyadic, SCALE_BITS};
use crate::error::{Error, Result};
use crate::verify::total_variation;
use serde::Serialize;

/// Largest block index evaluated exactly.
pub const EXACT_BLOCKS: u32 = 40;

fn check_range(x: f64) -> Result<()> {
    if !(-1.0..=0.0).contains(&x) {
        return Err(Error::Domain {
            point: vec![x],
            what: "the interval [−1, 0]".into(),
        });
    }
    Ok(())
}

/// The `m ≥ 1` with `x ∈ [−2^{1−m}, −2^{−m})`, read off the binary exponent of `x`.
pub fn block_index(x: f64) -> Result<u32> {
    check_range(x)?;
    if x == 0.0 {
        return Err(Error::Domain {
            point: vec![x],
            what: "a dyadic block (0 lies in none)".into(),
        });
    }
    // −x ∈ (2^{−m}, 2^{1−m}]
    let (mantissa, exp) = frexp(-x);
    Ok(if mantissa == 0.5 { (2 - exp) as u32 } else { (1 - exp) as u32 })
}

/// `y = mantissa · 2^exp` with `mantissa ∈ [½, 1)`, exact for positive finite `y`.
fn frexp(y: f64) -> (f64, i32) {
    let (y, bias) = if y < f64::MIN_POSITIVE { (y * 2f64.powi(64), -64) } else { (y, 0) };
    let bits = y.to_bits();
    let exp = ((bits >> 52) & 0x7ff) as i32 - 1022;
    let mantissa = f64::from_bits((bits & !(0x7ff << 52)) | (1022 << 52));
    (mantissa, exp + bias)
}

/// Indicator of `S`.
pub fn chyba_d(x: f64) -> Result<u8> {
    check_range(x)?;
    if x == 0.0 {
        return Ok(0);
    }
    Ok((block_index(x)? % 2) as u8)
}

/// Total variation of `d` on `[−1, x]`; diverges as `x → 0⁻`.
pub fn chyba_v(x: f64) -> Result<u64> {
    check_range(x)?;
    if x == 0.0 {
        return Err(Error::Domain {
            point: vec![0.0],
            what: "v, which is unbounded as x → 0⁻".into(),
        });
    }
    Ok(u64::from(block_index(x)? - 1))
}

/// `g(x) = ∫_{−1}^x d`.
pub fn chyba_g(x: f64) -> Result<f64> {
    Ok(integrals(x)?.g)
}

/// `(c₁(x), c₂(x))`.
pub fn chyba_c1_c2(x: f64) -> Result<(f64, f64)> {
    let i = integrals(x)?;
    Ok((i.c1, i.c2))
}

/// `g(−|x|)` for `|x| ≤ 1`.
pub fn chyba_composed(x: f64) -> Result<f64> {
    if !(x.abs() <= 1.0) {
        return Err(Error::Domain {
            point: vec![x],
            what: "the interval [−1, 1]".into(),
        });
    }
    chyba_g(-x.abs())
}

/// All closed-form values at one point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ChybaRow {
    pub x: f64,
    pub d: u8,
    pub g: f64,
    /// `None` at `x = 0`.
    pub v: Option<u64>,
    pub c1: f64,
    pub c2: f64,
}

struct Integrals {
    g: f64,
    c1: f64,
    c2: f64,
}

fn integrals(x: f64) -> Result<Integrals> {
    check_range(x)?;
    if x == 0.0 {
        return Ok(Integrals {
            g: 2.0 / 3.0,
            c1: 1.0,
            c2: 1.0 / 3.0,
        });
    }
    let m = block_index(x)?;
    if m <= EXACT_BLOCKS {
        Ok(exact_integrals(x, m))
    } else {
        Ok(float_integrals(x, m))
    }
}

fn exact_integrals(x: f64, m: u32) -> Integrals {
    let xs = Dyadic::from_f64(x);
    let left = Dyadic::pow2(1 - m as i32);
    let offset = xs.add(left); // x + 2^{1−m}
    let odd = m % 2 == 1;
    // Σ_{k<m} (k−1)·2^{−k} = 1 − m·2^{1−m}
    let c1 = Dyadic::pow2(0)
        .sub(left.mul_int(i128::from(m)))
        .add(offset.mul_int(i128::from(m) - 1));
    // Σ over odd k < m of 2^{−k} = 2·(4^j − 1)/3 · 4^{−j}, j = ⌊m/2⌋
    let j = m / 2;
    let g_head = Dyadic::from_scaled(((1i128 << (2 * j)) - 1) / 3 * 2 * (1i128 << (SCALE_BITS - 2 * j)));
    let g = if odd { g_head.add(offset) } else { g_head };
    // c₂ = ∫ (v − d), summed block by block
    let mut c2 = Dyadic::zero();
    for k in 1..m {
        let w = i128::from(k) - 1 - i128::from(k % 2);
        c2 = c2.add(Dyadic::pow2(-(k as i32)).mul_int(w));
    }
    let w_last = i128::from(m) - 1 - i128::from(m % 2);
    c2 = c2.add(offset.mul_int(w_last));
    Integrals {
        g: g.to_f64(),
        c1: c1.to_f64(),
        c2: c2.to_f64(),
    }
}

fn float_integrals(x: f64, m: u32) -> Integrals {
    let left = 2f64.powi(1 - m as i32);
    let offset = x + left;
    let mf = f64::from(m);
    let odd = m % 2 == 1;
    let j = (m / 2) as i32;
    let c1 = 1.0 - mf * left + (mf - 1.0) * offset;
    let g = 2.0 / 3.0 * (1.0 - 4f64.powi(-j)) + if odd { offset } else { 0.0 };
    // Σ_{k<m} [k odd]·2^{−k} reuses the head of g
    let w_head = (1.0 - mf * left) - 2.0 / 3.0 * (1.0 - 4f64.powi(-j));
    let c2 = w_head + (mf - 1.0 - if odd { 1.0 } else { 0.0 }) * offset;
    Integrals { g, c1, c2 }
}

pub fn chyba_row(x: f64) -> Result<ChybaRow> {
    let i = integrals(x)?;
    Ok(ChybaRow {
        x,
        d: chyba_d(x)?,
        g: i.g,
        v: if x == 0.0 { None } else { Some(chyba_v(x)?) },
        c1: i.c1,
        c2: i.c2,
    })
}

/// `n` equally spaced points from `−1` to `0` inclusive.
pub fn chyba_grid(n: usize) -> Result<Vec<ChybaRow>> {
    if n < 2 {
        return Err(Error::input("a grid needs at least two points"));
    }
    (0..n)
        .map(|i| chyba_row(-1.0 + i as f64 / (n - 1) as f64))
        .collect()
}

/// Evidence that `g` is no difference of `L`-Lipschitz convex functions on `[−½, 0]`.
///
/// If `g = p − q` with `p, q` convex and `L`-Lipschitz, then `d = p′₊ − q′₊` and
/// the variation of `d` on `[−½, x]` is at most `2L`; the report records the
/// first point where the computed variation exceeds that.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LipschitzPairWitness {
    pub lipschitz: f64,
    pub right_end: f64,
    pub variation: f64,
    pub exceeds: bool,
    pub note: String,
}

pub fn lipschitz_pair_witness(lipschitz: u32) -> Result<LipschitzPairWitness> {
    let k = 2 * lipschitz + 4;
    let right_end = -2f64.powi(-(k as i32));
    let d = |t: f64| chyba_d(t).map_or(f64::NAN, f64::from);
    let variation = total_variation(&d, -0.5, right_end, k + 4)?;
    let bound = 2.0 * f64::from(lipschitz);
    Ok(LipschitzPairWitness {
        lipschitz: f64::from(lipschitz),
        right_end,
        variation,
        exceeds: variation > bound,
        note: format!(
            "a difference of {lipschitz}-Lipschitz convex functions has derivative variation at most {bound} on [−1/2, {right_end}]"
        ),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn block_boundaries() {
        assert_eq!(block_index(-1.0).unwrap(), 1);
        assert_eq!(block_index(-0.5).unwrap(), 2);
        assert_eq!(block_index(-0.500_000_1).unwrap(), 1);
        assert_eq!(block_index(-2f64.powi(-10)).unwrap(), 11);
        assert_eq!(block_index(-f64::MIN_POSITIVE / 4.0).unwrap(), 1025);
    }

    #[test]
    fn indicator_values() {
        assert_eq!(chyba_d(-0.75).unwrap(), 1);
        assert_eq!(chyba_d(-0.4).unwrap(), 0);
        assert_eq!(chyba_d(-0.2).unwrap(), 1);
        assert_eq!(chyba_d(-0.25).unwrap(), 1);
        assert_eq!(chyba_d(-0.125).unwrap(), 0);
        assert!(chyba_d(0.1).is_err());
    }

    #[test]
    fn closed_forms_at_block_ends() {
        assert_eq!(chyba_g(-1.0).unwrap(), 0.0);
        assert_eq!(chyba_g(-0.5).unwrap(), 0.5);
        assert_eq!(chyba_c1_c2(-1.0).unwrap(), (0.0, 0.0));
        assert_eq!(chyba_v(-0.6).unwrap(), 0);
        assert_eq!(chyba_v(-0.3).unwrap(), 1);
        assert_eq!(chyba_v(-2f64.powi(-10)).unwrap(), 10);
        assert!(chyba_v(0.0).is_err());
    }

    #[test]
    fn exact_and_float_branches_meet() {
        let x = -2f64.powi(-41) * 1.5;
        let m = block_index(x).unwrap();
        let e = exact_integrals(x, m);
        let f = float_integrals(x, m);
        assert!((e.g - f.g).abs() < 1e-15 && (e.c1 - f.c1).abs() < 1e-15 && (e.c2 - f.c2).abs() < 1e-15);
    }
}
