//! High-precision numeric oracle for the exact-kernel test suites.
//!
//! Everything here works on fixed-point big integers with 100 decimal
//! digits of precision: a real value `x` is represented by the integer
//! `round(x * 10^100)`. That is enough headroom to separate a true zero
//! (which only accumulates ~10^-95 of series and rounding error) from the
//! smallest genuinely nonzero quantity that appears for two stacked regular
//! n-gons with n <= 16 (on the order of 10^-2).
//!
//! The oracle deliberately shares no code with the combinatorial kernel it
//! checks: vertex coordinates are materialized from `cos`/`sin` evaluated by
//! Taylor series, and orientation is a literal 3x3 determinant of coordinate
//! differences.
//!
//! Coordinatization: unit circumradius, top polygon at height 1, bottom at
//! height 0, bottom rotated by pi/n for the antiprism.

use num_bigint::BigInt;

/// Decimal digits carried by every fixed-point value.
pub const DIGITS: u32 = 100;

/// First 100 decimals of pi.
const PI_DECIMALS: &str = "1415926535897932384626433832795028841971693993751058209749445923078164062862089986280348253421170679";

/// Fixed-point real number at scale `10^DIGITS`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub struct Fixed(pub BigInt);

impl Fixed {
    pub fn zero() -> Self {
        Fixed(BigInt::from(0))
    }

    pub fn one() -> Self {
        Fixed(scale())
    }

    pub fn from_int(v: i64) -> Self {
        Fixed(BigInt::from(v) * scale())
    }

    pub fn add(&self, other: &Fixed) -> Fixed {
        Fixed(&self.0 + &other.0)
    }

    pub fn sub(&self, other: &Fixed) -> Fixed {
        Fixed(&self.0 - &other.0)
    }

    pub fn mul(&self, other: &Fixed) -> Fixed {
        Fixed(&self.0 * &other.0 / scale())
    }

    pub fn neg(&self) -> Fixed {
        Fixed(-&self.0)
    }

    /// Sign with a symbolic-zero threshold: anything below `10^-margin` in
    /// absolute value is treated as exactly zero.
    pub fn sign_with_margin(&self, margin: u32) -> i8 {
        let threshold = BigInt::from(10).pow(DIGITS - margin);
        if self.0 > threshold {
            1
        } else if self.0 < -threshold {
            -1
        } else {
            0
        }
    }

    /// Approximate conversion for debugging and sanity tests.
    pub fn to_f64(&self) -> f64 {
        let s = self.0.to_string();
        let v: f64 = s.parse().unwrap_or(0.0);
        v / 10f64.powi(DIGITS as i32)
    }
}

fn scale() -> BigInt {
    BigInt::from(10).pow(DIGITS)
}

/// pi at the working scale.
pub fn pi() -> Fixed {
    let digits: BigInt = PI_DECIMALS.parse().unwrap();
    Fixed(BigInt::from(3) * scale() + digits)
}

/// cos(num * pi / den), computed by Taylor series after range reduction.
pub fn cos_pi_frac(num: i64, den: i64) -> Fixed {
    assert!(den > 0);
    // Reduce num/den into [0, 2) so the series argument stays below 2*pi.
    let two_den = 2 * den;
    let r = num.rem_euclid(two_den);
    let x = Fixed(pi().0 * BigInt::from(r) / BigInt::from(den));
    cos_taylor(&x)
}

/// sin(num * pi / den).
pub fn sin_pi_frac(num: i64, den: i64) -> Fixed {
    // sin(t) = cos(t - pi/2) = cos((2*num - den) * pi / (2*den)).
    cos_pi_frac(2 * num - den, 2 * den)
}

fn cos_taylor(x: &Fixed) -> Fixed {
    let sc = scale();
    let x2 = &x.0 * &x.0 / &sc;
    let mut term = sc.clone();
    let mut acc = term.clone();
    let mut m: i64 = 1;
    loop {
        term = &term * &x2 / &sc / BigInt::from((2 * m - 1) * (2 * m));
        if term == BigInt::from(0) {
            break;
        }
        if m % 2 == 1 {
            acc -= &term;
        } else {
            acc += &term;
        }
        m += 1;
    }
    Fixed(acc)
}

/// Solid kind, mirroring the kernel's shapes without depending on it.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum OracleKind {
    Prism,
    Antiprism,
}

impl OracleKind {
    fn offset(self) -> i64 {
        match self {
            OracleKind::Prism => 0,
            OracleKind::Antiprism => 1,
        }
    }
}

/// Coordinates of a solid vertex: top layer at z = 1, bottom at z = 0,
/// unit circumradius, bottom rotated by pi/n for the antiprism.
pub fn vertex_coords(kind: OracleKind, n: u32, top: bool, index: u32) -> [Fixed; 3] {
    assert!(index < n);
    let n = n as i64;
    let u = if top {
        2 * index as i64
    } else {
        2 * index as i64 + kind.offset()
    };
    let x = cos_pi_frac(u, n);
    let y = sin_pi_frac(u, n);
    let z = if top { Fixed::one() } else { Fixed::zero() };
    [x, y, z]
}

/// Sign of the orientation determinant det[q - p, r - p, s - p].
///
/// Returns 0 only when the four points are affinely dependent: the margin of
/// 50 digits is far below every nonzero determinant of this configuration
/// family and far above the accumulated series error.
pub fn det4_sign(p: &[Fixed; 3], q: &[Fixed; 3], r: &[Fixed; 3], s: &[Fixed; 3]) -> i8 {
    let row = |a: &[Fixed; 3]| {
        [
            a[0].sub(&p[0]),
            a[1].sub(&p[1]),
            a[2].sub(&p[2]),
        ]
    };
    let a = row(q);
    let b = row(r);
    let c = row(s);
    let minor = |i: usize, j: usize| b[i].mul(&c[j]).sub(&b[j].mul(&c[i]));
    let det = a[0]
        .mul(&minor(1, 2))
        .sub(&a[1].mul(&minor(0, 2)))
        .add(&a[2].mul(&minor(0, 1)));
    det.sign_with_margin(50)
}

/// Value of the linear functional attached to a chord of one polygon layer,
/// evaluated at a vertex of the opposite layer.
///
/// The chord runs between indices `a` and `b` of the `chord_top` layer; the
/// returned value is zero on the chord's supporting line and positive on the
/// side containing the short-arc midpoint direction of the chord. Callers
/// flip the sign for the other side convention.
pub fn chord_functional(
    kind: OracleKind,
    n: u32,
    chord_top: bool,
    a: u32,
    b: u32,
    opposite_index: u32,
) -> Fixed {
    assert!(a < n && b < n && a != b && opposite_index < n);
    let ni = n as i64;
    let layer_off = |top: bool| if top { 0 } else { kind.offset() };
    let p = 2 * a as i64 + layer_off(chord_top);
    let q = 2 * b as i64 + layer_off(chord_top);
    let w = 2 * opposite_index as i64 + layer_off(!chord_top);
    // f(theta) = cos(theta - mid) - cos(half), with mid and half in units of
    // pi/(2n) to stay integral.
    let mid2 = p + q; // 2 * mid in pi/n units
    let half2 = q - p; // 2 * half
    let c1 = cos_pi_frac(2 * w - mid2, 2 * ni);
    let c2 = cos_pi_frac(half2, 2 * ni);
    c1.sub(&c2)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64) {
        assert!((a - b).abs() < 1e-12, "{a} vs {b}");
    }

    #[test]
    fn trig_matches_f64() {
        for den in [3i64, 5, 7, 12, 16] {
            for num in 0..2 * den {
                let c = cos_pi_frac(num, den).to_f64();
                let s = sin_pi_frac(num, den).to_f64();
                let x = num as f64 * std::f64::consts::PI / den as f64;
                close(c, x.cos());
                close(s, x.sin());
            }
        }
    }

    #[test]
    fn unit_circle_identity() {
        for num in 0..14 {
            let c = cos_pi_frac(num, 7);
            let s = sin_pi_frac(num, 7);
            let one = c.mul(&c).add(&s.mul(&s));
            assert_eq!(one.sub(&Fixed::one()).sign_with_margin(50), 0);
        }
    }

    #[test]
    fn det_of_flat_quad_is_zero() {
        // Four vertices of the top square are coplanar.
        let pts: Vec<[Fixed; 3]> = (0..4)
            .map(|i| vertex_coords(OracleKind::Prism, 4, true, i))
            .collect();
        assert_eq!(det4_sign(&pts[0], &pts[1], &pts[2], &pts[3]), 0);
    }

    #[test]
    fn det_of_proper_tet_is_nonzero() {
        let t0 = vertex_coords(OracleKind::Prism, 4, true, 0);
        let t1 = vertex_coords(OracleKind::Prism, 4, true, 1);
        let t2 = vertex_coords(OracleKind::Prism, 4, true, 2);
        let b0 = vertex_coords(OracleKind::Prism, 4, false, 0);
        assert_eq!(det4_sign(&t0, &t1, &t2, &b0), -1);
    }
}
