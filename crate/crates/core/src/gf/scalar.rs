//! Scalars of GF(3) and GF(9).
//!
//! GF(9) is realized as GF(3)[i] with i² = −1; the element `a + b·i` is
//! stored as the single byte `a + 3b`, so both fields serialize canonically.

use std::fmt;
use std::hash::Hash;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

use num_traits::{One, Zero};
use rand::Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// A finite field of characteristic 3 usable as the scalar type of every
/// matrix, Lie algebra and module in this crate.
pub trait FieldScalar:
    Copy
    + Eq
    + Ord
    + Hash
    + fmt::Debug
    + fmt::Display
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + AddAssign
    + SubAssign
    + MulAssign
    + Send
    + Sync
    + Serialize
    + for<'de> Deserialize<'de>
    + 'static
{
    /// Number of field elements.
    const ORDER: usize;
    /// Short name used in reports ("GF3", "GF9").
    const NAME: &'static str;

    /// All field elements, zero first.
    fn elements() -> &'static [Self];

    /// Multiplicative inverse; `None` for zero.
    fn inv(self) -> Option<Self>;

    /// Image of an integer under Z → GF(3) ⊆ Self.
    fn from_int(n: i64) -> Self;

    /// The Frobenius map x ↦ x³.
    fn frobenius(self) -> Self {
        self * self * self
    }

    /// A generator of the multiplicative group.
    fn primitive() -> Self;

    fn pow(self, mut e: u64) -> Self {
        let mut base = self;
        let mut acc = Self::one();
        while e > 0 {
            if e & 1 == 1 {
                acc *= base;
            }
            base *= base;
            e >>= 1;
        }
        acc
    }

    /// Uniformly random element.
    fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        Self::elements()[rng.gen_range(0..Self::ORDER)]
    }

    /// Uniformly random nonzero element.
    fn random_nonzero<R: Rng + ?Sized>(rng: &mut R) -> Self {
        Self::elements()[rng.gen_range(1..Self::ORDER)]
    }

    /// `dst += a * src`, elementwise. The hot loop of every kernel.
    fn axpy(dst: &mut [Self], a: Self, src: &[Self]) {
        debug_assert_eq!(dst.len(), src.len());
        if a.is_zero() {
            return;
        }
        for (d, &s) in dst.iter_mut().zip(src) {
            *d += a * s;
        }
    }

    /// `v *= a`, elementwise.
    fn scale(v: &mut [Self], a: Self) {
        for x in v.iter_mut() {
            *x *= a;
        }
    }
}

/// An element of the prime field GF(3), canonical in {0, 1, 2}.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
#[repr(transparent)]
pub struct Gf3(u8);

impl Gf3 {
    pub const ZERO: Gf3 = Gf3(0);
    pub const ONE: Gf3 = Gf3(1);
    pub const TWO: Gf3 = Gf3(2);

    pub const fn new(v: u8) -> Self {
        Gf3(v % 3)
    }

    pub const fn value(self) -> u8 {
        self.0
    }
}

impl fmt::Debug for Gf3 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for Gf3 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl Add for Gf3 {
    type Output = Gf3;
    #[inline]
    fn add(self, rhs: Gf3) -> Gf3 {
        let t = self.0 + rhs.0;
        Gf3(if t >= 3 { t - 3 } else { t })
    }
}

impl Sub for Gf3 {
    type Output = Gf3;
    #[inline]
    fn sub(self, rhs: Gf3) -> Gf3 {
        let t = self.0 + 3 - rhs.0;
        Gf3(if t >= 3 { t - 3 } else { t })
    }
}

impl Neg for Gf3 {
    type Output = Gf3;
    #[inline]
    fn neg(self) -> Gf3 {
        Gf3(if self.0 == 0 { 0 } else { 3 - self.0 })
    }
}

impl Mul for Gf3 {
    type Output = Gf3;
    #[inline]
    fn mul(self, rhs: Gf3) -> Gf3 {
        let t = self.0 * rhs.0;
        Gf3(if t >= 3 { t - 3 } else { t })
    }
}

impl Div for Gf3 {
    type Output = Gf3;
    fn div(self, rhs: Gf3) -> Gf3 {
        self * rhs.inv().expect("division by zero in GF(3)")
    }
}

impl AddAssign for Gf3 {
    fn add_assign(&mut self, rhs: Gf3) {
        *self = *self + rhs;
    }
}

impl SubAssign for Gf3 {
    fn sub_assign(&mut self, rhs: Gf3) {
        *self = *self - rhs;
    }
}

impl MulAssign for Gf3 {
    fn mul_assign(&mut self, rhs: Gf3) {
        *self = *self * rhs;
    }
}

impl Zero for Gf3 {
    fn zero() -> Self {
        Gf3(0)
    }
    fn is_zero(&self) -> bool {
        self.0 == 0
    }
}

impl One for Gf3 {
    fn one() -> Self {
        Gf3(1)
    }
}

static GF3_ELEMENTS: [Gf3; 3] = [Gf3(0), Gf3(1), Gf3(2)];

impl FieldScalar for Gf3 {
    const ORDER: usize = 3;
    const NAME: &'static str = "GF3";

    fn elements() -> &'static [Self] {
        &GF3_ELEMENTS
    }

    fn inv(self) -> Option<Self> {
        // 1·1 = 1, 2·2 = 4 = 1
        (self.0 != 0).then_some(self)
    }

    fn from_int(n: i64) -> Self {
        Gf3(n.rem_euclid(3) as u8)
    }

    fn frobenius(self) -> Self {
        self
    }

    fn primitive() -> Self {
        Gf3(2)
    }

    #[inline]
    fn axpy(dst: &mut [Self], a: Self, src: &[Self]) {
        debug_assert_eq!(dst.len(), src.len());
        match a.0 {
            0 => {}
            1 => {
                for (d, s) in dst.iter_mut().zip(src) {
                    let t = d.0 + s.0;
                    d.0 = if t >= 3 { t - 3 } else { t };
                }
            }
            _ => {
                for (d, s) in dst.iter_mut().zip(src) {
                    let t = d.0 + 3 - s.0;
                    d.0 = if t >= 3 { t - 3 } else { t };
                }
            }
        }
    }

    fn scale(v: &mut [Self], a: Self) {
        match a.0 {
            0 => v.iter_mut().for_each(|x| x.0 = 0),
            1 => {}
            _ => v.iter_mut().for_each(|x| *x = -*x),
        }
    }
}

impl Serialize for Gf3 {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_u8(self.0)
    }
}

impl<'de> Deserialize<'de> for Gf3 {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let v = u8::deserialize(d)?;
        if v > 2 {
            return Err(serde::de::Error::custom(format!("GF(3) entry out of range: {v}")));
        }
        Ok(Gf3(v))
    }
}

/// An element `a + b·i` of GF(9) = GF(3)[i], i² = −1.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
#[repr(transparent)]
pub struct Gf9(u8);

const fn gf9_add(x: u8, y: u8) -> u8 {
    let a = (x % 3 + y % 3) % 3;
    let b = (x / 3 + y / 3) % 3;
    a + 3 * b
}

const fn gf9_mul(x: u8, y: u8) -> u8 {
    let (a, b) = (x % 3, x / 3);
    let (c, d) = (y % 3, y / 3);
    // (a + bi)(c + di) = (ac − bd) + (ad + bc)i
    let re = (a * c + 2 * b * d) % 3;
    let im = (a * d + b * c) % 3;
    re + 3 * im
}

const fn build_table(mul: bool) -> [[u8; 9]; 9] {
    let mut t = [[0u8; 9]; 9];
    let mut x = 0;
    while x < 9 {
        let mut y = 0;
        while y < 9 {
            t[x][y] = if mul { gf9_mul(x as u8, y as u8) } else { gf9_add(x as u8, y as u8) };
            y += 1;
        }
        x += 1;
    }
    t
}

static GF9_ADD: [[u8; 9]; 9] = build_table(false);
static GF9_MUL: [[u8; 9]; 9] = build_table(true);

impl Gf9 {
    pub const ZERO: Gf9 = Gf9(0);
    pub const ONE: Gf9 = Gf9(1);
    /// The square root of −1.
    pub const I: Gf9 = Gf9(3);

    pub const fn new(re: u8, im: u8) -> Self {
        Gf9(re % 3 + 3 * (im % 3))
    }

    pub const fn re(self) -> u8 {
        self.0 % 3
    }

    pub const fn im(self) -> u8 {
        self.0 / 3
    }

    /// The element as a GF(3) scalar, if it lies in the prime field.
    pub fn to_gf3(self) -> Option<Gf3> {
        (self.im() == 0).then(|| Gf3::new(self.re()))
    }
}

impl From<Gf3> for Gf9 {
    fn from(x: Gf3) -> Self {
        Gf9(x.value())
    }
}

impl fmt::Debug for Gf9 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{},{}]", self.re(), self.im())
    }
}

impl fmt::Display for Gf9 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.re(), self.im()) {
            (a, 0) => write!(f, "{a}"),
            (0, 1) => write!(f, "i"),
            (0, b) => write!(f, "{b}i"),
            (a, 1) => write!(f, "{a}+i"),
            (a, b) => write!(f, "{a}+{b}i"),
        }
    }
}

impl Add for Gf9 {
    type Output = Gf9;
    #[inline]
    fn add(self, rhs: Gf9) -> Gf9 {
        Gf9(GF9_ADD[self.0 as usize][rhs.0 as usize])
    }
}

impl Neg for Gf9 {
    type Output = Gf9;
    #[inline]
    fn neg(self) -> Gf9 {
        Gf9::new(3 - self.re(), 3 - self.im())
    }
}

impl Sub for Gf9 {
    type Output = Gf9;
    #[inline]
    fn sub(self, rhs: Gf9) -> Gf9 {
        self + (-rhs)
    }
}

impl Mul for Gf9 {
    type Output = Gf9;
    #[inline]
    fn mul(self, rhs: Gf9) -> Gf9 {
        Gf9(GF9_MUL[self.0 as usize][rhs.0 as usize])
    }
}

impl Div for Gf9 {
    type Output = Gf9;
    fn div(self, rhs: Gf9) -> Gf9 {
        self * rhs.inv().expect("division by zero in GF(9)")
    }
}

impl AddAssign for Gf9 {
    fn add_assign(&mut self, rhs: Gf9) {
        *self = *self + rhs;
    }
}

impl SubAssign for Gf9 {
    fn sub_assign(&mut self, rhs: Gf9) {
        *self = *self - rhs;
    }
}

impl MulAssign for Gf9 {
    fn mul_assign(&mut self, rhs: Gf9) {
        *self = *self * rhs;
    }
}

impl Zero for Gf9 {
    fn zero() -> Self {
        Gf9(0)
    }
    fn is_zero(&self) -> bool {
        self.0 == 0
    }
}

impl One for Gf9 {
    fn one() -> Self {
        Gf9(1)
    }
}

static GF9_ELEMENTS: [Gf9; 9] = [
    Gf9(0),
    Gf9(1),
    Gf9(2),
    Gf9(3),
    Gf9(4),
    Gf9(5),
    Gf9(6),
    Gf9(7),
    Gf9(8),
];

impl FieldScalar for Gf9 {
    const ORDER: usize = 9;
    const NAME: &'static str = "GF9";

    fn elements() -> &'static [Self] {
        &GF9_ELEMENTS
    }

    fn inv(self) -> Option<Self> {
        if self.0 == 0 {
            return None;
        }
        // x⁸ = 1 for nonzero x
        Some(FieldScalar::pow(self, 7))
    }

    fn from_int(n: i64) -> Self {
        Gf9(n.rem_euclid(3) as u8)
    }

    fn primitive() -> Self {
        // 1 + i has order 8: (1+i)² = 2i, (2i)² = −4 = 2, 2² = 1.
        Gf9::new(1, 1)
    }

    #[inline]
    fn axpy(dst: &mut [Self], a: Self, src: &[Self]) {
        debug_assert_eq!(dst.len(), src.len());
        if a.0 == 0 {
            return;
        }
        let row = &GF9_MUL[a.0 as usize];
        for (d, s) in dst.iter_mut().zip(src) {
            d.0 = GF9_ADD[d.0 as usize][row[s.0 as usize] as usize];
        }
    }
}

impl Serialize for Gf9 {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        [self.re(), self.im()].serialize(s)
    }
}

impl<'de> Deserialize<'de> for Gf9 {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let [a, b] = <[u8; 2]>::deserialize(d)?;
        if a > 2 || b > 2 {
            return Err(serde::de::Error::custom(format!("GF(9) entry out of range: [{a},{b}]")));
        }
        Ok(Gf9::new(a, b))
    }
}
