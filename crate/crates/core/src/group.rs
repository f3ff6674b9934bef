use std::fmt::Debug;

/// A group whose product is composition: `a.mul(b)` applies `b` first.
pub trait Group: Clone + PartialEq + Debug {
    fn identity() -> Self;

    fn mul(&self, rhs: &Self) -> Self;

    fn inv(&self) -> Self;

    fn is_identity(&self) -> bool {
        *self == Self::identity()
    }

    fn pow(&self, n: u32) -> Self {
        let mut acc = Self::identity();
        let mut base = self.clone();
        let mut n = n;
        while n > 0 {
            if n & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            n >>= 1;
        }
        acc
    }

    /// `by⁻¹ · self · by`.
    fn conj(&self, by: &Self) -> Self {
        by.inv().mul(self).mul(by)
    }
}
