use std::fmt::Debug;

use num_traits::{FromPrimitive, Num, Signed, ToPrimitive};

/// Numeric type usable for balancing coordinates: floats or exact rationals.
pub trait Scalar:
    Num + Signed + FromPrimitive + ToPrimitive + PartialOrd + Copy + Debug + Send + Sync + 'static
{
    /// `num / den` in this scalar type.
    fn ratio(num: usize, den: usize) -> Self {
        Self::from_usize(num).expect("representable numerator")
            / Self::from_usize(den).expect("representable denominator")
    }

    fn of(value: usize) -> Self {
        Self::from_usize(value).expect("representable integer")
    }

    fn approx(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    fn max_of(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }
}

impl<T> Scalar for T where
    T: Num
        + Signed
        + FromPrimitive
        + ToPrimitive
        + PartialOrd
        + Copy
        + Debug
        + Send
        + Sync
        + 'static
{
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::Ratio;

    #[test]
    fn exact_and_float_ratios_agree() {
        let exact: Ratio<i64> = Scalar::ratio(3, 12);
        assert_eq!(exact, Ratio::new(1, 4));
        assert_eq!(exact.approx(), 0.25);
        let float: f64 = Scalar::ratio(3, 12);
        assert_eq!(float, 0.25);
        assert_eq!(<f64 as Scalar>::of(7).max_of(3.0), 7.0);
    }
}
