//! Closed-form initial profiles: sums of `a·x^k`, `a·cos(bπx)` and `a·sin(bπx)`.

use std::fmt;

use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ProfileTerm<T> {
    /// `coeff · x^power`; power 0 is a constant.
    Monomial { coeff: T, power: u32 },
    /// `coeff · cos(freq·π·x)`.
    Cos { coeff: T, freq: T },
    /// `coeff · sin(freq·π·x)`.
    Sin { coeff: T, freq: T },
}

impl<T: Scalar> ProfileTerm<T> {
    pub fn eval(&self, x: T) -> T {
        match *self {
            ProfileTerm::Monomial { coeff, power } => coeff * x.powi(power as i32),
            ProfileTerm::Cos { coeff, freq } => coeff * (freq * T::PI() * x).cos(),
            ProfileTerm::Sin { coeff, freq } => coeff * (freq * T::PI() * x).sin(),
        }
    }

    pub fn coeff(&self) -> T {
        match *self {
            ProfileTerm::Monomial { coeff, .. } | ProfileTerm::Cos { coeff, .. } | ProfileTerm::Sin { coeff, .. } => {
                coeff
            }
        }
    }

    pub fn is_finite(&self) -> bool {
        match *self {
            ProfileTerm::Monomial { coeff, .. } => coeff.is_finite(),
            ProfileTerm::Cos { coeff, freq } | ProfileTerm::Sin { coeff, freq } => {
                coeff.is_finite() && freq.is_finite()
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Profile<T> {
    pub terms: Vec<ProfileTerm<T>>,
}

impl<T: Scalar> Profile<T> {
    pub fn new(terms: Vec<ProfileTerm<T>>) -> Self {
        Self { terms }
    }

    pub fn zero() -> Self {
        Self { terms: Vec::new() }
    }

    /// `−amplitude·(cos(freq·πx) − 1)`.
    pub fn raised_cosine(amplitude: T, freq: T) -> Self {
        Self::new(vec![
            ProfileTerm::Cos { coeff: -amplitude, freq },
            ProfileTerm::Monomial { coeff: amplitude, power: 0 },
        ])
    }

    pub fn eval(&self, x: T) -> T {
        self.terms.iter().fold(T::zero(), |acc, t| acc + t.eval(x))
    }

    pub fn is_finite(&self) -> bool {
        self.terms.iter().all(ProfileTerm::is_finite)
    }
}

impl<T: Scalar> fmt::Display for ProfileTerm<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProfileTerm::Monomial { coeff, power: 0 } => write!(f, "{coeff}"),
            ProfileTerm::Monomial { coeff, power: 1 } => write!(f, "{coeff}*x"),
            ProfileTerm::Monomial { coeff, power } => write!(f, "{coeff}*x^{power}"),
            ProfileTerm::Cos { coeff, freq } => write!(f, "{coeff}*cos({freq}*pi*x)"),
            ProfileTerm::Sin { coeff, freq } => write!(f, "{coeff}*sin({freq}*pi*x)"),
        }
    }
}

impl<T: Scalar> fmt::Display for Profile<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, term) in self.terms.iter().enumerate() {
            if i > 0 {
                f.write_str(" + ")?;
            }
            write!(f, "{term}")?;
        }
        Ok(())
    }
}
