use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Sum over perfect matchings of `∏ m[i][j]`, by exact enumeration.
///
/// The lowest remaining index is always paired first, so each of the
/// `(n−1)!!` matchings is visited exactly once.
pub fn hafnian(m: &DMatrix<Complex64>) -> Result<Complex64> {
    if !m.is_square() {
        return Err(Error::Contract("hafnian of a non-square matrix".into()));
    }
    let n = m.nrows();
    if n % 2 == 1 {
        return Err(Error::Contract(format!("hafnian of odd dimension {n}")));
    }
    if n > 32 {
        return Err(Error::Contract(format!("hafnian dimension {n} exceeds 32")));
    }
    let all = if n == 32 { u32::MAX } else { (1u32 << n) - 1 };
    Ok(pair_lowest(m, all))
}

fn pair_lowest(m: &DMatrix<Complex64>, remaining: u32) -> Complex64 {
    if remaining == 0 {
        return Complex64::new(1.0, 0.0);
    }
    let first = remaining.trailing_zeros() as usize;
    let rest = remaining & (remaining - 1);
    let mut total = Complex64::new(0.0, 0.0);
    let mut partners = rest;
    while partners != 0 {
        let partner = partners.trailing_zeros() as usize;
        partners &= partners - 1;
        let weight = m[(first, partner)];
        if weight.re == 0.0 && weight.im == 0.0 {
            continue;
        }
        total += weight * pair_lowest(m, rest & !(1u32 << partner));
    }
    total
}
