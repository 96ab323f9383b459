use nalgebra::Matrix2;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::Side;

pub type Unitary2 = Matrix2<Complex64>;

const UNITARY_TOL: f64 = 1e-12;

/// The edge coin `W` and the per-side gauge unitaries `U_1, U_2, U_3`
/// relating the stored field `ψ̃ = U_k ψ` to the physical one.
#[derive(Clone, Debug, PartialEq)]
pub struct CoinSet {
    w: Unitary2,
    gauge: [Unitary2; 3],
    gauge_identity: bool,
}

impl Default for CoinSet {
    /// Hadamard coin, identity gauge.
    fn default() -> Self {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let w = Matrix2::new(c(h), c(h), c(h), c(-h));
        CoinSet::new(w, [Matrix2::identity(); 3]).expect("Hadamard is unitary")
    }
}

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

impl CoinSet {
    pub fn new(w: Unitary2, gauge: [Unitary2; 3]) -> Result<CoinSet> {
        check_unitary("W", &w)?;
        for (name, u) in ["U1", "U2", "U3"].into_iter().zip(&gauge) {
            check_unitary(name, u)?;
        }
        let gauge_identity = gauge.iter().all(|u| *u == Matrix2::identity());
        Ok(CoinSet { w, gauge, gauge_identity })
    }

    /// Builds the set from row-major `(re, im)` entries, 8 reals per matrix.
    pub fn from_reals(w: [f64; 8], gauge: [[f64; 8]; 3]) -> Result<CoinSet> {
        CoinSet::new(matrix_from_reals(w), gauge.map(matrix_from_reals))
    }

    pub fn identity() -> CoinSet {
        CoinSet::new(Matrix2::identity(), [Matrix2::identity(); 3]).expect("identity is unitary")
    }

    pub fn w(&self) -> &Unitary2 {
        &self.w
    }

    pub fn gauge(&self, side: Side) -> &Unitary2 {
        &self.gauge[side.idx()]
    }

    pub fn gauge_is_identity(&self) -> bool {
        self.gauge_identity
    }

    pub fn with_w(mut self, w: Unitary2) -> Result<CoinSet> {
        check_unitary("W", &w)?;
        self.w = w;
        Ok(self)
    }
}

pub fn matrix_from_reals(r: [f64; 8]) -> Unitary2 {
    Matrix2::new(
        Complex64::new(r[0], r[1]),
        Complex64::new(r[2], r[3]),
        Complex64::new(r[4], r[5]),
        Complex64::new(r[6], r[7]),
    )
}

/// Frobenius norm of `M†M − I`.
pub fn unitarity_defect(m: &Unitary2) -> f64 {
    (m.adjoint() * m - Matrix2::identity()).norm()
}

fn check_unitary(name: &'static str, m: &Unitary2) -> Result<()> {
    let defect = unitarity_defect(m);
    if defect.is_finite() && defect <= UNITARY_TOL {
        Ok(())
    } else {
        Err(Error::NotUnitary(name, defect))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_unitary() {
        let bad = [1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0, 0.0];
        let id = [1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0];
        assert!(matches!(CoinSet::from_reals(bad, [id; 3]), Err(Error::NotUnitary("W", _))));
        assert!(matches!(CoinSet::from_reals(id, [id, bad, id]), Err(Error::NotUnitary("U2", _))));
        assert!(CoinSet::from_reals(id, [id; 3]).unwrap().gauge_is_identity());
    }

    #[test]
    fn default_is_hadamard() {
        let c = CoinSet::default();
        assert!(unitarity_defect(c.w()) < 1e-15);
        assert!((c.w()[(1, 1)].re + std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-16);
    }
}
