//! Observed convergence orders from residuals on a sequence of grids.

use serde::Serialize;

/// Smallest accepted observed order for second-order stencils.
pub const MIN_ORDER: f64 = 1.9;

/// Residuals at or below `ROUNDOFF_FLOOR × scale` on the finest grid are
/// treated as exact: their ratios measure rounding noise, not truncation.
pub const ROUNDOFF_FLOOR: f64 = 1e-11;

/// `log(r_coarse / r_fine) / log(h_coarse / h_fine)`.
pub fn observed_order(r_coarse: f64, r_fine: f64, h_coarse: f64, h_fine: f64) -> f64 {
    (r_coarse / r_fine).ln() / (h_coarse / h_fine).ln()
}

/// Residuals of one check on successively finer grids.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrderStudy {
    pub hs: Vec<f64>,
    pub residuals: Vec<f64>,
    /// Order between each consecutive pair of grids.
    pub orders: Vec<f64>,
    /// Finest residual sits at the rounding floor.
    pub exact: bool,
}

impl OrderStudy {
    /// `hs` must be decreasing and match `residuals` in length.
    pub fn new(hs: Vec<f64>, residuals: Vec<f64>, scale: f64) -> Self {
        assert_eq!(hs.len(), residuals.len(), "one residual per grid");
        assert!(!hs.is_empty(), "at least one grid");
        let orders = hs
            .windows(2)
            .zip(residuals.windows(2))
            .map(|(h, r)| observed_order(r[0], r[1], h[0], h[1]))
            .collect();
        let finest = *residuals.last().unwrap();
        Self {
            exact: finest.abs() <= ROUNDOFF_FLOOR * scale.max(1.0),
            hs,
            residuals,
            orders,
        }
    }

    pub fn finest_residual(&self) -> f64 {
        *self.residuals.last().unwrap()
    }

    pub fn finest_h(&self) -> f64 {
        *self.hs.last().unwrap()
    }

    /// Order on the two finest grids; `None` for a single grid or an exact
    /// residual.
    pub fn finest_order(&self) -> Option<f64> {
        if self.exact {
            None
        } else {
            self.orders.last().copied()
        }
    }

    /// True when the residual is exact or the finest order reaches `min_order`.
    /// A single grid carries no order information and passes.
    pub fn order_ok(&self, min_order: f64) -> bool {
        match self.finest_order() {
            None => true,
            Some(p) => p >= min_order,
        }
    }
}
