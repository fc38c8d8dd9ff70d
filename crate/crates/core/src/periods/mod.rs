//! Complex-analytic data at t = 0 on the spheres of the noded surface, and
//! the period functionals built from it.

pub mod chart;
pub mod laurent;
pub mod quadrature;
pub mod rational;
pub mod zeros;

pub use chart::{
    a_period_lower, a_period_upper, horizontal_limit, horizontal_solution, limit_balance, omega0, ChartSet,
    LimitBalanceReport, SphereChart,
};
pub use laurent::{
    laurent, neck_integrals, select_constants, vertical_period, LaurentBlock, NeckConstants, NeckIntegrals,
    VerticalPeriod,
};
pub use quadrature::{contour_integral, Circle, Contour, QuadOptions, QuadResult};
pub use rational::{residue_of_product, residue_of_square, RationalForm};
pub use zeros::{zero_alignment, ZeroReport};
