//! Exact exterior algebra on coordinate patches.

pub mod form;
pub mod grid;
pub mod numeric;
pub mod poly;
pub mod space;
pub mod value;

pub use form::{CellForm, ExteriorForm, Wedge};
pub use grid::Grid;
pub use poly::{Monomial, Poly, Trig};
pub use space::{Coord, CoordKind, CoordinateSpace, Space};
pub use numeric::NumericForm;
pub use value::{FormValue, Residual};
