//! Approximate surfaces for small t: graph sheets over the plane joined by
//! catenoid-like necks, with mesh export and an embeddedness report.

pub mod embed;
pub mod mesh;
pub mod neck;
pub mod sheet;

pub use embed::{embeddedness_report, EmbeddednessReport};
pub use mesh::{build_mesh, export_mesh, SurfaceMesh, Tag, Topology};
pub use neck::{build_necks, neck_partner, NeckModel};
pub use sheet::{build_sheets, build_sheets_unchecked, gauss, OffsetMode, SheetModel, SheetOptions};
