//! IO companion to `dysmooth-core`: sample files, CSV/JSON/SVG report
//! emission, and the types behind the `dysmooth` command-line tool.

pub mod io;
pub mod report;
