//! Symmetric private polynomial computation over Lagrange-encoded MDS storage.
//!
//! A client holds an index `theta` into a public list of candidate multivariate
//! polynomials and wants the candidate evaluated on every row of a set of files
//! that are striped across `N` servers with `X`-secure Lagrange encoding. The
//! exchange keeps `theta` hidden from any `T` colluding servers, keeps the file
//! contents hidden from any `X` colluding servers, reveals nothing about the
//! files beyond the desired evaluations to the client, and still decodes when
//! up to `B` servers answer incorrectly and up to `U` stay silent.
//!
//! Modules are layered bottom-up: [`field`] and [`mvpoly`] provide the algebra,
//! [`points`] fixes the public evaluation points, [`storage`] encodes files,
//! [`rscode`] recovers answer polynomials from faulty responses, [`protocol`]
//! runs the query/answer/decode rounds, [`audit`] checks the three secrecy
//! guarantees by exhaustive enumeration, and [`sim`] drives whole-system runs
//! and metrics for the CLI.

pub mod audit;
pub mod field;
pub mod mvpoly;
pub mod points;
pub mod protocol;
pub mod rscode;
pub mod sim;
pub mod storage;
