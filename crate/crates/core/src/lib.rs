//! Exact computation of Witt-group data, sign sections on real spectra, and
//! twisted cohomology for real curves and cellular models.
//!
//! The library is organized bottom-up:
//!
//! * [`exactnum`]: rational arithmetic, univariate polynomials, Sturm-based
//!   root isolation, real algebraic numbers, factorization over Q.
//! * [`quadform`]: diagonal quadratic forms over R, C and R(t); second
//!   residues, transfers, Witt equivalence, fundamental-ideal certificates.
//! * [`realspec`]: sign sections on the real spectrum of R(t), the twisted
//!   residue `beta`, transfers of sections, and the differential `d_re`.
//! * [`gersten`]: length-two residue complexes on P1, A1 and punctured A1,
//!   coboundary decision with constructive preimages, point pushforwards,
//!   Euler classes of O(d), and the normalized cycle class map.
//! * [`cellular`]: integer cochain complexes with local coefficients, Smith
//!   normal form, Bockstein maps, and derived bigraded tables.
//! * [`parse`]: the text grammars (polynomials, forms, curves, sections) and
//!   the JSON cochain/CW schemas shared by tests and the CLI.
//! * [`cli`]: command implementations behind the `wittcycle` binary.
//!
//! All arithmetic is exact; there is no floating point anywhere.

pub mod cellular;
pub mod cli;
pub mod exactnum;
pub mod gersten;
pub mod parse;
pub mod quadform;
pub mod realspec;
