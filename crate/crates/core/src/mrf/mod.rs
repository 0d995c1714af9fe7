//! Single binary lattice MRF layer with a normalized Potts smoothness prior,
//! optimized by iterated conditional modes.
//!
//! The energy of label `λ` at site `i` with observation `d` is
//!
//! ```text
//! ((λ - d) / 2)^2 + Σ_{i' in N_i} w(i, i') * ((λ - f_i') / 2)^2
//! w(i, i') = β / 2 * (1 / |N_i| + 1 / |N_i'|)
//! ```
//!
//! where `N_i` is the set of in-bounds, active 4-neighbors of `i`. Away from
//! borders and mask edges every site has four neighbors and the weight is
//! simply `β / |N|`. Averaging the two normalizations keeps pair weights
//! symmetric, so the site energy is the exact conditional of the total energy
//! and ICM sweeps never raise it.

mod brute;
mod energy;
mod field;
mod icm;

pub use brute::{brute_force_minimum, MAX_BRUTE_FORCE_SITES};
pub use energy::{site_energy, total_energy, MrfParams};
pub use field::{normalize_gray, DataField, Label, LabelField};
pub use icm::{icm, icm_sweep};

#[cfg(test)]
pub(crate) mod oracle;
