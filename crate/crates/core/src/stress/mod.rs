//! The three stress objects, body forces, and every operator among them.

pub mod constitutive;
pub mod fields;
pub mod values;

pub use constitutive::{constitutive_nonholonomic, constitutive_variational};
pub use fields::{
    var_stress_from_force_system, BodyForceField, NonHolStressField, TractionField, VarStressField,
};
pub use values::{
    contraction_basis_on_frame, BodyForce, HyperTraction, NonHolStress, TractionStress,
    VariationalStress,
};
