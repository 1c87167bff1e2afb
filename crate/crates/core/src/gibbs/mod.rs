//! Birth-and-death graphical construction of the length-interacting
//! contour field and its modifications (forbidden region, cut-off, area
//! field).

mod birth;
mod field;
mod process;
mod spec;

pub use birth::{BirthDiagnostics, BirthSampler, SamplerOptions};
pub use field::{estimate_spontaneous_magnetisation, sample_field, FieldDiagnostics, FieldSample, Strategy};
pub use process::{
    accepted_at, ancestor_clan, clan_members, magnetisation_change, point_set_diameter, resolve_acceptance, run_free_process, Clan,
    FreeProcess, Resolution, Status, TimeSpaceInstance,
};
pub use spec::{AreaField, BirthFilter, Cutoff, FieldSpec};
