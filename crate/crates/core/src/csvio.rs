//! Plot-ready CSV exports. Floats are written with Rust's shortest
//! round-trip formatting so re-parsing reproduces them bit-exactly.

use crate::energy::EnergyProfile;
use crate::hopf_lax::HopfLaxResult;

/// (vertex, scale, ks_density, e2_extrapolated, fit_residual)
pub fn energy_profile_csv(profile: &EnergyProfile) -> String {
    let mut out = String::from("vertex,scale,ks_density,e2_extrapolated,fit_residual\n");
    for (si, &scale) in profile.scales.iter().enumerate() {
        for x in 0..profile.e2.len() {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                x, scale, profile.per_scale[si][x], profile.e2[x], profile.fit_residual[x]
            ));
        }
    }
    out
}

/// (t, vertex, f_t, Dminus, Dplus, argmin_count) rows for a time sweep.
pub fn time_sweep_csv(results: &[HopfLaxResult]) -> String {
    let mut out = String::from("t,vertex,f_t,Dminus,Dplus,argmin_count\n");
    for r in results {
        for x in 0..r.f_t.len() {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                r.t,
                x,
                r.f_t[x],
                r.d_minus[x],
                r.d_plus[x],
                r.argmins[x].len()
            ));
        }
    }
    out
}

/// One row per report: name,pass,max_violation,tolerance,witness_count,notes
pub fn reports_csv(reports: &[crate::report::CheckReport]) -> String {
    let mut out = String::from("name,pass,max_violation,tolerance,witness_count,notes\n");
    for r in reports {
        out.push_str(&format!(
            "{},{},{},{},{},\"{}\"\n",
            r.name,
            r.pass,
            r.max_violation,
            r.tolerance,
            r.witnesses.len(),
            r.notes.replace('"', "'")
        ));
    }
    out
}
