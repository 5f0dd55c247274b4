//! Node identifiers of the full network.

pub const M: &str = "M";
pub const M_R: &str = "M_r";
pub const V: &str = "V";
pub const V_R: &str = "V_r";
pub const E: &str = "E";
pub const L_D: &str = "L_D";
pub const L_D_R: &str = "L_D_r";
pub const F_H: &str = "F_H";
pub const D_T: &str = "D_t";
pub const IHB: &str = "IHB";
pub const D_V: &str = "D_v";
pub const Y_D: &str = "Y_D";
pub const WI: &str = "WI";
pub const OS: &str = "OS";
pub const LC: &str = "LC";
pub const Q: &str = "Q";
pub const Q_M: &str = "Q_m";
pub const Q_EPS: &str = "Q_eps";
pub const M_DAMAGED: &str = "M_prime";
pub const R: &str = "R";
pub const R_C: &str = "R_c";
pub const HEEL: &str = "phi";
pub const T_P: &str = "T_p";
pub const T_P_M: &str = "T_p_m";
pub const T_S: &str = "T_s";
pub const T_S_M: &str = "T_s_m";
pub const T_D: &str = "T_D";
pub const H: &str = "H";
pub const H_R: &str = "H_r";
pub const Z_T: &str = "Z_t";
pub const Z_V: &str = "Z_v";
pub const Z_Y: &str = "Z_y";
pub const VIS: &str = "Vis";

/// Nodes that accept evidence.
pub const OBSERVABLES: [&str; 16] = [
    M_R, V_R, L_D_R, R_C, H_R, T_P_M, T_S_M, Q_M, WI, OS, LC, Q_EPS, VIS, Z_T, Z_V, Z_Y,
];

/// The damage descriptors reported after every update.
pub const DAMAGE: [&str; 3] = [D_T, D_V, Y_D];

pub fn is_observable(id: &str) -> bool {
    OBSERVABLES.contains(&id)
}

/// The physical variable a node measures; a latent node and its reported
/// counterpart share one variable.
pub fn variable_of(id: &str) -> &str {
    match id {
        M_R => M,
        V_R => V,
        L_D_R => L_D,
        R_C => R,
        H_R => H,
        T_P_M => T_P,
        T_S_M => T_S,
        Q_M => Q,
        other => other,
    }
}
