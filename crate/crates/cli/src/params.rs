//! Named access to plant parameters, for `--set` overrides and sweeps.

use iandi::plants::{gains_for_double_pole, PlantKind};

use crate::CliError;

/// Parameter names accepted by [`set_param`] for this plant, besides `pole`.
pub fn param_names(kind: &PlantKind) -> &'static [&'static str] {
    match kind {
        PlantKind::Lti(_) => &["p11", "p12", "p21", "p22", "r11", "r12", "r21", "r22"],
        PlantKind::Iwp(_) => &["m", "b", "k", "gamma1", "gamma2"],
        PlantKind::CartPendLinear(_) => &["a1", "a2", "k", "gamma1", "gamma2"],
        PlantKind::CartPendNonlinear(_) => &["a1", "a2", "a", "a0", "gamma1", "gamma2"],
        PlantKind::DcAc(_) => &["r", "c", "l", "e", "amplitude", "omega", "gamma"],
    }
}

/// Current value of a named parameter.
pub fn get_param(kind: &PlantKind, name: &str) -> Option<f64> {
    let v = match (kind, name) {
        (PlantKind::Lti(p), _) => {
            let (m, rest) = match name.split_at_checked(1)? {
                ("p", rest) => (&p.p, rest),
                ("r", rest) => (&p.r, rest),
                _ => return None,
            };
            let (i, j) = lti_index(rest)?;
            m[(i, j)]
        }
        (PlantKind::Iwp(p), "m") => p.m,
        (PlantKind::Iwp(p), "b") => p.b,
        (PlantKind::Iwp(p), "k") => p.k,
        (PlantKind::Iwp(p), "gamma1") => p.gamma1,
        (PlantKind::Iwp(p), "gamma2") => p.gamma2,
        (PlantKind::CartPendLinear(p), "a1") => p.a1,
        (PlantKind::CartPendLinear(p), "a2") => p.a2,
        (PlantKind::CartPendLinear(p), "k") => p.k,
        (PlantKind::CartPendLinear(p), "gamma1") => p.gamma1,
        (PlantKind::CartPendLinear(p), "gamma2") => p.gamma2,
        (PlantKind::CartPendNonlinear(p), "a1") => p.a1,
        (PlantKind::CartPendNonlinear(p), "a2") => p.a2,
        (PlantKind::CartPendNonlinear(p), "a") => p.a,
        (PlantKind::CartPendNonlinear(p), "a0") => p.a0,
        (PlantKind::CartPendNonlinear(p), "gamma1") => p.gamma1,
        (PlantKind::CartPendNonlinear(p), "gamma2") => p.gamma2,
        (PlantKind::DcAc(p), "r") => p.r,
        (PlantKind::DcAc(p), "c") => p.c,
        (PlantKind::DcAc(p), "l") => p.l,
        (PlantKind::DcAc(p), "e") => p.e,
        (PlantKind::DcAc(p), "amplitude") => p.amplitude,
        (PlantKind::DcAc(p), "omega") => p.omega,
        (PlantKind::DcAc(p), "gamma") => p.gamma,
        _ => return None,
    };
    Some(v)
}

fn lti_index(rest: &str) -> Option<(usize, usize)> {
    match rest {
        "11" => Some((0, 0)),
        "12" => Some((0, 1)),
        "21" => Some((1, 0)),
        "22" => Some((1, 1)),
        _ => None,
    }
}

/// Sets a named parameter. `pole` places both roots of the pendulum
/// `z`-dynamics at `−value` by setting `gamma1 = 2·value`, `gamma2 = value²`.
pub fn set_param(kind: &mut PlantKind, name: &str, value: f64) -> Result<(), CliError> {
    let unknown = CliError::Config(format!(
        "unknown parameter `{name}` for {} (known: {}{})",
        kind.label(),
        param_names(kind).join(", "),
        if has_pole(kind) { ", pole" } else { "" }
    ));
    if name == "pole" {
        if !has_pole(kind) {
            return Err(unknown);
        }
        let (g1, g2) = gains_for_double_pole(value);
        set_param(kind, "gamma1", g1)?;
        return set_param(kind, "gamma2", g2);
    }
    let slot: &mut f64 = match (&mut *kind, name) {
        (PlantKind::Lti(p), _) => {
            let Some((m, rest)) = (match name.split_at_checked(1) {
                Some(("p", rest)) => Some((&mut p.p, rest)),
                Some(("r", rest)) => Some((&mut p.r, rest)),
                _ => None,
            }) else {
                return Err(unknown);
            };
            match lti_index(rest) {
                Some(ij) => &mut m[ij],
                None => return Err(unknown),
            }
        }
        (PlantKind::Iwp(p), "m") => &mut p.m,
        (PlantKind::Iwp(p), "b") => &mut p.b,
        (PlantKind::Iwp(p), "k") => &mut p.k,
        (PlantKind::Iwp(p), "gamma1") => &mut p.gamma1,
        (PlantKind::Iwp(p), "gamma2") => &mut p.gamma2,
        (PlantKind::CartPendLinear(p), "a1") => &mut p.a1,
        (PlantKind::CartPendLinear(p), "a2") => &mut p.a2,
        (PlantKind::CartPendLinear(p), "k") => &mut p.k,
        (PlantKind::CartPendLinear(p), "gamma1") => &mut p.gamma1,
        (PlantKind::CartPendLinear(p), "gamma2") => &mut p.gamma2,
        (PlantKind::CartPendNonlinear(p), "a1") => &mut p.a1,
        (PlantKind::CartPendNonlinear(p), "a2") => &mut p.a2,
        (PlantKind::CartPendNonlinear(p), "a") => &mut p.a,
        (PlantKind::CartPendNonlinear(p), "a0") => &mut p.a0,
        (PlantKind::CartPendNonlinear(p), "gamma1") => &mut p.gamma1,
        (PlantKind::CartPendNonlinear(p), "gamma2") => &mut p.gamma2,
        (PlantKind::DcAc(p), "r") => &mut p.r,
        (PlantKind::DcAc(p), "c") => &mut p.c,
        (PlantKind::DcAc(p), "l") => &mut p.l,
        (PlantKind::DcAc(p), "e") => &mut p.e,
        (PlantKind::DcAc(p), "amplitude") => &mut p.amplitude,
        (PlantKind::DcAc(p), "omega") => &mut p.omega,
        (PlantKind::DcAc(p), "gamma") => &mut p.gamma,
        _ => return Err(unknown),
    };
    *slot = value;
    Ok(())
}

fn has_pole(kind: &PlantKind) -> bool {
    matches!(
        kind,
        PlantKind::Iwp(_) | PlantKind::CartPendLinear(_) | PlantKind::CartPendNonlinear(_)
    )
}
