//! Paschke dilations: module axioms, self-duality, the module RN derivative
//! and criterion (4).

use ucp_ergodic::cpmap::UcpMap;
use ucp_ergodic::fixtures::{e3_map, e5};
use ucp_ergodic::paschke::{criterion4, module_rn, paschke_dilation, verify_self_dual, PaschkeDilation};

fn main() -> ucp_ergodic::Result<()> {
    let id = paschke_dilation(&UcpMap::identity(2))?;
    println!("id on M_2: carrier dim {}, valid {}", id.carrier_dim(), id.validate(1e-9).valid);

    let e3 = paschke_dilation(&e3_map())?;
    let dual = verify_self_dual(&e3.module, 1e-9)?;
    println!("E3: axioms residual {:.2e}, {} module maps represented (max residual {:.2e})", e3.module.axioms_residual(8, 0), dual.maps_checked, dual.max_residual);
    let rn = module_rn(&e3, &ucp_ergodic::fixtures::e3_component(1).scale(0.5), false, 1e-9)?;
    println!("E3: module RN of ½ b has residual {:.2e}", rn.residual);
    println!("E3: criterion (4) holds = {}", criterion4(&e3, 1e-9)?.holds);

    let (phi, act) = e5();
    let cov = PaschkeDilation::covariant(&phi, &act, 1e-9)?;
    println!("E5 with Z2: criterion (4) holds = {}", criterion4(&cov, 1e-9)?.holds);
    Ok(())
}
