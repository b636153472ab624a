//! Higher finesse rephases better but absorbs less; the closed form has an
//! optimum for every depth.

use afc_memory::propagation::{analytic_efficiency, optimal_finesse};

fn main() -> afc_memory::Result<()> {
    println!("{:>6} {:>10} {:>10}", "alphaL", "F_opt", "eta_max");
    for alpha_l in [2.0, 4.0, 6.0, 10.0, 20.0, 40.0] {
        let opt = optimal_finesse(alpha_l)?;
        println!(
            "{alpha_l:>6} {:>10.4} {:>10.4}",
            opt.finesse, opt.efficiency
        );
    }
    println!();
    println!("alphaL = 6");
    for f in [2.0, 3.0, 4.0, 5.0, 6.0, 8.0] {
        println!("  F {f:>3}  eta {:.4}", analytic_efficiency(6.0, f)?);
    }
    Ok(())
}
