//! Error lower bounds for the headline model, for every signature family.

use std::time::Instant;

use longtail_lab::bounds::{to_decimal, BoundTable};
use longtail_lab::datamodel::ModelParams;

fn main() -> longtail_lab::Result<()> {
    let params = ModelParams::headline();
    let start = Instant::now();
    let table = BoundTable::new(&params)?;
    println!("table built in {:.2?}", start.elapsed());
    for ell in 0..=params.length() {
        match table.error_lower_bound(ell, 1) {
            Ok(r) => println!(
                "ell = {ell:2}  |S| = {:3}  error >= {}",
                r.signature_count,
                to_decimal(&r.error_lower, 8)
            ),
            Err(e) => println!("ell = {ell:2}  {e}"),
        }
    }
    let best = table.best_ell(1)?;
    println!("best ell = {}, success <= {}", best.ell, to_decimal(&best.success_upper, 8));
    Ok(())
}
