//! The optimal kernel on a few sentence pairs of the headline model, and the
//! number of distinct values it can take.

use longtail_lab::bounds::to_decimal;
use longtail_lab::datamodel::{ModelParams, Sentence};
use longtail_lab::graphkernel::{component_signature, kstar, zeta, KernelLevels};

fn main() -> longtail_lab::Result<()> {
    let params = ModelParams::headline();
    let x = Sentence(vec![1, 2, 3, 4, 5, 6, 7, 8, 9]);
    let pairs = [
        ("identical", x.clone()),
        ("one swap", Sentence(vec![10, 2, 3, 4, 5, 6, 7, 8, 9])),
        ("two edges, one tree", Sentence(vec![10, 1, 3, 4, 5, 6, 7, 8, 9])),
        ("two disjoint edges", Sentence(vec![10, 11, 3, 4, 5, 6, 7, 8, 9])),
        ("nothing shared", Sentence(vec![11, 12, 13, 14, 15, 16, 17, 18, 19])),
    ];
    let levels = KernelLevels::new(&params)?;
    println!("{} attainable kernel levels", levels.n_levels());
    for (name, y) in &pairs {
        let k = kstar(&x, y, &params)?;
        let sig = component_signature(&zeta(&x, y)?, params.n_words(), params.length());
        println!(
            "{name:22} signature {:?}  level {:3}  K* = {}",
            sig.tail(),
            levels.level(x.words(), y.words()),
            to_decimal(&k, 6)
        );
    }
    Ok(())
}
