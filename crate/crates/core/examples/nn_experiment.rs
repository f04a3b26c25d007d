//! Nearest-neighbour success on unfamiliar sentences for the fixed feature
//! maps, next to the exact success ceiling, across the `n*` columns.
//!
//! Usage: `nn_experiment [trials] [tests_per_category]`.

use longtail_lab::bounds::BoundTable;
use longtail_lab::datamodel::ModelParams;
use longtail_lab::evaluator::{run_experiment, FeatureKind, SimilaritySpec};

fn main() -> longtail_lab::Result<()> {
    let mut args = std::env::args().skip(1);
    let trials: usize = args.next().map_or(4, |a| a.parse().expect("trials"));
    let tests: usize = args.next().map_or(200, |a| a.parse().expect("tests_per_category"));
    let base = ModelParams::headline();
    let table = BoundTable::new(&base)?;
    let kinds = [FeatureKind::OneHotPerturbed, FeatureKind::OptimalPerturbed, FeatureKind::Concept];
    println!("{:20} {:>8} {:>8} {:>8} {:>8} {:>8}", "", "n*=1", "n*=2", "n*=3", "n*=4", "n*=5");
    for kind in kinds {
        let mut line = format!("{:20}", kind.name());
        for n in 1..=5 {
            let params = base.with_n_star(n, 5 + n)?;
            let sim = SimilaritySpec::new(kind).with_seed(3);
            let r = run_experiment(&params, &sim, trials, tests, 3)?;
            line += &format!(" {:>7.2}%", 100.0 * r.success_rate);
        }
        println!("{line}");
    }
    let mut line = format!("{:20}", "ceiling");
    for n in 1..=5 {
        line += &format!(" {:>7.2}%", 100.0 * table.best_ell(n)?.success_upper_f64());
    }
    println!("{line}");
    Ok(())
}
