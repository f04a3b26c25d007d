//! Brute-force checks on the smallest interesting universe: every kernel
//! value, the averaged moment against Monte Carlo, and the structure counts.

use longtail_lab::oracle::{
    exact_avg_moment, verify_beautiful, verify_kernel_marginal, verify_structure_counts, MonteCarloKernel,
    TinyUniverse,
};

fn main() -> longtail_lab::Result<()> {
    let u = TinyUniverse::new(2, 4, 2)?;
    println!(
        "{} sentences, {} equipartitions",
        u.sentences().len(),
        u.equipartitions().len()
    );
    for t in [1, 3, 7] {
        let avg = exact_avg_moment(&u, t)?;
        println!("t = {t}: average moment {} = {:.6}", avg.exact, avg.value);
        for kernel in [MonteCarloKernel::PerturbedOptimal, MonteCarloKernel::RandomSymmetric] {
            let r = verify_beautiful(&u, t, 100_000, 1, kernel)?;
            println!("    {kernel:?}: {:.5} (z = {:+.2}) {}", r.estimate, r.z, if r.passed { "ok" } else { "FAILED" });
        }
    }
    let m = verify_kernel_marginal(&u, 200_000, 2)?;
    println!("pair marginal: max |z| = {:.2} over {} cells", m.max_abs_z, m.cells);
    let s = verify_structure_counts(&TinyUniverse::new(3, 6, 2)?)?;
    println!(
        "structure counts (L = 3, n_w = 6): {} graphs, {} signatures, {} mismatches",
        s.graphs_checked,
        s.signatures_checked,
        s.mismatches.len()
    );
    Ok(())
}
