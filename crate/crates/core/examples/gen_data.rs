//! Samples a small task and prints its training set in the text format read
//! by `read_dataset`, then parses it back.

use longtail_lab::datamodel::{read_dataset, write_dataset, ModelParams};
use longtail_lab::evaluator::sample_trial;

fn main() -> longtail_lab::Result<()> {
    let params = ModelParams::new(5, 12, 3, 4, 3, 1)?;
    let (task, train, tests) = sample_trial(&params, 2, 0, 0);
    println!("# concept of each word: {:?}", task.phi.assignment());
    let mut buf = Vec::new();
    write_dataset(&mut buf, &train).expect("write to memory");
    print!("{}", String::from_utf8_lossy(&buf));
    let back = read_dataset(buf.as_slice())?;
    assert_eq!(back, train);
    println!("# {} rows round-tripped, {} unfamiliar test sentences", back.len(), tests.len());
    Ok(())
}
