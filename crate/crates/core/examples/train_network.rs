//! Trains the word-shared MLP on one sampled task and reports its accuracy
//! on unfamiliar test sentences, plus nearest-neighbour accuracy on the
//! learned features.
//!
//! Usage: `train_network [max_epochs] [seed]`.

use std::time::Instant;

use longtail_lab::datamodel::{
    sample_task, sample_test_set, sample_training_set, stream_rng, ModelParams,
};
use longtail_lab::evaluator::nn_success_on_features;
use longtail_lab::neuralnet::{
    concept_separation, continue_training, evaluate_accuracy, Network, NetworkConfig,
};

fn main() -> longtail_lab::Result<()> {
    let mut args = std::env::args().skip(1);
    let max_epochs: usize = args.next().map_or(2000, |a| a.parse().expect("max_epochs"));
    let seed: u64 = args.next().map_or(0, |a| a.parse().expect("seed"));

    let params = ModelParams::headline();
    let mut rng = stream_rng(seed, 0);
    let task = sample_task(&params, &mut rng);
    let train = sample_training_set(&task, &params, &mut rng);
    let tests = sample_test_set(&task, 1, &mut rng);
    let cfg = NetworkConfig::for_params(&params);
    let mut net: Network<f32> = Network::new(&cfg, &mut rng)?;
    println!("{} parameters, {} training rows", net.n_parameters(), train.len());

    let start = Instant::now();
    let mut epochs = 0;
    while epochs < max_epochs {
        let chunk = 25.min(max_epochs - epochs);
        let (next, log) = continue_training(net, &train, chunk, &mut rng)?;
        net = next;
        epochs += log.epochs;
        println!(
            "epoch {epochs:5}  loss {:.3e}  test acc {:.3}  {:.1?}",
            log.final_loss(),
            evaluate_accuracy(&net, &tests),
            start.elapsed()
        );
        if log.converged {
            break;
        }
    }
    let nn = nn_success_on_features(&net, &train, &tests);
    let (same, diff) = concept_separation(&net, task.phi.assignment());
    println!("NN on learned features: {nn:.3}");
    println!("embedding distance within concepts {same:.3}, across {diff:.3}");
    Ok(())
}
