//! Trains an MLP on the desk task, saves it as a checkpoint file and loads
//! it back.

use scrub::data::BlobsConfig;
use scrub::model::{load_model, save_model};
use scrub::{
    evaluate_error, init_model, load_dataset, train, Architecture, DatasetSource, TrainConfig,
};

fn main() -> scrub::Result<()> {
    let splits = load_dataset(&DatasetSource::Blobs(BlobsConfig::desk_five_class()), 0)?;
    let arch = Architecture::mlp(16, &[64, 32], 5)?;
    println!(
        "{} blocks, {} parameters",
        arch.num_blocks(),
        arch.param_count()
    );

    let init = init_model(arch, 0)?;
    println!(
        "untrained test error {:.3}",
        evaluate_error(&init, &splits.test)?
    );
    let config = TrainConfig {
        learning_rate: 0.05,
        batch_size: 32,
        ..TrainConfig::pretraining(30, 0)
    };
    let model = train(&init, &splits.train, &config)?;
    println!(
        "after {} epochs: train error {:.3}, test error {:.3}",
        config.epochs,
        evaluate_error(&model, &splits.train)?,
        evaluate_error(&model, &splits.test)?
    );

    let path = std::env::temp_dir().join("scrub-train-example.json");
    save_model(&model, 0, config.epochs, &path)?;
    let loaded = load_model(&path)?;
    println!(
        "checkpoint {}: weights {}",
        path.display(),
        if loaded.weight_hash() == model.weight_hash() {
            "identical"
        } else {
            "DIFFER"
        }
    );
    Ok(())
}
