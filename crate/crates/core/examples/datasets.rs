//! Generates a seeded synthetic dataset, carves a selective forget set and a
//! label-confusion forget set out of it, and round-trips the splits through a
//! CSV archive.

use scrub::data::{write_archive, BlobsConfig, ForgetSpec};
use scrub::{
    build_matched_validation, inject_confusion, load_dataset, split_retain_forget, ConfusionSpec,
    DatasetSource,
};

fn main() -> scrub::Result<()> {
    let source = DatasetSource::Blobs(BlobsConfig::desk_five_class());
    let splits = load_dataset(&source, 0)?;
    println!(
        "train {} / validation {} / test {} examples, {} classes, {} features",
        splits.train.len(),
        splits.validation.len(),
        splits.test.len(),
        splits.train.num_classes(),
        splits.train.feature_dim()
    );
    println!("train class counts: {:?}", splits.train.class_counts());

    let spec = ForgetSpec::Selective {
        target_class: 0,
        count: 25,
    };
    let (retain, forget) = split_retain_forget(&splits.train, &spec, 0)?;
    let matched = build_matched_validation(&splits.validation, &forget, &retain)?;
    println!(
        "selective: retain {}, forget {} (classes {:?}), matched validation {}",
        retain.len(),
        forget.len(),
        forget.label_set(),
        matched.dataset().len()
    );

    let confusion = ConfusionSpec {
        class_a: 0,
        class_b: 1,
        count_per_class: 20,
    };
    let c = inject_confusion(&splits.train, &confusion, 0)?;
    let swapped = c.forget.iter().filter(|e| e.label != e.clean_label).count();
    println!(
        "confusion: {} mislabeled examples ({swapped} swapped), retain {}",
        c.forget.len(),
        c.retain.len()
    );

    let dir = std::env::temp_dir().join("scrub-datasets-example");
    write_archive(&splits, &dir)?;
    let reloaded = load_dataset(&DatasetSource::Archive { path: dir.clone() }, 0)?;
    println!(
        "archive at {}: train round trip {}",
        dir.display(),
        if reloaded.train.labels() == splits.train.labels() {
            "ok"
        } else {
            "MISMATCH"
        }
    );
    Ok(())
}
