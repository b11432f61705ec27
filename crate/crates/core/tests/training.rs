use tweetpulse::sentiment::{train, DatasetId, LabeledExample, SentimentLabel, SentimentModel, TrainParams};

/// Twenty texts that a bag of words separates: one cue word per class plus
/// shared filler.
fn toy_texts() -> Vec<(&'static str, SentimentLabel)> {
    use SentimentLabel::*;
    vec![
        ("great news about the vaccine", Positive),
        ("so great to see cases falling", Positive),
        ("great work by the nurses", Positive),
        ("feeling great after recovery", Positive),
        ("the reopening is great", Positive),
        ("great day in the park", Positive),
        ("awful news about the hospital", Negative),
        ("so awful to see cases rising", Negative),
        ("awful queues at the shop", Negative),
        ("feeling awful in lockdown", Negative),
        ("the outbreak is awful", Negative),
        ("awful day in the city", Negative),
        ("update on the vaccine", Neutral),
        ("report on cases today", Neutral),
        ("update from the nurses", Neutral),
        ("report after the briefing", Neutral),
        ("the update is posted", Neutral),
        ("report in the park", Neutral),
        ("daily update for the city", Neutral),
        ("weekly report on the shop", Neutral),
    ]
}

fn toy_examples() -> Vec<LabeledExample> {
    DatasetId::ALL
        .iter()
        .flat_map(|&dataset| {
            toy_texts().into_iter().map(move |(text, label)| LabeledExample {
                text: text.to_string(),
                label,
                dataset,
            })
        })
        .collect()
}

#[test]
fn defaults_are_the_published_constants() {
    let p = TrainParams::default();
    assert_eq!(p.lr, 0.0005);
    assert_eq!(p.batch_size, 32);
    assert_eq!(p.epochs, 12);
}

#[test]
fn toy_set_is_fit_within_twelve_epochs() {
    let examples = toy_examples();
    let mut model = SentimentModel::new_random(16, 1024, 7).unwrap();
    let params = TrainParams { lr: 0.5, batch_size: 4, epochs: 12, seed: 7 };
    let trace = train(&mut model, &examples, &params).unwrap();
    assert_eq!(trace.epochs.len(), 12);
    let last = trace.epochs.last().unwrap();
    for h in &last.heads {
        assert_eq!(h.accuracy, 1.0, "{:?}", last);
    }
    assert_eq!(last.ensemble_accuracy, 1.0);
    for (text, label) in toy_texts() {
        assert_eq!(model.classify(text).unwrap().label, label, "{text}");
    }
    let first = &trace.epochs[0];
    for h in 0..3 {
        assert!(last.heads[h].loss < first.heads[h].loss);
    }
}

#[test]
fn default_hyperparameters_reduce_loss() {
    let examples = toy_examples();
    let mut model = SentimentModel::new_random(16, 1024, 3).unwrap();
    let trace = train(&mut model, &examples, &TrainParams::default()).unwrap();
    let (first, last) = (&trace.epochs[0], trace.epochs.last().unwrap());
    for h in 0..3 {
        assert!(last.heads[h].loss < first.heads[h].loss);
    }
}

#[test]
fn fixed_seed_is_bit_identical() {
    let examples = toy_examples();
    let params = TrainParams { lr: 0.5, batch_size: 4, epochs: 3, seed: 11 };
    let run = || {
        let mut model = SentimentModel::new_random(8, 256, 11).unwrap();
        train(&mut model, &examples, &params).unwrap();
        let mut bytes = Vec::new();
        model.write_to(&mut bytes).unwrap();
        bytes
    };
    assert_eq!(run(), run());
}
