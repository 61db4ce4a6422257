use ideaflow::corpus::Side;
use ideaflow::divergence::talking_points;
use ideaflow::flow::discussion_points;
use ideaflow::synth::{generate_with_truth, SynthSpec};
use ideaflow::textproc::{debate_terms, Stopwords};
use std::collections::BTreeSet;

#[test]
fn planted_talking_points_recovered() {
    let sw = Stopwords::english();
    let (mut hits, mut total) = (0usize, 0usize);
    let mut worst = 1.0f64;
    for seed in 0..20 {
        let spec = SynthSpec {
            seed,
            n_debates: 2,
            tp_frequency_boost: 5.0,
            ..SynthSpec::default()
        };
        for sd in generate_with_truth(&spec).unwrap() {
            let tp = talking_points(&sd.debate, 20, 0.01, &sw).unwrap();
            for side in Side::BOTH {
                let got = tp.set(side).terms().filter(|t| sd.planted(side).contains(t.as_str())).count();
                hits += got;
                total += 20;
                worst = worst.min(got as f64 / 20.0);
            }
        }
    }
    let precision = hits as f64 / total as f64;
    println!("precision {precision} worst {worst}");
    assert!(precision >= 0.9);
}

#[test]
fn planted_discussion_points_detected_exactly() {
    let sw = Stopwords::english();
    for seed in 0..5 {
        let spec = SynthSpec { seed, n_debates: 4, ..SynthSpec::default() };
        for sd in generate_with_truth(&spec).unwrap() {
            let dps = discussion_points(&debate_terms(&sd.debate, &sw));
            let got: BTreeSet<String> = dps.points.iter().map(|p| p.term.as_str().to_string()).collect();
            assert_eq!(got, sd.planted_discussion_points);
        }
    }
}
