use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use adscribe_bench::{audio_fixture, sentence_pair, signal_fixture};
use adscribe_core::revision::{levenshtein_breakdown, word_diff};
use adscribe_core::timing::{detect_silence, plan_slots, TimingConfig};

fn planning(c: &mut Criterion) {
    let config = TimingConfig::default();
    let mut group = c.benchmark_group("plan_slots");
    for minutes in [1u64, 10, 60] {
        let duration = minutes * 60_000;
        let (silence, no_speech, cuts) = signal_fixture(minutes, duration);
        group.bench_with_input(
            BenchmarkId::from_parameter(format!("{minutes}min")),
            &duration,
            |b, &d| {
                b.iter(|| plan_slots(black_box(&silence), &no_speech, &cuts, d, &config).unwrap())
            },
        );
    }
    group.finish();

    let audio = audio_fixture(7, 60_000);
    c.bench_function("detect_silence/1min", |b| {
        b.iter(|| detect_silence(black_box(&audio), &config).unwrap())
    });
}

fn text_metrics(c: &mut Criterion) {
    let mut group = c.benchmark_group("text");
    for words in [25usize, 50, 200] {
        let (old, new) = sentence_pair(words as u64, words);
        group.bench_with_input(
            BenchmarkId::new("levenshtein_breakdown", words),
            &words,
            |b, _| b.iter(|| levenshtein_breakdown(black_box(&old), black_box(&new))),
        );
        group.bench_with_input(BenchmarkId::new("word_diff", words), &words, |b, _| {
            b.iter(|| word_diff(black_box(&old), black_box(&new)))
        });
    }
    group.finish();
}

criterion_group!(benches, planning, text_metrics);
criterion_main!(benches);
