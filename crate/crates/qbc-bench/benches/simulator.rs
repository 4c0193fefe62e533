use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use qbc_core::adversary::{
    attack_pgm, steering_attack, DeviceModel, EntangledSteering, SteeringMeasurement,
};
use qbc_core::protocol::{
    codec, run_session, Bit, CommitRegister, HonestAlice, Message, ProtocolParams, RegisterPayload,
    SessionOptions,
};
use qbc_core::states;

fn bench_trace_distance(c: &mut Criterion) {
    let mut group = c.benchmark_group("trace_distance");
    for n in [8u32, 32, 64] {
        let plus = states::rho_plus(n).unwrap();
        let minus = states::rho_minus(n).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| {
            b.iter(|| black_box(plus.trace_distance(&minus).unwrap()))
        });
    }
    group.finish();
}

fn bench_pgm_construction(c: &mut Criterion) {
    let mut group = c.benchmark_group("attack_pgm");
    for n in [8u32, 16] {
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, &n| {
            b.iter(|| black_box(attack_pgm(n).unwrap()))
        });
    }
    group.finish();
}

fn bench_honest_session(c: &mut Criterion) {
    let params = ProtocolParams::new(8, 256, 1).unwrap();
    let options = SessionOptions::default();
    c.bench_function("honest_session_s8_n256", |b| {
        let mut stream = 0u64;
        b.iter(|| {
            stream += 1;
            let mut alice = HonestAlice::new(params, Bit::One);
            black_box(run_session(&params, stream, &mut alice, &options).unwrap())
        })
    });
}

fn bench_steering_cell(c: &mut Criterion) {
    let params = ProtocolParams::new(4, 256, 2).unwrap();
    let attack = EntangledSteering {
        n_a: 8,
        target_b: Bit::One,
        measurement: SteeringMeasurement::Pgm,
        device: DeviceModel::new(1e-9).unwrap(),
    };
    c.bench_function("steering_batch_100_n8_s4", |b| {
        b.iter(|| black_box(steering_attack(&params, &attack, 100).unwrap()))
    });
}

fn bench_codec(c: &mut Criterion) {
    let state = states::committed_state(1 << 20, 1, 77).unwrap();
    let msg = Message::Commit(CommitRegister {
        j: 3,
        payload: RegisterPayload::from_state(&state),
    });
    let bytes = codec::encode(&msg).unwrap();
    c.bench_function("codec_encode_commit", |b| {
        b.iter(|| black_box(codec::encode(&msg).unwrap()))
    });
    c.bench_function("codec_decode_commit", |b| {
        b.iter(|| black_box(codec::decode(&bytes).unwrap()))
    });
}

criterion_group!(
    benches,
    bench_trace_distance,
    bench_pgm_construction,
    bench_honest_session,
    bench_steering_cell,
    bench_codec
);
criterion_main!(benches);
