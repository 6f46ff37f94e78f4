use augeval_bench::bench_raster;
use augeval_core::imageops::{apply, decode, encode_png, InputFormat, Transform};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};

fn transform_benches(c: &mut Criterion) {
    let raster = bench_raster(42, 256, 256);
    let mut group = c.benchmark_group("apply_256x256");
    group.throughput(Throughput::Bytes(raster.pixels().len() as u64));
    for id in ["fliph", "flipv", "rot90", "rot180", "bgr", "rot30", "rot150"] {
        let transform = Transform::parse(id).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(id), &transform, |b, t| {
            b.iter(|| apply(&raster, t))
        });
    }
    group.finish();
}

fn codec_benches(c: &mut Criterion) {
    let raster = bench_raster(43, 128, 128);
    let png = encode_png(&raster).unwrap();
    c.bench_function("encode_png_128x128", |b| b.iter(|| encode_png(&raster).unwrap()));
    c.bench_function("decode_png_128x128", |b| {
        b.iter(|| decode(&png, InputFormat::Png).unwrap())
    });
}

criterion_group!(benches, transform_benches, codec_benches);
criterion_main!(benches);
