use criterion::{criterion_group, criterion_main, Criterion};
use spdc_core::fitting::fit_dip;
use spdc_core::interference::hom_curve_default;
use spdc_core::phasematch::band_map;
use spdc_core::pipeline::all_triplets;
use spdc_core::spectra::{build_jsa, default_window_nm};
use spdc_core::{ExperimentConfig, ModeTriplet};

fn kernels(c: &mut Criterion) {
    let cfg = ExperimentConfig::shipped().unwrap();
    let wg = cfg.waveguide().unwrap();
    let t = ModeTriplet::fundamental();
    let triplets = all_triplets(&cfg, &wg).unwrap();
    let window = default_window_nm(&wg, &t, 400.63).unwrap();
    let f = build_jsa(&wg, &t, 400.63, window, 4097).unwrap();

    let mut group = c.benchmark_group("kernels");
    group.sample_size(10);
    group.bench_function("band_map_200x200_all_triplets", |b| {
        b.iter(|| band_map(&wg, &triplets, (780.0, 820.0), (780.0, 820.0), 200).unwrap())
    });
    group.bench_function("build_jsa_4097", |b| b.iter(|| build_jsa(&wg, &t, 400.63, window, 4097).unwrap()));
    group.bench_function("hom_curve_default", |b| b.iter(|| hom_curve_default(&f).unwrap()));

    let pts: Vec<(f64, f64)> = (0..35)
        .map(|k| {
            let x = -0.6 + 0.025 * k as f64;
            (x, 4000.0 * (1.0 - 0.911 * (-0.5 * ((x + 0.176) / 0.087f64).powi(2)).exp()))
        })
        .collect();
    group.bench_function("fit_dip_35_points", |b| b.iter(|| fit_dip(&pts).unwrap()));
    group.finish();
}

criterion_group!(benches, kernels);
criterion_main!(benches);
