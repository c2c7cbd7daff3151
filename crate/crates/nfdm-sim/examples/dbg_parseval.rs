// scratch: (1) does a 4x-refined energy integral close the Parseval gap?
// (2) how many refinement iterations until the dense-grid round trip
//     reaches 1e-4/1e-5?
use nfdm_core::fourier::resample;
use nfdm_core::inft::{inverse_nft_best_effort, TimeGrid};
use nfdm_core::nft::{forward_nft, nft_energy};
use nfdm_core::qam;
use nfdm_core::signal::{TimeSignal, Units};
use nfdm_core::spectrum::build_spectrum;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

fn main() {
    let frame = nfdm_core::frame::design_presets::<f64>()[0].frame;
    let layout = frame.carrier_layout();
    let h = frame.lattice_h();
    let m = 2048usize;
    let dxi = std::f64::consts::PI / (h * m as f64);
    let grid = TimeGrid {
        t_start: -3.0 * frame.t1_norm() / 2.0 + h / 2.0,
        dt: h,
        n_samples: 3 * frame.slot_samples(),
    };

    // --- parseval with refined measurement ---
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let bits: Vec<u8> = (0..64 * 5).map(|_| rng.gen_range(0..=1)).collect();
    let syms = qam::map_bits::<f64>(&bits);
    let xi: Vec<f64> = (0..m).map(|i| (i as f64 - m as f64 / 2.0) * dxi).collect();
    let spec = build_spectrum(&syms, &layout, 0.35, 0, xi).unwrap();
    let out = inverse_nft_best_effort(&spec, &grid, 1e-5, 30).unwrap();
    println!("synthesis residual {:.2e} iters {}", out.residual, out.iterations);
    let e_time = out.signal.energy();

    // raw-lattice measurement over one zone (the failing version)
    let raw = forward_nft(&out.signal, &spec.xi, 1).unwrap();
    println!(
        "raw lattice:   E_time {e_time:.6} vs E_xi {:.6} (rel {:.2e})",
        nft_energy(&raw),
        ((e_time - nft_energy(&raw)) / e_time).abs()
    );

    // 4x band-limited refinement, integrate over the 4x-wider zone
    let n4 = 4 * out.signal.len();
    let q4 = resample(&out.signal.samples, n4);
    let sig4 = TimeSignal::new(q4, out.signal.sample_rate * 4.0, Units::Normalized, out.signal.t0_offset);
    let m4 = 4 * m;
    let dxi4 = std::f64::consts::PI / ((h / 4.0) * m4 as f64); // = dxi
    let xi4: Vec<f64> = (0..m4).map(|i| (i as f64 - m4 as f64 / 2.0) * dxi4).collect();
    let fine = forward_nft(&sig4, &xi4, 1).unwrap();
    println!(
        "4x refined:    E_time {e_time:.6} vs E_xi {:.6} (rel {:.2e})",
        nft_energy(&fine),
        ((e_time - nft_energy(&fine)) / e_time).abs()
    );

    // --- round-trip floor vs iteration budget ---
    for &a in &[0.5f64, 0.9] {
        for &iters in &[40usize, 120, 300] {
            let mut rng = ChaCha8Rng::seed_from_u64(1);
            let bits: Vec<u8> = (0..64 * 5).map(|_| rng.gen_range(0..=1)).collect();
            let syms = qam::map_bits::<f64>(&bits);
            let xi: Vec<f64> = (0..m).map(|i| (i as f64 - m as f64 / 2.0) * dxi).collect();
            let spec = build_spectrum(&syms, &layout, a, 0, xi).unwrap();
            let out = inverse_nft_best_effort(&spec, &grid, 1e-6, iters).unwrap();
            let rt = forward_nft(&out.signal, &spec.xi, 1).unwrap();
            let (mut num, mut den) = (0.0f64, 0.0f64);
            for k in 0..spec.len() {
                num += (rt.qc[k] - spec.qc[k]).norm_sqr();
                den += spec.qc[k].norm_sqr();
            }
            println!(
                "a={a} iters={iters:<4} residual {:.2e} ({} used)  re-scatter rel {:.2e}",
                out.residual,
                out.iterations,
                (num / den).sqrt()
            );
        }
    }
}
