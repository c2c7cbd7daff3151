// scratch: 8x-fine lattice, 2-slot window — does the full-grid round trip
// floor drop below 1e-4, and at what cost?
use nfdm_core::inft::{synthesize_raw, TimeGrid};
use nfdm_core::nft::scatter;
use nfdm_core::qam;
use nfdm_core::spectrum::build_spectrum;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use std::time::Instant;

fn main() {
    let frame = nfdm_core::frame::design_presets::<f64>()[0].frame;
    let layout = frame.carrier_layout();
    let h = frame.lattice_h();
    let over = 8usize;
    let hf = h / over as f64;
    let n = 2 * frame.slot_samples() * over; // two slots at the fine rate
    let grid = TimeGrid {
        t_start: -(n as f64) * hf / 2.0 + hf / 2.0,
        dt: hf,
        n_samples: n,
    };
    let dxi = std::f64::consts::PI / (h * 2048.0); // same density as before
    let m = (std::f64::consts::PI / (hf * dxi)).round() as usize; // full zone
    println!("m = {m}, n = {n}, zone +-{:.2}", m as f64 / 2.0 * dxi);

    for &(seed, a) in &[(1u64, 0.9f64), (2, 0.9), (3, 0.5)] {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let bits: Vec<u8> = (0..64 * 5).map(|_| rng.gen_range(0..=1)).collect();
        let syms = qam::map_bits::<f64>(&bits);
        let xi: Vec<f64> = (0..m).map(|i| (i as f64 - m as f64 / 2.0) * dxi).collect();
        let spec = build_spectrum(&syms, &layout, a, 0, xi).unwrap();
        let norm_t: f64 = spec.qc.iter().map(|q| q.norm_sqr()).sum::<f64>().sqrt();
        let mut drive = spec.clone();
        drive.ab = None;
        let t0 = Instant::now();
        let mut best = f64::INFINITY;
        for it in 0..16 {
            let sig = synthesize_raw(&drive, &grid).unwrap();
            let (sa, sb) = scatter(&sig.samples, grid.t_start, grid.dt, &spec.xi, 1);
            let mut resid2 = 0.0;
            for i in 0..m {
                let e = sb[i] / sa[i] - spec.qc[i];
                resid2 += e.norm_sqr();
                drive.qc[i] -= e * 0.9;
            }
            let r = resid2.sqrt() / norm_t;
            best = best.min(r);
            if it % 4 == 0 || it == 15 {
                println!("seed {seed} a={a} it {it:>2}: resid {r:.3e}");
            }
        }
        println!(
            "seed {seed} a={a}: best {best:.3e}  ({:.1} s)",
            t0.elapsed().as_secs_f64()
        );
    }
}
