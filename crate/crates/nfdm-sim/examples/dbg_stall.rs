// scratch: where does the dense-grid refinement stall? profile |err|(xi),
// amplitude dependence, and trajectory
use nfdm_core::inft::{synthesize_raw, TimeGrid};
use nfdm_core::nft::scatter;
use nfdm_core::qam;
use nfdm_core::spectrum::build_spectrum;
use nfdm_core::Complex;
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
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let bits: Vec<u8> = (0..64 * 5).map(|_| rng.gen_range(0..=1)).collect();
    let syms = qam::map_bits::<f64>(&bits);

    // (A) synthesis on the lattice, error measured via 4x-upsampled scatter
    {
        let a = 0.9;
        let xi: Vec<f64> = (0..m).map(|i| (i as f64 - m as f64 / 2.0) * dxi).collect();
        let spec = build_spectrum(&syms, &layout, a, 0, xi).unwrap();
        let norm_t: f64 = spec.qc.iter().map(|q| q.norm_sqr()).sum::<f64>().sqrt();
        let mut drive = spec.clone();
        drive.ab = None;
        let mut best = f64::INFINITY;
        for it in 0..40 {
            let sig = synthesize_raw(&drive, &grid).unwrap();
            let up = nfdm_core::fourier::resample(&sig.samples, 4 * grid.n_samples);
            let (sa, sb) = scatter(&up, grid.t_start - 3.0 * h / 8.0, h / 4.0, &spec.xi, 1);
            let mut resid2 = 0.0;
            for i in 0..m {
                let e = sb[i] / sa[i] - spec.qc[i];
                resid2 += e.norm_sqr();
                drive.qc[i] -= e * 0.9;
            }
            let r = resid2.sqrt() / norm_t;
            best = best.min(r);
            if it % 8 == 0 || it == 39 {
                println!("(A) it {it:>2}: resid {r:.3e}");
            }
        }
        println!("(A) upsampled measurement: best resid {best:.3e}");
    }

    // (B) extended zone: xi grid covers the full zone of the h/4 lattice
    {
        let a = 0.9;
        let m4 = 4 * m;
        let fine = TimeGrid {
            t_start: grid.t_start - 3.0 * h / 8.0,
            dt: h / 4.0,
            n_samples: 4 * grid.n_samples,
        };
        let xi4: Vec<f64> = (0..m4)
            .map(|i| (i as f64 - m4 as f64 / 2.0) * dxi)
            .collect();
        let spec = build_spectrum(&syms, &layout, a, 0, xi4).unwrap();
        let norm_t: f64 = spec.qc.iter().map(|q| q.norm_sqr()).sum::<f64>().sqrt();
        // central-band norm for a band-restricted view of the same residual
        let lo = 3 * m / 2;
        let hi = 5 * m / 2;
        let norm_c: f64 = spec.qc[lo..hi]
            .iter()
            .map(|q| q.norm_sqr())
            .sum::<f64>()
            .sqrt();
        let mut drive = spec.clone();
        drive.ab = None;
        let (mut best, mut best_c) = (f64::INFINITY, f64::INFINITY);
        for it in 0..40 {
            let sig = synthesize_raw(&drive, &fine).unwrap();
            let (sa, sb) = scatter(&sig.samples, fine.t_start, fine.dt, &spec.xi, 1);
            let mut resid2 = 0.0;
            let mut resid2_c = 0.0;
            for i in 0..m4 {
                let e = sb[i] / sa[i] - spec.qc[i];
                resid2 += e.norm_sqr();
                if i >= lo && i < hi {
                    resid2_c += e.norm_sqr();
                }
                drive.qc[i] -= e * 0.9;
            }
            let r = resid2.sqrt() / norm_t;
            best = best.min(r);
            best_c = best_c.min(resid2_c.sqrt() / norm_c);
            if it % 8 == 0 || it == 39 {
                println!("(B) it {it:>2}: resid {r:.3e}  central {:.3e}", resid2_c.sqrt() / norm_c);
            }
        }
        println!("(B) extended zone: best full {best:.3e}  central {best_c:.3e}");
    }

    for &a in &[0.05f64, 0.9] {
        let xi: Vec<f64> = (0..m).map(|i| (i as f64 - m as f64 / 2.0) * dxi).collect();
        let spec = build_spectrum(&syms, &layout, a, 0, xi).unwrap();
        let norm_t: f64 = spec.qc.iter().map(|q| q.norm_sqr()).sum::<f64>().sqrt();
        let mut drive = spec.clone();
        drive.ab = None;
        let mu = 0.9;
        let mut last_err: Vec<Complex> = vec![Complex::new(0.0, 0.0); m];
        for it in 0..24 {
            let sig = synthesize_raw(&drive, &grid).unwrap();
            let (sa, sb) = scatter(&sig.samples, grid.t_start, grid.dt, &spec.xi, 1);
            let mut resid2 = 0.0;
            for i in 0..m {
                let e = sb[i] / sa[i] - spec.qc[i];
                resid2 += e.norm_sqr();
                last_err[i] = e;
            }
            let resid = resid2.sqrt() / norm_t;
            if it % 4 == 0 || it == 23 {
                println!("a={a} it {it:>2}: resid {resid:.3e}");
            }
            for i in 0..m {
                drive.qc[i] -= last_err[i] * mu;
            }
        }
        // error distribution over |xi| bands at the end
        let bands = [0.0, 1.0, 2.0, 3.3, 5.0, 7.0, 8.4];
        for w in bands.windows(2) {
            let (mut e2, mut t2) = (0.0f64, 0.0f64);
            for i in 0..m {
                let x = spec.xi[i].abs();
                if x >= w[0] && x < w[1] {
                    e2 += last_err[i].norm_sqr();
                    t2 += spec.qc[i].norm_sqr();
                }
            }
            println!(
                "  |xi| in [{:.1},{:.1}): err^2 {:.3e}  target^2 {:.3e}",
                w[0], w[1], e2, t2
            );
        }
    }
}
