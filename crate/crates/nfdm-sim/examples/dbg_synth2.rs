// scratch: does synthesizing on the full 3-slot window lift the high-amplitude floor?
use nfdm_core::fourier::resample;
use nfdm_core::inft::{synthesize_raw, TimeGrid};
use nfdm_core::nft::scatter;
use nfdm_core::qam;
use nfdm_core::spectrum::{build_spectrum, precompensate};
use nfdm_core::txrx::NfdmModem;
use nfdm_core::{Complex, LinkConfig};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

fn main() {
    let link = LinkConfig::standard();
    let frame = nfdm_core::frame::design_presets::<f64>()[0].frame;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let bits: Vec<u8> = (0..64 * 5).map(|_| rng.gen_range(0..=1)).collect();
    let symbols = qam::map_bits::<f64>(&bits);

    for &(label, frames, m_mult) in &[("slot", 1usize, 1usize), ("window", 3, 1), ("window+fine", 3, 2)] {
        for &a in &[2.0f64, 2.57, 3.0] {
            let modem = NfdmModem::new(frame, &link, a).unwrap();
            let h = frame.lattice_h();
            let k_slot = frame.slot_samples();
            let n = frames * k_slot;
            let grid = TimeGrid {
                t_start: -(frames as f64) * frame.t1_norm() / 2.0 + h / 2.0,
                dt: h,
                n_samples: n,
            };
            // dense xi grid, optionally refined
            let m = modem.xi_dense.len() * m_mult;
            let dxi = std::f64::consts::PI / (h * m as f64);
            let xi: Vec<f64> = (0..m).map(|i| (i as f64 - m as f64 / 2.0) * dxi).collect();

            let norm_t: f64 = symbols.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
            let mut drive = symbols.clone();
            let mut best = f64::INFINITY;
            let (mu, iters) = (0.5f64, 64usize);
            let mut first = f64::NAN;
            for it in 0..iters {
                let mut spec = build_spectrum(&drive, &modem.layout, a, 0, xi.clone()).unwrap();
                precompensate(&mut spec, modem.l_norm, modem.precomp_fraction);
                let sig = match synthesize_raw(&spec, &grid) {
                    Ok(s) => s,
                    Err(e) => {
                        println!("{label} a={a}: synth error at it {it}: {e}");
                        break;
                    }
                };
                let q4 = resample(&sig.samples, 4 * sig.len());
                let dt4 = sig.dt() / 4.0;
                let (sa, sb) = scatter(&q4, sig.t0_offset, dt4, &modem.xi_centers, 1);
                let mut resid2 = 0.0;
                let mut err: Vec<Complex> = Vec::with_capacity(64);
                for k in 0..64 {
                    let xi_c = modem.xi_centers[k];
                    let pre = Complex::from_polar(
                        1.0,
                        4.0 * xi_c * xi_c * modem.l_norm * modem.precomp_fraction,
                    );
                    let demod = (sb[k] / sa[k]) * pre.conj() / a;
                    let e = demod - symbols[k];
                    resid2 += e.norm_sqr();
                    err.push(e);
                }
                let resid = resid2.sqrt() / norm_t;
                if it == 0 {
                    first = resid;
                }
                best = best.min(resid);
                if best < 1e-12 {
                    break;
                }
                for k in 0..64 {
                    drive[k] -= err[k] * mu;
                }
            }
            println!("{label:<12} a={a:<5} first {first:.3e}  best {best:.3e}");
        }
        println!();
    }
}
