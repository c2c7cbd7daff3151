// scratch: predistortion convergence vs amplitude and damping
use nfdm_core::fourier::resample;
use nfdm_core::inft::synthesize_raw;
use nfdm_core::nft::scatter;
use nfdm_core::qam;
use nfdm_core::spectrum::{build_spectrum, precompensate};
use nfdm_core::txrx::NfdmModem;
use nfdm_core::{Complex, LinkConfig};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

fn main() {
    let link = LinkConfig::standard(); // 12 spans, l_norm 2.71
    let frame = nfdm_core::frame::design_presets::<f64>()[0].frame;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let bits: Vec<u8> = (0..64 * 5).map(|_| rng.gen_range(0..=1)).collect();
    let symbols = qam::map_bits::<f64>(&bits);

    for &a in &[1.0, 1.5, 2.0, 2.57, 3.0] {
        let modem = NfdmModem::new(frame, &link, a).unwrap();
        let grid = modem.slot_grid();
        let norm_t: f64 = symbols.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();

        for &(mu, iters) in &[(0.9f64, 16usize), (0.9, 64), (0.5, 64), (0.3, 128), (0.2, 256)] {
            let mut drive = symbols.clone();
            let mut best = f64::INFINITY;
            let mut first = f64::NAN;
            for it in 0..iters {
                let mut spec =
                    build_spectrum(&drive, &modem.layout, a, 0, modem.xi_dense.clone()).unwrap();
                precompensate(&mut spec, modem.l_norm, modem.precomp_fraction);
                let sig = match synthesize_raw(&spec, &grid) {
                    Ok(s) => s,
                    Err(e) => {
                        println!("a={a} mu={mu}: synth error at it {it}: {e}");
                        break;
                    }
                };
                // measure carriers on a 4x-refined lattice
                let q4 = resample(&sig.samples, 4 * sig.len());
                let dt4 = sig.dt() / 4.0;
                let (sa, sb) = scatter(&q4, sig.t0_offset, dt4, &modem.xi_centers, 1);
                let mut resid2 = 0.0;
                let mut err: Vec<Complex> = Vec::with_capacity(64);
                for k in 0..64 {
                    let xi = modem.xi_centers[k];
                    let pre =
                        Complex::from_polar(1.0, 4.0 * xi * xi * modem.l_norm * modem.precomp_fraction);
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
                for k in 0..64 {
                    drive[k] -= err[k] * mu;
                }
            }
            println!("a={a:<5} mu={mu:<4} iters={iters:<4} first {first:.3e}  best {best:.3e}");
        }
        println!();
    }
}
