// scratch: iteration trajectory on the window grid at mu=0.9 — how many
// iterations do the modem defaults need?
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

    for &(mu, a) in &[
        (0.9f64, 2.57f64),
        (0.9, 3.0),
        (0.9, 3.5),
        (0.7, 3.5),
        (0.9, 1.0),
    ] {
        let modem = NfdmModem::new(frame, &link, a).unwrap();
        let h = frame.lattice_h();
        let k_slot = frame.slot_samples();
        let frames = 3usize;
        let n = frames * k_slot;
        let grid = TimeGrid {
            t_start: -(frames as f64) * frame.t1_norm() / 2.0 + h / 2.0,
            dt: h,
            n_samples: n,
        };
        let norm_t: f64 = symbols.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        let mut drive = symbols.clone();
        let mut traj = Vec::new();
        for _ in 0..48 {
            let mut spec =
                build_spectrum(&drive, &modem.layout, a, 0, modem.xi_dense.clone()).unwrap();
            precompensate(&mut spec, modem.l_norm, modem.precomp_fraction);
            let sig = synthesize_raw(&spec, &grid).unwrap();
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
            traj.push(resid);
            if resid < 1e-13 {
                break;
            }
            for k in 0..64 {
                drive[k] -= err[k] * mu;
            }
        }
        let shown: Vec<String> = traj
            .iter()
            .enumerate()
            .filter(|(i, _)| *i < 6 || *i % 8 == 0 || *i + 1 == traj.len())
            .map(|(i, r)| format!("{i}:{r:.1e}"))
            .collect();
        println!("a={a} mu={mu}: {}", shown.join(" "));
    }
}
