//! Temporary diagnostics; deleted before ship.
use nldecomp::learner::aclr_dbc;
use nldecomp::signals::{generate_filtered_noise, generate_multicarrier};

#[test]
#[ignore]
fn psd_probe() {
    let noise = generate_filtered_noise(9, 65536, 0.5).unwrap();
    println!("brickwall noise ACLR(0.5): {:.1} dBc", aclr_dbc(&noise, 0.5).unwrap());
    let frame = generate_multicarrier(9, 65536, 0.5, 64).unwrap();
    println!("multicarrier ACLR(0.5): {:.1} dBc", aclr_dbc(frame.signal(), 0.5).unwrap());
    println!("fft={} cp={} syms={} bins={}", frame.fft_size, frame.cp_len, frame.num_symbols(), frame.active_bins.len());
    // Long-DFT out-of-band fraction of the whole record.
    let spec: Vec<f64> = {
        let mut buf = frame.signal().samples().to_vec();
        let mut planner = rustfft::FftPlanner::new();
        planner.plan_fft_forward(buf.len()).process(&mut buf);
        buf.iter().map(|v| v.norm_sqr()).collect()
    };
    let n = spec.len();
    let mut inb = 0.0;
    let mut outb = 0.0;
    for (k, p) in spec.iter().enumerate() {
        let f = if k <= n / 2 { k as f64 / n as f64 } else { k as f64 / n as f64 - 1.0 };
        if f.abs() <= 0.2506 { inb += p; } else { outb += p; }
    }
    println!("long-DFT out-of-band fraction: {:.1} dB", 10.0 * (outb / inb).log10());
}
