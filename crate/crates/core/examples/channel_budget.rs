//! Link budget of the default channel: mean received power, SNR and the
//! jam-detection distance.

use jamsim::channel::{linear_to_db, sinr, watts_to_dbm, ChannelParams, LinkSample};

fn main() {
    let ch = ChannelParams::for_range(5000.0);
    println!(
        "noise {:.1} dBm, threshold {} dB, jam detection within {:.0} m",
        watts_to_dbm(ch.noise_power),
        ch.sinr_threshold_db,
        ch.jam_range()
    );
    for d in [500.0, 1000.0, 2500.0, 5000.0, 10_000.0, 20_000.0] {
        let p = ch.mean_received_power(d);
        println!("{d:>7.0} m  {:7.1} dBm  SNR {:5.1} dB", watts_to_dbm(p), linear_to_db(p / ch.noise_power));
    }

    // One interferer at twice the link distance: SIR is 6 dB, so the frame
    // still decodes at a 5 dB threshold.
    let signal = ch.mean_received_power(2000.0);
    let interferer = ch.mean_received_power(4000.0);
    let s = sinr(signal, &[interferer], ch.noise_power);
    let decodes = LinkSample::new(signal, interferer, ch.noise_power).decodes(&ch);
    println!("2 km link with a 4 km interferer: SINR {:.2} dB, decodes {decodes}", linear_to_db(s));
}
