use spin_toolkit::dynamics::{pl_settling_time, simulate_pl_transient};
use spin_toolkit::presets;

fn settle(pump: f64) -> f64 {
    let mut m = presets::rate_model_fig1f_default();
    m.pump_rate = pump;
    // long RF-on stretch, then RF off; fit the tail
    let tr = simulate_pl_transient(&m, &[(200.0, true), (2000.0, false)], 1.0).unwrap();
    let fit = pl_settling_time(&tr).unwrap();
    fit.value("t_const_ns").unwrap()
}

fn main() {
    let (mut lo, mut hi) = (0.01, 1.0);
    for _ in 0..60 {
        let mid = (lo * hi as f64).sqrt();
        if settle(mid) > 300.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let pump = (lo * hi as f64).sqrt();
    println!("tuned pump = {pump:.7}");
    println!("settle at tuned: {:.4} ns", settle(pump));
    println!("settle at preset {}: {:.4} ns", presets::FIG1F_PUMP_RATE_PER_NS, settle(presets::FIG1F_PUMP_RATE_PER_NS));
    // sensitivity
    for p in [pump * 0.98, pump * 1.02] {
        println!("settle at {p:.6}: {:.4}", settle(p));
    }
}
