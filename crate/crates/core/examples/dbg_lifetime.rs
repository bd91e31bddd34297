use spin_toolkit::fit::*;
fn main() {
    let t: Vec<f64> = (0..600).map(|k| k as f64 * 4.0).collect();
    let response = gaussian_response(&t, 100.0, 10.0).unwrap();
    let dt = 4.0;
    let (tau, amp, t0, base) = (450.0, 1.0, 20.0, 0.02);
    let signal: Vec<f64> = {
        let mut out = vec![base; t.len()];
        for (j, &rj) in response.iter().enumerate() {
            let w = amp * rj * dt;
            for i in j..t.len() {
                let u = t[i] - t[j] - t0;
                if u >= 0.0 { out[i] += w * (-u / tau).exp(); }
            }
        }
        out
    };
    let trace = TimeTrace::with_unit(t, signal, Some(response), TimeUnit::Ps).unwrap();
    let fit = fit_lifetime_convolved(&trace).unwrap();
    println!("converged={} iters={} rss={:.3e}", fit.converged, fit.iterations, fit.rss);
    for (n, v) in fit.names.iter().zip(&fit.values) {
        println!("  {n} = {v}");
    }
}
