//! Scan `|zeta(sigma + it)|` along a vertical line, reporting the running
//! minimum and every point below a threshold. Useful for judging which
//! graft targets are reachable in a strip before configuring a pipeline.
//!
//! Usage: `scan_minima <sigma> <t_lo> <t_hi> <step> <report_below>`

use metazeta::zeta::zeta_euler_maclaurin;
use num_complex::Complex64;

fn main() {
    let args: Vec<String> = std::env::args().collect();
    if args.len() != 6 {
        eprintln!("usage: scan_minima <sigma> <t_lo> <t_hi> <step> <report_below>");
        std::process::exit(2);
    }
    let sigma: f64 = args[1].parse().unwrap();
    let t_lo: f64 = args[2].parse().unwrap();
    let t_hi: f64 = args[3].parse().unwrap();
    let step: f64 = args[4].parse().unwrap();
    let below: f64 = args[5].parse().unwrap();

    let mut t = t_lo;
    let mut run_min = (0.0f64, f64::INFINITY);
    let mut hits = 0usize;
    while t <= t_hi {
        let v = zeta_euler_maclaurin(Complex64::new(sigma, t)).0.norm();
        if v < run_min.1 {
            run_min = (t, v);
        }
        if v < below {
            println!("hit t={t:.3} |zeta|={v:.6}");
            hits += 1;
        }
        t += step;
    }
    println!(
        "sigma={sigma} range=({t_lo},{t_hi}) min at t={:.3}: {:.6e}, hits_below_{below}: {hits}",
        run_min.0, run_min.1
    );
}
