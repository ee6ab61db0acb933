/// Real roots of the depressed cubic `t^3 + p t + q = 0`, each polished by Newton.
pub(crate) fn depressed_cubic_roots(p: f64, q: f64) -> Vec<f64> {
    let disc = q * q / 4.0 + p * p * p / 27.0;
    let mut roots = if disc > 0.0 {
        let s = disc.sqrt();
        vec![(-q / 2.0 + s).cbrt() + (-q / 2.0 - s).cbrt()]
    } else if p == 0.0 {
        vec![0.0]
    } else {
        let m = 2.0 * (-p / 3.0).sqrt();
        let arg = ((3.0 * q) / (p * m)).clamp(-1.0, 1.0);
        let phi = arg.acos() / 3.0;
        (0..3).map(|k| m * (phi - 2.0 * std::f64::consts::PI * k as f64 / 3.0).cos()).collect()
    };
    for r in roots.iter_mut() {
        for _ in 0..3 {
            let f = *r * *r * *r + p * *r + q;
            let df = 3.0 * *r * *r + p;
            if df.abs() > 1e-300 {
                *r -= f / df;
            }
        }
    }
    roots
}
