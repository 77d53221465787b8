/// All sign-change roots of `f` on `[a, b]`.
///
/// The interval is cut into `n_brackets` equal pieces; each piece whose end
/// values differ in sign is bisected down to `|b − a|·1e−14`. A root is only
/// found if `f` changes sign across it, so tangential zeros and pairs of roots
/// closer than one bracket are missed; callers choose `n_brackets` so that `f`
/// is monotone within each bracket. Sample points where `f` is exactly zero
/// are reported once.
pub fn bisect_roots(f: impl Fn(f64) -> f64, a: f64, b: f64, n_brackets: usize) -> Vec<f64> {
    assert!(n_brackets >= 1 && b > a);
    let tol = (b - a) * 1e-14;
    let xs: Vec<f64> = (0..=n_brackets)
        .map(|i| a + (b - a) * i as f64 / n_brackets as f64)
        .collect();
    let ys: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
    let mut roots = Vec::new();
    for i in 0..n_brackets {
        let (mut lo, mut hi) = (xs[i], xs[i + 1]);
        let (mut flo, fhi) = (ys[i], ys[i + 1]);
        if flo == 0.0 {
            if roots.last() != Some(&lo) {
                roots.push(lo);
            }
            continue;
        }
        if fhi == 0.0 {
            roots.push(hi);
            continue;
        }
        if flo.signum() == fhi.signum() || !flo.is_finite() || !fhi.is_finite() {
            continue;
        }
        while hi - lo > tol {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            let fm = f(mid);
            if fm == 0.0 {
                lo = mid;
                hi = mid;
                break;
            }
            if fm.signum() == flo.signum() {
                lo = mid;
                flo = fm;
            } else {
                hi = mid;
            }
        }
        roots.push(0.5 * (lo + hi));
    }
    roots
}
