/// Number of core links `kappa_l` kept untouched at round `t`.
///
/// `kappa_l = K_l - (alpha_adj / 2) (1 + cos(t pi / t_end)) K_l`, rounded to
/// the nearest integer and clamped to `[0, K_l]`; `t` is clamped to
/// `[0, t_end]`. The adjustment width `K_l - kappa_l` decays from
/// `alpha_adj K_l` to zero.
pub fn kappa_schedule(t: u64, t_end: u64, active: usize, alpha_adj: f64) -> usize {
    if t_end == 0 {
        return active;
    }
    let t = t.min(t_end) as f64;
    let k = active as f64;
    let width = alpha_adj / 2.0 * (1.0 + (t * std::f64::consts::PI / t_end as f64).cos()) * k;
    (k - width).round().clamp(0.0, k) as usize
}
