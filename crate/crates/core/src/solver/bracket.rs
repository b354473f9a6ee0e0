/// Point of a scalar function.
#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) struct Root {
    pub x: f64,
    pub fx: f64,
}

/// Refines a sign-changing bracket `[a, b]` by secant steps with a bisection
/// safeguard; returns the endpoint of smallest `|f|`.
///
/// Stops when `|f| <= ftol` and the bracket is narrower than `xtol`, when the
/// bracket no longer shrinks in floating point, or after `max_iter` steps.
/// `f` returning `None` at a trial point forces a bisection there; a second
/// failure aborts with `None`.
pub(crate) fn refine<F>(mut f: F, a: Root, b: Root, ftol: f64, xtol: f64, max_iter: usize) -> Option<Root>
where
    F: FnMut(f64) -> Option<f64>,
{
    let (mut a, mut b) = if a.x <= b.x { (a, b) } else { (b, a) };
    if a.fx == 0.0 {
        return Some(a);
    }
    if b.fx == 0.0 {
        return Some(b);
    }
    if a.fx.signum() == b.fx.signum() {
        return None;
    }
    let best = |a: Root, b: Root| if a.fx.abs() <= b.fx.abs() { a } else { b };
    let mut force_bisect = false;
    for _ in 0..max_iter {
        let width = b.x - a.x;
        let mid = a.x + 0.5 * width;
        let secant = b.x - b.fx * width / (b.fx - a.fx);
        let mut m = if force_bisect || !(secant > a.x && secant < b.x) { mid } else { secant };
        let fm = match f(m) {
            Some(v) => v,
            None if m != mid => {
                m = mid;
                f(m)?
            }
            None => return None,
        };
        if fm == 0.0 {
            return Some(Root { x: m, fx: 0.0 });
        }
        if fm.signum() == a.fx.signum() {
            a = Root { x: m, fx: fm };
        } else {
            b = Root { x: m, fx: fm };
        }
        let new_width = b.x - a.x;
        force_bisect = new_width > 0.5 * width;
        let cand = best(a, b);
        if cand.fx.abs() <= ftol && new_width <= xtol {
            return Some(cand);
        }
        if new_width >= width || m == a.x && m == b.x {
            return Some(cand);
        }
        if a.x + 0.5 * new_width == a.x || a.x + 0.5 * new_width == b.x {
            return Some(cand);
        }
    }
    Some(best(a, b))
}
