//! OSPA distance with cutoff `mu` and order `p`, and rigid alignment.

use crate::error::{invalid, Result};
use crate::metrics::{Detection, DetectionSet};
use crate::scalar::{from_usize, Real};

/// Minimum-cost assignment of every row to a distinct column (`rows <= cols`).
/// Returns the total cost.
fn hungarian<T: Real>(cost: &[Vec<T>], cols: usize) -> T {
    let rows = cost.len();
    if rows == 0 {
        return T::zero();
    }
    // Potentials and matching, 1-based with a virtual column 0.
    let inf = T::infinity();
    let mut u = vec![T::zero(); rows + 1];
    let mut v = vec![T::zero(); cols + 1];
    let mut owner = vec![0usize; cols + 1];
    let mut way = vec![0usize; cols + 1];
    for i in 1..=rows {
        owner[0] = i;
        let mut j0 = 0;
        let mut minv = vec![inf; cols + 1];
        let mut used = vec![false; cols + 1];
        loop {
            used[j0] = true;
            let i0 = owner[j0];
            let mut delta = inf;
            let mut j1 = 0;
            for j in 1..=cols {
                if used[j] {
                    continue;
                }
                let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=cols {
                if used[j] {
                    u[owner[j]] = u[owner[j]] + delta;
                    v[j] = v[j] - delta;
                } else {
                    minv[j] = minv[j] - delta;
                }
            }
            j0 = j1;
            if owner[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            owner[j0] = owner[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    (1..=cols)
        .filter(|&j| owner[j] != 0)
        .map(|j| cost[owner[j] - 1][j - 1])
        .sum()
}

/// OSPA distance between point sets `x` and `y`; lies in `[0, mu]`.
pub fn ospa<T: Real>(x: &[T], y: &[T], mu: T, p: T) -> Result<T> {
    if !(mu > T::zero()) {
        return invalid(format!("OSPA cutoff must be > 0, got {mu}"));
    }
    if !(p >= T::one()) {
        return invalid(format!("OSPA order must be >= 1, got {p}"));
    }
    let (small, large) = if x.len() <= y.len() { (x, y) } else { (y, x) };
    let n = large.len();
    if n == 0 {
        return Ok(T::zero());
    }
    let cost: Vec<Vec<T>> = small
        .iter()
        .map(|&a| large.iter().map(|&b| (a - b).abs().min(mu).powf(p)).collect())
        .collect();
    let assigned = hungarian(&cost, n);
    let missing = from_usize::<T>(n - small.len()) * mu.powf(p);
    let d = ((assigned + missing) / from_usize::<T>(n)).powf(T::one() / p);
    Ok(d.max(T::zero()).min(mu))
}

/// Result of [`align_rigid`].
#[derive(Debug, Clone, PartialEq)]
pub struct Alignment<T> {
    pub aligned: DetectionSet<T>,
    pub shift: T,
    /// First-order OSPA after alignment.
    pub ospa: T,
}

/// Shifts every range of `x` by the offset `i step`, `|i| <= round(mu / step)`,
/// that minimizes first-order OSPA to `truth`. Smaller offsets win ties.
pub fn align_rigid<T: Real>(x: &DetectionSet<T>, truth: &[T], mu: T, step: T) -> Result<Alignment<T>> {
    if !(step > T::zero()) {
        return invalid("alignment step must be > 0");
    }
    let ranges = x.ranges();
    let base = ospa(&ranges, truth, mu, T::one())?;
    if x.is_empty() || truth.is_empty() {
        return Ok(Alignment {
            aligned: x.clone(),
            shift: T::zero(),
            ospa: base,
        });
    }
    let n = (mu / step).round().to_i64().unwrap_or(0);
    let mut best = (T::zero(), base);
    for a in 1..=n {
        for i in [a, -a] {
            let shift = T::from_i64(i).expect("small integer") * step;
            let moved: Vec<T> = ranges.iter().map(|&r| r + shift).collect();
            let d = ospa(&moved, truth, mu, T::one())?;
            if d < best.1 {
                best = (shift, d);
            }
        }
    }
    let aligned = DetectionSet::new(
        x.detections
            .iter()
            .map(|d| Detection {
                range: d.range + best.0,
                magnitude: d.magnitude,
            })
            .collect(),
        x.source,
    );
    Ok(Alignment {
        aligned,
        shift: best.0,
        ospa: best.1,
    })
}
