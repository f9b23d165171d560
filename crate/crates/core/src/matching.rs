//! SAD matching of edge histograms and the linear displacement model.
//!
//! Displacement convention: `d` at position `p` means the current window
//! centred at `p` looks like the previous window centred at `p + d`. A camera
//! translating towards +x therefore produces positive displacements.

use crate::error::{Error, Result};
use crate::histograms::EdgeHistogram;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MatchParams {
    /// Window length in bins.
    pub window_size: usize,
    /// Search distance in bins, both directions.
    pub max_search: usize,
}

impl Default for MatchParams {
    fn default() -> Self {
        Self {
            window_size: 18,
            max_search: 10,
        }
    }
}

impl MatchParams {
    pub fn new(window_size: usize, max_search: usize) -> Result<Self> {
        let p = Self {
            window_size,
            max_search,
        };
        if window_size < 1 || max_search < 1 {
            return Err(Error::InvalidParams(format!(
                "window_size ({window_size}) and max_search ({max_search}) must both be >= 1"
            )));
        }
        Ok(p)
    }

    pub fn half_window(&self) -> usize {
        self.window_size / 2
    }

    pub fn border_margin(&self) -> usize {
        self.half_window() + self.max_search
    }

    /// Checks the parameters leave at least one match position in `len` bins.
    pub fn validate(&self, len: usize) -> Result<()> {
        Self::new(self.window_size, self.max_search)?;
        if 2 * self.border_margin() >= len {
            return Err(Error::InvalidParams(format!(
                "border margin {} leaves no match positions in {len} bins",
                self.border_margin()
            )));
        }
        Ok(())
    }
}

/// Per-position integer displacement of one histogram against another.
#[derive(Debug, Clone, PartialEq)]
pub struct DisplacementProfile {
    pub positions: Vec<usize>,
    pub displacements: Vec<i64>,
    /// SAD at the selected displacement.
    pub costs: Vec<u64>,
    /// Position at which the fitted constant term is reported.
    pub reference: f64,
}

impl DisplacementProfile {
    /// Builds a profile whose reference point is the middle of the position
    /// span.
    pub fn new(positions: Vec<usize>, displacements: Vec<i64>, costs: Vec<u64>) -> Self {
        let reference = match (positions.first(), positions.last()) {
            (Some(&a), Some(&b)) => (a + b) as f64 / 2.0,
            _ => 0.0,
        };
        Self {
            positions,
            displacements,
            costs,
            reference,
        }
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearFlowFit {
    /// Constant term, evaluated at the profile's reference position.
    pub translation: f64,
    /// Slope: displacement change per bin.
    pub divergence: f64,
    pub residual_rms: f64,
}

fn check_pair(a: &EdgeHistogram, b: &EdgeHistogram) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch(a.len(), b.len()));
    }
    if a.axis != b.axis {
        return Err(Error::AxisMismatch(a.axis, b.axis));
    }
    Ok(())
}

#[inline]
fn sad(a: &[u64], b: &[u64]) -> u64 {
    a.iter().zip(b).map(|(&x, &y)| x.abs_diff(y)).sum()
}

/// Local sliding-window SAD matching at every interior bin.
///
/// The search for position `p` covers `predicted_shift ± max_search`, clamped
/// so both windows stay inside the histogram. Positions whose clamped range no
/// longer contains `predicted_shift` are skipped. Equal costs resolve to the
/// smallest `|d|`, then to the negative `d`.
pub fn match_local(
    prev: &EdgeHistogram,
    curr: &EdgeHistogram,
    params: &MatchParams,
    predicted_shift: i64,
) -> Result<DisplacementProfile> {
    check_pair(prev, curr)?;
    let len = curr.len();
    params.validate(len)?;

    let w = params.window_size;
    let half = params.half_window();
    let margin = params.border_margin();
    let search = params.max_search as i64;

    let mut positions = Vec::with_capacity(len - 2 * margin);
    let mut displacements = Vec::with_capacity(len - 2 * margin);
    let mut costs = Vec::with_capacity(len - 2 * margin);

    for p in margin..len - margin {
        let start = p - half;
        let lo = (predicted_shift - search).max(-(start as i64));
        let hi = (predicted_shift + search).min((len - start - w) as i64);
        if !(lo..=hi).contains(&predicted_shift) {
            continue;
        }
        let window = &curr.bins[start..start + w];
        let mut best = (u64::MAX, 0i64);
        for d in lo..=hi {
            let s = (start as i64 + d) as usize;
            let cost = sad(window, &prev.bins[s..s + w]);
            let (best_cost, best_d) = best;
            let better = cost < best_cost
                || (cost == best_cost
                    && (d.abs() < best_d.abs() || (d.abs() == best_d.abs() && d < best_d)));
            if better {
                best = (cost, d);
            }
        }
        positions.push(p);
        displacements.push(best.1);
        costs.push(best.0);
    }

    if positions.is_empty() {
        return Err(Error::EmptyProfile(len));
    }
    Ok(DisplacementProfile {
        positions,
        displacements,
        costs,
        reference: (len - 1) as f64 / 2.0,
    })
}

/// Whole-histogram stereo match.
///
/// Returns the `d` in `[0, max_disparity]` for which `right[i]` best matches
/// `left[i + d]`, scoring SAD over the overlap divided by the overlap length.
/// Ties go to the smaller disparity.
pub fn match_global(
    left: &EdgeHistogram,
    right: &EdgeHistogram,
    max_disparity: usize,
) -> Result<i64> {
    check_pair(left, right)?;
    let len = left.len();
    if max_disparity < 1 || max_disparity >= len {
        return Err(Error::InvalidParams(format!(
            "max_disparity {max_disparity} must lie in [1, {})",
            len
        )));
    }
    if left.is_flat() || right.is_flat() {
        return Err(Error::Textureless);
    }
    // compare sad_a / overlap_a against sad_b / overlap_b without division
    let mut best: Option<(u128, u128, usize)> = None;
    for d in 0..=max_disparity {
        let overlap = len - d;
        let cost = sad(&left.bins[d..], &right.bins[..overlap]) as u128;
        let better = match best {
            None => true,
            Some((c, o, _)) => cost * o < c * overlap as u128,
        };
        if better {
            best = Some((cost, overlap as u128, d));
        }
    }
    Ok(best.map(|(_, _, d)| d as i64).unwrap_or(0))
}

/// Ordinary least squares of displacement against position.
pub fn fit_linear(profile: &DisplacementProfile) -> Result<LinearFlowFit> {
    let n = profile.positions.len();
    if n < 2 || n != profile.displacements.len() {
        return Err(Error::DegenerateProfile);
    }
    let nf = n as f64;
    let mean_x = profile.positions.iter().map(|&p| p as f64).sum::<f64>() / nf;
    let mean_y = profile.displacements.iter().map(|&d| d as f64).sum::<f64>() / nf;
    let (mut sxx, mut sxy) = (0.0, 0.0);
    for (&p, &d) in profile.positions.iter().zip(&profile.displacements) {
        let dx = p as f64 - mean_x;
        sxx += dx * dx;
        sxy += dx * (d as f64 - mean_y);
    }
    if sxx == 0.0 {
        return Err(Error::DegenerateProfile);
    }
    let slope = sxy / sxx;
    let ssr: f64 = profile
        .positions
        .iter()
        .zip(&profile.displacements)
        .map(|(&p, &d)| {
            let r = d as f64 - (mean_y + slope * (p as f64 - mean_x));
            r * r
        })
        .sum();
    Ok(LinearFlowFit {
        translation: mean_y + slope * (profile.reference - mean_x),
        divergence: slope,
        residual_rms: (ssr / nf).sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::histograms::Axis;
    use proptest::prelude::*;

    fn hist(bins: Vec<u64>) -> EdgeHistogram {
        EdgeHistogram::new(Axis::Horizontal, bins, 0.0)
    }

    fn rich(len: usize, seed: u64) -> Vec<u64> {
        let mut x = seed | 1;
        (0..len)
            .map(|_| {
                x ^= x << 13;
                x ^= x >> 7;
                x ^= x << 17;
                x % 5000
            })
            .collect()
    }

    /// Recomputes every window SAD from scratch over every in-bounds candidate.
    fn brute_force(
        prev: &[u64],
        curr: &[u64],
        w: usize,
        ms: i64,
        ps: i64,
    ) -> Vec<(usize, i64, u64)> {
        let len = curr.len() as i64;
        let margin = (w / 2) as i64 + ms;
        let mut out = vec![];
        for p in margin..len - margin {
            let start = p - (w / 2) as i64;
            let mut cands = vec![];
            for d in (ps - ms)..=(ps + ms) {
                if start + d < 0 || start + d + w as i64 > len {
                    continue;
                }
                let mut cost = 0u64;
                for i in 0..w as i64 {
                    let a = curr[(start + i) as usize] as i64;
                    let b = prev[(start + d + i) as usize] as i64;
                    cost += (a - b).unsigned_abs();
                }
                cands.push((cost, d.abs(), d));
            }
            if !cands.iter().any(|c| c.2 == ps) {
                continue;
            }
            let best = cands.into_iter().min().unwrap();
            out.push((p as usize, best.2, best.0));
        }
        out
    }

    #[test]
    fn identity_match() {
        let h = hist(rich(128, 7));
        let prof = match_local(&h, &h, &MatchParams::default(), 0).unwrap();
        assert_eq!(prof.positions.first(), Some(&19));
        assert_eq!(prof.positions.last(), Some(&108));
        assert!(prof.displacements.iter().all(|&d| d == 0));
        assert!(prof.costs.iter().all(|&c| c == 0));
        assert_eq!(prof.reference, 63.5);
    }

    #[test]
    fn identity_match_with_offset_search() {
        let h = hist(rich(128, 11));
        let prof = match_local(&h, &h, &MatchParams::default(), 4).unwrap();
        assert!(!prof.is_empty());
        assert!(prof.displacements.iter().all(|&d| d == 0));
    }

    #[test]
    fn circular_shift_by_three() {
        let prev = rich(128, 3);
        let curr: Vec<u64> = (0..128).map(|i| prev[(i + 3) % 128]).collect();
        let prof = match_local(
            &hist(prev.clone()),
            &hist(curr.clone()),
            &MatchParams::default(),
            0,
        )
        .unwrap();
        let oracle = brute_force(&prev, &curr, 18, 10, 0);
        for (i, &p) in prof.positions.iter().enumerate() {
            assert_eq!((p, prof.displacements[i], prof.costs[i]), oracle[i]);
            // windows touching the wrap seam are excluded from the claim
            if p + 9 + 3 < 128 {
                assert_eq!(prof.displacements[i], 3, "position {p}");
                assert_eq!(prof.costs[i], 0);
            }
        }
    }

    #[test]
    fn ties_prefer_zero_then_negative() {
        // flat non-zero histogram: every candidate costs 0
        let h = hist(vec![5; 64]);
        let prof = match_local(&h, &h, &MatchParams::new(6, 4).unwrap(), 0).unwrap();
        assert!(prof.displacements.iter().all(|&d| d == 0));
        // zero outside the search range: |d| ties between -2 and +2 resolve to -2
        let prof = match_local(&h, &h, &MatchParams::new(6, 4).unwrap(), 6).unwrap();
        assert!(prof.displacements.iter().all(|&d| d == 2));
        let prof = match_local(&h, &h, &MatchParams::new(6, 4).unwrap(), -6).unwrap();
        assert!(prof.displacements.iter().all(|&d| d == -2));
        let periodic = hist((0..64).map(|i| (i % 2) as u64 * 9).collect());
        let prof = match_local(&periodic, &periodic, &MatchParams::new(4, 3).unwrap(), 1).unwrap();
        // candidates {-2..4}: zero cost at -2, 0, 2, 4 -> 0
        assert!(prof.displacements.iter().all(|&d| d == 0));
        let prof = match_local(&periodic, &periodic, &MatchParams::new(4, 3).unwrap(), 3).unwrap();
        // candidates {0..6}: -> 0
        assert!(prof.displacements.iter().all(|&d| d == 0));
        let prof = match_local(&periodic, &periodic, &MatchParams::new(4, 1).unwrap(), 3).unwrap();
        // candidates {2..4}: -> 2
        assert!(prof.displacements.iter().all(|&d| d == 2));
        // phase-shifted period-2 signal: d = -1 and d = +1 both cost 0
        let shifted = hist((0..64).map(|i| ((i + 1) % 2) as u64 * 9).collect());
        let prof = match_local(&periodic, &shifted, &MatchParams::new(4, 3).unwrap(), 0).unwrap();
        assert!(prof.displacements.iter().all(|&d| d == -1));
    }

    #[test]
    fn mismatched_inputs_rejected() {
        let a = hist(rich(128, 1));
        let b = hist(rich(64, 1));
        assert!(matches!(
            match_local(&a, &b, &MatchParams::default(), 0),
            Err(Error::LengthMismatch(128, 64))
        ));
        let v = EdgeHistogram::new(Axis::Vertical, rich(128, 1), 0.0);
        assert!(matches!(
            match_local(&a, &v, &MatchParams::default(), 0),
            Err(Error::AxisMismatch(..))
        ));
        let short = hist(rich(38, 1));
        assert!(matches!(
            match_local(&short, &short, &MatchParams::default(), 0),
            Err(Error::InvalidParams(_))
        ));
        assert!(MatchParams::new(0, 3).is_err());
        assert!(MatchParams::new(3, 0).is_err());
    }

    #[test]
    fn huge_predicted_shift_empties_profile() {
        let h = hist(rich(64, 5));
        assert!(matches!(
            match_local(&h, &h, &MatchParams::new(6, 2).unwrap(), 80),
            Err(Error::EmptyProfile(64))
        ));
        // a shift beyond max_search is passed through and clamped at the bounds
        let prof = match_local(&h, &h, &MatchParams::new(6, 2).unwrap(), 12).unwrap();
        assert!(prof.displacements.iter().all(|&d| (10..=14).contains(&d)));
    }

    #[test]
    fn global_match() {
        let left = rich(128, 99);
        assert_eq!(
            match_global(&hist(left.clone()), &hist(left.clone()), 30).unwrap(),
            0
        );
        let right: Vec<u64> = (0..128)
            .map(|i| if i + 7 < 128 { left[i + 7] } else { 0 })
            .collect();
        // exhaustive normalized SAD has a unique minimum at 7
        let scores: Vec<f64> = (0..=30)
            .map(|d| {
                let s: u64 = (0..128 - d).map(|i| left[i + d].abs_diff(right[i])).sum();
                s as f64 / (128 - d) as f64
            })
            .collect();
        let min = scores.iter().cloned().fold(f64::INFINITY, f64::min);
        assert_eq!(scores.iter().filter(|&&s| s == min).count(), 1);
        assert_eq!(scores[7], 0.0);
        assert_eq!(match_global(&hist(left), &hist(right), 30).unwrap(), 7);

        let zero = hist(vec![0; 128]);
        assert!(matches!(
            match_global(&zero, &zero, 30),
            Err(Error::Textureless)
        ));
        assert!(matches!(
            match_global(&zero, &hist(rich(64, 1)), 30),
            Err(Error::LengthMismatch(..))
        ));
    }

    #[test]
    fn fit_constant_and_line() {
        let positions: Vec<usize> = (19..109).collect();
        let prof = DisplacementProfile::new(positions.clone(), vec![2; 90], vec![0; 90]);
        let fit = fit_linear(&prof).unwrap();
        assert_eq!(fit.translation, 2.0);
        assert_eq!(fit.divergence, 0.0);
        assert_eq!(fit.residual_rms, 0.0);

        let positions: Vec<usize> = (0..11).map(|i| 20 + 8 * i).collect();
        let disp: Vec<i64> = (-5..=5).collect();
        let fit = fit_linear(&DisplacementProfile::new(positions, disp, vec![0; 11])).unwrap();
        assert!(fit.translation.abs() < 1e-12);
        assert!((fit.divergence - 10.0 / 80.0).abs() < 1e-12);
        assert!(fit.residual_rms < 1e-12);
    }

    #[test]
    fn fit_hand_solved() {
        // normal equations: mean x 50, mean y 1.5, Sxy 40, Sxx 2000
        // residuals 0.1, -0.3, 0.3, -0.1 -> rms sqrt(0.2 / 4)
        let prof = DisplacementProfile::new(vec![20, 40, 60, 80], vec![1, 1, 2, 2], vec![0; 4]);
        let fit = fit_linear(&prof).unwrap();
        assert!((fit.translation - 1.5).abs() < 1e-12);
        assert!((fit.divergence - 0.02).abs() < 1e-12);
        assert!((fit.residual_rms - 0.05f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn fit_rejects_degenerate() {
        let one = DisplacementProfile::new(vec![4], vec![1], vec![0]);
        assert!(matches!(fit_linear(&one), Err(Error::DegenerateProfile)));
        let same = DisplacementProfile::new(vec![4, 4, 4], vec![1, 2, 3], vec![0; 3]);
        assert!(matches!(fit_linear(&same), Err(Error::DegenerateProfile)));
    }

    fn solve_normal_equations(x: &[f64], y: &[f64]) -> (f64, f64) {
        // [n  Σx ] [a]   [Σy ]
        // [Σx Σx²] [b] = [Σxy]
        let n = x.len() as f64;
        let sx: f64 = x.iter().sum();
        let sxx: f64 = x.iter().map(|v| v * v).sum();
        let sy: f64 = y.iter().sum();
        let sxy: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
        let det = n * sxx - sx * sx;
        ((sxx * sy - sx * sxy) / det, (n * sxy - sx * sy) / det)
    }

    proptest! {
        #[test]
        fn local_match_equals_brute_force(
            seed in any::<u64>(),
            shift in -12i64..12,
            ps in -6i64..6,
            w in 1usize..20,
            ms in 1usize..11,
            coarse in any::<bool>(),
        ) {
            let len = 96;
            let mut prev = rich(len, seed);
            if coarse {
                // coarse values produce plenty of exact cost ties
                prev.iter_mut().for_each(|v| *v %= 3);
            }
            let curr: Vec<u64> = (0..len as i64)
                .map(|i| prev[(i + shift).rem_euclid(len as i64) as usize])
                .collect();
            let params = MatchParams::new(w, ms).unwrap();
            prop_assume!(params.validate(len).is_ok());
            let oracle = brute_force(&prev, &curr, w, ms as i64, ps);
            match match_local(&hist(prev.clone()), &hist(curr.clone()), &params, ps) {
                Ok(prof) => {
                    let got: Vec<_> = (0..prof.len())
                        .map(|i| (prof.positions[i], prof.displacements[i], prof.costs[i]))
                        .collect();
                    prop_assert_eq!(got, oracle);
                    prop_assert!(prof.positions.windows(2).all(|p| p[0] < p[1]));
                    for (i, &d) in prof.displacements.iter().enumerate() {
                        prop_assert!((d - ps).abs() <= ms as i64);
                        let s = prof.positions[i] - w / 2;
                        let identical = curr[s..s + w] == prev[(s as i64 + d) as usize..(s as i64 + d) as usize + w];
                        prop_assert_eq!(prof.costs[i] == 0, identical);
                    }
                }
                Err(Error::EmptyProfile(_)) => prop_assert!(oracle.is_empty()),
                Err(e) => return Err(TestCaseError::fail(e.to_string())),
            }
        }

        #[test]
        fn fit_agrees_with_normal_equations(
            pts in proptest::collection::btree_map(0usize..500, -10i64..10, 2..60)
        ) {
            let positions: Vec<usize> = pts.keys().cloned().collect();
            let disp: Vec<i64> = pts.values().cloned().collect();
            let prof = DisplacementProfile::new(positions.clone(), disp.clone(), vec![0; positions.len()]);
            let fit = fit_linear(&prof).unwrap();
            let x: Vec<f64> = positions.iter().map(|&p| p as f64).collect();
            let y: Vec<f64> = disp.iter().map(|&d| d as f64).collect();
            let (a, b) = solve_normal_equations(&x, &y);
            let at_ref = a + b * prof.reference;
            let tol = |v: f64| 1e-9 * v.abs().max(1.0);
            prop_assert!((fit.divergence - b).abs() <= tol(b));
            prop_assert!((fit.translation - at_ref).abs() <= tol(at_ref));
        }

        #[test]
        fn translation_roughly_antisymmetric(seed in any::<u64>(), k in -8i64..=8) {
            let len = 128usize;
            let base = rich(len + 40, seed);
            let a: Vec<u64> = (0..len).map(|i| base[i + 20]).collect();
            let b: Vec<u64> = (0..len).map(|i| base[(i as i64 + 20 + k) as usize]).collect();
            let p = MatchParams::default();
            let fwd = fit_linear(&match_local(&hist(a.clone()), &hist(b.clone()), &p, 0).unwrap()).unwrap();
            let bwd = fit_linear(&match_local(&hist(b), &hist(a), &p, 0).unwrap()).unwrap();
            prop_assert!((fwd.translation + bwd.translation).abs() <= 1.0);
        }
    }
}
