use serde::Serialize;

/// Lower bound on the number of intensity measurements an injective complex
/// ensemble in `C^M` needs, with `alpha(M - 1)` the binary popcount of `M - 1`.
/// Returns 0 for `M = 0`.
pub fn hmw_lower_bound(m: usize) -> usize {
    if m == 0 {
        return 0;
    }
    let alpha = (m - 1).count_ones() as usize;
    let base = 4 * m - 2 * alpha;
    let offset = match (m % 2 == 1, alpha % 4) {
        (true, 2) => 2,
        (true, 3) => 1,
        _ => 3,
    };
    base - offset
}

/// Whether `4M - 4` generic measurements are known to suffice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ConjectureStatus {
    Proven,
    Conjectured,
}

pub fn conjecture_status(m: usize) -> ConjectureStatus {
    if matches!(m, 2 | 3) {
        ConjectureStatus::Proven
    } else {
        ConjectureStatus::Conjectured
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_dimensions() {
        assert_eq!(hmw_lower_bound(1), 1);
        assert_eq!(hmw_lower_bound(2), 3);
        assert_eq!(hmw_lower_bound(3), 7);
        assert_eq!(hmw_lower_bound(4), 9);
    }

    #[test]
    fn odd_refinements() {
        // M = 7: alpha(6) = 2, odd branch gives 28 - 4 - 2
        assert_eq!(hmw_lower_bound(7), 22);
        // M = 15: alpha(14) = 3, odd branch gives 60 - 6 - 1
        assert_eq!(hmw_lower_bound(15), 53);
        // M = 8 is even: alpha(7) = 3 but the general branch applies
        assert_eq!(hmw_lower_bound(8), 32 - 6 - 3);
        // M = 5: alpha(4) = 1
        assert_eq!(hmw_lower_bound(5), 15);
    }

    #[test]
    fn never_exceeds_upper_construction() {
        for m in 1..200 {
            assert!(hmw_lower_bound(m) <= 4 * m - 2, "M = {m}");
        }
    }

    #[test]
    fn status() {
        assert_eq!(conjecture_status(2), ConjectureStatus::Proven);
        assert_eq!(conjecture_status(3), ConjectureStatus::Proven);
        assert_eq!(conjecture_status(4), ConjectureStatus::Conjectured);
        assert_eq!(conjecture_status(1), ConjectureStatus::Conjectured);
    }
}
