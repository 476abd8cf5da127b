//! Plug-in empirical distributions and discrete information measures.
//!
//! Joint tables over (subgroup, benefit) cells are built either from hard
//! benefit codes (count frequencies) or from per-row benefit probabilities
//! (average the rows into the cells of the group they belong to). Mutual
//! information and entropy are then evaluated directly on the table, in nats,
//! with the usual `0 log 0 = 0` convention.

use crate::{Error, Matrix, Result};

/// Tiny negative MI values produced by floating-point cancellation are
/// clamped to zero below this magnitude.
pub const MI_CLAMP: f64 = 1e-12;

/// Empirical joint distribution over (subgroup, benefit) cells with its
/// marginals.
#[derive(Debug, Clone)]
pub struct EmpiricalJoint {
    /// Row-major `num_groups x num_benefits` table; entries sum to 1.
    joint: Matrix,
    /// Group marginal (row sums).
    group_marginal: Vec<f64>,
    /// Benefit marginal (column sums).
    benefit_marginal: Vec<f64>,
    /// Number of rows the table was estimated from.
    samples: usize,
}

impl EmpiricalJoint {
    fn from_table(joint: Matrix, samples: usize) -> Self {
        let mut group_marginal = vec![0.0; joint.rows()];
        let mut benefit_marginal = vec![0.0; joint.cols()];
        for g in 0..joint.rows() {
            for b in 0..joint.cols() {
                let v = joint.get(g, b);
                group_marginal[g] += v;
                benefit_marginal[b] += v;
            }
        }
        EmpiricalJoint {
            joint,
            group_marginal,
            benefit_marginal,
            samples,
        }
    }

    pub fn num_groups(&self) -> usize {
        self.joint.rows()
    }

    pub fn num_benefits(&self) -> usize {
        self.joint.cols()
    }

    pub fn cell(&self, group: usize, benefit: usize) -> f64 {
        self.joint.get(group, benefit)
    }

    pub fn table(&self) -> &Matrix {
        &self.joint
    }

    pub fn group_marginal(&self) -> &[f64] {
        &self.group_marginal
    }

    pub fn benefit_marginal(&self) -> &[f64] {
        &self.benefit_marginal
    }

    pub fn samples(&self) -> usize {
        self.samples
    }

    /// Optional research aid: mix an epsilon floor into every cell and
    /// renormalize. Off by default everywhere; flooring biases the estimator.
    pub fn smoothed(&self, eps: f64) -> EmpiricalJoint {
        let cells = (self.num_groups() * self.num_benefits()) as f64;
        let mut joint = self.joint.clone();
        for v in joint.data_mut() {
            *v = (*v + eps) / (1.0 + eps * cells);
        }
        EmpiricalJoint::from_table(joint, self.samples)
    }
}

/// Count-based joint from hard benefit codes: cell (g, b) holds
/// `count(g, b) / rows`.
pub fn joint_hard(
    group_ids: &[usize],
    benefit: &[usize],
    num_groups: usize,
    num_benefit_values: usize,
) -> Result<EmpiricalJoint> {
    if group_ids.is_empty() {
        return Err(Error::EmptyData("no rows to estimate a joint from".into()));
    }
    if group_ids.len() != benefit.len() {
        return Err(Error::Shape(format!(
            "{} group ids vs {} benefit codes",
            group_ids.len(),
            benefit.len()
        )));
    }
    let mut joint = Matrix::zeros(num_groups, num_benefit_values);
    let weight = 1.0 / group_ids.len() as f64;
    for (&g, &b) in group_ids.iter().zip(benefit) {
        if g >= num_groups || b >= num_benefit_values {
            return Err(Error::Shape(format!(
                "code ({g}, {b}) outside a {num_groups}x{num_benefit_values} table"
            )));
        }
        joint.set(g, b, joint.get(g, b) + weight);
    }
    Ok(EmpiricalJoint::from_table(joint, group_ids.len()))
}

/// Soft joint from per-row benefit probabilities: cell (g, b) averages
/// `p_d(b)` over the rows d of group g, so the benefit marginal is the mean
/// probability row.
pub fn joint_soft(group_ids: &[usize], benefit_probs: &Matrix) -> Result<EmpiricalJoint> {
    if group_ids.is_empty() {
        return Err(Error::EmptyData("no rows to estimate a joint from".into()));
    }
    if group_ids.len() != benefit_probs.rows() {
        return Err(Error::Shape(format!(
            "{} group ids vs {} probability rows",
            group_ids.len(),
            benefit_probs.rows()
        )));
    }
    let num_groups = group_ids.iter().copied().max().unwrap() + 1;
    let mut joint = Matrix::zeros(num_groups, benefit_probs.cols());
    let weight = 1.0 / group_ids.len() as f64;
    for (d, &g) in group_ids.iter().enumerate() {
        let probs = benefit_probs.row(d);
        let mut sum = 0.0;
        for &p in probs {
            if !(0.0..=1.0 + 1e-9).contains(&p) {
                return Err(Error::Value {
                    row: d,
                    msg: format!("probability {p} outside [0, 1]"),
                });
            }
            sum += p;
        }
        if (sum - 1.0).abs() > 1e-6 {
            return Err(Error::Value {
                row: d,
                msg: format!("probability row sums to {sum}, expected 1"),
            });
        }
        for (b, &p) in probs.iter().enumerate() {
            joint.set(g, b, joint.get(g, b) + weight * p);
        }
    }
    Ok(EmpiricalJoint::from_table(joint, group_ids.len()))
}

/// Mutual information of the joint, in nats.
///
/// Cells with a zero joint entry or a zero marginal contribute nothing;
/// residual negatives within [`MI_CLAMP`] of zero are clamped.
pub fn mutual_information(j: &EmpiricalJoint) -> f64 {
    let mut mi = 0.0;
    for g in 0..j.num_groups() {
        let pg = j.group_marginal[g];
        if pg <= 0.0 {
            continue;
        }
        for b in 0..j.num_benefits() {
            let pb = j.benefit_marginal[b];
            let pgb = j.cell(g, b);
            if pgb > 0.0 && pb > 0.0 {
                mi += pgb * (pgb / (pg * pb)).ln();
            }
        }
    }
    if mi < 0.0 && mi > -MI_CLAMP {
        0.0
    } else {
        mi
    }
}

/// Shannon entropy of a marginal distribution, in nats.
pub fn entropy(marginal: &[f64]) -> f64 {
    marginal
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| -p * p.ln())
        .sum()
}

/// Mutual information between groups and a soft benefit, restricted to the
/// rows selected by `condition_mask`.
pub fn conditional_mi(
    group_ids: &[usize],
    benefit_probs: &Matrix,
    condition_mask: &[bool],
) -> Result<f64> {
    let selected: Vec<usize> = condition_mask
        .iter()
        .enumerate()
        .filter_map(|(i, &keep)| keep.then_some(i))
        .collect();
    if selected.is_empty() {
        return Err(Error::EmptyCondition(
            "condition mask selects no rows".into(),
        ));
    }
    let groups: Vec<usize> = selected.iter().map(|&i| group_ids[i]).collect();
    let probs = benefit_probs.select_rows(&selected);
    Ok(mutual_information(&joint_soft(&groups, &probs)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    const LN_2: f64 = std::f64::consts::LN_2;

    fn joint_from(rows: &[Vec<f64>]) -> EmpiricalJoint {
        EmpiricalJoint::from_table(Matrix::from_rows(rows).unwrap(), 1)
    }

    #[test]
    fn joint_hard_uniform_counts() {
        let j = joint_hard(&[0, 0, 1, 1], &[0, 1, 0, 1], 2, 2).unwrap();
        for g in 0..2 {
            for b in 0..2 {
                assert_eq!(j.cell(g, b), 0.25);
            }
        }
        assert_eq!(j.group_marginal(), &[0.5, 0.5]);
        assert_eq!(j.benefit_marginal(), &[0.5, 0.5]);
    }

    #[test]
    fn joint_hard_single_cell() {
        let j = joint_hard(&[0, 0], &[0, 0], 1, 2).unwrap();
        assert_eq!(j.cell(0, 0), 1.0);
        assert_eq!(j.cell(0, 1), 0.0);
        assert_eq!(j.group_marginal(), &[1.0]);
        assert_eq!(j.benefit_marginal(), &[1.0, 0.0]);
    }

    #[test]
    fn joint_hard_rejects_empty() {
        assert!(matches!(
            joint_hard(&[], &[], 1, 2),
            Err(Error::EmptyData(_))
        ));
    }

    #[test]
    fn joint_hard_sampled_table_tracks_source() {
        // Sample 1000 rows from a fixed 2x3 joint and compare tallies.
        use rand::{Rng, SeedableRng};
        let source = [[0.25, 0.10, 0.15], [0.05, 0.30, 0.15]];
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let mut groups = Vec::new();
        let mut benefits = Vec::new();
        for _ in 0..1000 {
            let mut u: f64 = rng.random();
            'cell: for (g, row) in source.iter().enumerate() {
                for (b, &p) in row.iter().enumerate() {
                    if u < p {
                        groups.push(g);
                        benefits.push(b);
                        break 'cell;
                    }
                    u -= p;
                }
            }
        }
        let j = joint_hard(&groups, &benefits, 2, 3).unwrap();
        let mut max_dev: f64 = 0.0;
        for g in 0..2 {
            for b in 0..3 {
                max_dev = max_dev.max((j.cell(g, b) - source[g][b]).abs());
            }
        }
        assert!(max_dev < 0.05, "max cell deviation {max_dev}");
    }

    #[test]
    fn joint_soft_matches_hard_on_one_hot() {
        let groups = [0usize, 1, 0, 1, 1];
        let codes = [1usize, 0, 0, 1, 1];
        let mut probs = Matrix::zeros(5, 2);
        for (d, &c) in codes.iter().enumerate() {
            probs.set(d, c, 1.0);
        }
        let soft = joint_soft(&groups, &probs).unwrap();
        let hard = joint_hard(&groups, &codes, 2, 2).unwrap();
        assert_eq!(soft.table().data(), hard.table().data());
    }

    #[test]
    fn joint_soft_two_half_rows() {
        let probs = Matrix::from_rows(&[vec![0.5, 0.5], vec![0.5, 0.5]]).unwrap();
        let j = joint_soft(&[0, 1], &probs).unwrap();
        for g in 0..2 {
            for b in 0..2 {
                assert!((j.cell(g, b) - 0.25).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn joint_soft_marginals_resum() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let mut rows = Vec::new();
        let mut groups = Vec::new();
        for d in 0..50 {
            let a: f64 = rng.random();
            let b: f64 = rng.random();
            let c: f64 = rng.random();
            let s = a + b + c;
            rows.push(vec![a / s, b / s, c / s]);
            groups.push(d % 3);
        }
        let probs = Matrix::from_rows(&rows).unwrap();
        let j = joint_soft(&groups, &probs).unwrap();
        // Recompute both marginals by independent summation.
        for g in 0..j.num_groups() {
            let row_sum: f64 = (0..j.num_benefits()).map(|b| j.cell(g, b)).sum();
            assert!((row_sum - j.group_marginal()[g]).abs() < 1e-12);
        }
        for b in 0..j.num_benefits() {
            let col_sum: f64 = (0..j.num_groups()).map(|g| j.cell(g, b)).sum();
            assert!((col_sum - j.benefit_marginal()[b]).abs() < 1e-12);
        }
        let total: f64 = j.table().data().iter().sum();
        assert!((total - 1.0).abs() < 1e-9);
    }

    #[test]
    fn joint_soft_names_malformed_row() {
        let probs = Matrix::from_rows(&[vec![0.5, 0.5], vec![0.9, 0.3]]).unwrap();
        match joint_soft(&[0, 1], &probs) {
            Err(Error::Value { row, .. }) => assert_eq!(row, 1),
            other => panic!("expected value error, got {other:?}"),
        }
    }

    #[test]
    fn mi_of_independent_uniform_is_zero() {
        let j = joint_from(&[vec![0.25, 0.25], vec![0.25, 0.25]]);
        assert_eq!(mutual_information(&j), 0.0);
    }

    #[test]
    fn mi_of_deterministic_bijection_is_ln2() {
        let j = joint_from(&[vec![0.5, 0.0], vec![0.0, 0.5]]);
        assert!((mutual_information(&j) - LN_2).abs() < 1e-15);
    }

    #[test]
    fn mi_of_diagonal_dominant_table() {
        let j = joint_from(&[vec![0.4, 0.1], vec![0.1, 0.4]]);
        assert!((mutual_information(&j) - 0.19274475702175753).abs() < 1e-12);
    }

    #[test]
    fn entropy_examples() {
        assert_eq!(entropy(&[1.0, 0.0]), 0.0);
        assert!((entropy(&[0.5, 0.5]) - LN_2).abs() < 1e-15);
        assert!((entropy(&[0.7, 0.2, 0.1]) - 0.8018185525433372).abs() < 1e-12);
    }

    #[test]
    fn conditional_mi_full_mask_is_unconditional() {
        let probs =
            Matrix::from_rows(&[vec![0.9, 0.1], vec![0.2, 0.8], vec![0.6, 0.4]]).unwrap();
        let groups = [0usize, 1, 0];
        let full = conditional_mi(&groups, &probs, &[true, true, true]).unwrap();
        let direct = mutual_information(&joint_soft(&groups, &probs).unwrap());
        assert!((full - direct).abs() < 1e-15);
    }

    #[test]
    fn conditional_mi_single_group_is_zero() {
        let probs = Matrix::from_rows(&[vec![0.9, 0.1], vec![0.2, 0.8]]).unwrap();
        let v = conditional_mi(&[0, 0], &probs, &[true, true]).unwrap();
        assert_eq!(v, 0.0);
    }

    #[test]
    fn conditional_mi_rejects_empty_selection() {
        let probs = Matrix::from_rows(&[vec![1.0, 0.0]]).unwrap();
        assert!(matches!(
            conditional_mi(&[0], &probs, &[false]),
            Err(Error::EmptyCondition(_))
        ));
    }

    #[test]
    fn smoothing_keeps_table_normalized() {
        let j = joint_from(&[vec![0.5, 0.0], vec![0.0, 0.5]]).smoothed(1e-3);
        let total: f64 = j.table().data().iter().sum();
        assert!((total - 1.0).abs() < 1e-12);
        assert!(j.table().data().iter().all(|&v| v > 0.0));
    }
}
