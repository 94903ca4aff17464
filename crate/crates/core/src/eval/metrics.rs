//! Result-list comparison metrics.

use crate::query::SearchResult;

/// Fragment start when the fragment is shorter than `lrd`, otherwise `-1`.
pub fn ep(record: &SearchResult, lrd: u32) -> i64 {
    if record.l < lrd {
        i64::from(record.p)
    } else {
        -1
    }
}

/// Records are equal when they share the document and the `ep` class.
pub fn records_equal(a: &SearchResult, b: &SearchResult, lrd: u32) -> bool {
    a.doc == b.doc && ep(a, lrd) == ep(b, lrd)
}

/// Unit-cost edit distance under [`records_equal`].
pub fn levenshtein(ideal: &[SearchResult], instance: &[SearchResult], lrd: u32) -> usize {
    let mut prev: Vec<usize> = (0..=instance.len()).collect();
    let mut cur = vec![0; instance.len() + 1];
    for (i, a) in ideal.iter().enumerate() {
        cur[0] = i + 1;
        for (j, b) in instance.iter().enumerate() {
            let sub = prev[j] + usize::from(!records_equal(a, b, lrd));
            cur[j + 1] = sub.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[instance.len()]
}

/// For each instance record, the index of the first not yet consumed equal
/// ideal record.
fn match_records(ideal: &[SearchResult], instance: &[SearchResult], lrd: u32) -> Vec<Option<usize>> {
    let mut used = vec![false; ideal.len()];
    instance
        .iter()
        .map(|x| {
            let hit = ideal
                .iter()
                .enumerate()
                .position(|(i, y)| !used[i] && records_equal(x, y, lrd))?;
            used[hit] = true;
            Some(hit)
        })
        .collect()
}

/// `|Ideal_N ∩ Instance_N| / |Instance_N|` with multiset intersection. Two
/// empty lists agree perfectly; an empty instance against a non-empty ideal
/// scores 0.
pub fn precision_at(ideal: &[SearchResult], instance: &[SearchResult], n: usize, lrd: u32) -> f64 {
    let ideal = &ideal[..n.min(ideal.len())];
    let instance = &instance[..n.min(instance.len())];
    if instance.is_empty() {
        return if ideal.is_empty() { 1.0 } else { 0.0 };
    }
    let hits = match_records(ideal, instance, lrd).iter().filter(|m| m.is_some()).count();
    hits as f64 / instance.len() as f64
}

fn gain(rel: f64, rank0: usize) -> f64 {
    (rel.exp2() - 1.0) / ((rank0 + 2) as f64).log2()
}

/// NDCG@N with gains `2^Rel - 1`, where `Rel` of an instance record is the
/// score of its matching record in the full ideal list (0 when unmatched).
pub fn ndcg_at(ideal: &[SearchResult], instance: &[SearchResult], n: usize, lrd: u32) -> f64 {
    let instance = &instance[..n.min(instance.len())];
    let idcg: f64 = ideal.iter().take(n).enumerate().map(|(i, y)| gain(y.r, i)).sum();
    if idcg == 0.0 {
        return if instance.is_empty() { 1.0 } else { 0.0 };
    }
    let dcg: f64 = match_records(ideal, instance, lrd)
        .into_iter()
        .enumerate()
        .map(|(i, m)| m.map_or(0.0, |j| gain(ideal[j].r, i)))
        .sum();
    dcg / idcg
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::DocId;
    use crate::query::FAR;
    use proptest::prelude::*;

    const EPS: f64 = 1e-12;

    fn rec(doc: u32, p: u32, l: u32, r: f64) -> SearchResult {
        SearchResult { doc: DocId(doc), p, l, r, boundary: None }
    }

    fn list(n: u32, offset: u32) -> Vec<SearchResult> {
        (0..n).map(|i| rec(i + offset, i, 2, f64::from(n - i))).collect()
    }

    #[test]
    fn ep_examples() {
        assert_eq!(ep(&rec(0, 100, 49, 0.0), 50), 100);
        assert_eq!(ep(&rec(0, 100, 50, 0.0), 50), -1);
        assert_eq!(ep(&SearchResult::far(DocId(0)), 50), -1);
        assert_eq!(ep(&rec(0, 3, FAR, 0.0), FAR), -1);
        assert_eq!(ep(&rec(0, 3, 49, 0.0), 49), -1);
    }

    #[test]
    fn levenshtein_examples() {
        let a = list(10, 0);
        assert_eq!(levenshtein(&a, &a, 50), 0);
        assert_eq!(levenshtein(&a, &list(10, 100), 50), 10);
        let mut b = a.clone();
        b[4] = rec(77, 0, 2, 1.0);
        assert_eq!(levenshtein(&a, &b, 50), 1);
        assert_eq!(levenshtein(&a, &[], 50), 10);
        assert_eq!(levenshtein(&[], &a[..3], 50), 3);
    }

    #[test]
    fn precision_examples() {
        let a = list(10, 0);
        assert_eq!(precision_at(&a, &a, 10, 50), 1.0);
        let mut b = a.clone();
        for r in b.iter_mut().take(3) {
            r.doc = DocId(r.doc.0 + 1000);
        }
        assert!((precision_at(&a, &b, 10, 50) - 0.7).abs() < EPS);
        assert_eq!(precision_at(&a, &list(10, 100), 10, 50), 0.0);
        assert_eq!(precision_at(&a, &[], 10, 50), 0.0);
        assert_eq!(precision_at(&[], &[], 10, 50), 1.0);
    }

    #[test]
    fn precision_counts_duplicates_once() {
        let ideal = vec![rec(1, 0, 2, 1.0)];
        let instance = vec![rec(1, 0, 2, 1.0), rec(1, 0, 3, 1.0)];
        assert!((precision_at(&ideal, &instance, 10, 50) - 0.5).abs() < EPS);
    }

    #[test]
    fn ndcg_examples() {
        let a = list(10, 0);
        assert!((ndcg_at(&a, &a, 10, 50) - 1.0).abs() < EPS);
        assert_eq!(ndcg_at(&a, &list(10, 100), 10, 50), 0.0);
        let ideal = vec![rec(0, 0, 2, 3.0), rec(1, 0, 2, 2.0), rec(2, 0, 2, 1.0)];
        let swapped = vec![ideal[1], ideal[0], ideal[2]];
        let dcg = 3.0 / 1.0 + 7.0 / 3f64.log2() + 1.0 / 2.0;
        let idcg = 7.0 / 1.0 + 3.0 / 3f64.log2() + 1.0 / 2.0;
        assert!((ndcg_at(&ideal, &swapped, 3, 50) - dcg / idcg).abs() < EPS);
        assert_eq!(ndcg_at(&[], &[], 10, 50), 1.0);
        assert_eq!(ndcg_at(&[], &a, 10, 50), 0.0);
    }

    fn records() -> impl Strategy<Value = Vec<SearchResult>> {
        proptest::collection::vec((0u32..6, 0u32..4, 1u32..80, 0.0f64..4.0), 0..12)
            .prop_map(|v| v.into_iter().map(|(d, p, l, r)| rec(d, p, l, r)).collect())
    }

    proptest! {
        #[test]
        fn levenshtein_is_a_metric(a in records(), b in records(), c in records()) {
            prop_assert_eq!(levenshtein(&a, &a, 50), 0);
            prop_assert_eq!(levenshtein(&a, &b, 50), levenshtein(&b, &a, 50));
            prop_assert!(levenshtein(&a, &c, 50) <= levenshtein(&a, &b, 50) + levenshtein(&b, &c, 50));
        }

        #[test]
        fn metrics_are_bounded(a in records(), b in records(), n in 1usize..15) {
            let mut ideal = a.clone();
            ideal.sort_by(|x, y| y.r.total_cmp(&x.r));
            let p = precision_at(&ideal, &b, n, 50);
            let g = ndcg_at(&ideal, &b, n, 50);
            prop_assert!((0.0..=1.0).contains(&p));
            prop_assert!((0.0..=1.0 + 1e-12).contains(&g));
        }

        #[test]
        fn equal_record_replacement_is_invisible(a in records(), b in records(), i in 0usize..12) {
            prop_assume!(!b.is_empty());
            let mut ideal = a.clone();
            ideal.sort_by(|x, y| y.r.total_cmp(&x.r));
            let mut c = b.clone();
            let k = i % c.len();
            // Same document and EP class: a long fragment moved elsewhere.
            if c[k].l >= 50 {
                c[k].p += 7;
                c[k].l += 3;
            }
            prop_assert_eq!(precision_at(&ideal, &b, 10, 50), precision_at(&ideal, &c, 10, 50));
            prop_assert_eq!(ndcg_at(&ideal, &b, 10, 50), ndcg_at(&ideal, &c, 10, 50));
        }

        #[test]
        fn unmatched_replacement_never_raises_precision(a in records(), b in records(), i in 0usize..12) {
            prop_assume!(!b.is_empty());
            let k = i % b.len();
            let mut worse = b.clone();
            worse[k] = rec(999, 0, 1, 0.0);
            prop_assert!(precision_at(&a, &worse, 10, 50) <= precision_at(&a, &b, 10, 50));
        }

        #[test]
        fn ideal_against_itself_is_perfect(a in records(), n in 1usize..15) {
            let mut ideal: Vec<SearchResult> = a.into_iter().map(|mut r| { r.r += 0.5; r }).collect();
            ideal.sort_by(|x, y| y.r.total_cmp(&x.r));
            prop_assert!((ndcg_at(&ideal, &ideal, n, 50) - 1.0).abs() < 1e-12);
        }
    }
}
