use std::collections::HashMap;
use std::sync::OnceLock;

use proptest::prelude::*;
use rug::ops::Pow;
use rug::{Complete, Float, Integer};

use explog::engine::{build, CountTable, Mode, ResourceBudget};
use explog::stats::summarize;
use explog::{Statistic, Structure};

const N: u32 = 300;

type Key = (Structure, Statistic, bool);

/// Exact and normalized tables for every recursive structure, built once.
fn tables() -> &'static HashMap<Key, CountTable> {
    static TABLES: OnceLock<HashMap<Key, CountTable>> = OnceLock::new();
    TABLES.get_or_init(|| {
        let mut out = HashMap::new();
        for st in Structure::RECURSIVE {
            for stat in [Statistic::Largest, Statistic::Smallest] {
                for exact in [true, false] {
                    let mode = if exact { Mode::Exact } else { Mode::Normalized { precision: 192 } };
                    let t = build(stat, st, N, mode, ResourceBudget::default()).unwrap();
                    out.insert((st, stat, exact), t);
                }
            }
        }
        out
    })
}

fn table(st: Structure, stat: Statistic) -> &'static CountTable {
    &tables()[&(st, stat, true)]
}

fn structure() -> impl Strategy<Value = Structure> {
    proptest::sample::select(Structure::RECURSIVE.to_vec())
}

fn least_size(st: Structure) -> u32 {
    (1..).find(|&k| st.connected_count(k).unwrap() > 0).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn largest_and_smallest_rows_have_equal_sums(st in structure(), n in 1..=N) {
        prop_assert_eq!(
            table(st, Statistic::Largest).exact_row_sum(n),
            table(st, Statistic::Smallest).exact_row_sum(n)
        );
    }

    #[test]
    fn diagonal_is_connected_count(st in structure(), n in 1..=N) {
        let c = st.connected_count(n).unwrap();
        prop_assert_eq!(table(st, Statistic::Largest).exact_entry(n, n).unwrap(), c.clone());
        prop_assert_eq!(table(st, Statistic::Smallest).exact_entry(n, n).unwrap(), c);
    }

    #[test]
    fn entries_vanish_below_the_least_component(st in structure(), n in 1..=N) {
        let least = least_size(st);
        let l = table(st, Statistic::Largest);
        let s = table(st, Statistic::Smallest);
        for k in 1..least.min(n + 1) {
            prop_assert_eq!(l.exact_entry(k, n).unwrap(), 0);
            prop_assert_eq!(s.exact_entry(k, n).unwrap(), 0);
        }
    }

    #[test]
    fn normalized_matches_exact(st in structure(), n in 1..=N, largest in any::<bool>()) {
        let stat = if largest { Statistic::Largest } else { Statistic::Smallest };
        let exact = tables()[&(st, stat, true)].normalized_row(n, 192);
        let norm = tables()[&(st, stat, false)].normalized_row(n, 192);
        for (x, y) in exact.iter().zip(&norm) {
            if x.is_zero() {
                prop_assert!(y.is_zero());
            } else {
                let rel = Float::with_val(192, x - y).abs() / x;
                prop_assert!(rel <= 1e-25, "relative error {}", rel.to_f64());
            }
        }
    }

    #[test]
    fn smallest_median_is_one_when_singletons_exist(st in structure(), n in 6..=N) {
        let Some(row) = summarize(table(st, Statistic::Smallest), n).unwrap().stats else {
            return Ok(());
        };
        if st.connected_count(1).unwrap() > 0 {
            prop_assert_eq!(row.median, 1);
        } else {
            prop_assert!(row.median >= least_size(st));
        }
    }

    #[test]
    fn scaled_means_are_bounded(st in structure(), n in 1..=N) {
        for stat in [Statistic::Largest, Statistic::Smallest] {
            if let Some(row) = summarize(table(st, stat), n).unwrap().stats {
                prop_assert!(row.mean >= 1 && row.mean <= n);
                prop_assert!(row.variance >= 0);
                prop_assert!(row.median >= 1 && row.median <= n);
                prop_assert!(row.tail_median < row.median || row.tail_median == row.median);
            }
        }
    }
}

#[test]
fn colored_permutations_sum_to_successor_factorial() {
    let l = table(Structure::ColoredPerms, Statistic::Largest);
    for n in 1..=N {
        assert_eq!(*l.exact_row_sum(n).unwrap(), Integer::factorial(n + 1).complete(), "n = {n}");
    }
}

#[test]
fn even_cycle_permutations_vanish_at_odd_n() {
    for stat in [Statistic::Largest, Statistic::Smallest] {
        let t = table(Structure::EvPerms, stat);
        for n in (1..=N).step_by(2) {
            assert_eq!(*t.exact_row_sum(n).unwrap(), 0, "n = {n}");
            assert!(summarize(t, n).unwrap().stats.is_none());
        }
    }
}

#[test]
fn odd_cycle_permutations_have_one_all_fixed_point_object() {
    let l = table(Structure::OdPerms, Statistic::Largest);
    for n in 1..=N {
        assert_eq!(l.exact_entry(1, n).unwrap(), 1, "n = {n}");
    }
}

#[test]
fn singleton_free_structures_have_larger_smallest_medians() {
    // with no components of size 1 the smallest-component median exceeds 1
    for st in [Structure::Rounds, Structure::RoundsVariant, Structure::ColoredDerangements, Structure::EvPerms] {
        let row = summarize(table(st, Statistic::Smallest), 300).unwrap().stats.unwrap();
        assert!(row.median > 1, "{st}");
    }
}

#[test]
fn derangements_are_permutations_without_singletons() {
    // inclusion-exclusion on the 2 colored fixed points
    let perms = table(Structure::ColoredPerms, Statistic::Largest);
    let der = table(Structure::ColoredDerangements, Statistic::Largest);
    for n in 1..=40u32 {
        let mut total = Integer::new();
        for j in 0..=n {
            let rest = if j == n {
                Integer::from(1)
            } else {
                perms.exact_row_sum(n - j).unwrap().clone()
            };
            let term = Integer::binomial_u(n, j).complete() * Integer::from(2).pow(j) * rest;
            if j % 2 == 0 {
                total += term;
            } else {
                total -= term;
            }
        }
        assert_eq!(&total, der.exact_row_sum(n).unwrap(), "n = {n}");
    }
}
