//! Structural properties of the DAG analyses, checked against brute force
//! over seeded random graphs.

mod support;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use smws_core::workflow::{critical_path, detect_pipelines};
use smws_core::InstanceCatalog;
use support::{all_paths, path_weight, random_dag};

#[test]
fn critical_path_dominates_every_path() {
    let catalog = InstanceCatalog::default_catalog();
    let mut rng = ChaCha8Rng::seed_from_u64(0xC0FFEE);
    for _ in 0..300 {
        let dag = random_dag(&mut rng, 10);
        let cp = critical_path(&dag, &catalog);
        let cp_weight = path_weight(&dag, &catalog, &cp);
        for path in all_paths(&dag) {
            let w = path_weight(&dag, &catalog, &path);
            assert!(
                cp_weight >= w - 1e-9,
                "path {:?} (weight {w}) beats the critical path {:?} ({cp_weight})",
                path,
                cp
            );
        }
    }
}

#[test]
fn levels_match_longest_hop_counts() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xBEEF);
    for _ in 0..200 {
        let dag = random_dag(&mut rng, 10);
        let levels = dag.levels();
        for e in dag.edges() {
            assert!(levels[e.to] > levels[e.from]);
        }
        // Longest chain of predecessors equals the level.
        for path in all_paths(&dag) {
            for (depth, &ix) in path.iter().enumerate() {
                assert!(levels[ix] as usize > depth);
            }
        }
    }
}

#[test]
fn width_profile_is_consistent_with_levels() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xFEED);
    for _ in 0..200 {
        let dag = random_dag(&mut rng, 10);
        let profile = dag.width_profile();
        assert_eq!(profile.per_level.iter().sum::<usize>(), dag.task_count());
        assert!(profile.max_width >= 1);
        assert!(profile.avg_width <= profile.max_width as f64 + 1e-12);
        assert_eq!(
            profile.max_width,
            profile.per_level.iter().copied().max().unwrap()
        );
    }
}

#[test]
fn pipeline_subgroups_partition_and_respect_capacity() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xABCD);
    for _ in 0..300 {
        let dag = random_dag(&mut rng, 10);
        for group in detect_pipelines(&dag) {
            let mut seen = vec![false; group.pipelines.len()];
            for sg in &group.subgroups {
                assert!(group.subgroup_length_mi(sg) <= group.longest_mi + 1e-9);
                for &p in sg {
                    assert!(!seen[p], "pipeline in two subgroups");
                    seen[p] = true;
                }
            }
            assert!(seen.iter().all(|&s| s), "pipeline missing from subgroups");
            // The longest pipeline sits alone.
            let longest_sg = group
                .subgroups
                .iter()
                .find(|sg| {
                    sg.iter()
                        .any(|&p| group.pipelines[p].length_mi == group.longest_mi)
                })
                .unwrap();
            assert_eq!(longest_sg.len(), 1);
            // Body tasks really are interior chain links.
            for p in &group.pipelines {
                for &t in &p.body {
                    assert_eq!(dag.in_degree(t), 1);
                    assert_eq!(dag.out_degree(t), 1);
                }
                assert!(dag.out_degree(p.source) > 1);
            }
        }
    }
}
