//! End-to-end runs of both pipelines against small in-memory corpora.

use std::collections::{BTreeMap, BTreeSet};

use morphkit_core::affixes::{build_inventory, segment, AffixInventory, AffixParams, Segmentation};
use morphkit_core::cascade::{
    load_cascade, save_cascade, train_cascade, Cascade, Property,
};
use morphkit_core::classify::{DecisionTree, TreeNode, TreeParams};
use morphkit_core::cluster_stats::{build_analysis_report, load_cluster_origins};
use morphkit_core::clustering::{
    build_context_vectors, initial_clusters, merge_clusters, read_clusters, write_clusters,
    ClusterParams,
};
use morphkit_core::evaluation::{evaluate, evaluate_split, EvalReport};
use morphkit_core::lexicon::{
    corpus_tokens, load_cluster_evals, load_corpus, load_labelled_lexicon, split_dataset,
};

const PARADIGM: [&str; 12] = [
    "neżamina", "teżamina", "jeżamina", "neżaminaw", "teżaminaw", "jeżaminaw",
    "nigdeb", "tigdeb", "jigdeb", "nigdbu", "tigdbu", "jigdbu",
];

#[test]
fn unsupervised_pipeline_clusters_a_raw_corpus() {
    let text = PARADIGM.join(" ");
    let entries = load_corpus(text.as_bytes()).unwrap();
    assert_eq!(entries.len(), 12);

    let inventory = build_inventory(&entries, &AffixParams::default()).unwrap();
    let prefix_texts: Vec<&str> =
        inventory.prefixes.iter().map(|c| c.text.as_str()).take(3).collect();
    assert_eq!(prefix_texts, vec!["j", "n", "t"]);

    let segs: Vec<Segmentation> =
        entries.iter().map(|e| segment(&e.surface, &inventory).unwrap()).collect();
    for s in &segs {
        let rebuilt = format!("{}{}{}", s.prefixes.concat(), s.stem, s.suffixes.concat());
        assert_eq!(rebuilt, s.surface);
    }

    let clusters = initial_clusters(&segs);
    assert!(!clusters.is_empty());
    let member_count: usize = clusters.iter().map(|c| c.members.len()).sum();
    assert_eq!(member_count, 12, "initial clusters partition the vocabulary");
    for c in clusters.iter() {
        for m in &c.members {
            let seg = segs.iter().find(|s| s.surface == *m).unwrap();
            assert!(c.stem_keys.contains(&seg.stem), "members share the cluster stem");
        }
    }

    let tokens = corpus_tokens(text.as_bytes()).unwrap();
    let vocab: BTreeSet<String> = entries.iter().map(|e| e.surface.clone()).collect();
    let vectors = build_context_vectors(&tokens, &vocab, 3).unwrap();
    let merged = merge_clusters(&clusters, &vectors, &ClusterParams::default()).unwrap();
    assert_eq!(merged.all_members(), clusters.all_members());

    let mut buf = Vec::new();
    write_clusters(&merged, &mut buf).unwrap();
    let reloaded = read_clusters(&buf[..]).unwrap();
    assert_eq!(reloaded.len(), merged.len());

    // expert evaluations against the stored clusters
    let mut ids: Vec<&str> = merged.iter().map(|c| c.id.as_str()).collect();
    ids.sort_unstable();
    let first = merged.get(ids[0]).unwrap();
    let second = merged.get(ids[1 % ids.len()]).unwrap();
    let removed = first.members.iter().next().unwrap();
    let eval_csv = format!(
        "cluster_id,expert_id,quality,removed_words\n{},e1,good,{}\n{},e1,very_good,\n{},e2,medium,\n",
        first.id, removed, second.id, first.id,
    );
    let records = load_cluster_evals(eval_csv.as_bytes(), &merged).unwrap();
    assert_eq!(records.len(), 3);
    assert_eq!(records[0].removed_words.len(), 1);

    let bad_id = "cluster_id,expert_id,quality,removed_words\ncffffffffffffffff0,e1,good,\n";
    assert!(load_cluster_evals(bad_id.as_bytes(), &merged).is_err());
    let bad_word = format!(
        "cluster_id,expert_id,quality,removed_words\n{},e1,good,zelda\n",
        first.id
    );
    assert!(load_cluster_evals(bad_word.as_bytes(), &merged).is_err());
    let bad_quality = format!(
        "cluster_id,expert_id,quality,removed_words\n{},e1,great,\n",
        first.id
    );
    assert!(load_cluster_evals(bad_quality.as_bytes(), &merged).is_err());

    let mut origins_csv = String::from("cluster_id,origin\n");
    for c in merged.iter() {
        let origin = if c.stem_keys.iter().any(|s| s.contains("żamina")) {
            "concatenative"
        } else {
            "non_concatenative"
        };
        origins_csv.push_str(&format!("{},{origin}\n", c.id));
    }
    let origins = load_cluster_origins(origins_csv.as_bytes(), &merged).unwrap();
    assert_eq!(origins.len(), merged.len());

    let report = build_analysis_report(&merged, &records, &origins).unwrap();
    assert_eq!(report.size.con_total() + report.size.nc_total(), merged.len() as u64);
    assert_eq!(report.removal.con_total() + report.removal.nc_total(), 3);
    assert_eq!(report.quality.con_total() + report.quality.nc_total(), 3);
    assert_eq!(report.to_csv(), build_analysis_report(&merged, &records, &origins).unwrap().to_csv());
}

fn paradigm_lexicon() -> String {
    let rows = [
        ("neżamina", "eżamina", "1", "sg", "", "concatenative"),
        ("teżamina", "eżamina", "2", "sg", "", "concatenative"),
        ("jeżamina", "eżamina", "3", "sg", "m", "concatenative"),
        ("teżamina", "eżamina", "3", "sg", "f", "concatenative"),
        ("neżaminaw", "eżamina", "1", "pl", "", "concatenative"),
        ("teżaminaw", "eżamina", "2", "pl", "", "concatenative"),
        ("jeżaminaw", "eżamina", "3", "pl", "", "concatenative"),
        ("nigdeb", "gideb", "1", "sg", "", "non_concatenative"),
        ("tigdeb", "gideb", "2", "sg", "", "non_concatenative"),
        ("jigdeb", "gideb", "3", "sg", "m", "non_concatenative"),
        ("tigdeb", "gideb", "3", "sg", "f", "non_concatenative"),
        ("nigdbu", "gideb", "1", "pl", "", "non_concatenative"),
        ("tigdbu", "gideb", "2", "pl", "", "non_concatenative"),
        ("jigdbu", "gideb", "3", "pl", "", "non_concatenative"),
    ];
    let mut text =
        String::from("surface\tlemma\tperson\tnumber\tgender\tdir_obj\tind_obj\ttam\tpolarity\torigin\n");
    for (surface, lemma, person, number, gender, origin) in rows {
        text.push_str(&format!(
            "{surface}\t{lemma}\t{person}\t{number}\t{gender}\t\t\timperfective\tpositive\t{origin}\n"
        ));
    }
    text
}

#[test]
fn supervised_pipeline_learns_person_and_number() {
    let loaded = load_labelled_lexicon(paradigm_lexicon().as_bytes()).unwrap();
    assert_eq!(loaded.entries.len(), 14);
    assert_eq!(loaded.duplicates_dropped, 0);

    let inventory =
        AffixInventory::from_lists(&["n", "t", "j"], &["w", "u"], AffixParams::default());
    let order = [Property::Person, Property::Number];
    let cascade =
        train_cascade(&loaded.entries, &inventory, &order, &TreeParams::default()).unwrap();

    // person comes from the subject prefix; the two syncretic t- forms
    // collapse onto the lexicographically smaller person label
    for (surface, person, number) in [
        ("nigdeb", "1", "sg"),
        ("jigdbu", "3", "pl"),
        ("teżaminaw", "2", "pl"),
        ("tigdeb", "2", "sg"),
        ("teżamina", "2", "sg"),
    ] {
        let label = cascade.classify(&inventory, surface).unwrap();
        assert_eq!(label.get(Property::Person), Some(person), "{surface}");
        assert_eq!(label.get(Property::Number), Some(number), "{surface}");
    }

    let traditional = evaluate(&cascade, &inventory, &loaded.entries).unwrap();
    let person = &traditional.per_property[0];
    assert_eq!((person.correct, person.total), (12, 14));
    let number = &traditional.per_property[1];
    assert_eq!((number.correct, number.total), (14, 14));

    let split = evaluate_split(&cascade, &inventory, &loaded.entries).unwrap();
    let person_split = &split[0];
    assert_eq!((person_split.con_correct, person_split.con_total), (6, 7));
    assert_eq!((person_split.nc_correct, person_split.nc_total), (6, 7));
    assert_eq!(person_split.overall_accuracy(), Some(12.0 / 14.0));

    let report = EvalReport::from_parts(&order, Some(&traditional), Some(&split));
    let csv = report.to_csv();
    let back = EvalReport::parse_csv(&csv).unwrap();
    assert_eq!(back.rows, report.rows);

    // bundle round trip through disk
    let dir = tempfile::tempdir().unwrap();
    save_cascade(&cascade, &inventory, dir.path()).unwrap();
    let (reloaded, reloaded_inv) = load_cascade(dir.path()).unwrap();
    for surface in PARADIGM {
        assert_eq!(
            reloaded.classify(&reloaded_inv, surface).unwrap(),
            cascade.classify(&inventory, surface).unwrap()
        );
    }

    // a dataset split keeps duplicate surfaces in one part
    let split = split_dataset(&loaded.entries, (0.8, 0.1, 0.1), 7).unwrap();
    let surfaces = |part: &[morphkit_core::lexicon::LabelledEntry]| -> BTreeSet<String> {
        part.iter().map(|e| e.surface.clone()).collect()
    };
    let train_s = surfaces(&split.train);
    let heldout_s = surfaces(&split.heldout);
    let test_s = surfaces(&split.test);
    assert!(train_s.is_disjoint(&heldout_s));
    assert!(train_s.is_disjoint(&test_s));
    assert!(heldout_s.is_disjoint(&test_s));
}

#[test]
fn later_classifiers_consume_earlier_predictions_not_gold_labels() {
    let none: [&str; 0] = [];
    let inventory = AffixInventory::from_lists(&none, &none, AffixParams::default());
    let leaf = |label: &str| TreeNode::Leaf { label: label.to_string(), majority: 1, total: 1 };

    let gender_tree = DecisionTree {
        root: TreeNode::Split {
            feature: "polarity".to_string(),
            branches: BTreeMap::from([
                ("positive".to_string(), leaf("m")),
                ("negative".to_string(), leaf("f")),
            ]),
            fallback: Box::new(leaf("x")),
        },
    };

    let order = vec![Property::Polarity, Property::Gender];
    let positive_first = Cascade {
        order: order.clone(),
        trees: BTreeMap::from([
            (Property::Polarity, DecisionTree { root: leaf("positive") }),
            (Property::Gender, gender_tree.clone()),
        ]),
    };
    let label = positive_first.classify(&inventory, "kelma").unwrap();
    assert_eq!(label.get(Property::Gender), Some("m"));

    let negative_first = Cascade {
        order,
        trees: BTreeMap::from([
            (Property::Polarity, DecisionTree { root: leaf("negative") }),
            (Property::Gender, gender_tree),
        ]),
    };
    let label = negative_first.classify(&inventory, "kelma").unwrap();
    assert_eq!(
        label.get(Property::Gender),
        Some("f"),
        "the gender tree reads whatever the polarity tree just predicted"
    );
}
