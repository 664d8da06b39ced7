mod common;

use std::collections::BTreeSet;

use lgtables::lexicon::{flatten, read_structured, render_structured, validate_licensing, Severity};
use lgtables::normalizer::{apply_script, apply_script_with, rename_column, ApplyMode, Script, TransformationReport};
use lgtables::splitter::{split_class, RouteKey, SplitSpec, SplitTarget, TargetSlot};
use lgtables::tableset::{load_tableset, save_tableset, Coding, EntryRef, LookupError, TableSet};

use common::{dir_differences, expected, label, lemmas, normalized_expected, pristine, replay_into};

fn defs(ts: &TableSet, class: &str) -> Vec<String> {
    ts.definitions[class].definitional.iter().map(|d| d.to_string()).collect()
}

fn cols(ts: &TableSet, class: &str) -> Vec<String> {
    ts.tables[class].columns.iter().map(|d| d.to_string()).collect()
}

const DISAPPEARANCE_VERBS: [&str; 8] = [
    "anéantir", "démolir", "détruire", "fusiller", "sacrifier", "souffler", "supprimer", "volatiliser",
];

#[test]
fn label_inventory_is_a_fixed_point() {
    let labels = common::fixture_labels();
    assert!(labels.len() >= 60, "{} labels", labels.len());
    for text in &labels {
        let once = label(text);
        let twice = label(once.canonical());
        assert_eq!(once.canonical(), twice.canonical(), "{text}");
        assert_eq!(once.body(), twice.body(), "{text}");
    }
}

#[test]
fn created_class_has_the_eight_verbs() {
    let ts = normalized_expected();
    assert_eq!(lemmas(&ts, "32D"), DISAPPEARANCE_VERBS);
    assert_eq!(defs(&ts, "32D"), ["N0 V N1", "N1 disparition"]);
}

#[test]
fn coding_lookup() {
    let ts = pristine();
    assert_eq!(ts.coding_of("36DT", "passer", &label("N0 V N1 à N2")), Ok(Coding::Plus));
    assert_eq!(ts.coding_of("31I", "pleuvoir", &label("C0 =: il")), Ok(Coding::Plus));
    assert!(matches!(
        ts.coding_of("36DT", "passer", &label("N3 =: Nhum")),
        Err(LookupError::UnknownProperty { .. })
    ));
    for (id, def) in &ts.definitions {
        for e in &ts.tables[id].entries {
            for d in &def.definitional {
                assert_eq!(ts.coding_of(id, &e.key(), d), Ok(Coding::Plus));
            }
        }
    }
}

#[test]
fn save_and_reload_both_fixture_sets() {
    for ts in [pristine(), normalized_expected()] {
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        save_tableset(&ts, a.path()).unwrap();
        let back = load_tableset(&a.path().join("tables"), &a.path().join("definitions.txt")).unwrap();
        assert_eq!(back, ts);
        save_tableset(&back, b.path()).unwrap();
        assert_eq!(dir_differences(a.path(), b.path()), Vec::<String>::new());
    }
}

#[test]
fn replay_matches_committed_output() {
    let dir = tempfile::tempdir().unwrap();
    replay_into(dir.path());
    assert_eq!(dir_differences(dir.path(), &expected()), Vec::<String>::new());
}

#[test]
fn report_replays_to_the_same_tables() {
    let text = std::fs::read_to_string(expected().join("report.jsonl")).unwrap();
    let report = TransformationReport::from_jsonl(&text).unwrap();
    assert_eq!(report.replay(&pristine()).unwrap(), normalized_expected());
}

#[test]
fn resuming_a_finished_run_changes_nothing() {
    let done = normalized_expected();
    let script = Script::from_file(&common::script()).unwrap();
    let (again, report) = apply_script_with(&done, &script, ApplyMode::Resume).unwrap();
    assert_eq!(again, done);
    assert!(report.steps.is_empty(), "{:?}", report.steps);
}

#[test]
fn conjoined_and_alternating_definitions() {
    let ts = normalized_expected();
    assert_eq!(defs(&ts, "32A"), ["N0 V N1", "N1 apparition"]);
    assert_eq!(defs(&ts, "32CV"), ["N0 V N1", "N0 V N1 en V-n", "N2 apparition"]);
    assert_eq!(defs(&ts, "36S"), ["N0 V N1 Prép N2", "N0 V N1 et N2"]);
}

#[test]
fn preposition_promotion_keeps_the_mixed_column() {
    let ts = normalized_expected();
    assert!(ts.definitions["35S"].is_definitional(&label("Prép =: avec")));
    let c = cols(&ts, "35S");
    assert!(c.contains(&"Prép =: d'avec".to_string()));
    assert!(!c.contains(&"Prép =: avec".to_string()));
}

#[test]
fn dative_class_duplicates_and_renames() {
    let ts = normalized_expected();
    let t = &ts.tables["36DT"];
    let src = t.column_index(&label("N2 =: N-hum")).unwrap();
    let dup = t.column_index(&label("Prép N2-hum = Ppv =: lui")).unwrap();
    let subj = t.column_index(&label("N0 =: N-hum")).unwrap();
    for e in &t.entries {
        assert_eq!(e.codings[dup], e.codings[src], "{}", e.lemma);
        assert_eq!(e.codings[subj], e.codings[src], "{}", e.lemma);
    }
    assert!(ts.definitions["36DT"].is_definitional(&label("Prép N2hum = Ppv =: lui")));
    assert!(!ts.definitions["36DT"].is_definitional(&label("Ppv =: lui")));
}

#[test]
fn support_verb_classes() {
    let before = pristine();
    let ts = normalized_expected();

    let renamed = cols(&ts, "AN09");
    assert_eq!(renamed, ["N0 =: Nhum", "Det =: un", "Det =: un-certain", "Det =: des"]);
    for (old, new) in [("N0 avoir un N", "Det =: un"), ("N0 avoir un certain N", "Det =: un-certain"), ("N0 avoir des N", "Det =: des")] {
        for e in &ts.tables["AN09"].entries {
            assert_eq!(
                before.coding_of("AN09", &e.lemma, &label(old)),
                ts.coding_of("AN09", &e.lemma, &label(new))
            );
        }
    }

    let an07: BTreeSet<_> = defs(&ts, "AN07").into_iter().collect();
    assert_eq!(an07, BTreeSet::from(["N0 avoir Det N".into(), "Det =: un-Modif".into(), "Det =: un-certain".into()]));

    assert_eq!(defs(&ts, "AN08"), ["N0 avoir Det N", "Vsup =: comporter", "Vsup =: comprendre"]);
    assert!(cols(&ts, "AN08").contains(&"il y avoir Det N Loc N0".to_string()));
    assert_eq!(ts.coding_of("AN08", "écriture", &label("il y avoir Det N Loc N0")), Ok(Coding::Minus));
}

#[test]
fn impersonal_verbs_become_frozen() {
    let ts = normalized_expected();
    assert_eq!(defs(&ts, "31I"), ["C0 V", "C0 =: ça"]);
    assert!(cols(&ts, "31I").contains(&"C0 =: il".to_string()));
    assert_eq!(ts.coding_of("31I", "dégringoler", &label("C0 =: il")), Ok(Coding::Minus));
}

#[test]
fn adverb_promotions_follow_the_class_list() {
    let ts = normalized_expected();
    let plain = "Adv, N0 V W";
    let neg = "Adv, N0 ne V pas W";
    let has = |class: &str, l: &str| ts.definitions[class].is_definitional(&label(l));
    for class in ["ADVMP", "ADVPC", "ADVPS", "ADVPAE", "PC", "PCA", "PV", "PDETC", "PCPC"] {
        assert!(has(class, plain) && has(class, neg), "{class}");
    }
    for class in ["ADVMS", "ADVMTF"] {
        assert!(has(class, plain) && !has(class, neg), "{class}");
    }
    assert!(!has("ADVMF", plain) && !has("ADVMF", neg));
    assert!(has("ADVPC", "P1 Adv P2"));
    assert!(has("PCPC", "Prép1 Det1 C1 Prép2 Det2 C2"));
}

#[test]
fn paraphrase_links_are_symmetric() {
    let ts = normalized_expected();
    let records = flatten(&ts);
    let find = |c: &str, l: &str| records.iter().find(|r| r.class_id == c && r.lemma == l).unwrap();
    assert!(find("ADVPS", "pratiquement").links.contains(&EntryRef::new("PC", "en pratique")));
    assert!(find("PC", "en pratique").links.contains(&EntryRef::new("ADVPS", "pratiquement")));
    assert!(find("PCA", "de manière sincère").links.contains(&EntryRef::new("ADVMS", "sincèrement")));
    for r in &records {
        for l in &r.links {
            assert!(find(&l.class_id, &l.lemma).links.contains(&r.entry_ref()));
        }
    }
}

fn locative_spec(class: &str, human: bool, src: &str, dst: &str, dep: &str, targets: &[(TargetSlot, &str)]) -> SplitSpec {
    SplitSpec {
        source_class: class.into(),
        human_n1: human,
        source_column: label(src),
        dest_column: label(dst),
        dependent_column: label(dep),
        targets: targets.iter().map(|(s, id)| (*s, SplitTarget::new(*id))).collect(),
    }
}

#[test]
fn locative_split_routes_each_verb() {
    use RouteKey as R;
    use TargetSlot as T;
    let ts = pristine();
    let (ts, _) = rename_column(&ts, "35L", &label("N0 V Loc N1 destination"), &label("N0 V Loc N2 destination")).unwrap();
    let spec = locative_spec(
        "35L",
        false,
        "N0 V Loc N1 source",
        "N0 V Loc N2 destination",
        "N1 source dépendante",
        &[(T::Both, "35L"), (T::SourceOnly, "35LS"), (T::DestOnly, "35LD"), (T::Static, "35ST2"), (T::Residual, "35LR")],
    );
    let (out, report) = split_class(&ts, &spec).unwrap();
    let route = |l: &str| report.decisions.iter().find(|d| d.lemma == l).unwrap().route;
    assert_eq!(route("bondir"), R::BothIndependent);
    assert_eq!(route("cheminer"), R::BothDependentSource);
    assert_eq!(route("dérailler"), R::SourceOnly);
    assert_eq!(route("s'enfoncer"), R::DestOnly);
    assert_eq!(route("sortir"), R::Static);
    assert_eq!(route("patauger"), R::Residual);
    assert_eq!(lemmas(&out, "35L"), ["bondir", "cheminer"]);
    assert_eq!(lemmas(&out, "35ST2"), ["sortir"]);
    assert_eq!(out.entry_count(), ts.entry_count());

    let (ts, _) = rename_column(
        &pristine(),
        "38LH",
        &label("N0 V N1 Loc N2 destination"),
        &label("N0 V N1 Loc N3 destination"),
    )
    .unwrap();
    let spec = locative_spec(
        "38LH",
        true,
        "N0 V N1 Loc N2 source",
        "N0 V N1 Loc N3 destination",
        "N2 source dépendante",
        &[(T::Both, "38LH"), (T::SourceOnly, "38LHS"), (T::DestOnly, "38LHD"), (T::Residual, "38LHR")],
    );
    let (out, report) = split_class(&ts, &spec).unwrap();
    let route = |l: &str| report.decisions.iter().find(|d| d.lemma == l).unwrap().route;
    assert_eq!(route("replier"), R::BothIndependent);
    assert_eq!(route("conduire"), R::BothDependentSource);
    assert_eq!(route("virer"), R::SourceOnly);
    assert_eq!(route("engager"), R::DestOnly);
    assert_eq!(route("semer"), R::Residual);
    assert_eq!(lemmas(&out, "38LHR"), ["semer"]);
    assert_eq!(out.entry_count(), ts.entry_count());
    assert_eq!(defs(&out, "38LHR"), ["N0 V N1 Loc N2", "N1 =: Nhum"]);
}

#[test]
fn replayed_locative_classes() {
    let ts = normalized_expected();
    assert_eq!(lemmas(&ts, "35L"), ["bondir", "cheminer"]);
    assert_eq!(lemmas(&ts, "35LS"), ["dérailler"]);
    assert_eq!(lemmas(&ts, "35LD"), ["s'enfoncer"]);
    assert_eq!(lemmas(&ts, "35ST"), ["habiter", "résider", "sortir"]);
    assert_eq!(lemmas(&ts, "35LR"), ["barboter", "errer", "patauger"]);
    assert_eq!(lemmas(&ts, "38LH"), ["conduire", "replier"]);
    assert_eq!(lemmas(&ts, "38LHS"), ["virer"]);
    assert_eq!(lemmas(&ts, "38LHD"), ["engager"]);
    assert_eq!(lemmas(&ts, "38LHR"), ["semer"]);
    assert_eq!(ts.entry_count(), pristine().entry_count() + DISAPPEARANCE_VERBS.len());
}

#[test]
fn licensing_before_and_after() {
    let before = validate_licensing(&flatten(&pristine()));
    assert!(before.iter().any(|i| i.severity == Severity::Error && i.record.class_id == "35L"));
    let after = validate_licensing(&flatten(&normalized_expected()));
    assert!(after.iter().all(|i| i.severity != Severity::Error), "{after:?}");
}

#[test]
fn structured_export_reads_back() {
    let records = flatten(&normalized_expected());
    let text = render_structured(&records);
    assert_eq!(read_structured(&text).unwrap(), records);
    assert_eq!(records.iter().filter(|r| r.class_id == "32D").count(), 8);
    let committed = std::fs::read_to_string(expected().join("lexicon.lglex")).unwrap();
    assert_eq!(committed, text);
}

#[test]
fn script_failure_leaves_input_untouched() {
    let ts = pristine();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.lgt");
    std::fs::write(&path, "promote 35S \"Prép =: avec\"\npromote 35S \"Prép =: d'avec\"\n").unwrap();
    let err = apply_script(&ts, &path).unwrap_err();
    assert_eq!((err.step, err.line), (2, 2));
    assert_eq!(ts, pristine());
}
