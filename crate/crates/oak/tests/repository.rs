mod common;

use std::fs;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;
use std::thread;

use oak::repo::{load_state, minted_seq, save_state, RepoError, Repository};
use oak::{load_files, resolve_data_dir, Loaded};
use oak_core::kmap::knowledge_models;
use oak_core::seed;
use oak_core::vocab::agrikmaps;
use oak_core::wrapper::parse_manifest;

#[test]
fn shipped_repository_matches_the_seed_manifests() {
    let state = load_state(&common::shipped_data()).unwrap();
    let o = seed::ontology();
    assert!(state.knowledge.is_isomorphic(&seed::repository(&o)));
    assert_eq!(state.models().len(), 5);
    assert_eq!(state.next_seq, 6);
    assert_eq!(state.graph.len(), state.knowledge.len() + state.ontology.graph().len());
}

#[test]
fn save_then_load_is_isomorphic() {
    let src = load_state(&common::shipped_data()).unwrap();
    let out = tempfile::tempdir().unwrap();
    fs::create_dir_all(out.path().join("ontology")).unwrap();
    for (name, text) in seed::ONTOLOGY_FILES {
        fs::write(out.path().join("ontology").join(name), text).unwrap();
    }
    let mut moved = src.clone();
    moved.data_dir = out.path().to_path_buf();
    let written = save_state(&moved).unwrap();
    assert_eq!(written.len(), 5);
    let back = load_state(out.path()).unwrap();
    assert!(back.knowledge.is_isomorphic(&src.knowledge));
    assert_eq!(back.next_seq, src.next_seq);
    // saving is deterministic
    let first: Vec<String> = written.iter().map(|p| fs::read_to_string(p).unwrap()).collect();
    save_state(&back).unwrap();
    let second: Vec<String> = written.iter().map(|p| fs::read_to_string(p).unwrap()).collect();
    assert_eq!(first, second);
}

#[test]
fn malformed_file_is_named() {
    let dir = common::scratch_data();
    let bad = dir.path().join("kmaps").join("Broken.ttl");
    fs::write(&bad, "AgriKMaps:x a .\n").unwrap();
    let err = load_state(dir.path()).unwrap_err();
    assert!(matches!(err, RepoError::Syntax { ref path, .. } if *path == bad));
    assert!(err.to_string().contains("Broken.ttl"), "{err}");
}

#[test]
fn missing_ontology_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    assert!(matches!(load_state(dir.path()), Err(RepoError::MissingOntology { .. })));
}

#[test]
fn sequence_counter_survives_without_sidecar() {
    let dir = common::scratch_data();
    fs::remove_file(dir.path().join("meta.json")).unwrap();
    assert_eq!(load_state(dir.path()).unwrap().next_seq, 6);
    fs::write(dir.path().join("meta.json"), r#"{"next_seq": 40}"#).unwrap();
    assert_eq!(load_state(dir.path()).unwrap().next_seq, 40);
    assert_eq!(minted_seq(&agrikmaps::term("Regressor_004")), Some(4));
    assert_eq!(minted_seq(&agrikmaps::term("Regressor")), None);
}

#[test]
fn ingest_persists_and_advances() {
    let dir = common::scratch_data();
    let repo = Repository::open(dir.path()).unwrap();
    let m = parse_manifest(seed::MANIFEST_FILES[0].1).unwrap();
    let done = repo.ingest_manifest(&m, None).unwrap();
    assert_eq!(done.seq, 6);
    assert!(done.file.ends_with("Regressor_006.ttl"));
    assert!(done.added > 0);
    assert_eq!(repo.snapshot().next_seq, 7);
    let reloaded = load_state(dir.path()).unwrap();
    assert_eq!(reloaded.models().len(), 6);
    assert_eq!(reloaded.next_seq, 7);
    assert!(reloaded.knowledge.is_isomorphic(&repo.snapshot().knowledge));
    // reusing a sequence number collides with the stored item
    let err = repo.ingest_manifest(&m, Some(6)).unwrap_err();
    assert!(matches!(err, RepoError::AlreadyExists(ref iri) if iri.local_name() == "Regressor_006"));
}

#[test]
fn readers_keep_their_snapshot() {
    let dir = common::scratch_data();
    let repo = Repository::open(dir.path()).unwrap();
    let before = repo.snapshot();
    let m = parse_manifest(seed::MANIFEST_FILES[2].1).unwrap();
    repo.ingest_manifest(&m, Some(50)).unwrap();
    assert_eq!(before.models().len(), 5);
    assert_eq!(repo.snapshot().models().len(), 6);
}

#[test]
fn concurrent_reads_see_whole_snapshots() {
    let dir = common::scratch_data();
    let repo = Arc::new(Repository::open(dir.path()).unwrap());
    let base = repo.snapshot().knowledge.len();
    let done = Arc::new(AtomicBool::new(false));
    let readers: Vec<_> = (0..4)
        .map(|_| {
            let (repo, done) = (repo.clone(), done.clone());
            thread::spawn(move || {
                let mut seen = 0usize;
                while !done.load(Ordering::Relaxed) {
                    let s = repo.snapshot();
                    // every snapshot is internally consistent
                    let models = knowledge_models(&s.knowledge).len();
                    assert_eq!(s.models().len(), models);
                    assert!(s.knowledge.len() >= base);
                    assert_eq!(s.graph.len(), s.knowledge.len() + s.ontology.graph().len());
                    seen += 1;
                }
                seen
            })
        })
        .collect();
    for (i, (_, text)) in seed::MANIFEST_FILES.iter().enumerate() {
        let m = parse_manifest(text).unwrap();
        repo.ingest_manifest(&m, Some(100 + i as u32)).unwrap();
    }
    done.store(true, Ordering::Relaxed);
    for r in readers {
        assert!(r.join().unwrap() > 0);
    }
    assert_eq!(repo.snapshot().models().len(), 10);
}

#[test]
fn load_files_accepts_manifests_and_turtle() {
    let dir = common::bare_data();
    let repo = Repository::open(dir.path()).unwrap();
    let manifests = common::shipped_data().join("manifests");
    let loaded = load_files(&repo, &[manifests.join("regressor-004.kmf.json")]).unwrap();
    assert!(matches!(&loaded[0], Loaded::Manifest { seq: 4, model, .. } if model.ends_with("Regressor_004")));

    let ttl = common::shipped_data().join("kmaps").join("Classifier_002.ttl");
    let loaded = load_files(&repo, &[ttl]).unwrap();
    assert!(matches!(&loaded[0], Loaded::Turtle { models, .. } if models.len() == 1));
    assert_eq!(repo.snapshot().models().len(), 2);
    assert_eq!(repo.snapshot().next_seq, 5);
    assert!(dir.path().join("kmaps").join("Classifier_002.ttl").exists());
}

#[test]
fn stray_turtle_is_rejected() {
    let dir = common::bare_data();
    let repo = Repository::open(dir.path()).unwrap();
    let f = dir.path().join("stray.ttl");
    fs::write(&f, "<http://example.org/a> <http://example.org/p> \"x\" .\n").unwrap();
    let err = load_files(&repo, &[f]).unwrap_err();
    assert!(err.to_string().contains("stray.ttl"), "{err}");
    assert!(repo.snapshot().knowledge.is_empty());
}

#[test]
fn env_overrides_flag() {
    use std::path::PathBuf;
    assert_eq!(resolve_data_dir(None, None), PathBuf::from("data"));
    assert_eq!(resolve_data_dir(Some("x".into()), None), PathBuf::from("x"));
    assert_eq!(resolve_data_dir(Some("x".into()), Some("y".into())), PathBuf::from("y"));
    assert_eq!(resolve_data_dir(Some("x".into()), Some("".into())), PathBuf::from("x"));
}
