//! Shared fixtures for the integration tests.
#![allow(dead_code)]

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use qrseal::keys::{load_seal_key, load_tag_keys, write_key_dir};
use qrseal::server::{AppState, BackgroundServer};
use qrseal::store::RegistryStore;
use qrseal_core::payload::ModificationKey;
use qrseal_core::pipeline::TagKeys;
use qrseal_core::registry::BatchDescriptor;
use qrseal_core::seal::{generate_keypair, Scheme, SealKey};
use qrseal_core::verify::VerifyConfig;
use qrseal_wire::ProductMeta;
use rand_chacha::ChaCha20Rng;
use rand_core::SeedableRng;
use tempfile::TempDir;

pub struct Site {
    pub tmp: TempDir,
}

impl Site {
    /// Registry directory with a seeded key set in `registry/keys`.
    pub fn new(scheme: Scheme, seed: u64) -> Self {
        let tmp = tempfile::tempdir().unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let pair = generate_keypair(scheme, 512, &mut rng).unwrap();
        let conceal = ModificationKey::new(seed.to_be_bytes().repeat(2)).unwrap();
        write_key_dir(&tmp.path().join("registry/keys"), &pair, &conceal).unwrap();
        Self { tmp }
    }

    pub fn registry(&self) -> PathBuf {
        self.tmp.path().join("registry")
    }

    pub fn keys_dir(&self) -> PathBuf {
        self.registry().join("keys")
    }

    pub fn server_dir(&self) -> PathBuf {
        self.tmp.path().join("server")
    }

    pub fn seal_key(&self) -> SealKey {
        load_seal_key(&self.keys_dir()).unwrap()
    }

    pub fn tag_keys(&self) -> TagKeys {
        load_tag_keys(&self.keys_dir()).unwrap()
    }

    pub fn open_store(&self) -> RegistryStore {
        RegistryStore::open(self.registry()).unwrap()
    }

    pub fn new_batch(&self, count: usize, regions: &[&str], seed: u64) -> String {
        let mut store = self.open_store();
        let id = store
            .registry_mut()
            .create_batch(descriptor(regions), count, 1_700_000_000, &mut ChaCha20Rng::seed_from_u64(seed))
            .unwrap();
        store.commit().unwrap();
        id
    }

    pub fn start_server(&self, data_dir: &Path) -> BackgroundServer {
        let state: Arc<AppState> =
            AppState::load(data_dir, self.tag_keys(), VerifyConfig::default()).unwrap();
        BackgroundServer::start(state, "127.0.0.1:0".parse().unwrap()).unwrap()
    }
}

pub fn meta() -> ProductMeta {
    ProductMeta {
        name: "Napa 500".into(),
        batch_number: "BN-7".into(),
        manufacturer: "Acme Pharma".into(),
        mfg_date: "2024-01-01".into(),
        expiry_date: "2026-01-01".into(),
    }
}

pub fn descriptor(regions: &[&str]) -> BatchDescriptor {
    BatchDescriptor {
        public_string: "Hello World!".into(),
        meta: meta(),
        intended_regions: regions.iter().map(|r| r.to_string()).collect::<BTreeSet<_>>(),
        seal_key_id: "keys/seal.pub".into(),
        conceal_key_id: "keys/conceal.key".into(),
    }
}
