//! Key directory: `seal.pub`, `seal.key` and `conceal.key`.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use qrseal_core::payload::ModificationKey;
use qrseal_core::pipeline::TagKeys;
use qrseal_core::seal::{KeyPair, OpenKey, SealKey};
use rand_core::{CryptoRng, RngCore};

pub const SEAL_PUBLIC: &str = "seal.pub";
pub const SEAL_PRIVATE: &str = "seal.key";
pub const CONCEAL: &str = "conceal.key";
pub const CONCEAL_KEY_LEN: usize = 16;

fn write_private(path: &Path, bytes: &[u8]) -> io::Result<()> {
    fs::write(path, bytes)?;
    #[cfg(unix)]
    {
        use std::os::unix::fs::PermissionsExt;
        fs::set_permissions(path, fs::Permissions::from_mode(0o600))?;
    }
    Ok(())
}

pub fn random_conceal_key<R: RngCore + CryptoRng>(rng: &mut R) -> ModificationKey {
    let mut k = [0u8; CONCEAL_KEY_LEN];
    rng.fill_bytes(&mut k);
    ModificationKey::new(k).expect("16 bytes is long enough")
}

/// Writes all three files, refusing to overwrite an existing key set.
pub fn write_key_dir(dir: &Path, pair: &KeyPair, conceal: &ModificationKey) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    for name in [SEAL_PUBLIC, SEAL_PRIVATE, CONCEAL] {
        let p = dir.join(name);
        anyhow::ensure!(!p.exists(), "{} already exists", p.display());
    }
    fs::write(dir.join(SEAL_PUBLIC), pair.public.to_bytes())?;
    write_private(&dir.join(SEAL_PRIVATE), &pair.private.to_bytes())?;
    write_private(&dir.join(CONCEAL), conceal.as_bytes())?;
    Ok(())
}

fn read(dir: &Path, name: &str) -> Result<(PathBuf, Vec<u8>)> {
    let p = dir.join(name);
    let bytes = fs::read(&p).with_context(|| format!("reading {}", p.display()))?;
    Ok((p, bytes))
}

pub fn load_seal_key(dir: &Path) -> Result<SealKey> {
    let (p, b) = read(dir, SEAL_PUBLIC)?;
    SealKey::from_bytes(&b).with_context(|| format!("parsing {}", p.display()))
}

pub fn load_open_key(dir: &Path) -> Result<OpenKey> {
    let (p, b) = read(dir, SEAL_PRIVATE)?;
    OpenKey::from_bytes(&b).with_context(|| format!("parsing {}", p.display()))
}

pub fn load_conceal_key(dir: &Path) -> Result<ModificationKey> {
    let (p, b) = read(dir, CONCEAL)?;
    ModificationKey::new(b).with_context(|| format!("parsing {}", p.display()))
}

pub fn load_tag_keys(dir: &Path) -> Result<TagKeys> {
    Ok(TagKeys { open: load_open_key(dir)?, conceal: load_conceal_key(dir)? })
}
