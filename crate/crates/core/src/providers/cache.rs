//! Content-addressed on-disk memo of translations.
//!
//! Each `(provider, src, tgt, text)` key hashes to one file holding the
//! translation. Writes go through a temp file and rename, serialized by a
//! lock; reads are lock-free.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use sha2::{Digest, Sha256};

use super::{check_batch_len, ProviderError, TranslationRequest, Translator};

pub struct CachedTranslator<T> {
    inner: T,
    dir: PathBuf,
    write_lock: Mutex<()>,
}

impl<T: Translator> CachedTranslator<T> {
    pub fn open(inner: T, dir: &Path) -> Result<Self, ProviderError> {
        fs::create_dir_all(dir)
            .map_err(|e| ProviderError::Cache(format!("{}: {e}", dir.display())))?;
        Ok(CachedTranslator {
            inner,
            dir: dir.to_path_buf(),
            write_lock: Mutex::new(()),
        })
    }

    pub fn key(&self, src: &str, tgt: &str, text: &str) -> String {
        let mut h = Sha256::new();
        for part in [self.inner.name().as_str(), src, tgt, text] {
            h.update((part.len() as u64).to_le_bytes());
            h.update(part.as_bytes());
        }
        hex::encode(h.finalize())
    }

    fn path(&self, key: &str) -> PathBuf {
        self.dir.join(&key[..2]).join(key)
    }

    fn get(&self, key: &str) -> Option<String> {
        fs::read_to_string(self.path(key)).ok()
    }

    fn put(&self, key: &str, value: &str) -> Result<(), ProviderError> {
        let path = self.path(key);
        let parent = path.parent().expect("cache path has a parent");
        let err = |e: std::io::Error| ProviderError::Cache(format!("{}: {e}", path.display()));
        let _guard = self.write_lock.lock().unwrap_or_else(|p| p.into_inner());
        fs::create_dir_all(parent).map_err(err)?;
        let tmp = tempfile::NamedTempFile::new_in(parent).map_err(err)?;
        fs::write(tmp.path(), value).map_err(err)?;
        tmp.persist(&path).map_err(|e| err(e.error))?;
        Ok(())
    }
}

impl<T: Translator> Translator for CachedTranslator<T> {
    fn name(&self) -> String {
        self.inner.name()
    }

    fn translate_batch(&self, req: &TranslationRequest) -> Result<Vec<String>, ProviderError> {
        req.validate()?;
        let keys: Vec<String> = req
            .texts
            .iter()
            .map(|t| self.key(&req.source_language, &req.target_language, t))
            .collect();
        let mut out: Vec<Option<String>> = keys.iter().map(|k| self.get(k)).collect();
        let missing: Vec<usize> = (0..out.len()).filter(|&i| out[i].is_none()).collect();
        if !missing.is_empty() {
            let sub = TranslationRequest {
                source_language: req.source_language.clone(),
                target_language: req.target_language.clone(),
                texts: missing.iter().map(|&i| req.texts[i].clone()).collect(),
            };
            let fresh = self.inner.translate_batch(&sub)?;
            check_batch_len(&sub, fresh.len())?;
            for (&i, t) in missing.iter().zip(fresh) {
                self.put(&keys[i], &t)?;
                out[i] = Some(t);
            }
        }
        Ok(out
            .into_iter()
            .map(|t| t.expect("every slot filled"))
            .collect())
    }
}
