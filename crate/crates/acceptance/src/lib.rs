//! Data location and reporting helpers for the acceptance tests.

use std::fs::File;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};

use flate2::read::GzDecoder;

/// Directory holding the optional external inputs (`ulysses.txt`,
/// `polish_novel.txt`, `bnc_lemmas.tsv`, `bnc_mapping.tsv`). Overridden by
/// `RANKFREQ_DATA_DIR`.
pub fn external_dir() -> PathBuf {
    match std::env::var_os("RANKFREQ_DATA_DIR") {
        Some(d) => PathBuf::from(d),
        None => Path::new(env!("CARGO_MANIFEST_DIR")).join("data/external"),
    }
}

pub fn external_file(name: &str) -> Result<PathBuf, String> {
    let p = external_dir().join(name);
    if p.is_file() {
        Ok(p)
    } else {
        Err(format!("input not found: {} (set RANKFREQ_DATA_DIR)", p.display()))
    }
}

/// The gzipped documents of a bundled corpus, sorted by file name.
pub fn bundled_corpus(name: &str) -> io::Result<Vec<PathBuf>> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/corpora").join(name);
    let mut docs: Vec<PathBuf> = std::fs::read_dir(&dir)?
        .map(|e| e.map(|e| e.path()))
        .collect::<io::Result<Vec<_>>>()?
        .into_iter()
        .filter(|p| p.to_string_lossy().ends_with(".txt.gz"))
        .collect();
    docs.sort();
    Ok(docs)
}

/// Decompresses a bundled corpus into `dest` and returns the plain-text
/// paths in the same order.
pub fn extract_corpus(name: &str, dest: &Path) -> io::Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dest)?;
    bundled_corpus(name)?
        .into_iter()
        .map(|gz| {
            let mut text = Vec::new();
            GzDecoder::new(File::open(&gz)?).read_to_end(&mut text)?;
            let stem = gz.file_name().unwrap().to_string_lossy().trim_end_matches(".gz").to_owned();
            let out = dest.join(stem);
            std::fs::write(&out, text)?;
            Ok(out)
        })
        .collect()
}

/// Strips a Project Gutenberg header and licence footer when present.
pub fn strip_gutenberg(text: &str) -> &str {
    let start = text
        .find("*** START OF")
        .and_then(|i| text[i..].find('\n').map(|j| i + j + 1))
        .unwrap_or(0);
    let end = text[start..].find("*** END OF").map_or(text.len(), |i| start + i);
    &text[start..end]
}

/// Writes one result line straight to the process stderr so it shows even
/// when the test harness captures output.
pub fn report(id: &str, pass: bool, detail: &str) -> bool {
    let status = if pass { "PASS" } else { "FAIL" };
    let _ = writeln!(io::stderr(), "ACCEPTANCE {id} {status}: {detail}");
    pass
}
