use std::path::{Path, PathBuf};

use rallyshap::synthdata::{generate_dataset, meta_path, save_csv, save_meta, split_dataset, DatasetMeta, Frame};

use crate::config::SynthOpts;
use crate::error::CliResult;
use crate::output::{ensure_dir, write_text};

pub struct SynthOutput {
    pub files: Vec<PathBuf>,
    pub summary: String,
}

/// Writes `dataset.csv`, `train.csv`, `test.csv`, each with a metadata sidecar.
pub fn cmd_synth(o: &SynthOpts, out: &Path) -> CliResult<SynthOutput> {
    ensure_dir(out)?;
    let (world, rallies) = generate_dataset(&o.generator)?;
    let (train, test) = split_dataset(&rallies, o.split, o.generator.seed)?;
    let mut files = Vec::new();
    for (name, set) in [("dataset", &rallies), ("train", &train), ("test", &test)] {
        let path = out.join(format!("{name}.csv"));
        save_csv(set, &path)?;
        let meta = DatasetMeta {
            generator: o.generator,
            frame: Frame::Normalized,
            n_rallies: set.len(),
            n_strokes: set.iter().map(|r| r.len()).sum(),
        };
        save_meta(&meta, &meta_path(&path))?;
        files.push(path.clone());
        files.push(meta_path(&path));
    }
    files.push(write_text(&out.join("world.json"), &(serde_json::to_string_pretty(&world)? + "\n"))?);
    let strokes: usize = rallies.iter().map(|r| r.len()).sum();
    let summary = format!(
        "generated {} rallies ({} strokes, mean length {:.2}); train {}, test {}\n",
        rallies.len(),
        strokes,
        strokes as f64 / rallies.len().max(1) as f64,
        train.len(),
        test.len()
    );
    Ok(SynthOutput { files, summary })
}
