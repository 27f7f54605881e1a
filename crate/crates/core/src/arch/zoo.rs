//! The model zoo: 24 architecture files (six families, four fine-tuning
//! variants each) shipped as JSON under `zoo/`.
//!
//! A copy of the shipped directory is compiled into the crate. Setting
//! [`ZOO_DIR_ENV`] points [`Zoo::from_env`] and [`zoo_build`] at another
//! directory instead.

use std::fs;
use std::path::{Path, PathBuf};

use super::{validate_arch, ArchError, ArchitectureSpec};

/// Environment variable overriding the zoo directory.
pub const ZOO_DIR_ENV: &str = "DNNSCA_ZOO_DIR";

/// Family names in catalog order.
pub const FAMILIES: [&str; 6] = [
    "Alexnet",
    "InceptionV3",
    "Resnet50",
    "Resnet101",
    "MobilenetV1",
    "MobilenetV2",
];

macro_rules! embedded {
    ($($file:literal),* $(,)?) => {
        &[$(($file, include_str!(concat!(env!("CARGO_MANIFEST_DIR"), "/zoo/", $file)))),*]
    };
}

const EMBEDDED: &[(&str, &str)] = embedded![
    "00_alexnet_4096x4096x1000.json",
    "01_alexnet_4096x4096x500.json",
    "02_alexnet_4096x2048x500.json",
    "03_alexnet_2048x2048x500.json",
    "04_inceptionv3_1000.json",
    "05_inceptionv3_750.json",
    "06_inceptionv3_500.json",
    "07_inceptionv3_250.json",
    "08_resnet50_1000_3_4_6_3.json",
    "09_resnet50_1000_3_6_4_3.json",
    "10_resnet50_500_3_6_4_3.json",
    "11_resnet50_500_3_5_5_3.json",
    "12_resnet101_1000_3_4_23_3.json",
    "13_resnet101_1000_3_7_20_3.json",
    "14_resnet101_500_3_14_13_3.json",
    "15_resnet101_500_3_17_10_3.json",
    "16_mobilenetv1_1000.json",
    "17_mobilenetv1_750.json",
    "18_mobilenetv1_500.json",
    "19_mobilenetv1_250.json",
    "20_mobilenetv2_1000.json",
    "21_mobilenetv2_750.json",
    "22_mobilenetv2_500.json",
    "23_mobilenetv2_250.json",
];

/// File name for the `index`-th catalog entry, e.g.
/// `08_resnet50_1000_3_4_6_3.json`.
pub fn file_name(index: usize, arch: &ArchitectureSpec) -> String {
    let mut slug = String::new();
    for ch in arch.variant.replace('*', "x").chars() {
        if ch.is_ascii_alphanumeric() {
            slug.push(ch);
        } else if !slug.ends_with('_') {
            slug.push('_');
        }
    }
    let slug = slug.trim_matches('_');
    format!("{index:02}_{}_{slug}.json", arch.name.to_ascii_lowercase())
}

#[derive(Debug, Clone)]
pub struct Zoo {
    entries: Vec<ArchitectureSpec>,
}

impl Zoo {
    fn from_entries(entries: Vec<(String, ArchitectureSpec)>) -> Result<Self, ArchError> {
        let mut seen = std::collections::HashSet::new();
        for (path, arch) in &entries {
            let v = validate_arch(arch);
            if !v.is_valid() {
                return Err(ArchError::ZooFile {
                    path: path.clone(),
                    reason: ArchError::Validation(v.errors).to_string(),
                });
            }
            if !seen.insert((arch.name.clone(), arch.variant.clone())) {
                return Err(ArchError::ZooFile {
                    path: path.clone(),
                    reason: format!("duplicate entry {}", arch.label()),
                });
            }
        }
        Ok(Self {
            entries: entries.into_iter().map(|(_, a)| a).collect(),
        })
    }

    /// The catalog compiled into the crate.
    pub fn embedded() -> Self {
        let entries = EMBEDDED
            .iter()
            .map(|(file, text)| {
                let arch = ArchitectureSpec::from_json(text)
                    .unwrap_or_else(|e| panic!("embedded zoo file {file}: {e}"));
                (file.to_string(), arch)
            })
            .collect();
        Self::from_entries(entries).expect("embedded zoo is valid")
    }

    /// Loads every `*.json` file in `dir`, ordered by file name.
    pub fn load_dir(dir: &Path) -> Result<Self, ArchError> {
        let zoo_err = |path: &Path, reason: String| ArchError::ZooFile {
            path: path.display().to_string(),
            reason,
        };
        let read = fs::read_dir(dir).map_err(|e| zoo_err(dir, e.to_string()))?;
        let mut paths: Vec<PathBuf> = read
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "json"))
            .collect();
        paths.sort();
        if paths.is_empty() {
            return Err(zoo_err(dir, "no architecture files found".to_string()));
        }
        let mut entries = Vec::with_capacity(paths.len());
        for path in paths {
            let text = fs::read_to_string(&path).map_err(|e| zoo_err(&path, e.to_string()))?;
            let arch =
                ArchitectureSpec::from_json(&text).map_err(|e| zoo_err(&path, e.to_string()))?;
            entries.push((path.display().to_string(), arch));
        }
        Self::from_entries(entries)
    }

    /// The directory named by [`ZOO_DIR_ENV`] if set, else the embedded catalog.
    pub fn from_env() -> Result<Self, ArchError> {
        match std::env::var_os(ZOO_DIR_ENV) {
            Some(dir) if !dir.is_empty() => Self::load_dir(Path::new(&dir)),
            _ => Ok(Self::embedded()),
        }
    }

    /// Writes one file per entry, named by [`file_name`].
    pub fn write_dir(&self, dir: &Path) -> std::io::Result<()> {
        fs::create_dir_all(dir)?;
        for (i, arch) in self.entries.iter().enumerate() {
            fs::write(dir.join(file_name(i, arch)), arch.to_json() + "\n")?;
        }
        Ok(())
    }

    pub fn entries(&self) -> &[ArchitectureSpec] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Entries of one family, case-insensitive.
    pub fn family(&self, name: &str) -> Vec<&ArchitectureSpec> {
        self.entries
            .iter()
            .filter(|a| a.name.eq_ignore_ascii_case(name))
            .collect()
    }

    /// Distinct family names in catalog order.
    pub fn names(&self) -> Vec<&str> {
        let mut names: Vec<&str> = Vec::new();
        for a in &self.entries {
            if !names.contains(&a.name.as_str()) {
                names.push(&a.name);
            }
        }
        names
    }

    /// The first (unmodified) entry of a family.
    pub fn base(&self, name: &str) -> Result<&ArchitectureSpec, ArchError> {
        self.family(name)
            .into_iter()
            .next()
            .ok_or_else(|| self.unknown(name, ""))
    }

    pub fn get(&self, name: &str, variant: &str) -> Result<&ArchitectureSpec, ArchError> {
        self.entries
            .iter()
            .find(|a| a.name.eq_ignore_ascii_case(name) && a.variant == variant)
            .ok_or_else(|| self.unknown(name, variant))
    }

    fn unknown(&self, name: &str, variant: &str) -> ArchError {
        ArchError::UnknownEntry {
            name: name.to_string(),
            variant: variant.to_string(),
            valid: self
                .entries
                .iter()
                .map(|a| format!("{} {}", a.name, a.variant))
                .collect::<Vec<_>>()
                .join(", "),
        }
    }
}

/// Looks up one catalog entry.
pub fn zoo_build(name: &str, variant: &str) -> Result<ArchitectureSpec, ArchError> {
    Zoo::from_env()?.get(name, variant).cloned()
}
