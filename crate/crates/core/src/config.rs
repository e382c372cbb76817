//! Text formats for mapping configs and decomposition fixtures (TOML).
//!
//! A mapping config:
//!
//! ```toml
//! name = "agm"                          # optional, defaults to the file stem
//! p = 2
//! domain = "(0, inf)"                   # or { lower = 0.0, upper = inf, lower_closed = false, upper_closed = false }
//! components = ["arithmetic", "quasi:log"]
//! ```
//!
//! A decomposition fixture names a function expression and a mapping,
//! either as a path relative to the fixture file or inline:
//!
//! ```toml
//! name = "product-under-arithmetic-harmonic"
//! function = "product"
//! mapping = "arithmetic-harmonic.toml"
//! lipschitz = 1.0                       # optional Lipschitz constant of the outer map
//! ```

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::interval::Interval;
use crate::mapping::MeanTypeMapping;
use crate::mean::MeanSpec;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MappingConfig {
    #[serde(default)]
    pub name: Option<String>,
    pub p: usize,
    pub domain: Interval,
    pub components: Vec<String>,
}

impl MappingConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn into_mapping(self, fallback_name: &str) -> Result<MeanTypeMapping> {
        if self.components.len() != self.p {
            return Err(Error::Config(format!(
                "p = {} but {} components are listed",
                self.p,
                self.components.len()
            )));
        }
        let specs = self
            .components
            .iter()
            .enumerate()
            .map(|(i, c)| MeanSpec::parse(c, self.p).map_err(|e| e.in_component(i)))
            .collect::<Result<Vec<_>>>()?;
        let name = self.name.unwrap_or_else(|| fallback_name.to_string());
        MeanTypeMapping::new(name, specs, self.domain)
    }
}

pub fn parse_mapping(text: &str, fallback_name: &str) -> Result<MeanTypeMapping> {
    MappingConfig::from_toml(text)?.into_mapping(fallback_name)
}

pub fn load_mapping(path: impl AsRef<Path>) -> Result<MeanTypeMapping> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    parse_mapping(&text, &file_stem(path)).map_err(|e| match e {
        Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
        other => other,
    })
}

fn file_stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "mapping".into())
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum MappingRef {
    Path(PathBuf),
    Inline(MappingConfig),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct FixtureFile {
    name: String,
    function: String,
    mapping: MappingRef,
    #[serde(default)]
    lipschitz: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct DecompositionFixture {
    pub name: String,
    pub function: String,
    pub mapping: MeanTypeMapping,
    pub lipschitz: Option<f64>,
}

impl DecompositionFixture {
    /// `base` resolves a mapping given as a relative path.
    pub fn from_toml(text: &str, base: &Path) -> Result<Self> {
        let file: FixtureFile = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        let mapping = match file.mapping {
            MappingRef::Path(p) => load_mapping(base.join(p))?,
            MappingRef::Inline(cfg) => cfg.into_mapping(&file.name)?,
        };
        if let Some(l) = file.lipschitz {
            if !(l.is_finite() && l >= 0.0) {
                return Err(Error::Config(format!("lipschitz must be a nonnegative number, got {l}")));
            }
        }
        Ok(Self {
            name: file.name,
            function: file.function,
            mapping,
            lipschitz: file.lipschitz,
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text, path.parent().unwrap_or(Path::new(".")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_string_and_table_domains() {
        let a = parse_mapping("p = 2\ndomain = \"(0, inf)\"\ncomponents = [\"arithmetic\", \"quasi:log\"]\n", "agm").unwrap();
        assert_eq!(a, MeanTypeMapping::agm());
        let b = parse_mapping(
            "name = \"agm\"\np = 2\ncomponents = [\"Arithmetic\", \"QUASI:LOG\"]\n[domain]\nlower = 0.0\nupper = inf\n",
            "other",
        )
        .unwrap();
        assert_eq!(b, MeanTypeMapping::agm());
    }

    #[test]
    fn rejects_inconsistent_configs() {
        let e = parse_mapping("p = 3\ndomain = \"(0, inf)\"\ncomponents = [\"arithmetic\", \"harmonic\"]\n", "x").unwrap_err();
        assert!(e.to_string().contains("p = 3"));
        let e = parse_mapping("p = 2\ndomain = \"(0, inf)\"\ncomponents = [\"arithmetic\", \"harmonc\"]\n", "x").unwrap_err();
        assert!(e.to_string().contains("harmonc"), "{e}");
        let e = parse_mapping("p = 2\ndomain = \"(1, 0)\"\ncomponents = [\"min\", \"max\"]\n", "x").unwrap_err();
        assert!(matches!(e, Error::Config(_)));
        assert!(parse_mapping("p = 2\ndomain = \"[0, 1]\"\ncomponents = [\"min\", \"max\"]\nextra = 1\n", "x").is_err());
    }

    #[test]
    fn fixture_with_inline_mapping() {
        let text = r#"
name = "product"
function = "product"
lipschitz = 1.0

[mapping]
p = 2
domain = "(0, inf)"
components = ["arithmetic", "harmonic"]
"#;
        let f = DecompositionFixture::from_toml(text, Path::new(".")).unwrap();
        assert_eq!(f.mapping.components(), MeanTypeMapping::arithmetic_harmonic().components());
        assert_eq!(f.lipschitz, Some(1.0));
    }
}
