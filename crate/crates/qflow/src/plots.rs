//! Declarative plot scripts written next to the CSV artifacts.
//!
//! A `.plot` file is TOML: a `title`, the `data` file, and one or more
//! `[[panel]]` tables giving the plot kind, column mapping and axis labels.
//! Column names ending in `*` select every column with that prefix; the
//! column name `@header` means the values of the header row after the
//! first field. Any plotting tool can render them; none is bundled.

use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;

use crate::io::RunManifest;

#[derive(Debug, thiserror::Error)]
pub enum PlotError {
    #[error("missing artifact: {0}")]
    MissingArtifact(String),
    #[error("writing {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Panel {
    pub kind: &'static str,
    pub x: &'static str,
    pub y: String,
    pub z: Option<&'static str>,
    pub x_label: &'static str,
    pub y_label: &'static str,
    pub z_label: Option<&'static str>,
    pub group_by: Option<&'static str>,
    pub log_axes: bool,
    /// Horizontal reference lines at integer y.
    pub integer_grid: bool,
}

impl Panel {
    fn new(kind: &'static str, x: &'static str, y: impl Into<String>, x_label: &'static str, y_label: &'static str) -> Self {
        Self {
            kind,
            x,
            y: y.into(),
            z: None,
            x_label,
            y_label,
            z_label: None,
            group_by: None,
            log_axes: false,
            integer_grid: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PlotScript {
    pub file: String,
    pub title: &'static str,
    pub data: String,
    pub overlay: Option<String>,
    pub panels: Vec<Panel>,
}

impl PlotScript {
    pub fn render(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "title = {:?}", self.title);
        let _ = writeln!(s, "data = {:?}", self.data);
        if let Some(o) = &self.overlay {
            let _ = writeln!(s, "overlay = {o:?}");
        }
        for p in &self.panels {
            let _ = writeln!(s, "\n[[panel]]");
            let _ = writeln!(s, "kind = {:?}", p.kind);
            let _ = writeln!(s, "x = {:?}", p.x);
            let _ = writeln!(s, "y = {:?}", p.y);
            if let Some(z) = p.z {
                let _ = writeln!(s, "z = {z:?}");
            }
            let _ = writeln!(s, "x_label = {:?}", p.x_label);
            let _ = writeln!(s, "y_label = {:?}", p.y_label);
            if let Some(z) = p.z_label {
                let _ = writeln!(s, "z_label = {z:?}");
            }
            if let Some(g) = p.group_by {
                let _ = writeln!(s, "group_by = {g:?}");
            }
            if p.log_axes {
                let _ = writeln!(s, "scale = \"loglog\"");
            }
            if p.integer_grid {
                let _ = writeln!(s, "y_reference = \"integers\"");
            }
        }
        s
    }
}

/// Plot scripts for the artifacts listed in `manifest`.
pub fn plan(manifest: &RunManifest) -> Result<Vec<PlotScript>, PlotError> {
    if manifest.artifacts.is_empty() {
        return Err(PlotError::MissingArtifact("manifest lists no artifacts".into()));
    }
    let has = |f: &str| manifest.has_artifact(f);
    let mut out = Vec::new();
    if has("carpet.csv") {
        let mut p = Panel::new("heatmap", "@header", "t/x", "x", "t");
        p.z = Some("values");
        p.z_label = Some("rho(x, t)");
        out.push(PlotScript {
            file: "carpet.plot".into(),
            title: "Density carpet",
            data: "carpet.csv".into(),
            overlay: None,
            panels: vec![p],
        });
    }
    if has("trajectories.csv") {
        out.push(PlotScript {
            file: "trajectories.plot".into(),
            title: "Trajectories",
            data: "trajectories.csv".into(),
            overlay: has("carpet.csv").then(|| "carpet.plot".into()),
            panels: vec![Panel::new("lines", "path_*", "t", "x", "t")],
        });
    }
    if has("ladder.csv") {
        let mut p = Panel::new("lines", "x", "p_normalized_*", "x", "p / (2 pi hbar / d)");
        p.integer_grid = true;
        out.push(PlotScript {
            file: "ladder.plot".into(),
            title: "Far-field density and momentum ladder",
            data: "ladder.csv".into(),
            overlay: None,
            panels: vec![Panel::new("lines", "x", "rho_*", "x", "rho"), p],
        });
    }
    if has("scaling.csv") {
        let mut p = Panel::new("points", "K", "L*", "K", "curve length L");
        p.log_axes = true;
        out.push(PlotScript {
            file: "scaling.plot".into(),
            title: "Curve length against truncation",
            data: "scaling.csv".into(),
            overlay: None,
            panels: vec![p],
        });
    }
    if has("toymodel.csv") {
        let mut a = Panel::new("lines", "t", "x_min", "t", "x_min");
        a.group_by = Some("preset");
        let mut b = Panel::new("lines", "t", "V0", "t", "V0");
        b.group_by = Some("preset");
        out.push(PlotScript {
            file: "toymodel.plot".into(),
            title: "Effective well edge and depth",
            data: "toymodel.csv".into(),
            overlay: None,
            panels: vec![a, b],
        });
    }
    if has("toymodel_profile.csv") {
        let mut p = Panel::new("steps", "x", "V", "x", "V(x, 0)");
        p.group_by = Some("preset");
        out.push(PlotScript {
            file: "toymodel_profile.plot".into(),
            title: "Effective potential at t = 0",
            data: "toymodel_profile.csv".into(),
            overlay: None,
            panels: vec![p],
        });
    }
    Ok(out)
}

/// Writes the plot scripts into the manifest's output directory. Every
/// data file a script references must exist.
pub fn emit_plots(manifest: &RunManifest) -> Result<Vec<PathBuf>, PlotError> {
    let scripts = plan(manifest)?;
    let mut written = Vec::with_capacity(scripts.len());
    for s in &scripts {
        if !manifest.path_of(&s.data).is_file() {
            return Err(PlotError::MissingArtifact(s.data.clone()));
        }
        let path = manifest.path_of(&s.file);
        fs::write(&path, s.render()).map_err(|source| PlotError::Io { path: path.clone(), source })?;
        written.push(path);
    }
    Ok(written)
}
