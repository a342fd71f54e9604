//! Versioned JSON documents for models, datasets and case memories.
//!
//! Every `parse_*` function takes untrusted text and returns a validated
//! value or a `Parse`/`InvalidArgument` error; the `load_*`/`save_*`
//! wrappers add file handling. JSON keeps the files self-describing and
//! the shortest-roundtrip float encoding makes save/load bit-exact.

use crate::casemem::CaseMemory;
use crate::error::{QcbrError, Result};
use crate::preprocess::{IcaModel, PcaModel};
use crate::swp::Dataset;
use crate::vqc::ClassifierModel;
use serde::{Deserialize, Serialize};
use std::path::Path;

pub const FORMAT_VERSION: u32 = 1;

/// A trained classifier plus the feature-reduction models that feed it.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelDocument {
    pub version: u32,
    pub model: ClassifierModel,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pca: Option<PcaModel>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ica: Option<IcaModel>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DatasetDocument {
    pub version: u32,
    pub dataset: Dataset,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MemoryDocument {
    pub version: u32,
    pub memory: CaseMemory,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub classifier: Option<ClassifierModel>,
}

fn check_version(version: u32) -> Result<()> {
    if version != FORMAT_VERSION {
        return Err(QcbrError::Parse(format!(
            "unsupported format version {version}, expected {FORMAT_VERSION}"
        )));
    }
    Ok(())
}

fn validate_model(model: &ClassifierModel) -> Result<()> {
    model.config.validate()?;
    let (num_thetas, num_omegas) = model.config.param_count();
    if model.thetas.len() != num_thetas
        || model.omegas.len() != num_omegas
        || model.alphas.len() != model.num_classes
        || model.class_basis.len() != model.num_classes
    {
        return Err(QcbrError::Parse("parameter vectors do not match the ansatz".into()));
    }
    if model.num_classes < 2 || model.num_classes > (1 << model.config.num_qubits) {
        return Err(QcbrError::Parse("class count does not fit the register".into()));
    }
    let dim = 1usize << model.config.num_qubits;
    if model.class_basis.iter().any(|&b| b >= dim) {
        return Err(QcbrError::Parse("class basis state out of range".into()));
    }
    let finite = model
        .thetas
        .iter()
        .chain(&model.omegas)
        .chain(&model.alphas)
        .chain(&model.feat_min)
        .chain(&model.feat_max)
        .all(|v| v.is_finite());
    if !finite {
        return Err(QcbrError::Parse("non-finite model parameter".into()));
    }
    Ok(())
}

pub fn parse_model_document(text: &str) -> Result<ModelDocument> {
    let doc: ModelDocument =
        serde_json::from_str(text).map_err(|e| QcbrError::Parse(e.to_string()))?;
    check_version(doc.version)?;
    validate_model(&doc.model)?;
    Ok(doc)
}

pub fn parse_dataset_document(text: &str) -> Result<DatasetDocument> {
    let doc: DatasetDocument =
        serde_json::from_str(text).map_err(|e| QcbrError::Parse(e.to_string()))?;
    check_version(doc.version)?;
    let d = &doc.dataset;
    if d.coordinates.len() != d.params.num_patients {
        return Err(QcbrError::Parse("coordinate count does not match num_patients".into()));
    }
    for case in &d.cases {
        case.instance.validate()?;
        if case.instance.num_patients() != d.params.num_patients
            || case.instance.num_workers != d.params.num_workers
        {
            return Err(QcbrError::Parse("case shape differs from dataset parameters".into()));
        }
        if case.features.iter().any(|v| !v.is_finite()) {
            return Err(QcbrError::Parse("non-finite feature".into()));
        }
    }
    Ok(doc)
}

pub fn parse_memory_document(text: &str) -> Result<MemoryDocument> {
    let mut doc: MemoryDocument =
        serde_json::from_str(text).map_err(|e| QcbrError::Parse(e.to_string()))?;
    check_version(doc.version)?;
    for case in &doc.memory.cases {
        let expected = case.routes.num_nodes * (case.routes.num_nodes.max(1) - 1);
        if case.routes.bits.len() != expected {
            return Err(QcbrError::Parse("route matrix shape mismatch".into()));
        }
        if case.routes.bits.iter().any(|&b| b > 1) {
            return Err(QcbrError::Parse("route bits must be 0 or 1".into()));
        }
        if case.features.iter().chain(&case.initial_point).any(|v| !v.is_finite()) {
            return Err(QcbrError::Parse("non-finite stored value".into()));
        }
    }
    if let Some(model) = &doc.classifier {
        validate_model(model)?;
    }
    doc.memory.rebuild_index();
    Ok(doc)
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| QcbrError::Parse(e.to_string()))?;
    std::fs::write(path, text)?;
    Ok(())
}

pub fn save_model(path: &Path, doc: &ModelDocument) -> Result<()> {
    write_json(path, doc)
}

pub fn load_model(path: &Path) -> Result<ModelDocument> {
    parse_model_document(&std::fs::read_to_string(path)?)
}

pub fn save_dataset(path: &Path, dataset: &Dataset) -> Result<()> {
    write_json(path, &DatasetDocument { version: FORMAT_VERSION, dataset: dataset.clone() })
}

pub fn load_dataset(path: &Path) -> Result<Dataset> {
    Ok(parse_dataset_document(&std::fs::read_to_string(path)?)?.dataset)
}

pub fn save_memory(path: &Path, doc: &MemoryDocument) -> Result<()> {
    write_json(path, doc)
}

pub fn load_memory(path: &Path) -> Result<MemoryDocument> {
    parse_memory_document(&std::fs::read_to_string(path)?)
}
