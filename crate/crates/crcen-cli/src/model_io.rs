//! JSON model format.
//!
//! Layout: `layer_sizes` (input, hidden..., 1), `activation` (name of the
//! hidden nonlinearity), `weights` (one flat row-major array per layer,
//! shaped `layer_sizes[l] x layer_sizes[l+1]`), `biases` (one array per
//! layer), and an optional `standardizer` (per-feature means/stds applied
//! before the network when the model was trained on standardized features).

use std::path::Path;

use anyhow::{Context, Result};
use crcen_core::data::Standardizer;
use crcen_core::{Activation, Matrix, MlpModel};
use serde::{Deserialize, Serialize};

#[derive(Debug, Serialize, Deserialize)]
pub struct ModelFile {
    pub layer_sizes: Vec<usize>,
    pub activation: String,
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub standardizer: Option<Standardizer>,
}

pub fn save_model(path: &Path, model: &MlpModel, standardizer: Option<&Standardizer>) -> Result<()> {
    let file = ModelFile {
        layer_sizes: model.layer_sizes().to_vec(),
        activation: model.hidden_activation().name().to_string(),
        weights: model.weights().iter().map(|w| w.data().to_vec()).collect(),
        biases: model.biases().to_vec(),
        standardizer: standardizer.cloned(),
    };
    let json = serde_json::to_string_pretty(&file)?;
    std::fs::write(path, json + "\n").with_context(|| format!("cannot write {}", path.display()))
}

pub fn load_model(path: &Path) -> Result<(MlpModel, Option<Standardizer>)> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read {}", path.display()))?;
    let file: ModelFile =
        serde_json::from_str(&text).with_context(|| format!("invalid model JSON in {}", path.display()))?;
    let activation = Activation::parse(&file.activation)?;
    let mut weights = Vec::with_capacity(file.weights.len());
    for (l, data) in file.weights.into_iter().enumerate() {
        let (rows, cols) = (file.layer_sizes[l], file.layer_sizes[l + 1]);
        weights.push(Matrix::from_vec(rows, cols, data)?);
    }
    let model = MlpModel::from_parts(file.layer_sizes, weights, file.biases, activation)?;
    Ok((model, file.standardizer))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crcen_core::trainer::predict_proba;
    use crcen_core::RngStream;

    #[test]
    fn roundtrip_preserves_predictions_exactly() {
        let mut rng = RngStream::new(12);
        let model = MlpModel::init(&[4, 6, 1], Activation::Tanh, &mut rng).unwrap();
        let x = Matrix::from_vec(8, 4, rng.sample_normal(0.0, 2.0, 32).unwrap()).unwrap();
        let before = predict_proba(&model, &x).unwrap();

        let f = tempfile::NamedTempFile::new().unwrap();
        save_model(f.path(), &model, None).unwrap();
        let (loaded, std) = load_model(f.path()).unwrap();
        assert!(std.is_none());
        assert_eq!(loaded, model);
        assert_eq!(predict_proba(&loaded, &x).unwrap(), before);
    }

    #[test]
    fn standardizer_roundtrips() {
        let mut rng = RngStream::new(13);
        let model = MlpModel::init(&[2, 1], Activation::Sigmoid, &mut rng).unwrap();
        let tf = Standardizer::from_parts(vec![1.0, -2.0], vec![3.0, 0.5]).unwrap();
        let f = tempfile::NamedTempFile::new().unwrap();
        save_model(f.path(), &model, Some(&tf)).unwrap();
        let (_, loaded) = load_model(f.path()).unwrap();
        assert_eq!(loaded.unwrap(), tf);
    }

    #[test]
    fn mangled_shapes_are_rejected() {
        let f = tempfile::NamedTempFile::new().unwrap();
        std::fs::write(
            f.path(),
            r#"{"layer_sizes":[2,1],"activation":"sigmoid","weights":[[1.0]],"biases":[[0.0]]}"#,
        )
        .unwrap();
        assert!(load_model(f.path()).is_err());
    }
}
