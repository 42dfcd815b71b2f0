pub mod activation;
pub mod mlp;
pub mod perceptron;
pub mod svm;

use serde::{Deserialize, Serialize};

pub use activation::Activation;
pub use mlp::{mlp_init, mlp_train, MlpConfig, MlpModel, MlpTraining};
pub use perceptron::Perceptron;
pub use svm::{
    kkt_violations, svm_train_binary, svm_train_multiclass, Kernel, KernelKind, MulticlassScheme, SvmBinary,
    SvmConfig, SvmMulticlass,
};

use crate::error::{EmgError, Result};
use crate::linalg::Matrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClassifierKind {
    Svm,
    Ann,
}

impl ClassifierKind {
    pub fn name(self) -> &'static str {
        match self {
            ClassifierKind::Svm => "svm",
            ClassifierKind::Ann => "ann",
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub mlp: MlpConfig,
    pub svm: SvmConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ClassifierModel {
    Ann(MlpModel),
    Svm(SvmMulticlass),
}

/// A trained model together with what training recorded.
#[derive(Debug, Clone, PartialEq)]
pub struct Trained {
    pub model: ClassifierModel,
    /// Empty for the SVM.
    pub loss_history: Vec<f64>,
}

pub fn train(kind: ClassifierKind, x: &Matrix, y: &[usize], n_classes: usize, cfg: &TrainConfig) -> Result<Trained> {
    match kind {
        ClassifierKind::Ann => {
            let t = mlp_train(x, y, n_classes, &cfg.mlp)?;
            Ok(Trained {
                model: ClassifierModel::Ann(t.model),
                loss_history: t.loss_history,
            })
        }
        ClassifierKind::Svm => Ok(Trained {
            model: ClassifierModel::Svm(svm_train_multiclass(x, y, n_classes, &cfg.svm)?),
            loss_history: Vec::new(),
        }),
    }
}

impl ClassifierModel {
    pub fn input_dim(&self) -> usize {
        match self {
            ClassifierModel::Ann(m) => m.input_dim(),
            ClassifierModel::Svm(m) => m.models.first().map_or(0, |p| p.model.support_vectors.cols()),
        }
    }

    /// Predicted label per row. An input with no rows gives an empty vector.
    pub fn predict(&self, x: &Matrix) -> Result<Vec<usize>> {
        if x.rows() == 0 {
            return Ok(Vec::new());
        }
        if x.cols() != self.input_dim() {
            return Err(EmgError::DimensionMismatch {
                expected: self.input_dim(),
                actual: x.cols(),
            });
        }
        x.row_iter()
            .map(|row| match self {
                ClassifierModel::Ann(m) => m.predict_one(row),
                ClassifierModel::Svm(m) => m.predict_one(row),
            })
            .collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model serializes")
    }
}
