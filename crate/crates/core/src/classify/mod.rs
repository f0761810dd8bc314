//! Linear SVM on code vectors or bags of SAX words, with leave-one-out model
//! selection.

mod cv;
mod features;
pub(crate) mod svm;

pub use cv::{
    grid_search, loo_cv, majority_loo_error, sax_bag, select_c, BagOptions, GridPoint, GridResult,
    GridRow, GridSpace,
};
pub use features::{Encoding, FeatureMatrix, SparseVec, Vocabulary};
pub use svm::{svm_objective, train_svm, SvmConfig, SvmModel};
