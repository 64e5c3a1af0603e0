use std::collections::HashMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{dispatch_text, BackendDescriptor, BackendError, Candidate, MaskPrediction, MaskPredictor};
use crate::text::MaskedSentence;

/// One line of a prediction table.
///
/// `target` is optional; it disambiguates rows when one sentence is masked
/// for several target words. Rows without it match any target.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TabularRow {
    pub key: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<String>,
    pub candidates: Vec<(String, f64)>,
}

/// Sentence id plus the optional target the row is specific to.
type RowKey = (String, Option<String>);

/// Replays stored predictions keyed by sentence id.
#[derive(Debug, Clone)]
pub struct TabularBackend {
    descriptor: BackendDescriptor,
    rows: HashMap<RowKey, Vec<(String, f64)>>,
}

impl TabularBackend {
    pub fn from_rows(
        descriptor: BackendDescriptor,
        rows: impl IntoIterator<Item = TabularRow>,
    ) -> Result<Self, BackendError> {
        let mut map = HashMap::new();
        for row in rows {
            let key = (row.key, row.target.map(|t| t.to_lowercase()));
            if map.insert(key.clone(), row.candidates).is_some() {
                return Err(BackendError::Config(format!(
                    "duplicate prediction row for {:?}",
                    key.0
                )));
            }
        }
        Ok(TabularBackend {
            descriptor,
            rows: map,
        })
    }

    /// Loads the table named by `descriptor.table`.
    pub fn load(descriptor: BackendDescriptor) -> Result<Self, BackendError> {
        let path = descriptor
            .table
            .clone()
            .ok_or_else(|| BackendError::Config("tabular backend needs a table path".into()))?;
        let rows = read_rows(&path)?;
        Self::from_rows(descriptor, rows)
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

pub fn read_rows(path: &Path) -> Result<Vec<TabularRow>, BackendError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| BackendError::Config(format!("cannot read {}: {e}", path.display())))?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l).map_err(|e| {
                BackendError::Config(format!("{}:{}: {e}", path.display(), i + 1))
            })
        })
        .collect()
}

impl MaskPredictor for TabularBackend {
    fn descriptor(&self) -> &BackendDescriptor {
        &self.descriptor
    }

    fn predict(&self, masked: &MaskedSentence) -> Result<MaskPrediction, BackendError> {
        dispatch_text(masked, &self.descriptor.mask_token)?;
        let id = masked.sentence_id.clone();
        let row = self
            .rows
            .get(&(id.clone(), Some(masked.target_word.to_lowercase())))
            .or_else(|| self.rows.get(&(id.clone(), None)))
            .ok_or(BackendError::NoPredictionRow(id))?;
        let candidates = row
            .iter()
            .map(|(w, c)| Candidate::new(w.clone(), *c))
            .collect();
        Ok(MaskPrediction::from_unsorted(candidates)?)
    }

    fn in_vocab(&self, _word: &str) -> Result<bool, BackendError> {
        Ok(true)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mlm::ValidationError;

    fn masked(id: &str, target: &str) -> MaskedSentence {
        MaskedSentence {
            sentence_id: id.into(),
            target_word: target.into(),
            surface: target.into(),
            target_token_index: 0,
            masked_text: "[MASK] here.".into(),
            placeholder: "[MASK]".into(),
        }
    }

    fn row(key: &str, target: Option<&str>, cands: &[(&str, f64)]) -> TabularRow {
        TabularRow {
            key: key.into(),
            target: target.map(String::from),
            candidates: cands.iter().map(|(w, c)| (w.to_string(), *c)).collect(),
        }
    }

    fn backend(rows: Vec<TabularRow>) -> TabularBackend {
        TabularBackend::from_rows(BackendDescriptor::tabular("mem", "fixture"), rows).unwrap()
    }

    #[test]
    fn identity_lookup() {
        let cands = [("peace", 0.80), ("piece", 0.10), ("state", 0.05), ("calm", 0.03), ("sense", 0.02)];
        let b = backend(vec![row("s1", None, &cands)]);
        let p = b.predict(&masked("s1", "peace")).unwrap();
        let got: Vec<_> = p.candidates().iter().map(|c| (c.word.as_str(), c.confidence)).collect();
        assert_eq!(got, cands);
    }

    #[test]
    fn unsorted_row_resorted() {
        let b = backend(vec![row("s1", None, &[("a", 0.1), ("b", 0.9)])]);
        let p = b.predict(&masked("s1", "a")).unwrap();
        assert_eq!(p.candidates()[0], Candidate::new("b", 0.9));
        assert_eq!(p.candidates()[1], Candidate::new("a", 0.1));
    }

    #[test]
    fn target_specific_rows_win() {
        let b = backend(vec![
            row("s1", None, &[("x", 0.5), ("y", 0.4)]),
            row("s1", Some("peace"), &[("peace", 0.9), ("y", 0.05)]),
        ]);
        assert_eq!(b.predict(&masked("s1", "peace")).unwrap().candidates()[0].word, "peace");
        assert_eq!(b.predict(&masked("s1", "mind")).unwrap().candidates()[0].word, "x");
    }

    #[test]
    fn batch_reports_per_item() {
        let b = backend(vec![
            row("a", None, &[("w", 0.6), ("v", 0.3)]),
            row("c", None, &[("w", 0.5), ("v", 0.4)]),
        ]);
        let items = [masked("a", "w"), masked("b", "w"), masked("c", "w")];
        let out = b.predict_batch(&items);
        assert!(out[0].is_ok());
        assert!(matches!(out[1], Err(BackendError::NoPredictionRow(ref k)) if k == "b"));
        assert!(out[2].is_ok());
        for (i, m) in items.iter().enumerate() {
            if let Ok(p) = &out[i] {
                assert_eq!(p, &b.predict(m).unwrap());
            }
        }
        assert!(b.predict_batch(&[]).is_empty());
    }

    #[test]
    fn invalid_rows_fail_validation() {
        let b = backend(vec![row("a", None, &[("w", 0.6), ("v", -0.1)])]);
        assert!(matches!(
            b.predict(&masked("a", "w")),
            Err(BackendError::Validation(ValidationError::ConfidenceOutOfRange { .. }))
        ));
    }

    #[test]
    fn duplicate_keys_rejected() {
        let r = TabularBackend::from_rows(
            BackendDescriptor::tabular("mem", "f"),
            vec![row("a", None, &[("w", 0.6)]), row("a", None, &[("w", 0.5)])],
        );
        assert!(r.is_err());
    }

    #[test]
    fn missing_placeholder_is_input_error() {
        let b = backend(vec![row("a", None, &[("w", 0.6)])]);
        let mut m = masked("a", "w");
        m.masked_text = "no blank".into();
        assert!(matches!(b.predict(&m), Err(BackendError::Input(_))));
    }
}
