use super::SelectionError;

/// Correct classification rate: agreements over total.
pub fn ccr(y_true: &[u8], y_pred: &[u8]) -> Result<f64, SelectionError> {
    if y_true.len() != y_pred.len() {
        return Err(SelectionError::LengthMismatch(y_true.len(), y_pred.len()));
    }
    if y_true.is_empty() {
        return Err(SelectionError::Empty);
    }
    let agree = y_true.iter().zip(y_pred).filter(|(a, b)| a == b).count();
    Ok(agree as f64 / y_true.len() as f64)
}
