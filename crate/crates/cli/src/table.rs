//! Plain-text metric table rendering.

/// One table row: a label pair (group, model) and the four metrics.
pub struct MetricRow {
    pub group: String,
    pub model: String,
    pub precision: f64,
    pub recall: f64,
    pub f_measure: f64,
    pub accuracy: f64,
}

/// Renders rows as an aligned table with a header, four decimal places per
/// metric.
pub fn render(rows: &[MetricRow]) -> String {
    let group_width = rows
        .iter()
        .map(|r| r.group.len())
        .chain(["group".len()])
        .max()
        .unwrap();
    let model_width = rows
        .iter()
        .map(|r| r.model.len())
        .chain(["model".len()])
        .max()
        .unwrap();

    let mut out = String::new();
    out.push_str(&format!(
        "{:<group_width$}  {:<model_width$}  {:>9}  {:>9}  {:>9}  {:>9}\n",
        "group", "model", "precision", "recall", "f-measure", "accuracy"
    ));
    for row in rows {
        out.push_str(&format!(
            "{:<group_width$}  {:<model_width$}  {:>9.4}  {:>9.4}  {:>9.4}  {:>9.4}\n",
            row.group, row.model, row.precision, row.recall, row.f_measure, row.accuracy
        ));
    }
    out
}
