use crate::error::{Error, Result};
use crate::numerics::Matrix;

/// CSV with header `f0,…,f{k-1},label`; reals in shortest round-trip form.
pub fn features_to_csv(features: &Matrix, labels: &[usize]) -> Result<String> {
    if labels.len() != features.rows() {
        return Err(Error::Length {
            op: "features_to_csv labels",
            lhs: labels.len(),
            rhs: features.rows(),
        });
    }
    let report = |e: csv::Error| Error::Report(e.to_string());
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header: Vec<String> = (0..features.cols()).map(|j| format!("f{j}")).collect();
    header.push("label".into());
    w.write_record(&header).map_err(report)?;
    let mut record = Vec::with_capacity(features.cols() + 1);
    for (row, label) in features.iter_rows().zip(labels) {
        record.clear();
        record.extend(row.iter().map(f64::to_string));
        record.push(label.to_string());
        w.write_record(&record).map_err(report)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Report(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Report(e.to_string()))
}

/// Inverse of [`features_to_csv`].
pub fn features_from_csv(text: &str) -> Result<(Matrix, Vec<usize>)> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let header = r.headers().map_err(|e| Error::Report(e.to_string()))?.clone();
    let k = header.len().checked_sub(1).filter(|_| header.iter().last() == Some("label"));
    let Some(k) = k else {
        return Err(Error::Report("feature CSV must end with a `label` column".into()));
    };
    let mut values = Vec::new();
    let mut labels = Vec::new();
    for (line, record) in r.records().enumerate() {
        let record = record.map_err(|e| Error::Report(e.to_string()))?;
        let bad = |field: &str| Error::Report(format!("data row {}: cannot parse {field:?}", line + 1));
        for field in record.iter().take(k) {
            let v: f64 = field.trim().parse().map_err(|_| bad(field))?;
            if !v.is_finite() {
                return Err(bad(field));
            }
            values.push(v);
        }
        let label = &record[k];
        labels.push(label.trim().parse().map_err(|_| bad(label))?);
    }
    Ok((Matrix::new(labels.len(), k, values)?, labels))
}
