use serde::Serialize;

use crate::metrics::BoxSummary;

#[derive(Serialize)]
struct Outlier<'a> {
    stratum: &'a str,
    value: f64,
}

#[derive(Serialize)]
struct BoxEntry<'a> {
    group: &'a str,
    median: f64,
    q1: f64,
    q3: f64,
    lo_whisker: f64,
    hi_whisker: f64,
    outliers: Vec<Outlier<'a>>,
    n: usize,
}

/// JSON array with one object per group, in input order.
pub fn render_box_json(summaries: &[(String, BoxSummary)]) -> String {
    let entries: Vec<BoxEntry> = summaries
        .iter()
        .map(|(group, b)| BoxEntry {
            group,
            median: b.median,
            q1: b.q1,
            q3: b.q3,
            lo_whisker: b.lower_whisker,
            hi_whisker: b.upper_whisker,
            outliers: b
                .outliers
                .iter()
                .map(|(s, v)| Outlier { stratum: s, value: *v })
                .collect(),
            n: b.n,
        })
        .collect();
    let mut s = serde_json::to_string_pretty(&entries).expect("box summaries serialize");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::box_summary;
    use serde_json::Value;

    #[test]
    fn one_object_per_group() {
        let a = box_summary(&[("l1".into(), 0.5), ("l2".into(), 1.5), ("l3".into(), 1.0)]).unwrap();
        let b = box_summary(&[("l9".into(), 0.1)]).unwrap();
        let doc = render_box_json(&[("FFNN".into(), a), ("CNN6".into(), b)]);
        let v: Value = serde_json::from_str(&doc).unwrap();
        let arr = v.as_array().unwrap();
        assert_eq!(arr.len(), 2);
        assert_eq!(arr[0]["group"], "FFNN");
        assert_eq!(arr[0]["median"], 1.0);
        assert_eq!(arr[1]["n"], 1);
        assert_eq!(arr[1]["lo_whisker"], 0.1);
        let order = ["group", "median", "q1", "q3", "lo_whisker", "hi_whisker", "outliers", "n"];
        let positions: Vec<usize> = order
            .iter()
            .map(|k| doc.find(&format!("\"{k}\"")).unwrap())
            .collect();
        assert!(positions.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn full_precision_numbers() {
        let b = box_summary(&[("l".into(), 1.0 / 3.0)]).unwrap();
        let doc = render_box_json(&[("g".into(), b)]);
        assert!(doc.contains("0.3333333333333333"));
    }
}
