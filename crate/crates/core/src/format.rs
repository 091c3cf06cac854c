/// Fixed float formatting for all reports: 17 significant digits in
/// scientific notation, so equal values always print identically.
pub fn fmt_f64(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else if v.is_nan() {
        "null".to_string()
    } else if v > 0.0 {
        "1e999".to_string()
    } else {
        "-1e999".to_string()
    }
}

/// JSON object with keys in insertion order and floats in [`fmt_f64`]
/// form.
#[derive(Debug, Default, Clone)]
pub struct JsonObject {
    fields: Vec<(String, String)>,
}

impl JsonObject {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn num(mut self, key: &str, v: f64) -> Self {
        self.fields.push((key.to_string(), fmt_f64(v)));
        self
    }

    pub fn int(mut self, key: &str, v: usize) -> Self {
        self.fields.push((key.to_string(), v.to_string()));
        self
    }

    pub fn boolean(mut self, key: &str, v: bool) -> Self {
        self.fields.push((key.to_string(), v.to_string()));
        self
    }

    pub fn string(mut self, key: &str, v: &str) -> Self {
        self.fields.push((key.to_string(), quote(v)));
        self
    }

    /// `v` must already be valid JSON.
    pub fn raw(mut self, key: &str, v: String) -> Self {
        self.fields.push((key.to_string(), v));
        self
    }

    pub fn finish(self) -> String {
        let body: Vec<String> = self.fields.into_iter().map(|(k, v)| format!("{}:{v}", quote(&k))).collect();
        format!("{{{}}}", body.join(","))
    }
}

fn quote(s: &str) -> String {
    serde_json::to_string(s).expect("strings always serialize")
}
