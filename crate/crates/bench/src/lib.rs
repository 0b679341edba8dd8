//! Inputs shared by the benchmarks.

/// A Java class with `methods` similar methods, each a short pricing
/// routine with a loop and a branch. Every third method repeats the
/// rounding block of the first, so duplicate search has real matches.
pub fn sample_class(methods: usize) -> String {
    let mut s = String::from("class Ledger {\n    private double rate = 0.2;\n    private int[] counts = new int[8];\n\n");
    for i in 0..methods {
        let round = if i % 3 == 0 {
            "        double gross = net * (1 + rate);\n        gross = Math.round(gross * 100) / 100.0;\n".to_string()
        } else {
            format!("        double gross = net * {i} + rate;\n        gross = gross - {i};\n")
        };
        s += &format!(
            "    double total{i}(double net, int n) {{\n{round}        int seen = 0;\n        for (int k = 0; k < n; k++) {{\n            if (counts[k % 8] > {i}) {{\n                seen++;\n            }} else {{\n                counts[k % 8] += k;\n            }}\n        }}\n        return gross + seen;\n    }}\n\n"
        );
    }
    s + "}\n"
}

/// Byte offsets of the rounding block in the first method.
pub fn paste_span(source: &str) -> (usize, usize) {
    let start = source.find("double gross").expect("sample has a paste site");
    let end = source[start..].find("int seen").expect("sample has a paste site") + start;
    (start, source[..end].trim_end().len())
}
