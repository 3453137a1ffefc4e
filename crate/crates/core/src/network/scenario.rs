use serde::{Deserialize, Serialize};

use super::{Load, NetworkCase, NetworkError};

/// A probability-weighted load level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub rho: f64,
    pub lambda: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioSet(Vec<Scenario>);

const PROBABILITY_TOL: f64 = 1e-6;

/// Builds a scenario set from `(rho, lambda)` rows.
pub fn build_scenarios(table: &[(f64, f64)]) -> Result<ScenarioSet, NetworkError> {
    let bad = |m: String| Err(NetworkError::Scenario(m));
    if table.is_empty() {
        return bad("no scenarios".into());
    }
    for (s, &(rho, lambda)) in table.iter().enumerate() {
        if !(0.0..=1.0).contains(&rho) {
            return bad(format!("scenario {}: probability {rho} outside [0, 1]", s + 1));
        }
        if !(lambda > 0.0 && lambda.is_finite()) {
            return bad(format!("scenario {}: load factor must be positive, got {lambda}", s + 1));
        }
    }
    let total: f64 = table.iter().map(|r| r.0).sum();
    if (total - 1.0).abs() > PROBABILITY_TOL {
        return bad(format!("probabilities sum to {total}, expected 1"));
    }
    Ok(ScenarioSet(table.iter().map(|&(rho, lambda)| Scenario { rho, lambda }).collect()))
}

/// Reads a CSV with header `rho,lambda`.
pub fn parse_scenarios_csv(text: &str) -> Result<ScenarioSet, NetworkError> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let headers = reader.headers().map_err(|e| NetworkError::Parse { line: 1, message: e.to_string() })?.clone();
    if headers.iter().collect::<Vec<_>>() != ["rho", "lambda"] {
        return Err(NetworkError::Parse {
            line: 1,
            message: format!("expected header `rho,lambda`, got `{}`", headers.iter().collect::<Vec<_>>().join(",")),
        });
    }
    let mut rows = Vec::new();
    for (i, rec) in reader.deserialize::<Scenario>().enumerate() {
        let s = rec.map_err(|e| NetworkError::Parse { line: i + 2, message: e.to_string() })?;
        rows.push((s.rho, s.lambda));
    }
    build_scenarios(&rows)
}

impl ScenarioSet {
    /// Fifteen probability-weighted load levels used for the IEEE 30-bus study.
    pub fn table_one() -> Self {
        const TABLE: [(f64, f64); 15] = [
            (0.02, 1.00),
            (0.14, 0.80),
            (0.04, 0.60),
            (0.02, 1.10),
            (0.14, 0.88),
            (0.04, 0.66),
            (0.02, 1.21),
            (0.14, 0.97),
            (0.04, 0.73),
            (0.02, 1.33),
            (0.14, 1.06),
            (0.04, 0.77),
            (0.02, 1.46),
            (0.14, 1.17),
            (0.04, 0.87),
        ];
        build_scenarios(&TABLE).expect("built-in scenario table is valid")
    }

    /// The deterministic base case.
    pub fn single() -> Self {
        Self(vec![Scenario { rho: 1.0, lambda: 1.0 }])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Scenario> {
        self.0.iter()
    }

    pub fn as_slice(&self) -> &[Scenario] {
        &self.0
    }

    pub fn get(&self, s: usize) -> Option<&Scenario> {
        self.0.get(s)
    }

    /// The same set with every probability multiplied by `factor`; skips the
    /// normalization check so objective linearity can be exercised.
    pub fn with_scaled_probabilities(&self, factor: f64) -> Self {
        Self(self.0.iter().map(|s| Scenario { rho: s.rho * factor, lambda: s.lambda }).collect())
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("rho,lambda\n");
        for s in &self.0 {
            out.push_str(&format!("{},{}\n", s.rho, s.lambda));
        }
        out
    }
}

impl<'a> IntoIterator for &'a ScenarioSet {
    type Item = &'a Scenario;
    type IntoIter = std::slice::Iter<'a, Scenario>;
    fn into_iter(self) -> Self::IntoIter {
        self.0.iter()
    }
}

/// Loads of `case` multiplied by the scenario's load factor.
pub fn scale_loads(case: &NetworkCase, s: &Scenario) -> Vec<Load> {
    case.loads().iter().map(|l| Load { bus: l.bus, p_base: s.lambda * l.p_base, q_base: s.lambda * l.q_base }).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::ieee30;
    use proptest::prelude::*;

    #[test]
    fn table_one_has_fifteen_rows_summing_to_one() {
        let set = ScenarioSet::table_one();
        assert_eq!(set.len(), 15);
        let total: f64 = set.iter().map(|s| s.rho).sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn single_row_set() {
        let set = build_scenarios(&[(1.0, 1.0)]).unwrap();
        assert_eq!(set, ScenarioSet::single());
    }

    #[test]
    fn rejects_probabilities_not_summing_to_one() {
        let err = build_scenarios(&[(0.5, 0.8), (0.4, 1.2)]).unwrap_err();
        assert!(err.to_string().contains("0.9"), "{err}");
    }

    #[test]
    fn rejects_nonpositive_load_factor() {
        assert!(build_scenarios(&[(1.0, 0.0)]).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let set = ScenarioSet::table_one();
        assert_eq!(parse_scenarios_csv(&set.to_csv()).unwrap(), set);
    }

    #[test]
    fn csv_header_checked() {
        assert!(parse_scenarios_csv("p,l\n1,1\n").is_err());
        assert!(matches!(parse_scenarios_csv("rho,lambda\n1,abc\n"), Err(NetworkError::Parse { line: 2, .. })));
    }

    #[test]
    fn unit_factor_is_identity() {
        let case = ieee30();
        assert_eq!(scale_loads(&case, &Scenario { rho: 1.0, lambda: 1.0 }), case.loads());
    }

    #[test]
    fn peak_factor_on_ieee30() {
        let case = ieee30();
        let loads = scale_loads(&case, &Scenario { rho: 0.02, lambda: 1.46 });
        let total: f64 = loads.iter().map(|l| l.p_base).sum::<f64>() * case.base_mva();
        assert!((total - 1.46 * 283.4).abs() < 1e-9, "{total}");
    }

    #[test]
    fn scaling_does_not_compound() {
        let case = ieee30();
        let s = Scenario { rho: 0.04, lambda: 0.6 };
        let first = scale_loads(&case, &s);
        let second = scale_loads(&case, &s);
        assert_eq!(first, second);
        assert_eq!(case, ieee30());
    }

    proptest! {
        #[test]
        fn scaling_preserves_count_and_buses(lambda in 0.01f64..3.0) {
            let case = ieee30();
            let loads = scale_loads(&case, &Scenario { rho: 1.0, lambda });
            prop_assert_eq!(loads.len(), case.loads().len());
            for (a, b) in loads.iter().zip(case.loads()) {
                prop_assert_eq!(a.bus, b.bus);
                prop_assert!((a.p_base - lambda * b.p_base).abs() <= 1e-15);
            }
        }
    }
}
