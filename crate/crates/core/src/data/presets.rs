use super::SplitSpec;

/// Known benchmark layouts: variable count, split and forecast horizons.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetPreset {
    pub name: &'static str,
    pub num_variables: usize,
    pub split: SplitSpec,
    pub horizons: [usize; 4],
    pub frequency: &'static str,
    pub has_date_column: bool,
}

pub const PRESET_NAMES: &[&str] = &[
    "ETTh1", "ETTh2", "ETTm1", "ETTm2", "Weather", "ECL", "Traffic", "Solar", "PEMS03", "PEMS04",
    "PEMS07", "PEMS08",
];

const LONG: [usize; 4] = [96, 192, 336, 720];
const SHORT: [usize; 4] = [12, 24, 48, 96];

/// Looks up a preset by name (case-insensitive).
pub fn preset(name: &str) -> Option<DatasetPreset> {
    let r712 = SplitSpec::Ratios {
        train: 0.7,
        val: 0.1,
        test: 0.2,
    };
    let r622 = SplitSpec::Ratios {
        train: 0.6,
        val: 0.2,
        test: 0.2,
    };
    let p = |name, n, split, horizons, frequency, has_date_column| DatasetPreset {
        name,
        num_variables: n,
        split,
        horizons,
        frequency,
        has_date_column,
    };
    Some(match name.to_ascii_lowercase().as_str() {
        "etth1" => p("ETTh1", 7, SplitSpec::ett_hourly(), LONG, "1 hour", true),
        "etth2" => p("ETTh2", 7, SplitSpec::ett_hourly(), LONG, "1 hour", true),
        "ettm1" => p("ETTm1", 7, SplitSpec::ett_minute(), LONG, "15min", true),
        "ettm2" => p("ETTm2", 7, SplitSpec::ett_minute(), LONG, "15min", true),
        "weather" => p("Weather", 21, r712, LONG, "10min", true),
        "ecl" | "electricity" => p("ECL", 321, r712, LONG, "1 hour", true),
        "traffic" => p("Traffic", 862, r712, LONG, "1 hour", true),
        "solar" | "solar-energy" => p("Solar", 137, r712, LONG, "10min", false),
        "pems03" => p("PEMS03", 358, r622, SHORT, "5min", false),
        "pems04" => p("PEMS04", 307, r622, SHORT, "5min", false),
        "pems07" => p("PEMS07", 883, r622, SHORT, "5min", false),
        "pems08" => p("PEMS08", 170, r622, SHORT, "5min", false),
        _ => return None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_name_resolves() {
        for name in PRESET_NAMES {
            let p = preset(name).unwrap();
            assert_eq!(&p.name, name);
            p.split.validate().unwrap();
        }
        assert_eq!(preset("etth1").unwrap().num_variables, 7);
        assert_eq!(preset("PEMS04").unwrap().horizons, [12, 24, 48, 96]);
        assert!(preset("m4").is_none());
    }
}
