//! Pure statistics: question means, section averages, percentiles and KDE.

use std::f64::consts::PI;

use serde::Serialize;

use crate::domain::{CourseKey, EvaluationRecord, InstructorRef, QuestionCategory};
use crate::error::StatsError;

pub const GRID_POINTS: usize = 201;

/// Rounds `num / den` half-up to `decimals` places using integer arithmetic.
fn round_ratio(num: u128, den: u128, decimals: u32) -> f64 {
    let scale = 10u128.pow(decimals);
    let scaled = (2 * num * scale + den) / (2 * den);
    scaled as f64 / scale as f64
}

/// Rounds half away from zero to `decimals` places.
pub fn round_to(x: f64, decimals: i32) -> f64 {
    let scale = 10f64.powi(decimals);
    (x * scale).round() / scale
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuestionStats {
    pub question_id: String,
    /// Absent when nobody answered.
    pub mean: Option<f64>,
    pub histogram: [u32; 5],
    pub respondents: u64,
}

pub fn question_stats(record: &EvaluationRecord) -> QuestionStats {
    histogram_stats(&record.question_id, record.responses)
}

pub fn histogram_stats(question_id: &str, histogram: [u32; 5]) -> QuestionStats {
    let respondents: u64 = histogram.iter().map(|&n| u64::from(n)).sum();
    let weighted: u128 = histogram
        .iter()
        .zip(1u128..)
        .map(|(&n, k)| k * u128::from(n))
        .sum();
    let mean = (respondents > 0).then(|| round_ratio(weighted, u128::from(respondents), 4));
    QuestionStats {
        question_id: question_id.to_string(),
        mean,
        histogram,
        respondents,
    }
}

/// Unrounded mean of a histogram, if anyone answered.
fn exact_mean(histogram: [u32; 5]) -> Option<f64> {
    let n: u64 = histogram.iter().map(|&c| u64::from(c)).sum();
    let weighted: u64 = histogram.iter().zip(1u64..).map(|(&c, k)| k * u64::from(c)).sum();
    (n > 0).then(|| weighted as f64 / n as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    Course,
    Instructor,
}

impl std::str::FromStr for Metric {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "course" => Ok(Metric::Course),
            "instructor" => Ok(Metric::Instructor),
            _ => Err(format!("unknown metric `{s}` (expected course or instructor)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SectionAverages {
    pub course_key: CourseKey,
    pub instructor: InstructorRef,
    pub avg_course_rating: Option<f64>,
    pub avg_instructor_rating: Option<f64>,
}

impl SectionAverages {
    pub fn metric(&self, metric: Metric) -> Option<f64> {
        match metric {
            Metric::Course => self.avg_course_rating,
            Metric::Instructor => self.avg_instructor_rating,
        }
    }
}

fn mean(values: impl IntoIterator<Item = f64>) -> Option<f64> {
    let (sum, n) = values
        .into_iter()
        .fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum / n as f64)
}

/// Averages of one section instance. `other`-category questions are ignored.
pub fn section_averages(records: &[EvaluationRecord]) -> Result<SectionAverages, StatsError> {
    let first = records.first().ok_or(StatsError::MixedSection)?;
    if records
        .iter()
        .any(|r| r.instructor != first.instructor || r.course_key != first.course_key)
    {
        return Err(StatsError::MixedSection);
    }
    let category_mean = |category| {
        mean(
            records
                .iter()
                .filter(|r| r.question_category == category)
                .filter_map(|r| exact_mean(r.responses)),
        )
        .map(|m| round_to(m, 4))
    };
    Ok(SectionAverages {
        course_key: first.course_key.clone(),
        instructor: first.instructor,
        avg_course_rating: category_mean(QuestionCategory::Course),
        avg_instructor_rating: category_mean(QuestionCategory::Instructor),
    })
}

/// Splits records into section instances, keeping first-seen order.
pub fn group_sections(records: &[EvaluationRecord]) -> Vec<Vec<EvaluationRecord>> {
    let mut groups: Vec<Vec<EvaluationRecord>> = Vec::new();
    for r in records {
        match groups
            .iter_mut()
            .find(|g| g[0].instructor == r.instructor && g[0].course_key == r.course_key)
        {
            Some(g) => g.push(r.clone()),
            None => groups.push(vec![r.clone()]),
        }
    }
    groups
}

/// Section averages for every section instance in `records`.
pub fn all_section_averages(records: &[EvaluationRecord]) -> Vec<SectionAverages> {
    group_sections(records)
        .iter()
        .map(|g| section_averages(g).expect("grouped by section"))
        .collect()
}

/// Unweighted mean of the chosen per-section average, skipping sections without data.
pub fn mean_of_sections<'a>(
    sections: impl IntoIterator<Item = &'a SectionAverages>,
    metric: Metric,
) -> Option<f64> {
    mean(sections.into_iter().filter_map(|s| s.metric(metric))).map(|m| round_to(m, 4))
}

/// Mid-rank percentile of `value` within `population`, rounded to one decimal.
pub fn percentile_rank(value: f64, population: &[f64]) -> Result<f64, StatsError> {
    let below = population.iter().filter(|&&p| p < value).count() as u128;
    let equal = population.iter().filter(|&&p| p == value).count() as u128;
    if equal == 0 {
        return Err(StatsError::ValueNotMember);
    }
    let n = population.len() as u128;
    // 100 * (below + equal / 2) / n
    Ok(round_ratio(100 * (2 * below + equal), 2 * n, 1))
}

/// Scott's rule: unbiased sample standard deviation times n^(-1/5).
pub fn kde_bandwidth(samples: &[f64]) -> Result<f64, StatsError> {
    let n = samples.len();
    if n < 2 {
        return Err(StatsError::DegenerateSample);
    }
    let m = samples.iter().sum::<f64>() / n as f64;
    let var = samples.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1) as f64;
    let s = var.sqrt();
    if s.is_nan() || s <= 0.0 || !s.is_finite() {
        return Err(StatsError::DegenerateSample);
    }
    Ok(s * (n as f64).powf(-0.2))
}

/// A Gaussian kernel density estimate.
#[derive(Debug, Clone)]
pub struct GaussianKde {
    samples: Vec<f64>,
    bandwidth: f64,
}

impl GaussianKde {
    pub fn new(samples: &[f64]) -> Result<Self, StatsError> {
        let bandwidth = kde_bandwidth(samples)?;
        Ok(Self {
            samples: samples.to_vec(),
            bandwidth,
        })
    }

    pub fn bandwidth(&self) -> f64 {
        self.bandwidth
    }

    pub fn density(&self, x: f64) -> f64 {
        let h = self.bandwidth;
        let norm = 1.0 / ((2.0 * PI).sqrt() * self.samples.len() as f64 * h);
        norm * self
            .samples
            .iter()
            .map(|s| {
                let z = (x - s) / h;
                (-0.5 * z * z).exp()
            })
            .sum::<f64>()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Highlight {
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DistributionCurve {
    pub grid: Vec<f64>,
    pub density: Vec<f64>,
    pub bandwidth: f64,
    pub cohort_n: usize,
    pub highlight: Option<Highlight>,
}

impl DistributionCurve {
    pub fn trapezoid_integral(&self) -> f64 {
        self.grid
            .windows(2)
            .zip(self.density.windows(2))
            .map(|(x, y)| (x[1] - x[0]) * (y[0] + y[1]) / 2.0)
            .sum()
    }

    /// Grid point with the highest density (first one on ties).
    pub fn argmax(&self) -> f64 {
        let mut best = 0;
        for (i, d) in self.density.iter().enumerate() {
            if *d > self.density[best] {
                best = i;
            }
        }
        self.grid[best]
    }
}

/// Evaluates the KDE of `samples` on 201 points spanning the rating scale
/// padded by three bandwidths.
pub fn kde_curve(samples: &[f64], highlight: Option<f64>) -> Result<DistributionCurve, StatsError> {
    let kde = GaussianKde::new(samples)?;
    let h = kde.bandwidth();
    let lo = samples.iter().copied().fold(1.0, f64::min) - 3.0 * h;
    let hi = samples.iter().copied().fold(5.0, f64::max) + 3.0 * h;
    let step = (hi - lo) / (GRID_POINTS - 1) as f64;
    let grid: Vec<f64> = (0..GRID_POINTS)
        .map(|i| if i == GRID_POINTS - 1 { hi } else { lo + step * i as f64 })
        .collect();
    let density = grid.iter().map(|&x| kde.density(x)).collect();
    Ok(DistributionCurve {
        grid,
        density,
        bandwidth: h,
        cohort_n: samples.len(),
        highlight: highlight.map(|value| Highlight { value }),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{Term, UserId};

    fn rec(q: &str, cat: QuestionCategory, responses: [u32; 5]) -> EvaluationRecord {
        EvaluationRecord {
            instructor: InstructorRef::User("00000000-0000-4000-8000-000000000001".parse::<UserId>().unwrap()),
            course_key: CourseKey {
                prefix: "CSCE".into(),
                number: "145".into(),
                section: "001".into(),
                term: Term::Fall,
                year: 2023,
            },
            question_id: q.into(),
            question_text: String::new(),
            question_category: cat,
            responses,
            enrollment: None,
        }
    }

    #[test]
    fn question_means() {
        let s = histogram_stats("Q", [0, 0, 1, 1, 0]);
        assert_eq!((s.mean, s.respondents), (Some(3.5), 2));
        assert_eq!(histogram_stats("Q", [5, 0, 0, 0, 0]).mean, Some(1.0));
        let empty = histogram_stats("Q", [0; 5]);
        assert_eq!((empty.mean, empty.respondents), (None, 0));
        // (1 + 2*2) / 3 = 1.66666...
        assert_eq!(histogram_stats("Q", [1, 2, 0, 0, 0]).mean, Some(1.6667));
        // (1 + 2*7) / 8 = 1.875 exactly
        assert_eq!(histogram_stats("Q", [1, 7, 0, 0, 0]).mean, Some(1.875));
    }

    #[test]
    fn section_average_examples() {
        use QuestionCategory::*;
        let a = section_averages(&[rec("A", Course, [0, 0, 1, 1, 0]), rec("B", Course, [0, 0, 0, 1, 1])])
            .unwrap();
        assert_eq!(a.avg_course_rating, Some(4.0));
        assert_eq!(a.avg_instructor_rating, None);

        let b = section_averages(&[rec("A", Instructor, [0, 0, 0, 0, 3])]).unwrap();
        assert_eq!((b.avg_course_rating, b.avg_instructor_rating), (None, Some(5.0)));

        let c = section_averages(&[rec("A", Other, [0, 0, 0, 0, 3])]).unwrap();
        assert_eq!((c.avg_course_rating, c.avg_instructor_rating), (None, None));

        let no_answers = section_averages(&[rec("A", Course, [0; 5])]).unwrap();
        assert_eq!(no_answers.avg_course_rating, None);
    }

    #[test]
    fn section_average_rejects_mixed_input() {
        let mut other = rec("B", QuestionCategory::Course, [1; 5]);
        other.course_key.section = "002".into();
        let err = section_averages(&[rec("A", QuestionCategory::Course, [1; 5]), other]).unwrap_err();
        assert_eq!(err, StatsError::MixedSection);
        assert_eq!(section_averages(&[]).unwrap_err(), StatsError::MixedSection);
    }

    #[test]
    fn percentile_examples() {
        assert_eq!(percentile_rank(4.2, &[4.2]), Ok(50.0));
        assert_eq!(percentile_rank(4.0, &[3.0, 4.0, 5.0]), Ok(50.0));
        assert_eq!(percentile_rank(4.0, &[2.0, 2.0, 4.0, 4.0]), Ok(75.0));
        assert_eq!(percentile_rank(1.0, &[2.0]), Err(StatsError::ValueNotMember));
        // 100 * 0.5 / 3 = 16.666.. -> 16.7
        assert_eq!(percentile_rank(1.0, &[1.0, 2.0, 3.0]), Ok(16.7));
    }

    #[test]
    fn bandwidth_examples() {
        let h = kde_bandwidth(&[3.0, 5.0]).unwrap();
        assert!((h - 2f64.sqrt() * 2f64.powf(-0.2)).abs() < 1e-12);
        assert!((h - 1.2311).abs() < 1e-3);
        assert_eq!(kde_bandwidth(&[4.0, 4.0, 4.0]), Err(StatsError::DegenerateSample));
        assert_eq!(kde_bandwidth(&[4.0]), Err(StatsError::DegenerateSample));
        assert_eq!(kde_bandwidth(&[]), Err(StatsError::DegenerateSample));
    }

    #[test]
    fn curve_symmetric_for_two_samples() {
        let c = kde_curve(&[3.0, 5.0], None).unwrap();
        assert_eq!(c.grid.len(), GRID_POINTS);
        // Grid [1 - 3h, 5 + 3h] is not centred on 4, so compare the density
        // function itself at mirrored offsets.
        let kde = GaussianKde::new(&[3.0, 5.0]).unwrap();
        for t in [0.0, 0.3, 1.1, 2.5] {
            assert!((kde.density(3.0 + t) - kde.density(5.0 - t)).abs() < 1e-15);
        }
    }

    #[test]
    fn curve_integrates_to_one() {
        let c = kde_curve(&[2.0, 3.0, 4.0, 5.0], Some(3.0)).unwrap();
        let area = c.trapezoid_integral();
        assert!((0.99..=1.01).contains(&area), "{area}");
        assert_eq!(c.highlight, Some(Highlight { value: 3.0 }));
        assert!(c.grid.windows(2).all(|w| w[0] < w[1]));
    }
}
