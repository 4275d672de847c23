#include "dpa/metrics.hpp"

#include <cmath>
#include <limits>

namespace dpa {

std::optional<double> dpms(const std::vector<DiversityPreference>& prefs,
                           const std::vector<SparseMatrix>& matrices, const Vector& decision) {
  if (prefs.size() != matrices.size())
    throw std::invalid_argument("prefs/matrices dimension mismatch");
  double sum = 0.0;
  int included = 0;
  for (size_t h = 0; h < prefs.size(); ++h) {
    const double dn = prefs[h].counts.norm();
    if (dn <= 0.0) continue;
    ++included;
    const Vector r = matrices[h] * decision;
    const double rn = r.norm();
    if (rn < 1e-12) continue;  // zero coverage: cosine taken as 0
    sum += prefs[h].counts.dot(r) / (dn * rn);
  }
  if (included == 0) return std::nullopt;
  return sum / static_cast<double>(included);
}

PrecisionRecallF1 precision_recall_f1(const EvaluationRecord& record) {
  if (record.k <= 0) throw std::invalid_argument("k must be positive");
  PrecisionRecallF1 out;
  for (UserId r : record.recommended)
    if (record.actually_added.count(r)) ++out.true_positives;
  out.precision = static_cast<double>(out.true_positives) / static_cast<double>(record.k);
  const std::size_t p = record.actually_added.size();
  if (p > 0) {
    out.recall = static_cast<double>(out.true_positives) / static_cast<double>(p);
    const double denom = out.precision + *out.recall;
    out.f1 = denom > 0.0 ? 2.0 * out.precision * *out.recall / denom : 0.0;
  }
  return out;
}

double dcg(const EvaluationRecord& record) {
  double sum = 0.0;
  for (size_t j = 0; j < record.recommended.size(); ++j) {
    if (record.actually_added.count(record.recommended[j]))
      sum += 1.0 / std::log2(static_cast<double>(j) + 2.0);
  }
  return sum;
}

namespace {
// Continued-fraction core of the incomplete beta function (modified Lentz).
double betacf(double a, double b, double x) {
  constexpr int kMaxIter = 300;
  constexpr double kEps = 3e-14;
  constexpr double kFpMin = 1e-300;
  const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kFpMin) d = kFpMin;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kFpMin) d = kFpMin;
    c = 1.0 + aa / c;
    if (std::abs(c) < kFpMin) c = kFpMin;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kFpMin) d = kFpMin;
    c = 1.0 + aa / c;
    if (std::abs(c) < kFpMin) c = kFpMin;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) break;
  }
  return h;
}
}  // namespace

double regularized_incomplete_beta(double a, double b, double x) {
  if (x < 0.0 || x > 1.0) throw std::domain_error("x outside [0,1]");
  if (x == 0.0 || x == 1.0) return x;
  const double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                          a * std::log(x) + b * std::log(1.0 - x);
  const double front = std::exp(ln_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * betacf(a, b, x) / a;
  return 1.0 - front * betacf(b, a, 1.0 - x) / b;
}

double student_t_two_sided_p(double t, double df) {
  if (df <= 0.0) throw std::domain_error("degrees of freedom must be positive");
  if (std::isinf(t)) return 0.0;
  const double x = df / (df + t * t);
  return regularized_incomplete_beta(df / 2.0, 0.5, x);
}

PairedComparison paired_t_test(const std::vector<std::optional<double>>& a,
                               const std::vector<std::optional<double>>& b) {
  if (a.size() != b.size()) throw std::invalid_argument("paired test needs equal-length series");
  std::vector<double> diffs;
  for (size_t i = 0; i < a.size(); ++i)
    if (a[i] && b[i]) diffs.push_back(*a[i] - *b[i]);

  PairedComparison out;
  out.n = static_cast<int>(diffs.size());
  if (out.n < 2) throw std::invalid_argument("paired test needs at least 2 complete pairs");

  double mean = 0.0;
  for (double d : diffs) mean += d;
  mean /= static_cast<double>(out.n);
  double var = 0.0;
  for (double d : diffs) var += (d - mean) * (d - mean);
  var /= static_cast<double>(out.n - 1);

  out.mean_difference = mean;
  if (var <= 0.0) {
    out.degenerate = true;
    if (mean == 0.0) {
      out.t_statistic = 0.0;
      out.p_value = 1.0;
    } else {
      out.t_statistic = mean > 0 ? std::numeric_limits<double>::infinity()
                                 : -std::numeric_limits<double>::infinity();
      out.p_value = 0.0;
    }
    return out;
  }
  out.t_statistic = mean / std::sqrt(var / static_cast<double>(out.n));
  out.p_value = student_t_two_sided_p(out.t_statistic, static_cast<double>(out.n - 1));
  return out;
}

std::optional<double> mean_of(const std::vector<std::optional<double>>& values) {
  double sum = 0.0;
  int n = 0;
  for (const auto& v : values) {
    if (v) {
      sum += *v;
      ++n;
    }
  }
  if (n == 0) return std::nullopt;
  return sum / static_cast<double>(n);
}

}  // namespace dpa
