#pragma once

// Evaluation metrics: diversity preference matching score, precision /
// recall / F1 against test-period additions, binary-relevance DCG, and
// per-method aggregation with paired t-tests.

#include "dpa/core.hpp"

#include <map>

namespace dpa {

struct EvaluationRecord {
  UserId user = 0;
  std::vector<UserId> recommended;       // ordered, length k
  std::unordered_set<UserId> actually_added;
  int k = 0;
};

struct PrecisionRecallF1 {
  double precision = 0.0;
  std::optional<double> recall;  // empty when no test-period additions
  double f1 = 0.0;
  int true_positives = 0;
};

/// Mean cosine between preference and recommended diversity over included
/// dimensions; a zero-norm r contributes 0 but stays in the denominator.
/// Empty optional when every dimension is excluded.
std::optional<double> dpms(const std::vector<DiversityPreference>& prefs,
                           const std::vector<SparseMatrix>& matrices, const Vector& decision);

PrecisionRecallF1 precision_recall_f1(const EvaluationRecord& record);

/// DCG with binary relevance: a relevant item at 1-indexed rank j adds
/// 1 / log2(j + 1).
double dcg(const EvaluationRecord& record);

struct PairedComparison {
  double mean_difference = 0.0;
  double t_statistic = 0.0;
  double p_value = 1.0;
  int n = 0;
  bool degenerate = false;  // zero variance of the differences
};

/// Two-sided paired t-test over per-user values; entries where either side
/// is missing are dropped pairwise.
PairedComparison paired_t_test(const std::vector<std::optional<double>>& a,
                               const std::vector<std::optional<double>>& b);

/// Mean of the present values; empty when none are present.
std::optional<double> mean_of(const std::vector<std::optional<double>>& values);

/// Regularized incomplete beta function I_x(a, b); used for the Student-t
/// CDF. Exposed for testing.
double regularized_incomplete_beta(double a, double b, double x);

/// Two-sided p-value of a t statistic with df degrees of freedom.
double student_t_two_sided_p(double t, double df);

}  // namespace dpa
