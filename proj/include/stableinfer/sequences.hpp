#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace stableinfer {

/// Asymptotic form C n^-r (log n)^-s.
struct PowerLogForm {
  double amplitude = 0.0;
  double exponent = 0.0;
  double log_exponent = 0.0;

  double at(std::size_t n) const;
  /// Form of the sequence raised elementwise to the power p.
  PowerLogForm pow(double p) const;
  /// Form of this / other^power.
  PowerLogForm over(const PowerLogForm& other, double power = 1.0) const;
};

enum class Summability { summable, not_summable, inconclusive };

const char* to_string(Summability s);

/// sum_n a_n^p < infinity for a_n of the given form (integral test).
Summability lp_summable(const PowerLogForm& form, double p);

/// sum_n |a_n^alpha log a_n| < infinity.
Summability orlicz_summable(const PowerLogForm& form, double alpha);

/// Beyond the explicit entries: zero, a constant, or value * n^-exponent.
struct TailRule {
  enum class Kind { zero, constant, power_law };
  Kind kind = Kind::zero;
  double value = 0.0;
  double exponent = 0.0;
};

struct PowerLaw {
  double amplitude = 1.0;
  double exponent = 1.0;
};

/// C n^-r (log n)^-s for n >= 2; the n = 1 entry is 0.
struct PowerLogLaw {
  double amplitude = 1.0;
  double exponent = 1.0;
  double log_exponent = 1.0;
};

struct ExplicitValues {
  std::vector<double> values;  // entries n = 1 .. values.size()
  TailRule tail;
};

/// A deterministic real sequence indexed from n = 1.
class CoefficientSequence {
 public:
  using Kind = std::variant<PowerLaw, PowerLogLaw, ExplicitValues>;

  CoefficientSequence() : kind_(ExplicitValues{}) {}
  explicit CoefficientSequence(Kind kind) : kind_(std::move(kind)) {}

  static CoefficientSequence zero() { return CoefficientSequence(); }
  static CoefficientSequence constant(double c);
  static CoefficientSequence power_law(double amplitude, double exponent);
  static CoefficientSequence power_log(double amplitude, double exponent, double log_exponent);
  static CoefficientSequence explicit_values(std::vector<double> values, TailRule tail = {});

  /// Entry n (1-based); throws OutOfRange for n = 0.
  double at(std::size_t n) const;
  /// Entries 1 .. count.
  std::vector<double> values(std::size_t count) const;

  /// Exact asymptotic form for the closed-form kinds.
  std::optional<PowerLogForm> closed_form() const;
  bool is_identically_zero() const;
  /// Largest |entry| over 1..count.
  double max_abs(std::size_t count) const;

  const Kind& kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

/// Sequence scaled entrywise.
CoefficientSequence scaled(const CoefficientSequence& seq, double factor);

struct FormFit {
  PowerLogForm form;
  double residual_rms = 0.0;
  bool all_zero = false;
  bool reliable = true;  // false when the residual exceeds the fit tolerance
};

/// Least-squares fit of log |a_n| = c - r log n - s log log n over a
/// geometric grid of indices in [max(8, depth / 1024), depth].  Zero entries
/// are skipped; an all-zero window yields amplitude 0.
FormFit fit_power_log(const CoefficientSequence& seq, std::size_t depth);

/// Same fit for an arbitrary index function.
FormFit fit_power_log(const std::function<double(std::size_t)>& seq, std::size_t depth);

/// Canonical one-line description (used for hashing and reports).
std::string describe(const CoefficientSequence& seq);

/// Exact form for closed kinds, fitted form otherwise.
FormFit analyse_tail(const CoefficientSequence& seq, std::size_t depth);

}  // namespace stableinfer
