#include "stableinfer/sequences.hpp"

#include <algorithm>
#include <cmath>

#include "stableinfer/errors.hpp"
#include "stableinfer/hash.hpp"
#include "stableinfer/stats.hpp"

namespace stableinfer {
namespace {

// Exponents within this of a summability boundary count as on it.
constexpr double kSnap = 1e-6;
// Fitted log-exponents are less well determined than power exponents.
constexpr double kLogSnap = 1e-3;
constexpr double kFitTolerance = 0.05;

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

int compare_snapped(double value, double target, double tol) {
  if (std::abs(value - target) <= tol) return 0;
  return value < target ? -1 : 1;
}

}  // namespace

double PowerLogForm::at(std::size_t n) const {
  if (amplitude == 0.0) return 0.0;
  const double x = static_cast<double>(n);
  if (log_exponent == 0.0) return amplitude * std::pow(x, -exponent);
  if (n < 2) return 0.0;
  return amplitude * std::pow(x, -exponent) * std::pow(std::log(x), -log_exponent);
}

PowerLogForm PowerLogForm::pow(double p) const {
  return {std::pow(std::abs(amplitude), p), exponent * p, log_exponent * p};
}

PowerLogForm PowerLogForm::over(const PowerLogForm& other, double power) const {
  if (other.amplitude == 0.0) throw DivisionByZeroScale("division by an identically zero sequence");
  return {amplitude / std::pow(std::abs(other.amplitude), power), exponent - power * other.exponent,
          log_exponent - power * other.log_exponent};
}

const char* to_string(Summability s) {
  switch (s) {
    case Summability::summable:
      return "summable";
    case Summability::not_summable:
      return "not_summable";
    case Summability::inconclusive:
      return "inconclusive";
  }
  return "inconclusive";
}

Summability lp_summable(const PowerLogForm& f, double p) {
  if (f.amplitude == 0.0) return Summability::summable;
  const int c = compare_snapped(f.exponent * p, 1.0, kSnap);
  if (c > 0) return Summability::summable;
  if (c < 0) return Summability::not_summable;
  return compare_snapped(f.log_exponent * p, 1.0, kLogSnap) > 0 ? Summability::summable
                                                               : Summability::not_summable;
}

Summability orlicz_summable(const PowerLogForm& f, double alpha) {
  if (f.amplitude == 0.0) return Summability::summable;
  // |log a_n| ~ r log n once r > 0, which costs one power of log n.
  if (f.exponent <= kSnap) return Summability::not_summable;
  const int c = compare_snapped(f.exponent * alpha, 1.0, kSnap);
  if (c > 0) return Summability::summable;
  if (c < 0) return Summability::not_summable;
  return compare_snapped(f.log_exponent * alpha, 2.0, kLogSnap) > 0 ? Summability::summable
                                                                   : Summability::not_summable;
}

CoefficientSequence CoefficientSequence::constant(double c) {
  return CoefficientSequence(ExplicitValues{{}, {TailRule::Kind::constant, c, 0.0}});
}

CoefficientSequence CoefficientSequence::power_law(double amplitude, double exponent) {
  return CoefficientSequence(PowerLaw{amplitude, exponent});
}

CoefficientSequence CoefficientSequence::power_log(double amplitude, double exponent,
                                                   double log_exponent) {
  return CoefficientSequence(PowerLogLaw{amplitude, exponent, log_exponent});
}

CoefficientSequence CoefficientSequence::explicit_values(std::vector<double> values,
                                                         TailRule tail) {
  return CoefficientSequence(ExplicitValues{std::move(values), tail});
}

double CoefficientSequence::at(std::size_t n) const {
  if (n == 0) throw OutOfRange("n", "sequences are indexed from 1");
  return std::visit(
      overloaded{
          [n](const PowerLaw& k) { return PowerLogForm{k.amplitude, k.exponent, 0.0}.at(n); },
          [n](const PowerLogLaw& k) {
            if (n < 2 || k.amplitude == 0.0) return 0.0;
            const double x = static_cast<double>(n);
            return k.amplitude * std::pow(x, -k.exponent) * std::pow(std::log(x), -k.log_exponent);
          },
          [n](const ExplicitValues& k) {
            if (n <= k.values.size()) return k.values[n - 1];
            switch (k.tail.kind) {
              case TailRule::Kind::zero:
                return 0.0;
              case TailRule::Kind::constant:
                return k.tail.value;
              case TailRule::Kind::power_law:
                return k.tail.value * std::pow(static_cast<double>(n), -k.tail.exponent);
            }
            return 0.0;
          }},
      kind_);
}

std::vector<double> CoefficientSequence::values(std::size_t count) const {
  std::vector<double> out(count);
  for (std::size_t n = 1; n <= count; ++n) out[n - 1] = at(n);
  return out;
}

std::optional<PowerLogForm> CoefficientSequence::closed_form() const {
  if (const auto* p = std::get_if<PowerLaw>(&kind_))
    return PowerLogForm{p->amplitude, p->exponent, 0.0};
  if (const auto* p = std::get_if<PowerLogLaw>(&kind_))
    return PowerLogForm{p->amplitude, p->exponent, p->log_exponent};
  return std::nullopt;
}

bool CoefficientSequence::is_identically_zero() const {
  return std::visit(overloaded{[](const PowerLaw& k) { return k.amplitude == 0.0; },
                               [](const PowerLogLaw& k) { return k.amplitude == 0.0; },
                               [](const ExplicitValues& k) {
                                 const bool head = std::all_of(k.values.begin(), k.values.end(),
                                                               [](double v) { return v == 0.0; });
                                 return head && (k.tail.kind == TailRule::Kind::zero ||
                                                 k.tail.value == 0.0);
                               }},
                    kind_);
}

double CoefficientSequence::max_abs(std::size_t count) const {
  double m = 0.0;
  for (std::size_t n = 1; n <= count; ++n) m = std::max(m, std::abs(at(n)));
  return m;
}

CoefficientSequence scaled(const CoefficientSequence& seq, double factor) {
  return std::visit(
      overloaded{[&](const PowerLaw& k) {
                   return CoefficientSequence::power_law(k.amplitude * factor, k.exponent);
                 },
                 [&](const PowerLogLaw& k) {
                   return CoefficientSequence::power_log(k.amplitude * factor, k.exponent,
                                                         k.log_exponent);
                 },
                 [&](const ExplicitValues& k) {
                   auto v = k.values;
                   for (double& x : v) x *= factor;
                   TailRule t = k.tail;
                   t.value *= factor;
                   return CoefficientSequence::explicit_values(std::move(v), t);
                 }},
      seq.kind());
}

FormFit fit_power_log(const CoefficientSequence& seq, std::size_t depth) {
  return fit_power_log([&seq](std::size_t n) { return seq.at(n); }, depth);
}

std::string describe(const CoefficientSequence& seq) {
  return std::visit(
      overloaded{[](const PowerLaw& k) {
                   return "power_law(" + format_double(k.amplitude) + "," +
                          format_double(k.exponent) + ")";
                 },
                 [](const PowerLogLaw& k) {
                   return "power_log(" + format_double(k.amplitude) + "," +
                          format_double(k.exponent) + "," + format_double(k.log_exponent) + ")";
                 },
                 [](const ExplicitValues& k) {
                   std::string out = "explicit([";
                   for (std::size_t i = 0; i < k.values.size(); ++i) {
                     if (i) out += ",";
                     out += format_double(k.values[i]);
                   }
                   out += "]," + std::to_string(static_cast<int>(k.tail.kind)) + "," +
                          format_double(k.tail.value) + "," + format_double(k.tail.exponent) + ")";
                   return out;
                 }},
      seq.kind());
}

FormFit fit_power_log(const std::function<double(std::size_t)>& seq, std::size_t depth) {
  const std::size_t hi = std::max<std::size_t>(depth, 16);
  const std::size_t lo = std::max<std::size_t>(8, hi / 1024);
  constexpr int kPoints = 64;
  std::vector<std::vector<double>> design;
  std::vector<double> y;
  std::size_t last = 0;
  for (int i = 0; i < kPoints; ++i) {
    const double t = static_cast<double>(i) / (kPoints - 1);
    const auto n = static_cast<std::size_t>(
        std::llround(std::exp(std::log(double(lo)) + t * (std::log(double(hi)) - std::log(double(lo))))));
    if (n == last) continue;
    last = n;
    const double v = std::abs(seq(n));
    if (v == 0.0) continue;
    const double ln = std::log(static_cast<double>(n));
    design.push_back({1.0, -ln, -std::log(ln)});
    y.push_back(std::log(v));
  }
  FormFit fit;
  if (y.empty()) {
    fit.all_zero = true;
    return fit;
  }
  if (y.size() < 4) {
    fit.reliable = false;
    return fit;
  }
  double rms = 0.0;
  const auto coef = least_squares(design, y, &rms);
  fit.form = {std::exp(coef[0]), coef[1], coef[2]};
  fit.residual_rms = rms;
  fit.reliable = rms <= kFitTolerance;
  return fit;
}

FormFit analyse_tail(const CoefficientSequence& seq, std::size_t depth) {
  if (seq.is_identically_zero()) {
    FormFit f;
    f.all_zero = true;
    return f;
  }
  if (auto form = seq.closed_form()) return FormFit{*form, 0.0, false, true};
  return fit_power_log(seq, depth);
}

}  // namespace stableinfer
