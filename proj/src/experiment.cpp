#include "stableinfer/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iterator>
#include <set>
#include <sstream>

#include "stableinfer/ensemble_io.hpp"
#include "stableinfer/errors.hpp"
#include "stableinfer/hash.hpp"
#include "stableinfer/rng.hpp"
#include "stableinfer/stable_core.hpp"
#include "stableinfer/stats.hpp"

namespace stableinfer {

using nlohmann::json;

namespace {

// Text of the configuration being validated, for line diagnostics.
thread_local const std::string* g_text = nullptr;

struct TextScope {
  explicit TextScope(const std::string& t) : prev(g_text) { g_text = &t; }
  ~TextScope() { g_text = prev; }
  const std::string* prev;
};

std::size_t line_of(const std::string& field) {
  if (!g_text || field.empty()) return 0;
  std::string key = field.substr(field.find_last_of('.') + 1);
  key = key.substr(0, key.find('['));
  const auto pos = g_text->find("\"" + key + "\"");
  if (pos == std::string::npos) return 0;
  return 1 + static_cast<std::size_t>(std::count(g_text->begin(), g_text->begin() + pos, '\n'));
}

[[noreturn]] void fail(const std::string& field, const std::string& message) {
  throw ConfigParse(field, message, line_of(field));
}

std::string join(const std::string& where, const std::string& key) {
  return where.empty() ? key : where + "." + key;
}

void only_keys(const json& j, std::initializer_list<const char*> keys, const std::string& where) {
  std::set<std::string> allowed(keys.begin(), keys.end());
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!allowed.count(it.key())) fail(join(where, it.key()), "unknown field");
}

double number(const json& j, const std::string& key, const std::string& where,
              std::optional<double> fallback = std::nullopt) {
  if (!j.contains(key)) {
    if (fallback) return *fallback;
    fail(join(where, key), "required number is missing");
  }
  const auto& v = j.at(key);
  if (!v.is_number()) fail(join(where, key), "must be a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) fail(join(where, key), "must be finite");
  return x;
}

std::uint64_t count(const json& j, const std::string& key, const std::string& where,
                    std::optional<std::uint64_t> fallback = std::nullopt) {
  if (!j.contains(key)) {
    if (fallback) return *fallback;
    fail(join(where, key), "required integer is missing");
  }
  const auto& v = j.at(key);
  if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<std::int64_t>() < 0))
    fail(join(where, key), "must be a non-negative integer");
  return v.get<std::uint64_t>();
}

std::string text(const json& j, const std::string& key, const std::string& where,
                 std::optional<std::string> fallback = std::nullopt) {
  if (!j.contains(key)) {
    if (fallback) return *fallback;
    fail(join(where, key), "required string is missing");
  }
  if (!j.at(key).is_string()) fail(join(where, key), "must be a string");
  return j.at(key).get<std::string>();
}

std::vector<double> numbers(const json& j, const std::string& key, const std::string& where) {
  if (!j.contains(key) || !j.at(key).is_array()) fail(join(where, key), "must be an array of numbers");
  std::vector<double> out;
  for (const auto& v : j.at(key)) {
    if (!v.is_number()) fail(join(where, key), "must be an array of numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

std::vector<std::size_t> counts(const json& j, const std::string& key, const std::string& where) {
  if (!j.contains(key) || !j.at(key).is_array()) fail(join(where, key), "must be an array of integers");
  std::vector<std::size_t> out;
  for (const auto& v : j.at(key)) {
    if (!v.is_number_integer() || v.get<std::int64_t>() <= 0)
      fail(join(where, key), "entries must be positive integers");
    out.push_back(v.get<std::size_t>());
  }
  return out;
}

double euclid(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

const std::vector<std::pair<ExperimentKind, const char*>> kKinds = {
    {ExperimentKind::figure2, "figure2"},
    {ExperimentKind::radial_demo, "radial_demo"},
    {ExperimentKind::ratio_demo, "ratio_demo"},
    {ExperimentKind::three_series, "three_series"},
    {ExperimentKind::summability, "summability"},
    {ExperimentKind::flom, "flom"},
    {ExperimentKind::bayes_run, "bayes_run"},
    {ExperimentKind::data_sweep, "data_sweep"},
    {ExperimentKind::likelihood_sweep, "likelihood_sweep"},
    {ExperimentKind::kl_table, "kl_table"},
};

json defaults_for(ExperimentKind k) {
  const json decay = {{"kind", "power_law"}, {"amplitude", 1.0}, {"exponent", 2.0}};
  const json cauchy_prior = {{"law", "cauchy"}, {"delta", 0.0}, {"gamma", 1.0}};
  const json gaussian_lik = {{"forward", "identity"}, {"noise_variance", {1.0}}, {"envelopes", "derived"}};
  switch (k) {
    case ExperimentKind::figure2:
      return {{"J", 10}, {"n_samples", 20}, {"families", {"cauchy", "gaussian"}}, {"basis", "haar"},
              {"grid_size", 2048}, {"write_sfe1", true}};
    case ExperimentKind::radial_demo:
      return {{"n_samples", 100000}, {"gamma", 1.0}, {"export_samples", 1000}};
    case ExperimentKind::ratio_demo:
      return {{"n_samples", 100000}, {"gamma", 1.0}, {"delta", 0.0}, {"export_samples", 1000}};
    case ExperimentKind::three_series:
      return {{"gamma", decay}, {"alpha", 1.0}, {"beta", 0.0}, {"q", 1.0}, {"A", 1.0}, {"depth", 65536}};
    case ExperimentKind::summability:
      return {{"gamma", decay}, {"alpha", 1.0}, {"q", 1.0}, {"depth", 65536}, {"force_numeric", false}};
    case ExperimentKind::flom:
      return {{"prior", {{"alpha", 1.0}, {"gamma", decay}, {"truncation", 256}}},
              {"p", 0.5}, {"q", 1.0}, {"n_samples", 100000}};
    case ExperimentKind::bayes_run:
      return {{"prior", cauchy_prior}, {"likelihood", gaussian_lik}, {"y", {0.0}},
              {"n_samples", 100000}, {"r", 2.0}, {"probes", 1000}};
    case ExperimentKind::data_sweep:
      return {{"prior", cauchy_prior}, {"likelihood", gaussian_lik}, {"y", {0.0}},
              {"epsilons", {0.2, 0.1, 0.05, 0.025}}, {"direction", json::array()},
              {"n_samples", 100000}, {"r", 2.0}};
    case ExperimentKind::likelihood_sweep:
      return {{"prior", cauchy_prior}, {"likelihood", gaussian_lik}, {"y", {0.0}},
              {"family", "sine_norm"}, {"constant", 1.0}, {"n_list", {4, 8, 16, 32}},
              {"n_samples", 100000}, {"r", 2.0}};
    case ExperimentKind::kl_table:
      return {{"normal", {{"mean", 0.0}, {"sd", 1.0}}}, {"cauchy", {{"delta", 0.0}, {"gamma", 1.0}}}};
  }
  return json::object();
}

BasisSpec basis_from_json(const json& j, const std::string& where) {
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "euclidean") return BasisSpec::euclidean(2.0);
    if (s == "haar") return BasisSpec::haar(10, 2048);
    if (s == "hat") return BasisSpec::hat(10, 2048);
    fail(where, "unknown basis '" + s + "'");
  }
  if (!j.is_object()) fail(where, "must be a basis name or object");
  only_keys(j, {"kind", "q", "J", "grid_size", "eigenvalues", "s", "unit_norm"}, where);
  const auto kind = text(j, "kind", where);
  BasisSpec b;
  if (kind == "euclidean") {
    const double q = number(j, "q", where, 2.0);
    if (!(q > 0.0)) fail(join(where, "q"), "must be > 0");
    b = BasisSpec::euclidean(q);
  } else if (kind == "haar" || kind == "hat") {
    const auto J = count(j, "J", where, 10);
    if (J < 1 || J > 20) fail(join(where, "J"), "must lie in 1..20");
    const auto grid = count(j, "grid_size", where, 2048);
    if (grid == 0) fail(join(where, "grid_size"), "must be positive");
    b = kind == "haar" ? BasisSpec::haar(unsigned(J), grid) : BasisSpec::hat(unsigned(J), grid);
  } else if (kind == "eigen") {
    const auto lambda = j.contains("eigenvalues") ? sequence_from_json(j.at("eigenvalues"), join(where, "eigenvalues"))
                                                  : CoefficientSequence::power_law(1.0, 1.0);
    b = BasisSpec::eigen(lambda, number(j, "s", where, 0.0), count(j, "grid_size", where, 2048));
  } else {
    fail(join(where, "kind"), "unknown basis '" + kind + "'");
  }
  if (j.contains("unit_norm")) {
    if (!j.at("unit_norm").is_boolean()) fail(join(where, "unit_norm"), "must be a boolean");
    b.unit_norm = j.at("unit_norm").get<bool>();
  }
  return b;
}

struct BayesSetup {
  StableFieldSpec prior;
  GaussianAdditivePotential likelihood;
  PotentialSpec potential;
  std::vector<double> y;
  double r = 0.0;
};

BayesSetup bayes_setup(const json& p) {
  BayesSetup s;
  s.prior = prior_from_json(p.at("prior"));
  s.likelihood = likelihood_from_json(p.at("likelihood"));
  try {
    s.potential = s.likelihood.spec();
  } catch (const InvalidSpec& e) {
    fail("likelihood", e.what());
  }
  s.y = numbers(p, "y", "");
  s.r = number(p, "r", "");
  if (s.y.size() != s.potential.data_dim)
    fail("y", "has " + std::to_string(s.y.size()) + " entries but the noise covariance has " +
                  std::to_string(s.potential.data_dim));
  const std::size_t nu = s.prior.coefficient_count();
  if (s.potential.input_dim != 0 && nu != s.potential.input_dim)
    fail("prior", "has " + std::to_string(nu) + " coefficients but the forward map expects " +
                      std::to_string(s.potential.input_dim));
  if (!(s.r > 0.0)) fail("r", "radius must be > 0");
  if (!(euclid(s.y) < s.r)) fail("y", "data must lie inside the ball ||y|| < r");
  return s;
}

void cross_check(ExperimentKind kind, json& p) {
  switch (kind) {
    case ExperimentKind::figure2: {
      const auto J = count(p, "J", "");
      if (J < 1 || J > 20) fail("J", "must lie in 1..20");
      if (count(p, "n_samples", "") == 0) fail("n_samples", "must be positive");
      if (count(p, "grid_size", "") == 0) fail("grid_size", "must be positive");
      const auto basis = text(p, "basis", "");
      if (basis != "haar" && basis != "hat") fail("basis", "figure2 uses 'haar' or 'hat'");
      if (!p.at("families").is_array() || p.at("families").empty()) fail("families", "must be a non-empty array");
      for (const auto& f : p.at("families"))
        if (f != "cauchy" && f != "gaussian") fail("families", "entries are 'cauchy' or 'gaussian'");
      if (!p.at("write_sfe1").is_boolean()) fail("write_sfe1", "must be a boolean");
      break;
    }
    case ExperimentKind::radial_demo:
    case ExperimentKind::ratio_demo:
      if (count(p, "n_samples", "") < 2) fail("n_samples", "must be at least 2");
      if (!(number(p, "gamma", "") > 0.0)) fail("gamma", "Cauchy scale must be > 0");
      if (kind == ExperimentKind::ratio_demo) number(p, "delta", "");
      count(p, "export_samples", "");
      break;
    case ExperimentKind::three_series:
    case ExperimentKind::summability: {
      sequence_from_json(p.at("gamma"), "gamma");
      const double a = number(p, "alpha", "");
      if (!(a > 0.0 && a <= 2.0)) fail("alpha", "stability index must lie in (0, 2]");
      if (!(number(p, "q", "") > 0.0)) fail("q", "must be > 0");
      if (count(p, "depth", "") < 64) fail("depth", "must be at least 64");
      if (kind == ExperimentKind::three_series) {
        const double b = number(p, "beta", "");
        if (!(std::abs(b) <= 1.0)) fail("beta", "skewness must lie in [-1, 1]");
        if (!(number(p, "A", "") > 0.0)) fail("A", "truncation level must be > 0");
      } else if (!p.at("force_numeric").is_boolean()) {
        fail("force_numeric", "must be a boolean");
      }
      break;
    }
    case ExperimentKind::flom: {
      const auto spec = prior_from_json(p.at("prior"));
      const double pp = number(p, "p", "");
      const double q = number(p, "q", "");
      if (!(pp > 0.0)) fail("p", "moment order must be > 0");
      if (spec.alpha < 2.0 && !(pp < spec.alpha))
        fail("p", "fractional moments E||u||^p of an alpha-stable field are finite only for 0 < p < alpha (p = " +
                      format_double(pp) + ", alpha = " + format_double(spec.alpha) + ")");
      if (!(q > 0.0)) fail("q", "must be > 0");
      if (pp > q) fail("p", "moment order must not exceed the norm exponent q");
      if (count(p, "n_samples", "") < 2) fail("n_samples", "must be at least 2");
      break;
    }
    case ExperimentKind::bayes_run:
    case ExperimentKind::data_sweep:
    case ExperimentKind::likelihood_sweep: {
      const auto s = bayes_setup(p);
      if (count(p, "n_samples", "") < 10) fail("n_samples", "must be at least 10");
      if (kind == ExperimentKind::bayes_run) count(p, "probes", "");
      if (kind == ExperimentKind::data_sweep) {
        const auto eps = numbers(p, "epsilons", "");
        if (eps.empty()) fail("epsilons", "must be non-empty");
        auto dir = numbers(p, "direction", "");
        if (dir.empty()) {
          dir.assign(s.y.size(), 0.0);
          dir[0] = 1.0;
          p["direction"] = dir;
        }
        if (dir.size() != s.y.size()) fail("direction", "must match the data dimension");
        for (double e : eps) {
          if (!(e > 0.0)) fail("epsilons", "perturbation sizes must be > 0");
          auto yp = s.y;
          for (std::size_t i = 0; i < yp.size(); ++i) yp[i] += e * dir[i];
          if (!(euclid(yp) < s.r))
            fail("epsilons", "perturbed data must stay inside the ball ||y'|| < r = " + format_double(s.r));
        }
      }
      if (kind == ExperimentKind::likelihood_sweep) {
        const auto fam = text(p, "family", "");
        if (fam != "sine_norm" && fam != "constant") fail("family", "must be 'sine_norm' or 'constant'");
        number(p, "constant", "");
        if (counts(p, "n_list", "").empty()) fail("n_list", "must be non-empty");
      }
      break;
    }
    case ExperimentKind::kl_table: {
      const auto& n = p.at("normal");
      const auto& c = p.at("cauchy");
      if (!n.is_object() || !c.is_object()) fail("normal", "normal and cauchy must be objects");
      only_keys(n, {"mean", "sd"}, "normal");
      only_keys(c, {"delta", "gamma"}, "cauchy");
      number(n, "mean", "normal");
      if (!(number(n, "sd", "normal") > 0.0)) fail("normal.sd", "must be > 0");
      number(c, "delta", "cauchy");
      if (!(number(c, "gamma", "cauchy") > 0.0)) fail("cauchy.gamma", "must be > 0");
      break;
    }
  }
}

// --- outputs ------------------------------------------------------------------------

class Outputs {
 public:
  Outputs(std::filesystem::path dir, std::uint64_t config_hash, std::uint64_t seed)
      : dir_(std::move(dir)), hash_(config_hash), seed_(seed) {}

  std::filesystem::path path(const std::string& name) {
    names_.push_back(name);
    return dir_ / name;
  }
  std::string comment() const { return csv_comment(hash_, seed_); }

  void json_file(const std::string& name, json j) {
    j["config_hash"] = hex64(hash_);
    j["seed"] = seed_;
    std::ofstream out(path(name), std::ios::binary);
    if (!out) throw IoFailure("cannot open " + (dir_ / name).string() + " for writing");
    out << j.dump(2) << '\n';
    if (!out) throw IoFailure("write failed: " + (dir_ / name).string());
  }

  const std::vector<std::string>& names() const { return names_; }
  std::uint64_t hash() const { return hash_; }
  std::uint64_t seed() const { return seed_; }

 private:
  std::filesystem::path dir_;
  std::uint64_t hash_;
  std::uint64_t seed_;
  std::vector<std::string> names_;
};

json moment_json(const MomentValue& m) {
  if (m.is_finite()) return m.value();
  return m.is_infinite() ? json("infinite") : json("undefined");
}

json integrability_json(const IntegrabilityReport& r) {
  auto one = [](const IntegrabilityEstimate& e) {
    return json{{"estimate", e.estimate.mean}, {"stderr", e.estimate.std_error}, {"unstable", e.unstable}};
  };
  return {{"r", r.r}, {"S1", one(r.s1)}, {"S12", one(r.s12)}, {"S13", one(r.s13)},
          {"divergence_flag", r.divergence_flag}};
}

void run_figure2(const json& p, Outputs& out) {
  const auto J = unsigned(p.at("J").get<std::uint64_t>());
  const auto n = p.at("n_samples").get<std::size_t>();
  const auto grid = p.at("grid_size").get<std::size_t>();
  const auto basis = p.at("basis") == "hat" ? BasisSpec::hat(J, grid) : BasisSpec::haar(J, grid);
  json summary;
  double cauchy_max = 0.0, gaussian_max = 0.0;
  for (const auto& f : p.at("families")) {
    const auto family = f == "cauchy" ? CoefficientFamily::cauchy : CoefficientFamily::gaussian;
    const auto ens = figure2_ensemble(family, J, n, out.seed(), basis);
    const std::string name = std::string("figure2_") + to_string(family);
    write_ensemble_csv(out.path(name + ".csv"), ens.ensemble, CsvContent::grid, out.hash());
    if (p.at("write_sfe1").get<bool>()) write_sfe1(out.path(name + ".sfe1"), ens.ensemble);
    summary[to_string(family)] = {{"max_abs_coefficient", ens.max_abs_coefficient},
                                  {"raw_min", ens.raw_min},
                                  {"raw_max", ens.raw_max}};
    (family == CoefficientFamily::cauchy ? cauchy_max : gaussian_max) = ens.max_abs_coefficient;
  }
  if (cauchy_max > 0.0 && gaussian_max > 0.0)
    summary["extreme_coefficient_ratio"] = cauchy_max / gaussian_max;
  summary["J"] = J;
  summary["n_samples"] = n;
  out.json_file("figure2_summary.json", summary);
}

void run_cauchy_demo(ExperimentKind kind, const json& p, Outputs& out) {
  const auto n = p.at("n_samples").get<std::size_t>();
  const double gamma = p.at("gamma").get<double>();
  const double delta = kind == ExperimentKind::ratio_demo ? p.at("delta").get<double>() : 0.0;
  const RngStream rng{out.seed(), 1};
  const auto x = kind == ExperimentKind::ratio_demo ? sample_cauchy_via_ratio(gamma, delta, n, rng)
                                                    : sample_cauchy_via_circle(gamma, n, rng);
  const double ks = ks_statistic(x, [&](double v) { return cauchy_cdf(delta, gamma, v); });
  const double crit = ks_critical_value(n, 0.01);
  const std::string name = to_string(kind);
  std::vector<std::vector<double>> rows;
  const std::size_t m = std::min(n, p.at("export_samples").get<std::size_t>());
  for (std::size_t i = 0; i < m; ++i) rows.push_back({double(i), x[i]});
  write_table_csv(out.path(name + ".csv"), out.comment(), {"index", "value"}, rows);
  out.json_file(name + ".json", {{"n_samples", n},
                                 {"gamma", gamma},
                                 {"delta", delta},
                                 {"ks_statistic", ks},
                                 {"ks_critical_1pct", crit},
                                 {"ks_pass", ks < crit},
                                 {"median", median(x)}});
}

void run_three_series(const json& p, Outputs& out) {
  const auto gamma = sequence_from_json(p.at("gamma"), "gamma");
  const auto r = three_series_check(gamma, p.at("alpha").get<double>(), p.at("q").get<double>(),
                                    p.at("A").get<double>(), p.at("depth").get<std::size_t>(),
                                    p.at("beta").get<double>());
  std::vector<std::vector<double>> rows;
  for (std::size_t k = 0; k < r.depths.size(); ++k)
    rows.push_back({double(r.depths[k]), r.partial_sums[k][0], r.partial_sums[k][1], r.partial_sums[k][2]});
  write_table_csv(out.path("three_series.csv"), out.comment(), {"depth", "s0", "s1", "s2"}, rows);
  out.json_file("three_series.json",
                {{"s0", r.s0}, {"s1", r.s1}, {"s2", r.s2},
                 {"per_series", {to_string(r.per_series[0]), to_string(r.per_series[1]), to_string(r.per_series[2])}},
                 {"verdict", to_string(r.verdict)},
                 {"note", r.note},
                 {"gamma", describe(gamma)}});
}

void run_summability(const json& p, Outputs& out) {
  const auto gamma = sequence_from_json(p.at("gamma"), "gamma");
  const auto r = summability_report(gamma, p.at("alpha").get<double>(), p.at("q").get<double>(),
                                    p.at("depth").get<std::size_t>(), p.at("force_numeric").get<bool>());
  std::vector<std::vector<double>> rows;
  for (std::size_t k = 0; k < r.depths.size(); ++k)
    rows.push_back({double(r.depths[k]), r.ell_alpha_sums[k], r.orlicz_sums[k]});
  write_table_csv(out.path("summability.csv"), out.comment(), {"depth", "ell_alpha_sum", "orlicz_sum"}, rows);
  out.json_file("summability.json",
                {{"tail", {{"amplitude", r.tail.amplitude}, {"exponent", r.tail.exponent},
                           {"log_exponent", r.tail.log_exponent}}},
                 {"fit_residual", r.fit_residual},
                 {"analytic", r.analytic},
                 {"regime", to_string(r.regime)},
                 {"ell_alpha", to_string(r.ell_alpha)},
                 {"orlicz", to_string(r.orlicz)},
                 {"verdict", to_string(r.verdict)}});
}

void run_flom(const json& p, Outputs& out) {
  const auto spec = prior_from_json(p.at("prior"));
  const auto ens = sample_coefficients(spec, p.at("n_samples").get<std::size_t>(), out.seed());
  const auto r = flom_estimate(ens, spec, p.at("p").get<double>(), p.at("q").get<double>());
  std::vector<std::vector<double>> rows;
  for (const auto& t : r.trace) rows.push_back({double(t.truncation), t.estimate, t.std_error});
  write_table_csv(out.path("flom.csv"), out.comment(), {"truncation", "estimate", "stderr"}, rows);
  json trace = json::array();
  for (const auto& t : r.trace)
    trace.push_back({{"truncation", t.truncation}, {"estimate", t.estimate}, {"stderr", t.std_error}});
  out.json_file("flom.json", {{"estimate", r.estimate}, {"stderr", r.std_error}, {"trace", trace},
                              {"spec", spec.describe()}, {"warnings", ens.warnings}});
}

void run_bayes(ExperimentKind kind, const json& p, Outputs& out) {
  const auto s = bayes_setup(p);
  const auto ens = sample_coefficients(s.prior, p.at("n_samples").get<std::size_t>(), out.seed());
  if (kind == ExperimentKind::bayes_run) {
    const auto post = posterior(s.potential, ens, s.y);
    const auto mean = posterior_expectation(ens.column(0), post);
    const auto integ = integrability_estimates(s.potential, ens, s.r);
    const auto probe = probe_assumptions(s.potential, s.r, ens.n_coeffs, s.y.size(), out.seed(),
                                         p.at("probes").get<std::size_t>());
    out.json_file("bayes_run.json",
                  {{"Z", post.normalization.z},
                   {"Z_stderr", post.normalization.std_error},
                   {"log_Z", post.normalization.log_z},
                   {"log_shift", post.normalization.log_shift},
                   {"ess", post.ess},
                   {"n_samples", ens.n_samples},
                   {"posterior_mean_u1", mean.mean},
                   {"posterior_mean_u1_stderr", mean.std_error},
                   {"integrability", integrability_json(integ)},
                   {"probes", {{"count", probe.probes},
                               {"max_abs_misfit", probe.max_abs_misfit},
                               {"bounded", probe.bounded},
                               {"min_lower_gap", probe.min_lower_gap},
                               {"lower_holds", probe.lower_holds},
                               {"max_lipschitz_ratio", probe.max_lipschitz_ratio},
                               {"lipschitz_holds", probe.lipschitz_holds}}}});
    return;
  }
  SweepOptions opt;
  opt.radius = s.r;
  if (kind == ExperimentKind::data_sweep) {
    const auto eps = numbers(p, "epsilons", "");
    const auto dir = numbers(p, "direction", "");
    const auto rep = data_lipschitz_sweep(s.potential, ens, s.y, eps, dir, opt);
    const auto zc = z_lipschitz_check(s.potential, ens, s.y, eps, dir);
    write_sweep_csv(out.path("data_sweep.csv").string(), rep, out.hash());
    auto j = json::parse(to_json_text(rep));
    j["z_lipschitz"] = {{"epsilons", zc.epsilons}, {"ratios", zc.ratios}, {"holds", zc.holds}};
    out.json_file("data_sweep.json", j);
    return;
  }
  const auto family = p.at("family") == "constant"
                          ? PerturbationFamily::constant_shift(p.at("constant").get<double>())
                          : PerturbationFamily::sine_norm();
  const auto ns = counts(p, "n_list", "");
  const auto rep = likelihood_perturbation_sweep(s.potential, family, inverse_rate, ens, s.y, ns, opt);
  write_sweep_csv(out.path("likelihood_sweep.csv").string(), rep, out.hash());
  auto j = json::parse(to_json_text(rep));
  j["family"] = family.name();
  out.json_file("likelihood_sweep.json", j);
}

void run_kl(const json& p, Outputs& out) {
  const auto& n = p.at("normal");
  const auto& c = p.at("cauchy");
  const double mean = n.at("mean").get<double>(), sd = n.at("sd").get<double>();
  const double delta = c.at("delta").get<double>(), gamma = c.at("gamma").get<double>();
  const auto N = normal_density(mean, sd);
  const auto C = cauchy_density(delta, gamma);
  const std::string nn = "N(" + format_double(mean) + "," + format_double(sd * sd) + ")";
  const std::string cn = "C(" + format_double(delta) + "," + format_double(gamma) + ")";
  json pairs = json::array();
  pairs.push_back({{"p", nn}, {"q", cn}, {"kl", moment_json(kl_divergence_1d(N, C))}});
  pairs.push_back({{"p", cn}, {"q", nn}, {"kl", moment_json(kl_divergence_1d(C, N))}});
  out.json_file("kl_table.json", {{"pairs", pairs}});
}

}  // namespace

const char* to_string(ExperimentKind k) {
  for (const auto& [kind, name] : kKinds)
    if (kind == k) return name;
  return "unknown";
}

std::string ExperimentConfig::to_text() const { return params.dump(2) + "\n"; }

std::uint64_t ExperimentConfig::hash() const {
  // The output location is not part of the experiment.
  json j = params;
  j.erase("output_dir");
  return fnv1a64(j.dump());
}

CoefficientSequence sequence_from_json(const json& j, const std::string& where) {
  if (j.is_number()) {
    const double c = j.get<double>();
    return c == 0.0 ? CoefficientSequence::zero() : CoefficientSequence::constant(c);
  }
  if (j.is_string() && j == "zero") return CoefficientSequence::zero();
  if (!j.is_object()) fail(where, "sequence must be a number, \"zero\" or an object");
  const auto kind = text(j, "kind", where);
  if (kind == "power_law") {
    only_keys(j, {"kind", "amplitude", "exponent"}, where);
    return CoefficientSequence::power_law(number(j, "amplitude", where, 1.0), number(j, "exponent", where));
  }
  if (kind == "power_log") {
    only_keys(j, {"kind", "amplitude", "exponent", "log_exponent"}, where);
    return CoefficientSequence::power_log(number(j, "amplitude", where, 1.0), number(j, "exponent", where),
                                          number(j, "log_exponent", where));
  }
  if (kind == "explicit") {
    only_keys(j, {"kind", "values", "tail"}, where);
    const auto values = numbers(j, "values", where);
    TailRule tail;
    if (j.contains("tail")) {
      const auto& t = j.at("tail");
      const std::string tw = join(where, "tail");
      if (!t.is_object()) fail(tw, "must be an object");
      only_keys(t, {"kind", "value", "exponent"}, tw);
      const auto tk = text(t, "kind", tw);
      if (tk == "zero") tail.kind = TailRule::Kind::zero;
      else if (tk == "constant") tail.kind = TailRule::Kind::constant;
      else if (tk == "power_law") tail.kind = TailRule::Kind::power_law;
      else fail(join(tw, "kind"), "unknown tail rule '" + tk + "'");
      tail.value = number(t, "value", tw, 0.0);
      tail.exponent = number(t, "exponent", tw, 0.0);
    }
    return CoefficientSequence::explicit_values(values, tail);
  }
  fail(join(where, "kind"), "unknown sequence kind '" + kind + "'");
}

StableFieldSpec prior_from_json(const json& j, const std::string& where) {
  if (!j.is_object()) fail(where, "must be an object");
  StableFieldSpec s;
  if (j.contains("law")) {
    const auto law = text(j, "law", where);
    s.truncation = 1;
    s.basis = BasisSpec::euclidean(2.0);
    if (law == "cauchy") {
      only_keys(j, {"law", "delta", "gamma"}, where);
      s.alpha = 1.0;
      s.gamma = CoefficientSequence::explicit_values({number(j, "gamma", where, 1.0)});
      s.delta = CoefficientSequence::explicit_values({number(j, "delta", where, 0.0)});
    } else if (law == "normal") {
      only_keys(j, {"law", "mean", "sd"}, where);
      s.alpha = 2.0;
      s.gamma = CoefficientSequence::explicit_values({number(j, "sd", where, 1.0) / std::sqrt(2.0)});
      s.delta = CoefficientSequence::explicit_values({number(j, "mean", where, 0.0)});
    } else {
      fail(join(where, "law"), "unknown scalar law '" + law + "' (use cauchy or normal)");
    }
  } else {
    only_keys(j, {"alpha", "beta", "gamma", "delta", "basis", "truncation"}, where);
    s.alpha = number(j, "alpha", where);
    if (j.contains("beta")) s.beta = sequence_from_json(j.at("beta"), join(where, "beta"));
    if (j.contains("gamma")) s.gamma = sequence_from_json(j.at("gamma"), join(where, "gamma"));
    if (j.contains("delta")) s.delta = sequence_from_json(j.at("delta"), join(where, "delta"));
    if (j.contains("basis")) s.basis = basis_from_json(j.at("basis"), join(where, "basis"));
    s.truncation = count(j, "truncation", where, 64);
    if (s.truncation == 0) fail(join(where, "truncation"), "must be positive");
  }
  try {
    s.validate();
  } catch (const NumericError& e) {
    fail(where, e.what());
  }
  return s;
}

GaussianAdditivePotential likelihood_from_json(const json& j, const std::string& where) {
  if (!j.is_object()) fail(where, "must be an object");
  only_keys(j, {"forward", "noise_variance", "envelopes"}, where);
  GaussianAdditivePotential g;
  g.noise_variance = numbers(j, "noise_variance", where);
  const auto env = text(j, "envelopes", where, "derived");
  if (env == "derived") g.envelopes = GaussianAdditivePotential::Envelopes::derived;
  else if (env == "growth") g.envelopes = GaussianAdditivePotential::Envelopes::growth;
  else fail(join(where, "envelopes"), "must be 'derived' or 'growth'");
  const std::string fw = join(where, "forward");
  const json f = j.contains("forward") ? j.at("forward") : json("identity");
  if (f.is_string()) {
    if (f != "identity") fail(fw, "named forward maps: identity");
  } else if (f.is_object()) {
    const auto kind = text(f, "kind", fw);
    if (kind == "identity") {
      only_keys(f, {"kind"}, fw);
    } else if (kind == "linear") {
      only_keys(f, {"kind", "rows", "cols", "matrix"}, fw);
      const auto rows = count(f, "rows", fw), cols = count(f, "cols", fw);
      auto m = numbers(f, "matrix", fw);
      if (m.size() != rows * cols) fail(join(fw, "matrix"), "must hold rows * cols entries");
      g.forward = ForwardMap::linear(rows, cols, std::move(m));
    } else if (kind == "componentwise") {
      only_keys(f, {"kind", "kappa", "c_plus", "c_minus"}, fw);
      const double kappa = number(f, "kappa", fw), cp = number(f, "c_plus", fw, 1.0),
                   cm = number(f, "c_minus", fw, 0.0);
      if (kappa < 0.0 || cp < 0.0 || cm < 0.0) fail(fw, "kappa, c_plus and c_minus must be >= 0");
      g.forward = ForwardMap::componentwise(kappa, cp, cm);
    } else {
      fail(join(fw, "kind"), "unknown forward map '" + kind + "'");
    }
  } else {
    fail(fw, "must be a name or an object");
  }
  try {
    g.validate();
  } catch (const InvalidSpec& e) {
    fail(where, e.what());
  }
  return g;
}

ExperimentConfig validate_config(const std::string& text_in) {
  TextScope scope(text_in);
  json j;
  try {
    j = json::parse(text_in);
  } catch (const json::parse_error& e) {
    const auto upto = std::min<std::size_t>(e.byte, text_in.size());
    const auto line = 1 + std::count(text_in.begin(), text_in.begin() + upto, '\n');
    throw ConfigParse("", std::string("malformed JSON: ") + e.what(), std::size_t(line));
  }
  if (!j.is_object()) throw ConfigParse("", "top level must be an object", 1);
  const auto name = text(j, "experiment", "");
  ExperimentConfig cfg;
  bool found = false;
  for (const auto& [kind, n] : kKinds)
    if (name == n) {
      cfg.kind = kind;
      found = true;
    }
  if (!found) fail("experiment", "unknown experiment kind '" + name + "'");
  auto defaults = defaults_for(cfg.kind);
  for (auto it = j.begin(); it != j.end(); ++it)
    if (it.key() != "experiment" && it.key() != "seed" && it.key() != "output_dir" &&
        !defaults.contains(it.key()))
      fail(it.key(), "unknown field for experiment '" + name + "'");
  for (auto it = defaults.begin(); it != defaults.end(); ++it)
    if (!j.contains(it.key())) j[it.key()] = it.value();
  j["seed"] = count(j, "seed", "", 1);
  j["output_dir"] = text(j, "output_dir", "", "out/" + name);
  cross_check(cfg.kind, j);
  cfg.params = std::move(j);
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoFailure("cannot open config " + path.string());
  std::string text_in((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return validate_config(text_in);
}

std::uint64_t file_hash(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoFailure("cannot open " + path.string());
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return fnv1a64(bytes);
}

RunManifest run(const ExperimentConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  RunManifest m;
  m.directory = config.output_dir();
  m.config_hash = config.hash();
  std::error_code ec;
  std::filesystem::create_directories(m.directory, ec);
  if (ec) throw IoFailure("cannot create " + m.directory.string() + ": " + ec.message());
  Outputs out(m.directory, m.config_hash, config.seed());
  const auto& p = config.params;
  try {
    switch (config.kind) {
      case ExperimentKind::figure2:
        run_figure2(p, out);
        break;
      case ExperimentKind::radial_demo:
      case ExperimentKind::ratio_demo:
        run_cauchy_demo(config.kind, p, out);
        break;
      case ExperimentKind::three_series:
        run_three_series(p, out);
        break;
      case ExperimentKind::summability:
        run_summability(p, out);
        break;
      case ExperimentKind::flom:
        run_flom(p, out);
        break;
      case ExperimentKind::bayes_run:
      case ExperimentKind::data_sweep:
      case ExperimentKind::likelihood_sweep:
        run_bayes(config.kind, p, out);
        break;
      case ExperimentKind::kl_table:
        run_kl(p, out);
        break;
    }
  } catch (const NumericError& e) {
    throw NumericError(std::string(to_string(config.kind)) + ": " + e.what());
  }
  json files = json::array();
  for (const auto& name : out.names()) {
    const auto h = file_hash(m.directory / name);
    m.files.emplace_back(name, h);
    files.push_back({{"name", name}, {"fnv1a64", hex64(h)}});
  }
  m.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const json manifest = {{"experiment", to_string(config.kind)},
                         {"config_hash", hex64(m.config_hash)},
                         {"seed", config.seed()},
                         {"config", config.params},
                         {"files", files},
                         {"wall_seconds", m.wall_seconds}};
  std::ofstream mf(m.directory / "manifest.json", std::ios::binary);
  if (!mf) throw IoFailure("cannot write manifest in " + m.directory.string());
  mf << manifest.dump(2) << '\n';
  if (!mf) throw IoFailure("manifest write failed");
  return m;
}

}  // namespace stableinfer
