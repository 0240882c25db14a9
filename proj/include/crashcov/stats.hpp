#ifndef CRASHCOV_STATS_HPP
#define CRASHCOV_STATS_HPP

#include <cmath>
#include <cstdio>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "crashcov/errors.hpp"

namespace crashcov::stats {

/// 2x2 cross-tabulation. For the tested/crashed analysis the cells are
/// n11 = tested & crashed, n10 = tested & not crashed,
/// n01 = untested & crashed, n00 = untested & not crashed.
struct ContingencyTable {
  long long n11 = 0;
  long long n10 = 0;
  long long n01 = 0;
  long long n00 = 0;

  long long total() const { return n11 + n10 + n01 + n00; }
  long long tested_total() const { return n11 + n10; }
  long long crashed_total() const { return n11 + n01; }

  friend bool operator==(const ContingencyTable&, const ContingencyTable&) = default;
};

inline nlohmann::json table_json(const ContingencyTable& t) {
  return nlohmann::json{{"n11", t.n11}, {"n10", t.n10}, {"n01", t.n01}, {"n00", t.n00}};
}

inline ContingencyTable table_from_json(const nlohmann::json& j) {
  ContingencyTable t;
  for (const char* cell : {"n11", "n10", "n01", "n00"}) {
    auto it = j.find(cell);
    if (it == j.end() || !it->is_number_integer()) {
      throw SchemaError(std::string("table JSON: missing or non-integer cell '") + cell + "'");
    }
    long long v = it->get<long long>();
    if (v < 0) throw SchemaError(std::string("table JSON: negative cell '") + cell + "'");
    if (cell[1] == '1' && cell[2] == '1') t.n11 = v;
    else if (cell[1] == '1') t.n10 = v;
    else if (cell[2] == '1') t.n01 = v;
    else t.n00 = v;
  }
  return t;
}

/// Parses "n11,n10,n01,n00".
inline ContingencyTable table_from_cells(std::string_view spec) {
  long long cells[4];
  std::size_t begin = 0;
  int idx = 0;
  for (std::size_t i = 0; i <= spec.size(); ++i) {
    if (i == spec.size() || spec[i] == ',') {
      if (idx >= 4) throw ConfigError("table spec: expected 4 cells (n11,n10,n01,n00)");
      std::string cell(spec.substr(begin, i - begin));
      try {
        std::size_t used = 0;
        cells[idx] = std::stoll(cell, &used);
        if (used != cell.size()) throw std::invalid_argument(cell);
      } catch (const std::exception&) {
        throw ConfigError("table spec: bad cell '" + cell + "'");
      }
      if (cells[idx] < 0) throw ConfigError("table spec: negative cell '" + cell + "'");
      ++idx;
      begin = i + 1;
    }
  }
  if (idx != 4) throw ConfigError("table spec: expected 4 cells (n11,n10,n01,n00)");
  return ContingencyTable{cells[0], cells[1], cells[2], cells[3]};
}

namespace detail {

struct KahanSum {
  double sum = 0.0;
  double carry = 0.0;
  void add(double v) {
    double y = v - carry;
    double t = sum + y;
    carry = (t - sum) - y;
    sum = t;
  }
};

inline long long support_min(long long N, long long K, long long n) {
  return std::max<long long>(0, n + K - N);
}
inline long long support_max(long long K, long long n) { return std::min(n, K); }

// Cumulative log-factorials in compensated long double. lgamma carries an
// absolute error of ~1e-11 at arguments near 2e4, which survives the
// cancellation inside log pmf values and pushes normalization past 1e-12;
// the table stays near machine epsilon.
class LogFactorialTable {
 public:
  long double operator()(long long n) {
    if (n >= kCap) return std::lgamma(static_cast<long double>(n) + 1.0L);
    if (n >= static_cast<long long>(values_.size())) extend(n);
    return values_[static_cast<std::size_t>(n)];
  }

 private:
  static constexpr long long kCap = 1 << 21;

  void extend(long long n) {
    values_.reserve(static_cast<std::size_t>(n) + 1);
    while (static_cast<long long>(values_.size()) <= n) {
      long double x = std::log(static_cast<long double>(values_.size()));
      long double y = x - carry_;
      long double t = sum_ + y;
      carry_ = (t - sum_) - y;
      sum_ = t;
      values_.push_back(sum_);
    }
  }

  std::vector<long double> values_{0.0L};  // log 0!
  long double sum_ = 0.0L;
  long double carry_ = 0.0L;
};

inline long double log_factorial(long long n) {
  thread_local LogFactorialTable table;
  return table(n);
}

}  // namespace detail

/// log C(n, k); -inf outside 0 <= k <= n.
inline double log_choose(long long n, long long k) {
  if (k < 0 || k > n || n < 0) return -std::numeric_limits<double>::infinity();
  return static_cast<double>(detail::log_factorial(n) - detail::log_factorial(k) -
                             detail::log_factorial(n - k));
}

/// log of C(K,k) C(N-K,n-k) / C(N,n): the chance of drawing k of the K
/// marked items when taking n of N. Throws outside the support.
inline double log_hypergeom_pmf(long long k, long long N, long long K, long long n) {
  if (N < 0 || K < 0 || n < 0 || K > N || n > N) {
    throw std::domain_error("log_hypergeom_pmf: invalid population parameters");
  }
  if (k < detail::support_min(N, K, n) || k > detail::support_max(K, n)) {
    throw std::domain_error("log_hypergeom_pmf: k=" + std::to_string(k) + " outside support");
  }
  return log_choose(K, k) + log_choose(N - K, n - k) - log_choose(N, n);
}

/// P(X <= x) for the central hypergeometric distribution. Sums whichever
/// tail has fewer terms (complementing when it is the upper one) with
/// compensated accumulation; long tails at N ~ 1e4 lose digits otherwise.
inline double hypergeom_cdf(long long x, long long N, long long K, long long n) {
  long long lo = detail::support_min(N, K, n);
  long long hi = detail::support_max(K, n);
  if (x < lo) return 0.0;
  if (x >= hi) return 1.0;

  bool complement = (x - lo) > (hi - x - 1);
  long long from = complement ? x + 1 : lo;
  long long to = complement ? hi : x;

  double max_log = -std::numeric_limits<double>::infinity();
  std::vector<double> logs;
  logs.reserve(static_cast<std::size_t>(to - from + 1));
  for (long long k = from; k <= to; ++k) {
    double lp = log_hypergeom_pmf(k, N, K, n);
    logs.push_back(lp);
    if (lp > max_log) max_log = lp;
  }
  detail::KahanSum acc;
  for (double lp : logs) acc.add(std::exp(lp - max_log));
  double tail = std::exp(max_log) * acc.sum;
  double p = complement ? 1.0 - tail : tail;
  return std::min(1.0, std::max(0.0, p));
}

namespace detail {

// Normalized noncentral weights over the support plus the distribution
// mean; everything is computed in log space with max-subtraction.
struct NoncentralTable {
  long long lo = 0;
  std::vector<double> prob;
  double mean = 0.0;
};

inline NoncentralTable noncentral_table(long long N, long long K, long long n, double psi) {
  if (!(psi > 0.0) || !std::isfinite(psi)) {
    throw std::domain_error("noncentral hypergeometric: psi must be positive and finite");
  }
  long long lo = support_min(N, K, n);
  long long hi = support_max(K, n);
  double log_psi = std::log(psi);

  std::vector<double> logs;
  logs.reserve(static_cast<std::size_t>(hi - lo + 1));
  double max_log = -std::numeric_limits<double>::infinity();
  for (long long k = lo; k <= hi; ++k) {
    double l = log_choose(K, k) + log_choose(N - K, n - k) + static_cast<double>(k) * log_psi;
    logs.push_back(l);
    if (l > max_log) max_log = l;
  }
  KahanSum norm;
  KahanSum weighted;
  NoncentralTable table;
  table.lo = lo;
  table.prob.resize(logs.size());
  for (std::size_t i = 0; i < logs.size(); ++i) {
    double w = std::exp(logs[i] - max_log);
    table.prob[i] = w;
    norm.add(w);
    weighted.add(w * static_cast<double>(lo + static_cast<long long>(i)));
  }
  for (double& w : table.prob) w /= norm.sum;
  table.mean = weighted.sum / norm.sum;
  return table;
}

}  // namespace detail

/// Probability mass at k under the odds-weighted (noncentral)
/// hypergeometric distribution with odds ratio psi. psi = 1 reduces to
/// the central distribution.
inline double noncentral_pmf(long long k, long long N, long long K, long long n, double psi) {
  long long lo = detail::support_min(N, K, n);
  long long hi = detail::support_max(K, n);
  if (k < lo || k > hi) {
    throw std::domain_error("noncentral_pmf: k=" + std::to_string(k) + " outside support");
  }
  detail::NoncentralTable t = detail::noncentral_table(N, K, n, psi);
  return t.prob[static_cast<std::size_t>(k - lo)];
}

inline double noncentral_mean(long long N, long long K, long long n, double psi) {
  return detail::noncentral_table(N, K, n, psi).mean;
}

inline double noncentral_cdf(long long x, long long N, long long K, long long n, double psi) {
  detail::NoncentralTable t = detail::noncentral_table(N, K, n, psi);
  long long hi = t.lo + static_cast<long long>(t.prob.size()) - 1;
  if (x < t.lo) return 0.0;
  if (x >= hi) return 1.0;
  detail::KahanSum acc;
  for (long long k = t.lo; k <= x; ++k) acc.add(t.prob[static_cast<std::size_t>(k - t.lo)]);
  return std::min(1.0, std::max(0.0, acc.sum));
}

/// Output of the one-sided ("less") exact test on a 2x2 table.
struct FisherResult {
  double p_value = 1.0;
  // Conditional MLE of the odds ratio; +inf at the upper support edge,
  // absent for degenerate tables.
  std::optional<double> odds_ratio;
  double ci_low = 0.0;  // fixed at 0 for the "less" alternative
  double ci_high = std::numeric_limits<double>::infinity();
  double conf_level = 0.95;
  bool degenerate = false;
};

namespace detail {

// Bisection on log(psi) for a monotone-increasing objective, bracket
// widened geometrically first. Tolerance is on the log scale, which is
// relative tolerance on psi itself.
template <typename F>
double solve_log_psi(F objective, double tol = 1e-9, int max_iter = 200) {
  double lo = -1.0, hi = 1.0;
  double step = 1.0;
  while (objective(std::exp(lo)) > 0.0 && lo > -600.0) {
    lo -= step;
    step *= 2.0;
  }
  step = 1.0;
  while (objective(std::exp(hi)) < 0.0 && hi < 600.0) {
    hi += step;
    step *= 2.0;
  }
  for (int i = 0; i < max_iter && (hi - lo) > tol; ++i) {
    double mid = 0.5 * (lo + hi);
    (objective(std::exp(mid)) < 0.0 ? lo : hi) = mid;
  }
  return std::exp(0.5 * (lo + hi));
}

}  // namespace detail

/// One-sided Fisher's exact test, alternative "odds ratio < 1", on the
/// (tested, crashed) table. Conditions on both margins: with N the grand
/// total, K the crashed margin, n the tested margin, and x = n11, the
/// p-value is the lower tail P(X <= x) of the central distribution. The
/// odds-ratio estimate solves E_psi[X] = x; the upper confidence bound
/// solves P_psi(X <= x) = 1 - conf_level. Tables with a single-point
/// support (a zero margin) come back flagged degenerate.
inline FisherResult fisher_less(const ContingencyTable& t, double conf_level = 0.95) {
  if (t.n11 < 0 || t.n10 < 0 || t.n01 < 0 || t.n00 < 0) {
    throw std::domain_error("fisher_less: negative cell");
  }
  if (!(conf_level > 0.0 && conf_level < 1.0)) {
    throw std::domain_error("fisher_less: conf_level must be in (0,1)");
  }
  const long long N = t.total();
  const long long K = t.crashed_total();
  const long long n = t.tested_total();
  const long long x = t.n11;
  const long long lo = detail::support_min(N, K, n);
  const long long hi = detail::support_max(K, n);

  FisherResult result;
  result.conf_level = conf_level;

  if (lo == hi) {
    result.degenerate = true;
    result.p_value = 1.0;
    return result;
  }

  result.p_value = hypergeom_cdf(x, N, K, n);

  if (x == lo) {
    result.odds_ratio = 0.0;
  } else if (x == hi) {
    result.odds_ratio = std::numeric_limits<double>::infinity();
  } else {
    result.odds_ratio = detail::solve_log_psi(
        [&](double psi) { return noncentral_mean(N, K, n, psi) - static_cast<double>(x); });
  }

  if (x == hi) {
    result.ci_high = std::numeric_limits<double>::infinity();
  } else {
    const double alpha = 1.0 - conf_level;
    // P_psi(X <= x) decreases in psi; negate to get an increasing objective.
    result.ci_high = detail::solve_log_psi(
        [&](double psi) { return alpha - noncentral_cdf(x, N, K, n, psi); });
  }
  return result;
}

/// Round half-up at `decimals` places, the convention used for report
/// tables (printf alone rounds ties to even).
inline double round_half_up(double value, int decimals) {
  double scale = std::pow(10.0, decimals);
  return std::floor(value * scale + 0.5) / scale;
}

/// Each cell as a share of the grand total, percent, one decimal.
struct CellPercentages {
  double n11 = 0.0;
  double n10 = 0.0;
  double n01 = 0.0;
  double n00 = 0.0;
};

inline CellPercentages summarize_percentages(const ContingencyTable& t) {
  long long N = t.total();
  if (N <= 0) throw std::domain_error("summarize_percentages: empty table");
  auto pct = [N](long long cell) {
    return round_half_up(100.0 * static_cast<double>(cell) / static_cast<double>(N), 1);
  };
  return CellPercentages{pct(t.n11), pct(t.n10), pct(t.n01), pct(t.n00)};
}

namespace detail {

inline std::string fixed_decimals(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, round_half_up(v, decimals));
  return buf;
}

inline std::string full_precision(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace detail

/// "p=0.278, OR=0.915, CI=[0, 1.146]" with half-up display rounding;
/// internal values stay unrounded.
inline std::string fisher_display_line(const FisherResult& r) {
  std::string line = "p=" + detail::fixed_decimals(r.p_value, 3);
  line += ", OR=";
  if (!r.odds_ratio) line += "NA";
  else if (std::isinf(*r.odds_ratio)) line += "inf";
  else line += detail::fixed_decimals(*r.odds_ratio, 3);
  line += ", CI=[0, ";
  line += std::isinf(r.ci_high) ? "inf" : detail::fixed_decimals(r.ci_high, 3);
  line += "]";
  return line;
}

inline nlohmann::json fisher_result_json(const FisherResult& r) {
  nlohmann::json j{
      {"alternative", "less"},
      {"conf_level", r.conf_level},
      {"degenerate", r.degenerate},
      {"p_value", detail::full_precision(r.p_value)},
      {"ci_low", "0"},
  };
  if (!r.odds_ratio) j["odds_ratio"] = nullptr;
  else if (std::isinf(*r.odds_ratio)) j["odds_ratio"] = "inf";
  else j["odds_ratio"] = detail::full_precision(*r.odds_ratio);
  j["ci_high"] = std::isinf(r.ci_high) ? "inf" : detail::full_precision(r.ci_high);
  j["display"] = fisher_display_line(r);
  return j;
}

}  // namespace crashcov::stats

#endif
