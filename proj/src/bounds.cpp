#include "qbn/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "qbn/errors.hpp"

namespace qbn::bounds {

namespace {

void require_unit(double x, const char* name) {
  if (!(x > 0.0 && x < 1.0)) {
    throw InvalidArgument(std::string(name) + " must lie in (0, 1)");
  }
}

std::uint64_t ceil_count(double x) {
  if (!std::isfinite(x) || x > 1.8e19) throw InvalidArgument("bound overflows a 64-bit count");
  return static_cast<std::uint64_t>(std::max(1.0, std::ceil(x)));
}

}  // namespace

std::uint64_t m_lsq(double eps, double delta) {
  require_unit(eps, "epsilon");
  require_unit(delta, "delta");
  return ceil_count(std::log(2.0 / delta) / (2.0 * eps * eps));
}

std::uint64_t m_sq(double eps, double delta) {
  require_unit(eps, "epsilon");
  require_unit(delta, "delta");
  return ceil_count(2.0 / (eps * eps) * std::log(4.0 / delta));
}

std::uint64_t m_prime_d(double eps, double delta, std::uint64_t m_sq_value) {
  require_unit(eps, "epsilon");
  require_unit(delta, "delta");
  if (m_sq_value < 1) throw InvalidArgument("m_sq must be at least 1");
  return ceil_count(8.0 / (eps * eps) * std::log(2.0 * static_cast<double>(m_sq_value) / delta));
}

std::uint64_t m_d(double eps, double delta, double lambda) {
  require_unit(eps, "epsilon");
  require_unit(delta, "delta");
  if (!(lambda > 0.0 && lambda <= 1.0)) throw InvalidArgument("lambda must lie in (0, 1]");
  const double msq = static_cast<double>(m_sq(eps, delta));
  const double mpd = static_cast<double>(m_prime_d(eps, delta, m_sq(eps, delta)));
  const double log_term = std::log(4.0 * msq / delta);
  const double rare = 2.0 / lambda * (mpd + log_term);
  const double base = 8.0 / (eps * eps) * log_term;
  return ceil_count(std::max(rare, base));
}

std::uint64_t m_prime_lsq(double eps, double delta, std::uint64_t k_entries,
                          std::uint64_t n_vars, double c) {
  require_unit(eps, "epsilon");
  require_unit(delta, "delta");
  if (k_entries < 1 || n_vars < 1) throw InvalidArgument("K and N must be at least 1");
  if (!(c > 1.0)) throw InvalidArgument("c must exceed 1");
  const double k = static_cast<double>(k_entries);
  const double n = static_cast<double>(n_vars);
  const double sum = std::log(2.0 / delta) + k * std::log(2.0 * k / eps) +
                     n * k * std::log(2.0 + c - std::log(eps));
  return ceil_count(sum / (4.0 * eps * eps));
}

}  // namespace qbn::bounds
