#include <gtest/gtest.h>

#include <cmath>

#include "qbn/bounds.hpp"
#include "qbn/errors.hpp"

using namespace qbn;
using namespace qbn::bounds;

TEST(Bounds, Fixtures) {
  EXPECT_EQ(m_lsq(0.1, 0.05), 185u);
  EXPECT_EQ(m_lsq(0.5, 0.5), 3u);
  EXPECT_EQ(m_sq(0.1, 0.05), 877u);
  EXPECT_EQ(m_sq(0.5, 0.5), 17u);
  // 800 ln 35080 = 8372.31
  EXPECT_EQ(m_prime_d(0.1, 0.05, 877), 8373u);
  EXPECT_EQ(m_prime_d(0.5, 0.5, 17), 136u);
  // Branches 33058.18 and 1781.85.
  EXPECT_EQ(m_d(0.2, 0.1, 0.1), 33059u);
  EXPECT_EQ(m_prime_lsq(0.1, 0.1, 1, 1, 2.0), 196u);
}

TEST(Bounds, InverseSquareScaling) {
  const double base = std::log(2 / 0.05) / (2 * 0.1 * 0.1);
  const auto halved = m_lsq(0.05, 0.05);
  EXPECT_GE(static_cast<double>(halved), 4 * base);
  EXPECT_LE(static_cast<double>(halved), 4 * base + 1);
}

TEST(Bounds, RangeErrors) {
  EXPECT_THROW(m_lsq(0.0, 0.1), InvalidArgument);
  EXPECT_THROW(m_lsq(1.0, 0.1), InvalidArgument);
  EXPECT_THROW(m_sq(0.1, 0.0), InvalidArgument);
  EXPECT_THROW(m_sq(0.1, std::nan("")), InvalidArgument);
  EXPECT_THROW(m_prime_d(0.1, 0.1, 0), InvalidArgument);
  EXPECT_THROW(m_d(0.1, 0.1, 0.0), InvalidArgument);
  EXPECT_THROW(m_d(0.1, 0.1, 1.5), InvalidArgument);
  EXPECT_THROW(m_prime_lsq(0.1, 0.1, 0, 1, 2.0), InvalidArgument);
  EXPECT_THROW(m_prime_lsq(0.1, 0.1, 1, 1, 1.0), InvalidArgument);
  EXPECT_THROW(m_lsq(1e-12, 0.1), InvalidArgument);
}

TEST(Bounds, MonotoneOverSweep) {
  for (int i = 0; i < 100; ++i) {
    const double e1 = 0.01 + 0.009 * i;
    const double e2 = e1 + 0.004;
    const double d1 = 0.005 + 0.009 * i;
    const double d2 = d1 + 0.004;
    EXPECT_GE(m_lsq(e1, d1), m_lsq(e2, d1));
    EXPECT_GE(m_lsq(e1, d1), m_lsq(e1, d2));
    EXPECT_GE(m_sq(e1, d1), m_sq(e2, d1));
    EXPECT_GE(m_sq(e1, d1), m_sq(e1, d2));
    const auto m = m_sq(e1, d1);
    EXPECT_GE(m_prime_d(e1, d1, m), m_prime_d(e2, d1, m));
    EXPECT_GE(m_prime_d(e1, d1, m), m_prime_d(e1, d2, m));
    EXPECT_GE(m_d(e1, d1, 0.3), m_d(e2, d1, 0.3));
    EXPECT_GE(m_d(e1, d1, 0.3), m_d(e1, d2, 0.3));
    EXPECT_GE(m_prime_lsq(e1, d1, 4, 3, 2.0), m_prime_lsq(e2, d1, 4, 3, 2.0));
    EXPECT_GE(m_prime_lsq(e1, d1, 4, 3, 2.0), m_prime_lsq(e1, d2, 4, 3, 2.0));
    EXPECT_GE(m_lsq(e1, d1), 1u);
  }
}

TEST(Bounds, PrimeDGrowsLogarithmically) {
  const double a = static_cast<double>(m_prime_d(0.1, 0.1, 100));
  const double b = static_cast<double>(m_prime_d(0.1, 0.1, 10000));
  // Difference is (8/ε²) ln 100 up to rounding.
  EXPECT_NEAR(b - a, 800 * std::log(100.0), 1.0);
}

TEST(Bounds, MdBranches) {
  const double eps = 0.2, delta = 0.1;
  const double msq = static_cast<double>(m_sq(eps, delta));
  const double mpd = static_cast<double>(m_prime_d(eps, delta, m_sq(eps, delta)));
  const double second = 8 / (eps * eps) * std::log(4 * msq / delta);
  auto first = [&](double lambda) { return 2 / lambda * (mpd + std::log(4 * msq / delta)); };
  EXPECT_EQ(m_d(eps, delta, 1.0), static_cast<std::uint64_t>(std::ceil(std::max(first(1.0), second))));
  // Halving λ doubles the (dominant) first branch.
  const double ratio = static_cast<double>(m_d(eps, delta, 0.05)) / static_cast<double>(m_d(eps, delta, 0.1));
  EXPECT_NEAR(ratio, 2.0, 1e-4);
  // Both branches recomputed at other points.
  for (double e : {0.05, 0.3, 0.9}) {
    for (double lambda : {1.0, 0.5, 0.01}) {
      const double ms = static_cast<double>(m_sq(e, 0.2));
      const double md = static_cast<double>(m_prime_d(e, 0.2, m_sq(e, 0.2)));
      const double l4 = std::log(4 * ms / 0.2);
      const double expect = std::max(2 / lambda * (md + l4), 8 / (e * e) * l4);
      EXPECT_EQ(m_d(e, 0.2, lambda), static_cast<std::uint64_t>(std::ceil(expect)));
    }
  }
}

TEST(Bounds, PrimeLsqLinearInN) {
  const double a = static_cast<double>(m_prime_lsq(0.1, 0.1, 5, 10, 2.0));
  const double b = static_cast<double>(m_prime_lsq(0.1, 0.1, 5, 20, 2.0));
  const double c = static_cast<double>(m_prime_lsq(0.1, 0.1, 5, 30, 2.0));
  EXPECT_NEAR((c - b) - (b - a), 0.0, 2.0);
  EXPECT_GT(b, a);
}

TEST(Bounds, PrimeLsqSuperlinearInK) {
  // The K ln K term outgrows the constant ln(2/δ) once K is moderate.
  for (std::uint64_t k = 4; k <= 1024; k *= 2) {
    EXPECT_GT(m_prime_lsq(0.1, 0.1, 2 * k, 3, 2.0), 2 * m_prime_lsq(0.1, 0.1, k, 3, 2.0));
  }
}
