#pragma once

#include <cstdint>

// Sample-complexity calculators. All logarithms are natural and every result
// is rounded up to an integer count. Out-of-range arguments throw
// InvalidArgument.
namespace qbn::bounds {

// Labeled queries for an ε-accurate score estimate with confidence 1-δ:
// ⌈ln(2/δ) / (2ε²)⌉.
std::uint64_t m_lsq(double eps, double delta);

// Unlabeled queries for the event-based estimate: ⌈(2/ε²) ln(4/δ)⌉.
std::uint64_t m_sq(double eps, double delta);

// Tuples that must match each query's evidence: ⌈(8/ε²) ln(2 m_sq / δ)⌉.
std::uint64_t m_prime_d(double eps, double delta, std::uint64_t m_sq_value);

// A-priori tuple count when every evidence has probability at least λ:
// ⌈max{(2/λ)[M'_D + ln(4 M_SQ/δ)], (8/ε²) ln(4 M_SQ/δ)}⌉ with M_SQ and M'_D
// taken from the two functions above.
std::uint64_t m_d(double eps, double delta, double lambda);

// Labeled queries for uniform convergence over nets with K CPT entries and N
// variables whose conditioning events keep mass above 2^{-cN}:
// ⌈(1/(4ε²)) (ln(2/δ) + K ln(2K/ε) + N K ln(2 + c - ln ε))⌉.
std::uint64_t m_prime_lsq(double eps, double delta, std::uint64_t k_entries,
                          std::uint64_t n_vars, double c);

}  // namespace qbn::bounds
