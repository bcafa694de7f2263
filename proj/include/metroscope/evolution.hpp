#pragma once

#include <span>
#include <vector>

#include "metroscope/state.hpp"

namespace metroscope {

enum class Generator { PerMode, Collective };

/// Error budget for the truncated coherent-state series. `epsilon` is an
/// absolute bound on the truncation error of each term-pair bracket; the
/// bound is certified analytically (the evolved phases are unimodular, so a
/// Poisson tail bound on the remaining terms is exact). `hard_cap` limits
/// the summation index; if the tail bound is not reached within it, the
/// bracket fails with a truncation-overflow error.
struct SeriesBudget {
  double epsilon = 1e-12;
  std::int64_t hard_cap = 100000;
};

void validate_budget(const SeriesBudget& budget);

/// Generator specification: per-mode sum of n_i^k or the collective
/// (sum n_i)^k, with a per-mode weight in [0,1] scaling the phase each mode
/// sees. The collective generator has no per-mode split, so it requires all
/// weights equal.
class EvolutionSpec {
 public:
  static EvolutionSpec per_mode(double order, std::vector<double> mode_weights);
  static EvolutionSpec collective(double order, double weight, int mode_count);

  Generator generator() const noexcept { return generator_; }
  double order() const noexcept { return order_; }
  std::span<const double> mode_weights() const noexcept { return weights_; }
  int mode_count() const noexcept { return static_cast<int>(weights_.size()); }

  /// Largest per-mode weight; the fastest phase rate any mode sees scales
  /// with it.
  double rate_scale() const noexcept;

 private:
  EvolutionSpec(Generator generator, double order, std::vector<double> weights)
      : generator_(generator), order_(order), weights_(std::move(weights)) {}

  Generator generator_;
  double order_;
  std::vector<double> weights_;
};

/// n^k with the convention 0^k = 0 for every k > 0 (covers fractional
/// orders on the vacuum).
double occupation_phase(std::int64_t occupation, double order);

/// <bra| exp(i * phase * n^k) |ket> for a single mode.
///
/// Number/number pairs are exact phase factors, number/coherent pairs are a
/// single closed term, and coherent/coherent pairs are summed in the Fock
/// basis until the analytic tail bound
///   exp(-(|a|^2+|b|^2)/2) * r^(n+1)/(n+1)! * exp(r),  r = |a||b|
/// falls below budget.epsilon.
Complex single_mode_factor(const ModeFactor& bra, const ModeFactor& ket,
                           double order, double phase,
                           const SeriesBudget& budget);

/// <bra| exp(i * phase * (sum_m n_m)^k) |ket> for whole product terms, by
/// total-number decomposition: coherent-mode pairs contribute through
/// z = sum conj(a_m) b_m, number and mixed modes pin a fixed occupation
/// offset added to the phase argument.
Complex collective_factor(std::span<const ModeFactor> bra,
                          std::span<const ModeFactor> ket, double order,
                          double phase, const SeriesBudget& budget);

/// <psi| U(theta) |psi> for U = exp(i theta H) with H per the evolution
/// spec. Requires a unit-norm state and matching mode counts.
Complex evolved_overlap(const SuperpositionState& state,
                        const EvolutionSpec& evolution, double theta,
                        const SeriesBudget& budget);

}  // namespace metroscope
