#include "metroscope/evolution.hpp"

#include <cmath>
#include <string>
#include <unordered_map>
#include <vector>

#include "detail/numeric.hpp"
#include "detail/pair_sum.hpp"

namespace metroscope {

namespace {

void validate_order(double order) {
  if (!(order > 0.0) || !std::isfinite(order))
    raise(ErrorCode::InvalidArgument, "nonlinearity order k must be > 0");
}

void validate_weights(std::span<const double> weights) {
  if (weights.empty())
    raise(ErrorCode::InvalidArgument, "evolution needs at least one mode");
  for (double w : weights)
    if (!(w >= 0.0 && w <= 1.0))
      raise(ErrorCode::InvalidArgument,
            "mode weights must lie in [0, 1], got " + std::to_string(w));
}

/// Truncated Fock-basis series sum_{j>=0} z^j/j! * e^{i phase (j+offset)^k},
/// scaled by e^{log_prefactor}. The tail after index j is bounded by
/// e^{log_prefactor} R^{j+1}/(j+1)! e^R with R >= |z|; the loop stops once
/// that certified bound drops below epsilon.
Complex phase_series(Complex z, double radius, double log_prefactor,
                     std::int64_t offset, double order, double phase,
                     const SeriesBudget& budget) {
  if (std::abs(z) == 0.0) {
    // Only the j = 0 term survives.
    return std::polar(std::exp(log_prefactor),
                      phase * occupation_phase(offset, order));
  }
  const double log_eps = std::log(budget.epsilon);
  const double log_z = std::log(std::abs(z));
  const double log_r = std::log(radius);
  const double arg_z = std::arg(z);
  detail::KahanComplex acc;
  for (std::int64_t j = 0; j <= budget.hard_cap; ++j) {
    const double log_mag =
        log_prefactor + double(j) * log_z - detail::log_factorial(j);
    const double angle =
        double(j) * arg_z + phase * occupation_phase(j + offset, order);
    acc.add(std::polar(std::exp(log_mag), angle));
    const double log_tail = log_prefactor + double(j + 1) * log_r -
                            detail::log_factorial(j + 1) + radius;
    if (log_tail <= log_eps) return acc.value();
  }
  const double achieved = std::exp(log_prefactor +
                                   double(budget.hard_cap + 1) * log_r -
                                   detail::log_factorial(budget.hard_cap + 1) +
                                   radius);
  raise(ErrorCode::TruncationOverflow,
        "truncation overflow: tail bound " + std::to_string(achieved) +
            " above epsilon " + std::to_string(budget.epsilon) + " after " +
            std::to_string(budget.hard_cap) + " terms");
}

struct SeriesKey {
  std::uint64_t z_re, z_im, radius, log_pref;
  std::int64_t offset;

  bool operator==(const SeriesKey&) const = default;
};

struct SeriesKeyHash {
  std::size_t operator()(const SeriesKey& k) const {
    std::uint64_t h = 1469598103934665603ull;
    for (std::uint64_t v : {k.z_re, k.z_im, k.radius, k.log_pref,
                            static_cast<std::uint64_t>(k.offset)}) {
      h ^= v;
      h *= 1099511628211ull;
    }
    return static_cast<std::size_t>(h);
  }
};

}  // namespace

void validate_budget(const SeriesBudget& budget) {
  if (!(budget.epsilon > 0.0 && budget.epsilon < 1.0))
    raise(ErrorCode::InvalidArgument, "series epsilon must lie in (0, 1)");
  if (budget.hard_cap < 16)
    raise(ErrorCode::InvalidArgument, "series hard cap must be at least 16");
}

EvolutionSpec EvolutionSpec::per_mode(double order,
                                      std::vector<double> mode_weights) {
  validate_order(order);
  validate_weights(mode_weights);
  return EvolutionSpec(Generator::PerMode, order, std::move(mode_weights));
}

EvolutionSpec EvolutionSpec::collective(double order, double weight,
                                        int mode_count) {
  validate_order(order);
  if (mode_count < 1)
    raise(ErrorCode::InvalidArgument, "evolution needs at least one mode");
  std::vector<double> weights(static_cast<std::size_t>(mode_count), weight);
  validate_weights(weights);
  return EvolutionSpec(Generator::Collective, order, std::move(weights));
}

double EvolutionSpec::rate_scale() const noexcept {
  double best = 0.0;
  for (double w : weights_) best = std::max(best, w);
  return best;
}

double occupation_phase(std::int64_t occupation, double order) {
  if (occupation == 0) return 0.0;
  if (order == 1.0) return double(occupation);
  return std::pow(double(occupation), order);
}

Complex single_mode_factor(const ModeFactor& bra, const ModeFactor& ket,
                           double order, double phase,
                           const SeriesBudget& budget) {
  validate_order(order);
  validate_budget(budget);
  if (!std::isfinite(phase))
    raise(ErrorCode::InvalidArgument, "phase must be finite");

  if (bra.is_number() && ket.is_number()) {
    if (bra.occupation() != ket.occupation()) return {0.0, 0.0};
    return std::polar(1.0, phase * occupation_phase(bra.occupation(), order));
  }
  if (bra.is_number() != ket.is_number()) {
    const std::int64_t n =
        bra.is_number() ? bra.occupation() : ket.occupation();
    return factor_overlap(bra, ket) *
           std::polar(1.0, phase * occupation_phase(n, order));
  }
  const Complex a = bra.amplitude();
  const Complex b = ket.amplitude();
  const Complex z = std::conj(a) * b;
  const double radius = std::abs(a) * std::abs(b);
  const double log_prefactor = -0.5 * (std::norm(a) + std::norm(b));
  return phase_series(z, radius, log_prefactor, 0, order, phase, budget);
}

Complex collective_factor(std::span<const ModeFactor> bra,
                          std::span<const ModeFactor> ket, double order,
                          double phase, const SeriesBudget& budget) {
  validate_order(order);
  validate_budget(budget);
  if (bra.size() != ket.size())
    raise(ErrorCode::DimensionMismatch,
          "collective bracket needs equal mode counts");
  if (!std::isfinite(phase))
    raise(ErrorCode::InvalidArgument, "phase must be finite");

  Complex z{0.0, 0.0};
  double radius = 0.0;
  double log_prefactor = 0.0;
  Complex prefactor{1.0, 0.0};
  std::int64_t offset = 0;
  for (std::size_t m = 0; m < bra.size(); ++m) {
    const ModeFactor& fb = bra[m];
    const ModeFactor& fk = ket[m];
    if (fb.is_number() && fk.is_number()) {
      if (fb.occupation() != fk.occupation()) return {0.0, 0.0};
      offset += fb.occupation();
    } else if (fb.is_coherent() && fk.is_coherent()) {
      z += std::conj(fb.amplitude()) * fk.amplitude();
      radius += std::abs(fb.amplitude()) * std::abs(fk.amplitude());
      log_prefactor +=
          -0.5 * (std::norm(fb.amplitude()) + std::norm(fk.amplitude()));
    } else {
      // The number side pins the Fock index; the mode reduces to its closed
      // cross term with the occupation joining the phase offset.
      prefactor *= factor_overlap(fb, fk);
      offset += fb.is_number() ? fb.occupation() : fk.occupation();
    }
  }
  return prefactor *
         phase_series(z, radius, log_prefactor, offset, order, phase, budget);
}

Complex evolved_overlap(const SuperpositionState& state,
                        const EvolutionSpec& evolution, double theta,
                        const SeriesBudget& budget) {
  validate_budget(budget);
  if (evolution.mode_count() != state.mode_count())
    raise(ErrorCode::DimensionMismatch,
          "evolution weights cover " + std::to_string(evolution.mode_count()) +
              " modes but the state has " + std::to_string(state.mode_count()));
  if (!std::isfinite(theta))
    raise(ErrorCode::InvalidArgument, "theta must be finite");

  const auto table_ptr = detail::term_table_for(state);
  const detail::TermTable& table = *table_ptr;
  const double order = evolution.order();

  if (evolution.generator() == Generator::PerMode) {
    const detail::WeightClasses wc =
        detail::classify_weights(evolution.mode_weights());
    const int unique = table.unique_count();
    const int classes = static_cast<int>(wc.values.size());
    const std::size_t slots = static_cast<std::size_t>(unique) * unique * classes;

    if (slots <= (std::size_t{1} << 22)) {
      // Brackets cached per (bra factor, ket factor, weight class); the pair
      // loop then only multiplies cached values.
      std::vector<Complex> cache(slots);
      std::vector<char> ready(slots, 0);
      auto lookup = [&](int fb, int fk, int m) {
        const std::size_t idx =
            (static_cast<std::size_t>(fb) * unique + fk) * classes +
            wc.wid[static_cast<std::size_t>(m)];
        if (!ready[idx]) {
          cache[idx] = single_mode_factor(
              table.factors[static_cast<std::size_t>(fb)],
              table.factors[static_cast<std::size_t>(fk)], order,
              wc.values[static_cast<std::size_t>(
                  wc.wid[static_cast<std::size_t>(m)])] *
                  theta,
              budget);
          ready[idx] = 1;
        }
        return cache[idx];
      };
      return detail::pair_sum(table, lookup);
    }
    std::unordered_map<std::uint64_t, Complex> cache;
    auto lookup = [&](int fb, int fk, int m) {
      const std::uint64_t key =
          (static_cast<std::uint64_t>(fb) * static_cast<std::uint64_t>(unique) +
           static_cast<std::uint64_t>(fk)) *
              static_cast<std::uint64_t>(classes) +
          static_cast<std::uint64_t>(wc.wid[static_cast<std::size_t>(m)]);
      auto it = cache.find(key);
      if (it == cache.end()) {
        it = cache
                 .emplace(key,
                          single_mode_factor(
                              table.factors[static_cast<std::size_t>(fb)],
                              table.factors[static_cast<std::size_t>(fk)],
                              order,
                              wc.values[static_cast<std::size_t>(
                                  wc.wid[static_cast<std::size_t>(m)])] *
                                  theta,
                              budget))
                 .first;
      }
      return it->second;
    };
    return detail::pair_sum(table, lookup);
  }

  // Collective generator: one total-number series per term pair. The series
  // depends only on the reduced inputs (z, R, prefactor exponent, offset),
  // which repeat heavily across pairs of structured states, so it is
  // memoized on their exact bit patterns.
  const double phase = evolution.mode_weights()[0] * theta;
  std::unordered_map<SeriesKey, Complex, SeriesKeyHash> memo;
  const int modes = table.mode_count;
  detail::KahanComplex acc;
  for (const auto& bucket : table.buckets) {
    for (std::int64_t i : bucket) {
      const Complex ci =
          std::conj(table.coefficients[static_cast<std::size_t>(i)]);
      const std::int32_t* fi = table.row(i);
      for (std::int64_t j : bucket) {
        const std::int32_t* fj = table.row(j);
        Complex z{0.0, 0.0};
        double radius = 0.0;
        double log_prefactor = 0.0;
        Complex prefactor{1.0, 0.0};
        std::int64_t offset = 0;
        bool zero = false;
        for (int m = 0; m < modes && !zero; ++m) {
          const ModeFactor& fb = table.factors[static_cast<std::size_t>(fi[m])];
          const ModeFactor& fk = table.factors[static_cast<std::size_t>(fj[m])];
          if (fb.is_number() && fk.is_number()) {
            if (fb.occupation() != fk.occupation()) {
              zero = true;
              break;
            }
            offset += fb.occupation();
          } else if (fb.is_coherent() && fk.is_coherent()) {
            z += std::conj(fb.amplitude()) * fk.amplitude();
            radius += std::abs(fb.amplitude()) * std::abs(fk.amplitude());
            log_prefactor +=
                -0.5 * (std::norm(fb.amplitude()) + std::norm(fk.amplitude()));
          } else {
            prefactor *= factor_overlap(fb, fk);
            offset += fb.is_number() ? fb.occupation() : fk.occupation();
          }
        }
        if (zero) continue;
        const SeriesKey key{std::bit_cast<std::uint64_t>(z.real()),
                            std::bit_cast<std::uint64_t>(z.imag()),
                            std::bit_cast<std::uint64_t>(radius),
                            std::bit_cast<std::uint64_t>(log_prefactor),
                            offset};
        auto it = memo.find(key);
        if (it == memo.end()) {
          it = memo.emplace(key, phase_series(z, radius, log_prefactor, offset,
                                              order, phase, budget))
                   .first;
        }
        acc.add(ci * table.coefficients[static_cast<std::size_t>(j)] *
                prefactor * it->second);
      }
    }
  }
  return acc.value();
}

}  // namespace metroscope
