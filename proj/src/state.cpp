#include "metroscope/state.hpp"

#include <cmath>
#include <mutex>
#include <string>
#include <utility>

#include "detail/numeric.hpp"
#include "detail/pair_sum.hpp"

namespace metroscope {

namespace detail {

std::shared_ptr<const TermTable> term_table_for(
    const SuperpositionState& state) {
  static std::mutex cache_mutex;
  {
    std::lock_guard<std::mutex> lock(cache_mutex);
    if (state.table_cache_) return state.table_cache_;
  }
  auto built = std::make_shared<const TermTable>(
      build_term_table(state.terms(), {}, state.mode_count()));
  std::lock_guard<std::mutex> lock(cache_mutex);
  if (!state.table_cache_) state.table_cache_ = std::move(built);
  return state.table_cache_;
}

}  // namespace detail

namespace {

bool finite(Complex z) {
  return std::isfinite(z.real()) && std::isfinite(z.imag());
}

// Dense factor-pair bracket tables stay affordable up to this many unique
// factors; beyond it the pair loops fall back to direct evaluation.
constexpr int kDenseFactorLimit = 512;

Complex self_overlap(const SuperpositionState& state) {
  const auto table_ptr = detail::term_table_for(state);
  const detail::TermTable& table = *table_ptr;
  const int unique = table.unique_count();
  if (unique <= kDenseFactorLimit) {
    std::vector<Complex> dense(static_cast<std::size_t>(unique) * unique);
    for (int b = 0; b < unique; ++b)
      for (int k = 0; k < unique; ++k)
        dense[static_cast<std::size_t>(b) * unique + k] =
            factor_overlap(table.factors[static_cast<std::size_t>(b)],
                           table.factors[static_cast<std::size_t>(k)]);
    return detail::pair_sum(table, [&](int b, int k, int) {
      return dense[static_cast<std::size_t>(b) * unique + k];
    });
  }
  return detail::pair_sum(table, [&](int b, int k, int) {
    return factor_overlap(table.factors[static_cast<std::size_t>(b)],
                          table.factors[static_cast<std::size_t>(k)]);
  });
}

}  // namespace

ModeFactor ModeFactor::coherent(Complex amplitude) {
  if (!finite(amplitude))
    raise(ErrorCode::InvalidArgument,
          "coherent amplitude must have finite real and imaginary parts");
  ModeFactor f;
  f.kind_ = Kind::Coherent;
  f.amplitude_ = amplitude;
  return f;
}

ModeFactor ModeFactor::number(std::int64_t occupation) {
  if (occupation < 0)
    raise(ErrorCode::InvalidArgument, "occupation must be nonnegative");
  ModeFactor f;
  f.kind_ = Kind::Number;
  f.occupation_ = occupation;
  return f;
}

SuperpositionState::SuperpositionState(std::vector<WeightedTerm> terms,
                                       int mode_count)
    : terms_(std::move(terms)), mode_count_(mode_count) {
  if (mode_count_ < 1)
    raise(ErrorCode::InvalidArgument, "mode count must be at least 1");
  if (terms_.empty())
    raise(ErrorCode::InvalidArgument, "state needs at least one term");
  bool any_nonzero = false;
  for (const auto& wt : terms_) {
    if (!finite(wt.coefficient))
      raise(ErrorCode::InvalidArgument, "coefficients must be finite");
    if (wt.coefficient != Complex{0.0, 0.0}) any_nonzero = true;
    if (static_cast<int>(wt.term.size()) != mode_count_)
      raise(ErrorCode::DimensionMismatch,
            "every term must have one factor per mode (" +
                std::to_string(wt.term.size()) + " factors vs " +
                std::to_string(mode_count_) + " modes)");
  }
  if (!any_nonzero)
    raise(ErrorCode::InvalidArgument,
          "state needs at least one nonzero coefficient");
}

SuperpositionState SuperpositionState::normalized() const {
  const Complex n2 = self_overlap(*this);
  if (!(n2.real() > 0.0) || !std::isfinite(n2.real()))
    raise(ErrorCode::InvalidArgument,
          "state has non-positive squared norm " + std::to_string(n2.real()));
  const double scale = 1.0 / std::sqrt(n2.real());
  std::vector<WeightedTerm> scaled(terms_.begin(), terms_.end());
  for (auto& wt : scaled) wt.coefficient *= scale;
  return SuperpositionState(std::move(scaled), mode_count_);
}

Complex factor_overlap(const ModeFactor& bra, const ModeFactor& ket) {
  if (bra.is_number() && ket.is_number())
    return bra.occupation() == ket.occupation() ? Complex{1.0, 0.0}
                                                : Complex{0.0, 0.0};
  if (bra.is_coherent() && ket.is_coherent()) {
    const Complex a = bra.amplitude();
    const Complex b = ket.amplitude();
    return std::exp(-0.5 * std::norm(a) - 0.5 * std::norm(b) +
                    std::conj(a) * b);
  }
  // <n|alpha> = exp(-|alpha|^2/2) alpha^n / sqrt(n!) and its conjugate
  // partner; evaluated in log space so large occupations stay stable.
  const bool bra_number = bra.is_number();
  const std::int64_t n = bra_number ? bra.occupation() : ket.occupation();
  const Complex alpha = bra_number ? ket.amplitude() : std::conj(bra.amplitude());
  if (n == 0) return std::exp(Complex{-0.5 * std::norm(alpha), 0.0});
  const double mag = std::abs(alpha);
  if (mag == 0.0) return {0.0, 0.0};
  const double log_mag = -0.5 * std::norm(alpha) + double(n) * std::log(mag) -
                         0.5 * detail::log_factorial(n);
  return std::polar(std::exp(log_mag), double(n) * std::arg(alpha));
}

Complex factor_number_weighted(const ModeFactor& bra, const ModeFactor& ket) {
  if (bra.is_number() && ket.is_number())
    return bra.occupation() == ket.occupation()
               ? Complex{double(bra.occupation()), 0.0}
               : Complex{0.0, 0.0};
  if (bra.is_coherent() && ket.is_coherent())
    return std::conj(bra.amplitude()) * ket.amplitude() *
           factor_overlap(bra, ket);
  const std::int64_t n = bra.is_number() ? bra.occupation() : ket.occupation();
  return double(n) * factor_overlap(bra, ket);
}

SuperpositionState build_family(const FamilySpec& spec, int expansion_cap) {
  if (spec.size < 1)
    raise(ErrorCode::InvalidArgument, "family size N must be at least 1");
  if (family_is_coherent(spec.family) && std::abs(spec.alpha) == 0.0)
    raise(ErrorCode::InvalidArgument,
          "coherent families require |alpha| > 0");

  const int n = spec.size;
  const Complex alpha = spec.alpha;
  std::vector<WeightedTerm> terms;
  int modes = 1;

  auto uniform_term = [](int count, const ModeFactor& f) {
    return ProductTerm(static_cast<std::size_t>(count), f);
  };
  auto expand_separable = [&](const ModeFactor& zero, const ModeFactor& one) {
    if (n > expansion_cap)
      raise(ErrorCode::TermOverflow,
            "term-count overflow: separable family with N = " +
                std::to_string(n) + " expands to 2^" + std::to_string(n) +
                " terms (cap " + std::to_string(expansion_cap) + ")");
    modes = n;
    const std::int64_t count = std::int64_t{1} << n;
    terms.reserve(static_cast<std::size_t>(count));
    for (std::int64_t mask = 0; mask < count; ++mask) {
      ProductTerm term;
      term.reserve(static_cast<std::size_t>(n));
      for (int m = 0; m < n; ++m)
        term.push_back(((mask >> m) & 1) ? one : zero);
      terms.push_back({Complex{1.0, 0.0}, std::move(term)});
    }
  };

  switch (spec.family) {
    case Family::CoherentCat:
      modes = 1;
      terms.push_back({{1.0, 0.0}, {ModeFactor::coherent({0.0, 0.0})}});
      terms.push_back(
          {{1.0, 0.0}, {ModeFactor::coherent(std::sqrt(double(n)) * alpha)}});
      break;
    case Family::CoherentEntangled:
      modes = n;
      terms.push_back(
          {{1.0, 0.0}, uniform_term(n, ModeFactor::coherent({0.0, 0.0}))});
      terms.push_back({{1.0, 0.0}, uniform_term(n, ModeFactor::coherent(alpha))});
      break;
    case Family::CoherentSeparable:
      expand_separable(ModeFactor::coherent({0.0, 0.0}),
                       ModeFactor::coherent(alpha));
      break;
    case Family::NumberCat:
      modes = 1;
      terms.push_back({{1.0, 0.0}, {ModeFactor::number(0)}});
      terms.push_back({{1.0, 0.0}, {ModeFactor::number(n)}});
      break;
    case Family::NumberEntangled:
      modes = n;
      terms.push_back({{1.0, 0.0}, uniform_term(n, ModeFactor::number(0))});
      terms.push_back({{1.0, 0.0}, uniform_term(n, ModeFactor::number(1))});
      break;
    case Family::NumberSeparable:
      expand_separable(ModeFactor::number(0), ModeFactor::number(1));
      break;
    case Family::Noon:
      modes = 2;
      terms.push_back(
          {{1.0, 0.0}, {ModeFactor::number(0), ModeFactor::number(n)}});
      terms.push_back(
          {{1.0, 0.0}, {ModeFactor::number(n), ModeFactor::number(0)}});
      break;
  }
  return SuperpositionState(std::move(terms), modes).normalized();
}

Complex inner_product(const SuperpositionState& a, const SuperpositionState& b) {
  if (a.mode_count() != b.mode_count())
    raise(ErrorCode::DimensionMismatch,
          "mode-count mismatch: " + std::to_string(a.mode_count()) + " vs " +
              std::to_string(b.mode_count()));
  if (&a == &b) return self_overlap(a);
  const detail::TermTable table =
      detail::build_term_table(a.terms(), b.terms(), a.mode_count());
  const int unique = table.unique_count();
  if (unique <= kDenseFactorLimit) {
    std::vector<Complex> dense(static_cast<std::size_t>(unique) * unique);
    for (int u = 0; u < unique; ++u)
      for (int v = 0; v < unique; ++v)
        dense[static_cast<std::size_t>(u) * unique + v] =
            factor_overlap(table.factors[static_cast<std::size_t>(u)],
                           table.factors[static_cast<std::size_t>(v)]);
    return detail::pair_sum(table, [&](int u, int v, int) {
      return dense[static_cast<std::size_t>(u) * unique + v];
    });
  }
  return detail::pair_sum(table, [&](int u, int v, int) {
    return factor_overlap(table.factors[static_cast<std::size_t>(u)],
                          table.factors[static_cast<std::size_t>(v)]);
  });
}

double mean_photon_number(const SuperpositionState& state) {
  const auto table_ptr = detail::term_table_for(state);
  const detail::TermTable& table = *table_ptr;
  const int unique = table.unique_count();
  const int modes = table.mode_count;

  std::vector<Complex> ovl(static_cast<std::size_t>(unique) * unique);
  std::vector<Complex> weighted(static_cast<std::size_t>(unique) * unique);
  for (int u = 0; u < unique; ++u) {
    for (int v = 0; v < unique; ++v) {
      const std::size_t idx = static_cast<std::size_t>(u) * unique + v;
      ovl[idx] = factor_overlap(table.factors[static_cast<std::size_t>(u)],
                                table.factors[static_cast<std::size_t>(v)]);
      weighted[idx] =
          factor_number_weighted(table.factors[static_cast<std::size_t>(u)],
                                 table.factors[static_cast<std::size_t>(v)]);
    }
  }

  // <i| sum_m n_m |j> = sum_m w_m prod_{m' != m} o_{m'}, via prefix/suffix
  // products to avoid dividing by possibly-zero overlaps.
  std::vector<Complex> prefix(static_cast<std::size_t>(modes) + 1);
  std::vector<Complex> suffix(static_cast<std::size_t>(modes) + 1);
  detail::KahanComplex acc;
  for (const auto& bucket : table.buckets) {
    for (std::int64_t i : bucket) {
      const Complex ci =
          std::conj(table.coefficients[static_cast<std::size_t>(i)]);
      const std::int32_t* fi = table.row(i);
      for (std::int64_t j : bucket) {
        const std::int32_t* fj = table.row(j);
        prefix[0] = {1.0, 0.0};
        for (int m = 0; m < modes; ++m)
          prefix[static_cast<std::size_t>(m) + 1] =
              prefix[static_cast<std::size_t>(m)] *
              ovl[static_cast<std::size_t>(fi[m]) * unique + fj[m]];
        suffix[static_cast<std::size_t>(modes)] = {1.0, 0.0};
        for (int m = modes - 1; m >= 0; --m)
          suffix[static_cast<std::size_t>(m)] =
              suffix[static_cast<std::size_t>(m) + 1] *
              ovl[static_cast<std::size_t>(fi[m]) * unique + fj[m]];
        Complex pair{0.0, 0.0};
        for (int m = 0; m < modes; ++m)
          pair += weighted[static_cast<std::size_t>(fi[m]) * unique + fj[m]] *
                  prefix[static_cast<std::size_t>(m)] *
                  suffix[static_cast<std::size_t>(m) + 1];
        acc.add(ci * table.coefficients[static_cast<std::size_t>(j)] * pair);
      }
    }
  }

  const Complex total = acc.value();
  if (std::abs(total.imag()) > 1e-10)
    raise(ErrorCode::Internal,
          "mean photon number has imaginary residue " +
              std::to_string(total.imag()));
  return total.real() < 0.0 ? 0.0 : total.real();
}

double nominal_mean_photon(const FamilySpec& spec) {
  if (spec.size < 1)
    raise(ErrorCode::InvalidArgument, "family size N must be at least 1");
  if (family_is_coherent(spec.family))
    return double(spec.size) * std::norm(spec.alpha) / 2.0;
  return double(spec.size) / 2.0;
}

bool family_is_coherent(Family family) {
  switch (family) {
    case Family::CoherentCat:
    case Family::CoherentEntangled:
    case Family::CoherentSeparable:
      return true;
    default:
      return false;
  }
}

const char* family_name(Family family) {
  switch (family) {
    case Family::CoherentCat: return "coherent_cat";
    case Family::CoherentEntangled: return "coherent_entangled";
    case Family::CoherentSeparable: return "coherent_separable";
    case Family::NumberCat: return "number_cat";
    case Family::NumberEntangled: return "number_entangled";
    case Family::NumberSeparable: return "number_separable";
    case Family::Noon: return "noon";
  }
  return "unknown";
}

Family parse_family(const std::string& name) {
  static constexpr Family all[] = {
      Family::CoherentCat,     Family::CoherentEntangled,
      Family::CoherentSeparable, Family::NumberCat,
      Family::NumberEntangled, Family::NumberSeparable,
      Family::Noon};
  for (Family f : all)
    if (name == family_name(f)) return f;
  std::string valid;
  for (Family f : all) {
    if (!valid.empty()) valid += ", ";
    valid += family_name(f);
  }
  raise(ErrorCode::InvalidArgument,
        "unknown family '" + name + "' (valid: " + valid + ")");
}

}  // namespace metroscope
