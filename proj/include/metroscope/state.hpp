#pragma once

#include <complex>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "metroscope/errors.hpp"

namespace metroscope {

using Complex = std::complex<double>;

class SuperpositionState;

namespace detail {
struct TermTable;
/// Shared index structure over a state's terms, built once per state and
/// cached (the state is immutable, so the table is a pure function of it).
std::shared_ptr<const TermTable> term_table_for(const SuperpositionState&);
}  // namespace detail

/// One bosonic-mode factor of a product term: either a coherent state with
/// a complex field amplitude, or a Fock (number) state with a fixed
/// occupation.
class ModeFactor {
 public:
  enum class Kind : std::uint8_t { Coherent, Number };

  static ModeFactor coherent(Complex amplitude);
  static ModeFactor number(std::int64_t occupation);

  Kind kind() const noexcept { return kind_; }
  bool is_coherent() const noexcept { return kind_ == Kind::Coherent; }
  bool is_number() const noexcept { return kind_ == Kind::Number; }

  /// Field amplitude; only meaningful for coherent factors.
  Complex amplitude() const noexcept { return amplitude_; }
  /// Occupation; only meaningful for number factors.
  std::int64_t occupation() const noexcept { return occupation_; }

  friend bool operator==(const ModeFactor& a, const ModeFactor& b) noexcept {
    if (a.kind_ != b.kind_) return false;
    if (a.kind_ == Kind::Number) return a.occupation_ == b.occupation_;
    return a.amplitude_ == b.amplitude_;
  }

 private:
  ModeFactor() = default;

  Kind kind_ = Kind::Number;
  Complex amplitude_{0.0, 0.0};
  std::int64_t occupation_ = 0;
};

/// Ordered list of mode factors, one per mode.
using ProductTerm = std::vector<ModeFactor>;

struct WeightedTerm {
  Complex coefficient;
  ProductTerm term;
};

/// A finite superposition of multimode product terms. This is the universal
/// state carrier: every state handled by the library is a list of
/// (coefficient, product-term) pairs over a fixed number of modes, never a
/// dense Fock-space array. All brackets the library needs factorize over
/// modes, so memory stays linear in term count times mode count.
class SuperpositionState {
 public:
  /// Validates: at least one term with a nonzero coefficient, every term has
  /// exactly `mode_count` factors, all values finite.
  SuperpositionState(std::vector<WeightedTerm> terms, int mode_count);

  int mode_count() const noexcept { return mode_count_; }
  std::size_t term_count() const noexcept { return terms_.size(); }
  std::span<const WeightedTerm> terms() const noexcept { return terms_; }

  /// Copy of this state rescaled to unit norm (exact Gram-based norm).
  SuperpositionState normalized() const;

 private:
  friend std::shared_ptr<const detail::TermTable> detail::term_table_for(
      const SuperpositionState&);

  std::vector<WeightedTerm> terms_;
  int mode_count_;
  mutable std::shared_ptr<const detail::TermTable> table_cache_;
};

enum class Family {
  CoherentCat,
  CoherentEntangled,
  CoherentSeparable,
  NumberCat,
  NumberEntangled,
  NumberSeparable,
  Noon,
};

/// Parameters selecting one of the builtin state families. `size` is the
/// subsystem count N (mode count for the entangled/separable families,
/// excitation count for the single-mode and N00N families). `alpha` is used
/// by the coherent families only.
struct FamilySpec {
  Family family;
  int size;
  Complex alpha{0.0, 0.0};
};

inline constexpr int kDefaultExpansionCap = 20;

/// Builds the requested family, normalized to unit norm via the exact Gram
/// matrix of its terms (no large-amplitude approximation). The separable
/// families expand into 2^N terms and are rejected with a term-count
/// overflow error when N exceeds `expansion_cap`.
SuperpositionState build_family(const FamilySpec& spec,
                                int expansion_cap = kDefaultExpansionCap);

/// <a|b> over all term pairs, using the coherent/number single-mode overlap
/// rules. Throws a dimension error on mode-count mismatch.
Complex inner_product(const SuperpositionState& a, const SuperpositionState& b);

/// Exact expectation of the total photon number. Requires a unit-norm
/// state; the imaginary residue of the pair sum must stay below 1e-10 and is
/// discarded.
double mean_photon_number(const SuperpositionState& state);

/// The nominal energy bookkeeping value: N|alpha|^2/2 for the coherent
/// families, N/2 for the number families and the N00N state.
double nominal_mean_photon(const FamilySpec& spec);

/// Single-factor bracket <bra|ket>.
Complex factor_overlap(const ModeFactor& bra, const ModeFactor& ket);

/// Single-factor number-weighted bracket <bra|n|ket>.
Complex factor_number_weighted(const ModeFactor& bra, const ModeFactor& ket);

bool family_is_coherent(Family family);
const char* family_name(Family family);
/// Parses a family name as used by the CLI and config files; throws an
/// invalid-argument error listing the valid names on failure.
Family parse_family(const std::string& name);

}  // namespace metroscope
