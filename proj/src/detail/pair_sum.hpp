#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <span>
#include <unordered_map>
#include <vector>

#include "detail/numeric.hpp"
#include "metroscope/state.hpp"

namespace metroscope::detail {

/// Index structure over the terms of one state (or the concatenated terms
/// of two states, for cross brackets):
///  - factors deduplicated into a small unique list, with each term stored
///    as a row of factor ids,
///  - terms grouped into buckets by their occupation signature over the
///    modes where every term holds a number factor. Pairs from different
///    buckets have at least one mismatched number-state mode, so their
///    bracket is exactly zero and the pair loops skip them. For all-number
///    states this collapses the quadratic pair sum to the diagonal.
struct TermTable {
  int mode_count = 0;
  std::int64_t total_terms = 0;
  std::int64_t split = 0;  // first index belonging to the second state
  bool cross = false;
  std::vector<Complex> coefficients;
  std::vector<ModeFactor> factors;
  std::vector<std::int32_t> fid;  // total_terms x mode_count, row-major
  std::vector<std::vector<std::int64_t>> buckets;

  int unique_count() const { return static_cast<int>(factors.size()); }
  const std::int32_t* row(std::int64_t term) const {
    return fid.data() + term * mode_count;
  }
};

struct FactorKey {
  std::uint8_t kind;
  std::int64_t occupation;
  std::uint64_t re_bits;
  std::uint64_t im_bits;

  bool operator==(const FactorKey&) const = default;
};

struct FactorKeyHash {
  std::size_t operator()(const FactorKey& k) const {
    std::uint64_t h = 1469598103934665603ull;
    auto mix = [&h](std::uint64_t v) {
      h ^= v;
      h *= 1099511628211ull;
    };
    mix(k.kind);
    mix(static_cast<std::uint64_t>(k.occupation));
    mix(k.re_bits);
    mix(k.im_bits);
    return static_cast<std::size_t>(h);
  }
};

inline FactorKey make_factor_key(const ModeFactor& f) {
  if (f.is_number()) return {1, f.occupation(), 0, 0};
  return {0, 0, std::bit_cast<std::uint64_t>(f.amplitude().real()),
          std::bit_cast<std::uint64_t>(f.amplitude().imag())};
}

inline TermTable build_term_table(std::span<const WeightedTerm> a,
                                  std::span<const WeightedTerm> b,
                                  int mode_count) {
  TermTable t;
  t.mode_count = mode_count;
  t.split = static_cast<std::int64_t>(a.size());
  t.cross = !b.empty();
  t.total_terms = static_cast<std::int64_t>(a.size() + b.size());
  t.coefficients.reserve(t.total_terms);
  t.fid.resize(static_cast<std::size_t>(t.total_terms) * mode_count);

  std::unordered_map<FactorKey, std::int32_t, FactorKeyHash> ids;
  std::int64_t row = 0;
  auto ingest = [&](std::span<const WeightedTerm> terms) {
    for (const auto& wt : terms) {
      t.coefficients.push_back(wt.coefficient);
      for (int m = 0; m < mode_count; ++m) {
        const ModeFactor& f = wt.term[static_cast<std::size_t>(m)];
        auto [it, inserted] =
            ids.try_emplace(make_factor_key(f), t.unique_count());
        if (inserted) t.factors.push_back(f);
        t.fid[static_cast<std::size_t>(row) * mode_count + m] = it->second;
      }
      ++row;
    }
  };
  ingest(a);
  ingest(b);

  // Modes where every term carries a number factor.
  std::vector<int> number_modes;
  for (int m = 0; m < mode_count; ++m) {
    bool all_number = true;
    for (std::int64_t i = 0; i < t.total_terms && all_number; ++i) {
      all_number = t.factors[static_cast<std::size_t>(t.row(i)[m])].is_number();
    }
    if (all_number) number_modes.push_back(m);
  }

  std::vector<std::int64_t> order(static_cast<std::size_t>(t.total_terms));
  for (std::int64_t i = 0; i < t.total_terms; ++i)
    order[static_cast<std::size_t>(i)] = i;

  if (!number_modes.empty()) {
    auto signature_less = [&](std::int64_t x, std::int64_t y) {
      const std::int32_t* rx = t.row(x);
      const std::int32_t* ry = t.row(y);
      for (int m : number_modes) {
        const std::int64_t nx =
            t.factors[static_cast<std::size_t>(rx[m])].occupation();
        const std::int64_t ny =
            t.factors[static_cast<std::size_t>(ry[m])].occupation();
        if (nx != ny) return nx < ny;
      }
      return x < y;  // stable, deterministic bucket-internal order
    };
    std::sort(order.begin(), order.end(), signature_less);
    auto same_signature = [&](std::int64_t x, std::int64_t y) {
      const std::int32_t* rx = t.row(x);
      const std::int32_t* ry = t.row(y);
      for (int m : number_modes) {
        if (t.factors[static_cast<std::size_t>(rx[m])].occupation() !=
            t.factors[static_cast<std::size_t>(ry[m])].occupation())
          return false;
      }
      return true;
    };
    std::size_t begin = 0;
    while (begin < order.size()) {
      std::size_t end = begin + 1;
      while (end < order.size() && same_signature(order[begin], order[end]))
        ++end;
      t.buckets.emplace_back(order.begin() + begin, order.begin() + end);
      begin = end;
    }
  } else {
    t.buckets.push_back(std::move(order));
  }
  return t;
}

/// Sum over admissible term pairs of conj(c_i) c_j * prod_m bracket, with
/// the per-mode bracket supplied by `lookup(fid_bra, fid_ket, mode)`.
/// Summation order is a fixed function of the table, so results are
/// bit-reproducible.
template <class Lookup>
Complex pair_sum(const TermTable& t, Lookup&& lookup) {
  KahanComplex acc;
  const int modes = t.mode_count;
  for (const auto& bucket : t.buckets) {
    if (!t.cross) {
      for (std::int64_t i : bucket) {
        const Complex ci = std::conj(t.coefficients[static_cast<std::size_t>(i)]);
        const std::int32_t* fi = t.row(i);
        for (std::int64_t j : bucket) {
          Complex p = ci * t.coefficients[static_cast<std::size_t>(j)];
          const std::int32_t* fj = t.row(j);
          for (int m = 0; m < modes; ++m) p *= lookup(fi[m], fj[m], m);
          acc.add(p);
        }
      }
    } else {
      // Bucket entries are index-sorted, so the first state's terms form a
      // prefix.
      auto mid = std::lower_bound(bucket.begin(), bucket.end(), t.split);
      for (auto it = bucket.begin(); it != mid; ++it) {
        const Complex ci =
            std::conj(t.coefficients[static_cast<std::size_t>(*it)]);
        const std::int32_t* fi = t.row(*it);
        for (auto jt = mid; jt != bucket.end(); ++jt) {
          Complex p = ci * t.coefficients[static_cast<std::size_t>(*jt)];
          const std::int32_t* fj = t.row(*jt);
          for (int m = 0; m < modes; ++m) p *= lookup(fi[m], fj[m], m);
          acc.add(p);
        }
      }
    }
  }
  return acc.value();
}

/// Deduplicates per-mode weights into classes (exact bit equality) so
/// brackets can be cached per (factor pair, weight class).
struct WeightClasses {
  std::vector<std::int32_t> wid;  // one per mode
  std::vector<double> values;     // one per class
};

inline WeightClasses classify_weights(std::span<const double> weights) {
  WeightClasses wc;
  wc.wid.resize(weights.size());
  std::unordered_map<std::uint64_t, std::int32_t> ids;
  for (std::size_t m = 0; m < weights.size(); ++m) {
    const std::uint64_t key = std::bit_cast<std::uint64_t>(weights[m]);
    auto [it, inserted] =
        ids.try_emplace(key, static_cast<std::int32_t>(wc.values.size()));
    if (inserted) wc.values.push_back(weights[m]);
    wc.wid[m] = it->second;
  }
  return wc;
}

}  // namespace metroscope::detail
