#include "metroscope/metrology.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace metroscope {

namespace {

constexpr double kPi = std::numbers::pi;

// A local-minimum candidate must dip at least this far below 1 before the
// solver trusts it; flat d curves otherwise produce noise-level "minima".
constexpr double kMeaningfulDip = 1e-9;

constexpr std::int64_t kMaxScanSamples = 5'000'000;

/// Exact span of the phase exponents of an all-number state under the
/// evolution (-1 when the state has coherent factors, whose phase content
/// has no such closed form). This pins the scan resolution for number
/// states exactly instead of through the (2 nbar)^k estimate, which
/// overshoots by N^(k-1) for the entangled/separable families.
double number_state_rate(const SuperpositionState& state,
                         const EvolutionSpec& evolution) {
  double lo = 0.0, hi = 0.0;
  bool first = true;
  for (const auto& wt : state.terms()) {
    double exponent = 0.0;
    if (evolution.generator() == Generator::PerMode) {
      for (int m = 0; m < state.mode_count(); ++m) {
        const ModeFactor& f = wt.term[static_cast<std::size_t>(m)];
        if (!f.is_number()) return -1.0;
        exponent += evolution.mode_weights()[static_cast<std::size_t>(m)] *
                    occupation_phase(f.occupation(), evolution.order());
      }
    } else {
      std::int64_t total = 0;
      for (const ModeFactor& f : wt.term) {
        if (!f.is_number()) return -1.0;
        total += f.occupation();
      }
      exponent = evolution.mode_weights()[0] *
                 occupation_phase(total, evolution.order());
    }
    lo = first ? exponent : std::min(lo, exponent);
    hi = first ? exponent : std::max(hi, exponent);
    first = false;
  }
  return hi - lo;
}

int family_mode_count(const FamilySpec& spec) {
  switch (spec.family) {
    case Family::CoherentCat:
    case Family::NumberCat:
      return 1;
    case Family::Noon:
      return 2;
    default:
      return spec.size;
  }
}

double half_cos(double angle) { return 0.5 * (1.0 + std::cos(angle)); }

struct ScanOutcome {
  enum class Kind { Found, Pathology, NoCrossing } kind;
  ThetaMinResult result;
  double min_d_seen = 1.0;
  // Scan-level bracket around the delta = 0 minimum, before refinement.
  double scan_bracket_lo = 0.0;
  double scan_bracket_hi = 0.0;
};

template <class Eval>
ThetaMinResult bisect_crossing(Eval&& eval, double lo, double hi, double d_hi,
                               double delta, double tol) {
  for (int iter = 0; iter < 200 && (hi - lo) > tol * hi; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double d = eval(mid);
    if (d <= delta) {
      hi = mid;
      d_hi = d;
    } else {
      lo = mid;
    }
  }
  ThetaMinResult r;
  r.theta_min = hi;
  r.achieved_d = d_hi;
  r.bracket_lo = lo;
  r.bracket_hi = hi;
  r.crossings_found = 1;
  return r;
}

template <class Eval>
ThetaMinResult golden_minimum(Eval&& eval, double a, double c, double tol) {
  constexpr double kGolden = 0.6180339887498949;
  double x1 = c - kGolden * (c - a);
  double x2 = a + kGolden * (c - a);
  double f1 = eval(x1);
  double f2 = eval(x2);
  for (int iter = 0; iter < 300 && (c - a) > tol * std::max(x1, 1e-300);
       ++iter) {
    if (f1 < f2) {
      c = x2;
      x2 = x1;
      f2 = f1;
      x1 = c - kGolden * (c - a);
      f1 = eval(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + kGolden * (c - a);
      f2 = eval(x2);
    }
  }
  ThetaMinResult r;
  if (f1 <= f2) {
    r.theta_min = x1;
    r.achieved_d = f1;
  } else {
    r.theta_min = x2;
    r.achieved_d = f2;
  }
  r.bracket_lo = a;
  r.bracket_hi = c;
  r.crossings_found = 1;
  return r;
}

/// Sharpens a delta = 0 minimum whose bottom is flatter than the rounding
/// noise of the pair sum (the separable families raise the oscillation to
/// the 2N-th power, leaving a wide plateau where golden section drifts).
/// Both flanks are bisected down to a level set chosen above the noise
/// floor; the crossings' midpoint locates the minimum of the symmetric
/// oscillation. The polished point is kept only when it evaluates no worse
/// than the golden-section one (or both sit below the noise floor).
template <class Eval>
ThetaMinResult polish_flat_minimum(Eval&& eval, ThetaMinResult golden,
                                   double scan_lo, double scan_hi, double step,
                                   double theta_max, double tol,
                                   double noise_floor) {
  // Walk the flanks out to a healthy height first; level crossings taken in
  // the rounding-noise zone would inherit its asymmetry.
  const double healthy =
      std::max({1e-6, 16.0 * golden.achieved_d, 16.0 * noise_floor});
  // Geometric stride: wide plateaus (the 2N-th-power minima) span many scan
  // steps. Walking past the neighbouring maximum would land on the wrong
  // flank, so a clear decrease stops the walk.
  auto expand = [&](double edge, double direction, double bound) {
    double d_edge = eval(edge);
    double stride = step;
    for (int guard = 0; d_edge < healthy && guard < 200; ++guard) {
      const double next = edge + direction * stride;
      if (direction < 0.0 ? next <= 0.0 : next > bound) break;
      const double d_next = eval(next);
      if (d_next < 0.5 * d_edge && d_edge > noise_floor * 16.0) break;
      edge = next;
      d_edge = d_next;
      stride *= 1.3;
    }
    return std::pair<double, double>{edge, d_edge};
  };
  auto [lo, d_lo] = expand(scan_lo > 0.0 ? scan_lo : 0.5 * step, -1.0, 0.0);
  auto [hi, d_hi] = expand(scan_hi, 1.0, theta_max);
  if (d_lo < healthy || d_hi < healthy) return golden;
  const double level =
      std::max({std::min(d_lo, d_hi) / 16.0, 4.0 * golden.achieved_d,
                4.0 * noise_floor});
  if (level >= std::min(d_lo, d_hi)) return golden;

  auto level_crossing = [&](double outside, double inside) {
    for (int iter = 0; iter < 200; ++iter) {
      const double mid = 0.5 * (outside + inside);
      if (mid == outside || mid == inside) break;
      if (std::abs(outside - inside) <=
          tol * std::max(std::abs(mid), 1e-300))
        break;
      (eval(mid) > level ? outside : inside) = mid;
    }
    return 0.5 * (outside + inside);
  };
  const double left = level_crossing(lo, golden.theta_min);
  const double right = level_crossing(hi, golden.theta_min);
  const double mid = 0.5 * (left + right);
  const double d_mid = eval(mid);
  const bool both_in_noise =
      d_mid < noise_floor && golden.achieved_d < noise_floor;
  if (d_mid <= golden.achieved_d || both_in_noise) {
    ThetaMinResult polished = golden;
    polished.theta_min = mid;
    polished.achieved_d = d_mid;
    polished.bracket_lo = left;
    polished.bracket_hi = right;
    return polished;
  }
  return golden;
}

/// One scan attempt over (0, theta_max] with the given step: find the first
/// threshold crossing (delta > 0) or the first meaningful local minimum
/// (delta = 0) and refine it.
template <class Eval>
ScanOutcome scan_attempt(Eval&& eval, double step, double theta_max,
                         double delta, double tol) {
  ScanOutcome out{ScanOutcome::Kind::NoCrossing, {}, 1.0};
  double prev2_theta = 0.0, prev2_d = 1.0;
  double prev_theta = 0.0, prev_d = 1.0;
  bool last = false;
  for (std::int64_t j = 1; !last && j <= kMaxScanSamples; ++j) {
    double theta = double(j) * step;
    if (theta >= theta_max) {
      theta = theta_max;
      last = true;
    }
    const double d = eval(theta);
    out.min_d_seen = std::min(out.min_d_seen, d);

    if (delta > 0.0) {
      if (d <= delta) {
        if (j == 1) {
          out.kind = ScanOutcome::Kind::Pathology;
          return out;
        }
        out.kind = ScanOutcome::Kind::Found;
        out.result = bisect_crossing(eval, prev_theta, theta, d, delta, tol);
        return out;
      }
    } else if (j >= 2 && prev_d <= prev2_d && prev_d < d &&
               prev_d < 1.0 - kMeaningfulDip) {
      if (j == 2) {
        out.kind = ScanOutcome::Kind::Pathology;
        return out;
      }
      out.kind = ScanOutcome::Kind::Found;
      out.result = golden_minimum(eval, prev2_theta, theta, tol);
      out.scan_bracket_lo = prev2_theta;
      out.scan_bracket_hi = theta;
      return out;
    }
    prev2_theta = prev_theta;
    prev2_d = prev_d;
    prev_theta = theta;
    prev_d = d;
  }
  return out;
}

}  // namespace

const char* scenario_name(Scenario scenario) {
  switch (scenario) {
    case Scenario::EqualAction: return "equal_action";
    case Scenario::Constrained: return "constrained";
    case Scenario::Collective: return "collective";
  }
  return "unknown";
}

Scenario parse_scenario(const std::string& name) {
  for (Scenario s : {Scenario::EqualAction, Scenario::Constrained,
                     Scenario::Collective})
    if (name == scenario_name(s)) return s;
  raise(ErrorCode::InvalidArgument,
        "unknown scenario '" + name +
            "' (valid: equal_action, constrained, collective)");
}

std::vector<double> scenario_weights(const FamilySpec& spec,
                                     Scenario scenario) {
  const int modes = family_mode_count(spec);
  const double w =
      scenario == Scenario::Constrained ? 1.0 / double(spec.size) : 1.0;
  std::vector<double> weights(static_cast<std::size_t>(modes), w);
  if (spec.family == Family::Noon) {
    // Only the first mode interacts; the second is passive.
    weights.back() = 0.0;
  }
  return weights;
}

EvolutionSpec make_evolution(const FamilySpec& spec, double order,
                             Scenario scenario) {
  if (scenario == Scenario::Collective)
    return EvolutionSpec::collective(order, 1.0, family_mode_count(spec));
  return EvolutionSpec::per_mode(order, scenario_weights(spec, scenario));
}

double distinguishability(const SuperpositionState& state,
                          const EvolutionSpec& evolution, double theta,
                          const SeriesBudget& budget) {
  const double d = std::norm(evolved_overlap(state, evolution, theta, budget));
  return std::clamp(d, 0.0, 1.0);
}

double analytic_distinguishability(const FamilySpec& spec, double order,
                                   double theta) {
  if (!(order > 0.0))
    raise(ErrorCode::InvalidArgument, "nonlinearity order k must be > 0");
  if (spec.size < 1)
    raise(ErrorCode::InvalidArgument, "family size N must be at least 1");
  const double n = double(spec.size);
  const double alpha_sq = std::norm(spec.alpha);
  switch (spec.family) {
    case Family::CoherentCat:
      return half_cos(theta * std::pow(n * alpha_sq, order));
    case Family::CoherentEntangled:
      return half_cos(theta * n * std::pow(alpha_sq, order));
    case Family::CoherentSeparable:
      return std::pow(half_cos(theta * std::pow(alpha_sq, order)), n);
    case Family::NumberCat:
    case Family::Noon:
      return half_cos(theta * occupation_phase(spec.size, order));
    case Family::NumberEntangled:
      return half_cos(theta * n);
    case Family::NumberSeparable:
      return std::pow(half_cos(theta), n);
  }
  raise(ErrorCode::Internal, "unhandled family");
}

ThetaMinResult theta_min(const SuperpositionState& state,
                         const EvolutionSpec& evolution,
                         const ThetaMinRequest& request,
                         const SeriesBudget& budget) {
  validate_budget(budget);
  if (!(request.delta >= 0.0 && request.delta < 1.0))
    raise(ErrorCode::InvalidArgument,
          "distinguishability threshold delta must lie in [0, 1)");
  if (!(request.theta_max > 0.0) || !std::isfinite(request.theta_max))
    raise(ErrorCode::InvalidArgument, "theta_max must be positive and finite");
  if (request.scan_points_per_period < 1)
    raise(ErrorCode::InvalidArgument,
          "scan_points_per_period must be at least 1");
  if (!(request.bisection_tol > 0.0 && request.bisection_tol < 1.0))
    raise(ErrorCode::InvalidArgument, "bisection_tol must lie in (0, 1)");
  if (evolution.mode_count() != state.mode_count())
    raise(ErrorCode::DimensionMismatch,
          "evolution weights cover " + std::to_string(evolution.mode_count()) +
              " modes but the state has " + std::to_string(state.mode_count()));

  const double norm_sq = inner_product(state, state).real();
  if (std::abs(norm_sq - 1.0) > 1e-8)
    raise(ErrorCode::InvalidArgument,
          "state must be unit norm (|<psi|psi>|^2 = " +
              std::to_string(norm_sq) + ")");

  const double nbar = mean_photon_number(state);
  const double exact_rate = number_state_rate(state, evolution);
  const double scale =
      exact_rate >= 0.0
          ? exact_rate
          : std::pow(2.0 * nbar, evolution.order()) * evolution.rate_scale();
  if (!(scale > 0.0) || !std::isfinite(scale))
    raise(ErrorCode::NoCrossing,
          "no crossing: the state does not evolve (oscillation scale " +
              std::to_string(scale) + ")");

  auto eval = [&](double theta) {
    return distinguishability(state, evolution, theta, budget);
  };

  const double base_step =
      std::min(2.0 * kPi / (scale * double(request.scan_points_per_period)),
               request.theta_max / double(request.scan_points_per_period));

  // Absolute noise floor of the pair-summed d; level-set polishing must not
  // descend below it.
  const double noise_floor =
      std::pow(double(state.term_count()) * 1e-15, 2.0) + 1e-60;

  double min_d_seen = 1.0;
  bool pathological = false;
  for (int attempt = 0; attempt < 2; ++attempt) {
    const double step = attempt == 0 ? base_step : base_step / 4.0;
    ScanOutcome out = scan_attempt(eval, step, request.theta_max,
                                   request.delta, request.bisection_tol);
    min_d_seen = std::min(min_d_seen, out.min_d_seen);
    if (out.kind == ScanOutcome::Kind::Found) {
      if (request.delta == 0.0) {
        out.result = polish_flat_minimum(
            eval, out.result, out.scan_bracket_lo, out.scan_bracket_hi, step,
            request.theta_max, request.bisection_tol, noise_floor);
      }
      out.result.scan_step = step;
      return out.result;
    }
    pathological = out.kind == ScanOutcome::Kind::Pathology;
    if (!pathological) break;
    // Threshold already met at the very first sample: shrink the step once
    // and rescan before giving up.
  }
  if (pathological)
    raise(ErrorCode::NoCrossing,
          "scan bracket pathology: the first scan sample already sits past "
          "the target even after a 4x finer rescan (oscillation-scale "
          "aliasing suspected)");
  raise(ErrorCode::NoCrossing,
        "no crossing within theta_max = " + std::to_string(request.theta_max) +
            " (minimum d observed " + std::to_string(min_d_seen) + ")");
}

double predicted_theta_min(const FamilySpec& spec, double order,
                           Scenario scenario, double delta,
                           bool exact_arccos) {
  if (!(order > 0.0))
    raise(ErrorCode::InvalidArgument, "nonlinearity order k must be > 0");
  if (!(delta >= 0.0 && delta < 1.0))
    raise(ErrorCode::InvalidArgument, "delta must lie in [0, 1)");
  const double nbar = nominal_mean_photon(spec);
  if (!(nbar > 0.0))
    raise(ErrorCode::InvalidArgument,
          "prediction requires a positive mean photon number");
  const double pi_eff =
      delta == 0.0 ? kPi
                   : (exact_arccos ? std::acos(2.0 * delta - 1.0)
                                   : kPi - 2.0 * std::sqrt(delta));
  const double two_nbar = 2.0 * nbar;
  const double n = double(spec.size);

  switch (scenario) {
    case Scenario::EqualAction:
      switch (spec.family) {
        case Family::CoherentCat:
          return pi_eff / std::pow(two_nbar, order);
        case Family::CoherentEntangled:
          return pi_eff * std::pow(n, order - 1.0) / std::pow(two_nbar, order);
        case Family::CoherentSeparable:
          return pi_eff * std::pow(n, order - 0.5) / std::pow(two_nbar, order);
        case Family::NumberCat:
        case Family::Noon:
          return pi_eff / std::pow(two_nbar, order);
        case Family::NumberEntangled:
          return pi_eff / two_nbar;
        case Family::NumberSeparable:
          return pi_eff / std::sqrt(two_nbar);
      }
      break;
    case Scenario::Constrained:
      switch (spec.family) {
        case Family::CoherentCat:
          return pi_eff / std::pow(two_nbar, order);
        case Family::CoherentEntangled:
          return pi_eff * std::pow(n, order) / std::pow(two_nbar, order);
        case Family::CoherentSeparable:
          return pi_eff * std::pow(n, order + 0.5) / std::pow(two_nbar, order);
        case Family::NumberCat:
        case Family::Noon:
          return pi_eff / std::pow(two_nbar, order - 1.0);
        case Family::NumberEntangled:
          return pi_eff;
        case Family::NumberSeparable:
          return pi_eff * std::sqrt(two_nbar);
      }
      break;
    case Scenario::Collective:
      if (spec.family == Family::CoherentEntangled)
        return pi_eff / std::pow(two_nbar, order);
      raise(ErrorCode::NotCovered,
            "no closed-form predictor for the collective generator with "
            "family " +
                std::string(family_name(spec.family)));
  }
  raise(ErrorCode::Internal, "unhandled predictor combination");
}

double cramer_rao_rhs(const CramerRaoQuery& query) {
  if (!std::isfinite(query.delta_theta))
    raise(ErrorCode::InvalidArgument, "delta_theta must be finite");
  if (query.measurements < 1)
    raise(ErrorCode::InvalidArgument, "measurement count must be at least 1");
  if (query.distinguishability < 0.0)
    raise(ErrorCode::InvalidArgument, "distinguishability must be >= 0");
  if (query.distinguishability >= 1.0)
    raise(ErrorCode::Divergence,
          "states indistinguishable (d >= 1): bound diverges");
  return query.delta_theta * query.delta_theta /
         (4.0 * double(query.measurements) * (1.0 - query.distinguishability));
}

double statistics_factor(const FamilySpec& spec) {
  if (spec.family == Family::CoherentSeparable ||
      spec.family == Family::NumberSeparable)
    return std::sqrt(double(spec.size));
  return 1.0;
}

}  // namespace metroscope
