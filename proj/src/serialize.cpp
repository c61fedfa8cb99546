#include "quadland/serialize.hpp"

namespace quadland {

namespace {

template <typename T>
json optional_value(const std::optional<T>& v) {
  return v ? json(*v) : json(nullptr);
}

}  // namespace

json to_json(const Moments& m) {
  return {{"mu2", m.mu2},         {"mu4", m.mu4},           {"c_lower", m.c_lower},
          {"c_upper", m.c_upper}, {"degenerate", m.degenerate}};
}

json to_json(const RiskReport& r) {
  return {{"value", r.value},
          {"lower", optional_value(r.lower_bound)},
          {"upper", optional_value(r.upper_bound)},
          {"grad_norm", optional_value(r.gradient_norm)}};
}

json to_json(const BarrierReport& r) {
  return {{"barrier", r.barrier_value},
          {"risk", r.risk_value},
          {"below", r.below},
          {"mode", to_string(r.constant_used)},
          {"sigma_min_teacher", r.sigma_min_teacher}};
}

json to_json(const StationarityCertificate& c) {
  return {{"full_rank", c.is_full_rank}, {"grad_norm", c.grad_norm}, {"gram_gap", c.gram_gap},
          {"risk", c.risk},             {"barrier", c.barrier},     {"verdict", to_string(c.verdict)}};
}

json to_json(const SweepResult& r, bool with_trials) {
  json out = {{"min_risk_found", r.min_risk_found},
              {"barrier", r.barrier},
              {"holds", r.holds},
              {"trials", r.trials.size()}};
  if (with_trials) {
    json rows = json::array();
    for (const auto& t : r.trials) {
      rows.push_back({{"index", t.index}, {"seed", t.seed}, {"rank", t.rank}, {"scale", t.scale},
                      {"risk", t.risk}});
    }
    out["trial_results"] = std::move(rows);
  }
  return out;
}

json to_json(const SpanReport& r) { return {{"rank", r.rank}, {"spans", r.spans}}; }

json to_json(const PrimeSpanCertificate& c) {
  return {{"d", c.d},
          {"n", c.n},
          {"distinct_exponents", c.distinct_exponents},
          {"distinct_nodes", c.distinct_nodes},
          {"exact_rank", c.exact_rank},
          {"double_rank", c.double_rank},
          {"equilibrated_rank", c.equilibrated_rank},
          {"spans", c.spans}};
}

json to_json(const NullInterpolatorCertificate& c) {
  return {{"empirical_risk", c.empirical_risk},
          {"population_risk", c.population_risk},
          {"lower_bound", c.lower_bound},
          {"max_quadratic_form", c.max_quadratic_form},
          {"spectral_norm", c.spectral_norm},
          {"interpolates", c.interpolates},
          {"above_lower_bound", c.above_lower_bound}};
}

json to_json(const SampleComplexityResult& r) {
  return {{"d", r.d},
          {"n_star", r.n_star},
          {"trials", r.at_n_star.size()},
          {"spans_fraction_at_n_star", r.spans_fraction_at_n_star},
          {"spans_fraction_below", r.spans_fraction_below}};
}

json to_json(const IterateRecord& r) {
  return {{"iteration", r.iteration}, {"risk", r.risk},         {"grad_norm", r.grad_norm},
          {"sigma_min", r.sigma_min}, {"fro_norm", r.fro_norm}, {"step", r.step},
          {"below_barrier", r.below_barrier}};
}

json trajectory_summary(const Trajectory& t) {
  return {{"termination", to_string(t.termination)},
          {"iterations", t.iterations},
          {"final_risk", t.final_risk},
          {"final_grad_norm", t.final_grad_norm},
          {"barrier", t.barrier},
          {"grad_tol", t.grad_tol},
          {"min_sigma_min", t.min_sigma_min},
          {"max_risk_increase", t.max_risk_increase},
          {"fallback_steps", t.fallback_steps},
          {"records", t.records.size()}};
}

json to_json(const StationarityReport& r) {
  return {{"epsilon", r.epsilon},
          {"empirical_risk", r.empirical_risk},
          {"population_risk", r.population_risk},
          {"gram_gap", r.gram_gap},
          {"recovered_gram_gap", optional_value(r.recovered_gram_gap)},
          {"rank_deficient", r.rank_deficient},
          {"verdict", r.verdict ? json(to_string(*r.verdict)) : json(nullptr)}};
}

json to_json(const SpectrumReport& r) {
  return {{"lambda_min", r.lambda_min},
          {"lambda_max", r.lambda_max},
          {"scaled_second_moment", r.scaled_second_moment},
          {"sigma_band", {r.band_low, r.band_high}},
          {"inside_band", r.inside_band}};
}

json to_json(const InitTrial& t) {
  return {{"index", t.index},
          {"seed", t.seed},
          {"barrier", to_json(t.barrier)},
          {"spectrum", to_json(t.spectrum)}};
}

json to_json(const InitSweep& s) {
  return {{"m", s.m},
          {"d", s.d},
          {"scale", to_string(s.scale)},
          {"trials", s.trials.size()},
          {"below_fraction", s.below_fraction},
          {"second_moment_fraction", s.second_moment_fraction},
          {"band_fraction", s.band_fraction}};
}

}  // namespace quadland
