#pragma once

#include <json.hpp>

#include "quadland/geometry.hpp"
#include "quadland/init.hpp"
#include "quadland/landscape.hpp"
#include "quadland/optimize.hpp"
#include "quadland/risk.hpp"

namespace quadland {

using json = nlohmann::ordered_json;

json to_json(const Moments& m);
json to_json(const RiskReport& r);
json to_json(const BarrierReport& r);
json to_json(const StationarityCertificate& c);
json to_json(const SweepResult& r, bool with_trials);
json to_json(const SpanReport& r);
json to_json(const PrimeSpanCertificate& c);
json to_json(const NullInterpolatorCertificate& c);
json to_json(const SampleComplexityResult& r);
json to_json(const IterateRecord& r);
json trajectory_summary(const Trajectory& t);
json to_json(const StationarityReport& r);
json to_json(const SpectrumReport& r);
json to_json(const InitTrial& t);
json to_json(const InitSweep& s);

}  // namespace quadland
